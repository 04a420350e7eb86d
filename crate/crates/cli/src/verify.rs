//! Property suites behind `qcalc verify`. Every identity reports its worst
//! residual; errors raised inside a suite become failed checks.

use std::sync::Arc;

use num_traits::{One, Zero};
use qcalc_core::algebra::{monomial_basis, rank_of, Tower};
use qcalc_core::basis::{BasisFamily, BasisPolynomial, ConstantBasis, Family};
use qcalc_core::derivative::leibniz_residual;
use qcalc_core::taylor::{operator_taylor_check, taylor_expand, OrbitGrid};
use qcalc_core::tension::validate_frame;
use qcalc_core::{qderiv, Polynomial, QuantumFrame, Rational, Result, ScalarFn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::commands::{fmt, taylor_checks, worst};
use crate::report::Report;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Tension,
    Leibniz,
    Descent,
    Lambda,
    Algebra,
    Taylor,
    All,
}

impl Suite {
    pub fn needs_frame(self) -> bool {
        self != Suite::Algebra
    }
}

pub struct Sizes {
    pub max_order: usize,
    pub samples: usize,
    pub cases: usize,
    pub seed: u64,
}

/// Admissible points from a fixed spread, in a fixed order.
pub fn sample_points(frame: &QuantumFrame<Rational>, count: usize) -> Vec<Rational> {
    let r = |n: i64, d: i64| Rational::new(n.into(), d.into());
    let spread = [
        r(1, 3),
        r(2, 1),
        r(-5, 2),
        r(7, 1),
        r(3, 4),
        r(-1, 1),
        r(11, 5),
        r(0, 1),
        r(-7, 3),
        r(5, 1),
        r(9, 8),
        r(-4, 1),
        r(13, 6),
        r(3, 1),
        r(-9, 4),
        r(17, 7),
        r(6, 1),
        r(-2, 5),
        r(19, 3),
        r(8, 1),
    ];
    spread.into_iter().filter(|p| frame.is_admissible(p)).take(count).collect()
}

fn base_point(frame: &QuantumFrame<Rational>, samples: &[Rational]) -> Rational {
    let one = Rational::one();
    if frame.is_admissible(&one) {
        one
    } else {
        samples.first().cloned().unwrap_or(one)
    }
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    Rational::new(rng.gen_range(-20i64..=20).into(), rng.gen_range(1i64..=6).into())
}

fn random_poly(rng: &mut ChaCha8Rng, max_degree: usize) -> Polynomial {
    let deg = rng.gen_range(0..=max_degree);
    Polynomial::new((0..=deg).map(|_| random_rational(rng)).collect())
}

/// Records `Ok(residuals)` as one identity check, `Err` as a failure.
fn record(report: &mut Report, name: String, outcome: Result<Vec<Rational>>, detail: String) {
    match outcome {
        Ok(residuals) => {
            let w = worst(residuals);
            report.check(name, w.is_zero(), fmt(&w), detail);
        }
        Err(e) => report.check(name, false, "", e.to_string()),
    }
}

pub fn tension(report: &mut Report, frame: &QuantumFrame<Rational>, sizes: &Sizes, prefix: &str) {
    let samples = sample_points(frame, sizes.samples.min(8));
    for c in validate_frame(frame, &samples).checks {
        report.check(format!("{prefix}tension/{}", c.name), c.passed, "", c.detail);
    }
}

pub fn leibniz(report: &mut Report, frame: &QuantumFrame<Rational>, sizes: &Sizes, prefix: &str) {
    let mut rng = ChaCha8Rng::seed_from_u64(sizes.seed);
    let samples = sample_points(frame, 20);
    let outcome = (0..sizes.cases)
        .map(|_| {
            let (f, g) = (random_poly(&mut rng, 6), random_poly(&mut rng, 6));
            let p = &samples[rng.gen_range(0..samples.len())];
            leibniz_residual(frame, &f.to_fn(), &g.to_fn(), p)
        })
        .collect();
    record(report, format!("{prefix}leibniz"), outcome, format!("{} random polynomial pairs", sizes.cases));
}

fn descent_residuals(
    frame: &QuantumFrame<Rational>,
    fam: Family,
    n: usize,
    q: &Rational,
    samples: &[Rational],
) -> Result<Vec<Rational>> {
    let family = Arc::new(BasisFamily::unit(frame, q.clone(), n)?);
    let upper = BasisPolynomial::new(family.clone(), fam, n)?.to_fn();
    let lower = BasisPolynomial::new(family.clone(), fam, n - 1)?;
    let factor = if fam == Family::Theta { family.quantum_int().value(n) } else { Rational::one() };
    samples.iter().map(|p| Ok(qderiv(frame, &upper, p)? - factor.clone() * lower.eval(p)?)).collect()
}

pub fn descent(report: &mut Report, frame: &QuantumFrame<Rational>, sizes: &Sizes, prefix: &str) {
    let samples = sample_points(frame, sizes.samples);
    let q = base_point(frame, &samples);
    for n in 1..=sizes.max_order {
        for (fam, tag) in [(Family::Theta, "theta"), (Family::Zeta, "zeta")] {
            let outcome = descent_residuals(frame, fam, n, &q, &samples);
            record(report, format!("{prefix}descent/{tag}[n={n}]"), outcome, format!("{} points", samples.len()));
        }
    }
}

pub fn lambda(report: &mut Report, frame: &QuantumFrame<Rational>, sizes: &Sizes, prefix: &str) {
    let samples = sample_points(frame, sizes.samples);
    let q = base_point(frame, &samples);
    for m in 1..=sizes.max_order {
        let vanish = BasisFamily::unit(frame, q.clone(), m).and_then(|f| f.lambda(m, &q)).map(|v| vec![v]);
        record(report, format!("{prefix}lambda/vanishing[m={m}]"), vanish, format!("at q = {}", fmt(&q)));
        let outcome = descent_residuals(frame, Family::Lambda, m, &q, &samples);
        record(report, format!("{prefix}lambda/descent[m={m}]"), outcome, format!("{} points", samples.len()));
    }
}

pub fn taylor(report: &mut Report, frame: &QuantumFrame<Rational>, sizes: &Sizes, prefix: &str) {
    let mut rng = ChaCha8Rng::seed_from_u64(sizes.seed);
    let samples = sample_points(frame, sizes.samples);
    let q = base_point(frame, &samples);
    let degree = sizes.max_order.min(6);
    let outcome = (|| {
        let family = Arc::new(BasisFamily::unit(frame, q.clone(), degree)?);
        let basis = ConstantBasis::unit(q.clone());
        let mut residuals = Vec::new();
        for _ in 0..sizes.cases.min(16) {
            let n = rng.gen_range(0..=degree);
            let terms = (0..=n)
                .map(|k| {
                    Ok((random_rational(&mut rng), BasisPolynomial::new(family.clone(), Family::Lambda, k)?.to_fn()))
                })
                .collect::<Result<Vec<_>>>()?;
            let w = ScalarFn::linear_combination(terms);
            let exp = taylor_expand(frame, &basis, &w, n)?;
            for p in &samples {
                residuals.push(w.eval(p) - exp.reconstruct(p)?);
            }
        }
        Ok(residuals)
    })();
    record(report, format!("{prefix}taylor/reconstruct"), outcome, format!("degree <= {degree}"));

    let recip = ScalarFn::new("1/(x^2+1)", |x: &Rational| (x * x + Rational::one()).recip());
    let j_max = 12;
    for m in 0..=4usize.min(sizes.max_order) {
        let outcome = OrbitGrid::new(frame, Rational::from_integer(3.into()), j_max)
            .and_then(|grid| (0..j_max - m).map(|j| operator_taylor_check(&grid, &recip, m, j)).collect());
        record(report, format!("{prefix}taylor/operator[m={m}]"), outcome, "f = 1/(x^2+1) on the orbit lattice".into());
    }
}

pub fn algebra(report: &mut Report, tower: &Tower, m: usize) {
    if let Err(e) = taylor_checks(report, tower, m, "algebra/") {
        report.check("algebra/taylor_identity", false, "", e.to_string());
    }
    let ker = tower.base().d.kernel_basis();
    let mut n = 0;
    while (n + 1) * ker.len() <= tower.dim(0) {
        match monomial_basis(tower, &ker, n) {
            Ok(basis) => {
                let want = (n + 1) * ker.len();
                report.check(
                    format!("algebra/dimension[n={n}]"),
                    rank_of(&basis) == want,
                    "",
                    format!("rank {} of {want}", rank_of(&basis)),
                );
            }
            Err(e) => report.check(format!("algebra/dimension[n={n}]"), false, "", e.to_string()),
        }
        n += 1;
    }
}

pub fn run_frame_suites(
    report: &mut Report,
    suite: Suite,
    frame: &QuantumFrame<Rational>,
    sizes: &Sizes,
    prefix: &str,
) {
    let all = suite == Suite::All;
    if all || suite == Suite::Tension {
        tension(report, frame, sizes, prefix);
    }
    if all || suite == Suite::Leibniz {
        leibniz(report, frame, sizes, prefix);
    }
    if all || suite == Suite::Descent {
        descent(report, frame, sizes, prefix);
    }
    if all || suite == Suite::Lambda {
        lambda(report, frame, sizes, prefix);
    }
    if all || suite == Suite::Taylor {
        taylor(report, frame, sizes, prefix);
    }
}
