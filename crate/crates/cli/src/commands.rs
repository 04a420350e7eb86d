//! `derive`, `basis`, `taylor` and `algebra`.

use std::sync::Arc;

use num_traits::{Signed, Zero};
use qcalc_core::algebra::{
    kernel_gradation, monomial_basis, poly_expand_matrix, poly_reconstruct, rank_of, taylor_identity_residual,
    DifferenceKind, LinOp, Tower, Vector,
};
use qcalc_core::basis::{orbit_samples, BasisFamily, BasisPolynomial, ConstantBasis, Family};
use qcalc_core::scalar::format_rational;
use qcalc_core::taylor::taylor_expand;
use qcalc_core::{qderiv_iter, Polynomial, QcalcError, QuantumFrame, Rational, Result};

use crate::report::Report;

pub fn fmt(r: &Rational) -> String {
    format_rational(r)
}

pub fn join(values: &[Rational]) -> String {
    values.iter().map(fmt).collect::<Vec<_>>().join(",")
}

/// The residual of largest magnitude, or zero for an empty list.
pub fn worst(residuals: impl IntoIterator<Item = Rational>) -> Rational {
    residuals.into_iter().fold(Rational::zero(), |acc, r| if r.abs() > acc.abs() { r } else { acc })
}

pub fn run_derive(
    report: Report,
    frame: &QuantumFrame<Rational>,
    expr: &str,
    points: &[Rational],
    order: usize,
) -> Result<Report> {
    let f = Polynomial::parse(expr)?.to_fn();
    let mut report = report.table(&["value"]).bare();
    for p in points {
        report.row(vec![fmt(&qderiv_iter(frame, &f, order, p)?)]);
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FamilyChoice {
    Theta,
    Zeta,
    Lambda,
    All,
}

pub fn run_basis(
    report: Report,
    frame: &QuantumFrame<Rational>,
    choice: FamilyChoice,
    max_order: usize,
    base: &Rational,
    at: &Rational,
) -> Result<Report> {
    let family = Arc::new(BasisFamily::unit(frame, base.clone(), max_order)?);
    let families: &[Family] = match choice {
        FamilyChoice::Theta => &[Family::Theta],
        FamilyChoice::Zeta => &[Family::Zeta],
        FamilyChoice::Lambda => &[Family::Lambda],
        FamilyChoice::All => &[Family::Theta, Family::Zeta, Family::Lambda],
    };
    let mut report = report.table(&["family", "order", "node_points", "value_at_p"]);
    for &fam in families {
        for order in 0..=max_order {
            let poly = BasisPolynomial::new(family.clone(), fam, order)?;
            report.row(vec![fam.name().to_string(), order.to_string(), join(poly.node_points()), fmt(&poly.eval(at)?)]);
        }
    }
    Ok(report)
}

pub fn run_taylor(
    report: Report,
    frame: &QuantumFrame<Rational>,
    expr: &str,
    base: &Rational,
    degree: usize,
    samples: usize,
    extra_points: &[Rational],
) -> Result<Report> {
    let w = Polynomial::parse(expr)?.to_fn();
    let basis = ConstantBasis::unit(base.clone());
    let exp = taylor_expand(frame, &basis, &w, degree)?;
    let mut report = report.table(&["k", "s", "lambda", "lambda_normalized"]);
    for term in &exp.terms {
        for (k, (c, n)) in term.coefficients.iter().zip(term.normalized()?).enumerate() {
            report.row(vec![k.to_string(), term.label.clone(), fmt(c), fmt(&n)]);
        }
    }
    let mut points = orbit_samples(frame, base, samples)?;
    points.extend(extra_points.iter().cloned());
    for p in points {
        let residual = w.eval(&p) - exp.reconstruct(&p)?;
        report.check(format!("reconstruct[p={}]", fmt(&p)), residual.is_zero(), fmt(&residual), "");
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Instance {
    Forward,
    Stride,
}

impl Instance {
    pub fn kind(self, stride: usize) -> DifferenceKind {
        match self {
            Instance::Forward => DifferenceKind::Forward,
            Instance::Stride => DifferenceKind::Stride(stride),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum AlgebraOp {
    /// D, the canonical right inverse R and F = I - R D
    Operators,
    /// I - sum R^k F D^k - R^{m+1} D^{m+1} for k up to m
    Taylor,
    /// dim ker D^m
    Gradation,
    /// R^m zeta for a kernel basis, with the rank check
    Monomial,
    /// z_k = F D^k u and the reconstruction of u
    Expand,
}

fn matrix_rows(report: &mut Report, name: &str, m: &LinOp) {
    for i in 0..m.rows() {
        report.row(vec![name.to_string(), i.to_string(), m.row(i).iter().map(fmt).collect::<Vec<_>>().join(" ")]);
    }
}

pub fn max_entry(m: &LinOp) -> Rational {
    worst((0..m.rows()).flat_map(|i| m.row(i).to_vec()))
}

pub struct AlgebraArgs {
    pub kind: DifferenceKind,
    pub n: usize,
    pub m: usize,
    pub op: AlgebraOp,
    pub vector: Option<Vector>,
}

pub fn run_algebra(report: Report, args: &AlgebraArgs) -> Result<Report> {
    let tower = Tower::difference(args.kind, args.n)?;
    let t = tower.base();
    let mut report = report;
    match args.op {
        AlgebraOp::Operators => {
            report = report.table(&["operator", "row", "entries"]);
            matrix_rows(&mut report, "D", &t.d);
            matrix_rows(&mut report, "R", &t.r);
            matrix_rows(&mut report, "F", &t.f);
            let ok = t.check();
            report.check("triple", ok.is_ok(), "", ok.err().map(|e| e.to_string()).unwrap_or_default());
        }
        AlgebraOp::Taylor => taylor_checks(&mut report, &tower, args.m, "")?,
        AlgebraOp::Gradation => {
            report = report.table(&["m", "dim_ker_d_m"]);
            let gk = kernel_gradation(&tower, args.m)?;
            for (m, dim) in gk.dims().into_iter().enumerate() {
                report.row(vec![(m + 1).to_string(), dim.to_string()]);
            }
        }
        AlgebraOp::Monomial => {
            report = report.table(&["m", "s", "vector"]);
            let ker = t.d.kernel_basis();
            let basis = monomial_basis(&tower, &ker, args.m)?;
            for (i, v) in basis.iter().enumerate() {
                report.row(vec![
                    (i / ker.len()).to_string(),
                    (i % ker.len()).to_string(),
                    v.iter().map(fmt).collect::<Vec<_>>().join(" "),
                ]);
            }
            let expected = (args.m + 1) * ker.len();
            report.check(
                "dimension",
                rank_of(&basis) == expected,
                "",
                format!("rank {} of {expected}", rank_of(&basis)),
            );
        }
        AlgebraOp::Expand => {
            let u = args
                .vector
                .clone()
                .ok_or_else(|| QcalcError::InvalidParams("--vector is required for expand".into()))?;
            if u.len() != args.n {
                return Err(QcalcError::BadShape(format!("vector has {} entries, N = {}", u.len(), args.n)));
            }
            report = report.table(&["k", "z_k"]);
            let parts = poly_expand_matrix(&tower, &u, args.m)?;
            for (k, z) in parts.iter().enumerate() {
                report.row(vec![k.to_string(), z.iter().map(fmt).collect::<Vec<_>>().join(" ")]);
            }
            let back = poly_reconstruct(&tower, &parts)?;
            let residual = worst(back.iter().zip(&u).map(|(a, b)| a - b));
            report.check("reconstruct", residual.is_zero(), fmt(&residual), "");
        }
    }
    Ok(report)
}

pub fn taylor_checks(report: &mut Report, tower: &Tower, m: usize, prefix: &str) -> Result<()> {
    for k in 0..=m {
        let res = taylor_identity_residual(tower, k)?;
        let worst = max_entry(&res);
        report.check(
            format!("{prefix}taylor_identity[m={k}]"),
            res.is_zero(),
            fmt(&worst),
            format!("{0}x{0}", res.rows()),
        );
    }
    Ok(())
}
