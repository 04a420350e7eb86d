//! The (sigma, tau) quantum difference and derivative, preset calculi, and
//! the Leibniz and kernel-closure checks.

use std::fmt;
use std::sync::Arc;

use crate::error::{QcalcError, Result};
use crate::scalar::{Rational, Scalar};
use crate::tension::{Direction, Domain, QuantumFrame, ShiftMap, TensionFn};

type UnaryFn<K> = Arc<dyn Fn(&K) -> K + Send + Sync>;

/// A real-valued function on domain points, compared only by evaluation.
#[derive(Clone)]
pub struct ScalarFn<K> {
    label: String,
    eval: UnaryFn<K>,
}

impl<K: Scalar> ScalarFn<K> {
    pub fn new(label: impl Into<String>, eval: impl Fn(&K) -> K + Send + Sync + 'static) -> Self {
        ScalarFn { label: label.into(), eval: Arc::new(eval) }
    }

    /// The identity function `e(x) = x`.
    pub fn identity() -> Self {
        Self::new("e", |x: &K| x.clone())
    }

    pub fn constant(c: K) -> Self {
        Self::new(format!("const {c}"), move |_: &K| c.clone())
    }

    /// Pointwise power `e^n`.
    pub fn power(n: u32) -> Self {
        Self::new(format!("e^{n}"), move |x: &K| x.powi(n))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, p: &K) -> K {
        (self.eval)(p)
    }

    pub fn product(&self, other: &ScalarFn<K>) -> Self {
        let (f, g) = (self.eval.clone(), other.eval.clone());
        Self::new(format!("({})*({})", self.label, other.label), move |x: &K| f(x) * g(x))
    }

    /// `a*self + b*other`.
    pub fn combine(&self, a: K, other: &ScalarFn<K>, b: K) -> Self {
        let (f, g) = (self.eval.clone(), other.eval.clone());
        Self::new(format!("{a}*({}) + {b}*({})", self.label, other.label), move |x: &K| {
            a.clone() * f(x) + b.clone() * g(x)
        })
    }

    /// `sum c_i f_i`.
    pub fn linear_combination(terms: Vec<(K, ScalarFn<K>)>) -> Self {
        let label = terms.iter().map(|(c, f)| format!("{c}*({})", f.label)).collect::<Vec<_>>().join(" + ");
        Self::new(label, move |x: &K| terms.iter().fold(K::zero(), |acc, (c, f)| acc + c.clone() * f.eval(x)))
    }

    /// `self ∘ map`.
    pub fn compose(&self, map: &ShiftMap<K>) -> Self {
        let f = self.eval.clone();
        let map = map.clone();
        Self::new(format!("({}) o ({})", self.label, map.label()), move |x: &K| f(&map.apply(x)))
    }

    /// The function `p -> (D f)(p)`. Evaluation panics at non-admissible
    /// points, so use it only where the caller has checked admissibility.
    pub fn derivative(&self, frame: &QuantumFrame<K>) -> Self {
        let f = self.clone();
        let frame = frame.clone();
        Self::new(format!("D({})", self.label), move |p: &K| {
            qderiv(&frame, &f, p).unwrap_or_else(|e| panic!("derivative evaluated outside the calculus: {e}"))
        })
    }
}

impl<K> fmt::Debug for ScalarFn<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarFn").field("label", &self.label).finish()
    }
}

/// Preset calculus families.
#[derive(Debug, Clone, PartialEq)]
pub enum FrameKind {
    /// `sigma = id`, `tau = x + h`.
    H { h: Rational },
    /// `sigma = id`, `tau = q x`.
    Q { q: Rational },
    /// `sigma = x - h`, `tau = x + h`.
    HSymmetric { h: Rational },
    /// `sigma = x / q`, `tau = q x`.
    QSymmetric { q: Rational },
    /// `sigma = q' x + h'`, `tau = q x + h`.
    Affine { q: Rational, h: Rational, q_prime: Rational, h_prime: Rational },
}

impl FrameKind {
    pub fn tag(&self) -> &'static str {
        match self {
            FrameKind::H { .. } => "h",
            FrameKind::Q { .. } => "q",
            FrameKind::HSymmetric { .. } => "h_symmetric",
            FrameKind::QSymmetric { .. } => "q_symmetric",
            FrameKind::Affine { .. } => "affine",
        }
    }

    pub fn validate(&self) -> Result<()> {
        use num_traits::{One, Zero};
        let bad = |msg: &str| Err(QcalcError::InvalidParams(msg.to_string()));
        match self {
            FrameKind::H { h } | FrameKind::HSymmetric { h } if h.is_zero() => bad("h must be nonzero"),
            FrameKind::Q { q } if q.is_zero() || q.is_one() => bad("q must not be 0 or 1"),
            FrameKind::QSymmetric { q } if q.is_zero() || q.is_one() || *q == -Rational::one() => {
                bad("q must not be 0, 1 or -1")
            }
            FrameKind::Affine { q, h, q_prime, h_prime } => {
                if q == q_prime && h == h_prime {
                    bad("affine frame needs q != q' or h != h'")
                } else if q.is_zero() || q_prime.is_zero() {
                    bad("affine scale factors must be nonzero")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// `(q, h, q', h')` with `tau = q x + h` and `sigma = q' x + h'`.
    pub fn affine_params(&self) -> (Rational, Rational, Rational, Rational) {
        use num_traits::{One, Zero};
        let (one, zero) = (Rational::one(), Rational::zero());
        match self {
            FrameKind::H { h } => (one.clone(), h.clone(), one, zero),
            FrameKind::Q { q } => (q.clone(), zero.clone(), one, zero),
            FrameKind::HSymmetric { h } => (one.clone(), h.clone(), one, -h.clone()),
            FrameKind::QSymmetric { q } => (q.clone(), zero.clone(), one / q.clone(), zero),
            FrameKind::Affine { q, h, q_prime, h_prime } => (q.clone(), h.clone(), q_prime.clone(), h_prime.clone()),
        }
    }

    fn name(&self) -> String {
        use crate::scalar::format_rational as f;
        match self {
            FrameKind::H { h } => format!("h(h={})", f(h)),
            FrameKind::Q { q } => format!("q(q={})", f(q)),
            FrameKind::HSymmetric { h } => format!("h_symmetric(h={})", f(h)),
            FrameKind::QSymmetric { q } => format!("q_symmetric(q={})", f(q)),
            FrameKind::Affine { q, h, q_prime, h_prime } => {
                format!("affine(q={}, h={}, q'={}, h'={})", f(q), f(h), f(q_prime), f(h_prime))
            }
        }
    }
}

/// Builds a preset frame with `theta(p1, p2) = p1 - p2`.
pub fn make_preset<K: Scalar>(kind: &FrameKind) -> Result<QuantumFrame<K>> {
    kind.validate()?;
    let (q, h, qp, hp) = kind.affine_params();
    let k = |r: &Rational| K::from_rational(r);
    let mut tau = ShiftMap::affine(k(&q), k(&h));
    let mut sigma = ShiftMap::affine(k(&qp), k(&hp));
    if matches!(kind, FrameKind::H { .. } | FrameKind::HSymmetric { .. }) {
        use num_traits::Signed;
        let (right, left) = if h.is_positive() {
            (Direction::Rightward, Direction::Leftward)
        } else {
            (Direction::Leftward, Direction::Rightward)
        };
        tau = tau.with_direction(right);
        if matches!(kind, FrameKind::HSymmetric { .. }) {
            sigma = sigma.with_direction(left);
        }
    }
    // (q - q') x + h - h' = 0 is the only excluded point when q != q'.
    let mut domain = Domain::all();
    if q != qp {
        let x = (hp.clone() - h.clone()) / (q.clone() - qp.clone());
        domain = domain.excluding([k(&x)]);
    }
    Ok(QuantumFrame::new(kind.name(), sigma, tau, TensionFn::difference(), k(&qp), k(&q)).with_domain(domain))
}

/// `f(tau(p)) - f(sigma(p))`.
pub fn qdiff<K: Scalar>(frame: &QuantumFrame<K>, f: &ScalarFn<K>, p: &K) -> Result<K> {
    let (up, down) = (frame.tau.apply(p), frame.sigma.apply(p));
    frame.check_domain(&up)?;
    frame.check_domain(&down)?;
    Ok(f.eval(&up) - f.eval(&down))
}

/// `[f(tau(p)) - f(sigma(p))] / theta(tau(p), sigma(p))`.
pub fn qderiv<K: Scalar>(frame: &QuantumFrame<K>, f: &ScalarFn<K>, p: &K) -> Result<K> {
    frame.require_admissible(p)?;
    let diff = qdiff(frame, f, p)?;
    Ok(diff / frame.step(p))
}

/// `(D^k f)(p)`, evaluated on the grid `sigma^i tau^j (p)`, `i + j <= k`.
///
/// Each grid value is computed once; the grid relies on sigma and tau
/// commuting, which `validate_frame` checks.
pub fn qderiv_iter<K: Scalar>(frame: &QuantumFrame<K>, f: &ScalarFn<K>, k: usize, p: &K) -> Result<K> {
    frame.check_domain(p)?;
    if k == 0 {
        return Ok(f.eval(p));
    }
    // points[i][j] = sigma^i tau^j (p), i + j <= k
    let mut points: Vec<Vec<K>> = Vec::with_capacity(k + 1);
    for i in 0..=k {
        let mut row = Vec::with_capacity(k + 1 - i);
        let mut x = frame.sigma.iterate(p, i);
        for j in 0..=(k - i) {
            if j > 0 {
                x = frame.tau.apply(&x);
            }
            frame.check_domain(&x)?;
            row.push(x.clone());
        }
        points.push(row);
    }
    let mut values: Vec<Vec<K>> = points.iter().map(|row| row.iter().map(|x| f.eval(x)).collect()).collect();
    for level in 1..=k {
        let span = k - level;
        let mut next = Vec::with_capacity(span + 1);
        for i in 0..=span {
            let mut row = Vec::with_capacity(span + 1 - i);
            for j in 0..=(span - i) {
                let x = &points[i][j];
                frame.require_admissible(x)?;
                let step = frame.theta.eval(&frame.tau.apply(x), &frame.sigma.apply(x));
                row.push((values[i][j + 1].clone() - values[i + 1][j].clone()) / step);
            }
            next.push(row);
        }
        values = next;
    }
    Ok(values[0][0].clone())
}

/// `D(f g)(p) - [f(tau(p)) Dg(p) + Df(p) g(sigma(p))]`.
pub fn leibniz_residual<K: Scalar>(frame: &QuantumFrame<K>, f: &ScalarFn<K>, g: &ScalarFn<K>, p: &K) -> Result<K> {
    let lhs = qderiv(frame, &f.product(g), p)?;
    let rhs = f.eval(&frame.tau.apply(p)) * qderiv(frame, g, p)? + qderiv(frame, f, p)? * g.eval(&frame.sigma.apply(p));
    Ok(lhs - rhs)
}

/// Checks that `zeta ∘ chi` stays in the kernel of D on the samples, after
/// verifying the preconditions (chi commutes with sigma and tau, D zeta = 0).
pub fn kernel_witness_check<K: Scalar>(
    frame: &QuantumFrame<K>,
    zeta: &ScalarFn<K>,
    chi: &ShiftMap<K>,
    samples: &[K],
) -> Result<bool> {
    if samples.is_empty() {
        return Err(QcalcError::EmptySamples);
    }
    for p in samples {
        let commutes_sigma = chi.apply(&frame.sigma.apply(p)).near(&frame.sigma.apply(&chi.apply(p)));
        let commutes_tau = chi.apply(&frame.tau.apply(p)).near(&frame.tau.apply(&chi.apply(p)));
        if !(commutes_sigma && commutes_tau) {
            return Err(QcalcError::CommutationFailure { point: p.to_string() });
        }
    }
    let admissible: Vec<&K> = samples.iter().filter(|p| frame.is_admissible(p)).collect();
    for p in &admissible {
        let d = qderiv(frame, zeta, p)?;
        if !d.negligible() {
            return Err(QcalcError::NotInKernel { point: p.to_string(), value: d.to_string() });
        }
    }
    let composed = zeta.compose(chi);
    for p in admissible {
        if !qderiv(frame, &composed, p)?.negligible() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};
    use crate::tension::Domain;

    fn preset(kind: FrameKind) -> QuantumFrame<Rational> {
        make_preset(&kind).unwrap()
    }

    #[test]
    fn presets() {
        let q2 = preset(FrameKind::Q { q: int(2) });
        assert!(q2.sigma.is_identity());
        assert_eq!(q2.tau.apply(&int(3)), int(6));
        assert_eq!((q2.s.clone(), q2.t.clone()), (int(1), int(2)));
        assert!(q2.domain.is_excluded(&int(0)));
        let h1 = preset(FrameKind::H { h: int(1) });
        assert_eq!((h1.s.clone(), h1.t.clone()), (int(1), int(1)));
        assert!(h1.domain.excluded().is_empty());
        let qs = preset(FrameKind::QSymmetric { q: int(3) });
        assert_eq!((qs.s.clone(), qs.t.clone()), (rat(1, 3), int(3)));
        assert_eq!(qs.sigma.apply_inverse(&int(1)), Some(int(3)));
        let bad = FrameKind::Affine { q: int(1), h: int(0), q_prime: int(1), h_prime: int(0) };
        assert!(matches!(make_preset::<Rational>(&bad), Err(QcalcError::InvalidParams(_))));
        assert!(make_preset::<Rational>(&FrameKind::H { h: int(0) }).is_err());
        assert!(make_preset::<Rational>(&FrameKind::Q { q: int(1) }).is_err());
        assert!(make_preset::<Rational>(&FrameKind::QSymmetric { q: int(-1) }).is_err());
        let aff = preset(FrameKind::Affine { q: int(3), h: int(1), q_prime: int(1), h_prime: int(2) });
        assert!(aff.domain.is_excluded(&rat(1, 2)));
    }

    #[test]
    fn differences_and_derivatives() {
        let h1 = preset(FrameKind::H { h: int(1) });
        let q2 = preset(FrameKind::Q { q: int(2) });
        let sq = ScalarFn::power(2);
        assert_eq!(qdiff(&h1, &sq, &int(2)).unwrap(), int(5));
        assert_eq!(qdiff(&q2, &ScalarFn::identity(), &int(1)).unwrap(), int(1));
        assert_eq!(qdiff(&q2, &ScalarFn::constant(int(4)), &int(0)).unwrap(), int(0));
        assert_eq!(qderiv(&q2, &sq, &int(1)).unwrap(), int(3));
        assert_eq!(qderiv(&h1, &sq, &int(2)).unwrap(), int(5));
        assert_eq!(qderiv(&q2, &ScalarFn::constant(rat(2, 3)), &rat(7, 5)).unwrap(), int(0));
        assert!(matches!(qderiv(&q2, &sq, &int(0)), Err(QcalcError::ZeroTension { .. })));
    }

    #[test]
    fn iterated_derivatives() {
        let h1 = preset(FrameKind::H { h: int(1) });
        let q2 = preset(FrameKind::Q { q: int(2) });
        assert_eq!(qderiv_iter(&h1, &ScalarFn::power(2), 0, &int(5)).unwrap(), int(25));
        assert_eq!(qderiv_iter(&h1, &ScalarFn::power(2), 2, &int(0)).unwrap(), int(2));
        assert_eq!(qderiv_iter(&q2, &ScalarFn::power(3), 1, &int(1)).unwrap(), int(7));
        assert_eq!(qderiv_iter(&q2, &ScalarFn::power(3), 3, &int(1)).unwrap(), int(21));
        assert_eq!(qderiv_iter(&q2, &ScalarFn::power(3), 4, &int(1)).unwrap(), int(0));
        assert!(matches!(qderiv_iter(&q2, &ScalarFn::power(3), 2, &int(0)), Err(QcalcError::ZeroTension { .. })));
    }

    #[test]
    fn leibniz_examples() {
        let e = ScalarFn::<Rational>::identity();
        for kind in [FrameKind::H { h: int(1) }, FrameKind::Q { q: int(2) }, FrameKind::HSymmetric { h: rat(1, 2) }] {
            let frame = preset(kind);
            assert_eq!(leibniz_residual(&frame, &e, &e, &int(2)).unwrap(), int(0));
            assert_eq!(
                leibniz_residual(&frame, &ScalarFn::constant(int(3)), &ScalarFn::power(4), &int(1)).unwrap(),
                int(0)
            );
        }
    }

    #[test]
    fn kernel_witnesses() {
        let h1 = preset(FrameKind::H { h: int(1) });
        let samples = [int(0), int(1), rat(5, 2)];
        assert!(kernel_witness_check(&h1, &ScalarFn::constant(int(1)), &h1.tau, &samples).unwrap());
        assert!(matches!(
            kernel_witness_check(&h1, &ScalarFn::identity(), &h1.tau, &samples),
            Err(QcalcError::NotInKernel { .. })
        ));
        let square = ShiftMap::new("x^2", |x: &Rational| x * x);
        assert!(matches!(
            kernel_witness_check(&h1, &ScalarFn::constant(int(1)), &square, &samples),
            Err(QcalcError::CommutationFailure { .. })
        ));
    }

    #[test]
    fn log_periodic_kernel_element() {
        let q2 = make_preset::<f64>(&FrameKind::Q { q: int(2) }).unwrap().with_domain(Domain::positive());
        let zeta = ScalarFn::new("sin(2 pi log2 x)", |x: &f64| (2.0 * std::f64::consts::PI * x.log2()).sin());
        let chi = ShiftMap::affine(4.0, 0.0);
        let samples = [0.3, 1.0, 1.7, 2.5, 10.0];
        assert!(kernel_witness_check(&q2, &zeta, &chi, &samples).unwrap());
        // A period-3 dilation breaks the witness: the composed function is not 2-periodic in log scale.
        let not_kernel =
            ScalarFn::new("sin(2 pi log3 x)", |x: &f64| (2.0 * std::f64::consts::PI * x.ln() / 3f64.ln()).sin());
        assert!(kernel_witness_check(&q2, &not_kernel, &chi, &samples).is_err());
    }

    #[test]
    fn float_frames_agree_with_exact() {
        let exact = preset(FrameKind::QSymmetric { q: rat(3, 2) });
        let float = make_preset::<f64>(&FrameKind::QSymmetric { q: rat(3, 2) }).unwrap();
        let d_exact = qderiv_iter(&exact, &ScalarFn::power(4), 2, &rat(7, 4)).unwrap();
        let d_float = qderiv_iter(&float, &ScalarFn::power(4), 2, &1.75).unwrap();
        assert!(f64::from_rational(&d_exact).near(&d_float));
    }
}
