//! Tension spaces: the point domain, tension functions, shift maps and the
//! frame that bundles them into a concrete calculus.

use std::fmt;
use std::sync::Arc;

use crate::error::{QcalcError, Result};
use crate::scalar::Scalar;

/// Default bound on `n` when checking that `rho^n` has no fixed points.
pub const DEFAULT_FIXED_POINT_BOUND: usize = 16;

type BinaryFn<K> = Arc<dyn Fn(&K, &K) -> K + Send + Sync>;
type UnaryFn<K> = Arc<dyn Fn(&K) -> K + Send + Sync>;
type Predicate<K> = Arc<dyn Fn(&K) -> bool + Send + Sync>;

/// An additive, skew-symmetric two-point function playing the role of a
/// coordinate difference.
#[derive(Clone)]
pub struct TensionFn<K> {
    label: String,
    eval: BinaryFn<K>,
}

impl<K: Scalar> TensionFn<K> {
    pub fn new(label: impl Into<String>, eval: impl Fn(&K, &K) -> K + Send + Sync + 'static) -> Self {
        TensionFn { label: label.into(), eval: Arc::new(eval) }
    }

    /// `theta(p1, p2) = p1 - p2`.
    pub fn difference() -> Self {
        Self::new("p1 - p2", |a: &K, b: &K| a.clone() - b.clone())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, p1: &K, p2: &K) -> K {
        (self.eval)(p1, p2)
    }
}

impl<K> fmt::Debug for TensionFn<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TensionFn").field("label", &self.label).finish()
    }
}

/// Sign of the displacement `theta(p, rho(p))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Rightward,
    Leftward,
    Undirected,
}

/// A self-map of the domain, optionally with a known inverse, homogeneity
/// coefficient and direction.
#[derive(Clone)]
pub struct ShiftMap<K> {
    label: String,
    forward: UnaryFn<K>,
    inverse: Option<UnaryFn<K>>,
    homogeneity: Option<K>,
    direction: Option<Direction>,
    identity: bool,
}

impl<K: Scalar> ShiftMap<K> {
    pub fn new(label: impl Into<String>, forward: impl Fn(&K) -> K + Send + Sync + 'static) -> Self {
        ShiftMap {
            label: label.into(),
            forward: Arc::new(forward),
            inverse: None,
            homogeneity: None,
            direction: None,
            identity: false,
        }
    }

    pub fn identity() -> Self {
        let mut map = Self::new("id", |x: &K| x.clone());
        map.inverse = Some(Arc::new(|x: &K| x.clone()));
        map.homogeneity = Some(K::one());
        map.identity = true;
        map
    }

    /// `x -> a*x + b`, with its inverse when `a != 0` and homogeneity `a`
    /// with respect to the difference tension.
    pub fn affine(a: K, b: K) -> Self {
        if a.is_one() && b.is_zero() {
            return Self::identity();
        }
        let label = format!("{a}*x + {b}");
        let (fa, fb) = (a.clone(), b.clone());
        let mut map = Self::new(label, move |x: &K| fa.clone() * x.clone() + fb.clone());
        if !a.is_zero() {
            let (ia, ib) = (a.clone(), b);
            map.inverse = Some(Arc::new(move |x: &K| (x.clone() - ib.clone()) / ia.clone()));
        }
        map.homogeneity = Some(a);
        map
    }

    pub fn with_inverse(mut self, inverse: impl Fn(&K) -> K + Send + Sync + 'static) -> Self {
        self.inverse = Some(Arc::new(inverse));
        self
    }

    pub fn with_homogeneity(mut self, r: K) -> Self {
        self.homogeneity = Some(r);
        self
    }

    pub fn with_direction(mut self, direction: Direction) -> Self {
        self.direction = Some(direction);
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_identity(&self) -> bool {
        self.identity
    }

    pub fn has_inverse(&self) -> bool {
        self.inverse.is_some()
    }

    pub fn declared_homogeneity(&self) -> Option<&K> {
        self.homogeneity.as_ref()
    }

    pub fn declared_direction(&self) -> Option<Direction> {
        self.direction
    }

    pub fn apply(&self, p: &K) -> K {
        (self.forward)(p)
    }

    pub fn apply_inverse(&self, p: &K) -> Option<K> {
        self.inverse.as_ref().map(|inv| inv(p))
    }

    /// Applies the map `n` times.
    pub fn iterate(&self, p: &K, n: usize) -> K {
        let mut x = p.clone();
        for _ in 0..n {
            x = self.apply(&x);
        }
        x
    }

    /// Applies the map `n` times for `n >= 0`, or its inverse `-n` times.
    pub fn iterate_signed(&self, p: &K, n: i64) -> Result<K> {
        if n >= 0 {
            return Ok(self.iterate(p, n as usize));
        }
        if self.identity {
            return Ok(p.clone());
        }
        let inverse = self.inverse.as_ref().ok_or(QcalcError::NoInverse)?;
        let mut x = p.clone();
        for _ in 0..(-n) {
            x = inverse(&x);
        }
        Ok(x)
    }

    /// The composition `self ∘ other`.
    pub fn compose(&self, other: &ShiftMap<K>) -> ShiftMap<K> {
        let (outer, inner) = (self.forward.clone(), other.forward.clone());
        let mut map = ShiftMap::new(format!("({}) o ({})", self.label, other.label), move |x: &K| outer(&inner(x)));
        if let (Some(oi), Some(ii)) = (self.inverse.clone(), other.inverse.clone()) {
            map.inverse = Some(Arc::new(move |x: &K| ii(&oi(x))));
        }
        if let (Some(a), Some(b)) = (&self.homogeneity, &other.homogeneity) {
            map.homogeneity = Some(a.clone() * b.clone());
        }
        map.identity = self.identity && other.identity;
        map
    }
}

impl<K> fmt::Debug for ShiftMap<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ShiftMap")
            .field("label", &self.label)
            .field("identity", &self.identity)
            .field("invertible", &self.inverse.is_some())
            .finish()
    }
}

/// Domain description: an optional membership predicate plus a list of
/// points excluded from the calculus.
#[derive(Clone)]
pub struct Domain<K> {
    restriction: Option<(String, Predicate<K>)>,
    excluded: Vec<K>,
}

impl<K: Scalar> Domain<K> {
    pub fn all() -> Self {
        Domain { restriction: None, excluded: Vec::new() }
    }

    pub fn positive() -> Self {
        Self::all().restricted("positive reals", |x: &K| x.is_positive())
    }

    pub fn restricted(mut self, label: impl Into<String>, pred: impl Fn(&K) -> bool + Send + Sync + 'static) -> Self {
        self.restriction = Some((label.into(), Arc::new(pred)));
        self
    }

    pub fn excluding(mut self, points: impl IntoIterator<Item = K>) -> Self {
        self.excluded.extend(points);
        self
    }

    pub fn contains(&self, p: &K) -> bool {
        self.restriction.as_ref().is_none_or(|(_, pred)| pred(p))
    }

    pub fn excluded(&self) -> &[K] {
        &self.excluded
    }

    pub fn is_excluded(&self, p: &K) -> bool {
        self.excluded.iter().any(|x| x.near(p))
    }

    pub fn describe(&self) -> String {
        self.restriction.as_ref().map_or_else(|| "all reals".to_string(), |(label, _)| label.clone())
    }
}

impl<K> fmt::Debug for Domain<K>
where
    K: fmt::Debug,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Domain")
            .field("restriction", &self.restriction.as_ref().map(|(l, _)| l))
            .field("excluded", &self.excluded)
            .finish()
    }
}

/// A concrete (sigma, tau) calculus.
#[derive(Clone, Debug)]
pub struct QuantumFrame<K> {
    pub name: String,
    pub sigma: ShiftMap<K>,
    pub tau: ShiftMap<K>,
    pub theta: TensionFn<K>,
    /// Homogeneity coefficient of theta with respect to sigma.
    pub s: K,
    /// Homogeneity coefficient of theta with respect to tau.
    pub t: K,
    pub base_points: Vec<(String, K)>,
    pub domain: Domain<K>,
}

impl<K: Scalar> QuantumFrame<K> {
    pub fn new(name: impl Into<String>, sigma: ShiftMap<K>, tau: ShiftMap<K>, theta: TensionFn<K>, s: K, t: K) -> Self {
        QuantumFrame { name: name.into(), sigma, tau, theta, s, t, base_points: Vec::new(), domain: Domain::all() }
    }

    pub fn with_domain(mut self, domain: Domain<K>) -> Self {
        self.domain = domain;
        self
    }

    pub fn with_base_point(mut self, label: impl Into<String>, p: K) -> Self {
        self.base_points.push((label.into(), p));
        self
    }

    pub fn check_domain(&self, p: &K) -> Result<()> {
        if self.domain.contains(p) {
            Ok(())
        } else {
            Err(QcalcError::DomainError { point: p.to_string(), reason: self.domain.describe() })
        }
    }

    /// `theta(tau(p), sigma(p))`, the denominator of the derivative at `p`.
    pub fn step(&self, p: &K) -> K {
        self.theta.eval(&self.tau.apply(p), &self.sigma.apply(p))
    }

    /// In the domain, not explicitly excluded, and with nonzero step.
    pub fn is_admissible(&self, p: &K) -> bool {
        self.domain.contains(p) && !self.domain.is_excluded(p) && !self.step(p).negligible()
    }

    /// Errors with `DomainError` or `ZeroTension` unless `p` is admissible.
    pub fn require_admissible(&self, p: &K) -> Result<()> {
        self.check_domain(p)?;
        if self.domain.is_excluded(p) || self.step(p).negligible() {
            return Err(QcalcError::ZeroTension { point: p.to_string() });
        }
        Ok(())
    }

    /// `sigma^i tau^j (p)`.
    pub fn grid_point(&self, p: &K, i: usize, j: usize) -> K {
        self.sigma.iterate(&self.tau.iterate(p, j), i)
    }

    /// `sigma^{-k}(p)`; available when sigma is the identity or invertible.
    pub fn sigma_inverse_power(&self, p: &K, k: usize) -> Result<K> {
        self.sigma.iterate_signed(p, -(k as i64))
    }

    pub fn base_point(&self, label: &str) -> Option<&K> {
        self.base_points.iter().find(|(l, _)| l == label).map(|(_, p)| p)
    }
}

/// `theta(p1, p2)`.
pub fn theta_eval<K: Scalar>(frame: &QuantumFrame<K>, p1: &K, p2: &K) -> Result<K> {
    frame.check_domain(p1)?;
    frame.check_domain(p2)?;
    Ok(frame.theta.eval(p1, p2))
}

/// The potential `theta_q(p) = theta(p, q)`.
pub fn potential<K: Scalar>(frame: &QuantumFrame<K>, q: &K, p: &K) -> Result<K> {
    theta_eval(frame, p, q)
}

/// Rightward iff `theta(p, rho(p)) < 0` on every sample, leftward iff `> 0`
/// on every sample.
pub fn classify_directed<K: Scalar>(frame: &QuantumFrame<K>, rho: &ShiftMap<K>, samples: &[K]) -> Result<Direction> {
    if samples.is_empty() {
        return Err(QcalcError::EmptySamples);
    }
    let mut right = true;
    let mut left = true;
    for p in samples {
        frame.check_domain(p)?;
        let d = frame.theta.eval(p, &rho.apply(p));
        if d.negligible() {
            return Ok(Direction::Undirected);
        }
        right &= d.is_negative();
        left &= d.is_positive();
    }
    Ok(match (right, left) {
        (true, _) => Direction::Rightward,
        (_, true) => Direction::Leftward,
        _ => Direction::Undirected,
    })
}

/// Infers `r` with `theta(rho(p1), rho(p2)) = r * theta(p1, p2)` from sample
/// pairs, checking that the ratio is constant.
pub fn homogeneity_coefficient<K: Scalar>(frame: &QuantumFrame<K>, rho: &ShiftMap<K>, pairs: &[(K, K)]) -> Result<K> {
    if pairs.is_empty() {
        return Err(QcalcError::EmptySamples);
    }
    let mut ratio: Option<K> = None;
    for (p1, p2) in pairs {
        frame.check_domain(p1)?;
        frame.check_domain(p2)?;
        let before = frame.theta.eval(p1, p2);
        let after = frame.theta.eval(&rho.apply(p1), &rho.apply(p2));
        if before.negligible() {
            if !after.negligible() {
                return Err(QcalcError::NotHomogeneous { first: "0".into(), other: after.to_string() });
            }
            continue;
        }
        let r = after / before;
        match &ratio {
            None => ratio = Some(r),
            Some(first) if !first.near(&r) => {
                return Err(QcalcError::NotHomogeneous { first: first.to_string(), other: r.to_string() })
            }
            Some(_) => {}
        }
    }
    let r = ratio.ok_or(QcalcError::DegenerateSample)?;
    let points: Vec<K> = pairs.iter().flat_map(|(a, b)| [a.clone(), b.clone()]).collect();
    if classify_directed(frame, rho, &points)? != Direction::Undirected && !r.is_positive() {
        return Err(QcalcError::DirectionConflict(r.to_string()));
    }
    Ok(r)
}

/// One named check of a frame validation.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, serde::Serialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: &str, failure: Option<String>) {
        self.checks.push(CheckResult {
            name: name.to_string(),
            passed: failure.is_none(),
            detail: failure.unwrap_or_else(|| "ok".to_string()),
        });
    }
}

/// Checks the frame axioms on a finite sample set.
///
/// Failures are recorded in the report rather than returned as errors.
pub fn validate_frame<K: Scalar>(frame: &QuantumFrame<K>, samples: &[K]) -> ValidationReport {
    validate_frame_with_bound(frame, samples, DEFAULT_FIXED_POINT_BOUND)
}

pub fn validate_frame_with_bound<K: Scalar>(frame: &QuantumFrame<K>, samples: &[K], bound: usize) -> ValidationReport {
    let mut report = ValidationReport::default();
    if samples.is_empty() {
        report.push("samples", Some("empty sample set".into()));
        return report;
    }
    let th = |a: &K, b: &K| frame.theta.eval(a, b);

    let mut additivity = None;
    'outer: for a in samples {
        for b in samples {
            for c in samples {
                let lhs = th(a, b) + th(b, c);
                let rhs = th(a, c);
                if !lhs.near(&rhs) {
                    additivity = Some(format!("theta({a},{b}) + theta({b},{c}) = {lhs} != {rhs}"));
                    break 'outer;
                }
            }
        }
    }
    report.push("additivity", additivity);

    let mut skew = None;
    'skew: for a in samples {
        for b in samples {
            if !th(a, b).near(&-th(b, a)) {
                skew = Some(format!("theta({a},{b}) != -theta({b},{a})"));
                break 'skew;
            }
        }
    }
    report.push("skew_symmetry", skew);

    let commute = samples.iter().find_map(|p| {
        let st = frame.sigma.apply(&frame.tau.apply(p));
        let ts = frame.tau.apply(&frame.sigma.apply(p));
        (!st.near(&ts)).then(|| format!("sigma(tau({p})) = {st} != {ts} = tau(sigma({p}))"))
    });
    report.push("commutation", commute);

    let tension = samples.iter().filter(|p| frame.domain.contains(p)).find_map(|p| {
        let note = if frame.domain.is_excluded(p) { " (excluded point)" } else { "" };
        frame.step(p).negligible().then(|| format!("theta(tau({p}), sigma({p})) = 0{note}"))
    });
    report.push("nonzero_tension", tension);

    for (name, map) in [("sigma", &frame.sigma), ("tau", &frame.tau)] {
        if let Some(declared) = map.declared_direction() {
            let failure = match classify_directed(frame, map, samples) {
                Ok(found) if found != declared => Some(format!("declared {declared:?}, found {found:?}")),
                Ok(_) => fixed_point_failure(frame, map, samples, bound),
                Err(e) => Some(e.to_string()),
            };
            report.push(&format!("{name}_directed"), failure);
        }
    }

    for (name, map, declared) in [("s", &frame.sigma, &frame.s), ("t", &frame.tau, &frame.t)] {
        let failure = samples.iter().find_map(|a| {
            samples.iter().find_map(|b| {
                let lhs = th(&map.apply(a), &map.apply(b));
                let rhs = declared.clone() * th(a, b);
                (!lhs.near(&rhs)).then(|| format!("theta at ({a},{b}) scales to {lhs}, expected {rhs}"))
            })
        });
        report.push(&format!("{name}_homogeneity"), failure);
    }
    report
}

/// For a directed map: `theta(rho^n(p), p)` is nonzero and keeps one sign
/// for `1 <= n <= bound`.
fn fixed_point_failure<K: Scalar>(
    frame: &QuantumFrame<K>,
    rho: &ShiftMap<K>,
    samples: &[K],
    bound: usize,
) -> Option<String> {
    for p in samples {
        let mut x = p.clone();
        let mut sign: Option<bool> = None;
        for n in 1..=bound {
            x = rho.apply(&x);
            let d = frame.theta.eval(&x, p);
            if d.negligible() {
                return Some(format!("rho^{n}({p}) = {p}"));
            }
            let positive = d.is_positive();
            if *sign.get_or_insert(positive) != positive {
                return Some(format!("theta(rho^{n}({p}), {p}) changes sign"));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivative::{make_preset, FrameKind};
    use crate::scalar::{int, rat, Rational};

    fn h1() -> QuantumFrame<Rational> {
        make_preset(&FrameKind::H { h: int(1) }).unwrap()
    }

    fn q2() -> QuantumFrame<Rational> {
        make_preset(&FrameKind::Q { q: int(2) }).unwrap()
    }

    #[test]
    fn theta_and_potential() {
        assert_eq!(theta_eval(&h1(), &int(3), &int(1)).unwrap(), int(2));
        assert_eq!(theta_eval(&q2(), &int(1), &int(2)).unwrap(), int(-1));
        assert_eq!(theta_eval(&q2(), &rat(5, 3), &rat(5, 3)).unwrap(), int(0));
        assert_eq!(potential(&h1(), &int(0), &int(3)).unwrap(), int(3));
        assert_eq!(potential(&q2(), &int(2), &int(1)).unwrap(), int(-1));
        assert_eq!(potential(&q2(), &int(7), &int(7)).unwrap(), int(0));
    }

    #[test]
    fn domain_restriction_is_enforced() {
        let frame = q2().with_domain(Domain::positive());
        assert!(matches!(theta_eval(&frame, &int(-1), &int(1)), Err(QcalcError::DomainError { .. })));
    }

    #[test]
    fn directedness() {
        let frame = h1();
        let samples = [int(0), int(1), int(2)];
        assert_eq!(classify_directed(&frame, &frame.tau, &samples).unwrap(), Direction::Rightward);
        assert_eq!(
            classify_directed(&frame, &ShiftMap::affine(int(1), int(-1)), &samples).unwrap(),
            Direction::Leftward
        );
        assert_eq!(classify_directed(&frame, &ShiftMap::identity(), &samples).unwrap(), Direction::Undirected);
        let pos = q2().with_domain(Domain::positive());
        assert_eq!(classify_directed(&pos, &pos.tau, &[int(1), int(2), int(3)]).unwrap(), Direction::Rightward);
        assert_eq!(classify_directed(&q2(), &q2().tau, &[int(-1), int(1)]).unwrap(), Direction::Undirected);
        assert_eq!(classify_directed(&frame, &frame.tau, &[]), Err(QcalcError::EmptySamples));
    }

    #[test]
    fn homogeneity() {
        let q = q2();
        assert_eq!(homogeneity_coefficient(&q, &q.tau, &[(int(1), int(2)), (int(3), int(5))]).unwrap(), int(2));
        assert_eq!(homogeneity_coefficient(&q, &ShiftMap::identity(), &[(int(1), int(4))]).unwrap(), int(1));
        let qs = make_preset::<Rational>(&FrameKind::QSymmetric { q: int(2) }).unwrap();
        assert_eq!(homogeneity_coefficient(&qs, &qs.sigma, &[(int(1), int(3))]).unwrap(), rat(1, 2));
        let square = ShiftMap::new("x^2", |x: &Rational| x * x);
        assert!(matches!(
            homogeneity_coefficient(&q, &square, &[(int(1), int(2)), (int(2), int(3))]),
            Err(QcalcError::NotHomogeneous { .. })
        ));
        assert_eq!(homogeneity_coefficient(&q, &q.tau, &[(int(1), int(1))]), Err(QcalcError::DegenerateSample));
        // x -> -x moves every positive point left but reverses tension.
        let flip = ShiftMap::affine(int(-1), int(0));
        assert!(matches!(
            homogeneity_coefficient(&q, &flip, &[(int(1), int(2))]),
            Err(QcalcError::DirectionConflict(_))
        ));
    }

    #[test]
    fn validation_reports() {
        let report = validate_frame(&h1(), &[int(0), int(1), int(2), int(3)]);
        assert!(report.all_passed(), "{report:?}");
        assert!(report.check("tau_directed").unwrap().passed);

        let product = QuantumFrame::new(
            "product",
            ShiftMap::identity(),
            ShiftMap::affine(int(1), int(1)),
            TensionFn::new("p1 * p2", |a: &Rational, b: &Rational| a * b),
            int(1),
            int(1),
        );
        let report = validate_frame(&product, &[int(1), int(2), int(3)]);
        assert!(!report.check("additivity").unwrap().passed);

        let report = validate_frame(&q2(), &[int(0), int(1), int(2)]);
        assert!(!report.check("nonzero_tension").unwrap().passed);
        assert!(validate_frame(&q2(), &[int(1), int(2), rat(-1, 2)]).all_passed());
    }

    #[test]
    fn validation_catches_wrong_declared_coefficients() {
        let mut frame = q2();
        frame.t = int(3);
        let report = validate_frame(&frame, &[int(1), int(2), int(5)]);
        assert!(!report.check("t_homogeneity").unwrap().passed);
        assert!(report.check("s_homogeneity").unwrap().passed);
    }

    #[test]
    fn non_commuting_maps_are_flagged() {
        let frame = QuantumFrame::new(
            "skewed",
            ShiftMap::affine(int(2), int(0)),
            ShiftMap::affine(int(1), int(1)),
            TensionFn::difference(),
            int(2),
            int(1),
        );
        assert!(!validate_frame(&frame, &[int(1), int(2)]).check("commutation").unwrap().passed);
    }

    #[test]
    fn signed_iteration() {
        let qs = make_preset::<Rational>(&FrameKind::QSymmetric { q: int(2) }).unwrap();
        assert_eq!(qs.sigma.iterate_signed(&int(1), -3).unwrap(), int(8));
        assert_eq!(qs.sigma.iterate_signed(&int(8), 3).unwrap(), int(1));
        let opaque = ShiftMap::new("opaque", |x: &Rational| x * int(3));
        assert_eq!(opaque.iterate_signed(&int(1), -1), Err(QcalcError::NoInverse));
    }
}
