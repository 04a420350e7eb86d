//! Quantum integers and factorials, and the three D-polynomial families
//! built over a frame: the product basis `theta_q^(n)`, the normalized basis
//! `zeta^(k)` and the interpolation basis `Lambda^(m)`.

use std::fmt;
use std::sync::{Arc, Mutex};

use crate::derivative::{qderiv, qderiv_iter, ScalarFn};
use crate::error::{QcalcError, Result};
use crate::scalar::Scalar;
use crate::tension::QuantumFrame;

/// `[n] = sum_{k=1}^{n} t^{n-k} s^{k-1}`, memoized.
pub struct QuantumInt<K> {
    t: K,
    s: K,
    memo: Mutex<Vec<K>>,
}

impl<K: Scalar> QuantumInt<K> {
    pub fn new(t: K, s: K) -> Self {
        QuantumInt { t, s, memo: Mutex::new(vec![K::zero()]) }
    }

    pub fn for_frame(frame: &QuantumFrame<K>) -> Self {
        Self::new(frame.t.clone(), frame.s.clone())
    }

    pub fn t(&self) -> &K {
        &self.t
    }

    pub fn s(&self) -> &K {
        &self.s
    }

    /// `[n]`, with `[0] = 0`. Uses `[n] = t [n-1] + s^{n-1}`.
    pub fn value(&self, n: usize) -> K {
        let mut memo = self.memo.lock().expect("quantum integer memo poisoned");
        while memo.len() <= n {
            let m = memo.len();
            let next = self.t.clone() * memo[m - 1].clone() + self.s.powi((m - 1) as u32);
            memo.push(next);
        }
        memo[n].clone()
    }

    /// `[n]! = [n] [n-1]!`, `[0]! = 1`.
    pub fn factorial(&self, n: usize) -> Result<K> {
        let mut acc = K::one();
        for m in 1..=n {
            let v = self.value(m);
            if v.negligible() {
                return Err(QcalcError::ZeroFactor(m));
            }
            acc = acc * v;
        }
        Ok(acc)
    }
}

impl<K: fmt::Debug> fmt::Debug for QuantumInt<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuantumInt").field("t", &self.t).field("s", &self.s).finish()
    }
}

pub fn quantum_int<K: Scalar>(q: &QuantumInt<K>, n: usize) -> K {
    q.value(n)
}

pub fn quantum_factorial<K: Scalar>(q: &QuantumInt<K>, n: usize) -> Result<K> {
    q.factorial(n)
}

/// One kernel basis function `zeta_s` with its normalization point `q_s`.
#[derive(Clone, Debug)]
pub struct BasisEntry<K> {
    pub label: String,
    pub zeta: ScalarFn<K>,
    pub point: K,
}

/// A normalized family of D-constants, `zeta_s(q_t) = [s == t]`.
#[derive(Clone, Debug)]
pub struct ConstantBasis<K> {
    pub entries: Vec<BasisEntry<K>>,
}

impl<K: Scalar> ConstantBasis<K> {
    /// The single constant function 1 based at `q`.
    pub fn unit(q: K) -> Self {
        ConstantBasis { entries: vec![BasisEntry { label: "1".into(), zeta: ScalarFn::constant(K::one()), point: q }] }
    }

    pub fn new(entries: Vec<BasisEntry<K>>) -> Self {
        ConstantBasis { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, label: &str) -> Result<&BasisEntry<K>> {
        self.entries.iter().find(|e| e.label == label).ok_or_else(|| QcalcError::UnknownLabel(label.to_string()))
    }

    /// Checks the normalization table and `D zeta_s = 0` on the samples.
    pub fn validate(&self, frame: &QuantumFrame<K>, samples: &[K]) -> Result<()> {
        for a in &self.entries {
            for b in &self.entries {
                let expected = if a.label == b.label { K::one() } else { K::zero() };
                let got = a.zeta.eval(&b.point);
                if !got.near(&expected) {
                    return Err(QcalcError::InvalidParams(format!(
                        "zeta_{}({}) = {got}, expected {expected}",
                        a.label, b.point
                    )));
                }
            }
            for p in samples.iter().filter(|p| frame.is_admissible(p)) {
                let d = qderiv(frame, &a.zeta, p)?;
                if !d.negligible() {
                    return Err(QcalcError::NotInKernel { point: p.to_string(), value: d.to_string() });
                }
            }
        }
        Ok(())
    }
}

/// Which basis family a [`BasisPolynomial`] belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Theta,
    Zeta,
    Lambda,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Theta => "theta",
            Family::Zeta => "zeta",
            Family::Lambda => "lambda",
        }
    }
}

/// All three basis families for one `(frame, zeta_s, q_s)` up to a maximum
/// order, with node points, factorials and the Lambda recursion memoized at
/// construction.
pub struct BasisFamily<K> {
    frame: QuantumFrame<K>,
    entry: BasisEntry<K>,
    max_order: usize,
    qint: QuantumInt<K>,
    /// `nodes[n]` = `tau^{n-k} sigma^{k-1}(q)` for `k = 1..=n`.
    nodes: Vec<Vec<K>>,
    factorials: Vec<K>,
    /// `lambda[m][j]`: coefficient of `zeta^(j)` in `Lambda^(m)`.
    lambda: Vec<Vec<K>>,
}

impl<K: Scalar> BasisFamily<K> {
    pub fn new(frame: &QuantumFrame<K>, entry: &BasisEntry<K>, max_order: usize) -> Result<Self> {
        let q = &entry.point;
        let mut nodes = vec![Vec::new()];
        for n in 1..=max_order {
            let row: Vec<K> = (1..=n).map(|k| frame.grid_point(q, k - 1, n - k)).collect();
            for x in &row {
                frame.check_domain(x)?;
            }
            nodes.push(row);
        }
        let qint = QuantumInt::for_frame(frame);
        let factorials = (0..=max_order).map(|n| qint.factorial(n)).collect::<Result<Vec<_>>>()?;
        let mut family = BasisFamily {
            frame: frame.clone(),
            entry: entry.clone(),
            max_order,
            qint,
            nodes,
            factorials,
            lambda: Vec::new(),
        };
        if frame.sigma.is_identity() || frame.sigma.has_inverse() {
            family.lambda = family.lambda_table()?;
        }
        Ok(family)
    }

    /// Single-constant family `zeta = 1` based at `q`.
    pub fn unit(frame: &QuantumFrame<K>, q: K, max_order: usize) -> Result<Self> {
        let basis = ConstantBasis::unit(q);
        Self::new(frame, &basis.entries[0], max_order)
    }

    // Lambda^(m) = zeta^(m) - sum_{i<m} zeta^(m-i)(q_s) Lambda^(i)
    fn lambda_table(&self) -> Result<Vec<Vec<K>>> {
        let q = self.entry.point.clone();
        let at_base = (0..=self.max_order).map(|j| self.zeta(j, &q)).collect::<Result<Vec<_>>>()?;
        let mut table: Vec<Vec<K>> = Vec::with_capacity(self.max_order + 1);
        for m in 0..=self.max_order {
            let mut row = vec![K::zero(); self.max_order + 1];
            row[m] = K::one();
            if m > 0 {
                for i in 0..m {
                    let c = at_base[m - i].clone();
                    for j in 0..=i {
                        row[j] = row[j].clone() - c.clone() * table[i][j].clone();
                    }
                }
            }
            table.push(row);
        }
        Ok(table)
    }

    pub fn frame(&self) -> &QuantumFrame<K> {
        &self.frame
    }

    pub fn entry(&self) -> &BasisEntry<K> {
        &self.entry
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn quantum_int(&self) -> &QuantumInt<K> {
        &self.qint
    }

    pub fn nodes(&self, n: usize) -> &[K] {
        &self.nodes[n]
    }

    fn check_order(&self, n: usize) -> Result<()> {
        if n > self.max_order {
            return Err(QcalcError::BadShape(format!("order {n} exceeds family bound {}", self.max_order)));
        }
        Ok(())
    }

    /// `theta_q^(n)(p) = prod_k theta(p, tau^{n-k} sigma^{k-1}(q))`.
    pub fn theta(&self, n: usize, p: &K) -> Result<K> {
        self.check_order(n)?;
        Ok(self.nodes[n].iter().fold(K::one(), |acc, x| acc * self.frame.theta.eval(p, x)))
    }

    /// `zeta^(k)(p) = zeta_s(sigma^{-k}(p)) theta_q^(k)(p) / [k]!`.
    pub fn zeta(&self, k: usize, p: &K) -> Result<K> {
        self.check_order(k)?;
        let shifted = self.frame.sigma_inverse_power(p, k)?;
        Ok(self.entry.zeta.eval(&shifted) * self.theta(k, p)? / self.factorials[k].clone())
    }

    pub fn lambda(&self, m: usize, p: &K) -> Result<K> {
        self.check_order(m)?;
        if self.lambda.is_empty() {
            return Err(QcalcError::NoInverse);
        }
        let mut acc = K::zero();
        for (j, c) in self.lambda[m].iter().enumerate().take(m + 1) {
            if !c.is_zero() {
                acc = acc + c.clone() * self.zeta(j, p)?;
            }
        }
        Ok(acc)
    }

    pub fn eval(&self, family: Family, order: usize, p: &K) -> Result<K> {
        match family {
            Family::Theta => self.theta(order, p),
            Family::Zeta => self.zeta(order, p),
            Family::Lambda => self.lambda(order, p),
        }
    }

    /// Coefficients of `Lambda^(m)` in the zeta basis.
    pub fn lambda_coefficients(&self, m: usize) -> Option<&[K]> {
        self.lambda.get(m).map(|row| &row[..=m])
    }
}

/// A single basis element as an evaluable function.
#[derive(Clone)]
pub struct BasisPolynomial<K> {
    pub family: Family,
    pub order: usize,
    source: Arc<BasisFamily<K>>,
}

impl<K: Scalar> BasisPolynomial<K> {
    pub fn new(source: Arc<BasisFamily<K>>, family: Family, order: usize) -> Result<Self> {
        source.check_order(order)?;
        Ok(BasisPolynomial { family, order, source })
    }

    pub fn eval(&self, p: &K) -> Result<K> {
        self.source.eval(self.family, self.order, p)
    }

    pub fn node_points(&self) -> &[K] {
        self.source.nodes(self.order)
    }

    /// As a [`ScalarFn`]; panics on evaluation errors, which can only come
    /// from sigma^{-k} leaving the domain after construction succeeded.
    pub fn to_fn(&self) -> ScalarFn<K> {
        let me = self.clone();
        ScalarFn::new(format!("{}^({})", self.family.name(), self.order), move |p: &K| {
            me.eval(p).unwrap_or_else(|e| panic!("basis evaluation failed: {e}"))
        })
    }
}

impl<K> fmt::Debug for BasisPolynomial<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BasisPolynomial").field("family", &self.family).field("order", &self.order).finish()
    }
}

pub fn theta_poly_eval<K: Scalar>(frame: &QuantumFrame<K>, q: &K, n: usize, p: &K) -> Result<K> {
    let mut acc = K::one();
    for k in 1..=n {
        let node = frame.grid_point(q, k - 1, n - k);
        frame.check_domain(&node)?;
        acc = acc * frame.theta.eval(p, &node);
    }
    Ok(acc)
}

/// `D theta_q^(n)(p) - [n] theta_q^(n-1)(p)`.
pub fn theta_descent_residual<K: Scalar>(frame: &QuantumFrame<K>, q: &K, n: usize, p: &K) -> Result<K> {
    let family = Arc::new(BasisFamily::unit(frame, q.clone(), n)?);
    let f = BasisPolynomial::new(family.clone(), Family::Theta, n)?.to_fn();
    let lhs = qderiv(frame, &f, p)?;
    Ok(lhs - family.quantum_int().value(n) * family.theta(n - 1, p)?)
}

pub fn zeta_poly_eval<K: Scalar>(
    frame: &QuantumFrame<K>,
    basis: &ConstantBasis<K>,
    label: &str,
    k: usize,
    p: &K,
) -> Result<K> {
    BasisFamily::new(frame, basis.entry(label)?, k)?.zeta(k, p)
}

pub fn lambda_poly_eval<K: Scalar>(
    frame: &QuantumFrame<K>,
    basis: &ConstantBasis<K>,
    label: &str,
    m: usize,
    p: &K,
) -> Result<K> {
    BasisFamily::new(frame, basis.entry(label)?, m)?.lambda(m, p)
}

/// Points `tau^j(q)`, `j = 0, 1, ...`, that are admissible, up to `count`.
pub fn orbit_samples<K: Scalar>(frame: &QuantumFrame<K>, q: &K, count: usize) -> Result<Vec<K>> {
    let mut out: Vec<K> = Vec::with_capacity(count);
    let mut x = q.clone();
    for _ in 0..count * 4 + 8 {
        if out.len() == count {
            break;
        }
        if frame.is_admissible(&x) && !out.iter().any(|y| y.near(&x)) {
            out.push(x.clone());
        }
        x = frame.tau.apply(&x);
    }
    if out.len() < count {
        return Err(QcalcError::InsufficientSamples { needed: count, got: out.len() });
    }
    Ok(out)
}

/// Number of samples `degree_of_function` requires for a bound `n_max`.
pub fn required_samples(n_max: usize) -> usize {
    2 * (n_max + 1)
}

/// Smallest `m <= n_max` with `D^{m+1} f = 0` on every sample, or `None`
/// when no such `m` exists. A function vanishing on all samples has no
/// degree and also yields `None`; see [`vanishes_on`].
pub fn degree_of_function<K: Scalar>(
    frame: &QuantumFrame<K>,
    f: &ScalarFn<K>,
    samples: &[K],
    n_max: usize,
) -> Result<Option<usize>> {
    let needed = required_samples(n_max);
    if samples.len() < needed {
        return Err(QcalcError::InsufficientSamples { needed, got: samples.len() });
    }
    if vanishes_on(f, samples) {
        return Ok(None);
    }
    for m in 0..=n_max {
        let mut all_zero = true;
        for p in samples {
            if !qderiv_iter(frame, f, m + 1, p)?.negligible() {
                all_zero = false;
                break;
            }
        }
        if all_zero {
            return Ok(Some(m));
        }
    }
    Ok(None)
}

pub fn vanishes_on<K: Scalar>(f: &ScalarFn<K>, samples: &[K]) -> bool {
    samples.iter().all(|p| f.eval(p).negligible())
}

/// Coefficients `a_0..a_k` of `u = sum a_m zeta^(m)` for a single-label
/// basis: `a_k = D^k u(q_s)`, lower ones by subtracting the known higher
/// contributions at `q_s`.
pub fn coeff_extract<K: Scalar>(
    frame: &QuantumFrame<K>,
    basis: &ConstantBasis<K>,
    u: &ScalarFn<K>,
    k: usize,
) -> Result<Vec<K>> {
    if basis.len() != 1 {
        return Err(QcalcError::MultiLabelUnsupported(basis.len()));
    }
    let entry = &basis.entries[0];
    let samples = orbit_samples(frame, &entry.point, required_samples(k) + 2)?;
    if !vanishes_on(u, &samples) && degree_of_function(frame, u, &samples, k)?.is_none() {
        return Err(QcalcError::DegreeExceeded(k));
    }
    let family = BasisFamily::new(frame, entry, k)?;
    let q = &entry.point;
    let zeta_at_base = (0..=k).map(|j| family.zeta(j, q)).collect::<Result<Vec<_>>>()?;
    let mut a = vec![K::zero(); k + 1];
    for m in (0..=k).rev() {
        let mut v = qderiv_iter(frame, u, m, q)?;
        for j in 1..=(k - m) {
            v = v - a[m + j].clone() * zeta_at_base[j].clone();
        }
        a[m] = v;
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivative::make_preset;
    use crate::scalar::{int, rat, Rational};
    use crate::FrameKind;

    fn h1() -> QuantumFrame<Rational> {
        make_preset(&FrameKind::H { h: int(1) }).unwrap()
    }

    fn q2() -> QuantumFrame<Rational> {
        make_preset(&FrameKind::Q { q: int(2) }).unwrap()
    }

    #[test]
    fn quantum_integers() {
        let q = QuantumInt::new(int(2), int(1));
        assert_eq!(quantum_int(&q, 3), int(7));
        assert_eq!(quantum_int(&q, 0), int(0));
        assert_eq!(quantum_factorial(&q, 3).unwrap(), int(21));
        assert_eq!(quantum_factorial(&q, 0).unwrap(), int(1));
        let ones = QuantumInt::new(int(1), int(1));
        assert_eq!(quantum_int(&ones, 5), int(5));
        assert_eq!(quantum_factorial(&ones, 4).unwrap(), int(24));
    }

    #[test]
    fn zero_factor_is_reported() {
        // q = -1: [2] = 1 + q = 0
        let q = QuantumInt::new(int(-1), int(1));
        assert_eq!(quantum_factorial(&q, 3), Err(QcalcError::ZeroFactor(2)));
    }

    #[test]
    fn theta_examples() {
        assert_eq!(theta_poly_eval(&h1(), &int(0), 0, &int(7)).unwrap(), int(1));
        assert_eq!(theta_poly_eval(&h1(), &int(0), 2, &int(3)).unwrap(), int(6));
        assert_eq!(theta_poly_eval(&q2(), &int(1), 2, &int(3)).unwrap(), int(2));
    }

    #[test]
    fn theta_descent_examples() {
        assert_eq!(theta_descent_residual(&h1(), &int(0), 2, &int(3)).unwrap(), int(0));
        assert_eq!(theta_descent_residual(&q2(), &int(1), 2, &int(3)).unwrap(), int(0));
        assert_eq!(theta_descent_residual(&q2(), &rat(5, 3), 1, &int(3)).unwrap(), int(0));
    }

    #[test]
    fn zeta_examples() {
        let basis = ConstantBasis::unit(int(0));
        assert_eq!(zeta_poly_eval(&h1(), &basis, "1", 0, &int(9)).unwrap(), int(1));
        assert_eq!(zeta_poly_eval(&h1(), &basis, "1", 2, &int(3)).unwrap(), int(3));
        let basis = ConstantBasis::unit(int(1));
        assert_eq!(zeta_poly_eval(&q2(), &basis, "1", 1, &int(3)).unwrap(), int(2));
    }

    #[test]
    fn lambda_examples() {
        let basis = ConstantBasis::unit(int(0));
        assert_eq!(lambda_poly_eval(&h1(), &basis, "1", 0, &int(4)).unwrap(), int(1));
        assert_eq!(lambda_poly_eval(&h1(), &basis, "1", 2, &int(3)).unwrap(), int(3));
        for m in 1..6 {
            assert_eq!(lambda_poly_eval(&h1(), &basis, "1", m, &int(0)).unwrap(), int(0));
        }
    }

    #[test]
    fn lambda_differs_from_zeta_when_base_is_not_a_root() {
        // symmetric h-calculus: zeta^(2)(q) = theta(q, q+1) theta(q, q-1) / 2 = -1/2
        let frame = make_preset::<Rational>(&FrameKind::HSymmetric { h: int(1) }).unwrap();
        let family = BasisFamily::unit(&frame, int(0), 3).unwrap();
        assert_eq!(family.zeta(2, &int(0)).unwrap(), rat(-1, 2));
        assert_eq!(family.lambda(2, &int(0)).unwrap(), int(0));
        assert_eq!(family.lambda_coefficients(2).unwrap(), &[rat(1, 2), int(0), int(1)]);
    }

    #[test]
    fn degree_examples() {
        let samples = orbit_samples(&h1(), &int(0), 12).unwrap();
        let c = ScalarFn::constant(int(5));
        assert_eq!(degree_of_function(&h1(), &c, &samples, 4).unwrap(), Some(0));
        assert_eq!(degree_of_function(&h1(), &ScalarFn::power(2), &samples, 4).unwrap(), Some(2));
        let samples = orbit_samples(&q2(), &int(1), 12).unwrap();
        assert_eq!(degree_of_function(&q2(), &ScalarFn::power(3), &samples, 4).unwrap(), Some(3));
        assert_eq!(degree_of_function(&q2(), &ScalarFn::power(3), &samples, 2).unwrap(), None);
        assert_eq!(degree_of_function(&q2(), &ScalarFn::constant(int(0)), &samples, 2).unwrap(), None);
        assert!(matches!(
            degree_of_function(&q2(), &ScalarFn::power(3), &samples[..3], 2),
            Err(QcalcError::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn coefficient_extraction() {
        let basis = ConstantBasis::unit(int(0));
        assert_eq!(coeff_extract(&h1(), &basis, &ScalarFn::power(2), 2).unwrap(), vec![int(0), int(1), int(2)]);
        let basis = ConstantBasis::unit(int(1));
        assert_eq!(coeff_extract(&q2(), &basis, &ScalarFn::power(2), 2).unwrap(), vec![int(1), int(3), int(3)]);
        let unit = ScalarFn::constant(int(1));
        assert_eq!(coeff_extract(&q2(), &basis, &unit, 3).unwrap(), vec![int(1), int(0), int(0), int(0)]);
        assert_eq!(coeff_extract(&q2(), &basis, &ScalarFn::power(3), 2), Err(QcalcError::DegreeExceeded(2)));
    }

    #[test]
    fn coefficient_extraction_reconstructs_with_nonvanishing_zeta() {
        let frame = make_preset::<Rational>(&FrameKind::QSymmetric { q: int(2) }).unwrap();
        let basis = ConstantBasis::unit(int(1));
        let u = crate::Polynomial::parse("x^3 - 2x + 1/2").unwrap().to_fn::<Rational>();
        let a = coeff_extract(&frame, &basis, &u, 3).unwrap();
        let family = BasisFamily::new(&frame, &basis.entries[0], 3).unwrap();
        for p in [int(3), rat(1, 4), int(-5)] {
            let rebuilt = (0..=3).fold(int(0), |acc, m| acc + a[m].clone() * family.zeta(m, &p).unwrap());
            assert_eq!(rebuilt, u.eval(&p));
        }
    }

    #[test]
    fn multi_label_extraction_is_refused() {
        let mut basis = ConstantBasis::unit(int(0));
        basis.entries.push(BasisEntry { label: "b".into(), zeta: ScalarFn::constant(int(0)), point: int(1) });
        assert_eq!(coeff_extract(&h1(), &basis, &ScalarFn::power(1), 1), Err(QcalcError::MultiLabelUnsupported(2)));
    }

    #[test]
    fn missing_inverse_is_reported() {
        let sigma = crate::ShiftMap::new("opaque id", |x: &Rational| x.clone());
        let tau = crate::ShiftMap::affine(int(1), int(1));
        let frame = QuantumFrame::new("custom", sigma, tau, crate::TensionFn::difference(), int(1), int(1));
        let family = BasisFamily::unit(&frame, int(0), 2).unwrap();
        assert_eq!(family.theta(2, &int(3)).unwrap(), int(6));
        assert_eq!(family.zeta(1, &int(3)), Err(QcalcError::NoInverse));
        assert_eq!(family.lambda(1, &int(3)), Err(QcalcError::NoInverse));
        assert_eq!(theta_descent_residual(&frame, &int(0), 2, &int(3)).unwrap(), int(0));
    }
}
