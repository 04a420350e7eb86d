//! Orbit-lattice right inverses and initial operators, the Taylor expansion
//! of D-polynomials in the Lambda basis, and reconstruction.
//!
//! Points of the lattice generated from an anchor `a` are indexed by a level
//! `c` and a position `j`: `point(c, j) = sigma^{c-j} tau^j (a)`. The
//! derivative at `point(c, j)` reads `point(c+1, j+1)` and `point(c+1, j)`,
//! so D takes level `c+1` values to level `c` and the telescoping right
//! inverse goes back up. Nodes `x_j` are level 1, their sigma-preimages
//! `p_j` level 0.

use std::sync::Arc;

use crate::basis::{degree_of_function, orbit_samples, required_samples, vanishes_on, BasisFamily, ConstantBasis};
use crate::derivative::{qderiv_iter, ScalarFn};
use crate::error::{QcalcError, Result};
use crate::polynomial::Polynomial;
use crate::scalar::{Rational, Scalar};
use crate::tension::QuantumFrame;

/// Finite orbit lattice with nodes `x_j = mu^j(sigma(anchor))`,
/// `mu = tau ∘ sigma^{-1}`, `j = 0..=J`.
#[derive(Clone, Debug)]
pub struct OrbitGrid<K> {
    frame: QuantumFrame<K>,
    anchor: K,
    len: usize,
}

/// Values of a function at positions `0..values.len()` of one lattice level.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeFn<K> {
    pub level: i64,
    pub values: Vec<K>,
}

impl<K: Scalar> LatticeFn<K> {
    pub fn at(&self, j: usize) -> &K {
        &self.values[j]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl<K: Scalar> OrbitGrid<K> {
    /// Grid with nodes `x_0..=x_J`. Fails with `NoInverse` when sigma is
    /// neither the identity nor invertible, and `GridDegenerate` when two
    /// consecutive nodes have zero tension.
    pub fn new(frame: &QuantumFrame<K>, anchor: K, j_max: usize) -> Result<Self> {
        if !frame.sigma.is_identity() && !frame.sigma.has_inverse() {
            return Err(QcalcError::NoInverse);
        }
        let grid = OrbitGrid { frame: frame.clone(), anchor, len: j_max };
        for j in 0..j_max {
            if grid.step(1, j)?.negligible() {
                return Err(QcalcError::GridDegenerate(j));
            }
        }
        Ok(grid)
    }

    pub fn frame(&self) -> &QuantumFrame<K> {
        &self.frame
    }

    pub fn anchor(&self) -> &K {
        &self.anchor
    }

    /// `J`: the last node index.
    pub fn j_max(&self) -> usize {
        self.len
    }

    /// `sigma^{c-j} tau^j (anchor)`.
    pub fn point(&self, level: i64, j: usize) -> Result<K> {
        let x = self.frame.tau.iterate(&self.anchor, j);
        self.frame.sigma.iterate_signed(&x, level - j as i64)
    }

    pub fn node(&self, j: usize) -> Result<K> {
        self.point(1, j)
    }

    pub fn preimage(&self, j: usize) -> Result<K> {
        self.point(0, j)
    }

    /// `theta(point(c, j+1), point(c, j))`.
    fn step(&self, level: i64, j: usize) -> Result<K> {
        Ok(self.frame.theta.eval(&self.point(level, j + 1)?, &self.point(level, j)?))
    }

    pub fn sample(&self, f: &ScalarFn<K>, level: i64, len: usize) -> Result<LatticeFn<K>> {
        let values = (0..len).map(|j| self.point(level, j).map(|p| f.eval(&p))).collect::<Result<_>>()?;
        Ok(LatticeFn { level, values })
    }

    /// Lattice derivative: level `c+1` to level `c`, one value shorter.
    pub fn diff(&self, g: &LatticeFn<K>) -> Result<LatticeFn<K>> {
        let mut values = Vec::with_capacity(g.len().saturating_sub(1));
        for j in 0..g.len().saturating_sub(1) {
            let step = self.step(g.level, j)?;
            if step.negligible() {
                return Err(QcalcError::GridDegenerate(j));
            }
            values.push((g.values[j + 1].clone() - g.values[j].clone()) / step);
        }
        Ok(LatticeFn { level: g.level - 1, values })
    }

    /// Telescoping right inverse: level `c` to level `c+1`, one value
    /// longer, anchored at zero in position 0.
    pub fn integrate(&self, f: &LatticeFn<K>) -> Result<LatticeFn<K>> {
        let level = f.level + 1;
        let mut values = Vec::with_capacity(f.len() + 1);
        values.push(K::zero());
        for j in 0..f.len() {
            let next = values[j].clone() + self.step(level, j)? * f.values[j].clone();
            values.push(next);
        }
        Ok(LatticeFn { level, values })
    }

    /// `F = I - R D` on one level.
    pub fn initial(&self, g: &LatticeFn<K>) -> Result<LatticeFn<K>> {
        let rd = self.integrate(&self.diff(g)?)?;
        let values = g.values.iter().zip(&rd.values).map(|(a, b)| a.clone() - b.clone()).collect();
        Ok(LatticeFn { level: g.level, values })
    }
}

/// `R f` on the nodes `x_0..=x_J`, from `f` sampled at `p_0..p_{J-1}`.
pub fn orbit_right_inverse<K: Scalar>(grid: &OrbitGrid<K>, f: &ScalarFn<K>) -> Result<LatticeFn<K>> {
    grid.integrate(&grid.sample(f, 0, grid.len)?)
}

/// `F f = f - R D f` on the nodes `x_0..=x_J`.
pub fn orbit_initial<K: Scalar>(grid: &OrbitGrid<K>, f: &ScalarFn<K>) -> Result<LatticeFn<K>> {
    grid.initial(&grid.sample(f, 1, grid.len + 1)?)
}

/// `f(p) - sum_{k<=m} (R^k F D^k f)(p) - (R^{m+1} D^{m+1} f)(p)` at
/// `p = p_index`-th preimage, using the lattice operators.
pub fn operator_taylor_check<K: Scalar>(grid: &OrbitGrid<K>, f: &ScalarFn<K>, m: usize, p_index: usize) -> Result<K> {
    let needed = p_index + m + 2;
    let available = grid.len + 1;
    if needed > available {
        return Err(QcalcError::GridExhausted { needed, available });
    }
    let base = grid.sample(f, 0, needed)?;
    let mut derivs = vec![base.clone()];
    for k in 0..=m {
        derivs.push(grid.diff(&derivs[k])?);
    }
    let lift = |mut g: LatticeFn<K>, times: usize| -> Result<LatticeFn<K>> {
        for _ in 0..times {
            g = grid.integrate(&g)?;
        }
        Ok(g)
    };
    let mut total = lift(derivs[m + 1].clone(), m + 1)?.values[p_index].clone();
    for (k, dk) in derivs.iter().enumerate().take(m + 1) {
        total = total + lift(grid.initial(dk)?, k)?.values[p_index].clone();
    }
    Ok(base.values[p_index].clone() - total)
}

/// Coefficients of one label's component.
#[derive(Clone)]
pub struct ExpansionTerm<K> {
    pub label: String,
    pub base_point: K,
    /// `lambda_k = D^k W_s(q_s)` for `k = 0..=n`.
    pub coefficients: Vec<K>,
    family: Arc<BasisFamily<K>>,
}

impl<K: Scalar> ExpansionTerm<K> {
    /// `lambda_k / [k]!`.
    pub fn normalized(&self) -> Result<Vec<K>> {
        let q = self.family.quantum_int();
        self.coefficients.iter().enumerate().map(|(k, c)| Ok(c.clone() / q.factorial(k)?)).collect()
    }
}

impl<K: std::fmt::Debug> std::fmt::Debug for ExpansionTerm<K> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExpansionTerm")
            .field("label", &self.label)
            .field("base_point", &self.base_point)
            .field("coefficients", &self.coefficients)
            .finish()
    }
}

/// `W = sum_s sum_k lambda_{ks} Lambda_s^(k)` up to degree `n`.
#[derive(Clone, Debug)]
pub struct TaylorExpansion<K> {
    pub frame: QuantumFrame<K>,
    pub degree: usize,
    pub terms: Vec<ExpansionTerm<K>>,
}

impl<K: Scalar> TaylorExpansion<K> {
    pub fn reconstruct(&self, p: &K) -> Result<K> {
        let mut acc = K::zero();
        for term in &self.terms {
            for (k, c) in term.coefficients.iter().enumerate() {
                if !c.is_zero() {
                    acc = acc + c.clone() * term.family.lambda(k, p)?;
                }
            }
        }
        Ok(acc)
    }

    /// The single-label coefficient list.
    pub fn coefficients(&self) -> &[K] {
        &self.terms[0].coefficients
    }
}

fn expand_component<K: Scalar>(
    frame: &QuantumFrame<K>,
    entry: &crate::basis::BasisEntry<K>,
    w: &ScalarFn<K>,
    n: usize,
) -> Result<ExpansionTerm<K>> {
    let q = &entry.point;
    let samples = orbit_samples(frame, q, required_samples(n) + 2)?;
    if !vanishes_on(w, &samples) && degree_of_function(frame, w, &samples, n)?.is_none() {
        return Err(QcalcError::DegreeExceeded(n));
    }
    let coefficients = (0..=n).map(|k| qderiv_iter(frame, w, k, q)).collect::<Result<Vec<_>>>()?;
    Ok(ExpansionTerm {
        label: entry.label.clone(),
        base_point: q.clone(),
        coefficients,
        family: Arc::new(BasisFamily::new(frame, entry, n)?),
    })
}

/// Expansion of a D-polynomial `W` of degree `<= n` over a single-label
/// basis: `lambda_k = D^k W(q_s)`.
pub fn taylor_expand<K: Scalar>(
    frame: &QuantumFrame<K>,
    basis: &ConstantBasis<K>,
    w: &ScalarFn<K>,
    n: usize,
) -> Result<TaylorExpansion<K>> {
    if basis.len() != 1 {
        return Err(QcalcError::MultiLabelUnsupported(basis.len()));
    }
    let term = expand_component(frame, &basis.entries[0], w, n)?;
    Ok(TaylorExpansion { frame: frame.clone(), degree: n, terms: vec![term] })
}

/// Multi-label expansion from an explicit split `W = sum_s W_s`, each
/// component lying in the span of its own label's basis.
pub fn taylor_expand_components<K: Scalar>(
    frame: &QuantumFrame<K>,
    basis: &ConstantBasis<K>,
    components: &[(String, ScalarFn<K>)],
    n: usize,
) -> Result<TaylorExpansion<K>> {
    let terms = components
        .iter()
        .map(|(label, w)| expand_component(frame, basis.entry(label)?, w, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(TaylorExpansion { frame: frame.clone(), degree: n, terms })
}

pub fn taylor_reconstruct<K: Scalar>(exp: &TaylorExpansion<K>, p: &K) -> Result<K> {
    exp.reconstruct(p)
}

/// Classical Taylor coefficients `W^(k)(a) / k!`, `k = 0..=m`, by repeated
/// synthetic division. If `deg W > m` the higher coefficients are kept.
pub fn classical_taylor_crosscheck(w: &Polynomial, a: &Rational, m: usize) -> Vec<Rational> {
    let mut out = w.taylor_shift(a);
    if out.len() < m + 1 {
        out.resize(m + 1, num_traits::Zero::zero());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivative::{make_preset, qderiv};
    use crate::scalar::{int, rat};
    use crate::FrameKind;

    fn frame(kind: FrameKind) -> QuantumFrame<Rational> {
        make_preset(&kind).unwrap()
    }

    #[test]
    fn right_inverse_on_integer_lattice() {
        let h1 = frame(FrameKind::H { h: int(1) });
        let grid = OrbitGrid::new(&h1, int(0), 6).unwrap();
        let rf = orbit_right_inverse(&grid, &ScalarFn::constant(int(1))).unwrap();
        assert_eq!(rf.values, (0..=6).map(int).collect::<Vec<_>>());
    }

    #[test]
    fn right_inverse_on_geometric_lattice() {
        let q2 = frame(FrameKind::Q { q: int(2) });
        let grid = OrbitGrid::new(&q2, int(1), 3).unwrap();
        let rf = orbit_right_inverse(&grid, &ScalarFn::identity()).unwrap();
        assert_eq!(grid.node(2).unwrap(), int(4));
        assert_eq!(&rf.values[..3], &[int(0), int(1), int(5)]);
    }

    #[test]
    fn right_inverse_law_against_the_frame_derivative() {
        for kind in [FrameKind::HSymmetric { h: int(1) }, FrameKind::QSymmetric { q: int(2) }] {
            let fr = frame(kind);
            let grid = OrbitGrid::new(&fr, int(1), 8).unwrap();
            let f = Polynomial::parse("x^2 - 3x + 1/2").unwrap().to_fn::<Rational>();
            let rf = orbit_right_inverse(&grid, &f).unwrap();
            let table: Vec<(Rational, Rational)> =
                (0..=8).map(|j| (grid.node(j).unwrap(), rf.values[j].clone())).collect();
            let lookup = ScalarFn::new("Rf", move |x: &Rational| {
                table.iter().find(|(p, _)| p == x).map(|(_, v)| v.clone()).expect("off-lattice evaluation")
            });
            for j in 0..8 {
                let p = grid.preimage(j).unwrap();
                assert_eq!(qderiv(&fr, &lookup, &p).unwrap(), f.eval(&p));
            }
        }
    }

    #[test]
    fn initial_operator_on_lattice() {
        let h1 = frame(FrameKind::H { h: int(1) });
        let grid = OrbitGrid::new(&h1, int(0), 6).unwrap();
        let ff = orbit_initial(&grid, &ScalarFn::power(2)).unwrap();
        assert!(ff.values.iter().all(|v| *v == int(0)));
        let c = orbit_initial(&grid, &ScalarFn::constant(rat(7, 3))).unwrap();
        assert!(c.values.iter().all(|v| *v == rat(7, 3)));
    }

    #[test]
    fn operator_taylor_examples() {
        let h1 = frame(FrameKind::H { h: int(1) });
        let grid = OrbitGrid::new(&h1, int(0), 10).unwrap();
        assert_eq!(operator_taylor_check(&grid, &ScalarFn::power(3), 0, 4).unwrap(), int(0));
        assert_eq!(operator_taylor_check(&grid, &ScalarFn::power(3), 1, 4).unwrap(), int(0));
        let q2 = frame(FrameKind::Q { q: int(2) });
        let grid = OrbitGrid::new(&q2, int(1), 8).unwrap();
        assert_eq!(grid.preimage(3).unwrap(), int(8));
        assert_eq!(operator_taylor_check(&grid, &ScalarFn::power(3), 2, 3).unwrap(), int(0));
        assert!(matches!(
            operator_taylor_check(&grid, &ScalarFn::power(3), 5, 6),
            Err(QcalcError::GridExhausted { .. })
        ));
    }

    #[test]
    fn expansion_examples() {
        let h1 = frame(FrameKind::H { h: int(1) });
        let exp = taylor_expand(&h1, &ConstantBasis::unit(int(0)), &ScalarFn::power(2), 2).unwrap();
        assert_eq!(exp.coefficients(), &[int(0), int(1), int(2)]);
        assert_eq!(exp.reconstruct(&int(5)).unwrap(), int(25));
        let q2 = frame(FrameKind::Q { q: int(2) });
        let exp = taylor_expand(&q2, &ConstantBasis::unit(int(1)), &ScalarFn::power(2), 2).unwrap();
        assert_eq!(exp.coefficients(), &[int(1), int(3), int(3)]);
        assert_eq!(exp.reconstruct(&int(3)).unwrap(), int(9));
        assert_eq!(exp.terms[0].normalized().unwrap(), vec![int(1), int(3), int(1)]);
        let c = taylor_expand(&q2, &ConstantBasis::unit(int(1)), &ScalarFn::constant(int(5)), 3).unwrap();
        assert_eq!(c.coefficients(), &[int(5), int(0), int(0), int(0)]);
        assert_eq!(c.reconstruct(&rat(-2, 7)).unwrap(), int(5));
        assert_eq!(
            taylor_expand(&q2, &ConstantBasis::unit(int(1)), &ScalarFn::power(3), 2).unwrap_err(),
            QcalcError::DegreeExceeded(2)
        );
    }

    /// `sum |c_i| r^i`, an upper bound for `|P|` on `[-r, r]`.
    fn abs_bound(p: &Polynomial, r: &Rational) -> Rational {
        use num_traits::Signed;
        p.coeffs().iter().rev().fold(int(0), |acc, c| acc * r + c.abs())
    }

    #[test]
    fn small_step_expansion_approaches_classical_taylor() {
        let w = Polynomial::parse("2x^4 - x^3 + 3/2 x - 5").unwrap();
        let a = rat(1, 3);
        let classical = classical_taylor_crosscheck(&w, &a, 4);
        for h in [rat(1, 10), rat(1, 100), rat(1, 1000)] {
            let frame = frame(FrameKind::H { h: h.clone() });
            let exp = taylor_expand(&frame, &ConstantBasis::unit(a.clone()), &w.to_fn(), 4).unwrap();
            let normalized = exp.terms[0].normalized().unwrap();
            // Delta_h^k W(a) / h^k = W^(k)(xi) for some xi in [a, a + k h], so the gap is
            // at most k h max|W^(k+1)| / k! there.
            let mut dk = w.clone();
            let mut k_fact = int(1);
            for k in 0..=4usize {
                let next = dk.derivative();
                let radius = num_traits::Signed::abs(&a) + int(k as i64) * h.clone();
                let bound = int(k as i64) * h.clone() * abs_bound(&next, &radius) / k_fact.clone();
                let gap = num_traits::Signed::abs(&(normalized[k].clone() - classical[k].clone()));
                assert!(gap <= bound, "k={k}, h={h}: gap {gap} exceeds {bound}");
                dk = next;
                k_fact *= int(k as i64 + 1);
            }
        }
    }

    #[test]
    fn classical_coefficients() {
        let w = Polynomial::parse("x^3 - x").unwrap();
        assert_eq!(classical_taylor_crosscheck(&w, &int(2), 3), vec![int(6), int(11), int(6), int(1)]);
        let sq = Polynomial::parse("x^2").unwrap();
        assert_eq!(classical_taylor_crosscheck(&sq, &int(1), 4), vec![int(1), int(2), int(1), int(0), int(0)]);
    }
}
