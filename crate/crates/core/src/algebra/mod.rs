//! Finite-dimensional exact model of right invertible operators: right
//! inverses, initial operators, their families, kernel gradations and the
//! operator Taylor identity.
//!
//! A difference operator on sequences maps length `N` to length `N - k`, so
//! its powers do not compose on a single space. A [`Tower`] holds one
//! operator triple per level `V_0 -> V_1 -> V_2 -> ...`, each level being a
//! coordinate prefix of the previous one. Once a level is no longer than
//! the stride, its operator is the zero map onto the zero space, so powers
//! of any order are defined.

mod matrix;

pub use matrix::{in_span, is_zero_vector, rank_of, LinOp, Vector};

use num_traits::{One, Zero};

use crate::error::{QcalcError, Result};
use crate::scalar::Rational;

/// `(D x)_n = x_{n+k} - x_n` with `k = 1` (forward) or a general stride.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DifferenceKind {
    Forward,
    Stride(usize),
}

impl DifferenceKind {
    pub fn stride(self) -> usize {
        match self {
            DifferenceKind::Forward => 1,
            DifferenceKind::Stride(k) => k,
        }
    }
}

fn difference_matrix(n: usize, k: usize) -> LinOp {
    let rows = n.saturating_sub(k);
    let mut d = LinOp::zeros(rows, n);
    for i in 0..rows {
        d[(i, i)] = -Rational::one();
        d[(i, i + k)] = Rational::one();
    }
    d
}

/// The `(N-k) x N` difference matrix.
pub fn build_difference_instance(kind: DifferenceKind, n: usize) -> Result<LinOp> {
    let k = kind.stride();
    if k == 0 || n <= k {
        return Err(QcalcError::BadShape(format!("need N > k >= 1, got N = {n}, k = {k}")));
    }
    Ok(difference_matrix(n, k))
}

/// Canonical right inverse of a full-row-rank `D`.
///
/// Pivot columns are chosen greedily from the right, so the free variables
/// (set to zero in every particular solution) are the leading columns.
pub fn right_inverse(d: &LinOp) -> Result<LinOp> {
    let (rows, cols) = (d.rows(), d.cols());
    let mut aug = LinOp::zeros(rows, cols + rows);
    for i in 0..rows {
        for j in 0..cols {
            aug[(i, j)] = d[(i, j)].clone();
        }
        aug[(i, cols + i)] = Rational::one();
    }
    let order: Vec<usize> = (0..cols).rev().collect();
    let (reduced, pivots) = aug.rref_with_order(&order);
    if pivots.len() < rows {
        return Err(QcalcError::NotRightInvertible { rank: pivots.len(), rows });
    }
    let mut r = LinOp::zeros(cols, rows);
    for (row, &pc) in pivots.iter().enumerate() {
        for i in 0..rows {
            r[(pc, i)] = reduced[(row, cols + i)].clone();
        }
    }
    Ok(r)
}

fn check_right_inverse(d: &LinOp, r: &LinOp) -> Result<()> {
    match d.mul(r) {
        Ok(dr) if dr.is_identity() => Ok(()),
        Ok(_) => Err(QcalcError::NotARightInverse),
        Err(e) => Err(e),
    }
}

/// `F = I - R D`.
pub fn initial_from_right(d: &LinOp, r: &LinOp) -> Result<LinOp> {
    check_right_inverse(d, r)?;
    LinOp::identity(d.cols()).sub(&r.mul(d)?)
}

/// Checks `F^2 = F`, `D F = 0` and `rank F = dim ker D`.
pub fn check_initial_operator(d: &LinOp, f: &LinOp) -> Result<()> {
    if f.rows() != d.cols() || f.cols() != d.cols() {
        return Err(QcalcError::BadShape(format!("initial operator must be {0}x{0}", d.cols())));
    }
    if f.mul(f)? != *f {
        return Err(QcalcError::NotAnInitialOperator("F^2 != F".into()));
    }
    if !d.mul(f)?.is_zero() {
        return Err(QcalcError::NotAnInitialOperator("image of F leaves ker D".into()));
    }
    if f.rank() != d.cols() - d.rank() {
        return Err(QcalcError::NotAnInitialOperator("image of F is smaller than ker D".into()));
    }
    Ok(())
}

/// `R = R' - F R'`; the result does not depend on the choice of `R'`.
pub fn right_from_initial(d: &LinOp, r_prime: &LinOp, f: &LinOp) -> Result<LinOp> {
    check_right_inverse(d, r_prime)?;
    check_initial_operator(d, f)?;
    r_prime.sub(&f.mul(r_prime)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    Right,
    Initial,
}

/// `R + F A` (right) or `F (I - A D)` (initial) for `A : im D -> dom D`.
pub fn family_member(d: &LinOp, r: &LinOp, f: &LinOp, a: &LinOp, which: FamilyKind) -> Result<LinOp> {
    if a.cols() != d.rows() || a.rows() != d.cols() {
        return Err(QcalcError::BadShape(format!(
            "A must be {}x{} (im D -> dom D), got {}x{}",
            d.cols(),
            d.rows(),
            a.rows(),
            a.cols()
        )));
    }
    match which {
        FamilyKind::Right => r.add(&f.mul(a)?),
        FamilyKind::Initial => f.mul(&LinOp::identity(d.cols()).sub(&a.mul(d)?)?),
    }
}

/// `D`, a right inverse `R` and its initial operator `F = I - R D`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorTriple {
    pub d: LinOp,
    pub r: LinOp,
    pub f: LinOp,
}

impl OperatorTriple {
    pub fn new(d: LinOp, r: LinOp) -> Result<Self> {
        let f = initial_from_right(&d, &r)?;
        Ok(OperatorTriple { d, r, f })
    }

    /// Triple with the canonical right inverse.
    pub fn canonical(d: LinOp) -> Result<Self> {
        let r = right_inverse(&d)?;
        Self::new(d, r)
    }

    /// Verifies `D R = I`, `F^2 = F`, `F R = 0` and `im F = ker D`.
    pub fn check(&self) -> Result<()> {
        check_right_inverse(&self.d, &self.r)?;
        check_initial_operator(&self.d, &self.f)?;
        if !self.f.mul(&self.r)?.is_zero() {
            return Err(QcalcError::NotAnInitialOperator("F R != 0".into()));
        }
        Ok(())
    }
}

/// A chain of operator triples `D_j : V_j -> V_{j+1}`.
#[derive(Debug, Clone)]
pub struct Tower {
    levels: Vec<OperatorTriple>,
    prefix: bool,
}

impl Tower {
    /// Difference tower on `Q^n`: every level is a coordinate prefix, ending
    /// at the zero space.
    pub fn difference(kind: DifferenceKind, n: usize) -> Result<Self> {
        build_difference_instance(kind, n)?;
        let k = kind.stride();
        let mut levels = Vec::new();
        let mut dim = n;
        loop {
            levels.push(OperatorTriple::canonical(difference_matrix(dim, k))?);
            if dim == 0 {
                break;
            }
            dim = dim.saturating_sub(k);
        }
        Ok(Tower { levels, prefix: true })
    }

    /// The same square triple at every level.
    pub fn uniform(triple: OperatorTriple) -> Result<Self> {
        if !triple.d.is_square() {
            return Err(QcalcError::BadShape("a uniform tower needs a square D".into()));
        }
        Ok(Tower { levels: vec![triple], prefix: false })
    }

    /// Replaces the right inverse at level 0, keeping the others.
    pub fn with_base_right_inverse(&self, r: LinOp) -> Result<Self> {
        let mut out = self.clone();
        let triple = OperatorTriple::new(self.levels[0].d.clone(), r)?;
        if self.prefix {
            out.levels[0] = triple;
        } else {
            out.levels = vec![triple];
        }
        Ok(out)
    }

    pub fn level(&self, j: usize) -> &OperatorTriple {
        &self.levels[j.min(self.levels.len() - 1)]
    }

    pub fn base(&self) -> &OperatorTriple {
        &self.levels[0]
    }

    pub fn dim(&self, j: usize) -> usize {
        self.level(j).d.cols()
    }

    /// Moves a level-0 vector to level `j`.
    pub fn truncate(&self, v: &[Rational], j: usize) -> Vector {
        if self.prefix {
            v[..self.dim(j)].to_vec()
        } else {
            v.to_vec()
        }
    }

    /// `D^m : V_0 -> V_m`.
    pub fn d_power(&self, m: usize) -> Result<LinOp> {
        let mut acc = LinOp::identity(self.dim(0));
        for j in 0..m {
            acc = self.level(j).d.mul(&acc)?;
        }
        Ok(acc)
    }

    /// `R^m : V_m -> V_0`.
    pub fn r_power(&self, m: usize) -> Result<LinOp> {
        let mut acc = LinOp::identity(self.dim(m));
        for j in (0..m).rev() {
            acc = self.level(j).r.mul(&acc)?;
        }
        Ok(acc)
    }

    /// Same operator at levels `j` and `j+1` up to truncation: checks
    /// `trunc_{j+1}(D_j v)` against `D_{j+1}(trunc_{j+1} v)` on unit vectors.
    fn truncation_consistent(&self) -> bool {
        !self.prefix || self.levels.len() < 2 || {
            let (d0, d1) = (&self.levels[0].d, &self.levels[1].d);
            (0..d0.cols()).all(|c| {
                let mut e = vec![Rational::zero(); d0.cols()];
                e[c] = Rational::one();
                let lhs = d1.apply(&self.truncate(&e, 1)).unwrap();
                let rhs = d0.apply(&e).unwrap();
                lhs[..] == rhs[..lhs.len()]
            })
        }
    }
}

/// Nested bases of `ker D^m` for `m = 0..=m_max`, on level 0.
#[derive(Debug, Clone)]
pub struct GradedKernel {
    bases: Vec<Vec<Vector>>,
    powers: Vec<LinOp>,
}

impl GradedKernel {
    /// `dim ker D^m` for `m = 1..=m_max`.
    pub fn dims(&self) -> Vec<usize> {
        self.bases.iter().skip(1).map(Vec::len).collect()
    }

    /// Basis of `ker D^m`; the basis of `ker D^{m-1}` is a prefix of it.
    pub fn basis(&self, m: usize) -> &[Vector] {
        &self.bases[m]
    }

    pub fn m_max(&self) -> usize {
        self.bases.len() - 1
    }

    /// The `m` with `u` in `Z_m = ker D^m \ ker D^{m-1}`; `Some(0)` for zero,
    /// `None` if `u` is not annihilated by `D^{m_max}`.
    pub fn gradation_index(&self, u: &[Rational]) -> Option<usize> {
        self.powers.iter().position(|p| is_zero_vector(&p.apply(u).expect("vector length matches level 0")))
    }

    /// `deg u = min{m : D^m u = 0} - 1`; the zero vector has no degree.
    pub fn degree_of(&self, u: &[Rational]) -> Option<usize> {
        match self.gradation_index(u) {
            Some(0) | None => None,
            Some(m) => Some(m - 1),
        }
    }
}

pub fn kernel_gradation(tower: &Tower, m_max: usize) -> Result<GradedKernel> {
    let mut powers = Vec::with_capacity(m_max + 1);
    let mut bases: Vec<Vec<Vector>> = vec![Vec::new()];
    powers.push(tower.d_power(0)?);
    for m in 1..=m_max {
        let power = tower.d_power(m)?;
        let mut basis = bases[m - 1].clone();
        for v in power.kernel_basis() {
            if !in_span(&basis, &v) {
                basis.push(v);
            }
        }
        bases.push(basis);
        powers.push(power);
    }
    Ok(GradedKernel { bases, powers })
}

/// `I - sum_{k=0}^{m} R^k F D^k - R^{m+1} D^{m+1}` on level 0.
pub fn taylor_identity_residual(tower: &Tower, m: usize) -> Result<LinOp> {
    let n = tower.dim(0);
    let mut acc = LinOp::identity(n);
    for k in 0..=m {
        let term = tower.r_power(k)?.mul(&tower.level(k).f)?.mul(&tower.d_power(k)?)?;
        acc = acc.sub(&term)?;
    }
    let remainder = tower.r_power(m + 1)?.mul(&tower.d_power(m + 1)?)?;
    acc.sub(&remainder)
}

fn check_kernel_basis(tower: &Tower, kernel_basis: &[Vector]) -> Result<()> {
    let d = &tower.base().d;
    let dim_ker = d.cols() - d.rank();
    for v in kernel_basis {
        if v.len() != d.cols() || !is_zero_vector(&d.apply(v)?) {
            return Err(QcalcError::InvalidParams("kernel basis vector is not in ker D".into()));
        }
    }
    if rank_of(kernel_basis) != kernel_basis.len() || kernel_basis.len() != dim_ker {
        return Err(QcalcError::InvalidParams(format!(
            "kernel basis must have {dim_ker} independent vectors, got {}",
            kernel_basis.len()
        )));
    }
    Ok(())
}

/// `{R^m zeta_s : s, m <= n}` on level 0, ordered by `m` then `s`.
pub fn monomial_basis(tower: &Tower, kernel_basis: &[Vector], n: usize) -> Result<Vec<Vector>> {
    check_kernel_basis(tower, kernel_basis)?;
    let needed = (n + 1) * kernel_basis.len();
    if needed > tower.dim(0) {
        return Err(QcalcError::DimensionOverflow { needed, available: tower.dim(0) });
    }
    let mut out = Vec::with_capacity(needed);
    for m in 0..=n {
        let rm = tower.r_power(m)?;
        for z in kernel_basis {
            out.push(rm.apply(&tower.truncate(z, m))?);
        }
    }
    Ok(out)
}

/// `z_k = F D^k u` (on level `k`), with `u = sum R^k z_k`.
pub fn poly_expand_matrix(tower: &Tower, u: &[Rational], n: usize) -> Result<Vec<Vector>> {
    if !is_zero_vector(&tower.d_power(n + 1)?.apply(u)?) {
        return Err(QcalcError::NotAPolynomial(n));
    }
    (0..=n).map(|k| tower.level(k).f.apply(&tower.d_power(k)?.apply(u)?)).collect()
}

/// Sum of `R^k z_k` on level 0.
pub fn poly_reconstruct(tower: &Tower, parts: &[Vector]) -> Result<Vector> {
    let mut acc = vec![Rational::zero(); tower.dim(0)];
    for (k, z) in parts.iter().enumerate() {
        for (a, b) in acc.iter_mut().zip(tower.r_power(k)?.apply(z)?) {
            *a += b;
        }
    }
    Ok(acc)
}

/// Direct sum of two right inverses: `R` acts as `r1` on `span(p_basis)`
/// and as `r2` on `span(q_basis)`. Both bases live in `V_1 = im D`.
///
/// `span(p_basis)` must be invariant: `R1` maps it back into itself and
/// `D_1` maps it into its truncation (both read through the tower).
pub fn combine_inverses(
    tower: &Tower,
    r1: &LinOp,
    r2: &LinOp,
    p_basis: &[Vector],
    q_basis: &[Vector],
) -> Result<OperatorTriple> {
    let d = &tower.base().d;
    let dim = d.rows();
    check_right_inverse(d, r1)?;
    check_right_inverse(d, r2)?;
    let mut all: Vec<Vector> = p_basis.to_vec();
    all.extend(q_basis.iter().cloned());
    if all.iter().any(|v| v.len() != dim) {
        return Err(QcalcError::NotADirectSum(format!("basis vectors must have length {dim}")));
    }
    if all.len() != dim || rank_of(&all) != dim {
        return Err(QcalcError::NotADirectSum(format!(
            "{} + {} vectors of rank {} do not span a space of dimension {dim}",
            p_basis.len(),
            q_basis.len(),
            rank_of(&all)
        )));
    }
    if !tower.truncation_consistent() {
        return Err(QcalcError::InvarianceFailure("tower levels are not truncations of one operator".into()));
    }
    let p_on_2: Vec<Vector> = p_basis.iter().map(|p| tower.truncate_between(p, 1, 2)).collect();
    for p in p_basis {
        let image = tower.truncate_between(&r1.apply(p)?, 0, 1);
        if !in_span(p_basis, &image) {
            return Err(QcalcError::InvarianceFailure("R1 maps P outside P".into()));
        }
        let down = tower.level(1).d.apply(p)?;
        if !in_span(&p_on_2, &down) {
            return Err(QcalcError::InvarianceFailure("D maps P outside P".into()));
        }
    }
    let images: Vec<Vector> =
        p_basis.iter().map(|p| r1.apply(p)).chain(q_basis.iter().map(|q| r2.apply(q))).collect::<Result<_>>()?;
    let b = LinOp::from_columns(dim, &all)?;
    let b_inv = b.inverse().expect("basis verified to have full rank");
    let r = LinOp::from_columns(d.cols(), &images)?.mul(&b_inv)?;
    OperatorTriple::new(d.clone(), r)
}

impl Tower {
    /// Moves a level-`from` vector to level `to >= from`.
    pub fn truncate_between(&self, v: &[Rational], from: usize, to: usize) -> Vector {
        debug_assert!(v.len() == self.dim(from));
        if self.prefix {
            v[..self.dim(to)].to_vec()
        } else {
            v.to_vec()
        }
    }
}
