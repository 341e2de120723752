//! Dense complex operators on tensor-product spaces.
//!
//! Basis convention: the first tensor factor is the slow (most significant) index.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

pub type C64 = Complex64;
pub type Mat = DMatrix<C64>;

/// Floor used in relative residuals to avoid division by zero.
pub const NORM_FLOOR: f64 = 1e-300;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Shorthand for a complex number.
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Square complex matrix together with the local dimensions of its tensor factors.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    mat: Mat,
    dims: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProportionalityResult {
    pub scalar: C64,
    pub residual: f64,
    pub pass: bool,
}

impl Operator {
    pub fn new(mat: Mat, dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::DimensionMismatch(format!("bad dims {dims:?}")));
        }
        let side: usize = dims.iter().product();
        if mat.nrows() != side || mat.ncols() != side {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix with dims {dims:?}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(Operator { mat, dims })
    }

    /// Single-factor operator from a square matrix.
    pub fn from_matrix(mat: Mat) -> Self {
        assert_eq!(mat.nrows(), mat.ncols(), "operator must be square");
        let d = mat.nrows();
        Operator { mat, dims: vec![d] }
    }

    pub fn identity(dims: &[usize]) -> Self {
        let d = dims.iter().product();
        Operator { mat: Mat::identity(d, d), dims: dims.to_vec() }
    }

    pub fn zeros(dims: &[usize]) -> Self {
        let d = dims.iter().product();
        Operator { mat: Mat::zeros(d, d), dims: dims.to_vec() }
    }

    pub fn from_diag(entries: &[C64]) -> Self {
        let v = nalgebra::DVector::from_column_slice(entries);
        Operator::from_matrix(Mat::from_diagonal(&v))
    }

    /// Matrix unit ê_ij on C^n, indices starting at 1.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        assert!(i >= 1 && i <= n && j >= 1 && j <= n, "unit index out of range");
        let mut m = Mat::zeros(n, n);
        m[(i - 1, j - 1)] = ONE;
        Operator::from_matrix(m)
    }

    pub fn matrix(&self) -> &Mat {
        &self.mat
    }

    pub fn into_matrix(self) -> Mat {
        self.mat
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn side(&self) -> usize {
        self.mat.nrows()
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.mat[(r, c)]
    }

    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.mat[(r, c)] = v;
    }

    /// Same matrix, new factor layout.
    pub fn with_dims(self, dims: Vec<usize>) -> Result<Self> {
        Operator::new(self.mat, dims)
    }

    pub fn norm(&self) -> f64 {
        self.mat.norm()
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn scale(&self, s: C64) -> Self {
        Operator { mat: &self.mat * s, dims: self.dims.clone() }
    }

    pub fn transpose(&self) -> Self {
        Operator { mat: self.mat.transpose(), dims: self.dims.clone() }
    }

    pub fn adjoint(&self) -> Self {
        Operator { mat: self.mat.adjoint(), dims: self.dims.clone() }
    }

    pub fn inverse(&self) -> Result<Self> {
        let lu = self.mat.clone().lu();
        let inv = lu
            .try_inverse()
            .ok_or_else(|| Error::Singular(format!("{}x{} operator", self.side(), self.side())))?;
        if !inv.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Singular("non-finite inverse".into()));
        }
        Ok(Operator { mat: inv, dims: self.dims.clone() })
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut acc = Operator::identity(&self.dims);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Block ⟨i|A|j⟩ on the first factor, indices starting at 1.
    pub fn block(&self, i: usize, j: usize) -> Operator {
        let d0 = self.dims[0];
        assert!(self.dims.len() >= 2, "block extraction needs two factors");
        let b = self.side() / d0;
        let m = self.mat.view(((i - 1) * b, (j - 1) * b), (b, b)).into_owned();
        Operator { mat: m, dims: self.dims[1..].to_vec() }
    }

    /// Assemble Σ ê_ij ⊗ B_ij from a d0×d0 grid of blocks; missing blocks are zero.
    pub fn from_blocks(d0: usize, inner: &[usize], blocks: &[((usize, usize), Operator)]) -> Self {
        let b: usize = inner.iter().product();
        let mut m = Mat::zeros(d0 * b, d0 * b);
        for ((i, j), op) in blocks {
            assert_eq!(op.side(), b, "block size mismatch");
            m.view_mut(((i - 1) * b, (j - 1) * b), (b, b)).copy_from(&op.mat);
        }
        let mut dims = vec![d0];
        dims.extend_from_slice(inner);
        Operator { mat: m, dims }
    }

    fn check_side(&self, other: &Operator, what: &str) -> Result<()> {
        if self.side() != other.side() {
            return Err(Error::DimensionMismatch(format!(
                "{what}: sides {} and {}",
                self.side(),
                other.side()
            )));
        }
        Ok(())
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.side(), rhs.side(), "product of mismatched operators");
        Operator { mat: &self.mat * &rhs.mat, dims: self.dims.clone() }
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.side(), rhs.side(), "sum of mismatched operators");
        Operator { mat: &self.mat + &rhs.mat, dims: self.dims.clone() }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.side(), rhs.side(), "difference of mismatched operators");
        Operator { mat: &self.mat - &rhs.mat, dims: self.dims.clone() }
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator { mat: -&self.mat, dims: self.dims.clone() }
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;
    fn mul(self, s: C64) -> Operator {
        self.scale(s)
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, s: f64) -> Operator {
        self.scale(C64::new(s, 0.0))
    }
}

pub fn kron(a: &Operator, b: &Operator) -> Operator {
    let mut dims = a.dims.clone();
    dims.extend_from_slice(&b.dims);
    Operator { mat: a.mat.kronecker(&b.mat), dims }
}

/// Kronecker product of a non-empty list, left to right.
pub fn kron_all(ops: &[Operator]) -> Operator {
    let mut it = ops.iter();
    let first = it.next().expect("kron_all of empty list").clone();
    it.fold(first, |acc, op| kron(&acc, op))
}

fn strides(space: &[usize]) -> Vec<usize> {
    let mut s = vec![1; space.len()];
    for k in (0..space.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * space[k + 1];
    }
    s
}

/// Act with `op` on the named slots (in the given order) and identity elsewhere.
pub fn embed_at(op: &Operator, slots: &[usize], space: &[usize]) -> Result<Operator> {
    let k = space.len();
    for (a, &s) in slots.iter().enumerate() {
        if s >= k {
            return Err(Error::SlotOutOfRange { slot: s, factors: k });
        }
        if slots[..a].contains(&s) {
            return Err(Error::DimensionMismatch(format!("repeated slot {s}")));
        }
    }
    let slot_dims: Vec<usize> = slots.iter().map(|&s| space[s]).collect();
    let sd: usize = slot_dims.iter().product();
    if sd != op.side() {
        return Err(Error::DimensionMismatch(format!(
            "operator side {} vs slot dims {slot_dims:?}",
            op.side()
        )));
    }
    if op.dims.len() == slots.len() && op.dims != slot_dims {
        return Err(Error::DimensionMismatch(format!(
            "operator dims {:?} vs slot dims {slot_dims:?}",
            op.dims
        )));
    }
    let st = strides(space);
    let ost = strides(&slot_dims);
    let total: usize = space.iter().product();
    // column offset contributed by each local multi-index of the operator
    let offs: Vec<usize> = (0..sd)
        .map(|b| slots.iter().enumerate().map(|(t, &s)| (b / ost[t]) % slot_dims[t] * st[s]).sum())
        .collect();
    let mut m = Mat::zeros(total, total);
    for r in 0..total {
        let mut a = 0;
        let mut base = r;
        for (t, &s) in slots.iter().enumerate() {
            let digit = (r / st[s]) % space[s];
            a += digit * ost[t];
            base -= digit * st[s];
        }
        for (b, off) in offs.iter().enumerate() {
            let v = op.mat[(a, b)];
            if v != ZERO {
                m[(r, base + off)] = v;
            }
        }
    }
    Ok(Operator { mat: m, dims: space.to_vec() })
}

/// Swap operator on C^d ⊗ C^d.
pub fn permutation_swap(d: usize) -> Operator {
    let mut m = Mat::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            m[(i * d + j, j * d + i)] = ONE;
        }
    }
    Operator { mat: m, dims: vec![d, d] }
}

/// Trace over the first tensor factor.
pub fn partial_trace_first(a: &Operator) -> Result<Operator> {
    if a.dims.len() < 2 {
        return Err(Error::TooFewFactors);
    }
    let d0 = a.dims[0];
    let b = a.side() / d0;
    let mut m = Mat::zeros(b, b);
    for k in 0..d0 {
        m += a.mat.view((k * b, k * b), (b, b));
    }
    Ok(Operator { mat: m, dims: a.dims[1..].to_vec() })
}

/// Transpose the indices of one tensor factor.
pub fn partial_transpose(a: &Operator, slot: usize) -> Result<Operator> {
    let k = a.dims.len();
    if slot >= k {
        return Err(Error::SlotOutOfRange { slot, factors: k });
    }
    let st = strides(&a.dims)[slot];
    let d = a.dims[slot];
    let n = a.side();
    let mut m = Mat::zeros(n, n);
    for r in 0..n {
        let dr = (r / st) % d;
        for col in 0..n {
            let dc = (col / st) % d;
            let r2 = r + dc * st - dr * st;
            let c2 = col + dr * st - dc * st;
            m[(r, col)] = a.mat[(r2, c2)];
        }
    }
    Ok(Operator { mat: m, dims: a.dims.clone() })
}

pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    a.check_side(b, "commutator")?;
    Ok(&(a * b) - &(b * a))
}

/// Best-fit scalar c with A ≈ cB and the relative defect ‖A − cB‖/‖A‖.
pub fn prop_check(a: &Operator, b: &Operator, tol: f64) -> Result<ProportionalityResult> {
    a.check_side(b, "prop_check")?;
    let bb = b.mat.norm_squared();
    if bb.sqrt() < NORM_FLOOR {
        return Err(Error::ZeroReference);
    }
    let ba: C64 = b.mat.iter().zip(a.mat.iter()).map(|(x, y)| x.conj() * y).sum();
    let scalar = ba / bb;
    let residual = (&a.mat - &b.mat * scalar).norm() / a.norm().max(NORM_FLOOR);
    Ok(ProportionalityResult { scalar, residual, pass: residual <= tol })
}

/// ‖A − B‖ / max(‖A‖, ‖B‖).
pub fn rel_diff(a: &Operator, b: &Operator) -> f64 {
    assert_eq!(a.side(), b.side(), "rel_diff of mismatched operators");
    (&a.mat - &b.mat).norm() / a.norm().max(b.norm()).max(NORM_FLOOR)
}

/// ‖[A, B]‖ / (‖A‖ ‖B‖).
pub fn comm_residual(a: &Operator, b: &Operator) -> f64 {
    assert_eq!(a.side(), b.side(), "commutator of mismatched operators");
    let c = &a.mat * &b.mat - &b.mat * &a.mat;
    c.norm() / (a.norm() * b.norm()).max(NORM_FLOOR)
}

/// ‖A − (tr A / d) I‖ / ‖A‖: distance from the identity line.
pub fn identity_defect(a: &Operator) -> f64 {
    let d = a.side() as f64;
    let t = a.trace() / d;
    let mut m = a.mat.clone();
    for k in 0..a.side() {
        m[(k, k)] -= t;
    }
    m.norm() / a.norm().max(NORM_FLOOR)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(d: usize, seed: u64) -> Operator {
        // small deterministic pseudo-random fill
        let mut x = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((x >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let m = Mat::from_fn(d, d, |_, _| C64::new(next(), next()));
        Operator::from_matrix(m)
    }

    #[test]
    fn kron_identity() {
        let k = kron(&Operator::identity(&[2]), &Operator::identity(&[2]));
        assert_eq!(k.matrix(), &Mat::identity(4, 4));
        assert_eq!(k.dims(), &[2, 2]);
    }

    #[test]
    fn kron_units_single_entry() {
        let k = kron(&Operator::unit(2, 1, 2), &Operator::unit(2, 2, 1));
        // row |12> = index 1, column |21> = index 2
        for r in 0..4 {
            for col in 0..4 {
                let want = if (r, col) == (1, 2) { ONE } else { ZERO };
                assert_eq!(k.get(r, col), want);
            }
        }
    }

    #[test]
    fn kron_diag_slow_index() {
        let d = Operator::from_diag(&[c(1.0, 0.0), c(2.0, 0.0)]);
        let k = kron(&d, &Operator::identity(&[2]));
        let want = Operator::from_diag(&[c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0)]);
        assert_eq!(k.matrix(), want.matrix());
    }

    #[test]
    fn embed_single_site() {
        let x = sample(3, 1);
        let e = embed_at(&x, &[0], &[3]).unwrap();
        assert_eq!(e.matrix(), x.matrix());
    }

    #[test]
    fn embed_second_slot() {
        let e = embed_at(&Operator::unit(2, 1, 1), &[1], &[2, 2]).unwrap();
        let want = Operator::from_diag(&[ONE, ZERO, ONE, ZERO]);
        assert_eq!(e.matrix(), want.matrix());
    }

    #[test]
    fn embed_adjacent_matches_kron() {
        let x = kron(&sample(2, 2), &sample(2, 3));
        let e = embed_at(&x, &[1, 2], &[2, 2, 2]).unwrap();
        let k = kron(&Operator::identity(&[2]), &x);
        assert!(rel_diff(&e, &k) < 1e-15);
    }

    #[test]
    fn embed_reversed_slots_is_swap_conjugate() {
        let x = kron(&sample(2, 4), &sample(2, 5));
        let p = permutation_swap(2);
        let e = embed_at(&x, &[1, 0], &[2, 2]).unwrap();
        assert!(rel_diff(&e, &(&(&p * &x) * &p)) < 1e-15);
    }

    #[test]
    fn embed_errors() {
        let x = sample(2, 1);
        assert!(matches!(embed_at(&x, &[3], &[2, 2]), Err(Error::SlotOutOfRange { .. })));
        assert!(matches!(embed_at(&x, &[0], &[3, 2]), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn swap_basics() {
        let p = permutation_swap(2);
        assert_eq!(p.get(1, 2), ONE);
        assert_eq!(p.get(2, 1), ONE);
        assert_eq!(p.get(0, 0), ONE);
        assert_eq!(p.get(3, 3), ONE);
        assert_eq!((&p * &p).matrix(), &Mat::identity(4, 4));
        let v = kron(&Operator::unit(2, 1, 1), &Operator::unit(2, 2, 2));
        let w = kron(&Operator::unit(2, 2, 2), &Operator::unit(2, 1, 1));
        assert_eq!((&(&p * &v) * &p).matrix(), w.matrix());
    }

    #[test]
    fn partial_trace_examples() {
        let x = sample(3, 7);
        let t = partial_trace_first(&kron(&Operator::identity(&[2]), &x)).unwrap();
        assert!(rel_diff(&t, &x.scale(c(2.0, 0.0))) < 1e-15);
        let d = Operator::from_diag(&[c(0.3, 1.0), c(-2.0, 0.5)]);
        let t = partial_trace_first(&kron(&d, &Operator::identity(&[2]))).unwrap();
        assert!(rel_diff(&t, &Operator::identity(&[2]).scale(c(-1.7, 1.5))) < 1e-15);
        let t = partial_trace_first(&permutation_swap(2)).unwrap();
        assert_eq!(t.matrix(), &Mat::identity(2, 2));
        assert_eq!(partial_trace_first(&x), Err(Error::TooFewFactors));
    }

    #[test]
    fn partial_transpose_examples() {
        let a = sample(2, 8);
        let b = sample(3, 9);
        let ab = kron(&a, &b);
        let t1 = partial_transpose(&ab, 0).unwrap();
        assert!(rel_diff(&t1, &kron(&a.transpose(), &b)) < 1e-15);
        assert_eq!(partial_transpose(&t1, 0).unwrap(), ab);
        let r = sample(4, 10).with_dims(vec![2, 2]).unwrap();
        let both = partial_transpose(&partial_transpose(&r, 0).unwrap(), 1).unwrap();
        assert_eq!(both.matrix(), &r.matrix().transpose());
        assert!(partial_transpose(&r, 2).is_err());
    }

    #[test]
    fn commutator_examples() {
        let a = sample(3, 11);
        assert_eq!(commutator(&a, &a).unwrap().norm(), 0.0);
        assert_eq!(commutator(&Operator::identity(&[3]), &a).unwrap().norm(), 0.0);
        let k = commutator(&Operator::unit(2, 1, 2), &Operator::unit(2, 2, 1)).unwrap();
        assert_eq!(k.matrix(), Operator::from_diag(&[ONE, -ONE]).matrix());
        assert!(commutator(&a, &sample(2, 1)).is_err());
    }

    #[test]
    fn prop_check_examples() {
        let a = sample(4, 12);
        let r = prop_check(&a.scale(c(2.0, 0.0)), &a, 1e-12).unwrap();
        assert!((r.scalar - c(2.0, 0.0)).norm() < 1e-15);
        assert!(r.residual < 1e-15 && r.pass);
        let e = sample(4, 13).scale(c(1e-6, 0.0));
        let r = prop_check(&a, &(&a + &e), 1e-3).unwrap();
        assert!(r.residual < 2e-6);
        assert_eq!(prop_check(&a, &Operator::zeros(&[4]), 1.0), Err(Error::ZeroReference));
    }

    #[test]
    fn identity_defect_zero_on_scalar() {
        let s = Operator::identity(&[3]).scale(c(0.2, -1.0));
        assert!(identity_defect(&s) < 1e-16);
        assert!(identity_defect(&sample(3, 2)) > 0.1);
    }
}
