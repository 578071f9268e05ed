//! Dense complex matrices and the bipartite operations built on them.
//!
//! Bipartite index convention: a composite index (i_a, i_b) on 𝓗_A ⊗ 𝓗_B
//! maps to the flat index i_a·dim_b + i_b. Every operation on bipartite
//! operators in this crate uses this convention.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use crate::error::{Error, Result};

pub use num_complex::Complex64;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for k in 0..dim {
            m[(k, k)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Matrix unit E_kl: single 1 at row k, column l.
    pub fn unit(dim: usize, k: usize, l: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        m[(k, l)] = Complex64::new(1.0, 0.0);
        m
    }

    /// Build from a row-major entry vector. Checks the entry count and that
    /// every entry is finite.
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter(
                "matrix dimensions must be positive".into(),
            ));
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {}x{} matrix, got {}",
                rows * cols,
                rows,
                cols,
                entries.len()
            )));
        }
        if !entries.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFiniteEntry);
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::DimensionMismatch("rows have unequal lengths".into()));
        }
        Self::from_entries(nrows, ncols, rows.concat())
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let lifted: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&lifted)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Projector |v⟩⟨v| / ⟨v|v⟩ onto the (not necessarily normalized) ket `v`.
    pub fn ket_projector(v: &[Complex64]) -> Result<Self> {
        let norm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if !norm_sq.is_finite() {
            return Err(Error::NonFiniteEntry);
        }
        if norm_sq <= 0.0 {
            return Err(Error::InvalidParameter("zero ket has no projector".into()));
        }
        let d = v.len();
        Ok(Self::from_fn(d, d, |i, j| v[i] * v[j].conj() / norm_sq))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Conjugate transpose M†.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conjugate(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        debug_assert!(self.is_square());
        (0..self.rows.min(self.cols)).map(|k| self[(k, k)]).sum()
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.scale_complex(Complex64::new(factor, 0.0))
    }

    pub fn scale_complex(&self, factor: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "max_abs_diff: shape mismatch"
        );
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_diff(&self, other: &Self) -> f64 {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "frobenius_diff: shape mismatch"
        );
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self.rows, self.cols) == (other.rows, other.cols) && self.max_abs_diff(other) <= tol
    }

    /// Max-entry norm of M − M†.
    pub fn hermiticity_defect(&self) -> f64 {
        debug_assert!(self.is_square());
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Symmetrized part (M + M†)/2.
    pub fn hermitized(&self) -> Self {
        debug_assert!(self.is_square());
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "add: shape mismatch"
        );
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "sub: shape mismatch"
        );
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "mul: inner dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

/// Tensor-factor bookkeeping for operators on 𝓗_A ⊗ 𝓗_B.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BipartiteIndex {
    dim_a: usize,
    dim_b: usize,
}

impl BipartiteIndex {
    pub fn new(dim_a: usize, dim_b: usize) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::InvalidParameter(
                "bipartite factor dimensions must be positive".into(),
            ));
        }
        Ok(Self { dim_a, dim_b })
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn joint_dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    /// The index labeling the swapped space 𝓗_B ⊗ 𝓗_A.
    pub fn transposed(&self) -> Self {
        Self {
            dim_a: self.dim_b,
            dim_b: self.dim_a,
        }
    }

    fn check(&self, m: &ComplexMatrix) -> Result<()> {
        if !m.is_square() || m.rows() != self.joint_dim() {
            return Err(Error::DimensionMismatch(format!(
                "expected a square {0}x{0} bipartite operator ({1}x{2} factors), got {3}x{4}",
                self.joint_dim(),
                self.dim_a,
                self.dim_b,
                m.rows(),
                m.cols()
            )));
        }
        Ok(())
    }
}

/// Which tensor factor an operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Kronecker product a ⊗ b with index convention (i_a, i_b) ↦ i_a·dim_b + i_b.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(a.rows() * b.rows(), a.cols() * b.cols());
    for ia in 0..a.rows() {
        for ja in 0..a.cols() {
            let f = a[(ia, ja)];
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for ib in 0..b.rows() {
                for jb in 0..b.cols() {
                    out[(ia * b.rows() + ib, ja * b.cols() + jb)] = f * b[(ib, jb)];
                }
            }
        }
    }
    out
}

/// Partial trace over the named factor, using the (i_a, i_b) ↦ i_a·dim_b + i_b
/// convention. Tracing out A returns a dim_b × dim_b matrix, tracing out B a
/// dim_a × dim_a one; the full trace is preserved.
pub fn partial_trace(
    m: &ComplexMatrix,
    idx: BipartiteIndex,
    traced: Subsystem,
) -> Result<ComplexMatrix> {
    idx.check(m)?;
    let (da, db) = (idx.dim_a(), idx.dim_b());
    match traced {
        Subsystem::A => {
            let mut out = ComplexMatrix::zeros(db, db);
            for ib in 0..db {
                for jb in 0..db {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for ia in 0..da {
                        acc += m[(ia * db + ib, ia * db + jb)];
                    }
                    out[(ib, jb)] = acc;
                }
            }
            Ok(out)
        }
        Subsystem::B => {
            let mut out = ComplexMatrix::zeros(da, da);
            for ia in 0..da {
                for ja in 0..da {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for ib in 0..db {
                        acc += m[(ia * db + ib, ja * db + ib)];
                    }
                    out[(ia, ja)] = acc;
                }
            }
            Ok(out)
        }
    }
}

/// Anticommutator {a, b} = ab + ba.
pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_same_square(a, b)?;
    Ok(&(a * b) + &(b * a))
}

/// Commutator [a, b] = ab − ba.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_same_square(a, b)?;
    Ok(&(a * b) - &(b * a))
}

/// Conjugation S m S by the swap S|i⟩_A|j⟩_B = |j⟩_B|i⟩_A. The output lives
/// on 𝓗_B ⊗ 𝓗_A, indexed by `idx.transposed()`; applying it twice (with the
/// transposed index) returns the original matrix.
pub fn swap_conjugate(m: &ComplexMatrix, idx: BipartiteIndex) -> Result<ComplexMatrix> {
    idx.check(m)?;
    let (da, db) = (idx.dim_a(), idx.dim_b());
    let mut out = ComplexMatrix::zeros(da * db, da * db);
    for ia in 0..da {
        for ib in 0..db {
            for ja in 0..da {
                for jb in 0..db {
                    out[(ib * da + ia, jb * da + ja)] = m[(ia * db + ib, ja * db + jb)];
                }
            }
        }
    }
    Ok(out)
}

/// Transpose of the named factor only, e.g. (T ⊗ id)(m) for `Subsystem::A`.
pub fn partial_transpose(
    m: &ComplexMatrix,
    idx: BipartiteIndex,
    which: Subsystem,
) -> Result<ComplexMatrix> {
    idx.check(m)?;
    let (da, db) = (idx.dim_a(), idx.dim_b());
    let mut out = ComplexMatrix::zeros(da * db, da * db);
    for ia in 0..da {
        for ib in 0..db {
            for ja in 0..da {
                for jb in 0..db {
                    let v = m[(ia * db + ib, ja * db + jb)];
                    match which {
                        Subsystem::A => out[(ja * db + ib, ia * db + jb)] = v,
                        Subsystem::B => out[(ia * db + jb, ja * db + ib)] = v,
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Hilbert-Schmidt inner product Tr[a† b].
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex64> {
    check_same_square(a, b)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            acc += a[(i, j)].conj() * b[(i, j)];
        }
    }
    Ok(acc)
}

fn check_same_square(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if !a.is_square() || !b.is_square() || a.rows() != b.rows() {
        return Err(Error::DimensionMismatch(format!(
            "expected equal square dimensions, got {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(())
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[
        vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, -1.0)],
        vec![Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)],
    ])
    .unwrap()
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]).unwrap()
}

pub fn hadamard() -> ComplexMatrix {
    let s = 1.0 / 2.0_f64.sqrt();
    ComplexMatrix::from_real_rows(&[vec![s, s], vec![s, -s]]).unwrap()
}

/// SWAP on two equal factors of dimension `dim`.
pub fn swap_matrix(dim: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim * dim, dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            m[(i * dim + j, j * dim + i)] = Complex64::new(1.0, 0.0);
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn from_entries_rejects_bad_counts_and_nonfinite() {
        assert!(matches!(
            ComplexMatrix::from_entries(2, 2, vec![c(1.0, 0.0); 3]),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            ComplexMatrix::from_entries(1, 2, vec![c(1.0, 0.0), c(f64::NAN, 0.0)]),
            Err(Error::NonFiniteEntry)
        ));
    }

    #[test]
    fn tensor_identity_case() {
        let i2 = ComplexMatrix::identity(2);
        assert!(tensor(&i2, &i2).approx_eq(&ComplexMatrix::identity(4), 0.0));
    }

    #[test]
    fn tensor_basis_projectors() {
        let a = ComplexMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let b = ComplexMatrix::from_real_rows(&[vec![0.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let mut expected = ComplexMatrix::zeros(4, 4);
        expected[(1, 1)] = c(1.0, 0.0);
        assert!(tensor(&a, &b).approx_eq(&expected, 0.0));
    }

    #[test]
    fn tensor_offdiagonal_units() {
        // |0⟩⟨1| ⊗ |1⟩⟨0| has its single 1 at row 0·2+1 = 1, column 1·2+0 = 2.
        let t = tensor(&ComplexMatrix::unit(2, 0, 1), &ComplexMatrix::unit(2, 1, 0));
        let mut expected = ComplexMatrix::zeros(4, 4);
        expected[(1, 2)] = c(1.0, 0.0);
        assert!(t.approx_eq(&expected, 0.0));
    }

    #[test]
    fn partial_trace_of_product_states() {
        let rho = ComplexMatrix::from_real_rows(&[vec![0.7, 0.1], vec![0.1, 0.3]]).unwrap();
        let sigma = ComplexMatrix::from_real_rows(&[vec![0.5, 0.2], vec![0.2, 0.5]]).unwrap();
        let idx = BipartiteIndex::new(2, 2).unwrap();
        let joint = tensor(&rho, &sigma);
        let over_b = partial_trace(&joint, idx, Subsystem::B).unwrap();
        assert!(over_b.approx_eq(&rho, 1e-14));
        let over_a = partial_trace(&joint, idx, Subsystem::A).unwrap();
        assert!(over_a.approx_eq(&sigma, 1e-14));
    }

    #[test]
    fn partial_trace_of_swap_over_b() {
        let half_swap = swap_matrix(2).scale(0.5);
        let idx = BipartiteIndex::new(2, 2).unwrap();
        let out = partial_trace(&half_swap, idx, Subsystem::B).unwrap();
        assert!(out.approx_eq(&ComplexMatrix::identity(2).scale(0.5), 1e-15));
    }

    #[test]
    fn partial_trace_rejects_wrong_dims() {
        let idx = BipartiteIndex::new(2, 3).unwrap();
        let m = ComplexMatrix::identity(4);
        assert!(matches!(
            partial_trace(&m, idx, Subsystem::A),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn anticommutator_examples() {
        let x = pauli_x();
        let id = ComplexMatrix::identity(2);
        assert!(anticommutator(&id, &x)
            .unwrap()
            .approx_eq(&x.scale(2.0), 1e-15));

        let p0 = ComplexMatrix::unit(2, 0, 0);
        let plus = ComplexMatrix::ket_projector(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[vec![1.0, 0.5], vec![0.5, 0.0]]).unwrap();
        assert!(anticommutator(&p0, &plus)
            .unwrap()
            .approx_eq(&expected, 1e-15));

        // idempotence: {P, P} = 2P
        assert!(anticommutator(&plus, &plus)
            .unwrap()
            .approx_eq(&plus.scale(2.0), 1e-15));
    }

    #[test]
    fn swap_conjugate_exchanges_factors() {
        let rho = ComplexMatrix::from_real_rows(&[vec![0.7, 0.1], vec![0.1, 0.3]]).unwrap();
        let sigma = ComplexMatrix::from_real_rows(&[
            vec![0.5, 0.0, 0.1],
            vec![0.0, 0.3, 0.0],
            vec![0.1, 0.0, 0.2],
        ])
        .unwrap();
        let idx = BipartiteIndex::new(2, 3).unwrap();
        let swapped = swap_conjugate(&tensor(&rho, &sigma), idx).unwrap();
        assert!(swapped.approx_eq(&tensor(&sigma, &rho), 1e-15));

        let back = swap_conjugate(&swapped, idx.transposed()).unwrap();
        assert!(back.approx_eq(&tensor(&rho, &sigma), 0.0));
    }

    #[test]
    fn mismatched_dimensions_are_rejected() {
        let a = ComplexMatrix::identity(2);
        let b = ComplexMatrix::identity(3);
        assert!(matches!(
            anticommutator(&a, &b),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            commutator(&a, &b),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(hs_inner(&a, &b), Err(Error::DimensionMismatch(_))));
        let idx = BipartiteIndex::new(2, 2).unwrap();
        assert!(matches!(
            swap_conjugate(&ComplexMatrix::identity(6), idx),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(BipartiteIndex::new(0, 2).is_err());
    }

    #[test]
    fn hs_inner_examples() {
        let id3 = ComplexMatrix::identity(3);
        assert!((hs_inner(&id3, &id3).unwrap() - c(3.0, 0.0)).norm() < 1e-15);
        assert!(hs_inner(&pauli_x(), &pauli_z()).unwrap().norm() < 1e-15);

        let p0 = ComplexMatrix::unit(2, 0, 0);
        let plus = ComplexMatrix::ket_projector(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((hs_inner(&p0, &plus).unwrap() - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn hs_inner_is_frobenius_norm_squared() {
        let m = ComplexMatrix::from_rows(&[
            vec![c(1.0, 2.0), c(0.0, -1.0)],
            vec![c(0.5, 0.0), c(-2.0, 0.25)],
        ])
        .unwrap();
        let hs = hs_inner(&m, &m).unwrap();
        assert!((hs.re - m.frobenius_norm().powi(2)).abs() < 1e-14);
        assert!(hs.im.abs() < 1e-15);
    }

    #[test]
    fn partial_transpose_on_a_is_an_involution() {
        let idx = BipartiteIndex::new(2, 3).unwrap();
        let m = ComplexMatrix::from_fn(6, 6, |i, j| c(i as f64, j as f64));
        let pt = partial_transpose(&m, idx, Subsystem::A).unwrap();
        let back = partial_transpose(&pt, idx, Subsystem::A).unwrap();
        assert!(back.approx_eq(&m, 0.0));
    }
}
