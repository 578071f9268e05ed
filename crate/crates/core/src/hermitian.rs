//! Hermitian operators and their eigendecomposition.

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::matrix::{Complex64, ComplexMatrix};

/// A validated Hermitian operator. The stored matrix is exactly (M + M†)/2;
/// inputs whose asymmetry exceeds the hermiticity tolerance are rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    dim: usize,
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::with_tolerances(m, &Tolerances::default())
    }

    pub fn with_tolerances(m: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "Hermitian operator must be square, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let defect = m.hermiticity_defect();
        if defect > tol.hermiticity {
            return Err(Error::NotHermitian {
                max_asymmetry: defect,
                tolerance: tol.hermiticity,
            });
        }
        Ok(Self::symmetrize(m))
    }

    /// Symmetrize unconditionally. For operators that are Hermitian by
    /// construction up to floating-point noise.
    pub(crate) fn symmetrize(m: ComplexMatrix) -> Self {
        let dim = m.rows();
        Self {
            dim,
            matrix: m.hermitized(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn eig(&self) -> Result<EigDecomposition> {
        jacobi_hermitian(&self.matrix)
    }

    /// Tr[self · rho], real by Hermiticity of both factors.
    pub fn expectation(&self, rho: &ComplexMatrix) -> Result<f64> {
        let prod = &self.matrix * rho;
        Ok(prod.trace().re)
    }
}

/// Eigendecomposition h = V diag(λ) V† with real eigenvalues in ascending
/// order and eigenvectors as the columns of a unitary matrix.
#[derive(Debug, Clone)]
pub struct EigDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// V diag(λ) V†.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.dim();
        let mut scaled = self.eigenvectors.clone();
        for j in 0..n {
            for i in 0..n {
                scaled[(i, j)] *= Complex64::new(self.eigenvalues[j], 0.0);
            }
        }
        &scaled * &self.eigenvectors.dagger()
    }

    /// Max-entry norm of V†V − 𝟙.
    pub fn unitarity_defect(&self) -> f64 {
        let gram = &self.eigenvectors.dagger() * &self.eigenvectors;
        gram.max_abs_diff(&ComplexMatrix::identity(self.dim()))
    }

    pub fn trace_norm(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.abs()).sum()
    }

    /// Sum of |λ| over the negative eigenvalues.
    pub fn negativity(&self) -> f64 {
        self.eigenvalues
            .iter()
            .filter(|&&l| l < 0.0)
            .map(|l| -l)
            .sum()
    }

    /// Column k as a ket.
    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        (0..self.dim()).map(|i| self.eigenvectors[(i, k)]).collect()
    }
}

/// Top-level eigendecomposition entry point for Hermitian operators.
pub fn eig_hermitian(h: &HermitianOperator) -> Result<EigDecomposition> {
    h.eig()
}

const MAX_SWEEPS: usize = 64;

/// Cyclic Jacobi eigensolver for Hermitian matrices. Each rotation combines
/// a phase (making the targeted off-diagonal entry real) with a real Givens
/// rotation that annihilates it; sweeps run until the largest off-diagonal
/// modulus falls below scale·1e-15.
pub(crate) fn jacobi_hermitian(m: &ComplexMatrix) -> Result<EigDecomposition> {
    debug_assert!(m.is_square());
    debug_assert!(
        m.hermiticity_defect() < 1e-8,
        "jacobi input must be Hermitian"
    );
    let n = m.rows();
    let mut a = m.hermitized();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    let threshold = scale * 1e-15;

    let mut sweeps = 0;
    loop {
        let mut off: f64 = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off <= threshold {
            break;
        }
        if sweeps >= MAX_SWEEPS {
            return Err(Error::ConvergenceFailure {
                sweeps,
                off_norm: off,
            });
        }
        sweeps += 1;

        for p in 0..n {
            for q in (p + 1)..n {
                let c_pq = a[(p, q)];
                let abs_c = c_pq.norm();
                if abs_c <= threshold * 0.01 {
                    continue;
                }
                let phase = c_pq / abs_c;
                let alpha = a[(p, p)].re;
                let beta = a[(q, q)].re;
                let tau = (beta - alpha) / (2.0 * abs_c);
                let t = if tau >= 0.0 {
                    -1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let cos = 1.0 / (1.0 + t * t).sqrt();
                let sin = t * cos;

                // U = [[z·cos, −z·sin], [sin, cos]] on the (p, q) plane,
                // with z the phase of a[(p, q)].
                let upp = phase * cos;
                let upq = -phase * sin;
                let uqp = Complex64::new(sin, 0.0);
                let uqq = Complex64::new(cos, 0.0);

                // rows p, q of a ← U† · a
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = upp.conj() * apk + uqp.conj() * aqk;
                    a[(q, k)] = upq.conj() * apk + uqq.conj() * aqk;
                }
                // columns p, q of a ← a · U; same update accumulates into v
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * upp + akq * uqp;
                    a[(k, q)] = akp * upq + akq * uqq;

                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * upp + vkq * uqp;
                    v[(k, q)] = vkp * upq + vkq * uqq;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&k| a[(k, k)].re).collect();
    let mut eigenvectors = ComplexMatrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for i in 0..n {
            eigenvectors[(i, new_col)] = v[(i, old_col)];
        }
    }
    Ok(EigDecomposition {
        eigenvalues,
        eigenvectors,
    })
}
