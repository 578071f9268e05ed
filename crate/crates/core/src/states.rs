//! Density operators and projective measurements.

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::hermitian::{EigDecomposition, HermitianOperator};
use crate::matrix::{Complex64, ComplexMatrix};

/// A quantum state: positive semidefinite with unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    dim: usize,
    op: HermitianOperator,
}

impl DensityOperator {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        Self::validated(op, &Tolerances::default())
    }

    pub fn from_matrix(m: ComplexMatrix) -> Result<Self> {
        Self::from_matrix_with(m, &Tolerances::default())
    }

    pub fn from_matrix_with(m: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        Self::validated(HermitianOperator::with_tolerances(m, tol)?, tol)
    }

    fn validated(op: HermitianOperator, tol: &Tolerances) -> Result<Self> {
        let trace_error = (op.matrix().trace().re - 1.0).abs();
        if trace_error > tol.unit_trace {
            return Err(Error::NotUnitTrace { trace_error });
        }
        let min = op.eig()?.min_eigenvalue();
        if min < -tol.psd {
            return Err(Error::NotPositiveSemidefinite {
                min_eigenvalue: min,
            });
        }
        Ok(Self { dim: op.dim(), op })
    }

    /// Pure state |v⟩⟨v| from a (not necessarily normalized) ket.
    pub fn pure(ket: &[Complex64]) -> Result<Self> {
        Self::from_matrix(ComplexMatrix::ket_projector(ket)?)
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        Self::from_matrix(ComplexMatrix::identity(dim).scale(1.0 / dim as f64))
    }

    /// Diagonal state from nonnegative populations summing to one.
    pub fn diagonal(populations: &[f64]) -> Result<Self> {
        let d = populations.len();
        let mut m = ComplexMatrix::zeros(d, d);
        for (k, &p) in populations.iter().enumerate() {
            m[(k, k)] = Complex64::new(p, 0.0);
        }
        Self::from_matrix(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.op.matrix()
    }

    pub fn herm(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn eig(&self) -> Result<EigDecomposition> {
        self.op.eig()
    }

    /// ⟨obs⟩ = Tr[obs · ρ].
    pub fn expectation(&self, obs: &ComplexMatrix) -> f64 {
        (obs * self.matrix()).trace().re
    }

    pub fn is_maximally_mixed(&self, tol: f64) -> bool {
        let mm = ComplexMatrix::identity(self.dim).scale(1.0 / self.dim as f64);
        self.matrix().max_abs_diff(&mm) <= tol
    }
}

/// A projective measurement: mutually orthogonal projectors summing to the
/// identity, with caller-supplied outcome labels (defaulting to indices).
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveMeasurement {
    dim: usize,
    projectors: Vec<HermitianOperator>,
    labels: Vec<String>,
}

impl ProjectiveMeasurement {
    pub fn new(projectors: Vec<HermitianOperator>, labels: Option<Vec<String>>) -> Result<Self> {
        Self::with_tolerances(projectors, labels, &Tolerances::default())
    }

    pub fn with_tolerances(
        projectors: Vec<HermitianOperator>,
        labels: Option<Vec<String>>,
        tol: &Tolerances,
    ) -> Result<Self> {
        if projectors.is_empty() {
            return Err(Error::InvalidMeasurement(
                "measurement needs at least one outcome".into(),
            ));
        }
        let dim = projectors[0].dim();
        if projectors.iter().any(|p| p.dim() != dim) {
            return Err(Error::InvalidMeasurement(
                "projectors have mixed dimensions".into(),
            ));
        }
        let labels = match labels {
            Some(l) => {
                if l.len() != projectors.len() {
                    return Err(Error::InvalidMeasurement(format!(
                        "{} labels for {} projectors",
                        l.len(),
                        projectors.len()
                    )));
                }
                l
            }
            None => (0..projectors.len()).map(|k| k.to_string()).collect(),
        };

        for (i, p) in projectors.iter().enumerate() {
            for (j, q) in projectors.iter().enumerate() {
                let prod = p.matrix() * q.matrix();
                let expected = if i == j {
                    p.matrix().clone()
                } else {
                    ComplexMatrix::zeros(dim, dim)
                };
                let residual = prod.max_abs_diff(&expected);
                if residual > tol.pvm {
                    return Err(Error::InvalidMeasurement(format!(
                        "projector orthogonality failed at pair ({i}, {j}): residual {residual:.3e}"
                    )));
                }
            }
        }
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for p in &projectors {
            sum = &sum + p.matrix();
        }
        let completeness = sum.max_abs_diff(&ComplexMatrix::identity(dim));
        if completeness > tol.pvm {
            return Err(Error::InvalidMeasurement(format!(
                "projectors do not sum to the identity: residual {completeness:.3e}"
            )));
        }

        Ok(Self {
            dim,
            projectors,
            labels,
        })
    }

    /// The computational-basis measurement {|k⟩⟨k|}.
    pub fn computational(dim: usize) -> Result<Self> {
        let projectors = (0..dim)
            .map(|k| HermitianOperator::new(ComplexMatrix::unit(dim, k, k)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(projectors, None)
    }

    /// Binary measurement {P, 𝟙 − P} from a single projector of any rank.
    pub fn binary(p: &HermitianOperator) -> Result<Self> {
        let dim = p.dim();
        let idem = &(p.matrix() * p.matrix()) - p.matrix();
        if idem.max_abs() > Tolerances::default().pvm {
            return Err(Error::InvalidMeasurement(format!(
                "not a projector: ‖P² − P‖ = {:.3e}",
                idem.max_abs()
            )));
        }
        let complement = &ComplexMatrix::identity(dim) - p.matrix();
        Self::new(
            vec![p.clone(), HermitianOperator::symmetrize(complement)],
            None,
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_outcomes(&self) -> usize {
        self.projectors.len()
    }

    pub fn projector(&self, k: usize) -> &HermitianOperator {
        &self.projectors[k]
    }

    pub fn projectors(&self) -> &[HermitianOperator] {
        &self.projectors
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}
