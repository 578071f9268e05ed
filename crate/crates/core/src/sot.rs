//! The canonical state over time `½{ρ ⊗ 𝟙, J[ℰ]}` and its spectral analysis.

use serde::{Deserialize, Serialize};

use crate::channel::QuantumChannel;
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::hermitian::HermitianOperator;
use crate::matrix::{
    anticommutator, partial_trace, tensor, BipartiteIndex, ComplexMatrix, Subsystem,
};
use crate::states::DensityOperator;

/// Bipartite Hermitian unit-trace operator encoding the pair (ρ, ℰ): its
/// marginal over B is ρ and its marginal over A is ℰ(ρ). Not positive
/// semidefinite in general.
#[derive(Debug, Clone)]
pub struct StateOverTime {
    idx: BipartiteIndex,
    op: HermitianOperator,
    source_state: DensityOperator,
    source_channel: QuantumChannel,
}

/// Construct the state over time `½{ρ ⊗ 𝟙, J[ℰ]}`, re-Hermitized once, with
/// trace and marginal invariants validated.
pub fn state_over_time(rho: &DensityOperator, e: &QuantumChannel) -> Result<StateOverTime> {
    state_over_time_with(rho, e, &Tolerances::default())
}

pub fn state_over_time_with(
    rho: &DensityOperator,
    e: &QuantumChannel,
    tol: &Tolerances,
) -> Result<StateOverTime> {
    if rho.dim() != e.dim_in() {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {} does not match channel input {}",
            rho.dim(),
            e.dim_in()
        )));
    }
    let idx = BipartiteIndex::new(e.dim_in(), e.dim_out())?;
    let rho_ext = tensor(rho.matrix(), &ComplexMatrix::identity(e.dim_out()));
    let raw = anticommutator(&rho_ext, e.jamiolkowski().matrix())?.scale(0.5);
    let op = HermitianOperator::symmetrize(raw);

    let sot = StateOverTime {
        idx,
        op,
        source_state: rho.clone(),
        source_channel: e.clone(),
    };
    let trace_error = (sot.op.matrix().trace().re - 1.0).abs();
    if trace_error > tol.marginal {
        return Err(Error::InvariantViolation(format!(
            "state over time trace defect {trace_error:.3e}"
        )));
    }
    let marginals = sot.check_marginals_with(tol)?;
    if !marginals.pass {
        return Err(Error::InvariantViolation(format!(
            "state over time marginal residuals {:.3e}, {:.3e}",
            marginals.residual_marginal_a, marginals.residual_marginal_b
        )));
    }
    Ok(sot)
}

impl StateOverTime {
    /// Wrap a caller-supplied bipartite operator, validating Hermiticity and
    /// unit trace but not the marginal structure; `check_marginals` reports
    /// the latter. Intended for perturbation studies and external operators.
    pub fn from_parts(
        matrix: ComplexMatrix,
        source_state: DensityOperator,
        source_channel: QuantumChannel,
    ) -> Result<Self> {
        let idx = BipartiteIndex::new(source_channel.dim_in(), source_channel.dim_out())?;
        if !matrix.is_square() || matrix.rows() != idx.joint_dim() {
            return Err(Error::DimensionMismatch(format!(
                "expected a {0}x{0} bipartite operator, got {1}x{2}",
                idx.joint_dim(),
                matrix.rows(),
                matrix.cols()
            )));
        }
        let op = HermitianOperator::with_tolerances(
            matrix,
            &Tolerances {
                hermiticity: 1e-10,
                ..Tolerances::default()
            },
        )?;
        let trace_error = (op.matrix().trace().re - 1.0).abs();
        if trace_error > 1e-10 {
            return Err(Error::NotUnitTrace { trace_error });
        }
        Ok(Self {
            idx,
            op,
            source_state,
            source_channel,
        })
    }

    pub fn idx(&self) -> BipartiteIndex {
        self.idx
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.op.matrix()
    }

    pub fn herm(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn source_state(&self) -> &DensityOperator {
        &self.source_state
    }

    pub fn source_channel(&self) -> &QuantumChannel {
        &self.source_channel
    }

    /// Spectrum-derived quantities. Negativity is Σ|λ| over negative
    /// eigenvalues and the causality measure is the trace norm minus one;
    /// the two are computed independently and cross-checked.
    pub fn spectrum_report(&self) -> Result<SpectrumReport> {
        self.spectrum_report_with(&Tolerances::default())
    }

    pub fn spectrum_report_with(&self, tol: &Tolerances) -> Result<SpectrumReport> {
        let eig = self.op.eig()?;
        let sum: f64 = eig.eigenvalues.iter().sum();
        if (sum - 1.0).abs() > tol.marginal {
            return Err(Error::InvariantViolation(format!(
                "spectrum sums to {sum}, expected 1"
            )));
        }
        let negativity = eig.negativity();
        let causality_measure = eig.trace_norm() - 1.0;
        if (causality_measure - 2.0 * negativity).abs() > tol.marginal {
            return Err(Error::InvariantViolation(
                "causality measure disagrees with 2x negativity".into(),
            ));
        }
        Ok(SpectrumReport {
            eigenvalues: eig.eigenvalues,
            negativity,
            causality_measure,
            is_psd: negativity <= tol.classify_psd,
        })
    }

    /// Frobenius residuals of the two marginals against ρ and ℰ(ρ).
    pub fn check_marginals(&self) -> Result<MarginalReport> {
        self.check_marginals_with(&Tolerances::default())
    }

    pub fn check_marginals_with(&self, tol: &Tolerances) -> Result<MarginalReport> {
        let over_b = partial_trace(self.op.matrix(), self.idx, Subsystem::B)?;
        let residual_marginal_a = over_b.frobenius_diff(self.source_state.matrix());
        let over_a = partial_trace(self.op.matrix(), self.idx, Subsystem::A)?;
        let evolved = self.source_channel.apply(self.source_state.matrix())?;
        let residual_marginal_b = over_a.frobenius_diff(&evolved);
        Ok(MarginalReport {
            residual_marginal_a,
            residual_marginal_b,
            pass: residual_marginal_a <= tol.marginal && residual_marginal_b <= tol.marginal,
        })
    }
}

/// Spectral summary of a state over time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// Ascending eigenvalues.
    pub eigenvalues: Vec<f64>,
    /// Σ|λ| over negative eigenvalues.
    pub negativity: f64,
    /// Trace norm minus one; equals 2 × negativity at unit trace.
    pub causality_measure: f64,
    pub is_psd: bool,
}

impl SpectrumReport {
    /// True when the negativity sits within a decade of the classification
    /// threshold, i.e. too close to call confidently.
    pub fn is_borderline(&self, tol: &Tolerances) -> bool {
        self.negativity > tol.classify_psd * 0.1 && self.negativity <= tol.classify_psd * 10.0
    }
}

/// Marginal residual report: `residual_marginal_a` compares the marginal on A
/// (trace over B) with ρ, `residual_marginal_b` compares the marginal on B
/// (trace over A) with ℰ(ρ).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarginalReport {
    pub residual_marginal_a: f64,
    pub residual_marginal_b: f64,
    pub pass: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{swap_matrix, Complex64};

    #[test]
    fn identity_channel_on_maximally_mixed_gives_half_swap() {
        let rho = DensityOperator::maximally_mixed(2).unwrap();
        let e = QuantumChannel::identity(2).unwrap();
        let sot = state_over_time(&rho, &e).unwrap();
        assert!(sot.matrix().approx_eq(&swap_matrix(2).scale(0.5), 1e-14));

        let report = sot.spectrum_report().unwrap();
        let expected = [-0.5, 0.5, 0.5, 0.5];
        for (got, want) in report.eigenvalues.iter().zip(expected) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!((report.negativity - 0.5).abs() < 1e-12);
        assert!((report.causality_measure - 1.0).abs() < 1e-12);
        assert!(!report.is_psd);
    }

    #[test]
    fn discard_and_prepare_gives_product_operator() {
        let rho = DensityOperator::diagonal(&[0.7, 0.3]).unwrap();
        let sigma = DensityOperator::diagonal(&[0.2, 0.5, 0.3]).unwrap();
        let e = QuantumChannel::discard_and_prepare(2, &sigma).unwrap();
        let sot = state_over_time(&rho, &e).unwrap();
        let expected = tensor(rho.matrix(), sigma.matrix());
        assert!(sot.matrix().approx_eq(&expected, 1e-13));

        let report = sot.spectrum_report().unwrap();
        assert!(report.negativity < 1e-13);
        assert!(report.is_psd);
    }

    #[test]
    fn marginals_match_sources() {
        let rho = DensityOperator::diagonal(&[0.25, 0.75]).unwrap();
        let e = QuantumChannel::erasure(0.5).unwrap();
        let sot = state_over_time(&rho, &e).unwrap();
        let report = sot.check_marginals().unwrap();
        assert!(report.pass);
        assert!(report.residual_marginal_a < 1e-13);
        assert!(report.residual_marginal_b < 1e-13);

        // erasure marginal over A is diag((1−λ)p, (1−λ)(1−p), λ)
        let over_a = partial_trace(sot.matrix(), sot.idx(), Subsystem::A).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[
            vec![0.125, 0.0, 0.0],
            vec![0.0, 0.375, 0.0],
            vec![0.0, 0.0, 0.5],
        ])
        .unwrap();
        assert!(over_a.approx_eq(&expected, 1e-14));
    }

    #[test]
    fn perturbed_operator_fails_marginal_check() {
        let rho = DensityOperator::maximally_mixed(2).unwrap();
        let e = QuantumChannel::identity(2).unwrap();
        let sot = state_over_time(&rho, &e).unwrap();
        let mut broken = sot.matrix().clone();
        broken[(0, 0)] += Complex64::new(1e-6, 0.0);
        broken[(3, 3)] -= Complex64::new(1e-6, 0.0);
        let perturbed = StateOverTime::from_parts(broken, rho.clone(), e.clone()).unwrap();
        let report = perturbed.check_marginals().unwrap();
        assert!(!report.pass);
        assert!(report.residual_marginal_a > 5e-7);
    }
}
