//! Numerical tolerances used by constructors and checks.

use serde::{Deserialize, Serialize};

/// Absolute tolerances for validation and classification. All constructors
/// accept an explicit `Tolerances`; `Default` gives the standard values.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Max-entry bound on ‖M − M†‖ accepted by Hermitian constructors.
    pub hermiticity: f64,
    /// Lower bound −psd on eigenvalues accepted for density operators.
    pub psd: f64,
    /// Bound on |Tr ρ − 1| for density operators.
    pub unit_trace: f64,
    /// Max-entry bound for PVM orthogonality and completeness.
    pub pvm: f64,
    /// Max-entry bound on Σ K†K − 𝟙 for channels.
    pub trace_preserving: f64,
    /// Lower bound on Choi eigenvalues for channels.
    pub completely_positive: f64,
    /// Frobenius bound on eigendecomposition reconstruction residuals.
    pub spectral: f64,
    /// Frobenius bound on state-over-time marginal residuals.
    pub marginal: f64,
    /// Bound on discarded imaginary parts of quasiprobability entries.
    pub imaginary_residue: f64,
    /// Negativity threshold for classifying a spectrum as PSD.
    pub classify_psd: f64,
    /// Threshold below which σ-eigenvalue sums count as kernel blocks.
    pub support: f64,
    /// CPTP tolerance used when classifying a recovered Bayesian inverse.
    pub bayes_cp: f64,
    /// Residual bound for an exact Bayesian inverse.
    pub bayes_residual: f64,
    /// Threshold below which quasiprobability marginals give undefined conditionals.
    pub conditional: f64,
    /// Smallest acceptable singular value for a tomographic design matrix.
    pub frame_conditioning: f64,
    /// Violation threshold for the Born-rule-existence verdict.
    pub born_existence: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermiticity: 1e-12,
            psd: 1e-12,
            unit_trace: 1e-12,
            pvm: 1e-10,
            trace_preserving: 1e-10,
            completely_positive: 1e-10,
            spectral: 1e-10,
            marginal: 1e-10,
            imaginary_residue: 1e-10,
            classify_psd: 1e-10,
            support: 1e-10,
            bayes_cp: 1e-8,
            bayes_residual: 1e-8,
            conditional: 1e-10,
            frame_conditioning: 1e-6,
            born_existence: 1e-8,
        }
    }
}

/// Partial tolerance overrides, as they appear in scenario files.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub hermiticity: Option<f64>,
    pub psd: Option<f64>,
    pub unit_trace: Option<f64>,
    pub pvm: Option<f64>,
    pub trace_preserving: Option<f64>,
    pub completely_positive: Option<f64>,
    pub spectral: Option<f64>,
    pub marginal: Option<f64>,
    pub imaginary_residue: Option<f64>,
    pub classify_psd: Option<f64>,
    pub support: Option<f64>,
    pub bayes_cp: Option<f64>,
    pub bayes_residual: Option<f64>,
    pub conditional: Option<f64>,
    pub frame_conditioning: Option<f64>,
    pub born_existence: Option<f64>,
}

impl ToleranceOverrides {
    /// Apply the overrides on top of `base`, returning the merged set.
    pub fn apply(&self, base: &Tolerances) -> Tolerances {
        let mut t = base.clone();
        macro_rules! merge {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { t.$field = v; })*
            };
        }
        merge!(
            hermiticity,
            psd,
            unit_trace,
            pvm,
            trace_preserving,
            completely_positive,
            spectral,
            marginal,
            imaginary_residue,
            classify_psd,
            support,
            bayes_cp,
            bayes_residual,
            conditional,
            frame_conditioning,
            born_existence
        );
        t
    }
}
