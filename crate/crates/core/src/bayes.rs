//! Bayesian inversion of quantum channels through the anticommutator
//! equation ½{σ ⊗ 𝟙, X} = S ϱ_AB S, time-reversed Margenau-Hill tables, and
//! the quasiprobabilistic Bayes' rule they satisfy.

use serde::{Deserialize, Serialize};

use crate::channel::QuantumChannel;
use crate::config::Tolerances;
use crate::distributions::{
    mh_distribution, mh_with_kind, DistributionKind, JointQuasiDistribution, TpsmScenario,
};
use crate::error::{Error, Result};
use crate::matrix::{
    anticommutator, partial_trace, swap_conjugate, tensor, BipartiteIndex, ComplexMatrix, Subsystem,
};
use crate::sot::state_over_time;
use crate::states::DensityOperator;

/// Solution of ½{σ ⊗ 𝟙, X} = c together with its residual.
#[derive(Debug, Clone)]
pub struct AnticommutatorSolution {
    pub x: ComplexMatrix,
    pub residual: f64,
}

/// Solve ½{σ ⊗ 𝟙_A, X} = c blockwise in the eigenbasis of σ: block (k, l)
/// of X is 2·c_kl/(s_k + s_l). Kernel blocks (s_k + s_l below the support
/// tolerance) take the minimal-norm completion X_kl = 0 when the matching
/// block of c vanishes, and are an obstruction otherwise. Offending block
/// indices refer to σ's eigenbasis, eigenvalues ascending.
pub fn solve_anticommutator(
    sigma: &DensityOperator,
    c: &ComplexMatrix,
) -> Result<AnticommutatorSolution> {
    solve_anticommutator_with(sigma, c, &Tolerances::default())
}

pub fn solve_anticommutator_with(
    sigma: &DensityOperator,
    c: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<AnticommutatorSolution> {
    let db = sigma.dim();
    if !c.is_square() || !c.rows().is_multiple_of(db) {
        return Err(Error::DimensionMismatch(format!(
            "target must be square with rows divisible by {}, got {}x{}",
            db,
            c.rows(),
            c.cols()
        )));
    }
    let da = c.rows() / db;
    let eig = sigma.eig()?;
    let basis_ext = tensor(&eig.eigenvectors, &ComplexMatrix::identity(da));
    let c_tilde = &(&basis_ext.dagger() * c) * &basis_ext;

    let mut x_tilde = ComplexMatrix::zeros(db * da, db * da);
    let mut offending = Vec::new();
    for k in 0..db {
        for l in 0..db {
            let denom = eig.eigenvalues[k] + eig.eigenvalues[l];
            let mut block_norm_sq = 0.0;
            for i in 0..da {
                for j in 0..da {
                    block_norm_sq += c_tilde[(k * da + i, l * da + j)].norm_sqr();
                }
            }
            let block_norm = block_norm_sq.sqrt();
            if denom <= tol.support {
                if block_norm > tol.support {
                    offending.push((k, l));
                }
                continue;
            }
            for i in 0..da {
                for j in 0..da {
                    x_tilde[(k * da + i, l * da + j)] =
                        c_tilde[(k * da + i, l * da + j)] * (2.0 / denom);
                }
            }
        }
    }
    let x = &(&basis_ext * &x_tilde) * &basis_ext.dagger();

    let sigma_ext = tensor(sigma.matrix(), &ComplexMatrix::identity(da));
    let reconstructed = anticommutator(&sigma_ext, &x)?.scale(0.5);
    let residual = reconstructed.frobenius_diff(c);

    if !offending.is_empty() {
        return Err(Error::NoSolution {
            offending_blocks: offending,
            residual,
        });
    }
    Ok(AnticommutatorSolution { x, residual })
}

/// How a recovered Bayesian inverse classifies under CPTP validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InverseStatus {
    /// CPTP within tolerance and the Bayes-rule residual is small.
    Exact,
    /// The anticommutator equation was solved, but the recovered operator is
    /// not CPTP within tolerance. Both defects are reported.
    ApproximateCp {
        min_choi_eigenvalue: f64,
        tp_residual: f64,
    },
    /// Kernel obstruction: no operator satisfies the equation.
    NoSolution {
        offending_blocks: Vec<(usize, usize)>,
        residual: f64,
    },
}

/// Support/kernel structure of σ = ℰ(ρ), eigenvalues ascending.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SupportReport {
    pub eigenvalues: Vec<f64>,
    pub support_dim: usize,
    pub kernel_dim: usize,
}

/// Result of a Bayesian inversion attempt.
#[derive(Debug, Clone)]
pub struct BayesianInverseResult {
    pub status: InverseStatus,
    /// The recovered channel, present only when status is `Exact`.
    pub channel: Option<QuantumChannel>,
    /// The solved operator `X ≈ J[ℱ]` on B ⊗ A, regardless of CPTP status.
    pub jamiolkowski_solution: ComplexMatrix,
    /// Frobenius residual of ½{σ ⊗ 𝟙, X} against S ϱ_AB S.
    pub residual: f64,
    pub diagnostics: SupportReport,
}

impl BayesianInverseResult {
    /// Build a no-solution report from the solver error, for serialization.
    pub fn no_solution(
        offending_blocks: Vec<(usize, usize)>,
        residual: f64,
        diagnostics: SupportReport,
        dim: usize,
    ) -> Self {
        Self {
            status: InverseStatus::NoSolution {
                offending_blocks,
                residual,
            },
            channel: None,
            jamiolkowski_solution: ComplexMatrix::zeros(dim, dim),
            residual,
            diagnostics,
        }
    }
}

fn support_report(sigma: &DensityOperator, tol: &Tolerances) -> Result<SupportReport> {
    let eig = sigma.eig()?;
    let support_dim = eig
        .eigenvalues
        .iter()
        .filter(|&&s| s > tol.support / 2.0)
        .count();
    Ok(SupportReport {
        kernel_dim: eig.eigenvalues.len() - support_dim,
        eigenvalues: eig.eigenvalues,
        support_dim,
    })
}

/// Solve for a Bayesian inverse of `e` with respect to `rho`: find X with
/// ½{ℰ(ρ) ⊗ 𝟙, X} = S ϱ_AB S, rebuild a channel from X, and classify the
/// outcome. A kernel obstruction propagates as `Error::NoSolution`.
pub fn bayesian_inverse(
    e: &QuantumChannel,
    rho: &DensityOperator,
) -> Result<BayesianInverseResult> {
    bayesian_inverse_with(e, rho, &Tolerances::default())
}

pub fn bayesian_inverse_with(
    e: &QuantumChannel,
    rho: &DensityOperator,
    tol: &Tolerances,
) -> Result<BayesianInverseResult> {
    if rho.dim() != e.dim_in() {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {} does not match channel input {}",
            rho.dim(),
            e.dim_in()
        )));
    }
    let sigma = e.apply_state(rho)?;
    let diagnostics = support_report(&sigma, tol)?;
    let forward = state_over_time(rho, e)?;
    let target = swap_conjugate(forward.matrix(), forward.idx())?;
    let solution = solve_anticommutator_with(&sigma, &target, tol)?;
    let x = solution.x.hermitized();

    let (dim_b, dim_a) = (e.dim_out(), e.dim_in());
    let idx_ba = BipartiteIndex::new(dim_b, dim_a)?;
    let choi = crate::matrix::partial_transpose(&x, idx_ba, Subsystem::A)?;
    let choi_eig = crate::hermitian::jacobi_hermitian(&choi.hermitized())?;
    let min_choi = choi_eig.min_eigenvalue();
    let marginal = partial_trace(&x, idx_ba, Subsystem::B)?;
    let tp_residual = marginal.max_abs_diff(&ComplexMatrix::identity(dim_b));

    if min_choi < -tol.bayes_cp || tp_residual > tol.bayes_cp {
        return Ok(BayesianInverseResult {
            status: InverseStatus::ApproximateCp {
                min_choi_eigenvalue: min_choi,
                tp_residual,
            },
            channel: None,
            jamiolkowski_solution: x,
            residual: solution.residual,
            diagnostics,
        });
    }

    let relaxed = Tolerances {
        trace_preserving: tol.bayes_cp,
        completely_positive: tol.bayes_cp,
        hermiticity: tol.bayes_cp,
        ..tol.clone()
    };
    let channel = QuantumChannel::from_jamiolkowski(&x, dim_b, dim_a, &relaxed)?;
    let verify = verify_bayes_rule(e, rho, &channel)?;
    if verify > tol.bayes_residual {
        return Err(Error::InvariantViolation(format!(
            "recovered inverse fails the Bayes rule with residual {verify:.3e}"
        )));
    }
    Ok(BayesianInverseResult {
        status: InverseStatus::Exact,
        channel: Some(channel),
        jamiolkowski_solution: x,
        residual: solution.residual,
        diagnostics,
    })
}

/// Frobenius residual of the quantum Bayes' rule:
/// ‖S ϱ_BA S − ϱ_AB‖_F for ϱ_BA built from (ℰ(ρ), ℱ).
pub fn verify_bayes_rule(
    e: &QuantumChannel,
    rho: &DensityOperator,
    f: &QuantumChannel,
) -> Result<f64> {
    if f.dim_in() != e.dim_out() || f.dim_out() != e.dim_in() {
        return Err(Error::DimensionMismatch(format!(
            "inverse candidate must map {}→{}, got {}→{}",
            e.dim_out(),
            e.dim_in(),
            f.dim_in(),
            f.dim_out()
        )));
    }
    let sigma = e.apply_state(rho)?;
    let backward = state_over_time(&sigma, f)?;
    let forward = state_over_time(rho, e)?;
    let swapped = swap_conjugate(backward.matrix(), backward.idx())?;
    Ok(swapped.frobenius_diff(forward.matrix()))
}

/// The operational time-reversal of a scenario: (ℰ(ρ), {Q_j}, ℱ, {P_i}).
pub fn reversed_scenario(s: &TpsmScenario, f: &QuantumChannel) -> Result<TpsmScenario> {
    let sigma = s.channel().apply_state(s.rho())?;
    TpsmScenario::with_tolerances(
        sigma,
        s.pvm_b().clone(),
        f.clone(),
        s.pvm_a().clone(),
        s.tolerances().clone(),
    )
}

/// Margenau-Hill table of the reversed scenario. When `f` is an exact
/// Bayesian inverse, Q̄(j, i) = Q(i, j).
pub fn reversed_mh(s: &TpsmScenario, f: &QuantumChannel) -> Result<JointQuasiDistribution> {
    let reversed = reversed_scenario(s, f)?;
    mh_with_kind(&reversed, DistributionKind::ReversedMh)
}

/// One cell of the Bayes'-rule check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BayesCellCheck {
    pub row: String,
    pub col: String,
    /// Whether both marginals clear the conditional threshold.
    pub defined: bool,
    /// |Q(j|i)Q(i) − Q̄(i|j)Q̄(j)| on defined cells, |Q(i,j) − Q̄(j,i)| otherwise.
    pub residual: f64,
}

/// Cell-by-cell verification of Q(j|i)Q(i) = Q̄(i|j)Q̄(j). Conditionals are
/// formed by plain division with sign retained wherever both marginals exceed
/// the conditional threshold; other cells fall back to the multiplied-out
/// identity Q(i,j) = Q̄(j,i).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpatiotemporalBayesReport {
    pub cells: Vec<BayesCellCheck>,
    pub max_defined_residual: f64,
    pub max_multiplied_out_residual: f64,
    pub undefined_cells: usize,
    pub pass: bool,
}

pub fn spatiotemporal_bayes_check(
    s: &TpsmScenario,
    f: &QuantumChannel,
) -> Result<SpatiotemporalBayesReport> {
    let tol = s.tolerances();
    let q = mh_distribution(s)?;
    let q_bar = reversed_mh(s, f)?;
    let q_row = q.row_marginals();
    let q_bar_row = q_bar.row_marginals();

    let mut cells = Vec::with_capacity(q.num_rows() * q.num_cols());
    let mut max_defined: f64 = 0.0;
    let mut max_multiplied: f64 = 0.0;
    let mut undefined = 0usize;
    for (i, &qi) in q_row.iter().enumerate() {
        for (j, &qbj) in q_bar_row.iter().enumerate() {
            let defined = qi.abs() > tol.conditional && qbj.abs() > tol.conditional;
            let residual = if defined {
                let lhs = (q.get(i, j) / qi) * qi;
                let rhs = (q_bar.get(j, i) / qbj) * qbj;
                let r = (lhs - rhs).abs();
                max_defined = max_defined.max(r);
                r
            } else {
                undefined += 1;
                let r = (q.get(i, j) - q_bar.get(j, i)).abs();
                max_multiplied = max_multiplied.max(r);
                r
            };
            cells.push(BayesCellCheck {
                row: q.row_labels()[i].clone(),
                col: q.col_labels()[j].clone(),
                defined,
                residual,
            });
        }
    }
    Ok(SpatiotemporalBayesReport {
        cells,
        max_defined_residual: max_defined,
        max_multiplied_out_residual: max_multiplied,
        undefined_cells: undefined,
        pass: max_defined <= tol.bayes_residual && max_multiplied <= tol.bayes_residual,
    })
}
