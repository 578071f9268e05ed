//! Joint outcome statistics for two-point sequential measurement scenarios:
//! the projective-update (Lüders-von Neumann) distribution, the Margenau-Hill
//! quasiprobability distribution, the disturbance term relating them, Born
//! evaluation against a state over time, coarse-graining, and two-time
//! expectation values.

use serde::{Deserialize, Serialize};

use crate::channel::QuantumChannel;
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::hermitian::HermitianOperator;
use crate::matrix::{anticommutator, tensor, ComplexMatrix};
use crate::sot::StateOverTime;
use crate::states::{DensityOperator, ProjectiveMeasurement};

/// A two-point sequential measurement scenario: prepare ρ, measure {P_i},
/// evolve through ℰ, measure {Q_j}.
#[derive(Debug, Clone)]
pub struct TpsmScenario {
    rho: DensityOperator,
    pvm_a: ProjectiveMeasurement,
    channel: QuantumChannel,
    pvm_b: ProjectiveMeasurement,
    tolerances: Tolerances,
}

impl TpsmScenario {
    pub fn new(
        rho: DensityOperator,
        pvm_a: ProjectiveMeasurement,
        channel: QuantumChannel,
        pvm_b: ProjectiveMeasurement,
    ) -> Result<Self> {
        Self::with_tolerances(rho, pvm_a, channel, pvm_b, Tolerances::default())
    }

    pub fn with_tolerances(
        rho: DensityOperator,
        pvm_a: ProjectiveMeasurement,
        channel: QuantumChannel,
        pvm_b: ProjectiveMeasurement,
        tolerances: Tolerances,
    ) -> Result<Self> {
        if rho.dim() != pvm_a.dim() || rho.dim() != channel.dim_in() {
            return Err(Error::DimensionMismatch(format!(
                "A-side dimension chain broken: rho {}, pvm_a {}, channel input {}",
                rho.dim(),
                pvm_a.dim(),
                channel.dim_in()
            )));
        }
        if channel.dim_out() != pvm_b.dim() {
            return Err(Error::DimensionMismatch(format!(
                "B-side dimension chain broken: channel output {}, pvm_b {}",
                channel.dim_out(),
                pvm_b.dim()
            )));
        }
        Ok(Self {
            rho,
            pvm_a,
            channel,
            pvm_b,
            tolerances,
        })
    }

    pub fn rho(&self) -> &DensityOperator {
        &self.rho
    }

    pub fn pvm_a(&self) -> &ProjectiveMeasurement {
        &self.pvm_a
    }

    pub fn channel(&self) -> &QuantumChannel {
        &self.channel
    }

    pub fn pvm_b(&self) -> &ProjectiveMeasurement {
        &self.pvm_b
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tolerances
    }

    pub fn dim_a(&self) -> usize {
        self.rho.dim()
    }

    pub fn dim_b(&self) -> usize {
        self.channel.dim_out()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    Lvn,
    Mh,
    Disturbance,
    ReversedMh,
}

/// Real-valued joint table over labeled outcomes (i, j), row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct JointQuasiDistribution {
    kind: DistributionKind,
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    values: Vec<f64>,
}

impl JointQuasiDistribution {
    fn finalize(
        kind: DistributionKind,
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        values: Vec<f64>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let d = Self {
            kind,
            row_labels,
            col_labels,
            values,
        };
        let total = d.total();
        match kind {
            DistributionKind::Lvn => {
                if d.min_entry() < -1e-12 {
                    return Err(Error::InvariantViolation(format!(
                        "negative probability {:.3e} in projective-update table",
                        d.min_entry()
                    )));
                }
                if (total - 1.0).abs() > tol.marginal {
                    return Err(Error::InvariantViolation(format!(
                        "projective-update table sums to {total}"
                    )));
                }
            }
            DistributionKind::Mh | DistributionKind::ReversedMh => {
                if (total - 1.0).abs() > tol.marginal {
                    return Err(Error::InvariantViolation(format!(
                        "quasiprobability table sums to {total}"
                    )));
                }
            }
            DistributionKind::Disturbance => {
                if total.abs() > tol.marginal {
                    return Err(Error::InvariantViolation(format!(
                        "disturbance table sums to {total}, expected 0"
                    )));
                }
            }
        }
        Ok(d)
    }

    pub fn kind(&self) -> DistributionKind {
        self.kind
    }

    pub fn num_rows(&self) -> usize {
        self.row_labels.len()
    }

    pub fn num_cols(&self) -> usize {
        self.col_labels.len()
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.num_cols() + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn min_entry(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Σ_j table(i, j) per row.
    pub fn row_marginals(&self) -> Vec<f64> {
        (0..self.num_rows())
            .map(|i| (0..self.num_cols()).map(|j| self.get(i, j)).sum())
            .collect()
    }

    /// Σ_i table(i, j) per column.
    pub fn col_marginals(&self) -> Vec<f64> {
        (0..self.num_cols())
            .map(|j| (0..self.num_rows()).map(|i| self.get(i, j)).sum())
            .collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(
            (self.num_rows(), self.num_cols()),
            (other.num_rows(), other.num_cols()),
            "distribution shape mismatch"
        );
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Max |self(i, j) − other(j, i)|; shapes must be transposes.
    pub fn max_abs_diff_transposed(&self, other: &Self) -> f64 {
        assert_eq!(
            (self.num_rows(), self.num_cols()),
            (other.num_cols(), other.num_rows()),
            "distribution transpose shape mismatch"
        );
        let mut worst: f64 = 0.0;
        for i in 0..self.num_rows() {
            for j in 0..self.num_cols() {
                worst = worst.max((self.get(i, j) - other.get(j, i)).abs());
            }
        }
        worst
    }

    /// Entrywise difference as a raw table (no kind-level invariants).
    pub fn entrywise_sub(&self, other: &Self, kind: DistributionKind) -> Self {
        assert_eq!(
            (self.num_rows(), self.num_cols()),
            (other.num_rows(), other.num_cols()),
            "distribution shape mismatch"
        );
        Self {
            kind,
            row_labels: self.row_labels.clone(),
            col_labels: self.col_labels.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

fn trace_real(product: &ComplexMatrix, projector: &ComplexMatrix, tol: &Tolerances) -> Result<f64> {
    let val = (product * projector).trace();
    if val.im.abs() > tol.imaginary_residue {
        return Err(Error::ImaginaryResidueExceeded {
            residual: val.im.abs(),
            tolerance: tol.imaginary_residue,
        });
    }
    Ok(val.re)
}

/// Projective-update joint distribution P(i, j) = Tr[ℰ(P_i ρ P_i) Q_j].
pub fn lvn_distribution(s: &TpsmScenario) -> Result<JointQuasiDistribution> {
    let tol = s.tolerances();
    let mut values = Vec::with_capacity(s.pvm_a().num_outcomes() * s.pvm_b().num_outcomes());
    for p in s.pvm_a().projectors() {
        let updated = &(p.matrix() * s.rho().matrix()) * p.matrix();
        let evolved = s.channel().apply(&updated)?;
        for q in s.pvm_b().projectors() {
            values.push(trace_real(&evolved, q.matrix(), tol)?);
        }
    }
    JointQuasiDistribution::finalize(
        DistributionKind::Lvn,
        s.pvm_a().labels().to_vec(),
        s.pvm_b().labels().to_vec(),
        values,
        tol,
    )
}

/// Margenau-Hill joint quasiprobability Q(i, j) = ½ Tr[ℰ({ρ, P_i}) Q_j].
/// Entries are real after an imaginary-residue check; the row marginals equal
/// Tr[ρ P_i] and the column marginals Tr[ℰ(ρ) Q_j].
pub fn mh_distribution(s: &TpsmScenario) -> Result<JointQuasiDistribution> {
    mh_with_kind(s, DistributionKind::Mh)
}

pub(crate) fn mh_with_kind(
    s: &TpsmScenario,
    kind: DistributionKind,
) -> Result<JointQuasiDistribution> {
    let tol = s.tolerances();
    let mut values = Vec::with_capacity(s.pvm_a().num_outcomes() * s.pvm_b().num_outcomes());
    for p in s.pvm_a().projectors() {
        let sym = anticommutator(s.rho().matrix(), p.matrix())?.scale(0.5);
        let evolved = s.channel().apply(&sym)?;
        for q in s.pvm_b().projectors() {
            values.push(trace_real(&evolved, q.matrix(), tol)?);
        }
    }
    JointQuasiDistribution::finalize(
        kind,
        s.pvm_a().labels().to_vec(),
        s.pvm_b().labels().to_vec(),
        values,
        tol,
    )
}

/// Disturbance term D(i, j) = ½ Tr[ℰ(ρ − ρ_i) Q_j] with
/// ρ_i = P_i ρ P_i + (𝟙 − P_i) ρ (𝟙 − P_i). Also evaluated through the
/// measurable form ½(⟨Q_j⟩_{ℰ(ρ_i)} − ⟨Q_j⟩_{ℰ(ρ)}); the two routes must
/// agree to 1e−12.
pub fn disturbance_term(s: &TpsmScenario) -> Result<JointQuasiDistribution> {
    let tol = s.tolerances();
    let dim = s.dim_a();
    let identity = ComplexMatrix::identity(dim);
    let evolved_rho = s.channel().apply(s.rho().matrix())?;
    let mut values = Vec::with_capacity(s.pvm_a().num_outcomes() * s.pvm_b().num_outcomes());
    for p in s.pvm_a().projectors() {
        let comp = &identity - p.matrix();
        let rho_i = &(&(p.matrix() * s.rho().matrix()) * p.matrix())
            + &(&(&comp * s.rho().matrix()) * &comp);
        let direct = s.channel().apply(&(s.rho().matrix() - &rho_i))?;
        let evolved_rho_i = s.channel().apply(&rho_i)?;
        for q in s.pvm_b().projectors() {
            let d_direct = 0.5 * trace_real(&direct, q.matrix(), tol)?;
            let d_measurable = 0.5 * (&(&evolved_rho - &evolved_rho_i) * q.matrix()).trace().re;
            // sign: ⟨Q⟩_{ℰ(ρ)} − ⟨Q⟩_{ℰ(ρ_i)} matches ℰ(ρ − ρ_i)
            if (d_direct - d_measurable).abs() > 1e-12 {
                return Err(Error::InvariantViolation(format!(
                    "disturbance routes disagree by {:.3e}",
                    (d_direct - d_measurable).abs()
                )));
            }
            values.push(d_direct);
        }
    }
    JointQuasiDistribution::finalize(
        DistributionKind::Disturbance,
        s.pvm_a().labels().to_vec(),
        s.pvm_b().labels().to_vec(),
        values,
        tol,
    )
}

/// Born-rule evaluation Tr[ϱ (P_i ⊗ Q_j)] of a bipartite operator against the
/// scenario's measurements. When ϱ is the state over time of (ρ, ℰ) this
/// reproduces the Margenau-Hill table.
pub fn born_evaluate(s: &TpsmScenario, sot: &StateOverTime) -> Result<JointQuasiDistribution> {
    let tol = s.tolerances();
    if sot.idx().dim_a() != s.dim_a() || sot.idx().dim_b() != s.dim_b() {
        return Err(Error::DimensionMismatch(format!(
            "state over time is {}x{} bipartite, scenario is {}x{}",
            sot.idx().dim_a(),
            sot.idx().dim_b(),
            s.dim_a(),
            s.dim_b()
        )));
    }
    let mut values = Vec::with_capacity(s.pvm_a().num_outcomes() * s.pvm_b().num_outcomes());
    for p in s.pvm_a().projectors() {
        for q in s.pvm_b().projectors() {
            let observable = tensor(p.matrix(), q.matrix());
            values.push(trace_real(sot.matrix(), &observable, tol)?);
        }
    }
    JointQuasiDistribution::finalize(
        DistributionKind::Mh,
        s.pvm_a().labels().to_vec(),
        s.pvm_b().labels().to_vec(),
        values,
        tol,
    )
}

/// An ordered partition of row outcomes: each group is (new label, members).
pub type RowPartition = [(String, Vec<String>)];

fn group_indices(row_labels: &[String], partition: &RowPartition) -> Result<Vec<Vec<usize>>> {
    let mut used = vec![false; row_labels.len()];
    let mut groups = Vec::with_capacity(partition.len());
    for (name, members) in partition {
        if members.is_empty() {
            return Err(Error::InvalidPartition(format!("group '{name}' is empty")));
        }
        let mut idxs = Vec::with_capacity(members.len());
        for member in members {
            let pos = row_labels.iter().position(|l| l == member).ok_or_else(|| {
                Error::InvalidPartition(format!("unknown outcome label '{member}'"))
            })?;
            if used[pos] {
                return Err(Error::InvalidPartition(format!(
                    "outcome label '{member}' appears twice"
                )));
            }
            used[pos] = true;
            idxs.push(pos);
        }
        groups.push(idxs);
    }
    if let Some(missing) = used.iter().position(|&u| !u) {
        return Err(Error::InvalidPartition(format!(
            "outcome label '{}' not covered by the partition",
            row_labels[missing]
        )));
    }
    Ok(groups)
}

/// Merge rows of a distribution according to a partition of its row labels.
pub fn coarse_grain(
    d: &JointQuasiDistribution,
    partition: &RowPartition,
) -> Result<JointQuasiDistribution> {
    let groups = group_indices(d.row_labels(), partition)?;
    let cols = d.num_cols();
    let mut values = Vec::with_capacity(groups.len() * cols);
    for idxs in &groups {
        for j in 0..cols {
            values.push(idxs.iter().map(|&i| d.get(i, j)).sum());
        }
    }
    Ok(JointQuasiDistribution {
        kind: d.kind(),
        row_labels: partition.iter().map(|(n, _)| n.clone()).collect(),
        col_labels: d.col_labels().to_vec(),
        values,
    })
}

/// Merge outcomes of the first measurement by summing projectors; the result
/// is again a valid scenario.
pub fn coarse_grain_scenario(s: &TpsmScenario, partition: &RowPartition) -> Result<TpsmScenario> {
    let groups = group_indices(s.pvm_a().labels(), partition)?;
    let dim = s.dim_a();
    let mut projectors = Vec::with_capacity(groups.len());
    for idxs in &groups {
        let mut acc = ComplexMatrix::zeros(dim, dim);
        for &i in idxs {
            acc = &acc + s.pvm_a().projector(i).matrix();
        }
        projectors.push(HermitianOperator::symmetrize(acc));
    }
    let labels = partition.iter().map(|(n, _)| n.clone()).collect();
    let pvm = ProjectiveMeasurement::with_tolerances(projectors, Some(labels), s.tolerances())?;
    TpsmScenario::with_tolerances(
        s.rho().clone(),
        pvm,
        s.channel().clone(),
        s.pvm_b().clone(),
        s.tolerances().clone(),
    )
}

/// Both routes through a coarse-graining: merging the rows of the computed
/// table versus recomputing the table for the merged scenario. The two agree
/// for the Margenau-Hill distribution and generically differ for the
/// projective-update distribution.
#[derive(Debug, Clone)]
pub struct CoarseGrainComparison {
    pub merged_distribution: JointQuasiDistribution,
    pub recomputed_distribution: JointQuasiDistribution,
    pub max_abs_difference: f64,
}

pub fn coarse_grain_compare(
    s: &TpsmScenario,
    partition: &RowPartition,
    kind: DistributionKind,
) -> Result<CoarseGrainComparison> {
    let table = match kind {
        DistributionKind::Lvn => lvn_distribution(s)?,
        DistributionKind::Mh => mh_distribution(s)?,
        other => {
            return Err(Error::InvalidParameter(format!(
                "coarse-grain comparison is defined for LVN and MH tables, got {other:?}"
            )))
        }
    };
    let merged_distribution = coarse_grain(&table, partition)?;
    let merged_scenario = coarse_grain_scenario(s, partition)?;
    let recomputed_distribution = match kind {
        DistributionKind::Lvn => lvn_distribution(&merged_scenario)?,
        DistributionKind::Mh => mh_distribution(&merged_scenario)?,
        _ => unreachable!(),
    };
    let max_abs_difference = merged_distribution.max_abs_diff(&recomputed_distribution);
    Ok(CoarseGrainComparison {
        merged_distribution,
        recomputed_distribution,
        max_abs_difference,
    })
}

/// Two-time expectation value of 𝒪_A = P₁ − P₂ followed by `ob`, for a
/// scenario whose first measurement is binary:
/// Tr[ℰ(P₁ρP₁) 𝒪_B] − Tr[ℰ(P₂ρP₂) 𝒪_B].
pub fn two_time_expectation(s: &TpsmScenario, ob: &HermitianOperator) -> Result<f64> {
    if s.pvm_a().num_outcomes() != 2 {
        return Err(Error::InvalidMeasurement(format!(
            "two-time expectation requires a binary first measurement, got {} outcomes",
            s.pvm_a().num_outcomes()
        )));
    }
    if ob.dim() != s.dim_b() {
        return Err(Error::DimensionMismatch(format!(
            "observable dimension {} does not match output dimension {}",
            ob.dim(),
            s.dim_b()
        )));
    }
    let mut terms = [0.0; 2];
    for (k, term) in terms.iter_mut().enumerate() {
        let p = s.pvm_a().projector(k);
        let updated = &(p.matrix() * s.rho().matrix()) * p.matrix();
        let evolved = s.channel().apply(&updated)?;
        *term = (&evolved * ob.matrix()).trace().re;
    }
    Ok(terms[0] - terms[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{pauli_z, Complex64};
    use crate::sot::state_over_time;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn plus_minus_pvm() -> ProjectiveMeasurement {
        let plus = HermitianOperator::new(
            ComplexMatrix::ket_projector(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap(),
        )
        .unwrap();
        ProjectiveMeasurement::binary(&plus).unwrap()
    }

    fn textbook_scenario() -> TpsmScenario {
        // ρ = |0⟩⟨0|, ℰ = id, first measurement {|+⟩⟨+|, |−⟩⟨−|}, second
        // measurement computational.
        TpsmScenario::new(
            DensityOperator::pure(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap(),
            plus_minus_pvm(),
            QuantumChannel::identity(2).unwrap(),
            ProjectiveMeasurement::computational(2).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn textbook_values() {
        let s = textbook_scenario();
        let p = lvn_distribution(&s).unwrap();
        let q = mh_distribution(&s).unwrap();
        let d = disturbance_term(&s).unwrap();
        assert!((p.get(0, 0) - 0.25).abs() < 1e-14);
        assert!((q.get(0, 0) - 0.5).abs() < 1e-14);
        assert!((d.get(0, 0) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn commuting_first_measurement_gives_delta_table() {
        let rho = DensityOperator::diagonal(&[0.7, 0.3]).unwrap();
        let s = TpsmScenario::new(
            rho,
            ProjectiveMeasurement::computational(2).unwrap(),
            QuantumChannel::identity(2).unwrap(),
            ProjectiveMeasurement::computational(2).unwrap(),
        )
        .unwrap();
        let p = lvn_distribution(&s).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let expected = if i == j { [0.7, 0.3][i] } else { 0.0 };
                assert!((p.get(i, j) - expected).abs() < 1e-14);
            }
        }
        // commuting case: D ≡ 0 and Q = P
        let d = disturbance_term(&s).unwrap();
        assert!(d.max_abs_entry() < 1e-14);
    }

    #[test]
    fn discard_and_prepare_factorizes() {
        let rho = DensityOperator::diagonal(&[0.6, 0.4]).unwrap();
        let sigma = DensityOperator::diagonal(&[0.5, 0.25, 0.25]).unwrap();
        let s = TpsmScenario::new(
            rho.clone(),
            plus_minus_pvm(),
            QuantumChannel::discard_and_prepare(2, &sigma).unwrap(),
            ProjectiveMeasurement::computational(3).unwrap(),
        )
        .unwrap();
        let p = lvn_distribution(&s).unwrap();
        for i in 0..2 {
            for j in 0..3 {
                let expected = rho.expectation(s.pvm_a().projector(i).matrix())
                    * sigma.expectation(s.pvm_b().projector(j).matrix());
                assert!((p.get(i, j) - expected).abs() < 1e-13);
            }
        }
        let d = disturbance_term(&s).unwrap();
        assert!(d.max_abs_entry() < 1e-13);
    }

    #[test]
    fn maximally_mixed_input_matches_projective_update() {
        let s = TpsmScenario::new(
            DensityOperator::maximally_mixed(2).unwrap(),
            plus_minus_pvm(),
            QuantumChannel::erasure(0.3).unwrap(),
            ProjectiveMeasurement::computational(3).unwrap(),
        )
        .unwrap();
        let p = lvn_distribution(&s).unwrap();
        let q = mh_distribution(&s).unwrap();
        assert!(q.max_abs_diff(&p) < 1e-13);

        // maximally mixed identity case: Q(i, j) = δ_ij/2 for matched bases
        let s2 = TpsmScenario::new(
            DensityOperator::maximally_mixed(2).unwrap(),
            ProjectiveMeasurement::computational(2).unwrap(),
            QuantumChannel::identity(2).unwrap(),
            ProjectiveMeasurement::computational(2).unwrap(),
        )
        .unwrap();
        let q2 = mh_distribution(&s2).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let expected = if i == j { 0.5 } else { 0.0 };
                assert!((q2.get(i, j) - expected).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn born_matches_mh_on_textbook_scenario() {
        let s = textbook_scenario();
        let sot = state_over_time(s.rho(), s.channel()).unwrap();
        let born = born_evaluate(&s, &sot).unwrap();
        let q = mh_distribution(&s).unwrap();
        assert!(born.max_abs_diff(&q) < 1e-13);
    }

    #[test]
    fn born_evaluate_rejects_mismatched_operator() {
        let s = textbook_scenario();
        let rho3 = DensityOperator::maximally_mixed(3).unwrap();
        let e3 = QuantumChannel::identity(3).unwrap();
        let wrong = state_over_time(&rho3, &e3).unwrap();
        assert!(matches!(
            born_evaluate(&s, &wrong),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn marginal_laws() {
        let s = textbook_scenario();
        let q = mh_distribution(&s).unwrap();
        let rows = q.row_marginals();
        for (i, &m) in rows.iter().enumerate() {
            let expected = s.rho().expectation(s.pvm_a().projector(i).matrix());
            assert!((m - expected).abs() < 1e-13);
        }
        let evolved = s.channel().apply(s.rho().matrix()).unwrap();
        for (j, &m) in q.col_marginals().iter().enumerate() {
            let expected = (&evolved * s.pvm_b().projector(j).matrix()).trace().re;
            assert!((m - expected).abs() < 1e-13);
        }
        // LVN row marginal obeys the same law
        let p = lvn_distribution(&s).unwrap();
        for (i, &m) in p.row_marginals().iter().enumerate() {
            let expected = s.rho().expectation(s.pvm_a().projector(i).matrix());
            assert!((m - expected).abs() < 1e-13);
        }
    }

    #[test]
    fn qutrit_coarse_grain_witness() {
        // ψ ∝ (1, 1, 0), rank-1 computational first measurement, identity
        // channel, second measurement onto (|0⟩+|1⟩)/√2: merging outcomes
        // {0, 1} shifts the projective-update table by 1/2.
        let psi = [c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)];
        let rho = DensityOperator::pure(&psi).unwrap();
        let plus01 = HermitianOperator::new(
            ComplexMatrix::ket_projector(&[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap(),
        )
        .unwrap();
        let s = TpsmScenario::new(
            rho,
            ProjectiveMeasurement::computational(3).unwrap(),
            QuantumChannel::identity(3).unwrap(),
            ProjectiveMeasurement::binary(&plus01).unwrap(),
        )
        .unwrap();
        let partition = vec![
            ("01".to_string(), vec!["0".to_string(), "1".to_string()]),
            ("2".to_string(), vec!["2".to_string()]),
        ];
        let lvn_cmp = coarse_grain_compare(&s, &partition, DistributionKind::Lvn).unwrap();
        assert!(
            lvn_cmp.max_abs_difference >= 0.1,
            "expected additivity violation, got {}",
            lvn_cmp.max_abs_difference
        );
        assert!((lvn_cmp.max_abs_difference - 0.5).abs() < 1e-12);

        let mh_cmp = coarse_grain_compare(&s, &partition, DistributionKind::Mh).unwrap();
        assert!(mh_cmp.max_abs_difference < 1e-12);
    }

    #[test]
    fn full_coarse_graining_gives_column_marginals() {
        let s = textbook_scenario();
        let q = mh_distribution(&s).unwrap();
        let partition = vec![("all".to_string(), s.pvm_a().labels().to_vec())];
        let merged = coarse_grain(&q, &partition).unwrap();
        let evolved = s.channel().apply(s.rho().matrix()).unwrap();
        for j in 0..merged.num_cols() {
            let expected = (&evolved * s.pvm_b().projector(j).matrix()).trace().re;
            assert!((merged.get(0, j) - expected).abs() < 1e-13);
        }
    }

    #[test]
    fn invalid_partitions_are_rejected() {
        let s = textbook_scenario();
        let q = mh_distribution(&s).unwrap();
        let missing = vec![("a".to_string(), vec!["0".to_string()])];
        assert!(matches!(
            coarse_grain(&q, &missing),
            Err(Error::InvalidPartition(_))
        ));
        let duplicated = vec![
            ("a".to_string(), vec!["0".to_string(), "0".to_string()]),
            ("b".to_string(), vec!["1".to_string()]),
        ];
        assert!(matches!(
            coarse_grain(&q, &duplicated),
            Err(Error::InvalidPartition(_))
        ));
    }

    #[test]
    fn two_time_expectation_examples() {
        // 𝒪_B = 𝟙 reduces to Tr[ρP₁] − Tr[ρP₂]
        let s = textbook_scenario();
        let identity = HermitianOperator::new(ComplexMatrix::identity(2)).unwrap();
        let got = two_time_expectation(&s, &identity).unwrap();
        assert!(got.abs() < 1e-14); // ⟨+|0⟩ and ⟨−|0⟩ weights are equal

        // ρ = 𝟙/2, ℰ = id, 𝒪_A = Z, 𝒪_B = Z gives 1
        let s2 = TpsmScenario::new(
            DensityOperator::maximally_mixed(2).unwrap(),
            ProjectiveMeasurement::computational(2).unwrap(),
            QuantumChannel::identity(2).unwrap(),
            ProjectiveMeasurement::computational(2).unwrap(),
        )
        .unwrap();
        let z = HermitianOperator::new(pauli_z()).unwrap();
        assert!((two_time_expectation(&s2, &z).unwrap() - 1.0).abs() < 1e-14);

        // non-binary first measurement is rejected
        let s3 = TpsmScenario::new(
            DensityOperator::maximally_mixed(3).unwrap(),
            ProjectiveMeasurement::computational(3).unwrap(),
            QuantumChannel::identity(3).unwrap(),
            ProjectiveMeasurement::computational(3).unwrap(),
        )
        .unwrap();
        let id3 = HermitianOperator::new(ComplexMatrix::identity(3)).unwrap();
        assert!(two_time_expectation(&s3, &id3).is_err());
    }
}
