//! CPTP channels in Kraus form, with cached Choi and Jamiołkowski operators
//! and named constructors.
//!
//! Conventions, fixed globally in the computational basis of the input space:
//!   Choi        `C[ℰ] = Σ_ij |i⟩⟨j| ⊗ ℰ(|i⟩⟨j|)`
//!   Jamiołkowski `J[ℰ] = Σ_ij |i⟩⟨j| ⊗ ℰ(|j⟩⟨i|)`
//! so that Tr[J (a⊗b)] = Tr[ℰ(a) b], and J is the partial transpose of C on
//! the first factor. Both are built independently at construction and
//! cross-checked entrywise.

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::hermitian::{jacobi_hermitian, HermitianOperator};
use crate::matrix::{
    partial_trace, partial_transpose, BipartiteIndex, Complex64, ComplexMatrix, Subsystem,
};
use crate::states::DensityOperator;

/// Bipartite operator on in ⊗ out encoding a channel through the duality
/// Tr[J (a⊗b)] = Tr[ℰ(a) b].
#[derive(Debug, Clone, PartialEq)]
pub struct JamiolkowskiOperator {
    idx: BipartiteIndex,
    matrix: ComplexMatrix,
}

impl JamiolkowskiOperator {
    pub fn idx(&self) -> BipartiteIndex {
        self.idx
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

/// A completely positive trace-preserving map in Kraus form.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
    choi: ComplexMatrix,
    jamiolkowski: JamiolkowskiOperator,
    choi_min_eigenvalue: f64,
}

impl QuantumChannel {
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        Self::with_tolerances(kraus, &Tolerances::default())
    }

    pub fn with_tolerances(kraus: Vec<ComplexMatrix>, tol: &Tolerances) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidParameter(
                "channel needs at least one Kraus operator".into(),
            ));
        }
        let dim_out = kraus[0].rows();
        let dim_in = kraus[0].cols();
        if kraus
            .iter()
            .any(|k| k.rows() != dim_out || k.cols() != dim_in)
        {
            return Err(Error::DimensionMismatch(
                "Kraus operators have mixed shapes".into(),
            ));
        }

        let mut ktk = ComplexMatrix::zeros(dim_in, dim_in);
        for k in &kraus {
            ktk = &ktk + &(&k.dagger() * k);
        }
        let tp_residual = ktk.max_abs_diff(&ComplexMatrix::identity(dim_in));
        if tp_residual > tol.trace_preserving {
            return Err(Error::NotTracePreserving {
                residual: tp_residual,
            });
        }

        // Choi from vectorized Kraus operators: C = Σ_k vec(K) vec(K)†
        // with vec(K)[(i, m)] = K[m, i].
        let joint = dim_in * dim_out;
        let mut choi = ComplexMatrix::zeros(joint, joint);
        for k in &kraus {
            let vec_k: Vec<Complex64> = (0..dim_in)
                .flat_map(|i| (0..dim_out).map(move |m| k[(m, i)]))
                .collect();
            for r in 0..joint {
                for s in 0..joint {
                    choi[(r, s)] += vec_k[r] * vec_k[s].conj();
                }
            }
        }
        let choi = choi.hermitized();
        let choi_min = jacobi_hermitian(&choi)?.min_eigenvalue();
        if choi_min < -tol.completely_positive {
            return Err(Error::NotCompletelyPositive {
                min_choi_eigenvalue: choi_min,
            });
        }

        let idx = BipartiteIndex::new(dim_in, dim_out)?;

        // Jamiołkowski built independently from the definition, then checked
        // against the partial transpose of the Choi operator.
        let mut jam = ComplexMatrix::zeros(joint, joint);
        for i in 0..dim_in {
            for j in 0..dim_in {
                let mapped = apply_kraus(&kraus, &ComplexMatrix::unit(dim_in, j, i));
                for m in 0..dim_out {
                    for n in 0..dim_out {
                        jam[(i * dim_out + m, j * dim_out + n)] += mapped[(m, n)];
                    }
                }
            }
        }
        let jam = jam.hermitized();
        let pt = partial_transpose(&choi, idx, Subsystem::A)?;
        let duality_defect = jam.max_abs_diff(&pt);
        if duality_defect > 1e-12 {
            return Err(Error::InvariantViolation(format!(
                "Jamiolkowski/Choi duality defect {duality_defect:.3e}"
            )));
        }
        let marginal = partial_trace(&jam, idx, Subsystem::B)?;
        let marginal_defect = marginal.max_abs_diff(&ComplexMatrix::identity(dim_in));
        if marginal_defect > tol.trace_preserving {
            return Err(Error::NotTracePreserving {
                residual: marginal_defect,
            });
        }

        Ok(Self {
            dim_in,
            dim_out,
            kraus,
            choi,
            jamiolkowski: JamiolkowskiOperator { idx, matrix: jam },
            choi_min_eigenvalue: choi_min,
        })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn choi(&self) -> &ComplexMatrix {
        &self.choi
    }

    pub fn jamiolkowski(&self) -> &JamiolkowskiOperator {
        &self.jamiolkowski
    }

    pub fn choi_min_eigenvalue(&self) -> f64 {
        self.choi_min_eigenvalue
    }

    /// ℰ(x) = Σ_k K x K†.
    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if !x.is_square() || x.rows() != self.dim_in {
            return Err(Error::DimensionMismatch(format!(
                "channel input must be {0}x{0}, got {1}x{2}",
                self.dim_in,
                x.rows(),
                x.cols()
            )));
        }
        Ok(apply_kraus(&self.kraus, x))
    }

    /// Channel action on a state, revalidated as a state.
    pub fn apply_state(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        let out = self.apply(rho.matrix())?;
        // CPTP output is a state up to floating-point noise; symmetrize and
        // accept a slightly widened PSD tolerance.
        let relaxed = Tolerances {
            unit_trace: 1e-10,
            psd: 1e-10,
            ..Tolerances::default()
        };
        DensityOperator::from_matrix_with(out.hermitized(), &relaxed)
    }

    /// Hilbert-Schmidt adjoint action ℰ*(y) = Σ_k K† y K; unital, and dual to
    /// `apply` under Tr[ℰ(x)† y] = Tr[x† ℰ*(y)].
    pub fn adjoint_apply(&self, y: &ComplexMatrix) -> Result<ComplexMatrix> {
        if !y.is_square() || y.rows() != self.dim_out {
            return Err(Error::DimensionMismatch(format!(
                "adjoint input must be {0}x{0}, got {1}x{2}",
                self.dim_out,
                y.rows(),
                y.cols()
            )));
        }
        let mut acc = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            acc = &acc + &(&(&k.dagger() * y) * k);
        }
        Ok(acc)
    }

    /// Identity channel on `dim`.
    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(vec![ComplexMatrix::identity(dim)])
    }

    /// Conjugation x ↦ U x U† by a unitary.
    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        let gram = &u.dagger() * &u;
        let defect = gram.max_abs_diff(&ComplexMatrix::identity(u.cols()));
        if defect > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "matrix is not unitary: ‖U†U − 𝟙‖ = {defect:.3e}"
            )));
        }
        Self::new(vec![u])
    }

    /// Constant channel `a ↦ Tr[a]·σ`.
    pub fn discard_and_prepare(dim_in: usize, sigma: &DensityOperator) -> Result<Self> {
        if dim_in == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        let eig = sigma.eig()?;
        let dim_out = sigma.dim();
        let mut kraus = Vec::new();
        for (k, &s) in eig.eigenvalues.iter().enumerate() {
            if s <= 1e-12 {
                continue;
            }
            let v = eig.eigenvector(k);
            for i in 0..dim_in {
                let mut op = ComplexMatrix::zeros(dim_out, dim_in);
                for (m, &vm) in v.iter().enumerate() {
                    op[(m, i)] = vm * s.sqrt();
                }
                kraus.push(op);
            }
        }
        Self::new(kraus)
    }

    /// The qubit erasure channel `ℰ(ω) = (1−λ)ω + λ Tr[ω]|2⟩⟨2|`, a 2 → 3 map
    /// with the qubit embedded in the first two levels.
    pub fn erasure(lambda: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&lambda) || lambda == 0.0 {
            return Err(Error::InvalidParameter(format!(
                "erasure parameter must lie in (0, 1), got {lambda}"
            )));
        }
        let mut embed = ComplexMatrix::zeros(3, 2);
        embed[(0, 0)] = Complex64::new(1.0, 0.0);
        embed[(1, 1)] = Complex64::new(1.0, 0.0);
        let mut k1 = ComplexMatrix::zeros(3, 2);
        k1[(2, 0)] = Complex64::new(lambda.sqrt(), 0.0);
        let mut k2 = ComplexMatrix::zeros(3, 2);
        k2[(2, 1)] = Complex64::new(lambda.sqrt(), 0.0);
        Self::new(vec![embed.scale((1.0 - lambda).sqrt()), k1, k2])
    }

    /// The closed-form Bayesian inverse of the erasure channel with respect
    /// to ρ = diag(p, 1−p): identity on the embedded qubit block, |2⟩⟨2| ↦ ρ,
    /// cross blocks annihilated. A 3 → 2 map; λ only validates the pairing.
    pub fn erasure_bayesian_inverse(lambda: f64, p: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&lambda) || lambda == 0.0 {
            return Err(Error::InvalidParameter(format!(
                "erasure parameter must lie in (0, 1), got {lambda}"
            )));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "population p must lie in [0, 1], got {p}"
            )));
        }
        let mut unembed = ComplexMatrix::zeros(2, 3);
        unembed[(0, 0)] = Complex64::new(1.0, 0.0);
        unembed[(1, 1)] = Complex64::new(1.0, 0.0);
        let mut k1 = ComplexMatrix::zeros(2, 3);
        k1[(0, 2)] = Complex64::new(p.sqrt(), 0.0);
        let mut k2 = ComplexMatrix::zeros(2, 3);
        k2[(1, 2)] = Complex64::new((1.0 - p).sqrt(), 0.0);
        Self::new(vec![unembed, k1, k2])
    }

    /// Rebuild a channel from its Choi operator. Eigenvalues at or below
    /// 1e−12 are truncated when extracting Kraus operators.
    pub fn from_choi(
        choi: &ComplexMatrix,
        dim_in: usize,
        dim_out: usize,
        tol: &Tolerances,
    ) -> Result<Self> {
        let idx = BipartiteIndex::new(dim_in, dim_out)?;
        if !choi.is_square() || choi.rows() != idx.joint_dim() {
            return Err(Error::DimensionMismatch(format!(
                "Choi operator must be {0}x{0}, got {1}x{2}",
                idx.joint_dim(),
                choi.rows(),
                choi.cols()
            )));
        }
        let herm = HermitianOperator::with_tolerances(choi.clone(), tol)?;
        let eig = herm.eig()?;
        if eig.min_eigenvalue() < -tol.completely_positive {
            return Err(Error::NotCompletelyPositive {
                min_choi_eigenvalue: eig.min_eigenvalue(),
            });
        }
        let marginal = partial_trace(herm.matrix(), idx, Subsystem::B)?;
        let tp_residual = marginal.max_abs_diff(&ComplexMatrix::identity(dim_in));
        if tp_residual > tol.trace_preserving {
            return Err(Error::NotTracePreserving {
                residual: tp_residual,
            });
        }
        let mut kraus = Vec::new();
        for (k, &l) in eig.eigenvalues.iter().enumerate() {
            if l <= 1e-12 {
                continue;
            }
            let v = eig.eigenvector(k);
            let mut op = ComplexMatrix::zeros(dim_out, dim_in);
            for i in 0..dim_in {
                for m in 0..dim_out {
                    op[(m, i)] = v[i * dim_out + m] * l.sqrt();
                }
            }
            kraus.push(op);
        }
        if kraus.is_empty() {
            return Err(Error::NotTracePreserving { residual: 1.0 });
        }
        Self::with_tolerances(kraus, tol)
    }

    /// Rebuild a channel from a Jamiołkowski operator (partial transpose of
    /// the Choi operator on the input factor).
    pub fn from_jamiolkowski(
        jam: &ComplexMatrix,
        dim_in: usize,
        dim_out: usize,
        tol: &Tolerances,
    ) -> Result<Self> {
        let idx = BipartiteIndex::new(dim_in, dim_out)?;
        if !jam.is_square() || jam.rows() != idx.joint_dim() {
            return Err(Error::DimensionMismatch(format!(
                "Jamiolkowski operator must be {0}x{0}, got {1}x{2}",
                idx.joint_dim(),
                jam.rows(),
                jam.cols()
            )));
        }
        let choi = partial_transpose(jam, idx, Subsystem::A)?;
        Self::from_choi(&choi, dim_in, dim_out, tol)
    }

    /// If the channel is a discard-and-prepare map `a ↦ Tr[a]·σ` within `tol`,
    /// return the prepared state.
    pub fn is_discard_and_prepare(&self, tol: f64) -> Option<DensityOperator> {
        let jam = self.jamiolkowski.matrix();
        let idx = self.jamiolkowski.idx();
        let sigma_raw = partial_trace(jam, idx, Subsystem::A)
            .ok()?
            .scale(1.0 / self.dim_in as f64);
        let product = crate::matrix::tensor(&ComplexMatrix::identity(self.dim_in), &sigma_raw);
        if jam.max_abs_diff(&product) > tol {
            return None;
        }
        let relaxed = Tolerances {
            psd: tol.max(1e-12),
            unit_trace: tol.max(1e-12),
            hermiticity: tol.max(1e-12),
            ..Tolerances::default()
        };
        DensityOperator::from_matrix_with(sigma_raw.hermitized(), &relaxed).ok()
    }
}

fn apply_kraus(kraus: &[ComplexMatrix], x: &ComplexMatrix) -> ComplexMatrix {
    let dim_out = kraus[0].rows();
    let mut acc = ComplexMatrix::zeros(dim_out, dim_out);
    for k in kraus {
        acc = &acc + &(&(k * x) * &k.dagger());
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{hs_inner, pauli_y, swap_matrix, tensor};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_channel_acts_trivially() {
        let id = QuantumChannel::identity(2).unwrap();
        let x = ComplexMatrix::from_rows(&[
            vec![c(0.3, 0.0), c(0.1, 0.2)],
            vec![c(0.1, -0.2), c(0.7, 0.0)],
        ])
        .unwrap();
        assert!(id.apply(&x).unwrap().approx_eq(&x, 1e-15));
        assert!(id
            .adjoint_apply(&pauli_y())
            .unwrap()
            .approx_eq(&pauli_y(), 1e-15));
    }

    #[test]
    fn rejects_non_trace_preserving_kraus() {
        let k = ComplexMatrix::identity(2).scale(0.5);
        assert!(matches!(
            QuantumChannel::new(vec![k]),
            Err(Error::NotTracePreserving { .. })
        ));
    }

    #[test]
    fn jamiolkowski_of_identity_is_swap() {
        let id = QuantumChannel::identity(2).unwrap();
        assert!(id.jamiolkowski().matrix().approx_eq(&swap_matrix(2), 1e-14));
    }

    #[test]
    fn choi_of_identity_is_maximally_entangled() {
        let id = QuantumChannel::identity(2).unwrap();
        // 2·|Φ+⟩⟨Φ+| = Σ_ij |ii⟩⟨jj|, rank 1
        let mut expected = ComplexMatrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                expected[(i * 2 + i, j * 2 + j)] = c(1.0, 0.0);
            }
        }
        assert!(id.choi().approx_eq(&expected, 1e-14));
    }

    #[test]
    fn erasure_parameters_are_range_checked() {
        assert!(QuantumChannel::erasure(0.0).is_err());
        assert!(QuantumChannel::erasure(1.0).is_err());
        assert!(QuantumChannel::erasure(-0.2).is_err());
        assert!(QuantumChannel::erasure_bayesian_inverse(0.5, 1.5).is_err());
        assert!(QuantumChannel::erasure_bayesian_inverse(1.2, 0.5).is_err());
        assert!(QuantumChannel::erasure_bayesian_inverse(0.5, 0.0).is_ok());
    }

    #[test]
    fn erasure_closed_form_action() {
        let e = QuantumChannel::erasure(0.5).unwrap();
        let out = e.apply(&ComplexMatrix::unit(2, 0, 0)).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[
            vec![0.5, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.5],
        ])
        .unwrap();
        assert!(out.approx_eq(&expected, 1e-15));

        let mixed = ComplexMatrix::identity(2).scale(0.5);
        let out = e.apply(&mixed).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[
            vec![0.25, 0.0, 0.0],
            vec![0.0, 0.25, 0.0],
            vec![0.0, 0.0, 0.5],
        ])
        .unwrap();
        assert!(out.approx_eq(&expected, 1e-15));
    }

    #[test]
    fn erasure_adjoint_closed_form() {
        let lambda = 0.3;
        let e = QuantumChannel::erasure(lambda).unwrap();
        let p22 = ComplexMatrix::unit(3, 2, 2);
        let out = e.adjoint_apply(&p22).unwrap();
        assert!(out.approx_eq(&ComplexMatrix::identity(2).scale(lambda), 1e-15));

        // embedded qubit observable: ℰ*(a ⊕ 0) = (1−λ)a
        let a = pauli_y();
        let mut embedded = ComplexMatrix::zeros(3, 3);
        for i in 0..2 {
            for j in 0..2 {
                embedded[(i, j)] = a[(i, j)];
            }
        }
        let out = e.adjoint_apply(&embedded).unwrap();
        assert!(out.approx_eq(&a.scale(1.0 - lambda), 1e-15));
    }

    #[test]
    fn erasure_inverse_block_action() {
        let f = QuantumChannel::erasure_bayesian_inverse(0.5, 0.5).unwrap();
        let a = ComplexMatrix::unit(3, 0, 0);
        assert!(f
            .apply(&a)
            .unwrap()
            .approx_eq(&ComplexMatrix::unit(2, 0, 0), 1e-15));

        let p22 = ComplexMatrix::unit(3, 2, 2);
        let out = f.apply(&p22).unwrap();
        assert!(out.approx_eq(&ComplexMatrix::identity(2).scale(0.5), 1e-15));
        assert!((out.trace().re - 1.0).abs() < 1e-14);

        // coherences into the erased level are annihilated
        let cross = ComplexMatrix::unit(3, 0, 2);
        assert!(f.apply(&cross).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn discard_and_prepare_constant_action() {
        let sigma = DensityOperator::diagonal(&[0.2, 0.8]).unwrap();
        let dp = QuantumChannel::discard_and_prepare(3, &sigma).unwrap();
        let a =
            ComplexMatrix::from_fn(3, 3, |i, j| c((i + 1) as f64, (j as f64) - 1.0)).hermitized();
        let out = dp.apply(&a).unwrap();
        assert!(out.approx_eq(&sigma.matrix().scale(a.trace().re), 1e-13));

        // Jamiołkowski of discard-and-prepare is 𝟙 ⊗ σ
        let expected = tensor(&ComplexMatrix::identity(3), sigma.matrix());
        assert!(dp.jamiolkowski().matrix().approx_eq(&expected, 1e-13));
        assert!(dp.is_discard_and_prepare(1e-10).is_some());
        assert!(QuantumChannel::identity(2)
            .unwrap()
            .is_discard_and_prepare(1e-10)
            .is_none());
    }

    #[test]
    fn adjoint_duality_on_fixed_pair() {
        let e = QuantumChannel::erasure(0.25).unwrap();
        let x = ComplexMatrix::from_rows(&[
            vec![c(0.5, 0.0), c(0.2, 0.1)],
            vec![c(0.2, -0.1), c(0.5, 0.0)],
        ])
        .unwrap();
        let y = ComplexMatrix::from_fn(3, 3, |i, j| c((i * 3 + j) as f64 * 0.1, 0.0)).hermitized();
        let lhs = hs_inner(&e.apply(&x).unwrap(), &y).unwrap();
        let rhs = hs_inner(&x, &e.adjoint_apply(&y).unwrap()).unwrap();
        assert!((lhs - rhs).norm() < 1e-13);
    }

    #[test]
    fn from_choi_round_trip() {
        let e = QuantumChannel::erasure(0.5).unwrap();
        let rebuilt = QuantumChannel::from_choi(e.choi(), 2, 3, &Tolerances::default()).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let unit = ComplexMatrix::unit(2, i, j);
                let a = e.apply(&unit).unwrap();
                let b = rebuilt.apply(&unit).unwrap();
                assert!(a.approx_eq(&b, 1e-12));
            }
        }
    }

    #[test]
    fn from_choi_rejects_non_cp_and_non_tp() {
        // swap is Hermitian with TP marginal but not PSD: transposition map
        let tol = Tolerances::default();
        assert!(matches!(
            QuantumChannel::from_choi(&swap_matrix(2), 2, 2, &tol),
            Err(Error::NotCompletelyPositive { .. })
        ));
        let half = QuantumChannel::identity(2).unwrap().choi().scale(0.5);
        assert!(matches!(
            QuantumChannel::from_choi(&half, 2, 2, &tol),
            Err(Error::NotTracePreserving { .. })
        ));
    }
}
