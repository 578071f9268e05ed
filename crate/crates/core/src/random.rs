//! Seeded random instances: states, channels, measurements, unitaries.
//! Everything is reproducible bit-for-bit from the seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::channel::QuantumChannel;
use crate::error::{Error, Result};
use crate::hermitian::HermitianOperator;
use crate::matrix::{Complex64, ComplexMatrix};
use crate::states::{DensityOperator, ProjectiveMeasurement};

pub fn rng_from_seed(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Standard normal via Box-Muller.
fn gaussian(rng: &mut ChaCha12Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn gaussian_complex(rng: &mut ChaCha12Rng) -> Complex64 {
    Complex64::new(gaussian(rng), gaussian(rng))
}

pub(crate) fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha12Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian_complex(rng))
}

/// Orthonormalize the columns of `m` in place order by modified Gram-Schmidt,
/// run twice for stability. Requires rows ≥ cols and numerically independent
/// columns.
pub(crate) fn orthonormalize_columns(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (rows, cols) = (m.rows(), m.cols());
    if rows < cols {
        return Err(Error::InvalidParameter(
            "cannot orthonormalize more columns than rows".into(),
        ));
    }
    let mut q = m.clone();
    for j in 0..cols {
        for _pass in 0..2 {
            for k in 0..j {
                let mut dot = Complex64::new(0.0, 0.0);
                for i in 0..rows {
                    dot += q[(i, k)].conj() * q[(i, j)];
                }
                for i in 0..rows {
                    let qik = q[(i, k)];
                    q[(i, j)] -= dot * qik;
                }
            }
        }
        let norm: f64 = (0..rows).map(|i| q[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::InvalidParameter(
                "columns are numerically dependent".into(),
            ));
        }
        for i in 0..rows {
            q[(i, j)] /= norm;
        }
    }
    Ok(q)
}

fn haar_isometry(rows: usize, cols: usize, rng: &mut ChaCha12Rng) -> Result<ComplexMatrix> {
    orthonormalize_columns(&gaussian_matrix(rows, cols, rng))
}

/// Haar-random unitary of the given dimension.
pub fn random_unitary(dim: usize, seed: u64) -> Result<ComplexMatrix> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    haar_isometry(dim, dim, &mut rng_from_seed(seed))
}

/// Random state of the given rank from a normalized Wishart matrix GG†/Tr.
pub fn random_state(dim: usize, rank: usize, seed: u64) -> Result<DensityOperator> {
    if dim == 0 || rank == 0 || rank > dim {
        return Err(Error::InvalidParameter(format!(
            "infeasible state parameters: dim {dim}, rank {rank}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let g = gaussian_matrix(dim, rank, &mut rng);
    let w = &g * &g.dagger();
    let trace = w.trace().re;
    DensityOperator::from_matrix(w.scale(1.0 / trace).hermitized())
}

/// Random channel via a Haar-random Stinespring isometry
/// W: 𝓗_in → 𝓗_env ⊗ 𝓗_out with an environment of dimension `kraus_rank`;
/// Kraus operators are the environment slices of W.
pub fn random_channel(
    dim_in: usize,
    dim_out: usize,
    kraus_rank: usize,
    seed: u64,
) -> Result<QuantumChannel> {
    if dim_in == 0 || dim_out == 0 || kraus_rank == 0 {
        return Err(Error::InvalidParameter(
            "channel dimensions must be positive".into(),
        ));
    }
    if dim_out * kraus_rank < dim_in {
        return Err(Error::InvalidParameter(format!(
            "infeasible channel parameters: dim_out·kraus_rank = {} < dim_in = {}",
            dim_out * kraus_rank,
            dim_in
        )));
    }
    let mut rng = rng_from_seed(seed);
    let w = haar_isometry(dim_out * kraus_rank, dim_in, &mut rng)?;
    let kraus = (0..kraus_rank)
        .map(|e| ComplexMatrix::from_fn(dim_out, dim_in, |m, i| w[(e * dim_out + m, i)]))
        .collect();
    QuantumChannel::new(kraus)
}

/// Random projective measurement from a Haar-random unitary: columns are
/// grouped into `num_outcomes` consecutive blocks of near-equal size (the
/// first dim mod num_outcomes blocks take one extra column).
pub fn random_pvm(dim: usize, num_outcomes: usize, seed: u64) -> Result<ProjectiveMeasurement> {
    if dim == 0 || num_outcomes == 0 || num_outcomes > dim {
        return Err(Error::InvalidParameter(format!(
            "infeasible measurement parameters: dim {dim}, outcomes {num_outcomes}"
        )));
    }
    let u = random_unitary(dim, seed)?;
    let base = dim / num_outcomes;
    let extra = dim % num_outcomes;
    let mut projectors = Vec::with_capacity(num_outcomes);
    let mut col = 0;
    for g in 0..num_outcomes {
        let size = base + usize::from(g < extra);
        let mut p = ComplexMatrix::zeros(dim, dim);
        for c in col..col + size {
            for i in 0..dim {
                for j in 0..dim {
                    p[(i, j)] += u[(i, c)] * u[(j, c)].conj();
                }
            }
        }
        col += size;
        projectors.push(HermitianOperator::symmetrize(p));
    }
    ProjectiveMeasurement::new(projectors, None)
}
