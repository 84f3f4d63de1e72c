//! Synthetic Tucker-model tensors, the masking/noise observation process,
//! and the scaled recovery-error metric.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TenrecError};
use crate::tensor::{DenseMatrix, DenseTensor, ObservationMask};

/// Shape, per-mode Tucker ranks, and the seed for the generator streams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuckerSpec {
    pub shape: Vec<usize>,
    pub ranks: Vec<usize>,
    pub seed: u64,
}

/// Missing rate, noise level, and the seed for the observation streams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSpec {
    pub missing_rate: f64,
    pub sigma_n: f64,
    pub seed: u64,
}

impl TuckerSpec {
    pub fn validate(&self) -> Result<()> {
        if self.shape.len() < 2 || self.shape.iter().any(|&n| n == 0) {
            return Err(TenrecError::InvalidShape(format!("{:?}", self.shape)));
        }
        if self.ranks.len() != self.shape.len() {
            return Err(TenrecError::InvalidParameter(format!(
                "{} ranks for order-{} shape",
                self.ranks.len(),
                self.shape.len()
            )));
        }
        for (&r, &n) in self.ranks.iter().zip(&self.shape) {
            if r < 1 || r > n {
                return Err(TenrecError::InvalidParameter(format!(
                    "rank {r} outside 1..={n}"
                )));
            }
        }
        Ok(())
    }
}

impl ObservationSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.missing_rate) {
            return Err(TenrecError::InvalidParameter(format!(
                "missing rate must lie in [0, 1), got {}",
                self.missing_rate
            )));
        }
        if self.sigma_n < 0.0 || !self.sigma_n.is_finite() {
            return Err(TenrecError::InvalidParameter(format!(
                "sigma_n must be finite and nonnegative, got {}",
                self.sigma_n
            )));
        }
        Ok(())
    }
}

// Separate substreams per role so that, e.g., changing sigma_n can never
// perturb which entries are observed.
const STREAM_CORE: u64 = 1;
const STREAM_FACTORS: u64 = 2;
const STREAM_MASK: u64 = 3;
const STREAM_NOISE: u64 = 4;

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws a Tucker-model tensor: core entries uniform on [0, 1], factor
/// entries uniform on [-0.5, 0.5], then a pure rescaling so that
/// `max(X) - min(X) = 1`. Every mode unfolding has rank at most the
/// spec's rank for that mode.
pub fn generate_tucker(spec: &TuckerSpec) -> Result<DenseTensor> {
    spec.validate()?;
    let mut core_rng = stream_rng(spec.seed, STREAM_CORE);
    let core_len: usize = spec.ranks.iter().product();
    let core = DenseTensor::new(
        spec.ranks.clone(),
        (0..core_len).map(|_| core_rng.random::<f64>()).collect(),
    )?;

    let mut factor_rng = stream_rng(spec.seed, STREAM_FACTORS);
    let mut x = core;
    // multiply mode-by-mode: X = S x_1 U_1 x_2 U_2 ... x_N U_N
    for (mode, (&n, &r)) in spec.shape.iter().zip(&spec.ranks).enumerate() {
        let factor = DenseMatrix::new(
            n,
            r,
            (0..n * r).map(|_| factor_rng.random::<f64>() - 0.5).collect(),
        )?;
        let unfolded = x.unfold(mode + 1)?;
        let product = factor.matmul(&unfolded)?;
        let mut new_shape = x.shape().to_vec();
        new_shape[mode] = n;
        x = product.fold(mode + 1, &new_shape)?;
    }

    // scale only: a shift would add a rank-one term to every unfolding
    let max = x.data().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = x.data().iter().cloned().fold(f64::INFINITY, f64::min);
    let range = max - min;
    if range > 0.0 {
        x = x.scale(1.0 / range);
    }
    Ok(x)
}

/// Applies the observation model: draw `round((1 - missing_rate) * total)`
/// observed positions uniformly without replacement, add Gaussian noise of
/// the given standard deviation, zero everything outside the mask.
pub fn observe(
    x_org: &DenseTensor,
    spec: &ObservationSpec,
) -> Result<(DenseTensor, ObservationMask)> {
    spec.validate()?;
    let total = x_org.len();
    let keep = ((1.0 - spec.missing_rate) * total as f64).round() as usize;
    if keep == 0 {
        return Err(TenrecError::EmptyMask);
    }

    // partial Fisher-Yates: the first `keep` slots of a virtual shuffle
    let mut mask_rng = stream_rng(spec.seed, STREAM_MASK);
    let mut indices: Vec<usize> = (0..total).collect();
    let mut observed = vec![false; total];
    for i in 0..keep {
        let j = mask_rng.random_range(i..total);
        indices.swap(i, j);
        observed[indices[i]] = true;
    }
    let mask = ObservationMask::new(x_org.shape().to_vec(), observed)?;

    let mut noise_rng = stream_rng(spec.seed, STREAM_NOISE);
    let sigma = spec.sigma_n;
    let noisy = x_org.map(|v| v + sigma * standard_normal(&mut noise_rng));
    let y = mask.apply(&noisy)?;
    Ok((y, mask))
}

// Box-Muller keeps the noise stream's mapping from seed to samples inside
// this crate instead of depending on a distribution crate's internals.
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let u1: f64 = rng.random();
        if u1 <= f64::MIN_POSITIVE {
            continue;
        }
        let u2: f64 = rng.random();
        return (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
    }
}

/// The scaled error `||x_hat - x_ref||_2 / total_entries`.
pub fn recovery_error(x_hat: &DenseTensor, x_ref: &DenseTensor) -> Result<f64> {
    Ok(x_hat.sub(x_ref)?.l2_norm() / x_hat.len() as f64)
}
