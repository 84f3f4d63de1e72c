//! The three weight schemes: ideal (from the original tensor's singular
//! values), observation (from a mean-filled observation), and uniform.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TenrecError};
use crate::spectral::{thin_svd, WeightSpec};
use crate::tensor::{DenseTensor, ObservationMask};

/// Trailing singular values of an exactly low-rank tensor are zero, which
/// the inverse-power formula cannot take; they are clamped to this fraction
/// of the leading value before inversion.
pub const DEFAULT_SIGMA_CLAMP: f64 = 1e-8;

/// Which weight construction to use, with its exponent where one applies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum WeightScheme {
    Ideal { alpha: f64 },
    Observation { alpha: f64 },
    Uniform,
}

/// Per-mode weight vectors, not yet paired with mode coefficients or an
/// exponent. `into_spec` builds the full parameterization.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeWeights(pub Vec<Vec<f64>>);

impl ModeWeights {
    pub fn into_spec(self, gamma: Vec<f64>, p: f64) -> Result<WeightSpec> {
        WeightSpec::new(self.0, gamma, p)
    }

    /// Convenience for the common `gamma_m = 1/N` choice.
    pub fn into_uniform_gamma_spec(self, p: f64) -> Result<WeightSpec> {
        let n = self.0.len();
        self.into_spec(vec![1.0 / n as f64; n], p)
    }
}

fn inverse_power_weights(x: &DenseTensor, alpha: f64, clamp: f64) -> Result<ModeWeights> {
    if alpha < 0.0 {
        return Err(TenrecError::InvalidParameter(format!(
            "weight exponent alpha must be nonnegative, got {alpha}"
        )));
    }
    let mut per_mode = Vec::with_capacity(x.order());
    for mode in 1..=x.order() {
        let unf = x.unfold(mode)?;
        let r = unf.min_dim();
        let svd = thin_svd(&unf)?;
        let sigma1 = svd.singulars[0];
        let weights = if sigma1 <= 0.0 {
            // zero tensor: every inverse power is equal, so uniform R/len = 1
            vec![1.0; r]
        } else {
            let inv: Vec<f64> = svd
                .singulars
                .iter()
                .map(|&s| s.max(clamp * sigma1).powf(-alpha))
                .collect();
            let total: f64 = inv.iter().sum();
            inv.iter().map(|&v| r as f64 * v / total).collect()
        };
        per_mode.push(weights);
    }
    Ok(ModeWeights(per_mode))
}

/// Ideal weights: for each mode, `w_i = R * sigma_i^{-alpha} / sum_k
/// sigma_k^{-alpha}` over the singular values of the original tensor's
/// unfolding, `R` the smaller of the unfolding's dimensions. Nondecreasing
/// and summing to `R` by construction.
pub fn ideal_weights(x_org: &DenseTensor, alpha: f64) -> Result<ModeWeights> {
    ideal_weights_clamped(x_org, alpha, DEFAULT_SIGMA_CLAMP)
}

/// `ideal_weights` with an explicit clamp ratio for the zero singular values.
pub fn ideal_weights_clamped(
    x_org: &DenseTensor,
    alpha: f64,
    clamp: f64,
) -> Result<ModeWeights> {
    inverse_power_weights(x_org, alpha, clamp)
}

/// Fills the missing entries of an observation with the mean of the
/// observed entries.
pub fn mean_fill(y: &DenseTensor, mask: &ObservationMask) -> Result<DenseTensor> {
    if mask.count() == 0 {
        return Err(TenrecError::EmptyMask);
    }
    if mask.shape() != y.shape() {
        return Err(TenrecError::ShapeMismatch {
            expected: mask.shape().to_vec(),
            got: y.shape().to_vec(),
        });
    }
    let sum: f64 = y
        .data()
        .iter()
        .zip(mask.indicators())
        .filter(|(_, &o)| o)
        .map(|(&v, _)| v)
        .sum();
    let mean = sum / mask.count() as f64;
    let data = y
        .data()
        .iter()
        .zip(mask.indicators())
        .map(|(&v, &o)| if o { v } else { mean })
        .collect();
    DenseTensor::new(y.shape().to_vec(), data)
}

/// Observation weights: the ideal-weight formula applied to the mean-filled
/// observation instead of the unavailable original tensor.
pub fn observation_weights(
    y: &DenseTensor,
    mask: &ObservationMask,
    alpha: f64,
) -> Result<ModeWeights> {
    observation_weights_clamped(y, mask, alpha, DEFAULT_SIGMA_CLAMP)
}

pub fn observation_weights_clamped(
    y: &DenseTensor,
    mask: &ObservationMask,
    alpha: f64,
    clamp: f64,
) -> Result<ModeWeights> {
    let filled = mean_fill(y, mask)?;
    inverse_power_weights(&filled, alpha, clamp)
}

/// Uniform weights: every weight is 1 in every mode, which reduces the
/// weighted tensor Schatten-p norm to the plain tensor Schatten-p norm.
pub fn uniform_weights(shape: &[usize]) -> Result<ModeWeights> {
    let total: usize = shape.iter().product();
    if shape.len() < 2 || total == 0 {
        return Err(TenrecError::InvalidShape(format!("bad shape {shape:?}")));
    }
    Ok(ModeWeights(
        shape
            .iter()
            .map(|&n| vec![1.0; n.min(total / n)])
            .collect(),
    ))
}

/// Builds the weights for a scheme choice. `x_org` is required for the
/// ideal scheme and ignored otherwise.
pub fn scheme_weights(
    scheme: WeightScheme,
    x_org: Option<&DenseTensor>,
    y: &DenseTensor,
    mask: &ObservationMask,
) -> Result<ModeWeights> {
    match scheme {
        WeightScheme::Ideal { alpha } => {
            let x = x_org.ok_or_else(|| {
                TenrecError::InvalidParameter(
                    "ideal weights require the original tensor".into(),
                )
            })?;
            ideal_weights(x, alpha)
        }
        WeightScheme::Observation { alpha } => observation_weights(y, mask, alpha),
        WeightScheme::Uniform => uniform_weights(y.shape()),
    }
}

/// Writes weight vectors as `mode,index,weight` CSV rows.
pub fn write_weights_csv<W: std::io::Write>(
    mut out: W,
    weights: &ModeWeights,
) -> std::io::Result<()> {
    writeln!(out, "mode,index,weight")?;
    for (m, vec) in weights.0.iter().enumerate() {
        for (i, w) in vec.iter().enumerate() {
            writeln!(out, "{},{},{}", m + 1, i + 1, w)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_tensor() -> DenseTensor {
        DenseTensor::new(
            vec![3, 4, 2],
            (0..24).map(|i| ((i * 5 + 1) as f64 * 0.377).sin()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn ideal_alpha_zero_is_uniform_r_over_n() {
        let x = sample_tensor();
        let w = ideal_weights(&x, 0.0).unwrap();
        for (mode, vec) in w.0.iter().enumerate() {
            let unf = x.unfold(mode + 1).unwrap();
            let r = unf.min_dim() as f64;
            for &wi in vec {
                assert!((wi - r / vec.len() as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ideal_weights_direct_formula_case() {
        // mode with sigma = (4, 2, 1), alpha = 1, R = 3:
        // weights = 3 * (1/4, 1/2, 1) / (7/4) = (3/7, 6/7, 12/7)
        let mut m = crate::tensor::DenseMatrix::zeros(3, 4);
        m.set(0, 0, 4.0);
        m.set(1, 1, 2.0);
        m.set(2, 2, 1.0);
        let x = m.fold(1, &[3, 4]).unwrap();
        let w = ideal_weights(&x, 1.0).unwrap();
        let expect = [3.0 / 7.0, 6.0 / 7.0, 12.0 / 7.0];
        for (wi, e) in w.0[0].iter().zip(expect) {
            assert!((wi - e).abs() < 1e-10, "{wi} vs {e}");
        }
    }

    #[test]
    fn weights_nondecreasing_and_sum_to_r() {
        let x = sample_tensor();
        for alpha in [0.5, 1.0, 2.0, 4.0] {
            let w = ideal_weights(&x, alpha).unwrap();
            for (mode, vec) in w.0.iter().enumerate() {
                assert!(vec.windows(2).all(|p| p[0] <= p[1]), "alpha {alpha}");
                let r = x.unfold(mode + 1).unwrap().min_dim() as f64;
                assert!((vec.iter().sum::<f64>() - r).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn mean_fill_cases() {
        // Y = [1,_,3,_] observed at positions 0 and 2 -> [1,2,3,2]
        let y = DenseTensor::new(vec![4, 1], vec![1.0, 0.0, 3.0, 0.0]).unwrap();
        let mask =
            ObservationMask::new(vec![4, 1], vec![true, false, true, false]).unwrap();
        let filled = mean_fill(&y, &mask).unwrap();
        assert_eq!(filled.data(), &[1.0, 2.0, 3.0, 2.0]);

        let full = ObservationMask::full(&[4, 1]).unwrap();
        assert_eq!(mean_fill(&y, &full).unwrap(), y);

        let empty = ObservationMask::new(vec![4, 1], vec![false; 4]).unwrap();
        assert!(matches!(mean_fill(&y, &empty), Err(TenrecError::EmptyMask)));
    }

    #[test]
    fn observation_equals_ideal_when_fully_observed() {
        let x = sample_tensor();
        let mask = ObservationMask::full(x.shape()).unwrap();
        let a = ideal_weights(&x, 1.5).unwrap();
        let b = observation_weights(&x, &mask, 1.5).unwrap();
        for (va, vb) in a.0.iter().zip(&b.0) {
            for (wa, wb) in va.iter().zip(vb) {
                assert!((wa - wb).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn uniform_weights_are_all_ones() {
        let w = uniform_weights(&[3, 4, 2]).unwrap();
        assert_eq!(w.0[0], vec![1.0; 3]);
        assert_eq!(w.0[1], vec![1.0; 4]);
        assert_eq!(w.0[2], vec![1.0; 2]);
        // a dominant first dimension caps the vector at the column count
        let w = uniform_weights(&[8, 2, 2]).unwrap();
        assert_eq!(w.0[0], vec![1.0; 4]);
    }

    #[test]
    fn scheme_dispatch() {
        let x = sample_tensor();
        let mask = ObservationMask::full(x.shape()).unwrap();
        assert!(scheme_weights(WeightScheme::Ideal { alpha: 1.0 }, None, &x, &mask).is_err());
        let id = scheme_weights(WeightScheme::Ideal { alpha: 1.0 }, Some(&x), &x, &mask).unwrap();
        let ob =
            scheme_weights(WeightScheme::Observation { alpha: 1.0 }, None, &x, &mask).unwrap();
        assert_eq!(id, ob); // fully observed, noiseless
        let un = scheme_weights(WeightScheme::Uniform, None, &x, &mask).unwrap();
        assert_eq!(un, uniform_weights(x.shape()).unwrap());
    }

    #[test]
    fn weights_csv_layout() {
        let w = ModeWeights(vec![vec![0.5, 1.5], vec![1.0]]);
        let mut buf = Vec::new();
        write_weights_csv(&mut buf, &w).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "mode,index,weight\n1,1,0.5\n1,2,1.5\n2,1,1\n");
    }
}
