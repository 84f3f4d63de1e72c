//! Singular-value machinery: thin SVD, scalar p-thresholding, the weighted
//! Schatten-p proximal map, rank truncation, ball projection, and the norm
//! evaluations built on them.

use nalgebra::DMatrix;

use crate::error::{Result, TenrecError};
use crate::tensor::{DenseMatrix, DenseTensor};

/// Singular values below `RANK_FLOOR * sigma_max` count as zero for rank
/// decisions.
pub const RANK_FLOOR: f64 = 1e-12;

/// Thin singular value decomposition `M = U * diag(singulars) * V^T` with
/// `U: rows x k`, `V: cols x k`, `k = min(rows, cols)`, singular values
/// nonnegative and nonincreasing.
#[derive(Debug, Clone)]
pub struct ThinSVD {
    pub u: DenseMatrix,
    pub singulars: Vec<f64>,
    pub v: DenseMatrix,
}

impl ThinSVD {
    /// `U * diag(singulars) * V^T`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let rows = self.u.rows();
        let cols = self.v.rows();
        let k = self.singulars.len();
        let mut out = vec![0.0; rows * cols];
        for c in 0..cols {
            let o_col = &mut out[c * rows..(c + 1) * rows];
            for (idx, &s) in self.singulars.iter().enumerate() {
                if s == 0.0 {
                    continue;
                }
                let sv = s * self.v.get(c, idx);
                let u_col = &self.u.data()[idx * rows..(idx + 1) * rows];
                for (o, &u) in o_col.iter_mut().zip(u_col) {
                    *o += u * sv;
                }
            }
        }
        debug_assert_eq!(k, self.singulars.len());
        DenseMatrix::new(rows, cols, out).expect("factor dimensions are consistent")
    }
}

/// Per-mode nondecreasing weight vectors plus mode coefficients and the
/// Schatten exponent; the parameterization of the weighted tensor
/// Schatten-p norm.
#[derive(Debug, Clone)]
pub struct WeightSpec {
    per_mode: Vec<Vec<f64>>,
    gamma: Vec<f64>,
    p: f64,
}

impl WeightSpec {
    pub fn new(per_mode: Vec<Vec<f64>>, gamma: Vec<f64>, p: f64) -> Result<Self> {
        if per_mode.len() != gamma.len() || per_mode.is_empty() {
            return Err(TenrecError::InvalidWeights(format!(
                "{} weight vectors vs {} mode coefficients",
                per_mode.len(),
                gamma.len()
            )));
        }
        for (m, w) in per_mode.iter().enumerate() {
            check_nondecreasing_nonnegative(w).map_err(|e| {
                TenrecError::InvalidWeights(format!("mode {}: {e}", m + 1))
            })?;
        }
        if gamma.iter().any(|&g| g <= 0.0) {
            return Err(TenrecError::InvalidWeights("gamma entries must be positive".into()));
        }
        let gsum: f64 = gamma.iter().sum();
        if (gsum - 1.0).abs() > 1e-12 {
            return Err(TenrecError::InvalidWeights(format!(
                "gamma must sum to 1, got {gsum}"
            )));
        }
        check_exponent(p)?;
        Ok(Self { per_mode, gamma, p })
    }

    pub fn order(&self) -> usize {
        self.per_mode.len()
    }

    pub fn mode_weights(&self, mode: usize) -> &[f64] {
        &self.per_mode[mode - 1]
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Checks that the vector lengths match the min dimension of every
    /// mode unfolding of a tensor with the given shape.
    pub fn validate_for_shape(&self, shape: &[usize]) -> Result<()> {
        if self.order() != shape.len() {
            return Err(TenrecError::InvalidWeights(format!(
                "{} modes in weights vs order-{} tensor",
                self.order(),
                shape.len()
            )));
        }
        let total: usize = shape.iter().product();
        for (m, w) in self.per_mode.iter().enumerate() {
            let expected = shape[m].min(total / shape[m]);
            if w.len() != expected {
                return Err(TenrecError::InvalidWeights(format!(
                    "mode {} needs {expected} weights, got {}",
                    m + 1,
                    w.len()
                )));
            }
        }
        Ok(())
    }
}

fn check_nondecreasing_nonnegative(w: &[f64]) -> std::result::Result<(), String> {
    if w.is_empty() {
        return Err("empty weight vector".into());
    }
    if w[0] < 0.0 {
        return Err(format!("negative weight {}", w[0]));
    }
    if w.windows(2).any(|pair| pair[0] > pair[1]) {
        return Err("weights must be nondecreasing".into());
    }
    Ok(())
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(TenrecError::InvalidParameter(format!(
            "Schatten exponent must lie in (0, 1], got {p}"
        )));
    }
    Ok(())
}

fn to_nalgebra(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_column_slice(m.rows(), m.cols(), m.data())
}

fn from_nalgebra(m: &DMatrix<f64>) -> DenseMatrix {
    DenseMatrix::new(m.nrows(), m.ncols(), m.as_slice().to_vec())
        .expect("nalgebra matrix is dense and contiguous")
}

// A skewed aspect ratio makes bidiagonalizing the full matrix much more
// expensive than a QR reduction to the small square factor.
const QR_ASPECT: usize = 2;
const SVD_MAX_ITERS: usize = 100_000;

fn svd_square(m: DMatrix<f64>) -> Result<nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn>> {
    m.try_svd(true, true, f64::EPSILON, SVD_MAX_ITERS)
        .ok_or(TenrecError::SvdFailed)
}

/// Factors `(U, sigma, V)` with nalgebra storage. Matrices with a skewed
/// aspect ratio are first reduced by a thin QR factorization; the small
/// square factor is then decomposed directly.
fn svd_factors(m: &DenseMatrix) -> Result<(DMatrix<f64>, Vec<f64>, DMatrix<f64>)> {
    if m.data().iter().any(|v| !v.is_finite()) {
        return Err(TenrecError::NonFinite("thin_svd input".into()));
    }
    let (rows, cols) = (m.rows(), m.cols());
    let a = to_nalgebra(m);

    let (u, singulars, v) = if cols >= QR_ASPECT * rows {
        // M^T = Q R  =>  M = R^T Q^T; SVD(R^T) = U S W^T gives V = Q W.
        let qr = a.transpose().qr();
        let svd = svd_square(qr.r().transpose())?;
        let v = qr.q() * svd.v_t.unwrap().transpose();
        (svd.u.unwrap(), svd.singular_values, v)
    } else if rows >= QR_ASPECT * cols {
        // M = Q R; SVD(R) = U S V^T gives overall U = Q U.
        let qr = a.qr();
        let svd = svd_square(qr.r())?;
        let u = qr.q() * svd.u.unwrap();
        (u, svd.singular_values, svd.v_t.unwrap().transpose())
    } else {
        let svd = svd_square(a)?;
        (
            svd.u.unwrap(),
            svd.singular_values,
            svd.v_t.unwrap().transpose(),
        )
    };
    debug_assert_eq!(singulars.len(), rows.min(cols));
    Ok((u, singulars.as_slice().to_vec(), v))
}

// U * diag(s) * V^T without leaving nalgebra storage.
fn rebuild(mut u: DMatrix<f64>, singulars: &[f64], v: &DMatrix<f64>) -> DenseMatrix {
    for (mut col, &s) in u.column_iter_mut().zip(singulars) {
        col *= s;
    }
    from_nalgebra(&(u * v.transpose()))
}

/// Thin SVD with singular values sorted nonincreasing.
pub fn thin_svd(m: &DenseMatrix) -> Result<ThinSVD> {
    let (u, singulars, v) = svd_factors(m)?;
    Ok(ThinSVD {
        u: from_nalgebra(&u),
        singulars,
        v: from_nalgebra(&v),
    })
}

/// Number of singular values above `RANK_FLOOR * sigma_max`.
pub fn numerical_rank(singulars: &[f64]) -> usize {
    match singulars.first() {
        None => 0,
        Some(&s1) if s1 <= 0.0 => 0,
        Some(&s1) => singulars.iter().filter(|&&s| s > RANK_FLOOR * s1).count(),
    }
}

/// Global minimizer of `(1/2)(y - x)^2 + w |x|^p` for `w >= 0`, `0 < p <= 1`.
///
/// `p = 1` is plain soft thresholding; `p = 1/2` and `p = 2/3` use the
/// closed-form cubic and quartic root expressions; any other exponent in
/// `(0, 1)` is solved by safeguarded Newton iteration on the stationarity
/// equation. At the threshold boundary, where zero and a nonzero point are
/// both global minimizers, the nonzero root is returned.
pub fn scalar_p_threshold(y: f64, w: f64, p: f64) -> Result<f64> {
    if w < 0.0 {
        return Err(TenrecError::InvalidParameter(format!(
            "threshold weight must be nonnegative, got {w}"
        )));
    }
    check_exponent(p)?;
    if w == 0.0 || y == 0.0 {
        return Ok(y);
    }
    let ay = y.abs();
    let x = if p == 1.0 {
        (ay - w).max(0.0)
    } else if p == 0.5 {
        half_threshold(ay, w)
    } else if (p - 2.0 / 3.0).abs() < 1e-12 {
        two_thirds_threshold(ay, w)
    } else {
        newton_threshold(ay, w, p)
    };
    Ok(y.signum() * x)
}

fn prox_objective(x: f64, y: f64, w: f64, p: f64) -> f64 {
    0.5 * (y - x) * (y - x) + w * x.powf(p)
}

/// Keeps a positive stationary candidate only if it beats `x = 0`;
/// ties go to the nonzero root.
fn pick_against_zero(x: f64, y: f64, w: f64, p: f64) -> f64 {
    if x > 0.0 && prox_objective(x, y, w, p) <= 0.5 * y * y {
        x
    } else {
        0.0
    }
}

/// p = 1/2: with u = sqrt(x), stationarity is u^3 - y*u + w/2 = 0; the
/// largest root has the trigonometric form below and exists only when
/// the arccos argument is within [-1, 1].
fn half_threshold(y: f64, w: f64) -> f64 {
    let arg = 0.75 * 3.0f64.sqrt() * w * y.powf(-1.5);
    if arg > 1.0 {
        return 0.0;
    }
    let u = 2.0 * (y / 3.0).sqrt() * ((-arg).acos() / 3.0).cos();
    pick_against_zero(u * u, y, w, 0.5)
}

/// p = 2/3: with u = cbrt(x), stationarity is u^4 - y*u + 2w/3 = 0. The
/// quartic factors through the resolvent cubic z^3 - (8w/3) z - y^2 = 0;
/// its largest root z gives u = (sqrt(z) + sqrt(2y/sqrt(z) - z)) / 2.
fn two_thirds_threshold(y: f64, w: f64) -> f64 {
    let pc = -8.0 * w / 3.0;
    let qc = -y * y;
    let disc = -4.0 * pc * pc * pc - 27.0 * qc * qc;
    let scale = 2.0 * (-pc / 3.0).sqrt();
    let z = if disc >= 0.0 {
        let c = (3.0 * qc / (2.0 * pc) * (-3.0 / pc).sqrt()).clamp(-1.0, 1.0);
        scale * (c.acos() / 3.0).cos()
    } else {
        let c = (-3.0 * qc.abs() / (2.0 * pc) * (-3.0 / pc).sqrt()).max(1.0);
        scale * (c.acosh() / 3.0).cosh()
    };
    if !(z > 0.0) {
        return 0.0;
    }
    let s = z.sqrt();
    let disc2 = 2.0 * y / s - z;
    if disc2 < 0.0 {
        return 0.0;
    }
    let u = 0.5 * (s + disc2.sqrt());
    pick_against_zero(u * u * u, y, w, 2.0 / 3.0)
}

/// General 0 < p < 1: the positive stationary points solve
/// h(x) = x - y + w p x^{p-1} = 0. h is convex with minimum at
/// x_m = (w p (1-p))^{1/(2-p)}; if h(x_m) > 0 the minimizer is 0,
/// otherwise the larger root in [x_m, y] is found by Newton from y.
fn newton_threshold(y: f64, w: f64, p: f64) -> f64 {
    let h = |x: f64| x - y + w * p * x.powf(p - 1.0);
    let xm = (w * p * (1.0 - p)).powf(1.0 / (2.0 - p));
    if xm >= y || h(xm) > 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (xm, y);
    let mut x = y;
    for _ in 0..200 {
        let hx = h(x);
        if hx > 0.0 {
            lo = lo.max(xm);
            hi = x;
        } else {
            lo = x;
        }
        let dh = 1.0 + w * p * (p - 1.0) * x.powf(p - 2.0);
        let mut nx = x - hx / dh;
        if !(nx > lo && nx < hi) {
            nx = 0.5 * (lo + hi);
        }
        if (nx - x).abs() <= 4.0 * f64::EPSILON * x {
            x = nx;
            break;
        }
        x = nx;
    }
    pick_against_zero(x, y, w, p)
}

/// Applies `scalar_p_threshold` to each singular value with its paired
/// weight. Weights must be nondecreasing so the shrunk values stay sorted.
pub fn weighted_sv_shrink(svd: &ThinSVD, w: &[f64], p: f64) -> Result<ThinSVD> {
    if w.len() != svd.singulars.len() {
        return Err(TenrecError::InvalidWeights(format!(
            "{} weights for {} singular values",
            w.len(),
            svd.singulars.len()
        )));
    }
    check_nondecreasing_nonnegative(w).map_err(TenrecError::InvalidWeights)?;
    let mut shrunk = Vec::with_capacity(svd.singulars.len());
    for (&s, &wi) in svd.singulars.iter().zip(w) {
        shrunk.push(scalar_p_threshold(s, wi, p)?);
    }
    debug_assert!(
        shrunk.windows(2).all(|pair| pair[0] >= pair[1] - 1e-12),
        "shrunk singular values must stay nonincreasing"
    );
    Ok(ThinSVD {
        u: svd.u.clone(),
        singulars: shrunk,
        v: svd.v.clone(),
    })
}

/// Proximal map of the weighted Schatten-p penalty: SVD, shrink each
/// singular value against its weight, reconstruct.
pub fn wspn_prox(m: &DenseMatrix, w: &[f64], p: f64) -> Result<DenseMatrix> {
    let (u, singulars, v) = svd_factors(m)?;
    if w.len() != singulars.len() {
        return Err(TenrecError::InvalidWeights(format!(
            "{} weights for {} singular values",
            w.len(),
            singulars.len()
        )));
    }
    check_nondecreasing_nonnegative(w).map_err(TenrecError::InvalidWeights)?;
    let mut shrunk = Vec::with_capacity(singulars.len());
    for (&s, &wi) in singulars.iter().zip(w) {
        shrunk.push(scalar_p_threshold(s, wi, p)?);
    }
    debug_assert!(shrunk.windows(2).all(|pair| pair[0] >= pair[1] - 1e-12));
    Ok(rebuild(u, &shrunk, &v))
}

/// `sum_k w_k sigma_k(M)^p` with nondecreasing weights.
pub fn wspn_value(m: &DenseMatrix, w: &[f64], p: f64) -> Result<f64> {
    if w.len() != m.min_dim() {
        return Err(TenrecError::InvalidWeights(format!(
            "{} weights for min dimension {}",
            w.len(),
            m.min_dim()
        )));
    }
    check_nondecreasing_nonnegative(w).map_err(TenrecError::InvalidWeights)?;
    check_exponent(p)?;
    let svd = thin_svd(m)?;
    Ok(svd
        .singulars
        .iter()
        .zip(w)
        .map(|(&s, &wi)| wi * s.powf(p))
        .sum())
}

/// `sum_m gamma_m * wspn_value(unfold_m(X), w_m, p)`.
pub fn wtspn_value(x: &DenseTensor, spec: &WeightSpec) -> Result<f64> {
    spec.validate_for_shape(x.shape())?;
    let mut total = 0.0;
    for mode in 1..=x.order() {
        let unf = x.unfold(mode)?;
        total += spec.gamma()[mode - 1] * wspn_value(&unf, spec.mode_weights(mode), spec.p())?;
    }
    Ok(total)
}

/// Best rank-`r` approximation: keep the `r` largest singular values,
/// zero the rest, reconstruct.
pub fn rank_truncate(m: &DenseMatrix, r: usize) -> Result<DenseMatrix> {
    if r > m.min_dim() {
        return Err(TenrecError::InvalidParameter(format!(
            "rank {r} exceeds min dimension {}",
            m.min_dim()
        )));
    }
    let (u, mut singulars, v) = svd_factors(m)?;
    for s in singulars.iter_mut().skip(r) {
        *s = 0.0;
    }
    Ok(rebuild(u, &singulars, &v))
}

/// Projection onto the l2 ball of the given center and radius:
/// `center + min(radius / ||p - center||, 1) * (p - center)`.
pub fn ball_project(p: &DenseTensor, center: &DenseTensor, radius: f64) -> Result<DenseTensor> {
    if radius < 0.0 {
        return Err(TenrecError::InvalidParameter(format!(
            "ball radius must be nonnegative, got {radius}"
        )));
    }
    let diff = p.sub(center)?;
    let dist = diff.l2_norm();
    if dist <= radius {
        return Ok(p.clone());
    }
    let t = radius / dist;
    center.zip_map(&diff, |c, d| c + t * d)
}

/// One `(sigma, weight, shrunk sigma)` row per singular value, the debug
/// dump behind `write_shrink_csv`.
pub fn shrink_report(svd: &ThinSVD, w: &[f64], p: f64) -> Result<Vec<(f64, f64, f64)>> {
    let shrunk = weighted_sv_shrink(svd, w, p)?;
    Ok(svd
        .singulars
        .iter()
        .zip(w)
        .zip(&shrunk.singulars)
        .map(|((&s, &wi), &t)| (s, wi, t))
        .collect())
}

/// Writes `(sigma, weight, thresholded sigma)` triples as CSV.
pub fn write_shrink_csv<W: std::io::Write>(
    mut out: W,
    rows: &[(f64, f64, f64)],
) -> std::io::Result<()> {
    writeln!(out, "sigma,weight,thresholded")?;
    for (s, w, t) in rows {
        writeln!(out, "{s},{w},{t}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use tenrec_oracles as oracle;

    fn mat(rows: usize, cols: usize, rowwise: &[f64]) -> DenseMatrix {
        let mut data = vec![0.0; rows * cols];
        for r in 0..rows {
            for c in 0..cols {
                data[c * rows + r] = rowwise[r * cols + c];
            }
        }
        DenseMatrix::new(rows, cols, data).unwrap()
    }

    fn diag(vals: &[f64]) -> DenseMatrix {
        let n = vals.len();
        let mut m = DenseMatrix::zeros(n, n);
        for (i, &v) in vals.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    #[test]
    fn svd_identity_and_diag() {
        let svd = thin_svd(&diag(&[1.0, 1.0, 1.0])).unwrap();
        for &s in &svd.singulars {
            assert!((s - 1.0).abs() < 1e-12);
        }
        let svd = thin_svd(&diag(&[3.0, 2.0, 1.0])).unwrap();
        assert!((svd.singulars[0] - 3.0).abs() < 1e-12);
        assert!((svd.singulars[1] - 2.0).abs() < 1e-12);
        assert!((svd.singulars[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn svd_reconstruction_orthonormality_and_sigma_oracle() {
        // fixed pseudo-random 5x4 matrix
        let vals: Vec<f64> = (0..20).map(|i| ((i * i + 3) as f64 * 0.7129).sin()).collect();
        let m = DenseMatrix::new(5, 4, vals).unwrap();
        let svd = thin_svd(&m).unwrap();

        let rec = svd.reconstruct();
        let err = rec.sub(&m).unwrap().frobenius_norm() / m.frobenius_norm();
        assert!(err <= 1e-10, "reconstruction error {err}");

        // U^T U = I and V^T V = I
        for (q, dim) in [(&svd.u, 5usize), (&svd.v, 4usize)] {
            let k = q.cols();
            for a in 0..k {
                for b in 0..k {
                    let dot: f64 = (0..dim).map(|r| q.get(r, a) * q.get(r, b)).sum();
                    let expect = if a == b { 1.0 } else { 0.0 };
                    assert!((dot - expect).abs() < 1e-10 * k as f64);
                }
            }
        }

        // singular values match the independent Gram/Jacobi path
        let sref = oracle::gram_singular_values(5, 4, m.data());
        for (s, r) in svd.singulars.iter().zip(&sref) {
            assert!((s - r).abs() <= 1e-8, "{s} vs {r}");
        }
        // nonincreasing
        assert!(svd.singulars.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn svd_qr_paths_match_direct() {
        // wide enough to trigger the QR reduction; quadratic phase keeps
        // the matrix numerically full rank
        let vals: Vec<f64> = (0..6 * 40)
            .map(|i| ((i * i * 37 + 11) as f64 * 0.613).sin())
            .collect();
        let wide = DenseMatrix::new(6, 40, vals.clone()).unwrap();
        let tall = DenseMatrix::new(40, 6, vals).unwrap();
        for m in [wide, tall] {
            let svd = thin_svd(&m).unwrap();
            let rec = svd.reconstruct();
            let err = rec.sub(&m).unwrap().frobenius_norm() / m.frobenius_norm();
            assert!(err <= 1e-10, "reconstruction error {err}");
            let sref = oracle::gram_singular_values(m.rows(), m.cols(), m.data());
            for (s, r) in svd.singulars.iter().zip(&sref) {
                assert!((s - r).abs() <= 1e-8 * sref[0].max(1.0));
            }
        }
    }

    #[test]
    fn svd_rejects_non_finite() {
        let m = DenseMatrix::new(2, 2, vec![1.0, f64::NAN, 0.0, 1.0]).unwrap();
        assert!(matches!(thin_svd(&m), Err(TenrecError::NonFinite(_))));
    }

    #[test]
    fn threshold_p1_soft() {
        assert_eq!(scalar_p_threshold(5.0, 2.0, 1.0).unwrap(), 3.0);
        assert_eq!(scalar_p_threshold(-5.0, 2.0, 1.0).unwrap(), -3.0);
        assert_eq!(scalar_p_threshold(1.5, 2.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn threshold_zero_weight_is_identity() {
        for p in [1.0, 0.5, 2.0 / 3.0, 0.8] {
            assert_eq!(scalar_p_threshold(2.7, 0.0, p).unwrap(), 2.7);
            assert_eq!(scalar_p_threshold(-0.3, 0.0, p).unwrap(), -0.3);
        }
    }

    #[test]
    fn threshold_rejects_bad_params() {
        assert!(scalar_p_threshold(1.0, -0.1, 1.0).is_err());
        assert!(scalar_p_threshold(1.0, 1.0, 0.0).is_err());
        assert!(scalar_p_threshold(1.0, 1.0, -0.5).is_err());
        assert!(scalar_p_threshold(1.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn threshold_matches_brute_force_spot_checks() {
        // includes the spec's (y=2, w=1, p=1/2) case
        for (y, w, p) in [
            (2.0, 1.0, 0.5),
            (3.7, 0.9, 0.5),
            (1.2, 0.4, 2.0 / 3.0),
            (6.0, 2.5, 2.0 / 3.0),
            (4.0, 1.1, 0.8),
            (-2.0, 1.0, 0.5),
        ] {
            let got = scalar_p_threshold(y, w, p).unwrap();
            let want = oracle::brute_force_prox(y, w, p);
            let fg = oracle::prox_objective(got, y, w, p);
            let fw = oracle::prox_objective(want, y, w, p);
            assert!(
                fg <= fw + 1e-10,
                "objective regression at ({y},{w},{p}): {fg} vs {fw}"
            );
            assert!(
                (got - want).abs() <= 1e-6,
                "argument gap at ({y},{w},{p}): {got} vs {want}"
            );
        }
    }

    #[test]
    fn shrink_basics() {
        let svd = thin_svd(&diag(&[5.0, 3.0, 1.0])).unwrap();
        let same = weighted_sv_shrink(&svd, &[0.0, 0.0, 0.0], 1.0).unwrap();
        assert_eq!(same.singulars, svd.singulars);

        let soft = weighted_sv_shrink(&svd, &[1.0, 1.0, 1.0], 1.0).unwrap();
        assert_eq!(soft.singulars, vec![4.0, 2.0, 0.0]);

        let w = [0.5, 1.0, 2.0];
        let half = weighted_sv_shrink(&svd, &w, 0.5).unwrap();
        for ((&s, &wi), &t) in svd.singulars.iter().zip(&w).zip(&half.singulars) {
            let want = oracle::brute_force_prox(s, wi, 0.5);
            assert!((t - want).abs() <= 1e-6, "{t} vs {want}");
        }
        assert!(half.singulars.windows(2).all(|p| p[0] >= p[1]));
    }

    #[test]
    fn shrink_rejects_bad_weights() {
        let svd = thin_svd(&diag(&[2.0, 1.0])).unwrap();
        assert!(weighted_sv_shrink(&svd, &[1.0], 1.0).is_err());
        assert!(weighted_sv_shrink(&svd, &[2.0, 1.0], 1.0).is_err()); // decreasing
        assert!(weighted_sv_shrink(&svd, &[-1.0, 1.0], 1.0).is_err());
    }

    #[test]
    fn prox_diagonal_reduces_to_scalar() {
        let out = wspn_prox(&diag(&[5.0, 3.0]), &[1.0, 1.0], 1.0).unwrap();
        let want = diag(&[4.0, 2.0]);
        assert!(out.sub(&want).unwrap().max_abs() < 1e-12);

        let m = mat(2, 3, &[1.0, 2.0, 0.5, -1.0, 0.3, 2.2]);
        let identity = wspn_prox(&m, &[0.0, 0.0], 0.5).unwrap();
        assert!(identity.sub(&m).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn wspn_value_cases() {
        assert_eq!(wspn_value(&DenseMatrix::zeros(3, 3), &[1.0, 1.0, 1.0], 1.0).unwrap(), 0.0);
        let v = wspn_value(&diag(&[4.0]), &[1.0], 0.5).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let v = wspn_value(&diag(&[3.0, 2.0, 1.0]), &[1.0, 2.0, 3.0], 1.0).unwrap();
        assert!((v - 10.0).abs() < 1e-12);
    }

    #[test]
    fn wtspn_value_definition_collapse() {
        let x = DenseTensor::new(
            vec![3, 3, 3],
            (0..27).map(|i| ((i * i * 13 + 5) as f64 * 0.731).sin()).collect(),
        )
        .unwrap();
        let spec = WeightSpec::new(
            vec![vec![1.0; 3], vec![1.0; 3], vec![1.0; 3]],
            vec![1.0 / 3.0; 3],
            1.0,
        )
        .unwrap();
        let got = wtspn_value(&x, &spec).unwrap();
        // independent recomputation from per-mode singular values
        let mut want = 0.0;
        for mode in 1..=3 {
            let unf = x.unfold(mode).unwrap();
            let svals = oracle::gram_singular_values(unf.rows(), unf.cols(), unf.data());
            want += svals.iter().sum::<f64>() / 3.0;
        }
        assert!((got - want).abs() < 1e-8, "{got} vs {want}");
        assert!(wtspn_value(&DenseTensor::zeros(&[3, 3, 3]).unwrap(), &spec).unwrap() == 0.0);
    }

    #[test]
    fn rank_truncate_cases() {
        let m = diag(&[3.0, 2.0, 1.0]);
        let full = rank_truncate(&m, 3).unwrap();
        assert!(full.sub(&m).unwrap().max_abs() < 1e-10);
        let r2 = rank_truncate(&m, 2).unwrap();
        assert!(r2.sub(&diag(&[3.0, 2.0, 0.0])).unwrap().max_abs() < 1e-10);
        assert!(rank_truncate(&m, 4).is_err());

        // Eckart-Young: Frobenius error equals the dropped singular tail
        let vals: Vec<f64> = (0..25).map(|i| ((i * 3 + 1) as f64 * 0.417).cos()).collect();
        let m = DenseMatrix::new(5, 5, vals).unwrap();
        let svd = thin_svd(&m).unwrap();
        let t = rank_truncate(&m, 2).unwrap();
        let err = t.sub(&m).unwrap().frobenius_norm();
        let tail: f64 = svd.singulars[2..].iter().map(|s| s * s).sum::<f64>().sqrt();
        assert!((err - tail).abs() < 1e-10);
    }

    #[test]
    fn ball_project_cases() {
        let center = DenseTensor::zeros(&[2, 2]).unwrap();
        let p = DenseTensor::new(vec![2, 2], vec![2.0, 2.0, 2.0, 2.0]).unwrap(); // norm 4
        let proj = ball_project(&p, &center, 1.0).unwrap();
        assert!((proj.l2_norm() - 1.0).abs() < 1e-12);
        assert!(proj.sub(&p.scale(0.25)).unwrap().max_abs() < 1e-12);

        // inside the ball: unchanged
        let inside = ball_project(&p, &center, 10.0).unwrap();
        assert_eq!(inside, p);

        // p = center with radius 0
        let at_center = ball_project(&center, &center, 0.0).unwrap();
        assert_eq!(at_center, center);

        let wrong = DenseTensor::zeros(&[2, 3]).unwrap();
        assert!(ball_project(&wrong, &center, 1.0).is_err());
        assert!(ball_project(&p, &center, -1.0).is_err());
    }

    #[test]
    fn shrink_csv_dump() {
        let svd = thin_svd(&diag(&[5.0, 3.0])).unwrap();
        let rows = shrink_report(&svd, &[1.0, 1.0], 1.0).unwrap();
        let mut buf = Vec::new();
        write_shrink_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("sigma,weight,thresholded\n"));
        assert!(text.contains("5,1,4"));
    }

    #[test]
    fn weight_spec_validation() {
        assert!(WeightSpec::new(vec![vec![1.0, 2.0]], vec![1.0], 1.0).is_ok());
        // decreasing weights
        assert!(WeightSpec::new(vec![vec![2.0, 1.0]], vec![1.0], 1.0).is_err());
        // gamma sum != 1
        assert!(WeightSpec::new(vec![vec![1.0], vec![1.0]], vec![0.6, 0.6], 1.0).is_err());
        // bad exponent
        assert!(WeightSpec::new(vec![vec![1.0]], vec![1.0], 0.0).is_err());

        let spec = WeightSpec::new(
            vec![vec![1.0; 2], vec![1.0; 2], vec![1.0; 2]],
            vec![1.0 / 3.0; 3],
            1.0,
        )
        .unwrap();
        assert!(spec.validate_for_shape(&[2, 2, 2]).is_ok());
        assert!(spec.validate_for_shape(&[2, 2, 3]).is_err());
        assert!(spec.validate_for_shape(&[2, 2]).is_err());
    }
}
