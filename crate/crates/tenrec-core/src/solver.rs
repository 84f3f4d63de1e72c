//! The two ADMM loops: weighted-Schatten-p minimization under an l2-ball
//! data constraint, and rank-constrained least squares. Both split the
//! variable into per-mode matrices Y_{1,m} coupled to unfold_m(X) and a
//! tensor Y_2 coupled to the observed entries, with scaled-dual updates
//! and a geometrically decaying penalty.

use crate::error::{Result, TenrecError};
use crate::spectral::{ball_project, rank_truncate, wspn_prox, wtspn_value, WeightSpec};
use crate::tensor::{DenseMatrix, DenseTensor, ObservationMask};

/// State magnitudes beyond this abort the solve as diverged.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

/// Configuration for the weighted-Schatten-p solver.
#[derive(Debug, Clone)]
pub struct WtspnSolverConfig {
    pub weights: WeightSpec,
    /// Initial penalty; also scales the per-mode prox weights.
    pub lambda0: f64,
    /// Per-iteration multiplier applied to lambda.
    pub decay: f64,
    /// Noise standard deviation defining the ball radius sigma_n * sqrt(|Omega|).
    pub sigma_n: f64,
    pub max_iter: usize,
    pub rel_tol: f64,
    /// Record a per-iteration trace (adds one norm evaluation per mode).
    pub trace: bool,
}

impl WtspnSolverConfig {
    pub fn new(weights: WeightSpec) -> Self {
        Self {
            weights,
            lambda0: 100.0,
            decay: 0.99,
            sigma_n: 0.0,
            max_iter: 500,
            rel_tol: 1e-7,
            trace: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda0 > 0.0) {
            return Err(TenrecError::InvalidParameter(format!(
                "lambda0 must be positive, got {}",
                self.lambda0
            )));
        }
        validate_shared(self.decay, self.sigma_n, self.max_iter, self.rel_tol)
    }
}

/// Configuration for the rank-constrained solver.
#[derive(Debug, Clone)]
pub struct RcSolverConfig {
    /// Per-mode rank bounds.
    pub target_ranks: Vec<usize>,
    pub lambda0: f64,
    pub decay: f64,
    pub max_iter: usize,
    pub rel_tol: f64,
    pub trace: bool,
}

impl RcSolverConfig {
    pub fn new(target_ranks: Vec<usize>) -> Self {
        Self {
            target_ranks,
            lambda0: 100.0,
            decay: 0.99,
            max_iter: 500,
            rel_tol: 1e-7,
            trace: false,
        }
    }

    fn validate(&self, shape: &[usize]) -> Result<()> {
        if !(self.lambda0 > 0.0) {
            return Err(TenrecError::InvalidParameter(format!(
                "lambda0 must be positive, got {}",
                self.lambda0
            )));
        }
        if self.target_ranks.len() != shape.len() {
            return Err(TenrecError::InvalidParameter(format!(
                "{} rank bounds for order-{} tensor",
                self.target_ranks.len(),
                shape.len()
            )));
        }
        let total: usize = shape.iter().product();
        for (m, (&r, &n)) in self.target_ranks.iter().zip(shape).enumerate() {
            let min_dim = n.min(total / n);
            if r < 1 || r > min_dim {
                return Err(TenrecError::InvalidParameter(format!(
                    "mode {} rank bound {r} outside 1..={min_dim}",
                    m + 1
                )));
            }
        }
        validate_shared(self.decay, 0.0, self.max_iter, self.rel_tol)
    }
}

fn validate_shared(decay: f64, sigma_n: f64, max_iter: usize, rel_tol: f64) -> Result<()> {
    if !(decay > 0.0 && decay <= 1.0) {
        return Err(TenrecError::InvalidParameter(format!(
            "decay must lie in (0, 1], got {decay}"
        )));
    }
    if sigma_n < 0.0 {
        return Err(TenrecError::InvalidParameter(format!(
            "sigma_n must be nonnegative, got {sigma_n}"
        )));
    }
    if max_iter == 0 {
        return Err(TenrecError::InvalidParameter("max_iter must be >= 1".into()));
    }
    if rel_tol < 0.0 {
        return Err(TenrecError::InvalidParameter(format!(
            "rel_tol must be nonnegative, got {rel_tol}"
        )));
    }
    Ok(())
}

/// ADMM iterate: the primal tensor, the per-mode splits with their duals,
/// the observed-entry split with its dual, and the current penalty.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub x: DenseTensor,
    pub y1: Vec<DenseMatrix>,
    pub z1: Vec<DenseMatrix>,
    pub y2: DenseTensor,
    pub z2: DenseTensor,
    pub k: usize,
    pub lambda: f64,
}

impl SolverState {
    /// Y_{1,m} starts at unfold_m(Y), Y_2 at Y, duals at zero.
    pub fn init(y: &DenseTensor, lambda0: f64) -> Result<Self> {
        let n = y.order();
        let mut y1 = Vec::with_capacity(n);
        let mut z1 = Vec::with_capacity(n);
        for mode in 1..=n {
            let unf = y.unfold(mode)?;
            z1.push(DenseMatrix::zeros(unf.rows(), unf.cols()));
            y1.push(unf);
        }
        Ok(Self {
            x: DenseTensor::zeros(y.shape())?,
            y1,
            z1,
            y2: y.clone(),
            z2: DenseTensor::zeros(y.shape())?,
            k: 0,
            lambda: lambda0,
        })
    }

    fn magnitude(&self) -> f64 {
        let mut m = self.x.max_abs().max(self.y2.max_abs()).max(self.z2.max_abs());
        for (a, b) in self.y1.iter().zip(&self.z1) {
            m = m.max(a.max_abs()).max(b.max_abs());
        }
        m
    }
}

/// One row of the optional per-iteration trace.
#[derive(Debug, Clone)]
pub struct TracePoint {
    pub k: usize,
    pub lambda: f64,
    /// Weighted-norm objective for the WTSPN solver, the observed-entry
    /// residual norm for the rank-constrained one.
    pub objective: f64,
    pub ball_residual: f64,
    pub rel_change: f64,
}

/// Recovered tensor plus convergence diagnostics.
#[derive(Debug, Clone)]
pub struct SolverResult {
    pub x_hat: DenseTensor,
    pub iterations: usize,
    /// Whether the relative-change stopping rule fired before max_iter.
    pub converged: bool,
    /// `max(||A_Omega(X) - Y||_2 - radius, 0)` with the solver's radius
    /// (zero for the rank-constrained solver).
    pub ball_residual: f64,
    pub trace: Vec<TracePoint>,
}

impl SolverResult {
    /// Writes the per-iteration trace as CSV.
    pub fn write_trace_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "k,lambda,objective,ball_residual,rel_change")?;
        for t in &self.trace {
            writeln!(
                out,
                "{},{},{},{},{}",
                t.k, t.lambda, t.objective, t.ball_residual, t.rel_change
            )?;
        }
        Ok(())
    }
}

/// Closed-form minimizer of the X subproblem
/// `(1/2) sum_m ||Y_1m - unfold_m(X) - Z_1m||^2 + lambda ||Y_2 - A_Omega(X) - Z_2||^2`.
/// Each unfolding is an entry bijection, so the objective decouples per
/// entry and the gradient-zero condition gives
/// `X = (sum_m fold_m(Y_1m - Z_1m) + 2 lambda 1_Omega (Y_2 - Z_2)) / (N + 2 lambda 1_Omega)`.
pub fn x_update(state: &SolverState, mask: &ObservationMask) -> Result<DenseTensor> {
    let shape = state.x.shape().to_vec();
    let n = shape.len();
    let mut numer = vec![0.0; state.x.len()];
    for (m, (y1, z1)) in state.y1.iter().zip(&state.z1).enumerate() {
        let folded = y1.sub(z1)?.fold(m + 1, &shape)?;
        for (acc, &v) in numer.iter_mut().zip(folded.data()) {
            *acc += v;
        }
    }
    let two_lambda = 2.0 * state.lambda;
    let data: Vec<f64> = numer
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            if mask.is_observed(i) {
                (s + two_lambda * (state.y2.data()[i] - state.z2.data()[i]))
                    / (n as f64 + two_lambda)
            } else {
                s / n as f64
            }
        })
        .collect();
    DenseTensor::new(shape, data)
}

fn prox_weights(weights: &WeightSpec, mode: usize, lambda: f64) -> Vec<f64> {
    let gamma = weights.gamma()[mode - 1];
    weights
        .mode_weights(mode)
        .iter()
        .map(|&w| lambda * gamma * w)
        .collect()
}

/// Per-mode split update for the weighted solver: the prox of the weighted
/// Schatten-p penalty with weights `lambda * gamma_m * w_m`, evaluated at
/// `unfold_m(X) + Z_1m`.
pub fn y1_update_wtspn(state: &SolverState, mode: usize, config: &WtspnSolverConfig) -> Result<DenseMatrix> {
    let b = state.x.unfold(mode)?.add(&state.z1[mode - 1])?;
    let scaled = prox_weights(&config.weights, mode, state.lambda);
    wspn_prox(&b, &scaled, config.weights.p())
}

/// Per-mode split update for the rank-constrained solver: projection onto
/// the rank ball by truncated SVD.
pub fn y1_update_rc(state: &SolverState, mode: usize, rank: usize) -> Result<DenseMatrix> {
    let b = state.x.unfold(mode)?.add(&state.z1[mode - 1])?;
    rank_truncate(&b, rank)
}

/// Observed-entry update for the weighted solver: project the observed part
/// of `X + Z_2` onto the ball of radius `sigma_n * sqrt(|Omega|)` around Y,
/// pass the unobserved part through.
pub fn y2_update_wtspn(
    state: &SolverState,
    y: &DenseTensor,
    mask: &ObservationMask,
    sigma_n: f64,
) -> Result<DenseTensor> {
    let shifted = state.x.add(&state.z2)?;
    let radius = sigma_n * (mask.count() as f64).sqrt();
    let projected = ball_project(&mask.apply(&shifted)?, y, radius)?;
    // both the center and the projected point vanish off Omega
    mask.apply(&projected)?.add(&mask.apply_complement(&shifted)?)
}

/// Observed-entry update for the rank-constrained solver: minimizer of
/// `lambda ||A_Omega(T) - Y||^2 + (1/2) ||X + Z_2 - T||^2`, which is
/// `(2 lambda Y + X + Z_2) / (2 lambda + 1)` on observed entries and the
/// pass-through `X + Z_2` elsewhere.
pub fn y2_update_rc(
    state: &SolverState,
    y: &DenseTensor,
    mask: &ObservationMask,
    lambda: f64,
) -> Result<DenseTensor> {
    let shifted = state.x.add(&state.z2)?;
    let two_lambda = 2.0 * lambda;
    let data = shifted
        .data()
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            if mask.is_observed(i) {
                (two_lambda * y.data()[i] + s) / (two_lambda + 1.0)
            } else {
                s
            }
        })
        .collect();
    DenseTensor::new(shifted.shape().to_vec(), data)
}

enum Method<'a> {
    Wtspn(&'a WtspnSolverConfig),
    Rc(&'a RcSolverConfig),
}

impl Method<'_> {
    fn params(&self) -> (f64, f64, usize, f64, bool) {
        match self {
            Method::Wtspn(c) => (c.lambda0, c.decay, c.max_iter, c.rel_tol, c.trace),
            Method::Rc(c) => (c.lambda0, c.decay, c.max_iter, c.rel_tol, c.trace),
        }
    }
}

/// Weighted-Schatten-p completion under the l2-ball data constraint.
/// `y` must vanish on unobserved entries (the observation model zero-fills
/// them), so the ball distance is effectively taken over observed entries.
pub fn wtspn_admm_solve(
    y: &DenseTensor,
    mask: &ObservationMask,
    config: &WtspnSolverConfig,
) -> Result<SolverResult> {
    Ok(wtspn_admm_solve_with_state(y, mask, config)?.0)
}

/// As `wtspn_admm_solve`, also returning the final ADMM state for
/// diagnostics.
pub fn wtspn_admm_solve_with_state(
    y: &DenseTensor,
    mask: &ObservationMask,
    config: &WtspnSolverConfig,
) -> Result<(SolverResult, SolverState)> {
    config.validate()?;
    config.weights.validate_for_shape(y.shape())?;
    admm_loop(y, mask, Method::Wtspn(config))
}

/// Rank-constrained least-squares completion.
pub fn rc_admm_solve(
    y: &DenseTensor,
    mask: &ObservationMask,
    config: &RcSolverConfig,
) -> Result<SolverResult> {
    Ok(rc_admm_solve_with_state(y, mask, config)?.0)
}

/// As `rc_admm_solve`, also returning the final ADMM state.
pub fn rc_admm_solve_with_state(
    y: &DenseTensor,
    mask: &ObservationMask,
    config: &RcSolverConfig,
) -> Result<(SolverResult, SolverState)> {
    config.validate(y.shape())?;
    admm_loop(y, mask, Method::Rc(config))
}

fn admm_loop(
    y: &DenseTensor,
    mask: &ObservationMask,
    method: Method,
) -> Result<(SolverResult, SolverState)> {
    if mask.shape() != y.shape() {
        return Err(TenrecError::ShapeMismatch {
            expected: mask.shape().to_vec(),
            got: y.shape().to_vec(),
        });
    }
    if mask.count() == 0 {
        return Err(TenrecError::EmptyMask);
    }
    if mask.apply_complement(y)?.l2_norm() != 0.0 {
        return Err(TenrecError::InvalidParameter(
            "observation tensor must be zero on unobserved entries".into(),
        ));
    }
    let (lambda0, decay, max_iter, rel_tol, want_trace) = method.params();
    let n = y.order();
    let mut state = SolverState::init(y, lambda0)?;
    let mut trace = Vec::new();
    let mut converged = false;
    let sigma_n = match &method {
        Method::Wtspn(c) => c.sigma_n,
        Method::Rc(_) => 0.0,
    };
    let radius = sigma_n * (mask.count() as f64).sqrt();

    while state.k < max_iter {
        let x_prev_norm = state.x.l2_norm();
        let x_new = x_update(&state, mask)?;
        let diff_norm = x_new.sub(&state.x)?.l2_norm();
        state.x = x_new;

        for mode in 1..=n {
            // one unfold feeds both the split update and the dual step
            let unf = state.x.unfold(mode)?;
            let b = unf.add(&state.z1[mode - 1])?;
            let y1_new = match &method {
                Method::Wtspn(c) => {
                    let scaled = prox_weights(&c.weights, mode, state.lambda);
                    wspn_prox(&b, &scaled, c.weights.p())?
                }
                Method::Rc(c) => rank_truncate(&b, c.target_ranks[mode - 1])?,
            };
            state.z1[mode - 1] = state.z1[mode - 1].add(&unf.sub(&y1_new)?)?;
            state.y1[mode - 1] = y1_new;
        }

        let y2_new = match &method {
            Method::Wtspn(c) => y2_update_wtspn(&state, y, mask, c.sigma_n)?,
            Method::Rc(_) => y2_update_rc(&state, y, mask, state.lambda)?,
        };
        let observed_x = mask.apply(&state.x)?;
        state.z2 = state.z2.add(&observed_x.sub(&y2_new)?)?;
        state.y2 = y2_new;

        let magnitude = state.magnitude();
        if !(magnitude <= DIVERGENCE_LIMIT) {
            return Err(TenrecError::Diverged {
                iteration: state.k,
                limit: DIVERGENCE_LIMIT,
            });
        }

        let rel_change = diff_norm / x_prev_norm.max(1e-12);
        if want_trace {
            let objective = match &method {
                Method::Wtspn(c) => wtspn_value(&state.x, &c.weights)?,
                Method::Rc(_) => observed_x.sub(y)?.l2_norm(),
            };
            let fit = observed_x.sub(y)?.l2_norm();
            trace.push(TracePoint {
                k: state.k,
                lambda: state.lambda,
                objective,
                ball_residual: (fit - radius).max(0.0),
                rel_change,
            });
        }

        state.lambda *= decay;
        state.k += 1;

        if rel_change <= rel_tol {
            converged = true;
            break;
        }
    }

    let fit = mask.apply(&state.x)?.sub(y)?.l2_norm();
    let result = SolverResult {
        iterations: state.k,
        converged,
        ball_residual: (fit - radius).max(0.0),
        trace,
        x_hat: state.x.clone(),
    };
    Ok((result, state))
}
