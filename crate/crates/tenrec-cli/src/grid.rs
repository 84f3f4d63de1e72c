//! The experiment sweep: a grid over weight schemes, alpha, p, and
//! rank-constraint settings, run against shared synthetic instances, with
//! CSV emission for the records table and per-figure series.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use tenrec_core::solver::{rc_admm_solve, wtspn_admm_solve, RcSolverConfig, WtspnSolverConfig};
use tenrec_core::synth::{recovery_error, ObservationSpec, TuckerSpec};
use tenrec_core::weighting::{scheme_weights, WeightScheme};
use tenrec_core::{Result, TenrecError};

use crate::instance::Instance;

/// Scheme identifiers as they appear in the records CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    Ideal,
    Observation,
    Uniform,
}

/// Full sweep specification. The defaults reproduce the synthetic-grid
/// protocol: alpha from 1 to 4 in steps of 0.25, p in {1/2, 2/3, 1},
/// lambda0 = 100, gamma_m = 1/N.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentGrid {
    pub tensor_specs: Vec<TuckerSpec>,
    pub obs_specs: Vec<ObservationSpec>,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "default_ps")]
    pub ps: Vec<f64>,
    #[serde(default = "default_schemes")]
    pub schemes: Vec<SchemeKind>,
    /// Per-mode rank vectors for the rank-constrained runs. When absent,
    /// each tensor spec gets its own ranks offset by {-1, 0, +1, +2}
    /// uniformly across modes, clamped to the valid range. An empty list
    /// disables the rank-constrained runs.
    #[serde(default)]
    pub rc_ranks: Option<Vec<Vec<usize>>>,
    #[serde(default = "default_lambda0")]
    pub lambda0: f64,
    #[serde(default = "default_decay")]
    pub decay: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_replicates")]
    pub replicates: u64,
    /// Report 0 in the wall_ms column so reruns are byte-identical.
    #[serde(default)]
    pub zero_wall_ms: bool,
}

fn default_alphas() -> Vec<f64> {
    (0..13).map(|i| 1.0 + 0.25 * i as f64).collect()
}

fn default_ps() -> Vec<f64> {
    vec![0.5, 2.0 / 3.0, 1.0]
}

fn default_schemes() -> Vec<SchemeKind> {
    vec![SchemeKind::Ideal, SchemeKind::Observation, SchemeKind::Uniform]
}

fn default_lambda0() -> f64 {
    100.0
}

fn default_decay() -> f64 {
    0.99
}

fn default_max_iter() -> usize {
    500
}

fn default_rel_tol() -> f64 {
    1e-7
}

fn default_replicates() -> u64 {
    5
}

impl ExperimentGrid {
    /// The four paper tensor specs (40^3 at ranks 4 and 5, 16^4 at ranks 2
    /// and 3) crossed with all four observation panels.
    pub fn paper_default() -> Self {
        let tensor_specs = vec![
            TuckerSpec { shape: vec![40, 40, 40], ranks: vec![4, 4, 4], seed: 1001 },
            TuckerSpec { shape: vec![40, 40, 40], ranks: vec![5, 5, 5], seed: 1002 },
            TuckerSpec { shape: vec![16, 16, 16, 16], ranks: vec![2, 2, 2, 2], seed: 1003 },
            TuckerSpec { shape: vec![16, 16, 16, 16], ranks: vec![3, 3, 3, 3], seed: 1004 },
        ];
        Self {
            tensor_specs,
            obs_specs: panel_obs_specs(),
            alphas: default_alphas(),
            ps: default_ps(),
            schemes: default_schemes(),
            rc_ranks: None,
            lambda0: default_lambda0(),
            decay: default_decay(),
            max_iter: default_max_iter(),
            rel_tol: default_rel_tol(),
            replicates: default_replicates(),
            zero_wall_ms: false,
        }
    }

    /// The default grid restricted to the 16^4 rank-(2,2,2,2) spec with a
    /// single replicate and zeroed timings: the deterministic CI smoke.
    pub fn smoke_16x4() -> Self {
        let mut grid = Self::paper_default();
        grid.tensor_specs = vec![TuckerSpec {
            shape: vec![16, 16, 16, 16],
            ranks: vec![2, 2, 2, 2],
            seed: 1003,
        }];
        grid.replicates = 1;
        grid.zero_wall_ms = true;
        grid
    }

    pub fn validate(&self) -> Result<()> {
        if self.tensor_specs.is_empty() || self.obs_specs.is_empty() {
            return Err(TenrecError::InvalidParameter(
                "tensor_specs and obs_specs must be nonempty".into(),
            ));
        }
        for spec in &self.tensor_specs {
            spec.validate()?;
        }
        for spec in &self.obs_specs {
            spec.validate()?;
        }
        if self.alphas.is_empty() {
            return Err(TenrecError::InvalidParameter("alphas must be nonempty".into()));
        }
        if self.alphas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(TenrecError::InvalidParameter(
                "alphas must be strictly ascending".into(),
            ));
        }
        if self.alphas.iter().any(|&a| a < 0.0) {
            return Err(TenrecError::InvalidParameter("alphas must be nonnegative".into()));
        }
        if self.ps.is_empty() || self.ps.iter().any(|&p| !(p > 0.0 && p <= 1.0)) {
            return Err(TenrecError::InvalidParameter(
                "ps must be nonempty with every value in (0, 1]".into(),
            ));
        }
        if self.replicates == 0 {
            return Err(TenrecError::InvalidParameter("replicates must be >= 1".into()));
        }
        if let Some(rc) = &self.rc_ranks {
            for ranks in rc {
                for spec in &self.tensor_specs {
                    validate_rc_ranks(ranks, &spec.shape)?;
                }
            }
        }
        Ok(())
    }

    /// The rank-constraint vectors used for a tensor spec: the explicit
    /// list when configured, otherwise offsets {-1, 0, +1, +2} from the
    /// spec's own ranks, clamped to the valid range and deduplicated.
    pub fn rc_ranks_for(&self, spec: &TuckerSpec) -> Vec<Vec<usize>> {
        if let Some(rc) = &self.rc_ranks {
            return rc.clone();
        }
        let total: usize = spec.shape.iter().product();
        let mut out: Vec<Vec<usize>> = Vec::new();
        for offset in [-1i64, 0, 1, 2] {
            let ranks: Vec<usize> = spec
                .ranks
                .iter()
                .zip(&spec.shape)
                .map(|(&r, &n)| {
                    let min_dim = n.min(total / n) as i64;
                    (r as i64 + offset).clamp(1, min_dim) as usize
                })
                .collect();
            if !out.contains(&ranks) {
                out.push(ranks);
            }
        }
        out
    }
}

fn panel_obs_specs() -> Vec<ObservationSpec> {
    let mut specs = Vec::new();
    for &missing_rate in &[0.4, 0.8] {
        for &sigma_n in &[0.0, 1.0] {
            specs.push(ObservationSpec {
                missing_rate,
                sigma_n,
                seed: 2001 + specs.len() as u64,
            });
        }
    }
    specs
}

fn validate_rc_ranks(ranks: &[usize], shape: &[usize]) -> Result<()> {
    if ranks.len() != shape.len() {
        return Err(TenrecError::InvalidParameter(format!(
            "rc rank vector {ranks:?} does not match order-{} shape",
            shape.len()
        )));
    }
    let total: usize = shape.iter().product();
    for (&r, &n) in ranks.iter().zip(shape) {
        let min_dim = n.min(total / n);
        if r < 1 || r > min_dim {
            return Err(TenrecError::InvalidParameter(format!(
                "rc rank {r} outside 1..={min_dim} for shape {shape:?}"
            )));
        }
    }
    Ok(())
}

/// One row of the records table; field order fixes the CSV header
/// `scheme,alpha,p,rc_rank,missing_rate,sigma_n,shape,ranks,seed,error,iterations,ball_residual,wall_ms`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub scheme: String,
    pub alpha: f64,
    pub p: Option<f64>,
    pub rc_rank: Option<String>,
    pub missing_rate: f64,
    pub sigma_n: f64,
    pub shape: String,
    pub ranks: String,
    pub seed: u64,
    pub error: f64,
    pub iterations: u64,
    pub ball_residual: f64,
    pub wall_ms: u64,
}

/// One solver execution; uniform and rank-constrained cells are alpha-free
/// and later replicated across the alpha grid for plotting parity.
#[derive(Debug, Clone)]
enum CellMethod {
    Ideal { alpha: f64, p: f64 },
    Observation { alpha: f64, p: f64 },
    Uniform { p: f64 },
    Rc { ranks: Vec<usize> },
}

#[derive(Debug, Clone)]
struct Cell {
    instance_idx: usize,
    method: CellMethod,
}

struct CellOutcome {
    error: f64,
    iterations: u64,
    ball_residual: f64,
    wall_ms: u64,
}

fn join_usize(v: &[usize], sep: &str) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

fn solve_cell(grid: &ExperimentGrid, inst: &Instance, method: &CellMethod) -> CellOutcome {
    let started = Instant::now();
    let solved = match method {
        CellMethod::Rc { ranks } => {
            let mut config = RcSolverConfig::new(ranks.clone());
            config.lambda0 = grid.lambda0;
            config.decay = grid.decay;
            config.max_iter = grid.max_iter;
            config.rel_tol = grid.rel_tol;
            rc_admm_solve(&inst.y, &inst.mask, &config)
        }
        wtspn => {
            let (scheme, p) = match wtspn {
                CellMethod::Ideal { alpha, p } => (WeightScheme::Ideal { alpha: *alpha }, *p),
                CellMethod::Observation { alpha, p } => {
                    (WeightScheme::Observation { alpha: *alpha }, *p)
                }
                CellMethod::Uniform { p } => (WeightScheme::Uniform, *p),
                CellMethod::Rc { .. } => unreachable!(),
            };
            scheme_weights(scheme, Some(&inst.x_org), &inst.y, &inst.mask)
                .and_then(|w| w.into_uniform_gamma_spec(p))
                .and_then(|weights| {
                    let mut config = WtspnSolverConfig::new(weights);
                    config.lambda0 = grid.lambda0;
                    config.decay = grid.decay;
                    config.max_iter = grid.max_iter;
                    config.rel_tol = grid.rel_tol;
                    config.sigma_n = inst.observation.sigma_n;
                    wtspn_admm_solve(&inst.y, &inst.mask, &config)
                })
        }
    };
    let wall_ms = started.elapsed().as_millis() as u64;
    match solved {
        Ok(result) => CellOutcome {
            error: recovery_error(&result.x_hat, &inst.x_org).unwrap_or(f64::NAN),
            iterations: result.iterations as u64,
            ball_residual: result.ball_residual,
            wall_ms,
        },
        // divergence is recorded, not fatal to the sweep
        Err(_) => CellOutcome {
            error: f64::NAN,
            iterations: 0,
            ball_residual: f64::NAN,
            wall_ms,
        },
    }
}

/// Runs every cell of the grid. Within one (tensor spec, observation spec,
/// replicate) triple all methods see the identical instance. Records come
/// back in a deterministic order fixed by grid coordinates: instances in
/// spec-major order, then the configured schemes, then rank-constrained
/// rows; uniform and rank-constrained results repeat across the alpha grid.
pub fn run_grid(grid: &ExperimentGrid) -> Result<Vec<ResultRecord>> {
    grid.validate()?;

    // shared instances, one per (spec, obs, replicate)
    let mut instances = Vec::new();
    for tspec in &grid.tensor_specs {
        for ospec in &grid.obs_specs {
            for rep in 0..grid.replicates {
                let tucker = TuckerSpec {
                    shape: tspec.shape.clone(),
                    ranks: tspec.ranks.clone(),
                    seed: tspec.seed.wrapping_add(rep),
                };
                let observation = ObservationSpec {
                    missing_rate: ospec.missing_rate,
                    sigma_n: ospec.sigma_n,
                    seed: ospec.seed.wrapping_add(rep),
                };
                instances.push(Arc::new(Instance::generate(&tucker, &observation)?));
            }
        }
    }

    // canonical cell order
    let mut cells = Vec::new();
    for (instance_idx, inst) in instances.iter().enumerate() {
        for scheme in &grid.schemes {
            match scheme {
                SchemeKind::Ideal => {
                    for &alpha in &grid.alphas {
                        for &p in &grid.ps {
                            cells.push(Cell { instance_idx, method: CellMethod::Ideal { alpha, p } });
                        }
                    }
                }
                SchemeKind::Observation => {
                    for &alpha in &grid.alphas {
                        for &p in &grid.ps {
                            cells.push(Cell {
                                instance_idx,
                                method: CellMethod::Observation { alpha, p },
                            });
                        }
                    }
                }
                SchemeKind::Uniform => {
                    for &p in &grid.ps {
                        cells.push(Cell { instance_idx, method: CellMethod::Uniform { p } });
                    }
                }
            }
        }
        for ranks in grid.rc_ranks_for(&inst.tucker) {
            cells.push(Cell { instance_idx, method: CellMethod::Rc { ranks } });
        }
    }

    // fan out; collect preserves input order
    let outcomes: Vec<CellOutcome> = cells
        .par_iter()
        .map(|cell| solve_cell(grid, &instances[cell.instance_idx], &cell.method))
        .collect();

    let mut records = Vec::new();
    for (cell, outcome) in cells.iter().zip(&outcomes) {
        let inst = &instances[cell.instance_idx];
        let base = ResultRecord {
            scheme: String::new(),
            alpha: 0.0,
            p: None,
            rc_rank: None,
            missing_rate: inst.observation.missing_rate,
            sigma_n: inst.observation.sigma_n,
            shape: join_usize(&inst.tucker.shape, "x"),
            ranks: join_usize(&inst.tucker.ranks, ","),
            seed: inst.tucker.seed,
            error: outcome.error,
            iterations: outcome.iterations,
            ball_residual: outcome.ball_residual,
            wall_ms: if grid.zero_wall_ms { 0 } else { outcome.wall_ms },
        };
        match &cell.method {
            CellMethod::Ideal { alpha, p } => records.push(ResultRecord {
                scheme: "ideal".into(),
                alpha: *alpha,
                p: Some(*p),
                ..base
            }),
            CellMethod::Observation { alpha, p } => records.push(ResultRecord {
                scheme: "observation".into(),
                alpha: *alpha,
                p: Some(*p),
                ..base
            }),
            CellMethod::Uniform { p } => {
                for &alpha in &grid.alphas {
                    records.push(ResultRecord {
                        scheme: "uniform".into(),
                        alpha,
                        p: Some(*p),
                        ..base.clone()
                    });
                }
            }
            CellMethod::Rc { ranks } => {
                for &alpha in &grid.alphas {
                    records.push(ResultRecord {
                        scheme: "rc".into(),
                        alpha,
                        rc_rank: Some(join_usize(ranks, ",")),
                        ..base.clone()
                    });
                }
            }
        }
    }
    Ok(records)
}

/// Writes records as CSV with the fixed header.
pub fn emit_csv<W: std::io::Write>(records: &[ResultRecord], out: W) -> Result<()> {
    if records.is_empty() {
        return Err(TenrecError::InvalidParameter("no records to emit".into()));
    }
    let mut writer = csv::Writer::from_writer(out);
    for record in records {
        writer
            .serialize(record)
            .map_err(|e| TenrecError::InvalidParameter(format!("csv serialization: {e}")))?;
    }
    writer
        .flush()
        .map_err(|e| TenrecError::InvalidParameter(format!("csv flush: {e}")))?;
    Ok(())
}

pub fn emit_csv_file(records: &[ResultRecord], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    emit_csv(records, std::io::BufWriter::new(file))
}

/// Reads a records CSV back.
pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<ResultRecord>> {
    let mut reader = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for row in reader.deserialize() {
        let record: ResultRecord =
            row.map_err(|e| TenrecError::InvalidParameter(format!("csv parse: {e}")))?;
        out.push(record);
    }
    Ok(out)
}

pub fn read_csv_file(path: &Path) -> Result<Vec<ResultRecord>> {
    read_csv(std::io::BufReader::new(std::fs::File::open(path)?))
}

/// One plot series: `alpha,error` pairs with errors averaged over
/// replicates, one series per (scheme, p) and per rank-constraint vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureSeries {
    /// File-name friendly label, e.g. `ideal_p0.5` or `rc_r3-3-3`.
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Extracts the series of one (missing_rate, sigma_n) panel. Every series
/// must cover the same alpha grid; gaps are an error.
pub fn emit_figure_data(
    records: &[ResultRecord],
    missing_rate: f64,
    sigma_n: f64,
) -> Result<Vec<FigureSeries>> {
    let panel: Vec<&ResultRecord> = records
        .iter()
        .filter(|r| r.missing_rate == missing_rate && r.sigma_n == sigma_n)
        .collect();
    if panel.is_empty() {
        return Err(TenrecError::InvalidParameter(format!(
            "no records for panel missing={missing_rate}, sigma={sigma_n}"
        )));
    }

    // series key in first-appearance order
    let mut labels: Vec<String> = Vec::new();
    for r in &panel {
        let label = series_label(r);
        if !labels.contains(&label) {
            labels.push(label);
        }
    }

    let alphas: BTreeSet<u64> = panel.iter().map(|r| r.alpha.to_bits()).collect();
    let mut series = Vec::new();
    for label in labels {
        let mut points = Vec::new();
        for &alpha_bits in &alphas {
            let alpha = f64::from_bits(alpha_bits);
            let errs: Vec<f64> = panel
                .iter()
                .filter(|r| series_label(r) == label && r.alpha.to_bits() == alpha_bits)
                .map(|r| r.error)
                .collect();
            if errs.is_empty() {
                return Err(TenrecError::InvalidParameter(format!(
                    "series {label} has no cell at alpha={alpha}"
                )));
            }
            points.push((alpha, errs.iter().sum::<f64>() / errs.len() as f64));
        }
        series.push(FigureSeries { label, points });
    }
    Ok(series)
}

fn series_label(r: &ResultRecord) -> String {
    match (&r.p, &r.rc_rank) {
        (_, Some(ranks)) => format!("{}_r{}", r.scheme, ranks.replace(',', "-")),
        (Some(p), None) => format!("{}_p{}", r.scheme, format_p(*p)),
        (None, None) => r.scheme.clone(),
    }
}

fn format_p(p: f64) -> String {
    if p == 1.0 {
        "1".into()
    } else if p == 0.5 {
        "0.5".into()
    } else if (p - 2.0 / 3.0).abs() < 1e-12 {
        "0.667".into()
    } else {
        format!("{p}")
    }
}

/// Writes each series as `<label>.csv` (columns `alpha,error`) under `dir`.
pub fn write_figure_series(series: &[FigureSeries], dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for s in series {
        let mut buf = String::from("alpha,error\n");
        for (alpha, error) in &s.points {
            buf.push_str(&format!("{alpha},{error}\n"));
        }
        std::fs::write(dir.join(format!("{}.csv", s.label)), buf)?;
    }
    Ok(())
}
