//! Orchestration of a configured run and emission of its artifacts.

use std::path::{Path, PathBuf};
use std::time::Instant;

use parobs_core::analysis::{count_rings, RingProfile};
use parobs_core::grid::{DensityField, GridKind};
use parobs_core::optimizer::{saddle_check, Residuals};
use parobs_core::spectral_basis::BasisSpec;
use parobs_core::stationarity::{grouped_multipliers, radial_mask, strict_gap_report, sweep, GapReport};
use parobs_core::{Problem, StationaritySweep};
use serde::Serialize;

use crate::checks::{run_checks, ChecksReport};
use crate::config::{Mode, RunConfig};
use crate::output::{mask_csv, pgm, write_atomic};

pub const TOOL_NAME: &str = "parobs";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Multipliers below this are not reported as active.
const ACTIVE: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Core(#[from] parobs_core::Error),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl RunError {
    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        use parobs_core::Error as E;
        match self {
            RunError::Io { .. } => "io",
            RunError::Core(e) => match e {
                E::Domain(_) => "domain",
                E::Precision(_) => "precision",
                E::RootFinding { .. } => "root-finding",
                E::Config(_) => "config",
                E::Precondition(_) => "precondition",
                E::Overflow { .. } => "overflow",
                E::Solver(_) => "solver",
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridInfo {
    #[serde(flatten)]
    pub kind: GridKind,
    pub cells: usize,
    pub total_measure: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeGroup {
    pub eigenvalue: f64,
    /// Multiplier summed over the modes sharing this eigenvalue.
    pub multiplier: f64,
    pub modes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Files {
    pub csv: String,
    pub pgm: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub order: usize,
    pub constraints: usize,
    pub objective: f64,
    pub level: f64,
    pub active_modes: Vec<ModeGroup>,
    pub fractional_cell_count: usize,
    pub pruned_modes: usize,
    pub iterations: usize,
    pub residuals: Residuals,
    pub saddle_point_verified: bool,
    pub mask_measure: f64,
    pub files: Files,
    pub rings: Option<RingProfile>,
    pub strict_gap: Option<GapReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StationarityReport {
    pub orders: Vec<usize>,
    pub detected_n0: Option<usize>,
    pub tolerance: f64,
    pub differences: Vec<Vec<f64>>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Invariant {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub tool: Tool,
    pub config: RunConfig,
    pub grid: Option<GridInfo>,
    pub basis_size: Option<usize>,
    pub solves: Vec<SolveReport>,
    pub stationarity: Option<StationarityReport>,
    pub checks: Option<ChecksReport>,
    pub invariants: Vec<Invariant>,
    pub success: bool,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Timing {
    pub stages: Vec<(String, f64)>,
    pub total_seconds: f64,
}

impl Timing {
    fn record(&mut self, stage: &str, since: Instant) {
        let s = since.elapsed().as_secs_f64();
        self.stages.push((stage.to_string(), s));
        self.total_seconds += s;
    }
}

/// Everything a run produced.
#[derive(Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub timing: Timing,
    pub files: Vec<PathBuf>,
    /// Kept for callers that inspect the sweep directly.
    pub sweep: Option<StationaritySweep>,
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io { path: path.to_path_buf(), source }
}

struct Writer {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<(), RunError> {
        let path = self.dir.join(name);
        write_atomic(&path, bytes).map_err(io(&path))?;
        self.files.push(path);
        Ok(())
    }
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s.into_bytes()
}

/// Runs the configured computation and writes its artifacts to `config.out`.
pub fn run(config: &RunConfig) -> Result<RunOutcome, RunError> {
    std::fs::create_dir_all(&config.out).map_err(io(&config.out))?;
    let mut writer = Writer { dir: config.out.clone(), files: Vec::new() };
    let mut timing = Timing::default();

    if config.mode == Mode::Checks {
        let t = Instant::now();
        let checks = run_checks();
        timing.record("checks", t);
        let invariants = checks
            .checks
            .iter()
            .map(|c| Invariant { name: c.name.clone(), passed: c.passed, detail: c.detail.clone() })
            .collect();
        let report = finish(config, None, None, Vec::new(), None, Some(checks), invariants);
        writer.put("report.json", &to_json(&report))?;
        writer.put("timing.json", &to_json(&timing))?;
        return Ok(RunOutcome { report, timing, files: writer.files, sweep: None });
    }

    let t = Instant::now();
    let mut spec = BasisSpec::new(config.domain.kind(), config.alpha, config.max_order());
    spec.boundary = config.boundary.kind();
    let problem = Problem::new(&spec, config.horizon, config.volume_fraction, config.res, config.max_order())?;
    timing.record("setup", t);
    log::info!("{config}: {} cells, {} modes", problem.grid.len(), problem.costs.n_modes());

    let t = Instant::now();
    let many = config.n_list.len() > 1 && matches!(config.mode, Mode::Sweep | Mode::Radial);
    let sweep_result = if many || config.mode == Mode::Sweep {
        Some(sweep(&problem, &config.n_list, config.tol_stat)?)
    } else {
        None
    };
    let solved = match &sweep_result {
        Some(sw) => sw
            .entries
            .iter()
            .map(|e| (e.order, problem.rows_for_order(e.order), e.design.clone(), e.mask.clone(), e.rings.clone()))
            .collect(),
        None => {
            let s = problem.solve_order(config.order, None)?;
            vec![(s.order, s.rows, s.design, s.level_set.mask, None)]
        }
    };
    timing.record("solve", t);

    let t = Instant::now();
    let per_order_files = sweep_result.is_some();
    let last = solved.len() - 1;
    let mut solves = Vec::with_capacity(solved.len());
    let mut invariants = Vec::new();
    for (i, (order, rows, design, mask, rings)) in solved.into_iter().enumerate() {
        let costs = problem.costs.select(&rows);
        let modes: Vec<_> = rows.iter().map(|&r| problem.basis.modes[problem.costs.mode_positions[r]].clone()).collect();
        let groups = grouped_multipliers(&design, &costs.eigenvalues)
            .into_iter()
            .filter(|g| g.1 > ACTIVE)
            .map(|(eigenvalue, multiplier, members)| ModeGroup {
                eigenvalue,
                multiplier,
                modes: members.iter().map(|&m| modes[m].index.to_string()).collect(),
            })
            .collect();
        let rings = rings.or_else(|| ring_profile(&problem, &mask));
        let scalar = modes.iter().all(|m| m.is_scalar()) && !matches!(problem.grid.kind, GridKind::Radial { .. });
        let strict_gap = if scalar && i == last {
            Some(strict_gap_report(&problem.grid, &mask, &modes, config.horizon)?)
        } else {
            None
        };
        let saddle = saddle_check(&design, &costs, &problem.grid);
        let (csv_name, pgm_name) = if per_order_files {
            (format!("mask_N{order}.csv"), format!("mask_N{order}.pgm"))
        } else {
            ("mask.csv".to_string(), "mask.pgm".to_string())
        };
        writer.put(&csv_name, mask_csv(&mask, &problem.grid).as_bytes())?;
        writer.put(&pgm_name, pgm(&mask, &problem.grid).as_bytes())?;

        let report = SolveReport {
            order,
            constraints: rows.len(),
            objective: design.objective,
            level: design.level,
            active_modes: groups,
            fractional_cell_count: design.fractional_cell_count,
            pruned_modes: design.pruned.len(),
            iterations: design.iterations,
            residuals: design.residuals,
            saddle_point_verified: saddle.passed,
            mask_measure: problem.grid.integrate(&mask.values),
            files: Files { csv: csv_name, pgm: pgm_name },
            rings,
            strict_gap,
        };
        invariants.extend(solve_invariants(&problem, &costs.gammas, &report));
        solves.push(report);
    }
    if solves.len() > 1 {
        let rising: Vec<String> = solves
            .windows(2)
            .filter(|w| w[1].objective > w[0].objective * (1.0 + 1e-10))
            .map(|w| format!("N={}", w[1].order))
            .collect();
        invariants.push(Invariant {
            name: "objective_nonincreasing".into(),
            passed: rising.is_empty(),
            detail: format!("increases at [{}]", rising.join(", ")),
        });
    }
    timing.record("analysis", t);

    let stationarity = sweep_result.as_ref().map(|sw| StationarityReport {
        orders: sw.entries.iter().map(|e| e.order).collect(),
        detected_n0: sw.detected_n0,
        tolerance: sw.tolerance,
        differences: sw.differences.clone(),
        note: sw.detection_note.clone(),
    });
    let grid = GridInfo {
        kind: problem.grid.kind,
        cells: problem.grid.len(),
        total_measure: problem.grid.total_measure(),
    };
    let report = finish(
        config,
        Some(grid),
        Some(problem.basis.len()),
        solves,
        stationarity,
        None,
        invariants,
    );
    let t = Instant::now();
    writer.put("report.json", &to_json(&report))?;
    timing.record("write", t);
    writer.put("timing.json", &to_json(&timing))?;
    Ok(RunOutcome { report, timing, files: writer.files, sweep: sweep_result })
}

fn finish(
    config: &RunConfig,
    grid: Option<GridInfo>,
    basis_size: Option<usize>,
    solves: Vec<SolveReport>,
    stationarity: Option<StationarityReport>,
    checks: Option<ChecksReport>,
    invariants: Vec<Invariant>,
) -> RunReport {
    let success = invariants.iter().all(|i| i.passed);
    RunReport {
        tool: Tool { name: TOOL_NAME, version: TOOL_VERSION },
        config: config.clone(),
        grid,
        basis_size,
        solves,
        stationarity,
        checks,
        invariants,
        success,
    }
}

fn ring_profile(problem: &Problem, mask: &DensityField) -> Option<RingProfile> {
    match problem.grid.kind {
        GridKind::Radial { .. } => Some(count_rings(&mask.values)),
        GridKind::Polar { .. } => radial_mask(&problem.grid, mask).map(|r| count_rings(&r)),
        GridKind::Tensor { .. } => None,
    }
}

fn solve_invariants(problem: &Problem, gammas: &[f64], s: &SolveReport) -> Vec<Invariant> {
    let l = problem.volume_fraction;
    let g1 = gammas.iter().cloned().fold(f64::INFINITY, f64::min);
    let obj = s.objective;
    let cell = problem.grid.weights.iter().cloned().fold(0.0, f64::max);
    let target = l * problem.grid.total_measure();
    let r = s.residuals;
    let tag = |name: &str| format!("{name}[N={}]", s.order);
    let mut out = vec![
        Invariant {
            name: tag("bounds_sandwich"),
            passed: obj >= l * g1 * (1.0 - 1e-9) && obj <= g1 * (1.0 + 1e-12),
            detail: format!("{:.6e} <= {obj:.6e} <= {g1:.6e}", l * g1),
        },
        Invariant {
            name: tag("bang_bang"),
            passed: s.fractional_cell_count <= s.constraints,
            detail: format!("{} fractional cells, {} constraints", s.fractional_cell_count, s.constraints),
        },
        Invariant {
            name: tag("lp_residuals"),
            passed: r.primal <= 1e-9 && r.dual <= 1e-9 && r.gap.abs() <= 1e-9 * (1.0 + obj),
            detail: format!("primal {:.2e}, dual {:.2e}, duality gap {:.2e}", r.primal, r.dual, r.gap),
        },
        Invariant {
            name: tag("saddle_point"),
            passed: s.saddle_point_verified,
            detail: "multipliers and active set are consistent".into(),
        },
        Invariant {
            name: tag("mask_measure"),
            passed: (s.mask_measure - target).abs() <= cell * (1.0 + 1e-9),
            detail: format!("{:.6e} against {target:.6e}", s.mask_measure),
        },
    ];
    if let Some(g) = &s.strict_gap {
        out.push(Invariant {
            name: tag("gap_ordering"),
            passed: g.gap >= -1e-10,
            detail: format!("C_rand {:.6e}, C_TN {:.6e}", g.randomized, g.deterministic),
        });
    }
    out
}
