use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rnl_core::checks::{run_all, CheckOutcome};
use rnl_core::dump::{decode_field, encode_field};
use rnl_core::families::{
    build_family, conjugate_product, predicted_exponents, product_location, PredictedExponents,
};
use rnl_core::norms::{
    ct_hs_norm, dyadic_norm_profile, energy_l2l1, xsb_norm, ysb_norm, zsb_norm, NormParams,
};
use rnl_core::random::{rough_data, smooth_data};
use rnl_core::solver::{linear_solution, picard_solve, SolverError, TraceSummary};
use rnl_core::spectral::{free_evolution_data, SpaceTimeField, SpatialField};
use rnl_core::sweep::{family_grid, run_sweep, s_range, threshold_scan, SweepReport, ThresholdScan};
use serde::Serialize;

use crate::config::{Command, DataKind, ExperimentConfig, FieldSource};

/// Distance from an expected crossing that still counts as a match.
pub const CROSSING_TOLERANCE: f64 = 0.05;

#[derive(Debug)]
pub enum RunError {
    /// A computation or an expectation failed.
    Failed(String),
    Io { path: PathBuf, message: String },
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Failed(m) => f.write_str(m),
            RunError::Io { path, message } => write!(f, "{}: {message}", path.display()),
        }
    }
}

impl From<rnl_core::Error> for RunError {
    fn from(e: rnl_core::Error) -> Self {
        RunError::Failed(e.to_string())
    }
}

/// Files and console text produced by one command.
#[derive(Debug, Default)]
pub struct Output {
    pub json: String,
    pub csv: Option<String>,
    pub dumps: Vec<(String, Vec<u8>)>,
    /// Lines printed to stdout in addition to (or instead of) the JSON.
    pub lines: Vec<String>,
    /// Set when an expectation failed; files are still written.
    pub failure: Option<String>,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    config: &'a ExperimentConfig,
    result: T,
}

fn json<T: Serialize>(cfg: &ExperimentConfig, result: T) -> String {
    let mut s = serde_json::to_string_pretty(&Envelope { config: cfg, result })
        .expect("reports serialize");
    s.push('\n');
    s
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

#[derive(Serialize)]
struct NormEntry {
    label: String,
    #[serde(rename = "N")]
    n: Option<u64>,
    x: f64,
    y: f64,
    z: f64,
    energy: f64,
    ct_hs: f64,
    dyadic_z: Vec<(u64, f64)>,
}

fn norm_entry(label: &str, n: Option<u64>, u: &SpaceTimeField, p: &NormParams, t: f64) -> Result<NormEntry, RunError> {
    Ok(NormEntry {
        label: label.to_string(),
        n,
        x: xsb_norm(u, p),
        y: ysb_norm(u, p),
        z: zsb_norm(u, p),
        energy: energy_l2l1(u, p.s),
        ct_hs: ct_hs_norm(u, p.s, (-t, t))?,
        dyadic_z: dyadic_norm_profile(u, p),
    })
}

fn initial_data(cfg: &ExperimentConfig) -> SpatialField {
    match cfg.data {
        DataKind::Rough => rough_data(cfg.d, cfg.n_max, cfg.s, cfg.seed).scale(cfg.amplitude),
        DataKind::Smooth => smooth_data(cfg.d, cfg.n_max, cfg.width, cfg.amplitude, cfg.seed),
    }
}

fn read(path: &Path) -> Result<Vec<u8>, RunError> {
    fs::read(path).map_err(|e| RunError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn norm(cfg: &ExperimentConfig) -> Result<Output, RunError> {
    let p = cfg.norm_params().map_err(|e| RunError::Failed(e.to_string()))?;
    let mut entries = Vec::new();
    match cfg.field {
        FieldSource::Family => {
            let ns = cfg.n_values();
            let g = family_grid(&ns)?;
            for n in ns {
                let inst = build_family(cfg.family, n, &g)?;
                entries.push(norm_entry("u", Some(n), &inst.u, &p, cfg.t)?);
                entries.push(norm_entry("v", Some(n), &inst.v, &p, cfg.t)?);
            }
        }
        FieldSource::Free => {
            let g = cfg.grid().map_err(|e| RunError::Failed(e.to_string()))?;
            let c = cfg.cutoff().map_err(|e| RunError::Failed(e.to_string()))?;
            let u = free_evolution_data(&initial_data(cfg), &c, &g)?;
            entries.push(norm_entry("free", None, &u, &p, cfg.t)?);
        }
        FieldSource::Dump => {
            let path = cfg.input.as_deref().expect("validated");
            let u = decode_field(&read(path)?).map_err(|e| RunError::Io {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
            entries.push(norm_entry("dump", None, &u, &p, cfg.t)?);
        }
    }
    let csv = csv_table(
        &["label", "N", "x", "y", "z", "energy", "ct_hs"],
        entries.iter().map(|e| {
            vec![
                e.label.clone(),
                e.n.map(|n| n.to_string()).unwrap_or_default(),
                e.x.to_string(),
                e.y.to_string(),
                e.z.to_string(),
                e.energy.to_string(),
                e.ct_hs.to_string(),
            ]
        }),
    );
    Ok(Output {
        json: json(cfg, &entries),
        csv: Some(csv),
        ..Output::default()
    })
}

#[derive(Serialize)]
struct FamilyEntry {
    #[serde(rename = "N")]
    n: u64,
    product_mode: [i32; 2],
    product_center: f64,
    u_x: f64,
    v_x: f64,
    u_z: f64,
    v_z: f64,
}

#[derive(Serialize)]
struct FamilyResult {
    predicted: PredictedExponents,
    members: Vec<FamilyEntry>,
}

fn family(cfg: &ExperimentConfig) -> Result<Output, RunError> {
    let p = cfg.norm_params().map_err(|e| RunError::Failed(e.to_string()))?;
    let ns = cfg.n_values();
    let g = family_grid(&ns)?;
    let mut members = Vec::new();
    let mut dumps = Vec::new();
    for &n in &ns {
        let inst = build_family(cfg.family, n, &g)?;
        let (mode, center) = product_location(cfg.family, n);
        if cfg.dump {
            let prod = conjugate_product(&inst);
            for (name, f) in [("u", &inst.u), ("v", &inst.v), ("product", &prod)] {
                dumps.push((format!("{}_N{n}_{name}.bin", cfg.family), encode_field(f)?));
            }
        }
        members.push(FamilyEntry {
            n,
            product_mode: mode.0,
            product_center: center,
            u_x: xsb_norm(&inst.u, &p),
            v_x: xsb_norm(&inst.v, &p),
            u_z: zsb_norm(&inst.u, &p),
            v_z: zsb_norm(&inst.v, &p),
        });
    }
    let csv = csv_table(
        &["N", "product_n1", "product_n2", "product_center", "u_x", "v_x", "u_z", "v_z"],
        members.iter().map(|m| {
            vec![
                m.n.to_string(),
                m.product_mode[0].to_string(),
                m.product_mode[1].to_string(),
                m.product_center.to_string(),
                m.u_x.to_string(),
                m.v_x.to_string(),
                m.u_z.to_string(),
                m.v_z.to_string(),
            ]
        }),
    );
    let result = FamilyResult {
        predicted: predicted_exponents(cfg.family, p.s, p.b, cfg.mode),
        members,
    };
    Ok(Output {
        json: json(cfg, &result),
        csv: Some(csv),
        dumps,
        ..Output::default()
    })
}

fn sweep(cfg: &ExperimentConfig) -> Result<Output, RunError> {
    let p = cfg.norm_params().map_err(|e| RunError::Failed(e.to_string()))?;
    let ns = cfg.n_values();
    let report: SweepReport = run_sweep(cfg.family, &ns, &p, cfg.mode, &family_grid(&ns)?)?;
    Ok(Output {
        lines: vec![format!(
            "{} {}-mode: fitted slope {:.4} (predicted {:.4}), {:?}",
            report.kind, report.mode, report.fitted_slope, report.predicted_slope, report.verdict
        )],
        csv: Some(report.to_csv()),
        json: json(cfg, &report),
        ..Output::default()
    })
}

fn threshold(cfg: &ExperimentConfig) -> Result<Output, RunError> {
    let p = cfg.norm_params().map_err(|e| RunError::Failed(e.to_string()))?;
    let ns = cfg.n_values();
    let (a, e, st) = cfg.s_range;
    let s_list = s_range(a, e, st)?;
    let scan: ThresholdScan = threshold_scan(cfg.family, &s_list, &p, cfg.mode, &ns, &family_grid(&ns)?)?;
    let failure = match (scan.crossing, cfg.expect_crossing) {
        (None, _) => Some(format!("no sign change of the ratio slope in s = {a}:{e}")),
        (Some(c), Some(want)) if (c - want).abs() > CROSSING_TOLERANCE => {
            Some(format!("crossing {c:.4} is farther than {CROSSING_TOLERANCE} from {want}"))
        }
        _ => None,
    };
    let csv = csv_table(
        &["s", "fitted_slope"],
        scan.points.iter().map(|(s, k)| vec![s.to_string(), k.to_string()]),
    );
    Ok(Output {
        lines: vec![match scan.crossing {
            Some(c) => format!("{} {}-mode b={}: crossing at s = {c:.4}", scan.kind, scan.mode, scan.b),
            None => format!("{} {}-mode b={}: no crossing", scan.kind, scan.mode, scan.b),
        }],
        json: json(cfg, &scan),
        csv: Some(csv),
        failure,
        ..Output::default()
    })
}

#[derive(Serialize)]
struct SolveResult {
    data_hs_norm: f64,
    linear_z_norm: f64,
    solution_ct_hs: f64,
    diverged: bool,
    trace: TraceSummary,
}

fn solve(cfg: &ExperimentConfig) -> Result<Output, RunError> {
    let g = cfg.grid().map_err(|e| RunError::Failed(e.to_string()))?;
    let c = cfg.cutoff().map_err(|e| RunError::Failed(e.to_string()))?;
    let params = cfg.solver_params().map_err(|e| RunError::Failed(e.to_string()))?;
    let u0 = initial_data(cfg);
    let linear = linear_solution(&u0, &g, &c)?;
    let linear_z = zsb_norm(&linear, &params.norm_params());
    let (trace, diverged) = match picard_solve(&u0, &g, &params, &c) {
        Ok(t) => (t, false),
        Err(SolverError::Diverged { trace, .. }) => (*trace, true),
        Err(SolverError::Invalid(e)) => return Err(e.into()),
    };
    let t = cfg.t;
    let result = SolveResult {
        data_hs_norm: u0.hs_norm(cfg.s),
        linear_z_norm: linear_z,
        solution_ct_hs: ct_hs_norm(&trace.solution, cfg.s, (-t, t))?,
        diverged,
        trace: trace.summary(),
    };
    let mut dumps = Vec::new();
    if cfg.dump {
        for (k, f) in trace.iterates.iter().enumerate() {
            dumps.push((format!("iterate_{k:03}.bin"), encode_field(f)?));
        }
        dumps.push(("solution.bin".to_string(), encode_field(&trace.solution)?));
    }
    let csv = csv_table(
        &["iteration", "z_norm", "successive_diff"],
        result.trace.successive_diffs.iter().enumerate().map(|(k, d)| {
            vec![(k + 1).to_string(), result.trace.z_norms[k + 1].to_string(), d.to_string()]
        }),
    );
    let failure = if diverged {
        Some(format!("iteration left the ball of radius {}", result.trace.ball_radius))
    } else if !result.trace.converged {
        Some(format!("no convergence within {} iterations", cfg.max_iterations))
    } else {
        None
    };
    Ok(Output {
        lines: vec![format!(
            "T={}: {} iterations, converged {}, median ratio {}",
            t,
            result.trace.iterations,
            result.trace.converged,
            trace.median_ratio().map_or("n/a".to_string(), |m| format!("{m:.4}"))
        )],
        json: json(cfg, &result),
        csv: Some(csv),
        dumps,
        failure,
    })
}

fn check(cfg: &ExperimentConfig) -> Result<Output, RunError> {
    let results: Vec<CheckOutcome> = run_all(cfg.seed);
    let lines = results
        .iter()
        .map(|c| format!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail))
        .collect();
    let failed = results.iter().filter(|c| !c.passed).count();
    Ok(Output {
        json: json(cfg, &results),
        lines,
        failure: (failed > 0).then(|| format!("{failed} properties failed")),
        ..Output::default()
    })
}

/// Runs the selected command without touching the filesystem (except `norm field=dump`).
pub fn execute(cfg: &ExperimentConfig) -> Result<Output, RunError> {
    match cfg.command {
        Command::Norm => norm(cfg),
        Command::Family => family(cfg),
        Command::Sweep => sweep(cfg),
        Command::Threshold => threshold(cfg),
        Command::Solve => solve(cfg),
        Command::Check => check(cfg),
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), RunError> {
    fs::write(path, bytes).map_err(|e| RunError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Writes `<command>.json`, `<command>.csv` and any dumps into `dir`.
pub fn write_output(cfg: &ExperimentConfig, out: &Output, dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    fs::create_dir_all(dir).map_err(|e| RunError::Io {
        path: dir.to_path_buf(),
        message: e.to_string(),
    })?;
    let stem = serde_json::to_value(cfg.command)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .expect("command names are strings");
    let mut written = Vec::new();
    let json_path = dir.join(format!("{stem}.json"));
    write(&json_path, out.json.as_bytes())?;
    written.push(json_path);
    if let Some(csv) = &out.csv {
        let p = dir.join(format!("{stem}.csv"));
        write(&p, csv.as_bytes())?;
        written.push(p);
    }
    for (name, bytes) in &out.dumps {
        let p = dir.join(name);
        write(&p, bytes)?;
        written.push(p);
    }
    Ok(written)
}
