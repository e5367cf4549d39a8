//! Command-line front end. Every subcommand writes plot-ready CSV into the
//! output directory and runs its own validations; the process exits nonzero
//! if any of them fails.
//!
//! Each CSV starts with one `#` line echoing the resolved configuration,
//! followed by a single column-header line.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::families::{
    check_forward_condition, classify_regime, integrate_family, stationary_families, uniform_grid,
    BlochDirection, Condition, RegimeReport,
};
use crate::histories::{
    consistency_check, decoherence_functional, HistoryFamily, CONSISTENCY_TOLERANCE, MAX_TIMES,
};
use crate::info::{info_report, mub_bound_check, InputEnsemble};
use crate::ptm::{propagator_closed_form, propagator_expm, BlochState, ModelParams, Regime};
use crate::trajectories::{
    ensemble_average, ks_critical_1pct, ks_statistic, sample_family, SamplerConfig,
};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "TUNNELHIST_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "tunnelhist",
    version,
    about = "Tunneling molecule under collisional decoherence"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Decoherence rate γ.
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    /// Tunneling frequency ω.
    #[arg(long, global = true)]
    pub omega: Option<f64>,
    /// Correlation time (only used for warnings).
    #[arg(long = "tau-c", global = true)]
    pub tau_c: Option<f64>,
    /// End of the time grid.
    #[arg(long, global = true)]
    pub tmax: Option<f64>,
    /// Number of grid points.
    #[arg(long, global = true)]
    pub points: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (default: $TUNNELHIST_OUT_DIR or the current directory).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Flat TOML file with any of the keys above; flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyChoice {
    Z,
    Forward,
    Backward,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Propagator entries and evolved Bloch vectors.
    Evolve {
        /// Initial Bloch vector `x,y,z`; may be repeated.
        #[arg(long = "initial", value_parser = parse_vec3)]
        initial: Vec<[f64; 3]>,
    },
    /// Forward and backward family curves and the stationary set.
    Families {
        #[arg(long, default_value_t = 0.2)]
        theta: f64,
        #[arg(long, default_value_t = 0.0)]
        phi: f64,
    },
    /// Decoherence matrices for a z-basis family and a forward family.
    Histories {
        #[arg(long, default_value_t = 0.2)]
        theta: f64,
        #[arg(long, default_value_t = 0.0)]
        phi: f64,
    },
    /// Telegraph trajectories along a family and their ensemble average.
    Sample {
        #[arg(long, value_enum, default_value_t = FamilyChoice::Z)]
        family: FamilyChoice,
        #[arg(long)]
        trajectories: Option<usize>,
        #[arg(long, default_value_t = 0.2)]
        theta: f64,
        #[arg(long, default_value_t = 0.0)]
        phi: f64,
    },
    /// Information measures for the X and Z bases.
    Info,
    /// Named parameter sets: D2S2, tilted, overdamped, underdamped.
    Preset { name: String },
    /// Stationary equatorial roots against γ/ω.
    Scan {
        #[arg(long, default_value_t = 0.0)]
        ratio_min: f64,
        #[arg(long, default_value_t = 5.0)]
        ratio_max: f64,
    },
}

fn parse_vec3(s: &str) -> std::result::Result<[f64; 3], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    match v.as_slice() {
        [x, y, z] => Ok([*x, *y, *z]),
        _ => Err(format!("expected x,y,z, got `{s}`")),
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    preset: Option<String>,
    gamma: Option<f64>,
    omega: Option<f64>,
    tau_c: Option<f64>,
    tmax: Option<f64>,
    points: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    trajectories: Option<usize>,
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: String,
    pub params: ModelParams,
    pub t_max: f64,
    pub n_points: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub preset: Option<String>,
    pub trajectories: usize,
    /// Whether γ was set explicitly rather than defaulted.
    pub gamma_given: bool,
}

impl RunConfig {
    pub fn grid(&self) -> Vec<f64> {
        uniform_grid(self.t_max, self.n_points)
    }

    /// One-line `key=value` echo used as the first line of every file.
    pub fn header(&self) -> String {
        let mut s = format!(
            "# tunnelhist {} gamma={} omega={} tau_c={} tmax={} points={} seed={}",
            self.subcommand,
            self.params.gamma,
            self.params.omega,
            self.params.tau_c,
            self.t_max,
            self.n_points,
            self.seed
        );
        if let Some(p) = &self.preset {
            let _ = write!(s, " preset={p}");
        }
        s
    }

    fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.n_points < 2 {
            return Err(Error::InvalidConfig(format!(
                "points = {} must be >= 2",
                self.n_points
            )));
        }
        if !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "tmax = {} must be > 0",
                self.t_max
            )));
        }
        if self.trajectories == 0 {
            return Err(Error::InvalidConfig("trajectories must be >= 1".into()));
        }
        Ok(())
    }
}

/// Parameters of a named preset; `tmax` is part of the preset where the
/// natural time window is known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub gamma: f64,
    pub omega: f64,
    pub t_max: Option<f64>,
    pub time_unit: &'static str,
}

pub fn preset(name: &str) -> Result<Preset> {
    let p = match name.to_ascii_lowercase().as_str() {
        // ammonia-like D₂S₂ at atmospheric pressure, rates in s⁻¹ and rad/s
        "d2s2" => Preset {
            name: "D2S2",
            gamma: 9e9,
            omega: 176.0,
            t_max: None,
            time_unit: "s",
        },
        "tilted" => Preset {
            name: "tilted",
            gamma: 0.5,
            omega: 1.0,
            t_max: Some(10.0),
            time_unit: "1/omega",
        },
        "overdamped" => Preset {
            name: "overdamped",
            gamma: 2.0,
            omega: 0.8,
            t_max: Some(5.0),
            time_unit: "0.8/omega",
        },
        "underdamped" => {
            let eta = (400.0f64 - 1.0).sqrt();
            Preset {
                name: "underdamped",
                gamma: 1.0,
                omega: 20.0,
                t_max: Some(3.0 * 2.0 * PI / eta),
                time_unit: "20/omega",
            }
        }
        _ => return Err(Error::UnknownPreset(name.to_string())),
    };
    Ok(p)
}

fn load_file(path: &Path) -> Result<FileConfig> {
    let text = fs::read_to_string(path)?;
    toml::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
}

/// Merge defaults, the preset, the config file and flags (in increasing
/// priority).
pub fn resolve(cli: &Cli) -> Result<RunConfig> {
    let file = match &cli.common.config {
        Some(p) => load_file(p)?,
        None => FileConfig::default(),
    };
    let subcommand = match &cli.command {
        Command::Evolve { .. } => "evolve",
        Command::Families { .. } => "families",
        Command::Histories { .. } => "histories",
        Command::Sample { .. } => "sample",
        Command::Info => "info",
        Command::Preset { .. } => "preset",
        Command::Scan { .. } => "scan",
    };
    let preset_name = match &cli.command {
        Command::Preset { name } => Some(name.clone()),
        _ => file.preset.clone(),
    };
    let base = preset_name.as_deref().map(preset).transpose()?;
    let c = &cli.common;
    let gamma_given = c.gamma.is_some() || file.gamma.is_some();
    let gamma = c
        .gamma
        .or(file.gamma)
        .or(base.map(|p| p.gamma))
        .unwrap_or(2.0);
    let omega = c
        .omega
        .or(file.omega)
        .or(base.map(|p| p.omega))
        .unwrap_or(0.8);
    let tau_c = c.tau_c.or(file.tau_c).unwrap_or(0.0);
    let t_max = c
        .tmax
        .or(file.tmax)
        .or(base.and_then(|p| p.t_max))
        .unwrap_or(5.0);
    let trajectories = match &cli.command {
        Command::Sample {
            trajectories: Some(n),
            ..
        } => *n,
        _ => file.trajectories.unwrap_or(10_000),
    };
    let out_dir = c
        .out
        .clone()
        .or(file.out)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let cfg = RunConfig {
        subcommand: subcommand.to_string(),
        params: ModelParams {
            omega,
            gamma,
            tau_c,
        },
        t_max,
        n_points: c.points.or(file.points).unwrap_or(101),
        seed: c.seed.or(file.seed).unwrap_or(1),
        out_dir,
        preset: base.map(|p| p.name.to_string()),
        trajectories,
        gamma_given,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Named check performed by a subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct Validation {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Validation {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub validations: Vec<Validation>,
    /// Human-readable report printed to stdout.
    pub report: String,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.validations.iter().all(|v| v.passed)
    }

    fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.validations.push(Validation::new(name, passed, detail));
    }

    fn write(&mut self, cfg: &RunConfig, name: &str, body: &str) -> Result<()> {
        fs::create_dir_all(&cfg.out_dir)?;
        let path = cfg.out_dir.join(name);
        fs::write(&path, format!("{}\n{body}", cfg.header()))?;
        self.files.push(path);
        Ok(())
    }
}

/// Run a parsed command line.
pub fn run(cli: &Cli) -> Result<Outcome> {
    let cfg = resolve(cli)?;
    let mut out = Outcome::default();
    for w in HistoryFamily::new(
        cfg.params,
        cfg.grid(),
        vec![BlochDirection::z().decomposition(); cfg.n_points],
    )?
    .warnings()
    .into_iter()
    .take(1)
    {
        let _ = writeln!(out.report, "warning: {w}");
    }
    match &cli.command {
        Command::Evolve { initial } => cmd_evolve(&cfg, initial, &mut out)?,
        Command::Families { theta, phi } => {
            cmd_families(&cfg, &BlochDirection::new(*theta, *phi), &mut out)?
        }
        Command::Histories { theta, phi } => {
            cmd_histories(&cfg, &BlochDirection::new(*theta, *phi), &mut out)?
        }
        Command::Sample {
            family, theta, phi, ..
        } => cmd_sample(&cfg, *family, &BlochDirection::new(*theta, *phi), &mut out)?,
        Command::Info => cmd_info(&cfg, &mut out)?,
        Command::Preset { name } => cmd_preset(&cfg, name, &mut out)?,
        Command::Scan {
            ratio_min,
            ratio_max,
        } => cmd_scan(&cfg, *ratio_min, *ratio_max, &mut out)?,
    }
    Ok(out)
}

/// Parse arguments, run, print the report and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            print!("{}", outcome.report);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            let mut code = 0;
            for v in &outcome.validations {
                if !v.passed {
                    eprintln!("validation failed: {}: {}", v.name, v.detail);
                    code = 1;
                }
            }
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn cmd_evolve(cfg: &RunConfig, initial: &[[f64; 3]], out: &mut Outcome) -> Result<()> {
    let states: Vec<BlochState> = if initial.is_empty() {
        vec![[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]
    } else {
        initial.to_vec()
    }
    .into_iter()
    .map(|r| BlochState::from_bloch_vector(r.into()))
    .collect();
    if let Some(bad) = states.iter().find(|s| s.radius() > 1.0 + 1e-12) {
        return Err(Error::InvalidConfig(format!(
            "initial Bloch vector {:?} has |r| > 1",
            bad.bloch_vector()
        )));
    }
    let mut csv = String::from("t");
    for r in 0..4 {
        for c in 0..4 {
            let _ = write!(csv, ",T{r}{c}");
        }
    }
    for k in 0..states.len() {
        let _ = write!(csv, ",rx{k},ry{k},rz{k},r{k}");
    }
    csv.push('\n');
    let (mut oracle_gap, mut tp_gap, mut growth) = (0.0f64, 0.0f64, 0.0f64);
    let mut prev_r: Vec<f64> = states.iter().map(|s| s.radius()).collect();
    for &t in &cfg.grid() {
        let m = propagator_closed_form(&cfg.params, t);
        oracle_gap = oracle_gap.max(m.max_abs_diff(&propagator_expm(&cfg.params, t)));
        tp_gap = tp_gap
            .max((m.entry(0, 0) - 1.0).abs())
            .max((1..4).map(|j| m.entry(0, j).abs()).fold(0.0, f64::max));
        let _ = write!(csv, "{t}");
        for r in 0..4 {
            for c in 0..4 {
                let _ = write!(csv, ",{}", m.entry(r, c));
            }
        }
        for (k, s) in states.iter().enumerate() {
            let e = m.apply_state(s);
            let v = e.bloch_vector();
            let r = e.radius();
            growth = growth.max(r - prev_r[k]);
            prev_r[k] = r;
            let _ = write!(csv, ",{},{},{},{}", v[0], v[1], v[2], r);
        }
        csv.push('\n');
    }
    out.write(cfg, "evolve.csv", &csv)?;
    out.check(
        "closed_form_vs_expm",
        oracle_gap < 1e-9,
        format!("max |Δ| = {oracle_gap:e}"),
    );
    out.check(
        "trace_preservation",
        tp_gap == 0.0,
        format!("row-0 defect {tp_gap:e}"),
    );
    out.check(
        "bloch_contraction",
        growth <= 1e-12,
        format!("max radius increase {growth:e}"),
    );
    Ok(())
}

fn cmd_families(cfg: &RunConfig, start: &BlochDirection, out: &mut Outcome) -> Result<()> {
    // the three-rate comparison set unless γ is given explicitly
    let (omega, gammas): (f64, Vec<f64>) = if cfg.gamma_given || cfg.preset.is_some() {
        (cfg.params.omega, vec![cfg.params.gamma])
    } else {
        (1.0, vec![0.5, 1.2, 4.0])
    };
    let grid = cfg.grid();
    let mut report = String::new();
    for &g in &gammas {
        let params = ModelParams::with_tau_c(omega, g, cfg.params.tau_c)?;
        for cond in [Condition::Forward, Condition::Backward] {
            let fam = integrate_family(start, &params, cond, &grid)?;
            out.write(
                cfg,
                &format!("family_gamma{g}_omega{omega}_{cond}.csv"),
                &fam.to_csv(),
            )?;
            let kappa_ok = fam
                .samples
                .iter()
                .all(|s| s.kappa >= -1e-15 && s.kappa <= g + 1e-15);
            out.check(
                &format!("kappa_range[{g},{cond}]"),
                kappa_ok,
                "κ ∈ [0, γ]".into(),
            );
            let check = match cond {
                Condition::Forward => {
                    check_forward_condition(&fam.decompositions(), &params, &grid)?
                }
                Condition::Backward => crate::families::check_backward_condition(
                    &fam.decompositions(),
                    &params,
                    &grid,
                )?,
            };
            out.check(
                &format!("{cond}_condition[{g}]"),
                check.holds,
                format!("max residual {:e}", check.max_residual),
            );
        }
        let _ = writeln!(report, "{}", stationary_report(&params));
    }
    out.write(cfg, "stationary.txt", &report)?;
    out.report.push_str(&report);
    Ok(())
}

fn stationary_report(params: &ModelParams) -> String {
    let s = stationary_families(params);
    let mut r = format!(
        "gamma={} omega={} regime={} kappa_z={}",
        params.gamma,
        params.omega,
        params.regime(),
        s.kappa_z
    );
    if let (Some(kx), Some(ky)) = (s.kappa_x, s.kappa_y) {
        let _ = write!(r, " kappa_x={kx} kappa_y={ky}");
    }
    for root in &s.equatorial {
        let _ = write!(r, " phi[{},{:?}]={}", root.condition, root.kind, root.phi);
    }
    match classify_regime(params) {
        RegimeReport::Underdamped { eta, period } => {
            let _ = write!(r, " eta={eta} stroboscopic_period={period}");
        }
        RegimeReport::Overdamped {
            slow_rate,
            fast_rate,
        } => {
            let _ = write!(r, " decay_rates={slow_rate},{fast_rate}");
        }
        RegimeReport::Critical { .. } => {}
    }
    r
}

fn cmd_histories(cfg: &RunConfig, start: &BlochDirection, out: &mut Outcome) -> Result<()> {
    let n = cfg.n_points.clamp(2, MAX_TIMES);
    let times = uniform_grid(cfg.t_max, n);
    let rho = BlochState::maximally_mixed();
    let z = HistoryFamily::new(
        cfg.params,
        times.clone(),
        vec![BlochDirection::z().decomposition(); n],
    )?;
    let fam = integrate_family(start, &cfg.params, Condition::Forward, &times)?;
    let fwd = HistoryFamily::from_trajectory(&fam)?;
    let mut report = String::new();
    for (label, family) in [("z", &z), ("forward", &fwd)] {
        let d = decoherence_functional(family, &rho)?;
        let c = consistency_check(&d, CONSISTENCY_TOLERANCE);
        out.write(cfg, &format!("decoherence_{label}.csv"), &d.to_csv())?;
        let _ = writeln!(
            report,
            "family={label} times={n} max_off_diagonal={:e} consistent={} total_weight={}",
            c.max_off_diagonal, c.passed, c.total_weight
        );
        out.check(
            &format!("consistency[{label}]"),
            c.passed,
            format!("max off-diagonal {:e}", c.max_off_diagonal),
        );
        out.check(
            &format!("normalization[{label}]"),
            (c.total_weight - 1.0).abs() < 1e-10,
            format!("total weight {}", c.total_weight),
        );
        out.check(
            &format!("hermiticity[{label}]"),
            d.hermiticity_defect() < 1e-12,
            format!("{:e}", d.hermiticity_defect()),
        );
    }
    out.write(cfg, "histories.txt", &report)?;
    out.report.push_str(&report);
    Ok(())
}

fn cmd_sample(
    cfg: &RunConfig,
    choice: FamilyChoice,
    start: &BlochDirection,
    out: &mut Outcome,
) -> Result<()> {
    let grid = cfg.grid();
    let (dir, cond) = match choice {
        FamilyChoice::Z => (BlochDirection::z(), Condition::Forward),
        FamilyChoice::Forward => (*start, Condition::Forward),
        FamilyChoice::Backward => (*start, Condition::Backward),
    };
    let fam = integrate_family(
        &dir,
        &cfg.params,
        cond,
        &uniform_grid(cfg.t_max, cfg.n_points.max(401)),
    )?;
    // start from the end of the diameter so the ensemble carries a signal
    let sampler = SamplerConfig::new(cfg.seed, cfg.trajectories, 1.0)?;
    let trajs = sample_family(&fam, &sampler)?;
    for (i, t) in trajs.iter().take(5).enumerate() {
        out.write(cfg, &format!("trajectory_{i}.csv"), &t.to_csv())?;
    }
    let series = ensemble_average(&trajs, &fam, &grid);
    out.write(cfg, "ensemble.csv", &series.to_csv())?;

    let det = crate::trajectories::rate_equation_solution(&fam, 1.0, &grid)?;
    let dev = series
        .points
        .iter()
        .zip(&det)
        .map(|(p, q)| (p.p0 - q).abs())
        .fold(0.0, f64::max);
    let bound = 0.02f64.max(4.0 / (cfg.trajectories as f64).sqrt());
    out.check(
        "ensemble_vs_master",
        dev < bound,
        format!("max |Δp0| = {dev:.4} (bound {bound:.4})"),
    );

    let mut report = format!(
        "trajectories={} family={choice:?} max_deviation={dev:.5}",
        cfg.trajectories
    );
    if choice == FamilyChoice::Z {
        let gamma = cfg.params.gamma;
        let occupation = trajs.iter().map(|t| t.occupation0()).sum::<f64>() / trajs.len() as f64;
        let _ = write!(report, " mean_occupation0={occupation:.5}");
        if gamma > 0.0 {
            let w: Vec<f64> = trajs
                .iter()
                .flat_map(|t| t.waiting_times().into_iter().take(1))
                .collect();
            if !w.is_empty() {
                // flips are only observed inside the window
                let norm = 1.0 - (-gamma * cfg.t_max).exp();
                let d = ks_statistic(&w, |x| (1.0 - (-gamma * x).exp()) / norm);
                let crit = ks_critical_1pct(w.len());
                let _ = write!(report, " ks={d:.5} ks_crit_1pct={crit:.5}");
                out.check(
                    "waiting_time_exponential",
                    d < crit,
                    format!("KS {d:.5} vs {crit:.5}"),
                );
            }
        }
    }
    report.push('\n');
    out.write(cfg, "sample.txt", &report)?;
    out.report.push_str(&report);
    Ok(())
}

fn cmd_info(cfg: &RunConfig, out: &mut Outcome) -> Result<()> {
    let grid = cfg.grid();
    let rep = info_report(&cfg.params, &grid)?;
    out.write(cfg, "info.csv", &rep.to_csv())?;
    let (x, z) = (InputEnsemble::x(), InputEnsemble::z());
    let slack = grid
        .par_iter()
        .map(|&t| mub_bound_check(&z, &x, &cfg.params, t))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    out.check("mub_bound", slack >= -1e-9, format!("min slack {slack:e}"));
    let cross = rep
        .rows
        .iter()
        .map(|r| (r.chi_z_direct + r.chi_x_comp - r.chi_z_comp - r.chi_x_direct).abs())
        .fold(0.0, f64::max);
    out.check(
        "cross_equality",
        cross < 1e-8,
        format!("max residual {cross:e}"),
    );
    let in_range = rep.rows.iter().all(|r| {
        [r.chi_x_direct, r.chi_z_direct, r.chi_x_comp, r.chi_z_comp]
            .iter()
            .all(|v| (-1e-12..=1.0 + 1e-12).contains(v))
    });
    out.check(
        "chi_in_unit_interval",
        in_range,
        "all χ̂ in [0, 1] bits".into(),
    );
    let _ = writeln!(
        out.report,
        "info rows={} min_mub_slack={slack:e} cross_equality={cross:e}",
        rep.rows.len()
    );
    Ok(())
}

/// Regime summary for a preset.
#[derive(Debug, Clone, PartialEq)]
pub struct PresetReport {
    pub name: String,
    pub gamma: f64,
    pub omega: f64,
    pub ratio: f64,
    pub regime: Regime,
    pub kappa_x: Option<f64>,
    pub kappa_y: Option<f64>,
    pub kappa_z: f64,
    /// `ω²/4γ`, the strong-decoherence estimate of `κ_x`.
    pub kappa_x_estimate: f64,
}

pub fn preset_report(name: &str) -> Result<PresetReport> {
    let p = preset(name)?;
    let params = ModelParams::new(p.omega, p.gamma)?;
    let s = stationary_families(&params);
    Ok(PresetReport {
        name: p.name.to_string(),
        gamma: p.gamma,
        omega: p.omega,
        ratio: p.gamma / p.omega,
        regime: params.regime(),
        kappa_x: s.kappa_x,
        kappa_y: s.kappa_y,
        kappa_z: s.kappa_z,
        kappa_x_estimate: p.omega * p.omega / (4.0 * p.gamma),
    })
}

fn cmd_preset(cfg: &RunConfig, name: &str, out: &mut Outcome) -> Result<()> {
    let p = preset(name)?;
    let r = preset_report(name)?;
    let mut text = format!(
        "preset={} gamma={} omega={} gamma_over_omega={:.4e} regime={} kappa_z={} time_unit={}",
        r.name, r.gamma, r.omega, r.ratio, r.regime, r.kappa_z, p.time_unit
    );
    if let (Some(kx), Some(ky)) = (r.kappa_x, r.kappa_y) {
        let _ = write!(
            text,
            " kappa_x={kx:.6e} kappa_x_estimate={:.6e} kappa_y={ky:.6e} kappa_x_over_kappa_z={:.3e}",
            r.kappa_x_estimate,
            kx / r.kappa_z
        );
    }
    text.push('\n');
    out.write(cfg, &format!("preset_{}.txt", r.name), &text)?;
    out.report.push_str(&text);
    out.check(
        "preset_params",
        cfg.params.gamma == p.gamma && cfg.params.omega == p.omega,
        "loaded".into(),
    );
    match r.name.as_str() {
        "D2S2" => {
            out.check(
                "strong_decoherence",
                r.regime == Regime::Overdamped,
                format!("{}", r.regime),
            );
            let kx = r.kappa_x.unwrap_or(f64::NAN);
            out.check(
                "kappa_x_estimate",
                (kx / r.kappa_x_estimate - 1.0).abs() < 1e-6,
                format!("{kx:e} vs {:e}", r.kappa_x_estimate),
            );
        }
        "overdamped" | "underdamped" => cmd_info(cfg, out)?,
        "tilted" => cmd_families(cfg, &BlochDirection::new(0.2, 0.0), out)?,
        _ => {}
    }
    Ok(())
}

fn cmd_scan(cfg: &RunConfig, ratio_min: f64, ratio_max: f64, out: &mut Outcome) -> Result<()> {
    if !(ratio_max > ratio_min) || ratio_min < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "bad ratio range [{ratio_min}, {ratio_max}]"
        )));
    }
    let omega = cfg.params.omega.max(f64::MIN_POSITIVE);
    let ratios = uniform_grid(ratio_max - ratio_min, cfg.n_points)
        .into_iter()
        .map(|r| r + ratio_min)
        .collect::<Vec<_>>();
    let rows: Vec<String> = ratios
        .par_iter()
        .map(|&ratio| {
            let params = ModelParams {
                omega,
                gamma: ratio * omega,
                tau_c: cfg.params.tau_c,
            };
            let s = stationary_families(&params);
            let mut cells = vec![String::new(); 4];
            for (i, root) in s.equatorial.iter().enumerate().take(4) {
                cells[i] = root.phi.to_string();
            }
            if s.equatorial.len() == 2 {
                // coalesced: one forward and one backward root
                cells = vec![
                    cells[0].clone(),
                    cells[0].clone(),
                    cells[1].clone(),
                    cells[1].clone(),
                ];
            }
            let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            format!(
                "{ratio},{},{},{},{}\n",
                s.equatorial.len(),
                cells.join(","),
                fmt(s.kappa_x),
                fmt(s.kappa_y)
            )
        })
        .collect();
    let mut csv = String::from(
        "gamma_over_omega,n_roots,phi_fwd_x,phi_fwd_y,phi_bwd_x,phi_bwd_y,kappa_x,kappa_y\n",
    );
    rows.iter().for_each(|r| csv.push_str(r));
    out.write(cfg, "scan.csv", &csv)?;
    let counts_ok = ratios.iter().zip(&rows).all(|(&ratio, row)| {
        let n: usize = row
            .split(',')
            .nth(1)
            .and_then(|s| s.parse().ok())
            .unwrap_or(usize::MAX);
        let params = ModelParams {
            omega,
            gamma: ratio * omega,
            tau_c: 0.0,
        };
        match params.regime() {
            Regime::Overdamped => n == 4,
            Regime::Critical => n == 2 || ratio == 0.0,
            Regime::Underdamped => n == 0,
        }
    });
    out.check(
        "root_counts",
        counts_ok,
        "4 / 2 / 0 roots above / at / below γ = ω".into(),
    );
    let _ = writeln!(out.report, "scan points={}", ratios.len());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("tunnelhist").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_override_config_and_preset() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = dir.path().join("run.toml");
        fs::write(
            &cfg_path,
            "preset = \"overdamped\"\nomega = 0.5\npoints = 7\n",
        )
        .unwrap();
        let c = cli(&[
            "info",
            "--config",
            cfg_path.to_str().unwrap(),
            "--points",
            "9",
        ]);
        let r = resolve(&c).unwrap();
        assert_eq!(r.params.gamma, 2.0);
        assert_eq!(r.params.omega, 0.5);
        assert_eq!(r.n_points, 9);
        assert!(r
            .header()
            .starts_with("# tunnelhist info gamma=2 omega=0.5"));
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(resolve(&cli(&["info", "--points", "1"])).is_err());
        assert!(resolve(&cli(&["info", "--tmax", "0"])).is_err());
        assert!(resolve(&cli(&["info", "--gamma=-1"])).is_err());
        assert!(matches!(
            resolve(&cli(&["preset", "nope"])),
            Err(Error::UnknownPreset(_))
        ));
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.toml");
        fs::write(&p, "colour = 3\n").unwrap();
        assert!(matches!(
            resolve(&cli(&["info", "--config", p.to_str().unwrap()])),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn vector_parser() {
        assert_eq!(parse_vec3("1, 0,0.5").unwrap(), [1.0, 0.0, 0.5]);
        assert!(parse_vec3("1,2").is_err());
    }

    #[test]
    fn d2s2_report() {
        let r = preset_report("D2S2").unwrap();
        assert!((r.ratio / 5.11e7 - 1.0).abs() < 1e-3);
        assert_eq!(r.regime, Regime::Overdamped);
        let kx = r.kappa_x.unwrap();
        assert!((kx - 8.604e-7).abs() < 1e-9);
        assert!(kx / r.kappa_z < 1e-15);
    }
}
