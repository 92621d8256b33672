//! Command-line driver: configuration ingestion, subcommand orchestration,
//! sweep caching, and CSV/JSON/SVG emission.
//!
//! Exit codes: 0 all requested points succeeded; 1 usage or configuration
//! error; 2 numerical failure; 3 sweep completed with failed points;
//! 4 output I/O failure.

mod config;
mod envelope;
mod io;
mod svg;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use std::path::PathBuf;
use std::time::Instant;

use switch_core::fcs::{
    self, build_tilted, current_stats, legendre, steady_states, theta, CurrentOptions, LdfCurve,
    ThetaSample,
};
use switch_core::hilbert::build_space;
use switch_core::model::{build_model, derived_rates, LindbladModel};
use switch_core::symmetry::{build_swap, check_strong_symmetry};
use switch_core::trajectory::{
    dark_transition_rate, run_ensemble, segment_periods, suggested_threshold, InitialState,
    JumpRecord, TrajectoryConfig,
};

use config::RunConfig;
use envelope::ResultEnvelope;
use io::{csv_number, write_atomic, write_csv, PointCache};

const EXIT_NUMERICAL: i32 = 2;
const EXIT_PARTIAL: i32 = 3;
const EXIT_IO: i32 = 4;

#[derive(Parser)]
#[command(
    name = "switch",
    about = "Photon-current statistics of a laser-controlled two-atom cavity chain",
    after_help = "Exit codes: 0 success, 1 usage/config, 2 numerical failure, \
                  3 partial sweep failure, 4 I/O failure.\n\
                  The output directory comes from --out-dir, then $SWITCH_OUT_DIR, \
                  then the [output] config block."
)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Named parameter preset replacing the [params] block
    /// (laser-on, laser-off, telegraph, blockade-sweep, equilibrium).
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Field override, e.g. --set params.hop=5e-3 (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory override.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the scaled cumulant generating function over the s grid.
    Theta {
        /// Additional presets to compute and plot alongside.
        #[arg(long = "compare", value_name = "PRESET")]
        compare: Vec<String>,
        /// Emit an SVG plot regardless of the config flag.
        #[arg(long)]
        svg: bool,
    },
    /// Legendre-transform a theta curve into the current rate function.
    Gq {
        /// Read the curve from a theta CSV instead of recomputing it.
        #[arg(long, value_name = "CSV")]
        from_theta: Option<PathBuf>,
        #[arg(long)]
        svg: bool,
    },
    /// Mean, one-sided, and second-moment current statistics at s = 0.
    Current,
    /// Steady states from the Liouvillian null space.
    Steady,
    /// Strong-symmetry commutator check against the atom-swap unitary.
    Symmetry,
    /// Sweep the hopping rate; cached per point by config hash.
    Sweep {
        #[arg(long)]
        svg: bool,
    },
    /// Quantum-jump Monte Carlo ensemble with dark/bright segmentation.
    Traj,
    /// Print the assembled model summary as JSON.
    ModelDump,
}

fn main() {
    let cli = Cli::parse();
    // Dense eigensolves keep LAPACK scratch on the stack; run everything on
    // generously sized threads.
    let worker = std::thread::Builder::new()
        .stack_size(64 << 20)
        .spawn(move || run(cli))
        .expect("spawning worker thread");
    let code = match worker.join().expect("worker thread panicked") {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.is::<IoFailure>() {
                EXIT_IO
            } else {
                1
            }
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32> {
    let mut cfg = config::load(cli.config.as_deref(), cli.preset.as_deref(), &cli.set)?;
    if let Some(dir) = cli
        .out_dir
        .or_else(|| std::env::var_os("SWITCH_OUT_DIR").map(PathBuf::from))
    {
        cfg.output.dir = dir;
    }

    let mut pool = rayon::ThreadPoolBuilder::new().stack_size(64 << 20);
    if cfg.sweep.workers > 0 {
        pool = pool.num_threads(cfg.sweep.workers);
    }
    pool.build_global().ok();

    for warning in cfg.params.regime_warnings() {
        eprintln!("warning: {warning}");
    }

    match cli.command {
        Command::Theta { compare, svg } => cmd_theta(&cfg, &compare, svg),
        Command::Gq { from_theta, svg } => cmd_gq(&cfg, from_theta.as_deref(), svg),
        Command::Current => cmd_current(&cfg),
        Command::Steady => cmd_steady(&cfg),
        Command::Symmetry => cmd_symmetry(&cfg),
        Command::Sweep { svg } => cmd_sweep(&cfg, svg),
        Command::Traj => cmd_traj(&cfg),
        Command::ModelDump => cmd_model_dump(&cfg),
    }
}


/// Comment lines carrying the parameter snapshot and config hash, embedded
/// in every CSV output.
fn csv_meta(cfg: &RunConfig) -> Vec<String> {
    vec![
        format!("config: {}", envelope::config_hash(cfg)),
        format!(
            "params: {}",
            serde_json::to_string(&cfg.params).expect("params serialize")
        ),
        format!("tool_version: {}", envelope::TOOL_VERSION),
    ]
}

fn build(cfg: &RunConfig) -> Result<LindbladModel> {
    let space = build_space(&cfg.truncation.mode_spec())?;
    Ok(build_model(&space, &cfg.params)?)
}

/// Sample theta per grid point, keeping per-point failures as flagged rows.
fn sample_curve(
    cfg: &RunConfig,
    model: &LindbladModel,
) -> (Vec<(f64, Result<ThetaSample, String>)>, bool) {
    let solver = cfg.solver();
    let mut rows: Vec<(usize, f64, Result<ThetaSample, String>)> = cfg
        .s_grid()
        .par_iter()
        .enumerate()
        .map(|(k, &s)| {
            let r = theta(model, s, &solver).map_err(|e| e.to_string());
            (k, s, r)
        })
        .collect();
    rows.sort_by_key(|(k, _, _)| *k);
    let any_failed = rows.iter().any(|(_, _, r)| r.is_err());
    (rows.into_iter().map(|(_, s, r)| (s, r)).collect(), any_failed)
}

fn theta_rows(samples: &[(f64, Result<ThetaSample, String>)]) -> Vec<Vec<String>> {
    samples
        .iter()
        .map(|(s, r)| match r {
            Ok(t) => vec![
                csv_number(*s),
                csv_number(t.theta),
                csv_number(t.residual),
                "ok".into(),
            ],
            Err(e) => vec![
                csv_number(*s),
                "nan".into(),
                "nan".into(),
                format!("failed: {}", e.replace(',', ";")),
            ],
        })
        .collect()
}

fn cmd_theta(cfg: &RunConfig, compare: &[String], force_svg: bool) -> Result<i32> {
    let started = Instant::now();
    let model = build(cfg)?;
    let (samples, mut failed) = sample_curve(cfg, &model);
    let out = &cfg.output.dir;
    write_csv(
        &out.join("theta.csv"),
        "theta-v1",
        &csv_meta(cfg),
        &["s", "theta", "residual", "status"],
        &theta_rows(&samples),
    )
    .map_err(|e| io_fail(e))?;
    println!("wrote {}", out.join("theta.csv").display());

    let mut plots: Vec<(String, Vec<(f64, f64)>)> = vec![(
        "configured".into(),
        samples
            .iter()
            .filter_map(|(s, r)| r.as_ref().ok().map(|t| (*s, t.theta)))
            .collect(),
    )];

    for name in compare {
        let mut alt = cfg.clone();
        alt.params = switch_core::presets::by_name(name)
            .with_context(|| format!("unknown preset '{name}'"))?;
        let alt_model = build(&alt)?;
        let (alt_samples, alt_failed) = sample_curve(&alt, &alt_model);
        failed |= alt_failed;
        let path = out.join(format!("theta_{name}.csv"));
        write_csv(
            &path,
            "theta-v1",
            &csv_meta(&alt),
            &["s", "theta", "residual", "status"],
            &theta_rows(&alt_samples),
        )
        .map_err(|e| io_fail(e))?;
        println!("wrote {}", path.display());
        plots.push((
            name.clone(),
            alt_samples
                .iter()
                .filter_map(|(s, r)| r.as_ref().ok().map(|t| (*s, t.theta)))
                .collect(),
        ));
    }

    if cfg.output.svg || force_svg {
        let series: Vec<svg::Series> = plots
            .iter()
            .map(|(label, points)| svg::Series {
                label,
                points: points.clone(),
            })
            .collect();
        let spec = svg::PlotSpec {
            title: "Scaled cumulant generating function",
            x_label: "s",
            y_label: "theta(s) [g]",
            log_x: false,
            log_y: false,
        };
        if let Some(body) = svg::render(&spec, &series) {
            write_atomic(&out.join("theta.svg"), &body).map_err(|e| io_fail(e))?;
            println!("wrote {}", out.join("theta.svg").display());
        }
    }
    eprintln!("theta: {} points in {:.2?}", plots[0].1.len(), started.elapsed());
    Ok(if failed { EXIT_NUMERICAL } else { 0 })
}

fn read_theta_csv(path: &std::path::Path) -> Result<LdfCurve> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut samples = Vec::new();
    for line in text.lines() {
        if line.starts_with('#') || line.starts_with("s,") || line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() < 3 {
            continue;
        }
        if cells.get(3).map_or(false, |s| s.starts_with("failed")) {
            continue;
        }
        let s: f64 = cells[0].parse()?;
        let theta: f64 = cells[1].parse()?;
        let residual: f64 = cells[2].parse().unwrap_or(0.0);
        samples.push(ThetaSample {
            s,
            theta,
            imag_abs: 0.0,
            residual,
            gap: f64::NAN,
        });
    }
    samples.sort_by(|a, b| a.s.total_cmp(&b.s));
    Ok(LdfCurve {
        samples,
        degenerate_at: vec![],
        params: None,
    })
}

fn cmd_gq(cfg: &RunConfig, from_theta: Option<&std::path::Path>, force_svg: bool) -> Result<i32> {
    let started = Instant::now();
    let curve = match from_theta {
        Some(path) => read_theta_csv(path)?,
        None => {
            let model = build(cfg)?;
            match fcs::theta_curve(&model, &cfg.s_grid(), &cfg.solver(), Some(cfg.params.clone()))
            {
                Ok(c) => c,
                Err(e) => return fail_numerical(e.into()),
            }
        }
    };
    if curve.samples.len() < 3 {
        anyhow::bail!("theta curve has fewer than three usable samples");
    }

    // q grid: configured bounds, or the attainable slope range.
    let slopes: Vec<f64> = curve
        .samples
        .windows(2)
        .map(|p| -(p[1].theta - p[0].theta) / (p[1].s - p[0].s))
        .collect();
    let q_lo = cfg
        .numerics
        .q_min
        .unwrap_or_else(|| slopes.iter().cloned().fold(f64::INFINITY, f64::min));
    let q_hi = cfg
        .numerics
        .q_max
        .unwrap_or_else(|| slopes.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    let n = cfg.numerics.q_count.max(2);
    let q_grid: Vec<f64> = (0..n)
        .map(|k| q_lo + (q_hi - q_lo) * k as f64 / (n - 1) as f64)
        .collect();

    let gq = match legendre(&curve, &q_grid, cfg.numerics.kink_rel_tol) {
        Ok(g) => g,
        Err(e) => return fail_numerical(e.into()),
    };
    if gq.clipped {
        eprintln!("warning: part of the q grid lies outside the curve's slope range");
    }
    if let Some((lo, hi)) = gq.non_recoverable {
        eprintln!(
            "note: kink detected; G(q) on ({lo:.4e}, {hi:.4e}) is not recoverable from theta"
        );
    }

    let out = &cfg.output.dir;
    let rows: Vec<Vec<String>> = gq
        .samples
        .iter()
        .map(|(q, g)| vec![csv_number(*q), csv_number(*g)])
        .collect();
    write_csv(&out.join("gq.csv"), "gq-v1", &csv_meta(cfg), &["q", "G"], &rows)
        .map_err(|e| io_fail(e))?;
    println!("wrote {}", out.join("gq.csv").display());

    let env = ResultEnvelope::new(&gq, cfg, started.elapsed().as_secs_f64());
    write_atomic(
        &out.join("gq.json"),
        &serde_json::to_string_pretty(&env)?,
    )
    .map_err(|e| io_fail(e))?;
    println!("wrote {}", out.join("gq.json").display());

    if cfg.output.svg || force_svg {
        let spec = svg::PlotSpec {
            title: "Current rate function",
            x_label: "q [g]",
            y_label: "G(q) [g]",
            log_x: false,
            log_y: false,
        };
        let series = [svg::Series {
            label: "G(q)",
            points: gq.samples.clone(),
        }];
        if let Some(body) = svg::render(&spec, &series) {
            write_atomic(&out.join("gq.svg"), &body).map_err(|e| io_fail(e))?;
            println!("wrote {}", out.join("gq.svg").display());
        }
    }
    Ok(0)
}

fn cmd_current(cfg: &RunConfig) -> Result<i32> {
    let started = Instant::now();
    let model = build(cfg)?;
    let opts = CurrentOptions {
        delta_s: cfg.numerics.delta_s,
        q_floor: cfg.numerics.q_floor,
        kink_rel_tol: cfg.numerics.kink_rel_tol,
    };
    let stats = match current_stats(&model, &opts, &cfg.solver()) {
        Ok(s) => s,
        Err(e) => return fail_numerical(e.into()),
    };
    let env = ResultEnvelope::new(&stats, cfg, started.elapsed().as_secs_f64());
    let path = cfg.output.dir.join("current.json");
    write_atomic(&path, &serde_json::to_string_pretty(&env)?).map_err(|e| io_fail(e))?;
    println!("wrote {}", path.display());
    println!(
        "q_mean = {:.6e}, q_max = {:.6e}, q_min = {:.6e}, alpha = {}",
        stats.q_mean,
        stats.q_max,
        stats.q_min,
        if stats.alpha.is_finite() {
            format!("{:.4}", stats.alpha)
        } else {
            "inf".into()
        }
    );
    Ok(0)
}

#[derive(Serialize)]
struct SteadyStateOut {
    parity: f64,
    matrix_re: Vec<Vec<f64>>,
    matrix_im: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct SteadyOut {
    null_dim: usize,
    zero_threshold: f64,
    states: Vec<SteadyStateOut>,
}

fn cmd_steady(cfg: &RunConfig) -> Result<i32> {
    let started = Instant::now();
    let model = build(cfg)?;
    let set = match steady_states(&model, cfg.numerics.zero_threshold, cfg.numerics.dense_limit) {
        Ok(s) => s,
        Err(e) => return fail_numerical(e.into()),
    };
    let pi = build_swap(&model.space);
    let states = set
        .states
        .iter()
        .map(|rho| {
            let parity = pi
                .op
                .matrix()
                .dot(rho)
                .diag()
                .sum()
                .re;
            let dim = rho.nrows();
            SteadyStateOut {
                parity,
                matrix_re: (0..dim)
                    .map(|r| (0..dim).map(|c| rho[(r, c)].re).collect())
                    .collect(),
                matrix_im: (0..dim)
                    .map(|r| (0..dim).map(|c| rho[(r, c)].im).collect())
                    .collect(),
            }
        })
        .collect();
    let out = SteadyOut {
        null_dim: set.null_dim,
        zero_threshold: set.zero_threshold,
        states,
    };
    let env = ResultEnvelope::new(&out, cfg, started.elapsed().as_secs_f64());
    let path = cfg.output.dir.join("steady.json");
    write_atomic(&path, &serde_json::to_string_pretty(&env)?).map_err(|e| io_fail(e))?;
    println!("wrote {}", path.display());
    println!("null_dim = {}", set.null_dim);
    Ok(0)
}

fn cmd_symmetry(cfg: &RunConfig) -> Result<i32> {
    let started = Instant::now();
    let model = build(cfg)?;
    let pi = build_swap(&model.space);
    let report = match check_strong_symmetry(&model, &pi, 1e-12) {
        Ok(r) => r,
        Err(e) => return fail_numerical(e.into()),
    };
    println!("{:<10} {:>14}", "object", "||[pi, .]||_F");
    for (label, norm) in &report.commutator_norms {
        println!("{label:<10} {norm:>14.6e}");
    }
    println!(
        "strong symmetry at tolerance {:.0e}: {}",
        report.tolerance,
        if report.strong_symmetry { "yes" } else { "no" }
    );
    let env = ResultEnvelope::new(&report, cfg, started.elapsed().as_secs_f64());
    let path = cfg.output.dir.join("symmetry.json");
    write_atomic(&path, &serde_json::to_string_pretty(&env)?).map_err(|e| io_fail(e))?;
    println!("wrote {}", path.display());
    Ok(0)
}

/// JSON has no infinities; encode non-finite values as strings so cached
/// rows survive a round trip.
mod lossless_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&v.to_string())
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Serialize, serde::Deserialize)]
struct SweepRow {
    hop: f64,
    #[serde(with = "lossless_f64")]
    q_max: f64,
    #[serde(with = "lossless_f64")]
    q_min: f64,
    #[serde(with = "lossless_f64")]
    alpha: f64,
    #[serde(with = "lossless_f64")]
    t_c: f64,
    #[serde(with = "lossless_f64")]
    t_d: f64,
    #[serde(with = "lossless_f64")]
    t_c_over_t_d: f64,
    status: String,
}

fn cmd_sweep(cfg: &RunConfig, force_svg: bool) -> Result<i32> {
    let started = Instant::now();
    let cache = PointCache::new(cfg.output.dir.join(".cache"));
    let grid = cfg.sweep.grid();
    let opts = CurrentOptions {
        delta_s: cfg.numerics.delta_s,
        q_floor: cfg.numerics.q_floor,
        kink_rel_tol: cfg.numerics.kink_rel_tol,
    };

    let rows: Vec<SweepRow> = grid
        .par_iter()
        .map(|&hop| {
            let mut point_cfg = cfg.clone();
            point_cfg.params.hop = hop;
            let key = envelope::config_hash(&point_cfg);
            if let Some(row) = cache.get::<SweepRow>(&key) {
                eprintln!("cache hit for hop = {hop:.6e}");
                return row;
            }
            let row = match compute_sweep_point(&point_cfg, hop, &opts) {
                Ok(row) => row,
                Err(e) => SweepRow {
                    hop,
                    q_max: f64::NAN,
                    q_min: f64::NAN,
                    alpha: f64::NAN,
                    t_c: f64::NAN,
                    t_d: f64::NAN,
                    t_c_over_t_d: f64::NAN,
                    status: format!("failed: {}", e.to_string().replace(',', ";")),
                },
            };
            if row.status == "ok" {
                let _ = cache.put(&key, &row);
            }
            row
        })
        .collect();

    let out = &cfg.output.dir;
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                csv_number(r.hop),
                csv_number(r.q_max),
                csv_number(r.q_min),
                csv_number(r.alpha),
                csv_number(r.t_c),
                csv_number(r.t_d),
                csv_number(r.t_c_over_t_d),
                r.status.clone(),
            ]
        })
        .collect();
    write_csv(
        &out.join("sweep.csv"),
        "sweep-v1",
        &csv_meta(cfg),
        &["J", "q_max", "q_min", "alpha", "T_C", "T_D", "T_C_over_T_D", "status"],
        &csv_rows,
    )
    .map_err(|e| io_fail(e))?;
    println!("wrote {}", out.join("sweep.csv").display());

    if cfg.output.svg || force_svg {
        let spec = svg::PlotSpec {
            title: "Flux ratio vs hopping",
            x_label: "J [g]",
            y_label: "alpha",
            log_x: true,
            log_y: true,
        };
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.status == "ok" && r.alpha.is_finite())
            .map(|r| (r.hop, r.alpha))
            .collect();
        let series = [svg::Series {
            label: "alpha",
            points: pts,
        }];
        if let Some(body) = svg::render(&spec, &series) {
            write_atomic(&out.join("sweep.svg"), &body).map_err(|e| io_fail(e))?;
            println!("wrote {}", out.join("sweep.svg").display());
        }
    }

    let failures = rows.iter().filter(|r| r.status != "ok").count();
    eprintln!(
        "sweep: {} points ({failures} failed) in {:.2?}",
        rows.len(),
        started.elapsed()
    );
    Ok(if failures > 0 { EXIT_PARTIAL } else { 0 })
}

fn compute_sweep_point(cfg: &RunConfig, hop: f64, opts: &CurrentOptions) -> Result<SweepRow> {
    let model = build(cfg)?;
    let stats = current_stats(&model, opts, &cfg.solver())?;
    let t_c = 1.0 / stats.q_mean;
    let t_d = dark_transition_rate(&cfg.params)?.mean_dark_period;
    Ok(SweepRow {
        hop,
        q_max: stats.q_max,
        q_min: stats.q_min,
        alpha: stats.alpha,
        t_c,
        t_d,
        t_c_over_t_d: t_c / t_d,
        status: "ok".into(),
    })
}

#[derive(Serialize)]
struct TrajOut {
    threshold: f64,
    q_mean_spectral: f64,
    weighted_rate_mean: f64,
    weighted_rate_stderr: f64,
    dark_count: usize,
    bright_count: usize,
    t_dark_mean: f64,
    t_dark_stderr: f64,
    t_bright_mean: f64,
    t_bright_stderr: f64,
    insufficient_events: bool,
    total_events: usize,
    renormalizations: u32,
}

fn cmd_traj(cfg: &RunConfig) -> Result<i32> {
    let started = Instant::now();
    let model = build(cfg)?;
    let tc = &cfg.trajectory;

    let initial = match tc.initial.as_str() {
        "basis" => InitialState::Basis {
            atom: tc.initial_atom_state()?,
            photons: tc.initial_photons,
        },
        "steady" => {
            let set =
                match steady_states(&model, cfg.numerics.zero_threshold, cfg.numerics.dense_limit)
                {
                    Ok(s) => s,
                    Err(e) => return fail_numerical(e.into()),
                };
            if set.null_dim > 1 {
                eprintln!(
                    "warning: steady state is degenerate (null_dim = {}); sampling the first",
                    set.null_dim
                );
            }
            InitialState::from_density(&set.states[0])?
        }
        other => anyhow::bail!("trajectory.initial must be 'basis' or 'steady', got '{other}'"),
    };

    let run_cfg = TrajectoryConfig {
        t_max: tc.t_max,
        initial,
        seed: tc.seed,
        ensemble: tc.ensemble,
        counted: tc.counted.clone(),
    };
    let records = match run_ensemble(&model, &run_cfg) {
        Ok(r) => r,
        Err(e) => return fail_numerical(e.into()),
    };

    // Events CSV.
    let mut rows = Vec::new();
    for rec in &records {
        for e in &rec.events {
            rows.push(vec![
                rec.stream.to_string(),
                csv_number(e.time),
                rec.channel_labels[e.channel as usize].clone(),
            ]);
        }
    }
    let out = &cfg.output.dir;
    write_csv(
        &out.join("traj_events.csv"),
        "traj-events-v1",
        &csv_meta(cfg),
        &["trajectory", "time", "channel"],
        &rows,
    )
    .map_err(|e| io_fail(e))?;
    println!("wrote {}", out.join("traj_events.csv").display());

    // Threshold: configured, or geometric mean of predicted timescales.
    let opts = CurrentOptions {
        delta_s: cfg.numerics.delta_s,
        q_floor: cfg.numerics.q_floor,
        kink_rel_tol: cfg.numerics.kink_rel_tol,
    };
    let stats = match current_stats(&model, &opts, &cfg.solver()) {
        Ok(s) => s,
        Err(e) => return fail_numerical(e.into()),
    };
    let threshold = tc
        .threshold
        .or_else(|| suggested_threshold(stats.q_mean, &cfg.params))
        .unwrap_or(tc.t_max);

    let refs: Vec<&JumpRecord> = records.iter().collect();
    let periods = segment_periods(&refs, threshold)?;

    let rates: Vec<f64> = records
        .iter()
        .map(|r| r.weighted_count() as f64 / r.t_final)
        .collect();
    let n = rates.len() as f64;
    let rate_mean = rates.iter().sum::<f64>() / n;
    let rate_se = if rates.len() > 1 {
        let var = rates.iter().map(|r| (r - rate_mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        f64::NAN
    };

    let payload = TrajOut {
        threshold,
        q_mean_spectral: stats.q_mean,
        weighted_rate_mean: rate_mean,
        weighted_rate_stderr: rate_se,
        dark_count: periods.dark_lengths.len(),
        bright_count: periods.bright_intervals.len(),
        t_dark_mean: periods.t_dark_mean,
        t_dark_stderr: periods.t_dark_stderr,
        t_bright_mean: periods.t_bright_mean,
        t_bright_stderr: periods.t_bright_stderr,
        insufficient_events: periods.insufficient_events,
        total_events: records.iter().map(|r| r.events.len()).sum(),
        renormalizations: records.iter().map(|r| r.renormalizations).sum(),
    };
    let env = ResultEnvelope::new(&payload, cfg, started.elapsed().as_secs_f64());
    write_atomic(
        &out.join("traj_stats.json"),
        &serde_json::to_string_pretty(&env)?,
    )
    .map_err(|e| io_fail(e))?;
    println!("wrote {}", out.join("traj_stats.json").display());
    println!(
        "ensemble rate = {rate_mean:.4e} +- {rate_se:.1e} (spectral {:.4e}); \
         {} dark / {} bright periods at threshold {threshold:.3e}",
        stats.q_mean,
        payload.dark_count,
        payload.bright_count
    );
    Ok(0)
}

#[derive(Serialize)]
struct ChannelDump {
    label: String,
    weight: i32,
    frobenius_norm: f64,
}

#[derive(Serialize)]
struct ModelDump {
    dim: usize,
    hermiticity_defect: f64,
    trace_defect: f64,
    derived: switch_core::model::DerivedRates,
    channels: Vec<ChannelDump>,
    warnings: Vec<String>,
}

fn cmd_model_dump(cfg: &RunConfig) -> Result<i32> {
    let model = build(cfg)?;
    let w0 = build_tilted(&model, 0.0, cfg.numerics.dense_limit)?;
    let dump = ModelDump {
        dim: model.dim(),
        hermiticity_defect: model.hamiltonian.hermiticity_defect(),
        trace_defect: w0.trace_defect(),
        derived: derived_rates(&cfg.params)?,
        channels: model
            .channels
            .iter()
            .map(|c| ChannelDump {
                label: c.label.clone(),
                weight: c.weight,
                frobenius_norm: c.op.frobenius_norm(),
            })
            .collect(),
        warnings: cfg.params.regime_warnings(),
    };
    println!("{}", serde_json::to_string_pretty(&dump)?);
    Ok(0)
}

fn fail_numerical(err: anyhow::Error) -> Result<i32> {
    eprintln!("numerical failure: {err:#}");
    Ok(EXIT_NUMERICAL)
}

/// Marker placed on the context chain of output-write errors so that main
/// can map them to their own exit code.
#[derive(Debug)]
struct IoFailure;

impl std::fmt::Display for IoFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "output I/O failed")
    }
}

fn io_fail(err: anyhow::Error) -> anyhow::Error {
    err.context(IoFailure)
}
