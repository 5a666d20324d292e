//! Command-line surface of the laboratory.
//!
//! Exit codes: 0 when every asserted slope/bound passed, 2 when a suite ran
//! partially (some sub-runs failed or some checks missed), 1 on hard errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fpu_kdv_core::error::Error;
use fpu_kdv_core::grid::LatticeGrid;
use fpu_kdv_core::harness::config::{ExperimentConfig, ExperimentKind};
use fpu_kdv_core::harness::experiments::{run, run_suite, ExperimentOutput};
use fpu_kdv_core::harness::report::{append_series, BundleEntry, BundleIndex};
use fpu_kdv_core::harness::snapshot::write_split_trajectory;
use fpu_kdv_core::harness::{data, report};
use fpu_kdv_core::potential::Potential;
use fpu_kdv_core::propagators::Sign;
use fpu_kdv_core::solvers::{evolve, evolve_kdv, split_initial_data, System};

#[derive(Parser)]
#[command(name = "fpu-kdv", version, about = "FPU lattice / KdV continuum-limit laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// JSON experiment configuration; CLI flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// comma-separated dyadic spacings, e.g. 0.125,0.0625
    #[arg(long, value_delimiter = ',')]
    h_list: Option<Vec<f64>>,
    /// data regularity s
    #[arg(long)]
    s: Option<f64>,
    /// potential, e.g. cubic:1,1  toda:1,1  lj:1,1  poly:1,1,0.5
    #[arg(long)]
    potential: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one system and write a trajectory snapshot
    Simulate {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, value_enum, default_value = "coupled")]
        system: SimSystem,
        #[arg(long, default_value_t = 0.125)]
        h: f64,
        #[arg(long, default_value_t = 0.5)]
        t_max: f64,
    },
    /// Convergence-rate experiments (continuum limit and relatives)
    Converge {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, value_enum, default_value = "continuum-limit")]
        experiment: ConvergeKind,
        /// use soliton-derived single-directional data
        #[arg(long)]
        soliton: bool,
    },
    /// Kernel-decay sweep
    Kernels {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Bilinear-integrand suprema sweep
    Bilinear {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Bourgain-norm dichotomy: matching phase vs Airy phase
    XsbFailure {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Conservation checks: coupled Hamiltonian and KdV momentum
    Conserve {
        #[command(flatten)]
        common: CommonOpts,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SimSystem {
    Coupled,
    Decoupled,
    Kdv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConvergeKind {
    ContinuumLimit,
    SmallAmplitude,
    Decoupling,
    LinearComparison,
    Remainder,
}

impl From<ConvergeKind> for ExperimentKind {
    fn from(k: ConvergeKind) -> Self {
        match k {
            ConvergeKind::ContinuumLimit => ExperimentKind::ContinuumLimit,
            ConvergeKind::SmallAmplitude => ExperimentKind::SmallAmplitude,
            ConvergeKind::Decoupling => ExperimentKind::Decoupling,
            ConvergeKind::LinearComparison => ExperimentKind::LinearComparison,
            ConvergeKind::Remainder => ExperimentKind::Remainder,
        }
    }
}

fn parse_potential(text: &str) -> Result<Potential, Error> {
    let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
    let nums: Vec<f64> = rest
        .split(',')
        .filter(|s| !s.is_empty())
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| Error::InvalidConfig(format!("bad potential parameters: {e}")))?;
    let need = |k: usize| -> Result<(), Error> {
        if nums.len() == k {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("potential {kind} needs {k} parameters")))
        }
    };
    let p = match kind {
        "cubic" => {
            need(2)?;
            Potential::Cubic { a: nums[0], b: nums[1] }
        }
        "toda" => {
            need(2)?;
            Potential::Toda { alpha: nums[0], beta: nums[1] }
        }
        "lj" | "lennard_jones" => {
            need(2)?;
            Potential::LennardJones { e: nums[0], d: nums[1] }
        }
        "poly" | "polynomial" => {
            if nums.len() < 2 {
                return Err(Error::InvalidConfig("poly needs at least c2,c3".into()));
            }
            Potential::Polynomial { coeffs: nums }
        }
        other => return Err(Error::InvalidConfig(format!("unknown potential kind {other}"))),
    };
    p.validate()?;
    Ok(p)
}

fn build_config(kind: ExperimentKind, common: &CommonOpts) -> Result<ExperimentConfig, Error> {
    let mut cfg = if let Some(path) = &common.config {
        ExperimentConfig::from_json(&std::fs::read_to_string(path)?)?
    } else {
        let mut cfg = ExperimentConfig::new(kind);
        // verifier sweeps use a shorter default ladder and a smaller box
        match kind {
            ExperimentKind::ContinuumLimit | ExperimentKind::SmallAmplitude => {
                // one level below the default ladder: at h = 1/8 the h^{-2/5}
                // frequency split sits below the first data octave
                cfg.h_list = vec![0.0625, 0.03125, 0.015625, 0.0078125, 0.00390625];
            }
            ExperimentKind::Kernels | ExperimentKind::Bilinear => {
                cfg.h_list = vec![0.25, 0.125, 0.0625, 0.03125];
            }
            ExperimentKind::XsbFailure => {
                cfg.h_list = vec![0.25, 0.125, 0.0625, 0.03125];
                cfg.box_length = 8.0;
            }
            ExperimentKind::Decoupling | ExperimentKind::Remainder => {
                // small box keeps the slowest cross-term phase oscillatory
                // over the horizon; band-limited data keeps it resolvable
                cfg.box_length = 16.0;
                cfg.data = fpu_kdv_core::harness::config::DataKind::SmoothPair { band: 6 };
                if matches!(kind, ExperimentKind::Remainder) {
                    cfg.h_list = vec![0.125, 0.0625, 0.03125, 0.015625];
                }
            }
            _ => {}
        }
        cfg
    };
    cfg.experiment = kind;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(h) = &common.h_list {
        cfg.h_list = h.clone();
    }
    if let Some(s) = common.s {
        cfg.s = s;
    }
    if let Some(p) = &common.potential {
        cfg.potential = parse_potential(p)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_output(out_dir: &PathBuf, output: &ExperimentOutput) -> Result<bool, Error> {
    let path = output.report.write(out_dir)?;
    append_series(out_dir, &output.series)?;
    output.timing.write(out_dir)?;
    println!(
        "{}: {} -> {}",
        output.report.experiment,
        if output.report.passed { "PASS" } else { "FAIL" },
        path.display()
    );
    for c in &output.report.checks {
        println!(
            "  [{}] {} = {:.6e} {} {:.6e}",
            if c.passed { "ok" } else { "MISS" },
            c.name,
            c.value,
            c.op,
            c.threshold
        );
    }
    Ok(output.report.passed)
}

fn run_single(kind: ExperimentKind, common: &CommonOpts, soliton_speed: Option<f64>) -> Result<bool, Error> {
    let mut cfg = build_config(kind, common)?;
    if let Some(speed) = soliton_speed {
        cfg.data = fpu_kdv_core::harness::config::DataKind::Soliton { speed };
    }
    let output = run(&cfg)?;
    write_output(&common.out, &output)
}

fn simulate(common: &CommonOpts, system: SimSystem, h: f64, t_max: f64) -> Result<bool, Error> {
    let cfg = build_config(ExperimentKind::Conservation, common)?;
    let grid = LatticeGrid::with_period(h, cfg.box_length)?;
    let d = data::generate_hs_data(&grid, cfg.s, cfg.r_bound, cfg.seed)?;
    let dt = h.min(0.1) * cfg.dt_factor;
    std::fs::create_dir_all(&common.out)?;
    match system {
        SimSystem::Coupled | SimSystem::Decoupled => {
            let init = split_initial_data(&d.r0, &d.r1)?;
            let (pot, _) = cfg.potential.normalize()?;
            let sys = match system {
                SimSystem::Coupled => System::Coupled(&pot),
                _ => System::Decoupled,
            };
            let traj = evolve(sys, &init, t_max, dt, 4)?;
            let path = common.out.join("trajectory.bin");
            write_split_trajectory(&path, &traj, Some(cfg.seed))?;
            let rows: Vec<report::SeriesRow> = traj
                .times
                .iter()
                .zip(&traj.states)
                .map(|(&t, s)| report::SeriesRow {
                    experiment: "simulate".into(),
                    h,
                    t,
                    quantity: "u_plus_l2".into(),
                    value: s.u_plus.l2_norm(),
                })
                .collect();
            append_series(&common.out, &rows)?;
            println!("simulate: wrote {} samples to {}", traj.times.len(), path.display());
        }
        SimSystem::Kdv => {
            let w0 = d.r0.scale(0.5);
            let traj = evolve_kdv(&w0, Sign::Plus, t_max, dt, 4)?;
            let rows: Vec<report::SeriesRow> = traj
                .times
                .iter()
                .zip(&traj.fields)
                .map(|(&t, f)| report::SeriesRow {
                    experiment: "simulate".into(),
                    h,
                    t,
                    quantity: "w_l2".into(),
                    value: f.l2_norm(),
                })
                .collect();
            append_series(&common.out, &rows)?;
            println!("simulate: kdv run with {} samples", traj.times.len());
        }
    }
    Ok(true)
}

fn dispatch(cli: Cli) -> Result<bool, Error> {
    let common = match &cli.command {
        Command::Simulate { common, .. }
        | Command::Converge { common, .. }
        | Command::Kernels { common }
        | Command::Bilinear { common }
        | Command::XsbFailure { common }
        | Command::Conserve { common } => common.clone(),
    };
    if let Some(threads) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Simulate { system, h, t_max, .. } => simulate(&common, system, h, t_max),
        Command::Converge { experiment, soliton, .. } => {
            let kind: ExperimentKind = experiment.into();
            let speed = if soliton { Some(0.5) } else { None };
            if soliton && !matches!(kind, ExperimentKind::ContinuumLimit) {
                return Err(Error::InvalidConfig(
                    "soliton data is wired to the continuum-limit experiment".into(),
                ));
            }
            run_single(kind, &common, speed)
        }
        Command::Kernels { .. } => run_single(ExperimentKind::Kernels, &common, None),
        Command::Bilinear { .. } => run_single(ExperimentKind::Bilinear, &common, None),
        Command::XsbFailure { .. } => run_single(ExperimentKind::XsbFailure, &common, None),
        Command::Conserve { .. } => {
            // full conservation bundle via the suite path so failures isolate
            let cfg = build_config(ExperimentKind::Conservation, &common)?;
            let (outputs, partial) = run_suite(&[cfg]);
            let mut all_passed = true;
            let mut entries = Vec::new();
            for (cfg, out) in outputs {
                match out {
                    Ok(output) => {
                        let passed = write_output(&common.out, &output)?;
                        all_passed &= passed;
                        entries.push(BundleEntry {
                            experiment: cfg.experiment.name().into(),
                            path: format!("report_{}.json", cfg.experiment.name()),
                            passed: Some(passed),
                            error: None,
                        });
                    }
                    Err(e) => {
                        all_passed = false;
                        entries.push(BundleEntry {
                            experiment: cfg.experiment.name().into(),
                            path: String::new(),
                            passed: None,
                            error: Some(e.to_string()),
                        });
                    }
                }
            }
            BundleIndex { schema_version: report::SCHEMA_VERSION, reports: entries, partial }
                .write(&common.out)?;
            Ok(all_passed && !partial)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
