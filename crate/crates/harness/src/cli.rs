//! Command-line entry point.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::atomic::Ordering;
use std::time::Instant;

use clap::{error::ErrorKind, Args, Parser, Subcommand};
use num_complex::Complex;
use wvtomo_core::{pure_from_angles, reconstruct, trajectory_seed, BlochAngles, Simulator};

use crate::config::{Angle, ExperimentConfig, ModeName, PpsName};
use crate::ensemble::{thread_pool, SIMULATED};
use crate::experiments::{self, SweepRow, Table};
use crate::output::{self, Summary};
use crate::{selftest, HarnessError};

#[derive(Debug, Parser)]
#[command(name = "wvtomo", version = output::version(), about = "Weak-value qubit tomography sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct Common {
    /// JSON experiment config; the built-in preset when absent.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    #[arg(long = "n-traj", value_name = "N")]
    n_traj: Option<u64>,
    /// Worker threads; falls back to WVTOMO_THREADS.
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<ModeName>,
    #[arg(long, value_enum)]
    pps: Option<PpsName>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Short and long measurements, linear vs iterative extraction.
    Fig1(Common),
    /// Ideal vs lossy detection: weak values.
    Fig2(Common),
    /// Ideal vs lossy detection: reconstruction fidelity.
    Fig3(Common),
    /// Density-matrix estimates at theta_f = 0.65 pi.
    Fig4(Common),
    /// Stationary vs time-resolved factors beyond the bad-cavity limit.
    Fig5(Common),
    /// One configured sweep.
    Sweep(SweepArgs),
    /// Initial state from a weak value.
    Reconstruct(ReconstructArgs),
    /// Fast consistency checks.
    Selftest,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Post-selection polar angles, e.g. `0.65pi` or `0.1pi,0.2pi`.
    #[arg(long = "theta-f", value_delimiter = ',', allow_hyphen_values = true)]
    theta_f: Vec<Angle>,
    #[arg(long)]
    eta: Option<f64>,
    /// Write the first K records of each phase as binary dumps.
    #[arg(long = "dump-records", value_name = "K", default_value_t = 0)]
    dump_records: u64,
}

#[derive(Debug, Args)]
struct ReconstructArgs {
    #[arg(long, allow_hyphen_values = true)]
    re: f64,
    #[arg(long, allow_hyphen_values = true)]
    im: f64,
    #[arg(long = "theta-f")]
    theta_f: Angle,
    #[arg(long = "phi-f", default_value = "0", allow_hyphen_values = true)]
    phi_f: Angle,
    /// Free-evolution phase of the |1> amplitude.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    phi1: f64,
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("wvtomo: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<i32, HarnessError> {
    match command {
        Command::Fig1(c) => figure("fig1", &c, ExperimentConfig::default(), experiments::run_fig1),
        Command::Fig2(c) => figure("fig2", &c, ExperimentConfig::default(), |cfg| {
            Ok(vec![table("fig2.csv", experiments::run_fig2_fig3(cfg)?)])
        }),
        Command::Fig3(c) => figure("fig3", &c, ExperimentConfig::default(), |cfg| {
            Ok(vec![table("fig3.csv", experiments::run_fig2_fig3(cfg)?)])
        }),
        Command::Fig4(c) => figure("fig4", &c, ExperimentConfig::default(), |cfg| {
            Ok(vec![table("fig4.csv", experiments::run_fig4(cfg)?)])
        }),
        Command::Fig5(c) => figure("fig5", &c, ExperimentConfig::beyond_limits(), |cfg| {
            Ok(vec![table("fig5.csv", experiments::run_fig5(cfg)?)])
        }),
        Command::Sweep(args) => sweep(args),
        Command::Reconstruct(args) => reconstruct_state(&args),
        Command::Selftest => Ok(run_selftest()),
    }
}

fn table(file_name: &'static str, rows: Vec<SweepRow>) -> Table {
    Table { file_name, rows }
}

fn resolve(common: &Common, preset: ExperimentConfig) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => preset,
    };
    if let Some(seed) = common.seed {
        cfg.master_seed = seed;
    }
    if let Some(n) = common.n_traj {
        cfg.n_trajectories = n;
    }
    if let Some(mode) = common.mode {
        cfg.mode = mode;
    }
    if let Some(pps) = common.pps {
        cfg.pps_mode = pps;
    }
    Ok(cfg)
}

fn figure(
    command: &str,
    common: &Common,
    preset: ExperimentConfig,
    body: impl FnOnce(&ExperimentConfig) -> Result<Vec<Table>, HarnessError> + Send,
) -> Result<i32, HarnessError> {
    let cfg = resolve(common, preset)?;
    cfg.check()?;
    execute(command, common, &cfg, |cfg| body(cfg))
}

fn execute(
    command: &str,
    common: &Common,
    cfg: &ExperimentConfig,
    body: impl FnOnce(&ExperimentConfig) -> Result<Vec<Table>, HarnessError> + Send,
) -> Result<i32, HarnessError> {
    let pool = thread_pool(common.threads)?;
    let start = Instant::now();
    let before = SIMULATED.load(Ordering::Relaxed);
    let tables = pool.install(|| body(cfg))?;
    let wall = start.elapsed().as_secs_f64();
    let trajectories = SIMULATED.load(Ordering::Relaxed) - before;

    let mut outputs = Vec::new();
    let mut failed = 0;
    for t in &tables {
        let path = output::write_csv(&common.out, t.file_name, &t.rows)?;
        outputs.push(path.display().to_string());
        for r in t.rows.iter().filter(|r| !r.is_ok()) {
            failed += 1;
            eprintln!("wvtomo: {} theta_f={} [{}] {}", t.file_name, r.theta_f, r.variant, r.status);
        }
    }
    let summary = Summary {
        command,
        version: output::version(),
        master_seed: cfg.master_seed,
        threads: pool.current_num_threads(),
        trajectories,
        wall_time_s: wall,
        trajectories_per_s: if wall > 0.0 { trajectories as f64 / wall } else { 0.0 },
        outputs,
        failed_rows: failed,
        config: cfg,
    };
    let path = output::write_summary(&common.out, &summary)?;
    for o in &summary.outputs {
        println!("wrote {o}");
    }
    println!(
        "wrote {} ({} trajectories, {:.0} trajectories/s)",
        path.display(),
        trajectories,
        summary.trajectories_per_s
    );
    Ok(if failed > 0 { 2 } else { 0 })
}

fn sweep(args: SweepArgs) -> Result<i32, HarnessError> {
    let mut cfg = resolve(&args.common, ExperimentConfig::default())?;
    if !args.theta_f.is_empty() {
        cfg.post_selection_sweep = args.theta_f.clone();
    }
    if let Some(eta) = args.eta {
        cfg.eta = eta;
    }
    cfg.check()?;
    let out = args.common.out.clone();
    let dump = args.dump_records;
    execute("sweep", &args.common, &cfg, move |cfg| {
        let (rows, ensembles) = experiments::run_sweep(cfg)?;
        if dump > 0 {
            dump_records(&out, cfg, &ensembles, dump)?;
        }
        Ok(vec![table("sweep.csv", rows)])
    })
}

/// Regenerates the first `k` trajectories of each ensemble with their records.
fn dump_records(
    out: &Path,
    cfg: &ExperimentConfig,
    ensembles: &[crate::ensemble::Ensemble; 2],
    k: u64,
) -> Result<(), HarnessError> {
    let dir = out.join("records");
    std::fs::create_dir_all(&dir).map_err(|e| HarnessError::Io(e.to_string()))?;
    let psi_i = cfg.psi_i()?;
    for (phase, ens) in ensembles.iter().enumerate() {
        let sim = Simulator::new(&psi_i, &ens.fields, &ens.params)?;
        for j in 0..k.min(cfg.n_trajectories) {
            let (record, _) = sim.run_record(trajectory_seed(ens.seed, j))?;
            let path = dir.join(format!("phase{phase}_{j:06}.bin"));
            let file = std::fs::File::create(&path).map_err(|e| HarnessError::Io(e.to_string()))?;
            record
                .write_to(std::io::BufWriter::new(file))
                .map_err(|e| HarnessError::Io(e.to_string()))?;
        }
    }
    Ok(())
}

fn reconstruct_state(args: &ReconstructArgs) -> Result<i32, HarnessError> {
    let angles = BlochAngles::new(args.theta_f.0, args.phi_f.0).map_err(|e| HarnessError::Config(e.to_string()))?;
    let psi_f = pure_from_angles(angles);
    let state = reconstruct(Complex::new(args.re, args.im), &psi_f, args.phi1)?;
    let rho = state.density();
    let out = serde_json::json!({
        "c1": [state.c1().re, state.c1().im],
        "c2": [state.c2().re, state.c2().im],
        "rho11": rho.rho11(),
        "rho12": [rho.rho12().re, rho.rho12().im],
    });
    println!("{out}");
    Ok(0)
}

fn run_selftest() -> i32 {
    let checks = selftest::run();
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    for c in &checks {
        let mark = if c.passed { "PASS" } else { "FAIL" };
        println!("{mark}  {:width$}  {}", c.name, c.detail);
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} passed, {} failed", checks.len() - failed, failed);
    if failed == 0 {
        0
    } else {
        2
    }
}
