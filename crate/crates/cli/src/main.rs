//! `sserw`: simulate the walker, solve the hydrodynamic equations, price paths
//! and run the convergence experiments.
//!
//! Exit codes: 0 when every check passes, 2 when a check fails, 1 on errors.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde_json::json;

use sserw::dynamics::{simulate, write_dump, PreparedTilt, SimulationSpec, TiltMode};
use sserw::fields::record_path_field;
use sserw::harness::{run_experiment, ExperimentConfig, ExperimentKind, ExperimentReport};
use sserw::hydro::solve_perturbed;
use sserw::ldp::{rate_breakdown, WalkerPath};
use sserw::model::{sample_product_profile, InitialState, TiltedInitial, TorusLattice};
use sserw::rng::{stream, stream_index};

#[derive(Parser)]
#[command(name = "sserw", version, about = "Random walk in a symmetric exclusion environment")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Tilt {
    None,
    Observe,
    Drive,
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML or JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to `run.out` of the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `run.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `run.threads`.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::load(&self.config)
            .with_context(|| format!("loading {}", self.config.display()))?;
        if let Some(seed) = self.seed {
            cfg.run.seed = seed;
        }
        if self.threads.is_some() {
            cfg.run.threads = self.threads;
        }
        if let Some(out) = &self.out {
            cfg.run.out = Some(out.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one replica and print its summary; with --out, also write the
    /// binary dump and the density and walker paths.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Lattice size; defaults to the first entry of `model.n`.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        replica: u64,
        /// Defaults to `drive` when the config has a tilt section.
        #[arg(long, value_enum)]
        tilt: Option<Tilt>,
    },
    /// Solve the (perturbed) hydrodynamic equation for the configured tilt.
    Hydro {
        #[command(flatten)]
        common: Common,
    },
    /// Rate-function breakdown of the tilt's hydrodynamic path.
    Rate {
        #[command(flatten)]
        common: Common,
    },
    /// Law of large numbers (perturbed when the config says so).
    LlnCheck {
        #[command(flatten)]
        common: Common,
    },
    /// Relative entropy of the driven law against its limit.
    EntropyCheck {
        #[command(flatten)]
        common: Common,
    },
    /// Tube probabilities by importance sampling and plain Monte Carlo.
    IsEstimate {
        #[command(flatten)]
        common: Common,
    },
    /// Replacement, ensembles, energy and martingale diagnostics.
    Diagnostics {
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<bool> {
    match command {
        Command::Simulate {
            common,
            n,
            replica,
            tilt,
        } => simulate_one(&common, n, replica, tilt).map(|()| true),
        Command::Hydro { common } => hydro(&common).map(|()| true),
        Command::Rate { common } => rate(&common).map(|()| true),
        Command::LlnCheck { common } => experiment(&common, |k| match k {
            ExperimentKind::PerturbedLln => k,
            _ => ExperimentKind::Lln,
        }),
        Command::EntropyCheck { common } => experiment(&common, |_| ExperimentKind::Entropy),
        Command::IsEstimate { common } => experiment(&common, |_| ExperimentKind::ImportanceSampling),
        Command::Diagnostics { common } => experiment(&common, |_| ExperimentKind::Diagnostics),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn print_record(format: Format, record: &serde_json::Value) -> Result<()> {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(record)?),
        Format::Csv => {
            println!("quantity,value");
            for (k, v) in record.as_object().into_iter().flatten() {
                println!("{k},{v}");
            }
        }
    }
    Ok(())
}

fn simulate_one(common: &Common, n: Option<usize>, replica: u64, tilt: Option<Tilt>) -> Result<()> {
    let cfg = common.load()?;
    let n = n.unwrap_or(cfg.model.n[0]);
    let lattice = TorusLattice::new(n)?;
    let u0 = cfg.u0()?;
    let rates = cfg.rates()?;
    let params = cfg.tilt_or_null()?;
    let mode = tilt.unwrap_or(if cfg.tilt.is_some() { Tilt::Drive } else { Tilt::None });
    let prep = PreparedTilt::new(&params, &lattice, cfg.model.t_max, 1e-10)?;
    let times = cfg.grid()?.frame_times();
    let base = SimulationSpec::new(lattice, &rates, cfg.model.t_max)
        .with_diffusion(cfg.diffusion())
        .with_recording(times.clone())
        .with_event_log(true);

    let mut rng = stream(cfg.run.seed, stream_index(&[0, 0, n as u64, replica]));
    let out = match mode {
        Tilt::None => {
            let init = InitialState::untilted(sample_product_profile(&lattice, &u0, &mut rng));
            simulate(&base, init, &mut rng)?
        }
        Tilt::Observe => {
            let init = TiltedInitial::new(&lattice, &u0, &u0)?.sample(&mut rng);
            simulate(&base.with_tilt(TiltMode::Observe(&prep)), init, &mut rng)?
        }
        Tilt::Drive => {
            let init = TiltedInitial::new(&lattice, &u0, &params.v0)?.sample(&mut rng);
            simulate(&base.with_tilt(TiltMode::Drive(&prep)), init, &mut rng)?
        }
    };
    let traj = &out.trajectory;
    let (plus, minus) = traj.counts();

    if let Some(dir) = &cfg.run.out {
        std::fs::create_dir_all(dir)?;
        let mut w = create(&dir.join("trajectory.bin"))?;
        write_dump(&mut w, traj, cfg.run.seed, params.fingerprint())?;
        w.flush()?;
        let (pi, pi_hat) = record_path_field(traj, &times)?;
        let m = 4 * n;
        let mut w = create(&dir.join("density.csv"))?;
        pi.write_csv(&mut w, n, m)?;
        w.flush()?;
        let mut w = create(&dir.join("density_walker_frame.csv"))?;
        pi_hat.write_csv(&mut w, n, m)?;
        w.flush()?;
        let mut w = create(&dir.join("walker.csv"))?;
        pi.write_walker_csv(&mut w, n)?;
        w.flush()?;
        info!("wrote trajectory files to {}", dir.display());
    }

    print_record(
        common.format,
        &json!({
            "n": n,
            "seed": cfg.run.seed,
            "replica": replica,
            "t_max": traj.t_max(),
            "final_position": traj.final_position(),
            "jumps_plus": plus,
            "jumps_minus": minus,
            "exchanges": traj.exchange_count(),
            "rejected": traj.rejected_count(),
            "log_martingale": out.tilt.log_martingale(n),
        }),
    )
}

fn hydro(common: &Common) -> Result<()> {
    let cfg = common.load()?;
    let sol = solve_perturbed(&cfg.tilt_or_null()?, &cfg.rates()?, cfg.diffusion(), &cfg.grid()?)?;
    let m = cfg.hydro.m;
    if let Some(dir) = &cfg.run.out {
        std::fs::create_dir_all(dir)?;
        let mut w = create(&dir.join("u.csv"))?;
        sol.u.write_csv(&mut w, m, m)?;
        w.flush()?;
        let mut w = create(&dir.join("u_walker_frame.csv"))?;
        sol.u_hat.write_csv(&mut w, m, m)?;
        w.flush()?;
        let mut w = create(&dir.join("f.csv"))?;
        writeln!(w, "t,f")?;
        for (t, f) in sol.f_times.iter().zip(&sol.f) {
            writeln!(w, "{t},{f}")?;
        }
        w.flush()?;
    }
    let last = sol.u.frames.last().context("empty solution")?;
    let (lo, hi) = last.bounds();
    print_record(
        common.format,
        &json!({
            "t_max": cfg.model.t_max,
            "f_T": sol.f_at(cfg.model.t_max),
            "mass_0": sol.u.frames[0].mass(),
            "mass_T": last.mass(),
            "min_T": lo,
            "max_T": hi,
            "clamped": sol.clamped,
        }),
    )
}

fn rate(common: &Common) -> Result<()> {
    let cfg = common.load()?;
    let tilt = cfg.tilt_or_null()?;
    let rates = cfg.rates()?;
    let sol = solve_perturbed(&tilt, &rates, cfg.diffusion(), &cfg.rate_grid()?)?;
    let walker = WalkerPath::from_field(&sol.u)?;
    let breakdown = rate_breakdown(
        &sol.u,
        &walker,
        &cfg.u0()?,
        &rates,
        Some(&tilt.a),
        cfg.basis(),
        cfg.diffusion(),
    )?;
    match common.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&breakdown)?),
        Format::Csv => print_record(
            Format::Csv,
            &json!({
                "h": breakdown.h,
                "j_exclusion": breakdown.j_exclusion,
                "i_ex": breakdown.i_ex,
                "j_walker": breakdown.j_walker,
                "i_rw": breakdown.i_rw,
                "total": breakdown.total,
                "null_residual": breakdown.null_residual,
            }),
        )?,
    }
    Ok(())
}

fn experiment(common: &Common, kind: impl Fn(ExperimentKind) -> ExperimentKind) -> Result<bool> {
    let mut cfg = common.load()?;
    let wanted = kind(cfg.kind);
    if wanted != cfg.kind {
        info!("running the config as {wanted:?} (it declares {:?})", cfg.kind);
        cfg.kind = wanted;
    }
    let report = run_experiment(&cfg)?;
    if let Some(dir) = &cfg.run.out {
        for path in report.write_to_dir(dir)? {
            info!("wrote {}", path.display());
        }
    }
    emit(&report, common.format)?;
    let passed = report.passed();
    if !passed {
        report_failures(&report);
    }
    Ok(passed)
}

fn emit(report: &ExperimentReport, format: Format) -> Result<()> {
    match format {
        Format::Json => println!("{}", report.to_json()?),
        Format::Csv => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            report.write_summary_csv(&mut lock)?;
        }
    }
    for c in &report.checks {
        eprintln!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    for n in &report.notes {
        eprintln!("note: {n}");
    }
    Ok(())
}

fn report_failures(report: &ExperimentReport) {
    let failed: Vec<&str> = report
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.as_str())
        .collect();
    eprintln!("failed checks: {}", failed.join(", "));
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_is_well_formed() {
        Cli::command().debug_assert();
    }

    #[test]
    fn parses_flags() {
        let cli = Cli::try_parse_from(["sserw", "lln-check", "--config", "a.toml", "--seed", "3", "--format", "csv"])
            .unwrap();
        match cli.command {
            Command::LlnCheck { common } => {
                assert_eq!(common.seed, Some(3));
                assert!(matches!(common.format, Format::Csv));
            }
            _ => panic!("wrong subcommand"),
        }
        assert!(Cli::try_parse_from(["sserw", "hydro"]).is_err());
    }
}
