use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use vns_core::diagnostics::{self, commutator_ensemble, Exponents, RecordContext, Snapshot};
use vns_core::elliptic::{epsilon_probe, lp_norm_probe, Viscosity, ViscosityBounds};
use vns_core::geometry::{make_checkerboard_mu, make_patch_mu};
use vns_core::io::{self, parse_config, read_snapshot, write_snapshot, CsvHeader, ProbeMu, RunConfig, PROBE_GROWTH};
use vns_core::solver::run_observed;
use vns_core::spectral::{lp_norm, ScalarField};
use vns_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "vns",
    version,
    about = "Variable-viscosity Navier-Stokes solver and diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a configuration, writing snapshots and the diagnostics CSV
    Run {
        config: PathBuf,
        /// Print the normalized configuration and exit
        #[arg(long)]
        print_config: bool,
    },
    /// Write the initial state of a configuration as a snapshot
    Init {
        config: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Evaluate one diagnostics row for a snapshot
    Diagnose {
        snapshot: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
    },
    /// L^p probe sweep of the inverse stress operator
    ProbeRmu { config: PathBuf },
    /// Commutator ensemble probe
    CommutatorProbe { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Run { config, print_config } => cmd_run(&config, print_config),
        Command::Init { config, output } => cmd_init(&config, &output),
        Command::Diagnose { snapshot, epsilon } => cmd_diagnose(&snapshot, epsilon),
        Command::ProbeRmu { config } => cmd_probe(&config),
        Command::CommutatorProbe { config } => cmd_commutator(&config),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn load(path: &Path) -> Result<RunConfig> {
    parse_config(path).map_err(|e| match e {
        Error::Io(io) => Error::InvalidArgument(format!("{}: {io}", path.display())),
        other => other,
    })
}

fn snapshot_name(dir: &Path, t: f64) -> PathBuf {
    dir.join(format!("snapshot_t{t:010.4}.vns"))
}

fn cmd_run(config: &Path, print_config: bool) -> Result<ExitCode> {
    let cfg = load(config)?;
    if print_config {
        print!("{}", cfg.normalized());
        return Ok(ExitCode::SUCCESS);
    }
    let initial = cfg.initial_state()?;
    fs::create_dir_all(&cfg.output_dir)?;
    fs::write(cfg.output_dir.join("config.normalized"), cfg.normalized())?;

    let header = CsvHeader::new(&cfg.sha256, cfg.solver.epsilon);
    let every = cfg.snapshot_every;
    let mut next_snap = 0.0;
    let dir = cfg.output_dir.clone();
    let outcome = run_observed(initial, &cfg.solver, |state, _| {
        if every > 0.0 && state.t >= next_snap - 1e-9 {
            write_snapshot(&snapshot_name(&dir, state.t), state)?;
            while next_snap <= state.t + 1e-9 {
                next_snap += every;
            }
        }
        Ok(())
    })?;
    let csv_path = cfg.output_dir.join("diagnostics.csv");
    io::write_diagnostics_csv(&csv_path, &header, &outcome.trajectory.diagnostics)?;

    match outcome.error {
        None => {
            let last = cfg.output_dir.join("final.vns");
            write_snapshot(&last, &outcome.final_state)?;
            eprintln!(
                "completed t = {} in {} steps; max energy residual {:.3e}; wrote {} and {}",
                outcome.final_state.t,
                outcome.steps,
                outcome.max_energy_residual,
                csv_path.display(),
                last.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Some(e) => {
            let last = cfg.output_dir.join("last_good.vns");
            write_snapshot(&last, &outcome.last_sample)?;
            eprintln!("run stopped: {e}");
            eprintln!("last good sample t = {}: {}", outcome.last_sample.t, last.display());
            Ok(ExitCode::from(1))
        }
    }
}

fn cmd_init(config: &Path, output: &Path) -> Result<ExitCode> {
    let cfg = load(config)?;
    let s = cfg.initial_state()?;
    write_snapshot(output, &s)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_diagnose(path: &Path, epsilon: f64) -> Result<ExitCode> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon = {epsilon} must lie in (0, 1)"
        )));
    }
    let bytes = fs::read(path)?;
    let s = read_snapshot(path)?;
    let mu = s.viscosity()?;
    let rec = diagnostics::record(
        Snapshot {
            t: s.t,
            omega: &s.omega,
            mu: &mu,
            tau: &s.tau,
            dtau_mu: &s.dtau_mu,
            theta: s.theta.as_ref(),
        },
        RecordContext {
            epsilon,
            int_grad_u_linf: 0.0,
            energy_residual: 0.0,
            dtau_mu0: lp_norm(&s.dtau_mu, 2.0 + epsilon),
            interface: None,
        },
    )?;
    let header = CsvHeader::new(&io::sha256_hex(&bytes), epsilon);
    print!("{}", io::diagnostics_csv(&header, &[rec]));
    Ok(ExitCode::SUCCESS)
}

fn probe_mu(cfg: &RunConfig) -> Result<(Viscosity, String, f64)> {
    let g = &cfg.grid;
    let p = &cfg.probe;
    let w = cfg.init.patch.mollify_width;
    let (field, desc): (ScalarField, String) = match p.mu {
        ProbeMu::Checkerboard => (
            make_checkerboard_mu(g, p.k, p.cells, w)?,
            format!("checkerboard K={} cells={}", p.k, p.cells),
        ),
        ProbeMu::Patch => (
            make_patch_mu(g, &cfg.init.patch)?,
            format!("patch R={}", cfg.init.patch.radius),
        ),
        ProbeMu::Constant => (ScalarField::constant(g, p.k), format!("constant {}", p.k)),
    };
    let mu = Viscosity::new(field.clone(), ViscosityBounds::of_field(&field)?)?;
    Ok((mu, desc, w))
}

fn probe_threshold(cfg: &RunConfig, mu: &Viscosity) -> Result<f64> {
    match cfg.probe.threshold {
        Some(t) => Ok(t),
        None => Ok(PROBE_GROWTH * lp_norm_probe(mu, 2.0, cfg.probe.ensemble, cfg.probe.seed)?),
    }
}

fn cmd_probe(config: &Path) -> Result<ExitCode> {
    let cfg = load(config)?;
    let (mu, desc, w) = probe_mu(&cfg)?;
    let threshold = probe_threshold(&cfg, &mu)?;
    let sweep = epsilon_probe(&mu, &cfg.probe.p_grid, threshold, cfg.probe.ensemble, cfg.probe.seed)?;
    let mut out = String::new();
    let onset = sweep.onset.map(|p| format!("{p}")).unwrap_or_else(|| "none".into());
    let _ = writeln!(
        out,
        "# vns probe-rmu version={} config_sha256={} threshold={} onset_p={}",
        env!("CARGO_PKG_VERSION"),
        cfg.sha256,
        threshold,
        onset
    );
    let _ = writeln!(out, "p,mu,estimate,ensemble_size,mollification_width");
    for r in &sweep.rows {
        let _ = writeln!(
            out,
            "{},{},{:.16e},{},{}",
            r.p, desc, r.estimate, sweep.ensemble_size, w
        );
    }
    print!("{out}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_commutator(config: &Path) -> Result<ExitCode> {
    let cfg = load(config)?;
    let c = &cfg.commutator;
    let exps = Exponents::new(c.p, c.p1, c.p2)?;
    let x = cfg.initial_state()?.velocity();
    let ratio = commutator_ensemble(&x, exps, c.count, c.seed, c.slope)?;
    println!(
        "# vns commutator-probe version={} config_sha256={}",
        env!("CARGO_PKG_VERSION"),
        cfg.sha256
    );
    println!("p,p1,p2,count,seed,max_ratio");
    println!("{},{},{},{},{},{:.16e}", c.p, c.p1, c.p2, c.count, c.seed, ratio);
    Ok(ExitCode::SUCCESS)
}
