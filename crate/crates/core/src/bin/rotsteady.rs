use clap::{Args, Parser, Subcommand};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use rotsteady::config::Config;
use rotsteady::diagnostics::integrate_characteristic;
use rotsteady::linearized::LinearizedOperator;
use rotsteady::operator::Model;
use rotsteady::persist::{fields_csv, verify_state, StateFile};
use rotsteady::solver::{continuation, newton_solve, resolve_omega_max};
use rotsteady::{Error, Result};

/// Rotating, mirror-symmetric steady states of the Vlasov–Poisson system.
#[derive(Parser)]
#[command(name = "rotsteady", version)]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Opts {
    /// JSON configuration; command-line values override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for artifacts.
    #[arg(long, short, global = true, default_value = "out")]
    out: PathBuf,
    /// Polytropic exponent.
    #[arg(long, global = true)]
    k: Option<f64>,
    /// Radial nodes per panel.
    #[arg(long, global = true)]
    nodes: Option<usize>,
    /// Highest harmonic degree.
    #[arg(long, global = true)]
    n_max: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the non-rotating state and export its profile.
    Basestate,
    /// Solve at one angular velocity.
    Solve {
        #[arg(long)]
        omega: f64,
    },
    /// March from omega = 0 to omega_max.
    Continue {
        #[arg(long)]
        omega_max: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Recompute the diagnostics of a state file and re-run its checks.
    Verify { state: PathBuf },
    /// Integrate one characteristic in the rotating frame of a stored state.
    Orbit {
        state: PathBuf,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        x0: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        v0: Vec<f64>,
        #[arg(long, default_value_t = 20.0)]
        t_end: f64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
}

/// Failure with its exit status.
enum Failure {
    Config(Error),
    Solver(Error),
    Verify(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::OmegaOutOfRange { .. } | Error::Io(_) | Error::Json(_) => {
                Failure::Config(e)
            }
            Error::Verification(m) => Failure::Verify(m),
            Error::OrbitEscaped { .. } => Failure::Verify(e.to_string()),
            _ => Failure::Solver(e),
        }
    }
}

fn load_config(opts: &Opts) -> Result<Config> {
    let mut cfg = match &opts.config {
        Some(p) => Config::from_json(&std::fs::read_to_string(p)?)?,
        None => Config::default(),
    };
    if let Some(k) = opts.k {
        cfg.k = k;
    }
    if let Some(n) = opts.nodes {
        cfg.nodes_per_panel = n;
    }
    if let Some(n) = opts.n_max {
        cfg.n_max = n;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write(dir: &Path, name: &str, text: &str) -> Result<()> {
    std::fs::write(dir.join(name), text)?;
    Ok(())
}

fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> Result<()> {
    write(dir, name, &serde_json::to_string_pretty(value)?)
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json value serializes"));
}

fn run(cli: &Cli) -> std::result::Result<(), Failure> {
    let out = &cli.opts.out;
    std::fs::create_dir_all(out).map_err(Error::from)?;
    match &cli.cmd {
        Cmd::Basestate => {
            let cfg = load_config(&cli.opts)?;
            let model = Model::new(&cfg)?;
            let p = model.profile();
            let lin = LinearizedOperator::new(&model)?;
            write(out, "profile.csv", &p.to_csv())?;
            write(out, "norms.csv", &lin.norms_csv())?;
            let u0_at_1 = p.u0_at(1.0);
            let summary = json!({
                "config": cfg,
                "k": p.params.k,
                "mass": p.mass,
                "e0": p.e0,
                "e1": p.e1,
                "u0_at_1": u0_at_1,
                "u0_center": p.u0_center,
                "omega_cap": model.omega_cap(),
                "operator_norms": lin.summaries(),
            });
            write_json(out, "basestate.json", &summary)?;
            print_json(&summary);
            Ok(())
        }
        Cmd::Solve { omega } => {
            let cfg = load_config(&cli.opts)?;
            let model = Model::new(&cfg)?;
            let lin = LinearizedOperator::new(&model)?;
            let sol = newton_solve(&model, &lin, *omega, &model.zero_field(), &cfg)?;
            let state = model.reconstruct(*omega, &sol.zeta)?;
            let file = StateFile::from_state(&cfg, &state)?;
            file.write(&out.join("state.json"))?;
            write(out, "fields.csv", &fields_csv(&state, 60, 24))?;
            let checks = file.diagnostics.checks(&cfg);
            let summary = json!({
                "omega": omega,
                "iterations": sol.iterations,
                "residuals": sol.residuals,
                "zeta_x_norm": state.zeta.x_norm(),
                "diagnostics": file.diagnostics,
                "checks": checks,
            });
            print_json(&summary);
            if checks.iter().all(|c| c.passed) {
                Ok(())
            } else {
                Err(Failure::Verify("state failed its invariant checks".into()))
            }
        }
        Cmd::Continue { omega_max, steps } => {
            let mut cfg = load_config(&cli.opts)?;
            if omega_max.is_some() {
                cfg.omega_max = *omega_max;
            }
            if let Some(s) = steps {
                cfg.omega_steps = *s;
            }
            cfg.validate()?;
            let model = Model::new(&cfg)?;
            let lin = LinearizedOperator::new(&model)?;
            let w_max = resolve_omega_max(&model, &cfg)?;
            let report = continuation(&model, &lin, &cfg)?;
            let mut all_pass = true;
            let mut files = Vec::new();
            for (i, state) in report.states.iter().enumerate() {
                let file = StateFile::from_state(&cfg, state)?;
                let name = format!("state_{i:03}.json");
                file.write(&out.join(&name))?;
                write(out, &format!("fields_{i:03}.csv"), &fields_csv(state, 60, 24))?;
                all_pass &= file.diagnostics.checks(&cfg).iter().all(|c| c.passed);
                files.push(name);
            }
            write(out, "norms.csv", &lin.norms_csv())?;
            let manifest = json!({
                "config": cfg,
                "omega_max": w_max,
                "omega_cap": model.omega_cap(),
                "steps": report.records,
                "state_files": files,
                "last_good_omega": report.last_good_omega,
                "failure": report.failure.as_ref().map(|e| json!({"error": e.kind(), "message": e.to_string()})),
                "all_checks_passed": all_pass,
            });
            write_json(out, "manifest.json", &manifest)?;
            print_json(&manifest);
            if let Some(e) = report.failure {
                return Err(Failure::Solver(e));
            }
            if all_pass {
                Ok(())
            } else {
                Err(Failure::Verify("a continuation state failed its invariant checks".into()))
            }
        }
        Cmd::Verify { state } => {
            let file = StateFile::read(state)?;
            // a state that no longer reconstructs is a verification failure
            let report = verify_state(&file).map_err(|e| Failure::Verify(e.to_string()))?;
            print_json(&serde_json::to_value(&report).map_err(Error::from)?);
            if report.passed() {
                Ok(())
            } else if !report.reproduced {
                Err(Failure::Verify("recomputed diagnostics differ from the stored ones".into()))
            } else {
                Err(Failure::Verify("invariant checks failed".into()))
            }
        }
        Cmd::Orbit { state, x0, v0, t_end, samples, tol } => {
            if x0.len() != 3 || v0.len() != 3 {
                return Err(Error::InvalidParameter("--x0 and --v0 take three comma-separated values".into()).into());
            }
            let file = StateFile::read(state)?;
            let (_, st) = file.restore()?;
            let orbit =
                integrate_characteristic(&st, [x0[0], x0[1], x0[2]], [v0[0], v0[1], v0[2]], *t_end, *samples, *tol)?;
            write(out, "orbit.csv", &orbit.to_csv())?;
            let summary = json!({
                "omega": st.omega,
                "energy_drift": orbit.energy_drift(),
                "f_variation": orbit.f_variation(),
                "max_radius": orbit.max_radius(),
                "e_j": orbit.e_j[0],
            });
            print_json(&summary);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, kind, message) = match f {
                Failure::Config(e) => (2, e.kind(), e.to_string()),
                Failure::Solver(e) => (3, e.kind(), e.to_string()),
                Failure::Verify(m) => (4, "verification", m),
            };
            eprintln!("{}", json!({ "error": kind, "message": message, "exit_code": code }));
            ExitCode::from(code)
        }
    }
}
