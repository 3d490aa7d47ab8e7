use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use glancing::config::KeyValues;
use glancing::ddp::{ddp_probability, phase_integral, zero_points};
use glancing::harness::{compare_methods, read_sweep_file, run_sweep, settings_with_overrides, write_sweep, SweepConfig};
use glancing::propagator::{propagate, propagate_trace, write_trace_file, PropagatorSettings};
use glancing::znt::{fit_parameters, tunneling_terms, znt_phase_estimate, TabulatedCurves, ZntInputs};
use glancing::DiabaticModel;
use serde_json::json;

#[derive(Parser)]
#[command(name = "glancing", version, about = "Transition probabilities of level-glancing two-level models")]
struct Cli {
    /// key=value file; command-line flags take precedence over its entries
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep α for one or more N and write a CSV table
    Sweep(SweepArgs),
    /// Integrate the Schrödinger equation for one model
    Propagate(PropagateArgs),
    /// List the complex zero points of the superparabolic model
    Zeros(FamilyArgs),
    /// Phase integral D(t_c^k) = σ + iδ
    Phase {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value_t = 1)]
        k: u32,
    },
    /// Generalized DDP probability
    Ddp(FamilyArgs),
    /// Zhu-Nakamura probability for the superparabolic model
    Znt(ZntArgs),
    /// Fit reduced parameters to tabulated adiabatic curves (t,E1,E2)
    Fit {
        #[arg(long)]
        curves: PathBuf,
    },
    /// Compare a sweep CSV against its numeric column
    Compare {
        file: PathBuf,
        #[arg(long, default_value_t = glancing::harness::DEFAULT_PEAK_THRESHOLD)]
        threshold: f64,
        /// write the JSON report here instead of stdout
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Args, Default)]
struct FamilyArgs {
    #[arg(long = "N")]
    n: Option<u32>,
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Args, Default)]
struct SolverArgs {
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    asymptotic_ratio: Option<f64>,
    #[arg(long)]
    convergence_tol: Option<f64>,
    #[arg(long)]
    max_span_refinements: Option<u32>,
    #[arg(long)]
    tail_tol: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    model: Option<String>,
    /// comma-separated list of orders, e.g. 2,6,10
    #[arg(long = "N")]
    n: Option<String>,
    #[arg(long)]
    alpha_min: Option<f64>,
    #[arg(long)]
    alpha_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// linear or log
    #[arg(long)]
    spacing: Option<String>,
    /// subset of numeric,ddp,znt-double,znt-tunnel
    #[arg(long)]
    methods: Option<String>,
    /// CSV destination; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct PropagateArgs {
    /// superparabolic or parabolic
    #[arg(long)]
    model: Option<String>,
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long = "A")]
    a: Option<f64>,
    #[arg(long = "B")]
    b: Option<f64>,
    #[arg(long = "V0")]
    v0: Option<f64>,
    /// also write populations along the span to this CSV
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, default_value_t = 1001)]
    samples: usize,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Branch {
    Double,
    Tunnel,
}

#[derive(Args)]
struct ZntArgs {
    #[arg(long, value_enum, default_value_t = Branch::Double)]
    branch: Branch,
    #[command(flatten)]
    family: FamilyArgs,
    /// override the reduced coupling a² (default 1/(4α³))
    #[arg(long)]
    a_sq: Option<f64>,
    /// b² for the double-crossing branch
    #[arg(long, default_value_t = 0.0)]
    b_sq: f64,
    /// override σ (default Re D(t_c¹))
    #[arg(long)]
    sigma: Option<f64>,
    /// override δ (default Im D(t_c¹))
    #[arg(long)]
    delta: Option<f64>,
}

fn set<T: ToString>(kv: &mut KeyValues, key: &str, value: &Option<T>) {
    if let Some(v) = value {
        kv.set(key, v.to_string());
    }
}

impl FamilyArgs {
    fn apply(&self, kv: &mut KeyValues) {
        set(kv, "N", &self.n);
        set(kv, "alpha", &self.alpha);
    }
}

impl SolverArgs {
    fn apply(&self, kv: &mut KeyValues) {
        set(kv, "rel_tol", &self.rel_tol);
        set(kv, "abs_tol", &self.abs_tol);
        set(kv, "asymptotic_ratio", &self.asymptotic_ratio);
        set(kv, "convergence_tol", &self.convergence_tol);
        set(kv, "max_span_refinements", &self.max_span_refinements);
        set(kv, "tail_tol", &self.tail_tol);
    }
}

/// (N, α) of the superparabolic family from merged settings.
fn family(kv: &KeyValues) -> Result<(u32, f64)> {
    let n = kv.get_parsed("N")?.context("--N is required")?;
    let alpha = kv.get_parsed("alpha")?.context("--alpha is required")?;
    DiabaticModel::superparabolic(n, alpha)?;
    Ok((n, alpha))
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let mut kv = match &cli.config {
        Some(path) => KeyValues::load(path).with_context(|| format!("reading {}", path.display()))?,
        None => KeyValues::default(),
    };

    match cli.command {
        Command::Sweep(args) => {
            set(&mut kv, "model", &args.model);
            set(&mut kv, "N", &args.n);
            set(&mut kv, "alpha_min", &args.alpha_min);
            set(&mut kv, "alpha_max", &args.alpha_max);
            set(&mut kv, "points", &args.points);
            set(&mut kv, "spacing", &args.spacing);
            set(&mut kv, "methods", &args.methods);
            set(&mut kv, "out", &args.out.as_ref().map(|p| p.display()));
            args.solver.apply(&mut kv);
            let config = SweepConfig::default().with_overrides(&kv)?;
            let rows = run_sweep(&config)?;
            match &config.output {
                Some(path) => eprintln!("wrote {} rows to {}", rows.len(), path.display()),
                None => write_sweep(std::io::stdout().lock(), &rows)?,
            }
        }
        Command::Propagate(args) => {
            set(&mut kv, "model", &args.model);
            args.family.apply(&mut kv);
            set(&mut kv, "A", &args.a);
            set(&mut kv, "B", &args.b);
            set(&mut kv, "V0", &args.v0);
            args.solver.apply(&mut kv);
            let model = DiabaticModel::from_config(&kv)?;
            let settings = settings_with_overrides(PropagatorSettings::default(), &kv)?;
            let result = propagate(&model, &settings)?;
            if let Some(path) = &args.trace {
                let samples = propagate_trace(&model, &settings, args.samples)?;
                write_trace_file(path, &samples)?;
            }
            print_json(&json!({ "model": model, "result": result }))?;
        }
        Command::Zeros(args) => {
            args.apply(&mut kv);
            let (n, alpha) = family(&kv)?;
            let mut out = std::io::stdout().lock();
            writeln!(out, "k,re,im")?;
            for z in zero_points(n, alpha)? {
                writeln!(out, "{},{:.16e},{:.16e}", z.k, z.value.re, z.value.im)?;
            }
        }
        Command::Phase { family: args, k } => {
            args.apply(&mut kv);
            let (n, alpha) = family(&kv)?;
            let d = phase_integral(n, alpha, k)?;
            print_json(&json!({ "N": n, "alpha": alpha, "k": k, "sigma": d.re, "delta": d.im }))?;
        }
        Command::Ddp(args) => {
            args.apply(&mut kv);
            let (n, alpha) = family(&kv)?;
            println!("{}", ddp_probability(n, alpha)?);
        }
        Command::Znt(args) => {
            args.family.apply(&mut kv);
            let (n, alpha) = family(&kv)?;
            let base = ZntInputs::superparabolic(n, alpha)?;
            let inputs = ZntInputs::new(
                args.a_sq.unwrap_or(base.a_sq),
                args.sigma.unwrap_or(base.sigma),
                args.delta.unwrap_or(base.delta),
            )?;
            let value = match args.branch {
                Branch::Double => json!({
                    "branch": "double",
                    "inputs": inputs,
                    "b_sq": args.b_sq,
                    "probability": inputs.double_crossing(args.b_sq)?,
                }),
                Branch::Tunnel => {
                    let terms = tunneling_terms(inputs.a_sq, inputs.sigma, inputs.delta)?;
                    json!({ "branch": "tunnel", "inputs": inputs, "terms": terms, "probability": terms.probability() })
                }
            };
            print_json(&value)?;
        }
        Command::Fit { curves } => {
            let tab = TabulatedCurves::from_csv(&curves).with_context(|| format!("reading {}", curves.display()))?;
            let fit = fit_parameters(&tab)?;
            let d = znt_phase_estimate(&fit.geometry, &tab, fit.a_sq, fit.b_sq)?;
            print_json(&json!({ "fit": fit, "sigma": d.re, "delta": d.im }))?;
        }
        Command::Compare { file, threshold, report } => {
            if threshold.is_nan() || threshold < 0.0 {
                bail!("threshold must be non-negative");
            }
            let rows = read_sweep_file(&file).with_context(|| format!("reading {}", file.display()))?;
            let summary = compare_methods(&rows, threshold)?;
            let text = serde_json::to_string_pretty(&summary)?;
            match report {
                Some(path) => std::fs::write(&path, text + "\n")?,
                None => println!("{text}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        // downstream reader closed early, e.g. `| head`
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|cause| {
        let io = cause
            .downcast_ref::<std::io::Error>()
            .or_else(|| match cause.downcast_ref::<glancing::Error>() {
                Some(glancing::Error::Io(io)) => Some(io),
                _ => None,
            });
        io.is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
    })
}
