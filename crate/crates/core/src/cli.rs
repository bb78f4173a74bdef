//! `adia` command-line front end.
//!
//! Exit codes: 0 success, 2 usage error (bad flags or values, checked
//! before any computation), 1 computation or I/O failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::dynamics;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::experiments::{self, OutputFormat, SweepConfig};
use crate::model::{build_full, DrivingProfile, SearchInstance};
use crate::oracle;
use crate::schedule::{self, RuntimeMethod, Schedule};
use crate::spectrum;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable capping the worker pool size.
pub const THREADS_ENV: &str = "ADIA_THREADS";

#[derive(Debug, Parser)]
#[command(name = "adia", version, about = "Local adiabatic search along driven interpolation paths")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Spectral gap at one s, or the minimum gap.
    Gap(CommonArgs),
    /// Local schedule s(t).
    Schedule(CommonArgs),
    /// Propagate |psi0> along a schedule and report fidelities.
    Evolve(CommonArgs),
    /// Runtimes over a list of sizes and profiles.
    Sweep(CommonArgs),
    /// Regenerate the figure tables into a directory.
    Figures(CommonArgs),
    /// Scaling fits and large-N asymptotes.
    Report(CommonArgs),
}

#[derive(Debug, Clone, Default, Args)]
struct CommonArgs {
    /// log2 of the database size; comma-separated for sweep/report.
    #[arg(long, value_delimiter = ',')]
    log2n: Option<Vec<u32>>,
    /// none|quadratic|sqrt|alt; comma-separated for sweep/report.
    #[arg(long, value_delimiter = ',')]
    profile: Option<Vec<String>>,
    #[arg(long, allow_negative_numbers = true)]
    epsilon: Option<f64>,
    /// Reduced time in [0, 1].
    #[arg(long, allow_negative_numbers = true)]
    s: Option<f64>,
    /// Output path, or '-' for standard output.
    #[arg(long)]
    output: Option<String>,
    /// csv|json
    #[arg(long)]
    format: Option<String>,
    /// Use the dense 2^n-dimensional realization (small n only).
    #[arg(long)]
    full_space: bool,
    /// Runtime methods for sweep: quadrature|ode|closed_form.
    #[arg(long, value_delimiter = ',')]
    method: Option<Vec<String>>,
    /// evolve: use a linear schedule of this total time instead.
    #[arg(long, allow_negative_numbers = true)]
    linear_time: Option<f64>,
    /// JSON object with the same keys; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Accepts a scalar or a list.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct ConfigFile {
    #[serde(alias = "log2n")]
    log2n: Option<OneOrMany<u32>>,
    profile: Option<OneOrMany<String>>,
    epsilon: Option<f64>,
    s: Option<f64>,
    output: Option<String>,
    format: Option<String>,
    #[serde(alias = "full_space")]
    full_space: Option<bool>,
    method: Option<OneOrMany<String>>,
    #[serde(alias = "linear_time")]
    linear_time: Option<f64>,
}

/// Flags merged with the config file and parsed into domain values.
#[derive(Debug)]
struct Resolved {
    qubits: Vec<u32>,
    profiles: Vec<DrivingProfile>,
    epsilon: f64,
    s: Option<f64>,
    output: Option<String>,
    format: OutputFormat,
    full_space: bool,
    methods: Vec<RuntimeMethod>,
    linear_time: Option<f64>,
}

impl Resolved {
    fn instance(&self) -> Result<SearchInstance> {
        match self.qubits.as_slice() {
            [n] => SearchInstance::new(*n),
            [] => Err(Error::invalid("--log2n is required")),
            _ => Err(Error::invalid("this subcommand takes a single --log2n")),
        }
    }

    fn profile(&self) -> Result<&DrivingProfile> {
        match self.profiles.as_slice() {
            [p] => Ok(p),
            _ => Err(Error::invalid("this subcommand takes a single --profile")),
        }
    }
}

fn resolve(args: CommonArgs, default_qubits: &[u32], default_profiles: &[&str]) -> Result<Resolved> {
    let file: ConfigFile = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::invalid(format!("cannot read config {}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| Error::invalid(format!("config {}: {e}", path.display())))?
        }
        None => ConfigFile::default(),
    };
    let qubits = args
        .log2n
        .or(file.log2n.map(OneOrMany::into_vec))
        .unwrap_or_else(|| default_qubits.to_vec());
    let profile_names = args
        .profile
        .or(file.profile.map(OneOrMany::into_vec))
        .unwrap_or_else(|| default_profiles.iter().map(|s| s.to_string()).collect());
    let profiles = profile_names
        .iter()
        .map(|p| p.parse::<DrivingProfile>())
        .collect::<Result<Vec<_>>>()?;
    let epsilon = args.epsilon.or(file.epsilon).unwrap_or(schedule::DEFAULT_EPSILON);
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!("--epsilon must be positive, got {epsilon}")));
    }
    let s = args.s.or(file.s);
    if let Some(s) = s {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::invalid(format!("--s must lie in [0, 1], got {s}")));
        }
    }
    let format = args
        .format
        .or(file.format)
        .map(|f| f.parse::<OutputFormat>())
        .transpose()?
        .unwrap_or_default();
    let methods = args
        .method
        .or(file.method.map(OneOrMany::into_vec))
        .unwrap_or_else(|| vec!["quadrature".into()])
        .iter()
        .map(|m| m.parse::<RuntimeMethod>())
        .collect::<Result<Vec<_>>>()?;
    let linear_time = args.linear_time.or(file.linear_time);
    if let Some(t) = linear_time {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::invalid(format!("--linear-time must be positive, got {t}")));
        }
    }
    Ok(Resolved {
        qubits,
        profiles,
        epsilon,
        s,
        output: args.output.or(file.output),
        format,
        full_space: args.full_space || file.full_space.unwrap_or(false),
        methods,
        linear_time,
    })
}

fn configure_threads() -> Result<()> {
    if let Ok(value) = std::env::var(THREADS_ENV) {
        let threads: usize = value
            .trim()
            .parse()
            .ok()
            .filter(|&t| t > 0)
            .ok_or_else(|| Error::invalid(format!("{THREADS_ENV} must be a positive integer, got '{value}'")))?;
        exec::init_threads(threads);
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    let (args, defaults): (CommonArgs, (&[u32], &[&str])) = match &cli.command {
        Command::Gap(a) | Command::Schedule(a) | Command::Evolve(a) => (a.clone(), (&[], &["quadratic"])),
        Command::Sweep(a) => (a.clone(), (&[], &["none", "quadratic"])),
        Command::Figures(a) => (a.clone(), (&[], &["quadratic"])),
        Command::Report(a) => (
            a.clone(),
            (&[10, 12, 14, 16, 18, 20, 22, 24], &["none", "quadratic", "sqrt_product"]),
        ),
    };
    let resolved = match resolve(args, defaults.0, defaults.1) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let outcome = match cli.command {
        Command::Gap(_) => cmd_gap(&resolved),
        Command::Schedule(_) => cmd_schedule(&resolved),
        Command::Evolve(_) => cmd_evolve(&resolved),
        Command::Sweep(_) => cmd_sweep(&resolved),
        Command::Figures(_) => cmd_figures(&resolved),
        Command::Report(_) => cmd_report(&resolved),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e @ Error::InvalidArgument(_)) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}

fn emit(output: &str, body: &str) -> Result<()> {
    if output == "-" {
        std::io::stdout().lock().write_all(body.as_bytes())?;
    } else {
        fs::write(output, body)?;
        println!("wrote {output}");
    }
    Ok(())
}

fn cmd_gap(r: &Resolved) -> Result<()> {
    let inst = r.instance()?;
    let profile = r.profile()?;
    match r.s {
        Some(s) => {
            let p = spectrum::spectrum_at(&inst, profile, s)?;
            println!(
                "N={} profile={} s={} E0={} E1={} g={}",
                inst.size(),
                profile.label(),
                s,
                p.e0,
                p.e1,
                p.gap
            );
            if r.full_space {
                let h = build_full(&inst, profile, s, inst.marked_index())?;
                let dense = oracle::dense_two_lowest(&h)?;
                println!("full-space E0={} E1={} g={}", dense.e0, dense.e1, dense.e1 - dense.e0);
            }
        }
        None => {
            let report = spectrum::min_gap(&inst, profile);
            println!(
                "N={} profile={} s_star={} g_min={} method={:?}",
                inst.size(),
                profile.label(),
                report.s_star,
                report.g_min,
                report.method
            );
        }
    }
    Ok(())
}

fn schedule_body(schedule: &Schedule, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Json => Ok(serde_json::to_string_pretty(schedule.samples())? + "\n"),
        OutputFormat::Csv => {
            let meta = serde_json::json!({
                "N": schedule.instance().size(),
                "epsilon": schedule.epsilon(),
                "profile": schedule.profile().map(|p| p.label()),
                "method": schedule.method().name(),
                "version": experiments::version_string(),
                "timestamp": experiments::timestamp(),
            });
            let mut out = format!("# {meta}\nt,s,rate\n");
            for p in schedule.samples() {
                out.push_str(&format!(
                    "{},{},{}\n",
                    experiments::format_real(p.t),
                    experiments::format_real(p.s),
                    experiments::format_real(p.rate)
                ));
            }
            Ok(out)
        }
    }
}

fn cmd_schedule(r: &Resolved) -> Result<()> {
    let inst = r.instance()?;
    let profile = r.profile()?;
    let sch = schedule::local_schedule(&inst, profile, r.epsilon, schedule::DEFAULT_S_TOLERANCE)?;
    match &r.output {
        Some(out) => emit(out, &schedule_body(&sch, r.format)?)?,
        None => println!(
            "N={} profile={} epsilon={} T={} samples={}",
            inst.size(),
            profile.label(),
            r.epsilon,
            sch.total_time(),
            sch.samples().len()
        ),
    }
    Ok(())
}

fn cmd_evolve(r: &Resolved) -> Result<()> {
    let inst = r.instance()?;
    let profile = r.profile()?;
    let sch = match r.linear_time {
        Some(t) => schedule::linear_schedule(&inst, t)?,
        None => schedule::local_schedule(&inst, profile, r.epsilon, schedule::DEFAULT_S_TOLERANCE)?,
    };
    let result = if r.full_space {
        dynamics::propagate_full(&inst, profile, &sch, inst.marked_index())?
    } else {
        dynamics::propagate(&inst, profile, &sch, dynamics::DEFAULT_SUBSTEPS)?
    };
    let eps = r.linear_time.map_or(r.epsilon.to_string(), |_| "none".into());
    println!(
        "N={} profile={} epsilon={} schedule={} T={} fidelity={} ground_fidelity={} norm_drift={:e}",
        inst.size(),
        profile.label(),
        eps,
        sch.method().name(),
        sch.total_time(),
        result.final_marked_fidelity,
        result.final_ground_fidelity,
        result.norm_drift
    );
    if let Some(leak) = result.max_leakage {
        println!("max_leakage={leak:e}");
    }
    if let Some(out) = &r.output {
        let body = match r.format {
            OutputFormat::Json => serde_json::to_string_pretty(&result)? + "\n",
            OutputFormat::Csv => {
                let mut body = String::from("t,s,marked_fidelity,ground_fidelity\n");
                for p in &result.trajectory {
                    body.push_str(&format!(
                        "{},{},{},{}\n",
                        experiments::format_real(p.t),
                        experiments::format_real(p.s),
                        experiments::format_real(p.marked_fidelity),
                        experiments::format_real(p.ground_fidelity)
                    ));
                }
                body
            }
        };
        emit(out, &body)?;
    }
    Ok(())
}

fn cmd_sweep(r: &Resolved) -> Result<()> {
    if r.qubits.is_empty() {
        return Err(Error::invalid("--log2n is required"));
    }
    let mut config = SweepConfig::new(r.qubits.clone(), r.profiles.clone(), r.epsilon);
    config.methods = r.methods.clone();
    config.format = r.format;
    let to_stdout = r.output.as_deref() == Some("-");
    config.output = match r.output.as_deref() {
        None => Some(PathBuf::from(match r.format {
            OutputFormat::Csv => "sweep.csv",
            OutputFormat::Json => "sweep.json",
        })),
        Some("-") => None,
        Some(path) => Some(PathBuf::from(path)),
    };
    let result = experiments::run_sweep(&config, Execution::Parallel)?;
    if to_stdout {
        std::io::stdout().lock().write_all(result.render(r.format)?.as_bytes())?;
    } else {
        for e in &result.entries {
            match (&e.record, &e.error) {
                (Some(rec), _) => println!("{} n={} {}: T={} g_min={}", e.profile, e.n, e.method.name(), rec.total_time, rec.g_min),
                (None, Some(err)) => println!("{} n={} {}: error: {err}", e.profile, e.n, e.method.name()),
                _ => {}
            }
        }
        if let Some(p) = &config.output {
            println!("wrote {}", p.display());
        }
    }
    Ok(())
}

fn cmd_figures(r: &Resolved) -> Result<()> {
    let dir = Path::new(r.output.as_deref().unwrap_or("."));
    if dir == Path::new("-") {
        return Err(Error::invalid("figures needs an output directory"));
    }
    for path in experiments::write_figures(dir, Execution::Parallel)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_report(r: &Resolved) -> Result<()> {
    let mut records = Vec::new();
    for profile in &r.profiles {
        for rec in schedule::runtime_sweep(&r.qubits, profile, r.epsilon, RuntimeMethod::Quadrature, Execution::Parallel) {
            records.push(rec?);
        }
    }
    let report = experiments::scaling_report(&records)?;
    print!("{}", report.render());
    if let Some(out) = &r.output {
        emit(out, &(serde_json::to_string_pretty(&report)? + "\n"))?;
    }
    Ok(())
}
