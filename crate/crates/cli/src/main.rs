//! `hmcsplit` command-line tool.
//!
//! Exit codes: 0 on success, 2 for invalid arguments or input, 3 when a
//! numerical procedure fails, 1 for I/O and anything else.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hmcsplit::experiments::{
    bench_nongaussian, gnuplot_script, reproduce_fig2, reproduce_fig3, reproduce_fig4_fig5,
    RunScale, Table,
};
use hmcsplit::{
    catalog, diagnostics, error_constants, hmc_run, optimize_four_stage,
    optimize_four_stage_with_b1, optimize_three_stage, optimize_two_stage, rho_norm, run_replicas,
    stability_interval, Error, HmcConfig, SplittingScheme, Start, Target, CATALOG_NAMES,
};
use serde_json::json;

#[derive(Parser)]
#[command(name = "hmcsplit", version, about = "Splitting integrators for Hamiltonian Monte Carlo")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Base random seed.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory for CSV, JSON and gnuplot files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Use the full experiment sizes instead of the quick defaults.
    #[arg(long, global = true)]
    full: bool,
    /// Override the largest dimension of a sweep.
    #[arg(long, global = true)]
    max_dim: Option<usize>,
    /// Override the chain length of a sweep.
    #[arg(long = "chain-length", global = true)]
    chain_length: Option<usize>,
    /// Override the number of replicas of a sweep.
    #[arg(long = "replica-count", global = true)]
    replica_count: Option<usize>,
}

impl Global {
    fn scale(&self) -> RunScale {
        let mut s = if self.full { RunScale::full() } else { RunScale::ci() };
        if let Some(d) = self.max_dim {
            s.max_dim = d;
        }
        if let Some(n) = self.chain_length {
            s.chain_length = n;
        }
        if let Some(r) = self.replica_count {
            s.replicas = r;
        }
        s
    }
}

#[derive(Subcommand)]
enum Command {
    /// List or print the built-in schemes.
    Schemes {
        #[command(subcommand)]
        action: SchemesAction,
    },
    /// Tabulate θ, χ and ρ of a scheme and summarize it as JSON.
    Analyze {
        /// Catalog name, or a JSON file optionally suffixed with `#label`.
        #[arg(long)]
        scheme: String,
        /// Upper end of the ρ-norm interval and of the table.
        #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
        hbar: f64,
        /// Table rows.
        #[arg(long, default_value_t = 400)]
        points: usize,
    },
    /// Minimize the ρ-norm over a family of schemes.
    Optimize {
        #[arg(long, value_enum)]
        family: FamilyArg,
        /// Interval for the two-stage family.
        #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
        hbar: f64,
        /// Hold b1 fixed in the four-stage search.
        #[arg(long)]
        b1: Option<f64>,
        /// JSON catalog file to which the optimized scheme is appended.
        #[arg(long)]
        catalog: Option<PathBuf>,
    },
    /// Run HMC chains and print a JSON summary.
    Sample {
        /// `chain:<d>`, `gauss:<d>`, `dwell` or `diag:<w1>,<w2>,...`
        #[arg(long)]
        target: String,
        #[arg(long)]
        scheme: String,
        #[arg(long, allow_negative_numbers = true)]
        h0: f64,
        /// Time-steps per proposal.
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 1000)]
        length: usize,
        #[arg(long, default_value_t = 0)]
        burnin: usize,
        #[arg(long, default_value_t = 0.2)]
        jitter: f64,
        /// Independent replicas, one generator stream each.
        #[arg(long, default_value_t = 1)]
        replicas: usize,
        /// Start at this point instead of an exact stationary draw.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        start: Option<Vec<f64>>,
        /// Include one record per step in the output.
        #[arg(long)]
        record: bool,
    },
    /// Regenerate the data behind a figure or benchmark.
    Reproduce {
        #[arg(value_enum)]
        what: Figure,
    },
}

#[derive(Subcommand)]
enum SchemesAction {
    List,
    Show { name: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    #[value(name = "2stage")]
    Two,
    #[value(name = "3stage")]
    Three,
    #[value(name = "4stage")]
    Four,
}

#[derive(Clone, Copy, ValueEnum)]
enum Figure {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Bench,
}

impl Figure {
    fn name(self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Bench => "bench",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(
            Error::InvalidScheme(_)
            | Error::UnknownScheme { .. }
            | Error::Domain { .. }
            | Error::Dimension { .. }
            | Error::NoExactSampler(_)
            | Error::TargetSpec(_)
            | Error::Config(_),
        ) => 2,
        Some(_) => 3,
        None if e.is::<UsageError>() => 2,
        None => 1,
    }
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.global.threads {
        if n == 0 {
            return Err(UsageError("--threads must be positive".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let g = &cli.global;
    match cli.command {
        Command::Schemes { action } => schemes(action),
        Command::Analyze { scheme, hbar, points } => analyze(g, &scheme, hbar, points),
        Command::Optimize { family, hbar, b1, catalog } => optimize(family, hbar, b1, catalog.as_deref()),
        Command::Sample {
            target,
            scheme,
            h0,
            steps,
            length,
            burnin,
            jitter,
            replicas,
            start,
            record,
        } => {
            let target: Target = target.parse()?;
            let scheme = resolve_scheme(&scheme)?;
            let mut config = HmcConfig::new(h0, steps, length);
            config.burn_in = burnin;
            config.jitter = jitter;
            config.seed = g.seed;
            config.record = record;
            if let Some(q) = start {
                config.start = Start::GivenPoint(q);
            }
            sample(&target, &scheme, &config, replicas)
        }
        Command::Reproduce { what } => reproduce(g, what),
    }
}

/// Looks a scheme up in the catalog, or loads it from a JSON file holding one
/// scheme or an array of them. `file#label` selects by label.
fn resolve_scheme(spec: &str) -> anyhow::Result<SplittingScheme> {
    if let Ok(s) = catalog(spec) {
        return Ok(s);
    }
    let (path, label) = match spec.rsplit_once('#') {
        Some((p, l)) => (p, Some(l)),
        None => (spec, None),
    };
    if !Path::new(path).exists() {
        return Err(catalog(spec).unwrap_err().into());
    }
    let schemes = read_catalog_file(Path::new(path))?;
    match label {
        Some(l) => schemes
            .into_iter()
            .find(|s| s.label() == l)
            .ok_or_else(|| UsageError(format!("no scheme labelled `{l}` in {path}")).into()),
        None if schemes.len() == 1 => Ok(schemes.into_iter().next().unwrap()),
        None => Err(UsageError(format!(
            "{path} holds {} schemes; select one with `{path}#<label>`",
            schemes.len()
        ))
        .into()),
    }
}

fn read_catalog_file(path: &Path) -> anyhow::Result<Vec<SplittingScheme>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::InvalidScheme(format!("{}: {e}", path.display())))?;
    let items = match value {
        serde_json::Value::Array(items) => items,
        one => vec![one],
    };
    items
        .into_iter()
        .map(|v| SplittingScheme::from_json(&v.to_string()).map_err(Into::into))
        .collect()
}

fn print_json(value: &serde_json::Value) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{}", serde_json::to_string_pretty(value)?) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn schemes(action: SchemesAction) -> anyhow::Result<()> {
    match action {
        SchemesAction::List => {
            println!("{:<18} {:>2} {:>11} {:>10}", "name", "r", "kind", "h_max");
            for name in CATALOG_NAMES {
                let s = catalog(name)?;
                println!(
                    "{:<18} {:>2} {:>11} {:>10.5}",
                    name,
                    s.stage_count(),
                    format!("{:?}", s.leading_kind()),
                    stability_interval(&s)
                );
            }
            Ok(())
        }
        SchemesAction::Show { name } => {
            println!("{}", resolve_scheme(&name)?.to_json());
            Ok(())
        }
    }
}

fn analyze(g: &Global, spec: &str, hbar: f64, points: usize) -> anyhow::Result<()> {
    if !(hbar > 0.0 && hbar.is_finite()) || points == 0 {
        return Err(UsageError("--hbar must be positive and --points nonzero".into()).into());
    }
    let scheme = resolve_scheme(spec)?;
    let mut csv = String::from("h,stable,theta,chi,rho\n");
    for k in 1..=points {
        let d = diagnostics(&scheme, hbar * k as f64 / points as f64);
        csv.push_str(&format!(
            "{:.6},{},{:.12e},{:.12e},{:.12e}\n",
            d.h, d.stable as u8, d.theta, d.chi, d.rho
        ));
    }
    let file = g.out.join(format!("analyze_{}.csv", file_stem(scheme.label())));
    write_file(&file, &csv)?;
    let k = error_constants(&scheme).ok();
    print_json(&json!({
        "scheme": scheme,
        "h_bar": hbar,
        "stability_interval": stability_interval(&scheme),
        "rho_norm": finite_or_null(rho_norm(&scheme, hbar)),
        "error_constants": k,
        "table": file,
    }))
}

fn finite_or_null(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(x)
    } else {
        serde_json::Value::Null
    }
}

fn file_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn optimize(family: FamilyArg, hbar: f64, b1: Option<f64>, catalog_file: Option<&Path>) -> anyhow::Result<()> {
    let report = match (family, b1) {
        (FamilyArg::Two, None) => optimize_two_stage(hbar)?,
        (FamilyArg::Three, None) => optimize_three_stage()?,
        (FamilyArg::Four, None) => optimize_four_stage()?,
        (FamilyArg::Four, Some(b1)) => optimize_four_stage_with_b1(b1)?,
        (_, Some(_)) => bail!(UsageError("--b1 applies to the 4stage family only".into())),
    };
    if let Some(path) = catalog_file {
        let mut entries = if path.exists() { read_catalog_file(path)? } else { Vec::new() };
        entries.push(report.scheme.clone());
        write_file(path, &serde_json::to_string_pretty(&entries)?)?;
    }
    print_json(&serde_json::to_value(&report)?)
}

fn sample(target: &Target, scheme: &SplittingScheme, config: &HmcConfig, replicas: usize) -> anyhow::Result<()> {
    if replicas == 0 {
        return Err(UsageError("--replicas must be positive".into()).into());
    }
    let runs = if replicas == 1 {
        vec![hmc_run(target, scheme, config)?]
    } else {
        run_replicas(target, scheme, config, replicas)?
    };
    let acc: Vec<f64> = runs.iter().map(|r| r.accepted_fraction).collect();
    let mean = acc.iter().sum::<f64>() / acc.len() as f64;
    print_json(&json!({
        "target": target.name(),
        "scheme": scheme.label(),
        "config": config,
        "mean_acceptance": mean,
        "runs": runs,
    }))
}

fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn write_table(g: &Global, name: &str, table: &Table) -> anyhow::Result<()> {
    let csv = format!("{name}.csv");
    write_file(&g.out.join(&csv), &table.to_csv())?;
    if let Some(script) = gnuplot_script(name, &csv) {
        write_file(&g.out.join(format!("{name}.gp")), &script)?;
    }
    println!("wrote {}", g.out.join(csv).display());
    Ok(())
}

fn reproduce(g: &Global, what: Figure) -> anyhow::Result<()> {
    let scale = g.scale();
    if scale.max_dim == 0 || scale.chain_length == 0 || scale.replicas == 0 {
        return Err(UsageError("scale overrides must be positive".into()).into());
    }
    match what {
        Figure::Fig2 => write_table(g, "fig2", &reproduce_fig2(g.seed, &scale)?),
        Figure::Fig3 => write_table(g, "fig3", &reproduce_fig3()),
        Figure::Fig4 | Figure::Fig5 => write_table(g, what.name(), &reproduce_fig4_fig5(g.seed, &scale)?),
        Figure::Bench => {
            let report = bench_nongaussian(g.seed, &scale)?;
            let file = g.out.join("bench.json");
            write_file(&file, &serde_json::to_string_pretty(&report)?)?;
            for row in &report.rows {
                println!("{:<10} mu {:.4} sigma {:.4}", row.scheme, row.mu, row.sigma);
            }
            println!("wrote {}", file.display());
            Ok(())
        }
    }
}
