//! Batch front-end: every computation as a subcommand with machine-readable
//! output.  Exit codes: 0 success, 1 verification failure, 2 invalid
//! parameters or budget.

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use subsetlab::attacks::{
    default_overlap_threshold, estimate_advantage, AttackReport, Distinguisher, EnsembleSpec,
};
use subsetlab::density::{
    average_density_closed_form, average_density_closed_form_real, haar_moment, subset_moment,
    MomentMatrix,
};
use subsetlab::johnson::{spectrum, CirculantProfile};
use subsetlab::spectral::{block_trace_distance_exact, trace_distance_dense};
use subsetlab::verify::{
    circulant_matrix_f64, format_rational, parse_bias, run_verification, sweep_point, SweepConfig,
    SweepRow,
};
use subsetlab::{Budget, Error};

#[derive(Parser)]
#[command(
    name = "subsetlab",
    about = "Exact and numerical analysis of subset-state ensembles",
    version
)]
struct Cli {
    /// Enumeration budget override (also honored from SUBSETLAB_BUDGET).
    #[arg(long, global = true)]
    budget: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Block spectrum of the rescaled unique-type matrix.
    Spectrum(SpectrumArgs),
    /// Distance to the flat state, by block formula and/or dense matrices.
    TraceDistance(TraceDistanceArgs),
    /// Cross-check suite over a parameter grid; JSON report per check.
    Verify(VerifyArgs),
    /// Distinguisher advantage between two ensembles.
    Attack(AttackArgs),
    /// Scaling sweep: distance and bound terms per grid point, as CSV.
    Sweep(SweepArgs),
    /// Dump moment matrices (averaged or single-subset) to CSV or binary.
    Density(DensityArgs),
}

#[derive(Args)]
struct PointArgs {
    #[arg(long = "N", visible_alias = "n")]
    n: u64,
    #[arg(long)]
    m: u64,
    #[arg(long)]
    t: u32,
    /// Exact bias, e.g. "1", "1/2", "0".
    #[arg(long, default_value = "1")]
    b: String,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    point: PointArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum TdMethod {
    Matrix,
    Blocks,
    Both,
}

#[derive(Args)]
struct TraceDistanceArgs {
    #[command(flatten)]
    point: PointArgs,
    #[arg(long, value_enum, default_value = "both")]
    method: TdMethod,
}

#[derive(Args)]
struct VerifyArgs {
    /// JSON file holding the grid config; defaults to a small built-in grid.
    #[arg(long)]
    config: Option<String>,
    /// Inject a deliberate perturbation; the run must then fail (exit 1).
    #[arg(long)]
    negative_control: bool,
}

#[derive(Args)]
struct AttackArgs {
    /// "birthday" or "plus-overlap".
    #[arg(long)]
    attack: String,
    /// Ensemble spec: "subset:n=64,m=8", "subset:n=64,m=8,b=0.5", "haar:n=64".
    #[arg(long)]
    ensemble_a: String,
    #[arg(long)]
    ensemble_b: String,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Copies measured by the birthday test.
    #[arg(long, default_value_t = 2)]
    copies: u32,
    /// Overlap threshold; defaults to the geometric mean of the hypotheses.
    #[arg(long)]
    threshold: Option<f64>,
    /// Replace the exact overlap comparison with one Bernoulli(overlap) shot.
    #[arg(long)]
    sampled: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: ReportFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON file holding the grid config.
    #[arg(long, conflicts_with_all = ["n_list", "m_list", "t_list", "b_list"])]
    config: Option<String>,
    /// Comma-separated values, e.g. "32,64,128".
    #[arg(long)]
    n_list: Option<String>,
    #[arg(long)]
    m_list: Option<String>,
    #[arg(long)]
    t_list: Option<String>,
    #[arg(long, default_value = "1")]
    b_list: String,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    output: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DumpFormat {
    Csv,
    F64,
}

#[derive(Args)]
struct DensityArgs {
    #[command(flatten)]
    point: PointArgs,
    /// Dump a single subset state's moment instead of the ensemble average,
    /// e.g. "0,3,5" (labels inside [N]).
    #[arg(long)]
    subset: Option<String>,
    /// Phases for --subset, e.g. "1,-1,1".
    #[arg(long, requires = "subset")]
    phases: Option<String>,
    #[arg(long, value_enum, default_value = "csv")]
    format: DumpFormat,
    /// Output path; required for f64 (binary never goes to stdout).
    #[arg(long)]
    output: Option<String>,
}

fn exit_code_for(err: &Error) -> u8 {
    // Every library error here means bad parameters or an exceeded budget.
    let _ = err;
    2
}

fn resolve_budget(flag: Option<u64>) -> Budget {
    if let Some(b) = flag {
        return Budget(b);
    }
    if let Ok(env) = std::env::var("SUBSETLAB_BUDGET") {
        if let Ok(b) = env.parse::<u64>() {
            return Budget(b);
        }
    }
    Budget::default()
}

fn fail(msg: String, code: u8) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let budget = resolve_budget(cli.budget);
    let result = match cli.command {
        Command::Spectrum(args) => cmd_spectrum(args, &budget),
        Command::TraceDistance(args) => cmd_trace_distance(args, &budget),
        Command::Verify(args) => cmd_verify(args, &budget),
        Command::Attack(args) => cmd_attack(args),
        Command::Sweep(args) => cmd_sweep(args, &budget),
        Command::Density(args) => cmd_density(args, &budget),
    };
    match result {
        Ok(code) => code,
        Err(e) => fail(e.to_string(), exit_code_for(&e)),
    }
}

fn parse_point(p: &PointArgs) -> subsetlab::Result<(u64, u64, u32, BigRational)> {
    Ok((p.n, p.m, p.t, parse_bias(&p.b)?))
}

fn cmd_spectrum(args: SpectrumArgs, _budget: &Budget) -> subsetlab::Result<ExitCode> {
    let (n, m, t, bias) = parse_point(&args.point)?;
    let profile = CirculantProfile::new(n, m, t, bias)?;
    let spec = spectrum(&profile)?;
    println!("q,multiplicity,eigenvalue_exact,eigenvalue");
    for block in &spec.blocks {
        println!(
            "{},{},{},{}",
            block.q,
            block.multiplicity,
            format_rational(&block.eigenvalue),
            block.eigenvalue.to_f64().unwrap()
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_trace_distance(args: TraceDistanceArgs, budget: &Budget) -> subsetlab::Result<ExitCode> {
    let (n, m, t, bias) = parse_point(&args.point)?;
    let mut out = serde_json::Map::new();
    out.insert("N".into(), n.into());
    out.insert("m".into(), m.into());
    out.insert("t".into(), t.into());
    out.insert("b".into(), args.point.b.clone().into());

    let profile = CirculantProfile::new(n, m, t, bias.clone())?;
    let spec = spectrum(&profile)?;
    let block_exact = block_trace_distance_exact(&spec);
    let block_td = block_exact.to_f64().unwrap();

    match args.method {
        TdMethod::Blocks => {
            out.insert("method".into(), "blocks".into());
            out.insert("td_restricted_exact".into(), format_rational(&block_exact).into());
            out.insert("td_restricted".into(), block_td.into());
        }
        TdMethod::Matrix | TdMethod::Both => {
            let both = matches!(args.method, TdMethod::Both);
            out.insert(
                "method".into(),
                if both { "both" } else { "matrix" }.into(),
            );
            // Restricted distance from the dense circulant spectrum.
            let dense = circulant_matrix_f64(&profile, budget)?;
            let ambient = spec.ambient_dim.to_f64().unwrap();
            let td_restricted_matrix = dense
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .map(|l| (l - 1.0).abs())
                .sum::<f64>()
                / (2.0 * ambient);
            out.insert("td_restricted_matrix".into(), td_restricted_matrix.into());
            // Full-state distance on the whole symmetric subspace.
            let rho = average_density_closed_form_real(n, m, t, &bias, budget)?;
            let haar = haar_moment(n, t, budget)?;
            let td_full =
                trace_distance_dense(&rho.to_dmatrix(), &haar.to_dmatrix())?;
            out.insert("td_full_matrix".into(), td_full.into());
            if both {
                out.insert("td_restricted_exact".into(), format_rational(&block_exact).into());
                out.insert("td_restricted".into(), block_td.into());
                out.insert(
                    "agreement_delta".into(),
                    (td_restricted_matrix - block_td).abs().into(),
                );
            }
        }
    }
    println!("{}", serde_json::Value::Object(out));
    Ok(ExitCode::SUCCESS)
}

fn load_config(path: Option<&str>, budget: &Budget) -> subsetlab::Result<SweepConfig> {
    let mut config = match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| Error::InvalidParameter(format!("cannot read {p}: {e}")))?;
            serde_json::from_str(&text)
                .map_err(|e| Error::InvalidParameter(format!("bad config {p}: {e}")))?
        }
        None => SweepConfig::small_default(),
    };
    if config.budget.is_none() {
        config.budget = Some(budget.0);
    }
    Ok(config)
}

fn cmd_verify(args: VerifyArgs, budget: &Budget) -> subsetlab::Result<ExitCode> {
    let config = load_config(args.config.as_deref(), budget)?;
    let (reports, warnings) = run_verification(&config, args.negative_control)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let mut passed = 0usize;
    for r in &reports {
        println!("{}", serde_json::to_string(r).expect("report serializes"));
        if r.pass {
            passed += 1;
        }
    }
    eprintln!("{passed}/{} checks passed", reports.len());
    if passed == reports.len() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}

fn parse_ensemble(s: &str) -> subsetlab::Result<EnsembleSpec> {
    let bad = || Error::InvalidParameter(format!("bad ensemble spec {s:?}"));
    let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
    let mut n = None;
    let mut m = None;
    let mut b = None;
    for part in rest.split(',') {
        let (key, value) = part.split_once('=').ok_or_else(bad)?;
        match key.trim() {
            "n" | "N" => n = Some(value.trim().parse::<u64>().map_err(|_| bad())?),
            "m" => m = Some(value.trim().parse::<u64>().map_err(|_| bad())?),
            "b" => b = Some(value.trim().parse::<f64>().map_err(|_| bad())?),
            _ => return Err(bad()),
        }
    }
    let n = n.ok_or_else(bad)?;
    match kind.trim() {
        "subset" => Ok(EnsembleSpec::UniformSubset {
            n_labels: n,
            m: m.ok_or_else(bad)?,
            bias: b,
        }),
        "haar" => Ok(EnsembleSpec::Haar { n_labels: n }),
        _ => Err(bad()),
    }
}

fn cmd_attack(args: AttackArgs) -> subsetlab::Result<ExitCode> {
    let a = parse_ensemble(&args.ensemble_a)?;
    let b = parse_ensemble(&args.ensemble_b)?;
    let distinguisher = match args.attack.as_str() {
        "birthday" => Distinguisher::Birthday {
            copies: args.copies,
        },
        "plus-overlap" => Distinguisher::PlusOverlap {
            threshold: args
                .threshold
                .unwrap_or_else(|| default_overlap_threshold(&a, &b)),
            sampled: args.sampled,
        },
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown attack {other:?}; expected birthday or plus-overlap"
            )))
        }
    };
    let report = estimate_advantage(&distinguisher, &a, &b, args.trials, args.seed)?;
    match args.format {
        ReportFormat::Json => println!("{}", report.to_json()),
        ReportFormat::Csv => {
            println!("{}", AttackReport::csv_header());
            println!("{}", report.csv_row());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> subsetlab::Result<Vec<T>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<T>()
                .map_err(|_| Error::InvalidParameter(format!("bad {what} list entry {p:?}")))
        })
        .collect()
}

fn cmd_sweep(args: SweepArgs, budget: &Budget) -> subsetlab::Result<ExitCode> {
    let config = if args.config.is_some() {
        load_config(args.config.as_deref(), budget)?
    } else {
        let missing = |what: &str| {
            Error::InvalidParameter(format!("sweep needs --config or --{what}"))
        };
        SweepConfig {
            n_values: parse_list(&args.n_list.ok_or_else(|| missing("n-list"))?, "N")?,
            m_values: parse_list(&args.m_list.ok_or_else(|| missing("m-list"))?, "m")?,
            t_values: parse_list(&args.t_list.ok_or_else(|| missing("t-list"))?, "t")?,
            b_values: parse_list(&args.b_list, "b")?,
            tolerance: 1e-9,
            budget: Some(budget.0),
            seed: 0,
        }
    };
    let (points, warnings) = config.grid()?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    // Rows computed in parallel, emitted in grid order.
    let rows: Vec<subsetlab::Result<SweepRow>> = points
        .par_iter()
        .map(|p| sweep_point(p.n, p.m, p.t, &p.bias, &p.bias_label))
        .collect();
    let mut out = String::new();
    out.push_str(SweepRow::csv_header());
    out.push('\n');
    for row in rows {
        out.push_str(&row?.csv_row());
        out.push('\n');
    }
    match &args.output {
        Some(path) => fs::write(path, out)
            .map_err(|e| Error::InvalidParameter(format!("cannot write {path}: {e}")))?,
        None => print!("{out}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_subset_list(s: &str) -> subsetlab::Result<Vec<u64>> {
    parse_list(s, "subset")
}

fn parse_phase_list(s: &str) -> subsetlab::Result<Vec<i8>> {
    parse_list(s, "phase")
}

fn cmd_density(args: DensityArgs, budget: &Budget) -> subsetlab::Result<ExitCode> {
    let (n, m, t, bias) = parse_point(&args.point)?;
    let matrix: MomentMatrix = match &args.subset {
        Some(subset) => {
            let subset = parse_subset_list(subset)?;
            let phases = args.phases.as_deref().map(parse_phase_list).transpose()?;
            subset_moment(n, &subset, phases.as_deref(), t, budget)?
        }
        None => average_density_closed_form(n, m, t, &bias, budget)?,
    };
    match args.format {
        DumpFormat::Csv => {
            let mut buf = Vec::new();
            matrix.write_csv(&mut buf)?;
            match &args.output {
                Some(path) => fs::write(path, buf)
                    .map_err(|e| Error::InvalidParameter(format!("cannot write {path}: {e}")))?,
                None => {
                    std::io::stdout()
                        .write_all(&buf)
                        .map_err(|e| Error::InvalidParameter(format!("write failed: {e}")))?;
                }
            }
        }
        DumpFormat::F64 => {
            let path = args.output.as_ref().ok_or_else(|| {
                Error::InvalidParameter("binary dump requires --output".into())
            })?;
            let mut buf = Vec::new();
            matrix.write_f64_binary(&mut buf)?;
            fs::write(path, buf)
                .map_err(|e| Error::InvalidParameter(format!("cannot write {path}: {e}")))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}
