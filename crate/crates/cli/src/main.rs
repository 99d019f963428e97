use std::fs;
use std::io::{self, Read};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use ldsq_core::document::{canonical_json_pretty, format_g12, full_precision_json_pretty, ConfigDocument, ParsedConfig, WitnessDocument};
use ldsq_core::fibers::{sample_fiber_with, FiberWindow};
use ldsq_core::verifier::{DEFAULT_SAMPLES, DEFAULT_SEED, DEFAULT_TOL};
use ldsq_core::{
    build_euclid_witness, build_witness, classify_euclid, classify_lorentz, equivalent_to_euclidean,
    fiber_conic_type, verify_witness, Error, PointConfig, Scalar,
};

#[derive(Debug, Parser)]
#[command(name = "ldsq", version, about = "Classify Lorentzian distance-squared mappings and check their normal-form witnesses")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Verification tolerance on the sup-norm residual
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Number of seeded sample points
    #[arg(long, global = true)]
    samples: Option<usize>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Force the exact rational path; floating-point coordinates are rejected
    #[arg(long, global = true)]
    exact: bool,
}

#[derive(Debug, Args)]
struct Input {
    /// Configuration document (JSON); stdin when omitted or "-"
    input: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the classification report
    Classify {
        #[command(flatten)]
        input: Input,
        /// Classify the Euclidean distance-squared mapping instead
        #[arg(long)]
        euclid: bool,
    },
    /// Decide whether the mapping is A-equivalent to its Euclidean counterpart
    Compare {
        #[command(flatten)]
        input: Input,
    },
    /// Build the coordinate-change witness
    Witness {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        euclid: bool,
    },
    /// Check a witness against its configuration; exit 1 on failure
    Verify {
        /// Configuration; defaults to the one embedded in the witness file
        input: Option<PathBuf>,
        #[arg(long)]
        witness: PathBuf,
    },
    /// Sample points of the fiber L^{-1}(y)
    Fiber {
        #[command(flatten)]
        input: Input,
        /// Comma-separated target value, n entries
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        y: Option<Vec<f64>>,
        #[arg(long)]
        count: Option<usize>,
        /// Emit CSV with header x0,...,xn
        #[arg(long)]
        csv: bool,
        /// Hyperbola rapidity window |t| <= rapidity
        #[arg(long, default_value_t = 3.0)]
        rapidity: f64,
        /// Parabola window x_n in [-span, span]
        #[arg(long, default_value_t = 3.0)]
        span: f64,
    },
}

/// Anything that ends the run without a result.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Outcome = Result<(String, ExitCode), Failure>;

fn read_source(path: Option<&PathBuf>) -> Result<String, Failure> {
    match path {
        Some(p) if p.as_os_str() != "-" => {
            fs::read_to_string(p).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", p.display())))
        }
        _ => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).map_err(|e| Failure::Usage(format!("cannot read stdin: {e}")))?;
            Ok(s)
        }
    }
}

fn load(input: &Input, exact: bool) -> Result<(ConfigDocument, ParsedConfig), Failure> {
    let doc = ConfigDocument::from_json(&read_source(input.input.as_ref())?)?;
    let parsed = doc.parse(exact)?;
    Ok((doc, parsed))
}

/// Runs a generic body on whichever scalar the configuration was parsed as.
macro_rules! on_config {
    ($parsed:expr, |$c:ident| $body:expr) => {
        match $parsed {
            ParsedConfig::Exact($c) => $body,
            ParsedConfig::Float($c) => $body,
        }
    };
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn report_text(v: &Value) -> String {
    canonical_json_pretty(v) + "\n"
}

fn echo(parsed: &ParsedConfig) -> ConfigDocument {
    match parsed {
        ParsedConfig::Exact(c) => ConfigDocument::from_exact(c),
        ParsedConfig::Float(c) => ConfigDocument::from_float(c),
    }
}

fn run(cli: Cli) -> Outcome {
    let ok = |s: String| Ok((s, ExitCode::SUCCESS));
    match &cli.command {
        Command::Classify { input, euclid } => {
            let (_, parsed) = load(input, cli.exact)?;
            let report = if *euclid {
                on_config!(&parsed, |c| classify_euclid(c))?
            } else {
                on_config!(&parsed, |c| classify_lorentz(c))
            };
            ok(report_text(&to_value(&report)))
        }
        Command::Compare { input } => {
            let (_, parsed) = load(input, cli.exact)?;
            let eq = on_config!(&parsed, |c| equivalent_to_euclidean(c))?;
            ok(report_text(&json!({ "equivalent_to_euclidean": eq })))
        }
        Command::Witness { input, euclid } => {
            let (_, parsed) = load(input, cli.exact)?;
            let witness = if *euclid {
                on_config!(&parsed, |c| build_euclid_witness(c))?
            } else {
                on_config!(&parsed, |c| build_witness(c))?
            };
            let doc = WitnessDocument { config: echo(&parsed), witness };
            // full precision so the file verifies as written
            ok(full_precision_json_pretty(&to_value(&doc)) + "\n")
        }
        Command::Verify { input, witness } => {
            let wtext = fs::read_to_string(witness)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", witness.display())))?;
            let (embedded, w) = WitnessDocument::from_json(&wtext)?;
            let doc = match (input, embedded) {
                (Some(_), _) | (None, None) => ConfigDocument::from_json(&read_source(input.as_ref())?)?,
                (None, Some(d)) => d,
            };
            let parsed = doc.parse(cli.exact)?;
            let tol = cli.tol.or(doc.tol).unwrap_or(DEFAULT_TOL);
            let samples = cli.samples.or(doc.samples).unwrap_or(DEFAULT_SAMPLES);
            let seed = cli.seed.or(doc.seed).unwrap_or(DEFAULT_SEED);
            let report = on_config!(&parsed, |c| verify_witness(c, &w, samples, tol, seed))?;
            let code = if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) };
            Ok((report_text(&to_value(&report)), code))
        }
        Command::Fiber { input, y, count, csv, rapidity, span } => {
            let (doc, parsed) = load(input, cli.exact)?;
            let y = y
                .clone()
                .or(doc.y.clone())
                .ok_or_else(|| Failure::Usage("fiber needs a target value: pass --y or set \"y\"".into()))?;
            let count = count.or(doc.count).unwrap_or(16);
            let window = FiberWindow { rapidity: *rapidity, span: *span };
            on_config!(&parsed, |c| fiber_output(c, &y, count, window, *csv)).map(|s| (s, ExitCode::SUCCESS))
        }
    }
}

fn fiber_output<S: Scalar>(
    config: &PointConfig<S>,
    y: &[f64],
    count: usize,
    window: FiberWindow,
    csv: bool,
) -> Result<String, Failure> {
    let conic = fiber_conic_type(config)?;
    let points = sample_fiber_with(config, y, count, window)?;
    if csv {
        let n = config.n();
        let header: Vec<String> = (0..=n).map(|i| format!("x{i}")).collect();
        let mut out = header.join(",") + "\n";
        for p in &points {
            let row: Vec<String> = p.coords().iter().map(|v| format_g12(*v)).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        return Ok(out);
    }
    let pts: Vec<Vec<f64>> = points.iter().map(|p| p.coords().to_vec()).collect();
    Ok(report_text(&json!({
        "conic": conic,
        "count": pts.len(),
        "n": config.n(),
        "points": pts,
        "y": y,
    })))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((text, code)) => {
            print!("{text}");
            code
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
