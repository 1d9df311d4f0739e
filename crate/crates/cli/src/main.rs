//! `bregman-epf`: divergences, aggregators, demands and transition costs from
//! the command line.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use bregman_epf::demand::{hicksian_demand_with, marshallian_demand_with, DemandSolution, Economy, Program};
use bregman_epf::epf::{epf_eval, epf_to_generator, exhaustivity_matrix, EpfLda, EpfSpec, ExhaustivityMatrix};
use bregman_epf::lda::{arithmetic_lda, dual_lda, lda_mean};
use bregman_epf::rng::DEFAULT_SEED;
use bregman_epf::transition::{bsi_canonical, trace_path, triangle_decompose, Side, TransitionDecomposition};
use bregman_epf::verify::{run_criterion, CriterionOutcome, CRITERIA};
use bregman_epf::{catalog_generator, Error, ErrorClass, Generator, GeneratorSpec, WeightedInputs};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "bregman-epf", version, about = "Bregman divergences, aggregators and production functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,

    /// Seed for randomized checks
    #[arg(long, default_value_t = DEFAULT_SEED, global = true)]
    seed: u64,

    /// Write the payload to FILE instead of standard output
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Bregman divergence D(x‖y) and the conjugate duality gap
    Divergence {
        #[command(flatten)]
        generator: GeneratorArgs,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
    },
    /// Aggregator value of a weighted bundle, or a production function
    Lda {
        #[command(flatten)]
        generator: GeneratorArgs,
        /// Production function spec (JSON or @file) instead of a generator
        #[arg(long, conflicts_with_all = ["family", "spec"])]
        epf: Option<String>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        x: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        gammas: Option<Vec<f64>>,
    },
    /// Marshallian and Hicksian demands
    Demand {
        #[command(flatten)]
        generator: GeneratorArgs,
        /// Economy JSON or @file
        #[arg(long, conflicts_with_all = ["prices", "gammas", "w", "mu_target", "p"])]
        economy: Option<String>,
        #[arg(long, value_delimiter = ',')]
        prices: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        gammas: Option<Vec<f64>>,
        /// Output price
        #[arg(long)]
        p: Option<f64>,
        /// Income
        #[arg(long)]
        w: Option<f64>,
        /// Target output
        #[arg(long, allow_hyphen_values = true)]
        mu_target: Option<f64>,
        #[arg(long, value_enum, default_value_t = DemandKind::Both)]
        kind: DemandKind,
        /// Solve the flipped program for convex aggregators
        #[arg(long)]
        flipped: bool,
    },
    /// Trace the segment between two bundles
    Path {
        #[command(flatten)]
        generator: GeneratorArgs,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        from: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        to: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        gammas: Option<Vec<f64>>,
        #[arg(long, default_value_t = 101)]
        samples: usize,
    },
    /// Split the cost of a transition through an intermediate bundle
    Decompose {
        #[command(flatten)]
        generator: GeneratorArgs,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        from: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        to: Vec<f64>,
        /// Intermediate bundle; defaults to the canonical one when an end is constant
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        via: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        gammas: Option<Vec<f64>>,
    },
    /// Property matrix of the production function catalog
    Exhaustivity,
    /// Run the randomized property suites
    Verify {
        /// Run a single suite
        #[arg(long)]
        only: Option<u8>,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum DemandKind {
    Marshallian,
    Hicksian,
    Both,
}

#[derive(Args, Debug)]
struct GeneratorArgs {
    /// Catalog family name
    #[arg(long, conflicts_with = "spec")]
    family: Option<String>,
    /// Generator spec as JSON or @file
    #[arg(long)]
    spec: Option<String>,
    /// Family parameters, k=v
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    params: Vec<String>,
}

enum Failure {
    Lib(Error),
    Config(String),
    Io(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Lib(e) => match e.class() {
                ErrorClass::Config => 2,
                ErrorClass::Domain => 3,
                ErrorClass::NoConvergence => 4,
            },
            Failure::Config(_) | Failure::Io(_) => 2,
            Failure::Verification(_) => 5,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Lib(e) => e.to_string(),
            Failure::Config(m) | Failure::Io(m) | Failure::Verification(m) => m.clone(),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn read_source(raw: &str) -> Outcome<String> {
    match raw.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).map_err(|e| Failure::Io(format!("cannot read {path}: {e}"))),
        None => Ok(raw.to_string()),
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(raw: &str, what: &str) -> Outcome<T> {
    let text = read_source(raw)?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("invalid {what}: {e}")))
}

fn parse_params(items: &[String]) -> Outcome<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for item in items {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Failure::Config(format!("parameter `{item}` is not of the form k=v")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Failure::Config(format!("parameter `{k}` is not a number: {v}")))?;
        if out.insert(k.trim().to_string(), v).is_some() {
            return Err(Failure::Config(format!("parameter `{k}` given twice")));
        }
    }
    Ok(out)
}

impl GeneratorArgs {
    fn build(&self) -> Outcome<Generator> {
        match (&self.family, &self.spec) {
            (Some(name), None) => Ok(catalog_generator(name, &parse_params(&self.params)?)?),
            (None, Some(raw)) => {
                if !self.params.is_empty() {
                    return Err(Failure::Config("--params cannot be combined with --spec".into()));
                }
                let spec: GeneratorSpec = parse_json(raw, "generator spec")?;
                Ok(Generator::try_from(&spec)?)
            }
            _ => Err(Failure::Config("give exactly one of --family or --spec".into())),
        }
    }
}

fn weights_or_ones(gammas: Option<Vec<f64>>, m: usize) -> Vec<f64> {
    gammas.unwrap_or_else(|| vec![1.0; m])
}

fn json_line<T: Serialize>(value: &T) -> Outcome<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Failure::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn csv_cells(out: &mut String, cells: &[f64]) {
    for v in cells {
        let _ = write!(out, ",{v:.16e}");
    }
}

fn cmd_divergence(g: &GeneratorArgs, x: f64, y: f64, format: Format) -> Outcome<String> {
    let gen = g.build()?;
    let d = gen.divergence(x, y)?;
    let gap = gen.duality_gap(x, y)?;
    match format {
        Format::Json => json_line(&json!({ "D": d, "dual_gap": gap })),
        Format::Csv => Ok(format!("D,dual_gap\n{d:.16e},{gap:.16e}\n")),
    }
}

fn cmd_lda(g: &GeneratorArgs, epf: Option<&str>, x: Vec<f64>, gammas: Option<Vec<f64>>, format: Format) -> Outcome<String> {
    if let Some(raw) = epf {
        let spec: EpfSpec = parse_json(raw, "production function spec")?;
        if gammas.is_some() {
            return Err(Failure::Config("--gammas does not apply to --epf; weights come from beta".into()));
        }
        let value = epf_eval(&spec, &x)?;
        let (lda, generator) = match epf_to_generator(&spec)? {
            EpfLda::Lda { generator, weights } => {
                let mu = lda_mean(&generator, &WeightedInputs::new(x.clone(), weights)?)?;
                (Some(mu), Some(generator.name()))
            }
            EpfLda::NotAnLda(_) => (None, None),
        };
        return match format {
            Format::Json => json_line(&json!({ "value": value, "lda": lda, "generator": generator })),
            Format::Csv => Ok(format!("value\n{value:.16e}\n")),
        };
    }
    let gen = g.build()?;
    let m = x.len();
    let inputs = WeightedInputs::new(x, weights_or_ones(gammas, m))?;
    let mu_phi = lda_mean(&gen, &inputs)?;
    let mu = arithmetic_lda(&inputs);
    let dual = dual_lda(&gen, &inputs).ok();
    match format {
        Format::Json => json_line(&json!({ "mu_phi": mu_phi, "arithmetic": mu, "dual": dual })),
        Format::Csv => Ok(format!("mu_phi,arithmetic\n{mu_phi:.16e},{mu:.16e}\n")),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_demand(
    g: &GeneratorArgs,
    economy: Option<&str>,
    prices: Option<Vec<f64>>,
    gammas: Option<Vec<f64>>,
    p: Option<f64>,
    w: Option<f64>,
    mu_target: Option<f64>,
    kind: DemandKind,
    flipped: bool,
    format: Format,
) -> Outcome<String> {
    let gen = g.build()?;
    let econ: Economy = match economy {
        Some(raw) => parse_json(raw, "economy")?,
        None => {
            let prices = prices.ok_or_else(|| Failure::Config("give --economy or --prices".into()))?;
            let weights = gammas.unwrap_or_else(|| prices.clone());
            Economy::new(p.unwrap_or(1.0), prices, weights, w, mu_target)?
        }
    };
    let program = if flipped { Program::Flipped } else { Program::Standard };
    let mut solutions: Vec<(&str, DemandSolution)> = Vec::new();
    if matches!(kind, DemandKind::Marshallian | DemandKind::Both) {
        solutions.push(("marshallian", marshallian_demand_with(&gen, &econ, program)?));
    }
    if matches!(kind, DemandKind::Hicksian | DemandKind::Both) {
        solutions.push(("hicksian", hicksian_demand_with(&gen, &econ, program)?));
    }
    match format {
        Format::Json => {
            let map: BTreeMap<&str, &DemandSolution> = solutions.iter().map(|(k, s)| (*k, s)).collect();
            json_line(&map)
        }
        Format::Csv => {
            let m = econ.dim();
            let mut out = String::from("kind,objective,residual,on_expansion_path");
            for i in 1..=m {
                let _ = write!(out, ",x_{i}");
            }
            out.push('\n');
            for (k, s) in &solutions {
                let _ = write!(out, "{k},{:.16e},{:.16e},{}", s.objective, s.residual, s.on_expansion_path);
                csv_cells(&mut out, &s.bundle);
                out.push('\n');
            }
            Ok(out)
        }
    }
}

const PATH_CONVENTION: &str = "cumulative_cost(λ) = Σ γ_i D(z_i(λ) ‖ from_i), z(λ) = (1−λ)·from + λ·to";
const DECOMPOSE_CONVENTION: &str = "total = Σ γ_i D(to_i ‖ from_i) = term1 [to ← via] + term2 [via ← from] + delta";

fn cmd_path(g: &GeneratorArgs, from: Vec<f64>, to: Vec<f64>, gammas: Option<Vec<f64>>, samples: usize, format: Format) -> Outcome<String> {
    let gen = g.build()?;
    let trace = trace_path(&gen, &from, &to, gammas.as_deref(), samples)?;
    eprintln!("convention: {PATH_CONVENTION}");
    match format {
        Format::Json => json_line(&trace),
        Format::Csv => Ok(trace.to_csv()),
    }
}

fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|a| *a == v[0])
}

fn cmd_decompose(
    g: &GeneratorArgs,
    from: Vec<f64>,
    to: Vec<f64>,
    via: Option<Vec<f64>>,
    gammas: Option<Vec<f64>>,
    format: Format,
) -> Outcome<String> {
    let gen = g.build()?;
    let weights = weights_or_ones(gammas, from.len());
    let z = match via {
        Some(z) => z,
        None if is_constant(&from) => bsi_canonical(&gen, &to, &weights, Side::Right)?,
        None if is_constant(&to) => bsi_canonical(&gen, &from, &weights, Side::Left)?,
        None => return Err(Failure::Config("neither end is a constant bundle; give --via".into())),
    };
    let d: TransitionDecomposition = triangle_decompose(&gen, &from, &to, &z, &weights)?;
    eprintln!("convention: {DECOMPOSE_CONVENTION}");
    match format {
        Format::Json => json_line(&d),
        Format::Csv => Ok(d.to_csv()),
    }
}

fn matrix_csv(m: &ExhaustivityMatrix) -> String {
    let mut out = String::from("family");
    for c in &m.columns {
        let _ = write!(out, ",{c}");
    }
    out.push('\n');
    for row in &m.rows {
        out.push_str(row.family.label());
        for cell in &row.cells {
            let _ = write!(out, ",{}({:.1e})", cell.mark, cell.residual);
        }
        out.push('\n');
    }
    out
}

fn cmd_exhaustivity(seed: u64, format: Format) -> Outcome<String> {
    let m = exhaustivity_matrix(seed)?;
    for (family, col, got, want) in m.mismatches() {
        eprintln!("mismatch: {} {col}: {got} (expected {want})", family.label());
    }
    match format {
        Format::Json => json_line(&m),
        Format::Csv => Ok(matrix_csv(&m)),
    }
}

fn cmd_verify(seed: u64, only: Option<u8>, format: Format) -> Outcome<(String, bool)> {
    let ids: Vec<u8> = match only {
        Some(id) => vec![id],
        None => CRITERIA.iter().map(|(id, _)| *id).collect(),
    };
    let mut outcomes: Vec<CriterionOutcome> = Vec::new();
    for id in ids {
        outcomes.push(run_criterion(id, seed)?);
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    let failed = outcomes.len() - passed;
    let text = match format {
        Format::Json => json_line(&json!({ "passed": passed, "failed": failed, "suites": outcomes }))?,
        Format::Csv => {
            let mut out = String::from("id,name,pass,checks,failures,worst\n");
            for o in &outcomes {
                let _ = writeln!(out, "{},{},{},{},{},{:e}", o.id, o.name, o.pass, o.checks, o.failures, o.worst);
            }
            out
        }
    };
    for o in &outcomes {
        eprintln!("[{}] {:>2} {}: {}", if o.pass { "PASS" } else { "FAIL" }, o.id, o.name, o.detail);
    }
    eprintln!("{passed} passed, {failed} failed");
    Ok((text, failed == 0))
}

fn run(cli: Cli) -> Outcome<()> {
    let format = cli.format;
    let mut verification_failed = false;
    let payload = match cli.command {
        Command::Divergence { generator, x, y } => cmd_divergence(&generator, x, y, format)?,
        Command::Lda { generator, epf, x, gammas } => cmd_lda(&generator, epf.as_deref(), x, gammas, format)?,
        Command::Demand {
            generator,
            economy,
            prices,
            gammas,
            p,
            w,
            mu_target,
            kind,
            flipped,
        } => cmd_demand(&generator, economy.as_deref(), prices, gammas, p, w, mu_target, kind, flipped, format)?,
        Command::Path {
            generator,
            from,
            to,
            gammas,
            samples,
        } => cmd_path(&generator, from, to, gammas, samples, format)?,
        Command::Decompose {
            generator,
            from,
            to,
            via,
            gammas,
        } => cmd_decompose(&generator, from, to, via, gammas, format)?,
        Command::Exhaustivity => cmd_exhaustivity(cli.seed, format)?,
        Command::Verify { only } => {
            let (text, ok) = cmd_verify(cli.seed, only, format)?;
            verification_failed = !ok;
            text
        }
    };
    match &cli.out {
        Some(path) => fs::write(path, payload).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{payload}"),
    }
    if verification_failed {
        return Err(Failure::Verification("one or more property suites failed".into()));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
