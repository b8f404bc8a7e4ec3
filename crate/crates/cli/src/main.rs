//! `cubespec`: exact census, Monte Carlo estimates and bound checks for
//! singular 0/1 matrices.

mod output;

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use cubespec_core::census::{self, CensusReport};
use cubespec_core::lo;
use cubespec_core::matrix::{BinaryMatrix, IntegerVector};
use cubespec_core::montecarlo::{self, Quantity, ReportMode, Sampling};
use cubespec_core::span;
use cubespec_core::structure::{self, ClassLabel};
use cubespec_core::CubeError;
use num_bigint::BigInt;
use serde::Serialize;
use serde_json::Value;

use output::{Field, Format, Record};

#[derive(Parser, Debug)]
#[command(
    name = "cubespec",
    version,
    about = "Singularity of random 0/1 matrices"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Append a JSON line describing the run to this file.
    #[arg(long, global = true)]
    ledger: Option<PathBuf>,
    /// Worker threads (default: machine parallelism).
    #[arg(long, global = true, env = "CUBESPEC_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(untagged)]
enum Command {
    /// Exact counts over all d x d 0/1 matrices.
    Census(CensusArgs),
    /// Exact counting identities checked against a full census.
    Identities(DimArgs),
    /// Monte Carlo estimate of the singular probability.
    SamplePs(SampleArgs),
    /// Exact expected number of cube points on a spanned hyperplane.
    ExactE(DimArgs),
    /// Monte Carlo estimate of the same expectation.
    SampleE(SampleArgs),
    /// Class, rank and strong rank of a matrix given as rows of 0/1.
    Classify(InputArgs),
    /// Cube points on a hyperplane given by a normal or by generators.
    SpanCount(SpanCountArgs),
    /// Littlewood-Offord level bound, or a check of it on one vector.
    LoBound(LoBoundArgs),
    /// The strong-rank tail sum at one dimension or over a range.
    LemmaSum(LemmaArgs),
    /// Singular probability next to its E(d) approximation.
    Theorem1(Theorem1Args),
    /// Singular probabilities by dimension, exact where feasible.
    Table(TableArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Census(_) => "census",
            Command::Identities(_) => "identities",
            Command::SamplePs(_) => "sample-ps",
            Command::ExactE(_) => "exact-e",
            Command::SampleE(_) => "sample-e",
            Command::Classify(_) => "classify",
            Command::SpanCount(_) => "span-count",
            Command::LoBound(_) => "lo-bound",
            Command::LemmaSum(_) => "lemma-sum",
            Command::Theorem1(_) => "theorem1",
            Command::Table(_) => "table",
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct DimArgs {
    #[arg(long)]
    dim: usize,
}

#[derive(Args, Debug, Serialize)]
struct CensusArgs {
    #[arg(long)]
    dim: usize,
    /// Visit one matrix per multiset of columns (needed for d = 6).
    #[arg(long)]
    symmetry: bool,
}

#[derive(Args, Debug, Serialize)]
struct SampleArgs {
    #[arg(long)]
    dim: usize,
    #[arg(long, default_value_t = montecarlo::DEFAULT_SAMPLES)]
    samples: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct InputArgs {
    /// Read from this file instead of standard input.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SpanCountArgs {
    /// Comma-separated integer normal, e.g. "1,-1,0".
    #[arg(long, allow_hyphen_values = true, conflicts_with = "input")]
    normal: Option<String>,
    /// File of generators, one 0/1 vector of length d per line
    /// (standard input when neither option is given).
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct LoBoundArgs {
    #[arg(long, required_unless_present = "verify", requires = "t")]
    n: Option<usize>,
    #[arg(long, requires = "n")]
    t: Option<usize>,
    /// Comma-separated integer vector whose level multiplicities are checked.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["n", "t"])]
    verify: Option<String>,
}

#[derive(Args, Debug, Serialize)]
struct LemmaArgs {
    #[arg(long, required_unless_present = "from", conflicts_with_all = ["from", "to"])]
    dim: Option<usize>,
    /// Scan from this dimension and report where the sum bound starts to hold.
    #[arg(long, requires = "to")]
    from: Option<usize>,
    #[arg(long, requires = "from")]
    to: Option<usize>,
    /// One row per summand instead of the total.
    #[arg(long, conflicts_with = "from")]
    terms: bool,
}

#[derive(Args, Debug, Serialize)]
struct Theorem1Args {
    #[arg(long)]
    dim: usize,
    /// Exact rationals from the census (d <= 5).
    #[arg(long)]
    exact: bool,
    #[arg(long, default_value_t = montecarlo::DEFAULT_SAMPLES)]
    samples: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct TableArgs {
    #[arg(long, default_value_t = 1)]
    from: usize,
    #[arg(long, default_value_t = montecarlo::TABLE_LIMIT)]
    to: usize,
    #[arg(long, default_value_t = montecarlo::DEFAULT_SAMPLES)]
    samples: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Largest dimension computed by exact census.
    #[arg(long, default_value_t = census::FULL_LIMIT)]
    exact_max: usize,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Cube(#[from] CubeError),
    #[error("{0}")]
    Io(#[from] io::Error),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Cube(e) => e.kind(),
            CliError::Io(_) => "Io",
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn read_input(path: &Option<PathBuf>) -> CliResult<String> {
    Ok(match path {
        Some(p) => fs::read_to_string(p)?,
        None => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            s
        }
    })
}

fn parse_vector(text: &str) -> CliResult<IntegerVector> {
    let entries = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<BigInt>()
                .map_err(|_| CubeError::InvalidInput(format!("not an integer: {t:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if entries.is_empty() {
        return Err(CubeError::InvalidInput("empty vector".into()).into());
    }
    Ok(IntegerVector(entries))
}

fn census_record(r: &CensusReport) -> Record {
    let mut rec = Record::new();
    rec.push("d", Field::int(r.d))
        .push("total", Field::int(r.total))
        .push("singular", Field::int(r.singular))
        .rational("probability", &r.ps_exact, 7);
    for (k, c) in r.by_rank.iter().enumerate() {
        rec.push(format!("rank_{k}"), Field::int(c));
    }
    for (k, c) in r.by_strong_rank.iter().enumerate() {
        rec.push(format!("strong_rank_{k}"), Field::int(c));
    }
    for label in ClassLabel::ALL {
        rec.push(format!("class_{label}"), Field::int(r.by_class.get(label)));
    }
    for label in ClassLabel::ALL {
        rec.push(
            format!("row_class_{label}"),
            Field::opt_int(r.by_class_rows.map(|c| c.get(label))),
        );
    }
    rec.push(
        "row_label_mismatches",
        Field::opt_int(r.row_label_mismatches),
    )
    .push("n_d", Field::int(r.n_d))
    .push("g_count", Field::int(r.g_count))
    .rational("e", &r.e_exact, 7)
    .push("mode", Field::text(serde_plain(&r.mode)))
    .push("visited", Field::int(r.visited));
    rec
}

fn serde_plain<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

fn quantity(rec: &mut Record, key: &str, q: &Quantity) {
    match q {
        Quantity::Exact(r) => {
            rec.rational(key, r, 7);
        }
        Quantity::Estimate(x) => {
            rec.push(key, Field::float(*x))
                .push(format!("{key}_numerator"), Field::Null)
                .push(format!("{key}_denominator"), Field::Null);
        }
    }
}

/// Runs a command inside the current worker pool.
fn run(cmd: &Command, workers: usize) -> CliResult<Vec<Record>> {
    let mut records = Vec::new();
    match cmd {
        Command::Census(a) => {
            let r = if a.symmetry {
                census::enumerate_symmetric(a.dim)?
            } else {
                census::enumerate_full(a.dim)?
            };
            records.push(census_record(&r));
        }
        Command::Identities(a) => {
            let c = census::verify_identities(a.dim)?;
            let mut rec = Record::new();
            rec.push("d", Field::int(c.d))
                .push("g_count", Field::int(c.g_count))
                .rational("e", &c.e_exact, 7)
                .push("regular", Field::int(c.regular))
                .rational("regular_predicted", &c.regular_predicted, 3)
                .push("regular_holds", Field::Bool(c.regular_holds))
                .push("s1", Field::int(c.s1))
                .rational("s1_predicted", &c.s1_predicted, 3)
                .push("s1_holds", Field::Bool(c.s1_holds))
                .push("s1_structure_holds", Field::Bool(c.s1_structure_holds))
                .push(
                    "decompositions_checked",
                    Field::int(c.decompositions_checked),
                )
                .push("decompositions_hold", Field::Bool(c.decompositions_hold));
            for (k, v) in [
                ("ratio_s2", c.ratio_s2),
                ("ratio_s1_s2", c.ratio_s1_s2),
                ("ratio_s3", c.ratio_s3),
                ("ratio_s4", c.ratio_s4),
            ] {
                rec.push(k, v.map_or(Field::Null, Field::float));
            }
            records.push(rec);
        }
        Command::SamplePs(a) => {
            let e = montecarlo::estimate_ps(a.dim, a.samples, a.seed, workers)?;
            let mut rec = Record::new();
            rec.push("d", Field::int(e.d))
                .push("samples", Field::int(e.samples))
                .push("hits", Field::int(e.hits))
                .push("estimate", Field::fixed(e.estimate, 7))
                .push("ci_low", Field::float(e.ci_low))
                .push("ci_high", Field::float(e.ci_high))
                .push("seed", Field::int(e.seed));
            records.push(rec);
        }
        Command::ExactE(a) => {
            let e = span::exact_e(a.dim)?;
            let mut rec = Record::new();
            rec.push("d", Field::int(e.dim))
                .push("g_count", Field::int(e.g_count))
                .push("point_sum", Field::int(e.point_sum))
                .rational("e", &e.e, 7);
            records.push(rec);
        }
        Command::SampleE(a) => {
            let s = span::sample_e(a.dim, a.samples, a.seed, workers)?;
            let mut rec = Record::new();
            rec.push("d", Field::int(s.dim))
                .push("samples", Field::int(s.samples))
                .push("accepted", Field::int(s.accepted))
                .push("rejected", Field::int(s.rejected))
                .push("rejection_rate", Field::float(s.rejection_rate))
                .push("mean", Field::float(s.mean))
                .push("std_err", Field::float(s.std_err))
                .push("ci_low", Field::float(s.ci_low))
                .push("ci_high", Field::float(s.ci_high))
                .push("seed", Field::int(s.seed));
            records.push(rec);
        }
        Command::Classify(a) => {
            let m = BinaryMatrix::parse(&read_input(&a.input)?)?;
            let c = structure::classify(&m)?;
            let mut rec = Record::new();
            rec.push("d", Field::int(m.rows()))
                .push("label", Field::text(c.label.to_string()))
                .push("rank", Field::int(c.rank))
                .push("strong_rank", Field::int(c.strong_rank))
                .push("kernel_support", Field::opt_int(c.kernel_support))
                .push("n_d", Field::int(structure::n_threshold(m.rows()).n_d));
            records.push(rec);
        }
        Command::SpanCount(a) => {
            let (normal, d) = match &a.normal {
                Some(text) => {
                    let v = parse_vector(text)?;
                    let d = v.len();
                    (v, d)
                }
                None => {
                    // generators are the rows of the input, i.e. the columns of G
                    let g = BinaryMatrix::parse(&read_input(&a.input)?)?.transpose()?;
                    let s = span::v_of_set(&g)?;
                    (s.normal, g.rows())
                }
            };
            let (count, method) = span::count_points(&normal);
            let t = normal.support_size();
            let mut rec = Record::new();
            rec.push("d", Field::int(d))
                .push("normal", Field::text(normal.to_string()))
                .push("support", Field::int(t))
                .push("point_count", Field::int(count))
                .push("method", Field::text(serde_plain(&method)))
                .push("lo_bound", Field::int(lo::lo_level_bound(d, t)?));
            records.push(rec);
        }
        Command::LoBound(a) => {
            let mut rec = Record::new();
            match &a.verify {
                Some(text) => {
                    let v = parse_vector(text)?;
                    let t = v.support_size();
                    let best = lo::max_level_multiplicity(&v)?;
                    let bound = lo::lo_level_bound(v.len(), t)?;
                    rec.push("n", Field::int(v.len()))
                        .push("t", Field::int(t))
                        .push("bound", Field::int(&bound))
                        .push("level_value", Field::int(&best.value))
                        .push("multiplicity", Field::int(best.multiplicity))
                        .push(
                            "within_bound",
                            Field::Bool(num_bigint::BigUint::from(best.multiplicity) <= bound),
                        );
                }
                None => {
                    let (n, t) = (a.n.expect("clap requires n"), a.t.expect("clap requires t"));
                    rec.push("n", Field::int(n))
                        .push("t", Field::int(t))
                        .push("bound", Field::int(lo::lo_level_bound(n, t)?));
                }
            }
            records.push(rec);
        }
        Command::LemmaSum(a) => match (a.dim, a.from, a.to) {
            (Some(d), _, _) => {
                let s = lo::lemma_sum(d)?;
                if a.terms {
                    for t in &s.terms {
                        let (m, e) = t.value.scientific();
                        let mut rec = Record::new();
                        rec.push("d", Field::int(d))
                            .push("k", Field::int(t.k))
                            .push("value", Field::text(format!("{m:.6}e{e}")))
                            .push(
                                "log10_ratio_to_term_bound",
                                Field::float(t.log10_ratio_to_term_bound),
                            )
                            .push("within_term_bound", Field::Bool(t.within_term_bound));
                        records.push(rec);
                    }
                } else {
                    let (m, e) = s.value.scientific();
                    let largest = s.largest_term.as_ref();
                    let mut rec = Record::new();
                    rec.push("d", Field::int(d))
                        .push("upper", Field::int(s.upper))
                        .push("value", Field::text(format!("{m:.6}e{e}")))
                        .push("log10_value", Field::float(s.log10_value))
                        .push(
                            "log10_bound",
                            Field::float(-(d as f64) * std::f64::consts::LOG10_2),
                        )
                        .push("within_bound", Field::Bool(s.within_bound))
                        .push("terms_within_bound", Field::Bool(s.terms_within_bound))
                        .push("largest_k", Field::opt_int(largest.map(|t| t.k)))
                        .push(
                            "largest_log10_ratio_to_term_bound",
                            largest
                                .map_or(Field::Null, |t| Field::float(t.log10_ratio_to_term_bound)),
                        );
                    records.push(rec);
                }
            }
            (None, Some(from), Some(to)) => {
                let s = lo::lemma_scan(from, to)?;
                let mut rec = Record::new();
                rec.push("from", Field::int(s.from))
                    .push("to", Field::int(s.to))
                    .push("first_nonempty", Field::opt_int(s.first_nonempty))
                    .push("holds_from", Field::opt_int(s.holds_from))
                    .push("failures", Field::int(s.failures))
                    .push(
                        "max_log10_excess",
                        s.log10_excess
                            .iter()
                            .map(|&(_, x)| x)
                            .reduce(f64::max)
                            .map_or(Field::Null, Field::float),
                    );
                records.push(rec);
            }
            _ => unreachable!("clap enforces --dim or --from/--to"),
        },
        Command::Theorem1(a) => {
            let mode = if a.exact {
                ReportMode::Exact
            } else {
                ReportMode::Sampled
            };
            let sampling = Sampling {
                samples: a.samples,
                seed: a.seed,
                workers,
            };
            let r = montecarlo::theorem1_report(a.dim, mode, sampling)?;
            let mut rec = Record::new();
            rec.push("d", Field::int(r.d))
                .push("mode", Field::text(serde_plain(&r.mode)));
            quantity(&mut rec, "lhs", &r.lhs);
            quantity(&mut rec, "e", &r.e_value);
            quantity(&mut rec, "rhs", &r.rhs);
            quantity(&mut rec, "ratio", &r.ratio);
            rec.push(
                "seed",
                if a.exact {
                    Field::Null
                } else {
                    Field::int(a.seed)
                },
            );
            records.push(rec);
        }
        Command::Table(a) => {
            let rows =
                montecarlo::reproduce_table(a.from, a.to, a.samples, a.seed, workers, a.exact_max)?;
            for r in rows {
                let mut rec = Record::new();
                rec.push("d", Field::int(r.d))
                    .push("matrices", Field::int(r.matrices))
                    .push("singular", Field::int(r.singular))
                    .push("p", Field::Num(r.probability_text()))
                    .push("d2_over_2d", Field::Num(r.curve_text()))
                    .push("ratio", Field::Num(r.ratio_text()))
                    .push("ci_low", Field::float(r.ci_low))
                    .push("ci_high", Field::float(r.ci_high))
                    .push("mode", Field::text(serde_plain(&r.mode)))
                    .push(
                        "p_numerator",
                        Field::opt_int(r.exact.as_ref().map(|p| p.numer())),
                    )
                    .push(
                        "p_denominator",
                        Field::opt_int(r.exact.as_ref().map(|p| p.denom())),
                    )
                    .push("seed", Field::opt_int(r.seed));
                records.push(rec);
            }
        }
    }
    Ok(records)
}

fn emit(cli: &Cli, records: &[Record]) -> io::Result<()> {
    let name = cli.command.name();
    match &cli.output {
        Some(path) => {
            let mut f = io::BufWriter::new(fs::File::create(path)?);
            output::write_records(&mut f, cli.format, name, records)?;
            f.flush()
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            output::write_records(&mut lock, cli.format, name, records)
        }
    }
}

fn report_error(cli: &Cli, err: &CliError) {
    eprintln!("error: {err}");
    if cli.format == Format::Json {
        let obj = serde_json::json!({
            "error": { "kind": err.kind(), "message": err.to_string() }
        });
        println!(
            "{}",
            serde_json::to_string_pretty(&obj).expect("plain json")
        );
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let workers = cli
        .workers
        .unwrap_or_else(cubespec_core::parallel::default_workers);
    let started = Instant::now();
    let result = cubespec_core::parallel::install(workers.max(1), || run(&cli.command, 0));
    let wall_time = started.elapsed().as_secs_f64();
    let records = match result {
        Ok(r) => r,
        Err(e) => {
            report_error(&cli, &e);
            return ExitCode::from(1);
        }
    };
    if let Err(e) = emit(&cli, &records) {
        report_error(&cli, &e.into());
        return ExitCode::from(1);
    }
    if let Some(path) = &cli.ledger {
        let mut parameters = match serde_json::to_value(&cli.command) {
            Ok(Value::Object(m)) => m,
            _ => serde_json::Map::new(),
        };
        parameters.insert("workers".into(), workers.into());
        parameters.insert(
            "argv".into(),
            std::env::args().skip(1).collect::<Vec<_>>().into(),
        );
        let record = output::RunRecord {
            schema_version: output::SCHEMA_VERSION,
            timestamp: output::now_rfc3339(),
            command: cli.command.name(),
            parameters: Value::Object(parameters),
            result: output::payload(cli.command.name(), &records),
            wall_time,
        };
        if let Err(e) = output::append_ledger(path, &record) {
            report_error(&cli, &e.into());
            return ExitCode::from(1);
        }
    }
    ExitCode::SUCCESS
}
