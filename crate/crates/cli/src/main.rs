//! `avoidlab`: command-line front end.
//!
//! Every command prints one JSON document (or CSV with `--format csv`) that
//! carries a `manifest` with the command, its parameters, the seed, the
//! crate version and the wall time.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use avoidlab::count::{
    count_occurrences, count_occurrences_block_fast, count_occurrences_decomposable, is_avoiding,
};
use avoidlab::dyck::DyckPath;
use avoidlab::enumerate::{enumerate_avoiders, exact_distribution};
use avoidlab::excursion::{estimate_via_permutations, estimate_w_moment, Estimate};
use avoidlab::moments::{self, MeanMethod};
use avoidlab::polytope::{block_volume, w_const};
use avoidlab::rng::stream_rng;
use avoidlab::{Error, ExactValue, Permutation};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

const SCHEMA: u64 = 1;
const DIGITS: usize = 50;
const VOLUME_TABLE_MAX: usize = 7;

#[derive(Parser, Debug)]
#[command(name = "avoidlab", version, about = "Patterns in random 321-avoiding permutations")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write output to FILE instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CountMethod {
    Auto,
    Brute,
    Block,
    Decomposable,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Indecomposable,
    TwoBlocks,
    SingleNontrivialBlock,
    EqualBlocks,
    Wick,
}

impl From<MethodArg> for MeanMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Indecomposable => MeanMethod::Indecomposable,
            MethodArg::TwoBlocks => MeanMethod::TwoBlocks,
            MethodArg::SingleNontrivialBlock => MeanMethod::SingleNontrivialBlock,
            MethodArg::EqualBlocks => MeanMethod::EqualBlocks,
            MethodArg::Wick => MeanMethod::Wick,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum McPath {
    Excursion,
    Permutation,
}

fn parse_perm(s: &str) -> Result<Permutation, String> {
    s.parse::<Permutation>().map_err(|e| e.to_string())
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Count occurrences of a pattern in a permutation.
    Count {
        #[arg(long, value_parser = parse_perm)]
        sigma: Permutation,
        #[arg(long, value_parser = parse_perm)]
        pi: Permutation,
        #[arg(long, value_enum, default_value_t = CountMethod::Auto)]
        method: CountMethod,
    },
    /// Test whether a permutation avoids a pattern.
    Avoid {
        #[arg(long, value_parser = parse_perm)]
        tau: Permutation,
        #[arg(long, value_parser = parse_perm)]
        pi: Permutation,
    },
    /// Block decomposition and displacement profile.
    Blocks {
        #[arg(long, value_parser = parse_perm)]
        pi: Permutation,
    },
    /// Uniform random 321-avoiding permutations.
    SamplePerm {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Uniform random Dyck paths.
    SampleDyck {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Volume of the constraint polytope of a block.
    Volume {
        #[arg(long, value_parser = parse_perm, required_unless_present = "table")]
        sigma: Option<Permutation>,
        /// Tabulate every block of length 2..=M instead.
        #[arg(long, value_name = "M", conflicts_with = "sigma")]
        table: Option<usize>,
    },
    /// The constant w_sigma.
    Wconst {
        #[arg(long, value_parser = parse_perm)]
        sigma: Permutation,
    },
    /// Closed-form E W_sigma.
    Mean {
        #[arg(long, value_parser = parse_perm)]
        sigma: Permutation,
        /// Use a single method instead of cross-checking all of them.
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
    },
    /// Closed-form Var W_sigma and E W_sigma^2.
    Variance {
        #[arg(long, value_parser = parse_perm)]
        sigma: Permutation,
    },
    /// Monte Carlo estimate of E W_sigma^k.
    Mc {
        #[arg(long, value_parser = parse_perm)]
        sigma: Permutation,
        #[arg(long, value_enum, default_value_t = McPath::Excursion)]
        path: McPath,
        #[arg(long, default_value_t = 1)]
        power: u32,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 4096)]
        grid: usize,
        /// Host size for the permutation path.
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, env = "AVOIDLAB_WORKERS")]
        workers: Option<usize>,
    },
    /// List S_n(tau).
    Enumerate {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = parse_perm, default_value = "3 2 1")]
        tau: Permutation,
    },
    /// Exact distribution of n_sigma over S_n(tau).
    Dist {
        #[arg(long, value_parser = parse_perm)]
        sigma: Permutation,
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = parse_perm, default_value = "3 2 1")]
        tau: Permutation,
    },
    /// Recompute the reference constants; nonzero exit on any mismatch.
    Verify {
        /// Also compare Monte Carlo estimates with the closed forms.
        #[arg(long)]
        mc: bool,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 4096)]
        grid: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, env = "AVOIDLAB_WORKERS")]
        workers: Option<usize>,
    },
}

/// Result of a command before rendering.
struct Report {
    fields: Map<String, Value>,
    params: Value,
    seed: Option<u64>,
    /// Rows for CSV output; scalar fields are used otherwise.
    table: Option<(Vec<&'static str>, Vec<Vec<String>>)>,
    /// Preformatted CSV, if the command has its own layout.
    csv: Option<String>,
    failed: bool,
}

impl Report {
    fn new(params: Value) -> Self {
        Report {
            fields: Map::new(),
            params,
            seed: None,
            table: None,
            csv: None,
            failed: false,
        }
    }

    fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.fields.insert(key.to_string(), value.into());
    }
}

fn exact_json(v: &ExactValue) -> Value {
    json!({ "exact": v.to_string(), "decimal": v.to_decimal(DIGITS) })
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Count { .. } => "count",
        Command::Avoid { .. } => "avoid",
        Command::Blocks { .. } => "blocks",
        Command::SamplePerm { .. } => "sample-perm",
        Command::SampleDyck { .. } => "sample-dyck",
        Command::Volume { .. } => "volume",
        Command::Wconst { .. } => "wconst",
        Command::Mean { .. } => "mean",
        Command::Variance { .. } => "variance",
        Command::Mc { .. } => "mc",
        Command::Enumerate { .. } => "enumerate",
        Command::Dist { .. } => "dist",
        Command::Verify { .. } => "verify",
    }
}

fn seed_or_entropy(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(rand::random)
}

fn run(command: &Command) -> avoidlab::Result<Report> {
    match command {
        Command::Count { sigma, pi, method } => {
            let count = match method {
                CountMethod::Brute => count_occurrences(sigma, pi),
                CountMethod::Block => count_occurrences_block_fast(sigma, pi)?,
                CountMethod::Decomposable => count_occurrences_decomposable(sigma, pi)?,
                CountMethod::Auto if pi.avoids_321() && sigma.avoids_321() => {
                    if sigma.len() > 1 && sigma.is_indecomposable() {
                        count_occurrences_block_fast(sigma, pi)?
                    } else {
                        count_occurrences_decomposable(sigma, pi)?
                    }
                }
                CountMethod::Auto => count_occurrences(sigma, pi),
            };
            let mut r = Report::new(json!({ "sigma": sigma, "pi": pi, "method": format!("{method:?}").to_lowercase() }));
            r.set("count", count.to_string());
            Ok(r)
        }
        Command::Avoid { tau, pi } => {
            let mut r = Report::new(json!({ "tau": tau, "pi": pi }));
            r.set("avoids", is_avoiding(tau, pi));
            Ok(r)
        }
        Command::Blocks { pi } => {
            let blocks = pi.blocks();
            let profile = pi.displacement_profile();
            let mut r = Report::new(json!({ "pi": pi }));
            r.set("count", blocks.count());
            r.set("lengths", json!(blocks.lengths()));
            r.set("blocks", json!(blocks.perms().collect::<Vec<_>>()));
            r.set("deltas", json!(profile.deltas));
            r.set("eplus", json!(profile.eplus));
            r.set("eminus", json!(profile.eminus));
            r.set("deltastar", profile.deltastar);
            r.table = Some((
                vec!["block", "start", "length", "perm"],
                blocks
                    .blocks
                    .iter()
                    .enumerate()
                    .map(|(i, b)| vec![(i + 1).to_string(), b.start.to_string(), b.perm.len().to_string(), b.perm.to_string()])
                    .collect(),
            ));
            Ok(r)
        }
        Command::SamplePerm { n, count, seed } => {
            let seed = seed_or_entropy(*seed);
            let perms = (0..*count as u64)
                .map(|i| DyckPath::sample_uniform(*n, &mut stream_rng(seed, i)).map(|d| d.to_permutation()))
                .collect::<avoidlab::Result<Vec<_>>>()?;
            let mut r = Report::new(json!({ "n": n, "count": count }));
            r.seed = Some(seed);
            r.table = Some((vec!["index", "perm"], perms.iter().enumerate().map(|(i, p)| vec![i.to_string(), p.to_string()]).collect()));
            r.set("permutations", json!(perms));
            Ok(r)
        }
        Command::SampleDyck { n, count, seed } => {
            let seed = seed_or_entropy(*seed);
            let paths = (0..*count as u64)
                .map(|i| DyckPath::sample_uniform(*n, &mut stream_rng(seed, i)).map(|d| d.to_string()))
                .collect::<avoidlab::Result<Vec<_>>>()?;
            let mut r = Report::new(json!({ "n": n, "count": count }));
            r.seed = Some(seed);
            r.table = Some((vec!["index", "path"], paths.iter().enumerate().map(|(i, p)| vec![i.to_string(), p.clone()]).collect()));
            r.set("paths", json!(paths));
            Ok(r)
        }
        Command::Volume { sigma: Some(sigma), .. } => {
            let v = block_volume(sigma)?;
            let mut r = Report::new(json!({ "sigma": sigma }));
            r.set("v", v.to_string());
            r.set("decimal", ExactValue::rational(v.volume.clone()).to_decimal(DIGITS));
            r.set("nu", nu_json(&v));
            Ok(r)
        }
        Command::Volume { table, .. } => {
            let max = table.expect("clap requires sigma or table");
            if !(2..=VOLUME_TABLE_MAX).contains(&max) {
                return Err(Error::CapExceeded(format!(
                    "volume tables cover block lengths 2..={VOLUME_TABLE_MAX}"
                )));
            }
            let tau: Permutation = "321".parse()?;
            let mut rows = Vec::new();
            let mut entries = Vec::new();
            for m in 2..=max {
                for sigma in enumerate_avoiders(m, &tau)?.filter(Permutation::is_indecomposable) {
                    let v = block_volume(&sigma)?;
                    rows.push(vec![sigma.to_string(), m.to_string(), v.to_string(), nu_json(&v).to_string()]);
                    entries.push(json!({ "sigma": sigma, "m": m, "v": v.to_string(), "nu": nu_json(&v) }));
                }
            }
            let mut r = Report::new(json!({ "table": max }));
            r.set("blocks", Value::Array(entries));
            r.table = Some((vec!["sigma", "m", "v", "nu"], rows));
            Ok(r)
        }
        Command::Wconst { sigma } => {
            let w = w_const(sigma)?;
            let mut r = Report::new(json!({ "sigma": sigma }));
            r.fields.extend(as_map(exact_json(&w)));
            Ok(r)
        }
        Command::Mean { sigma, method } => {
            let mut r = Report::new(json!({ "sigma": sigma, "method": method.map(|m| MeanMethod::from(m).to_string()) }));
            let (value, methods) = match method {
                Some(m) => (moments::mean_by_method(sigma, (*m).into())?, vec![MeanMethod::from(*m)]),
                None => {
                    let report = moments::mean_w_detailed(sigma)?;
                    (report.value, report.methods)
                }
            };
            r.fields.extend(as_map(exact_json(&value)));
            r.set("methods", json!(methods));
            Ok(r)
        }
        Command::Variance { sigma } => {
            let var = moments::variance_w(sigma)?;
            let mut r = Report::new(json!({ "sigma": sigma }));
            r.fields.extend(as_map(exact_json(&var)));
            r.set("mean", exact_json(&moments::mean_w(sigma)?));
            r.set("second_moment", exact_json(&moments::second_moment(sigma)?));
            Ok(r)
        }
        Command::Mc { sigma, path, power, samples, grid, n, seed, workers } => {
            let seed = seed_or_entropy(*seed);
            let mut r;
            let (est, closed): (Estimate, Option<ExactValue>) = match path {
                McPath::Excursion => {
                    r = Report::new(json!({ "sigma": sigma, "path": "excursion", "power": power, "samples": samples, "grid": grid, "workers": workers }));
                    r.set("statistic", format!("W^{power}"));
                    let est = estimate_w_moment(sigma, *power, *samples, *grid, seed, *workers)?;
                    r.set("G", *grid);
                    (est, moments::moment_w(sigma, *power).ok())
                }
                McPath::Permutation => {
                    if *power != 1 {
                        return Err(Error::InvalidArgument("the permutation path estimates the mean only".into()));
                    }
                    r = Report::new(json!({ "sigma": sigma, "path": "permutation", "samples": samples, "n": n, "workers": workers }));
                    r.set("statistic", "n_sigma / n^((m+l)/2)");
                    let est = estimate_via_permutations(sigma, *n, *samples, seed, *workers)?;
                    r.set("n", *n);
                    (est, moments::mean_w(sigma).ok())
                }
            };
            r.seed = Some(seed);
            r.set("sigma", sigma.to_string());
            r.set("mean", est.mean);
            r.set("stderr", est.stderr);
            r.set("N", est.samples);
            r.set("seed", seed);
            match &closed {
                Some(c) => {
                    r.set("closed_form", exact_json(c));
                    r.set("z_score", est.z_score(c.to_f64()));
                }
                None => {
                    r.set("closed_form", Value::Null);
                    r.set("z_score", Value::Null);
                }
            }
            Ok(r)
        }
        Command::Enumerate { n, tau } => {
            let perms: Vec<Permutation> = enumerate_avoiders(*n, tau)?.collect();
            let mut r = Report::new(json!({ "n": n, "tau": tau }));
            r.set("count", perms.len());
            r.table = Some((vec!["perm"], perms.iter().map(|p| vec![p.to_string()]).collect()));
            r.set("permutations", json!(perms));
            Ok(r)
        }
        Command::Dist { sigma, n, tau } => {
            let table = exact_distribution(sigma, *n, tau)?;
            let mut r = Report::new(json!({ "sigma": sigma, "n": n, "tau": tau }));
            r.set("total", table.total().to_string());
            r.set("mean", table.mean().to_string());
            r.set("variance", table.variance().to_string());
            r.set("counts", serde_json::to_value(&table).expect("serializable")["counts"].take());
            let mut buf = Vec::new();
            table.write_csv(&mut buf).expect("writing to memory");
            r.csv = Some(String::from_utf8(buf).expect("ascii"));
            Ok(r)
        }
        Command::Verify { mc, samples, grid, seed, workers } => {
            let mut checks: Vec<Value> = Vec::new();
            let mut rows = Vec::new();
            let mut failed = false;
            for c in avoidlab::verify::exact_checks() {
                failed |= !c.ok;
                rows.push(vec![c.name.clone(), c.expected.clone(), c.got.clone(), c.ok.to_string()]);
                checks.push(serde_json::to_value(&c).expect("serializable"));
            }
            if *mc {
                for s in ["21", "231", "1243", "2314675"] {
                    let sigma: Permutation = s.parse()?;
                    let exact = moments::mean_w(&sigma)?;
                    let est = estimate_w_moment(&sigma, 1, *samples, *grid, *seed, *workers)?;
                    let x = exact.to_f64();
                    let ok = (est.mean - x).abs() <= 3.0 * est.stderr && ((est.mean - x) / x).abs() <= 0.02;
                    failed |= !ok;
                    let name = format!("mc mean {s}");
                    let got = format!("{:.6} +- {:.6}", est.mean, est.stderr);
                    rows.push(vec![name.clone(), exact.to_string(), got.clone(), ok.to_string()]);
                    checks.push(json!({ "name": name, "expected": exact.to_string(), "got": got, "ok": ok, "z_score": est.z_score(x) }));
                }
            }
            let mut r = Report::new(json!({ "mc": mc, "samples": samples, "grid": grid, "workers": workers }));
            if *mc {
                r.seed = Some(*seed);
            }
            r.set("passed", checks.iter().filter(|c| c["ok"] == json!(true)).count());
            r.set("failed", checks.iter().filter(|c| c["ok"] != json!(true)).count());
            r.set("checks", Value::Array(checks));
            r.table = Some((vec!["name", "expected", "got", "ok"], rows));
            r.failed = failed;
            Ok(r)
        }
    }
}

fn nu_json(v: &avoidlab::PolytopeVolume) -> Value {
    match &v.normalized {
        Some(n) => n.to_string().parse::<u64>().map(Value::from).unwrap_or_else(|_| Value::String(n.to_string())),
        None => Value::Null,
    }
}

fn as_map(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn render(cli: &Cli, report: Report, elapsed: f64) -> String {
    let manifest = json!({
        "command": command_name(&cli.command),
        "params": report.params,
        "seed": report.seed,
        "version": env!("CARGO_PKG_VERSION"),
        "wall_time": elapsed,
    });
    match cli.output.format {
        Format::Json => {
            let mut doc = Map::new();
            doc.insert("schema".into(), SCHEMA.into());
            doc.extend(report.fields);
            doc.insert("manifest".into(), manifest);
            let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("serializable");
            s.push('\n');
            s
        }
        Format::Csv => {
            if let Some(csv) = report.csv {
                return csv;
            }
            let mut out = format!("# schema={SCHEMA},manifest={manifest}\n");
            let (header, rows) = report.table.unwrap_or_else(|| {
                let rows = report
                    .fields
                    .iter()
                    .map(|(k, v)| vec![k.clone(), v.as_str().map_or_else(|| v.to_string(), str::to_string)])
                    .collect();
                (vec!["key", "value"], rows)
            });
            out.push_str(&header.join(","));
            out.push('\n');
            for row in rows {
                let cells: Vec<String> = row.iter().map(|c| csv_cell(c)).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            out
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidPermutation(_) | Error::InvalidDyckPath(_) | Error::InvalidArgument(_) => 2,
        Error::Unsupported(_) | Error::CapExceeded(_) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let report = match run(&cli.command) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, Error::Unsupported(_)) {
                eprintln!("hint: estimate it with `avoidlab mc --sigma ...`");
            }
            return ExitCode::from(exit_code(&e));
        }
    };
    let failed = report.failed;
    let text = render(&cli, report, start.elapsed().as_secs_f64());
    let written = match &cli.output.out {
        Some(path) => File::create(path).and_then(|mut f| f.write_all(text.as_bytes())),
        None => io::stdout().lock().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(1);
    }
    if failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
