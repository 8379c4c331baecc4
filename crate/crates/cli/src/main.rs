//! `mcnet`: build, analyze and search multicast networks from the command line.
//!
//! Every subcommand prints one JSON document stamped with `"schema": 1`, except
//! network exports with `--export dot`. Keys are emitted in sorted order.
//!
//! Exit codes: 0 success, 1 a yes/no query answered "no", 2 usage or invalid
//! input, 3 a computation exceeded a capacity limit.
//!
//! `MCAST_ORACLE_LIMIT` caps the modulus of the exhaustive sumset oracle used by
//! `solvable --oracle` and `cdbound --brute` (default 16, hard cap 64).

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mcnet::criterion::{criterion_search, discover_cross_char_with, theorem3_network_with, theorem4_instance_with};
use mcnet::gf::FiniteField;
use mcnet::lnc::{construct_solution_in, is_solution_with, sets_to_code};
use mcnet::netmodel::{
    build_combination_network, build_general_network_with, build_prescribed_qmin_network, published_size_formula,
    ExportFormat, Family, Network, NetworkParams,
};
use mcnet::solvability::{brute_force_solvable_with, q_min_with, q_star_max_with, solvable_closed_form, FieldRange};
use mcnet::zn::{brute_min_sumset_with, cd_bound, exact_min_sumset, DEFAULT_ORACLE_LIMIT};
use mcnet::{Error, Exec};
use serde_json::{json, Value};

const SCHEMA: u32 = 1;
const ORACLE_ENV: &str = "MCAST_ORACLE_LIMIT";

#[derive(Parser)]
#[command(name = "mcnet", version, about = "Multicast network coding: constructions, solvability and field-pair search")]
struct Cli {
    /// Write the output to FILE (atomically) instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Worker threads for parallel searches; 1 runs sequentially.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct General {
    /// Source dimension.
    #[arg(long)]
    omega: usize,
    /// Comma-separated out-degrees d_1,...,d_omega.
    #[arg(long, value_delimiter = ',', required = true)]
    d: Vec<u64>,
}

impl General {
    fn params(&self) -> mcnet::Result<NetworkParams> {
        NetworkParams::new(self.omega, self.d.clone())
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Json,
}

impl From<Format> for ExportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Dot => ExportFormat::Dot,
            Format::Json => ExportFormat::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build the general network for (omega, d).
    Construct {
        #[command(flatten)]
        general: General,
        #[arg(long, value_enum, default_value = "json")]
        export: Format,
    },
    /// Build the network whose smallest solvable field has order Q.
    ConstructNq {
        #[arg(long)]
        q: u64,
        #[arg(long, value_enum, default_value = "json")]
        export: Format,
    },
    /// Build the (N,2)-combination network.
    ConstructComb {
        #[arg(long)]
        n: usize,
        /// Add direct source-to-receiver edges.
        #[arg(long)]
        extended: bool,
        #[arg(long, value_enum, default_value = "json")]
        export: Format,
    },
    /// Decide linear solvability over GF(Q); exits 1 when unsolvable.
    Solvable {
        #[command(flatten)]
        general: General,
        #[arg(long)]
        q: u64,
        /// Cross-check with the exhaustive sumset oracle.
        #[arg(long)]
        oracle: bool,
        /// Emit an explicit solution and verify it on the built network.
        #[arg(long)]
        witness: bool,
    },
    /// Smallest solvable field order and largest unsolvable one.
    Qrange {
        #[command(flatten)]
        general: General,
    },
    /// Subgroup orders of GF(Q)^x separating GF(Q) from GF(QPRIME); exits 1 when none.
    Criterion {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        qprime: u64,
    },
    /// A verified network solvable over GF(Q) with q_min = Q but not over GF(QPRIME).
    Synthesize {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        qprime: u64,
        /// Subgroup order to use; defaults to the smallest one that works.
        #[arg(long)]
        order: Option<u64>,
    },
    /// The characteristic-2 instance q = 4^K, q' = 2q.
    Theorem4 {
        #[arg(long)]
        k: u32,
    },
    /// Search for separating pairs across characteristics P and PPRIME.
    Crosschar {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        pprime: u64,
        #[arg(long, default_value_t = 64)]
        max_bits: u32,
    },
    /// Lower bounds and exact minimum for sumsets in Z_N with given sizes.
    Cdbound {
        #[arg(long)]
        n: u64,
        #[arg(long, value_delimiter = ',', required = true)]
        cards: Vec<u64>,
        /// Include the exact minimum with a witness.
        #[arg(long)]
        exact: bool,
        /// Include the exhaustive minimum.
        #[arg(long)]
        brute: bool,
    },
    /// Node, edge and receiver counts.
    Stats {
        #[arg(long, requires = "d", conflicts_with_all = ["nq", "comb"])]
        omega: Option<usize>,
        #[arg(long, value_delimiter = ',', requires = "omega")]
        d: Option<Vec<u64>>,
        /// The network with q_min = NQ, compared with its published counts.
        #[arg(long, conflicts_with = "comb")]
        nq: Option<u64>,
        /// The (COMB+1,2)-combination networks, compared with their published counts.
        #[arg(long)]
        comb: Option<u64>,
    },
}

/// What a subcommand produced.
enum Output {
    Json(Value),
    Text(String),
}

struct Outcome {
    output: Output,
    code: u8,
}

impl Outcome {
    fn yes(v: Value) -> Self {
        Self { output: Output::Json(v), code: 0 }
    }

    fn answer(v: Value, answer: bool) -> Self {
        Self { output: Output::Json(v), code: if answer { 0 } else { 1 } }
    }
}

fn stamp(v: impl serde::Serialize) -> Value {
    let mut v = serde_json::to_value(v).expect("results serialize to JSON");
    if let Value::Object(m) = &mut v {
        m.insert("schema".into(), SCHEMA.into());
    }
    v
}

fn export(net: &Network, format: Format) -> Outcome {
    let text = net.export(format.into());
    match format {
        Format::Dot => Outcome { output: Output::Text(text), code: 0 },
        Format::Json => Outcome::yes(net.to_json_value()),
    }
}

fn oracle_limit() -> mcnet::Result<u64> {
    match std::env::var(ORACLE_ENV) {
        Ok(s) => s.trim().parse().map_err(|_| Error::InvalidArgument(format!("{ORACLE_ENV}={s:?} is not an integer"))),
        Err(_) => Ok(DEFAULT_ORACLE_LIMIT),
    }
}

fn solvable(general: &General, q: u64, oracle: bool, witness: bool, exec: Exec) -> mcnet::Result<Outcome> {
    let params = general.params()?;
    let report = solvable_closed_form(&params, q)?;
    let solvable = report.solvable;
    let mut v = stamp(&report);
    if oracle {
        let brute = brute_force_solvable_with(&params, q, oracle_limit()?, exec)?;
        if brute != solvable {
            return Err(Error::Internal(format!("oracle disagrees with the closed form for {params} over GF({q})")));
        }
        v["oracle"] = brute.into();
    }
    if witness && solvable {
        let field = FiniteField::new(q)?;
        let w = construct_solution_in(&params, &field)?
            .ok_or_else(|| Error::Internal(format!("no witness for solvable {params} over GF({q})")))?;
        let net = build_general_network_with(&params, exec)?;
        let code = sets_to_code(&net, &field, &w.s_sets)?;
        let check = is_solution_with(&net, &field, &code, exec)?;
        v["witness"] = serde_json::to_value(&w).expect("witness serializes");
        v["verified"] = check.solved.into();
    }
    Ok(Outcome::answer(v, solvable))
}

fn synthesize(q: u64, qprime: u64, order: Option<u64>, exec: Exec) -> mcnet::Result<Outcome> {
    if let Some(d) = order {
        return Ok(Outcome::yes(stamp(theorem3_network_with(q, qprime, d, exec)?)));
    }
    let orders = criterion_search(q, qprime)?.valid_orders;
    let mut last_err = None;
    for d in orders {
        match theorem3_network_with(q, qprime, d, exec) {
            Ok(hit) => return Ok(Outcome::yes(stamp(hit))),
            Err(e @ Error::Internal(_)) => return Err(e),
            Err(e) => last_err = Some(e),
        }
    }
    match last_err {
        Some(e @ Error::Capacity(_)) => Err(e),
        _ => Ok(Outcome::answer(json!({"schema": SCHEMA, "q": q, "q_prime": qprime, "found": false}), false)),
    }
}

fn stats_against(net: &Network, family: Family, q: u64) -> Value {
    let actual = net.size_stats();
    let published = published_size_formula(family, q);
    json!({"actual": actual, "published": published, "matches": actual == published})
}

fn stats(omega: Option<usize>, d: Option<Vec<u64>>, nq: Option<u64>, comb: Option<u64>, exec: Exec) -> mcnet::Result<Outcome> {
    let v = match (omega, d, nq, comb) {
        (Some(omega), Some(d), None, None) => {
            let params = NetworkParams::new(omega, d)?;
            json!({"params": params, "stats": build_general_network_with(&params, exec)?.size_stats()})
        }
        (None, None, Some(q), None) => {
            let net = build_prescribed_qmin_network(q)?;
            json!({"q": q, "prescribed_qmin": stats_against(&net, Family::PrescribedQmin, q)})
        }
        (None, None, None, Some(q)) => {
            let n = usize::try_from(q + 1).map_err(|_| Error::InvalidArgument(format!("q = {q} is too large")))?;
            json!({
                "q": q,
                "combination": stats_against(&build_combination_network(n, false)?, Family::Combination, q),
                "extended_combination": stats_against(&build_combination_network(n, true)?, Family::ExtendedCombination, q),
            })
        }
        _ => return Err(Error::InvalidArgument("stats needs --omega with --d, --nq, or --comb".into())),
    };
    Ok(Outcome::yes(stamp(v)))
}

fn run(command: Command, exec: Exec) -> mcnet::Result<Outcome> {
    match command {
        Command::Construct { general, export: f } => Ok(export(&build_general_network_with(&general.params()?, exec)?, f)),
        Command::ConstructNq { q, export: f } => Ok(export(&build_prescribed_qmin_network(q)?, f)),
        Command::ConstructComb { n, extended, export: f } => Ok(export(&build_combination_network(n, extended)?, f)),
        Command::Solvable { general, q, oracle, witness } => solvable(&general, q, oracle, witness, exec),
        Command::Qrange { general } => {
            let params = general.params()?;
            let range = FieldRange { q_min: q_min_with(&params, exec)?, q_star_max: q_star_max_with(&params, exec)? };
            Ok(Outcome::yes(stamp(json!({"params": params, "q_min": range.q_min, "q_star_max": range.q_star_max}))))
        }
        Command::Criterion { q, qprime } => {
            let r = criterion_search(q, qprime)?;
            let ok = r.satisfied();
            let mut v = stamp(&r);
            v["satisfied"] = ok.into();
            Ok(Outcome::answer(v, ok))
        }
        Command::Synthesize { q, qprime, order } => synthesize(q, qprime, order, exec),
        Command::Theorem4 { k } => Ok(Outcome::yes(stamp(theorem4_instance_with(k, exec)?))),
        Command::Crosschar { p, pprime, max_bits } => {
            let report = discover_cross_char_with(p, pprime, max_bits, exec)?;
            let code = match (report.hits.is_empty(), report.skipped.is_empty()) {
                (false, _) => 0,
                (true, false) => {
                    eprintln!("mcnet: no verified pair; {} candidates exceeded capacity", report.skipped.len());
                    3
                }
                (true, true) => 1,
            };
            Ok(Outcome { output: Output::Json(stamp(&report)), code })
        }
        Command::Cdbound { n, cards, exact, brute } => {
            let mut v = json!({"n": n, "cards": cards, "cd_bound": cd_bound(n, &cards)?});
            if exact {
                v["exact"] = serde_json::to_value(exact_min_sumset(n, &cards)?).expect("sumset serializes");
            }
            if brute {
                v["brute"] = brute_min_sumset_with(n, &cards, oracle_limit()?, exec)?.into();
            }
            Ok(Outcome::yes(stamp(v)))
        }
        Command::Stats { omega, d, nq, comb } => stats(omega, d, nq, comb, exec),
    }
}

fn write_atomic(path: &Path, text: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn render(output: Output) -> String {
    match output {
        Output::Text(t) => t,
        Output::Json(v) => {
            let mut s = serde_json::to_string_pretty(&v).expect("JSON values serialize");
            s.push('\n');
            s
        }
    }
}

fn exit_for(e: &Error) -> u8 {
    match e {
        Error::Capacity(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = match cli.jobs {
        Some(0) => {
            eprintln!("mcnet: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        Some(1) => Exec::Sequential,
        Some(n) => {
            configure_pool(n);
            Exec::Parallel
        }
        None => Exec::default(),
    };
    let outcome = match run(cli.command, exec) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("mcnet: {e}");
            return ExitCode::from(exit_for(&e));
        }
    };
    let code = outcome.code;
    let text = render(outcome.output);
    let written = match &cli.out {
        Some(path) => write_atomic(path, &text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("mcnet: cannot write output: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}

#[cfg(feature = "parallel")]
fn configure_pool(n: usize) {
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
        eprintln!("mcnet: cannot size the thread pool: {e}");
    }
}

#[cfg(not(feature = "parallel"))]
fn configure_pool(_: usize) {}
