//! Command-line front end for the `diffmilp` binary.
//!
//! Human-readable tables go to stdout, machine artifacts to `--out`.
//! Exit codes: 0 success, 1 domain error, 2 usage error.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::catalog;
use crate::error::Error;
use crate::linear::{xor_stress_network, XorStyle};
use crate::milp::export_lp;
use crate::modelgen::{generate_model, ModelOptions};
use crate::polytope::convex_hull_hrep;
use crate::reduction::{reduce, verify_exact_model, GoodType, Method, ReduceOptions};
use crate::sbox::{Ddt, SBoxTable, TransitionSet};
use crate::search::{enumerate_patterns, pattern_model, search_differential, search_impossible, Attack, Granularity, SearchQuery};
use crate::spec::{load_spec, CipherSpec};

/// Stdout writes; a closed pipe (e.g. `| head`) is not an error.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = write!(std::io::stdout(), $($arg)*);
    }};
}

macro_rules! sayln {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

#[derive(Debug, Parser)]
#[command(name = "diffmilp", version, about = "SBox inequality models and MILP differential search")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the difference distribution table of an SBox.
    Ddt(SboxArgs),
    /// Convex-hull H-representation of the possible transitions.
    Hull(SboxArgs),
    /// Reduce the hull to a small exact inequality model.
    Reduce(ReduceArgs),
    /// Unroll a cipher spec into a MILP model and print or export it.
    Model(ModelArgs),
    /// Differential or impossible-differential search.
    Search(SearchArgs),
    /// Rotational XOR network comparing both XOR models.
    XorBench(XorBenchArgs),
}

#[derive(Debug, Args)]
pub struct SboxArgs {
    /// SBox table file or bundled name (e.g. gift, present).
    #[arg(long, conflicts_with = "ddt", required_unless_present = "ddt")]
    pub sbox: Option<String>,
    /// DDT file instead of an SBox.
    #[arg(long)]
    pub ddt: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Greedy,
    RandomGreedy,
    Exact,
    SubsetAdd,
    RandomSubset,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Greedy => Method::Greedy,
            MethodArg::RandomGreedy => Method::RandomGreedy,
            MethodArg::Exact => Method::Exact,
            MethodArg::SubsetAdd => Method::SubsetAddition,
            MethodArg::RandomSubset => Method::RandomSubset,
        }
    }
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    #[command(flatten)]
    pub input: SboxArgs,
    #[arg(long, value_enum, default_value = "greedy")]
    pub method: MethodArg,
    /// Subset size for subset-add and random-subset.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Good-hyperplane rule for subset-add (1 or 2).
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub good_type: u8,
    #[arg(long, default_value_t = 500)]
    pub runs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Seconds for the exact cover.
    #[arg(long, default_value_t = 1800)]
    pub budget: u64,
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Builtin,
    LpExport,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AttackArg {
    Differential,
    Impossible,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GranularityArg {
    Fuzzy,
    Equal,
    Targeted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum XorStyleArg {
    Hull,
    Parity,
}

impl From<XorStyleArg> for XorStyle {
    fn from(s: XorStyleArg) -> Self {
        match s {
            XorStyleArg::Hull => XorStyle::Hull,
            XorStyleArg::Parity => XorStyle::Parity,
        }
    }
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Cipher spec JSON file or bundled name.
    #[arg(long)]
    pub spec: String,
    #[arg(long)]
    pub rounds: usize,
    #[arg(long, value_enum, default_value = "parity")]
    pub xor_style: XorStyleArg,
    /// LP file to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub spec: String,
    #[arg(long)]
    pub rounds: usize,
    #[arg(long, value_enum, default_value = "differential")]
    pub attack: AttackArg,
    #[arg(long, value_enum)]
    pub granularity: Option<GranularityArg>,
    #[arg(long, value_enum, default_value = "builtin")]
    pub solver: SolverArg,
    /// Seconds per solve.
    #[arg(long, default_value_t = 1800)]
    pub budget: u64,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "parity")]
    pub xor_style: XorStyleArg,
    /// Random concretizations re-checked per fuzzy entry.
    #[arg(long, default_value_t = 10)]
    pub spot_checks: usize,
    /// Report TSV (builtin) or LP output: a file for differential, a directory for impossible.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct XorBenchArgs {
    /// Gate fan-in.
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 50)]
    pub rounds: usize,
    #[arg(long, default_value_t = 16)]
    pub width: usize,
    #[arg(long, default_value_t = 600)]
    pub budget: u64,
}

enum Failure {
    Usage(String),
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Domain(e.into())
    }
}

type CliResult = std::result::Result<(), Failure>;

/// Parses `argv` (including the program name), runs the subcommand and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(cmd: Command) -> CliResult {
    match cmd {
        Command::Ddt(a) => cmd_ddt(&a),
        Command::Hull(a) => cmd_hull(&a),
        Command::Reduce(a) => cmd_reduce(&a),
        Command::Model(a) => cmd_model(&a),
        Command::Search(a) => cmd_search(&a),
        Command::XorBench(a) => cmd_xor_bench(&a),
    }
}

fn load_sbox(arg: &str) -> std::result::Result<SBoxTable, Failure> {
    let path = Path::new(arg);
    if path.exists() {
        return Ok(SBoxTable::parse(&std::fs::read_to_string(path)?)?);
    }
    catalog::sbox(arg).ok_or_else(|| Failure::Usage(format!("{arg:?} is neither a file nor a bundled sbox")))
}

fn load_ddt(a: &SboxArgs) -> std::result::Result<Ddt, Failure> {
    match (&a.sbox, &a.ddt) {
        (Some(s), None) => Ok(load_sbox(s)?.ddt()),
        (None, Some(p)) => Ok(Ddt::parse(&std::fs::read_to_string(p)?)?),
        _ => Err(Failure::Usage("exactly one of --sbox and --ddt is required".into())),
    }
}

fn load_points(a: &SboxArgs) -> std::result::Result<TransitionSet, Failure> {
    Ok(load_ddt(a)?.transitions())
}

fn spec_arg(s: &str) -> std::result::Result<CipherSpec, Failure> {
    Ok(load_spec(s)?)
}

fn emit(out: &Option<PathBuf>, text: &str) -> CliResult {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => say!("{text}"),
    }
    Ok(())
}

fn cmd_ddt(a: &SboxArgs) -> CliResult {
    let d = load_ddt(a)?;
    if a.out.is_some() {
        sayln!("{}x{} ddt, max entry {}", d.rows(), d.cols(), d.max_entry());
    }
    emit(&a.out, &d.to_text())
}

fn cmd_hull(a: &SboxArgs) -> CliResult {
    let t = load_points(a)?;
    let start = Instant::now();
    let h = convex_hull_hrep(t.possible(), t.dim())?;
    sayln!("{} facets, {} equalities ({:.2?})", h.facets.len(), h.equalities.len(), start.elapsed());
    if a.out.is_some() {
        let header = [("facets", h.facets.len().to_string()), ("equalities", h.equalities.len().to_string())];
        emit(&a.out, &h.inequalities().to_text(&header))?;
    }
    Ok(())
}

fn cmd_reduce(a: &ReduceArgs) -> CliResult {
    let t = load_points(&a.input)?;
    let method = Method::from(a.method);
    if matches!(method, Method::SubsetAddition | Method::RandomSubset) && a.k < 2 {
        return Err(Failure::Usage("--k must be at least 2".into()));
    }
    if a.runs == 0 {
        return Err(Failure::Usage("--runs must be positive".into()));
    }
    let opts = ReduceOptions {
        method,
        k: a.k,
        good_type: if a.good_type == 1 { GoodType::Type1 } else { GoodType::Type2 },
        runs: a.runs,
        seed: a.seed,
        budget: Duration::from_secs(a.budget),
    };
    let run = || reduce(&t, &opts);
    let r = match a.jobs {
        Some(0) => return Err(Failure::Usage("--jobs must be positive".into())),
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| Failure::Domain(Error::Invalid(e.to_string())))?
            .install(run)?,
        None => run()?,
    };
    if !verify_exact_model(&r.chosen, &t) {
        return Err(Failure::Domain(Error::Invalid("reduced set is not an exact model".into())));
    }
    sayln!("size: {} (method {}, optimal {}, {:.2?})", r.size(), r.method, r.optimal, r.wall_time);
    match &a.input.out {
        Some(_) => emit(&a.input.out, &r.to_text()),
        None => {
            say!("{}", r.to_text());
            Ok(())
        }
    }
}

fn cmd_model(a: &ModelArgs) -> CliResult {
    let spec = spec_arg(&a.spec)?;
    if a.rounds == 0 {
        return Err(Failure::Usage("--rounds must be at least 1".into()));
    }
    let u = generate_model(&spec, a.rounds, &ModelOptions { xor_style: a.xor_style.into(), ..Default::default() })?;
    sayln!(
        "{} rounds={}: {} variables, {} constraints, {} sbox instances",
        spec.name,
        a.rounds,
        u.model.num_vars(),
        u.model.num_constraints(),
        u.sboxes.len()
    );
    if a.out.is_some() {
        emit(&a.out, &export_lp(&u.model))?;
    }
    Ok(())
}

fn cmd_search(a: &SearchArgs) -> CliResult {
    let spec = spec_arg(&a.spec)?;
    let attack = match a.attack {
        AttackArg::Differential => Attack::Differential,
        AttackArg::Impossible => Attack::Impossible,
    };
    let granularity = a.granularity.map(|g| match g {
        GranularityArg::Fuzzy => Granularity::Fuzzy,
        GranularityArg::Equal => Granularity::Equal,
        GranularityArg::Targeted => Granularity::Targeted,
    });
    let q = SearchQuery {
        spec,
        rounds: a.rounds,
        attack,
        granularity,
        seed: a.seed,
        budget: Duration::from_secs(a.budget),
        jobs: a.jobs,
        xor_style: a.xor_style.into(),
        spot_checks: a.spot_checks,
    };
    q.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    if a.solver == SolverArg::LpExport {
        return export_search(&q, a.out.as_deref());
    }
    match attack {
        Attack::Differential => {
            let t = search_differential(&q)?;
            say!("{}", t.to_text());
            if a.out.is_some() {
                emit(&a.out, &t.to_text())?;
            }
        }
        Attack::Impossible => {
            let start = Instant::now();
            let report = search_impossible(&q)?;
            say!("{}", report.to_table());
            sayln!("spot checks: {}, {:.2?}", report.spot_checked, start.elapsed());
            if a.out.is_some() {
                emit(&a.out, &report.to_tsv())?;
            }
        }
    }
    Ok(())
}

fn export_search(q: &SearchQuery, out: Option<&Path>) -> CliResult {
    let out = out.ok_or_else(|| Failure::Usage("--solver lp-export needs --out".into()))?;
    let u = generate_model(&q.spec, q.rounds, &ModelOptions { xor_style: q.xor_style, ..Default::default() })?;
    match (q.attack, q.granularity) {
        (Attack::Differential, _) => {
            std::fs::write(out, export_lp(&u.model))?;
            sayln!("wrote {}", out.display());
        }
        (Attack::Impossible, Some(g)) => {
            std::fs::create_dir_all(out)?;
            let patterns = enumerate_patterns(&q.spec, g)?;
            let words = q.spec.words();
            let wb = q.spec.word_bits.max(4);
            let mut index = String::new();
            for (k, p) in patterns.iter().enumerate() {
                let name = format!("task{k:05}.lp");
                std::fs::write(out.join(&name), export_lp(&pattern_model(&u, p)?))?;
                index.push_str(&format!("{name}\t{}\t{}\n", p.in_hex(words, wb), p.out_hex(words, wb)));
            }
            std::fs::write(out.join("index.tsv"), index)?;
            sayln!("wrote {} models under {}", patterns.len(), out.display());
        }
        (Attack::Impossible, None) => unreachable!("validated"),
    }
    Ok(())
}

fn cmd_xor_bench(a: &XorBenchArgs) -> CliResult {
    if !(2..=7).contains(&a.n) || a.width < a.n || !a.width.is_multiple_of(4) || a.rounds == 0 {
        return Err(Failure::Usage("need 2 <= n <= 7, width a multiple of 4 and >= n, rounds >= 1".into()));
    }
    let budget = Duration::from_secs(a.budget);
    let mut verdicts = Vec::new();
    for style in [XorStyle::Hull, XorStyle::Parity] {
        let net = xor_stress_network(a.n, a.rounds, a.width, style)?;
        let start = Instant::now();
        let v = net.solve_configurations(budget)?;
        let feasible = v.iter().filter(|&&f| f).count();
        sayln!(
            "{style:<6} gates {} vars {} constraints {} feasible {}/{} ({:.2?})",
            net.gates,
            net.model.num_vars(),
            net.model.num_constraints(),
            feasible,
            v.len(),
            start.elapsed()
        );
        verdicts.push(v);
    }
    if verdicts[0] != verdicts[1] {
        return Err(Failure::Domain(Error::Invalid("xor models disagree on feasibility".into())));
    }
    sayln!("models agree");
    Ok(())
}
