use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use gowers_core::gowers::{self, GowersResult};
use gowers_core::group::{self, GroupFn, GroupSpec};
use gowers_core::influence::{self, InfluenceReport};
use gowers_core::io::{self as gio, FunctionFile, GroupFnFile};
use gowers_core::pcp::{self, DemoConfig, PcpProof};
use gowers_core::report::{format_float, to_csv, to_json, CsvRows};
use gowers_core::testing::{self, LongCodeInputs};
use gowers_core::ugame::solve_unique_game;
use gowers_core::verify::{verify_suite, Suite, VerifyReport};
use gowers_core::{BoolFn, Error, Guard, RandomMode};

const QUADRATIC_NOTE: &str = "\
The quadratic phase is (-1)^(x1 x2 + x3 x4 + ... + x(n-1) xn): coordinates \
are paired disjointly, not chained, and n must be even.";

/// Boolean-function analysis, Gowers norms, long-code tests and unique games.
#[derive(Parser, Debug)]
#[command(name = "gowers", version, about, after_help = QUADRATIC_NOTE)]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, env = "GOWERS_SEED", default_value_t = 0)]
    seed: u64,

    /// Run exhaustive computations regardless of their size.
    #[arg(long, global = true)]
    override_guard: bool,

    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a function table or take its Fourier transform.
    #[command(subcommand)]
    Fn(FnCommand),
    /// Per-coordinate (degree-restricted, cross-) influences.
    Influence(InfluenceArgs),
    /// Gowers uniformity U^d of a function.
    Gowers(GowersArgs),
    /// Gowers inner product of a collection indexed by subsets of [d].
    Ip(IpArgs),
    /// Acceptance probability of a linearity or hypergraph test.
    #[command(subcommand)]
    Test(TestCommand),
    /// Run a seeded suite of inequality and identity checks.
    Verify(VerifyArgs),
    /// Unique games.
    #[command(subcommand)]
    Ugame(UgameCommand),
    /// Composed long-code verifier.
    #[command(subcommand)]
    Pcp(PcpCommand),
}

#[derive(Subcommand, Debug)]
enum FnCommand {
    /// Write a function file.
    #[command(after_help = QUADRATIC_NOTE)]
    Gen(GenArgs),
    /// Fourier coefficients of a function or group function file.
    Fourier {
        file: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    /// Character chi_S, S given by --set.
    Chi,
    /// Dictator x -> (-1)^(x_i), i given by --coord.
    LongCode,
    /// Disjointly paired quadratic phase.
    QuadraticPhase,
    /// Product of ANDs over consecutive blocks of --block coordinates.
    BlockAnd,
    /// Uniform random table (--mode sign or bounded).
    Random,
    /// Constant --value.
    Constant,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Sign,
    Bounded,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(value_enum)]
    kind: Kind,
    /// Number of boolean coordinates.
    #[arg(short, long, required_unless_present = "blocks")]
    n: Option<usize>,
    /// Subset mask for chi (bit i-1 stands for coordinate i).
    #[arg(long, default_value_t = 0)]
    set: usize,
    /// 1-based coordinate for long-code.
    #[arg(long, default_value_t = 1)]
    coord: usize,
    /// Block length for block-and.
    #[arg(long, default_value_t = 2)]
    block: usize,
    #[arg(long, value_enum, default_value_t = Mode::Sign)]
    mode: Mode,
    /// Value for constant (real part for group functions).
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    value: f64,
    /// Generate a complex function on a group instead, e.g. "2x2,5,4"
    /// for (Z2 x Z2) x Z5 x Z4. Supports random and constant.
    #[arg(long)]
    blocks: Option<String>,
    /// Write sign functions in the hex form.
    #[arg(long)]
    hex: bool,
}

#[derive(Args, Debug)]
struct InfluenceArgs {
    file: PathBuf,
    /// Only Fourier mass on sets of size at most d.
    #[arg(long)]
    degree: Option<usize>,
    /// Further functions; the report then gives t-cross-influences.
    #[arg(long, num_args = 1..)]
    collection: Vec<PathBuf>,
    /// Number of functions that must share the influence.
    #[arg(long, default_value_t = 2)]
    t: usize,
}

#[derive(Args, Debug)]
struct GowersArgs {
    file: PathBuf,
    #[arg(long)]
    dim: usize,
    /// Estimate with this many sampled cubes instead of computing exactly.
    #[arg(long)]
    mc: Option<u64>,
}

#[derive(Args, Debug)]
struct IpArgs {
    file: PathBuf,
    /// Cube anchored at zero (no free translate).
    #[arg(long)]
    linear: bool,
    #[arg(long, conflicts_with = "linear")]
    mc: Option<u64>,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Compute the probability exactly (the default).
    #[arg(long, conflicts_with = "mc")]
    exact: bool,
    /// Estimate from this many sampled rounds.
    #[arg(long)]
    mc: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum TestCommand {
    /// f(x) f(y) = f(x + y).
    Blr {
        file: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// f(x + e1) g(y + e2) = h(x + y + e3), each e_j flipping bits with probability --gamma.
    Blr3 {
        f: PathBuf,
        g: PathBuf,
        h: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        #[command(flatten)]
        run: RunArgs,
    },
    /// One equation per hyperedge, the same function at every query.
    H {
        hypergraph: PathBuf,
        file: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Noisy hypergraph test. Give one function for every query, or one
    /// function per vertex followed by one per edge.
    NoisyH {
        hypergraph: PathBuf,
        #[arg(required = true, num_args = 1..)]
        files: Vec<PathBuf>,
        #[arg(long)]
        gamma: f64,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Suite id, or "all".
    #[arg(long, default_value = "all")]
    suite: String,
    /// Arity of generated functions.
    #[arg(short, long, default_value_t = 6)]
    n: usize,
    /// Random instances per check.
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum UgameCommand {
    /// Strong and weak values by exhaustive search.
    Solve { file: PathBuf },
}

#[derive(Subcommand, Debug)]
enum PcpCommand {
    /// Run the composed verifier on a game and a proof.
    Demo(DemoArgs),
}

#[derive(Args, Debug)]
struct DemoArgs {
    #[arg(long)]
    game: PathBuf,
    #[arg(long)]
    hypergraph: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    gamma: f64,
    #[arg(long, default_value_t = 100_000)]
    rounds: u64,
    /// "honest" (long codes of a best assignment), "random", or a proof file.
    #[arg(long, default_value = "honest")]
    proof: String,
    /// Degree for the decoder's influences.
    #[arg(long, default_value_t = 2)]
    degree: usize,
    /// Influence threshold for decoder candidates.
    #[arg(long, default_value_t = 0.1)]
    tau: f64,
}

/// A verification failure, reported with exit code 1.
#[derive(Debug)]
struct ChecksFailed(usize);

impl std::fmt::Display for ChecksFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} check(s) failed", self.0)
    }
}

impl std::error::Error for ChecksFailed {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<ChecksFailed>().is_some() {
        return 1;
    }
    match e.downcast_ref::<Error>() {
        Some(Error::ResourceLimit { .. }) => 3,
        _ => 2,
    }
}

fn guard(cli: &Cli) -> Guard {
    if cli.override_guard {
        Guard::unlimited()
    } else {
        Guard::default()
    }
}

fn emit(cli: &Cli, text: &str) -> anyhow::Result<()> {
    match &cli.out {
        Some(path) => fs::write(path, format!("{text}\n")).with_context(|| format!("writing {}", path.display()))?,
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{text}")?;
        }
    }
    Ok(())
}

fn emit_json<S: Serialize + ?Sized>(cli: &Cli, value: &S) -> anyhow::Result<()> {
    emit(cli, &to_json(value)?)
}

enum Loaded {
    Cube(BoolFn<f64>),
    Group(GroupFn<f64>),
}

fn load(path: &Path) -> anyhow::Result<Loaded> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let loaded = if value.get("blocks").is_some() {
        Loaded::Group(gio::parse::<GroupFnFile>(&text)?.into_fn()?)
    } else {
        Loaded::Cube(gio::parse::<FunctionFile>(&text)?.into_fn()?)
    };
    Ok(loaded)
}

fn load_cube(path: &Path) -> anyhow::Result<BoolFn<f64>> {
    match load(path)? {
        Loaded::Cube(f) => Ok(f),
        Loaded::Group(_) => Err(Error::InvalidArgument(format!("{} is a group function; this command needs a boolean one", path.display())).into()),
    }
}

fn parse_blocks(s: &str) -> anyhow::Result<GroupSpec> {
    let blocks = s
        .split(',')
        .map(|b| {
            b.split('x')
                .map(|m| m.trim().parse::<usize>().map_err(|_| Error::InvalidArgument(format!("bad modulus {m:?} in {s:?}"))))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GroupSpec::new(blocks)?)
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let guard = guard(cli);
    match &cli.command {
        Command::Fn(FnCommand::Gen(a)) => gen(cli, a),
        Command::Fn(FnCommand::Fourier { file }) => match load(file)? {
            Loaded::Cube(f) => {
                #[derive(Serialize)]
                struct Out<'a> {
                    n: usize,
                    coeffs: &'a [f64],
                }
                let s = f.fourier();
                emit_json(cli, &Out { n: f.n(), coeffs: s.coeffs() })
            }
            Loaded::Group(f) => {
                let s = f.fourier();
                let coeffs: Vec<[f64; 2]> = s.coeffs().iter().map(|c| [c.re, c.im]).collect();
                emit_json(cli, &serde_json::json!({ "blocks": f.spec().blocks(), "coeffs": coeffs }))
            }
        },
        Command::Influence(a) => {
            let report: InfluenceReport<f64> = if a.collection.is_empty() {
                match (load(&a.file)?, a.degree) {
                    (Loaded::Cube(f), None) => influence::influence_report(&f),
                    (Loaded::Cube(f), Some(d)) => influence::degree_influence_report(&f, d)?,
                    (Loaded::Group(f), None) => InfluenceReport::from_values(
                        (1..=f.spec().n_blocks()).map(|i| group::group_influence(&f, i)).collect::<Result<_, _>>()?,
                    ),
                    (Loaded::Group(_), Some(_)) => bail!(Error::InvalidArgument("degree influences need a boolean function".into())),
                }
            } else {
                let mut fs = vec![load_cube(&a.file)?];
                for p in &a.collection {
                    fs.push(load_cube(p)?);
                }
                influence::cross_influence_report(&fs, a.t, a.degree)?
            };
            emit_json(cli, &report)
        }
        Command::Gowers(a) => {
            let r = match (load(&a.file)?, a.mc) {
                (Loaded::Cube(f), None) => gowers::gowers_u(&f, a.dim, guard)?,
                (Loaded::Cube(f), Some(n)) => gowers::gowers_u_mc(&f, a.dim, n, cli.seed)?,
                (Loaded::Group(f), None) => GowersResult::exact(group::group_gowers_u(&f, a.dim, guard)?),
                (Loaded::Group(_), Some(_)) => bail!(Error::InvalidArgument("sampling is only available on the boolean cube".into())),
            };
            emit_json(cli, &r)
        }
        Command::Ip(a) => {
            let c = gio::read_collection(&a.file)?;
            let r = if a.linear {
                gowers::linear_gowers_ip(&c, guard)?
            } else if let Some(n) = a.mc {
                gowers::gowers_ip_mc(&c, n, cli.seed)?
            } else {
                gowers::gowers_ip(&c, guard)?
            };
            emit_json(cli, &r)
        }
        Command::Test(t) => test(cli, t, guard),
        Command::Verify(a) => verify(cli, a, guard),
        Command::Ugame(UgameCommand::Solve { file }) => {
            let g = gio::read_game(file)?;
            emit_json(cli, &solve_unique_game(&g, guard)?)
        }
        Command::Pcp(PcpCommand::Demo(a)) => {
            let g = gio::read_game(&a.game)?;
            let h = gio::read_hypergraph(&a.hypergraph)?;
            let proof: PcpProof<f64> = match a.proof.as_str() {
                "honest" => {
                    let best = solve_unique_game(&g, guard)?;
                    pcp::honest_proof(&g, &best.best_assignment)?
                }
                "random" => pcp::random_proof(&g, cli.seed)?,
                path => gio::read_proof(Path::new(path))?,
            };
            let cfg = DemoConfig {
                gamma: a.gamma,
                rounds: a.rounds,
                seed: cli.seed,
                degree: a.degree,
                tau: a.tau,
            };
            emit_json(cli, &pcp::demo(&g, &h, &proof, &cfg, guard)?)
        }
    }
}

fn gen(cli: &Cli, a: &GenArgs) -> anyhow::Result<()> {
    if let Some(blocks) = &a.blocks {
        let spec = parse_blocks(blocks)?;
        let f = match a.kind {
            Kind::Random => GroupFn::random(spec, cli.seed),
            Kind::Constant => GroupFn::constant(spec, num_complex::Complex::new(a.value, 0.0))?,
            other => bail!(Error::InvalidArgument(format!("{other:?} is not available on groups"))),
        };
        return emit_json(cli, &GroupFnFile::from_fn(&f));
    }
    let n = a.n.expect("clap requires --n without --blocks");
    let f = match a.kind {
        Kind::Chi => BoolFn::chi(n, a.set)?,
        Kind::LongCode => BoolFn::long_code(n, a.coord)?,
        Kind::QuadraticPhase => BoolFn::quadratic_phase(n)?,
        Kind::BlockAnd => BoolFn::block_and(n, a.block)?,
        Kind::Random => {
            let mode = match a.mode {
                Mode::Sign => RandomMode::Sign,
                Mode::Bounded => RandomMode::Bounded,
            };
            BoolFn::random(n, mode, cli.seed)?
        }
        Kind::Constant => BoolFn::constant(n, a.value)?,
    };
    let file = if a.hex {
        FunctionFile::compact(&f).ok_or_else(|| Error::InvalidArgument("the hex form needs a sign-valued function".into()))?
    } else {
        FunctionFile::from_fn(&f)
    };
    emit_json(cli, &file)
}

fn test(cli: &Cli, t: &TestCommand, guard: Guard) -> anyhow::Result<()> {
    let report = match t {
        TestCommand::Blr { file, run } => {
            let f = load_cube(file)?;
            match run.mc {
                Some(n) => testing::run_blr_mc(&f, n, cli.seed)?,
                None => testing::exact_blr(&f)?,
            }
        }
        TestCommand::Blr3 { f, g, h, gamma, run } => {
            let (f, g, h) = (load_cube(f)?, load_cube(g)?, load_cube(h)?);
            match run.mc {
                Some(n) => testing::run_3fn_blr_mc(&f, &g, &h, *gamma, n, cli.seed)?,
                None => testing::exact_3fn_blr(&f, &g, &h, *gamma)?,
            }
        }
        TestCommand::H { hypergraph, file, run } => {
            let h = gio::read_hypergraph(hypergraph)?;
            let f = load_cube(file)?;
            match run.mc {
                Some(n) => testing::run_h_test_mc(&h, &f, n, cli.seed)?,
                None => testing::exact_h_test(&h, &f, guard)?,
            }
        }
        TestCommand::NoisyH { hypergraph, files, gamma, run } => {
            let h = gio::read_hypergraph(hypergraph)?;
            let fs = files.iter().map(|p| load_cube(p)).collect::<anyhow::Result<Vec<_>>>()?;
            let inputs = match fs.len() {
                1 => LongCodeInputs::uniform(&h, &fs[0])?,
                k if k == h.queries() => LongCodeInputs::from_slots(&h, fs)?,
                k => bail!(Error::InvalidArgument(format!(
                    "{k} functions given; need 1 or {} ({} vertices then {} edges)",
                    h.queries(),
                    h.t(),
                    h.num_edges()
                ))),
            };
            match run.mc {
                Some(n) => testing::run_noisy_h_test_mc(&h, *gamma, &inputs, n, cli.seed)?,
                None => testing::exact_noisy_h_test(&h, *gamma, &inputs, guard)?,
            }
        }
    };
    emit_json(cli, &report)
}

/// Several suite reports flattened into one table.
struct Reports<'a>(&'a [VerifyReport]);

impl CsvRows for Reports<'_> {
    fn header(&self) -> Vec<&'static str> {
        vec!["suite", "lemma", "instance", "descriptor", "lhs", "rhs", "margin", "pass"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.0.iter().flat_map(|r| r.rows()).collect()
    }
}

fn verify(cli: &Cli, a: &VerifyArgs, guard: Guard) -> anyhow::Result<()> {
    let suites: Vec<Suite> = if a.suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![a.suite.parse()?]
    };
    let reports = suites
        .iter()
        .map(|&s| verify_suite(s, a.n, a.trials, cli.seed, guard))
        .collect::<Result<Vec<_>, _>>()?;
    let text = match (a.format, reports.as_slice()) {
        (Format::Json, [one]) => to_json(one)?,
        (Format::Json, many) => to_json(many)?,
        (Format::Csv, rs) => to_csv(&Reports(rs))?.trim_end().to_string(),
    };
    emit(cli, &text)?;
    let failed: usize = reports.iter().map(|r| r.summary.failed).sum();
    if failed > 0 {
        for r in &reports {
            for rec in r.records.iter().filter(|r| !r.pass) {
                eprintln!(
                    "FAIL {} {}#{} {}: margin {}",
                    r.suite,
                    rec.lemma,
                    rec.instance,
                    rec.descriptor,
                    format_float(rec.margin)
                );
            }
        }
        return Err(ChecksFailed(failed).into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn block_syntax() {
        let s = parse_blocks("2x2,5,4").unwrap();
        assert_eq!(s.order(), 80);
        assert_eq!(s.n_blocks(), 3);
        assert!(parse_blocks("2,,3").is_err());
    }

    #[test]
    fn exit_codes() {
        let guard: anyhow::Error = Error::ResourceLimit {
            what: "x".into(),
            log2_cost: 30,
            max: 26,
        }
        .into();
        assert_eq!(exit_code(&guard), 3);
        assert_eq!(exit_code(&Error::InvalidArgument("x".into()).into()), 2);
        assert_eq!(exit_code(&ChecksFailed(2).into()), 1);
    }
}
