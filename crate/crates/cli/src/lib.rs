//! Command-line front end: argument parsing and command dispatch. `main`
//! only forwards to [`run`] so the tests can drive the same code path.

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use vecnorm::analysis::{gen_term, GenOptions};
use vecnorm::denotation::{canonical_assignment, decompose, eval, VectorModel};
use vecnorm::engine::auto_fuel;
use vecnorm::scalar::scalar_requirements_check;
use vecnorm::suite::{run_suite, Suite, SuiteConfig};
use vecnorm::syntax::{parse_program, parse_system, print_program, Program};
use vecnorm::term::{Sort, Symbol, Var};
use vecnorm::{RewriteSystem, Rewriter, ScalarSystem, Strategy};

/// Exit code of a successful run or a passing check.
pub const EXIT_OK: i32 = 0;
/// Exit code of a failing check, a refused scalar system, or a
/// normalization that ran out of fuel.
pub const EXIT_FAIL: i32 = 1;
/// Exit code of usage, parse, and sort errors.
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "vecnorm", version, about = "Normalize vector and bilinear expressions by rewriting modulo AC")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the normal form of a term.
    Normalize(TermArgs),
    /// Print every rewrite step from a term to its normal form.
    Trace(TermArgs),
    /// Print every one-step reduct of a term.
    Reducts(TermArgs),
    /// Print the coordinates of a term under the canonical basis assignment.
    Eval(CoordArgs),
    /// Print the coefficients of a term's normal form along its variables.
    Decompose(CoordArgs),
    /// Print a seeded random term with its declarations.
    Gen(GenArgs),
    /// Run a check suite and print its report.
    Check(CheckArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Vector rewrite system.
    #[arg(long, value_enum, default_value_t = SystemArg::R)]
    system: SystemArg,
    /// Scalar system: q, f2, s0, or file:PATH for a rule file.
    #[arg(long, default_value = "q")]
    scalars: String,
    /// Rewriting strategy.
    #[arg(long, value_enum, default_value_t = StrategyArg::Innermost)]
    strategy: StrategyArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Step budget; derived from the term when absent.
    #[arg(long)]
    fuel: Option<usize>,
}

#[derive(Args, Debug)]
struct TermArgs {
    #[command(flatten)]
    common: Common,
    /// `vars …; consts …; term`; read from stdin when absent or `-`.
    term: Option<String>,
}

#[derive(Args, Debug)]
struct CoordArgs {
    #[command(flatten)]
    term: TermArgs,
    /// `E` variables in coordinate order; declaration order by default.
    #[arg(long, value_delimiter = ',')]
    order: Option<Vec<String>>,
    /// `F` variables in coordinate order; declaration order by default.
    #[arg(long, value_delimiter = ',')]
    forder: Option<Vec<String>>,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "E")]
    sort: String,
    #[arg(long, default_value_t = 12)]
    size: usize,
    /// Allow scalar variables.
    #[arg(long)]
    open: bool,
    /// Variables per vector sort.
    #[arg(long, default_value_t = 3)]
    vars: usize,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "all")]
    suite: String,
    /// Samples per check; each check has its own default.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SystemArg {
    R,
    Rprime,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum StrategyArg {
    #[value(name = "innermost", alias = "li")]
    Innermost,
    Random,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Format {
    Text,
    Summary,
}

/// A command failure with its exit code.
struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn failed(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_FAIL,
        message: message.into(),
    }
}

/// Samples used to vet a scalar system loaded from a file.
const FILE_SCALAR_SAMPLES: usize = 200;

/// Runs the command line `argv` (including the program name) and returns the
/// exit code.
pub fn run<I, S>(argv: I, input: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command, input, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "vecnorm: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cmd: Command, input: &mut dyn Read, out: &mut dyn Write) -> Result<i32, Failure> {
    let io_err = |e: io::Error| failed(format!("write error: {e}"));
    match cmd {
        Command::Normalize(a) => {
            let ctx = Context::new(&a.common)?;
            let prog = ctx.program(a.term, input)?;
            let (nf, _) = ctx.normalize(&prog)?;
            writeln!(out, "{nf}").map_err(io_err)?;
        }
        Command::Trace(a) => {
            let ctx = Context::new(&a.common)?;
            let prog = ctx.program(a.term, input)?;
            let (_, trace) = ctx.normalize(&prog)?;
            write!(out, "{trace}").map_err(io_err)?;
        }
        Command::Reducts(a) => {
            let ctx = Context::new(&a.common)?;
            let prog = ctx.program(a.term, input)?;
            let rw = Rewriter::new(&ctx.system, &ctx.scalars);
            for (_, step) in rw.reducts(&prog.term) {
                writeln!(out, "{}", step.line()).map_err(io_err)?;
            }
        }
        Command::Eval(a) => {
            let ctx = Context::new(&a.term.common)?;
            let prog = ctx.program(a.term.term, input)?;
            let (evars, fvars) = coordinate_vars(&prog, a.order, a.forder)?;
            let model = ctx.model(&evars, &fvars);
            let phi = canonical_assignment(&evars, &fvars, &model).map_err(|e| usage(e.to_string()))?;
            let value = eval(&prog.term, &phi, &model).map_err(|e| usage(e.to_string()))?;
            writeln!(out, "{value}").map_err(io_err)?;
        }
        Command::Decompose(a) => {
            let ctx = Context::new(&a.term.common)?;
            let prog = ctx.program(a.term.term, input)?;
            let (evars, fvars) = coordinate_vars(&prog, a.order, a.forder)?;
            let (nf, _) = ctx.normalize(&prog)?;
            let d = decompose(&nf, &evars, &fvars).map_err(|e| failed(e.to_string()))?;
            writeln!(out, "{d}").map_err(io_err)?;
        }
        Command::Gen(a) => {
            let ctx = Context::new(&a.common)?;
            let sort = Sort::parse(&a.sort).ok_or_else(|| usage(format!("unknown sort `{}`", a.sort)))?;
            if !ctx.system.signature.has_sort(sort) {
                return Err(usage(format!("system {} has no sort {sort}", ctx.system.name)));
            }
            let opts = GenOptions {
                semi_open: !a.open,
                vector_vars: a.vars,
                ..GenOptions::default()
            };
            let t = gen_term(&ctx.system.signature, sort, a.size, a.common.seed, &opts);
            writeln!(out, "{}", print_program(&t)).map_err(io_err)?;
        }
        Command::Check(a) => {
            let ctx = Context::new(&a.common)?;
            let suite: Suite = a.suite.parse().map_err(usage)?;
            let cfg = SuiteConfig {
                system: &ctx.system,
                scalars: &ctx.scalars,
                samples: a.samples,
                seed: a.common.seed,
            };
            let report = run_suite(suite, &cfg);
            match a.format {
                Format::Text => write!(out, "{report}"),
                Format::Summary => write!(out, "{}", report.summary()),
            }
            .map_err(io_err)?;
            return Ok(if report.pass() { EXIT_OK } else { EXIT_FAIL });
        }
    }
    Ok(EXIT_OK)
}

/// The systems and options shared by every command.
struct Context {
    system: RewriteSystem,
    scalars: ScalarSystem,
    strategy: Strategy,
    fuel: Option<usize>,
}

impl Context {
    fn new(c: &Common) -> Result<Context, Failure> {
        let system = match c.system {
            SystemArg::R => RewriteSystem::linear(),
            SystemArg::Rprime => RewriteSystem::bilinear(),
        };
        let scalars = load_scalars(&c.scalars, c.seed)?;
        let strategy = match c.strategy {
            StrategyArg::Innermost => Strategy::LeftmostInnermost,
            StrategyArg::Random => Strategy::Random(c.seed),
        };
        Ok(Context {
            system,
            scalars,
            strategy,
            fuel: c.fuel,
        })
    }

    fn program(&self, arg: Option<String>, input: &mut dyn Read) -> Result<Program, Failure> {
        let text = match arg.as_deref() {
            None | Some("-") => {
                let mut s = String::new();
                input
                    .read_to_string(&mut s)
                    .map_err(|e| usage(format!("cannot read stdin: {e}")))?;
                s
            }
            Some(t) => t.to_owned(),
        };
        parse_program(text.trim(), &self.system.signature).map_err(|e| usage(e.to_string()))
    }

    fn normalize(&self, prog: &Program) -> Result<(vecnorm::Term, vecnorm::Trace), Failure> {
        let fuel = self.fuel.unwrap_or_else(|| auto_fuel(&prog.term));
        Rewriter::new(&self.system, &self.scalars)
            .normalize(&prog.term, self.strategy, fuel)
            .map_err(|e| failed(e.to_string()))
    }

    /// Q^n for the linear system; the product model over the listed
    /// variables for the bilinear one.
    fn model(&self, evars: &[Var], fvars: &[Var]) -> VectorModel {
        if self.system.signature.declares(&Symbol::Tensor) {
            VectorModel::tensor(evars.len(), fvars.len())
        } else {
            VectorModel::linear(evars.len())
        }
    }
}

fn load_scalars(spec: &str, seed: u64) -> Result<ScalarSystem, Failure> {
    let Some(path) = spec.strip_prefix("file:") else {
        return ScalarSystem::builtin(spec).map_err(|e| usage(e.to_string()));
    };
    let path = PathBuf::from(path);
    let text = fs::read_to_string(&path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let sys = parse_system(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("file");
    let scalars = ScalarSystem::from_rules(name, sys);
    let report = scalar_requirements_check(&scalars, FILE_SCALAR_SAMPLES, seed);
    if !report.pass() {
        let broken: Vec<String> = report
            .verdicts()
            .filter(|v| !v.pass)
            .map(|v| match &v.counterexample {
                Some(c) => format!("{} ({c})", v.name),
                None => v.name.to_owned(),
            })
            .collect();
        return Err(failed(format!(
            "{} is not a scalar rewrite system: {}",
            path.display(),
            broken.join("; ")
        )));
    }
    Ok(scalars)
}

fn coordinate_vars(
    prog: &Program,
    order: Option<Vec<String>>,
    forder: Option<Vec<String>>,
) -> Result<(Vec<Var>, Vec<Var>), Failure> {
    let pick = |sort: Sort, names: Option<Vec<String>>| -> Result<Vec<Var>, Failure> {
        let declared = prog.vars_of(sort);
        match names {
            None => Ok(declared),
            Some(names) => names
                .iter()
                .map(|n| {
                    declared
                        .iter()
                        .find(|v| &*v.name == n.as_str())
                        .cloned()
                        .ok_or_else(|| usage(format!("`{n}` is not a declared {sort} variable")))
                })
                .collect(),
        }
    };
    Ok((pick(Sort::E, order)?, pick(Sort::F, forder)?))
}
