use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use gradedjet::check::{Runner, Suite};
use gradedjet::diffop::{commutator, compose, diff_rank, extract_coeffs, DiffOperator};
use gradedjet::gvb::{Bundle, BundleSpec, SymTensor};
use gradedjet::jets::{jet_rank, prolong, total_rank};
use gradedjet::json::{
    self as gj, BundleJson, ContextJson, OperatorJson, SectionJson, SymTensorJson,
};
use gradedjet::symbol::{scalar_part, sn_bracket, symbol};
use gradedjet::{Ctx, Error};

#[derive(Parser)]
#[command(
    name = "gradedjet",
    version,
    about = "Exact calculus of differential operators and jets on graded coordinate domains"
)]
struct Cli {
    /// Coordinate context file
    #[arg(long, global = true)]
    context: Option<PathBuf>,
    /// Bundle file; defaults to the degree-0 line bundle
    #[arg(long, global = true)]
    bundle: Option<PathBuf>,
    /// Emit JSON instead of text
    #[arg(long, global = true)]
    json: bool,
    /// Seed for randomized checks
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Graded rank of the jet bundle or the operator bundle
    Rank {
        #[arg(long, value_enum)]
        kind: RankKind,
        #[arg(long)]
        order: u32,
    },
    /// Apply an operator to a section
    Apply {
        #[arg(long)]
        operator: PathBuf,
        #[arg(long)]
        section: PathBuf,
    },
    /// Commutator of two operators or Schouten–Nijenhuis bracket of two multivectors
    Bracket {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long, value_enum, default_value_t = BracketKind::Op)]
        kind: BracketKind,
    },
    /// Symbol of an operator at its declared order
    Symbol {
        #[arg(long)]
        operator: PathBuf,
    },
    /// Jet prolongation of a section
    Prolong {
        #[arg(long)]
        section: PathBuf,
        #[arg(long)]
        order: u32,
    },
    /// Compose operators (left to right) and decompose the result at a claimed order
    Decompose {
        #[arg(long, required = true)]
        operator: Vec<PathBuf>,
        #[arg(long)]
        order: u32,
    },
    /// Run the randomized identity checks
    Check {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 100)]
        cases: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RankKind {
    Jet,
    Diff,
}

#[derive(Clone, Copy, ValueEnum)]
enum BracketKind {
    Op,
    Sn,
}

enum Failure {
    Input(String),
    Contract(String),
    Checks,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) => Failure::Input(e.to_string()),
            _ => Failure::Contract(e.to_string()),
        }
    }
}

type Out = Result<(), Failure>;

fn label(path: &Path) -> String {
    format!("{}:$", path.display())
}

fn read<T: for<'de> serde::Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    gj::parse(&label(path), &text).map_err(Failure::from)
}

struct Env {
    json: bool,
    seed: u64,
    context: Option<PathBuf>,
    bundle: Option<PathBuf>,
}

impl Env {
    fn ctx(&self) -> Result<Ctx, Failure> {
        let path = self
            .context
            .as_ref()
            .ok_or_else(|| Failure::Input("--context is required for this command".into()))?;
        let j: ContextJson = read(path)?;
        Ok(gj::context_from_json(&label(path), &j)?)
    }

    fn bundle(&self, ctx: &Ctx) -> Result<Bundle, Failure> {
        match &self.bundle {
            None => Ok(BundleSpec::line(ctx)),
            Some(path) => {
                let j: BundleJson = read(path)?;
                Ok(gj::bundle_from_json(&label(path), ctx, &j)?)
            }
        }
    }

    fn operator(&self, b: &Bundle, path: &Path) -> Result<DiffOperator, Failure> {
        let j: OperatorJson = read(path)?;
        Ok(gj::operator_from_json(&label(path), b, &j)?)
    }

    fn emit(&self, text: impl std::fmt::Display, value: Value) {
        if self.json {
            println!(
                "{}",
                serde_json::to_string_pretty(&value).expect("serializable")
            );
        } else {
            println!("{text}");
        }
    }
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("serializable")
}

fn run(cli: Cli) -> Out {
    let env = Env {
        json: cli.json,
        seed: cli.seed,
        context: cli.context,
        bundle: cli.bundle,
    };
    match cli.cmd {
        Cmd::Rank { kind, order } => {
            let ctx = env.ctx()?;
            let b = env.bundle(&ctx)?;
            let (name, r) = match kind {
                RankKind::Jet => ("jet", jet_rank(&b, order)),
                RankKind::Diff => ("diff", diff_rank(&b, order)),
            };
            let mut text = String::new();
            for (d, n) in &r {
                text.push_str(&format!("{d:>4}  {n}\n"));
            }
            text.push_str(&format!("total {}", total_rank(&r)));
            env.emit(
                text,
                json!({"kind": name, "order": order, "ranks": gj::rank_to_json(&r), "total": total_rank(&r)}),
            );
        }
        Cmd::Apply { operator, section } => {
            let ctx = env.ctx()?;
            let b = env.bundle(&ctx)?;
            let d = env.operator(&b, &operator)?;
            let sj: SectionJson = read(&section)?;
            let psi = gj::section_from_json(&label(&section), &b, &sj)?;
            let out = d.apply(&psi)?;
            env.emit(&out, to_value(&gj::section_to_json(&out)));
        }
        Cmd::Bracket { left, right, kind } => {
            let ctx = env.ctx()?;
            match kind {
                BracketKind::Op => {
                    let b = env.bundle(&ctx)?;
                    let d1 = env.operator(&b, &left)?;
                    let d2 = env.operator(&b, &right)?;
                    let c = commutator(&d1, &d2)?;
                    env.emit(&c, to_value(&gj::operator_to_json(&c)));
                }
                BracketKind::Sn => {
                    let load = |p: &PathBuf| -> Result<SymTensor, Failure> {
                        let j: SymTensorJson = read(p)?;
                        Ok(gj::symtensor_from_json(&label(p), &ctx, &j)?)
                    };
                    let t = sn_bracket(&load(&left)?, &load(&right)?)?;
                    env.emit(&t, to_value(&gj::symtensor_to_json(&t)));
                }
            }
        }
        Cmd::Symbol { operator } => {
            let ctx = env.ctx()?;
            let b = env.bundle(&ctx)?;
            let d = env.operator(&b, &operator)?;
            let s = symbol(&d)?;
            let scalar = scalar_part(&s).ok();
            let mut text = s.to_string().replace("; ", "\n");
            if let Some(x) = &scalar {
                text.push_str(&format!("\nscalar symbol: {x}"));
            }
            env.emit(
                text,
                json!({
                    "symbol": to_value(&gj::symbol_to_json(&s)),
                    "scalar": scalar.as_ref().map(|x| to_value(&gj::symtensor_to_json(x))),
                }),
            );
        }
        Cmd::Prolong { section, order } => {
            let ctx = env.ctx()?;
            let b = env.bundle(&ctx)?;
            let sj: SectionJson = read(&section)?;
            let psi = gj::section_from_json(&label(&section), &b, &sj)?;
            let j = prolong(&psi, order)?;
            env.emit(
                j.to_string().replace("; ", "\n"),
                to_value(&gj::jet_to_json(&j)),
            );
        }
        Cmd::Decompose { operator, order } => {
            let ctx = env.ctx()?;
            let b = env.bundle(&ctx)?;
            let mut ops = operator.iter().map(|p| env.operator(&b, p));
            let mut acc = ops.next().expect("at least one operator")?;
            for d in ops {
                acc = compose(&acc, &d?)?;
            }
            let d = extract_coeffs(&acc, order)?;
            env.emit(&d, to_value(&gj::operator_to_json(&d)));
        }
        Cmd::Check { suite, cases } => {
            let suites = Suite::parse(&suite)
                .ok_or_else(|| Failure::Input(format!("--suite: unknown suite `{suite}`")))?;
            let report = Runner::new(env.seed, cases).run(&suites, &suite);
            env.emit(&report, to_value(&report));
            eprintln!("elapsed: {:.3}s", report.elapsed.as_secs_f64());
            if !report.passed() {
                return Err(Failure::Checks);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Contract(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
