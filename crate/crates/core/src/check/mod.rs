//! Seeded identity-check runner over random inputs.

pub mod gen;
mod props;

use std::fmt;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use serde::Serialize;

use crate::error::Error;
use crate::gcore::CoordinateContext;
use crate::jets::{default_right_partial, RightPartial};
use crate::json::context_to_json;
use crate::parallel::map_indexed;
use gen::Rng8;

pub use props::PROPERTIES;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Algebra,
    Diffop,
    Symbol,
    Jets,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Algebra, Suite::Diffop, Suite::Symbol, Suite::Jets];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Algebra => "algebra",
            Suite::Diffop => "diffop",
            Suite::Symbol => "symbol",
            Suite::Jets => "jets",
        }
    }

    /// Parses a suite name; `all` gives every suite.
    pub fn parse(s: &str) -> Option<Vec<Suite>> {
        match s {
            "all" => Some(Self::ALL.to_vec()),
            _ => Self::ALL
                .iter()
                .copied()
                .find(|x| x.name() == s)
                .map(|x| vec![x]),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Why a case failed.
#[derive(Debug, Clone)]
pub enum Fail {
    Mismatch { expected: String, actual: String },
    Error(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Error(e.to_string())
    }
}

/// Per-case state: the random stream and the recorded inputs.
pub struct Case {
    pub id: usize,
    pub rng: Rng8,
    pub right_partial: RightPartial,
    context: Option<serde_json::Value>,
    inputs: Vec<(String, String)>,
}

impl Case {
    pub fn context(&mut self, ctx: &CoordinateContext) {
        self.context = serde_json::to_value(context_to_json(ctx)).ok();
    }

    pub fn input(&mut self, name: &str, value: impl fmt::Display) {
        self.inputs.push((name.to_string(), value.to_string()));
    }

    pub fn eq<T: PartialEq + fmt::Debug>(&self, expected: &T, actual: &T) -> Result<(), Fail> {
        if expected == actual {
            Ok(())
        } else {
            Err(Fail::Mismatch {
                expected: format!("{expected:?}"),
                actual: format!("{actual:?}"),
            })
        }
    }

    pub fn ensure(&self, ok: bool, what: impl FnOnce() -> (String, String)) -> Result<(), Fail> {
        if ok {
            Ok(())
        } else {
            let (expected, actual) = what();
            Err(Fail::Mismatch { expected, actual })
        }
    }
}

pub type CaseFn = fn(&mut Case) -> Result<(), Fail>;

/// A named identity checked over random cases, or once when exhaustive.
pub struct Property {
    pub suite: Suite,
    pub name: &'static str,
    pub exhaustive: bool,
    pub run: CaseFn,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub context: Option<serde_json::Value>,
    pub inputs: Vec<(String, String)>,
    pub expected: String,
    pub actual: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub property: String,
    pub case: usize,
    pub witness: Witness,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropertySummary {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
}

/// Outcome of a check run. Elapsed time is kept out of the serialized form
/// so that reports are byte-identical across runs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub suite: String,
    pub seed: u64,
    pub cases: usize,
    pub properties: Vec<PropertySummary>,
    pub failures: Vec<Failure>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "suite {} seed {}", self.suite, self.seed)?;
        for p in &self.properties {
            let status = if p.failures == 0 { "ok" } else { "FAILED" };
            writeln!(f, "  {:<36} {:>5} cases  {status}", p.name, p.cases)?;
        }
        for fl in &self.failures {
            writeln!(f, "failure in {} (case {}):", fl.property, fl.case)?;
            if let Some(c) = &fl.witness.context {
                writeln!(f, "  context: {c}")?;
            }
            for (k, v) in &fl.witness.inputs {
                writeln!(f, "  {k} = {v}")?;
            }
            writeln!(f, "  expected: {}", fl.witness.expected)?;
            writeln!(f, "  actual:   {}", fl.witness.actual)?;
        }
        write!(f, "{} cases, {} failures", self.cases, self.failures.len())
    }
}

/// Stable FNV-1a, used to derive per-case seeds.
fn fnv(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

pub fn case_seed(seed: u64, suite: Suite, property: &str, case: usize) -> u64 {
    let key = format!("{seed}/{}/{property}/{case}", suite.name());
    fnv(key.as_bytes())
}

/// Runs properties, optionally spreading the cases over threads.
#[derive(Clone)]
pub struct Runner {
    pub seed: u64,
    pub cases: usize,
    pub parallel: bool,
    pub right_partial: RightPartial,
}

impl Runner {
    pub fn new(seed: u64, cases: usize) -> Self {
        Self {
            seed,
            cases,
            parallel: true,
            right_partial: default_right_partial,
        }
    }

    pub fn sequential(mut self) -> Self {
        self.parallel = false;
        self
    }

    pub fn with_right_partial(mut self, f: RightPartial) -> Self {
        self.right_partial = f;
        self
    }

    fn run_case(&self, p: &Property, id: usize) -> Option<Failure> {
        let mut case = Case {
            id,
            rng: Rng8::seed_from_u64(case_seed(self.seed, p.suite, p.name, id)),
            right_partial: self.right_partial,
            context: None,
            inputs: Vec::new(),
        };
        let res = (p.run)(&mut case);
        let (expected, actual) = match res {
            Ok(()) => return None,
            Err(Fail::Mismatch { expected, actual }) => (expected, actual),
            Err(Fail::Error(e)) => ("no error".to_string(), e),
        };
        Some(Failure {
            property: format!("{}/{}", p.suite, p.name),
            case: id,
            witness: Witness {
                context: case.context,
                inputs: case.inputs,
                expected,
                actual,
            },
        })
    }

    /// Runs one property; failures come back sorted by case id.
    pub fn run_property(&self, p: &Property) -> (PropertySummary, Vec<Failure>) {
        let n = if p.exhaustive { 1 } else { self.cases };
        let failures: Vec<Failure> = map_indexed(n, self.parallel, |id| self.run_case(p, id))
            .into_iter()
            .flatten()
            .collect();
        let summary = PropertySummary {
            name: format!("{}/{}", p.suite, p.name),
            cases: n,
            failures: failures.len(),
        };
        (summary, failures)
    }

    pub fn run(&self, suites: &[Suite], label: &str) -> CheckReport {
        let start = Instant::now();
        let mut report = CheckReport {
            suite: label.to_string(),
            seed: self.seed,
            cases: 0,
            properties: Vec::new(),
            failures: Vec::new(),
            elapsed: Duration::ZERO,
        };
        for p in PROPERTIES.iter().filter(|p| suites.contains(&p.suite)) {
            let (s, f) = self.run_property(p);
            report.cases += s.cases;
            report.properties.push(s);
            report.failures.extend(f);
        }
        report.elapsed = start.elapsed();
        report
    }

    /// Runs a single property by `suite/name` or bare name.
    pub fn run_named(&self, name: &str) -> Option<CheckReport> {
        let p = find_property(name)?;
        let start = Instant::now();
        let (s, failures) = self.run_property(p);
        Some(CheckReport {
            suite: s.name.clone(),
            seed: self.seed,
            cases: s.cases,
            properties: vec![s],
            failures,
            elapsed: start.elapsed(),
        })
    }
}

pub fn find_property(name: &str) -> Option<&'static Property> {
    PROPERTIES
        .iter()
        .find(|p| p.name == name || format!("{}/{}", p.suite, p.name) == name)
}
