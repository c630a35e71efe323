//! The `gat` command line tool: checks, free models, law suites and theory
//! combinators over theory files.

pub mod dsl;

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use itertools::Itertools;

use graded_theory::combine::{coequalize, extend, lfold_state_oracle, sum, tensor};
use graded_theory::freemonad::{check_monad_laws, LawMode, TermMonad};
use graded_theory::lawvere::{check_lawvere, roundtrip_check, th_of, TheoryMorphism};
use graded_theory::model::FiniteModel;
use graded_theory::logic::{build_normalizer, entails, ClosureConfig, Entailment, Normalizer};
use graded_theory::syntax::standard_vars;
use graded_theory::{Error, Grade, GradeMonoid, LaxMonoidalMap, Result, Term, Theory};

use dsl::{parse_grade, parse_model, parse_monoid, parse_term, parse_theory, print_theory, TheoryFile};

#[derive(Parser, Debug)]
#[command(name = "gat", version, about = "Graded algebraic theories")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check that a theory file is well formed, and optionally a model of it.
    Check {
        theory: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Infer the grade of a term.
    Grade {
        theory: PathBuf,
        #[arg(short = 'e', long = "expr")]
        expr: String,
    },
    /// Decide an equation with the bounded closure.
    Entail {
        theory: PathBuf,
        #[arg(short = 'l', long)]
        lhs: String,
        #[arg(short = 'r', long)]
        rhs: String,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        /// Largest closure universe before giving up.
        #[arg(long)]
        cap: Option<usize>,
    },
    /// List the classes of the free model at one grade, or print the free
    /// model as a model file.
    Free {
        theory: PathBuf,
        #[arg(long, required_unless_present = "model")]
        grade: Option<String>,
        #[arg(long, default_value_t = 1)]
        vars: usize,
        /// Print the model over `--grade`, or over all grades up to
        /// `--nat-bound`.
        #[arg(long)]
        model: bool,
        #[arg(long, default_value_t = 2)]
        nat_bound: u64,
    },
    /// Run the graded-monad law suite on the free-model monad.
    Laws {
        theory: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Exhaustive)]
        mode: Mode,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest number of variables in the sample sets.
        #[arg(long, default_value_t = 2)]
        vars: usize,
        /// Largest natural number used for infinite grade monoids.
        #[arg(long, default_value_t = 2)]
        nat_bound: u64,
    },
    /// Build the graded Lawvere theory and run its checks.
    Lawvere {
        theory: PathBuf,
        #[arg(long, default_value_t = 2)]
        arity_bound: usize,
        #[arg(long, default_value_t = 2)]
        nat_bound: u64,
    },
    /// Print the sum of two theories.
    Sum { left: PathBuf, right: PathBuf },
    /// Print the tensor product of two theories.
    Tensor { left: PathBuf, right: PathBuf },
    /// Print a theory extended along a lax monoidal map.
    Extend {
        theory: PathBuf,
        #[arg(long, value_enum)]
        map: MapKind,
        /// The other monoid for `unit`, `left` and `right`.
        #[arg(long)]
        monoid: Option<String>,
    },
    /// Print the coequalizer of two morphisms `source -> target` given by
    /// assignments `op = term; ...` in the variables `x1..xn`.
    Coeq {
        target: PathBuf,
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        beta: String,
    },
    /// Count the store maps touching each set of locations.
    OracleState {
        #[arg(long, default_value_t = 2)]
        locations: usize,
        #[arg(long, default_value_t = 2)]
        values: usize,
        #[arg(long, default_value_t = 1)]
        vars: usize,
        #[arg(long, default_value_t = 1 << 22)]
        cap: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Exhaustive,
    Random,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MapKind {
    /// The identity on the theory's monoid.
    Identity,
    /// From the trivial monoid into `--monoid`.
    Unit,
    /// `m ↦ (m, I)` into the product with `--monoid`.
    Left,
    /// `m ↦ (I, m)` into the product with `--monoid`.
    Right,
}

/// Exit status and the two output streams of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub status: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    Usage(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } => Failure::Usage(e.to_string()),
            e => Failure::Check(e.to_string()),
        }
    }
}

type CmdResult = std::result::Result<(bool, String), Failure>;

/// Runs one command line; `args` includes the program name.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let status = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if status == 0 {
                Outcome { status, stdout: text, stderr: String::new() }
            } else {
                Outcome { status, stdout: String::new(), stderr: text }
            };
        }
    };
    match execute(cli.command) {
        Ok((ok, stdout)) => Outcome {
            status: if ok { 0 } else { 1 },
            stdout,
            stderr: String::new(),
        },
        Err(Failure::Usage(msg)) => Outcome {
            status: 2,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        },
        Err(Failure::Check(msg)) => Outcome {
            status: 1,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        },
    }
}

fn read(path: &Path) -> std::result::Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> std::result::Result<TheoryFile, Failure> {
    let text = read(path)?;
    parse_theory(&text).map_err(|e| Failure::Usage(format!("{}:{e}", path.display())))
}

fn normalizer(file: &TheoryFile) -> Result<std::sync::Arc<dyn Normalizer>> {
    build_normalizer(&file.theory, &file.normalizer_kind())
}

fn grades_of(gm: &GradeMonoid, nat_bound: u64) -> Vec<Grade> {
    gm.enumerate(nat_bound)
}

fn report(out: &mut String, what: &str, lines: &[String]) -> bool {
    if lines.is_empty() {
        writeln!(out, "{what}: ok").unwrap();
        true
    } else {
        writeln!(out, "{what}: {} failures", lines.len()).unwrap();
        for l in lines {
            writeln!(out, "  {l}").unwrap();
        }
        false
    }
}

fn execute(cmd: Command) -> CmdResult {
    let mut out = String::new();
    let ok = match cmd {
        Command::Check { theory, model } => {
            let file = load(&theory)?;
            let th = &file.theory;
            writeln!(
                out,
                "theory: {} operations, {} equations ({} schemas) over {}",
                th.signature.ops().len(),
                th.axioms.len(),
                th.schema_count(),
                th.monoid()
            )
            .unwrap();
            writeln!(out, "well-formed").unwrap();
            match model {
                None => true,
                Some(path) => {
                    let text = read(&path)?;
                    let m = parse_model(th, &text).map_err(|e| match e {
                        Error::Parse { .. } => Failure::Usage(format!("{}:{e}", path.display())),
                        e => Failure::Check(e.to_string()),
                    })?;
                    writeln!(out, "model: {} grades", m.support().len()).unwrap();
                    report(&mut out, "model checks", &m.check_model())
                }
            }
        }
        Command::Grade { theory, expr } => {
            let file = load(&theory)?;
            let sig = &file.theory.signature;
            let t = parse_term(sig, &expr)?;
            let g = sig.infer_grade(&t)?;
            let gm = sig.monoid();
            let note = if Some(&g) == gm.top().as_ref() {
                " (top)"
            } else if g == gm.unit() {
                " (unit)"
            } else {
                ""
            };
            writeln!(out, "{g}{note}").unwrap();
            true
        }
        Command::Entail { theory, lhs, rhs, depth, cap } => {
            let file = load(&theory)?;
            let sig = &file.theory.signature;
            let (l, r) = (parse_term(sig, &lhs)?, parse_term(sig, &rhs)?);
            let mut cfg = ClosureConfig::with_depth(depth);
            if let Some(cap) = cap {
                cfg.max_terms = cap;
            }
            match entails(&file.theory, &l, &r, &cfg)? {
                Entailment::Proved => {
                    writeln!(out, "Proved").unwrap();
                    true
                }
                Entailment::Unknown => {
                    writeln!(out, "Unknown").unwrap();
                    false
                }
            }
        }
        Command::Free { theory, grade, vars, model, nat_bound } => {
            let file = load(&theory)?;
            let gm = file.theory.monoid();
            let g = grade.map(|g| parse_grade(gm, &g)).transpose()?;
            let xs = standard_vars(vars);
            let nz = normalizer(&file)?;
            if model {
                let support = g.map_or_else(|| grades_of(gm, nat_bound), |g| vec![g]);
                out.push_str(&FiniteModel::free(nz.as_ref(), &xs, support)?.to_string());
                return Ok((true, out));
            }
            let g = g.expect("required unless --model");
            let classes = nz.elements(&g, &xs)?;
            let noun = if classes.len() == 1 { "class" } else { "classes" };
            writeln!(out, "{} {noun} at {g} over {{{}}}", classes.len(), xs.join(", ")).unwrap();
            for c in classes {
                writeln!(out, "{c}").unwrap();
            }
            true
        }
        Command::Laws { theory, mode, trials, seed, vars, nat_bound } => {
            let file = load(&theory)?;
            let monad = TermMonad::new(normalizer(&file)?);
            let grades = grades_of(file.theory.monoid(), nat_bound);
            let sets: Vec<Vec<String>> = (0..=vars).map(standard_vars).collect();
            let mode = match mode {
                Mode::Exhaustive => LawMode::Exhaustive,
                Mode::Random => LawMode::Random { trials, seed },
            };
            let lines = check_monad_laws(&monad, &grades, &sets, &mode)?;
            writeln!(out, "grades: {}", grades.iter().join(", ")).unwrap();
            report(&mut out, "monad laws", &lines)
        }
        Command::Lawvere { theory, arity_bound, nat_bound } => {
            let file = load(&theory)?;
            let grades = grades_of(file.theory.monoid(), nat_bound);
            let l = th_of(normalizer(&file)?, arity_bound, grades)?;
            let a = report(&mut out, "lawvere", &check_lawvere(&l));
            let b = report(&mut out, "roundtrip", &roundtrip_check(&l));
            a && b
        }
        Command::Sum { left, right } => {
            let s = sum(&load(&left)?.theory, &load(&right)?.theory)?;
            out.push_str(&print_theory(&TheoryFile::new(s.theory)));
            true
        }
        Command::Tensor { left, right } => {
            let t = tensor(&load(&left)?.theory, &load(&right)?.theory)?;
            out.push_str(&print_theory(&TheoryFile::new(t)));
            true
        }
        Command::Extend { theory, map, monoid } => {
            let file = load(&theory)?;
            let source = file.theory.monoid().clone();
            let other = || -> std::result::Result<GradeMonoid, Failure> {
                let text = monoid
                    .as_deref()
                    .ok_or_else(|| Failure::Usage("this map needs --monoid".into()))?;
                Ok(parse_monoid(text)?)
            };
            let g = match map {
                MapKind::Identity => LaxMonoidalMap::identity(source),
                MapKind::Unit => {
                    if source != GradeMonoid::Trivial {
                        return Err(Failure::Usage(format!("the unit map starts at trivial, not {source}")));
                    }
                    LaxMonoidalMap::unit_into(other()?)
                }
                MapKind::Left => LaxMonoidalMap::embed_left(source, other()?),
                MapKind::Right => LaxMonoidalMap::embed_right(other()?, source),
            };
            out.push_str(&print_theory(&TheoryFile::new(extend(&g, &file.theory)?)));
            true
        }
        Command::Coeq { target, source, alpha, beta } => {
            let target = load(&target)?.theory;
            let source = load(&source)?.theory;
            let a = morphism(&source, &target, &alpha)?;
            let b = morphism(&source, &target, &beta)?;
            out.push_str(&print_theory(&TheoryFile::new(coequalize(&a, &b)?)));
            true
        }
        Command::OracleState { locations, values, vars, cap } => {
            let locs: Vec<String> = (1..=locations).map(|l| l.to_string()).collect();
            let xs = standard_vars(vars);
            for k in 0..=locations {
                for used in locs.iter().cloned().combinations(k) {
                    let used: BTreeSet<String> = used.into_iter().collect();
                    let n = lfold_state_oracle(&locs, values, &xs, &used, cap)?.len();
                    writeln!(out, "{{{}}}: {n}", used.iter().join(", ")).unwrap();
                }
            }
            true
        }
    };
    Ok((ok, out))
}

/// Reads `op = term; ...` as a morphism on generators.
fn morphism(source: &Theory, target: &Theory, text: &str) -> std::result::Result<TheoryMorphism, Failure> {
    let mut assignment = BTreeMap::new();
    for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let Some((op, term)) = part.split_once('=') else {
            return Err(Failure::Usage(format!("expected `op = term`, found `{part}`")));
        };
        let t: Term = parse_term(&target.signature, term.trim())?;
        assignment.insert(op.trim().to_string(), t);
    }
    Ok(TheoryMorphism::new(source.clone(), target.clone(), assignment)?)
}
