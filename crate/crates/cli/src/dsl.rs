//! Text formats for theories (`.gat`), terms, grades and finite models
//! (`.gam`).
//!
//! Theory files are line oriented; `#` starts a comment:
//!
//! ```text
//! monoid exception {e1, e2}
//! normalizer coercion
//! op raise_e1 : 0 @ {e1}
//! eq label: forall x, y : lhs = rhs
//! ```
//!
//! The monoid line comes first so that grade literals can be read against
//! it. Grade literals are `I` (the unit), `bot`, `top`, `nat:K` or `K`,
//! `{a, b}` and `(g1, g2)`. Terms are variables, `op(t, ...)`, nullary
//! operations written `op`, `op()` or `op@g()`, and coercions `c[g](t)`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use graded_theory::logic::{ClosureConfig, NormalizerKind};
use graded_theory::model::FiniteModel;
use graded_theory::{Equation, Error, Grade, GradeMonoid, Result, Signature, Term, Theory};

/// A parsed theory file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TheoryFile {
    pub theory: Theory,
    pub normalizer: Option<NormalizerKind>,
}

impl TheoryFile {
    pub fn new(theory: Theory) -> Self {
        TheoryFile { theory, normalizer: None }
    }

    /// The declared normalizer, or the automatic choice for the theory.
    pub fn normalizer_kind(&self) -> NormalizerKind {
        self.normalizer
            .clone()
            .unwrap_or_else(|| NormalizerKind::auto(&self.theory, ClosureConfig::default()))
    }
}

struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

fn is_ident(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

fn is_atom(c: char) -> bool {
    is_ident(c) || c == '*'
}

impl Cursor {
    fn new(src: &str, line: usize) -> Self {
        Cursor {
            chars: src.chars().collect(),
            pos: 0,
            line,
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        self.err_at(self.pos, msg)
    }

    fn err_at<T>(&self, pos: usize, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            line: self.line,
            col: pos + 1,
            msg: msg.into(),
        })
    }

    fn ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            match self.peek() {
                Some(d) => self.err(format!("expected `{c}`, found `{d}`")),
                None => self.err(format!("expected `{c}`, found end of line")),
            }
        }
    }

    fn word_with(&mut self, ok: fn(char) -> bool) -> Option<String> {
        self.ws();
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|&c| ok(c)) {
            self.pos += 1;
        }
        (self.pos > start).then(|| self.chars[start..self.pos].iter().collect())
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.word_with(is_ident) {
            Some(w) => Ok(w),
            None => self.err(format!("expected {what}")),
        }
    }

    fn keyword(&mut self, kw: &str) -> bool {
        self.ws();
        let save = self.pos;
        if self.word_with(is_ident).as_deref() == Some(kw) {
            true
        } else {
            self.pos = save;
            false
        }
    }

    fn number(&mut self, what: &str) -> Result<u64> {
        self.ws();
        let start = self.pos;
        match self.word_with(|c| c.is_ascii_digit()) {
            Some(w) => w.parse().or_else(|_| self.err_at(start, format!("{what} `{w}` is too large"))),
            None => self.err(format!("expected {what}")),
        }
    }

    fn finish(&mut self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(c) => self.err(format!("unexpected `{c}`")),
        }
    }

    fn rest(&mut self) -> String {
        self.ws();
        let s: String = self.chars[self.pos..].iter().collect();
        self.pos = self.chars.len();
        s
    }

    /// The grade literal starting at `start`: up to the matching bracket,
    /// or up to the next separator at depth zero.
    fn literal_from(&self, start: usize) -> String {
        let mut depth = 0i32;
        let mut end = start;
        while let Some(&c) = self.chars.get(end) {
            match c {
                '{' | '(' | '[' => depth += 1,
                '}' | ')' | ']' => {
                    depth -= 1;
                    if depth < 0 {
                        break;
                    }
                    if depth == 0 {
                        end += 1;
                        break;
                    }
                }
                c if depth == 0 && (c.is_whitespace() || c == ',') => break,
                _ => {}
            }
            end += 1;
        }
        self.chars[start..end.max(start + 1).min(self.chars.len())].iter().collect()
    }

    fn monoid(&mut self) -> Result<GradeMonoid> {
        let start = self.pos;
        let name = self.ident("grade monoid")?;
        match name.as_str() {
            "trivial" => Ok(GradeMonoid::Trivial),
            "nat" => Ok(GradeMonoid::DiscreteNat),
            "two" => Ok(GradeMonoid::two()),
            "powerset" => Ok(GradeMonoid::powerset(self.atoms()?)),
            "exception" => {
                let ex = self.atoms()?;
                if ex.iter().any(|e| e == graded_theory::OK) {
                    return self.err_at(start, "`Ok` is reserved in exception monoids");
                }
                Ok(GradeMonoid::exception(ex))
            }
            "product" => {
                self.expect('(')?;
                let a = self.monoid()?;
                self.expect(',')?;
                let b = self.monoid()?;
                self.expect(')')?;
                Ok(GradeMonoid::product(a, b))
            }
            _ => self.err_at(start, format!("unknown grade monoid `{name}`")),
        }
    }

    fn atoms(&mut self) -> Result<Vec<String>> {
        self.expect('{')?;
        let mut out = Vec::new();
        if self.eat('}') {
            return Ok(out);
        }
        loop {
            match self.word_with(is_atom) {
                Some(a) => out.push(a),
                None => return self.err("expected set element"),
            }
            if self.eat('}') {
                return Ok(out);
            }
            self.expect(',')?;
        }
    }

    fn grade(&mut self, gm: &GradeMonoid) -> Result<Grade> {
        self.ws();
        let start = self.pos;
        let bad = |c: &Self, why: String| -> Result<Grade> {
            c.err_at(start, format!("malformed grade literal `{}`: {why}", c.literal_from(start)))
        };
        let g = match self.grade_raw(gm) {
            Ok(g) => g,
            Err(Error::Parse { msg, .. }) => return bad(self, msg),
            Err(e) => return bad(self, e.to_string()),
        };
        match gm.check(&g) {
            Ok(()) => Ok(g),
            Err(e) => bad(self, e.to_string()),
        }
    }

    fn grade_raw(&mut self, gm: &GradeMonoid) -> Result<Grade> {
        if self.keyword("I") {
            return Ok(gm.unit());
        }
        if self.keyword("top") {
            return gm.top().map_or_else(|| self.err(format!("{gm} has no top element")), Ok);
        }
        if self.keyword("bot") {
            return bottom(gm).map_or_else(|| self.err(format!("{gm} has no least element")), Ok);
        }
        match gm {
            GradeMonoid::Trivial => self.err("expected `I`"),
            GradeMonoid::DiscreteNat => {
                self.keyword("nat");
                self.eat(':');
                Ok(Grade::Nat(self.number("natural number")?))
            }
            GradeMonoid::PowersetJoin(_) | GradeMonoid::Exception(_) => Ok(Grade::set(self.atoms()?)),
            GradeMonoid::Product(a, b) => {
                self.expect('(')?;
                let x = self.grade_raw(a)?;
                self.expect(',')?;
                let y = self.grade_raw(b)?;
                self.expect(')')?;
                Ok(Grade::pair(x, y))
            }
        }
    }

    fn term(&mut self, sig: &Signature) -> Result<Term> {
        self.ws();
        let start = self.pos;
        let name = self.ident("term")?;
        if name == "c" && self.eat('[') {
            let g = self.grade(sig.monoid())?;
            self.expect(']')?;
            self.expect('(')?;
            let body = self.term(sig)?;
            self.expect(')')?;
            return Ok(Term::coerce(g, body));
        }
        let is_op = sig.contains(&name);
        if self.eat('@') {
            if !is_op {
                return self.err_at(start, format!("unknown operation `{name}`"));
            }
            let g = self.grade(sig.monoid())?;
            self.expect('(')?;
            self.expect(')')?;
            return Ok(Term::constant_at(name, g));
        }
        if self.eat('(') {
            if !is_op {
                return self.err_at(start, format!("unknown operation `{name}`"));
            }
            let mut args = Vec::new();
            if !self.eat(')') {
                loop {
                    args.push(self.term(sig)?);
                    if self.eat(')') {
                        break;
                    }
                    self.expect(',')?;
                }
            }
            return Ok(Term::app(name, args));
        }
        if is_op {
            return Ok(Term::constant(name));
        }
        Ok(Term::var(name))
    }

    /// A term followed by a check that it is well graded.
    fn graded_term(&mut self, sig: &Signature) -> Result<Term> {
        self.ws();
        let start = self.pos;
        let t = self.term(sig)?;
        match sig.infer_grade(&t) {
            Ok(_) => Ok(t),
            Err(e) => self.err_at(start, format!("{e} in `{t}`")),
        }
    }
}

fn bottom(gm: &GradeMonoid) -> Option<Grade> {
    match gm {
        GradeMonoid::Trivial => Some(Grade::Unit),
        GradeMonoid::PowersetJoin(_) => Some(gm.unit()),
        GradeMonoid::Product(a, b) => Some(Grade::pair(bottom(a)?, bottom(b)?)),
        GradeMonoid::DiscreteNat | GradeMonoid::Exception(_) => None,
    }
}

/// Splits `s` at commas outside brackets.
fn split_top(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '{' | '(' | '[' => depth += 1,
            '}' | ')' | ']' => depth -= 1,
            ',' if depth == 0 => {
                out.push(cur.trim().to_string());
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(c);
    }
    if !cur.trim().is_empty() || !out.is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

/// Splits `s` at the first `->` outside brackets.
fn split_arrow(s: &str) -> Option<(String, String)> {
    let mut depth = 0i32;
    let b = s.as_bytes();
    for i in 0..b.len() {
        match b[i] {
            b'{' | b'(' | b'[' => depth += 1,
            b'}' | b')' | b']' => depth -= 1,
            b'-' if depth == 0 && b.get(i + 1) == Some(&b'>') => {
                return Some((s[..i].trim().to_string(), s[i + 2..].trim().to_string()));
            }
            _ => {}
        }
    }
    None
}

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("");
        (!l.trim().is_empty()).then_some((i + 1, l))
    })
}

pub fn parse_monoid(text: &str) -> Result<GradeMonoid> {
    let mut c = Cursor::new(text, 1);
    let gm = c.monoid()?;
    c.finish()?;
    Ok(gm)
}

pub fn parse_grade(gm: &GradeMonoid, text: &str) -> Result<Grade> {
    let mut c = Cursor::new(text, 1);
    let g = c.grade(gm)?;
    c.finish()?;
    Ok(g)
}

/// Parses a well-graded term over `sig`.
pub fn parse_term(sig: &Signature, text: &str) -> Result<Term> {
    let mut c = Cursor::new(text, 1);
    let t = c.graded_term(sig)?;
    c.finish()?;
    Ok(t)
}

fn parse_normalizer(c: &mut Cursor) -> Result<NormalizerKind> {
    let start = c.pos;
    match c.ident("normalizer")?.as_str() {
        "coercion" => Ok(NormalizerKind::Coercion),
        "state" => Ok(NormalizerKind::State),
        "closure" => {
            let mut cfg = ClosureConfig::default();
            loop {
                if c.keyword("depth") {
                    cfg.depth = c.number("depth")? as usize;
                } else if c.keyword("nat_bound") {
                    cfg.nat_bound = c.number("bound")?;
                } else {
                    return Ok(NormalizerKind::Closure(cfg));
                }
            }
        }
        other => c.err_at(start, format!("unknown normalizer `{other}`")),
    }
}

pub fn parse_theory(text: &str) -> Result<TheoryFile> {
    let mut sig: Option<Signature> = None;
    let mut normalizer = None;
    let mut axioms = Vec::new();
    for (no, line) in lines(text) {
        let mut c = Cursor::new(line, no);
        c.ws();
        let start = c.pos;
        let kw = c.ident("declaration")?;
        if kw == "monoid" {
            if sig.is_some() {
                return c.err_at(start, "monoid declared twice");
            }
            sig = Some(Signature::new(c.monoid()?));
            c.finish()?;
            continue;
        }
        let Some(s) = sig.as_mut() else {
            return c.err_at(start, "the first declaration must be `monoid`");
        };
        match kw.as_str() {
            "normalizer" => normalizer = Some(parse_normalizer(&mut c)?),
            "op" => {
                c.ws();
                let at = c.pos;
                let name = c.ident("operation name")?;
                if name == "c" {
                    return c.err_at(at, "`c` is reserved for coercions");
                }
                c.expect(':')?;
                let arity = c.number("arity")? as usize;
                c.expect('@')?;
                let g = c.grade(s.monoid())?;
                if let Err(e) = s.add_op(name, arity, g) {
                    return c.err_at(at, e.to_string());
                }
            }
            "eq" => {
                let label = if c.keyword("forall") {
                    None
                } else {
                    let l = c.word_with(|ch| !ch.is_whitespace() && ch != ':');
                    c.expect(':')?;
                    if !c.keyword("forall") {
                        return c.err("expected `forall`");
                    }
                    l
                };
                let mut ctx = Vec::new();
                if !c.eat(':') {
                    loop {
                        ctx.push(c.ident("variable")?);
                        if c.eat(':') {
                            break;
                        }
                        c.expect(',')?;
                    }
                }
                c.ws();
                let at = c.pos;
                let lhs = c.graded_term(s)?;
                c.expect('=')?;
                let rhs = c.graded_term(s)?;
                match Equation::new(s, ctx, lhs, rhs) {
                    Ok(eq) => axioms.push(match label {
                        Some(l) => eq.labelled(l),
                        None => eq,
                    }),
                    Err(e) => return c.err_at(at, e.to_string()),
                }
            }
            other => return c.err_at(start, format!("unknown declaration `{other}`")),
        }
        c.finish()?;
    }
    let Some(signature) = sig else {
        return Err(Error::Parse {
            line: 1,
            col: 1,
            msg: "missing `monoid` declaration".into(),
        });
    };
    Ok(TheoryFile {
        theory: Theory::new(signature, axioms)?,
        normalizer,
    })
}

/// Canonical text of a theory file; [`parse_theory`] reads it back.
pub fn print_theory(file: &TheoryFile) -> String {
    let th = &file.theory;
    let mut out = String::new();
    writeln!(out, "monoid {}", th.monoid()).unwrap();
    match &file.normalizer {
        None => {}
        Some(NormalizerKind::Coercion) => out.push_str("normalizer coercion\n"),
        Some(NormalizerKind::State) => out.push_str("normalizer state\n"),
        Some(NormalizerKind::Closure(cfg)) => {
            writeln!(out, "normalizer closure depth {} nat_bound {}", cfg.depth, cfg.nat_bound).unwrap()
        }
    }
    for op in th.signature.ops() {
        writeln!(out, "op {} : {} @ {}", op.name, op.arity, op.grade).unwrap();
    }
    for ax in &th.axioms {
        out.push_str("eq ");
        if let Some(l) = &ax.label {
            write!(out, "{l}: ").unwrap();
        }
        if ax.context.is_empty() {
            out.push_str("forall : ");
        } else {
            write!(out, "forall {} : ", ax.context.join(", ")).unwrap();
        }
        writeln!(out, "{} = {}", ax.lhs, ax.rhs).unwrap();
    }
    out
}

#[derive(Default)]
struct ModelTables {
    support: Vec<Grade>,
    carriers: BTreeMap<Grade, Vec<String>>,
    actions: BTreeMap<(Grade, Grade), BTreeMap<String, String>>,
    ops: BTreeMap<(String, Grade), BTreeMap<Vec<String>, String>>,
}

/// Reads a model of `theory` in the format printed by [`FiniteModel`].
pub fn parse_model(theory: &Theory, text: &str) -> Result<FiniteModel> {
    let gm = theory.monoid();
    let mut t = ModelTables::default();
    for (no, line) in lines(text) {
        let mut c = Cursor::new(line, no);
        c.ws();
        let start = c.pos;
        match c.ident("declaration")?.as_str() {
            "carrier" => {
                let g = c.grade(gm)?;
                c.expect('=')?;
                let labels = split_top(&c.rest());
                if t.carriers.insert(g.clone(), labels).is_some() {
                    return c.err_at(start, format!("carrier {g} given twice"));
                }
                t.support.push(g);
            }
            "action" => {
                let a = c.grade(gm)?;
                c.expect('-')?;
                c.expect('>')?;
                let b = c.grade(gm)?;
                c.expect(':')?;
                let mut table = BTreeMap::new();
                for row in split_top(&c.rest()) {
                    let Some((x, y)) = split_arrow(&row) else {
                        return c.err_at(start, format!("expected `a -> b`, found `{row}`"));
                    };
                    table.insert(x, y);
                }
                t.actions.insert((a, b), table);
            }
            "interp" => {
                let op = c.ident("operation name")?;
                c.expect('@')?;
                let g = c.grade(gm)?;
                c.expect(':')?;
                let mut table = BTreeMap::new();
                for row in split_top(&c.rest()) {
                    let parsed = split_arrow(&row).and_then(|(args, out)| {
                        let inner = args.strip_prefix('(')?.strip_suffix(')')?;
                        Some((split_top(inner), out))
                    });
                    let Some((args, out)) = parsed else {
                        return c.err_at(start, format!("expected `(a, ...) -> b`, found `{row}`"));
                    };
                    table.insert(args, out);
                }
                t.ops.insert((op, g), table);
            }
            other => return c.err_at(start, format!("unknown declaration `{other}`")),
        }
    }
    let missing = |what: String| Error::IllFormed(format!("model file has no entry for {what}"));
    FiniteModel::build(
        theory.clone(),
        t.support.clone(),
        |g| Ok(t.carriers[g].clone()),
        |a, b, x| {
            t.actions
                .get(&(a.clone(), b.clone()))
                .and_then(|m| m.get(x))
                .cloned()
                .ok_or_else(|| missing(format!("action {a} -> {b} at {x}")))
        },
        |op, g, args| {
            let key: Vec<String> = args.iter().map(|s| s.to_string()).collect();
            t.ops
                .get(&(op.to_string(), g.clone()))
                .and_then(|m| m.get(&key))
                .cloned()
                .ok_or_else(|| missing(format!("{op} @ {g} at ({})", key.join(", "))))
        },
    )
}
