//! Abstract syntax, concrete grammar, and derived-operator expansion.
//!
//! The core language (the primitives every other module works with) is:
//! proposition letters, nominals, `T`, negation, disjunction, labeled
//! diamonds, announcement `<!f>g`, removal `<-f>g`, and the global
//! existential modality `E`. Everything else (`F`, `&`, `->`, `<->`, boxes,
//! `U`, `D`, `@`) is sugar that [`expand`] rewrites away.
//!
//! Grammar (ASCII), loosest to tightest:
//!
//! ```text
//! formula := iff
//! iff     := imp ('<->' imp)*          right associative
//! imp     := or ('->' or)*             right associative
//! or      := and ('|' and)*            left associative
//! and     := unary ('&' unary)*        left associative
//! unary   := '~' unary | '<' label? '>' unary | '[' label? ']' unary
//!          | '<!' formula '>' unary | '[!' formula ']' unary
//!          | '<-' formula '>' unary | '[-' formula ']' unary
//!          | ('E'|'U'|'D') unary | '@' nominal unary | atom
//! atom    := 'T' | 'F' | ident | nominal | '(' formula ')'
//! nominal := '\'' ident
//! ident   := [a-z][a-z0-9_]*
//! ```
//!
//! Modal prefixes bind like negation. The default relation label is `r` and
//! is elided when printing.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The default relation label used when a diamond or box carries none.
pub const DEFAULT_LABEL: &str = "r";

/// A formula of the full language, sugar included.
///
/// The first block of variants is the core language; [`Formula::is_core`]
/// holds exactly when a formula uses only those. Values are immutable trees
/// and safe to share across threads.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Formula {
    Prop(String),
    Nominal(String),
    Top,
    Neg(Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    /// `<l>f`: some `l`-successor satisfies `f`.
    Diamond(String, Box<Formula>),
    /// `<!f>g`: `f` holds here and `g` holds after restricting to the
    /// `f`-points.
    Announce(Box<Formula>, Box<Formula>),
    /// `<-f>g`: some other point satisfying `f` can be removed so that `g`
    /// holds here in the shrunken model.
    Remove(Box<Formula>, Box<Formula>),
    /// `Ef`: some point satisfies `f`.
    Exists(Box<Formula>),

    // Derived operators, kept as sugar until `expand` is called.
    Bot,
    And(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    /// `[l]f`: every `l`-successor satisfies `f`.
    Box(String, Box<Formula>),
    /// `[!f]g`: if `f` holds here then `g` holds after announcing `f`.
    AnnBox(Box<Formula>, Box<Formula>),
    /// `[-f]g`: after every removal of one other `f`-point, `g` holds here.
    RemBox(Box<Formula>, Box<Formula>),
    /// `Uf`: every point satisfies `f`.
    U(Box<Formula>),
    /// `Df`: some point different from the current one satisfies `f`.
    D(Box<Formula>),
    /// `@'n f`: `f` holds at the denotation of `n`, vacuously true when `n`
    /// does not denote.
    At(String, Box<Formula>),
}

impl Formula {
    pub fn prop(name: impl Into<String>) -> Self {
        Formula::Prop(name.into())
    }
    pub fn nominal(name: impl Into<String>) -> Self {
        Formula::Nominal(name.into())
    }
    pub fn neg(self) -> Self {
        Formula::Neg(self.into())
    }
    pub fn or(self, rhs: Self) -> Self {
        Formula::Or(self.into(), rhs.into())
    }
    pub fn and(self, rhs: Self) -> Self {
        Formula::And(self.into(), rhs.into())
    }
    pub fn implies(self, rhs: Self) -> Self {
        Formula::Implies(self.into(), rhs.into())
    }
    pub fn iff(self, rhs: Self) -> Self {
        Formula::Iff(self.into(), rhs.into())
    }
    pub fn diamond(label: impl Into<String>, f: Self) -> Self {
        Formula::Diamond(label.into(), f.into())
    }
    /// Diamond with the default label.
    pub fn diam(f: Self) -> Self {
        Self::diamond(DEFAULT_LABEL, f)
    }
    pub fn boxed(label: impl Into<String>, f: Self) -> Self {
        Formula::Box(label.into(), f.into())
    }
    /// Box with the default label.
    pub fn boxm(f: Self) -> Self {
        Self::boxed(DEFAULT_LABEL, f)
    }
    pub fn announce(f: Self, g: Self) -> Self {
        Formula::Announce(f.into(), g.into())
    }
    pub fn ann_box(f: Self, g: Self) -> Self {
        Formula::AnnBox(f.into(), g.into())
    }
    pub fn remove(f: Self, g: Self) -> Self {
        Formula::Remove(f.into(), g.into())
    }
    pub fn rem_box(f: Self, g: Self) -> Self {
        Formula::RemBox(f.into(), g.into())
    }
    pub fn exists(f: Self) -> Self {
        Formula::Exists(f.into())
    }
    pub fn universal(f: Self) -> Self {
        Formula::U(f.into())
    }
    pub fn different(f: Self) -> Self {
        Formula::D(f.into())
    }
    pub fn at(nominal: impl Into<String>, f: Self) -> Self {
        Formula::At(nominal.into(), f.into())
    }

    /// True when the formula uses only core constructors.
    pub fn is_core(&self) -> bool {
        use Formula::*;
        match self {
            Prop(_) | Nominal(_) | Top => true,
            Neg(f) | Diamond(_, f) | Exists(f) => f.is_core(),
            Or(f, g) | Announce(f, g) | Remove(f, g) => f.is_core() && g.is_core(),
            _ => false,
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        use Formula::*;
        match self {
            Prop(_) | Nominal(_) | Top | Bot => 1,
            Neg(f) | Diamond(_, f) | Exists(f) | Box(_, f) | U(f) | D(f) | At(_, f) => {
                1 + f.size()
            }
            Or(f, g)
            | And(f, g)
            | Implies(f, g)
            | Iff(f, g)
            | Announce(f, g)
            | AnnBox(f, g)
            | Remove(f, g)
            | RemBox(f, g) => 1 + f.size() + g.size(),
        }
    }

    /// All proposition letters occurring in the formula.
    pub fn props(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |f| {
            if let Formula::Prop(p) = f {
                out.insert(p.clone());
            }
        });
        out
    }

    /// All nominals occurring in the formula, including `@` indices.
    pub fn nominals(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |f| match f {
            Formula::Nominal(n) => {
                out.insert(n.clone());
            }
            Formula::At(n, _) => {
                out.insert(n.clone());
            }
            _ => {}
        });
        out
    }

    /// All relation labels occurring in the formula.
    pub fn labels(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |f| match f {
            Formula::Diamond(l, _) | Formula::Box(l, _) => {
                out.insert(l.clone());
            }
            _ => {}
        });
        out
    }

    pub fn contains_nominal(&self, nominal: &str) -> bool {
        self.nominals().contains(nominal)
    }

    fn walk(&self, visit: &mut impl FnMut(&Formula)) {
        use Formula::*;
        visit(self);
        match self {
            Prop(_) | Nominal(_) | Top | Bot => {}
            Neg(f) | Diamond(_, f) | Exists(f) | Box(_, f) | U(f) | D(f) | At(_, f) => {
                f.walk(visit)
            }
            Or(f, g)
            | And(f, g)
            | Implies(f, g)
            | Iff(f, g)
            | Announce(f, g)
            | AnnBox(f, g)
            | Remove(f, g)
            | RemBox(f, g) => {
                f.walk(visit);
                g.walk(visit);
            }
        }
    }
}

/// Rewrite every derived operator into the core language.
///
/// `U` becomes `~E~`, `@'n f` becomes `U('n -> f)` and then core, `Df`
/// becomes `<-f>T`. `E` stays primitive; see [`eliminate_e`] for the
/// encoding into the removal-only fragment.
pub fn expand(f: &Formula) -> Formula {
    use Formula::*;
    match f {
        Prop(_) | Nominal(_) | Top => f.clone(),
        Neg(g) => expand(g).neg(),
        Or(g, h) => expand(g).or(expand(h)),
        Diamond(l, g) => Formula::diamond(l.clone(), expand(g)),
        Announce(g, h) => Formula::announce(expand(g), expand(h)),
        Remove(g, h) => Formula::remove(expand(g), expand(h)),
        Exists(g) => Formula::exists(expand(g)),
        Bot => Top.neg(),
        And(g, h) => expand(g).neg().or(expand(h).neg()).neg(),
        Implies(g, h) => expand(g).neg().or(expand(h)),
        Iff(g, h) => {
            let (g, h) = (expand(g), expand(h));
            let fwd = g.clone().neg().or(h.clone());
            let bwd = h.neg().or(g);
            fwd.neg().or(bwd.neg()).neg()
        }
        Box(l, g) => Formula::diamond(l.clone(), expand(g).neg()).neg(),
        AnnBox(g, h) => Formula::announce(expand(g), expand(h).neg()).neg(),
        RemBox(g, h) => Formula::remove(expand(g), expand(h).neg()).neg(),
        U(g) => Formula::exists(expand(g).neg()).neg(),
        D(g) => Formula::remove(expand(g), Top),
        At(n, g) => Formula::exists(
            Formula::nominal(n.clone())
                .neg()
                .or(expand(g))
                .neg(),
        )
        .neg(),
    }
}

/// Expand and additionally encode `E` via removal: `Ef` becomes
/// `f | <-f>T`. The result lies in the announcement-free fragment whenever
/// the input does.
pub fn eliminate_e(f: &Formula) -> Formula {
    fn go(f: &Formula) -> Formula {
        use Formula::*;
        match f {
            Prop(_) | Nominal(_) | Top => f.clone(),
            Neg(g) => go(g).neg(),
            Or(g, h) => go(g).or(go(h)),
            Diamond(l, g) => Formula::diamond(l.clone(), go(g)),
            Announce(g, h) => Formula::announce(go(g), go(h)),
            Remove(g, h) => Formula::remove(go(g), go(h)),
            Exists(g) => {
                let g = go(g);
                g.clone().or(Formula::remove(g, Top))
            }
            _ => unreachable!("input is expanded"),
        }
    }
    go(&expand(f))
}

/// The universal modality in its removal form `f & [-~f]F`, expanded to
/// the core language. Semantically equal to `U f`.
pub fn u_via_removal(f: &Formula) -> Formula {
    expand(&f.clone().and(Formula::rem_box(f.clone().neg(), Formula::Bot)))
}

/// `<-T>^k T`: true exactly when at least `k` points differ from the
/// current one.
pub fn counting_formula(k: usize) -> Formula {
    let mut out = Formula::Top;
    for _ in 0..k {
        out = Formula::remove(Formula::Top, out);
    }
    out
}

/// `<-T>T & ~<-T><-T>T`: true exactly when the domain has two points.
pub fn rho2() -> Formula {
    counting_formula(1).and(counting_formula(2).neg())
}

/// A parse failure, with a byte offset into the input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown relation label `{label}` at byte {pos}")]
    UnknownLabel { pos: usize, label: String },
}

/// Parse with the default label set `{r}`.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let labels: BTreeSet<String> = [DEFAULT_LABEL.to_string()].into();
    parse_with_labels(text, &labels)
}

/// Parse against a declared set of relation labels.
pub fn parse_with_labels(text: &str, labels: &BTreeSet<String>) -> Result<Formula, ParseError> {
    let mut p = Parser {
        input: text.as_bytes(),
        pos: 0,
        labels,
        allow_hole: false,
    };
    let f = p.formula()?;
    p.skip_ws();
    if p.pos < p.input.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(f)
}

/// Parse a one-hole context: like [`parse`], but accepts `_` as an atom
/// standing for the hole. Used by the derivation checker.
pub fn parse_context(text: &str, labels: &BTreeSet<String>) -> Result<Formula, ParseError> {
    let mut p = Parser {
        input: text.as_bytes(),
        pos: 0,
        labels,
        allow_hole: true,
    };
    let f = p.formula()?;
    p.skip_ws();
    if p.pos < p.input.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(f)
}

/// The proposition name reserved for context holes by [`parse_context`].
pub const HOLE: &str = "_";

struct Parser<'a> {
    input: &'a [u8],
    pos: usize,
    labels: &'a BTreeSet<String>,
    allow_hole: bool,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> ParseError {
        ParseError::Syntax {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.input.len() && self.input[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.input.get(self.pos).copied()
    }

    fn peek_at(&self, off: usize) -> Option<u8> {
        self.input.get(self.pos + off).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn eat(&mut self, c: u8) -> Result<(), ParseError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected `{}`", c as char)))
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        self.iff()
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let left = self.imp()?;
        self.skip_ws();
        if self.starts_with(b"<->") {
            self.pos += 3;
            let right = self.iff()?;
            Ok(left.iff(right))
        } else {
            Ok(left)
        }
    }

    fn imp(&mut self) -> Result<Formula, ParseError> {
        let left = self.or()?;
        self.skip_ws();
        if self.starts_with(b"->") {
            self.pos += 2;
            let right = self.imp()?;
            Ok(left.implies(right))
        } else {
            Ok(left)
        }
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.and()?;
        loop {
            self.skip_ws();
            if self.peek() == Some(b'|') {
                self.pos += 1;
                let right = self.and()?;
                left = left.or(right);
            } else {
                return Ok(left);
            }
        }
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.unary()?;
        loop {
            self.skip_ws();
            if self.peek() == Some(b'&') {
                self.pos += 1;
                let right = self.unary()?;
                left = left.and(right);
            } else {
                return Ok(left);
            }
        }
    }

    fn starts_with(&self, s: &[u8]) -> bool {
        self.input[self.pos..].starts_with(s)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(b'~') => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some(b'<') => {
                // `<->` never starts a formula; inside unary position `<`
                // opens a diamond, an announcement, or a removal.
                self.pos += 1;
                match self.peek() {
                    Some(b'!') => {
                        self.pos += 1;
                        let f = self.formula()?;
                        self.skip_ws();
                        self.eat(b'>')?;
                        Ok(Formula::announce(f, self.unary()?))
                    }
                    Some(b'-') => {
                        self.pos += 1;
                        let f = self.formula()?;
                        self.skip_ws();
                        self.eat(b'>')?;
                        Ok(Formula::remove(f, self.unary()?))
                    }
                    _ => {
                        let label = self.opt_label()?;
                        self.eat(b'>')?;
                        Ok(Formula::diamond(label, self.unary()?))
                    }
                }
            }
            Some(b'[') => {
                self.pos += 1;
                match self.peek() {
                    Some(b'!') => {
                        self.pos += 1;
                        let f = self.formula()?;
                        self.skip_ws();
                        self.eat(b']')?;
                        Ok(Formula::ann_box(f, self.unary()?))
                    }
                    Some(b'-') => {
                        self.pos += 1;
                        let f = self.formula()?;
                        self.skip_ws();
                        self.eat(b']')?;
                        Ok(Formula::rem_box(f, self.unary()?))
                    }
                    _ => {
                        let label = self.opt_label()?;
                        self.eat(b']')?;
                        Ok(Formula::boxed(label, self.unary()?))
                    }
                }
            }
            Some(b'E') => {
                self.pos += 1;
                Ok(Formula::exists(self.unary()?))
            }
            Some(b'U') => {
                self.pos += 1;
                Ok(Formula::universal(self.unary()?))
            }
            Some(b'D') => {
                self.pos += 1;
                Ok(Formula::different(self.unary()?))
            }
            Some(b'@') => {
                self.pos += 1;
                self.skip_ws();
                self.eat(b'\'')?;
                let n = self.ident()?;
                Ok(Formula::at(n, self.unary()?))
            }
            _ => self.atom(),
        }
    }

    fn opt_label(&mut self) -> Result<String, ParseError> {
        if matches!(self.peek(), Some(c) if c.is_ascii_lowercase()) {
            let start = self.pos;
            let label = self.ident()?;
            if !self.labels.contains(&label) {
                return Err(ParseError::UnknownLabel { pos: start, label });
            }
            Ok(label)
        } else {
            Ok(DEFAULT_LABEL.to_string())
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(b'T') => {
                self.pos += 1;
                Ok(Formula::Top)
            }
            Some(b'F') => {
                self.pos += 1;
                Ok(Formula::Bot)
            }
            Some(b'(') => {
                self.pos += 1;
                let f = self.formula()?;
                self.skip_ws();
                self.eat(b')')?;
                Ok(f)
            }
            Some(b'\'') => {
                self.pos += 1;
                let n = self.ident()?;
                Ok(Formula::nominal(n))
            }
            Some(b'_') if self.allow_hole => {
                self.pos += 1;
                Ok(Formula::prop(HOLE))
            }
            Some(c) if c.is_ascii_lowercase() => {
                let p = self.ident()?;
                Ok(Formula::prop(p))
            }
            _ => Err(self.err("expected a formula")),
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(c) if c.is_ascii_lowercase() => {}
            _ => return Err(self.err("expected an identifier")),
        }
        let start = self.pos;
        self.bump();
        while matches!(self.peek(), Some(c) if c.is_ascii_lowercase() || c.is_ascii_digit() || c == b'_')
        {
            // Stop before `_` when it would swallow a context hole: idents
            // never END at a lone underscore boundary anyway, so plain
            // consumption is fine.
            self.pos += 1;
        }
        let _ = self.peek_at(0);
        Ok(String::from_utf8_lossy(&self.input[start..self.pos]).into_owned())
    }
}

const PREC_ATOM: u8 = 6;
const PREC_UNARY: u8 = 5;
const PREC_AND: u8 = 4;
const PREC_OR: u8 = 3;
const PREC_IMP: u8 = 2;
const PREC_IFF: u8 = 1;

fn prec(f: &Formula) -> u8 {
    use Formula::*;
    match f {
        Prop(_) | Nominal(_) | Top | Bot => PREC_ATOM,
        Neg(_) | Diamond(..) | Box(..) | Announce(..) | AnnBox(..) | Remove(..) | RemBox(..)
        | Exists(_) | U(_) | D(_) | At(..) => PREC_UNARY,
        And(..) => PREC_AND,
        Or(..) => PREC_OR,
        Implies(..) => PREC_IMP,
        Iff(..) => PREC_IFF,
    }
}

fn write_prec(f: &Formula, min: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    use Formula::*;
    let p = prec(f);
    if p < min {
        write!(out, "(")?;
    }
    match f {
        Prop(name) => write!(out, "{name}")?,
        Nominal(name) => write!(out, "'{name}")?,
        Top => write!(out, "T")?,
        Bot => write!(out, "F")?,
        Neg(g) => {
            write!(out, "~")?;
            write_prec(g, PREC_UNARY, out)?;
        }
        Diamond(l, g) => {
            if l == DEFAULT_LABEL {
                write!(out, "<>")?;
            } else {
                write!(out, "<{l}>")?;
            }
            write_prec(g, PREC_UNARY, out)?;
        }
        Box(l, g) => {
            if l == DEFAULT_LABEL {
                write!(out, "[]")?;
            } else {
                write!(out, "[{l}]")?;
            }
            write_prec(g, PREC_UNARY, out)?;
        }
        Announce(g, h) => {
            write!(out, "<!")?;
            write_prec(g, 0, out)?;
            write!(out, ">")?;
            write_prec(h, PREC_UNARY, out)?;
        }
        AnnBox(g, h) => {
            write!(out, "[!")?;
            write_prec(g, 0, out)?;
            write!(out, "]")?;
            write_prec(h, PREC_UNARY, out)?;
        }
        Remove(g, h) => {
            write!(out, "<-")?;
            write_prec(g, 0, out)?;
            write!(out, ">")?;
            write_prec(h, PREC_UNARY, out)?;
        }
        RemBox(g, h) => {
            write!(out, "[-")?;
            write_prec(g, 0, out)?;
            write!(out, "]")?;
            write_prec(h, PREC_UNARY, out)?;
        }
        Exists(g) => {
            write!(out, "E")?;
            write_prec(g, PREC_UNARY, out)?;
        }
        U(g) => {
            write!(out, "U")?;
            write_prec(g, PREC_UNARY, out)?;
        }
        D(g) => {
            write!(out, "D")?;
            write_prec(g, PREC_UNARY, out)?;
        }
        At(n, g) => {
            write!(out, "@'{n} ")?;
            write_prec(g, PREC_UNARY, out)?;
        }
        And(g, h) => {
            write_prec(g, PREC_AND, out)?;
            write!(out, "&")?;
            write_prec(h, PREC_AND + 1, out)?;
        }
        Or(g, h) => {
            write_prec(g, PREC_OR, out)?;
            write!(out, "|")?;
            write_prec(h, PREC_OR + 1, out)?;
        }
        Implies(g, h) => {
            write_prec(g, PREC_IMP + 1, out)?;
            write!(out, "->")?;
            write_prec(h, PREC_IMP, out)?;
        }
        Iff(g, h) => {
            write_prec(g, PREC_IFF + 1, out)?;
            write!(out, "<->")?;
            write_prec(h, PREC_IFF, out)?;
        }
    }
    if p < min {
        write!(out, ")")?;
    }
    Ok(())
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_prec(self, 0, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(name: &str) -> Formula {
        Formula::prop(name)
    }

    #[test]
    fn parses_removal_and_announcement() {
        assert_eq!(
            parse("<-p>q").unwrap(),
            Formula::remove(p("p"), p("q"))
        );
        assert_eq!(
            parse("<!p><>q").unwrap(),
            Formula::announce(p("p"), Formula::diam(p("q")))
        );
    }

    #[test]
    fn parses_loop_conjunct() {
        let f = parse("U(<-T>[]F)").unwrap();
        assert_eq!(
            f,
            Formula::universal(Formula::remove(
                Formula::Top,
                Formula::boxm(Formula::Bot)
            ))
        );
    }

    #[test]
    fn prints_with_minimal_parens() {
        assert_eq!(
            Formula::remove(Formula::Top, Formula::Top).to_string(),
            "<-T>T"
        );
        assert_eq!(p("p").or(p("q")).neg().to_string(), "~(p|q)");
        assert_eq!(p("p").or(p("q")).to_string(), "p|q");
        assert_eq!(p("p").and(p("q")).or(p("x")).to_string(), "p&q|x");
    }

    #[test]
    fn deep_removal_chain_round_trips() {
        let f = Formula::remove(
            p("a"),
            Formula::remove(p("b"), Formula::remove(p("c"), p("d"))),
        );
        let text = f.to_string();
        assert_eq!(parse(&text).unwrap(), f);
        assert_eq!(parse(&text).unwrap().to_string(), text);
    }

    #[test]
    fn iff_is_not_a_removal() {
        assert_eq!(parse("p<->q").unwrap(), p("p").iff(p("q")));
        assert!(parse("<->").is_err());
    }

    #[test]
    fn unknown_label_is_rejected() {
        match parse("<u>p") {
            Err(ParseError::UnknownLabel { label, .. }) => assert_eq!(label, "u"),
            other => panic!("expected unknown label, got {other:?}"),
        }
        let labels: BTreeSet<String> = ["r".to_string(), "u".to_string()].into();
        assert!(parse_with_labels("<u>p", &labels).is_ok());
    }

    #[test]
    fn syntax_error_carries_position() {
        match parse("p|") {
            Err(ParseError::Syntax { pos, .. }) => assert_eq!(pos, 2),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn expansion_hits_core() {
        let f = parse("@'n p").unwrap();
        let e = expand(&f);
        assert!(e.is_core());
        // @'n p  =>  ~E~('n -> p)  =>  ~E~(~'n | p)
        assert_eq!(
            e,
            Formula::exists(Formula::nominal("n").neg().or(p("p")).neg()).neg()
        );
        assert_eq!(expand(&p("p")), p("p"));
        assert_eq!(
            expand(&Formula::different(p("p"))),
            Formula::remove(p("p"), Formula::Top)
        );
    }

    #[test]
    fn counting_formula_shape() {
        assert_eq!(counting_formula(0), Formula::Top);
        assert_eq!(
            counting_formula(2),
            Formula::remove(Formula::Top, Formula::remove(Formula::Top, Formula::Top))
        );
        assert_eq!(rho2().to_string(), "<-T>T&~<-T><-T>T");
    }

    #[test]
    fn nominal_scan_sees_at_indices() {
        let f = parse("@'n T & 'm").unwrap();
        assert!(f.contains_nominal("n"));
        assert!(f.contains_nominal("m"));
        assert!(!f.contains_nominal("k"));
    }

    #[test]
    fn seeded_round_trip_on_random_formulas() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xf0e1);
        for _ in 0..1000 {
            let f = crate::gen::random_sugared_formula(&mut rng, 6);
            let text = f.to_string();
            let back = parse(&text).unwrap_or_else(|e| panic!("reparse `{text}`: {e}"));
            assert_eq!(back, f, "round trip failed on `{text}`");
        }
    }
}
