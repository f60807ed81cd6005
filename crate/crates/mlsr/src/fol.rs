//! First-order target language, the meaning-preserving translation, and an
//! independent first-order evaluator used as the semantic oracle.
//!
//! The translation `translate` maps a modal formula to a first-order formula
//! with one free variable `v0`. Deleted points are tracked as a growing set
//! of variables whose values every later quantifier must avoid; announcements
//! accumulate a domain guard that is re-instantiated (with fresh bound
//! variables) inside every quantifier introduced later.

use std::collections::BTreeMap;
use std::fmt;
use std::rc::Rc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{expand, Formula};
use crate::kripke::{Model, World};

pub type Var = String;

/// First-order formulas over unary predicates, labeled binary relations and
/// equality. Universal quantification is expressed as `~exists~`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FolFormula {
    Pred(String, Var),
    Rel(String, Var, Var),
    Eq(Var, Var),
    Neg(Box<FolFormula>),
    Or(Box<FolFormula>, Box<FolFormula>),
    And(Box<FolFormula>, Box<FolFormula>),
    Exists(Var, Box<FolFormula>),
}

impl FolFormula {
    pub fn neg(self) -> Self {
        FolFormula::Neg(self.into())
    }
    pub fn or(self, rhs: Self) -> Self {
        FolFormula::Or(self.into(), rhs.into())
    }
    pub fn and(self, rhs: Self) -> Self {
        FolFormula::And(self.into(), rhs.into())
    }
    pub fn exists(v: impl Into<Var>, body: Self) -> Self {
        FolFormula::Exists(v.into(), body.into())
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        use FolFormula::*;
        match self {
            Pred(..) | Rel(..) | Eq(..) => 1,
            Neg(f) => 1 + f.size(),
            Or(f, g) | And(f, g) => 1 + f.size() + g.size(),
            Exists(_, f) => 1 + f.size(),
        }
    }

    /// All variables bound by a quantifier, in syntactic order.
    pub fn bound_vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        fn walk(f: &FolFormula, out: &mut Vec<Var>) {
            use FolFormula::*;
            match f {
                Pred(..) | Rel(..) | Eq(..) => {}
                Neg(g) => walk(g, out),
                Or(g, h) | And(g, h) => {
                    walk(g, out);
                    walk(h, out);
                }
                Exists(v, g) => {
                    out.push(v.clone());
                    walk(g, out);
                }
            }
        }
        walk(self, &mut out);
        out
    }
}

/// Predicate name for a proposition letter.
pub fn prop_pred(p: &str) -> String {
    format!("P_{p}")
}

/// Predicate name for a nominal. Its extension has at most one element by
/// the model invariant, so no extra axioms are needed.
pub fn nominal_pred(n: &str) -> String {
    format!("N_{n}")
}

/// The free variable of a translated formula.
pub const FREE_VAR: &str = "v0";

/// One announcement level: the announced formula together with the deletion
/// context and outer guard in force when it was made.
struct Guard {
    alpha: Formula,
    deleted: Vec<Var>,
    parent: Option<Rc<Guard>>,
}

/// Meaning-preserving translation into first-order logic with one free
/// variable [`FREE_VAR`]. Every quantifier binds a fresh variable, so no
/// variable is bound twice in the output.
pub fn translate(f: &Formula) -> FolFormula {
    let mut ctr = 0usize;
    tr(&expand(f), &FREE_VAR.to_string(), &[], None, &mut ctr)
}

fn fresh(ctr: &mut usize) -> Var {
    *ctr += 1;
    format!("v{ctr}")
}

fn and_all(mut parts: Vec<FolFormula>) -> FolFormula {
    let first = parts.remove(0);
    parts.into_iter().fold(first, |acc, p| acc.and(p))
}

/// Conjuncts saying `z` avoids every already-deleted point and lies inside
/// every announced extent.
fn domain_conditions(
    z: &Var,
    deleted: &[Var],
    guard: &Option<Rc<Guard>>,
    ctr: &mut usize,
) -> Vec<FolFormula> {
    let mut parts: Vec<FolFormula> = deleted
        .iter()
        .map(|x| FolFormula::Eq(z.clone(), x.clone()).neg())
        .collect();
    if let Some(g) = guard {
        parts.push(instantiate_guard(g, z, ctr));
    }
    parts
}

fn instantiate_guard(g: &Guard, z: &Var, ctr: &mut usize) -> FolFormula {
    let at_announce = tr(&g.alpha, z, &g.deleted, g.parent.clone(), ctr);
    match &g.parent {
        Some(p) => instantiate_guard(p, z, ctr).and(at_announce),
        None => at_announce,
    }
}

fn tr(
    f: &Formula,
    y: &Var,
    deleted: &[Var],
    guard: Option<Rc<Guard>>,
    ctr: &mut usize,
) -> FolFormula {
    use Formula::*;
    match f {
        Prop(p) => FolFormula::Pred(prop_pred(p), y.clone()),
        Nominal(n) => FolFormula::Pred(nominal_pred(n), y.clone()),
        Top => FolFormula::Eq(y.clone(), y.clone()),
        Neg(g) => tr(g, y, deleted, guard, ctr).neg(),
        Or(g, h) => {
            let a = tr(g, y, deleted, guard.clone(), ctr);
            let b = tr(h, y, deleted, guard, ctr);
            a.or(b)
        }
        Diamond(l, g) => {
            let z = fresh(ctr);
            let mut parts = vec![FolFormula::Rel(l.clone(), y.clone(), z.clone())];
            parts.extend(domain_conditions(&z, deleted, &guard, ctr));
            parts.push(tr(g, &z, deleted, guard, ctr));
            FolFormula::exists(z, and_all(parts))
        }
        Remove(g, h) => {
            let z = fresh(ctr);
            let mut parts = vec![FolFormula::Eq(z.clone(), y.clone()).neg()];
            parts.extend(domain_conditions(&z, deleted, &guard, ctr));
            parts.push(tr(g, &z, deleted, guard.clone(), ctr));
            let mut inner_deleted = deleted.to_vec();
            inner_deleted.push(z.clone());
            parts.push(tr(h, y, &inner_deleted, guard, ctr));
            FolFormula::exists(z, and_all(parts))
        }
        Exists(g) => {
            let z = fresh(ctr);
            let mut parts = domain_conditions(&z, deleted, &guard, ctr);
            parts.push(tr(g, &z, deleted, guard, ctr));
            FolFormula::exists(z, and_all(parts))
        }
        Announce(g, h) => {
            let here = tr(g, y, deleted, guard.clone(), ctr);
            let inner_guard = Rc::new(Guard {
                alpha: (**g).clone(),
                deleted: deleted.to_vec(),
                parent: guard,
            });
            here.and(tr(h, y, deleted, Some(inner_guard), ctr))
        }
        _ => unreachable!("translation input is expanded"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FolError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(Var),
    #[error("assignment maps `{var}` to unknown world `{world}`")]
    UnknownWorld { var: Var, world: World },
}

/// Classical Tarskian satisfaction over the finite domain of `m`.
///
/// Predicates named `P_x` read the valuation of `x`; predicates named `N_x`
/// read the denotation of nominal `x` (an extension of size at most one).
/// Unknown predicates and relations have empty extensions.
pub fn fol_eval(
    m: &Model,
    assignment: &BTreeMap<Var, World>,
    f: &FolFormula,
) -> Result<bool, FolError> {
    for (var, world) in assignment {
        if !m.has_world(world) {
            return Err(FolError::UnknownWorld {
                var: var.clone(),
                world: world.clone(),
            });
        }
    }
    let mut env = assignment.clone();
    eval(m, &mut env, f)
}

fn eval(m: &Model, env: &mut BTreeMap<Var, World>, f: &FolFormula) -> Result<bool, FolError> {
    use FolFormula::*;
    Ok(match f {
        Pred(name, v) => {
            let w = lookup(env, v)?;
            if let Some(p) = name.strip_prefix("P_") {
                m.extension(p).contains(&w)
            } else if let Some(nom) = name.strip_prefix("N_") {
                m.denotation(nom) == Some(&w)
            } else {
                m.extension(name).contains(&w)
            }
        }
        Rel(label, a, b) => {
            let wa = lookup(env, a)?;
            let wb = lookup(env, b)?;
            m.edge(label, &wa, &wb)
        }
        Eq(a, b) => lookup(env, a)? == lookup(env, b)?,
        Neg(g) => !eval(m, env, g)?,
        Or(g, h) => eval(m, env, g)? || eval(m, env, h)?,
        And(g, h) => eval(m, env, g)? && eval(m, env, h)?,
        Exists(v, g) => {
            let saved = env.get(v).cloned();
            let mut found = false;
            for w in m.worlds.clone() {
                env.insert(v.clone(), w);
                if eval(m, env, g)? {
                    found = true;
                    break;
                }
            }
            match saved {
                Some(w) => {
                    env.insert(v.clone(), w);
                }
                None => {
                    env.remove(v);
                }
            }
            found
        }
    })
}

fn lookup(env: &BTreeMap<Var, World>, v: &Var) -> Result<World, FolError> {
    env.get(v)
        .cloned()
        .ok_or_else(|| FolError::UnboundVariable(v.clone()))
}

/// Does the modal checker agree with first-order evaluation of the
/// translation at `(m, s)`?
pub fn translation_equivalent(m: &Model, s: &str, f: &Formula) -> Result<bool, FolError> {
    let modal = crate::checker::check(m, s, f).expect("point is in model");
    let mut assignment = BTreeMap::new();
    assignment.insert(FREE_VAR.to_string(), s.to_string());
    let first_order = fol_eval(m, &assignment, &translate(f))?;
    Ok(modal == first_order)
}

impl fmt::Display for FolFormula {
    /// Prefix text form: `(exists v1 (and (rel r v0 v1) (pred P_p v1)))`.
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        use FolFormula::*;
        match self {
            Pred(p, v) => write!(out, "(pred {p} {v})"),
            Rel(l, a, b) => write!(out, "(rel {l} {a} {b})"),
            Eq(a, b) => write!(out, "(eq {a} {b})"),
            Neg(f) => write!(out, "(not {f})"),
            Or(f, g) => write!(out, "(or {f} {g})"),
            And(f, g) => write!(out, "(and {f} {g})"),
            Exists(v, f) => write!(out, "(exists {v} {f})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("first-order syntax error: {0}")]
pub struct FolParseError(String);

/// Parse the prefix text form printed by `Display`.
pub fn parse_fol(text: &str) -> Result<FolFormula, FolParseError> {
    let tokens = tokenize(text)?;
    let mut pos = 0;
    let f = parse_expr(&tokens, &mut pos)?;
    if pos != tokens.len() {
        return Err(FolParseError("trailing input".to_string()));
    }
    Ok(f)
}

fn tokenize(text: &str) -> Result<Vec<String>, FolParseError> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        match c {
            '(' | ')' => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                out.push(c.to_string());
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c if c.is_ascii_alphanumeric() || c == '_' => cur.push(c),
            other => return Err(FolParseError(format!("unexpected character `{other}`"))),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    Ok(out)
}

fn parse_expr(tokens: &[String], pos: &mut usize) -> Result<FolFormula, FolParseError> {
    let expect = |pos: &mut usize, what: &str| -> Result<String, FolParseError> {
        let t = tokens
            .get(*pos)
            .ok_or_else(|| FolParseError(format!("expected {what}, found end of input")))?;
        *pos += 1;
        Ok(t.clone())
    };
    let open = expect(pos, "`(`")?;
    if open != "(" {
        return Err(FolParseError(format!("expected `(`, found `{open}`")));
    }
    let head = expect(pos, "an operator")?;
    let f = match head.as_str() {
        "pred" => {
            let p = expect(pos, "a predicate")?;
            let v = expect(pos, "a variable")?;
            FolFormula::Pred(p, v)
        }
        "rel" => {
            let l = expect(pos, "a label")?;
            let a = expect(pos, "a variable")?;
            let b = expect(pos, "a variable")?;
            FolFormula::Rel(l, a, b)
        }
        "eq" => {
            let a = expect(pos, "a variable")?;
            let b = expect(pos, "a variable")?;
            FolFormula::Eq(a, b)
        }
        "not" => parse_expr(tokens, pos)?.neg(),
        "or" => {
            let a = parse_expr(tokens, pos)?;
            let b = parse_expr(tokens, pos)?;
            a.or(b)
        }
        "and" => {
            let a = parse_expr(tokens, pos)?;
            let b = parse_expr(tokens, pos)?;
            a.and(b)
        }
        "exists" => {
            let v = expect(pos, "a variable")?;
            let body = parse_expr(tokens, pos)?;
            FolFormula::exists(v, body)
        }
        other => return Err(FolParseError(format!("unknown operator `{other}`"))),
    };
    let close = expect(pos, "`)`")?;
    if close != ")" {
        return Err(FolParseError(format!("expected `)`, found `{close}`")));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::kripke::{
        generate_random, two_isolated_reflexive, two_point_loop, two_point_universal,
        with_nominals,
    };
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn atomic_translation() {
        assert_eq!(
            translate(&parse("p").unwrap()),
            FolFormula::Pred("P_p".into(), "v0".into())
        );
    }

    #[test]
    fn diamond_translation_shape() {
        // X is empty, so no inequality conjuncts appear.
        let got = translate(&parse("<>p").unwrap());
        let want = FolFormula::exists(
            "v1",
            FolFormula::Rel("r".into(), "v0".into(), "v1".into())
                .and(FolFormula::Pred("P_p".into(), "v1".into())),
        );
        assert_eq!(got, want);
    }

    #[test]
    fn removal_translation_shape() {
        let got = translate(&parse("<-p>q").unwrap());
        let want = FolFormula::exists(
            "v1",
            FolFormula::Eq("v1".into(), "v0".into())
                .neg()
                .and(FolFormula::Pred("P_p".into(), "v1".into()))
                .and(FolFormula::Pred("P_q".into(), "v0".into())),
        );
        assert_eq!(got, want);
    }

    #[test]
    fn connectedness_separates_the_two_models() {
        // forall y (Rxy | Ryx), with the universal encoded as ~exists~.
        let f = FolFormula::exists(
            "y",
            FolFormula::Rel("r".into(), "x".into(), "y".into())
                .or(FolFormula::Rel("r".into(), "y".into(), "x".into()))
                .neg(),
        )
        .neg();
        let mut assignment = BTreeMap::new();
        assignment.insert("x".to_string(), "a".to_string());
        assert!(!fol_eval(&two_isolated_reflexive(), &assignment, &f).unwrap());
        assert!(fol_eval(&two_point_universal(), &assignment, &f).unwrap());
    }

    #[test]
    fn equality_is_reflexive() {
        let f = FolFormula::Eq("x".into(), "x".into());
        let mut assignment = BTreeMap::new();
        assignment.insert("x".to_string(), "a".to_string());
        assert!(fol_eval(&two_point_loop(), &assignment, &f).unwrap());
    }

    #[test]
    fn unbound_variable_errors() {
        let f = FolFormula::Pred("P_p".into(), "x".into());
        let err = fol_eval(&two_point_loop(), &BTreeMap::new(), &f).unwrap_err();
        assert_eq!(err, FolError::UnboundVariable("x".to_string()));
    }

    #[test]
    fn equivalence_on_named_examples() {
        let loop2 = two_point_loop();
        assert!(translation_equivalent(&loop2, "a", &parse("<-T>[]F").unwrap()).unwrap());
        let single = generate_random(1, &[], 0.0, 1);
        assert!(translation_equivalent(&single, "w0", &parse("<-T>T").unwrap()).unwrap());
        let loop_p = with_nominals(
            {
                let mut m = two_point_loop();
                m.valuation.insert("p".into(), ["a".to_string()].into());
                m
            },
            &[],
        );
        assert!(translation_equivalent(&loop_p, "a", &parse("<!p><>p").unwrap()).unwrap());
    }

    #[test]
    fn equivalence_on_random_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(4242);
        for _ in 0..300 {
            let m = with_nominals(
                generate_random(rng.gen_range(1..=5), &["p", "q", "x"], 0.4, rng.gen()),
                &[("n", Some("w0")), ("m", None)],
            );
            let f = crate::gen::random_full_formula(&mut rng, 4);
            let s = m.worlds.iter().next().unwrap();
            assert!(
                translation_equivalent(&m, s, &f).unwrap(),
                "translation disagrees on {f}"
            );
        }
    }

    #[test]
    fn no_variable_is_bound_twice() {
        let mut rng = ChaCha8Rng::seed_from_u64(4243);
        for _ in 0..300 {
            let f = crate::gen::random_full_formula(&mut rng, 4);
            let t = translate(&f);
            let bound = t.bound_vars();
            let mut uniq = std::collections::BTreeSet::new();
            for v in &bound {
                assert!(uniq.insert(v.clone()), "variable {v} bound twice in {t}");
            }
        }
    }

    #[test]
    fn deletion_fragment_translation_is_quadratically_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(4244);
        for _ in 0..500 {
            let f = crate::gen::random_core_formula_over(&mut rng, 5, &["p", "q"]);
            let t = translate(&f);
            let n = f.size();
            assert!(
                t.size() <= 3 * n * n,
                "|translation| = {} exceeds 3*{n}^2 for {f}",
                t.size()
            );
        }
    }

    #[test]
    fn prefix_form_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(4245);
        for _ in 0..100 {
            let f = translate(&crate::gen::random_full_formula(&mut rng, 3));
            let text = f.to_string();
            assert_eq!(parse_fol(&text).unwrap(), f, "round trip failed on {text}");
        }
    }
}
