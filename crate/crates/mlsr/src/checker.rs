//! The semantic evaluator: truth of a formula at a point of a finite model,
//! validity on a model, and bounded countermodel search.
//!
//! Evaluation is plain recursion over an indexed view of the model. Deletion
//! and announcement both shrink the domain of a fixed base model, so
//! submodels are represented as live-world bitmasks and never materialized.
//! An optional cache keyed by (live set, point, subformula) is available for
//! removal-heavy formulas such as the game formulas of the QBF reduction.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::Formula;
use crate::kripke::{Model, PointedModel, World};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("point `{0}` is not a world of the model")]
    PointNotInModel(World),
    #[error("operation requires a nonempty model")]
    EmptyModel,
    #[error("models larger than 128 worlds are not supported")]
    TooLarge,
}

/// Result of a traced evaluation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub value: bool,
    pub trace: Option<TraceNode>,
}

/// One node per evaluated (subformula, submodel, point) triple. The
/// `model` field identifies the submodel by its sorted live world list.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceNode {
    pub formula: String,
    pub model: String,
    pub point: String,
    pub value: bool,
    pub children: Vec<TraceNode>,
}

/// Indexed view of a model, built once per top-level call.
struct Indexed<'m> {
    names: Vec<&'m str>,
    /// label -> per-world successor mask
    adj: BTreeMap<&'m str, Vec<u128>>,
    /// proposition -> extension mask
    val: BTreeMap<&'m str, u128>,
    /// nominal -> denoting world index
    noms: BTreeMap<&'m str, Option<usize>>,
}

impl<'m> Indexed<'m> {
    fn build(m: &'m Model) -> Result<Self, CheckError> {
        let n = m.worlds.len();
        if n > 128 {
            return Err(CheckError::TooLarge);
        }
        let names: Vec<&str> = m.worlds.iter().map(|w| w.as_str()).collect();
        let index: BTreeMap<&str, usize> =
            names.iter().enumerate().map(|(i, w)| (*w, i)).collect();
        let mut adj = BTreeMap::new();
        for (label, pairs) in &m.relations {
            let mut rows = vec![0u128; n];
            for (a, b) in pairs {
                rows[index[a.as_str()]] |= 1 << index[b.as_str()];
            }
            adj.insert(label.as_str(), rows);
        }
        let mut val = BTreeMap::new();
        for (prop, ws) in &m.valuation {
            let mut mask = 0u128;
            for w in ws {
                mask |= 1 << index[w.as_str()];
            }
            val.insert(prop.as_str(), mask);
        }
        let mut noms = BTreeMap::new();
        for (nom, d) in &m.nominals {
            noms.insert(nom.as_str(), d.as_ref().map(|w| index[w.as_str()]));
        }
        Ok(Indexed { names, adj, val, noms })
    }

    fn full(&self) -> u128 {
        if self.names.len() == 128 {
            u128::MAX
        } else {
            (1u128 << self.names.len()) - 1
        }
    }

    fn successors(&self, label: &str, s: usize, live: u128) -> u128 {
        self.adj.get(label).map(|rows| rows[s] & live).unwrap_or(0)
    }
}

fn bits(mut mask: u128) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let t = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(t)
        }
    })
}

/// Identify subformulas by address so cache keys stay small.
fn formula_ids(f: &Formula) -> HashMap<*const Formula, u32> {
    fn walk(f: &Formula, out: &mut HashMap<*const Formula, u32>) {
        use Formula::*;
        let id = out.len() as u32;
        out.insert(f as *const Formula, id);
        match f {
            Prop(_) | Nominal(_) | Top | Bot => {}
            Neg(g) | Diamond(_, g) | Exists(g) | Box(_, g) | U(g) | D(g) | At(_, g) => {
                walk(g, out)
            }
            Or(g, h)
            | And(g, h)
            | Implies(g, h)
            | Iff(g, h)
            | Announce(g, h)
            | AnnBox(g, h)
            | Remove(g, h)
            | RemBox(g, h) => {
                walk(g, out);
                walk(h, out);
            }
        }
    }
    let mut out = HashMap::new();
    walk(f, &mut out);
    out
}

struct Evaluator<'m> {
    ix: Indexed<'m>,
    cache: Option<Cache>,
}

struct Cache {
    ids: HashMap<*const Formula, u32>,
    memo: HashMap<(u128, u32, u32), bool>,
}

impl<'m> Evaluator<'m> {
    fn eval(&mut self, live: u128, s: usize, f: &Formula) -> bool {
        if let Some(cache) = &self.cache {
            let id = cache.ids[&(f as *const Formula)];
            if let Some(v) = cache.memo.get(&(live, s as u32, id)) {
                return *v;
            }
        }
        let v = self.eval_raw(live, s, f);
        if let Some(cache) = &mut self.cache {
            let id = cache.ids[&(f as *const Formula)];
            cache.memo.insert((live, s as u32, id), v);
        }
        v
    }

    fn eval_raw(&mut self, live: u128, s: usize, f: &Formula) -> bool {
        use Formula::*;
        match f {
            Prop(p) => self.ix.val.get(p.as_str()).map_or(false, |m| m >> s & 1 == 1),
            Nominal(n) => self.ix.noms.get(n.as_str()) == Some(&Some(s)),
            Top => true,
            Bot => false,
            Neg(g) => !self.eval(live, s, g),
            Or(g, h) => self.eval(live, s, g) || self.eval(live, s, h),
            And(g, h) => self.eval(live, s, g) && self.eval(live, s, h),
            Implies(g, h) => !self.eval(live, s, g) || self.eval(live, s, h),
            Iff(g, h) => self.eval(live, s, g) == self.eval(live, s, h),
            Diamond(l, g) => bits(self.ix.successors(l, s, live)).any(|t| self.eval(live, t, g)),
            Box(l, g) => bits(self.ix.successors(l, s, live)).all(|t| self.eval(live, t, g)),
            Announce(g, h) => {
                // The extent is computed in full before recursing: the
                // restriction is simultaneous.
                self.eval(live, s, g) && {
                    let extent = self.extent(live, g);
                    self.eval(extent, s, h)
                }
            }
            AnnBox(g, h) => {
                !self.eval(live, s, g) || {
                    let extent = self.extent(live, g);
                    self.eval(extent, s, h)
                }
            }
            Remove(g, h) => bits(live & !(1 << s))
                .any(|t| self.eval(live, t, g) && self.eval(live & !(1u128 << t), s, h)),
            RemBox(g, h) => bits(live & !(1 << s))
                .all(|t| !self.eval(live, t, g) || self.eval(live & !(1u128 << t), s, h)),
            Exists(g) => bits(live).any(|t| self.eval(live, t, g)),
            U(g) => bits(live).all(|t| self.eval(live, t, g)),
            D(g) => bits(live & !(1 << s)).any(|t| self.eval(live, t, g)),
            At(n, g) => match self.ix.noms.get(n.as_str()) {
                Some(&Some(t)) if live >> t & 1 == 1 => self.eval(live, t, g),
                _ => true,
            },
        }
    }

    fn extent(&mut self, live: u128, g: &Formula) -> u128 {
        let mut extent = 0u128;
        for t in bits(live) {
            if self.eval(live, t, g) {
                extent |= 1 << t;
            }
        }
        extent
    }
}

fn point_index(m: &Model, s: &str) -> Result<usize, CheckError> {
    m.worlds
        .iter()
        .position(|w| w == s)
        .ok_or_else(|| CheckError::PointNotInModel(s.to_string()))
}

/// Truth of `f` at point `s` of `m`.
pub fn check(m: &Model, s: &str, f: &Formula) -> Result<bool, CheckError> {
    let s = point_index(m, s)?;
    let ix = Indexed::build(m)?;
    let full = ix.full();
    let mut ev = Evaluator { ix, cache: None };
    Ok(ev.eval(full, s, f))
}

/// As [`check`], memoizing on (live set, point, subformula). Worth it for
/// formulas with deeply nested removals over one base model.
pub fn check_cached(m: &Model, s: &str, f: &Formula) -> Result<bool, CheckError> {
    let s = point_index(m, s)?;
    let ix = Indexed::build(m)?;
    let full = ix.full();
    let mut ev = Evaluator {
        ix,
        cache: Some(Cache {
            ids: formula_ids(f),
            memo: HashMap::new(),
        }),
    };
    Ok(ev.eval(full, s, f))
}

/// True iff `f` holds at every point of `m`.
pub fn valid_on(m: &Model, f: &Formula) -> Result<bool, CheckError> {
    if m.worlds.is_empty() {
        return Err(CheckError::EmptyModel);
    }
    let ix = Indexed::build(m)?;
    let full = ix.full();
    let mut ev = Evaluator { ix, cache: None };
    Ok((0..m.worlds.len()).all(|s| ev.eval(full, s, f)))
}

/// Evaluate and record the full evaluation tree.
pub fn check_traced(m: &Model, s: &str, f: &Formula) -> Result<CheckResult, CheckError> {
    let s = point_index(m, s)?;
    let ix = Indexed::build(m)?;
    let full = ix.full();
    let mut ev = Evaluator { ix, cache: None };
    let node = trace_eval(&mut ev, full, s, f);
    Ok(CheckResult {
        value: node.value,
        trace: Some(node),
    })
}

fn trace_eval(ev: &mut Evaluator<'_>, live: u128, s: usize, f: &Formula) -> TraceNode {
    use Formula::*;
    let mut children = Vec::new();
    let value = match f {
        Prop(_) | Nominal(_) | Top | Bot => ev.eval(live, s, f),
        Neg(g) => !push(&mut children, trace_eval(ev, live, s, g)),
        Or(g, h) => {
            let a = push(&mut children, trace_eval(ev, live, s, g));
            a || push(&mut children, trace_eval(ev, live, s, h))
        }
        And(g, h) => {
            let a = push(&mut children, trace_eval(ev, live, s, g));
            a && push(&mut children, trace_eval(ev, live, s, h))
        }
        Implies(g, h) => {
            let a = push(&mut children, trace_eval(ev, live, s, g));
            !a || push(&mut children, trace_eval(ev, live, s, h))
        }
        Iff(g, h) => {
            let a = push(&mut children, trace_eval(ev, live, s, g));
            let b = push(&mut children, trace_eval(ev, live, s, h));
            a == b
        }
        Diamond(l, g) => bits(ev.ix.successors(l, s, live))
            .any(|t| push(&mut children, trace_eval(ev, live, t, g))),
        Box(l, g) => bits(ev.ix.successors(l, s, live))
            .all(|t| push(&mut children, trace_eval(ev, live, t, g))),
        Announce(g, h) | AnnBox(g, h) => {
            let here = push(&mut children, trace_eval(ev, live, s, g));
            let is_box = matches!(f, AnnBox(..));
            if here {
                let mut extent = 0u128;
                for t in bits(live) {
                    if t == s {
                        extent |= 1 << t;
                        continue;
                    }
                    if push(&mut children, trace_eval(ev, live, t, g)) {
                        extent |= 1 << t;
                    }
                }
                push(&mut children, trace_eval(ev, extent, s, h))
            } else {
                is_box
            }
        }
        Remove(g, h) => bits(live & !(1 << s)).any(|t| {
            push(&mut children, trace_eval(ev, live, t, g))
                && push(&mut children, trace_eval(ev, live & !(1u128 << t), s, h))
        }),
        RemBox(g, h) => bits(live & !(1 << s)).all(|t| {
            !push(&mut children, trace_eval(ev, live, t, g))
                || push(&mut children, trace_eval(ev, live & !(1u128 << t), s, h))
        }),
        Exists(g) => bits(live).any(|t| push(&mut children, trace_eval(ev, live, t, g))),
        U(g) => bits(live).all(|t| push(&mut children, trace_eval(ev, live, t, g))),
        D(g) => bits(live & !(1 << s)).any(|t| push(&mut children, trace_eval(ev, live, t, g))),
        At(n, g) => match ev.ix.noms.get(n.as_str()) {
            Some(&Some(t)) if live >> t & 1 == 1 => {
                push(&mut children, trace_eval(ev, live, t, g))
            }
            _ => true,
        },
    };
    TraceNode {
        formula: f.to_string(),
        model: bits(live)
            .map(|i| ev.ix.names[i])
            .collect::<Vec<_>>()
            .join(","),
        point: ev.ix.names[s].to_string(),
        value,
        children,
    }
}

fn push(children: &mut Vec<TraceNode>, node: TraceNode) -> bool {
    let v = node.value;
    children.push(node);
    v
}

/// Compact encoding of a model on `n` canonical worlds: relation bits for
/// each label, then valuation bits for each proposition.
#[derive(Clone, Copy)]
struct Code(u64);

struct Space {
    n: usize,
    props: Vec<String>,
    labels: Vec<String>,
}

impl Space {
    fn rel_bits(&self) -> usize {
        self.labels.len() * self.n * self.n
    }
    fn total_bits(&self) -> usize {
        self.rel_bits() + self.props.len() * self.n
    }

    fn decode(&self, code: Code) -> Model {
        let n = self.n;
        let names: Vec<World> = (0..n).map(|i| format!("w{i}")).collect();
        let mut m = Model::empty();
        m.worlds = names.iter().cloned().collect();
        for (li, label) in self.labels.iter().enumerate() {
            let mut pairs = BTreeSet::new();
            for a in 0..n {
                for b in 0..n {
                    if code.0 >> (li * n * n + a * n + b) & 1 == 1 {
                        pairs.insert((names[a].clone(), names[b].clone()));
                    }
                }
            }
            m.relations.insert(label.clone(), pairs);
        }
        for (pi, prop) in self.props.iter().enumerate() {
            let mut ws = BTreeSet::new();
            for a in 0..n {
                if code.0 >> (self.rel_bits() + pi * n + a) & 1 == 1 {
                    ws.insert(names[a].clone());
                }
            }
            m.valuation.insert(prop.clone(), ws);
        }
        m
    }

    /// Apply a world permutation to an encoded model.
    fn permute(&self, code: u64, perm: &[usize]) -> u64 {
        let n = self.n;
        let mut out = 0u64;
        for li in 0..self.labels.len() {
            for a in 0..n {
                for b in 0..n {
                    if code >> (li * n * n + a * n + b) & 1 == 1 {
                        out |= 1 << (li * n * n + perm[a] * n + perm[b]);
                    }
                }
            }
        }
        let base = self.rel_bits();
        for pi in 0..self.props.len() {
            for a in 0..n {
                if code >> (base + pi * n + a) & 1 == 1 {
                    out |= 1 << (base + pi * n + perm[a]);
                }
            }
        }
        out
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    permute_rec(&mut items, 0, &mut out);
    out
}

fn permute_rec(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == items.len() {
        out.push(items.clone());
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute_rec(items, k + 1, out);
        items.swap(k, i);
    }
}

type RepKey = (usize, Vec<String>, Vec<String>);

fn rep_cache() -> &'static Mutex<HashMap<RepKey, Arc<Vec<u64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<RepKey, Arc<Vec<u64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Codes of one representative per isomorphism class of models on exactly
/// `n` worlds. Cached per (n, props, labels) signature.
fn canonical_codes(n: usize, props: &[String], labels: &[String]) -> Arc<Vec<u64>> {
    let key = (n, props.to_vec(), labels.to_vec());
    if let Some(found) = rep_cache().lock().unwrap().get(&key) {
        return Arc::clone(found);
    }
    let space = Space {
        n,
        props: props.to_vec(),
        labels: labels.to_vec(),
    };
    let total = space.total_bits();
    assert!(total <= 34, "canonical enumeration space too large");
    let perms = permutations(n);
    let codes: Vec<u64> = (0u64..1 << total)
        .into_par_iter()
        .filter(|&code| perms.iter().all(|p| space.permute(code, p) >= code))
        .collect();
    let arc = Arc::new(codes);
    rep_cache().lock().unwrap().insert(key, Arc::clone(&arc));
    arc
}

/// One representative per isomorphism class, sizes `1..=max_worlds`.
pub fn enumerate_canonical_models(
    max_worlds: usize,
    props: &[&str],
    labels: &[&str],
) -> Vec<Model> {
    let props: Vec<String> = props.iter().map(|s| s.to_string()).collect();
    let labels: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
    let mut out = Vec::new();
    for n in 1..=max_worlds {
        let space = Space {
            n,
            props: props.clone(),
            labels: labels.clone(),
        };
        for &code in canonical_codes(n, &props, &labels).iter() {
            out.push(space.decode(Code(code)));
        }
    }
    out
}

/// Search every pointed model with at most `max_worlds` worlds (up to
/// isomorphism, which truth cannot see) for one falsifying `f`. Nominals
/// occurring in `f` range over all denotation options, including not
/// denoting. `None` means no countermodel within the bound; that does not
/// certify validity.
pub fn find_countermodel(
    f: &Formula,
    max_worlds: usize,
    labels: &[&str],
    props: &[&str],
) -> Option<PointedModel> {
    assert!(max_worlds >= 1);
    let props: Vec<String> = props.iter().map(|s| s.to_string()).collect();
    let labels: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
    let nominals: Vec<String> = f.nominals().into_iter().collect();
    for n in 1..=max_worlds {
        let space = Space {
            n,
            props: props.clone(),
            labels: labels.clone(),
        };
        let codes = canonical_codes(n, &props, &labels);
        let found = codes.par_iter().find_map_first(|&code| {
            let base = space.decode(Code(code));
            for noms in nominal_assignments(&nominals, n) {
                let mut m = base.clone();
                for (nom, d) in &noms {
                    m.nominals
                        .insert(nom.clone(), d.map(|i| format!("w{i}")));
                }
                for s in 0..n {
                    let w = format!("w{s}");
                    if !check(&m, &w, f).expect("point is in model") {
                        return Some(PointedModel { model: m, point: w });
                    }
                }
            }
            None
        });
        if found.is_some() {
            return found;
        }
    }
    None
}

/// All ways to let each nominal denote one of `n` worlds or nothing.
fn nominal_assignments(
    nominals: &[String],
    n: usize,
) -> impl Iterator<Item = Vec<(String, Option<usize>)>> + '_ {
    let k = nominals.len();
    let options = n + 1;
    let total = (options as u64).pow(k as u32);
    (0..total).map(move |mut idx| {
        let mut out = Vec::with_capacity(k);
        for nom in nominals {
            let choice = (idx % options as u64) as usize;
            idx /= options as u64;
            out.push((
                nom.clone(),
                if choice == n { None } else { Some(choice) },
            ));
        }
        out
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{self, parse, Formula};
    use crate::kripke::{
        generate_random, two_isolated_reflexive, two_point_loop, with_nominals,
    };
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn removal_on_the_loop() {
        let m = two_point_loop();
        let f = parse("<-T>[]F").unwrap();
        assert!(check(&m, "a", &f).unwrap());
        assert!(check(&m, "b", &f).unwrap());
    }

    #[test]
    fn point_must_exist() {
        let m = two_point_loop();
        assert_eq!(
            check(&m, "zz", &Formula::Top).unwrap_err(),
            CheckError::PointNotInModel("zz".to_string())
        );
    }

    #[test]
    fn announcing_truth_changes_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let m = generate_random(4, &["p", "q"], 0.5, rng.gen());
            let f = crate::gen::random_full_formula(&mut rng, 3);
            let announced = Formula::announce(Formula::Top, f.clone());
            for w in &m.worlds {
                assert_eq!(
                    check(&m, w, &announced).unwrap(),
                    check(&m, w, &f).unwrap()
                );
            }
        }
    }

    #[test]
    fn non_denoting_nominal_is_false_everywhere() {
        let m = with_nominals(two_point_loop(), &[("n", Some("b"))]);
        let en = parse("E'n").unwrap();
        assert!(check(&m, "a", &en).unwrap());
        let d: BTreeSet<World> = ["b".to_string()].into();
        let m2 = m.delete(&d).unwrap();
        assert!(!check(&m2, "a", &en).unwrap());
        assert!(!check(&m2, "a", &Formula::nominal("n")).unwrap());
    }

    #[test]
    fn validity_examples_on_the_loop() {
        let m = two_point_loop();
        for text in [
            "<-x>(p|q) <-> <-x>p | <-x>q",
            "E p <-> p | <-p>T",
            "<!p>q -> p",
        ] {
            let f = parse(text).unwrap();
            assert!(valid_on(&m, &f).unwrap(), "{text} should hold on the loop");
        }
    }

    #[test]
    fn tautology_has_no_countermodel() {
        let f = parse("p|~p").unwrap();
        assert!(find_countermodel(&f, 3, &["r"], &["p"]).is_none());
    }

    #[test]
    fn removal_of_top_fails_on_singletons() {
        let f = parse("<-T>T").unwrap();
        let cm = find_countermodel(&f, 3, &["r"], &[]).unwrap();
        assert_eq!(cm.model.worlds.len(), 1);
        assert!(!check(&cm.model, &cm.point, &f).unwrap());
    }

    #[test]
    fn expansion_preserves_semantics() {
        let mut rng = ChaCha8Rng::seed_from_u64(500);
        for _ in 0..500 {
            let m = with_nominals(
                generate_random(5, &["p", "q", "x"], 0.4, rng.gen()),
                &[("n", Some("w0")), ("m", None)],
            );
            let f = crate::gen::random_sugared_formula(&mut rng, 4);
            let e = formula::expand(&f);
            for w in &m.worlds {
                assert_eq!(
                    check(&m, w, &f).unwrap(),
                    check(&m, w, &e).unwrap(),
                    "expand changed the meaning of {f} at {w}"
                );
            }
        }
    }

    #[test]
    fn e_elimination_and_u_removal_form_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(501);
        for _ in 0..200 {
            let m = generate_random(4, &["p", "q"], 0.5, rng.gen());
            let f = crate::gen::random_core_formula_over(&mut rng, 3, &["p", "q"]);
            let ef = Formula::exists(f.clone());
            let without_e = formula::eliminate_e(&ef);
            let uf = Formula::universal(f.clone());
            let u_rem = formula::u_via_removal(&f);
            for w in &m.worlds {
                assert_eq!(check(&m, w, &ef).unwrap(), check(&m, w, &without_e).unwrap());
                assert_eq!(check(&m, w, &uf).unwrap(), check(&m, w, &u_rem).unwrap());
            }
        }
    }

    #[test]
    fn counting_tracks_domain_size_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for n in 1..=5 {
            for _ in 0..20 {
                let m = generate_random(n, &["p"], rng.gen::<f64>(), rng.gen());
                for k in 0..=6 {
                    let f = formula::counting_formula(k);
                    for w in &m.worlds {
                        assert_eq!(check(&m, w, &f).unwrap(), n - 1 >= k);
                    }
                }
            }
        }
    }

    #[test]
    fn domain_size_two_formula() {
        let two = two_point_loop();
        let one = generate_random(1, &[], 0.0, 0);
        let three = generate_random(3, &[], 0.0, 0);
        let f = formula::rho2();
        assert!(valid_on(&two, &f).unwrap());
        assert!(!check(&one, "w0", &f).unwrap());
        assert!(!check(&three, "w0", &f).unwrap());
    }

    #[test]
    fn cached_agrees_with_plain() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..100 {
            let m = generate_random(4, &["p"], 0.5, rng.gen());
            let f = crate::gen::random_core_formula(&mut rng, 4);
            for w in &m.worlds {
                assert_eq!(check(&m, w, &f).unwrap(), check_cached(&m, w, &f).unwrap());
            }
        }
    }

    #[test]
    fn trace_records_submodels() {
        let m = two_point_loop();
        let f = parse("<-T>[]F").unwrap();
        let res = check_traced(&m, "a", &f).unwrap();
        assert!(res.value);
        let root = res.trace.unwrap();
        assert_eq!(root.model, "a,b");
        assert_eq!(root.point, "a");
        // The removal witness evaluates the body in the shrunken model.
        assert!(root
            .children
            .iter()
            .any(|c| c.model == "a" && c.formula == "[]F"));
    }

    #[test]
    fn canonical_enumeration_is_smaller_but_complete() {
        // 2 worlds, no props: 16 labeled models, 10 up to isomorphism.
        let reps: Vec<Model> = enumerate_canonical_models(2, &[], &["r"])
            .into_iter()
            .filter(|m| m.worlds.len() == 2)
            .collect();
        assert_eq!(reps.len(), 10);
        let _ = two_isolated_reflexive();
    }
}
