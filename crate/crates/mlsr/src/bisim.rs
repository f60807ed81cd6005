//! Bisimilarity under stepwise removal, decided by greatest-fixpoint
//! refinement over deletion-indexed world pairs, with distinguishing-formula
//! synthesis on failure.
//!
//! A candidate tuple pairs a deletion set and surviving point on each side,
//! with both deletion sets of equal size. Refinement removes tuples that
//! violate atomic harmony on proposition letters (nominals are not part of
//! the comparison), the modal back-and-forth clauses inside the current
//! submodels, or the removal clauses linking one deletion level to the next.
//! The pointed models are bisimilar exactly when the root tuple (empty
//! deletions, the two distinguished points) survives.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::formula::{expand, Formula};
use crate::kripke::PointedModel;

/// Default bound on the size of each model; the tuple space grows
/// exponentially in it.
pub const DEFAULT_WORLD_CAP: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BisimError {
    #[error("model has no worlds")]
    EmptyModel,
    #[error("model has {size} worlds, over the cap of {cap}")]
    TooLarge { size: usize, cap: usize },
    #[error("point `{0}` is not a world of its model")]
    PointNotInModel(String),
}

/// Are the two pointed models bisimilar under stepwise removal?
/// Symmetric in its arguments.
pub fn sr_bisimilar(pm: &PointedModel, pn: &PointedModel) -> Result<bool, BisimError> {
    sr_bisimilar_capped(pm, pn, DEFAULT_WORLD_CAP)
}

/// As [`sr_bisimilar`] with an explicit world cap per model.
pub fn sr_bisimilar_capped(
    pm: &PointedModel,
    pn: &PointedModel,
    cap: usize,
) -> Result<bool, BisimError> {
    let mut engine = Engine::new(pm, pn, cap, false)?;
    engine.run();
    Ok(engine.root_alive())
}

/// A core-language formula true at `pm` and false at `pn`, or `None` when
/// the models are bisimilar. Callers should verify the output with the
/// checker rather than trust it.
pub fn distinguishing_formula(
    pm: &PointedModel,
    pn: &PointedModel,
) -> Result<Option<Formula>, BisimError> {
    let mut engine = Engine::new(pm, pn, DEFAULT_WORLD_CAP, true)?;
    engine.run();
    if engine.root_alive() {
        return Ok(None);
    }
    let mut memo = HashMap::new();
    let f = engine.distinguisher(engine.root(), &mut memo);
    Ok(Some(expand(&f)))
}

type Mask = u32;

/// Why a tuple was removed from the candidate relation.
#[derive(Debug, Clone)]
enum Reason {
    /// A proposition letter separates the two points.
    Atom { prop: String, holds_left: bool },
    /// A successor on the left with no matching successor on the right.
    ModalForth { label: String, s_next: usize },
    /// A successor on the right with no matching successor on the left.
    ModalBack { label: String, t_next: usize },
    /// A removable point on the left with no matching removal on the right.
    RemoveForth { u: usize },
    /// A removable point on the right with no matching removal on the left.
    RemoveBack { v: usize },
}

struct Side {
    n: usize,
    point: usize,
    adj: BTreeMap<String, Vec<Mask>>,
    props: BTreeMap<String, Mask>,
}

impl Side {
    fn build(pm: &PointedModel, cap: usize) -> Result<Side, BisimError> {
        let m = &pm.model;
        let n = m.worlds.len();
        if n == 0 {
            return Err(BisimError::EmptyModel);
        }
        if n > cap {
            return Err(BisimError::TooLarge { size: n, cap });
        }
        let index: BTreeMap<&str, usize> = m
            .worlds
            .iter()
            .enumerate()
            .map(|(i, w)| (w.as_str(), i))
            .collect();
        let point = *index
            .get(pm.point.as_str())
            .ok_or_else(|| BisimError::PointNotInModel(pm.point.clone()))?;
        let mut adj = BTreeMap::new();
        for (label, pairs) in &m.relations {
            let mut rows = vec![0 as Mask; n];
            for (a, b) in pairs {
                rows[index[a.as_str()]] |= 1 << index[b.as_str()];
            }
            adj.insert(label.clone(), rows);
        }
        let mut props = BTreeMap::new();
        for (prop, ws) in &m.valuation {
            let mut mask = 0 as Mask;
            for w in ws {
                mask |= 1 << index[w.as_str()];
            }
            props.insert(prop.clone(), mask);
        }
        Ok(Side { n, point, adj, props })
    }

    fn succ(&self, label: &str, s: usize) -> Mask {
        self.adj.get(label).map(|rows| rows[s]).unwrap_or(0)
    }

    fn full(&self) -> Mask {
        (1 << self.n) - 1
    }
}

const ALIVE: u32 = u32::MAX;

struct Engine {
    left: Side,
    right: Side,
    labels: BTreeSet<String>,
    props: BTreeSet<String>,
    /// Kill stamp per tuple; `ALIVE` marks survivors of the fixpoint.
    stamps: Vec<u32>,
    reasons: HashMap<usize, Reason>,
    record: bool,
    clock: u32,
}

fn bits(mut mask: Mask) -> impl Iterator<Item = usize> {
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

impl Engine {
    fn new(
        pm: &PointedModel,
        pn: &PointedModel,
        cap: usize,
        record: bool,
    ) -> Result<Engine, BisimError> {
        let left = Side::build(pm, cap)?;
        let right = Side::build(pn, cap)?;
        let labels: BTreeSet<String> = left
            .adj
            .keys()
            .chain(right.adj.keys())
            .cloned()
            .collect();
        let props: BTreeSet<String> = left
            .props
            .keys()
            .chain(right.props.keys())
            .cloned()
            .collect();
        let size = (1usize << left.n) * left.n * (1usize << right.n) * right.n;
        let mut engine = Engine {
            left,
            right,
            labels,
            props,
            stamps: vec![0; size],
            reasons: HashMap::new(),
            record,
            clock: 0,
        };
        engine.init();
        Ok(engine)
    }

    fn index(&self, dm: Mask, s: usize, en: Mask, t: usize) -> usize {
        ((dm as usize * self.left.n + s) * (1 << self.right.n) + en as usize) * self.right.n + t
    }

    fn root(&self) -> usize {
        self.index(0, self.left.point, 0, self.right.point)
    }

    fn root_alive(&self) -> bool {
        self.stamps[self.root()] == ALIVE
    }

    fn decode(&self, idx: usize) -> (Mask, usize, Mask, usize) {
        let t = idx % self.right.n;
        let rest = idx / self.right.n;
        let en = (rest % (1 << self.right.n)) as Mask;
        let rest = rest / (1 << self.right.n);
        let s = rest % self.left.n;
        let dm = (rest / self.left.n) as Mask;
        (dm, s, en, t)
    }

    fn init(&mut self) {
        self.clock = 1;
        for idx in 0..self.stamps.len() {
            let (dm, s, en, t) = self.decode(idx);
            let valid = dm >> s & 1 == 0
                && en >> t & 1 == 0
                && dm.count_ones() == en.count_ones()
                && dm & !self.left.full() == 0
                && en & !self.right.full() == 0;
            if !valid {
                self.stamps[idx] = 0;
                continue;
            }
            let mut mismatch = None;
            for prop in &self.props {
                let holds_left =
                    self.left.props.get(prop).map_or(false, |m| m >> s & 1 == 1);
                let holds_right =
                    self.right.props.get(prop).map_or(false, |m| m >> t & 1 == 1);
                if holds_left != holds_right {
                    mismatch = Some(Reason::Atom {
                        prop: prop.clone(),
                        holds_left,
                    });
                    break;
                }
            }
            match mismatch {
                Some(reason) => {
                    self.stamps[idx] = self.clock;
                    if self.record {
                        self.reasons.insert(idx, reason);
                    }
                    self.clock += 1;
                }
                None => self.stamps[idx] = ALIVE,
            }
        }
    }

    fn alive(&self, dm: Mask, s: usize, en: Mask, t: usize) -> bool {
        self.stamps[self.index(dm, s, en, t)] == ALIVE
    }

    fn run(&mut self) {
        loop {
            let mut killed_any = false;
            for idx in 0..self.stamps.len() {
                if self.stamps[idx] != ALIVE {
                    continue;
                }
                let (dm, s, en, t) = self.decode(idx);
                if let Some(reason) = self.violated(dm, s, en, t) {
                    self.stamps[idx] = self.clock;
                    self.clock += 1;
                    if self.record {
                        self.reasons.insert(idx, reason);
                    }
                    killed_any = true;
                }
            }
            if !killed_any {
                return;
            }
        }
    }

    fn violated(&self, dm: Mask, s: usize, en: Mask, t: usize) -> Option<Reason> {
        let live_left = self.left.full() & !dm;
        let live_right = self.right.full() & !en;
        for label in &self.labels {
            let s_succ = self.left.succ(label, s) & live_left;
            let t_succ = self.right.succ(label, t) & live_right;
            for s_next in bits(s_succ) {
                if !bits(t_succ).any(|t_next| self.alive(dm, s_next, en, t_next)) {
                    return Some(Reason::ModalForth {
                        label: label.clone(),
                        s_next,
                    });
                }
            }
            for t_next in bits(t_succ) {
                if !bits(s_succ).any(|s_next| self.alive(dm, s_next, en, t_next)) {
                    return Some(Reason::ModalBack {
                        label: label.clone(),
                        t_next,
                    });
                }
            }
        }
        // Removal clauses link level |dm| to level |dm| + 1.
        for u in bits(live_left) {
            if u == s {
                continue;
            }
            let ok = bits(live_right).any(|v| {
                v != t
                    && self.alive(dm, u, en, v)
                    && self.alive(dm | 1 << u, s, en | 1 << v, t)
            });
            if !ok {
                return Some(Reason::RemoveForth { u });
            }
        }
        for v in bits(live_right) {
            if v == t {
                continue;
            }
            let ok = bits(live_left).any(|u| {
                u != s
                    && self.alive(dm, u, en, v)
                    && self.alive(dm | 1 << u, s, en | 1 << v, t)
            });
            if !ok {
                return Some(Reason::RemoveBack { v });
            }
        }
        None
    }

    /// A formula true at the left side of the (dead) tuple and false at its
    /// right side. Built by recursion over kill order.
    fn distinguisher(&self, idx: usize, memo: &mut HashMap<usize, Formula>) -> Formula {
        if let Some(f) = memo.get(&idx) {
            return f.clone();
        }
        let stamp = self.stamps[idx];
        debug_assert_ne!(stamp, ALIVE, "distinguisher of a surviving tuple");
        let (dm, s, en, t) = self.decode(idx);
        let live_left = self.left.full() & !dm;
        let live_right = self.right.full() & !en;
        let reason = self
            .reasons
            .get(&idx)
            .expect("killed tuples carry reasons when recording");
        let formula = match reason {
            Reason::Atom { prop, holds_left } => {
                let p = Formula::prop(prop.clone());
                if *holds_left {
                    p
                } else {
                    p.neg()
                }
            }
            Reason::ModalForth { label, s_next } => {
                let t_succ = self.right.succ(label, t) & live_right;
                let conjuncts: Vec<Formula> = bits(t_succ)
                    .map(|t_next| {
                        let child = self.index(dm, *s_next, en, t_next);
                        debug_assert!(self.stamps[child] < stamp);
                        self.distinguisher(child, memo)
                    })
                    .collect();
                Formula::diamond(label.clone(), conjunction(conjuncts))
            }
            Reason::ModalBack { label, t_next } => {
                let s_succ = self.left.succ(label, s) & live_left;
                let conjuncts: Vec<Formula> = bits(s_succ)
                    .map(|s_next| {
                        let child = self.index(dm, s_next, en, *t_next);
                        debug_assert!(self.stamps[child] < stamp);
                        self.distinguisher(child, memo).neg()
                    })
                    .collect();
                Formula::diamond(label.clone(), conjunction(conjuncts)).neg()
            }
            Reason::RemoveForth { u } => {
                let mut witness = Vec::new();
                let mut residual = Vec::new();
                for v in bits(live_right) {
                    if v == t {
                        continue;
                    }
                    let pair = self.index(dm, *u, en, v);
                    if self.stamps[pair] < stamp {
                        witness.push(self.distinguisher(pair, memo));
                    } else {
                        let rest = self.index(dm | 1 << u, s, en | 1 << v, t);
                        debug_assert!(self.stamps[rest] < stamp);
                        residual.push(self.distinguisher(rest, memo));
                    }
                }
                Formula::remove(conjunction(witness), conjunction(residual))
            }
            Reason::RemoveBack { v } => {
                let mut witness = Vec::new();
                let mut residual = Vec::new();
                for u in bits(live_left) {
                    if u == s {
                        continue;
                    }
                    let pair = self.index(dm, u, en, *v);
                    if self.stamps[pair] < stamp {
                        witness.push(self.distinguisher(pair, memo).neg());
                    } else {
                        let rest = self.index(dm | 1 << u, s, en | 1 << v, t);
                        debug_assert!(self.stamps[rest] < stamp);
                        residual.push(self.distinguisher(rest, memo).neg());
                    }
                }
                Formula::remove(conjunction(witness), conjunction(residual)).neg()
            }
        };
        memo.insert(idx, formula.clone());
        formula
    }
}

fn conjunction(mut parts: Vec<Formula>) -> Formula {
    if parts.is_empty() {
        return Formula::Top;
    }
    let first = parts.remove(0);
    parts.into_iter().fold(first, |acc, p| acc.and(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::check;
    use crate::kripke::{
        generate_random, two_isolated_reflexive, two_point_universal, Model, PointedModel,
    };
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pointed(m: Model, w: &str) -> PointedModel {
        PointedModel::new(m, w).unwrap()
    }

    #[test]
    fn reflexive_pair_and_universal_pair_are_bisimilar() {
        let pm = pointed(two_isolated_reflexive(), "a");
        let pn = pointed(two_point_universal(), "a");
        assert!(sr_bisimilar(&pm, &pn).unwrap());
        assert_eq!(distinguishing_formula(&pm, &pn).unwrap(), None);
    }

    #[test]
    fn every_pointed_model_is_bisimilar_to_itself() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..30 {
            let m = generate_random(4, &["p"], 0.5, rng.gen());
            let pm = pointed(m, "w0");
            assert!(sr_bisimilar(&pm, &pm).unwrap());
        }
    }

    #[test]
    fn reflexive_point_differs_from_irreflexive_point() {
        let refl = pointed(
            Model::new(["a"], [("r", "a", "a")], Vec::<(String, String)>::new()),
            "a",
        );
        let irref = pointed(
            Model::new(["a"], Vec::<(String, String, String)>::new(), Vec::<(String, String)>::new()),
            "a",
        );
        assert!(!sr_bisimilar(&refl, &irref).unwrap());
        let f = distinguishing_formula(&refl, &irref).unwrap().unwrap();
        assert!(check(&refl.model, "a", &f).unwrap());
        assert!(!check(&irref.model, "a", &f).unwrap());
    }

    #[test]
    fn counting_separates_edgeless_models_of_different_size() {
        let two = pointed(
            Model::new(["a", "b"], Vec::<(String, String, String)>::new(), Vec::<(String, String)>::new()),
            "a",
        );
        let three = pointed(
            Model::new(["a", "b", "c"], Vec::<(String, String, String)>::new(), Vec::<(String, String)>::new()),
            "a",
        );
        assert!(!sr_bisimilar(&two, &three).unwrap());
        let f = distinguishing_formula(&two, &three).unwrap().unwrap();
        assert!(f.is_core());
        assert!(check(&two.model, "a", &f).unwrap());
        assert!(!check(&three.model, "a", &f).unwrap());
    }

    #[test]
    fn bisimilarity_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..60 {
            let m = generate_random(3, &["p"], 0.5, rng.gen());
            let n = generate_random(3, &["p"], 0.5, rng.gen());
            let pm = pointed(m, "w0");
            let pn = pointed(n, "w1");
            assert_eq!(
                sr_bisimilar(&pm, &pn).unwrap(),
                sr_bisimilar(&pn, &pm).unwrap()
            );
        }
    }

    #[test]
    fn synthesized_separators_verify_on_both_sides() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut separated = 0;
        for _ in 0..80 {
            let m = generate_random(rng.gen_range(1..=3), &["p"], 0.5, rng.gen());
            let n = generate_random(rng.gen_range(1..=3), &["p"], 0.5, rng.gen());
            let pm = pointed(m, "w0");
            let pn = pointed(n, "w0");
            match distinguishing_formula(&pm, &pn).unwrap() {
                Some(f) => {
                    separated += 1;
                    assert!(
                        check(&pm.model, &pm.point, &f).unwrap(),
                        "separator {f} is false on its left model"
                    );
                    assert!(
                        !check(&pn.model, &pn.point, &f).unwrap(),
                        "separator {f} is true on its right model"
                    );
                }
                None => assert!(sr_bisimilar(&pm, &pn).unwrap()),
            }
        }
        assert!(separated > 10, "sample produced too few separations");
    }

    #[test]
    fn bisimilar_pairs_agree_on_random_formulas() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let pm = pointed(two_isolated_reflexive(), "a");
        let pn = pointed(two_point_universal(), "b");
        assert!(sr_bisimilar(&pm, &pn).unwrap());
        for _ in 0..200 {
            let f = crate::gen::random_core_formula(&mut rng, 3);
            assert_eq!(
                check(&pm.model, &pm.point, &f).unwrap(),
                check(&pn.model, &pn.point, &f).unwrap(),
                "bisimilar pair disagrees on {f}"
            );
        }
    }

    #[test]
    fn oversized_models_are_rejected() {
        let m = generate_random(9, &[], 0.2, 1);
        let pm = pointed(m, "w0");
        assert!(matches!(
            sr_bisimilar(&pm, &pm),
            Err(BisimError::TooLarge { size: 9, cap: 8 })
        ));
        let small = pointed(generate_random(3, &[], 0.2, 1), "w0");
        assert!(sr_bisimilar_capped(&small, &small, 3).is_ok());
    }
}
