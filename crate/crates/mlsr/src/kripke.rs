//! Finite Kripke models: labeled relations, valuations, partial nominal
//! denotations. Deletion and relativization produce fresh values; models are
//! immutable once built.
//!
//! The JSON form is canonical: all collections are ordered maps and sets, so
//! serialization is deterministic and `save . load` is the identity on
//! canonical output.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::DEFAULT_LABEL;

pub type World = String;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown world `{0}`")]
    UnknownWorld(World),
    #[error("relation `{label}` mentions unknown world `{world}`")]
    DanglingEdge { label: String, world: World },
    #[error("valuation of `{prop}` mentions unknown world `{world}`")]
    DanglingValuation { prop: String, world: World },
    #[error("nominal `{nominal}` denotes unknown world `{world}`")]
    DanglingNominal { nominal: String, world: World },
    #[error("point `{0}` is not a world of the model")]
    PointNotInModel(World),
    #[error("operation requires a nonempty model")]
    EmptyModel,
}

/// A finite relational model with valuation and partial nominal denotation.
///
/// Every world in a relation pair or valuation entry must be a world of the
/// model; each nominal denotes at most one world or none at all.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Model {
    pub worlds: BTreeSet<World>,
    #[serde(default)]
    pub relations: BTreeMap<String, BTreeSet<(World, World)>>,
    #[serde(default)]
    pub valuation: BTreeMap<String, BTreeSet<World>>,
    #[serde(default)]
    pub nominals: BTreeMap<String, Option<World>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<World>,
}

impl Model {
    /// An empty model. Legal as a value; pointed operations reject it.
    pub fn empty() -> Self {
        Model {
            worlds: BTreeSet::new(),
            relations: BTreeMap::new(),
            valuation: BTreeMap::new(),
            nominals: BTreeMap::new(),
            point: None,
        }
    }

    /// Build a model from parts, without a distinguished point.
    pub fn new(
        worlds: impl IntoIterator<Item = impl Into<World>>,
        edges: impl IntoIterator<Item = (impl Into<String>, impl Into<World>, impl Into<World>)>,
        valuation: impl IntoIterator<Item = (impl Into<String>, impl Into<World>)>,
    ) -> Self {
        let mut m = Model::empty();
        for w in worlds {
            m.worlds.insert(w.into());
        }
        for (l, a, b) in edges {
            m.relations
                .entry(l.into())
                .or_default()
                .insert((a.into(), b.into()));
        }
        for (p, w) in valuation {
            m.valuation.entry(p.into()).or_default().insert(w.into());
        }
        m
    }

    /// Check the internal invariants, returning the first violation.
    pub fn validate(&self) -> Result<(), ModelError> {
        for (label, pairs) in &self.relations {
            for (a, b) in pairs {
                for w in [a, b] {
                    if !self.worlds.contains(w) {
                        return Err(ModelError::DanglingEdge {
                            label: label.clone(),
                            world: w.clone(),
                        });
                    }
                }
            }
        }
        for (prop, ws) in &self.valuation {
            for w in ws {
                if !self.worlds.contains(w) {
                    return Err(ModelError::DanglingValuation {
                        prop: prop.clone(),
                        world: w.clone(),
                    });
                }
            }
        }
        for (nominal, d) in &self.nominals {
            if let Some(w) = d {
                if !self.worlds.contains(w) {
                    return Err(ModelError::DanglingNominal {
                        nominal: nominal.clone(),
                        world: w.clone(),
                    });
                }
            }
        }
        if let Some(p) = &self.point {
            if !self.worlds.contains(p) {
                return Err(ModelError::PointNotInModel(p.clone()));
            }
        }
        Ok(())
    }

    pub fn has_world(&self, w: &str) -> bool {
        self.worlds.contains(w)
    }

    /// The worlds where `prop` is true.
    pub fn extension(&self, prop: &str) -> BTreeSet<World> {
        self.valuation.get(prop).cloned().unwrap_or_default()
    }

    /// The denotation of a nominal, if any.
    pub fn denotation(&self, nominal: &str) -> Option<&World> {
        self.nominals.get(nominal).and_then(|d| d.as_ref())
    }

    pub fn edge(&self, label: &str, a: &str, b: &str) -> bool {
        self.relations
            .get(label)
            .map(|pairs| pairs.contains(&(a.to_string(), b.to_string())))
            .unwrap_or(false)
    }

    /// Remove the worlds in `d`. Relations and valuations are restricted; a
    /// nominal denoting a deleted world becomes non-denoting; a deleted
    /// distinguished point is dropped.
    pub fn delete(&self, d: &BTreeSet<World>) -> Result<Model, ModelError> {
        if let Some(w) = d.iter().find(|w| !self.worlds.contains(*w)) {
            return Err(ModelError::UnknownWorld(w.clone()));
        }
        let keep: BTreeSet<World> = self.worlds.difference(d).cloned().collect();
        Ok(self.restrict(&keep))
    }

    /// Keep exactly the worlds in `keep`; identical to deleting the rest.
    pub fn relativize(&self, keep: &BTreeSet<World>) -> Result<Model, ModelError> {
        if let Some(w) = keep.iter().find(|w| !self.worlds.contains(*w)) {
            return Err(ModelError::UnknownWorld(w.clone()));
        }
        Ok(self.restrict(keep))
    }

    fn restrict(&self, keep: &BTreeSet<World>) -> Model {
        let relations = self
            .relations
            .iter()
            .map(|(l, pairs)| {
                let kept = pairs
                    .iter()
                    .filter(|(a, b)| keep.contains(a) && keep.contains(b))
                    .cloned()
                    .collect();
                (l.clone(), kept)
            })
            .collect();
        let valuation = self
            .valuation
            .iter()
            .map(|(p, ws)| (p.clone(), ws.intersection(keep).cloned().collect()))
            .collect();
        let nominals = self
            .nominals
            .iter()
            .map(|(n, d)| {
                let d = d.clone().filter(|w| keep.contains(w));
                (n.clone(), d)
            })
            .collect();
        let point = self.point.clone().filter(|p| keep.contains(p));
        Model {
            worlds: keep.clone(),
            relations,
            valuation,
            nominals,
            point,
        }
    }

    /// Canonical JSON text (pretty, deterministic field and element order).
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Model, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// A model with a distinguished evaluation point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointedModel {
    pub model: Model,
    pub point: World,
}

impl PointedModel {
    pub fn new(model: Model, point: impl Into<World>) -> Result<Self, ModelError> {
        let point = point.into();
        if !model.has_world(&point) {
            return Err(ModelError::PointNotInModel(point));
        }
        Ok(PointedModel { model, point })
    }
}

/// Deterministic pseudo-random model on worlds `w0..w{n-1}` with the default
/// relation label. Each directed pair (self-loops included) is an edge with
/// probability `edge_density`; each proposition holds at each world with
/// probability one half. The same seed always yields the same model.
pub fn generate_random(worlds: usize, props: &[&str], edge_density: f64, seed: u64) -> Model {
    generate_random_labeled(worlds, props, &[DEFAULT_LABEL], edge_density, seed)
}

/// As [`generate_random`], over several relation labels.
pub fn generate_random_labeled(
    worlds: usize,
    props: &[&str],
    labels: &[&str],
    edge_density: f64,
    seed: u64,
) -> Model {
    assert!(worlds >= 1, "generate_random requires at least one world");
    assert!(
        (0.0..=1.0).contains(&edge_density),
        "edge density must lie in [0, 1]"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<World> = (0..worlds).map(|i| format!("w{i}")).collect();
    let mut m = Model::empty();
    m.worlds = names.iter().cloned().collect();
    for label in labels {
        let mut pairs = BTreeSet::new();
        for a in &names {
            for b in &names {
                if rng.gen_bool(edge_density) {
                    pairs.insert((a.clone(), b.clone()));
                }
            }
        }
        m.relations.insert(label.to_string(), pairs);
    }
    for prop in props {
        let mut ws = BTreeSet::new();
        for w in &names {
            if rng.gen_bool(0.5) {
                ws.insert(w.clone());
            }
        }
        m.valuation.insert(prop.to_string(), ws);
    }
    m
}

/// Assign denotations to nominals on top of an existing model.
/// `None` makes the nominal non-denoting.
pub fn with_nominals(mut m: Model, assignment: &[(&str, Option<&str>)]) -> Model {
    for (n, d) in assignment {
        m.nominals
            .insert(n.to_string(), d.map(str::to_string));
    }
    m
}

/// Enumerate every labeled model on canonical world names `w0..w{n-1}` for
/// every `n` from 1 up to `max_worlds`: all relation patterns for each label
/// crossed with all valuations for each proposition. No quotient by
/// isomorphism is taken. The count grows doubly exponentially; bounds above
/// 4 are impractical.
pub fn enumerate_models(
    max_worlds: usize,
    props: &[&str],
    labels: &[&str],
) -> impl Iterator<Item = Model> {
    let props: Vec<String> = props.iter().map(|s| s.to_string()).collect();
    let labels: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
    (1..=max_worlds).flat_map(move |n| SizeEnumeration::new(n, props.clone(), labels.clone()))
}

struct SizeEnumeration {
    n: usize,
    props: Vec<String>,
    labels: Vec<String>,
    names: Vec<World>,
    rel_bits: u64,
    rel_max: u64,
    val_bits: u64,
    val_max: u64,
    done: bool,
}

impl SizeEnumeration {
    fn new(n: usize, props: Vec<String>, labels: Vec<String>) -> Self {
        let rel_positions = labels.len() * n * n;
        let val_positions = props.len() * n;
        assert!(
            rel_positions <= 40 && val_positions <= 20,
            "enumeration space too large"
        );
        SizeEnumeration {
            n,
            names: (0..n).map(|i| format!("w{i}")).collect(),
            props,
            labels,
            rel_bits: 0,
            rel_max: 1u64 << rel_positions,
            val_bits: 0,
            val_max: 1u64 << val_positions,
            done: false,
        }
    }

    fn build(&self) -> Model {
        let mut m = Model::empty();
        m.worlds = self.names.iter().cloned().collect();
        let n = self.n;
        for (li, label) in self.labels.iter().enumerate() {
            let mut pairs = BTreeSet::new();
            for a in 0..n {
                for b in 0..n {
                    let bit = li * n * n + a * n + b;
                    if self.rel_bits >> bit & 1 == 1 {
                        pairs.insert((self.names[a].clone(), self.names[b].clone()));
                    }
                }
            }
            m.relations.insert(label.clone(), pairs);
        }
        for (pi, prop) in self.props.iter().enumerate() {
            let mut ws = BTreeSet::new();
            for a in 0..n {
                if self.val_bits >> (pi * n + a) & 1 == 1 {
                    ws.insert(self.names[a].clone());
                }
            }
            m.valuation.insert(prop.clone(), ws);
        }
        m
    }
}

impl Iterator for SizeEnumeration {
    type Item = Model;

    fn next(&mut self) -> Option<Model> {
        if self.done {
            return None;
        }
        let m = self.build();
        self.val_bits += 1;
        if self.val_bits == self.val_max {
            self.val_bits = 0;
            self.rel_bits += 1;
            if self.rel_bits == self.rel_max {
                self.done = true;
            }
        }
        Some(m)
    }
}

/// Two-point irreflexive loop `a <-> b` with no propositions. The running
/// example model of the test suite.
pub fn two_point_loop() -> Model {
    Model::new(
        ["a", "b"],
        [(DEFAULT_LABEL, "a", "b"), (DEFAULT_LABEL, "b", "a")],
        Vec::<(String, String)>::new(),
    )
}

/// Two isolated reflexive points.
pub fn two_isolated_reflexive() -> Model {
    Model::new(
        ["a", "b"],
        [(DEFAULT_LABEL, "a", "a"), (DEFAULT_LABEL, "b", "b")],
        Vec::<(String, String)>::new(),
    )
}

/// Two points with the universal relation.
pub fn two_point_universal() -> Model {
    Model::new(
        ["a", "b"],
        [
            (DEFAULT_LABEL, "a", "a"),
            (DEFAULT_LABEL, "a", "b"),
            (DEFAULT_LABEL, "b", "a"),
            (DEFAULT_LABEL, "b", "b"),
        ],
        Vec::<(String, String)>::new(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_deletion_is_identity() {
        let m = two_point_loop();
        assert_eq!(m.delete(&BTreeSet::new()).unwrap(), m);
    }

    #[test]
    fn deleting_one_point_of_the_loop() {
        let m = two_point_loop();
        let d: BTreeSet<World> = ["b".to_string()].into();
        let m2 = m.delete(&d).unwrap();
        assert_eq!(m2.worlds.len(), 1);
        assert!(m2.relations[DEFAULT_LABEL].is_empty());
    }

    #[test]
    fn deletion_clears_nominal_denotation() {
        let m = with_nominals(two_point_loop(), &[("n", Some("b"))]);
        let d: BTreeSet<World> = ["b".to_string()].into();
        let m2 = m.delete(&d).unwrap();
        assert_eq!(m2.denotation("n"), None);
        assert!(m2.nominals.contains_key("n"));
    }

    #[test]
    fn deleting_unknown_world_errors() {
        let m = two_point_loop();
        let d: BTreeSet<World> = ["zz".to_string()].into();
        assert_eq!(
            m.delete(&d).unwrap_err(),
            ModelError::UnknownWorld("zz".to_string())
        );
    }

    #[test]
    fn relativize_matches_delete() {
        let m = two_point_loop();
        let keep: BTreeSet<World> = ["a".to_string()].into();
        let k = m.relativize(&keep).unwrap();
        let d: BTreeSet<World> = ["b".to_string()].into();
        assert_eq!(k, m.delete(&d).unwrap());
        assert_eq!(m.relativize(&m.worlds).unwrap(), m);
        let e = m.relativize(&BTreeSet::new()).unwrap();
        assert!(e.worlds.is_empty());
        assert!(PointedModel::new(e, "a").is_err());
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_random(5, &["p", "q"], 0.4, 99);
        let b = generate_random(5, &["p", "q"], 0.4, 99);
        assert_eq!(a, b);
        let c = generate_random(5, &["p", "q"], 0.4, 100);
        assert_ne!(a, c);
    }

    #[test]
    fn single_world_no_edges() {
        let m = generate_random(1, &[], 0.0, 3);
        assert_eq!(m.worlds.len(), 1);
        assert!(m.relations[DEFAULT_LABEL].is_empty());
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_models(1, &[], &["r"]).count(), 2);
        assert_eq!(enumerate_models(1, &["p"], &["r"]).count(), 4);
        let two: Vec<Model> = enumerate_models(2, &[], &["r"])
            .filter(|m| m.worlds.len() == 2)
            .collect();
        assert_eq!(two.len(), 16);
        let mut uniq = std::collections::BTreeSet::new();
        for m in enumerate_models(2, &["p"], &["r"]) {
            assert!(uniq.insert(m.to_json()), "model yielded twice");
        }
        assert_eq!(uniq.len(), 4 + 16 * 4);
    }

    #[test]
    fn json_round_trip_is_canonical() {
        let m = with_nominals(generate_random(4, &["p"], 0.5, 7), &[("n", Some("w2"))]);
        let text = m.to_json();
        let back = Model::from_json(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn deletions_compose_on_disjoint_sets() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let m = generate_random(5, &["p"], 0.5, rng.gen());
            let worlds: Vec<World> = m.worlds.iter().cloned().collect();
            let d1: BTreeSet<World> = [worlds[0].clone()].into();
            let d2: BTreeSet<World> = [worlds[2].clone(), worlds[4].clone()].into();
            let both: BTreeSet<World> = d1.union(&d2).cloned().collect();
            let stepwise = m.delete(&d1).unwrap().delete(&d2).unwrap();
            assert_eq!(stepwise, m.delete(&both).unwrap());
        }
    }

    #[test]
    fn delete_never_adds_edges_or_valuations() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let m = generate_random(5, &["p", "q"], 0.6, rng.gen());
            let d: BTreeSet<World> = ["w1".to_string(), "w3".to_string()].into();
            let m2 = m.delete(&d).unwrap();
            for (l, pairs) in &m2.relations {
                assert!(pairs.is_subset(&m.relations[l]));
            }
            for (p, ws) in &m2.valuation {
                assert!(ws.is_subset(&m.valuation[p]));
            }
        }
    }
}
