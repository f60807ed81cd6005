//! Seeded random generators for formulas. Test harnesses and the
//! countermodel search share these so that failures replay.

use rand::Rng;

use crate::formula::{Formula, DEFAULT_LABEL};

const PROPS: [&str; 3] = ["p", "q", "x"];
const NOMINALS: [&str; 2] = ["n", "m"];

/// A random formula of the core language without nominals or announcements:
/// atoms, `~`, `|`, `<>`, `<- >`. Used for bisimulation-invariance tests.
pub fn random_core_formula(rng: &mut impl Rng, depth: usize) -> Formula {
    random_core_formula_over(rng, depth, &PROPS[..1])
}

/// Core-language formula over a chosen proposition alphabet.
pub fn random_core_formula_over(rng: &mut impl Rng, depth: usize, props: &[&str]) -> Formula {
    if depth == 0 {
        return leaf(rng, props, &[]);
    }
    match rng.gen_range(0..5) {
        0 => leaf(rng, props, &[]),
        1 => random_core_formula_over(rng, depth - 1, props).neg(),
        2 => random_core_formula_over(rng, depth - 1, props)
            .or(random_core_formula_over(rng, depth - 1, props)),
        3 => Formula::diamond(
            DEFAULT_LABEL,
            random_core_formula_over(rng, depth - 1, props),
        ),
        _ => Formula::remove(
            random_core_formula_over(rng, depth - 1, props),
            random_core_formula_over(rng, depth - 1, props),
        ),
    }
}

/// A random formula of the full language: nominals, announcement, removal,
/// `E`, and propositional connectives, all core constructors.
pub fn random_full_formula(rng: &mut impl Rng, depth: usize) -> Formula {
    if depth == 0 {
        return leaf(rng, &PROPS, &NOMINALS);
    }
    match rng.gen_range(0..8) {
        0 => leaf(rng, &PROPS, &NOMINALS),
        1 => random_full_formula(rng, depth - 1).neg(),
        2 => random_full_formula(rng, depth - 1).or(random_full_formula(rng, depth - 1)),
        3 => Formula::diamond(DEFAULT_LABEL, random_full_formula(rng, depth - 1)),
        4 => Formula::announce(
            random_full_formula(rng, depth - 1),
            random_full_formula(rng, depth - 1),
        ),
        5 | 6 => Formula::remove(
            random_full_formula(rng, depth - 1),
            random_full_formula(rng, depth - 1),
        ),
        _ => Formula::exists(random_full_formula(rng, depth - 1)),
    }
}

/// A random formula that may use every sugar constructor. Exercises the
/// parser, printer and expansion.
pub fn random_sugared_formula(rng: &mut impl Rng, depth: usize) -> Formula {
    if depth == 0 {
        return sugared_leaf(rng);
    }
    let sub = |rng: &mut _| random_sugared_formula(rng, depth - 1);
    match rng.gen_range(0..16) {
        0 => sugared_leaf(rng),
        1 => sub(rng).neg(),
        2 => sub(rng).or(sub(rng)),
        3 => sub(rng).and(sub(rng)),
        4 => sub(rng).implies(sub(rng)),
        5 => sub(rng).iff(sub(rng)),
        6 => Formula::diamond(DEFAULT_LABEL, sub(rng)),
        7 => Formula::boxed(DEFAULT_LABEL, sub(rng)),
        8 => Formula::announce(sub(rng), sub(rng)),
        9 => Formula::ann_box(sub(rng), sub(rng)),
        10 => Formula::remove(sub(rng), sub(rng)),
        11 => Formula::rem_box(sub(rng), sub(rng)),
        12 => Formula::exists(sub(rng)),
        13 => Formula::universal(sub(rng)),
        14 => Formula::different(sub(rng)),
        _ => Formula::at(NOMINALS[rng.gen_range(0..NOMINALS.len())], sub(rng)),
    }
}

fn leaf(rng: &mut impl Rng, props: &[&str], nominals: &[&str]) -> Formula {
    let n = props.len() + nominals.len() + 1;
    let k = rng.gen_range(0..n);
    if k < props.len() {
        Formula::prop(props[k])
    } else if k < props.len() + nominals.len() {
        Formula::nominal(nominals[k - props.len()])
    } else {
        Formula::Top
    }
}

fn sugared_leaf(rng: &mut impl Rng) -> Formula {
    match rng.gen_range(0..6) {
        0 => Formula::Top,
        1 => Formula::Bot,
        2 => Formula::prop(PROPS[rng.gen_range(0..PROPS.len())]),
        3 => Formula::nominal(NOMINALS[rng.gen_range(0..NOMINALS.len())]),
        _ => Formula::prop(PROPS[rng.gen_range(0..PROPS.len())]),
    }
}
