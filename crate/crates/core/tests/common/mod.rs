//! Shared generators and brute-force oracles for the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use cwc_sim::rule::{Model, Rule};
use cwc_sim::term::{Atom, Label, Multiset, Term};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ATOMS: [&str; 3] = ["a", "b", "c"];
pub const LABELS: [&str; 2] = ["l", "m"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn atoms_text(rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    (0..n).map(|_| ATOMS.choose(rng).unwrap().to_string()).collect()
}

/// Random term text with at most `budget` atoms and nesting depth ≤ 2.
pub fn random_term_text(rng: &mut ChaCha8Rng, budget: usize) -> String {
    let mut left = budget;
    term_text(rng, &mut left, 2)
}

fn take(rng: &mut ChaCha8Rng, left: &mut usize, max: usize) -> usize {
    let n = rng.random_range(0..=max.min(*left));
    *left -= n;
    n
}

fn term_text(rng: &mut ChaCha8Rng, left: &mut usize, depth: usize) -> String {
    let n = take(rng, left, 8);
    let mut parts = atoms_text(rng, n);
    if depth > 0 {
        for _ in 0..rng.random_range(0..=2) {
            let w = take(rng, left, 3);
            let wrap = atoms_text(rng, w).join(" ");
            let content = term_text(rng, left, depth - 1);
            let label = LABELS.choose(rng).unwrap();
            parts.push(format!("({wrap} | {content})@{label}"));
        }
    }
    parts.join(" ")
}

/// Random rule text whose left-hand side may carry one compartment pattern.
pub fn random_rule_text(rng: &mut ChaCha8Rng) -> String {
    let label = *["TOP", "l", "m"].choose(rng).unwrap();
    let n = rng.random_range(0..=3);
    let mut lhs = atoms_text(rng, n);
    let mut rhs = vec!["$X".to_string()];
    if rng.random_bool(0.4) {
        let w = rng.random_range(0..=2);
        let c = rng.random_range(0..=2);
        let cl = LABELS.choose(rng).unwrap();
        lhs.push(format!(
            "({} $W | {} $C)@{cl}",
            atoms_text(rng, w).join(" "),
            atoms_text(rng, c).join(" ")
        ));
        rhs.push(format!("($W | $C)@{cl}"));
    }
    let k: f64 = rng.random_range(0.1..5.0);
    if rng.random_bool(0.5) {
        rhs.push(ATOMS.choose(rng).unwrap().to_string());
    }
    lhs.push("$X".into());
    format!("{label} : {} => {} @ {k}", lhs.join(" "), rhs.join(" "))
}

/// Model text with one random term and up to `max_rules` random rules.
pub fn random_model_text(rng: &mut ChaCha8Rng, max_atoms: usize, max_rules: usize) -> String {
    let mut text = format!("%term {}\n", random_term_text(rng, max_atoms));
    for _ in 0..rng.random_range(1..=max_rules) {
        text.push_str(&format!("%rule {}\n", random_rule_text(rng)));
    }
    // Observe every atom name so models stay comparable even if the initial
    // term lacks some species.
    text.push_str("%observe a b c\n%tstop 2\n%delta 0.25\n");
    text
}

fn individuals(m: &Multiset) -> Vec<Atom> {
    m.iter().flat_map(|(a, n)| std::iter::repeat_n(a, n as usize)).collect()
}

/// Number of subsets of the individual molecules of `subject` whose species
/// histogram equals `pattern`, by explicit enumeration.
pub fn enumerate_matches(pattern: &Multiset, subject: &Multiset) -> u64 {
    let people = individuals(subject);
    let size = pattern.total() as usize;
    let mut chosen = Vec::with_capacity(size);
    let mut count = 0;
    fn go(people: &[Atom], start: usize, size: usize, chosen: &mut Vec<Atom>, pattern: &Multiset, count: &mut u64) {
        if chosen.len() == size {
            let got: Multiset = chosen.iter().map(|&a| (a, 1)).collect();
            if &got == pattern {
                *count += 1;
            }
            return;
        }
        for i in start..people.len() {
            chosen.push(people[i]);
            go(people, i + 1, size, chosen, pattern, count);
            chosen.pop();
        }
    }
    go(&people, 0, size, &mut chosen, pattern, &mut count);
    count
}

/// `(rule, context path, compartment) → combinations` for every non-zero
/// application, computed without the matcher.
pub type OracleKey = (usize, Vec<u64>, Option<u64>);

pub fn oracle_matches(model: &Model) -> BTreeMap<OracleKey, u64> {
    let mut out = BTreeMap::new();
    for rule in &model.rules {
        visit(rule, &model.initial, Label::TOP, &mut Vec::new(), &mut out);
    }
    out
}

fn visit(rule: &Rule, content: &Term, label: Label, path: &mut Vec<u64>, out: &mut BTreeMap<OracleKey, u64>) {
    if label == rule.label {
        let top = enumerate_matches(&rule.lhs.atoms, &content.atoms);
        match &rule.lhs.compartment {
            None => {
                if top > 0 {
                    out.insert((rule.id, path.clone(), None), top);
                }
            }
            Some(cp) => {
                for c in content.compartments.iter().filter(|c| c.label == cp.label) {
                    let n = top
                        * enumerate_matches(&cp.wrap_atoms, &c.wrap)
                        * enumerate_matches(&cp.content.atoms, &c.content.atoms);
                    if n > 0 {
                        out.insert((rule.id, path.clone(), Some(c.id.0)), n);
                    }
                }
            }
        }
    }
    for c in &content.compartments {
        path.push(c.id.0);
        visit(rule, &c.content, c.label, path, out);
        path.pop();
    }
}

/// Same map read off the matcher.
pub fn matcher_matches(model: &Model, term: &Term) -> BTreeMap<OracleKey, (f64, f64)> {
    let ms = cwc_sim::build_matchset(model, term);
    ms.iter()
        .map(|e| {
            let key = (
                e.rule,
                e.context.as_slice().iter().map(|c| c.0).collect(),
                e.compartment.map(|c| c.0),
            );
            (key, (e.combinations, e.rate))
        })
        .collect()
}

/// Whole-term totals of every atom in `names`.
pub fn totals(model: &Model, term: &Term, names: &[&str]) -> Vec<u64> {
    names
        .iter()
        .map(|n| model.symbols.find_atom(n).map_or(0, |a| term.species_total(a)))
        .collect()
}

pub const DECAY: &str = "%name decay\n%term a*1000\n%rule TOP : a $X => $X @ 1\n%tstop 2\n%delta 0.25\n";

pub const LV_SMALL: &str = "%name lv\n%term x*60 y*40\n\
%rule TOP : x $X => x x $X @ 1\n\
%rule TOP : x y $X => y y $X @ 0.02\n\
%rule TOP : y $X => $X @ 1\n\
%tstop 6\n%delta 0.5\n";

/// A compartmentalised model with transport across a membrane.
pub const CELL: &str = "%name cell\n%term s*30 (r r | p*5)@cell (r | p*2)@cell\n\
%rule TOP : s (r $W | $C)@cell $X => (r $W | p $C)@cell $X @ 0.05\n\
%rule cell : p $X => $X @ 0.3\n\
%rule TOP : $X => s $X @ 2\n\
%tstop 5\n%delta 0.5\n";
