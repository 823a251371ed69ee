//! Weighted matchset construction.
//!
//! For every rule the term is walked from the top level; each context whose
//! label equals the rule label contributes entries whose rate is the number
//! of distinct reactant combinations times the kinetic constant (mass
//! action). Atom combinations are counted with binomial coefficients; when
//! the left-hand side has a compartment pattern, one entry is produced per
//! concrete compartment that satisfies it.

use std::fmt;

pub use crate::rule::Binding;
use crate::rule::{Model, Rule};
use crate::term::{CompartmentId, Label, Multiset, Term};

/// Rates below this are treated as zero.
pub const RATE_FLOOR: f64 = 1e-300;

/// Compartment ids leading from the root to a context; empty is the top level.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ContextPath(pub Vec<CompartmentId>);

impl ContextPath {
    pub fn top() -> Self {
        Self::default()
    }

    pub fn is_top(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[CompartmentId] {
        &self.0
    }
}

impl fmt::Display for ContextPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("TOP");
        }
        for (i, id) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("/")?;
            }
            write!(f, "{}", id.0)?;
        }
        Ok(())
    }
}

/// One way to apply one rule. The full [`Binding`] is extracted only for the
/// entry that is actually fired.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchEntry {
    pub rule: usize,
    pub context: ContextPath,
    /// Compartment matched by the rule's compartment pattern.
    pub compartment: Option<CompartmentId>,
    /// Number of distinct reactant combinations.
    pub combinations: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchSet {
    entries: Vec<Vec<MatchEntry>>,
    rule_rates: Vec<f64>,
    total: f64,
}

impl MatchSet {
    pub fn rule_entries(&self, rule: usize) -> &[MatchEntry] {
        &self.entries[rule]
    }

    /// Per-rule rate sums r_i.
    pub fn rule_rates(&self) -> &[f64] {
        &self.rule_rates
    }

    /// Total rate r.
    pub fn total_rate(&self) -> f64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.entries.iter().all(Vec::is_empty)
    }

    pub fn len(&self) -> usize {
        self.entries.iter().map(Vec::len).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = &MatchEntry> {
        self.entries.iter().flatten()
    }
}

/// C(n, k): exact while it fits in 128 bits, then a floating-point product
/// with a relative error of about k ulp. Saturates to infinity.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step.
        let Some(p) = acc.checked_mul(u128::from(n - i)) else {
            let mut x = acc as f64;
            for j in i..k {
                x = x * (n - j) as f64 / (j + 1) as f64;
                if x.is_infinite() {
                    break;
                }
            }
            return x;
        };
        acc = p / u128::from(i + 1);
    }
    acc as f64
}

/// Product over pattern species of C(n_x, k_x); 1 for an empty pattern.
pub fn match_populations(pattern: &Multiset, subject: &Multiset) -> f64 {
    let mut count = 1.0;
    for (atom, k) in pattern.iter() {
        count *= binomial(subject.count(atom), k);
        if count == 0.0 {
            break;
        }
    }
    count
}

/// Combination counts of `rule` in one context content, one per entry:
/// `(matched compartment, combinations)`.
pub fn context_combinations(rule: &Rule, content: &Term) -> Vec<(Option<CompartmentId>, f64)> {
    let population = match_populations(&rule.lhs.atoms, &content.atoms);
    if population == 0.0 {
        return Vec::new();
    }
    let Some(cp) = &rule.lhs.compartment else {
        return vec![(None, population)];
    };
    content
        .compartments
        .iter()
        .filter(|c| c.label == cp.label)
        .filter_map(|c| {
            let inner =
                match_populations(&cp.wrap_atoms, &c.wrap) * match_populations(&cp.content.atoms, &c.content.atoms);
            (inner > 0.0).then_some((Some(c.id), population * inner))
        })
        .collect()
}

fn match_rule(rule: &Rule, term: &Term, label: Label, path: &mut Vec<CompartmentId>, out: &mut Vec<MatchEntry>) {
    if label == rule.label {
        for (compartment, combinations) in context_combinations(rule, term) {
            let rate = combinations * rule.k;
            if rate >= RATE_FLOOR {
                out.push(MatchEntry {
                    rule: rule.id,
                    context: ContextPath(path.clone()),
                    compartment,
                    combinations,
                    rate,
                });
            }
        }
    }
    for c in &term.compartments {
        path.push(c.id);
        match_rule(rule, &c.content, c.label, path, out);
        path.pop();
    }
}

pub fn build_matchset(model: &Model, term: &Term) -> MatchSet {
    let mut entries = Vec::with_capacity(model.rules.len());
    let mut rule_rates = Vec::with_capacity(model.rules.len());
    let mut path = Vec::new();
    for rule in &model.rules {
        let mut found = Vec::new();
        match_rule(rule, term, Label::TOP, &mut path, &mut found);
        rule_rates.push(found.iter().map(|e| e.rate).sum());
        entries.push(found);
    }
    let total = rule_rates.iter().sum();
    MatchSet {
        entries,
        rule_rates,
        total,
    }
}
