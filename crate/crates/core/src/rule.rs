//! Rewrite rules, output templates, substitutions and models.
//!
//! A rule `label : lhs => rhs @ k` rewrites the whole content of a context
//! whose label is `label`. The left-hand side is a [`Pattern`]: a multiset of
//! atoms, at most one [`CompartmentPattern`], and exactly one rest variable
//! that captures everything else. Applying a rule first extracts a
//! [`Binding`] from the context (leaving it empty) and then instantiates the
//! right-hand [`Template`] back into it with [`apply_binding`].

use thiserror::Error;

use crate::term::{Atom, CompartmentId, CompartmentIds, Label, Multiset, Symbols, Term};

/// Index of a variable in its rule's variable table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub u16);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    /// Captures the rest of a content: atoms and compartments.
    Content,
    /// Captures the rest of a wrap: atoms only.
    Wrap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarInfo {
    pub name: String,
    pub kind: VarKind,
}

/// Content pattern without nested compartments.
#[derive(Debug, Clone, PartialEq)]
pub struct ContentPattern {
    pub atoms: Multiset,
    pub rest: Var,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompartmentPattern {
    pub label: Label,
    pub wrap_atoms: Multiset,
    pub wrap_rest: Var,
    pub content: ContentPattern,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    pub atoms: Multiset,
    pub compartment: Option<CompartmentPattern>,
    pub rest: Var,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Template {
    pub atoms: Multiset,
    pub vars: Vec<Var>,
    pub compartments: Vec<CompartmentTemplate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompartmentTemplate {
    pub label: Label,
    pub wrap_atoms: Multiset,
    pub wrap_vars: Vec<Var>,
    pub content: Template,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    /// Position in the model's rule list; sweeps address rules as `r<id>`.
    pub id: usize,
    pub label: Label,
    pub lhs: Pattern,
    pub rhs: Template,
    /// Kinetic constant.
    pub k: f64,
    pub vars: Vec<VarInfo>,
}

impl Rule {
    pub fn var_name(&self, var: Var) -> &str {
        &self.vars[var.0 as usize].name
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub name: String,
    pub symbols: Symbols,
    pub initial: Term,
    pub rules: Vec<Rule>,
    pub observables: Vec<Atom>,
    pub t_stop: f64,
    pub delta: f64,
}

impl Model {
    pub fn observable_names(&self) -> Vec<&str> {
        self.observables.iter().map(|&a| self.symbols.atom_name(a)).collect()
    }

    /// Copy of the model with rule `rule` using kinetic constant `k`.
    pub fn with_rate(&self, rule: usize, k: f64) -> Option<Model> {
        if !(k > 0.0 && k.is_finite()) {
            return None;
        }
        let mut m = self.clone();
        m.rules.get_mut(rule)?.k = k;
        Some(m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Captured {
    Atoms(Multiset),
    Term(Term),
}

/// Substitution produced by matching a rule's left-hand side.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Binding {
    slots: Vec<Option<Captured>>,
    /// Compartment consumed by the compartment pattern, if any.
    pub compartment: Option<CompartmentId>,
}

impl Binding {
    pub fn with_vars(n: usize) -> Self {
        Binding {
            slots: vec![None; n],
            compartment: None,
        }
    }

    pub fn bind(&mut self, var: Var, value: Captured) {
        let i = var.0 as usize;
        if self.slots.len() <= i {
            self.slots.resize(i + 1, None);
        }
        self.slots[i] = Some(value);
    }

    pub fn get(&self, var: Var) -> Option<&Captured> {
        self.slots.get(var.0 as usize)?.as_ref()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum RewriteError {
    #[error("context path {0:?} no longer resolves")]
    StaleContext(Vec<CompartmentId>),
    #[error("variable {0:?} is unbound")]
    Unbound(Var),
    #[error("variable {0:?} captured a term with compartments and cannot be placed in a wrap")]
    TermInWrap(Var),
    #[error("left-hand side does not match the selected context")]
    NoMatch,
}

impl Pattern {
    /// Splits `content` into the substitution of this pattern, leaving
    /// `content` empty. `chosen` selects the compartment matched by the
    /// compartment pattern. On failure `content` is left unchanged.
    pub fn extract(
        &self,
        content: &mut Term,
        chosen: Option<CompartmentId>,
        n_vars: usize,
    ) -> Result<Binding, RewriteError> {
        if !content.atoms.contains(&self.atoms) {
            return Err(RewriteError::NoMatch);
        }
        let mut binding = Binding::with_vars(n_vars);
        match (&self.compartment, chosen) {
            (None, None) => {}
            (Some(cp), Some(id)) => {
                let c = content
                    .compartments
                    .iter()
                    .find(|c| c.id == id)
                    .ok_or(RewriteError::NoMatch)?;
                if c.label != cp.label
                    || !c.wrap.contains(&cp.wrap_atoms)
                    || !c.content.atoms.contains(&cp.content.atoms)
                {
                    return Err(RewriteError::NoMatch);
                }
                let mut c = content.take_compartment(id).expect("checked above");
                c.wrap.subtract(&cp.wrap_atoms);
                c.content.atoms.subtract(&cp.content.atoms);
                binding.bind(cp.wrap_rest, Captured::Atoms(c.wrap));
                binding.bind(cp.content.rest, Captured::Term(c.content));
                binding.compartment = Some(id);
            }
            _ => return Err(RewriteError::NoMatch),
        }
        content.atoms.subtract(&self.atoms);
        binding.bind(self.rest, Captured::Term(std::mem::take(content)));
        Ok(binding)
    }
}

/// Instantiates `rhs` under `binding` and merges the result into the content
/// at `context` inside `root`.
///
/// The first use of a captured term keeps its compartment ids; any further
/// use of the same variable is a copy and gets fresh ids, as does every
/// compartment built by a constructor in `rhs`.
pub fn apply_binding(
    rhs: &Template,
    binding: &Binding,
    root: &mut Term,
    context: &[CompartmentId],
    ids: &mut CompartmentIds,
) -> Result<(), RewriteError> {
    let mut used = vec![false; binding.slots.len()];
    let produced = instantiate(rhs, binding, &mut used, ids)?;
    let target = root
        .content_at_mut(context)
        .ok_or_else(|| RewriteError::StaleContext(context.to_vec()))?;
    target.absorb(produced);
    Ok(())
}

fn captured(binding: &Binding, var: Var) -> Result<&Captured, RewriteError> {
    binding.get(var).ok_or(RewriteError::Unbound(var))
}

fn instantiate(
    template: &Template,
    binding: &Binding,
    used: &mut [bool],
    ids: &mut CompartmentIds,
) -> Result<Term, RewriteError> {
    let mut out = Term {
        atoms: template.atoms.clone(),
        compartments: Vec::new(),
    };
    for &var in &template.vars {
        match captured(binding, var)? {
            Captured::Atoms(m) => out.atoms.merge(m),
            Captured::Term(t) => {
                let mut t = t.clone();
                let slot = &mut used[var.0 as usize];
                if *slot {
                    t.renumber(ids);
                }
                *slot = true;
                out.absorb(t);
            }
        }
    }
    for ct in &template.compartments {
        let mut wrap = ct.wrap_atoms.clone();
        for &var in &ct.wrap_vars {
            match captured(binding, var)? {
                Captured::Atoms(m) => wrap.merge(m),
                Captured::Term(t) if t.compartments.is_empty() => wrap.merge(&t.atoms),
                Captured::Term(_) => return Err(RewriteError::TermInWrap(var)),
            }
        }
        let id = ids.fresh();
        let content = instantiate(&ct.content, binding, used, ids)?;
        out.compartments.push(crate::term::Compartment {
            id,
            label: ct.label,
            wrap,
            content,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{format_term, parse_model};

    fn model(src: &str) -> Model {
        parse_model(src).unwrap()
    }

    #[test]
    fn rest_variable_feeds_back_with_new_atom() {
        let m = model("%rule l : a b $X => c $X @ 0.5\n");
        let mut syms = m.symbols.clone();
        let (a, b) = (syms.atom("a"), syms.atom("b"));
        let rule = &m.rules[0];
        let mut binding = Binding::with_vars(rule.vars.len());
        binding.bind(
            rule.lhs.rest,
            Captured::Term(Term {
                atoms: [(a, 1), (b, 1)].into_iter().collect(),
                compartments: vec![],
            }),
        );
        let mut root = Term::new();
        let mut ids = CompartmentIds::default();
        apply_binding(&rule.rhs, &binding, &mut root, &[], &mut ids).unwrap();
        assert_eq!(format_term(&syms, &root), "a b c");
    }

    #[test]
    fn identity_rhs_leaves_content_unchanged() {
        let mut m = model("%term a*3 (x | y)@m\n%rule TOP : a $X => a $X @ 1\n");
        let before = m.initial.clone();
        let rule = m.rules[0].clone();
        let mut ids = CompartmentIds::after(&m.initial);
        let b = rule.lhs.extract(&mut m.initial, None, rule.vars.len()).unwrap();
        assert!(m.initial.is_empty());
        apply_binding(&rule.rhs, &b, &mut m.initial, &[], &mut ids).unwrap();
        assert_eq!(m.initial, before);
    }

    #[test]
    fn duplicating_compartment_variables_allocates_fresh_ids() {
        let mut m = model("%term (w | y z)@m\n%rule TOP : (w $W | $Y)@m $X => (w $W | $Y)@m ($W | $Y)@m $X @ 1\n");
        let rule = m.rules[0].clone();
        let mut ids = CompartmentIds::after(&m.initial);
        let id = m.initial.compartments[0].id;
        let before: Vec<u64> = {
            let s = &m.symbols;
            ["w", "y", "z"]
                .iter()
                .map(|n| m.initial.species_total(s.find_atom(n).unwrap()))
                .collect()
        };
        let b = rule.lhs.extract(&mut m.initial, Some(id), rule.vars.len()).unwrap();
        apply_binding(&rule.rhs, &b, &mut m.initial, &[], &mut ids).unwrap();
        let s = &m.symbols;
        let after: Vec<u64> = ["w", "y", "z"]
            .iter()
            .map(|n| m.initial.species_total(s.find_atom(n).unwrap()))
            .collect();
        // w appears once in the rhs, y and z are duplicated through $Y.
        assert_eq!(after, vec![before[0], 2 * before[1], 2 * before[2]]);
        assert_eq!(m.initial.compartments.len(), 2);
        let new_ids: Vec<_> = m.initial.compartments.iter().map(|c| c.id).collect();
        assert!(!new_ids.contains(&id));
        assert_ne!(new_ids[0], new_ids[1]);
        assert_eq!(format_term(s, &m.initial), "(w | y z)@m (| y z)@m");
    }

    #[test]
    fn stale_context_is_reported() {
        let m = model("%rule l : a $X => $X @ 1\n");
        let rule = &m.rules[0];
        let mut b = Binding::with_vars(rule.vars.len());
        b.bind(rule.lhs.rest, Captured::Term(Term::new()));
        let mut root = Term::new();
        let err = apply_binding(
            &rule.rhs,
            &b,
            &mut root,
            &[CompartmentId(3)],
            &mut CompartmentIds::default(),
        )
        .unwrap_err();
        assert_eq!(err, RewriteError::StaleContext(vec![CompartmentId(3)]));
    }

    #[test]
    fn failed_extract_leaves_content_alone() {
        let mut m = model("%term a\n%rule TOP : a*2 $X => $X @ 1\n");
        let before = m.initial.clone();
        let rule = &m.rules[0];
        assert_eq!(
            rule.lhs.extract(&mut m.initial, None, rule.vars.len()),
            Err(RewriteError::NoMatch)
        );
        assert_eq!(m.initial, before);
    }

    #[test]
    fn with_rate_rejects_non_positive() {
        let m = model("%rule TOP : a $X => $X @ 1\n");
        assert!(m.with_rate(0, 0.0).is_none());
        assert!(m.with_rate(5, 1.0).is_none());
        assert_eq!(m.with_rate(0, 2.5).unwrap().rules[0].k, 2.5);
    }
}
