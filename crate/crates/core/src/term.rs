//! Terms: nested multisets of atoms and labelled, wrapped compartments.
//!
//! A [`Term`] is the simulation state. Atoms are stored as counts, never as
//! individual objects, and a count of zero is never stored. Compartments carry
//! an instance-unique [`CompartmentId`] so that match contexts can be
//! addressed by path from the root.

use std::collections::{btree_map, BTreeMap, HashMap};

/// Interned atom name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom(u32);

impl Atom {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Interned compartment label. [`Label::TOP`] names the root context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(u32);

impl Label {
    pub const TOP: Label = Label(0);

    pub fn is_top(self) -> bool {
        self == Self::TOP
    }
}

/// Symbol tables for atoms and labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Symbols {
    atoms: Vec<String>,
    atom_index: HashMap<String, Atom>,
    labels: Vec<String>,
    label_index: HashMap<String, Label>,
}

impl Default for Symbols {
    fn default() -> Self {
        Self::new()
    }
}

impl Symbols {
    pub const TOP_NAME: &'static str = "TOP";

    pub fn new() -> Self {
        let mut label_index = HashMap::new();
        label_index.insert(Self::TOP_NAME.to_string(), Label::TOP);
        Symbols {
            atoms: Vec::new(),
            atom_index: HashMap::new(),
            labels: vec![Self::TOP_NAME.to_string()],
            label_index,
        }
    }

    /// Interns `name`, returning the existing atom if already known.
    pub fn atom(&mut self, name: &str) -> Atom {
        debug_assert!(!name.is_empty());
        if let Some(&atom) = self.atom_index.get(name) {
            return atom;
        }
        let atom = Atom(self.atoms.len() as u32);
        self.atoms.push(name.to_string());
        self.atom_index.insert(name.to_string(), atom);
        atom
    }

    pub fn find_atom(&self, name: &str) -> Option<Atom> {
        self.atom_index.get(name).copied()
    }

    pub fn atom_name(&self, atom: Atom) -> &str {
        &self.atoms[atom.index()]
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn label(&mut self, name: &str) -> Label {
        debug_assert!(!name.is_empty());
        if let Some(&label) = self.label_index.get(name) {
            return label;
        }
        let label = Label(self.labels.len() as u32);
        self.labels.push(name.to_string());
        self.label_index.insert(name.to_string(), label);
        label
    }

    pub fn find_label(&self, name: &str) -> Option<Label> {
        self.label_index.get(name).copied()
    }

    pub fn label_name(&self, label: Label) -> &str {
        &self.labels[label.0 as usize]
    }
}

/// Multiset of atoms. Zero counts are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Multiset(BTreeMap<Atom, u64>);

impl Multiset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&self, atom: Atom) -> u64 {
        self.0.get(&atom).copied().unwrap_or(0)
    }

    pub fn add(&mut self, atom: Atom, n: u64) {
        if n > 0 {
            *self.0.entry(atom).or_insert(0) += n;
        }
    }

    /// Removes `n` copies of `atom`. Leaves the multiset untouched and returns
    /// `false` when fewer than `n` copies are present.
    pub fn remove(&mut self, atom: Atom, n: u64) -> bool {
        if n == 0 {
            return true;
        }
        match self.0.entry(atom) {
            btree_map::Entry::Occupied(mut e) => {
                let have = *e.get();
                if have < n {
                    false
                } else if have == n {
                    e.remove();
                    true
                } else {
                    *e.get_mut() = have - n;
                    true
                }
            }
            btree_map::Entry::Vacant(_) => false,
        }
    }

    pub fn contains(&self, other: &Multiset) -> bool {
        other.iter().all(|(atom, n)| self.count(atom) >= n)
    }

    /// Removes every element of `other`; all-or-nothing.
    pub fn subtract(&mut self, other: &Multiset) -> bool {
        if !self.contains(other) {
            return false;
        }
        for (atom, n) in other.iter() {
            self.remove(atom, n);
        }
        true
    }

    pub fn merge(&mut self, other: &Multiset) {
        for (atom, n) in other.iter() {
            self.add(atom, n);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of distinct species.
    pub fn distinct(&self) -> usize {
        self.0.len()
    }

    /// Total number of elements, counting multiplicity.
    pub fn total(&self) -> u64 {
        self.0.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Atom, u64)> + '_ {
        self.0.iter().map(|(&a, &n)| (a, n))
    }
}

impl FromIterator<(Atom, u64)> for Multiset {
    fn from_iter<I: IntoIterator<Item = (Atom, u64)>>(iter: I) -> Self {
        let mut m = Multiset::new();
        for (atom, n) in iter {
            m.add(atom, n);
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CompartmentId(pub u64);

/// Source of fresh compartment ids for one simulation instance.
#[derive(Debug, Clone, Default)]
pub struct CompartmentIds {
    next: u64,
}

impl CompartmentIds {
    /// Allocator whose first id is above every id already used in `term`.
    pub fn after(term: &Term) -> Self {
        CompartmentIds {
            next: term.max_compartment_id().map_or(0, |id| id.0 + 1),
        }
    }

    pub fn fresh(&mut self) -> CompartmentId {
        let id = CompartmentId(self.next);
        self.next += 1;
        id
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Compartment {
    pub id: CompartmentId,
    pub label: Label,
    pub wrap: Multiset,
    pub content: Term,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Term {
    pub atoms: Multiset,
    pub compartments: Vec<Compartment>,
}

impl Term {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty() && self.compartments.is_empty()
    }

    /// Copies of `atom` anywhere in the term: contents and wraps, all depths.
    pub fn species_total(&self, atom: Atom) -> u64 {
        self.atoms.count(atom)
            + self
                .compartments
                .iter()
                .map(|c| c.wrap.count(atom) + c.content.species_total(atom))
                .sum::<u64>()
    }

    pub fn totals(&self, atoms: &[Atom]) -> Vec<u64> {
        let mut out = vec![0; atoms.len()];
        self.accumulate_totals(atoms, &mut out);
        out
    }

    fn accumulate_totals(&self, atoms: &[Atom], out: &mut [u64]) {
        for (slot, &atom) in out.iter_mut().zip(atoms) {
            *slot += self.atoms.count(atom);
        }
        for c in &self.compartments {
            for (slot, &atom) in out.iter_mut().zip(atoms) {
                *slot += c.wrap.count(atom);
            }
            c.content.accumulate_totals(atoms, out);
        }
    }

    /// Every atom species occurring anywhere in the term.
    pub fn species(&self) -> Vec<Atom> {
        let mut seen = Multiset::new();
        self.collect_species(&mut seen);
        seen.iter().map(|(a, _)| a).collect()
    }

    fn collect_species(&self, seen: &mut Multiset) {
        for (atom, _) in self.atoms.iter() {
            seen.add(atom, 1);
        }
        for c in &self.compartments {
            for (atom, _) in c.wrap.iter() {
                seen.add(atom, 1);
            }
            c.content.collect_species(seen);
        }
    }

    pub fn max_compartment_id(&self) -> Option<CompartmentId> {
        self.compartments
            .iter()
            .flat_map(|c| std::iter::once(c.id).chain(c.content.max_compartment_id()))
            .max()
    }

    pub fn compartment_count(&self) -> usize {
        self.compartments
            .iter()
            .map(|c| 1 + c.content.compartment_count())
            .sum()
    }

    /// Content reached by following `path` (compartment ids) from this term.
    pub fn content_at(&self, path: &[CompartmentId]) -> Option<&Term> {
        let mut here = self;
        for id in path {
            here = &here.compartments.iter().find(|c| c.id == *id)?.content;
        }
        Some(here)
    }

    pub fn content_at_mut(&mut self, path: &[CompartmentId]) -> Option<&mut Term> {
        let mut here = self;
        for id in path {
            here = &mut here.compartments.iter_mut().find(|c| c.id == *id)?.content;
        }
        Some(here)
    }

    /// Removes and returns the direct child compartment with `id`.
    pub fn take_compartment(&mut self, id: CompartmentId) -> Option<Compartment> {
        let pos = self.compartments.iter().position(|c| c.id == id)?;
        Some(self.compartments.remove(pos))
    }

    /// Moves all of `other` into this term, keeping compartment ids.
    pub fn absorb(&mut self, other: Term) {
        self.atoms.merge(&other.atoms);
        self.compartments.extend(other.compartments);
    }

    /// Gives every compartment in the term a fresh id.
    pub fn renumber(&mut self, ids: &mut CompartmentIds) {
        for c in &mut self.compartments {
            c.id = ids.fresh();
            c.content.renumber(ids);
        }
    }
}
