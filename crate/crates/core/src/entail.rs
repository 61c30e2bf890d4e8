//! Bounded entailment over a sign system.
//!
//! The closure is the least fixpoint of forward chaining from the facts,
//! computed semi-naively. Rule variables only range over ground terms that
//! already occur in the system: a grounding fires only if its head is built
//! from the finite term universe of the axioms and is well-sorted.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::system::{Atom, Axiom, AxiomForm, Name, RelKind, SignSystem, SortOrder, Term};

/// Λ: the ground atoms entailed by a system.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct GroundModel {
    pub atoms: BTreeSet<Atom>,
}

impl GroundModel {
    pub fn contains(&self, atom: &Atom) -> bool {
        self.atoms.contains(atom)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    fn by_relation(&self) -> BTreeMap<&str, Vec<&Atom>> {
        let mut idx: BTreeMap<&str, Vec<&Atom>> = BTreeMap::new();
        for a in &self.atoms {
            idx.entry(a.rel.as_str()).or_default().push(a);
        }
        idx
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EntailError {
    #[error("axiom `{axiom}` uses {kind} `{name}`, which is not declared in `{system}`")]
    UnknownVocabulary { axiom: Name, kind: &'static str, name: Name, system: Name },
}

type Bindings = BTreeMap<String, Term>;

fn match_term(pattern: &Term, ground: &Term, b: &mut Bindings) -> bool {
    match (pattern, ground) {
        (Term::Var(v), g) => match b.get(v) {
            Some(bound) => bound == g,
            None => {
                b.insert(v.clone(), g.clone());
                true
            }
        },
        (Term::Lit { value: p, .. }, Term::Lit { value: g, .. }) => p == g,
        (Term::App { ctor: pc, args: pa }, Term::App { ctor: gc, args: ga }) => {
            pc == gc && pa.len() == ga.len() && pa.iter().zip(ga).all(|(p, g)| match_term(p, g, b))
        }
        _ => false,
    }
}

fn match_atom(pattern: &Atom, ground: &Atom, b: &Bindings) -> Option<Bindings> {
    if pattern.rel != ground.rel || pattern.args.len() != ground.args.len() {
        return None;
    }
    let mut b = b.clone();
    pattern.args.iter().zip(&ground.args).all(|(p, g)| match_term(p, g, &mut b)).then_some(b)
}

fn substitute(t: &Term, b: &Bindings) -> Option<Term> {
    Some(match t {
        Term::Var(v) => b.get(v)?.clone(),
        Term::Lit { .. } => t.clone(),
        Term::App { ctor, args } => {
            Term::App { ctor: ctor.clone(), args: args.iter().map(|a| substitute(a, b)).collect::<Option<_>>()? }
        }
    })
}

fn substitute_atom(a: &Atom, b: &Bindings) -> Option<Atom> {
    Some(Atom { rel: a.rel.clone(), args: a.args.iter().map(|t| substitute(t, b)).collect::<Option<_>>()? })
}

/// Enumerates every binding that maps each body atom onto an atom of the
/// corresponding candidate list.
fn join<'a>(body: &[Atom], pools: &[Vec<&'a Atom>], b: Bindings, emit: &mut dyn FnMut(&Bindings)) {
    match body.split_first() {
        None => emit(&b),
        Some((first, rest)) => {
            for g in &pools[0] {
                if let Some(next) = match_atom(first, g, &b) {
                    join(rest, &pools[1..], next, emit);
                }
            }
        }
    }
}

fn ground_terms_of(ax: &Axiom, out: &mut BTreeSet<Term>) {
    fn walk(t: &Term, out: &mut BTreeSet<Term>) {
        if t.is_ground() {
            t.collect_subterms(out);
        } else if let Term::App { args, .. } = t {
            args.iter().for_each(|a| walk(a, out));
        }
    }
    for atom in ax.form.atoms() {
        atom.args.iter().for_each(|t| walk(t, out));
    }
}

struct Engine<'s> {
    sys: &'s SignSystem,
    order: SortOrder,
    universe: BTreeSet<Term>,
}

impl<'s> Engine<'s> {
    fn new(sys: &'s SignSystem) -> Self {
        let mut universe = BTreeSet::new();
        for ax in sys.axioms.values() {
            ground_terms_of(ax, &mut universe);
        }
        Engine { sys, order: sys.sort_order(), universe }
    }

    fn admissible(&self, head: &Atom, universe: &BTreeSet<Term>) -> bool {
        head.args.iter().all(|t| universe.contains(t)) && self.sys.atom_well_sorted(head, &self.order)
    }

    fn closure(&self) -> GroundModel {
        let mut all = GroundModel::default();
        for ax in self.sys.axioms.values() {
            if let AxiomForm::Fact(a) = &ax.form {
                if a.is_ground() && self.sys.atom_well_sorted(a, &self.order) {
                    all.atoms.insert(a.clone());
                }
            }
        }
        let rules: Vec<(&[Atom], &Atom)> = self
            .sys
            .axioms
            .values()
            .filter_map(|ax| match &ax.form {
                AxiomForm::Rule { body, head } => Some((body.as_slice(), head)),
                _ => None,
            })
            .collect();
        let mut delta = all.clone();
        while !delta.is_empty() {
            let mut fresh = BTreeSet::new();
            {
                let full = all.by_relation();
                let recent = delta.by_relation();
                for (body, head) in &rules {
                    // semi-naive: at least one body atom comes from the last round
                    for pivot in 0..body.len() {
                        let pools: Vec<Vec<&Atom>> = body
                            .iter()
                            .enumerate()
                            .map(|(i, a)| {
                                let idx = if i == pivot { &recent } else { &full };
                                idx.get(a.rel.as_str()).cloned().unwrap_or_default()
                            })
                            .collect();
                        join(body, &pools, Bindings::new(), &mut |b| {
                            if let Some(h) = substitute_atom(head, b) {
                                if !all.contains(&h) && self.admissible(&h, &self.universe) {
                                    fresh.insert(h);
                                }
                            }
                        });
                    }
                }
            }
            all.atoms.extend(fresh.iter().cloned());
            delta = GroundModel { atoms: fresh };
        }
        all
    }
}

/// Least fixpoint of forward chaining.
pub fn closure(sys: &SignSystem) -> GroundModel {
    Engine::new(sys).closure()
}

fn check_vocabulary(sys: &SignSystem, ax: &Axiom) -> Result<(), EntailError> {
    fn term(sys: &SignSystem, t: &Term, ax: &Axiom) -> Result<(), EntailError> {
        let missing = |kind, name: &Name| EntailError::UnknownVocabulary {
            axiom: ax.name.clone(),
            kind,
            name: name.clone(),
            system: sys.name.clone(),
        };
        match t {
            Term::Var(_) => Ok(()),
            Term::Lit { sort, .. } if sys.data_sorts.contains_key(sort) => Ok(()),
            Term::Lit { sort, .. } => Err(missing("data sort", sort)),
            Term::App { ctor, args } => {
                if !sys.ctors.contains_key(ctor) {
                    return Err(missing("constructor", ctor));
                }
                args.iter().try_for_each(|a| term(sys, a, ax))
            }
        }
    }
    for atom in ax.form.atoms() {
        if !sys.rels.contains_key(&atom.rel) {
            return Err(EntailError::UnknownVocabulary {
                axiom: ax.name.clone(),
                kind: "relation",
                name: atom.rel.clone(),
                system: sys.name.clone(),
            });
        }
        atom.args.iter().try_for_each(|t| term(sys, t, ax))?;
    }
    Ok(())
}

/// Whether `ax` is a corollary of the axioms of `sys`.
///
/// A rule is entailed when adding it would not change the closure: every
/// admissible grounding of its body over the closure already has its head
/// there. A denial is entailed when no grounding of its body holds.
pub fn entails(sys: &SignSystem, ax: &Axiom) -> Result<bool, EntailError> {
    let engine = Engine::new(sys);
    let model = engine.closure();
    entails_in(&engine, &model, ax)
}

/// [`entails`] against a closure computed once by the caller.
pub fn entails_with(sys: &SignSystem, model: &GroundModel, ax: &Axiom) -> Result<bool, EntailError> {
    entails_in(&Engine::new(sys), model, ax)
}

fn entails_in(engine: &Engine<'_>, model: &GroundModel, ax: &Axiom) -> Result<bool, EntailError> {
    check_vocabulary(engine.sys, ax)?;
    let idx = model.by_relation();
    let pools = |body: &[Atom]| -> Vec<Vec<&Atom>> {
        body.iter().map(|a| idx.get(a.rel.as_str()).cloned().unwrap_or_default()).collect()
    };
    Ok(match &ax.form {
        AxiomForm::Fact(a) => model.contains(a),
        AxiomForm::Rule { body, head } => {
            let mut universe = engine.universe.clone();
            ground_terms_of(ax, &mut universe);
            let mut ok = true;
            join(body, &pools(body), Bindings::new(), &mut |b| {
                if let Some(h) = substitute_atom(head, b) {
                    if !model.contains(&h) && engine.admissible(&h, &universe) {
                        ok = false;
                    }
                }
            });
            ok
        }
        AxiomForm::Denial { body } => {
            let mut holds = false;
            join(body, &pools(body), Bindings::new(), &mut |_| holds = true);
            !holds
        }
    })
}

/// Groundings of a denial's body that hold in `model`, as instantiated atoms.
pub fn denial_witnesses(model: &GroundModel, body: &[Atom]) -> Vec<Vec<Atom>> {
    let idx = model.by_relation();
    let pools: Vec<Vec<&Atom>> = body.iter().map(|a| idx.get(a.rel.as_str()).cloned().unwrap_or_default()).collect();
    let mut out = Vec::new();
    join(body, &pools, Bindings::new(), &mut |b| {
        out.push(body.iter().filter_map(|a| substitute_atom(a, b)).collect());
    });
    out
}

/// ε: the number of distinct ground environmental atoms in the closure.
pub fn epsilon(sys: &SignSystem) -> usize {
    epsilon_of(sys, &closure(sys))
}

pub fn epsilon_of(sys: &SignSystem, model: &GroundModel) -> usize {
    model
        .atoms
        .iter()
        .filter(|a| sys.rels.get(&a.rel).is_some_and(|r| r.kind == RelKind::Environmental))
        .count()
}
