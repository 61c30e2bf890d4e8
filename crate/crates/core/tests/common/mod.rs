//! Random generators and reference implementations shared by the
//! integration tests. The oracles here are written from the definitions,
//! not from the engine, and deliberately favour brute force.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use semiosa::dynamics::{CandidateTransition, ConvergenceDelta, DivergenceDelta, FStep, Ratio, Scenario, SemioticComponent};
use semiosa::system::{Constructor, Relation, SortDecl};
use semiosa::{Atom, Axiom, AxiomForm, RelKind, SemioticMorphism, SignSystem, Term};

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture(name: &str) -> String {
    let path = format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn fixture_path(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub sorts: usize,
    pub ctors: usize,
    pub rels: usize,
    pub axioms: usize,
}

impl Shape {
    pub const SMALL: Shape = Shape { sorts: 4, ctors: 4, rels: 3, axioms: 4 };
    pub const MEDIUM: Shape = Shape { sorts: 5, ctors: 5, rels: 4, axioms: 6 };
}

/// Names drawn from a shared pool so that two random systems overlap.
pub fn sort_name(i: usize) -> String {
    format!("S{i}")
}

/// A valid random system. Axioms that would break validation are dropped.
pub fn random_system(rng: &mut ChaCha8Rng, name: &str, shape: Shape) -> SignSystem {
    let mut sys = SignSystem::new(name);
    let n_sorts = rng.gen_range(1..=shape.sorts);
    for i in 0..n_sorts {
        sys = sys.with_sort(&sort_name(i), rng.gen_range(0..3));
    }
    for i in 0..n_sorts {
        for j in i + 1..n_sorts {
            if rng.gen_bool(0.2) {
                sys = sys.with_subsort(&sort_name(i), &sort_name(j));
            }
        }
    }
    let sorts: Vec<String> = sys.sorts.keys().cloned().collect();
    let n_ctors = rng.gen_range(1..=shape.ctors);
    for i in 0..n_ctors {
        let arity = if i == 0 || rng.gen_bool(0.6) { 0 } else { rng.gen_range(1..=2) };
        let args: Vec<&str> = (0..arity).map(|_| sorts.choose(rng).unwrap().as_str()).collect();
        let result = sorts.choose(rng).unwrap().clone();
        sys = sys.with_ctor(&format!("c{i}"), &args, &result, rng.gen_range(0..3));
    }
    let n_rels = rng.gen_range(1..=shape.rels);
    for i in 0..n_rels {
        let arity = rng.gen_range(1..=2);
        let args: Vec<&str> = (0..arity).map(|_| sorts.choose(rng).unwrap().as_str()).collect();
        let kind = if rng.gen_bool(0.4) { RelKind::Environmental } else { RelKind::Internal };
        sys = sys.with_rel(&format!("r{i}"), &args, kind);
    }
    let pool = ground_terms(&sys, 2);
    for i in 0..rng.gen_range(0..=shape.axioms) {
        if let Some(ax) = random_axiom(rng, &sys, &pool, &format!("a{i}")) {
            let candidate = sys.clone().with_axiom(ax);
            // keep the system consistent: every denial must hold
            if candidate.validate().is_empty()
                && candidate.axioms.values().all(|a| semiosa::entails(&candidate, a).unwrap_or(false))
            {
                sys = candidate;
            }
        }
    }
    debug_assert!(sys.validate().is_empty());
    sys
}

/// Well-sorted ground terms up to `depth` constructor nestings, keyed by
/// their least sort.
pub fn ground_terms(sys: &SignSystem, depth: usize) -> BTreeMap<String, Vec<Term>> {
    let leq = sort_leq(sys);
    let mut by_sort: BTreeMap<String, BTreeSet<Term>> = BTreeMap::new();
    for _ in 0..=depth {
        let snapshot = by_sort.clone();
        for c in sys.ctors.values() {
            let mut choices: Vec<Vec<Term>> = vec![vec![]];
            for a in &c.args {
                let fits: Vec<&Term> = snapshot
                    .iter()
                    .filter(|(s, _)| leq.contains(&((*s).clone(), a.clone())))
                    .flat_map(|(_, ts)| ts.iter())
                    .take(3)
                    .collect();
                choices = choices
                    .into_iter()
                    .flat_map(|prefix| {
                        fits.iter().map(move |t| {
                            let mut p = prefix.clone();
                            p.push((*t).clone());
                            p
                        })
                    })
                    .collect();
            }
            for args in choices.into_iter().take(4) {
                by_sort.entry(c.result.clone()).or_default().insert(Term::App { ctor: c.name.clone(), args });
            }
        }
    }
    by_sort.into_iter().map(|(s, ts)| (s, ts.into_iter().collect())).collect()
}

fn term_of_sort(rng: &mut ChaCha8Rng, leq: &BTreeSet<(String, String)>, pool: &BTreeMap<String, Vec<Term>>, sort: &str) -> Option<Term> {
    let fits: Vec<&Term> = pool
        .iter()
        .filter(|(s, _)| leq.contains(&((*s).clone(), sort.to_string())))
        .flat_map(|(_, ts)| ts.iter())
        .collect();
    fits.choose(rng).map(|t| (*t).clone())
}

fn random_atom(rng: &mut ChaCha8Rng, sys: &SignSystem, pool: &BTreeMap<String, Vec<Term>>, vars: &[&str]) -> Option<Atom> {
    let leq = sort_leq(sys);
    let rels: Vec<&Relation> = sys.rels.values().collect();
    let rel = rels.choose(rng)?;
    let mut args = Vec::new();
    for s in &rel.args {
        if !vars.is_empty() && rng.gen_bool(0.6) {
            args.push(Term::Var(vars.choose(rng).unwrap().to_string()));
        } else {
            args.push(term_of_sort(rng, &leq, pool, s)?);
        }
    }
    Some(Atom::new(rel.name.clone(), args))
}

fn random_axiom(rng: &mut ChaCha8Rng, sys: &SignSystem, pool: &BTreeMap<String, Vec<Term>>, name: &str) -> Option<Axiom> {
    let rank = rng.gen_range(0..4);
    match rng.gen_range(0..10) {
        0..=4 => Some(Axiom::fact(name, rank, random_atom(rng, sys, pool, &[])?)),
        5..=8 => {
            let body: Vec<Atom> =
                (0..rng.gen_range(1..=2)).map(|_| random_atom(rng, sys, pool, &["X", "Y"])).collect::<Option<_>>()?;
            let bound: Vec<String> = body.iter().flat_map(|a| a.vars()).map(String::from).collect();
            let bound: Vec<&str> = bound.iter().map(String::as_str).collect();
            let head = random_atom(rng, sys, pool, &bound)?;
            Some(Axiom::rule(name, rank, body, head))
        }
        _ => {
            let body: Vec<Atom> =
                (0..rng.gen_range(1..=2)).map(|_| random_atom(rng, sys, pool, &["X"])).collect::<Option<_>>()?;
            Some(Axiom::denial(name, rank, body))
        }
    }
}

/// A random part of `sys`: some constructors, relations and axioms are
/// dropped, along with sorts nothing uses any more.
pub fn random_subsystem(rng: &mut ChaCha8Rng, sys: &SignSystem, name: &str) -> SignSystem {
    let mut out = sys.clone();
    out.name = name.into();
    out.ctors.retain(|_, _| rng.gen_bool(0.7));
    out.rels.retain(|_, _| rng.gen_bool(0.7));
    let snapshot = out.clone();
    out.axioms.retain(|_, ax| {
        let (rels, ctors) = SignSystem::axiom_vocabulary(ax);
        rels.iter().all(|r| snapshot.rels.contains_key(r)) && ctors.iter().all(|c| snapshot.ctors.contains_key(c))
    });
    out.axioms.retain(|_, _| rng.gen_bool(0.7));
    let used: BTreeSet<String> = out
        .ctors
        .values()
        .flat_map(|c| c.args.iter().chain([&c.result]))
        .chain(out.rels.values().flat_map(|r| r.args.iter()))
        .cloned()
        .collect();
    let unused: Vec<String> = out.sorts.keys().filter(|s| !used.contains(*s) && rng.gen_bool(0.5)).cloned().collect();
    for s in &unused {
        out.sorts.remove(s);
    }
    out.subsorts.retain(|(a, b)| out.sorts.contains_key(a) && out.sorts.contains_key(b));
    // dropping a middle sort would lose transitive edges
    let keep: BTreeSet<&String> = out.sorts.keys().collect();
    for (a, b) in sort_leq(sys) {
        if a != b && keep.contains(&a) && keep.contains(&b) && !sort_leq(&out).contains(&(a.clone(), b.clone())) {
            out.subsorts.insert((a, b));
        }
    }
    assert!(out.validate().is_empty(), "subsystem of a valid system is valid");
    out
}

/// A copy of `sys` under a new name with every element prefixed.
pub fn prefixed(sys: &SignSystem, name: &str, prefix: &str) -> (SignSystem, SemioticMorphism) {
    let mut m = SemioticMorphism::new(format!("{}_to_{name}", sys.name), sys.name.clone(), name);
    for s in sys.sorts.keys() {
        m = m.sort(s, &format!("{prefix}{s}"));
    }
    for c in sys.ctors.keys() {
        m = m.ctor(c, &format!("{prefix}{c}"));
    }
    for r in sys.rels.keys() {
        m = m.rel(r, &format!("{prefix}{r}"));
    }
    let s = |n: &String| m.sort_image(n).cloned().unwrap_or_else(|| n.clone());
    let mut out = SignSystem::new(name);
    for d in sys.sorts.values() {
        out.sorts.insert(s(&d.name), SortDecl { name: s(&d.name), level: d.level });
    }
    for (a, b) in &sys.subsorts {
        out.subsorts.insert((s(a), s(b)));
    }
    for c in sys.ctors.values() {
        let name = m.ctors[&c.name].clone();
        out.ctors.insert(
            name.clone(),
            Constructor { name, args: c.args.iter().map(s).collect(), result: s(&c.result), priority: c.priority },
        );
    }
    for r in sys.rels.values() {
        let name = m.rels[&r.name].clone();
        out.rels.insert(name.clone(), Relation { name, args: r.args.iter().map(s).collect(), kind: r.kind });
    }
    for ax in sys.axioms.values() {
        out.axioms.insert(ax.name.clone(), m.translate_axiom(ax).expect("total renaming"));
    }
    (out, m)
}

/// A scenario whose components each add one sort, constructor, relation and
/// fact, offering copies of the result (some with every relation made
/// internal) as candidates. Some
/// candidates carry a morphism from the wrong domain and are infeasible.
pub fn random_scenario(rng: &mut ChaCha8Rng, name: &str, steps: usize, seed: u64) -> Scenario {
    let initial = random_system(rng, "Init", Shape::SMALL);
    let mut current = initial.clone();
    let mut components = Vec::new();
    for i in 0..steps {
        let sort = format!("N{i}");
        let ctor = format!("n{i}");
        let rel = format!("q{i}");
        let kind = if rng.gen_bool(0.5) { RelKind::Environmental } else { RelKind::Internal };
        let fstep = FStep {
            div: DivergenceDelta {
                sorts: vec![SortDecl { name: sort.clone(), level: rng.gen_range(0..3) }],
                ctors: vec![Constructor { name: ctor.clone(), args: vec![], result: sort.clone(), priority: 1 }],
                ..Default::default()
            },
            conv: ConvergenceDelta {
                rels: vec![Relation { name: rel.clone(), args: vec![sort.clone()], kind }],
                axioms: vec![Axiom::fact(format!("h{i}"), rng.gen_range(0..3), Atom::new(rel, vec![Term::constant(ctor)]))],
            },
        };
        let (post, _) = semiosa::dynamics::apply_f(&current, &fstep).expect("generated step applies");
        let mut candidates = Vec::new();
        for k in 0..rng.gen_range(1..=3) {
            let mut target = post.clone();
            target.name = format!("T{i}");
            if rng.gen_bool(0.5) {
                for r in target.rels.values_mut() {
                    r.kind = RelKind::Internal;
                }
            }
            let mut m = SemioticMorphism::identity(&post);
            m.name = format!("m{i}_{k}");
            m.to = target.name.clone();
            candidates.push(CandidateTransition {
                label: format!("k{i}_{k}"),
                target,
                morphism: m,
                weight: Ratio::from_integer(rng.gen_range(1..5).into()),
            });
        }
        if rng.gen_bool(0.3) {
            let mut m = SemioticMorphism::identity(&post);
            m.from = "Elsewhere".into();
            m.to = candidates[0].target.name.clone();
            candidates.push(CandidateTransition {
                label: format!("dead{i}"),
                target: candidates[0].target.clone(),
                morphism: m,
                weight: Ratio::from_integer(1.into()),
            });
        }
        // every feasible target equals `post` up to name and relation kinds,
        // so the next step applies whichever is chosen
        current = candidates[0].target.clone();
        components.push(SemioticComponent { fstep, candidates });
    }
    let (gamma_up, gamma_down) = Scenario::default_gammas();
    Scenario { name: name.into(), initial, components, seed, gamma_up, gamma_down }
}

// ---------------------------------------------------------------- oracles

/// Reflexive-transitive closure of the declared subsort edges.
pub fn sort_leq(sys: &SignSystem) -> BTreeSet<(String, String)> {
    let names: Vec<&String> = sys.sorts.keys().chain(sys.data_sorts.keys()).collect();
    let mut leq: BTreeSet<(String, String)> = names.iter().map(|s| ((*s).clone(), (*s).clone())).collect();
    leq.extend(sys.subsorts.iter().cloned());
    loop {
        let mut grew = false;
        let pairs: Vec<_> = leq.iter().cloned().collect();
        for (a, b) in &pairs {
            for (c, d) in &pairs {
                if b == c && leq.insert((a.clone(), d.clone())) {
                    grew = true;
                }
            }
        }
        if !grew {
            return leq;
        }
    }
}

pub fn oracle_sort_of(sys: &SignSystem, leq: &BTreeSet<(String, String)>, t: &Term) -> Option<String> {
    match t {
        Term::Var(_) => None,
        Term::Lit { sort, .. } => sys.data_sorts.contains_key(sort).then(|| sort.clone()),
        Term::App { ctor, args } => {
            let c = sys.ctors.get(ctor)?;
            if c.args.len() != args.len() {
                return None;
            }
            for (a, s) in args.iter().zip(&c.args) {
                let found = oracle_sort_of(sys, leq, a)?;
                if !leq.contains(&(found, s.clone())) {
                    return None;
                }
            }
            Some(c.result.clone())
        }
    }
}

pub fn oracle_well_sorted(sys: &SignSystem, leq: &BTreeSet<(String, String)>, a: &Atom) -> bool {
    let Some(r) = sys.rels.get(&a.rel) else { return false };
    r.args.len() == a.args.len()
        && a.args.iter().zip(&r.args).all(|(t, s)| oracle_sort_of(sys, leq, t).is_some_and(|f| leq.contains(&(f, s.clone()))))
}

fn subterms(t: &Term, out: &mut BTreeSet<Term>) {
    let ground = match t {
        Term::Var(_) => false,
        Term::Lit { .. } => true,
        Term::App { args, .. } => {
            let mut inner = BTreeSet::new();
            args.iter().for_each(|a| subterms(a, &mut inner));
            let all = args.iter().all(|a| inner.contains(a));
            out.extend(inner);
            all
        }
    };
    if ground {
        out.insert(t.clone());
    }
}

/// Ground subterms occurring anywhere in the axioms.
pub fn oracle_universe(sys: &SignSystem) -> BTreeSet<Term> {
    let mut u = BTreeSet::new();
    for ax in sys.axioms.values() {
        for a in axiom_atoms(ax) {
            a.args.iter().for_each(|t| subterms(t, &mut u));
        }
    }
    u
}

pub fn axiom_atoms(ax: &Axiom) -> Vec<&Atom> {
    match &ax.form {
        AxiomForm::Fact(a) => vec![a],
        AxiomForm::Rule { body, head } => body.iter().chain([head]).collect(),
        AxiomForm::Denial { body } => body.iter().collect(),
    }
}

fn instantiate(t: &Term, b: &BTreeMap<String, Term>) -> Term {
    match t {
        Term::Var(v) => b[v].clone(),
        Term::Lit { .. } => t.clone(),
        Term::App { ctor, args } => Term::App { ctor: ctor.clone(), args: args.iter().map(|a| instantiate(a, b)).collect() },
    }
}

fn instantiate_atom(a: &Atom, b: &BTreeMap<String, Term>) -> Atom {
    Atom::new(a.rel.clone(), a.args.iter().map(|t| instantiate(t, b)).collect())
}

fn var_names(atoms: &[&Atom]) -> Vec<String> {
    let mut vs = BTreeSet::new();
    fn walk(t: &Term, vs: &mut BTreeSet<String>) {
        match t {
            Term::Var(v) => {
                vs.insert(v.clone());
            }
            Term::App { args, .. } => args.iter().for_each(|a| walk(a, vs)),
            Term::Lit { .. } => {}
        }
    }
    for a in atoms {
        a.args.iter().for_each(|t| walk(t, &mut vs));
    }
    vs.into_iter().collect()
}

/// Every assignment of `vars` to elements of `universe`.
fn assignments(vars: &[String], universe: &[Term]) -> Vec<BTreeMap<String, Term>> {
    let mut out = vec![BTreeMap::new()];
    for v in vars {
        out = out
            .into_iter()
            .flat_map(|b| {
                universe.iter().map(move |t| {
                    let mut b = b.clone();
                    b.insert(v.clone(), t.clone());
                    b
                })
            })
            .collect();
    }
    out
}

/// Naive least fixpoint: try every rule under every assignment of its
/// variables to universe terms until nothing changes.
pub fn oracle_closure(sys: &SignSystem) -> BTreeSet<Atom> {
    let leq = sort_leq(sys);
    let universe: Vec<Term> = oracle_universe(sys).into_iter().collect();
    let mut model: BTreeSet<Atom> = sys
        .axioms
        .values()
        .filter_map(|ax| match &ax.form {
            AxiomForm::Fact(a) if oracle_well_sorted(sys, &leq, a) => Some(a.clone()),
            _ => None,
        })
        .collect();
    loop {
        let mut fresh = Vec::new();
        for ax in sys.axioms.values() {
            let AxiomForm::Rule { body, head } = &ax.form else { continue };
            let atoms: Vec<&Atom> = body.iter().collect();
            for b in assignments(&var_names(&atoms), &universe) {
                if body.iter().all(|a| model.contains(&instantiate_atom(a, &b))) {
                    let h = instantiate_atom(head, &b);
                    if h.args.iter().all(|t| universe.contains(t)) && oracle_well_sorted(sys, &leq, &h) && !model.contains(&h) {
                        fresh.push(h);
                    }
                }
            }
        }
        if fresh.is_empty() {
            return model;
        }
        model.extend(fresh);
    }
}

pub fn oracle_epsilon(sys: &SignSystem) -> usize {
    oracle_closure(sys)
        .iter()
        .filter(|a| sys.rels.get(&a.rel).is_some_and(|r| r.kind == RelKind::Environmental))
        .count()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TotalMap {
    pub sorts: BTreeMap<String, String>,
    pub ctors: BTreeMap<String, String>,
    pub rels: BTreeMap<String, String>,
}

fn products(keys: &[&String], targets: &[&String]) -> Vec<BTreeMap<String, String>> {
    let mut out = vec![BTreeMap::new()];
    for k in keys {
        out = out
            .into_iter()
            .flat_map(|m| {
                targets.iter().map(move |t| {
                    let mut m = m.clone();
                    m.insert((*k).clone(), (*t).clone());
                    m
                })
            })
            .collect();
    }
    out
}

/// Every total map from `from` to `to` that respects subsorts and
/// signatures, in lexicographic order of the choices made for sorted
/// source names (sorts, then constructors, then relations).
pub fn oracle_total_morphisms(from: &SignSystem, to: &SignSystem) -> Vec<TotalMap> {
    if !from.data_sorts.keys().all(|d| to.data_sorts.contains_key(d)) {
        return vec![];
    }
    let (leq_from, leq_to) = (sort_leq(from), sort_leq(to));
    let img = |m: &BTreeMap<String, String>, s: &String| m.get(s).cloned().unwrap_or_else(|| s.clone());
    let mut out = Vec::new();
    let from_sorts: Vec<&String> = from.sorts.keys().collect();
    let to_sorts: Vec<&String> = to.sorts.keys().collect();
    for sorts in products(&from_sorts, &to_sorts) {
        let subsorts_ok = leq_from
            .iter()
            .filter(|(a, b)| a != b && from.sorts.contains_key(a) && from.sorts.contains_key(b))
            .all(|(a, b)| leq_to.contains(&(sorts[a].clone(), sorts[b].clone())));
        if !subsorts_ok {
            continue;
        }
        let ctor_options: Vec<Vec<&String>> = from
            .ctors
            .values()
            .map(|c| {
                let args: Vec<String> = c.args.iter().map(|s| img(&sorts, s)).collect();
                let result = img(&sorts, &c.result);
                to.ctors.values().filter(|t| t.args == args && t.result == result).map(|t| &t.name).collect()
            })
            .collect();
        let rel_options: Vec<Vec<&String>> = from
            .rels
            .values()
            .map(|r| {
                let args: Vec<String> = r.args.iter().map(|s| img(&sorts, s)).collect();
                to.rels.values().filter(|t| t.args == args).map(|t| &t.name).collect()
            })
            .collect();
        for ctors in choose_each(&from.ctors.keys().collect::<Vec<_>>(), &ctor_options) {
            for rels in choose_each(&from.rels.keys().collect::<Vec<_>>(), &rel_options) {
                out.push(TotalMap { sorts: sorts.clone(), ctors: ctors.clone(), rels });
            }
        }
    }
    out
}

fn choose_each(keys: &[&String], options: &[Vec<&String>]) -> Vec<BTreeMap<String, String>> {
    let mut out = vec![BTreeMap::new()];
    for (k, opts) in keys.iter().zip(options) {
        out = out
            .into_iter()
            .flat_map(|m| {
                opts.iter().map(move |t| {
                    let mut m = m.clone();
                    m.insert((*k).clone(), (*t).clone());
                    m
                })
            })
            .collect();
    }
    out
}

pub fn as_total_map(m: &SemioticMorphism) -> TotalMap {
    TotalMap { sorts: m.sorts.clone(), ctors: m.ctors.clone(), rels: m.rels.clone() }
}
