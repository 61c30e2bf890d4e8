//! Observation through an axiom-preserving morphism and the emergence test
//! `p ∈ E(Ξ) ∧ p ∉ E(Ξ ∩ Ξ′)`, with the deducible/observational split and
//! the three-way source classification.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::entail::{closure, denial_witnesses, GroundModel};
use crate::morphism::{check_properties, find_morphisms, MorphismDiag, Property, SemioticMorphism, Witness};
use crate::system::{Atom, AxiomForm, Name, SignSystem, Term};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EmergenceError {
    #[error("observer `{observer}` is not well-formed on `{system}`: {}", join(.diagnostics))]
    NotWellFormed { observer: Name, system: Name, diagnostics: Vec<MorphismDiag> },
    #[error("observer `{observer}` is not axiom-preserving on `{system}`: {}", join(.witnesses))]
    NotAxiomPreserving { observer: Name, system: Name, witnesses: Vec<Witness> },
    #[error("observation of `{0}` is empty")]
    EmptyObservation(Name),
    #[error("property `{property}` is not expressible in the observed vocabulary: {reason}")]
    UnknownVocabulary { property: String, reason: String },
    #[error("property `{0}` is not emergent")]
    NotEmergent(String),
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// An interpretation operator `E: Ξ -> Ξ_obs` together with its codomain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObserverSpec {
    pub morphism: SemioticMorphism,
    pub codomain: SignSystem,
}

impl ObserverSpec {
    pub fn new(morphism: SemioticMorphism, codomain: SignSystem) -> Self {
        ObserverSpec { morphism, codomain }
    }

    pub fn identity(sys: &SignSystem) -> Self {
        ObserverSpec { morphism: SemioticMorphism::identity(sys), codomain: sys.clone() }
    }

    /// `E(sys)`: the image subsystem of the codomain. The observer is first
    /// restricted to the elements `sys` declares, which is how `E(Ξ ∩ Ξ′)` is
    /// observed with the operator defined on `Ξ`.
    pub fn observe(&self, sys: &SignSystem) -> Result<SignSystem, EmergenceError> {
        let e = self.morphism.restrict_to(sys);
        let report = check_properties(&e, sys, &self.codomain, &[Property::Axiom].into());
        if !report.well_formed {
            return Err(EmergenceError::NotWellFormed {
                observer: e.name,
                system: sys.name.clone(),
                diagnostics: report.diagnostics,
            });
        }
        let axiom = report.axiom.expect("requested");
        if !axiom.holds {
            return Err(EmergenceError::NotAxiomPreserving {
                observer: e.name,
                system: sys.name.clone(),
                witnesses: axiom.witnesses,
            });
        }
        Ok(image(&e, sys, &self.codomain))
    }
}

fn image(e: &SemioticMorphism, sys: &SignSystem, codomain: &SignSystem) -> SignSystem {
    let mut out = SignSystem::new(format!("{}_obs", sys.name));
    for t in e.sorts.values() {
        out.sorts.insert(t.clone(), codomain.sorts[t].clone());
    }
    for t in e.data.values() {
        out.data_sorts.insert(t.clone(), codomain.data_sorts[t].clone());
    }
    let keep: BTreeSet<Name> = out.sorts.keys().cloned().collect();
    out.subsorts = codomain.sort_order().reduced_edges(&keep);
    for t in e.ctors.values() {
        let c = &codomain.ctors[t];
        if c.args.iter().chain([&c.result]).all(|s| out.has_sort_or_data(s)) {
            out.ctors.insert(t.clone(), c.clone());
        }
    }
    for t in e.rels.values() {
        let r = &codomain.rels[t];
        if r.args.iter().all(|s| out.has_sort_or_data(s)) {
            out.rels.insert(t.clone(), r.clone());
        }
    }
    for ax in sys.axioms.values() {
        let Some(t) = e.translate_axiom(ax) else { continue };
        let (rels, ctors) = SignSystem::axiom_vocabulary(&t);
        if rels.iter().all(|r| out.rels.contains_key(r)) && ctors.iter().all(|c| out.ctors.contains_key(c)) {
            out.axioms.insert(t.name.clone(), t);
        }
    }
    out
}

pub fn observe(sys: &SignSystem, e: &ObserverSpec) -> Result<SignSystem, EmergenceError> {
    e.observe(sys)
}

fn check_property(p: &Atom, observed: &SignSystem) -> Result<(), EmergenceError> {
    let fail = |reason: String| EmergenceError::UnknownVocabulary { property: p.to_string(), reason };
    if !p.is_ground() {
        return Err(fail("property must be a ground atom".into()));
    }
    let Some(rel) = observed.rels.get(&p.rel) else {
        return Err(fail(format!("relation `{}` is not observed", p.rel)));
    };
    if rel.args.len() != p.args.len() {
        return Err(fail(format!("`{}` takes {} arguments", p.rel, rel.args.len())));
    }
    fn ctors<'a>(t: &'a Term, out: &mut Vec<&'a Name>) {
        if let Term::App { ctor, args } = t {
            out.push(ctor);
            args.iter().for_each(|a| ctors(a, out));
        }
    }
    let mut used = Vec::new();
    p.args.iter().for_each(|t| ctors(t, &mut used));
    match used.into_iter().find(|c| !observed.ctors.contains_key(*c)) {
        Some(c) => Err(fail(format!("constructor `{c}` is not observed"))),
        None => Ok(()),
    }
}

/// The two closures behind an emergence verdict.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Evidence {
    pub closure_whole: GroundModel,
    pub closure_intersection: GroundModel,
}

fn evidence(p: &Atom, xi: &SignSystem, xi_prime: &SignSystem, e: &ObserverSpec) -> Result<Evidence, EmergenceError> {
    let whole = e.observe(xi)?;
    if whole.is_empty() {
        return Err(EmergenceError::EmptyObservation(xi.name.clone()));
    }
    check_property(p, &whole)?;
    let part = e.observe(&xi.intersect(xi_prime))?;
    Ok(Evidence { closure_whole: closure(&whole), closure_intersection: closure(&part) })
}

impl Evidence {
    pub fn emergent(&self, p: &Atom) -> bool {
        self.closure_whole.contains(p) && !self.closure_intersection.contains(p)
    }
}

/// `p ∈ E(Ξ)` and `p ∉ E(Ξ ∩ Ξ′)`, with closures standing in for membership.
pub fn is_emergent(p: &Atom, xi: &SignSystem, xi_prime: &SignSystem, e: &ObserverSpec) -> Result<bool, EmergenceError> {
    Ok(evidence(p, xi, xi_prime, e)?.emergent(p))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Deducibility {
    Deducible { witness: SemioticMorphism },
    Observational,
}

pub fn classify_deducibility(
    xi: &SignSystem,
    xi_prime: &SignSystem,
    e: &ObserverSpec,
) -> Result<Deducibility, EmergenceError> {
    let a = e.observe(xi)?;
    let b = e.observe(xi_prime)?;
    for (sys, obs) in [(xi, &a), (xi_prime, &b)] {
        if obs.is_empty() {
            return Err(EmergenceError::EmptyObservation(sys.name.clone()));
        }
    }
    Ok(match find_morphisms(&a, &b, &BTreeSet::new(), 1).into_iter().next() {
        Some(witness) => Deducibility::Deducible { witness },
        None => Deducibility::Observational,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Source {
    /// `p` is the observed image of something `Ξ` derives, but not itself in
    /// `Ξ`'s closure.
    Interpretation,
    /// `p` is recovered by intersecting with the named alternative system.
    Process { witness: Name },
    /// `p` cannot be stated in `Ξ`, or stating it violates a top-rank denial.
    Ontology { witness: String },
    Undetermined,
}

/// Attributes an emergent `p` to the interpretation, the process or the
/// ontological assumptions, checked in that order. The ontology case is a
/// heuristic: `p` uses vocabulary `xi` lacks, is ill-sorted there, or would
/// violate one of `xi`'s highest-ranked denials if asserted.
pub fn classify_source(
    p: &Atom,
    xi: &SignSystem,
    xi_prime: &SignSystem,
    e: &ObserverSpec,
    alternatives: &[SignSystem],
) -> Result<Source, EmergenceError> {
    if !is_emergent(p, xi, xi_prime, e)? {
        return Err(EmergenceError::NotEmergent(p.to_string()));
    }
    let base = closure(xi);
    if !base.contains(p) && base.atoms.iter().any(|q| e.morphism.translate_atom(q).as_ref() == Some(p)) {
        return Ok(Source::Interpretation);
    }
    for alt in alternatives {
        let observed = e.observe(&xi.intersect(alt))?;
        if closure(&observed).contains(p) {
            return Ok(Source::Process { witness: alt.name.clone() });
        }
    }
    if let Some(witness) = ontology_conflict(p, xi) {
        return Ok(Source::Ontology { witness });
    }
    Ok(Source::Undetermined)
}

fn ontology_conflict(p: &Atom, xi: &SignSystem) -> Option<String> {
    if !xi.rels.contains_key(&p.rel) {
        return Some(format!("relation `{}` is not declared", p.rel));
    }
    let order = xi.sort_order();
    if !xi.atom_well_sorted(p, &order) {
        return Some(format!("`{p}` is not well-sorted"));
    }
    let top = xi.axioms.values().map(|a| a.rank).max()?;
    let mut asserted = xi.clone();
    let fact = crate::system::Axiom::fact("__property", 0, p.clone());
    asserted.axioms.insert(fact.name.clone(), fact);
    let model = closure(&asserted);
    xi.axioms.values().filter(|a| a.rank == top).find_map(|a| match &a.form {
        AxiomForm::Denial { body } if !denial_witnesses(&model, body).is_empty() => {
            Some(format!("violates denial `{}` (rank {})", a.name, a.rank))
        }
        _ => None,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EmergenceReport {
    pub property: Atom,
    pub emergent: bool,
    pub deducibility: Option<Deducibility>,
    pub source: Option<Source>,
    pub evidence: Evidence,
}

/// Runs the full query. Deducibility and source are only classified for
/// emergent properties.
pub fn analyze(
    p: &Atom,
    xi: &SignSystem,
    xi_prime: &SignSystem,
    e: &ObserverSpec,
    alternatives: &[SignSystem],
) -> Result<EmergenceReport, EmergenceError> {
    let evidence = evidence(p, xi, xi_prime, e)?;
    let emergent = evidence.emergent(p);
    let (deducibility, source) = if emergent {
        (Some(classify_deducibility(xi, xi_prime, e)?), Some(classify_source(p, xi, xi_prime, e, alternatives)?))
    } else {
        (None, None)
    };
    Ok(EmergenceReport { property: p.clone(), emergent, deducibility, source, evidence })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morphism::fixtures::{rename, toy2};
    use crate::system::fixtures::{leaf, pair, toy};
    use crate::system::RelKind;

    fn fits() -> Atom {
        Atom::new("fits", vec![pair(leaf(), leaf())])
    }

    fn toy_without(axioms: &[&str]) -> SignSystem {
        let mut t = toy();
        t.name = "ToyLess".into();
        for a in axioms {
            t.axioms.remove(*a);
        }
        t
    }

    #[test]
    fn observations() {
        let toy = toy();
        assert!(ObserverSpec::identity(&toy).observe(&toy).unwrap().same_elements(&toy));
        let e = ObserverSpec::new(rename(), toy2());
        assert!(e.observe(&toy).unwrap().same_elements(&toy2()));

        let mut partial = rename();
        partial.rels.remove("fits");
        let observed = ObserverSpec::new(partial, toy2()).observe(&toy).unwrap();
        let mut expected = toy2();
        expected.rels.remove("suits");
        expected.axioms.remove("f2");
        assert!(observed.same_elements(&expected));
    }

    #[test]
    fn observer_must_preserve_axioms() {
        let mut target = toy2();
        target.axioms.remove("f1");
        let err = ObserverSpec::new(rename(), target).observe(&toy()).unwrap_err();
        assert!(matches!(err, EmergenceError::NotAxiomPreserving { .. }));
    }

    #[test]
    fn intersection_with_self_is_never_emergent() {
        let toy = toy();
        let e = ObserverSpec::identity(&toy);
        for p in closure(&toy).atoms {
            assert!(!is_emergent(&p, &toy, &toy, &e).unwrap());
        }
    }

    #[test]
    fn toy_fit_is_emergent() {
        let toy = toy();
        let e = ObserverSpec::identity(&toy);
        assert!(is_emergent(&fits(), &toy, &toy_without(&["r1", "f2"]), &e).unwrap());
        let absent = Atom::new("fits", vec![leaf()]);
        assert!(!is_emergent(&absent, &toy, &toy_without(&["r1", "f2"]), &e).unwrap());
        let unknown = Atom::new("glows", vec![leaf()]);
        assert!(matches!(
            is_emergent(&unknown, &toy, &toy, &e),
            Err(EmergenceError::UnknownVocabulary { .. })
        ));
        let empty = SignSystem::new("Void");
        assert!(matches!(
            is_emergent(&fits(), &empty, &empty, &ObserverSpec::identity(&empty)),
            Err(EmergenceError::EmptyObservation(_))
        ));
    }

    #[test]
    fn deducibility() {
        let toy = toy();
        let e = ObserverSpec::identity(&toy);
        match classify_deducibility(&toy, &toy, &e).unwrap() {
            Deducibility::Deducible { witness } => assert_eq!(witness.sorts, SemioticMorphism::identity(&toy).sorts),
            other => panic!("{other:?}"),
        }
        // dropping `pair` leaves no image for it
        let mut thin = toy.clone();
        thin.name = "Thin".into();
        thin.ctors.remove("pair");
        thin.axioms.remove("f2");
        assert_eq!(classify_deducibility(&toy, &thin, &e).unwrap(), Deducibility::Observational);

        let wide = ObserverSpec::new(rename(), toy2());
        match classify_deducibility(&toy, &toy, &wide).unwrap() {
            Deducibility::Deducible { witness } => assert_eq!(witness.ctors.len(), 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sources() {
        let toy = toy();
        let id = ObserverSpec::identity(&toy);
        // an alternative that keeps the derivation recovers p
        let lean = toy_without(&["r1", "f2"]);
        assert_eq!(
            classify_source(&fits(), &toy, &lean, &id, std::slice::from_ref(&toy)).unwrap(),
            Source::Process { witness: "Toy".into() }
        );
        assert!(matches!(classify_source(&fits(), &toy, &toy, &id, &[]), Err(EmergenceError::NotEmergent(_))));

        // touches is observed as the environmental `meets`
        let mut codomain = toy.clone();
        codomain.name = "Seen".into();
        codomain.rels.remove("touches");
        codomain = codomain.with_rel("meets", &["Part", "Part"], RelKind::Environmental);
        codomain.axioms.remove("f1");
        codomain.axioms.remove("r1");
        let meets = |a: Term, b: Term| Atom::new("meets", vec![a, b]);
        codomain = codomain
            .with_axiom(crate::system::Axiom::fact("f1", 1, meets(leaf(), leaf())))
            .with_axiom(crate::system::Axiom::rule(
                "r1",
                2,
                vec![meets(Term::var("X"), Term::var("Y"))],
                meets(Term::var("Y"), Term::var("X")),
            ));
        let mut m = SemioticMorphism::identity(&toy);
        m.to = "Seen".into();
        m.rels.insert("touches".into(), "meets".into());
        let e = ObserverSpec::new(m, codomain);
        let p = meets(leaf(), leaf());
        let prior = toy_without(&["f1"]);
        assert!(is_emergent(&p, &toy, &prior, &e).unwrap());
        assert_eq!(classify_source(&p, &toy, &prior, &e, &[]).unwrap(), Source::Interpretation);
    }

    #[test]
    fn ontology_source_from_merged_sorts() {
        // In `Split`, a rule cannot fire because A is not below B. An observer
        // that merges A and B makes the derived atom appear.
        let split = SignSystem::new("Split")
            .with_sort("A", 0)
            .with_sort("B", 0)
            .with_ctor("a", &[], "A", 0)
            .with_rel("r", &["A"], RelKind::Internal)
            .with_rel("q", &["B"], RelKind::Internal)
            .with_ctor("b", &[], "B", 0)
            .with_axiom(crate::system::Axiom::fact("f", 0, Atom::new("r", vec![Term::constant("a")])))
            .with_axiom(crate::system::Axiom::rule(
                "lift",
                0,
                vec![Atom::new("r", vec![Term::var("X")])],
                Atom::new("q", vec![Term::var("X")]),
            ));
        let merged = SignSystem::new("Merged")
            .with_sort("C", 0)
            .with_ctor("c", &[], "C", 0)
            .with_rel("r2", &["C"], RelKind::Internal)
            .with_rel("q2", &["C"], RelKind::Internal)
            .with_axiom(crate::system::Axiom::fact("f", 0, Atom::new("r2", vec![Term::constant("c")])))
            .with_axiom(crate::system::Axiom::rule(
                "lift",
                0,
                vec![Atom::new("r2", vec![Term::var("X")])],
                Atom::new("q2", vec![Term::var("X")]),
            ));
        let m = SemioticMorphism::new("Merge", "Split", "Merged")
            .sort("A", "C")
            .sort("B", "C")
            .ctor("a", "c")
            .rel("r", "r2")
            .rel("q", "q2");
        let e = ObserverSpec::new(m, merged);
        let p = Atom::new("q2", vec![Term::constant("c")]);
        let mut prior = split.clone();
        prior.name = "Prior".into();
        prior.axioms.remove("lift");
        assert!(is_emergent(&p, &split, &prior, &e).unwrap());
        assert!(matches!(classify_source(&p, &split, &prior, &e, &[]).unwrap(), Source::Ontology { .. }));
    }
}
