//! Analogical reasoning by conceptual blending.
//!
//! The pipeline starts from an initial problem space `Ξ0`, refines it with
//! `f0`, and relates it to a target and a source domain through two
//! morphisms. Target concepts are matched with source concepts, the source
//! is detailed where it has no counterpart, and the blend takes its shape
//! from the source (the mould) and its names from the target (the priming).
//! The blend is finally refined with `f2` and checked against the ranked
//! axioms of the problem specification.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::dynamics::{apply_f, DeltaError, FStep};
use crate::entail::{closure, denial_witnesses, entails_with};
use crate::morphism::{check_properties, compose, Property, PropertyReport, SemioticMorphism};
use crate::system::{Atom, AxiomForm, Constructor, Name, Relation, SignSystem, SortDecl, SortOrder, Violation};

/// Which disjunct of the structural compatibility condition held.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Compatibility {
    Subset,
    Disjoint,
    Incompatible,
}

impl fmt::Display for Compatibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Compatibility::Subset => "subset",
            Compatibility::Disjoint => "disjoint",
            Compatibility::Incompatible => "incompatible",
        })
    }
}

/// `S0 ⊆ S_source` (identical declarations) or `S0 ∩ S_source = ∅` (by name).
pub fn check_compatibility(s0: &[SortDecl], source: &SignSystem) -> Compatibility {
    if s0.iter().all(|d| source.sorts.get(&d.name) == Some(d)) {
        Compatibility::Subset
    } else if s0.iter().all(|d| !source.has_sort_or_data(&d.name)) {
        Compatibility::Disjoint
    } else {
        Compatibility::Incompatible
    }
}

/// The sort fragment `S0` seen from the source: images of the refined
/// initial space's sorts under `μ1′`, carrying their original levels.
pub fn initial_sorts_in_source(xi0: &SignSystem, mu1p: &SemioticMorphism) -> Vec<SortDecl> {
    let mut out: Vec<SortDecl> = mu1p
        .sorts
        .iter()
        .filter_map(|(s, image)| xi0.sorts.get(s).map(|d| SortDecl { name: image.clone(), level: d.level }))
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Pairs of `(target name, source name)`, one-to-one in each category.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Correspondence {
    pub sort_pairs: BTreeMap<Name, Name>,
    pub ctor_pairs: BTreeMap<Name, Name>,
    pub rel_pairs: BTreeMap<Name, Name>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub via: Option<Name>,
}

impl Correspondence {
    pub fn len(&self) -> usize {
        self.sort_pairs.len() + self.ctor_pairs.len() + self.rel_pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// One line per pair: `kind target ~ source`.
    pub fn lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (kind, map) in [("sort", &self.sort_pairs), ("ctor", &self.ctor_pairs), ("rel", &self.rel_pairs)] {
            out.extend(map.iter().map(|(t, s)| format!("{kind} {t} ~ {s}")));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum MatchError {
    #[error("unknown {kind} `{name}` in correspondence")]
    Unknown { kind: &'static str, name: Name },
    #[error("{kind} `{name}` is paired twice")]
    NotOneToOne { kind: &'static str, name: Name },
    #[error("sorts `{target}` and `{counterpart}` share no name and no common supersort")]
    Unrelated { target: Name, counterpart: Name },
    #[error("{kind} `{target}` and `{counterpart}` have incompatible signatures")]
    Signature { kind: &'static str, target: Name, counterpart: Name },
}

/// Sort relatedness over the union of target, source and association.
struct Affinity {
    order: SortOrder,
    names: BTreeSet<Name>,
}

impl Affinity {
    fn new(target: &SignSystem, source: &SignSystem, via: Option<&SignSystem>) -> Self {
        let mut names = BTreeSet::new();
        let mut edges = BTreeSet::new();
        for sys in [Some(target), Some(source), via].into_iter().flatten() {
            names.extend(sys.sorts.keys().cloned());
            edges.extend(sys.subsorts.iter().cloned());
        }
        let order = SortOrder::new(names.iter().map(String::as_str), &edges);
        Affinity { order, names }
    }

    fn related(&self, a: &str, b: &str) -> bool {
        a == b || self.names.iter().any(|s| self.order.leq(a, s) && self.order.leq(b, s))
    }
}

struct Matcher<'a> {
    target: &'a SignSystem,
    source: &'a SignSystem,
    affinity: Affinity,
    pinned: &'a Correspondence,
}

impl Matcher<'_> {
    /// Whether target sort `t` is matched to source sort `s` under `sorts`;
    /// data sorts must coincide.
    fn sort_ok(&self, sorts: &BTreeMap<Name, Name>, t: &str, s: &str) -> bool {
        if self.target.data_sorts.contains_key(t) || self.source.data_sorts.contains_key(s) {
            return t == s && self.target.data_sorts.contains_key(t) && self.source.data_sorts.contains_key(s);
        }
        sorts.get(t).is_some_and(|x| x == s)
    }

    fn ctor_ok(&self, sorts: &BTreeMap<Name, Name>, t: &Constructor, s: &Constructor) -> bool {
        t.args.len() == s.args.len()
            && self.sort_ok(sorts, &t.result, &s.result)
            && t.args.iter().zip(&s.args).all(|(a, b)| self.sort_ok(sorts, a, b))
    }

    fn rel_ok(&self, sorts: &BTreeMap<Name, Name>, t: &Relation, s: &Relation) -> bool {
        t.args.len() == s.args.len() && t.args.iter().zip(&s.args).all(|(a, b)| self.sort_ok(sorts, a, b))
    }

    fn sort_candidates(&self, t: &str, used: &BTreeSet<Name>) -> Vec<Name> {
        if let Some(p) = self.pinned.sort_pairs.get(t) {
            return vec![p.clone()];
        }
        let pinned_sources: BTreeSet<&Name> = self.pinned.sort_pairs.values().collect();
        self.source
            .sorts
            .keys()
            .filter(|s| !used.contains(*s) && !pinned_sources.contains(s) && self.affinity.related(t, s))
            .cloned()
            .collect()
    }

    /// Best assignment for one category of signed elements given the sort
    /// pairing: maximum size, then lexicographically least.
    fn best_pairs<T>(
        &self,
        targets: &[(&Name, &T)],
        sources: &BTreeMap<Name, T>,
        pinned: &BTreeMap<Name, Name>,
        ok: &dyn Fn(&T, &T) -> bool,
    ) -> BTreeMap<Name, Name> {
        fn go<T>(
            i: usize,
            targets: &[(&Name, &T)],
            sources: &BTreeMap<Name, T>,
            pinned: &BTreeMap<Name, Name>,
            ok: &dyn Fn(&T, &T) -> bool,
            used: &mut BTreeSet<Name>,
            cur: &mut BTreeMap<Name, Name>,
            best: &mut Option<BTreeMap<Name, Name>>,
        ) {
            let best_len = best.as_ref().map_or(0, |b| b.len());
            if best.is_some() && cur.len() + (targets.len() - i) <= best_len {
                return;
            }
            if i == targets.len() {
                *best = Some(cur.clone());
                return;
            }
            let (tn, tv) = targets[i];
            let pinned_sources: BTreeSet<&Name> = pinned.values().collect();
            let candidates: Vec<&Name> = match pinned.get(tn) {
                Some(p) => vec![p],
                None => sources
                    .iter()
                    .filter(|(sn, sv)| !used.contains(*sn) && !pinned_sources.contains(sn) && ok(tv, sv))
                    .map(|(sn, _)| sn)
                    .collect(),
            };
            for sn in candidates {
                used.insert(sn.clone());
                cur.insert(tn.clone(), sn.clone());
                go(i + 1, targets, sources, pinned, ok, used, cur, best);
                cur.remove(tn);
                used.remove(sn);
            }
            if !pinned.contains_key(tn) {
                go(i + 1, targets, sources, pinned, ok, used, cur, best);
            }
        }
        let mut best = None;
        go(0, targets, sources, pinned, ok, &mut BTreeSet::new(), &mut BTreeMap::new(), &mut best);
        best.unwrap_or_default()
    }

    fn complete(&self, sorts: &BTreeMap<Name, Name>) -> Correspondence {
        let ctors: Vec<_> = self.target.ctors.iter().collect();
        let rels: Vec<_> = self.target.rels.iter().collect();
        Correspondence {
            sort_pairs: sorts.clone(),
            ctor_pairs: self.best_pairs(&ctors, &self.source.ctors, &self.pinned.ctor_pairs, &|t, s| {
                self.ctor_ok(sorts, t, s)
            }),
            rel_pairs: self.best_pairs(&rels, &self.source.rels, &self.pinned.rel_pairs, &|t, s| {
                self.rel_ok(sorts, t, s)
            }),
            via: None,
        }
    }

    fn search(
        &self,
        i: usize,
        targets: &[&Name],
        used: &mut BTreeSet<Name>,
        cur: &mut BTreeMap<Name, Name>,
        best: &mut Option<Correspondence>,
    ) {
        let bound = cur.len() + (targets.len() - i) + self.target.ctors.len() + self.target.rels.len();
        if best.as_ref().is_some_and(|b| bound <= b.len()) {
            return;
        }
        if i == targets.len() {
            let c = self.complete(cur);
            if best.as_ref().map_or(true, |b| c.len() > b.len()) {
                *best = Some(c);
            }
            return;
        }
        let t = targets[i];
        for s in self.sort_candidates(t, used) {
            used.insert(s.clone());
            cur.insert(t.clone(), s.clone());
            self.search(i + 1, targets, used, cur, best);
            cur.remove(t);
            used.remove(&s);
        }
        if !self.pinned.sort_pairs.contains_key(t) {
            self.search(i + 1, targets, used, cur, best);
        }
    }
}

/// Maximum correspondence between `target` and `source`.
///
/// Sorts pair when they share a name or a common named supersort in the
/// union of the three subsort graphs; constructors and relations pair when
/// their arities agree and their argument and result sorts are paired (data
/// sorts must be identical). Among maximum correspondences the one that is
/// lexicographically least over the sorted target names wins.
pub fn match_analogue(target: &SignSystem, source: &SignSystem, via: Option<&SignSystem>) -> Correspondence {
    match_with_pins(target, source, via, &Correspondence::default())
        .expect("an empty set of pins is always consistent")
}

/// Like [`match_analogue`] but every pair in `pinned` is kept; the rest is
/// completed maximally.
pub fn match_with_pins(
    target: &SignSystem,
    source: &SignSystem,
    via: Option<&SignSystem>,
    pinned: &Correspondence,
) -> Result<Correspondence, MatchError> {
    let affinity = Affinity::new(target, source, via);
    check_pins(target, source, &affinity, pinned)?;
    let matcher = Matcher { target, source, affinity, pinned };
    let targets: Vec<&Name> = target.sorts.keys().collect();
    let mut best = None;
    matcher.search(0, &targets, &mut BTreeSet::new(), &mut BTreeMap::new(), &mut best);
    let mut out = best.unwrap_or_default();
    if out.ctor_pairs.len() < pinned.ctor_pairs.len() || out.rel_pairs.len() < pinned.rel_pairs.len() {
        // A pinned constructor or relation could not be placed.
        let (kind, map, found) = if out.ctor_pairs.len() < pinned.ctor_pairs.len() {
            ("ctor", &pinned.ctor_pairs, &out.ctor_pairs)
        } else {
            ("rel", &pinned.rel_pairs, &out.rel_pairs)
        };
        let (t, s) = map.iter().find(|(t, _)| !found.contains_key(*t)).expect("a pin is missing");
        return Err(MatchError::Signature { kind, target: t.clone(), counterpart: s.clone() });
    }
    out.via = via.map(|v| v.name.clone());
    Ok(out)
}

fn check_pins(
    target: &SignSystem,
    source: &SignSystem,
    affinity: &Affinity,
    pinned: &Correspondence,
) -> Result<(), MatchError> {
    let categories: [(&'static str, &BTreeMap<Name, Name>, &dyn Fn(&str) -> bool, &dyn Fn(&str) -> bool); 3] = [
        ("sort", &pinned.sort_pairs, &|n| target.sorts.contains_key(n), &|n| source.sorts.contains_key(n)),
        ("ctor", &pinned.ctor_pairs, &|n| target.ctors.contains_key(n), &|n| source.ctors.contains_key(n)),
        ("rel", &pinned.rel_pairs, &|n| target.rels.contains_key(n), &|n| source.rels.contains_key(n)),
    ];
    for (kind, map, in_target, in_source) in categories {
        let mut seen = BTreeSet::new();
        for (t, s) in map {
            if !in_target(t) {
                return Err(MatchError::Unknown { kind, name: t.clone() });
            }
            if !in_source(s) {
                return Err(MatchError::Unknown { kind, name: s.clone() });
            }
            if !seen.insert(s) {
                return Err(MatchError::NotOneToOne { kind, name: s.clone() });
            }
        }
    }
    for (t, s) in &pinned.sort_pairs {
        if !affinity.related(t, s) {
            return Err(MatchError::Unrelated { target: t.clone(), counterpart: s.clone() });
        }
    }
    Ok(())
}

/// An element added to the source because the target had no counterpart.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Stub {
    pub kind: &'static str,
    pub name: Name,
    pub for_target: Name,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum BlendError {
    #[error("NameClash: {kind} `{name}`")]
    NameClash { kind: &'static str, name: Name },
    #[error("InvalidResult: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidResult(Vec<Violation>),
    #[error("PropertyViolation: {morphism} fails {}", .failed.join(", "))]
    PropertyViolation { morphism: Name, failed: Vec<String>, report: Box<PropertyReport> },
}

const STUB: &str = "stub_";

/// Adds a stub to `source` for every target element `corr` leaves unpaired
/// and extends `corr` to pair it. Data sorts used by the target are copied
/// verbatim, and target subsort edges are carried over so that the order
/// among paired sorts is available in the source.
pub fn detail_source(
    source: &SignSystem,
    target: &SignSystem,
    corr: &Correspondence,
) -> Result<(SignSystem, Correspondence, Vec<Stub>), BlendError> {
    let mut out = source.clone();
    let mut corr = corr.clone();
    let mut stubs = Vec::new();
    let clash = |kind, name: &Name| BlendError::NameClash { kind, name: name.clone() };

    for d in target.data_sorts.values() {
        if !out.data_sorts.contains_key(&d.name) {
            if out.sorts.contains_key(&d.name) {
                return Err(clash("data", &d.name));
            }
            out.data_sorts.insert(d.name.clone(), d.clone());
            stubs.push(Stub { kind: "data", name: d.name.clone(), for_target: d.name.clone() });
        }
    }
    for d in target.sorts.values() {
        if corr.sort_pairs.contains_key(&d.name) {
            continue;
        }
        let name = format!("{STUB}{}", d.name);
        if out.has_sort_or_data(&name) {
            return Err(clash("sort", &name));
        }
        out.sorts.insert(name.clone(), SortDecl { name: name.clone(), level: d.level });
        corr.sort_pairs.insert(d.name.clone(), name.clone());
        stubs.push(Stub { kind: "sort", name, for_target: d.name.clone() });
    }
    let map = |s: &Name| corr.sort_pairs.get(s).cloned().unwrap_or_else(|| s.clone());
    let order = out.sort_order();
    let mut edges = Vec::new();
    for (a, b) in &target.subsorts {
        let (ma, mb) = (map(a), map(b));
        if !order.leq(&ma, &mb) {
            edges.push((ma, mb));
        }
    }
    out.subsorts.extend(edges);

    for c in target.ctors.values() {
        if corr.ctor_pairs.contains_key(&c.name) {
            continue;
        }
        let name = format!("{STUB}{}", c.name);
        if out.ctors.contains_key(&name) {
            return Err(clash("ctor", &name));
        }
        let decl = Constructor {
            name: name.clone(),
            args: c.args.iter().map(map).collect(),
            result: map(&c.result),
            priority: c.priority,
        };
        out.ctors.insert(name.clone(), decl);
        corr.ctor_pairs.insert(c.name.clone(), name.clone());
        stubs.push(Stub { kind: "ctor", name, for_target: c.name.clone() });
    }
    for r in target.rels.values() {
        if corr.rel_pairs.contains_key(&r.name) {
            continue;
        }
        let name = format!("{STUB}{}", r.name);
        if out.rels.contains_key(&name) {
            return Err(clash("rel", &name));
        }
        let decl = Relation { name: name.clone(), args: r.args.iter().map(map).collect(), kind: r.kind };
        out.rels.insert(name.clone(), decl);
        corr.rel_pairs.insert(r.name.clone(), name.clone());
        stubs.push(Stub { kind: "rel", name, for_target: r.name.clone() });
    }
    let v = out.validate();
    if !v.is_empty() {
        return Err(BlendError::InvalidResult(v));
    }
    Ok((out, corr, stubs))
}

/// The blend and its two incoming morphisms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Blend {
    pub system: SignSystem,
    pub mu2: SemioticMorphism,
    pub mu2p: SemioticMorphism,
}

fn invert(m: &BTreeMap<Name, Name>) -> BTreeMap<Name, Name> {
    m.iter().map(|(t, s)| (s.clone(), t.clone())).collect()
}

/// Builds the blend from a correspondence that is total on the target.
///
/// Every pair becomes one element named after the target element and
/// shaped like the source element; unpaired source elements are copied.
/// Source axioms are translated into the blend (renamed with `src_` when a
/// target axiom already uses the name) and target axioms are ranked above
/// all of them, keeping the order within each group.
pub fn construct_blend(
    name: &str,
    target: &SignSystem,
    source: &SignSystem,
    corr: &Correspondence,
) -> Result<Blend, BlendError> {
    for (kind, pairs, decls) in [
        ("sort", &corr.sort_pairs, target.sorts.keys().collect::<Vec<_>>()),
        ("ctor", &corr.ctor_pairs, target.ctors.keys().collect()),
        ("rel", &corr.rel_pairs, target.rels.keys().collect()),
    ] {
        if let Some(missing) = decls.into_iter().find(|n| !pairs.contains_key(*n)) {
            return Err(BlendError::NameClash { kind, name: format!("{missing} (unpaired)") });
        }
    }

    // ρ: source names to blend names.
    let rho_of = |pairs: &BTreeMap<Name, Name>, own: Vec<&Name>, taken: &dyn Fn(&str) -> bool, kind| {
        let inv = invert(pairs);
        let mut rho = BTreeMap::new();
        for s in own {
            let image = match inv.get(s) {
                Some(t) => t.clone(),
                None if taken(s) => return Err(BlendError::NameClash { kind, name: s.clone() }),
                None => s.clone(),
            };
            rho.insert(s.clone(), image);
        }
        Ok(rho)
    };
    let sort_rho = rho_of(&corr.sort_pairs, source.sorts.keys().collect(), &|n| target.has_sort_or_data(n), "sort")?;
    let ctor_rho = rho_of(&corr.ctor_pairs, source.ctors.keys().collect(), &|n| target.ctors.contains_key(n), "ctor")?;
    let rel_rho = rho_of(&corr.rel_pairs, source.rels.keys().collect(), &|n| target.rels.contains_key(n), "rel")?;
    for d in source.data_sorts.keys() {
        if target.sorts.contains_key(d) {
            return Err(BlendError::NameClash { kind: "data", name: d.clone() });
        }
    }

    let mu2p = SemioticMorphism {
        name: format!("{}_to_{name}", source.name),
        from: source.name.clone(),
        to: name.to_string(),
        sorts: sort_rho.clone(),
        data: source.data_sorts.keys().map(|d| (d.clone(), d.clone())).collect(),
        ctors: ctor_rho.clone(),
        rels: rel_rho.clone(),
    };
    let identity = |keys: Vec<&Name>| keys.into_iter().map(|k| (k.clone(), k.clone())).collect();
    let mu2 = SemioticMorphism {
        name: format!("{}_to_{name}", target.name),
        from: target.name.clone(),
        to: name.to_string(),
        sorts: identity(target.sorts.keys().collect()),
        data: identity(target.data_sorts.keys().collect()),
        ctors: identity(target.ctors.keys().collect()),
        rels: identity(target.rels.keys().collect()),
    };

    let mut blend = SignSystem::new(name);
    let r = |s: &Name| sort_rho.get(s).cloned().unwrap_or_else(|| s.clone());
    for d in source.sorts.values() {
        blend.sorts.insert(r(&d.name), SortDecl { name: r(&d.name), level: d.level });
    }
    blend.data_sorts = source.data_sorts.clone();
    blend.subsorts = source.subsorts.iter().map(|(a, b)| (r(a), r(b))).collect();
    for c in source.ctors.values() {
        let n = ctor_rho[&c.name].clone();
        let decl = Constructor { name: n.clone(), args: c.args.iter().map(r).collect(), result: r(&c.result), priority: c.priority };
        blend.ctors.insert(n, decl);
    }
    for rel in source.rels.values() {
        let n = rel_rho[&rel.name].clone();
        blend.rels.insert(n.clone(), Relation { name: n, args: rel.args.iter().map(r).collect(), kind: rel.kind });
    }
    let offset = source.axioms.values().map(|a| a.rank + 1).max().unwrap_or(0);
    for ax in source.axioms.values() {
        let mut t = mu2p.translate_axiom(ax).expect("mu2p is total on the source");
        if target.axioms.contains_key(&t.name) {
            t.name = format!("src_{}", t.name);
            if target.axioms.contains_key(&t.name) {
                return Err(BlendError::NameClash { kind: "axiom", name: t.name });
            }
        }
        blend.axioms.insert(t.name.clone(), t);
    }
    for ax in target.axioms.values() {
        let mut t = ax.clone();
        t.rank += offset;
        blend.axioms.insert(t.name.clone(), t);
    }
    let v = blend.validate();
    if !v.is_empty() {
        return Err(BlendError::InvalidResult(v));
    }

    require(&mu2, target, &blend, &[Property::Axiom])?;
    require(&mu2p, source, &blend, &[Property::Level, Property::Priority])?;
    Ok(Blend { system: blend, mu2, mu2p })
}

fn require(m: &SemioticMorphism, from: &SignSystem, to: &SignSystem, props: &[Property]) -> Result<(), BlendError> {
    let report = check_properties(m, from, to, &props.iter().copied().collect());
    if report.passed() {
        return Ok(());
    }
    let mut failed: Vec<String> = report.diagnostics.iter().map(ToString::to_string).collect();
    for p in props {
        if let Some(check) = report.get(*p) {
            failed.extend(check.witnesses.iter().map(|w| format!("{p}: {w}")));
        }
    }
    Err(BlendError::PropertyViolation { morphism: m.name.clone(), failed, report: Box::new(report) })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum VerdictStatus {
    Holds,
    Fails {
        /// Body instances for a violated denial; empty for other forms.
        witnesses: Vec<Vec<Atom>>,
    },
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub axiom: Name,
    pub rank: u32,
    #[serde(flatten)]
    pub status: VerdictStatus,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (rank {}): ", self.axiom, self.rank)?;
        match &self.status {
            VerdictStatus::Holds => f.write_str("holds"),
            VerdictStatus::Skipped => f.write_str("skipped"),
            VerdictStatus::Fails { witnesses } if witnesses.is_empty() => f.write_str("fails"),
            VerdictStatus::Fails { witnesses } => {
                let w: Vec<String> = witnesses[0].iter().map(ToString::to_string).collect();
                write!(f, "fails, e.g. {}", w.join(", "))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Reinterpretation {
    pub system: SignSystem,
    pub verdicts: Vec<Verdict>,
    pub accepted: bool,
}

/// Applies `f2` to the blend and checks each axiom of `xi0`, highest rank
/// first, along `path`. Only failures at or above `threshold` reject.
pub fn reinterpret(
    blend: &SignSystem,
    f2: Option<&FStep>,
    xi0: &SignSystem,
    path: &SemioticMorphism,
    threshold: u32,
) -> Result<Reinterpretation, DeltaError> {
    let system = match f2 {
        Some(f) => apply_f(blend, f)?.0,
        None => blend.clone(),
    };
    let model = closure(&system);
    let mut axioms: Vec<_> = xi0.axioms.values().collect();
    axioms.sort_by(|a, b| b.rank.cmp(&a.rank).then_with(|| a.name.cmp(&b.name)));
    let verdicts: Vec<Verdict> = axioms
        .into_iter()
        .map(|ax| {
            let status = match path.translate_axiom(ax) {
                None => VerdictStatus::Skipped,
                Some(t) if entails_with(&system, &model, &t).unwrap_or(false) => VerdictStatus::Holds,
                Some(t) => VerdictStatus::Fails {
                    witnesses: match &t.form {
                        AxiomForm::Denial { body } => denial_witnesses(&model, body),
                        _ => Vec::new(),
                    },
                },
            };
            Verdict { axiom: ax.name.clone(), rank: ax.rank, status }
        })
        .collect();
    let accepted = verdicts
        .iter()
        .all(|v| v.rank < threshold || !matches!(v.status, VerdictStatus::Fails { .. }));
    Ok(Reinterpretation { system, verdicts, accepted })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MatchMode {
    Auto,
    /// Pairs that must appear; the rest is matched automatically.
    Explicit(Correspondence),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlendInput {
    pub name: Name,
    pub xi0: SignSystem,
    pub f0: Option<FStep>,
    pub target: SignSystem,
    pub source: SignSystem,
    pub mu1: SemioticMorphism,
    pub mu1p: SemioticMorphism,
    pub f1_target: Option<FStep>,
    pub f1_source: Option<FStep>,
    pub f2: Option<FStep>,
    pub match_mode: MatchMode,
    pub via: Option<SignSystem>,
    pub rank_threshold: u32,
}

/// The four stages of the pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Search,
    Matching,
    Blending,
    Reinterpretation,
}

impl Stage {
    pub fn number(self) -> u8 {
        self as u8 + 1
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Search => "search",
            Stage::Matching => "matching",
            Stage::Blending => "blending",
            Stage::Reinterpretation => "reinterpretation",
        };
        write!(f, "stage {} ({name})", self.number())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum StageFailure {
    #[error("{step}: {source}")]
    Delta { step: &'static str, source: DeltaError },
    #[error("{morphism} fails {}", .failed.join(", "))]
    Morphism { morphism: Name, failed: Vec<String> },
    #[error("structurally incompatible: initial sorts {} are neither included in nor disjoint from the source", .s0.join(", "))]
    Incompatible { s0: Vec<String> },
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error(transparent)]
    Blend(#[from] BlendError),
    #[error("{0}")]
    Path(String),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("blend `{blend}` aborted at {stage}: {failure}")]
pub struct PipelineError {
    pub blend: Name,
    pub stage: Stage,
    pub failure: StageFailure,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlendReport {
    pub name: Name,
    pub blend: SignSystem,
    pub mu2: SemioticMorphism,
    pub mu2p: SemioticMorphism,
    pub compatibility: Compatibility,
    pub correspondence: Correspondence,
    /// Pairs found by matching, before detailing.
    pub matched: Vec<String>,
    pub detailing_stubs: Vec<Stub>,
    pub reinterpretation: Vec<Verdict>,
    pub accepted: bool,
}

/// Runs search, analogue matching, blending and reinterpretation in order.
pub fn run_pipeline(input: &BlendInput) -> Result<BlendReport, PipelineError> {
    let fail = |stage, failure| PipelineError { blend: input.name.clone(), stage, failure };
    let delta = |step| move |source| StageFailure::Delta { step, source };
    let apply = |sys: &SignSystem, f: &Option<FStep>, step, stage| match f {
        Some(f) => apply_f(sys, f).map(|r| r.0).map_err(|e| fail(stage, delta(step)(e))),
        None => Ok(sys.clone()),
    };

    // 1. Search: refine the problem and relate it to both domains.
    let xi0f = apply(&input.xi0, &input.f0, "f0", Stage::Search)?;
    for (m, cod, props) in [
        (&input.mu1, &input.target, &[Property::Axiom][..]),
        (&input.mu1p, &input.source, &[Property::Level, Property::Priority][..]),
    ] {
        if let Err(BlendError::PropertyViolation { morphism, failed, .. }) = require(m, &xi0f, cod, props) {
            return Err(fail(Stage::Search, StageFailure::Morphism { morphism, failed }));
        }
    }

    // 2. Analogue matching.
    let s0 = initial_sorts_in_source(&xi0f, &input.mu1p);
    let compatibility = check_compatibility(&s0, &input.source);
    if compatibility == Compatibility::Incompatible {
        let s0 = s0.iter().map(|d| format!("{} level {}", d.name, d.level)).collect();
        return Err(fail(Stage::Matching, StageFailure::Incompatible { s0 }));
    }
    let target = apply(&input.target, &input.f1_target, "f1 target", Stage::Matching)?;
    let source = apply(&input.source, &input.f1_source, "f1 source", Stage::Matching)?;
    let pins = match &input.match_mode {
        MatchMode::Auto => Correspondence::default(),
        MatchMode::Explicit(c) => c.clone(),
    };
    let corr = match_with_pins(&target, &source, input.via.as_ref(), &pins)
        .map_err(|e| fail(Stage::Matching, e.into()))?;
    let matched = corr.lines();
    let (source, corr, stubs) = detail_source(&source, &target, &corr).map_err(|e| fail(Stage::Matching, e.into()))?;

    // 3. Blending.
    let blend = construct_blend(&input.name, &target, &source, &corr).map_err(|e| fail(Stage::Blending, e.into()))?;

    // 4. Reinterpretation against the refined problem specification.
    let path = compose(&input.mu1, &blend.mu2)
        .map_err(|e| fail(Stage::Reinterpretation, StageFailure::Path(e.to_string())))?;
    let r = reinterpret(&blend.system, input.f2.as_ref(), &xi0f, &path, input.rank_threshold)
        .map_err(|e| fail(Stage::Reinterpretation, delta("f2")(e)))?;

    Ok(BlendReport {
        name: input.name.clone(),
        blend: r.system,
        mu2: blend.mu2,
        mu2p: blend.mu2p,
        compatibility,
        correspondence: corr,
        matched,
        detailing_stubs: stubs,
        reinterpretation: r.verdicts,
        accepted: r.accepted,
    })
}
