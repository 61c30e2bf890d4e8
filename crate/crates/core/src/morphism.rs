//! Semiotic morphisms: partial, structure-preserving translations between
//! sign systems, their preservation properties, composition and exhaustive
//! search.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::emergence::{EmergenceError, ObserverSpec};
use crate::entail::{closure, entails_with, epsilon_of};
use crate::system::{Atom, Axiom, AxiomForm, Name, SignSystem, SortOrder, Term};

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SemioticMorphism {
    pub name: Name,
    pub from: Name,
    pub to: Name,
    pub sorts: BTreeMap<Name, Name>,
    pub data: BTreeMap<Name, Name>,
    pub ctors: BTreeMap<Name, Name>,
    pub rels: BTreeMap<Name, Name>,
}

impl SemioticMorphism {
    pub fn new(name: impl Into<Name>, from: impl Into<Name>, to: impl Into<Name>) -> Self {
        SemioticMorphism { name: name.into(), from: from.into(), to: to.into(), ..Default::default() }
    }

    /// The identity on every element of `sys`.
    pub fn identity(sys: &SignSystem) -> Self {
        let id = |m: Vec<&Name>| m.into_iter().map(|k| (k.clone(), k.clone())).collect();
        SemioticMorphism {
            name: format!("id_{}", sys.name),
            from: sys.name.clone(),
            to: sys.name.clone(),
            sorts: id(sys.sorts.keys().collect()),
            data: id(sys.data_sorts.keys().collect()),
            ctors: id(sys.ctors.keys().collect()),
            rels: id(sys.rels.keys().collect()),
        }
    }

    pub fn sort(mut self, a: &str, b: &str) -> Self {
        self.sorts.insert(a.into(), b.into());
        self
    }

    pub fn data_sort(mut self, a: &str) -> Self {
        self.data.insert(a.into(), a.into());
        self
    }

    pub fn ctor(mut self, a: &str, b: &str) -> Self {
        self.ctors.insert(a.into(), b.into());
        self
    }

    pub fn rel(mut self, a: &str, b: &str) -> Self {
        self.rels.insert(a.into(), b.into());
        self
    }

    /// Number of defined mappings across all categories.
    pub fn size(&self) -> usize {
        self.sorts.len() + self.data.len() + self.ctors.len() + self.rels.len()
    }

    /// Image of a sort or data sort name.
    pub fn sort_image(&self, s: &str) -> Option<&Name> {
        self.sorts.get(s).or_else(|| self.data.get(s))
    }

    pub fn translate_term(&self, t: &Term) -> Option<Term> {
        Some(match t {
            Term::Var(_) => t.clone(),
            Term::Lit { sort, value } => Term::Lit { sort: self.data.get(sort)?.clone(), value: value.clone() },
            Term::App { ctor, args } => Term::App {
                ctor: self.ctors.get(ctor)?.clone(),
                args: args.iter().map(|a| self.translate_term(a)).collect::<Option<_>>()?,
            },
        })
    }

    pub fn translate_atom(&self, a: &Atom) -> Option<Atom> {
        Some(Atom {
            rel: self.rels.get(&a.rel)?.clone(),
            args: a.args.iter().map(|t| self.translate_term(t)).collect::<Option<_>>()?,
        })
    }

    pub fn translate_axiom(&self, ax: &Axiom) -> Option<Axiom> {
        let atoms = |v: &[Atom]| v.iter().map(|a| self.translate_atom(a)).collect::<Option<Vec<_>>>();
        let form = match &ax.form {
            AxiomForm::Fact(a) => AxiomForm::Fact(self.translate_atom(a)?),
            AxiomForm::Rule { body, head } => AxiomForm::Rule { body: atoms(body)?, head: self.translate_atom(head)? },
            AxiomForm::Denial { body } => AxiomForm::Denial { body: atoms(body)? },
        };
        Some(Axiom { name: ax.name.clone(), rank: ax.rank, form })
    }

    /// Keeps only the mappings whose source element is declared in `sys`,
    /// re-rooting the morphism at `sys`.
    pub fn restrict_to(&self, sys: &SignSystem) -> SemioticMorphism {
        let keep = |m: &BTreeMap<Name, Name>, dom: &dyn Fn(&str) -> bool| {
            m.iter().filter(|(k, _)| dom(k)).map(|(k, v)| (k.clone(), v.clone())).collect()
        };
        SemioticMorphism {
            name: self.name.clone(),
            from: sys.name.clone(),
            to: self.to.clone(),
            sorts: keep(&self.sorts, &|k| sys.sorts.contains_key(k)),
            data: keep(&self.data, &|k| sys.data_sorts.contains_key(k)),
            ctors: keep(&self.ctors, &|k| sys.ctors.contains_key(k)),
            rels: keep(&self.rels, &|k| sys.rels.contains_key(k)),
        }
    }
}

impl fmt::Display for SemioticMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} : {} -> {} {{", self.name, self.from, self.to)?;
        let mut first = true;
        for (kind, map) in [("sort", &self.sorts), ("data", &self.data), ("ctor", &self.ctors), ("rel", &self.rels)] {
            for (a, b) in map {
                f.write_str(if first { " " } else { "; " })?;
                first = false;
                write!(f, "{kind} {a} -> {b}")?;
            }
        }
        f.write_str(" }")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Property {
    Level,
    Priority,
    Axiom,
    Natural,
}

impl Property {
    pub const ALL: [Property; 4] = [Property::Level, Property::Priority, Property::Axiom, Property::Natural];
}

impl FromStr for Property {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "level" => Ok(Property::Level),
            "priority" => Ok(Property::Priority),
            "axiom" => Ok(Property::Axiom),
            "natural" => Ok(Property::Natural),
            other => Err(format!("unknown property `{other}` (expected level, priority, axiom or natural)")),
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Property::Level => "level",
            Property::Priority => "priority",
            Property::Axiom => "axiom",
            Property::Natural => "natural",
        })
    }
}

/// Well-formedness failures of a morphism.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "code")]
pub enum MorphismDiag {
    DomainName { expected: Name, found: Name },
    CodomainName { expected: Name, found: Name },
    UnknownSource { kind: &'static str, name: Name },
    UnknownTarget { kind: &'static str, name: Name },
    DataNotIdentity { from: Name, to: Name },
    SubsortBroken { sub: Name, sup: Name },
    SignatureMismatch { kind: &'static str, from: Name, to: Name, expected: String },
}

impl MorphismDiag {
    pub fn code(&self) -> &'static str {
        match self {
            MorphismDiag::DomainName { .. } => "DomainName",
            MorphismDiag::CodomainName { .. } => "CodomainName",
            MorphismDiag::UnknownSource { .. } => "UnknownSource",
            MorphismDiag::UnknownTarget { .. } => "UnknownTarget",
            MorphismDiag::DataNotIdentity { .. } => "DataNotIdentity",
            MorphismDiag::SubsortBroken { .. } => "SubsortBroken",
            MorphismDiag::SignatureMismatch { .. } => "SignatureMismatch",
        }
    }
}

impl fmt::Display for MorphismDiag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let code = self.code();
        match self {
            MorphismDiag::DomainName { expected, found } => write!(f, "{code}: domain is `{found}`, expected `{expected}`"),
            MorphismDiag::CodomainName { expected, found } => {
                write!(f, "{code}: codomain is `{found}`, expected `{expected}`")
            }
            MorphismDiag::UnknownSource { kind, name } => write!(f, "{code}: {kind} `{name}` not in the domain"),
            MorphismDiag::UnknownTarget { kind, name } => write!(f, "{code}: {kind} `{name}` not in the codomain"),
            MorphismDiag::DataNotIdentity { from, to } => write!(f, "{code}: data sort {from} -> {to}"),
            MorphismDiag::SubsortBroken { sub, sup } => write!(f, "{code}: {sub} < {sup} is not preserved"),
            MorphismDiag::SignatureMismatch { kind, from, to, expected } => {
                write!(f, "{code}({from}->{to}): no {kind} `{to}` with signature {expected}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Witness {
    /// `level(s) < level(x)` but `level(μs) > level(μx)`.
    Level { s: Name, x: Name },
    /// `prio(c) > prio(y)` at equal level but `prio(μc) <= prio(μy)`.
    Priority { c: Name, y: Name },
    /// The translation of this axiom is not entailed by the codomain.
    Axiom { axiom: Name },
    /// ε did not strictly decrease.
    Natural { epsilon_from: usize, epsilon_to: usize },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Level { s, x } => write!(f, "level({s}) < level({x}) not preserved"),
            Witness::Priority { c, y } => write!(f, "prio({c}) > prio({y}) not preserved"),
            Witness::Axiom { axiom } => write!(f, "axiom {axiom} not entailed"),
            Witness::Natural { epsilon_from, epsilon_to } => write!(f, "epsilon {epsilon_from} > {epsilon_to} is false"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PropertyCheck {
    pub holds: bool,
    pub witnesses: Vec<Witness>,
}

impl PropertyCheck {
    fn from_witnesses(witnesses: Vec<Witness>) -> Self {
        PropertyCheck { holds: witnesses.is_empty(), witnesses }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PropertyReport {
    pub morphism: Name,
    pub well_formed: bool,
    pub diagnostics: Vec<MorphismDiag>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<PropertyCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub priority: Option<PropertyCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axiom: Option<PropertyCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub natural: Option<PropertyCheck>,
    /// Axioms whose translation is undefined under a partial morphism.
    pub skipped_axioms: Vec<Name>,
}

impl PropertyReport {
    pub fn get(&self, p: Property) -> Option<&PropertyCheck> {
        match p {
            Property::Level => self.level.as_ref(),
            Property::Priority => self.priority.as_ref(),
            Property::Axiom => self.axiom.as_ref(),
            Property::Natural => self.natural.as_ref(),
        }
    }

    /// Well-formed and every requested property holds.
    pub fn passed(&self) -> bool {
        self.well_formed && Property::ALL.iter().filter_map(|p| self.get(*p)).all(|c| c.holds)
    }

    pub fn holds(&self, p: Property) -> bool {
        self.get(p).is_some_and(|c| c.holds)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum MorphismError {
    #[error("cannot compose `{first}` ({first_to}) with `{second}` ({second_from})")]
    DomainMismatch { first: Name, first_to: Name, second: Name, second_from: Name },
}

fn signature(args: &[Name], result: Option<&Name>) -> String {
    let args = args.join(" ");
    match result {
        Some(r) => format!("{args} -> {r}").trim().to_string(),
        None => format!("({args})"),
    }
}

/// Well-formedness of `m` as a morphism `from -> to`.
pub fn verify(m: &SemioticMorphism, from: &SignSystem, to: &SignSystem) -> Vec<MorphismDiag> {
    let mut out = Vec::new();
    if m.from != from.name {
        out.push(MorphismDiag::DomainName { expected: from.name.clone(), found: m.from.clone() });
    }
    if m.to != to.name {
        out.push(MorphismDiag::CodomainName { expected: to.name.clone(), found: m.to.clone() });
    }
    let mut check = |kind: &'static str, map: &BTreeMap<Name, Name>, src: &dyn Fn(&str) -> bool, dst: &dyn Fn(&str) -> bool| {
        for (a, b) in map {
            if !src(a) {
                out.push(MorphismDiag::UnknownSource { kind, name: a.clone() });
            }
            if !dst(b) {
                out.push(MorphismDiag::UnknownTarget { kind, name: b.clone() });
            }
        }
    };
    check("sort", &m.sorts, &|k| from.sorts.contains_key(k), &|k| to.sorts.contains_key(k));
    check("data", &m.data, &|k| from.data_sorts.contains_key(k), &|k| to.data_sorts.contains_key(k));
    check("ctor", &m.ctors, &|k| from.ctors.contains_key(k), &|k| to.ctors.contains_key(k));
    check("rel", &m.rels, &|k| from.rels.contains_key(k), &|k| to.rels.contains_key(k));
    for (a, b) in &m.data {
        if a != b {
            out.push(MorphismDiag::DataNotIdentity { from: a.clone(), to: b.clone() });
        }
    }

    let (src_order, dst_order) = (from.sort_order(), to.sort_order());
    for (s, x) in src_order.strict_pairs() {
        if let (Some(ms), Some(mx)) = (m.sorts.get(&s), m.sorts.get(&x)) {
            if !dst_order.leq(ms, mx) {
                out.push(MorphismDiag::SubsortBroken { sub: s, sup: x });
            }
        }
    }

    let image = |sorts: &[Name]| sorts.iter().map(|s| m.sort_image(s).cloned()).collect::<Option<Vec<Name>>>();
    for (c, mc) in &m.ctors {
        let Some(decl) = from.ctors.get(c) else { continue };
        let (Some(args), Some(result)) = (image(&decl.args), m.sort_image(&decl.result)) else { continue };
        if !to.ctors.get(mc).is_some_and(|t| t.args == args && &t.result == result) {
            out.push(MorphismDiag::SignatureMismatch {
                kind: "ctor",
                from: c.clone(),
                to: mc.clone(),
                expected: signature(&args, Some(result)),
            });
        }
    }
    for (r, mr) in &m.rels {
        let Some(decl) = from.rels.get(r) else { continue };
        let Some(args) = image(&decl.args) else { continue };
        if !to.rels.get(mr).is_some_and(|t| t.args == args) {
            out.push(MorphismDiag::SignatureMismatch {
                kind: "rel",
                from: r.clone(),
                to: mr.clone(),
                expected: signature(&args, None),
            });
        }
    }
    out
}

fn level_witnesses(m: &SemioticMorphism, from: &SignSystem, to: &SignSystem) -> Vec<Witness> {
    let mut out = Vec::new();
    let level = |sys: &SignSystem, s: &str| sys.sorts.get(s).map(|d| d.level);
    for (s, ms) in &m.sorts {
        for (x, mx) in &m.sorts {
            let (Some(ls), Some(lx)) = (level(from, s), level(from, x)) else { continue };
            let (Some(lms), Some(lmx)) = (level(to, ms), level(to, mx)) else { continue };
            if ls < lx && lms > lmx {
                out.push(Witness::Level { s: s.clone(), x: x.clone() });
            }
        }
    }
    out
}

fn priority_witnesses(m: &SemioticMorphism, from: &SignSystem, to: &SignSystem) -> Vec<Witness> {
    let mut out = Vec::new();
    for (c, mc) in &m.ctors {
        for (y, my) in &m.ctors {
            let (Some(dc), Some(dy)) = (from.ctors.get(c), from.ctors.get(y)) else { continue };
            if from.ctor_level(c).is_none() || from.ctor_level(c) != from.ctor_level(y) || dc.priority <= dy.priority {
                continue;
            }
            let (Some(tc), Some(ty)) = (to.ctors.get(mc), to.ctors.get(my)) else { continue };
            if tc.priority <= ty.priority {
                out.push(Witness::Priority { c: c.clone(), y: y.clone() });
            }
        }
    }
    out
}

/// Well-formedness plus each requested preservation property.
pub fn check_properties(
    m: &SemioticMorphism,
    from: &SignSystem,
    to: &SignSystem,
    requested: &BTreeSet<Property>,
) -> PropertyReport {
    let diagnostics = verify(m, from, to);
    let mut report = PropertyReport {
        morphism: m.name.clone(),
        well_formed: diagnostics.is_empty(),
        diagnostics,
        level: None,
        priority: None,
        axiom: None,
        natural: None,
        skipped_axioms: Vec::new(),
    };
    if requested.contains(&Property::Level) {
        report.level = Some(PropertyCheck::from_witnesses(level_witnesses(m, from, to)));
    }
    if requested.contains(&Property::Priority) {
        report.priority = Some(PropertyCheck::from_witnesses(priority_witnesses(m, from, to)));
    }
    let to_model = (requested.contains(&Property::Axiom) || requested.contains(&Property::Natural)).then(|| closure(to));
    if requested.contains(&Property::Axiom) {
        let model = to_model.as_ref().expect("computed above");
        let mut witnesses = Vec::new();
        for ax in from.axioms.values() {
            match m.translate_axiom(ax) {
                None => report.skipped_axioms.push(ax.name.clone()),
                Some(t) => {
                    if !entails_with(to, model, &t).unwrap_or(false) {
                        witnesses.push(Witness::Axiom { axiom: ax.name.clone() });
                    }
                }
            }
        }
        report.axiom = Some(PropertyCheck::from_witnesses(witnesses));
    }
    if requested.contains(&Property::Natural) {
        let epsilon_from = epsilon_of(from, &closure(from));
        let epsilon_to = epsilon_of(to, to_model.as_ref().expect("computed above"));
        let w = if epsilon_from > epsilon_to { vec![] } else { vec![Witness::Natural { epsilon_from, epsilon_to }] };
        report.natural = Some(PropertyCheck::from_witnesses(w));
    }
    report
}

/// `m2 ∘ m1`, defined where both legs are.
pub fn compose(m1: &SemioticMorphism, m2: &SemioticMorphism) -> Result<SemioticMorphism, MorphismError> {
    if m1.to != m2.from {
        return Err(MorphismError::DomainMismatch {
            first: m1.name.clone(),
            first_to: m1.to.clone(),
            second: m2.name.clone(),
            second_from: m2.from.clone(),
        });
    }
    let chain = |a: &BTreeMap<Name, Name>, b: &BTreeMap<Name, Name>| {
        a.iter().filter_map(|(k, v)| b.get(v).map(|w| (k.clone(), w.clone()))).collect()
    };
    Ok(SemioticMorphism {
        name: format!("{}_then_{}", m1.name, m2.name),
        from: m1.from.clone(),
        to: m2.to.clone(),
        sorts: chain(&m1.sorts, &m2.sorts),
        data: chain(&m1.data, &m2.data),
        ctors: chain(&m1.ctors, &m2.ctors),
        rels: chain(&m1.rels, &m2.rels),
    })
}

struct Search<'a> {
    from: &'a SignSystem,
    to: &'a SignSystem,
    src_order: SortOrder,
    dst_order: SortOrder,
    sorts: Vec<&'a Name>,
    ctors: Vec<&'a Name>,
    rels: Vec<&'a Name>,
    targets: Vec<&'a Name>,
    required: &'a BTreeSet<Property>,
    limit: usize,
    found: Vec<SemioticMorphism>,
}

impl Search<'_> {
    fn done(&self) -> bool {
        self.found.len() >= self.limit
    }

    fn sorts(&mut self, i: usize, m: &mut SemioticMorphism) {
        if self.done() {
            return;
        }
        let Some(&s) = self.sorts.get(i) else {
            self.ctors(0, m);
            return;
        };
        for t in self.targets.clone() {
            let consistent = self.sorts[..i].iter().all(|x| {
                let mx = &m.sorts[*x];
                (!self.src_order.leq(s, x) || self.dst_order.leq(t, mx))
                    && (!self.src_order.leq(x, s) || self.dst_order.leq(mx, t))
            });
            if consistent {
                m.sorts.insert(s.clone(), t.clone());
                self.sorts(i + 1, m);
                m.sorts.remove(s);
            }
        }
    }

    fn ctors(&mut self, i: usize, m: &mut SemioticMorphism) {
        if self.done() {
            return;
        }
        let Some(&c) = self.ctors.get(i) else {
            self.rels(0, m);
            return;
        };
        let decl = &self.from.ctors[c];
        let args: Vec<&Name> = decl.args.iter().map(|s| m.sort_image(s).expect("total")).collect();
        let result = m.sort_image(&decl.result).expect("total").clone();
        let fits: Vec<Name> = self
            .to
            .ctors
            .values()
            .filter(|t| t.result == result && t.args.iter().eq(args.iter().copied()))
            .map(|t| t.name.clone())
            .collect();
        for t in fits {
            m.ctors.insert(c.clone(), t);
            self.ctors(i + 1, m);
            m.ctors.remove(c);
        }
    }

    fn rels(&mut self, i: usize, m: &mut SemioticMorphism) {
        if self.done() {
            return;
        }
        let Some(&r) = self.rels.get(i) else {
            self.leaf(m);
            return;
        };
        let decl = &self.from.rels[r];
        let args: Vec<&Name> = decl.args.iter().map(|s| m.sort_image(s).expect("total")).collect();
        let fits: Vec<Name> = self
            .to
            .rels
            .values()
            .filter(|t| t.args.iter().eq(args.iter().copied()))
            .map(|t| t.name.clone())
            .collect();
        for t in fits {
            m.rels.insert(r.clone(), t);
            self.rels(i + 1, m);
            m.rels.remove(r);
        }
    }

    fn leaf(&mut self, m: &SemioticMorphism) {
        let mut candidate = m.clone();
        candidate.name = format!("{}_to_{}_{}", self.from.name, self.to.name, self.found.len());
        let report = check_properties(&candidate, self.from, self.to, self.required);
        if report.passed() {
            self.found.push(candidate);
        }
    }
}

/// All total morphisms `from -> to` passing `verify` and the required
/// properties, in canonical order (source names sorted, then candidate
/// targets sorted), up to `limit`.
pub fn find_morphisms(
    from: &SignSystem,
    to: &SignSystem,
    required: &BTreeSet<Property>,
    limit: usize,
) -> Vec<SemioticMorphism> {
    let mut m = SemioticMorphism::new("", from.name.clone(), to.name.clone());
    for d in from.data_sorts.keys() {
        if !to.data_sorts.contains_key(d) {
            return Vec::new();
        }
        m.data.insert(d.clone(), d.clone());
    }
    let mut search = Search {
        from,
        to,
        src_order: from.sort_order(),
        dst_order: to.sort_order(),
        sorts: from.sorts.keys().collect(),
        ctors: from.ctors.keys().collect(),
        rels: from.rels.keys().collect(),
        targets: to.sorts.keys().collect(),
        required,
        limit,
        found: Vec::new(),
    };
    if limit > 0 {
        search.sorts(0, &mut m);
    }
    search.found
}

/// Law II verdict: creative iff natural and unique.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CreativityVerdict {
    pub natural: bool,
    pub unique: bool,
    pub morphism_count: usize,
    pub creative: bool,
}

/// `morphism_count` is capped at 2: uniqueness only needs to know whether a
/// second total morphism between the observed systems exists.
pub fn check_creative(
    pi: &SemioticMorphism,
    from: &SignSystem,
    to: &SignSystem,
    e_dom: &ObserverSpec,
    e_cod: &ObserverSpec,
) -> Result<CreativityVerdict, EmergenceError> {
    let natural = check_properties(pi, from, to, &[Property::Natural].into()).holds(Property::Natural);
    let observed_from = e_dom.observe(from)?;
    let observed_to = e_cod.observe(to)?;
    let morphism_count = find_morphisms(&observed_from, &observed_to, &BTreeSet::new(), 2).len();
    let unique = morphism_count == 1;
    Ok(CreativityVerdict { natural, unique, morphism_count, creative: natural && unique })
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::system::fixtures::{leaf, pair, toy};
    use crate::system::RelKind;

    fn all() -> BTreeSet<Property> {
        Property::ALL.into_iter().collect()
    }

    #[test]
    fn identity_and_rename_are_well_formed() {
        let toy = toy();
        assert_eq!(verify(&SemioticMorphism::identity(&toy), &toy, &toy), vec![]);
        assert_eq!(verify(&rename(), &toy, &toy2()), vec![]);
    }

    #[test]
    fn broken_arity_is_a_signature_mismatch() {
        let mut bad = toy2();
        bad.ctors.get_mut("duo").unwrap().args.pop();
        let diags = verify(&rename(), &toy(), &bad);
        assert_eq!(diags.len(), 1);
        assert!(matches!(&diags[0], MorphismDiag::SignatureMismatch { from, to, .. } if from == "pair" && to == "duo"));
    }

    #[test]
    fn identity_properties() {
        let toy = toy();
        let r = check_properties(&SemioticMorphism::identity(&toy), &toy, &toy, &all());
        assert!(r.well_formed);
        assert!(r.holds(Property::Level) && r.holds(Property::Priority) && r.holds(Property::Axiom));
        assert!(!r.holds(Property::Natural));
        assert_eq!(r.natural.unwrap().witnesses, vec![Witness::Natural { epsilon_from: 1, epsilon_to: 1 }]);
    }

    #[test]
    fn missing_fact_breaks_axiom_preservation() {
        let mut target = toy2();
        target.axioms.remove("f2");
        let r = check_properties(&rename(), &toy(), &target, &[Property::Axiom].into());
        assert_eq!(r.axiom.unwrap().witnesses, vec![Witness::Axiom { axiom: "f2".into() }]);
    }

    #[test]
    fn dropping_the_environment_is_natural() {
        let toy = toy();
        let mut target = toy.clone();
        target.name = "ToyQuiet".into();
        target.rels.remove("fits");
        target.axioms.remove("f2");
        let mut m = SemioticMorphism::identity(&toy);
        m.to = "ToyQuiet".into();
        m.rels.remove("fits");
        let r = check_properties(&m, &toy, &target, &all());
        assert!(r.well_formed);
        assert!(r.holds(Property::Natural));
        assert!(r.holds(Property::Axiom));
        assert_eq!(r.skipped_axioms, vec!["f2".to_string()]);
    }

    #[test]
    fn translation() {
        let id = SemioticMorphism::identity(&toy());
        let t = Atom::new("touches", vec![leaf(), leaf()]);
        assert_eq!(id.translate_atom(&t), Some(t));
        let fits = Atom::new("fits", vec![pair(leaf(), leaf())]);
        let seed = Term::constant("seed");
        assert_eq!(rename().translate_atom(&fits), Some(Atom::new("suits", vec![Term::app("duo", vec![seed.clone(), seed])])));
        let mut partial = rename();
        partial.rels.remove("fits");
        assert_eq!(partial.translate_atom(&fits), None);
    }

    #[test]
    fn composition_laws() {
        let toy = toy();
        let id = SemioticMorphism::identity(&toy);
        let m = rename();
        let c = compose(&id, &m).unwrap();
        assert_eq!((c.sorts.clone(), c.ctors.clone(), c.rels.clone()), (m.sorts.clone(), m.ctors.clone(), m.rels.clone()));

        let inverse = SemioticMorphism {
            name: "Minv".into(),
            from: "Toy2".into(),
            to: "Toy".into(),
            sorts: m.sorts.iter().map(|(a, b)| (b.clone(), a.clone())).collect(),
            data: BTreeMap::new(),
            ctors: m.ctors.iter().map(|(a, b)| (b.clone(), a.clone())).collect(),
            rels: m.rels.iter().map(|(a, b)| (b.clone(), a.clone())).collect(),
        };
        let round = compose(&m, &inverse).unwrap();
        assert_eq!(round.sorts, id.sorts);
        assert_eq!(round.ctors, id.ctors);
        assert_eq!(round.rels, id.rels);
        assert!(matches!(compose(&m, &m), Err(MorphismError::DomainMismatch { .. })));
        assert_eq!(verify(&round, &toy, &toy), vec![]);
    }

    #[test]
    fn search_fixtures() {
        let toy = toy();
        let none = BTreeSet::new();
        let found = find_morphisms(&toy, &toy, &none, 10);
        assert_eq!(found.len(), 1);
        let id = SemioticMorphism::identity(&toy);
        assert_eq!((&found[0].sorts, &found[0].ctors, &found[0].rels), (&id.sorts, &id.ctors, &id.rels));

        let found = find_morphisms(&toy, &toy2(), &none, 10);
        assert_eq!(found.len(), 1);
        assert_eq!((&found[0].sorts, &found[0].ctors, &found[0].rels), (&rename().sorts, &rename().ctors, &rename().rels));

        assert!(find_morphisms(&toy, &SignSystem::new("Empty"), &none, 10).is_empty());
    }

    #[test]
    fn interchangeable_constants_are_not_unique() {
        let twins = SignSystem::new("Twins")
            .with_sort("P", 0)
            .with_ctor("a", &[], "P", 1)
            .with_ctor("b", &[], "P", 1)
            .with_rel("on", &["P"], RelKind::Environmental);
        let found = find_morphisms(&twins, &twins, &BTreeSet::new(), 10);
        // a, b each map to either constant
        assert_eq!(found.len(), 4);
        let spec = ObserverSpec::identity(&twins);
        let v = check_creative(&SemioticMorphism::identity(&twins), &twins, &twins, &spec, &spec).unwrap();
        assert!(!v.unique && !v.creative);
        assert_eq!(v.morphism_count, 2);
    }

    #[test]
    fn law_two_on_toy() {
        let toy = toy();
        let spec = ObserverSpec::identity(&toy);
        let v = check_creative(&SemioticMorphism::identity(&toy), &toy, &toy, &spec, &spec).unwrap();
        assert!(!v.natural && !v.creative);

        let mut quiet = rename_system(&toy, &rename(), "Toy2Quiet");
        quiet.rels.get_mut("suits").unwrap().kind = RelKind::Internal;
        let mut pi = rename();
        pi.to = "Toy2Quiet".into();
        let v = check_creative(&pi, &toy, &quiet, &spec, &ObserverSpec::identity(&quiet)).unwrap();
        assert_eq!(v, CreativityVerdict { natural: true, unique: true, morphism_count: 1, creative: true });
    }

    #[test]
    fn priority_only_compares_within_a_level() {
        let sys = SignSystem::new("P")
            .with_sort("A", 0)
            .with_sort("B", 1)
            .with_ctor("lo", &[], "A", 1)
            .with_ctor("hi", &[], "A", 2)
            .with_ctor("up", &[], "B", 5);
        let mut flipped = sys.clone();
        flipped.name = "Q".into();
        flipped.ctors.get_mut("hi").unwrap().priority = 0;
        let mut m = SemioticMorphism::identity(&sys);
        m.to = "Q".into();
        let r = check_properties(&m, &sys, &flipped, &[Property::Priority].into());
        assert_eq!(r.priority.unwrap().witnesses, vec![Witness::Priority { c: "hi".into(), y: "lo".into() }]);
    }
}
