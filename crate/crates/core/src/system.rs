//! Sign systems: an order-sorted signature with leveled sorts, prioritized
//! constructors, tagged relations and ranked axioms, together with the static
//! checks (validation, sort inference) and the set operations on systems.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

pub type Name = String;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SortDecl {
    pub name: Name,
    pub level: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct DataSortDecl {
    pub name: Name,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Constructor {
    pub name: Name,
    pub args: Vec<Name>,
    pub result: Name,
    pub priority: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RelKind {
    Internal,
    Environmental,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Relation {
    pub name: Name,
    pub args: Vec<Name>,
    pub kind: RelKind,
}

/// A sign built from other signs.
///
/// Literal sorts are positional: the parser leaves `sort` empty and
/// [`SignSystem::resolve_literals`] fills it from the declared argument sort.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Name),
    Lit { sort: Name, value: String },
    App { ctor: Name, args: Vec<Term> },
}

impl Term {
    pub fn app(ctor: impl Into<Name>, args: Vec<Term>) -> Self {
        Term::App { ctor: ctor.into(), args }
    }

    pub fn constant(ctor: impl Into<Name>) -> Self {
        Term::App { ctor: ctor.into(), args: Vec::new() }
    }

    pub fn var(name: impl Into<Name>) -> Self {
        Term::Var(name.into())
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Lit { .. } => true,
            Term::App { args, .. } => args.iter().all(Term::is_ground),
        }
    }

    pub fn collect_vars<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Term::Var(v) => {
                out.insert(v);
            }
            Term::Lit { .. } => {}
            Term::App { args, .. } => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    /// Pushes this term and all of its subterms.
    pub fn collect_subterms(&self, out: &mut BTreeSet<Term>) {
        if let Term::App { args, .. } = self {
            args.iter().for_each(|a| a.collect_subterms(out));
        }
        out.insert(self.clone());
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Lit { value, .. } => write!(f, "{value:?}"),
            Term::App { ctor, args } if args.is_empty() => f.write_str(ctor),
            Term::App { ctor, args } => {
                write!(f, "{ctor}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub rel: Name,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(rel: impl Into<Name>, args: Vec<Term>) -> Self {
        Atom { rel: rel.into(), args }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn vars(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.args.iter().for_each(|a| a.collect_vars(&mut out));
        out
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.rel)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

impl Serialize for Atom {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AxiomForm {
    Fact(Atom),
    Rule { body: Vec<Atom>, head: Atom },
    Denial { body: Vec<Atom> },
}

impl AxiomForm {
    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        let (body, head): (&[Atom], Option<&Atom>) = match self {
            AxiomForm::Fact(a) => (std::slice::from_ref(a), None),
            AxiomForm::Rule { body, head } => (body, Some(head)),
            AxiomForm::Denial { body } => (body, None),
        };
        body.iter().chain(head)
    }

    pub fn atoms_mut(&mut self) -> Vec<&mut Atom> {
        match self {
            AxiomForm::Fact(a) => vec![a],
            AxiomForm::Rule { body, head } => body.iter_mut().chain(std::iter::once(head)).collect(),
            AxiomForm::Denial { body } => body.iter_mut().collect(),
        }
    }

    pub fn kind_str(&self) -> &'static str {
        match self {
            AxiomForm::Fact(_) => "fact",
            AxiomForm::Rule { .. } => "rule",
            AxiomForm::Denial { .. } => "deny",
        }
    }
}

/// A ranked constraint. Higher rank means higher importance.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Axiom {
    pub name: Name,
    pub rank: u32,
    pub form: AxiomForm,
}

impl Axiom {
    pub fn fact(name: impl Into<Name>, rank: u32, atom: Atom) -> Self {
        Axiom { name: name.into(), rank, form: AxiomForm::Fact(atom) }
    }

    pub fn rule(name: impl Into<Name>, rank: u32, body: Vec<Atom>, head: Atom) -> Self {
        Axiom { name: name.into(), rank, form: AxiomForm::Rule { body, head } }
    }

    pub fn denial(name: impl Into<Name>, rank: u32, body: Vec<Atom>) -> Self {
        Axiom { name: name.into(), rank, form: AxiomForm::Denial { body } }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} rank {} : ", self.form.kind_str(), self.name, self.rank)?;
        let join = |f: &mut fmt::Formatter<'_>, atoms: &[Atom]| -> fmt::Result {
            for (i, a) in atoms.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{a}")?;
            }
            Ok(())
        };
        match &self.form {
            AxiomForm::Fact(a) => write!(f, "{a}"),
            AxiomForm::Rule { body, head } => {
                join(f, body)?;
                write!(f, " => {head}")
            }
            AxiomForm::Denial { body } => join(f, body),
        }
    }
}

impl Serialize for Axiom {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// `⟨S, V, C, R, A⟩` plus the subsort edges over `S`.
///
/// Every category is keyed by name, so per-category uniqueness holds by
/// construction; cross-category clashes between sorts and data sorts are
/// reported by [`SignSystem::validate`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SignSystem {
    pub name: Name,
    pub sorts: BTreeMap<Name, SortDecl>,
    pub data_sorts: BTreeMap<Name, DataSortDecl>,
    pub subsorts: BTreeSet<(Name, Name)>,
    pub ctors: BTreeMap<Name, Constructor>,
    pub rels: BTreeMap<Name, Relation>,
    pub axioms: BTreeMap<Name, Axiom>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "code")]
pub enum Violation {
    UnknownSort { site: String, sort: Name },
    UnknownCtor { site: String, ctor: Name },
    UnknownRelation { site: String, rel: Name },
    DuplicateName { name: Name },
    SubsortCycle { sorts: Vec<Name> },
    DataSubsort { sub: Name, sup: Name },
    DataResult { ctor: Name },
    ArityMismatch { site: String, name: Name, expected: usize, found: usize },
    IllSorted { site: String, detail: String },
    UntypedLiteral { site: String, value: String },
    NonGroundFact { axiom: Name },
    UnsafeRule { axiom: Name, vars: Vec<Name> },
}

impl Violation {
    pub fn code(&self) -> &'static str {
        match self {
            Violation::UnknownSort { .. } => "UnknownSort",
            Violation::UnknownCtor { .. } => "UnknownCtor",
            Violation::UnknownRelation { .. } => "UnknownRelation",
            Violation::DuplicateName { .. } => "DuplicateName",
            Violation::SubsortCycle { .. } => "SubsortCycle",
            Violation::DataSubsort { .. } => "DataSubsort",
            Violation::DataResult { .. } => "DataResult",
            Violation::ArityMismatch { .. } => "ArityMismatch",
            Violation::IllSorted { .. } => "IllSorted",
            Violation::UntypedLiteral { .. } => "UntypedLiteral",
            Violation::NonGroundFact { .. } => "NonGroundFact",
            Violation::UnsafeRule { .. } => "UnsafeRule",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let code = self.code();
        match self {
            Violation::UnknownSort { site, sort } => write!(f, "{code}: sort `{sort}` in {site}"),
            Violation::UnknownCtor { site, ctor } => write!(f, "{code}: constructor `{ctor}` in {site}"),
            Violation::UnknownRelation { site, rel } => write!(f, "{code}: relation `{rel}` in {site}"),
            Violation::DuplicateName { name } => write!(f, "{code}: `{name}` declared as sort and data sort"),
            Violation::SubsortCycle { sorts } => write!(f, "{code}({})", sorts.join(",")),
            Violation::DataSubsort { sub, sup } => write!(f, "{code}: {sub} < {sup} involves a data sort"),
            Violation::DataResult { ctor } => write!(f, "{code}: constructor `{ctor}` returns a data sort"),
            Violation::ArityMismatch { site, name, expected, found } => {
                write!(f, "{code}: `{name}` in {site} expects {expected} arguments, got {found}")
            }
            Violation::IllSorted { site, detail } => write!(f, "{code}: {detail} in {site}"),
            Violation::UntypedLiteral { site, value } => {
                write!(f, "{code}: literal {value:?} in {site} is not at a data-sort position")
            }
            Violation::NonGroundFact { axiom } => write!(f, "{code}: fact `{axiom}` contains variables"),
            Violation::UnsafeRule { axiom, vars } => {
                write!(f, "{code}: head of `{axiom}` uses unbound {}", vars.join(","))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SortError {
    #[error("term `{0}` is not ground")]
    NotGround(String),
    #[error("unknown constructor `{0}`")]
    UnknownCtor(Name),
    #[error("constructor `{ctor}` expects {expected} arguments, got {found}")]
    Arity { ctor: Name, expected: usize, found: usize },
    #[error("argument {position} of `{ctor}` has sort {found}, which is not below {expected}")]
    IllSorted { ctor: Name, position: usize, expected: Name, found: Name },
    #[error("literal {0:?} carries no declared data sort")]
    UntypedLiteral(String),
}

/// Reflexive-transitive closure of a subsort relation over a fixed sort set.
#[derive(Clone, Debug, Default)]
pub struct SortOrder {
    above: BTreeMap<Name, BTreeSet<Name>>,
}

impl SortOrder {
    pub fn new<'a>(sorts: impl IntoIterator<Item = &'a str>, edges: &BTreeSet<(Name, Name)>) -> Self {
        let mut above: BTreeMap<Name, BTreeSet<Name>> = BTreeMap::new();
        for s in sorts {
            above.entry(s.to_string()).or_default().insert(s.to_string());
        }
        for (a, b) in edges {
            above.entry(a.clone()).or_default().insert(a.clone());
            above.entry(b.clone()).or_default().insert(b.clone());
        }
        // Warshall over the (small) sort set.
        let keys: Vec<Name> = above.keys().cloned().collect();
        for (a, b) in edges {
            above.get_mut(a).expect("inserted").insert(b.clone());
        }
        for k in &keys {
            let above_k = above[k].clone();
            for i in &keys {
                if above[i].contains(k) {
                    above.get_mut(i).expect("key").extend(above_k.iter().cloned());
                }
            }
        }
        SortOrder { above }
    }

    pub fn leq(&self, a: &str, b: &str) -> bool {
        a == b || self.above.get(a).is_some_and(|s| s.contains(b))
    }

    /// All strict pairs `(a, b)` with `a < b`.
    pub fn strict_pairs(&self) -> BTreeSet<(Name, Name)> {
        self.above
            .iter()
            .flat_map(|(a, ups)| ups.iter().filter(move |b| *b != a).map(move |b| (a.clone(), b.clone())))
            .collect()
    }

    /// Hasse diagram of the order restricted to `keep`.
    pub fn reduced_edges(&self, keep: &BTreeSet<Name>) -> BTreeSet<(Name, Name)> {
        let strict: BTreeSet<(Name, Name)> = self
            .strict_pairs()
            .into_iter()
            .filter(|(a, b)| keep.contains(a) && keep.contains(b) && !self.leq(b, a))
            .collect();
        strict
            .iter()
            .filter(|(a, b)| !keep.iter().any(|m| m != a && m != b && strict.contains(&(a.clone(), m.clone())) && strict.contains(&(m.clone(), b.clone()))))
            .cloned()
            .collect()
    }
}

impl SignSystem {
    pub fn new(name: impl Into<Name>) -> Self {
        SignSystem { name: name.into(), ..Default::default() }
    }

    pub fn with_sort(mut self, name: &str, level: u32) -> Self {
        self.sorts.insert(name.into(), SortDecl { name: name.into(), level });
        self
    }

    pub fn with_data(mut self, name: &str) -> Self {
        self.data_sorts.insert(name.into(), DataSortDecl { name: name.into() });
        self
    }

    pub fn with_subsort(mut self, sub: &str, sup: &str) -> Self {
        self.subsorts.insert((sub.into(), sup.into()));
        self
    }

    pub fn with_ctor(mut self, name: &str, args: &[&str], result: &str, priority: u32) -> Self {
        self.ctors.insert(
            name.into(),
            Constructor {
                name: name.into(),
                args: args.iter().map(|s| s.to_string()).collect(),
                result: result.into(),
                priority,
            },
        );
        self
    }

    pub fn with_rel(mut self, name: &str, args: &[&str], kind: RelKind) -> Self {
        self.rels.insert(
            name.into(),
            Relation { name: name.into(), args: args.iter().map(|s| s.to_string()).collect(), kind },
        );
        self
    }

    pub fn with_axiom(mut self, axiom: Axiom) -> Self {
        self.axioms.insert(axiom.name.clone(), axiom);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.sorts.is_empty()
            && self.data_sorts.is_empty()
            && self.ctors.is_empty()
            && self.rels.is_empty()
            && self.axioms.is_empty()
    }

    pub fn has_sort_or_data(&self, name: &str) -> bool {
        self.sorts.contains_key(name) || self.data_sorts.contains_key(name)
    }

    pub fn sort_order(&self) -> SortOrder {
        SortOrder::new(self.sorts.keys().map(String::as_str), &self.subsorts)
    }

    pub fn ctor_level(&self, ctor: &str) -> Option<u32> {
        let c = self.ctors.get(ctor)?;
        self.sorts.get(&c.result).map(|s| s.level)
    }

    /// Fills in the data sort of every literal from its argument position.
    /// Literals at positions whose declared sort is not a data sort keep an
    /// empty sort and are reported by validation.
    pub fn resolve_literals(&self, axiom: &mut Axiom) {
        for atom in axiom.form.atoms_mut() {
            let decl = self.rels.get(&atom.rel).map(|r| r.args.clone());
            for (i, arg) in atom.args.iter_mut().enumerate() {
                let pos = decl.as_ref().and_then(|d| d.get(i)).cloned();
                self.resolve_term(arg, pos.as_deref());
            }
        }
    }

    fn resolve_term(&self, t: &mut Term, position: Option<&str>) {
        match t {
            Term::Var(_) => {}
            Term::Lit { sort, .. } => {
                *sort = position.filter(|p| self.data_sorts.contains_key(*p)).unwrap_or_default().to_string();
            }
            Term::App { ctor, args } => {
                let decl = self.ctors.get(ctor.as_str()).map(|c| c.args.clone());
                for (i, a) in args.iter_mut().enumerate() {
                    let pos = decl.as_ref().and_then(|d| d.get(i)).cloned();
                    self.resolve_term(a, pos.as_deref());
                }
            }
        }
    }

    /// Least sort of a ground term.
    pub fn least_sort(&self, t: &Term) -> Result<Name, SortError> {
        self.least_sort_in(t, &self.sort_order())
    }

    pub(crate) fn least_sort_in(&self, t: &Term, order: &SortOrder) -> Result<Name, SortError> {
        match t {
            Term::Var(v) => Err(SortError::NotGround(v.clone())),
            Term::Lit { sort, value } => {
                if self.data_sorts.contains_key(sort) {
                    Ok(sort.clone())
                } else {
                    Err(SortError::UntypedLiteral(value.clone()))
                }
            }
            Term::App { ctor, args } => {
                let c = self.ctors.get(ctor).ok_or_else(|| SortError::UnknownCtor(ctor.clone()))?;
                if c.args.len() != args.len() {
                    return Err(SortError::Arity { ctor: ctor.clone(), expected: c.args.len(), found: args.len() });
                }
                for (position, (arg, expected)) in args.iter().zip(&c.args).enumerate() {
                    let found = self.least_sort_in(arg, order)?;
                    if !order.leq(&found, expected) {
                        return Err(SortError::IllSorted {
                            ctor: ctor.clone(),
                            position,
                            expected: expected.clone(),
                            found,
                        });
                    }
                }
                Ok(c.result.clone())
            }
        }
    }

    /// Whether a ground atom is well-sorted here.
    pub fn atom_well_sorted(&self, atom: &Atom, order: &SortOrder) -> bool {
        let Some(rel) = self.rels.get(&atom.rel) else { return false };
        rel.args.len() == atom.args.len()
            && atom
                .args
                .iter()
                .zip(&rel.args)
                .all(|(t, s)| self.least_sort_in(t, order).is_ok_and(|ls| order.leq(&ls, s)))
    }

    /// Every invariant violation, in a stable order. Empty means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for name in self.sorts.keys() {
            if self.data_sorts.contains_key(name) {
                out.push(Violation::DuplicateName { name: name.clone() });
            }
        }
        let mut edges_ok = BTreeSet::new();
        for (a, b) in &self.subsorts {
            let mut ok = true;
            for s in [a, b] {
                if self.data_sorts.contains_key(s) {
                    ok = false;
                } else if !self.sorts.contains_key(s) {
                    out.push(Violation::UnknownSort { site: format!("subsort {a} < {b}"), sort: s.clone() });
                    ok = false;
                }
            }
            if ok {
                edges_ok.insert((a.clone(), b.clone()));
            } else if self.data_sorts.contains_key(a) || self.data_sorts.contains_key(b) {
                out.push(Violation::DataSubsort { sub: a.clone(), sup: b.clone() });
            }
        }
        let order = SortOrder::new(self.sorts.keys().map(String::as_str), &edges_ok);
        out.extend(subsort_cycles(&order));

        for c in self.ctors.values() {
            let site = format!("ctor {}", c.name);
            for s in &c.args {
                if !self.has_sort_or_data(s) {
                    out.push(Violation::UnknownSort { site: site.clone(), sort: s.clone() });
                }
            }
            if self.data_sorts.contains_key(&c.result) {
                out.push(Violation::DataResult { ctor: c.name.clone() });
            } else if !self.sorts.contains_key(&c.result) {
                out.push(Violation::UnknownSort { site: site.clone(), sort: c.result.clone() });
            }
        }
        for r in self.rels.values() {
            for s in &r.args {
                if !self.has_sort_or_data(s) {
                    out.push(Violation::UnknownSort { site: format!("rel {}", r.name), sort: s.clone() });
                }
            }
        }
        for ax in self.axioms.values() {
            self.validate_axiom(ax, &order, &mut out);
        }
        out
    }

    fn validate_axiom(&self, ax: &Axiom, order: &SortOrder, out: &mut Vec<Violation>) {
        let site = format!("{} {}", ax.form.kind_str(), ax.name);
        let before = out.len();
        for atom in ax.form.atoms() {
            self.check_atom_shape(atom, &site, out);
        }
        let shape_ok = out.len() == before;
        match &ax.form {
            AxiomForm::Fact(atom) => {
                if !atom.is_ground() {
                    out.push(Violation::NonGroundFact { axiom: ax.name.clone() });
                } else if shape_ok {
                    self.check_ground_sorts(atom, order, &site, out);
                }
            }
            AxiomForm::Rule { body, head } => {
                let bound: BTreeSet<&str> = body.iter().flat_map(Atom::vars).collect();
                let unbound: Vec<Name> = head.vars().into_iter().filter(|v| !bound.contains(v)).map(String::from).collect();
                if !unbound.is_empty() {
                    out.push(Violation::UnsafeRule { axiom: ax.name.clone(), vars: unbound });
                }
            }
            AxiomForm::Denial { .. } => {}
        }
    }

    fn check_atom_shape(&self, atom: &Atom, site: &str, out: &mut Vec<Violation>) {
        match self.rels.get(&atom.rel) {
            None => out.push(Violation::UnknownRelation { site: site.into(), rel: atom.rel.clone() }),
            Some(r) if r.args.len() != atom.args.len() => out.push(Violation::ArityMismatch {
                site: site.into(),
                name: atom.rel.clone(),
                expected: r.args.len(),
                found: atom.args.len(),
            }),
            Some(_) => {}
        }
        for t in &atom.args {
            self.check_term_shape(t, site, out);
        }
    }

    fn check_term_shape(&self, t: &Term, site: &str, out: &mut Vec<Violation>) {
        match t {
            Term::Var(_) => {}
            Term::Lit { sort, value } => {
                if !self.data_sorts.contains_key(sort) {
                    out.push(Violation::UntypedLiteral { site: site.into(), value: value.clone() });
                }
            }
            Term::App { ctor, args } => {
                match self.ctors.get(ctor) {
                    None => out.push(Violation::UnknownCtor { site: site.into(), ctor: ctor.clone() }),
                    Some(c) if c.args.len() != args.len() => out.push(Violation::ArityMismatch {
                        site: site.into(),
                        name: ctor.clone(),
                        expected: c.args.len(),
                        found: args.len(),
                    }),
                    Some(_) => {}
                }
                for a in args {
                    self.check_term_shape(a, site, out);
                }
            }
        }
    }

    fn check_ground_sorts(&self, atom: &Atom, order: &SortOrder, site: &str, out: &mut Vec<Violation>) {
        let rel = &self.rels[&atom.rel];
        for (t, expected) in atom.args.iter().zip(&rel.args) {
            match self.least_sort_in(t, order) {
                Ok(found) if order.leq(&found, expected) => {}
                Ok(found) => out.push(Violation::IllSorted {
                    site: site.into(),
                    detail: format!("{t} has sort {found}, expected {expected}"),
                }),
                Err(e) => out.push(Violation::IllSorted { site: site.into(), detail: e.to_string() }),
            }
        }
    }

    /// Names of every sort, data sort, constructor and relation an axiom mentions.
    pub fn axiom_vocabulary(ax: &Axiom) -> (BTreeSet<Name>, BTreeSet<Name>) {
        fn walk(t: &Term, ctors: &mut BTreeSet<Name>) {
            if let Term::App { ctor, args } = t {
                ctors.insert(ctor.clone());
                args.iter().for_each(|a| walk(a, ctors));
            }
        }
        let mut rels = BTreeSet::new();
        let mut ctors = BTreeSet::new();
        for atom in ax.form.atoms() {
            rels.insert(atom.rel.clone());
            atom.args.iter().for_each(|t| walk(t, &mut ctors));
        }
        (rels, ctors)
    }

    /// Elements declared identically in both systems.
    pub fn intersect(&self, other: &SignSystem) -> SignSystem {
        let mut out = SignSystem::new(format!("{}_meet_{}", self.name, other.name));
        out.sorts = common(&self.sorts, &other.sorts);
        out.data_sorts = common(&self.data_sorts, &other.data_sorts);
        let has = |s: &Name, out: &SignSystem| out.has_sort_or_data(s);
        out.ctors = common(&self.ctors, &other.ctors)
            .into_iter()
            .filter(|(_, c)| c.args.iter().chain([&c.result]).all(|s| has(s, &out)))
            .collect();
        out.rels = common(&self.rels, &other.rels)
            .into_iter()
            .filter(|(_, r)| r.args.iter().all(|s| has(s, &out)))
            .collect();
        out.axioms = common(&self.axioms, &other.axioms)
            .into_iter()
            .filter(|(_, ax)| {
                let (rels, ctors) = Self::axiom_vocabulary(ax);
                rels.iter().all(|r| out.rels.contains_key(r)) && ctors.iter().all(|c| out.ctors.contains_key(c))
            })
            .collect();
        let (oa, ob) = (self.sort_order(), other.sort_order());
        let keep: BTreeSet<Name> = out.sorts.keys().cloned().collect();
        let shared: BTreeSet<(Name, Name)> = oa
            .strict_pairs()
            .into_iter()
            .filter(|(a, b)| ob.leq(a, b) && keep.contains(a) && keep.contains(b))
            .collect();
        out.subsorts = SortOrder::new(keep.iter().map(String::as_str), &shared).reduced_edges(&keep);
        out
    }

    /// Equality of every element, with the subsort order compared as an order
    /// rather than as an edge list. System names are ignored.
    pub fn same_elements(&self, other: &SignSystem) -> bool {
        self.sorts == other.sorts
            && self.data_sorts == other.data_sorts
            && self.ctors == other.ctors
            && self.rels == other.rels
            && self.axioms == other.axioms
            && self.sort_order().strict_pairs() == other.sort_order().strict_pairs()
    }

    pub fn is_subsystem_of(&self, other: &SignSystem) -> bool {
        self.intersect(other).same_elements(self)
    }
}

fn common<V: PartialEq + Clone>(a: &BTreeMap<Name, V>, b: &BTreeMap<Name, V>) -> BTreeMap<Name, V> {
    a.iter().filter(|(k, v)| b.get(*k) == Some(*v)).map(|(k, v)| (k.clone(), v.clone())).collect()
}

fn subsort_cycles(order: &SortOrder) -> Vec<Violation> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (a, ups) in &order.above {
        if seen.contains(a) {
            continue;
        }
        let class: Vec<Name> = ups.iter().filter(|b| order.leq(b, a)).cloned().collect();
        if class.len() > 1 {
            seen.extend(class.iter().cloned());
            out.push(Violation::SubsortCycle { sorts: class });
        }
    }
    out
}

pub fn validate_system(sys: &SignSystem) -> Vec<Violation> {
    sys.validate()
}

pub fn intersect(a: &SignSystem, b: &SignSystem) -> SignSystem {
    a.intersect(b)
}

pub fn is_subsystem(a: &SignSystem, b: &SignSystem) -> bool {
    a.is_subsystem_of(b)
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn toy_is_valid() {
        assert_eq!(toy().validate(), vec![]);
    }

    #[test]
    fn two_cycle_is_reported_once() {
        let sys = SignSystem::new("C").with_sort("A", 0).with_sort("B", 0).with_subsort("A", "B").with_subsort("B", "A");
        assert_eq!(sys.validate(), vec![Violation::SubsortCycle { sorts: vec!["A".into(), "B".into()] }]);
    }

    #[test]
    fn fact_over_undeclared_relation() {
        let sys = toy().with_axiom(Axiom::fact("f9", 0, Atom::new("glows", vec![leaf()])));
        let v = sys.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].code(), "UnknownRelation");
    }

    #[test]
    fn unsafe_rule_and_nonground_fact() {
        let sys = toy()
            .with_axiom(Axiom::rule(
                "bad",
                0,
                vec![Atom::new("fits", vec![Term::var("X")])],
                Atom::new("touches", vec![Term::var("X"), Term::var("Z")]),
            ))
            .with_axiom(Axiom::fact("open", 0, Atom::new("fits", vec![Term::var("W")])));
        let codes: Vec<_> = sys.validate().iter().map(Violation::code).collect();
        assert_eq!(codes, vec!["UnsafeRule", "NonGroundFact"]);
    }

    #[test]
    fn data_sorts_stay_out_of_the_hierarchy() {
        let sys = toy().with_data("Ohm").with_subsort("Ohm", "Whole");
        assert_eq!(sys.validate(), vec![Violation::DataSubsort { sub: "Ohm".into(), sup: "Whole".into() }]);
        let clash = toy().with_data("Part");
        assert_eq!(clash.validate()[0].code(), "DuplicateName");
    }

    #[test]
    fn least_sorts() {
        let toy = toy();
        assert_eq!(toy.least_sort(&leaf()).unwrap(), "Part");
        assert_eq!(toy.least_sort(&pair(leaf(), leaf())).unwrap(), "Whole");
        let err = toy.least_sort(&pair(leaf(), pair(leaf(), leaf()))).unwrap_err();
        assert_eq!(
            err,
            SortError::IllSorted { ctor: "pair".into(), position: 1, expected: "Part".into(), found: "Whole".into() }
        );
    }

    #[test]
    fn literals_take_their_position_sort() {
        let sys = SignSystem::new("D").with_sort("Probe", 0).with_data("Ohm").with_rel("reads", &["Probe", "Ohm"], RelKind::Internal).with_ctor("probe", &[], "Probe", 0);
        let mut ax = Axiom::fact("r", 0, Atom::new("reads", vec![Term::constant("probe"), Term::Lit { sort: String::new(), value: "12".into() }]));
        sys.resolve_literals(&mut ax);
        let AxiomForm::Fact(atom) = &ax.form else { unreachable!() };
        assert_eq!(atom.args[1], Term::Lit { sort: "Ohm".into(), value: "12".into() });
        assert_eq!(sys.with_axiom(ax).validate(), vec![]);
    }

    #[test]
    fn intersection_cases() {
        let toy = toy();
        assert!(toy.intersect(&toy).same_elements(&toy));
        let other = SignSystem::new("Other").with_sort("Gear", 0).with_ctor("g", &[], "Gear", 0);
        assert!(toy.intersect(&other).is_empty());

        let mut lifted = toy.clone();
        lifted.sorts.get_mut("Part").unwrap().level = 2;
        let meet = toy.intersect(&lifted);
        assert_eq!(meet.sorts.keys().collect::<Vec<_>>(), vec!["Whole"]);
        assert!(meet.ctors.is_empty());
        assert!(meet.rels.contains_key("fits") && !meet.rels.contains_key("touches"));
        assert!(meet.axioms.is_empty());
        assert!(meet.subsorts.is_empty());
        assert_eq!(meet.validate(), vec![]);
    }

    #[test]
    fn subsystem_cases() {
        let toy = toy();
        assert!(SignSystem::new("E").is_subsystem_of(&toy));
        assert!(toy.is_subsystem_of(&toy));
        let mut without_f2 = toy.clone();
        without_f2.axioms.remove("f2");
        assert!(!toy.is_subsystem_of(&without_f2));
        assert!(without_f2.is_subsystem_of(&toy));
    }

    #[test]
    fn intersection_keeps_order_not_edges() {
        let chain = SignSystem::new("Chain").with_sort("A", 0).with_sort("B", 0).with_sort("C", 0).with_subsort("A", "B").with_subsort("B", "C");
        let shortcut = chain.clone().with_subsort("A", "C");
        let meet = chain.intersect(&shortcut);
        assert_eq!(meet.subsorts, chain.subsorts);
        assert!(chain.same_elements(&shortcut));
    }
}
