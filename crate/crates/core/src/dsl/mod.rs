//! The workspace language: systems, morphisms, scenarios and blends in one
//! text file.
//!
//! ```text
//! system Toy {
//!   sort Part level 0;
//!   ctor leaf : -> Part prio 1;
//!   rel touches(Part, Part);
//!   fact f1 rank 1 : touches(leaf, leaf);
//! }
//! morphism Id : Toy -> Toy { sort Part -> Part; ctor leaf -> leaf; rel touches -> touches; }
//! ```
//!
//! Identifiers starting with an uppercase letter stand for variables when
//! used bare in a term, unless a nullary constructor of that name is in
//! scope. String literals take the data sort of their argument position.

mod json;
mod lexer;
mod parser;
mod printer;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Serialize, Serializer};

use crate::blending::{BlendInput, Correspondence, MatchMode};
use crate::dynamics::{ratio_str, CandidateTransition, FStep, Ratio, Scenario, SemioticComponent};
use crate::morphism::SemioticMorphism;
use crate::system::{Atom, Axiom, Name, SignSystem, Term};

pub use json::{to_json, to_json_value};
pub use printer::{print, print_blend, print_morphism, print_scenario, print_system};

/// 1-based line and column.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Syntax,
    Resolution,
    Validation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub pos: Pos,
    pub code: &'static str,
    pub category: Category,
    pub message: String,
}

impl Diagnostic {
    pub fn syntax(pos: Pos, code: &'static str, message: impl Into<String>) -> Self {
        Diagnostic { pos, code, category: Category::Syntax, message: message.into() }
    }

    pub fn resolution(pos: Pos, code: &'static str, message: impl Into<String>) -> Self {
        Diagnostic { pos, code, category: Category::Resolution, message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.pos, self.code, self.message)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ItemKind {
    System,
    Morphism,
    Scenario,
    Blend,
}

impl fmt::Display for ItemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ItemKind::System => "system",
            ItemKind::Morphism => "morphism",
            ItemKind::Scenario => "scenario",
            ItemKind::Blend => "blend",
        })
    }
}

fn ser_ratio<S: Serializer>(r: &Ratio, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&ratio_str(r))
}

fn ser_gamma<S: Serializer>(g: &Option<(Ratio, Ratio)>, s: S) -> Result<S::Ok, S::Error> {
    g.as_ref().map(|(u, d)| [ratio_str(u), ratio_str(d)]).serialize(s)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CandidateDecl {
    pub label: Name,
    #[serde(serialize_with = "ser_ratio")]
    pub weight: Ratio,
    pub target: Name,
    pub morphism: Name,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ComponentDecl {
    pub fstep: FStep,
    pub candidates: Vec<CandidateDecl>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScenarioDecl {
    pub name: Name,
    pub init: Name,
    pub seed: u64,
    /// `(gamma_up, gamma_down)`; the defaults apply when absent.
    #[serde(serialize_with = "ser_gamma")]
    pub gamma: Option<(Ratio, Ratio)>,
    pub components: Vec<ComponentDecl>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", content = "pairs", rename_all = "lowercase")]
pub enum MatchDecl {
    Auto,
    Explicit(Correspondence),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlendDecl {
    pub name: Name,
    pub init: Name,
    pub f0: Option<FStep>,
    pub target: Name,
    pub target_via: Name,
    pub source: Name,
    pub source_via: Name,
    pub f1_target: Option<FStep>,
    pub f1_source: Option<FStep>,
    #[serde(rename = "match")]
    pub match_decl: MatchDecl,
    pub association: Option<Name>,
    pub f2: Option<FStep>,
    pub threshold: u32,
}

/// A parsed file. Source positions are kept for diagnostics but take no
/// part in equality.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Workspace {
    pub systems: BTreeMap<Name, SignSystem>,
    pub morphisms: BTreeMap<Name, SemioticMorphism>,
    pub scenarios: BTreeMap<Name, ScenarioDecl>,
    pub blends: BTreeMap<Name, BlendDecl>,
    #[serde(skip)]
    pub positions: BTreeMap<(ItemKind, Name), Pos>,
}

impl PartialEq for Workspace {
    fn eq(&self, other: &Self) -> bool {
        self.systems == other.systems
            && self.morphisms == other.morphisms
            && self.scenarios == other.scenarios
            && self.blends == other.blends
    }
}

impl Eq for Workspace {}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum LookupError {
    #[error("no {kind} named `{name}`")]
    Missing { kind: ItemKind, name: Name },
}

impl Workspace {
    pub fn is_empty(&self) -> bool {
        self.systems.is_empty() && self.morphisms.is_empty() && self.scenarios.is_empty() && self.blends.is_empty()
    }

    pub fn position(&self, kind: ItemKind, name: &str) -> Pos {
        self.positions.get(&(kind, name.to_string())).copied().unwrap_or_default()
    }

    fn has(&self, kind: ItemKind, name: &str) -> bool {
        match kind {
            ItemKind::System => self.systems.contains_key(name),
            ItemKind::Morphism => self.morphisms.contains_key(name),
            ItemKind::Scenario => self.scenarios.contains_key(name),
            ItemKind::Blend => self.blends.contains_key(name),
        }
    }

    pub fn system(&self, name: &str) -> Result<&SignSystem, LookupError> {
        self.systems.get(name).ok_or_else(|| LookupError::Missing { kind: ItemKind::System, name: name.into() })
    }

    pub fn morphism(&self, name: &str) -> Result<&SemioticMorphism, LookupError> {
        self.morphisms.get(name).ok_or_else(|| LookupError::Missing { kind: ItemKind::Morphism, name: name.into() })
    }

    /// The runnable form of a scenario block.
    pub fn scenario(&self, name: &str) -> Result<Scenario, LookupError> {
        let d = self.scenarios.get(name).ok_or_else(|| LookupError::Missing { kind: ItemKind::Scenario, name: name.into() })?;
        let (gamma_up, gamma_down) = d.gamma.clone().unwrap_or_else(Scenario::default_gammas);
        let mut components = Vec::new();
        for c in &d.components {
            let mut candidates = Vec::new();
            for cand in &c.candidates {
                candidates.push(CandidateTransition {
                    label: cand.label.clone(),
                    target: self.system(&cand.target)?.clone(),
                    morphism: self.morphism(&cand.morphism)?.clone(),
                    weight: cand.weight.clone(),
                });
            }
            components.push(SemioticComponent { fstep: c.fstep.clone(), candidates });
        }
        Ok(Scenario {
            name: d.name.clone(),
            initial: self.system(&d.init)?.clone(),
            components,
            seed: d.seed,
            gamma_up,
            gamma_down,
        })
    }

    /// The runnable form of a blend block.
    pub fn blend_input(&self, name: &str) -> Result<BlendInput, LookupError> {
        let d = self.blends.get(name).ok_or_else(|| LookupError::Missing { kind: ItemKind::Blend, name: name.into() })?;
        Ok(BlendInput {
            name: d.name.clone(),
            xi0: self.system(&d.init)?.clone(),
            f0: d.f0.clone(),
            target: self.system(&d.target)?.clone(),
            source: self.system(&d.source)?.clone(),
            mu1: self.morphism(&d.target_via)?.clone(),
            mu1p: self.morphism(&d.source_via)?.clone(),
            f1_target: d.f1_target.clone(),
            f1_source: d.f1_source.clone(),
            f2: d.f2.clone(),
            match_mode: match &d.match_decl {
                MatchDecl::Auto => MatchMode::Auto,
                MatchDecl::Explicit(c) => MatchMode::Explicit(c.clone()),
            },
            via: d.association.as_deref().map(|a| self.system(a).cloned()).transpose()?,
            rank_threshold: d.threshold,
        })
    }
}

/// Parses, resolves cross-references and validates every system.
pub fn parse(text: &str) -> Result<Workspace, Vec<Diagnostic>> {
    let tokens = lexer::lex(text).map_err(|d| vec![d])?;
    let (mut ws, mut diags) = parser::parse_tokens(tokens).map_err(|d| vec![d])?;
    finish(&mut ws);
    diags.extend(resolve(&ws));
    if diags.is_empty() {
        Ok(ws)
    } else {
        diags.sort_by(|a, b| (a.pos, a.category).cmp(&(b.pos, b.category)));
        Err(diags)
    }
}

/// Parses one ground atom against `sys`: bare names resolve to nullary
/// constructors and literals take their data sorts from `sys`.
pub fn parse_atom(text: &str, sys: &SignSystem) -> Result<Atom, Diagnostic> {
    let tokens = lexer::lex(text)?;
    let atom = parser::parse_atom_tokens(tokens)?;
    let mut ax = Axiom::fact("query", 0, atom);
    let nullary: BTreeSet<Name> = sys.ctors.values().filter(|c| c.args.is_empty()).map(|c| c.name.clone()).collect();
    fix_constants(&mut ax, &nullary);
    sys.resolve_literals(&mut ax);
    let crate::system::AxiomForm::Fact(atom) = ax.form else { unreachable!("built as a fact") };
    if let Some(v) = atom.vars().into_iter().next() {
        return Err(Diagnostic::syntax(Pos { line: 1, col: 1 }, "NotGround", format!("`{v}` is a variable; properties must be ground")));
    }
    Ok(atom)
}

fn fix_constants(ax: &mut Axiom, nullary: &BTreeSet<Name>) {
    fn constants(t: &mut Term, nullary: &BTreeSet<Name>) {
        match t {
            Term::Var(v) if nullary.contains(v.as_str()) => *t = Term::constant(v.clone()),
            Term::App { args, .. } => args.iter_mut().for_each(|a| constants(a, nullary)),
            _ => {}
        }
    }
    for atom in ax.form.atoms_mut() {
        atom.args.iter_mut().for_each(|a| constants(a, nullary));
    }
}

/// Turns bare uppercase names that denote nullary constructors back into
/// constants and assigns data sorts to literals.
fn finish(ws: &mut Workspace) {
    let fix = fix_constants;

    let mut everywhere = BTreeSet::new();
    for sys in ws.systems.values_mut() {
        let nullary: BTreeSet<Name> = sys.ctors.values().filter(|c| c.args.is_empty()).map(|c| c.name.clone()).collect();
        let mut axioms = std::mem::take(&mut sys.axioms);
        for ax in axioms.values_mut() {
            fix(ax, &nullary);
            sys.resolve_literals(ax);
        }
        sys.axioms = axioms;
        everywhere.extend(nullary);
    }
    let mut steps: Vec<&mut FStep> = Vec::new();
    for sc in ws.scenarios.values_mut() {
        steps.extend(sc.components.iter_mut().map(|c| &mut c.fstep));
    }
    for b in ws.blends.values_mut() {
        steps.extend([&mut b.f0, &mut b.f1_target, &mut b.f1_source, &mut b.f2].into_iter().flatten());
    }
    for f in &steps {
        everywhere.extend(f.div.ctors.iter().filter(|c| c.args.is_empty()).map(|c| c.name.clone()));
    }
    for f in steps {
        f.conv.axioms.iter_mut().for_each(|ax| fix(ax, &everywhere));
    }
}

fn resolve(ws: &Workspace) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut need = |at: (ItemKind, &str), kind: ItemKind, name: &str, what: &str| {
        if !ws.has(kind, name) {
            out.push(Diagnostic::resolution(
                ws.position(at.0, at.1),
                "UnresolvedReference",
                format!("{} `{}` refers to unknown {kind} `{name}` ({what})", at.0, at.1),
            ));
            false
        } else {
            true
        }
    };
    let mut endpoints = Vec::new();
    for m in ws.morphisms.values() {
        let at = (ItemKind::Morphism, m.name.as_str());
        need(at, ItemKind::System, &m.from, "domain");
        need(at, ItemKind::System, &m.to, "codomain");
    }
    for sc in ws.scenarios.values() {
        let at = (ItemKind::Scenario, sc.name.as_str());
        need(at, ItemKind::System, &sc.init, "init");
        for (i, c) in sc.components.iter().enumerate() {
            for cand in &c.candidates {
                let what = format!("candidate `{}` of component {i}", cand.label);
                let t = need(at, ItemKind::System, &cand.target, &what);
                if need(at, ItemKind::Morphism, &cand.morphism, &what) && t {
                    endpoints.push((at, &cand.morphism, None, Some(&cand.target)));
                }
            }
        }
    }
    for b in ws.blends.values() {
        let at = (ItemKind::Blend, b.name.as_str());
        let init = need(at, ItemKind::System, &b.init, "init");
        let t = need(at, ItemKind::System, &b.target, "target");
        let s = need(at, ItemKind::System, &b.source, "source");
        if need(at, ItemKind::Morphism, &b.target_via, "target morphism") && init && t {
            endpoints.push((at, &b.target_via, Some(&b.init), Some(&b.target)));
        }
        if need(at, ItemKind::Morphism, &b.source_via, "source morphism") && init && s {
            endpoints.push((at, &b.source_via, Some(&b.init), Some(&b.source)));
        }
        if let Some(a) = &b.association {
            need(at, ItemKind::System, a, "association");
        }
    }
    for ((kind, name), m, from, to) in endpoints {
        let m = &ws.morphisms[m];
        for (want, got, end) in [(from, &m.from, "domain"), (to, &m.to, "codomain")] {
            if let Some(want) = want.filter(|w| *w != got) {
                out.push(Diagnostic::resolution(
                    ws.position(kind, name),
                    "MorphismEndpoint",
                    format!("{kind} `{name}` needs morphism `{}` with {end} `{want}`, found `{got}`", m.name),
                ));
            }
        }
    }
    for sys in ws.systems.values() {
        for v in sys.validate() {
            out.push(Diagnostic {
                pos: ws.position(ItemKind::System, &sys.name),
                code: v.code(),
                category: Category::Validation,
                message: format!("system `{}`: {v}", sys.name),
            });
        }
    }
    out
}
