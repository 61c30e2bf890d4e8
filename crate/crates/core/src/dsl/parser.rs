use std::collections::BTreeSet;

use super::lexer::{Tok, Token};
use super::{BlendDecl, CandidateDecl, ComponentDecl, Diagnostic, ItemKind, MatchDecl, Pos, ScenarioDecl, Workspace};
use crate::blending::Correspondence;
use crate::dynamics::{parse_ratio, FStep, Ratio};
use crate::morphism::SemioticMorphism;
use crate::system::{Atom, Axiom, Constructor, DataSortDecl, Name, RelKind, Relation, SignSystem, SortDecl, Term};

type PResult<T> = Result<T, Diagnostic>;

enum Decl {
    Sort(SortDecl),
    Data(DataSortDecl),
    Subsort(Name, Name),
    Ctor(Constructor),
    Rel(Relation),
    Axiom(Axiom),
}

impl Decl {
    fn key(&self) -> Option<(&'static str, &Name)> {
        match self {
            Decl::Sort(d) => Some(("sort", &d.name)),
            Decl::Data(d) => Some(("data", &d.name)),
            Decl::Subsort(..) => None,
            Decl::Ctor(c) => Some(("ctor", &c.name)),
            Decl::Rel(r) => Some(("rel", &r.name)),
            Decl::Axiom(a) => Some(("axiom", &a.name)),
        }
    }

    fn divergent(&self) -> bool {
        matches!(self, Decl::Sort(_) | Decl::Data(_) | Decl::Subsort(..) | Decl::Ctor(_))
    }
}

/// Sorts each declaration list by category then name.
pub(super) fn normalize(f: &mut FStep) {
    f.div.sorts.sort();
    f.div.data.sort();
    f.div.subsorts.sort();
    f.div.subsorts.dedup();
    f.div.ctors.sort_by(|a, b| a.name.cmp(&b.name));
    f.conv.rels.sort_by(|a, b| a.name.cmp(&b.name));
    f.conv.axioms.sort_by_key(|a| (axiom_order(a), a.name.clone()));
}

/// Facts, then rules, then denials.
pub(super) fn axiom_order(a: &Axiom) -> u8 {
    match a.form {
        crate::system::AxiomForm::Fact(_) => 0,
        crate::system::AxiomForm::Rule { .. } => 1,
        crate::system::AxiomForm::Denial { .. } => 2,
    }
}

struct Parser {
    toks: Vec<Token>,
    i: usize,
    diags: Vec<Diagnostic>,
}

pub fn parse_tokens(toks: Vec<Token>) -> PResult<(Workspace, Vec<Diagnostic>)> {
    let mut p = Parser { toks, i: 0, diags: Vec::new() };
    let mut ws = Workspace::default();
    while p.peek() != &Tok::Eof {
        let pos = p.pos();
        let kw = p.ident("`system`, `morphism`, `scenario` or `blend`")?;
        let (kind, name) = match kw.as_str() {
            "system" => {
                let s = p.system()?;
                let name = s.name.clone();
                if !ws.systems.contains_key(&name) {
                    ws.systems.insert(name.clone(), s);
                }
                (ItemKind::System, name)
            }
            "morphism" => {
                let m = p.morphism()?;
                let name = m.name.clone();
                ws.morphisms.entry(name.clone()).or_insert(m);
                (ItemKind::Morphism, name)
            }
            "scenario" => {
                let s = p.scenario(pos)?;
                let name = s.name.clone();
                ws.scenarios.entry(name.clone()).or_insert(s);
                (ItemKind::Scenario, name)
            }
            "blend" => {
                let b = p.blend(pos)?;
                let name = b.name.clone();
                ws.blends.entry(name.clone()).or_insert(b);
                (ItemKind::Blend, name)
            }
            other => {
                return Err(Diagnostic::syntax(
                    pos,
                    "SyntaxError",
                    format!("expected `system`, `morphism`, `scenario` or `blend`, found `{other}`"),
                ))
            }
        };
        if ws.positions.contains_key(&(kind, name.clone())) {
            p.diags.push(Diagnostic::resolution(pos, "DuplicateName", format!("{kind} `{name}` is defined twice")));
        } else {
            ws.positions.insert((kind, name), pos);
        }
    }
    Ok((ws, p.diags))
}

/// A single atom followed by end of input.
pub fn parse_atom_tokens(toks: Vec<Token>) -> PResult<Atom> {
    let mut p = Parser { toks, i: 0, diags: Vec::new() };
    let a = p.atom()?;
    p.expect(Tok::Eof)?;
    Ok(a)
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].pos
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].tok.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> PResult<T> {
        Err(Diagnostic::syntax(
            self.pos(),
            "SyntaxError",
            format!("expected {expected}, found {}", self.peek().describe()),
        ))
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.error(&t.describe())
        }
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn ident(&mut self, expected: &str) -> PResult<String> {
        match self.peek() {
            Tok::Ident(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.error(expected),
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> PResult<()> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            self.error(&format!("`{kw}`"))
        }
    }

    fn number(&mut self, expected: &str) -> PResult<(String, Pos)> {
        let pos = self.pos();
        match self.peek() {
            Tok::Number(s) => {
                let s = s.clone();
                self.bump();
                Ok((s, pos))
            }
            _ => self.error(expected),
        }
    }

    fn nat<T: std::str::FromStr>(&mut self) -> PResult<T> {
        let (s, pos) = self.number("a natural number")?;
        s.parse()
            .map_err(|_| Diagnostic::syntax(pos, "BadNumber", format!("`{s}` is not a natural number in range")))
    }

    fn ratio(&mut self) -> PResult<Ratio> {
        let (s, pos) = self.number("a number")?;
        parse_ratio(&s).ok_or_else(|| Diagnostic::syntax(pos, "BadNumber", format!("`{s}` is not a valid number")))
    }

    fn duplicate(&mut self, pos: Pos, what: &str, name: &str) {
        self.diags.push(Diagnostic::resolution(pos, "DuplicateName", format!("{what} `{name}` is declared twice")));
    }

    fn system(&mut self) -> PResult<SignSystem> {
        let name = self.ident("a system name")?;
        self.expect(Tok::LBrace)?;
        let mut sys = SignSystem::new(name);
        let mut seen = BTreeSet::new();
        while !self.eat(&Tok::RBrace) {
            let pos = self.pos();
            let decl = self.decl()?;
            if let Some((kind, n)) = decl.key() {
                if !seen.insert((kind, n.clone())) {
                    self.duplicate(pos, kind, n);
                    continue;
                }
            }
            match decl {
                Decl::Sort(d) => {
                    sys.sorts.insert(d.name.clone(), d);
                }
                Decl::Data(d) => {
                    sys.data_sorts.insert(d.name.clone(), d);
                }
                Decl::Subsort(a, b) => {
                    sys.subsorts.insert((a, b));
                }
                Decl::Ctor(c) => {
                    sys.ctors.insert(c.name.clone(), c);
                }
                Decl::Rel(r) => {
                    sys.rels.insert(r.name.clone(), r);
                }
                Decl::Axiom(a) => {
                    sys.axioms.insert(a.name.clone(), a);
                }
            }
        }
        Ok(sys)
    }

    fn decl(&mut self) -> PResult<Decl> {
        let kw = self.ident("a declaration or `}`")?;
        let d = match kw.as_str() {
            "sort" => {
                let name = self.ident("a sort name")?;
                self.keyword("level")?;
                Decl::Sort(SortDecl { name, level: self.nat()? })
            }
            "data" => Decl::Data(DataSortDecl { name: self.ident("a data sort name")? }),
            "subsort" => {
                let a = self.ident("a sort name")?;
                self.expect(Tok::Less)?;
                Decl::Subsort(a, self.ident("a sort name")?)
            }
            "ctor" => {
                let name = self.ident("a constructor name")?;
                self.expect(Tok::Colon)?;
                let mut args = Vec::new();
                while let Tok::Ident(_) = self.peek() {
                    args.push(self.ident("a sort name")?);
                }
                self.expect(Tok::Arrow)?;
                let result = self.ident("a result sort")?;
                self.keyword("prio")?;
                Decl::Ctor(Constructor { name, args, result, priority: self.nat()? })
            }
            "rel" => {
                let name = self.ident("a relation name")?;
                self.expect(Tok::LParen)?;
                let mut args = vec![self.ident("a sort name")?];
                while self.eat(&Tok::Comma) {
                    args.push(self.ident("a sort name")?);
                }
                self.expect(Tok::RParen)?;
                let kind = if self.is_kw("env") {
                    self.bump();
                    RelKind::Environmental
                } else {
                    RelKind::Internal
                };
                Decl::Rel(Relation { name, args, kind })
            }
            "fact" | "rule" | "deny" => {
                let name = self.ident("an axiom name")?;
                self.keyword("rank")?;
                let rank = self.nat()?;
                self.expect(Tok::Colon)?;
                let mut atoms = vec![self.atom()?];
                if kw != "fact" {
                    while self.eat(&Tok::Comma) {
                        atoms.push(self.atom()?);
                    }
                }
                if kw == "rule" {
                    self.expect(Tok::FatArrow)?;
                    Decl::Axiom(Axiom::rule(name, rank, atoms, self.atom()?))
                } else if kw == "deny" {
                    Decl::Axiom(Axiom::denial(name, rank, atoms))
                } else {
                    Decl::Axiom(Axiom::fact(name, rank, atoms.pop().expect("one atom")))
                }
            }
            _ => {
                self.i -= 1;
                return self.error("`sort`, `data`, `subsort`, `ctor`, `rel`, `fact`, `rule` or `deny`");
            }
        };
        self.expect(Tok::Semi)?;
        Ok(d)
    }

    fn atom(&mut self) -> PResult<Atom> {
        let rel = self.ident("a relation name")?;
        Ok(Atom { rel, args: self.args()? })
    }

    fn args(&mut self) -> PResult<Vec<Term>> {
        self.expect(Tok::LParen)?;
        let mut args = vec![self.term()?];
        while self.eat(&Tok::Comma) {
            args.push(self.term()?);
        }
        self.expect(Tok::RParen)?;
        Ok(args)
    }

    fn term(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Str(value) => {
                self.bump();
                Ok(Term::Lit { sort: Name::new(), value })
            }
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() == Tok::LParen {
                    Ok(Term::App { ctor: name, args: self.args()? })
                } else if name.starts_with(|c: char| c.is_ascii_uppercase()) {
                    Ok(Term::Var(name))
                } else {
                    Ok(Term::constant(name))
                }
            }
            _ => self.error("a term"),
        }
    }

    fn morphism(&mut self) -> PResult<SemioticMorphism> {
        let name = self.ident("a morphism name")?;
        self.expect(Tok::Colon)?;
        let from = self.ident("a domain system")?;
        self.expect(Tok::Arrow)?;
        let to = self.ident("a codomain system")?;
        let mut m = SemioticMorphism::new(name, from, to);
        self.expect(Tok::LBrace)?;
        while !self.eat(&Tok::RBrace) {
            let pos = self.pos();
            let kind = self.ident("`sort`, `ctor`, `rel`, `data` or `}`")?;
            let a = self.ident("a source name")?;
            self.expect(Tok::Arrow)?;
            let b = self.ident("a target name")?;
            let map = match kind.as_str() {
                "sort" => &mut m.sorts,
                "data" => &mut m.data,
                "ctor" => &mut m.ctors,
                "rel" => &mut m.rels,
                _ => {
                    return Err(Diagnostic::syntax(pos, "SyntaxError", format!("expected `sort`, `ctor`, `rel` or `data`, found `{kind}`")))
                }
            };
            if map.insert(a.clone(), b).is_some() {
                self.duplicate(pos, &format!("{kind} mapping"), &a);
            }
            if !self.eat(&Tok::Semi) && *self.peek() != Tok::RBrace {
                return self.error("`;` or `}`");
            }
        }
        Ok(m)
    }

    /// `{ decl* }` holding only divergence or only convergence declarations.
    fn delta_block(&mut self, f: &mut FStep, divergent: bool) -> PResult<()> {
        self.expect(Tok::LBrace)?;
        let mut seen = BTreeSet::new();
        while !self.eat(&Tok::RBrace) {
            let pos = self.pos();
            let decl = self.decl()?;
            if decl.divergent() != divergent {
                let (want, block) = if divergent {
                    ("`sort`, `data`, `subsort` or `ctor`", "diverge")
                } else {
                    ("`rel`, `fact`, `rule` or `deny`", "converge")
                };
                return Err(Diagnostic::syntax(pos, "MisplacedDeclaration", format!("a `{block}` block takes only {want}")));
            }
            if let Some((kind, n)) = decl.key() {
                if !seen.insert((kind, n.clone())) {
                    self.duplicate(pos, kind, n);
                    continue;
                }
            }
            match decl {
                Decl::Sort(d) => f.div.sorts.push(d),
                Decl::Data(d) => f.div.data.push(d),
                Decl::Subsort(a, b) => f.div.subsorts.push((a, b)),
                Decl::Ctor(c) => f.div.ctors.push(c),
                Decl::Rel(r) => f.conv.rels.push(r),
                Decl::Axiom(a) => f.conv.axioms.push(a),
            }
        }
        Ok(())
    }

    /// Sequence of `diverge { … }` / `converge { … }` up to `}`, in any
    /// order. Declarations are kept sorted so printing is canonical.
    fn fstep_body(&mut self, f: &mut FStep, stop_at_candidate: bool) -> PResult<()> {
        loop {
            if self.is_kw("diverge") {
                self.bump();
                self.delta_block(f, true)?;
            } else if self.is_kw("converge") {
                self.bump();
                self.delta_block(f, false)?;
            } else if stop_at_candidate || *self.peek() == Tok::RBrace {
                break;
            } else {
                return self.error("`diverge`, `converge` or `}`");
            }
        }
        normalize(f);
        Ok(())
    }

    fn fblock(&mut self) -> PResult<FStep> {
        let mut f = FStep::default();
        self.expect(Tok::LBrace)?;
        self.fstep_body(&mut f, false)?;
        self.expect(Tok::RBrace)?;
        self.eat(&Tok::Semi);
        Ok(f)
    }

    fn missing(pos: Pos, block: &str, name: &str, field: &str) -> Diagnostic {
        Diagnostic::syntax(pos, "MissingField", format!("{block} `{name}` has no `{field}`"))
    }

    fn scenario(&mut self, start: Pos) -> PResult<ScenarioDecl> {
        let name = self.ident("a scenario name")?;
        self.expect(Tok::LBrace)?;
        let (mut init, mut seed, mut gamma, mut components) = (None, 0, None, Vec::new());
        while !self.eat(&Tok::RBrace) {
            let kw = self.ident("`init`, `seed`, `gamma`, `component` or `}`")?;
            match kw.as_str() {
                "init" => init = Some(self.ident("a system name")?),
                "seed" => seed = self.nat()?,
                "gamma" => gamma = Some((self.ratio()?, self.ratio()?)),
                "component" => {
                    components.push(self.component()?);
                    self.eat(&Tok::Semi);
                    continue;
                }
                _ => {
                    self.i -= 1;
                    return self.error("`init`, `seed`, `gamma`, `component` or `}`");
                }
            }
            self.expect(Tok::Semi)?;
        }
        let init = init.ok_or_else(|| Self::missing(start, "scenario", &name, "init"))?;
        Ok(ScenarioDecl { name, init, seed, gamma, components })
    }

    fn component(&mut self) -> PResult<ComponentDecl> {
        self.expect(Tok::LBrace)?;
        let mut c = ComponentDecl::default();
        self.fstep_body(&mut c.fstep, true)?;
        while self.is_kw("candidate") {
            self.bump();
            let label = self.ident("a candidate label")?;
            self.keyword("weight")?;
            let weight = self.ratio()?;
            self.keyword("target")?;
            let target = self.ident("a system name")?;
            self.keyword("morphism")?;
            let morphism = self.ident("a morphism name")?;
            self.expect(Tok::Semi)?;
            c.candidates.push(CandidateDecl { label, weight, target, morphism });
        }
        if *self.peek() != Tok::RBrace {
            return self.error("`candidate` or `}`");
        }
        self.bump();
        Ok(c)
    }

    fn blend(&mut self, start: Pos) -> PResult<BlendDecl> {
        let name = self.ident("a blend name")?;
        self.expect(Tok::LBrace)?;
        let mut init = None;
        let mut target = None;
        let mut source = None;
        let (mut f0, mut f1_target, mut f1_source, mut f2) = (None, None, None, None);
        let mut match_decl = MatchDecl::Auto;
        let mut association = None;
        let mut threshold = 0;
        const EXPECTED: &str = "`init`, `f0`, `target`, `source`, `f1target`, `f1source`, `match`, `f2`, `threshold` or `}`";
        while !self.eat(&Tok::RBrace) {
            let kw = self.ident(EXPECTED)?;
            match kw.as_str() {
                "f0" => f0 = Some(self.fblock()?),
                "f1target" => f1_target = Some(self.fblock()?),
                "f1source" => f1_source = Some(self.fblock()?),
                "f2" => f2 = Some(self.fblock()?),
                "init" => {
                    init = Some(self.ident("a system name")?);
                    self.expect(Tok::Semi)?;
                }
                "target" | "source" => {
                    let sys = self.ident("a system name")?;
                    self.keyword("via")?;
                    let m = self.ident("a morphism name")?;
                    self.expect(Tok::Semi)?;
                    if kw == "target" {
                        target = Some((sys, m));
                    } else {
                        source = Some((sys, m));
                    }
                }
                "match" => {
                    match_decl = if self.is_kw("auto") {
                        self.bump();
                        MatchDecl::Auto
                    } else {
                        MatchDecl::Explicit(self.pairs()?)
                    };
                    if self.is_kw("via") {
                        self.bump();
                        association = Some(self.ident("an association system")?);
                    }
                    self.expect(Tok::Semi)?;
                }
                "threshold" => {
                    threshold = self.nat()?;
                    self.expect(Tok::Semi)?;
                }
                _ => {
                    self.i -= 1;
                    return self.error(EXPECTED);
                }
            }
        }
        let init = init.ok_or_else(|| Self::missing(start, "blend", &name, "init"))?;
        let (target, target_via) = target.ok_or_else(|| Self::missing(start, "blend", &name, "target"))?;
        let (source, source_via) = source.ok_or_else(|| Self::missing(start, "blend", &name, "source"))?;
        Ok(BlendDecl {
            name,
            init,
            f0,
            target,
            target_via,
            source,
            source_via,
            f1_target,
            f1_source,
            match_decl,
            association,
            f2,
            threshold,
        })
    }

    fn pairs(&mut self) -> PResult<Correspondence> {
        let mut c = Correspondence::default();
        self.expect(Tok::LBrace)?;
        while !self.eat(&Tok::RBrace) {
            let pos = self.pos();
            let kind = self.ident("`sort`, `ctor`, `rel` or `}`")?;
            let t = self.ident("a target name")?;
            self.expect(Tok::Tilde)?;
            let s = self.ident("a source name")?;
            self.expect(Tok::Semi)?;
            let map = match kind.as_str() {
                "sort" => &mut c.sort_pairs,
                "ctor" => &mut c.ctor_pairs,
                "rel" => &mut c.rel_pairs,
                _ => return Err(Diagnostic::syntax(pos, "SyntaxError", format!("expected `sort`, `ctor` or `rel`, found `{kind}`"))),
            };
            if map.insert(t.clone(), s).is_some() {
                self.duplicate(pos, &format!("{kind} pair"), &t);
            }
        }
        Ok(c)
    }
}
