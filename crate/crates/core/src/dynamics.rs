//! The creative process as a sequence of Basic Semiotic Components.
//!
//! Each component applies `f = Δ⁻ ∘ Δ⁺` to the current system and then
//! moves to one of several candidate systems through a morphism, chosen
//! with probability proportional to the candidate's current weight. Weights
//! are reinforced across components, so successive distributions depend on
//! earlier choices.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::ser::SerializeStruct;
use serde::Serialize;

use crate::entail::{closure, epsilon, GroundModel};
use crate::morphism::{verify, SemioticMorphism};
use crate::rng::Lcg;
use crate::system::{Axiom, Constructor, DataSortDecl, Name, Relation, SignSystem, SortDecl, Violation};

pub type Ratio = BigRational;

/// Renders a rational as `n/d`.
pub fn ratio_str(r: &Ratio) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `3`, `0.25` or `1/4` exactly.
pub fn parse_ratio(s: &str) -> Option<Ratio> {
    if let Some((n, d)) = s.split_once('/') {
        let (n, d): (BigInt, BigInt) = (n.trim().parse().ok()?, d.trim().parse().ok()?);
        return (!d.is_zero()).then(|| Ratio::new(n, d));
    }
    match s.split_once('.') {
        None => Some(Ratio::from_integer(s.parse().ok()?)),
        Some((int, frac)) => {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            let digits: BigInt = format!("{int}{frac}").parse().ok()?;
            Some(Ratio::new(digits, BigInt::from(10).pow(frac.len() as u32)))
        }
    }
}

/// Δ⁺: new sorts and/or data sorts, and new constructors.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DivergenceDelta {
    pub sorts: Vec<SortDecl>,
    pub data: Vec<DataSortDecl>,
    pub subsorts: Vec<(Name, Name)>,
    pub ctors: Vec<Constructor>,
}

/// Δ⁻: new relations and/or axioms.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ConvergenceDelta {
    pub rels: Vec<Relation>,
    pub axioms: Vec<Axiom>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FStep {
    pub div: DivergenceDelta,
    pub conv: ConvergenceDelta,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DeltaError {
    #[error("EmptyDelta: {0}")]
    EmptyDelta(&'static str),
    #[error("NameCollision: {kind} `{name}` already exists")]
    NameCollision { kind: &'static str, name: Name },
    #[error("RankTamper: axiom `{axiom}` has rank {existing}, delta gives {proposed}")]
    RankTamper { axiom: Name, existing: u32, proposed: u32 },
    #[error("InvalidResult: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidResult(Vec<Violation>),
}

impl DeltaError {
    pub fn code(&self) -> &'static str {
        match self {
            DeltaError::EmptyDelta(_) => "EmptyDelta",
            DeltaError::NameCollision { .. } => "NameCollision",
            DeltaError::RankTamper { .. } => "RankTamper",
            DeltaError::InvalidResult(_) => "InvalidResult",
        }
    }
}

fn checked(sys: SignSystem) -> Result<SignSystem, DeltaError> {
    let v = sys.validate();
    if v.is_empty() {
        Ok(sys)
    } else {
        Err(DeltaError::InvalidResult(v))
    }
}

/// `⟨S ∪ S′, V ∪ V′, C ∪ C′, R, A⟩` with `C′ ≠ ∅` and `S′ ∪ V′ ≠ ∅`.
pub fn apply_divergence(sys: &SignSystem, d: &DivergenceDelta) -> Result<SignSystem, DeltaError> {
    if d.ctors.is_empty() {
        return Err(DeltaError::EmptyDelta("divergence adds no constructor"));
    }
    if d.sorts.is_empty() && d.data.is_empty() {
        return Err(DeltaError::EmptyDelta("divergence adds no sort or data sort"));
    }
    let mut out = sys.clone();
    let collision = |kind, name: &Name| DeltaError::NameCollision { kind, name: name.clone() };
    for s in &d.sorts {
        if out.has_sort_or_data(&s.name) {
            return Err(collision("sort", &s.name));
        }
        out.sorts.insert(s.name.clone(), s.clone());
    }
    for s in &d.data {
        if out.has_sort_or_data(&s.name) {
            return Err(collision("data sort", &s.name));
        }
        out.data_sorts.insert(s.name.clone(), s.clone());
    }
    for c in &d.ctors {
        if out.ctors.insert(c.name.clone(), c.clone()).is_some() {
            return Err(collision("constructor", &c.name));
        }
    }
    out.subsorts.extend(d.subsorts.iter().cloned());
    checked(out)
}

/// `⟨S, V, C, R ∪ R″, A ∪ A″⟩` with `R″ ∪ A″ ≠ ∅`. Existing ranks are fixed.
pub fn apply_convergence(sys: &SignSystem, d: &ConvergenceDelta) -> Result<SignSystem, DeltaError> {
    if d.rels.is_empty() && d.axioms.is_empty() {
        return Err(DeltaError::EmptyDelta("convergence adds no relation or axiom"));
    }
    let mut out = sys.clone();
    for r in &d.rels {
        if out.rels.insert(r.name.clone(), r.clone()).is_some() {
            return Err(DeltaError::NameCollision { kind: "relation", name: r.name.clone() });
        }
    }
    for ax in &d.axioms {
        if let Some(existing) = out.axioms.get(&ax.name) {
            if existing.rank != ax.rank {
                return Err(DeltaError::RankTamper { axiom: ax.name.clone(), existing: existing.rank, proposed: ax.rank });
            }
            return Err(DeltaError::NameCollision { kind: "axiom", name: ax.name.clone() });
        }
        let mut ax = ax.clone();
        out.resolve_literals(&mut ax);
        out.axioms.insert(ax.name.clone(), ax);
    }
    checked(out)
}

/// `Δ⁻(Δ⁺(sys))` and its cost `|A| + |R|` of the result.
pub fn apply_f(sys: &SignSystem, f: &FStep) -> Result<(SignSystem, usize), DeltaError> {
    let out = apply_convergence(&apply_divergence(sys, &f.div)?, &f.conv)?;
    let cost = out.axioms.len() + out.rels.len();
    Ok((out, cost))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateTransition {
    pub label: Name,
    pub target: SignSystem,
    pub morphism: SemioticMorphism,
    pub weight: Ratio,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemioticComponent {
    pub fstep: FStep,
    pub candidates: Vec<CandidateTransition>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scenario {
    pub name: Name,
    pub initial: SignSystem,
    pub components: Vec<SemioticComponent>,
    pub seed: u64,
    pub gamma_up: Ratio,
    pub gamma_down: Ratio,
}

impl Scenario {
    pub fn default_gammas() -> (Ratio, Ratio) {
        (Ratio::new(2.into(), 10.into()), Ratio::new(1.into(), 10.into()))
    }

    /// Static checks: gammas in `[0, 1)`, positive weights, unique labels per
    /// component, at least one candidate per component.
    pub fn check(&self) -> Result<(), ProcessError> {
        for g in [&self.gamma_up, &self.gamma_down] {
            if g.is_negative() || *g >= Ratio::one() {
                return Err(ProcessError::BadScenario(format!("gamma {} is outside [0, 1)", ratio_str(g))));
            }
        }
        for (i, c) in self.components.iter().enumerate() {
            if c.candidates.is_empty() {
                return Err(ProcessError::BadScenario(format!("component {i} has no candidates")));
            }
            let mut seen = BTreeSet::new();
            for cand in &c.candidates {
                if !cand.weight.is_positive() {
                    return Err(ProcessError::BadScenario(format!("candidate `{}` has non-positive weight", cand.label)));
                }
                if !seen.insert(&cand.label) {
                    return Err(ProcessError::BadScenario(format!("duplicate candidate `{}` in component {i}", cand.label)));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ProcessError {
    #[error("component {index}: {source}")]
    Delta { index: usize, source: DeltaError },
    #[error("InfeasibleComponent: no candidate of component {index} verifies")]
    InfeasibleComponent { index: usize },
    #[error("TrajectoryMismatch at step {index}: {reason}")]
    TrajectoryMismatch { index: usize, reason: String },
    #[error("invalid scenario: {0}")]
    BadScenario(String),
}

/// One executed component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrajectoryStep {
    pub index: usize,
    pub feasible: Vec<Name>,
    pub probabilities: Vec<Ratio>,
    pub chosen: Name,
    pub cost_f: usize,
    pub cost_mu: usize,
    /// ε of the post-f system.
    pub epsilon_before: usize,
    /// ε of the chosen target.
    pub epsilon: usize,
    /// Stored weights of the feasible candidates before and after reinforcement.
    pub weights_before: Vec<Ratio>,
    pub weights_after: Vec<Ratio>,
    pub warnings: Vec<String>,
}

impl TrajectoryStep {
    pub fn natural(&self) -> bool {
        self.epsilon_before > self.epsilon
    }

    pub fn chosen_index(&self) -> usize {
        self.feasible.iter().position(|l| *l == self.chosen).expect("chosen is feasible")
    }
}

impl Serialize for TrajectoryStep {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("TrajectoryStep", 7)?;
        st.serialize_field("index", &self.index)?;
        st.serialize_field("feasible", &self.feasible)?;
        st.serialize_field("p", &self.probabilities.iter().map(ratio_str).collect::<Vec<_>>())?;
        st.serialize_field("chosen", &self.chosen)?;
        st.serialize_field("cost_f", &self.cost_f)?;
        st.serialize_field("cost_mu", &self.cost_mu)?;
        st.serialize_field("epsilon", &self.epsilon)?;
        st.end()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Trajectory {
    pub scenario: Name,
    pub steps: Vec<TrajectoryStep>,
}

impl Trajectory {
    pub fn total_f(&self) -> usize {
        self.steps.iter().map(|s| s.cost_f).sum()
    }

    pub fn total_mu(&self) -> usize {
        self.steps.iter().map(|s| s.cost_mu).sum()
    }

    /// `T = T_f + T_μ`.
    pub fn total(&self) -> usize {
        self.total_f() + self.total_mu()
    }
}

/// Ω = ⟨Φ, Λ⟩.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductModel {
    pub phi: SignSystem,
    pub lambda: GroundModel,
}

impl ProductModel {
    pub fn of(phi: SignSystem) -> Self {
        let lambda = closure(&phi);
        ProductModel { phi, lambda }
    }
}

/// Per-label weights carried from component to component.
pub type WeightBook = BTreeMap<Name, Ratio>;

/// Runs one component: apply f, keep the candidates whose morphism verifies,
/// sample one by inverse CDF, reinforce weights.
pub fn run_component(
    sys: &SignSystem,
    comp: &SemioticComponent,
    index: usize,
    rng: &mut Lcg,
    weights: &mut WeightBook,
    gamma_up: &Ratio,
    gamma_down: &Ratio,
) -> Result<(TrajectoryStep, SignSystem), ProcessError> {
    let (post_f, cost_f) = apply_f(sys, &comp.fstep).map_err(|source| ProcessError::Delta { index, source })?;
    let mut warnings = Vec::new();
    let feasible: Vec<&CandidateTransition> = comp
        .candidates
        .iter()
        .filter(|c| {
            let diags = verify(&c.morphism, &post_f, &c.target);
            if let Some(first) = diags.first() {
                warnings.push(format!("candidate `{}` dropped: {first}", c.label));
            }
            diags.is_empty()
        })
        .collect();
    if feasible.is_empty() {
        return Err(ProcessError::InfeasibleComponent { index });
    }

    let current: Vec<Ratio> =
        feasible.iter().map(|c| weights.get(&c.label).cloned().unwrap_or_else(|| c.weight.clone())).collect();
    let total: Ratio = current.iter().sum();
    let probabilities: Vec<Ratio> = current.iter().map(|w| w / &total).collect();

    let u = Ratio::from_float(rng.next_f64()).expect("finite draw");
    let mut cumulative = Ratio::zero();
    let mut pick = feasible.len() - 1;
    for (k, p) in probabilities.iter().enumerate() {
        cumulative += p;
        if u < cumulative {
            pick = k;
            break;
        }
    }

    let up = Ratio::one() + gamma_up;
    let down = Ratio::one() - gamma_down;
    let weights_after: Vec<Ratio> =
        current.iter().enumerate().map(|(k, w)| if k == pick { w * &up } else { w * &down }).collect();
    for (c, w) in feasible.iter().zip(&weights_after) {
        weights.insert(c.label.clone(), w.clone());
    }

    let chosen = feasible[pick];
    let cost_mu = chosen.morphism.size();
    if cost_mu >= cost_f {
        warnings.push(format!("cost_mu {cost_mu} >= cost_f {cost_f}: translation is not cheap relative to f"));
    }
    let step = TrajectoryStep {
        index,
        feasible: feasible.iter().map(|c| c.label.clone()).collect(),
        probabilities,
        chosen: chosen.label.clone(),
        cost_f,
        cost_mu,
        epsilon_before: epsilon(&post_f),
        epsilon: epsilon(&chosen.target),
        weights_before: current,
        weights_after,
        warnings,
    };
    Ok((step, chosen.target.clone()))
}

/// A failed run, with the steps completed before the failure.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{error}")]
pub struct RunFailure {
    pub error: ProcessError,
    pub partial: Trajectory,
}

/// Folds [`run_component`] over the scenario, threading the generator and
/// the weight book. `cap` limits the number of components executed.
pub fn run_process_capped(sc: &Scenario, cap: Option<usize>) -> Result<(Trajectory, ProductModel), RunFailure> {
    let mut trajectory = Trajectory { scenario: sc.name.clone(), steps: Vec::new() };
    if let Err(error) = sc.check() {
        return Err(RunFailure { error, partial: trajectory });
    }
    let mut rng = Lcg::new(sc.seed);
    let mut weights = WeightBook::new();
    let mut sys = sc.initial.clone();
    let n = cap.map_or(sc.components.len(), |c| c.min(sc.components.len()));
    for (index, comp) in sc.components.iter().take(n).enumerate() {
        match run_component(&sys, comp, index, &mut rng, &mut weights, &sc.gamma_up, &sc.gamma_down) {
            Ok((step, next)) => {
                trajectory.steps.push(step);
                sys = next;
            }
            Err(error) => return Err(RunFailure { error, partial: trajectory }),
        }
    }
    Ok((trajectory, ProductModel::of(sys)))
}

pub fn run_process(sc: &Scenario) -> Result<(Trajectory, ProductModel), RunFailure> {
    run_process_capped(sc, None)
}

/// Re-executes a recorded run without the generator: every distribution
/// collapses onto the recorded choice.
pub fn replay(t: &Trajectory, sc: &Scenario) -> Result<(SignSystem, Trajectory), ProcessError> {
    let mut sys = sc.initial.clone();
    let mut collapsed = Trajectory { scenario: sc.name.clone(), steps: Vec::new() };
    for step in &t.steps {
        let index = step.index;
        let comp = sc.components.get(index).ok_or_else(|| ProcessError::TrajectoryMismatch {
            index,
            reason: "scenario has no such component".into(),
        })?;
        let (post_f, cost_f) = apply_f(&sys, &comp.fstep).map_err(|source| ProcessError::Delta { index, source })?;
        let cand = comp.candidates.iter().find(|c| c.label == step.chosen).ok_or_else(|| {
            ProcessError::TrajectoryMismatch { index, reason: format!("no candidate labelled `{}`", step.chosen) }
        })?;
        if let Some(d) = verify(&cand.morphism, &post_f, &cand.target).first() {
            return Err(ProcessError::TrajectoryMismatch {
                index,
                reason: format!("candidate `{}` is infeasible: {d}", cand.label),
            });
        }
        collapsed.steps.push(TrajectoryStep {
            index,
            feasible: vec![cand.label.clone()],
            probabilities: vec![Ratio::one()],
            chosen: cand.label.clone(),
            cost_f,
            cost_mu: cand.morphism.size(),
            epsilon_before: epsilon(&post_f),
            epsilon: epsilon(&cand.target),
            weights_before: vec![Ratio::one()],
            weights_after: vec![Ratio::one()],
            warnings: Vec::new(),
        });
        sys = cand.target.clone();
    }
    Ok((sys, collapsed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entail::epsilon;
    use crate::system::fixtures::{leaf, toy};
    use crate::system::{Atom, RelKind};

    fn r(n: i64, d: i64) -> Ratio {
        Ratio::new(n.into(), d.into())
    }

    fn glue() -> DivergenceDelta {
        DivergenceDelta {
            sorts: vec![SortDecl { name: "Glue".into(), level: 0 }],
            ctors: vec![Constructor { name: "stick".into(), args: vec!["Part".into()], result: "Glue".into(), priority: 1 }],
            ..Default::default()
        }
    }

    fn near(with_fact: bool) -> ConvergenceDelta {
        ConvergenceDelta {
            rels: vec![Relation { name: "near".into(), args: vec!["Part".into(), "Part".into()], kind: RelKind::Environmental }],
            axioms: if with_fact { vec![Axiom::fact("n1", 1, Atom::new("near", vec![leaf(), leaf()]))] } else { vec![] },
        }
    }

    #[test]
    fn ratios() {
        assert_eq!(parse_ratio("0.2"), Some(r(1, 5)));
        assert_eq!(parse_ratio("3"), Some(r(3, 1)));
        assert_eq!(parse_ratio("2/8"), Some(r(1, 4)));
        assert_eq!(parse_ratio("1/0"), None);
        assert_eq!(parse_ratio("1."), None);
        assert_eq!(ratio_str(&r(3, 4)), "3/4");
        assert_eq!(ratio_str(&r(1, 1)), "1/1");
    }

    #[test]
    fn divergence() {
        let out = apply_divergence(&toy(), &glue()).unwrap();
        assert_eq!((out.sorts.len(), out.ctors.len()), (3, 3));
        assert_eq!(out.rels, toy().rels);
        let mut no_ctor = glue();
        no_ctor.ctors.clear();
        assert_eq!(apply_divergence(&toy(), &no_ctor).unwrap_err().code(), "EmptyDelta");
        let mut clash = glue();
        clash.sorts[0].name = "Part".into();
        assert!(matches!(apply_divergence(&toy(), &clash), Err(DeltaError::NameCollision { .. })));
    }

    #[test]
    fn convergence() {
        let out = apply_convergence(&toy(), &near(true)).unwrap();
        assert_eq!(epsilon(&out), 2);
        assert_eq!(apply_convergence(&toy(), &ConvergenceDelta::default()).unwrap_err().code(), "EmptyDelta");
        let tamper = ConvergenceDelta {
            rels: vec![],
            axioms: vec![Axiom::fact("f1", 5, Atom::new("touches", vec![leaf(), leaf()]))],
        };
        assert!(matches!(apply_convergence(&toy(), &tamper), Err(DeltaError::RankTamper { existing: 1, proposed: 5, .. })));
    }

    #[test]
    fn f_step_costs() {
        let (out, cost) = apply_f(&toy(), &FStep { div: glue(), conv: near(false) }).unwrap();
        assert_eq!(cost, 3 + 3);
        assert_eq!(cost, out.axioms.len() + out.rels.len());
        let (_, cost) = apply_f(&toy(), &FStep { div: glue(), conv: near(true) }).unwrap();
        assert_eq!(cost, 4 + 3);
        let err = apply_f(&toy(), &FStep { div: glue(), conv: ConvergenceDelta::default() }).unwrap_err();
        assert_eq!(err.code(), "EmptyDelta");

        let glued = ConvergenceDelta {
            rels: vec![Relation { name: "holds".into(), args: vec!["Glue".into()], kind: RelKind::Internal }],
            axioms: vec![Axiom::fact("h", 0, Atom::new("holds", vec![crate::system::Term::app("stick", vec![leaf()])]))],
        };
        assert!(apply_f(&toy(), &FStep { div: glue(), conv: glued }).is_ok());
    }

    fn two_way(w0: Ratio, w1: Ratio) -> (SemioticComponent, SignSystem) {
        let post = apply_f(&toy(), &FStep { div: glue(), conv: near(false) }).unwrap().0;
        let cand = |label: &str, w: Ratio| {
            let mut target = post.clone();
            target.name = format!("T{label}");
            let mut m = SemioticMorphism::identity(&post);
            m.to = target.name.clone();
            CandidateTransition { label: label.into(), target, morphism: m, weight: w }
        };
        (SemioticComponent { fstep: FStep { div: glue(), conv: near(false) }, candidates: vec![cand("a", w0), cand("b", w1)] }, toy())
    }

    #[test]
    fn component_probabilities_and_sampling() {
        let (g_up, g_down) = Scenario::default_gammas();
        let (comp, sys) = two_way(r(2, 1), r(2, 1));
        let (step, _) = run_component(&sys, &comp, 0, &mut Lcg::new(1), &mut WeightBook::new(), &g_up, &g_down).unwrap();
        assert_eq!(step.probabilities, vec![r(1, 2), r(1, 2)]);

        let (comp, sys) = two_way(r(1, 1), r(3, 1));
        let mut book = WeightBook::new();
        let (step, next) = run_component(&sys, &comp, 0, &mut Lcg::new(42), &mut book, &g_up, &g_down).unwrap();
        assert_eq!(step.probabilities, vec![r(1, 4), r(3, 4)]);
        // first draw for seed 42 is 0.568..., past the 1/4 boundary
        assert_eq!(step.chosen, "b");
        assert_eq!(next.name, "Tb");
        assert_eq!(book["b"], r(18, 5));
        assert_eq!(book["a"], r(9, 10));
        assert_eq!(step.cost_mu, 3 + 3 + 3);
        assert!(step.warnings.iter().any(|w| w.contains("cost_mu")));
    }

    #[test]
    fn infeasible_candidates_are_dropped() {
        let (g_up, g_down) = Scenario::default_gammas();
        let (mut comp, sys) = two_way(r(1, 1), r(1, 1));
        comp.candidates[0].morphism.sorts.insert("Ghost".into(), "Part".into());
        let (step, _) = run_component(&sys, &comp, 0, &mut Lcg::new(7), &mut WeightBook::new(), &g_up, &g_down).unwrap();
        assert_eq!(step.feasible, vec!["b".to_string()]);
        assert_eq!(step.probabilities, vec![r(1, 1)]);
        assert!(step.warnings[0].contains("dropped"));
        comp.candidates[1].morphism.sorts.insert("Ghost".into(), "Part".into());
        let err = run_component(&sys, &comp, 3, &mut Lcg::new(7), &mut WeightBook::new(), &g_up, &g_down).unwrap_err();
        assert_eq!(err, ProcessError::InfeasibleComponent { index: 3 });
    }

    #[test]
    fn scenario_checks() {
        let (comp, sys) = two_way(r(1, 1), r(0, 1));
        let (g_up, g_down) = Scenario::default_gammas();
        let sc = Scenario { name: "S".into(), initial: sys, components: vec![comp], seed: 1, gamma_up: g_up, gamma_down: g_down };
        assert!(matches!(sc.check(), Err(ProcessError::BadScenario(_))));
        let mut sc2 = sc.clone();
        sc2.components[0].candidates[1].weight = r(1, 1);
        sc2.gamma_up = r(1, 1);
        assert!(matches!(sc2.check(), Err(ProcessError::BadScenario(_))));
    }

    #[test]
    fn replay_collapses() {
        let (comp, sys) = two_way(r(1, 1), r(3, 1));
        let (g_up, g_down) = Scenario::default_gammas();
        let sc = Scenario { name: "S".into(), initial: sys, components: vec![comp], seed: 42, gamma_up: g_up, gamma_down: g_down };
        let (t, omega) = run_process(&sc).unwrap();
        let (final_sys, collapsed) = replay(&t, &sc).unwrap();
        assert_eq!(final_sys, omega.phi);
        assert_eq!(collapsed.steps[0].probabilities, vec![Ratio::one()]);

        let mut reseeded = sc.clone();
        reseeded.seed = 7;
        assert_eq!(replay(&t, &reseeded).unwrap().0, omega.phi);

        let mut tampered = t.clone();
        tampered.steps[0].chosen = "zzz".into();
        assert!(matches!(replay(&tampered, &sc), Err(ProcessError::TrajectoryMismatch { index: 0, .. })));
    }
}
