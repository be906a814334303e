//! Class rewriting modulo AC (R/AC): one-step reducts and normalization for
//! a vector system combined with a scalar system.

mod matching;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::ControlFlow;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use matching::{match_ac, AcMatch};

use crate::measure;
use crate::scalar::ScalarSystem;
use crate::syntax::parse_term;
use crate::term::{AcSet, Signature, Sort, Substitution, Term};

pub(crate) use matching::for_each_match;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("left-hand side is a variable")]
    VariableLhs,
    #[error("right-hand side variable `{0}` does not occur on the left")]
    FreeVariable(String),
    #[error("sides have different sorts ({lhs} and {rhs})")]
    SortMismatch { lhs: Sort, rhs: Sort },
}

/// An oriented equation `lhs -> rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub id: String,
    pub lhs: Term,
    pub rhs: Term,
}

impl Rule {
    pub fn new(id: &str, lhs: Term, rhs: Term) -> Result<Rule, RuleError> {
        if lhs.is_var() {
            return Err(RuleError::VariableLhs);
        }
        if lhs.sort() != rhs.sort() {
            return Err(RuleError::SortMismatch {
                lhs: lhs.sort(),
                rhs: rhs.sort(),
            });
        }
        let lvars = lhs.vars();
        if let Some(v) = rhs.vars().into_iter().find(|v| !lvars.contains(v)) {
            return Err(RuleError::FreeVariable(v.name.to_string()));
        }
        Ok(Rule {
            id: id.to_owned(),
            lhs,
            rhs,
        })
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} -> {}", self.id, self.lhs, self.rhs)
    }
}

/// A named list of rules applied modulo the AC symbols in `ac`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteSystem {
    pub name: String,
    pub rules: Vec<Rule>,
    pub ac: AcSet,
    pub signature: Signature,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SystemLookupError {
    #[error("unknown rewrite system `{0}` (expected r or rprime)")]
    Unknown(String),
}

/// The nine rules for one vector sort; `0S` and the sort of `u`, `v` are
/// filled in per copy.
const LINEAR_RULES: [&str; 9] = [
    "u + 0S -> u",
    "0.u -> 0S",
    "1.u -> u",
    "lambda.0S -> 0S",
    "lambda.(mu.u) -> (lambda * mu).u",
    "lambda.u + mu.u -> (lambda + mu).u",
    "lambda.u + u -> (lambda + 1).u",
    "u + u -> (1 + 1).u",
    "lambda.(u + v) -> lambda.u + lambda.v",
];

const TENSOR_RULES: [(&str, &str); 6] = [
    ("vars u v:E w:F;", "(u + v) @ w -> (u @ w) + (v @ w)"),
    ("vars u:E v:F lambda:K;", "(lambda.u) @ v -> lambda.(u @ v)"),
    ("vars u:E v w:F;", "u @ (v + w) -> (u @ v) + (u @ w)"),
    ("vars u:E v:F lambda:K;", "u @ (lambda.v) -> lambda.(u @ v)"),
    ("vars u:F;", "0E @ u -> 0G"),
    ("vars u:E;", "u @ 0F -> 0G"),
];

fn rule_from_text(id: &str, decls: &str, text: &str, sig: &Signature) -> Rule {
    let (lhs, rhs) = text.split_once("->").expect("built-in rule has an arrow");
    let lhs = parse_term(&format!("{decls} {lhs}"), sig).expect("built-in rule parses");
    let rhs = parse_term(&format!("{decls} {rhs}"), sig).expect("built-in rule parses");
    Rule::new(id, lhs, rhs).expect("built-in rule is well formed")
}

fn linear_rules(sort: Sort, sig: &Signature) -> Vec<Rule> {
    let decls = format!("vars u v:{sort} lambda mu:K;");
    LINEAR_RULES
        .iter()
        .enumerate()
        .map(|(i, text)| {
            let text = text.replace("0S", &format!("0{sort}"));
            rule_from_text(&format!("r{}.{sort}", i + 1), &decls, &text, sig)
        })
        .collect()
}

impl RewriteSystem {
    pub fn new(name: &str, rules: Vec<Rule>, ac: AcSet, signature: Signature) -> RewriteSystem {
        RewriteSystem {
            name: name.to_owned(),
            rules,
            ac,
            signature,
        }
    }

    /// The linear system over `K` and `E`.
    pub fn linear() -> RewriteSystem {
        let sig = Signature::linear();
        let rules = linear_rules(Sort::E, &sig);
        RewriteSystem::new("r", rules, sig.ac_set(), sig)
    }

    /// Three copies of the linear rules for `E`, `F`, `G` and the six rules
    /// of the bilinear product.
    pub fn bilinear() -> RewriteSystem {
        let sig = Signature::bilinear();
        let mut rules: Vec<Rule> = Sort::VECTOR.iter().flat_map(|&s| linear_rules(s, &sig)).collect();
        for (i, (decls, text)) in TENSOR_RULES.iter().enumerate() {
            rules.push(rule_from_text(&format!("t{}", i + 1), decls, text, &sig));
        }
        RewriteSystem::new("rprime", rules, sig.ac_set(), sig)
    }

    pub fn rule(&self, id: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.id == id)
    }

    /// Root reducts of `t`, with AC extension when the rule head is AC.
    pub(crate) fn root_reducts(
        &self,
        t: &Term,
        ac: &AcSet,
        f: &mut dyn FnMut(Term, RootStep) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let Some(head) = t.head() else {
            return ControlFlow::Continue(());
        };
        for rule in self.rules.iter().filter(|r| r.lhs.head() == Some(head)) {
            for_each_match(&rule.lhs, t, ac, true, &mut |subst, matched, rem| {
                let inst = rule.rhs.substitute(subst, ac);
                let result = if rem.is_empty() {
                    inst
                } else {
                    let mut args = Vec::with_capacity(rem.len() + 1);
                    args.push(inst);
                    args.extend_from_slice(rem);
                    Term::app(head.clone(), args, ac)
                };
                f(
                    result,
                    RootStep {
                        rule: rule.id.clone(),
                        matched: matched.map(<[usize]>::to_vec),
                        subst: subst.clone(),
                    },
                )
            })?;
        }
        ControlFlow::Continue(())
    }
}

/// Looks up a built-in vector system: `r` or `rprime`.
pub fn vector_system(name: &str) -> Result<RewriteSystem, SystemLookupError> {
    match name {
        "r" => Ok(RewriteSystem::linear()),
        "rprime" => Ok(RewriteSystem::bilinear()),
        other => Err(SystemLookupError::Unknown(other.to_owned())),
    }
}

/// Which half of a combined system fired.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Part {
    /// The vector system.
    R,
    /// The scalar system.
    S,
}

/// A rewrite at the root of some subterm.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootStep {
    pub rule: String,
    pub matched: Option<Vec<usize>>,
    pub subst: Substitution,
}

/// One rewrite step on a whole term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub part: Part,
    /// Rule id, or `<scalar system>:<rule>` for scalar steps.
    pub rule: String,
    /// Path of argument indices from the root to the rewritten subterm.
    pub position: Vec<usize>,
    /// Matched arguments under an AC head.
    pub matched: Option<Vec<usize>>,
    pub subst: Substitution,
    pub source: Term,
    pub target: Term,
}

impl Step {
    /// Re-derives this step from `source` and checks it lands on `target`.
    pub fn replays(&self, rw: &Rewriter<'_>) -> bool {
        let Some(sub) = self.source.subterm(&self.position) else {
            return false;
        };
        let mut found = false;
        let _ = rw.root_reducts(sub, &mut |local, part, root| {
            if part == self.part && root.rule == self.rule && root.subst == self.subst {
                let whole = self.source.replace_at(&self.position, local, &rw.ac);
                if whole == self.target {
                    found = true;
                    return ControlFlow::Break(());
                }
            }
            ControlFlow::Continue(())
        });
        found
    }

    /// `rule<TAB>position<TAB>substitution<TAB>target`.
    pub fn line(&self) -> String {
        let mut pos = String::from("/");
        pos.push_str(&self.position.iter().map(usize::to_string).collect::<Vec<_>>().join("/"));
        if let Some(m) = &self.matched {
            let idx: Vec<String> = m.iter().map(usize::to_string).collect();
            pos.push_str(&format!("{{{}}}", idx.join(",")));
        }
        let subst: Vec<String> = self.subst.iter().map(|(v, t)| format!("{v} := {t}")).collect();
        format!("{}\t{}\t[{}]\t{}", self.rule, pos, subst.join(", "), self.target)
    }
}

/// A reduction sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub initial: Term,
    pub steps: Vec<Step>,
}

impl Trace {
    pub fn new(initial: Term) -> Trace {
        Trace {
            initial,
            steps: Vec::new(),
        }
    }

    pub fn final_term(&self) -> &Term {
        self.steps.last().map_or(&self.initial, |s| &s.target)
    }

    /// Consecutive steps chain from the initial term.
    pub fn is_chained(&self) -> bool {
        let mut cur = &self.initial;
        for s in &self.steps {
            if &s.source != cur {
                return false;
            }
            cur = &s.target;
        }
        true
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            writeln!(f, "{}", s.line())?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    LeftmostInnermost,
    /// Uniform choice among all one-step reducts.
    Random(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalizeError {
    #[error("fuel exhausted after {fuel} steps")]
    FuelExhausted { fuel: usize, trace: Box<Trace> },
}

/// A vector system and a scalar system rewriting together; either half may
/// be absent.
#[derive(Clone, Copy)]
pub struct RewriterParts<'a> {
    pub vector: Option<&'a RewriteSystem>,
    pub scalar: Option<&'a ScalarSystem>,
}

/// The combined relation `R ∪ S` modulo the union of both AC sets.
#[derive(Clone)]
pub struct Rewriter<'a> {
    parts: RewriterParts<'a>,
    pub ac: AcSet,
}

impl<'a> Rewriter<'a> {
    pub fn new(vector: &'a RewriteSystem, scalar: &'a ScalarSystem) -> Rewriter<'a> {
        Rewriter::from_parts(RewriterParts {
            vector: Some(vector),
            scalar: Some(scalar),
        })
    }

    pub fn vector_only(vector: &'a RewriteSystem) -> Rewriter<'a> {
        Rewriter::from_parts(RewriterParts {
            vector: Some(vector),
            scalar: None,
        })
    }

    pub fn scalar_only(scalar: &'a ScalarSystem) -> Rewriter<'a> {
        Rewriter::from_parts(RewriterParts {
            vector: None,
            scalar: Some(scalar),
        })
    }

    pub fn from_parts(parts: RewriterParts<'a>) -> Rewriter<'a> {
        let mut ac = AcSet::new();
        if let Some(v) = parts.vector {
            ac = ac.union(&v.ac);
        }
        if let Some(s) = parts.scalar {
            ac = ac.union(s.ac());
        }
        Rewriter { parts, ac }
    }

    pub fn parts(&self) -> RewriterParts<'a> {
        self.parts
    }

    fn root_reducts(
        &self,
        t: &Term,
        f: &mut dyn FnMut(Term, Part, RootStep) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        if let Some(v) = self.parts.vector {
            v.root_reducts(t, &self.ac, &mut |u, st| f(u, Part::R, st))?;
        }
        if let Some(s) = self.parts.scalar {
            if t.sort() == Sort::K {
                s.root_reducts(t, &self.ac, &mut |u, st| f(u, Part::S, st))?;
            }
        }
        ControlFlow::Continue(())
    }

    /// Calls `f` on every one-step reduct at every position (not deduplicated).
    pub fn for_each_reduct(&self, t: &Term, f: &mut dyn FnMut(Step) -> ControlFlow<()>) -> ControlFlow<()> {
        let mut path = Vec::new();
        self.visit(t, t, &mut path, f)
    }

    fn visit(
        &self,
        root: &Term,
        t: &Term,
        path: &mut Vec<usize>,
        f: &mut dyn FnMut(Step) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        self.root_reducts(t, &mut |local, part, rs| {
            f(Step {
                part,
                rule: rs.rule,
                position: path.clone(),
                matched: rs.matched,
                subst: rs.subst,
                source: root.clone(),
                target: root.replace_at(path, local, &self.ac),
            })
        })?;
        for (i, child) in t.args().iter().enumerate() {
            path.push(i);
            let r = self.visit(root, child, path, f);
            path.pop();
            r?;
        }
        ControlFlow::Continue(())
    }

    /// All one-step reducts, deduplicated modulo AC, in term order.
    pub fn reducts(&self, t: &Term) -> Vec<(Term, Step)> {
        let t = t.canonicalize(&self.ac);
        let mut seen: BTreeMap<Term, Step> = BTreeMap::new();
        let _ = self.for_each_reduct(&t, &mut |step| {
            seen.entry(step.target.clone()).or_insert(step);
            ControlFlow::Continue(())
        });
        seen.into_iter().collect()
    }

    /// Reducts produced by one half of the system only.
    pub fn reducts_of(&self, t: &Term, part: Part) -> Vec<(Term, Step)> {
        self.reducts(t).into_iter().filter(|(_, s)| s.part == part).collect()
    }

    pub fn is_normal(&self, t: &Term) -> bool {
        self.innermost_step(t).is_none()
    }

    /// The leftmost-innermost redex: children left to right, then the node.
    pub fn innermost_step(&self, t: &Term) -> Option<Step> {
        let (path, local, part, rs) = self.innermost(t)?;
        Some(Step {
            part,
            rule: rs.rule,
            target: t.replace_at(&path, local, &self.ac),
            position: path,
            matched: rs.matched,
            subst: rs.subst,
            source: t.clone(),
        })
    }

    fn innermost(&self, t: &Term) -> Option<(Vec<usize>, Term, Part, RootStep)> {
        for (i, child) in t.args().iter().enumerate() {
            if let Some((mut path, local, part, rs)) = self.innermost(child) {
                path.insert(0, i);
                return Some((path, local, part, rs));
            }
        }
        let mut found = None;
        let _ = self.root_reducts(t, &mut |local, part, rs| {
            found = Some((Vec::new(), local, part, rs));
            ControlFlow::Break(())
        });
        found
    }

    /// Rewrites `t` to normal form under `strategy`, taking at most `fuel` steps.
    pub fn normalize(&self, t: &Term, strategy: Strategy, fuel: usize) -> Result<(Term, Trace), NormalizeError> {
        let t = t.canonicalize(&self.ac);
        let mut trace = Trace::new(t.clone());
        let mut cur = t;
        let mut rng = strategy_rng(strategy);
        while let Some(step) = self.next_step(&cur, rng.as_mut()) {
            if trace.steps.len() == fuel {
                return Err(NormalizeError::FuelExhausted {
                    fuel,
                    trace: Box::new(trace),
                });
            }
            cur = step.target.clone();
            trace.steps.push(step);
        }
        Ok((cur, trace))
    }

    /// Like [`Rewriter::normalize`] without recording the trace; the error
    /// carries the exhausted fuel.
    pub fn normalize_untraced(&self, t: &Term, strategy: Strategy, fuel: usize) -> Result<Term, usize> {
        let mut cur = t.canonicalize(&self.ac);
        let mut rng = strategy_rng(strategy);
        let mut taken = 0;
        while let Some(step) = self.next_step(&cur, rng.as_mut()) {
            if taken == fuel {
                return Err(fuel);
            }
            taken += 1;
            cur = step.target;
        }
        Ok(cur)
    }

    fn next_step(&self, t: &Term, rng: Option<&mut ChaCha8Rng>) -> Option<Step> {
        match rng {
            None => self.innermost_step(t),
            Some(rng) => {
                let mut all = self.reducts(t);
                if all.is_empty() {
                    None
                } else {
                    let i = rng.gen_range(0..all.len());
                    Some(all.swap_remove(i).1)
                }
            }
        }
    }

    /// Normal form under leftmost-innermost with automatic fuel.
    pub fn normal_form(&self, t: &Term) -> Result<Term, NormalizeError> {
        self.normalize(t, Strategy::LeftmostInnermost, auto_fuel(t)).map(|(nf, _)| nf)
    }
}

fn strategy_rng(strategy: Strategy) -> Option<ChaCha8Rng> {
    match strategy {
        Strategy::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        Strategy::LeftmostInnermost => None,
    }
}

/// Default step budget, generous enough for every terminating system
/// shipped here: rule steps are bounded by the vector measure, and each may
/// be followed by scalar steps in proportion to the scalar part of the term.
/// Scalar-sorted terms use their scalar measure instead.
pub fn auto_fuel(t: &Term) -> usize {
    let base = match measure::measure_vec(t) {
        Ok(m) => usize::try_from(m).unwrap_or(usize::MAX),
        Err(_) => measure::measure_s0(t).map_or(0, |m| usize::try_from(m).unwrap_or(usize::MAX)),
    };
    let per_step = 16usize.saturating_add(8usize.saturating_mul(t.scalar_node_count()));
    base.saturating_add(1)
        .saturating_mul(per_step)
        .saturating_add(64)
        .min(AUTO_FUEL_CAP)
}

/// Upper limit of [`auto_fuel`].
pub const AUTO_FUEL_CAP: usize = 1_000_000;

/// One-step reducts of `t` under `sys ∪ scalars`, deduplicated modulo AC.
pub fn reducts(sys: &RewriteSystem, scalars: &ScalarSystem, t: &Term) -> Vec<(Term, Step)> {
    Rewriter::new(sys, scalars).reducts(t)
}

/// Normalizes `t` under `sys ∪ scalars`.
pub fn normalize(
    sys: &RewriteSystem,
    scalars: &ScalarSystem,
    t: &Term,
    strategy: Strategy,
    fuel: usize,
) -> Result<(Term, Trace), NormalizeError> {
    Rewriter::new(sys, scalars).normalize(t, strategy, fuel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ScalarSystem;
    use crate::term::Signature;

    fn r() -> RewriteSystem {
        RewriteSystem::linear()
    }

    fn q() -> ScalarSystem {
        ScalarSystem::builtin("q").unwrap()
    }

    fn t(src: &str) -> Term {
        parse_term(src, &Signature::linear()).unwrap()
    }

    fn tb(src: &str) -> Term {
        parse_term(src, &Signature::bilinear()).unwrap()
    }

    #[test]
    fn builtin_rule_counts() {
        assert_eq!(r().rules.len(), 9);
        let rp = vector_system("rprime").unwrap();
        assert_eq!(rp.rules.len(), 33);
        assert!(vector_system("s").is_err());
        assert_eq!(r().rule("r1.E").unwrap().to_string(), "r1.E: u + 0E -> u");
        assert_eq!(rp.rule("t5").unwrap().to_string(), "t5: 0E @ u -> 0G");
        assert_eq!(rp.rule("t4").unwrap().to_string(), "t4: u @ lambda.v -> lambda.(u @ v)");
        assert_eq!(
            r().rule("r5.E").unwrap().to_string(),
            "r5.E: lambda.(mu.u) -> (lambda * mu).u"
        );
    }

    #[test]
    fn class_rewriting_finds_hidden_redex() {
        let sys = r();
        let s = q();
        let reds = reducts(&sys, &s, &t("vars x y:E; x + (y + x)"));
        let targets: Vec<String> = reds.iter().map(|(u, _)| u.to_string()).collect();
        assert!(targets.contains(&"(1 + 1).x + y".to_owned()), "{targets:?}");
    }

    #[test]
    fn unit_and_zero_rules() {
        let sys = r();
        let s = q();
        let reds = reducts(&sys, &s, &t("vars x:E; 1.x"));
        assert_eq!(reds.len(), 1);
        assert_eq!(reds[0].0, t("vars x:E; x"));
        let reds = reducts(&sys, &s, &t("vars l:K; l.0E"));
        assert_eq!(reds.len(), 1);
        assert_eq!(reds[0].0, Term::zero(Sort::E));
    }

    #[test]
    fn normalizes_worked_example() {
        let sys = r();
        let s = q();
        let src = t("vars x y:E; (3.x + 4.y) + 2.x");
        let (nf, trace) = normalize(&sys, &s, &src, Strategy::LeftmostInnermost, 100).unwrap();
        assert_eq!(nf, t("vars x y:E; 5.x + 4.y"));
        assert!(trace.is_chained());
        let rw = Rewriter::new(&sys, &s);
        assert!(trace.steps.iter().all(|st| st.replays(&rw)));
        assert!(rw.reducts(&nf).is_empty());
    }

    #[test]
    fn f2_collapses_doubling() {
        let sys = r();
        let s = ScalarSystem::builtin("f2").unwrap();
        let (nf, _) = normalize(&sys, &s, &t("vars x:E; x + x"), Strategy::LeftmostInnermost, 100).unwrap();
        assert_eq!(nf, Term::zero(Sort::E));
    }

    #[test]
    fn tensor_pulls_scalars_out() {
        let sys = RewriteSystem::bilinear();
        let s = q();
        let (nf, _) = normalize(&sys, &s, &tb("vars x:E y:F; (2.x) @ (3.y)"), Strategy::LeftmostInnermost, 100)
            .unwrap();
        assert_eq!(nf, tb("vars x:E y:F; 6.(x @ y)"));
        assert_eq!(nf.to_string(), "6.(x @ y)");
    }

    #[test]
    fn random_strategy_reaches_same_normal_form() {
        let sys = r();
        let s = q();
        let src = t("vars x y:E; 2.(x + 3.(y + x)) + 0.y + 1.(x + 0E)");
        let rw = Rewriter::new(&sys, &s);
        let (li, _) = rw.normalize(&src, Strategy::LeftmostInnermost, 200).unwrap();
        for seed in 0..10 {
            let (nf, trace) = rw.normalize(&src, Strategy::Random(seed), 200).unwrap();
            assert_eq!(nf, li);
            assert!(trace.steps.iter().all(|st| st.replays(&rw)));
        }
    }

    #[test]
    fn fuel_exhaustion_is_reported() {
        let sys = r();
        let s = q();
        let err = normalize(&sys, &s, &t("vars x:E; 1.(1.x)"), Strategy::LeftmostInnermost, 1).unwrap_err();
        let NormalizeError::FuelExhausted { fuel, trace } = err;
        assert_eq!(fuel, 1);
        assert_eq!(trace.steps.len(), 1);
    }

    #[test]
    fn step_lines_are_tab_separated() {
        let sys = r();
        let s = q();
        let (_, trace) = normalize(&sys, &s, &t("vars x:E; 1.x"), Strategy::LeftmostInnermost, 10).unwrap();
        assert_eq!(trace.to_string(), "r3.E\t/\t[u := x]\tx\n");
    }

    #[test]
    fn scalar_steps_are_tagged() {
        let sys = r();
        let s = q();
        let reds = reducts(&sys, &s, &t("vars x:E; (2 + 3).x"));
        assert_eq!(reds.len(), 1);
        assert_eq!(reds[0].1.part, Part::S);
        assert_eq!(reds[0].1.position, vec![0]);
        assert_eq!(reds[0].0, t("vars x:E; 5.x"));
    }
}
