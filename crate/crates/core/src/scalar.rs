//! Scalar rewrite systems: exact rational folding, the four-rule kernel
//! `s0`, a presentation of F2, and user rule files.

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::engine::{RewriteSystem, Rewriter, RootStep, Strategy};
use crate::syntax::parse_system;
use crate::term::{AcSet, Rational, Sort, Substitution, Symbol, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("unknown scalar system `{0}` (expected q, s0 or f2)")]
    Unknown(String),
    #[error("scalar term expected, found sort {0}")]
    NotScalar(Sort),
    #[error("term `{0}` is not closed")]
    Open(String),
    #[error("scalar normalization ran out of fuel ({0} steps)")]
    FuelExhausted(usize),
}

#[derive(Clone, Debug)]
enum Kind {
    /// Folding of exact rational literals.
    Rational,
    Rules(RewriteSystem),
}

/// A rewrite system on scalar terms.
#[derive(Clone, Debug)]
pub struct ScalarSystem {
    name: String,
    kind: Kind,
    ac: AcSet,
}

const S0_RULES: &str = "\
sorts K
ac +K *
vars lambda mu nu:K
rule 0 + lambda -> lambda
rule 0 * lambda -> 0
rule 1 * lambda -> lambda
rule lambda * (mu + nu) -> (lambda * mu) + (lambda * nu)
";

const F2_RULES: &str = "\
sorts K
ac +K *
vars lambda:K
rule 0 + lambda -> lambda
rule 1 + 1 -> 0
rule 0 * lambda -> 0
rule 1 * lambda -> lambda
";

/// Default step budget for scalar normalization.
pub const SCALAR_FUEL: usize = 10_000;

/// Step budget per normalization in [`scalar_requirements_check`], whose
/// sampled terms have at most a few dozen nodes.
pub const REQUIREMENTS_FUEL: usize = 2_000;

impl ScalarSystem {
    /// `q`, `s0`, or `f2`.
    pub fn builtin(name: &str) -> Result<ScalarSystem, ScalarError> {
        match name {
            "q" => Ok(ScalarSystem {
                name: "q".into(),
                kind: Kind::Rational,
                ac: AcSet::scalar(),
            }),
            "s0" => Ok(Self::from_rules("s0", parse_system(S0_RULES).expect("s0 rules parse"))),
            "f2" => Ok(Self::from_rules("f2", parse_system(F2_RULES).expect("f2 rules parse"))),
            other => Err(ScalarError::Unknown(other.to_owned())),
        }
    }

    /// Wraps a rule system over sort `K`. Rules of other sorts never fire on
    /// scalar positions.
    pub fn from_rules(name: &str, mut sys: RewriteSystem) -> ScalarSystem {
        sys.name = name.to_owned();
        ScalarSystem {
            name: name.to_owned(),
            ac: sys.ac.clone(),
            kind: Kind::Rules(sys),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ac(&self) -> &AcSet {
        &self.ac
    }

    /// The underlying rules, when this is not the rational folder.
    pub fn rules(&self) -> Option<&RewriteSystem> {
        match &self.kind {
            Kind::Rules(sys) => Some(sys),
            Kind::Rational => None,
        }
    }

    /// Literals a random closed term over this system's vocabulary may use.
    pub fn literals(&self) -> Vec<Rational> {
        match &self.kind {
            Kind::Rational => [(0, 1), (1, 1), (2, 1), (3, 1), (-1, 1), (-2, 1), (1, 2), (-3, 4), (5, 3)]
                .iter()
                .map(|&(n, d)| Rational::new(n.into(), d.into()))
                .collect(),
            Kind::Rules(sys) => {
                let mut lits: BTreeSet<Rational> =
                    [Rational::from_integer(0.into()), Rational::from_integer(1.into())].into();
                for rule in &sys.rules {
                    collect_literals(&rule.lhs, &mut lits);
                    collect_literals(&rule.rhs, &mut lits);
                }
                lits.into_iter().collect()
            }
        }
    }

    pub(crate) fn root_reducts(
        &self,
        t: &Term,
        ac: &AcSet,
        f: &mut dyn FnMut(Term, RootStep) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        match &self.kind {
            Kind::Rational => fold_pairs(&self.name, t, ac, f),
            Kind::Rules(sys) => sys.root_reducts(t, ac, &mut |u, mut st| {
                st.rule = format!("{}:{}", self.name, st.rule);
                f(u, st)
            }),
        }
    }

    /// All one-step reducts of a scalar term, deduplicated, in term order.
    pub fn step(&self, t: &Term) -> Vec<Term> {
        let rw = Rewriter::scalar_only(self);
        rw.reducts(t).into_iter().map(|(u, _)| u).collect()
    }

    /// Normal form of a closed scalar term.
    pub fn s_normalize(&self, t: &Term) -> Result<Term, ScalarError> {
        self.s_normalize_with_fuel(t, SCALAR_FUEL)
    }

    pub fn s_normalize_with_fuel(&self, t: &Term, fuel: usize) -> Result<Term, ScalarError> {
        if t.sort() != Sort::K {
            return Err(ScalarError::NotScalar(t.sort()));
        }
        if !t.is_closed() {
            return Err(ScalarError::Open(t.to_string()));
        }
        self.normalize_any(t, Strategy::LeftmostInnermost, fuel)
    }

    /// Normalizes a scalar term, open or closed.
    pub(crate) fn normalize_any(&self, t: &Term, strategy: Strategy, fuel: usize) -> Result<Term, ScalarError> {
        Rewriter::scalar_only(self)
            .normalize_untraced(t, strategy, fuel)
            .map_err(ScalarError::FuelExhausted)
    }
}

fn collect_literals(t: &Term, out: &mut BTreeSet<Rational>) {
    if let Term::Lit(q) = t {
        out.insert(q.clone());
    }
    t.args().iter().for_each(|a| collect_literals(a, out));
}

/// One fold of two literal arguments of a scalar `+` or `*` node.
fn fold_pairs(
    name: &str,
    t: &Term,
    ac: &AcSet,
    f: &mut dyn FnMut(Term, RootStep) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let (op, args) = match t {
        Term::App(sym @ (Symbol::Add(Sort::K) | Symbol::Mul), args) => (sym, args),
        _ => return ControlFlow::Continue(()),
    };
    let lits: Vec<usize> = (0..args.len()).filter(|&i| args[i].as_lit().is_some()).collect();
    let mut seen: BTreeSet<(&Rational, &Rational)> = BTreeSet::new();
    for (a, &i) in lits.iter().enumerate() {
        for &j in &lits[a + 1..] {
            let (x, y) = (args[i].as_lit().unwrap(), args[j].as_lit().unwrap());
            if !seen.insert((x, y)) {
                continue;
            }
            let folded = match op {
                Symbol::Mul => x * y,
                _ => x + y,
            };
            let mut rest: Vec<Term> = args
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != i && k != j)
                .map(|(_, a)| a.clone())
                .collect();
            let result = if rest.is_empty() {
                Term::Lit(folded)
            } else {
                rest.push(Term::Lit(folded));
                Term::app(op.clone(), rest, ac)
            };
            let rule = if matches!(op, Symbol::Mul) { "fold*" } else { "fold+" };
            f(
                result,
                RootStep {
                    rule: format!("{name}:{rule}"),
                    matched: Some(vec![i, j]),
                    subst: Substitution::new(),
                },
            )?;
        }
    }
    ControlFlow::Continue(())
}

/// Per-axiom verdict of [`scalar_requirements_check`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomVerdict {
    pub name: &'static str,
    pub pass: bool,
    /// First failing instance: the two sides and their normal forms.
    pub counterexample: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RequirementsReport {
    pub system: String,
    pub samples: usize,
    pub seed: u64,
    /// The eight normal-form pairs followed by the 0/1 normality check.
    pub axioms: Vec<AxiomVerdict>,
    pub termination: AxiomVerdict,
    pub ground_confluence: AxiomVerdict,
}

impl RequirementsReport {
    pub fn pass(&self) -> bool {
        self.verdicts().all(|v| v.pass)
    }

    pub fn verdicts(&self) -> impl Iterator<Item = &AxiomVerdict> {
        self.axioms.iter().chain([&self.termination, &self.ground_confluence])
    }
}

/// A random closed scalar term over the system's literals with at most
/// `size` nodes.
pub fn random_closed_scalar(sys: &ScalarSystem, size: usize, rng: &mut ChaCha8Rng) -> Term {
    let lits = sys.literals();
    random_closed(&lits, size.max(1), rng).canonicalize(sys.ac())
}

fn random_closed(lits: &[Rational], size: usize, rng: &mut ChaCha8Rng) -> Term {
    if size < 3 || rng.gen_bool(0.3) {
        return Term::Lit(lits[rng.gen_range(0..lits.len())].clone());
    }
    let left = rng.gen_range(1..size - 1);
    let l = random_closed(lits, left, rng);
    let r = random_closed(lits, size - 1 - left, rng);
    let sym = if rng.gen_bool(0.5) { Symbol::Add(Sort::K) } else { Symbol::Mul };
    Term::App(sym, vec![l, r])
}

type PairFn = fn(&Term, &Term, &Term) -> (Term, Term);

fn add(a: Term, b: Term) -> Term {
    Term::App(Symbol::Add(Sort::K), vec![a, b])
}

fn mul(a: Term, b: Term) -> Term {
    Term::App(Symbol::Mul, vec![a, b])
}

const PAIRS: [(&str, PairFn); 8] = [
    ("0+l vs l", |l, _, _| (add(Term::zero_scalar(), l.clone()), l.clone())),
    ("0*l vs 0", |l, _, _| (mul(Term::zero_scalar(), l.clone()), Term::zero_scalar())),
    ("1*l vs l", |l, _, _| (mul(Term::one_scalar(), l.clone()), l.clone())),
    ("l*(m+n) vs l*m+l*n", |l, m, n| {
        (
            mul(l.clone(), add(m.clone(), n.clone())),
            add(mul(l.clone(), m.clone()), mul(l.clone(), n.clone())),
        )
    }),
    ("(l+m)+n vs l+(m+n)", |l, m, n| {
        (add(add(l.clone(), m.clone()), n.clone()), add(l.clone(), add(m.clone(), n.clone())))
    }),
    ("l+m vs m+l", |l, m, _| (add(l.clone(), m.clone()), add(m.clone(), l.clone()))),
    ("(l*m)*n vs l*(m*n)", |l, m, n| {
        (mul(mul(l.clone(), m.clone()), n.clone()), mul(l.clone(), mul(m.clone(), n.clone())))
    }),
    ("l*m vs m*l", |l, m, _| (mul(l.clone(), m.clone()), mul(m.clone(), l.clone()))),
];

/// Samples the defining conditions of a scalar rewrite system.
///
/// For `samples` random triples of closed terms the eight pairs must share
/// normal forms; `0` and `1` must be normal; every sampled term must
/// normalize within [`REQUIREMENTS_FUEL`] steps; and every one-step reduct of a sampled
/// term must reach the same normal form as the term itself.
pub fn scalar_requirements_check(sys: &ScalarSystem, samples: usize, seed: u64) -> RequirementsReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ac = sys.ac().clone();
    let norm = |t: &Term| sys.s_normalize_with_fuel(t, REQUIREMENTS_FUEL);
    let mut axioms: Vec<AxiomVerdict> = PAIRS
        .iter()
        .map(|(name, _)| AxiomVerdict {
            name,
            pass: true,
            counterexample: None,
        })
        .collect();
    let mut termination = AxiomVerdict {
        name: "termination",
        pass: true,
        counterexample: None,
    };
    let mut confluence = AxiomVerdict {
        name: "ground confluence",
        pass: true,
        counterexample: None,
    };
    let fail = |v: &mut AxiomVerdict, msg: String| {
        if v.pass {
            v.pass = false;
            v.counterexample = Some(msg);
        }
    };
    // After a fuel exhaustion the remaining verdicts are meaningless.
    for _ in 0..samples.max(1) {
        if !termination.pass {
            break;
        }
        let triple: Vec<Term> = (0..3)
            .map(|_| {
                let size = rng.gen_range(1..=7);
                random_closed_scalar(sys, size, &mut rng)
            })
            .collect();
        let (l, m, n) = (&triple[0], &triple[1], &triple[2]);
        for (verdict, (_, build)) in axioms.iter_mut().zip(PAIRS.iter()) {
            if !termination.pass {
                break;
            }
            let (a, b) = build(l, m, n);
            let (a, b) = (a.canonicalize(&ac), b.canonicalize(&ac));
            match (norm(&a), norm(&b)) {
                (Ok(na), Ok(nb)) if na == nb => {}
                (Ok(na), Ok(nb)) => fail(verdict, format!("{a} ->* {na} but {b} ->* {nb}")),
                (Err(e), _) | (_, Err(e)) => fail(&mut termination, format!("{a} / {b}: {e}")),
            }
        }
        for term in &triple {
            if !termination.pass {
                break;
            }
            let nf = match norm(term) {
                Ok(nf) => nf,
                Err(e) => {
                    fail(&mut termination, format!("{term}: {e}"));
                    continue;
                }
            };
            for u in sys.step(term) {
                match norm(&u) {
                    Ok(nu) if nu == nf => {}
                    Ok(nu) => fail(&mut confluence, format!("{term} ->* {nf} but {term} -> {u} ->* {nu}")),
                    Err(e) => fail(&mut termination, format!("{u}: {e}")),
                }
            }
        }
    }
    let mut normal = AxiomVerdict {
        name: "0 and 1 normal",
        pass: true,
        counterexample: None,
    };
    for c in [Term::zero_scalar(), Term::one_scalar()] {
        if let Some(u) = sys.step(&c).first() {
            fail(&mut normal, format!("{c} -> {u}"));
        }
    }
    axioms.push(normal);
    RequirementsReport {
        system: sys.name.clone(),
        samples: samples.max(1),
        seed,
        axioms,
        termination,
        ground_confluence: confluence,
    }
}
