//! Named check suites over generated samples.

use std::fmt;
use std::str::FromStr;

use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{
    check_trace_measures, gen_term, key_lemma_report, local_confluence_check, measure_sample, pool_var, run_samples,
    sample_seed, sample_term, unique_nf_check, vector_sorts, GenOptions, LabConfig, LabReport,
};
use crate::denotation::{classify_nf, model_validity_check, universality_check, FiniteModel, VectorModel};
use crate::engine::{auto_fuel, Rewriter, RewriteSystem, Strategy};
use crate::scalar::ScalarSystem;
use crate::syntax::parse_system;
use crate::term::{AcSet, Rational, Signature, Sort, Symbol, Term, Var};

/// The suites `check` can run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Rules,
    Measures,
    Confluence,
    KeyLemma,
    Universality,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 6] = ["rules", "measures", "confluence", "keylemma", "universality", "all"];
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Suite, String> {
        Ok(match s {
            "rules" => Suite::Rules,
            "measures" => Suite::Measures,
            "confluence" => Suite::Confluence,
            "keylemma" => Suite::KeyLemma,
            "universality" => Suite::Universality,
            "all" => Suite::All,
            _ => return Err(format!("unknown suite `{s}` (expected one of {})", Suite::NAMES.join(", "))),
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = [
            Suite::Rules,
            Suite::Measures,
            Suite::Confluence,
            Suite::KeyLemma,
            Suite::Universality,
            Suite::All,
        ]
        .iter()
        .position(|s| s == self)
        .unwrap();
        f.write_str(Suite::NAMES[i])
    }
}

/// What a suite runs against.
pub struct SuiteConfig<'a> {
    pub system: &'a RewriteSystem,
    pub scalars: &'a ScalarSystem,
    /// Overrides every per-check default sample count.
    pub samples: Option<usize>,
    pub seed: u64,
}

impl SuiteConfig<'_> {
    fn n(&self, default: usize) -> usize {
        self.samples.unwrap_or(default)
    }

    fn bilinear(&self) -> bool {
        self.system.signature.declares(&Symbol::Tensor)
    }
}

/// Runs `suite` and returns one report with a section per check.
pub fn run_suite(suite: Suite, cfg: &SuiteConfig<'_>) -> LabReport {
    let mut report = LabReport::new(&suite.to_string(), cfg.seed);
    let parts: Vec<LabReport> = match suite {
        Suite::Rules => rules(cfg),
        Suite::Measures => measures(cfg),
        Suite::Confluence => confluence(cfg),
        Suite::KeyLemma => keylemma(cfg).sections,
        Suite::Universality => universality(cfg),
        Suite::All => [Suite::Rules, Suite::Measures, Suite::Confluence, Suite::KeyLemma, Suite::Universality]
            .iter()
            .map(|&s| run_suite(s, cfg))
            .collect(),
    };
    for p in parts {
        report.add_section(p);
    }
    report
}

fn s0() -> ScalarSystem {
    ScalarSystem::builtin("s0").expect("s0 is built in")
}

/// The two distribution rules without AC, as a rule file.
pub const DISTRIBUTION_RULES: &str = "\
vars x y z:K
rule (x + y) * z -> (x * z) + (y * z)
rule x * (y + z) -> (x * y) + (x * z)
";

/// Rule validity in Q^3 (or the tensor model with n = 2, p = 3) and the
/// min/max model of the distribution rules.
pub fn rules(cfg: &SuiteConfig<'_>) -> Vec<LabReport> {
    let model = if cfg.bilinear() {
        VectorModel::tensor(2, 3)
    } else {
        VectorModel::linear(3)
    };
    let mut valid = model_validity_check(cfg.system, &model, cfg.n(200), cfg.seed);
    valid.name = format!("rules-{}", cfg.system.name);
    let dist = parse_system(DISTRIBUTION_RULES).expect("distribution rules parse");
    let mut lattice = model_validity_check(&dist, &FiniteModel::min_max(), 0, cfg.seed);
    lattice.name = "distribution-minmax".into();
    vec![valid, lattice]
}

fn lab(cfg: &SuiteConfig<'_>, samples: usize) -> LabConfig {
    LabConfig {
        samples,
        seed: cfg.seed,
        max_size: 30,
    }
}

/// Measure decrease along traces of `sys ∪ S` and `sys ∪ s0`, and of `s0`
/// alone on scalar terms.
pub fn measures(cfg: &SuiteConfig<'_>) -> Vec<LabReport> {
    let n = cfg.n(1000);
    let lc = lab(cfg, n);
    let opts = GenOptions::default();
    let s0 = s0();
    let mut out = Vec::new();
    for (scalars, name) in [(cfg.scalars, format!("measures-{}", cfg.scalars.name())), (&s0, "measures-s0".into())] {
        let rw = Rewriter::new(cfg.system, scalars);
        out.push(run_samples(&name, cfg.seed, n, |i| measure_sample(&rw, &sample_term(cfg.system, &lc, &opts, i))));
    }
    let scalar_sig = Signature::scalar();
    let open = GenOptions {
        semi_open: false,
        ..GenOptions::default()
    };
    let rw = Rewriter::scalar_only(&s0);
    out.push(run_samples("measures-s0-scalar", cfg.seed, n, |i| {
        let seed = sample_seed(cfg.seed, i);
        let t = gen_term(&scalar_sig, Sort::K, 1 + (seed % 30) as usize, seed, &open);
        let mut r = LabReport::new("", 0);
        r.samples = 1;
        match rw.normalize(&t, Strategy::Random(seed), auto_fuel(&t)) {
            Ok((_, trace)) if check_trace_measures(&trace).pass => {}
            Ok(_) => r.fail(&t, None, "s0 step does not decrease the scalar measure"),
            Err(e) => r.fail(&t, None, e.to_string()),
        }
        r
    }));
    out
}

/// Free vector constants added to the signature for the constant runs.
fn with_constants(sys: &RewriteSystem) -> RewriteSystem {
    let mut sys = sys.clone();
    for (name, sort) in [("e1", Sort::E), ("e2", Sort::E), ("f1", Sort::F), ("g1", Sort::G)] {
        if sys.signature.has_sort(sort) {
            sys.signature = sys.signature.clone().with_constant(name, sort).expect("vector sort");
        }
    }
    sys
}

/// Peak joinability under `S` and `s0`, with and without constants, and
/// agreement of ten random strategies with leftmost-innermost.
pub fn confluence(cfg: &SuiteConfig<'_>) -> Vec<LabReport> {
    let n = cfg.n(300);
    let lc = lab(cfg, n);
    let s0 = s0();
    let consts = with_constants(cfg.system);
    let plain = GenOptions::default();
    let with_c = GenOptions {
        constants: true,
        ..GenOptions::default()
    };
    let mut out = Vec::new();
    for scalars in [cfg.scalars, &s0] {
        let rw = Rewriter::new(cfg.system, scalars);
        let name = format!("peaks-{}-{}", cfg.system.name, scalars.name());
        out.push(run_samples(&name, cfg.seed, n, |i| {
            let t = if i % 2 == 0 {
                sample_term(cfg.system, &lc, &plain, i)
            } else {
                sample_term(&consts, &lc, &with_c, i)
            };
            local_confluence_check(&rw, &t, auto_fuel(&t))
        }));
    }
    let rw = Rewriter::new(cfg.system, cfg.scalars);
    out.push(run_samples("unique-nf", cfg.seed, n, |i| {
        let t = sample_term(cfg.system, &lc, &plain, i);
        let mut r = unique_nf_check(&rw, &t, 10, sample_seed(cfg.seed, i));
        r.seed = cfg.seed;
        r
    }));
    out
}

/// The sampled hypotheses of the modular confluence argument.
pub fn keylemma(cfg: &SuiteConfig<'_>) -> LabReport {
    key_lemma_report(cfg.system, cfg.scalars, &s0(), &lab(cfg, cfg.n(300)))
}

/// Normal-form classification and the agreement of normal forms, values,
/// and decompositions on generated pairs.
pub fn universality(cfg: &SuiteConfig<'_>) -> Vec<LabReport> {
    let n = cfg.n(500);
    let rw = Rewriter::new(cfg.system, cfg.scalars);
    let bilinear = cfg.bilinear();
    let sorts = vector_sorts(cfg.system);
    let classification = run_samples("classification", cfg.seed, n, |i| {
        let seed = sample_seed(cfg.seed, i);
        let sort = if bilinear && i % 2 == 1 { Sort::G } else { sorts[0] };
        let opts = GenOptions {
            g_vars: false,
            ..GenOptions::default()
        };
        let t = gen_term(&cfg.system.signature, sort, 1 + (seed % 30) as usize, seed, &opts);
        let mut r = LabReport::new("", 0);
        r.samples = 1;
        match rw.normal_form(&t) {
            Ok(nf) if classify_nf(&nf) => {}
            Ok(nf) => r.fail(&t, Some((&t, &nf)), "normal form outside the classified shapes"),
            Err(e) => r.fail(&t, None, e.to_string()),
        }
        r
    });
    let pairs = run_samples("universality-pairs", cfg.seed, n, |i| {
        let tensor = bilinear && i % 2 == 1;
        let pair = universality_pair(&rw, cfg.system, tensor, sample_seed(cfg.seed, i));
        let verdict = universality_check(&rw, &pair.t, &pair.u, &pair.evars, &pair.fvars, &pair.model);
        let mut r = LabReport::new("", 0);
        r.samples = 1;
        if !verdict.pass() {
            r.fail(&pair.t, Some((&pair.t, &pair.u)), format!("criteria disagree: {verdict:?}"));
        }
        r
    });
    vec![classification, pairs]
}

/// Two terms over declared variables and a model of matching dimension.
#[derive(Clone, Debug)]
pub struct UniversalityPair {
    pub t: Term,
    pub u: Term,
    pub evars: Vec<Var>,
    pub fvars: Vec<Var>,
    pub model: VectorModel,
}

/// A pair for the universality check: `u` is either obtained from `t` by
/// rewriting and inverse rule steps, or a perturbation of `t`'s normal form
/// that may or may not be equivalent. Vector pairs use up to four `E`
/// variables; tensor pairs `G` terms over up to two `E` and two `F`
/// variables.
pub fn universality_pair(rw: &Rewriter<'_>, sys: &RewriteSystem, tensor: bool, seed: u64) -> UniversalityPair {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, p) = if tensor {
        (rng.gen_range(1..=2), rng.gen_range(1..=2))
    } else {
        (rng.gen_range(1..=4), 0)
    };
    let opts = GenOptions {
        pools: vec![(Sort::E, n), (Sort::F, p), (Sort::G, 0)],
        g_vars: false,
        ..GenOptions::default()
    };
    let sort = if tensor { Sort::G } else { Sort::E };
    let sig = &sys.signature;
    let t = gen_term(sig, sort, rng.gen_range(1..=20), rng.gen(), &opts);
    let u = if rng.gen_bool(0.5) {
        let mut u = partial_reduction(rw, &t, &mut rng);
        for _ in 0..rng.gen_range(0..=2) {
            u = expand(&u, &rw.ac, &mut rng);
        }
        u
    } else {
        match rw.normal_form(&t) {
            Ok(nf) => perturb(&nf, sig, sort, &opts, &rw.ac, &mut rng),
            Err(_) => t.clone(),
        }
    };
    let evars = (0..n).map(|i| pool_var(Sort::E, i)).collect();
    let fvars = (0..p).map(|i| pool_var(Sort::F, i)).collect();
    let model = if tensor {
        VectorModel::tensor(n, p)
    } else {
        VectorModel::linear(n)
    };
    UniversalityPair {
        t,
        u,
        evars,
        fvars,
        model,
    }
}

/// A random number of random rewrite steps from `t`.
fn partial_reduction(rw: &Rewriter<'_>, t: &Term, rng: &mut ChaCha8Rng) -> Term {
    let mut cur = t.clone();
    for _ in 0..rng.gen_range(0..=6) {
        let mut reducts = rw.reducts(&cur);
        if reducts.is_empty() {
            break;
        }
        cur = reducts.swap_remove(rng.gen_range(0..reducts.len())).0;
    }
    cur
}

fn vector_paths(t: &Term, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if t.sort().is_vector() {
        out.push(path.clone());
    }
    for (i, a) in t.args().iter().enumerate() {
        path.push(i);
        vector_paths(a, path, out);
        path.pop();
    }
}

fn lit(n: i64, d: i64) -> Term {
    Term::Lit(Rational::new(n.into(), d.into()))
}

/// Replaces a random vector subterm `v` by an equal expression:
/// `1.v`, `v + 0`, `λ.v + (1-λ).v`, or `2.(1/2.v)`.
fn expand(t: &Term, ac: &AcSet, rng: &mut ChaCha8Rng) -> Term {
    let mut paths = Vec::new();
    vector_paths(t, &mut Vec::new(), &mut paths);
    let path = &paths[rng.gen_range(0..paths.len())];
    let v = t.subterm(path).expect("path from vector_paths").clone();
    let s = v.sort();
    let act = |l: Term, v: Term| Term::App(Symbol::Act(s), vec![l, v]);
    let new = match rng.gen_range(0..4) {
        0 => act(Term::one_scalar(), v),
        1 => Term::App(Symbol::Add(s), vec![v, Term::zero(s)]),
        2 => {
            let l = Rational::new(rng.gen_range(-3i64..=3).into(), 2.into());
            let rest = Rational::one() - &l;
            Term::App(Symbol::Add(s), vec![act(Term::Lit(l), v.clone()), act(Term::Lit(rest), v)])
        }
        _ => act(lit(2, 1), act(lit(1, 2), v)),
    };
    t.replace_at(path, new, ac).canonicalize(ac)
}

/// A near miss of the normal form `nf`: one coefficient changed, one atom
/// added or renamed, or an unrelated term.
fn perturb(
    nf: &Term,
    sig: &Signature,
    sort: Sort,
    opts: &GenOptions,
    ac: &AcSet,
    rng: &mut ChaCha8Rng,
) -> Term {
    let mut paths = Vec::new();
    vector_paths(nf, &mut Vec::new(), &mut paths);
    match rng.gen_range(0..4) {
        0 => {
            let atom = gen_term(sig, sort, 3, rng.gen(), opts);
            Term::App(Symbol::Add(sort), vec![nf.clone(), atom]).canonicalize(ac)
        }
        1 => {
            let path = &paths[rng.gen_range(0..paths.len())];
            let v = nf.subterm(path).unwrap().clone();
            let s = v.sort();
            let l = if rng.gen_bool(0.5) { lit(3, 1) } else { lit(0, 1) };
            nf.replace_at(path, Term::App(Symbol::Act(s), vec![l, v]), ac).canonicalize(ac)
        }
        2 => {
            let path = &paths[rng.gen_range(0..paths.len())];
            let v = nf.subterm(path).unwrap().clone();
            let pool = opts.pool_size(v.sort());
            if v.is_var() && pool > 0 {
                let w = Term::Var(pool_var(v.sort(), rng.gen_range(0..pool)));
                nf.replace_at(path, w, ac).canonicalize(ac)
            } else {
                Term::zero(sort)
            }
        }
        _ => gen_term(sig, sort, rng.gen_range(1..=12), rng.gen(), opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(suite: Suite, sys: &RewriteSystem, samples: usize) -> LabReport {
        let q = ScalarSystem::builtin("q").unwrap();
        let cfg = SuiteConfig {
            system: sys,
            scalars: &q,
            samples: Some(samples),
            seed: 5,
        };
        run_suite(suite, &cfg)
    }

    #[test]
    fn suite_names_round_trip() {
        for name in Suite::NAMES {
            assert_eq!(name.parse::<Suite>().unwrap().to_string(), name);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn small_runs_pass() {
        for sys in [RewriteSystem::linear(), RewriteSystem::bilinear()] {
            let rep = run(Suite::All, &sys, 12);
            assert!(rep.pass(), "{rep}");
        }
    }

    #[test]
    fn summary_is_deterministic() {
        let sys = RewriteSystem::linear();
        assert_eq!(run(Suite::Confluence, &sys, 20), run(Suite::Confluence, &sys, 20));
    }

    #[test]
    fn universality_pairs_include_both_outcomes() {
        let (r, q) = (RewriteSystem::bilinear(), ScalarSystem::builtin("q").unwrap());
        let rw = Rewriter::new(&r, &q);
        let mut equal = 0;
        for i in 0..60 {
            let pair = universality_pair(&rw, &r, i % 2 == 1, i);
            let v = universality_check(&rw, &pair.t, &pair.u, &pair.evars, &pair.fvars, &pair.model);
            assert!(v.pass(), "{pair:?} {v:?}");
            equal += usize::from(v.nf_equal);
        }
        assert!(equal > 10 && equal < 50, "{equal}");
    }
}
