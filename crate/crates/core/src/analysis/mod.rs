//! Executable checks of the termination and confluence arguments on
//! concrete terms.

pub mod gen;

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::engine::{auto_fuel, Part, Rewriter, RewriteSystem, Strategy, Trace};
use crate::measure::{measure_s0, measure_vec};
use crate::scalar::{random_closed_scalar, scalar_requirements_check, ScalarError, ScalarSystem};
use crate::term::{Sort, Term};

pub use gen::{gen_term, pool_var, GenOptions};

/// How one step of a trace moved the measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepComparison {
    StrictDecrease,
    Equal,
    Violation,
}

/// Per-step measure comparison of a trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasureVerdict {
    pub steps: Vec<StepComparison>,
    pub pass: bool,
}

/// Compares the measure across every step of `trace`.
///
/// Vector-sorted traces use [`measure_vec`]: rule steps must strictly
/// decrease it and scalar steps must preserve it. Scalar-sorted traces use
/// [`measure_s0`], which every step must strictly decrease.
pub fn check_trace_measures(trace: &Trace) -> MeasureVerdict {
    let scalar = trace.initial.sort() == Sort::K;
    let measure = |t: &Term| {
        if scalar {
            measure_s0(t).ok()
        } else {
            measure_vec(t).ok()
        }
    };
    let mut before = measure(&trace.initial);
    let mut steps = Vec::with_capacity(trace.steps.len());
    for step in &trace.steps {
        let after = measure(&step.target);
        let cmp = match (before, after) {
            (Some(b), Some(a)) if a < b => StepComparison::StrictDecrease,
            (Some(b), Some(a)) if a == b => StepComparison::Equal,
            _ => StepComparison::Violation,
        };
        let ok = match cmp {
            StepComparison::StrictDecrease => scalar || step.part == Part::R,
            StepComparison::Equal => !scalar && step.part == Part::S,
            StepComparison::Violation => false,
        };
        steps.push(if ok { cmp } else { StepComparison::Violation });
        before = after;
    }
    let pass = steps.iter().all(|c| *c != StepComparison::Violation);
    MeasureVerdict { steps, pass }
}

/// A failed sample: the term it was drawn from and, where relevant, the
/// two terms that should have met.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub witness: String,
    pub pair: Option<(String, String)>,
    pub note: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.note, self.witness)?;
        if let Some((a, b)) = &self.pair {
            write!(f, " [{a} | {b}]")?;
        }
        Ok(())
    }
}

/// Outcome of a check over a number of samples. Aggregated reports keep
/// their parts in `sections` and repeat the parts' failures in `failures`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabReport {
    pub name: String,
    pub samples: usize,
    pub seed: u64,
    pub failures: Vec<Failure>,
    pub sections: Vec<LabReport>,
}

impl LabReport {
    pub fn new(name: &str, seed: u64) -> LabReport {
        LabReport {
            name: name.to_owned(),
            samples: 0,
            seed,
            failures: Vec::new(),
            sections: Vec::new(),
        }
    }

    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn fail(&mut self, witness: &Term, pair: Option<(&Term, &Term)>, note: impl Into<String>) {
        self.failures.push(Failure {
            witness: witness.to_string(),
            pair: pair.map(|(a, b)| (a.to_string(), b.to_string())),
            note: note.into(),
        });
    }

    /// Adds the samples and failures of `other`, a report of the same check.
    pub fn merge(mut self, other: LabReport) -> LabReport {
        self.samples += other.samples;
        self.failures.extend(other.failures);
        self.sections.extend(other.sections);
        self
    }

    /// Appends `section` as a named part of this report.
    pub fn add_section(&mut self, section: LabReport) {
        self.samples += section.samples;
        self.failures.extend(section.failures.iter().map(|f| Failure {
            note: format!("{}: {}", section.name, f.note),
            ..f.clone()
        }));
        self.sections.push(section);
    }

    /// `name<TAB>pass|fail<TAB>samples<TAB>seed`, one line per section and
    /// a final line for the report itself.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for s in &self.sections {
            out.push_str(&s.summary());
        }
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            self.name,
            if self.pass() { "pass" } else { "fail" },
            self.samples,
            self.seed
        ));
        out
    }
}

/// Failures listed per report are capped at this many lines of text output.
const SHOWN_FAILURES: usize = 10;

impl fmt::Display for LabReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.sections {
            write!(f, "{s}")?;
        }
        writeln!(
            f,
            "{}: {} ({} samples, seed {}, {} failures)",
            self.name,
            if self.pass() { "pass" } else { "FAIL" },
            self.samples,
            self.seed,
            self.failures.len()
        )?;
        if self.sections.is_empty() {
            for fail in self.failures.iter().take(SHOWN_FAILURES) {
                writeln!(f, "  {fail}")?;
            }
        }
        Ok(())
    }
}

/// Seed of the `i`-th sample of a run seeded with `seed`.
pub fn sample_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64).rotate_left(17) ^ (i as u64)
}

/// Every pair of distinct one-step reducts of `t` must reach the same
/// normal form under leftmost-innermost rewriting within `fuel` steps.
pub fn local_confluence_check(rw: &Rewriter<'_>, t: &Term, fuel: usize) -> LabReport {
    let mut report = LabReport::new("local-confluence", 0);
    report.samples = 1;
    let reducts = rw.reducts(t);
    let mut nfs: Vec<(Term, Term)> = Vec::with_capacity(reducts.len());
    for (u, _) in reducts {
        match rw.normalize(&u, Strategy::LeftmostInnermost, fuel) {
            Ok((nf, _)) => nfs.push((u, nf)),
            Err(e) => {
                report.fail(t, Some((&u, &u)), format!("reduct did not normalize: {e}"));
                return report;
            }
        }
    }
    if let Some((u1, n1)) = nfs.first() {
        if let Some((u2, n2)) = nfs.iter().find(|(_, n)| n != n1) {
            report.fail(t, Some((u1, u2)), format!("peak does not rejoin: {n1} vs {n2}"));
        }
    }
    report
}

/// Default depth of the scalar-step search in [`commutation_check`].
pub const COMMUTATION_DEPTH: usize = 32;

/// Most terms visited by one scalar-step search.
const SEARCH_CAP: usize = 20_000;

/// For each rule reduct `u1` and each scalar reduct `u2` of `t`, searches
/// for `w` with `u1 S* w` (at most `depth` scalar steps) and `u2 R w` (one
/// rule step). Each such pair counts as one sample.
pub fn commutation_check(rw: &Rewriter<'_>, t: &Term, depth: usize) -> LabReport {
    let mut report = LabReport::new("commutation", 0);
    let t = t.canonicalize(&rw.ac);
    let r_reducts = rw.reducts_of(&t, Part::R);
    let s_reducts = rw.reducts_of(&t, Part::S);
    report.samples = r_reducts.len() * s_reducts.len();
    if report.samples == 0 {
        return report;
    }
    let closures: Vec<BTreeSet<Term>> = r_reducts.iter().map(|(u1, _)| s_closure(rw, u1, depth)).collect();
    for (u2, _) in &s_reducts {
        let targets: BTreeSet<Term> = rw.reducts_of(u2, Part::R).into_iter().map(|(w, _)| w).collect();
        for ((u1, _), reach) in r_reducts.iter().zip(&closures) {
            if !targets.iter().any(|w| reach.contains(w)) {
                report.fail(&t, Some((u1, u2)), "no common term one rule step from the scalar side");
                return report;
            }
        }
    }
    report
}

/// Terms reachable from `t` in at most `depth` scalar steps.
fn s_closure(rw: &Rewriter<'_>, t: &Term, depth: usize) -> BTreeSet<Term> {
    let mut seen: BTreeSet<Term> = BTreeSet::from([t.clone()]);
    let mut queue = VecDeque::from([(t.clone(), 0)]);
    while let Some((u, d)) = queue.pop_front() {
        if d == depth || seen.len() >= SEARCH_CAP {
            continue;
        }
        for (v, _) in rw.reducts_of(&u, Part::S) {
            if seen.insert(v.clone()) {
                queue.push_back((v, d + 1));
            }
        }
    }
    seen
}

/// Every one-step `s0` reduct of the closed scalar `t` must have the same
/// `s`-normal form as `t`.
pub fn subsumption_check(s: &ScalarSystem, s0: &ScalarSystem, t: &Term) -> Result<LabReport, ScalarError> {
    if t.sort() != Sort::K {
        return Err(ScalarError::NotScalar(t.sort()));
    }
    if !t.is_closed() {
        return Err(ScalarError::Open(t.to_string()));
    }
    let mut report = LabReport::new("subsumption", 0);
    report.samples = 1;
    let nf = s.s_normalize(t)?;
    for (u, _) in Rewriter::scalar_only(s0).reducts(t) {
        let nu = s.s_normalize(&u)?;
        if nu != nf {
            report.fail(t, Some((&nf, &nu)), format!("s0 step to {u} changes the normal form"));
            break;
        }
    }
    Ok(report)
}

/// `k` random-strategy normal forms and the leftmost-innermost one must
/// coincide.
pub fn unique_nf_check(rw: &Rewriter<'_>, t: &Term, k: usize, seed: u64) -> LabReport {
    let mut report = LabReport::new("unique-nf", seed);
    report.samples = 1;
    let fuel = auto_fuel(t);
    let li = match rw.normalize(t, Strategy::LeftmostInnermost, fuel) {
        Ok((nf, _)) => nf,
        Err(e) => {
            report.fail(t, None, format!("leftmost-innermost: {e}"));
            return report;
        }
    };
    for i in 0..k {
        match rw.normalize(t, Strategy::Random(sample_seed(seed, i)), fuel) {
            Ok((nf, _)) if nf == li => {}
            Ok((nf, _)) => {
                report.fail(t, Some((&li, &nf)), format!("random strategy {i} disagrees"));
                return report;
            }
            Err(e) => {
                report.fail(t, None, format!("random strategy {i}: {e}"));
                return report;
            }
        }
    }
    report
}

/// Sample counts and seed for [`key_lemma_report`].
#[derive(Clone, Debug)]
pub struct LabConfig {
    pub samples: usize,
    pub seed: u64,
    /// Largest generated term.
    pub max_size: usize,
}

impl Default for LabConfig {
    fn default() -> Self {
        LabConfig {
            samples: 300,
            seed: 42,
            max_size: 30,
        }
    }
}

/// Vector sorts of `sys`'s signature, the order samples cycle through.
pub fn vector_sorts(sys: &RewriteSystem) -> Vec<Sort> {
    sys.signature.sorts().filter(|s| s.is_vector()).collect()
}

/// The `i`-th generated sample term of a run.
pub fn sample_term(sys: &RewriteSystem, cfg: &LabConfig, opts: &GenOptions, i: usize) -> Term {
    let sorts = vector_sorts(sys);
    let seed = sample_seed(cfg.seed, i);
    let size = 1 + (seed % cfg.max_size.max(1) as u64) as usize;
    gen_term(&sys.signature, sorts[i % sorts.len()], size, seed, opts)
}

/// Runs `check` on `n` samples in parallel and merges the reports in
/// sample order.
pub fn run_samples<F>(name: &str, seed: u64, n: usize, check: F) -> LabReport
where
    F: Fn(usize) -> LabReport + Sync + Send,
{
    use rayon::prelude::*;
    let parts: Vec<LabReport> = (0..n).into_par_iter().map(check).collect();
    let mut report = LabReport::new(name, seed);
    for p in parts {
        report.samples += p.samples;
        report.failures.extend(p.failures);
    }
    report
}

/// Sampled hypotheses of the modular confluence argument: `s` is a scalar
/// rewrite system, `sys ∪ s` decreases the measures, `sys ∪ s0` has
/// joinable peaks, `s` subsumes `s0`, and `sys` commutes with `s*`.
pub fn key_lemma_report(sys: &RewriteSystem, s: &ScalarSystem, s0: &ScalarSystem, cfg: &LabConfig) -> LabReport {
    let mut report = LabReport::new("keylemma", cfg.seed);

    let req = scalar_requirements_check(s, cfg.samples, cfg.seed);
    let mut section = LabReport::new("requirements", cfg.seed);
    section.samples = req.samples;
    for v in req.verdicts().filter(|v| !v.pass) {
        section.failures.push(Failure {
            witness: v.counterexample.clone().unwrap_or_default(),
            pair: None,
            note: v.name.to_owned(),
        });
    }
    report.add_section(section);

    let semi_open = GenOptions::default();
    let rw = Rewriter::new(sys, s);
    report.add_section(run_samples("termination", cfg.seed, cfg.samples, |i| {
        measure_sample(&rw, &sample_term(sys, cfg, &semi_open, i))
    }));

    let rw0 = Rewriter::new(sys, s0);
    report.add_section(run_samples("confluence-s0", cfg.seed, cfg.samples, |i| {
        let t = sample_term(sys, cfg, &semi_open, i);
        local_confluence_check(&rw0, &t, auto_fuel(&t))
    }));

    report.add_section(run_samples("subsumption", cfg.seed, cfg.samples, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(sample_seed(cfg.seed, i));
        let t = random_closed_scalar(s, 1 + i % 15, &mut rng);
        subsumption_check(s, s0, &t).unwrap_or_else(|e| {
            let mut r = LabReport::new("subsumption", cfg.seed);
            r.samples = 1;
            r.fail(&t, None, e.to_string());
            r
        })
    }));

    let open = GenOptions {
        semi_open: false,
        scalar_size: 7,
        ..GenOptions::default()
    };
    report.add_section(run_until("commutation", cfg.seed, cfg.samples, |i| {
        commutation_check(&rw, &sample_term(sys, cfg, &open, i), COMMUTATION_DEPTH)
    }));
    report
}

/// Most sample indices [`run_until`] tries per requested sample.
const ATTEMPTS_PER_SAMPLE: usize = 200;

/// Like [`run_samples`] for checks that may report zero samples on a given
/// index: runs indices in fixed-size parallel batches until `n` samples are
/// counted or the attempt budget is spent.
pub fn run_until<F>(name: &str, seed: u64, n: usize, check: F) -> LabReport
where
    F: Fn(usize) -> LabReport + Sync + Send,
{
    use rayon::prelude::*;
    const BATCH: usize = 64;
    let mut report = LabReport::new(name, seed);
    let mut next = 0;
    while report.samples < n && next < n.saturating_mul(ATTEMPTS_PER_SAMPLE).max(BATCH) {
        let parts: Vec<LabReport> = (next..next + BATCH).into_par_iter().map(&check).collect();
        next += BATCH;
        for p in parts {
            report.samples += p.samples;
            report.failures.extend(p.failures);
        }
    }
    if report.samples < n {
        report.failures.push(Failure {
            witness: String::new(),
            pair: None,
            note: format!("only {} of {n} samples found in {next} attempts", report.samples),
        });
    }
    report
}

/// Normalizes `t` under leftmost-innermost and one random strategy and
/// checks the measures along both traces.
pub fn measure_sample(rw: &Rewriter<'_>, t: &Term) -> LabReport {
    let mut report = LabReport::new("measures", 0);
    report.samples = 1;
    let fuel = auto_fuel(t);
    for strategy in [Strategy::LeftmostInnermost, Strategy::Random(t.node_count() as u64)] {
        match rw.normalize(t, strategy, fuel) {
            Ok((_, trace)) => {
                let verdict = check_trace_measures(&trace);
                if let Some(i) = verdict.steps.iter().position(|c| *c == StepComparison::Violation) {
                    let step = &trace.steps[i];
                    report.fail(t, Some((&step.source, &step.target)), format!("step {} breaks the measure", step.rule));
                }
            }
            Err(e) => report.fail(t, None, e.to_string()),
        }
    }
    report
}
