//! Acceptance criteria, one pass/fail line each. Every criterion runs at
//! its stated sample count and time limit; the test fails if any line does.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use vecnorm::analysis::{
    commutation_check, gen_term, run_samples, run_until, sample_seed, subsumption_check, GenOptions, LabReport,
    COMMUTATION_DEPTH,
};
use vecnorm::denotation::{classify_nf, model_validity_check, universality_check, FiniteModel, VectorModel};
use vecnorm::scalar::{random_closed_scalar, scalar_requirements_check};
use vecnorm::suite::{confluence, measures, universality_pair, SuiteConfig, DISTRIBUTION_RULES};
use vecnorm::syntax::{parse_program, parse_system, parse_term, print_program};
use vecnorm::term::{Signature, Sort};
use vecnorm::{RewriteSystem, Rewriter, ScalarSystem};

type Outcome = Result<String, String>;

fn q() -> ScalarSystem {
    ScalarSystem::builtin("q").unwrap()
}

fn s0() -> ScalarSystem {
    ScalarSystem::builtin("s0").unwrap()
}

fn f2() -> ScalarSystem {
    ScalarSystem::builtin("f2").unwrap()
}

/// Folds reports into one outcome naming each.
fn reports(list: &[LabReport]) -> Outcome {
    let detail: Vec<String> = list.iter().map(|r| format!("{} {}", r.name, r.samples)).collect();
    match list.iter().find(|r| !r.pass()) {
        None => Ok(detail.join(", ")),
        Some(r) => Err(format!("{}", r).lines().take(4).collect::<Vec<_>>().join(" / ")),
    }
}

fn rule_validity() -> Outcome {
    let (r, rp) = (RewriteSystem::linear(), RewriteSystem::bilinear());
    if r.rules.len() != 9 || rp.rules.len() != 33 {
        return Err(format!("rule counts {} and {}", r.rules.len(), rp.rules.len()));
    }
    let a = model_validity_check(&r, &VectorModel::linear(3), 200, 1);
    let b = model_validity_check(&rp, &VectorModel::tensor(2, 3), 200, 1);
    // 9 rules plus 2 axioms for each of +K, *, +E
    if a.samples != (9 + 6) * 200 {
        return Err(format!("expected 3000 instances, checked {}", a.samples));
    }
    reports(&[a, b])
}

fn suite_cfg<'a>(sys: &'a RewriteSystem, scalars: &'a ScalarSystem, samples: usize) -> SuiteConfig<'a> {
    SuiteConfig {
        system: sys,
        scalars,
        samples: Some(samples),
        seed: 42,
    }
}

fn termination_measures() -> Outcome {
    let q = q();
    let mut all = Vec::new();
    for sys in [RewriteSystem::linear(), RewriteSystem::bilinear()] {
        for mut rep in measures(&suite_cfg(&sys, &q, 1000)) {
            rep.name = format!("{}/{}", sys.name, rep.name);
            all.push(rep);
        }
    }
    reports(&all)
}

fn confluence_evidence() -> Outcome {
    let q = q();
    let mut all = Vec::new();
    for sys in [RewriteSystem::linear(), RewriteSystem::bilinear()] {
        all.extend(confluence(&suite_cfg(&sys, &q, 300)));
    }
    reports(&all)
}

fn subsumption(s: &ScalarSystem, s0: &ScalarSystem, n: usize) -> LabReport {
    run_samples(&format!("subsumption-{}", s.name()), 42, n, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(sample_seed(42, i));
        let t = random_closed_scalar(s, 1 + i % 15, &mut rng);
        subsumption_check(s, s0, &t).expect("closed scalar term")
    })
}

fn key_lemma_hypotheses() -> Outcome {
    let (q, s0, f2) = (q(), s0(), f2());
    let mut all = vec![subsumption(&q, &s0, 200), subsumption(&f2, &s0, 200)];
    let open = GenOptions {
        semi_open: false,
        scalar_size: 7,
        ..GenOptions::default()
    };
    for sys in [RewriteSystem::linear(), RewriteSystem::bilinear()] {
        let rw = Rewriter::new(&sys, &q);
        let sorts: Vec<Sort> = sys.signature.sorts().filter(|s| s.is_vector()).collect();
        let mut rep = run_until("commutation", 42, 300, |i| {
            let seed = sample_seed(42, i);
            let t = gen_term(&sys.signature, sorts[i % sorts.len()], 1 + (seed % 30) as usize, seed, &open);
            commutation_check(&rw, &t, COMMUTATION_DEPTH)
        });
        rep.name = format!("commutation-{}", sys.name);
        all.push(rep);
    }
    for s in [&q, &f2] {
        let req = scalar_requirements_check(s, 300, 42);
        if !req.pass() {
            return Err(format!("{} fails the scalar requirements: {:?}", s.name(), req));
        }
    }
    let broken = parse_system("sorts K\nac +K *\nvars l:K\nrule 1 * l -> 0\n").unwrap();
    let broken = ScalarSystem::from_rules("broken", broken);
    let req = scalar_requirements_check(&broken, 300, 42);
    if req.pass() {
        return Err("the system {1 * l -> 0} was accepted".into());
    }
    let rejected: Vec<&str> = req.verdicts().filter(|v| !v.pass).map(|v| v.name).collect();
    reports(&all).map(|d| format!("{d}; broken rejected by {}", rejected.join(", ")))
}

fn classification() -> Outcome {
    let q = q();
    let mut all = Vec::new();
    for (sys, sort) in [(RewriteSystem::linear(), Sort::E), (RewriteSystem::bilinear(), Sort::G)] {
        let rw = Rewriter::new(&sys, &q);
        let opts = GenOptions {
            g_vars: false,
            ..GenOptions::default()
        };
        all.push(run_samples(&format!("classify-{sort}"), 42, 500, |i| {
            let seed = sample_seed(42, i);
            let t = gen_term(&sys.signature, sort, 1 + (seed % 30) as usize, seed, &opts);
            let mut r = LabReport::new("", 42);
            r.samples = 1;
            match rw.normal_form(&t) {
                Ok(nf) if classify_nf(&nf) => {}
                Ok(nf) => r.fail(&t, Some((&t, &nf)), "unclassified normal form"),
                Err(e) => r.fail(&t, None, e.to_string()),
            }
            r
        }));
    }
    reports(&all)
}

fn universality_triangle() -> Outcome {
    let q = q();
    let mut all = Vec::new();
    let mut equivalent = 0;
    for (sys, tensor) in [(RewriteSystem::linear(), false), (RewriteSystem::bilinear(), true)] {
        let rw = Rewriter::new(&sys, &q);
        let mut rep = LabReport::new(if tensor { "tensor-pairs" } else { "vector-pairs" }, 42);
        for i in 0..500 {
            let pair = universality_pair(&rw, &sys, tensor, sample_seed(42, i));
            let v = universality_check(&rw, &pair.t, &pair.u, &pair.evars, &pair.fvars, &pair.model);
            rep.samples += 1;
            equivalent += usize::from(v.nf_equal);
            if !v.pass() {
                rep.fail(&pair.t, Some((&pair.t, &pair.u)), format!("{v:?}"));
            }
        }
        all.push(rep);
    }
    if !(100..=900).contains(&equivalent) {
        return Err(format!("unbalanced pairs: {equivalent} of 1000 equivalent"));
    }
    reports(&all).map(|d| format!("{d}; {equivalent} equivalent"))
}

fn worked_witnesses() -> Outcome {
    let (q, f2) = (q(), f2());
    let (r, rp) = (RewriteSystem::linear(), RewriteSystem::bilinear());
    let cases = [
        (&r, &q, Signature::linear(), "vars x y:E; (3.x + 4.y) + 2.x", "5.x + 4.y"),
        (&r, &f2, Signature::linear(), "vars x:E; x + x", "0E"),
        (&rp, &q, Signature::bilinear(), "vars x:E y:F; (2.x) @ (3.y)", "6.(x @ y)"),
    ];
    for (sys, s, sig, src, want) in cases {
        let t = parse_term(src, &sig).map_err(|e| e.to_string())?;
        let nf = Rewriter::new(sys, s).normal_form(&t).map_err(|e| e.to_string())?;
        if nf.to_string() != want {
            return Err(format!("{src} gave {nf}, expected {want}"));
        }
    }
    let dist = parse_system(DISTRIBUTION_RULES).map_err(|e| e.to_string())?;
    let rep = model_validity_check(&dist, &FiniteModel::min_max(), 0, 0);
    if rep.samples != 16 {
        return Err(format!("min/max check covered {} of 16 assignments", rep.samples));
    }
    reports(&[rep]).map(|d| format!("three normal forms; {d}"))
}

fn cli(args: &[&str]) -> (i32, Vec<u8>) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("vecnorm").chain(args.iter().copied());
    let code = vecnorm_cli::run(argv, &mut std::io::empty(), &mut out, &mut err);
    (code, out)
}

fn determinism_and_round_trip() -> Outcome {
    let runs: [&[&str]; 5] = [
        &["gen", "--system", "rprime", "--sort", "G", "--size", "20", "--seed", "9"],
        &["normalize", "--strategy", "random", "--seed", "4", "vars x y:E; 2.(x + y) + 3.(y + x)"],
        &["trace", "vars x y:E; (3.x + 4.y) + 2.x"],
        &["reducts", "--system", "rprime", "vars x:E y z:F; (2.x) @ (y + z)"],
        &["check", "--suite", "confluence", "--samples", "25", "--seed", "7", "--format", "summary"],
    ];
    for args in runs {
        let (c1, o1) = cli(args);
        let (c2, o2) = cli(args);
        if c1 != 0 || c1 != c2 || o1 != o2 || o1.is_empty() {
            return Err(format!("{args:?} not reproducible (exit {c1}/{c2})"));
        }
    }
    let sig = Signature::bilinear();
    let opts = GenOptions {
        semi_open: false,
        ..GenOptions::default()
    };
    for i in 0..500 {
        let sort = [Sort::K, Sort::E, Sort::F, Sort::G][i % 4];
        let seed = sample_seed(8, i);
        let t = gen_term(&sig, sort, 1 + (seed % 30) as usize, seed, &opts);
        let text = print_program(&t);
        let back = parse_program(&text, &sig).map_err(|e| format!("{text}: {e}"))?;
        if back.term != t {
            return Err(format!("{text} reparsed as {}", back.term));
        }
    }
    Ok("5 commands byte-identical; 500 terms round-trip".into())
}

struct Criterion {
    id: u8,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            name: "rule validity in Q^3 and the n=2, p=3 product model",
            limit: Duration::from_secs(1),
            run: rule_validity,
        },
        Criterion {
            id: 2,
            name: "termination measures on 1000 terms",
            limit: Duration::from_secs(10),
            run: termination_measures,
        },
        Criterion {
            id: 3,
            name: "peak joinability and strategy agreement on 300 terms",
            limit: Duration::from_secs(30),
            run: confluence_evidence,
        },
        Criterion {
            id: 4,
            name: "key-lemma hypotheses",
            limit: Duration::from_secs(10),
            run: key_lemma_hypotheses,
        },
        Criterion {
            id: 5,
            name: "normal-form classification on 500 terms",
            limit: Duration::from_secs(10),
            run: classification,
        },
        Criterion {
            id: 6,
            name: "universality triangle on 500 pairs",
            limit: Duration::from_secs(30),
            run: universality_triangle,
        },
        Criterion {
            id: 7,
            name: "worked witnesses",
            limit: Duration::from_secs(1),
            run: worked_witnesses,
        },
        Criterion {
            id: 8,
            name: "CLI determinism and parse/print round trip",
            limit: Duration::from_secs(5),
            run: determinism_and_round_trip,
        },
    ];
    let mut failed = Vec::new();
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(d) if took > c.limit => Err(format!("{d}; took {took:.2?}, limit {:?}", c.limit)),
            other => other,
        };
        match &outcome {
            Ok(d) => println!("criterion {}: PASS {} ({took:.2?}) {d}", c.id, c.name),
            Err(e) => {
                println!("criterion {}: FAIL {} ({took:.2?}) {e}", c.id, c.name);
                failed.push(c.id);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failing criteria: {failed:?}");
        std::process::exit(1);
    }
}
