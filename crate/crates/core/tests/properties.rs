//! Generated-term properties of the term layer, the printer, and the
//! rewriting engine.

use proptest::prelude::*;

use vecnorm::analysis::{check_trace_measures, gen_term, GenOptions};
use vecnorm::denotation::{eval, Assignment, Model, VectorModel};
use vecnorm::syntax::{parse_program, print_program};
use vecnorm::term::{ac_equal, Signature, Sort, Symbol, Term};
use vecnorm::{RewriteSystem, Rewriter, ScalarSystem, Strategy};

fn sort_of(i: u8) -> Sort {
    [Sort::K, Sort::E, Sort::F, Sort::G][usize::from(i % 4)]
}

fn open() -> GenOptions {
    GenOptions {
        semi_open: false,
        ..GenOptions::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn canonicalize_is_idempotent(seed: u64, size in 0usize..30, s: u8) {
        let sig = Signature::bilinear();
        let t = gen_term(&sig, sort_of(s), size, seed, &open());
        let ac = sig.ac_set();
        prop_assert_eq!(t.canonicalize(&ac), t.clone());
        prop_assert_eq!(t.canonicalize(&ac).canonicalize(&ac), t);
    }

    #[test]
    fn ac_axioms_hold_for_generated_instances(a: u64, b: u64, c: u64, s: u8) {
        let sig = Signature::bilinear();
        let ac = sig.ac_set();
        let sort = sort_of(s);
        let ops: Vec<Symbol> = ac.iter().filter(|f| f.result_sort() == sort).cloned().collect();
        for f in ops {
            let x = gen_term(&sig, sort, 6, a, &open());
            let y = gen_term(&sig, sort, 6, b, &open());
            let z = gen_term(&sig, sort, 6, c, &open());
            let app = |l: Term, r: Term| Term::App(f.clone(), vec![l, r]);
            let left = app(x.clone(), app(y.clone(), z.clone()));
            let right = app(app(x.clone(), y.clone()), z);
            prop_assert!(ac_equal(&left, &right, &ac).unwrap());
            prop_assert!(ac_equal(&app(x.clone(), y.clone()), &app(y, x), &ac).unwrap());
        }
    }

    #[test]
    fn printing_round_trips(seed: u64, size in 0usize..30, s: u8) {
        let sig = Signature::bilinear();
        let t = gen_term(&sig, sort_of(s), size, seed, &open());
        let text = print_program(&t);
        let back = parse_program(&text, &sig).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert_eq!(back.term, t);
    }

    #[test]
    fn rule_steps_decrease_the_measure(seed: u64, size in 1usize..30, s: u8) {
        let (sys, q) = (RewriteSystem::bilinear(), ScalarSystem::builtin("q").unwrap());
        let sort = sort_of(s % 3 + 1);
        let t = gen_term(&sys.signature, sort, size, seed, &GenOptions::default());
        let (_, trace) = Rewriter::new(&sys, &q)
            .normalize(&t, Strategy::Random(seed), 100_000)
            .map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert!(check_trace_measures(&trace).pass);
        prop_assert!(trace.is_chained());
    }

    #[test]
    fn normalization_preserves_values(seed: u64, size in 1usize..25) {
        let (sys, q) = (RewriteSystem::bilinear(), ScalarSystem::builtin("q").unwrap());
        let t = gen_term(&sys.signature, sort_of(seed as u8 % 3 + 1), size, seed, &GenOptions::default());
        let nf = Rewriter::new(&sys, &q).normal_form(&t).unwrap();
        let m = VectorModel::tensor(2, 2);
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let mut phi = Assignment::new();
        for v in t.vars() {
            phi.insert(v.clone(), m.random(v.sort, &mut rng).unwrap());
        }
        prop_assert_eq!(eval(&t, &phi, &m), eval(&nf, &phi, &m));
    }

    #[test]
    fn strategies_agree(seed: u64, size in 1usize..25) {
        let (sys, q) = (RewriteSystem::linear(), ScalarSystem::builtin("q").unwrap());
        let t = gen_term(&sys.signature, Sort::E, size, seed, &GenOptions::default());
        let rw = Rewriter::new(&sys, &q);
        let li = rw.normal_form(&t).unwrap();
        let (random, _) = rw.normalize(&t, Strategy::Random(seed), 100_000).unwrap();
        prop_assert_eq!(li, random);
    }
}
