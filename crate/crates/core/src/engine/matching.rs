//! Complete AC matching with extension.
//!
//! Under an AC head the pattern arguments are matched against a
//! sub-multiset of the subject's flattened arguments. A pattern variable
//! sitting directly under the AC head may absorb any non-empty sub-multiset,
//! rebuilt as a sum. At the root of a redex the unmatched arguments are
//! handed back as the remainder; everywhere else the match must be exact.

use std::ops::ControlFlow;

use crate::term::{AcSet, Substitution, Symbol, Term, Var};

/// One way of matching a pattern against a subject.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AcMatch {
    pub subst: Substitution,
    /// Indices of the subject arguments consumed by the match, when the
    /// pattern head is AC.
    pub matched: Option<Vec<usize>>,
    /// Unmatched subject arguments under the AC head.
    pub remainder: Vec<Term>,
}

type Flow = ControlFlow<()>;

/// Enumerates every match of `pattern` against `subject`.
///
/// Results are deduplicated; with extension allowed at the root the same
/// substitution may appear with different remainders.
pub fn match_ac(pattern: &Term, subject: &Term, ac: &AcSet) -> Vec<AcMatch> {
    let mut out: Vec<AcMatch> = Vec::new();
    let _ = for_each_match(pattern, subject, ac, true, &mut |subst, matched, remainder| {
        let m = AcMatch {
            subst: subst.clone(),
            matched: matched.map(<[usize]>::to_vec),
            remainder: remainder.to_vec(),
        };
        if !out.iter().any(|o| o.subst == m.subst && o.remainder == m.remainder) {
            out.push(m);
        }
        ControlFlow::Continue(())
    });
    out
}

/// Receives a match: the substitution, the indices of the subject arguments
/// consumed under an AC head, and the unmatched remainder.
pub(crate) type MatchSink<'a> = dyn FnMut(&Substitution, Option<&[usize]>, &[Term]) -> Flow + 'a;

/// Callback-driven matcher. `extend` allows a remainder when the pattern
/// head is AC. The callback may stop the enumeration by breaking.
pub(crate) fn for_each_match(
    pattern: &Term,
    subject: &Term,
    ac: &AcSet,
    extend: bool,
    k: &mut MatchSink<'_>,
) -> Flow {
    let mut subst = Substitution::new();
    match (pattern, subject) {
        (Term::App(f, pargs), Term::App(g, sargs)) if f == g && ac.contains(f) => {
            match_multiset(f, pargs, sargs, ac, extend, &mut subst, &mut |s, matched, rem| {
                k(s, Some(matched), rem)
            })
        }
        _ => match_term(pattern, subject, ac, &mut subst, &mut |s| k(s, None, &[])),
    }
}

fn match_term(
    p: &Term,
    s: &Term,
    ac: &AcSet,
    sub: &mut Substitution,
    k: &mut dyn FnMut(&mut Substitution) -> Flow,
) -> Flow {
    match p {
        Term::Var(v) => {
            if v.sort != s.sort() {
                return ControlFlow::Continue(());
            }
            match sub.get(v) {
                Some(bound) if bound == s => k(sub),
                Some(_) => ControlFlow::Continue(()),
                None => {
                    sub.insert_unchecked(v.clone(), s.clone());
                    let r = k(sub);
                    sub.remove(v);
                    r
                }
            }
        }
        Term::Lit(_) => {
            if p == s {
                k(sub)
            } else {
                ControlFlow::Continue(())
            }
        }
        Term::App(f, pargs) => match s {
            Term::App(g, sargs) if f == g => {
                if ac.contains(f) {
                    match_multiset(f, pargs, sargs, ac, false, sub, &mut |sub, _, _| k(sub))
                } else if pargs.len() == sargs.len() {
                    match_list(pargs, sargs, ac, sub, k)
                } else {
                    ControlFlow::Continue(())
                }
            }
            _ => ControlFlow::Continue(()),
        },
    }
}

fn match_list(
    ps: &[Term],
    ss: &[Term],
    ac: &AcSet,
    sub: &mut Substitution,
    k: &mut dyn FnMut(&mut Substitution) -> Flow,
) -> Flow {
    match (ps.split_first(), ss.split_first()) {
        (None, _) => k(sub),
        (Some((p, ps)), Some((s, ss))) => {
            match_term(p, s, ac, sub, &mut |sub| match_list(ps, ss, ac, sub, k))
        }
        (Some(_), None) => ControlFlow::Continue(()),
    }
}

/// Fixed data of one multiset matching problem.
struct Problem<'a> {
    head: &'a Symbol,
    ac: &'a AcSet,
    extend: bool,
    /// Distinct subject arguments, in canonical order.
    terms: Vec<&'a Term>,
    /// Subject indices of each distinct argument.
    indices: Vec<Vec<usize>>,
    /// Non-variable pattern arguments, each matched against one subject argument.
    rigid: Vec<&'a Term>,
    /// Variables directly under the head, with their multiplicity.
    flex: Vec<(&'a Var, usize)>,
}

type MultisetK<'k> = dyn FnMut(&mut Substitution, &[usize], &[Term]) -> Flow + 'k;

fn match_multiset(
    head: &Symbol,
    pargs: &[Term],
    sargs: &[Term],
    ac: &AcSet,
    extend: bool,
    sub: &mut Substitution,
    k: &mut MultisetK<'_>,
) -> Flow {
    let mut terms: Vec<&Term> = Vec::new();
    let mut indices: Vec<Vec<usize>> = Vec::new();
    for (i, s) in sargs.iter().enumerate() {
        match terms.last() {
            Some(last) if *last == s => indices.last_mut().unwrap().push(i),
            _ => {
                terms.push(s);
                indices.push(vec![i]);
            }
        }
    }
    let mut rigid = Vec::new();
    let mut flex: Vec<(&Var, usize)> = Vec::new();
    for p in pargs {
        match p {
            Term::Var(v) => match flex.iter_mut().find(|(w, _)| *w == v) {
                Some((_, m)) => *m += 1,
                None => flex.push((v, 1)),
            },
            other => rigid.push(other),
        }
    }
    let needed = rigid.len() + flex.iter().map(|(_, m)| m).sum::<usize>();
    if needed > sargs.len() || (!extend && flex.is_empty() && rigid.len() != sargs.len()) {
        return ControlFlow::Continue(());
    }
    let mut avail: Vec<usize> = indices.iter().map(Vec::len).collect();
    let problem = Problem {
        head,
        ac,
        extend,
        terms,
        indices,
        rigid,
        flex,
    };
    match_rigid(&problem, 0, &mut avail, sub, k)
}

fn match_rigid(
    pb: &Problem<'_>,
    i: usize,
    avail: &mut Vec<usize>,
    sub: &mut Substitution,
    k: &mut MultisetK<'_>,
) -> Flow {
    let Some(p) = pb.rigid.get(i) else {
        return match_flex(pb, 0, avail, sub, k);
    };
    for g in 0..pb.terms.len() {
        if avail[g] == 0 || !same_shape(p, pb.terms[g]) {
            continue;
        }
        avail[g] -= 1;
        let r = match_term(p, pb.terms[g], pb.ac, sub, &mut |sub| {
            match_rigid(pb, i + 1, avail, sub, k)
        });
        avail[g] += 1;
        r?;
    }
    ControlFlow::Continue(())
}

fn same_shape(p: &Term, s: &Term) -> bool {
    match (p, s) {
        (Term::App(f, _), Term::App(g, _)) => f == g,
        (Term::Lit(_), Term::Lit(_)) => true,
        _ => false,
    }
}

fn match_flex(
    pb: &Problem<'_>,
    j: usize,
    avail: &mut Vec<usize>,
    sub: &mut Substitution,
    k: &mut MultisetK<'_>,
) -> Flow {
    let Some(&(var, mult)) = pb.flex.get(j) else {
        return finish(pb, avail, sub, k);
    };
    if var.sort != pb.head.result_sort() {
        return ControlFlow::Continue(());
    }
    if let Some(bound) = sub.get(var).cloned() {
        // the bound value must occur `mult` times among the leftovers
        let mut taken: Vec<(usize, usize)> = Vec::new();
        for elem in bound.flatten_under(pb.head) {
            let Some(g) = pb.terms.iter().position(|t| *t == elem) else {
                return ControlFlow::Continue(());
            };
            match taken.iter_mut().find(|(h, _)| *h == g) {
                Some((_, c)) => *c += mult,
                None => taken.push((g, mult)),
            }
        }
        if taken.iter().any(|&(g, c)| avail[g] < c) {
            return ControlFlow::Continue(());
        }
        taken.iter().for_each(|&(g, c)| avail[g] -= c);
        let r = match_flex(pb, j + 1, avail, sub, k);
        taken.iter().for_each(|&(g, c)| avail[g] += c);
        return r;
    }
    let last_exact = !pb.extend && j + 1 == pb.flex.len();
    if last_exact {
        // an exact match leaves nothing over, so the last variable takes all
        if avail.iter().any(|&a| a % mult != 0) || avail.iter().all(|&a| a == 0) {
            return ControlFlow::Continue(());
        }
        let chosen: Vec<usize> = avail.iter().map(|&a| a / mult).collect();
        return bind_choice(pb, j, &chosen, avail, sub, k);
    }
    let mut chosen = vec![0; pb.terms.len()];
    choose(pb, j, 0, false, &mut chosen, avail, sub, k)
}

/// Enumerates non-empty sub-multisets for the unbound variable `flex[j]`.
#[allow(clippy::too_many_arguments)]
fn choose(
    pb: &Problem<'_>,
    j: usize,
    g: usize,
    any: bool,
    chosen: &mut Vec<usize>,
    avail: &mut Vec<usize>,
    sub: &mut Substitution,
    k: &mut MultisetK<'_>,
) -> Flow {
    if g == pb.terms.len() {
        if !any {
            return ControlFlow::Continue(());
        }
        let picked = chosen.clone();
        return bind_choice(pb, j, &picked, avail, sub, k);
    }
    let mult = pb.flex[j].1;
    for c in 0..=avail[g] / mult {
        chosen[g] = c;
        choose(pb, j, g + 1, any || c > 0, chosen, avail, sub, k)?;
    }
    chosen[g] = 0;
    ControlFlow::Continue(())
}

fn bind_choice(
    pb: &Problem<'_>,
    j: usize,
    chosen: &[usize],
    avail: &mut Vec<usize>,
    sub: &mut Substitution,
    k: &mut MultisetK<'_>,
) -> Flow {
    let (var, mult) = pb.flex[j];
    let elems: Vec<Term> = chosen
        .iter()
        .enumerate()
        .flat_map(|(g, &c)| std::iter::repeat_n(pb.terms[g], c).cloned())
        .collect();
    let value = Term::app(pb.head.clone(), elems, pb.ac);
    for (g, &c) in chosen.iter().enumerate() {
        avail[g] -= c * mult;
    }
    sub.insert_unchecked(var.clone(), value);
    let r = match_flex(pb, j + 1, avail, sub, k);
    sub.remove(var);
    for (g, &c) in chosen.iter().enumerate() {
        avail[g] += c * mult;
    }
    r
}

fn finish(pb: &Problem<'_>, avail: &[usize], sub: &mut Substitution, k: &mut MultisetK<'_>) -> Flow {
    let mut remainder = Vec::new();
    let mut matched = Vec::new();
    for (g, &a) in avail.iter().enumerate() {
        let idx = &pb.indices[g];
        let used = idx.len() - a;
        matched.extend_from_slice(&idx[..used]);
        remainder.extend(std::iter::repeat_n(pb.terms[g], a).cloned());
    }
    if !pb.extend && !remainder.is_empty() {
        return ControlFlow::Continue(());
    }
    matched.sort_unstable();
    k(sub, &matched, &remainder)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;
    use crate::term::{Signature, Sort};

    fn sig() -> Signature {
        Signature::linear()
    }

    fn t(src: &str) -> Term {
        parse_term(src, &sig()).unwrap()
    }

    fn var(name: &str, sort: Sort) -> Var {
        Var::new(name, sort)
    }

    /// Brute-force oracle: every way to split the subject's arguments into
    /// a matched part and a remainder, checking each candidate substitution
    /// by instantiating the pattern.
    fn oracle_matches(pattern: &Term, subject: &Term, vars: &[Var], pool: &[Term]) -> Vec<(Substitution, Vec<Term>)> {
        let ac = sig().ac_set();
        let args = subject.args().to_vec();
        let head = subject.head().unwrap().clone();
        let mut out: Vec<(Substitution, Vec<Term>)> = Vec::new();
        let n = args.len();
        // candidate bindings: sums of non-empty sub-multisets of the args,
        // plus the supplied pool (for scalar variables)
        let mut candidates: Vec<Term> = pool.to_vec();
        for mask in 1u32..(1 << n) {
            let elems: Vec<Term> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| args[i].clone()).collect();
            candidates.push(Term::app(head.clone(), elems, &ac));
        }
        candidates.sort();
        candidates.dedup();
        let mut assignment = vec![0usize; vars.len()];
        loop {
            let mut sub = Substitution::new();
            let mut ok = true;
            for (v, &c) in vars.iter().zip(&assignment) {
                if candidates[c].sort() != v.sort {
                    ok = false;
                    break;
                }
                sub.bind(v.clone(), candidates[c].clone()).unwrap();
            }
            if ok {
                let inst = pattern.substitute(&sub, &ac);
                let inst_args = inst.flatten_under(&head).into_iter().cloned().collect::<Vec<_>>();
                // inst must be a sub-multiset of args
                let mut rest = args.clone();
                let mut fits = true;
                for a in &inst_args {
                    match rest.iter().position(|r| r == a) {
                        Some(p) => {
                            rest.remove(p);
                        }
                        None => {
                            fits = false;
                            break;
                        }
                    }
                }
                if fits && !out.iter().any(|(s, r)| *s == sub && *r == rest) {
                    out.push((sub, rest));
                }
            }
            // next assignment
            let mut i = 0;
            loop {
                if i == vars.len() {
                    return out;
                }
                assignment[i] += 1;
                if assignment[i] < candidates.len() {
                    break;
                }
                assignment[i] = 0;
                i += 1;
            }
        }
    }

    fn sorted(mut v: Vec<(Substitution, Vec<Term>)>) -> Vec<(Substitution, Vec<Term>)> {
        v.sort_by(|a, b| format!("{a:?}").cmp(&format!("{b:?}")));
        v
    }

    #[test]
    fn u_plus_u_against_x_x_y() {
        let ac = sig().ac_set();
        let p = t("vars u:E; u + u");
        let s = t("vars x y:E; x + x + y");
        let ms = match_ac(&p, &s, &ac);
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].subst.get(&var("u", Sort::E)), Some(&t("vars x:E; x")));
        assert_eq!(ms[0].remainder, vec![t("vars y:E; y")]);
        assert_eq!(ms[0].matched, Some(vec![0, 1]));
    }

    #[test]
    fn u_plus_zero_enumerates_all_splits() {
        let ac = sig().ac_set();
        let p = t("vars u:E; u + 0E");
        let s = t("vars x y:E; x + y + 0E");
        let got: Vec<(Substitution, Vec<Term>)> =
            match_ac(&p, &s, &ac).into_iter().map(|m| (m.subst, m.remainder)).collect();
        let want = oracle_matches(&p, &s, &[var("u", Sort::E)], &[]);
        assert_eq!(sorted(got.clone()), sorted(want));
        // u := x + y with nothing left, u := x leaving y, u := y leaving x
        assert_eq!(got.len(), 3);
        assert!(got
            .iter()
            .any(|(s, r)| s.get(&var("u", Sort::E)) == Some(&t("vars x y:E; x + y")) && r.is_empty()));
    }

    #[test]
    fn factor_pattern_needs_actions() {
        let ac = sig().ac_set();
        let p = t("vars u:E l m:K; l.u + m.u");
        let s = t("vars x y:E; x + y");
        assert!(match_ac(&p, &s, &ac).is_empty());
    }

    #[test]
    fn non_linear_factor_pattern() {
        let ac = sig().ac_set();
        let p = t("vars u:E l m:K; l.u + m.u");
        let s = t("vars x y:E; 3.x + 4.y + 2.x");
        let ms = match_ac(&p, &s, &ac);
        // l/m may swap, so two matches, both leaving 4.y
        assert_eq!(ms.len(), 2);
        for m in &ms {
            assert_eq!(m.remainder, vec![t("vars y:E; 4.y")]);
        }
    }

    #[test]
    fn bound_variable_consumes_a_sum() {
        // l.u + u where u is bound to x + y through the action
        let ac = sig().ac_set();
        let p = t("vars u:E l:K; l.u + u");
        let s = t("vars x y z:E; 2.(x + y) + x + y + z");
        let ms = match_ac(&p, &s, &ac);
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].remainder, vec![t("vars z:E; z")]);
    }

    #[test]
    fn inner_ac_patterns_match_exactly() {
        let ac = sig().ac_set();
        let p = t("vars u v:E l:K; l.(u + v)");
        let s = t("vars x y z:E; 2.(x + y + z)");
        let got: Vec<_> = match_ac(&p, &s, &ac).into_iter().map(|m| (m.subst, m.remainder)).collect();
        // ordered splits of {x, y, z} into two non-empty parts
        assert_eq!(got.len(), 6);
        assert!(got.iter().all(|(_, r)| r.is_empty()));
    }

    #[test]
    fn agrees_with_brute_force_on_small_sums() {
        let ac = sig().ac_set();
        let subjects = [
            "vars x y:E; x + x + y + y",
            "vars x y:E; x + y + 0E + 0E",
            "vars x:E; 2.x + x + x",
            "vars x y:E; 2.x + 3.y + x + y",
        ];
        let patterns = ["vars u:E; u + u", "vars u:E; u + 0E", "vars u:E l:K; l.u + u", "vars u v:E; u + v"];
        for s in subjects {
            let s = t(s);
            for p in patterns {
                let p = t(p);
                let vars: Vec<Var> = p.vars().into_iter().collect();
                let scalars = [Term::int(2), Term::int(3)];
                let got: Vec<_> = match_ac(&p, &s, &ac).into_iter().map(|m| (m.subst, m.remainder)).collect();
                let want = oracle_matches(&p, &s, &vars, &scalars);
                assert_eq!(sorted(got), sorted(want), "{p} against {s}");
            }
        }
    }

    #[test]
    fn non_ac_root_matches_syntactically() {
        let ac = sig().ac_set();
        let p = t("vars u:E; 1.u");
        let s = t("vars x:E; 1.x");
        let ms = match_ac(&p, &s, &ac);
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].matched, None);
        assert!(match_ac(&p, &t("vars x:E; 2.x"), &ac).is_empty());
    }
}
