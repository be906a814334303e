//! Sorted first-order terms kept in AC-canonical form.
//!
//! Applications of an associative-commutative symbol store a flattened,
//! sorted argument list of length at least two, so that two terms are equal
//! modulo AC exactly when their canonical representatives are structurally
//! equal.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

/// Exact scalar literal.
pub type Rational = BigRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sort {
    /// Scalars.
    K,
    E,
    F,
    G,
}

impl Sort {
    pub const ALL: [Sort; 4] = [Sort::K, Sort::E, Sort::F, Sort::G];
    pub const VECTOR: [Sort; 3] = [Sort::E, Sort::F, Sort::G];

    pub fn is_vector(self) -> bool {
        self != Sort::K
    }

    pub fn name(self) -> &'static str {
        match self {
            Sort::K => "K",
            Sort::E => "E",
            Sort::F => "F",
            Sort::G => "G",
        }
    }

    pub fn parse(s: &str) -> Option<Sort> {
        match s {
            "K" => Some(Sort::K),
            "E" => Some(Sort::E),
            "F" => Some(Sort::F),
            "G" => Some(Sort::G),
            _ => None,
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Function symbols of the vector-space language.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    /// `+` of rank `<s, s, s>`; scalar addition when `s` is `K`.
    Add(Sort),
    /// Scalar multiplication.
    Mul,
    /// Scalar action `.` of rank `<K, s, s>`.
    Act(Sort),
    /// Vector zero of a vector sort.
    Zero(Sort),
    /// Bilinear product of rank `<E, F, G>`.
    Tensor,
    /// Free vector constant, e.g. a base vector.
    Const(Sort, Arc<str>),
}

impl Symbol {
    pub fn name(&self) -> String {
        match self {
            Symbol::Add(s) => format!("+{s}"),
            Symbol::Mul => "*".to_owned(),
            Symbol::Act(s) => format!(".{s}"),
            Symbol::Zero(s) => format!("0{s}"),
            Symbol::Tensor => "@".to_owned(),
            Symbol::Const(_, name) => name.to_string(),
        }
    }

    /// Parses the symbol names used in rule-file `ac` headers and signatures.
    pub fn from_name(name: &str) -> Option<Symbol> {
        match name {
            "*" => return Some(Symbol::Mul),
            "@" => return Some(Symbol::Tensor),
            _ => {}
        }
        let mut chars = name.chars();
        let head = chars.next()?;
        let sort = Sort::parse(chars.as_str())?;
        match head {
            '+' => Some(Symbol::Add(sort)),
            '.' if sort.is_vector() => Some(Symbol::Act(sort)),
            '0' if sort.is_vector() => Some(Symbol::Zero(sort)),
            _ => None,
        }
    }

    pub fn result_sort(&self) -> Sort {
        match self {
            Symbol::Add(s) | Symbol::Act(s) | Symbol::Zero(s) | Symbol::Const(s, _) => *s,
            Symbol::Mul => Sort::K,
            Symbol::Tensor => Sort::G,
        }
    }

    pub fn arg_sorts(&self) -> Vec<Sort> {
        match self {
            Symbol::Add(s) => vec![*s, *s],
            Symbol::Mul => vec![Sort::K, Sort::K],
            Symbol::Act(s) => vec![Sort::K, *s],
            Symbol::Zero(_) | Symbol::Const(..) => vec![],
            Symbol::Tensor => vec![Sort::E, Sort::F],
        }
    }

    /// Whether the symbol could legally be declared AC (binary, homogeneous).
    pub fn can_be_ac(&self) -> bool {
        matches!(self, Symbol::Add(_) | Symbol::Mul)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub name: Arc<str>,
    pub sort: Sort,
}

impl Var {
    pub fn new(name: &str, sort: Sort) -> Var {
        Var { name: Arc::from(name), sort }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Set of symbols rewritten modulo associativity and commutativity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct AcSet(BTreeSet<Symbol>);

impl AcSet {
    pub fn new() -> AcSet {
        AcSet(BTreeSet::new())
    }

    /// Vector `+` of every vector sort plus scalar `+` and `*`.
    pub fn standard() -> AcSet {
        let mut set: BTreeSet<Symbol> = Sort::VECTOR.iter().map(|s| Symbol::Add(*s)).collect();
        set.insert(Symbol::Add(Sort::K));
        set.insert(Symbol::Mul);
        AcSet(set)
    }

    /// Scalar `+` and `*` only.
    pub fn scalar() -> AcSet {
        AcSet([Symbol::Add(Sort::K), Symbol::Mul].into_iter().collect())
    }

    pub fn insert(&mut self, sym: Symbol) -> Result<(), TermError> {
        if !sym.can_be_ac() {
            return Err(TermError::NotAc(sym.name()));
        }
        self.0.insert(sym);
        Ok(())
    }

    pub fn contains(&self, sym: &Symbol) -> bool {
        self.0.contains(sym)
    }

    pub fn union(&self, other: &AcSet) -> AcSet {
        AcSet(self.0.union(&other.0).cloned().collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = &Symbol> {
        self.0.iter()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("symbol `{symbol}` expects {expected} argument(s), got {found}")]
    Arity {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("argument {index} of `{symbol}` has sort {found}, expected {expected}")]
    ArgSort {
        symbol: String,
        index: usize,
        expected: Sort,
        found: Sort,
    },
    #[error("sort mismatch: {left} vs {right}")]
    SortMismatch { left: Sort, right: Sort },
    #[error("cannot bind variable `{var}` of sort {expected} to a term of sort {found}")]
    UnsortedBinding {
        var: String,
        expected: Sort,
        found: Sort,
    },
    #[error("symbol `{0}` is not binary and homogeneous, it cannot be AC")]
    NotAc(String),
}

/// A sorted first-order term.
///
/// Build applications through [`Term::app`] so that AC-headed nodes stay
/// flattened and sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Var),
    Lit(Rational),
    App(Symbol, Vec<Term>),
}

impl Term {
    pub fn var(name: &str, sort: Sort) -> Term {
        Term::Var(Var::new(name, sort))
    }

    pub fn int(n: i64) -> Term {
        Term::Lit(Rational::from_integer(n.into()))
    }

    pub fn zero_scalar() -> Term {
        Term::Lit(Rational::zero())
    }

    pub fn one_scalar() -> Term {
        Term::Lit(Rational::one())
    }

    pub fn zero(sort: Sort) -> Term {
        Term::App(Symbol::Zero(sort), Vec::new())
    }

    pub fn constant(name: &str, sort: Sort) -> Term {
        Term::App(Symbol::Const(sort, Arc::from(name)), Vec::new())
    }

    /// Builds an application in canonical form, assuming `args` are canonical.
    ///
    /// For an AC symbol, arguments headed by the same symbol are spliced in
    /// and the list is sorted. A single remaining argument is returned as is.
    pub fn app(sym: Symbol, args: Vec<Term>, ac: &AcSet) -> Term {
        if !ac.contains(&sym) {
            return Term::App(sym, args);
        }
        let mut flat = Vec::with_capacity(args.len());
        for arg in args {
            match arg {
                Term::App(s, children) if s == sym => flat.extend(children),
                other => flat.push(other),
            }
        }
        assert!(!flat.is_empty(), "AC application without arguments");
        if flat.len() == 1 {
            return flat.pop().unwrap();
        }
        flat.sort();
        Term::App(sym, flat)
    }

    pub fn sort(&self) -> Sort {
        match self {
            Term::Var(v) => v.sort,
            Term::Lit(_) => Sort::K,
            Term::App(sym, _) => sym.result_sort(),
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::App(_, args) => args,
            _ => &[],
        }
    }

    pub fn head(&self) -> Option<&Symbol> {
        match self {
            Term::App(sym, _) => Some(sym),
            _ => None,
        }
    }

    pub fn as_lit(&self) -> Option<&Rational> {
        match self {
            Term::Lit(q) => Some(q),
            _ => None,
        }
    }

    pub fn is_lit_zero(&self) -> bool {
        self.as_lit().is_some_and(|q| q.is_zero())
    }

    pub fn is_lit_one(&self) -> bool {
        self.as_lit().is_some_and(|q| q.is_one())
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn node_count(&self) -> usize {
        1 + self.args().iter().map(Term::node_count).sum::<usize>()
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Lit(_) => {}
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    /// No variables of any sort.
    pub fn is_closed(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Lit(_) => true,
            Term::App(_, args) => args.iter().all(Term::is_closed),
        }
    }

    /// No variables of sort `K`.
    pub fn is_semi_open(&self) -> bool {
        match self {
            Term::Var(v) => v.sort != Sort::K,
            Term::Lit(_) => true,
            Term::App(_, args) => args.iter().all(Term::is_semi_open),
        }
    }

    /// Number of nodes of sort `K`.
    pub fn scalar_node_count(&self) -> usize {
        let own = usize::from(self.sort() == Sort::K);
        own + self.args().iter().map(Term::scalar_node_count).sum::<usize>()
    }

    pub fn subterm(&self, path: &[usize]) -> Option<&Term> {
        match path.split_first() {
            None => Some(self),
            Some((&i, rest)) => self.args().get(i)?.subterm(rest),
        }
    }

    /// Replaces the subterm at `path` and re-canonicalizes the ancestors.
    pub fn replace_at(&self, path: &[usize], new: Term, ac: &AcSet) -> Term {
        match path.split_first() {
            None => new,
            Some((&i, rest)) => match self {
                Term::App(sym, args) => {
                    let mut args = args.clone();
                    args[i] = args[i].replace_at(rest, new, ac);
                    Term::app(sym.clone(), args, ac)
                }
                _ => panic!("position {path:?} does not exist"),
            },
        }
    }

    /// Returns the unique AC-canonical representative of `self`.
    pub fn canonicalize(&self, ac: &AcSet) -> Term {
        match self {
            Term::App(sym, args) => {
                let args = args.iter().map(|a| a.canonicalize(ac)).collect();
                Term::app(sym.clone(), args, ac)
            }
            other => other.clone(),
        }
    }

    /// Applies `subst` to every variable occurrence, re-canonicalizing.
    pub fn substitute(&self, subst: &Substitution, ac: &AcSet) -> Term {
        match self {
            Term::Var(v) => subst.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::Lit(_) => self.clone(),
            Term::App(sym, args) => {
                let args = args.iter().map(|a| a.substitute(subst, ac)).collect();
                Term::app(sym.clone(), args, ac)
            }
        }
    }

    /// Arguments of `self` seen as a multiset under `sym`.
    pub fn flatten_under<'a>(&'a self, sym: &Symbol) -> Vec<&'a Term> {
        match self {
            Term::App(s, args) if s == sym => args.iter().collect(),
            other => vec![other],
        }
    }

    fn kind_rank(&self) -> u8 {
        match self {
            Term::Var(_) => 0,
            Term::Lit(_) => 1,
            Term::App(..) => 2,
        }
    }
}

/// The total term order: sort, node kind, name or value, arity, children.
impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort()
            .cmp(&other.sort())
            .then_with(|| self.kind_rank().cmp(&other.kind_rank()))
            .then_with(|| match (self, other) {
                (Term::Var(a), Term::Var(b)) => a.name.cmp(&b.name),
                (Term::Lit(a), Term::Lit(b)) => a.cmp(b),
                (Term::App(f, xs), Term::App(g, ys)) => {
                    cmp_symbols(f, g)
                        .then_with(|| xs.len().cmp(&ys.len()))
                        .then_with(|| xs.cmp(ys))
                }
                _ => unreachable!("kind ranks are equal"),
            })
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn cmp_symbols(f: &Symbol, g: &Symbol) -> Ordering {
    if f == g {
        return Ordering::Equal;
    }
    f.name().cmp(&g.name()).then_with(|| f.cmp(g))
}

/// Canonicalizes `t` under `ac`. Idempotent.
pub fn canonicalize(t: &Term, ac: &AcSet) -> Term {
    t.canonicalize(ac)
}

/// Equality modulo the AC axioms of the symbols in `ac`.
pub fn ac_equal(t: &Term, u: &Term, ac: &AcSet) -> Result<bool, TermError> {
    if t.sort() != u.sort() {
        return Err(TermError::SortMismatch {
            left: t.sort(),
            right: u.sort(),
        });
    }
    Ok(t.canonicalize(ac) == u.canonicalize(ac))
}

/// Sort-preserving finite map from variables to terms.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Substitution(BTreeMap<Var, Term>);

impl Substitution {
    pub fn new() -> Substitution {
        Substitution(BTreeMap::new())
    }

    pub fn bind(&mut self, var: Var, term: Term) -> Result<(), TermError> {
        if var.sort != term.sort() {
            return Err(TermError::UnsortedBinding {
                var: var.name.to_string(),
                expected: var.sort,
                found: term.sort(),
            });
        }
        self.0.insert(var, term);
        Ok(())
    }

    pub fn from_pairs<I: IntoIterator<Item = (Var, Term)>>(pairs: I) -> Result<Self, TermError> {
        let mut subst = Substitution::new();
        for (v, t) in pairs {
            subst.bind(v, t)?;
        }
        Ok(subst)
    }

    pub(crate) fn insert_unchecked(&mut self, var: Var, term: Term) {
        debug_assert_eq!(var.sort, term.sort());
        self.0.insert(var, term);
    }

    pub(crate) fn remove(&mut self, var: &Var) {
        self.0.remove(var);
    }

    pub fn get(&self, var: &Var) -> Option<&Term> {
        self.0.get(var)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.0.iter()
    }
}

/// Applies `subst` to `t`. Bindings are sort-checked when they are made, so
/// this cannot fail.
pub fn substitute(t: &Term, subst: &Substitution, ac: &AcSet) -> Term {
    t.substitute(subst, ac)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolDecl {
    pub symbol: Symbol,
    pub args: Vec<Sort>,
    pub result: Sort,
    pub ac: bool,
}

/// The symbols available to terms and their ranks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    sorts: BTreeSet<Sort>,
    symbols: BTreeMap<String, SymbolDecl>,
}

impl Signature {
    /// Scalars only: `+`, `*`, and literals.
    pub fn scalar() -> Signature {
        Signature::with_sorts(&[Sort::K])
    }

    /// Scalars and one vector sort `E`.
    pub fn linear() -> Signature {
        Signature::with_sorts(&[Sort::K, Sort::E])
    }

    /// Four sorts and the bilinear product.
    pub fn bilinear() -> Signature {
        Signature::with_sorts(&Sort::ALL)
    }

    /// The standard symbols over `sorts`, with every `+` and `*` declared AC.
    /// The product `@` is present when `E`, `F`, and `G` all are.
    pub fn with_sorts(sorts: &[Sort]) -> Signature {
        let mut sig = Signature {
            sorts: sorts.iter().copied().chain([Sort::K]).collect(),
            symbols: BTreeMap::new(),
        };
        sig.declare(Symbol::Add(Sort::K), true);
        sig.declare(Symbol::Mul, true);
        for &s in sorts.iter().filter(|s| s.is_vector()) {
            sig.declare(Symbol::Add(s), true);
            sig.declare(Symbol::Act(s), false);
            sig.declare(Symbol::Zero(s), false);
        }
        if [Sort::E, Sort::F, Sort::G].iter().all(|s| sig.sorts.contains(s)) {
            sig.declare(Symbol::Tensor, false);
        }
        sig
    }

    fn declare(&mut self, symbol: Symbol, ac: bool) {
        let decl = SymbolDecl {
            args: symbol.arg_sorts(),
            result: symbol.result_sort(),
            symbol: symbol.clone(),
            ac,
        };
        self.symbols.insert(symbol.name(), decl);
    }

    /// Adds a free vector constant.
    pub fn with_constant(mut self, name: &str, sort: Sort) -> Result<Signature, TermError> {
        if !sort.is_vector() || !self.sorts.contains(&sort) {
            return Err(TermError::UnknownSymbol(format!("{name}:{sort}")));
        }
        self.declare(Symbol::Const(sort, Arc::from(name)), false);
        Ok(self)
    }

    /// Replaces the AC flags with exactly the symbols in `ac`.
    pub fn with_ac(mut self, ac: &AcSet) -> Result<Signature, TermError> {
        for sym in ac.iter() {
            if !self.symbols.contains_key(&sym.name()) {
                return Err(TermError::UnknownSymbol(sym.name()));
            }
        }
        for decl in self.symbols.values_mut() {
            decl.ac = ac.contains(&decl.symbol);
        }
        Ok(self)
    }

    pub fn has_sort(&self, sort: Sort) -> bool {
        self.sorts.contains(&sort)
    }

    pub fn sorts(&self) -> impl Iterator<Item = Sort> + '_ {
        self.sorts.iter().copied()
    }

    pub fn lookup(&self, name: &str) -> Option<&SymbolDecl> {
        self.symbols.get(name)
    }

    pub fn declares(&self, sym: &Symbol) -> bool {
        self.symbols.get(&sym.name()).is_some_and(|d| &d.symbol == sym)
    }

    pub fn ac_set(&self) -> AcSet {
        AcSet(
            self.symbols
                .values()
                .filter(|d| d.ac)
                .map(|d| d.symbol.clone())
                .collect(),
        )
    }

    pub fn constants(&self) -> impl Iterator<Item = &Symbol> {
        self.symbols
            .values()
            .map(|d| &d.symbol)
            .filter(|s| matches!(s, Symbol::Const(..)))
    }
}

/// Checks `t` against `sig` and returns its sort.
pub fn well_sorted(t: &Term, sig: &Signature) -> Result<Sort, TermError> {
    match t {
        Term::Var(v) => {
            if sig.has_sort(v.sort) {
                Ok(v.sort)
            } else {
                Err(TermError::UnknownSymbol(format!("{}:{}", v.name, v.sort)))
            }
        }
        Term::Lit(_) => Ok(Sort::K),
        Term::App(sym, args) => {
            let decl = sig
                .lookup(&sym.name())
                .filter(|d| &d.symbol == sym)
                .ok_or_else(|| TermError::UnknownSymbol(sym.name()))?;
            let arity_ok = if decl.ac {
                args.len() >= 2
            } else {
                args.len() == decl.args.len()
            };
            if !arity_ok {
                return Err(TermError::Arity {
                    symbol: sym.name(),
                    expected: decl.args.len(),
                    found: args.len(),
                });
            }
            for (index, arg) in args.iter().enumerate() {
                let found = well_sorted(arg, sig)?;
                let expected = decl.args[index.min(decl.args.len() - 1)];
                if found != expected {
                    return Err(TermError::ArgSort {
                        symbol: sym.name(),
                        index,
                        expected,
                        found,
                    });
                }
            }
            Ok(decl.result)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Term {
        Term::var("x", Sort::E)
    }
    fn y() -> Term {
        Term::var("y", Sort::E)
    }
    fn z() -> Term {
        Term::var("z", Sort::E)
    }
    fn plus(a: Term, b: Term) -> Term {
        Term::App(Symbol::Add(Sort::E), vec![a, b])
    }
    fn act(l: Term, u: Term) -> Term {
        Term::App(Symbol::Act(Sort::E), vec![l, u])
    }

    #[test]
    fn flattens_nested_sums() {
        let ac = AcSet::standard();
        let t = plus(x(), plus(y(), x())).canonicalize(&ac);
        assert_eq!(t, Term::App(Symbol::Add(Sort::E), vec![x(), x(), y()]));
    }

    #[test]
    fn leaves_non_ac_roots_alone() {
        let ac = AcSet::standard();
        let t = act(Term::int(2), x());
        assert_eq!(t.canonicalize(&ac), t);
    }

    #[test]
    fn sorts_scalar_sums() {
        let ac = AcSet::standard();
        let lam = Term::var("l", Sort::K);
        let t = Term::App(Symbol::Add(Sort::K), vec![Term::one_scalar(), lam.clone()]);
        // variables come before literals in the term order
        assert_eq!(
            t.canonicalize(&ac),
            Term::App(Symbol::Add(Sort::K), vec![lam, Term::one_scalar()])
        );
    }

    #[test]
    fn ac_equal_examples() {
        let ac = AcSet::standard();
        assert!(ac_equal(&plus(x(), y()), &plus(y(), x()), &ac).unwrap());
        assert!(ac_equal(&plus(plus(x(), y()), z()), &plus(x(), plus(y(), z())), &ac).unwrap());
        assert!(!ac_equal(&act(Term::int(2), x()), &act(Term::int(3), x()), &ac).unwrap());
        assert!(matches!(
            ac_equal(&x(), &Term::int(1), &ac),
            Err(TermError::SortMismatch { .. })
        ));
    }

    #[test]
    fn substitution_examples() {
        let ac = AcSet::standard();
        let lam = Var::new("l", Sort::K);
        let u = Var::new("u", Sort::E);
        let pattern = act(Term::Var(lam.clone()), Term::Var(u.clone()));
        let sigma =
            Substitution::from_pairs([(lam, Term::int(2)), (u.clone(), plus(x(), y()))]).unwrap();
        assert_eq!(
            pattern.substitute(&sigma, &ac),
            act(Term::int(2), plus(x(), y()).canonicalize(&ac))
        );

        let sum = plus(Term::Var(u.clone()), Term::Var(u.clone()));
        let sigma = Substitution::from_pairs([(u.clone(), x())]).unwrap();
        assert_eq!(
            sum.substitute(&sigma, &ac),
            Term::App(Symbol::Add(Sort::E), vec![x(), x()])
        );

        let empty = Substitution::new();
        assert_eq!(Term::Var(u.clone()).substitute(&empty, &ac), Term::Var(u.clone()));

        let mut bad = Substitution::new();
        assert!(matches!(
            bad.bind(u, Term::int(3)),
            Err(TermError::UnsortedBinding { .. })
        ));
    }

    #[test]
    fn well_sorted_examples() {
        let sig = Signature::bilinear();
        assert_eq!(well_sorted(&act(Term::int(2), x()), &sig), Ok(Sort::E));
        let bad = Term::App(Symbol::Add(Sort::E), vec![x(), Term::int(2)]);
        assert!(matches!(well_sorted(&bad, &sig), Err(TermError::ArgSort { .. })));
        let prod = Term::App(Symbol::Tensor, vec![x(), Term::var("y", Sort::F)]);
        assert_eq!(well_sorted(&prod, &sig), Ok(Sort::G));
        assert!(matches!(
            well_sorted(&prod, &Signature::linear()),
            Err(TermError::UnknownSymbol(_))
        ));
        let short = Term::App(Symbol::Act(Sort::E), vec![x()]);
        assert!(matches!(well_sorted(&short, &sig), Err(TermError::Arity { .. })));
    }

    #[test]
    fn term_order_puts_sort_first() {
        let k = Term::var("zz", Sort::K);
        let e = Term::var("a", Sort::E);
        assert!(k < e);
        assert!(Term::var("b", Sort::E) < Term::zero(Sort::E));
        assert!(Term::int(1) < Term::int(2));
    }

    #[test]
    fn ac_flags_only_on_binary_symbols() {
        let mut ac = AcSet::new();
        assert!(ac.insert(Symbol::Act(Sort::E)).is_err());
        assert!(ac.insert(Symbol::Add(Sort::E)).is_ok());
    }

    #[test]
    fn replace_at_reflattens() {
        let ac = AcSet::standard();
        let t = plus(x(), act(Term::int(2), y())).canonicalize(&ac);
        // position 1 is 2.y in canonical order (var < app)
        let r = t.replace_at(&[1], plus(y(), z()).canonicalize(&ac), &ac);
        assert_eq!(r, plus(x(), plus(y(), z())).canonicalize(&ac));
    }
}
