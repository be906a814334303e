//! Evaluation of terms in concrete algebras, normal-form classification,
//! and coordinate read-off of normal forms.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::analysis::{sample_seed, LabReport};
use crate::engine::{auto_fuel, Rewriter, RewriteSystem, Strategy};
use crate::term::{AcSet, Rational, Sort, Symbol, Term, Var};

/// An element of a model carrier.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Scalar(Rational),
    /// Coordinates in the canonical basis.
    Vector(Vec<Rational>),
    /// Index into a finite carrier.
    Finite(usize),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Scalar(q) => write!(f, "{q}"),
            Value::Vector(v) => write!(f, "{}", join(v)),
            Value::Finite(i) => write!(f, "#{i}"),
        }
    }
}

fn join(v: &[Rational]) -> String {
    v.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("variable `{0}` is not assigned")]
    Unbound(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("model does not interpret `{0}`")]
    Uninterpreted(String),
    #[error("value of the wrong kind for `{0}`")]
    Kind(String),
}

/// An algebra interpreting the symbols of a signature.
pub trait Model: Sync {
    fn name(&self) -> String;

    fn literal(&self, q: &Rational) -> Result<Value, EvalError>;

    fn apply(&self, sym: &Symbol, args: &[Value]) -> Result<Value, EvalError>;

    /// A random element of the carrier of `sort`.
    fn random(&self, sort: Sort, rng: &mut ChaCha8Rng) -> Result<Value, EvalError>;

    /// The whole carrier of `sort` when it is finite.
    fn carrier(&self, _sort: Sort) -> Option<Vec<Value>> {
        None
    }
}

/// Scalars in Q and each configured vector sort as Q^d. With dimensions
/// `n`, `p`, and `n·p` for `E`, `F`, `G`, the product sends `e_i ⊗ e'_j` to
/// `e''_(p(i-1)+j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorModel {
    dims: BTreeMap<Sort, usize>,
    constants: BTreeMap<String, Vec<Rational>>,
}

impl VectorModel {
    /// `E` as Q^n.
    pub fn linear(n: usize) -> VectorModel {
        VectorModel {
            dims: BTreeMap::from([(Sort::E, n)]),
            constants: BTreeMap::new(),
        }
    }

    /// `E = Q^n`, `F = Q^p`, `G = Q^(np)` with the product above.
    pub fn tensor(n: usize, p: usize) -> VectorModel {
        VectorModel {
            dims: BTreeMap::from([(Sort::E, n), (Sort::F, p), (Sort::G, n * p)]),
            constants: BTreeMap::new(),
        }
    }

    pub fn dim(&self, sort: Sort) -> Option<usize> {
        self.dims.get(&sort).copied()
    }

    /// Interprets the constant `name` of `sort` as `coords`.
    pub fn with_constant(mut self, name: &str, sort: Sort, coords: Vec<Rational>) -> Result<VectorModel, EvalError> {
        if self.dim(sort) != Some(coords.len()) {
            return Err(EvalError::Dimension(format!("constant {name}:{sort}")));
        }
        self.constants.insert(name.to_owned(), coords);
        Ok(self)
    }

    fn vec_arg<'v>(&self, sym: &Symbol, sort: Sort, v: &'v Value) -> Result<&'v [Rational], EvalError> {
        match v {
            Value::Vector(c) if Some(c.len()) == self.dim(sort) => Ok(c),
            Value::Vector(_) => Err(EvalError::Dimension(sym.name())),
            _ => Err(EvalError::Kind(sym.name())),
        }
    }
}

fn scalar_arg(sym: &Symbol, v: &Value) -> Result<Rational, EvalError> {
    match v {
        Value::Scalar(q) => Ok(q.clone()),
        _ => Err(EvalError::Kind(sym.name())),
    }
}

/// A small random rational with numerator in -4..=4 and denominator 1..=3.
fn small_rational(rng: &mut ChaCha8Rng) -> Rational {
    Rational::new(rng.gen_range(-4i64..=4).into(), rng.gen_range(1i64..=3).into())
}

impl Model for VectorModel {
    fn name(&self) -> String {
        let dims: Vec<String> = self.dims.iter().map(|(s, d)| format!("{s}=Q^{d}")).collect();
        dims.join(" ")
    }

    fn literal(&self, q: &Rational) -> Result<Value, EvalError> {
        Ok(Value::Scalar(q.clone()))
    }

    fn apply(&self, sym: &Symbol, args: &[Value]) -> Result<Value, EvalError> {
        let dim = |s: Sort| self.dim(s).ok_or_else(|| EvalError::Uninterpreted(sym.name()));
        match sym {
            Symbol::Add(Sort::K) => args
                .iter()
                .map(|a| scalar_arg(sym, a))
                .sum::<Result<Rational, _>>()
                .map(Value::Scalar),
            Symbol::Mul => args
                .iter()
                .map(|a| scalar_arg(sym, a))
                .product::<Result<Rational, _>>()
                .map(Value::Scalar),
            Symbol::Add(s) => {
                let mut acc = vec![Rational::zero(); dim(*s)?];
                for a in args {
                    for (x, y) in acc.iter_mut().zip(self.vec_arg(sym, *s, a)?) {
                        *x += y;
                    }
                }
                Ok(Value::Vector(acc))
            }
            Symbol::Act(s) => {
                dim(*s)?;
                let l = scalar_arg(sym, &args[0])?;
                let v = self.vec_arg(sym, *s, &args[1])?;
                Ok(Value::Vector(v.iter().map(|x| &l * x).collect()))
            }
            Symbol::Zero(s) => Ok(Value::Vector(vec![Rational::zero(); dim(*s)?])),
            Symbol::Tensor => {
                let (n, p) = (dim(Sort::E)?, dim(Sort::F)?);
                if dim(Sort::G)? != n * p {
                    return Err(EvalError::Dimension("@".into()));
                }
                let u = self.vec_arg(sym, Sort::E, &args[0])?;
                let v = self.vec_arg(sym, Sort::F, &args[1])?;
                let mut out = Vec::with_capacity(n * p);
                for a in u {
                    for b in v {
                        out.push(a * b);
                    }
                }
                Ok(Value::Vector(out))
            }
            Symbol::Const(_, name) => self
                .constants
                .get(&**name)
                .cloned()
                .map(Value::Vector)
                .ok_or_else(|| EvalError::Uninterpreted(name.to_string())),
        }
    }

    fn random(&self, sort: Sort, rng: &mut ChaCha8Rng) -> Result<Value, EvalError> {
        if sort == Sort::K {
            return Ok(Value::Scalar(small_rational(rng)));
        }
        let d = self.dim(sort).ok_or_else(|| EvalError::Uninterpreted(sort.to_string()))?;
        Ok(Value::Vector((0..d).map(|_| small_rational(rng)).collect()))
    }
}

/// A finite scalar carrier given by operation tables; no vector sorts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteModel {
    name: String,
    /// Carrier elements by literal value.
    elements: Vec<Rational>,
    add: Vec<Vec<usize>>,
    mul: Vec<Vec<usize>>,
}

impl FiniteModel {
    /// A scalar carrier whose `i`-th element is written as the literal
    /// `elements[i]`, with `+` and `*` given by the tables.
    pub fn from_tables(
        name: &str,
        elements: Vec<Rational>,
        add: Vec<Vec<usize>>,
        mul: Vec<Vec<usize>>,
    ) -> Result<FiniteModel, EvalError> {
        let k = elements.len();
        let square = |t: &Vec<Vec<usize>>| t.len() == k && t.iter().all(|row| row.len() == k && row.iter().all(|&x| x < k));
        if k == 0 || !square(&add) || !square(&mul) {
            return Err(EvalError::Dimension(format!("operation tables of {name}")));
        }
        Ok(FiniteModel {
            name: name.to_owned(),
            elements,
            add,
            mul,
        })
    }

    /// `{0, 1}` with `+` as min and `*` as max.
    pub fn min_max() -> FiniteModel {
        let table = |f: fn(usize, usize) -> usize| (0..2).map(|a| (0..2).map(|b| f(a, b)).collect()).collect();
        FiniteModel {
            name: "{0,1} min/max".into(),
            elements: vec![Rational::zero(), Rational::one()],
            add: table(usize::min),
            mul: table(usize::max),
        }
    }

    fn op(&self, table: &[Vec<usize>], sym: &Symbol, args: &[Value]) -> Result<Value, EvalError> {
        let mut acc: Option<usize> = None;
        for a in args {
            let Value::Finite(i) = a else {
                return Err(EvalError::Kind(sym.name()));
            };
            acc = Some(match acc {
                None => *i,
                Some(x) => table[x][*i],
            });
        }
        acc.map(Value::Finite).ok_or_else(|| EvalError::Kind(sym.name()))
    }
}

impl Model for FiniteModel {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn literal(&self, q: &Rational) -> Result<Value, EvalError> {
        self.elements
            .iter()
            .position(|e| e == q)
            .map(Value::Finite)
            .ok_or_else(|| EvalError::Uninterpreted(q.to_string()))
    }

    fn apply(&self, sym: &Symbol, args: &[Value]) -> Result<Value, EvalError> {
        match sym {
            Symbol::Add(Sort::K) => self.op(&self.add, sym, args),
            Symbol::Mul => self.op(&self.mul, sym, args),
            _ => Err(EvalError::Uninterpreted(sym.name())),
        }
    }

    fn random(&self, sort: Sort, rng: &mut ChaCha8Rng) -> Result<Value, EvalError> {
        if sort != Sort::K {
            return Err(EvalError::Uninterpreted(sort.to_string()));
        }
        Ok(Value::Finite(rng.gen_range(0..self.elements.len())))
    }

    fn carrier(&self, sort: Sort) -> Option<Vec<Value>> {
        (sort == Sort::K).then(|| (0..self.elements.len()).map(Value::Finite).collect())
    }
}

/// A model with one symbol reinterpreted, for negative controls.
pub struct Patched<M> {
    pub base: M,
    pub symbol: Symbol,
    pub patch: fn(&M, &[Value]) -> Result<Value, EvalError>,
}

impl<M: Model> Model for Patched<M> {
    fn name(&self) -> String {
        format!("{} with {} patched", self.base.name(), self.symbol.name())
    }

    fn literal(&self, q: &Rational) -> Result<Value, EvalError> {
        self.base.literal(q)
    }

    fn apply(&self, sym: &Symbol, args: &[Value]) -> Result<Value, EvalError> {
        if *sym == self.symbol {
            (self.patch)(&self.base, args)
        } else {
            self.base.apply(sym, args)
        }
    }

    fn random(&self, sort: Sort, rng: &mut ChaCha8Rng) -> Result<Value, EvalError> {
        self.base.random(sort, rng)
    }

    fn carrier(&self, sort: Sort) -> Option<Vec<Value>> {
        self.base.carrier(sort)
    }
}

/// Values of variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment(BTreeMap<Var, Value>);

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    pub fn insert(&mut self, var: Var, value: Value) {
        self.0.insert(var, value);
    }

    pub fn get(&self, var: &Var) -> Option<&Value> {
        self.0.get(var)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(v, x)| format!("{v} := ({x})")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// The value of `t` in `m` under `phi`, computed exactly.
pub fn eval(t: &Term, phi: &Assignment, m: &dyn Model) -> Result<Value, EvalError> {
    match t {
        Term::Var(v) => phi.get(v).cloned().ok_or_else(|| EvalError::Unbound(v.name.to_string())),
        Term::Lit(q) => m.literal(q),
        Term::App(sym, args) => {
            let vals = args.iter().map(|a| eval(a, phi, m)).collect::<Result<Vec<_>, _>>()?;
            m.apply(sym, &vals)
        }
    }
}

/// `x_i ↦ e_i` for `evars` and `y_j ↦ e'_j` for `fvars`. The dimension of
/// each sort in `m` (0 when absent) must equal the length of its list.
pub fn canonical_assignment(evars: &[Var], fvars: &[Var], m: &VectorModel) -> Result<Assignment, EvalError> {
    let mut phi = Assignment::new();
    for (sort, vars) in [(Sort::E, evars), (Sort::F, fvars)] {
        let unique: BTreeSet<&Var> = vars.iter().collect();
        if unique.len() != vars.len() {
            return Err(EvalError::Dimension(format!("duplicate {sort} variable")));
        }
        if let Some(v) = vars.iter().find(|v| v.sort != sort) {
            return Err(EvalError::Dimension(format!("{} is not of sort {sort}", v.name)));
        }
        let d = m.dim(sort).unwrap_or(0);
        if d != vars.len() {
            return Err(EvalError::Dimension(format!(
                "{} {sort} variables for dimension {d}",
                vars.len()
            )));
        }
        for (i, v) in vars.iter().enumerate() {
            let mut e = vec![Rational::zero(); d];
            e[i] = Rational::one();
            phi.insert(v.clone(), Value::Vector(e));
        }
    }
    Ok(phi)
}

/// Coordinates of a classified normal form along ordered variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition(pub Vec<Rational>);

impl fmt::Display for Decomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&join(&self.0))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecomposeError {
    #[error("not a classified normal form: {0}")]
    NotNormal(String),
    #[error("`{0}` is not among the listed variables")]
    UnknownAtom(String),
}

/// A summand of a classified normal form: its coefficient (if written) and
/// its atom.
fn summands(t: &Term) -> Vec<(Option<&Rational>, &Term)> {
    let parts: Vec<&Term> = match t {
        Term::App(Symbol::Add(_), args) => args.iter().collect(),
        _ => vec![t],
    };
    parts
        .into_iter()
        .map(|p| match p {
            Term::App(Symbol::Act(_), args) => (args[0].as_lit(), &args[1]),
            atom => (None, atom),
        })
        .collect()
}

fn is_atom(t: &Term) -> bool {
    match t {
        Term::Var(v) => v.sort.is_vector(),
        Term::App(Symbol::Const(..), _) => true,
        Term::App(Symbol::Tensor, args) => {
            matches!(&args[0], Term::Var(_) | Term::App(Symbol::Const(..), _))
                && matches!(&args[1], Term::Var(_) | Term::App(Symbol::Const(..), _))
        }
        _ => false,
    }
}

/// Whether `t` is `0` or a sum of pairwise distinct atoms, each bare or
/// scaled by a literal other than 0 and 1. Atoms are vector variables,
/// constants, and products `x ⊗ y` of such.
pub fn classify_nf(t: &Term) -> bool {
    if t.sort() == Sort::K {
        return false;
    }
    if matches!(t, Term::App(Symbol::Zero(_), _)) {
        return true;
    }
    if let Term::App(Symbol::Act(_), args) = t {
        if args[0].as_lit().is_none() {
            return false;
        }
    }
    let mut seen = BTreeSet::new();
    for part in match t {
        Term::App(Symbol::Add(_), args) => args.as_slice(),
        _ => std::slice::from_ref(t),
    } {
        let atom = match part {
            Term::App(Symbol::Act(_), args) => match args[0].as_lit() {
                Some(q) if !q.is_zero() && !q.is_one() => &args[1],
                _ => return false,
            },
            atom => atom,
        };
        if !is_atom(atom) || !seen.insert(atom) {
            return false;
        }
    }
    true
}

/// Reads the coefficients of a classified normal form along `evars`, or,
/// when `fvars` is non-empty, along the pairs `x_i ⊗ y_j` at slot
/// `i·|fvars| + j` (0-based).
pub fn decompose(nf: &Term, evars: &[Var], fvars: &[Var]) -> Result<Decomposition, DecomposeError> {
    if !classify_nf(nf) {
        return Err(DecomposeError::NotNormal(nf.to_string()));
    }
    let p = fvars.len();
    let len = if p == 0 { evars.len() } else { evars.len() * p };
    let mut out = vec![Rational::zero(); len];
    if matches!(nf, Term::App(Symbol::Zero(_), _)) {
        return Ok(Decomposition(out));
    }
    let index_of = |vars: &[Var], t: &Term| match t {
        Term::Var(v) => vars.iter().position(|w| w == v),
        _ => None,
    };
    for (coef, atom) in summands(nf) {
        let slot = match atom {
            Term::App(Symbol::Tensor, args) if p > 0 => {
                index_of(evars, &args[0]).zip(index_of(fvars, &args[1])).map(|(i, j)| i * p + j)
            }
            _ if p == 0 => index_of(evars, atom),
            _ => None,
        };
        let slot = slot.ok_or_else(|| DecomposeError::UnknownAtom(atom.to_string()))?;
        out[slot] = coef.cloned().unwrap_or_else(Rational::one);
    }
    Ok(Decomposition(out))
}

/// Evaluates every rule of `sys` and the associativity and commutativity of
/// its AC symbols under `samples` random assignments, or under every
/// assignment when the carriers are finite.
pub fn model_validity_check(sys: &RewriteSystem, m: &dyn Model, samples: usize, seed: u64) -> LabReport {
    let mut report = LabReport::new("model-validity", seed);
    let mut equations: Vec<(String, Term, Term)> = sys
        .rules
        .iter()
        .map(|r| (r.id.clone(), r.lhs.clone(), r.rhs.clone()))
        .collect();
    equations.extend(ac_axioms(&sys.ac));
    for (i, (name, l, r)) in equations.iter().enumerate() {
        let vars: Vec<Var> = l.vars().union(&r.vars()).cloned().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(sample_seed(seed, i));
        let assignments = match exhaustive(&vars, m) {
            Some(all) => all,
            None => (0..samples)
                .map(|_| {
                    let mut phi = Assignment::new();
                    for v in &vars {
                        phi.insert(v.clone(), m.random(v.sort, &mut rng)?);
                    }
                    Ok(phi)
                })
                .collect::<Result<Vec<_>, EvalError>>()
                .unwrap_or_default(),
        };
        if assignments.is_empty() && !vars.is_empty() {
            report.fail(l, Some((l, r)), format!("{name}: model has no values for its variables"));
            continue;
        }
        let assignments = if vars.is_empty() { vec![Assignment::new()] } else { assignments };
        for phi in &assignments {
            report.samples += 1;
            match (eval(l, phi, m), eval(r, phi, m)) {
                (Ok(a), Ok(b)) if a == b => {}
                (Ok(a), Ok(b)) => {
                    report.fail(l, Some((l, r)), format!("{name} under {phi}: {a} vs {b}"));
                    break;
                }
                (Err(e), _) | (_, Err(e)) => {
                    report.fail(l, Some((l, r)), format!("{name}: {e}"));
                    break;
                }
            }
        }
    }
    report
}

/// `f(x, f(y, z)) = f(f(x, y), z)` and `f(x, y) = f(y, x)` for each `f`.
fn ac_axioms(ac: &AcSet) -> Vec<(String, Term, Term)> {
    let mut out = Vec::new();
    for f in ac.iter() {
        let s = f.result_sort();
        let v = |n: &str| Term::var(n, s);
        let app = |a: Term, b: Term| Term::App(f.clone(), vec![a, b]);
        let name = f.name();
        out.push((
            format!("assoc {name}"),
            app(v("x"), app(v("y"), v("z"))),
            app(app(v("x"), v("y")), v("z")),
        ));
        out.push((format!("comm {name}"), app(v("x"), v("y")), app(v("y"), v("x"))));
    }
    out
}

/// Largest exhaustive enumeration attempted.
const EXHAUSTIVE_LIMIT: usize = 1 << 12;

fn exhaustive(vars: &[Var], m: &dyn Model) -> Option<Vec<Assignment>> {
    let carriers = vars.iter().map(|v| m.carrier(v.sort)).collect::<Option<Vec<_>>>()?;
    let total = carriers.iter().try_fold(1usize, |acc, c| acc.checked_mul(c.len()))?;
    if total > EXHAUSTIVE_LIMIT {
        return None;
    }
    let mut out = vec![Assignment::new()];
    for (v, carrier) in vars.iter().zip(carriers) {
        out = out
            .into_iter()
            .flat_map(|phi| {
                carrier.iter().map(move |x| {
                    let mut phi = phi.clone();
                    phi.insert(v.clone(), x.clone());
                    phi
                })
            })
            .collect();
    }
    Some(out)
}

/// The three equivalence criteria for a pair of terms and whether they
/// agree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniversalityVerdict {
    /// Normal forms equal modulo AC.
    pub nf_equal: bool,
    /// Equal values under the canonical assignment.
    pub eval_equal: bool,
    /// Equal decompositions of the normal forms.
    pub decomposition_equal: bool,
    /// The decomposition of each normal form equals its value's coordinates.
    pub decomposition_matches_eval: bool,
    /// A description of the first problem, if any.
    pub problem: Option<String>,
}

impl UniversalityVerdict {
    pub fn pass(&self) -> bool {
        self.problem.is_none()
            && self.nf_equal == self.eval_equal
            && self.eval_equal == self.decomposition_equal
            && self.decomposition_matches_eval
    }
}

/// Compares `t` and `u` by normal form, by value under the canonical
/// assignment of `evars`/`fvars` in `m`, and by decomposition.
pub fn universality_check(
    rw: &Rewriter<'_>,
    t: &Term,
    u: &Term,
    evars: &[Var],
    fvars: &[Var],
    m: &VectorModel,
) -> UniversalityVerdict {
    let mut verdict = UniversalityVerdict {
        nf_equal: false,
        eval_equal: false,
        decomposition_equal: false,
        decomposition_matches_eval: false,
        problem: None,
    };
    let run = |verdict: &mut UniversalityVerdict| -> Result<(), String> {
        let phi = canonical_assignment(evars, fvars, m).map_err(|e| e.to_string())?;
        let nf = |x: &Term| {
            rw.normalize(x, Strategy::LeftmostInnermost, auto_fuel(x))
                .map(|(n, _)| n)
                .map_err(|e| e.to_string())
        };
        let (nt, nu) = (nf(t)?, nf(u)?);
        let (vt, vu) = (
            eval(t, &phi, m).map_err(|e| e.to_string())?,
            eval(u, &phi, m).map_err(|e| e.to_string())?,
        );
        let (dt, du) = (
            decompose(&nt, evars, fvars).map_err(|e| e.to_string())?,
            decompose(&nu, evars, fvars).map_err(|e| e.to_string())?,
        );
        verdict.nf_equal = nt == nu;
        verdict.eval_equal = vt == vu;
        verdict.decomposition_equal = dt == du;
        verdict.decomposition_matches_eval =
            Value::Vector(dt.0.clone()) == vt && Value::Vector(du.0.clone()) == vu;
        Ok(())
    };
    if let Err(e) = run(&mut verdict) {
        verdict.problem = Some(e);
    }
    verdict
}
