//! Seeded random terms for the check suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::term::{Rational, Signature, Sort, Symbol, Term, Var};

/// What [`gen_term`] may put at the leaves.
#[derive(Clone, Debug)]
pub struct GenOptions {
    /// No variables of sort `K`.
    pub semi_open: bool,
    /// Size of the variable pool of each vector sort.
    pub vector_vars: usize,
    /// Pool sizes overriding `vector_vars` for particular sorts.
    pub pools: Vec<(Sort, usize)>,
    /// Size of the pool of scalar variables, used when not semi-open.
    pub scalar_vars: usize,
    /// Scalar literals the generator draws from.
    pub literals: Vec<Rational>,
    /// Whether the free constants of the signature may appear.
    pub constants: bool,
    /// Whether variables of sort `G` may appear; without them `G` leaves are
    /// products of `E` and `F` variables or `0G`.
    pub g_vars: bool,
    /// Largest scalar coefficient of a scalar action, in nodes.
    pub scalar_size: usize,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions {
            semi_open: true,
            vector_vars: 3,
            pools: Vec::new(),
            scalar_vars: 2,
            literals: default_literals(),
            constants: false,
            g_vars: true,
            scalar_size: 3,
        }
    }
}

impl GenOptions {
    /// Number of pool variables of the vector sort `sort`.
    pub fn pool_size(&self, sort: Sort) -> usize {
        self.pools
            .iter()
            .find(|(s, _)| *s == sort)
            .map_or(self.vector_vars, |&(_, n)| n)
    }
}

fn default_literals() -> Vec<Rational> {
    [(0, 1), (1, 1), (2, 1), (3, 1), (-1, 1), (1, 2)]
        .iter()
        .map(|&(n, d)| Rational::new(n.into(), d.into()))
        .collect()
}

/// Name of the `i`-th pool variable of `sort` (0-based): `x1…` for `E`,
/// `y1…` for `F`, `z1…` for `G`, `a1…` for `K`.
pub fn pool_var(sort: Sort, i: usize) -> Var {
    let prefix = match sort {
        Sort::E => "x",
        Sort::F => "y",
        Sort::G => "z",
        Sort::K => "a",
    };
    Var::new(&format!("{prefix}{}", i + 1), sort)
}

/// A random canonical term of `sort` over `sig` with at most `max(size, 1)`
/// nodes. The same arguments always produce the same term.
pub fn gen_term(sig: &Signature, sort: Sort, size: usize, seed: u64, opts: &GenOptions) -> Term {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let constants: Vec<Symbol> = if opts.constants {
        sig.constants().cloned().collect()
    } else {
        Vec::new()
    };
    let g = Gen {
        sig,
        opts,
        constants,
    };
    g.term(sort, size.max(1), &mut rng).canonicalize(&sig.ac_set())
}

struct Gen<'a> {
    sig: &'a Signature,
    opts: &'a GenOptions,
    constants: Vec<Symbol>,
}

impl Gen<'_> {
    fn term(&self, sort: Sort, size: usize, rng: &mut ChaCha8Rng) -> Term {
        if sort == Sort::K {
            self.scalar(size, rng)
        } else {
            self.vector(sort, size, rng)
        }
    }

    fn scalar(&self, size: usize, rng: &mut ChaCha8Rng) -> Term {
        if size < 3 || rng.gen_bool(0.4) {
            let use_var = !self.opts.semi_open && self.opts.scalar_vars > 0 && rng.gen_bool(0.4);
            if use_var {
                return Term::Var(pool_var(Sort::K, rng.gen_range(0..self.opts.scalar_vars)));
            }
            let lits = &self.opts.literals;
            return Term::Lit(lits[rng.gen_range(0..lits.len())].clone());
        }
        let (l, r) = split(size - 1, rng);
        let sym = if rng.gen_bool(0.5) { Symbol::Add(Sort::K) } else { Symbol::Mul };
        Term::App(sym, vec![self.scalar(l, rng), self.scalar(r, rng)])
    }

    fn vector(&self, sort: Sort, size: usize, rng: &mut ChaCha8Rng) -> Term {
        let tensor = sort == Sort::G && self.sig.declares(&Symbol::Tensor);
        if size >= 3 && !rng.gen_bool(0.15) {
            match rng.gen_range(0..if tensor { 5 } else { 3 }) {
                0 | 1 => {
                    let (l, r) = split(size - 1, rng);
                    return Term::App(Symbol::Add(sort), vec![self.vector(sort, l, rng), self.vector(sort, r, rng)]);
                }
                3 | 4 => {
                    let (l, r) = split(size - 1, rng);
                    return Term::App(Symbol::Tensor, vec![self.vector(Sort::E, l, rng), self.vector(Sort::F, r, rng)]);
                }
                _ => {
                    let s = rng.gen_range(1..=(size - 2).min(self.opts.scalar_size.max(1)));
                    return Term::App(
                        Symbol::Act(sort),
                        vec![self.scalar(s, rng), self.vector(sort, size - 1 - s, rng)],
                    );
                }
            }
        }
        self.leaf(sort, size, rng)
    }

    fn leaf(&self, sort: Sort, size: usize, rng: &mut ChaCha8Rng) -> Term {
        let consts: Vec<&Symbol> = self
            .constants
            .iter()
            .filter(|c| c.result_sort() == sort)
            .collect();
        if !consts.is_empty() && rng.gen_bool(0.25) {
            return Term::App(consts[rng.gen_range(0..consts.len())].clone(), Vec::new());
        }
        let pool = self.opts.pool_size(sort);
        let product_ok = sort == Sort::G
            && size >= 3
            && self.sig.declares(&Symbol::Tensor)
            && self.opts.pool_size(Sort::E) > 0
            && self.opts.pool_size(Sort::F) > 0;
        let vars_ok = pool > 0 && (sort != Sort::G || self.opts.g_vars);
        if product_ok && (!vars_ok || rng.gen_bool(0.5)) && rng.gen_bool(0.85) {
            return Term::App(
                Symbol::Tensor,
                vec![self.leaf(Sort::E, 1, rng), self.leaf(Sort::F, 1, rng)],
            );
        }
        if vars_ok && rng.gen_bool(0.8) {
            return Term::Var(pool_var(sort, rng.gen_range(0..pool)));
        }
        Term::zero(sort)
    }
}

/// Splits `n ≥ 2` into two positive parts.
fn split(n: usize, rng: &mut ChaCha8Rng) -> (usize, usize) {
    let l = rng.gen_range(1..n);
    (l, n - l)
}
