//! Interpretations into the naturals used by the termination arguments.
//!
//! Both are compatible with AC: a flattened sum or product is measured by
//! folding the binary interpretation over its arguments.

use thiserror::Error;

use crate::term::{Sort, Symbol, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MeasureError {
    #[error("expected a vector-sorted term, found sort K")]
    Scalar,
    #[error("expected a scalar term, found sort {0}")]
    Vector(Sort),
}

/// `|u + v| = 2 + |u| + |v|`, `|λ.u| = 1 + 2|u|`, `|0| = 0`,
/// `|u ⊗ v| = (3|u| + 2)(3|v| + 2)`, and `0` for variables and constants.
/// Scalars are ignored.
pub fn measure_vec(t: &Term) -> Result<u64, MeasureError> {
    if t.sort() == Sort::K {
        return Err(MeasureError::Scalar);
    }
    Ok(vec_of(t))
}

fn vec_of(t: &Term) -> u64 {
    match t {
        Term::Var(_) | Term::Lit(_) => 0,
        Term::App(sym, args) => match sym {
            Symbol::Add(_) => {
                let inner: u64 = args.iter().map(vec_of).sum();
                inner + 2 * (args.len() as u64 - 1)
            }
            Symbol::Act(_) => 1 + 2 * vec_of(&args[1]),
            Symbol::Tensor => (3 * vec_of(&args[0]) + 2) * (3 * vec_of(&args[1]) + 2),
            Symbol::Zero(_) | Symbol::Const(..) | Symbol::Mul => 0,
        },
    }
}

/// `||λ + μ|| = ||λ|| + ||μ|| + 1`, `||λ × μ|| = ||λ|| ||μ||`, and `2` for
/// every literal and variable.
pub fn measure_s0(t: &Term) -> Result<u64, MeasureError> {
    if t.sort() != Sort::K {
        return Err(MeasureError::Vector(t.sort()));
    }
    Ok(s0_of(t))
}

fn s0_of(t: &Term) -> u64 {
    match t {
        Term::Var(_) | Term::Lit(_) => 2,
        Term::App(Symbol::Mul, args) => args.iter().map(s0_of).product(),
        Term::App(_, args) => args.iter().map(s0_of).sum::<u64>() + (args.len() as u64 - 1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;
    use crate::term::Signature;

    fn t(src: &str) -> Term {
        parse_term(src, &Signature::bilinear()).unwrap()
    }

    #[test]
    fn vector_measure_examples() {
        assert_eq!(measure_vec(&t("0E")), Ok(0));
        assert_eq!(measure_vec(&t("vars x:E; 2.x + 3.x")), Ok(4));
        assert_eq!(measure_vec(&t("vars x:E y:F; x @ y")), Ok(4));
        assert_eq!(measure_vec(&t("vars x y z:E; x + y + z")), Ok(4));
        assert_eq!(measure_vec(&t("1")), Err(MeasureError::Scalar));
    }

    #[test]
    fn scalar_measure_examples() {
        assert_eq!(measure_s0(&t("0")), Ok(2));
        assert_eq!(measure_s0(&t("0 + 1")), Ok(5));
        assert_eq!(measure_s0(&t("vars l:K; 1 * l")), Ok(4));
        assert_eq!(measure_s0(&t("1 + 1 + 1")), Ok(8));
        assert!(measure_s0(&t("0E")).is_err());
    }
}
