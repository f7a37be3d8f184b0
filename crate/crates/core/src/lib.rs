//! A resource lambda calculus with non-deterministic reduction,
//! standardization and an abstract machine.

pub mod canon;
pub mod error;
pub mod gen;
pub mod machine;
pub mod parse;
pub mod path;
pub mod print;
pub mod reduction;
pub mod standardization;
pub mod subst;
pub mod sum;
pub mod syntax;

pub use canon::{alpha_eq, canonicalize, Canonical, CanonicalForm};
pub use error::{Error, Result};
pub use parse::{parse_lambda, parse_sum, parse_term, ParseError, SourceSpan};
pub use path::{Path, PathStep};
pub use print::{print_canonical, print_expression, print_lambda, print_sum, print_term};
pub use subst::{bag_subst, classical_subst, linear_subst, partial_subst, resource_subst};
pub use sum::Sum;
pub use syntax::{from_lambda, Bag, ElemId, Expression, LambdaTerm, Name, Resource, Term};
