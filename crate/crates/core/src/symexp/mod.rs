//! Exact arithmetic on functions of eps: sums of `c * eps^k * exp(q*eps)` and
//! their quotients, with certified enclosures and limit analysis.

mod asymptotic;
mod dyadic;
mod enclose;
mod exprat;
mod laurent;
pub mod rational;
pub mod text;

pub use asymptotic::{dominant_term_at_infinity, vanishing_order_at_zero, Dominant, Vanishing};
pub use dyadic::{exp_dir, ln2, Dir, Dyadic, Interval};
pub use enclose::{enclose, Encloser};
pub use exprat::{ExpRational, SymError};
pub use laurent::{exp_upper_rational, LaurentExpPoly, TermKey};
pub use rational::{fmt_decimal, fmt_rational, parse_rational, rat, Rational};
