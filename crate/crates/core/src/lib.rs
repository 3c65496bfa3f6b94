//! Exact computation of the topological type of a cuspidal plane-curve
//! singularity from a local parametrization `(x(t), y(t))`.
//!
//! The characteristic sequence `(p; q_0, ..., q_n)` is determined by a
//! recursion over polynomials in `x`, `y` and their `t`-derivatives
//! ([`engine`]), cross-checkable against a classical Newton-Puiseux
//! expansion ([`puiseux`]). Both routes work in unbounded rational
//! arithmetic over truncated power series with certified precision
//! ([`series`]), so every reported vanishing order is provably correct
//! for the declared input precision.
//!
//! ```
//! use cusp_char::engine::{self, Parametrization};
//! use cusp_char::parse::parse_series;
//!
//! let par = Parametrization::new(
//!     parse_series("t^4").unwrap(),
//!     parse_series("t^6 + t^7").unwrap(),
//! ).unwrap();
//! let run = engine::run(&par, None).unwrap();
//! assert_eq!(run.char_seq.to_string(), "(4;6,7)");
//! ```

pub mod engine;
pub mod parse;
pub mod puiseux;
pub mod rational;
pub mod report;
pub mod series;
