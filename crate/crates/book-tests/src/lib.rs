//! Compiles every code snippet in the guide (`book/src/`) as a doc-test,
//! one module per chapter, so `cargo test --doc` keeps the book in sync
//! with the library. A failing snippet names its chapter via the module
//! path.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/exact-series.md")]
pub mod exact_series {}

#[doc = include_str!("../../../book/src/recursion.md")]
pub mod recursion {}

#[doc = include_str!("../../../book/src/characteristic.md")]
pub mod characteristic {}

#[doc = include_str!("../../../book/src/newton-puiseux.md")]
pub mod newton_puiseux {}

#[doc = include_str!("../../../book/src/precision.md")]
pub mod precision {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
