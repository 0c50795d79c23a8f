//! Runs every code block of the guide in `book/` as a doc-test, one module per chapter.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/levy_models.md")]
pub mod levy_models {}
#[doc = include_str!("../../../book/src/laplace_exponent.md")]
pub mod laplace_exponent {}
#[doc = include_str!("../../../book/src/existence.md")]
pub mod existence {}
#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}
#[doc = include_str!("../../../book/src/fixed_point.md")]
pub mod fixed_point {}
#[doc = include_str!("../../../book/src/blow_up.md")]
pub mod blow_up {}
#[doc = include_str!("../../../book/src/martingale.md")]
pub mod martingale {}
#[doc = include_str!("../../../book/src/integrable_solutions.md")]
pub mod integrable_solutions {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
