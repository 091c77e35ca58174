//! The guide under `book/` compiled as doc comments, one module per chapter,
//! so `cargo test` runs every snippet.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/models.md")]
pub mod models {}
#[doc = include_str!("../../../book/src/hamiltonian.md")]
pub mod hamiltonian {}
#[doc = include_str!("../../../book/src/lagrangian.md")]
pub mod lagrangian {}
#[doc = include_str!("../../../book/src/stationary.md")]
pub mod stationary {}
#[doc = include_str!("../../../book/src/evolution.md")]
pub mod evolution {}
#[doc = include_str!("../../../book/src/diagnostics.md")]
pub mod diagnostics {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
