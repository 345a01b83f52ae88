//! Keeps the book honest: every chapter is included as module
//! documentation, so `cargo test` runs each of its code blocks as a
//! doc-test against the current library. A chapter module per file makes
//! test failures point at the offending chapter.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/taxonomies.md")]
pub mod taxonomies {}

#[doc = include_str!("../../../book/src/situations.md")]
pub mod situations {}

#[doc = include_str!("../../../book/src/user-model.md")]
pub mod user_model {}

#[doc = include_str!("../../../book/src/policies.md")]
pub mod policies {}

#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
