//! The guide under `book/` compiled as documentation, so that
//! `cargo test` runs every Rust snippet in it.

#![doc = include_str!("../../../book/src/introduction.md")]

#[doc = include_str!("../../../book/src/variants.md")]
pub mod variants {}

#[doc = include_str!("../../../book/src/oracle.md")]
pub mod oracle {}

#[doc = include_str!("../../../book/src/rounding.md")]
pub mod rounding {}

#[doc = include_str!("../../../book/src/trees.md")]
pub mod trees {}

#[doc = include_str!("../../../book/src/enumeration.md")]
pub mod enumeration {}

#[doc = include_str!("../../../book/src/reductions.md")]
pub mod reductions {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
