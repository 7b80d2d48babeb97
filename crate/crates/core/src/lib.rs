//! Decoding toolkit for generative shift-reduce constituency parsers.

pub mod eval;
pub mod history;
pub mod pruning;
pub mod scoring;
pub mod search;
pub mod synthetic;
mod textfmt;
pub mod treebank;

pub use textfmt::FormatError;
