//! Batch data-quality toolkit for researcher records held in research
//! information systems.
//!
//! The phases run in order: [`parsing`] isolates the elements of each raw
//! field, [`standardize`] maps them to canonical form, [`enrich`] fills address
//! gaps from a gazetteer, [`matching`] scores and clusters duplicates,
//! [`consolidate`] merges each cluster into a golden record, and [`profile`]
//! measures completeness, validity, uniformity, redundancy and consistency
//! before and after. [`pipeline`] wires the phases together for the CLI.

pub mod consolidate;
pub mod enrich;
pub mod error;
pub mod io;
pub mod matching;
pub mod parsing;
pub mod pipeline;
pub mod profile;
pub mod record;
pub mod standardize;

pub use error::{Error, Result};
