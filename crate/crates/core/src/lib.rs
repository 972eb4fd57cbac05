//! Source-event-centric (SEC) temporal relation classification.
//!
//! TLINKs that share a source event are grouped into chains (DCT link first,
//! then targets in document order). A two-layer GRU walks each chain and
//! updates the source event representation, which is anchored against its
//! original embedding by an element-wise max. Category-specific linear heads
//! (E2D, E2T, E2E and optionally MAT) are trained jointly on the summed loss.
//!
//! This crate is `no_std` and only needs `alloc`. File formats, checkpoints
//! and the command-line driver live in the companion `sect` crate.
//!
//! Module map:
//! - [`corpus`]: documents, validation, statistics, splits, synthetic corpora
//! - [`chains`]: SECT chain construction
//! - [`encoder`]: toy token encoder, mention pooling, DCT embedding
//! - [`gru`], [`model`]: recurrence, heads and losses with explicit backprop
//! - [`optim`]: AdamW
//! - [`train`]: SEC / Local / Multi training with freeze strategies
//! - [`eval`]: micro-F1, majority vote, run averaging, ablation tables

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

pub mod chains;
pub mod corpus;
pub mod encoder;
mod error;
pub mod eval;
pub mod gru;
pub mod label;
pub mod math;
pub mod model;
pub mod optim;
pub mod tensor;
pub mod train;

pub use error::{Error, Result};
pub use label::{Category, LabelSet};
