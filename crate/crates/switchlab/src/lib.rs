//! Decoding laboratory for hybrid weak/strong surface-code decoding.
//!
//! The crate builds rotated-surface-code matching graphs under a
//! phenomenological depolarizing noise model, decodes them with exact
//! minimum-weight perfect matching (complementary-gap soft output) or a
//! union-find decoder (cluster-gap soft output), escalates low-confidence
//! windows to a belief-matching strong decoder, and models the real-time
//! backlog dynamics of the naive, sliding-window, and double-window online
//! decoding schemes.

pub mod backlog;
pub mod code;
pub mod harness;
pub mod oracle;
pub mod strong;
pub mod switching;
pub mod weak;
pub mod matching;
pub mod paths;
pub mod rng;
