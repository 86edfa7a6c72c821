//! Simulation engine for an entanglement-based anonymous voting protocol.
//!
//! The crate is organized around the protocol's layers:
//!
//! * [`qsim`] — a minimal dense pure-state engine: d-dimensional qudits,
//!   projective measurement, the entangled resources and channels the
//!   protocol consumes.
//! * [`ballot`] — the hidden-matching ballot: phase-encoding a random bit
//!   string, matching-basis measurement, vote tags and their decoding.
//! * [`anonnet`] — entanglement-based anonymous primitives over a ring of
//!   parties: key generation, secure modular sum, anonymous bit broadcast,
//!   anonymous queuing, anonymous state transfer, purification planning.
//! * [`election`] — the full voting rounds, the multi-round decision
//!   procedure with complaints and margin test, transcripts and audit.
//! * [`adversary`] — threat models: vote forgery, ring eavesdropping,
//!   ballot tampering, and the anonymity distinguishing game.
//!
//! Every stochastic operation takes an explicit RNG so whole experiments are
//! reproducible from a single seed. States are immutable values; trials can
//! run concurrently as long as each owns its RNG.

pub mod adversary;
pub mod anonnet;
pub mod ballot;
pub mod election;
mod error;
pub mod qsim;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
