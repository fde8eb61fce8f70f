//! Board and weight games from algorithmic information theory.
//!
//! * [`board`]: one board `G_n` with its rules and verdict.
//! * [`strategy`]: White's scanning strategy, Black adversaries, match runner.
//! * [`search`]: exhaustive Black search used as an oracle for small `n`.
//! * [`arena`]: every board in a range at once under shared Black budgets.
//! * [`weights`]: the Alice/Bob weight game.
//! * [`lab`]: a toy machine with dovetailed upper bounds on plain and
//!   prefix-free complexity.
//! * [`trace`]: text traces and their independent verifier.

pub mod arena;
pub mod bits;
pub mod board;
pub mod dyadic;
pub mod lab;
pub mod search;
pub mod strategy;
pub mod trace;
pub mod weights;

#[cfg(feature = "cli")]
pub mod cli;
