//! Penalty dual decomposition (PDD) for nonconvex problems with coupling
//! equality constraints, together with three applications built on it:
//! max-min fair multicast beamforming, multi-user AF relay design and
//! volume-minimisation (VolMin) simplex recovery.
//!
//! The [`pdd`] module holds the generic driver; each application implements
//! [`pdd::BlockProblem`] and wraps the driver in a `solve` function.

pub mod error;
pub mod io;
pub mod multicast;
pub mod numerics;
pub mod pdd;
pub mod relay;
pub mod verify;
pub mod volmin;

pub use error::{Error, Result};
pub use pdd::{pdd_run, BlockProblem, Branch, Mode, OuterRecord, PddConfig, PddOutcome, PddTrace, CSV_HEADER};
