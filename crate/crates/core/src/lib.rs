//! Tabular Q-learning navigation of a UAV toward a stationary RF source.
//!
//! The source is observed only through received signal strength, which
//! follows a log-distance path loss with velocity-dependent Rayleigh fading.
//! Modules, bottom-up:
//!
//! - [`channel`]: path loss and the correlated fading process.
//! - [`world`]: occupancy map, poses, actions and segment collision checks.
//! - [`agent`]: state quantizer, epsilon-greedy policy and the Q update.
//! - [`sim`]: the episode loop with epoch averaging and obstacle retries.
//! - [`experiment`]: seeded sweeps, summary statistics, CSV and SVG output.
//! - [`cli`]: the `uavnav` command line.

pub mod agent;
pub mod channel;
pub mod cli;
pub mod error;
pub mod experiment;
pub mod sim;
pub mod world;

pub use error::DomainError;
