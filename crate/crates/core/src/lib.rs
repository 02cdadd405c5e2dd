//! Ruin theory for an insurance portfolio with a finite pool of major
//! clients, each filing a single claim, on top of small clients modelled by
//! spectrally-positive Lévy processes.
//!
//! The central object is the Laplace–Stieltjes transform of the running
//! maximum of the net cumulative claim process over an exponential horizon,
//! computed by a ladder recursion ([`ladder`]). Around it sit exact
//! phase-type representations ([`phase_type`]), heavy-tail asymptotics
//! ([`heavy_tail`]), overshoot transforms ([`overshoot`]), numerical inversion
//! ([`inversion`]) and a Monte Carlo simulator ([`simulate`]).

pub mod claims;
pub mod config;
pub mod error;
pub mod heavy_tail;
pub mod inversion;
pub mod ladder;
pub mod model;
pub mod overshoot;
pub mod phase_type;
pub mod quad;
pub mod series;
pub mod simulate;

pub use claims::{ClaimDistribution, RVMeta};
pub use error::{Result, RuinError};
pub use model::{KilledRates, LevyRegime, ModelSpec};
pub use phase_type::{PhaseType, SpectralTail};
pub use series::{Series, TransformJet};
