//! Simulation, exact enumeration and closed-form tail bounds for the regret
//! of elimination, UCB-type and linear bandit policies.

pub mod bounds;
pub mod env;
pub mod error;
pub mod linear;
pub mod policy;
pub mod seed;
pub mod sim;
pub mod source;
pub mod stats;

pub use bounds::{BoundEnv, BoundParams, Knowledge, Scenario};
pub use env::{
    BanditInstance, BaselineKind, BaselinePath, BaselineSchedule, LinearInstance, NoiseKind, NoiseModel, Rotation,
};
pub use error::{Error, Result};
pub use linear::{LinearBonusSpec, LinearEpisode, Timing};
pub use policy::{BonusSpec, PolicySpec};
pub use sim::{EpisodeResult, RegretDistribution};
pub use stats::{ExponentFit, FitMode, Summary, TailCurve};
