//! Seedable, chunk-invariant Monte Carlo for surplus processes.

pub mod engine;
pub mod estimate;
pub mod rng;

pub use engine::{
    map_chunks, simulate_coupled, simulate_coupled_unchecked, simulate_ruin, simulate_ruin_horizons,
    CoupledOutcome, CoupledPaths, DiscreteCoupling, DiscreteSampler, DominanceReport, McConfig, RuinPaths,
};
pub use estimate::{EstimateRecord, McEstimate};
pub use rng::{rng_substream, StreamRng};
