//! Ultimate-time ruin probabilities for discrete-time seasonal, compound
//! Poisson and renewal risk models, with the coupling machinery that shows
//! a neutral model is ruined almost surely.
//!
//! PMF-level algorithms are generic over [`Scalar`] (`f32`, `f64`, exact
//! rationals); continuous models work in `f64`.

pub mod andersen;
pub mod classical;
pub mod compound;
pub mod discrete;
pub mod dist;
pub mod error;
pub mod mc;
pub mod model;
pub mod scalar;
pub mod table;

use num_bigint::BigInt;
use num_rational::Ratio;

pub use error::{Result, RuinError};
pub use model::{AndersenModel, ClassicalModel, Convention, NetProfit, SeasonalModel};
pub use scalar::{Real, Scalar};
pub use table::{Bracket, SurvivalTable};

/// Exact rational scalar.
pub type Exact = Ratio<BigInt>;

pub type Pmf = dist::IntegerPmf<f64>;
pub type PmfF32 = dist::IntegerPmf<f32>;
pub type ExactPmf = dist::IntegerPmf<Exact>;

pub type Seasonal = SeasonalModel<f64>;
pub type SeasonalF32 = SeasonalModel<f32>;
pub type ExactSeasonal = SeasonalModel<Exact>;

pub type Table = SurvivalTable<f64>;
pub type ExactTable = SurvivalTable<Exact>;

pub type Coupling = dist::CouplingPmf<f64>;
pub type ExactCoupling = dist::CouplingPmf<Exact>;
