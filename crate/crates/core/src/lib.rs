//! Exact and empirical mixing rates of simple and non-backtracking random
//! walks on regular graphs.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`] builds and validates d-regular graphs and answers structural
//!   queries (girth, connectivity, bipartiteness, spaced vertex sets).
//! * [`spectra`] computes adjacency spectra and the `(n, d, λ)` parameters.
//! * [`nbkernel`] holds the closed forms: Chebyshev polynomials of the second
//!   kind, the `q_k` polynomials, `ψ`, the theoretical mixing rates and the
//!   exact non-backtracking walk counts `A^(k)`.
//! * [`evolve`] evolves distributions exactly and fits empirical mixing rates.
//! * [`montecarlo`] samples trajectories and measures visit loads.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); walk counts are
//! generic over [`CountScalar`] (`u64`, `u128` or [`BigUint`]). The aliases
//! below fix the common choices.

pub mod evolve;
pub mod graph;
pub mod montecarlo;
pub mod nbkernel;
pub mod numfmt;
mod scalar;
pub mod spectra;

pub use num_bigint::BigUint;

pub use evolve::{
    EdgeDistribution, MixingOptions, MixingReport, Sandwich, StartSet, VertexDistribution,
};
pub use graph::{DecoratedGraph, DirectedEdgeIndex, GraphError, RegularGraph, SpacedSet};
pub use montecarlo::{LoadReport, WalkTrace};
pub use nbkernel::{CountScalar, NbCountMatrix, RatePair};
pub use scalar::Scalar;
pub use spectra::Spectrum;

/// Which Markov chain a walk follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WalkKind {
    /// Uniform step to any of the `d` neighbours.
    Simple,
    /// Uniform step to any of the `d - 1` neighbours other than the previous vertex.
    Nb,
}

impl WalkKind {
    pub fn as_str(self) -> &'static str {
        match self {
            WalkKind::Simple => "simple",
            WalkKind::Nb => "nb",
        }
    }
}

impl std::fmt::Display for WalkKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for WalkKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "simple" => Ok(WalkKind::Simple),
            "nb" | "non-backtracking" => Ok(WalkKind::Nb),
            other => Err(format!("unknown walk kind `{other}` (expected simple|nb)")),
        }
    }
}

pub type Spectrum64 = Spectrum<f64>;
pub type Spectrum32 = Spectrum<f32>;
pub type RatePair64 = RatePair<f64>;
pub type RatePair32 = RatePair<f32>;
pub type VertexDistribution64 = VertexDistribution<f64>;
pub type EdgeDistribution64 = EdgeDistribution<f64>;
pub type MixingReport64 = MixingReport<f64>;
pub type Sandwich64 = Sandwich<f64>;

/// Walk counts in 128-bit integers; enough for `d (d-1)^(k-1)` up to about `2^127`.
pub type NbCounts = NbCountMatrix<u128>;
/// Walk counts with no width limit.
pub type NbCountsBig = NbCountMatrix<BigUint>;
