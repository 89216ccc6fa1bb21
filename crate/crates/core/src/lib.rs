//! Exact Euclidean minimum spanning trees over city-structured random point
//! sets, together with the constructive spanning-tree bounds and per-trial
//! Monte Carlo kernels used to study them.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, configuration,
//! parallel replication and the command line live in the `citymst` crate.
//!
//! Module map:
//!
//! - [`geom`]: points, axis squares, the regular city tiling and
//!   well-connectedness of a city selection.
//! - [`rng`]: a counter-based Philox generator with per-replication streams.
//! - [`sampling`]: bounded densities and binomial / Poisson city samplers.
//! - [`mst`]: exact MST (dense Prim and kd-tree Borůvka), a Prüfer brute-force
//!   oracle and tree queries.
//! - [`bounds`]: strips path, tree combination, grid join and the city
//!   upper / lower bounds.
//! - [`stats`]: streaming moment accumulators and event counters.
//! - [`occupancy`]: the fine-grid occupancy detector and the Poisson pmf at
//!   its mean.
//! - [`trials`]: one-replication kernels shared by every experiment runner.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bounds;
pub mod geom;
pub(crate) mod math;
pub mod mst;
pub mod occupancy;
pub mod rng;
pub mod sampling;
pub mod stats;
pub mod trials;

pub use geom::{b_scale, build_tiling, validate_well_connected, AxisSquare, CityLayout, GeomError, Point2};
pub use mst::{brute_force_mst, exact_mst, nn_distance, Edge, MstError, WeightedTree};
pub use bounds::{city_lower_bound, city_mst_lengths, city_upper_tree, combine_trees, grid_join, strips_path, BoundError, GridJoin, StripsPlan, UpperBoundReport};
pub use occupancy::{detect_ztot, poisson_pmf_at_mean, FineGrid, ZtotReport};
pub use rng::{Philox4x32, StreamSeed};
pub use stats::{EventStats, MomentAccumulator, MomentEstimate};
pub use sampling::{
    city_counts, occupancy_event_u, sample_binomial_cities, sample_poisson_cities, DensitySpec,
    Process, SampleBatch, SamplingError,
};
