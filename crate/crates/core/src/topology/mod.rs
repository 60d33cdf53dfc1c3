//! Directed communication graphs and the push-pull weight pair.
//!
//! A graph edge `j → i` means agent `i` receives from agent `j`. Every node
//! carries an implicit self-loop. Two graphs are involved in a push-pull
//! network: `G_A`, along which decision variables are pulled with the
//! row-stochastic matrix `A`, and `G_{Bᵀ}`, the graph induced by `Bᵀ` for the
//! column-stochastic matrix `B` that pushes gradient trackers.

mod graph;
mod io;
mod spectral;
mod weights;

pub use graph::{
    assumption2_violation, check_assumption2, generate_ring_plus_random, DirectedGraph,
};
pub use io::{parse_edge_list, write_edge_list};
pub use spectral::{
    column_centering, contraction_factor, row_centering, spectral_radius, MAX_SQUARINGS,
};
pub use weights::{
    build_weight_pair, perron_left, perron_right, underlying_metropolis, WeightPair,
    PERRON_MAX_ITERS,
};
