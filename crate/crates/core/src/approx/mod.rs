//! Constructive function approximators: normalized ridge sums for
//! bounded-variation targets and lattice/bump/Taylor-polynomial networks for
//! smoothness classes, together with the exact mathematical oracles used to
//! verify them.

pub mod barron;
pub mod holder;
pub mod lattice;
pub mod nets;
pub mod taylor;
pub mod testfns;

pub use barron::{barron_fnn, fit_barron_ridges, Ridge, RidgeSpec};
pub use holder::{holder_cnn, holder_error_budget, holder_fnn, holder_params, HolderBuildParams};
pub use lattice::{hat_exact, lattice};
pub use nets::{
    chain_blocks, hat_network, identity_chain, identity_layer, mult_network, pad_to_depth,
    parallel_disjoint, parallel_shared, product_tree, q_network,
};
pub use taylor::{
    binomial, multi_factorial, multi_indices_below, multi_indices_up_to, strict_degree_cap,
    taylor_exact,
};
pub use testfns::{by_name, SmoothFn, TaylorOracle, FN_NAMES};
