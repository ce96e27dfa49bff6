pub mod linalg;
pub mod lp;
pub mod net;
pub mod prob;

pub use lp::{solve_lp, Constraint, LpProblem, LpSolution, LpStatus, Relation, Sense};
pub use net::{simplex_grid, simplex_net, SimplexNet};
pub use prob::{
    empirical_distribution, push_forward, variational_distance, CategoricalSampler,
    Distribution, EmpiricalCounts, StochasticMatrix,
};
