//! Input priors, exact tiny-scale marginals, information density, Lipschitz
//! semi-norm measurement, mutual-information estimation, and concentration
//! diagnostics.

mod concentration;
mod density;
mod marginal;
mod prior;

pub use concentration::{
    concentration_experiment, convexity_probe, gradient_bound_check, ConcentrationReport,
    ConvexityReport, GradientBoundReport, QuantilePoint,
};
pub use density::{info_density, lipschitz_seminorm_bruteforce, mc_mutual_information, McEstimate};
pub use marginal::{
    enumerate_marginal, exact_mutual_information, EnumeratedMarginal, ExactMi, JointMode,
    JointSupport, JOINT_STATE_CAP,
};
pub use prior::InputPrior;
