//! Reaction network models: rate laws, the fast state space, structural
//! checks and the finite control family.

mod checks;
mod control;
mod fast_states;
mod network;
mod rate;

pub use checks::{
    check_conservation, check_irreducibility, check_product_form, fast_transitions, partition_by_class,
    ConservationReport, ConservationViolation, IrreducibilityReport, ProductFormEntry, ProductFormReport,
};
pub use control::{parse_control, Control, ControlDocument, ControlEntry, ControlHamiltonian};
pub use fast_states::{binomial, FastStateSpace, DEFAULT_STATE_CAP};
pub use network::{
    builtin_michaelis_menten, parse_model, parse_model_structural, ModelDocument, MultiScaleNetwork, Reaction,
    ReactionClass, ReactionDocument,
};
pub use rate::{Monomial, Polynomial, RateFunction};
