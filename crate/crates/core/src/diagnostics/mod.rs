//! Numerical evidence for the structural assumptions on `H` and the
//! doubling-of-variables comparison argument.
//!
//! These are surrogates: a finite grid or a finite sample can refute an
//! assumption but never prove it.

mod containment;
mod convexity;
mod doubling;
mod lsc;

pub use containment::{check_containment, ContainmentKind, ContainmentReport, ContainmentSpec};
pub use convexity::{check_convexity_and_zero, ConvexityConfig, ConvexityReport};
pub use doubling::{doubling_certificate, DoublingConfig, DoublingReport, DoublingRow, EpsSummary, PAIR_CAP};
pub use lsc::{lsc_spot_check, CostPoint, LscReport};
