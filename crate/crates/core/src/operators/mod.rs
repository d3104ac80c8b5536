//! Maximal monotone operators (via resolvents), cocoercive operators (via
//! forward maps) and sampling checks of their defining inequalities.

mod checks;
mod cocoercive;
mod monotone;

pub use checks::{certify_cocoercive, certify_fne, polarization_gap, PropertyReport, PROPERTY_TOL};
pub use cocoercive::{forward_eval, Beta, CocoerciveKind, CocoerciveOp};
pub use monotone::{graph_member, resolvent_eval, soft_threshold, MaxMonotoneOp, MonotoneKind, Resolvent};
