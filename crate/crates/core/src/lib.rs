//! Sequential mixed-integer linearization: a trust-region method for smooth
//! objectives over mixed-integer polyhedra, with the LP, MILP and enumeration
//! engines it runs on.

pub mod bench;
pub mod expr;
pub mod lp;
pub mod milp;
pub mod model;
pub mod oracle;
pub mod problem;
pub mod refine;
pub mod report;
pub mod smil;
