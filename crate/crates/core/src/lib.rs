//! Energy-aware placement of vehicular compute tasks across cloud, fog and
//! vehicular servers.

pub mod milp;
pub mod model;
pub mod report;
pub mod runner;
pub mod solver;
