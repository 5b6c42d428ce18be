//! Exact star-operation calculus on finite-dimensional semilocal Bézout
//! domains, presented by the forest of their nonzero prime ideals.

pub mod ordgroups;
pub mod forest;
pub mod ideal;
pub mod star;
pub mod class_groups;
pub mod oracle;
pub mod cli;
