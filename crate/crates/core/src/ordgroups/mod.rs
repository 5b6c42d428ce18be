//! Rank-one ordered groups, their lexicographic products, and cuts in them.

mod cut;
mod group;
mod scalar;
mod vector;

pub use cut::{cut_lattice, probe_set, Cut, LatticeOp};
pub use group::{GroupElement, GroupKind, RankOneGroup};
pub use scalar::{parse_rational, parse_scalar, Scalar};
pub use vector::{compare, ValueGroup, ValueVector};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroupError {
    #[error("bad group literal `{0}`")]
    BadLiteral(String),
    #[error("{value} is not an element of {group}")]
    NotMember { value: String, group: String },
    #[error("dimension mismatch: {left} vs {right}")]
    Dimension { left: usize, right: usize },
}
