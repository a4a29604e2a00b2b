//! Pattern occurrences in random 321-avoiding permutations and the
//! Brownian excursion functionals that describe their scaling limits.

pub mod count;
pub mod dyck;
pub mod enumerate;
pub mod error;
pub mod exact;
pub mod excursion;
pub mod moments;
pub mod perm;
pub mod polytope;
pub mod rng;
pub mod verify;

pub use count::{
    count_occurrences, count_occurrences_block_fast, count_occurrences_decomposable,
    is_avoiding, occurrence_bound,
};
pub use dyck::{catalan, DyckPath, RunDecomposition};
pub use error::{Error, Result};
pub use exact::ExactValue;
pub use moments::{mean_w, second_moment, variance_w, variance_w_block, MeanMethod};
pub use perm::{BlockDecomposition, BlockProfile, DisplacementProfile, Permutation};
pub use polytope::{block_volume, exact_volume, w_const, ConstraintSystem, PolytopeVolume};
