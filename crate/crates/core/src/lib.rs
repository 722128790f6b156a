//! Exact Ext-vanishing and fullness certificates for collections of line
//! bundles on Fano toric stacks of Picard rank 1 and 2.

pub mod error;
pub mod ext;
pub mod lattice;
pub mod model;
pub mod moves;
pub mod search;
pub mod standard;

pub use error::{Claim, Error, Result};
pub use ext::{
    ext_nonzero, ext_profile, first_violation, frobenius_number, is_strong_exceptional,
    lift_exists, order_by_hom, rank1_semigroup_member, ExtGroup, ExtProfile, Sign, SignPattern,
    Violation,
};
pub use model::{
    build_model, class_of, eval_functionals, k0_rank, PicClass, StackyFanInput, ToricStackModel,
};
pub use moves::{
    apply_move, certify_full, choose_move, f_reduce, fit_parallelogram, replay_certificate,
    replay_steps, shrink_rank1, strip_reduce, Direction, MoveStep, ShrinkCertificate,
    StandardWitness,
};
pub use search::{enumerate_collections, normalize_twist, SearchOutcome, SearchWindow};
pub use standard::{classes_in_box, standard_box, standard_collection, PicBox};
