use std::fmt;

use thiserror::Error;

use crate::ext::Violation;
use crate::model::PicClass;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A structural fact the shrink algorithms rely on. Each one is re-checked
/// at runtime; a failure is reported as a contradiction naming the fact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Claim {
    /// The first element shifted by the total weight is not already present.
    ShiftedFirstAbsent,
    /// Every Koszul term other than the new bundle is already in the collection.
    KoszulMembership,
    /// The collection stays strong exceptional after a move.
    StrongAfterMove,
    /// `D - E+` and `D + E-` are never members of a strong exceptional set.
    ShiftedClassAbsent,
    /// At least one of the two moves of an alpha-maximal element is open.
    SomeSideOpen,
    /// The side forced by the f-window is open.
    ForcedSideOpen,
    /// Hom in both directions only between equal classes.
    HomAntisymmetry,
    /// The signed relation among the rays is unique up to scale.
    UniqueSignedRelation,
}

impl Claim {
    pub fn name(self) -> &'static str {
        match self {
            Claim::ShiftedFirstAbsent => "shifted-first-absent",
            Claim::KoszulMembership => "koszul-membership",
            Claim::StrongAfterMove => "strong-after-move",
            Claim::ShiftedClassAbsent => "shifted-class-absent",
            Claim::SomeSideOpen => "some-side-open",
            Claim::ForcedSideOpen => "forced-side-open",
            Claim::HomAntisymmetry => "hom-antisymmetry",
            Claim::UniqueSignedRelation => "unique-signed-relation",
        }
    }
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Error {
    #[error("polyhedron is unbounded along coordinate {coordinate}")]
    UnboundedPolyhedron { coordinate: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("fan is not Fano: {0}")]
    FanoViolation(String),

    #[error("Picard group has torsion (elementary divisors {divisors:?})")]
    UnsupportedTorsion { divisors: Vec<String> },

    #[error("Picard rank {rank} is not supported, only 1 and 2 are")]
    UnsupportedPicardRank { rank: i64 },

    #[error("signed relation {alpha:?} has a zero coefficient")]
    DegenerateAlpha { alpha: Vec<i64> },

    #[error("class {0} appears more than once")]
    DuplicateClass(PicClass),

    #[error("collection has {found} elements, maximal length is {expected}")]
    NotMaximalLength { expected: usize, found: usize },

    #[error("collection is not strong exceptional: {0}")]
    NotStrongExceptional(Violation),

    #[error("Koszul member {missing} needed to move {moved} is missing")]
    KoszulMemberMissing { moved: PicClass, missing: PicClass },

    #[error("class {added} added by a move was already present")]
    AddedClassAlreadyPresent { added: PicClass },

    #[error("collection is not strong exceptional after moving {moved}: {violation}")]
    PostMoveNotStrong { moved: PicClass, violation: Violation },

    #[error("neither move is open for {moved}")]
    NoMoveAvailable {
        moved: PicClass,
        /// `(D_k, D - E_J)` with nonzero top Ext, blocking `D -> D - E+`.
        minus_blocker: Option<(PicClass, PicClass)>,
        /// `(D + E_L, D_j)` with nonzero top Ext, blocking `D -> D + E-`.
        plus_blocker: Option<(PicClass, PicClass)>,
    },

    #[error("move of {moved} violated f-postcondition ({condition})")]
    MoveContractViolated { condition: u8, moved: PicClass },

    #[error("alpha-width {width} exceeds the strip bound {bound}")]
    StripDisciplineViolated { width: i64, bound: i64 },

    #[error("{phase} exceeded its iteration cap of {cap}")]
    NonTermination { phase: &'static str, cap: usize },

    #[error("final collection is not standard: {0}")]
    FinalNotStandard(String),

    #[error("box does not match the collection (extra {extra:?}, missing {missing:?})")]
    BoxMismatch {
        extra: Vec<PicClass>,
        missing: Vec<PicClass>,
    },

    #[error("no generic box position found")]
    GenericityFailure,

    #[error("candidate pool has {size} classes, the cap is {cap}")]
    PoolTooLarge { size: usize, cap: usize },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("contradiction with {claim}: {detail}")]
    ProofContradiction { claim: Claim, detail: String },

    #[error("certificate replay failed: {0}")]
    ReplayMismatch(String),
}

impl Error {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::UnboundedPolyhedron { .. } => "UnboundedPolyhedron",
            Error::InvalidInput(_) => "InvalidInput",
            Error::FanoViolation(_) => "FanoViolation",
            Error::UnsupportedTorsion { .. } => "UnsupportedTorsion",
            Error::UnsupportedPicardRank { .. } => "UnsupportedPicardRank",
            Error::DegenerateAlpha { .. } => "DegenerateAlpha",
            Error::DuplicateClass(_) => "DuplicateClass",
            Error::NotMaximalLength { .. } => "NotMaximalLength",
            Error::NotStrongExceptional(_) => "NotStrongExceptional",
            Error::KoszulMemberMissing { .. } => "KoszulMemberMissing",
            Error::AddedClassAlreadyPresent { .. } => "AddedClassAlreadyPresent",
            Error::PostMoveNotStrong { .. } => "PostMoveNotStrong",
            Error::NoMoveAvailable { .. } => "NoMoveAvailable",
            Error::MoveContractViolated { .. } => "MoveContractViolated",
            Error::StripDisciplineViolated { .. } => "StripDisciplineViolated",
            Error::NonTermination { .. } => "NonTermination",
            Error::FinalNotStandard(_) => "FinalNotStandard",
            Error::BoxMismatch { .. } => "BoxMismatch",
            Error::GenericityFailure => "GenericityFailure",
            Error::PoolTooLarge { .. } => "PoolTooLarge",
            Error::PreconditionViolated(_) => "PreconditionViolated",
            Error::ProofContradiction { .. } => "ProofContradiction",
            Error::ReplayMismatch(_) => "ReplayMismatch",
        }
    }

    /// Classes that witness the failure, for diagnostics.
    pub fn witnesses(&self) -> Vec<PicClass> {
        match self {
            Error::DuplicateClass(c) => vec![c.clone()],
            Error::NotStrongExceptional(v) | Error::PostMoveNotStrong { violation: v, .. } => {
                vec![v.from.clone(), v.to.clone()]
            }
            Error::KoszulMemberMissing { moved, missing } => vec![moved.clone(), missing.clone()],
            Error::AddedClassAlreadyPresent { added } => vec![added.clone()],
            Error::NoMoveAvailable {
                moved,
                minus_blocker,
                plus_blocker,
            } => {
                let mut w = vec![moved.clone()];
                for (a, b) in minus_blocker.iter().chain(plus_blocker) {
                    w.push(a.clone());
                    w.push(b.clone());
                }
                w
            }
            Error::MoveContractViolated { moved, .. } => vec![moved.clone()],
            Error::BoxMismatch { extra, missing } => extra.iter().chain(missing).cloned().collect(),
            _ => Vec::new(),
        }
    }

    pub(crate) fn contradiction(claim: Claim, detail: impl Into<String>) -> Self {
        Error::ProofContradiction {
            claim,
            detail: detail.into(),
        }
    }
}
