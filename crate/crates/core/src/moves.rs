//! Replacement moves on maximal strong exceptional collections and the
//! shrink procedures that drive any such collection to a standard one.
//!
//! Collections are handled as sorted vectors of distinct classes. Every
//! structural fact a move relies on (Koszul terms present, new class absent,
//! strongness preserved, the f-window contract) is re-checked when the move
//! is made and again on replay.

use std::collections::BTreeSet;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Claim, Error, Result};
use crate::ext::{ext_nonzero, first_violation, is_strong_exceptional, ExtGroup};
use crate::model::{PicClass, ToricStackModel};
use crate::standard::{classes_in_box, is_generic, perturbation, PicBox, GENERIC_ATTEMPTS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `D -> D - E+`
    MinusEPlus,
    /// `D -> D + E-`
    PlusEMinus,
    /// `D -> D + sum E_i` (rank 1)
    PlusTotal,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::MinusEPlus => "minus_e_plus",
            Direction::PlusEMinus => "plus_e_minus",
            Direction::PlusTotal => "plus_total",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [Direction::MinusEPlus, Direction::PlusEMinus, Direction::PlusTotal]
            .into_iter()
            .find(|d| d.name() == s)
    }
}

/// How the direction of a rank-2 move was decided.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveRule {
    /// The f-window leaves only one side that keeps the f-range.
    Forced,
    /// Both sides open and neither forced.
    Free,
    /// The preferred side is blocked by a nonzero top Ext.
    OnlyAvailable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Rank1,
    Strip,
    FReduce,
}

/// Side availability and the f-window test behind a rank-2 choice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MoveEvidence {
    pub minus_open: bool,
    pub plus_open: bool,
    pub forced_minus: bool,
    pub forced_plus: bool,
    pub rule: MoveRule,
    /// `(min f, max f)` before the move.
    pub f_range: (Rational64, Rational64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MoveStep {
    pub removed: PicClass,
    pub added: PicClass,
    pub direction: Direction,
    pub koszul_required: Vec<PicClass>,
    pub koszul_all_present: bool,
    pub added_absent: bool,
    pub post_strong_ok: bool,
    pub phase: Phase,
    pub evidence: Option<MoveEvidence>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParallelogramFit {
    pub center: (Rational64, Rational64),
    pub attempt: u32,
    pub bounds: PicBox,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StandardWitness {
    /// Consecutive degrees `low..=high`.
    Interval { low: i64, high: i64 },
    Parallelogram(ParallelogramFit),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Full,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShrinkCertificate {
    pub input: Vec<PicClass>,
    pub steps: Vec<MoveStep>,
    pub final_collection: Vec<PicClass>,
    pub witness: StandardWitness,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MoveChoice {
    pub direction: Direction,
    pub evidence: MoveEvidence,
}

fn sorted_distinct(set: &[PicClass]) -> Result<Vec<PicClass>> {
    let mut seen = BTreeSet::new();
    for c in set {
        if !seen.insert(c.clone()) {
            return Err(Error::DuplicateClass(c.clone()));
        }
    }
    Ok(seen.into_iter().collect())
}

fn check_maximal_strong(model: &ToricStackModel, set: &[PicClass]) -> Result<Vec<PicClass>> {
    let t = sorted_distinct(set)?;
    if t.len() != model.k0_rank() {
        return Err(Error::NotMaximalLength {
            expected: model.k0_rank(),
            found: t.len(),
        });
    }
    is_strong_exceptional(model, &t)?;
    Ok(t)
}

fn alpha_range(model: &ToricStackModel, t: &[PicClass]) -> (i64, i64) {
    range(t.iter().map(|d| model.alpha_value(d)))
}

/// `(min, max)` of `f * f_den`.
fn f_range(model: &ToricStackModel, t: &[PicClass]) -> (i64, i64) {
    range(t.iter().map(|d| model.f_scaled(d)))
}

fn range(values: impl Iterator<Item = i64>) -> (i64, i64) {
    values.fold((i64::MAX, i64::MIN), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Distinct values of `E_J` for `J` ranging over the subsets of `idx`.
fn subset_sums(model: &ToricStackModel, idx: &[usize]) -> BTreeSet<PicClass> {
    let mut sums = BTreeSet::from([model.zero_class()]);
    for &i in idx {
        let shifted: Vec<PicClass> = sums.iter().map(|s| s + &model.e_class()[i]).collect();
        sums.extend(shifted);
    }
    sums
}

fn move_indices(model: &ToricStackModel, dir: Direction) -> Vec<usize> {
    match dir {
        Direction::MinusEPlus => model.i_plus().to_vec(),
        Direction::PlusEMinus => model.i_minus().to_vec(),
        Direction::PlusTotal => (0..model.num_rays()).collect(),
    }
}

fn check_direction(model: &ToricStackModel, dir: Direction) -> Result<()> {
    let ok = match dir {
        Direction::PlusTotal => model.picard_rank() == 1,
        _ => model.picard_rank() == 2,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::PreconditionViolated(format!(
            "direction {} does not apply to Picard rank {}",
            dir.name(),
            model.picard_rank()
        )))
    }
}

/// The class that replaces `d`.
pub fn move_target(model: &ToricStackModel, d: &PicClass, dir: Direction) -> PicClass {
    let shift = model.e_sum(&move_indices(model, dir));
    match dir {
        Direction::MinusEPlus => d - &shift,
        Direction::PlusEMinus | Direction::PlusTotal => d + &shift,
    }
}

/// Koszul terms other than the new class: `D - E_J` for proper `J` of `I+`,
/// `D + E_L` for proper `L` of `I-`, or `D + E_J` for proper `J` of all
/// rays. Sorted and deduplicated.
pub fn koszul_terms(model: &ToricStackModel, d: &PicClass, dir: Direction) -> Vec<PicClass> {
    let idx = move_indices(model, dir);
    let full = model.e_sum(&idx);
    subset_sums(model, &idx)
        .into_iter()
        .filter(|s| *s != full)
        .map(|s| match dir {
            Direction::MinusEPlus => d - &s,
            _ => d + &s,
        })
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// `None` if the side is open, else a pair with nonzero top Ext blocking it.
fn side_blocker(
    model: &ToricStackModel,
    t: &[PicClass],
    d: &PicClass,
    dir: Direction,
) -> Result<Option<(PicClass, PicClass)>> {
    for s in subset_sums(model, &move_indices(model, dir)) {
        match dir {
            Direction::MinusEPlus => {
                let shifted = d - &s;
                for dk in t {
                    if ext_nonzero(model, dk, &shifted, ExtGroup::ExtTop)? {
                        return Ok(Some((dk.clone(), shifted)));
                    }
                }
            }
            _ => {
                let shifted = d + &s;
                for dj in t {
                    if ext_nonzero(model, &shifted, dj, ExtGroup::ExtTop)? {
                        return Ok(Some((shifted, dj.clone())));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// Decides how to move the alpha-maximal element `t[i0]`.
pub fn choose_move(model: &ToricStackModel, t: &[PicClass], i0: usize) -> Result<MoveChoice> {
    check_direction(model, Direction::MinusEPlus)?;
    let d = t
        .get(i0)
        .ok_or_else(|| Error::PreconditionViolated(format!("index {i0} out of range")))?;
    let (_, amax) = alpha_range(model, t);
    if model.alpha_value(d) != amax {
        return Err(Error::PreconditionViolated(format!(
            "{d} is not alpha-maximal"
        )));
    }
    let minus_blocker = side_blocker(model, t, d, Direction::MinusEPlus)?;
    let plus_blocker = side_blocker(model, t, d, Direction::PlusEMinus)?;
    let (minus_open, plus_open) = (minus_blocker.is_none(), plus_blocker.is_none());
    if !minus_open && !plus_open {
        return Err(Error::NoMoveAvailable {
            moved: d.clone(),
            minus_blocker,
            plus_blocker,
        });
    }

    let (fmin, fmax) = f_range(model, t);
    let f_minus = model.f_scaled(&move_target(model, d, Direction::MinusEPlus));
    let f_plus = model.f_scaled(&move_target(model, d, Direction::PlusEMinus));
    let forced_plus = f_minus <= fmin;
    let forced_minus = f_plus > fmax;
    let wide = fmax - fmin >= model.f_den();
    let den = model.f_den();
    let evidence = |rule| MoveEvidence {
        minus_open,
        plus_open,
        forced_minus,
        forced_plus,
        rule,
        f_range: (Rational64::new(fmin, den), Rational64::new(fmax, den)),
    };
    let forced = match (forced_minus, forced_plus) {
        (true, false) => Some((Direction::MinusEPlus, minus_open)),
        (false, true) => Some((Direction::PlusEMinus, plus_open)),
        _ => None,
    };
    if let Some((dir, open)) = forced {
        if open {
            return Ok(MoveChoice {
                direction: dir,
                evidence: evidence(MoveRule::Forced),
            });
        }
        if wide {
            return Err(Error::contradiction(
                Claim::ForcedSideOpen,
                format!("forced move {} of {d} is blocked", dir.name()),
            ));
        }
    }
    let direction = match (minus_open, plus_open) {
        (true, false) => Direction::MinusEPlus,
        (false, true) => Direction::PlusEMinus,
        _ => {
            let inside = |v: i64| fmin <= v && v <= fmax;
            if inside(f_plus) && !inside(f_minus) {
                Direction::PlusEMinus
            } else {
                Direction::MinusEPlus
            }
        }
    };
    let rule = if minus_open && plus_open {
        MoveRule::Free
    } else {
        MoveRule::OnlyAvailable
    };
    Ok(MoveChoice {
        direction,
        evidence: evidence(rule),
    })
}

/// Replaces `t[i0]` by its move in direction `dir`, checking that every
/// Koszul term is present, that the new class is new, and that the result
/// is still strong exceptional.
pub fn apply_move(
    model: &ToricStackModel,
    t: &[PicClass],
    i0: usize,
    dir: Direction,
) -> Result<(Vec<PicClass>, MoveStep)> {
    check_direction(model, dir)?;
    let d = t
        .get(i0)
        .ok_or_else(|| Error::PreconditionViolated(format!("index {i0} out of range")))?
        .clone();
    let added = move_target(model, &d, dir);
    let koszul_required = koszul_terms(model, &d, dir);
    if let Some(missing) = koszul_required
        .iter()
        .find(|k| t.binary_search(k).is_err())
    {
        return Err(Error::KoszulMemberMissing {
            moved: d,
            missing: missing.clone(),
        });
    }
    if t.binary_search(&added).is_ok() {
        return Err(Error::AddedClassAlreadyPresent { added });
    }
    let mut next: Vec<PicClass> = t.to_vec();
    next.remove(i0);
    let pos = next.binary_search(&added).unwrap_err();
    next.insert(pos, added.clone());
    if let Some(violation) = first_violation(model, &next)? {
        return Err(Error::PostMoveNotStrong {
            moved: d,
            violation,
        });
    }
    let phase = if model.picard_rank() == 1 {
        Phase::Rank1
    } else {
        Phase::Strip
    };
    let step = MoveStep {
        removed: d,
        added,
        direction: dir,
        koszul_required,
        koszul_all_present: true,
        added_absent: true,
        post_strong_ok: true,
        phase,
        evidence: None,
    };
    Ok((next, step))
}

fn chosen_move(
    model: &ToricStackModel,
    t: &[PicClass],
    i0: usize,
    phase: Phase,
) -> Result<(Vec<PicClass>, MoveStep)> {
    let choice = choose_move(model, t, i0)?;
    let (next, mut step) = apply_move(model, t, i0, choice.direction)?;
    step.phase = phase;
    step.evidence = Some(choice.evidence);
    Ok((next, step))
}

fn is_consecutive(t: &[PicClass]) -> bool {
    t.windows(2).all(|w| w[1].coords()[0] - w[0].coords()[0] == 1)
}

/// Rank 1: repeatedly replace the lowest degree `s1` by `s1 + sum w_i`
/// while that stays at most the top degree.
pub fn shrink_rank1(model: &ToricStackModel, set: &[PicClass]) -> Result<ShrinkCertificate> {
    if model.picard_rank() != 1 {
        return Err(Error::UnsupportedPicardRank {
            rank: model.picard_rank() as i64,
        });
    }
    let input = check_maximal_strong(model, set)?;
    let total = model.anticanonical().coords()[0];
    let deg = |t: &[PicClass], i: usize| t[i].coords()[0];
    let mut t = input.clone();
    let mut steps = Vec::new();
    let cap = 2 * (deg(&t, t.len() - 1) - deg(&t, 0)).max(0) as usize + 2;
    while deg(&t, 0) + total <= deg(&t, t.len() - 1) {
        if steps.len() >= cap {
            return Err(Error::NonTermination {
                phase: "rank-one shrink",
                cap,
            });
        }
        let (next, step) = apply_move(model, &t, 0, Direction::PlusTotal)?;
        steps.push(step);
        t = next;
    }
    if !is_consecutive(&t) {
        return Err(Error::FinalNotStandard(format!(
            "degrees {} are not consecutive",
            fmt_classes(&t)
        )));
    }
    let witness = StandardWitness::Interval {
        low: deg(&t, 0),
        high: deg(&t, t.len() - 1),
    };
    Ok(ShrinkCertificate {
        input,
        steps,
        final_collection: t,
        witness,
        verdict: Verdict::Full,
    })
}

fn fmt_classes(t: &[PicClass]) -> String {
    t.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

fn first_at_alpha(model: &ToricStackModel, t: &[PicClass], a: i64) -> Option<usize> {
    t.iter().position(|d| model.alpha_value(d) == a)
}

/// Moves whole layers of alpha-maximal elements until the alpha-width is
/// below `alpha(E+)`.
pub fn strip_reduce(
    model: &ToricStackModel,
    t: &[PicClass],
) -> Result<(Vec<PicClass>, Vec<MoveStep>)> {
    check_direction(model, Direction::MinusEPlus)?;
    let bound = model.alpha_e_plus();
    let mut t = sorted_distinct(t)?;
    let mut steps = Vec::new();
    let (amin, amax) = alpha_range(model, &t);
    let cap = 2 * ((amax - amin).max(0) as usize + 1) * t.len();
    let mut width = amax - amin;
    while width >= bound {
        let top = alpha_range(model, &t).1;
        while let Some(i0) = first_at_alpha(model, &t, top) {
            if steps.len() >= cap {
                return Err(Error::NonTermination {
                    phase: "strip reduction",
                    cap,
                });
            }
            let (next, step) = chosen_move(model, &t, i0, Phase::Strip)?;
            let (lo, hi) = alpha_range(model, &next);
            if hi > top || hi - lo > width {
                return Err(Error::StripDisciplineViolated {
                    width: hi - lo,
                    bound: width,
                });
            }
            width = hi - lo;
            steps.push(step);
            t = next;
        }
    }
    Ok((t, steps))
}

fn count_at_f(model: &ToricStackModel, t: &[PicClass], f: i64) -> usize {
    t.iter().filter(|d| model.f_scaled(d) == f).count()
}

/// Checks the four f-window postconditions of a move made while the
/// f-width was at least 1.
fn check_move_contract(
    model: &ToricStackModel,
    before: &[PicClass],
    after: &[PicClass],
    moved: &PicClass,
) -> Result<()> {
    let (fmin, fmax) = f_range(model, before);
    let (nmin, nmax) = f_range(model, after);
    let violated = |condition| {
        Err(Error::MoveContractViolated {
            condition,
            moved: moved.clone(),
        })
    };
    if nmax > fmax {
        return violated(1);
    }
    if nmin < fmin {
        return violated(2);
    }
    let (old_count, new_count) = (count_at_f(model, before, fmin), count_at_f(model, after, fmin));
    if nmin == fmin && new_count > old_count {
        return violated(3);
    }
    if model.f_scaled(moved) == fmin && new_count >= old_count {
        return violated(4);
    }
    Ok(())
}

/// Raises the minimum of f until the f-width is below 1, keeping the
/// alpha-width below `alpha(E+)` after every completed layer.
pub fn f_reduce(
    model: &ToricStackModel,
    t: &[PicClass],
) -> Result<(Vec<PicClass>, Vec<MoveStep>)> {
    check_direction(model, Direction::MinusEPlus)?;
    let bound = model.alpha_e_plus();
    let den = model.f_den();
    let mut t = sorted_distinct(t)?;
    let (amin, amax) = alpha_range(model, &t);
    if amax - amin >= bound {
        return Err(Error::PreconditionViolated(format!(
            "alpha-width {} is not below {bound}",
            amax - amin
        )));
    }
    let (fmin, fmax) = f_range(model, &t);
    let k0 = t.len();
    let levels = (fmax - fmin).max(0) as usize + 2;
    let cap = 2 * levels * k0 * k0 * (bound as usize + 1);
    let mut steps = Vec::new();
    let mut layer_top: Option<i64> = None;
    loop {
        let (amin, amax) = alpha_range(model, &t);
        let (fmin, fmax) = f_range(model, &t);
        if let Some(top) = layer_top {
            if amax < top {
                if amax - amin >= bound {
                    return Err(Error::StripDisciplineViolated {
                        width: amax - amin,
                        bound: bound - 1,
                    });
                }
                layer_top = None;
            }
        }
        let wide = fmax - fmin >= den;
        if !wide && amax - amin < bound {
            break;
        }
        if steps.len() >= cap {
            return Err(Error::NonTermination {
                phase: "f reduction",
                cap,
            });
        }
        let i0 = t
            .iter()
            .position(|d| {
                wide && model.f_scaled(d) == fmin && model.alpha_value(d) == amax
            })
            .or_else(|| first_at_alpha(model, &t, amax))
            .expect("nonempty collection has an alpha-maximal element");
        layer_top.get_or_insert(amax);
        let (next, step) = chosen_move(model, &t, i0, Phase::FReduce)?;
        if wide {
            check_move_contract(model, &t, &next, &step.removed)?;
        }
        let (lo, hi) = alpha_range(model, &next);
        if hi - lo > bound {
            return Err(Error::StripDisciplineViolated {
                width: hi - lo,
                bound,
            });
        }
        steps.push(step);
        t = next;
    }
    Ok((t, steps))
}

/// Finds a generic translate `p + P` whose classes are exactly `set`.
pub fn fit_parallelogram(model: &ToricStackModel, set: &[PicClass]) -> Result<ParallelogramFit> {
    check_direction(model, Direction::MinusEPlus)?;
    let s = sorted_distinct(set)?;
    if s.is_empty() {
        return Err(Error::PreconditionViolated("empty collection".into()));
    }
    let bound = model.alpha_e_plus();
    let den = model.f_den();
    let (amin, amax) = alpha_range(model, &s);
    let (fmin, fmax) = f_range(model, &s);
    if amax - amin >= bound || fmax - fmin >= den {
        return Err(Error::PreconditionViolated(
            "collection does not fit in a strip of the parallelogram's size".into(),
        ));
    }
    let c = Rational64::new(amin + amax, 2);
    let d = Rational64::new(fmin + fmax, 2 * den);
    let slack_a = Rational64::new(bound - (amax - amin), 2);
    let slack_f = Rational64::new(den - (fmax - fmin), 2 * den);
    for k in 0..GENERIC_ATTEMPTS {
        let eps = perturbation(k);
        let center = (c + eps * slack_a, d + eps * slack_f);
        let bounds = PicBox::parallelogram(model, center);
        if !is_generic(model, &bounds)? {
            continue;
        }
        let inside = classes_in_box(model, &bounds)?;
        if inside != s {
            let extra = inside.iter().filter(|x| s.binary_search(x).is_err()).cloned().collect();
            let missing = s.iter().filter(|x| inside.binary_search(x).is_err()).cloned().collect();
            return Err(Error::BoxMismatch { extra, missing });
        }
        return Ok(ParallelogramFit {
            center,
            attempt: k,
            bounds,
        });
    }
    Err(Error::GenericityFailure)
}

/// Shrinks a maximal strong exceptional collection to a standard one and
/// returns the replayable trace.
pub fn certify_full(model: &ToricStackModel, set: &[PicClass]) -> Result<ShrinkCertificate> {
    if model.picard_rank() == 1 {
        return shrink_rank1(model, set);
    }
    let input = check_maximal_strong(model, set)?;
    let (t, mut steps) = strip_reduce(model, &input)?;
    let (t, more) = f_reduce(model, &t)?;
    steps.extend(more);
    let fit = fit_parallelogram(model, &t).map_err(|e| match e {
        Error::PreconditionViolated(msg) => Error::FinalNotStandard(msg),
        other => other,
    })?;
    Ok(ShrinkCertificate {
        input,
        steps,
        final_collection: t,
        witness: StandardWitness::Parallelogram(fit),
        verdict: Verdict::Full,
    })
}

/// Re-applies recorded steps from scratch, validating each one without
/// trusting any recorded flag.
pub fn replay_steps(
    model: &ToricStackModel,
    input: &[PicClass],
    steps: &[MoveStep],
) -> Result<Vec<PicClass>> {
    let mut t = check_maximal_strong(model, input)?;
    for (n, step) in steps.iter().enumerate() {
        let fail = |msg: &str| Err(Error::ReplayMismatch(format!("step {}: {msg}", n + 1)));
        if !(step.koszul_all_present && step.added_absent && step.post_strong_ok) {
            return fail("a recorded check is not satisfied");
        }
        if check_direction(model, step.direction).is_err() {
            return fail("direction does not match the Picard rank");
        }
        let Ok(i0) = t.binary_search(&step.removed) else {
            return fail("removed class is not in the collection");
        };
        let eligible = if model.picard_rank() == 1 {
            i0 == 0
        } else {
            model.alpha_value(&step.removed) == alpha_range(model, &t).1
        };
        if !eligible {
            return fail("removed class is not extremal");
        }
        if move_target(model, &step.removed, step.direction) != step.added {
            return fail("added class does not match the direction");
        }
        if koszul_terms(model, &step.removed, step.direction) != step.koszul_required {
            return fail("recorded Koszul terms are wrong");
        }
        if step.koszul_required.iter().any(|k| t.binary_search(k).is_err()) {
            return fail("a Koszul term is missing");
        }
        if t.binary_search(&step.added).is_ok() {
            return fail("added class was already present");
        }
        t.remove(i0);
        let pos = t.binary_search(&step.added).unwrap_err();
        t.insert(pos, step.added.clone());
        if first_violation(model, &t)?.is_some() {
            return fail("collection is not strong exceptional after the move");
        }
    }
    Ok(t)
}

/// Full independent validation of a certificate.
pub fn replay_certificate(model: &ToricStackModel, cert: &ShrinkCertificate) -> Result<()> {
    let t = replay_steps(model, &cert.input, &cert.steps)?;
    if t != cert.final_collection {
        return Err(Error::ReplayMismatch(
            "steps do not reproduce the final collection".into(),
        ));
    }
    let witness_ok = match &cert.witness {
        StandardWitness::Interval { low, high } => {
            model.picard_rank() == 1
                && is_consecutive(&t)
                && t.first().map(|d| d.coords()[0]) == Some(*low)
                && t.last().map(|d| d.coords()[0]) == Some(*high)
        }
        StandardWitness::Parallelogram(fit) => {
            model.picard_rank() == 2 && fit_parallelogram(model, &t).ok().as_ref() == Some(fit)
        }
    };
    if !witness_ok {
        return Err(Error::ReplayMismatch(
            "final collection does not match its standard witness".into(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::test_models::{hirzebruch, p1p1, weights};
    use crate::standard::standard_collection;

    fn degs(ds: &[i64]) -> Vec<PicClass> {
        ds.iter().map(|&d| PicClass::new(vec![d])).collect()
    }

    fn wp56_collection() -> Vec<PicClass> {
        degs(&[-15, -13, -10, -9, -8, -7, -6, -5, -3, -1, 0])
    }

    #[test]
    fn wp56_trace() {
        let m = weights(&[5, 6]);
        let cert = certify_full(&m, &wp56_collection()).unwrap();
        let moves: Vec<(i64, i64)> = cert
            .steps
            .iter()
            .map(|s| (s.removed.coords()[0], s.added.coords()[0]))
            .collect();
        assert_eq!(moves, vec![(-15, -4), (-13, -2)]);
        assert_eq!(cert.final_collection, degs(&(-10..=0).collect::<Vec<_>>()));
        assert_eq!(cert.witness, StandardWitness::Interval { low: -10, high: 0 });
        assert_eq!(cert.steps[0].koszul_required, degs(&[-15, -10, -9]));
        assert_eq!(replay_certificate(&m, &cert), Ok(()));
    }

    #[test]
    fn rank_one_standard_needs_no_steps() {
        let m = weights(&[5, 6]);
        let cert = shrink_rank1(&m, &standard_collection(&m).unwrap()).unwrap();
        assert!(cert.steps.is_empty());
        let m = weights(&[1, 2]);
        assert!(shrink_rank1(&m, &degs(&[-2, -1, 0])).unwrap().steps.is_empty());
    }

    #[test]
    fn undersized_rejected() {
        let m = weights(&[5, 6]);
        assert_eq!(
            certify_full(&m, &degs(&[0, -11])),
            Err(Error::NotMaximalLength {
                expected: 11,
                found: 2
            })
        );
    }

    #[test]
    fn p1xp1_example_move() {
        let m = p1p1();
        let t: Vec<PicClass> = {
            let mut v = vec![
                m.zero_class(),
                m.e_class()[0].clone(),
                m.e_class()[2].clone(),
                &m.e_class()[0] + &m.e_class()[2],
            ];
            v.sort();
            v
        };
        let amax = alpha_range(&m, &t).1;
        let i0 = t.iter().position(|d| *d == m.e_class()[0]).unwrap();
        assert_eq!(m.alpha_value(&t[i0]), amax);
        let choice = choose_move(&m, &t, i0).unwrap();
        assert_eq!(choice.direction, Direction::MinusEPlus);
        assert!(choice.evidence.minus_open && choice.evidence.plus_open);
        let (next, step) = apply_move(&m, &t, i0, choice.direction).unwrap();
        assert_eq!(step.added, &m.e_class()[0] - m.e_plus().unwrap());
        assert!(next.contains(&step.added));
        // E_1 and E_2 have the same class, so only D and D - E_1 are needed
        assert_eq!(step.koszul_required.len(), 2);

        // the class with alpha 0 is not maximal
        let i1 = t.iter().position(|d| m.alpha_value(d) == 0).unwrap();
        assert!(matches!(
            choose_move(&m, &t, i1),
            Err(Error::PreconditionViolated(_))
        ));

        // dropping a Koszul term breaks the move
        let mut forged = t.clone();
        forged.retain(|d| !d.is_zero());
        let j = forged.iter().position(|d| *d == m.e_class()[0]).unwrap();
        assert!(matches!(
            apply_move(&m, &forged, j, Direction::MinusEPlus),
            Err(Error::KoszulMemberMissing { .. })
        ));

        let cert = certify_full(&m, &t).unwrap();
        assert_eq!(replay_certificate(&m, &cert), Ok(()));
    }

    #[test]
    fn standard_rank_two_certifies_in_place() {
        for m in [p1p1(), hirzebruch()] {
            let s = standard_collection(&m).unwrap();
            let fit = fit_parallelogram(&m, &s).unwrap();
            assert_eq!(classes_in_box(&m, &fit.bounds).unwrap(), s);
            let cert = certify_full(&m, &s).unwrap();
            assert!(cert.steps.is_empty());
        }
    }

    #[test]
    fn far_element_breaks_fit() {
        let m = p1p1();
        let mut s = standard_collection(&m).unwrap();
        let moved = &s[0] + m.e_plus().unwrap();
        s[0] = moved;
        assert!(matches!(
            fit_parallelogram(&m, &s),
            Err(Error::PreconditionViolated(_)) | Err(Error::BoxMismatch { .. })
        ));
    }

    #[test]
    fn tampered_replay_fails() {
        let m = weights(&[5, 6]);
        let cert = certify_full(&m, &wp56_collection()).unwrap();
        let mut bad = cert.clone();
        bad.steps[1].added = PicClass::new(vec![-1]);
        assert!(matches!(replay_certificate(&m, &bad), Err(Error::ReplayMismatch(_))));
        let mut bad = cert.clone();
        bad.steps.swap(0, 1);
        assert!(matches!(replay_certificate(&m, &bad), Err(Error::ReplayMismatch(_))));
        let mut bad = cert;
        bad.final_collection.pop();
        assert!(replay_certificate(&m, &bad).is_err());
    }

    #[test]
    fn koszul_terms_rank_one() {
        let m = weights(&[1, 1, 2]);
        let terms = koszul_terms(&m, &PicClass::new(vec![0]), Direction::PlusTotal);
        assert_eq!(terms, degs(&[0, 1, 2, 3]));
    }
}
