//! Qualitative forces, object states, and the reasoning rules that connect
//! them.
//!
//! The central operation is the state-change envelope: every subset of a
//! force set yields a net force direction and a net torque direction, and
//! the union over subsets is the set of qualitative state changes the force
//! set can produce. Entailment queries search that envelope for an observed
//! change and return a machine-checkable witness (the subset and the
//! definite force directions used).
//!
//! Three physical rules restrict contact forces: no force at a vanishing
//! point (objects separating at the contact), no attraction (the force may
//! not pull toward the other object), and Newton's third law (paired forces
//! are opposite).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sign::{Sign, SignSet, SignVec};

/// Default cap on the per-object force-set size; the envelope is
/// exponential in it.
pub const DEFAULT_SUBSET_CAP: usize = 12;

#[derive(Debug, Error, PartialEq)]
pub enum DynamicsError {
    /// A force set exceeded the subset-enumeration cap.
    #[error("force set of {count} exceeds the subset cap of {cap}")]
    CapExceeded { count: usize, cap: usize },
    /// Two qualitative states do not determine a definite change.
    #[error("state change is indefinite in the {axis} component of {part}")]
    IndefiniteChange { part: &'static str, axis: char },
    /// A qualitative action must have a definite, nonzero direction.
    #[error("action direction must be definite and nonzero, got qd={qd} qr={qr}")]
    InvalidAction { qd: SignVec, qr: SignVec },
    /// Contact normals must not admit the zero vector.
    #[error("contact normal {0} admits the zero vector")]
    BadNormal(SignVec),
}

/// Opaque identifier of an object in a scene.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectId(String);

impl ObjectId {
    pub fn new(id: impl Into<String>) -> ObjectId {
        ObjectId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ObjectId {
    fn from(s: &str) -> ObjectId {
        ObjectId::new(s)
    }
}

/// A force on an object, qualitatively: the sign vector `qd` of its
/// direction and the sign vector `qr` of the direction from the object's
/// mass centre to the application point.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QualitativeForce {
    pub qd: SignVec,
    pub qr: SignVec,
    pub object: ObjectId,
}

impl QualitativeForce {
    pub fn new(qd: SignVec, qr: SignVec, object: ObjectId) -> QualitativeForce {
        QualitativeForce { qd, qr, object }
    }

    /// Gravity acts downward through the mass centre.
    pub fn gravity(object: ObjectId) -> QualitativeForce {
        QualitativeForce {
            qd: SignVec::new(Sign::Zero, Sign::Zero, Sign::Minus),
            qr: SignVec::ZERO,
            object,
        }
    }
}

impl fmt::Display for QualitativeForce {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{} on {}", self.qd, self.qr, self.object)
    }
}

/// Qualitative state of an object: sign vectors of its linear and angular
/// velocity. There are 27 x 27 = 729 definite states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ObjectState {
    pub qv: SignVec,
    pub qw: SignVec,
}

impl ObjectState {
    pub const AT_REST: ObjectState = ObjectState { qv: SignVec::ZERO, qw: SignVec::ZERO };

    pub fn new(qv: SignVec, qw: SignVec) -> ObjectState {
        ObjectState { qv, qw }
    }

    pub fn is_at_rest(self) -> bool {
        self.qv.is_zero() && self.qw.is_zero()
    }

    /// All 729 definite states, in canonical order.
    pub fn enumerate_definite() -> impl Iterator<Item = ObjectState> {
        SignVec::all_definite()
            .flat_map(|qv| SignVec::all_definite().map(move |qw| ObjectState { qv, qw }))
    }
}

/// Observed change of an object's state between two time points; always
/// definite, being a quantized observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StateChange {
    pub dqv: SignVec,
    pub dqw: SignVec,
}

impl StateChange {
    pub const NONE: StateChange = StateChange { dqv: SignVec::ZERO, dqw: SignVec::ZERO };

    /// Derives the change from two qualitative states by sign subtraction.
    ///
    /// Subtracting equal nonzero signs is indefinite, so this only succeeds
    /// when each velocity component changed decisively — always the case
    /// for scenes that start at rest.
    pub fn between(before: ObjectState, after: ObjectState) -> Result<StateChange, DynamicsError> {
        let dqv = after.qv.sub(before.qv);
        let dqw = after.qw.sub(before.qw);
        for (part, v) in [("linear velocity", dqv), ("angular velocity", dqw)] {
            for (axis, c) in ['x', 'y', 'z'].into_iter().zip(v.components()) {
                if !c.is_singleton() {
                    return Err(DynamicsError::IndefiniteChange { part, axis });
                }
            }
        }
        Ok(StateChange { dqv, dqw })
    }

    pub fn is_zero(self) -> bool {
        self.dqv.is_zero() && self.dqw.is_zero()
    }
}

impl fmt::Display for StateChange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "dv={} dw={}", self.dqv, self.dqw)
    }
}

/// An impulse applied at a point on an object's exterior, in qualitative
/// form. The direction must be definite and nonzero.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QualitativeAction {
    pub force: QualitativeForce,
}

impl QualitativeAction {
    pub fn new(force: QualitativeForce) -> Result<QualitativeAction, DynamicsError> {
        if !force.qd.is_definite() || force.qd.is_zero() || !force.qr.is_definite() {
            return Err(DynamicsError::InvalidAction { qd: force.qd, qr: force.qr });
        }
        Ok(QualitativeAction { force })
    }
}

impl fmt::Display for QualitativeAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "push object {} in direction {} at locus {}",
            self.force.object, self.force.qd, self.force.qr
        )
    }
}

/// Geometry of a contact point between objects `a` and `b`.
///
/// The convention is fixed: the normal points from `b` into `a`, so it is
/// the direction of the contact force that `b` exerts on `a`. `qr_on_a` and
/// `qr_on_b` point from each object's mass centre to the shared point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactGeometry {
    pub normal_q: SignVec,
    pub numeric_normal: Option<[f64; 3]>,
    pub qr_on_a: SignVec,
    pub qr_on_b: SignVec,
}

impl ContactGeometry {
    pub fn new(
        normal_q: SignVec,
        numeric_normal: Option<[f64; 3]>,
        qr_on_a: SignVec,
        qr_on_b: SignVec,
    ) -> Result<ContactGeometry, DynamicsError> {
        if normal_q.admits(SignVec::ZERO) {
            return Err(DynamicsError::BadNormal(normal_q));
        }
        Ok(ContactGeometry { normal_q, numeric_normal, qr_on_a, qr_on_b })
    }
}

/// Point velocity in sign form: `qv + qw x qr`.
fn point_velocity(state: ObjectState, qr: SignVec) -> SignVec {
    state.qv.add(state.qw.cross(qr))
}

/// Whether a contact is a vanishing point: the objects are definitely
/// moving apart there, so it carries no force.
///
/// Evaluated on the earlier states. The contact survives unless every
/// denoted relative point velocity has a strictly positive component along
/// the normal.
pub fn is_vanishing_point(
    state_a: ObjectState,
    state_b: ObjectState,
    geom: &ContactGeometry,
) -> bool {
    let rel = point_velocity(state_a, geom.qr_on_a).sub(point_velocity(state_b, geom.qr_on_b));
    for delta in rel.denotation() {
        if geom.normal_q.dot(delta).intersects(SignSet::NON_POSITIVE) {
            return false;
        }
    }
    true
}

/// Numeric form of the vanishing-point test: separating iff
/// `n . (x_a - x_b) > 0` for the numeric point velocities.
pub fn is_vanishing_point_numeric(normal: [f64; 3], x_a: [f64; 3], x_b: [f64; 3]) -> bool {
    let d = [x_a[0] - x_b[0], x_a[1] - x_b[1], x_a[2] - x_b[2]];
    normal[0] * d[0] + normal[1] * d[1] + normal[2] * d[2] > 0.0
}

/// Vanishing-point test that prefers numeric point velocities when both
/// they and a numeric normal are available.
pub fn is_vanishing_point_with(
    state_a: ObjectState,
    state_b: ObjectState,
    geom: &ContactGeometry,
    point_velocities: Option<([f64; 3], [f64; 3])>,
) -> bool {
    match (geom.numeric_normal, point_velocities) {
        (Some(n), Some((xa, xb))) => is_vanishing_point_numeric(n, xa, xb),
        _ => is_vanishing_point(state_a, state_b, geom),
    }
}

/// No-attraction rule: a contact force direction is admissible iff its dot
/// product with the contact normal can be nonnegative.
pub fn satisfies_no_attraction(qd: SignVec, normal_q: SignVec) -> bool {
    qd.dot(normal_q).intersects(SignSet::NON_NEGATIVE)
}

/// Numeric form of the no-attraction rule.
pub fn satisfies_no_attraction_numeric(direction: [f64; 3], normal: [f64; 3]) -> bool {
    direction[0] * normal[0] + direction[1] * normal[1] + direction[2] * normal[2] >= 0.0
}

/// Newton's third law: the paired contact force has the inverse direction.
pub fn third_law_pair(qd: SignVec) -> SignVec {
    qd.inverse()
}

/// Combines a resistant force component with the accumulated effect of the
/// other forces: it may cancel the effect to zero but never overwhelm it.
///
/// If no sign of `resistant` opposes a nonzero sign of `other`, the result
/// is `other` unchanged; an opposing sign adds zero to the possibilities.
/// A resistant force against no effect produces no effect.
pub fn heuristic_resistant_add(resistant: SignSet, other: SignSet) -> SignSet {
    if resistant.opposes(other) {
        other.union(SignSet::ZERO)
    } else {
        other
    }
}

/// Component-wise [`heuristic_resistant_add`].
pub fn heuristic_resistant_add_vec(resistant: SignVec, other: SignVec) -> SignVec {
    SignVec {
        x: heuristic_resistant_add(resistant.x, other.x),
        y: heuristic_resistant_add(resistant.y, other.y),
        z: heuristic_resistant_add(resistant.z, other.z),
    }
}

/// One force in an entailment query. `qd` may be set-valued (a grouped
/// assignment denoting a box of definite directions); `qr` is definite.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceTerm {
    pub qd: SignVec,
    pub qr: SignVec,
    /// Assigned against the motion during search rather than propagated by
    /// the third law; under the cancel-only heuristic such a force cannot
    /// overwhelm the others.
    pub resistant: bool,
    /// Membership witnesses must skip the zero direction (action groups).
    pub exclude_zero: bool,
}

impl ForceTerm {
    pub fn plain(qd: SignVec, qr: SignVec) -> ForceTerm {
        ForceTerm { qd, qr, resistant: false, exclude_zero: false }
    }

    pub fn from_force(f: &QualitativeForce) -> ForceTerm {
        ForceTerm::plain(f.qd, f.qr)
    }
}

/// Options for envelope and entailment computations.
#[derive(Debug, Clone, Copy)]
pub struct EntailmentOptions {
    /// Apply the cancel-only combination to resistant terms.
    pub h1: bool,
    pub cap: usize,
}

impl Default for EntailmentOptions {
    fn default() -> EntailmentOptions {
        EntailmentOptions { h1: false, cap: DEFAULT_SUBSET_CAP }
    }
}

/// Witness that a state change lies in the envelope of a force set: the
/// subset used, the direction chosen per subset member, and the net force
/// and torque sign vectors those choices fold to.
///
/// Members are definite except for resistant terms under the cancel-only
/// heuristic: those act per component (cancel or stay out, axis by axis),
/// which no single definite member expresses, so their entry is the whole
/// grouped direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entailment {
    /// Indices into the queried term slice, ascending.
    pub subset: Vec<usize>,
    /// `qd` chosen for each subset member, in subset order.
    pub members: Vec<SignVec>,
    pub linear: SignVec,
    pub angular: SignVec,
}

/// Net-effect cell: folded linear and angular sign vectors.
type Cell = (SignVec, SignVec);

const EMPTY_CELL: Cell = (SignVec::ZERO, SignVec::ZERO);

fn fold_step(term: &ForceTerm, member: SignVec, cell: Cell, h1: bool) -> Cell {
    let torque = term.qr.cross(member);
    if h1 && term.resistant {
        (
            heuristic_resistant_add_vec(member, cell.0),
            heuristic_resistant_add_vec(torque, cell.1),
        )
    } else {
        (cell.0.add(member), cell.1.add(torque))
    }
}

/// Subset term order: non-resistant terms first so the cancel-only fold
/// sees the full effect it may cancel, then resistant terms. The result is
/// independent of the order within each class.
fn fold_order(terms: &[ForceTerm], mask: u32) -> Vec<usize> {
    let in_mask = |i: &usize| mask & (1 << *i) != 0;
    let (mut order, resistant): (Vec<usize>, Vec<usize>) =
        (0..terms.len()).filter(in_mask).partition(|i| !terms[*i].resistant);
    order.extend(resistant);
    order
}

/// Exact member search within one subset: dynamic programming over the
/// reachable net-effect cells, one layer per subset term.
fn subset_witness(
    change: StateChange,
    terms: &[ForceTerm],
    mask: u32,
    h1: bool,
) -> Option<(Vec<usize>, Vec<SignVec>, Cell)> {
    let order = fold_order(terms, mask);
    // Layers record, per reachable cell, the predecessor cell and the member
    // chosen at that layer, for witness reconstruction.
    let mut layers: Vec<BTreeMap<Cell, (Cell, SignVec)>> = Vec::with_capacity(order.len());
    let mut current: BTreeSet<Cell> = BTreeSet::from([EMPTY_CELL]);
    for &i in &order {
        let mut next: BTreeMap<Cell, (Cell, SignVec)> = BTreeMap::new();
        for cell in &current {
            if h1 && terms[i].resistant {
                // Cancel-only forces act per component; fold the whole
                // group at once instead of enumerating members.
                let folded = fold_step(&terms[i], terms[i].qd, *cell, h1);
                next.entry(folded).or_insert((*cell, terms[i].qd));
                continue;
            }
            for member in terms[i].qd.denotation() {
                if terms[i].exclude_zero && member.is_zero() {
                    continue;
                }
                let folded = fold_step(&terms[i], member, *cell, h1);
                next.entry(folded).or_insert((*cell, member));
            }
        }
        current = next.keys().copied().collect();
        layers.push(next);
        if current.is_empty() {
            return None;
        }
    }
    let target = *current
        .iter()
        .find(|(lin, ang)| lin.admits(change.dqv) && ang.admits(change.dqw))?;
    // Walk the layers backwards to recover the member choices.
    let mut members = vec![SignVec::ZERO; order.len()];
    let mut cell = target;
    for (slot, layer) in members.iter_mut().zip(layers.iter()).rev() {
        let (prev, member) = layer[&cell];
        *slot = member;
        cell = prev;
    }
    Some((order, members, target))
}

/// Sorted subset masks: small subsets first so witnesses are minimal and
/// queries on satisfiable changes exit early. Cached for ordinary sizes.
fn subset_masks(n: usize) -> std::borrow::Cow<'static, [u32]> {
    use std::sync::OnceLock;
    static TABLES: OnceLock<Vec<Vec<u32>>> = OnceLock::new();
    fn compute(n: usize) -> Vec<u32> {
        let mut masks: Vec<u32> = (0..1u32 << n).collect();
        masks.sort_by_key(|m| (m.count_ones(), *m));
        masks
    }
    if n <= 16 {
        let tables = TABLES.get_or_init(|| (0..=16).map(compute).collect());
        std::borrow::Cow::Borrowed(&tables[n])
    } else {
        std::borrow::Cow::Owned(compute(n))
    }
}

/// Set-level screen cells for every subset at once: incremental sums over
/// the non-heuristic part, then the cancel-only terms folded in per mask.
fn screen_cells(terms: &[ForceTerm], h1: bool) -> Vec<Cell> {
    let n = terms.len();
    let torques: Vec<SignVec> = terms.iter().map(|t| t.qr.cross(t.qd)).collect();
    let mut cells: Vec<Cell> = vec![EMPTY_CELL; 1 << n];
    for mask in 1..1u32 << n {
        let low = mask.trailing_zeros() as usize;
        let rest = (mask & (mask - 1)) as usize;
        cells[mask as usize] = if h1 && terms[low].resistant {
            cells[rest]
        } else {
            let (lin, ang) = cells[rest];
            (lin.add(terms[low].qd), ang.add(torques[low]))
        };
    }
    if h1 {
        for mask in 1..1u32 << n {
            let (mut lin, mut ang) = cells[mask as usize];
            for (i, term) in terms.iter().enumerate() {
                if mask & (1 << i) != 0 && term.resistant {
                    lin = heuristic_resistant_add_vec(term.qd, lin);
                    ang = heuristic_resistant_add_vec(torques[i], ang);
                }
            }
            cells[mask as usize] = (lin, ang);
        }
    }
    cells
}

/// Searches the envelope of `terms` for `change` and returns a witness if
/// one exists. Stops at the first (smallest) entailing subset.
pub fn find_entailment(
    change: StateChange,
    terms: &[ForceTerm],
    opts: EntailmentOptions,
) -> Result<Option<Entailment>, DynamicsError> {
    if terms.len() > opts.cap {
        return Err(DynamicsError::CapExceeded { count: terms.len(), cap: opts.cap });
    }
    let cells = screen_cells(terms, opts.h1);
    for mask in subset_masks(terms.len()).iter().copied() {
        let (lin, ang) = cells[mask as usize];
        if !lin.admits(change.dqv) || !ang.admits(change.dqw) {
            continue;
        }
        if let Some((order, members, cell)) = subset_witness(change, terms, mask, opts.h1) {
            // Report in ascending index order for readability.
            let mut pairs: Vec<(usize, SignVec)> = order.into_iter().zip(members).collect();
            pairs.sort_by_key(|(i, _)| *i);
            let (subset, members) = pairs.into_iter().unzip();
            return Ok(Some(Entailment { subset, members, linear: cell.0, angular: cell.1 }));
        }
    }
    Ok(None)
}

/// All definite state changes producible by any subset of the given terms.
pub fn term_envelope(
    terms: &[ForceTerm],
    opts: EntailmentOptions,
) -> Result<BTreeSet<StateChange>, DynamicsError> {
    if terms.len() > opts.cap {
        return Err(DynamicsError::CapExceeded { count: terms.len(), cap: opts.cap });
    }
    let cells: BTreeSet<Cell> = screen_cells(terms, opts.h1).into_iter().collect();
    let mut out = BTreeSet::new();
    for (lin, ang) in cells {
        for dqv in lin.denotation() {
            for dqw in ang.denotation() {
                out.insert(StateChange { dqv, dqw });
            }
        }
    }
    Ok(out)
}

/// The envelope of a plain force set (no heuristics): every definite state
/// change some subset of `forces` can produce.
pub fn delta_envelope(
    forces: &[QualitativeForce],
    cap: usize,
) -> Result<BTreeSet<StateChange>, DynamicsError> {
    debug_assert!(
        forces.windows(2).all(|w| w[0].object == w[1].object),
        "envelope forces must act on one object"
    );
    let terms: Vec<ForceTerm> = forces.iter().map(ForceTerm::from_force).collect();
    term_envelope(&terms, EntailmentOptions { h1: false, cap })
}

/// Whether `change` is in the envelope of `forces`, stopping at the first
/// entailing subset.
pub fn change_entailed(
    change: StateChange,
    forces: &[QualitativeForce],
    cap: usize,
) -> Result<bool, DynamicsError> {
    let terms: Vec<ForceTerm> = forces.iter().map(ForceTerm::from_force).collect();
    Ok(find_entailment(change, &terms, EntailmentOptions { h1: false, cap })?.is_some())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sign::QuantizationConfig;
    use proptest::prelude::*;

    fn set(s: &str) -> SignSet {
        s.parse().unwrap()
    }

    fn vec3(s: &str) -> SignVec {
        let parts: Vec<&str> = s.split(',').collect();
        SignVec::new(set(parts[0]), set(parts[1]), set(parts[2]))
    }

    fn force(qd: &str, qr: &str) -> QualitativeForce {
        QualitativeForce::new(vec3(qd), vec3(qr), ObjectId::new("o"))
    }

    fn change(dqv: &str, dqw: &str) -> StateChange {
        StateChange { dqv: vec3(dqv), dqw: vec3(dqw) }
    }

    // ---- independent reference implementation of the envelope ----
    //
    // Fresh sign tables and an explicit recursive power-set walk, kept free
    // of the production fold so the two routes can disagree.

    fn ref_add(a: Sign, b: Sign) -> Vec<Sign> {
        use Sign::*;
        match (a, b) {
            (Plus, Minus) | (Minus, Plus) => vec![Plus, Minus, Zero],
            (Plus, _) | (_, Plus) => vec![Plus],
            (Minus, _) | (_, Minus) => vec![Minus],
            (Zero, Zero) => vec![Zero],
        }
    }

    fn ref_mul(a: Sign, b: Sign) -> Sign {
        use Sign::*;
        match (a, b) {
            (Zero, _) | (_, Zero) => Zero,
            (x, y) if x == y => Plus,
            _ => Minus,
        }
    }

    fn ref_set_add(a: &[Sign], b: &[Sign]) -> Vec<Sign> {
        let mut out: Vec<Sign> = Vec::new();
        for &x in a {
            for &y in b {
                for r in ref_add(x, y) {
                    if !out.contains(&r) {
                        out.push(r);
                    }
                }
            }
        }
        out
    }

    fn ref_set_sub(a: &[Sign], b: &[Sign]) -> Vec<Sign> {
        let negated: Vec<Sign> = b.iter().map(|s| s.inverse()).collect();
        ref_set_add(a, &negated)
    }

    fn ref_set_mul(a: &[Sign], b: &[Sign]) -> Vec<Sign> {
        let mut out = Vec::new();
        for &x in a {
            for &y in b {
                let r = ref_mul(x, y);
                if !out.contains(&r) {
                    out.push(r);
                }
            }
        }
        out
    }

    type RefVec = [Vec<Sign>; 3];

    fn ref_of(v: SignVec) -> RefVec {
        let c = v.components();
        [c[0].iter().collect(), c[1].iter().collect(), c[2].iter().collect()]
    }

    fn ref_vec_add(a: &RefVec, b: &RefVec) -> RefVec {
        [
            ref_set_add(&a[0], &b[0]),
            ref_set_add(&a[1], &b[1]),
            ref_set_add(&a[2], &b[2]),
        ]
    }

    fn ref_cross(u: &RefVec, v: &RefVec) -> RefVec {
        [
            ref_set_sub(&ref_set_mul(&u[1], &v[2]), &ref_set_mul(&u[2], &v[1])),
            ref_set_sub(&ref_set_mul(&u[2], &v[0]), &ref_set_mul(&u[0], &v[2])),
            ref_set_sub(&ref_set_mul(&u[0], &v[1]), &ref_set_mul(&u[1], &v[0])),
        ]
    }

    fn ref_envelope(forces: &[QualitativeForce]) -> BTreeSet<StateChange> {
        let zero: RefVec = [vec![Sign::Zero], vec![Sign::Zero], vec![Sign::Zero]];
        let mut out = BTreeSet::new();
        for mask in 0..1u32 << forces.len() {
            let mut lin = zero.clone();
            let mut ang = zero.clone();
            for (i, f) in forces.iter().enumerate() {
                if mask & (1 << i) == 0 {
                    continue;
                }
                lin = ref_vec_add(&lin, &ref_of(f.qd));
                ang = ref_vec_add(&ang, &ref_cross(&ref_of(f.qr), &ref_of(f.qd)));
            }
            for &vx in &lin[0] {
                for &vy in &lin[1] {
                    for &vz in &lin[2] {
                        for &wx in &ang[0] {
                            for &wy in &ang[1] {
                                for &wz in &ang[2] {
                                    out.insert(StateChange {
                                        dqv: SignVec::new(vx, vy, vz),
                                        dqw: SignVec::new(wx, wy, wz),
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn envelope_of_gravity() {
        let g = QualitativeForce::gravity(ObjectId::new("o"));
        let env = delta_envelope(std::slice::from_ref(&g), DEFAULT_SUBSET_CAP).unwrap();
        let expect: BTreeSet<StateChange> =
            [change("0,0,0", "0,0,0"), change("0,0,-", "0,0,0")].into();
        assert_eq!(env, expect);
        assert_eq!(env, ref_envelope(&[g]));
    }

    #[test]
    fn envelope_of_nothing() {
        let env = delta_envelope(&[], DEFAULT_SUBSET_CAP).unwrap();
        assert_eq!(env, [StateChange::NONE].into());
    }

    #[test]
    fn envelope_of_opposed_pair() {
        // Opposite lateral forces applied below the mass centre. Expected
        // values frozen from the reference route (the torque of a +x force
        // at qr=(0,0,-) is (0,-,0), matching the numeric cross product).
        let fs = [force("+,0,0", "0,0,-"), force("-,0,0", "0,0,-")];
        let env = delta_envelope(&fs, DEFAULT_SUBSET_CAP).unwrap();
        assert_eq!(env, ref_envelope(&fs));
        assert!(env.contains(&change("+,0,0", "0,-,0")));
        assert!(env.contains(&change("-,0,0", "0,+,0")));
        // The two-force subset contributes the full product (*,0,0) x (0,*,0).
        for dv in vec3("[+-0],0,0").denotation() {
            for dw in vec3("0,[+-0],0").denotation() {
                assert!(env.contains(&StateChange { dqv: dv, dqw: dw }));
            }
        }
        assert!(!env.contains(&change("0,+,0", "0,0,0")));
    }

    #[test]
    fn entailment_examples() {
        let g = QualitativeForce::gravity(ObjectId::new("o"));
        assert!(change_entailed(StateChange::NONE, &[], DEFAULT_SUBSET_CAP).unwrap());
        assert!(
            change_entailed(StateChange::NONE, std::slice::from_ref(&g), DEFAULT_SUBSET_CAP)
                .unwrap()
        );
        assert!(change_entailed(
            change("0,0,-", "0,0,0"),
            std::slice::from_ref(&g),
            DEFAULT_SUBSET_CAP
        )
        .unwrap());
        assert!(!change_entailed(change("+,0,0", "0,0,0"), &[g], DEFAULT_SUBSET_CAP).unwrap());
    }

    #[test]
    fn cap_is_enforced() {
        let fs: Vec<QualitativeForce> = (0..5).map(|_| force("+,0,0", "0,0,0")).collect();
        assert_eq!(
            delta_envelope(&fs, 4),
            Err(DynamicsError::CapExceeded { count: 5, cap: 4 })
        );
        assert_eq!(
            change_entailed(StateChange::NONE, &fs, 4),
            Err(DynamicsError::CapExceeded { count: 5, cap: 4 })
        );
    }

    #[test]
    fn state_change_between() {
        let rest = ObjectState::AT_REST;
        let moving = ObjectState::new(vec3("+,0,0"), vec3("0,0,0"));
        assert_eq!(StateChange::between(rest, moving).unwrap(), change("+,0,0", "0,0,0"));
        // Same nonzero sign at both times is indefinite.
        assert!(matches!(
            StateChange::between(moving, moving),
            Err(DynamicsError::IndefiniteChange { axis: 'x', .. })
        ));
    }

    #[test]
    fn enumerates_729_states() {
        let states: BTreeSet<ObjectState> = ObjectState::enumerate_definite().collect();
        assert_eq!(states.len(), 729);
    }

    fn geometry(normal: &str, qr_a: &str, qr_b: &str) -> ContactGeometry {
        ContactGeometry::new(vec3(normal), None, vec3(qr_a), vec3(qr_b)).unwrap()
    }

    #[test]
    fn vanishing_point_examples() {
        let geom = geometry("0,0,+", "0,0,-", "0,0,+");
        // Both at rest: the contact persists.
        assert!(!is_vanishing_point(ObjectState::AT_REST, ObjectState::AT_REST, &geom));
        // a moving straight up off a resting b: vanishing.
        let up = ObjectState::new(vec3("0,0,+"), vec3("0,0,0"));
        assert!(is_vanishing_point(up, ObjectState::AT_REST, &geom));
        // Numeric data takes precedence when supplied.
        let geom_n = ContactGeometry::new(
            vec3("0,0,+"),
            Some([0.0, 0.0, 1.0]),
            vec3("0,0,-"),
            vec3("0,0,+"),
        )
        .unwrap();
        assert!(!is_vanishing_point_with(
            up,
            ObjectState::AT_REST,
            &geom_n,
            Some(([0.0, 0.0, -0.3], [0.0, 0.0, 0.0])),
        ));
        assert!(is_vanishing_point_numeric([0.0, 0.0, 1.0], [0.0, 0.0, 0.5], [0.0, 0.0, 0.0]));
        assert!(ContactGeometry::new(SignVec::ZERO, None, SignVec::ZERO, SignVec::ZERO).is_err());
    }

    #[test]
    fn no_attraction_examples() {
        let n = vec3("0,0,+");
        assert!(satisfies_no_attraction(vec3("0,0,+"), n));
        assert!(!satisfies_no_attraction(vec3("0,0,-"), n));
        assert!(satisfies_no_attraction(vec3("+,0,0"), n));
        // The zero force never violates the rule.
        assert!(satisfies_no_attraction(SignVec::ZERO, n));
        assert!(satisfies_no_attraction_numeric([1.0, 0.0, 0.0], [0.0, 0.0, 1.0]));
        assert!(!satisfies_no_attraction_numeric([0.0, 0.0, -1.0], [0.0, 0.0, 1.0]));
    }

    #[test]
    fn third_law_examples() {
        assert_eq!(third_law_pair(vec3("+,0,-")), vec3("-,0,+"));
        assert_eq!(third_law_pair(SignVec::ZERO), SignVec::ZERO);
        assert_eq!(third_law_pair(vec3("+,-,0")), vec3("-,+,0"));
        for v in SignVec::all_definite() {
            assert_eq!(third_law_pair(third_law_pair(v)), v);
        }
    }

    /// Reference form of the cancel-only combination, per definite pair.
    fn ref_resistant(r: Sign, o: Sign) -> Vec<Sign> {
        use Sign::*;
        match (r, o) {
            (_, Zero) => vec![Zero],
            (Zero, _) => vec![o],
            (a, b) if a == b => vec![o],
            _ => vec![o, Zero],
        }
    }

    #[test]
    fn resistant_add_matches_reference() {
        let all = ["+", "-", "0", "[+-]", "[+0]", "[-0]", "[+-0]"];
        for r in all {
            for o in all {
                let (rs, os) = (set(r), set(o));
                let mut expect: Vec<Sign> = Vec::new();
                for a in rs.iter() {
                    for b in os.iter() {
                        for s in ref_resistant(a, b) {
                            if !expect.contains(&s) {
                                expect.push(s);
                            }
                        }
                    }
                }
                let expect = SignSet::from_signs(&expect).unwrap();
                assert_eq!(heuristic_resistant_add(rs, os), expect, "r={r} o={o}");
            }
        }
    }

    #[test]
    fn resistant_add_examples() {
        // Resistant (+,-,0) combined with non-resistant (-,-,0).
        assert_eq!(
            heuristic_resistant_add_vec(vec3("+,-,0"), vec3("-,-,0")),
            vec3("[-0],-,0")
        );
        // No resistance leaves the effect untouched.
        for v in SignVec::all_definite() {
            assert_eq!(heuristic_resistant_add_vec(SignVec::ZERO, v), v);
        }
        // A resistant force cannot create an effect from nothing.
        assert_eq!(heuristic_resistant_add_vec(vec3("+,0,0"), SignVec::ZERO), SignVec::ZERO);
    }

    #[test]
    fn resistant_add_only_cancels() {
        let all = ["+", "-", "0", "[+-]", "[+0]", "[-0]", "[+-0]"];
        for r in all {
            for o in all {
                let out = heuristic_resistant_add(set(r), set(o));
                assert!(out.is_subset(set(o).union(SignSet::ZERO)), "r={r} o={o}");
            }
        }
    }

    fn arb_definite_vec() -> impl Strategy<Value = SignVec> {
        (0usize..27).prop_map(|i| SignVec::all_definite().nth(i).unwrap())
    }

    fn arb_term() -> impl Strategy<Value = ForceTerm> {
        (arb_definite_vec(), arb_definite_vec(), any::<bool>()).prop_map(|(qd, qr, resistant)| {
            ForceTerm { qd, qr, resistant, exclude_zero: false }
        })
    }

    fn arb_force_set() -> impl Strategy<Value = Vec<QualitativeForce>> {
        prop::collection::vec(
            (arb_definite_vec(), arb_definite_vec())
                .prop_map(|(qd, qr)| QualitativeForce::new(qd, qr, ObjectId::new("o"))),
            0..5,
        )
    }

    fn arb_numeric_vec() -> impl Strategy<Value = [f64; 3]> {
        let c = prop_oneof![3 => -2.0..2.0f64, 1 => Just(0.0)];
        [c.clone(), c.clone(), c]
    }

    fn q(v: [f64; 3]) -> SignVec {
        SignVec::quantize(v, QuantizationConfig::exact()).unwrap()
    }

    proptest! {
        /// The production envelope agrees with the independent reference
        /// route on arbitrary definite force sets.
        #[test]
        fn envelope_matches_reference(fs in arb_force_set()) {
            prop_assert_eq!(
                delta_envelope(&fs, DEFAULT_SUBSET_CAP).unwrap(),
                ref_envelope(&fs)
            );
        }

        /// Growing the force set can only grow the envelope.
        #[test]
        fn envelope_monotone(fs in arb_force_set(), extra in arb_force_set()) {
            let small = delta_envelope(&fs, DEFAULT_SUBSET_CAP).unwrap();
            let mut grown = fs.clone();
            grown.extend(extra);
            prop_assume!(grown.len() <= DEFAULT_SUBSET_CAP);
            let big = delta_envelope(&grown, DEFAULT_SUBSET_CAP).unwrap();
            prop_assert!(small.is_subset(&big));
        }

        /// The cancel-only heuristic never invents a new sign on any axis:
        /// every per-component marginal of the pruned envelope is contained
        /// in the plain envelope's marginal. (The joint envelopes are not
        /// comparable: treating a resistant force per component lets the
        /// heuristic drop one axis of a force while keeping another, which
        /// all-or-nothing subset selection cannot express.)
        #[test]
        fn h1_envelope_marginals_are_subsets(terms in prop::collection::vec(arb_term(), 0..5)) {
            let plain = term_envelope(&terms, EntailmentOptions { h1: false, cap: 12 }).unwrap();
            let pruned = term_envelope(&terms, EntailmentOptions { h1: true, cap: 12 }).unwrap();
            let marginal = |env: &BTreeSet<StateChange>| {
                let mut acc: Option<(SignVec, SignVec)> = None;
                for ch in env {
                    acc = Some(match acc {
                        None => (ch.dqv, ch.dqw),
                        Some((v, w)) => (v.union(ch.dqv), w.union(ch.dqw)),
                    });
                }
                acc
            };
            if let (Some((pv, pw)), Some((hv, hw))) = (marginal(&plain), marginal(&pruned)) {
                for (h, p) in hv.components().into_iter().zip(pv.components()) {
                    prop_assert!(h.is_subset(p));
                }
                for (h, p) in hw.components().into_iter().zip(pw.components()) {
                    prop_assert!(h.is_subset(p));
                }
            }
        }

        /// Entailment queries agree with envelope membership, and witnesses
        /// re-validate: folding the chosen members reproduces a cell that
        /// admits the change.
        #[test]
        fn entailment_agrees_with_envelope(
            terms in prop::collection::vec(arb_term(), 0..5),
            dqv in arb_definite_vec(),
            dqw in arb_definite_vec(),
            h1 in any::<bool>(),
        ) {
            let ch = StateChange { dqv, dqw };
            let opts = EntailmentOptions { h1, cap: 12 };
            let env = term_envelope(&terms, opts).unwrap();
            let witness = find_entailment(ch, &terms, opts).unwrap();
            prop_assert_eq!(env.contains(&ch), witness.is_some());
            if let Some(w) = witness {
                let mask: u32 = w.subset.iter().map(|i| 1u32 << i).sum();
                let mut cell = EMPTY_CELL;
                for i in fold_order(&terms, mask) {
                    let pos = w.subset.iter().position(|j| *j == i).unwrap();
                    let member = w.members[pos];
                    prop_assert!(terms[i].qd.admits(member));
                    cell = fold_step(&terms[i], member, cell, h1);
                }
                prop_assert_eq!((w.linear, w.angular), cell);
                prop_assert!(cell.0.admits(dqv) && cell.1.admits(dqw));
            }
        }

        /// Momentum form of the envelope guarantee: a change produced by
        /// actual forces is always inside the envelope of their sign forms.
        #[test]
        fn numeric_change_always_entailed(
            pairs in prop::collection::vec((arb_numeric_vec(), arb_numeric_vec()), 1..6)
        ) {
            let mut dv = [0.0f64; 3];
            let mut dw = [0.0f64; 3];
            for (f, r) in &pairs {
                for a in 0..3 {
                    dv[a] += f[a];
                }
                dw[0] += r[1] * f[2] - r[2] * f[1];
                dw[1] += r[2] * f[0] - r[0] * f[2];
                dw[2] += r[0] * f[1] - r[1] * f[0];
            }
            let observed = StateChange { dqv: q(dv), dqw: q(dw) };
            let forces: Vec<QualitativeForce> = pairs
                .iter()
                .map(|(f, r)| QualitativeForce::new(q(*f), q(*r), ObjectId::new("o")))
                .collect();
            prop_assert!(change_entailed(observed, &forces, DEFAULT_SUBSET_CAP).unwrap());
        }

        /// Rule soundness: when the numeric separation condition fails (the
        /// objects are not separating), the qualitative test must keep the
        /// contact, and a numerically admissible force direction must pass
        /// the qualitative no-attraction test.
        #[test]
        fn rule_quantization_sound(
            n in arb_numeric_vec(),
            va in arb_numeric_vec(),
            wa in arb_numeric_vec(),
            ra in arb_numeric_vec(),
            vb in arb_numeric_vec(),
            wb in arb_numeric_vec(),
            rb in arb_numeric_vec(),
            f in arb_numeric_vec(),
        ) {
            prop_assume!(n != [0.0; 3]);
            let cross = |a: [f64; 3], b: [f64; 3]| [
                a[1] * b[2] - a[2] * b[1],
                a[2] * b[0] - a[0] * b[2],
                a[0] * b[1] - a[1] * b[0],
            ];
            let xa = cross(wa, ra);
            let xb = cross(wb, rb);
            let pa = [va[0] + xa[0], va[1] + xa[1], va[2] + xa[2]];
            let pb = [vb[0] + xb[0], vb[1] + xb[1], vb[2] + xb[2]];
            if !is_vanishing_point_numeric(n, pa, pb) {
                let geom = ContactGeometry::new(q(n), None, q(ra), q(rb)).unwrap();
                let sa = ObjectState::new(q(va), q(wa));
                let sb = ObjectState::new(q(vb), q(wb));
                prop_assert!(!is_vanishing_point(sa, sb, &geom));
            }
            if satisfies_no_attraction_numeric(f, n) {
                prop_assert!(satisfies_no_attraction(q(f), q(n)));
            }
        }
    }
}
