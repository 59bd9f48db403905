//! Independent ground truth machinery.
//!
//! Two pieces: a minimal numeric impulse simulator for axis-aligned boxes
//! (just enough physics to manufacture scenes whose true cause is known),
//! and a brute-force enumerator that checks every candidate qualitative
//! action directly. Both exist to cross-examine the solver; neither is a
//! physics engine.
//!
//! The simulator integrates velocities under gravity, external impulses and
//! inelastic vertical contact impulses (no friction, no restitution, no
//! angular coupling at contacts), resolves penetration by projection, and
//! never rotates collision geometry: angular velocity evolves only through
//! the applied impulses, so the recorded ground truth stays exact.

use std::collections::BTreeSet;

use rand::RngExt;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{
    find_entailment, third_law_pair, DynamicsError, EntailmentOptions, ForceTerm, ObjectId,
    QualitativeAction, QualitativeForce,
};
use crate::scene::{
    ContactRecord, ForceSource, KnownForce, ObjectRecord, Scene, SceneError, SceneFile,
    StateRecord, StructureGraph, VertexFlag, SCENE_FORMAT,
};
use crate::sign::{QuantizationConfig, SignVec};
use crate::solver::{feasible_boxes, select_vertex, SolveError, SolverConfig};

/// Standard gravity, m/s^2.
pub const GRAVITY: f64 = 9.81;

/// The brute-force enumerator is meant for desk-scale scenes only.
pub const ENUMERATE_OBJECT_CAP: usize = 3;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("stack not at rest after settling: body {id} still has speed {speed:.3e}")]
    UnstableInitialStack { id: ObjectId, speed: f64 },
    #[error("simulation diverged: body {id} exceeded the bound {bound:.1e}")]
    NumericBlowup { id: ObjectId, bound: f64 },
    #[error("{objects} movable objects exceed the enumeration cap of {cap}")]
    CapExceeded { objects: usize, cap: usize },
    #[error("impulse point {point:?} is not on the surface of {id}")]
    PointOffSurface { id: ObjectId, point: [f64; 3] },
    #[error("no impulse made the pushed box move after {attempts} attempts")]
    ImpulseTooWeak { attempts: usize },
    #[error("unknown body {0}")]
    UnknownBody(ObjectId),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

fn add3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn scale3(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm3(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

/// An axis-aligned box body. Orientation is never integrated: the inertia
/// stays diagonal and collision geometry stays axis-aligned.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidBody {
    pub id: ObjectId,
    pub mass: f64,
    /// Diagonal inertia tensor.
    pub inertia: [f64; 3],
    /// Mass centre.
    pub position: [f64; 3],
    pub velocity: [f64; 3],
    pub angular_velocity: [f64; 3],
    pub half_extents: [f64; 3],
    pub is_static: bool,
}

impl RigidBody {
    pub fn boxy(
        id: impl Into<ObjectId>,
        half_extents: [f64; 3],
        mass: f64,
        position: [f64; 3],
    ) -> RigidBody {
        let [hx, hy, hz] = half_extents;
        // Solid cuboid inertia about its centre.
        let inertia = [
            mass / 3.0 * (hy * hy + hz * hz),
            mass / 3.0 * (hx * hx + hz * hz),
            mass / 3.0 * (hx * hx + hy * hy),
        ];
        RigidBody {
            id: id.into(),
            mass,
            inertia,
            position,
            velocity: [0.0; 3],
            angular_velocity: [0.0; 3],
            half_extents,
            is_static: false,
        }
    }

    /// A huge static slab whose top face is the plane z = 0.
    pub fn ground() -> RigidBody {
        let mut g = RigidBody::boxy("ground", [100.0, 100.0, 50.0], 1e12, [0.0, 0.0, -50.0]);
        g.is_static = true;
        g
    }

    fn top(&self) -> f64 {
        self.position[2] + self.half_extents[2]
    }

    fn bottom(&self) -> f64 {
        self.position[2] - self.half_extents[2]
    }

    fn inv_mass(&self) -> f64 {
        if self.is_static {
            0.0
        } else {
            1.0 / self.mass
        }
    }

    fn speed(&self) -> f64 {
        norm3(self.velocity).max(norm3(self.angular_velocity))
    }

    /// Whether a point lies on the box boundary, within a tolerance.
    pub fn on_surface(&self, p: [f64; 3]) -> bool {
        let d = sub3(p, self.position);
        let mut inside = true;
        let mut on_face = false;
        for (c, h) in d.iter().zip(&self.half_extents) {
            let slack = c.abs() - h;
            if slack > 1e-6 {
                inside = false;
            }
            if slack.abs() <= 1e-6 {
                on_face = true;
            }
        }
        inside && on_face
    }
}

/// An external impulse applied at a simulation step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpulseEvent {
    pub body: ObjectId,
    pub application_point: [f64; 3],
    pub impulse: [f64; 3],
    /// Step index at which the impulse fires.
    pub time: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IntegrationMode {
    /// Velocities first, then positions (stable for resting stacks).
    #[default]
    SemiImplicit,
    /// Positions advance with the pre-step velocities.
    Explicit,
}

/// xy overlap rectangle of two boxes, if any.
fn xy_overlap(a: &RigidBody, b: &RigidBody) -> Option<([f64; 2], [f64; 2])> {
    let min = [
        (a.position[0] - a.half_extents[0]).max(b.position[0] - b.half_extents[0]),
        (a.position[1] - a.half_extents[1]).max(b.position[1] - b.half_extents[1]),
    ];
    let max = [
        (a.position[0] + a.half_extents[0]).min(b.position[0] + b.half_extents[0]),
        (a.position[1] + a.half_extents[1]).min(b.position[1] + b.half_extents[1]),
    ];
    (min[0] < max[0] && min[1] < max[1]).then_some((min, max))
}

/// A detected face contact: `upper` rests on `lower`.
#[derive(Debug, Clone)]
pub struct ContactPatch {
    pub upper: usize,
    pub lower: usize,
    pub min: [f64; 2],
    pub max: [f64; 2],
    pub plane_z: f64,
}

impl ContactPatch {
    /// The four corner points of the contact region.
    pub fn corners(&self) -> [[f64; 3]; 4] {
        [
            [self.min[0], self.min[1], self.plane_z],
            [self.min[0], self.max[1], self.plane_z],
            [self.max[0], self.min[1], self.plane_z],
            [self.max[0], self.max[1], self.plane_z],
        ]
    }
}

const CONTACT_GAP: f64 = 1e-4;
/// Penetration depth up to which a pair still counts as in contact; the
/// projection step keeps actual penetration far smaller.
const CONTACT_DEPTH: f64 = 0.05;
const MAX_SOLVER_PASSES: usize = 512;

#[derive(Debug, Clone)]
pub struct World {
    pub bodies: Vec<RigidBody>,
    pub gravity: f64,
    pub mode: IntegrationMode,
    /// Any state component beyond this magnitude is a divergence.
    pub bound: f64,
    pub pending_impulses: Vec<ImpulseEvent>,
    pub step_index: usize,
}

impl World {
    pub fn new(bodies: Vec<RigidBody>) -> World {
        World {
            bodies,
            gravity: GRAVITY,
            mode: IntegrationMode::SemiImplicit,
            bound: 1e6,
            pending_impulses: Vec::new(),
            step_index: 0,
        }
    }

    pub fn body(&self, id: &ObjectId) -> Option<&RigidBody> {
        self.bodies.iter().find(|b| &b.id == id)
    }

    fn body_index(&self, id: &ObjectId) -> Result<usize, OracleError> {
        self.bodies
            .iter()
            .position(|b| &b.id == id)
            .ok_or_else(|| OracleError::UnknownBody(id.clone()))
    }

    /// Schedules an external impulse, validating that its point lies on the
    /// target body's surface.
    pub fn schedule_impulse(&mut self, event: ImpulseEvent) -> Result<(), OracleError> {
        let idx = self.body_index(&event.body)?;
        if !self.bodies[idx].on_surface(event.application_point) {
            return Err(OracleError::PointOffSurface {
                id: event.body.clone(),
                point: event.application_point,
            });
        }
        self.pending_impulses.push(event);
        Ok(())
    }

    /// Face contacts in the current configuration, bottom-up.
    pub fn detect_contacts(&self) -> Vec<ContactPatch> {
        let mut out = Vec::new();
        for i in 0..self.bodies.len() {
            for j in 0..self.bodies.len() {
                if i == j || self.bodies[i].is_static {
                    continue;
                }
                let (upper, lower) = (&self.bodies[i], &self.bodies[j]);
                let gap = upper.bottom() - lower.top();
                if !(-CONTACT_DEPTH..=CONTACT_GAP).contains(&gap) {
                    continue;
                }
                if let Some((min, max)) = xy_overlap(upper, lower) {
                    out.push(ContactPatch { upper: i, lower: j, min, max, plane_z: lower.top() });
                }
            }
        }
        out.sort_by(|a, b| a.plane_z.total_cmp(&b.plane_z).then(a.upper.cmp(&b.upper)));
        out
    }

    pub fn linear_momentum(&self) -> [f64; 3] {
        let mut p = [0.0; 3];
        for b in self.bodies.iter().filter(|b| !b.is_static) {
            p = add3(p, scale3(b.velocity, b.mass));
        }
        p
    }

    /// Advances one step. Velocity updates: gravity, scheduled impulses,
    /// then inelastic normal impulses at detected contacts (never
    /// attractive: applied only while the bodies approach).
    pub fn step(&mut self, dt: f64) -> Result<(), OracleError> {
        let explicit_positions: Option<Vec<[f64; 3]>> =
            (self.mode == IntegrationMode::Explicit).then(|| {
                self.bodies.iter().map(|b| add3(b.position, scale3(b.velocity, dt))).collect()
            });
        for b in self.bodies.iter_mut().filter(|b| !b.is_static) {
            b.velocity[2] -= self.gravity * dt;
        }
        let fire: Vec<ImpulseEvent> = self
            .pending_impulses
            .iter()
            .filter(|e| e.time == self.step_index)
            .cloned()
            .collect();
        for e in fire {
            let idx = self.body_index(&e.body)?;
            let b = &mut self.bodies[idx];
            if b.is_static {
                continue;
            }
            b.velocity = add3(b.velocity, scale3(e.impulse, 1.0 / b.mass));
            let torque = cross3(sub3(e.application_point, b.position), e.impulse);
            for ((w, t), inertia) in b.angular_velocity.iter_mut().zip(torque).zip(b.inertia) {
                *w += t / inertia;
            }
        }
        // Sequential impulses to a fixpoint: stacked chains converge only
        // geometrically, so iterate until no pair still approaches.
        let patches = self.detect_contacts();
        for _ in 0..MAX_SOLVER_PASSES {
            let mut applied = false;
            for p in &patches {
                let vn = self.bodies[p.upper].velocity[2] - self.bodies[p.lower].velocity[2];
                if vn >= -1e-12 {
                    continue;
                }
                let inv = self.bodies[p.upper].inv_mass() + self.bodies[p.lower].inv_mass();
                if inv == 0.0 {
                    continue;
                }
                let lambda = -vn / inv;
                self.bodies[p.upper].velocity[2] += lambda * self.bodies[p.upper].inv_mass();
                self.bodies[p.lower].velocity[2] -= lambda * self.bodies[p.lower].inv_mass();
                applied = true;
            }
            if !applied {
                break;
            }
        }
        match explicit_positions {
            Some(positions) => {
                for (b, pos) in self.bodies.iter_mut().zip(positions) {
                    if !b.is_static {
                        b.position = pos;
                    }
                }
            }
            None => {
                for b in self.bodies.iter_mut().filter(|b| !b.is_static) {
                    b.position = add3(b.position, scale3(b.velocity, dt));
                }
            }
        }
        // Penetration projection along z, shared by inverse mass.
        for _ in 0..MAX_SOLVER_PASSES {
            let mut any = false;
            for i in 0..self.bodies.len() {
                for j in 0..self.bodies.len() {
                    if i == j || self.bodies[i].is_static {
                        continue;
                    }
                    if xy_overlap(&self.bodies[i], &self.bodies[j]).is_none() {
                        continue;
                    }
                    let depth = self.bodies[j].top() - self.bodies[i].bottom();
                    if depth <= 0.0 || depth > self.bodies[i].half_extents[2] {
                        continue;
                    }
                    let inv = self.bodies[i].inv_mass() + self.bodies[j].inv_mass();
                    let share = self.bodies[i].inv_mass() / inv;
                    self.bodies[i].position[2] += depth * share;
                    self.bodies[j].position[2] -= depth * (1.0 - share);
                    any = true;
                }
            }
            if !any {
                break;
            }
        }
        for b in &self.bodies {
            let all = b.position.iter().chain(&b.velocity).chain(&b.angular_velocity);
            for c in all {
                if !c.is_finite() || c.abs() > self.bound {
                    return Err(OracleError::NumericBlowup { id: b.id.clone(), bound: self.bound });
                }
            }
        }
        self.step_index += 1;
        Ok(())
    }

    /// Runs settle steps and errors if anything still moves.
    pub fn settle(&mut self, steps: usize, dt: f64) -> Result<(), OracleError> {
        for _ in 0..steps {
            self.step(dt)?;
        }
        for b in self.bodies.iter().filter(|b| !b.is_static) {
            let speed = b.speed();
            if speed > 1e-7 {
                return Err(OracleError::UnstableInitialStack { id: b.id.clone(), speed });
            }
        }
        Ok(())
    }
}

/// One box of a stack description, bottom-up.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSpec {
    pub half_extents: [f64; 3],
    /// Lateral offset from the box below (from the ground for the first).
    pub offset: [f64; 2],
    pub mass: f64,
}

/// A tower of boxes resting on the ground.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackSpec {
    pub boxes: Vec<BoxSpec>,
}

impl StackSpec {
    /// Unit boxes stacked straight up.
    pub fn uniform(n: usize) -> StackSpec {
        StackSpec {
            boxes: (0..n)
                .map(|_| BoxSpec { half_extents: [0.5; 3], offset: [0.0, 0.0], mass: 1.0 })
                .collect(),
        }
    }

    /// A random statically stable stack: sizes and masses vary, lateral
    /// offsets stay small enough that every mass centre projects into the
    /// supporting face.
    pub fn random(n: usize, rng: &mut ChaCha8Rng) -> StackSpec {
        let mut boxes = Vec::with_capacity(n);
        let mut below: [f64; 2] = [0.6, 0.6];
        for level in 0..n {
            let half = [
                rng.random_range(0.3..0.7),
                rng.random_range(0.3..0.7),
                rng.random_range(0.25..0.55),
            ];
            let offset = if level == 0 {
                [0.0, 0.0]
            } else {
                let lim = [0.3 * below[0].min(half[0]), 0.3 * below[1].min(half[1])];
                [rng.random_range(-lim[0]..lim[0]), rng.random_range(-lim[1]..lim[1])]
            };
            boxes.push(BoxSpec { half_extents: half, offset, mass: rng.random_range(0.5..2.0) });
            below = [half[0], half[1]];
        }
        StackSpec { boxes }
    }

    /// Builds the world: ground plus the boxes exactly touching.
    pub fn build(&self) -> World {
        let mut bodies = vec![RigidBody::ground()];
        let mut center = [0.0, 0.0];
        let mut top = 0.0;
        for (i, spec) in self.boxes.iter().enumerate() {
            center = [center[0] + spec.offset[0], center[1] + spec.offset[1]];
            let position = [center[0], center[1], top + spec.half_extents[2]];
            bodies.push(RigidBody::boxy(
                format!("box{i}").as_str(),
                spec.half_extents,
                spec.mass,
                position,
            ));
            top += 2.0 * spec.half_extents[2];
        }
        World::new(bodies)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerateOptions {
    pub dt: f64,
    pub settle_steps: usize,
    pub horizon: usize,
    pub mode: IntegrationMode,
    /// Floor for the quantization dead-band; the actual dead-band is ten
    /// times the jitter measured after settling, if that is larger.
    pub min_epsilon: f64,
}

impl Default for GenerateOptions {
    fn default() -> GenerateOptions {
        GenerateOptions {
            dt: 0.01,
            settle_steps: 60,
            horizon: 40,
            mode: IntegrationMode::SemiImplicit,
            min_epsilon: 1e-6,
        }
    }
}

/// A generated scene with its ground-truth action (absent for a zero
/// impulse, which produces an all-quiet scene).
#[derive(Debug, Clone)]
pub struct GeneratedScene {
    pub file: SceneFile,
    pub scene: Scene,
    pub truth: Option<QualitativeAction>,
    pub epsilon: f64,
}

fn state_record(body: &RigidBody, cfg: QuantizationConfig) -> Result<StateRecord, OracleError> {
    Ok(StateRecord {
        qv: SignVec::quantize(body.velocity, cfg).map_err(SceneError::from)?,
        qw: SignVec::quantize(body.angular_velocity, cfg).map_err(SceneError::from)?,
    })
}

/// Simulates a stack hit by one impulse and packages the result as a scene
/// document plus the quantized true action.
pub fn generate_scene(
    stack: &StackSpec,
    impulse: &ImpulseEvent,
    opts: &GenerateOptions,
) -> Result<GeneratedScene, OracleError> {
    let mut world = stack.build();
    world.mode = opts.mode;
    world.settle(opts.settle_steps, opts.dt)?;
    let jitter = world
        .bodies
        .iter()
        .filter(|b| !b.is_static)
        .map(RigidBody::speed)
        .fold(0.0f64, f64::max);
    let epsilon = (10.0 * jitter).max(opts.min_epsilon);
    let cfg = QuantizationConfig::new(epsilon).map_err(SceneError::from)?;

    // Earlier snapshot: states, contacts, mass centres.
    let before: Vec<StateRecord> =
        world.bodies.iter().map(|b| state_record(b, cfg)).collect::<Result<_, _>>()?;
    let patches = world.detect_contacts();
    let mut contacts = Vec::new();
    for p in &patches {
        for corner in p.corners() {
            contacts.push(ContactRecord {
                a: world.bodies[p.upper].id.as_str().to_string(),
                b: world.bodies[p.lower].id.as_str().to_string(),
                normal: Some([0.0, 0.0, 1.0]),
                normal_q: None,
                qr_a: None,
                qr_b: None,
                point: Some(corner),
            });
        }
    }
    let mass_centers: Vec<[f64; 3]> = world.bodies.iter().map(|b| b.position).collect();

    // The true action, quantized against the pre-impulse mass centre. A
    // zero impulse is "no action".
    let body_idx = world.body_index(&impulse.body)?;
    let qd = SignVec::quantize(impulse.impulse, cfg).map_err(SceneError::from)?;
    let truth = if qd.is_zero() {
        None
    } else {
        let qr = SignVec::quantize(
            sub3(impulse.application_point, world.bodies[body_idx].position),
            cfg,
        )
        .map_err(SceneError::from)?;
        Some(QualitativeAction::new(QualitativeForce::new(qd, qr, impulse.body.clone()))?)
    };

    let mut event = impulse.clone();
    event.time = world.step_index + impulse.time;
    world.schedule_impulse(event)?;
    for _ in 0..opts.horizon.max(impulse.time + 1) {
        world.step(opts.dt)?;
    }

    let after: Vec<StateRecord> =
        world.bodies.iter().map(|b| state_record(b, cfg)).collect::<Result<_, _>>()?;
    let objects: Vec<ObjectRecord> = world
        .bodies
        .iter()
        .enumerate()
        .map(|(i, b)| ObjectRecord {
            id: b.id.as_str().to_string(),
            is_static: b.is_static,
            state_before: before[i].clone(),
            state_after: after[i].clone(),
            mass_center: Some(mass_centers[i]),
        })
        .collect();
    let file = SceneFile { format: SCENE_FORMAT.to_string(), objects, contacts, gravity: true };
    let scene = Scene::from_file(&file, cfg)?;
    Ok(GeneratedScene { file, scene, truth, epsilon })
}

/// A random scene: a random stable stack of `n` boxes hit by a random
/// impulse that makes its target move. Deterministic for a given seed;
/// retries with derived sub-seeds until the push registers.
pub fn random_scene(
    n: usize,
    seed: u64,
    opts: &GenerateOptions,
) -> Result<GeneratedScene, OracleError> {
    use rand::SeedableRng;
    const ATTEMPTS: usize = 24;
    for attempt in 0..ATTEMPTS {
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1315423911).wrapping_add(attempt as u64));
        let stack = StackSpec::random(n, &mut rng);
        let world = stack.build();
        let target = rng.random_range(1..world.bodies.len());
        let body = &world.bodies[target];
        // A point on a random face, away from the edges.
        let face = rng.random_range(0..6usize);
        let axis = face / 2;
        let side = if face % 2 == 0 { 1.0 } else { -1.0 };
        let mut point = body.position;
        point[axis] += side * body.half_extents[axis];
        for other in (0..3).filter(|o| *o != axis) {
            point[other] += rng.random_range(-0.8..0.8) * body.half_extents[other];
        }
        // A decisive push: strong lateral or upward component.
        let mut impulse = [
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-1.5..1.5),
        ];
        let kick = (0.8 + rng.random_range(0.0..1.2)) * body.mass;
        match rng.random_range(0..3usize) {
            0 => impulse[0] = kick * if impulse[0] < 0.0 { -1.0 } else { 1.0 },
            1 => impulse[1] = kick * if impulse[1] < 0.0 { -1.0 } else { 1.0 },
            _ => impulse[2] = kick * 1.5,
        }
        let event =
            ImpulseEvent { body: body.id.clone(), application_point: point, impulse, time: 0 };
        let generated = generate_scene(&stack, &event, opts)?;
        if !generated.scene.change_of(&event.body).is_zero() {
            return Ok(generated);
        }
    }
    Err(OracleError::ImpulseTooWeak { attempts: ATTEMPTS })
}

/// Sidecar document naming the true action of a generated scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruthFile {
    pub action: ActionRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionRecord {
    pub object: String,
    pub qd: SignVec,
    pub qr: SignVec,
}

impl GroundTruthFile {
    pub fn of(action: &QualitativeAction) -> GroundTruthFile {
        GroundTruthFile {
            action: ActionRecord {
                object: action.force.object.as_str().to_string(),
                qd: action.force.qd,
                qr: action.force.qr,
            },
        }
    }

    pub fn to_action(&self) -> Result<QualitativeAction, DynamicsError> {
        QualitativeAction::new(QualitativeForce::new(
            self.action.qd,
            self.action.qr,
            ObjectId::new(self.action.object.clone()),
        ))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("ground truth serializes");
        s.push('\n');
        s
    }
}

/// Worker threads for the enumerator: AIP_THREADS if set, else the
/// available parallelism.
fn thread_budget() -> usize {
    std::env::var("AIP_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|n| *n >= 1)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// Depth-first feasibility of one pinned action over the structure graph; a
/// deliberately plain re-implementation of the search, used to cross-check
/// the solver. It shares only the vertex-order rule and the feasible boxes
/// (both part of the constraint semantics), not the solver's bookkeeping.
fn wave_feasible(
    graph: &StructureGraph,
    cfg: &SolverConfig,
    action: &QualitativeAction,
) -> Result<bool, DynamicsError> {
    let mut g = graph.clone();
    g.vertices
        .get_mut(&action.force.object)
        .expect("action object in graph")
        .known_forces
        .push(KnownForce {
            qd: action.force.qd,
            qr: action.force.qr,
            source: ForceSource::Action,
            resistant: false,
        });
    wave_recurse(&g, cfg)
}

/// Applies one grouped candidate at a vertex: checks the vertex's change
/// against its known forces plus the candidate, then labels the edges,
/// propagates third-law reactions, and marks the vertex checked.
fn wave_apply(
    graph: &StructureGraph,
    vertex: &ObjectId,
    candidate: &[(usize, SignVec)],
    cfg: &SolverConfig,
) -> Result<Option<StructureGraph>, DynamicsError> {
    let v = &graph.vertices[vertex];
    let mut terms: Vec<ForceTerm> = v
        .known_forces
        .iter()
        .map(|k| ForceTerm {
            qd: k.qd,
            qr: k.qr,
            resistant: k.resistant,
            exclude_zero: matches!(k.source, ForceSource::Action),
        })
        .collect();
    for (edge, qd) in candidate {
        terms.push(ForceTerm {
            qd: *qd,
            qr: graph.edges[*edge].qr,
            resistant: true,
            exclude_zero: false,
        });
    }
    let opts = EntailmentOptions { h1: cfg.heuristics.h1, cap: cfg.subset_cap };
    if find_entailment(v.change, &terms, opts)?.is_none() {
        return Ok(None);
    }
    let mut g = graph.clone();
    for (edge, qd) in candidate {
        let pair = edge ^ 1;
        g.edges[*edge].label = Some(*qd);
        let reaction = third_law_pair(*qd);
        g.edges[pair].label = Some(reaction);
        let neighbor = g.edges[pair].to.clone();
        let qr = g.edges[pair].qr;
        g.vertices.get_mut(&neighbor).unwrap().known_forces.push(KnownForce {
            qd: reaction,
            qr,
            source: ForceSource::Reaction { edge: pair },
            resistant: false,
        });
    }
    g.vertices.get_mut(vertex).unwrap().flag = VertexFlag::Checked;
    Ok(Some(g))
}

fn wave_recurse(graph: &StructureGraph, cfg: &SolverConfig) -> Result<bool, DynamicsError> {
    let Some(vertex) = select_vertex(graph, cfg.vertex_order) else {
        return Ok(true);
    };
    let incoming = graph.unlabeled_incoming(&vertex);
    let box_lists: Vec<Vec<SignVec>> =
        incoming.iter().map(|e| feasible_boxes(graph.edges[*e].normal)).collect();
    let mut picks = vec![0usize; incoming.len()];
    'candidates: loop {
        let candidate: Vec<(usize, SignVec)> = incoming
            .iter()
            .enumerate()
            .map(|(slot, e)| (*e, box_lists[slot][picks[slot]]))
            .collect();
        if let Some(child) = wave_apply(graph, &vertex, &candidate, cfg)? {
            if wave_recurse(&child, cfg)? {
                return Ok(true);
            }
        }
        for slot in 0..picks.len() {
            picks[slot] += 1;
            if picks[slot] < box_lists[slot].len() {
                continue 'candidates;
            }
            picks[slot] = 0;
        }
        break;
    }
    Ok(false)
}

/// Brute force over every candidate qualitative action: 26 nonzero
/// directions x 27 loci per movable object (per moved object under H2).
/// Returns the set of feasible actions; this is the reference the solver
/// is compared against.
pub fn enumerate_actions(
    scene: &Scene,
    cfg: &SolverConfig,
) -> Result<BTreeSet<QualitativeAction>, OracleError> {
    let movable: Vec<ObjectId> =
        scene.objects.iter().filter(|o| !o.is_static).map(|o| o.id.clone()).collect();
    if movable.len() > ENUMERATE_OBJECT_CAP {
        return Err(OracleError::CapExceeded { objects: movable.len(), cap: ENUMERATE_OBJECT_CAP });
    }
    let mut graph = scene.build_graph()?;
    graph.prune_vanishing();
    let candidates: Vec<ObjectId> =
        if cfg.heuristics.h2 { scene.moved_objects() } else { movable };
    let mut actions = Vec::new();
    for object in &candidates {
        for qr in SignVec::all_definite() {
            for qd in SignVec::all_definite().filter(|qd| !qd.is_zero()) {
                actions.push(
                    QualitativeAction::new(QualitativeForce::new(qd, qr, object.clone()))
                        .expect("definite nonzero"),
                );
            }
        }
    }
    let budget = thread_budget().min(actions.len().max(1));
    if budget <= 1 {
        let mut out = BTreeSet::new();
        for a in &actions {
            if wave_feasible(&graph, cfg, a)? {
                out.insert(a.clone());
            }
        }
        return Ok(out);
    }
    let chunk = actions.len().div_ceil(budget);
    let results: Vec<Result<BTreeSet<QualitativeAction>, DynamicsError>> =
        std::thread::scope(|scope| {
            let graph = &graph;
            let handles: Vec<_> = actions
                .chunks(chunk)
                .map(|slice| {
                    scope.spawn(move || {
                        let mut local = BTreeSet::new();
                        for a in slice {
                            if wave_feasible(graph, cfg, a)? {
                                local.insert(a.clone());
                            }
                        }
                        Ok(local)
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        });
    let mut out = BTreeSet::new();
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}
