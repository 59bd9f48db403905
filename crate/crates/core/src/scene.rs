//! Scene data model and the structure graph.
//!
//! A scene lists objects with their qualitative states at two time points
//! and the contact points between them. The on-disk form is a single JSON
//! document (format tag `aip-scene/1`); geometry may be given numerically
//! (normals, contact points, mass centres) and is quantized on load, or
//! directly in sign form.
//!
//! The structure graph has one vertex per object and one pair of directed
//! edges per contact point; an edge into a vertex is a force variable on
//! that object. The fixed orientation convention: a contact's normal points
//! from `b` into `a`, i.e. it is the direction along which `b` pushes `a`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{
    is_vanishing_point, ContactGeometry, DynamicsError, ObjectId, ObjectState, QualitativeForce,
    StateChange,
};
use crate::sign::{QuantizationConfig, SignError, SignVec};

/// Format tag required in every scene file.
pub const SCENE_FORMAT: &str = "aip-scene/1";

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("scene JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("field \"format\" is {found:?}, expected {expected:?}")]
    BadFormat { found: String, expected: &'static str },
    #[error("field \"objects\": duplicate id {0}")]
    DuplicateId(ObjectId),
    #[error("contact {index}: field {field:?} references unknown object {id}")]
    UnknownObject { index: usize, field: &'static str, id: ObjectId },
    #[error("contact {index}: fields \"a\" and \"b\" name the same object {id}")]
    SelfContact { index: usize, id: ObjectId },
    #[error("object {0}: static objects must be at rest in both states")]
    StaticMoves(ObjectId),
    #[error("object {id}: state components must be definite signs, got {field} = {value}")]
    IndefiniteState { id: ObjectId, field: &'static str, value: SignVec },
    #[error("object {id}: before/after states do not determine a definite change: {source}")]
    IndefiniteChange { id: ObjectId, source: DynamicsError },
    #[error("contact {index}: needs field \"normal\" or \"normal_q\"")]
    MissingNormal { index: usize },
    #[error(
        "contact {index}: field {field:?} is absent and cannot be derived \
         (needs \"point\" and the object's \"mass_center\")"
    )]
    MissingQr { index: usize, field: &'static str },
    #[error(
        "contact {index}: quantized \"normal\" {quantized} disagrees with \"normal_q\" {declared}"
    )]
    NormalMismatch { index: usize, quantized: SignVec, declared: SignVec },
    #[error("contact {index}: {source}")]
    BadGeometry { index: usize, source: DynamicsError },
    #[error(transparent)]
    Sign(#[from] SignError),
}

fn default_true() -> bool {
    true
}

/// One object's qualitative state in the file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateRecord {
    pub qv: SignVec,
    pub qw: SignVec,
}

/// One object in the file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectRecord {
    pub id: String,
    #[serde(rename = "static", default)]
    pub is_static: bool,
    pub state_before: StateRecord,
    pub state_after: StateRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass_center: Option<[f64; 3]>,
}

/// One contact point in the file format. The normal points from `b` into
/// `a`; `qr_a`/`qr_b` may be given directly or derived from `point` and the
/// objects' mass centres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContactRecord {
    pub a: String,
    pub b: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normal: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normal_q: Option<SignVec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qr_a: Option<SignVec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qr_b: Option<SignVec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<[f64; 3]>,
}

/// The on-disk scene document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub format: String,
    pub objects: Vec<ObjectRecord>,
    pub contacts: Vec<ContactRecord>,
    #[serde(default = "default_true")]
    pub gravity: bool,
}

/// An object with its observed states. Static objects (the ground) never
/// move; they absorb reaction forces and receive no gravity variable.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneObject {
    pub id: ObjectId,
    pub state_before: ObjectState,
    pub state_after: ObjectState,
    pub mass_center: Option<[f64; 3]>,
    pub is_static: bool,
}

/// A contact point with resolved geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct Contact {
    pub object_a: ObjectId,
    pub object_b: ObjectId,
    pub geometry: ContactGeometry,
    pub point_id: String,
    pub numeric_point: Option<[f64; 3]>,
}

/// A validated scene: objects sorted by id, contacts in canonical order,
/// every object's state change definite.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub objects: Vec<SceneObject>,
    pub contacts: Vec<Contact>,
    pub gravity: bool,
    changes: BTreeMap<ObjectId, StateChange>,
}

impl Scene {
    /// Parses and validates a scene document, quantizing numeric geometry
    /// with the given dead-band.
    pub fn parse_json(json: &str, cfg: QuantizationConfig) -> Result<Scene, SceneError> {
        let file: SceneFile = serde_json::from_str(json)?;
        Scene::from_file(&file, cfg)
    }

    pub fn from_file(file: &SceneFile, cfg: QuantizationConfig) -> Result<Scene, SceneError> {
        if file.format != SCENE_FORMAT {
            return Err(SceneError::BadFormat {
                found: file.format.clone(),
                expected: SCENE_FORMAT,
            });
        }
        let mut objects: Vec<SceneObject> = Vec::with_capacity(file.objects.len());
        for rec in &file.objects {
            let id = ObjectId::new(rec.id.clone());
            if objects.iter().any(|o| o.id == id) {
                return Err(SceneError::DuplicateId(id));
            }
            let state_before = ObjectState::new(rec.state_before.qv, rec.state_before.qw);
            let state_after = ObjectState::new(rec.state_after.qv, rec.state_after.qw);
            for (field, v) in [
                ("state_before.qv", state_before.qv),
                ("state_before.qw", state_before.qw),
                ("state_after.qv", state_after.qv),
                ("state_after.qw", state_after.qw),
            ] {
                if !v.is_definite() {
                    return Err(SceneError::IndefiniteState { id, field, value: v });
                }
            }
            if rec.is_static && !(state_before.is_at_rest() && state_after.is_at_rest()) {
                return Err(SceneError::StaticMoves(id));
            }
            objects.push(SceneObject {
                id,
                state_before,
                state_after,
                mass_center: rec.mass_center,
                is_static: rec.is_static,
            });
        }
        objects.sort_by(|a, b| a.id.cmp(&b.id));

        let find = |index: usize, field: &'static str, name: &str| {
            let id = ObjectId::new(name);
            objects
                .iter()
                .find(|o| o.id == id)
                .cloned()
                .ok_or(SceneError::UnknownObject { index, field, id })
        };
        let mut contacts: Vec<Contact> = Vec::with_capacity(file.contacts.len());
        for (index, rec) in file.contacts.iter().enumerate() {
            let obj_a = find(index, "a", &rec.a)?;
            let obj_b = find(index, "b", &rec.b)?;
            if obj_a.id == obj_b.id {
                return Err(SceneError::SelfContact { index, id: obj_a.id });
            }
            let normal_q = match (rec.normal, rec.normal_q) {
                (Some(n), declared) => {
                    let quantized = SignVec::quantize(n, cfg)?;
                    if let Some(declared) = declared {
                        if quantized != declared {
                            return Err(SceneError::NormalMismatch { index, quantized, declared });
                        }
                    }
                    quantized
                }
                (None, Some(declared)) => declared,
                (None, None) => return Err(SceneError::MissingNormal { index }),
            };
            let derive_qr = |given: Option<SignVec>,
                             obj: &SceneObject,
                             field: &'static str|
             -> Result<SignVec, SceneError> {
                if let Some(qr) = given {
                    return Ok(qr);
                }
                match (rec.point, obj.mass_center) {
                    (Some(p), Some(mc)) => {
                        Ok(SignVec::quantize([p[0] - mc[0], p[1] - mc[1], p[2] - mc[2]], cfg)?)
                    }
                    _ => Err(SceneError::MissingQr { index, field }),
                }
            };
            let qr_a = derive_qr(rec.qr_a, &obj_a, "qr_a")?;
            let qr_b = derive_qr(rec.qr_b, &obj_b, "qr_b")?;
            let geometry = ContactGeometry::new(normal_q, rec.normal, qr_a, qr_b)
                .map_err(|source| SceneError::BadGeometry { index, source })?;
            contacts.push(Contact {
                object_a: obj_a.id,
                object_b: obj_b.id,
                geometry,
                point_id: String::new(),
                numeric_point: rec.point,
            });
        }
        // Canonical contact order, independent of the input ordering.
        contacts.sort_by(|l, r| {
            let key = |c: &Contact| {
                (
                    c.object_a.clone(),
                    c.object_b.clone(),
                    c.geometry.normal_q,
                    c.geometry.qr_on_a,
                    c.geometry.qr_on_b,
                    c.numeric_point.map(|p| p.map(f64::to_bits)),
                )
            };
            key(l).cmp(&key(r))
        });
        for (i, c) in contacts.iter_mut().enumerate() {
            c.point_id = format!("c{i}");
        }

        let mut changes = BTreeMap::new();
        for o in &objects {
            let change = StateChange::between(o.state_before, o.state_after)
                .map_err(|source| SceneError::IndefiniteChange { id: o.id.clone(), source })?;
            changes.insert(o.id.clone(), change);
        }
        Ok(Scene { objects, contacts, gravity: file.gravity, changes })
    }

    /// The observed state change of an object.
    pub fn change_of(&self, id: &ObjectId) -> StateChange {
        self.changes[id]
    }

    pub fn object(&self, id: &ObjectId) -> Option<&SceneObject> {
        self.objects.iter().find(|o| &o.id == id)
    }

    /// Objects whose state changed between the two time points.
    pub fn moved_objects(&self) -> Vec<ObjectId> {
        self.objects
            .iter()
            .filter(|o| !self.changes[&o.id].is_zero())
            .map(|o| o.id.clone())
            .collect()
    }

    /// Canonical file form: objects sorted by id, contacts in canonical
    /// order, derived sign geometry written out.
    pub fn to_file(&self) -> SceneFile {
        SceneFile {
            format: SCENE_FORMAT.to_string(),
            objects: self
                .objects
                .iter()
                .map(|o| ObjectRecord {
                    id: o.id.as_str().to_string(),
                    is_static: o.is_static,
                    state_before: StateRecord { qv: o.state_before.qv, qw: o.state_before.qw },
                    state_after: StateRecord { qv: o.state_after.qv, qw: o.state_after.qw },
                    mass_center: o.mass_center,
                })
                .collect(),
            contacts: self
                .contacts
                .iter()
                .map(|c| ContactRecord {
                    a: c.object_a.as_str().to_string(),
                    b: c.object_b.as_str().to_string(),
                    normal: c.geometry.numeric_normal,
                    normal_q: Some(c.geometry.normal_q),
                    qr_a: Some(c.geometry.qr_on_a),
                    qr_b: Some(c.geometry.qr_on_b),
                    point: c.numeric_point,
                })
                .collect(),
            gravity: self.gravity,
        }
    }

    /// Canonical JSON encoding, newline-terminated.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_file()).expect("scene serializes");
        s.push('\n');
        s
    }

    /// Builds the structure graph using this scene's gravity flag.
    pub fn build_graph(&self) -> Result<StructureGraph, SceneError> {
        build_graph(&self.objects, &self.contacts, self.gravity)
    }
}

/// Number of candidate qualitative actions for a scene: 26 nonzero definite
/// directions times 27 definite loci per non-static object.
pub fn count_candidate_actions(objects: &[SceneObject]) -> u64 {
    26 * 27 * objects.iter().filter(|o| !o.is_static).count() as u64
}

/// Vertex search flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexFlag {
    ToCheck,
    Checked,
}

/// Where a known force on a vertex came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ForceSource {
    Gravity,
    /// The hypothesized external action.
    Action,
    /// Assigned to the given edge while branching on this vertex.
    Assigned { edge: usize },
    /// Propagated onto this vertex by the third law from the paired edge.
    Reaction { edge: usize },
}

/// A force known to act on a vertex's object. `qd` may be a grouped
/// (set-valued) direction.
#[derive(Debug, Clone, PartialEq)]
pub struct KnownForce {
    pub qd: SignVec,
    pub qr: SignVec,
    pub source: ForceSource,
    /// Assigned during branching rather than forced by the third law;
    /// cancel-only under Heuristic 1.
    pub resistant: bool,
}

/// A structure-graph vertex: one object plus its search state.
#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub state_before: ObjectState,
    pub state_after: ObjectState,
    pub change: StateChange,
    pub is_static: bool,
    pub flag: VertexFlag,
    pub known_forces: Vec<KnownForce>,
}

/// A directed edge: the contact-force variable on object `to` at one
/// contact point. Edges come in pairs `(2k, 2k+1)` per contact; the paired
/// edge index is `index ^ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub from: ObjectId,
    pub to: ObjectId,
    pub point_id: String,
    /// Direction from `to`'s mass centre to the contact point.
    pub qr: SignVec,
    /// Contact normal on `to` (pointing into `to` from `from`).
    pub normal: SignVec,
    /// Assigned force direction on `to`, possibly grouped.
    pub label: Option<SignVec>,
}

/// Directed multigraph over the scene's objects; search state lives in the
/// vertex flags, known-force sets, and edge labels. Cloned on branch.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureGraph {
    pub vertices: BTreeMap<ObjectId, Vertex>,
    pub edges: Vec<Edge>,
    /// Point ids of contacts removed as vanishing points.
    pub pruned: Vec<String>,
}

/// Constructs the structure graph: every vertex to-check and labeled with
/// its earlier state, gravity in the known forces of each non-static object
/// when requested, and an unlabeled edge pair per contact.
pub fn build_graph(
    objects: &[SceneObject],
    contacts: &[Contact],
    include_gravity: bool,
) -> Result<StructureGraph, SceneError> {
    let mut vertices: BTreeMap<ObjectId, Vertex> = BTreeMap::new();
    for o in objects {
        if o.is_static && !(o.state_before.is_at_rest() && o.state_after.is_at_rest()) {
            return Err(SceneError::StaticMoves(o.id.clone()));
        }
        let change = StateChange::between(o.state_before, o.state_after)
            .map_err(|source| SceneError::IndefiniteChange { id: o.id.clone(), source })?;
        let mut known_forces = Vec::new();
        if include_gravity && !o.is_static {
            let g = QualitativeForce::gravity(o.id.clone());
            known_forces.push(KnownForce {
                qd: g.qd,
                qr: g.qr,
                source: ForceSource::Gravity,
                resistant: false,
            });
        }
        let vertex = Vertex {
            state_before: o.state_before,
            state_after: o.state_after,
            change,
            is_static: o.is_static,
            flag: VertexFlag::ToCheck,
            known_forces,
        };
        if vertices.insert(o.id.clone(), vertex).is_some() {
            return Err(SceneError::DuplicateId(o.id.clone()));
        }
    }
    let mut edges = Vec::with_capacity(contacts.len() * 2);
    for (index, c) in contacts.iter().enumerate() {
        for (field, id) in [("a", &c.object_a), ("b", &c.object_b)] {
            if !vertices.contains_key(id) {
                return Err(SceneError::UnknownObject { index, field, id: id.clone() });
            }
        }
        if c.object_a == c.object_b {
            return Err(SceneError::SelfContact { index, id: c.object_a.clone() });
        }
        // Force on a, exerted by b: along the stored normal.
        edges.push(Edge {
            from: c.object_b.clone(),
            to: c.object_a.clone(),
            point_id: c.point_id.clone(),
            qr: c.geometry.qr_on_a,
            normal: c.geometry.normal_q,
            label: None,
        });
        // Force on b, exerted by a: along the inverted normal.
        edges.push(Edge {
            from: c.object_a.clone(),
            to: c.object_b.clone(),
            point_id: c.point_id.clone(),
            qr: c.geometry.qr_on_b,
            normal: c.geometry.normal_q.inverse(),
            label: None,
        });
    }
    Ok(StructureGraph { vertices, edges, pruned: Vec::new() })
}

impl StructureGraph {
    /// Removes every edge pair whose contact is a vanishing point at the
    /// earlier states. Only valid before any edge has been labeled.
    pub fn prune_vanishing(&mut self) {
        debug_assert!(self.edges.iter().all(|e| e.label.is_none()));
        let mut keep = Vec::with_capacity(self.edges.len());
        for pair in self.edges.chunks(2) {
            let (on_a, on_b) = (&pair[0], &pair[1]);
            let geom = ContactGeometry {
                normal_q: on_a.normal,
                numeric_normal: None,
                qr_on_a: on_a.qr,
                qr_on_b: on_b.qr,
            };
            let state_a = self.vertices[&on_a.to].state_before;
            let state_b = self.vertices[&on_b.to].state_before;
            if is_vanishing_point(state_a, state_b, &geom) {
                self.pruned.push(on_a.point_id.clone());
            } else {
                keep.push(on_a.clone());
                keep.push(on_b.clone());
            }
        }
        self.edges = keep;
    }

    /// Indices of unlabeled edges into the given vertex, ascending.
    pub fn unlabeled_incoming(&self, id: &ObjectId) -> Vec<usize> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| &e.to == id && e.label.is_none())
            .map(|(i, _)| i)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sign::Sign;

    fn resting(id: &str) -> ObjectRecord {
        ObjectRecord {
            id: id.to_string(),
            is_static: false,
            state_before: StateRecord { qv: SignVec::ZERO, qw: SignVec::ZERO },
            state_after: StateRecord { qv: SignVec::ZERO, qw: SignVec::ZERO },
            mass_center: None,
        }
    }

    fn contact(a: &str, b: &str) -> ContactRecord {
        ContactRecord {
            a: a.to_string(),
            b: b.to_string(),
            normal: None,
            normal_q: Some(SignVec::new(Sign::Zero, Sign::Zero, Sign::Plus)),
            qr_a: Some(SignVec::new(Sign::Zero, Sign::Zero, Sign::Minus)),
            qr_b: Some(SignVec::new(Sign::Zero, Sign::Zero, Sign::Plus)),
            point: None,
        }
    }

    fn scene_of(file: &SceneFile) -> Scene {
        Scene::from_file(file, QuantizationConfig::default()).unwrap()
    }

    fn two_block_file() -> SceneFile {
        SceneFile {
            format: SCENE_FORMAT.to_string(),
            objects: vec![resting("a"), resting("b")],
            contacts: vec![contact("a", "b")],
            gravity: true,
        }
    }

    #[test]
    fn builds_two_block_graph() {
        let scene = scene_of(&two_block_file());
        let graph = scene.build_graph().unwrap();
        assert_eq!(graph.vertices.len(), 2);
        assert_eq!(graph.edges.len(), 2);
        assert!(graph.vertices.values().all(|v| v.flag == VertexFlag::ToCheck));
        // Edge orientation: first edge is the force on a, pushed by b.
        assert_eq!(graph.edges[0].to, ObjectId::new("a"));
        assert_eq!(graph.edges[0].from, ObjectId::new("b"));
        assert_eq!(graph.edges[1].normal, graph.edges[0].normal.inverse());
    }

    #[test]
    fn gravity_goes_to_movable_objects() {
        let mut file = two_block_file();
        file.objects[1].is_static = true;
        file.contacts.clear();
        let scene = scene_of(&file);
        let graph = scene.build_graph().unwrap();
        let a = &graph.vertices[&ObjectId::new("a")];
        assert_eq!(a.known_forces.len(), 1);
        assert_eq!(a.known_forces[0].source, ForceSource::Gravity);
        assert_eq!(a.known_forces[0].qd, QualitativeForce::gravity(ObjectId::new("a")).qd);
        assert!(graph.vertices[&ObjectId::new("b")].known_forces.is_empty());
        // Gravity off: no known forces at all.
        file.gravity = false;
        let graph = scene_of(&file).build_graph().unwrap();
        assert!(graph.vertices.values().all(|v| v.known_forces.is_empty()));
    }

    #[test]
    fn many_blocks_many_edges() {
        let mut file = SceneFile {
            format: SCENE_FORMAT.to_string(),
            objects: (0..15).map(|i| resting(&format!("o{i:02}"))).collect(),
            contacts: Vec::new(),
            gravity: true,
        };
        for i in 0..14 {
            file.contacts.push(contact(&format!("o{:02}", i + 1), &format!("o{i:02}")));
        }
        let scene = scene_of(&file);
        let graph = scene.build_graph().unwrap();
        assert_eq!(graph.vertices.len(), 15);
        assert_eq!(graph.edges.len(), 28);
        assert_eq!(count_candidate_actions(&scene.objects), 10530);
    }

    #[test]
    fn candidate_action_counts() {
        let file = two_block_file();
        let mut scene = scene_of(&file);
        scene.objects.truncate(1);
        assert_eq!(count_candidate_actions(&scene.objects), 702);
        scene.objects.clear();
        assert_eq!(count_candidate_actions(&scene.objects), 0);
    }

    #[test]
    fn prune_keeps_resting_contacts() {
        let scene = scene_of(&two_block_file());
        let mut graph = scene.build_graph().unwrap();
        graph.prune_vanishing();
        assert_eq!(graph.edges.len(), 2);
        assert!(graph.pruned.is_empty());
    }

    #[test]
    fn prune_removes_separating_contact() {
        let mut file = two_block_file();
        // a is lifting straight off b at t1 (and has stopped by t2, so the
        // observed change stays definite).
        file.objects[0].state_before.qv = SignVec::new(Sign::Zero, Sign::Zero, Sign::Plus);
        let scene = scene_of(&file);
        let mut graph = scene.build_graph().unwrap();
        graph.prune_vanishing();
        assert!(graph.edges.is_empty());
        assert_eq!(graph.pruned, vec!["c0".to_string()]);
        // Empty graph stays empty.
        let mut empty = build_graph(&[], &[], true).unwrap();
        empty.prune_vanishing();
        assert!(empty.edges.is_empty());
    }

    #[test]
    fn prune_agrees_with_the_rule_on_random_states() {
        // Pruning must remove exactly the contacts the vanishing-point rule
        // condemns, whatever the states are.
        let definite: Vec<SignVec> = SignVec::all_definite().collect();
        let mut pick = 7usize;
        let mut next = || {
            pick = (pick * 31 + 17) % definite.len();
            definite[pick]
        };
        for _ in 0..200 {
            let mut file = two_block_file();
            file.objects[0].state_before = StateRecord { qv: next(), qw: next() };
            file.objects[1].state_before = StateRecord { qv: next(), qw: next() };
            // Matching after-states keep the change definite: back to rest.
            file.objects[0].state_after = StateRecord { qv: SignVec::ZERO, qw: SignVec::ZERO };
            file.objects[1].state_after = StateRecord { qv: SignVec::ZERO, qw: SignVec::ZERO };
            let Ok(scene) = Scene::from_file(&file, QuantizationConfig::default()) else {
                continue; // indefinite change; irrelevant here
            };
            let mut graph = scene.build_graph().unwrap();
            graph.prune_vanishing();
            let c = &scene.contacts[0];
            let vanishing = crate::dynamics::is_vanishing_point(
                scene.object(&c.object_a).unwrap().state_before,
                scene.object(&c.object_b).unwrap().state_before,
                &c.geometry,
            );
            assert_eq!(graph.edges.is_empty(), vanishing, "{:?}", file.objects[0].state_before);
            assert_eq!(graph.pruned.len(), usize::from(vanishing));
        }
    }

    #[test]
    fn input_order_does_not_matter() {
        let mut shuffled = two_block_file();
        shuffled.objects.reverse();
        assert_eq!(scene_of(&two_block_file()), scene_of(&shuffled));
    }

    #[test]
    fn json_round_trip_is_stable() {
        let scene = scene_of(&two_block_file());
        let json = scene.to_json();
        let back = Scene::parse_json(&json, QuantizationConfig::default()).unwrap();
        assert_eq!(back, scene);
        assert_eq!(back.to_json(), json);
    }

    #[test]
    fn numeric_geometry_is_quantized() {
        let mut file = two_block_file();
        file.objects[0].mass_center = Some([0.0, 0.0, 1.5]);
        file.objects[1].mass_center = Some([0.0, 0.0, 0.5]);
        file.contacts[0] = ContactRecord {
            a: "a".into(),
            b: "b".into(),
            normal: Some([0.0, 0.0, 1.0]),
            normal_q: None,
            qr_a: None,
            qr_b: None,
            point: Some([0.4, -0.4, 1.0]),
        };
        let scene = scene_of(&file);
        let g = &scene.contacts[0].geometry;
        assert_eq!(g.normal_q, SignVec::new(Sign::Zero, Sign::Zero, Sign::Plus));
        assert_eq!(g.qr_on_a, SignVec::new(Sign::Plus, Sign::Minus, Sign::Minus));
        assert_eq!(g.qr_on_b, SignVec::new(Sign::Plus, Sign::Minus, Sign::Plus));
    }

    #[test]
    fn rejects_malformed_scenes() {
        let cfg = QuantizationConfig::default();
        // Unknown field.
        let err = Scene::parse_json(
            r#"{"format":"aip-scene/1","objects":[],"contacts":[],"bogus":1}"#,
            cfg,
        )
        .unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
        // Wrong format tag.
        let mut file = two_block_file();
        file.format = "aip-scene/2".into();
        assert!(matches!(Scene::from_file(&file, cfg), Err(SceneError::BadFormat { .. })));
        // Duplicate object ids.
        let mut file = two_block_file();
        file.objects[1].id = "a".into();
        assert!(matches!(Scene::from_file(&file, cfg), Err(SceneError::DuplicateId(_))));
        // Unknown contact object.
        let mut file = two_block_file();
        file.contacts[0].b = "ghost".into();
        assert!(matches!(Scene::from_file(&file, cfg), Err(SceneError::UnknownObject { .. })));
        // Self contact.
        let mut file = two_block_file();
        file.contacts[0].b = "a".into();
        assert!(matches!(Scene::from_file(&file, cfg), Err(SceneError::SelfContact { .. })));
        // Static object that moves.
        let mut file = two_block_file();
        file.objects[0].is_static = true;
        file.objects[0].state_after.qv = SignVec::new(Sign::Plus, Sign::Zero, Sign::Zero);
        assert!(matches!(Scene::from_file(&file, cfg), Err(SceneError::StaticMoves(_))));
        // Set-valued observed state.
        let mut file = two_block_file();
        file.objects[0].state_after.qv = SignVec::new(
            crate::sign::SignSet::ANY,
            crate::sign::SignSet::ZERO,
            crate::sign::SignSet::ZERO,
        );
        assert!(matches!(Scene::from_file(&file, cfg), Err(SceneError::IndefiniteState { .. })));
        // Missing normal.
        let mut file = two_block_file();
        file.contacts[0].normal_q = None;
        assert!(matches!(Scene::from_file(&file, cfg), Err(SceneError::MissingNormal { .. })));
        // Missing qr with no way to derive it.
        let mut file = two_block_file();
        file.contacts[0].qr_a = None;
        assert!(matches!(
            Scene::from_file(&file, cfg),
            Err(SceneError::MissingQr { field: "qr_a", .. })
        ));
        // Declared normal_q disagreeing with the numeric normal.
        let mut file = two_block_file();
        file.contacts[0].normal = Some([0.0, 0.0, -1.0]);
        assert!(matches!(Scene::from_file(&file, cfg), Err(SceneError::NormalMismatch { .. })));
        // Indefinite change: same nonzero sign at both time points.
        let mut file = two_block_file();
        let v = SignVec::new(Sign::Plus, Sign::Zero, Sign::Zero);
        file.objects[0].state_before.qv = v;
        file.objects[0].state_after.qv = v;
        assert!(matches!(Scene::from_file(&file, cfg), Err(SceneError::IndefiniteChange { .. })));
    }
}
