//! Complete depth-first search over the structure graph.
//!
//! The constraint problem has one force variable per directed edge plus a
//! gravity variable per movable object and one action variable. A solution
//! assigns every variable so that (C1) each object's observed state change
//! lies in the envelope of its assigned forces and (C2) every value is
//! consistent with the three contact rules.
//!
//! Branching works on grouped assignments: a contact variable's candidate
//! value is a box of definite directions (the no-attraction-feasible set,
//! decomposed into boxes), and the root hypothesizes one grouped action per
//! object and locus. A group satisfies a constraint as soon as any definite
//! member does; every emitted solution carries a per-object witness — the
//! entailing subset and the definite members used — so it can be re-checked
//! from scratch.
//!
//! Two optional heuristics prune the search: H1 combines forces assigned
//! during branching (as opposed to propagated reactions) with cancel-only
//! semantics, and H2 restricts the action to objects that actually moved.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{
    find_entailment, heuristic_resistant_add_vec, satisfies_no_attraction, third_law_pair,
    DynamicsError, EntailmentOptions, ForceTerm, ObjectId, QualitativeAction, QualitativeForce,
    StateChange, DEFAULT_SUBSET_CAP,
};
use crate::scene::{ForceSource, KnownForce, Scene, SceneError, StructureGraph, VertexFlag};
use crate::sign::{Sign, SignSet, SignVec};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("heuristic 2 is enabled but no object changed state")]
    NoMovedObject,
    #[error("subset_cap must be at least 1, got {0}")]
    BadCap(usize),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Scene(#[from] SceneError),
}

/// Which pruning heuristics are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Heuristics {
    /// Cancel-only combination for forces assigned during branching.
    pub h1: bool,
    /// Hypothesize actions only on objects that moved.
    pub h2: bool,
}

impl Heuristics {
    pub const NONE: Heuristics = Heuristics { h1: false, h2: false };
    pub const H1: Heuristics = Heuristics { h1: true, h2: false };
    pub const H2: Heuristics = Heuristics { h1: false, h2: true };
    pub const BOTH: Heuristics = Heuristics { h1: true, h2: true };
    /// Every setting, weakest pruning first.
    pub const ALL: [Heuristics; 4] = [Self::NONE, Self::H1, Self::H2, Self::BOTH];
}

impl fmt::Display for Heuristics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.h1, self.h2) {
            (false, false) => f.write_str("none"),
            (true, false) => f.write_str("h1"),
            (false, true) => f.write_str("h2"),
            (true, true) => f.write_str("h1h2"),
        }
    }
}

impl FromStr for Heuristics {
    type Err = String;

    fn from_str(s: &str) -> Result<Heuristics, String> {
        match s {
            "none" => Ok(Heuristics::NONE),
            "h1" => Ok(Heuristics::H1),
            "h2" => Ok(Heuristics::H2),
            "h1h2" => Ok(Heuristics::BOTH),
            other => Err(format!("unknown heuristics {other:?}, expected none|h1|h2|h1h2")),
        }
    }
}

/// Vertex selection policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum VertexOrder {
    /// Prefer vertices that already carry search-derived forces (the action
    /// or propagated reactions), so exploration follows the causal wave.
    #[default]
    PreferKnown,
    /// Strict id order.
    Canonical,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    pub heuristics: Heuristics,
    pub subset_cap: usize,
    pub max_solutions: Option<usize>,
    pub vertex_order: VertexOrder,
}

impl Default for SolverConfig {
    fn default() -> SolverConfig {
        SolverConfig {
            heuristics: Heuristics::BOTH,
            subset_cap: DEFAULT_SUBSET_CAP,
            max_solutions: None,
            vertex_order: VertexOrder::PreferKnown,
        }
    }
}

impl SolverConfig {
    pub fn with_heuristics(heuristics: Heuristics) -> SolverConfig {
        SolverConfig { heuristics, ..SolverConfig::default() }
    }
}

/// What kind of force a variable stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VariableKind {
    Action,
    Contact,
    Gravity,
}

/// A force variable with its (grouped) domain, for inspection and reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceVariable {
    pub var_id: String,
    pub kind: VariableKind,
    /// Grouped domain values; each `qd` is a box of definite directions.
    pub domain: Vec<QualitativeForce>,
}

/// One variable's assigned value in a solution. `value.qd` may be a box;
/// the group satisfies a constraint as soon as any member does.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupedAssignment {
    pub var_id: String,
    pub value: QualitativeForce,
    /// Assigned during branching (as opposed to third-law propagation);
    /// cancel-only under H1.
    pub resistant: bool,
}

/// One force in an entailment witness.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TraceForce {
    pub var_id: String,
    /// The definite direction the witness chose from the group.
    pub member: SignVec,
    pub qr: SignVec,
    pub resistant: bool,
}

/// Per-object derivation: the subset of forces whose envelope cell admits
/// the observed change.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ObjectTrace {
    pub object: ObjectId,
    pub change: StateChange,
    pub subset: Vec<TraceForce>,
    pub linear: SignVec,
    pub angular: SignVec,
}

/// A full assignment satisfying C1 and C2, with a per-object derivation.
///
/// `action` is the definite witness member of the grouped action variable;
/// the group itself is in `assignments["action"]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Solution {
    pub action: QualitativeAction,
    pub assignments: BTreeMap<String, GroupedAssignment>,
    pub trace: Vec<ObjectTrace>,
    /// Whether C1 was evaluated with the cancel-only heuristic.
    pub h1: bool,
}

pub const ACTION_VAR: &str = "action";

fn gravity_var(id: &ObjectId) -> String {
    format!("gravity:{id}")
}

fn edge_var(graph: &StructureGraph, edge: usize) -> String {
    let e = &graph.edges[edge];
    format!("force:{}:{}->{}", e.point_id, e.from, e.to)
}

/// The no-attraction-feasible directions for a contact normal, decomposed
/// into boxes (sign vectors with set components). The boxes are disjoint
/// and cover the feasible set exactly; the zero direction is always inside
/// one of them, so "no force here" stays expressible.
pub fn feasible_boxes(normal: SignVec) -> Vec<SignVec> {
    // Group members by x, then split each x-class by the z-set its y maps
    // to; x-classes with identical (y, z) structure merge.
    let mut per_x: BTreeMap<Sign, BTreeMap<Sign, Vec<Sign>>> = BTreeMap::new();
    for qd in SignVec::all_definite() {
        if !satisfies_no_attraction(qd, normal) {
            continue;
        }
        let [x, y, z] = qd.components().map(|c| c.as_sign().unwrap());
        per_x.entry(x).or_default().entry(y).or_default().push(z);
    }
    let mut by_shape: BTreeMap<Vec<(SignSet, SignSet)>, SignSet> = BTreeMap::new();
    for (x, ys) in per_x {
        let mut by_zset: BTreeMap<SignSet, SignSet> = BTreeMap::new();
        for (y, zs) in ys {
            let zset = SignSet::from_signs(&zs).unwrap();
            by_zset
                .entry(zset)
                .and_modify(|acc| *acc = acc.union(y.into()))
                .or_insert(y.into());
        }
        let shape: Vec<(SignSet, SignSet)> =
            by_zset.into_iter().map(|(zset, yset)| (yset, zset)).collect();
        by_shape
            .entry(shape)
            .and_modify(|acc| *acc = acc.union(x.into()))
            .or_insert(x.into());
    }
    let mut boxes = Vec::new();
    for (shape, xset) in by_shape {
        for (yset, zset) in shape {
            boxes.push(SignVec { x: xset, y: yset, z: zset });
        }
    }
    boxes.sort();
    boxes
}

/// All force variables of a scene with their grouped domains: the action
/// over every movable object and definite locus, one variable per directed
/// edge of the vanishing-pruned graph, and a gravity singleton per movable
/// object.
pub fn force_variables(scene: &Scene) -> Result<Vec<ForceVariable>, SolveError> {
    let mut graph = scene.build_graph()?;
    graph.prune_vanishing();
    let mut vars = Vec::new();
    let mut action_domain = Vec::new();
    for o in scene.objects.iter().filter(|o| !o.is_static) {
        for qr in SignVec::all_definite() {
            action_domain.push(QualitativeForce::new(SignVec::ANY, qr, o.id.clone()));
        }
    }
    vars.push(ForceVariable {
        var_id: ACTION_VAR.to_string(),
        kind: VariableKind::Action,
        domain: action_domain,
    });
    for (i, e) in graph.edges.iter().enumerate() {
        vars.push(ForceVariable {
            var_id: edge_var(&graph, i),
            kind: VariableKind::Contact,
            domain: feasible_boxes(e.normal)
                .into_iter()
                .map(|qd| QualitativeForce::new(qd, e.qr, e.to.clone()))
                .collect(),
        });
    }
    if scene.gravity {
        for o in scene.objects.iter().filter(|o| !o.is_static) {
            vars.push(ForceVariable {
                var_id: gravity_var(&o.id),
                kind: VariableKind::Gravity,
                domain: vec![QualitativeForce::gravity(o.id.clone())],
            });
        }
    }
    Ok(vars)
}

/// A node of the search tree: a structure graph plus the assignment and
/// trace accumulated on the path to it.
#[derive(Debug, Clone)]
pub struct SearchNode {
    pub graph: StructureGraph,
    pub action_object: ObjectId,
    pub action_qr: SignVec,
    /// Grouped action direction (the full nonzero fan, or a pinned member).
    pub action_group: SignVec,
    /// Definite action member fixed by the action object's C1 witness.
    pub action_witness: Option<SignVec>,
    pub assignments: BTreeMap<String, GroupedAssignment>,
    pub trace: Vec<ObjectTrace>,
}

/// How the root hypothesizes the action variable.
#[derive(Debug, Clone, PartialEq)]
pub enum RootMode {
    /// One grouped direction per (object, locus); the group is the whole
    /// direction fan, with the zero member excluded from witnesses.
    Grouped,
    /// One child per definite nonzero direction per (object, locus).
    Definite,
    /// A single fixed action.
    Pinned(QualitativeAction),
}

fn change_or_zero(scene: &Scene, id: &ObjectId) -> StateChange {
    scene.object(id).map(|_| scene.change_of(id)).unwrap_or(StateChange::NONE)
}

/// Root objects in search order: objects that moved come first, then (when
/// H2 is off) the remaining movable objects; ids ascending within each
/// class. Errors when H2 is on and nothing moved.
fn root_objects(scene: &Scene, cfg: &SolverConfig) -> Result<Vec<ObjectId>, SolveError> {
    let moved = scene.moved_objects();
    if cfg.heuristics.h2 && moved.is_empty() {
        return Err(SolveError::NoMovedObject);
    }
    let mut order = moved.clone();
    if !cfg.heuristics.h2 {
        order.extend(
            scene
                .objects
                .iter()
                .filter(|o| !o.is_static && !moved.contains(&o.id))
                .map(|o| o.id.clone()),
        );
    }
    Ok(order)
}

fn seed_node(
    scene: &Scene,
    graph: &StructureGraph,
    object: &ObjectId,
    qr: SignVec,
    group: SignVec,
) -> SearchNode {
    let mut graph = graph.clone();
    let mut assignments = BTreeMap::new();
    if scene.gravity {
        for o in scene.objects.iter().filter(|o| !o.is_static) {
            let g = QualitativeForce::gravity(o.id.clone());
            assignments.insert(
                gravity_var(&o.id),
                GroupedAssignment { var_id: gravity_var(&o.id), value: g, resistant: false },
            );
        }
    }
    assignments.insert(
        ACTION_VAR.to_string(),
        GroupedAssignment {
            var_id: ACTION_VAR.to_string(),
            value: QualitativeForce::new(group, qr, object.clone()),
            resistant: false,
        },
    );
    let vertex = graph.vertices.get_mut(object).expect("root object exists");
    vertex.known_forces.push(KnownForce {
        qd: group,
        qr,
        source: ForceSource::Action,
        resistant: false,
    });
    SearchNode {
        graph,
        action_object: object.clone(),
        action_qr: qr,
        action_group: group,
        action_witness: None,
        assignments,
        trace: Vec::new(),
    }
}

/// Branches the root: one child per hypothesized action, per the mode.
/// The graph must already be vanishing-pruned.
fn branch_root_nodes(
    scene: &Scene,
    graph: &StructureGraph,
    cfg: &SolverConfig,
    mode: &RootMode,
) -> Result<Vec<SearchNode>, SolveError> {
    let mut nodes = Vec::new();
    match mode {
        RootMode::Pinned(action) => {
            // H2 still demands a moved object somewhere.
            root_objects(scene, cfg)?;
            let object = &action.force.object;
            let movable = scene.object(object).map(|o| !o.is_static).unwrap_or(false);
            let allowed = !cfg.heuristics.h2 || !change_or_zero(scene, object).is_zero();
            // An unknown, static, or (under H2) unmoved target simply
            // admits no solutions.
            if movable && allowed {
                nodes.push(seed_node(scene, graph, object, action.force.qr, action.force.qd));
            }
        }
        RootMode::Grouped => {
            for object in root_objects(scene, cfg)? {
                for qr in SignVec::all_definite() {
                    nodes.push(seed_node(scene, graph, &object, qr, SignVec::ANY));
                }
            }
        }
        RootMode::Definite => {
            for object in root_objects(scene, cfg)? {
                for qr in SignVec::all_definite() {
                    for qd in SignVec::all_definite().filter(|qd| !qd.is_zero()) {
                        nodes.push(seed_node(scene, graph, &object, qr, qd));
                    }
                }
            }
        }
    }
    Ok(nodes)
}

/// Branches the root with grouped actions (builds and prunes the graph).
pub fn branch_root(scene: &Scene, cfg: &SolverConfig) -> Result<Vec<SearchNode>, SolveError> {
    let mut graph = scene.build_graph()?;
    graph.prune_vanishing();
    branch_root_nodes(scene, &graph, cfg, &RootMode::Grouped)
}

/// Next vertex to branch on, or `None` when every vertex is checked.
///
/// Static vertices always come last: they have nothing to explain, and
/// deferring them keeps the assigned (resistant) side of each contact on
/// the movable object. Among movable to-check vertices, `PreferKnown`
/// picks ones that already carry search-derived forces (the causal wave);
/// ties and `Canonical` fall back to ascending id.
pub fn select_vertex(graph: &StructureGraph, order: VertexOrder) -> Option<ObjectId> {
    let to_check: Vec<(&ObjectId, bool, bool)> = graph
        .vertices
        .iter()
        .filter(|(_, v)| v.flag == VertexFlag::ToCheck)
        .map(|(id, v)| {
            let derived =
                v.known_forces.iter().any(|k| !matches!(k.source, ForceSource::Gravity));
            (id, v.is_static, derived)
        })
        .collect();
    if order == VertexOrder::PreferKnown {
        if let Some((id, ..)) = to_check.iter().find(|(_, is_static, derived)| !is_static && *derived)
        {
            return Some((*id).clone());
        }
    }
    if let Some((id, ..)) = to_check.iter().find(|(_, is_static, _)| !is_static) {
        return Some((*id).clone());
    }
    to_check.first().map(|(id, ..)| (*id).clone())
}

/// Entailment terms for one vertex: its known forces plus the candidate
/// assignment of its unlabeled incoming edges. Returns the terms and the
/// variable name of each.
fn vertex_terms(
    node: &SearchNode,
    vertex: &ObjectId,
    candidate: &[(usize, SignVec)],
) -> (Vec<ForceTerm>, Vec<String>) {
    let mut terms = Vec::new();
    let mut names = Vec::new();
    for k in &node.graph.vertices[vertex].known_forces {
        let (name, exclude_zero) = match k.source {
            ForceSource::Gravity => (gravity_var(vertex), false),
            ForceSource::Action => (ACTION_VAR.to_string(), true),
            ForceSource::Assigned { edge } | ForceSource::Reaction { edge } => {
                (edge_var(&node.graph, edge), false)
            }
        };
        terms.push(ForceTerm { qd: k.qd, qr: k.qr, resistant: k.resistant, exclude_zero });
        names.push(name);
    }
    for (edge, qd) in candidate {
        terms.push(ForceTerm {
            qd: *qd,
            qr: node.graph.edges[*edge].qr,
            resistant: true,
            exclude_zero: false,
        });
        names.push(edge_var(&node.graph, *edge));
    }
    (terms, names)
}

/// Branches an intermediate node on `vertex`: assigns its unlabeled
/// incoming edges one grouped candidate at a time, keeps the candidates
/// whose combined force set entails the vertex's observed change, labels
/// the edges (reactions by the third law), propagates reaction forces to
/// the neighbors, and marks the vertex checked. An empty result means
/// backtrack.
pub fn branch_intermediate(
    node: &SearchNode,
    vertex: &ObjectId,
    cfg: &SolverConfig,
) -> Result<Vec<SearchNode>, SolveError> {
    let incoming = node.graph.unlabeled_incoming(vertex);
    let box_lists: Vec<Vec<SignVec>> = incoming
        .iter()
        .map(|e| feasible_boxes(node.graph.edges[*e].normal))
        .collect();
    let mut children = Vec::new();
    let mut picks = vec![0usize; incoming.len()];
    'candidates: loop {
        let candidate: Vec<(usize, SignVec)> = incoming
            .iter()
            .enumerate()
            .map(|(slot, e)| (*e, box_lists[slot][picks[slot]]))
            .collect();
        let (terms, names) = vertex_terms(node, vertex, &candidate);
        let change = node.graph.vertices[vertex].change;
        let opts = EntailmentOptions { h1: cfg.heuristics.h1, cap: cfg.subset_cap };
        if let Some(witness) = find_entailment(change, &terms, opts)? {
            let mut child = node.clone();
            // Label the assigned edges and their third-law pairs, propagate
            // the reactions into the neighbors' known forces.
            for (edge, qd) in &candidate {
                let pair = edge ^ 1;
                child.graph.edges[*edge].label = Some(*qd);
                let reaction = third_law_pair(*qd);
                child.graph.edges[pair].label = Some(reaction);
                let neighbor = child.graph.edges[pair].to.clone();
                let pair_qr = child.graph.edges[pair].qr;
                child.graph.vertices.get_mut(&neighbor).unwrap().known_forces.push(KnownForce {
                    qd: reaction,
                    qr: pair_qr,
                    source: ForceSource::Reaction { edge: pair },
                    resistant: false,
                });
                child.graph.vertices.get_mut(vertex).unwrap().known_forces.push(KnownForce {
                    qd: *qd,
                    qr: child.graph.edges[*edge].qr,
                    source: ForceSource::Assigned { edge: *edge },
                    resistant: true,
                });
                child.assignments.insert(
                    edge_var(&child.graph, *edge),
                    GroupedAssignment {
                        var_id: edge_var(&child.graph, *edge),
                        value: QualitativeForce::new(
                            *qd,
                            child.graph.edges[*edge].qr,
                            vertex.clone(),
                        ),
                        resistant: true,
                    },
                );
                child.assignments.insert(
                    edge_var(&child.graph, pair),
                    GroupedAssignment {
                        var_id: edge_var(&child.graph, pair),
                        value: QualitativeForce::new(reaction, pair_qr, neighbor),
                        resistant: false,
                    },
                );
            }
            let v = child.graph.vertices.get_mut(vertex).unwrap();
            v.flag = VertexFlag::Checked;
            // Record the witness; fix the action member if it took part.
            let subset = witness
                .subset
                .iter()
                .zip(&witness.members)
                .map(|(i, member)| TraceForce {
                    var_id: names[*i].clone(),
                    member: *member,
                    qr: terms[*i].qr,
                    resistant: terms[*i].resistant,
                })
                .collect::<Vec<_>>();
            if let Some(tf) = subset.iter().find(|tf| tf.var_id == ACTION_VAR) {
                child.action_witness = Some(tf.member);
            }
            child.trace.push(ObjectTrace {
                object: vertex.clone(),
                change,
                subset,
                linear: witness.linear,
                angular: witness.angular,
            });
            children.push(child);
        }
        // Advance the odometer over per-edge box choices.
        for slot in 0..picks.len() {
            picks[slot] += 1;
            if picks[slot] < box_lists[slot].len() {
                continue 'candidates;
            }
            picks[slot] = 0;
        }
        break;
    }
    Ok(children)
}

fn finish_solution(node: &SearchNode, cfg: &SolverConfig) -> Solution {
    let member = node.action_witness.unwrap_or_else(|| {
        node.action_group
            .denotation()
            .find(|m| !m.is_zero())
            .expect("action group has a nonzero member")
    });
    let action = QualitativeAction::new(QualitativeForce::new(
        member,
        node.action_qr,
        node.action_object.clone(),
    ))
    .expect("witness member is definite and nonzero");
    Solution {
        action,
        assignments: node.assignments.clone(),
        trace: node.trace.clone(),
        h1: cfg.heuristics.h1,
    }
}

fn solve_with_mode(
    scene: &Scene,
    cfg: &SolverConfig,
    mode: &RootMode,
) -> Result<Vec<Solution>, SolveError> {
    if cfg.subset_cap == 0 {
        return Err(SolveError::BadCap(0));
    }
    let mut graph = scene.build_graph()?;
    graph.prune_vanishing();
    let roots = branch_root_nodes(scene, &graph, cfg, mode)?;
    let mut solutions: Vec<Solution> = Vec::new();
    let mut stack: Vec<SearchNode> = roots.into_iter().rev().collect();
    while let Some(node) = stack.pop() {
        if let Some(max) = cfg.max_solutions {
            if solutions.len() >= max {
                break;
            }
        }
        match select_vertex(&node.graph, cfg.vertex_order) {
            None => solutions.push(finish_solution(&node, cfg)),
            Some(vertex) => {
                let children = branch_intermediate(&node, &vertex, cfg)?;
                stack.extend(children.into_iter().rev());
            }
        }
    }
    solutions.sort();
    Ok(solutions)
}

/// Solves the action inference problem: every grouped action hypothesis
/// (object, locus, direction fan) admitting a full consistent assignment
/// yields one solution, in canonical order.
pub fn solve(scene: &Scene, cfg: &SolverConfig) -> Result<Vec<Solution>, SolveError> {
    solve_with_mode(scene, cfg, &RootMode::Grouped)
}

/// Solves with the action variable fixed to one definite action.
pub fn solve_pinned(
    scene: &Scene,
    cfg: &SolverConfig,
    action: &QualitativeAction,
) -> Result<Vec<Solution>, SolveError> {
    solve_with_mode(scene, cfg, &RootMode::Pinned(action.clone()))
}

/// Whether a definite action admits any full consistent assignment.
pub fn action_feasible(
    scene: &Scene,
    cfg: &SolverConfig,
    action: &QualitativeAction,
) -> Result<bool, SolveError> {
    let cfg = SolverConfig { max_solutions: Some(1), ..cfg.clone() };
    Ok(!solve_pinned(scene, &cfg, action)?.is_empty())
}

/// Expands grouped solutions to the set of definite actions they stand
/// for: each nonzero member of a returned action group that is itself
/// feasible (re-checked with the action pinned).
pub fn definite_actions(
    scene: &Scene,
    cfg: &SolverConfig,
    solutions: &[Solution],
) -> Result<BTreeSet<QualitativeAction>, SolveError> {
    let mut groups: BTreeSet<(ObjectId, SignVec, SignVec)> = BTreeSet::new();
    for sol in solutions {
        let group = &sol.assignments[ACTION_VAR].value;
        groups.insert((group.object.clone(), group.qr, group.qd));
    }
    let mut out = BTreeSet::new();
    let mut tested: BTreeSet<(ObjectId, SignVec, SignVec)> = BTreeSet::new();
    for (object, qr, group) in groups {
        for member in group.denotation().filter(|m| !m.is_zero()) {
            if !tested.insert((object.clone(), qr, member)) {
                continue;
            }
            let action = QualitativeAction::new(QualitativeForce::new(member, qr, object.clone()))
                .expect("nonzero definite member");
            if action_feasible(scene, cfg, &action)? {
                out.insert(action);
            }
        }
    }
    Ok(out)
}

/// Re-checks a solution from scratch against a scene: the assignment must
/// cover exactly the expected variables, contact values must respect the
/// no-attraction rule and pair up by the third law, no pruned (vanishing)
/// contact may carry a force, every object's change must be entailed by
/// its assigned forces, and the recorded witnesses must re-fold to cells
/// admitting the changes.
pub fn validate_solution(scene: &Scene, sol: &Solution, cap: usize) -> bool {
    let Ok(mut graph) = scene.build_graph() else {
        return false;
    };
    graph.prune_vanishing();
    // Expected variable set.
    let mut expected: BTreeSet<String> =
        (0..graph.edges.len()).map(|i| edge_var(&graph, i)).collect();
    expected.insert(ACTION_VAR.to_string());
    if scene.gravity {
        for o in scene.objects.iter().filter(|o| !o.is_static) {
            expected.insert(gravity_var(&o.id));
        }
    }
    if sol.assignments.keys().cloned().collect::<BTreeSet<_>>() != expected {
        return false;
    }
    // The action group must admit the definite action reported, on a
    // movable object.
    let action_group = &sol.assignments[ACTION_VAR].value;
    if action_group.object != sol.action.force.object
        || action_group.qr != sol.action.force.qr
        || !action_group.qd.admits(sol.action.force.qd)
    {
        return false;
    }
    match scene.object(&sol.action.force.object) {
        Some(obj) if !obj.is_static => {}
        _ => return false,
    }
    // Per-edge checks: rule 2 (existentially over the group), rule 3.
    for i in 0..graph.edges.len() {
        let e = &graph.edges[i];
        let qd = sol.assignments[&edge_var(&graph, i)].value.qd;
        if !qd.denotation().any(|m| satisfies_no_attraction(m, e.normal)) {
            return false;
        }
        let pair_qd = sol.assignments[&edge_var(&graph, i ^ 1)].value.qd;
        if pair_qd != third_law_pair(qd) {
            return false;
        }
    }
    // C1 per object, with the reported definite action standing in for the
    // action group, under the solution's own heuristic setting.
    for o in &scene.objects {
        let mut terms = Vec::new();
        if scene.gravity && !o.is_static {
            let g = QualitativeForce::gravity(o.id.clone());
            terms.push(ForceTerm::plain(g.qd, g.qr));
        }
        if o.id == sol.action.force.object {
            terms.push(ForceTerm {
                qd: sol.action.force.qd,
                qr: sol.action.force.qr,
                resistant: false,
                exclude_zero: true,
            });
        }
        for (i, e) in graph.edges.iter().enumerate() {
            if e.to != o.id {
                continue;
            }
            let a = &sol.assignments[&edge_var(&graph, i)];
            terms.push(ForceTerm {
                qd: a.value.qd,
                qr: e.qr,
                resistant: a.resistant,
                exclude_zero: false,
            });
        }
        let change = scene.change_of(&o.id);
        match find_entailment(change, &terms, EntailmentOptions { h1: sol.h1, cap }) {
            Ok(Some(_)) => {}
            _ => return false,
        }
    }
    // Witness traces re-fold to cells that admit the changes.
    for t in &sol.trace {
        let mut lin = SignVec::ZERO;
        let mut ang = SignVec::ZERO;
        for tf in t.subset.iter().filter(|tf| !(sol.h1 && tf.resistant)) {
            lin = lin.add(tf.member);
            ang = ang.add(tf.qr.cross(tf.member));
        }
        if sol.h1 {
            for tf in t.subset.iter().filter(|tf| tf.resistant) {
                lin = heuristic_resistant_add_vec(tf.member, lin);
                ang = heuristic_resistant_add_vec(tf.qr.cross(tf.member), ang);
            }
        }
        if (lin, ang) != (t.linear, t.angular)
            || !lin.admits(t.change.dqv)
            || !ang.admits(t.change.dqw)
        {
            return false;
        }
    }
    true
}
