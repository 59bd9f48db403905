//! Run reports and the auxiliary CLI file formats.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dynamics::StateChange;
use crate::scene::Scene;
use crate::sign::SignVec;
use crate::solver::{Solution, SolverConfig, ACTION_VAR};

/// Stable FNV-1a digest of an input document, hex-encoded.
pub fn digest(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("fnv1a:{h:016x}")
}

/// Format tag for force-set files consumed by the forward-prediction mode.
pub const FORCES_FORMAT: &str = "aip-forces/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcesFile {
    pub format: String,
    pub forces: Vec<ForceRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForceRecord {
    pub object: String,
    pub qd: SignVec,
    pub qr: SignVec,
}

/// Report of one inference run: scene digest, configuration echo, and the
/// solutions with their derivation traces. `wall_ms` is informational and
/// excluded from semantic comparisons.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub scene_digest: String,
    pub config: SolverConfig,
    pub epsilon: f64,
    pub solution_count: usize,
    pub solutions: Vec<Solution>,
    pub wall_ms: u64,
}

impl RunReport {
    pub fn new(
        scene_bytes: &[u8],
        config: &SolverConfig,
        epsilon: f64,
        solutions: Vec<Solution>,
        wall_ms: u64,
    ) -> RunReport {
        RunReport {
            scene_digest: digest(scene_bytes),
            config: config.clone(),
            epsilon,
            solution_count: solutions.len(),
            solutions,
            wall_ms,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Aligned plain text: one block per solution, with the derivation
    /// rendered as a causal chain (entailing subset, net force and torque,
    /// observed change).
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scene digest: {}", self.scene_digest);
        let _ = writeln!(
            out,
            "config: heuristics={} cap={} max-solutions={} epsilon={}",
            self.config.heuristics,
            self.config.subset_cap,
            self.config.max_solutions.map_or("-".to_string(), |n| n.to_string()),
            self.epsilon,
        );
        let _ = writeln!(out, "solutions: {}", self.solution_count);
        for (i, sol) in self.solutions.iter().enumerate() {
            let _ = writeln!(out, "[{}] {}", i + 1, sol.action);
            if let Some(group) = sol.assignments.get(ACTION_VAR) {
                if !group.value.qd.is_definite() {
                    let _ = writeln!(out, "    direction group: {}", group.value.qd);
                }
            }
            for t in &sol.trace {
                let used = if t.subset.is_empty() {
                    "{} (no force needed)".to_string()
                } else {
                    let parts: Vec<String> = t
                        .subset
                        .iter()
                        .map(|f| format!("{}={}@{}", f.var_id, f.member, f.qr))
                        .collect();
                    format!("{{{}}}", parts.join(", "))
                };
                let _ = writeln!(
                    out,
                    "    {}: {} <- {} ; net force {}, net torque {}",
                    t.object, t.change, used, t.linear, t.angular
                );
            }
        }
        let _ = writeln!(out, "elapsed: {} ms", self.wall_ms);
        out
    }
}

/// Forward-prediction report: the full change envelope per object.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictReport {
    pub scene_digest: String,
    pub per_object: Vec<ObjectEnvelope>,
    pub wall_ms: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObjectEnvelope {
    pub object: String,
    pub force_count: usize,
    pub changes: Vec<StateChange>,
}

impl PredictReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scene digest: {}", self.scene_digest);
        for env in &self.per_object {
            let _ = writeln!(
                out,
                "{}: {} forces, {} possible changes",
                env.object,
                env.force_count,
                env.changes.len()
            );
            for ch in &env.changes {
                let _ = writeln!(out, "    {ch}");
            }
        }
        let _ = writeln!(out, "elapsed: {} ms", self.wall_ms);
        out
    }
}

/// Outcome of a ground-truth check: solver vs sidecar, and solver vs the
/// brute-force enumerator when the scene is small enough.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub scene_digest: String,
    pub heuristics: String,
    pub truth_found: bool,
    pub solver_actions: usize,
    /// Present when the enumerator ran.
    pub enumerator_actions: Option<usize>,
    /// Actions the enumerator found but the solver missed.
    pub missing: Vec<String>,
    /// Actions the solver found but the enumerator rejected.
    pub extra: Vec<String>,
    pub error: Option<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.truth_found && self.missing.is_empty() && self.extra.is_empty() && self.error.is_none()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// The difference of two action sets rendered as display strings.
pub fn action_set_diff<T: Ord + std::fmt::Display>(
    reference: &BTreeSet<T>,
    candidate: &BTreeSet<T>,
) -> (Vec<String>, Vec<String>) {
    let missing = reference.difference(candidate).map(T::to_string).collect();
    let extra = candidate.difference(reference).map(T::to_string).collect();
    (missing, extra)
}

/// Envelope of a validated scene under a supplied force set, grouped per
/// object (objects without forces get the zero-change envelope).
pub fn predict_envelopes(
    scene: &Scene,
    forces: &ForcesFile,
    cap: usize,
) -> Result<Vec<ObjectEnvelope>, crate::dynamics::DynamicsError> {
    use crate::dynamics::{delta_envelope, ObjectId, QualitativeForce};
    let mut out = Vec::new();
    for o in &scene.objects {
        let fs: Vec<QualitativeForce> = forces
            .forces
            .iter()
            .filter(|f| ObjectId::new(f.object.clone()) == o.id)
            .map(|f| QualitativeForce::new(f.qd, f.qr, o.id.clone()))
            .collect();
        let env = delta_envelope(&fs, cap)?;
        out.push(ObjectEnvelope {
            object: o.id.as_str().to_string(),
            force_count: fs.len(),
            changes: env.into_iter().collect(),
        });
    }
    Ok(out)
}
