//! Robustness driver: broader randomized studies than the test suite runs.
//!
//! Study A sweeps random scenes of every stack size and checks that the
//! heuristic action sets shrink monotonically (and that the cancel-only
//! heuristic prunes strictly) while the true action survives. Study B
//! lengthens the simulation horizon so pushed boxes slide off their
//! supports and knock-on motion appears, then checks the true action is
//! still found.
//!
//! Run with: cargo run -p aip-core --example robustness
use aip_core::oracle::*;
use aip_core::solver::*;
use std::collections::BTreeSet;

fn main() {
    // Study A: heuristic monotonicity across random scenes.
    let opts = GenerateOptions::default();
    let mut strict = 0;
    for seed in 0..15u64 {
        let n = 1 + (seed as usize) % 5;
        let g = random_scene(n, 5000 + seed, &opts).unwrap();
        let truth = g.truth.clone().unwrap();
        let mut sets: Vec<BTreeSet<_>> = Vec::new();
        for h in [Heuristics::NONE, Heuristics::H2, Heuristics::BOTH] {
            let cfg = SolverConfig::with_heuristics(h);
            let sols = solve(&g.scene, &cfg).unwrap();
            let acts = definite_actions(&g.scene, &cfg, &sols).unwrap();
            assert!(acts.contains(&truth), "seed {seed} {h}: truth lost");
            sets.push(acts);
        }
        let ok_h2 = sets[1].is_subset(&sets[0]);
        let ok_both = sets[2].is_subset(&sets[1]);
        if sets[2].len() < sets[1].len() { strict += 1; }
        println!("seed {seed} n={n}: none={} h2={} h1h2={} subset(h2<=none)={} subset(both<=h2)={}",
            sets[0].len(), sets[1].len(), sets[2].len(), ok_h2, ok_both);
        assert!(ok_h2 && ok_both, "monotonicity broke at seed {seed}");
    }
    println!("strict h1 pruning in {strict}/15 scenes");

    // Study B: long horizons (boxes slide off supports and fall).
    let long = GenerateOptions { horizon: 150, ..GenerateOptions::default() };
    for seed in 100..110u64 {
        let n = 2 + (seed as usize) % 3;
        let g = random_scene(n, seed, &long).unwrap();
        let truth = g.truth.clone().unwrap();
        let cfg = SolverConfig::default();
        let sols = solve(&g.scene, &cfg).unwrap();
        let hit = sols.iter().any(|s| {
            let grp = &s.assignments[ACTION_VAR].value;
            grp.object == truth.force.object && grp.qr == truth.force.qr && grp.qd.admits(truth.force.qd)
        }) && action_feasible(&g.scene, &cfg, &truth).unwrap();
        let moved = g.scene.moved_objects().len();
        println!("seed {seed} n={n} horizon=150: moved={moved} truth_found={hit}");
        assert!(hit, "long-horizon truth lost at seed {seed}");
    }
    println!("robustness studies passed");
}
