//! Experiment drivers: full scenario runs, constant-density sweeps, the
//! broadcast comparison, and the proof-protocol bench.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::graph::{complete_graph, vid, HamiltonianCycle, VertexId};
use crate::sim::{
    is_connected, neighbors, render, Arena, Engine, EngineConfig, LifecycleConfig, Purpose,
    RadioModel,
};
use crate::zkp::{run_protocol, CheatStrategy, ProverStrategy};

use super::{summarize, BroadcastMode, MetricsError, RunSummary, ScenarioConfig};

/// A completed scenario: the raw trace text and its summary.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub trace: String,
    pub summary: RunSummary,
}

fn engine_config(cfg: &ScenarioConfig) -> EngineConfig {
    EngineConfig {
        radio: RadioModel {
            range: cfg.radio_range,
            arena: Arena {
                width: cfg.arena_width,
                height: cfg.arena_height,
            },
        },
        speed_range: (cfg.speed_min, cfg.speed_max),
        hop_latency: 0.010,
        processing_delay: cfg.processing_delay,
        loss_prob: cfg.loss_prob,
        mobility_dt: 1.0,
        suppressed: cfg.broadcast_mode == BroadcastMode::Gri,
        seed: cfg.seed,
    }
}

fn lifecycle_config(cfg: &ScenarioConfig) -> LifecycleConfig {
    LifecycleConfig {
        nodes: cfg.nodes,
        graph_degree: cfg.graph_degree,
        n_min: cfg.n_min,
        zkp_rounds: cfg.zkp_rounds,
        pol_period: cfg.pol_period,
        epsilon: cfg.epsilon,
        insert_prob: cfg.insert_prob,
        delete_prob: cfg.delete_prob,
    }
}

/// Builds the engine, runs the scenario to its configured duration, and
/// summarizes the trace.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioRun, MetricsError> {
    cfg.validate()?;
    let mut engine = Engine::new(engine_config(cfg));
    engine
        .init_lifecycle(lifecycle_config(cfg))
        .map_err(|e| MetricsError::Sim(e.to_string()))?;
    engine.advance(cfg.duration);
    let trace = render(engine.trace());
    let summary = summarize(&trace)?;
    Ok(ScenarioRun { trace, summary })
}

/// One sweep data point.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub nodes: usize,
    pub seed: u64,
    pub summary: RunSummary,
}

/// Runs the constant-density sweep: for each node count the arena scales to
/// keep density fixed, each (count, seed) pair is an independent engine.
/// Rows come back sorted by (nodes, seed).
pub fn sweep_rows(
    base: &ScenarioConfig,
    node_counts: &[usize],
    seeds: &[u64],
) -> Result<Vec<SweepRow>, MetricsError> {
    base.validate()?;
    let mut jobs: Vec<(usize, u64)> = Vec::new();
    for &n in node_counts {
        for &s in seeds {
            jobs.push((n, s));
        }
    }
    let rows: Result<Vec<SweepRow>, MetricsError> = jobs
        .par_iter()
        .map(|&(nodes, seed)| {
            let mut cfg = base.with_nodes_constant_density(nodes);
            cfg.seed = seed;
            cfg.validate()?;
            let run = run_scenario(&cfg)?;
            Ok(SweepRow {
                nodes,
                seed,
                summary: run.summary,
            })
        })
        .collect();
    let mut rows = rows?;
    rows.sort_by_key(|r| (r.nodes, r.seed));
    Ok(rows)
}

/// Aggregate of the broadcast comparison over a seed set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BroadcastComparison {
    /// Broadcast-phase transmissions of the optimized protocol (go plus
    /// information; the directed returns are not broadcasts).
    pub gri: usize,
    /// Transmissions of the plain flood on the same topologies.
    pub flood: usize,
    pub ratio: f64,
    pub topologies: usize,
    /// Per-topology check that the go phase never exceeded the flood.
    pub go_never_exceeds_flood: bool,
}

/// Places `cfg.nodes` nodes uniformly (resampling until the topology is
/// connected), runs one optimized broadcast and one flood from the lowest
/// identifier, and accumulates over `seeds` topologies.
pub fn compare_broadcast(
    cfg: &ScenarioConfig,
    seeds: usize,
) -> Result<BroadcastComparison, MetricsError> {
    cfg.validate()?;
    let radio = RadioModel {
        range: cfg.radio_range,
        arena: Arena {
            width: cfg.arena_width,
            height: cfg.arena_height,
        },
    };
    let mut gri_total = 0usize;
    let mut flood_total = 0usize;
    let mut go_ok = true;
    for i in 0..seeds {
        let seed = cfg.seed.wrapping_add(i as u64);
        let positions = connected_positions(cfg.nodes, &radio, seed)
            .ok_or_else(|| MetricsError::Sim(format!("no connected topology for seed {seed}")))?;
        let mut ecfg = engine_config(cfg);
        ecfg.seed = seed;
        ecfg.suppressed = true;
        let mut engine = Engine::with_topology(ecfg, &positions);
        let timer = engine_config(cfg).default_response_timer();
        let gri = engine
            .gri_broadcast(vid(1), Purpose::Probe, timer)
            .map_err(|e| MetricsError::Sim(e.to_string()))?;
        let flood = engine
            .flood_broadcast(vid(1), 16)
            .map_err(|e| MetricsError::Sim(e.to_string()))?;
        go_ok &= gri.packets_go <= flood;
        gri_total += gri.broadcast_packets();
        flood_total += flood;
    }
    Ok(BroadcastComparison {
        gri: gri_total,
        flood: flood_total,
        ratio: gri_total as f64 / flood_total as f64,
        topologies: seeds,
        go_never_exceeds_flood: go_ok,
    })
}

/// Uniform placements resampled until connected (bounded attempts).
pub fn connected_positions(
    nodes: usize,
    radio: &RadioModel,
    seed: u64,
) -> Option<Vec<(VertexId, (f64, f64))>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..200 {
        let positions: Vec<(VertexId, (f64, f64))> = (1..=nodes as u32)
            .map(|i| {
                (
                    vid(i),
                    (
                        rng.gen_range(0.0..radio.arena.width),
                        rng.gen_range(0.0..radio.arena.height),
                    ),
                )
            })
            .collect();
        let map = positions.iter().copied().collect();
        if is_connected(&neighbors(radio, &map)) {
            return Some(positions);
        }
    }
    None
}

/// Completeness and soundness rates of the proof protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZkpBenchReport {
    pub rounds: usize,
    pub trials: usize,
    pub honest_accepted: usize,
    pub cheat_accepted: usize,
    pub expected_cheat_rate: f64,
}

impl ZkpBenchReport {
    pub fn honest_rate(&self) -> f64 {
        self.honest_accepted as f64 / self.trials as f64
    }

    pub fn cheat_rate(&self) -> f64 {
        self.cheat_accepted as f64 / self.trials as f64
    }
}

/// Runs `trials` honest sessions and `trials` blind-cheat sessions at the
/// given round count over a small fixed instance.
pub fn zkp_bench(rounds: usize, trials: usize, seed: u64) -> ZkpBenchReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cycle = HamiltonianCycle::new((1..=8).map(vid).collect());
    let graph = complete_graph(&cycle, 16, &mut rng).expect("feasible instance");

    let mut honest_accepted = 0;
    let mut cheat_accepted = 0;
    for _ in 0..trials {
        let t = run_protocol(
            ProverStrategy::Honest {
                graph: &graph,
                cycle: &cycle,
            },
            &graph,
            rounds,
            &mut rng,
        )
        .expect("honest session");
        if t.accepted {
            honest_accepted += 1;
        }
    }
    for _ in 0..trials {
        let t = run_protocol(
            ProverStrategy::Cheat(CheatStrategy::CoinFlip),
            &graph,
            rounds,
            &mut rng,
        )
        .expect("cheat session");
        if t.accepted {
            cheat_accepted += 1;
        }
    }
    ZkpBenchReport {
        rounds,
        trials,
        honest_accepted,
        cheat_accepted,
        expected_cheat_rate: 0.5f64.powi(rounds as i32),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_replays_identically() {
        let cfg = ScenarioConfig {
            nodes: 10,
            duration: 30.0,
            seed: 7,
            ..Default::default()
        };
        let a = run_scenario(&cfg).unwrap();
        let b = run_scenario(&cfg).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.summary.csv_row(), b.summary.csv_row());
    }

    #[test]
    fn zero_churn_means_zero_membership_changes() {
        let cfg = ScenarioConfig {
            nodes: 10,
            duration: 40.0,
            insert_prob: 0.0,
            delete_prob: 0.0,
            ..Default::default()
        };
        let run = run_scenario(&cfg).unwrap();
        assert_eq!(run.summary.insertions, 0);
        assert_eq!(run.summary.deletions, 0);
        assert_eq!(run.summary.access_controls, 0);
    }

    #[test]
    fn comparison_sits_in_the_optimized_band() {
        let cfg = ScenarioConfig::default();
        let cmp = compare_broadcast(&cfg, 10).unwrap();
        assert!(cmp.go_never_exceeds_flood);
        assert!(cmp.ratio > 0.2 && cmp.ratio < 0.8, "ratio {}", cmp.ratio);
    }

    #[test]
    fn bench_has_perfect_completeness() {
        let report = zkp_bench(5, 200, 3);
        assert_eq!(report.honest_accepted, 200);
        assert!(report.cheat_rate() < 0.2);
    }
}
