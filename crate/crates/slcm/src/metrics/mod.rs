//! Trace summarization, storage estimates, and the experiment drivers that
//! turn scenario configs into summary CSV rows.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::sim::{TraceEvent, TraceRecord};

mod config;
mod scenario;

pub use config::{BroadcastMode, ConfigError, ScenarioConfig};
pub use scenario::{
    compare_broadcast, connected_positions, run_scenario, sweep_rows, zkp_bench,
    BroadcastComparison, ScenarioRun, SweepRow, ZkpBenchReport,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("trace corrupt at line {line}")]
    TraceCorrupt { line: usize },
    #[error("simulation failed: {0}")]
    Sim(String),
}

/// Exact column set of every summary CSV.
pub const CSV_HEADER: &str = "nodes,connections,generated,forwarded,lost,mean_delay,max_delay,\
mean_proc,max_proc,pol_share,zkp_share,storage_rsa,storage_ecc";

/// Aggregates computed from one trace.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunSummary {
    pub nodes: usize,
    /// Rounded mean of the sampled link counts.
    pub connections: u64,
    /// Every transmission put on the air.
    pub generated: u64,
    /// The relayed subset of `generated`.
    pub forwarded: u64,
    /// Transmissions that reached nobody: lost, no receivers, or expired.
    pub lost: u64,
    pub mean_delay: f64,
    pub max_delay: f64,
    /// Packet-handling time per node, the energy proxy.
    pub mean_processing: f64,
    pub max_processing: f64,
    /// Fraction of transmitted bytes per traffic purpose.
    pub traffic_share: BTreeMap<String, f64>,
    pub storage_bits_rsa: u64,
    pub storage_bits_ecc: u64,
    pub insertions: u64,
    pub deletions: u64,
    pub access_controls: u64,
}

impl RunSummary {
    pub fn share(&self, purpose: &str) -> f64 {
        self.traffic_share.get(purpose).copied().unwrap_or(0.0)
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{},{}",
            self.nodes,
            self.connections,
            self.generated,
            self.forwarded,
            self.lost,
            self.mean_delay,
            self.max_delay,
            self.mean_processing,
            self.max_processing,
            self.share("pol"),
            self.share("zkp"),
            self.storage_bits_rsa,
            self.storage_bits_ecc,
        )
    }
}

/// Key-size schemes compared for the per-node storage estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StorageScheme {
    Rsa1024,
    Ecc160,
}

impl StorageScheme {
    pub fn key_bits(self) -> u64 {
        match self {
            StorageScheme::Rsa1024 => 1024,
            StorageScheme::Ecc160 => 160,
        }
    }
}

/// Bits a node would need to keep one public key plus one
/// certificate-equivalent signature for each of `n` peers.
pub fn storage_estimate(n: usize, scheme: StorageScheme) -> u64 {
    n as u64 * scheme.key_bits() * 2
}

/// Parses a trace and aggregates counts, delays, per-node processing
/// totals, and byte shares by traffic purpose.
pub fn summarize(trace: &str) -> Result<RunSummary, MetricsError> {
    let mut summary = RunSummary::default();
    let mut nodes_meta = 0usize;
    let mut proc_delay = 0.0f64;
    let mut delays: Vec<f64> = Vec::new();
    let mut link_samples: Vec<u64> = Vec::new();
    let mut handled: BTreeMap<u32, u64> = BTreeMap::new();
    let mut bytes: BTreeMap<String, u64> = BTreeMap::new();

    for (idx, line) in trace.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let record = TraceRecord::parse_line(line)
            .ok_or(MetricsError::TraceCorrupt { line: idx + 1 })?;
        match record.event {
            TraceEvent::Tx | TraceEvent::Fwd => {
                summary.generated += 1;
                if record.event == TraceEvent::Fwd {
                    summary.forwarded += 1;
                }
                if let Some(purpose) = record.extra_field("purpose") {
                    *bytes.entry(purpose.to_string()).or_insert(0) += u64::from(record.size);
                }
                *handled.entry(record.node).or_insert(0) += 1;
            }
            TraceEvent::Rx => {
                if let Some(delay) = record.extra_field("delay").and_then(|d| d.parse().ok()) {
                    delays.push(delay);
                }
                *handled.entry(record.node).or_insert(0) += 1;
            }
            TraceEvent::Drop | TraceEvent::Expire => summary.lost += 1,
            TraceEvent::Links => {
                if let Some(count) = record.extra_field("count").and_then(|c| c.parse().ok()) {
                    link_samples.push(count);
                }
            }
            TraceEvent::Proto => {
                match record.extra_field("op") {
                    Some("meta") => {
                        nodes_meta = record
                            .extra_field("nodes")
                            .and_then(|n| n.parse().ok())
                            .unwrap_or(0);
                        proc_delay = record
                            .extra_field("proc")
                            .and_then(|p| p.parse().ok())
                            .unwrap_or(0.0);
                    }
                    Some("insert") => {
                        if record.extra_field("outcome") == Some("committed") {
                            summary.insertions += 1;
                        }
                    }
                    Some("pol") => {
                        if let Some(pruned) =
                            record.extra_field("pruned").and_then(|p| p.parse::<u64>().ok())
                        {
                            summary.deletions += pruned;
                        }
                    }
                    Some("ac") => {
                        if matches!(
                            record.extra_field("outcome"),
                            Some("reinserted" | "expired" | "isolated")
                        ) {
                            summary.access_controls += 1;
                        }
                    }
                    _ => {}
                }
            }
            TraceEvent::State | TraceEvent::Term => {}
        }
    }

    summary.nodes = nodes_meta;
    if !delays.is_empty() {
        summary.mean_delay = delays.iter().sum::<f64>() / delays.len() as f64;
        summary.max_delay = delays.iter().cloned().fold(0.0, f64::max);
    }
    if !link_samples.is_empty() {
        let mean = link_samples.iter().sum::<u64>() as f64 / link_samples.len() as f64;
        summary.connections = mean.round() as u64;
    }
    if nodes_meta > 0 {
        let total_events: u64 = handled.values().sum();
        summary.mean_processing = total_events as f64 * proc_delay / nodes_meta as f64;
        summary.max_processing = handled
            .values()
            .map(|&c| c as f64 * proc_delay)
            .fold(0.0, f64::max);
    }
    let total_bytes: u64 = bytes.values().sum();
    if total_bytes > 0 {
        summary.traffic_share = bytes
            .into_iter()
            .map(|(k, v)| (k, v as f64 / total_bytes as f64))
            .collect();
    }
    summary.storage_bits_rsa = storage_estimate(nodes_meta, StorageScheme::Rsa1024);
    summary.storage_bits_ecc = storage_estimate(nodes_meta, StorageScheme::Ecc160);
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_trace_is_all_zero() {
        let s = summarize("").unwrap();
        assert_eq!(s, RunSummary::default());
    }

    #[test]
    fn hand_written_trace_tallies() {
        let trace = "\
0.000000\tproto\t0\t-\t0\t0\top=meta,nodes=3,proc=0.002000
0.100000\ttx\t1\tgri-go\t1\t48\tpurpose=pol
0.110000\trx\t2\tgri-go\t1\t48\tpurpose=pol,delay=0.010000
0.112000\tfwd\t2\tgri-go\t1\t48\tpurpose=pol
0.122000\trx\t3\tgri-go\t1\t48\tpurpose=pol,delay=0.022000
0.200000\ttx\t3\tzkp-msg\t2\t96\tpurpose=zkp
0.210000\tdrop\t3\tzkp-msg\t2\t96\treason=no-receivers
1.000000\tlinks\t0\t-\t0\t0\tcount=2
2.000000\tlinks\t0\t-\t0\t0\tcount=4
";
        let s = summarize(trace).unwrap();
        assert_eq!(s.nodes, 3);
        assert_eq!(s.generated, 3);
        assert_eq!(s.forwarded, 1);
        assert_eq!(s.lost, 1);
        assert_eq!(s.connections, 3);
        assert!((s.mean_delay - 0.016).abs() < 1e-9);
        assert!((s.max_delay - 0.022).abs() < 1e-9);
        // 48 + 48 = 96 pol bytes, 96 zkp bytes.
        assert!((s.share("pol") - 0.5).abs() < 1e-9);
        assert!((s.share("zkp") - 0.5).abs() < 1e-9);
        // 5 handled events over 3 nodes; the busiest node handled 2.
        assert!((s.mean_processing - 5.0 * 0.002 / 3.0).abs() < 1e-12);
        assert!((s.max_processing - 2.0 * 0.002).abs() < 1e-12);
        assert_eq!(s.storage_bits_rsa, 6144);
    }

    #[test]
    fn corrupt_lines_carry_their_number() {
        let trace = "0.000000\tproto\t0\t-\t0\t0\top=meta,nodes=3,proc=0.002\nnot a line\n";
        assert_eq!(
            summarize(trace).unwrap_err(),
            MetricsError::TraceCorrupt { line: 2 }
        );
    }

    #[test]
    fn storage_formula() {
        assert_eq!(storage_estimate(0, StorageScheme::Rsa1024), 0);
        assert_eq!(storage_estimate(10, StorageScheme::Rsa1024), 20_480);
        assert_eq!(storage_estimate(10, StorageScheme::Ecc160), 3_200);
        // Scheme ratio is independent of n.
        for n in [1usize, 7, 100] {
            let rsa = storage_estimate(n, StorageScheme::Rsa1024) as f64;
            let ecc = storage_estimate(n, StorageScheme::Ecc160) as f64;
            assert!((rsa / ecc - 6.4).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_header_and_row_shape() {
        assert_eq!(CSV_HEADER.split(',').count(), 13);
        let row = RunSummary::default().csv_row();
        assert_eq!(row.split(',').count(), 13);
    }

    #[test]
    fn shares_sum_to_one() {
        let trace = "\
0.000000\tproto\t0\t-\t0\t0\top=meta,nodes=2,proc=0.002000
0.100000\ttx\t1\tgri-go\t1\t100\tpurpose=pol
0.200000\ttx\t1\tzkp-msg\t2\t60\tpurpose=zkp
0.300000\ttx\t2\tinsertion-msg\t3\t40\tpurpose=insert
";
        let s = summarize(trace).unwrap();
        let total: f64 = s.traffic_share.values().sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert!((s.share("pol") - 0.5).abs() < 1e-9);
    }
}
