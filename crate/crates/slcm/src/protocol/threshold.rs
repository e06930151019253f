//! The single parameter `T` governing both the proof-of-life period and the
//! longest tolerated offline gap, plus the majority quorum that gates
//! insertions and roster commits.

use std::collections::BTreeSet;

use crate::graph::VertexId;

/// Adaptive offline threshold. Starts at a configured value "large enough"
/// and, after each successful access control, tracks the observed offline
/// durations as mean plus population standard deviation plus epsilon.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdT {
    current: f64,
    initial: f64,
    epsilon: f64,
    offline_history: Vec<f64>,
}

impl ThresholdT {
    pub fn new(initial: f64, epsilon: f64) -> Self {
        assert!(initial > 0.0, "threshold must be positive");
        assert!(epsilon > 0.0, "epsilon must be positive");
        Self {
            current: initial,
            initial,
            epsilon,
            offline_history: Vec::new(),
        }
    }

    pub fn current(&self) -> f64 {
        self.current
    }

    pub fn history(&self) -> &[f64] {
        &self.offline_history
    }
}

/// Folds one observed offline duration into the threshold.
pub fn update_threshold(th: &ThresholdT, observed_offline: f64) -> ThresholdT {
    debug_assert!(observed_offline >= 0.0);
    let mut next = th.clone();
    next.offline_history.push(observed_offline);
    let n = next.offline_history.len() as f64;
    let mean = next.offline_history.iter().sum::<f64>() / n;
    let variance = next
        .offline_history
        .iter()
        .map(|x| (x - mean).powi(2))
        .sum::<f64>()
        / n;
    next.current = mean + variance.sqrt() + next.epsilon;
    next
}

/// Majority gate: an insertion or roster commits only once at least
/// `ceil(n/2)` of the `n` live vertices answered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quorum {
    pub required: usize,
    pub received: BTreeSet<VertexId>,
}

impl Quorum {
    pub fn new(live_vertices: usize) -> Self {
        Self {
            required: Self::needed(live_vertices),
            received: BTreeSet::new(),
        }
    }

    /// Fewer than n/2 answers aborts, so exactly n/2 (rounded up for odd n)
    /// is the commit point.
    pub fn needed(live_vertices: usize) -> usize {
        live_vertices.div_ceil(2)
    }

    pub fn record(&mut self, responder: VertexId) {
        self.received.insert(responder);
    }

    pub fn satisfied(&self) -> bool {
        self.received.len() >= self.required
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::vid;

    #[test]
    fn zero_variance_history() {
        let mut th = ThresholdT::new(100.0, 1.0);
        for _ in 0..3 {
            th = update_threshold(&th, 10.0);
        }
        assert!((th.current() - 11.0).abs() < 1e-12);
    }

    #[test]
    fn population_stddev_is_used() {
        let mut th = ThresholdT::new(100.0, 2.0);
        th = update_threshold(&th, 5.0);
        th = update_threshold(&th, 15.0);
        // mean 10, population stddev 5, epsilon 2
        assert!((th.current() - 17.0).abs() < 1e-12);
    }

    #[test]
    fn empty_history_keeps_the_initial_value() {
        let th = ThresholdT::new(90.0, 1.0);
        assert_eq!(th.current(), 90.0);
        assert!(th.history().is_empty());
    }

    #[test]
    fn quorum_boundaries() {
        assert_eq!(Quorum::needed(10), 5);
        assert_eq!(Quorum::needed(9), 5);

        let mut q = Quorum::new(10);
        for i in 1..=4 {
            q.record(vid(i));
        }
        assert!(!q.satisfied());
        q.record(vid(5));
        assert!(q.satisfied());
    }

    #[test]
    fn duplicate_answers_count_once() {
        let mut q = Quorum::new(4);
        q.record(vid(1));
        q.record(vid(1));
        assert_eq!(q.received.len(), 1);
        assert!(!q.satisfied());
    }
}
