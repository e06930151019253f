//! The per-node FIFO of membership updates. Everything an online node hears
//! through the information broadcasts lands here, and the slice after a
//! given stage is exactly what a returning node needs to catch up.

use std::collections::{BTreeSet, VecDeque};

use crate::graph::VertexId;

use super::ProtocolError;

/// One membership update as carried by an information broadcast.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateEvent {
    /// Stage the network reached by applying this update.
    pub stage: u64,
    /// Simulated time the update was committed.
    pub time: f64,
    pub kind: UpdateKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum UpdateKind {
    /// A new vertex spliced between `left` and `right`, wired to `members`.
    Insertion {
        new_id: VertexId,
        left: VertexId,
        right: VertexId,
        members: BTreeSet<VertexId>,
    },
    /// A vertex removed; its cycle neighbors are bridged.
    Deletion { removed: VertexId },
    /// A committed proof-of-life sweep. Changes no graph state but proves
    /// every roster member (and the initiator) alive at `time`.
    ProofOfLife {
        initiator: VertexId,
        roster: BTreeSet<VertexId>,
    },
}

impl UpdateEvent {
    /// True when this event proves `v` was alive at `self.time`.
    pub fn proves_life_of(&self, v: VertexId) -> bool {
        match &self.kind {
            UpdateKind::Insertion { new_id, .. } => *new_id == v,
            UpdateKind::Deletion { .. } => false,
            UpdateKind::ProofOfLife { initiator, roster } => {
                *initiator == v || roster.contains(&v)
            }
        }
    }
}

/// Time-ordered queue with a retention window; events that age out are
/// evicted from the front and remembered only by the stage high-water mark,
/// so serving a replay past the mark can be refused instead of silently
/// handing over a gap.
#[derive(Debug, Clone)]
pub struct UpdateQueue {
    events: VecDeque<UpdateEvent>,
    retention: f64,
    evicted_through_stage: u64,
}

impl UpdateQueue {
    pub fn new(retention: f64) -> Self {
        Self {
            events: VecDeque::new(),
            retention,
            evicted_through_stage: 0,
        }
    }

    /// Queue for a node that joined at `stage`: anything at or before the
    /// join stage is unavailable by construction.
    pub fn starting_at(retention: f64, stage: u64) -> Self {
        Self {
            events: VecDeque::new(),
            retention,
            evicted_through_stage: stage,
        }
    }

    pub fn retention(&self) -> f64 {
        self.retention
    }

    /// Adjusts the retention window (the threshold it tracks is adaptive).
    pub fn set_retention(&mut self, retention: f64) {
        self.retention = retention;
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn events(&self) -> impl Iterator<Item = &UpdateEvent> {
        self.events.iter()
    }

    /// Appends an event (times must be nondecreasing) and evicts whatever
    /// fell out of the retention window.
    pub fn push(&mut self, event: UpdateEvent) {
        debug_assert!(
            self.events.back().is_none_or(|last| last.time <= event.time),
            "events must arrive in time order"
        );
        let cutoff = event.time - self.retention;
        self.events.push_back(event);
        self.evict_before(cutoff);
    }

    /// Inserts an event in time order without assuming it is the newest;
    /// replayed history lands here while fresh observations may already
    /// sit in the queue.
    pub fn ingest(&mut self, event: UpdateEvent) {
        let pos = self
            .events
            .iter()
            .rposition(|e| e.time <= event.time)
            .map(|i| i + 1)
            .unwrap_or(0);
        self.events.insert(pos, event);
    }

    /// Drops events strictly older than `cutoff`, advancing the high-water
    /// mark of evicted stages.
    pub fn evict_before(&mut self, cutoff: f64) {
        while let Some(front) = self.events.front() {
            if front.time < cutoff {
                self.evicted_through_stage = self.evicted_through_stage.max(front.stage);
                self.events.pop_front();
            } else {
                break;
            }
        }
    }

    pub fn evicted_through_stage(&self) -> u64 {
        self.evicted_through_stage
    }

    /// The replay slice for a node last synced at `stage`. Refused when any
    /// needed event has already been evicted.
    pub fn events_after_stage(&self, stage: u64) -> Result<Vec<UpdateEvent>, ProtocolError> {
        if self.evicted_through_stage > stage {
            return Err(ProtocolError::StaleBeyondFifo {
                needed_after_stage: stage,
                evicted_through: self.evicted_through_stage,
            });
        }
        Ok(self
            .events
            .iter()
            .filter(|e| e.stage > stage)
            .cloned()
            .collect())
    }

    /// Latest time the queue proves `v` alive.
    pub fn last_life_of(&self, v: VertexId) -> Option<f64> {
        self.events
            .iter()
            .rev()
            .find(|e| e.proves_life_of(v))
            .map(|e| e.time)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::vid;

    fn roster_event(stage: u64, time: f64, ids: &[u32]) -> UpdateEvent {
        UpdateEvent {
            stage,
            time,
            kind: UpdateKind::ProofOfLife {
                initiator: vid(ids[0]),
                roster: ids.iter().map(|&i| vid(i)).collect(),
            },
        }
    }

    #[test]
    fn eviction_tracks_the_stage_high_water_mark() {
        let mut q = UpdateQueue::new(10.0);
        q.push(roster_event(1, 0.0, &[1, 2]));
        q.push(roster_event(2, 5.0, &[1, 2]));
        q.push(roster_event(3, 12.0, &[1, 2]));
        assert_eq!(q.len(), 2); // t=0 fell out of the 10 s window
        assert_eq!(q.evicted_through_stage(), 1);
    }

    #[test]
    fn replay_slice_respects_eviction() {
        let mut q = UpdateQueue::new(10.0);
        q.push(roster_event(1, 0.0, &[1]));
        q.push(roster_event(2, 20.0, &[1]));
        assert!(q.events_after_stage(1).is_ok());
        let err = q.events_after_stage(0).unwrap_err();
        assert!(matches!(err, ProtocolError::StaleBeyondFifo { .. }));
    }

    #[test]
    fn replay_slice_is_strictly_after_the_stage() {
        let mut q = UpdateQueue::new(100.0);
        q.push(roster_event(1, 1.0, &[1]));
        q.push(roster_event(2, 2.0, &[1]));
        q.push(roster_event(3, 3.0, &[1]));
        let slice = q.events_after_stage(1).unwrap();
        assert_eq!(slice.len(), 2);
        assert_eq!(slice[0].stage, 2);
    }

    #[test]
    fn life_lookup_finds_the_latest_mention() {
        let mut q = UpdateQueue::new(100.0);
        q.push(roster_event(1, 1.0, &[1, 2]));
        q.push(roster_event(2, 5.0, &[1]));
        assert_eq!(q.last_life_of(vid(2)), Some(1.0));
        assert_eq!(q.last_life_of(vid(1)), Some(5.0));
        assert_eq!(q.last_life_of(vid(9)), None);
    }

    #[test]
    fn insertion_proves_life_of_the_inserted_only() {
        let ev = UpdateEvent {
            stage: 4,
            time: 9.0,
            kind: UpdateKind::Insertion {
                new_id: vid(7),
                left: vid(1),
                right: vid(2),
                members: [vid(1), vid(2), vid(3)].into(),
            },
        };
        assert!(ev.proves_life_of(vid(7)));
        assert!(!ev.proves_life_of(vid(1)));
    }
}
