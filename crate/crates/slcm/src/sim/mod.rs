//! Deterministic discrete-event wireless simulator: disk-range radio,
//! random-waypoint mobility, the three-phase go/return/information
//! broadcast, a flooding baseline, and packet accounting.

mod engine;
mod event;
mod mobility;
mod packet;
mod radio;
mod trace;

pub use engine::{
    Engine, EngineConfig, GriResult, LifecycleConfig, PacketCounters, SimError,
};
pub use event::{EventKind, EventQueue, SimEvent, Timer, TxMode};
pub use mobility::{step_mobility, Arena, MobilityState};
pub use packet::{Packet, PacketKind, Purpose, HEADER_BYTES};
pub use radio::{is_connected, link_count, neighbors, RadioModel};
pub use trace::{render, TraceEvent, TraceRecord};
