//! C ABI over the slcm library.
//!
//! Handles are opaque; every fallible call returns an [`SlcmStatus`] and
//! writes results through out-pointers. Strings returned by this library
//! are owned by the caller and must be released with [`slcm_string_free`].

use std::ffi::{c_char, CStr, CString};
use std::ptr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use slcm::graph::{
    brute_force_find_cycle, complete_graph, delete_vertex, generate_initial_cycle, insert_vertex,
    verify_cycle, HamiltonianCycle, NetworkGraph, Permutation, VertexId,
};
use slcm::metrics::{run_scenario, ScenarioConfig, CSV_HEADER};
use slcm::protocol::next_vertex_id;
use slcm::zkp::{run_protocol, CheatStrategy, ProverStrategy};

/// Status code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlcmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ProtocolViolation = 3,
    RuntimeFailure = 4,
}

/// One group secret: the public graph, the private cycle, and the seeded
/// generator driving its randomized updates. Opaque across the ABI.
pub struct SlcmNetwork {
    graph: NetworkGraph,
    cycle: HamiltonianCycle,
    rng: ChaCha8Rng,
}

/// Builds a founding network of `nodes` vertices and `edges` edges under
/// the given seed and writes the handle to `out`.
///
/// # Safety
/// `out` must be a valid, writable pointer.
#[no_mangle]
pub unsafe extern "C" fn slcm_network_create(
    nodes: u32,
    edges: u32,
    seed: u64,
    out: *mut *mut SlcmNetwork,
) -> SlcmStatus {
    if out.is_null() {
        return SlcmStatus::NullPointer;
    }
    let Some(ids) = (1..=nodes).map(VertexId::new).collect::<Option<std::collections::BTreeSet<_>>>()
    else {
        return SlcmStatus::InvalidArgument;
    };
    if ids.len() < 3 {
        return SlcmStatus::InvalidArgument;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let permutations: Vec<Permutation> =
        ids.iter().map(|_| Permutation::random(&ids, &mut rng)).collect();
    let cycle = match generate_initial_cycle(&permutations) {
        Ok(c) => c,
        Err(_) => return SlcmStatus::InvalidArgument,
    };
    let graph = match complete_graph(&cycle, edges as usize, &mut rng) {
        Ok(g) => g,
        Err(_) => return SlcmStatus::InvalidArgument,
    };
    let handle = Box::new(SlcmNetwork { graph, cycle, rng });
    unsafe { *out = Box::into_raw(handle) };
    SlcmStatus::Ok
}

/// Releases a handle returned by [`slcm_network_create`]. A null pointer
/// is ignored.
///
/// # Safety
/// `network` must have been returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn slcm_network_destroy(network: *mut SlcmNetwork) {
    if !network.is_null() {
        drop(unsafe { Box::from_raw(network) });
    }
}

/// # Safety
/// `network` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn slcm_network_vertex_count(network: *const SlcmNetwork) -> u32 {
    match unsafe { network.as_ref() } {
        Some(n) => n.graph.vertex_count() as u32,
        None => 0,
    }
}

/// # Safety
/// `network` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn slcm_network_edge_count(network: *const SlcmNetwork) -> u32 {
    match unsafe { network.as_ref() } {
        Some(n) => n.graph.edge_count() as u32,
        None => 0,
    }
}

/// # Safety
/// `network` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn slcm_network_stage(network: *const SlcmNetwork) -> u64 {
    match unsafe { network.as_ref() } {
        Some(n) => n.graph.stage(),
        None => 0,
    }
}

/// Whether the stored cycle is a valid Hamiltonian cycle of the stored
/// graph (it always is unless the handle was corrupted).
///
/// # Safety
/// `network` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn slcm_network_cycle_valid(network: *const SlcmNetwork) -> bool {
    match unsafe { network.as_ref() } {
        Some(n) => verify_cycle(&n.graph, &n.cycle),
        None => false,
    }
}

/// Splices the lowest free identifier into the secret and writes it to
/// `out_id`.
///
/// # Safety
/// `network` must be a live handle; `out_id` must be writable.
#[no_mangle]
pub unsafe extern "C" fn slcm_network_insert_vertex(
    network: *mut SlcmNetwork,
    out_id: *mut u32,
) -> SlcmStatus {
    let Some(state) = (unsafe { network.as_mut() }) else {
        return SlcmStatus::NullPointer;
    };
    if out_id.is_null() {
        return SlcmStatus::NullPointer;
    }
    let new_id = next_vertex_id(state.graph.vertices());
    match insert_vertex(&state.graph, &state.cycle, new_id, &mut state.rng) {
        Ok((graph, cycle, _group)) => {
            state.graph = graph;
            state.cycle = cycle;
            unsafe { *out_id = new_id.get() };
            SlcmStatus::Ok
        }
        Err(_) => SlcmStatus::ProtocolViolation,
    }
}

/// Removes a vertex, bridging its cycle neighbors. Networks never shrink
/// below three vertices.
///
/// # Safety
/// `network` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn slcm_network_delete_vertex(
    network: *mut SlcmNetwork,
    id: u32,
) -> SlcmStatus {
    let Some(state) = (unsafe { network.as_mut() }) else {
        return SlcmStatus::NullPointer;
    };
    let Some(id) = VertexId::new(id) else {
        return SlcmStatus::InvalidArgument;
    };
    match delete_vertex(&state.graph, &state.cycle, id, 3) {
        Ok((graph, cycle)) => {
            state.graph = graph;
            state.cycle = cycle;
            SlcmStatus::Ok
        }
        Err(_) => SlcmStatus::ProtocolViolation,
    }
}

/// Confirms (by exhaustive search, capped at 12 vertices) that the public
/// graph really contains a Hamiltonian cycle. Intended for bindings tests.
///
/// # Safety
/// `network` must be a live handle; `out_found` must be writable.
#[no_mangle]
pub unsafe extern "C" fn slcm_network_search_cycle(
    network: *const SlcmNetwork,
    out_found: *mut bool,
) -> SlcmStatus {
    let Some(state) = (unsafe { network.as_ref() }) else {
        return SlcmStatus::NullPointer;
    };
    if out_found.is_null() {
        return SlcmStatus::NullPointer;
    }
    match brute_force_find_cycle(&state.graph) {
        Ok(found) => {
            unsafe { *out_found = found.is_some() };
            SlcmStatus::Ok
        }
        Err(_) => SlcmStatus::InvalidArgument,
    }
}

/// The plain-text edge-list form of the public graph. Free the result
/// with [`slcm_string_free`]; returns null on a null handle.
///
/// # Safety
/// `network` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn slcm_network_graph_text(network: *const SlcmNetwork) -> *mut c_char {
    match unsafe { network.as_ref() } {
        Some(state) => CString::new(state.graph.canonical_text())
            .map_or(ptr::null_mut(), CString::into_raw),
        None => ptr::null_mut(),
    }
}

/// Runs one interactive proof session against the handle's secret:
/// `honest` provers use the stored cycle, dishonest ones run the blind
/// coin-flip strategy. Writes the verdict to `out_accepted`.
///
/// # Safety
/// `network` must be a live handle; `out_accepted` must be writable.
#[no_mangle]
pub unsafe extern "C" fn slcm_zkp_session(
    network: *const SlcmNetwork,
    rounds: u32,
    seed: u64,
    honest: bool,
    out_accepted: *mut bool,
) -> SlcmStatus {
    let Some(state) = (unsafe { network.as_ref() }) else {
        return SlcmStatus::NullPointer;
    };
    if out_accepted.is_null() {
        return SlcmStatus::NullPointer;
    }
    if rounds == 0 {
        return SlcmStatus::InvalidArgument;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let strategy = if honest {
        ProverStrategy::Honest {
            graph: &state.graph,
            cycle: &state.cycle,
        }
    } else {
        ProverStrategy::Cheat(CheatStrategy::CoinFlip)
    };
    match run_protocol(strategy, &state.graph, rounds as usize, &mut rng) {
        Ok(transcript) => {
            unsafe { *out_accepted = transcript.accepted };
            SlcmStatus::Ok
        }
        Err(_) => SlcmStatus::RuntimeFailure,
    }
}

/// Runs a full simulation scenario from config text (the flat `key =
/// value` format) and returns the summary CSV (header line plus one row).
/// Free the result with [`slcm_string_free`].
///
/// # Safety
/// `config_text` must be a valid NUL-terminated string; `out_csv` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn slcm_scenario_run(
    config_text: *const c_char,
    out_csv: *mut *mut c_char,
) -> SlcmStatus {
    if config_text.is_null() || out_csv.is_null() {
        return SlcmStatus::NullPointer;
    }
    let Ok(text) = (unsafe { CStr::from_ptr(config_text) }).to_str() else {
        return SlcmStatus::InvalidArgument;
    };
    let cfg = match ScenarioConfig::parse(text) {
        Ok(cfg) => cfg,
        Err(_) => return SlcmStatus::InvalidArgument,
    };
    match run_scenario(&cfg) {
        Ok(run) => {
            let csv = format!("{CSV_HEADER}\n{}\n", run.summary.csv_row());
            match CString::new(csv) {
                Ok(s) => {
                    unsafe { *out_csv = s.into_raw() };
                    SlcmStatus::Ok
                }
                Err(_) => SlcmStatus::RuntimeFailure,
            }
        }
        Err(_) => SlcmStatus::RuntimeFailure,
    }
}

/// Releases a string returned by this library. A null pointer is ignored.
///
/// # Safety
/// `s` must have been returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn slcm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn slcm_status_message(status: SlcmStatus) -> *const c_char {
    let msg: &'static CStr = match status {
        SlcmStatus::Ok => c"ok",
        SlcmStatus::NullPointer => c"null pointer argument",
        SlcmStatus::InvalidArgument => c"invalid argument",
        SlcmStatus::ProtocolViolation => c"operation violates the membership rules",
        SlcmStatus::RuntimeFailure => c"runtime failure",
    };
    msg.as_ptr()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn handle_lifecycle_and_graph_ops() {
        unsafe {
            let mut handle: *mut SlcmNetwork = ptr::null_mut();
            assert_eq!(
                slcm_network_create(10, 30, 7, &mut handle),
                SlcmStatus::Ok
            );
            assert!(!handle.is_null());
            assert_eq!(slcm_network_vertex_count(handle), 10);
            assert_eq!(slcm_network_edge_count(handle), 30);
            assert_eq!(slcm_network_stage(handle), 0);
            assert!(slcm_network_cycle_valid(handle));

            let mut new_id = 0u32;
            assert_eq!(
                slcm_network_insert_vertex(handle, &mut new_id),
                SlcmStatus::Ok
            );
            assert_eq!(new_id, 11);
            assert_eq!(slcm_network_vertex_count(handle), 11);
            assert!(slcm_network_cycle_valid(handle));

            assert_eq!(slcm_network_delete_vertex(handle, 4), SlcmStatus::Ok);
            assert!(slcm_network_cycle_valid(handle));
            assert_eq!(slcm_network_stage(handle), 2);
            assert_eq!(
                slcm_network_delete_vertex(handle, 99),
                SlcmStatus::ProtocolViolation
            );

            let text = slcm_network_graph_text(handle);
            assert!(!text.is_null());
            let s = CStr::from_ptr(text).to_str().unwrap().to_string();
            assert!(s.starts_with("graph 10 "));
            slcm_string_free(text);

            slcm_network_destroy(handle);
        }
    }

    #[test]
    fn exhaustive_search_confirms_small_instances() {
        unsafe {
            let mut handle: *mut SlcmNetwork = ptr::null_mut();
            assert_eq!(slcm_network_create(8, 16, 3, &mut handle), SlcmStatus::Ok);
            let mut found = false;
            assert_eq!(
                slcm_network_search_cycle(handle, &mut found),
                SlcmStatus::Ok
            );
            assert!(found);
            slcm_network_destroy(handle);
        }
    }

    #[test]
    fn zkp_sessions_across_the_boundary() {
        unsafe {
            let mut handle: *mut SlcmNetwork = ptr::null_mut();
            assert_eq!(slcm_network_create(8, 16, 5, &mut handle), SlcmStatus::Ok);
            let mut accepted = false;
            assert_eq!(
                slcm_zkp_session(handle, 20, 1, true, &mut accepted),
                SlcmStatus::Ok
            );
            assert!(accepted);
            // A 20-round blind cheat is accepted with probability 2^-20.
            assert_eq!(
                slcm_zkp_session(handle, 20, 2, false, &mut accepted),
                SlcmStatus::Ok
            );
            assert!(!accepted);
            slcm_network_destroy(handle);
        }
    }

    #[test]
    fn scenario_runs_from_config_text() {
        unsafe {
            let cfg = CString::new("nodes = 10\nduration = 20\nseed = 3\n").unwrap();
            let mut out: *mut c_char = ptr::null_mut();
            assert_eq!(slcm_scenario_run(cfg.as_ptr(), &mut out), SlcmStatus::Ok);
            let text = CStr::from_ptr(out).to_str().unwrap().to_string();
            assert!(text.starts_with("nodes,connections,"));
            assert_eq!(text.lines().count(), 2);
            slcm_string_free(out);

            let bad = CString::new("nodes = 2\n").unwrap();
            assert_eq!(
                slcm_scenario_run(bad.as_ptr(), &mut out),
                SlcmStatus::InvalidArgument
            );
        }
    }

    #[test]
    fn null_arguments_are_reported() {
        unsafe {
            assert_eq!(
                slcm_network_create(10, 30, 0, ptr::null_mut()),
                SlcmStatus::NullPointer
            );
            assert_eq!(slcm_network_vertex_count(ptr::null()), 0);
            assert!(!slcm_network_cycle_valid(ptr::null()));
            let msg = CStr::from_ptr(slcm_status_message(SlcmStatus::NullPointer));
            assert_eq!(msg.to_str().unwrap(), "null pointer argument");
            slcm_network_destroy(ptr::null_mut());
            slcm_string_free(ptr::null_mut());
        }
    }

    #[test]
    fn infeasible_densities_are_invalid() {
        unsafe {
            let mut handle: *mut SlcmNetwork = ptr::null_mut();
            assert_eq!(
                slcm_network_create(4, 8, 0, &mut handle),
                SlcmStatus::InvalidArgument
            );
            assert_eq!(
                slcm_network_create(2, 1, 0, &mut handle),
                SlcmStatus::InvalidArgument
            );
        }
    }
}
