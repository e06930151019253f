#ifndef SLCM_H
#define SLCM_H

/* Generated by cbindgen from the slcm-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status code of every fallible call.
typedef enum SlcmStatus {
  SLCM_STATUS_OK = 0,
  SLCM_STATUS_NULL_POINTER = 1,
  SLCM_STATUS_INVALID_ARGUMENT = 2,
  SLCM_STATUS_PROTOCOL_VIOLATION = 3,
  SLCM_STATUS_RUNTIME_FAILURE = 4,
} SlcmStatus;

// One group secret: the public graph, the private cycle, and the seeded
// generator driving its randomized updates. Opaque across the ABI.
typedef struct SlcmNetwork SlcmNetwork;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Builds a founding network of `nodes` vertices and `edges` edges under
// the given seed and writes the handle to `out`.
//
// # Safety
// `out` must be a valid, writable pointer.
enum SlcmStatus slcm_network_create(uint32_t nodes,
                                    uint32_t edges,
                                    uint64_t seed,
                                    struct SlcmNetwork **out);

// Releases a handle returned by [`slcm_network_create`]. A null pointer
// is ignored.
//
// # Safety
// `network` must have been returned by this library and not yet freed.
void slcm_network_destroy(struct SlcmNetwork *network);

// # Safety
// `network` must be a live handle from this library.
uint32_t slcm_network_vertex_count(const struct SlcmNetwork *network);

// # Safety
// `network` must be a live handle from this library.
uint32_t slcm_network_edge_count(const struct SlcmNetwork *network);

// # Safety
// `network` must be a live handle from this library.
uint64_t slcm_network_stage(const struct SlcmNetwork *network);

// Whether the stored cycle is a valid Hamiltonian cycle of the stored
// graph (it always is unless the handle was corrupted).
//
// # Safety
// `network` must be a live handle from this library.
bool slcm_network_cycle_valid(const struct SlcmNetwork *network);

// Splices the lowest free identifier into the secret and writes it to
// `out_id`.
//
// # Safety
// `network` must be a live handle; `out_id` must be writable.
enum SlcmStatus slcm_network_insert_vertex(struct SlcmNetwork *network, uint32_t *out_id);

// Removes a vertex, bridging its cycle neighbors. Networks never shrink
// below three vertices.
//
// # Safety
// `network` must be a live handle from this library.
enum SlcmStatus slcm_network_delete_vertex(struct SlcmNetwork *network, uint32_t id);

// Confirms (by exhaustive search, capped at 12 vertices) that the public
// graph really contains a Hamiltonian cycle. Intended for bindings tests.
//
// # Safety
// `network` must be a live handle; `out_found` must be writable.
enum SlcmStatus slcm_network_search_cycle(const struct SlcmNetwork *network, bool *out_found);

// The plain-text edge-list form of the public graph. Free the result
// with [`slcm_string_free`]; returns null on a null handle.
//
// # Safety
// `network` must be a live handle from this library.
char *slcm_network_graph_text(const struct SlcmNetwork *network);

// Runs one interactive proof session against the handle's secret:
// `honest` provers use the stored cycle, dishonest ones run the blind
// coin-flip strategy. Writes the verdict to `out_accepted`.
//
// # Safety
// `network` must be a live handle; `out_accepted` must be writable.
enum SlcmStatus slcm_zkp_session(const struct SlcmNetwork *network,
                                 uint32_t rounds,
                                 uint64_t seed,
                                 bool honest,
                                 bool *out_accepted);

// Runs a full simulation scenario from config text (the flat `key =
// value` format) and returns the summary CSV (header line plus one row).
// Free the result with [`slcm_string_free`].
//
// # Safety
// `config_text` must be a valid NUL-terminated string; `out_csv` must be
// writable.
enum SlcmStatus slcm_scenario_run(const char *config_text, char **out_csv);

// Releases a string returned by this library. A null pointer is ignored.
//
// # Safety
// `s` must have been returned by this library and not yet freed.
void slcm_string_free(char *s);

// Static description of a status code.
const char *slcm_status_message(enum SlcmStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SLCM_H */
