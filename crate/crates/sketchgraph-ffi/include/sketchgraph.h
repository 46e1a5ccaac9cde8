#ifndef SKETCHGRAPH_H
#define SKETCHGRAPH_H

/* Generated by cbindgen from sketchgraph-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes for every fallible call.
 */
typedef enum SgStatus {
  SG_STATUS_OK = 0,
  SG_STATUS_NULL_ARGUMENT = 1,
  SG_STATUS_INVALID_ARGUMENT = 2,
  SG_STATUS_SHAPE_MISMATCH = 3,
  SG_STATUS_BUFFER_TOO_SMALL = 4,
  SG_STATUS_INTERNAL = 5,
} SgStatus;

/*
 Opaque interpreted graph handle.
 */
typedef struct SgGraph SgGraph;

/*
 Opaque ordered-strokes handle.
 */
typedef struct SgStrokes SgStrokes;

/*
 Interpretation parameters; mirror of the library defaults.
 */
typedef struct SgInterpParams {
  double beta;
  double tau0;
  double lambda;
  uint32_t n_iters;
  float binarize_threshold;
  size_t min_blob_area;
  uint32_t dilate_px;
  double render_width;
  /*
   Pair-distance cutoff in pixels; zero or negative disables it.
   */
  double max_edge_length;
} SgInterpParams;

/*
 Machine frame for G-code generation.
 */
typedef struct SgMachineFrame {
  double box_size_mm;
  double origin_x_mm;
  double origin_y_mm;
  double safe_z_mm;
  double unit_scale;
} SgMachineFrame;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static C string.
 */
const char *sg_version(void);

/*
 Short description of a status code (static storage).
 */
const char *sg_status_message(enum SgStatus status);

/*
 Default interpretation parameters.
 */
struct SgInterpParams sg_interp_params_default(void);

/*
 Default machine frame (64 mm box at origin (25, 25) mm, pen-up at -5).
 */
struct SgMachineFrame sg_machine_frame_default(void);

/*
 Interpret a stroke graph from a grayscale input image (row-major floats
 in 0..=1, length width*height) and per-class probabilities (plane-major,
 length classes*width*height). On success `*out_graph` owns the result;
 release it with [`sg_graph_free`].

 # Safety
 `input_pixels` and `probabilities` must point to buffers of the stated
 lengths; `params` and `out_graph` must be valid pointers.
 */
enum SgStatus sg_interpret(const float *input_pixels,
                           uint32_t width,
                           uint32_t height,
                           const float *probabilities,
                           size_t classes,
                           const struct SgInterpParams *params,
                           struct SgGraph **out_graph);

/*
 Number of graph vertices; zero for a null handle.

 # Safety
 `graph` must be null or a live handle from [`sg_interpret`].
 */
size_t sg_graph_vertex_count(const struct SgGraph *graph);

/*
 Number of graph edges; zero for a null handle.

 # Safety
 `graph` must be null or a live handle from [`sg_interpret`].
 */
size_t sg_graph_edge_count(const struct SgGraph *graph);

/*
 Copy vertex coordinates as interleaved x,y pairs. `capacity` is the
 number of doubles `out_xy` can hold (needs 2 * vertex count).

 # Safety
 `out_xy` must point to at least `capacity` doubles.
 */
enum SgStatus sg_graph_vertices(const struct SgGraph *graph, double *out_xy, size_t capacity);

/*
 Copy edges as interleaved index pairs (i, j with i < j). `capacity` is
 the number of u32 slots (needs 2 * edge count).

 # Safety
 `out_pairs` must point to at least `capacity` u32 values.
 */
enum SgStatus sg_graph_edges(const struct SgGraph *graph, uint32_t *out_pairs, size_t capacity);

/*
 Partition the graph's edges into ordered pen strokes. On success
 `*out_strokes` owns the result; release it with [`sg_strokes_free`].

 # Safety
 `graph` must be a live handle from [`sg_interpret`]; `out_strokes` must
 be a valid pointer.
 */
enum SgStatus sg_graph_strokes(const struct SgGraph *graph, struct SgStrokes **out_strokes);

/*
 Number of strokes; zero for a null handle.

 # Safety
 `strokes` must be null or a live handle from [`sg_graph_strokes`].
 */
size_t sg_strokes_count(const struct SgStrokes *strokes);

/*
 Number of points in one stroke; zero when out of range.

 # Safety
 `strokes` must be null or a live handle from [`sg_graph_strokes`].
 */
size_t sg_strokes_point_count(const struct SgStrokes *strokes, size_t index);

/*
 Copy one stroke's points as interleaved x,y pairs. `capacity` is the
 number of doubles `out_xy` can hold.

 # Safety
 `out_xy` must point to at least `capacity` doubles.
 */
enum SgStatus sg_strokes_points(const struct SgStrokes *strokes,
                                size_t index,
                                double *out_xy,
                                size_t capacity);

/*
 Render strokes as a G-code program. The returned string is owned by the
 caller; release it with [`sg_string_free`].

 # Safety
 `strokes` must be a live handle; `frame` and `out_text` valid pointers.
 */
enum SgStatus sg_strokes_to_gcode(const struct SgStrokes *strokes,
                                  const struct SgMachineFrame *frame,
                                  char **out_text);

/*
 Render strokes as an SVG document. The returned string is owned by the
 caller; release it with [`sg_string_free`].

 # Safety
 `strokes` must be a live handle; `out_text` a valid pointer.
 */
enum SgStatus sg_strokes_to_svg(const struct SgStrokes *strokes, char **out_text);

/*
 Release a string returned by this library. Null is a no-op.

 # Safety
 `text` must have come from this library and not been freed already.
 */
void sg_string_free(char *text);

/*
 Release a graph handle. Null is a no-op.

 # Safety
 `graph` must have come from [`sg_interpret`] and not been freed already.
 */
void sg_graph_free(struct SgGraph *graph);

/*
 Release a strokes handle. Null is a no-op.

 # Safety
 `strokes` must have come from [`sg_graph_strokes`] and not been freed
 already.
 */
void sg_strokes_free(struct SgStrokes *strokes);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SKETCHGRAPH_H */
