//! C ABI for the vectorization pipeline: interpret a stroke graph from an
//! input image plus per-class probabilities, extract ordered pen strokes,
//! and render G-code or SVG text. Handles are opaque; every function
//! returns an [`SgStatus`] (or is a pure accessor on a valid handle), and
//! all panics are caught at the boundary.
//!
//! The generated header lands in `include/sketchgraph.h` at build time.

use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use sketchgraph::emit::{to_gcode, to_svg, MachineFrame};
use sketchgraph::eval::ProbabilityMap;
use sketchgraph::graph::{interpret, InterpParams, StrokeGraph};
use sketchgraph::raster::GrayImage;
use sketchgraph::sketch::{Point, Polyline};
use sketchgraph::strokes::{strokes_gen, strokes_to_points, AdjacencyList};
use sketchgraph::Error;

/// Result codes for every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    ShapeMismatch = 3,
    BufferTooSmall = 4,
    Internal = 5,
}

/// Interpretation parameters; mirror of the library defaults.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SgInterpParams {
    pub beta: f64,
    pub tau0: f64,
    pub lambda: f64,
    pub n_iters: u32,
    pub binarize_threshold: f32,
    pub min_blob_area: usize,
    pub dilate_px: u32,
    pub render_width: f64,
    /// Pair-distance cutoff in pixels; zero or negative disables it.
    pub max_edge_length: f64,
}

/// Machine frame for G-code generation.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SgMachineFrame {
    pub box_size_mm: f64,
    pub origin_x_mm: f64,
    pub origin_y_mm: f64,
    pub safe_z_mm: f64,
    pub unit_scale: f64,
}

/// Opaque interpreted graph handle.
pub struct SgGraph {
    graph: StrokeGraph,
    canvas: u32,
}

/// Opaque ordered-strokes handle.
pub struct SgStrokes {
    polylines: Vec<Polyline>,
    canvas: u32,
}

fn status_of(err: &Error) -> SgStatus {
    match err {
        Error::ShapeMismatch(_) => SgStatus::ShapeMismatch,
        Error::IndexOutOfRange(_) => SgStatus::Internal,
        _ => SgStatus::InvalidArgument,
    }
}

fn interp_params(params: &SgInterpParams) -> InterpParams {
    InterpParams {
        beta: params.beta,
        tau0: params.tau0,
        lambda: params.lambda,
        n_iters: params.n_iters,
        binarize_threshold: params.binarize_threshold,
        min_blob_area: params.min_blob_area,
        dilate_px: params.dilate_px,
        render_width: params.render_width,
        max_edge_length: (params.max_edge_length > 0.0).then_some(params.max_edge_length),
    }
}

fn machine_frame(frame: &SgMachineFrame) -> MachineFrame {
    MachineFrame {
        box_size_mm: frame.box_size_mm,
        origin_mm: Point::new(frame.origin_x_mm, frame.origin_y_mm),
        safe_z_mm: frame.safe_z_mm,
        unit_scale: frame.unit_scale,
        header: None,
    }
}

fn guarded(body: impl FnOnce() -> SgStatus) -> SgStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => SgStatus::Internal,
    }
}

/// Library version as a static C string.
#[no_mangle]
pub extern "C" fn sg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Short description of a status code (static storage).
#[no_mangle]
pub extern "C" fn sg_status_message(status: SgStatus) -> *const c_char {
    let text: &'static str = match status {
        SgStatus::Ok => "ok\0",
        SgStatus::NullArgument => "null argument\0",
        SgStatus::InvalidArgument => "invalid argument\0",
        SgStatus::ShapeMismatch => "shape mismatch\0",
        SgStatus::BufferTooSmall => "buffer too small\0",
        SgStatus::Internal => "internal error\0",
    };
    text.as_ptr() as *const c_char
}

/// Default interpretation parameters.
#[no_mangle]
pub extern "C" fn sg_interp_params_default() -> SgInterpParams {
    let p = InterpParams::default();
    SgInterpParams {
        beta: p.beta,
        tau0: p.tau0,
        lambda: p.lambda,
        n_iters: p.n_iters,
        binarize_threshold: p.binarize_threshold,
        min_blob_area: p.min_blob_area,
        dilate_px: p.dilate_px,
        render_width: p.render_width,
        max_edge_length: 0.0,
    }
}

/// Default machine frame (64 mm box at origin (25, 25) mm, pen-up at -5).
#[no_mangle]
pub extern "C" fn sg_machine_frame_default() -> SgMachineFrame {
    let f = MachineFrame::default();
    SgMachineFrame {
        box_size_mm: f.box_size_mm,
        origin_x_mm: f.origin_mm.x,
        origin_y_mm: f.origin_mm.y,
        safe_z_mm: f.safe_z_mm,
        unit_scale: f.unit_scale,
    }
}

/// Interpret a stroke graph from a grayscale input image (row-major floats
/// in 0..=1, length width*height) and per-class probabilities (plane-major,
/// length classes*width*height). On success `*out_graph` owns the result;
/// release it with [`sg_graph_free`].
///
/// # Safety
/// `input_pixels` and `probabilities` must point to buffers of the stated
/// lengths; `params` and `out_graph` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sg_interpret(
    input_pixels: *const f32,
    width: u32,
    height: u32,
    probabilities: *const f32,
    classes: usize,
    params: *const SgInterpParams,
    out_graph: *mut *mut SgGraph,
) -> SgStatus {
    if input_pixels.is_null() || probabilities.is_null() || params.is_null() || out_graph.is_null()
    {
        return SgStatus::NullArgument;
    }
    if width == 0 || height == 0 || classes != sketchgraph::raster::NUM_CLASSES {
        return SgStatus::InvalidArgument;
    }
    let pixel_count = width as usize * height as usize;
    let input = std::slice::from_raw_parts(input_pixels, pixel_count).to_vec();
    let probs = std::slice::from_raw_parts(probabilities, classes * pixel_count).to_vec();
    let params = interp_params(&*params);
    guarded(|| {
        let Ok(image) = GrayImage::from_pixels(width, height, input) else {
            return SgStatus::InvalidArgument;
        };
        let map = match ProbabilityMap::from_planes(classes, width, height, probs) {
            Ok(map) => map,
            Err(e) => return status_of(&e),
        };
        match interpret(&image, &map, &params) {
            Ok((graph, _)) => {
                *out_graph = Box::into_raw(Box::new(SgGraph {
                    graph,
                    canvas: width,
                }));
                SgStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Number of graph vertices; zero for a null handle.
///
/// # Safety
/// `graph` must be null or a live handle from [`sg_interpret`].
#[no_mangle]
pub unsafe extern "C" fn sg_graph_vertex_count(graph: *const SgGraph) -> usize {
    if graph.is_null() {
        return 0;
    }
    (*graph).graph.vertices.len()
}

/// Number of graph edges; zero for a null handle.
///
/// # Safety
/// `graph` must be null or a live handle from [`sg_interpret`].
#[no_mangle]
pub unsafe extern "C" fn sg_graph_edge_count(graph: *const SgGraph) -> usize {
    if graph.is_null() {
        return 0;
    }
    (*graph).graph.edges.len()
}

/// Copy vertex coordinates as interleaved x,y pairs. `capacity` is the
/// number of doubles `out_xy` can hold (needs 2 * vertex count).
///
/// # Safety
/// `out_xy` must point to at least `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn sg_graph_vertices(
    graph: *const SgGraph,
    out_xy: *mut f64,
    capacity: usize,
) -> SgStatus {
    if graph.is_null() || out_xy.is_null() {
        return SgStatus::NullArgument;
    }
    let vertices = &(*graph).graph.vertices;
    if capacity < 2 * vertices.len() {
        return SgStatus::BufferTooSmall;
    }
    let out = std::slice::from_raw_parts_mut(out_xy, 2 * vertices.len());
    for (i, v) in vertices.iter().enumerate() {
        out[2 * i] = v.x;
        out[2 * i + 1] = v.y;
    }
    SgStatus::Ok
}

/// Copy edges as interleaved index pairs (i, j with i < j). `capacity` is
/// the number of u32 slots (needs 2 * edge count).
///
/// # Safety
/// `out_pairs` must point to at least `capacity` u32 values.
#[no_mangle]
pub unsafe extern "C" fn sg_graph_edges(
    graph: *const SgGraph,
    out_pairs: *mut u32,
    capacity: usize,
) -> SgStatus {
    if graph.is_null() || out_pairs.is_null() {
        return SgStatus::NullArgument;
    }
    let edges = &(*graph).graph.edges;
    if capacity < 2 * edges.len() {
        return SgStatus::BufferTooSmall;
    }
    let out = std::slice::from_raw_parts_mut(out_pairs, 2 * edges.len());
    for (slot, &(i, j)) in edges.iter().enumerate() {
        out[2 * slot] = i as u32;
        out[2 * slot + 1] = j as u32;
    }
    SgStatus::Ok
}

/// Partition the graph's edges into ordered pen strokes. On success
/// `*out_strokes` owns the result; release it with [`sg_strokes_free`].
///
/// # Safety
/// `graph` must be a live handle from [`sg_interpret`]; `out_strokes` must
/// be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sg_graph_strokes(
    graph: *const SgGraph,
    out_strokes: *mut *mut SgStrokes,
) -> SgStatus {
    if graph.is_null() || out_strokes.is_null() {
        return SgStatus::NullArgument;
    }
    let handle = &*graph;
    guarded(|| {
        let adjacency = match AdjacencyList::from_edges(
            handle.graph.vertices.len(),
            handle.graph.edges.iter().copied(),
        ) {
            Ok(a) => a,
            Err(e) => return status_of(&e),
        };
        let sequence = match strokes_gen(&adjacency) {
            Ok(s) => s,
            Err(e) => return status_of(&e),
        };
        match strokes_to_points(&sequence, &handle.graph.vertices) {
            Ok(polylines) => {
                *out_strokes = Box::into_raw(Box::new(SgStrokes {
                    polylines,
                    canvas: handle.canvas,
                }));
                SgStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Number of strokes; zero for a null handle.
///
/// # Safety
/// `strokes` must be null or a live handle from [`sg_graph_strokes`].
#[no_mangle]
pub unsafe extern "C" fn sg_strokes_count(strokes: *const SgStrokes) -> usize {
    if strokes.is_null() {
        return 0;
    }
    (*strokes).polylines.len()
}

/// Number of points in one stroke; zero when out of range.
///
/// # Safety
/// `strokes` must be null or a live handle from [`sg_graph_strokes`].
#[no_mangle]
pub unsafe extern "C" fn sg_strokes_point_count(strokes: *const SgStrokes, index: usize) -> usize {
    if strokes.is_null() {
        return 0;
    }
    let handle = &*strokes;
    handle.polylines.get(index).map_or(0, |p| p.len())
}

/// Copy one stroke's points as interleaved x,y pairs. `capacity` is the
/// number of doubles `out_xy` can hold.
///
/// # Safety
/// `out_xy` must point to at least `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn sg_strokes_points(
    strokes: *const SgStrokes,
    index: usize,
    out_xy: *mut f64,
    capacity: usize,
) -> SgStatus {
    if strokes.is_null() || out_xy.is_null() {
        return SgStatus::NullArgument;
    }
    let handle = &*strokes;
    let Some(polyline) = handle.polylines.get(index) else {
        return SgStatus::InvalidArgument;
    };
    if capacity < 2 * polyline.len() {
        return SgStatus::BufferTooSmall;
    }
    let out = std::slice::from_raw_parts_mut(out_xy, 2 * polyline.len());
    for (i, p) in polyline.points().iter().enumerate() {
        out[2 * i] = p.x;
        out[2 * i + 1] = p.y;
    }
    SgStatus::Ok
}

fn string_out(text: String, out_text: *mut *mut c_char) -> SgStatus {
    match CString::new(text) {
        Ok(c) => {
            unsafe { *out_text = c.into_raw() };
            SgStatus::Ok
        }
        Err(_) => SgStatus::Internal,
    }
}

/// Render strokes as a G-code program. The returned string is owned by the
/// caller; release it with [`sg_string_free`].
///
/// # Safety
/// `strokes` must be a live handle; `frame` and `out_text` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sg_strokes_to_gcode(
    strokes: *const SgStrokes,
    frame: *const SgMachineFrame,
    out_text: *mut *mut c_char,
) -> SgStatus {
    if strokes.is_null() || frame.is_null() || out_text.is_null() {
        return SgStatus::NullArgument;
    }
    let handle = &*strokes;
    let frame = machine_frame(&*frame);
    guarded(|| match to_gcode(&handle.polylines, handle.canvas, &frame) {
        Ok(program) => string_out(program.text(), out_text),
        Err(e) => status_of(&e),
    })
}

/// Render strokes as an SVG document. The returned string is owned by the
/// caller; release it with [`sg_string_free`].
///
/// # Safety
/// `strokes` must be a live handle; `out_text` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sg_strokes_to_svg(
    strokes: *const SgStrokes,
    out_text: *mut *mut c_char,
) -> SgStatus {
    if strokes.is_null() || out_text.is_null() {
        return SgStatus::NullArgument;
    }
    let handle = &*strokes;
    guarded(|| string_out(to_svg(&handle.polylines, handle.canvas), out_text))
}

/// Release a string returned by this library. Null is a no-op.
///
/// # Safety
/// `text` must have come from this library and not been freed already.
#[no_mangle]
pub unsafe extern "C" fn sg_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(CString::from_raw(text));
    }
}

/// Release a graph handle. Null is a no-op.
///
/// # Safety
/// `graph` must have come from [`sg_interpret`] and not been freed already.
#[no_mangle]
pub unsafe extern "C" fn sg_graph_free(graph: *mut SgGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Release a strokes handle. Null is a no-op.
///
/// # Safety
/// `strokes` must have come from [`sg_graph_strokes`] and not been freed
/// already.
#[no_mangle]
pub unsafe extern "C" fn sg_strokes_free(strokes: *mut SgStrokes) {
    if !strokes.is_null() {
        drop(Box::from_raw(strokes));
    }
}
