//! Machine output: G-code for a CNC pen plotter and SVG paths for a robotic
//! arm. Canvas coordinates map into a square machine box (default 64 mm at
//! origin (25, 25) mm) with the Y axis flipped so drawings come out
//! non-mirrored. Coordinates are emitted with fixed two-decimal formatting;
//! moves assume the machine is in absolute positioning mode.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sketch::{Point, Polyline};

/// Machine coordinate frame and unit handling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MachineFrame {
    /// Side of the square drawing area, in mm.
    pub box_size_mm: f64,
    /// Machine position of the canvas corner (x at canvas 0, y at canvas s).
    pub origin_mm: Point,
    /// Pen-up height; emitted with the disengage move.
    pub safe_z_mm: f64,
    /// Multiplier applied to every emitted coordinate for machines that do
    /// not interpret words as mm (e.g. 0.1 for cm units).
    pub unit_scale: f64,
    /// Optional raw lines prepended to the program.
    pub header: Option<String>,
}

impl Default for MachineFrame {
    fn default() -> Self {
        MachineFrame {
            box_size_mm: 64.0,
            origin_mm: Point::new(25.0, 25.0),
            safe_z_mm: -5.0,
            unit_scale: 1.0,
            header: None,
        }
    }
}

/// An ordered G-code command list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GcodeProgram {
    pub lines: Vec<String>,
}

impl GcodeProgram {
    /// Program text with LF line endings and a trailing newline.
    pub fn text(&self) -> String {
        let mut out = self.lines.join("\n");
        out.push('\n');
        out
    }
}

/// Minimal-width number formatting for Z words: integers print bare,
/// fractions keep up to two decimals (`-5` not `-5.00`, `-0.5` not `-0.50`).
fn fmt_z(value: f64) -> String {
    let rounded = (value * 100.0).round() / 100.0;
    if rounded == rounded.trunc() {
        format!("{}", rounded as i64)
    } else {
        let s = format!("{rounded:.2}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Translate canvas-space strokes into a plotter program.
///
/// Per stroke: travel to the first vertex pen-up, engage (`G01 Z0`), emit
/// the remaining vertices, disengage (`G00 Z<safe>`). The program always
/// starts with a disengage so the pen is up before the first travel.
pub fn to_gcode(strokes: &[Polyline], canvas: u32, frame: &MachineFrame) -> Result<GcodeProgram> {
    let s = canvas as f64;
    let scale = frame.unit_scale;
    let disengage = format!("G00 Z{}", fmt_z(frame.safe_z_mm * scale));
    let mut lines = Vec::new();
    if let Some(header) = &frame.header {
        lines.extend(header.lines().map(str::to_string));
    }
    lines.push(disengage.clone());
    for (stroke_idx, stroke) in strokes.iter().enumerate() {
        for (vertex_idx, p) in stroke.points().iter().enumerate() {
            if !(0.0..=s).contains(&p.x) || !(0.0..=s).contains(&p.y) {
                return Err(Error::OutOfCanvas {
                    stroke: stroke_idx,
                    vertex: vertex_idx,
                    x: p.x,
                    y: p.y,
                });
            }
            let x_mm = (frame.origin_mm.x + (p.x / s) * frame.box_size_mm) * scale;
            let y_mm = (frame.origin_mm.y + (1.0 - p.y / s) * frame.box_size_mm) * scale;
            lines.push(format!("X{x_mm:.2} Y{y_mm:.2}"));
            if vertex_idx == 0 {
                lines.push("G01 Z0".to_string());
            }
        }
        lines.push(disengage.clone());
    }
    Ok(GcodeProgram { lines })
}

/// Canvas coordinate for SVG path data: up to two decimals, trailing zeros
/// trimmed.
fn fmt_coord(value: f64) -> String {
    let rounded = (value * 100.0).round() / 100.0;
    if rounded == rounded.trunc() {
        format!("{}", rounded as i64)
    } else {
        let s = format!("{rounded:.2}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Render strokes as an SVG document, one `<path>` per stroke in stroke
/// order, in canvas units.
pub fn to_svg(strokes: &[Polyline], canvas: u32) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{canvas}\" height=\"{canvas}\" \
         viewBox=\"0 0 {canvas} {canvas}\" fill=\"none\" stroke=\"black\" stroke-width=\"1\">\n"
    ));
    for stroke in strokes {
        let mut d = String::new();
        for (i, p) in stroke.points().iter().enumerate() {
            if i == 0 {
                d.push_str(&format!("M {} {}", fmt_coord(p.x), fmt_coord(p.y)));
            } else {
                d.push_str(&format!(" L {} {}", fmt_coord(p.x), fmt_coord(p.y)));
            }
        }
        out.push_str(&format!("  <path d=\"{d}\" />\n"));
    }
    out.push_str("</svg>\n");
    out
}
