//! sketchgraph: line-art vectorization through segmentation masks.
//!
//! The pipeline reads a raster line drawing plus a 3-class segmentation
//! (background / lines / corners), interprets an explicit stroke graph from
//! the masks, partitions the graph into ordered pen strokes, and emits
//! plotter-ready G-code and SVG. The crate also synthesizes the training
//! dataset for the segmentation stage from vector stroke data (Quick-draw
//! style files) and implements the associated evaluation math: weighted
//! cross-entropy variants, IoU, and the valid-convolution shape calculator.

pub mod config;
pub mod dataset;
pub mod emit;
mod error;
pub mod eval;
pub mod fixtures;
pub mod graph;
pub mod io;
pub mod raster;
pub mod sketch;
pub mod strokes;
pub mod study;

pub use error::{Error, Result};
