//! On-disk formats: 8-bit grayscale PNG for inputs, 8-bit class-id PNG for
//! labels, a raw little-endian float format with a JSON header line for
//! probability maps, and the JSON graph/strokes schemas.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::ProbabilityMap;
use crate::raster::{GrayImage, LabelImage, NUM_CLASSES};
use crate::sketch::{Point, Polyline};

fn open(path: &Path) -> Result<fs::File> {
    fs::File::open(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}

fn write_png_gray8(path: &Path, width: u32, height: u32, data: &[u8]) -> Result<()> {
    let file = create(path)?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), width, height);
    encoder.set_color(png::ColorType::Grayscale);
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder.write_header()?;
    writer.write_image_data(data)?;
    Ok(())
}

fn read_png_gray8(path: &Path) -> Result<(u32, u32, Vec<u8>)> {
    let decoder = png::Decoder::new(BufReader::new(open(path)?));
    let mut reader = decoder.read_info()?;
    let mut buf = vec![0u8; reader.output_buffer_size().expect("png buffer size")];
    let info = reader.next_frame(&mut buf)?;
    if info.color_type != png::ColorType::Grayscale || info.bit_depth != png::BitDepth::Eight {
        return Err(Error::Png(format!(
            "{}: expected 8-bit grayscale, got {:?}/{:?}",
            path.display(),
            info.color_type,
            info.bit_depth
        )));
    }
    buf.truncate(info.buffer_size());
    Ok((info.width, info.height, buf))
}

/// Write intensities as 8-bit grayscale (0.0 -> 0, 1.0 -> 255).
pub fn write_gray_png(path: &Path, image: &GrayImage) -> Result<()> {
    let data: Vec<u8> = image
        .pixels()
        .iter()
        .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    write_png_gray8(path, image.width(), image.height(), &data)
}

pub fn read_gray_png(path: &Path) -> Result<GrayImage> {
    let (w, h, data) = read_png_gray8(path)?;
    GrayImage::from_pixels(w, h, data.iter().map(|&b| b as f32 / 255.0).collect())
}

/// Write class ids as raw 8-bit grayscale values.
pub fn write_labels_png(path: &Path, labels: &LabelImage) -> Result<()> {
    write_png_gray8(path, labels.width(), labels.height(), labels.labels())
}

pub fn read_labels_png(path: &Path) -> Result<LabelImage> {
    let (w, h, data) = read_png_gray8(path)?;
    if let Some(&bad) = data.iter().find(|&&b| b as usize >= NUM_CLASSES) {
        return Err(Error::InvalidInput(format!(
            "{}: value {bad} is not a class id",
            path.display()
        )));
    }
    LabelImage::from_labels(w, h, data)
}

#[derive(Serialize, Deserialize)]
struct ProbmapHeader {
    k: usize,
    h: u32,
    w: u32,
    order: String,
}

/// Probability map file: one JSON header line
/// `{"k":3,"h":…,"w":…,"order":"khw"}` followed by k·h·w little-endian f32s.
pub fn write_probmap(path: &Path, probs: &ProbabilityMap) -> Result<()> {
    let mut file = BufWriter::new(create(path)?);
    let header = ProbmapHeader {
        k: probs.k(),
        h: probs.height(),
        w: probs.width(),
        order: "khw".to_string(),
    };
    serde_json::to_writer(&mut file, &header)?;
    file.write_all(b"\n")?;
    for &v in probs.probs() {
        file.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_probmap(path: &Path) -> Result<ProbabilityMap> {
    let mut bytes = Vec::new();
    open(path)?.read_to_end(&mut bytes)?;
    let newline = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::InvalidInput(format!("{}: missing header line", path.display())))?;
    let header: ProbmapHeader = serde_json::from_slice(&bytes[..newline])?;
    if header.order != "khw" {
        return Err(Error::InvalidInput(format!(
            "{}: unsupported plane order {:?}",
            path.display(),
            header.order
        )));
    }
    let payload = &bytes[newline + 1..];
    let expected = header.k * header.h as usize * header.w as usize;
    if payload.len() != expected * 4 {
        return Err(Error::ShapeMismatch(format!(
            "{}: expected {} float bytes, got {}",
            path.display(),
            expected * 4,
            payload.len()
        )));
    }
    let probs: Vec<f32> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    let map = ProbabilityMap::from_planes(header.k, header.w, header.h, probs)?;
    map.validate()?;
    Ok(map)
}

/// Graph file schema: real-valued vertices and 0-based index edges (i < j).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub vertices: Vec<(f64, f64)>,
    pub edges: Vec<(usize, usize)>,
}

impl GraphFile {
    pub fn new(vertices: &[Point], edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut edges: Vec<(usize, usize)> = edges
            .into_iter()
            .map(|(i, j)| (i.min(j), i.max(j)))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        GraphFile {
            vertices: vertices.iter().map(|p| (p.x, p.y)).collect(),
            edges,
        }
    }

    pub fn vertex_points(&self) -> Vec<Point> {
        self.vertices.iter().map(|&(x, y)| Point::new(x, y)).collect()
    }
}

pub fn write_graph_json(path: &Path, graph: &GraphFile) -> Result<()> {
    let mut file = BufWriter::new(create(path)?);
    serde_json::to_writer_pretty(&mut file, graph)?;
    file.write_all(b"\n")?;
    Ok(())
}

pub fn read_graph_json(path: &Path) -> Result<GraphFile> {
    let text = fs::read_to_string(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })?;
    let graph: GraphFile = serde_json::from_str(&text)?;
    for &(i, j) in &graph.edges {
        if i >= j {
            return Err(Error::InvalidInput(format!("edge ({i}, {j}) is not i < j")));
        }
        if j >= graph.vertices.len() {
            return Err(Error::IndexOutOfRange(j));
        }
    }
    Ok(graph)
}

/// Strokes file schema: ordered strokes of [x, y] canvas coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrokesFile {
    pub strokes: Vec<Vec<(f64, f64)>>,
}

impl StrokesFile {
    pub fn from_polylines(polylines: &[Polyline]) -> Self {
        StrokesFile {
            strokes: polylines
                .iter()
                .map(|p| p.points().iter().map(|q| (q.x, q.y)).collect())
                .collect(),
        }
    }

    pub fn to_polylines(&self) -> Result<Vec<Polyline>> {
        self.strokes
            .iter()
            .map(|pts| Polyline::new(pts.iter().map(|&(x, y)| Point::new(x, y)).collect()))
            .collect()
    }
}

pub fn write_strokes_json(path: &Path, strokes: &StrokesFile) -> Result<()> {
    let mut file = BufWriter::new(create(path)?);
    serde_json::to_writer_pretty(&mut file, strokes)?;
    file.write_all(b"\n")?;
    Ok(())
}

pub fn read_strokes_json(path: &Path) -> Result<StrokesFile> {
    let text = fs::read_to_string(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut file = create(path)?;
    file.write_all(text.as_bytes())?;
    Ok(())
}

pub fn write_json_pretty<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut file = BufWriter::new(create(path)?);
    serde_json::to_writer_pretty(&mut file, value)?;
    file.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::{labels_to_probmap, make_labels};
    use crate::sketch::Sketch;

    fn temp_dir() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    fn small_fixture() -> (GrayImage, LabelImage) {
        let sketch = Sketch {
            canvas_size: 32,
            strokes: vec![Polyline::new(vec![Point::new(4.0, 16.0), Point::new(28.0, 16.0)])
                .unwrap()],
        };
        make_labels(&sketch, 2.0, 3.0).unwrap()
    }

    #[test]
    fn gray_png_roundtrip() {
        let dir = temp_dir();
        let (x, _) = small_fixture();
        let path = dir.path().join("x.png");
        write_gray_png(&path, &x).unwrap();
        let back = read_gray_png(&path).unwrap();
        assert_eq!(back.width(), 32);
        // Binary images survive 8-bit quantization exactly.
        assert_eq!(back.binarize(0.5), x.binarize(0.5));
    }

    #[test]
    fn labels_png_roundtrip() {
        let dir = temp_dir();
        let (_, y) = small_fixture();
        let path = dir.path().join("y.png");
        write_labels_png(&path, &y).unwrap();
        let back = read_labels_png(&path).unwrap();
        assert_eq!(back, y);
    }

    #[test]
    fn probmap_roundtrip() {
        let dir = temp_dir();
        let (_, y) = small_fixture();
        let probs = labels_to_probmap(&y);
        let path = dir.path().join("p.bin");
        write_probmap(&path, &probs).unwrap();
        let back = read_probmap(&path).unwrap();
        assert_eq!(back, probs);
    }

    #[test]
    fn probmap_truncated_payload_rejected() {
        let dir = temp_dir();
        let path = dir.path().join("p.bin");
        fs::write(&path, b"{\"k\":3,\"h\":2,\"w\":2,\"order\":\"khw\"}\n\x00\x00").unwrap();
        assert!(matches!(read_probmap(&path), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn graph_json_roundtrip() {
        let dir = temp_dir();
        let vertices = vec![Point::new(1.5, 2.0), Point::new(10.0, 12.0), Point::new(3.0, 9.0)];
        let graph = GraphFile::new(&vertices, [(2, 0), (0, 1)]);
        assert_eq!(graph.edges, vec![(0, 1), (0, 2)]);
        let path = dir.path().join("g.json");
        write_graph_json(&path, &graph).unwrap();
        let back = read_graph_json(&path).unwrap();
        assert_eq!(back, graph);
    }

    #[test]
    fn graph_json_rejects_bad_edges() {
        let dir = temp_dir();
        let path = dir.path().join("g.json");
        fs::write(&path, r#"{"vertices": [[0,0],[1,1]], "edges": [[1,0]]}"#).unwrap();
        assert!(read_graph_json(&path).is_err());
        fs::write(&path, r#"{"vertices": [[0,0],[1,1]], "edges": [[0,5]]}"#).unwrap();
        assert!(read_graph_json(&path).is_err());
    }

    #[test]
    fn strokes_json_roundtrip() {
        let dir = temp_dir();
        let polys = vec![
            Polyline::new(vec![Point::new(0.0, 0.0), Point::new(5.0, 5.0)]).unwrap(),
        ];
        let file = StrokesFile::from_polylines(&polys);
        let path = dir.path().join("s.json");
        write_strokes_json(&path, &file).unwrap();
        let back = read_strokes_json(&path).unwrap();
        assert_eq!(back.to_polylines().unwrap(), polys);
    }

    #[test]
    fn missing_file_error_names_path() {
        let err = read_gray_png(Path::new("/nonexistent/file.png")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/file.png"));
    }
}
