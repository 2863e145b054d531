//! Shape files: one JSON or CSV point list per shape, plus label tables.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use morphkit_core::{Point, ShapeSample};

use crate::error::{Error, Result};

pub fn read_json(path: &Path) -> Result<ShapeSample> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let sample: ShapeSample = serde_json::from_str(&text).map_err(|e| Error::format(path, e))?;
    sample.validate().map_err(|e| Error::format(path, e))?;
    Ok(sample)
}

pub fn write_json(sample: &ShapeSample, path: &Path) -> Result<()> {
    let text = serde_json::to_string(sample).map_err(|e| Error::format(path, e))?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

/// Two columns `x,y`, one point per row. A non-numeric first row is taken
/// as a header. The id is the file stem.
pub fn read_csv(path: &Path) -> Result<ShapeSample> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::format(path, e))?;
    let mut points = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::format(path, e))?;
        if record.len() < 2 {
            return Err(Error::format(path, format!("row {}: expected two columns", row + 1)));
        }
        match (record[0].parse::<f64>(), record[1].parse::<f64>()) {
            (Ok(x), Ok(y)) => points.push(Point::new(x, y)),
            _ if row == 0 => continue,
            _ => return Err(Error::format(path, format!("row {}: not a number", row + 1))),
        }
    }
    ShapeSample::new(file_stem(path), None, points).map_err(|e| Error::format(path, e))
}

pub fn write_csv(sample: &ShapeSample, path: &Path) -> Result<()> {
    let mut out = String::from("x,y\n");
    for p in &sample.points {
        out.push_str(&format!("{},{}\n", p.x, p.y));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads a point list, choosing JSON or CSV by content.
pub fn read_shape(path: &Path) -> Result<ShapeSample> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    match text.trim_start().chars().next() {
        Some('{') => read_json(path),
        Some(c) if c.is_ascii_digit() || matches!(c, '-' | '+' | '.' | 'x' | 'X' | '#') => read_csv(path),
        _ => Err(Error::format(path, "neither a JSON shape nor a CSV point list")),
    }
}

pub fn is_shape_file(path: &Path) -> bool {
    matches!(extension(path).as_deref(), Some("json" | "csv"))
}

pub(crate) fn extension(path: &Path) -> Option<String> {
    path.extension().map(|e| e.to_string_lossy().to_ascii_lowercase())
}

pub(crate) fn file_stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Shape files in `dir`, sorted by file name.
pub fn list_shapes(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && is_shape_file(p))
        .collect();
    paths.sort();
    Ok(paths)
}

/// Loads every shape under `dir` (or a single file).
pub fn read_shapes(path: &Path) -> Result<Vec<ShapeSample>> {
    let paths = if path.is_dir() { list_shapes(path)? } else { vec![path.to_path_buf()] };
    if paths.is_empty() {
        return Err(Error::format(path, "no .json or .csv shapes found"));
    }
    let shapes: Vec<ShapeSample> = paths.iter().map(|p| read_shape(p)).collect::<Result<_>>()?;
    let mut seen = BTreeMap::new();
    for (s, p) in shapes.iter().zip(&paths) {
        if let Some(prev) = seen.insert(s.id.clone(), p) {
            return Err(Error::format(p, format!("duplicate id {:?} (also in {})", s.id, prev.display())));
        }
    }
    Ok(shapes)
}

/// Writes shapes as `<dir>/<id>.json`.
pub fn write_shapes(shapes: &[ShapeSample], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for s in shapes {
        write_json(s, &dir.join(format!("{}.json", sanitize(&s.id))))?;
    }
    Ok(())
}

pub(crate) fn sanitize(id: &str) -> String {
    id.chars().map(|c| if c.is_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' }).collect()
}

/// `id,label` table. A first row of `id,label` is skipped.
pub fn read_labels(path: &Path) -> Result<BTreeMap<String, String>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::format(path, e))?;
    let mut out = BTreeMap::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::format(path, e))?;
        if record.len() < 2 {
            return Err(Error::format(path, format!("row {}: expected id,label", row + 1)));
        }
        if row == 0 && &record[0] == "id" && &record[1] == "label" {
            continue;
        }
        if record[1].is_empty() {
            return Err(Error::format(path, format!("row {}: empty label", row + 1)));
        }
        out.insert(record[0].to_string(), record[1].to_string());
    }
    Ok(out)
}

pub fn write_labels(labels: &[(String, String)], path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::format(path, e))?;
    let io = |e: csv::Error| Error::format(path, e);
    writer.write_record(["id", "label"]).map_err(io)?;
    for (id, label) in labels {
        writer.write_record([id, label]).map_err(io)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

/// Fills missing sample labels from a table; every sample must end up labeled.
pub fn apply_labels(shapes: &mut [ShapeSample], table: Option<&BTreeMap<String, String>>, source: &Path) -> Result<()> {
    for s in shapes.iter_mut() {
        if let Some(label) = table.and_then(|t| t.get(&s.id)) {
            s.label = Some(label.clone());
        }
        if s.label.as_deref().map_or(true, str::is_empty) {
            return Err(Error::format(source, format!("shape {:?} has no label", s.id)));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn awkward() -> ShapeSample {
        let pts = vec![
            Point::new(0.1 + 0.2, 1.0 / 3.0),
            Point::new(-1e-300, 5e-324),
            Point::new(123456.789e10, -0.0),
            Point::new(std::f64::consts::PI, std::f64::consts::E),
        ];
        ShapeSample::new("odd id", Some("a".into()), pts).unwrap()
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        let s = awkward();
        write_json(&s, &path).unwrap();
        let back = read_shape(&path).unwrap();
        for (a, b) in s.points.iter().zip(&back.points) {
            assert_eq!(a.x.to_bits(), b.x.to_bits());
            assert_eq!(a.y.to_bits(), b.y.to_bits());
        }
        assert_eq!(back.id, "odd id");
        assert_eq!(back.label.as_deref(), Some("a"));
    }

    #[test]
    fn csv_with_and_without_header() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        fs::write(&a, "x,y\n0,0\n1,0\n1,1\n").unwrap();
        let b = dir.path().join("b.csv");
        fs::write(&b, "0, 0\n2, 0\n2, 2\n0, 2\n").unwrap();
        assert_eq!(read_shape(&a).unwrap().n(), 3);
        let sb = read_shape(&b).unwrap();
        assert_eq!((sb.id.as_str(), sb.n()), ("b", 4));
        let c = dir.path().join("c.csv");
        write_csv(&sb, &c).unwrap();
        assert_eq!(read_shape(&c).unwrap().points, sb.points);
    }

    #[test]
    fn unknown_content_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.json");
        fs::write(&p, "hello").unwrap();
        assert!(matches!(read_shape(&p), Err(Error::Format { .. })));
    }

    #[test]
    fn labels_table() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("labels.csv");
        write_labels(&[("a".into(), "x".into()), ("b".into(), "y, z".into())], &p).unwrap();
        let t = read_labels(&p).unwrap();
        assert_eq!(t["b"], "y, z");
        assert_eq!(t.len(), 2);
    }
}
