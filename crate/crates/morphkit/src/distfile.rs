//! Distance matrix CSV: a `# provenance` comment line holding JSON, a
//! header row of ids, then row `i` holding `d(i,i), d(i,i+1), …, d(i,n-1)`.

use std::fs;
use std::io::Write;
use std::path::Path;

use morphkit_core::DistanceMatrix;

use crate::error::{Error, Result};
use crate::provenance::Provenance;

const MARKER: &str = "# provenance ";

pub fn write_distances(matrix: &DistanceMatrix, provenance: &Provenance, path: &Path) -> Result<()> {
    fs::write(path, render_distances(matrix, provenance)?).map_err(|e| Error::io(path, e))
}

pub fn render_distances(matrix: &DistanceMatrix, provenance: &Provenance) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let header = serde_json::to_string(provenance).map_err(|e| Error::Usage(e.to_string()))?;
    writeln!(out, "{MARKER}{header}").unwrap();
    {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(&mut out);
        let err = |e: csv::Error| Error::Usage(e.to_string());
        w.write_record(matrix.ids()).map_err(err)?;
        let n = matrix.size();
        for i in 0..n {
            w.write_record((i..n).map(|j| format!("{}", matrix.get(i, j)))).map_err(err)?;
        }
        w.flush().map_err(|e| Error::Usage(e.to_string()))?;
    }
    Ok(out)
}

/// Reads a matrix written by [`write_distances`]. Full square rows are
/// accepted too. Method and parameters come from the provenance line.
pub fn read_distances(path: &Path) -> Result<(DistanceMatrix, Option<Provenance>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let (provenance, body) = match text.strip_prefix(MARKER) {
        Some(rest) => {
            let (line, body) = rest.split_once('\n').unwrap_or((rest, ""));
            let p: Provenance = serde_json::from_str(line).map_err(|e| Error::format(path, e))?;
            (Some(p), body)
        }
        None => (None, text.as_str()),
    };
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(body.as_bytes());
    let ids: Vec<String> = reader.headers().map_err(|e| Error::format(path, e))?.iter().map(String::from).collect();
    let n = ids.len();
    let mut entries = vec![0.0; n * n];
    let mut rows = 0;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::format(path, e))?;
        if i >= n {
            return Err(Error::format(path, format!("more than {n} rows")));
        }
        let values: Vec<f64> = record
            .iter()
            .map(|v| v.parse::<f64>().map_err(|_| Error::format(path, format!("row {}: bad number {v:?}", i + 1))))
            .collect::<Result<_>>()?;
        let start = match values.len() {
            l if l == n - i => i,
            l if l == n => 0,
            l => return Err(Error::format(path, format!("row {}: {l} values, expected {}", i + 1, n - i))),
        };
        for (k, v) in values.iter().enumerate() {
            let j = start + k;
            entries[i * n + j] = *v;
            if j > i {
                entries[j * n + i] = *v;
            }
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::format(path, format!("{rows} rows for {n} ids")));
    }
    let (method, params) = match &provenance {
        Some(p) => (p.method.clone().unwrap_or_default(), p.params.clone()),
        None => (String::new(), Default::default()),
    };
    let matrix = DistanceMatrix::new(ids, entries, method, params).map_err(|e| Error::format(path, e))?;
    Ok((matrix, provenance))
}
