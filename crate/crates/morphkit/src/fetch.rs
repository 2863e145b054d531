//! Downloads the public outline datasets from Figshare.

use std::fs::{self, File};
use std::io;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dataset {
    pub name: &'static str,
    pub doi: &'static str,
}

pub const DATASETS: [Dataset; 3] = [
    Dataset { name: "vases", doi: "10.6084/m9.figshare.14551002" },
    Dataset { name: "leaves", doi: "10.6084/m9.figshare.14551005" },
    Dataset { name: "shells", doi: "10.6084/m9.figshare.14551044" },
];

pub fn dataset(name: &str) -> Result<Vec<Dataset>> {
    if name == "all" {
        return Ok(DATASETS.to_vec());
    }
    DATASETS
        .iter()
        .find(|d| d.name == name)
        .map(|d| vec![*d])
        .ok_or_else(|| Error::Usage(format!("unknown dataset {name:?} (vases, leaves, shells, all)")))
}

/// Figshare article id from a `10.6084/m9.figshare.<id>[.vN]` DOI.
pub fn article_id(doi: &str) -> Result<u64> {
    doi.rsplit_once("figshare.")
        .and_then(|(_, rest)| rest.split('.').next())
        .and_then(|id| id.parse().ok())
        .ok_or_else(|| Error::Usage(format!("not a Figshare DOI: {doi}")))
}

#[derive(Debug, Deserialize)]
struct Article {
    files: Vec<FileEntry>,
}

#[derive(Debug, Deserialize)]
struct FileEntry {
    name: String,
    download_url: String,
}

fn get(url: &str) -> Result<ureq::http::Response<ureq::Body>> {
    ureq::get(url).call().map_err(|e| Error::Network(format!("{url}: {e}")))
}

/// Downloads every file of the dataset's article into `out/<name>/`.
pub fn fetch(dataset: &Dataset, out: &Path) -> Result<Vec<PathBuf>> {
    let url = format!("https://api.figshare.com/v2/articles/{}", article_id(dataset.doi)?);
    let text = get(&url)?.body_mut().read_to_string().map_err(|e| Error::Network(format!("{url}: {e}")))?;
    let article: Article = serde_json::from_str(&text).map_err(|e| Error::Network(format!("{url}: {e}")))?;
    let dir = out.join(dataset.name);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut written = Vec::new();
    for f in article.files {
        let name = Path::new(&f.name).file_name().map(|n| n.to_owned()).unwrap_or_else(|| "download".into());
        let path = dir.join(name);
        let mut reader = get(&f.download_url)?.into_body().into_reader();
        let mut file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        io::copy(&mut reader, &mut file).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doi_parsing() {
        assert_eq!(article_id(DATASETS[0].doi).unwrap(), 14551002);
        assert_eq!(article_id("10.6084/m9.figshare.123.v2").unwrap(), 123);
        assert!(article_id("10.1000/xyz").is_err());
        assert_eq!(dataset("all").unwrap().len(), 3);
        assert!(dataset("fish").is_err());
    }
}
