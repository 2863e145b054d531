//! Grayscale image loading (PNG, PGM P2/P5).

use std::path::Path;

use morphkit_core::outline::Raster;

use crate::error::{Error, Result};
use crate::shapes::extension;

pub fn is_image_file(path: &Path) -> bool {
    matches!(extension(path).as_deref(), Some("png" | "pgm" | "pnm"))
}

/// Loads an image as intensities in `[0, 1]`.
pub fn load_raster(path: &Path) -> Result<Raster> {
    let img = image::ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|e| Error::format(path, e))?
        .into_luma16();
    let (w, h) = img.dimensions();
    let data = img.into_raw().into_iter().map(|v| v as f64 / u16::MAX as f64).collect();
    Raster::new(w as usize, h as usize, data).map_err(|e| Error::core(path.display().to_string(), e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_and_binary_pgm_agree() {
        let dir = tempfile::tempdir().unwrap();
        let ascii = dir.path().join("a.pgm");
        std::fs::write(&ascii, "P2\n# comment\n3 2\n255\n0 128 255\n255 0 64\n").unwrap();
        let binary = dir.path().join("b.pgm");
        let mut bytes = b"P5\n3 2\n255\n".to_vec();
        bytes.extend([0u8, 128, 255, 255, 0, 64]);
        std::fs::write(&binary, bytes).unwrap();
        let (a, b) = (load_raster(&ascii).unwrap(), load_raster(&binary).unwrap());
        assert_eq!(a, b);
        assert_eq!((a.width(), a.height()), (3, 2));
        assert_eq!(a.get(2, 0), 1.0);
        assert_eq!(a.get(1, 1), 0.0);
    }

    #[test]
    fn png_loads() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.png");
        image::GrayImage::from_fn(4, 3, |x, y| image::Luma([(x * 60 + y) as u8])).save(&p).unwrap();
        let r = load_raster(&p).unwrap();
        assert_eq!((r.width(), r.height()), (4, 3));
        assert!((r.get(3, 2) - 182.0 / 255.0).abs() < 1e-12);
    }
}
