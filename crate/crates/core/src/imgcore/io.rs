//! PNG / PGM (P5) reading and writing.

use std::path::Path;

use image::{DynamicImage, ImageFormat};

use super::{to_grayscale, BinaryImage, GrayImage, RgbImage};
use crate::error::{Error, Result};

fn format_for(path: &Path) -> Result<ImageFormat> {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase) {
        Some(ext) if ext == "png" => Ok(ImageFormat::Png),
        Some(ext) if ext == "pgm" || ext == "pnm" => Ok(ImageFormat::Pnm),
        _ => Err(Error::InvalidInput(format!(
            "{}: unsupported image extension (expected .png or .pgm)",
            path.display()
        ))),
    }
}

fn open(path: &Path) -> Result<DynamicImage> {
    let bytes = std::fs::read(path)?;
    Ok(image::load_from_memory_with_format(&bytes, format_for(path)?)?)
}

/// Reads an image as RGB.
pub fn read_rgb(path: impl AsRef<Path>) -> Result<RgbImage> {
    Ok(open(path.as_ref())?.to_rgb8())
}

/// Reads an image as grayscale. Color inputs go through Rec.601 luma.
pub fn read_gray(path: impl AsRef<Path>) -> Result<GrayImage> {
    match open(path.as_ref())? {
        DynamicImage::ImageLuma8(buf) => {
            GrayImage::new(buf.width() as usize, buf.height() as usize, buf.into_raw())
        }
        other => to_grayscale(&other.to_rgb8()),
    }
}

pub fn write_gray(path: impl AsRef<Path>, img: &GrayImage) -> Result<()> {
    let path = path.as_ref();
    let buf = image::GrayImage::from_raw(img.width() as u32, img.height() as u32, img.pixels().to_vec())
        .expect("buffer length matches dimensions");
    buf.save_with_format(path, format_for(path)?)?;
    Ok(())
}

/// 0 is written as black, 1 as white.
pub fn write_binary(path: impl AsRef<Path>, img: &BinaryImage) -> Result<()> {
    write_gray(path, &img.to_gray())
}

pub fn write_rgb(path: impl AsRef<Path>, img: &RgbImage) -> Result<()> {
    let path = path.as_ref();
    img.save_with_format(path, format_for(path)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_and_pgm_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let img = GrayImage::from_fn(13, 7, |x, y| (x * 19 + y * 3) as u8).unwrap();
        for name in ["a.png", "a.pgm"] {
            let p = dir.path().join(name);
            write_gray(&p, &img).unwrap();
            assert_eq!(read_gray(&p).unwrap(), img);
        }
    }

    #[test]
    fn binary_writes_black_and_white() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("b.pgm");
        let bin = BinaryImage::new(2, 1, vec![0, 1]).unwrap();
        write_binary(&p, &bin).unwrap();
        assert_eq!(read_gray(&p).unwrap().pixels(), &[0, 255]);
    }

    #[test]
    fn unknown_extension_rejected() {
        let img = GrayImage::filled(2, 2, 0).unwrap();
        assert!(matches!(write_gray("x.bmp", &img), Err(Error::InvalidInput(_))));
    }
}
