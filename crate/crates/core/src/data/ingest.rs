use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::{Dataset, Sample, IMAGE_SIDE};
use crate::error::{Error, Result};

/// 8-bit RGB raster, row-major with interleaved channels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

/// Parses a binary PPM (`P6`, maxval <= 255). Comments (`#` to end of line)
/// are allowed between header tokens.
pub fn read_ppm(bytes: &[u8]) -> Result<RgbImage> {
    let mut pos = 0;
    let token = |pos: &mut usize| -> Result<String> {
        loop {
            match bytes.get(*pos) {
                Some(b'#') => {
                    while bytes.get(*pos).is_some_and(|&b| b != b'\n') {
                        *pos += 1;
                    }
                }
                Some(b) if b.is_ascii_whitespace() => *pos += 1,
                Some(_) => break,
                None => return Err(Error::Truncated("PPM header".into())),
            }
        }
        let start = *pos;
        while bytes.get(*pos).is_some_and(|b| !b.is_ascii_whitespace()) {
            *pos += 1;
        }
        Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
    };

    let magic = token(&mut pos)?;
    if magic != "P6" {
        return Err(Error::BadMagic {
            expected: "P6".into(),
            found: magic,
        });
    }
    let mut number = |what: &str| -> Result<usize> {
        token(&mut pos)?
            .parse()
            .map_err(|_| Error::Format(format!("PPM {what} is not a number")))
    };
    let width = number("width")?;
    let height = number("height")?;
    let maxval = number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::Format("PPM has a zero dimension".into()));
    }
    if maxval == 0 || maxval > 255 {
        return Err(Error::Format(format!("unsupported PPM maxval {maxval}")));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let len = width * height * 3;
    let raster = bytes
        .get(pos..pos + len)
        .ok_or_else(|| Error::Truncated("PPM raster".into()))?;
    let pixels = if maxval == 255 {
        raster.to_vec()
    } else {
        raster.iter().map(|&v| ((v as u32 * 255 + maxval as u32 / 2) / maxval as u32) as u8).collect()
    };
    Ok(RgbImage { width, height, pixels })
}

pub fn write_ppm<W: Write>(img: &RgbImage, w: &mut W) -> Result<()> {
    write!(w, "P6\n{} {}\n255\n", img.width, img.height)?;
    w.write_all(&img.pixels)?;
    Ok(())
}

/// Bilinear resampling with pixel-center alignment, edges clamped.
pub fn resize_bilinear(img: &RgbImage, width: usize, height: usize) -> RgbImage {
    if img.width == width && img.height == height {
        return img.clone();
    }
    let sx = img.width as f32 / width as f32;
    let sy = img.height as f32 / height as f32;
    let coord = |dst: usize, scale: f32, limit: usize| -> (usize, usize, f32) {
        let src = ((dst as f32 + 0.5) * scale - 0.5).max(0.0);
        let i0 = (src.floor() as usize).min(limit - 1);
        let i1 = (i0 + 1).min(limit - 1);
        (i0, i1, src - i0 as f32)
    };
    let mut pixels = vec![0u8; width * height * 3];
    for y in 0..height {
        let (y0, y1, fy) = coord(y, sy, img.height);
        for x in 0..width {
            let (x0, x1, fx) = coord(x, sx, img.width);
            for ch in 0..3 {
                let at = |yy: usize, xx: usize| img.pixels[(yy * img.width + xx) * 3 + ch] as f32;
                let top = at(y0, x0) * (1.0 - fx) + at(y0, x1) * fx;
                let bottom = at(y1, x0) * (1.0 - fx) + at(y1, x1) * fx;
                pixels[(y * width + x) * 3 + ch] = (top * (1.0 - fy) + bottom * fy).round().clamp(0.0, 255.0) as u8;
            }
        }
    }
    RgbImage { width, height, pixels }
}

#[derive(Clone, Debug, Default)]
pub struct IngestOptions {
    /// Skip undecodable files instead of failing.
    pub skip_bad: bool,
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::from(e).at(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| !p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with('.')))
        .collect();
    entries.sort();
    Ok(entries)
}

/// One subdirectory per class under `root`; class index is the sorted
/// position of the directory name, samples are ordered by file name. Every
/// image is resized to 256x256 regardless of aspect ratio. Only binary PPM
/// is decoded; convert other formats beforehand.
pub fn ingest_folder(root: impl AsRef<Path>, opts: &IngestOptions) -> Result<Dataset> {
    let root = root.as_ref();
    let class_dirs: Vec<PathBuf> = sorted_entries(root)?.into_iter().filter(|p| p.is_dir()).collect();
    if class_dirs.is_empty() {
        return Err(Error::Data(format!("{}: no class directories", root.display())));
    }
    let mut class_names = Vec::new();
    let mut samples = Vec::new();
    for (label, dir) in class_dirs.iter().enumerate() {
        let name = dir
            .file_name()
            .and_then(|n| n.to_str())
            .ok_or_else(|| Error::Data(format!("{}: class directory name is not UTF-8", dir.display())))?;
        class_names.push(name.to_string());
        let mut count = 0;
        for file in sorted_entries(dir)?.into_iter().filter(|p| p.is_file()) {
            let decoded = fs::read(&file)
                .map_err(Error::from)
                .and_then(|bytes| read_ppm(&bytes));
            match decoded {
                Ok(img) => {
                    let img = resize_bilinear(&img, IMAGE_SIDE, IMAGE_SIDE);
                    samples.push(Sample { label, pixels: img.pixels });
                    count += 1;
                }
                Err(_) if opts.skip_bad => continue,
                Err(e) => return Err(e.at(&file)),
            }
        }
        if count == 0 {
            return Err(Error::Data(format!("{}: class directory has no images", dir.display())));
        }
    }
    Dataset::new(class_names, samples)
}
