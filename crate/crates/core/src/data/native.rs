use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Dataset, Sample, IMAGE_BYTES};
use crate::binio::{expect_end, read_exact, read_str, read_u16, read_u32, str_bytes};
use crate::error::{Error, Result};

pub const NATIVE_MAGIC: &[u8; 4] = b"NULD";
const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NativeHeader {
    pub sample_count: usize,
    pub class_names: Vec<String>,
}

impl NativeHeader {
    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }
}

/// Little-endian layout:
/// `"NULD" | version u32 = 1 | sample_count u32 | class_count u32 |
/// class_count x (name_len u16 | UTF-8 name) | sample_count x (label u16 | 196608 RGB bytes)`.
pub fn write_native<W: Write>(ds: &Dataset, w: &mut W) -> Result<()> {
    let count = u32::try_from(ds.len()).map_err(|_| Error::Data("too many samples".into()))?;
    w.write_all(NATIVE_MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&count.to_le_bytes())?;
    w.write_all(&(ds.num_classes() as u32).to_le_bytes())?;
    for name in ds.class_names() {
        w.write_all(&str_bytes(name, "class name").map_err(|e| Error::Data(e.to_string()))?)?;
    }
    for s in ds.samples() {
        w.write_all(&(s.label as u16).to_le_bytes())?;
        w.write_all(&s.pixels)?;
    }
    Ok(())
}

pub fn read_native_header<R: Read>(r: &mut R) -> Result<NativeHeader> {
    let mut magic = [0u8; 4];
    read_exact(r, &mut magic, "magic")?;
    if &magic != NATIVE_MAGIC {
        return Err(Error::BadMagic {
            expected: "NULD".into(),
            found: String::from_utf8_lossy(&magic).into_owned(),
        });
    }
    let version = read_u32(r, "version")?;
    if version != VERSION {
        return Err(Error::BadVersion(version));
    }
    let sample_count = read_u32(r, "sample count")? as usize;
    let class_count = read_u32(r, "class count")? as usize;
    let mut class_names = Vec::with_capacity(class_count.min(1 << 16));
    for i in 0..class_count {
        class_names.push(read_str(r, &format!("name of class {i}"))?);
    }
    Ok(NativeHeader {
        sample_count,
        class_names,
    })
}

pub fn read_native<R: Read>(r: &mut R) -> Result<Dataset> {
    let header = read_native_header(r)?;
    let classes = header.class_count();
    let mut samples = Vec::with_capacity(header.sample_count.min(1 << 20));
    for i in 0..header.sample_count {
        let label = read_u16(r, &format!("label of sample {i}"))? as usize;
        if label >= classes {
            return Err(Error::Format(format!(
                "sample {i}: label {label} out of range for {classes} classes"
            )));
        }
        let mut pixels = vec![0u8; IMAGE_BYTES];
        read_exact(r, &mut pixels, &format!("pixels of sample {i}"))?;
        samples.push(Sample { label, pixels });
    }
    expect_end(r, "the last sample")?;
    Dataset::new(header.class_names, samples)
}

pub fn save_native(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::from(e).at(path))?;
    let mut w = BufWriter::new(file);
    write_native(ds, &mut w).map_err(|e| e.at(path))?;
    w.flush().map_err(|e| Error::from(e).at(path))
}

pub fn load_native(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::from(e).at(path))?;
    read_native(&mut BufReader::new(file)).map_err(|e| e.at(path))
}
