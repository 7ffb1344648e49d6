//! Datasets of 256x256 RGB images: the native `NULD` file format, PPM
//! folder ingestion, crop/flip augmentation and a synthetic generator.

mod augment;
mod ingest;
mod native;
mod synth;

pub use augment::{augment, augment_into, hflip, AugmentConfig, CROP_SIDE};
pub use ingest::{ingest_folder, read_ppm, resize_bilinear, write_ppm, IngestOptions, RgbImage};
pub use native::{load_native, read_native, read_native_header, save_native, write_native, NativeHeader, NATIVE_MAGIC};
pub use synth::synth_dataset;

use crate::error::{Error, Result};

pub const IMAGE_SIDE: usize = 256;
/// Bytes of one stored image, row-major with interleaved R,G,B.
pub const IMAGE_BYTES: usize = IMAGE_SIDE * IMAGE_SIDE * 3;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sample {
    pub label: usize,
    /// `IMAGE_BYTES` of HWC RGB.
    pub pixels: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    class_names: Vec<String>,
    samples: Vec<Sample>,
}

impl Dataset {
    pub fn new(class_names: Vec<String>, samples: Vec<Sample>) -> Result<Self> {
        if class_names.len() > u16::MAX as usize + 1 {
            return Err(Error::Data(format!("too many classes ({})", class_names.len())));
        }
        for (i, s) in samples.iter().enumerate() {
            if s.label >= class_names.len() {
                return Err(Error::Data(format!(
                    "sample {i}: label {} out of range for {} classes",
                    s.label,
                    class_names.len()
                )));
            }
            if s.pixels.len() != IMAGE_BYTES {
                return Err(Error::Data(format!(
                    "sample {i}: image has {} bytes, expected {IMAGE_BYTES}",
                    s.pixels.len()
                )));
            }
        }
        Ok(Self {
            class_names,
            samples,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn labels(&self) -> Vec<usize> {
        self.samples.iter().map(|s| s.label).collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes()];
        self.samples.iter().for_each(|s| counts[s.label] += 1);
        counts
    }
}
