//! `NULT` checkpoints: named f32 tensors plus the architecture and class
//! count needed to rebuild the network.
//!
//! Little-endian layout: `"NULT" | version u32 = 1 | arch_id (u16 len + UTF-8)
//! | num_classes u32 | tensor_count u32 | per tensor: name (u16 len + UTF-8)
//! | ndim u8 | dims u32 x ndim | f32 data`.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::architectures::Arch;
use crate::binio::{expect_end, read_exact, read_str, read_u32, read_u8, str_bytes};
use crate::error::{Error, Result};
use crate::model::Network;

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"NULT";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct NamedTensor {
    pub name: String,
    pub dims: Vec<usize>,
    pub data: Vec<f32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub arch_id: String,
    pub num_classes: usize,
    pub tensors: Vec<NamedTensor>,
}

/// Header fields plus totals, for tooling.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckpointMeta {
    pub arch_id: String,
    pub num_classes: usize,
    pub tensor_count: usize,
    pub values: usize,
    pub bytes: usize,
}

impl CheckpointMeta {
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "format": "NULT",
            "version": CHECKPOINT_VERSION,
            "arch": self.arch_id,
            "num_classes": self.num_classes,
            "tensor_count": self.tensor_count,
            "values": self.values,
            "bytes": self.bytes,
        })
        .to_string()
    }
}

impl Checkpoint {
    pub fn from_network(net: &Network) -> Self {
        Self {
            arch_id: net.arch().id().to_string(),
            num_classes: net.num_classes(),
            tensors: net
                .tensors()
                .into_iter()
                .map(|t| NamedTensor {
                    name: t.name,
                    dims: t.dims,
                    data: t.values.to_vec(),
                })
                .collect(),
        }
    }

    /// Stored values across all tensors.
    pub fn value_count(&self) -> usize {
        self.tensors.iter().map(|t| t.data.len()).sum()
    }

    /// Exact serialized size in bytes.
    pub fn encoded_len(&self) -> usize {
        let header = 4 + 4 + 2 + self.arch_id.len() + 4 + 4;
        let per_tensor: usize = self
            .tensors
            .iter()
            .map(|t| 2 + t.name.len() + 1 + 4 * t.dims.len() + 4 * t.data.len())
            .sum();
        header + per_tensor
    }

    pub fn meta(&self) -> CheckpointMeta {
        CheckpointMeta {
            arch_id: self.arch_id.clone(),
            num_classes: self.num_classes,
            tensor_count: self.tensors.len(),
            values: self.value_count(),
            bytes: self.encoded_len(),
        }
    }

    pub fn write<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(CHECKPOINT_MAGIC)?;
        w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
        w.write_all(&str_bytes(&self.arch_id, "arch id")?)?;
        w.write_all(&u32_of(self.num_classes, "num_classes")?.to_le_bytes())?;
        w.write_all(&u32_of(self.tensors.len(), "tensor count")?.to_le_bytes())?;
        for t in &self.tensors {
            let numel: usize = t.dims.iter().product();
            if numel != t.data.len() {
                return Err(Error::Format(format!(
                    "tensor {}: dims {:?} hold {numel} values but data has {}",
                    t.name,
                    t.dims,
                    t.data.len()
                )));
            }
            w.write_all(&str_bytes(&t.name, "tensor name")?)?;
            let ndim = u8::try_from(t.dims.len()).map_err(|_| Error::Format(format!("tensor {} has too many dims", t.name)))?;
            w.write_all(&[ndim])?;
            for &d in &t.dims {
                w.write_all(&u32_of(d, "dimension")?.to_le_bytes())?;
            }
            let mut bytes = Vec::with_capacity(4 * t.data.len());
            t.data.iter().for_each(|v| bytes.extend_from_slice(&v.to_le_bytes()));
            w.write_all(&bytes)?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(self.encoded_len());
        self.write(&mut out)?;
        Ok(out)
    }

    pub fn read<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 4];
        read_exact(r, &mut magic, "magic")?;
        if &magic != CHECKPOINT_MAGIC {
            return Err(Error::BadMagic {
                expected: "NULT".into(),
                found: String::from_utf8_lossy(&magic).into_owned(),
            });
        }
        let version = read_u32(r, "version")?;
        if version != CHECKPOINT_VERSION {
            return Err(Error::BadVersion(version));
        }
        let arch_id = read_str(r, "arch id")?;
        let num_classes = read_u32(r, "num_classes")? as usize;
        let count = read_u32(r, "tensor count")? as usize;
        let mut tensors = Vec::with_capacity(count.min(4096));
        for i in 0..count {
            let name = read_str(r, &format!("name of tensor {i}"))?;
            let ndim = read_u8(r, &format!("ndim of {name}"))? as usize;
            let dims = (0..ndim)
                .map(|_| read_u32(r, &format!("dims of {name}")).map(|d| d as usize))
                .collect::<Result<Vec<_>>>()?;
            let numel = dims
                .iter()
                .try_fold(1usize, |acc, &d| acc.checked_mul(d))
                .filter(|&n| n <= 1 << 30)
                .ok_or_else(|| Error::Format(format!("tensor {name}: implausible dims {dims:?}")))?;
            let mut bytes = vec![0u8; 4 * numel];
            read_exact(r, &mut bytes, &format!("data of {name}"))?;
            let data = bytes
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
                .collect();
            tensors.push(NamedTensor { name, dims, data });
        }
        expect_end(r, "the last tensor")?;
        Ok(Self {
            arch_id,
            num_classes,
            tensors,
        })
    }

    /// Rebuilds the network, checking the tensor inventory against the
    /// named architecture: every missing, extra or mis-shaped tensor is
    /// reported by name.
    pub fn into_network(self) -> Result<Network> {
        let arch: Arch = self.arch_id.parse().map_err(|e: Error| Error::Inventory(e.to_string()))?;
        let mut net = Network::from_arch(arch, self.num_classes, 0)
            .map_err(|e| Error::Inventory(format!("cannot build {arch} with {} classes: {e}", self.num_classes)))?;
        let expected: Vec<(String, Vec<usize>)> = net.tensors().into_iter().map(|t| (t.name, t.dims)).collect();
        let mut stored: HashMap<&str, &NamedTensor> = HashMap::new();
        let mut problems = Vec::new();
        for t in &self.tensors {
            if stored.insert(&t.name, t).is_some() {
                problems.push(format!("duplicate tensor {}", t.name));
            }
        }
        for (name, dims) in &expected {
            match stored.remove(name.as_str()) {
                None => problems.push(format!("missing tensor {name}")),
                Some(t) if &t.dims != dims => {
                    problems.push(format!("tensor {name} has dims {:?}, expected {dims:?}", t.dims))
                }
                Some(_) => {}
            }
        }
        let mut extra: Vec<&str> = stored.keys().copied().collect();
        extra.sort_unstable();
        problems.extend(extra.iter().map(|n| format!("unexpected tensor {n}")));
        if !problems.is_empty() {
            return Err(Error::Inventory(problems.join("; ")));
        }
        for t in &self.tensors {
            net.tensor_mut(&t.name).expect("inventory checked").copy_from_slice(&t.data);
        }
        net.ensure_finite()?;
        Ok(net)
    }
}

fn u32_of(v: usize, what: &str) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::Format(format!("{what} {v} does not fit in u32")))
}

/// Sibling temp file so the final rename stays on one filesystem.
fn temp_path(path: &Path) -> PathBuf {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!(".{name}.{}.tmp", std::process::id()))
}

/// Writes `bytes` to a temp file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = temp_path(path);
    let result = (|| -> std::io::Result<()> {
        let mut w = BufWriter::new(File::create(&tmp)?);
        w.write_all(bytes)?;
        w.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(|e| Error::from(e).at(path))
}

/// Saves every parameter and running statistic of `net`. Refuses
/// non-finite values.
pub fn save_checkpoint(net: &Network, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    net.ensure_finite().map_err(|e| e.at(path))?;
    let bytes = Checkpoint::from_network(net).to_bytes().map_err(|e| e.at(path))?;
    write_atomic(path, &bytes)
}

pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::from(e).at(path))?;
    Checkpoint::read(&mut BufReader::new(file)).map_err(|e| e.at(path))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Network> {
    let path = path.as_ref();
    read_checkpoint(path)?.into_network().map_err(|e| e.at(path))
}
