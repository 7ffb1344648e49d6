//! Layer graphs for NU-LiteNet-A/B and the SqueezeNet baseline, with shape
//! propagation and parameter / multiply-accumulate accounting.

mod block;
mod builders;
mod cost;
mod describe;
mod graph;

use std::fmt;
use std::str::FromStr;

pub use block::{build_nu_lite_block, BlockFragment, NuLiteBlockSpec, BRANCH_KERNELS};
pub use builders::{build_nu_litenet, build_squeezenet, INPUT_DIMS};
pub use cost::{count_macs, count_params, layer_macs, layer_params, CostReport, CostRow};
pub use describe::{describe, params_csv};
pub use graph::{Chw, GraphBuilder, LayerKind, LayerSpec, NetGraph, Stage};

use crate::error::{invalid, Result};

/// NU-Lite block flavor: A squeezes to a quarter of the input depth, B keeps it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Arch {
    NuLiteA,
    NuLiteB,
    SqueezeNet,
}

impl Arch {
    pub const ALL: [Arch; 3] = [Arch::NuLiteA, Arch::NuLiteB, Arch::SqueezeNet];

    pub fn id(&self) -> &'static str {
        match self {
            Arch::NuLiteA => "nu-lite-a",
            Arch::NuLiteB => "nu-lite-b",
            Arch::SqueezeNet => "squeezenet",
        }
    }

    pub fn build(&self, num_classes: usize) -> Result<NetGraph> {
        match self {
            Arch::NuLiteA => build_nu_litenet(Variant::A, num_classes),
            Arch::NuLiteB => build_nu_litenet(Variant::B, num_classes),
            Arch::SqueezeNet => build_squeezenet(num_classes),
        }
    }
}

impl fmt::Display for Arch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Arch {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Arch::ALL
            .into_iter()
            .find(|a| a.id() == s)
            .ok_or_else(|| invalid(format!("unknown architecture '{s}' (valid: nu-lite-a, nu-lite-b, squeezenet)")))
    }
}
