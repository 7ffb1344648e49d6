//! Dense rank-4 `f32` tensors in N,C,H,W row-major order, plus the seeded
//! generator used for every random draw in the crate.

use std::fmt;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{invalid, shape, Error, Result};

/// Dense `(n, c, h, w)` tensor. Width is the fastest-moving axis.
#[derive(Clone, PartialEq)]
pub struct Tensor4 {
    dims: [usize; 4],
    data: Vec<f32>,
}

fn element_count(dims: [usize; 4]) -> Result<usize> {
    if dims.contains(&0) {
        return Err(shape(format!("zero-sized dimension in {dims:?}")));
    }
    dims.iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .filter(|&n| n <= isize::MAX as usize / std::mem::size_of::<f32>())
        .ok_or_else(|| shape(format!("element count overflows for {dims:?}")))
}

impl Tensor4 {
    pub fn zeros(dims: [usize; 4]) -> Result<Self> {
        Self::full(dims, 0.0)
    }

    pub fn full(dims: [usize; 4], value: f32) -> Result<Self> {
        let len = element_count(dims)?;
        Ok(Self {
            dims,
            data: vec![value; len],
        })
    }

    pub fn from_vec(dims: [usize; 4], data: Vec<f32>) -> Result<Self> {
        let len = element_count(dims)?;
        if data.len() != len {
            return Err(shape(format!(
                "data length {} does not match dims {dims:?} ({len} elements)",
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    /// Normal(0, std) samples drawn in flat order from `rng`.
    pub fn randn(dims: [usize; 4], std: f32, rng: &mut Rng) -> Result<Self> {
        if !(std > 0.0) || !std.is_finite() {
            return Err(invalid(format!("randn std must be positive, got {std}")));
        }
        let len = element_count(dims)?;
        let data = (0..len).map(|_| rng.normal() as f32 * std).collect();
        Ok(Self { dims, data })
    }

    /// Uniform samples in `[lo, hi)`.
    pub fn rand_uniform(dims: [usize; 4], lo: f32, hi: f32, rng: &mut Rng) -> Result<Self> {
        let len = element_count(dims)?;
        let span = hi - lo;
        let data = (0..len)
            .map(|_| lo + span * rng.uniform() as f32)
            .collect();
        Ok(Self { dims, data })
    }

    #[inline]
    pub fn dims(&self) -> [usize; 4] {
        self.dims
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.dims[0]
    }

    #[inline]
    pub fn c(&self) -> usize {
        self.dims[1]
    }

    #[inline]
    pub fn h(&self) -> usize {
        self.dims[2]
    }

    #[inline]
    pub fn w(&self) -> usize {
        self.dims[3]
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Elements per batch item (`c * h * w`).
    #[inline]
    pub fn sample_len(&self) -> usize {
        self.dims[1] * self.dims[2] * self.dims[3]
    }

    #[inline]
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f32> {
        self.data
    }

    pub fn sample(&self, n: usize) -> &[f32] {
        let len = self.sample_len();
        &self.data[n * len..(n + 1) * len]
    }

    pub fn sample_mut(&mut self, n: usize) -> &mut [f32] {
        let len = self.sample_len();
        &mut self.data[n * len..(n + 1) * len]
    }

    pub fn offset(&self, n: usize, c: usize, y: usize, x: usize) -> Result<usize> {
        let [dn, dc, dh, dw] = self.dims;
        if n >= dn || c >= dc || y >= dh || x >= dw {
            return Err(shape(format!(
                "index ({n},{c},{y},{x}) out of range for dims {:?}",
                self.dims
            )));
        }
        Ok(((n * dc + c) * dh + y) * dw + x)
    }

    pub fn get(&self, n: usize, c: usize, y: usize, x: usize) -> Result<f32> {
        Ok(self.data[self.offset(n, c, y, x)?])
    }

    pub fn set(&mut self, n: usize, c: usize, y: usize, x: usize, value: f32) -> Result<()> {
        let off = self.offset(n, c, y, x)?;
        self.data[off] = value;
        Ok(())
    }

    /// Same data, new dims with the same element count.
    pub fn reshape(self, dims: [usize; 4]) -> Result<Self> {
        Self::from_vec(dims, self.data)
    }

    pub fn ensure_finite(&self, context: &str) -> Result<()> {
        if self.data.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite(context.to_string()))
        }
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().map(|&v| v as f64).sum()
    }
}

impl fmt::Debug for Tensor4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let preview: Vec<f32> = self.data.iter().take(8).copied().collect();
        f.debug_struct("Tensor4")
            .field("dims", &self.dims)
            .field("head", &preview)
            .finish()
    }
}

/// Reproducible generator: xoshiro256++ seeded through SplitMix64.
///
/// * `uniform()` takes the top 53 bits of the next output: `(u >> 11) * 2^-53`.
/// * `normal()` is Box-Muller on two uniforms, `sqrt(-2 ln(1-u1)) * cos(2 pi u2)`;
///   the sine half is discarded so every draw consumes exactly two outputs.
/// * `below(n)` is rejection sampling on `u % n` over the largest multiple of `n`.
#[derive(Clone, Debug)]
pub struct Rng {
    seed: u64,
    inner: Xoshiro256PlusPlus,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: Xoshiro256PlusPlus::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent child stream, e.g. one per fold.
    pub fn fork(&mut self) -> Rng {
        Rng::new(self.next_u64())
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Uniform integer in `[0, n)`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % n;
            }
        }
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Fisher-Yates, walking from the last index down.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use crate::tensor::Rng;

    #[test]
    fn zeros_counts() {
        let t = Tensor4::zeros([1, 1, 2, 2]).unwrap();
        assert_eq!(t.data(), &[0.0; 4]);
        assert_eq!(Tensor4::zeros([2, 3, 224, 224]).unwrap().len(), 301_056);
        assert_eq!(Tensor4::zeros([1, 3, 256, 256]).unwrap().len(), 196_608);
    }

    #[test]
    fn zeros_rejects_bad_dims() {
        assert!(Tensor4::zeros([0, 1, 1, 1]).is_err());
        assert!(Tensor4::zeros([usize::MAX, 2, 2, 2]).is_err());
    }

    #[test]
    fn index_row_major() {
        let t = Tensor4::zeros([1, 1, 1, 1]).unwrap();
        assert_eq!(t.get(0, 0, 0, 0).unwrap(), 0.0);
        let t = Tensor4::from_vec([1, 1, 2, 2], vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(t.get(0, 0, 1, 0).unwrap(), 2.0);
        let t = Tensor4::from_vec([2, 3, 4, 5], (0..120).map(|v| v as f32).collect()).unwrap();
        // ((1*3 + 2)*4 + 3)*5 + 4 = 119
        assert_eq!(t.get(1, 2, 3, 4).unwrap(), 119.0);
        assert!(t.get(2, 0, 0, 0).is_err());
        assert!(t.get(0, 0, 0, 5).is_err());
    }

    #[test]
    fn randn_statistics() {
        let mut rng = Rng::new(7);
        let t = Tensor4::randn([1, 1, 64, 64], 1.0, &mut rng).unwrap();
        let (mean, std) = moments(t.data());
        assert!(mean.abs() < 0.1, "mean {mean}");
        assert!((std - 1.0).abs() < 0.1, "std {std}");

        let t = Tensor4::randn([1, 1, 100, 100], 0.05, &mut rng).unwrap();
        let (_, std) = moments(t.data());
        assert!((std - 0.05).abs() < 0.005, "std {std}");
    }

    #[test]
    fn randn_rejects_nonpositive_std() {
        let mut rng = Rng::new(1);
        assert!(Tensor4::randn([1, 1, 1, 1], 0.0, &mut rng).is_err());
        assert!(Tensor4::randn([1, 1, 1, 1], -1.0, &mut rng).is_err());
    }

    #[test]
    fn randn_deterministic() {
        let a = Tensor4::randn([2, 3, 4, 5], 1.0, &mut Rng::new(42)).unwrap();
        let b = Tensor4::randn([2, 3, 4, 5], 1.0, &mut Rng::new(42)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn below_stays_in_range() {
        let mut rng = Rng::new(3);
        for n in 1..50u64 {
            for _ in 0..20 {
                assert!(rng.below(n) < n);
            }
        }
    }

    fn moments(v: &[f32]) -> (f64, f64) {
        let n = v.len() as f64;
        let mean = v.iter().map(|&x| x as f64).sum::<f64>() / n;
        let var = v.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / n;
        (mean, var.sqrt())
    }

    proptest! {
        #[test]
        fn set_then_get(dims in prop::array::uniform4(1usize..5), pick in prop::array::uniform4(0usize..5), v in -1e3f32..1e3) {
            let mut t = Tensor4::zeros(dims).unwrap();
            let [n, c, y, x] = [pick[0] % dims[0], pick[1] % dims[1], pick[2] % dims[2], pick[3] % dims[3]];
            t.set(n, c, y, x, v).unwrap();
            prop_assert_eq!(t.get(n, c, y, x).unwrap(), v);
        }

        #[test]
        fn flat_order_increasing(dims in prop::array::uniform4(1usize..4)) {
            let t = Tensor4::zeros(dims).unwrap();
            let mut last = None;
            for n in 0..dims[0] { for c in 0..dims[1] { for y in 0..dims[2] { for x in 0..dims[3] {
                let off = t.offset(n, c, y, x).unwrap();
                if let Some(prev) = last { prop_assert!(off > prev); }
                last = Some(off);
            }}}}
            prop_assert_eq!(last, Some(t.len() - 1));
        }
    }
}
