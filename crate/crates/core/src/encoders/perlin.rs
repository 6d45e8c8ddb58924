//! Gradient-lattice noise and the octave-summed Perlin encoder.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{finalize_patch, ImagePatch, RawImage};
use crate::error::{Error, Result};
use crate::kpi::{Kpi, NormalizedKpiVector};
use crate::rng::{global, Purpose};

/// Analytic bound of `|perlin2|` with unit-length gradients.
pub const PERLIN_BOUND: f64 = FRAC_1_SQRT_2;

/// Eight unit gradients at 45 degree spacing.
const GRADIENTS: [(f64, f64); 8] = [
    (1.0, 0.0),
    (FRAC_1_SQRT_2, FRAC_1_SQRT_2),
    (0.0, 1.0),
    (-FRAC_1_SQRT_2, FRAC_1_SQRT_2),
    (-1.0, 0.0),
    (-FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
    (0.0, -1.0),
    (FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
];

/// Lattice permutation of `0..=255`, doubled to avoid index wrapping.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermutationTable {
    p: [u8; 512],
}

impl PermutationTable {
    pub fn from_seed(master_seed: u64) -> Self {
        let mut base: Vec<u8> = (0..=255).collect();
        base.shuffle(&mut global(master_seed, Purpose::Permutation));
        Self::from_permutation(&base).expect("shuffle of 0..=255 is a permutation")
    }

    pub fn from_permutation(perm: &[u8]) -> Result<Self> {
        let mut seen = [false; 256];
        if perm.len() != 256 {
            return Err(Error::Data("permutation must have 256 entries".into()));
        }
        for &v in perm {
            if std::mem::replace(&mut seen[v as usize], true) {
                return Err(Error::Data(format!("value {v} repeated in permutation")));
            }
        }
        let mut p = [0u8; 512];
        for i in 0..512 {
            p[i] = perm[i & 255];
        }
        Ok(PermutationTable { p })
    }

    fn hash(&self, xi: usize, yi: usize) -> usize {
        self.p[self.p[xi] as usize + yi] as usize
    }
}

fn fade(t: f64) -> f64 {
    t * t * t * (t * (t * 6.0 - 15.0) + 10.0)
}

fn lerp(t: f64, a: f64, b: f64) -> f64 {
    a + t * (b - a)
}

fn grad(h: usize, dx: f64, dy: f64) -> f64 {
    let (gx, gy) = GRADIENTS[h & 7];
    gx * dx + gy * dy
}

/// Classic 2-D gradient noise. Zero on integer lattice points.
pub fn perlin2(x: f64, y: f64, perm: &PermutationTable) -> f64 {
    let x0 = x.floor();
    let y0 = y.floor();
    let xi = (x0 as i64 & 255) as usize;
    let yi = (y0 as i64 & 255) as usize;
    let xf = x - x0;
    let yf = y - y0;
    let u = fade(xf);
    let v = fade(yf);

    let n00 = grad(perm.hash(xi, yi), xf, yf);
    let n10 = grad(perm.hash(xi + 1, yi), xf - 1.0, yf);
    let n01 = grad(perm.hash(xi, yi + 1), xf, yf - 1.0);
    let n11 = grad(perm.hash(xi + 1, yi + 1), xf - 1.0, yf - 1.0);
    lerp(v, lerp(u, n00, n10), lerp(u, n01, n11))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerlinParams {
    /// Red, green, blue frequency multipliers (cycles per image at zero KPI).
    pub base_frequency: [f64; 3],
    /// Octave count is `octave_base + floor(octave_gain * throughput)`.
    pub octave_base: u32,
    pub octave_gain: f64,
    /// Persistence is `persistence_base + snr`.
    pub persistence_base: f64,
    pub lacunarity: f64,
}

impl Default for PerlinParams {
    fn default() -> Self {
        PerlinParams {
            base_frequency: [10.0, 8.0, 6.0],
            octave_base: 2,
            octave_gain: 3.0,
            persistence_base: 1.5,
            lacunarity: 2.0,
        }
    }
}

impl PerlinParams {
    pub fn validate(&self) -> Result<()> {
        if self.base_frequency.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
            return Err(Error::config("encoders.perlin.base_frequency", "must be > 0"));
        }
        let max_octaves = self.octave_base as f64 + self.octave_gain.floor();
        if self.octave_base < 1 || !(0.0..=8.0).contains(&max_octaves) || self.octave_gain < 0.0 {
            return Err(Error::config(
                "encoders.perlin.octave_base",
                "octave count must stay within [1, 8]",
            ));
        }
        if !(self.persistence_base.is_finite() && self.persistence_base > 1.0) {
            return Err(Error::config("encoders.perlin.persistence_base", "must be > 1"));
        }
        if !(self.lacunarity.is_finite() && self.lacunarity > 0.0) {
            return Err(Error::config("encoders.perlin.lacunarity", "must be > 0"));
        }
        Ok(())
    }

    /// Per-channel frequencies: delay+jitter drive red, throughput green,
    /// packet loss blue.
    pub fn frequencies(&self, x: &NormalizedKpiVector) -> [f64; 3] {
        let [fr, fg, fb] = self.base_frequency;
        [
            fr * (1.0 + x.get(Kpi::Delay) + x.get(Kpi::Jitter)),
            fg * (1.0 + x.get(Kpi::Throughput)),
            fb * (1.0 + x.get(Kpi::Loss)),
        ]
    }

    pub fn octaves(&self, x: &NormalizedKpiVector) -> u32 {
        (self.octave_base + (self.octave_gain * x.get(Kpi::Throughput)).floor() as u32).clamp(1, 8)
    }

    /// Weak signal gives persistence near the base, i.e. a rougher texture.
    pub fn persistence(&self, x: &NormalizedKpiVector) -> f64 {
        self.persistence_base + x.get(Kpi::Snr)
    }
}

/// Octave-summed noise per channel, normalized by the total octave weight
/// and mapped from `[-PERLIN_BOUND, PERLIN_BOUND]` onto `[0, 1]`.
pub fn encode_perlin(
    x: &NormalizedKpiVector,
    params: &PerlinParams,
    perm: &PermutationTable,
    n: usize,
) -> Result<ImagePatch> {
    let freqs = params.frequencies(x);
    let octaves = params.octaves(x);
    let p = params.persistence(x);
    let weight_sum: f64 = (1..=octaves).map(|o| p.powi(-(o as i32))).sum();

    let mut raw = RawImage::new(n);
    for (c, f) in freqs.into_iter().enumerate() {
        for py in 0..n {
            for px in 0..n {
                let mut acc = 0.0;
                let mut scale = f / n as f64;
                for o in 1..=octaves {
                    acc += perlin2(px as f64 * scale, py as f64 * scale, perm) / p.powi(o as i32);
                    scale *= params.lacunarity;
                }
                raw.set(c, px, py, 0.5 + acc / weight_sum / (2.0 * PERLIN_BOUND));
            }
        }
    }
    finalize_patch(&raw, "perlin")
}
