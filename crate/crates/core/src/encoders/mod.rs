//! Feature-to-image encoders.
//!
//! Each encoder maps a [`NormalizedKpiVector`] to an `n x n` RGB
//! [`ImagePatch`]. Intensities are kept as `f32` in `[0, 1]` and only
//! quantized to bytes on export.

mod fractal;
mod perlin;
mod physical;
mod wallpaper;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kpi::{NormalizedKpiVector, SliceType};

pub use fractal::{encode_fractal, fractal_dimension, FractalParams};
pub use perlin::{encode_perlin, perlin2, PerlinParams, PermutationTable, PERLIN_BOUND};
pub use physical::{encode_physical, PhysicalParams};
pub use wallpaper::{encode_wallpaper, grid_period_y, phi1, phi2, phi3, sine_period_x, WallpaperParams};

pub const CHANNELS: usize = 3;

/// Encoding family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Physical,
    Perlin,
    Wallpaper,
    Fractal,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Physical, Method::Perlin, Method::Wallpaper, Method::Fractal];

    pub fn name(self) -> &'static str {
        match self {
            Method::Physical => "physical",
            Method::Perlin => "perlin",
            Method::Wallpaper => "wallpaper",
            Method::Fractal => "fractal",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::Usage(format!(
                    "unknown method `{s}`; valid methods: physical, perlin, wallpaper, fractal"
                ))
            })
    }
}

/// Finalized RGB patch, row-major with channels last (`[y][x][c]`).
/// Row 0 is the top of the image.
#[derive(Clone, Debug, PartialEq)]
pub struct ImagePatch {
    n: usize,
    data: Vec<f32>,
}

impl ImagePatch {
    pub fn side(&self) -> usize {
        self.n
    }

    pub fn get(&self, x: usize, y: usize, c: usize) -> f32 {
        self.data[(y * self.n + x) * CHANNELS + c]
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    /// 8-bit quantization: `round(v * 255)`.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.data.iter().map(|&v| quantize(v)).collect()
    }

    pub fn from_bytes(n: usize, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != n * n * CHANNELS {
            return Err(Error::Data(format!(
                "expected {} bytes for a {n}x{n} patch, got {}",
                n * n * CHANNELS,
                bytes.len()
            )));
        }
        Ok(ImagePatch {
            n,
            data: bytes.iter().map(|&b| b as f32 / 255.0).collect(),
        })
    }

    /// Mean of one channel over row `y`.
    pub fn row_mean(&self, y: usize, c: usize) -> f64 {
        (0..self.n).map(|x| self.get(x, y, c) as f64).sum::<f64>() / self.n as f64
    }

    pub fn mean_abs_diff(&self, other: &ImagePatch) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs() as f64)
            .sum::<f64>()
            / self.data.len() as f64
    }
}

pub fn quantize(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Unclamped per-channel planes produced by an encoder.
/// Planes are indexed `[c][y * n + x]` with row 0 at the top.
#[derive(Clone, Debug)]
pub struct RawImage {
    n: usize,
    planes: [Vec<f64>; CHANNELS],
}

impl RawImage {
    pub fn new(n: usize) -> Self {
        RawImage {
            n,
            planes: std::array::from_fn(|_| vec![0.0; n * n]),
        }
    }

    pub fn side(&self) -> usize {
        self.n
    }

    pub fn get(&self, c: usize, x: usize, y: usize) -> f64 {
        self.planes[c][y * self.n + x]
    }

    pub fn set(&mut self, c: usize, x: usize, y: usize, v: f64) {
        self.planes[c][y * self.n + x] = v;
    }

    pub fn add(&mut self, c: usize, x: usize, y: usize, v: f64) {
        self.planes[c][y * self.n + x] += v;
    }

    pub fn plane(&self, c: usize) -> &[f64] {
        &self.planes[c]
    }

    pub fn plane_mut(&mut self, c: usize) -> &mut Vec<f64> {
        &mut self.planes[c]
    }
}

/// Clamps every intensity to `[0, 1]`. Non-finite input is an encoding error
/// naming the encoder.
pub fn finalize_patch(raw: &RawImage, encoder: &str) -> Result<ImagePatch> {
    let n = raw.n;
    let mut data = Vec::with_capacity(n * n * CHANNELS);
    for y in 0..n {
        for x in 0..n {
            for c in 0..CHANNELS {
                let v = raw.get(c, x, y);
                if !v.is_finite() {
                    return Err(Error::Encoding {
                        encoder: encoder.to_string(),
                        message: format!("non-finite intensity {v} at ({x}, {y}, {c})"),
                    });
                }
                data.push(v.clamp(0.0, 1.0) as f32);
            }
        }
    }
    Ok(ImagePatch { n, data })
}

/// Parameters for all four encoders.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncoderParams {
    pub physical: PhysicalParams,
    pub perlin: PerlinParams,
    pub wallpaper: WallpaperParams,
    pub fractal: FractalParams,
}

impl EncoderParams {
    pub fn validate(&self) -> Result<()> {
        self.physical.validate()?;
        self.perlin.validate()?;
        self.wallpaper.validate()?;
        self.fractal.validate()
    }
}

/// Everything an encoder may need besides the KPI vector.
pub struct EncodeContext<'a> {
    pub n: usize,
    pub params: &'a EncoderParams,
    pub permutation: &'a PermutationTable,
}

impl EncodeContext<'_> {
    pub fn encode<R: Rng + ?Sized>(
        &self,
        method: Method,
        x: &NormalizedKpiVector,
        slice: SliceType,
        fractal_rng: &mut R,
    ) -> Result<ImagePatch> {
        match method {
            Method::Physical => encode_physical(x, slice, &self.params.physical, self.n),
            Method::Perlin => encode_perlin(x, &self.params.perlin, self.permutation, self.n),
            Method::Wallpaper => encode_wallpaper(x, &self.params.wallpaper, self.n),
            Method::Fractal => encode_fractal(x, &self.params.fractal, self.n, fractal_rng),
        }
    }
}
