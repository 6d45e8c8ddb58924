//! Periodic "wallpaper" encoder built from three basis functions.
//!
//! Delay sets the horizontal period of the sinusoid basis, throughput the
//! vertical spacing of the rectangular grid, RSSI the width of the central
//! Gaussian, and CPU+memory a diagonal intensity ramp. Jitter, loss,
//! retransmissions, discard and SNR are not used.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{finalize_patch, ImagePatch, RawImage, CHANNELS};
use crate::error::{Error, Result};
use crate::kpi::{Kpi, NormalizedKpiVector};

/// Sinusoid plus a mod-2 staircase.
pub fn phi1(u: f64, v: f64) -> f64 {
    (2.0 * PI * u).sin() + (u + v).floor().rem_euclid(2.0)
}

fn rect(z: f64) -> f64 {
    if z.rem_euclid(1.0) < 0.5 {
        1.0
    } else {
        0.0
    }
}

/// Product of square pulses; a grid.
pub fn phi2(u: f64, v: f64) -> f64 {
    rect(u) * rect(v)
}

pub fn phi3(u: f64, v: f64) -> f64 {
    (-(u * u + v * v)).exp()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WallpaperParams {
    /// Basis weights for the red channel; green and blue use cyclic
    /// rotations so that each channel has a different dominant basis.
    pub weights: [f64; 3],
    pub sine_period_y: f64,
    pub grid_period_x: f64,
    /// Gaussian basis period; `None` means half the image side.
    pub gaussian_period: Option<f64>,
    pub gradient_gain: f64,
}

impl Default for WallpaperParams {
    fn default() -> Self {
        WallpaperParams {
            weights: [0.5, 0.3, 0.2],
            sine_period_y: 4.0,
            grid_period_x: 4.0,
            gaussian_period: None,
            gradient_gain: 1.0,
        }
    }
}

impl WallpaperParams {
    pub fn validate(&self) -> Result<()> {
        if self.weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::config("encoders.wallpaper.weights", "must be non-negative"));
        }
        if (self.weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::config("encoders.wallpaper.weights", "must sum to 1"));
        }
        let periods = [
            ("sine_period_y", self.sine_period_y),
            ("grid_period_x", self.grid_period_x),
            ("gaussian_period", self.gaussian_period.unwrap_or(1.0)),
        ];
        for (name, p) in periods {
            if !(p.is_finite() && p >= 1.0) {
                return Err(Error::config(format!("encoders.wallpaper.{name}"), "period must be >= 1"));
            }
        }
        if !(self.gradient_gain.is_finite() && self.gradient_gain >= 0.0) {
            return Err(Error::config("encoders.wallpaper.gradient_gain", "must be >= 0"));
        }
        Ok(())
    }

    /// `[w_phi1, w_phi2, w_phi3]` for channel `c`.
    pub fn channel_weights(&self, c: usize) -> [f64; 3] {
        let [a, b, d] = self.weights;
        match c {
            0 => [a, b, d],
            1 => [d, a, b],
            _ => [b, d, a],
        }
    }
}

/// `P_{1,x} = 2 + floor(5 * delay)`.
pub fn sine_period_x(x: &NormalizedKpiVector) -> f64 {
    2.0 + (5.0 * x.get(Kpi::Delay)).floor()
}

/// `P_{2,y} = 3 + floor(7 * throughput)`.
pub fn grid_period_y(x: &NormalizedKpiVector) -> f64 {
    3.0 + (7.0 * x.get(Kpi::Throughput)).floor()
}

pub fn encode_wallpaper(x: &NormalizedKpiVector, params: &WallpaperParams, n: usize) -> Result<ImagePatch> {
    let nf = n as f64;
    let center = (nf - 1.0) / 2.0;
    let p1x = sine_period_x(x);
    let p2y = grid_period_y(x);
    let p3 = params.gaussian_period.unwrap_or(nf / 2.0);
    // Strong signal widens the Gaussian.
    let spread = 1.0 - x.get(Kpi::Rssi) + 0.1;
    let resource = (x.get(Kpi::Cpu) + x.get(Kpi::Mem)) / 2.0;

    let mut raw = RawImage::new(n);
    for py in 0..n {
        for px in 0..n {
            let (xf, yf) = (px as f64, py as f64);
            let basis = [
                phi1(xf / p1x, yf / params.sine_period_y),
                phi2(xf / params.grid_period_x, yf / p2y),
                phi3((xf - center) / p3 * spread, (yf - center) / p3 * spread),
            ];
            let gradient = 1.0 + params.gradient_gain * resource * (xf + yf) / (2.0 * nf);
            for c in 0..CHANNELS {
                let w = params.channel_weights(c);
                let v: f64 = w.iter().zip(basis).map(|(w, b)| w * b).sum();
                raw.set(c, px, py, v * gradient);
            }
        }
    }
    finalize_patch(&raw, "wallpaper")
}
