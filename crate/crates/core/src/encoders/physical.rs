//! Physically guided encoder.
//!
//! Red: radial delay attenuation plus throughput stripes. Green: jitter
//! sinusoid plus retransmission checkerboard. Blue: loss gradient down the
//! image. A delay*jitter*loss cross-term lights the diagonal, RSSI shifts the
//! whole image horizontally, and a slice-specific Gaussian blur finishes it.
//! Discard rate, SNR, CPU and memory are not used.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{finalize_patch, ImagePatch, RawImage, CHANNELS};
use crate::error::{Error, Result};
use crate::kpi::{Kpi, NormalizedKpiVector, SliceType};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothSigma {
    pub embb: f64,
    pub urllc: f64,
    pub miot: f64,
}

impl SmoothSigma {
    pub fn get(&self, slice: SliceType) -> f64 {
        match slice {
            SliceType::Embb => self.embb,
            SliceType::Urllc => self.urllc,
            SliceType::Miot => self.miot,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalParams {
    /// Radial spread is `sigma_delta_frac * n * (0.5 + delay)` pixels.
    pub sigma_delta_frac: f64,
    pub f_j_gain: f64,
    pub gamma: f64,
    pub stripe_gain: f64,
    /// RSSI shift is `floor(shift_gain_frac * n * (1 - rssi))` pixels.
    pub shift_gain_frac: f64,
    /// Blur width per slice, in pixels.
    pub smooth_sigma: SmoothSigma,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams {
            sigma_delta_frac: 0.25,
            f_j_gain: 8.0,
            gamma: 2.0,
            stripe_gain: 6.0,
            shift_gain_frac: 0.25,
            smooth_sigma: SmoothSigma {
                embb: 1.0,
                urllc: 0.3,
                miot: 0.7,
            },
        }
    }
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let gains = [
            ("sigma_delta_frac", self.sigma_delta_frac),
            ("f_j_gain", self.f_j_gain),
            ("gamma", self.gamma),
            ("stripe_gain", self.stripe_gain),
            ("shift_gain_frac", self.shift_gain_frac),
        ];
        for (name, v) in gains {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!("encoders.physical.{name}"), "must be > 0"));
            }
        }
        for s in SliceType::ALL {
            let v = self.smooth_sigma.get(s);
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(
                    format!("encoders.physical.smooth_sigma.{}", s.name().to_lowercase()),
                    "must be >= 0",
                ));
            }
        }
        Ok(())
    }

    pub fn shift(&self, x: &NormalizedKpiVector, n: usize) -> usize {
        (self.shift_gain_frac * n as f64 * (1.0 - x.get(Kpi::Rssi))).floor() as usize % n
    }
}

pub fn encode_physical(
    x: &NormalizedKpiVector,
    slice: SliceType,
    params: &PhysicalParams,
    n: usize,
) -> Result<ImagePatch> {
    let raw = compose(x, params, n, params.shift(x, n), params.smooth_sigma.get(slice));
    finalize_patch(&raw, "physical")
}

fn compose(x: &NormalizedKpiVector, params: &PhysicalParams, n: usize, shift: usize, blur: f64) -> RawImage {
    let delay = x.get(Kpi::Delay);
    let jitter = x.get(Kpi::Jitter);
    let loss = x.get(Kpi::Loss);
    let tput = x.get(Kpi::Throughput);
    let retrans = x.get(Kpi::Retrans);

    let nf = n as f64;
    let center = (nf - 1.0) / 2.0;
    let sigma_delta = params.sigma_delta_frac * nf * (0.5 + delay);
    let f_j = params.f_j_gain * jitter;
    let cross = delay * jitter * loss;

    let mut raw = RawImage::new(n);
    for py in 0..n {
        let yf = py as f64;
        let yc = yf - center;
        let stripe = (PI * params.stripe_gain * tput * yf / nf).sin().powi(2);
        let blue = loss * (yf / nf).powf(params.gamma);
        for px in 0..n {
            let xf = px as f64;
            let xc = xf - center;
            let radial = delay * (-(xc * xc + yc * yc) / (2.0 * sigma_delta * sigma_delta)).exp();
            let checker = ((px + py) % 2) as f64;
            let mut rgb = [
                radial + stripe,
                jitter * (2.0 * PI * f_j * xf / nf).sin() + retrans * checker,
                blue,
            ];
            if px == py {
                rgb.iter_mut().for_each(|v| *v += cross);
            }
            let dst = (px + shift) % n;
            for (c, v) in rgb.into_iter().enumerate() {
                raw.set(c, dst, py, v);
            }
        }
    }
    if blur > 0.0 {
        for c in 0..CHANNELS {
            gaussian_blur(raw.plane_mut(c), n, blur);
        }
    }
    raw
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as i64;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Separable blur with edge replication.
fn gaussian_blur(plane: &mut [f64], n: usize, sigma: f64) {
    let kernel = gaussian_kernel(sigma);
    let radius = (kernel.len() / 2) as i64;
    let at = |i: i64| i.clamp(0, n as i64 - 1) as usize;
    let mut tmp = vec![0.0; n * n];
    for y in 0..n {
        for x in 0..n {
            tmp[y * n + x] = kernel
                .iter()
                .enumerate()
                .map(|(k, w)| w * plane[y * n + at(x as i64 + k as i64 - radius)])
                .sum();
        }
    }
    for y in 0..n {
        for x in 0..n {
            plane[y * n + x] = kernel
                .iter()
                .enumerate()
                .map(|(k, w)| w * tmp[at(y as i64 + k as i64 - radius) * n + x])
                .sum();
        }
    }
}
