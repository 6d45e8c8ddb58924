//! L-system style branching encoder.
//!
//! Red holds one recursive tree grown from the bottom center, green a row of
//! shallow throughput trees along the bottom edge, blue straight radial
//! spokes whose count follows SNR. CPU adds vertical offshoots and memory
//! horizontal connectors to every red branch.
//!
//! Geometry is tracked relative to the vertical axis through the canvas
//! center with angles measured from straight up, so a jitter-free tree is an
//! exact mirror image of itself on odd-width canvases.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{finalize_patch, ImagePatch, RawImage};
use crate::error::{Error, Result};
use crate::kpi::{Kpi, NormalizedKpiVector};

const RED: usize = 0;
const GREEN: usize = 1;
const BLUE: usize = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FractalParams {
    /// Trunk length as a fraction of the image side.
    pub length_frac: f64,
    pub shrink_base: f64,
    pub delay_gain: f64,
    /// Base bifurcation angle in radians.
    pub base_angle: f64,
    /// Jitter below this snaps the bifurcation angle to 90 degrees.
    pub precise_jitter_threshold: f64,
    pub green_length_frac: f64,
    pub green_depth: u32,
    pub spoke_length_frac: f64,
}

impl Default for FractalParams {
    fn default() -> Self {
        FractalParams {
            length_frac: 0.3,
            shrink_base: 0.6,
            delay_gain: 0.2,
            base_angle: PI / 5.0,
            precise_jitter_threshold: 0.05,
            green_length_frac: 0.2,
            green_depth: 3,
            spoke_length_frac: 0.45,
        }
    }
}

impl FractalParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("length_frac", self.length_frac),
            ("shrink_base", self.shrink_base),
            ("base_angle", self.base_angle),
            ("green_length_frac", self.green_length_frac),
            ("spoke_length_frac", self.spoke_length_frac),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!("encoders.fractal.{name}"), "must be > 0"));
            }
        }
        if !(self.delay_gain.is_finite() && self.delay_gain >= 0.0) {
            return Err(Error::config("encoders.fractal.delay_gain", "must be >= 0"));
        }
        if self.green_depth < 1 {
            return Err(Error::config("encoders.fractal.green_depth", "must be >= 1"));
        }
        Ok(())
    }

    /// Red tree depth `3 + floor(3 * delay)`.
    pub fn red_depth(&self, x: &NormalizedKpiVector) -> u32 {
        3 + (3.0 * x.get(Kpi::Delay)).floor() as u32
    }

    /// Per-level length ratio `shrink_base + delay_gain * delay`.
    pub fn length_ratio(&self, x: &NormalizedKpiVector) -> f64 {
        self.shrink_base + self.delay_gain * x.get(Kpi::Delay)
    }

    /// Number of green trees, `floor(5 * throughput)`.
    pub fn green_density(&self, x: &NormalizedKpiVector) -> u32 {
        (5.0 * x.get(Kpi::Throughput)).floor() as u32
    }

    /// Number of blue spokes, `3 + floor(2 * snr)`.
    pub fn spoke_count(&self, x: &NormalizedKpiVector) -> u32 {
        3 + (2.0 * x.get(Kpi::Snr)).floor() as u32
    }

    pub fn cpu_offshoots(&self, x: &NormalizedKpiVector) -> u32 {
        (3.0 * x.get(Kpi::Cpu)).floor() as u32
    }

    pub fn mem_connectors(&self, x: &NormalizedKpiVector) -> u32 {
        (3.0 * x.get(Kpi::Mem)).floor() as u32
    }

    /// Per-branch angular jitter std, `0.2 * loss * pi`.
    pub fn angle_sigma(&self, x: &NormalizedKpiVector) -> f64 {
        0.2 * x.get(Kpi::Loss) * PI
    }

    /// Half-angle between sibling branches: the base angle (or 90 degrees when
    /// jitter is negligible) scaled by `0.8 + 0.2 * loss`.
    pub fn bifurcation(&self, x: &NormalizedKpiVector) -> f64 {
        let base = if x.get(Kpi::Jitter) < self.precise_jitter_threshold {
            FRAC_PI_2
        } else {
            self.base_angle
        };
        base * (0.8 + 0.2 * x.get(Kpi::Loss))
    }
}

/// Structural-complexity metadata, `1.1 + 0.5 * delay`. Not used for rendering.
pub fn fractal_dimension(x: &NormalizedKpiVector) -> f64 {
    1.1 + 0.5 * x.get(Kpi::Delay)
}

/// Canvas with its origin at the bottom of the central column.
struct Canvas {
    raw: RawImage,
    axis: f64,
}

impl Canvas {
    fn new(n: usize) -> Self {
        Canvas {
            raw: RawImage::new(n),
            axis: ((n - 1) / 2) as f64,
        }
    }

    fn pixel(&self, rel_x: f64, y: f64) -> Option<(usize, usize)> {
        let n = self.raw.side() as i64;
        // `round` is odd-symmetric, so mirrored points land on mirrored pixels.
        let px = (self.axis + rel_x.round()) as i64;
        let py = y.round() as i64;
        ((0..n).contains(&px) && (0..n).contains(&py)).then(|| (px as usize, (n - 1 - py) as usize))
    }

    /// Adds `weight` once to every pixel the segment passes through.
    fn segment(&mut self, c: usize, from: (f64, f64), to: (f64, f64), weight: f64) {
        let (dx, dy) = (to.0 - from.0, to.1 - from.1);
        let steps = dx.abs().max(dy.abs()).ceil().max(1.0) as usize * 2;
        let mut hit: Vec<(usize, usize)> = (0..=steps)
            .filter_map(|i| {
                let t = i as f64 / steps as f64;
                self.pixel(from.0 + t * dx, from.1 + t * dy)
            })
            .collect();
        hit.sort_unstable();
        hit.dedup();
        for (px, py) in hit {
            self.raw.add(c, px, py, weight);
        }
    }
}

struct Tree<'a, R: ?Sized> {
    params: &'a FractalParams,
    x: &'a NormalizedKpiVector,
    rng: &'a mut R,
    ratio: f64,
    spread: f64,
    jitter_sigma: f64,
    decorate: bool,
}

impl<R: Rng + ?Sized> Tree<'_, R> {
    /// Draws the branch at `level` and recurses into its two children.
    /// `heading` is measured from straight up, positive to the right.
    #[allow(clippy::too_many_arguments)]
    fn grow(&mut self, canvas: &mut Canvas, c: usize, start: (f64, f64), heading: f64, len: f64, level: u32, depth: u32) {
        let end = (start.0 + len * heading.sin(), start.1 + len * heading.cos());
        let weight = 1.0 / (level as f64 + 1.0);
        canvas.segment(c, start, end, weight);
        if self.decorate {
            self.decorations(canvas, c, start, end, len, weight);
        }
        if level + 1 >= depth {
            return;
        }
        let left_jitter: f64 = self.jitter_sigma * self.rng.sample::<f64, _>(StandardNormal);
        let right_jitter: f64 = self.jitter_sigma * self.rng.sample::<f64, _>(StandardNormal);
        let child = len * self.ratio;
        self.grow(canvas, c, end, heading - self.spread + left_jitter, child, level + 1, depth);
        self.grow(canvas, c, end, heading + self.spread + right_jitter, child, level + 1, depth);
    }

    /// CPU offshoots point straight up; memory connectors are horizontal
    /// bars centered on the branch.
    fn decorations(&mut self, canvas: &mut Canvas, c: usize, start: (f64, f64), end: (f64, f64), len: f64, weight: f64) {
        let along = |k: u32, count: u32| {
            let t = k as f64 / (count as f64 + 1.0);
            (start.0 + t * (end.0 - start.0), start.1 + t * (end.1 - start.1))
        };
        let offshoots = self.params.cpu_offshoots(self.x);
        for k in 1..=offshoots {
            let p = along(k, offshoots);
            canvas.segment(c, p, (p.0, p.1 + len / 2.0), weight / 2.0);
        }
        let connectors = self.params.mem_connectors(self.x);
        for k in 1..=connectors {
            let p = along(k, connectors);
            canvas.segment(c, (p.0 - len / 4.0, p.1), (p.0 + len / 4.0, p.1), weight / 2.0);
        }
    }
}

pub fn encode_fractal<R: Rng + ?Sized>(
    x: &NormalizedKpiVector,
    params: &FractalParams,
    n: usize,
    rng: &mut R,
) -> Result<ImagePatch> {
    let nf = n as f64;
    let mut canvas = Canvas::new(n);
    let mut tree = Tree {
        params,
        x,
        rng,
        ratio: params.length_ratio(x),
        spread: params.bifurcation(x),
        jitter_sigma: params.angle_sigma(x),
        decorate: true,
    };

    tree.grow(&mut canvas, RED, (0.0, 0.0), 0.0, params.length_frac * nf, 0, params.red_depth(x));

    tree.decorate = false;
    let trees = params.green_density(x);
    for i in 0..trees {
        let root = (nf * (i as f64 + 1.0) / (trees as f64 + 1.0) - canvas.axis, 0.0);
        tree.grow(&mut canvas, GREEN, root, 0.0, params.green_length_frac * nf, 0, params.green_depth);
    }

    let spokes = params.spoke_count(x);
    let hub = (0.0, canvas.axis);
    let reach = params.spoke_length_frac * nf;
    for k in 0..spokes {
        let a = 2.0 * PI * k as f64 / spokes as f64;
        canvas.segment(BLUE, hub, (hub.0 + reach * a.sin(), hub.1 + reach * a.cos()), 1.0);
    }

    finalize_patch(&canvas.raw, "fractal")
}
