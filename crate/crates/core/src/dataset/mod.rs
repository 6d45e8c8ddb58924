//! Dataset assembly, exchange formats and previews.

pub mod csv;
mod montage;
pub mod npy;
mod store;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::config::{Config, Model};
use crate::encoders::{fractal_dimension, EncodeContext, ImagePatch, Method};
use crate::error::{Error, Result};
use crate::kpi::{normalize, simulate_sample, KpiVector, NormalizedKpiVector, SliceType};
use crate::rng::{global, stream, Purpose};

pub use montage::render_montage;
pub use store::{load_dataset, write_dataset, DatasetManifest, WriteOptions, FORMAT_VERSION};

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub id: u64,
    pub slice: SliceType,
    pub kpis: KpiVector,
    pub normalized: NormalizedKpiVector,
    pub images: BTreeMap<Method, ImagePatch>,
    /// Branching complexity metadata, recomputable from `normalized`.
    pub fractal_dimension: f64,
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub config: Config,
    pub samples: Vec<Sample>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn methods(&self) -> &[Method] {
        &self.config.methods
    }

    pub fn labels(&self) -> Vec<SliceType> {
        self.samples.iter().map(|s| s.slice).collect()
    }

    pub fn class_counts(&self) -> [usize; 3] {
        let mut counts = [0; 3];
        for s in &self.samples {
            counts[s.slice.index()] += 1;
        }
        counts
    }
}

/// Deterministic per-class allocation: the first classes get
/// `round(p * count)`, the last takes the remainder.
pub fn class_allocation(config: &Config, count: usize) -> [usize; 3] {
    let p = config.class_mix.as_array();
    let mut out = [0; 3];
    let mut used = 0;
    for i in 0..2 {
        out[i] = ((p[i] * count as f64).round() as usize).min(count - used);
        used += out[i];
    }
    out[2] = count - used;
    out
}

/// Builds `count` samples. Output depends only on `(config, count)`; the
/// worker count (`None` = rayon default) never changes a single bit.
pub fn generate_dataset(config: &Config, count: usize, workers: Option<usize>) -> Result<Dataset> {
    if count < 3 {
        return Err(Error::Usage(format!("count must be >= 3, got {count}")));
    }
    let model = config.build()?;
    let alloc = class_allocation(config, count);
    let mut labels: Vec<SliceType> = SliceType::ALL
        .into_iter()
        .zip(alloc)
        .flat_map(|(s, k)| std::iter::repeat_n(s, k))
        .collect();
    labels.shuffle(&mut global(config.seed, Purpose::Layout));

    let build = || -> Result<Vec<Sample>> {
        labels
            .par_iter()
            .enumerate()
            .map(|(i, &slice)| make_sample(config, &model, i as u64, slice))
            .collect()
    };
    let samples = match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::Usage(format!("cannot start {w} workers: {e}")))?
            .install(build)?,
        None => build()?,
    };
    Ok(Dataset {
        config: config.clone(),
        samples,
    })
}

fn make_sample(config: &Config, model: &Model, id: u64, slice: SliceType) -> Result<Sample> {
    let mut rng = stream(config.seed, id, Purpose::Kpi);
    let kpis = simulate_sample(slice, &config.profiles, &config.noise, &model.correlation, &mut rng);
    let normalized = normalize(&kpis, &model.bounds);
    let ctx = EncodeContext {
        n: config.image_side,
        params: &config.encoders,
        permutation: &model.permutation,
    };
    let images = config
        .methods
        .iter()
        .map(|&m| {
            let mut frng = stream(config.seed, id, Purpose::Fractal);
            ctx.encode(m, &normalized, slice, &mut frng).map(|p| (m, p))
        })
        .collect::<Result<_>>()?;
    Ok(Sample {
        id,
        slice,
        kpis,
        normalized,
        images,
        fractal_dimension: fractal_dimension(&normalized),
    })
}
