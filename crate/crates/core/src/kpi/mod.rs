//! KPI simulation: slice types, the ten-metric KPI vector, per-slice
//! statistical profiles, and the noisy sampling pipeline.

mod copula;
mod normalize;
mod sampler;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use copula::{gaussian_copula_sample, CorrelationModel, CorrelationPair};
pub use normalize::{normalize, NormalizationBounds, NormalizedKpiVector, Range};
pub use sampler::{
    apply_measurement_model, sample_kpi_vector, sample_slice_type, simulate_sample, ClassMix,
    ContaminationMode, NoiseConfig,
};

pub const KPI_COUNT: usize = 10;

/// Network slice category. Integer codes are part of the export format.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SliceType {
    Embb = 0,
    Urllc = 1,
    Miot = 2,
}

impl SliceType {
    pub const ALL: [SliceType; 3] = [SliceType::Embb, SliceType::Urllc, SliceType::Miot];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            SliceType::Embb => "eMBB",
            SliceType::Urllc => "URLLC",
            SliceType::Miot => "mIoT",
        }
    }

    /// The two slices that are not `self`, in code order.
    pub fn others(self) -> [SliceType; 2] {
        match self {
            SliceType::Embb => [SliceType::Urllc, SliceType::Miot],
            SliceType::Urllc => [SliceType::Embb, SliceType::Miot],
            SliceType::Miot => [SliceType::Embb, SliceType::Urllc],
        }
    }
}

impl fmt::Display for SliceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One of the ten per-sample metrics, in export column order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kpi {
    Delay,
    Jitter,
    Loss,
    Throughput,
    Retrans,
    Discard,
    Rssi,
    Snr,
    Cpu,
    Mem,
}

impl Kpi {
    pub const ALL: [Kpi; KPI_COUNT] = [
        Kpi::Delay,
        Kpi::Jitter,
        Kpi::Loss,
        Kpi::Throughput,
        Kpi::Retrans,
        Kpi::Discard,
        Kpi::Rssi,
        Kpi::Snr,
        Kpi::Cpu,
        Kpi::Mem,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Column / config key name, including the unit suffix.
    pub fn key(self) -> &'static str {
        match self {
            Kpi::Delay => "delay_ms",
            Kpi::Jitter => "jitter_ms",
            Kpi::Loss => "loss_pct",
            Kpi::Throughput => "throughput_mbps",
            Kpi::Retrans => "retrans_pct",
            Kpi::Discard => "discard_pct",
            Kpi::Rssi => "rssi_dbm",
            Kpi::Snr => "snr_db",
            Kpi::Cpu => "cpu_pct",
            Kpi::Mem => "mem_pct",
        }
    }

    pub fn from_key(key: &str) -> Option<Kpi> {
        Kpi::ALL.into_iter().find(|k| k.key() == key)
    }

    /// Physical clamping domain `(lo, hi)`.
    pub fn domain(self) -> (f64, f64) {
        match self {
            Kpi::Delay | Kpi::Jitter | Kpi::Throughput => (0.0, f64::INFINITY),
            Kpi::Loss | Kpi::Retrans | Kpi::Discard | Kpi::Cpu | Kpi::Mem => (0.0, 100.0),
            Kpi::Rssi => (-120.0, -20.0),
            Kpi::Snr => (-10.0, 50.0),
        }
    }

    pub fn clamp(self, v: f64) -> f64 {
        let (lo, hi) = self.domain();
        v.clamp(lo, hi)
    }
}

/// Ten values keyed by KPI. Serializes as a table with one named field per KPI.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerKpi<T> {
    pub delay_ms: T,
    pub jitter_ms: T,
    pub loss_pct: T,
    pub throughput_mbps: T,
    pub retrans_pct: T,
    pub discard_pct: T,
    pub rssi_dbm: T,
    pub snr_db: T,
    pub cpu_pct: T,
    pub mem_pct: T,
}

impl<T> PerKpi<T> {
    pub fn from_fn(mut f: impl FnMut(Kpi) -> T) -> Self {
        PerKpi {
            delay_ms: f(Kpi::Delay),
            jitter_ms: f(Kpi::Jitter),
            loss_pct: f(Kpi::Loss),
            throughput_mbps: f(Kpi::Throughput),
            retrans_pct: f(Kpi::Retrans),
            discard_pct: f(Kpi::Discard),
            rssi_dbm: f(Kpi::Rssi),
            snr_db: f(Kpi::Snr),
            cpu_pct: f(Kpi::Cpu),
            mem_pct: f(Kpi::Mem),
        }
    }

    pub fn get(&self, kpi: Kpi) -> &T {
        match kpi {
            Kpi::Delay => &self.delay_ms,
            Kpi::Jitter => &self.jitter_ms,
            Kpi::Loss => &self.loss_pct,
            Kpi::Throughput => &self.throughput_mbps,
            Kpi::Retrans => &self.retrans_pct,
            Kpi::Discard => &self.discard_pct,
            Kpi::Rssi => &self.rssi_dbm,
            Kpi::Snr => &self.snr_db,
            Kpi::Cpu => &self.cpu_pct,
            Kpi::Mem => &self.mem_pct,
        }
    }

    pub fn get_mut(&mut self, kpi: Kpi) -> &mut T {
        match kpi {
            Kpi::Delay => &mut self.delay_ms,
            Kpi::Jitter => &mut self.jitter_ms,
            Kpi::Loss => &mut self.loss_pct,
            Kpi::Throughput => &mut self.throughput_mbps,
            Kpi::Retrans => &mut self.retrans_pct,
            Kpi::Discard => &mut self.discard_pct,
            Kpi::Rssi => &mut self.rssi_dbm,
            Kpi::Snr => &mut self.snr_db,
            Kpi::Cpu => &mut self.cpu_pct,
            Kpi::Mem => &mut self.mem_pct,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Kpi, &T)> {
        Kpi::ALL.into_iter().map(move |k| (k, self.get(k)))
    }
}

/// Raw KPI measurements in physical units; `None` marks a missing entry.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct KpiVector {
    values: [Option<f64>; KPI_COUNT],
}

impl KpiVector {
    pub fn new(values: [Option<f64>; KPI_COUNT]) -> Self {
        KpiVector { values }
    }

    pub fn complete(values: [f64; KPI_COUNT]) -> Self {
        KpiVector {
            values: values.map(Some),
        }
    }

    pub fn get(&self, kpi: Kpi) -> Option<f64> {
        self.values[kpi.index()]
    }

    pub fn set(&mut self, kpi: Kpi, value: Option<f64>) {
        self.values[kpi.index()] = value;
    }

    pub fn values(&self) -> &[Option<f64>; KPI_COUNT] {
        &self.values
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    /// Clamps every present value into its KPI's physical domain.
    pub fn clamp_to_domain(&mut self) {
        for kpi in Kpi::ALL {
            if let Some(v) = &mut self.values[kpi.index()] {
                *v = kpi.clamp(*v);
            }
        }
    }

    pub fn is_within_domain(&self) -> bool {
        Kpi::ALL.into_iter().all(|k| match self.get(k) {
            None => true,
            Some(v) => {
                let (lo, hi) = k.domain();
                v.is_finite() && v >= lo && v <= hi
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuSigma {
    pub mu: f64,
    pub sigma: f64,
}

impl MuSigma {
    pub const fn new(mu: f64, sigma: f64) -> Self {
        MuSigma { mu, sigma }
    }
}

/// Per-KPI `(mu, sigma)` for one slice type.
pub type SliceProfile = PerKpi<MuSigma>;

fn profile(rows: [(f64, f64); KPI_COUNT]) -> SliceProfile {
    PerKpi::from_fn(|k| {
        let (mu, sigma) = rows[k.index()];
        MuSigma::new(mu, sigma)
    })
}

/// Slice profiles for all three slice types.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileTable {
    pub embb: SliceProfile,
    pub urllc: SliceProfile,
    pub miot: SliceProfile,
}

impl ProfileTable {
    pub fn get(&self, slice: SliceType) -> &SliceProfile {
        match slice {
            SliceType::Embb => &self.embb,
            SliceType::Urllc => &self.urllc,
            SliceType::Miot => &self.miot,
        }
    }

    pub fn get_mut(&mut self, slice: SliceType) -> &mut SliceProfile {
        match slice {
            SliceType::Embb => &mut self.embb,
            SliceType::Urllc => &mut self.urllc,
            SliceType::Miot => &mut self.miot,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for slice in SliceType::ALL {
            let key = slice_key(slice);
            for (kpi, ms) in self.get(slice).iter() {
                let field = format!("profiles.{key}.{}", kpi.key());
                if !ms.mu.is_finite() || !ms.sigma.is_finite() {
                    return Err(Error::config(field, "mu and sigma must be finite"));
                }
                if ms.sigma < 0.0 {
                    return Err(Error::config(field, "sigma must be >= 0"));
                }
                let (lo, hi) = kpi.domain();
                if ms.mu < lo || ms.mu > hi {
                    return Err(Error::config(
                        field,
                        format!("mu {} outside domain [{lo}, {hi}]", ms.mu),
                    ));
                }
            }
        }
        Ok(())
    }
}

impl Default for ProfileTable {
    /// Delay, jitter, loss and throughput are the reference slice parameters;
    /// the remaining six KPIs use decided values.
    fn default() -> Self {
        ProfileTable {
            embb: profile([
                (10.0, 1.5),
                (2.0, 0.3),
                (1.0, 0.2),
                (200.0, 20.0),
                (2.0, 0.4),
                (0.5, 0.1),
                (-65.0, 5.0),
                (25.0, 3.0),
                (60.0, 10.0),
                (55.0, 10.0),
            ]),
            urllc: profile([
                (0.5, 0.075),
                (0.1, 0.015),
                (0.001, 0.0002),
                (5.0, 0.5),
                (0.1, 0.02),
                (0.01, 0.002),
                (-60.0, 3.0),
                (30.0, 2.0),
                (40.0, 8.0),
                (35.0, 8.0),
            ]),
            miot: profile([
                (50.0, 7.5),
                (10.0, 1.5),
                (5.0, 1.0),
                (0.1, 0.02),
                (4.0, 0.8),
                (2.0, 0.4),
                (-85.0, 8.0),
                (10.0, 4.0),
                (20.0, 10.0),
                (25.0, 10.0),
            ]),
        }
    }
}

pub(crate) fn slice_key(slice: SliceType) -> &'static str {
    match slice {
        SliceType::Embb => "embb",
        SliceType::Urllc => "urllc",
        SliceType::Miot => "miot",
    }
}
