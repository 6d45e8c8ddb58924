use serde::{Deserialize, Serialize};

use super::{Kpi, KpiVector, PerKpi, ProfileTable, SliceType, KPI_COUNT};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

/// Affine `[lo, hi] -> [0, 1]` bounds per KPI.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NormalizationBounds(pub PerKpi<Range>);

impl NormalizationBounds {
    /// `lo` is the domain minimum and `hi` the largest `mu + 4 sigma` over
    /// slices; RSSI and SNR use their full clamp domains.
    pub fn from_profiles(table: &ProfileTable) -> Self {
        NormalizationBounds(PerKpi::from_fn(|kpi| {
            let (lo, dom_hi) = kpi.domain();
            match kpi {
                Kpi::Rssi | Kpi::Snr => Range { lo, hi: dom_hi },
                _ => {
                    let hi = SliceType::ALL
                        .into_iter()
                        .map(|s| {
                            let ms = table.get(s).get(kpi);
                            ms.mu + 4.0 * ms.sigma
                        })
                        .fold(f64::NEG_INFINITY, f64::max);
                    Range { lo, hi: hi.min(dom_hi) }
                }
            }
        }))
    }

    pub fn get(&self, kpi: Kpi) -> Range {
        *self.0.get(kpi)
    }

    pub fn validate(&self) -> Result<()> {
        for (kpi, r) in self.0.iter() {
            if !(r.lo.is_finite() && r.hi.is_finite() && r.hi > r.lo) {
                return Err(Error::config(
                    format!("bounds.{}", kpi.key()),
                    format!("need finite lo < hi, got [{}, {}]", r.lo, r.hi),
                ));
            }
        }
        Ok(())
    }
}

/// KPI vector mapped to `[0, 1]`, with missing entries imputed as 0 and
/// flagged in `missing_mask` (bit `i` = KPI `i`).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NormalizedKpiVector {
    values: [f64; KPI_COUNT],
    missing_mask: u16,
}

impl NormalizedKpiVector {
    /// Builds a vector directly from tilde values. Values are clamped into [0, 1].
    pub fn from_values(values: [f64; KPI_COUNT]) -> Self {
        NormalizedKpiVector {
            values: values.map(|v| v.clamp(0.0, 1.0)),
            missing_mask: 0,
        }
    }

    pub fn get(&self, kpi: Kpi) -> f64 {
        self.values[kpi.index()]
    }

    /// Returns a copy with one tilde value replaced (clamped to [0, 1]).
    pub fn with(mut self, kpi: Kpi, value: f64) -> Self {
        self.values[kpi.index()] = value.clamp(0.0, 1.0);
        self.missing_mask &= !(1 << kpi.index());
        self
    }

    pub fn values(&self) -> &[f64; KPI_COUNT] {
        &self.values
    }

    pub fn missing_mask(&self) -> u16 {
        self.missing_mask
    }

    pub fn is_missing(&self, kpi: Kpi) -> bool {
        self.missing_mask & (1 << kpi.index()) != 0
    }
}

pub fn normalize(k: &KpiVector, bounds: &NormalizationBounds) -> NormalizedKpiVector {
    let mut out = NormalizedKpiVector::default();
    for kpi in Kpi::ALL {
        match k.get(kpi) {
            Some(v) => {
                let r = bounds.get(kpi);
                out.values[kpi.index()] = ((v - r.lo) / (r.hi - r.lo)).clamp(0.0, 1.0);
            }
            None => out.missing_mask |= 1 << kpi.index(),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bounds() -> NormalizationBounds {
        NormalizationBounds::from_profiles(&ProfileTable::default())
    }

    #[test]
    fn decided_bounds() {
        let b = bounds();
        assert_eq!(b.get(Kpi::Delay), Range { lo: 0.0, hi: 80.0 });
        assert_eq!(b.get(Kpi::Rssi), Range { lo: -120.0, hi: -20.0 });
        assert_eq!(b.get(Kpi::Snr), Range { lo: -10.0, hi: 50.0 });
        assert_eq!(b.get(Kpi::Cpu), Range { lo: 0.0, hi: 100.0 });
        b.validate().unwrap();
    }

    #[test]
    fn endpoints_and_clamp() {
        let b = bounds();
        let mut k = KpiVector::complete([0.0; KPI_COUNT]);
        k.set(Kpi::Delay, Some(80.0));
        k.set(Kpi::Jitter, Some(1e6));
        k.set(Kpi::Rssi, Some(-120.0));
        k.set(Kpi::Snr, Some(50.0));
        let n = normalize(&k, &b);
        assert_eq!(n.get(Kpi::Delay), 1.0);
        assert_eq!(n.get(Kpi::Jitter), 1.0);
        assert_eq!(n.get(Kpi::Loss), 0.0);
        assert_eq!(n.get(Kpi::Rssi), 0.0);
        assert_eq!(n.get(Kpi::Snr), 1.0);
        assert_eq!(n.missing_mask(), 0);
    }

    #[test]
    fn nominal_embb_delay() {
        let mut k = KpiVector::default();
        k.set(Kpi::Delay, Some(10.0));
        assert_eq!(normalize(&k, &bounds()).get(Kpi::Delay), 0.125);
    }

    #[test]
    fn all_missing_is_zero_with_full_mask() {
        let n = normalize(&KpiVector::default(), &bounds());
        assert_eq!(n.values(), &[0.0; KPI_COUNT]);
        assert_eq!(n.missing_mask(), 0b11_1111_1111);
        assert!(Kpi::ALL.into_iter().all(|k| n.is_missing(k)));
    }

    #[test]
    fn inverted_bounds_rejected() {
        let mut b = bounds();
        b.0.snr_db = Range { lo: 5.0, hi: 5.0 };
        assert!(matches!(b.validate(), Err(Error::Config { field, .. }) if field == "bounds.snr_db"));
    }

    proptest! {
        #[test]
        fn monotone_per_coordinate(a in -200.0f64..400.0, d in 0.0f64..300.0, idx in 0usize..KPI_COUNT) {
            let b = bounds();
            let kpi = Kpi::ALL[idx];
            let mut lo = KpiVector::default();
            lo.set(kpi, Some(a));
            let mut hi = KpiVector::default();
            hi.set(kpi, Some(a + d));
            prop_assert!(normalize(&lo, &b).get(kpi) <= normalize(&hi, &b).get(kpi));
        }

        #[test]
        fn unit_bounds_are_idempotent(vals in proptest::array::uniform10(-2.0f64..3.0)) {
            let unit = NormalizationBounds(PerKpi::from_fn(|_| Range { lo: 0.0, hi: 1.0 }));
            let once = normalize(&KpiVector::complete(vals), &unit);
            let twice = normalize(&KpiVector::complete(*once.values()), &unit);
            prop_assert_eq!(once, twice);
            prop_assert!(once.values().iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}
