//! KPI table export: one row per sample, raw physical units.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::kpi::{Kpi, KpiVector, SliceType, KPI_COUNT};

pub const HEADER: [&str; KPI_COUNT + 2] = [
    "id",
    "slice_type",
    "delay_ms",
    "jitter_ms",
    "loss_pct",
    "throughput_mbps",
    "retrans_pct",
    "discard_pct",
    "rssi_dbm",
    "snr_db",
    "cpu_pct",
    "mem_pct",
];

#[derive(Clone, Debug, PartialEq)]
pub struct KpiRow {
    pub id: u64,
    pub slice: SliceType,
    pub kpis: KpiVector,
}

/// Six significant digits, `%g` style: fixed notation for exponents in
/// `[-4, 6)`, scientific otherwise, trailing zeros trimmed.
pub fn format_sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("`e` formatting always has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if (-4..6).contains(&exp) {
        trim_zeros(format!("{v:.*}", (5 - exp) as usize))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn write_rows<W: Write>(out: W, rows: impl IntoIterator<Item = KpiRow>) -> Result<()> {
    let mut w = ::csv::WriterBuilder::new()
        .terminator(::csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let map = |e: ::csv::Error| Error::Data(format!("csv write failed: {e}"));
    w.write_record(HEADER).map_err(map)?;
    for row in rows {
        let mut rec = Vec::with_capacity(HEADER.len());
        rec.push(row.id.to_string());
        rec.push(row.slice.code().to_string());
        rec.extend(row.kpis.values().iter().map(|v| v.map(format_sig6).unwrap_or_default()));
        w.write_record(&rec).map_err(map)?;
    }
    w.flush().map_err(|e| Error::Data(format!("csv flush failed: {e}")))?;
    Ok(())
}

/// Parses a KPI table. `file` names the source in integrity errors.
pub fn read_rows<R: Read>(input: R, file: &str) -> Result<Vec<KpiRow>> {
    let bad = |msg: String| Error::integrity(file, msg);
    let mut r = ::csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = r.headers().map_err(|e| bad(e.to_string()))?;
    if header.iter().ne(HEADER.iter().copied()) {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() != HEADER.len() {
            return Err(bad(format!("row {line} has {} cells", rec.len())));
        }
        let id = rec[0].parse().map_err(|_| bad(format!("row {line}: bad id `{}`", &rec[0])))?;
        let slice = rec[1]
            .parse()
            .ok()
            .and_then(SliceType::from_code)
            .ok_or_else(|| bad(format!("row {line}: bad slice code `{}`", &rec[1])))?;
        let mut kpis = KpiVector::default();
        for kpi in Kpi::ALL {
            let cell = &rec[kpi.index() + 2];
            let v = if cell.is_empty() {
                None
            } else {
                let v: f64 = cell
                    .parse()
                    .map_err(|_| bad(format!("row {line}: bad {} `{cell}`", kpi.key())))?;
                if !v.is_finite() {
                    return Err(bad(format!("row {line}: non-finite {}", kpi.key())));
                }
                Some(v)
            };
            kpis.set(kpi, v);
        }
        rows.push(KpiRow { id, slice, kpis });
    }
    Ok(rows)
}
