//! CSV export of run metrics.

use std::io::Write;

use serde::Serialize;

use super::run::RunMetrics;
use super::SimError;

/// One CSV row; field order is the column order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CsvRow {
    pub run_id: u64,
    pub n: usize,
    pub t: usize,
    #[serde(rename = "L")]
    pub bit_len: usize,
    pub strategy: String,
    pub seed: u64,
    pub rounds: u32,
    pub total_bits: u64,
    pub agreement_ok: bool,
    pub strong_validity_applicable: bool,
    pub strong_validity_ok: bool,
    pub validity_ok: bool,
    pub contract_violated: bool,
}

pub const COLUMNS: [&str; 13] = [
    "run_id",
    "n",
    "t",
    "L",
    "strategy",
    "seed",
    "rounds",
    "total_bits",
    "agreement_ok",
    "strong_validity_applicable",
    "strong_validity_ok",
    "validity_ok",
    "contract_violated",
];

impl CsvRow {
    pub fn new(run_id: u64, strategy: impl Into<String>, seed: u64, m: &RunMetrics) -> Self {
        CsvRow {
            run_id,
            n: m.n,
            t: m.t,
            bit_len: m.bit_len,
            strategy: strategy.into(),
            seed,
            rounds: m.rounds,
            total_bits: m.total_bits,
            agreement_ok: m.agreement_ok,
            strong_validity_applicable: m.strong_validity_applicable,
            strong_validity_ok: m.strong_validity_ok,
            validity_ok: m.validity_ok,
            contract_violated: m.contract_violated,
        }
    }
}

/// Writes a header row followed by `rows`.
pub fn write_csv<W: Write>(out: W, rows: &[CsvRow]) -> Result<(), SimError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(COLUMNS)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn csv_string(rows: &[CsvRow]) -> Result<String, SimError> {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}
