use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::serial::sig17;

pub const CSV_HEADER: [&str; 6] = ["t", "objective_gap", "consensus_residual", "R", "V", "wall_nanos"];

/// One row of a run trace.
///
/// At `t = 0` the objective gap is taken at `x⁽⁰⁾` and `r` is absent; from
/// `t = 1` on it is taken at the ergodic average `x̄⁽ᵗ⁾`. `consensus_residual`
/// is evaluated at `x⁽ᵗ⁾`, `ergodic_consensus_residual` at `x̄⁽ᵗ⁾`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: usize,
    pub objective_gap: Option<f64>,
    pub consensus_residual: f64,
    /// Not written to CSV.
    pub ergodic_consensus_residual: Option<f64>,
    pub r: Option<f64>,
    pub v: Option<f64>,
    /// Elapsed time since the start of the run.
    pub wall_nanos: u64,
}

fn opt(v: Option<f64>) -> String {
    v.map(sig17).unwrap_or_default()
}

/// Writes records as CSV with header [`CSV_HEADER`]; absent values are empty
/// fields and floats carry 17 significant digits.
pub fn write_csv_to<W: Write>(records: &[DiagnosticsRecord], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER)?;
    for r in records {
        out.write_record([
            r.t.to_string(),
            opt(r.objective_gap),
            sig17(r.consensus_residual),
            opt(r.r),
            opt(r.v),
            r.wall_nanos.to_string(),
        ])?;
    }
    out.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn write_csv(records: &[DiagnosticsRecord], path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv_to(records, std::io::BufWriter::new(f))
}

fn parse_opt(s: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|_| Error::invalid(format!("bad float field {s:?}")))
}

/// Reads a trace written by [`write_csv`].
pub fn read_csv<R: Read>(r: R) -> Result<Vec<DiagnosticsRecord>> {
    let mut rd = csv::Reader::from_reader(r);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_owned).collect();
    if header != CSV_HEADER {
        return Err(Error::invalid(format!("unexpected trace header {header:?}")));
    }
    let mut out = Vec::new();
    for row in rd.records() {
        let row = row?;
        let field = |k: usize| row.get(k).unwrap_or("");
        out.push(DiagnosticsRecord {
            t: field(0).parse().map_err(|_| Error::invalid("bad iteration index"))?,
            objective_gap: parse_opt(field(1))?,
            consensus_residual: parse_opt(field(2))?.ok_or_else(|| Error::invalid("missing consensus residual"))?,
            ergodic_consensus_residual: None,
            r: parse_opt(field(3))?,
            v: parse_opt(field(4))?,
            wall_nanos: field(5).parse().map_err(|_| Error::invalid("bad wall_nanos"))?,
        });
    }
    Ok(out)
}
