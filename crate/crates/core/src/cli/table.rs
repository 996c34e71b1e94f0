//! CSV tables for sweeps and demand curves.

use std::io;

use crate::statics::{Output, SweepResult};

pub const SWEEP_HEADER: [&str; 14] = [
    "param", "value", "P_r", "P_c", "W_c", "R_c", "p1", "p2", "theta", "eta", "profit_r",
    "profit_c", "profit", "valid",
];

/// Shortest decimal that parses back to the same bits.
pub fn format_f64(x: f64) -> String {
    let a = x.abs();
    if x != 0.0 && x.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// One sweep row, as it appears in the CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub param: String,
    pub value: f64,
    /// `P_r, P_c, W_c, R_c, p1, p2, theta, eta, profit_r, profit_c, profit`.
    pub fields: [f64; 11],
    pub valid: bool,
}

pub fn sweep_rows(result: &SweepResult) -> Vec<SweepRow> {
    result
        .points
        .iter()
        .map(|point| {
            let (fields, valid) = match &point.outcome {
                Ok(eq) => {
                    let mut f = [0.0; 11];
                    for (slot, out) in f.iter_mut().zip(&Output::ALL[..8]) {
                        *slot = out.of(eq);
                    }
                    f[8] = eq.profit_r;
                    f[9] = eq.profit_c;
                    f[10] = eq.profit;
                    (f, eq.is_valid())
                }
                Err(_) => ([f64::NAN; 11], false),
            };
            SweepRow {
                param: result.parameter.name().to_string(),
                value: point.value,
                fields,
                valid,
            }
        })
        .collect()
}

pub fn write_sweep<W: io::Write>(out: W, rows: &[SweepRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for row in rows {
        let mut record = Vec::with_capacity(SWEEP_HEADER.len());
        record.push(row.param.clone());
        record.push(format_f64(row.value));
        record.extend(row.fields.iter().map(|&x| format_f64(x)));
        record.push(row.valid.to_string());
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sweep<R: io::Read>(input: R) -> Result<Vec<SweepRow>, String> {
    let table = read_table(input)?;
    if table.header != SWEEP_HEADER {
        return Err(format!("expected header {}", SWEEP_HEADER.join(",")));
    }
    table
        .rows
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            let num = |j: usize| -> Result<f64, String> {
                rec[j].parse().map_err(|_| {
                    format!(
                        "row {}: `{}` in column {} is not a number",
                        i + 1,
                        rec[j],
                        SWEEP_HEADER[j]
                    )
                })
            };
            let mut fields = [0.0; 11];
            for (k, slot) in fields.iter_mut().enumerate() {
                *slot = num(k + 2)?;
            }
            Ok(SweepRow {
                param: rec[0].clone(),
                value: num(1)?,
                fields,
                valid: rec[13]
                    .parse()
                    .map_err(|_| format!("row {}: `{}` is not a boolean", i + 1, rec[13]))?,
            })
        })
        .collect()
}

pub fn write_pairs<W: io::Write>(
    out: W,
    header: [&str; 2],
    rows: &[(f64, f64)],
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for &(x, y) in rows {
        w.write_record([format_f64(x), format_f64(y)])?;
    }
    w.flush()?;
    Ok(())
}

/// A CSV file held as strings.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub fn read_table<R: io::Read>(input: R) -> Result<Table, String> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r
        .headers()
        .map_err(|e| e.to_string())?
        .iter()
        .map(str::to_string)
        .collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()))
        .collect::<Result<Vec<Vec<String>>, _>>()
        .map_err(|e| e.to_string())?;
    Ok(Table { header, rows })
}
