//! Trace CSV files: fixed header, one row per recorded step, floats with 17
//! significant digits, missing values as empty fields.

use std::path::Path;

use shampoo_core::TraceRecord;

use crate::error::{HarnessError, Result};

pub const HEADER: [&str; 11] = [
    "k",
    "f_value",
    "grad_fro",
    "grad_nuclear",
    "run_avg_grad_fro",
    "run_avg_grad_nuclear",
    "dist_to_opt",
    "update_op_norm",
    "x_op_norm",
    "trace_l_sqrt",
    "trace_r_sqrt",
];

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn format_opt(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

fn row(r: &TraceRecord) -> [String; 11] {
    [
        r.k.to_string(),
        format_opt(r.f_value),
        format_opt(r.grad_fro),
        format_opt(r.grad_nuclear),
        format_opt(r.run_avg_grad_fro),
        format_opt(r.run_avg_grad_nuclear),
        format_opt(r.dist_to_opt),
        format_float(r.update_op_norm),
        format_float(r.x_op_norm),
        format_float(r.trace_l_sqrt),
        format_float(r.trace_r_sqrt),
    ]
}

pub fn write_trace_csv(records: &[TraceRecord], path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(HarnessError::Failed(format!("{}: no records to write", path.display())));
    }
    let csv_err = |source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(HEADER).map_err(csv_err)?;
    for r in records {
        w.write_record(row(r)).map_err(csv_err)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn read_trace_csv(path: &Path) -> Result<Vec<TraceRecord>> {
    let csv_err = |source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let bad = |msg: String| HarnessError::Config(format!("{}: {msg}", path.display()));
    let mut rd = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = rd.headers().map_err(csv_err)?.clone();
    if header.iter().ne(HEADER) {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    let mut out = Vec::new();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let opt = |i: usize| -> Result<Option<f64>> {
            match &rec[i] {
                "" => Ok(None),
                s => s
                    .parse()
                    .map(Some)
                    .map_err(|e| bad(format!("row {}, column {}: {e}", line + 2, HEADER[i]))),
            }
        };
        let req = |i: usize| -> Result<f64> {
            opt(i)?.ok_or_else(|| bad(format!("row {}, column {} is empty", line + 2, HEADER[i])))
        };
        out.push(TraceRecord {
            k: rec[0]
                .parse()
                .map_err(|e| bad(format!("row {}, column k: {e}", line + 2)))?,
            f_value: opt(1)?,
            grad_fro: opt(2)?,
            grad_nuclear: opt(3)?,
            run_avg_grad_fro: opt(4)?,
            run_avg_grad_nuclear: opt(5)?,
            dist_to_opt: opt(6)?,
            update_op_norm: req(7)?,
            x_op_norm: req(8)?,
            trace_l_sqrt: req(9)?,
            trace_r_sqrt: req(10)?,
        });
    }
    Ok(out)
}
