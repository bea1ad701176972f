use super::IterateRecord;
use std::io::Write;
use std::path::Path;

/// Fixed trace columns; point coordinates follow as `y0, y1, ...`.
pub const TRACE_COLUMNS: [&str; 12] = [
    "k",
    "f",
    "grad_norm",
    "step_dist",
    "tau",
    "r_k",
    "mu",
    "L",
    "inner_iters",
    "inner_residual",
    "projections",
    "step_size",
];

/// 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn opt_count(x: Option<usize>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Serializes a trace as CSV.
pub fn trace_csv(trace: &[IterateRecord]) -> Result<Vec<u8>, csv::Error> {
    let dim = trace.first().map_or(0, |r| r.point.coords().len());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = TRACE_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend((0..dim).map(|i| format!("y{i}")));
    w.write_record(&header)?;
    for r in trace {
        let mut row = vec![
            r.k.to_string(),
            num(r.f),
            num(r.grad_norm),
            opt(r.step_dist),
            opt(r.tau),
            opt(r.r_k),
            opt(r.mu),
            opt(r.lipschitz),
            opt_count(r.inner_iters),
            opt(r.inner_residual),
            opt_count(r.projections),
            opt(r.step_size),
        ];
        row.extend(r.point.coords().iter().map(|&c| num(c)));
        w.write_record(&row)?;
    }
    w.flush()?;
    w.into_inner().map_err(|e| e.into_error().into())
}

pub fn write_trace_csv(path: &Path, trace: &[IterateRecord]) -> std::io::Result<()> {
    let bytes = trace_csv(trace).map_err(std::io::Error::other)?;
    std::fs::File::create(path)?.write_all(&bytes)
}
