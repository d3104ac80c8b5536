//! CSV writers. Numbers use Rust's shortest round-trip formatting, which is
//! locale-independent.

use std::fmt::Write as _;

use fbb_core::certify::DescentRow;
use fbb_core::splitting::TraceRow;

pub const TRACE_HEADER: &str = "k,res_xy,res_dx,paper_error,phi,wall_ns";
pub const CERTIFY_HEADER: &str = "k,phi,rhs_bound,violation";
pub const COMPARE_HEADER: &str = "method,gamma,converged,iterations,forward_evals,resolvent_evals,final_res_xy,wall_ns";
pub const FRONTIER_HEADER: &str = "gamma,bound_fraction,converged,iterations,termination,boundary";

/// Shortest round-trip form, switching to exponent notation outside
/// `[1e-4, 1e16)`.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e16).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

pub fn trace_csv(rows: &[TraceRow], timing: bool) -> String {
    let mut s = String::with_capacity(64 * (rows.len() + 1));
    s.push_str(TRACE_HEADER);
    s.push('\n');
    for r in rows {
        let phi = r.phi.map(num).unwrap_or_default();
        let wall = if timing { r.wall_ns } else { 0 };
        let _ = writeln!(s, "{},{},{},{},{phi},{wall}", r.k, num(r.res_xy), num(r.res_dx), num(r.paper_error));
    }
    s
}

pub fn certify_csv(rows: &[DescentRow]) -> String {
    let mut s = String::with_capacity(64 * (rows.len() + 1));
    s.push_str(CERTIFY_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(s, "{},{},{},{}", r.k, num(r.phi), num(r.rhs_bound), num(r.violation));
    }
    s
}

/// Column values of one parsed trace CSV.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TraceColumns {
    pub k: Vec<f64>,
    pub res_xy: Vec<f64>,
    pub res_dx: Vec<f64>,
}

/// Reads the `k`, `res_xy` and `res_dx` columns of a trace CSV.
pub fn parse_trace(text: &str) -> Result<TraceColumns, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty trace file")?;
    let names: Vec<&str> = header.split(',').collect();
    let col = |name: &str| names.iter().position(|n| *n == name).ok_or(format!("missing column `{name}`"));
    let (ik, ixy, idx) = (col("k")?, col("res_xy")?, col("res_dx")?);
    let mut out = TraceColumns::default();
    for (n, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let get = |i: usize| -> Result<f64, String> {
            fields
                .get(i)
                .ok_or(format!("line {}: too few fields", n + 2))?
                .parse::<f64>()
                .map_err(|e| format!("line {}: {e}", n + 2))
        };
        out.k.push(get(ik)?);
        out.res_xy.push(get(ixy)?);
        out.res_dx.push(get(idx)?);
    }
    Ok(out)
}
