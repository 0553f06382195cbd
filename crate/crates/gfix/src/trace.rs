//! Orbit traces as CSV with the fixed header `n,x,gap,bound`.

use gfix_core::dynamics::{apriori_bound, OrbitTrace};
use gfix_core::{Point, Scalar};

use crate::error::CliError;

pub const HEADER: [&str; 4] = ["n", "x", "gap", "bound"];

/// Column `x` holds the point as displayed (`#i` for finite points, a
/// parenthesised tuple in several dimensions). `gap` is empty on the last
/// row, `bound` is empty without a certified factor.
pub fn to_csv<S: Scalar>(
    trace: &OrbitTrace<S>,
    certified_q: Option<f64>,
) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER)?;
    let gaps = trace.gaps();
    let g0 = gaps.first().map_or(0.0, |g| g.to_f64());
    for (n, p) in trace.points().iter().enumerate() {
        let gap = gaps.get(n).map(|g| g.to_string()).unwrap_or_default();
        let bound = match certified_q {
            Some(q) => apriori_bound(q, g0, n)?.to_string(),
            None => String::new(),
        };
        w.write_record([n.to_string(), point_field(p), gap, bound])?;
    }
    w.into_inner()
        .map_err(|e| CliError::Usage(format!("trace buffer: {e}")))
}

fn point_field(p: &Point) -> String {
    p.to_string()
}
