use std::io::Write;

use super::integrator::TrajectoryRecord;
use super::monitor::Direction;

/// Shortest round-trip decimal; `-0` prints as `0`.
fn num(x: f64) -> String {
    (x + 0.0).to_string()
}

/// Writes `t,u_1..u_n,v_1..v_n`.
pub fn write_trajectory_csv<W: Write>(rec: &TrajectoryRecord, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let n = rec.states.first().map_or(0, |s| s.u.len());
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("u_{i}")));
    header.extend((1..=n).map(|i| format!("v_{i}")));
    w.write_record(&header)?;
    for s in &rec.states {
        let row = std::iter::once(s.t).chain(s.u.iter().copied()).chain(s.v.iter().copied());
        w.write_record(row.map(num))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `t,W_N,W_YC,W_YC_R,W_YC_D,mathcalW,max_norm,n_t,crossings`; crossings
/// are `;`-separated `compartment:in|out` with one-based compartments.
pub fn write_monitors_csv<W: Write>(rec: &TrajectoryRecord, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "t", "W_N", "W_YC", "W_YC_R", "W_YC_D", "mathcalW", "max_norm", "n_t", "crossings",
    ])?;
    for f in &rec.frames {
        let crossings: Vec<String> = f
            .crossings
            .iter()
            .map(|c| {
                let dir = match c.direction {
                    Direction::In => "in",
                    Direction::Out => "out",
                };
                format!("{}:{dir}", c.compartment + 1)
            })
            .collect();
        w.write_record([
            num(f.t),
            num(f.w_n),
            num(f.w_yc),
            num(f.w_yc_r),
            num(f.w_yc_d),
            num(f.mathcal_w),
            num(f.max_norm),
            f.n_t.to_string(),
            crossings.join(";"),
        ])?;
    }
    w.flush()?;
    Ok(())
}
