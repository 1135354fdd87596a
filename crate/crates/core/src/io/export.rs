//! CSV output for orbits, entropy profiles and grid runs.

use std::io::Write;

use crate::cpd::{Dynamics, Orbit};
use crate::entropy::Profile;
use crate::error::Result;

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

/// Columns `step`, one per coordinate, `winner`.
pub fn write_orbit_csv<D: Dynamics, W: Write>(map: &D, orbit: &Orbit<D::State>, out: W) -> Result<()> {
    let mut w = writer(out);
    let mut header = vec!["step".to_string()];
    header.extend(map.coordinate_names());
    header.push("winner".into());
    w.write_record(&header)?;
    let set = map.candidates();
    for ((step, s), c) in orbit.steps.iter().zip(&orbit.states).zip(&orbit.winners) {
        let mut row = vec![step.to_string()];
        row.extend(map.coordinates(s).iter().map(f64::to_string));
        row.push(set.name(*c).to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_profile_csv<W: Write>(profile: &Profile, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["ell", "distinct", "log_distinct", "entropy"])?;
    for r in &profile.rows {
        w.write_record([
            r.ell.to_string(),
            r.distinct.to_string(),
            r.log_distinct.to_string(),
            r.entropy.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One block of rows per starting point: `point`, `x0`, `z0`, `iter`,
/// coordinates, `winner`.
pub fn write_grid_csv<D: Dynamics, W: Write>(
    map: &D,
    starts: &[(f64, f64)],
    orbits: &[Orbit<D::State>],
    out: W,
) -> Result<()> {
    let mut w = writer(out);
    let mut header: Vec<String> = ["point", "x0", "z0", "iter"].map(String::from).into();
    header.extend(map.coordinate_names());
    header.push("winner".into());
    w.write_record(&header)?;
    let set = map.candidates();
    for (p, ((x0, z0), orbit)) in starts.iter().zip(orbits).enumerate() {
        for ((step, s), c) in orbit.steps.iter().zip(&orbit.states).zip(&orbit.winners) {
            let mut row = vec![p.to_string(), x0.to_string(), z0.to_string(), step.to_string()];
            row.extend(map.coordinates(s).iter().map(f64::to_string));
            row.push(set.name(*c).to_string());
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}
