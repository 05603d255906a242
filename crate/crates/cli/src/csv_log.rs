//! Per-step CSV log: 58 columns, one row per control period.
//!
//! Numbers are written in Rust's shortest round-trip form (at most 17
//! significant digits), so parsing a cell recovers the exact `f64`.

use std::io::{Read, Write};

use stewart_core::SimRecord;

pub const COLUMNS: usize = 58;

const POSE: [&str; 6] = ["x", "y", "z", "phi", "theta", "psi"];
const MEASURED: [&str; 12] = [
    "s1", "s2", "s3", "s4", "s5", "s6", "phi", "theta", "psi", "wx", "wy", "wz",
];

pub fn header() -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend(POSE.iter().map(|a| format!("{a}_true")));
    h.extend(POSE.iter().map(|a| format!("d{a}_true")));
    h.extend(POSE.iter().map(|a| format!("{a}_des")));
    h.extend(POSE.iter().map(|a| format!("{a}_est")));
    h.extend(POSE.iter().map(|a| format!("d{a}_est")));
    h.extend(MEASURED.iter().map(|a| format!("{a}_meas")));
    h.extend((1..=6).map(|i| format!("u{i}")));
    h.extend((1..=6).map(|i| format!("F{i}")));
    h.extend(["e_l", "e_t", "e_cs"].map(String::from));
    h
}

/// Values of one record in column order.
pub fn row(r: &SimRecord) -> Vec<f64> {
    let mut v = Vec::with_capacity(COLUMNS);
    v.push(r.t);
    v.extend(r.true_state.iter());
    v.extend(r.desired.fixed_rows::<6>(0).iter());
    v.extend(r.estimate.iter());
    v.extend(r.measurement.iter());
    v.extend(r.u.iter());
    v.extend(r.forces.iter());
    v.extend([r.e_l, r.e_t, r.e_cs]);
    v
}

pub fn write_csv<W: Write>(records: &[SimRecord], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(header())?;
    for r in records {
        w.write_record(row(r).iter().map(|x| format!("{x:?}")))?;
    }
    w.flush()?;
    Ok(())
}

/// Header and numeric rows of a log written by [`write_csv`].
pub fn read_csv<R: Read>(input: R) -> csv::Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let values = rec
            .iter()
            .map(|cell| {
                cell.parse::<f64>().map_err(|e| {
                    csv::Error::from(std::io::Error::new(
                        std::io::ErrorKind::InvalidData,
                        format!("bad number {cell:?}: {e}"),
                    ))
                })
            })
            .collect::<csv::Result<Vec<f64>>>()?;
        rows.push(values);
    }
    Ok((header, rows))
}
