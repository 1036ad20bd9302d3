//! Binned excursion census over F x (F + cemetery), and the CSV emitters.

use crate::error::{McError, Result};
use crate::excursion::{coord_count, BoundaryPoint, ExcursionRecord};
use crate::localtime::Jump;
use feller_core::Geometry;
use std::io::Write;

const TAU: f64 = std::f64::consts::TAU;

/// Empirical excursion-endpoint census binned over F x F_Delta.
///
/// Dividing a bin count by (window * paths / interior volume) estimates the
/// boundary-measure mass of the bin; the extra column counts escapes.
#[derive(Debug, Clone)]
pub struct ExcursionCensus {
    pub geometry: Geometry,
    pub n_bins: usize,
    /// Row-major counts, n_bins rows by (n_bins + 1) columns; the last
    /// column is the cemetery.
    counts: Vec<u64>,
    pub window: f64,
    pub n_paths: u64,
    pub m_mass: f64,
}

impl ExcursionCensus {
    pub fn new(geometry: Geometry, n_bins: usize, window: f64, n_paths: u64) -> Result<Self> {
        let n_bins = match geometry {
            Geometry::Interval01 => 2,
            Geometry::UnitDisk => n_bins,
            _ => {
                return Err(McError::UnsupportedGeometry(
                    "binned censuses cover the interval and circle boundaries".into(),
                ))
            }
        };
        if n_bins == 0 {
            return Err(McError::InvalidConfig("need at least one bin".into()));
        }
        let m_mass = match geometry {
            Geometry::Interval01 => 1.0,
            _ => std::f64::consts::PI,
        };
        Ok(ExcursionCensus {
            geometry,
            n_bins,
            counts: vec![0; n_bins * (n_bins + 1)],
            window,
            n_paths,
            m_mass,
        })
    }

    pub fn from_records(
        geometry: Geometry,
        n_bins: usize,
        window: f64,
        n_paths: u64,
        records: &[ExcursionRecord],
    ) -> Result<Self> {
        let mut census = Self::new(geometry, n_bins, window, n_paths)?;
        for r in records {
            census.add(r);
        }
        Ok(census)
    }

    fn bin_of(&self, p: &BoundaryPoint) -> Option<usize> {
        match (p, &self.geometry) {
            (BoundaryPoint::Endpoint(e), Geometry::Interval01) => Some(*e as usize),
            (BoundaryPoint::Angle(a), Geometry::UnitDisk) => {
                Some(((a / TAU * self.n_bins as f64) as usize).min(self.n_bins - 1))
            }
            _ => None,
        }
    }

    pub fn add(&mut self, r: &ExcursionRecord) {
        let Some(i) = self.bin_of(&r.start) else { return };
        let j = match r.end {
            BoundaryPoint::Cemetery => self.n_bins,
            ref p => match self.bin_of(p) {
                Some(j) => j,
                None => return,
            },
        };
        self.counts[i * (self.n_bins + 1) + j] += 1;
    }

    pub fn count(&self, from_bin: usize, to_bin: usize) -> u64 {
        self.counts[from_bin * (self.n_bins + 1) + to_bin]
    }

    pub fn escape_count(&self, from_bin: usize) -> u64 {
        self.count(from_bin, self.n_bins)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Census estimate of the boundary-measure mass of bin (i, j).
    pub fn mass_estimate(&self, from_bin: usize, to_bin: usize) -> f64 {
        self.count(from_bin, to_bin) as f64 * self.m_mass / (self.window * self.n_paths as f64)
    }

    /// Escape-mass estimate from bin i (zero on recurrent interiors).
    pub fn escape_estimate(&self, from_bin: usize) -> f64 {
        self.escape_count(from_bin) as f64 * self.m_mass / (self.window * self.n_paths as f64)
    }
}

fn fmt_val(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes the excursion table: one row per record, coordinates in decimal
/// text with 17 significant digits; escaping records carry DELTA in place of
/// their end coordinates.
pub fn write_excursions_csv<W: Write>(
    mut w: W,
    geom: &Geometry,
    records: &[ExcursionRecord],
) -> std::io::Result<()> {
    let nc = coord_count(geom);
    let mut header = String::from("path_id,s_start,s_end");
    for i in 0..nc {
        header.push_str(&format!(",start_{i}"));
    }
    for i in 0..nc {
        header.push_str(&format!(",end_{i}"));
    }
    writeln!(w, "{header}")?;
    for r in records {
        let mut row = format!("{},{},{}", r.path_id, fmt_val(r.start_time), fmt_val(r.end_time));
        for c in r.start.coords(geom) {
            row.push(',');
            row.push_str(&fmt_val(c));
        }
        if r.end == BoundaryPoint::Cemetery {
            row.push_str(",DELTA");
            for _ in 1..nc {
                row.push(',');
            }
        } else {
            for c in r.end.coords(geom) {
                row.push(',');
                row.push_str(&fmt_val(c));
            }
        }
        writeln!(w, "{row}")?;
    }
    Ok(())
}

/// Writes the jump table of a time-changed boundary path.
pub fn write_jumps_csv<W: Write>(mut w: W, geom: &Geometry, jumps: &[Jump]) -> std::io::Result<()> {
    let nc = coord_count(geom);
    let mut header = String::from("path_id,boundary_time");
    for i in 0..nc {
        header.push_str(&format!(",from_{i}"));
    }
    for i in 0..nc {
        header.push_str(&format!(",to_{i}"));
    }
    header.push_str(",jump_size");
    writeln!(w, "{header}")?;
    for j in jumps {
        let mut row = format!("{},{}", j.path_id, fmt_val(j.boundary_time));
        for c in j.from.coords(geom) {
            row.push(',');
            row.push_str(&fmt_val(c));
        }
        for c in j.to.coords(geom) {
            row.push(',');
            row.push_str(&fmt_val(c));
        }
        row.push(',');
        row.push_str(&fmt_val(j.size));
        writeln!(w, "{row}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(start: BoundaryPoint, end: BoundaryPoint) -> ExcursionRecord {
        ExcursionRecord {
            path_id: 0,
            start_time: 0.25,
            end_time: 0.5,
            start,
            end,
            clock_at_start: 0.0,
        }
    }

    #[test]
    fn interval_census_bins() {
        let records = vec![
            rec(BoundaryPoint::Endpoint(0), BoundaryPoint::Endpoint(1)),
            rec(BoundaryPoint::Endpoint(0), BoundaryPoint::Endpoint(1)),
            rec(BoundaryPoint::Endpoint(1), BoundaryPoint::Endpoint(0)),
        ];
        let census =
            ExcursionCensus::from_records(Geometry::Interval01, 2, 2.0, 10, &records).unwrap();
        assert_eq!(census.count(0, 1), 2);
        assert_eq!(census.count(1, 0), 1);
        assert_eq!(census.escape_count(0), 0);
        assert!((census.mass_estimate(0, 1) - 2.0 / 20.0).abs() < 1e-15);
    }

    #[test]
    fn circle_census_with_escape_column() {
        let records = vec![
            rec(BoundaryPoint::Angle(0.1), BoundaryPoint::Angle(3.2)),
            rec(BoundaryPoint::Angle(0.2), BoundaryPoint::Cemetery),
        ];
        let census =
            ExcursionCensus::from_records(Geometry::UnitDisk, 4, 1.0, 5, &records).unwrap();
        assert_eq!(census.count(0, 2), 1);
        assert_eq!(census.escape_count(0), 1);
        assert_eq!(census.total(), 2);
    }

    #[test]
    fn csv_formats() {
        let records = vec![
            rec(BoundaryPoint::Angle(0.5), BoundaryPoint::Angle(2.5)),
            rec(BoundaryPoint::Angle(1.0), BoundaryPoint::Cemetery),
        ];
        let mut buf = Vec::new();
        write_excursions_csv(&mut buf, &Geometry::UnitDisk, &records).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "path_id,s_start,s_end,start_0,end_0");
        assert!(lines[1].contains("5.0000000000000000e-1"));
        assert!(lines[2].ends_with("DELTA"));

        let jumps = vec![Jump {
            path_id: 3,
            boundary_time: 0.75,
            from: BoundaryPoint::Endpoint(0),
            to: BoundaryPoint::Endpoint(1),
            size: 1.0,
        }];
        let mut buf = Vec::new();
        write_jumps_csv(&mut buf, &Geometry::Interval01, &jumps).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("path_id,boundary_time,from_0,to_0,jump_size\n"));
        assert!(text.contains("3,7.5"));
    }
}
