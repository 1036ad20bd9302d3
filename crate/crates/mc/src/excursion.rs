//! Excursion records and the boundary-layer state machine.
//!
//! A path visits the boundary set F whenever it enters the detection layer of
//! width eps around F. A maximal stretch spent outside the layer is an
//! excursion; its start point is the boundary position at the last contact
//! before leaving and its end point the position at the next contact (or the
//! cemetery when the path never returns). Excursions shorter than two steps
//! or with endpoints closer than `delta_min` are discarded: the boundary
//! kernel is not integrable at the diagonal, and every estimator pairs the
//! census with data vanishing there, so the discard is exact in the limit.

use feller_core::Geometry;

const TAU: f64 = std::f64::consts::TAU;

/// A point of the boundary set F, or the cemetery state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryPoint {
    /// Interval endpoint 0 or 1.
    Endpoint(u8),
    /// Circle point by its angle in [0, 2 pi).
    Angle(f64),
    /// Sphere point as a vector of length R.
    Sphere([f64; 3]),
    /// The absorbing extra state reached by escaping excursions.
    Cemetery,
}

impl BoundaryPoint {
    /// Intrinsic distance between boundary points: endpoint swap distance on
    /// the interval, arc length on the circle, chord length on the sphere.
    /// Any distance to the cemetery is infinite (escape records always count).
    pub fn distance(&self, other: &BoundaryPoint) -> f64 {
        match (self, other) {
            (BoundaryPoint::Endpoint(a), BoundaryPoint::Endpoint(b)) => {
                (*a as f64 - *b as f64).abs()
            }
            (BoundaryPoint::Angle(a), BoundaryPoint::Angle(b)) => {
                let d = (a - b).rem_euclid(TAU);
                d.min(TAU - d)
            }
            (BoundaryPoint::Sphere(a), BoundaryPoint::Sphere(b)) => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            _ => f64::INFINITY,
        }
    }

    /// Coordinate columns for CSV output under the given geometry.
    pub fn coords(&self, geom: &Geometry) -> Vec<f64> {
        match (self, geom) {
            (BoundaryPoint::Endpoint(e), _) => vec![*e as f64],
            (BoundaryPoint::Angle(a), _) => vec![*a],
            (BoundaryPoint::Sphere(p), _) => p.to_vec(),
            (BoundaryPoint::Cemetery, g) => vec![f64::NAN; coord_count(g)],
        }
    }
}

pub fn coord_count(geom: &Geometry) -> usize {
    match geom {
        Geometry::Interval01 | Geometry::UnitDisk => 1,
        _ => 3,
    }
}

/// One excursion away from the boundary set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcursionRecord {
    pub path_id: u64,
    /// Left endpoint of the excursion interval (last boundary contact).
    pub start_time: f64,
    /// First boundary contact after the excursion; infinity for escapes.
    pub end_time: f64,
    pub start: BoundaryPoint,
    /// `Cemetery` marks an escaping excursion; it is always the final record.
    pub end: BoundaryPoint,
    /// Raw boundary-clock value at the start (the clock is flat across the
    /// excursion, so this is also the boundary time of the induced jump).
    pub clock_at_start: f64,
}

#[derive(Debug, Clone, Copy)]
enum TrackState {
    /// No boundary contact yet; the initial stretch is not an excursion.
    Unanchored,
    /// Inside the layer; `last` is the latest snapped contact.
    Contact { last: BoundaryPoint, last_t: f64, last_clock: f64 },
    /// Outside the layer with an anchored start.
    Outside { from: BoundaryPoint, from_t: f64, from_clock: f64, steps: u32 },
}

/// Streaming excursion detector fed by the path engines.
#[derive(Debug)]
pub struct ExcursionTracker {
    min_outside_steps: u32,
    delta_min: f64,
    path_id: u64,
    state: TrackState,
    pub records: Vec<ExcursionRecord>,
}

impl ExcursionTracker {
    pub fn new(path_id: u64, min_outside_steps: u32, delta_min: f64) -> Self {
        ExcursionTracker {
            min_outside_steps,
            delta_min,
            path_id,
            state: TrackState::Unanchored,
            records: Vec::new(),
        }
    }

    /// The path sits inside the layer at time `t`, snapped to `p`.
    pub fn contact(&mut self, t: f64, p: BoundaryPoint, clock: f64) {
        match self.state {
            TrackState::Unanchored => {}
            TrackState::Contact { .. } => {}
            TrackState::Outside { from, from_t, from_clock, steps } => {
                if steps >= self.min_outside_steps && from.distance(&p) >= self.delta_min {
                    self.records.push(ExcursionRecord {
                        path_id: self.path_id,
                        start_time: from_t,
                        end_time: t,
                        start: from,
                        end: p,
                        clock_at_start: from_clock,
                    });
                }
            }
        }
        self.state = TrackState::Contact { last: p, last_t: t, last_clock: clock };
    }

    /// The path sits outside the layer for one step.
    pub fn outside_step(&mut self) {
        match self.state {
            TrackState::Unanchored => {}
            TrackState::Contact { last, last_t, last_clock } => {
                self.state = TrackState::Outside {
                    from: last,
                    from_t: last_t,
                    from_clock: last_clock,
                    steps: 1,
                };
            }
            TrackState::Outside { ref mut steps, .. } => *steps += 1,
        }
    }

    /// The path escaped to the cemetery; emits the final record if anchored.
    pub fn escape(&mut self, t: f64) {
        if let TrackState::Outside { from, from_t, from_clock, steps } = self.state {
            if steps >= self.min_outside_steps {
                self.records.push(ExcursionRecord {
                    path_id: self.path_id,
                    start_time: from_t,
                    end_time: f64::INFINITY,
                    start: from,
                    end: BoundaryPoint::Cemetery,
                    clock_at_start: from_clock,
                });
            }
        }
        let _ = t;
        self.state = TrackState::Unanchored;
    }

    /// Start time of the currently open anchored excursion, if any.
    pub fn open_excursion_start(&self) -> Option<f64> {
        match self.state {
            TrackState::Outside { from_t, .. } => Some(from_t),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distances() {
        let a = BoundaryPoint::Endpoint(0);
        let b = BoundaryPoint::Endpoint(1);
        assert_eq!(a.distance(&b), 1.0);
        assert_eq!(a.distance(&a), 0.0);
        let c = BoundaryPoint::Angle(0.1);
        let d = BoundaryPoint::Angle(TAU - 0.1);
        assert!((c.distance(&d) - 0.2).abs() < 1e-12);
        assert_eq!(a.distance(&BoundaryPoint::Cemetery), f64::INFINITY);
    }

    #[test]
    fn tracker_registers_crossing_and_filters_short() {
        let mut tr = ExcursionTracker::new(0, 2, 0.5);
        // initial stretch outside is unanchored: no record on first contact
        tr.outside_step();
        tr.outside_step();
        tr.contact(0.2, BoundaryPoint::Endpoint(0), 0.0);
        assert!(tr.records.is_empty());
        // a one-step wiggle is not an excursion
        tr.outside_step();
        tr.contact(0.3, BoundaryPoint::Endpoint(1), 0.1);
        assert!(tr.records.is_empty());
        // a genuine crossing
        tr.outside_step();
        tr.outside_step();
        tr.outside_step();
        tr.contact(0.6, BoundaryPoint::Endpoint(0), 0.2);
        assert_eq!(tr.records.len(), 1);
        let r = &tr.records[0];
        assert_eq!(r.start, BoundaryPoint::Endpoint(1));
        assert_eq!(r.end, BoundaryPoint::Endpoint(0));
        assert!((r.start_time - 0.3).abs() < 1e-12);
        assert!((r.end_time - 0.6).abs() < 1e-12);
        assert!((r.clock_at_start - 0.1).abs() < 1e-12);
    }

    #[test]
    fn tracker_drops_sub_threshold_endpoints() {
        let mut tr = ExcursionTracker::new(0, 2, 0.5);
        tr.contact(0.0, BoundaryPoint::Endpoint(0), 0.0);
        tr.outside_step();
        tr.outside_step();
        tr.outside_step();
        // returns to the same endpoint: distance 0 < delta_min
        tr.contact(0.4, BoundaryPoint::Endpoint(0), 0.0);
        assert!(tr.records.is_empty());
    }

    #[test]
    fn escape_emits_cemetery_record() {
        let mut tr = ExcursionTracker::new(3, 2, 0.5);
        tr.contact(0.0, BoundaryPoint::Sphere([1.0, 0.0, 0.0]), 0.0);
        tr.outside_step();
        tr.outside_step();
        tr.escape(5.0);
        assert_eq!(tr.records.len(), 1);
        assert_eq!(tr.records[0].end, BoundaryPoint::Cemetery);
        assert_eq!(tr.records[0].path_id, 3);
        assert!(tr.records[0].end_time.is_infinite());
    }
}
