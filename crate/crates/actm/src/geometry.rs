//! Crank kinematics of the torque mechanism.
//!
//! The mechanism couples a crank rotating about a fixed pivot `P` to an
//! elastic element anchored at a fixed point `O`. The element's moving end
//! rides on the crank at radius `R`; the anchor sits at distance `w` from
//! the pivot with `w > R`, so the element never collapses to zero length.
//! The crank angle `theta` is measured from the configuration where the
//! moving end lies on the line through `O` and `P`, on the far side of `P`
//! from `O`, which is where the element is longest.
//!
//! With the pivot at the origin, the anchor at `(-w, 0)` and the moving end
//! at `(R cos theta, R sin theta)`, the element length and the torque that
//! an axial element force produces about the pivot follow from the law of
//! cosines and the planar cross product. Tension is positive; a tensile
//! force at `0 < theta < pi` drags the crank toward larger angles, so its
//! torque is positive.

use thiserror::Error;

/// Errors from constructing or sampling crank kinematics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    /// The anchor offset and crank radius must satisfy `w > R > 0`.
    #[error("crank geometry requires anchor offset > crank radius > 0, got {anchor_offset} m and {crank_radius} m")]
    Dimensions {
        anchor_offset: f64,
        crank_radius: f64,
    },
    /// An angle schedule needs at least two distinct, finite sample angles.
    #[error("angle schedule requires steps >= 2 and distinct finite endpoints")]
    Schedule,
    /// Torque cannot be transmitted at angles where the element line passes
    /// through the pivot (`sin theta <= 0`).
    #[error("no torque transmission at theta = {theta} rad (sin theta <= 0)")]
    OutOfDomain { theta: f64 },
}

/// Planar crank with an elastic element spanning anchor to crank pin.
///
/// Distances are meters. `theta = 0` is the longest-element configuration;
/// the two symmetric angles where a given element is relaxed are derived in
/// the synthesis layer, not stored here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrankGeometry {
    anchor_offset: f64,
    crank_radius: f64,
}

impl CrankGeometry {
    /// Builds a crank, enforcing `anchor_offset > crank_radius > 0`.
    pub fn new(anchor_offset: f64, crank_radius: f64) -> Result<Self, GeometryError> {
        if !(crank_radius > 0.0 && anchor_offset > crank_radius) || !anchor_offset.is_finite() {
            return Err(GeometryError::Dimensions {
                anchor_offset,
                crank_radius,
            });
        }
        Ok(Self {
            anchor_offset,
            crank_radius,
        })
    }

    /// Distance `w` from the element anchor to the crank pivot, in meters.
    pub fn anchor_offset(&self) -> f64 {
        self.anchor_offset
    }

    /// Crank radius `R` from the pivot to the element attachment, in meters.
    pub fn crank_radius(&self) -> f64 {
        self.crank_radius
    }

    /// Current length of the elastic element at crank angle `theta`.
    ///
    /// Law of cosines: `L_S = sqrt(w^2 + R^2 + 2 w R cos theta)`, maximal
    /// `w + R` at `theta = 0`, minimal `w - R` at `theta = pi`.
    pub fn elastic_length(&self, theta: f64) -> f64 {
        let w = self.anchor_offset;
        let r = self.crank_radius;
        (w * w + r * r + 2.0 * w * r * theta.cos()).sqrt()
    }

    /// Torque about the pivot produced by an axial element force.
    ///
    /// `axial_force` is the force carried by the element, tension positive.
    /// The moment arm of the element line about the pivot is
    /// `w R sin theta / L_S`, so `T = F w R sin theta / L_S`, positive for
    /// tension on `0 < theta < pi`.
    pub fn crank_torque(&self, axial_force: f64, theta: f64) -> f64 {
        let w = self.anchor_offset;
        let r = self.crank_radius;
        axial_force * w * r * theta.sin() / self.elastic_length(theta)
    }

    /// Change of element length relative to its relaxed length `relaxed`.
    ///
    /// Positive when the element is stretched beyond its natural length.
    pub fn element_deflection(&self, relaxed: f64, theta: f64) -> f64 {
        self.elastic_length(theta) - relaxed
    }

    /// Axial force the element must carry at each scheduled angle so that
    /// the crank torque equals `target_torque` exactly.
    ///
    /// Inverts the torque law: `F = T L_S / (w R sin theta)`. Every sample
    /// angle must have `sin theta > 0`; otherwise no finite force produces
    /// the torque and the offending angle is reported.
    pub fn target_force_profile(
        &self,
        target_torque: f64,
        schedule: &AngleSchedule,
    ) -> Result<Vec<ForceSample>, GeometryError> {
        schedule
            .angles()
            .map(|theta| {
                let s = theta.sin();
                if s <= 0.0 {
                    return Err(GeometryError::OutOfDomain { theta });
                }
                let force = target_torque * self.elastic_length(theta)
                    / (self.anchor_offset * self.crank_radius * s);
                Ok(ForceSample { theta, force })
            })
            .collect()
    }
}

/// One point of a force-vs-angle profile: angle in radians, force in
/// newtons (tension positive).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceSample {
    pub theta: f64,
    pub force: f64,
}

/// Uniform sampling grid over a crank-angle interval, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleSchedule {
    start: f64,
    end: f64,
    steps: usize,
}

impl AngleSchedule {
    /// Builds a schedule of `steps` samples from `start` to `end` inclusive.
    pub fn new(start: f64, end: f64, steps: usize) -> Result<Self, GeometryError> {
        if steps < 2 || start == end || !start.is_finite() || !end.is_finite() {
            return Err(GeometryError::Schedule);
        }
        Ok(Self { start, end, steps })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// The sample angles, evenly spaced with both endpoints exact.
    pub fn angles(&self) -> impl Iterator<Item = f64> + '_ {
        let span = self.end - self.start;
        let last = self.steps - 1;
        (0..self.steps).map(move |i| {
            if i == last {
                // Avoid rounding drift at the final sample.
                self.end
            } else {
                self.start + span * (i as f64) / (last as f64)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn forceps_crank() -> CrankGeometry {
        CrankGeometry::new(0.012, 0.008).unwrap()
    }

    /// Independent torque computation: place the pivot at the origin, the
    /// anchor at (-w, 0) and the tip on the crank circle, point the force
    /// along the element toward the anchor, and take the z component of
    /// r x F. Shares no code path with `crank_torque`.
    fn cross_product_torque(w: f64, r: f64, axial_force: f64, theta: f64) -> f64 {
        let (tip_x, tip_y) = (r * theta.cos(), r * theta.sin());
        let (dx, dy) = (-w - tip_x, -tip_y);
        let len = dx.hypot(dy);
        let (fx, fy) = (axial_force * dx / len, axial_force * dy / len);
        tip_x * fy - tip_y * fx
    }

    #[test]
    fn rejects_degenerate_dimensions() {
        assert!(CrankGeometry::new(0.008, 0.008).is_err());
        assert!(CrankGeometry::new(0.005, 0.008).is_err());
        assert!(CrankGeometry::new(0.012, 0.0).is_err());
        assert!(CrankGeometry::new(-0.012, -0.008).is_err());
        assert!(CrankGeometry::new(f64::NAN, 0.008).is_err());
    }

    #[test]
    fn element_length_at_collinear_angles() {
        let geom = forceps_crank();
        assert_relative_eq!(geom.elastic_length(0.0), 0.020, max_relative = 1e-14);
        assert_relative_eq!(geom.elastic_length(PI), 0.004, max_relative = 1e-14);
    }

    #[test]
    fn element_length_at_right_angle() {
        let geom = forceps_crank();
        // Right angle at the pivot: hypotenuse of the (w, R) triangle.
        let expected = (0.012f64 * 0.012 + 0.008 * 0.008).sqrt();
        assert_relative_eq!(geom.elastic_length(FRAC_PI_2), expected, max_relative = 1e-15);
        assert_relative_eq!(geom.elastic_length(FRAC_PI_2), 14.4222e-3, max_relative = 1e-6);
    }

    #[test]
    fn torque_of_unit_tension() {
        let geom = forceps_crank();
        assert_eq!(geom.crank_torque(1.0, 0.0), 0.0);
        let t = geom.crank_torque(1.0, FRAC_PI_2);
        assert_relative_eq!(t, 9.6e-5 / 14.4222051e-3, max_relative = 1e-8);
        // Rounds to 6.656 mN*m at four significant figures.
        assert!((t - 6.656e-3).abs() < 0.5e-6, "torque {t} N*m");
    }

    #[test]
    fn deflection_vanishes_at_natural_length() {
        let geom = forceps_crank();
        assert_eq!(geom.element_deflection(0.020, 0.0), 0.0);
        let natural = geom.elastic_length(FRAC_PI_2);
        assert_eq!(geom.element_deflection(natural, FRAC_PI_2), 0.0);
        assert_relative_eq!(
            geom.element_deflection(0.004, 0.0),
            0.016,
            max_relative = 1e-14
        );
    }

    #[test]
    fn force_profile_hits_worked_value() {
        let geom = forceps_crank();
        let schedule = AngleSchedule::new(FRAC_PI_2 / 2.0, 3.0 * FRAC_PI_2 / 2.0, 3).unwrap();
        let profile = geom.target_force_profile(0.030, &schedule).unwrap();
        assert_eq!(profile.len(), 3);
        assert_relative_eq!(profile[1].theta, FRAC_PI_2, max_relative = 1e-15);
        assert_relative_eq!(profile[1].force, 4.506939, max_relative = 1e-6);
    }

    #[test]
    fn force_profile_of_zero_torque_is_zero() {
        let geom = forceps_crank();
        let schedule = AngleSchedule::new(0.2, 3.0, 17).unwrap();
        for sample in geom.target_force_profile(0.0, &schedule).unwrap() {
            assert_eq!(sample.force, 0.0);
        }
    }

    #[test]
    fn force_profile_rejects_non_transmitting_angles() {
        let geom = forceps_crank();
        let through_pi = AngleSchedule::new(FRAC_PI_2, 1.5 * PI, 5).unwrap();
        assert!(matches!(
            geom.target_force_profile(0.030, &through_pi),
            Err(GeometryError::OutOfDomain { .. })
        ));
        let negative = AngleSchedule::new(-1.0, -0.1, 4).unwrap();
        assert!(matches!(
            geom.target_force_profile(0.030, &negative),
            Err(GeometryError::OutOfDomain { .. })
        ));
    }

    #[test]
    fn schedule_validation_and_endpoints() {
        assert!(AngleSchedule::new(0.1, 0.9, 1).is_err());
        assert!(AngleSchedule::new(0.1, 0.9, 0).is_err());
        assert!(AngleSchedule::new(0.4, 0.4, 5).is_err());
        let schedule = AngleSchedule::new(0.25, 1.75, 7).unwrap();
        let angles: Vec<f64> = schedule.angles().collect();
        assert_eq!(angles.len(), 7);
        assert_eq!(angles[0], 0.25);
        assert_eq!(angles[6], 1.75);
        // Descending schedules sample the same way.
        let down: Vec<f64> = AngleSchedule::new(1.0, 0.0, 3).unwrap().angles().collect();
        assert_eq!(down, vec![1.0, 0.5, 0.0]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        /// The closed-form torque law agrees with the coordinate-built
        /// cross product everywhere the torque is meaningfully nonzero.
        #[test]
        fn torque_matches_cross_product_oracle(
            w in 1e-3..0.1f64,
            ratio in 0.05..0.95f64,
            force in -100.0..100.0f64,
            theta in 1e-3..(PI - 1e-3),
        ) {
            let r = w * ratio;
            let geom = CrankGeometry::new(w, r).unwrap();
            let law = geom.crank_torque(force, theta);
            let oracle = cross_product_torque(w, r, force, theta);
            let scale = law.abs().max(oracle.abs());
            if scale > 0.0 {
                prop_assert!((law - oracle).abs() <= 1e-12 * scale,
                    "law {law:e} vs oracle {oracle:e}");
            }
        }

        #[test]
        fn element_length_symmetric_and_bounded(
            w in 1e-3..0.1f64,
            ratio in 0.05..0.95f64,
            theta in -PI..PI,
        ) {
            let r = w * ratio;
            let geom = CrankGeometry::new(w, r).unwrap();
            let len = geom.elastic_length(theta);
            prop_assert_eq!(len, geom.elastic_length(-theta));
            prop_assert!(len >= (w - r) * (1.0 - 1e-12));
            prop_assert!(len <= (w + r) * (1.0 + 1e-12));
        }

        #[test]
        fn element_length_strictly_decreasing(
            w in 1e-3..0.1f64,
            ratio in 0.05..0.95f64,
            lo in 0.01..3.0f64,
            gap in 1e-6..0.1f64,
        ) {
            let hi = (lo + gap).min(PI - 1e-3);
            prop_assume!(hi > lo);
            let geom = CrankGeometry::new(w, w * ratio).unwrap();
            prop_assert!(geom.elastic_length(lo) > geom.elastic_length(hi));
        }

        /// Forward torque of the inverse force profile returns the target.
        #[test]
        fn force_profile_round_trips(
            w in 1e-3..0.1f64,
            ratio in 0.05..0.95f64,
            torque in 1e-6..10.0f64,
            lo in 0.05..1.5f64,
            span in 0.1..1.5f64,
        ) {
            let hi = (lo + span).min(PI - 0.05);
            prop_assume!(hi > lo);
            let geom = CrankGeometry::new(w, w * ratio).unwrap();
            let schedule = AngleSchedule::new(lo, hi, 9).unwrap();
            for sample in geom.target_force_profile(torque, &schedule).unwrap() {
                let back = geom.crank_torque(sample.force, sample.theta);
                prop_assert!((back - torque).abs() <= 1e-12 * torque);
            }
        }
    }
}
