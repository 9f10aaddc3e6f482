//! Assembly of the full mechanism: positive spring, tendon pre-load, and
//! the compliant negative-stiffness element on the crank.
//!
//! The sign convention is the jaw's: positive net torque closes the jaw,
//! negative opens it. The positive spring always pulls toward open,
//! contributing -k(theta + preload). The elastic element is mounted so its
//! compression drives the jaw closed, which is the mirrored side of the
//! solver's tension-positive force curve; composing the mirrored curve with
//! the transmission law gives a positive, rising torque over the operating
//! window. Pre-load on the spring then shifts the flat net torque up or
//! down without touching the element.
//!
//! Everything here is SI: radians, newtons, meters, N*m.

use crate::beam_fem::{BeamDesign, FemError, ForceDeflectionCurve, Material};
use crate::geometry::{AngleSchedule, CrankGeometry};
use std::io::{self, Write};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SynthesisError {
    #[error("invalid synthesis parameter: {0}")]
    Config(String),
    #[error("scheduled angle {theta} rad needs chord {chord} m outside the solved range")]
    Range { theta: f64, chord: f64 },
    #[error("torque curves sampled on different angle grids")]
    GridMismatch,
    #[error("no samples inside the stated window")]
    EmptyWindow,
    #[error("target needs preload {required} rad, below the tendon's slack limit")]
    Infeasible { required: f64 },
}

/// The ordinary torsional spring plus its tendon-set pre-load.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositiveSpring {
    /// Stiffness, N*m per radian.
    k: f64,
    /// Pre-load angle, radians, never negative (a tendon cannot push).
    preload_angle: f64,
}

impl PositiveSpring {
    pub fn new(k: f64, preload_angle: f64) -> Result<Self, SynthesisError> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(SynthesisError::Config(
                "spring stiffness must be positive".into(),
            ));
        }
        if !(preload_angle >= 0.0) || !preload_angle.is_finite() {
            return Err(SynthesisError::Config(
                "preload angle must be nonnegative".into(),
            ));
        }
        Ok(Self { k, preload_angle })
    }

    pub fn stiffness(&self) -> f64 {
        self.k
    }

    pub fn preload_angle(&self) -> f64 {
        self.preload_angle
    }

    pub fn with_preload(&self, preload_angle: f64) -> Result<Self, SynthesisError> {
        Self::new(self.k, preload_angle)
    }
}

/// Spring contribution at a crank angle: -k (theta + preload). Negative
/// because the spring opposes closing.
pub fn spring_torque(s: &PositiveSpring, theta: f64) -> f64 {
    -s.k * (theta + s.preload_angle)
}

/// The assembled mechanism's fixed parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisConfig {
    pub geometry: CrankGeometry,
    pub spring: PositiveSpring,
    /// Pre-load period: the crank sweep [0, theta1] deforms the element
    /// before the operating window begins. Radians.
    pub theta1: f64,
    /// Operational window length; the window is [theta1, theta1 + theta2].
    pub theta2: f64,
    /// Pin distance at which the elastic element is relaxed, meters.
    pub relaxed_chord: f64,
    /// Tendon/pulley reduction from handle angle to spring pre-load angle.
    pub handle_ratio: f64,
    /// Jaw opening range, radians, metadata for reports.
    pub jaw_limits: (f64, f64),
    /// Jaw length, meters, metadata for reports.
    pub jaw_length: f64,
}

impl SynthesisConfig {
    /// Validates angles against the crank's feasible sweep and the relaxed
    /// chord against the reachable pin distances.
    pub fn new(
        geometry: CrankGeometry,
        spring: PositiveSpring,
        theta1: f64,
        theta2: f64,
        relaxed_chord: f64,
    ) -> Result<Self, SynthesisError> {
        if !(theta2 > 0.0) || theta1 < 0.0 || !theta1.is_finite() || !theta2.is_finite() {
            return Err(SynthesisError::Config(
                "need theta1 >= 0 and theta2 > 0".into(),
            ));
        }
        if theta1 + theta2 > std::f64::consts::PI {
            return Err(SynthesisError::Config(
                "theta1 + theta2 exceeds the feasible crank sweep".into(),
            ));
        }
        let min = geometry.anchor_offset() - geometry.crank_radius();
        let max = geometry.anchor_offset() + geometry.crank_radius();
        if !(min..=max).contains(&relaxed_chord) {
            return Err(SynthesisError::Config(format!(
                "relaxed chord {relaxed_chord} m is outside the crank's pin range [{min}, {max}]"
            )));
        }
        Ok(Self {
            geometry,
            spring,
            theta1,
            theta2,
            relaxed_chord,
            handle_ratio: 1.0,
            jaw_limits: (0.0, 90f64.to_radians()),
            jaw_length: 0.020,
        })
    }

    /// Crank angles where the element is unstretched (the relax points on
    /// the crank circle, symmetric about the anchor line).
    pub fn relax_angles(&self) -> (f64, f64) {
        let w = self.geometry.anchor_offset();
        let r = self.geometry.crank_radius();
        let cos = ((self.relaxed_chord * self.relaxed_chord - w * w - r * r) / (2.0 * w * r))
            .clamp(-1.0, 1.0);
        let a = cos.acos();
        (a, 2.0 * std::f64::consts::PI - a)
    }

    /// The operating window [theta1, theta1 + theta2].
    pub fn window(&self) -> (f64, f64) {
        (self.theta1, self.theta1 + self.theta2)
    }

    /// Evenly spaced window samples, `steps` of them, endpoints included.
    pub fn window_schedule(&self, steps: usize) -> Result<AngleSchedule, SynthesisError> {
        AngleSchedule::new(self.theta1, self.theta1 + self.theta2, steps)
            .map_err(|e| SynthesisError::Config(e.to_string()))
    }
}

/// Torque versus crank angle with a stated statistics window. Samples are
/// kept sorted by angle; every statistic is computed from the samples on
/// demand, nothing cached.
#[derive(Debug, Clone, PartialEq)]
pub struct TorqueCurve {
    samples: Vec<(f64, f64)>,
    window: (f64, f64),
}

impl TorqueCurve {
    pub fn new(mut samples: Vec<(f64, f64)>, window: (f64, f64)) -> Result<Self, SynthesisError> {
        if samples.iter().any(|s| !s.0.is_finite() || !s.1.is_finite()) {
            return Err(SynthesisError::Config(
                "torque samples must be finite".into(),
            ));
        }
        if !(window.0 < window.1) {
            return Err(SynthesisError::Config(
                "statistics window must have positive length".into(),
            ));
        }
        samples.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite angles"));
        let curve = Self { samples, window };
        if curve.window_samples().next().is_none() {
            return Err(SynthesisError::EmptyWindow);
        }
        Ok(curve)
    }

    /// (theta, torque) pairs sorted by theta, radians and N*m.
    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    /// The window statistics are taken over.
    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    /// The same samples with a different statistics window.
    pub fn with_window(&self, window: (f64, f64)) -> Result<Self, SynthesisError> {
        Self::new(self.samples.clone(), window)
    }

    fn window_samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        // a hair of tolerance so schedule endpoints stay inside
        let lo = self.window.0 - 1e-12;
        let hi = self.window.1 + 1e-12;
        self.samples
            .iter()
            .copied()
            .filter(move |s| (lo..=hi).contains(&s.0))
    }

    /// Mean torque over the window.
    pub fn mean(&self) -> f64 {
        let (sum, n) = self
            .window_samples()
            .fold((0.0, 0usize), |(s, n), (_, t)| (s + t, n + 1));
        sum / n as f64
    }

    /// Population standard deviation about the mean over the window; this
    /// is also the rms residual of the best constant fit.
    pub fn std(&self) -> f64 {
        let mean = self.mean();
        let (sum, n) = self.window_samples().fold((0.0, 0usize), |(s, n), (_, t)| {
            (s + (t - mean) * (t - mean), n + 1)
        });
        (sum / n as f64).sqrt()
    }

    /// Coefficient of variation: std over |mean|.
    pub fn coefficient_of_variation(&self) -> f64 {
        self.std() / self.mean().abs()
    }

    /// Ordinary least-squares line fit over the window:
    /// (slope, intercept, rms residual).
    pub fn line_fit(&self) -> (f64, f64, f64) {
        let samples: Vec<(f64, f64)> = self.window_samples().collect();
        crate::ga::line_fit(&samples)
    }

    /// Pointwise sum with another curve on the identical angle grid; the
    /// window is carried from `self`.
    pub fn try_add(&self, rhs: &TorqueCurve) -> Result<TorqueCurve, SynthesisError> {
        if self.samples.len() != rhs.samples.len()
            || self
                .samples
                .iter()
                .zip(&rhs.samples)
                .any(|(a, b)| a.0 != b.0)
        {
            return Err(SynthesisError::GridMismatch);
        }
        let samples = self
            .samples
            .iter()
            .zip(&rhs.samples)
            .map(|(a, b)| (a.0, a.1 + b.1))
            .collect();
        TorqueCurve::new(samples, self.window)
    }

    /// Writes `theta_deg, torque_mNm` rows, the file-format units.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "theta_deg,torque_mNm")?;
        for (theta, torque) in &self.samples {
            writeln!(out, "{},{}", theta.to_degrees(), torque * 1e3)?;
        }
        Ok(())
    }
}

/// Composes a solved (already mounted) force-deflection curve with the
/// transmission law: T(theta) = crank_torque(F(L_S(theta)), theta) at every
/// scheduled angle. Statistics default to the full scheduled span; callers
/// narrow with [`TorqueCurve::with_window`] as needed.
pub fn nsm_torque_curve(
    curve: &ForceDeflectionCurve,
    geometry: &CrankGeometry,
    schedule: &AngleSchedule,
) -> Result<TorqueCurve, SynthesisError> {
    let samples: Vec<(f64, f64)> = schedule
        .angles()
        .map(|theta| {
            let chord = geometry.elastic_length(theta);
            let force = curve
                .force_at(chord)
                .map_err(|_| SynthesisError::Range { theta, chord })?;
            Ok((theta, geometry.crank_torque(force, theta)))
        })
        .collect::<Result<_, SynthesisError>>()?;
    let window = (schedule.start().min(schedule.end()), schedule.start().max(schedule.end()));
    TorqueCurve::new(samples, window)
}

/// The assembled net torque: NSM plus spring, pointwise on the NSM grid,
/// statistics over the configured operating window.
pub fn net_torque_curve(nsm: &TorqueCurve, s: &PositiveSpring) -> TorqueCurve {
    let samples = nsm
        .samples
        .iter()
        .map(|&(theta, torque)| (theta, torque + spring_torque(s, theta)))
        .collect();
    TorqueCurve {
        samples,
        window: nsm.window,
    }
}

/// Pre-load that makes the windowed mean net torque equal the target:
/// mean_net = mean_nsm - k (mean_theta + preload), solved for preload.
/// Fails when the tendon would have to go slack (negative pre-load).
pub fn preload_for_target(
    k: f64,
    nsm: &TorqueCurve,
    target: f64,
) -> Result<f64, SynthesisError> {
    if !(k > 0.0) {
        return Err(SynthesisError::Config(
            "spring stiffness must be positive".into(),
        ));
    }
    let (sum_theta, n) = nsm
        .window_samples()
        .fold((0.0, 0usize), |(s, n), (t, _)| (s + t, n + 1));
    let mean_theta = sum_theta / n as f64;
    let required = (nsm.mean() - target) / k - mean_theta;
    // forgive pure rounding noise at the feasibility boundary
    if required < -1e-9 {
        return Err(SynthesisError::Infeasible { required });
    }
    Ok(required.max(0.0))
}

/// Amplifies the element's force by widening its section out of plane.
/// Forces scale exactly linearly (area and second moment are both linear
/// in width) and stresses are untouched, so torque magnitude can be matched
/// to the spring without re-optimizing the shape.
pub fn scale_section(design: &BeamDesign, force_scale: f64) -> Result<BeamDesign, FemError> {
    design.with_width_scaled(force_scale)
}

/// Yield verdict for a solved sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StressReport {
    /// Largest extreme-fiber von Mises stress anywhere in the sweep, Pa.
    pub peak: f64,
    /// yield - peak; negative when over.
    pub margin: f64,
    /// Strictly below yield passes; equality fails.
    pub pass: bool,
}

pub fn stress_check(curve: &ForceDeflectionCurve, material: &Material) -> StressReport {
    let peak = curve.peak_stress();
    let yield_strength = material.yield_strength();
    StressReport {
        peak,
        margin: yield_strength - peak,
        pass: peak < yield_strength,
    }
}

/// What the jaw does for a given handle angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HandleResponse {
    /// Mean net torque over the window, N*m, positive (closing).
    Grasp(f64),
    /// Net torque nonpositive: the spring wins and the jaw swings open.
    JawOpens,
}

/// Maps a handle angle through the tendon ratio to a pre-load and reports
/// the resulting mean grasp torque.
pub fn handle_map(
    handle_angle: f64,
    config: &SynthesisConfig,
    nsm: &TorqueCurve,
) -> Result<HandleResponse, SynthesisError> {
    if handle_angle < 0.0 || !handle_angle.is_finite() {
        return Err(SynthesisError::Config(
            "handle angle must be a nonnegative angle".into(),
        ));
    }
    let preload = config.handle_ratio * handle_angle;
    let spring = config.spring.with_preload(preload)?;
    let mean = net_torque_curve(nsm, &spring).mean();
    Ok(if mean > 0.0 {
        HandleResponse::Grasp(mean)
    } else {
        HandleResponse::JawOpens
    })
}

#[cfg(test)]
mod tests;
