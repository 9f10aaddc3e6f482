//! Geometrically nonlinear planar beam solver.
//!
//! The compliant element of the mechanism is a slender curved beam, pinned
//! at both ends, whose chord is shortened by tens of percent as the crank
//! rotates. What the rest of the toolkit needs from it is the axial force
//! carried along the chord as a function of chord length, plus the peak
//! bending-plus-membrane stress along the way.
//!
//! The discretization is 2-node corotational beam elements with linear
//! elastic Euler-Bernoulli behavior in the corotated frame: exact large
//! rotations, small local strains. Equilibrium is found by displacement
//! control: one pin is fixed, the other is marched along the chord line,
//! and Newton-Raphson with automatic step bisection resolves each state.
//! Snap-through shows up as a falling force segment, which displacement
//! control traverses without arc-length continuation.

mod banded;
mod spline;
mod solver;
pub mod validation;

pub use solver::{solve_tip_load, Simulation};

use spline::PlanarSpline;
use std::io::{self, Write};
use thiserror::Error;

/// Newton tolerance: residual norm below `1e-8 * E * A` counts as
/// equilibrium. Scales with the stiffest force unit in the model.
const RESIDUAL_TOL_FACTOR: f64 = 1e-8;
/// Newton iteration cap per attempted step.
const MAX_NEWTON_ITERATIONS: usize = 50;
/// Consecutive halvings of a failed displacement increment before the
/// schedule step is declared non-convergent.
const MAX_BISECTIONS: usize = 5;

/// Mesh density used by the shipped pipeline. Doubling it moves the force
/// curve of the reference design by well under a percent.
pub const DEFAULT_N_ELEMENTS: usize = 40;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FemError {
    /// The beam design violates a shape invariant.
    #[error("invalid beam shape: {0}")]
    Shape(String),
    /// The chord schedule is unusable (empty, non-monotone, or it does not
    /// start at the natural chord).
    #[error("invalid chord schedule: {0}")]
    Schedule(String),
    /// Newton-Raphson exhausted its bisection budget at the given schedule
    /// step (0-based index into the schedule).
    #[error("equilibrium lost at schedule step {step}: bisection budget exhausted")]
    NonConvergence { step: usize },
    /// A requested chord lies outside the range covered by the curve.
    #[error("chord {chord} m outside the sampled range [{min} m, {max} m]")]
    ChordOutOfRange { chord: f64, min: f64, max: f64 },
}

/// Linear elastic material card.
///
/// Poisson's ratio is carried for completeness of the material definition;
/// Euler-Bernoulli beam theory never reads it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    youngs_modulus: f64,
    poisson_ratio: f64,
    yield_strength: f64,
}

impl Material {
    pub fn new(
        youngs_modulus: f64,
        poisson_ratio: f64,
        yield_strength: f64,
    ) -> Result<Self, FemError> {
        if !(youngs_modulus > 0.0) || !(yield_strength > 0.0) {
            return Err(FemError::Shape(format!(
                "material moduli must be positive, got E = {youngs_modulus} Pa, yield = {yield_strength} Pa"
            )));
        }
        if !(0.0..0.5).contains(&poisson_ratio) {
            return Err(FemError::Shape(format!(
                "poisson ratio must lie in [0, 0.5), got {poisson_ratio}"
            )));
        }
        Ok(Self {
            youngs_modulus,
            poisson_ratio,
            yield_strength,
        })
    }

    pub fn youngs_modulus(&self) -> f64 {
        self.youngs_modulus
    }

    pub fn poisson_ratio(&self) -> f64 {
        self.poisson_ratio
    }

    pub fn yield_strength(&self) -> f64 {
        self.yield_strength
    }
}

/// Rectangular cross-section: `in_plane_thickness` is the dimension that
/// bends (in the plane of the mechanism), `out_of_plane_width` the extruded
/// one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossSection {
    in_plane_thickness: f64,
    out_of_plane_width: f64,
}

impl CrossSection {
    pub fn new(in_plane_thickness: f64, out_of_plane_width: f64) -> Result<Self, FemError> {
        if !(in_plane_thickness > 0.0) || !(out_of_plane_width > 0.0) {
            return Err(FemError::Shape(format!(
                "cross-section dimensions must be positive, got {in_plane_thickness} m x {out_of_plane_width} m"
            )));
        }
        Ok(Self {
            in_plane_thickness,
            out_of_plane_width,
        })
    }

    pub fn in_plane_thickness(&self) -> f64 {
        self.in_plane_thickness
    }

    pub fn out_of_plane_width(&self) -> f64 {
        self.out_of_plane_width
    }

    pub fn area(&self) -> f64 {
        self.in_plane_thickness * self.out_of_plane_width
    }

    /// Second moment for in-plane bending: `b t^3 / 12`.
    pub fn second_moment(&self) -> f64 {
        self.out_of_plane_width * self.in_plane_thickness.powi(3) / 12.0
    }
}

/// Axis-aligned rectangle bounding the beam centerline, `[0, length]` along
/// the pin-to-pin axis and `[0, depth]` across it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignBox {
    length: f64,
    depth: f64,
}

impl DesignBox {
    pub fn new(length: f64, depth: f64) -> Result<Self, FemError> {
        if !(length > 0.0) || !(depth > 0.0) {
            return Err(FemError::Shape(format!(
                "design box must have positive extent, got {length} m x {depth} m"
            )));
        }
        Ok(Self { length, depth })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn depth(&self) -> f64 {
        self.depth
    }

    pub fn contains(&self, point: (f64, f64)) -> bool {
        (0.0..=self.length).contains(&point.0) && (0.0..=self.depth).contains(&point.1)
    }
}

/// A candidate compliant beam: five key points in box coordinates, the
/// first and last being the pin locations.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamDesign {
    key_points: [(f64, f64); 5],
    section: CrossSection,
    material: Material,
    design_box: DesignBox,
}

impl BeamDesign {
    /// Validates the shape invariants: all key points inside the box, and
    /// projections onto the end-to-end axis strictly increasing, so the
    /// control polygon cannot fold back over itself.
    pub fn new(
        key_points: [(f64, f64); 5],
        section: CrossSection,
        material: Material,
        design_box: DesignBox,
    ) -> Result<Self, FemError> {
        for (i, p) in key_points.iter().enumerate() {
            if !p.0.is_finite() || !p.1.is_finite() {
                return Err(FemError::Shape(format!("key point {i} is not finite")));
            }
            if !design_box.contains(*p) {
                return Err(FemError::Shape(format!(
                    "key point {i} at ({}, {}) m lies outside the design box",
                    p.0, p.1
                )));
            }
        }
        let (first, last) = (key_points[0], key_points[4]);
        let axis = (last.0 - first.0, last.1 - first.1);
        let span = axis.0.hypot(axis.1);
        if span <= 0.0 {
            return Err(FemError::Shape("pin locations coincide".into()));
        }
        let mut prev = f64::NEG_INFINITY;
        for (i, p) in key_points.iter().enumerate() {
            let along = ((p.0 - first.0) * axis.0 + (p.1 - first.1) * axis.1) / span;
            if along <= prev {
                return Err(FemError::Shape(format!(
                    "key point {i} does not advance along the pin-to-pin axis"
                )));
            }
            prev = along;
        }
        Ok(Self {
            key_points,
            section,
            material,
            design_box,
        })
    }

    pub fn key_points(&self) -> &[(f64, f64); 5] {
        &self.key_points
    }

    pub fn section(&self) -> CrossSection {
        self.section
    }

    pub fn material(&self) -> Material {
        self.material
    }

    pub fn design_box(&self) -> DesignBox {
        self.design_box
    }

    /// Same shape with the out-of-plane width multiplied by `scale`.
    ///
    /// Beam theory is linear in the width (both A and I carry one factor of
    /// b), so this scales every force and moment by exactly `scale` while
    /// leaving stresses untouched.
    pub fn with_width_scaled(&self, scale: f64) -> Result<Self, FemError> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(FemError::Shape(format!(
                "width scale must be positive and finite, got {scale}"
            )));
        }
        let section = CrossSection::new(
            self.section.in_plane_thickness,
            self.section.out_of_plane_width * scale,
        )?;
        Ok(Self { section, ..self.clone() })
    }
}

/// Discretized beam: reference node positions plus per-element reference
/// length and orientation. Elements connect consecutive nodes.
#[derive(Debug, Clone)]
pub struct BeamModel {
    nodes: Vec<(f64, f64)>,
    ref_length: Vec<f64>,
    ref_angle: Vec<f64>,
    section: CrossSection,
    material: Material,
}

impl BeamModel {
    /// Builds a model directly from an explicit centerline polyline. The
    /// polyline points become the nodes; consecutive points must be
    /// distinct. This is the low-level entry used by tests and by
    /// [`build_model`].
    pub fn from_polyline(
        nodes: Vec<(f64, f64)>,
        section: CrossSection,
        material: Material,
    ) -> Result<Self, FemError> {
        if nodes.len() < 2 {
            return Err(FemError::Shape("a beam needs at least two nodes".into()));
        }
        let mut ref_length = Vec::with_capacity(nodes.len() - 1);
        let mut ref_angle = Vec::with_capacity(nodes.len() - 1);
        for (i, pair) in nodes.windows(2).enumerate() {
            let (dx, dy) = (pair[1].0 - pair[0].0, pair[1].1 - pair[0].1);
            let len = dx.hypot(dy);
            if !(len > 0.0) {
                return Err(FemError::Shape(format!(
                    "nodes {i} and {} coincide",
                    i + 1
                )));
            }
            ref_length.push(len);
            ref_angle.push(dy.atan2(dx));
        }
        if natural_chord_of(&nodes) <= 0.0 {
            return Err(FemError::Shape("end nodes coincide".into()));
        }
        Ok(Self {
            nodes,
            ref_length,
            ref_angle,
            section,
            material,
        })
    }

    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    pub fn n_elements(&self) -> usize {
        self.ref_length.len()
    }

    pub fn section(&self) -> CrossSection {
        self.section
    }

    pub fn material(&self) -> Material {
        self.material
    }

    pub(crate) fn ref_length(&self, element: usize) -> f64 {
        self.ref_length[element]
    }

    pub(crate) fn ref_angle(&self, element: usize) -> f64 {
        self.ref_angle[element]
    }

    /// Total reference arc length (sum of element lengths).
    pub fn arc_length(&self) -> f64 {
        self.ref_length.iter().sum()
    }

    /// Pin-to-pin distance in the stress-free reference state.
    pub fn natural_chord(&self) -> f64 {
        natural_chord_of(&self.nodes)
    }
}

fn natural_chord_of(nodes: &[(f64, f64)]) -> f64 {
    let first = nodes[0];
    let last = nodes[nodes.len() - 1];
    (last.0 - first.0).hypot(last.1 - first.1)
}

/// Interpolates the design's key points with a natural parametric cubic
/// spline and resamples it into `n_elements` equal-arc-length elements.
///
/// Accuracy contracts elsewhere in the crate assume `n_elements >= 8`;
/// smaller meshes are built without complaint so that deliberately coarse
/// validation runs can fail on physics, not on argument checking.
pub fn build_model(design: &BeamDesign, n_elements: usize) -> Result<BeamModel, FemError> {
    if n_elements == 0 {
        return Err(FemError::Shape("n_elements must be at least 1".into()));
    }
    let spline = PlanarSpline::through(design.key_points())
        .ok_or_else(|| FemError::Shape("consecutive key points coincide".into()))?;
    let nodes = spline.equal_arc_points(n_elements);
    BeamModel::from_polyline(nodes, design.section(), design.material())
}

/// One converged equilibrium state along a chord schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceDeflectionSample {
    /// Pin-to-pin distance, meters.
    pub chord: f64,
    /// Force the moved pin applies to the beam along the chord direction,
    /// tension positive, newtons.
    pub axial_force: f64,
    /// Peak extreme-fiber von Mises stress over all elements, pascals.
    pub max_von_mises: f64,
    /// Always true for retained samples; non-converged steps abort the
    /// solve instead of being recorded.
    pub converged: bool,
}

/// Force and stress versus chord length for one beam, the solver's product.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceDeflectionCurve {
    samples: Vec<ForceDeflectionSample>,
}

impl ForceDeflectionCurve {
    pub fn samples(&self) -> &[ForceDeflectionSample] {
        &self.samples
    }

    /// Builds a curve from explicit samples, for synthetic force laws and
    /// test oracles. Samples must be strictly monotone in chord.
    pub fn from_samples(samples: Vec<ForceDeflectionSample>) -> Result<Self, FemError> {
        if samples.len() < 2 {
            return Err(FemError::Schedule(
                "a curve needs at least two samples".into(),
            ));
        }
        let increasing = samples[1].chord > samples[0].chord;
        for w in samples.windows(2) {
            let ok = if increasing {
                w[1].chord > w[0].chord
            } else {
                w[1].chord < w[0].chord
            };
            if !ok || !w[1].chord.is_finite() {
                return Err(FemError::Schedule(
                    "curve samples must be strictly monotone in chord".into(),
                ));
            }
        }
        Ok(Self { samples })
    }

    /// The same elastic element mounted on the opposite side of the crank
    /// pin: every force changes sign, stresses are unchanged.
    pub fn mirrored(&self) -> Self {
        let samples = self
            .samples
            .iter()
            .map(|s| ForceDeflectionSample {
                axial_force: -s.axial_force,
                ..*s
            })
            .collect();
        Self { samples }
    }

    fn chord_bounds(&self) -> (f64, f64) {
        self.samples
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
                (lo.min(s.chord), hi.max(s.chord))
            })
    }

    /// Axial force at an arbitrary chord by linear interpolation between
    /// the two bracketing samples.
    pub fn force_at(&self, chord: f64) -> Result<f64, FemError> {
        self.interpolate(chord, |s| s.axial_force)
    }

    /// Interpolated stress at an arbitrary chord, linear like [`force_at`].
    pub fn stress_at(&self, chord: f64) -> Result<f64, FemError> {
        self.interpolate(chord, |s| s.max_von_mises)
    }

    /// Largest stress seen anywhere along the solved schedule.
    pub fn peak_stress(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.max_von_mises)
            .fold(0.0, f64::max)
    }

    fn interpolate(
        &self,
        chord: f64,
        value: impl Fn(&ForceDeflectionSample) -> f64,
    ) -> Result<f64, FemError> {
        let (min, max) = self.chord_bounds();
        if !(min..=max).contains(&chord) {
            return Err(FemError::ChordOutOfRange { chord, min, max });
        }
        // The schedule is strictly monotone in chord; find the bracket in
        // schedule order.
        let s = &self.samples;
        for w in s.windows(2) {
            let (a, b) = (w[0].chord, w[1].chord);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            if (lo..=hi).contains(&chord) {
                if a == b {
                    return Ok(value(&w[0]));
                }
                let t = (chord - a) / (b - a);
                return Ok(value(&w[0]) * (1.0 - t) + value(&w[1]) * t);
            }
        }
        // Monotonicity of retained samples makes this unreachable.
        Err(FemError::ChordOutOfRange { chord, min, max })
    }

    /// Writes `chord_m,force_N,max_von_mises_Pa,converged` rows. Floats use
    /// Rust's shortest round-trip decimal form: period decimals, no
    /// thousands separators, identical across runs.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "chord_m,force_N,max_von_mises_Pa,converged")?;
        for s in &self.samples {
            writeln!(
                out,
                "{},{},{},{}",
                s.chord, s.axial_force, s.max_von_mises, s.converged
            )?;
        }
        Ok(())
    }
}

/// Displacement-controlled solve over a chord schedule.
///
/// The schedule must start at the model's natural chord and be strictly
/// monotone. One pin stays fixed, the other is marched along the original
/// chord line; each scheduled state is resolved by Newton-Raphson with step
/// bisection and recorded with its chord-direction reaction (tension
/// positive) and peak stress.
pub fn solve_force_deflection(
    model: &BeamModel,
    chord_schedule: &[f64],
) -> Result<ForceDeflectionCurve, FemError> {
    validate_schedule(model, chord_schedule)?;
    let mut sim = Simulation::new(model);
    let mut samples = Vec::with_capacity(chord_schedule.len());
    samples.push(ForceDeflectionSample {
        chord: chord_schedule[0],
        axial_force: 0.0,
        max_von_mises: 0.0,
        converged: true,
    });
    for (step, &chord) in chord_schedule.iter().enumerate().skip(1) {
        sim.advance_to_chord(chord)
            .map_err(|_| FemError::NonConvergence { step })?;
        samples.push(ForceDeflectionSample {
            chord,
            axial_force: sim.axial_force(),
            max_von_mises: sim.max_von_mises(),
            converged: true,
        });
    }
    Ok(ForceDeflectionCurve { samples })
}

/// Solves whatever schedules are needed to cover an arbitrary set of chord
/// targets and merges the results into one curve, sorted by chord.
///
/// Targets below the natural chord are reached by a compression run, targets
/// above by a stretch run; `prelude_steps` extra states are inserted between
/// the natural chord and the nearest target of each run to ease the solver
/// into large first steps. Targets within rounding distance of the natural
/// chord are served by the exact zero-force rest sample.
pub fn solve_force_deflection_covering(
    model: &BeamModel,
    chords: &[f64],
    prelude_steps: usize,
) -> Result<ForceDeflectionCurve, FemError> {
    let natural = model.natural_chord();
    let tol = 1e-9 * natural;
    let mut below: Vec<f64> = chords
        .iter()
        .copied()
        .filter(|&c| c < natural - tol)
        .collect();
    let mut above: Vec<f64> = chords
        .iter()
        .copied()
        .filter(|&c| c > natural + tol)
        .collect();
    below.sort_by(|a, b| b.partial_cmp(a).expect("chords are finite"));
    below.dedup();
    above.sort_by(|a, b| a.partial_cmp(b).expect("chords are finite"));
    above.dedup();

    let branch = |targets: &[f64]| -> Result<Vec<ForceDeflectionSample>, FemError> {
        if targets.is_empty() {
            return Ok(Vec::new());
        }
        let mut schedule = vec![natural];
        for k in 1..=prelude_steps {
            let t = k as f64 / (prelude_steps + 1) as f64;
            schedule.push(natural + t * (targets[0] - natural));
        }
        schedule.extend_from_slice(targets);
        let curve = solve_force_deflection(model, &schedule)?;
        // keep only the requested states, skipping rest and prelude
        Ok(curve.samples[1 + prelude_steps..].to_vec())
    };

    let mut samples = branch(&below)?;
    samples.reverse();
    samples.push(ForceDeflectionSample {
        chord: natural,
        axial_force: 0.0,
        max_von_mises: 0.0,
        converged: true,
    });
    samples.extend(branch(&above)?);
    Ok(ForceDeflectionCurve { samples })
}

fn validate_schedule(model: &BeamModel, schedule: &[f64]) -> Result<(), FemError> {
    if schedule.len() < 2 {
        return Err(FemError::Schedule(
            "need at least the natural chord and one target".into(),
        ));
    }
    let natural = model.natural_chord();
    if (schedule[0] - natural).abs() > 1e-9 * natural {
        return Err(FemError::Schedule(format!(
            "schedule starts at {} m but the natural chord is {} m",
            schedule[0], natural
        )));
    }
    let increasing = schedule[1] > schedule[0];
    for w in schedule.windows(2) {
        let ok = if increasing { w[1] > w[0] } else { w[1] < w[0] };
        if !ok || !w[1].is_finite() {
            return Err(FemError::Schedule(
                "chord schedule must be strictly monotone".into(),
            ));
        }
    }
    if *schedule.last().unwrap() <= 0.0 {
        return Err(FemError::Schedule("chords must stay positive".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests;
