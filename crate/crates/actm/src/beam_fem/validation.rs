//! Analytic benchmarks for the beam solver, packaged as named checks so the
//! command line tool and the test suite share one implementation.
//!
//! Four classics: the axial bar (Hooke's law), the large-deflection
//! cantilever against a shooting solution of the elastica ODE, work-energy
//! consistency along a compression path, and mesh self-convergence.

use super::{
    build_model, solve_force_deflection, solve_tip_load, BeamDesign, FemError, Simulation,
};

/// One benchmark outcome: a measured value, the independent reference it is
/// held against, and the relative error that must stay inside `tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub reference: f64,
    /// Relative error, the quantity compared against `tolerance`.
    pub error: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn pass(&self) -> bool {
        self.error.is_finite() && self.error <= self.tolerance
    }
}

fn straight_variant(design: &BeamDesign) -> Result<BeamDesign, FemError> {
    let [a, _, _, _, b] = *design.key_points();
    let lerp = |t: f64| (a.0 + (b.0 - a.0) * t, a.1 + (b.1 - a.1) * t);
    BeamDesign::new(
        [a, lerp(0.25), lerp(0.5), lerp(0.75), b],
        design.section(),
        design.material(),
        design.design_box(),
    )
}

/// Stretches a straight bar by a small strain and compares the pin force
/// with E A delta / L0.
pub fn axial_bar_check(design: &BeamDesign, n_elements: usize) -> Result<Check, FemError> {
    let strain = 1e-4;
    let straight = straight_variant(design)?;
    let model = build_model(&straight, n_elements)?;
    let natural = model.natural_chord();
    let mut sim = Simulation::new(&model);
    sim.advance_to_chord(natural * (1.0 + strain))?;
    let measured = sim.axial_force();
    let section = design.section();
    let reference = design.material().youngs_modulus() * section.area() * strain;
    Ok(Check {
        name: "axial bar vs Hooke's law".into(),
        measured,
        reference,
        error: (measured - reference).abs() / reference,
        tolerance: 0.01,
    })
}

/// Integrates the cantilever elastica two-point boundary problem
/// phi'' = -alpha cos(phi), phi(0) = 0, phi'(1) = 0 by shooting on the
/// root curvature with bisection, Runge-Kutta inside. Returns the tip
/// position (x/L, y/L) for a transverse tip load P = alpha EI / L^2.
fn elastica_tip(alpha: f64) -> (f64, f64) {
    // state: (phi, phi', x, y)
    let derivative = |state: [f64; 4]| {
        [
            state[1],
            -alpha * state[0].cos(),
            state[0].cos(),
            state[0].sin(),
        ]
    };
    let integrate = |root_curvature: f64| -> [f64; 4] {
        let n = 2000usize;
        let h = 1.0 / n as f64;
        let mut s = [0.0, root_curvature, 0.0, 0.0];
        for _ in 0..n {
            let k1 = derivative(s);
            let mid1 = std::array::from_fn(|i| s[i] + 0.5 * h * k1[i]);
            let k2 = derivative(mid1);
            let mid2 = std::array::from_fn(|i| s[i] + 0.5 * h * k2[i]);
            let k3 = derivative(mid2);
            let end = std::array::from_fn(|i| s[i] + h * k3[i]);
            let k4 = derivative(end);
            for i in 0..4 {
                s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        s
    };
    // tip moment must vanish; the residual is monotone in the root
    // curvature over the bracket, so bisection is safe
    let (mut lo, mut hi) = (0.0f64, 2.0 * alpha);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if integrate(mid)[1] > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let s = integrate(0.5 * (lo + hi));
    (s[2], s[3])
}

/// Clamps a straight bar at one end, hangs the standard dimensionless load
/// alpha = P L^2 / (E I) off the tip, and compares both tip coordinates
/// with the elastica solution.
pub fn elastica_checks(
    design: &BeamDesign,
    alpha: f64,
    n_elements: usize,
) -> Result<[Check; 2], FemError> {
    let straight = straight_variant(design)?;
    let model = build_model(&straight, n_elements)?;
    let length = model.natural_chord();
    let section = design.section();
    let bending = design.material().youngs_modulus() * section.second_moment();
    let load = alpha * bending / (length * length);
    // load applied transverse to the bar's own axis
    let [a, _, _, _, b] = *straight.key_points();
    let axis = ((b.0 - a.0) / length, (b.1 - a.1) / length);
    let (ux, uy) = solve_tip_load(&model, (-axis.1 * load, axis.0 * load), 20)?;
    // tip position in the bar frame, normalized by length
    let measured_x = (length + ux * axis.0 + uy * axis.1) / length;
    let measured_y = (-ux * axis.1 + uy * axis.0) / length;
    let (ref_x, ref_y) = elastica_tip(alpha);
    let mk = |coord: &str, measured: f64, reference: f64| Check {
        name: format!("elastica cantilever tip {coord} at PL^2/EI = {alpha}"),
        measured,
        reference,
        error: (measured - reference).abs() / reference.abs(),
        tolerance: 0.02,
    };
    Ok([
        mk("x", measured_x, ref_x),
        mk("y", measured_y, ref_y),
    ])
}

/// Walks the pins through a compression path and compares the trapezoidal
/// work of the pin force against the stored strain energy at the end.
pub fn energy_check(
    design: &BeamDesign,
    n_elements: usize,
    final_chord: f64,
    steps: usize,
) -> Result<Check, FemError> {
    let model = build_model(design, n_elements)?;
    let natural = model.natural_chord();
    let mut sim = Simulation::new(&model);
    let mut work = 0.0;
    let mut prev = (natural, 0.0);
    for i in 1..=steps {
        let chord = natural + (final_chord - natural) * i as f64 / steps as f64;
        sim.advance_to_chord(chord)?;
        let force = sim.axial_force();
        work += 0.5 * (force + prev.1) * (chord - prev.0);
        prev = (chord, force);
    }
    let energy = sim.strain_energy();
    Ok(Check {
        name: "work-energy consistency".into(),
        measured: work,
        reference: energy,
        error: (work - energy).abs() / energy,
        tolerance: 0.01,
    })
}

/// Solves the same compression schedule on the given mesh and on one twice
/// as fine, and reports the largest force discrepancy relative to the fine
/// sweep's force scale.
pub fn mesh_convergence_check(
    design: &BeamDesign,
    n_elements: usize,
    final_chord: f64,
    samples: usize,
) -> Result<Check, FemError> {
    let solve = |n: usize| -> Result<Vec<f64>, FemError> {
        let model = build_model(design, n)?;
        let natural = model.natural_chord();
        let chords: Vec<f64> = (0..=samples)
            .map(|i| natural + (final_chord - natural) * i as f64 / samples as f64)
            .collect();
        Ok(solve_force_deflection(&model, &chords)?
            .samples()
            .iter()
            .map(|s| s.axial_force)
            .collect())
    };
    let coarse = solve(n_elements)?;
    let fine = solve(2 * n_elements)?;
    let scale = fine.iter().fold(0.0f64, |m, f| m.max(f.abs()));
    let drift = coarse
        .iter()
        .zip(&fine)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(Check {
        name: format!("mesh self-convergence {n_elements} vs {}", 2 * n_elements),
        measured: drift / scale,
        reference: 0.0,
        error: drift / scale,
        tolerance: 0.01,
    })
}

/// The full benchmark table run against one design: axial bar, both
/// elastica tip coordinates, work-energy, and mesh self-convergence.
pub fn standard_suite(
    design: &BeamDesign,
    n_elements: usize,
    final_chord: f64,
) -> Result<Vec<Check>, FemError> {
    let mut checks = vec![axial_bar_check(design, n_elements)?];
    checks.extend(elastica_checks(design, 2.0, n_elements)?);
    checks.push(energy_check(design, n_elements, final_chord, 200)?);
    checks.push(mesh_convergence_check(design, n_elements, final_chord, 25)?);
    Ok(checks)
}
