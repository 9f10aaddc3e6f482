//! Corotational Newton solver behind the public beam API.
//!
//! Each 2-node element carries three DOFs per node (u_x, u_y, rotation).
//! The element's rigid motion is split off by working in a frame that
//! follows the current chord of the element; what remains is a small-strain
//! Euler-Bernoulli element with local DOFs (axial stretch, two end
//! rotations relative to the rotated chord). That makes the formulation
//! exact for arbitrarily large rotations as long as each element stays
//! mildly deformed, which the mesh density guarantees.

use super::banded::BandMatrix;
use super::{BeamModel, FemError, MAX_BISECTIONS, MAX_NEWTON_ITERATIONS, RESIDUAL_TOL_FACTOR};
use std::f64::consts::{PI, TAU};

/// Newton failed on one attempted increment; the caller decides whether to
/// bisect or give up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct StepFailure;

fn wrap_angle(a: f64) -> f64 {
    let mut r = a % TAU;
    if r > PI {
        r -= TAU;
    } else if r < -PI {
        r += TAU;
    }
    r
}

/// Local state of one element at the current displacements.
#[derive(Debug, Clone, Copy)]
struct ElemState {
    cos: f64,
    sin: f64,
    /// Current chord length of the element.
    ln: f64,
    /// Axial force, tension positive.
    n: f64,
    /// End moments in the corotated frame.
    m1: f64,
    m2: f64,
    /// End rotations relative to the rotated chord.
    t1: f64,
    t2: f64,
}

/// Assembled equilibrium problem: model + displacement vector + constraint
/// bookkeeping + scratch space for the tangent system.
struct System<'m> {
    model: &'m BeamModel,
    /// Displacements, 3 per node. Constrained entries hold their
    /// prescribed values.
    u: Vec<f64>,
    /// External nodal loads (zero in displacement control).
    f_ext: Vec<f64>,
    /// Internal force vector from the last assembly.
    f_int: Vec<f64>,
    /// dof -> position among free dofs, or usize::MAX when constrained.
    free_index: Vec<usize>,
    free_dofs: Vec<usize>,
    band: BandMatrix,
    rhs: Vec<f64>,
    ea: f64,
    ei: f64,
    tol: f64,
}

const CONSTRAINED: usize = usize::MAX;

impl<'m> System<'m> {
    fn new(model: &'m BeamModel, constrained: &[usize]) -> Self {
        let n_dofs = 3 * model.nodes().len();
        let mut free_index = vec![0usize; n_dofs];
        for &d in constrained {
            free_index[d] = CONSTRAINED;
        }
        let mut free_dofs = Vec::with_capacity(n_dofs - constrained.len());
        for d in 0..n_dofs {
            if free_index[d] != CONSTRAINED {
                free_index[d] = free_dofs.len();
                free_dofs.push(d);
            }
        }
        // Half-bandwidth in free numbering; elements couple dof blocks of
        // two consecutive nodes.
        let mut band_width = 0usize;
        for e in 0..model.n_elements() {
            let dofs = element_dofs(e);
            let free: Vec<usize> = dofs
                .iter()
                .map(|&d| free_index[d])
                .filter(|&f| f != CONSTRAINED)
                .collect();
            for &a in &free {
                for &b in &free {
                    band_width = band_width.max(a.abs_diff(b));
                }
            }
        }
        let ea = model.material().youngs_modulus() * model.section().area();
        let ei = model.material().youngs_modulus() * model.section().second_moment();
        let n_free = free_dofs.len();
        Self {
            model,
            u: vec![0.0; n_dofs],
            f_ext: vec![0.0; n_dofs],
            f_int: vec![0.0; n_dofs],
            free_index,
            free_dofs,
            band: BandMatrix::zeros(n_free.max(1), band_width, band_width),
            rhs: vec![0.0; n_free],
            ea,
            ei,
            tol: RESIDUAL_TOL_FACTOR * ea,
        }
    }

    fn elem_state(&self, e: usize) -> ElemState {
        let (i, j) = (e, e + 1);
        let (xi, yi) = self.model.nodes()[i];
        let (xj, yj) = self.model.nodes()[j];
        let dx = (xj + self.u[3 * j]) - (xi + self.u[3 * i]);
        let dy = (yj + self.u[3 * j + 1]) - (yi + self.u[3 * i + 1]);
        let ln = dx.hypot(dy);
        let l0 = self.model.ref_length(e);
        let beta = dy.atan2(dx);
        let shift = beta - self.model.ref_angle(e);
        let t1 = wrap_angle(self.u[3 * i + 2] - shift);
        let t2 = wrap_angle(self.u[3 * j + 2] - shift);
        let n = self.ea * (ln - l0) / l0;
        let m1 = self.ei / l0 * (4.0 * t1 + 2.0 * t2);
        let m2 = self.ei / l0 * (2.0 * t1 + 4.0 * t2);
        ElemState {
            cos: dx / ln,
            sin: dy / ln,
            ln,
            n,
            m1,
            m2,
            t1,
            t2,
        }
    }

    /// Assembles internal forces and the tangent on the free dofs.
    /// Returns the free-residual norm, or None when the configuration is
    /// degenerate (collapsed element / non-finite state).
    fn assemble(&mut self) -> Option<f64> {
        self.f_int.fill(0.0);
        self.band.reset();
        for e in 0..self.model.n_elements() {
            let st = self.elem_state(e);
            if !(st.ln > 0.0) || !st.n.is_finite() || !st.m1.is_finite() || !st.m2.is_finite() {
                return None;
            }
            let l0 = self.model.ref_length(e);
            let (c, s, ln) = (st.cos, st.sin, st.ln);
            let r = [-c, -s, 0.0, c, s, 0.0];
            let z = [s, -c, 0.0, -s, c, 0.0];

            let mut f = [0.0f64; 6];
            let msum = st.m1 + st.m2;
            for k in 0..6 {
                f[k] = st.n * r[k] - msum / ln * z[k];
            }
            f[2] += st.m1;
            f[5] += st.m2;

            // Local stiffness rows: axial EA/L0; bending 4EI/L0 diagonal,
            // 2EI/L0 coupling.
            let k11 = self.ea / l0;
            let k22 = 4.0 * self.ei / l0;
            let k23 = 2.0 * self.ei / l0;
            let mut b2 = [0.0f64; 6];
            let mut b3 = [0.0f64; 6];
            for k in 0..6 {
                b2[k] = -z[k] / ln;
                b3[k] = -z[k] / ln;
            }
            b2[2] += 1.0;
            b3[5] += 1.0;

            let dofs = element_dofs(e);
            for a in 0..6 {
                let da = dofs[a];
                self.f_int[da] += f[a];
                let fa = self.free_index[da];
                if fa == CONSTRAINED {
                    continue;
                }
                for b in 0..6 {
                    let fb = self.free_index[dofs[b]];
                    if fb == CONSTRAINED {
                        continue;
                    }
                    let material = k11 * r[a] * r[b]
                        + k22 * (b2[a] * b2[b] + b3[a] * b3[b])
                        + k23 * (b2[a] * b3[b] + b3[a] * b2[b]);
                    let geometric =
                        st.n / ln * z[a] * z[b] + msum / (ln * ln) * (r[a] * z[b] + z[a] * r[b]);
                    self.band.add(fa, fb, material + geometric);
                }
            }
        }
        let mut norm2 = 0.0;
        for (k, &d) in self.free_dofs.iter().enumerate() {
            let r = self.f_ext[d] - self.f_int[d];
            self.rhs[k] = r;
            norm2 += r * r;
        }
        norm2.is_finite().then(|| norm2.sqrt())
    }

    /// Solves the assembled tangent system and applies the update; uses the
    /// residual and tangent from the most recent `assemble`.
    fn newton_update(&mut self) -> Result<(), StepFailure> {
        let mut band = std::mem::replace(&mut self.band, BandMatrix::zeros(1, 0, 0));
        let solved = band.solve_in_place(&mut self.rhs);
        self.band = band;
        if !solved {
            return Err(StepFailure);
        }
        for (k, &d) in self.free_dofs.iter().enumerate() {
            let delta = self.rhs[k];
            if !delta.is_finite() {
                return Err(StepFailure);
            }
            self.u[d] += delta;
        }
        Ok(())
    }

    /// One extra Newton step after the tolerance is met. Quadratic
    /// convergence parks the residual at the arithmetic floor, so reported
    /// forces do not depend on where inside the tolerance band the
    /// iteration happened to stop. Rolled back if it does not help.
    fn polish(&mut self, norm_before: f64) {
        let backup = self.u.clone();
        if self.newton_update().is_ok() {
            if matches!(self.assemble(), Some(norm) if norm <= norm_before) {
                return;
            }
        }
        self.u = backup;
        let _ = self.assemble();
    }

    /// Newton-Raphson from the current displacement state. On success the
    /// internal force vector matches the converged state; on failure the
    /// displacements are left for the caller to roll back.
    fn equilibrate(&mut self) -> Result<(), StepFailure> {
        let mut norm = self.assemble().ok_or(StepFailure)?;
        for _ in 0..MAX_NEWTON_ITERATIONS {
            if norm <= self.tol {
                self.polish(norm);
                return Ok(());
            }
            self.newton_update()?;
            norm = self.assemble().ok_or(StepFailure)?;
        }
        if norm <= self.tol {
            self.polish(norm);
            return Ok(());
        }
        Err(StepFailure)
    }

    fn strain_energy(&self) -> f64 {
        (0..self.model.n_elements())
            .map(|e| {
                let st = self.elem_state(e);
                let l0 = self.model.ref_length(e);
                let stretch = st.ln - l0;
                self.ea / (2.0 * l0) * stretch * stretch
                    + 2.0 * self.ei / l0 * (st.t1 * st.t1 + st.t1 * st.t2 + st.t2 * st.t2)
            })
            .sum()
    }

    fn max_von_mises(&self) -> f64 {
        let area = self.model.section().area();
        let inertia = self.model.section().second_moment();
        let half_t = self.model.section().in_plane_thickness() / 2.0;
        (0..self.model.n_elements())
            .map(|e| {
                let st = self.elem_state(e);
                st.n.abs() / area + st.m1.abs().max(st.m2.abs()) * half_t / inertia
            })
            .fold(0.0, f64::max)
    }
}

fn element_dofs(e: usize) -> [usize; 6] {
    let (i, j) = (3 * e, 3 * (e + 1));
    [i, i + 1, i + 2, j, j + 1, j + 2]
}

/// Displacement-controlled quasi-static test rig for a pinned-pinned beam.
///
/// The first node's translations are fixed; the last node's translations
/// are prescribed so the pin travels along the reference chord line. All
/// rotations stay free. Created in the relaxed state; [`advance_to_chord`]
/// walks to any chord, bisecting increments whenever Newton fails.
///
/// [`advance_to_chord`]: Simulation::advance_to_chord
pub struct Simulation<'m> {
    system: System<'m>,
    chord_dir: (f64, f64),
    natural: f64,
    chord: f64,
    moved_node: usize,
}

impl<'m> Simulation<'m> {
    pub fn new(model: &'m BeamModel) -> Self {
        let last = model.nodes().len() - 1;
        let system = System::new(model, &[0, 1, 3 * last, 3 * last + 1]);
        let first_pos = model.nodes()[0];
        let last_pos = model.nodes()[last];
        let natural = model.natural_chord();
        let chord_dir = (
            (last_pos.0 - first_pos.0) / natural,
            (last_pos.1 - first_pos.1) / natural,
        );
        Self {
            system,
            chord_dir,
            natural,
            chord: natural,
            moved_node: last,
        }
    }

    pub fn chord(&self) -> f64 {
        self.chord
    }

    fn apply_chord(&mut self, chord: f64) {
        let travel = chord - self.natural;
        self.system.u[3 * self.moved_node] = self.chord_dir.0 * travel;
        self.system.u[3 * self.moved_node + 1] = self.chord_dir.1 * travel;
    }

    /// Moves the traveling pin to the given chord length, resolving
    /// equilibrium along the way. Failed increments are halved up to the
    /// bisection budget; consecutive budget exhaustion aborts with the
    /// displacement state rolled back to the last converged point.
    pub fn advance_to_chord(&mut self, target: f64) -> Result<(), FemError> {
        if !(target > 0.0) || !target.is_finite() {
            return Err(FemError::Schedule(format!(
                "target chord must be positive and finite, got {target}"
            )));
        }
        let mut attempt = target;
        let mut failures = 0usize;
        // Each success either lands on the target or resets the bisection
        // budget with strictly less distance to cover, so this terminates.
        loop {
            let backup = self.system.u.clone();
            self.apply_chord(attempt);
            match self.system.equilibrate() {
                Ok(()) => {
                    self.chord = attempt;
                    if attempt == target {
                        return Ok(());
                    }
                    failures = 0;
                    attempt = target;
                }
                Err(StepFailure) => {
                    self.system.u = backup;
                    failures += 1;
                    if failures > MAX_BISECTIONS {
                        // Leave the system at the last converged state.
                        self.apply_chord(self.chord);
                        let _ = self.system.assemble();
                        return Err(FemError::NonConvergence { step: 0 });
                    }
                    attempt = self.chord + 0.5 * (attempt - self.chord);
                }
            }
        }
    }

    /// Chord-direction force the traveling pin applies to the beam,
    /// tension positive.
    pub fn axial_force(&self) -> f64 {
        let d = 3 * self.moved_node;
        self.chord_dir.0 * self.system.f_int[d] + self.chord_dir.1 * self.system.f_int[d + 1]
    }

    /// Reaction force vectors at (fixed pin, traveling pin).
    pub fn reactions(&self) -> ((f64, f64), (f64, f64)) {
        let d = 3 * self.moved_node;
        (
            (self.system.f_int[0], self.system.f_int[1]),
            (self.system.f_int[d], self.system.f_int[d + 1]),
        )
    }

    /// Peak extreme-fiber stress over all elements at the current state:
    /// `|N|/A + max(|M1|,|M2|) (t/2)/I`.
    pub fn max_von_mises(&self) -> f64 {
        self.system.max_von_mises()
    }

    /// Stored elastic energy at the current state.
    pub fn strain_energy(&self) -> f64 {
        self.system.strain_energy()
    }
}

/// Large-deflection cantilever benchmark mode: node 0 clamped (both
/// translations and the rotation), a dead point load at the tip, ramped in
/// `n_steps` increments with the same bisection policy as the pinned rig.
/// Returns the tip displacement vector.
pub fn solve_tip_load(
    model: &BeamModel,
    tip_force: (f64, f64),
    n_steps: usize,
) -> Result<(f64, f64), FemError> {
    let steps = n_steps.max(1);
    let last = model.nodes().len() - 1;
    let mut system = System::new(model, &[0, 1, 2]);
    // Load factors walk 0 -> 1; failed increments are halved like the
    // displacement rig's.
    let mut reached = 0.0f64;
    let mut step_index = 0usize;
    let mut failures = 0usize;
    let mut attempt = 1.0 / steps as f64;
    loop {
        let backup = system.u.clone();
        system.f_ext[3 * last] = tip_force.0 * attempt;
        system.f_ext[3 * last + 1] = tip_force.1 * attempt;
        match system.equilibrate() {
            Ok(()) => {
                reached = attempt;
                if reached >= 1.0 {
                    break;
                }
                failures = 0;
                step_index += 1;
                attempt = (reached + 1.0 / steps as f64).min(1.0);
            }
            Err(StepFailure) => {
                system.u = backup;
                failures += 1;
                if failures > MAX_BISECTIONS {
                    return Err(FemError::NonConvergence { step: step_index });
                }
                attempt = reached + 0.5 * (attempt - reached);
            }
        }
    }
    Ok((system.u[3 * last], system.u[3 * last + 1]))
}
