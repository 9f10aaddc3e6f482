//! The four subcommands. Each returns `Ok` or a [`CliError`] that main
//! turns into the documented exit code: 1 when the physics or the search
//! fails, 2 when the input is wrong.

use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use actm::beam_fem::validation::standard_suite;
use actm::beam_fem::{
    build_model, solve_force_deflection_covering, BeamDesign, ForceDeflectionCurve,
};
use actm::ga::{self, FitnessProblem, GaOutcome, SurrogateProblem};
use actm::presets;
use actm::synthesis::{self, SynthesisError, TorqueCurve};

use crate::config::{ConfigError, DesignFile, ProjectConfig, Resolved};

const DEG: f64 = std::f64::consts::PI / 180.0;
const MM: f64 = 1e-3;
const MNM: f64 = 1e-3;
const MPA: f64 = 1e6;

/// Chord the demo arch is compressed to in the validation suite, meters.
/// Deep enough past its rest chord of 20 mm to exercise the nonlinearity.
const VALIDATION_FINAL_CHORD: f64 = 0.013;

#[derive(Debug)]
pub enum CliError {
    /// Bad input: flags, config file, missing design file. Exit 2.
    Usage(String),
    /// The model, solver, or search failed on valid input. Exit 1.
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Domain(m) => f.write_str(m),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn domain(e: impl fmt::Display) -> CliError {
    CliError::Domain(e.to_string())
}

fn write_output(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| domain(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| domain(format!("cannot write {}: {e}", path.display())))
}

pub fn cmd_validate_fem(resolved: &Resolved) -> Result<(), CliError> {
    let design = presets::demo_arch().map_err(domain)?;
    let checks = standard_suite(&design, resolved.n_elements, VALIDATION_FINAL_CHORD)
        .map_err(|e| domain(format!("validation suite aborted: {e}")))?;

    let mut report = String::new();
    let _ = writeln!(
        report,
        "{:<42} {:>14} {:>14} {:>11} {:>11}  result",
        "check", "measured", "reference", "rel_error", "tolerance"
    );
    for c in &checks {
        let _ = writeln!(
            report,
            "{:<42} {:>14.6e} {:>14.6e} {:>11.3e} {:>11.3e}  {}",
            c.name,
            c.measured,
            c.reference,
            c.error,
            c.tolerance,
            if c.pass() { "pass" } else { "FAIL" }
        );
    }
    let failed = checks.iter().filter(|c| !c.pass()).count();
    let _ = writeln!(report, "{} of {} checks passed", checks.len() - failed, checks.len());

    print!("{report}");
    let path = resolved.out_dir.join("report.txt");
    write_output(&path, report.as_bytes())?;
    println!("wrote {}", path.display());

    if failed > 0 {
        Err(CliError::Domain(format!("{failed} validation checks failed")))
    } else {
        Ok(())
    }
}

pub fn cmd_optimize(resolved: &Resolved, surrogate: bool) -> Result<(), CliError> {
    let (outcome, meets) = if surrogate {
        // fast geometric stand-in: pull the middle key point toward a fixed
        // spot in the box so GA plumbing can be exercised without the FEM
        let target = (
            0.55 * resolved.design_box.length(),
            0.70 * resolved.design_box.depth(),
        );
        let problem = SurrogateProblem { target };
        let outcome = ga::run(&resolved.ga, &resolved.space, &problem).map_err(domain)?;
        let meets = problem.evaluate(outcome.best.key_points()).meets_target;
        (outcome, meets)
    } else {
        let problem = resolved.linearity_problem();
        let outcome = ga::run(&resolved.ga, &resolved.space, &problem).map_err(domain)?;
        let meets = problem.evaluate(outcome.best.key_points()).meets_target;
        (outcome, meets)
    };

    write_history(&resolved.out_dir.join("ga_history.csv"), &outcome)?;

    let design = BeamDesign::new(
        *outcome.best.key_points(),
        resolved.section,
        resolved.material,
        resolved.design_box,
    )
    .map_err(domain)?;
    let design_text = toml::to_string_pretty(&DesignFile::from_design(&design))
        .map_err(|e| domain(format!("cannot serialize design: {e}")))?;
    write_output(&resolved.out_dir.join("best_design.toml"), design_text.as_bytes())?;

    if let Some(stats) = outcome.history.last() {
        println!("generations: {}", stats.generation);
        println!("evaluations: {}", stats.evaluations);
    }
    if let Some(fit) = outcome.best.fitness() {
        println!("best residual: {fit:e}");
    }
    println!("meets target: {meets}");
    println!("wrote {}", resolved.out_dir.join("ga_history.csv").display());
    println!("wrote {}", resolved.out_dir.join("best_design.toml").display());

    if !surrogate {
        // the winner's torque over the window, in the sign convention the
        // fitness saw: slope comes out negative for a working candidate
        let (_, raw) = solve_window(resolved, &design, false)?;
        let (slope, _, rms) = raw.line_fit();
        let mut csv = Vec::new();
        raw.write_csv(&mut csv).map_err(domain)?;
        let path = resolved.out_dir.join("best_design_torque.csv");
        write_output(&path, &csv)?;
        println!(
            "fitted torque slope: {:.4} mNm/deg (rms residual {:.4} mNm)",
            slope / MNM * DEG,
            rms / MNM
        );
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn write_history(path: &Path, outcome: &GaOutcome) -> Result<(), CliError> {
    let mut csv = String::from("generation,best_fitness,mean_fitness,evaluations\n");
    for s in &outcome.history {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            s.generation, s.best_fitness, s.mean_fitness, s.evaluations
        );
    }
    write_output(path, csv.as_bytes())
}

/// Solves the design over the configured window and composes the crank
/// transmission. `mounted` flips the element to the working side of the
/// crank pin; the raw orientation is what the optimizer's fitness sees.
fn solve_window(
    resolved: &Resolved,
    design: &BeamDesign,
    mounted: bool,
) -> Result<(ForceDeflectionCurve, TorqueCurve), CliError> {
    let model = build_model(design, resolved.n_elements).map_err(domain)?;
    let natural = model.natural_chord();
    if (natural - resolved.relaxed_chord).abs() > 1e-9 * resolved.relaxed_chord {
        return Err(CliError::Domain(format!(
            "the design relaxes at a {:.4} mm chord but the pins sit {:.4} mm apart",
            natural / MM,
            resolved.relaxed_chord / MM
        )));
    }
    let chords: Vec<f64> = resolved
        .schedule
        .angles()
        .map(|t| resolved.geometry.elastic_length(t))
        .collect();
    let curve = solve_force_deflection_covering(&model, &chords, resolved.prelude_steps)
        .map_err(|e| domain(format!("the beam solver failed over the window: {e}")))?;
    let oriented = if mounted { curve.mirrored() } else { curve.clone() };
    let torque = synthesis::nsm_torque_curve(&oriented, &resolved.geometry, &resolved.schedule)
        .map_err(domain)?;
    Ok((curve, torque))
}

fn load_design(resolved: &Resolved) -> Result<BeamDesign, CliError> {
    let path = resolved.out_dir.join("best_design.toml");
    if !path.exists() {
        return Err(CliError::Usage(format!(
            "no design file at {}; run `actm optimize` first",
            path.display()
        )));
    }
    Ok(DesignFile::load(&path)?.to_design(resolved.design_box)?)
}

pub fn cmd_synthesize(resolved: &Resolved, targets_mnm: &[f64]) -> Result<(), CliError> {
    for &t in targets_mnm {
        if !t.is_finite() || t < 0.0 {
            return Err(CliError::Usage(format!(
                "target {t} mNm: targets must be finite and nonnegative"
            )));
        }
    }
    if targets_mnm.is_empty() {
        return Err(CliError::Usage("at least one torque target is required".into()));
    }

    let design = load_design(resolved)?;
    let (_, mounted) = solve_window(resolved, &design, true)?;
    let (slope, _, _) = mounted.line_fit();
    if !(slope > 0.0) {
        return Err(CliError::Domain(format!(
            "as mounted the element does not counteract the spring: fitted torque slope {:.4} mNm/deg",
            slope / MNM * DEG
        )));
    }

    let k = resolved.spring.stiffness();
    let scale = k / slope;
    let scaled = synthesis::scale_section(&design, scale).map_err(domain)?;
    let (solved, nsm) = solve_window(resolved, &scaled, true)?;
    let stress = synthesis::stress_check(&solved, &scaled.material());

    let mut report = String::new();
    let _ = writeln!(report, "fitted slope before scaling: {:.6} mNm/deg", slope / MNM * DEG);
    let _ = writeln!(report, "width scale applied: {scale:.6}");
    let _ = writeln!(
        report,
        "element section: {:.4} x {:.4} mm",
        scaled.section().in_plane_thickness() / MM,
        scaled.section().out_of_plane_width() / MM
    );
    let _ = writeln!(
        report,
        "peak stress: {:.2} MPa (yield {:.2} MPa): {}",
        stress.peak / MPA,
        scaled.material().yield_strength() / MPA,
        if stress.pass { "pass" } else { "FAIL" }
    );
    let _ = writeln!(
        report,
        "{:>10} {:>12} {:>10} {:>10} {:>10}  response",
        "target_mNm", "preload_deg", "mean_mNm", "std_mNm", "cv"
    );

    let mut infeasible = 0usize;
    for &t in targets_mnm {
        match synthesis::preload_for_target(k, &nsm, t * MNM) {
            Ok(preload) => {
                let spring = resolved.spring.with_preload(preload).map_err(domain)?;
                let net = synthesis::net_torque_curve(&nsm, &spring);
                let response = match synthesis::handle_map(preload, &resolved.synthesis, &nsm)
                    .map_err(domain)?
                {
                    synthesis::HandleResponse::Grasp(_) => "grasp",
                    synthesis::HandleResponse::JawOpens => "jaw_opens",
                };
                let mut csv = Vec::new();
                net.write_csv(&mut csv).map_err(domain)?;
                let path = resolved.out_dir.join(format!("curve_{t}mNm.csv"));
                write_output(&path, &csv)?;
                let _ = writeln!(
                    report,
                    "{:>10} {:>12.4} {:>10.4} {:>10.4} {:>10.4}  {}",
                    t,
                    preload / DEG,
                    net.mean() / MNM,
                    net.std() / MNM,
                    net.coefficient_of_variation(),
                    response
                );
            }
            Err(SynthesisError::Infeasible { required }) => {
                infeasible += 1;
                let _ = writeln!(
                    report,
                    "{:>10} {:>12.4} {:>10} {:>10} {:>10}  infeasible",
                    t,
                    required / DEG,
                    "-",
                    "-",
                    "-"
                );
            }
            Err(e) => return Err(domain(e)),
        }
    }

    print!("{report}");
    let path = resolved.out_dir.join("report.txt");
    write_output(&path, report.as_bytes())?;
    println!("wrote {}", path.display());

    if infeasible > 0 {
        Err(CliError::Domain(format!(
            "{infeasible} of {} targets need a negative pre-load",
            targets_mnm.len()
        )))
    } else {
        Ok(())
    }
}

const SWEEP_PARAMETERS: [&str; 4] = ["w_mm", "r_mm", "k_mnm_per_deg", "width_mm"];

pub fn cmd_sweep(
    project: &ProjectConfig,
    parameter: &str,
    values: &[f64],
    target_mnm: f64,
) -> Result<(), CliError> {
    if !SWEEP_PARAMETERS.contains(&parameter) {
        return Err(CliError::Usage(format!(
            "unknown sweep parameter {parameter}; expected one of {}",
            SWEEP_PARAMETERS.join(", ")
        )));
    }
    if values.is_empty() {
        return Err(CliError::Usage("the sweep needs at least one value".into()));
    }
    if !target_mnm.is_finite() || target_mnm < 0.0 {
        return Err(CliError::Usage(
            "the sweep target must be finite and nonnegative".into(),
        ));
    }

    let base = project.resolve()?;
    let design = load_design(&base)?;

    let mut csv = String::from(
        "value,nsm_mean_mNm,nsm_slope_mNm_per_deg,preload_deg,preload_clamped,net_mean_mNm,net_cv,peak_stress_MPa,stress_pass\n",
    );
    for &value in values {
        let mut sample = project.clone();
        let mut width_scale = 1.0;
        match parameter {
            "w_mm" => sample.geometry.w_mm = value,
            "r_mm" => sample.geometry.r_mm = value,
            "k_mnm_per_deg" => sample.spring.k_mnm_per_deg = value,
            "width_mm" => {
                // the width applies to the element itself, bypassing the
                // slope-match scaling so the linear force law is visible
                width_scale = value * MM / design.section().out_of_plane_width();
            }
            _ => unreachable!("parameter is validated above"),
        }
        let resolved = sample.resolve().map_err(|e| {
            CliError::Usage(format!("{parameter} = {value} makes the config invalid: {e}"))
        })?;
        let variant = if parameter == "width_mm" {
            synthesis::scale_section(&design, width_scale).map_err(domain)?
        } else {
            design.clone()
        };

        let (solved, nsm) = solve_window(&resolved, &variant, true)?;
        let (nsm_slope, _, _) = nsm.line_fit();
        let stress = synthesis::stress_check(&solved, &variant.material());
        let k = resolved.spring.stiffness();
        let (preload, clamped) = match synthesis::preload_for_target(k, &nsm, target_mnm * MNM) {
            Ok(p) => (p, false),
            Err(SynthesisError::Infeasible { .. }) => (0.0, true),
            Err(e) => return Err(domain(e)),
        };
        let spring = resolved.spring.with_preload(preload).map_err(domain)?;
        let net = synthesis::net_torque_curve(&nsm, &spring);
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            value,
            nsm.mean() / MNM,
            nsm_slope / MNM * DEG,
            preload / DEG,
            clamped,
            net.mean() / MNM,
            net.coefficient_of_variation(),
            stress.peak / MPA,
            stress.pass
        );
    }

    let path = base.out_dir.join(format!("sweep_{parameter}.csv"));
    write_output(&path, csv.as_bytes())?;
    println!("wrote {} ({} rows)", path.display(), values.len());
    Ok(())
}
