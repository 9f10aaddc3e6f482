use super::*;
use crate::beam_fem::{
    BeamDesign, CrossSection, DesignBox, ForceDeflectionCurve, ForceDeflectionSample, Material,
};
use crate::geometry::{AngleSchedule, CrankGeometry};

const W: f64 = 0.012;
const R: f64 = 0.008;

/// 0.3 mN*m per degree, the reference spring, in SI.
fn k_si() -> f64 {
    0.3e-3 * 180.0 / std::f64::consts::PI
}

fn geometry() -> CrankGeometry {
    CrankGeometry::new(W, R).unwrap()
}

fn spring(preload: f64) -> PositiveSpring {
    PositiveSpring::new(k_si(), preload).unwrap()
}

fn window_45_135() -> (f64, f64) {
    (45f64.to_radians(), 135f64.to_radians())
}

fn schedule_45_135() -> AngleSchedule {
    AngleSchedule::new(45f64.to_radians(), 135f64.to_radians(), 7).unwrap()
}

/// A torque curve lying exactly on torque = slope * theta + intercept over
/// the reference window.
fn linear_nsm(slope: f64, intercept: f64) -> TorqueCurve {
    let samples = schedule_45_135()
        .angles()
        .map(|theta| (theta, slope * theta + intercept))
        .collect();
    TorqueCurve::new(samples, window_45_135()).unwrap()
}

fn assert_close(actual: f64, expected: f64, rel: f64) {
    let scale = expected.abs().max(1e-30);
    assert!(
        (actual - expected).abs() <= rel * scale,
        "expected {expected}, got {actual} (rel {})",
        (actual - expected).abs() / scale
    );
}

#[test]
fn spring_torque_matches_worked_value() {
    // 0.3 mN*m/deg at 45 deg with no preload pulls at -13.5 mN*m
    let t = spring_torque(&spring(0.0), 45f64.to_radians());
    assert_close(t, -13.5e-3, 1e-12);

    // preload shifts linearly: 10 deg more costs 3 mN*m more
    let t2 = spring_torque(&spring(10f64.to_radians()), 45f64.to_radians());
    assert_close(t2 - t, -3.0e-3, 1e-12);
}

#[test]
fn spring_rejects_bad_parameters() {
    assert!(PositiveSpring::new(0.0, 0.0).is_err());
    assert!(PositiveSpring::new(-1.0, 0.0).is_err());
    assert!(PositiveSpring::new(f64::NAN, 0.0).is_err());
    assert!(PositiveSpring::new(1.0, -0.01).is_err());
    assert!(PositiveSpring::new(1.0, f64::INFINITY).is_err());
    assert!(PositiveSpring::new(1.0, 0.0).is_ok());
}

#[test]
fn config_validates_window_and_chord() {
    let g = geometry();
    let s = spring(0.0);
    let t1 = 45f64.to_radians();
    let t2 = 90f64.to_radians();

    assert!(SynthesisConfig::new(g, s, t1, t2, 0.020).is_ok());
    assert!(SynthesisConfig::new(g, s, -0.1, t2, 0.020).is_err());
    assert!(SynthesisConfig::new(g, s, t1, 0.0, 0.020).is_err());
    assert!(SynthesisConfig::new(g, s, 2.0, 1.5, 0.020).is_err());
    // reachable chords are [w - R, w + R] = [4, 20] mm
    assert!(SynthesisConfig::new(g, s, t1, t2, 0.0039).is_err());
    assert!(SynthesisConfig::new(g, s, t1, t2, 0.0201).is_err());
    assert!(SynthesisConfig::new(g, s, t1, t2, 0.004).is_ok());
}

#[test]
fn relax_angles_follow_the_relaxed_chord() {
    let g = geometry();
    let s = spring(0.0);
    let t1 = 45f64.to_radians();
    let t2 = 90f64.to_radians();

    // fully extended: relaxed at theta = 0 only
    let c = SynthesisConfig::new(g, s, t1, t2, W + R).unwrap();
    let (a, b) = c.relax_angles();
    assert_close(a, 0.0, 1e-12);
    assert_close(b, 2.0 * std::f64::consts::PI, 1e-12);

    // relaxed chord chosen as the 45 deg pin distance puts a relax point there
    let chord_45 = (W * W + R * R + 2.0 * W * R * t1.cos()).sqrt();
    let c = SynthesisConfig::new(g, s, t1, t2, chord_45).unwrap();
    let (a, b) = c.relax_angles();
    assert_close(a, t1, 1e-12);
    assert_close(b, 2.0 * std::f64::consts::PI - t1, 1e-12);
}

#[test]
fn window_schedule_spans_the_window() {
    let c = SynthesisConfig::new(geometry(), spring(0.0), 0.5, 1.0, 0.020).unwrap();
    let sched = c.window_schedule(5).unwrap();
    let angles: Vec<f64> = sched.angles().collect();
    assert_eq!(angles.len(), 5);
    assert_close(angles[0], 0.5, 1e-12);
    assert_close(angles[4], 1.5, 1e-12);
    assert_close(angles[2], 1.0, 1e-12);
}

#[test]
fn torque_curve_sorts_and_reports_window_stats() {
    let curve = TorqueCurve::new(vec![(3.0, 6.0), (1.0, 2.0), (2.0, 4.0)], (0.0, 4.0)).unwrap();
    let thetas: Vec<f64> = curve.samples().iter().map(|s| s.0).collect();
    assert_eq!(thetas, vec![1.0, 2.0, 3.0]);

    assert_close(curve.mean(), 4.0, 1e-15);
    assert_close(curve.std(), (8.0f64 / 3.0).sqrt(), 1e-15);
    assert_close(curve.coefficient_of_variation(), (8.0f64 / 3.0).sqrt() / 4.0, 1e-15);

    // narrowing the window drops the first sample from the statistics
    let narrowed = curve.with_window((1.5, 3.5)).unwrap();
    assert_close(narrowed.mean(), 5.0, 1e-15);
    assert_close(narrowed.std(), 1.0, 1e-15);
}

#[test]
fn torque_curve_rejects_degenerate_input() {
    assert_eq!(
        TorqueCurve::new(vec![(1.0, 2.0)], (5.0, 6.0)),
        Err(SynthesisError::EmptyWindow)
    );
    assert!(TorqueCurve::new(vec![(1.0, f64::NAN)], (0.0, 2.0)).is_err());
    assert!(TorqueCurve::new(vec![(1.0, 2.0)], (2.0, 1.0)).is_err());
}

#[test]
fn line_fit_ignores_samples_outside_the_window() {
    let mut samples: Vec<(f64, f64)> = (0..10).map(|i| {
        let x = 1.0 + 0.1 * i as f64;
        (x, 3.0 * x - 0.5)
    }).collect();
    samples.push((50.0, 1e6));
    let curve = TorqueCurve::new(samples, (0.9, 2.0)).unwrap();
    let (slope, intercept, rms) = curve.line_fit();
    assert_close(slope, 3.0, 1e-9);
    assert_close(intercept, -0.5, 1e-9);
    assert!(rms < 1e-9);
}

#[test]
fn try_add_requires_identical_grids() {
    let a = linear_nsm(1.0, 0.0);
    let b = linear_nsm(2.0, 0.5);
    let sum = a.try_add(&b).unwrap();
    for (s, (x, _)) in sum.samples().iter().zip(a.samples()) {
        assert_close(s.1, 3.0 * x + 0.5, 1e-12);
    }

    let offset = TorqueCurve::new(
        a.samples().iter().map(|&(x, y)| (x + 1e-6, y)).collect(),
        a.window(),
    )
    .unwrap();
    assert_eq!(a.try_add(&offset), Err(SynthesisError::GridMismatch));

    let short = TorqueCurve::new(a.samples()[..5].to_vec(), a.window()).unwrap();
    assert_eq!(a.try_add(&short), Err(SynthesisError::GridMismatch));
}

#[test]
fn csv_uses_degrees_and_millinewton_meters() {
    let curve = TorqueCurve::new(
        vec![(std::f64::consts::FRAC_PI_2, 0.0135)],
        (0.0, 2.0),
    )
    .unwrap();
    let mut buf = Vec::new();
    curve.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("theta_deg,torque_mNm"));
    let row = lines.next().unwrap();
    let (deg, mnm) = row.split_once(',').unwrap();
    assert_close(deg.parse().unwrap(), 90.0, 1e-12);
    assert_close(mnm.parse().unwrap(), 13.5, 1e-12);
}

/// Force curve that is exactly linear in the chord, so two samples pin it
/// down and the whole transmission chain can be checked by hand.
fn linear_force_curve(chord_lo: f64, chord_hi: f64, f: impl Fn(f64) -> f64) -> ForceDeflectionCurve {
    let mk = |chord: f64| ForceDeflectionSample {
        chord,
        axial_force: f(chord),
        max_von_mises: 1.0e6,
        converged: true,
    };
    ForceDeflectionCurve::from_samples(vec![mk(chord_lo), mk(chord_hi)]).unwrap()
}

#[test]
fn nsm_torque_composition_matches_hand_formula() {
    // element force linear in the chord: F(c) = 1000 (0.020 - c) newtons
    let curve = linear_force_curve(0.008, 0.021, |c| 1000.0 * (0.020 - c));
    let nsm = nsm_torque_curve(&curve, &geometry(), &schedule_45_135()).unwrap();
    assert_eq!(nsm.samples().len(), 7);
    assert_eq!(nsm.window(), window_45_135());

    for &(theta, torque) in nsm.samples() {
        // written out from scratch: chord, force, then moment arm
        let chord = (W * W + R * R + 2.0 * W * R * theta.cos()).sqrt();
        let force = 1000.0 * (0.020 - chord);
        let expected = force * W * R * theta.sin() / chord;
        assert_close(torque, expected, 1e-12);
    }
}

#[test]
fn nsm_reports_the_angle_that_left_the_solved_range() {
    // solved only near the top of the sweep; 90 deg already needs a
    // 14.4 mm chord, below the curve's 16 mm floor
    let curve = linear_force_curve(0.016, 0.019, |_| 1.0);
    let err = nsm_torque_curve(&curve, &geometry(), &schedule_45_135()).unwrap_err();
    match err {
        SynthesisError::Range { theta, chord } => {
            assert_close(theta, 90f64.to_radians(), 1e-12);
            assert_close(chord, (W * W + R * R).sqrt(), 1e-12);
        }
        other => panic!("expected Range, got {other:?}"),
    }
}

#[test]
fn net_torque_is_pointwise_superposition() {
    let nsm = linear_nsm(0.02, -0.01);
    let s = spring(0.2);
    let net = net_torque_curve(&nsm, &s);
    assert_eq!(net.window(), nsm.window());
    for (n, &(theta, t)) in net.samples().iter().zip(nsm.samples()) {
        assert_eq!(n.0, theta);
        assert_close(n.1, t + spring_torque(&s, theta), 1e-15);
    }
}

#[test]
fn matched_slopes_cancel_to_rounding() {
    // NSM torque k*theta + c against the same spring rate leaves a flat c;
    // only the one rounding of the addition survives
    let c = 0.04;
    let nsm = linear_nsm(k_si(), c);
    let net = net_torque_curve(&nsm, &spring(0.0));
    for &(_, torque) in net.samples() {
        assert_close(torque, c, 1e-14);
    }
    assert!(net.std() < 1e-15, "std {}", net.std());
    assert!(net.coefficient_of_variation() < 1e-13);
}

#[test]
fn preload_solves_the_target_mean() {
    let k = k_si();
    let nsm = linear_nsm(k, 0.04);

    // mean_nsm = k * 90deg + 0.04, so target 0.03 needs 0.01/k of preload
    let p = preload_for_target(k, &nsm, 0.03).unwrap();
    assert_close(p, 0.01 / k, 1e-12);

    let net = net_torque_curve(&nsm, &spring(p));
    assert_close(net.mean(), 0.03, 1e-12);

    // boundary: the target equal to the zero-preload mean needs none
    let p0 = preload_for_target(k, &nsm, 0.04).unwrap();
    assert!(p0.abs() < 1e-12);

    // beyond it the tendon would have to push
    match preload_for_target(k, &nsm, 0.0401).unwrap_err() {
        SynthesisError::Infeasible { required } => assert!(required < 0.0),
        other => panic!("expected Infeasible, got {other:?}"),
    }
}

#[test]
fn preload_is_linear_and_decreasing_in_the_target() {
    let k = k_si();
    let nsm = linear_nsm(k, 0.04);
    let p10 = preload_for_target(k, &nsm, 0.010).unwrap();
    let p20 = preload_for_target(k, &nsm, 0.020).unwrap();
    let p30 = preload_for_target(k, &nsm, 0.030).unwrap();
    assert!(p10 > p20 && p20 > p30);
    assert_close(p10 - p20, 0.010 / k, 1e-12);
    assert_close(p20 - p30, 0.010 / k, 1e-12);
}

#[test]
fn scale_section_widens_without_touching_shape() {
    let design = BeamDesign::new(
        [(0.005, 0.006), (0.010, 0.004), (0.015, 0.006), (0.020, 0.008), (0.025, 0.006)],
        CrossSection::new(0.002, 0.006).unwrap(),
        Material::new(3.45e9, 0.39, 106.0e6).unwrap(),
        DesignBox::new(0.030, 0.012).unwrap(),
    )
    .unwrap();
    let scaled = scale_section(&design, 3.0).unwrap();
    let s0 = design.section();
    let s1 = scaled.section();
    assert_eq!(s1.in_plane_thickness(), s0.in_plane_thickness());
    assert_close(s1.out_of_plane_width(), 3.0 * s0.out_of_plane_width(), 1e-15);
    assert_close(s1.area(), 3.0 * s0.area(), 1e-15);
    assert_close(s1.second_moment(), 3.0 * s0.second_moment(), 1e-15);
    assert_eq!(scaled.key_points(), design.key_points());
    assert!(scale_section(&design, 0.0).is_err());
}

#[test]
fn stress_check_is_strict_at_yield() {
    let material = Material::new(3.45e9, 0.39, 100.0e6).unwrap();
    let mk = |stress: f64| {
        let sample = |chord: f64| ForceDeflectionSample {
            chord,
            axial_force: 1.0,
            max_von_mises: stress,
            converged: true,
        };
        ForceDeflectionCurve::from_samples(vec![sample(0.019), sample(0.020)]).unwrap()
    };

    let under = stress_check(&mk(99.0e6), &material);
    assert!(under.pass);
    assert_close(under.peak, 99.0e6, 1e-15);
    assert_close(under.margin, 1.0e6, 1e-12);

    let at = stress_check(&mk(100.0e6), &material);
    assert!(!at.pass, "stress equal to yield must fail");
    assert_eq!(at.margin, 0.0);

    assert!(!stress_check(&mk(101.0e6), &material).pass);
}

#[test]
fn handle_map_grasps_then_lets_the_jaw_swing_open() {
    let k = k_si();
    let nsm = linear_nsm(k, 0.04);
    let config = SynthesisConfig::new(
        geometry(),
        spring(0.0),
        45f64.to_radians(),
        90f64.to_radians(),
        0.020,
    )
    .unwrap();

    // the handle angle that should land the mean on 30 mN*m
    let p = preload_for_target(k, &nsm, 0.03).unwrap();
    match handle_map(p / config.handle_ratio, &config, &nsm).unwrap() {
        HandleResponse::Grasp(mean) => assert_close(mean, 0.03, 1e-12),
        HandleResponse::JawOpens => panic!("expected a grasp"),
    }

    // wind the handle far enough and the spring overwhelms the element
    let far = (0.04 / k) + 0.1;
    assert_eq!(handle_map(far, &config, &nsm).unwrap(), HandleResponse::JawOpens);

    assert!(handle_map(-0.1, &config, &nsm).is_err());
}
