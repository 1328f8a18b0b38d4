use atd3_eval::{
    average_curves, kinematic_similarity, parse_reference_csv, reference_gait, resample_curve, similarity_pipeline,
    synthetic_trace, GaitCurveSet, CURVE_LEN,
};
use atd3_gait::ContactTrace;
use proptest::prelude::*;

#[test]
fn bundled_reference_is_periodic() {
    let r = reference_gait().unwrap();
    for c in &r.curves {
        assert_eq!(c.len(), CURVE_LEN);
        assert_eq!(c[0], c[CURVE_LEN - 1]);
    }
    // left leg lags the right by half a cycle
    assert_eq!(r.curves[3][0], r.curves[0][50]);
}

#[test]
fn reference_scores_one_against_itself() {
    let r = reference_gait().unwrap().normalized();
    let s = kinematic_similarity(&r, &r);
    assert!((s.mean - 1.0).abs() < 1e-12);
}

#[test]
fn synthetic_walk_scores_one() {
    let r = reference_gait().unwrap();
    let trace = synthetic_trace(&r, 4);
    let report = similarity_pipeline(&[trace.clone(), trace], &r, 25).unwrap();
    assert_eq!(report.gaits, 8);
    assert!((report.score.mean - 1.0).abs() <= 1e-9, "{}", report.score.mean);
    for s in report.score.per_joint {
        assert!((s - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn reversed_motion_scores_negative() {
    let r = reference_gait().unwrap();
    let n = r.normalized();
    let neg = GaitCurveSet {
        curves: std::array::from_fn(|j| n.curves[j].iter().map(|v| -v).collect()),
    };
    assert!((kinematic_similarity(&neg, &n).mean + 1.0).abs() < 1e-12);
}

#[test]
fn trace_without_gaits_is_an_error() {
    let mut t = ContactTrace::default();
    for _ in 0..50 {
        t.push(true, true, [0.0; 6]);
    }
    assert!(similarity_pipeline(&[t], &reference_gait().unwrap(), 25).is_err());
}

#[test]
fn malformed_reference_is_rejected() {
    assert!(parse_reference_csv("phase,hip_deg,knee_deg,ankle_deg\n0,1,2,3\n").is_err());
    assert!(parse_reference_csv("phase,hip_deg,knee_deg,ankle_deg\n0,1,x,3\n").is_err());
}

#[test]
fn averaging_identical_sets_is_identity() {
    let r = reference_gait().unwrap();
    let avg = average_curves(&[r.clone(), r.clone(), r.clone()]).unwrap();
    for (a, b) in avg.curves.iter().zip(&r.curves) {
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-12);
        }
    }
    assert!(average_curves(&[]).is_err());
}

#[test]
fn short_curve_is_rejected() {
    assert!(resample_curve(&[1.0], 10).is_err());
}

proptest! {
    #[test]
    fn resampling_to_own_length_is_identity(v in prop::collection::vec(-100.0f64..100.0, 2..200)) {
        let out = resample_curve(&v, v.len()).unwrap();
        for (a, b) in out.iter().zip(&v) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn resampling_keeps_endpoints_and_bounds(
        v in prop::collection::vec(-100.0f64..100.0, 2..200),
        n in 2usize..300,
    ) {
        let out = resample_curve(&v, n).unwrap();
        prop_assert_eq!(out.len(), n);
        prop_assert_eq!(out[0], v[0]);
        prop_assert_eq!(out[n - 1], v[v.len() - 1]);
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(out.iter().all(|&x| x >= lo - 1e-9 && x <= hi + 1e-9));
    }

    #[test]
    fn similarity_is_scale_invariant(k in 0.01f64..100.0) {
        let r = reference_gait().unwrap().normalized();
        let scaled = GaitCurveSet {
            curves: std::array::from_fn(|j| r.curves[j].iter().map(|v| v * k).collect()),
        };
        let s = kinematic_similarity(&scaled, &r);
        prop_assert!((s.mean - 1.0).abs() < 1e-9);
        prop_assert!(s.per_joint.iter().all(|p| (-1.0 - 1e-12..=1.0 + 1e-12).contains(p)));
    }

    #[test]
    fn normalized_curves_start_at_zero(shift in -30.0f64..30.0) {
        let r = reference_gait().unwrap();
        let moved = GaitCurveSet {
            curves: std::array::from_fn(|j| r.curves[j].iter().map(|v| v + shift).collect()),
        };
        let n = moved.normalized();
        prop_assert!(n.curves.iter().all(|c| c[0] == 0.0));
        // a constant offset in degrees disappears after normalization
        let base = r.normalized();
        for (a, b) in n.curves.iter().zip(&base.curves) {
            for (x, y) in a.iter().zip(b) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }
}
