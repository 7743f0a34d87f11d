use axode_core::invariants::{extract_invariants, PipelineOptions};
use axode_core::pose_io::{Pose, Quaternion};
use axode_core::screw::{finite_screw, ScrewLine, TimedScrew};
use axode_core::striction::{build_striction_polyline, fit_and_resample};
use axode_core::synth::gen_helix_trajectory;
use nalgebra::{Isometry3, Point3, Vector3};
use proptest::prelude::*;

fn vec3(r: f64) -> impl Strategy<Value = Vector3<f64>> {
    (-r..r, -r..r, -r..r).prop_map(|(x, y, z)| Vector3::new(x, y, z))
}

fn direction() -> impl Strategy<Value = Vector3<f64>> {
    vec3(1.0).prop_filter("degenerate direction", |v| v.norm() > 0.1).prop_map(|v| v.normalize())
}

fn rigid() -> impl Strategy<Value = Isometry3<f64>> {
    (vec3(3.0), direction(), 0.0..3.1f64).prop_map(|(t, axis, angle)| Isometry3::new(t, axis * angle))
}

fn pose() -> impl Strategy<Value = Pose> {
    (vec3(1.0), direction(), 0.05..3.0f64).prop_map(|(p, axis, angle)| Pose::new(p, Quaternion::from_axis_angle(&axis, angle), 0))
}

fn apply(iso: &Isometry3<f64>, p: &Vector3<f64>) -> Vector3<f64> {
    (iso * Point3::from(*p)).coords
}

fn max_abs_diff(a: &[f64], b: &[f64], scale: f64) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x * scale - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn finite_screw_follows_a_change_of_frame(a in pose(), b in pose(), iso in rigid()) {
        let s = finite_screw(&a, &b);
        let t = finite_screw(&a.transformed(&iso), &b.transformed(&iso));
        prop_assert_eq!(s.kind, t.kind);
        prop_assert!((iso.rotation * s.direction - t.direction).norm() < 1e-9);
        prop_assert!(t.distance_to_point(&apply(&iso, &s.point)) < 1e-9);
        prop_assert!((s.angle - t.angle).abs() < 1e-9);
        prop_assert!((s.translation - t.translation).abs() < 1e-9);
    }

    #[test]
    fn striction_curve_follows_a_rigid_map(
        lines in prop::collection::vec((vec3(1.0), direction()), 6..20),
        iso in rigid(),
    ) {
        let screws: Vec<TimedScrew> = lines
            .iter()
            .enumerate()
            .map(|(frame, (p, d))| TimedScrew { frame, line: ScrewLine { angle: 0.3, ..ScrewLine::line(*p, *d) } })
            .collect();
        let moved: Vec<TimedScrew> = screws
            .iter()
            .map(|s| TimedScrew { frame: s.frame, line: s.line.transformed(&iso) })
            .collect();
        let m = 2 * screws.len();
        let a = fit_and_resample(&build_striction_polyline(&screws).unwrap(), m).unwrap();
        let b = fit_and_resample(&build_striction_polyline(&moved).unwrap(), m).unwrap();
        prop_assume!(!a.degenerate);
        for (x, y) in a.samples.iter().zip(&b.samples) {
            prop_assert!((apply(&iso, x) - y).norm() < 1e-9);
        }
        prop_assert!((a.total_length - b.total_length).abs() < 1e-12 * a.total_length.max(1.0));
        prop_assert!((a.ds - b.ds).abs() < 1e-12 * a.ds.max(1.0));
        prop_assert_eq!(a.time_anchor, b.time_anchor);
    }

    // Helices keep consecutive screw axes well apart in angle, where the
    // invariants are well conditioned.
    #[test]
    fn helix_invariants_survive_rigid_motion(a in 0.3..2.0f64, b in 0.1..1.0f64, iso in rigid()) {
        let h = gen_helix_trajectory(a, b, 150, 0.05).unwrap();
        let base = extract_invariants(&h.trajectory, &PipelineOptions::default()).unwrap().series;
        let moved = extract_invariants(&h.trajectory.transformed(&iso), &PipelineOptions::default()).unwrap().series;
        prop_assert!(max_abs_diff(&base.kappa, &moved.kappa, 1.0) < 1e-6);
        prop_assert!(max_abs_diff(&base.tau, &moved.tau, 1.0) < 1e-6);
    }

    #[test]
    fn helix_invariants_scale_inversely(a in 0.3..2.0f64, b in 0.1..1.0f64, c in prop::sample::select(vec![0.1, 0.5, 2.0, 10.0])) {
        let h = gen_helix_trajectory(a, b, 150, 0.05).unwrap();
        let base = extract_invariants(&h.trajectory, &PipelineOptions::default()).unwrap().series;
        let scaled = extract_invariants(&h.trajectory.scaled(c), &PipelineOptions::default()).unwrap().series;
        prop_assert!(max_abs_diff(&base.kappa, &scaled.kappa, 1.0 / c) < 1e-6);
        prop_assert!(max_abs_diff(&base.tau, &scaled.tau, 1.0 / c) < 1e-6);
    }
}
