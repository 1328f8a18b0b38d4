use atd3_eval::{ema_smooth, mean_std};
use proptest::prelude::*;

#[test]
fn two_point_fixture() {
    let s = ema_smooth(&[0.0, 1.0], 0.8).unwrap();
    assert_eq!(s[0], 0.0);
    // the weight complement is evaluated in binary floating point
    assert_eq!(s[1], 1.0 - 0.8);
    assert!((s[1] - 0.2).abs() < 1e-15);
}

#[test]
fn mean_std_values() {
    assert_eq!(mean_std(&[1.0, 3.0]), (2.0, 1.0));
    assert!(mean_std(&[]).0.is_nan());
}

proptest! {
    #[test]
    fn ema_stays_within_running_bounds(v in prop::collection::vec(-1e3f64..1e3, 1..100), w in 0.0f64..1.0) {
        let s = ema_smooth(&v, w).unwrap();
        prop_assert_eq!(s.len(), v.len());
        prop_assert_eq!(s[0], v[0]);
        let mut lo = v[0];
        let mut hi = v[0];
        for (x, y) in v.iter().zip(&s) {
            lo = lo.min(*x);
            hi = hi.max(*x);
            prop_assert!(*y >= lo - 1e-9 && *y <= hi + 1e-9);
        }
    }
}
