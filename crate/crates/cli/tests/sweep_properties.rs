use proptest::prelude::*;
use qed_binding_cli::parse_sweep;

proptest! {
    #[test]
    fn log_sweeps_are_geometric(la in -8.0f64..0.0, span in 0.0f64..4.0, n in 2usize..64) {
        let (a, b) = (10f64.powf(la), 10f64.powf(la + span));
        let v = parse_sweep(&format!("{a:e}..{b:e} log {n}")).unwrap();
        prop_assert_eq!(v.len(), n);
        prop_assert_eq!(v[0], a);
        prop_assert_eq!(v[n - 1], b);
        prop_assert!(v.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn lin_sweeps_are_evenly_spaced(a in -5.0f64..5.0, width in 0.1f64..10.0, n in 2usize..64) {
        let b = a + width;
        let v = parse_sweep(&format!("{a:e}..{b:e} lin {n}")).unwrap();
        let step = width / (n - 1) as f64;
        prop_assert!(v.windows(2).all(|w| ((w[1] - w[0]) - step).abs() < 1e-9 * width));
    }
}
