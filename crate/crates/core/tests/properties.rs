use std::sync::OnceLock;

use proptest::prelude::*;
use qed_binding::certificate::{BindingProblem, Knobs};
use qed_binding::photon::*;
use qed_binding::potential::*;
use qed_binding::schrodinger::*;

fn poly(v0: f64, sigma: f64, s: f64) -> Potential {
    make_potential(Family::PolyWell, &PotentialParams { v0, sigma, s: Some(s), table: None }).unwrap()
}

fn reference() -> &'static BindingProblem {
    static CELL: OnceLock<BindingProblem> = OnceLock::new();
    CELL.get_or_init(|| {
        let p = poly(1.0, 5.0, 4.0);
        BindingProblem::new(&p, RadialGrid::for_potential(&p, 2000).unwrap(), Knobs::default()).unwrap()
    })
}

fn threshold(p: &Potential, n: usize) -> f64 {
    RadialProblem::new(p, RadialGrid::for_potential(p, n).unwrap()).unwrap().threshold().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn threshold_scales_inversely_with_depth(v0 in 0.5f64..3.0, sigma in 0.8f64..3.0, s in 2.0f64..5.0, c in 0.5f64..4.0) {
        let p = poly(v0, sigma, s);
        let base = threshold(&p, 1000);
        let amp = threshold(&p.amplified(c), 1000);
        prop_assert!(((amp - base / c) / (base / c)).abs() < 1e-10);
    }

    #[test]
    fn threshold_scales_with_range_squared(sigma in 0.8f64..3.0, s0 in 0.5f64..3.0) {
        let p = poly(1.0, sigma, 3.0);
        let base = threshold(&p, 1000);
        let wide = threshold(&p.rescaled(s0), 1000);
        prop_assert!(((wide * s0 * s0 - base) / base).abs() < 1e-10);
    }

    #[test]
    fn energy_decreases_with_coupling(f1 in 1.001f64..3.0, df in 0.001f64..1.0) {
        let p = poly(1.0, 1.5, 3.0);
        let prob = RadialProblem::new(&p, RadialGrid::for_potential(&p, 1000).unwrap()).unwrap();
        let l0 = prob.threshold().unwrap();
        let e1 = prob.energy(f1 * l0, 1.0).unwrap();
        let e2 = prob.energy((f1 + df) * l0, 1.0).unwrap();
        prop_assert!(e2 < e1 && e1 < 0.0);
    }

    #[test]
    fn kinetic_factor_rescales_energy(f in 1.05f64..3.0, k in 0.5f64..1.0) {
        let p = poly(1.0, 1.5, 3.0);
        let prob = RadialProblem::new(&p, RadialGrid::for_potential(&p, 1000).unwrap()).unwrap();
        let beta = f * prob.threshold().unwrap() * k;
        let lhs = prob.energy(beta, k).unwrap();
        let rhs = k * prob.energy(beta / k, 1.0).unwrap();
        prop_assert!(((lhs - rhs) / rhs).abs() < 1e-9, "{lhs} vs {rhs}");
    }

    #[test]
    fn enhancement_stays_below_alpha_and_grows(la in -6.0f64..-1.0, step in 0.01f64..0.5) {
        let bp = reference();
        let (a1, a2) = (10f64.powf(la), 10f64.powf(la + step));
        let g1 = bp.solve_g(a1, bp.lambda0()).unwrap();
        let g2 = bp.solve_g(a2, bp.lambda0()).unwrap();
        prop_assert!(g1.g > 0.0 && g1.g <= a1 && g2.g <= a2);
        prop_assert!(g2.g > g1.g);
        prop_assert!(g1.momentum_coefficient_relative <= 1e-10);
    }

    #[test]
    fn margin_is_monotone_in_the_budget(la in -5.0f64..-2.5, c_self in 0.0f64..4.0, extra in 0.1f64..4.0) {
        let bp = reference();
        let alpha = 10f64.powf(la);
        let lo = bp.with_knobs(Knobs { c_self, ..Knobs::default() }).unwrap().margin(alpha, bp.lambda0()).unwrap();
        let hi = bp
            .with_knobs(Knobs { c_self: c_self + extra, ..Knobs::default() })
            .unwrap()
            .margin(alpha, bp.lambda0())
            .unwrap();
        prop_assert!(hi.margin < lo.margin);
        prop_assert!((lo.margin - hi.margin - extra * alpha.powi(3)).abs() <= 1e-12 * lo.terms.binding.abs().max(alpha.powi(3)));
    }

    #[test]
    fn one_photon_integrals_decrease_with_gap(g in 0.0f64..0.5, mu in 0.0f64..2.0, dmu in 0.01f64..1.0, n in 1u32..3) {
        let kin = OneDenominator::Kinetic { g };
        let a = one_photon_integral(&OnePhotonKernel::new(kin, mu + 1e-3, 0.0, n)).unwrap().value;
        let b = one_photon_integral(&OnePhotonKernel::new(kin, mu + 1e-3 + dmu, 0.0, n)).unwrap().value;
        prop_assert!(b < a && b > 0.0);
    }

    #[test]
    fn shifted_closed_form_is_decreasing(la in -12.0f64..1.0, d in 0.01f64..1.0) {
        let (a, b) = (10f64.powf(la), 10f64.powf(la + d));
        prop_assert!(shifted_field_closed_form(b) < shifted_field_closed_form(a));
        prop_assert!(shifted_field_closed_form(b) > 0.0);
    }

    #[test]
    fn polarizations_are_orthonormal_and_transverse(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0) {
        let norm = (x * x + y * y + z * z).sqrt();
        prop_assume!(norm > 1e-3);
        let k = [x, y, z];
        let e = polarization_vectors(k);
        let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        prop_assert!((dot(e[0], e[0]) - 1.0).abs() < 1e-12 && (dot(e[1], e[1]) - 1.0).abs() < 1e-12);
        prop_assert!(dot(e[0], e[1]).abs() < 1e-12);
        prop_assert!(dot(e[0], k).abs() < 1e-12 * norm && dot(e[1], k).abs() < 1e-12 * norm);
    }
}
