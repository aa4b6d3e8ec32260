use nalgebra::{DMatrix, DVector};
use qed_binding::photon::*;

const SAMPLES: u64 = 2_000_000;

fn check(target: OracleTarget, value: f64, seed: u64) {
    let mc = mc_mode_oracle(&target, SAMPLES, seed).unwrap();
    assert!(
        mc.agrees_with(value),
        "{target:?}: quadrature {value}, MC {} ± {} ({:.2}σ)",
        mc.estimate,
        mc.stderr,
        mc.deviation_in_sigmas(value)
    );
}

#[test]
fn one_photon_kernels_match_sampling() {
    let kernels = [
        OnePhotonKernel::new(OneDenominator::FieldEnergy, 0.0, 0.0, 1),
        OnePhotonKernel::new(OneDenominator::FieldEnergy, 0.0, 0.05, 2),
        OnePhotonKernel::new(OneDenominator::Kinetic { g: 0.02 }, 0.4, 0.0, 1),
        OnePhotonKernel::new(OneDenominator::Kinetic { g: 0.02 }, 0.4, 0.0, 2),
    ];
    for (i, k) in kernels.iter().enumerate() {
        check(OracleTarget::OnePhoton(*k), one_photon_integral(k).unwrap().value, 100 + i as u64);
    }
}

#[test]
fn two_photon_kernels_match_sampling() {
    let kernels = [
        TwoPhotonKernel::new(Numerator::Unit, TwoDenominator::Full, 1),
        TwoPhotonKernel::new(Numerator::MomentumSquared, TwoDenominator::Full, 2),
        TwoPhotonKernel::new(Numerator::Unit, TwoDenominator::FieldEnergy, 1),
        TwoPhotonKernel::new(Numerator::Unit, TwoDenominator::FieldEnergy, 2),
    ];
    for (i, k) in kernels.iter().enumerate() {
        check(OracleTarget::TwoPhoton(*k), two_photon_integral(k).unwrap().value, 200 + i as u64);
    }
}

#[test]
fn first_order_field_corrections_match_sampling() {
    // α large enough that the correction dominates the sampling noise
    for (i, k) in [
        TwoPhotonKernel::new(Numerator::Unit, TwoDenominator::Full, 1).with_alpha(2.0),
        TwoPhotonKernel::new(Numerator::MomentumSquared, TwoDenominator::Full, 2).with_alpha(2.0),
    ]
    .iter()
    .enumerate()
    {
        let bare = two_photon_integral(&TwoPhotonKernel { alpha: None, ..*k }).unwrap().value;
        let full = two_photon_integral(k).unwrap().value;
        assert!(full < bare);
        check(OracleTarget::TwoPhoton(*k), full, 300 + i as u64);
    }
}

/// Discrete isotropic mode set: Gauss–Legendre radii, the six axis
/// directions, two transverse polarizations each.
fn discrete_modes(m: usize, g: f64, mu: f64) -> (Vec<f64>, Vec<[f64; 3]>) {
    let (x, w) = gauss_legendre(m);
    let axes: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut diag = Vec::new();
    let mut amp = Vec::new();
    for (xi, wi) in x.iter().zip(&w) {
        let r = 0.5 * (xi + 1.0);
        let dr = 0.5 * wi;
        // w(k)² d³k over one of six direction cells: r²dr·(4π/6)/(4π²r)
        let weight = r * dr / (6.0 * std::f64::consts::PI);
        for axis in 0..3 {
            for _sign in 0..2 {
                for (pol, e) in axes.iter().enumerate() {
                    if pol == axis {
                        continue;
                    }
                    diag.push((1.0 - g) * r * r + r + mu);
                    amp.push(e.map(|c| c * weight.sqrt()));
                }
            }
        }
    }
    (diag, amp)
}

fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    // Golub–Welsch via a symmetric tridiagonal eigenproblem
    let mut j = DMatrix::<f64>::zeros(m, m);
    for i in 1..m {
        let b = i as f64 / ((4 * i * i - 1) as f64).sqrt();
        j[(i, i - 1)] = b;
        j[(i - 1, i)] = b;
    }
    let eig = j.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> =
        (0..m).map(|i| (eig.eigenvalues[i], 2.0 * eig.eigenvectors[(0, i)].powi(2))).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

#[test]
fn woodbury_reduction_matches_dense_solve() {
    let (g, mu, alpha) = (0.05, 0.3, 0.4);
    let (diag, amp) = discrete_modes(24, g, mu);
    let n = diag.len();
    let mut k = DMatrix::<f64>::from_diagonal(&DVector::from_vec(diag.clone()));
    let phis: Vec<DVector<f64>> = (0..3).map(|i| DVector::from_iterator(n, amp.iter().map(|a| a[i]))).collect();
    for phi in &phis {
        k += 2.0 * alpha * phi * phi.transpose();
    }
    let lu = k.lu();
    let mut dense = [0.0; 2];
    let mut bare = [0.0; 2];
    for phi in &phis {
        let x1 = lu.solve(phi).unwrap();
        dense[0] += phi.dot(&x1);
        dense[1] += x1.dot(&x1);
        for (j, d) in diag.iter().enumerate() {
            bare[0] += phi[j] * phi[j] / d;
            bare[1] += phi[j] * phi[j] / (d * d);
        }
    }
    let denom = 1.0 + 2.0 * alpha * bare[0] / 3.0;
    assert!((dense[0] - bare[0] / denom).abs() < 1e-12 * dense[0]);
    assert!((dense[1] - bare[1] / (denom * denom)).abs() < 1e-12 * dense[1]);
    // the discrete set converges to the continuum reduction
    let kern = OnePhotonKernel::new(OneDenominator::Kinetic { g }, mu, 0.0, 2).with_woodbury(alpha);
    let cont = one_photon_integral(&kern).unwrap().value;
    assert!((dense[1] - cont).abs() < 1e-10 * cont, "{} vs {cont}", dense[1]);
}
