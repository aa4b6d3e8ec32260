//! Symmetric tridiagonal eigenvalue tools: Sturm-sequence counts, bisection
//! for the lowest eigenvalue and inverse iteration for its eigenvector.

/// Symmetric tridiagonal matrix with diagonal `diag` and off-diagonal `off`
/// (`off.len() == diag.len() - 1`).
#[derive(Debug, Clone)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len(), "off-diagonal length mismatch");
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Number of eigenvalues strictly below `x`, with `extra_last` added to
    /// the final diagonal entry.
    pub fn count_below_with(&self, x: f64, extra_last: f64) -> usize {
        let n = self.diag.len();
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..n {
            let mut a = self.diag[i] - x;
            if i == n - 1 {
                a += extra_last;
            }
            d = if i == 0 { a } else { a - self.off[i - 1] * self.off[i - 1] / d };
            if d == 0.0 {
                d = -f64::EPSILON * (self.diag[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    pub fn count_below(&self, x: f64) -> usize {
        self.count_below_with(x, 0.0)
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Lowest eigenvalue bracketed by bisection; returns `(lo, hi)` with
    /// `count_below(lo) == 0` and `count_below(hi) >= 1`.
    pub fn lowest_bracket(&self) -> (f64, f64) {
        let (mut lo, mut hi) = self.gershgorin();
        let pad = f64::EPSILON * (lo.abs() + hi.abs()) + f64::MIN_POSITIVE;
        lo -= pad;
        hi += pad;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) >= 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (lo, hi)
    }

    /// Solve `(A - shift·I + extra_last·e_n e_nᵀ) x = rhs` by the Thomas
    /// algorithm. Intended for shifts below the spectrum (SPD system).
    pub fn solve_shifted(&self, shift: f64, extra_last: f64, rhs: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let diag = |i: usize| {
            let mut a = self.diag[i] - shift;
            if i == n - 1 {
                a += extra_last;
            }
            a
        };
        let mut denom = diag(0);
        c[0] = if n > 1 { self.off[0] / denom } else { 0.0 };
        d[0] = rhs[0] / denom;
        for i in 1..n {
            denom = diag(i) - self.off[i - 1] * c[i - 1];
            if denom == 0.0 {
                denom = f64::EPSILON;
            }
            if i + 1 < n {
                c[i] = self.off[i] / denom;
            }
            d[i] = (rhs[i] - self.off[i - 1] * d[i - 1]) / denom;
        }
        let mut x = vec![0.0; n];
        x[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = d[i] - c[i] * x[i + 1];
        }
        x
    }

    /// Eigenvector for an eigenvalue bracketed from below by `shift`, by
    /// inverse iteration. Returned with unit Euclidean norm.
    pub fn inverse_iteration(&self, shift: f64, extra_last: f64, iterations: usize) -> Vec<f64> {
        let n = self.diag.len();
        let mut v = vec![1.0 / (n as f64).sqrt(); n];
        for _ in 0..iterations {
            let mut w = self.solve_shifted(shift, extra_last, &v);
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !(norm.is_finite() && norm > 0.0) {
                break;
            }
            w.iter_mut().for_each(|x| *x /= norm);
            v = w;
        }
        v
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * x[i + 1];
                }
                s
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> SymTridiag {
        SymTridiag::new(vec![2.0; n], vec![-1.0; n - 1])
    }

    #[test]
    fn lowest_eigenvalue_of_discrete_laplacian() {
        let n = 50;
        let t = laplacian(n);
        let (lo, hi) = t.lowest_bracket();
        let exact = 2.0 - 2.0 * (std::f64::consts::PI / (n as f64 + 1.0)).cos();
        assert!(lo <= exact + 1e-14 && exact <= hi + 1e-14);
        assert!((hi - lo) < 1e-14);
    }

    #[test]
    fn sturm_count_matches_spectrum() {
        let n = 30;
        let t = laplacian(n);
        for k in 1..=n {
            let ev = 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos();
            assert_eq!(t.count_below(ev + 1e-9), k);
            assert_eq!(t.count_below(ev - 1e-9), k - 1);
        }
    }

    #[test]
    fn inverse_iteration_recovers_sine_mode() {
        let n = 40;
        let t = laplacian(n);
        let (lo, _) = t.lowest_bracket();
        let v = t.inverse_iteration(lo - 1e-6, 0.0, 4);
        let s: Vec<f64> = (1..=n).map(|i| (i as f64 * std::f64::consts::PI / (n as f64 + 1.0)).sin()).collect();
        let ns = s.iter().map(|x| x * x).sum::<f64>().sqrt();
        let dot: f64 = v.iter().zip(&s).map(|(a, b)| a * b / ns).sum();
        assert!((dot.abs() - 1.0).abs() < 1e-12);
    }
}
