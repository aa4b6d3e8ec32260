//! Globally adaptive Gauss–Kronrod quadrature (7/15 point pair).
//!
//! The integrator keeps a list of subintervals and repeatedly bisects the one
//! with the largest local error estimate, in the style of QUADPACK's `qag`.
//! Nested integrals are built by calling [`Integrator::try_integrate`] from
//! inside the integrand; inner failures propagate through the `Result`.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// Result of a quadrature with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut err = err.abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * res_abs;
        if min_err > err {
            err = min_err;
        }
    }
    err
}

fn gk15<F>(f: &mut F, a: f64, b: f64) -> Result<Segment>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center)?;
    let mut res_k = f_center * WGK[7];
    let mut res_g = f_center * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let error = rescale_error((res_k - res_g) * half, res_abs * half.abs(), res_asc * half.abs());
    if !value.is_finite() {
        return Err(Error::Quadrature { achieved: f64::INFINITY, requested: 0.0 });
    }
    Ok(Segment { a, b, value, error })
}

/// Tolerance settings for adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integrator {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_segments: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-14, max_segments: 2000 }
    }
}

impl Integrator {
    pub fn new(rel_tol: f64, abs_tol: f64) -> Self {
        Self { rel_tol, abs_tol, ..Self::default() }
    }

    /// Integrate an infallible integrand over `[a, b]`.
    pub fn integrate<F>(&self, mut f: F, a: f64, b: f64) -> Result<QuadResult>
    where
        F: FnMut(f64) -> f64,
    {
        self.try_integrate(|x| Ok(f(x)), &[a, b])
    }

    /// Integrate over `[points[0], points[last]]`, starting from the given
    /// breakpoints (known kinks, discontinuities or near-singular scales).
    pub fn try_integrate<F>(&self, mut f: F, points: &[f64]) -> Result<QuadResult>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        if points.len() < 2 {
            return Err(Error::Validation("quadrature needs at least two points".into()));
        }
        let mut segs = Vec::with_capacity(64);
        for w in points.windows(2) {
            if w[1] > w[0] {
                segs.push(gk15(&mut f, w[0], w[1])?);
            }
        }
        let mut evals = 15 * segs.len();
        loop {
            let total: f64 = segs.iter().map(|s| s.value).sum();
            let err: f64 = segs.iter().map(|s| s.error).sum();
            let tol = self.abs_tol.max(self.rel_tol * total.abs());
            if err <= tol {
                return Ok(QuadResult { value: total, error: err, evals });
            }
            if segs.len() >= self.max_segments {
                return Err(Error::Quadrature { achieved: err, requested: tol });
            }
            let (idx, worst) = segs
                .iter()
                .enumerate()
                .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
                .map(|(i, s)| (i, *s))
                .expect("non-empty segment list");
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a || mid >= worst.b {
                // interval exhausted at machine precision
                return Err(Error::Quadrature { achieved: err, requested: tol });
            }
            let left = gk15(&mut f, worst.a, mid)?;
            let right = gk15(&mut f, mid, worst.b)?;
            evals += 30;
            segs[idx] = left;
            segs.push(right);
        }
    }

    /// Integrate over `[a, ∞)` with the map `r = a + t/(1-t)`.
    pub fn try_integrate_to_infinity<F>(&self, mut f: F, a: f64, breaks: &[f64]) -> Result<QuadResult>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let mut pts = vec![0.0];
        for &r in breaks {
            if r > a {
                let x = r - a;
                pts.push(x / (1.0 + x));
            }
        }
        pts.push(1.0);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        self.try_integrate(
            |t| {
                let one_minus = 1.0 - t;
                if one_minus <= 0.0 {
                    return Ok(0.0);
                }
                let r = a + t / one_minus;
                Ok(f(r)? / (one_minus * one_minus))
            },
            &pts,
        )
    }
}

/// Four-point Gauss–Legendre average of `f` over `[a, b]`.
pub fn gauss4_mean<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    const X: [f64; 2] = [0.339_981_043_584_856_3, 0.861_136_311_594_052_6];
    const W: [f64; 2] = [0.652_145_154_862_546_1, 0.347_854_845_137_453_9];
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    for k in 0..2 {
        s += W[k] * (f(c - h * X[k]) + f(c + h * X[k]));
    }
    0.5 * s
}

/// Exponential integral `E₁(x) = ∫ₓ^∞ e^{-t}/t dt` for `x > 0`.
pub fn expint_e1(x: f64) -> f64 {
    const EULER: f64 = 0.577_215_664_901_532_9;
    if x <= 0.0 {
        return f64::INFINITY;
    }
    if x <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            term *= -x / k as f64;
            let add = term / k as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        -EULER - x.ln() - sum
    } else {
        // modified Lentz evaluation of the continued fraction
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}
