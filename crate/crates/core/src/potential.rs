//! Radial attractive potentials, their norms and the constants tied to `V`.
//!
//! Every potential is `V(r) = V₀ · f(r/σ)` for a dimensionless shape `f ≤ 0`,
//! so range and amplitude rescalings act on `σ` and `V₀` alone.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{expint_e1, gauss4_mean, Integrator, QuadResult};

/// A radially symmetric function with an (optional) analytic Laplacian.
pub trait RadialProfile {
    fn value(&self, r: f64) -> f64;

    /// `ΔV = V'' + 2V'/r`, when it exists as a function.
    fn laplacian(&self, r: f64) -> Option<f64>;

    /// Characteristic length used to size scans.
    fn length_scale(&self) -> f64;

    /// Whether `V(r) < 0` for every `r`.
    fn strictly_negative(&self) -> bool;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    PolyWell,
    BumpWell,
    SquareWell,
    Custom,
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "poly_well" | "PolyWell" => Ok(Family::PolyWell),
            "bump_well" | "BumpWell" => Ok(Family::BumpWell),
            "square_well" | "SquareWell" => Ok(Family::SquareWell),
            "custom" | "Custom" => Ok(Family::Custom),
            other => Err(Error::Validation(format!("unknown potential family '{other}'"))),
        }
    }
}

/// Tabulated shape, interpolated by a monotone (Fritsch–Carlson) cubic.
/// Outside the table the shape is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    r: Vec<f64>,
    v: Vec<f64>,
    slope: Vec<f64>,
}

impl Tabulated {
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Validation("custom profile needs at least two points".into()));
        }
        if points[0].0 != 0.0 {
            return Err(Error::Validation("custom profile must start at r = 0".into()));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Validation("custom profile radii must increase strictly".into()));
        }
        if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
            return Err(Error::Validation("custom profile contains non-finite values".into()));
        }
        if points.iter().any(|p| p.1 > 0.0) {
            return Err(Error::Validation("assumption (i) violated: custom profile takes positive values".into()));
        }
        let r: Vec<f64> = points.iter().map(|p| p.0).collect();
        let v: Vec<f64> = points.iter().map(|p| p.1).collect();
        let n = r.len();
        let secant: Vec<f64> = (0..n - 1).map(|i| (v[i + 1] - v[i]) / (r[i + 1] - r[i])).collect();
        let mut slope = vec![0.0; n];
        slope[0] = 0.0; // radial profile: V'(0) = 0
        slope[n - 1] = secant[n - 2];
        for i in 1..n - 1 {
            let (a, b) = (secant[i - 1], secant[i]);
            slope[i] = if a * b <= 0.0 {
                0.0
            } else {
                let (h0, h1) = (r[i] - r[i - 1], r[i + 1] - r[i]);
                let w1 = 2.0 * h1 + h0;
                let w2 = h1 + 2.0 * h0;
                (w1 + w2) / (w1 / a + w2 / b)
            };
        }
        Ok(Self { r, v, slope })
    }

    fn end(&self) -> f64 {
        *self.r.last().unwrap()
    }

    fn locate(&self, x: f64) -> Option<usize> {
        if x < 0.0 || x > self.end() {
            return None;
        }
        let i = self.r.partition_point(|&ri| ri <= x);
        Some(i.clamp(1, self.r.len() - 1) - 1)
    }

    /// Value, first and second derivative of the interpolant.
    fn eval(&self, x: f64) -> (f64, f64, f64) {
        let Some(i) = self.locate(x) else {
            return (0.0, 0.0, 0.0);
        };
        let h = self.r[i + 1] - self.r[i];
        let t = (x - self.r[i]) / h;
        let (y0, y1) = (self.v[i], self.v[i + 1]);
        let (m0, m1) = (self.slope[i] * h, self.slope[i + 1] * h);
        let h00 = 2.0 * t * t * t - 3.0 * t * t + 1.0;
        let h10 = t * t * t - 2.0 * t * t + t;
        let h01 = -2.0 * t * t * t + 3.0 * t * t;
        let h11 = t * t * t - t * t;
        let value = h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1;
        let d1 = ((6.0 * t * t - 6.0 * t) * y0
            + (3.0 * t * t - 4.0 * t + 1.0) * m0
            + (-6.0 * t * t + 6.0 * t) * y1
            + (3.0 * t * t - 2.0 * t) * m1)
            / h;
        let d2 =
            ((12.0 * t - 6.0) * y0 + (6.0 * t - 4.0) * m0 + (-12.0 * t + 6.0) * y1 + (6.0 * t - 2.0) * m1) / (h * h);
        (value, d1, d2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// `f(x) = -(1 + x²)^(-s)`
    PolyWell {
        s: f64,
    },
    /// `f(x) = -exp(-1/(1 - x²))` for `x < 1`, else 0
    BumpWell,
    /// `f(x) = -Θ(1 - x)`
    SquareWell,
    Custom(Tabulated),
}

/// Parameters accepted by [`make_potential`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PotentialParams {
    pub v0: f64,
    pub sigma: f64,
    pub s: Option<f64>,
    pub table: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    shape: Shape,
    v0: f64,
    sigma: f64,
}

/// Build a validated potential of the given family.
pub fn make_potential(family: Family, params: &PotentialParams) -> Result<Potential> {
    if !(params.v0.is_finite() && params.v0 > 0.0) {
        return Err(Error::Validation(format!(
            "assumption (i) violated: depth V0 must be positive and finite (got {})",
            params.v0
        )));
    }
    if !(params.sigma.is_finite() && params.sigma > 0.0) {
        return Err(Error::Validation(format!("range sigma must be positive (got {})", params.sigma)));
    }
    let shape = match family {
        Family::PolyWell => {
            let s = params.s.ok_or_else(|| Error::Validation("PolyWell requires the decay exponent s".into()))?;
            if !(s.is_finite() && s > 1.0) {
                return Err(Error::Validation(format!(
                    "assumption (ii) violated: PolyWell needs s > 1 for V in L^(3/2) (got s = {s})"
                )));
            }
            Shape::PolyWell { s }
        }
        Family::BumpWell => Shape::BumpWell,
        Family::SquareWell => Shape::SquareWell,
        Family::Custom => {
            let table =
                params.table.as_ref().ok_or_else(|| Error::Validation("custom potential requires a table".into()))?;
            Shape::Custom(Tabulated::new(table)?)
        }
    };
    Ok(Potential { shape, v0: params.v0, sigma: params.sigma })
}

impl Potential {
    pub fn family(&self) -> Family {
        match self.shape {
            Shape::PolyWell { .. } => Family::PolyWell,
            Shape::BumpWell => Family::BumpWell,
            Shape::SquareWell => Family::SquareWell,
            Shape::Custom(_) => Family::Custom,
        }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn depth(&self) -> f64 {
        self.v0
    }

    pub fn range(&self) -> f64 {
        self.sigma
    }

    /// `V(·/s₀)`
    pub fn rescaled(&self, s0: f64) -> Potential {
        Potential { sigma: self.sigma * s0, ..self.clone() }
    }

    /// `c·V`
    pub fn amplified(&self, c: f64) -> Potential {
        Potential { v0: self.v0 * c, ..self.clone() }
    }

    /// Radius beyond which `V` vanishes identically.
    pub fn support_radius(&self) -> Option<f64> {
        match &self.shape {
            Shape::PolyWell { .. } => None,
            Shape::BumpWell | Shape::SquareWell => Some(self.sigma),
            Shape::Custom(t) => Some(t.end() * self.sigma),
        }
    }

    /// Radii where `V` or its derivatives jump.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.shape {
            Shape::PolyWell { .. } => vec![self.sigma],
            Shape::BumpWell | Shape::SquareWell => vec![self.sigma],
            Shape::Custom(t) => t.r.iter().skip(1).map(|x| x * self.sigma).collect(),
        }
    }

    /// Smallest radius `R` with `|V(r)| ≤ rel·‖V‖_∞` for all `r ≥ R`.
    pub fn decay_radius(&self, rel: f64) -> f64 {
        match &self.shape {
            Shape::PolyWell { s } => self.sigma * ((rel.powf(-1.0 / s) - 1.0).max(0.0)).sqrt(),
            _ => self.support_radius().unwrap(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match &self.shape {
            Shape::Custom(t) => self.v0 * t.v.iter().fold(0.0f64, |m, v| m.max(v.abs())),
            Shape::BumpWell => self.v0 * (-1.0f64).exp(),
            _ => self.v0,
        }
    }

    /// Mean of `V` over `[a, b]`, exact across the square-well jump.
    pub fn cell_average(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return self.value(a);
        }
        for &p in &self.breakpoints() {
            if p > a && p < b {
                let wl = (p - a) / (b - a);
                return wl * gauss4_mean(|r| self.value(r), a, p) + (1.0 - wl) * gauss4_mean(|r| self.value(r), p, b);
            }
        }
        gauss4_mean(|r| self.value(r), a, b)
    }

    fn integrate_radial<F: Fn(f64) -> f64>(&self, f: F, integ: &Integrator) -> Result<QuadResult> {
        let mut pts = vec![0.0];
        match self.support_radius() {
            Some(end) => {
                pts.extend(self.breakpoints().into_iter().filter(|&p| p < end));
                pts.push(end);
                pts.sort_by(f64::total_cmp);
                pts.dedup();
                integ.try_integrate(|r| Ok(f(r)), &pts)
            }
            None => integ.try_integrate_to_infinity(|r| Ok(f(r)), 0.0, &self.breakpoints()),
        }
    }
}

impl RadialProfile for Potential {
    fn value(&self, r: f64) -> f64 {
        let x = r / self.sigma;
        let f = match &self.shape {
            Shape::PolyWell { s } => -(1.0 + x * x).powf(-s),
            Shape::BumpWell => {
                if x < 1.0 {
                    -(-1.0 / (1.0 - x * x)).exp()
                } else {
                    0.0
                }
            }
            Shape::SquareWell => {
                if x <= 1.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            Shape::Custom(t) => t.eval(x).0,
        };
        self.v0 * f
    }

    fn laplacian(&self, r: f64) -> Option<f64> {
        let x = r / self.sigma;
        let scale = self.v0 / (self.sigma * self.sigma);
        let lap = match &self.shape {
            Shape::PolyWell { s } => {
                let u = 1.0 + x * x;
                // f'' + 2f'/x with f = -u^{-s}
                6.0 * s * u.powf(-s - 1.0) - 4.0 * s * (s + 1.0) * x * x * u.powf(-s - 2.0)
            }
            Shape::BumpWell => {
                if x >= 1.0 {
                    0.0
                } else {
                    let y = 1.0 - x * x;
                    let e = (-1.0 / y).exp();
                    if e == 0.0 {
                        0.0
                    } else {
                        e * (6.0 / (y * y) + 8.0 * x * x / (y * y * y) - 4.0 * x * x / (y * y * y * y))
                    }
                }
            }
            Shape::SquareWell => return None,
            Shape::Custom(t) => {
                let (_, d1, d2) = t.eval(x);
                if x == 0.0 {
                    3.0 * d2
                } else {
                    d2 + 2.0 * d1 / x
                }
            }
        };
        Some(scale * lap)
    }

    fn length_scale(&self) -> f64 {
        self.sigma
    }

    fn strictly_negative(&self) -> bool {
        matches!(self.shape, Shape::PolyWell { .. })
    }
}

/// Lebesgue and Rollnik norms of `|V|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormSet {
    pub linf: f64,
    /// `+∞` when `V ∉ L¹` (PolyWell with `s ≤ 3/2`).
    pub l1: f64,
    pub l2: f64,
    pub l32: f64,
    pub rollnik_sq: f64,
    pub rollnik_error: f64,
}

/// `ln((r+r')/|r-r'|)` written as `2·atanh(min/max)`.
fn log_kernel(r: f64, rp: f64) -> f64 {
    let (lo, hi) = if r < rp { (r, rp) } else { (rp, r) };
    if hi == 0.0 {
        return 0.0;
    }
    2.0 * (lo / hi).atanh()
}

/// Radially reduced double integral `∫∫ r r' |V(r)||V(r')| k(r, r') dr dr'`
/// over `r' < r`, doubled by symmetry.
fn radial_double_integral<K>(p: &Potential, kernel: K, integ: &Integrator) -> Result<QuadResult>
where
    K: Fn(f64, f64) -> f64,
{
    let inner_integ = Integrator { rel_tol: integ.rel_tol * 0.1, ..*integ };
    let breaks = p.breakpoints();
    let inner = |r: f64| -> Result<f64> {
        if r == 0.0 {
            return Ok(0.0);
        }
        let vr = p.value(r).abs();
        if vr == 0.0 {
            return Ok(0.0);
        }
        let mut pts = vec![0.0];
        pts.extend(breaks.iter().copied().filter(|&b| b < r));
        pts.push(r);
        let q = inner_integ.try_integrate(|rp| Ok(rp * p.value(rp).abs() * kernel(r, rp)), &pts)?;
        Ok(r * vr * q.value)
    };
    let q = match p.support_radius() {
        Some(end) => {
            let mut pts = vec![0.0];
            pts.extend(breaks.iter().copied().filter(|&b| b < end));
            pts.push(end);
            integ.try_integrate(inner, &pts)?
        }
        None => integ.try_integrate_to_infinity(inner, 0.0, &breaks)?,
    };
    Ok(QuadResult { value: 2.0 * q.value, error: 2.0 * q.error, evals: q.evals })
}

/// All five norms. The Rollnik double integral is reduced to `(r, r')` with
/// the angular integral done in closed form.
pub fn norms(p: &Potential) -> Result<NormSet> {
    let integ = Integrator::new(1e-11, 0.0);
    let lp = |power: f64| -> Result<f64> {
        let q = p.integrate_radial(|r| 4.0 * PI * r * r * p.value(r).abs().powf(power), &integ)?;
        Ok(q.value)
    };
    let l1 = match p.shape() {
        Shape::PolyWell { s } if *s <= 1.5 => f64::INFINITY,
        _ => lp(1.0)?,
    };
    let l2 = lp(2.0)?.sqrt();
    let l32 = lp(1.5)?.powf(2.0 / 3.0);
    let rollnik = radial_double_integral(p, log_kernel, &Integrator::new(1e-10, 0.0))?;
    let factor = 8.0 * PI * PI;
    Ok(NormSet {
        linf: p.sup_norm(),
        l1,
        l2,
        l32,
        rollnik_sq: factor * rollnik.value,
        rollnik_error: factor * rollnik.error,
    })
}

/// `‖ΔV‖_{L¹}`; `None` when `ΔV` is only a distribution.
pub fn laplacian_l1(p: &Potential) -> Result<Option<f64>> {
    if p.laplacian(0.0).is_none() {
        return Ok(None);
    }
    let integ = Integrator::new(1e-10, 0.0);
    let q = p.integrate_radial(|r| 4.0 * PI * r * r * p.laplacian(r).unwrap_or(0.0).abs(), &integ)?;
    Ok(Some(q.value))
}

/// Left side of the screened Birman–Schwinger bound,
/// `(λ²/16π²) ∬ |V(x)||V(y)| e^{-2√C̃|x-y|} / |x-y|² dx dy`.
pub fn rollnik_yukawa_check(p: &Potential, lambda: f64, c_tilde: f64) -> Result<QuadResult> {
    if !(lambda >= 0.0 && c_tilde >= 0.0) {
        return Err(Error::Validation("rollnik_yukawa_check needs lambda, C~ >= 0".into()));
    }
    if lambda == 0.0 {
        return Ok(QuadResult { value: 0.0, error: 0.0, evals: 0 });
    }
    let kappa = 2.0 * c_tilde.sqrt();
    let integ = Integrator::new(1e-9, 1e-300);
    let q = if kappa == 0.0 {
        radial_double_integral(p, log_kernel, &integ)?
    } else if kappa.is_infinite() {
        return Ok(QuadResult { value: 0.0, error: 0.0, evals: 0 });
    } else {
        radial_double_integral(
            p,
            |r, rp| expint_e1(kappa * (r - rp).abs().max(1e-15 * r)) - expint_e1(kappa * (r + rp)),
            &integ,
        )?
    };
    // (λ²/16π²)·8π² = λ²/2
    let pref = 0.5 * lambda * lambda;
    Ok(QuadResult { value: pref * q.value, error: pref * q.error, evals: q.evals })
}

/// Which of the structural hypotheses hold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    /// (i) `V ≤ 0`, not identically zero, bounded.
    pub attractive: bool,
    /// (ii) `V ∈ L^{3/2}`.
    pub l32: bool,
    /// (iii) strictly negative with `|ΔV| ≤ C|V|`.
    pub strict_with_delta_bound: bool,
    /// (iii') compact support with `ΔV ∈ L¹`.
    pub compact_with_integrable_laplacian: bool,
    pub delta_ratio: Option<f64>,
    pub notes: Vec<String>,
}

impl AssumptionReport {
    /// (i), (ii) and at least one of (iii)/(iii').
    pub fn usable_for_certificate(&self) -> bool {
        self.attractive && self.l32 && (self.strict_with_delta_bound || self.compact_with_integrable_laplacian)
    }
}

pub fn check_assumptions(p: &Potential) -> AssumptionReport {
    let mut notes = Vec::new();
    let attractive = p.sup_norm() > 0.0;
    let l32 = match p.shape() {
        Shape::PolyWell { s } => *s > 1.0,
        _ => true,
    };
    let delta_ratio = if p.strictly_negative() {
        match delta_ratio_constant(p) {
            Ok(c) => Some(c),
            Err(e) => {
                notes.push(e.to_string());
                None
            }
        }
    } else {
        None
    };
    let strict_with_delta_bound = delta_ratio.is_some();
    let compact_with_integrable_laplacian = match p.shape() {
        Shape::BumpWell => true,
        Shape::SquareWell => {
            notes.push("square well: ΔV is distributional; usable for threshold tests only".into());
            false
        }
        Shape::Custom(_) => {
            notes.push("custom profile: interpolant is not C², (iii') not asserted".into());
            false
        }
        Shape::PolyWell { .. } => false,
    };
    AssumptionReport { attractive, l32, strict_with_delta_bound, compact_with_integrable_laplacian, delta_ratio, notes }
}

/// `C = sup_r |ΔV(r)| / |V(r)|` by dense scan plus golden-section refinement.
pub fn delta_ratio_constant<P: RadialProfile>(p: &P) -> Result<f64> {
    if !p.strictly_negative() {
        return Err(Error::Assumption("assumption (iii) not satisfied: V is not strictly negative".into()));
    }
    let ratio = |r: f64| -> Option<f64> {
        let v = p.value(r);
        let lap = p.laplacian(r)?;
        (v != 0.0).then(|| (lap / v).abs())
    };
    if ratio(0.0).is_none() {
        return Err(Error::Assumption("assumption (iii) not satisfied: ΔV is not a function".into()));
    }
    // R_scan: where |V| has decayed by 1e-12
    let v0 = p.value(0.0).abs();
    let mut r_scan = p.length_scale();
    while p.value(r_scan).abs() > 1e-12 * v0 {
        r_scan *= 1.25;
        if r_scan > 1e8 * p.length_scale() {
            break;
        }
    }
    let n = 20_000;
    let step = r_scan / n as f64;
    let mut vals = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let r = i as f64 * step;
        match ratio(r) {
            Some(x) if x.is_finite() => vals.push(x),
            _ => {
                return Err(Error::Assumption(format!(
                    "assumption (iii) numerically violated: |ΔV|/|V| undefined at r = {r:.4e}"
                )))
            }
        }
    }
    // tail check: the ratio must not be growing at the end of the scan
    let tail_start = (9 * n) / 10;
    let tail_max = vals[tail_start..].iter().cloned().fold(0.0, f64::max);
    let head_max = vals[..tail_start].iter().cloned().fold(0.0, f64::max);
    if vals[n] >= vals[n - 1] && tail_max >= head_max {
        return Err(Error::Assumption(
            "assumption (iii) numerically violated: |ΔV|/|V| grows along the scan tail".into(),
        ));
    }
    let (imax, _) = vals.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    let mut lo = (imax.saturating_sub(1)) as f64 * step;
    let mut hi = ((imax + 1).min(n)) as f64 * step;
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    let f = |r: f64| ratio(r).unwrap_or(0.0);
    let mut x1 = hi - golden * (hi - lo);
    let mut x2 = lo + golden * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo <= 1e-14 * (hi.abs() + step) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + golden * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - golden * (hi - lo);
            f1 = f(x1);
        }
    }
    let refined = f1.max(f2).max(f(lo)).max(f(hi));
    Ok(refined.max(vals[imax]))
}
