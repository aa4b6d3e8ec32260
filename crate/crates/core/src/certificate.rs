//! Binding certificate: the enhancement function `g(α)`, the energy margin at
//! a coupling `λ`, the certified coupling window and the critical `α`.
//!
//! Third-order contributions that are not computed here enter through two
//! budget knobs, `C_self` and `C7`. They default to 1 and are not rigorous.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::photon::{Estimate, PhotonInputs, PhotonIntegralSet, TwoPhotonTable};
use crate::potential::{check_assumptions, norms, rollnik_yukawa_check, AssumptionReport, Potential};
use crate::schrodinger::{
    binding_energy, coupling_threshold, lemma5_constant, observables, RadialGrid, RadialProblem, Threshold,
};

/// Budget constants for the uncomputed third-order terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Knobs {
    /// `|E(α,0) − α/π + α²T₂| ≤ C_self·α³`
    pub c_self: f64,
    /// Bound on the field remainder, entering as `4α³C7/a`.
    pub c7: f64,
    /// Largest `g` for which the support bound of compactly supported
    /// potentials is computed.
    pub support_g_max: f64,
}

impl Default for Knobs {
    fn default() -> Self {
        Self { c_self: 1.0, c7: 1.0, support_g_max: 0.1 }
    }
}

impl Knobs {
    pub fn validate(&self) -> Result<()> {
        if !(self.c_self >= 0.0 && self.c7 >= 0.0) {
            return Err(Error::Validation("budget knobs C_self and C7 must be nonnegative".into()));
        }
        if !(self.support_g_max > 0.0 && self.support_g_max < 1.0) {
            return Err(Error::Validation("support_g_max must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// `β` and `C(V)` of the operator bound `p² ≤ β(h + |e|) + C(V)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatorBound {
    pub beta: f64,
    pub c_of_v: f64,
    /// Left side of the sufficient condition on `C(V)`.
    pub choice_lhs: f64,
    /// `√C̃(V)` with `C̃ = C(V)/(β(1−g) − 1)`.
    pub choice_rhs: f64,
}

impl OperatorBound {
    pub fn from_l2(l2: f64, lambda0: f64, g: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&g) {
            return Err(Error::Validation(format!("g must lie in [0, 1) (got {g})")));
        }
        let k = 1.0 - g;
        let beta = 4.0 / k;
        let v2 = l2 * l2;
        let c_of_v = (2.0 * lambda0 * lambda0 * v2 / (3.0 * std::f64::consts::PI * k * k)).powi(2);
        let choice_lhs =
            lambda0 * lambda0 * beta.sqrt() * v2 / (8.0 * std::f64::consts::PI * (k - 1.0 / beta).powf(1.5));
        let choice_rhs = (c_of_v / (beta * k - 1.0)).sqrt();
        let out = Self { beta, c_of_v, choice_lhs, choice_rhs };
        if choice_lhs > choice_rhs * (1.0 + 1e-12) {
            return Err(Error::Consistency(format!(
                "C(V) too small for the operator bound: {choice_lhs} > {choice_rhs}"
            )));
        }
        Ok(out)
    }

    /// `C̃(V)`
    pub fn c_tilde(&self, g: f64) -> f64 {
        self.c_of_v / (self.beta * (1.0 - g) - 1.0)
    }
}

/// `β = 4/(1−g)` and `C(V)`, with the sufficient condition checked.
pub fn lemma3_constants(p: &Potential, lambda0: f64, g: f64) -> Result<OperatorBound> {
    OperatorBound::from_l2(norms(p)?.l2, lambda0, g)
}

/// The screened Birman–Schwinger quantity for `Ṽ = V/(1−g−β⁻¹)` at the
/// returned constants; it must be below 1.
pub fn screened_operator_bound(p: &Potential, lambda0: f64, g: f64) -> Result<Estimate> {
    let ob = lemma3_constants(p, lambda0, g)?;
    let tilde = p.amplified(1.0 / (1.0 - g - 1.0 / ob.beta));
    let q = rollnik_yukawa_check(&tilde, lambda0, ob.c_tilde(g))?;
    Ok(Estimate::new(q.value, q.error))
}

/// How the constant `C` in `|(ψ,ΔVψ)| ≤ C(ψ,|V|ψ)` was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AssumptionSource {
    /// `sup |ΔV|/|V|` for strictly negative potentials.
    DeltaRatio,
    /// Two-sided ground-state bound on a compact support.
    SupportBound,
}

/// Every constant entering the energy estimate at one `(α, λ, g)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantsSet {
    pub alpha: f64,
    pub lambda: f64,
    pub g: f64,
    pub beta: f64,
    pub c_of_v: f64,
    pub mu: f64,
    /// Splitting parameter, `1−a = min{1/(4C₄), C₆/(μC₃), 3/4}`.
    pub a: f64,
    /// Infrared shift `α³`.
    pub ir_shift: f64,
    pub c_assumption: f64,
    pub assumption_source: AssumptionSource,
    pub photon: PhotonIntegralSet,
}

impl ConstantsSet {
    /// Right side of the fixed-point equation for `g`.
    pub fn g_map(&self) -> f64 {
        let one_minus_a = 1.0 - self.a;
        let (c3, c4, c6) = (self.photon.c3.value, self.photon.c4.value, self.photon.c6.value);
        let lc = self.lambda * self.c_assumption;
        let num = 4.0 * self.alpha * one_minus_a * (c4 + self.mu * c3 - 0.5 * lc * c3);
        let den = 1.0 + 4.0 * self.alpha * c6 - 2.0 * self.alpha * one_minus_a * lc * c3;
        num / den
    }

    /// Coefficient of `‖pψ‖²` in the energy bound at enhancement `g`, and
    /// the scale of its two competing parts.
    pub fn momentum_coefficient(&self, g: f64) -> (f64, f64) {
        let one_minus_a = 1.0 - self.a;
        let (c3, c4, c6) = (self.photon.c3.value, self.photon.c4.value, self.photon.c6.value);
        let lc = self.lambda * self.c_assumption;
        let gain = g * (1.0 + 4.0 * self.alpha * c6 - 2.0 * self.alpha * one_minus_a * lc * c3);
        let cost = 4.0 * self.alpha * one_minus_a * (c4 + self.mu * c3 - 0.5 * lc * c3);
        (gain - cost, gain.abs() + cost.abs())
    }
}

/// Solution of the fixed-point equation for `g(α)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GSolution {
    pub alpha: f64,
    pub lambda: f64,
    pub g: f64,
    pub iterations: usize,
    pub damped: bool,
    pub trace: Vec<f64>,
    pub constants: ConstantsSet,
    /// Assembled coefficient of `‖pψ‖²` and its size relative to its parts.
    pub momentum_coefficient: f64,
    pub momentum_coefficient_relative: f64,
}

/// Named contributions whose sum is the margin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginTerms {
    /// `|e_λ|`
    pub binding: f64,
    /// `−2αλC₃C(1−a)|e_λ|`
    pub binding_loss: f64,
    /// `−α²g(C₅ − C₁)`
    pub two_photon: f64,
    /// `−κ_p‖pψ‖²`, zero when `g` solves the fixed-point equation at `λ`.
    pub momentum: f64,
    /// `−α³` from the infrared shift.
    pub infrared_shift: f64,
    /// `−C_self·α³`
    pub self_energy_remainder: f64,
    /// `−4C7·α³/a`
    pub field_remainder: f64,
}

impl MarginTerms {
    pub fn total(&self) -> f64 {
        self.binding
            + self.binding_loss
            + self.two_photon
            + self.momentum
            + self.infrared_shift
            + self.self_energy_remainder
            + self.field_remainder
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BindingCertificate {
    pub alpha: f64,
    pub lambda: f64,
    pub lambda0: f64,
    pub g: f64,
    pub e_abs: f64,
    pub p2: f64,
    pub margin: f64,
    pub terms: MarginTerms,
    pub momentum_coefficient: f64,
    pub constants: ConstantsSet,
    pub window_lambda_min: Option<f64>,
    pub certified: bool,
    pub knobs: Knobs,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BindingWindow {
    pub alpha: f64,
    pub g: f64,
    pub lambda0: f64,
    /// `(1−g)λ₀`, the left end of the nominal window.
    pub nominal_min: f64,
    /// Left end of the certified window, if any.
    pub lambda_min: Option<f64>,
    /// `(λ₀ − λ_min)/(λ₀ − (1−g)λ₀)`
    pub coverage: f64,
    pub at_lambda0: BindingCertificate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalAlpha {
    /// Largest certified `α` in `[10⁻⁶, 1]`, or 0.
    pub alpha_star: f64,
    /// `α*/10⁻²`
    pub relative_to_1e_2: f64,
    /// Whether `α* ≥ 1/137`.
    pub covers_fine_structure: bool,
    /// `(α, margin at λ₀)` for every scanned point; `None` when a step failed.
    pub scan: Vec<(f64, Option<f64>)>,
    pub diagnosis: Option<String>,
}

pub const FINE_STRUCTURE: f64 = 1.0 / 137.035_999_084;

/// A potential on a grid with everything the certificate needs cached.
#[derive(Debug, Clone)]
pub struct BindingProblem {
    potential: Potential,
    radial: RadialProblem,
    threshold: Threshold,
    assumptions: AssumptionReport,
    l2: f64,
    c_assumption: f64,
    assumption_source: AssumptionSource,
    table: TwoPhotonTable,
    knobs: Knobs,
}

impl BindingProblem {
    pub fn new(p: &Potential, grid: RadialGrid, knobs: Knobs) -> Result<Self> {
        Self::with_table(p, grid, knobs, TwoPhotonTable::compute()?)
    }

    /// Reuse a precomputed (potential-independent) two-photon table.
    pub fn with_table(p: &Potential, grid: RadialGrid, knobs: Knobs, table: TwoPhotonTable) -> Result<Self> {
        knobs.validate()?;
        let assumptions = check_assumptions(p);
        let (c_assumption, assumption_source) = if let Some(c) = assumptions.delta_ratio {
            (c, AssumptionSource::DeltaRatio)
        } else if assumptions.compact_with_integrable_laplacian {
            (lemma5_constant(p, &grid, knobs.support_g_max)?.c, AssumptionSource::SupportBound)
        } else {
            return Err(Error::Assumption(
                "neither assumption (iii) nor (iii') holds; potential usable for threshold tests only".into(),
            ));
        };
        let threshold = coupling_threshold(p, &grid)?;
        let radial = RadialProblem::new(p, grid)?;
        Ok(Self {
            potential: p.clone(),
            radial,
            threshold,
            l2: norms(p)?.l2,
            assumptions,
            c_assumption,
            assumption_source,
            table,
            knobs,
        })
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn radial(&self) -> &RadialProblem {
        &self.radial
    }

    pub fn threshold(&self) -> &Threshold {
        &self.threshold
    }

    pub fn lambda0(&self) -> f64 {
        self.threshold.lambda0
    }

    pub fn assumptions(&self) -> &AssumptionReport {
        &self.assumptions
    }

    pub fn c_assumption(&self) -> f64 {
        self.c_assumption
    }

    pub fn table(&self) -> &TwoPhotonTable {
        &self.table
    }

    pub fn knobs(&self) -> Knobs {
        self.knobs
    }

    pub fn with_knobs(&self, knobs: Knobs) -> Result<Self> {
        knobs.validate()?;
        Ok(Self { knobs, ..self.clone() })
    }

    pub fn operator_bound(&self, g: f64) -> Result<OperatorBound> {
        OperatorBound::from_l2(self.l2, self.lambda0(), g)
    }

    /// All constants at `(α, λ, g)`.
    pub fn constants(&self, alpha: f64, lambda: f64, g: f64) -> Result<ConstantsSet> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Validation(format!("alpha must be positive (got {alpha})")));
        }
        let ob = self.operator_bound(g)?;
        let mu = 0.5 * lambda * self.c_assumption;
        let photon =
            PhotonIntegralSet::assemble(&self.table, &PhotonInputs { alpha, g, mu, beta: ob.beta, c_of_v: ob.c_of_v })?;
        let (c3, c4, c6) = (photon.c3.value, photon.c4.value, photon.c6.value);
        let mut one_minus_a = (1.0 / (4.0 * c4)).min(0.75);
        if mu * c3 > 0.0 {
            one_minus_a = one_minus_a.min(c6 / (mu * c3));
        }
        Ok(ConstantsSet {
            alpha,
            lambda,
            g,
            beta: ob.beta,
            c_of_v: ob.c_of_v,
            mu,
            a: 1.0 - one_minus_a,
            ir_shift: alpha.powi(3),
            c_assumption: self.c_assumption,
            assumption_source: self.assumption_source,
            photon,
        })
    }

    /// Fixed point of `g ↦ G(α, λ, g)` started from `g = 0`.
    pub fn solve_g(&self, alpha: f64, lambda: f64) -> Result<GSolution> {
        if !(lambda > 0.0 && lambda <= self.lambda0() * (1.0 + 1e-12)) {
            return Err(Error::OutsideWindow(format!("lambda = {lambda} not in (0, lambda0 = {}]", self.lambda0())));
        }
        let mut g = 0.0;
        let mut trace = vec![g];
        let mut damped = false;
        let mut last_step = f64::INFINITY;
        let mut converged = false;
        let mut iterations = 0;
        for it in 1..=100 {
            iterations = it;
            let cs = self.constants(alpha, lambda, g)?;
            let target = cs.g_map();
            if !(target > 0.0 && target < 1.0) {
                return Err(Error::NonConvergence(format!(
                    "g left (0, 1) at iteration {it}: {target} (trace {trace:?})"
                )));
            }
            let step = target - g;
            if it > 2 && step.abs() > last_step.abs() && step.signum() != last_step.signum() {
                damped = true;
            }
            let next = if damped { g + 0.5 * step } else { target };
            trace.push(next);
            last_step = step;
            let done = (next - g).abs() <= 1e-13 * next;
            g = next;
            if done {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence(format!("g(alpha) fixed point after 100 iterations: {trace:?}")));
        }
        if g > alpha * (1.0 + 1e-12) {
            return Err(Error::Consistency(format!("g = {g} exceeds alpha = {alpha}")));
        }
        let constants = self.constants(alpha, lambda, g)?;
        let (coef, scale) = constants.momentum_coefficient(g);
        Ok(GSolution {
            alpha,
            lambda,
            g,
            iterations,
            damped,
            trace,
            constants,
            momentum_coefficient: coef,
            momentum_coefficient_relative: coef.abs() / scale,
        })
    }

    /// Energy margin at `(α, λ)` with `g` frozen at its value for `λ₀`.
    pub fn margin(&self, alpha: f64, lambda: f64) -> Result<BindingCertificate> {
        let g = self.solve_g(alpha, self.lambda0())?.g;
        self.margin_with_g(alpha, lambda, g)
    }

    fn margin_with_g(&self, alpha: f64, lambda: f64, g: f64) -> Result<BindingCertificate> {
        let lambda0 = self.lambda0();
        if !(lambda > (1.0 - g) * lambda0 && lambda <= lambda0 * (1.0 + 1e-12)) {
            return Err(Error::OutsideWindow(format!(
                "lambda = {lambda} not in ((1-g)lambda0, lambda0] = ({}, {lambda0}]",
                (1.0 - g) * lambda0
            )));
        }
        let cs = self.constants(alpha, lambda, g)?;
        let e_abs = binding_energy(&self.radial, lambda, g)?;
        let sol = self.radial.ground_state(lambda / (1.0 - g), 1.0)?;
        let p2 = observables(&sol, &self.potential)?.p2;
        let (coef, _) = cs.momentum_coefficient(g);
        let a3 = alpha.powi(3);
        let terms = MarginTerms {
            binding: e_abs,
            binding_loss: -e_abs * 2.0 * alpha * lambda * cs.photon.c3.value * cs.c_assumption * (1.0 - cs.a),
            two_photon: -alpha * alpha * g * (cs.photon.c5.value - cs.photon.c1.value),
            momentum: -coef * p2,
            infrared_shift: -a3,
            self_energy_remainder: -self.knobs.c_self * a3,
            field_remainder: -4.0 * self.knobs.c7 * a3 / cs.a,
        };
        let margin = terms.total();
        Ok(BindingCertificate {
            alpha,
            lambda,
            lambda0,
            g,
            e_abs,
            p2,
            margin,
            terms,
            momentum_coefficient: coef,
            constants: cs,
            window_lambda_min: None,
            certified: margin > 0.0,
            knobs: self.knobs,
        })
    }

    /// Certified sub-window `(λ_min, λ₀]` of `((1−g)λ₀, λ₀]`.
    pub fn binding_window(&self, alpha: f64) -> Result<BindingWindow> {
        let lambda0 = self.lambda0();
        let g = self.solve_g(alpha, lambda0)?.g;
        let mut at0 = self.margin_with_g(alpha, lambda0, g)?;
        let nominal_min = (1.0 - g) * lambda0;
        if !at0.certified {
            return Ok(BindingWindow {
                alpha,
                g,
                lambda0,
                nominal_min,
                lambda_min: None,
                coverage: 0.0,
                at_lambda0: at0,
            });
        }
        let positive = |lambda: f64| -> Result<bool> {
            match self.margin_with_g(alpha, lambda, g) {
                Ok(c) => Ok(c.certified),
                Err(Error::NoBoundState { .. }) => Ok(false),
                Err(e) => Err(e),
            }
        };
        let (mut lo, mut hi) = (nominal_min, lambda0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 1e-12 * lambda0 {
                break;
            }
            if positive(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        at0.window_lambda_min = Some(hi);
        Ok(BindingWindow {
            alpha,
            g,
            lambda0,
            nominal_min,
            lambda_min: Some(hi),
            coverage: (lambda0 - hi) / (lambda0 - nominal_min),
            at_lambda0: at0,
        })
    }

    fn margin_at_lambda0(&self, alpha: f64) -> Result<f64> {
        self.margin(alpha, self.lambda0()).map(|c| c.margin)
    }

    /// Largest `α ∈ [10⁻⁶, 1]` with a positive margin at `λ₀`: a descending
    /// scan `α = 10^{-k/4}` locates the first certified point, then
    /// bisection in `ln α` refines the crossing.
    pub fn critical_alpha(&self) -> Result<CriticalAlpha> {
        let mut scan = Vec::new();
        let mut bracket = None;
        let mut prev = None;
        let mut last_error = None;
        for k in 0..=24 {
            let alpha = 10f64.powf(-(k as f64) / 4.0);
            let m = self.margin_at_lambda0(alpha);
            if let Err(e) = &m {
                last_error = Some(e.to_string());
            }
            let m = m.ok();
            scan.push((alpha, m));
            if m.is_some_and(|m| m > 0.0) {
                bracket = Some((alpha, prev));
                break;
            }
            prev = Some(alpha);
        }
        let Some((good, bad)) = bracket else {
            let diagnosis = match last_error {
                Some(e) => format!("no alpha in [1e-6, 1] certified; smallest alphas failed: {e}"),
                None => "no alpha in [1e-6, 1] certified: the O(alpha^3) budget dominates the binding energy".into(),
            };
            return Ok(CriticalAlpha {
                alpha_star: 0.0,
                relative_to_1e_2: 0.0,
                covers_fine_structure: false,
                scan,
                diagnosis: Some(diagnosis),
            });
        };
        let alpha_star = match bad {
            None => good,
            Some(bad) => {
                let (mut lo, mut hi) = (good.ln(), bad.ln());
                while hi - lo > 1e-9 {
                    let mid = 0.5 * (lo + hi);
                    if self.margin_at_lambda0(mid.exp()).is_ok_and(|m| m > 0.0) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo.exp()
            }
        };
        Ok(CriticalAlpha {
            alpha_star,
            relative_to_1e_2: alpha_star / 1e-2,
            covers_fine_structure: alpha_star >= FINE_STRUCTURE,
            scan,
            diagnosis: None,
        })
    }
}

pub fn solve_g(problem: &BindingProblem, alpha: f64, lambda: f64) -> Result<GSolution> {
    problem.solve_g(alpha, lambda)
}

pub fn margin(problem: &BindingProblem, alpha: f64, lambda: f64) -> Result<BindingCertificate> {
    problem.margin(alpha, lambda)
}

pub fn binding_window(problem: &BindingProblem, alpha: f64) -> Result<BindingWindow> {
    problem.binding_window(alpha)
}

pub fn critical_alpha(problem: &BindingProblem) -> Result<CriticalAlpha> {
    problem.critical_alpha()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{make_potential, Family, PotentialParams};

    fn reference() -> BindingProblem {
        let p = make_potential(Family::PolyWell, &PotentialParams { v0: 1.0, sigma: 5.0, s: Some(4.0), table: None })
            .unwrap();
        let grid = RadialGrid::for_potential(&p, 3000).unwrap();
        BindingProblem::new(&p, grid, Knobs::default()).unwrap()
    }

    #[test]
    fn optimal_beta_meets_the_sufficient_condition_with_equality() {
        let ob = OperatorBound::from_l2(1.7, 0.8, 0.01).unwrap();
        assert!((ob.beta - 4.0 / 0.99).abs() < 1e-15);
        assert!((ob.choice_lhs - ob.choice_rhs).abs() < 1e-12 * ob.choice_rhs);
        assert!((ob.c_tilde(0.01) - ob.c_of_v / 3.0).abs() < 1e-12 * ob.c_of_v);
        assert!(OperatorBound::from_l2(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn screened_bound_is_below_one() {
        let p = make_potential(Family::PolyWell, &PotentialParams { v0: 1.0, sigma: 5.0, s: Some(4.0), table: None })
            .unwrap();
        let grid = RadialGrid::for_potential(&p, 3000).unwrap();
        let lambda0 = RadialProblem::new(&p, grid).unwrap().threshold().unwrap();
        let q = screened_operator_bound(&p, lambda0, 1e-3).unwrap();
        assert!(q.value + q.error < 1.0, "{q:?}");
    }

    #[test]
    fn enhancement_is_bounded_by_alpha_and_solves_its_equation() {
        let bp = reference();
        for &alpha in &[1e-5, 1e-3, 1e-1] {
            let sol = bp.solve_g(alpha, bp.lambda0()).unwrap();
            assert!(sol.g > 0.0 && sol.g <= alpha, "{sol:?}");
            assert!(sol.momentum_coefficient_relative < 1e-10);
            assert_eq!(sol.trace[0], 0.0);
        }
    }

    #[test]
    fn margin_is_the_sum_of_its_terms() {
        let bp = reference();
        let c = bp.margin(1e-4, bp.lambda0()).unwrap();
        assert_eq!(c.margin, c.terms.total());
        assert!(c.certified && c.margin > 0.0);
        assert!(c.terms.momentum.abs() < 1e-10 * c.terms.binding);
        let far = bp.margin(0.3, bp.lambda0()).unwrap();
        assert!(!far.certified);
    }

    #[test]
    fn window_bounds_are_enforced() {
        let bp = reference();
        let g = bp.solve_g(1e-3, bp.lambda0()).unwrap().g;
        let below = (1.0 - g) * bp.lambda0() * 0.999;
        assert!(matches!(bp.margin(1e-3, below), Err(Error::OutsideWindow(_))));
        assert!(matches!(bp.margin(1e-3, bp.lambda0() * 1.01), Err(Error::OutsideWindow(_))));
    }

    #[test]
    fn window_shrinks_with_larger_budget() {
        let bp = reference();
        let w1 = bp.binding_window(1e-4).unwrap();
        let heavier = bp.with_knobs(Knobs { c7: 4.0, ..Knobs::default() }).unwrap();
        let w2 = heavier.binding_window(1e-4).unwrap();
        let (a, b) = (w1.lambda_min.unwrap(), w2.lambda_min.unwrap());
        assert!(a > w1.nominal_min && b >= a);
    }

    #[test]
    fn critical_alpha_is_positive_for_the_reference_well() {
        let ca = reference().critical_alpha().unwrap();
        assert!(ca.alpha_star > 0.0 && ca.alpha_star < 1.0, "{ca:?}");
        assert!(ca.diagnosis.is_none());
    }

    #[test]
    fn knobs_are_validated() {
        assert!(reference().with_knobs(Knobs { c_self: -1.0, ..Knobs::default() }).is_err());
        assert!(reference().with_knobs(Knobs { support_g_max: 1.0, ..Knobs::default() }).is_err());
    }
}
