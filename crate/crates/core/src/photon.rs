//! Vacuum-sector photon integrals with sharp cutoff `|k| ≤ 1`.
//!
//! Mode weight `w(k) = 1/(2π|k|^{1/2})`, polarization sum
//! `Σ_λ ε_i^λ ε_j^λ = δ_ij − k̂_i k̂_j`. With `D = Σ_λ∫ w ε^λ a_λ dk` this gives
//!
//! * one photon: `⟨0|D·f D*|0⟩ = (2/π)∫₀¹ r f(r) dr`, a third of it per
//!   Cartesian component;
//! * two photons: `⟨0|DD F D*D*|0⟩ = (1/π²)∫∫∫ r s (1+t²) F dt dr ds`, where
//!   `1+t²` is the polarization sum `Σ(ε·ε')²` and a factor 2 comes from the
//!   two Wick contractions.
//!
//! The same normalization is built into [`mc_mode_oracle`], which samples the
//! raw mode integrals with explicit polarization vectors.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{Integrator, QuadResult};

/// Value with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn new(value: f64, error: f64) -> Self {
        Self { value, error }
    }

    fn scale(self, c: f64) -> Self {
        Self { value: c * self.value, error: c.abs() * self.error }
    }

    fn add(self, o: Estimate) -> Self {
        Self { value: self.value + o.value, error: self.error + o.error }
    }
}

impl From<QuadResult> for Estimate {
    fn from(q: QuadResult) -> Self {
        Self { value: q.value, error: q.error }
    }
}

/// One-photon resolvent denominator without shifts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum OneDenominator {
    /// `(1−g)P_f² + H_f`
    Kinetic { g: f64 },
    /// `H_f`
    FieldEnergy,
}

/// `(2/π)∫₀¹ r d(r)^{-n} dr` with `d(r) = c·r² + r + μ + a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OnePhotonKernel {
    pub denominator: OneDenominator,
    pub mu: f64,
    /// Infrared shift `a` (the substitution `H_f → H_f + a`).
    pub ir_shift: f64,
    pub power: u32,
    /// Include `2α D*D` exactly via the isotropic rank-3 correction.
    pub woodbury: Option<f64>,
}

impl OnePhotonKernel {
    pub fn new(denominator: OneDenominator, mu: f64, ir_shift: f64, power: u32) -> Self {
        Self { denominator, mu, ir_shift, power, woodbury: None }
    }

    pub fn with_woodbury(mut self, alpha: f64) -> Self {
        self.woodbury = Some(alpha);
        self
    }

    fn kinetic(&self) -> f64 {
        match self.denominator {
            OneDenominator::Kinetic { g } => 1.0 - g,
            OneDenominator::FieldEnergy => 0.0,
        }
    }

    pub fn denominator_at(&self, r: f64) -> f64 {
        self.kinetic() * r * r + r + self.mu + self.ir_shift
    }

    fn validate(&self) -> Result<()> {
        if let OneDenominator::Kinetic { g } = self.denominator {
            if !(0.0..1.0).contains(&g) {
                return Err(Error::Validation(format!("g must lie in [0, 1) (got {g})")));
            }
        }
        if !(self.mu >= 0.0 && self.ir_shift >= 0.0) {
            return Err(Error::Validation("shifts mu and a must be nonnegative".into()));
        }
        if !(self.power == 1 || self.power == 2) {
            return Err(Error::Validation(format!("one-photon power must be 1 or 2 (got {})", self.power)));
        }
        if self.power == 2 && self.mu + self.ir_shift == 0.0 {
            return Err(Error::Validation("infrared divergence: power-2 one-photon integral needs mu + a > 0".into()));
        }
        if let Some(alpha) = self.woodbury {
            if !(alpha >= 0.0) {
                return Err(Error::Validation(format!("alpha must be nonnegative (got {alpha})")));
            }
        }
        Ok(())
    }
}

/// Breakpoints `0, s, 10s, 100s, …, 1` resolving the scale of the shift.
fn scale_points(s: f64) -> Vec<f64> {
    let mut pts = vec![0.0];
    let mut x = s;
    while x > 0.0 && x < 1.0 {
        pts.push(x);
        x *= 10.0;
    }
    pts.push(1.0);
    pts
}

fn bare_one_photon(k: &OnePhotonKernel, power: u32) -> Result<QuadResult> {
    let integ = Integrator { rel_tol: 1e-13, abs_tol: 0.0, max_segments: 4000 };
    let pts = scale_points(k.mu + k.ir_shift);
    let q = integ.try_integrate(|r| Ok(r / k.denominator_at(r).powi(power as i32)), &pts)?;
    let c = 2.0 / PI;
    Ok(QuadResult { value: c * q.value, error: c * q.error, evals: q.evals })
}

/// Reduced one-photon integral, before the per-component factor `1/3`.
pub fn one_photon_integral(k: &OnePhotonKernel) -> Result<Estimate> {
    k.validate()?;
    let bare = bare_one_photon(k, k.power)?;
    let Some(alpha) = k.woodbury else {
        return Ok(bare.into());
    };
    // ⟨φ_i|(K₀+2αΣ|φ_j⟩⟨φ_j|)^{-n}|φ_i⟩ with ⟨φ_i|K₀^{-1}|φ_j⟩ = (I₁/3)δ_ij
    let i1 = if k.power == 1 { bare } else { bare_one_photon(k, 1)? };
    let denom = 1.0 + 2.0 * alpha * i1.value / 3.0;
    let factor = denom.powi(-(k.power as i32));
    Ok(Estimate::new(bare.value * factor, bare.error * factor + bare.value * factor * 2.0 * alpha * i1.error))
}

/// `(2/π)[ln((1+a)/a) − 1/(1+a)]`, the `n = 2`, `d = r + a` integral.
pub fn shifted_field_closed_form(a: f64) -> f64 {
    2.0 / PI * ((1.0 / a).ln_1p() - 1.0 / (1.0 + a))
}

/// Two-photon numerator weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Numerator {
    Unit,
    /// `P_f² = |k+q|²`
    MomentumSquared,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TwoDenominator {
    /// `P_f² + H_f`
    Full,
    /// `H_f`
    FieldEnergy,
}

/// `⟨0|DD A^{-⌊p/2⌋} N A^{-⌈p/2⌉} D*D*|0⟩` with `A` the chosen denominator,
/// optionally including `2αD*D` in `A` to first order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoPhotonKernel {
    pub numerator: Numerator,
    pub denominator: TwoDenominator,
    pub power: u32,
    pub alpha: Option<f64>,
}

impl TwoPhotonKernel {
    pub fn new(numerator: Numerator, denominator: TwoDenominator, power: u32) -> Self {
        Self { numerator, denominator, power, alpha: None }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }

    fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.power) {
            return Err(Error::Validation(format!("two-photon power must be 1 or 2 (got {})", self.power)));
        }
        if let Some(a) = self.alpha {
            if !(a >= 0.0) {
                return Err(Error::Validation(format!("alpha must be nonnegative (got {a})")));
            }
        }
        Ok(())
    }

    /// `(P_f², H_f)` for photon momenta of sizes `r`, `s` at relative cosine `t`.
    fn momenta(r: f64, s: f64, t: f64) -> (f64, f64) {
        ((r * r + s * s + 2.0 * r * s * t).max(0.0), r + s)
    }

    fn den(&self, pf2: f64, hf: f64) -> f64 {
        match self.denominator {
            TwoDenominator::Full => pf2 + hf,
            TwoDenominator::FieldEnergy => hf,
        }
    }

    fn num(&self, pf2: f64) -> f64 {
        match self.numerator {
            Numerator::Unit => 1.0,
            Numerator::MomentumSquared => pf2,
        }
    }

    /// `N / A^p` at `(r, s, t)`.
    pub fn weight(&self, r: f64, s: f64, t: f64) -> f64 {
        let (pf2, hf) = Self::momenta(r, s, t);
        self.num(pf2) / self.den(pf2, hf).powi(self.power as i32)
    }

    /// Factor pairs `(F, G)` of the first-order correction, as
    /// `(with numerator, power)` for each side.
    fn correction_pairs(&self) -> Vec<((bool, u32), (bool, u32))> {
        let p = self.power;
        let a = p / 2;
        let b = p - a;
        let mut pairs = Vec::new();
        for j in 1..=a {
            pairs.push(((false, j), (true, p + 1 - j)));
        }
        for j in 1..=b {
            pairs.push(((true, p + 1 - j), (false, j)));
        }
        pairs
    }

    fn factor(&self, with_num: bool, power: u32, r: f64, s: f64, t: f64) -> f64 {
        let (pf2, hf) = Self::momenta(r, s, t);
        let n = if with_num { self.num(pf2) } else { 1.0 };
        n / self.den(pf2, hf).powi(power as i32)
    }
}

fn inner_integrator() -> Integrator {
    Integrator { rel_tol: 1e-12, abs_tol: 0.0, max_segments: 2000 }
}

/// `∫₀¹ dr ∫₋₁¹ dt r (1+t²) h(r, s, t)` at fixed `s`.
fn radial_angular<H: Fn(f64, f64, f64) -> f64>(h: &H, s: f64, integ: &Integrator) -> Result<f64> {
    let t_integ = inner_integrator();
    let mut pts = vec![0.0];
    if s > 0.0 && s < 1.0 {
        pts.push(s);
    }
    pts.push(1.0);
    let q = integ.try_integrate(
        |r| {
            if r == 0.0 {
                return Ok(0.0);
            }
            let inner = t_integ.try_integrate(|t| Ok((1.0 + t * t) * h(r, s, t)), &[-1.0, 0.0, 1.0])?;
            Ok(r * inner.value)
        },
        &pts,
    )?;
    Ok(q.value)
}

fn outer_integrator() -> Integrator {
    Integrator { rel_tol: 1e-10, abs_tol: 0.0, max_segments: 2000 }
}

fn middle_integrator() -> Integrator {
    Integrator { rel_tol: 1e-11, abs_tol: 0.0, max_segments: 2000 }
}

/// `(1/π²)∫∫∫ r s (1+t²) N/A^p` without the `α` correction.
fn two_photon_bare(k: &TwoPhotonKernel) -> Result<Estimate> {
    let mid = middle_integrator();
    let h = |r: f64, s: f64, t: f64| k.weight(r, s, t);
    let q = outer_integrator()
        .try_integrate(|s| if s == 0.0 { Ok(0.0) } else { Ok(s * radial_angular(&h, s, &mid)?) }, &[0.0, 0.5, 1.0])?;
    Ok(Estimate::from(q).scale(1.0 / (PI * PI)))
}

/// `c` in `value(α) = value(0) + c·α + O(α²)`.
pub fn two_photon_first_order(k: &TwoPhotonKernel) -> Result<Estimate> {
    k.validate()?;
    let pairs = k.correction_pairs();
    let mid = middle_integrator();
    let q = outer_integrator().try_integrate(
        |s| {
            if s == 0.0 {
                return Ok(0.0);
            }
            let mut acc = 0.0;
            for &((fn_, fp), (gn, gp)) in &pairs {
                let mf = radial_angular(&|r, s, t| k.factor(fn_, fp, r, s, t), s, &mid)?;
                let mg = radial_angular(&|r, s, t| k.factor(gn, gp, r, s, t), s, &mid)?;
                acc += mf * mg;
            }
            Ok(s * acc)
        },
        &[0.0, 0.5, 1.0],
    )?;
    // pair = (8/π)∫ s m_F m_G ds with m_h = (1/4π)∫∫ r(1+t²)h; c = −2 Σ pair
    let c = -2.0 * 8.0 / PI / (16.0 * PI * PI);
    Ok(Estimate::from(q).scale(c))
}

/// Reduced two-photon integral; with `alpha` set, corrected to first order.
pub fn two_photon_integral(k: &TwoPhotonKernel) -> Result<Estimate> {
    k.validate()?;
    let bare = two_photon_bare(k)?;
    match k.alpha {
        Some(alpha) if alpha > 0.0 => Ok(bare.add(two_photon_first_order(k)?.scale(alpha))),
        _ => Ok(bare),
    }
}

/// `α`-independent two-photon constants, computed once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoPhotonTable {
    /// `⟨0|DD A₀^{-1} D*D*|0⟩`, `A₀ = P_f² + H_f`
    pub t2_0: Estimate,
    pub t2_slope: Estimate,
    /// `‖P_f A₀^{-1} D*D*|0⟩‖²`
    pub c1_0: Estimate,
    pub c1_slope: Estimate,
    /// `⟨0|DD H_f^{-1} D*D*|0⟩`
    pub hf1: Estimate,
    /// `⟨0|DD H_f^{-2} D*D*|0⟩`
    pub hf2: Estimate,
}

impl TwoPhotonTable {
    pub fn compute() -> Result<Self> {
        let t2 = TwoPhotonKernel::new(Numerator::Unit, TwoDenominator::Full, 1);
        let c1 = TwoPhotonKernel::new(Numerator::MomentumSquared, TwoDenominator::Full, 2);
        let jobs: Vec<Box<dyn Fn() -> Result<Estimate> + Sync>> = vec![
            Box::new(move || two_photon_bare(&t2)),
            Box::new(move || two_photon_first_order(&t2)),
            Box::new(move || two_photon_bare(&c1)),
            Box::new(move || two_photon_first_order(&c1)),
            Box::new(|| two_photon_bare(&TwoPhotonKernel::new(Numerator::Unit, TwoDenominator::FieldEnergy, 1))),
            Box::new(|| two_photon_bare(&TwoPhotonKernel::new(Numerator::Unit, TwoDenominator::FieldEnergy, 2))),
        ];
        let out: Vec<Estimate> = jobs.par_iter().map(|f| f()).collect::<Result<_>>()?;
        Ok(Self { t2_0: out[0], t2_slope: out[1], c1_0: out[2], c1_slope: out[3], hf1: out[4], hf2: out[5] })
    }

    /// `T₂(α) = T₂(0) + α·T₂'(0)`
    pub fn t2(&self, alpha: f64) -> Estimate {
        self.t2_0.add(self.t2_slope.scale(alpha))
    }

    pub fn c1(&self, alpha: f64) -> Estimate {
        self.c1_0.add(self.c1_slope.scale(alpha))
    }
}

/// `E(α,0) ≈ α/π − α²T₂(α)` with the third-order band `±C_self α³`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelfEnergy {
    pub alpha: f64,
    pub first_order: f64,
    pub t2: Estimate,
    pub value: f64,
    pub band: f64,
}

/// First-order coefficient `⟨0|D·D*|0⟩ = (2/π)∫₀¹ r dr`.
pub fn free_field_coefficient() -> f64 {
    let q = Integrator::default().integrate(|r| r, 0.0, 1.0).expect("polynomial integral");
    2.0 / PI * q.value
}

pub fn self_energy(table: &TwoPhotonTable, alpha: f64, c_self: f64) -> Result<SelfEnergy> {
    if !(alpha >= 0.0) {
        return Err(Error::Validation(format!("alpha must be nonnegative (got {alpha})")));
    }
    let first_order = free_field_coefficient();
    let t2 = table.t2(alpha);
    Ok(SelfEnergy {
        alpha,
        first_order,
        t2,
        value: alpha * first_order - alpha * alpha * t2.value,
        band: c_self * alpha.powi(3),
    })
}

/// All photon constants entering the energy estimate at one `(α, g, μ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhotonIntegralSet {
    pub t2: Estimate,
    pub c1: Estimate,
    pub c3: Estimate,
    pub c4: Estimate,
    pub c5: Estimate,
    pub c6: Estimate,
}

/// Inputs coupling the photon constants to the potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhotonInputs {
    pub alpha: f64,
    pub g: f64,
    pub mu: f64,
    pub beta: f64,
    pub c_of_v: f64,
}

impl PhotonIntegralSet {
    pub fn assemble(table: &TwoPhotonTable, x: &PhotonInputs) -> Result<Self> {
        let kin = OneDenominator::Kinetic { g: x.g };
        let third = 1.0 / 3.0;
        let c3 = one_photon_integral(&OnePhotonKernel::new(kin, x.mu, 0.0, 2).with_woodbury(x.alpha))?.scale(third);
        let c4 = one_photon_integral(&OnePhotonKernel::new(kin, x.mu, 0.0, 1).with_woodbury(x.alpha))?.scale(third);
        let a = x.alpha.powi(3);
        let f1 = one_photon_integral(&OnePhotonKernel::new(OneDenominator::FieldEnergy, 0.0, a, 1))?;
        let f2 = one_photon_integral(&OnePhotonKernel::new(OneDenominator::FieldEnergy, 0.0, a, 2))?;
        let c6 = f1.scale(0.5 * x.beta).add(f2.scale(x.c_of_v)).scale(third);
        let c5 = table.hf1.scale(0.5 * x.beta).add(table.hf2.scale(x.c_of_v));
        Ok(Self { t2: table.t2(x.alpha), c1: table.c1(x.alpha), c3, c4, c5, c6 })
    }
}

/// Transverse polarization pair `ε¹ = k̂×e/|k̂×e|`, `ε² = k̂×ε¹`.
pub fn polarization_vectors(k: [f64; 3]) -> [[f64; 3]; 2] {
    let n = norm(k);
    let khat = [k[0] / n, k[1] / n, k[2] / n];
    let reference = if khat[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
    let e1 = cross(khat, reference);
    let m = norm(e1);
    let e1 = [e1[0] / m, e1[1] / m, e1[2] / m];
    [e1, cross(khat, e1)]
}

/// `Σ_{λλ'} (ε^λ(k)·ε^{λ'}(q))²`, which equals `1 + (k̂·q̂)²`.
pub fn polarization_sum(k: [f64; 3], q: [f64; 3]) -> f64 {
    let ek = polarization_vectors(k);
    let eq = polarization_vectors(q);
    let mut s = 0.0;
    for a in &ek {
        for b in &eq {
            s += dot(*a, *b).powi(2);
        }
    }
    s
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

/// What the Monte-Carlo oracle integrates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum OracleTarget {
    OnePhoton(OnePhotonKernel),
    TwoPhoton(TwoPhotonKernel),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: u64,
}

impl McEstimate {
    /// `|estimate − value| ≤ 3·stderr`, with a relative floor of `10⁻¹²` for
    /// zero-variance integrands.
    pub fn agrees_with(&self, value: f64) -> bool {
        (self.estimate - value).abs() <= 3.0 * self.stderr + 1e-12 * value.abs()
    }

    /// Deviation in standard errors, the error floored at `10⁻¹²·|value|/3`.
    pub fn deviation_in_sigmas(&self, value: f64) -> f64 {
        (self.estimate - value).abs() / self.stderr.max(1e-12 * value.abs() / 3.0).max(f64::MIN_POSITIVE)
    }
}

const MC_CHUNK: u64 = 1 << 16;
pub const MC_MIN_SAMPLES: u64 = 10_000;

/// Photon of uniformly distributed size in `(0, 1]` and isotropic direction;
/// returns the vector and the weight `w(k)²/pdf(k) = |k|/π`.
fn sample_photon<R: Rng>(rng: &mut R) -> ([f64; 3], f64) {
    let r: f64 = 1.0 - rng.gen::<f64>();
    let z: f64 = 2.0 * rng.gen::<f64>() - 1.0;
    let phi = 2.0 * PI * rng.gen::<f64>();
    let rho = (1.0 - z * z).max(0.0).sqrt();
    ([r * rho * phi.cos(), r * rho * phi.sin(), r * z], r / PI)
}

fn one_photon_sample<R: Rng>(k: &OnePhotonKernel, rng: &mut R) -> f64 {
    let (kv, w) = sample_photon(rng);
    let eps = polarization_vectors(kv);
    let pol: f64 = eps.iter().map(|e| dot(*e, *e)).sum();
    w * pol * k.denominator_at(norm(kv)).powi(-(k.power as i32))
}

fn two_photon_sample<R: Rng>(k: &TwoPhotonKernel, rng: &mut R) -> f64 {
    let (kv, wk) = sample_photon(rng);
    let (qv, wq) = sample_photon(rng);
    let (r, s) = (norm(kv), norm(qv));
    let t = dot(kv, qv) / (r * s);
    let mut x = 2.0 * wk * wq * polarization_sum(kv, qv) * k.weight(r, s, t);
    if let Some(alpha) = k.alpha.filter(|a| *a > 0.0) {
        let (pv, wp) = sample_photon(rng);
        let rp = norm(pv);
        let tp = dot(pv, qv) / (rp * s);
        let eq = polarization_vectors(qv);
        let ek = polarization_vectors(kv);
        let ep = polarization_vectors(pv);
        let mut pair_sum = 0.0;
        for &((fn_, fp), (gn, gp)) in &k.correction_pairs() {
            let f = wk * k.factor(fn_, fp, r, s, t);
            let g = wp * k.factor(gn, gp, rp, s, tp);
            // Σ_λ' Σ_j a_j b_j with a = Σ_λ (ε'·ε^λ(k)) ε^λ(k), b likewise at p
            let mut acc = 0.0;
            for e in &eq {
                let mut a = [0.0; 3];
                let mut b = [0.0; 3];
                for el in &ek {
                    let c = dot(*e, *el);
                    (0..3).for_each(|j| a[j] += c * el[j]);
                }
                for em in &ep {
                    let c = dot(*e, *em);
                    (0..3).for_each(|j| b[j] += c * em[j]);
                }
                acc += dot(a, b);
            }
            pair_sum += 4.0 * wq * f * g * acc;
        }
        x += alpha * (-2.0 * pair_sum);
    }
    x
}

/// Unbiased Monte-Carlo estimate of a raw mode integral. Samples are drawn
/// in fixed-size chunks, each with its own ChaCha stream, and combined in
/// chunk order, so the result depends only on `(target, samples, seed)`.
pub fn mc_mode_oracle(target: &OracleTarget, samples: u64, seed: u64) -> Result<McEstimate> {
    if samples < MC_MIN_SAMPLES {
        return Err(Error::Validation(format!("Monte-Carlo oracle needs at least {MC_MIN_SAMPLES} samples")));
    }
    match target {
        OracleTarget::OnePhoton(k) => {
            k.validate()?;
            if k.woodbury.is_some() {
                return Err(Error::Validation(
                    "the resummed 2αD*D correction has no raw mode integral; sample the bare kernel".into(),
                ));
            }
        }
        OracleTarget::TwoPhoton(k) => k.validate()?,
    }
    let chunks = samples.div_ceil(MC_CHUNK);
    let stats: Vec<(f64, f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let m = MC_CHUNK.min(samples - c * MC_CHUNK);
            let (mut mean, mut m2) = (0.0, 0.0);
            for i in 0..m {
                let x = match target {
                    OracleTarget::OnePhoton(k) => one_photon_sample(k, &mut rng),
                    OracleTarget::TwoPhoton(k) => two_photon_sample(k, &mut rng),
                };
                let d = x - mean;
                mean += d / (i + 1) as f64;
                m2 += d * (x - mean);
            }
            (m as f64, mean, m2)
        })
        .collect();
    let (mut n, mut mean, mut m2) = (0.0, 0.0, 0.0);
    for (nb, mb, m2b) in stats {
        let tot = n + nb;
        let d = mb - mean;
        mean += d * nb / tot;
        m2 += m2b + d * d * n * nb / tot;
        n = tot;
    }
    let var = m2 / (n - 1.0);
    Ok(McEstimate { estimate: mean, stderr: (var / n).sqrt(), samples })
}
