//! Radial Schrödinger problems for `k·p² + βV`: ground states, the coupling
//! threshold, the Klaus–Simon coefficient and ground-state observables.
//!
//! The reduced radial function `u = rψ` lives on the nodes `r_i = i·h`,
//! `i = 1..n`, with `u(0) = 0`. Beyond `r_max` the potential is treated as
//! zero and the decaying exterior solution is glued on through its
//! logarithmic derivative `γ = u'/u`, so weakly bound states are not squeezed
//! by an artificial wall. The exterior enters as a rank-one term on the last
//! diagonal entry; that entry carries half a cell of mass (trapezoid rule),
//! and the matrix is symmetrized with `u_n = √2·v_n`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::{laplacian_l1, norms, Potential, RadialProfile};
use crate::quadrature::Integrator;
use crate::tridiag::SymTridiag;

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Uniform radial grid on `(0, r_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialGrid {
    pub r_max: f64,
    pub n: usize,
}

impl RadialGrid {
    pub fn new(r_max: f64, n: usize) -> Result<Self> {
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::Validation(format!("grid r_max must be positive (got {r_max})")));
        }
        if n < 100 {
            return Err(Error::Validation(format!("grid needs n >= 100 points (got {n})")));
        }
        Ok(Self { r_max, n })
    }

    /// Grid reaching where `|V| ≤ 10⁻¹⁰‖V‖_∞`, and at least `40σ`.
    pub fn for_potential(p: &Potential, n: usize) -> Result<Self> {
        let r_max = (1.01 * p.decay_radius(1e-10)).max(40.0 * p.range());
        Self::new(r_max, n)
    }

    pub fn h(&self) -> f64 {
        self.r_max / self.n as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.h()
    }

    /// Same extent, twice the points.
    pub fn refined(&self) -> Self {
        Self { r_max: self.r_max, n: 2 * self.n }
    }

    /// Extent multiplied by `s0`, same point count.
    pub fn scaled(&self, s0: f64) -> Self {
        Self { r_max: self.r_max * s0, n: self.n }
    }

    fn check_decay(&self, p: &Potential) -> Result<()> {
        let tail = p.value(self.r_max).abs();
        if tail > 1e-10 * p.sup_norm() {
            return Err(Error::Resolution(format!(
                "|V(r_max)| = {tail:.3e} exceeds 1e-10·‖V‖∞ at r_max = {}",
                self.r_max
            )));
        }
        Ok(())
    }
}

/// Cell averages of `V` around each node; the last node gets the half cell.
fn cell_averages(p: &Potential, grid: &RadialGrid) -> Vec<f64> {
    let h = grid.h();
    (1..=grid.n)
        .map(|i| {
            let r = i as f64 * h;
            let b = if i == grid.n { r } else { r + 0.5 * h };
            p.cell_average(r - 0.5 * h, b)
        })
        .collect()
}

/// Trapezoid weight of node `i` (1-based).
fn weight(i: usize, n: usize) -> f64 {
    if i == n {
        0.5
    } else {
        1.0
    }
}

/// Discretized ground state of `k·p² + βV` in one partial wave.
#[derive(Debug, Clone, Serialize)]
pub struct SchrodingerSolution {
    pub beta_eff: f64,
    pub kinetic_factor: f64,
    pub ell: u32,
    pub energy: f64,
    /// Exterior decay rate `√(-E/k)`.
    pub kappa: f64,
    /// `u(r_i)` for `i = 0..=n`, normalized so that `∫₀^∞ u² dr = 1`
    /// including the exterior tail.
    #[serde(skip)]
    pub u: Vec<f64>,
    /// Share of `∫u²` beyond `r_max`.
    pub exterior_weight: f64,
    pub converged: bool,
    pub reason: Option<String>,
    pub grid: RadialGrid,
    /// `|k‖pψ‖² + β(ψ,Vψ) − E|` relative to the size of the terms.
    pub rayleigh_residual: f64,
}

/// The operator `k·p² + βV` on a fixed grid, with the cell averages cached.
#[derive(Debug, Clone)]
pub struct RadialProblem {
    grid: RadialGrid,
    vbar: Vec<f64>,
    v_min: f64,
}

struct Eigen {
    energy: f64,
    u: Vec<f64>,
    mass: f64,
}

impl RadialProblem {
    pub fn new(p: &Potential, grid: RadialGrid) -> Result<Self> {
        grid.check_decay(p)?;
        let vbar = cell_averages(p, &grid);
        let v_min = vbar.iter().copied().fold(0.0, f64::min);
        Ok(Self { grid, vbar, v_min })
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    fn validate(&self, beta: f64, k: f64, ell: u32) -> Result<()> {
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::Validation(format!("coupling must be nonnegative (got {beta})")));
        }
        if !(k > 0.0 && k <= 1.0) {
            return Err(Error::Validation(format!("kinetic factor must lie in (0, 1] (got {k})")));
        }
        if ell > 1 {
            return Err(Error::Validation(format!("partial wave ell = {ell} not supported (0 or 1)")));
        }
        Ok(())
    }

    /// Symmetrized matrix without the exterior term.
    fn matrix(&self, beta: f64, k: f64, ell: u32) -> SymTridiag {
        let n = self.grid.n;
        let h = self.grid.h();
        let kh2 = k / (h * h);
        let cent = k * (ell * (ell + 1)) as f64;
        let diag = (1..=n)
            .map(|i| {
                let r = i as f64 * h;
                2.0 * kh2 + cent / (r * r) + beta * self.vbar[i - 1]
            })
            .collect();
        let mut off = vec![-kh2; n - 1];
        off[n - 2] = -SQRT2 * kh2;
        SymTridiag::new(diag, off)
    }

    /// Exterior log-derivative `γ(κ)` and `dγ/dκ`.
    fn gamma(&self, kappa: f64, ell: u32) -> (f64, f64) {
        let r = self.grid.r_max;
        match ell {
            0 => (-kappa, -1.0),
            _ => {
                let q = 1.0 + kappa * r;
                (-kappa - 1.0 / (r * q), -1.0 + 1.0 / (q * q))
            }
        }
    }

    fn extra(&self, kappa: f64, k: f64, ell: u32) -> f64 {
        -2.0 * k * self.gamma(kappa, ell).0 / self.grid.h()
    }

    fn kappa(x: f64, k: f64) -> f64 {
        (x.min(0.0) / -k).sqrt()
    }

    /// `(kinetic, centrifugal, potential, mass)` sums of a nodal vector.
    fn quadratic_parts(&self, u: &[f64], ell: u32) -> (f64, f64, f64, f64) {
        let n = self.grid.n;
        let h = self.grid.h();
        let cent = (ell * (ell + 1)) as f64;
        let mut kin = u[0] * u[0] / h;
        let (mut c, mut pot, mut mass) = (0.0, 0.0, 0.0);
        for i in 1..=n {
            if i < n {
                let d = u[i] - u[i - 1];
                kin += d * d / h;
            }
            let w = weight(i, n) * h * u[i - 1] * u[i - 1];
            let r = i as f64 * h;
            c += w * cent / (r * r);
            pot += w * self.vbar[i - 1];
            mass += w;
        }
        (kin, c, pot, mass)
    }

    /// Lowest eigenpair of the matrix with a fixed exterior term; the energy
    /// is the Rayleigh quotient evaluated from differences.
    fn lowest(&self, base: &SymTridiag, beta: f64, k: f64, ell: u32, kappa: f64) -> Eigen {
        let n = self.grid.n;
        let mut m = base.clone();
        m.diag[n - 1] += self.extra(kappa, k, ell);
        let (lo, _) = m.lowest_bracket();
        let mut u = m.inverse_iteration(lo, 0.0, 3);
        u[n - 1] *= SQRT2;
        if u.iter().sum::<f64>() < 0.0 {
            u.iter_mut().for_each(|x| *x = -*x);
        }
        let (kin, cent, pot, mass) = self.quadratic_parts(&u, ell);
        let gamma = self.gamma(kappa, ell).0;
        let boundary = -gamma * u[n - 1] * u[n - 1];
        let energy = (k * (kin + cent + boundary) + beta * pot) / mass;
        Eigen { energy, u, mass }
    }

    /// Whether `k·p² + βV` has a negative eigenvalue on this grid.
    pub fn has_bound_state(&self, beta: f64, k: f64, ell: u32) -> bool {
        if beta == 0.0 || self.v_min == 0.0 {
            return false;
        }
        let m = self.matrix(beta, k, ell);
        m.count_below_with(0.0, self.extra(0.0, k, ell)) >= 1
    }

    pub fn ground_state(&self, beta: f64, k: f64) -> Result<SchrodingerSolution> {
        self.ground_state_ell(beta, k, 0)
    }

    /// Lowest state in partial wave `ell ∈ {0, 1}`.
    pub fn ground_state_ell(&self, beta: f64, k: f64, ell: u32) -> Result<SchrodingerSolution> {
        self.validate(beta, k, ell)?;
        let n = self.grid.n;
        if !self.has_bound_state(beta, k, ell) {
            return Ok(SchrodingerSolution {
                beta_eff: beta,
                kinetic_factor: k,
                ell,
                energy: 0.0,
                kappa: 0.0,
                u: vec![0.0; n + 1],
                exterior_weight: 0.0,
                converged: false,
                reason: Some("no bound state".into()),
                grid: self.grid,
                rayleigh_residual: 0.0,
            });
        }
        let base = self.matrix(beta, k, ell);
        let count = |x: f64| base.count_below_with(x, self.extra(Self::kappa(x, k), k, ell));

        // Bracket the self-consistent energy: count(x) >= 1 exactly above it.
        let mut lo = beta * self.v_min * (1.0 + 1e-9) - f64::MIN_POSITIVE;
        let mut guard = 0;
        while count(lo) > 0 {
            lo *= 2.0;
            guard += 1;
            if guard > 60 {
                return Err(Error::NonConvergence("could not bracket the ground state from below".into()));
            }
        }
        let mut hi = 0.0;
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 4.0 * f64::EPSILON * lo.abs() {
                break;
            }
            if count(mid) >= 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }

        // Newton polish of x = λ₁(κ(x)) using Rayleigh quotients.
        let mut x = 0.5 * (lo + hi);
        let mut eig = self.lowest(&base, beta, k, ell, Self::kappa(x, k));
        for _ in 0..12 {
            let kappa = Self::kappa(x, k);
            let un = eig.u[n - 1];
            let dgamma = self.gamma(kappa, ell).1;
            let dphi = if kappa > 0.0 { un * un * dgamma / (2.0 * eig.mass * kappa) } else { 0.0 };
            let step = (eig.energy - x) / (dphi - 1.0);
            let mut next = x - step;
            if !(next < 0.0 && next.is_finite()) {
                next = 0.5 * x;
            }
            let done = (next - x).abs() <= 4.0 * f64::EPSILON * x.abs();
            x = next;
            eig = self.lowest(&base, beta, k, ell, Self::kappa(x, k));
            if done {
                break;
            }
        }
        let kappa = Self::kappa(x, k);
        let Eigen { energy, mut u, mass } = eig;
        let exterior = self.exterior_integral(kappa, ell)? * u[n - 1] * u[n - 1];
        let norm = (mass + exterior).sqrt();
        u.iter_mut().for_each(|v| *v /= norm);
        u.insert(0, 0.0);

        let mut sol = SchrodingerSolution {
            beta_eff: beta,
            kinetic_factor: k,
            ell,
            energy,
            kappa,
            u,
            exterior_weight: exterior / (mass + exterior),
            converged: true,
            reason: None,
            grid: self.grid,
            rayleigh_residual: 0.0,
        };
        if ell == 0 {
            let (p2, pot) = self.p2_and_potential(&sol);
            let scale = k * p2 + beta * pot.abs();
            sol.rayleigh_residual = (k * p2 + beta * pot - energy).abs() / scale;
        }
        Ok(sol)
    }

    /// `∫_{r_max}^∞ (u/u(r_max))² dr` for the decaying exterior solution.
    fn exterior_integral(&self, kappa: f64, ell: u32) -> Result<f64> {
        if kappa <= 0.0 {
            return Err(Error::NonConvergence("bound state with vanishing decay rate".into()));
        }
        if ell == 0 {
            return Ok(0.5 / kappa);
        }
        let r0 = self.grid.r_max;
        let shape = |r: f64| (1.0 + 1.0 / (kappa * r)) * (-kappa * (r - r0)).exp();
        let s0 = shape(r0);
        let q = Integrator::new(1e-12, 0.0).try_integrate_to_infinity(
            |r| Ok((shape(r) / s0).powi(2)),
            r0,
            &[r0 + 1.0 / kappa],
        )?;
        Ok(q.value)
    }

    /// `(‖pψ‖², (ψ,V̄ψ))` for an s-wave solution, exterior included.
    fn p2_and_potential(&self, sol: &SchrodingerSolution) -> (f64, f64) {
        let n = self.grid.n;
        let (kin, _, pot, _) = self.quadratic_parts(&sol.u[1..], 0);
        let un = sol.u[n];
        (kin + 0.5 * sol.kappa * un * un, pot)
    }

    /// Ground-state energy, zero when there is no bound state.
    pub fn energy(&self, beta: f64, k: f64) -> Result<f64> {
        Ok(self.ground_state(beta, k)?.energy)
    }

    /// Threshold of `p² + βV` on this grid: the coupling at which the
    /// zero-energy (Neumann-closed) problem acquires a zero eigenvalue.
    pub fn threshold(&self) -> Result<f64> {
        if self.v_min == 0.0 {
            return Err(Error::Validation("potential vanishes on the grid".into()));
        }
        let mut hi = 1.0 / self.v_min.abs();
        let mut guard = 0;
        while !self.has_bound_state(hi, 1.0, 0) {
            hi *= 2.0;
            guard += 1;
            if guard > 200 {
                return Err(Error::NonConvergence("no threshold found: potential too weak on this grid".into()));
            }
        }
        let mut lo = 0.0;
        while hi - lo > 1e-12 * hi {
            let mid = 0.5 * (lo + hi);
            if self.has_bound_state(mid, 1.0, 0) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let mut beta = 0.5 * (lo + hi);
        for _ in 0..10 {
            let base = self.matrix(beta, 1.0, 0);
            let eig = self.lowest(&base, beta, 1.0, 0, 0.0);
            let (_, _, pot, mass) = self.quadratic_parts(&eig.u, 0);
            let next = beta - eig.energy / (pot / mass);
            let done = (next - beta).abs() <= 4.0 * f64::EPSILON * beta;
            beta = next;
            if done {
                break;
            }
        }
        Ok(beta)
    }
}

/// Ground state of `k·p² + βV` on `grid`.
pub fn ground_state(p: &Potential, beta: f64, kinetic_factor: f64, grid: &RadialGrid) -> Result<SchrodingerSolution> {
    RadialProblem::new(p, *grid)?.ground_state(beta, kinetic_factor)
}

/// Ground-state energy on `n` and `2n` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RefinedEnergy {
    pub coarse: f64,
    pub fine: f64,
    pub extrapolated: f64,
    pub error: f64,
}

/// Ground state on the refined grid, with a refinement error check: fails if
/// the energy moves by more than `rel_tol·|E|` between `n` and `2n`.
pub fn ground_state_refined(
    p: &Potential,
    beta: f64,
    kinetic_factor: f64,
    grid: &RadialGrid,
    rel_tol: f64,
) -> Result<(SchrodingerSolution, RefinedEnergy)> {
    let coarse = ground_state(p, beta, kinetic_factor, grid)?;
    let fine = ground_state(p, beta, kinetic_factor, &grid.refined())?;
    if coarse.converged != fine.converged {
        return Err(Error::Resolution(format!(
            "bound-state existence at beta = {beta} changes between n = {} and n = {}",
            grid.n,
            2 * grid.n
        )));
    }
    let shift = (fine.energy - coarse.energy).abs();
    if fine.converged && shift > rel_tol * fine.energy.abs() {
        return Err(Error::Resolution(format!(
            "energy shifts by {shift:.3e} between n = {} and n = {} (tolerance {:.1e} relative)",
            grid.n,
            2 * grid.n,
            rel_tol
        )));
    }
    let refined = RefinedEnergy {
        coarse: coarse.energy,
        fine: fine.energy,
        extrapolated: (4.0 * fine.energy - coarse.energy) / 3.0,
        error: shift / 3.0,
    };
    Ok((fine, refined))
}

/// Largest Birman–Schwinger eigenvalue in the s-wave on `[0, r_max]` with
/// `n` midpoint cells; returns its inverse.
fn birman_schwinger_threshold(p: &Potential, r_max: f64, n: usize) -> Result<f64> {
    let h = r_max / n as f64;
    let mid: Vec<f64> = (0..n).map(|j| (j as f64 + 0.5) * h).collect();
    let root: Vec<f64> = (0..n).map(|j| p.cell_average(j as f64 * h, (j + 1) as f64 * h).abs().sqrt()).collect();
    // (Kx)_i = √|V_i| h Σ_j min(r_i, r_j) √|V_j| x_j in O(n)
    let apply = |x: &[f64], out: &mut [f64]| {
        let mut tail: f64 = x.iter().zip(&root).map(|(a, b)| a * b).sum();
        let mut head = 0.0;
        for i in 0..n {
            let w = root[i] * x[i];
            head += mid[i] * w;
            tail -= w;
            out[i] = h * root[i] * (head + mid[i] * tail);
        }
    };
    let mut x = root.clone();
    let norm0 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm0 == 0.0 {
        return Err(Error::Validation("potential vanishes on the grid".into()));
    }
    x.iter_mut().for_each(|v| *v /= norm0);
    let mut y = vec![0.0; n];
    let mut mu = 0.0;
    for it in 0..5000 {
        apply(&x, &mut y);
        let next: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().zip(&y).for_each(|(a, b)| *a = b / norm);
        if it > 2 && (next - mu).abs() <= 1e-15 * next {
            return Ok(1.0 / next);
        }
        mu = next;
    }
    Err(Error::NonConvergence("Birman–Schwinger power iteration did not settle".into()))
}

/// Coupling threshold `λ₀` from two independent discretizations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Threshold {
    /// Operative value: the finite-difference threshold, consistent with the
    /// energies returned by [`RadialProblem`] on the same grid.
    pub lambda0: f64,
    pub lambda0_fd: f64,
    pub lambda0_bs: f64,
    /// Richardson extrapolation of the Birman–Schwinger value over `n`, `2n`.
    pub lambda0_bs_extrapolated: f64,
    pub bs_error: f64,
    /// `|λ_BS(r_max/2) − λ_BS(r_max)| / λ_BS(r_max)` at fixed spacing.
    pub rmax_sensitivity: f64,
    /// `|λ_BS,extrapolated − λ_FD| / λ_FD`.
    pub discrepancy: f64,
}

pub const THRESHOLD_CONSISTENCY: f64 = 1e-3;

pub fn coupling_threshold(p: &Potential, grid: &RadialGrid) -> Result<Threshold> {
    let bs = birman_schwinger_threshold(p, grid.r_max, grid.n)?;
    let bs2 = birman_schwinger_threshold(p, grid.r_max, 2 * grid.n)?;
    let half = birman_schwinger_threshold(p, 0.5 * grid.r_max, grid.n / 2)?;
    let extrapolated = (4.0 * bs2 - bs) / 3.0;
    let fd = RadialProblem::new(p, *grid)?.threshold()?;
    let discrepancy = (extrapolated - fd).abs() / fd;
    if discrepancy > THRESHOLD_CONSISTENCY {
        return Err(Error::Consistency(format!(
            "Birman–Schwinger threshold {extrapolated:.8} and finite-difference threshold {fd:.8} differ by {discrepancy:.2e}"
        )));
    }
    Ok(Threshold {
        lambda0: fd,
        lambda0_fd: fd,
        lambda0_bs: bs,
        lambda0_bs_extrapolated: extrapolated,
        bs_error: (bs2 - bs).abs() / 3.0,
        rmax_sensitivity: (half - bs).abs() / bs,
        discrepancy,
    })
}

/// Coefficient `b` of `E(β) = −b(β−λ₀)² + O((β−λ₀)³)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KlausSimon {
    pub b: f64,
    pub b_error: f64,
    /// Estimated coefficient `c` of the `c(β−λ₀)³` correction to `−E`.
    pub cubic_correction: f64,
    /// Least-squares slope of `ln(−E)` against `ln(β−λ₀)` over the ladder.
    pub loglog_slope: f64,
    /// `(β, E(β))` on the ladder `β = λ₀(1 + 0.1·2⁻ᵏ)`, `k = 0..6`.
    pub ladder: Vec<(f64, f64)>,
}

pub fn klaus_simon_b(problem: &RadialProblem, lambda0: f64) -> Result<KlausSimon> {
    let deltas: Vec<f64> = (0..7).map(|k| 0.1 * 0.5f64.powi(k)).collect();
    let mut ladder = Vec::with_capacity(deltas.len());
    let mut q = Vec::with_capacity(deltas.len());
    for &d in &deltas {
        let beta = lambda0 * (1.0 + d);
        let sol = problem.ground_state(beta, 1.0)?;
        if !sol.converged {
            return Err(Error::NoBoundState { lambda: beta, kinetic: 1.0 });
        }
        ladder.push((beta, sol.energy));
        q.push(-sol.energy / (beta - lambda0).powi(2));
    }
    // Richardson tableau in δ with ratio 2
    let m = q.len();
    let mut t = vec![q.clone()];
    for j in 1..m {
        let f = 2f64.powi(j as i32) - 1.0;
        let prev = &t[j - 1];
        let row: Vec<f64> = (1..prev.len()).map(|i| prev[i] + (prev[i] - prev[i - 1]) / f).collect();
        t.push(row);
    }
    let order = 4;
    let b = *t[order].last().unwrap();
    let b_error = (b - t[order - 1].last().unwrap()).abs() + (b - t[order][t[order].len() - 2]).abs();
    if !(b > 0.0) {
        return Err(Error::Assumption(format!(
            "quadratic threshold expansion not visible at this resolution (b = {b:.3e})"
        )));
    }
    let cubic_correction = (q[m - 2] - q[m - 1]) / (lambda0 * (deltas[m - 2] - deltas[m - 1]));
    let xs: Vec<f64> = ladder.iter().map(|(beta, _)| (beta - lambda0).ln()).collect();
    let ys: Vec<f64> = ladder.iter().map(|(_, e)| (-e).ln()).collect();
    let loglog_slope = linear_fit(&xs, &ys).0;
    Ok(KlausSimon { b, b_error, cubic_correction, loglog_slope, ladder })
}

/// Least-squares `(slope, intercept, R²)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

/// `|e_λ| = −(1−g)·E(λ/(1−g))`.
pub fn binding_energy(problem: &RadialProblem, lambda: f64, g: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&g) {
        return Err(Error::Validation(format!("g must lie in [0, 1) (got {g})")));
    }
    if !(lambda > 0.0) {
        return Err(Error::Validation(format!("lambda must be positive (got {lambda})")));
    }
    let sol = problem.ground_state(lambda / (1.0 - g), 1.0)?;
    if !sol.converged {
        return Err(Error::NoBoundState { lambda, kinetic: 1.0 - g });
    }
    Ok(-(1.0 - g) * sol.energy)
}

/// Ground-state expectation values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Observables {
    /// `‖pψ‖²`
    pub p2: f64,
    /// `(ψ, ΔV ψ)`; absent when `ΔV` is only a distribution.
    pub delta_v: Option<f64>,
    /// `(ψ, |V| ψ)`
    pub abs_v: f64,
    /// `|E|`
    pub e_abs: f64,
    /// `|β·absV − k·p2 − |E|| / |E|`
    pub identity_residual: f64,
}

pub const IDENTITY_TOLERANCE: f64 = 1e-4;

pub fn observables(sol: &SchrodingerSolution, p: &Potential) -> Result<Observables> {
    if !sol.converged || sol.energy >= 0.0 {
        return Err(Error::Validation("observables need a bound state".into()));
    }
    if sol.ell != 0 {
        return Err(Error::Validation("observables are defined for the s-wave ground state".into()));
    }
    let grid = sol.grid;
    let n = grid.n;
    let h = grid.h();
    let vbar = cell_averages(p, &grid);
    let mut kin = 0.0;
    let mut abs_v = 0.0;
    let mut delta = Some(0.0);
    for i in 1..=n {
        let d = sol.u[i] - sol.u[i - 1];
        kin += d * d / h;
        let w = weight(i, n) * h * sol.u[i] * sol.u[i];
        abs_v += w * vbar[i - 1].abs();
        delta = match (delta, p.laplacian(i as f64 * h)) {
            (Some(acc), Some(l)) => Some(acc + w * l),
            _ => None,
        };
    }
    let un = sol.u[n];
    let p2 = kin + 0.5 * sol.kappa * un * un;
    let e_abs = -sol.energy;
    let identity_residual = (sol.beta_eff * abs_v - sol.kinetic_factor * p2 - e_abs).abs() / e_abs;
    if identity_residual > IDENTITY_TOLERANCE {
        return Err(Error::Resolution(format!(
            "eigenvalue identity residual {identity_residual:.3e} exceeds {IDENTITY_TOLERANCE:.0e}"
        )));
    }
    Ok(Observables { p2, delta_v: delta, abs_v, e_abs, identity_residual })
}

/// Observables on the refined grid with `|fine − coarse|` as error bars.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObservablesWithError {
    pub value: Observables,
    pub p2_error: f64,
    pub abs_v_error: f64,
    pub delta_v_error: Option<f64>,
    pub e_abs_error: f64,
}

pub fn observables_with_error(
    p: &Potential,
    beta: f64,
    kinetic_factor: f64,
    grid: &RadialGrid,
) -> Result<ObservablesWithError> {
    let coarse = observables(&ground_state(p, beta, kinetic_factor, grid)?, p)?;
    let fine = observables(&ground_state(p, beta, kinetic_factor, &grid.refined())?, p)?;
    Ok(ObservablesWithError {
        value: fine,
        p2_error: (fine.p2 - coarse.p2).abs(),
        abs_v_error: (fine.abs_v - coarse.abs_v).abs(),
        delta_v_error: fine.delta_v.zip(coarse.delta_v).map(|(a, b)| (a - b).abs()),
        e_abs_error: (fine.e_abs - coarse.e_abs).abs(),
    })
}

/// Constant bounding `|(ψ, ΔV ψ)| ≤ C (ψ, |V| ψ)` for compactly supported `V`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupportBound {
    pub c: f64,
    /// Largest `max ψ / min ψ` over the support, across the sampled couplings.
    pub rho_max: f64,
    pub laplacian_l1: f64,
    pub l1: f64,
}

/// Bound from two-sided control of `ψ = u/r` on the support of `V`, for
/// couplings `β ∈ [λ₀, λ₀/(1−g_max)]`, with `λ₀` the threshold on `grid`.
pub fn lemma5_constant(p: &Potential, grid: &RadialGrid, g_max: f64) -> Result<SupportBound> {
    let support = p
        .support_radius()
        .ok_or_else(|| Error::Assumption("assumption (iii') not satisfied: V does not have compact support".into()))?;
    let lap_l1 = laplacian_l1(p)?
        .ok_or_else(|| Error::Assumption("assumption (iii') not satisfied: ΔV is not a function".into()))?;
    if !(0.0..1.0).contains(&g_max) {
        return Err(Error::Validation(format!("g_max must lie in [0, 1) (got {g_max})")));
    }
    let l1 = norms(p)?.l1;
    let problem = RadialProblem::new(p, *grid)?;
    let lambda0 = problem.threshold()?;
    let top = lambda0 / (1.0 - g_max);
    let samples = 9;
    let mut rho_max: f64 = 1.0;
    for j in 0..samples {
        let beta =
            if j == 0 { lambda0 * (1.0 + 1e-8) } else { lambda0 + (top - lambda0) * j as f64 / (samples - 1) as f64 };
        let sol = problem.ground_state(beta, 1.0)?;
        if !sol.converged {
            return Err(Error::NoBoundState { lambda: beta, kinetic: 1.0 });
        }
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 1..=grid.n {
            let r = grid.node(i);
            if r >= support {
                break;
            }
            let psi = sol.u[i] / r;
            lo = lo.min(psi);
            hi = hi.max(psi);
        }
        if !(lo > 0.0) {
            return Err(Error::Resolution("ground state not resolved as positive on the support".into()));
        }
        rho_max = rho_max.max(hi / lo);
    }
    Ok(SupportBound { c: rho_max * rho_max * lap_l1 / l1, rho_max, laplacian_l1: lap_l1, l1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{make_potential, Family, PotentialParams};

    fn square() -> Potential {
        make_potential(Family::SquareWell, &PotentialParams { v0: 1.0, sigma: 1.0, ..Default::default() }).unwrap()
    }

    fn bump() -> Potential {
        make_potential(Family::BumpWell, &PotentialParams { v0: 1.0, sigma: 1.0, ..Default::default() }).unwrap()
    }

    fn grid() -> RadialGrid {
        RadialGrid::new(40.0, 4000).unwrap()
    }

    /// Square-well s-wave energy from `q·cot(q) = −κ`, `q² + κ² = λ`.
    fn shooting_energy(lambda: f64) -> f64 {
        let f = |kappa: f64| {
            let q = (lambda - kappa * kappa).sqrt();
            q / q.tan() + kappa
        };
        let (mut lo, mut hi) = (1e-12, lambda.sqrt() - 1e-12);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid).signum() == f(lo).signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let kappa = 0.5 * (lo + hi);
        -kappa * kappa
    }

    #[test]
    fn zero_coupling_has_no_bound_state() {
        let sol = ground_state(&square(), 0.0, 1.0, &grid()).unwrap();
        assert!(!sol.converged);
        assert_eq!(sol.energy, 0.0);
        assert_eq!(sol.reason.as_deref(), Some("no bound state"));
    }

    #[test]
    fn square_well_energy_matches_shooting() {
        let lambda = 3.7;
        let sol = ground_state(&square(), lambda, 1.0, &grid()).unwrap();
        let exact = shooting_energy(lambda);
        assert!(sol.converged);
        assert!((sol.energy - exact).abs() < 1e-4 * exact.abs(), "{} vs {exact}", sol.energy);
        assert!(sol.rayleigh_residual < 1e-8);
        assert_eq!(sol.u[0], 0.0);
        assert!(sol.u.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn energy_converges_at_second_order() {
        let lambda = 3.7;
        let exact = shooting_energy(lambda);
        let e1 = ground_state(&square(), lambda, 1.0, &RadialGrid::new(40.0, 2000).unwrap()).unwrap().energy;
        let e2 = ground_state(&square(), lambda, 1.0, &RadialGrid::new(40.0, 4000).unwrap()).unwrap().energy;
        let ratio = (e1 - exact) / (e2 - exact);
        assert!((ratio - 4.0).abs() < 0.5, "ratio {ratio}");
    }

    #[test]
    fn below_threshold_has_no_bound_state() {
        let t = coupling_threshold(&square(), &grid()).unwrap();
        let sol = ground_state(&square(), 0.99 * t.lambda0, 1.0, &grid()).unwrap();
        assert!(!sol.converged);
        let sol = ground_state(&square(), 1.01 * t.lambda0, 1.0, &grid()).unwrap();
        assert!(sol.converged && sol.energy < 0.0);
    }

    #[test]
    fn threshold_of_square_well() {
        let t = coupling_threshold(&square(), &grid()).unwrap();
        let exact = std::f64::consts::PI.powi(2) / 4.0;
        assert!((t.lambda0 - exact).abs() < 1e-4 * exact, "{t:?}");
        assert!((t.lambda0_bs_extrapolated - exact).abs() < 1e-6 * exact, "{t:?}");
        assert!(t.rmax_sensitivity < 1e-12);
    }

    #[test]
    fn p_wave_lies_above_s_wave() {
        let problem = RadialProblem::new(&square(), grid()).unwrap();
        let s = problem.ground_state_ell(30.0, 1.0, 0).unwrap();
        let p = problem.ground_state_ell(30.0, 1.0, 1).unwrap();
        assert!(p.converged && s.converged);
        assert!(p.energy > s.energy);
        assert!(!problem.has_bound_state(9.0, 1.0, 1));
    }

    #[test]
    fn kinetic_factor_scales_energy() {
        let problem = RadialProblem::new(&square(), grid()).unwrap();
        let g = 0.1;
        let a = problem.ground_state(3.0, 1.0 - g).unwrap().energy;
        let b = problem.ground_state(3.0 / (1.0 - g), 1.0).unwrap().energy;
        assert!((a - (1.0 - g) * b).abs() < 1e-12 * a.abs());
    }

    #[test]
    fn eigen_identity_and_observables() {
        let sol = ground_state(&bump(), 40.0, 0.95, &grid()).unwrap();
        let obs = observables(&sol, &bump()).unwrap();
        assert!(obs.identity_residual < 1e-8);
        assert!(obs.p2 > 0.0);
        assert!(obs.delta_v.unwrap().is_finite());
    }

    #[test]
    fn klaus_simon_law_for_square_well() {
        let problem = RadialProblem::new(&square(), grid()).unwrap();
        let l0 = problem.threshold().unwrap();
        let ks = klaus_simon_b(&problem, l0).unwrap();
        assert!(ks.b > 0.0);
        assert!((1.9..=2.1).contains(&ks.loglog_slope), "{}", ks.loglog_slope);
        // analytic: κ ≈ (β−λ₀)/2 at σ = 1, so b = 1/4
        assert!((ks.b - 0.25).abs() < 1e-3, "{}", ks.b);
    }

    #[test]
    fn binding_energy_grows_with_g() {
        let problem = RadialProblem::new(&square(), grid()).unwrap();
        let l0 = problem.threshold().unwrap();
        let e1 = binding_energy(&problem, l0, 0.01).unwrap();
        let e2 = binding_energy(&problem, l0, 0.02).unwrap();
        assert!(e1 > 0.0 && e2 > e1);
        assert!(matches!(binding_energy(&problem, 0.9 * l0, 0.01), Err(Error::NoBoundState { .. })));
    }

    #[test]
    fn refinement_check() {
        let (_, r) = ground_state_refined(&square(), 3.7, 1.0, &grid(), 1e-3).unwrap();
        assert!(r.error < 1e-5);
        let coarse = RadialGrid::new(40.0, 100).unwrap();
        assert!(matches!(ground_state_refined(&square(), 3.7, 1.0, &coarse, 1e-8), Err(Error::Resolution(_))));
    }

    #[test]
    fn lemma5_constant_is_stable() {
        let g = RadialGrid::new(40.0, 4000).unwrap();
        let c1 = lemma5_constant(&bump(), &g, 0.05).unwrap();
        let c2 = lemma5_constant(&bump(), &g.refined(), 0.05).unwrap();
        assert!(c1.c >= c1.laplacian_l1 / c1.l1);
        assert!((c1.c - c2.c).abs() < 0.05 * c2.c);
        assert!(lemma5_constant(&square(), &g, 0.05).is_err());
    }

    #[test]
    fn grid_must_reach_the_tail() {
        let poly =
            make_potential(Family::PolyWell, &PotentialParams { v0: 1.0, sigma: 1.0, s: Some(2.0), table: None })
                .unwrap();
        assert!(matches!(RadialProblem::new(&poly, RadialGrid::new(10.0, 1000).unwrap()), Err(Error::Resolution(_))));
        let g = RadialGrid::for_potential(&poly, 1000).unwrap();
        assert!(RadialProblem::new(&poly, g).is_ok());
    }
}
