use std::time::Instant;

use qed_binding::certificate::{screened_operator_bound, BindingProblem, FINE_STRUCTURE};
use qed_binding::photon::{
    mc_mode_oracle, one_photon_integral, self_energy, shifted_field_closed_form, two_photon_integral, Numerator,
    OneDenominator, OnePhotonKernel, OracleTarget, TwoDenominator, TwoPhotonKernel, TwoPhotonTable,
};
use qed_binding::potential::{check_assumptions, norms, Potential};
use qed_binding::schrodinger::{
    coupling_threshold, klaus_simon_b, linear_fit, observables_with_error, RadialGrid, RadialProblem,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::report::{
    Check, Command, ConstantsEntry, CsvFile, PotentialSection, RunOutput, RunReport, ThresholdSection, Timing,
};

struct Run {
    report: RunReport,
    tables: Vec<CsvFile>,
    start: Instant,
    stages: Vec<(String, f64)>,
}

impl Run {
    fn new(command: Command, cfg: &RunConfig) -> Self {
        Self {
            report: RunReport::new(command, cfg.clone()),
            tables: Vec::new(),
            start: Instant::now(),
            stages: Vec::new(),
        }
    }

    fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.stages.push((name.to_string(), t.elapsed().as_secs_f64()));
        out
    }

    fn table<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<()> {
        self.tables.push(CsvFile::from_rows(name, rows)?);
        Ok(())
    }

    fn check(&mut self, name: impl Into<String>, value: f64, reference: f64, tolerance: f64) {
        let deviation = if reference == 0.0 { value.abs() } else { ((value - reference) / reference).abs() };
        self.push(name.into(), value, reference, deviation, tolerance);
    }

    fn push(&mut self, name: String, value: f64, reference: f64, deviation: f64, tolerance: f64) {
        let passed = deviation <= tolerance;
        self.report.checks.push(Check { name, passed, value, reference, deviation, tolerance });
    }

    fn finish(mut self, outcome: Result<()>) -> RunOutput {
        if let Err(e) = outcome {
            let code = e.exit_code();
            self.report.status.failures.push(e.to_string());
            self.report.status.exit_code = self.report.status.exit_code.max(code);
        }
        let timing = Timing {
            command: self.report.command,
            threads: rayon::current_num_threads(),
            total_seconds: self.start.elapsed().as_secs_f64(),
            stages: self.stages,
        };
        RunOutput { report: self.report, tables: self.tables, timing }
    }
}

fn setup(run: &mut Run, cfg: &RunConfig) -> Result<(Potential, RadialGrid)> {
    let p = cfg.build_potential()?;
    let grid = cfg.build_grid(&p)?;
    let norms = run.stage("norms", || norms(&p))?;
    run.report.potential = Some(PotentialSection { grid, norms, assumptions: check_assumptions(&p) });
    Ok((p, grid))
}

fn binding_problem(run: &mut Run, cfg: &RunConfig, p: &Potential, grid: RadialGrid) -> Result<BindingProblem> {
    let table = run.stage("photon_table", TwoPhotonTable::compute)?;
    run.report.photon_table = Some(table);
    run.stage("binding_problem", || BindingProblem::with_table(p, grid, cfg.knobs(), table)).map_err(CliError::from)
}

#[derive(Serialize)]
struct EnergyRow {
    beta: f64,
    delta_rel: f64,
    energy: f64,
}

/// `λ₀` by both methods, `b(V)` and its stability under grid doubling.
pub fn cmd_threshold(cfg: &RunConfig) -> RunOutput {
    let mut run = Run::new(Command::Threshold, cfg);
    let outcome = threshold_body(&mut run, cfg);
    run.finish(outcome)
}

fn threshold_body(run: &mut Run, cfg: &RunConfig) -> Result<()> {
    let (p, grid) = setup(run, cfg)?;
    let threshold = run.stage("threshold", || coupling_threshold(&p, &grid))?;
    let problem = RadialProblem::new(&p, grid)?;
    let ks = run.stage("klaus_simon", || klaus_simon_b(&problem, threshold.lambda0))?;
    let rows: Vec<EnergyRow> = ks
        .ladder
        .iter()
        .map(|&(beta, energy)| EnergyRow { beta, delta_rel: beta / threshold.lambda0 - 1.0, energy })
        .collect();
    run.table("energy_beta.csv", &rows)?;
    let fine = run.stage("klaus_simon_refined", || -> Result<f64> {
        let fine = RadialProblem::new(&p, grid.refined())?;
        let l0 = fine.threshold()?;
        Ok(klaus_simon_b(&fine, l0)?.b)
    })?;
    let b_stability = (fine - ks.b).abs() / ks.b;
    run.report.threshold = Some(ThresholdSection { threshold, klaus_simon: ks, b_refined: fine, b_stability });
    Ok(())
}

#[derive(Serialize)]
struct GRow {
    alpha: f64,
    g: f64,
    g_over_alpha: f64,
    iterations: usize,
    a: f64,
    beta: f64,
    c_of_v: f64,
    mu: f64,
    c1: f64,
    c3: f64,
    c4: f64,
    c5: f64,
    c6: f64,
    t2: f64,
    momentum_coefficient_relative: f64,
}

/// `g(α)` and every constant at each configured `α`.
pub fn cmd_constants(cfg: &RunConfig) -> RunOutput {
    let mut run = Run::new(Command::Constants, cfg);
    let outcome = constants_body(&mut run, cfg);
    run.finish(outcome)
}

fn constants_body(run: &mut Run, cfg: &RunConfig) -> Result<()> {
    let (p, grid) = setup(run, cfg)?;
    let bp = binding_problem(run, cfg, &p, grid)?;
    let lambda0 = bp.lambda0();
    let mut rows = Vec::new();
    for &alpha in &cfg.alphas {
        let step = run.stage(&format!("solve_g {alpha:e}"), || -> Result<ConstantsEntry> {
            let solution = bp.solve_g(alpha, lambda0)?;
            let screened_bound = screened_operator_bound(&p, lambda0, solution.g)?;
            Ok(ConstantsEntry { solution, screened_bound })
        });
        match step {
            Ok(entry) => {
                let s = &entry.solution;
                let c = &s.constants;
                rows.push(GRow {
                    alpha,
                    g: s.g,
                    g_over_alpha: s.g / alpha,
                    iterations: s.iterations,
                    a: c.a,
                    beta: c.beta,
                    c_of_v: c.c_of_v,
                    mu: c.mu,
                    c1: c.photon.c1.value,
                    c3: c.photon.c3.value,
                    c4: c.photon.c4.value,
                    c5: c.photon.c5.value,
                    c6: c.photon.c6.value,
                    t2: c.photon.t2.value,
                    momentum_coefficient_relative: s.momentum_coefficient_relative,
                });
                run.report.constants.push(entry);
            }
            Err(e) => run.report.fail(format!("alpha = {alpha:e}: {e}")),
        }
    }
    run.table("g_alpha.csv", &rows)
}

#[derive(Serialize)]
struct SelfEnergyRow {
    alpha: f64,
    first_order: f64,
    t2: f64,
    t2_error: f64,
    value: f64,
    band: f64,
}

/// `E(α,0)` through second order with its third-order band.
pub fn cmd_selfenergy(cfg: &RunConfig) -> RunOutput {
    let mut run = Run::new(Command::Selfenergy, cfg);
    let outcome = selfenergy_body(&mut run, cfg);
    run.finish(outcome)
}

fn selfenergy_body(run: &mut Run, cfg: &RunConfig) -> Result<()> {
    let table = run.stage("photon_table", TwoPhotonTable::compute)?;
    run.report.photon_table = Some(table);
    let mut rows = Vec::new();
    for &alpha in &cfg.alphas {
        let e = self_energy(&table, alpha, cfg.knobs.c_self)?;
        rows.push(SelfEnergyRow {
            alpha,
            first_order: e.first_order,
            t2: e.t2.value,
            t2_error: e.t2.error,
            value: e.value,
            band: e.band,
        });
        run.report.self_energy.push(e);
    }
    run.table("self_energy.csv", &rows)
}

#[derive(Serialize)]
struct WindowRow {
    alpha: f64,
    g: f64,
    lambda0: f64,
    nominal_min: f64,
    lambda_min: Option<f64>,
    margin_at_lambda0: f64,
    coverage: f64,
    certified: bool,
}

#[derive(Serialize)]
struct MarginRow {
    alpha: f64,
    lambda: f64,
    e_abs: f64,
    margin: f64,
}

/// Certified window per `α`, the margin(λ) curves and `α*`.
pub fn cmd_window(cfg: &RunConfig) -> RunOutput {
    let mut run = Run::new(Command::Window, cfg);
    let outcome = window_body(&mut run, cfg);
    run.finish(outcome)
}

fn window_body(run: &mut Run, cfg: &RunConfig) -> Result<()> {
    let (p, grid) = setup(run, cfg)?;
    let bp = binding_problem(run, cfg, &p, grid)?;
    let mut rows = Vec::new();
    let mut curve = Vec::new();
    let mut all_certified = true;
    for &alpha in &cfg.alphas {
        let w = match run.stage(&format!("window {alpha:e}"), || bp.binding_window(alpha)) {
            Ok(w) => w,
            Err(e) => {
                run.report.fail(format!("alpha = {alpha:e}: {e}"));
                continue;
            }
        };
        all_certified &= w.at_lambda0.certified;
        rows.push(WindowRow {
            alpha,
            g: w.g,
            lambda0: w.lambda0,
            nominal_min: w.nominal_min,
            lambda_min: w.lambda_min,
            margin_at_lambda0: w.at_lambda0.margin,
            coverage: w.coverage,
            certified: w.at_lambda0.certified,
        });
        let n = cfg.window.lambda_points;
        for j in 1..=n {
            let lambda = w.nominal_min + (w.lambda0 - w.nominal_min) * j as f64 / n as f64;
            if let Ok(c) = bp.margin(alpha, lambda) {
                curve.push(MarginRow { alpha, lambda, e_abs: c.e_abs, margin: c.margin });
            }
        }
        run.report.windows.push(w);
    }
    run.table("window.csv", &rows)?;
    run.table("margin_lambda.csv", &curve)?;
    if cfg.window.critical_alpha {
        let ca = run.stage("critical_alpha", || bp.critical_alpha())?;
        run.report.critical_alpha = Some(ca);
    }
    if !all_certified {
        run.report.not_certified();
    }
    Ok(())
}

/// Every Monte-Carlo oracle and invariant; exit code 2 if any check fails.
pub fn cmd_verify(cfg: &RunConfig) -> RunOutput {
    let mut run = Run::new(Command::Verify, cfg);
    let outcome = verify_body(&mut run, cfg);
    if run.report.checks.iter().any(|c| !c.passed) {
        let failed: Vec<String> = run.report.checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
        run.report.fail(format!("failed checks: {}", failed.join(", ")));
    }
    run.finish(outcome)
}

fn oracle_checks(run: &mut Run, cfg: &RunConfig, g: f64, mu: f64) -> Result<()> {
    let samples = cfg.tolerances.mc_samples;
    let kin = OneDenominator::Kinetic { g };
    let one = [
        ("one_photon kinetic n=1", OnePhotonKernel::new(kin, mu, 0.0, 1)),
        ("one_photon kinetic n=2", OnePhotonKernel::new(kin, mu, 0.0, 2)),
        ("one_photon field n=1", OnePhotonKernel::new(OneDenominator::FieldEnergy, 0.0, 0.0, 1)),
        ("one_photon field n=2 a=0.05", OnePhotonKernel::new(OneDenominator::FieldEnergy, 0.0, 0.05, 2)),
    ];
    let two = [
        ("two_photon T2", TwoPhotonKernel::new(Numerator::Unit, TwoDenominator::Full, 1)),
        ("two_photon C1", TwoPhotonKernel::new(Numerator::MomentumSquared, TwoDenominator::Full, 2)),
        ("two_photon Hf n=1", TwoPhotonKernel::new(Numerator::Unit, TwoDenominator::FieldEnergy, 1)),
        ("two_photon Hf n=2", TwoPhotonKernel::new(Numerator::Unit, TwoDenominator::FieldEnergy, 2)),
        ("two_photon T2 alpha=2", TwoPhotonKernel::new(Numerator::Unit, TwoDenominator::Full, 1).with_alpha(2.0)),
        (
            "two_photon C1 alpha=2",
            TwoPhotonKernel::new(Numerator::MomentumSquared, TwoDenominator::Full, 2).with_alpha(2.0),
        ),
    ];
    let mut targets: Vec<(String, OracleTarget, f64)> = Vec::new();
    for (name, k) in one {
        targets.push((name.into(), OracleTarget::OnePhoton(k), one_photon_integral(&k)?.value));
    }
    for (name, k) in two {
        targets.push((name.into(), OracleTarget::TwoPhoton(k), two_photon_integral(&k)?.value));
    }
    for (i, (name, target, value)) in targets.into_iter().enumerate() {
        let seed = cfg.seed.wrapping_add(i as u64);
        let mc = run.stage(&format!("oracle {name}"), || mc_mode_oracle(&target, samples, seed))?;
        let sigmas = mc.deviation_in_sigmas(value);
        run.push(format!("oracle {name}"), mc.estimate, value, sigmas, cfg.tolerances.oracle_sigmas);
    }
    for a in [1e-12, 1e-6, 1e-3, 0.1, 1.0] {
        let q = one_photon_integral(&OnePhotonKernel::new(OneDenominator::FieldEnergy, 0.0, a, 2))?.value;
        run.check(format!("closed form n=2 a={a:e}"), q, shifted_field_closed_form(a), 1e-10);
    }
    Ok(())
}

fn verify_body(run: &mut Run, cfg: &RunConfig) -> Result<()> {
    let (p, grid) = setup(run, cfg)?;
    let tol = cfg.tolerances.scaling;

    let table = run.stage("photon_table", TwoPhotonTable::compute)?;
    run.report.photon_table = Some(table);
    let alpha_ref = cfg.alphas[0];
    let e = self_energy(&table, alpha_ref, cfg.knobs.c_self)?;
    run.check("self-energy first-order coefficient", e.first_order, 1.0 / std::f64::consts::PI, 1e-15);
    run.push("T2 positive".into(), table.t2_0.value, 0.0, f64::from(u8::from(table.t2_0.value <= 0.0)), 0.0);

    let lambda0 = run.stage("threshold", || coupling_threshold(&p, &grid))?.lambda0;
    let s0 = 2.0;
    let scaled = RadialProblem::new(&p.rescaled(s0), grid.scaled(s0))?.threshold()?;
    run.check("threshold scaling V(r/2)", scaled, lambda0 / (s0 * s0), tol);
    let amplified = RadialProblem::new(&p.amplified(3.0), grid)?.threshold()?;
    run.check("threshold scaling 3V", amplified, lambda0 / 3.0, tol);
    let rollnik = norms(&p)?.rollnik_sq;
    let rollnik_scaled = norms(&p.rescaled(s0))?.rollnik_sq;
    run.check("rollnik scaling V(r/2)", rollnik_scaled, s0.powi(4) * rollnik, tol);

    let problem = RadialProblem::new(&p, grid)?;
    let ks = run.stage("klaus_simon", || klaus_simon_b(&problem, lambda0))?;
    run.push("Klaus-Simon slope".into(), ks.loglog_slope, 2.0, (ks.loglog_slope - 2.0).abs(), 0.1);

    let (g, mu) = match BindingProblem::with_table(&p, grid, cfg.knobs(), table) {
        Ok(bp) => {
            let mut gs = Vec::new();
            for &alpha in &cfg.alphas {
                let s = bp.solve_g(alpha, bp.lambda0())?;
                run.push(format!("g <= alpha at {alpha:e}"), s.g, alpha, (s.g / alpha - 1.0).max(0.0), 1e-12);
                run.push(
                    format!("momentum coefficient at {alpha:e}"),
                    s.momentum_coefficient,
                    0.0,
                    s.momentum_coefficient_relative,
                    1e-10,
                );
                gs.push(s.g);
            }
            if cfg.alphas.len() >= 3 {
                let (slope, _, r2) = linear_fit(&cfg.alphas, &gs);
                run.push("g linear in alpha (R^2)".into(), r2, 1.0, 1.0 - r2, 1e-3);
                run.push("g slope positive".into(), slope, 0.0, f64::from(u8::from(slope <= 0.0)), 0.0);
            }
            let s = bp.solve_g(alpha_ref, bp.lambda0())?;
            let beta = 1.05 * bp.lambda0();
            let obs = run.stage("eigen identity", || observables_with_error(&p, beta, 1.0 - s.g, &grid))?;
            run.check("eigen identity at 1.05 lambda0", obs.value.identity_residual, 0.0, 1e-4);
            let ca = run.stage("critical_alpha", || bp.critical_alpha())?;
            run.push(
                "critical alpha positive".into(),
                ca.alpha_star,
                FINE_STRUCTURE,
                f64::from(u8::from(ca.alpha_star <= 0.0)),
                0.0,
            );
            (s.g, s.constants.mu)
        }
        Err(e) => {
            run.report.status.failures.push(format!("certificate checks skipped: {e}"));
            (0.0, 0.5)
        }
    };
    oracle_checks(run, cfg, g, mu)
}
