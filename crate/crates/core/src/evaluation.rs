//! Value of the approximate saddle point, guaranteed results and error
//! reports across `ε`.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::asymptotics::{approximate_feedback, AsymptoticSolution};
use crate::error::{Error, Result};
use crate::exact::{exact_feedback, solve_exact, ExactSolution};
use crate::game_model::{Dimensions, GameSpec};
use crate::linalg::quad_form;
use crate::ode::{integrate_terminal, IntegratorConfig, MatrixTrajectory};
use crate::parallel::{self, Execution};
use crate::simulator::{simulate, FeedbackLaw};

/// Anything that can play the role of `K₀(t, ε)` in the evaluation problems.
pub trait GainSource: Sync {
    fn k0(&self, epsilon: f64, t: f64) -> DMatrix<f64>;
    /// `ε⁻² Bᵀ K₀(t, ε)`.
    fn bt_k0_over_eps2(&self, epsilon: f64, t: f64) -> DMatrix<f64>;

    /// `S_u(ε) K₀(t, ε)`.
    fn su_k0(&self, epsilon: f64, t: f64) -> DMatrix<f64> {
        let btk = self.bt_k0_over_eps2(epsilon, t);
        let s = btk.ncols();
        let mut out = DMatrix::zeros(s, s);
        out.view_mut((s - btk.nrows(), 0), btk.shape()).copy_from(&btk);
        out
    }
}

impl GainSource for AsymptoticSolution {
    fn k0(&self, epsilon: f64, t: f64) -> DMatrix<f64> {
        self.assemble_k0(epsilon, t)
    }

    fn bt_k0_over_eps2(&self, epsilon: f64, t: f64) -> DMatrix<f64> {
        AsymptoticSolution::bt_k0_over_eps2(self, epsilon, t)
    }
}

impl GainSource for ExactSolution {
    fn k0(&self, _epsilon: f64, t: f64) -> DMatrix<f64> {
        self.k.eval_clamped(t)
    }

    fn bt_k0_over_eps2(&self, epsilon: f64, t: f64) -> DMatrix<f64> {
        let k = self.k.eval_clamped(t);
        let m = k.nrows() - self.blocks.k1.shape().0;
        k.rows(k.nrows() - m, m) / (epsilon * epsilon)
    }
}

fn layer_cfg(spec: &GameSpec, cfg: &IntegratorConfig) -> IntegratorConfig {
    cfg.clone().with_layer(spec.epsilon).with_symmetrize(true)
}

fn unbounded(what: &'static str, e: Error) -> Error {
    match e {
        Error::BlowUp { t_escape, .. } => Error::Assumption {
            name: what,
            detail: format!("guaranteed result is unbounded (escape near t = {t_escape:.4})"),
        },
        other => other,
    }
}

/// `d𝓛/dt = −𝓛𝓐 − 𝓐ᵀ𝓛 − 𝓓`, `𝓛(t_f) = F`, with
/// `𝓐 = A − (S_u − S_v)K₀` and `𝓓 = D + K₀(S_u − S_v)K₀`.
pub fn solve_l<S: GainSource>(spec: &GameSpec, asym: &S, cfg: &IntegratorConfig) -> Result<MatrixTrajectory> {
    let eps = spec.epsilon;
    let rhs = |t: f64, l: &DMatrix<f64>| {
        let k0 = asym.k0(eps, t);
        let w = asym.bt_k0_over_eps2(eps, t) * eps;
        let svk = spec.s_v(t) * &k0;
        let a = spec.a(t) - asym.su_k0(eps, t) + &svk;
        let d = spec.d(t) + w.transpose() * w - &k0 * svk;
        let la = l * a;
        -&la - la.transpose() - d
    };
    integrate_terminal(rhs, spec.f(), spec.t_f, &layer_cfg(spec, cfg))
}

/// `d𝓜/dt = −𝓜𝓐_u − 𝓐_uᵀ𝓜 − 𝓜S_v𝓜 − 𝓓_u`, `𝓜(t_f) = F`, with
/// `𝓐_u = A − S_uK₀` and `𝓓_u = D + K₀S_uK₀`.
pub fn solve_m<S: GainSource>(spec: &GameSpec, asym: &S, cfg: &IntegratorConfig) -> Result<MatrixTrajectory> {
    let eps = spec.epsilon;
    let rhs = |t: f64, m: &DMatrix<f64>| {
        let w = asym.bt_k0_over_eps2(eps, t) * eps;
        let a = spec.a(t) - asym.su_k0(eps, t);
        let d = spec.d(t) + w.transpose() * w;
        let ma = m * a;
        -&ma - ma.transpose() - m * spec.s_v(t) * m - d
    };
    integrate_terminal(rhs, spec.f(), spec.t_f, &layer_cfg(spec, cfg)).map_err(|e| unbounded("u_eps0", e))
}

/// `d𝓝/dt = −𝓝𝓐_v − 𝓐_vᵀ𝓝 + 𝓝S_u𝓝 − 𝓓_v`, `𝓝(t_f) = F`, with
/// `𝓐_v = A + S_vK₀` and `𝓓_v = D − K₀S_vK₀`.
pub fn solve_n<S: GainSource>(spec: &GameSpec, asym: &S, cfg: &IntegratorConfig) -> Result<MatrixTrajectory> {
    let eps = spec.epsilon;
    let (n, m) = (spec.dims.n, spec.dims.m);
    let rhs = |t: f64, nn: &DMatrix<f64>| {
        let k0 = asym.k0(eps, t);
        let svk = spec.s_v(t) * &k0;
        let a = spec.a(t) + &svk;
        let d = spec.d(t) - &k0 * svk;
        let bn = nn.rows(n, m) / eps;
        let na = nn * a;
        -&na - na.transpose() + bn.transpose() * bn - d
    };
    integrate_terminal(rhs, spec.f(), spec.t_f, &layer_cfg(spec, cfg)).map_err(|e| unbounded("v_eps0", e))
}

/// Norms of `z₀ = (z₀,₁, z₀,₂, z₀,₃)` split as `n | m1 | m − m1`.
fn split_norms(dims: Dimensions, z0: &DVector<f64>) -> (f64, f64, f64) {
    let Dimensions { n, m1, .. } = dims;
    (
        z0.rows(0, n).norm(),
        z0.rows(n, m1).norm(),
        z0.rows(n + m1, dims.m2()).norm(),
    )
}

/// Bound weight of the value approximation (also used for `u_ε0`).
pub fn psi(dims: Dimensions, z0: &DVector<f64>, eps: f64) -> f64 {
    let (a, b, c) = split_norms(dims, z0);
    a * a + eps * (2.0 * a * b + b * b + 2.0 * a * c) + eps * eps * (2.0 * b * c + c * c)
}

pub fn psi_u(dims: Dimensions, z0: &DVector<f64>, eps: f64) -> f64 {
    psi(dims, z0, eps)
}

pub fn psi_v(dims: Dimensions, z0: &DVector<f64>, eps: f64) -> f64 {
    let (a, b, c) = split_norms(dims, z0);
    a * a + eps * (2.0 * a * b + 2.0 * a * c) + eps * eps * (b + c) * (b + c)
}

/// Below this magnitude of `J*` relative errors are not reported.
pub const REL_ERR_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Approximation {
    pub value: f64,
    pub abs_err: f64,
    pub rel_err_percent: Option<f64>,
    /// `abs_err / (ε² ψ)`; absent when the weight vanishes.
    pub c_fit: Option<f64>,
}

impl Approximation {
    fn new(value: f64, j_star: f64, eps: f64, weight: f64) -> Self {
        let abs_err = (value - j_star).abs();
        Approximation {
            value,
            abs_err,
            rel_err_percent: (j_star.abs() >= REL_ERR_FLOOR).then(|| 100.0 * abs_err / j_star.abs()),
            c_fit: (weight > 0.0).then(|| abs_err / (eps * eps * weight)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueReport {
    pub epsilon: f64,
    pub j_star: f64,
    pub j_eps0: Approximation,
    pub j_u: Approximation,
    pub j_v: Approximation,
    pub psi: f64,
    pub psi_u: f64,
    pub psi_v: f64,
}

impl ValueReport {
    /// `J_v ≤ J* ≤ J_u` up to `1e-6 (1 + |J*|)`.
    pub fn bracketing_holds(&self) -> bool {
        let tol = 1e-6 * (1.0 + self.j_star.abs());
        self.j_v.value <= self.j_star + tol && self.j_star <= self.j_u.value + tol
    }
}

pub fn value_report(
    spec: &GameSpec,
    exact: &ExactSolution,
    l: &MatrixTrajectory,
    m: &MatrixTrajectory,
    n: &MatrixTrajectory,
) -> ValueReport {
    let z0 = spec.z0();
    let eps = spec.epsilon;
    let (w, wu, wv) = (psi(spec.dims, &z0, eps), psi_u(spec.dims, &z0, eps), psi_v(spec.dims, &z0, eps));
    let j = exact.value;
    ValueReport {
        epsilon: eps,
        j_star: j,
        j_eps0: Approximation::new(quad_form(&l.values[0], &z0), j, eps, w),
        j_u: Approximation::new(quad_form(&m.values[0], &z0), j, eps, wu),
        j_v: Approximation::new(quad_form(&n.values[0], &z0), j, eps, wv),
        psi: w,
        psi_u: wu,
        psi_v: wv,
    }
}

/// `max_{α, t} ‖K_α(t, ε) − K_{α,0}(t, ε)‖` over the grid of the exact solution.
pub fn block_error(exact: &ExactSolution, asym: &AsymptoticSolution) -> f64 {
    let b = &exact.blocks;
    let mut worst = 0.0f64;
    for (i, &t) in exact.k.grid.iter().enumerate() {
        let z = asym.blocks(exact.epsilon, t);
        for (ex, ap) in [
            (&b.k1.values[i], &z.k1),
            (&b.k2.values[i], &z.k2),
            (&b.k3.values[i], &z.k3),
            (&b.k4.values[i], &z.k4),
            (&b.k5.values[i], &z.k5),
            (&b.k6.values[i], &z.k6),
        ] {
            if !ex.is_empty() {
                worst = worst.max(crate::linalg::spectral_norm(&(ex - ap)));
            }
        }
    }
    worst
}

/// Everything computed for one `ε`.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub exact: ExactSolution,
    pub l: MatrixTrajectory,
    pub m: MatrixTrajectory,
    pub n: MatrixTrajectory,
    pub report: ValueReport,
    pub block_error: f64,
}

/// Solves the exact problem and the three evaluation problems for the `ε`
/// of `spec`; `asym` may be shared across `ε`.
pub fn evaluate(spec: &GameSpec, asym: &AsymptoticSolution, cfg: &IntegratorConfig) -> Result<Evaluation> {
    let exact = solve_exact(spec, cfg)?;
    let l = solve_l(spec, asym, cfg)?;
    let m = solve_m(spec, asym, cfg)?;
    let n = solve_n(spec, asym, cfg)?;
    let report = value_report(spec, &exact, &l, &m, &n);
    let block_error = block_error(&exact, asym);
    Ok(Evaluation {
        exact,
        l,
        m,
        n,
        report,
        block_error,
    })
}

#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub epsilon: f64,
    pub outcome: Result<Evaluation>,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    /// Ordered by decreasing `ε`.
    pub entries: Vec<SweepEntry>,
    pub warnings: Vec<String>,
    /// Some error (value or block error) failed to decrease with `ε`.
    pub non_monotone: bool,
}

impl SweepReport {
    pub fn reports(&self) -> Vec<ValueReport> {
        self.entries
            .iter()
            .filter_map(|e| e.outcome.as_ref().ok().map(|ev| ev.report))
            .collect()
    }

    pub fn block_errors(&self) -> Vec<(f64, f64)> {
        self.entries
            .iter()
            .filter_map(|e| e.outcome.as_ref().ok().map(|ev| (e.epsilon, ev.block_error)))
            .collect()
    }
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

/// Runs [`evaluate`] for every `ε` of `eps_list` (sorted descending,
/// duplicates dropped with a warning). Failures are kept per entry.
pub fn convergence_sweep(
    spec: &GameSpec,
    asym: &AsymptoticSolution,
    eps_list: &[f64],
    cfg: &IntegratorConfig,
    exec: Execution,
) -> SweepReport {
    let mut warnings = Vec::new();
    let mut eps: Vec<f64> = eps_list.to_vec();
    if !eps.windows(2).all(|w| w[0] >= w[1]) {
        warnings.push("epsilon list reordered to decreasing order".to_string());
    }
    eps.sort_by(|a, b| b.total_cmp(a));
    let before = eps.len();
    eps.dedup();
    if eps.len() < before {
        warnings.push(format!("dropped {} duplicate epsilon value(s)", before - eps.len()));
    }
    let outcomes = parallel::map(exec, &eps, |&e| evaluate(&spec.with_epsilon(e), asym, cfg));
    let entries: Vec<SweepEntry> = eps
        .iter()
        .zip(outcomes)
        .map(|(&epsilon, outcome)| SweepEntry { epsilon, outcome })
        .collect();
    let ok: Vec<&Evaluation> = entries.iter().filter_map(|e| e.outcome.as_ref().ok()).collect();
    let d: Vec<f64> = ok.iter().map(|e| e.report.j_eps0.abs_err).collect();
    let b: Vec<f64> = ok.iter().map(|e| e.block_error).collect();
    let non_monotone = !(strictly_decreasing(&d) && strictly_decreasing(&b));
    if non_monotone {
        warnings.push("errors do not decrease monotonically with epsilon".to_string());
    }
    SweepReport {
        entries,
        warnings,
        non_monotone,
    }
}

/// True when every value is at least `max / factor`.
pub fn within_factor_of_max(values: &[f64], factor: f64) -> bool {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values.iter().all(|v| *v * factor >= max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Column {
    Value,
    MinimizerGuarantee,
    MaximizerGuarantee,
}

/// CSV table `epsilon,J_star,J_approx,abs_err,rel_err_percent`.
pub fn write_error_table<W: Write>(reports: &[ValueReport], column: Column, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["epsilon", "J_star", "J_approx", "abs_err", "rel_err_percent"])?;
    for r in reports {
        let a = match column {
            Column::Value => r.j_eps0,
            Column::MinimizerGuarantee => r.j_u,
            Column::MaximizerGuarantee => r.j_v,
        };
        w.write_record([
            format!("{}", r.epsilon),
            format!("{:.6}", r.j_star),
            format!("{:.6}", a.value),
            format!("{:.6e}", a.abs_err),
            a.rel_err_percent.map(|p| format!("{p:.4}")).unwrap_or_else(|| "n/a".into()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `count` seeded `l × (n+m)` or `m × (n+m)` matrices with entries in `[−1, 1]`.
pub fn perturbation_gains(rows: usize, cols: usize, count: usize, seed: u64) -> Vec<DMatrix<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..=1.0)))
        .collect()
}

/// Costs with one player's gain shifted by `δ M_k` for each perturbation.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedCosts {
    /// `J(u, v + δ M_k z)`
    pub maximizer_deviates: Vec<f64>,
    /// `J(u + δ M_k z, v)`
    pub minimizer_deviates: Vec<f64>,
}

pub fn perturbed_costs(
    spec: &GameSpec,
    law: &FeedbackLaw,
    count: usize,
    delta: f64,
    seed: u64,
    cfg: &IntegratorConfig,
    exec: Execution,
) -> Result<PerturbedCosts> {
    let s = spec.dims.state();
    let mv = perturbation_gains(spec.dims.l, s, count, seed);
    let mu = perturbation_gains(spec.dims.m, s, count, seed.wrapping_add(1));
    let run = |l: FeedbackLaw| simulate(spec, &l, cfg).map(|r| r.total_cost);
    let v_laws: Vec<FeedbackLaw> = mv.into_iter().map(|m| law.with_maximizer_offset(m * delta)).collect();
    let u_laws: Vec<FeedbackLaw> = mu.into_iter().map(|m| law.with_minimizer_offset(m * delta)).collect();
    let maximizer_deviates = parallel::map(exec, &v_laws, |l| run(l.clone())).into_iter().collect::<Result<_>>()?;
    let minimizer_deviates = parallel::map(exec, &u_laws, |l| run(l.clone())).into_iter().collect::<Result<_>>()?;
    Ok(PerturbedCosts {
        maximizer_deviates,
        minimizer_deviates,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaddleCheck {
    pub value: f64,
    pub costs: PerturbedCosts,
    /// `max_k J(u*, v_k) − J*`; should not exceed the tolerance.
    pub maximizer_gain: f64,
    /// `max_k J* − J(u_k, v*)`; should not exceed the tolerance.
    pub minimizer_gain: f64,
}

impl SaddleCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.maximizer_gain <= tol && self.minimizer_gain <= tol
    }
}

/// Saddle inequality for the exact feedback pair under random linear
/// deviations of either player.
pub fn saddle_check(
    spec: &GameSpec,
    exact: &ExactSolution,
    count: usize,
    delta: f64,
    seed: u64,
    cfg: &IntegratorConfig,
    exec: Execution,
) -> Result<SaddleCheck> {
    let law = exact_feedback(exact, spec);
    let costs = perturbed_costs(spec, &law, count, delta, seed, cfg, exec)?;
    let value = exact.value;
    let maximizer_gain = costs.maximizer_deviates.iter().map(|j| j - value).fold(f64::NEG_INFINITY, f64::max);
    let minimizer_gain = costs.minimizer_deviates.iter().map(|j| value - j).fold(f64::NEG_INFINITY, f64::max);
    Ok(SaddleCheck {
        value,
        costs,
        maximizer_gain,
        minimizer_gain,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichCheck {
    pub j_eps0: f64,
    pub costs: PerturbedCosts,
    /// `ε²(Cψ + C_uψ_u)`
    pub upper_slack: f64,
    /// `ε²(Cψ + C_vψ_v)`
    pub lower_slack: f64,
    /// `min_k [J_ε0 − J(u_ε0, v_k) + ε²(Cψ + C_uψ_u)]`
    pub left_margin: f64,
    /// `min_k [J(u_k, v_ε0) + ε²(Cψ + C_vψ_v) − J_ε0]`
    pub right_margin: f64,
}

impl SandwichCheck {
    pub fn holds(&self) -> bool {
        self.left_margin >= 0.0 && self.right_margin >= 0.0
    }
}

/// Approximate-saddle inequality for the asymptotic pair, with the bound
/// constants taken from the fitted values in `report`.
#[allow(clippy::too_many_arguments)]
pub fn sandwich_check(
    spec: &GameSpec,
    asym: &AsymptoticSolution,
    report: &ValueReport,
    count: usize,
    delta: f64,
    seed: u64,
    cfg: &IntegratorConfig,
    exec: Execution,
) -> Result<SandwichCheck> {
    let law = approximate_feedback(asym, spec);
    let costs = perturbed_costs(spec, &law, count, delta, seed, cfg, exec)?;
    let e2 = spec.epsilon * spec.epsilon;
    let c = report.j_eps0.c_fit.unwrap_or(0.0);
    let cu = report.j_u.c_fit.unwrap_or(0.0);
    let cv = report.j_v.c_fit.unwrap_or(0.0);
    let upper_slack = e2 * (c * report.psi + cu * report.psi_u);
    let lower_slack = e2 * (c * report.psi + cv * report.psi_v);
    let j = report.j_eps0.value;
    let left_margin = costs
        .maximizer_deviates
        .iter()
        .map(|jv| j - jv + upper_slack)
        .fold(f64::INFINITY, f64::min);
    let right_margin = costs
        .minimizer_deviates
        .iter()
        .map(|ju| ju + lower_slack - j)
        .fold(f64::INFINITY, f64::min);
    Ok(SandwichCheck {
        j_eps0: j,
        costs,
        upper_slack,
        lower_slack,
        left_margin,
        right_margin,
    })
}
