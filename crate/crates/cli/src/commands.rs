use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use cheapgame::asymptotics::{approximate_feedback, outer_identities, outer_residuals};
use cheapgame::evaluation::{sandwich_check, write_error_table, Column};
use cheapgame::exact::{exact_feedback, riccati_residual};
use cheapgame::game_model::validate_spec;
use cheapgame::simulator::{control_histories, write_csv};
use cheapgame::{
    convergence_sweep, AsymptoticSolution, Error, Evaluation, Execution, GameSpec, IntegratorConfig, MatrixTrajectory,
    SweepReport, TrajectoryRecord,
};

use crate::CliError;

/// Perturbed laws per player in the approximate-saddle check.
pub const PERTURBATIONS: usize = 20;
pub const PERTURBATION_SIZE: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct Context {
    pub spec: GameSpec,
    pub eps: Vec<f64>,
    pub out_dir: PathBuf,
    pub cfg: IntegratorConfig,
    pub seed: u64,
}

impl Context {
    fn check_eps(&self) -> Result<(), CliError> {
        if self.eps.is_empty() {
            return Err(CliError::validation("epsilon list is empty"));
        }
        if let Some(e) = self.eps.iter().find(|e| e.is_nan() || **e <= 0.0 || e.is_infinite()) {
            return Err(Error::InvalidParameter(format!("epsilon must be positive (got {e})")).into());
        }
        Ok(())
    }
}

pub fn eps_tag(eps: f64) -> String {
    format!("eps{eps}")
}

pub fn create_file(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::validation(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    let f = File::create(&path).map_err(|e| CliError::validation(format!("cannot write {}: {e}", path.display())))?;
    Ok(BufWriter::new(f))
}

/// Row-major matrix samples, one row per time: `t, {prefix}_i_j, ...`.
pub fn write_matrix_samples<W: Write>(
    out: &mut W,
    prefix: &str,
    times: &[f64],
    sample: impl Fn(f64) -> nalgebra::DMatrix<f64>,
) -> Result<(), CliError> {
    let first = sample(times[0]);
    let (r, c) = first.shape();
    let mut header = vec!["t".to_string()];
    for i in 1..=r {
        for j in 1..=c {
            header.push(format!("{prefix}_{i}_{j}"));
        }
    }
    writeln!(out, "{}", header.join(","))?;
    for &t in times {
        let k = sample(t);
        let mut row = vec![format!("{t:.17e}")];
        for i in 0..r {
            for j in 0..c {
                row.push(format!("{:.17e}", k[(i, j)]));
            }
        }
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()?;
    Ok(())
}

fn write_trajectory(dir: &Path, name: &str, prefix: &str, traj: &MatrixTrajectory) -> Result<(), CliError> {
    let mut f = create_file(dir, name)?;
    // dense output reproduces the stored values at grid points
    write_matrix_samples(&mut f, prefix, &traj.grid, |t| traj.eval_clamped(t))
}

/// Uniform grid plus a dense patch across the boundary layer at `t_f`.
pub fn layer_grid(spec: &GameSpec, eps: f64) -> Vec<f64> {
    let mut g = spec.grid(401);
    let start = (spec.t_f - 10.0 * eps).max(0.0);
    let h = eps / 50.0;
    let count = ((spec.t_f - start) / h).floor() as usize;
    g.extend((0..=count).map(|k| start + h * k as f64));
    g.push(spec.t_f);
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

pub fn validate(ctx: &Context, out: &mut dyn Write) -> Result<(), CliError> {
    ctx.spec.check_dimensions()?;
    let report = validate_spec(&ctx.spec)?;
    for c in &report.checks {
        if c.passed {
            writeln!(out, "[ok]   {}", c.name)?;
        } else {
            writeln!(out, "[FAIL] {}: {}", c.name, c.message)?;
        }
    }
    if let Some(fail) = report.first_failure() {
        return Err(CliError::validation(format!("invariant `{}` fails: {}", fail.name, fail.message)));
    }
    if report.a2_satisfied {
        writeln!(out, "A2 satisfied; all invariants pass")?;
    } else {
        writeln!(out, "all invariants pass; A2 fails, so only the exact solver applies")?;
    }
    Ok(())
}

pub fn solve_exact(ctx: &Context, out: &mut dyn Write) -> Result<(), CliError> {
    ctx.check_eps()?;
    for &e in &ctx.eps {
        let spec = ctx.spec.with_epsilon(e);
        let sol = cheapgame::solve_exact(&spec, &ctx.cfg)?;
        let res = riccati_residual(&spec, &sol, 200);
        let name = format!("exact_K_{}.csv", eps_tag(e));
        write_trajectory(&ctx.out_dir, &name, "K", &sol.k)?;
        writeln!(
            out,
            "eps = {e}: J* = {:.6}, {} grid points, scaled residual {:.2e} -> {name}",
            sol.value,
            sol.k.len(),
            res.max_scaled
        )?;
    }
    Ok(())
}

pub fn solve_asymptotic(ctx: &Context, out: &mut dyn Write) -> Result<(), CliError> {
    ctx.check_eps()?;
    let asym = cheapgame::solve_asymptotic(&ctx.spec, &ctx.cfg)?;
    let res = outer_residuals(&asym, 200);
    let decay = asym.boundary.decay_constants();
    writeln!(out, "beta = {:.6}, beta_bar = {:.6}", asym.beta, asym.beta_bar)?;
    writeln!(
        out,
        "outer residuals: K1o {:.2e}, K6o {:.2e}, K3o {:.2e}; identity defect {:.2e}",
        res.k1o,
        res.k6o,
        res.k3o,
        outer_identities(&asym).max()
    )?;
    writeln!(
        out,
        "boundary decay constants: a2 = {:.4}, a4 = {:.4}, a5 = {:.4} (verified: {})",
        decay.a2, decay.a4, decay.a5, decay.verified
    )?;
    write_trajectory(&ctx.out_dir, "outer_K1.csv", "K1o", &asym.k1o)?;
    write_trajectory(&ctx.out_dir, "outer_K6.csv", "K6o", &asym.k6o)?;
    for &e in &ctx.eps {
        let name = format!("asymptotic_K0_{}.csv", eps_tag(e));
        let mut f = create_file(&ctx.out_dir, &name)?;
        write_matrix_samples(&mut f, "K0", &layer_grid(&ctx.spec, e), |t| asym.assemble_k0(e, t))?;
        writeln!(out, "eps = {e}: K0 -> {name}")?;
    }
    Ok(())
}

fn run_sweep(ctx: &Context, asym: &AsymptoticSolution, out: &mut dyn Write) -> Result<(SweepReport, Vec<Evaluation>), CliError> {
    ctx.check_eps()?;
    let report = convergence_sweep(&ctx.spec, asym, &ctx.eps, &ctx.cfg, Execution::Parallel);
    for w in &report.warnings {
        writeln!(out, "warning: {w}")?;
    }
    let mut evals = Vec::new();
    for entry in &report.entries {
        match &entry.outcome {
            Ok(ev) => evals.push(ev.clone()),
            Err(e) => {
                let mut err = CliError::from(e.clone());
                err.message = format!("eps = {}: {}", entry.epsilon, err.message);
                return Err(err);
            }
        }
    }
    Ok((report, evals))
}

fn opt(v: Option<f64>, prec: usize) -> String {
    v.map(|x| format!("{x:.prec$}")).unwrap_or_else(|| "n/a".into())
}

pub fn evaluate(ctx: &Context, out: &mut dyn Write) -> Result<(), CliError> {
    let asym = cheapgame::solve_asymptotic(&ctx.spec, &ctx.cfg)?;
    let (_, evals) = run_sweep(ctx, &asym, out)?;
    let mut f = create_file(&ctx.out_dir, "evaluation.csv")?;
    writeln!(f, "epsilon,J_star,J_eps0,J_u,J_v,C,C_u,C_v,psi,psi_u,psi_v,block_error")?;
    for ev in &evals {
        let r = &ev.report;
        writeln!(
            f,
            "{},{:.10},{:.10},{:.10},{:.10},{},{},{},{:.10},{:.10},{:.10},{:.6e}",
            r.epsilon,
            r.j_star,
            r.j_eps0.value,
            r.j_u.value,
            r.j_v.value,
            opt(r.j_eps0.c_fit, 6),
            opt(r.j_u.c_fit, 6),
            opt(r.j_v.c_fit, 6),
            r.psi,
            r.psi_u,
            r.psi_v,
            ev.block_error
        )?;
        writeln!(
            out,
            "eps = {}: J* = {:.6}, J_eps0 = {:.6}, J_u = {:.6}, J_v = {:.6}, bracketing {}",
            r.epsilon,
            r.j_star,
            r.j_eps0.value,
            r.j_u.value,
            r.j_v.value,
            if r.bracketing_holds() { "holds" } else { "FAILS" }
        )?;
        let spec = ctx.spec.with_epsilon(r.epsilon);
        let sw = sandwich_check(
            &spec,
            &asym,
            r,
            PERTURBATIONS,
            PERTURBATION_SIZE,
            ctx.seed,
            &ctx.cfg,
            Execution::Parallel,
        )?;
        writeln!(
            out,
            "  approximate saddle (seed {}, {} laws): margins {:.3e} / {:.3e} -> {}",
            ctx.seed,
            PERTURBATIONS,
            sw.left_margin,
            sw.right_margin,
            if sw.holds() { "holds" } else { "FAILS" }
        )?;
    }
    writeln!(out, "-> evaluation.csv")?;
    Ok(())
}

pub fn sweep(ctx: &Context, out: &mut dyn Write) -> Result<(), CliError> {
    let asym = cheapgame::solve_asymptotic(&ctx.spec, &ctx.cfg)?;
    let (report, evals) = run_sweep(ctx, &asym, out)?;
    let reports = report.reports();
    for (name, col) in [
        ("table_value.csv", Column::Value),
        ("table_minimizer.csv", Column::MinimizerGuarantee),
        ("table_maximizer.csv", Column::MaximizerGuarantee),
    ] {
        write_error_table(&reports, col, create_file(&ctx.out_dir, name)?)?;
    }
    let mut f = create_file(&ctx.out_dir, "block_errors.csv")?;
    writeln!(f, "epsilon,block_error")?;
    for (e, b) in report.block_errors() {
        writeln!(f, "{e},{b:.6e}")?;
    }
    writeln!(out, "{:>8} {:>10} {:>10} {:>10} {:>10} {:>8} {:>8} {:>8} {:>10}", "eps", "J*", "J_eps0", "J_u", "J_v", "C", "C_u", "C_v", "block_err")?;
    for ev in &evals {
        let r = &ev.report;
        writeln!(
            out,
            "{:>8} {:>10.6} {:>10.6} {:>10.6} {:>10.6} {:>8} {:>8} {:>8} {:>10.3e}",
            r.epsilon,
            r.j_star,
            r.j_eps0.value,
            r.j_u.value,
            r.j_v.value,
            opt(r.j_eps0.c_fit, 4),
            opt(r.j_u.c_fit, 4),
            opt(r.j_v.c_fit, 4),
            ev.block_error
        )?;
    }
    writeln!(out, "-> table_value.csv, table_minimizer.csv, table_maximizer.csv, block_errors.csv")?;
    Ok(())
}

/// Simulates `law` at every `ε` and writes `trajectory_{label}_eps*.csv`.
pub fn simulate_law(
    spec: &GameSpec,
    eps: f64,
    law: &cheapgame::FeedbackLaw,
    cfg: &IntegratorConfig,
    dir: &Path,
) -> Result<(TrajectoryRecord, String), CliError> {
    let spec = spec.with_epsilon(eps);
    let rec = cheapgame::simulate(&spec, law, cfg)?;
    let name = format!("trajectory_{}_{}.csv", law.label, eps_tag(eps));
    write_csv(&rec, create_file(dir, &name)?)?;
    Ok((rec, name))
}

fn describe(out: &mut dyn Write, eps: f64, label: &str, rec: &TrajectoryRecord, name: &str) -> Result<(), CliError> {
    let h = control_histories(rec);
    let peaks: Vec<String> = h
        .u
        .iter()
        .chain(&h.v)
        .map(|c| format!("|{}| {:.4}", c.name, c.peak_abs))
        .collect();
    writeln!(out, "eps = {eps} {label}: cost {:.6}, peaks {} -> {name}", rec.total_cost, peaks.join(", "))?;
    Ok(())
}

pub fn simulate(ctx: &Context, out: &mut dyn Write) -> Result<(), CliError> {
    ctx.check_eps()?;
    let asym = match cheapgame::solve_asymptotic(&ctx.spec, &ctx.cfg) {
        Ok(a) => Some(a),
        Err(e @ Error::Assumption { .. }) => {
            writeln!(out, "asymptotic law skipped: {e}")?;
            None
        }
        Err(e) => return Err(e.into()),
    };
    for &e in &ctx.eps {
        let spec = ctx.spec.with_epsilon(e);
        let exact = cheapgame::solve_exact(&spec, &ctx.cfg)?;
        let law = exact_feedback(&exact, &spec);
        let (rec, name) = simulate_law(&spec, e, &law, &ctx.cfg, &ctx.out_dir)?;
        describe(out, e, "exact", &rec, &name)?;
        if let Some(a) = &asym {
            let law = approximate_feedback(a, &spec);
            let (rec, name) = simulate_law(&spec, e, &law, &ctx.cfg, &ctx.out_dir)?;
            describe(out, e, "asymptotic", &rec, &name)?;
        }
    }
    Ok(())
}
