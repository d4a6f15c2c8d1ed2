//! The built-in pursuit-evasion example with its reference tables.

use std::io::Write;
use std::path::Path;

use cheapgame::asymptotics::approximate_feedback;
use cheapgame::evaluation::{saddle_check, sandwich_check, write_error_table, Column};
use cheapgame::exact::exact_feedback;
use cheapgame::simulator::control_histories;
use cheapgame::{convergence_sweep, pursuit_evasion, Execution, IntegratorConfig, ValueReport};

use crate::commands::{create_file, eps_tag, simulate_law, PERTURBATIONS, PERTURBATION_SIZE};
use crate::svg::{line_chart, Series};
use crate::CliError;

pub const TABLE_EPS: [f64; 3] = [0.2, 0.1, 0.05];
pub const VALUE_TOL: f64 = 1e-3;
/// Percentage points.
pub const REL_TOL: f64 = 0.15;
pub const SADDLE_TOL: f64 = 5e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub epsilon: f64,
    pub j_star: f64,
    pub j_approx: f64,
    pub abs_err: f64,
    pub rel_err_percent: f64,
}

const fn row(epsilon: f64, j_star: f64, j_approx: f64, abs_err: f64, rel_err_percent: f64) -> TableRow {
    TableRow {
        epsilon,
        j_star,
        j_approx,
        abs_err,
        rel_err_percent,
    }
}

/// Value of the game against `z₀ᵀ𝓛(0)z₀`.
pub const TABLE_1: [TableRow; 3] = [
    row(0.2, 3.1892, 3.2247, 0.0355, 1.11),
    row(0.1, 1.4184, 1.4258, 0.0074, 0.52),
    row(0.05, 0.6696, 0.6733, 0.0037, 0.55),
];

/// Minimizer's guaranteed result.
pub const TABLE_2: [TableRow; 3] = [
    row(0.2, 3.1892, 3.2401, 0.051, 1.6),
    row(0.1, 1.4184, 1.4234, 0.005, 0.35),
    row(0.05, 0.6696, 0.6702, 5.57e-4, 0.08),
];

/// Maximizer's guaranteed result.
pub const TABLE_3: [TableRow; 3] = [
    row(0.2, 3.1892, 3.1755, 0.0137, 0.43),
    row(0.1, 1.4184, 1.4176, 7.89e-4, 0.06),
    row(0.05, 0.6696, 0.6696, 4.73e-5, 0.007),
];

pub fn k1o_closed(t: f64) -> f64 {
    8.0 * ((1.0f64 / 16.0).atan() + 1.2 - 0.8 * t).tan()
}

pub fn k6o_closed(t: f64) -> f64 {
    let g = 2.0f64.sqrt();
    let th = (g * (t - 1.5)).tanh();
    g * th / (g * th - 2.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoldenCheck {
    pub name: String,
    pub expected: f64,
    pub actual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl GoldenCheck {
    pub fn close(name: String, expected: f64, actual: f64, tolerance: f64) -> Self {
        GoldenCheck {
            name,
            expected,
            actual,
            tolerance,
            passed: (actual - expected).abs() <= tolerance,
        }
    }

    /// Pass/fail condition with a reported quantity; `expected` is the bound.
    fn flag(name: String, bound: f64, actual: f64, passed: bool) -> Self {
        GoldenCheck {
            name,
            expected: bound,
            actual,
            tolerance: 0.0,
            passed,
        }
    }
}

pub fn table_checks(table: usize, rows: &[TableRow], reports: &[ValueReport], column: Column) -> Vec<GoldenCheck> {
    let mut out = Vec::new();
    for r in rows {
        let name = |what: &str| format!("table{table} eps={} {what}", r.epsilon);
        let Some(rep) = reports.iter().find(|x| x.epsilon == r.epsilon) else {
            out.push(GoldenCheck::flag(name("present"), 1.0, 0.0, false));
            continue;
        };
        let a = match column {
            Column::Value => rep.j_eps0,
            Column::MinimizerGuarantee => rep.j_u,
            Column::MaximizerGuarantee => rep.j_v,
        };
        out.push(GoldenCheck::close(name("J_star"), r.j_star, rep.j_star, VALUE_TOL));
        out.push(GoldenCheck::close(name("J_approx"), r.j_approx, a.value, VALUE_TOL));
        out.push(GoldenCheck::close(name("abs_err"), r.abs_err, a.abs_err, VALUE_TOL));
        out.push(GoldenCheck::close(
            name("rel_err_percent"),
            r.rel_err_percent,
            a.rel_err_percent.unwrap_or(f64::NAN),
            REL_TOL,
        ));
    }
    out
}

fn write_checks(dir: &Path, checks: &[GoldenCheck]) -> Result<(), CliError> {
    let mut f = create_file(dir, "checks.csv")?;
    writeln!(f, "check,expected,actual,tolerance,status")?;
    for c in checks {
        writeln!(
            f,
            "{},{:.6e},{:.6e},{:.1e},{}",
            c.name,
            c.expected,
            c.actual,
            c.tolerance,
            if c.passed { "PASS" } else { "FAIL" }
        )?;
    }
    f.flush()?;
    Ok(())
}

/// Runs the whole example into `dir`. Everything is written before the
/// golden checks decide the exit status.
pub fn run_example(dir: &Path, cfg: &IntegratorConfig, seed: u64, out: &mut dyn Write) -> Result<(), CliError> {
    let spec = pursuit_evasion(TABLE_EPS[0]);
    let asym = cheapgame::solve_asymptotic(&spec, cfg)?;
    let sweep = convergence_sweep(&spec, &asym, &TABLE_EPS, cfg, Execution::Parallel);
    let mut evals = Vec::new();
    for e in &sweep.entries {
        match &e.outcome {
            Ok(ev) => evals.push(ev.clone()),
            Err(err) => {
                let mut c = CliError::from(err.clone());
                c.message = format!("eps = {}: {}", e.epsilon, c.message);
                return Err(c);
            }
        }
    }
    let reports = sweep.reports();
    let mut checks = Vec::new();
    for (k, (rows, col)) in [
        (&TABLE_1, Column::Value),
        (&TABLE_2, Column::MinimizerGuarantee),
        (&TABLE_3, Column::MaximizerGuarantee),
    ]
    .into_iter()
    .enumerate()
    {
        write_error_table(&reports, col, create_file(dir, &format!("table{}.csv", k + 1))?)?;
        checks.extend(table_checks(k + 1, rows, &reports, col));
    }

    // trajectories for both laws
    let mut u1 = Vec::new();
    let mut v2 = Vec::new();
    for ev in &evals {
        let eps = ev.exact.epsilon;
        let s = spec.with_epsilon(eps);
        let (rec, _) = simulate_law(&s, eps, &exact_feedback(&ev.exact, &s), cfg, dir)?;
        checks.push(GoldenCheck::close(
            format!("exact-law cost eps={eps}"),
            ev.exact.value,
            rec.total_cost,
            1e-4 * (1.0 + ev.exact.value.abs()),
        ));
        let (rec, _) = simulate_law(&s, eps, &approximate_feedback(&asym, &s), cfg, dir)?;
        let h = control_histories(&rec);
        u1.push((eps, h.grid.clone(), h.u[0].clone()));
        v2.push((eps, h.grid, h.v[1].clone()));
    }
    let series = |data: &[(f64, Vec<f64>, cheapgame::simulator::ChannelSeries)]| -> Vec<(String, Vec<f64>, Vec<f64>)> {
        data.iter()
            .map(|(e, g, c)| (format!("eps = {e}"), g.clone(), c.values.clone()))
            .collect()
    };
    for (name, title, label, data) in [
        ("fig1_u1.svg", "First minimizer control", "u_1", series(&u1)),
        ("fig2_v2.svg", "Second maximizer control", "v_2", series(&v2)),
    ] {
        let ser: Vec<Series> = data
            .iter()
            .map(|(l, x, y)| Series {
                label: l.clone(),
                x,
                y,
            })
            .collect();
        let mut f = create_file(dir, name)?;
        f.write_all(line_chart(title, "t", label, &ser).as_bytes())?;
        f.flush()?;
    }
    let u_peaks: Vec<f64> = u1.iter().map(|(_, _, c)| c.peak_abs).collect();
    let v_peaks: Vec<f64> = v2.iter().map(|(_, _, c)| c.peak_abs).collect();
    checks.push(GoldenCheck::flag(
        "peak |u_1| grows as eps decreases".into(),
        u_peaks[0],
        *u_peaks.last().unwrap(),
        u_peaks.windows(2).all(|w| w[1] > w[0]),
    ));
    checks.push(GoldenCheck::flag(
        "peak |v_2| shrinks as eps decreases".into(),
        v_peaks[0],
        *v_peaks.last().unwrap(),
        v_peaks.windows(2).all(|w| w[1] < w[0]),
    ));

    // outer solution against its closed form
    let mut f = create_file(dir, "outer_comparison.csv")?;
    writeln!(f, "t,K1o_numeric,K1o_closed,K6o_numeric,K6o_closed")?;
    let (mut d1, mut d6) = (0.0f64, 0.0f64);
    for i in 0..=150 {
        let t = i as f64 * 0.01;
        let (a1, b1) = (asym.k1o.eval_clamped(t)[(0, 0)], k1o_closed(t));
        let (a6, b6) = (asym.k6o.eval_clamped(t)[(0, 0)], k6o_closed(t));
        d1 = d1.max((a1 - b1).abs() / (1.0 + b1.abs()));
        d6 = d6.max((a6 - b6).abs() / (1.0 + b6.abs()));
        writeln!(f, "{t:.2},{a1:.12e},{b1:.12e},{a6:.12e},{b6:.12e}")?;
    }
    f.flush()?;
    checks.push(GoldenCheck::flag("K1o matches closed form".into(), 1e-6, d1, d1 <= 1e-6));
    checks.push(GoldenCheck::flag("K6o matches closed form".into(), 1e-6, d6, d6 <= 1e-6));
    let k6_tf = asym.k6o.values.last().expect("non-empty")[(0, 0)];
    checks.push(GoldenCheck::close("K6o(1.5) = 0".into(), 0.0, k6_tf, 0.0));

    // seeded perturbation checks
    for ev in &evals {
        let eps = ev.exact.epsilon;
        let s = spec.with_epsilon(eps);
        let sc = saddle_check(&s, &ev.exact, PERTURBATIONS, PERTURBATION_SIZE, seed, cfg, Execution::Parallel)?;
        let gain = sc.maximizer_gain.max(sc.minimizer_gain);
        checks.push(GoldenCheck::flag(format!("saddle eps={eps}"), SADDLE_TOL, gain, sc.holds(SADDLE_TOL)));
        let sw = sandwich_check(&s, &asym, &ev.report, PERTURBATIONS, PERTURBATION_SIZE, seed, cfg, Execution::Parallel)?;
        let margin = sw.left_margin.min(sw.right_margin);
        checks.push(GoldenCheck::flag(format!("approximate saddle eps={eps}"), 0.0, margin, sw.holds()));
    }

    write_checks(dir, &checks)?;
    for c in &checks {
        writeln!(
            out,
            "{} {:<40} expected {:>12.6} got {:>12.6}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.expected,
            c.actual
        )?;
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    writeln!(out, "{} of {} checks passed; outputs in {}", checks.len() - failed, checks.len(), dir.display())?;
    for ev in &evals {
        writeln!(out, "trajectories: trajectory_exact_{0}.csv, trajectory_asymptotic_{0}.csv", eps_tag(ev.exact.epsilon))?;
    }
    match checks.iter().find(|c| !c.passed) {
        None => Ok(()),
        Some(c) => Err(CliError::golden(format!(
            "golden check failed: {} (expected {}, got {:.6}); {failed} failing in total",
            c.name, c.expected, c.actual
        ))),
    }
}
