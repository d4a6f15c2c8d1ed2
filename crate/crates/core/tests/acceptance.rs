//! End-to-end acceptance checks on the pursuit-evasion example and on
//! randomized games. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::time::Instant;

use cheapgame::asymptotics::{outer_identities, solve_asymptotic, AsymptoticSolution};
use cheapgame::evaluation::{
    convergence_sweep, saddle_check, sandwich_check, within_factor_of_max, Evaluation,
};
use cheapgame::exact::{exact_feedback, riccati_residual};
use cheapgame::simulator::{control_histories, simulate};
use cheapgame::{approximate_feedback, pursuit_evasion, Error, Execution, IntegratorConfig};
use nalgebra::DMatrix;

use common::{k1o_closed, k6o_closed, random_spec, TABLE_EPS};

struct Outcome {
    id: usize,
    title: &'static str,
    failures: Vec<String>,
    summary: String,
}

impl Outcome {
    fn new(id: usize, title: &'static str) -> Self {
        Outcome {
            id,
            title,
            failures: Vec::new(),
            summary: String::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn within(got: f64, want: f64, tol: f64) -> bool {
    (got - want).abs() <= tol
}

struct Shared {
    cfg: IntegratorConfig,
    asym: AsymptoticSolution,
    evals: Vec<Evaluation>,
    elapsed: f64,
}

fn table_1(s: &Shared) -> Outcome {
    let mut o = Outcome::new(1, "Table 1: exact value and value of the approximate pair");
    let reference = [(3.1892, 3.2247), (1.4184, 1.4258), (0.6696, 0.6733)];
    for (ev, (js, je)) in s.evals.iter().zip(reference) {
        let r = &ev.report;
        o.check(within(r.j_star, js, 1e-3), || {
            format!("eps={}: J* = {:.6}, expected {js} +- 1e-3", r.epsilon, r.j_star)
        });
        o.check(within(r.j_eps0.value, je, 1e-3), || {
            format!("eps={}: J_eps0 = {:.6}, expected {je} +- 1e-3", r.epsilon, r.j_eps0.value)
        });
    }
    o.check(s.elapsed < 10.0, || format!("runtime {:.2} s exceeds 10 s", s.elapsed));
    o.summary = format!("runtime {:.2} s", s.elapsed);
    o
}

fn table_2(s: &Shared) -> Outcome {
    let mut o = Outcome::new(2, "Table 2: guaranteed result of the minimizer");
    let reference = [(3.2401, 0.051), (1.4234, 0.005), (0.6702, 5.57e-4)];
    for (ev, (ju, du)) in s.evals.iter().zip(reference) {
        let r = &ev.report;
        o.check(within(r.j_u.value, ju, 1e-3), || {
            format!("eps={}: J_u = {:.6}, expected {ju} +- 1e-3", r.epsilon, r.j_u.value)
        });
        o.check(within(r.j_u.abs_err, du, 0.2 * du), || {
            format!("eps={}: delta_u = {:.4e}, expected {du:e} +- 20%", r.epsilon, r.j_u.abs_err)
        });
    }
    o
}

fn table_3(s: &Shared) -> Outcome {
    let mut o = Outcome::new(3, "Table 3: guaranteed result of the maximizer and bracketing");
    let reference = [3.1755, 1.4176, 0.6696];
    for (ev, jv) in s.evals.iter().zip(reference) {
        let r = &ev.report;
        o.check(within(r.j_v.value, jv, 1e-3), || {
            format!("eps={}: J_v = {:.6}, expected {jv} +- 1e-3", r.epsilon, r.j_v.value)
        });
        o.check(r.bracketing_holds(), || {
            format!(
                "eps={}: bracketing fails ({:.6} <= {:.6} <= {:.6})",
                r.epsilon, r.j_v.value, r.j_star, r.j_u.value
            )
        });
    }
    let last = &s.evals[2].report;
    o.check(within(last.j_v.abs_err, 4.73e-5, 0.2 * 4.73e-5), || {
        format!("eps=0.05: delta_v = {:.3e}, expected 4.73e-5 +- 20%", last.j_v.abs_err)
    });
    o
}

fn closed_forms(s: &Shared) -> Outcome {
    let mut o = Outcome::new(4, "Closed-form outer solutions on 401 points");
    let (mut e1, mut e6) = (0.0f64, 0.0f64);
    for i in 0..401 {
        let t = 1.5 * i as f64 / 400.0;
        e1 = e1.max((s.asym.k1o.eval(t).unwrap()[(0, 0)] - k1o_closed(t)).abs());
        e6 = e6.max((s.asym.k6o.eval(t).unwrap()[(0, 0)] - k6o_closed(t)).abs());
    }
    o.check(e1 <= 1e-7, || format!("K1o max error {e1:e}"));
    o.check(e6 <= 1e-7, || format!("K6o max error {e6:e}"));
    o.summary = format!("max errors {e1:.1e}, {e6:.1e}");
    o
}

fn boundary(s: &Shared) -> Outcome {
    let mut o = Outcome::new(5, "Boundary corrections: ODEs, terminal values, decay");
    let b = &s.asym.boundary;
    let r = b.ode_residual(-40.0 / b.beta, 100);
    o.check(r <= 1e-9, || format!("tau-ODE residual {r:e}"));
    let lhalf = DMatrix::from_diagonal(&b.lhalf_tf);
    o.check(b.k4b(0.0) == -&lhalf, || "K4b(0) != -Lambda^{1/2}(t_f)".into());
    o.check(b.k2b(0.0) == -&b.f1a2l, || "K2b(0) != -F1 A2 Lambda^{-1/2}".into());
    o.check(b.k5b(0.0) == -&b.a6_tf, || "K5b(0) != -A6(t_f)".into());
    let d = b.decay_constants();
    o.check(d.verified, || format!("decay envelopes not verified: {d:?}"));
    o.summary = format!("residual {r:.1e}, a2={:.3} a4={:.3} a5={:.3}", d.a2, d.a4, d.a5);
    o
}

fn order(s: &Shared) -> Outcome {
    let mut o = Outcome::new(6, "Order properties over the epsilon sweep");
    let e: Vec<f64> = s.evals.iter().map(|ev| ev.block_error).collect();
    for w in e.windows(2) {
        o.check(w[1] <= 0.75 * w[0], || format!("E ratio {:.3} > 0.75 ({:?})", w[1] / w[0], e));
    }
    let c: Vec<f64> = s.evals.iter().map(|ev| ev.report.j_eps0.c_fit.unwrap_or(f64::NAN)).collect();
    o.check(within_factor_of_max(&c, 2.0), || format!("C_fit not within 2x of max: {c:?}"));
    o.summary = format!(
        "E = {:.3}, {:.3}, {:.3}; C = {:.3}, {:.3}, {:.3}",
        e[0], e[1], e[2], c[0], c[1], c[2]
    );
    o
}

fn identities(s: &Shared) -> Outcome {
    let mut o = Outcome::new(7, "Algebraic outer identities (example + 20 random games)");
    let r = outer_identities(&s.asym).max();
    o.check(r <= 1e-10, || format!("example: defect {r:e}"));
    let mut accepted = 0;
    let mut seed = 0u64;
    let mut worst = r;
    while accepted < 20 && seed < 200 {
        let spec = random_spec(seed);
        seed += 1;
        match solve_asymptotic(&spec, &s.cfg) {
            Ok(a) => {
                accepted += 1;
                let d = outer_identities(&a).max();
                worst = worst.max(d);
                o.check(d <= 1e-10, || format!("seed {}: defect {d:e}", seed - 1));
            }
            Err(Error::Assumption { name: "A4", .. }) => {}
            Err(e) => o.failures.push(format!("seed {}: {e}", seed - 1)),
        }
    }
    o.check(accepted == 20, || format!("only {accepted} admissible random games"));
    o.summary = format!("worst defect {worst:.1e} over {accepted} random games ({seed} drawn)");
    o
}

fn self_consistency(s: &Shared) -> Outcome {
    let mut o = Outcome::new(8, "Exact solution: Riccati residual and simulated cost");
    let mut worst = (0.0f64, 0.0f64);
    for ev in &s.evals {
        let spec = pursuit_evasion(ev.exact.epsilon);
        let r = riccati_residual(&spec, &ev.exact, 50);
        o.check(r.passes(1e-6), || format!("eps={}: scaled residual {:e}", ev.exact.epsilon, r.max_scaled));
        match simulate(&spec, &exact_feedback(&ev.exact, &spec), &s.cfg) {
            Ok(rec) => {
                let d = (rec.total_cost - ev.exact.value).abs();
                o.check(d <= 2e-3, || format!("eps={}: |J* - J(u*,v*)| = {d:e}", ev.exact.epsilon));
                worst.1 = worst.1.max(d);
            }
            Err(e) => o.failures.push(format!("eps={}: simulation failed: {e}", ev.exact.epsilon)),
        }
        worst.0 = worst.0.max(r.max_scaled);
    }
    o.summary = format!("residual {:.1e}, cost gap {:.1e}", worst.0, worst.1);
    o
}

fn saddle(s: &Shared) -> Outcome {
    let mut o = Outcome::new(9, "Saddle and approximate-saddle inequalities (20 perturbations)");
    let (count, delta, seed) = (20, 0.1, 2024);
    let mut worst = f64::NEG_INFINITY;
    let mut margin = f64::INFINITY;
    for ev in &s.evals {
        let eps = ev.exact.epsilon;
        let spec = pursuit_evasion(eps);
        match saddle_check(&spec, &ev.exact, count, delta, seed, &s.cfg, Execution::Parallel) {
            Ok(c) => {
                worst = worst.max(c.maximizer_gain).max(c.minimizer_gain);
                o.check(c.holds(5e-3), || {
                    format!("eps={eps}: deviation gains {:.2e} / {:.2e}", c.maximizer_gain, c.minimizer_gain)
                });
            }
            Err(e) => o.failures.push(format!("eps={eps}: {e}")),
        }
        match sandwich_check(&spec, &s.asym, &ev.report, count, delta, seed, &s.cfg, Execution::Parallel) {
            Ok(c) => {
                margin = margin.min(c.left_margin).min(c.right_margin);
                o.check(c.holds(), || {
                    format!("eps={eps}: sandwich margins {:.2e} / {:.2e}", c.left_margin, c.right_margin)
                });
            }
            Err(e) => o.failures.push(format!("eps={eps}: {e}")),
        }
    }
    o.summary = format!("largest deviation gain {worst:.1e}, smallest sandwich margin {margin:.1e}");
    o
}

fn figures(s: &Shared) -> Outcome {
    let mut o = Outcome::new(10, "Control histories: u_1 peak grows, v_2 peak shrinks as eps decreases");
    let mut u_peaks = Vec::new();
    let mut v_peaks = Vec::new();
    for &eps in &TABLE_EPS {
        let spec = pursuit_evasion(eps);
        match simulate(&spec, &approximate_feedback(&s.asym, &spec), &s.cfg) {
            Ok(rec) => {
                let h = control_histories(&rec);
                u_peaks.push(h.u[0].peak_abs);
                v_peaks.push(h.v[1].peak_abs);
            }
            Err(e) => o.failures.push(format!("eps={eps}: {e}")),
        }
    }
    o.check(u_peaks.windows(2).all(|w| w[1] > w[0]), || format!("u_1 peaks {u_peaks:?}"));
    o.check(v_peaks.windows(2).all(|w| w[1] < w[0]), || format!("v_2 peaks {v_peaks:?}"));
    o.summary = format!("u_1 peaks {u_peaks:.3?}, v_2 peaks {v_peaks:.4?}");
    o
}

fn main() {
    let cfg = IntegratorConfig::default();
    let start = Instant::now();
    let spec = pursuit_evasion(TABLE_EPS[0]);
    let asym = solve_asymptotic(&spec, &cfg).expect("example asymptotics");
    let sweep = convergence_sweep(&spec, &asym, &TABLE_EPS, &cfg, Execution::Parallel);
    let elapsed = start.elapsed().as_secs_f64();
    let evals: Vec<Evaluation> = sweep
        .entries
        .into_iter()
        .map(|e| e.outcome.expect("example sweep entry"))
        .collect();
    let shared = Shared {
        cfg,
        asym,
        evals,
        elapsed,
    };

    let criteria: [fn(&Shared) -> Outcome; 10] = [
        table_1,
        table_2,
        table_3,
        closed_forms,
        boundary,
        order,
        identities,
        self_consistency,
        saddle,
        figures,
    ];
    let mut failed = 0;
    for run in criteria {
        let o = run(&shared);
        let tag = if o.passed() { "PASS" } else { "FAIL" };
        if o.summary.is_empty() {
            println!("{tag} [{:>2}] {}", o.id, o.title);
        } else {
            println!("{tag} [{:>2}] {} ({})", o.id, o.title, o.summary);
        }
        for f in &o.failures {
            println!("       - {f}");
        }
        if !o.passed() {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
