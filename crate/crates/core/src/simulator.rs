//! Closed-loop simulation under linear state-feedback pairs.
//!
//! The running cost is carried as an extra state, so the adaptive
//! integrator controls its error together with the trajectory. A separate
//! trapezoid quadrature on a resampled grid serves as a cross-check.

use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::game_model::GameSpec;
use crate::linalg::quad_form;
use crate::ode::{integrate_initial, IntegratorConfig, MatrixTrajectory};

pub type GainFn = Arc<dyn Fn(f64) -> DMatrix<f64> + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LawKind {
    Exact,
    Asymptotic,
    Custom,
}

impl std::fmt::Display for LawKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LawKind::Exact => "exact",
            LawKind::Asymptotic => "asymptotic",
            LawKind::Custom => "custom",
        })
    }
}

/// A pair `u = K_u(t) z`, `v = K_v(t) z` of time-varying linear feedbacks.
#[derive(Clone)]
pub struct FeedbackLaw {
    /// `t ↦ m × (n+m)` gain of the minimizer.
    pub minimizer_gain: GainFn,
    /// `t ↦ l × (n+m)` gain of the maximizer.
    pub maximizer_gain: GainFn,
    pub label: LawKind,
}

impl std::fmt::Debug for FeedbackLaw {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FeedbackLaw").field("label", &self.label).finish_non_exhaustive()
    }
}

impl FeedbackLaw {
    pub fn new(label: LawKind, minimizer_gain: GainFn, maximizer_gain: GainFn) -> Self {
        FeedbackLaw {
            minimizer_gain,
            maximizer_gain,
            label,
        }
    }

    pub fn zero(spec: &GameSpec) -> Self {
        let (m, l, s) = (spec.dims.m, spec.dims.l, spec.dims.state());
        FeedbackLaw::new(
            LawKind::Custom,
            Arc::new(move |_| DMatrix::zeros(m, s)),
            Arc::new(move |_| DMatrix::zeros(l, s)),
        )
    }

    pub fn u(&self, t: f64, z: &DVector<f64>) -> DVector<f64> {
        (self.minimizer_gain)(t) * z
    }

    pub fn v(&self, t: f64, z: &DVector<f64>) -> DVector<f64> {
        (self.maximizer_gain)(t) * z
    }

    /// Minimizer gain replaced by `K_u(t) + delta`.
    pub fn with_minimizer_offset(&self, delta: DMatrix<f64>) -> Self {
        let base = self.minimizer_gain.clone();
        FeedbackLaw::new(
            LawKind::Custom,
            Arc::new(move |t| base(t) + &delta),
            self.maximizer_gain.clone(),
        )
    }

    /// Maximizer gain replaced by `K_v(t) + delta`.
    pub fn with_maximizer_offset(&self, delta: DMatrix<f64>) -> Self {
        let base = self.maximizer_gain.clone();
        FeedbackLaw::new(
            LawKind::Custom,
            self.minimizer_gain.clone(),
            Arc::new(move |t| base(t) + &delta),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub grid: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub controls_u: Vec<DVector<f64>>,
    pub controls_v: Vec<DVector<f64>>,
    /// Accumulated integrand of the cost functional.
    pub running_cost: Vec<f64>,
    /// `running_cost(t_f) + x(t_f)ᵀ F₁ x(t_f)`.
    pub total_cost: f64,
    /// Augmented `(z, cost)` trajectory with dense output.
    pub augmented: MatrixTrajectory,
}

fn running_integrand(spec: &GameSpec, t: f64, z: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    quad_form(&spec.d(t), z) + spec.epsilon * spec.epsilon * u.norm_squared()
        - quad_form(&spec.g.eval(t), v)
}

fn check_gains(spec: &GameSpec, law: &FeedbackLaw) -> Result<()> {
    let s = spec.dims.state();
    let ku = (law.minimizer_gain)(0.0);
    if ku.shape() != (spec.dims.m, s) {
        return Err(Error::Dimension {
            field: "minimizer gain".into(),
            expected: format!("{}x{}", spec.dims.m, s),
            got: format!("{}x{}", ku.nrows(), ku.ncols()),
        });
    }
    let kv = (law.maximizer_gain)(0.0);
    if kv.shape() != (spec.dims.l, s) {
        return Err(Error::Dimension {
            field: "maximizer gain".into(),
            expected: format!("{}x{}", spec.dims.l, s),
            got: format!("{}x{}", kv.nrows(), kv.ncols()),
        });
    }
    Ok(())
}

/// Output grid refinement: steps of `ε/5` across `[t_f − 10ε, t_f]`.
fn layer_points(spec: &GameSpec) -> Vec<f64> {
    let eps = spec.epsilon;
    let start = (spec.t_f - 10.0 * eps).max(0.0);
    let h = eps / 5.0;
    let count = ((spec.t_f - start) / h).floor() as usize;
    (0..=count).map(|k| start + h * k as f64).collect()
}

pub fn simulate(spec: &GameSpec, law: &FeedbackLaw, cfg: &IntegratorConfig) -> Result<TrajectoryRecord> {
    spec.check_dimensions()?;
    check_gains(spec, law)?;
    let s = spec.dims.state();
    let b = spec.b();
    let rhs = |t: f64, w: &DMatrix<f64>| {
        let z: DVector<f64> = w.rows(0, s).column(0).into_owned();
        let u = law.u(t, &z);
        let v = law.v(t, &z);
        let dz = spec.a(t) * &z + &b * &u + spec.c(t) * &v;
        let mut out = DMatrix::zeros(s + 1, 1);
        out.rows_mut(0, s).copy_from(&dz);
        out[(s, 0)] = running_integrand(spec, t, &z, &u, &v);
        out
    };
    let mut w0 = DMatrix::zeros(s + 1, 1);
    w0.rows_mut(0, s).copy_from(&spec.z0());

    let mut cfg = cfg.clone().with_layer(spec.epsilon);
    cfg.symmetrize = false;
    cfg.extra_points.extend(layer_points(spec));
    let traj = integrate_initial(rhs, w0, 0.0, spec.t_f, &cfg)?;

    let mut states = Vec::with_capacity(traj.len());
    let mut controls_u = Vec::with_capacity(traj.len());
    let mut controls_v = Vec::with_capacity(traj.len());
    let mut running_cost = Vec::with_capacity(traj.len());
    for (t, w) in traj.grid.iter().zip(&traj.values) {
        let z: DVector<f64> = w.rows(0, s).column(0).into_owned();
        controls_u.push(law.u(*t, &z));
        controls_v.push(law.v(*t, &z));
        running_cost.push(w[(s, 0)]);
        states.push(z);
    }
    let z_f = states.last().expect("non-empty trajectory");
    let x_f = z_f.rows(0, spec.dims.n).into_owned();
    let total_cost = running_cost.last().copied().unwrap_or(0.0) + quad_form(&spec.f1, &x_f);
    Ok(TrajectoryRecord {
        grid: traj.grid.clone(),
        states,
        controls_u,
        controls_v,
        running_cost,
        total_cost,
        augmented: traj,
    })
}

/// Cost by trapezoid quadrature of the integrand on `points` uniform samples
/// of the (Hermite-interpolated) closed-loop state.
pub fn trapezoid_cost(spec: &GameSpec, law: &FeedbackLaw, rec: &TrajectoryRecord, points: usize) -> f64 {
    let s = spec.dims.state();
    let points = points.max(2);
    let h = spec.t_f / (points - 1) as f64;
    let integrand = |k: usize| {
        let t = if k + 1 == points { spec.t_f } else { h * k as f64 };
        let z: DVector<f64> = rec.augmented.eval_clamped(t).rows(0, s).column(0).into_owned();
        running_integrand(spec, t, &z, &law.u(t, &z), &law.v(t, &z))
    };
    let mut acc = 0.5 * (integrand(0) + integrand(points - 1));
    for k in 1..points - 1 {
        acc += integrand(k);
    }
    let z_f = rec.states.last().expect("non-empty trajectory");
    acc * h + quad_form(&spec.f1, &z_f.rows(0, spec.dims.n).into_owned())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSeries {
    pub name: String,
    pub values: Vec<f64>,
    pub peak_abs: f64,
    pub peak_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlHistories {
    pub grid: Vec<f64>,
    pub u: Vec<ChannelSeries>,
    pub v: Vec<ChannelSeries>,
}

fn channels(prefix: &str, grid: &[f64], samples: &[DVector<f64>]) -> Vec<ChannelSeries> {
    let width = samples.first().map(|s| s.len()).unwrap_or(0);
    (0..width)
        .map(|j| {
            let values: Vec<f64> = samples.iter().map(|s| s[j]).collect();
            let (peak_abs, peak_time) = values
                .iter()
                .zip(grid)
                .fold((0.0, grid.first().copied().unwrap_or(0.0)), |(p, pt), (v, t)| {
                    if v.abs() > p {
                        (v.abs(), *t)
                    } else {
                        (p, pt)
                    }
                });
            ChannelSeries {
                name: format!("{prefix}_{}", j + 1),
                values,
                peak_abs,
                peak_time,
            }
        })
        .collect()
}

pub fn control_histories(rec: &TrajectoryRecord) -> ControlHistories {
    ControlHistories {
        grid: rec.grid.clone(),
        u: channels("u", &rec.grid, &rec.controls_u),
        v: channels("v", &rec.grid, &rec.controls_v),
    }
}

/// CSV with columns `t, z_1.., u_1.., v_1.., running_cost`.
pub fn write_csv<W: Write>(rec: &TrajectoryRecord, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let s = rec.states.first().map(|z| z.len()).unwrap_or(0);
    let m = rec.controls_u.first().map(|z| z.len()).unwrap_or(0);
    let l = rec.controls_v.first().map(|z| z.len()).unwrap_or(0);
    let mut header = vec!["t".to_string()];
    header.extend((1..=s).map(|i| format!("z_{i}")));
    header.extend((1..=m).map(|i| format!("u_{i}")));
    header.extend((1..=l).map(|i| format!("v_{i}")));
    header.push("running_cost".into());
    w.write_record(&header)?;
    for k in 0..rec.grid.len() {
        let mut row = vec![format!("{:.17e}", rec.grid[k])];
        row.extend(rec.states[k].iter().map(|x| format!("{x:.17e}")));
        row.extend(rec.controls_u[k].iter().map(|x| format!("{x:.17e}")));
        row.extend(rec.controls_v[k].iter().map(|x| format!("{x:.17e}")));
        row.push(format!("{:.17e}", rec.running_cost[k]));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game_model::pursuit_evasion;
    use crate::matfn::{MatrixFunction, ScalarFunction};

    fn still_spec() -> GameSpec {
        let mut s = pursuit_evasion(0.1);
        s.a2 = MatrixFunction::zeros(1, 2);
        s.a4 = MatrixFunction::zeros(2, 2);
        s.x0 = DVector::zeros(1);
        s.y0 = DVector::zeros(2);
        s.lambda = vec![ScalarFunction::Constant(1.0), ScalarFunction::Constant(0.0)];
        s
    }

    #[test]
    fn zero_everything_gives_zero_cost() {
        let spec = still_spec();
        let rec = simulate(&spec, &FeedbackLaw::zero(&spec), &IntegratorConfig::default()).unwrap();
        assert!(rec.states.iter().all(|z| z.amax() == 0.0));
        assert_eq!(rec.total_cost, 0.0);
        assert_eq!(rec.running_cost[0], 0.0);
        let h = control_histories(&rec);
        assert!(h.u.iter().chain(&h.v).all(|c| c.peak_abs == 0.0));
    }

    #[test]
    fn open_loop_cost_matches_closed_form() {
        // x' = y1, y1' = y2, y2' = -y2 with zero controls; compare against
        // a fine fixed-step quadrature of the analytic solution.
        let spec = pursuit_evasion(0.1);
        let rec = simulate(&spec, &FeedbackLaw::zero(&spec), &IntegratorConfig::default()).unwrap();
        let y1 = |t: f64| 2.0 + 1.0 - (-t).exp();
        let x = |t: f64| 3.0 * t - 1.0 + (-t).exp();
        let n = 200_000;
        let h = 1.5 / n as f64;
        let f = |t: f64| 6.4 * x(t).powi(2) + 10.0 * y1(t).powi(2);
        let mut acc = 0.5 * (f(0.0) + f(1.5));
        for k in 1..n {
            acc += f(k as f64 * h);
        }
        let exact = acc * h + 0.5 * x(1.5).powi(2);
        assert!((rec.total_cost - exact).abs() <= 1e-6 * exact, "{} vs {exact}", rec.total_cost);
    }

    #[test]
    fn bad_gain_shape_rejected() {
        let spec = pursuit_evasion(0.1);
        let law = FeedbackLaw::new(
            LawKind::Custom,
            Arc::new(|_| DMatrix::zeros(3, 3)),
            Arc::new(|_| DMatrix::zeros(2, 3)),
        );
        assert!(matches!(
            simulate(&spec, &law, &IntegratorConfig::default()),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn csv_header_and_rows() {
        let spec = pursuit_evasion(0.2);
        let rec = simulate(&spec, &FeedbackLaw::zero(&spec), &IntegratorConfig::default()).unwrap();
        let mut buf = Vec::new();
        write_csv(&rec, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,z_1,z_2,z_3,u_1,u_2,v_1,v_2,running_cost");
        assert_eq!(lines.count(), rec.grid.len());
    }

    #[test]
    fn layer_grid_refined() {
        let spec = pursuit_evasion(0.05);
        let rec = simulate(&spec, &FeedbackLaw::zero(&spec), &IntegratorConfig {
            uniform_points: 11,
            ..Default::default()
        })
        .unwrap();
        let in_layer = rec.grid.iter().filter(|t| **t >= 1.5 - 0.5 - 1e-12).count();
        assert!(in_layer >= 51, "{in_layer}");
    }
}
