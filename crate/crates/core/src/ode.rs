//! Matrix-valued initial/terminal-value integration with dense output.
//!
//! Two schemes are available: classical fixed-step RK4 and the embedded
//! Dormand–Prince 5(4) pair with a standard error-ratio controller. Accepted
//! points are stored together with the right-hand side there, so the
//! trajectory can be evaluated anywhere by cubic Hermite interpolation.
//!
//! Terminal-value problems are integrated backward from `t_f`; an optional
//! boundary-layer hint clamps the step to `ε/2` on the window
//! `[t_f − 10ε·ln(1/ε), t_f]`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{asymmetry, symmetrize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Classical fixed-step fourth-order Runge–Kutta with step `h_init`.
    Rk4,
    /// Dormand–Prince 5(4) with local error control.
    #[default]
    Rk45,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rk4" => Ok(Method::Rk4),
            "rk45" => Ok(Method::Rk45),
            other => Err(Error::InvalidParameter(format!(
                "unknown method `{other}` (expected rk4 or rk45)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    /// Replace the state by its symmetric part after every accepted step.
    pub symmetrize: bool,
    pub max_steps: usize,
    /// Uniform output points that every adaptive run lands on exactly.
    pub uniform_points: usize,
    /// Additional output times (ignored outside the integration interval).
    pub extra_points: Vec<f64>,
    /// Boundary-layer width parameter for the step clamp near the right end.
    pub layer_epsilon: Option<f64>,
    /// Overflow guard on the max-abs entry; crossing it signals escape.
    pub blowup_guard: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::Rk45,
            rtol: 1e-8,
            atol: 1e-10,
            h_init: 1e-3,
            h_min: 1e-13,
            h_max: f64::INFINITY,
            symmetrize: false,
            max_steps: 2_000_000,
            uniform_points: 401,
            extra_points: Vec::new(),
            layer_epsilon: None,
            blowup_guard: 1e12,
        }
    }
}

impl IntegratorConfig {
    pub fn rk4(h: f64) -> Self {
        IntegratorConfig {
            method: Method::Rk4,
            h_init: h,
            h_max: h,
            h_min: h.min(1e-13),
            ..Default::default()
        }
    }

    pub fn with_layer(mut self, epsilon: f64) -> Self {
        self.layer_epsilon = Some(epsilon);
        self
    }

    pub fn with_symmetrize(mut self, on: bool) -> Self {
        self.symmetrize = on;
        self
    }

    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::InvalidParameter(
                "rtol and atol must be positive".into(),
            ));
        }
        if !(self.h_min <= self.h_init && self.h_init <= self.h_max) || self.h_min <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "step bounds must satisfy 0 < h_min <= h_init <= h_max (got {}, {}, {})",
                self.h_min, self.h_init, self.h_max
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidParameter("max_steps must be positive".into()));
        }
        Ok(())
    }
}

/// A gridded matrix-valued function with Hermite dense output.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixTrajectory {
    pub grid: Vec<f64>,
    pub values: Vec<DMatrix<f64>>,
    pub derivs: Vec<DMatrix<f64>>,
    pub symmetric: bool,
}

impl MatrixTrajectory {
    pub fn new(
        grid: Vec<f64>,
        values: Vec<DMatrix<f64>>,
        derivs: Vec<DMatrix<f64>>,
        symmetric: bool,
    ) -> Self {
        debug_assert_eq!(grid.len(), values.len());
        debug_assert_eq!(grid.len(), derivs.len());
        debug_assert!(grid.windows(2).all(|w| w[0] < w[1]));
        MatrixTrajectory {
            grid,
            values,
            derivs,
            symmetric,
        }
    }

    pub fn start(&self) -> f64 {
        self.grid[0]
    }

    pub fn end(&self) -> f64 {
        self.grid[self.grid.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.values[0].shape()
    }

    fn locate(&self, t: f64) -> usize {
        let i = self.grid.partition_point(|&g| g <= t);
        i.saturating_sub(1).min(self.grid.len().saturating_sub(2))
    }

    fn in_range(&self, t: f64) -> Result<f64> {
        let slack = 1e-12 * (1.0 + self.end().abs());
        if t < self.start() - slack || t > self.end() + slack || t.is_nan() {
            return Err(Error::OutOfRange {
                t,
                start: self.start(),
                end: self.end(),
            });
        }
        Ok(t.clamp(self.start(), self.end()))
    }

    pub fn eval(&self, t: f64) -> Result<DMatrix<f64>> {
        let t = self.in_range(t)?;
        Ok(self.eval_clamped(t))
    }

    /// Like [`eval`](Self::eval) but clamps `t` into the grid range.
    pub fn eval_clamped(&self, t: f64) -> DMatrix<f64> {
        if self.grid.len() == 1 {
            return self.values[0].clone();
        }
        let t = t.clamp(self.start(), self.end());
        let i = self.locate(t);
        let (t0, t1) = (self.grid[i], self.grid[i + 1]);
        if t == t0 {
            return self.values[i].clone();
        }
        if t == t1 {
            return self.values[i + 1].clone();
        }
        let h = t1 - t0;
        let s = (t - t0) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        &self.values[i] * h00
            + &self.derivs[i] * (h10 * h)
            + &self.values[i + 1] * h01
            + &self.derivs[i + 1] * (h11 * h)
    }

    /// Time derivative of the Hermite interpolant.
    pub fn eval_derivative(&self, t: f64) -> Result<DMatrix<f64>> {
        let t = self.in_range(t)?;
        if self.grid.len() == 1 {
            return Ok(self.derivs[0].clone());
        }
        let i = self.locate(t);
        let (t0, t1) = (self.grid[i], self.grid[i + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let s2 = s * s;
        let d00 = 6.0 * s2 - 6.0 * s;
        let d10 = 3.0 * s2 - 4.0 * s + 1.0;
        let d01 = -6.0 * s2 + 6.0 * s;
        let d11 = 3.0 * s2 - 2.0 * s;
        Ok((&self.values[i] * d00 + &self.values[i + 1] * d01) / h
            + &self.derivs[i] * d10
            + &self.derivs[i + 1] * d11)
    }

    /// Midpoints of the first `count` intervals spread evenly over the grid.
    pub fn spot_midpoints(&self, count: usize) -> Vec<f64> {
        let intervals = self.grid.len().saturating_sub(1);
        if intervals == 0 {
            return Vec::new();
        }
        let count = count.min(intervals).max(1);
        (0..count)
            .map(|k| {
                let i = (k * intervals) / count;
                0.5 * (self.grid[i] + self.grid[i + 1])
            })
            .collect()
    }

    /// Scaled sub-block trajectory; exact at grid points.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize, scale: f64) -> Self {
        let take = |m: &DMatrix<f64>| m.view((r0, c0), (rows, cols)).into_owned() * scale;
        MatrixTrajectory {
            grid: self.grid.clone(),
            values: self.values.iter().map(take).collect(),
            derivs: self.derivs.iter().map(take).collect(),
            symmetric: self.symmetric && r0 == c0 && rows == cols,
        }
    }

    pub fn max_asymmetry(&self) -> f64 {
        self.values.iter().map(asymmetry).fold(0.0, f64::max)
    }
}

/// Integrates `dV/dt = rhs(t, V)` backward from `V(t_f) = terminal` to `t = 0`.
pub fn integrate_terminal<F>(
    rhs: F,
    terminal: DMatrix<f64>,
    t_f: f64,
    cfg: &IntegratorConfig,
) -> Result<MatrixTrajectory>
where
    F: Fn(f64, &DMatrix<f64>) -> DMatrix<f64>,
{
    integrate_between(rhs, terminal, t_f, 0.0, cfg)
}

/// Integrates `dV/dt = rhs(t, V)` forward from `V(t0) = initial` to `t_f`.
pub fn integrate_initial<F>(
    rhs: F,
    initial: DMatrix<f64>,
    t0: f64,
    t_f: f64,
    cfg: &IntegratorConfig,
) -> Result<MatrixTrajectory>
where
    F: Fn(f64, &DMatrix<f64>) -> DMatrix<f64>,
{
    integrate_between(rhs, initial, t0, t_f, cfg)
}

fn integrate_between<F>(
    rhs: F,
    start: DMatrix<f64>,
    t_start: f64,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<MatrixTrajectory>
where
    F: Fn(f64, &DMatrix<f64>) -> DMatrix<f64>,
{
    cfg.validate()?;
    if !(t_start.is_finite() && t_end.is_finite()) || t_start == t_end {
        return Err(Error::InvalidParameter(format!(
            "integration interval [{t_start}, {t_end}] is empty or not finite"
        )));
    }
    let symmetric = cfg.symmetrize && start.is_square();
    let mut pts = match cfg.method {
        Method::Rk45 => {
            let targets = output_targets(t_start, t_end, cfg);
            dopri(&rhs, start, t_start, targets, cfg, true)?
        }
        Method::Rk4 => rk4_fixed(&rhs, start, t_start, t_end, cfg)?,
    };
    if t_end < t_start {
        pts.reverse();
    }
    let (mut grid, mut values, mut derivs) = (Vec::new(), Vec::new(), Vec::new());
    for (t, v, d) in pts {
        grid.push(t);
        values.push(v);
        derivs.push(d);
    }
    Ok(MatrixTrajectory::new(grid, values, derivs, symmetric))
}

fn output_targets(t_start: f64, t_end: f64, cfg: &IntegratorConfig) -> Vec<f64> {
    let (lo, hi) = (t_start.min(t_end), t_start.max(t_end));
    let mut pts: Vec<f64> = Vec::new();
    if cfg.uniform_points >= 2 {
        let n = cfg.uniform_points - 1;
        pts.extend((0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64));
    }
    pts.extend(cfg.extra_points.iter().copied().filter(|t| *t > lo && *t < hi));
    pts.push(t_end);
    let dir = (t_end - t_start).signum();
    pts.retain(|t| (t - t_start) * dir > 0.0);
    pts.sort_by(|a, b| (a * dir).total_cmp(&(b * dir)));
    let tol = 1e-13 * (1.0 + hi.abs().max(lo.abs()));
    let mut out: Vec<f64> = Vec::with_capacity(pts.len());
    for t in pts {
        match out.last() {
            Some(&last) if (t - last).abs() <= tol => {
                // keep t_end exact
                if t == t_end {
                    *out.last_mut().unwrap() = t;
                }
            }
            _ => out.push(t),
        }
    }
    if let Some(last) = out.last_mut() {
        *last = t_end;
    }
    out
}

type Point = (f64, DMatrix<f64>, DMatrix<f64>);

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const GROW_MAX: f64 = 5.0;
const SHRINK_MIN: f64 = 0.2;
const ESCAPE_RESOLUTION: f64 = 1e-4;

struct Step {
    y: DMatrix<f64>,
    k7: DMatrix<f64>,
    err: f64,
}

fn dopri_step<F>(rhs: &F, t: f64, y: &DMatrix<f64>, k1: &DMatrix<f64>, h: f64, cfg: &IntegratorConfig) -> Step
where
    F: Fn(f64, &DMatrix<f64>) -> DMatrix<f64>,
{
    let k2 = rhs(t + C2 * h, &(y + k1 * (h * A21)));
    let k3 = rhs(t + C3 * h, &(y + k1 * (h * A31) + &k2 * (h * A32)));
    let k4 = rhs(
        t + C4 * h,
        &(y + k1 * (h * A41) + &k2 * (h * A42) + &k3 * (h * A43)),
    );
    let k5 = rhs(
        t + C5 * h,
        &(y + k1 * (h * A51) + &k2 * (h * A52) + &k3 * (h * A53) + &k4 * (h * A54)),
    );
    let k6 = rhs(
        t + h,
        &(y + k1 * (h * A61) + &k2 * (h * A62) + &k3 * (h * A63) + &k4 * (h * A64) + &k5 * (h * A65)),
    );
    let y_new = y + k1 * (h * A71) + &k3 * (h * A73) + &k4 * (h * A74) + &k5 * (h * A75) + &k6 * (h * A76);
    let k7 = rhs(t + h, &y_new);
    let e = k1 * E1 + &k3 * E3 + &k4 * E4 + &k5 * E5 + &k6 * E6 + &k7 * E7;
    let mut acc = 0.0;
    for ((ei, yi), yn) in e.iter().zip(y.iter()).zip(y_new.iter()) {
        let sc = cfg.atol + cfg.rtol * yi.abs().max(yn.abs());
        let r = h * ei / sc;
        acc += r * r;
    }
    let err = (acc / e.len().max(1) as f64).sqrt();
    Step { y: y_new, k7, err }
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, x| if x.is_nan() { f64::INFINITY } else { a.max(x.abs()) })
}

fn layer_window(t_hi: f64, cfg: &IntegratorConfig) -> Option<(f64, f64)> {
    let eps = cfg.layer_epsilon?;
    if !(eps > 0.0 && eps < 1.0) {
        return None;
    }
    Some((t_hi - 10.0 * eps * (1.0 / eps).ln(), 0.5 * eps))
}

fn dopri<F>(
    rhs: &F,
    y0: DMatrix<f64>,
    t_start: f64,
    targets: Vec<f64>,
    cfg: &IntegratorConfig,
    refine_escape: bool,
) -> Result<Vec<Point>>
where
    F: Fn(f64, &DMatrix<f64>) -> DMatrix<f64>,
{
    let t_end = *targets.last().expect("at least one target");
    let dir = (t_end - t_start).signum();
    let window = layer_window(t_start.max(t_end), cfg);

    let mut t = t_start;
    let mut y = y0;
    if cfg.symmetrize && y.is_square() {
        symmetrize(&mut y);
    }
    let mut k1 = rhs(t, &y);
    let mut out = vec![(t, y.clone(), k1.clone())];
    let mut h = cfg.h_init.min(cfg.h_max);
    let mut next = 0;
    let mut steps = 0usize;

    while next < targets.len() {
        steps += 1;
        if steps > cfg.max_steps {
            return Err(Error::MaxSteps {
                max_steps: cfg.max_steps,
                t,
            });
        }
        let mut h_cap = cfg.h_max;
        if let Some((w0, h_layer)) = window {
            if t.max(t + dir * h) > w0 {
                h_cap = h_cap.min(h_layer);
            }
        }
        h = h.min(h_cap);
        let target = targets[next];
        let remaining = (target - t).abs();
        let clipped = h >= remaining * (1.0 - 1e-12);
        let h_step = if clipped { remaining } else { h };

        let step = dopri_step(rhs, t, &y, &k1, dir * h_step, cfg);
        let factor = if step.err == 0.0 {
            GROW_MAX
        } else if step.err.is_finite() {
            (SAFETY * step.err.powf(-0.2)).clamp(SHRINK_MIN, GROW_MAX)
        } else {
            SHRINK_MIN
        };

        if step.err.is_nan() || step.err > 1.0 {
            h = h_step * factor.min(1.0);
            if h < cfg.h_min {
                if max_abs(&y) > cfg.blowup_guard.sqrt() {
                    return Err(Error::BlowUp {
                        t_escape: t,
                        guard: cfg.blowup_guard,
                    });
                }
                return Err(Error::StepSizeUnderflow { h_min: cfg.h_min, t });
            }
            continue;
        }

        let t_new = if clipped { target } else { t + dir * h_step };
        let mut y_new = step.y;
        let mut k_new = step.k7;
        if cfg.symmetrize && y_new.is_square() {
            symmetrize(&mut y_new);
            symmetrize(&mut k_new);
        }
        if max_abs(&y_new) > cfg.blowup_guard {
            let t_escape = if refine_escape {
                refine_escape_time(rhs, &y, t, h_step, dir, cfg)
            } else {
                t_new
            };
            return Err(Error::BlowUp {
                t_escape,
                guard: cfg.blowup_guard,
            });
        }
        t = t_new;
        y = y_new;
        k1 = k_new;
        out.push((t, y.clone(), k1.clone()));
        if clipped {
            next += 1;
            h = h.max(h_step * factor);
        } else {
            h = h_step * factor;
        }
    }
    Ok(out)
}

/// Bisects on the escape time inside the step that crossed the guard.
fn refine_escape_time<F>(rhs: &F, y_a: &DMatrix<f64>, t_a: f64, span: f64, dir: f64, cfg: &IntegratorConfig) -> f64
where
    F: Fn(f64, &DMatrix<f64>) -> DMatrix<f64>,
{
    let (mut lo, mut hi) = (0.0, span);
    let probe_cfg = IntegratorConfig {
        uniform_points: 0,
        extra_points: Vec::new(),
        max_steps: 200_000,
        ..cfg.clone()
    };
    while hi - lo > ESCAPE_RESOLUTION {
        let mid = 0.5 * (lo + hi);
        let reached = dopri(rhs, y_a.clone(), t_a, vec![t_a + dir * mid], &probe_cfg, false)
            .map(|pts| pts.last().map(|p| max_abs(&p.1) <= cfg.blowup_guard).unwrap_or(false))
            .unwrap_or(false);
        if reached {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    t_a + dir * 0.5 * (lo + hi)
}

fn rk4_fixed<F>(rhs: &F, y0: DMatrix<f64>, t_start: f64, t_end: f64, cfg: &IntegratorConfig) -> Result<Vec<Point>>
where
    F: Fn(f64, &DMatrix<f64>) -> DMatrix<f64>,
{
    let span = t_end - t_start;
    let n = ((span.abs() / cfg.h_init) - 1e-9).ceil().max(1.0) as usize;
    if n > cfg.max_steps {
        return Err(Error::MaxSteps {
            max_steps: cfg.max_steps,
            t: t_start,
        });
    }
    let h = span / n as f64;
    let mut y = y0;
    if cfg.symmetrize && y.is_square() {
        symmetrize(&mut y);
    }
    let mut k1 = rhs(t_start, &y);
    let mut out = vec![(t_start, y.clone(), k1.clone())];
    for i in 0..n {
        let t = t_start + h * i as f64;
        let k2 = rhs(t + 0.5 * h, &(&y + &k1 * (0.5 * h)));
        let k3 = rhs(t + 0.5 * h, &(&y + &k2 * (0.5 * h)));
        let k4 = rhs(t + h, &(&y + &k3 * h));
        y += (&k1 + &k2 * 2.0 + &k3 * 2.0 + &k4) * (h / 6.0);
        if cfg.symmetrize && y.is_square() {
            symmetrize(&mut y);
        }
        let t_new = if i + 1 == n { t_end } else { t_start + h * (i + 1) as f64 };
        if max_abs(&y) > cfg.blowup_guard {
            return Err(Error::BlowUp {
                t_escape: t_new,
                guard: cfg.blowup_guard,
            });
        }
        k1 = rhs(t_new, &y);
        out.push((t_new, y.clone(), k1.clone()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, v)
    }

    fn k1_closed(t: f64) -> f64 {
        8.0 * ((1.0f64 / 16.0).atan() + 1.2 - 0.8 * t).tan()
    }

    fn k1_rhs(_t: f64, k: &DMatrix<f64>) -> DMatrix<f64> {
        k.map(|x| -(6.4 + 0.1 * x * x))
    }

    #[test]
    fn zero_rhs_constant() {
        let tr = integrate_terminal(|_, k| k * 0.0, scalar(0.7), 1.5, &IntegratorConfig::default()).unwrap();
        assert!(tr.values.iter().all(|v| v[(0, 0)] == 0.7));
        assert_eq!(tr.end(), 1.5);
        assert_eq!(tr.start(), 0.0);
    }

    #[test]
    fn quadratic_rhs_zero_terminal() {
        let tr = integrate_terminal(|_, k| k * k, scalar(0.0), 1.5, &IntegratorConfig::default()).unwrap();
        assert!(tr.values.iter().all(|v| v[(0, 0)] == 0.0));
    }

    #[test]
    fn outer_riccati_closed_form() {
        let tr = integrate_terminal(k1_rhs, scalar(0.5), 1.5, &IntegratorConfig::default()).unwrap();
        assert_eq!(tr.values.last().unwrap()[(0, 0)], 0.5);
        let err = tr
            .grid
            .iter()
            .zip(&tr.values)
            .map(|(t, v)| (v[(0, 0)] - k1_closed(*t)).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-8, "max error {err:e}");
    }

    #[test]
    fn forward_constant_and_exponential() {
        let tr = integrate_initial(|_, z| z * 0.0, scalar(3.0), 0.0, 2.0, &IntegratorConfig::default()).unwrap();
        assert!(tr.values.iter().all(|v| v[(0, 0)] == 3.0));
        let a = -1.3;
        let cfg = IntegratorConfig::default();
        let tr = integrate_initial(|_, z| z * a, scalar(1.0), 0.0, 2.0, &cfg).unwrap();
        for (t, v) in tr.grid.iter().zip(&tr.values) {
            let exact = (a * t).exp();
            assert!((v[(0, 0)] - exact).abs() <= 10.0 * cfg.rtol * exact + cfg.atol);
        }
    }

    #[test]
    fn eval_exact_at_grid_and_hermite_on_cubics() {
        let cubic = |t: f64| 1.0 - 2.0 * t + 0.5 * t * t * t;
        let dcubic = |t: f64| -2.0 + 1.5 * t * t;
        let grid = vec![0.0, 0.4, 1.1, 1.5];
        let tr = MatrixTrajectory::new(
            grid.clone(),
            grid.iter().map(|&t| scalar(cubic(t))).collect(),
            grid.iter().map(|&t| scalar(dcubic(t))).collect(),
            true,
        );
        for &t in &grid {
            assert_eq!(tr.eval(t).unwrap()[(0, 0)], cubic(t));
        }
        for t in [0.2, 0.77, 1.3] {
            assert!((tr.eval(t).unwrap()[(0, 0)] - cubic(t)).abs() < 1e-14);
            assert!((tr.eval_derivative(t).unwrap()[(0, 0)] - dcubic(t)).abs() < 1e-13);
        }
        assert!(matches!(tr.eval(1.6), Err(Error::OutOfRange { .. })));
        assert!(matches!(tr.eval(-0.1), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn linear_midpoint_exact() {
        let tr = integrate_initial(|_, _| scalar(2.0), scalar(1.0), 0.0, 1.0, &IntegratorConfig::default()).unwrap();
        let mid = 0.5 * (tr.grid[3] + tr.grid[4]);
        assert!((tr.eval(mid).unwrap()[(0, 0)] - (1.0 + 2.0 * mid)).abs() < 1e-14);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let max_err = |h: f64| {
            let tr = integrate_terminal(k1_rhs, scalar(0.5), 1.5, &IntegratorConfig::rk4(h)).unwrap();
            tr.grid
                .iter()
                .zip(&tr.values)
                .map(|(t, v)| (v[(0, 0)] - k1_closed(*t)).abs())
                .fold(0.0, f64::max)
        };
        let e1 = max_err(0.05);
        let e2 = max_err(0.025);
        let ratio = e1 / e2;
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn boundary_layer_growth_resolved() {
        // ε k' = -k, k(t_f) = 1 ⇒ k(t) = exp((t_f - t)/ε); short horizon keeps it finite
        let eps = 1e-3;
        let t_f = 0.02;
        let cfg = IntegratorConfig::default().with_layer(eps);
        let tr = integrate_terminal(move |_, k| k * (-1.0 / eps), scalar(1.0), t_f, &cfg).unwrap();
        let t = t_f - 5.0 * eps;
        let exact = ((t_f - t) / eps).exp();
        let rel = (tr.eval(t).unwrap()[(0, 0)] - exact).abs() / exact;
        assert!(rel <= 1e-6, "relative error {rel:e}");
    }

    #[test]
    fn symmetrize_matches_unsymmetrized_for_symmetric_rhs() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -0.3, -1.0]);
        let d = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 0.5]);
        let rhs = |_t: f64, k: &DMatrix<f64>| -(k * &a) - a.transpose() * k - k * k * 0.3 - &d;
        let f = DMatrix::from_row_slice(2, 2, &[0.4, 0.1, 0.1, 0.2]);
        let cfg = IntegratorConfig::default();
        let plain = integrate_terminal(rhs, f.clone(), 1.0, &cfg).unwrap();
        let sym = integrate_terminal(rhs, f, 1.0, &cfg.clone().with_symmetrize(true)).unwrap();
        for t in [0.0, 0.3, 0.9] {
            let diff = (plain.eval(t).unwrap() - sym.eval(t).unwrap()).amax();
            assert!(diff <= 10.0 * cfg.rtol, "diff {diff:e}");
        }
        assert!(sym.max_asymmetry() == 0.0);
    }

    #[test]
    fn blowup_reports_escape_time() {
        // k' = -(1 + k²), k(2) = 0 ⇒ k = tan(2 - t), escapes at t = 2 - π/2
        let cfg = IntegratorConfig::default();
        let err = integrate_terminal(|_, k| k.map(|x| -(1.0 + x * x)), scalar(0.0), 2.0, &cfg).unwrap_err();
        match err {
            Error::BlowUp { t_escape, .. } => {
                let exact = 2.0 - std::f64::consts::FRAC_PI_2;
                assert!((t_escape - exact).abs() <= 1e-4, "t_escape {t_escape}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn max_steps_reported() {
        let cfg = IntegratorConfig {
            max_steps: 5,
            ..Default::default()
        };
        let err = integrate_terminal(k1_rhs, scalar(0.5), 1.5, &cfg).unwrap_err();
        assert!(matches!(err, Error::MaxSteps { .. }));
    }

    #[test]
    fn bad_config_rejected() {
        let cfg = IntegratorConfig {
            h_min: 1.0,
            h_init: 0.1,
            ..Default::default()
        };
        assert!(integrate_terminal(k1_rhs, scalar(0.5), 1.5, &cfg).is_err());
        let cfg = IntegratorConfig {
            rtol: 0.0,
            ..Default::default()
        };
        assert!(integrate_terminal(k1_rhs, scalar(0.5), 1.5, &cfg).is_err());
    }
}
