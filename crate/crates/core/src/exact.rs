//! Full game Riccati problem for a fixed `ε`.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::game_model::{validate_spec, Dimensions, GameSpec};
use crate::linalg::{quad_form, spectral_norm};
use crate::ode::{integrate_terminal, IntegratorConfig, MatrixTrajectory};
use crate::simulator::{FeedbackLaw, LawKind};

/// `K₁..K₆` with the `ε` and `ε²` factors divided out.
#[derive(Debug, Clone, PartialEq)]
pub struct KBlocks {
    pub k1: MatrixTrajectory,
    pub k2: MatrixTrajectory,
    pub k3: MatrixTrajectory,
    pub k4: MatrixTrajectory,
    pub k5: MatrixTrajectory,
    pub k6: MatrixTrajectory,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution {
    pub k: MatrixTrajectory,
    pub epsilon: f64,
    /// `z₀ᵀ K(0, ε) z₀`.
    pub value: f64,
    pub blocks: KBlocks,
}

/// Right-hand side `−KA − AᵀK + K(S_u − S_v)K − D`.
///
/// The minimizer term is formed as `(ε⁻¹BᵀK)ᵀ(ε⁻¹BᵀK)`, where `BᵀK` is just
/// the lower `m` rows of `K`.
pub fn riccati_rhs(spec: &GameSpec) -> impl Fn(f64, &DMatrix<f64>) -> DMatrix<f64> + '_ {
    let n = spec.dims.n;
    let m = spec.dims.m;
    let inv_eps = 1.0 / spec.epsilon;
    move |t, k| {
        let a = spec.a(t);
        let ka = k * &a;
        let bk = k.rows(n, m) * inv_eps;
        let svk = spec.s_v(t) * k;
        -&ka - ka.transpose() + bk.transpose() * bk - k * svk - spec.d(t)
    }
}

pub fn solve_exact(spec: &GameSpec, cfg: &IntegratorConfig) -> Result<ExactSolution> {
    if spec.epsilon.is_nan() || spec.epsilon <= 0.0 {
        return Err(Error::InvalidParameter("epsilon must be positive".into()));
    }
    let report = validate_spec(spec)?;
    // The full problem only needs D ⪰ 0; strict positivity of Λ matters to
    // the asymptotic construction alone.
    let blocking = report
        .failures()
        .find(|c| !(c.name.starts_with("lambda_") && c.name.ends_with("positive") && c.worst_value >= 0.0));
    if let Some(fail) = blocking {
        return Err(Error::Validation(format!("{}: {}", fail.name, fail.message)));
    }
    let cfg = cfg.clone().with_layer(spec.epsilon).with_symmetrize(true);
    let k = integrate_terminal(riccati_rhs(spec), spec.f(), spec.t_f, &cfg)
        .map_err(|e| e.blowup_as("A1", &format!("K(t, ε = {})", spec.epsilon)))?;
    let value = quad_form(&k.values[0], &spec.z0());
    let blocks = extract_blocks(&k, spec.dims, spec.epsilon);
    Ok(ExactSolution {
        k,
        epsilon: spec.epsilon,
        value,
        blocks,
    })
}

pub fn extract_blocks(k: &MatrixTrajectory, dims: Dimensions, epsilon: f64) -> KBlocks {
    let Dimensions { n, m1, .. } = dims;
    let m2 = dims.m2();
    let (e1, e2) = (1.0 / epsilon, 1.0 / (epsilon * epsilon));
    KBlocks {
        k1: k.block(0, 0, n, n, 1.0),
        k2: k.block(0, n, n, m1, e1),
        k3: k.block(0, n + m1, n, m2, e1),
        k4: k.block(n, n, m1, m1, e1),
        k5: k.block(n, n + m1, m1, m2, e2),
        k6: k.block(n + m1, n + m1, m2, m2, e2),
    }
}

/// Rebuilds `K(t_i)` at grid index `i` from the scaled blocks.
pub fn reassemble(blocks: &KBlocks, epsilon: f64, i: usize) -> DMatrix<f64> {
    let (n, m1, m2) = (
        blocks.k1.shape().0,
        blocks.k4.shape().0,
        blocks.k6.shape().0,
    );
    let s = n + m1 + m2;
    let e2 = epsilon * epsilon;
    let mut k = DMatrix::zeros(s, s);
    let mut put = |r0: usize, c0: usize, m: DMatrix<f64>| {
        k.view_mut((c0, r0), (m.ncols(), m.nrows())).copy_from(&m.transpose());
        k.view_mut((r0, c0), m.shape()).copy_from(&m);
    };
    put(0, 0, blocks.k1.values[i].clone());
    put(0, n, &blocks.k2.values[i] * epsilon);
    put(0, n + m1, &blocks.k3.values[i] * epsilon);
    put(n, n, &blocks.k4.values[i] * epsilon);
    put(n, n + m1, &blocks.k5.values[i] * e2);
    put(n + m1, n + m1, &blocks.k6.values[i] * e2);
    k
}

/// `u = −ε⁻²BᵀK z`, `v = G⁻¹CᵀK z`.
pub fn feedback_from(spec: &GameSpec, k: Arc<dyn Fn(f64) -> DMatrix<f64> + Send + Sync>, label: LawKind) -> FeedbackLaw {
    let n = spec.dims.n;
    let m = spec.dims.m;
    let inv_eps2 = 1.0 / (spec.epsilon * spec.epsilon);
    let k_u = k.clone();
    let spec_v = spec.clone();
    FeedbackLaw::new(
        label,
        Arc::new(move |t| k_u(t).rows(n, m) * (-inv_eps2)),
        Arc::new(move |t| spec_v.g_inv(t) * spec_v.c(t).transpose() * k(t)),
    )
}

pub fn exact_feedback(sol: &ExactSolution, spec: &GameSpec) -> FeedbackLaw {
    let k = sol.k.clone();
    feedback_from(spec, Arc::new(move |t| k.eval_clamped(t)), LawKind::Exact)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    /// Largest residual norm over the spot checks.
    pub max_residual: f64,
    /// Largest `residual / (1 + ‖K‖²‖S_u‖)`.
    pub max_scaled: f64,
    pub worst_t: f64,
}

impl ResidualReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_scaled <= tol
    }
}

/// Spot-checks `dK/dt − rhs(K)` at `points` interval midpoints.
pub fn riccati_residual(spec: &GameSpec, sol: &ExactSolution, points: usize) -> ResidualReport {
    let rhs = riccati_rhs(spec);
    let su_norm = 1.0 / (spec.epsilon * spec.epsilon);
    let mut rep = ResidualReport {
        max_residual: 0.0,
        max_scaled: 0.0,
        worst_t: 0.0,
    };
    for t in sol.k.spot_midpoints(points) {
        let k = sol.k.eval_clamped(t);
        let dk = sol.k.eval_derivative(t).expect("midpoint inside grid");
        let r = spectral_norm(&(dk - rhs(t, &k)));
        let kn = spectral_norm(&k);
        let scaled = r / (1.0 + kn * kn * su_norm);
        rep.max_residual = rep.max_residual.max(r);
        if scaled > rep.max_scaled {
            rep.max_scaled = scaled;
            rep.worst_t = t;
        }
    }
    rep
}
