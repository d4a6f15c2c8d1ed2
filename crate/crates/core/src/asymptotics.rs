//! Zero-order asymptotic solution of the cheap-control game.
//!
//! Outer terms come from two reduced Riccati problems and three algebraic
//! relations; boundary corrections in the stretched time
//! `τ = (t − t_f)/ε` are closed-form and use data frozen at `t_f`.
//!
//! Nothing here forms `ε⁻² B Bᵀ`. Wherever the minimizer weight is needed,
//! the `ε` scalings of the block structure are cancelled by hand.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::game_model::{partition, BlockPartition, Dimensions, GameSpec};
use crate::linalg::{quad_form, spectral_norm};
use crate::ode::{integrate_terminal, IntegratorConfig, MatrixTrajectory};
use crate::simulator::{FeedbackLaw, GainFn, LawKind};

/// Marker for an outer term that vanishes identically.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZeroBlock {
    pub rows: usize,
    pub cols: usize,
}

impl ZeroBlock {
    pub fn eval(&self) -> DMatrix<f64> {
        DMatrix::zeros(self.rows, self.cols)
    }
}

/// Closed-form boundary-layer corrections in `τ ≤ 0`.
///
/// `H₁(τ) = exp(Λ^{1/2}(t_f) τ)` and `H₂(τ) = (I + H₁²)⁻¹` are diagonal, so
/// everything is computed entrywise.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCorrections {
    /// `F₁ Ā₂(t_f) Λ^{-1/2}(t_f)`, `n × m1`.
    pub f1a2l: DMatrix<f64>,
    /// Diagonal of `Λ^{1/2}(t_f)`.
    pub lhalf_tf: DVector<f64>,
    /// `Ā₆(t_f)`, `m1 × (m − m1)`.
    pub a6_tf: DMatrix<f64>,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayConstants {
    pub a2: f64,
    pub a4: f64,
    pub a5: f64,
    /// Whether the fitted envelopes also hold on the extended check grid.
    pub verified: bool,
}

impl BoundaryCorrections {
    pub fn new(p: &BlockPartition) -> Self {
        let t_f = p.t_f;
        let lhalf_tf = p.lambda_diag(t_f).map(f64::sqrt);
        let mut f1a2l = &p.f1 * p.abar(2, t_f);
        for (j, mut col) in f1a2l.column_iter_mut().enumerate() {
            col /= lhalf_tf[j];
        }
        let beta = lhalf_tf.min();
        BoundaryCorrections {
            f1a2l,
            lhalf_tf,
            a6_tf: p.abar(6, t_f),
            beta,
        }
    }

    /// Below this `τ` every correction is returned as exact zero.
    pub fn tau_cut(&self) -> f64 {
        -600.0 / (2.0 * self.beta)
    }

    /// Diagonals of `H₁(τ)` and `H₂(τ)`.
    fn h(&self, tau: f64) -> (DVector<f64>, DVector<f64>) {
        let h1 = self.lhalf_tf.map(|s| (s * tau).exp());
        let h2 = h1.map(|h| 1.0 / (1.0 + h * h));
        (h1, h2)
    }

    fn below_cut(&self, tau: f64) -> bool {
        tau < self.tau_cut()
    }

    /// `−2 F₁Ā₂Λ^{-1/2} H₁² H₂`
    pub fn k2b(&self, tau: f64) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.f1a2l.nrows(), self.f1a2l.ncols());
        if self.below_cut(tau) {
            return out;
        }
        let (h1, h2) = self.h(tau);
        for j in 0..out.ncols() {
            let w = -2.0 * h1[j] * h1[j] * h2[j];
            out.set_column(j, &(self.f1a2l.column(j) * w));
        }
        out
    }

    /// `−2 Λ^{1/2} H₁² H₂`
    pub fn k4b(&self, tau: f64) -> DMatrix<f64> {
        let m1 = self.lhalf_tf.len();
        if self.below_cut(tau) {
            return DMatrix::zeros(m1, m1);
        }
        let (h1, h2) = self.h(tau);
        DMatrix::from_diagonal(&DVector::from_fn(m1, |p, _| {
            -2.0 * self.lhalf_tf[p] * h1[p] * h1[p] * h2[p]
        }))
    }

    /// `−2 H₁ H₂ Ā₆(t_f)`
    pub fn k5b(&self, tau: f64) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.a6_tf.nrows(), self.a6_tf.ncols());
        if self.below_cut(tau) {
            return out;
        }
        let (h1, h2) = self.h(tau);
        for p in 0..out.nrows() {
            out.set_row(p, &(self.a6_tf.row(p) * (-2.0 * h1[p] * h2[p])));
        }
        out
    }

    /// Right-hand sides of the correction problems at `τ`, in the order
    /// `(K₂ᵇ, K₄ᵇ, K₅ᵇ)`.
    pub fn ode_rhs(&self, tau: f64) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
        let s = DMatrix::from_diagonal(&self.lhalf_tf);
        let (k2, k4, k5) = (self.k2b(tau), self.k4b(tau), self.k5b(tau));
        let d2 = &k2 * &s + &self.f1a2l * &k4 + &k2 * &k4;
        let d4 = &k4 * &s + &s * &k4 + &k4 * &k4;
        let d5 = &s * &k5 + &k4 * &k5;
        (d2, d4, d5)
    }

    /// Largest difference between a fourth-order central difference of each
    /// closed form and its ODE right-hand side over `points` values of `τ` in
    /// `[τ_min, 0]`.
    pub fn ode_residual(&self, tau_min: f64, points: usize) -> f64 {
        let h = 1e-3 / self.beta.max(1.0);
        let fd = |f: &dyn Fn(f64) -> DMatrix<f64>, tau: f64| {
            (f(tau - 2.0 * h) - f(tau - h) * 8.0 + f(tau + h) * 8.0 - f(tau + 2.0 * h)) / (12.0 * h)
        };
        let points = points.max(2);
        let mut worst = 0.0f64;
        for i in 0..points {
            let tau = tau_min * (1.0 - i as f64 / (points - 1) as f64);
            let (d2, d4, d5) = self.ode_rhs(tau);
            worst = worst
                .max((fd(&|x| self.k2b(x), tau) - d2).amax())
                .max((fd(&|x| self.k4b(x), tau) - d4).amax())
                .max((fd(&|x| self.k5b(x), tau) - d5).amax());
        }
        worst
    }

    /// Envelope constants `a₂, a₄, a₅` fitted on `τ ∈ [−40/β, 0]` and checked
    /// on `[−80/β, 0]`.
    pub fn decay_constants(&self) -> DecayConstants {
        let env2 = |tau: f64| (-2.0 * self.beta * tau).exp();
        let env1 = |tau: f64| (-self.beta * tau).exp();
        let scan = |lo: f64, points: usize| {
            let mut a = [0.0f64; 3];
            for i in 0..points {
                let tau = lo * i as f64 / (points - 1) as f64;
                a[0] = a[0].max(spectral_norm(&self.k2b(tau)) * env2(tau));
                a[1] = a[1].max(spectral_norm(&self.k4b(tau)) * env2(tau));
                a[2] = a[2].max(spectral_norm(&self.k5b(tau)) * env1(tau));
            }
            a
        };
        let fit = scan(-40.0 / self.beta, 2001);
        let check = scan(-80.0 / self.beta, 4001);
        let verified = fit
            .iter()
            .zip(&check)
            .all(|(f, c)| *c <= f * (1.0 + 1e-9) + 1e-300);
        DecayConstants {
            a2: fit[0],
            a4: fit[1],
            a5: fit[2],
            verified,
        }
    }
}

/// `K_{α,0}(t, ε)` for `α = 1..6`, without the block scalings.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroOrderBlocks {
    pub k1: DMatrix<f64>,
    pub k2: DMatrix<f64>,
    pub k3: DMatrix<f64>,
    pub k4: DMatrix<f64>,
    pub k5: DMatrix<f64>,
    pub k6: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticSolution {
    pub partition: BlockPartition,
    pub k1o: MatrixTrajectory,
    pub k2o: MatrixTrajectory,
    pub k3o: ZeroBlock,
    pub k4o: MatrixTrajectory,
    pub k5o: MatrixTrajectory,
    pub k6o: MatrixTrajectory,
    pub boundary: BoundaryCorrections,
    /// `min_p √λ_p(t_f)`.
    pub beta: f64,
    /// `min_{t,p} √λ_p(t)`.
    pub beta_bar: f64,
}

fn require_a2(p: &BlockPartition) -> Result<()> {
    if p.a2_satisfied {
        Ok(())
    } else {
        Err(Error::Assumption {
            name: "A2",
            detail: format!(
                "the last m - m1 = {} columns of A2 must vanish (max norm of the A3 block {:e})",
                p.dims.m2(),
                p.a3_max_norm
            ),
        })
    }
}

fn lambda_inv(p: &BlockPartition, t: f64) -> DMatrix<f64> {
    DMatrix::from_diagonal(&p.lambda_diag(t).map(|l| 1.0 / l))
}

/// `dK/dt = −KĀ₁ − Ā₁ᵀK + K(Ā₂Λ⁻¹Ā₂ᵀ − S_{v,1})K − D₁`, `K(t_f) = F₁`.
pub fn solve_outer_k1(p: &BlockPartition, cfg: &IntegratorConfig) -> Result<MatrixTrajectory> {
    require_a2(p)?;
    let rhs = |t: f64, k: &DMatrix<f64>| {
        let a1 = p.abar(1, t);
        let a2 = p.abar(2, t);
        let w = &a2 * lambda_inv(p, t) * a2.transpose() - p.sv_blocks(t).sv1;
        let ka = k * &a1;
        -&ka - ka.transpose() + k * w * k - p.d1.eval(t)
    };
    let cfg = cfg.clone().with_symmetrize(true);
    integrate_terminal(rhs, p.f1.clone(), p.t_f, &cfg).map_err(|e| e.blowup_as("A4", "K1o(t)"))
}

/// `dK/dt = −KĀ₉ − Ā₉ᵀK + K² − Ā₆ᵀĀ₆`, `K(t_f) = 0`.
pub fn solve_outer_k6(p: &BlockPartition, cfg: &IntegratorConfig) -> Result<MatrixTrajectory> {
    let m2 = p.dims.m2();
    let rhs = |t: f64, k: &DMatrix<f64>| {
        let a9 = p.abar(9, t);
        let a6 = p.abar(6, t);
        let ka = k * &a9;
        -&ka - ka.transpose() + k * k - a6.transpose() * a6
    };
    let cfg = cfg.clone().with_symmetrize(true);
    integrate_terminal(rhs, DMatrix::zeros(m2, m2), p.t_f, &cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OuterAlgebraic {
    pub k2o: MatrixTrajectory,
    pub k4o: MatrixTrajectory,
    pub k5o: MatrixTrajectory,
}

/// `K₄ᵒ = Λ^{1/2}`, `K₂ᵒ = K₁ᵒĀ₂Λ^{-1/2}`, `K₅ᵒ = Ā₆ + Λ^{-1/2}Ā₂ᵀK₃ᵒ = Ā₆`,
/// sampled on the grid of `K₁ᵒ` with exact derivatives.
pub fn build_outer_algebraic(k1o: &MatrixTrajectory, k3o: ZeroBlock, p: &BlockPartition) -> OuterAlgebraic {
    debug_assert_eq!(k3o.rows, p.dims.n);
    let dlam: Vec<_> = p.lambda.iter().map(|l| l.derivative()).collect();
    let a2d = p.abar[1].derivative();
    let a6d = p.abar[5].derivative();
    let n_pts = k1o.len();
    let mut k2 = (Vec::with_capacity(n_pts), Vec::with_capacity(n_pts));
    let mut k4 = (Vec::with_capacity(n_pts), Vec::with_capacity(n_pts));
    let mut k5 = (Vec::with_capacity(n_pts), Vec::with_capacity(n_pts));
    for (i, &t) in k1o.grid.iter().enumerate() {
        let lam = p.lambda_diag(t);
        let lam_d = DVector::from_iterator(lam.len(), dlam.iter().map(|d| d.eval(t)));
        let half = lam.map(f64::sqrt);
        let inv_half = DMatrix::from_diagonal(&half.map(|h| 1.0 / h));
        // d/dt λ^{1/2} = λ'/(2λ^{1/2}),  d/dt λ^{-1/2} = −λ'/(2λ^{3/2})
        let half_d = DVector::from_fn(lam.len(), |j, _| lam_d[j] / (2.0 * half[j]));
        let inv_half_d = DMatrix::from_diagonal(&DVector::from_fn(lam.len(), |j, _| {
            -lam_d[j] / (2.0 * lam[j] * half[j])
        }));
        let a2 = p.abar(2, t);
        let (k1, k1d) = (&k1o.values[i], &k1o.derivs[i]);
        k2.0.push(k1 * &a2 * &inv_half);
        k2.1.push(k1d * &a2 * &inv_half + k1 * a2d.eval(t) * &inv_half + k1 * &a2 * inv_half_d);
        k4.0.push(DMatrix::from_diagonal(&half));
        k4.1.push(DMatrix::from_diagonal(&half_d));
        k5.0.push(p.abar(6, t));
        k5.1.push(a6d.eval(t));
    }
    let g = k1o.grid.clone();
    OuterAlgebraic {
        k2o: MatrixTrajectory::new(g.clone(), k2.0, k2.1, false),
        k4o: MatrixTrajectory::new(g.clone(), k4.0, k4.1, true),
        k5o: MatrixTrajectory::new(g, k5.0, k5.1, false),
    }
}

pub fn boundary_corrections(p: &BlockPartition) -> BoundaryCorrections {
    BoundaryCorrections::new(p)
}

/// Builds every zero-order term for `spec` (the `ε` of `spec` is not used).
pub fn solve_asymptotic(spec: &GameSpec, cfg: &IntegratorConfig) -> Result<AsymptoticSolution> {
    let p = partition(spec)?;
    require_a2(&p)?;
    let k1o = solve_outer_k1(&p, cfg)?;
    let k6o = solve_outer_k6(&p, cfg)?;
    let k3o = ZeroBlock {
        rows: p.dims.n,
        cols: p.dims.m2(),
    };
    let OuterAlgebraic { k2o, k4o, k5o } = build_outer_algebraic(&k1o, k3o, &p);
    let boundary = boundary_corrections(&p);
    let beta = boundary.beta;
    let beta_bar = p
        .lambda
        .iter()
        .map(|l| l.min_on(0.0, p.t_f, 201).0)
        .fold(f64::INFINITY, f64::min)
        .sqrt();
    Ok(AsymptoticSolution {
        partition: p,
        k1o,
        k2o,
        k3o,
        k4o,
        k5o,
        k6o,
        boundary,
        beta,
        beta_bar,
    })
}

impl AsymptoticSolution {
    pub fn dims(&self) -> Dimensions {
        self.partition.dims
    }

    fn lambda_half(&self, t: f64) -> DVector<f64> {
        self.partition.lambda_diag(t).map(f64::sqrt)
    }

    /// `K₂ᵒ(t)` from the interpolated `K₁ᵒ` and exact problem data.
    pub fn k2o_at(&self, t: f64) -> DMatrix<f64> {
        let inv_half = DMatrix::from_diagonal(&self.lambda_half(t).map(|h| 1.0 / h));
        self.k1o.eval_clamped(t) * self.partition.abar(2, t) * inv_half
    }

    pub fn k4o_at(&self, t: f64) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.lambda_half(t))
    }

    pub fn k5o_at(&self, t: f64) -> DMatrix<f64> {
        self.partition.abar(6, t)
    }

    /// Outer term plus boundary correction for every block.
    pub fn blocks(&self, epsilon: f64, t: f64) -> ZeroOrderBlocks {
        let tau = (t - self.partition.t_f) / epsilon;
        let b = &self.boundary;
        ZeroOrderBlocks {
            k1: self.k1o.eval_clamped(t),
            k2: self.k2o_at(t) + b.k2b(tau),
            k3: self.k3o.eval(),
            k4: self.k4o_at(t) + b.k4b(tau),
            k5: self.k5o_at(t) + b.k5b(tau),
            k6: self.k6o.eval_clamped(t),
        }
    }

    /// `K₀(t, ε)` with the `ε`, `ε²` block scalings applied; symmetric.
    pub fn assemble_k0(&self, epsilon: f64, t: f64) -> DMatrix<f64> {
        assemble_from_blocks(&self.blocks(epsilon, t), epsilon)
    }

    /// `ε⁻² Bᵀ K₀(t, ε)` with the scalings cancelled block by block:
    /// `[K₂ᵀ/ε, K₄/ε, K₅; K₃ᵀ/ε, K₅ᵀ, K₆]`.
    pub fn bt_k0_over_eps2(&self, epsilon: f64, t: f64) -> DMatrix<f64> {
        let b = self.blocks(epsilon, t);
        let Dimensions { n, m, m1, .. } = self.dims();
        let m2 = m - m1;
        let mut out = DMatrix::zeros(m, n + m);
        out.view_mut((0, 0), (m1, n)).copy_from(&(b.k2.transpose() / epsilon));
        out.view_mut((0, n), (m1, m1)).copy_from(&(&b.k4 / epsilon));
        out.view_mut((0, n + m1), (m1, m2)).copy_from(&b.k5);
        out.view_mut((m1, 0), (m2, n)).copy_from(&(b.k3.transpose() / epsilon));
        out.view_mut((m1, n), (m2, m1)).copy_from(&b.k5.transpose());
        out.view_mut((m1, n + m1), (m2, m2)).copy_from(&b.k6);
        out
    }
}

pub fn assemble_from_blocks(b: &ZeroOrderBlocks, epsilon: f64) -> DMatrix<f64> {
    let (n, m1, m2) = (b.k1.nrows(), b.k4.nrows(), b.k6.nrows());
    let s = n + m1 + m2;
    let e2 = epsilon * epsilon;
    let mut k = DMatrix::zeros(s, s);
    let mut put = |r0: usize, c0: usize, m: DMatrix<f64>| {
        k.view_mut((c0, r0), (m.ncols(), m.nrows())).copy_from(&m.transpose());
        k.view_mut((r0, c0), m.shape()).copy_from(&m);
    };
    put(0, 0, b.k1.clone());
    put(0, n, &b.k2 * epsilon);
    put(0, n + m1, &b.k3 * epsilon);
    put(n, n, &b.k4 * epsilon);
    put(n, n + m1, &b.k5 * e2);
    put(n + m1, n + m1, &b.k6 * e2);
    k
}

pub fn assemble_k0(asym: &AsymptoticSolution, epsilon: f64, t: f64) -> DMatrix<f64> {
    asym.assemble_k0(epsilon, t)
}

/// `u = −ε⁻²BᵀK₀ z`, `v = G⁻¹CᵀK₀ z` for the given `ε`.
pub fn approximate_feedback(asym: &AsymptoticSolution, spec: &GameSpec) -> FeedbackLaw {
    let eps = spec.epsilon;
    let a_u = Arc::new(asym.clone());
    let a_v = a_u.clone();
    let spec_v = spec.clone();
    FeedbackLaw::new(
        LawKind::Asymptotic,
        Arc::new(move |t| -a_u.bt_k0_over_eps2(eps, t)),
        Arc::new(move |t| spec_v.g_inv(t) * spec_v.c(t).transpose() * a_v.assemble_k0(eps, t)),
    )
}

#[derive(Clone)]
pub struct ReducedGame {
    pub k1o: MatrixTrajectory,
    /// `x₀ᵀ K₁ᵒ(0) x₀`.
    pub value: f64,
    /// `t ↦ −Λ⁻¹Ā₂ᵀK₁ᵒ`, `m1 × n`.
    pub y_gain: GainFn,
    /// `t ↦ G⁻¹C₁ᵀK₁ᵒ`, `l × n`.
    pub v_gain: GainFn,
}

impl std::fmt::Debug for ReducedGame {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ReducedGame").field("value", &self.value).finish_non_exhaustive()
    }
}

pub fn solve_reduced_game(p: &BlockPartition, spec: &GameSpec, cfg: &IntegratorConfig) -> Result<ReducedGame> {
    require_a2(p)?;
    let k1o = solve_outer_k1(p, cfg)?;
    let value = quad_form(&k1o.values[0], &spec.x0);
    let (k_y, k_v) = (k1o.clone(), k1o.clone());
    let p_y = p.clone();
    let spec_v = spec.clone();
    Ok(ReducedGame {
        k1o,
        value,
        y_gain: Arc::new(move |t| -lambda_inv(&p_y, t) * p_y.abar(2, t).transpose() * k_y.eval_clamped(t)),
        v_gain: Arc::new(move |t| spec_v.g_inv(t) * spec_v.c1.eval(t).transpose() * k_v.eval_clamped(t)),
    })
}

/// Spot-check residuals of the two outer Riccati problems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuterResiduals {
    pub k1o: f64,
    pub k6o: f64,
    /// Right-hand side of the `K₃ᵒ` problem evaluated at `K₃ᵒ = 0`.
    pub k3o: f64,
}

pub fn outer_residuals(asym: &AsymptoticSolution, points: usize) -> OuterResiduals {
    let p = &asym.partition;
    let r1 = |t: f64| {
        let k = asym.k1o.eval_clamped(t);
        let a1 = p.abar(1, t);
        let a2 = p.abar(2, t);
        let w = &a2 * lambda_inv(p, t) * a2.transpose() - p.sv_blocks(t).sv1;
        let ka = &k * &a1;
        let rhs = -&ka - ka.transpose() + &k * w * &k - p.d1.eval(t);
        (asym.k1o.eval_derivative(t).expect("in range") - rhs).amax()
    };
    let r6 = |t: f64| {
        let k = asym.k6o.eval_clamped(t);
        let a9 = p.abar(9, t);
        let a6 = p.abar(6, t);
        let ka = &k * &a9;
        let rhs = -&ka - ka.transpose() + &k * &k - a6.transpose() * a6;
        (asym.k6o.eval_derivative(t).expect("in range") - rhs).amax()
    };
    let r3 = |t: f64| {
        // −K₂ᵒĀ₆ + K₂ᵒK₅ᵒ; all terms carrying K₃ᵒ vanish
        let k2 = asym.k2o_at(t);
        (-(&k2 * p.abar(6, t)) + &k2 * asym.k5o_at(t)).amax()
    };
    let max_over = |traj: &MatrixTrajectory, f: &dyn Fn(f64) -> f64| {
        traj.spot_midpoints(points).into_iter().map(f).fold(0.0, f64::max)
    };
    OuterResiduals {
        k1o: max_over(&asym.k1o, &r1),
        k6o: max_over(&asym.k6o, &r6),
        k3o: max_over(&asym.k1o, &r3),
    }
}

/// Worst relative defects of the algebraic outer identities over the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityReport {
    /// `K₂ᵒK₄ᵒ = K₁ᵒĀ₂`
    pub k2k4: f64,
    /// `(K₄ᵒ)² = Λ`
    pub k4_squared: f64,
    /// `K₄ᵒĀ₆ + Ā₂ᵀK₃ᵒ = K₄ᵒK₅ᵒ`
    pub k4k5: f64,
}

impl IdentityReport {
    pub fn max(&self) -> f64 {
        self.k2k4.max(self.k4_squared).max(self.k4k5)
    }
}

pub fn outer_identities(asym: &AsymptoticSolution) -> IdentityReport {
    let p = &asym.partition;
    let rel = |lhs: DMatrix<f64>, rhs: DMatrix<f64>| (&lhs - &rhs).amax() / (1.0 + rhs.amax());
    let mut rep = IdentityReport {
        k2k4: 0.0,
        k4_squared: 0.0,
        k4k5: 0.0,
    };
    for (i, &t) in asym.k1o.grid.iter().enumerate() {
        let k2 = &asym.k2o.values[i];
        let k4 = &asym.k4o.values[i];
        let k5 = &asym.k5o.values[i];
        let a2 = p.abar(2, t);
        rep.k2k4 = rep.k2k4.max(rel(k2 * k4, &asym.k1o.values[i] * &a2));
        rep.k4_squared = rep.k4_squared.max(rel(k4 * k4, p.lambda(t)));
        let lhs = k4 * p.abar(6, t) + a2.transpose() * asym.k3o.eval();
        rep.k4k5 = rep.k4k5.max(rel(lhs, k4 * k5));
    }
    rep
}
