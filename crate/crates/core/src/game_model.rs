//! Game data, validation of the standing hypotheses, and the slow/fast block
//! partition used by the asymptotic construction.
//!
//! The state is `z = col(x, y)` with a slow part `x ∈ Rⁿ` and a fast part
//! `y ∈ Rᵐ`. The fast-state weight is `D₂ = diag(λ₁..λ_m)`, where the first
//! `m1` entries are strictly positive and the rest vanish identically.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{asymmetry, spectral_norm, sym_eigenvalues};
use crate::matfn::{MatrixFunction, ScalarFunction};

/// Number of uniform points used to scan time-dependent invariants.
pub const VALIDATION_GRID: usize = 201;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// PSD checks accept eigenvalues `≥ -psd·(1+‖M‖)`.
    pub psd: f64,
    /// PD checks require eigenvalues `≥ pd·(1+‖M‖)`.
    pub pd: f64,
    /// Threshold for blocks that must vanish identically.
    pub zero: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            psd: 1e-10,
            pd: 1e-12,
            zero: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dimensions {
    /// slow state
    pub n: usize,
    /// fast state (and minimizer control)
    pub m: usize,
    /// maximizer control
    pub l: usize,
    /// number of strictly positive fast-state weights
    pub m1: usize,
}

impl Dimensions {
    pub fn state(&self) -> usize {
        self.n + self.m
    }

    pub fn m2(&self) -> usize {
        self.m - self.m1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameSpec {
    pub dims: Dimensions,
    pub t_f: f64,
    pub epsilon: f64,
    pub a1: MatrixFunction,
    pub a2: MatrixFunction,
    pub a3: MatrixFunction,
    pub a4: MatrixFunction,
    pub c1: MatrixFunction,
    pub c2: MatrixFunction,
    pub d1: MatrixFunction,
    /// Diagonal of `D₂`.
    pub lambda: Vec<ScalarFunction>,
    pub g: MatrixFunction,
    pub f1: DMatrix<f64>,
    pub x0: DVector<f64>,
    pub y0: DVector<f64>,
}

impl GameSpec {
    pub fn with_epsilon(&self, epsilon: f64) -> GameSpec {
        GameSpec {
            epsilon,
            ..self.clone()
        }
    }

    pub fn z0(&self) -> DVector<f64> {
        let mut z = DVector::zeros(self.dims.state());
        z.rows_mut(0, self.dims.n).copy_from(&self.x0);
        z.rows_mut(self.dims.n, self.dims.m).copy_from(&self.y0);
        z
    }

    /// Hard dimension checks; every mismatch is named by field.
    pub fn check_dimensions(&self) -> Result<()> {
        let Dimensions { n, m, l, m1 } = self.dims;
        let mat = |field: &str, f: (usize, usize), want: (usize, usize)| -> Result<()> {
            if f != want {
                return Err(Error::Dimension {
                    field: field.to_string(),
                    expected: format!("{}x{}", want.0, want.1),
                    got: format!("{}x{}", f.0, f.1),
                });
            }
            Ok(())
        };
        mat("A1", self.a1.shape(), (n, n))?;
        mat("A2", self.a2.shape(), (n, m))?;
        mat("A3", self.a3.shape(), (m, n))?;
        mat("A4", self.a4.shape(), (m, m))?;
        mat("C1", self.c1.shape(), (n, l))?;
        mat("C2", self.c2.shape(), (m, l))?;
        mat("D1", self.d1.shape(), (n, n))?;
        mat("G", self.g.shape(), (l, l))?;
        mat("F1", self.f1.shape(), (n, n))?;
        mat("x0", (self.x0.len(), 1), (n, 1))?;
        mat("y0", (self.y0.len(), 1), (m, 1))?;
        if self.lambda.len() != m {
            return Err(Error::Dimension {
                field: "lambda".into(),
                expected: format!("{m} entries"),
                got: format!("{} entries", self.lambda.len()),
            });
        }
        if m1 > m {
            return Err(Error::Dimension {
                field: "m1".into(),
                expected: format!("at most m = {m}"),
                got: m1.to_string(),
            });
        }
        Ok(())
    }

    pub fn a(&self, t: f64) -> DMatrix<f64> {
        let (n, m) = (self.dims.n, self.dims.m);
        let mut a = DMatrix::zeros(n + m, n + m);
        a.view_mut((0, 0), (n, n)).copy_from(&self.a1.eval(t));
        a.view_mut((0, n), (n, m)).copy_from(&self.a2.eval(t));
        a.view_mut((n, 0), (m, n)).copy_from(&self.a3.eval(t));
        a.view_mut((n, n), (m, m)).copy_from(&self.a4.eval(t));
        a
    }

    pub fn c(&self, t: f64) -> DMatrix<f64> {
        let (n, m, l) = (self.dims.n, self.dims.m, self.dims.l);
        let mut c = DMatrix::zeros(n + m, l);
        c.view_mut((0, 0), (n, l)).copy_from(&self.c1.eval(t));
        c.view_mut((n, 0), (m, l)).copy_from(&self.c2.eval(t));
        c
    }

    pub fn d2(&self, t: f64) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_iterator(
            self.dims.m,
            self.lambda.iter().map(|f| f.eval(t)),
        ))
    }

    pub fn d(&self, t: f64) -> DMatrix<f64> {
        let (n, m) = (self.dims.n, self.dims.m);
        let mut d = DMatrix::zeros(n + m, n + m);
        d.view_mut((0, 0), (n, n)).copy_from(&self.d1.eval(t));
        d.view_mut((n, n), (m, m)).copy_from(&self.d2(t));
        d
    }

    /// Terminal weight `F = diag(F₁, 0)`.
    pub fn f(&self) -> DMatrix<f64> {
        let s = self.dims.state();
        let mut f = DMatrix::zeros(s, s);
        f.view_mut((0, 0), (self.dims.n, self.dims.n))
            .copy_from(&self.f1);
        f
    }

    pub fn g_inv(&self, t: f64) -> DMatrix<f64> {
        let g = self.g.eval(t);
        match g.clone().cholesky() {
            Some(ch) => ch.inverse(),
            None => g.try_inverse().unwrap_or_else(|| {
                DMatrix::from_element(self.dims.l, self.dims.l, f64::NAN)
            }),
        }
    }

    /// `S_v = C G⁻¹ Cᵀ`
    pub fn s_v(&self, t: f64) -> DMatrix<f64> {
        let c = self.c(t);
        &c * self.g_inv(t) * c.transpose()
    }

    /// Selector `B = col(0, I_m)`.
    pub fn b(&self) -> DMatrix<f64> {
        let mut b = DMatrix::zeros(self.dims.state(), self.dims.m);
        b.view_mut((self.dims.n, 0), (self.dims.m, self.dims.m))
            .fill_with_identity();
        b
    }

    pub fn grid(&self, points: usize) -> Vec<f64> {
        let points = points.max(2);
        (0..points)
            .map(|i| self.t_f * i as f64 / (points - 1) as f64)
            .collect()
    }
}

/// The pursuit–evasion engagement used as the worked example: lateral
/// separation `x`, relative lateral velocity `y₁` and pursuer acceleration
/// `y₂`, on `[0, 1.5]` with `z₀ = (0, 2, 1)`.
pub fn pursuit_evasion(epsilon: f64) -> GameSpec {
    let c = |r, c, d: &[f64]| MatrixFunction::from_row_slice(r, c, d);
    GameSpec {
        dims: Dimensions {
            n: 1,
            m: 2,
            l: 2,
            m1: 1,
        },
        t_f: 1.5,
        epsilon,
        a1: c(1, 1, &[0.0]),
        a2: c(1, 2, &[1.0, 0.0]),
        a3: c(2, 1, &[0.0, 0.0]),
        a4: c(2, 2, &[0.0, 1.0, 0.0, -1.0]),
        c1: c(1, 2, &[1.0, 0.0]),
        c2: c(2, 2, &[0.0, 1.0, 0.0, 0.0]),
        d1: c(1, 1, &[6.4]),
        lambda: vec![ScalarFunction::Constant(10.0), ScalarFunction::Constant(0.0)],
        g: c(2, 2, &[5.0, 0.0, 0.0, 4.0]),
        f1: DMatrix::from_element(1, 1, 0.5),
        x0: DVector::from_element(1, 0.0),
        y0: DVector::from_vec(vec![2.0, 1.0]),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Grid time of the worst case, if the check is time dependent.
    pub worst_t: Option<f64>,
    /// Worst eigenvalue (or value) encountered.
    pub worst_value: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub ok: bool,
    /// `max_t ‖Ā₃(t)‖ ≤ tol_zero`; needed only by the asymptotic solver.
    pub a2_satisfied: bool,
}

impl ValidationReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.failures().next()
    }
}

pub fn validate_spec(spec: &GameSpec) -> Result<ValidationReport> {
    validate_spec_with(spec, &Tolerances::default())
}

pub fn validate_spec_with(spec: &GameSpec, tol: &Tolerances) -> Result<ValidationReport> {
    spec.check_dimensions()?;
    let dims = spec.dims;
    let mut checks = Vec::new();
    let mut scalar = |name: &str, passed: bool, value: f64, message: String| {
        checks.push(Check {
            name: name.into(),
            passed,
            worst_t: None,
            worst_value: value,
            message: if passed { "ok".into() } else { message },
        })
    };

    scalar(
        "t_f positive",
        spec.t_f > 0.0 && spec.t_f.is_finite(),
        spec.t_f,
        "t_f must be positive".into(),
    );
    scalar(
        "epsilon positive",
        spec.epsilon > 0.0 && spec.epsilon.is_finite(),
        spec.epsilon,
        "epsilon must be positive".into(),
    );
    scalar(
        "m > 1",
        dims.m > 1,
        dims.m as f64,
        format!("fast-state dimension m = {} must exceed 1", dims.m),
    );
    scalar(
        "1 <= m1 < m",
        dims.m1 >= 1 && dims.m1 < dims.m,
        dims.m1 as f64,
        format!("m1 = {} must satisfy 1 <= m1 < m = {}", dims.m1, dims.m),
    );

    let f1_eig = sym_eigenvalues(&spec.f1);
    let f1_min = f1_eig.first().copied().unwrap_or(0.0);
    let f1_norm = f1_eig.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let f1_sym = asymmetry(&spec.f1) <= tol.zero * (1.0 + f1_norm);
    scalar(
        "F1 symmetric PSD",
        f1_sym && f1_min >= -tol.psd * (1.0 + f1_norm),
        f1_min,
        if f1_sym {
            format!("F1 not positive semi-definite (min eigenvalue {f1_min:e})")
        } else {
            "F1 not symmetric".into()
        },
    );

    let t_f = if spec.t_f > 0.0 { spec.t_f } else { 1.0 };
    let grid: Vec<f64> = (0..VALIDATION_GRID)
        .map(|i| t_f * i as f64 / (VALIDATION_GRID - 1) as f64)
        .collect();

    checks.push(matrix_scan("D1 symmetric PSD", &grid, |t| spec.d1.eval(t), |min, norm| {
        min >= -tol.psd * (1.0 + norm)
    }, tol, "D1 not positive semi-definite"));
    checks.push(matrix_scan("G symmetric PD", &grid, |t| spec.g.eval(t), |min, norm| {
        min >= tol.pd * (1.0 + norm)
    }, tol, "G not positive definite"));

    for (k, lam) in spec.lambda.iter().enumerate() {
        if k < dims.m1 {
            let (v, t) = lam.min_on(0.0, t_f, VALIDATION_GRID);
            let passed = v > 0.0;
            checks.push(Check {
                name: format!("lambda_{} positive", k + 1),
                passed,
                worst_t: Some(t),
                worst_value: v,
                message: if passed {
                    "ok".into()
                } else {
                    format!("λ_{} not positive on [0,t_f] (value {v:e} at t = {t:.4})", k + 1)
                },
            });
        } else {
            let c = lam.max_abs_coeff();
            let passed = c <= tol.zero;
            checks.push(Check {
                name: format!("lambda_{} zero", k + 1),
                passed,
                worst_t: None,
                worst_value: c,
                message: if passed {
                    "ok".into()
                } else {
                    format!("λ_{} must vanish identically for index > m1", k + 1)
                },
            });
        }
    }

    let a2_satisfied = if dims.m1 < dims.m {
        spec.a2.block(0, dims.m1, dims.n, dims.m2()).max_abs_coeff() <= tol.zero
    } else {
        true
    };

    let ok = checks.iter().all(|c| c.passed);
    Ok(ValidationReport {
        checks,
        ok,
        a2_satisfied,
    })
}

fn matrix_scan(
    name: &str,
    grid: &[f64],
    f: impl Fn(f64) -> DMatrix<f64>,
    accept: impl Fn(f64, f64) -> bool,
    tol: &Tolerances,
    failure: &str,
) -> Check {
    let mut worst = (f64::INFINITY, 0.0);
    let mut passed = true;
    let mut symmetric = true;
    for &t in grid {
        let m = f(t);
        let norm = spectral_norm(&m);
        if asymmetry(&m) > tol.zero * (1.0 + norm) {
            symmetric = false;
            passed = false;
            worst = (f64::NAN, t);
            break;
        }
        let min = sym_eigenvalues(&m).first().copied().unwrap_or(0.0);
        if min < worst.0 {
            worst = (min, t);
        }
        if !accept(min, norm) {
            passed = false;
        }
    }
    Check {
        name: name.into(),
        passed,
        worst_t: Some(worst.1),
        worst_value: worst.0,
        message: if passed {
            "ok".into()
        } else if !symmetric {
            format!("{} not symmetric at t = {:.4}", &name[..name.find(' ').unwrap_or(name.len())], worst.1)
        } else {
            format!("{failure} (min eigenvalue {:e} at t = {:.4})", worst.0, worst.1)
        },
    }
}

/// Block views of the game data for the split `n | m1 | m - m1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPartition {
    pub dims: Dimensions,
    pub t_f: f64,
    /// `Ā₁..Ā₉`, row-major over the 3×3 block grid.
    pub abar: [MatrixFunction; 9],
    /// `λ₁..λ_{m1}`, the diagonal of `Λ`.
    pub lambda: Vec<ScalarFunction>,
    /// Stacked maximizer input `C = col(C₁, C₂)`.
    pub c: MatrixFunction,
    pub g: MatrixFunction,
    pub b: DMatrix<f64>,
    /// `B Bᵀ`; the minimizer weight is `ε⁻² B Bᵀ` and is never formed here.
    pub bbt: DMatrix<f64>,
    pub f: DMatrix<f64>,
    pub f1: DMatrix<f64>,
    pub d1: MatrixFunction,
    pub a3_max_norm: f64,
    pub a2_satisfied: bool,
}

/// `S_v` blocks `S_{v,1}..S_{v,6}` (upper triangle of the 3×3 grid).
#[derive(Debug, Clone, PartialEq)]
pub struct SvBlocks {
    pub sv1: DMatrix<f64>,
    pub sv2: DMatrix<f64>,
    pub sv3: DMatrix<f64>,
    pub sv4: DMatrix<f64>,
    pub sv5: DMatrix<f64>,
    pub sv6: DMatrix<f64>,
}

pub fn partition(spec: &GameSpec) -> Result<BlockPartition> {
    partition_with(spec, &Tolerances::default())
}

pub fn partition_with(spec: &GameSpec, tol: &Tolerances) -> Result<BlockPartition> {
    let report = validate_spec_with(spec, tol)?;
    if let Some(fail) = report.first_failure() {
        return Err(Error::Validation(format!("{}: {}", fail.name, fail.message)));
    }
    let Dimensions { n, m1, .. } = spec.dims;
    let m2 = spec.dims.m2();
    let a = MatrixFunction::from_blocks(&[&[&spec.a1, &spec.a2], &[&spec.a3, &spec.a4]]);
    let rows = [(0, n), (n, m1), (n + m1, m2)];
    let mut abar: Vec<MatrixFunction> = Vec::with_capacity(9);
    for &(r0, nr) in &rows {
        for &(c0, nc) in &rows {
            abar.push(a.block(r0, c0, nr, nc));
        }
    }
    let a3_max_norm = scan_max_norm(&abar[2], spec.t_f);
    let c = MatrixFunction::from_blocks(&[&[&spec.c1], &[&spec.c2]]);
    let b = spec.b();
    let bbt = &b * b.transpose();
    Ok(BlockPartition {
        dims: spec.dims,
        t_f: spec.t_f,
        abar: abar.try_into().expect("nine blocks"),
        lambda: spec.lambda[..m1].to_vec(),
        c,
        g: spec.g.clone(),
        b,
        bbt,
        f: spec.f(),
        f1: spec.f1.clone(),
        d1: spec.d1.clone(),
        a3_max_norm,
        a2_satisfied: report.a2_satisfied && a3_max_norm <= tol.zero,
    })
}

fn scan_max_norm(f: &MatrixFunction, t_f: f64) -> f64 {
    if f.shape().0 == 0 || f.shape().1 == 0 {
        return 0.0;
    }
    (0..VALIDATION_GRID)
        .map(|i| spectral_norm(&f.eval(t_f * i as f64 / (VALIDATION_GRID - 1) as f64)))
        .fold(0.0, f64::max)
}

impl BlockPartition {
    /// `Ā_k(t)` for `k ∈ 1..=9`.
    pub fn abar(&self, k: usize, t: f64) -> DMatrix<f64> {
        self.abar[k - 1].eval(t)
    }

    pub fn lambda_diag(&self, t: f64) -> DVector<f64> {
        DVector::from_iterator(self.dims.m1, self.lambda.iter().map(|f| f.eval(t)))
    }

    pub fn lambda(&self, t: f64) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.lambda_diag(t))
    }

    pub fn s_v(&self, t: f64) -> DMatrix<f64> {
        let c = self.c.eval(t);
        let g = self.g.eval(t);
        let g_inv = g
            .clone()
            .cholesky()
            .map(|ch| ch.inverse())
            .or_else(|| g.try_inverse())
            .expect("G validated positive definite");
        &c * g_inv * c.transpose()
    }

    pub fn sv_blocks(&self, t: f64) -> SvBlocks {
        let s = self.s_v(t);
        let Dimensions { n, m1, .. } = self.dims;
        let m2 = self.dims.m2();
        let blk = |r0, c0, nr, nc| s.view((r0, c0), (nr, nc)).into_owned();
        SvBlocks {
            sv1: blk(0, 0, n, n),
            sv2: blk(0, n, n, m1),
            sv3: blk(0, n + m1, n, m2),
            sv4: blk(n, n, m1, m1),
            sv5: blk(n, n + m1, m1, m2),
            sv6: blk(n + m1, n + m1, m2, m2),
        }
    }

    /// `A(t)` reassembled from `Ā₁..Ā₉`.
    pub fn reassemble_a(&self, t: f64) -> DMatrix<f64> {
        let s = self.dims.state();
        let Dimensions { n, m1, .. } = self.dims;
        let offsets = [0, n, n + m1];
        let mut a = DMatrix::zeros(s, s);
        for i in 0..3 {
            for j in 0..3 {
                let blk = self.abar[3 * i + j].eval(t);
                a.view_mut((offsets[i], offsets[j]), blk.shape())
                    .copy_from(&blk);
            }
        }
        a
    }

    pub fn reassemble_s_v(&self, t: f64) -> DMatrix<f64> {
        let b = self.sv_blocks(t);
        let Dimensions { n, m1, .. } = self.dims;
        let s = self.dims.state();
        let o = [0, n, n + m1];
        let mut out = DMatrix::zeros(s, s);
        let mut put = |i: usize, j: usize, m: &DMatrix<f64>| {
            out.view_mut((o[i], o[j]), m.shape()).copy_from(m);
            out.view_mut((o[j], o[i]), (m.ncols(), m.nrows()))
                .copy_from(&m.transpose());
        };
        put(0, 0, &b.sv1);
        put(0, 1, &b.sv2);
        put(0, 2, &b.sv3);
        put(1, 1, &b.sv4);
        put(1, 2, &b.sv5);
        put(2, 2, &b.sv6);
        out
    }

    pub fn reassemble_d(&self, t: f64) -> DMatrix<f64> {
        let Dimensions { n, m1, .. } = self.dims;
        let s = self.dims.state();
        let mut d = DMatrix::zeros(s, s);
        d.view_mut((0, 0), (n, n)).copy_from(&self.d1.eval(t));
        d.view_mut((n, n), (m1, m1)).copy_from(&self.lambda(t));
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_spec_validates() {
        let r = validate_spec(&pursuit_evasion(0.1)).unwrap();
        assert!(r.ok, "{:?}", r.first_failure());
        assert!(r.a2_satisfied);
    }

    #[test]
    fn zero_g_rejected() {
        let mut s = pursuit_evasion(0.1);
        s.g = MatrixFunction::zeros(2, 2);
        let r = validate_spec(&s).unwrap();
        assert!(!r.ok);
        assert!(r.first_failure().unwrap().message.contains("G not positive definite"));
    }

    #[test]
    fn sign_changing_lambda_rejected() {
        let mut s = pursuit_evasion(0.1);
        s.lambda[0] = ScalarFunction::Polynomial(vec![-0.5, 1.0]);
        let r = validate_spec(&s).unwrap();
        assert!(!r.ok);
        let f = r.first_failure().unwrap();
        assert!(f.message.contains("λ_1 not positive on [0,t_f]"), "{}", f.message);
    }

    #[test]
    fn lambda_touching_zero_between_grid_points_rejected() {
        // (t - 0.7033)^2 has its zero between the 201 grid points on [0,1.5]
        let r0 = 0.7033;
        let mut s = pursuit_evasion(0.1);
        s.lambda[0] = ScalarFunction::Polynomial(vec![r0 * r0, -2.0 * r0, 1.0]);
        let r = validate_spec(&s).unwrap();
        assert!(!r.ok);
    }

    #[test]
    fn dimension_mismatch_names_field() {
        let mut s = pursuit_evasion(0.1);
        s.c2 = MatrixFunction::zeros(3, 2);
        match validate_spec(&s) {
            Err(Error::Dimension { field, .. }) => assert_eq!(field, "C2"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn example_partition_blocks() {
        let p = partition(&pursuit_evasion(0.1)).unwrap();
        for t in [0.0, 0.75, 1.5] {
            assert_eq!(p.abar(2, t)[(0, 0)], 1.0);
            assert_eq!(p.abar(6, t)[(0, 0)], 1.0);
            assert_eq!(p.abar(9, t)[(0, 0)], -1.0);
            for k in [1, 3, 4, 5, 7, 8] {
                assert_eq!(p.abar(k, t).amax(), 0.0, "Ā{k}");
            }
            assert!((p.sv_blocks(t).sv1[(0, 0)] - 0.2).abs() < 1e-15);
            assert_eq!(p.lambda(t)[(0, 0)], 10.0);
            assert_eq!(p.reassemble_d(t), pursuit_evasion(0.1).d(t));
        }
        assert!(p.a2_satisfied);
    }

    #[test]
    fn random_a2_column_split() {
        let a2 = DMatrix::from_fn(3, 4, |i, j| (1 + i * 4 + j) as f64 * 0.37);
        let mut s = pursuit_evasion(0.1);
        s.dims = Dimensions { n: 3, m: 4, l: 2, m1: 2 };
        s.a1 = MatrixFunction::zeros(3, 3);
        s.a2 = MatrixFunction::Constant(a2.clone());
        s.a3 = MatrixFunction::zeros(4, 3);
        s.a4 = MatrixFunction::zeros(4, 4);
        s.c1 = MatrixFunction::zeros(3, 2);
        s.c2 = MatrixFunction::zeros(4, 2);
        s.d1 = MatrixFunction::zeros(3, 3);
        s.lambda = vec![
            ScalarFunction::Constant(1.0),
            ScalarFunction::Constant(2.0),
            ScalarFunction::Constant(0.0),
            ScalarFunction::Constant(0.0),
        ];
        s.f1 = DMatrix::zeros(3, 3);
        s.x0 = DVector::zeros(3);
        s.y0 = DVector::zeros(4);
        let p = partition(&s).unwrap();
        assert_eq!(p.abar(2, 0.0), a2.columns(0, 2).into_owned());
        assert_eq!(p.abar(3, 0.0), a2.columns(2, 2).into_owned());
        assert!(!p.a2_satisfied);
    }

    #[test]
    fn zero_a2_block_flags_assumption() {
        let mut s = pursuit_evasion(0.1);
        s.a2 = MatrixFunction::from_row_slice(1, 2, &[3.0, 0.0]);
        let p = partition(&s).unwrap();
        assert_eq!(p.abar(3, 0.4).amax(), 0.0);
        assert!(p.a2_satisfied);
    }
}
