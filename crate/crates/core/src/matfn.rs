//! Time-dependent problem data.
//!
//! Coefficients are either constant or polynomial in `t` with matrix-valued
//! coefficients (lowest degree first, degree at most [`MAX_DEGREE`]). Both
//! forms evaluate exactly and are closed under block slicing and stacking,
//! so partitioned blocks carry no interpolation error.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub const MAX_DEGREE: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixFunction {
    Constant(DMatrix<f64>),
    /// Coefficients of `t^0, t^1, ...`; all share one shape.
    Polynomial(Vec<DMatrix<f64>>),
}

impl MatrixFunction {
    pub fn constant(m: DMatrix<f64>) -> Self {
        MatrixFunction::Constant(m)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        MatrixFunction::Constant(DMatrix::zeros(rows, cols))
    }

    pub fn from_row_slice(rows: usize, cols: usize, data: &[f64]) -> Self {
        MatrixFunction::Constant(DMatrix::from_row_slice(rows, cols, data))
    }

    pub fn polynomial(coeffs: Vec<DMatrix<f64>>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter(
                "polynomial needs at least one coefficient".into(),
            ));
        }
        if coeffs.len() > MAX_DEGREE + 1 {
            return Err(Error::InvalidParameter(format!(
                "polynomial degree {} exceeds {MAX_DEGREE}",
                coeffs.len() - 1
            )));
        }
        let shape = coeffs[0].shape();
        if let Some(bad) = coeffs.iter().find(|c| c.shape() != shape) {
            return Err(Error::Dimension {
                field: "polynomial coefficient".into(),
                expected: format!("{shape:?}"),
                got: format!("{:?}", bad.shape()),
            });
        }
        Ok(MatrixFunction::Polynomial(coeffs))
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            MatrixFunction::Constant(m) => m.shape(),
            MatrixFunction::Polynomial(c) => c[0].shape(),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, MatrixFunction::Constant(_))
    }

    pub fn eval(&self, t: f64) -> DMatrix<f64> {
        match self {
            MatrixFunction::Constant(m) => m.clone(),
            MatrixFunction::Polynomial(c) => {
                // Horner
                let mut acc = c[c.len() - 1].clone();
                for k in (0..c.len() - 1).rev() {
                    acc *= t;
                    acc += &c[k];
                }
                acc
            }
        }
    }

    pub fn derivative(&self) -> MatrixFunction {
        match self {
            MatrixFunction::Constant(m) => MatrixFunction::zeros(m.nrows(), m.ncols()),
            MatrixFunction::Polynomial(c) if c.len() == 1 => {
                MatrixFunction::zeros(c[0].nrows(), c[0].ncols())
            }
            MatrixFunction::Polynomial(c) => MatrixFunction::Polynomial(
                c.iter()
                    .enumerate()
                    .skip(1)
                    .map(|(k, ck)| ck * k as f64)
                    .collect(),
            ),
        }
    }

    fn coeffs(&self) -> Vec<DMatrix<f64>> {
        match self {
            MatrixFunction::Constant(m) => vec![m.clone()],
            MatrixFunction::Polynomial(c) => c.clone(),
        }
    }

    fn rebuild(coeffs: Vec<DMatrix<f64>>) -> MatrixFunction {
        if coeffs.len() == 1 {
            MatrixFunction::Constant(coeffs.into_iter().next().unwrap())
        } else {
            MatrixFunction::Polynomial(coeffs)
        }
    }

    /// Sub-block `rows × cols` starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> MatrixFunction {
        Self::rebuild(
            self.coeffs()
                .iter()
                .map(|c| c.view((r0, c0), (rows, cols)).into_owned())
                .collect(),
        )
    }

    pub fn transpose(&self) -> MatrixFunction {
        Self::rebuild(self.coeffs().iter().map(|c| c.transpose()).collect())
    }

    /// Assembles a block matrix function from a row-major grid of blocks.
    pub fn from_blocks(grid: &[&[&MatrixFunction]]) -> MatrixFunction {
        let degree = grid
            .iter()
            .flat_map(|row| row.iter())
            .map(|f| f.coeffs().len())
            .max()
            .unwrap_or(1);
        let row_heights: Vec<usize> = grid.iter().map(|row| row[0].shape().0).collect();
        let col_widths: Vec<usize> = grid[0].iter().map(|f| f.shape().1).collect();
        let rows: usize = row_heights.iter().sum();
        let cols: usize = col_widths.iter().sum();
        let mut coeffs = vec![DMatrix::zeros(rows, cols); degree];
        let mut r0 = 0;
        for (i, row) in grid.iter().enumerate() {
            let mut c0 = 0;
            for (j, f) in row.iter().enumerate() {
                for (k, c) in f.coeffs().iter().enumerate() {
                    coeffs[k]
                        .view_mut((r0, c0), (row_heights[i], col_widths[j]))
                        .copy_from(c);
                }
                c0 += col_widths[j];
            }
            r0 += row_heights[i];
        }
        Self::rebuild(coeffs)
    }

    /// Largest absolute coefficient entry; zero iff the function is identically zero.
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs()
            .iter()
            .map(|c| c.amax())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScalarFunction {
    Constant(f64),
    /// Coefficients of `t^0, t^1, ...`.
    Polynomial(Vec<f64>),
}

impl ScalarFunction {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            ScalarFunction::Constant(c) => *c,
            ScalarFunction::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &ck| acc * t + ck),
        }
    }

    pub fn derivative(&self) -> ScalarFunction {
        match self {
            ScalarFunction::Constant(_) => ScalarFunction::Constant(0.0),
            ScalarFunction::Polynomial(c) if c.len() <= 1 => ScalarFunction::Constant(0.0),
            ScalarFunction::Polynomial(c) => ScalarFunction::Polynomial(
                c.iter()
                    .enumerate()
                    .skip(1)
                    .map(|(k, ck)| ck * k as f64)
                    .collect(),
            ),
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            ScalarFunction::Constant(_) => 0,
            ScalarFunction::Polynomial(c) => c.len().saturating_sub(1),
        }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        match self {
            ScalarFunction::Constant(c) => c.abs(),
            ScalarFunction::Polynomial(c) => c.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }

    /// Minimum over `[a, b]` together with its location.
    ///
    /// Candidates are the endpoints, a uniform grid of `grid` points and
    /// every interior critical point located by bisection on sign changes of
    /// the derivative over a fine subdivision.
    pub fn min_on(&self, a: f64, b: f64, grid: usize) -> (f64, f64) {
        let mut best = (self.eval(a), a);
        let consider = |t: f64, best: &mut (f64, f64)| {
            let v = self.eval(t);
            if v < best.0 {
                *best = (v, t);
            }
        };
        let grid = grid.max(2);
        for i in 0..grid {
            let t = a + (b - a) * i as f64 / (grid - 1) as f64;
            consider(t, &mut best);
        }
        if self.degree() >= 2 {
            let d = self.derivative();
            const SUB: usize = 4000;
            let mut t0 = a;
            let mut d0 = d.eval(t0);
            for i in 1..=SUB {
                let t1 = a + (b - a) * i as f64 / SUB as f64;
                let d1 = d.eval(t1);
                if d0 == 0.0 {
                    consider(t0, &mut best);
                } else if d0.signum() != d1.signum() {
                    let (mut lo, mut hi, mut dlo) = (t0, t1, d0);
                    for _ in 0..80 {
                        let mid = 0.5 * (lo + hi);
                        let dm = d.eval(mid);
                        if dm.signum() == dlo.signum() {
                            lo = mid;
                            dlo = dm;
                        } else {
                            hi = mid;
                        }
                    }
                    consider(0.5 * (lo + hi), &mut best);
                }
                t0 = t1;
                d0 = d1;
            }
        }
        consider(b, &mut best);
        best
    }
}
