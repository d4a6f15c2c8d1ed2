//! TOML game description.
//!
//! ```toml
//! [dimensions]
//! n = 1
//! m = 2
//! l = 2
//! m1 = 1
//! t_f = 1.5
//! epsilon = [0.2, 0.1, 0.05]   # or a single number
//!
//! [dynamics]
//! A1 = [[0.0]]
//! A2 = [[1.0, 0.0]]
//! A3 = [[0.0], [0.0]]
//! A4 = [[0.0, 1.0], [0.0, -1.0]]
//! C1 = [[1.0, 0.0]]
//! C2 = [[0.0, 1.0], [0.0, 0.0]]
//!
//! [cost]
//! D1 = [[6.4]]
//! lambda = [10.0, 0.0]         # or D2 = [[10.0, 0.0], [0.0, 0.0]]
//! G = [[5.0, 0.0], [0.0, 4.0]]
//! F1 = [[0.5]]
//!
//! [initial]
//! x0 = [0.0]
//! y0 = [2.0, 1.0]
//! ```
//!
//! Matrices are row-major. Any time-dependent entry is written as
//! `{ poly = [C0, C1, ...] }` with coefficients of `t^0, t^1, ...`.

use std::path::Path;

use cheapgame::{Dimensions, GameSpec, MatrixFunction, ScalarFunction};
use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum MatrixValue {
    Constant(Vec<Vec<f64>>),
    Poly { poly: Vec<Vec<Vec<f64>>> },
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ScalarValue {
    Constant(f64),
    Poly { poly: Vec<f64> },
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum EpsilonValue {
    One(f64),
    Many(Vec<f64>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DimensionsSection {
    n: usize,
    m: usize,
    l: usize,
    m1: usize,
    t_f: f64,
    epsilon: EpsilonValue,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct DynamicsSection {
    A1: MatrixValue,
    A2: MatrixValue,
    A3: MatrixValue,
    A4: MatrixValue,
    C1: MatrixValue,
    C2: MatrixValue,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct CostSection {
    D1: MatrixValue,
    lambda: Option<Vec<ScalarValue>>,
    D2: Option<MatrixValue>,
    G: MatrixValue,
    F1: Vec<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InitialSection {
    x0: Vec<f64>,
    y0: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    dimensions: DimensionsSection,
    dynamics: DynamicsSection,
    cost: CostSection,
    initial: InitialSection,
}

/// A parsed game together with the `ε` values listed in the file.
#[derive(Debug, Clone)]
pub struct LoadedSpec {
    pub spec: GameSpec,
    pub epsilons: Vec<f64>,
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::validation(format!("{field}: {msg}"))
}

fn dense(field: &str, rows: &[Vec<f64>], shape: (usize, usize)) -> Result<DMatrix<f64>, CliError> {
    let (r, c) = shape;
    if rows.len() != r || rows.iter().any(|row| row.len() != c) {
        let got_c = rows.first().map(|x| x.len()).unwrap_or(0);
        return Err(invalid(field, format!("expected {r}x{c}, got {}x{got_c}", rows.len())));
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(invalid(field, "entries must be finite"));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

fn matrix(field: &str, v: &MatrixValue, shape: (usize, usize)) -> Result<MatrixFunction, CliError> {
    match v {
        MatrixValue::Constant(rows) => Ok(MatrixFunction::constant(dense(field, rows, shape)?)),
        MatrixValue::Poly { poly } => {
            let coeffs = poly
                .iter()
                .enumerate()
                .map(|(k, c)| dense(&format!("{field}.poly[{k}]"), c, shape))
                .collect::<Result<Vec<_>, _>>()?;
            MatrixFunction::polynomial(coeffs).map_err(|e| invalid(field, e))
        }
    }
}

fn scalar(field: &str, v: &ScalarValue) -> Result<ScalarFunction, CliError> {
    match v {
        ScalarValue::Constant(c) if c.is_finite() => Ok(ScalarFunction::Constant(*c)),
        ScalarValue::Constant(_) => Err(invalid(field, "must be finite")),
        ScalarValue::Poly { poly } if poly.is_empty() => Err(invalid(field, "empty polynomial")),
        ScalarValue::Poly { poly } if poly.len() > cheapgame::matfn::MAX_DEGREE + 1 => Err(invalid(
            field,
            format!("degree exceeds {}", cheapgame::matfn::MAX_DEGREE),
        )),
        ScalarValue::Poly { poly } => Ok(ScalarFunction::Polynomial(poly.clone())),
    }
}

/// Diagonal of a `D₂` given as a matrix; anything off the diagonal is refused.
fn d2_diagonal(v: &MatrixValue, m: usize) -> Result<Vec<ScalarFunction>, CliError> {
    let f = matrix("cost.D2", v, (m, m))?;
    let coeffs: Vec<DMatrix<f64>> = match &f {
        MatrixFunction::Constant(c) => vec![c.clone()],
        MatrixFunction::Polynomial(c) => c.clone(),
    };
    for c in &coeffs {
        for i in 0..m {
            for j in 0..m {
                if i != j && c[(i, j)] != 0.0 {
                    return Err(invalid(
                        "cost.D2",
                        format!("entry ({}, {}) is off the diagonal; only diagonal D2 is supported", i + 1, j + 1),
                    ));
                }
            }
        }
    }
    Ok((0..m)
        .map(|p| {
            if coeffs.len() == 1 {
                ScalarFunction::Constant(coeffs[0][(p, p)])
            } else {
                ScalarFunction::Polynomial(coeffs.iter().map(|c| c[(p, p)]).collect())
            }
        })
        .collect())
}

pub fn parse_spec(text: &str) -> Result<LoadedSpec, CliError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::validation(format!("parse error: {e}")))?;
    let d = &raw.dimensions;
    let (n, m, l) = (d.n, d.m, d.l);
    if n == 0 || m == 0 || l == 0 {
        return Err(invalid("dimensions", "n, m and l must be positive"));
    }
    let epsilons = match &d.epsilon {
        EpsilonValue::One(e) => vec![*e],
        EpsilonValue::Many(v) if v.is_empty() => return Err(invalid("dimensions.epsilon", "empty list")),
        EpsilonValue::Many(v) => v.clone(),
    };
    let dy = &raw.dynamics;
    let c = &raw.cost;
    let lambda = match (&c.lambda, &c.D2) {
        (Some(_), Some(_)) => return Err(invalid("cost", "give either lambda or D2, not both")),
        (None, None) => return Err(invalid("cost", "missing lambda (or D2)")),
        (Some(lam), None) => {
            if lam.len() != m {
                return Err(invalid("cost.lambda", format!("expected {m} entries, got {}", lam.len())));
            }
            lam.iter()
                .enumerate()
                .map(|(k, v)| scalar(&format!("cost.lambda[{k}]"), v))
                .collect::<Result<Vec<_>, _>>()?
        }
        (None, Some(d2)) => d2_diagonal(d2, m)?,
    };
    let vec_of = |field: &str, v: &[f64], len: usize| {
        if v.len() != len {
            Err(invalid(field, format!("expected {len} entries, got {}", v.len())))
        } else {
            Ok(DVector::from_column_slice(v))
        }
    };
    let spec = GameSpec {
        dims: Dimensions { n, m, l, m1: d.m1 },
        t_f: d.t_f,
        epsilon: epsilons[0],
        a1: matrix("dynamics.A1", &dy.A1, (n, n))?,
        a2: matrix("dynamics.A2", &dy.A2, (n, m))?,
        a3: matrix("dynamics.A3", &dy.A3, (m, n))?,
        a4: matrix("dynamics.A4", &dy.A4, (m, m))?,
        c1: matrix("dynamics.C1", &dy.C1, (n, l))?,
        c2: matrix("dynamics.C2", &dy.C2, (m, l))?,
        d1: matrix("cost.D1", &c.D1, (n, n))?,
        lambda,
        g: matrix("cost.G", &c.G, (l, l))?,
        f1: dense("cost.F1", &c.F1, (n, n))?,
        x0: vec_of("initial.x0", &raw.initial.x0, n)?,
        y0: vec_of("initial.y0", &raw.initial.y0, m)?,
    };
    Ok(LoadedSpec { spec, epsilons })
}

pub fn load_spec(path: &Path) -> Result<LoadedSpec, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
    parse_spec(&text).map_err(|e| CliError {
        message: format!("{}: {}", path.display(), e.message),
        ..e
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = include_str!("../specs/pursuit_evasion.toml");

    #[test]
    fn example_file_matches_builtin() {
        let loaded = parse_spec(EXAMPLE).unwrap();
        assert_eq!(loaded.spec, cheapgame::pursuit_evasion(0.2));
        assert_eq!(loaded.epsilons, vec![0.2, 0.1, 0.05]);
    }

    #[test]
    fn wrong_shape_names_field() {
        let text = EXAMPLE.replace("A2 = [[1.0, 0.0]]", "A2 = [[1.0, 0.0, 3.0]]");
        let err = parse_spec(&text).unwrap_err();
        assert!(err.message.contains("dynamics.A2"), "{}", err.message);
        assert!(err.message.contains("expected 1x2"), "{}", err.message);
    }

    #[test]
    fn syntax_error_reports_line() {
        let text = EXAMPLE.replace("n = 1", "n = ");
        let err = parse_spec(&text).unwrap_err();
        assert!(err.message.contains("line"), "{}", err.message);
    }

    #[test]
    fn polynomial_entries() {
        let text = EXAMPLE
            .replace("A1 = [[0.0]]", "A1 = { poly = [[[0.0]], [[0.5]]] }")
            .replace("lambda = [10.0, 0.0]", "lambda = [{ poly = [10.0, 1.0] }, 0.0]");
        let s = parse_spec(&text).unwrap().spec;
        assert_eq!(s.a1.eval(2.0)[(0, 0)], 1.0);
        assert_eq!(s.lambda[0].eval(2.0), 12.0);
    }

    #[test]
    fn d2_matrix_form() {
        let text = EXAMPLE.replace("lambda = [10.0, 0.0]", "D2 = [[10.0, 0.0], [0.0, 0.0]]");
        assert_eq!(parse_spec(&text).unwrap().spec, cheapgame::pursuit_evasion(0.2));
        let text = EXAMPLE.replace("lambda = [10.0, 0.0]", "D2 = [[10.0, 1.0], [1.0, 0.0]]");
        let err = parse_spec(&text).unwrap_err();
        assert!(err.message.contains("only diagonal D2"), "{}", err.message);
    }

    #[test]
    fn single_epsilon() {
        let text = EXAMPLE.replace("epsilon = [0.2, 0.1, 0.05]", "epsilon = 0.3");
        assert_eq!(parse_spec(&text).unwrap().epsilons, vec![0.3]);
    }
}
