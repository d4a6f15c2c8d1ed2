#![allow(dead_code)]

use cheapgame::{Dimensions, GameSpec, MatrixFunction, ScalarFunction};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TABLE_EPS: [f64; 3] = [0.2, 0.1, 0.05];

fn uniform(rng: &mut ChaCha8Rng, r: usize, c: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.gen_range(-scale..=scale))
}

fn psd(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> DMatrix<f64> {
    let b = uniform(rng, n, n, 1.0);
    &b * b.transpose() * scale
}

/// Constant or affine-in-`t` matrix function with the given shape.
fn matfn(rng: &mut ChaCha8Rng, r: usize, c: usize, scale: f64) -> MatrixFunction {
    let c0 = uniform(rng, r, c, scale);
    if rng.gen_bool(0.5) {
        MatrixFunction::constant(c0)
    } else {
        let c1 = uniform(rng, r, c, 0.3 * scale);
        MatrixFunction::polynomial(vec![c0, c1]).unwrap()
    }
}

/// A random game with `n ≤ 3`, `m ≤ 4`, `1 ≤ m1 < m`, the last `m − m1`
/// columns of `A₂` zero, `D₁`, `F₁` PSD, `G` PD and `λ_p > 0` on `[0, t_f]`.
pub fn random_spec(seed: u64) -> GameSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=3);
    let m = rng.gen_range(2..=4);
    let m1 = rng.gen_range(1..m);
    let l = rng.gen_range(1..=3);
    let t_f = rng.gen_range(0.5..=2.0);
    let mut a2 = DMatrix::zeros(n, m);
    a2.view_mut((0, 0), (n, m1)).copy_from(&uniform(&mut rng, n, m1, 1.0));
    let lambda = (0..m)
        .map(|p| {
            if p >= m1 {
                ScalarFunction::Constant(0.0)
            } else {
                let a: f64 = rng.gen_range(0.5..=5.0);
                let b: f64 = rng.gen_range(-0.4..=0.4) * a / t_f;
                ScalarFunction::Polynomial(vec![a, b])
            }
        })
        .collect();
    let g = psd(&mut rng, l, 0.3) + DMatrix::identity(l, l) * rng.gen_range(1.0..=3.0);
    GameSpec {
        dims: Dimensions { n, m, l, m1 },
        t_f,
        epsilon: 0.1,
        a1: matfn(&mut rng, n, n, 1.0),
        a2: MatrixFunction::constant(a2),
        a3: matfn(&mut rng, m, n, 1.0),
        a4: matfn(&mut rng, m, m, 1.0),
        c1: MatrixFunction::constant(uniform(&mut rng, n, l, 0.3)),
        c2: MatrixFunction::constant(uniform(&mut rng, m, l, 0.5)),
        d1: MatrixFunction::constant(psd(&mut rng, n, 1.0)),
        lambda,
        g: MatrixFunction::constant(g),
        f1: psd(&mut rng, n, 0.5),
        x0: DVector::from_fn(n, |_, _| rng.gen_range(-1.0..=1.0)),
        y0: DVector::from_fn(m, |_, _| rng.gen_range(-1.0..=1.0)),
    }
}

pub fn k1o_closed(t: f64) -> f64 {
    8.0 * ((1.0f64 / 16.0).atan() + 1.2 - 0.8 * t).tan()
}

pub fn k6o_closed(t: f64) -> f64 {
    let g = 2.0f64.sqrt();
    let th = (g * (t - 1.5)).tanh();
    g * th / (g * th - 2.0)
}
