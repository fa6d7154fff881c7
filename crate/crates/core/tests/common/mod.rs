#![allow(dead_code)]

pub mod grid_oracle;

use filippov_core::{Mat3, Vec3};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn random_matrix(rng: &mut impl Rng, half_width: f64) -> Mat3 {
    let mut rows = [[0.0; 3]; 3];
    for v in rows.iter_mut().flatten() {
        *v = rng.random_range(-half_width..half_width);
    }
    Mat3::from_rows(rows)
}

pub fn random_unit(rng: &mut impl Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        if let Some(u) = v.normalized() {
            return u;
        }
    }
}

/// Rotation matrix from a uniformly random unit quaternion.
pub fn random_rotation(rng: &mut impl Rng) -> Mat3 {
    let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
    let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    let [w, x, y, z] = q.map(|v| v / n);
    Mat3::from_rows([
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ])
}

/// Classical fixed-step fourth-order Runge–Kutta for `ẋ = M x`.
pub fn rk4_linear(m: &Mat3, x0: Vec3, t: f64, h: f64) -> Vec3 {
    let steps = (t / h).round() as usize;
    let h = t / steps as f64;
    let f = |x: Vec3| m.mul_vec(x);
    let mut x = x0;
    for _ in 0..steps {
        let k1 = f(x);
        let k2 = f(x + k1 * (h / 2.0));
        let k3 = f(x + k2 * (h / 2.0));
        let k4 = f(x + k3 * h);
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    x
}
