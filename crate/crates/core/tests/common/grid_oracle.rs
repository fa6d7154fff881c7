//! Brute-force component counts for the sign pattern of a quadratic form on
//! a latitude/longitude grid of the unit sphere.

use filippov_core::algebra::SymForm3;
use filippov_core::tangency::TangencyConfiguration;
use filippov_core::Vec3;

pub const ROWS: usize = 200;
pub const COLS: usize = 400;
/// Half-width of the near-zero band, relative to the spectral radius.
pub const BAND: f64 = 0.06;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridCounts {
    /// Connected components of `{|f| ≤ band}`.
    pub zero: usize,
    /// Connected components of `{f > band}` plus those of `{f < −band}`.
    pub signed: usize,
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut j = i;
        while self.0[j] != r {
            let next = self.0[j];
            self.0[j] = r;
            j = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra] = rb;
        }
    }
}

fn cell_center(r: usize, c: usize) -> Vec3 {
    let theta = std::f64::consts::PI * (r as f64 + 0.5) / ROWS as f64;
    let phi = std::f64::consts::TAU * (c as f64 + 0.5) / COLS as f64;
    Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
}

pub fn grid_counts(q: &SymForm3) -> GridCounts {
    let band = BAND * q.spectral_radius();
    let idx = |r: usize, c: usize| r * COLS + c;
    let class: Vec<u8> = (0..ROWS * COLS)
        .map(|i| {
            let f = q.eval(cell_center(i / COLS, i % COLS));
            if f.abs() <= band {
                0
            } else if f > 0.0 {
                1
            } else {
                2
            }
        })
        .collect();
    let mut dsu = Dsu((0..ROWS * COLS).collect());
    for r in 0..ROWS {
        for c in 0..COLS {
            let here = idx(r, c);
            let right = idx(r, (c + 1) % COLS);
            if class[here] == class[right] {
                dsu.union(here, right);
            }
            if r + 1 < ROWS && class[here] == class[idx(r + 1, c)] {
                dsu.union(here, idx(r + 1, c));
            }
        }
    }
    // Cells of the first and last rows all touch their pole.
    for r in [0, ROWS - 1] {
        for k in 0..3u8 {
            let cells: Vec<usize> = (0..COLS).map(|c| idx(r, c)).filter(|&i| class[i] == k).collect();
            for w in cells.windows(2) {
                dsu.union(w[0], w[1]);
            }
        }
    }
    let mut roots = [Vec::new(), Vec::new(), Vec::new()];
    for i in 0..ROWS * COLS {
        let root = dsu.find(i);
        roots[class[i] as usize].push(root);
    }
    let count = |v: &mut Vec<usize>| {
        v.sort_unstable();
        v.dedup();
        v.len()
    };
    let zero = count(&mut roots[0]);
    let signed = count(&mut roots[1]) + count(&mut roots[2]);
    GridCounts { zero, signed }
}

/// Component counts implied by a configuration.
pub fn expected_counts(config: TangencyConfiguration) -> GridCounts {
    let (zero, signed) = match config {
        TangencyConfiguration::Empty => (0, 1),
        TangencyConfiguration::TwoPoints => (2, 1),
        TangencyConfiguration::OneGreatCircle => (1, 2),
        TangencyConfiguration::TwoCrossingCircles => (1, 4),
        TangencyConfiguration::TwoDisjointLoops => (2, 3),
    };
    GridCounts { zero, signed }
}

/// Signed eigenvalue patterns `(positive, negative, zero)` with both
/// orientations of each sphere configuration.
pub const INERTIA_CLASSES: [(usize, usize, usize); 9] = [
    (3, 0, 0),
    (0, 3, 0),
    (2, 0, 1),
    (0, 2, 1),
    (1, 0, 2),
    (0, 1, 2),
    (1, 1, 1),
    (2, 1, 0),
    (1, 2, 0),
];

/// `R diag(λ) Rᵗ` with `|λ| ∈ [0.5, 2]`, exact zeros, and the requested
/// sign pattern; `uniform` yields numbers in `[0, 1)` and `rotation` a
/// random rotation matrix.
pub fn form_with_inertia(
    pattern: (usize, usize, usize),
    mut uniform: impl FnMut() -> f64,
    rotation: filippov_core::Mat3,
) -> SymForm3 {
    let (p, n, _) = pattern;
    let mut lambda = [0.0; 3];
    for (k, l) in lambda.iter_mut().enumerate() {
        let mag = 0.5 + 1.5 * uniform();
        *l = if k < p {
            mag
        } else if k < p + n {
            -mag
        } else {
            0.0
        };
    }
    let d = filippov_core::Mat3::diag(lambda);
    let m = rotation.mul_mat(&d).mul_mat(&rotation.transpose());
    SymForm3::symmetric_part(&m)
}
