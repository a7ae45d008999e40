//! Seeded random constructions for tests and experiments.
//!
//! Everything takes an explicit RNG so runs are reproducible.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::game::{DiagonalScaling, GameType, PolymatrixGame, PrismState};
use crate::scalar::Scalar;
use crate::vertex::VertexLabel;

/// Point of the open prism, bounded away from the faces.
pub fn random_interior_state<T: Scalar>(ty: &GameType, rng: &mut impl Rng) -> PrismState<T> {
    let mut x = DVector::<T>::zeros(ty.n());
    for g in 0..ty.p() {
        let raw: Vec<f64> = ty.range(g).map(|_| rng.random_range(0.05..1.0)).collect();
        let s: f64 = raw.iter().sum();
        for (k, i) in ty.range(g).enumerate() {
            x[i] = T::lit(raw[k] / s);
        }
    }
    PrismState::new(ty, x, 1e-6).expect("normalised by construction")
}

/// Random vector of `H`: every group sums to zero.
pub fn random_tangent(ty: &GameType, rng: &mut impl Rng) -> DVector<f64> {
    let mut w = DVector::from_fn(ty.n(), |_, _| rng.random_range(-1.0..1.0));
    for g in 0..ty.p() {
        let mean = ty.range(g).map(|i| w[i]).sum::<f64>() / ty.size(g) as f64;
        for i in ty.range(g) {
            w[i] -= mean;
        }
    }
    w
}

/// Random type with `p` groups of sizes in `2..=max_size`.
pub fn random_type(p: usize, max_size: usize, rng: &mut impl Rng) -> GameType {
    GameType::new((0..p).map(|_| rng.random_range(2..=max_size.max(2))).collect()).expect("non-empty")
}

/// Entries uniform in `[-bound, bound]`.
pub fn random_game(ty: &GameType, bound: f64, rng: &mut impl Rng) -> PolymatrixGame<f64> {
    let n = ty.n();
    let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-bound..=bound));
    PolymatrixGame::new(ty.clone(), m).expect("square")
}

/// Integer entries in `[-bound, bound]`.
pub fn random_integer_game(ty: &GameType, bound: i32, rng: &mut impl Rng) -> PolymatrixGame<f64> {
    let n = ty.n();
    let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-bound..=bound) as f64);
    PolymatrixGame::new(ty.clone(), m).expect("square")
}

pub fn random_scaling(ty: &GameType, rng: &mut impl Rng) -> DiagonalScaling<f64> {
    DiagonalScaling::new(ty, (0..ty.p()).map(|_| rng.random_range(0.2..5.0)).collect()).expect("positive")
}

pub fn random_integer_scaling(ty: &GameType, max: u32, rng: &mut impl Rng) -> DiagonalScaling<f64> {
    DiagonalScaling::new(ty, (0..ty.p()).map(|_| rng.random_range(1..=max) as f64).collect()).expect("positive")
}

pub fn random_vertex(ty: &GameType, rng: &mut impl Rng) -> VertexLabel {
    VertexLabel::new(ty, (0..ty.p()).map(|g| rng.random_range(ty.range(g))).collect()).expect("in range")
}

/// Matrix whose `(α, β)` blocks all have equal rows; adding it to a payoff
/// gives an equivalent game.
pub fn equal_row_perturbation(ty: &GameType, bound: f64, rng: &mut impl Rng) -> DMatrix<f64> {
    let n = ty.n();
    let mut m = DMatrix::zeros(n, n);
    for a in 0..ty.p() {
        let row: Vec<f64> = (0..n).map(|_| rng.random_range(-bound..=bound)).collect();
        for i in ty.range(a) {
            for j in 0..n {
                m[(i, j)] = row[j];
            }
        }
    }
    m
}

/// Stably dissipative `m × m` matrix: skew entries on a random spanning tree,
/// negative diagonal on `damped` indices and extra skew links among them.
pub fn random_stable_matrix(m: usize, damped: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(m, m);
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(rng);
    let magnitude = |rng: &mut dyn rand::RngCore| {
        let s: f64 = rng.random_range(0.5..3.0);
        if rng.random_bool(0.5) {
            s
        } else {
            -s
        }
    };
    for k in 1..m {
        let (i, j) = (order[k], order[rng.random_range(0..k)]);
        let s = magnitude(rng);
        a[(i, j)] = s;
        a[(j, i)] = -s;
    }
    let damped_idx = &order[..damped.min(m)];
    for &i in damped_idx {
        a[(i, i)] = -rng.random_range(0.5..3.0);
    }
    for (x, &i) in damped_idx.iter().enumerate() {
        for &j in &damped_idx[x + 1..] {
            if a[(i, j)] == 0.0 && rng.random_bool(0.5) {
                let s = magnitude(rng);
                a[(i, j)] = s;
                a[(j, i)] = -s;
            }
        }
    }
    a
}

/// Twenty fixed stably dissipative matrices of sizes 1 to 6.
pub fn curated_stable_matrices() -> Vec<DMatrix<f64>> {
    use rand::SeedableRng;
    let mut out = vec![
        DMatrix::zeros(1, 1),
        DMatrix::from_row_slice(1, 1, &[-2.0]),
        DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
        DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, -3.0, -1.0]),
        DMatrix::from_row_slice(3, 3, &[0.0, 27.0, 0.0, -27.0, -9.0, 18.0, 0.0, -18.0, 0.0]),
        DMatrix::from_row_slice(3, 3, &[-1.0, 2.0, 1.0, -2.0, -1.0, 0.0, -1.0, 0.0, 0.0]),
    ];
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20);
    while out.len() < 20 {
        let m = rng.random_range(2..=6);
        let damped = rng.random_range(0..=m);
        out.push(random_stable_matrix(m, damped, &mut rng));
    }
    out
}

/// Pair `(M, d)` with `M diag(d)` negative semidefinite.
pub fn dissipative_pair(m: usize, rng: &mut impl Rng) -> (DMatrix<f64>, DVector<f64>) {
    let damped = rng.random_range(0..=m / 2);
    let s = random_stable_matrix(m, damped, rng);
    let d = DVector::from_fn(m, |_, _| rng.random_range(0.2..5.0));
    let dinv = DMatrix::from_diagonal(&d.map(|v| 1.0 / v));
    (s * dinv, d)
}

/// A generated admissible game with the data used to build it.
#[derive(Debug, Clone)]
pub struct AdmissibleGame {
    pub game: PolymatrixGame<f64>,
    pub q: DVector<f64>,
    pub vertex: VertexLabel,
    pub scaling: DiagonalScaling<f64>,
    /// `(A D)_v`, stably dissipative.
    pub core: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct AdmissibleOptions {
    /// Number of negative diagonal entries of the core.
    pub damped: usize,
    /// Use a non-trivial scaling `D`.
    pub scaled: bool,
    /// Add an equivalence-preserving perturbation.
    pub noise: bool,
}

impl Default for AdmissibleOptions {
    fn default() -> Self {
        AdmissibleOptions { damped: 1, scaled: false, noise: false }
    }
}

/// Admissible game whose vertex matrix at a random vertex `v` (after the
/// scaling) is a [`random_stable_matrix`], with interior equilibrium `q`.
pub fn random_admissible_game(ty: &GameType, opts: &AdmissibleOptions, rng: &mut impl Rng) -> AdmissibleGame {
    let n = ty.n();
    let v = random_vertex(ty, rng);
    let idx = v.index_set(ty);
    let core = random_stable_matrix(idx.len(), opts.damped, rng);
    let mut a = DMatrix::zeros(n, n);
    for (r, &i) in idx.iter().enumerate() {
        for (c, &k) in idx.iter().enumerate() {
            a[(i, k)] = core[(r, c)];
        }
    }
    let d = if opts.scaled { random_scaling(ty, rng) } else { DiagonalScaling::identity(ty) };
    let mut a = a * d.inverse().matrix();
    let q = random_interior_state::<f64>(ty, rng).into_vector();
    // Constant rows inside the diagonal blocks vanish on H and shift (Aq)_i.
    let aq = &a * &q;
    for g in 0..ty.p() {
        for i in ty.range(g) {
            for k in ty.range(g) {
                a[(i, k)] -= aq[i];
            }
        }
    }
    if opts.noise {
        a += equal_row_perturbation(ty, 2.0, rng);
    }
    let game = PolymatrixGame::new(ty.clone(), a).expect("square");
    AdmissibleGame { game, q, vertex: v, scaling: d, core }
}

/// Single-group game of four strategies whose vertex matrices are skew with
/// a full triangle and zero diagonal, so no vertex is stably dissipative.
pub fn cyclic_game() -> PolymatrixGame<f64> {
    PolymatrixGame::from_rows(
        &[4],
        &[&[0.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 2.0], &[0.0, -1.0, 0.0, 3.0], &[0.0, -2.0, -3.0, 0.0]],
    )
    .expect("fixture")
}
