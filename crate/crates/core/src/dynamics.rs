//! Numerical integration of the replicator flow and the quantities
//! monitored along it.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::{DiagonalScaling, GameType, PolymatrixGame, PrismState};
use crate::generate::random_interior_state;
use crate::linalg;
use crate::reduction::{Color, ReducedInformationSet};
use crate::scalar::Scalar;
use crate::tol::Tolerances;
use crate::vertex::{vertex_matrix, VertexLabel};

/// Below this value log-based monitors are suspended.
const LOG_FLOOR: f64 = 1e-300;

/// `Σ c_j log x_j`, constant along orbits.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstIntegral<T: Scalar> {
    pub coefficients: DVector<T>,
}

impl<T: Scalar> FirstIntegral<T> {
    pub fn eval(&self, x: &DVector<T>) -> Option<T> {
        log_sum(&self.coefficients, x)
    }
}

fn log_sum<T: Scalar>(c: &DVector<T>, x: &DVector<T>) -> Option<T> {
    let mut total = T::zero();
    for (ci, xi) in c.iter().zip(x.iter()) {
        if *ci == T::zero() {
            continue;
        }
        if *xi < T::lit(LOG_FLOOR) {
            return None;
        }
        total += *ci * xi.ln();
    }
    Some(total)
}

/// Quantity recorded at every step of a trajectory.
#[derive(Debug, Clone)]
pub enum Monitor<T: Scalar> {
    /// `h(x) = −Σ q_i / d_i log x_i`.
    Lyapunov { q: DVector<T>, d: DiagonalScaling<T> },
    Integral { name: String, integral: FirstIntegral<T> },
    /// `x_i / x_j`.
    Ratio(usize, usize),
}

impl<T: Scalar> Monitor<T> {
    pub fn name(&self) -> String {
        match self {
            Monitor::Lyapunov { .. } => "h".into(),
            Monitor::Integral { name, .. } => name.clone(),
            Monitor::Ratio(i, j) => format!("x{}/x{}", i + 1, j + 1),
        }
    }

    /// Value at `x`; NaN where undefined.
    pub fn eval(&self, x: &DVector<T>) -> T {
        let v = match self {
            Monitor::Lyapunov { q, d } => lyapunov_h(q, d, x).ok(),
            Monitor::Integral { integral, .. } => integral.eval(x),
            Monitor::Ratio(i, j) => (x[*j] > T::zero()).then(|| x[*i] / x[*j]),
        };
        v.unwrap_or_else(|| T::lit(f64::NAN))
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory<T: Scalar> {
    pub times: Vec<T>,
    pub states: Vec<DVector<T>>,
    /// Monitor name → series aligned with `times`.
    pub monitors: BTreeMap<String, Vec<T>>,
    /// Monitor names in the order they were requested.
    pub monitor_order: Vec<String>,
    /// Largest `|group sum − 1|` removed by renormalisation.
    pub max_correction: T,
    /// Set when integration stopped on a non-finite state.
    pub error: Option<String>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn last(&self) -> &DVector<T> {
        self.states.last().expect("trajectories hold the initial state")
    }

    pub fn series(&self, name: &str) -> Option<&[T]> {
        self.monitors.get(name).map(|v| v.as_slice())
    }

    /// Index of the first sample with `t ≥ t0`.
    pub fn index_at(&self, t0: T) -> usize {
        self.times.iter().position(|t| *t >= t0).unwrap_or(self.times.len())
    }
}

fn rk4_step<T: Scalar>(game: &PolymatrixGame<T>, x: &DVector<T>, dt: T) -> DVector<T> {
    let half = dt * T::lit(0.5);
    let k1 = game.velocity(x);
    let k2 = game.velocity(&(x + &k1 * half));
    let k3 = game.velocity(&(x + &k2 * half));
    let k4 = game.velocity(&(x + &k3 * dt));
    x + (k1 + (k2 + k3) * T::lit(2.0) + k4) * (dt / T::lit(6.0))
}

/// Clips negatives to zero and rescales each group to unit sum; returns the
/// largest correction.
fn renormalize<T: Scalar>(ty: &GameType, x: &mut DVector<T>) -> T {
    let mut worst = T::zero();
    for v in x.iter_mut() {
        if *v < T::zero() {
            *v = T::zero();
        }
    }
    for g in 0..ty.p() {
        let s = ty.range(g).fold(T::zero(), |acc, i| acc + x[i]);
        worst = worst.max((s - T::one()).abs());
        if s > T::zero() {
            for i in ty.range(g) {
                x[i] /= s;
            }
        }
    }
    worst
}

/// Fixed-step RK4 integration of the replicator equation on `[0, t_end]`.
pub fn integrate<T: Scalar>(
    game: &PolymatrixGame<T>,
    x0: &PrismState<T>,
    t_end: T,
    dt: T,
    monitors: &[Monitor<T>],
) -> Result<Trajectory<T>> {
    if !(dt > T::zero()) || !(t_end >= T::zero()) {
        return Err(Error::Precondition("time step and duration must be positive".into()));
    }
    let ty = game.game_type();
    if x0.as_vector().len() != ty.n() {
        return Err(Error::InvalidState("initial state has the wrong dimension".into()));
    }
    let steps = (t_end / dt).round().as_f64() as usize;
    let mut traj = Trajectory {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        monitors: monitors.iter().map(|m| (m.name(), Vec::with_capacity(steps + 1))).collect(),
        monitor_order: monitors.iter().map(|m| m.name()).collect(),
        max_correction: T::zero(),
        error: None,
    };
    let record = |traj: &mut Trajectory<T>, t: T, x: DVector<T>| {
        for m in monitors {
            traj.monitors.get_mut(&m.name()).expect("registered").push(m.eval(&x));
        }
        traj.times.push(t);
        traj.states.push(x);
    };
    let mut x = x0.as_vector().clone();
    record(&mut traj, T::zero(), x.clone());
    for k in 1..=steps {
        let mut next = rk4_step(game, &x, dt);
        if next.iter().any(|v| !v.is_finite()) {
            traj.error = Some(format!("non-finite state at step {k}"));
            break;
        }
        let c = renormalize(ty, &mut next);
        traj.max_correction = traj.max_correction.max(c);
        x = next;
        record(&mut traj, dt * T::lit(k as f64), x.clone());
    }
    Ok(traj)
}

/// `h(x) = −Σ q_i / d_i log x_i`.
pub fn lyapunov_h<T: Scalar>(q: &DVector<T>, d: &DiagonalScaling<T>, x: &DVector<T>) -> Result<T> {
    if let Some(i) = x.iter().position(|v| !(*v > T::zero())) {
        return Err(Error::InvalidState(format!("coordinate {} is not positive", i + 1)));
    }
    let dv = d.expand();
    Ok(-(0..x.len()).fold(T::zero(), |acc, i| acc + q[i] / dv[i] * x[i].ln()))
}

/// Time derivative of `h` along the flow: `Q_{D⁻¹A}(x − q)`.
pub fn h_derivative<T: Scalar>(
    game: &PolymatrixGame<T>,
    q: &DVector<T>,
    d: &DiagonalScaling<T>,
    x: &DVector<T>,
) -> Result<T> {
    if let Some(i) = x.iter().position(|v| !(*v > T::zero())) {
        return Err(Error::InvalidState(format!("coordinate {} is not positive", i + 1)));
    }
    let w = x - q;
    let dinv = d.inverse().expand();
    let aw = game.payoff() * &w;
    Ok((0..w.len()).fold(T::zero(), |acc, i| acc + w[i] * dinv[i] * aw[i]))
}

/// Integrals `Σ b_i log(x_i / x_j)` for `b` in the kernel of `A_vᵀ`.
pub fn first_integrals<T: Scalar>(
    game: &PolymatrixGame<T>,
    v: &VertexLabel,
    tol: &Tolerances,
) -> Result<Vec<FirstIntegral<T>>> {
    let vm = vertex_matrix(game, v)?;
    let kernel = linalg::nullspace(&vm.entries.transpose(), tol.rank);
    let n = game.n();
    Ok(kernel
        .column_iter()
        .map(|b| FirstIntegral { coefficients: vm.tangent(n, &b.into_owned()) })
        .collect())
}

/// Observed `(min, max)` of `x_i / x_j` along a trajectory.
pub fn ratio_bounds<T: Scalar>(traj: &Trajectory<T>, pairs: &[(usize, usize)]) -> Vec<(T, T)> {
    pairs
        .iter()
        .map(|&(i, j)| {
            traj.states.iter().fold((T::max_value().unwrap_or(T::one()), T::zero()), |(lo, hi), x| {
                let r = x[i] / x[j];
                (lo.min(r), hi.max(r))
            })
        })
        .collect()
}

/// Largest relative mismatch in the quotient rule
/// `d/dt (x_i/x_j) = (x_i/x_j) Σ_k A_v[i,k] (x_k − q_k)` over `i ∈ 𝒱_v`.
pub fn quotient_rule_check<T: Scalar>(
    game: &PolymatrixGame<T>,
    q: &DVector<T>,
    v: &VertexLabel,
    x: &DVector<T>,
) -> Result<T> {
    let vm = vertex_matrix(game, v)?;
    let vel = game.velocity(x);
    let rhs_sum = &vm.entries * vm.coordinates(&(x - q));
    let mut worst = T::zero();
    for (k, (&i, &j)) in vm.index_set.iter().zip(&vm.partners).enumerate() {
        let lhs = (vel[i] * x[j] - x[i] * vel[j]) / (x[j] * x[j]);
        let rhs = x[i] / x[j] * rhs_sum[k];
        let scale = T::one().max(lhs.abs()).max(rhs.abs());
        worst = worst.max((lhs - rhs).abs() / scale);
    }
    Ok(worst)
}

/// Tail statistics comparing trajectories with the reduced information set.
#[derive(Debug, Clone)]
pub struct AttractorReport<T: Scalar> {
    /// Black strategies: largest `|x_i(T) − q_i|` over runs.
    pub black: Vec<(usize, T)>,
    /// Plus strategies: largest `|ẋ_i(T)|` over runs.
    pub plus: Vec<(usize, T)>,
    /// Links: largest spread of `x_i / x_j` over `[T/2, T]`.
    pub links: Vec<((usize, usize), T)>,
    pub runs: usize,
}

pub fn attractor_probe<T: Scalar>(
    game: &PolymatrixGame<T>,
    q: &DVector<T>,
    reduced: &ReducedInformationSet,
    runs: usize,
    t_end: T,
    dt: T,
    seed: u64,
) -> Result<AttractorReport<T>> {
    let ty = game.game_type();
    let colors = &reduced.info.colors;
    let pick = |c: Color| (0..ty.n()).filter(|&i| colors[i] == c).collect::<Vec<_>>();
    let (black_idx, plus_idx) = (pick(Color::Black), pick(Color::Plus));
    let links: Vec<(usize, usize)> = reduced.info.links.iter().copied().collect();
    let mut black: Vec<(usize, T)> = black_idx.iter().map(|&i| (i, T::zero())).collect();
    let mut plus: Vec<(usize, T)> = plus_idx.iter().map(|&i| (i, T::zero())).collect();
    let mut spread: Vec<((usize, usize), T)> = links.iter().map(|&p| (p, T::zero())).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..runs {
        let x0 = random_interior_state(ty, &mut rng);
        let traj = integrate(game, &x0, t_end, dt, &[])?;
        if let Some(e) = &traj.error {
            return Err(Error::Precondition(format!("integration failed: {e}")));
        }
        let x = traj.last();
        let vel = game.velocity(x);
        for (i, worst) in black.iter_mut() {
            *worst = worst.max((x[*i] - q[*i]).abs());
        }
        for (i, worst) in plus.iter_mut() {
            *worst = worst.max(vel[*i].abs());
        }
        let tail = traj.index_at(t_end * T::lit(0.5));
        for ((i, j), worst) in spread.iter_mut() {
            let (lo, hi) = traj.states[tail..].iter().fold((T::max_value().unwrap_or(T::one()), T::zero()), |(lo, hi), s| {
                let r = s[*i] / s[*j];
                (lo.min(r), hi.max(r))
            });
            *worst = worst.max(hi - lo);
        }
    }
    Ok(AttractorReport { black, plus, links: spread, runs })
}

/// Lotka-Volterra system `ż_i = z_i (r_i + (A z)_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LVSystem<T: Scalar> {
    pub a: DMatrix<T>,
    pub r: DVector<T>,
}

impl<T: Scalar> LVSystem<T> {
    pub fn new(a: DMatrix<T>, r: DVector<T>) -> Result<Self> {
        if !a.is_square() || a.nrows() != r.len() || a.nrows() == 0 {
            return Err(Error::Precondition(format!(
                "interaction matrix is {}x{} but the rate vector has length {}",
                a.nrows(),
                a.ncols(),
                r.len()
            )));
        }
        Ok(LVSystem { a, r })
    }

    pub fn dim(&self) -> usize {
        self.r.len()
    }

    pub fn field(&self, z: &DVector<T>) -> DVector<T> {
        let g = &self.r + &self.a * z;
        z.component_mul(&g)
    }
}

/// Single-group game with payoff `[[A, r], [0, 0]]`.
pub fn lv_to_replicator<T: Scalar>(lv: &LVSystem<T>) -> PolymatrixGame<T> {
    let n = lv.dim();
    let mut m = DMatrix::zeros(n + 1, n + 1);
    m.view_mut((0, 0), (n, n)).copy_from(&lv.a);
    m.view_mut((0, n), (n, 1)).copy_from(&lv.r);
    PolymatrixGame::new(GameType::new(vec![n + 1]).expect("non-empty"), m).expect("square payoff")
}

/// `φ(z) = (z, 1) / (1 + Σ z)`.
pub fn lv_embed<T: Scalar>(z: &DVector<T>) -> DVector<T> {
    let n = z.len();
    let s = T::one() + z.sum();
    DVector::from_fn(n + 1, |i, _| if i < n { z[i] / s } else { T::one() / s })
}

/// Push-forward of the LV field under [`lv_embed`] at `z`.
pub fn lv_pushforward<T: Scalar>(lv: &LVSystem<T>, z: &DVector<T>) -> DVector<T> {
    let n = z.len();
    let zdot = lv.field(z);
    let s = T::one() + z.sum();
    let sdot = zdot.sum();
    let s2 = s * s;
    DVector::from_fn(n + 1, |i, _| if i < n { (zdot[i] * s - z[i] * sdot) / s2 } else { -sdot / s2 })
}
