//! Removing pinned strategies: `(q, ℓ)`-reductions and the Hamiltonian
//! collapse of admissible games.
//!
//! On the slice `{x_ℓ = q_ℓ}`, wherever the flow is tangent to it, the
//! replicator field of `(n̲, A)` is conjugate to that of a smaller game
//! `(n̲(ℓ), A(ℓ))` under `y_j = x_j / (1 − q_ℓ)` on the rest of `ℓ`'s group.

use nalgebra::{DMatrix, DVector};

use crate::dissipativity::{admissible_with_scaling, check_with_scaling, find_scaling, Kind};
use crate::error::{Error, Result};
use crate::game::{DiagonalScaling, GameType, PolymatrixGame};
use crate::scalar::Scalar;
use crate::tol::Tolerances;
use crate::vertex::{vertex_matrix, zero_threshold, VertexLabel};

fn require_interior<T: Scalar>(q: &DVector<T>, n: usize) -> Result<()> {
    if q.len() != n {
        return Err(Error::Precondition(format!("equilibrium has length {}, expected {n}", q.len())));
    }
    if q.iter().any(|v| !(*v > T::zero())) {
        return Err(Error::Precondition("equilibrium is not interior".into()));
    }
    Ok(())
}

/// The `(q, ℓ)`-reduction: strategy `ell` is removed from its group.
pub fn q_ell_reduction<T: Scalar>(game: &PolymatrixGame<T>, q: &DVector<T>, ell: usize) -> Result<PolymatrixGame<T>> {
    let ty = game.game_type();
    ty.check_strategy(ell)?;
    if q.len() != ty.n() {
        return Err(Error::Precondition(format!("equilibrium has length {}, expected {}", q.len(), ty.n())));
    }
    let alpha = ty.group_of(ell);
    let q_ell = q[ell];
    if !(q_ell > T::zero() && q_ell < T::one()) {
        return Err(Error::Precondition(format!("q_{} = {} is not in (0, 1)", ell + 1, q_ell.as_f64())));
    }
    let reduced = ty
        .without_strategy(ell)
        .ok_or_else(|| Error::Precondition(format!("group {} has a single strategy", alpha + 1)))?;
    let a = game.payoff();
    let keep: Vec<usize> = (0..ty.n()).filter(|&i| i != ell).collect();
    let payoff = DMatrix::from_fn(keep.len(), keep.len(), |r, c| {
        let (i, j) = (keep[r], keep[c]);
        if ty.group_of(j) == alpha {
            // u(1 − q) + w q written with one rounded product
            let (u, w) = (a[(i, j)] - a[(ell, j)], a[(i, ell)] - a[(ell, ell)]);
            u + (w - u) * q_ell
        } else {
            a[(i, j)] - a[(ell, j)]
        }
    });
    PolymatrixGame::new(reduced, payoff)
}

/// Equilibrium of the `(q, ℓ)`-reduction.
pub fn reduced_equilibrium<T: Scalar>(ty: &GameType, q: &DVector<T>, ell: usize) -> DVector<T> {
    let alpha = ty.group_of(ell);
    let scale = T::one() / (T::one() - q[ell]);
    let vals: Vec<T> = (0..ty.n())
        .filter(|&i| i != ell)
        .map(|i| if ty.group_of(i) == alpha { q[i] * scale } else { q[i] })
        .collect();
    DVector::from_vec(vals)
}

/// Drops group `alpha` with every strategy pinned at `q`, folding its payoff
/// contribution into each remaining row's own-group columns.
fn remove_pinned_group<T: Scalar>(game: &PolymatrixGame<T>, q: &DVector<T>, alpha: usize) -> Result<PolymatrixGame<T>> {
    let ty = game.game_type();
    let reduced = ty
        .without_group(alpha)
        .ok_or_else(|| Error::Precondition("cannot remove the only group".into()))?;
    let a = game.payoff();
    let pinned = ty.range(alpha);
    let keep: Vec<usize> = (0..ty.n()).filter(|i| !pinned.contains(i)).collect();
    let mut payoff = DMatrix::from_fn(keep.len(), keep.len(), |r, c| a[(keep[r], keep[c])]);
    for (r, &i) in keep.iter().enumerate() {
        let offset = pinned.clone().fold(T::zero(), |acc, k| acc + a[(i, k)] * q[k]);
        for (c, &j) in keep.iter().enumerate() {
            if ty.same_group(i, j) {
                payoff[(r, c)] += offset;
            }
        }
    }
    PolymatrixGame::new(reduced, payoff)
}

/// Removes a two-strategy group whose strategies are pinned at `q`.
pub fn cardinal2_cleanup<T: Scalar>(game: &PolymatrixGame<T>, q: &DVector<T>, alpha: usize) -> Result<PolymatrixGame<T>> {
    let ty = game.game_type();
    if alpha >= ty.p() || ty.size(alpha) != 2 {
        return Err(Error::Precondition(format!("group {} does not have two strategies", alpha + 1)));
    }
    require_interior(q, ty.n())?;
    remove_pinned_group(game, q, alpha)
}

/// Map from the original prism to a reduced one: `y_k = scale_k · x_{kept_k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentificationMap<T: Scalar> {
    pub source_dim: usize,
    pub kept: Vec<usize>,
    pub scale: Vec<T>,
}

impl<T: Scalar> IdentificationMap<T> {
    pub fn identity(n: usize) -> Self {
        IdentificationMap { source_dim: n, kept: (0..n).collect(), scale: vec![T::one(); n] }
    }

    pub fn apply(&self, x: &DVector<T>) -> DVector<T> {
        DVector::from_iterator(self.kept.len(), self.kept.iter().zip(&self.scale).map(|(&i, &s)| x[i] * s))
    }

    /// Drops current coordinate `k`, rescaling `group` by `factor`.
    fn drop(&mut self, k: usize, group: &[usize], factor: T) {
        for &g in group {
            self.scale[g] *= factor;
        }
        self.kept.remove(k);
        self.scale.remove(k);
    }

    fn drop_range(&mut self, range: std::ops::Range<usize>) {
        self.kept.drain(range.clone());
        self.scale.drain(range);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionStep<T: Scalar> {
    /// Removed strategy, in original numbering.
    pub removed: usize,
    /// Group of the removed strategy in the game before the step.
    pub group: usize,
    pub q_ell: T,
    pub before: GameType,
    pub after: GameType,
    /// Factor `1 / (1 − q_ℓ)` applied to the scaling of `group`.
    pub scaling_factor: T,
    /// The whole two-strategy group was removed; holds the partner removed
    /// with `removed` (original numbering).
    pub cleanup: Option<usize>,
}

/// One removal on a tracked game.
struct Tracker<T: Scalar> {
    game: PolymatrixGame<T>,
    q: DVector<T>,
    /// Original index of each current strategy.
    origin: Vec<usize>,
    map: IdentificationMap<T>,
}

impl<T: Scalar> Tracker<T> {
    fn new(game: &PolymatrixGame<T>, q: &DVector<T>) -> Self {
        let n = game.n();
        Tracker { game: game.clone(), q: q.clone(), origin: (0..n).collect(), map: IdentificationMap::identity(n) }
    }

    /// Removes current strategy `ell`. Two-strategy groups go entirely when
    /// another group remains.
    fn remove(&mut self, ell: usize) -> Result<ReductionStep<T>> {
        let ty = self.game.game_type().clone();
        let alpha = ty.group_of(ell);
        let q_ell = self.q[ell];
        let factor = T::one() / (T::one() - q_ell);
        let range = ty.range(alpha);
        if ty.size(alpha) == 2 && ty.p() > 1 {
            let partner = range.clone().find(|&i| i != ell).expect("two strategies");
            self.game = cardinal2_cleanup(&self.game, &self.q, alpha)?;
            let q: Vec<T> = (0..ty.n()).filter(|i| !range.contains(i)).map(|i| self.q[i]).collect();
            self.q = DVector::from_vec(q);
            let (removed, partner_orig) = (self.origin[ell], self.origin[partner]);
            self.origin.drain(range.clone());
            self.map.drop_range(range);
            return Ok(ReductionStep {
                removed,
                group: alpha,
                q_ell,
                before: ty,
                after: self.game.game_type().clone(),
                scaling_factor: factor,
                cleanup: Some(partner_orig),
            });
        }
        self.game = q_ell_reduction(&self.game, &self.q, ell)?;
        self.q = reduced_equilibrium(&ty, &self.q, ell);
        let survivors: Vec<usize> = range.filter(|&i| i != ell).map(|i| if i > ell { i - 1 } else { i }).collect();
        let removed = self.origin.remove(ell);
        self.map.drop(ell, &[], T::one());
        for &s in &survivors {
            self.map.scale[s] *= factor;
        }
        Ok(ReductionStep {
            removed,
            group: alpha,
            q_ell,
            before: ty,
            after: self.game.game_type().clone(),
            scaling_factor: factor,
            cleanup: None,
        })
    }
}

/// Removes every strategy of `set` (original numbering, pinned on the
/// attractor) in descending order.
pub fn reduce_by_set<T: Scalar>(
    game: &PolymatrixGame<T>,
    q: &DVector<T>,
    set: &[usize],
) -> Result<(PolymatrixGame<T>, IdentificationMap<T>, Vec<ReductionStep<T>>)> {
    let ty = game.game_type();
    require_interior(q, ty.n())?;
    for &l in set {
        ty.check_strategy(l)?;
    }
    let mut order: Vec<usize> = set.to_vec();
    order.sort_unstable_by(|a, b| b.cmp(a));
    order.dedup();
    let mut t = Tracker::new(game, q);
    let mut steps = Vec::new();
    for l in order {
        let Some(cur) = t.origin.iter().position(|&o| o == l) else { continue };
        let cty = t.game.game_type().clone();
        let g = cty.group_of(cur);
        if cty.size(g) == 1 {
            // Already pinned at 1: drop the group.
            if cty.p() == 1 {
                return Err(Error::Precondition("cannot remove the last strategy".into()));
            }
            t.game = remove_pinned_group(&t.game, &t.q, g)?;
            t.q = DVector::from_vec((0..cty.n()).filter(|&i| i != cur).map(|i| t.q[i]).collect());
            t.origin.remove(cur);
            t.map.drop_range(cur..cur + 1);
            steps.push(ReductionStep {
                removed: l,
                group: g,
                q_ell: T::one(),
                before: cty,
                after: t.game.game_type().clone(),
                scaling_factor: T::one(),
                cleanup: None,
            });
            continue;
        }
        steps.push(t.remove(cur)?);
    }
    Ok((t.game, t.map, steps))
}

#[derive(Debug, Clone)]
pub struct CollapseResult<T: Scalar> {
    pub steps: Vec<ReductionStep<T>>,
    pub final_game: PolymatrixGame<T>,
    pub final_equilibrium: DVector<T>,
    pub conservative_certificate: DiagonalScaling<T>,
    /// Vertex used, in the original game.
    pub vertex: VertexLabel,
    pub map: IdentificationMap<T>,
}

/// Iterated reduction of an admissible game with interior equilibrium `q`
/// down to a conservative game.
///
/// Uses the smallest vertex of `V*` and removes, smallest index first, any
/// non-chosen strategy with a negative diagonal entry in the vertex matrix.
pub fn hamiltonian_collapse<T: Scalar>(
    game: &PolymatrixGame<T>,
    q: &DVector<T>,
    tol: &Tolerances,
) -> Result<CollapseResult<T>> {
    let ty = game.game_type();
    require_interior(q, ty.n())?;
    let residual = game.velocity(q).amax();
    if residual > T::lit(1e-9) * T::one().max(game.payoff().amax()) {
        return Err(Error::Precondition(format!("q is not an equilibrium (residual {:e})", residual.as_f64())));
    }
    let d = find_scaling(game, tol).ok_or_else(|| Error::Precondition("no dissipativity certificate found".into()))?;
    let adm = admissible_with_scaling(game, &d, tol)?;
    if !adm.admissible {
        return Err(Error::Precondition("game is not admissible".into()));
    }
    let v = adm.v_star[0].clone();
    let mut chosen: Vec<usize> = v.chosen().to_vec();
    let mut d_groups: Vec<T> = d.per_group().to_vec();
    let mut t = Tracker::new(game, q);
    let mut steps = Vec::new();
    loop {
        let cty = t.game.game_type().clone();
        let cur_v = VertexLabel::new(&cty, chosen.clone())?;
        let vm = vertex_matrix(&t.game, &cur_v)?;
        let zero = zero_threshold(&vm.entries, tol);
        let Some(k) = (0..vm.dim()).find(|&k| vm.entries[(k, k)] < -zero) else { break };
        let ell = vm.index_set[k];
        let alpha = cty.group_of(ell);
        let step = t.remove(ell)?;
        if step.cleanup.is_some() {
            d_groups.remove(alpha);
            chosen.remove(alpha);
            for c in chosen.iter_mut() {
                if *c > ell {
                    *c -= 2;
                }
            }
        } else {
            d_groups[alpha] *= step.scaling_factor;
            for c in chosen.iter_mut() {
                if *c > ell {
                    *c -= 1;
                }
            }
        }
        steps.push(step);
        let nty = t.game.game_type();
        let dn = DiagonalScaling::new(nty, d_groups.clone())?;
        let nv = VertexLabel::new(nty, chosen.clone())?;
        let check = admissible_with_scaling(&t.game, &dn, tol)?;
        if !check.admissible || !check.v_star.contains(&nv) {
            return Err(Error::Certificate(format!(
                "reduced game of type {nty} is not admissible at vertex {nv} after removing strategy {}",
                steps.last().map_or(0, |s| s.removed + 1)
            )));
        }
    }
    let certificate = DiagonalScaling::new(t.game.game_type(), d_groups)?;
    let c = check_with_scaling(&t.game, &certificate, tol)?;
    if c.kind != Kind::Conservative {
        return Err(Error::Certificate(format!("final game is {}, not conservative", c.kind)));
    }
    Ok(CollapseResult {
        steps,
        final_game: t.game,
        final_equilibrium: t.q,
        conservative_certificate: certificate,
        vertex: v,
        map: t.map,
    })
}

/// Random point of the slice `{x_ℓ = q_ℓ}` in the interior of the prism.
pub fn slice_point<T: Scalar>(ty: &GameType, q_ell: T, ell: usize, uniforms: &mut impl FnMut() -> f64) -> DVector<T> {
    let mut x = DVector::zeros(ty.n());
    for g in 0..ty.p() {
        let members: Vec<usize> = ty.range(g).filter(|&i| !(g == ty.group_of(ell) && i == ell)).collect();
        let weights: Vec<f64> = members.iter().map(|_| -(1.0 - uniforms()).ln()).collect();
        let total: f64 = weights.iter().sum();
        let mass = if g == ty.group_of(ell) { T::one() - q_ell } else { T::one() };
        for (i, w) in members.iter().zip(weights) {
            x[*i] = mass * T::lit(w / total);
        }
    }
    x[ell] = q_ell;
    x
}

/// Point on the segment `[a, b]` of the slice where the `ℓ`-th velocity
/// vanishes, given opposite signs at the ends. Bisection to `|f| ≤ ftol`.
pub fn tangency_on_segment<T: Scalar>(
    game: &PolymatrixGame<T>,
    ell: usize,
    a: &DVector<T>,
    b: &DVector<T>,
    ftol: T,
) -> Option<DVector<T>> {
    let f = |s: T| {
        let x = a + (b - a) * s;
        let v = game.velocity(&x)[ell];
        (x, v)
    };
    let (mut lo, mut hi) = (T::zero(), T::one());
    let (_, flo) = f(lo);
    let (_, fhi) = f(hi);
    if flo.signum() == fhi.signum() {
        return None;
    }
    let lo_sign = flo.signum();
    for _ in 0..200 {
        let mid = (lo + hi) * T::lit(0.5);
        let (x, fm) = f(mid);
        if fm.abs() <= ftol || hi - lo <= T::default_epsilon() {
            return Some(x);
        }
        if fm.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (x, fm) = f((lo + hi) * T::lit(0.5));
    (fm.abs() <= ftol * T::lit(1e3)).then_some(x)
}
