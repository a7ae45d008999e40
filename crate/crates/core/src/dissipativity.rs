//! Conservative, dissipative and admissible games; stable dissipativity of
//! matrices.
//!
//! Dissipativity of a game is tested on a single vertex matrix: `A_v D_v`
//! represents `Q_{AD}` on the tangent space, so the sign of the spectrum of
//! its symmetric part decides the question for every vertex at once.
//!
//! Stable dissipativity of a matrix uses the strong-link criterion: the
//! graph with all strong links removed must be a forest, and some positive
//! diagonal scaling must make the matrix almost skew-symmetric.

use std::collections::VecDeque;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use petgraph::unionfind::UnionFind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::{formal_equilibria, DiagonalScaling, GameType, PolymatrixGame};
use crate::linalg;
use crate::optim::nelder_mead;
use crate::scalar::Scalar;
use crate::tol::Tolerances;
use crate::vertex::{enumerate_vertices, vertex_matrix, zero_threshold, StrategyGraph, VertexLabel};

const MULTISTARTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Conservative,
    Dissipative,
    Indefinite,
    NoFormalEquilibrium,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Conservative => "conservative",
            Kind::Dissipative => "dissipative",
            Kind::Indefinite => "indefinite",
            Kind::NoFormalEquilibrium => "no_formal_equilibrium",
        }
    }

    /// Conservative games are dissipative too.
    pub fn is_dissipative(self) -> bool {
        matches!(self, Kind::Conservative | Kind::Dissipative)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct Classification<T: Scalar> {
    pub kind: Kind,
    pub scaling: Option<DiagonalScaling<T>>,
    /// Tangent vector `w` with `Q_{AD}(w) > 0` for indefinite results.
    pub witness: Option<DVector<T>>,
    /// Largest eigenvalue of `Sym(A_v D_v)`, when computed.
    pub lambda_max: Option<T>,
}

/// Classifies a game for a given scaling `D`.
pub fn check_with_scaling<T: Scalar>(
    game: &PolymatrixGame<T>,
    d: &DiagonalScaling<T>,
    tol: &Tolerances,
) -> Result<Classification<T>> {
    let ty = game.game_type();
    if d.game_type() != ty {
        return Err(Error::TypeMismatch(Box::new(ty.clone()), Box::new(d.game_type().clone())));
    }
    if formal_equilibria(game, tol).is_empty() {
        return Ok(Classification { kind: Kind::NoFormalEquilibrium, scaling: Some(d.clone()), witness: None, lambda_max: None });
    }
    let v = first_vertex(ty);
    let vm = vertex_matrix(game, &v)?;
    let s = linalg::sym(&vm.scaled(d));
    let (values, vectors) = linalg::sym_eigen(&s);
    let Some(&top) = values.last() else {
        return Ok(Classification { kind: Kind::Conservative, scaling: Some(d.clone()), witness: None, lambda_max: None });
    };
    let thr = T::lit(tol.semidef) * linalg::spectral_scale(&s);
    let kind = if values.iter().all(|l| l.abs() <= thr) {
        Kind::Conservative
    } else if top <= thr {
        Kind::Dissipative
    } else {
        Kind::Indefinite
    };
    let witness = (kind == Kind::Indefinite).then(|| vm.tangent(ty.n(), &vectors.column(values.len() - 1).into_owned()));
    Ok(Classification { kind, scaling: Some(d.clone()), witness, lambda_max: Some(top) })
}

fn first_vertex(ty: &GameType) -> VertexLabel {
    VertexLabel::new(ty, (0..ty.p()).map(|g| ty.range(g).start).collect()).expect("first strategies form a vertex")
}

/// Ratios forced by antisymmetry on rows/columns with a zero diagonal.
struct Propagation<T> {
    /// Positive factor per variable, 1 at each component root.
    factor: Vec<T>,
    component: Vec<usize>,
}

/// Solves `m_ab d_b = −m_ba d_a` for every pair touching a zero diagonal,
/// where `d_a = d[var_of[a]]`. `None` when the constraints are infeasible
/// or a diagonal entry is positive.
fn propagate<T: Scalar>(m: &DMatrix<T>, var_of: &[usize], nvars: usize, zero: T, tol: &Tolerances) -> Option<Propagation<T>> {
    let n = m.nrows();
    if (0..n).any(|a| m[(a, a)] > zero) {
        return None;
    }
    let zd: Vec<bool> = (0..n).map(|a| m[(a, a)].abs() <= zero).collect();
    let rtol = T::lit(tol.ratio);
    let mut adj: Vec<Vec<(usize, T)>> = vec![Vec::new(); nvars];
    for a in 0..n {
        for b in a + 1..n {
            if !(zd[a] || zd[b]) {
                continue;
            }
            let (mab, mba) = (m[(a, b)], m[(b, a)]);
            let (za, zb) = (mab.abs() <= zero, mba.abs() <= zero);
            if za && zb {
                continue;
            }
            if za != zb || mab.signum() == mba.signum() {
                return None;
            }
            let (u, w) = (var_of[a], var_of[b]);
            if u == w {
                if (mab + mba).abs() > rtol * mab.abs().max(mba.abs()) {
                    return None;
                }
                continue;
            }
            // d_w / d_u = −m_ba / m_ab
            let ratio = -mba / mab;
            adj[u].push((w, ratio));
            adj[w].push((u, T::one() / ratio));
        }
    }
    let mut factor: Vec<Option<T>> = vec![None; nvars];
    let mut component = vec![usize::MAX; nvars];
    for root in 0..nvars {
        if factor[root].is_some() {
            continue;
        }
        factor[root] = Some(T::one());
        component[root] = root;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            let du = factor[u].expect("visited");
            for &(w, ratio) in &adj[u] {
                let expected = du * ratio;
                match factor[w] {
                    None => {
                        factor[w] = Some(expected);
                        component[w] = root;
                        queue.push_back(w);
                    }
                    Some(dw) => {
                        if (dw - expected).abs() > rtol * dw.max(expected) {
                            return None;
                        }
                    }
                }
            }
        }
    }
    Some(Propagation { factor: factor.into_iter().map(|f| f.expect("all visited")).collect(), component })
}

/// Multistart search over one log-factor per relevant component.
///
/// Returns per-variable factors and the best objective value.
fn component_search<T: Scalar>(
    prop: &Propagation<T>,
    relevant: &[usize],
    seed: u64,
    objective: impl Fn(&[T]) -> f64,
    good: impl Fn(f64) -> bool + Copy,
) -> (Vec<T>, f64) {
    let free = relevant.len().saturating_sub(1);
    let expand = |t: &[f64]| -> Vec<T> {
        prop.factor
            .iter()
            .zip(&prop.component)
            .map(|(f, c)| match relevant.iter().position(|r| r == c) {
                Some(k) if k > 0 => *f * T::lit(t[k - 1].exp()),
                _ => *f,
            })
            .collect()
    };
    let eval = |t: &[f64]| {
        let v = objective(&expand(t));
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let zero = vec![0.0; free];
    let mut best = (zero.clone(), eval(&zero));
    if free == 0 || good(best.1) {
        return (expand(&best.0), best.1);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for start in 0..MULTISTARTS {
        let x0: Vec<f64> = if start == 0 { zero.clone() } else { (0..free).map(|_| rng.random_range(-3.0..3.0)).collect() };
        let (x, fx) = nelder_mead(eval, &x0, 0.5, 300 * (free + 1) * (free + 1), good);
        if fx < best.1 {
            best = (x, fx);
        }
        if good(best.1) {
            break;
        }
    }
    (expand(&best.0), best.1)
}

/// Components containing at least one of the given variables, sorted.
fn components_of<T>(prop: &Propagation<T>, vars: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut out: Vec<usize> = vars.map(|v| prop.component[v]).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// `λ_max / max(1, ‖S‖)` of a symmetric matrix, 0 when empty.
fn relative_lambda_max<T: Scalar>(s: &DMatrix<T>) -> f64 {
    match linalg::lambda_max(s) {
        Some((l, _)) => (l / linalg::spectral_scale(s)).as_f64(),
        None => 0.0,
    }
}

/// Outcome of [`search_scaling`].
#[derive(Debug, Clone)]
pub struct ScalingSearch<T: Scalar> {
    /// A certified scaling, if one was found.
    pub found: Option<DiagonalScaling<T>>,
    /// The best scaling tried.
    pub best: DiagonalScaling<T>,
    /// Relative `λ_max` at `best`.
    pub best_value: f64,
}

/// Searches for `D` of type `n̲` with `Q_{AD} ≤ 0`.
///
/// Entries of `A_v` with a zero diagonal fix ratios between groups; the
/// remaining per-component factors are found by a seeded multistart simplex
/// search. Failure to find `D` does not prove that none exists.
pub fn search_scaling<T: Scalar>(game: &PolymatrixGame<T>, tol: &Tolerances, seed: u64) -> ScalingSearch<T> {
    let ty = game.game_type();
    let identity = DiagonalScaling::identity(ty);
    let fail = |best: DiagonalScaling<T>, value: f64| ScalingSearch { found: None, best, best_value: value };
    let vm = vertex_matrix(game, &first_vertex(ty)).expect("valid vertex");
    if vm.dim() == 0 {
        return ScalingSearch { found: Some(identity.clone()), best: identity, best_value: 0.0 };
    }
    let a_v = &vm.entries;
    let zero = zero_threshold(a_v, tol);
    let var_of: Vec<usize> = vm.index_set.iter().map(|&i| ty.group_of(i)).collect();
    let Some(prop) = propagate(a_v, &var_of, ty.p(), zero, tol) else {
        let value = relative_lambda_max(&linalg::sym(a_v));
        return fail(identity, value);
    };
    let damped = (0..vm.dim()).filter(|&a| a_v[(a, a)] < -zero).map(|a| var_of[a]);
    let relevant = components_of(&prop, damped);
    let objective = |d: &[T]| {
        let mut m = a_v.clone();
        for (k, &g) in var_of.iter().enumerate() {
            m.column_mut(k).scale_mut(d[g]);
        }
        relative_lambda_max(&linalg::sym(&m))
    };
    let (d, value) = component_search(&prop, &relevant, seed, objective, |f| f <= tol.semidef);
    let d0 = d[0];
    let scaling = DiagonalScaling::new(ty, d.iter().map(|x| *x / d0).collect()).unwrap_or(identity);
    match check_with_scaling(game, &scaling, tol) {
        Ok(c) if c.kind.is_dissipative() => ScalingSearch { found: Some(scaling.clone()), best: scaling, best_value: value },
        _ => fail(scaling, value),
    }
}

/// A certifying scaling for dissipativity, if one is found.
pub fn find_scaling<T: Scalar>(game: &PolymatrixGame<T>, tol: &Tolerances) -> Option<DiagonalScaling<T>> {
    search_scaling(game, tol, 0).found
}

/// Searches for a scaling and classifies the game with the best one found.
pub fn classify<T: Scalar>(game: &PolymatrixGame<T>, tol: &Tolerances, seed: u64) -> Classification<T> {
    let search = search_scaling(game, tol, seed);
    check_with_scaling(game, &search.best, tol).expect("scaling has the game's type")
}

/// Splits `M = A D` into a skew-symmetric part and a part with equal-row
/// blocks, given a scaling `D` with `Q_{AD} = 0`.
pub fn skew_decomposition<T: Scalar>(
    game: &PolymatrixGame<T>,
    d: &DiagonalScaling<T>,
    tol: &Tolerances,
) -> Result<(DMatrix<T>, DMatrix<T>)> {
    let c = check_with_scaling(game, d, tol)?;
    if c.kind != Kind::Conservative {
        return Err(Error::Precondition(format!("game is {} under the given scaling, not conservative", c.kind)));
    }
    let ty = game.game_type();
    let (n, p) = (ty.n(), ty.p());
    let m = game.scaled(d)?.payoff().clone();
    let mut indicators = DMatrix::zeros(n, p);
    for g in 0..p {
        let w = T::one() / T::lit(ty.size(g) as f64).sqrt();
        for i in ty.range(g) {
            indicators[(i, g)] = w;
        }
    }
    let h = linalg::nullspace(&indicators.transpose(), tol.rank);
    let mut u = DMatrix::zeros(n, n);
    u.view_mut((0, 0), (n, p)).copy_from(&indicators);
    u.view_mut((0, p), (n, n - p)).copy_from(&h);
    let nm = u.transpose() * &m * &u;
    let mut n0 = DMatrix::zeros(n, n);
    let n_hp = nm.view((p, 0), (n - p, p)).into_owned();
    let n_hh = nm.view((p, p), (n - p, n - p)).into_owned();
    n0.view_mut((p, 0), (n - p, p)).copy_from(&n_hp);
    n0.view_mut((0, p), (p, n - p)).copy_from(&(-n_hp.transpose()));
    n0.view_mut((p, p), (n - p, n - p)).copy_from(&((&n_hh - n_hh.transpose()) * T::lit(0.5)));
    let a0 = &u * n0 * u.transpose();
    let a0 = (&a0 - a0.transpose()) * T::lit(0.5);
    let rest = m - &a0;
    Ok((a0, rest))
}

fn antisymmetry_threshold<T: Scalar>(m: &DMatrix<T>, tol: &Tolerances) -> T {
    if m.iter().all(|v| v.is_integral()) {
        T::zero()
    } else {
        T::lit(tol.ratio) * T::one().max(m.amax())
    }
}

/// Zero-diagonal antisymmetry and negative definiteness on the remaining
/// coordinates. Returns false for matrices that are not dissipative.
pub fn almost_skew_symmetric<T: Scalar>(m: &DMatrix<T>, tol: &Tolerances) -> bool {
    almost_skew_failure(m, tol).is_none()
}

fn almost_skew_failure<T: Scalar>(m: &DMatrix<T>, tol: &Tolerances) -> Option<String> {
    let n = m.nrows();
    let s = linalg::sym(m);
    if relative_lambda_max(&s) > tol.semidef {
        return Some("symmetric part is not negative semidefinite".into());
    }
    let zero = zero_threshold(m, tol);
    let anti = antisymmetry_threshold(m, tol);
    let zd: Vec<bool> = (0..n).map(|a| m[(a, a)].abs() <= zero).collect();
    for a in 0..n {
        for b in 0..n {
            if a != b && (zd[a] || zd[b]) && (m[(a, b)] + m[(b, a)]).abs() > anti {
                return Some(format!("entries ({},{}) and ({},{}) are not opposite", a + 1, b + 1, b + 1, a + 1));
            }
        }
    }
    let e: Vec<usize> = (0..n).filter(|&a| !zd[a]).collect();
    let se = s.select_rows(&e).select_columns(&e);
    if let Some((l, _)) = linalg::lambda_max(&se) {
        if l >= -T::lit(tol.semidef) * linalg::spectral_scale(&s) {
            return Some("symmetric part is not negative definite on the damped coordinates".into());
        }
    }
    None
}

/// Positive diagonal `d` such that `M diag(d)` is almost skew-symmetric.
pub fn find_almost_skew_scaling<T: Scalar>(m: &DMatrix<T>, tol: &Tolerances) -> Option<DVector<T>> {
    let n = m.nrows();
    let zero = zero_threshold(m, tol);
    let var_of: Vec<usize> = (0..n).collect();
    let prop = propagate(m, &var_of, n, zero, tol)?;
    let damped: Vec<usize> = (0..n).filter(|&a| m[(a, a)] < -zero).collect();
    let relevant = components_of(&prop, damped.iter().copied());
    let scaled = |d: &[T]| {
        let mut md = m.clone();
        for (k, dk) in d.iter().enumerate() {
            md.column_mut(k).scale_mut(*dk);
        }
        md
    };
    let objective = |d: &[T]| {
        let s = linalg::sym(&scaled(d));
        let se = s.select_rows(&damped).select_columns(&damped);
        match linalg::lambda_max(&se) {
            Some((l, _)) => (l / linalg::spectral_scale(&s)).as_f64(),
            None => -1.0,
        }
    };
    let (d, _) = component_search(&prop, &relevant, 0, objective, |f| f < -tol.semidef);
    almost_skew_symmetric(&scaled(&d), tol).then(|| DVector::from_vec(d))
}

#[derive(Debug, Clone)]
pub struct StableDissipativityReport<T: Scalar> {
    pub stable: bool,
    /// Per-index scaling making the matrix almost skew-symmetric.
    pub scaling: Option<DVector<T>>,
    /// Every cycle of the graph contains a strong link.
    pub cycle_ok: bool,
    pub skew_ok: bool,
    pub failures: Vec<String>,
}

/// Stable dissipativity test; nodes are named `1..=n` in failure messages.
pub fn stably_dissipative<T: Scalar>(m: &DMatrix<T>, tol: &Tolerances) -> StableDissipativityReport<T> {
    let labels: Vec<usize> = (0..m.nrows()).collect();
    stably_dissipative_labeled(m, &labels, tol)
}

/// As [`stably_dissipative`], naming node `k` as strategy `labels[k] + 1`.
pub fn stably_dissipative_labeled<T: Scalar>(
    m: &DMatrix<T>,
    labels: &[usize],
    tol: &Tolerances,
) -> StableDissipativityReport<T> {
    let n = m.nrows();
    let graph = StrategyGraph::from_matrix(m, labels.to_vec(), zero_threshold(m, tol));
    let mut failures = Vec::new();
    let mut forest = UnionFind::<usize>::new(n);
    let mut cycle_ok = true;
    for &(a, b) in &graph.edges {
        if graph.is_strong(a, b) {
            continue;
        }
        if !forest.union(a, b) {
            cycle_ok = false;
            failures.push(format!(
                "edge {{{},{}}} closes a cycle without a strong link",
                labels[a] + 1,
                labels[b] + 1
            ));
        }
    }
    let scaling = find_almost_skew_scaling(m, tol);
    let skew_ok = scaling.is_some();
    if !skew_ok {
        failures.push(match almost_skew_failure(m, tol) {
            Some(reason) => format!("no almost skew-symmetric scaling ({reason} without scaling)"),
            None => "no almost skew-symmetric scaling".into(),
        });
    }
    StableDissipativityReport { stable: cycle_ok && skew_ok, scaling, cycle_ok, skew_ok, failures }
}

#[derive(Debug, Clone)]
pub struct Admissibility<T: Scalar> {
    pub admissible: bool,
    pub classification: Classification<T>,
    /// Vertices whose matrix is stably dissipative.
    pub v_star: Vec<VertexLabel>,
    pub reports: Vec<(VertexLabel, StableDissipativityReport<T>)>,
}

fn admissibility_from<T: Scalar>(
    game: &PolymatrixGame<T>,
    classification: Classification<T>,
    tol: &Tolerances,
) -> Admissibility<T> {
    let mut v_star = Vec::new();
    let mut reports = Vec::new();
    for v in enumerate_vertices(game.game_type()) {
        let vm = vertex_matrix(game, &v).expect("enumerated vertex");
        let report = stably_dissipative_labeled(&vm.entries, &vm.index_set, tol);
        if report.stable {
            v_star.push(v.clone());
        }
        reports.push((v, report));
    }
    let admissible = classification.kind.is_dissipative() && !v_star.is_empty();
    Admissibility { admissible, classification, v_star, reports }
}

/// Dissipativity (with a searched scaling) plus the set `V*`.
pub fn admissible<T: Scalar>(game: &PolymatrixGame<T>, tol: &Tolerances) -> Admissibility<T> {
    admissible_seeded(game, tol, 0)
}

pub fn admissible_seeded<T: Scalar>(game: &PolymatrixGame<T>, tol: &Tolerances, seed: u64) -> Admissibility<T> {
    admissibility_from(game, classify(game, tol, seed), tol)
}

/// As [`admissible`] with a caller-supplied scaling.
pub fn admissible_with_scaling<T: Scalar>(
    game: &PolymatrixGame<T>,
    d: &DiagonalScaling<T>,
    tol: &Tolerances,
) -> Result<Admissibility<T>> {
    Ok(admissibility_from(game, check_with_scaling(game, d, tol)?, tol))
}

/// Checks `Ker M = D Ker Mᵀ` for a dissipative pair `(M, D)`.
pub fn kernel_duality<T: Scalar>(m: &DMatrix<T>, d: &DVector<T>, tol: &Tolerances) -> Result<bool> {
    if d.len() != m.ncols() || d.iter().any(|x| *x <= T::zero()) {
        return Err(Error::InvalidScaling("diagonal must be positive and match the matrix".into()));
    }
    let md = m * DMatrix::from_diagonal(d);
    if relative_lambda_max(&linalg::sym(&md)) > tol.semidef {
        return Err(Error::Precondition("M D is not dissipative".into()));
    }
    let k = linalg::nullspace(m, tol.rank);
    let kt = DMatrix::from_diagonal(d) * linalg::nullspace(&m.transpose(), tol.rank);
    Ok(linalg::subspace_gap(&k, &kt, tol.rank) <= T::lit(1e-8))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{rock_paper_scissors, worked_example};
    use crate::game::has_equal_row_blocks;

    fn mat(n: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(n, n, v)
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn worked_example_is_dissipative() {
        let g = worked_example();
        let c = check_with_scaling(&g, &DiagonalScaling::identity(g.game_type()), &tol()).unwrap();
        assert_eq!(c.kind, Kind::Dissipative);
        let d = find_scaling(&g, &tol()).unwrap();
        assert_eq!(d.per_group(), &[1.0, 1.0]);
    }

    #[test]
    fn zero_game_is_conservative() {
        let ty = GameType::new(vec![2, 3]).unwrap();
        let g = PolymatrixGame::<f64>::zero(ty.clone());
        let c = check_with_scaling(&g, &DiagonalScaling::identity(&ty), &tol()).unwrap();
        assert_eq!(c.kind, Kind::Conservative);
        assert_eq!(find_scaling(&g, &tol()).unwrap(), DiagonalScaling::identity(&ty));
    }

    #[test]
    fn identity_game_is_indefinite() {
        let g = PolymatrixGame::<f64>::from_rows(&[2], &[&[1.0, 0.0], &[0.0, 1.0]]).unwrap();
        let c = check_with_scaling(&g, &DiagonalScaling::identity(g.game_type()), &tol()).unwrap();
        assert_eq!(c.kind, Kind::Indefinite);
        let w = c.witness.unwrap();
        assert!(crate::vertex::quadratic_form(&g, &w, &tol()).unwrap() > 0.0);
        assert!(find_scaling(&g, &tol()).is_none());
    }

    #[test]
    fn no_formal_equilibrium() {
        let g = PolymatrixGame::<f64>::from_rows(&[2], &[&[0.0, 1.0], &[-1.0, 0.0]]).unwrap();
        let c = check_with_scaling(&g, &DiagonalScaling::identity(g.game_type()), &tol()).unwrap();
        assert_eq!(c.kind, Kind::NoFormalEquilibrium);
    }

    #[test]
    fn scaling_type_mismatch() {
        let g = worked_example();
        let other = DiagonalScaling::<f64>::identity(&GameType::new(vec![5]).unwrap());
        assert!(check_with_scaling(&g, &other, &tol()).is_err());
    }

    #[test]
    fn recovers_inverse_of_construction_scaling() {
        // A = A0 diag(1,1,3,3), A0 skew; A diag(1, 1/3) is skew again.
        let a0 = mat(4, &[0.0, 1.0, 2.0, -1.0, -1.0, 0.0, 1.0, 3.0, -2.0, -1.0, 0.0, 1.0, 1.0, -3.0, -1.0, 0.0]);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 3.0, 3.0]));
        let g = PolymatrixGame::new(GameType::new(vec![2, 2]).unwrap(), a0 * d).unwrap();
        let found = find_scaling(&g, &tol()).unwrap();
        let r = found.per_group()[1] / found.per_group()[0];
        assert!((r - 1.0 / 3.0).abs() < 1e-9, "{r}");
        assert_eq!(check_with_scaling(&g, &found, &tol()).unwrap().kind, Kind::Conservative);
    }

    #[test]
    fn skew_decomposition_cases() {
        let t = tol();
        let ty = GameType::new(vec![2, 2]).unwrap();
        let z = PolymatrixGame::<f64>::zero(ty.clone());
        let (a0, c) = skew_decomposition(&z, &DiagonalScaling::identity(&ty), &t).unwrap();
        assert!(a0.amax() < 1e-15 && c.amax() < 1e-15);
        let rps = rock_paper_scissors();
        let (a0, c) = skew_decomposition(&rps, &DiagonalScaling::identity(rps.game_type()), &t).unwrap();
        assert!((a0 - rps.payoff()).amax() < 1e-12);
        assert!(c.amax() < 1e-12);
        let g = worked_example();
        assert!(skew_decomposition(&g, &DiagonalScaling::identity(g.game_type()), &t).is_err());
    }

    #[test]
    fn skew_decomposition_structure() {
        // Skew core plus equal-row noise, then scaled.
        let ty = GameType::new(vec![2, 2]).unwrap();
        let a0 = mat(4, &[0.0, 1.0, 2.0, -1.0, -1.0, 0.0, 1.0, 3.0, -2.0, -1.0, 0.0, 1.0, 1.0, -3.0, -1.0, 0.0]);
        let noise = mat(4, &[1.0, 2.0, 3.0, 4.0, 1.0, 2.0, 3.0, 4.0, -1.0, 0.5, 2.0, 0.0, -1.0, 0.5, 2.0, 0.0]);
        let dinv = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 0.5, 0.5]));
        let g = PolymatrixGame::new(ty.clone(), (a0 + noise) * dinv).unwrap();
        let d = find_scaling(&g, &tol()).unwrap();
        let (s, c) = skew_decomposition(&g, &d, &tol()).unwrap();
        assert!((&s + s.transpose()).amax() < 1e-12);
        assert!(has_equal_row_blocks(&ty, &c, 1e-12));
        assert!((s + c - g.scaled(&d).unwrap().payoff()).amax() < 1e-12);
    }

    #[test]
    fn almost_skew_examples() {
        let t = tol();
        let v1 = mat(3, &[0.0, 27.0, 0.0, -27.0, -9.0, 18.0, 0.0, -18.0, 0.0]);
        assert!(almost_skew_symmetric(&v1, &t));
        assert!(almost_skew_symmetric(&DMatrix::<f64>::zeros(3, 3), &t));
        assert!(!almost_skew_symmetric(&mat(2, &[-1.0, 2.0, 1.0, 0.0]), &t));
        assert_eq!(find_almost_skew_scaling(&v1, &t).unwrap().as_slice(), &[1.0, 1.0, 1.0]);
        let d = find_almost_skew_scaling(&mat(2, &[0.0, 1.0, -2.0, 0.0]), &t).unwrap();
        assert_eq!(d.as_slice(), &[1.0, 2.0]);
        assert!(find_almost_skew_scaling(&mat(2, &[0.0, 1.0, 2.0, 0.0]), &t).is_none());
        assert!(find_almost_skew_scaling(&mat(2, &[0.0, 1.0, 0.0, 0.0]), &t).is_none());
    }

    #[test]
    fn almost_skew_needs_component_factor() {
        // Two damped indices in separate constraint components: the identity
        // leaves Sym(M) singular, scaling the second component by 3 works.
        let m = mat(2, &[-1.0, 1.0, -3.0, -1.0]);
        let t = tol();
        assert!(!almost_skew_symmetric(&m, &t));
        let d = find_almost_skew_scaling(&m, &t).unwrap();
        let md = &m * DMatrix::from_diagonal(&d);
        assert!(almost_skew_symmetric(&md, &t));
    }

    #[test]
    fn stable_dissipativity_examples() {
        let t = tol();
        let v1 = mat(3, &[0.0, 27.0, 0.0, -27.0, -9.0, 18.0, 0.0, -18.0, 0.0]);
        assert!(stably_dissipative(&v1, &t).stable);
        let v5 = mat(3, &[-9.0, 18.0, -18.0, -36.0, -9.0, -18.0, 18.0, 18.0, 0.0]);
        let r = stably_dissipative(&v5, &t);
        assert!(!r.stable);
        assert!(r.cycle_ok && !r.skew_ok);
        let z = stably_dissipative(&DMatrix::<f64>::zeros(3, 3), &t);
        assert!(z.stable && z.cycle_ok && z.skew_ok);
        let cyc = mat(3, &[0.0, 1.0, -1.0, -1.0, 0.0, 1.0, 1.0, -1.0, 0.0]);
        let r = stably_dissipative(&cyc, &t);
        assert!(!r.cycle_ok && r.skew_ok && !r.stable);
    }

    #[test]
    fn admissibility_of_worked_example() {
        let g = worked_example();
        let a = admissible(&g, &tol());
        assert!(a.admissible);
        let names: Vec<String> = a.v_star.iter().map(|v| v.to_string()).collect();
        assert_eq!(names, ["(1,4)", "(1,5)", "(2,4)", "(2,5)"]);
    }

    #[test]
    fn zero_game_admissible_everywhere() {
        let ty = GameType::new(vec![2, 2]).unwrap();
        let a = admissible(&PolymatrixGame::<f64>::zero(ty), &tol());
        assert!(a.admissible);
        assert_eq!(a.v_star.len(), 4);
    }

    #[test]
    fn kernel_duality_examples() {
        let t = tol();
        let v1 = mat(3, &[0.0, 27.0, 0.0, -27.0, -9.0, 18.0, 0.0, -18.0, 0.0]);
        assert!(kernel_duality(&v1, &DVector::from_element(3, 1.0), &t).unwrap());
        let k = mat(3, &[0.0, 1.0, -2.0, -1.0, 0.0, 3.0, 2.0, -3.0, 0.0]);
        assert!(kernel_duality(&k, &DVector::from_element(3, 1.0), &t).unwrap());
        // M = K D^{-1}
        let d = DVector::from_vec(vec![1.0, 2.0, 5.0]);
        let m = &k * DMatrix::from_diagonal(&d.map(|x| 1.0 / x));
        assert!(kernel_duality(&m, &d, &t).unwrap());
        assert!(kernel_duality(&mat(2, &[1.0, 0.0, 0.0, 1.0]), &DVector::from_element(2, 1.0), &t).is_err());
    }
}
