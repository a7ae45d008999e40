//! Polymatrix games, the replicator vector field and formal equilibria.
//!
//! Strategies are numbered `0..n` internally and grouped in contiguous
//! blocks. Human-facing output (reports, vertex labels) uses 1-based
//! numbering.

use std::fmt;
use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;
use crate::tol::Tolerances;

/// Group sizes `(n_1, …, n_p)` of a polymatrix game.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GameType {
    groups: Vec<usize>,
    starts: Vec<usize>,
    group_of: Vec<usize>,
}

impl GameType {
    pub fn new(groups: Vec<usize>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::InvalidType("at least one group is required".into()));
        }
        if let Some(g) = groups.iter().position(|&s| s == 0) {
            return Err(Error::InvalidType(format!("group {} is empty", g + 1)));
        }
        let mut starts = Vec::with_capacity(groups.len());
        let mut group_of = Vec::new();
        let mut offset = 0;
        for (g, &size) in groups.iter().enumerate() {
            starts.push(offset);
            group_of.extend(std::iter::repeat_n(g, size));
            offset += size;
        }
        Ok(GameType { groups, starts, group_of })
    }

    pub fn groups(&self) -> &[usize] {
        &self.groups
    }

    /// Total number of strategies.
    pub fn n(&self) -> usize {
        self.group_of.len()
    }

    /// Number of groups.
    pub fn p(&self) -> usize {
        self.groups.len()
    }

    /// Group index of strategy `i`.
    pub fn group_of(&self, i: usize) -> usize {
        self.group_of[i]
    }

    /// Strategy indices of group `g`.
    pub fn range(&self, g: usize) -> Range<usize> {
        self.starts[g]..self.starts[g] + self.groups[g]
    }

    pub fn size(&self, g: usize) -> usize {
        self.groups[g]
    }

    pub fn same_group(&self, i: usize, j: usize) -> bool {
        self.group_of[i] == self.group_of[j]
    }

    pub(crate) fn check_strategy(&self, i: usize) -> Result<()> {
        if i < self.n() {
            Ok(())
        } else {
            Err(Error::StrategyOutOfRange(i))
        }
    }

    /// Type obtained after deleting strategy `i`; `None` if its group would vanish.
    pub fn without_strategy(&self, i: usize) -> Option<GameType> {
        let g = self.group_of(i);
        let mut groups = self.groups.clone();
        groups[g] -= 1;
        if groups[g] == 0 {
            return None;
        }
        GameType::new(groups).ok()
    }

    /// Type obtained after deleting group `g`; `None` if no group would remain.
    pub fn without_group(&self, g: usize) -> Option<GameType> {
        let mut groups = self.groups.clone();
        groups.remove(g);
        GameType::new(groups).ok()
    }

    /// Sum of the coordinates of `w` over each group.
    pub fn group_sums<T: Scalar>(&self, w: &DVector<T>) -> Vec<T> {
        (0..self.p())
            .map(|g| self.range(g).fold(T::zero(), |acc, i| acc + w[i]))
            .collect()
    }

    /// Checks that `w` lies in the tangent space (zero group sums).
    pub fn check_tangent<T: Scalar>(&self, w: &DVector<T>, tol: f64) -> Result<()> {
        if w.len() != self.n() {
            return Err(Error::Precondition(format!(
                "vector has length {}, expected {}",
                w.len(),
                self.n()
            )));
        }
        for (g, s) in self.group_sums(w).into_iter().enumerate() {
            if s.abs() > T::lit(tol) {
                return Err(Error::NotTangent { group: g + 1, sum: s.as_f64() });
            }
        }
        Ok(())
    }
}

impl fmt::Display for GameType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.groups.iter().map(|g| g.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// A structural problem with a candidate game.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    EmptyType,
    EmptyGroup { group: usize },
    NotSquare { rows: usize, cols: usize },
    Dimension { expected: usize, actual: usize },
    NonFinite { row: usize, col: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyType => write!(f, "game type has no groups"),
            Violation::EmptyGroup { group } => write!(f, "group {group} has no strategies"),
            Violation::NotSquare { rows, cols } => write!(f, "payoff matrix is {rows}x{cols}, not square"),
            Violation::Dimension { expected, actual } => {
                write!(f, "payoff matrix has dimension {actual}, type requires {expected}")
            }
            Violation::NonFinite { row, col } => write!(f, "entry ({row},{col}) is not finite"),
        }
    }
}

/// Lists everything wrong with a (type, payoff) pair. Empty means valid.
pub fn validate_game<T: Scalar>(groups: &[usize], payoff: &DMatrix<T>) -> Vec<Violation> {
    let mut out = Vec::new();
    if groups.is_empty() {
        out.push(Violation::EmptyType);
    }
    for (g, &size) in groups.iter().enumerate() {
        if size == 0 {
            out.push(Violation::EmptyGroup { group: g + 1 });
        }
    }
    let (rows, cols) = payoff.shape();
    if rows != cols {
        out.push(Violation::NotSquare { rows, cols });
    }
    let n: usize = groups.iter().sum();
    if rows != n || cols != n {
        out.push(Violation::Dimension { expected: n, actual: rows.max(cols) });
    }
    for r in 0..rows {
        for c in 0..cols {
            if !payoff[(r, c)].is_finite() {
                out.push(Violation::NonFinite { row: r + 1, col: c + 1 });
            }
        }
    }
    out
}

/// A polymatrix game `(n̲, A)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolymatrixGame<T: Scalar> {
    ty: GameType,
    payoff: DMatrix<T>,
}

impl<T: Scalar> PolymatrixGame<T> {
    pub fn new(ty: GameType, payoff: DMatrix<T>) -> Result<Self> {
        let violations = validate_game(ty.groups(), &payoff);
        if !violations.is_empty() {
            return Err(Error::InvalidGame(violations));
        }
        Ok(PolymatrixGame { ty, payoff })
    }

    /// Builds a game from group sizes and row-major `f64` entries.
    pub fn from_rows(groups: &[usize], rows: &[&[f64]]) -> Result<Self> {
        let ty = GameType::new(groups.to_vec())?;
        let n = rows.len();
        let mut payoff = DMatrix::zeros(n, rows.first().map_or(0, |r| r.len()));
        for (i, row) in rows.iter().enumerate() {
            if row.len() != payoff.ncols() {
                return Err(Error::InvalidGame(vec![Violation::NotSquare { rows: n, cols: row.len() }]));
            }
            for (j, v) in row.iter().enumerate() {
                payoff[(i, j)] = T::lit(*v);
            }
        }
        Self::new(ty, payoff)
    }

    pub fn zero(ty: GameType) -> Self {
        let n = ty.n();
        PolymatrixGame { ty, payoff: DMatrix::zeros(n, n) }
    }

    pub fn game_type(&self) -> &GameType {
        &self.ty
    }

    pub fn payoff(&self) -> &DMatrix<T> {
        &self.payoff
    }

    pub fn n(&self) -> usize {
        self.ty.n()
    }

    pub fn entry(&self, i: usize, j: usize) -> T {
        self.payoff[(i, j)]
    }

    /// Block `A^{α,β}` as an owned matrix.
    pub fn block(&self, alpha: usize, beta: usize) -> DMatrix<T> {
        let r = self.ty.range(alpha);
        let c = self.ty.range(beta);
        self.payoff.view((r.start, c.start), (r.len(), c.len())).into_owned()
    }

    /// True when every payoff entry is an integer.
    pub fn is_integral(&self) -> bool {
        self.payoff.iter().all(|v| v.is_integral())
    }

    /// The game with payoff `A·D`.
    pub fn scaled(&self, d: &DiagonalScaling<T>) -> Result<Self> {
        if d.game_type() != &self.ty {
            return Err(Error::TypeMismatch(Box::new(self.ty.clone()), Box::new(d.game_type().clone())));
        }
        let mut payoff = self.payoff.clone();
        let dv = d.expand();
        for j in 0..self.n() {
            payoff.column_mut(j).scale_mut(dv[j]);
        }
        Ok(PolymatrixGame { ty: self.ty.clone(), payoff })
    }

    /// Replicator velocity at an arbitrary point of `ℝⁿ`.
    pub fn velocity(&self, x: &DVector<T>) -> DVector<T> {
        let ax = &self.payoff * x;
        let mut out = DVector::zeros(self.n());
        for g in 0..self.ty.p() {
            let range = self.ty.range(g);
            let avg = range.clone().fold(T::zero(), |acc, j| acc + x[j] * ax[j]);
            for i in range {
                out[i] = x[i] * (ax[i] - avg);
            }
        }
        out
    }
}

/// A point of the prism: nonnegative with unit group sums.
#[derive(Debug, Clone, PartialEq)]
pub struct PrismState<T: Scalar>(DVector<T>);

impl<T: Scalar> PrismState<T> {
    pub fn new(ty: &GameType, x: DVector<T>, tol: f64) -> Result<Self> {
        if x.len() != ty.n() {
            return Err(Error::InvalidState(format!("length {} but the game has {} strategies", x.len(), ty.n())));
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite() || *v < T::zero()) {
            return Err(Error::InvalidState(format!("coordinate {} is negative or not finite", i + 1)));
        }
        for (g, s) in ty.group_sums(&x).into_iter().enumerate() {
            if (s - T::one()).abs() > T::lit(tol) {
                return Err(Error::InvalidState(format!("group {} sums to {}", g + 1, s.as_f64())));
            }
        }
        Ok(PrismState(x))
    }

    pub fn from_slice(ty: &GameType, x: &[f64]) -> Result<Self> {
        Self::new(ty, DVector::from_iterator(x.len(), x.iter().map(|v| T::lit(*v))), Tolerances::default().prism)
    }

    /// The centre of the prism.
    pub fn barycenter(ty: &GameType) -> Self {
        let mut x = DVector::zeros(ty.n());
        for g in 0..ty.p() {
            let share = T::one() / T::lit(ty.size(g) as f64);
            for i in ty.range(g) {
                x[i] = share;
            }
        }
        PrismState(x)
    }

    pub fn as_vector(&self) -> &DVector<T> {
        &self.0
    }

    pub fn into_vector(self) -> DVector<T> {
        self.0
    }

    pub fn is_interior(&self) -> bool {
        self.0.iter().all(|v| *v > T::zero())
    }
}

/// Positive diagonal matrix of type `n̲` (one factor per group).
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalScaling<T: Scalar> {
    ty: GameType,
    per_group: Vec<T>,
}

impl<T: Scalar> DiagonalScaling<T> {
    pub fn new(ty: &GameType, per_group: Vec<T>) -> Result<Self> {
        if per_group.len() != ty.p() {
            return Err(Error::InvalidScaling(format!("{} factors for {} groups", per_group.len(), ty.p())));
        }
        if let Some(g) = per_group.iter().position(|d| !(d.is_finite() && *d > T::zero())) {
            return Err(Error::InvalidScaling(format!("factor of group {} is not positive", g + 1)));
        }
        Ok(DiagonalScaling { ty: ty.clone(), per_group })
    }

    pub fn identity(ty: &GameType) -> Self {
        DiagonalScaling { ty: ty.clone(), per_group: vec![T::one(); ty.p()] }
    }

    pub fn game_type(&self) -> &GameType {
        &self.ty
    }

    pub fn per_group(&self) -> &[T] {
        &self.per_group
    }

    /// Per-strategy diagonal `(d_1, …, d_n)`.
    pub fn expand(&self) -> DVector<T> {
        DVector::from_iterator(self.ty.n(), (0..self.ty.n()).map(|i| self.per_group[self.ty.group_of(i)]))
    }

    pub fn matrix(&self) -> DMatrix<T> {
        DMatrix::from_diagonal(&self.expand())
    }

    pub fn inverse(&self) -> Self {
        DiagonalScaling { ty: self.ty.clone(), per_group: self.per_group.iter().map(|d| T::one() / *d).collect() }
    }
}

/// Affine set of formal equilibria `q + span(basis)`.
#[derive(Debug, Clone)]
pub struct EquilibriumSet<T: Scalar> {
    /// Minimum-norm solution; `None` when the linear system is inconsistent.
    pub particular: Option<DVector<T>>,
    /// Orthonormal basis of the direction space, as columns.
    pub basis: DMatrix<T>,
    /// A strictly positive member, when one was found.
    pub interior_point: Option<DVector<T>>,
}

impl<T: Scalar> EquilibriumSet<T> {
    pub fn is_empty(&self) -> bool {
        self.particular.is_none()
    }

    pub fn interior_flag(&self) -> bool {
        self.interior_point.is_some()
    }

    pub fn dimension(&self) -> usize {
        self.basis.ncols()
    }

    /// Distance-based membership test.
    pub fn contains(&self, x: &DVector<T>, tol: T) -> bool {
        let Some(q) = &self.particular else { return false };
        let d = x - q;
        let proj = &self.basis * (self.basis.transpose() * &d);
        (d - proj).norm() <= tol
    }
}

/// Blockwise equal-rows test with an absolute tolerance.
pub fn has_equal_row_blocks<T: Scalar>(ty: &GameType, c: &DMatrix<T>, tol: T) -> bool {
    (0..ty.p()).all(|g| {
        let r = ty.range(g);
        let first = r.start;
        r.skip(1)
            .all(|i| (0..c.ncols()).all(|k| (c[(i, k)] - c[(first, k)]).abs() <= tol))
    })
}

/// Equivalence of two games of the same type.
///
/// Integer-valued inputs are compared exactly.
pub fn games_equivalent<T: Scalar>(a: &PolymatrixGame<T>, b: &PolymatrixGame<T>, tol: &Tolerances) -> Result<bool> {
    if a.game_type() != b.game_type() {
        return Err(Error::TypeMismatch(Box::new(a.game_type().clone()), Box::new(b.game_type().clone())));
    }
    let eps = if a.is_integral() && b.is_integral() { T::zero() } else { T::lit(tol.equal) };
    let diff = a.payoff() - b.payoff();
    Ok(has_equal_row_blocks(a.game_type(), &diff, eps))
}

/// Equivalent representative whose row `ell` is identically zero.
pub fn zero_row_representative<T: Scalar>(game: &PolymatrixGame<T>, ell: usize) -> Result<PolymatrixGame<T>> {
    let ty = game.game_type();
    ty.check_strategy(ell)?;
    let g = ty.group_of(ell);
    let row = game.payoff().row(ell).into_owned();
    let mut payoff = game.payoff().clone();
    for i in ty.range(g) {
        let updated = payoff.row(i) - &row;
        payoff.set_row(i, &updated);
    }
    Ok(PolymatrixGame { ty: ty.clone(), payoff })
}

/// Replicator vector field at a prism state.
pub fn vector_field<T: Scalar>(game: &PolymatrixGame<T>, x: &PrismState<T>) -> DVector<T> {
    game.velocity(x.as_vector())
}

/// Linear system whose solutions are the formal equilibria.
fn equilibrium_system<T: Scalar>(game: &PolymatrixGame<T>) -> (DMatrix<T>, DVector<T>) {
    let ty = game.game_type();
    let n = ty.n();
    let a = game.payoff();
    let mut m = DMatrix::zeros(n, n);
    let mut b = DVector::zeros(n);
    let mut row = 0;
    for g in 0..ty.p() {
        let r = ty.range(g);
        let first = r.start;
        for i in r.clone().skip(1) {
            let diff = a.row(i) - a.row(first);
            m.set_row(row, &diff);
            row += 1;
        }
        for j in r {
            m[(row, j)] = T::one();
        }
        b[row] = T::one();
        row += 1;
    }
    (m, b)
}

/// Solves for the affine set of formal equilibria.
///
/// The interior point is not searched for here; see [`interior_equilibria`].
pub fn formal_equilibria<T: Scalar>(game: &PolymatrixGame<T>, tol: &Tolerances) -> EquilibriumSet<T> {
    let (m, b) = equilibrium_system(game);
    let (x, residual) = linalg::solve_min_norm(&m, &b, tol.rank);
    let scale = T::one().max(m.norm()) * T::one().max(b.norm());
    let consistent = residual <= T::lit(tol.prism) * scale;
    let basis = linalg::nullspace(&m, tol.rank);
    EquilibriumSet {
        particular: consistent.then_some(x),
        basis,
        interior_point: None,
    }
}

/// Formal equilibria together with a strictly positive member, if any.
///
/// The minimum-norm solution is tried first; otherwise the smallest
/// coordinate is maximised over the direction space.
pub fn interior_equilibria<T: Scalar>(game: &PolymatrixGame<T>, tol: &Tolerances) -> EquilibriumSet<T> {
    let mut set = formal_equilibria(game, tol);
    let Some(q) = set.particular.clone() else { return set };
    let margin = T::lit(tol.interior_margin);
    if q.min() > margin {
        set.interior_point = Some(q);
        return set;
    }
    let best = maximize_min_coordinate(&q, &set.basis);
    if best.min() > margin {
        set.interior_point = Some(best);
    }
    set
}

fn soft_min<T: Scalar>(x: &DVector<T>, tau: T) -> (T, DVector<T>) {
    let m = x.min();
    let w = x.map(|v| (-(v - m) / tau).exp());
    let total = w.sum();
    (m - tau * total.ln(), w / total)
}

/// Maximises `min_i (q + B c)_i` over `c` by smoothed ascent with a
/// decreasing temperature. Returns the best point found.
fn maximize_min_coordinate<T: Scalar>(q: &DVector<T>, basis: &DMatrix<T>) -> DVector<T> {
    if basis.ncols() == 0 {
        return q.clone();
    }
    let mut c = DVector::zeros(basis.ncols());
    let mut best = q.clone();
    for k in 1..=7 {
        let tau = T::lit(10f64.powi(-k));
        for _ in 0..400 {
            let x = q + basis * &c;
            let (f, w) = soft_min(&x, tau);
            let g = basis.transpose() * w;
            let gn = g.norm_squared();
            if gn <= T::lit(1e-30) {
                break;
            }
            let mut step = T::one();
            let mut moved = false;
            for _ in 0..60 {
                let trial = &c + &g * step;
                let (ft, _) = soft_min(&(q + basis * &trial), tau);
                if ft >= f + T::lit(1e-4) * step * gn {
                    c = trial;
                    moved = true;
                    break;
                }
                step *= T::lit(0.5);
            }
            let x = q + basis * &c;
            if x.min() > best.min() {
                best = x;
            }
            if !moved {
                break;
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> PolymatrixGame<f64> {
        crate::fixtures::worked_example()
    }

    #[test]
    fn type_layout() {
        let ty = GameType::new(vec![3, 2]).unwrap();
        assert_eq!(ty.n(), 5);
        assert_eq!(ty.p(), 2);
        assert_eq!(ty.range(1), 3..5);
        assert_eq!(ty.group_of(2), 0);
        assert_eq!(ty.group_of(3), 1);
        assert_eq!(ty.to_string(), "(3,2)");
        assert!(GameType::new(vec![]).is_err());
        assert!(GameType::new(vec![2, 0]).is_err());
        assert_eq!(ty.without_strategy(4).unwrap().groups(), &[3, 1]);
        assert!(GameType::new(vec![1]).unwrap().without_strategy(0).is_none());
    }

    #[test]
    fn validation() {
        assert!(validate_game(&[3, 2], example().payoff()).is_empty());
        let bad: DMatrix<f64> = DMatrix::zeros(3, 3);
        let v = validate_game(&[2], &bad);
        assert!(matches!(v[0], Violation::Dimension { expected: 2, actual: 3 }));
        let one: DMatrix<f64> = DMatrix::zeros(1, 1);
        assert!(validate_game(&[1], &one).is_empty());
        let mut nan: DMatrix<f64> = DMatrix::zeros(1, 1);
        nan[(0, 0)] = f64::NAN;
        assert_eq!(validate_game(&[1], &nan), vec![Violation::NonFinite { row: 1, col: 1 }]);
        assert!(PolymatrixGame::<f64>::new(GameType::new(vec![2]).unwrap(), bad).is_err());
    }

    #[test]
    fn equivalence_basics() {
        let tol = Tolerances::default();
        let g = example();
        assert!(games_equivalent(&g, &g, &tol).unwrap());
        let other = PolymatrixGame::<f64>::zero(GameType::new(vec![5]).unwrap());
        assert!(matches!(games_equivalent(&g, &other, &tol), Err(Error::TypeMismatch(..))));
        let mut shifted = g.payoff().clone();
        shifted[(0, 0)] += 1.0;
        let shifted = PolymatrixGame::new(g.game_type().clone(), shifted).unwrap();
        assert!(!games_equivalent(&g, &shifted, &tol).unwrap());
    }

    #[test]
    fn zero_row() {
        let g = example();
        let z = zero_row_representative(&g, 2).unwrap();
        assert!(z.payoff().row(2).iter().all(|v| *v == 0.0));
        // rows 1-2 are A^{1β} minus row 3
        for j in 0..5 {
            assert_eq!(z.entry(0, j), g.entry(0, j) - g.entry(2, j));
            assert_eq!(z.entry(1, j), g.entry(1, j) - g.entry(2, j));
            assert_eq!(z.entry(3, j), g.entry(3, j));
        }
        assert!(games_equivalent(&g, &z, &Tolerances::default()).unwrap());
        let zero = PolymatrixGame::<f64>::zero(GameType::new(vec![2, 2]).unwrap());
        assert_eq!(zero_row_representative(&zero, 3).unwrap(), zero);
        assert!(zero_row_representative(&g, 5).is_err());
    }

    #[test]
    fn worked_example_equilibrium() {
        let g = example();
        let q = PrismState::from_slice(g.game_type(), &[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.5, 0.5]).unwrap();
        let v = vector_field(&g, &q);
        assert!(v.amax() < 1e-14);
        let tol = Tolerances::default();
        let set = interior_equilibria(&g, &tol);
        assert!(set.contains(q.as_vector(), 1e-9));
        assert!(set.interior_flag());
        let p = set.particular.unwrap();
        assert!((p - q.as_vector()).amax() < 1e-12);
        assert_eq!(set.basis.ncols(), 1);
    }

    #[test]
    fn zero_game_equilibria() {
        let ty = GameType::new(vec![2, 2]).unwrap();
        let set = formal_equilibria(&PolymatrixGame::<f64>::zero(ty.clone()), &Tolerances::default());
        let p = set.particular.clone().unwrap();
        assert!((p - PrismState::<f64>::barycenter(&ty).into_vector()).amax() < 1e-12);
        assert_eq!(set.dimension(), 2);
    }

    #[test]
    fn inconsistent_equilibria() {
        let g = PolymatrixGame::<f64>::from_rows(&[2], &[&[0.0, 1.0], &[-1.0, 0.0]]).unwrap();
        let set = interior_equilibria(&g, &Tolerances::default());
        assert!(set.is_empty());
        assert!(!set.interior_flag());
    }

    #[test]
    fn rps_interior() {
        let g = crate::fixtures::rock_paper_scissors();
        let set = interior_equilibria(&g, &Tolerances::default());
        let q = set.interior_point.unwrap();
        assert!((q - DVector::from_element(3, 1.0 / 3.0)).amax() < 1e-12);
    }

    #[test]
    fn formal_equilibrium_outside_prism() {
        // (Aq)_1 = (Aq)_2 forces q = (2, -1).
        let g = PolymatrixGame::<f64>::from_rows(&[2], &[&[0.0, 1.0], &[1.0, 3.0]]).unwrap();
        let set = interior_equilibria(&g, &Tolerances::default());
        let q = set.particular.clone().unwrap();
        assert!((q[0] - 2.0).abs() < 1e-12 && (q[1] + 1.0).abs() < 1e-12);
        assert!(!set.interior_flag());
    }

    #[test]
    fn interior_found_off_min_norm() {
        // Zero game of type (3): min-norm solution is the barycenter, already interior;
        // shift the problem so the min-norm point sits on the boundary.
        // Row differences vanish for q on the segment {q1 = 1/2}.
        let g = PolymatrixGame::<f64>::from_rows(&[3], &[&[1.0, 0.0, 0.0], &[0.0, 0.0, 2.0], &[0.0, 0.0, 2.0]])
            .unwrap();
        // (Aq)_1 = q1, (Aq)_2 = (Aq)_3 = 2 q3; equilibria: q1 = 2 q3, q1 + q2 + q3 = 1.
        let set = interior_equilibria(&g, &Tolerances::default());
        let q = set.interior_point.expect("interior equilibria exist");
        assert!((q[0] - 2.0 * q[2]).abs() < 1e-9);
        assert!(q.min() > 1e-3);
    }

    #[test]
    fn scaling_validation() {
        let ty = GameType::new(vec![3, 2]).unwrap();
        assert!(DiagonalScaling::<f64>::new(&ty, vec![1.0]).is_err());
        assert!(DiagonalScaling::<f64>::new(&ty, vec![1.0, 0.0]).is_err());
        let d = DiagonalScaling::<f64>::new(&ty, vec![2.0, 5.0]).unwrap();
        assert_eq!(d.expand().as_slice(), &[2.0, 2.0, 2.0, 5.0, 5.0]);
    }

    #[test]
    fn prism_state_validation() {
        let ty = GameType::new(vec![2]).unwrap();
        assert!(PrismState::<f64>::from_slice(&ty, &[0.5, 0.6]).is_err());
        assert!(PrismState::<f64>::from_slice(&ty, &[1.5, -0.5]).is_err());
        assert!(PrismState::<f64>::from_slice(&ty, &[0.5]).is_err());
        assert!(PrismState::<f64>::from_slice(&ty, &[1.0, 0.0]).is_ok());
    }

    #[test]
    fn single_precision_field() {
        let g = crate::fixtures::rock_paper_scissors_f32();
        let x = PrismState::<f32>::barycenter(g.game_type());
        assert!(vector_field(&g, &x).amax() < 1e-6);
    }
}
