//! Vertex matrices `A_v` of the quadratic form `Q_A` on the tangent space.
//!
//! At a prism vertex `v` choosing strategy `j_α` in each group, the vectors
//! `e_i − e_{j_α}` for the non-chosen `i` form a basis of the tangent space.
//! `A_v` is the matrix of `Q_A` in that basis.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::game::{DiagonalScaling, GameType, PolymatrixGame, PrismState};
use crate::scalar::Scalar;
use crate::tol::Tolerances;

/// A vertex of the prism, given by its chosen strategy in each group.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexLabel {
    chosen: Vec<usize>,
}

impl VertexLabel {
    pub fn new(ty: &GameType, chosen: Vec<usize>) -> Result<Self> {
        if chosen.len() != ty.p() {
            return Err(Error::Precondition(format!("vertex needs {} strategies, got {}", ty.p(), chosen.len())));
        }
        for (g, &i) in chosen.iter().enumerate() {
            if !ty.range(g).contains(&i) {
                return Err(Error::Precondition(format!("strategy {} is not in group {}", i + 1, g + 1)));
            }
        }
        Ok(VertexLabel { chosen })
    }

    /// Builds a label from 1-based strategy numbers.
    pub fn from_one_based(ty: &GameType, chosen: &[usize]) -> Result<Self> {
        if chosen.contains(&0) {
            return Err(Error::Precondition("strategies are numbered from 1".into()));
        }
        Self::new(ty, chosen.iter().map(|i| i - 1).collect())
    }

    pub fn chosen(&self) -> &[usize] {
        &self.chosen
    }

    pub fn is_chosen(&self, ty: &GameType, i: usize) -> bool {
        self.chosen[ty.group_of(i)] == i
    }

    /// The prism point `e_{j_1} + … + e_{j_p}`.
    pub fn point<T: Scalar>(&self, ty: &GameType) -> DVector<T> {
        let mut v = DVector::zeros(ty.n());
        for &i in &self.chosen {
            v[i] = T::one();
        }
        v
    }

    /// Non-chosen strategies in increasing order.
    pub fn index_set(&self, ty: &GameType) -> Vec<usize> {
        (0..ty.n()).filter(|&i| !self.is_chosen(ty, i)).collect()
    }
}

impl fmt::Display for VertexLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.chosen.iter().map(|i| (i + 1).to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// All vertices, lexicographic in the chosen strategies.
pub fn enumerate_vertices(ty: &GameType) -> Vec<VertexLabel> {
    let mut out = vec![Vec::new()];
    for g in 0..ty.p() {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<usize>| {
                ty.range(g).map(move |i| {
                    let mut next = prefix.clone();
                    next.push(i);
                    next
                })
            })
            .collect();
    }
    out.into_iter().map(|chosen| VertexLabel { chosen }).collect()
}

/// `A_v` together with its row/column labels.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexMatrix<T: Scalar> {
    pub vertex: VertexLabel,
    /// Non-chosen strategies labelling rows and columns.
    pub index_set: Vec<usize>,
    /// Chosen strategy of the group of each entry of `index_set`.
    pub partners: Vec<usize>,
    pub entries: DMatrix<T>,
}

impl<T: Scalar> VertexMatrix<T> {
    pub fn dim(&self) -> usize {
        self.index_set.len()
    }

    /// Position of a global strategy in `index_set`.
    pub fn position(&self, strategy: usize) -> Option<usize> {
        self.index_set.binary_search(&strategy).ok()
    }

    /// Coordinates of a tangent vector in the basis `e_i − e_j`.
    pub fn coordinates(&self, w: &DVector<T>) -> DVector<T> {
        DVector::from_iterator(self.dim(), self.index_set.iter().map(|&i| w[i]))
    }

    /// Tangent vector `Σ c_k (e_{i_k} − e_{j_k})`.
    pub fn tangent(&self, n: usize, c: &DVector<T>) -> DVector<T> {
        let mut w = DVector::zeros(n);
        for (k, (&i, &j)) in self.index_set.iter().zip(&self.partners).enumerate() {
            w[i] += c[k];
            w[j] -= c[k];
        }
        w
    }

    /// `A_v D_v`: column of strategy `i` scaled by `d_i`.
    pub fn scaled(&self, d: &DiagonalScaling<T>) -> DMatrix<T> {
        let dv = d.expand();
        let mut m = self.entries.clone();
        for (k, &i) in self.index_set.iter().enumerate() {
            m.column_mut(k).scale_mut(dv[i]);
        }
        m
    }

    /// Diagonal scaling restricted to `index_set`.
    pub fn restrict_scaling(&self, d: &DiagonalScaling<T>) -> DVector<T> {
        let dv = d.expand();
        DVector::from_iterator(self.dim(), self.index_set.iter().map(|&i| dv[i]))
    }
}

/// Computes `A_v` from `a_ik + a_jl − a_il − a_jk`.
pub fn vertex_matrix<T: Scalar>(game: &PolymatrixGame<T>, v: &VertexLabel) -> Result<VertexMatrix<T>> {
    let ty = game.game_type();
    let v = VertexLabel::new(ty, v.chosen.clone())?;
    let index_set = v.index_set(ty);
    let partners: Vec<usize> = index_set.iter().map(|&i| v.chosen[ty.group_of(i)]).collect();
    let a = game.payoff();
    let m = index_set.len();
    let entries = DMatrix::from_fn(m, m, |r, c| {
        let (i, j) = (index_set[r], partners[r]);
        let (k, l) = (index_set[c], partners[c]);
        a[(i, k)] + a[(j, l)] - a[(i, l)] - a[(j, k)]
    });
    Ok(VertexMatrix { vertex: v, index_set, partners, entries })
}

/// Threshold below which an entry counts as zero: exact for integer data,
/// otherwise relative to the largest entry.
pub fn zero_threshold<T: Scalar>(m: &DMatrix<T>, tol: &Tolerances) -> T {
    if m.iter().all(|v| v.is_integral()) {
        T::zero()
    } else {
        T::lit(tol.equal) * T::one().max(m.amax())
    }
}

/// `wᵀ A w` for `w` in the tangent space.
pub fn quadratic_form<T: Scalar>(game: &PolymatrixGame<T>, w: &DVector<T>, tol: &Tolerances) -> Result<T> {
    game.game_type().check_tangent(w, tol.tangent)?;
    Ok(w.dot(&(game.payoff() * w)))
}

/// `Q_A(x − q)` expanded through `A_v`.
pub fn quadratic_via_vertex<T: Scalar>(
    game: &PolymatrixGame<T>,
    v: &VertexLabel,
    x: &PrismState<T>,
    q: &PrismState<T>,
) -> Result<T> {
    let vm = vertex_matrix(game, v)?;
    let c = vm.coordinates(&(x.as_vector() - q.as_vector()));
    Ok(c.dot(&(&vm.entries * &c)))
}

/// Undirected graph `G(M)` on the labels of a vertex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyGraph {
    /// Global strategy of each node.
    pub vertices: Vec<usize>,
    /// Node pairs `(a, b)` with `a < b`.
    pub edges: Vec<(usize, usize)>,
    /// Sign of each diagonal entry (−1, 0 or 1).
    pub loops: Vec<i8>,
    adjacency: Vec<Vec<usize>>,
}

impl StrategyGraph {
    /// Builds `G(M)` with labels `vertices`; entries at most `zero` in
    /// magnitude are treated as absent.
    pub fn from_matrix<T: Scalar>(m: &DMatrix<T>, vertices: Vec<usize>, zero: T) -> Self {
        let n = m.nrows();
        let mut edges = Vec::new();
        let mut adjacency = vec![Vec::new(); n];
        for a in 0..n {
            for b in a + 1..n {
                if m[(a, b)].abs() > zero || m[(b, a)].abs() > zero {
                    edges.push((a, b));
                    adjacency[a].push(b);
                    adjacency[b].push(a);
                }
            }
        }
        let loops = (0..n)
            .map(|a| {
                let d = m[(a, a)];
                if d > zero {
                    1
                } else if d < -zero {
                    -1
                } else {
                    0
                }
            })
            .collect();
        StrategyGraph { vertices, edges, loops, adjacency }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Neighbours of a node, excluding the node itself.
    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    /// An edge between two nodes with negative diagonal entries.
    pub fn is_strong(&self, a: usize, b: usize) -> bool {
        self.loops[a] < 0 && self.loops[b] < 0
    }

    /// Edges in global strategy numbering.
    pub fn strategy_edges(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|&(a, b)| (self.vertices[a], self.vertices[b])).collect()
    }
}

pub fn vertex_graph<T: Scalar>(vm: &VertexMatrix<T>, tol: &Tolerances) -> StrategyGraph {
    StrategyGraph::from_matrix(&vm.entries, vm.index_set.clone(), zero_threshold(&vm.entries, tol))
}

/// Checks `(A D)_v = A_v D_v` entrywise, up to `1e-12` relative.
pub fn diag_property_check<T: Scalar>(
    game: &PolymatrixGame<T>,
    d: &DiagonalScaling<T>,
    v: &VertexLabel,
) -> Result<bool> {
    let lhs = vertex_matrix(&game.scaled(d)?, v)?.entries;
    let rhs = vertex_matrix(game, v)?.scaled(d);
    let scale = T::one().max(lhs.amax()).max(rhs.amax());
    Ok((lhs - rhs).amax() <= T::lit(1e-12) * scale)
}
