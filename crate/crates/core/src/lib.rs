//! Analysis of replicator dynamics on polymatrix games.
//!
//! The crate covers game representation and equivalence, vertex forms of
//! the quadratic payoff form, (stable) dissipativity tests, the colour
//! propagation reduction, Hamiltonian collapse of dissipative games and
//! numerical integration of the replicator flow.
//!
//! All routines are generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix `f64`, which is what the CLI uses.

pub mod collapse;
pub mod dissipativity;
pub mod dynamics;
pub mod error;
pub mod fixtures;
pub mod game;
pub mod generate;
pub mod io;
pub mod linalg;
mod optim;
pub mod reduction;
pub mod scalar;
pub mod tol;
pub mod vertex;

pub use error::{Error, Result};
pub use game::{
    formal_equilibria, games_equivalent, interior_equilibria, validate_game, vector_field, zero_row_representative,
    DiagonalScaling, EquilibriumSet, GameType, PolymatrixGame, PrismState, Violation,
};
pub use scalar::Scalar;
pub use tol::Tolerances;

pub type Game = PolymatrixGame<f64>;
pub type Game32 = PolymatrixGame<f32>;
pub type State = PrismState<f64>;
pub type Scaling = DiagonalScaling<f64>;
pub type Equilibria = EquilibriumSet<f64>;
