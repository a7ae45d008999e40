//! Small named games used in tests, examples and the CLI.

use nalgebra::DMatrix;

use crate::game::{GameType, PolymatrixGame};
use crate::scalar::Scalar;

const WORKED: [[f64; 5]; 5] = [
    [-1.0, 8.0, -7.0, 3.0, -3.0],
    [-10.0, -1.0, 11.0, 3.0, -3.0],
    [11.0, -7.0, -4.0, -6.0, 6.0],
    [-3.0, -3.0, 6.0, 0.0, 0.0],
    [3.0, 3.0, -6.0, 0.0, 0.0],
];

fn build<T: Scalar>(groups: &[usize], rows: &[&[f64]]) -> PolymatrixGame<T> {
    let n = rows.len();
    let payoff = DMatrix::from_fn(n, n, |i, j| T::lit(rows[i][j]));
    PolymatrixGame::new(GameType::new(groups.to_vec()).expect("fixture type"), payoff).expect("fixture game")
}

/// Type (3,2) game with a line of interior equilibria through
/// `(1/3, 1/3, 1/3, 1/2, 1/2)`.
pub fn worked_example_generic<T: Scalar>() -> PolymatrixGame<T> {
    let rows: Vec<&[f64]> = WORKED.iter().map(|r| r.as_slice()).collect();
    build(&[3, 2], &rows)
}

pub fn worked_example() -> PolymatrixGame<f64> {
    worked_example_generic()
}

/// Interior equilibrium of [`worked_example`] with minimal norm.
pub fn worked_example_equilibrium() -> Vec<f64> {
    vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.5, 0.5]
}

fn rps<T: Scalar>() -> PolymatrixGame<T> {
    build(&[3], &[&[0.0, -1.0, 1.0], &[1.0, 0.0, -1.0], &[-1.0, 1.0, 0.0]])
}

/// Zero-sum rock-paper-scissors (conservative).
pub fn rock_paper_scissors() -> PolymatrixGame<f64> {
    rps()
}

pub fn rock_paper_scissors_f32() -> PolymatrixGame<f32> {
    rps()
}
