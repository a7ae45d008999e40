//! Text format for games.
//!
//! ```text
//! # comment
//! type: 3 2
//! -1 8 -7 3 -3
//! ...
//! ```
//!
//! The first non-comment line declares the group sizes; the following `n`
//! lines hold the payoff rows. Entries may be integers, decimals or simple
//! fractions `p/q`.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::game::{GameType, PolymatrixGame};
use crate::scalar::Scalar;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Parses a number written as an integer, a decimal or `p/q`.
pub fn parse_number(token: &str) -> Option<f64> {
    match token.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().ok()?;
            let q: f64 = q.trim().parse().ok()?;
            (q != 0.0).then(|| p / q).filter(|v| v.is_finite())
        }
        None => token.parse::<f64>().ok().filter(|v| v.is_finite()),
    }
}

/// Non-empty, non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(k, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((k + 1, line))
    })
}

fn parse_row(line_no: usize, line: &str) -> Result<Vec<f64>> {
    line.split_whitespace()
        .map(|tok| parse_number(tok).ok_or_else(|| parse_err(line_no, format!("not a number: `{tok}`"))))
        .collect()
}

/// Parses a game from text.
pub fn parse_game<T: Scalar>(text: &str) -> Result<PolymatrixGame<T>> {
    let mut lines = content_lines(text);
    let (line_no, header) = lines.next().ok_or_else(|| parse_err(1, "missing `type:` line"))?;
    let spec = header
        .strip_prefix("type:")
        .ok_or_else(|| parse_err(line_no, "expected `type: n_1 ... n_p`"))?;
    let groups = spec
        .split_whitespace()
        .map(|tok| {
            tok.parse::<usize>()
                .map_err(|_| parse_err(line_no, format!("group size `{tok}` is not a positive integer")))
        })
        .collect::<Result<Vec<_>>>()?;
    let ty = GameType::new(groups).map_err(|e| parse_err(line_no, e.to_string()))?;
    let n = ty.n();
    let mut payoff = DMatrix::zeros(n, n);
    let mut last_line = line_no;
    for r in 0..n {
        let (no, line) = lines
            .next()
            .ok_or_else(|| parse_err(last_line, format!("expected {n} payoff rows, found {r}")))?;
        let row = parse_row(no, line)?;
        if row.len() != n {
            return Err(parse_err(no, format!("row has {} entries, expected {n}", row.len())));
        }
        for (c, v) in row.into_iter().enumerate() {
            payoff[(r, c)] = T::lit(v);
        }
        last_line = no;
    }
    if let Some((no, _)) = lines.next() {
        return Err(parse_err(no, format!("expected {n} payoff rows, found more")));
    }
    PolymatrixGame::new(ty, payoff)
}

pub fn read_game<T: Scalar>(path: impl AsRef<Path>) -> Result<PolymatrixGame<T>> {
    parse_game(&std::fs::read_to_string(path)?)
}

/// Parses a square matrix, one row per line.
pub fn parse_matrix(text: &str) -> Result<DMatrix<f64>> {
    let rows = content_lines(text).map(|(no, line)| parse_row(no, line).map(|r| (no, r))).collect::<Result<Vec<_>>>()?;
    let n = rows.len();
    if n == 0 {
        return Err(parse_err(1, "empty matrix"));
    }
    let mut m = DMatrix::zeros(n, n);
    for (r, (no, row)) in rows.into_iter().enumerate() {
        if row.len() != n {
            return Err(parse_err(no, format!("row has {} entries, expected {n}", row.len())));
        }
        for (c, v) in row.into_iter().enumerate() {
            m[(r, c)] = v;
        }
    }
    Ok(m)
}

/// Parses a comma-separated list of numbers.
pub fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|tok| {
            let tok = tok.trim();
            parse_number(tok).ok_or_else(|| parse_err(1, format!("not a number: `{tok}`")))
        })
        .collect()
}

/// Shortest text that parses back to the same value.
pub fn format_number(v: f64) -> String {
    if v.is_integral() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:?}")
    }
}

/// Renders a game in the text format.
pub fn emit_game<T: Scalar>(game: &PolymatrixGame<T>) -> String {
    let groups: Vec<String> = game.game_type().groups().iter().map(|g| g.to_string()).collect();
    let mut out = format!("type: {}\n", groups.join(" "));
    for row in game.payoff().row_iter() {
        let cells: Vec<String> = row.iter().map(|v| format_number(v.as_f64())).collect();
        let _ = writeln!(out, "{}", cells.join(" "));
    }
    out
}

pub fn write_game<T: Scalar>(game: &PolymatrixGame<T>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, emit_game(game))?;
    Ok(())
}
