//! The map σ on finite windows.
//!
//! At a Y-cell `p` (`x(p) = 1`) the rule gives `x(p + (1,0)) + x(p + (0,1)) = 1`,
//! so exactly one successor is again in Y and σ moves there.

mod components;
mod join;
mod scan;

pub use components::{components, deep_marking, extremal_cell, ComponentInfo, ComponentTable, DeepMarking};
pub use join::{force_join, force_join_patch, JoinOutcome};
pub use scan::{diagonal_scan, meet_level, DiagonalScan};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Move, Patch, Position};

/// One σ-step from `p`.
///
/// Errors: `OutOfWindow` if `p` is outside, `NotInY` if `x(p) = 0`,
/// `WindowExit` if the cell that decides or receives the move is outside.
pub fn sigma_step(x: &Patch, p: Position) -> Result<(Move, Position)> {
    match x.get(p) {
        None => return Err(Error::OutOfWindow(p)),
        Some(false) => return Err(Error::NotInY(p)),
        Some(true) => {}
    }
    let t = p.step(Move::T);
    match x.get(t) {
        None => Err(Error::WindowExit(t)),
        Some(true) => Ok((Move::T, t)),
        Some(false) => {
            let s = p.step(Move::S);
            match x.get(s) {
                None => Err(Error::WindowExit(s)),
                Some(v) => {
                    debug_assert!(v, "rule forces x(p+(0,1)) = 1 when x(p) = 1 and x(p+(1,0)) = 0");
                    Ok((Move::S, s))
                }
            }
        }
    }
}

/// The σ-preimages of `p` among `p - (1,0)` and `p - (0,1)`.
///
/// `None` means the window does not decide.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Antecedents {
    /// `p - (1,0)` maps to `p` by `T`.
    pub t: Option<bool>,
    /// `p - (0,1)` maps to `p` by `S`.
    pub s: Option<bool>,
}

impl Antecedents {
    pub fn count(&self) -> usize {
        self.t.unwrap_or(false) as usize + self.s.unwrap_or(false) as usize
    }

    pub fn is_complete(&self) -> bool {
        self.t.is_some() && self.s.is_some()
    }

    /// The known antecedent positions of `p`.
    pub fn positions(&self, p: Position) -> impl Iterator<Item = Position> {
        let t = (self.t == Some(true)).then(|| Position::new(p.k - 1, p.l));
        let s = (self.s == Some(true)).then(|| Position::new(p.k, p.l - 1));
        t.into_iter().chain(s)
    }
}

/// Depth-one σ-antecedents of the Y-cell `p`.
pub fn antecedents(x: &Patch, p: Position) -> Result<Antecedents> {
    match x.get(p) {
        None => return Err(Error::OutOfWindow(p)),
        Some(false) => return Err(Error::NotInY(p)),
        Some(true) => {}
    }
    let t = x.get(Position::new(p.k - 1, p.l));
    let s = match x.get(Position::new(p.k, p.l - 1)) {
        Some(false) => Some(false),
        Some(true) => x.get(Position::new(p.k + 1, p.l - 1)).map(|b| !b),
        None => None,
    };
    Ok(Antecedents { t, s })
}

/// How a traced trajectory ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrajectoryEnd {
    /// All requested steps were taken; the final position.
    InWindow(Position),
    /// The next step needed this cell, which is outside the window.
    WindowExit(Position),
}

/// A σ-orbit segment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub start: Position,
    pub moves: Vec<Move>,
    pub end: TrajectoryEnd,
}

impl Trajectory {
    /// Visited positions, the start included.
    pub fn positions(&self) -> impl Iterator<Item = Position> + '_ {
        std::iter::once(self.start).chain(self.moves.iter().scan(self.start, |p, &m| {
            *p = p.step(m);
            Some(*p)
        }))
    }

    pub fn last(&self) -> Position {
        self.positions().last().unwrap()
    }

    /// `T`/`S` letters, e.g. `STTS`.
    pub fn word(&self) -> String {
        self.moves.iter().map(|m| m.letter()).collect()
    }
}

/// Follows σ from `p` for up to `steps` steps, stopping early at the window edge.
pub fn trace(x: &Patch, p: Position, steps: usize) -> Result<Trajectory> {
    let mut moves = Vec::with_capacity(steps.min(1 << 16));
    let mut at = p;
    for _ in 0..steps {
        match sigma_step(x, at) {
            Ok((mv, next)) => {
                moves.push(mv);
                at = next;
            }
            Err(Error::WindowExit(q)) => return Ok(Trajectory { start: p, moves, end: TrajectoryEnd::WindowExit(q) }),
            Err(e) => return Err(e),
        }
    }
    if moves.is_empty() {
        // Validate the start even when no step is requested.
        match x.get(p) {
            None => return Err(Error::OutOfWindow(p)),
            Some(false) => return Err(Error::NotInY(p)),
            Some(true) => {}
        }
    }
    Ok(Trajectory { start: p, moves, end: TrajectoryEnd::InWindow(at) })
}
