//! Which Y-cells of an anti-diagonal join the σ-component of a base cell.

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use super::sigma_step;
use crate::error::{Error, Result};
use crate::lattice::{Patch, Position};

/// Steps until the trajectories of two same-level Y-cells coincide, or `None`
/// if one of them leaves the window first.
pub fn meet_level(x: &Patch, a: Position, b: Position) -> Result<Option<usize>> {
    debug_assert_eq!(a.level(), b.level());
    let (mut a, mut b) = (a, b);
    let mut steps = 0;
    while a != b {
        let na = match sigma_step(x, a) {
            Ok((_, q)) => q,
            Err(Error::WindowExit(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        let nb = match sigma_step(x, b) {
            Ok((_, q)) => q,
            Err(Error::WindowExit(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        a = na;
        b = nb;
        steps += 1;
    }
    Ok(Some(steps))
}

/// In-window classification of the anti-diagonal through a base cell.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagonalScan {
    pub base: Position,
    /// `h` with `base + (h, -h)` in Y whose trajectory meets the base's in the window.
    pub kset: Vec<i64>,
    /// `h` with `base + (h, -h)` in Y whose trajectory leaves the window unmerged.
    /// Window-censored: a later merge outside the window is not excluded.
    pub lset: Vec<i64>,
    /// `h` whose cell lies outside the window.
    pub outside: Vec<i64>,
}

/// Classifies every `h` in `hrange` for the anti-diagonal through `p`.
pub fn diagonal_scan(x: &Patch, p: Position, hrange: RangeInclusive<i64>) -> Result<DiagonalScan> {
    match x.get(p) {
        None => return Err(Error::OutOfWindow(p)),
        Some(false) => return Err(Error::NotInY(p)),
        Some(true) => {}
    }
    let mut scan = DiagonalScan { base: p, kset: Vec::new(), lset: Vec::new(), outside: Vec::new() };
    for h in hrange {
        let q = p.diagonal(h);
        match x.get(q) {
            None => scan.outside.push(h),
            Some(false) => {}
            Some(true) => match meet_level(x, p, q)? {
                Some(_) => scan.kset.push(h),
                None => scan.lset.push(h),
            },
        }
    }
    Ok(scan)
}
