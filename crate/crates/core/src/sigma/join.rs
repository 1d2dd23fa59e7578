//! Steering two trajectories together by choosing the future.
//!
//! Above a fixed past (levels `≤ 0`) each level `m ≥ 1` carries one free bit,
//! the value at `(m, 0)`; the rest of the level follows from the rule. Flipping
//! that bit flips the whole level, hence the moves of both trajectory heads at
//! once. The heads can approach each other only on levels where their moves
//! differ, and the search picks the orientation that closes the gap.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{complete_from_free, FreeCoordinateSet, Geometry, Patch, Position};

/// Result of [`force_join`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum JoinOutcome {
    /// `seeds[i]` is the value at `(i + 1, 0)`; the heads coincide at `meet`.
    Joined { seeds: Vec<bool>, meet: Position },
    /// No choice of the free bits within the budget joins the two trajectories.
    Unreachable,
}

impl JoinOutcome {
    pub fn levels(&self) -> Option<usize> {
        match self {
            JoinOutcome::Joined { seeds, .. } => Some(seeds.len()),
            JoinOutcome::Unreachable => None,
        }
    }
}

/// Searches free bits on levels `1..=level_budget` making the σ-trajectories of
/// `(0,0)` and `(h,-h)` meet.
///
/// Only the level-0 cells `(k, -k)` for `0 ≤ k ≤ h + 1` are read from `past`;
/// both endpoints must be Y-cells. The search is depth-first, preferring at
/// each level the orientation that brings the heads together (or, when both
/// heads move alike, the one moving them by `S`), and prunes branches whose
/// remaining gap exceeds the remaining levels.
pub fn force_join(past: &Patch, h: i64, level_budget: usize) -> Result<JoinOutcome> {
    if h < 0 {
        return Err(Error::InvalidGeometry(format!("force_join needs h >= 0, got {h}")));
    }
    let row: Vec<bool> = (0..=h + 1)
        .map(|k| past.get(Position::new(k, -k)).ok_or(Error::OutOfWindow(Position::new(k, -k))))
        .collect::<Result<_>>()?;
    for k in [0, h] {
        if !row[k as usize] {
            return Err(Error::NotInY(Position::new(k, -k)));
        }
    }
    let mut seeds = Vec::new();
    if dfs(&row, 0, 0, h as usize, level_budget, &mut seeds) {
        let m = seeds.len() as i64;
        let k = replay_head(&row, &seeds);
        Ok(JoinOutcome::Joined { seeds, meet: Position::new(k, m - k) })
    } else {
        Ok(JoinOutcome::Unreachable)
    }
}

/// Level `m + 1` on `k ∈ [0, len]` from level `m` on `k ∈ [0, len - 1]` and the seed at `k = m + 1`.
fn next_level(row: &[bool], m: usize, seed: bool) -> Vec<bool> {
    let len = row.len() + 1;
    let mut nx = vec![false; len];
    nx[m + 1] = seed;
    for j in (0..=m).rev() {
        nx[j] = row[j] ^ nx[j + 1];
    }
    for j in m + 2..len {
        nx[j] = row[j - 1] ^ nx[j - 1];
    }
    nx
}

fn dfs(row: &[bool], m: usize, a: usize, b: usize, budget: usize, seeds: &mut Vec<bool>) -> bool {
    if a == b {
        return true;
    }
    if b - a > budget - m {
        return false;
    }
    let base = next_level(row, m, false);
    let (ta, tb) = (base[a + 1], base[b + 1]);
    // With seed s the heads move by T iff base ^ s.
    let first = if ta != tb { !ta } else { ta };
    for s in [first, !first] {
        let nx = if s { base.iter().map(|v| !v).collect() } else { base.clone() };
        let na = a + (ta ^ s) as usize;
        let nb = b + (tb ^ s) as usize;
        seeds.push(s);
        if dfs(&nx, m + 1, na, nb, budget, seeds) {
            return true;
        }
        seeds.pop();
    }
    false
}

fn replay_head(row: &[bool], seeds: &[bool]) -> i64 {
    let mut row = row.to_vec();
    let mut a = 0usize;
    for (m, &s) in seeds.iter().enumerate() {
        row = next_level(&row, m, s);
        a += row[a + 1] as usize;
    }
    a as i64
}

/// Completes `past` (its level-0 cells `(k, -k)`, `0 ≤ k ≤ h + 1`) with `seeds`
/// on levels `1..=seeds.len()`, on every cell those values determine.
pub fn force_join_patch(past: &Patch, h: i64, seeds: &[bool]) -> Result<Patch> {
    let free = FreeCoordinateSet::new(0..=h + 1, 1..=seeds.len().max(1) as i64)?;
    let mut values: Vec<bool> = (0..=h + 1)
        .map(|k| past.get(Position::new(k, -k)).ok_or(Error::OutOfWindow(Position::new(k, -k))))
        .collect::<Result<_>>()?;
    values.extend_from_slice(seeds);
    if seeds.is_empty() {
        values.push(false);
    }
    let top = seeds.len() as i64;
    let cells = (-(h + 1)..=top).flat_map(|l| (0.max(-l)..=top - l).map(move |k| Position::new(k, l)));
    let target = Geometry::from_cells(cells.filter(|p| p.level() >= 0 && p.k <= h + 1 + p.level()))?;
    complete_from_free(&free, &values, &target)
}
