//! Deterministic counting bounds on triangles.
//!
//! A component is a tree rooted at its hypotenuse cell. A deep2 cell `z` splits
//! the component's boundary cells into three non-empty blocks: those below its
//! `T`-antecedent, those below its `S`-antecedent, and the rest. Partitions
//! built this way are pairwise compatible, which caps their number at the
//! boundary size minus two.

use serde::{Deserialize, Serialize};

use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::lattice::{Patch, Position};
use crate::sigma::{components, ComponentTable};

/// Three-block partitions of a common ground set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionFamily {
    pub ground: Vec<Position>,
    /// Blocks as indices into `ground`.
    pub partitions: Vec<[Vec<usize>; 3]>,
}

/// Outcome of [`bk_partition_check`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BkCheck {
    pub family: usize,
    /// `card(ground) - 2`.
    pub bound: i64,
    pub pass: bool,
}

fn block_sets(len: usize, p: &[Vec<usize>; 3], i: usize) -> Result<[BitSet; 3]> {
    let mut seen = BitSet::new(len);
    let mut out = [BitSet::new(len), BitSet::new(len), BitSet::new(len)];
    for (b, block) in p.iter().enumerate() {
        if block.is_empty() {
            return Err(Error::MalformedPartition(i, format!("block {b} is empty")));
        }
        for &e in block {
            if e >= len || seen.get(e) {
                return Err(Error::MalformedPartition(i, format!("element {e} repeated or out of range")));
            }
            seen.set(e, true);
            out[b].set(e, true);
        }
    }
    if seen.count_ones() != len {
        return Err(Error::MalformedPartition(i, "blocks do not cover the ground set".into()));
    }
    Ok(out)
}

/// `{P₁, P₂, P₃}` and `{Q₁, Q₂, Q₃}` are compatible when, after reindexing, `Q₂ ∪ Q₃ ⊆ P₁`.
fn compatible(p: &[BitSet; 3], q: &[BitSet; 3]) -> bool {
    (0..3).any(|j| {
        let rest = q[(j + 1) % 3].union(&q[(j + 2) % 3]);
        p.iter().any(|pi| rest.is_subset(pi))
    })
}

/// Checks pairwise compatibility and the bound `card family ≤ card ground - 2`.
pub fn bk_partition_check(family: &PartitionFamily) -> Result<BkCheck> {
    let len = family.ground.len();
    let sets: Vec<[BitSet; 3]> = family
        .partitions
        .iter()
        .enumerate()
        .map(|(i, p)| block_sets(len, p, i))
        .collect::<Result<_>>()?;
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            if !compatible(&sets[i], &sets[j]) {
                return Err(Error::NotCompatible(i, j));
            }
        }
    }
    let bound = len as i64 - 2;
    Ok(BkCheck { family: sets.len(), bound, pass: sets.len() as i64 <= bound })
}

/// Pre/post visit times of a component tree, indexed by triangle index.
struct Euler {
    tin: Vec<u32>,
    tout: Vec<u32>,
}

impl Euler {
    fn new(table: &ComponentTable, root: Position) -> Self {
        let tri = table.triangle();
        let mut tin = vec![0; tri.cell_count()];
        let mut tout = vec![0; tri.cell_count()];
        let mut clock = 0;
        let mut stack = vec![(root, false)];
        while let Some((p, done)) = stack.pop() {
            let i = tri.index(p).unwrap();
            if done {
                tout[i] = clock;
                continue;
            }
            tin[i] = clock;
            clock += 1;
            stack.push((p, true));
            stack.extend(table.children(p).map(|c| (c, false)));
        }
        Self { tin, tout }
    }

    fn below(&self, table: &ComponentTable, v: Position, b: Position) -> bool {
        let tri = table.triangle();
        let (iv, ib) = (tri.index(v).unwrap(), tri.index(b).unwrap());
        self.tin[iv] <= self.tin[ib] && self.tin[ib] < self.tout[iv]
    }
}

/// The partition family of component `c`: one partition per deep2 cell.
pub fn component_partitions(table: &ComponentTable, c: u32) -> PartitionFamily {
    let info = &table.components()[c as usize];
    let ground = info.boundary.clone();
    let marking = table.marking();
    let euler = Euler::new(table, info.hypotenuse);
    let mut partitions = Vec::new();
    for z in table.cells_of(c).filter(|&z| marking.is_deep2(z)) {
        let t = Position::new(z.k - 1, z.l);
        let s = Position::new(z.k, z.l - 1);
        let mut blocks: [Vec<usize>; 3] = Default::default();
        for (i, &b) in ground.iter().enumerate() {
            let slot = if euler.below(table, t, b) {
                0
            } else if euler.below(table, s, b) {
                1
            } else {
                2
            };
            blocks[slot].push(i);
        }
        partitions.push(blocks);
    }
    PartitionFamily { ground, partitions }
}

/// Per-component line of a [`BoundCheckReport`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentBound {
    pub component: u32,
    /// `card(deep2 ∩ C ∩ Δ°ₙ)`.
    pub deep2_interior: usize,
    /// `card(∂Δₙ ∩ C)`.
    pub boundary: usize,
    pub pass: bool,
}

/// Per-component branch-point bound on one triangle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundCheckReport {
    pub n: u32,
    /// Components with a deep cell in `Δ°ₙ`.
    pub components: Vec<ComponentBound>,
    pub deep2_interior: usize,
    /// `3n - 2`.
    pub interior_budget: i64,
    /// Every component passes and every partition family is compatible.
    pub pass: bool,
    /// `deep2_interior ≤ interior_budget`.
    pub pass_budget: bool,
}

/// Checks `card(deep2 ∩ C ∩ Δ°ₙ) ≤ card(∂Δₙ ∩ C) - 2` on every component with a
/// deep interior cell, and the compatibility of its partition family.
pub fn lemma22_audit(x: &Patch) -> Result<BoundCheckReport> {
    let table = components(x)?;
    let tri = table.triangle();
    let marking = table.marking();
    let mut out = Vec::new();
    let mut pass = true;
    for info in table.components() {
        let has_deep_interior = table.cells_of(info.id).any(|p| tri.in_interior(p) && marking.is_deep(p));
        if !has_deep_interior {
            continue;
        }
        let family = component_partitions(&table, info.id);
        let check = bk_partition_check(&family)?;
        let deep2_interior = table.cells_of(info.id).filter(|&p| tri.in_interior(p) && marking.is_deep2(p)).count();
        let ok = (deep2_interior as i64) <= info.boundary.len() as i64 - 2 && check.pass;
        pass &= ok;
        out.push(ComponentBound { component: info.id, deep2_interior, boundary: info.boundary.len(), pass: ok });
    }
    let deep2_interior = marking.deep2_interior_count();
    let interior_budget = 3 * tri.n as i64 - 2;
    Ok(BoundCheckReport {
        n: tri.n,
        components: out,
        deep2_interior,
        interior_budget,
        pass,
        pass_budget: deep2_interior as i64 <= interior_budget.max(0),
    })
}

/// Whole-triangle deep2 budgets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cor23Report {
    pub n: u32,
    /// `card(deep2 ∩ Δ°ₙ)`.
    pub interior: usize,
    pub interior_budget: i64,
    /// `card(deep2 ∩ Δₙ)`.
    pub full: usize,
    pub full_budget: i64,
    pub pass_interior: bool,
    pub pass_full: bool,
    /// `card Δₙ`.
    pub cells: usize,
}

/// `card(deep2 ∩ Δ°ₙ) ≤ 3n - 2` (summing the per-component bound) and the
/// reported `card(deep2 ∩ Δₙ) ≤ 5n + 1`.
pub fn cor23_audit(x: &Patch) -> Result<Cor23Report> {
    let table = components(x)?;
    let tri = table.triangle();
    if tri.n == 0 {
        return Err(Error::InvalidGeometry("the budgets need n >= 1".into()));
    }
    let m = table.marking();
    let interior = m.deep2_interior_count();
    let full = m.deep2_count();
    let n = tri.n as i64;
    Ok(Cor23Report {
        n: tri.n,
        interior,
        interior_budget: 3 * n - 2,
        full,
        full_budget: 5 * n + 1,
        pass_interior: interior as i64 <= 3 * n - 2,
        pass_full: full as i64 <= 5 * n + 1,
        cells: tri.cell_count(),
    })
}

/// Component count against `n + 1`, with the extremal-to-hypotenuse map.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtremalReport {
    pub n: u32,
    pub components: usize,
    pub bound: usize,
    /// `(extremal cell, hypotenuse cell)` per component.
    pub map: Vec<(Position, Position)>,
    pub distinct: bool,
    pub pass: bool,
}

pub fn extremal_audit(x: &Patch) -> Result<ExtremalReport> {
    let table = components(x)?;
    let n = table.triangle().n;
    let map: Vec<(Position, Position)> = table.components().iter().map(|c| (c.extremal, c.hypotenuse)).collect();
    let mut ext: Vec<Position> = map.iter().map(|m| m.0).collect();
    ext.sort();
    ext.dedup();
    let distinct = ext.len() == map.len();
    let bound = n as usize + 1;
    Ok(ExtremalReport { n, components: map.len(), bound, distinct, pass: map.len() <= bound && distinct, map })
}
