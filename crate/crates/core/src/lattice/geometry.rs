use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use super::Position;
use crate::error::{Error, Result};

const NO_ROW: u32 = u32::MAX;
const MAX_CELLS: u64 = 1 << 32;

/// One row of a window: the cells `(k, l)` for `k_lo <= k <= k_hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowSpan {
    pub l: i64,
    pub k_lo: i64,
    pub k_hi: i64,
}

impl RowSpan {
    pub const fn len(&self) -> usize {
        (self.k_hi - self.k_lo + 1) as usize
    }

    pub const fn is_empty(&self) -> bool {
        self.k_hi < self.k_lo
    }

    pub const fn contains_k(&self, k: i64) -> bool {
        self.k_lo <= k && k <= self.k_hi
    }
}

/// A finite window: rows indexed by `l`, each a contiguous, non-empty interval of `k`.
#[derive(Clone, Debug)]
pub struct Geometry {
    rows: Vec<RowSpan>,
    l_min: i64,
    dense: Vec<u32>,
    offsets: Vec<usize>,
    len: usize,
}

impl PartialEq for Geometry {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows
    }
}

impl Eq for Geometry {}

impl Geometry {
    /// Builds a geometry from row spans given in any order.
    pub fn from_rows(rows: impl IntoIterator<Item = RowSpan>) -> Result<Self> {
        let mut rows: Vec<RowSpan> = rows.into_iter().collect();
        if rows.is_empty() {
            return Err(Error::InvalidGeometry("no rows".into()));
        }
        rows.sort_by_key(|r| r.l);
        for w in rows.windows(2) {
            if w[0].l == w[1].l {
                return Err(Error::InvalidGeometry(format!("row l={} given twice", w[0].l)));
            }
        }
        let mut total: u64 = 0;
        for r in &rows {
            if r.is_empty() {
                return Err(Error::InvalidGeometry(format!("row l={} is empty", r.l)));
            }
            total += r.len() as u64;
        }
        if total > MAX_CELLS {
            return Err(Error::InvalidGeometry(format!("{total} cells exceed 2^32")));
        }
        let l_min = rows[0].l;
        let span = (rows[rows.len() - 1].l - l_min + 1) as usize;
        let mut dense = vec![NO_ROW; span];
        let mut offsets = Vec::with_capacity(rows.len());
        let mut acc = 0;
        for (i, r) in rows.iter().enumerate() {
            dense[(r.l - l_min) as usize] = i as u32;
            offsets.push(acc);
            acc += r.len();
        }
        Ok(Self { rows, l_min, dense, offsets, len: acc })
    }

    /// Groups cells into rows. Each row must be a contiguous run of `k`.
    pub fn from_cells(cells: impl IntoIterator<Item = Position>) -> Result<Self> {
        let mut cells: Vec<Position> = cells.into_iter().collect();
        cells.sort_by_key(|p| (p.l, p.k));
        cells.dedup();
        let mut rows: Vec<RowSpan> = Vec::new();
        for p in cells {
            match rows.last_mut() {
                Some(r) if r.l == p.l && r.k_hi + 1 == p.k => r.k_hi = p.k,
                Some(r) if r.l == p.l => {
                    return Err(Error::InvalidGeometry(format!("row l={} is not contiguous", p.l)));
                }
                _ => rows.push(RowSpan { l: p.l, k_lo: p.k, k_hi: p.k }),
            }
        }
        Self::from_rows(rows)
    }

    /// `{base + (k, l) : k ≥ 0, l ≥ 0, k + l ≤ n}`.
    pub fn triangle(base: Position, n: u32) -> Self {
        let n = n as i64;
        let rows = (0..=n).map(|j| RowSpan { l: base.l + j, k_lo: base.k, k_hi: base.k + n - j });
        Self::from_rows(rows).expect("triangle rows are valid")
    }

    /// All cells whose level lies in `levels` and whose cross lies in `cross`.
    pub fn band(levels: RangeInclusive<i64>, cross: RangeInclusive<i64>) -> Result<Self> {
        let (m_lo, m_hi) = (*levels.start(), *levels.end());
        let (c_lo, c_hi) = (*cross.start(), *cross.end());
        if m_lo > m_hi || c_lo > c_hi {
            return Err(Error::InvalidGeometry("empty band".into()));
        }
        let l_lo = (m_lo - c_hi).div_euclid(2);
        let l_hi = (m_hi - c_lo).div_euclid(2) + 1;
        let mut rows = Vec::new();
        for l in l_lo..=l_hi {
            let k_lo = (m_lo - l).max(c_lo + l);
            let k_hi = (m_hi - l).min(c_hi + l);
            if k_lo <= k_hi {
                rows.push(RowSpan { l, k_lo, k_hi });
            }
        }
        Self::from_rows(rows)
    }

    /// The axis-aligned rectangle `ks × ls`.
    pub fn rect(ks: RangeInclusive<i64>, ls: RangeInclusive<i64>) -> Result<Self> {
        let rows = ls.map(|l| RowSpan { l, k_lo: *ks.start(), k_hi: *ks.end() });
        Self::from_rows(rows)
    }

    /// A `w × h` rectangle whose lower-left corner is `corner`.
    pub fn square_at(corner: Position, w: u32, h: u32) -> Self {
        let (w, h) = (w.max(1) as i64, h.max(1) as i64);
        Self::rect(corner.k..=corner.k + w - 1, corner.l..=corner.l + h - 1).expect("non-empty")
    }

    pub fn rows(&self) -> &[RowSpan] {
        &self.rows
    }

    /// Number of cells.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub(crate) fn row_slot(&self, l: i64) -> Option<usize> {
        let i = l.checked_sub(self.l_min)?;
        if i < 0 {
            return None;
        }
        match self.dense.get(i as usize) {
            Some(&s) if s != NO_ROW => Some(s as usize),
            _ => None,
        }
    }

    pub fn row(&self, l: i64) -> Option<&RowSpan> {
        self.row_slot(l).map(|s| &self.rows[s])
    }

    #[inline]
    pub fn contains(&self, p: Position) -> bool {
        self.row(p.l).is_some_and(|r| r.contains_k(p.k))
    }

    /// Row-major index of a cell (`l` ascending, then `k` ascending).
    #[inline]
    pub fn index_of(&self, p: Position) -> Option<usize> {
        let s = self.row_slot(p.l)?;
        let r = &self.rows[s];
        r.contains_k(p.k).then(|| self.offsets[s] + (p.k - r.k_lo) as usize)
    }

    /// Cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = Position> + '_ {
        self.rows.iter().flat_map(|r| (r.k_lo..=r.k_hi).map(move |k| Position::new(k, r.l)))
    }

    pub fn translate(&self, d: Position) -> Self {
        let rows = self.rows.iter().map(|r| RowSpan { l: r.l + d.l, k_lo: r.k_lo + d.k, k_hi: r.k_hi + d.k });
        Self::from_rows(rows).expect("translation preserves validity")
    }

    pub fn l_range(&self) -> (i64, i64) {
        (self.rows[0].l, self.rows[self.rows.len() - 1].l)
    }

    pub fn k_range(&self) -> (i64, i64) {
        let lo = self.rows.iter().map(|r| r.k_lo).min().unwrap();
        let hi = self.rows.iter().map(|r| r.k_hi).max().unwrap();
        (lo, hi)
    }

    pub fn level_range(&self) -> (i64, i64) {
        let lo = self.rows.iter().map(|r| r.k_lo + r.l).min().unwrap();
        let hi = self.rows.iter().map(|r| r.k_hi + r.l).max().unwrap();
        (lo, hi)
    }

    pub fn cross_range(&self) -> (i64, i64) {
        let lo = self.rows.iter().map(|r| r.k_lo - r.l).min().unwrap();
        let hi = self.rows.iter().map(|r| r.k_hi - r.l).max().unwrap();
        (lo, hi)
    }

    /// True when some `l` between the first and last row carries no row.
    pub fn has_row_gaps(&self) -> bool {
        self.dense.len() != self.rows.len()
    }

    /// The lowest-level cell, ties broken by largest `k`.
    pub fn anchor(&self) -> Position {
        self.rows
            .iter()
            .map(|r| Position::new(r.k_lo, r.l))
            .min_by_key(|p| (p.level(), std::cmp::Reverse(p.k)))
            .unwrap()
    }

    /// Recognises `Triangle(base, n)` from the row structure.
    pub fn as_triangle(&self) -> Option<Triangle> {
        let (l0, l1) = self.l_range();
        if self.has_row_gaps() {
            return None;
        }
        let n = l1 - l0;
        let base = Position::new(self.rows[0].k_lo, l0);
        let ok = self
            .rows
            .iter()
            .all(|r| r.k_lo == base.k && r.k_hi == base.k + n - (r.l - l0));
        (ok && n <= u32::MAX as i64).then_some(Triangle { base, n: n as u32 })
    }
}

/// The discrete triangle `Δₙ` based at `base`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triangle {
    pub base: Position,
    pub n: u32,
}

impl Triangle {
    pub fn new(base: Position, n: u32) -> Self {
        Self { base, n }
    }

    pub fn geometry(&self) -> Geometry {
        Geometry::triangle(self.base, self.n)
    }

    pub fn cell_count(&self) -> usize {
        let n = self.n as usize;
        (n + 1) * (n + 2) / 2
    }

    /// Offset `(i, j)` of `p` from the base.
    #[inline]
    pub fn rel(&self, p: Position) -> (i64, i64) {
        (p.k - self.base.k, p.l - self.base.l)
    }

    #[inline]
    pub fn contains(&self, p: Position) -> bool {
        let (i, j) = self.rel(p);
        i >= 0 && j >= 0 && i + j <= self.n as i64
    }

    /// `Δ°ₙ`: `i > 0`, `j > 0`, `i + j ≤ n`. Hypotenuse cells away from the corners belong to it.
    pub fn in_interior(&self, p: Position) -> bool {
        let (i, j) = self.rel(p);
        i > 0 && j > 0 && i + j <= self.n as i64
    }

    /// The two legs `j = 0` and `i = 0`.
    pub fn on_legs(&self, p: Position) -> bool {
        let (i, j) = self.rel(p);
        self.contains(p) && (i == 0 || j == 0)
    }

    pub fn on_hypotenuse(&self, p: Position) -> bool {
        let (i, j) = self.rel(p);
        i >= 0 && j >= 0 && i + j == self.n as i64
    }

    /// `∂Δₙ`: legs plus hypotenuse.
    pub fn on_boundary(&self, p: Position) -> bool {
        self.on_legs(p) || self.on_hypotenuse(p)
    }

    /// Row-major index inside the triangle.
    #[inline]
    pub fn index(&self, p: Position) -> Option<usize> {
        if !self.contains(p) {
            return None;
        }
        let (i, j) = self.rel(p);
        let (n, j) = (self.n as usize, j as usize);
        // rows 0..j hold (n+1) + n + ... + (n+2-j) cells
        Some(j * (n + 1) - j * (j.saturating_sub(1)) / 2 + i as usize)
    }

    pub fn cells(&self) -> impl Iterator<Item = Position> + '_ {
        let n = self.n as i64;
        (0..=n).flat_map(move |j| (0..=n - j).map(move |i| Position::new(self.base.k + i, self.base.l + j)))
    }

    /// Hypotenuse cells ordered by increasing `k`.
    pub fn hypotenuse(&self) -> impl Iterator<Item = Position> + '_ {
        let n = self.n as i64;
        (0..=n).map(move |i| Position::new(self.base.k + i, self.base.l + n - i))
    }

    pub fn boundary_len(&self) -> usize {
        if self.n == 0 {
            1
        } else {
            3 * self.n as usize
        }
    }
}
