//! Free coordinates and deterministic completion.
//!
//! Every configuration of the three-dot system is fixed by its values on the
//! anti-diagonal `P₋ = {(k, -k)}` and the positive axis `P₊ = {(k, 0) : k ≥ 1}`.
//! Going down one level is forced, `x(k, l) = x(k+1, l) ⊕ x(k, l+1)`. Going up
//! one level leaves a single free bit, the axis cell `(m, 0)`, from which the
//! rest of level `m` is obtained by walking left and right along the level.

use std::ops::RangeInclusive;

use super::{Geometry, Patch, Position};
use crate::bits::BitSet;
use crate::error::{Error, Result};

/// A finite subset of `P = P₋ ∪ P₊`: an interval of anti-diagonal cells
/// `(k, -k)` and an interval of axis cells `(k, 0)`, `k ≥ 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeCoordinateSet {
    diag: Option<(i64, i64)>,
    axis: Option<(i64, i64)>,
}

impl FreeCoordinateSet {
    /// `diag` ranges over `k` of the anti-diagonal cells `(k, -k)`; `axis` over
    /// `k ≥ 1` of the axis cells `(k, 0)`. Empty ranges mean "none".
    pub fn new(diag: RangeInclusive<i64>, axis: RangeInclusive<i64>) -> Result<Self> {
        let diag = (!diag.is_empty()).then(|| (*diag.start(), *diag.end()));
        let axis = (!axis.is_empty()).then(|| (*axis.start(), *axis.end()));
        if let Some((a, _)) = axis {
            if a < 1 {
                return Err(Error::InvalidGeometry("axis coordinates start at k = 1".into()));
            }
        }
        Ok(Self { diag, axis })
    }

    pub fn empty() -> Self {
        Self { diag: None, axis: None }
    }

    /// Interval of `k` for the anti-diagonal cells `(k, -k)`.
    pub fn diag(&self) -> Option<(i64, i64)> {
        self.diag
    }

    /// The same interval expressed in cross values `2k`.
    pub fn diag_cross(&self) -> Option<(i64, i64)> {
        self.diag.map(|(a, b)| (2 * a, 2 * b))
    }

    pub fn axis(&self) -> Option<(i64, i64)> {
        self.axis
    }

    fn diag_len(&self) -> usize {
        self.diag.map_or(0, |(a, b)| (b - a + 1) as usize)
    }

    pub fn len(&self) -> usize {
        self.diag_len() + self.axis.map_or(0, |(a, b)| (b - a + 1) as usize)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Anti-diagonal cells first (by `k`), then axis cells (by `k`).
    pub fn coordinates(&self) -> impl Iterator<Item = Position> + '_ {
        let d = self.diag.into_iter().flat_map(|(a, b)| (a..=b).map(|k| Position::new(k, -k)));
        let x = self.axis.into_iter().flat_map(|(a, b)| (a..=b).map(|k| Position::new(k, 0)));
        d.chain(x)
    }

    pub fn index_of(&self, p: Position) -> Option<usize> {
        if let Some((a, b)) = self.diag {
            if p.level() == 0 && (a..=b).contains(&p.k) {
                return Some((p.k - a) as usize);
            }
        }
        if let Some((a, b)) = self.axis {
            if p.l == 0 && (a..=b).contains(&p.k) {
                return Some(self.diag_len() + (p.k - a) as usize);
            }
        }
        None
    }

    /// The smallest interval pair under which the completion walk reaches every cell.
    ///
    /// A cell `(k, l)` at level `m` needs:
    /// * `m ≤ 0`: anti-diagonal `k..=-l`;
    /// * `m ≥ 1`, `k ≥ 1`, `l ≥ 0`: axis `k..=m` only;
    /// * `m ≥ 1`, `k ≤ 0`: anti-diagonal `k..=0` and axis `1..=m`;
    /// * `m ≥ 1`, `l < 0`: anti-diagonal `1..=-l` and axis `1..=m`.
    pub fn covering(cells: impl IntoIterator<Item = Position>) -> Self {
        fn hull(acc: &mut Option<(i64, i64)>, lo: i64, hi: i64) {
            *acc = Some(match *acc {
                None => (lo, hi),
                Some((a, b)) => (a.min(lo), b.max(hi)),
            });
        }
        let mut diag = None;
        let mut axis = None;
        for p in cells {
            let m = p.level();
            if m <= 0 {
                hull(&mut diag, p.k, -p.l);
            } else if p.k >= 1 && p.l >= 0 {
                hull(&mut axis, p.k, m);
            } else if p.k <= 0 {
                hull(&mut diag, p.k, 0);
                hull(&mut axis, 1, m);
            } else {
                hull(&mut diag, 1, -p.l);
                hull(&mut axis, 1, m);
            }
        }
        Self { diag, axis }
    }

    /// `covering` applied to every cell of `g`.
    pub fn minimal_for(g: &Geometry) -> Self {
        Self::covering(g.cells())
    }

    /// `k`-interval of level `m` reachable by the completion walk.
    pub fn determined_range(&self, m: i64) -> Option<(i64, i64)> {
        if m <= 0 {
            let (a, b) = self.diag?;
            return (b + m >= a).then_some((a, b + m));
        }
        let mut cur = self.diag;
        for lvl in 1..=m {
            cur = step_up_range(cur, lvl, self.has_seed(lvl));
        }
        cur
    }

    pub fn determines(&self, p: Position) -> bool {
        self.determined_range(p.level()).is_some_and(|(a, b)| a <= p.k && p.k <= b)
    }

    /// Number of cells the completion walk visits between levels `m_lo` and `m_hi`.
    pub(crate) fn walk_cells(&self, m_lo: i64, m_hi: i64) -> u64 {
        let width = |r: Option<(i64, i64)>| r.map_or(0, |(a, b)| (b - a + 1) as u64);
        let mut total = 0;
        if let Some((a, b)) = self.diag {
            for m in m_lo.min(0)..=0 {
                if b + m >= a && m >= m_lo {
                    total += (b + m - a + 1) as u64;
                }
            }
        }
        let mut cur = self.diag;
        for m in 1..=m_hi {
            cur = step_up_range(cur, m, self.has_seed(m));
            if m >= m_lo {
                total += width(cur);
            }
        }
        total
    }

    fn has_seed(&self, m: i64) -> bool {
        self.axis.is_some_and(|(a, b)| a <= m && m <= b)
    }
}

fn step_up_range(below: Option<(i64, i64)>, m: i64, seed: bool) -> Option<(i64, i64)> {
    if !seed {
        return None;
    }
    let Some((p, q)) = below else { return Some((m, m)) };
    let lo = if p < m && m - 1 <= q { p } else { m };
    let hi = if p <= m && m <= q { q + 1 } else { m };
    Some((lo, hi))
}

/// Values that can be carried through the completion walk: single bits for
/// sampling, functionals (bit vectors over the free coordinates) for the oracle.
pub(crate) trait F2: Clone {
    fn add(&self, other: &Self) -> Self;
}

impl F2 for bool {
    #[inline]
    fn add(&self, other: &bool) -> bool {
        self ^ other
    }
}

impl F2 for BitSet {
    fn add(&self, other: &BitSet) -> BitSet {
        let mut r = self.clone();
        r.xor_assign(other);
        r
    }
}

/// Completed values, stored level by level on `k`-intervals.
pub(crate) struct LevelGrid<V> {
    m_lo: i64,
    levels: Vec<Option<(i64, Vec<V>)>>,
}

impl<V: F2> LevelGrid<V> {
    /// Runs the walk for levels `m_lo..=m_hi`; `value(i)` is the value of the `i`-th free coordinate.
    pub(crate) fn build(free: &FreeCoordinateSet, m_lo: i64, m_hi: i64, value: impl Fn(usize) -> V) -> Self {
        let m_lo = m_lo.min(0);
        let m_hi = m_hi.max(0);
        let mut levels: Vec<Option<(i64, Vec<V>)>> = vec![None; (m_hi - m_lo + 1) as usize];
        let slot = |m: i64| (m - m_lo) as usize;

        if let Some((a, b)) = free.diag {
            levels[slot(0)] = Some((a, (0..=(b - a) as usize).map(&value).collect()));
        }
        for m in (m_lo..0).rev() {
            let next = match &levels[slot(m + 1)] {
                Some((p, up)) if up.len() >= 2 => {
                    Some((*p, (0..up.len() - 1).map(|i| up[i].add(&up[i + 1])).collect()))
                }
                _ => None,
            };
            levels[slot(m)] = next;
        }
        let diag_len = free.diag_len();
        for m in 1..=m_hi {
            if !free.has_seed(m) {
                continue;
            }
            let below = levels[slot(m - 1)].as_ref().map(|(p, v)| (*p, *p + v.len() as i64 - 1));
            let (lo, hi) = step_up_range(below, m, true).unwrap();
            let seed_idx = diag_len + (m - free.axis.unwrap().0) as usize;
            let mut vals: Vec<Option<V>> = vec![None; (hi - lo + 1) as usize];
            vals[(m - lo) as usize] = Some(value(seed_idx));
            if let Some((p, below_vals)) = &levels[slot(m - 1)] {
                let at = |k: i64| &below_vals[(k - p) as usize];
                for j in (lo..m).rev() {
                    let v = at(j).add(vals[(j + 1 - lo) as usize].as_ref().unwrap());
                    vals[(j - lo) as usize] = Some(v);
                }
                for j in (m + 1)..=hi {
                    let v = at(j - 1).add(vals[(j - 1 - lo) as usize].as_ref().unwrap());
                    vals[(j - lo) as usize] = Some(v);
                }
            }
            levels[slot(m)] = Some((lo, vals.into_iter().map(Option::unwrap).collect()));
        }
        Self { m_lo, levels }
    }

    pub(crate) fn get(&self, p: Position) -> Option<&V> {
        let m = p.level();
        if m < self.m_lo {
            return None;
        }
        let (lo, vals) = self.levels.get((m - self.m_lo) as usize)?.as_ref()?;
        if p.k < *lo {
            return None;
        }
        vals.get((p.k - lo) as usize)
    }
}

/// The unique rule-satisfying patch on `target` with the given free values.
///
/// `values` follows the order of [`FreeCoordinateSet::coordinates`].
pub fn complete_from_free(free: &FreeCoordinateSet, values: &[bool], target: &Geometry) -> Result<Patch> {
    if values.len() != free.len() {
        return Err(Error::CellCountMismatch { expected: free.len(), got: values.len() });
    }
    let (m_lo, m_hi) = target.level_range();
    let grid = LevelGrid::build(free, m_lo, m_hi, |i| values[i]);
    if let Some(p) = target.cells().find(|&p| grid.get(p).is_none()) {
        return Err(Error::InsufficientFreeSet(p));
    }
    Ok(Patch::from_fn_unchecked(target.clone(), |p| *grid.get(p).unwrap()))
}

/// Linear functionals of cells over the free coordinates of a fixed set.
pub struct Functionals {
    free: FreeCoordinateSet,
    grid: LevelGrid<BitSet>,
}

impl Functionals {
    /// Functionals of every cell the walk reaches between levels `m_lo` and `m_hi`.
    pub fn new(free: FreeCoordinateSet, m_lo: i64, m_hi: i64) -> Self {
        let n = free.len();
        let grid = LevelGrid::build(&free, m_lo, m_hi, |i| BitSet::unit(n, i));
        Self { free, grid }
    }

    /// Functionals for the minimal free set covering `cells`.
    pub fn covering(cells: &[Position]) -> Self {
        let free = FreeCoordinateSet::covering(cells.iter().copied());
        let m_lo = cells.iter().map(|p| p.level()).min().unwrap_or(0);
        let m_hi = cells.iter().map(|p| p.level()).max().unwrap_or(0);
        Self::new(free, m_lo, m_hi)
    }

    pub fn free(&self) -> &FreeCoordinateSet {
        &self.free
    }

    pub fn get(&self, p: Position) -> Result<&BitSet> {
        self.grid.get(p).ok_or(Error::InsufficientFreeSet(p))
    }
}

/// Free coordinates whose F₂-sum equals the value of cell `p`.
pub fn cell_functional(p: Position, free: &FreeCoordinateSet) -> Result<Vec<Position>> {
    let f = Functionals::new(free.clone(), p.level(), p.level());
    let support = f.get(p)?;
    let coords: Vec<Position> = free.coordinates().collect();
    Ok(support.iter_ones().map(|i| coords[i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pos(k: i64, l: i64) -> Position {
        Position::new(k, l)
    }

    #[test]
    fn zero_values_give_zero_patch() {
        let g = Geometry::band(-4..=6, -5..=5).unwrap();
        let free = FreeCoordinateSet::minimal_for(&g);
        let p = complete_from_free(&free, &vec![false; free.len()], &g).unwrap();
        assert_eq!(p.count_ones(), 0);
    }

    #[test]
    fn one_rule_application() {
        let free = FreeCoordinateSet::new(0..=1, 1..=1).unwrap();
        // coordinates: (0,0), (1,-1), (1,0)
        let target = Geometry::from_cells([pos(0, 0), pos(1, 0), pos(0, 1)]).unwrap();
        let p = complete_from_free(&free, &[true, false, true], &target).unwrap();
        assert!(p.bit(pos(0, 0)));
        assert!(p.bit(pos(1, 0)));
        assert!(!p.bit(pos(0, 1)));
    }

    #[test]
    fn functional_examples() {
        let free = FreeCoordinateSet::new(-3..=3, 1..=3).unwrap();
        assert_eq!(cell_functional(pos(0, 0), &free).unwrap(), vec![pos(0, 0)]);
        assert_eq!(cell_functional(pos(0, 1), &free).unwrap(), vec![pos(0, 0), pos(1, 0)]);
    }

    #[test]
    fn upward_cells_need_the_level_zero_cells_up_to_the_seed() {
        // (-1,2) is at level 1, cross -3; it depends on (0,0) even though 0 lies
        // outside the downward cone [c - m, c + m] of its cross.
        let f = cell_functional(pos(-1, 2), &FreeCoordinateSet::new(-3..=3, 1..=2).unwrap()).unwrap();
        assert_eq!(f, vec![pos(-1, 1), pos(0, 0), pos(1, 0)]);
        let narrow = FreeCoordinateSet::new(-2..=-1, 1..=1).unwrap();
        assert!(!narrow.determines(pos(-1, 2)));
        assert!(FreeCoordinateSet::covering([pos(-1, 2)]).determines(pos(-1, 2)));
    }

    #[test]
    fn insufficient_free_set_reports_first_cell() {
        let free = FreeCoordinateSet::new(0..=0, 1..=1).unwrap();
        let g = Geometry::triangle(pos(0, 0), 2);
        assert_eq!(
            complete_from_free(&free, &[false, false], &g).unwrap_err(),
            Error::InsufficientFreeSet(pos(2, 0))
        );
    }

    #[test]
    fn triangle_at_origin_is_its_bottom_row() {
        let free = FreeCoordinateSet::minimal_for(&Geometry::triangle(Position::ORIGIN, 7));
        assert_eq!(free.diag(), Some((0, 0)));
        assert_eq!(free.axis(), Some((1, 7)));
    }

    fn random_geometry() -> impl Strategy<Value = Geometry> {
        prop_oneof![
            (-6i64..6, -6i64..6, 0u32..8).prop_map(|(k, l, n)| Geometry::triangle(pos(k, l), n)),
            (-6i64..6, 0i64..8, -8i64..8, 1i64..8)
                .prop_map(|(m, dm, c, dc)| Geometry::band(m..=m + dm, c..=c + dc).unwrap()),
            (-6i64..6, -6i64..6, 1u32..7, 1u32..7).prop_map(|(k, l, w, h)| Geometry::square_at(pos(k, l), w, h)),
        ]
    }

    proptest! {
        #[test]
        fn completion_reads_back_free_values(g in random_geometry(), seed in any::<u64>()) {
            let free = FreeCoordinateSet::minimal_for(&g);
            prop_assume!(!free.is_empty());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let values: Vec<bool> = (0..free.len()).map(|_| rng.random()).collect();
            let p = complete_from_free(&free, &values, &g).unwrap();
            prop_assert!(p.rule_check().is_ok());
            // completing onto the free coordinates themselves is the identity
            let coords = Geometry::from_cells(free.coordinates()).unwrap();
            let back = complete_from_free(&free, &values, &coords).unwrap();
            for (c, v) in free.coordinates().zip(&values) {
                prop_assert_eq!(back.bit(c), *v);
            }
        }

        #[test]
        fn completion_is_linear(g in random_geometry(), s1 in any::<u64>(), s2 in any::<u64>()) {
            let free = FreeCoordinateSet::minimal_for(&g);
            let mut r1 = ChaCha8Rng::seed_from_u64(s1);
            let mut r2 = ChaCha8Rng::seed_from_u64(s2);
            let u: Vec<bool> = (0..free.len()).map(|_| r1.random()).collect();
            let v: Vec<bool> = (0..free.len()).map(|_| r2.random()).collect();
            let uv: Vec<bool> = u.iter().zip(&v).map(|(a, b)| a ^ b).collect();
            let x = complete_from_free(&free, &u, &g).unwrap();
            let y = complete_from_free(&free, &v, &g).unwrap();
            let z = complete_from_free(&free, &uv, &g).unwrap();
            prop_assert_eq!(x.xor(&y).unwrap(), z);
        }

        #[test]
        fn minimal_cover_is_tight(g in random_geometry()) {
            let free = FreeCoordinateSet::minimal_for(&g);
            prop_assert!(g.cells().all(|p| free.determines(p)));
            // shrinking any end of either interval loses some cell
            #[allow(clippy::reversed_empty_ranges)]
            let shrunk = |d: Option<(i64, i64)>, x: Option<(i64, i64)>| {
                // `1..=0` is how an empty interval is spelled
                let d = d.map_or(1..=0, |(a, b)| a..=b);
                let x = x.map_or(1..=0, |(a, b)| a..=b);
                FreeCoordinateSet::new(d, x).unwrap()
            };
            if let Some((a, b)) = free.diag() {
                for cand in [shrunk(Some((a + 1, b)), free.axis()), shrunk(Some((a, b - 1)), free.axis())] {
                    prop_assert!(g.cells().any(|p| !cand.determines(p)));
                }
            }
            if let Some((a, b)) = free.axis() {
                for cand in [shrunk(free.diag(), Some((a + 1, b))), shrunk(free.diag(), Some((a, b - 1)))] {
                    prop_assert!(g.cells().any(|p| !cand.determines(p)));
                }
            }
        }

        #[test]
        fn functional_evaluates_cells(k in -8i64..8, l in -8i64..8, seed in any::<u64>()) {
            let p = pos(k, l);
            prop_assume!(p.level() <= 8);
            let free = FreeCoordinateSet::covering([p]);
            let support = cell_functional(p, &free).unwrap();
            let coords: Vec<Position> = free.coordinates().collect();
            let target = Geometry::from_cells([p]).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..100 {
                let values: Vec<bool> = (0..free.len()).map(|_| rng.random()).collect();
                let x = complete_from_free(&free, &values, &target).unwrap();
                let eval = support.iter().fold(false, |acc, c| acc ^ values[coords.iter().position(|q| q == c).unwrap()]);
                prop_assert_eq!(x.bit(p), eval);
            }
        }
    }
}
