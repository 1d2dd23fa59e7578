//! Exact Haar sampling and the F₂-rank cylinder oracle.
//!
//! Under the Haar measure the cells of the anti-diagonal `(k, -k)` and of the
//! positive axis `(k, 0), k ≥ 1` are independent fair bits and every other cell
//! is an F₂-linear functional of them. Samplers draw those bits; the oracle
//! solves the affine system of a cylinder event and returns `2^-rank` or 0.

use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::bits::affine_rank;
use crate::error::{Error, Result};
use crate::lattice::{complete_from_free, FreeCoordinateSet, Functionals, Geometry, Patch, Position};
use crate::rng::{rng_from_seed, SimRng};

/// Draws a Haar-distributed patch on `target`. Deterministic in `seed`.
///
/// Uses the free-coordinate completion unless its walk is much larger than
/// the level-by-level construction, which happens on tall thin windows. Both
/// routes produce the exact restriction of the Haar measure.
pub fn sample_haar(target: &Geometry, seed: u64) -> Patch {
    let mut rng = rng_from_seed(seed);
    sample_haar_with(target, &mut rng)
}

pub(crate) fn sample_haar_with(target: &Geometry, rng: &mut SimRng) -> Patch {
    let anchor = target.anchor();
    let moved = target.translate(-anchor);
    let free = FreeCoordinateSet::minimal_for(&moved);
    let (m_lo, m_hi) = moved.level_range();
    let plan = LevelPlan::new(target);
    if free.walk_cells(m_lo, m_hi) <= 4 * plan.cells() {
        let values = random_bits(rng, free.len());
        let patch = complete_from_free(&free, &values, &moved).expect("minimal free set covers the target");
        patch.shift_view(-anchor.k, -anchor.l)
    } else {
        plan.sample(target, rng)
    }
}

/// Free-coordinate route: fair bits on the minimal free set of the target
/// translated so that its anchor sits at the origin, then completion.
pub fn sample_haar_free(target: &Geometry, seed: u64) -> Patch {
    let mut rng = rng_from_seed(seed);
    let anchor = target.anchor();
    let moved = target.translate(-anchor);
    let free = FreeCoordinateSet::minimal_for(&moved);
    let values = random_bits(&mut rng, free.len());
    complete_from_free(&free, &values, &moved)
        .expect("minimal free set covers the target")
        .shift_view(-anchor.k, -anchor.l)
}

/// Level-by-level route: fair bits on the lowest level, then one fresh bit per
/// level at the left end, the rest forced by `x(k+1, l) = x(k, l) + x(k, l+1)`.
pub fn sample_haar_levelwise(target: &Geometry, seed: u64) -> Patch {
    let mut rng = rng_from_seed(seed);
    LevelPlan::new(target).sample(target, &mut rng)
}

fn random_bits(rng: &mut impl RngCore, n: usize) -> Vec<bool> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let w = rng.next_u64();
        let take = (n - out.len()).min(64);
        out.extend((0..take).map(|i| (w >> i) & 1 == 1));
    }
    out
}

/// Per-level `k`-intervals that the upward walk must fill.
struct LevelPlan {
    m_lo: i64,
    need: Vec<Option<(i64, i64)>>,
}

impl LevelPlan {
    fn new(target: &Geometry) -> Self {
        let (m_lo, m_hi) = target.level_range();
        let mut need: Vec<Option<(i64, i64)>> = vec![None; (m_hi - m_lo + 1) as usize];
        let widen = |slot: &mut Option<(i64, i64)>, lo: i64, hi: i64| {
            *slot = Some(match *slot {
                None => (lo, hi),
                Some((a, b)) => (a.min(lo), b.max(hi)),
            });
        };
        for r in target.rows() {
            // Along a row the level runs over a contiguous range, one cell each.
            for k in r.k_lo..=r.k_hi {
                widen(&mut need[(k + r.l - m_lo) as usize], k, k);
            }
        }
        for i in (0..need.len().saturating_sub(1)).rev() {
            if let Some((lo, hi)) = need[i + 1] {
                if hi > lo {
                    widen(&mut need[i], lo, hi - 1);
                }
            }
        }
        Self { m_lo, need }
    }

    fn cells(&self) -> u64 {
        self.need.iter().flatten().map(|(a, b)| (b - a + 1) as u64).sum()
    }

    fn sample(&self, target: &Geometry, rng: &mut impl RngCore) -> Patch {
        let mut levels: Vec<Option<(i64, Vec<bool>)>> = Vec::with_capacity(self.need.len());
        for (i, need) in self.need.iter().enumerate() {
            let Some((lo, hi)) = *need else {
                levels.push(None);
                continue;
            };
            let width = (hi - lo + 1) as usize;
            let vals = match levels.last().and_then(Option::as_ref) {
                Some((below_lo, below)) if i > 0 => {
                    let mut v = Vec::with_capacity(width);
                    v.push(rng.next_u64() & 1 == 1);
                    for k in lo..hi {
                        v.push(below[(k - below_lo) as usize] ^ v[(k - lo) as usize]);
                    }
                    v
                }
                _ if i == 0 => random_bits(rng, width),
                _ => {
                    debug_assert_eq!(width, 1);
                    random_bits(rng, 1)
                }
            };
            levels.push(Some((lo, vals)));
        }
        let m_lo = self.m_lo;
        Patch::from_fn_unchecked(target.clone(), |p| {
            let (lo, vals) = levels[(p.level() - m_lo) as usize].as_ref().unwrap();
            vals[(p.k - lo) as usize]
        })
    }
}

/// A finite set of cell constraints `x(p) = b`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CylinderEvent {
    constraints: Vec<(Position, bool)>,
}

impl CylinderEvent {
    pub fn new(constraints: impl IntoIterator<Item = (Position, bool)>) -> Result<Self> {
        let mut constraints: Vec<(Position, bool)> = constraints.into_iter().collect();
        constraints.sort();
        for w in constraints.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::DuplicatePosition(w[0].0));
            }
        }
        Ok(Self { constraints })
    }

    /// `{x(p) = 1}`.
    pub fn cell(p: Position) -> Self {
        Self { constraints: vec![(p, true)] }
    }

    pub fn constraints(&self) -> &[(Position, bool)] {
        &self.constraints
    }

    pub fn positions(&self) -> impl Iterator<Item = Position> + '_ {
        self.constraints.iter().map(|c| c.0)
    }

    pub fn translate(&self, d: Position) -> Self {
        Self { constraints: self.constraints.iter().map(|&(p, b)| (p + d, b)).collect() }
    }

    /// Conjunction of two events; `None` if they constrain a cell to different values.
    pub fn and(&self, other: &CylinderEvent) -> Option<CylinderEvent> {
        let mut all = self.constraints.clone();
        for &(p, b) in &other.constraints {
            match all.iter().find(|c| c.0 == p) {
                Some(&(_, b0)) if b0 != b => return None,
                Some(_) => {}
                None => all.push((p, b)),
            }
        }
        all.sort();
        Some(Self { constraints: all })
    }

    /// Whether `x` satisfies every constraint; `None` if some cell is outside the window.
    pub fn holds(&self, x: &Patch) -> Option<bool> {
        let mut ok = true;
        for &(p, b) in &self.constraints {
            ok &= x.get(p)? == b;
        }
        Some(ok)
    }
}

/// Parses `k,l=b` pairs separated by `;`, e.g. `0,0=1;5,7=1`.
impl FromStr for CylinderEvent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut cs = Vec::new();
        for part in s.split(';').map(str::trim).filter(|t| !t.is_empty()) {
            let (pos, val) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected `k,l=b`, got `{part}`")))?;
            let b = match val.trim() {
                "0" => false,
                "1" => true,
                v => return Err(Error::Parse(format!("bit must be 0 or 1, got `{v}`"))),
            };
            cs.push((pos.parse()?, b));
        }
        if cs.is_empty() {
            return Err(Error::Parse("empty event".into()));
        }
        Self::new(cs)
    }
}

impl fmt::Display for CylinderEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (p, b)) in self.constraints.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{},{}={}", p.k, p.l, *b as u8)?;
        }
        Ok(())
    }
}

/// Zero or `2^-exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicProbability {
    pub zero: bool,
    pub exponent: u32,
}

impl DyadicProbability {
    pub const ZERO: Self = Self { zero: true, exponent: 0 };
    pub const ONE: Self = Self { zero: false, exponent: 0 };

    pub fn pow2(exponent: u32) -> Self {
        Self { zero: false, exponent }
    }

    pub fn to_f64(self) -> f64 {
        if self.zero {
            0.0
        } else {
            (-(self.exponent as f64)).exp2()
        }
    }

    pub fn to_dyadic(self) -> Dyadic {
        if self.zero {
            Dyadic::ZERO
        } else {
            Dyadic::new(1, self.exponent)
        }
    }
}

impl fmt::Display for DyadicProbability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.zero {
            f.write_str("0")
        } else {
            write!(f, "2^-{}", self.exponent)
        }
    }
}

/// An exact dyadic rational `num / 2^exp`, kept in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dyadic {
    pub num: i128,
    pub exp: u32,
}

impl Dyadic {
    pub const ZERO: Self = Self { num: 0, exp: 0 };

    pub fn new(mut num: i128, mut exp: u32) -> Self {
        if num == 0 {
            return Self::ZERO;
        }
        while exp > 0 && num % 2 == 0 {
            num /= 2;
            exp -= 1;
        }
        Self { num, exp }
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 * (-(self.exp as f64)).exp2()
    }
}

impl std::ops::Sub for Dyadic {
    type Output = Dyadic;
    fn sub(self, o: Dyadic) -> Dyadic {
        let e = self.exp.max(o.exp);
        Dyadic::new((self.num << (e - self.exp)) - (o.num << (e - o.exp)), e)
    }
}

impl std::ops::Add for Dyadic {
    type Output = Dyadic;
    fn add(self, o: Dyadic) -> Dyadic {
        let e = self.exp.max(o.exp);
        Dyadic::new((self.num << (e - self.exp)) + (o.num << (e - o.exp)), e)
    }
}

impl std::ops::Mul for Dyadic {
    type Output = Dyadic;
    fn mul(self, o: Dyadic) -> Dyadic {
        Dyadic::new(self.num * o.num, self.exp + o.exp)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.num, self.exp) {
            (0, _) => f.write_str("0"),
            (n, 0) => write!(f, "{n}"),
            (n, e) => write!(f, "{n}/2^{e}"),
        }
    }
}

/// Haar probability of `event`, computed exactly by F₂ elimination.
pub fn exact_probability(event: &CylinderEvent) -> Result<DyadicProbability> {
    let cells: Vec<Position> = event.positions().collect();
    if cells.is_empty() {
        return Ok(DyadicProbability::ONE);
    }
    // Translation invariance: solve the event moved to a canonical anchor.
    let anchor = cells
        .iter()
        .copied()
        .min_by_key(|p| (p.level(), std::cmp::Reverse(p.k)))
        .unwrap();
    let moved: Vec<Position> = cells.iter().map(|&p| p - anchor).collect();
    let f = Functionals::covering(&moved);
    let mut rows = Vec::with_capacity(moved.len());
    for (p, &(_, b)) in moved.iter().zip(event.constraints()) {
        rows.push((f.get(*p)?.clone(), b));
    }
    Ok(match affine_rank(&rows) {
        None => DyadicProbability::ZERO,
        Some(r) => DyadicProbability::pow2(r as u32),
    })
}

/// Whether `{x(p) = 1}` and `{x(q) = 1}` are independent under Haar.
pub fn independence_check(p: Position, q: Position) -> bool {
    let joint = CylinderEvent::new([(p, true), (q, true)]).expect("p and q are distinct");
    let (Ok(pq), Ok(pp), Ok(qq)) = (
        exact_probability(&joint),
        exact_probability(&CylinderEvent::cell(p)),
        exact_probability(&CylinderEvent::cell(q)),
    ) else {
        return false;
    };
    pq.to_dyadic() == pp.to_dyadic() * qq.to_dyadic()
}

/// One line of [`correlation_decay_table`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub shift: (i64, i64),
    /// `μ(A ∩ T^k S^l B) - μ(A) μ(B)`.
    pub difference: Dyadic,
}

/// Exact covariances between `A` and translates of `B`.
///
/// `T^k S^l B` constrains the cells of `B` moved by `(-k, -l)`.
pub fn correlation_decay_table(
    a: &CylinderEvent,
    b: &CylinderEvent,
    shifts: &[(i64, i64)],
) -> Result<Vec<CorrelationRow>> {
    let pa = exact_probability(a)?.to_dyadic();
    let pb = exact_probability(b)?.to_dyadic();
    let product = pa * pb;
    shifts
        .iter()
        .map(|&(k, l)| {
            let moved = b.translate(Position::new(-k, -l));
            let joint = match a.and(&moved) {
                Some(e) => exact_probability(&e)?.to_dyadic(),
                None => Dyadic::ZERO,
            };
            Ok(CorrelationRow { shift: (k, l), difference: joint - product })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pos(k: i64, l: i64) -> Position {
        Position::new(k, l)
    }

    fn ev(s: &str) -> CylinderEvent {
        s.parse().unwrap()
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(exact_probability(&ev("0,0=1")).unwrap().to_string(), "2^-1");
        assert_eq!(exact_probability(&ev("0,0=1;1,0=1;0,1=1")).unwrap().to_string(), "0");
        assert_eq!(exact_probability(&ev("0,0=1;5,7=1")).unwrap().to_string(), "2^-2");
    }

    #[test]
    fn two_functionals_have_rank_two() {
        // Explicit elimination on the two functionals behind `0,0=1;5,7=1`.
        let f = Functionals::covering(&[pos(0, 0), pos(5, 7)]);
        let a = f.get(pos(0, 0)).unwrap().clone();
        let b = f.get(pos(5, 7)).unwrap().clone();
        assert!(!a.is_zero() && !b.is_zero() && a != b);
        assert_eq!(crate::bits::rank(&[a, b]), 2);
    }

    #[test]
    fn event_syntax() {
        let e = ev("(0,0)=1; 5,7=0");
        assert_eq!(e.to_string(), "0,0=1;5,7=0");
        assert!(matches!("0,0=1;0,0=0".parse::<CylinderEvent>(), Err(Error::DuplicatePosition(_))));
        assert!("0,0=2".parse::<CylinderEvent>().is_err());
        assert!("".parse::<CylinderEvent>().is_err());
    }

    #[test]
    fn complementary_events_sum_to_one() {
        for k in -4..4 {
            for l in -4..4 {
                let p0 = exact_probability(&CylinderEvent::new([(pos(k, l), false)]).unwrap()).unwrap();
                let p1 = exact_probability(&CylinderEvent::new([(pos(k, l), true)]).unwrap()).unwrap();
                assert_eq!(p0.to_dyadic(), Dyadic::new(1, 0) - p1.to_dyadic());
            }
        }
    }

    #[test]
    fn translation_invariance() {
        let e = ev("0,0=1;1,0=0;2,1=1;-1,3=1");
        let p = exact_probability(&e).unwrap();
        for a in -5..=5 {
            for b in -5..=5 {
                assert_eq!(exact_probability(&e.translate(pos(a, b))).unwrap(), p);
            }
        }
    }

    #[test]
    fn independence_examples() {
        assert!(independence_check(pos(0, 0), pos(1, 0)));
        assert!(independence_check(pos(0, 0), pos(0, 1)));
    }

    #[test]
    fn correlation_examples() {
        let a = CylinderEvent::cell(Position::ORIGIN);
        let rows = correlation_decay_table(&a, &a, &[(0, 0), (1, 0)]).unwrap();
        assert_eq!(rows[0].difference, Dyadic::new(1, 2));
        assert_eq!(rows[1].difference, Dyadic::ZERO);
    }

    #[test]
    fn dyadic_arithmetic() {
        assert_eq!(Dyadic::new(1, 1) - Dyadic::new(1, 2), Dyadic::new(1, 2));
        assert_eq!(Dyadic::new(4, 3), Dyadic::new(1, 1));
        assert_eq!(Dyadic::new(3, 2).to_string(), "3/2^2");
    }

    #[test]
    fn samplers_are_deterministic_and_valid() {
        let geoms = [
            Geometry::triangle(pos(3, -2), 9),
            Geometry::band(-5..=40, -3..=3).unwrap(),
            Geometry::square_at(pos(-4, 2), 7, 5),
        ];
        for g in &geoms {
            for seed in 0..20 {
                for p in [sample_haar(g, seed), sample_haar_free(g, seed), sample_haar_levelwise(g, seed)] {
                    assert!(p.rule_check().is_ok());
                    assert_eq!(p.geometry(), g);
                }
                assert_eq!(sample_haar(g, seed), sample_haar(g, seed));
            }
        }
    }

    #[test]
    fn level_plan_is_tight_on_triangles() {
        // A triangle has as many degrees of freedom as its bottom row.
        let g = Geometry::triangle(pos(0, 0), 10);
        let plan = LevelPlan::new(&g);
        assert_eq!(plan.need.iter().flatten().count(), 11);
        assert_eq!(plan.need[0], Some((0, 0)));
    }

    /// Both routes agree with the oracle on every 3-cell event of a small window.
    #[test]
    fn routes_match_oracle_on_small_window() {
        let g = Geometry::square_at(pos(-1, -1), 3, 3);
        let cells: Vec<Position> = g.cells().collect();
        const N: u64 = 20_000;
        let samples: Vec<[Patch; 2]> =
            (0..N).map(|s| [sample_haar_free(&g, s), sample_haar_levelwise(&g, s + N)]).collect();
        for i in 0..cells.len() {
            for j in i + 1..cells.len() {
                let e = CylinderEvent::new([(cells[i], true), (cells[j], true), (cells[(i + j) % cells.len()], false)]);
                let Ok(e) = e else { continue };
                let p = exact_probability(&e).unwrap().to_f64();
                let sd = (p * (1.0 - p) / N as f64).sqrt();
                for route in 0..2 {
                    let hits = samples.iter().filter(|s| e.holds(&s[route]).unwrap()).count();
                    let f = hits as f64 / N as f64;
                    assert!((f - p).abs() <= 4.0 * sd + 1e-12, "route {route} event {e}: {f} vs {p}");
                }
            }
        }
    }
}
