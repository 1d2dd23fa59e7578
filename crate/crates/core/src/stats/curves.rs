//! Monte-Carlo evidence curves: merge rates, deep structure on a band, and
//! triangle statistics against the deterministic budgets.
//!
//! Aggregation uses integer counters, so results are independent of the
//! thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{bounds, experiment, Sampler};
use crate::lattice::{Geometry, Patch, Position};
use crate::rng::derive_seed;
use crate::sigma::{components, meet_level};

/// Fraction `hits / total` with its binomial standard error.
fn rate(hits: u64, total: u64) -> (f64, f64) {
    if total == 0 {
        return (0.0, 0.0);
    }
    let p = hits as f64 / total as f64;
    (p, (p * (1.0 - p) / total as f64).sqrt())
}

/// One height of a [`MergeCurve`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergePoint {
    pub n: u32,
    /// Samples with both endpoints in Y.
    pub pairs: u64,
    /// Pairs whose trajectories coincide within `n` steps.
    pub merged: u64,
    pub rate: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergeCurve {
    pub sampler: String,
    pub h: i64,
    pub trials: u64,
    pub seed: u64,
    pub points: Vec<MergePoint>,
}

impl MergeCurve {
    pub fn rate_at(&self, n: u32) -> Option<f64> {
        self.points.iter().find(|p| p.n == n).map(|p| p.rate)
    }

    pub fn is_non_decreasing(&self) -> bool {
        self.points.windows(2).all(|w| w[0].merged <= w[1].merged)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("h,n,pairs,merged,rate,stderr\n");
        for p in &self.points {
            s += &format!("{},{},{},{},{},{}\n", self.h, p.n, p.pairs, p.merged, p.rate, p.stderr);
        }
        s
    }
}

/// Merge rate of the trajectories from `(0,0)` and `(h,-h)` within height `n`,
/// for every `n` in `nlist`, conditioned on both cells being in Y.
///
/// Each sample covers the triangle based at `(0,-h)` of side `max(nlist) + h`,
/// which holds both trajectories up to level `max(nlist)`.
pub fn merge_rate_curve(sampler: &dyn Sampler, h: i64, nlist: &[u32], trials: u64, seed: u64) -> MergeCurve {
    let h = h.abs();
    let mut nlist = nlist.to_vec();
    nlist.sort_unstable();
    nlist.dedup();
    let nmax = nlist.last().copied().unwrap_or(0);
    let window = Geometry::triangle(Position::new(0, -h), nmax + h as u32);
    let b = Position::new(h, -h);
    let meets: Vec<Option<Option<usize>>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let x = sampler.sample(&window, derive_seed(seed, experiment::MERGE, i));
            if !(x.bit(Position::ORIGIN) && x.bit(b)) {
                return None;
            }
            Some(meet_level(&x, Position::ORIGIN, b).expect("both endpoints are Y-cells in the window"))
        })
        .collect();
    let pairs = meets.iter().flatten().count() as u64;
    let points = nlist
        .iter()
        .map(|&n| {
            let merged = meets.iter().flatten().filter(|m| m.is_some_and(|s| s <= n as usize)).count() as u64;
            let (rate, stderr) = rate(merged, pairs);
            MergePoint { n, pairs, merged, rate, stderr }
        })
        .collect();
    MergeCurve { sampler: sampler.id(), h, trials, seed, points }
}

/// Parameters of [`deep_structure_audit`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeepParams {
    /// The scan line holds the level-0 cells `(k,-k)` with `|k| ≤ width`.
    pub width: u32,
    pub depths: Vec<u32>,
    pub trials: u64,
}

impl Default for DeepParams {
    fn default() -> Self {
        Self { width: 64, depths: vec![16, 64], trials: 1000 }
    }
}

/// Deep-structure statistics at one depth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeepPoint {
    pub d: u32,
    /// Scan-line cells over all samples.
    pub cells: u64,
    pub y_cells: u64,
    pub deep: u64,
    /// Deep cells with exactly one deep σ-antecedent.
    pub unique: u64,
    /// Deep cells with two deep σ-antecedents.
    pub deep2: u64,
    /// Samples with deep hits on both sides of `(0,0)`.
    pub both_sides: u64,
    pub density: f64,
    pub unique_fraction: f64,
    pub deep2_fraction: f64,
    pub both_sides_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeepStructure {
    pub sampler: String,
    pub params: DeepParams,
    pub seed: u64,
    pub points: Vec<DeepPoint>,
}

impl DeepStructure {
    pub fn at(&self, d: u32) -> Option<&DeepPoint> {
        self.points.iter().find(|p| p.d == d)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("d,cells,y_cells,deep,unique,deep2,both_sides,density,unique_fraction,deep2_fraction\n");
        for p in &self.points {
            s += &format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                p.d, p.cells, p.y_cells, p.deep, p.unique, p.deep2, p.both_sides, p.density, p.unique_fraction,
                p.deep2_fraction
            );
        }
        s
    }
}

/// Per-sample counters at one depth.
#[derive(Clone, Copy, Default)]
struct DeepCount {
    y: u64,
    deep: u64,
    unique: u64,
    deep2: u64,
    both: u64,
}

/// Marks Y-cells of the scan line reached by σ from a Y-cell `d` levels below.
///
/// Level `m` is tracked on the cone `|cross| ≤ 2w - m`, whose σ-images stay in it.
fn scan_depth(x: &Patch, w: i64, d: i64) -> DeepCount {
    let half = |m: i64| 2 * w - m;
    // deep[m] indexed by (cross + half(m)) / 2.
    let mut prev: Vec<bool> = (-half(-d)..=half(-d))
        .step_by(2)
        .map(|c| x.bit(Position::from_level_cross(-d, c).unwrap()))
        .collect();
    let mut ante = Vec::new();
    for m in -d + 1..=0 {
        let hw = half(m);
        let mut count = vec![0u8; (hw + 1) as usize];
        for (i, &dp) in prev.iter().enumerate() {
            if !dp {
                continue;
            }
            let c = -half(m - 1) + 2 * i as i64;
            let p = Position::from_level_cross(m - 1, c).unwrap();
            let q = if x.bit(p.step(crate::lattice::Move::T)) { c + 1 } else { c - 1 };
            if q.abs() <= hw {
                count[((q + hw) / 2) as usize] += 1;
            }
        }
        prev = count.iter().map(|&c| c > 0).collect();
        ante = count;
    }
    let mut out = DeepCount::default();
    let (mut left, mut right) = (false, false);
    for (i, &a) in ante.iter().enumerate() {
        let c = -2 * w + 2 * i as i64;
        out.y += x.bit(Position::from_level_cross(0, c).unwrap()) as u64;
        match a {
            0 => continue,
            1 => out.unique += 1,
            _ => out.deep2 += 1,
        }
        out.deep += 1;
        left |= c < 0;
        right |= c > 0;
    }
    out.both = (left && right) as u64;
    out
}

/// Deep density, antecedent uniqueness and two-sided hits on the scan line,
/// with deep chains anchored `d` levels below for each `d` in `params.depths`.
///
/// One band sample per trial is shared across all depths.
pub fn deep_structure_audit(sampler: &dyn Sampler, params: DeepParams, seed: u64) -> DeepStructure {
    let w = params.width as i64;
    let dmax = params.depths.iter().copied().max().unwrap_or(1).max(1) as i64;
    let band = Geometry::band(-dmax..=0, -2 * w - dmax - 1..=2 * w + dmax + 1).expect("non-empty band");
    let depths: Vec<i64> = params.depths.iter().map(|&d| d.max(1) as i64).collect();
    let totals = (0..params.trials)
        .into_par_iter()
        .map(|i| {
            let x = sampler.sample(&band, derive_seed(seed, experiment::DEEP, i));
            depths.iter().map(|&d| scan_depth(&x, w, d)).collect::<Vec<_>>()
        })
        .reduce(
            || vec![DeepCount::default(); depths.len()],
            |mut a, b| {
                for (s, t) in a.iter_mut().zip(b) {
                    s.y += t.y;
                    s.deep += t.deep;
                    s.unique += t.unique;
                    s.deep2 += t.deep2;
                    s.both += t.both;
                }
                a
            },
        );
    let cells = params.trials * (2 * w as u64 + 1);
    let points = params
        .depths
        .iter()
        .zip(totals)
        .map(|(&d, t)| DeepPoint {
            d,
            cells,
            y_cells: t.y,
            deep: t.deep,
            unique: t.unique,
            deep2: t.deep2,
            both_sides: t.both,
            density: rate(t.deep, cells).0,
            unique_fraction: rate(t.unique, t.deep).0,
            deep2_fraction: rate(t.deep2, t.deep).0,
            both_sides_fraction: rate(t.both, params.trials).0,
        })
        .collect();
    DeepStructure { sampler: sampler.id(), params, seed, points }
}

/// Triangle statistics at one side length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrianglePoint {
    pub n: u32,
    pub samples: u64,
    /// `card Δₙ` summed over samples.
    pub cells: u64,
    pub deep2: u64,
    pub deep2_interior: u64,
    pub components: u64,
    /// Samples failing the per-component inequality, or whose partition
    /// families are malformed or incompatible.
    pub lemma22_failures: u64,
    /// Samples over the interior `3n - 2` budget.
    pub interior_budget_failures: u64,
    /// Samples over the full-triangle `5n + 1` budget (reported only).
    pub full_budget_failures: u64,
    pub extremal_failures: u64,
    pub deep2_density: f64,
    pub mean_components: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangleSuite {
    pub sampler: String,
    pub trials: u64,
    pub seed: u64,
    pub points: Vec<TrianglePoint>,
}

impl TriangleSuite {
    pub fn at(&self, n: u32) -> Option<&TrianglePoint> {
        self.points.iter().find(|p| p.n == n)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "n,samples,cells,deep2,deep2_interior,components,lemma22_failures,interior_budget_failures,full_budget_failures,extremal_failures,deep2_density,mean_components\n",
        );
        for p in &self.points {
            s += &format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                p.n, p.samples, p.cells, p.deep2, p.deep2_interior, p.components, p.lemma22_failures,
                p.interior_budget_failures,
                p.full_budget_failures, p.extremal_failures, p.deep2_density, p.mean_components
            );
        }
        s
    }
}

#[derive(Clone, Copy, Default)]
struct TriCount {
    deep2: u64,
    interior: u64,
    components: u64,
    lemma: u64,
    interior_budget: u64,
    full: u64,
    extremal: u64,
}

/// Runs the triangle audits on `trials` samples of `Δₙ` for each `n`.
pub fn triangle_suite(sampler: &dyn Sampler, ns: &[u32], trials: u64, seed: u64) -> TriangleSuite {
    let points = ns
        .iter()
        .map(|&n| {
            let g = Geometry::triangle(Position::ORIGIN, n);
            let exp = (experiment::TRIANGLE << 32) | n as u64;
            let t = (0..trials)
                .into_par_iter()
                .map(|i| {
                    let x = sampler.sample(&g, derive_seed(seed, exp, i));
                    let table = components(&x).expect("triangle geometry");
                    let lemma = bounds::lemma22_audit(&x);
                    let m = table.marking();
                    let full = m.deep2_count() as u64;
                    TriCount {
                        deep2: full,
                        interior: m.deep2_interior_count() as u64,
                        components: table.len() as u64,
                        lemma: lemma.as_ref().map_or(true, |r| !r.pass) as u64,
                        interior_budget: lemma.as_ref().map_or(true, |r| !r.pass_budget) as u64,
                        full: (n >= 1 && full > 5 * n as u64 + 1) as u64,
                        extremal: !bounds::extremal_audit(&x).expect("triangle geometry").pass as u64,
                    }
                })
                .reduce(TriCount::default, |a, b| TriCount {
                    deep2: a.deep2 + b.deep2,
                    interior: a.interior + b.interior,
                    components: a.components + b.components,
                    lemma: a.lemma + b.lemma,
                    interior_budget: a.interior_budget + b.interior_budget,
                    full: a.full + b.full,
                    extremal: a.extremal + b.extremal,
                });
            let cells = trials * g.len() as u64;
            TrianglePoint {
                n,
                samples: trials,
                cells,
                deep2: t.deep2,
                deep2_interior: t.interior,
                components: t.components,
                lemma22_failures: t.lemma,
                interior_budget_failures: t.interior_budget,
                full_budget_failures: t.full,
                extremal_failures: t.extremal,
                deep2_density: rate(t.deep2, cells).0,
                mean_components: if trials == 0 { 0.0 } else { t.components as f64 / trials as f64 },
            }
        })
        .collect();
    TriangleSuite { sampler: sampler.id(), trials, seed, points }
}
