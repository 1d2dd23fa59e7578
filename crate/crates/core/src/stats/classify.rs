//! Tree/ribbon classification from finite-scale evidence.
//!
//! Tree type is evidenced by far pairs joining more often at larger heights
//! (E1) and by branch cells thinning out in triangles (E2). Ribbon type is
//! evidenced by a deep density that does not decay with depth (E3), deep cells
//! with a single deep antecedent becoming the rule (E4), deep hits on both
//! sides of the origin (E5) and far pairs that never join (E6).

use serde::{Deserialize, Serialize};

use super::curves::{deep_structure_audit, merge_rate_curve, triangle_suite};
use super::{DeepParams, DeepStructure, MergeCurve, Sampler, TriangleSuite};
use crate::error::{Error, Result};

/// Seed of the shipped classification runs.
pub const DEFAULT_SEED: u64 = 1;

/// Sample sizes and scales of the evidence suites.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Budget {
    /// Anti-diagonal offset of the near merge pair.
    pub h_near: i64,
    /// Anti-diagonal offset of the far merge pair.
    pub h_far: i64,
    /// Heights of the merge curves; E1 compares the first and last.
    pub merge_heights: Vec<u32>,
    pub merge_trials: u64,
    /// Triangle sides; E2 compares the first and last.
    pub triangle_sides: Vec<u32>,
    pub triangle_trials: u64,
    pub deep: DeepParams,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            h_near: 4,
            h_far: 12,
            merge_heights: vec![16, 64, 256],
            merge_trials: 2000,
            triangle_sides: vec![16, 64],
            triangle_trials: 1000,
            deep: DeepParams::default(),
        }
    }
}

/// Decision thresholds of the verdict rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    /// E2 holds when the deep2 density ratio (largest side over smallest) is below this.
    pub decay: f64,
    /// E3 holds when the deep density ratio (deepest over shallowest) lies in this interval.
    pub stability: (f64, f64),
    /// Pairs with `|h|` above this count as far; `h_far` must exceed it.
    pub far: i64,
    /// E5 holds when at least this fraction of samples has deep hits on both sides.
    pub both_sides: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { decay: 0.5, stability: (0.8, 1.25), far: 10, both_sides: 0.9 }
    }
}

/// The evidence curves and the six criteria they support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub merge_near: MergeCurve,
    pub merge_far: MergeCurve,
    pub triangles: TriangleSuite,
    pub deep: DeepStructure,
    pub e1_merge_trend: bool,
    pub e2_deep2_decay: bool,
    pub e3_deep_stable: bool,
    pub e4_unique_trend: bool,
    pub e5_both_sides: bool,
    pub e6_far_separation: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    TreeType,
    RibbonType,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationVerdict {
    pub sampler: String,
    pub seed: u64,
    pub budget: Budget,
    pub thresholds: Thresholds,
    pub verdict: Verdict,
    pub evidence: Evidence,
    pub diagnostics: Vec<String>,
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den > 0.0).then(|| num / den)
}

/// Runs the evidence suites and applies the verdict rule: TreeType needs E1 and
/// E2, RibbonType needs E3 to E6, anything else (including both) is Inconclusive.
pub fn classify(
    sampler: &dyn Sampler,
    budget: &Budget,
    thresholds: &Thresholds,
    seed: u64,
) -> Result<ClassificationVerdict> {
    if budget.h_far.abs() <= thresholds.far {
        return Err(Error::Parse(format!("h_far = {} must exceed the far threshold {}", budget.h_far, thresholds.far)));
    }
    for (name, list) in [("merge_heights", &budget.merge_heights), ("triangle_sides", &budget.triangle_sides)] {
        if list.len() < 2 {
            return Err(Error::Parse(format!("{name} needs at least two entries")));
        }
    }
    if budget.deep.depths.len() < 2 {
        return Err(Error::Parse("deep.depths needs at least two entries".into()));
    }
    let merge_near = merge_rate_curve(sampler, budget.h_near, &budget.merge_heights, budget.merge_trials, seed);
    let merge_far = merge_rate_curve(sampler, budget.h_far, &budget.merge_heights, budget.merge_trials, seed);
    let triangles = triangle_suite(sampler, &budget.triangle_sides, budget.triangle_trials, seed);
    let deep = deep_structure_audit(sampler, budget.deep.clone(), seed);

    let near_first = &merge_near.points[0];
    let near_last = merge_near.points.last().unwrap();
    let far_last = merge_far.points.last().unwrap();
    let e1 = near_first.pairs > 0 && near_last.merged > near_first.merged && far_last.merged > 0;
    let e6 = far_last.pairs > 0 && far_last.merged == 0;

    let (t_first, t_last) = (&triangles.points[0], triangles.points.last().unwrap());
    let e2 = ratio(t_last.deep2_density, t_first.deep2_density).is_some_and(|r| r < thresholds.decay);

    let (d_first, d_last) = (&deep.points[0], deep.points.last().unwrap());
    let (lo, hi) = thresholds.stability;
    let e3 = ratio(d_last.density, d_first.density).is_some_and(|r| lo <= r && r <= hi);
    let e4 = d_last.deep > 0 && d_last.unique_fraction > d_first.unique_fraction;
    let e5 = deep.params.trials > 0 && d_last.both_sides_fraction >= thresholds.both_sides;

    let tree = e1 && e2;
    let ribbon = e3 && e4 && e5 && e6;
    let verdict = match (tree, ribbon) {
        (true, false) => Verdict::TreeType,
        (false, true) => Verdict::RibbonType,
        _ => Verdict::Inconclusive,
    };
    let mut diagnostics = Vec::new();
    if near_first.pairs == 0 && far_last.pairs == 0 && d_last.y_cells == 0 {
        diagnostics.push("empty Y: no sample carried a 1 at a probed cell; the measure looks atomic".to_string());
    }
    if tree && ribbon {
        diagnostics.push("tree and ribbon evidence both passed".to_string());
    }
    Ok(ClassificationVerdict {
        sampler: sampler.id(),
        seed,
        budget: budget.clone(),
        thresholds: thresholds.clone(),
        verdict,
        evidence: Evidence {
            merge_near,
            merge_far,
            triangles,
            deep,
            e1_merge_trend: e1,
            e2_deep2_decay: e2,
            e3_deep_stable: e3,
            e4_unique_trend: e4,
            e5_both_sides: e5,
            e6_far_separation: e6,
        },
        diagnostics,
    })
}
