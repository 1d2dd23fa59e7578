//! Counting bounds, evidence curves and the tree/ribbon classifier.
//!
//! Every experiment draws sample `i` from `derive_seed(seed, experiment, i)`,
//! so results do not depend on how samples are spread over threads.

mod bounds;
mod classify;
mod curves;

pub use bounds::{
    bk_partition_check, component_partitions, cor23_audit, extremal_audit, lemma22_audit, BkCheck, BoundCheckReport,
    ComponentBound, Cor23Report, ExtremalReport, PartitionFamily,
};
pub use classify::{classify, Budget, DEFAULT_SEED, ClassificationVerdict, Evidence, Thresholds, Verdict};
pub use curves::{
    deep_structure_audit, merge_rate_curve, triangle_suite, DeepParams, DeepPoint, DeepStructure, MergeCurve, MergePoint,
    TrianglePoint, TriangleSuite,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::haar::sample_haar;
use crate::lattice::{Geometry, Patch};
use crate::ribbon::{sample_mu, sample_mu1};

/// A source of random configurations on arbitrary windows.
pub trait Sampler: Sync {
    fn id(&self) -> String;
    fn sample(&self, target: &Geometry, seed: u64) -> Patch;
}

/// The measures shipped with the crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Haar,
    Mu1,
    Mu,
    /// The point mass at the zero configuration.
    Dirac,
}

impl Measure {
    pub const ALL: [Measure; 4] = [Measure::Haar, Measure::Mu1, Measure::Mu, Measure::Dirac];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Haar => "haar",
            Measure::Mu1 => "mu1",
            Measure::Mu => "mu",
            Measure::Dirac => "dirac",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Measure::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown measure `{s}` (expected haar, mu1, mu or dirac)")))
    }
}

impl Sampler for Measure {
    fn id(&self) -> String {
        self.name().to_string()
    }

    fn sample(&self, target: &Geometry, seed: u64) -> Patch {
        match self {
            Measure::Haar => sample_haar(target, seed),
            Measure::Mu1 => sample_mu1(target, seed),
            Measure::Mu => sample_mu(target, seed),
            Measure::Dirac => Patch::zeros(target.clone()),
        }
    }
}

/// Experiment ids used with [`crate::rng::derive_seed`].
pub(crate) mod experiment {
    pub const MERGE: u64 = 1;
    pub const DEEP: u64 = 2;
    pub const TRIANGLE: u64 = 3;
}
