//! Cluster-node topology: chassis counts, Clos classification and wiring.
//!
//! A cluster node is built from `E` line chassis (each with `N` line cards
//! facing node degrees and `M` connection cards facing the fabric), `M`
//! interconnect chassis (each with `S = E + F` interconnect cards) and `F`
//! add/drop chassis. Viewed per wavelength the node is a three-stage Clos
//! fabric: line and add/drop chassis form the outer stages, interconnect
//! chassis the middle stage.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Sizing tuple for one cluster node.
///
/// The interconnect-card count per interconnect chassis (`S = E + F`) and
/// the total degree (`E * N`) are always derived, never stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterConfig {
    /// Line cards per line chassis (`N`); each card serves one node degree.
    pub line_cards: u32,
    /// Connection cards per line chassis, equal to the number of
    /// interconnect chassis (`M`).
    pub interconnect_chassis: u32,
    /// Number of line chassis (`E`).
    pub line_chassis: u32,
    /// Number of add/drop chassis (`F`).
    pub add_drop_chassis: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SizingError {
    #[error("line_cards must be at least 1 (got {0})")]
    LineCards(u32),
    #[error("interconnect_chassis must be at least 1 (got {0})")]
    InterconnectChassis(u32),
    #[error("line_chassis must be at least 1 (got {0})")]
    LineChassis(u32),
}

impl ClusterConfig {
    pub fn new(
        line_cards: u32,
        interconnect_chassis: u32,
        line_chassis: u32,
        add_drop_chassis: u32,
    ) -> Result<Self, SizingError> {
        if line_cards == 0 {
            return Err(SizingError::LineCards(line_cards));
        }
        if interconnect_chassis == 0 {
            return Err(SizingError::InterconnectChassis(interconnect_chassis));
        }
        if line_chassis == 0 {
            return Err(SizingError::LineChassis(line_chassis));
        }
        Ok(Self {
            line_cards,
            interconnect_chassis,
            line_chassis,
            add_drop_chassis,
        })
    }

    /// Interconnect cards per interconnect chassis: `S = E + F`.
    pub fn interconnect_cards(&self) -> u32 {
        self.line_chassis + self.add_drop_chassis
    }

    /// Chassis count on the outer stages: `E + F`.
    pub fn first_stage_chassis(&self) -> u32 {
        self.line_chassis + self.add_drop_chassis
    }

    /// Total node degree: `E * N`.
    pub fn total_degrees(&self) -> u32 {
        self.line_chassis * self.line_cards
    }

    /// Add/drop rate `F / E`.
    pub fn add_drop_rate(&self) -> f64 {
        f64::from(self.add_drop_chassis) / f64::from(self.line_chassis)
    }
}

/// Clos taxonomy for an (inlets per first-stage switch, middle-switch count)
/// pair. Ordered so that a larger class is strictly stronger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NonblockingClass {
    Blocking,
    RearrangeablyNonblocking,
    StrictSense,
}

/// Classify a symmetric three-stage fabric with `n` inlets per first-stage
/// switch and `k` middle switches. The strongest applicable class is
/// reported: strict-sense for `k >= 2n - 1`, rearrangeable for `n <= k`,
/// blocking below that.
pub fn classify_nonblocking(n: u32, k: u32) -> NonblockingClass {
    assert!(n >= 1 && k >= 1, "classify_nonblocking requires n, k >= 1");
    if k >= 2 * n - 1 {
        NonblockingClass::StrictSense
    } else if k >= n {
        NonblockingClass::RearrangeablyNonblocking
    } else {
        NonblockingClass::Blocking
    }
}

/// How the add/drop chassis are wired into the interconnect stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InterconnectPattern {
    /// Complete wiring: every outer-stage chassis reaches every interconnect
    /// chassis through exactly one fiber pair.
    Proposed,
    /// Each add/drop chassis points each of its `M` connection cards at a
    /// uniformly random interconnect chassis. Duplicate targets waste cards
    /// and can leave an add/drop chassis with no path to some interconnect
    /// chassis; line chassis keep the complete wiring.
    Random { seed: u64 },
}

/// Advisory sizing findings from [`validate_sizing`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SizingWarning {
    /// `M` falls outside the recommended open band `(N, 1.2 * N)`.
    OutsideRecommendedBand { line_cards: u32, interconnect_chassis: u32 },
    /// The per-wavelength fabric is blocking (`M < N`).
    BlockingFabric { line_cards: u32, interconnect_chassis: u32 },
}

impl std::fmt::Display for SizingWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SizingWarning::OutsideRecommendedBand {
                line_cards,
                interconnect_chassis,
            } => write!(
                f,
                "interconnect chassis count {} is outside the recommended open band ({}, {}) for {} line cards",
                interconnect_chassis,
                line_cards,
                1.2 * f64::from(*line_cards),
                line_cards
            ),
            SizingWarning::BlockingFabric {
                line_cards,
                interconnect_chassis,
            } => write!(
                f,
                "fabric is blocking: {} interconnect chassis for {} line cards per chassis",
                interconnect_chassis, line_cards
            ),
        }
    }
}

/// Advisory sizing check. Warns when `M` lies outside the open band
/// `(N, 1.2 * N)` or when the fabric classifies as blocking; never rejects.
pub fn validate_sizing(config: &ClusterConfig) -> Vec<SizingWarning> {
    let n = config.line_cards;
    let m = config.interconnect_chassis;
    let mut warnings = Vec::new();
    // Open interval (N, 1.2 N), checked in integers: M > N and 5 M < 6 N.
    if !(m > n && 5 * m < 6 * n) {
        warnings.push(SizingWarning::OutsideRecommendedBand {
            line_cards: n,
            interconnect_chassis: m,
        });
    }
    if classify_nonblocking(n, m) == NonblockingClass::Blocking {
        warnings.push(SizingWarning::BlockingFabric {
            line_cards: n,
            interconnect_chassis: m,
        });
    }
    warnings
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineChassis {
    pub index: u32,
    pub line_cards: u32,
    pub connection_cards: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterconnectChassis {
    pub index: u32,
    pub interconnect_cards: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AddDropChassis {
    pub index: u32,
    /// Local termination ports; sized like a line chassis so an add/drop
    /// chassis mirrors the degree capacity of a line chassis.
    pub ports: u32,
    pub connection_cards: u32,
}

/// A constructed cluster node: chassis inventory plus the fiber wiring
/// between outer-stage chassis and interconnect chassis.
///
/// `fibers[u][m]` is the number of duplex fiber pairs between outer-stage
/// chassis `u` (0..E are line chassis, E..E+F add/drop chassis) and
/// interconnect chassis `m`. The proposed pattern is the complete bipartite
/// wiring with multiplicity 1 everywhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterTopology {
    pub config: ClusterConfig,
    pub pattern: InterconnectPattern,
    pub line_chassis: Vec<LineChassis>,
    pub interconnect_chassis: Vec<InterconnectChassis>,
    pub add_drop_chassis: Vec<AddDropChassis>,
    pub fibers: Vec<Vec<u8>>,
}

impl ClusterTopology {
    /// Total fiber-pair count over all chassis pairs.
    pub fn fiber_count(&self) -> u64 {
        self.fibers
            .iter()
            .map(|row| row.iter().map(|&c| u64::from(c)).sum::<u64>())
            .sum()
    }

    /// Ports on outer-stage chassis `u` (line cards or add/drop ports).
    pub fn outer_ports(&self, chassis: u32) -> u32 {
        if chassis < self.config.line_chassis {
            self.config.line_cards
        } else {
            self.add_drop_chassis[(chassis - self.config.line_chassis) as usize].ports
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("topology serializes")
    }
}

/// Build a cluster topology from a validated config and a wiring pattern.
///
/// Returns `E` line chassis (each with `N` degree-facing line cards and `M`
/// fabric-facing connection cards), `M` interconnect chassis (each with
/// `S = E + F` cards) and `F` add/drop chassis. Under the proposed pattern
/// every (outer chassis, interconnect chassis) pair is joined by exactly one
/// fiber pair.
pub fn build_cluster(
    config: ClusterConfig,
    pattern: InterconnectPattern,
) -> Result<ClusterTopology, SizingError> {
    // Re-validate so raw struct literals cannot smuggle a zero field in.
    let config = ClusterConfig::new(
        config.line_cards,
        config.interconnect_chassis,
        config.line_chassis,
        config.add_drop_chassis,
    )?;
    let e = config.line_chassis;
    let f = config.add_drop_chassis;
    let m = config.interconnect_chassis;
    let s = config.interconnect_cards();

    let line_chassis = (0..e)
        .map(|index| LineChassis {
            index,
            line_cards: config.line_cards,
            connection_cards: m,
        })
        .collect();
    let interconnect_chassis = (0..m)
        .map(|index| InterconnectChassis {
            index,
            interconnect_cards: s,
        })
        .collect();
    let add_drop_chassis = (0..f)
        .map(|index| AddDropChassis {
            index,
            ports: config.line_cards,
            connection_cards: m,
        })
        .collect();

    let mut fibers = vec![vec![1u8; m as usize]; (e + f) as usize];
    if let InterconnectPattern::Random { seed } = pattern {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for row in fibers.iter_mut().skip(e as usize) {
            row.fill(0);
            for _ in 0..m {
                let target = rng.gen_range(0..m as usize);
                row[target] = row[target].saturating_add(1);
            }
        }
    }

    Ok(ClusterTopology {
        config,
        pattern,
        line_chassis,
        interconnect_chassis,
        add_drop_chassis,
        fibers,
    })
}
