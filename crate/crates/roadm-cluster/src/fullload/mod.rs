//! Full-load Monte Carlo simulation of the cluster node.
//!
//! A connectivity map is one randomly generated batch of connection
//! requests. Each map is routed in generation order on a fresh fabric with
//! the order-based (first-fit) middle-stage scan; maps are independent
//! trials, so the engine evaluates them in parallel and aggregates counts.
//! All randomness derives from the run seed: map `i` draws from ChaCha8
//! stream `i`, so results do not depend on worker count.

mod fabric;
mod oracle;

pub use fabric::{FabricState, RouteOutcome};
pub use oracle::rearrangement_oracle;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::topology::{build_cluster, ClusterConfig, ClusterTopology, InterconnectPattern, SizingError};

/// RNG recorded in report manifests.
pub const RNG_ALGORITHM: &str = "chacha8";

/// Give-up bound for resampling one request whose endpoints collide.
const MAX_RESAMPLE_ATTEMPTS: u32 = 10_000;

/// One side of a connection: a degree-facing line card or a local add/drop
/// port. Card and port pools are both sized `N` per chassis, so a uniform
/// draw over all endpoints weights add/drop termination at `F / E` relative
/// to the line degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Endpoint {
    LineDegree { chassis: u32, card: u32 },
    AddDropPort { chassis: u32, port: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectionRequest {
    pub src: Endpoint,
    pub dst: Endpoint,
    pub wavelength: u32,
}

/// Middle-stage selection method. Only the order-based scan is modeled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConnectionMethod {
    OrderBased,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Requests per connectivity map.
    pub connections_per_map: u32,
    /// Wavelength count of the grid (planes are independent).
    pub wavelengths: u32,
    /// Independent connectivity maps to accumulate.
    pub maps: u32,
    pub seed: u64,
    pub method: ConnectionMethod,
    pub pattern: InterconnectPattern,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            connections_per_map: 48_000,
            wavelengths: 320,
            maps: 1,
            seed: 0,
            method: ConnectionMethod::OrderBased,
            pattern: InterconnectPattern::Proposed,
        }
    }
}

impl SimConfig {
    /// Scale the per-map request count to `fill` requests per (line degree,
    /// wavelength) pair, the load knob that keeps scenarios of different
    /// degree counts comparably loaded.
    pub fn with_scaled_load(mut self, cluster: &ClusterConfig, fill: f64) -> Self {
        let slots = f64::from(cluster.total_degrees()) * f64::from(self.wavelengths);
        self.connections_per_map = (slots * fill).round().max(1.0) as u32;
        self
    }

    fn validate(&self) -> Result<(), SimError> {
        if self.connections_per_map == 0 || self.maps == 0 || self.wavelengths == 0 {
            return Err(SimError::InvalidSimConfig);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Sizing(#[from] SizingError),
    #[error("connections_per_map, maps and wavelengths must all be at least 1")]
    InvalidSimConfig,
    #[error("endpoint {endpoint:?} is outside the fabric")]
    InvalidEndpoint { endpoint: Endpoint },
    #[error("wavelength {wavelength} exceeds the grid ({limit} planes)")]
    InvalidWavelength { wavelength: u32, limit: u32 },
    #[error("request connects endpoint {endpoint:?} to itself")]
    SelfConnection { endpoint: Endpoint },
    #[error("endpoint {endpoint:?} already carries a connection on wavelength {wavelength}")]
    EndpointOccupied { endpoint: Endpoint, wavelength: u32 },
    #[error(
        "map cannot host {requested} connections: only {capacity} (source endpoint, wavelength) slots exist"
    )]
    MapOverCapacity { requested: u64, capacity: u64 },
    #[error("gave up resampling request {request_index} after {attempts} endpoint collisions")]
    MapInfeasible { request_index: u32, attempts: u32 },
    #[error("rearrangement oracle instance too large: {requests} requests on {chassis} chassis")]
    OracleInstanceTooLarge { requests: usize, chassis: u32 },
    #[error("rearrangement oracle requires a single wavelength plane")]
    OracleMixedWavelengths,
}

/// Offered/blocked counters for one source degree.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeCounts {
    pub offered: u64,
    pub blocked: u64,
}

/// Wilson-score interval on a binomial rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilsonInterval {
    pub lo: f64,
    pub hi: f64,
}

impl WilsonInterval {
    pub fn half_width(&self) -> f64 {
        (self.hi - self.lo) / 2.0
    }

    pub fn overlaps(&self, other: &WilsonInterval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }
}

/// 95% Wilson score interval for `successes / trials`.
pub fn wilson_interval_95(successes: u64, trials: u64) -> WilsonInterval {
    assert!(trials > 0, "wilson interval needs at least one trial");
    let z = 1.959_963_984_540_054_f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    WilsonInterval {
        // The bound is exactly 0 (resp. 1) at the extremes; rounding in
        // center - half would otherwise leave a denormal-scale residue.
        lo: if successes == 0 { 0.0 } else { (center - half).max(0.0) },
        hi: if successes == trials { 1.0 } else { (center + half).min(1.0) },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub offered: u64,
    pub accepted: u64,
    pub blocked: u64,
    /// Accepted requests that never touched the interconnect stage.
    pub locally_switched: u64,
    pub blocking_rate: f64,
    /// 95% Wilson interval on the blocking rate.
    pub ci95: WilsonInterval,
    /// Per source-degree offered/blocked counts; sums match the totals.
    pub per_degree: Vec<DegreeCounts>,
}

struct MapTally {
    offered: u64,
    blocked: u64,
    locally_switched: u64,
    per_degree: Vec<DegreeCounts>,
}

impl MapTally {
    fn new(degrees: usize) -> Self {
        MapTally {
            offered: 0,
            blocked: 0,
            locally_switched: 0,
            per_degree: vec![DegreeCounts::default(); degrees],
        }
    }

    fn merge(mut self, other: MapTally) -> MapTally {
        self.offered += other.offered;
        self.blocked += other.blocked;
        self.locally_switched += other.locally_switched;
        for (mine, theirs) in self.per_degree.iter_mut().zip(other.per_degree) {
            mine.offered += theirs.offered;
            mine.blocked += theirs.blocked;
        }
        self
    }
}

fn endpoint_from_id(config: &ClusterConfig, id: u32) -> Endpoint {
    let n = config.line_cards;
    let chassis = id / n;
    if chassis < config.line_chassis {
        Endpoint::LineDegree {
            chassis,
            card: id % n,
        }
    } else {
        Endpoint::AddDropPort {
            chassis: chassis - config.line_chassis,
            port: id % n,
        }
    }
}

/// Generate one connectivity map: exactly `connections_per_map` requests
/// with sources uniform over the line degrees, destinations uniform over all
/// other endpoints and wavelengths uniform over the grid. Draws whose source
/// or destination card is already committed on that wavelength are resampled
/// whole. Deterministic in `(seed, map_index)`.
pub fn generate_connectivity_map(
    config: &ClusterConfig,
    sim: &SimConfig,
    map_index: u32,
) -> Result<Vec<ConnectionRequest>, SimError> {
    sim.validate()?;
    let n = config.line_cards;
    let sources = config.line_chassis * n;
    let endpoints = config.first_stage_chassis() * n;
    let w = sim.wavelengths;

    let src_capacity = u64::from(sources) * u64::from(w);
    if u64::from(sim.connections_per_map) > src_capacity {
        return Err(SimError::MapOverCapacity {
            requested: u64::from(sim.connections_per_map),
            capacity: src_capacity,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(sim.seed);
    rng.set_stream(u64::from(map_index));

    let mut src_taken = vec![false; (w * endpoints) as usize];
    let mut dst_taken = vec![false; (w * endpoints) as usize];
    let mut requests = Vec::with_capacity(sim.connections_per_map as usize);
    for request_index in 0..sim.connections_per_map {
        let mut placed = false;
        for _attempt in 0..MAX_RESAMPLE_ATTEMPTS {
            let wavelength = rng.gen_range(0..w);
            let src = rng.gen_range(0..sources);
            let mut dst = rng.gen_range(0..endpoints - 1);
            if dst >= src {
                dst += 1;
            }
            let src_slot = (wavelength * endpoints + src) as usize;
            let dst_slot = (wavelength * endpoints + dst) as usize;
            if src_taken[src_slot] || dst_taken[dst_slot] {
                continue;
            }
            src_taken[src_slot] = true;
            dst_taken[dst_slot] = true;
            requests.push(ConnectionRequest {
                src: endpoint_from_id(config, src),
                dst: endpoint_from_id(config, dst),
                wavelength,
            });
            placed = true;
            break;
        }
        if !placed {
            return Err(SimError::MapInfeasible {
                request_index,
                attempts: MAX_RESAMPLE_ATTEMPTS,
            });
        }
    }
    Ok(requests)
}

fn degree_index(config: &ClusterConfig, endpoint: &Endpoint) -> usize {
    match *endpoint {
        Endpoint::LineDegree { chassis, card } => (chassis * config.line_cards + card) as usize,
        // Sources are always line degrees; guarded by the generator.
        Endpoint::AddDropPort { chassis, port } => {
            ((config.line_chassis + chassis) * config.line_cards + port) as usize
        }
    }
}

fn run_one_map(
    topology: &ClusterTopology,
    sim: &SimConfig,
    map_index: u32,
) -> Result<MapTally, SimError> {
    let config = &topology.config;
    let requests = generate_connectivity_map(config, sim, map_index)?;
    let mut state = FabricState::new(topology, sim.wavelengths);
    let mut tally = MapTally::new(config.total_degrees() as usize);
    for request in &requests {
        let degree = degree_index(config, &request.src);
        tally.offered += 1;
        tally.per_degree[degree].offered += 1;
        match state.route(request)? {
            RouteOutcome::Accepted { .. } => {}
            RouteOutcome::AcceptedLocal => tally.locally_switched += 1,
            RouteOutcome::Blocked => {
                tally.blocked += 1;
                tally.per_degree[degree].blocked += 1;
            }
        }
    }
    debug_assert_eq!(
        state.occupied_units(),
        2 * (tally.offered - tally.blocked - tally.locally_switched)
    );
    Ok(tally)
}

/// Run the full-load simulation: route `maps` independent connectivity maps
/// and aggregate offered/blocked counts. Maps are evaluated in parallel;
/// identical configs and seed give identical results at any worker count.
pub fn run_full_load(config: &ClusterConfig, sim: &SimConfig) -> Result<SimResult, SimError> {
    sim.validate()?;
    let topology = build_cluster(*config, sim.pattern)?;
    let tally = (0..sim.maps)
        .into_par_iter()
        .map(|map_index| run_one_map(&topology, sim, map_index))
        .try_reduce(
            || MapTally::new(config.total_degrees() as usize),
            |a, b| Ok(a.merge(b)),
        )?;

    let blocking_rate = tally.blocked as f64 / tally.offered as f64;
    Ok(SimResult {
        offered: tally.offered,
        accepted: tally.offered - tally.blocked,
        blocked: tally.blocked,
        locally_switched: tally.locally_switched,
        blocking_rate,
        ci95: wilson_interval_95(tally.blocked, tally.offered),
        per_degree: tally.per_degree,
    })
}

/// One scenario: a labelled cluster sizing plus its simulation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioCase {
    pub label: String,
    pub cluster: ClusterConfig,
    pub sim: SimConfig,
}

/// The five built-in cluster sizings (N=14, M=16; E from 8 to 16 with
/// add/drop chassis filling the remaining slots).
pub fn builtin_cases() -> Vec<ClusterConfig> {
    [(8u32, 8u32), (10, 6), (12, 4), (14, 2), (16, 0)]
        .iter()
        .map(|&(e, f)| ClusterConfig::new(14, 16, e, f).expect("builtin sizing is valid"))
        .collect()
}

/// Builtin scenarios with a shared simulation setup, load-scaled per case.
pub fn builtin_scenarios(sim: SimConfig, fill: Option<f64>) -> Vec<ScenarioCase> {
    builtin_cases()
        .into_iter()
        .enumerate()
        .map(|(i, cluster)| {
            let sim = match fill {
                Some(fill) => sim.with_scaled_load(&cluster, fill),
                None => sim,
            };
            ScenarioCase {
                label: format!("case{}", i + 1),
                cluster,
                sim,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRow {
    pub label: String,
    pub line_chassis: u32,
    pub add_drop_chassis: u32,
    pub degrees: u32,
    pub add_drop_rate: f64,
    pub connections_per_map: u32,
    pub wavelengths: u32,
    pub maps: u32,
    pub seed: u64,
    pub outcome: Result<SimResult, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub rows: Vec<ScenarioRow>,
}

/// Run every scenario in sequence. Per-case failures are recorded in the row
/// without aborting the remaining cases.
pub fn run_scenarios(cases: &[ScenarioCase]) -> ScenarioReport {
    let rows = cases
        .iter()
        .map(|case| ScenarioRow {
            label: case.label.clone(),
            line_chassis: case.cluster.line_chassis,
            add_drop_chassis: case.cluster.add_drop_chassis,
            degrees: case.cluster.total_degrees(),
            add_drop_rate: case.cluster.add_drop_rate(),
            connections_per_map: case.sim.connections_per_map,
            wavelengths: case.sim.wavelengths,
            maps: case.sim.maps,
            seed: case.sim.seed,
            outcome: run_full_load(&case.cluster, &case.sim).map_err(|e| e.to_string()),
        })
        .collect();
    ScenarioReport { rows }
}

impl ScenarioReport {
    /// CSV with the fixed header
    /// `case,E,F,degrees,add_drop_rate,offered,blocked,blocking_rate,ci95`.
    /// `ci95` is the Wilson-interval half-width; failed cases carry the
    /// quoted error in the `blocking_rate` column.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("case,E,F,degrees,add_drop_rate,offered,blocked,blocking_rate,ci95\n");
        for row in &self.rows {
            match &row.outcome {
                Ok(result) => out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    row.label,
                    row.line_chassis,
                    row.add_drop_chassis,
                    row.degrees,
                    row.add_drop_rate,
                    result.offered,
                    result.blocked,
                    result.blocking_rate,
                    result.ci95.half_width(),
                )),
                Err(err) => out.push_str(&format!(
                    "{},{},{},{},{},0,0,\"{}\",\n",
                    row.label, row.line_chassis, row.add_drop_chassis, row.degrees, row.add_drop_rate, err,
                )),
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("scenario report serializes")
    }
}
