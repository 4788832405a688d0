//! Flex-grid spectrum model: spectral-width presets, multi-flow splitting,
//! first-fit slot allocation and the elastic-vs-fixed carried-traffic
//! comparison.
//!
//! Channels occupy an integral number of 12.5 GHz slots. The two elastic
//! width presets anchor published widths at 40/100/400/1000 Gb/s and
//! interpolate linearly in between; the fixed-grid reference spends one
//! 50 GHz wavelength per started 100 Gb/s.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

pub const SLOT_WIDTH_GHZ: f64 = 12.5;
pub const DEFAULT_GRID_SLOTS: usize = 320;
pub const DEFAULT_SUBCHANNEL_RATE_GBPS: u32 = 100;
pub const DEFAULT_MAX_FLOW_GBPS: u32 = 400;
pub const SUBCHANNELS_PER_TRANSPONDER: u32 = 10;
pub const MIN_DEMAND_GBPS: u32 = 40;
pub const MAX_DEMAND_GBPS: u32 = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EonError {
    #[error("bitrate {0} Gb/s is outside the supported range")]
    BitrateOutOfRange(u32),
    #[error("bitrate {0} Gb/s is not a multiple of 20")]
    BitrateNotStepAligned(u32),
    #[error("bitrate {bitrate} Gb/s exceeds the transponder capacity {capacity} Gb/s")]
    CapacityExceeded { bitrate: u32, capacity: u32 },
    #[error("demand endpoints must differ (router {0})")]
    SelfDemand(u32),
    #[error("no link between routers {src} and {dst}")]
    MissingLink { src: u32, dst: u32 },
    #[error("need at least two routers (got {0})")]
    TooFewRouters(u32),
    #[error("need at least one demand")]
    NoDemands,
    #[error("need at least one seed")]
    NoSeeds,
    #[error("fixed-grid run carried no traffic; improvement ratio is undefined")]
    NothingCarried,
}

/// Spectral-width preset applied to an optical flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WidthMode {
    /// Published elastic widths: 25/50/100/150 GHz at 40/100/400/1000 Gb/s.
    OriginalEon,
    /// The tighter redesign: 25/45/90/130 GHz at the same anchor bitrates.
    NewDesign,
    /// Fixed 50 GHz grid, one wavelength per started 100 Gb/s.
    FixedWdm,
}

const ORIGINAL_EON_ANCHORS: [(f64, f64); 4] =
    [(40.0, 25.0), (100.0, 50.0), (400.0, 100.0), (1000.0, 150.0)];
const NEW_DESIGN_ANCHORS: [(f64, f64); 4] =
    [(40.0, 25.0), (100.0, 45.0), (400.0, 90.0), (1000.0, 130.0)];

fn interpolate(anchors: &[(f64, f64)], bitrate: f64) -> f64 {
    // Flat below the first anchor (sub-40 Gb/s remainder flows).
    if bitrate <= anchors[0].0 {
        return anchors[0].1;
    }
    for window in anchors.windows(2) {
        let (x0, y0) = window[0];
        let (x1, y1) = window[1];
        if bitrate <= x1 {
            return y0 + (bitrate - x0) * (y1 - y0) / (x1 - x0);
        }
    }
    unreachable!("bitrate range is validated before interpolation")
}

/// Spectral width in GHz for one optical flow of the given bitrate.
pub fn spectral_width(bitrate_gbps: u32, mode: WidthMode) -> Result<f64, EonError> {
    if bitrate_gbps == 0 || bitrate_gbps > MAX_DEMAND_GBPS {
        return Err(EonError::BitrateOutOfRange(bitrate_gbps));
    }
    let bitrate = f64::from(bitrate_gbps);
    Ok(match mode {
        WidthMode::OriginalEon => interpolate(&ORIGINAL_EON_ANCHORS, bitrate),
        WidthMode::NewDesign => interpolate(&NEW_DESIGN_ANCHORS, bitrate),
        WidthMode::FixedWdm => f64::from(bitrate_gbps.div_ceil(100)) * 50.0,
    })
}

/// Slots needed for a channel of the given width (rounded up to whole
/// 12.5 GHz slots).
pub fn slot_span(width_ghz: f64) -> usize {
    (width_ghz / SLOT_WIDTH_GHZ).ceil() as usize
}

/// One optical flow as placed on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Flow {
    pub bitrate_gbps: u32,
    pub width_ghz: f64,
    pub slot_span: usize,
}

impl Flow {
    pub fn new(bitrate_gbps: u32, mode: WidthMode) -> Result<Self, EonError> {
        let width_ghz = spectral_width(bitrate_gbps, mode)?;
        Ok(Flow {
            bitrate_gbps,
            width_ghz,
            slot_span: slot_span(width_ghz),
        })
    }
}

/// Split a client bitrate into transponder flows: greedy, largest first,
/// remainder last, each flow at most `max_flow_gbps`.
pub fn split_flows_with(
    bitrate_gbps: u32,
    subchannel_rate_gbps: u32,
    max_flow_gbps: u32,
) -> Result<Vec<u32>, EonError> {
    if bitrate_gbps == 0 || bitrate_gbps % 20 != 0 {
        return Err(EonError::BitrateNotStepAligned(bitrate_gbps));
    }
    let capacity = SUBCHANNELS_PER_TRANSPONDER * subchannel_rate_gbps;
    if bitrate_gbps > capacity {
        return Err(EonError::CapacityExceeded {
            bitrate: bitrate_gbps,
            capacity,
        });
    }
    let mut remaining = bitrate_gbps;
    let mut flows = Vec::new();
    while remaining > max_flow_gbps {
        flows.push(max_flow_gbps);
        remaining -= max_flow_gbps;
    }
    flows.push(remaining);
    Ok(flows)
}

/// [`split_flows_with`] at the default 100 Gb/s subchannel rate and 400 Gb/s
/// flow ceiling.
pub fn split_flows(bitrate_gbps: u32) -> Result<Vec<u32>, EonError> {
    split_flows_with(
        bitrate_gbps,
        DEFAULT_SUBCHANNEL_RATE_GBPS,
        DEFAULT_MAX_FLOW_GBPS,
    )
}

/// Occupancy bitmap of one fiber's slot grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumGrid {
    slots: Vec<bool>,
}

impl SpectrumGrid {
    pub fn new(slot_count: usize) -> Self {
        SpectrumGrid {
            slots: vec![false; slot_count],
        }
    }

    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }

    pub fn occupied_count(&self) -> usize {
        self.slots.iter().filter(|&&s| s).count()
    }

    pub fn is_slot_free(&self, index: usize) -> bool {
        !self.slots[index]
    }

    /// Allocate the lowest-indexed contiguous free run of `span` slots.
    /// Returns the start slot, or `None` when no run fits (grid unchanged).
    pub fn allocate_first_fit(&mut self, span: usize) -> Option<usize> {
        assert!(span >= 1, "allocation span must be at least 1");
        if span > self.slots.len() {
            return None;
        }
        let mut run = 0;
        for i in 0..self.slots.len() {
            if self.slots[i] {
                run = 0;
            } else {
                run += 1;
                if run == span {
                    let start = i + 1 - span;
                    self.slots[start..=i].fill(true);
                    return Some(start);
                }
            }
        }
        None
    }

    /// Release a previously allocated run.
    pub fn free(&mut self, start: usize, span: usize) {
        self.slots[start..start + span].fill(false);
    }
}

/// One client demand between a pair of routers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Demand {
    pub src: u32,
    pub dst: u32,
    pub bitrate_gbps: u32,
}

impl Demand {
    pub fn new(src: u32, dst: u32, bitrate_gbps: u32) -> Result<Self, EonError> {
        if src == dst {
            return Err(EonError::SelfDemand(src));
        }
        if !(MIN_DEMAND_GBPS..=MAX_DEMAND_GBPS).contains(&bitrate_gbps) {
            return Err(EonError::BitrateOutOfRange(bitrate_gbps));
        }
        if bitrate_gbps % 20 != 0 {
            return Err(EonError::BitrateNotStepAligned(bitrate_gbps));
        }
        Ok(Demand {
            src,
            dst,
            bitrate_gbps,
        })
    }
}

/// Uniform random demands: router pairs uniform with `src != dst`, bitrates
/// uniform over the 20 Gb/s steps from 40 to 1000. Deterministic per seed.
pub fn generate_demands(
    router_count: u32,
    demand_count: usize,
    seed: u64,
) -> Result<Vec<Demand>, EonError> {
    if router_count < 2 {
        return Err(EonError::TooFewRouters(router_count));
    }
    if demand_count == 0 {
        return Err(EonError::NoDemands);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let steps = (MAX_DEMAND_GBPS - MIN_DEMAND_GBPS) / 20 + 1;
    let demands = (0..demand_count)
        .map(|_| {
            let src = rng.gen_range(0..router_count);
            let mut dst = rng.gen_range(0..router_count - 1);
            if dst >= src {
                dst += 1;
            }
            let bitrate = MIN_DEMAND_GBPS + 20 * rng.gen_range(0..steps);
            Demand {
                src,
                dst,
                bitrate_gbps: bitrate,
            }
        })
        .collect();
    Ok(demands)
}

/// Links keyed by unordered router pair, each carrying one slot grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumNetwork {
    links: HashMap<(u32, u32), SpectrumGrid>,
}

impl SpectrumNetwork {
    /// Complete graph over `router_count` routers, one grid per pair.
    pub fn complete(router_count: u32, slots_per_link: usize) -> Result<Self, EonError> {
        if router_count < 2 {
            return Err(EonError::TooFewRouters(router_count));
        }
        let mut links = HashMap::new();
        for a in 0..router_count {
            for b in a + 1..router_count {
                links.insert((a, b), SpectrumGrid::new(slots_per_link));
            }
        }
        Ok(SpectrumNetwork { links })
    }

    /// A single link between routers 0 and 1, for controlled studies.
    pub fn single_link(slots: usize) -> Self {
        let mut links = HashMap::new();
        links.insert((0, 1), SpectrumGrid::new(slots));
        SpectrumNetwork { links }
    }

    fn key(src: u32, dst: u32) -> (u32, u32) {
        (src.min(dst), src.max(dst))
    }

    pub fn link(&self, src: u32, dst: u32) -> Option<&SpectrumGrid> {
        self.links.get(&Self::key(src, dst))
    }

    pub fn link_mut(&mut self, src: u32, dst: u32) -> Option<&mut SpectrumGrid> {
        self.links.get_mut(&Self::key(src, dst))
    }

    pub fn occupied_slots(&self) -> usize {
        self.links.values().map(|g| g.occupied_count()).sum()
    }
}

/// Fate of one demand after admission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DemandOutcome {
    /// Carried; each flow's `(start_slot, span)` on the demand's link.
    Carried { allocations: Vec<(usize, usize)> },
    Blocked,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccommodateResult {
    pub carried_gbps: u64,
    pub offered_gbps: u64,
    pub outcomes: Vec<DemandOutcome>,
}

fn demand_spans(demand: &Demand, mode: WidthMode) -> Result<Vec<usize>, EonError> {
    match mode {
        WidthMode::FixedWdm => {
            let wavelengths = demand.bitrate_gbps.div_ceil(100);
            let span = slot_span(50.0);
            Ok(vec![span; wavelengths as usize])
        }
        WidthMode::OriginalEon | WidthMode::NewDesign => split_flows(demand.bitrate_gbps)?
            .into_iter()
            .map(|flow| Flow::new(flow, mode).map(|f| f.slot_span))
            .collect(),
    }
}

/// Admit demands in sequence order. Elastic modes split each demand into
/// flows and place every flow first-fit; fixed-grid demands take one 50 GHz
/// wavelength per started 100 Gb/s. Admission is all-or-nothing: a demand
/// whose flows cannot all be placed is rolled back and counted blocked.
pub fn accommodate(
    demands: &[Demand],
    network: &mut SpectrumNetwork,
    mode: WidthMode,
) -> Result<AccommodateResult, EonError> {
    let mut carried = 0u64;
    let mut offered = 0u64;
    let mut outcomes = Vec::with_capacity(demands.len());
    for demand in demands {
        offered += u64::from(demand.bitrate_gbps);
        let spans = demand_spans(demand, mode)?;
        let grid = network
            .link_mut(demand.src, demand.dst)
            .ok_or(EonError::MissingLink {
                src: demand.src,
                dst: demand.dst,
            })?;
        let mut allocations = Vec::with_capacity(spans.len());
        let mut complete = true;
        for span in spans {
            match grid.allocate_first_fit(span) {
                Some(start) => allocations.push((start, span)),
                None => {
                    complete = false;
                    break;
                }
            }
        }
        if complete {
            carried += u64::from(demand.bitrate_gbps);
            outcomes.push(DemandOutcome::Carried { allocations });
        } else {
            for (start, span) in allocations {
                grid.free(start, span);
            }
            outcomes.push(DemandOutcome::Blocked);
        }
    }
    Ok(AccommodateResult {
        carried_gbps: carried,
        offered_gbps: offered,
        outcomes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub seed: u64,
    pub carried_elastic_gbps: u64,
    pub carried_fixed_gbps: u64,
    pub ratio: f64,
}

/// Elastic-vs-fixed comparison across seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub router_count: u32,
    pub demand_count: usize,
    pub slots_per_link: usize,
    pub rows: Vec<CompareRow>,
    pub mean_ratio: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

/// For each seed: generate demands, admit them under the new-design elastic
/// widths and under the fixed grid on identical fresh networks, and report
/// the carried-traffic ratio statistics.
pub fn compare_approaches(
    router_count: u32,
    demand_count: usize,
    slots_per_link: usize,
    seeds: &[u64],
) -> Result<CompareReport, EonError> {
    if seeds.is_empty() {
        return Err(EonError::NoSeeds);
    }
    let mut rows = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let demands = generate_demands(router_count, demand_count, seed)?;
        let mut elastic_net = SpectrumNetwork::complete(router_count, slots_per_link)?;
        let mut fixed_net = SpectrumNetwork::complete(router_count, slots_per_link)?;
        let elastic = accommodate(&demands, &mut elastic_net, WidthMode::NewDesign)?;
        let fixed = accommodate(&demands, &mut fixed_net, WidthMode::FixedWdm)?;
        if fixed.carried_gbps == 0 {
            return Err(EonError::NothingCarried);
        }
        rows.push(CompareRow {
            seed,
            carried_elastic_gbps: elastic.carried_gbps,
            carried_fixed_gbps: fixed.carried_gbps,
            ratio: elastic.carried_gbps as f64 / fixed.carried_gbps as f64,
        });
    }
    let mean_ratio = rows.iter().map(|r| r.ratio).sum::<f64>() / rows.len() as f64;
    let min_ratio = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let max_ratio = rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    Ok(CompareReport {
        router_count,
        demand_count,
        slots_per_link,
        rows,
        mean_ratio,
        min_ratio,
        max_ratio,
    })
}

impl CompareReport {
    /// CSV with the fixed header `seed,carried_elastic_gbps,carried_fixed_gbps,ratio`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("seed,carried_elastic_gbps,carried_fixed_gbps,ratio\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.seed, row.carried_elastic_gbps, row.carried_fixed_gbps, row.ratio
            ));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("compare report serializes")
    }
}

/// The published two-row spectral-width table (GHz at 40/100/400/1000 Gb/s).
pub fn width_table() -> [(String, [f64; 4]); 2] {
    let anchors = [40u32, 100, 400, 1000];
    let row = |mode: WidthMode| {
        let mut widths = [0.0f64; 4];
        for (slot, &bitrate) in widths.iter_mut().zip(&anchors) {
            *slot = spectral_width(bitrate, mode).expect("anchor bitrates are in range");
        }
        widths
    };
    [
        ("original_eon".to_string(), row(WidthMode::OriginalEon)),
        ("new_design".to_string(), row(WidthMode::NewDesign)),
    ]
}

fn format_ghz(value: f64) -> String {
    if value.fract() == 0.0 {
        format!("{}", value as i64)
    } else {
        format!("{value}")
    }
}

/// The width table as CSV: `mode,40,100,400,1000` with integral GHz cells.
pub fn width_table_csv() -> String {
    let mut out = String::from("mode,40,100,400,1000\n");
    for (mode, widths) in width_table() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            mode,
            format_ghz(widths[0]),
            format_ghz(widths[1]),
            format_ghz(widths[2]),
            format_ghz(widths[3]),
        ));
    }
    out
}
