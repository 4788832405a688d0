//! Seeded property suites backing the invariant checks. Each property runs
//! its stated trial count (10^4 random trials unless the input space is
//! small enough to enumerate) and returns an error describing the first
//! violated case.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use roadm_cluster::eon::{
    accommodate, generate_demands, split_flows, split_flows_with, spectral_width, SpectrumGrid,
    SpectrumNetwork, WidthMode, DEFAULT_GRID_SLOTS,
};
use roadm_cluster::fullload::{
    generate_connectivity_map, rearrangement_oracle, run_full_load, FabricState, RouteOutcome,
    SimConfig,
};
use roadm_cluster::lee::{
    analytic_sweep, average_over_load_grid, lee_blocking, weighted_blocking,
};
use roadm_cluster::topology::{
    build_cluster, classify_nonblocking, ClusterConfig, InterconnectPattern,
};

pub const TRIALS: u32 = 10_000;

pub type PropertyResult = Result<(), String>;

fn rng(salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0xACCE_5500 ^ salt)
}

// ---------------------------------------------------------------- topology

/// Proposed wiring is the complete bipartite graph with multiplicity one:
/// (E + F) * M fibers, and config-derived quantities are pure.
pub fn topology_complete_bipartite() -> PropertyResult {
    let mut rng = rng(1);
    for trial in 0..TRIALS {
        let config = ClusterConfig::new(
            rng.gen_range(1..=20),
            rng.gen_range(1..=20),
            rng.gen_range(1..=10),
            rng.gen_range(0..=10),
        )
        .unwrap();
        let topology = build_cluster(config, InterconnectPattern::Proposed)
            .map_err(|e| format!("trial {trial}: {e}"))?;
        let expected =
            u64::from(config.first_stage_chassis()) * u64::from(config.interconnect_chassis);
        if topology.fiber_count() != expected {
            return Err(format!(
                "trial {trial}: fiber count {} != {expected} for {config:?}",
                topology.fiber_count()
            ));
        }
        if !topology.fibers.iter().flatten().all(|&mult| mult == 1) {
            return Err(format!("trial {trial}: multiplicity above one in {config:?}"));
        }
        let degrees = (config.total_degrees(), config.total_degrees());
        let rates = (config.add_drop_rate(), config.add_drop_rate());
        if degrees.0 != degrees.1
            || rates.0 != rates.1
            || config.interconnect_cards() != config.line_chassis + config.add_drop_chassis
        {
            return Err(format!("trial {trial}: derived quantities not pure for {config:?}"));
        }
    }
    Ok(())
}

/// Raising the middle count never weakens the nonblocking class
/// (enumerated over the bounded grid n <= 40, k <= 90).
pub fn topology_classification_monotone() -> PropertyResult {
    for n in 1..=40u32 {
        let mut previous = classify_nonblocking(n, 1);
        for k in 2..=90u32 {
            let class = classify_nonblocking(n, k);
            if class < previous {
                return Err(format!("class regressed from {previous:?} to {class:?} at n={n} k={k}"));
            }
            previous = class;
        }
    }
    Ok(())
}

/// Strict-sense sizing (M = 2N - 1) routes every valid sequence with zero
/// blocking under the order-based scan.
pub fn topology_strict_sense_never_blocks() -> PropertyResult {
    let mut rng = rng(2);
    for trial in 0..TRIALS {
        let n = rng.gen_range(1..=4u32);
        let e = rng.gen_range(2..=4u32);
        let config = ClusterConfig::new(n, 2 * n - 1, e, 0).unwrap();
        let topology = build_cluster(config, InterconnectPattern::Proposed).unwrap();
        let mut state = FabricState::new(&topology, 1);
        let endpoints = e * n;
        let mut sources: Vec<u32> = (0..endpoints).collect();
        let mut dests: Vec<u32> = (0..endpoints).collect();
        sources.shuffle(&mut rng);
        dests.shuffle(&mut rng);
        let length = rng.gen_range(1..=endpoints as usize);
        for (&s, &d) in sources.iter().zip(&dests).take(length) {
            if s == d {
                continue;
            }
            let request = super::line_request(s / n, s % n, d / n, d % n, 0);
            let outcome = state.route(&request).map_err(|e| format!("trial {trial}: {e}"))?;
            if outcome == RouteOutcome::Blocked {
                return Err(format!(
                    "trial {trial}: blocked on strict-sense fabric n={n} e={e}: {request:?}"
                ));
            }
        }
    }
    Ok(())
}

// --------------------------------------------------------------------- lee

fn valid_tuple(rng: &mut ChaCha8Rng) -> (u32, u32, f64, u32) {
    let n = rng.gen_range(1..=24u32);
    let m = rng.gen_range(1..=30u32);
    let d_cap = m - 1;
    let d = if d_cap == 0 { 0 } else { rng.gen_range(0..=d_cap.min(n)) };
    // a in [d/n, min(1, m/n)]
    let lo = f64::from(d) / f64::from(n);
    let hi = (f64::from(m) / f64::from(n)).min(1.0);
    let a = lo + (hi - lo) * rng.gen::<f64>();
    (n, m, a, d)
}

/// Blocking is non-decreasing in the per-card load.
pub fn lee_monotone_in_load() -> PropertyResult {
    let mut rng = rng(3);
    for trial in 0..TRIALS {
        let (n, m, a1, d) = valid_tuple(&mut rng);
        let hi = (f64::from(m) / f64::from(n)).min(1.0);
        let a2 = a1 + (hi - a1) * rng.gen::<f64>();
        let b1 = lee_blocking(n, m, a1, d).map_err(|e| format!("trial {trial}: {e}"))?;
        let b2 = lee_blocking(n, m, a2, d).map_err(|e| format!("trial {trial}: {e}"))?;
        if b2 < b1 - 1e-15 {
            return Err(format!(
                "trial {trial}: blocking fell from {b1} to {b2} as load rose ({n},{m},{a1}->{a2},{d})"
            ));
        }
    }
    Ok(())
}

/// Blocking is non-increasing in the packing degree.
pub fn lee_monotone_in_packing() -> PropertyResult {
    let mut rng = rng(4);
    for trial in 0..TRIALS {
        let n = rng.gen_range(2..=24u32);
        let m = rng.gen_range(3..=30u32);
        let d2 = rng.gen_range(1..m.min(n + 1));
        let d1 = rng.gen_range(0..d2);
        let lo = f64::from(d2) / f64::from(n);
        let hi = (f64::from(m) / f64::from(n)).min(1.0);
        if lo > hi {
            continue;
        }
        let a = lo + (hi - lo) * rng.gen::<f64>();
        let b1 = lee_blocking(n, m, a, d1).map_err(|e| format!("trial {trial}: {e}"))?;
        let b2 = lee_blocking(n, m, a, d2).map_err(|e| format!("trial {trial}: {e}"))?;
        if b2 > b1 + 1e-15 {
            return Err(format!(
                "trial {trial}: packing {d1}->{d2} raised blocking {b1}->{b2} ({n},{m},{a})"
            ));
        }
    }
    Ok(())
}

/// Blocking is non-increasing in the middle-stage count.
pub fn lee_monotone_in_middles() -> PropertyResult {
    let mut rng = rng(5);
    for trial in 0..TRIALS {
        let (n, m1, a, d) = valid_tuple(&mut rng);
        let m2 = m1 + rng.gen_range(1..=10u32);
        let b1 = lee_blocking(n, m1, a, d).map_err(|e| format!("trial {trial}: {e}"))?;
        let b2 = lee_blocking(n, m2, a, d).map_err(|e| format!("trial {trial}: {e}"))?;
        if b2 > b1 + 1e-15 {
            return Err(format!(
                "trial {trial}: middles {m1}->{m2} raised blocking {b1}->{b2} ({n},{a},{d})"
            ));
        }
    }
    Ok(())
}

/// Outputs stay in [0, 1]; zero load yields exactly 0 and unit occupancy
/// exactly 1.
pub fn lee_bounds_and_fixed_points() -> PropertyResult {
    let mut rng = rng(6);
    for trial in 0..TRIALS {
        let (n, m, a, d) = valid_tuple(&mut rng);
        let b = lee_blocking(n, m, a, d).map_err(|e| format!("trial {trial}: {e}"))?;
        if !(0.0..=1.0).contains(&b) {
            return Err(format!("trial {trial}: blocking {b} out of bounds"));
        }
        let zero = lee_blocking(n, m, 0.0, 0).map_err(|e| format!("trial {trial}: {e}"))?;
        if zero != 0.0 {
            return Err(format!("trial {trial}: zero load gave {zero}"));
        }
        // p = 1: n cards at unit load over m = n middles.
        let d_sat = rng.gen_range(0..n);
        let saturated = lee_blocking(n, n, 1.0, d_sat).map_err(|e| format!("trial {trial}: {e}"))?;
        if saturated != 1.0 {
            return Err(format!("trial {trial}: saturated fabric gave {saturated}"));
        }
    }
    Ok(())
}

/// The weighted mean is invariant under uniform scaling of the loads.
pub fn lee_weighted_scale_invariance() -> PropertyResult {
    let mut rng = rng(7);
    for trial in 0..TRIALS {
        let len = rng.gen_range(1..=8usize);
        let profile: Vec<(f64, f64)> = (0..len)
            .map(|_| (rng.gen::<f64>(), rng.gen::<f64>() * 10.0 + 1e-6))
            .collect();
        let scale = rng.gen::<f64>() * 999.0 + 1e-3;
        let scaled: Vec<(f64, f64)> = profile.iter().map(|&(p, l)| (p, l * scale)).collect();
        let base = weighted_blocking(&profile).map_err(|e| format!("trial {trial}: {e}"))?;
        let after = weighted_blocking(&scaled).map_err(|e| format!("trial {trial}: {e}"))?;
        if (after - base).abs() > 1e-12 * base.abs().max(1e-12) {
            return Err(format!("trial {trial}: scaling by {scale} moved {base} to {after}"));
        }
    }
    Ok(())
}

/// The load-grid average of a constant integrand is that constant.
pub fn lee_constant_integrand_fixed_point() -> PropertyResult {
    let mut rng = rng(8);
    for trial in 0..TRIALS {
        let c = rng.gen::<f64>();
        let mean = average_over_load_grid(1000, |_| Some(Ok(c)))
            .map_err(|e| format!("trial {trial}: {e}"))?;
        if (mean - c).abs() > 1e-15 {
            return Err(format!("trial {trial}: constant {c} averaged to {mean}"));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- fullload

/// offered = accepted + blocked, and fabric occupancy is exactly two units
/// per request accepted through the interconnect stage.
pub fn fullload_conservation() -> PropertyResult {
    let mut rng = rng(9);
    for trial in 0..TRIALS {
        let config = ClusterConfig::new(
            rng.gen_range(1..=4),
            rng.gen_range(1..=5),
            rng.gen_range(1..=4),
            rng.gen_range(0..=2),
        )
        .unwrap();
        let wavelengths = rng.gen_range(1..=4u32);
        let capacity = config.total_degrees() * wavelengths;
        let connections = rng.gen_range(1..=capacity.max(1));
        let sim = SimConfig {
            connections_per_map: connections.min((capacity * 4 / 5).max(1)),
            wavelengths,
            maps: 1,
            seed: u64::from(trial),
            ..SimConfig::default()
        };
        let map = match generate_connectivity_map(&config, &sim, 0) {
            Ok(map) => map,
            Err(err) => return Err(format!("trial {trial}: generation failed: {err}")),
        };
        let topology = build_cluster(config, InterconnectPattern::Proposed).unwrap();
        let mut state = FabricState::new(&topology, wavelengths);
        let (mut accepted, mut blocked, mut local) = (0u64, 0u64, 0u64);
        for request in &map {
            match state.route(request).map_err(|e| format!("trial {trial}: {e}"))? {
                RouteOutcome::Accepted { .. } => accepted += 1,
                RouteOutcome::AcceptedLocal => {
                    accepted += 1;
                    local += 1;
                }
                RouteOutcome::Blocked => blocked += 1,
            }
        }
        if accepted + blocked != map.len() as u64 {
            return Err(format!("trial {trial}: counts do not add up"));
        }
        if state.occupied_units() != 2 * (accepted - local) {
            return Err(format!(
                "trial {trial}: occupancy {} != 2 * {}",
                state.occupied_units(),
                accepted - local
            ));
        }
    }
    Ok(())
}

/// Order-based blocking never beats the exact rearrangement minimum.
pub fn fullload_first_fit_dominance() -> PropertyResult {
    let mut rng = rng(10);
    for trial in 0..TRIALS {
        let n = rng.gen_range(1..=3u32);
        let m = rng.gen_range(1..=5u32);
        let e = rng.gen_range(2..=4u32);
        let config = ClusterConfig::new(n, m, e, 0).unwrap();
        let endpoints = e * n;
        let mut sources: Vec<u32> = (0..endpoints).collect();
        let mut dests: Vec<u32> = (0..endpoints).collect();
        sources.shuffle(&mut rng);
        dests.shuffle(&mut rng);
        let length = rng.gen_range(1..=(endpoints as usize).min(10));
        let requests: Vec<_> = sources
            .iter()
            .zip(&dests)
            .take(length)
            .filter(|(s, d)| s != d)
            .map(|(&s, &d)| super::line_request(s / n, s % n, d / n, d % n, 0))
            .collect();
        if requests.is_empty() {
            continue;
        }

        let topology = build_cluster(config, InterconnectPattern::Proposed).unwrap();
        let mut state = FabricState::new(&topology, 1);
        let mut first_fit_blocked = 0u32;
        for request in &requests {
            if state.route(request).map_err(|e| format!("trial {trial}: {e}"))?
                == RouteOutcome::Blocked
            {
                first_fit_blocked += 1;
            }
        }
        let minimum = rearrangement_oracle(&requests, &config)
            .map_err(|e| format!("trial {trial}: {e}"))?;
        if first_fit_blocked < minimum {
            return Err(format!(
                "trial {trial}: first-fit blocked {first_fit_blocked} < oracle {minimum}"
            ));
        }
    }
    Ok(())
}

/// run_full_load is deterministic and independent of worker count.
pub fn fullload_worker_invariance() -> PropertyResult {
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let wide = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap();
    let mut rng = rng(11);
    for trial in 0..1_000 {
        let config = ClusterConfig::new(
            rng.gen_range(2..=4),
            rng.gen_range(2..=5),
            rng.gen_range(2..=4),
            rng.gen_range(0..=2),
        )
        .unwrap();
        let wavelengths = rng.gen_range(1..=3u32);
        let sim = SimConfig {
            connections_per_map: (config.total_degrees() * wavelengths * 3 / 4).max(1),
            wavelengths,
            maps: rng.gen_range(1..=4),
            seed: rng.gen(),
            ..SimConfig::default()
        };
        let a = single.install(|| run_full_load(&config, &sim)).map_err(|e| e.to_string())?;
        let b = wide.install(|| run_full_load(&config, &sim)).map_err(|e| e.to_string())?;
        if a != b {
            return Err(format!("trial {trial}: results differ across thread counts"));
        }
    }
    Ok(())
}

/// The proposed wiring's blocking never exceeds the random wiring's on the
/// tested scenario matrix.
pub fn fullload_pattern_dominance() -> PropertyResult {
    let scenarios = [
        ClusterConfig::new(14, 16, 8, 8).unwrap(),
        ClusterConfig::new(14, 16, 10, 6).unwrap(),
        ClusterConfig::new(10, 12, 6, 6).unwrap(),
    ];
    for config in &scenarios {
        for seed in 1..=3u64 {
            let base = SimConfig {
                wavelengths: 40,
                maps: 20,
                seed,
                ..SimConfig::default()
            }
            .with_scaled_load(config, 0.85);
            let proposed = run_full_load(config, &base).map_err(|e| e.to_string())?;
            let random = run_full_load(
                config,
                &SimConfig {
                    pattern: InterconnectPattern::Random { seed },
                    ..base
                },
            )
            .map_err(|e| e.to_string())?;
            if proposed.blocking_rate > random.blocking_rate {
                return Err(format!(
                    "{config:?} seed {seed}: proposed {} > random {}",
                    proposed.blocking_rate, random.blocking_rate
                ));
            }
        }
    }
    Ok(())
}

/// Measured blocking is non-decreasing in the offered load.
pub fn fullload_load_monotonicity() -> PropertyResult {
    let config = ClusterConfig::new(3, 3, 3, 0).unwrap();
    for seed in 1..=3u64 {
        let mut previous = -1.0f64;
        for fill in [0.3, 0.5, 0.7, 0.9] {
            let sim = SimConfig {
                wavelengths: 4,
                maps: 8_000,
                seed,
                ..SimConfig::default()
            }
            .with_scaled_load(&config, fill);
            let result = run_full_load(&config, &sim).map_err(|e| e.to_string())?;
            if result.blocking_rate < previous {
                return Err(format!(
                    "seed {seed}: blocking fell to {} at fill {fill} (was {previous})",
                    result.blocking_rate
                ));
            }
            previous = result.blocking_rate;
        }
    }
    Ok(())
}

// --------------------------------------------------------------------- eon

/// New-design widths never exceed the original elastic widths, which never
/// exceed the fixed-grid widths (all 49 demand bitrates).
pub fn eon_width_dominance() -> PropertyResult {
    for bitrate in (40..=1000).step_by(20) {
        let nd = spectral_width(bitrate, WidthMode::NewDesign).map_err(|e| e.to_string())?;
        let oe = spectral_width(bitrate, WidthMode::OriginalEon).map_err(|e| e.to_string())?;
        let fx = spectral_width(bitrate, WidthMode::FixedWdm).map_err(|e| e.to_string())?;
        if !(nd <= oe && oe <= fx) {
            return Err(format!("dominance broken at {bitrate} Gb/s: {nd} / {oe} / {fx}"));
        }
    }
    Ok(())
}

/// Split flows always sum to the demand bitrate and respect the ceiling.
pub fn eon_flow_conservation() -> PropertyResult {
    for bitrate in (40..=1000).step_by(20) {
        let flows = split_flows(bitrate).map_err(|e| e.to_string())?;
        if flows.iter().sum::<u32>() != bitrate || flows.iter().any(|&f| f > 400) {
            return Err(format!("bad split of {bitrate}: {flows:?}"));
        }
    }
    let mut rng = rng(12);
    for trial in 0..TRIALS {
        let max_flow = 20 * rng.gen_range(1..=25u32);
        let subchannel = 20 * rng.gen_range(1..=10u32);
        let capacity = 10 * subchannel;
        let bitrate = 20 * rng.gen_range(1..=capacity / 20);
        let flows = split_flows_with(bitrate, subchannel, max_flow)
            .map_err(|e| format!("trial {trial}: {e}"))?;
        if flows.iter().sum::<u32>() != bitrate || flows.iter().any(|&f| f > max_flow) {
            return Err(format!("trial {trial}: bad split of {bitrate}: {flows:?}"));
        }
    }
    Ok(())
}

/// After any admission run the occupied slots equal the spans of the
/// carried allocations; rollbacks leave no orphans.
pub fn eon_slot_accounting() -> PropertyResult {
    let mut rng = rng(13);
    for trial in 0..TRIALS {
        let routers = rng.gen_range(2..=4u32);
        let slots = rng.gen_range(16..=48usize);
        let mut network = SpectrumNetwork::complete(routers, slots).map_err(|e| e.to_string())?;
        let demand_count = rng.gen_range(1..=30usize);
        let demands = generate_demands(routers, demand_count, u64::from(trial)).map_err(|e| e.to_string())?;
        let mode = *[WidthMode::OriginalEon, WidthMode::NewDesign, WidthMode::FixedWdm]
            .choose(&mut rng)
            .unwrap();
        let result = accommodate(&demands, &mut network, mode).map_err(|e| e.to_string())?;
        let carried_slots: usize = result
            .outcomes
            .iter()
            .filter_map(|outcome| match outcome {
                roadm_cluster::eon::DemandOutcome::Carried { allocations } => {
                    Some(allocations.iter().map(|&(_, span)| span).sum::<usize>())
                }
                roadm_cluster::eon::DemandOutcome::Blocked => None,
            })
            .sum();
        if network.occupied_slots() != carried_slots {
            return Err(format!(
                "trial {trial}: occupied {} != carried spans {carried_slots}",
                network.occupied_slots()
            ));
        }
    }
    Ok(())
}

/// Spectral width is non-decreasing in bitrate for every mode.
pub fn eon_monotone_interpolation() -> PropertyResult {
    for mode in [WidthMode::OriginalEon, WidthMode::NewDesign, WidthMode::FixedWdm] {
        let mut previous = 0.0f64;
        for bitrate in 1..=1000u32 {
            let width = spectral_width(bitrate, mode).map_err(|e| e.to_string())?;
            if width < previous {
                return Err(format!("{mode:?}: width fell to {width} at {bitrate} Gb/s"));
            }
            previous = width;
        }
    }
    Ok(())
}

/// Independent linear-scan oracle: the minimal start of a contiguous free
/// run of `span` slots, or `None`.
fn minimal_free_start(grid: &SpectrumGrid, span: usize) -> Option<usize> {
    'starts: for start in 0..grid.slot_count().saturating_sub(span - 1) {
        for offset in 0..span {
            if !grid.is_slot_free(start + offset) {
                continue 'starts;
            }
        }
        return Some(start);
    }
    None
}

/// First-fit allocation agrees with the linear-scan oracle and never
/// overlaps existing slots.
pub fn eon_first_fit_soundness() -> PropertyResult {
    let mut rng = rng(14);
    for trial in 0..TRIALS {
        let slots = rng.gen_range(4..=64usize);
        let mut grid = SpectrumGrid::new(slots);
        // Random pre-occupancy through the public interface.
        for _ in 0..rng.gen_range(0..=10) {
            let span = rng.gen_range(1..=4usize);
            let _ = grid.allocate_first_fit(span);
            if rng.gen_bool(0.3) {
                let start = rng.gen_range(0..slots);
                grid.free(start, 1);
            }
        }
        let span = rng.gen_range(1..=6usize);
        let expected = minimal_free_start(&grid, span);
        let occupied_before = grid.occupied_count();
        let got = grid.allocate_first_fit(span);
        if got != expected {
            return Err(format!("trial {trial}: allocated {got:?}, oracle says {expected:?}"));
        }
        match got {
            Some(start) => {
                if grid.occupied_count() != occupied_before + span {
                    return Err(format!("trial {trial}: allocation overlapped existing slots"));
                }
                if (start..start + span).any(|i| grid.is_slot_free(i)) {
                    return Err(format!("trial {trial}: allocated slots not marked"));
                }
            }
            None => {
                if grid.occupied_count() != occupied_before {
                    return Err(format!("trial {trial}: failed allocation mutated the grid"));
                }
            }
        }
    }
    Ok(())
}

// --------------------------------------------------------------------- csv

/// Emitted CSV bodies parse under a strict reader: fixed headers, constant
/// column counts, '.'-decimal numerals.
pub fn csv_strictness() -> PropertyResult {
    let sweep = analytic_sweep(14, 16, &[0.0, 0.5, 1.0], &[0, 4], false);
    super::check_strict_csv(&sweep.to_csv(), "a,d,P_b")?;

    let cases = roadm_cluster::fullload::builtin_scenarios(
        SimConfig {
            wavelengths: 8,
            maps: 1,
            seed: 1,
            ..SimConfig::default()
        },
        Some(0.2),
    );
    let report = roadm_cluster::fullload::run_scenarios(&cases);
    super::check_strict_csv(
        &report.to_csv(),
        "case,E,F,degrees,add_drop_rate,offered,blocked,blocking_rate,ci95",
    )?;

    let compare = roadm_cluster::eon::compare_approaches(4, 60, DEFAULT_GRID_SLOTS, &[1, 2])
        .map_err(|e| e.to_string())?;
    super::check_strict_csv(
        &compare.to_csv(),
        "seed,carried_elastic_gbps,carried_fixed_gbps,ratio",
    )?;
    Ok(())
}
