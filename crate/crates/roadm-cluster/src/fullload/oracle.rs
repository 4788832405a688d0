//! Exact minimal-blocking search over middle-stage assignments.
//!
//! Used to separate first-fit behaviour from fabric feasibility on small
//! instances: the oracle returns the minimum number of blocked requests over
//! every possible middle-stage assignment, so any routing method's blocked
//! count is bounded below by it.

use super::{ConnectionRequest, Endpoint, SimError};
use crate::topology::ClusterConfig;

/// Exact-search size gate: larger instances are rejected.
const MAX_REQUESTS: usize = 12;
const MAX_CHASSIS: u32 = 4;

struct Search {
    middles: u32,
    edges: Vec<(u32, u32)>,
    up: Vec<u64>,
    down: Vec<u64>,
    best: u32,
}

impl Search {
    fn dfs(&mut self, index: usize, blocked: u32, colors_used: u32) {
        if blocked >= self.best {
            return;
        }
        if index == self.edges.len() {
            self.best = blocked;
            return;
        }
        let (src, dst) = self.edges[index];
        // Middles are interchangeable: trying the used ones plus one fresh
        // color covers every assignment up to symmetry.
        let limit = (colors_used + 1).min(self.middles);
        for m in 0..limit {
            let bit = 1u64 << m;
            if self.up[src as usize] & bit == 0 && self.down[dst as usize] & bit == 0 {
                self.up[src as usize] |= bit;
                self.down[dst as usize] |= bit;
                self.dfs(index + 1, blocked, colors_used.max(m + 1));
                self.up[src as usize] &= !bit;
                self.down[dst as usize] &= !bit;
                if self.best <= blocked {
                    return;
                }
            }
        }
        self.dfs(index + 1, blocked + 1, colors_used);
    }
}

fn chassis_pair(config: &ClusterConfig, request: &ConnectionRequest) -> Result<(u32, u32), SimError> {
    let locate = |endpoint: &Endpoint| -> Result<u32, SimError> {
        match *endpoint {
            Endpoint::LineDegree { chassis, card } => {
                if chassis >= config.line_chassis || card >= config.line_cards {
                    Err(SimError::InvalidEndpoint { endpoint: *endpoint })
                } else {
                    Ok(chassis)
                }
            }
            Endpoint::AddDropPort { chassis, port } => {
                if chassis >= config.add_drop_chassis || port >= config.line_cards {
                    Err(SimError::InvalidEndpoint { endpoint: *endpoint })
                } else {
                    Ok(config.line_chassis + chassis)
                }
            }
        }
    };
    Ok((locate(&request.src)?, locate(&request.dst)?))
}

/// First-fit blocked count on bare chassis masks; seeds the search bound.
fn greedy_blocked(middles: u32, edges: &[(u32, u32)], chassis: u32) -> u32 {
    let mut up = vec![0u64; chassis as usize];
    let mut down = vec![0u64; chassis as usize];
    let mut blocked = 0;
    'next: for &(src, dst) in edges {
        for m in 0..middles {
            let bit = 1u64 << m;
            if up[src as usize] & bit == 0 && down[dst as usize] & bit == 0 {
                up[src as usize] |= bit;
                down[dst as usize] |= bit;
                continue 'next;
            }
        }
        blocked += 1;
    }
    blocked
}

/// Minimum number of blocked requests over all middle-stage assignments of
/// a single-wavelength instance on the complete (proposed) wiring.
///
/// Requests whose endpoints share a first-stage chassis are switched locally
/// and never blocked; they do not enter the search. Endpoint-card reuse is
/// permitted here — the oracle reasons about fiber feasibility only.
pub fn rearrangement_oracle(
    requests: &[ConnectionRequest],
    config: &ClusterConfig,
) -> Result<u32, SimError> {
    let chassis = config.first_stage_chassis();
    if requests.len() > MAX_REQUESTS && chassis > MAX_CHASSIS {
        return Err(SimError::OracleInstanceTooLarge {
            requests: requests.len(),
            chassis,
        });
    }
    let middles = config.interconnect_chassis;
    if middles > 64 {
        return Err(SimError::OracleInstanceTooLarge {
            requests: requests.len(),
            chassis,
        });
    }
    if let Some(first) = requests.first() {
        if requests.iter().any(|r| r.wavelength != first.wavelength) {
            return Err(SimError::OracleMixedWavelengths);
        }
    }

    let mut edges = Vec::with_capacity(requests.len());
    for request in requests {
        let (src, dst) = chassis_pair(config, request)?;
        if src != dst {
            edges.push((src, dst));
        }
    }

    let mut search = Search {
        middles,
        best: greedy_blocked(middles, &edges, chassis),
        edges,
        up: vec![0; chassis as usize],
        down: vec![0; chassis as usize],
    };
    if search.best > 0 {
        search.dfs(0, 0, 0);
    }
    Ok(search.best)
}
