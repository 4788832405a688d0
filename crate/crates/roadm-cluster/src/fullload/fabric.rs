//! Per-wavelength fabric occupancy and order-based routing.

use super::{ConnectionRequest, Endpoint, SimError};
use crate::topology::ClusterTopology;

/// Routing outcome for one connection request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouteOutcome {
    /// Routed through the given interconnect chassis; one first-stage hop
    /// and one third-stage hop are now occupied on the request wavelength.
    Accepted { interconnect: u32 },
    /// Source and destination share a first-stage chassis: switched locally
    /// without consuming interconnect fibers.
    AcceptedLocal,
    /// No interconnect chassis had both hops free on the request wavelength.
    Blocked,
}

/// Wavelength-resolved occupancy of a cluster fabric.
///
/// Every (outer chassis, interconnect chassis) pair carries `cap` duplex
/// fiber pairs (1 everywhere under the proposed pattern). A routed request
/// occupies one upstream unit at its source chassis and one downstream unit
/// at its destination chassis on its wavelength. Endpoint cards are tracked
/// per direction: a card can source at most one and terminate at most one
/// connection per wavelength.
#[derive(Debug, Clone)]
pub struct FabricState {
    first_stage: u32,
    middles: u32,
    wavelengths: u32,
    line_chassis: u32,
    cards_per_chassis: u32,
    endpoints: u32,
    cap: Vec<u8>,
    used_up: Vec<u8>,
    used_down: Vec<u8>,
    src_used: Vec<bool>,
    dst_used: Vec<bool>,
    occupied_units: u64,
    local_switched: u64,
}

impl FabricState {
    pub fn new(topology: &ClusterTopology, wavelengths: u32) -> Self {
        let cfg = &topology.config;
        let first_stage = cfg.first_stage_chassis();
        let middles = cfg.interconnect_chassis;
        let endpoints = first_stage * cfg.line_cards;
        let mut cap = vec![0u8; (first_stage * middles) as usize];
        for (u, row) in topology.fibers.iter().enumerate() {
            for (m, &mult) in row.iter().enumerate() {
                cap[u * middles as usize + m] = mult;
            }
        }
        FabricState {
            first_stage,
            middles,
            wavelengths,
            line_chassis: cfg.line_chassis,
            cards_per_chassis: cfg.line_cards,
            endpoints,
            cap,
            used_up: vec![0; (wavelengths * first_stage * middles) as usize],
            used_down: vec![0; (wavelengths * first_stage * middles) as usize],
            src_used: vec![false; (wavelengths * endpoints) as usize],
            dst_used: vec![false; (wavelengths * endpoints) as usize],
            occupied_units: 0,
            local_switched: 0,
        }
    }

    /// Fiber-wavelength units currently occupied; equals twice the number of
    /// requests accepted through the interconnect stage.
    pub fn occupied_units(&self) -> u64 {
        self.occupied_units
    }

    /// Requests accepted by local switching (no fabric units consumed).
    pub fn local_switched(&self) -> u64 {
        self.local_switched
    }

    pub fn wavelengths(&self) -> u32 {
        self.wavelengths
    }

    /// Clear all occupancy, keeping the wiring.
    pub fn reset(&mut self) {
        self.used_up.fill(0);
        self.used_down.fill(0);
        self.src_used.fill(false);
        self.dst_used.fill(false);
        self.occupied_units = 0;
        self.local_switched = 0;
    }

    /// Flat endpoint id; line degrees first, then add/drop ports.
    pub(crate) fn endpoint_id(&self, endpoint: &Endpoint) -> Result<u32, SimError> {
        match *endpoint {
            Endpoint::LineDegree { chassis, card } => {
                if chassis >= self.line_chassis || card >= self.cards_per_chassis {
                    return Err(SimError::InvalidEndpoint {
                        endpoint: *endpoint,
                    });
                }
                Ok(chassis * self.cards_per_chassis + card)
            }
            Endpoint::AddDropPort { chassis, port } => {
                let add_drop = self.first_stage - self.line_chassis;
                if chassis >= add_drop || port >= self.cards_per_chassis {
                    return Err(SimError::InvalidEndpoint {
                        endpoint: *endpoint,
                    });
                }
                Ok((self.line_chassis + chassis) * self.cards_per_chassis + port)
            }
        }
    }

    fn chassis_of(&self, endpoint_id: u32) -> u32 {
        endpoint_id / self.cards_per_chassis
    }

    /// Route one request with the order-based method: scan interconnect
    /// chassis in ascending index and accept through the first one with both
    /// the source upstream hop and the destination downstream hop free on
    /// the request wavelength. Blocked requests leave the state unchanged.
    pub fn route(&mut self, request: &ConnectionRequest) -> Result<RouteOutcome, SimError> {
        if request.wavelength >= self.wavelengths {
            return Err(SimError::InvalidWavelength {
                wavelength: request.wavelength,
                limit: self.wavelengths,
            });
        }
        let src = self.endpoint_id(&request.src)?;
        let dst = self.endpoint_id(&request.dst)?;
        if src == dst {
            return Err(SimError::SelfConnection { endpoint: request.src });
        }
        let w = request.wavelength;
        let src_slot = (w * self.endpoints + src) as usize;
        let dst_slot = (w * self.endpoints + dst) as usize;
        if self.src_used[src_slot] {
            return Err(SimError::EndpointOccupied {
                endpoint: request.src,
                wavelength: w,
            });
        }
        if self.dst_used[dst_slot] {
            return Err(SimError::EndpointOccupied {
                endpoint: request.dst,
                wavelength: w,
            });
        }

        let src_chassis = self.chassis_of(src);
        let dst_chassis = self.chassis_of(dst);
        if src_chassis == dst_chassis {
            self.src_used[src_slot] = true;
            self.dst_used[dst_slot] = true;
            self.local_switched += 1;
            return Ok(RouteOutcome::AcceptedLocal);
        }

        let fm = self.first_stage * self.middles;
        let up_base = (w * fm + src_chassis * self.middles) as usize;
        let down_base = (w * fm + dst_chassis * self.middles) as usize;
        let cap_up = (src_chassis * self.middles) as usize;
        let cap_down = (dst_chassis * self.middles) as usize;
        for m in 0..self.middles as usize {
            if self.used_up[up_base + m] < self.cap[cap_up + m]
                && self.used_down[down_base + m] < self.cap[cap_down + m]
            {
                self.used_up[up_base + m] += 1;
                self.used_down[down_base + m] += 1;
                self.src_used[src_slot] = true;
                self.dst_used[dst_slot] = true;
                self.occupied_units += 2;
                return Ok(RouteOutcome::Accepted { interconnect: m as u32 });
            }
        }
        Ok(RouteOutcome::Blocked)
    }
}
