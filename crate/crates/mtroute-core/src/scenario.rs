//! Three-cell LTE reference network and per-interval traffic matrices.
//!
//! Each cell has one eNB with two cell-edge relays. The eNBs reach the PGW
//! over a wired chain through the central router `CR` and over a second wired
//! chain through a per-cell access router. eNBs are meshed over wireless
//! links, every relay hangs off its eNB, and neighbouring cells' edge relays
//! are linked pairwise in a ring.
//!
//! Demands run between every attachment point (eNB or relay) and the PGW in
//! both directions, each split into a realtime and a non-realtime part.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::flow::{TrafficClass, TrafficDemand};
use crate::graph::{Network, NodeKind};

pub const INTERVALS_PER_DAY: usize = 48;

#[derive(Debug, Clone, PartialEq)]
pub struct CellConfig {
    pub enb: String,
    pub access_router: String,
    pub relays: Vec<String>,
    pub users: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub gateway: String,
    pub central_anchor: String,
    pub cells: Vec<CellConfig>,
    pub backhaul_capacity_mbps: f64,
    pub wireless_capacity_mbps: f64,
    pub link_delay_ms: u32,
    pub per_user_daily_mb: f64,
    pub uplink_fraction_of_downlink: f64,
    /// Share of a cell's users attached directly to the eNB.
    pub direct_share: f64,
    pub realtime_share: f64,
    pub diurnal_profile: Vec<f64>,
    /// First and last interval (1-based, inclusive) of the evaluation window.
    pub interval_range: (u32, u32),
    pub interval_minutes: u32,
    pub d_realtime_ms: u32,
    pub d_nonrealtime_ms: u32,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let cell = |i: u32, users| CellConfig {
            enb: format!("eNB{i}"),
            access_router: format!("R{i}"),
            relays: vec![format!("RN{i}a"), format!("RN{i}b")],
            users,
        };
        ScenarioConfig {
            gateway: "PGW".to_string(),
            central_anchor: "CR".to_string(),
            cells: vec![cell(1, 300), cell(2, 450), cell(3, 300)],
            backhaul_capacity_mbps: 40.0,
            wireless_capacity_mbps: 20.0,
            link_delay_ms: 1,
            per_user_daily_mb: 170.0,
            uplink_fraction_of_downlink: 0.3,
            direct_share: 0.5,
            realtime_share: 0.4,
            diurnal_profile: default_profile(),
            interval_range: (16, 48),
            interval_minutes: 30,
            d_realtime_ms: 4,
            d_nonrealtime_ms: 10,
        }
    }
}

/// One problem found by [`ScenarioConfig::validate`], located by field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub location: String,
    pub message: String,
}

fn issue(location: impl Into<String>, message: impl Into<String>) -> Issue {
    Issue {
        location: location.into(),
        message: message.into(),
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Vec<Issue> {
        let mut out = Vec::new();
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.backhaul_capacity_mbps) {
            out.push(issue("backhaul_capacity_mbps", "must be positive"));
        }
        if !positive(self.wireless_capacity_mbps) {
            out.push(issue("wireless_capacity_mbps", "must be positive"));
        }
        if self.link_delay_ms == 0 {
            out.push(issue("link_delay_ms", "must be a positive integer"));
        }
        if !(self.per_user_daily_mb.is_finite() && self.per_user_daily_mb >= 0.0) {
            out.push(issue("per_user_daily_mb", "must be non-negative"));
        }
        if !(self.uplink_fraction_of_downlink.is_finite() && self.uplink_fraction_of_downlink >= 0.0) {
            out.push(issue("uplink_fraction_of_downlink", "must be non-negative"));
        }
        for (name, v) in [("direct_share", self.direct_share), ("realtime_share", self.realtime_share)] {
            if !(0.0..=1.0).contains(&v) {
                out.push(issue(name, "must lie in [0, 1]"));
            }
        }
        if self.diurnal_profile.len() != INTERVALS_PER_DAY {
            out.push(issue(
                "diurnal_profile",
                format!("expected {INTERVALS_PER_DAY} weights, got {}", self.diurnal_profile.len()),
            ));
        }
        for (i, w) in self.diurnal_profile.iter().enumerate() {
            if !(w.is_finite() && *w >= 0.0) {
                out.push(issue(format!("diurnal_profile[{i}]"), "weight must be non-negative"));
            }
        }
        let sum: f64 = self.diurnal_profile.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            out.push(issue(
                "diurnal_profile",
                format!("weights sum to {sum}, expected 1 within 1e-9"),
            ));
        }
        let (first, last) = self.interval_range;
        if first < 1 || last as usize > INTERVALS_PER_DAY || first > last {
            out.push(issue(
                "interval_range",
                format!("must satisfy 1 <= first <= last <= {INTERVALS_PER_DAY}"),
            ));
        }
        if self.interval_minutes == 0 {
            out.push(issue("interval_minutes", "must be positive"));
        }
        if self.d_realtime_ms == 0 {
            out.push(issue("d_realtime_ms", "must be a positive integer"));
        }
        if self.d_nonrealtime_ms == 0 {
            out.push(issue("d_nonrealtime_ms", "must be a positive integer"));
        }
        if self.cells.is_empty() {
            out.push(issue("cells", "at least one cell is required"));
        }
        for (i, c) in self.cells.iter().enumerate() {
            if c.users == 0 {
                out.push(issue(format!("cells[{i}].users"), "must be positive"));
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        match self.validate().into_iter().next() {
            None => Ok(()),
            Some(i) => Err(Error::InvalidScenario(format!("{}: {}", i.location, i.message))),
        }
    }

    /// Layered-graph horizon used for topology discovery: one more than the
    /// largest class delay bound, so paths meeting any bound are kept.
    pub fn discovery_horizon(&self) -> u32 {
        self.d_realtime_ms.max(self.d_nonrealtime_ms) + 1
    }

    pub fn delay_bound(&self, class: TrafficClass) -> u32 {
        match class {
            TrafficClass::Realtime => self.d_realtime_ms,
            TrafficClass::NonRealtime => self.d_nonrealtime_ms,
        }
    }

    pub fn intervals(&self) -> core::ops::RangeInclusive<u32> {
        self.interval_range.0..=self.interval_range.1
    }
}

/// Synthetic weekday profile over 48 half-hour intervals: a night trough
/// between 02:00 and 06:00, a late-morning and an afternoon plateau, and the
/// daily peak between 20:00 and 22:00. Sums to 1.
pub fn default_profile() -> Vec<f64> {
    let bump = |h: f64, mu: f64, sigma: f64| libm::exp(-(h - mu) * (h - mu) / (2.0 * sigma * sigma));
    let raw: Vec<f64> = (0..INTERVALS_PER_DAY)
        .map(|i| {
            let h = (i as f64 + 0.5) / 2.0;
            0.08 + 0.5 * bump(h, 10.5, 2.5) + 0.6 * bump(h, 15.0, 3.0) + bump(h, 21.0, 1.5) + 0.3 * bump(h, -3.0, 1.5)
        })
        .collect();
    normalize(raw)
}

/// Equal weight in every interval.
pub fn flat_profile() -> Vec<f64> {
    vec![1.0 / INTERVALS_PER_DAY as f64; INTERVALS_PER_DAY]
}

pub fn normalize(mut weights: Vec<f64>) -> Vec<f64> {
    let sum: f64 = weights.iter().sum();
    if sum > 0.0 {
        weights.iter_mut().for_each(|w| *w /= sum);
    }
    weights
}

/// Builds the reference network described in the module docs.
pub fn build_reference_network(cfg: &ScenarioConfig) -> Result<Network> {
    cfg.ensure_valid()?;
    let wired = cfg.backhaul_capacity_mbps;
    let wireless = cfg.wireless_capacity_mbps;
    let d = cfg.link_delay_ms;
    let mut b = Network::builder();
    b.node(cfg.gateway.as_str(), NodeKind::Gateway)
        .node(cfg.central_anchor.as_str(), NodeKind::Router);
    b.duplex(&cfg.gateway, &cfg.central_anchor, wired, d);
    for c in &cfg.cells {
        b.node(c.enb.as_str(), NodeKind::Enb)
            .node(c.access_router.as_str(), NodeKind::Router);
        b.duplex(&cfg.central_anchor, &c.enb, wired, d)
            .duplex(&cfg.gateway, &c.access_router, wired, d)
            .duplex(&c.access_router, &c.enb, wired, d);
        for r in &c.relays {
            b.node(r.as_str(), NodeKind::Relay);
            b.duplex(&c.enb, r, wireless, d);
        }
    }
    let n = cfg.cells.len();
    for i in 0..n {
        for j in i + 1..n {
            b.duplex(&cfg.cells[i].enb, &cfg.cells[j].enb, wireless, d);
        }
    }
    // Edge-relay ring: last relay of cell i to first relay of cell i+1.
    let mut ring = Vec::new();
    if n >= 2 {
        for i in 0..n {
            let j = (i + 1) % n;
            if n == 2 && i == 1 {
                break;
            }
            if let (Some(a), Some(z)) = (cfg.cells[i].relays.last(), cfg.cells[j].relays.first()) {
                if a != z && !ring.contains(&(z.clone(), a.clone())) {
                    ring.push((a.clone(), z.clone()));
                }
            }
        }
    }
    for (a, z) in &ring {
        b.duplex(a, z, wireless, d);
    }
    b.build()
}

/// Users per attachment point, in cell order: the eNB, then its relays.
///
/// The eNB gets `floor(users * direct_share)`; relays split the rest evenly,
/// each taking the floor and the last relay taking the remainder.
pub fn attachment_points(cfg: &ScenarioConfig) -> Vec<(String, u32)> {
    let mut out = Vec::new();
    for c in &cfg.cells {
        if c.relays.is_empty() {
            out.push((c.enb.clone(), c.users));
            continue;
        }
        let direct = libm::floor(f64::from(c.users) * cfg.direct_share) as u32;
        let rest = c.users - direct;
        out.push((c.enb.clone(), direct));
        let per = rest / c.relays.len() as u32;
        for (i, r) in c.relays.iter().enumerate() {
            let n = if i + 1 == c.relays.len() {
                rest - per * (c.relays.len() as u32 - 1)
            } else {
                per
            };
            out.push((r.clone(), n));
        }
    }
    out
}

/// Megabytes per user per day split into (downlink, uplink).
pub fn per_user_daily_split(cfg: &ScenarioConfig) -> (f64, f64) {
    let down = cfg.per_user_daily_mb / (1.0 + cfg.uplink_fraction_of_downlink);
    (down, down * cfg.uplink_fraction_of_downlink)
}

/// Mean rate in Mbps of a volume in MB spread over one interval.
pub fn mb_to_mbps(cfg: &ScenarioConfig, mb: f64) -> f64 {
    mb * 8.0 / (f64::from(cfg.interval_minutes) * 60.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalDemands {
    pub interval: u32,
    pub demands: Vec<TrafficDemand>,
}

/// Traffic matrix of one interval on `net` (usually the reference network).
///
/// For every attachment point, in order: downlink realtime, downlink
/// non-realtime, uplink realtime, uplink non-realtime. Demand ids are
/// consecutive from 0.
pub fn generate_interval_demands(cfg: &ScenarioConfig, net: &Network, interval: u32) -> Result<IntervalDemands> {
    cfg.ensure_valid()?;
    let (first, last) = cfg.interval_range;
    if interval < first || interval > last {
        return Err(Error::IntervalOutOfRange { interval, first, last });
    }
    let weight = cfg.diurnal_profile[interval as usize - 1];
    let (down_mb, up_mb) = per_user_daily_split(cfg);
    let gw = net.require_node(&cfg.gateway)?;
    let mut demands = Vec::new();
    for (point, users) in attachment_points(cfg) {
        let p = net.require_node(&point)?;
        let users = f64::from(users);
        for (src, dst, mb) in [(gw, p, down_mb), (p, gw, up_mb)] {
            let total = mb_to_mbps(cfg, users * mb * weight);
            let rt = total * cfg.realtime_share;
            let nrt = total - rt;
            for (class, v) in [(TrafficClass::Realtime, rt), (TrafficClass::NonRealtime, nrt)] {
                let id = demands.len();
                demands.push(TrafficDemand::new(id, src, dst, v, class, cfg.delay_bound(class))?);
            }
        }
    }
    Ok(IntervalDemands { interval, demands })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = ScenarioConfig::default();
        assert_eq!(cfg.validate(), vec![]);
        assert!((cfg.diurnal_profile.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reference_capacities_and_delays() {
        let cfg = ScenarioConfig::default();
        let net = build_reference_network(&cfg).unwrap();
        for (id, l) in net.links() {
            assert_eq!(l.delay_ms, 1);
            let (a, b) = (net.node(l.src).kind, net.node(l.dst).kind);
            let wireless = matches!(
                (a, b),
                (NodeKind::Enb, NodeKind::Enb)
                    | (NodeKind::Relay, _)
                    | (_, NodeKind::Relay)
            );
            assert_eq!(l.capacity_mbps, if wireless { 20.0 } else { 40.0 }, "{}", net.link_label(id));
        }
        assert_eq!(net.node_count(), 14);
        // 4 gateway/anchor + 3x(3 wired + 2 relay) + 3 eNB mesh + 3 relay ring, both directions.
        assert_eq!(net.link_count(), 2 * (1 + 3 * 5 + 3 + 3));
    }

    #[test]
    fn per_user_split() {
        let (down, up) = per_user_daily_split(&ScenarioConfig::default());
        assert!((down - 130.769).abs() < 1e-3);
        assert!((up - 39.231).abs() < 1e-3);
        assert!((up - 0.3 * down).abs() < 1e-12);
    }

    #[test]
    fn relay_rounding() {
        let pts = attachment_points(&ScenarioConfig::default());
        let center: Vec<u32> = pts[3..6].iter().map(|p| p.1).collect();
        assert_eq!(center, [225, 112, 113]);
        assert_eq!(pts[0].1 + pts[1].1 + pts[2].1, 300);
    }

    #[test]
    fn flat_profile_repeats_matrices() {
        let cfg = ScenarioConfig {
            diurnal_profile: flat_profile(),
            ..ScenarioConfig::default()
        };
        let net = build_reference_network(&cfg).unwrap();
        let a = generate_interval_demands(&cfg, &net, 16).unwrap();
        let b = generate_interval_demands(&cfg, &net, 40).unwrap();
        assert_eq!(a.demands, b.demands);
        assert!(matches!(
            generate_interval_demands(&cfg, &net, 3),
            Err(Error::IntervalOutOfRange { .. })
        ));
    }
}
