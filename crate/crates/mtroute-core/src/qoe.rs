//! Utilization metrics and the logarithmic VoIP MOS model.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{LinkLoadMap, Network, Path};

/// `MOS = beta + gamma * ln(X - alpha)` with `X` in Kbps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MosModel {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for MosModel {
    fn default() -> Self {
        MosModel {
            alpha: 4.091,
            beta: 1.515,
            gamma: 1.0,
        }
    }
}

impl MosModel {
    /// Unbounded score; `None` where the logarithm is undefined (`X <= alpha`).
    pub fn raw(&self, x_kbps: f64) -> Option<f64> {
        if x_kbps > self.alpha {
            Some(self.beta + self.gamma * libm::log(x_kbps - self.alpha))
        } else {
            None
        }
    }
}

/// Lower- and upper-bounded MOS for one bitrate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MosScore {
    pub min: f64,
    pub max: f64,
}

/// `max(1, raw)` and `min(5, raw)`, then both held to `[1, 5]`.
///
/// Bitrates at or below `alpha` score 1.
pub fn mos(x_kbps: f64, model: &MosModel) -> MosScore {
    let raw = model.raw(x_kbps).unwrap_or(f64::NEG_INFINITY);
    let lo = raw.max(1.0).clamp(1.0, 5.0);
    let hi = raw.min(5.0).clamp(1.0, 5.0);
    MosScore {
        min: lo.min(hi),
        max: lo.max(hi),
    }
}

/// `f / C` per link.
pub fn link_utilization(net: &Network, loads: &LinkLoadMap) -> Vec<f64> {
    net.links().map(|(id, l)| loads.get(id) / l.capacity_mbps).collect()
}

/// Maximum link utilization. Overload shows up as values above 1.
pub fn mlu(net: &Network, loads: &LinkLoadMap) -> f64 {
    link_utilization(net, loads).into_iter().fold(0.0, f64::max)
}

/// Minimum residual capacity ratio, `1 - mlu`.
pub fn mrc(net: &Network, loads: &LinkLoadMap) -> f64 {
    1.0 - mlu(net, loads)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerfRatio {
    /// `alg_mrc / opt_mrc`, capped at 1 when the cap was hit.
    pub value: f64,
    /// Set when the raw ratio exceeded `1 + 1e-6`, i.e. the "optimal" value
    /// was beaten.
    pub dominance_violation: bool,
}

pub fn perf_ratio(alg_mrc: f64, opt_mrc: f64) -> Result<PerfRatio> {
    if !(opt_mrc > 0.0) {
        return Err(Error::UndefinedRatio);
    }
    let raw = alg_mrc / opt_mrc;
    Ok(if raw > 1.0 + 1e-6 {
        PerfRatio {
            value: 1.0,
            dominance_violation: true,
        }
    } else {
        PerfRatio {
            value: raw,
            dominance_violation: false,
        }
    })
}

/// `min(1 - MLU(l))` over the links of `path`; 1 for the empty path.
pub fn path_bitrate(path: &Path, utilization: &[f64]) -> f64 {
    path.links()
        .iter()
        .map(|l| 1.0 - utilization[l.0])
        .fold(1.0, f64::min)
}

/// Smallest link capacity along `path`.
pub fn bottleneck_capacity(net: &Network, path: &Path) -> f64 {
    path.links()
        .iter()
        .map(|&l| net.link(l).capacity_mbps)
        .fold(f64::INFINITY, f64::min)
}

/// Per-flow bitrate in Kbps when `n_flows` share the available fraction of a
/// path whose bottleneck capacity is given in Mbps.
pub fn per_flow_bitrate(path_fraction: f64, bottleneck_capacity_mbps: f64, n_flows: u32) -> Result<f64> {
    if n_flows == 0 {
        return Err(Error::ZeroFlows);
    }
    Ok(path_fraction * bottleneck_capacity_mbps * 1000.0 / f64::from(n_flows))
}
