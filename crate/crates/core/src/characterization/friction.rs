//! Mold friction from pressure differences between neighboring sensors.

use crate::error::{Error, Result};
use crate::material::FrictionModel;

/// Pressure history of one sensor.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorTrace {
    /// Position along the flow direction (m).
    pub x: f64,
    pub times: Vec<f64>,
    /// Gauge pressure (Pa).
    pub pressures: Vec<f64>,
}

/// Gap history sampled on the sensor time base.
#[derive(Debug, Clone, PartialEq)]
pub struct GapHistory {
    /// Gap (m).
    pub h: Vec<f64>,
    /// Gap rate (m/s), negative while closing.
    pub hdot: Vec<f64>,
}

impl GapHistory {
    /// Gap rate by finite differences (central inside, one-sided at the ends).
    pub fn from_gap(times: &[f64], h: Vec<f64>) -> Result<Self> {
        let n = h.len();
        if n < 2 || times.len() != n {
            return Err(Error::InvalidInput("gap history needs at least two samples on the time base".into()));
        }
        let hdot = (0..n)
            .map(|i| {
                let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
                (h[b] - h[a]) / (times[b] - times[a])
            })
            .collect();
        Ok(Self { h, hdot })
    }
}

/// One friction observation between a sensor pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrictionSample {
    pub t: f64,
    /// Slip velocity at the pair midpoint (m/s), positive in the flow direction.
    pub v: f64,
    /// Wall shear stress (Pa), opposing the slip.
    pub tau: f64,
}

/// Friction samples from one sensor pair. Only instants where the upstream
/// sensor reads more than `threshold` (Pa) above the downstream one are kept.
///
/// The slip speed follows from incompressible plug flow, v = -(ḣ/h) x_mid, so
/// that it is positive for outward flow while the press closes.
pub fn extract_friction(
    upstream: &SensorTrace,
    downstream: &SensorTrace,
    gap: &GapHistory,
    threshold: f64,
) -> Result<Vec<FrictionSample>> {
    let n = upstream.times.len();
    if downstream.times != upstream.times || gap.h.len() != n || gap.hdot.len() != n || upstream.pressures.len() != n || downstream.pressures.len() != n {
        return Err(Error::InvalidInput("sensor traces and gap history must share one time base".into()));
    }
    let dx = downstream.x - upstream.x;
    if !(dx > 0.0) {
        return Err(Error::InvalidInput(format!(
            "downstream sensor at {} m does not lie beyond upstream sensor at {} m",
            downstream.x, upstream.x
        )));
    }
    let x_mid = upstream.x + dx / 2.0;
    let mut out = Vec::new();
    for i in 0..n {
        let (ps, pn) = (upstream.pressures[i], downstream.pressures[i]);
        if !(ps - pn > threshold) {
            continue;
        }
        let h = gap.h[i];
        out.push(FrictionSample {
            t: upstream.times[i],
            v: -gap.hdot[i] / h * x_mid,
            tau: h * (pn - ps) / (2.0 * dx),
        });
    }
    Ok(out)
}

/// Samples from every adjacent pair of `traces` (sorted by position).
pub fn extract_friction_all(traces: &[SensorTrace], gap: &GapHistory, threshold: f64) -> Result<Vec<FrictionSample>> {
    let mut sorted: Vec<&SensorTrace> = traces.iter().collect();
    sorted.sort_by(|a, b| a.x.total_cmp(&b.x));
    let mut out = Vec::new();
    for pair in sorted.windows(2) {
        out.extend(extract_friction(pair[0], pair[1], gap, threshold)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrictionFit {
    pub model: FrictionModel,
    /// Coefficient of determination of the log-log regression.
    pub r_squared: f64,
    pub samples: usize,
}

/// Straight-line fit of log|τ| against log|v/v0|: the slope is m and the
/// intercept log(λ v0).
pub fn fit_friction(samples: &[FrictionSample], v0: f64) -> Result<FrictionFit> {
    if !(v0 > 0.0) {
        return Err(Error::InvalidInput(format!("v0 must be positive, got {v0}")));
    }
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.v != 0.0 && s.tau != 0.0)
        .map(|s| ((s.v.abs() / v0).ln(), s.tau.abs().ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::Degenerate(format!("{} usable samples, at least 3 are required", pts.len())));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 1e-24 * n {
        return Err(Error::Degenerate("all slip speeds are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(FrictionFit {
        model: FrictionModel {
            lambda: intercept.exp() / v0,
            m: slope,
            v0,
        },
        r_squared,
        samples: pts.len(),
    })
}
