//! Fault-ride-through trip logic.
//!
//! A curve is a set of must-trip zones around a continuous-operation region.
//! Each zone owns a timer that accumulates while the operating point lies
//! beyond the zone's threshold (below it for undervoltage and
//! underfrequency, above it for overvoltage and overfrequency). Every timer
//! resets once the operating point returns to the continuous region. A unit
//! trips when any timer reaches its zone's clearing time and then stays
//! tripped.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::ibr::FrtVoltage;

/// Slack when comparing accumulated time against a clearing time, so that
/// nine steps of 1/60 s count as 0.15 s.
const TIMER_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VoltageZone {
    pub v_low_pu: f64,
    /// `None` for an open upper bound.
    pub v_high_pu: Option<f64>,
    pub max_duration_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencyZone {
    pub f_low_hz: f64,
    pub f_high_hz: Option<f64>,
    pub max_duration_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuousRegion {
    pub v_min_pu: f64,
    pub v_max_pu: f64,
    pub f_min_hz: f64,
    pub f_max_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrtCurve {
    pub under_voltage_zones: Vec<VoltageZone>,
    pub over_voltage_zones: Vec<VoltageZone>,
    #[serde(default)]
    pub under_frequency_zones: Vec<FrequencyZone>,
    #[serde(default)]
    pub over_frequency_zones: Vec<FrequencyZone>,
    pub continuous_region: ContinuousRegion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "zone", content = "index", rename_all = "snake_case")]
pub enum ZoneId {
    UnderVoltage(usize),
    OverVoltage(usize),
    UnderFrequency(usize),
    OverFrequency(usize),
}

impl fmt::Display for ZoneId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZoneId::UnderVoltage(i) => write!(f, "uv{i}"),
            ZoneId::OverVoltage(i) => write!(f, "ov{i}"),
            ZoneId::UnderFrequency(i) => write!(f, "uf{i}"),
            ZoneId::OverFrequency(i) => write!(f, "of{i}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripCause {
    pub zone: ZoneId,
    /// Voltage (pu) or frequency (Hz) that held the zone active.
    pub observed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrtStatus {
    Online,
    Tripped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrtState {
    pub status: FrtStatus,
    /// Zone timers in the order under-voltage, over-voltage,
    /// under-frequency, over-frequency.
    pub timers: Vec<f64>,
    pub trip_time_s: Option<f64>,
    pub trip_cause: Option<TripCause>,
}

impl FrtCurve {
    /// Default envelope shipped as `default_1547`.
    pub fn default_1547() -> Self {
        let vz = |lo: f64, hi: Option<f64>, d: f64| VoltageZone {
            v_low_pu: lo,
            v_high_pu: hi,
            max_duration_s: d,
        };
        let fz = |lo: f64, hi: Option<f64>, d: f64| FrequencyZone {
            f_low_hz: lo,
            f_high_hz: hi,
            max_duration_s: d,
        };
        FrtCurve {
            under_voltage_zones: vec![
                vz(0.0, Some(0.45), 0.15),
                vz(0.45, Some(0.7), 2.0),
                vz(0.7, Some(0.88), 10.0),
            ],
            over_voltage_zones: vec![vz(1.1, Some(1.2), 0.5), vz(1.2, None, 0.15)],
            under_frequency_zones: vec![fz(57.0, Some(58.5), 0.3), fz(0.0, Some(57.0), 0.15)],
            over_frequency_zones: vec![fz(61.2, Some(61.8), 0.3), fz(61.8, None, 0.15)],
            continuous_region: ContinuousRegion {
                v_min_pu: 0.88,
                v_max_pu: 1.1,
                f_min_hz: 58.5,
                f_max_hz: 61.2,
            },
        }
    }

    pub fn zone_count(&self) -> usize {
        self.under_voltage_zones.len()
            + self.over_voltage_zones.len()
            + self.under_frequency_zones.len()
            + self.over_frequency_zones.len()
    }

    pub fn initial_state(&self) -> FrtState {
        FrtState {
            status: FrtStatus::Online,
            timers: vec![0.0; self.zone_count()],
            trip_time_s: None,
            trip_cause: None,
        }
    }

    pub fn in_continuous_region(&self, v: FrtVoltage, f_hz: f64) -> bool {
        let c = &self.continuous_region;
        v.under >= c.v_min_pu && v.over <= c.v_max_pu && f_hz >= c.f_min_hz && f_hz <= c.f_max_hz
    }

    /// `(zone, clearing time, active?, observed value)` for every zone, in
    /// timer order.
    fn zones(&self, v: FrtVoltage, f_hz: f64) -> impl Iterator<Item = (ZoneId, f64, bool, f64)> + '_ {
        let uv = self.under_voltage_zones.iter().enumerate().map(move |(i, z)| {
            let hi = z.v_high_pu.unwrap_or(f64::INFINITY);
            (ZoneId::UnderVoltage(i), z.max_duration_s, v.under < hi, v.under)
        });
        let ov = self
            .over_voltage_zones
            .iter()
            .enumerate()
            .map(move |(i, z)| (ZoneId::OverVoltage(i), z.max_duration_s, v.over > z.v_low_pu, v.over));
        let uf = self.under_frequency_zones.iter().enumerate().map(move |(i, z)| {
            let hi = z.f_high_hz.unwrap_or(f64::INFINITY);
            (ZoneId::UnderFrequency(i), z.max_duration_s, f_hz < hi, f_hz)
        });
        let of = self
            .over_frequency_zones
            .iter()
            .enumerate()
            .map(move |(i, z)| (ZoneId::OverFrequency(i), z.max_duration_s, f_hz > z.f_low_hz, f_hz));
        uv.chain(ov).chain(uf).chain(of)
    }

    /// Check that zones tile the space outside the continuous region
    /// without gaps or overlaps.
    pub fn validate(&self) -> Result<(), String> {
        let c = &self.continuous_region;
        if !(c.v_min_pu < c.v_max_pu) || !(c.f_min_hz < c.f_max_hz) {
            return Err("continuous region bounds are inverted".into());
        }
        let all_durations = self
            .under_voltage_zones
            .iter()
            .chain(&self.over_voltage_zones)
            .map(|z| z.max_duration_s)
            .chain(
                self.under_frequency_zones
                    .iter()
                    .chain(&self.over_frequency_zones)
                    .map(|z| z.max_duration_s),
            );
        for d in all_durations {
            if !(d >= 0.0) || !d.is_finite() {
                return Err(format!("zone duration {d} must be finite and non-negative"));
            }
        }
        let uv: Vec<(f64, Option<f64>)> = self
            .under_voltage_zones
            .iter()
            .map(|z| (z.v_low_pu, z.v_high_pu))
            .collect();
        tiled("under_voltage_zones", &uv, 0.0, Some(c.v_min_pu))?;
        let ov: Vec<(f64, Option<f64>)> = self
            .over_voltage_zones
            .iter()
            .map(|z| (z.v_low_pu, z.v_high_pu))
            .collect();
        tiled("over_voltage_zones", &ov, c.v_max_pu, None)?;
        let uf: Vec<(f64, Option<f64>)> = self
            .under_frequency_zones
            .iter()
            .map(|z| (z.f_low_hz, z.f_high_hz))
            .collect();
        if !uf.is_empty() {
            tiled("under_frequency_zones", &uf, 0.0, Some(c.f_min_hz))?;
        }
        let of: Vec<(f64, Option<f64>)> = self
            .over_frequency_zones
            .iter()
            .map(|z| (z.f_low_hz, z.f_high_hz))
            .collect();
        if !of.is_empty() {
            tiled("over_frequency_zones", &of, c.f_max_hz, None)?;
        }
        Ok(())
    }
}

fn tiled(name: &str, zones: &[(f64, Option<f64>)], start: f64, end: Option<f64>) -> Result<(), String> {
    if zones.is_empty() {
        return Err(format!("{name} is empty"));
    }
    let mut sorted = zones.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9;
    if !close(sorted[0].0, start) {
        return Err(format!("{name} must start at {start}"));
    }
    for w in sorted.windows(2) {
        match w[0].1 {
            Some(hi) if close(hi, w[1].0) => {}
            _ => return Err(format!("{name} are not contiguous at {}", w[1].0)),
        }
    }
    let last = sorted.last().expect("non-empty").1;
    match (last, end) {
        (None, None) => Ok(()),
        (Some(a), Some(b)) if close(a, b) => Ok(()),
        _ => Err(format!("{name} must end at the continuous region")),
    }
}

/// Advance one unit's FRT state by one time step.
///
/// Tripped states are returned unchanged.
pub fn frt_step(
    curve: &FrtCurve,
    state: &FrtState,
    v: impl Into<FrtVoltage>,
    f_hz: f64,
    dt_s: f64,
    t_now_s: f64,
) -> FrtState {
    let v = v.into();
    let mut next = state.clone();
    if state.status == FrtStatus::Tripped {
        return next;
    }
    if next.timers.len() != curve.zone_count() {
        next.timers = vec![0.0; curve.zone_count()];
    }
    if curve.in_continuous_region(v, f_hz) {
        next.timers.iter_mut().for_each(|t| *t = 0.0);
        return next;
    }
    let mut worst: Option<(f64, TripCause)> = None;
    for (k, (zone, limit, active, observed)) in curve.zones(v, f_hz).enumerate() {
        if !active {
            continue;
        }
        next.timers[k] += dt_s;
        if next.timers[k] + TIMER_EPS >= limit && worst.is_none_or(|(l, _)| limit < l) {
            worst = Some((limit, TripCause { zone, observed }));
        }
    }
    if let Some((_, cause)) = worst {
        next.status = FrtStatus::Tripped;
        next.trip_time_s = Some(t_now_s);
        next.trip_cause = Some(cause);
    }
    next
}
