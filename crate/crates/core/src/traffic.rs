//! Erlang B teletraffic arithmetic and the E1 trunk capacity table.
//!
//! Blocking probabilities are computed with the recurrence
//! `E(0) = 1, E(k) = a E(k-1) / (k + a E(k-1))`, which stays in `[0, 1]` for
//! every step and never forms `a^n` or `n!` explicitly, so channel counts in
//! the thousands are handled without overflow.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Usable timeslots of one E1 line.
pub const E1_TIMESLOTS: u8 = 31;

/// Absolute tolerance, in Erlangs, of [`offered_traffic`].
pub const OFFERED_TRAFFIC_TOLERANCE: f64 = 1e-6;

/// Target blocking probability (grade of service), strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Gos(f64);

impl Gos {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value < 1.0 {
            Ok(Gos(value))
        } else {
            Err(Error::Domain(format!(
                "grade of service must lie in (0, 1), got {value}"
            )))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for Gos {
    fn default() -> Self {
        Gos(0.02)
    }
}

impl TryFrom<f64> for Gos {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Gos::new(value)
    }
}

impl From<Gos> for f64 {
    fn from(gos: Gos) -> f64 {
        gos.0
    }
}

/// Blocking probability of `n` servers offered `a` Erlangs (blocked calls cleared).
pub fn erlang_b(n: u32, a: f64) -> Result<f64> {
    if !a.is_finite() || a < 0.0 {
        return Err(Error::Domain(format!(
            "offered traffic must be finite and non-negative, got {a}"
        )));
    }
    Ok(erlang_b_unchecked(n, a))
}

#[inline]
pub(crate) fn erlang_b_unchecked(n: u32, a: f64) -> f64 {
    let mut e = 1.0;
    for k in 1..=n {
        let ae = a * e;
        e = ae / (k as f64 + ae);
    }
    e
}

/// Traffic that may be offered to `n` channels while keeping blocking at `gos`.
///
/// Solved by bisection on the monotone map `a -> E(n, a)`. The returned value
/// is the lower end of the final bracket, so `erlang_b(n, result) <= gos`
/// always holds and the answer is within [`OFFERED_TRAFFIC_TOLERANCE`] of the
/// exact root. `n = 0` yields 0 by convention.
pub fn offered_traffic(n: u32, gos: Gos) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let target = gos.value();
    let mut hi = n as f64;
    while erlang_b_unchecked(n, hi) <= target {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    while hi - lo > OFFERED_TRAFFIC_TOLERANCE / 8.0 {
        let mid = 0.5 * (lo + hi);
        if erlang_b_unchecked(n, mid) > target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo
}

/// Traffic actually carried by `n` channels when loaded to `gos`: the offered
/// load times the fraction of calls that are not blocked.
pub fn carried_traffic(n: u32, gos: Gos) -> f64 {
    let offered = offered_traffic(n, gos);
    offered * (1.0 - erlang_b_unchecked(n, offered))
}

/// Smallest channel count whose blocking at `a` Erlangs does not exceed `gos`.
/// Zero traffic needs zero channels.
pub fn required_channels(a: f64, gos: Gos) -> Result<u32> {
    if !a.is_finite() || a < 0.0 {
        return Err(Error::Domain(format!(
            "offered traffic must be finite and non-negative, got {a}"
        )));
    }
    if a == 0.0 {
        return Ok(0);
    }
    let target = gos.value();
    let mut e = 1.0;
    let mut n = 0u32;
    while e > target {
        n += 1;
        let ae = a * e;
        e = ae / (n as f64 + ae);
    }
    Ok(n)
}

/// Voice timeslots carried by each successive E1 line of a trunk group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeslotSchedule {
    voice_ts_per_line: Vec<u8>,
    sub_timeslots_per_ts: u32,
}

impl TimeslotSchedule {
    /// Default number of compressed voice channels per voice timeslot.
    pub const DEFAULT_SUB_TIMESLOTS: u32 = 4;

    pub fn new(voice_ts_per_line: Vec<u8>, sub_timeslots_per_ts: u32) -> Result<Self> {
        if sub_timeslots_per_ts == 0 {
            return Err(Error::Config(
                "sub-timeslots per voice timeslot must be at least 1".into(),
            ));
        }
        if let Some((line, ts)) = voice_ts_per_line
            .iter()
            .enumerate()
            .find(|(_, &ts)| ts > E1_TIMESLOTS)
        {
            return Err(Error::Config(format!(
                "line {} has {} voice timeslots, an E1 only has {}",
                line + 1,
                ts,
                E1_TIMESLOTS
            )));
        }
        Ok(Self {
            voice_ts_per_line,
            sub_timeslots_per_ts,
        })
    }

    /// First line keeps two timeslots for signalling and data, the rest carry voice.
    pub fn standard(lines: usize) -> Self {
        let voice_ts_per_line = (0..lines)
            .map(|k| if k == 0 { 29 } else { E1_TIMESLOTS })
            .collect();
        Self {
            voice_ts_per_line,
            sub_timeslots_per_ts: Self::DEFAULT_SUB_TIMESLOTS,
        }
    }

    pub fn voice_ts_per_line(&self) -> &[u8] {
        &self.voice_ts_per_line
    }

    pub fn sub_timeslots_per_ts(&self) -> u32 {
        self.sub_timeslots_per_ts
    }

    pub fn len(&self) -> usize {
        self.voice_ts_per_line.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voice_ts_per_line.is_empty()
    }
}

/// One row of the capacity table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityEntry {
    pub lines: usize,
    /// Cumulative voice channels over lines `1..=lines`.
    pub channels: u32,
    /// Traffic the trunk group can take at the table's grade of service.
    pub capacity_erl: f64,
}

/// Trunk capacity in Erlangs for 0, 1, ..., K E1 lines between a BSC and the MSC.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityTable {
    gos: Gos,
    schedule: TimeslotSchedule,
    entries: Vec<CapacityEntry>,
}

impl CapacityTable {
    pub fn gos(&self) -> Gos {
        self.gos
    }

    pub fn schedule(&self) -> &TimeslotSchedule {
        &self.schedule
    }

    pub fn entries(&self) -> &[CapacityEntry] {
        &self.entries
    }

    /// Largest line count in the table.
    pub fn max_lines(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn capacity(&self, lines: usize) -> Option<f64> {
        self.entries.get(lines).map(|e| e.capacity_erl)
    }

    pub fn max_capacity(&self) -> f64 {
        self.entries.last().map_or(0.0, |e| e.capacity_erl)
    }

    /// Smallest line count whose capacity covers `traffic_erl`, if any.
    pub fn lines_for(&self, traffic_erl: f64) -> Option<usize> {
        let k = self
            .entries
            .partition_point(|e| e.capacity_erl < traffic_erl);
        (k < self.entries.len()).then_some(k)
    }
}

/// Builds the table of trunk capacities for up to `max_lines` E1 lines.
pub fn build_capacity_table(
    max_lines: usize,
    schedule: &TimeslotSchedule,
    gos: Gos,
) -> Result<CapacityTable> {
    if schedule.len() < max_lines {
        return Err(Error::Config(format!(
            "timeslot schedule covers {} lines but the table needs {}",
            schedule.len(),
            max_lines
        )));
    }
    let mut entries = Vec::with_capacity(max_lines + 1);
    entries.push(CapacityEntry {
        lines: 0,
        channels: 0,
        capacity_erl: 0.0,
    });
    let mut channels = 0u32;
    for (k, &ts) in schedule.voice_ts_per_line[..max_lines].iter().enumerate() {
        channels += schedule.sub_timeslots_per_ts * ts as u32;
        entries.push(CapacityEntry {
            lines: k + 1,
            channels,
            capacity_erl: offered_traffic(channels, gos),
        });
    }
    Ok(CapacityTable {
        gos,
        schedule: schedule.clone(),
        entries,
    })
}
