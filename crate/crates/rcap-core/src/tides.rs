//! Tidal availability: station water levels from gauge series, the
//! uncertainty set with occurrence probabilities, corrected water levels
//! for both simplifications, and the gauge correlation matrix.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::geo::LatLon;
use crate::model::{Station, VesselType};

/// A vessel exactly touching bottom counts as operable.
pub const DEPTH_TOLERANCE_M: f64 = 1e-9;
/// Stations closer than this to a gauge use the gauge's values verbatim.
pub const COINCIDENT_DISTANCE_NM: f64 = 1e-9;
/// Forward-fill limit when aligning gauge series to the minute grid.
pub const MAX_FILL_GAP_S: i64 = 600;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TidesError {
    /// Fewer than three gauges supplied.
    TooFewGauges { got: usize },
    /// Gauge series do not share a common sampling grid.
    GridMismatch { gauge: String },
    /// Timestamps not strictly increasing.
    OutOfOrder { gauge: String, at: i64 },
    /// Non-finite level sample.
    NonFiniteLevel { gauge: String, at: i64 },
    EmptySeries,
    /// A gap longer than the forward-fill limit.
    GapTooLarge { gauge: String, from: i64, to: i64 },
    /// Breakpoint outside [0, 1].
    BreakpointOutOfRange,
    /// Pearson correlation needs length >= 2.
    SeriesTooShort,
    /// Station-averaged availability needs a nonzero fleet.
    EmptyFleet,
    UnequalLengths,
}

impl core::fmt::Display for TidesError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            TidesError::TooFewGauges { got } => {
                write!(f, "station interpolation needs at least 3 gauges, got {got}")
            }
            TidesError::GridMismatch { gauge } => {
                write!(f, "gauge {gauge} is not on the common sampling grid")
            }
            TidesError::OutOfOrder { gauge, at } => {
                write!(f, "gauge {gauge}: timestamps not strictly increasing at {at}")
            }
            TidesError::NonFiniteLevel { gauge, at } => {
                write!(f, "gauge {gauge}: non-finite level at {at}")
            }
            TidesError::EmptySeries => write!(f, "empty series"),
            TidesError::GapTooLarge { gauge, from, to } => {
                write!(f, "gauge {gauge}: gap from {from} to {to} exceeds the fill limit")
            }
            TidesError::BreakpointOutOfRange => write!(f, "breakpoint outside [0, 1]"),
            TidesError::SeriesTooShort => write!(f, "correlation needs series of length >= 2"),
            TidesError::EmptyFleet => write!(f, "station availability undefined for an empty fleet"),
            TidesError::UnequalLengths => write!(f, "series lengths differ"),
        }
    }
}

/// A water gauge time series. Levels in meters relative to the reference,
/// timestamps in UTC seconds, strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeSeries {
    pub gauge_id: String,
    pub position: LatLon,
    samples: Vec<(i64, f64)>,
}

impl GaugeSeries {
    pub fn new(gauge_id: String, position: LatLon, samples: Vec<(i64, f64)>) -> Result<Self, TidesError> {
        for w in samples.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(TidesError::OutOfOrder { gauge: gauge_id, at: w[1].0 });
            }
        }
        if let Some((t, _)) = samples.iter().find(|(_, l)| !l.is_finite()) {
            return Err(TidesError::NonFiniteLevel { gauge: gauge_id, at: *t });
        }
        Ok(Self { gauge_id, position, samples })
    }

    pub fn samples(&self) -> &[(i64, f64)] {
        &self.samples
    }

    pub fn timestamps(&self) -> impl Iterator<Item = i64> + '_ {
        self.samples.iter().map(|(t, _)| *t)
    }

    pub fn levels(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|(_, l)| *l)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// A set of simultaneously operable station-vessel pairs, as a bitset over
/// `stations x vessels` with pair index `j * vessels + i`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PairPattern {
    stations: usize,
    vessels: usize,
    words: Vec<u64>,
}

impl PairPattern {
    pub fn empty(stations: usize, vessels: usize) -> Self {
        let bits = stations * vessels;
        Self { stations, vessels, words: vec![0; (bits + 63) / 64] }
    }

    pub fn full(stations: usize, vessels: usize) -> Self {
        let mut p = Self::empty(stations, vessels);
        for j in 0..stations {
            for i in 0..vessels {
                p.insert(j, i);
            }
        }
        p
    }

    pub fn from_pairs(stations: usize, vessels: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut p = Self::empty(stations, vessels);
        for (j, i) in pairs {
            p.insert(j, i);
        }
        p
    }

    #[inline]
    fn bit(&self, j: usize, i: usize) -> usize {
        debug_assert!(j < self.stations && i < self.vessels);
        j * self.vessels + i
    }

    pub fn insert(&mut self, j: usize, i: usize) {
        let b = self.bit(j, i);
        self.words[b / 64] |= 1 << (b % 64);
    }

    #[inline]
    pub fn contains(&self, j: usize, i: usize) -> bool {
        let b = self.bit(j, i);
        self.words[b / 64] & (1 << (b % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn stations(&self) -> usize {
        self.stations
    }

    pub fn vessels(&self) -> usize {
        self.vessels
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let vessels = self.vessels;
        (0..self.stations * self.vessels)
            .filter(move |b| self.words[b / 64] & (1 << (b % 64)) != 0)
            .map(move |b| (b / vessels, b % vessels))
    }
}

/// One element of the uncertainty set with its occurrence probability.
#[derive(Debug, Clone, PartialEq)]
pub struct TidalState {
    pub pattern: PairPattern,
    pub p: f64,
}

/// The uncertainty set: pairwise distinct patterns whose probabilities sum
/// to one. Sets derived from sampled data also carry the exact occurrence
/// counts, so the mass invariant holds as a rational identity.
#[derive(Debug, Clone, PartialEq)]
pub struct TidalStateSet {
    states: Vec<TidalState>,
    counts: Option<(Vec<u64>, u64)>,
}

impl TidalStateSet {
    pub fn from_states(states: Vec<TidalState>) -> Self {
        Self { states, counts: None }
    }

    /// A single always-on pattern covering all pairs.
    pub fn single_full(stations: usize, vessels: usize) -> Self {
        Self::from_states(vec![TidalState { pattern: PairPattern::full(stations, vessels), p: 1.0 }])
    }

    pub fn states(&self) -> &[TidalState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Occurrence counts and total sample count, when derived from data.
    pub fn sample_counts(&self) -> Option<(&[u64], u64)> {
        self.counts.as_ref().map(|(c, t)| (c.as_slice(), *t))
    }
}

/// Per-station level series on a shared sampling grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StationLevels {
    /// `levels[j][t]`, meters.
    pub levels: Vec<Vec<f64>>,
}

/// Aligns gauge series to a shared 60-second grid over the common time
/// range, forward-filling gaps of up to ten minutes.
pub fn align_to_minute_grid(gauges: &[GaugeSeries]) -> Result<Vec<GaugeSeries>, TidesError> {
    if gauges.iter().any(|g| g.is_empty()) {
        return Err(TidesError::EmptySeries);
    }
    let start = gauges
        .iter()
        .map(|g| g.samples[0].0)
        .max()
        .ok_or(TidesError::EmptySeries)?;
    let end = gauges
        .iter()
        .map(|g| g.samples[g.samples.len() - 1].0)
        .min()
        .ok_or(TidesError::EmptySeries)?;
    let start = start.div_euclid(60) * 60 + if start % 60 == 0 { 0 } else { 60 };
    if end < start {
        return Err(TidesError::EmptySeries);
    }
    let steps = ((end - start) / 60) as usize + 1;

    let mut out = Vec::with_capacity(gauges.len());
    for g in gauges {
        let mut samples = Vec::with_capacity(steps);
        let mut cursor = 0usize;
        for s in 0..steps {
            let t = start + 60 * s as i64;
            while cursor + 1 < g.samples.len() && g.samples[cursor + 1].0 <= t {
                cursor += 1;
            }
            let (src_t, level) = g.samples[cursor];
            if t - src_t > MAX_FILL_GAP_S {
                return Err(TidesError::GapTooLarge { gauge: g.gauge_id.clone(), from: src_t, to: t });
            }
            samples.push((t, level));
        }
        out.push(GaugeSeries::new(g.gauge_id.clone(), g.position, samples)?);
    }
    Ok(out)
}

/// Station water levels by inverse-distance weighting over the three
/// nearest gauges. A station closer than 1e-9 nm to a gauge takes that
/// gauge's series verbatim.
pub fn interpolate_station_levels(
    gauges: &[GaugeSeries],
    stations: &[Station],
    dist: impl Fn(LatLon, LatLon) -> f64,
) -> Result<StationLevels, TidesError> {
    if gauges.len() < 3 {
        return Err(TidesError::TooFewGauges { got: gauges.len() });
    }
    let grid: Vec<i64> = gauges[0].timestamps().collect();
    for g in &gauges[1..] {
        if g.len() != grid.len() || g.timestamps().zip(grid.iter()).any(|(a, b)| a != *b) {
            return Err(TidesError::GridMismatch { gauge: g.gauge_id.clone() });
        }
    }

    let mut levels = Vec::with_capacity(stations.len());
    for st in stations {
        let mut by_dist: Vec<(f64, usize)> = gauges
            .iter()
            .enumerate()
            .map(|(g, gauge)| (dist(st.position, gauge.position), g))
            .collect();
        by_dist.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));

        if by_dist[0].0 < COINCIDENT_DISTANCE_NM {
            levels.push(gauges[by_dist[0].1].levels().collect());
            continue;
        }

        let nearest = &by_dist[..3];
        let weight_sum: f64 = nearest.iter().map(|(d, _)| 1.0 / d).sum();
        let mut series = vec![0.0f64; grid.len()];
        for (d, g) in nearest {
            let w = (1.0 / d) / weight_sum;
            for (t, level) in gauges[*g].levels().enumerate() {
                series[t] += w * level;
            }
        }
        levels.push(series);
    }
    Ok(StationLevels { levels })
}

/// Collects the tidal pattern at every timestamp and merges identical ones.
///
/// A pair (j, i) is operable at time t when `base_depth_j + level_j(t)`
/// reaches the draught (no safety margin). Probabilities are occurrence
/// counts over the total sample count, so the mass sums to one exactly.
pub fn derive_states(
    levels: &StationLevels,
    stations: &[Station],
    vessels: &[VesselType],
) -> Result<TidalStateSet, TidesError> {
    let samples = levels.levels.first().map(|l| l.len()).unwrap_or(0);
    if samples == 0 || levels.levels.len() != stations.len() {
        return Err(TidesError::EmptySeries);
    }
    if levels.levels.iter().any(|l| l.len() != samples) {
        return Err(TidesError::UnequalLengths);
    }

    let m = stations.len();
    let n = vessels.len();
    let mut seen: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
    for t in 0..samples {
        let mut pattern = PairPattern::empty(m, n);
        for (j, st) in stations.iter().enumerate() {
            let depth = st.base_depth_m + levels.levels[j][t];
            for (i, v) in vessels.iter().enumerate() {
                if depth + DEPTH_TOLERANCE_M >= v.draught_m {
                    pattern.insert(j, i);
                }
            }
        }
        *seen.entry(pattern.words).or_insert(0) += 1;
    }

    let total = samples as u64;
    let mut states = Vec::with_capacity(seen.len());
    let mut counts = Vec::with_capacity(seen.len());
    for (words, count) in seen {
        let pattern = PairPattern { stations: m, vessels: n, words };
        states.push(TidalState { pattern, p: count as f64 / total as f64 });
        counts.push(count);
    }
    Ok(TidalStateSet { states, counts: Some((counts, total)) })
}

/// Corrected water levels: per-pair and fleet-averaged per-station
/// relative availabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct AvailabilityProfile {
    stations: usize,
    vessels: usize,
    /// w_(j,i), row-major `j * vessels + i`.
    pub w_pair: Vec<f64>,
    /// w_j; `None` when the fleet is empty (division by zero reported).
    pub w_station: Option<Vec<f64>>,
}

impl AvailabilityProfile {
    #[inline]
    pub fn pair(&self, j: usize, i: usize) -> f64 {
        self.w_pair[j * self.vessels + i]
    }

    pub fn stations(&self) -> usize {
        self.stations
    }

    pub fn vessels(&self) -> usize {
        self.vessels
    }
}

/// w_(j,i) = sum over states containing (j,i) of p_e; w_j is the
/// fleet-size-weighted mean of row j.
pub fn availability_profile(states: &TidalStateSet, vessels: &[VesselType]) -> AvailabilityProfile {
    let (m, n) = states
        .states()
        .first()
        .map(|s| (s.pattern.stations(), s.pattern.vessels()))
        .unwrap_or((0, vessels.len()));

    // Data-derived sets carry exact occurrence counts: accumulating those
    // keeps w an exact sample fraction (an always-operable pair gets
    // exactly 1), which float summation of the p values cannot guarantee.
    let mut w_pair = vec![0.0f64; m * n];
    if let Some((counts, total)) = states.sample_counts() {
        let mut tallies = alloc::vec![0u64; m * n];
        for (state, count) in states.states().iter().zip(counts) {
            for (j, i) in state.pattern.pairs() {
                tallies[j * n + i] += count;
            }
        }
        for (w, tally) in w_pair.iter_mut().zip(&tallies) {
            *w = *tally as f64 / total as f64;
        }
    } else {
        for state in states.states() {
            for (j, i) in state.pattern.pairs() {
                w_pair[j * n + i] += state.p;
            }
        }
        // Accumulated probabilities can overshoot 1 by a few ulps when
        // the state set is large; w is a probability, so clamp.
        for w in &mut w_pair {
            *w = w.clamp(0.0, 1.0);
        }
    }

    let fleet: u64 = vessels.iter().map(|v| v.count as u64).sum();
    let w_station = if fleet == 0 {
        None
    } else {
        Some(
            (0..m)
                .map(|j| {
                    let weighted: f64 = (0..n)
                        .map(|i| w_pair[j * n + i] * vessels[i].count as f64)
                        .sum();
                    (weighted / fleet as f64).clamp(0.0, 1.0)
                })
                .collect(),
        )
    };

    AvailabilityProfile { stations: m, vessels: n, w_pair, w_station }
}

/// Consecutive-breakpoint intervals partitioning [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSet {
    /// Sorted, disjoint `[lo, hi]` pairs whose union is [0, 1].
    pub intervals: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

/// Builds the interval set over the breakpoints plus the forced endpoints
/// {0, 1}. Duplicates collapse; |intervals| = |distinct points| - 1.
pub fn interval_set(breakpoints: &[f64]) -> Result<IntervalSet, TidesError> {
    if breakpoints.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(TidesError::BreakpointOutOfRange);
    }
    let mut points: Vec<f64> = breakpoints.to_vec();
    points.push(0.0);
    points.push(1.0);
    points.sort_by(|a, b| a.partial_cmp(b).expect("breakpoints are finite"));
    points.dedup();
    let intervals = points.windows(2).map(|w| (w[0], w[1])).collect();
    Ok(IntervalSet { intervals })
}

/// Pearson correlation matrix over gauge series. `NaN` marks entries that
/// involve a zero-variance series.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    size: usize,
    values: Vec<f64>,
}

impl CorrelationMatrix {
    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values[a * self.size + b]
    }

    pub fn is_defined(&self, a: usize, b: usize) -> bool {
        !self.get(a, b).is_nan()
    }

    pub fn size(&self) -> usize {
        self.size
    }
}

pub fn correlation_matrix(gauges: &[GaugeSeries]) -> Result<CorrelationMatrix, TidesError> {
    let len = gauges.first().map(|g| g.len()).unwrap_or(0);
    if len < 2 {
        return Err(TidesError::SeriesTooShort);
    }
    if gauges.iter().any(|g| g.len() != len) {
        return Err(TidesError::UnequalLengths);
    }

    let series: Vec<Vec<f64>> = gauges.iter().map(|g| g.levels().collect()).collect();
    let means: Vec<f64> = series.iter().map(|s| s.iter().sum::<f64>() / len as f64).collect();
    let devs: Vec<f64> = series
        .iter()
        .zip(&means)
        .map(|(s, mu)| libm::sqrt(s.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>()))
        .collect();

    let size = gauges.len();
    let mut values = vec![0.0f64; size * size];
    for a in 0..size {
        for b in a..size {
            let v = if a == b {
                if devs[a] > 0.0 { 1.0 } else { f64::NAN }
            } else if devs[a] > 0.0 && devs[b] > 0.0 {
                let cov: f64 = series[a]
                    .iter()
                    .zip(&series[b])
                    .map(|(x, y)| (x - means[a]) * (y - means[b]))
                    .sum();
                cov / (devs[a] * devs[b])
            } else {
                f64::NAN
            };
            values[a * size + b] = v;
            values[b * size + a] = v;
        }
    }
    Ok(CorrelationMatrix { size, values })
}

/// True when sorting station-vessel pairs by decreasing w_(j,i) makes every
/// observed state a prefix of that order: each pattern contains exactly the
/// pairs at least as available as everything it contains.
pub fn is_nested(states: &TidalStateSet) -> bool {
    // Equivalent structural condition: the patterns form a chain under
    // set inclusion. Sorting pairs by decreasing w_(j,i) then works with
    // any tie-break, because a pair outside a state sits in strictly fewer
    // states than every pair inside it.
    let mut ordered: Vec<&TidalState> = states.states().iter().collect();
    ordered.sort_by_key(|s| s.pattern.len());
    ordered.windows(2).all(|w| {
        w[0].pattern
            .words()
            .iter()
            .zip(w[1].pattern.words())
            .all(|(small, big)| small & !big == 0)
    })
}
