//! Model variants, the integer program, LP-format export, the dispatch
//! decomposition and the exact CAVABB branch-and-bound.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::evaluate;
use crate::geo;
use crate::model::{
    Allocation, DispatchGroup, DispatchPlan, Instance, TripleId,
};
use crate::numeric::KahanSum;
use crate::tides::{availability_profile, interval_set, AvailabilityProfile, TidalState};

/// Tolerance for bound comparisons and optimality claims.
pub const OPT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariantTag {
    /// Exact model over the explicit uncertainty set.
    BestTidal,
    /// Per-pair corrected water levels over availability intervals.
    BetterTidal,
    /// Per-station corrected water levels over availability intervals.
    ManyZones,
}

impl VariantTag {
    pub fn name(&self) -> &'static str {
        match self {
            VariantTag::BestTidal => "best-tidal",
            VariantTag::BetterTidal => "better-tidal",
            VariantTag::ManyZones => "many-zones",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveError {
    /// Simplified variants need a station-averaged availability, which is
    /// undefined for an empty fleet.
    EmptyFleet,
    /// Interval construction failed.
    Intervals(crate::tides::TidesError),
    /// Allocation violates its invariants.
    InvalidAllocation,
    /// Instance-level validation failed.
    InvalidInstance,
    /// Enumeration guard exceeded (brute force only).
    TooLarge { product: u128, guard: u128 },
    /// Clustering failed while reducing zones.
    Clustering(geo::GeoError),
}

impl core::fmt::Display for SolveError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SolveError::EmptyFleet => write!(f, "station availability undefined for an empty fleet"),
            SolveError::Intervals(e) => write!(f, "interval construction failed: {e}"),
            SolveError::InvalidAllocation => write!(f, "allocation violates its invariants"),
            SolveError::InvalidInstance => write!(f, "instance failed validation"),
            SolveError::TooLarge { product, guard } => {
                write!(f, "enumeration space {product} exceeds guard {guard}")
            }
            SolveError::Clustering(e) => write!(f, "zone clustering failed: {e}"),
        }
    }
}

/// The scenario axis a variant ranges over: explicit tidal states for the
/// exact model, availability intervals for the simplified ones.
///
/// For interval axes a pair is operable on interval `t = [lo, hi]` when its
/// availability reaches `hi`, i.e. strictly exceeds `lo`. Breakpoints are
/// exactly the observed availabilities, so the two readings coincide; the
/// non-strict `>= lo` reading would let a pair respond during time it is
/// not available and break the nested-tide equivalence with the exact
/// model.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioAxis {
    States(Vec<TidalState>),
    PairIntervals {
        vessels: usize,
        /// w_(j,i), row-major j * vessels + i.
        w_pair: Vec<f64>,
        intervals: Vec<(f64, f64)>,
    },
    StationIntervals {
        w_station: Vec<f64>,
        intervals: Vec<(f64, f64)>,
    },
}

impl ScenarioAxis {
    pub fn len(&self) -> usize {
        match self {
            ScenarioAxis::States(s) => s.len(),
            ScenarioAxis::PairIntervals { intervals, .. } => intervals.len(),
            ScenarioAxis::StationIntervals { intervals, .. } => intervals.len(),
        }
    }

    /// p_e for explicit states, interval length max(t) - min(t) otherwise.
    #[inline]
    pub fn weight(&self, t: usize) -> f64 {
        match self {
            ScenarioAxis::States(s) => s[t].p,
            ScenarioAxis::PairIntervals { intervals, .. } => intervals[t].1 - intervals[t].0,
            ScenarioAxis::StationIntervals { intervals, .. } => intervals[t].1 - intervals[t].0,
        }
    }

    #[inline]
    pub fn operable(&self, t: usize, j: usize, i: usize) -> bool {
        match self {
            ScenarioAxis::States(s) => s[t].pattern.contains(j, i),
            ScenarioAxis::PairIntervals { vessels, w_pair, intervals } => {
                w_pair[j * vessels + i] >= intervals[t].1
            }
            ScenarioAxis::StationIntervals { w_station, intervals } => {
                w_station[j] >= intervals[t].1
            }
        }
    }
}

/// A model variant: the tag plus its fully materialized scenario axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelVariant {
    pub tag: VariantTag,
    pub axis: ScenarioAxis,
}

impl ModelVariant {
    /// Builds the scenario axis for `tag`, deriving the availability
    /// profile and interval set for the simplified variants.
    pub fn for_instance(instance: &Instance, tag: VariantTag) -> Result<Self, SolveError> {
        let axis = match tag {
            VariantTag::BestTidal => ScenarioAxis::States(instance.tidal.states().to_vec()),
            VariantTag::BetterTidal => {
                let profile = availability_profile(&instance.tidal, &instance.vessels);
                let intervals =
                    interval_set(&profile.w_pair).map_err(SolveError::Intervals)?.intervals;
                ScenarioAxis::PairIntervals {
                    vessels: instance.vessel_count(),
                    w_pair: profile.w_pair,
                    intervals,
                }
            }
            VariantTag::ManyZones => {
                let profile = availability_profile(&instance.tidal, &instance.vessels);
                let w_station = profile.w_station.ok_or(SolveError::EmptyFleet)?;
                let intervals =
                    interval_set(&w_station).map_err(SolveError::Intervals)?.intervals;
                ScenarioAxis::StationIntervals { w_station, intervals }
            }
        };
        Ok(Self { tag, axis })
    }

    pub fn from_profile(
        tag: VariantTag,
        instance: &Instance,
        profile: &AvailabilityProfile,
    ) -> Result<Self, SolveError> {
        match tag {
            VariantTag::BestTidal => Self::for_instance(instance, tag),
            VariantTag::BetterTidal => {
                let intervals =
                    interval_set(&profile.w_pair).map_err(SolveError::Intervals)?.intervals;
                Ok(Self {
                    tag,
                    axis: ScenarioAxis::PairIntervals {
                        vessels: instance.vessel_count(),
                        w_pair: profile.w_pair.clone(),
                        intervals,
                    },
                })
            }
            VariantTag::ManyZones => {
                let w_station = profile.w_station.clone().ok_or(SolveError::EmptyFleet)?;
                let intervals =
                    interval_set(&w_station).map_err(SolveError::Intervals)?.intervals;
                Ok(Self { tag, axis: ScenarioAxis::StationIntervals { w_station, intervals } })
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Integer program
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkForm {
    /// The printed form: sum over Y-bar(i,j) of y <= |Y-bar(i,j)| x.
    Aggregated,
    /// One y <= x row per triple; tighter LP relaxation.
    Disaggregated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct YVar {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub r: usize,
    pub t: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarRef {
    X(usize),
    Y(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub terms: Vec<(VarRef, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// The binary program from the model: x over compatible placements, y over
/// the variant's response tuples, rows mirroring the four constraint
/// families.
#[derive(Debug, Clone, PartialEq)]
pub struct IpModel {
    pub tag: VariantTag,
    pub link_form: LinkForm,
    pub x_vars: Vec<(usize, usize)>,
    pub y_vars: Vec<YVar>,
    /// Objective coefficient per y variable (x variables cost nothing).
    pub y_cost: Vec<f64>,
    pub rows: Vec<Row>,
    /// (k, r, t) tuples without any candidate pair; their presence makes
    /// the instance infeasible under the coverage constraint.
    pub uncoverable: Vec<TripleId>,
}

impl IpModel {
    pub fn var_count(&self) -> usize {
        self.x_vars.len() + self.y_vars.len()
    }

    pub fn var_name(&self, v: VarRef) -> String {
        match v {
            VarRef::X(idx) => {
                let (i, j) = self.x_vars[idx];
                format!("x_{}_{}", i + 1, j + 1)
            }
            VarRef::Y(idx) => {
                let y = self.y_vars[idx];
                format!("y_{}_{}_{}_{}_{}", y.i + 1, y.j + 1, y.k + 1, y.r + 1, y.t + 1)
            }
        }
    }
}

/// Builds the binary program for the given variant.
pub fn build_model(
    instance: &Instance,
    variant: &ModelVariant,
    link_form: LinkForm,
) -> IpModel {
    let n = instance.vessel_count();
    let m = instance.station_count();
    let z = instance.zone_count();
    let f = instance.incident_count();
    let axis = &variant.axis;
    let t_count = axis.len();

    let x_vars: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .filter(|(i, j)| instance.relations.placeable(*i, *j))
        .collect();
    let mut y_vars = Vec::new();
    let mut y_cost = Vec::new();
    // Coverage row terms per (k, r, t).
    let mut cover: BTreeMap<(usize, usize, usize), Vec<(VarRef, f64)>> = BTreeMap::new();
    // Link row membership per x variable.
    let mut linked: Vec<Vec<usize>> = vec![Vec::new(); x_vars.len()];

    for (x_idx, &(i, j)) in x_vars.iter().enumerate() {
        let speed = instance.vessels[i].speed_kn;
        for k in 0..f {
            if !instance.relations.equipped(i, k) {
                continue;
            }
            let severity = instance.incident_types[k].severity;
            for r in 0..z {
                if !instance.relations.reachable(i, j, r) {
                    continue;
                }
                let travel = instance.distances.get(j, r) / speed;
                let q = instance.zones[r].frequencies[k];
                for t in 0..t_count {
                    if !axis.operable(t, j, i) {
                        continue;
                    }
                    let y_idx = y_vars.len();
                    y_vars.push(YVar { i, j, k, r, t });
                    y_cost.push(travel * q * axis.weight(t) * severity);
                    cover.entry((k, r, t)).or_default().push((VarRef::Y(y_idx), 1.0));
                    linked[x_idx].push(y_idx);
                }
            }
        }
    }

    let mut rows = Vec::new();
    let mut uncoverable = Vec::new();
    for k in 0..f {
        for r in 0..z {
            for t in 0..t_count {
                match cover.remove(&(k, r, t)) {
                    Some(terms) => rows.push(Row {
                        name: format!("cover_{}_{}_{}", k + 1, r + 1, t + 1),
                        terms,
                        sense: Sense::Ge,
                        rhs: 1.0,
                    }),
                    None => uncoverable.push(TripleId { incident: k, zone: r, state: t }),
                }
            }
        }
    }

    for (x_idx, ys) in linked.iter().enumerate() {
        if ys.is_empty() {
            continue;
        }
        let (i, j) = x_vars[x_idx];
        match link_form {
            LinkForm::Aggregated => {
                let mut terms: Vec<(VarRef, f64)> =
                    ys.iter().map(|y| (VarRef::Y(*y), 1.0)).collect();
                terms.push((VarRef::X(x_idx), -(ys.len() as f64)));
                rows.push(Row {
                    name: format!("link_{}_{}", i + 1, j + 1),
                    terms,
                    sense: Sense::Le,
                    rhs: 0.0,
                });
            }
            LinkForm::Disaggregated => {
                for (seq, y) in ys.iter().enumerate() {
                    rows.push(Row {
                        name: format!("link_{}_{}_{}", i + 1, j + 1, seq + 1),
                        terms: vec![(VarRef::Y(*y), 1.0), (VarRef::X(x_idx), -1.0)],
                        sense: Sense::Le,
                        rhs: 0.0,
                    });
                }
            }
        }
    }

    for i in 0..n {
        let terms: Vec<(VarRef, f64)> = x_vars
            .iter()
            .enumerate()
            .filter(|(_, (vi, _))| *vi == i)
            .map(|(idx, _)| (VarRef::X(idx), 1.0))
            .collect();
        if terms.is_empty() {
            continue;
        }
        rows.push(Row {
            name: format!("fleet_{}", i + 1),
            terms,
            sense: Sense::Le,
            rhs: instance.vessels[i].count as f64,
        });
    }

    for j in 0..m {
        let terms: Vec<(VarRef, f64)> = x_vars
            .iter()
            .enumerate()
            .filter(|(_, (_, vj))| *vj == j)
            .map(|(idx, _)| (VarRef::X(idx), 1.0))
            .collect();
        if terms.is_empty() {
            continue;
        }
        rows.push(Row {
            name: format!("station_{}", j + 1),
            terms,
            sense: Sense::Le,
            rhs: 1.0,
        });
    }

    IpModel { tag: variant.tag, link_form, x_vars, y_vars, y_cost, rows, uncoverable }
}

/// Serializes the model in CPLEX LP format. Variable names are 1-based;
/// coefficients print in shortest round-trip decimal form.
pub fn write_lp(model: &IpModel) -> String {
    let mut out = String::new();
    out.push_str("\\ RCAP ");
    out.push_str(model.tag.name());
    out.push_str(" model\n");
    out.push_str("Minimize\n obj:");
    let mut first = true;
    for (idx, cost) in model.y_cost.iter().enumerate() {
        if first {
            out.push(' ');
            first = false;
        } else {
            out.push_str(" + ");
        }
        out.push_str(&format!("{} {}", cost, model.var_name(VarRef::Y(idx))));
    }
    if first {
        out.push_str(" 0 dummy_zero");
    }
    out.push('\n');

    out.push_str("Subject To\n");
    for row in &model.rows {
        out.push_str(&format!(" {}:", row.name));
        let mut first = true;
        for (var, coeff) in &row.terms {
            if first {
                first = false;
                out.push_str(&format!(" {} {}", coeff, model.var_name(*var)));
            } else if *coeff < 0.0 {
                out.push_str(&format!(" - {} {}", -coeff, model.var_name(*var)));
            } else {
                out.push_str(&format!(" + {} {}", coeff, model.var_name(*var)));
            }
        }
        let sense = match row.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
        };
        out.push_str(&format!(" {} {}\n", sense, row.rhs));
    }

    out.push_str("Binary\n");
    for idx in 0..model.x_vars.len() {
        out.push(' ');
        out.push_str(&model.var_name(VarRef::X(idx)));
        out.push('\n');
    }
    for idx in 0..model.y_vars.len() {
        out.push(' ');
        out.push_str(&model.var_name(VarRef::Y(idx)));
        out.push('\n');
    }
    out.push_str("End\n");
    out
}

// ---------------------------------------------------------------------------
// Dispatch decomposition
// ---------------------------------------------------------------------------

/// Result of dispatching under a fixed allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct DispatchOutcome {
    /// Weighted response time in hours over all covered tuples; the sum is
    /// only an objective when nothing is uncovered.
    pub covered_objective: f64,
    /// Covered contribution per incident type.
    pub per_incident: Vec<f64>,
    pub plan: DispatchPlan,
    /// Coverable tuples with no feasible responder under the allocation.
    /// Tuples uncoverable under any allocation are excluded.
    pub uncovered: Vec<TripleId>,
}

impl DispatchOutcome {
    /// Defined only when every coverable tuple has a responder.
    pub fn objective(&self) -> Option<f64> {
        self.uncovered.is_empty().then_some(self.covered_objective)
    }
}

/// Optimal responder per (incident, zone, scenario element) for a fixed
/// allocation: the argmin of distance over speed among feasible assigned
/// pairs, ties broken by lowest station then lowest vessel index.
///
/// Scenario elements that are indistinguishable on the assigned pairs are
/// grouped, which keeps the full-resolution pass fast.
pub fn optimal_dispatch(instance: &Instance, axis: &ScenarioAxis, alloc: &Allocation) -> DispatchOutcome {
    let z = instance.zone_count();
    let f = instance.incident_count();
    let assigned: Vec<(usize, usize)> = alloc.pairs().collect();

    // Group scenario elements by operability over the assigned pairs.
    let words = (assigned.len() + 63) / 64;
    let mut groups: BTreeMap<Vec<u64>, Vec<usize>> = BTreeMap::new();
    for t in 0..axis.len() {
        let mut sig = vec![0u64; words.max(1)];
        for (p, &(j, i)) in assigned.iter().enumerate() {
            if axis.operable(t, j, i) {
                sig[p / 64] |= 1 << (p % 64);
            }
        }
        groups.entry(sig).or_default().push(t);
    }

    // Candidate pairs per (k, r), cheapest first.
    let mut candidates: Vec<Vec<(f64, usize)>> = vec![Vec::new(); f * z];
    for (p, &(j, i)) in assigned.iter().enumerate() {
        let speed = instance.vessels[i].speed_kn;
        for k in 0..f {
            if !instance.relations.equipped(i, k) {
                continue;
            }
            for r in 0..z {
                if instance.relations.reachable(i, j, r) {
                    candidates[k * z + r].push((instance.distances.get(j, r) / speed, p));
                }
            }
        }
    }
    for list in &mut candidates {
        // Assigned pairs are in (station, vessel) order, so the index `p`
        // already encodes the dispatch tie-break.
        list.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    }

    let mut total = KahanSum::new();
    let mut per_incident = vec![KahanSum::new(); f];
    let mut uncovered = Vec::new();
    let mut plan_groups = Vec::with_capacity(groups.len());

    for (sig, states) in groups {
        let weight: f64 = states.iter().map(|t| axis.weight(*t)).sum();
        let mut responders = vec![None; f * z];
        for k in 0..f {
            let severity = instance.incident_types[k].severity;
            for r in 0..z {
                let chosen = candidates[k * z + r]
                    .iter()
                    .find(|(_, p)| sig[p / 64] & (1 << (p % 64)) != 0);
                match chosen {
                    Some((cost, p)) => {
                        let (j, _) = assigned[*p];
                        responders[k * z + r] = Some(j as u32);
                        let q = instance.zones[r].frequencies[k];
                        let contribution = cost * q * weight * severity;
                        total.add(contribution);
                        per_incident[k].add(contribution);
                    }
                    None => {
                        // Only allocation-caused gaps count; tuples no
                        // allocation could cover are data infeasibility.
                        for &t in &states {
                            if coverable_in_principle(instance, axis, k, r, t) {
                                uncovered.push(TripleId { incident: k, zone: r, state: t });
                            }
                        }
                    }
                }
            }
        }
        plan_groups.push(DispatchGroup { states, responders });
    }

    uncovered.sort();
    DispatchOutcome {
        covered_objective: total.value(),
        per_incident: per_incident.iter().map(|s| s.value()).collect(),
        plan: DispatchPlan::new(z, plan_groups),
        uncovered,
    }
}

fn coverable_in_principle(instance: &Instance, axis: &ScenarioAxis, k: usize, r: usize, t: usize) -> bool {
    for i in 0..instance.vessel_count() {
        if !instance.relations.equipped(i, k) {
            continue;
        }
        for j in 0..instance.station_count() {
            if instance.relations.placeable(i, j)
                && instance.relations.reachable(i, j, r)
                && axis.operable(t, j, i)
            {
                return true;
            }
        }
    }
    false
}

// ---------------------------------------------------------------------------
// CAVABB
// ---------------------------------------------------------------------------

/// Wall clock abstraction; the core crate has no clock of its own.
pub trait Clock {
    /// Seconds since an arbitrary fixed origin.
    fn now_s(&self) -> f64;
}

/// Clock that never advances; limits by time are then never hit.
pub struct NoClock;

impl Clock for NoClock {
    fn now_s(&self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Limits {
    pub time_limit_s: Option<f64>,
    pub node_limit: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    /// A limit stopped the search; the incumbent and bound are still valid.
    LimitReached,
}

impl SolveStatus {
    pub fn name(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::LimitReached => "time-limit-bound",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub variant: VariantTag,
    /// Incumbent objective in weighted hours.
    pub objective: Option<f64>,
    pub allocation: Option<Allocation>,
    /// Proven lower bound; equals the objective when optimal.
    pub bound: f64,
    pub nodes: u64,
    pub wall_time_s: f64,
    /// Tuples no allocation can cover (data infeasibility).
    pub uncoverable: Vec<TripleId>,
}

struct SearchCtx<'a> {
    instance: &'a Instance,
    axis: &'a ScenarioAxis,
    /// Branch candidates per station: vessel indices ordered by descending
    /// speed, then index.
    station_candidates: Vec<Vec<usize>>,
    /// Flat tuple weights q_kr * s_k * weight(t); layout (t * f + k) * z + r.
    weights: Vec<f64>,
    /// Per-tuple optimistic cost over stations >= j; suffix[m] is all inf.
    suffix: Vec<Vec<f64>>,
    remaining: Vec<u32>,
    assigned_best: Vec<f64>,
    current: Vec<Option<usize>>,
    incumbent: Option<(f64, Vec<Option<usize>>)>,
    open_bound: f64,
    nodes: u64,
    start_s: f64,
    limits: Limits,
    limit_hit: bool,
}

impl<'a> SearchCtx<'a> {
    fn tuple_count(&self) -> usize {
        self.weights.len()
    }

    fn bound_at(&self, station: usize) -> f64 {
        let suffix = &self.suffix[station];
        let mut sum = KahanSum::new();
        for t in 0..self.tuple_count() {
            let best = self.assigned_best[t].min(suffix[t]);
            if best == f64::INFINITY {
                return f64::INFINITY;
            }
            sum.add(self.weights[t] * best);
        }
        sum.value()
    }

}

/// Exact depth-first branch-and-bound over stations in index order.
///
/// At each node one remaining vessel type is assigned to the next station,
/// or the station is left empty. The bound is the optimistic dispatch:
/// each tuple takes the cheapest pair among those already assigned and all
/// pairs still assignable to later stations (fleet limits relaxed). A node
/// is pruned when its bound reaches the incumbent minus 1e-9.
pub fn solve_cavabb(
    instance: &Instance,
    variant: &ModelVariant,
    limits: Limits,
    clock: &dyn Clock,
) -> SolveReport {
    let start_s = clock.now_s();
    let n = instance.vessel_count();
    let m = instance.station_count();
    let z = instance.zone_count();
    let f = instance.incident_count();
    let axis = &variant.axis;
    let t_count = axis.len();
    let tuples = t_count * f * z;

    let mut weights = vec![0.0f64; tuples];
    for t in 0..t_count {
        let w = axis.weight(t);
        for k in 0..f {
            let s = instance.incident_types[k].severity;
            for r in 0..z {
                weights[(t * f + k) * z + r] = instance.zones[r].frequencies[k] * s * w;
            }
        }
    }

    let mut station_candidates: Vec<Vec<usize>> = Vec::with_capacity(m);
    for j in 0..m {
        let mut cands: Vec<usize> = (0..n)
            .filter(|i| instance.relations.placeable(*i, j) && instance.vessels[*i].count > 0)
            .collect();
        cands.sort_by(|a, b| {
            instance.vessels[*b]
                .speed_kn
                .partial_cmp(&instance.vessels[*a].speed_kn)
                .unwrap_or(core::cmp::Ordering::Equal)
                .then(a.cmp(b))
        });
        station_candidates.push(cands);
    }

    // Optimistic per-tuple cost over the station suffix, fleet relaxed.
    let mut suffix = vec![vec![f64::INFINITY; tuples]; m + 1];
    for j in (0..m).rev() {
        let (head, tail) = suffix.split_at_mut(j + 1);
        let cur = &mut head[j];
        cur.copy_from_slice(&tail[0]);
        for &i in &station_candidates[j] {
            let speed = instance.vessels[i].speed_kn;
            for t in 0..t_count {
                if !axis.operable(t, j, i) {
                    continue;
                }
                for k in 0..f {
                    if !instance.relations.equipped(i, k) {
                        continue;
                    }
                    for r in 0..z {
                        if instance.relations.reachable(i, j, r) {
                            let c = instance.distances.get(j, r) / speed;
                            let slot = &mut cur[(t * f + k) * z + r];
                            if c < *slot {
                                *slot = c;
                            }
                        }
                    }
                }
            }
        }
    }

    // Data infeasibility: tuples beyond the reach of every pair.
    let mut uncoverable = Vec::new();
    for t in 0..t_count {
        for k in 0..f {
            for r in 0..z {
                if suffix[0][(t * f + k) * z + r] == f64::INFINITY {
                    uncoverable.push(TripleId { incident: k, zone: r, state: t });
                }
            }
        }
    }
    if !uncoverable.is_empty() {
        return SolveReport {
            status: SolveStatus::Infeasible,
            variant: variant.tag,
            objective: None,
            allocation: None,
            bound: f64::INFINITY,
            nodes: 0,
            wall_time_s: clock.now_s() - start_s,
            uncoverable,
        };
    }

    let mut ctx = SearchCtx {
        instance,
        axis,
        station_candidates,
        weights,
        suffix,
        remaining: instance.vessels.iter().map(|v| v.count).collect(),
        assigned_best: vec![f64::INFINITY; tuples],
        current: vec![None; m],
        incumbent: None,
        open_bound: f64::INFINITY,
        nodes: 0,
        start_s,
        limits,
        limit_hit: false,
    };

    // Greedy incumbent: pick the bound-minimizing choice per station.
    greedy_incumbent(&mut ctx, clock);

    dfs(&mut ctx, 0, clock);

    let (status, bound) = if ctx.limit_hit {
        let inc = ctx.incumbent.as_ref().map(|(obj, _)| *obj).unwrap_or(f64::INFINITY);
        (SolveStatus::LimitReached, ctx.open_bound.min(inc))
    } else {
        match &ctx.incumbent {
            Some((obj, _)) => (SolveStatus::Optimal, *obj),
            None => (SolveStatus::Infeasible, f64::INFINITY),
        }
    };

    let (objective, allocation) = match &ctx.incumbent {
        Some((obj, assignment)) => (
            Some(*obj),
            Some(Allocation::from_pairs(
                assignment.iter().enumerate().filter_map(|(j, i)| i.map(|i| (j, i))),
            )),
        ),
        None => (None, None),
    };

    SolveReport {
        status,
        variant: variant.tag,
        objective,
        allocation,
        bound,
        nodes: ctx.nodes,
        wall_time_s: clock.now_s() - start_s,
        uncoverable: Vec::new(),
    }
}

fn greedy_incumbent(ctx: &mut SearchCtx<'_>, _clock: &dyn Clock) {
    let m = ctx.instance.station_count();
    let saved_remaining = ctx.remaining.clone();
    let mut assignment: Vec<Option<usize>> = vec![None; m];
    let mut assigned_best = ctx.assigned_best.clone();

    for j in 0..m {
        let mut best_choice: Option<usize> = None;
        // Baseline: leave the station empty.
        let mut best_val = partial_bound(ctx, &assigned_best, j + 1);
        let candidates = ctx.station_candidates[j].clone();
        for i in candidates {
            if ctx.remaining[i] == 0 {
                continue;
            }
            let mut trial = assigned_best.clone();
            apply_pair(ctx.instance, ctx.axis, &mut trial, j, i, None);
            let val = partial_bound(ctx, &trial, j + 1);
            if val < best_val - OPT_TOLERANCE {
                best_val = val;
                best_choice = Some(i);
            }
        }
        if let Some(i) = best_choice {
            apply_pair(ctx.instance, ctx.axis, &mut assigned_best, j, i, None);
            ctx.remaining[i] -= 1;
            assignment[j] = Some(i);
        }
    }

    let objective = leaf_objective(ctx, &assigned_best);
    if let Some(obj) = objective {
        ctx.incumbent = Some((obj, assignment));
    }
    ctx.remaining = saved_remaining;
}

fn partial_bound(ctx: &SearchCtx<'_>, assigned_best: &[f64], station: usize) -> f64 {
    let suffix = &ctx.suffix[station];
    let mut sum = KahanSum::new();
    for t in 0..assigned_best.len() {
        let best = assigned_best[t].min(suffix[t]);
        if best == f64::INFINITY {
            return f64::INFINITY;
        }
        sum.add(ctx.weights[t] * best);
    }
    sum.value()
}

fn leaf_objective(ctx: &SearchCtx<'_>, assigned_best: &[f64]) -> Option<f64> {
    let mut sum = KahanSum::new();
    for t in 0..assigned_best.len() {
        if assigned_best[t] == f64::INFINITY {
            return None;
        }
        sum.add(ctx.weights[t] * assigned_best[t]);
    }
    Some(sum.value())
}

/// Folds the gated response costs of pair (i, j) into the per-tuple
/// minima, recording displaced values for backtracking.
fn apply_pair(
    instance: &Instance,
    axis: &ScenarioAxis,
    assigned_best: &mut [f64],
    j: usize,
    i: usize,
    mut undo: Option<&mut Vec<(usize, f64)>>,
) {
    let f = instance.incident_count();
    let z = instance.zone_count();
    let speed = instance.vessels[i].speed_kn;
    for t in 0..axis.len() {
        if !axis.operable(t, j, i) {
            continue;
        }
        for k in 0..f {
            if !instance.relations.equipped(i, k) {
                continue;
            }
            for r in 0..z {
                if instance.relations.reachable(i, j, r) {
                    let c = instance.distances.get(j, r) / speed;
                    let slot = &mut assigned_best[(t * f + k) * z + r];
                    if c < *slot {
                        if let Some(log) = undo.as_deref_mut() {
                            log.push(((t * f + k) * z + r, *slot));
                        }
                        *slot = c;
                    }
                }
            }
        }
    }
}

fn dfs(ctx: &mut SearchCtx<'_>, station: usize, clock: &dyn Clock) {
    ctx.nodes += 1;
    if ctx.nodes % 256 == 0 {
        if let Some(limit) = ctx.limits.time_limit_s {
            if clock.now_s() - ctx.start_s >= limit {
                ctx.limit_hit = true;
            }
        }
    }
    if let Some(limit) = ctx.limits.node_limit {
        if ctx.nodes >= limit {
            ctx.limit_hit = true;
        }
    }

    let bound = ctx.bound_at(station);
    if ctx.limit_hit {
        ctx.open_bound = ctx.open_bound.min(bound);
        return;
    }
    if let Some((inc, _)) = &ctx.incumbent {
        if bound >= *inc - OPT_TOLERANCE {
            return;
        }
    }
    if bound == f64::INFINITY {
        return;
    }

    let m = ctx.instance.station_count();
    if station == m {
        if let Some(obj) = leaf_objective(ctx, &ctx.assigned_best) {
            let better = match &ctx.incumbent {
                Some((inc, _)) => obj < *inc - OPT_TOLERANCE,
                None => true,
            };
            if better {
                ctx.incumbent = Some((obj, ctx.current.clone()));
            }
        }
        return;
    }

    let candidates = ctx.station_candidates[station].clone();
    for i in candidates {
        if ctx.remaining[i] == 0 {
            continue;
        }
        let mut undo: Vec<(usize, f64)> = Vec::new();
        apply_pair(ctx.instance, ctx.axis, &mut ctx.assigned_best, station, i, Some(&mut undo));
        ctx.remaining[i] -= 1;
        ctx.current[station] = Some(i);

        dfs(ctx, station + 1, clock);

        ctx.current[station] = None;
        ctx.remaining[i] += 1;
        for (tri, old) in undo.into_iter().rev() {
            ctx.assigned_best[tri] = old;
        }
        if ctx.limit_hit {
            // The node bound is valid for its unexplored children too.
            ctx.open_bound = ctx.open_bound.min(bound);
            return;
        }
    }

    // Leave the station empty.
    dfs(ctx, station + 1, clock);
    if ctx.limit_hit {
        ctx.open_bound = ctx.open_bound.min(bound);
    }
}

// ---------------------------------------------------------------------------
// Variant suite
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteConfig {
    pub variant: VariantTag,
    pub zone_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteRun {
    pub variant: VariantTag,
    pub zone_count: usize,
    pub report: SolveReport,
    /// Re-scored on the unclustered instance (the comparison methodology);
    /// present when the solve produced an allocation.
    pub full_resolution: Option<DispatchOutcome>,
}

/// Clusters the instance's zones down to `k` and rebuilds the reduced
/// instance: centroid distances, range-derived reachability, averaged
/// frequencies; tides and the other relations carry over.
pub fn reduce_zones(instance: &Instance, k: usize, seed: u64) -> Result<Instance, SolveError> {
    let clustering = geo::cluster_zones(&instance.zones, k, seed).map_err(SolveError::Clustering)?;
    let distances = geo::distance_matrix(&instance.stations, &clustering.cluster_zones);
    let mut relations = crate::model::CompatibilityRelations::empty(
        instance.vessel_count(),
        instance.station_count(),
        k,
        instance.incident_count(),
    );
    for (i, j) in instance.relations.placement_pairs() {
        relations.insert_placement(i, j);
    }
    for (i, kk) in instance.relations.equipment_pairs() {
        relations.insert_equipment(i, kk);
    }
    for (i, j, r) in geo::derive_reachability(&instance.vessels, &distances) {
        relations.insert_reach(i, j, r);
    }
    Ok(Instance {
        vessels: instance.vessels.clone(),
        stations: instance.stations.clone(),
        zones: clustering.cluster_zones,
        incident_types: instance.incident_types.clone(),
        relations,
        distances,
        tidal: instance.tidal.clone(),
    })
}

/// Runs each (variant, zone count) configuration: cluster, build, solve,
/// then re-score the allocation at full resolution. Failures are isolated
/// per run.
pub fn solve_variant_suite(
    instance: &Instance,
    configs: &[SuiteConfig],
    seed: u64,
    limits: Limits,
    clock: &dyn Clock,
) -> Vec<Result<SuiteRun, SolveError>> {
    configs
        .iter()
        .map(|cfg| {
            let reduced = reduce_zones(instance, cfg.zone_count, seed)?;
            let variant = ModelVariant::for_instance(&reduced, cfg.variant)?;
            let report = solve_cavabb(&reduced, &variant, limits, clock);
            let full_resolution = report
                .allocation
                .as_ref()
                .map(|alloc| evaluate::full_resolution_objective(instance, alloc))
                .transpose()
                .map_err(|_| SolveError::InvalidAllocation)?;
            Ok(SuiteRun {
                variant: cfg.variant,
                zone_count: cfg.zone_count,
                report,
                full_resolution,
            })
        })
        .collect()
}
