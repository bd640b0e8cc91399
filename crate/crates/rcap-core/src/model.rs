//! RCAP domain types, the instance container, and feasibility checks.
//!
//! Canonical units: distances in nautical miles, speeds in knots, times in
//! hours, depths and draughts in meters. Indices are 0-based internally;
//! the wire formats in the companion crate are 1-based and round-trip
//! exactly.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::geo::LatLon;
use crate::tides::TidalStateSet;

/// Tolerance for the tidal probability mass invariant.
pub const PROBABILITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct VesselType {
    /// Speed in knots, > 0.
    pub speed_kn: f64,
    /// Draught in meters, > 0.
    pub draught_m: f64,
    /// Fleet size, >= 0.
    pub count: u32,
    /// Maximum listed reach in nautical miles; the one-way budget is half.
    pub range_nm: f64,
    /// Capability tags (firefighting, pumping, ...).
    pub equipment: BTreeSet<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Station {
    pub position: LatLon,
    /// Depth in meters at the zero-tide reference.
    pub base_depth_m: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Zone {
    pub position: LatLon,
    /// Incident frequency q_kr per incident type, each in [0, 1].
    pub frequencies: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IncidentType {
    /// Severity weight, > 0.
    pub severity: f64,
    pub required_equipment: BTreeSet<String>,
}

/// Dense membership tables for the three compatibility relations.
///
/// Membership checks are independent of each other: S is not required to
/// project into C.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityRelations {
    vessels: usize,
    stations: usize,
    zones: usize,
    incidents: usize,
    vessel_station: Vec<bool>,      // (i, j) -> i * stations + j
    vessel_incident: Vec<bool>,     // (i, k) -> i * incidents + k
    vessel_station_zone: Vec<bool>, // (i, j, r) -> (i * stations + j) * zones + r
}

impl CompatibilityRelations {
    pub fn empty(vessels: usize, stations: usize, zones: usize, incidents: usize) -> Self {
        Self {
            vessels,
            stations,
            zones,
            incidents,
            vessel_station: alloc::vec![false; vessels * stations],
            vessel_incident: alloc::vec![false; vessels * incidents],
            vessel_station_zone: alloc::vec![false; vessels * stations * zones],
        }
    }

    pub fn complete(vessels: usize, stations: usize, zones: usize, incidents: usize) -> Self {
        Self {
            vessels,
            stations,
            zones,
            incidents,
            vessel_station: alloc::vec![true; vessels * stations],
            vessel_incident: alloc::vec![true; vessels * incidents],
            vessel_station_zone: alloc::vec![true; vessels * stations * zones],
        }
    }

    pub fn insert_placement(&mut self, i: usize, j: usize) {
        self.vessel_station[i * self.stations + j] = true;
    }

    pub fn remove_placement(&mut self, i: usize, j: usize) {
        self.vessel_station[i * self.stations + j] = false;
    }

    pub fn insert_equipment(&mut self, i: usize, k: usize) {
        self.vessel_incident[i * self.incidents + k] = true;
    }

    pub fn insert_reach(&mut self, i: usize, j: usize, r: usize) {
        self.vessel_station_zone[(i * self.stations + j) * self.zones + r] = true;
    }

    /// (i, j) in C: vessel type i can be positioned at station j.
    #[inline]
    pub fn placeable(&self, i: usize, j: usize) -> bool {
        self.vessel_station[i * self.stations + j]
    }

    /// (i, k) in B: vessel type i has the equipment for incident type k.
    #[inline]
    pub fn equipped(&self, i: usize, k: usize) -> bool {
        self.vessel_incident[i * self.incidents + k]
    }

    /// (i, j, r) in S: vessel type i can travel from station j to zone r.
    #[inline]
    pub fn reachable(&self, i: usize, j: usize, r: usize) -> bool {
        self.vessel_station_zone[(i * self.stations + j) * self.zones + r]
    }

    pub fn placement_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let m = self.stations;
        self.vessel_station
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(move |(idx, _)| (idx / m, idx % m))
    }

    pub fn equipment_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let f = self.incidents;
        self.vessel_incident
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(move |(idx, _)| (idx / f, idx % f))
    }

    pub fn reach_triples(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let m = self.stations;
        let z = self.zones;
        self.vessel_station_zone
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(move |(idx, _)| (idx / (m * z), (idx / z) % m, idx % z))
    }
}

/// Row-major station-by-zone distance matrix in nautical miles.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    stations: usize,
    zones: usize,
    values: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(stations: usize, zones: usize, values: Vec<f64>) -> Result<Self, ModelError> {
        if values.len() != stations * zones {
            return Err(ModelError::ShapeMismatch {
                what: "distance matrix",
                expected: stations * zones,
                got: values.len(),
            });
        }
        Ok(Self { stations, zones, values })
    }

    #[inline]
    pub fn get(&self, j: usize, r: usize) -> f64 {
        self.values[j * self.zones + r]
    }

    pub fn stations(&self) -> usize {
        self.stations
    }

    pub fn zones(&self) -> usize {
        self.zones
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    ShapeMismatch { what: &'static str, expected: usize, got: usize },
    IndexOutOfRange { what: &'static str, index: usize, bound: usize },
}

impl core::fmt::Display for ModelError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ModelError::ShapeMismatch { what, expected, got } => {
                write!(f, "{what}: expected {expected} entries, got {got}")
            }
            ModelError::IndexOutOfRange { what, index, bound } => {
                write!(f, "{what}: index {index} out of range (bound {bound})")
            }
        }
    }
}

/// The complete RCAP input.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub vessels: Vec<VesselType>,
    pub stations: Vec<Station>,
    pub zones: Vec<Zone>,
    pub incident_types: Vec<IncidentType>,
    pub relations: CompatibilityRelations,
    pub distances: DistanceMatrix,
    pub tidal: TidalStateSet,
}

impl Instance {
    pub fn vessel_count(&self) -> usize {
        self.vessels.len()
    }

    pub fn station_count(&self) -> usize {
        self.stations.len()
    }

    pub fn zone_count(&self) -> usize {
        self.zones.len()
    }

    pub fn incident_count(&self) -> usize {
        self.incident_types.len()
    }

    pub fn fleet_total(&self) -> u64 {
        self.vessels.iter().map(|v| v.count as u64).sum()
    }
}

/// A named invariant violation. Violations are data, not failures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Dotted path naming the offending field, e.g. `distances[3][7]`.
    pub field: String,
    /// The rule broken, human readable.
    pub message: String,
}

impl core::fmt::Display for Violation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Checks every `Instance` invariant and returns the violations found.
pub fn validate_instance(instance: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();
    let (n, m, z, f) = (
        instance.vessel_count(),
        instance.station_count(),
        instance.zone_count(),
        instance.incident_count(),
    );

    for (i, v) in instance.vessels.iter().enumerate() {
        if !(v.speed_kn > 0.0) {
            out.push(Violation {
                field: format!("vessels[{i}].speed"),
                message: format!("speed must be > 0, got {}", v.speed_kn),
            });
        }
        if !(v.draught_m > 0.0) {
            out.push(Violation {
                field: format!("vessels[{i}].draught"),
                message: format!("draught must be > 0, got {}", v.draught_m),
            });
        }
        if !(v.range_nm > 0.0) {
            out.push(Violation {
                field: format!("vessels[{i}].range"),
                message: format!("range must be > 0, got {}", v.range_nm),
            });
        }
    }

    for (j, s) in instance.stations.iter().enumerate() {
        if !s.position.is_valid() {
            out.push(Violation {
                field: format!("stations[{j}].position"),
                message: format!("invalid coordinates ({}, {})", s.position.lat, s.position.lon),
            });
        }
        if !s.base_depth_m.is_finite() {
            out.push(Violation {
                field: format!("stations[{j}].base_depth"),
                message: String::from("base depth must be finite"),
            });
        }
    }

    for (r, zone) in instance.zones.iter().enumerate() {
        if !zone.position.is_valid() {
            out.push(Violation {
                field: format!("zones[{r}].position"),
                message: format!("invalid coordinates ({}, {})", zone.position.lat, zone.position.lon),
            });
        }
        if zone.frequencies.len() != f {
            out.push(Violation {
                field: format!("zones[{r}].frequencies"),
                message: format!("expected {} entries, got {}", f, zone.frequencies.len()),
            });
        }
        for (k, q) in zone.frequencies.iter().enumerate() {
            if !(0.0..=1.0).contains(q) {
                out.push(Violation {
                    field: format!("zones[{r}].frequencies[{k}]"),
                    message: format!("frequency must lie in [0, 1], got {q}"),
                });
            }
        }
    }

    for (k, inc) in instance.incident_types.iter().enumerate() {
        if !(inc.severity > 0.0) {
            out.push(Violation {
                field: format!("incident_types[{k}].severity"),
                message: format!("severity must be > 0, got {}", inc.severity),
            });
        }
    }

    if instance.distances.stations() != m || instance.distances.zones() != z {
        out.push(Violation {
            field: String::from("distances"),
            message: format!(
                "expected shape {}x{}, got {}x{}",
                m,
                z,
                instance.distances.stations(),
                instance.distances.zones()
            ),
        });
    } else {
        for j in 0..m {
            for r in 0..z {
                let d = instance.distances.get(j, r);
                if !(d >= 0.0) || !d.is_finite() {
                    out.push(Violation {
                        field: format!("distances[{j}][{r}]"),
                        message: format!("distance must be finite and >= 0, got {d}"),
                    });
                }
            }
        }
    }

    let mass: f64 = instance.tidal.states().iter().map(|s| s.p).sum();
    if (mass - 1.0).abs() > PROBABILITY_TOLERANCE {
        out.push(Violation {
            field: String::from("tidal"),
            message: format!("tidal probabilities sum {mass} != 1"),
        });
    }
    for (e, st) in instance.tidal.states().iter().enumerate() {
        if !(st.p > 0.0 && st.p <= 1.0 + PROBABILITY_TOLERANCE) {
            out.push(Violation {
                field: format!("tidal[{e}].p"),
                message: format!("state probability must lie in (0, 1], got {}", st.p),
            });
        }
        if st.pattern.stations() != m || st.pattern.vessels() != n {
            out.push(Violation {
                field: format!("tidal[{e}].pattern"),
                message: format!(
                    "pattern dimensioned {}x{}, instance is {}x{}",
                    st.pattern.stations(),
                    st.pattern.vessels(),
                    m,
                    n
                ),
            });
        }
    }
    let mut seen = BTreeSet::new();
    for (e, st) in instance.tidal.states().iter().enumerate() {
        if !seen.insert(st.pattern.words()) {
            out.push(Violation {
                field: format!("tidal[{e}].pattern"),
                message: String::from("duplicate tidal pattern"),
            });
        }
    }

    // Full coverage may be impossible when the fleet is smaller than the
    // station count; that is reportable, not hidden, but it is not an
    // invariant violation by itself.

    out
}

/// At most one vessel type per station; the b-matching bound a_i holds.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Allocation {
    assignment: BTreeMap<usize, usize>,
}

impl Allocation {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Self { assignment: pairs.into_iter().collect() }
    }

    pub fn assign(&mut self, station: usize, vessel: usize) {
        self.assignment.insert(station, vessel);
    }

    pub fn unassign(&mut self, station: usize) {
        self.assignment.remove(&station);
    }

    pub fn vessel_at(&self, station: usize) -> Option<usize> {
        self.assignment.get(&station).copied()
    }

    /// (station, vessel) pairs in station order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.assignment.iter().map(|(j, i)| (*j, *i))
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Checks the allocation invariants against an instance.
    pub fn violations(&self, instance: &Instance) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut used = alloc::vec![0u32; instance.vessel_count()];
        for (&j, &i) in &self.assignment {
            if j >= instance.station_count() || i >= instance.vessel_count() {
                out.push(Violation {
                    field: format!("allocation[{j}]"),
                    message: format!("indices out of range (station {j}, vessel {i})"),
                });
                continue;
            }
            if !instance.relations.placeable(i, j) {
                out.push(Violation {
                    field: format!("allocation[{j}]"),
                    message: format!("(vessel {i}, station {j}) not in C"),
                });
            }
            used[i] += 1;
        }
        for (i, &u) in used.iter().enumerate() {
            if u > instance.vessels[i].count {
                out.push(Violation {
                    field: format!("allocation (vessel {i})"),
                    message: format!("{u} placements exceed fleet size {}", instance.vessels[i].count),
                });
            }
        }
        out
    }
}

/// An (incident type, zone, scenario element) triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct TripleId {
    pub incident: usize,
    pub zone: usize,
    pub state: usize,
}

/// Responder assignments, grouped by scenario elements that share a table.
///
/// The grouped layout keeps full-resolution plans (f * z * |U| entries)
/// compact: scenario elements that are indistinguishable for the fixed
/// allocation share one responder table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DispatchPlan {
    zones: usize,
    groups: Vec<DispatchGroup>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispatchGroup {
    /// Scenario element indices covered by this table.
    pub states: Vec<usize>,
    /// Responder station per (k, r), row-major k * zones + r.
    pub responders: Vec<Option<u32>>,
}

impl DispatchPlan {
    pub fn new(zones: usize, groups: Vec<DispatchGroup>) -> Self {
        Self { zones, groups }
    }

    pub fn responder(&self, incident: usize, zone: usize, state: usize) -> Option<usize> {
        self.groups
            .iter()
            .find(|g| g.states.contains(&state))
            .and_then(|g| g.responders[incident * self.zones + zone])
            .map(|j| j as usize)
    }

    pub fn groups(&self) -> &[DispatchGroup] {
        &self.groups
    }

    pub fn zones(&self) -> usize {
        self.zones
    }
}

/// Which membership check a dispatch triple failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DispatchCheck {
    /// No responder defined for the triple.
    Undefined,
    /// Responding station has no vessel assigned.
    Unassigned,
    /// (i, k) not in B.
    Equipment,
    /// (i, j, r) not in S.
    Reachability,
    /// (j, i) not in the tidal state.
    Operability,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DispatchViolation {
    pub triple: TripleId,
    pub check: DispatchCheck,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityVerdict {
    pub feasible: bool,
    pub violations: Vec<DispatchViolation>,
}

/// The NP-membership certificate check: every (k, r, e) triple must have a
/// defined responder passing the equipment (B), reachability (S) and
/// operability (e) memberships. Linear in m + f * z * |U|.
pub fn check_dispatch_feasibility(
    instance: &Instance,
    alloc: &Allocation,
    plan: &DispatchPlan,
) -> Result<FeasibilityVerdict, ModelError> {
    let m = instance.station_count();
    let n = instance.vessel_count();
    let z = instance.zone_count();
    let f = instance.incident_count();

    for (j, i) in alloc.pairs() {
        if j >= m {
            return Err(ModelError::IndexOutOfRange { what: "allocation station", index: j, bound: m });
        }
        if i >= n {
            return Err(ModelError::IndexOutOfRange { what: "allocation vessel", index: i, bound: n });
        }
    }

    let mut violations = Vec::new();
    for (e, state) in instance.tidal.states().iter().enumerate() {
        for k in 0..f {
            for r in 0..z {
                let triple = TripleId { incident: k, zone: r, state: e };
                match plan.responder(k, r, e) {
                    None => violations.push(DispatchViolation { triple, check: DispatchCheck::Undefined }),
                    Some(j) => {
                        if j >= m {
                            return Err(ModelError::IndexOutOfRange {
                                what: "plan responder",
                                index: j,
                                bound: m,
                            });
                        }
                        match alloc.vessel_at(j) {
                            None => violations
                                .push(DispatchViolation { triple, check: DispatchCheck::Unassigned }),
                            Some(i) => {
                                if !instance.relations.equipped(i, k) {
                                    violations.push(DispatchViolation {
                                        triple,
                                        check: DispatchCheck::Equipment,
                                    });
                                } else if !instance.relations.reachable(i, j, r) {
                                    violations.push(DispatchViolation {
                                        triple,
                                        check: DispatchCheck::Reachability,
                                    });
                                } else if !state.pattern.contains(j, i) {
                                    violations.push(DispatchViolation {
                                        triple,
                                        check: DispatchCheck::Operability,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    Ok(FeasibilityVerdict { feasible: violations.is_empty(), violations })
}

/// Triples (k, r, e) for which at least one (i, j) pair could ever respond.
///
/// The solver treats instances with uncoverable triples as infeasible and
/// reports them.
pub fn coverable_triples(instance: &Instance) -> BTreeSet<TripleId> {
    let m = instance.station_count();
    let n = instance.vessel_count();
    let z = instance.zone_count();
    let f = instance.incident_count();

    let mut out = BTreeSet::new();
    for (e, state) in instance.tidal.states().iter().enumerate() {
        for k in 0..f {
            for r in 0..z {
                'pairs: for i in 0..n {
                    if !instance.relations.equipped(i, k) {
                        continue;
                    }
                    for j in 0..m {
                        if instance.relations.placeable(i, j)
                            && instance.relations.reachable(i, j, r)
                            && state.pattern.contains(j, i)
                        {
                            out.insert(TripleId { incident: k, zone: r, state: e });
                            break 'pairs;
                        }
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::LatLon;
    use crate::tides::{PairPattern, TidalState};
    use alloc::string::ToString;
    use alloc::vec;
    use proptest::prelude::*;

    fn tiny_instance() -> Instance {
        let mut equipment = BTreeSet::new();
        equipment.insert("pumping".to_string());
        Instance {
            vessels: vec![VesselType {
                speed_kn: 20.0,
                draught_m: 1.0,
                count: 1,
                range_nm: 100.0,
                equipment: equipment.clone(),
            }],
            stations: vec![Station { position: LatLon::new(54.0, 8.0), base_depth_m: 5.0 }],
            zones: vec![Zone { position: LatLon::new(54.1, 8.1), frequencies: vec![1.0] }],
            incident_types: vec![IncidentType { severity: 1.0, required_equipment: equipment }],
            relations: CompatibilityRelations::complete(1, 1, 1, 1),
            distances: DistanceMatrix::new(1, 1, vec![10.0]).unwrap(),
            tidal: crate::tides::TidalStateSet::single_full(1, 1),
        }
    }

    #[test]
    fn valid_instance_has_no_violations() {
        assert_eq!(validate_instance(&tiny_instance()), vec![]);
    }

    #[test]
    fn probability_mass_violation_is_reported() {
        let mut instance = tiny_instance();
        instance.tidal = crate::tides::TidalStateSet::from_states(vec![
            TidalState { pattern: PairPattern::full(1, 1), p: 0.6 },
            TidalState { pattern: PairPattern::empty(1, 1), p: 0.6 },
        ]);
        let violations = validate_instance(&instance);
        assert!(violations.iter().any(|v| v.field.contains("tidal") && v.message.contains("1.2")));
    }

    #[test]
    fn negative_distance_names_the_entry() {
        let mut instance = tiny_instance();
        instance.distances = DistanceMatrix::new(1, 1, vec![-2.0]).unwrap();
        let violations = validate_instance(&instance);
        assert_eq!(violations.len(), 1);
        assert!(violations[0].field.contains("distances[0][0]"), "{:?}", violations);
    }

    #[test]
    fn bad_vessel_zone_and_severity_fields_are_reported() {
        let mut instance = tiny_instance();
        instance.vessels[0].speed_kn = 0.0;
        instance.zones[0].frequencies[0] = 1.5;
        instance.incident_types[0].severity = 0.0;
        let violations = validate_instance(&instance);
        assert!(violations.iter().any(|v| v.field.contains("vessels[0]")));
        assert!(violations.iter().any(|v| v.field.contains("zones[0]")));
        assert!(violations.iter().any(|v| v.field.contains("incident_types[0]")));
    }

    #[test]
    fn distance_matrix_rejects_shape_mismatch() {
        assert!(DistanceMatrix::new(2, 2, vec![1.0, 2.0, 3.0]).is_err());
    }

    fn full_plan(responder: u32) -> DispatchPlan {
        DispatchPlan::new(
            1,
            vec![DispatchGroup { states: vec![0], responders: vec![Some(responder)] }],
        )
    }

    #[test]
    fn dispatch_check_passes_on_consistent_assignment() {
        let instance = tiny_instance();
        let alloc = Allocation::from_pairs([(0usize, 0usize)]);
        let verdict = check_dispatch_feasibility(&instance, &alloc, &full_plan(0)).unwrap();
        assert!(verdict.feasible);
        assert_eq!(verdict.violations, vec![]);
    }

    #[test]
    fn dispatch_check_flags_missing_equipment() {
        let mut instance = tiny_instance();
        instance.relations = CompatibilityRelations::complete(1, 1, 1, 1);
        let mut relations = CompatibilityRelations::complete(1, 1, 1, 1);
        // Rebuild without the B pair.
        relations = {
            let mut r = CompatibilityRelations::empty(1, 1, 1, 1);
            let _ = &relations;
            r.insert_placement(0, 0);
            r.insert_reach(0, 0, 0);
            r
        };
        instance.relations = relations;
        let alloc = Allocation::from_pairs([(0usize, 0usize)]);
        let verdict = check_dispatch_feasibility(&instance, &alloc, &full_plan(0)).unwrap();
        assert!(!verdict.feasible);
        assert_eq!(verdict.violations[0].check, DispatchCheck::Equipment);
    }

    #[test]
    fn dispatch_check_flags_undefined_and_unassigned() {
        let instance = tiny_instance();
        let alloc = Allocation::empty();
        let undefined = DispatchPlan::new(1, vec![]);
        let verdict = check_dispatch_feasibility(&instance, &alloc, &undefined).unwrap();
        assert_eq!(verdict.violations[0].check, DispatchCheck::Undefined);

        let verdict = check_dispatch_feasibility(&instance, &alloc, &full_plan(0)).unwrap();
        assert_eq!(verdict.violations[0].check, DispatchCheck::Unassigned);
    }

    #[test]
    fn dispatch_check_rejects_out_of_range_indices() {
        let instance = tiny_instance();
        let alloc = Allocation::from_pairs([(7usize, 0usize)]);
        assert!(check_dispatch_feasibility(&instance, &alloc, &full_plan(0)).is_err());
    }

    #[test]
    fn coverable_triples_complete_and_empty() {
        let instance = tiny_instance();
        assert_eq!(coverable_triples(&instance).len(), 1);

        let mut bare = tiny_instance();
        bare.relations = {
            let mut r = CompatibilityRelations::empty(1, 1, 1, 1);
            r.insert_equipment(0, 0);
            r.insert_reach(0, 0, 0);
            r
        };
        assert!(coverable_triples(&bare).is_empty());
    }

    #[test]
    fn allocation_violations_cover_all_rules() {
        let mut instance = tiny_instance();
        instance.stations.push(Station { position: LatLon::new(54.2, 8.0), base_depth_m: 5.0 });
        instance.relations = {
            let mut r = CompatibilityRelations::empty(1, 2, 1, 1);
            r.insert_placement(0, 0);
            r.insert_equipment(0, 0);
            r.insert_reach(0, 0, 0);
            r
        };
        instance.distances = DistanceMatrix::new(2, 1, vec![10.0, 12.0]).unwrap();
        instance.tidal = crate::tides::TidalStateSet::single_full(2, 1);

        // Placement violation at station 1, fleet bound exceeded overall.
        let alloc = Allocation::from_pairs([(0usize, 0usize), (1usize, 0usize)]);
        let violations = alloc.violations(&instance);
        assert!(violations.iter().any(|v| v.message.contains("not in C")));
        assert!(violations.iter().any(|v| v.message.contains("fleet")));
        assert!(Allocation::from_pairs([(0usize, 0usize)]).violations(&instance).is_empty());
    }

    proptest! {
        #[test]
        fn allocation_validity_closed_under_restriction(
            pairs in proptest::collection::btree_map(0usize..4, 0usize..2, 0..4),
            drop in 0usize..4,
        ) {
            let mut instance = tiny_instance();
            instance.vessels.push(VesselType {
                speed_kn: 12.0,
                draught_m: 1.0,
                count: 3,
                range_nm: 60.0,
                equipment: BTreeSet::new(),
            });
            instance.vessels[0].count = 2;
            instance.stations = (0..4)
                .map(|j| Station { position: LatLon::new(54.0 + 0.1 * j as f64, 8.0), base_depth_m: 5.0 })
                .collect();
            instance.relations = CompatibilityRelations::complete(2, 4, 1, 1);
            instance.distances = DistanceMatrix::new(4, 1, vec![10.0; 4]).unwrap();
            instance.tidal = crate::tides::TidalStateSet::single_full(4, 2);

            let alloc = Allocation::from_pairs(pairs.clone());
            prop_assume!(alloc.violations(&instance).is_empty());
            let mut restricted = alloc.clone();
            restricted.unassign(drop);
            prop_assert!(restricted.violations(&instance).is_empty());
        }
    }
}
