//! JSON wire formats: instances (`rcap-1` schema), X3C instances, and
//! solve reports. Indices are 1-based on the wire and round-trip exactly.

use std::collections::BTreeSet;

use rcap_core::complexity::X3cInstance;
use rcap_core::geo::LatLon;
use rcap_core::model::{
    Allocation, CompatibilityRelations, DistanceMatrix, IncidentType, Instance, Station,
    VesselType, Zone,
};
use rcap_core::solver::{SolveReport, SolveStatus};
use rcap_core::tides::{PairPattern, TidalState, TidalStateSet};
use serde::{Deserialize, Serialize};

pub const SCHEMA: &str = "rcap-1";

#[derive(Debug, thiserror::Error)]
pub enum WireError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema {got:?}, expected {SCHEMA:?}")]
    Schema { got: String },
    #[error("{context}: index {index} out of range 1..={bound}")]
    Index { context: &'static str, index: usize, bound: usize },
    #[error("distances: expected {expected} entries, got {got}")]
    DistanceShape { expected: usize, got: usize },
}

#[derive(Debug, Serialize, Deserialize)]
struct VesselWire {
    speed: f64,
    draught: f64,
    count: u32,
    range: f64,
    equipment: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct StationWire {
    lat: f64,
    lon: f64,
    base_depth: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct ZoneWire {
    lat: f64,
    lon: f64,
    frequencies: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct IncidentWire {
    severity: f64,
    required_equipment: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CompatWire {
    /// Vessel-station pairs [i, j], 1-based.
    #[serde(rename = "C")]
    c: Vec<[usize; 2]>,
    /// Vessel-incident pairs [i, k], 1-based.
    #[serde(rename = "B")]
    b: Vec<[usize; 2]>,
    /// Vessel-station-zone triples [i, j, r], 1-based.
    #[serde(rename = "S")]
    s: Vec<[usize; 3]>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TidalStateWire {
    /// Station-vessel pairs [j, i], 1-based.
    pattern: Vec<[usize; 2]>,
    p: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct InstanceWire {
    schema: String,
    vessels: Vec<VesselWire>,
    stations: Vec<StationWire>,
    zones: Vec<ZoneWire>,
    incident_types: Vec<IncidentWire>,
    compat: CompatWire,
    /// Row-major m x z, nautical miles.
    distances: Vec<f64>,
    tidal: Vec<TidalStateWire>,
}

fn check_index(context: &'static str, index: usize, bound: usize) -> Result<usize, WireError> {
    if index == 0 || index > bound {
        return Err(WireError::Index { context, index, bound });
    }
    Ok(index - 1)
}

pub fn instance_to_json(instance: &Instance) -> String {
    let wire = InstanceWire {
        schema: SCHEMA.to_string(),
        vessels: instance
            .vessels
            .iter()
            .map(|v| VesselWire {
                speed: v.speed_kn,
                draught: v.draught_m,
                count: v.count,
                range: v.range_nm,
                equipment: v.equipment.iter().cloned().collect(),
            })
            .collect(),
        stations: instance
            .stations
            .iter()
            .map(|s| StationWire { lat: s.position.lat, lon: s.position.lon, base_depth: s.base_depth_m })
            .collect(),
        zones: instance
            .zones
            .iter()
            .map(|z| ZoneWire { lat: z.position.lat, lon: z.position.lon, frequencies: z.frequencies.clone() })
            .collect(),
        incident_types: instance
            .incident_types
            .iter()
            .map(|k| IncidentWire {
                severity: k.severity,
                required_equipment: k.required_equipment.iter().cloned().collect(),
            })
            .collect(),
        compat: CompatWire {
            c: instance.relations.placement_pairs().map(|(i, j)| [i + 1, j + 1]).collect(),
            b: instance.relations.equipment_pairs().map(|(i, k)| [i + 1, k + 1]).collect(),
            s: instance
                .relations
                .reach_triples()
                .map(|(i, j, r)| [i + 1, j + 1, r + 1])
                .collect(),
        },
        distances: instance.distances.values().to_vec(),
        tidal: instance
            .tidal
            .states()
            .iter()
            .map(|s| TidalStateWire {
                pattern: s.pattern.pairs().map(|(j, i)| [j + 1, i + 1]).collect(),
                p: s.p,
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&wire).expect("instance serialization is total");
    out.push('\n');
    out
}

pub fn instance_from_json(text: &str) -> Result<Instance, WireError> {
    let wire: InstanceWire = serde_json::from_str(text)?;
    if wire.schema != SCHEMA {
        return Err(WireError::Schema { got: wire.schema });
    }
    let n = wire.vessels.len();
    let m = wire.stations.len();
    let z = wire.zones.len();
    let f = wire.incident_types.len();

    let mut relations = CompatibilityRelations::empty(n, m, z, f);
    for [i, j] in &wire.compat.c {
        relations.insert_placement(check_index("C vessel", *i, n)?, check_index("C station", *j, m)?);
    }
    for [i, k] in &wire.compat.b {
        relations.insert_equipment(check_index("B vessel", *i, n)?, check_index("B incident", *k, f)?);
    }
    for [i, j, r] in &wire.compat.s {
        relations.insert_reach(
            check_index("S vessel", *i, n)?,
            check_index("S station", *j, m)?,
            check_index("S zone", *r, z)?,
        );
    }

    if wire.distances.len() != m * z {
        return Err(WireError::DistanceShape { expected: m * z, got: wire.distances.len() });
    }

    let mut states = Vec::with_capacity(wire.tidal.len());
    for state in &wire.tidal {
        let mut pattern = PairPattern::empty(m, n);
        for [j, i] in &state.pattern {
            pattern.insert(check_index("pattern station", *j, m)?, check_index("pattern vessel", *i, n)?);
        }
        states.push(TidalState { pattern, p: state.p });
    }

    Ok(Instance {
        vessels: wire
            .vessels
            .into_iter()
            .map(|v| VesselType {
                speed_kn: v.speed,
                draught_m: v.draught,
                count: v.count,
                range_nm: v.range,
                equipment: v.equipment.into_iter().collect::<BTreeSet<_>>(),
            })
            .collect(),
        stations: wire
            .stations
            .into_iter()
            .map(|s| Station { position: LatLon::new(s.lat, s.lon), base_depth_m: s.base_depth })
            .collect(),
        zones: wire
            .zones
            .into_iter()
            .map(|z| Zone { position: LatLon::new(z.lat, z.lon), frequencies: z.frequencies })
            .collect(),
        incident_types: wire
            .incident_types
            .into_iter()
            .map(|k| IncidentType {
                severity: k.severity,
                required_equipment: k.required_equipment.into_iter().collect::<BTreeSet<_>>(),
            })
            .collect(),
        relations,
        distances: DistanceMatrix::new(m, z, wire.distances)
            .map_err(|_| WireError::DistanceShape { expected: m * z, got: 0 })?,
        tidal: TidalStateSet::from_states(states),
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct X3cWire {
    #[serde(rename = "X")]
    x: usize,
    #[serde(rename = "D")]
    d: Vec<[usize; 3]>,
}

/// Parses `{"X": 3q, "D": [[a,b,c], ...]}` with 1-based elements.
pub fn x3c_from_json(text: &str) -> Result<X3cInstance, WireError> {
    let wire: X3cWire = serde_json::from_str(text)?;
    let mut triples = Vec::with_capacity(wire.d.len());
    for d in &wire.d {
        triples.push([
            check_index("X3C element", d[0], wire.x)?,
            check_index("X3C element", d[1], wire.x)?,
            check_index("X3C element", d[2], wire.x)?,
        ]);
    }
    X3cInstance::new(wire.x, triples)
        .map_err(|_| WireError::Index { context: "X3C triple", index: 0, bound: wire.x })
}

pub fn x3c_to_json(x3c: &X3cInstance) -> String {
    let wire = X3cWire {
        x: x3c.universe_size,
        d: x3c.triples.iter().map(|d| [d[0] + 1, d[1] + 1, d[2] + 1]).collect(),
    };
    let mut out = serde_json::to_string_pretty(&wire).expect("x3c serialization is total");
    out.push('\n');
    out
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ReportWire {
    pub status: String,
    pub variant: String,
    pub objective: Option<f64>,
    pub bound: f64,
    pub nodes: u64,
    pub wall_time_s: f64,
    /// Station-vessel pairs [j, i], 1-based.
    pub allocation: Option<Vec<[usize; 2]>>,
    pub uncoverable_triples: usize,
}

pub fn report_to_json(report: &SolveReport) -> String {
    let wire = ReportWire {
        status: report.status.name().to_string(),
        variant: report.variant.name().to_string(),
        objective: report.objective,
        bound: report.bound,
        nodes: report.nodes,
        wall_time_s: report.wall_time_s,
        allocation: report
            .allocation
            .as_ref()
            .map(|a| a.pairs().map(|(j, i)| [j + 1, i + 1]).collect()),
        uncoverable_triples: report.uncoverable.len(),
    };
    let mut out = serde_json::to_string_pretty(&wire).expect("report serialization is total");
    out.push('\n');
    out
}

/// Reads the allocation back out of a serialized solve report.
pub fn allocation_from_report_json(text: &str) -> Result<Option<Allocation>, WireError> {
    let wire: ReportWire = serde_json::from_str(text)?;
    Ok(wire.allocation.map(|pairs| {
        Allocation::from_pairs(pairs.into_iter().map(|[j, i]| (j - 1, i - 1)))
    }))
}

/// Process exit code for a solve outcome: 0 optimal, 2 infeasible,
/// 3 limit reached with an incumbent.
pub fn exit_code_for(status: SolveStatus) -> i32 {
    match status {
        SolveStatus::Optimal => 0,
        SolveStatus::Infeasible => 2,
        SolveStatus::LimitReached => 3,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{self, GenerateProfile};
    use rcap_core::model::{
        CompatibilityRelations, DistanceMatrix, IncidentType, Station, VesselType, Zone,
    };
    use rcap_core::geo::LatLon;
    use rcap_core::solver::{VariantTag, SolveReport};
    use rcap_core::tides::{PairPattern, TidalState, TidalStateSet};
    use std::collections::BTreeSet;

    fn tiny_instance() -> Instance {
        let vessels = vec![
            VesselType {
                speed_kn: 20.0,
                draught_m: 1.0,
                count: 2,
                range_nm: 100.0,
                equipment: BTreeSet::from(["pump".to_string()]),
            },
            VesselType {
                speed_kn: 10.0,
                draught_m: 2.0,
                count: 1,
                range_nm: 50.0,
                equipment: BTreeSet::new(),
            },
        ];
        let stations = vec![
            Station { position: LatLon::new(54.0, 8.0), base_depth_m: 2.0 },
            Station { position: LatLon::new(54.5, 8.5), base_depth_m: 3.0 },
        ];
        let zones = vec![
            Zone { position: LatLon::new(54.2, 8.2), frequencies: vec![0.5] },
            Zone { position: LatLon::new(54.3, 8.1), frequencies: vec![0.0] },
            Zone { position: LatLon::new(54.4, 8.4), frequencies: vec![1.0] },
        ];
        let incident_types = vec![IncidentType {
            severity: 0.75,
            required_equipment: BTreeSet::from(["pump".to_string()]),
        }];
        let mut relations = CompatibilityRelations::complete(2, 2, 3, 1);
        relations.remove_placement(1, 0);
        let distances = DistanceMatrix::new(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let mut partial = PairPattern::empty(2, 2);
        partial.insert(0, 0);
        partial.insert(1, 0);
        let tidal = TidalStateSet::from_states(vec![
            TidalState { pattern: PairPattern::full(2, 2), p: 0.25 },
            TidalState { pattern: partial, p: 0.75 },
        ]);
        Instance { vessels, stations, zones, incident_types, relations, distances, tidal }
    }

    #[test]
    fn instance_round_trip_is_identity() {
        let inst = tiny_instance();
        let json = instance_to_json(&inst);
        let back = instance_from_json(&json).unwrap();
        assert_eq!(inst, back);
    }

    #[test]
    fn emission_is_stable_after_one_round_trip() {
        let catalog = synth::parse_catalog(synth::DEFAULT_CATALOG).unwrap();
        let profile = GenerateProfile {
            vessel_types: 3,
            stations: 4,
            zones: 5,
            tide_days: 1,
            correlated_tides: false,
        };
        let inst = synth::generate_instance(2, &profile, &catalog).unwrap();
        let first = instance_to_json(&inst);
        let second = instance_to_json(&instance_from_json(&first).unwrap());
        assert_eq!(first, second);
    }

    #[test]
    fn schema_marker_is_checked() {
        let json = instance_to_json(&tiny_instance()).replace("rcap-1", "rcap-0");
        assert!(matches!(instance_from_json(&json), Err(WireError::Schema { .. })));
    }

    #[test]
    fn out_of_range_indices_are_rejected() {
        let inst = tiny_instance();
        let json = instance_to_json(&inst);
        let bad = json.replacen("[\n        1,\n        1\n      ]", "[\n        9,\n        1\n      ]", 1);
        assert_ne!(bad, json, "fixture must contain a 1-based pair to corrupt");
        assert!(matches!(instance_from_json(&bad), Err(WireError::Index { .. })));
    }

    #[test]
    fn distance_shape_is_checked() {
        let inst = tiny_instance();
        let mut wire: serde_json::Value = serde_json::from_str(&instance_to_json(&inst)).unwrap();
        wire["distances"].as_array_mut().unwrap().pop();
        let err = instance_from_json(&wire.to_string()).unwrap_err();
        assert!(matches!(err, WireError::DistanceShape { expected: 6, got: 5 }));
    }

    #[test]
    fn x3c_round_trip() {
        let x3c = X3cInstance::new(3, vec![[0, 1, 2]]).unwrap();
        let json = x3c_to_json(&x3c);
        let back = x3c_from_json(&json).unwrap();
        assert_eq!(back.universe_size, 3);
        assert_eq!(back.triples, vec![[0, 1, 2]]);
        // 1-based on the wire.
        assert!(json.contains('3') && json.contains('1'));
    }

    #[test]
    fn report_round_trips_allocation() {
        let report = SolveReport {
            status: SolveStatus::Optimal,
            variant: VariantTag::BestTidal,
            objective: Some(1.5),
            allocation: Some(Allocation::from_pairs([(0, 1), (2, 0)])),
            bound: 1.5,
            nodes: 42,
            wall_time_s: 0.1,
            uncoverable: vec![],
        };
        let json = report_to_json(&report);
        let alloc = allocation_from_report_json(&json).unwrap().unwrap();
        assert_eq!(alloc.vessel_at(0), Some(1));
        assert_eq!(alloc.vessel_at(2), Some(0));
        assert_eq!(alloc.len(), 2);
    }

    #[test]
    fn exit_codes_match_contract() {
        assert_eq!(exit_code_for(SolveStatus::Optimal), 0);
        assert_eq!(exit_code_for(SolveStatus::Infeasible), 2);
        assert_eq!(exit_code_for(SolveStatus::LimitReached), 3);
    }
}
