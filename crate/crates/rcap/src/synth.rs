//! Synthetic instance and tide generation, so the whole pipeline runs
//! offline and bit-reproducibly per seed.

use std::collections::BTreeSet;

use rcap_core::geo::{self, LatLon, Region};
use rcap_core::model::{
    CompatibilityRelations, IncidentType, Instance, Station, VesselType, Zone,
};
use rcap_core::rng;
use rcap_core::tides::{derive_states, GaugeSeries, StationLevels};
use serde::Deserialize;

/// Lunar semidiurnal (M2) tide period.
pub const TIDE_PERIOD_S: f64 = 12.42 * 3600.0;

// One RNG stream per randomized ingredient, so adding draws to one never
// shifts another.
const STREAM_STATIONS: u64 = 1;
const STREAM_FREQUENCIES: u64 = 2;
const STREAM_PLACEMENT: u64 = 3;
const STREAM_SEVERITIES: u64 = 4;
const STREAM_TIDES: u64 = 5;

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("vessel catalog: {0}")]
    Catalog(String),
    #[error("profile: {0}")]
    Profile(String),
    #[error("zone generation: {0:?}")]
    Zones(geo::GeoError),
    #[error("tidal derivation: {0:?}")]
    Tides(rcap_core::tides::TidesError),
}

#[derive(Debug, Deserialize)]
struct CatalogEntry {
    #[allow(dead_code)]
    name: String,
    speed: f64,
    draught: f64,
    count: u32,
    range: f64,
    equipment: Vec<String>,
}

/// The editable vessel-type catalog bundled with the binary.
pub const DEFAULT_CATALOG: &str = include_str!("../fixtures/vessels.json");

pub fn parse_catalog(text: &str) -> Result<Vec<VesselType>, SynthError> {
    let entries: Vec<CatalogEntry> =
        serde_json::from_str(text).map_err(|e| SynthError::Catalog(e.to_string()))?;
    Ok(entries
        .into_iter()
        .map(|e| VesselType {
            speed_kn: e.speed,
            draught_m: e.draught,
            count: e.count,
            range_nm: e.range,
            equipment: e.equipment.into_iter().collect::<BTreeSet<_>>(),
        })
        .collect())
}

/// The hand-defined incident catalog: five equipment-based types plus
/// three towing classes. Severities are drawn per seed.
pub fn incident_catalog() -> Vec<(&'static str, &'static [&'static str])> {
    vec![
        ("fire", &["firefighting"]),
        ("medical-evacuation", &["hospital"]),
        ("first-aid", &["first-aid"]),
        ("water-ingress", &["pumping"]),
        ("shallow-water-search", &["secondary-craft"]),
        ("tow-small", &["tow-class-1"]),
        ("tow-medium", &["tow-class-2"]),
        ("tow-large", &["tow-class-3"]),
    ]
}

#[derive(Debug, Clone)]
pub struct GenerateProfile {
    pub vessel_types: usize,
    pub stations: usize,
    pub zones: usize,
    /// Days of synthetic minute-resolution tides.
    pub tide_days: u32,
    /// Identical tide curve at every station (perfectly correlated tides).
    pub correlated_tides: bool,
}

impl Default for GenerateProfile {
    fn default() -> Self {
        Self {
            vessel_types: 11,
            stations: 55,
            zones: 1000,
            tide_days: 30,
            correlated_tides: false,
        }
    }
}

/// Default operating area: a box over the German Bight and western Baltic.
pub fn default_region() -> Region {
    Region::from_rings(vec![vec![
        LatLon::new(53.3, 6.5),
        LatLon::new(55.8, 6.5),
        LatLon::new(55.8, 14.0),
        LatLon::new(53.3, 14.0),
    ]])
    .expect("the default box is a valid ring")
}

/// Per-station synthetic tide curves: sinusoids with the M2 period.
///
/// In correlated mode every station shares one amplitude and phase, so the
/// operability patterns are nested. Otherwise amplitude and phase are
/// drawn per station.
pub fn synthetic_station_levels(
    seed: u64,
    stations: usize,
    samples: usize,
    step_s: f64,
    correlated: bool,
) -> StationLevels {
    let mut rng = rng::seeded(seed, STREAM_TIDES);
    let shared_amp = 0.8 + 1.0 * rng::unit_f64(&mut rng);
    let shared_phase = core::f64::consts::TAU * rng::unit_f64(&mut rng);

    let levels = (0..stations)
        .map(|_| {
            let (amp, phase) = if correlated {
                (shared_amp, shared_phase)
            } else {
                (
                    0.8 + 1.0 * rng::unit_f64(&mut rng),
                    core::f64::consts::TAU * rng::unit_f64(&mut rng),
                )
            };
            (0..samples)
                .map(|t| amp * (core::f64::consts::TAU * (t as f64 * step_s) / TIDE_PERIOD_S + phase).sin())
                .collect()
        })
        .collect();
    StationLevels { levels }
}

/// Synthetic gauge series on a minute grid, phase-shifted by position so
/// neighbouring gauges correlate strongly.
pub fn synthetic_gauge(seed: u64, gauge_id: &str, position: LatLon, samples: usize) -> GaugeSeries {
    let mut rng = rng::seeded(seed, STREAM_TIDES);
    let amp = 1.0 + 0.5 * rng::unit_f64(&mut rng);
    // Small longitude-driven phase lag, a few minutes per degree.
    let phase = 0.05 * position.lon;
    let series = (0..samples)
        .map(|t| {
            let x = core::f64::consts::TAU * (t as f64 * 60.0) / TIDE_PERIOD_S + phase;
            (60 * t as i64, amp * x.sin())
        })
        .collect();
    GaugeSeries::new(gauge_id.to_string(), position, series).expect("synthetic grid is ordered")
}

/// Builds the full synthetic instance for a seed.
pub fn generate_instance(
    seed: u64,
    profile: &GenerateProfile,
    catalog: &[VesselType],
) -> Result<Instance, SynthError> {
    if profile.vessel_types == 0 || profile.vessel_types > catalog.len() {
        return Err(SynthError::Profile(format!(
            "vessel_types must be in 1..={}, got {}",
            catalog.len(),
            profile.vessel_types
        )));
    }
    if profile.stations == 0 || profile.zones == 0 || profile.tide_days == 0 {
        return Err(SynthError::Profile("stations, zones and tide_days must be positive".into()));
    }
    let vessels: Vec<VesselType> = catalog[..profile.vessel_types].to_vec();
    let n = vessels.len();
    let m = profile.stations;
    let z = profile.zones;
    let region = default_region();

    let mut station_rng = rng::seeded(seed, STREAM_STATIONS);
    let (min, max) = region.bounding_box();
    let stations: Vec<Station> = (0..m)
        .map(|_| Station {
            position: LatLon::new(
                min.lat + (max.lat - min.lat) * rng::unit_f64(&mut station_rng),
                min.lon + (max.lon - min.lon) * rng::unit_f64(&mut station_rng),
            ),
            // Up to 6 m at the zero-tide reference: deep harbors stay
            // operable for the largest draughts even at low tide.
            base_depth_m: 0.5 + 5.5 * rng::unit_f64(&mut station_rng),
        })
        .collect();

    let zone_points = geo::generate_zones(&region, z, seed).map_err(SynthError::Zones)?;

    let incidents = incident_catalog();
    let f = incidents.len();
    let mut severity_rng = rng::seeded(seed, STREAM_SEVERITIES);
    let incident_types: Vec<IncidentType> = incidents
        .iter()
        .map(|(_, required)| IncidentType {
            // 1 - U[0,1) keeps severities strictly positive.
            severity: 1.0 - rng::unit_f64(&mut severity_rng),
            required_equipment: required.iter().map(|s| s.to_string()).collect(),
        })
        .collect();

    // Frequencies: a 0.4 gate deciding whether an incident type can occur
    // in a zone at all, then a uniform rate.
    let mut freq_rng = rng::seeded(seed, STREAM_FREQUENCIES);
    let zones: Vec<Zone> = zone_points
        .into_iter()
        .map(|position| Zone {
            position,
            frequencies: (0..f)
                .map(|_| {
                    let gate = rng::unit_f64(&mut freq_rng) < 0.4;
                    let value = rng::unit_f64(&mut freq_rng);
                    if gate {
                        value
                    } else {
                        0.0
                    }
                })
                .collect(),
        })
        .collect();

    let distances = geo::distance_matrix(&stations, &zones);

    let mut relations = CompatibilityRelations::empty(n, m, z, f);
    let mut placement_rng = rng::seeded(seed, STREAM_PLACEMENT);
    for i in 0..n {
        for j in 0..m {
            if rng::unit_f64(&mut placement_rng) < 0.9 {
                relations.insert_placement(i, j);
            }
        }
    }
    for (i, vessel) in vessels.iter().enumerate() {
        for (k, incident) in incident_types.iter().enumerate() {
            if incident.required_equipment.is_subset(&vessel.equipment) {
                relations.insert_equipment(i, k);
            }
        }
    }
    for (i, j, r) in geo::derive_reachability(&vessels, &distances) {
        relations.insert_reach(i, j, r);
    }

    let samples = profile.tide_days as usize * 24 * 60;
    let levels =
        synthetic_station_levels(seed, m, samples, 60.0, profile.correlated_tides);
    let tidal = derive_states(&levels, &stations, &vessels).map_err(SynthError::Tides)?;

    Ok(Instance { vessels, stations, zones, incident_types, relations, distances, tidal })
}
