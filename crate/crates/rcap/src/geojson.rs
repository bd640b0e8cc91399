//! GeoJSON (RFC 7946) input for region polygons and output for point sets.

use rcap_core::geo::{LatLon, Region};
use serde_json::{json, Value};

#[derive(Debug, thiserror::Error)]
pub enum GeoJsonError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("no Polygon or MultiPolygon geometry found")]
    NoPolygon,
    #[error("malformed coordinates: {0}")]
    Coordinates(&'static str),
    #[error("region invalid: {0}")]
    Region(rcap_core::geo::GeoError),
}

fn ring_from_value(ring: &Value) -> Result<Vec<LatLon>, GeoJsonError> {
    let points = ring.as_array().ok_or(GeoJsonError::Coordinates("ring is not an array"))?;
    let mut out = Vec::with_capacity(points.len());
    for p in points {
        let pair = p.as_array().ok_or(GeoJsonError::Coordinates("position is not an array"))?;
        if pair.len() < 2 {
            return Err(GeoJsonError::Coordinates("position has fewer than 2 numbers"));
        }
        let lon = pair[0].as_f64().ok_or(GeoJsonError::Coordinates("non-numeric longitude"))?;
        let lat = pair[1].as_f64().ok_or(GeoJsonError::Coordinates("non-numeric latitude"))?;
        out.push(LatLon::new(lat, lon));
    }
    // GeoJSON rings repeat the first position at the end; the region type
    // closes rings implicitly.
    if out.len() >= 2 && out.first() == out.last() {
        out.pop();
    }
    Ok(out)
}

fn polygon_rings(geometry: &Value, rings: &mut Vec<Vec<LatLon>>) -> Result<(), GeoJsonError> {
    match geometry.get("type").and_then(Value::as_str) {
        Some("Polygon") => {
            for ring in geometry["coordinates"]
                .as_array()
                .ok_or(GeoJsonError::Coordinates("polygon coordinates missing"))?
            {
                rings.push(ring_from_value(ring)?);
            }
            Ok(())
        }
        Some("MultiPolygon") => {
            for polygon in geometry["coordinates"]
                .as_array()
                .ok_or(GeoJsonError::Coordinates("multipolygon coordinates missing"))?
            {
                for ring in polygon
                    .as_array()
                    .ok_or(GeoJsonError::Coordinates("polygon coordinates missing"))?
                {
                    rings.push(ring_from_value(ring)?);
                }
            }
            Ok(())
        }
        _ => Err(GeoJsonError::NoPolygon),
    }
}

/// Accepts a bare geometry, a Feature, or a FeatureCollection and collects
/// every polygon ring into one region (holes work via even-odd counting).
pub fn region_from_geojson(text: &str) -> Result<Region, GeoJsonError> {
    let value: Value = serde_json::from_str(text)?;
    let mut rings = Vec::new();
    match value.get("type").and_then(Value::as_str) {
        Some("FeatureCollection") => {
            for feature in value["features"].as_array().into_iter().flatten() {
                if let Some(geometry) = feature.get("geometry") {
                    polygon_rings(geometry, &mut rings)?;
                }
            }
        }
        Some("Feature") => polygon_rings(&value["geometry"], &mut rings)?,
        Some(_) => polygon_rings(&value, &mut rings)?,
        None => return Err(GeoJsonError::NoPolygon),
    }
    if rings.is_empty() {
        return Err(GeoJsonError::NoPolygon);
    }
    Region::from_rings(rings).map_err(GeoJsonError::Region)
}

/// Emits labelled points as a FeatureCollection.
pub fn points_to_geojson(points: &[(String, LatLon)]) -> String {
    let features: Vec<Value> = points
        .iter()
        .map(|(label, p)| {
            json!({
                "type": "Feature",
                "properties": { "name": label },
                "geometry": { "type": "Point", "coordinates": [p.lon, p.lat] },
            })
        })
        .collect();
    let mut out = serde_json::to_string_pretty(&json!({
        "type": "FeatureCollection",
        "features": features,
    }))
    .expect("geojson serialization is total");
    out.push('\n');
    out
}
