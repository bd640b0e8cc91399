//! Gauge CSV wire format and the HTTP fetch client.
//!
//! Format: optional `#`-prefixed comment lines (`# unit=cm|m`,
//! `# lat=<deg>`, `# lon=<deg>`), a `timestamp,level` header, then one
//! ISO-8601 UTC timestamp and decimal level per row.

use chrono::{DateTime, Utc};
use rcap_core::geo::LatLon;
use rcap_core::tides::GaugeSeries;

#[derive(Debug, thiserror::Error)]
pub enum GaugeError {
    #[error("empty gauge response body")]
    EmptyBody,
    #[error("missing `timestamp,level` header")]
    MissingHeader,
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: timestamp not after the previous row")]
    OutOfOrder { line: usize },
    #[error("unsupported unit {unit:?} (expected cm or m)")]
    BadUnit { unit: String },
    #[error("gauge series invalid: {0}")]
    Series(rcap_core::tides::TidesError),
    #[error("network: {0}")]
    Network(#[from] reqwest::Error),
    #[error("endpoint returned HTTP {status}")]
    Http { status: u16 },
}

/// Parses the documented CSV format. `fallback_position` is used when the
/// body carries no `# lat=` / `# lon=` comments.
pub fn parse_gauge_csv(
    body: &str,
    gauge_id: &str,
    fallback_position: LatLon,
) -> Result<GaugeSeries, GaugeError> {
    let mut unit_scale = 1.0f64;
    let mut lat = None;
    let mut lon = None;
    let mut header_seen = false;
    let mut samples: Vec<(i64, f64)> = Vec::new();

    for (idx, raw) in body.lines().enumerate() {
        let line = idx + 1;
        let text = raw.trim();
        if text.is_empty() {
            continue;
        }
        if let Some(comment) = text.strip_prefix('#') {
            for field in comment.split_whitespace() {
                if let Some(unit) = field.strip_prefix("unit=") {
                    unit_scale = match unit {
                        "m" => 1.0,
                        "cm" => 0.01,
                        other => return Err(GaugeError::BadUnit { unit: other.to_string() }),
                    };
                } else if let Some(v) = field.strip_prefix("lat=") {
                    lat = v.parse::<f64>().ok();
                } else if let Some(v) = field.strip_prefix("lon=") {
                    lon = v.parse::<f64>().ok();
                }
            }
            continue;
        }
        if !header_seen {
            if text != "timestamp,level" {
                return Err(GaugeError::MissingHeader);
            }
            header_seen = true;
            continue;
        }
        let (ts_text, level_text) = text.split_once(',').ok_or_else(|| GaugeError::Malformed {
            line,
            message: "expected `timestamp,level`".to_string(),
        })?;
        let ts: DateTime<Utc> = ts_text.parse().map_err(|e| GaugeError::Malformed {
            line,
            message: format!("bad timestamp {ts_text:?}: {e}"),
        })?;
        let level: f64 = level_text.trim().parse().map_err(|e| GaugeError::Malformed {
            line,
            message: format!("bad level {level_text:?}: {e}"),
        })?;
        let t = ts.timestamp();
        if let Some((prev, _)) = samples.last() {
            if t <= *prev {
                return Err(GaugeError::OutOfOrder { line });
            }
        }
        samples.push((t, level * unit_scale));
    }

    if samples.is_empty() {
        return Err(GaugeError::EmptyBody);
    }
    let position = match (lat, lon) {
        (Some(lat), Some(lon)) => LatLon::new(lat, lon),
        _ => fallback_position,
    };
    GaugeSeries::new(gauge_id.to_string(), position, samples).map_err(GaugeError::Series)
}

/// Fetches `{endpoint}?gauge={id}&start={iso}&end={iso}` and parses the
/// body. The endpoint usually comes from `RCAP_GAUGE_ENDPOINT`.
pub fn fetch_gauge_series(
    endpoint: &str,
    gauge_id: &str,
    start: DateTime<Utc>,
    end: DateTime<Utc>,
) -> Result<GaugeSeries, GaugeError> {
    let url = format!(
        "{endpoint}?gauge={gauge_id}&start={}&end={}",
        start.to_rfc3339(),
        end.to_rfc3339()
    );
    let response = reqwest::blocking::get(url)?;
    if !response.status().is_success() {
        return Err(GaugeError::Http { status: response.status().as_u16() });
    }
    let body = response.text()?;
    parse_gauge_csv(&body, gauge_id, LatLon::new(0.0, 0.0))
}

pub fn gauge_to_csv(series: &GaugeSeries) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# unit=m lat={} lon={}\ntimestamp,level\n",
        series.position.lat, series.position.lon
    ));
    for (t, level) in series.samples() {
        let ts = DateTime::<Utc>::from_timestamp(*t, 0).expect("timestamps are in range");
        out.push_str(&format!("{},{}\n", ts.to_rfc3339_opts(chrono::SecondsFormat::Secs, true), level));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{Read, Write};
    use std::net::TcpListener;

    const BODY: &str = "# unit=m lat=54.18 lon=7.89\n\
                        timestamp,level\n\
                        2023-11-01T00:00:00Z,1.25\n\
                        2023-11-01T00:01:00Z,1.30\n\
                        2023-11-01T00:02:00Z,1.10\n";

    #[test]
    fn parses_csv_with_position_comments() {
        let series = parse_gauge_csv(BODY, "helgoland", LatLon::new(0.0, 0.0)).unwrap();
        assert_eq!(series.len(), 3);
        assert_eq!(series.position.lat, 54.18);
        assert_eq!(series.position.lon, 7.89);
        assert_eq!(series.samples()[0], (1698796800, 1.25));
        assert_eq!(series.samples()[1].0 - series.samples()[0].0, 60);
    }

    #[test]
    fn centimeter_unit_scales_levels() {
        let body = BODY.replace("unit=m", "unit=cm");
        let series = parse_gauge_csv(&body, "g", LatLon::new(0.0, 0.0)).unwrap();
        assert!((series.samples()[0].1 - 0.0125).abs() < 1e-15);
    }

    #[test]
    fn fallback_position_applies_without_comments() {
        let body = "timestamp,level\n2023-11-01T00:00:00Z,0.5\n";
        let series = parse_gauge_csv(body, "g", LatLon::new(53.0, 8.0)).unwrap();
        assert_eq!(series.position.lat, 53.0);
    }

    #[test]
    fn rejects_swapped_rows() {
        let body = "timestamp,level\n\
                    2023-11-01T00:01:00Z,1.3\n\
                    2023-11-01T00:00:00Z,1.2\n";
        assert!(matches!(
            parse_gauge_csv(body, "g", LatLon::new(0.0, 0.0)),
            Err(GaugeError::OutOfOrder { line: 3 })
        ));
    }

    #[test]
    fn rejects_empty_and_headerless_bodies() {
        assert!(matches!(
            parse_gauge_csv("timestamp,level\n", "g", LatLon::new(0.0, 0.0)),
            Err(GaugeError::EmptyBody)
        ));
        assert!(matches!(
            parse_gauge_csv("2023-11-01T00:00:00Z,1.0\n", "g", LatLon::new(0.0, 0.0)),
            Err(GaugeError::MissingHeader)
        ));
    }

    #[test]
    fn rejects_unknown_units_and_bad_rows() {
        assert!(matches!(
            parse_gauge_csv("# unit=ft\ntimestamp,level\n", "g", LatLon::new(0.0, 0.0)),
            Err(GaugeError::BadUnit { .. })
        ));
        assert!(matches!(
            parse_gauge_csv("timestamp,level\nnot-a-time,1.0\n", "g", LatLon::new(0.0, 0.0)),
            Err(GaugeError::Malformed { line: 2, .. })
        ));
    }

    #[test]
    fn emitted_csv_round_trips() {
        let series = parse_gauge_csv(BODY, "g", LatLon::new(0.0, 0.0)).unwrap();
        let emitted = gauge_to_csv(&series);
        let back = parse_gauge_csv(&emitted, "g", LatLon::new(0.0, 0.0)).unwrap();
        assert_eq!(series.samples(), back.samples());
        assert_eq!(series.position, back.position);
    }

    #[test]
    fn fetch_parses_a_served_body() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let server = std::thread::spawn(move || {
            let (mut stream, _) = listener.accept().unwrap();
            let mut buf = [0u8; 4096];
            let n = stream.read(&mut buf).unwrap();
            let request = String::from_utf8_lossy(&buf[..n]).into_owned();
            let response = format!(
                "HTTP/1.1 200 OK\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{}",
                BODY.len(),
                BODY
            );
            stream.write_all(response.as_bytes()).unwrap();
            request
        });
        let start = "2023-11-01T00:00:00Z".parse::<DateTime<Utc>>().unwrap();
        let end = "2023-11-01T00:05:00Z".parse::<DateTime<Utc>>().unwrap();
        let series =
            fetch_gauge_series(&format!("http://{addr}/tides"), "helgoland", start, end).unwrap();
        assert_eq!(series.len(), 3);
        assert_eq!(series.position.lat, 54.18);
        let request = server.join().unwrap();
        assert!(request.contains("gauge=helgoland"), "request line: {request}");
        assert!(request.contains("start=2023-11-01T00:00:00"));
    }

    #[test]
    fn fetch_surfaces_http_errors() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        std::thread::spawn(move || {
            let (mut stream, _) = listener.accept().unwrap();
            let mut buf = [0u8; 4096];
            let _ = stream.read(&mut buf).unwrap();
            stream
                .write_all(b"HTTP/1.1 503 Service Unavailable\r\ncontent-length: 0\r\nconnection: close\r\n\r\n")
                .unwrap();
        });
        let start = "2023-11-01T00:00:00Z".parse::<DateTime<Utc>>().unwrap();
        let end = "2023-11-01T00:05:00Z".parse::<DateTime<Utc>>().unwrap();
        let err = fetch_gauge_series(&format!("http://{addr}/tides"), "g", start, end).unwrap_err();
        assert!(matches!(err, GaugeError::Http { status: 503 }));
    }
}
