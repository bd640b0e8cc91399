//! Great-circle geometry, reachability derivation, zone generation and
//! k-means zone clustering.

use alloc::vec;
use alloc::vec::Vec;

use crate::model::{DistanceMatrix, VesselType, Zone};
use crate::rng;

/// Spherical earth radius used throughout, in kilometers.
pub const EARTH_RADIUS_KM: f64 = 6371.0;
/// One nautical mile in kilometers (exact by definition).
pub const KM_PER_NM: f64 = 1.852;

/// A position in degrees. Latitude in `[-90, 90]`, longitude in `[-180, 180]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatLon {
    pub lat: f64,
    pub lon: f64,
}

impl LatLon {
    pub fn new(lat: f64, lon: f64) -> Self {
        Self { lat, lon }
    }

    pub fn is_valid(&self) -> bool {
        self.lat.is_finite()
            && self.lon.is_finite()
            && (-90.0..=90.0).contains(&self.lat)
            && (-180.0..=180.0).contains(&self.lon)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeoError {
    /// k-means called with more clusters than zones.
    TooManyClusters { k: usize, zones: usize },
    /// Rejection sampling gave up (degenerate region).
    RegionSamplingFailed,
    /// Region with no vertices.
    EmptyRegion,
    ZeroClusters,
}

impl core::fmt::Display for GeoError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            GeoError::TooManyClusters { k, zones } => {
                write!(f, "cannot form {k} clusters from {zones} zones")
            }
            GeoError::RegionSamplingFailed => {
                write!(f, "rejection sampling failed: region is degenerate or empty")
            }
            GeoError::EmptyRegion => write!(f, "region has no vertices"),
            GeoError::ZeroClusters => write!(f, "cluster count must be at least 1"),
        }
    }
}

/// Great-circle distance in nautical miles (haversine, R = 6371 km).
pub fn haversine_nm(a: LatLon, b: LatLon) -> f64 {
    let lat1 = a.lat.to_radians();
    let lat2 = b.lat.to_radians();
    let dlat = (b.lat - a.lat).to_radians();
    let dlon = (b.lon - a.lon).to_radians();

    let s1 = libm::sin(dlat / 2.0);
    let s2 = libm::sin(dlon / 2.0);
    let h = s1 * s1 + libm::cos(lat1) * libm::cos(lat2) * s2 * s2;
    let c = 2.0 * libm::asin(libm::sqrt(h.min(1.0)));
    c * EARTH_RADIUS_KM / KM_PER_NM
}

/// Station-to-zone distance matrix (entry `(j, r)`), nautical miles.
pub fn distance_matrix(stations: &[crate::model::Station], zones: &[Zone]) -> DistanceMatrix {
    let mut values = Vec::with_capacity(stations.len() * zones.len());
    for st in stations {
        for zn in zones {
            values.push(haversine_nm(st.position, zn.position));
        }
    }
    DistanceMatrix::new(stations.len(), zones.len(), values)
        .expect("constructed with matching shape")
}

/// Reachable `(i, j, r)` triples: zone `r` is reachable from station `j` by
/// vessel type `i` when the one-way distance fits half the listed range
/// (the way back consumes the other half). Ties at the exact budget count
/// as reachable.
pub fn derive_reachability(vessels: &[VesselType], distances: &DistanceMatrix) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for (i, v) in vessels.iter().enumerate() {
        let budget = v.range_nm / 2.0;
        for j in 0..distances.stations() {
            for r in 0..distances.zones() {
                if distances.get(j, r) <= budget {
                    out.push((i, j, r));
                }
            }
        }
    }
    out
}

/// A sampling region: one or more polygon rings (point-in-any semantics).
#[derive(Debug, Clone)]
pub struct Region {
    rings: Vec<Vec<LatLon>>,
}

impl Region {
    pub fn from_rings(rings: Vec<Vec<LatLon>>) -> Result<Self, GeoError> {
        if rings.iter().all(|r| r.is_empty()) {
            return Err(GeoError::EmptyRegion);
        }
        Ok(Self { rings })
    }

    pub fn rings(&self) -> &[Vec<LatLon>] {
        &self.rings
    }

    pub fn bounding_box(&self) -> (LatLon, LatLon) {
        let mut min = LatLon::new(f64::INFINITY, f64::INFINITY);
        let mut max = LatLon::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in self.rings.iter().flatten() {
            min.lat = min.lat.min(p.lat);
            min.lon = min.lon.min(p.lon);
            max.lat = max.lat.max(p.lat);
            max.lon = max.lon.max(p.lon);
        }
        (min, max)
    }

    /// Ray casting on raw degrees; boundary points count as inside.
    pub fn contains(&self, p: LatLon) -> bool {
        self.rings.iter().any(|ring| ring_contains(ring, p))
    }
}

fn ring_contains(ring: &[LatLon], p: LatLon) -> bool {
    if ring.is_empty() {
        return false;
    }
    if ring.len() < 3 {
        return ring.iter().any(|v| on_segment(*v, *v, p));
    }
    let mut inside = false;
    let n = ring.len();
    for idx in 0..n {
        let a = ring[idx];
        let b = ring[(idx + 1) % n];
        if on_segment(a, b, p) {
            return true;
        }
        if (a.lat > p.lat) != (b.lat > p.lat) {
            let t = (p.lat - a.lat) / (b.lat - a.lat);
            let x = a.lon + t * (b.lon - a.lon);
            if p.lon < x {
                inside = !inside;
            }
        }
    }
    inside
}

fn on_segment(a: LatLon, b: LatLon, p: LatLon) -> bool {
    const EPS: f64 = 1e-12;
    let cross = (b.lon - a.lon) * (p.lat - a.lat) - (b.lat - a.lat) * (p.lon - a.lon);
    if cross.abs() > EPS {
        return false;
    }
    let dot = (p.lon - a.lon) * (b.lon - a.lon) + (p.lat - a.lat) * (b.lat - a.lat);
    let len2 = (b.lon - a.lon) * (b.lon - a.lon) + (b.lat - a.lat) * (b.lat - a.lat);
    if len2 < EPS {
        return (p.lon - a.lon).abs() < EPS && (p.lat - a.lat).abs() < EPS;
    }
    (-EPS..=len2 + EPS).contains(&dot)
}

/// Uniform zone positions inside the region, by rejection sampling on the
/// bounding box. Deterministic under `seed`.
pub fn generate_zones(region: &Region, count: usize, seed: u64) -> Result<Vec<LatLon>, GeoError> {
    let (min, max) = region.bounding_box();
    if !min.lat.is_finite() {
        return Err(GeoError::EmptyRegion);
    }
    let mut rng = rng::seeded(seed, 0x7a6f6e65); // "zone"
    let mut out = Vec::with_capacity(count);
    let budget = 1_000_000u64.saturating_mul(count as u64);
    let mut attempts = 0u64;
    while out.len() < count {
        if attempts >= budget {
            return Err(GeoError::RegionSamplingFailed);
        }
        attempts += 1;
        let p = LatLon::new(
            min.lat + rng::unit_f64(&mut rng) * (max.lat - min.lat),
            min.lon + rng::unit_f64(&mut rng) * (max.lon - min.lon),
        );
        if region.contains(p) {
            out.push(p);
        }
    }
    Ok(out)
}

/// Outcome of aggregating zones by k-means.
#[derive(Debug, Clone)]
pub struct ClusteringResult {
    pub centroids: Vec<LatLon>,
    /// Original zone index -> cluster index.
    pub membership: Vec<usize>,
    /// The aggregated zones: centroid positions with mean frequencies.
    pub cluster_zones: Vec<Zone>,
}

/// Lloyd's k-means on raw (lat, lon) degrees with seeded k-means++ init.
///
/// Stops when no membership changes or after 300 iterations. An empty
/// cluster is re-seeded with the point farthest from its centroid.
/// Aggregated frequencies are the unweighted mean over member zones.
pub fn cluster_zones(zones: &[Zone], k: usize, seed: u64) -> Result<ClusteringResult, GeoError> {
    if k == 0 {
        return Err(GeoError::ZeroClusters);
    }
    if k > zones.len() {
        return Err(GeoError::TooManyClusters { k, zones: zones.len() });
    }
    let pts: Vec<LatLon> = zones.iter().map(|z| z.position).collect();
    let mut rng = rng::seeded(seed, 0x6b6d as u64);

    // k-means++ seeding.
    let mut centroids: Vec<LatLon> = Vec::with_capacity(k);
    centroids.push(pts[rng::index(&mut rng, pts.len())]);
    let mut d2: Vec<f64> = pts.iter().map(|p| sq_dist(*p, centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total <= 0.0 {
            rng::index(&mut rng, pts.len())
        } else {
            let mut target = rng::unit_f64(&mut rng) * total;
            let mut chosen = pts.len() - 1;
            for (idx, w) in d2.iter().enumerate() {
                target -= w;
                if target <= 0.0 {
                    chosen = idx;
                    break;
                }
            }
            chosen
        };
        centroids.push(pts[next]);
        for (idx, p) in pts.iter().enumerate() {
            d2[idx] = d2[idx].min(sq_dist(*p, centroids[centroids.len() - 1]));
        }
    }

    let mut membership = vec![0usize; pts.len()];
    for iter in 0..300 {
        let mut changed = iter == 0;
        for (idx, p) in pts.iter().enumerate() {
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for (c, ctr) in centroids.iter().enumerate() {
                let d = sq_dist(*p, *ctr);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            if membership[idx] != best {
                membership[idx] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        // Recompute centroids; re-seed empties on the farthest point.
        let mut sums = vec![(0.0f64, 0.0f64, 0usize); k];
        for (idx, p) in pts.iter().enumerate() {
            let s = &mut sums[membership[idx]];
            s.0 += p.lat;
            s.1 += p.lon;
            s.2 += 1;
        }
        for (c, s) in sums.iter().enumerate() {
            if s.2 > 0 {
                centroids[c] = LatLon::new(s.0 / s.2 as f64, s.1 / s.2 as f64);
            } else {
                // Re-seed on the point farthest from its current centroid.
                let mut far = 0usize;
                let mut far_d = -1.0f64;
                for (idx, p) in pts.iter().enumerate() {
                    let d = sq_dist(*p, centroids[membership[idx]]);
                    if d > far_d {
                        far_d = d;
                        far = idx;
                    }
                }
                centroids[c] = pts[far];
                membership[far] = c;
            }
        }
    }

    let f = zones.first().map(|z| z.frequencies.len()).unwrap_or(0);
    let mut freq_sums = vec![vec![0.0f64; f]; k];
    let mut counts = vec![0usize; k];
    for (idx, z) in zones.iter().enumerate() {
        let c = membership[idx];
        counts[c] += 1;
        for (kk, q) in z.frequencies.iter().enumerate() {
            freq_sums[c][kk] += q;
        }
    }
    let cluster_zones: Vec<Zone> = (0..k)
        .map(|c| Zone {
            position: centroids[c],
            frequencies: freq_sums[c]
                .iter()
                .map(|s| if counts[c] > 0 { s / counts[c] as f64 } else { 0.0 })
                .collect(),
        })
        .collect();

    Ok(ClusteringResult { centroids, membership, cluster_zones })
}

#[inline]
fn sq_dist(a: LatLon, b: LatLon) -> f64 {
    let dl = a.lat - b.lat;
    let dn = a.lon - b.lon;
    dl * dl + dn * dn
}
