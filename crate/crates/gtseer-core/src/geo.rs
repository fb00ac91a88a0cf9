//! Great-circle distance and the neighboring / non-neighboring POI
//! classification used by the geo-discriminated preference pairs.

use core::fmt;

/// Mean Earth radius in kilometers (IUGG mean radius).
pub const EARTH_RADIUS_KM: f64 = 6371.0088;

/// Great-circle length of one degree of longitude at the equator.
pub const DEGREE_KM_AT_EQUATOR: f64 = EARTH_RADIUS_KM * core::f64::consts::PI / 180.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Self {
        GeoPoint { lat, lon }
    }

    /// Coordinates within [-90, 90] x [-180, 180].
    pub fn is_valid(&self) -> bool {
        self.lat.is_finite()
            && self.lon.is_finite()
            && (-90.0..=90.0).contains(&self.lat)
            && (-180.0..=180.0).contains(&self.lon)
    }
}

impl fmt::Display for GeoPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lat, self.lon)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NeighborClass {
    Neighboring,
    NonNeighboring,
}

/// Haversine great-circle distance in kilometers on a sphere of radius
/// [`EARTH_RADIUS_KM`].
pub fn distance_km(a: GeoPoint, b: GeoPoint) -> f64 {
    let lat_a = a.lat.to_radians();
    let lat_b = b.lat.to_radians();
    let dlat = (b.lat - a.lat).to_radians();
    let dlon = (b.lon - a.lon).to_radians();

    let sin_dlat = libm::sin(dlat / 2.0);
    let sin_dlon = libm::sin(dlon / 2.0);
    let h = sin_dlat * sin_dlat + libm::cos(lat_a) * libm::cos(lat_b) * sin_dlon * sin_dlon;
    // h stays in [0, 1] up to rounding; clamp before asin.
    let h = h.clamp(0.0, 1.0);
    2.0 * EARTH_RADIUS_KM * libm::asin(libm::sqrt(h))
}

/// A candidate is neighboring iff its distance from the target is less than
/// or equal to the threshold `s` (boundary inclusive).
pub fn classify(target: GeoPoint, candidate: GeoPoint, s_km: f64) -> NeighborClass {
    if distance_km(target, candidate) <= s_km {
        NeighborClass::Neighboring
    } else {
        NeighborClass::NonNeighboring
    }
}
