//! Great-circle geometry on a spherical Earth.

use crate::types::GeoPosition;

pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Haversine surface distance in meters; altitude is ignored.
pub fn haversine_m(a: &GeoPosition, b: &GeoPosition) -> f64 {
    let (lat1, lat2) = (a.lat_deg.to_radians(), b.lat_deg.to_radians());
    let dlat = lat2 - lat1;
    let dlon = (b.lon_deg - a.lon_deg).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

/// Slant distance: surface distance combined with the altitude difference.
/// Missing altitudes count as 0 m.
pub fn distance_3d_m(a: &GeoPosition, b: &GeoPosition) -> f64 {
    let horiz = haversine_m(a, b);
    let dalt = a.alt_m.unwrap_or(0.0) - b.alt_m.unwrap_or(0.0);
    horiz.hypot(dalt)
}

/// Initial great-circle bearing from `from` to `to`, degrees in [0, 360).
pub fn bearing_deg(from: &GeoPosition, to: &GeoPosition) -> f64 {
    let (lat1, lat2) = (from.lat_deg.to_radians(), to.lat_deg.to_radians());
    let dlon = (to.lon_deg - from.lon_deg).to_radians();
    let y = dlon.sin() * lat2.cos();
    let x = lat1.cos() * lat2.sin() - lat1.sin() * lat2.cos() * dlon.cos();
    let b = y.atan2(x).to_degrees().rem_euclid(360.0);
    // rem_euclid can round up to exactly 360.0 for tiny negative inputs
    if b >= 360.0 {
        0.0
    } else {
        b
    }
}

/// Local tangent-plane frame anchored at `origin`: east/north offsets in meters.
///
/// Equirectangular; accurate to well under a meter over a few kilometers.
#[derive(Debug, Clone, Copy)]
pub struct LocalFrame {
    origin_lat: f64,
    origin_lon: f64,
    cos_lat: f64,
}

impl LocalFrame {
    pub fn new(origin: &GeoPosition) -> Self {
        LocalFrame {
            origin_lat: origin.lat_deg,
            origin_lon: origin.lon_deg,
            cos_lat: origin.lat_deg.to_radians().cos(),
        }
    }

    pub fn to_geo(&self, east_m: f64, north_m: f64, alt_m: Option<f64>) -> GeoPosition {
        GeoPosition {
            lat_deg: self.origin_lat + (north_m / EARTH_RADIUS_M).to_degrees(),
            lon_deg: self.origin_lon + (east_m / (EARTH_RADIUS_M * self.cos_lat)).to_degrees(),
            alt_m,
        }
    }

    pub fn to_local(&self, p: &GeoPosition) -> (f64, f64) {
        let north = (p.lat_deg - self.origin_lat).to_radians() * EARTH_RADIUS_M;
        let east = (p.lon_deg - self.origin_lon).to_radians() * EARTH_RADIUS_M * self.cos_lat;
        (east, north)
    }
}
