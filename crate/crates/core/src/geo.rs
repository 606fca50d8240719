//! Longitude/latitude conversion for trajectories on the unit sphere `S^2`.

use crate::error::{Error, Result};
use crate::manifold::Point;

/// `[cos(lat) cos(lon), cos(lat) sin(lon), sin(lat)]`, angles in degrees.
pub fn lonlat_to_s2(longitude: f64, latitude: f64) -> Result<Point> {
    if !(-90.0..=90.0).contains(&latitude) {
        return Err(Error::LatitudeOutOfRange(latitude));
    }
    let (slon, clon) = longitude.to_radians().sin_cos();
    let (slat, clat) = latitude.to_radians().sin_cos();
    Ok(Point::new(vec![clat * clon, clat * slon, slat]))
}

/// Inverse of [`lonlat_to_s2`]; longitude in `(-180, 180]`, latitude in `[-90, 90]`.
pub fn s2_to_lonlat(x: &[f64]) -> (f64, f64) {
    let lon = x[1].atan2(x[0]).to_degrees();
    let lat = x[2].atan2(x[0].hypot(x[1])).to_degrees();
    (lon, lat)
}
