//! Screen geometry and the pixel <-> visual-angle mapping.

use libm::{atan, tan};
use thiserror::Error;

const RAD_TO_DEG: f64 = 180.0 / core::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("screen geometry field `{0}` must be strictly positive")]
    NonPositive(&'static str),
    #[error("pixel pitch {0} cm is outside [0.005, 0.1] cm")]
    PixelPitch(f64),
}

/// A point in a 2-D coordinate frame (pixels or degrees, depending on context).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        libm::hypot(self.x - other.x, self.y - other.y)
    }
}

/// Physical description of the stimulus display.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScreenGeometry {
    pub width_px: u32,
    pub height_px: u32,
    pub width_cm: f64,
    pub height_cm: f64,
    pub viewing_distance_cm: f64,
}

impl Default for ScreenGeometry {
    /// 21-inch 4:3 panel at 60 cm.
    fn default() -> Self {
        Self {
            width_px: 1280,
            height_px: 1024,
            width_cm: 43.2,
            height_cm: 32.4,
            viewing_distance_cm: 60.0,
        }
    }
}

impl ScreenGeometry {
    pub fn validate(&self) -> Result<(), GeometryError> {
        if self.width_px == 0 {
            return Err(GeometryError::NonPositive("width_px"));
        }
        if self.height_px == 0 {
            return Err(GeometryError::NonPositive("height_px"));
        }
        for (name, v) in [
            ("width_cm", self.width_cm),
            ("height_cm", self.height_cm),
            ("viewing_distance_cm", self.viewing_distance_cm),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(GeometryError::NonPositive(name));
            }
        }
        let pitch = self.pitch_x_cm();
        if !(0.005..=0.1).contains(&pitch) {
            return Err(GeometryError::PixelPitch(pitch));
        }
        Ok(())
    }

    fn pitch_x_cm(&self) -> f64 {
        self.width_cm / self.width_px as f64
    }

    fn pitch_y_cm(&self) -> f64 {
        self.height_cm / self.height_px as f64
    }

    pub fn center_px(&self) -> Point {
        Point::new(self.width_px as f64 / 2.0, self.height_px as f64 / 2.0)
    }

    /// Whether `p` lies on the screen (edges inclusive).
    pub fn contains_px(&self, p: Point) -> bool {
        p.x >= 0.0 && p.y >= 0.0 && p.x <= self.width_px as f64 && p.y <= self.height_px as f64
    }

    /// Visual angle of a screen pixel relative to the screen centre. Right and
    /// down are positive.
    pub fn pixels_to_degrees(&self, p: Point) -> Point {
        let c = self.center_px();
        let dx_cm = (p.x - c.x) * self.pitch_x_cm();
        let dy_cm = (p.y - c.y) * self.pitch_y_cm();
        Point::new(
            atan(dx_cm / self.viewing_distance_cm) * RAD_TO_DEG,
            atan(dy_cm / self.viewing_distance_cm) * RAD_TO_DEG,
        )
    }

    /// Exact inverse of [`pixels_to_degrees`](Self::pixels_to_degrees).
    pub fn degrees_to_pixels(&self, d: Point) -> Point {
        let c = self.center_px();
        let dx_cm = tan(d.x / RAD_TO_DEG) * self.viewing_distance_cm;
        let dy_cm = tan(d.y / RAD_TO_DEG) * self.viewing_distance_cm;
        Point::new(c.x + dx_cm / self.pitch_x_cm(), c.y + dy_cm / self.pitch_y_cm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_geometry_is_valid() {
        ScreenGeometry::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_geometry() {
        let g = ScreenGeometry { viewing_distance_cm: 0.0, ..Default::default() };
        assert_eq!(g.validate(), Err(GeometryError::NonPositive("viewing_distance_cm")));
        let g = ScreenGeometry { width_cm: 400.0, ..Default::default() };
        assert!(matches!(g.validate(), Err(GeometryError::PixelPitch(_))));
    }

    #[test]
    fn centre_maps_to_origin() {
        let g = ScreenGeometry::default();
        let d = g.pixels_to_degrees(g.center_px());
        assert_eq!(d, Point::new(0.0, 0.0));
    }

    #[test]
    fn ten_cm_at_sixty_cm() {
        // 10 cm right of centre is 10 / 0.03375 px.
        let g = ScreenGeometry::default();
        let p = Point::new(640.0 + 10.0 / 0.03375, 512.0);
        let d = g.pixels_to_degrees(p);
        // atan(10/60) in degrees, evaluated independently.
        assert!((d.x - 9.462_322_208_025_617).abs() < 1e-9);
        assert!(d.y.abs() < 1e-12);
    }

    #[test]
    fn mirror_points_are_odd() {
        let g = ScreenGeometry::default();
        let a = g.pixels_to_degrees(Point::new(100.0, 900.0));
        let b = g.pixels_to_degrees(Point::new(1180.0, 124.0));
        assert!((a.x + b.x).abs() < 1e-12);
        assert!((a.y + b.y).abs() < 1e-12);
        assert!(a.x < 0.0 && a.y > 0.0);
    }
}
