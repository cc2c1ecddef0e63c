//! Planar geometry: points, deployment regions and uniform placement.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Side length of the square deployment field, in meters.
pub const FIELD_SIDE: f64 = 80.0;

/// Width of the back edge of the classroom trapezoid, chosen so that its
/// area is two thirds of the square field.
pub const CLASSROOM_BACK_EDGE: f64 = FIELD_SIDE / 3.0;

/// A position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        distance(*self, *other)
    }
}

/// Euclidean distance in meters.
pub fn distance(a: Point, b: Point) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionKind {
    /// 80 m x 80 m square.
    #[serde(rename = "rect80")]
    Rect80,
    /// Isosceles trapezoid, 80 m front edge at y = 0, 80/3 m back edge at y = 80.
    #[serde(rename = "classroom")]
    Classroom,
}

impl RegionKind {
    pub fn name(&self) -> &'static str {
        match self {
            RegionKind::Rect80 => "rect80",
            RegionKind::Classroom => "classroom",
        }
    }
}

impl std::str::FromStr for RegionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rect80" => Ok(RegionKind::Rect80),
            "classroom" => Ok(RegionKind::Classroom),
            other => Err(Error::UnknownRegion(other.to_string())),
        }
    }
}

/// Deployment area plus the location of the base station (the server).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub kind: RegionKind,
    pub base_station: Point,
}

impl Region {
    pub fn new(kind: RegionKind) -> Self {
        Self {
            kind,
            base_station: Point::new(FIELD_SIDE / 2.0, 0.0),
        }
    }

    pub fn rect80() -> Self {
        Self::new(RegionKind::Rect80)
    }

    pub fn classroom() -> Self {
        Self::new(RegionKind::Classroom)
    }

    /// Axis-aligned bounding box as `(min, max)`.
    pub fn bounds(&self) -> (Point, Point) {
        (Point::new(0.0, 0.0), Point::new(FIELD_SIDE, FIELD_SIDE))
    }

    pub fn area(&self) -> f64 {
        match self.kind {
            RegionKind::Rect80 => FIELD_SIDE * FIELD_SIDE,
            RegionKind::Classroom => (FIELD_SIDE + CLASSROOM_BACK_EDGE) / 2.0 * FIELD_SIDE,
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        let in_box = (0.0..=FIELD_SIDE).contains(&p.x) && (0.0..=FIELD_SIDE).contains(&p.y);
        match self.kind {
            RegionKind::Rect80 => in_box,
            RegionKind::Classroom => {
                // Each slanted side moves inward by (80 - 80/3) / 2 over the 80 m height.
                let inset = p.y * (FIELD_SIDE - CLASSROOM_BACK_EDGE) / (2.0 * FIELD_SIDE);
                in_box && p.x >= inset && p.x <= FIELD_SIDE - inset
            }
        }
    }

    /// One uniform point inside the region (rejection sampling in the bounding box).
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        loop {
            let p = Point::new(rng.gen_range(0.0..=FIELD_SIDE), rng.gen_range(0.0..=FIELD_SIDE));
            if self.contains(p) {
                return p;
            }
        }
    }
}

/// `n` points uniformly distributed over `region`.
pub fn sample_positions<R: Rng + ?Sized>(region: &Region, n: usize, rng: &mut R) -> Result<Vec<Point>> {
    if n == 0 {
        return Err(Error::InvalidValue("node count must be positive".into()));
    }
    Ok((0..n).map(|_| region.sample_point(rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn distance_examples() {
        assert_eq!(distance(Point::new(0.0, 0.0), Point::new(3.0, 4.0)), 5.0);
        assert_eq!(distance(Point::new(40.0, 0.0), Point::new(40.0, 0.0)), 0.0);
        let d = distance(Point::new(0.0, 0.0), Point::new(80.0, 80.0));
        assert!((d - 113.137_084_989_847_6).abs() < 1e-9);
    }

    #[test]
    fn classroom_is_two_thirds_of_square() {
        let rect = Region::rect80();
        let room = Region::classroom();
        let rel = (room.area() - rect.area() * 2.0 / 3.0).abs() / room.area();
        assert!(rel < 1e-6);
        assert!((room.area() - 4266.666666666667).abs() < 1e-6);
    }

    #[test]
    fn classroom_half_planes() {
        let room = Region::classroom();
        assert!(room.contains(Point::new(0.0, 0.0)));
        assert!(room.contains(Point::new(80.0, 0.0)));
        assert!(room.contains(Point::new(40.0, 80.0)));
        assert!(!room.contains(Point::new(1.0, 79.0)));
        assert!(!room.contains(Point::new(79.0, 79.0)));
        assert!(room.contains(Point::new(80.0 / 3.0, 80.0)));
    }

    #[test]
    fn sampled_points_are_contained_and_deterministic() {
        for region in [Region::rect80(), Region::classroom()] {
            let a = sample_positions(&region, 30, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
            let b = sample_positions(&region, 30, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.len(), 30);
            assert!(a.iter().all(|p| region.contains(*p)));
            assert!(a
                .iter()
                .all(|p| (0.0..=80.0).contains(&p.x) && (0.0..=80.0).contains(&p.y)));
        }
    }

    #[test]
    fn zero_nodes_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sample_positions(&Region::rect80(), 0, &mut rng).is_err());
    }

    #[test]
    fn classroom_is_front_heavy() {
        let room = Region::classroom();
        let pts = sample_positions(&room, 4000, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let front = pts.iter().filter(|p| p.y < 40.0).count();
        // Front half holds (80 + 53.3) / (2 * 106.7) = 62.5% of the area.
        assert!(front as f64 / 4000.0 > 0.58);
    }
}
