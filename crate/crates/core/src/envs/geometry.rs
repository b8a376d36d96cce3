//! Planar convex-polygon helpers for the Asteroids world.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, o: Point) -> f64 {
        ((self.x - o.x).powi(2) + (self.y - o.y).powi(2)).sqrt()
    }
}

/// Convex polygon with counterclockwise vertices. Face `i` runs from
/// vertex `i` to vertex `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    pub vertices: Vec<Point>,
}

impl ConvexPolygon {
    pub fn regular(center: Point, radius: f64, faces: usize, rotation_deg: f64) -> Self {
        assert!(faces >= 3, "a convex polygon needs at least 3 faces");
        let vertices = (0..faces)
            .map(|k| {
                let a = (rotation_deg + 360.0 * k as f64 / faces as f64).to_radians();
                Point::new(center.x + radius * a.cos(), center.y + radius * a.sin())
            })
            .collect();
        Self { vertices }
    }

    pub fn faces(&self) -> usize {
        self.vertices.len()
    }

    fn edge(&self, i: usize) -> (Point, Point) {
        let n = self.vertices.len();
        (self.vertices[i], self.vertices[(i + 1) % n])
    }

    pub fn face_midpoint(&self, i: usize) -> Point {
        let (a, b) = self.edge(i);
        Point::new(0.5 * (a.x + b.x), 0.5 * (a.y + b.y))
    }

    /// Unit outward normal of face `i`.
    pub fn face_normal(&self, i: usize) -> Point {
        let (a, b) = self.edge(i);
        let (dx, dy) = (b.x - a.x, b.y - a.y);
        let len = (dx * dx + dy * dy).sqrt();
        Point::new(dy / len, -dx / len)
    }

    /// Whether the segment `p -> q` passes through the open interior.
    ///
    /// Clips the segment against every edge's open half-plane; the segment
    /// touches the interior iff the surviving parameter interval has
    /// positive length. Grazing a vertex or running along an edge leaves a
    /// degenerate or empty interval and counts as unobstructed.
    pub fn segment_hits_interior(&self, p: Point, q: Point) -> bool {
        let d = Point::new(q.x - p.x, q.y - p.y);
        let mut lo = 0.0f64;
        let mut hi = 1.0f64;
        for i in 0..self.faces() {
            let (a, _) = self.edge(i);
            let n = self.face_normal(i);
            // inside iff n . (x - a) < 0
            let f0 = n.x * (p.x - a.x) + n.y * (p.y - a.y);
            let fd = n.x * d.x + n.y * d.y;
            if fd.abs() < 1e-15 {
                if f0 >= 0.0 {
                    return false;
                }
                continue;
            }
            let t = -f0 / fd;
            if fd > 0.0 {
                hi = hi.min(t);
            } else {
                lo = lo.max(t);
            }
            if lo >= hi {
                return false;
            }
        }
        hi - lo > 1e-12
    }

    /// Strict point-in-interior test.
    pub fn contains_strict(&self, p: Point) -> bool {
        (0..self.faces()).all(|i| {
            let (a, _) = self.edge(i);
            let n = self.face_normal(i);
            n.x * (p.x - a.x) + n.y * (p.y - a.y) < 0.0
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> ConvexPolygon {
        ConvexPolygon {
            vertices: vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(1.0, 1.0),
                Point::new(0.0, 1.0),
            ],
        }
    }

    #[test]
    fn normals_point_outward() {
        let s = square();
        let n0 = s.face_normal(0);
        assert!((n0.x).abs() < 1e-12 && (n0.y + 1.0).abs() < 1e-12);
        let m = s.face_midpoint(0);
        assert!(!s.contains_strict(Point::new(m.x + 0.1 * n0.x, m.y + 0.1 * n0.y)));
        assert!(s.contains_strict(Point::new(m.x - 0.1 * n0.x, m.y - 0.1 * n0.y)));
    }

    #[test]
    fn crossing_interior_between_own_faces() {
        let s = square();
        assert!(s.segment_hits_interior(Point::new(0.5, -0.2), Point::new(0.5, 1.2)));
    }

    #[test]
    fn empty_space_is_clear() {
        let s = square();
        assert!(!s.segment_hits_interior(Point::new(2.0, 0.0), Point::new(3.0, 5.0)));
    }

    #[test]
    fn vertex_graze_and_edge_slide_are_clear() {
        let s = square();
        assert!(!s.segment_hits_interior(Point::new(-1.0, 1.0), Point::new(1.0, -1.0)));
        assert!(!s.segment_hits_interior(Point::new(-1.0, 0.0), Point::new(2.0, 0.0)));
        assert!(!s.segment_hits_interior(Point::new(2.0, 0.0), Point::new(1.0, 1.0)));
    }

    #[test]
    fn endpoint_inside_counts() {
        let s = square();
        assert!(s.segment_hits_interior(Point::new(0.5, 0.5), Point::new(3.0, 3.0)));
    }
}
