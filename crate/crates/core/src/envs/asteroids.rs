//! Asteroids world at the option level.
//!
//! The ship always sits next to one asteroid face. Options teleport it to
//! the next face on the same asteroid or to the nearest visible face of
//! another asteroid, adding Gaussian landing noise. Moving from asteroid `a`
//! to asteroid `b > a` crashes with a fixed probability, which resets the
//! ship to the start face.
//!
//! State vector: `(x, y, heading)` with heading in degrees, equal to the
//! direction of the outward normal of the face the ship is parked at.

use std::collections::BTreeSet;

use rand_distr::{Distribution, Normal};

use super::geometry::{ConvexPolygon, Point};
use super::{check_option, sample_outcome, AbstractState, EnvError, Environment, GroundTruth, StepOutcome};
use crate::rng::RandomSource;
use crate::trace::{OptionId, StateVector};

pub const MOVE_COUNTERCLOCKWISE: OptionId = OptionId(0);
pub const MOVE_CLOCKWISE: OptionId = OptionId(1);

/// Option id of `move-to-asteroid-(index + 1)`.
pub fn move_to(index: usize) -> OptionId {
    OptionId(2 + index)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsteroidSpec {
    pub center: Point,
    pub radius: f64,
    pub faces: usize,
    pub rotation_deg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsteroidsConfig {
    pub asteroids: Vec<AsteroidSpec>,
    pub crash_prob: f64,
    /// Standard deviation of the landing position, world units.
    pub landing_noise: f64,
    /// Standard deviation of the landing heading, degrees.
    pub heading_noise: f64,
    /// Distance from the face midpoint at which the ship parks.
    pub standoff: f64,
    /// Face of asteroid 1 the ship starts at; `None` picks the face pointing
    /// most directly away from the other asteroids.
    pub start_face: Option<usize>,
}

fn spec(x: f64, y: f64, radius: f64, faces: usize, rotation_deg: f64) -> AsteroidSpec {
    AsteroidSpec {
        center: Point::new(x, y),
        radius,
        faces,
        rotation_deg,
    }
}

impl Default for AsteroidsConfig {
    /// Four asteroids with 10, 9, 8 and 8 faces (35 in total).
    fn default() -> Self {
        Self {
            asteroids: vec![
                spec(15.0, 32.0, 8.0, 10, 318.9),
                spec(42.0, 14.0, 7.0, 9, 82.9),
                spec(46.0, 48.0, 7.0, 8, 13.4),
                spec(76.0, 30.0, 7.5, 8, 2.9),
            ],
            crash_prob: 0.5,
            landing_noise: 0.3,
            heading_noise: 0.3,
            standoff: 1.0,
            start_face: None,
        }
    }
}

impl AsteroidsConfig {
    /// Smaller four-asteroid layout with 6, 5, 5 and 4 faces (20 in total).
    pub fn desk() -> Self {
        Self {
            asteroids: vec![
                spec(12.0, 28.0, 6.0, 6, 23.1),
                spec(34.0, 12.0, 5.5, 5, 131.0),
                spec(37.0, 42.0, 5.5, 5, 311.2),
                spec(60.0, 26.0, 5.5, 4, 24.6),
            ],
            ..Self::default()
        }
    }

    /// Two triangles facing each other; small enough to enumerate by hand.
    pub fn toy() -> Self {
        Self {
            asteroids: vec![spec(10.0, 10.0, 3.0, 3, 90.1), spec(30.0, 10.0, 3.0, 3, 150.0)],
            ..Self::default()
        }
    }

    pub fn total_faces(&self) -> usize {
        self.asteroids.iter().map(|a| a.faces).sum()
    }
}

#[derive(Debug, Clone)]
struct Face {
    asteroid: usize,
    local: usize,
    landing: Point,
    heading: f64,
}

#[derive(Debug, Clone)]
pub struct AsteroidsWorld {
    config: AsteroidsConfig,
    polygons: Vec<ConvexPolygon>,
    faces: Vec<Face>,
    /// First global face id of each asteroid.
    offsets: Vec<usize>,
    start_face: usize,
    /// `targets[face][b]`: landing face when moving to asteroid `b`.
    targets: Vec<Vec<Option<usize>>>,
    face: usize,
    state: StateVector,
}

impl AsteroidsWorld {
    pub fn new(config: AsteroidsConfig) -> Result<Self, EnvError> {
        if config.asteroids.is_empty() {
            return Err(EnvError::Layout("no asteroids".into()));
        }
        if !(0.0..=1.0).contains(&config.crash_prob) {
            return Err(EnvError::Layout(format!("crash probability {}", config.crash_prob)));
        }
        if config.asteroids.iter().any(|a| a.faces < 3) {
            return Err(EnvError::Layout("asteroids need at least 3 faces".into()));
        }
        let polygons: Vec<ConvexPolygon> = config
            .asteroids
            .iter()
            .map(|a| ConvexPolygon::regular(a.center, a.radius, a.faces, a.rotation_deg))
            .collect();
        let mut faces = Vec::new();
        let mut offsets = Vec::new();
        for (ai, poly) in polygons.iter().enumerate() {
            offsets.push(faces.len());
            for local in 0..poly.faces() {
                let m = poly.face_midpoint(local);
                let n = poly.face_normal(local);
                faces.push(Face {
                    asteroid: ai,
                    local,
                    landing: Point::new(m.x + config.standoff * n.x, m.y + config.standoff * n.y),
                    heading: n.y.atan2(n.x).to_degrees().rem_euclid(360.0),
                });
            }
        }
        for p in &polygons {
            for f in &faces {
                if p.contains_strict(f.landing) {
                    return Err(EnvError::Layout("a landing point lies inside an asteroid".into()));
                }
            }
        }
        let start_face = match config.start_face {
            Some(local) if local < polygons[0].faces() => local,
            Some(local) => return Err(EnvError::Layout(format!("start face {local} out of range"))),
            None => {
                // face of asteroid 1 whose normal points furthest from the rest
                let c0 = config.asteroids[0].center;
                let others: Vec<Point> = config.asteroids[1..].iter().map(|a| a.center).collect();
                let (mx, my) = if others.is_empty() {
                    (c0.x + 1.0, c0.y)
                } else {
                    let k = others.len() as f64;
                    (
                        others.iter().map(|p| p.x).sum::<f64>() / k,
                        others.iter().map(|p| p.y).sum::<f64>() / k,
                    )
                };
                let (dx, dy) = (mx - c0.x, my - c0.y);
                (0..polygons[0].faces())
                    .min_by(|&a, &b| {
                        let na = polygons[0].face_normal(a);
                        let nb = polygons[0].face_normal(b);
                        (na.x * dx + na.y * dy).total_cmp(&(nb.x * dx + nb.y * dy))
                    })
                    .unwrap()
            }
        };
        let mut world = Self {
            polygons,
            faces,
            offsets,
            start_face,
            targets: Vec::new(),
            face: start_face,
            state: StateVector(Vec::new()),
            config,
        };
        world.targets = (0..world.faces.len())
            .map(|f| (0..world.polygons.len()).map(|b| world.compute_target(f, b)).collect())
            .collect();
        world.state = world.nominal_state(start_face);
        Ok(world)
    }

    pub fn config(&self) -> &AsteroidsConfig {
        &self.config
    }

    pub fn num_asteroids(&self) -> usize {
        self.polygons.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn polygons(&self) -> &[ConvexPolygon] {
        &self.polygons
    }

    pub fn start_face(&self) -> usize {
        self.start_face
    }

    pub fn current_face(&self) -> usize {
        self.face
    }

    /// Park the ship exactly at `face`.
    pub fn place(&mut self, face: usize) {
        self.face = face;
        self.state = self.nominal_state(face);
    }

    pub fn asteroid_of_face(&self, face: usize) -> usize {
        self.faces[face].asteroid
    }

    pub fn face_landing(&self, face: usize) -> Point {
        self.faces[face].landing
    }

    /// True iff the straight segment touches no asteroid interior.
    pub fn is_unobstructed(&self, from: Point, to: Point) -> bool {
        !self.polygons.iter().any(|p| p.segment_hits_interior(from, to))
    }

    fn compute_target(&self, face: usize, b: usize) -> Option<usize> {
        if self.faces[face].asteroid == b {
            return None;
        }
        let from = self.faces[face].landing;
        let lo = self.offsets[b];
        let hi = lo + self.polygons[b].faces();
        (lo..hi)
            .filter(|&g| self.is_unobstructed(from, self.faces[g].landing))
            .min_by(|&g, &h| {
                from.dist(self.faces[g].landing)
                    .total_cmp(&from.dist(self.faces[h].landing))
                    .then(g.cmp(&h))
            })
    }

    fn neighbour(&self, face: usize, step: isize) -> usize {
        let f = &self.faces[face];
        let n = self.polygons[f.asteroid].faces() as isize;
        self.offsets[f.asteroid] + (f.local as isize + step).rem_euclid(n) as usize
    }

    fn nominal_state(&self, face: usize) -> StateVector {
        let f = &self.faces[face];
        StateVector(vec![f.landing.x, f.landing.y, f.heading])
    }

    fn noisy_state(&self, face: usize, rng: &mut RandomSource) -> StateVector {
        let f = &self.faces[face];
        let pos = Normal::new(0.0, self.config.landing_noise.max(0.0)).unwrap();
        let head = Normal::new(0.0, self.config.heading_noise.max(0.0)).unwrap();
        StateVector(vec![
            f.landing.x + pos.sample(rng),
            f.landing.y + pos.sample(rng),
            f.heading + head.sample(rng),
        ])
    }

    /// Face whose landing point is closest to the ship position in `s`.
    pub fn face_of(&self, s: &StateVector) -> usize {
        let p = Point::new(s.0[0], s.0[1]);
        (0..self.faces.len())
            .min_by(|&a, &b| {
                p.dist(self.faces[a].landing)
                    .total_cmp(&p.dist(self.faces[b].landing))
            })
            .unwrap()
    }

    fn options_at(&self, face: usize) -> Vec<OptionId> {
        let mut v = vec![MOVE_COUNTERCLOCKWISE, MOVE_CLOCKWISE];
        for b in 0..self.polygons.len() {
            if self.targets[face][b].is_some() {
                v.push(move_to(b));
            }
        }
        v
    }

    fn outcomes_at(&self, face: usize, o: OptionId) -> Vec<(usize, f64)> {
        match o.0 {
            0 => vec![(self.neighbour(face, 1), 1.0)],
            1 => vec![(self.neighbour(face, -1), 1.0)],
            k => {
                let b = k - 2;
                let Some(target) = self.targets.get(face).and_then(|t| t.get(b).copied().flatten()) else {
                    return Vec::new();
                };
                let crash = self.config.crash_prob;
                if b > self.faces[face].asteroid && crash > 0.0 {
                    if crash >= 1.0 {
                        vec![(self.start_face, 1.0)]
                    } else {
                        vec![(target, 1.0 - crash), (self.start_face, crash)]
                    }
                } else {
                    vec![(target, 1.0)]
                }
            }
        }
    }
}

impl Environment for AsteroidsWorld {
    fn num_options(&self) -> usize {
        2 + self.polygons.len()
    }

    fn option_name(&self, o: OptionId) -> String {
        match o.0 {
            0 => "move-counterclockwise".into(),
            1 => "move-clockwise".into(),
            k => format!("move-to-asteroid-{}", k - 1),
        }
    }

    fn dim(&self) -> usize {
        3
    }

    fn state(&self) -> &StateVector {
        &self.state
    }

    fn reset(&mut self, rng: &mut RandomSource) -> StateVector {
        self.face = self.start_face;
        self.state = self.noisy_state(self.start_face, rng);
        self.state.clone()
    }

    fn available_options(&self, s: &StateVector) -> BTreeSet<OptionId> {
        self.options_at(self.face_of(s)).into_iter().collect()
    }

    fn execute_option(&mut self, o: OptionId, rng: &mut RandomSource) -> Result<StepOutcome, EnvError> {
        check_option(o, self.num_options())?;
        if !self.options_at(self.face).contains(&o) {
            return Err(EnvError::Unavailable { option: o });
        }
        let outcomes = self.outcomes_at(self.face, o);
        let next = *sample_outcome(&outcomes, rng);
        let crashed = o.0 >= 2 && outcomes.len() == 2 && next == outcomes[1].0;
        self.face = next;
        self.state = self.noisy_state(next, rng);
        Ok(StepOutcome {
            state: self.state.clone(),
            reset: crashed,
        })
    }
}

impl GroundTruth for AsteroidsWorld {
    fn component_names(&self) -> Vec<&'static str> {
        vec!["face"]
    }

    fn abstract_state(&self, s: &StateVector) -> AbstractState {
        vec![self.face_of(s) as u32]
    }

    fn abstract_start(&self) -> AbstractState {
        vec![self.start_face as u32]
    }

    fn abstract_available(&self, a: &AbstractState) -> Vec<OptionId> {
        self.options_at(a[0] as usize)
    }

    fn abstract_outcomes(&self, a: &AbstractState, o: OptionId) -> Vec<(AbstractState, f64)> {
        self.outcomes_at(a[0] as usize, o)
            .into_iter()
            .map(|(f, p)| (vec![f as u32], p))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn world() -> AsteroidsWorld {
        AsteroidsWorld::new(AsteroidsConfig::default()).unwrap()
    }

    #[test]
    fn layouts_have_expected_face_counts() {
        assert_eq!(world().num_faces(), 35);
        assert_eq!(AsteroidsWorld::new(AsteroidsConfig::desk()).unwrap().num_faces(), 20);
        assert_eq!(AsteroidsWorld::new(AsteroidsConfig::toy()).unwrap().num_faces(), 6);
    }

    #[test]
    fn headings_are_well_separated() {
        for cfg in [AsteroidsConfig::default(), AsteroidsConfig::desk()] {
            let w = AsteroidsWorld::new(cfg).unwrap();
            let mut h: Vec<f64> = w.faces.iter().map(|f| f.heading).collect();
            h.sort_by(f64::total_cmp);
            for pair in h.windows(2) {
                assert!(pair[1] - pair[0] > 1.9, "{pair:?}");
            }
            assert!(h[0] > 5.0 && h[h.len() - 1] < 355.0);
        }
    }

    #[test]
    fn reset_lands_next_to_asteroid_one() {
        let mut w = world();
        let mut rng = RandomSource::new(1);
        let s = w.reset(&mut rng);
        let f = w.face_of(&s);
        assert_eq!(w.asteroid_of_face(f), 0);
        assert!(Point::new(s.0[0], s.0[1]).dist(w.face_landing(f)) < 5.0 * 0.3);
        let mut w2 = world();
        assert_eq!(w2.reset(&mut RandomSource::new(1)), s);
    }

    #[test]
    fn availability_at_second_asteroid() {
        let w = world();
        let face = w.offsets[1];
        let s = w.nominal_state(face);
        let opts = w.available_options(&s);
        assert!(opts.contains(&MOVE_CLOCKWISE));
        assert!(opts.contains(&MOVE_COUNTERCLOCKWISE));
        assert!(!opts.contains(&move_to(1)));
    }

    #[test]
    fn every_asteroid_is_reachable() {
        for cfg in [AsteroidsConfig::default(), AsteroidsConfig::desk()] {
            let w = AsteroidsWorld::new(cfg).unwrap();
            for b in 0..w.num_asteroids() {
                assert!(
                    (0..w.num_faces()).any(|f| w.targets[f][b].is_some()),
                    "asteroid {b} unreachable"
                );
            }
        }
    }

    #[test]
    fn rotation_moves_to_adjacent_face() {
        let mut w = world();
        let mut rng = RandomSource::new(2);
        w.reset(&mut rng);
        let f0 = w.current_face();
        w.execute_option(MOVE_COUNTERCLOCKWISE, &mut rng).unwrap();
        assert_eq!(w.current_face(), w.neighbour(f0, 1));
        w.execute_option(MOVE_CLOCKWISE, &mut rng).unwrap();
        assert_eq!(w.current_face(), f0);
    }

    #[test]
    fn unavailable_option_is_rejected() {
        let mut w = world();
        let mut rng = RandomSource::new(3);
        w.reset(&mut rng);
        assert_eq!(
            w.execute_option(move_to(0), &mut rng),
            Err(EnvError::Unavailable { option: move_to(0) })
        );
        assert!(matches!(
            w.execute_option(OptionId(99), &mut rng),
            Err(EnvError::UnknownOption { .. })
        ));
    }

    #[test]
    fn outcomes_land_near_a_face() {
        let mut w = AsteroidsWorld::new(AsteroidsConfig::desk()).unwrap();
        let mut rng = RandomSource::new(4);
        w.reset(&mut rng);
        for _ in 0..2000 {
            let opts: Vec<OptionId> = w.current_options().into_iter().collect();
            let o = *rng.choose(&opts).unwrap();
            let out = w.execute_option(o, &mut rng).unwrap();
            let f = w.face_of(&out.state);
            assert_eq!(f, w.current_face());
            let d = Point::new(out.state.0[0], out.state.0[1]).dist(w.face_landing(f));
            assert!(d < 6.0 * 0.3, "{d}");
        }
    }
}
