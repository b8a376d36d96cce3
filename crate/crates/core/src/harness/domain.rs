use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::envs::{
    AbstractState, AsteroidsConfig, AsteroidsWorld, EnvError, Environment, GroundTruth, KeyState, StepOutcome,
    TreasureState, TreasureWorld,
};
use crate::rng::RandomSource;
use crate::trace::{OptionId, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DomainKind {
    Asteroids,
    Treasure,
}

impl DomainKind {
    pub fn name(self) -> &'static str {
        match self {
            DomainKind::Asteroids => "asteroids",
            DomainKind::Treasure => "treasure",
        }
    }
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DomainKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "asteroids" => Ok(DomainKind::Asteroids),
            "treasure" => Ok(DomainKind::Treasure),
            _ => Err(format!("unknown domain {s:?} (expected asteroids or treasure)")),
        }
    }
}

/// Built-in Asteroids layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AsteroidsLayout {
    /// 35 faces.
    Full,
    /// 20 faces.
    Desk,
    /// Two triangles.
    Toy,
}

impl AsteroidsLayout {
    pub fn name(self) -> &'static str {
        match self {
            AsteroidsLayout::Full => "full",
            AsteroidsLayout::Desk => "desk",
            AsteroidsLayout::Toy => "toy",
        }
    }

    pub fn config(self) -> AsteroidsConfig {
        match self {
            AsteroidsLayout::Full => AsteroidsConfig::default(),
            AsteroidsLayout::Desk => AsteroidsConfig::desk(),
            AsteroidsLayout::Toy => AsteroidsConfig::toy(),
        }
    }
}

impl fmt::Display for AsteroidsLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AsteroidsLayout {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(AsteroidsLayout::Full),
            "desk" => Ok(AsteroidsLayout::Desk),
            "toy" => Ok(AsteroidsLayout::Toy),
            _ => Err(format!("unknown layout {s:?} (expected full, desk or toy)")),
        }
    }
}

/// Either world behind one type, so the harness can stay non-generic.
#[derive(Debug, Clone)]
pub enum Domain {
    Asteroids(AsteroidsWorld),
    Treasure(TreasureWorld),
}

macro_rules! delegate {
    ($self:ident, $w:ident => $e:expr) => {
        match $self {
            Domain::Asteroids($w) => $e,
            Domain::Treasure($w) => $e,
        }
    };
}

impl Domain {
    pub fn kind(&self) -> DomainKind {
        match self {
            Domain::Asteroids(_) => DomainKind::Asteroids,
            Domain::Treasure(_) => DomainKind::Treasure,
        }
    }

    /// Grid cell of a state for visit heatmaps: whole world units for
    /// Asteroids, tiles for Treasure.
    pub fn heatmap_cell(&self, s: &StateVector) -> (i64, i64) {
        match self {
            Domain::Asteroids(_) => (s.0[0].floor() as i64, s.0[1].floor() as i64),
            Domain::Treasure(w) => {
                let d = w.decode(s);
                (d.col as i64, d.row as i64)
            }
        }
    }

    pub fn num_asteroids(&self) -> usize {
        match self {
            Domain::Asteroids(w) => w.num_asteroids(),
            Domain::Treasure(_) => 0,
        }
    }

    /// Asteroid index of an abstract Asteroids state.
    pub fn asteroid_of(&self, a: &AbstractState) -> Option<usize> {
        match self {
            Domain::Asteroids(w) => Some(w.asteroid_of_face(a[0] as usize)),
            Domain::Treasure(_) => None,
        }
    }

    pub fn key_obtained(before: &AbstractState, after: &AbstractState) -> bool {
        let (b, a) = (TreasureState::from_abstract(before), TreasureState::from_abstract(after));
        b.key == KeyState::Ledge && a.key == KeyState::Held
    }

    pub fn treasure_obtained(before: &AbstractState, after: &AbstractState) -> bool {
        !TreasureState::from_abstract(before).treasure_held && TreasureState::from_abstract(after).treasure_held
    }
}

impl Environment for Domain {
    fn num_options(&self) -> usize {
        delegate!(self, w => w.num_options())
    }

    fn option_name(&self, o: OptionId) -> String {
        delegate!(self, w => w.option_name(o))
    }

    fn dim(&self) -> usize {
        delegate!(self, w => w.dim())
    }

    fn state(&self) -> &StateVector {
        delegate!(self, w => w.state())
    }

    fn reset(&mut self, rng: &mut RandomSource) -> StateVector {
        delegate!(self, w => w.reset(rng))
    }

    fn available_options(&self, s: &StateVector) -> BTreeSet<OptionId> {
        delegate!(self, w => w.available_options(s))
    }

    fn execute_option(&mut self, o: OptionId, rng: &mut RandomSource) -> Result<StepOutcome, EnvError> {
        delegate!(self, w => w.execute_option(o, rng))
    }
}

impl GroundTruth for Domain {
    fn component_names(&self) -> Vec<&'static str> {
        delegate!(self, w => w.component_names())
    }

    fn abstract_state(&self, s: &StateVector) -> AbstractState {
        delegate!(self, w => w.abstract_state(s))
    }

    fn abstract_start(&self) -> AbstractState {
        delegate!(self, w => w.abstract_start())
    }

    fn abstract_available(&self, a: &AbstractState) -> Vec<OptionId> {
        delegate!(self, w => w.abstract_available(a))
    }

    fn abstract_outcomes(&self, a: &AbstractState, o: OptionId) -> Vec<(AbstractState, f64)> {
        delegate!(self, w => w.abstract_outcomes(a, o))
    }
}

impl From<AsteroidsWorld> for Domain {
    fn from(w: AsteroidsWorld) -> Self {
        Domain::Asteroids(w)
    }
}

impl From<TreasureWorld> for Domain {
    fn from(w: TreasureWorld) -> Self {
        Domain::Treasure(w)
    }
}
