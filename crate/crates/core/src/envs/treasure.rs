//! Treasure Game at the option level on a tile map.
//!
//! Tiles are 48 px. Map legend:
//!
//! ```text
//! #  wall            H  ladder          S  top ladder (start, reset on return)
//! 1  handle 1        2  handle 2        K  key ledge
//! L  lock            T  treasure        a  door open iff handles agree
//! b  door open iff handles differ       c  door open once unlocked
//! ```
//!
//! State vector (all entries in `[0, 1]`): agent x, agent y, key x, key y,
//! treasure x, treasure y, handle 1 angle, handle 2 angle, lock.
//! Positions are pixels divided by the world size.

use std::collections::BTreeSet;

use super::{check_option, sample_outcome, AbstractState, EnvError, Environment, GroundTruth, StepOutcome};
use crate::rng::RandomSource;
use crate::trace::{OptionId, StateVector};

pub const GO_LEFT: OptionId = OptionId(0);
pub const GO_RIGHT: OptionId = OptionId(1);
pub const UP_LADDER: OptionId = OptionId(2);
pub const DOWN_LADDER: OptionId = OptionId(3);
pub const JUMP_LEFT: OptionId = OptionId(4);
pub const JUMP_RIGHT: OptionId = OptionId(5);
pub const DOWN_RIGHT: OptionId = OptionId(6);
pub const DOWN_LEFT: OptionId = OptionId(7);
pub const INTERACT: OptionId = OptionId(8);

const OPTION_NAMES: [&str; 9] = [
    "go-left",
    "go-right",
    "up-ladder",
    "down-ladder",
    "jump-left",
    "jump-right",
    "down-right",
    "down-left",
    "interact",
];

pub const TILE_PX: f64 = 48.0;
const HANDLE_ANGLES: [f64; 2] = [0.25, 0.75];
const KEY_HELD_PX: (f64, f64) = (504.0, 516.0);
const KEY_USED_PX: (f64, f64) = (0.0, 0.0);
const TREASURE_HELD_PX: (f64, f64) = (456.0, 516.0);

pub const DEFAULT_MAP: [&str; 11] = [
    "###########",
    "#####S#####",
    "#####H#####",
    "#..#1H....#",
    "#...#####H#",
    "#K..b.2..H#",
    "##.H###H###",
    "#..H#..Ha.#",
    "#########H#",
    "####TcL..H#",
    "###########",
];

#[derive(Debug, Clone, PartialEq)]
pub struct TreasureConfig {
    pub rows: Vec<String>,
    pub flip_prob: f64,
    pub jump_prob: f64,
    /// Half-width of the uniform positional jitter after a move, pixels.
    pub jitter_px: f64,
}

impl Default for TreasureConfig {
    fn default() -> Self {
        Self {
            rows: DEFAULT_MAP.iter().map(|r| r.to_string()).collect(),
            flip_prob: 0.8,
            jump_prob: 0.53,
            jitter_px: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum KeyState {
    Ledge = 0,
    Held = 1,
    Used = 2,
}

/// Discrete world state; equal to the ground-truth abstract state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TreasureState {
    pub row: usize,
    pub col: usize,
    pub handle1: bool,
    pub handle2: bool,
    pub key: KeyState,
    pub locked: bool,
    pub treasure_held: bool,
}

impl TreasureState {
    pub fn to_abstract(&self) -> AbstractState {
        vec![
            self.col as u32,
            self.row as u32,
            self.handle1 as u32,
            self.handle2 as u32,
            self.key as u32,
            self.locked as u32,
            self.treasure_held as u32,
        ]
    }

    pub fn from_abstract(a: &AbstractState) -> Self {
        Self {
            col: a[0] as usize,
            row: a[1] as usize,
            handle1: a[2] != 0,
            handle2: a[3] != 0,
            key: match a[4] {
                0 => KeyState::Ledge,
                1 => KeyState::Held,
                _ => KeyState::Used,
            },
            locked: a[5] != 0,
            treasure_held: a[6] != 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TreasureWorld {
    config: TreasureConfig,
    grid: Vec<Vec<u8>>,
    rows: usize,
    cols: usize,
    world_px: f64,
    start: (usize, usize),
    key_cell: (usize, usize),
    treasure_cell: (usize, usize),
    current: TreasureState,
    state: StateVector,
}

fn find_unique(grid: &[Vec<u8>], ch: u8) -> Result<(usize, usize), EnvError> {
    let hits: Vec<(usize, usize)> = grid
        .iter()
        .enumerate()
        .flat_map(|(r, row)| row.iter().enumerate().filter(|(_, &c)| c == ch).map(move |(c, _)| (r, c)))
        .collect();
    match hits.as_slice() {
        [one] => Ok(*one),
        _ => Err(EnvError::Layout(format!(
            "map needs exactly one '{}' tile, found {}",
            ch as char,
            hits.len()
        ))),
    }
}

impl TreasureWorld {
    pub fn new(config: TreasureConfig) -> Result<Self, EnvError> {
        let grid: Vec<Vec<u8>> = config.rows.iter().map(|r| r.as_bytes().to_vec()).collect();
        let rows = grid.len();
        let cols = grid.first().map_or(0, |r| r.len());
        if rows < 3 || cols < 3 || grid.iter().any(|r| r.len() != cols) {
            return Err(EnvError::Layout("map rows must be non-empty and equally long".into()));
        }
        if let Some(bad) = grid.iter().flatten().find(|c| !b"#.HS12KLTabc".contains(c)) {
            return Err(EnvError::Layout(format!("unknown map tile '{}'", *bad as char)));
        }
        for ch in b"S12KLTabc" {
            find_unique(&grid, *ch)?;
        }
        for p in [config.flip_prob, config.jump_prob] {
            if !(0.0..=1.0).contains(&p) {
                return Err(EnvError::Layout(format!("probability {p} outside [0, 1]")));
            }
        }
        let start = find_unique(&grid, b'S')?;
        let key_cell = find_unique(&grid, b'K')?;
        let treasure_cell = find_unique(&grid, b'T')?;
        let initial = TreasureState {
            row: start.0,
            col: start.1,
            handle1: false,
            handle2: false,
            key: KeyState::Ledge,
            locked: true,
            treasure_held: false,
        };
        let mut world = Self {
            world_px: rows.max(cols) as f64 * TILE_PX,
            config,
            grid,
            rows,
            cols,
            start,
            key_cell,
            treasure_cell,
            current: initial,
            state: StateVector(Vec::new()),
        };
        world.state = world.nominal_state(&initial);
        Ok(world)
    }

    pub fn config(&self) -> &TreasureConfig {
        &self.config
    }

    pub fn world_px(&self) -> f64 {
        self.world_px
    }

    pub fn initial(&self) -> TreasureState {
        TreasureState {
            row: self.start.0,
            col: self.start.1,
            handle1: false,
            handle2: false,
            key: KeyState::Ledge,
            locked: true,
            treasure_held: false,
        }
    }

    pub fn current(&self) -> TreasureState {
        self.current
    }

    /// Put the world into `d` with the agent exactly at its tile centre.
    pub fn place(&mut self, d: TreasureState) {
        self.current = d;
        self.state = self.nominal_state(&d);
    }

    pub fn tile(&self, row: usize, col: usize) -> u8 {
        self.grid[row][col]
    }

    fn cell(&self, r: isize, c: isize) -> Option<u8> {
        if r < 0 || c < 0 || r as usize >= self.rows || c as usize >= self.cols {
            None
        } else {
            Some(self.grid[r as usize][c as usize])
        }
    }

    fn door_open(d: &TreasureState, tile: u8) -> bool {
        match tile {
            b'a' => d.handle1 == d.handle2,
            b'b' => d.handle1 != d.handle2,
            b'c' => !d.locked,
            _ => true,
        }
    }

    fn passable(&self, d: &TreasureState, r: isize, c: isize) -> bool {
        match self.cell(r, c) {
            None | Some(b'#') => false,
            Some(t) => Self::door_open(d, t),
        }
    }

    fn supported(&self, d: &TreasureState, r: isize, c: isize) -> bool {
        match self.cell(r + 1, c) {
            None | Some(b'#') | Some(b'H') => true,
            Some(t) => !Self::door_open(d, t),
        }
    }

    fn is_ladder(&self, r: isize, c: isize) -> bool {
        matches!(self.cell(r, c), Some(b'H'))
    }

    /// Cells where a continuous walk comes to rest.
    fn stops_walk(&self, d: &TreasureState, r: isize, c: isize) -> bool {
        match self.cell(r, c) {
            Some(b'H' | b'1' | b'2' | b'L') => true,
            Some(b'T') => !d.treasure_held,
            Some(b'K') => d.key == KeyState::Ledge,
            _ => self.is_ladder(r + 1, c),
        }
    }

    fn fall(&self, d: &TreasureState, r: isize, c: isize) -> (isize, isize) {
        let mut r = r;
        while !self.supported(d, r, c) {
            r += 1;
        }
        (r, c)
    }

    /// State after the agent ends up in `(r, c)`: picks up items and resets
    /// the world on the start ladder.
    fn arrive(&self, d: &TreasureState, r: isize, c: isize) -> TreasureState {
        let (r, c) = (r as usize, c as usize);
        if (r, c) == self.start {
            return self.initial();
        }
        let mut next = TreasureState { row: r, col: c, ..*d };
        if (r, c) == self.key_cell && next.key == KeyState::Ledge {
            next.key = KeyState::Held;
        }
        if (r, c) == self.treasure_cell {
            next.treasure_held = true;
        }
        next
    }

    fn two(a: TreasureState, b: TreasureState, p: f64) -> Vec<(TreasureState, f64)> {
        if a == b || p >= 1.0 {
            vec![(a, 1.0)]
        } else if p <= 0.0 {
            vec![(b, 1.0)]
        } else {
            vec![(a, p), (b, 1.0 - p)]
        }
    }

    /// Outcome distribution of `o` from `d`; empty iff `o` is unavailable.
    pub fn outcomes(&self, d: &TreasureState, o: OptionId) -> Vec<(TreasureState, f64)> {
        let (r, c) = (d.row as isize, d.col as isize);
        let one = |(r, c): (isize, isize)| vec![(self.arrive(d, r, c), 1.0)];
        match o {
            GO_LEFT | GO_RIGHT => {
                let dx = if o == GO_LEFT { -1 } else { 1 };
                let step_ok = |c: isize| self.passable(d, r, c) && self.supported(d, r, c);
                if !step_ok(c + dx) {
                    return Vec::new();
                }
                let mut cc = c + dx;
                while !self.stops_walk(d, r, cc) && step_ok(cc + dx) {
                    cc += dx;
                }
                one((r, cc))
            }
            UP_LADDER => {
                if !(self.is_ladder(r, c) && self.is_ladder(r - 1, c)) {
                    return Vec::new();
                }
                let mut top = r - 1;
                while self.is_ladder(top - 1, c) {
                    top -= 1;
                }
                if !self.passable(d, top - 1, c) {
                    return Vec::new();
                }
                one((top - 1, c))
            }
            DOWN_LADDER => {
                if !self.is_ladder(r + 1, c) {
                    return Vec::new();
                }
                let mut bottom = r + 1;
                while self.is_ladder(bottom + 1, c) {
                    bottom += 1;
                }
                one((bottom, c))
            }
            DOWN_LEFT | DOWN_RIGHT => {
                let dx = if o == DOWN_LEFT { -1 } else { 1 };
                if !self.passable(d, r, c + dx) || self.supported(d, r, c + dx) {
                    return Vec::new();
                }
                one(self.fall(d, r, c + dx))
            }
            JUMP_LEFT | JUMP_RIGHT => {
                let dx = if o == JUMP_LEFT { -1 } else { 1 };
                let clear = |r: isize, c: isize| self.passable(d, r, c) && !self.is_ladder(r, c);
                if !(clear(r - 1, c) && clear(r - 1, c + dx)) {
                    return Vec::new();
                }
                let far = (r, c + 2 * dx);
                let gap_below = self.passable(d, r, c + dx) && !self.supported(d, r, c + dx);
                if self.cell(far.0, far.1) == Some(b'K') && gap_below {
                    let hit = self.arrive(d, far.0, far.1);
                    let (fr, fc) = self.fall(d, r, c + dx);
                    let miss = self.arrive(d, fr, fc);
                    return Self::two(hit, miss, self.config.jump_prob);
                }
                let (lr, lc) = if self.supported(d, r - 1, c + dx) {
                    (r - 1, c + dx)
                } else {
                    self.fall(d, r - 1, c + dx)
                };
                one((lr, lc))
            }
            INTERACT => match self.grid[d.row][d.col] {
                b'1' => {
                    let flipped = TreasureState { handle1: !d.handle1, ..*d };
                    Self::two(flipped, *d, self.config.flip_prob)
                }
                b'2' => {
                    let flipped = TreasureState { handle2: !d.handle2, ..*d };
                    Self::two(flipped, *d, self.config.flip_prob)
                }
                b'L' if d.key == KeyState::Held && d.locked => vec![(
                    TreasureState {
                        key: KeyState::Used,
                        locked: false,
                        ..*d
                    },
                    1.0,
                )],
                _ => Vec::new(),
            },
            _ => Vec::new(),
        }
    }

    pub fn available_at(&self, d: &TreasureState) -> Vec<OptionId> {
        (0..OPTION_NAMES.len())
            .map(OptionId)
            .filter(|&o| !self.outcomes(d, o).is_empty())
            .collect()
    }

    fn tile_center_px(&self, row: usize, col: usize) -> (f64, f64) {
        (col as f64 * TILE_PX + TILE_PX / 2.0, row as f64 * TILE_PX + TILE_PX / 2.0)
    }

    /// State vector with the agent exactly at its tile centre.
    pub fn nominal_state(&self, d: &TreasureState) -> StateVector {
        let w = self.world_px;
        let agent = self.tile_center_px(d.row, d.col);
        let key = match d.key {
            KeyState::Ledge => self.tile_center_px(self.key_cell.0, self.key_cell.1),
            KeyState::Held => KEY_HELD_PX,
            KeyState::Used => KEY_USED_PX,
        };
        let treasure = if d.treasure_held {
            TREASURE_HELD_PX
        } else {
            self.tile_center_px(self.treasure_cell.0, self.treasure_cell.1)
        };
        StateVector(vec![
            agent.0 / w,
            agent.1 / w,
            key.0 / w,
            key.1 / w,
            treasure.0 / w,
            treasure.1 / w,
            HANDLE_ANGLES[d.handle1 as usize],
            HANDLE_ANGLES[d.handle2 as usize],
            if d.locked { 1.0 } else { 0.0 },
        ])
    }

    fn jittered_state(&self, d: &TreasureState, rng: &mut RandomSource) -> StateVector {
        let mut s = self.nominal_state(d);
        let j = self.config.jitter_px;
        for v in &mut s.0[..2] {
            *v += (2.0 * rng.uniform() - 1.0) * j / self.world_px;
        }
        s
    }

    /// Discrete state behind a state vector.
    pub fn decode(&self, s: &StateVector) -> TreasureState {
        let v = &s.0;
        let w = self.world_px;
        let tile = |p: f64, n: usize| ((p * w / TILE_PX).floor().max(0.0) as usize).min(n - 1);
        let near = |x: f64, y: f64, p: (f64, f64)| (x * w - p.0).hypot(y * w - p.1);
        let ledge = self.tile_center_px(self.key_cell.0, self.key_cell.1);
        let dk = [
            near(v[2], v[3], ledge),
            near(v[2], v[3], KEY_HELD_PX),
            near(v[2], v[3], KEY_USED_PX),
        ];
        let key = if dk[0] <= dk[1] && dk[0] <= dk[2] {
            KeyState::Ledge
        } else if dk[1] <= dk[2] {
            KeyState::Held
        } else {
            KeyState::Used
        };
        let on_map = self.tile_center_px(self.treasure_cell.0, self.treasure_cell.1);
        TreasureState {
            col: tile(v[0], self.cols),
            row: tile(v[1], self.rows),
            handle1: v[6] > 0.5,
            handle2: v[7] > 0.5,
            key,
            locked: v[8] > 0.5,
            treasure_held: near(v[4], v[5], TREASURE_HELD_PX) < near(v[4], v[5], on_map),
        }
    }
}

impl Environment for TreasureWorld {
    fn num_options(&self) -> usize {
        OPTION_NAMES.len()
    }

    fn option_name(&self, o: OptionId) -> String {
        OPTION_NAMES.get(o.0).map_or_else(|| o.to_string(), |s| s.to_string())
    }

    fn dim(&self) -> usize {
        9
    }

    fn state(&self) -> &StateVector {
        &self.state
    }

    fn reset(&mut self, rng: &mut RandomSource) -> StateVector {
        self.current = self.initial();
        self.state = self.jittered_state(&self.current, rng);
        self.state.clone()
    }

    fn available_options(&self, s: &StateVector) -> BTreeSet<OptionId> {
        self.available_at(&self.decode(s)).into_iter().collect()
    }

    fn execute_option(&mut self, o: OptionId, rng: &mut RandomSource) -> Result<StepOutcome, EnvError> {
        check_option(o, self.num_options())?;
        let outcomes = self.outcomes(&self.current, o);
        if outcomes.is_empty() {
            return Err(EnvError::Unavailable { option: o });
        }
        let next = *sample_outcome(&outcomes, rng);
        let moved = (next.row, next.col) != (self.current.row, self.current.col);
        let mut s = if moved {
            self.jittered_state(&next, rng)
        } else {
            self.nominal_state(&next)
        };
        if !moved {
            s.0[0] = self.state.0[0];
            s.0[1] = self.state.0[1];
        }
        self.current = next;
        self.state = s;
        Ok(StepOutcome {
            state: self.state.clone(),
            reset: (next.row, next.col) == self.start,
        })
    }
}

impl GroundTruth for TreasureWorld {
    fn component_names(&self) -> Vec<&'static str> {
        vec!["agent-col", "agent-row", "handle1", "handle2", "key", "lock", "treasure"]
    }

    fn abstract_state(&self, s: &StateVector) -> AbstractState {
        self.decode(s).to_abstract()
    }

    fn abstract_start(&self) -> AbstractState {
        self.initial().to_abstract()
    }

    fn abstract_available(&self, a: &AbstractState) -> Vec<OptionId> {
        self.available_at(&TreasureState::from_abstract(a))
    }

    fn abstract_outcomes(&self, a: &AbstractState, o: OptionId) -> Vec<(AbstractState, f64)> {
        self.outcomes(&TreasureState::from_abstract(a), o)
            .into_iter()
            .map(|(d, p)| (d.to_abstract(), p))
            .collect()
    }
}
