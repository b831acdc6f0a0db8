//! MiniCleanup: a small gridworld version of the Cleanup social dilemma.
//!
//! The grid has a river strip on the left, an orchard on the right and open
//! ground between. Waste accumulates in the river; apples grow in the orchard
//! at a rate that falls linearly to zero as the river's pollution rises.
//! Eating an apple pays +1, cleaning pays nothing.
//!
//! Agents observe a compact feature tuple instead of pixels: their zone, a
//! pollution bucket, and the direction of the nearest apple and nearest waste
//! within sight.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{EnvDescriptor, Environment, JointStep};
use crate::error::{Error, Result};

pub const NUM_ACTIONS: usize = 6;
const NUM_ZONES: usize = 3;
const NUM_POLLUTION_BUCKETS: usize = 5;
const NUM_DIRECTIONS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    North,
    South,
    East,
    West,
    Stay,
    Clean,
}

impl Action {
    pub const ALL: [Action; NUM_ACTIONS] = [
        Action::North,
        Action::South,
        Action::East,
        Action::West,
        Action::Stay,
        Action::Clean,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Action> {
        Action::ALL.get(i).copied()
    }

    fn offset(self) -> Option<(isize, isize)> {
        match self {
            Action::North => Some((0, -1)),
            Action::South => Some((0, 1)),
            Action::East => Some((1, 0)),
            Action::West => Some((-1, 0)),
            Action::Stay | Action::Clean => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Zone {
    River,
    Open,
    Orchard,
}

/// Direction of the nearest target of some kind, as seen by an agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    None,
    Here,
    North,
    South,
    East,
    West,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Features {
    pub zone: Zone,
    pub pollution_bucket: usize,
    pub apple_dir: Direction,
    pub waste_dir: Direction,
}

impl Features {
    pub const SPACE_SIZE: usize = NUM_ZONES * NUM_POLLUTION_BUCKETS * NUM_DIRECTIONS * NUM_DIRECTIONS;

    pub fn encode(&self) -> usize {
        ((self.zone as usize * NUM_POLLUTION_BUCKETS + self.pollution_bucket) * NUM_DIRECTIONS
            + self.apple_dir as usize)
            * NUM_DIRECTIONS
            + self.waste_dir as usize
    }

    pub fn decode(index: usize) -> Option<Features> {
        if index >= Self::SPACE_SIZE {
            return None;
        }
        const DIRS: [Direction; NUM_DIRECTIONS] = [
            Direction::None,
            Direction::Here,
            Direction::North,
            Direction::South,
            Direction::East,
            Direction::West,
        ];
        let waste_dir = DIRS[index % NUM_DIRECTIONS];
        let rest = index / NUM_DIRECTIONS;
        let apple_dir = DIRS[rest % NUM_DIRECTIONS];
        let rest = rest / NUM_DIRECTIONS;
        let pollution_bucket = rest % NUM_POLLUTION_BUCKETS;
        let zone = [Zone::River, Zone::Open, Zone::Orchard][rest / NUM_POLLUTION_BUCKETS];
        Some(Features {
            zone,
            pollution_bucket,
            apple_dir,
            waste_dir,
        })
    }
}

/// Inclusive column range, written `[first, last]` in config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct ColumnRange {
    pub first: usize,
    pub last: usize,
}

impl ColumnRange {
    pub fn contains(&self, col: usize) -> bool {
        (self.first..=self.last).contains(&col)
    }

    pub fn width(&self) -> usize {
        self.last + 1 - self.first
    }

    fn overlaps(&self, other: &ColumnRange) -> bool {
        self.first <= other.last && other.first <= self.last
    }
}

impl From<[usize; 2]> for ColumnRange {
    fn from([first, last]: [usize; 2]) -> Self {
        ColumnRange { first, last }
    }
}

impl From<ColumnRange> for [usize; 2] {
    fn from(r: ColumnRange) -> Self {
        [r.first, r.last]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CleanupConfig {
    pub grid_width: usize,
    pub grid_height: usize,
    pub river_columns: ColumnRange,
    pub orchard_columns: ColumnRange,
    pub waste_spawn_prob: f64,
    pub apple_spawn_max_prob: f64,
    /// Pollution at or above which apples stop growing.
    pub threshold_depletion: f64,
    /// Pollution at or below which apples grow at the full rate.
    pub threshold_restoration: f64,
    pub initial_pollution: f64,
    pub sight_radius: usize,
    pub clean_reach: usize,
    pub episode_length: usize,
}

impl Default for CleanupConfig {
    fn default() -> Self {
        CleanupConfig {
            grid_width: 12,
            grid_height: 9,
            river_columns: ColumnRange { first: 0, last: 1 },
            orchard_columns: ColumnRange { first: 9, last: 11 },
            waste_spawn_prob: 0.05,
            apple_spawn_max_prob: 0.05,
            threshold_depletion: 0.5,
            threshold_restoration: 0.0,
            initial_pollution: 0.5,
            sight_radius: 4,
            clean_reach: 1,
            episode_length: 200,
        }
    }
}

impl CleanupConfig {
    pub fn validate(&self, num_agents: usize) -> Result<()> {
        let field = |name: &str| format!("env.{name}");
        if self.grid_width == 0 || self.grid_height == 0 {
            return Err(Error::config(field("grid_width"), "grid must be non-empty"));
        }
        for (name, r) in [
            ("river_columns", self.river_columns),
            ("orchard_columns", self.orchard_columns),
        ] {
            if r.first > r.last || r.last >= self.grid_width {
                return Err(Error::config(
                    field(name),
                    format!(
                        "[{}, {}] is not a column range inside a {}-wide grid",
                        r.first, r.last, self.grid_width
                    ),
                ));
            }
        }
        if self.river_columns.overlaps(&self.orchard_columns) {
            return Err(Error::config(
                field("orchard_columns"),
                "river and orchard columns overlap",
            ));
        }
        for (name, p) in [
            ("waste_spawn_prob", self.waste_spawn_prob),
            ("apple_spawn_max_prob", self.apple_spawn_max_prob),
            ("initial_pollution", self.initial_pollution),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::config(field(name), format!("{p} not in [0, 1]")));
            }
        }
        if !(0.0 <= self.threshold_restoration
            && self.threshold_restoration < self.threshold_depletion
            && self.threshold_depletion <= 1.0)
        {
            return Err(Error::config(
                field("threshold_depletion"),
                format!(
                    "need 0 <= threshold_restoration ({}) < threshold_depletion ({}) <= 1",
                    self.threshold_restoration, self.threshold_depletion
                ),
            ));
        }
        if self.sight_radius == 0 {
            return Err(Error::config(field("sight_radius"), "must be positive"));
        }
        if self.episode_length == 0 {
            return Err(Error::config(field("episode_length"), "must be positive"));
        }
        let open = self.grid_height
            * (self.grid_width - self.river_columns.width() - self.orchard_columns.width());
        if open < num_agents {
            return Err(Error::config(
                field("grid_width"),
                format!("grid too small: {open} open cells for {num_agents} agents"),
            ));
        }
        Ok(())
    }

    /// Fraction of the full apple growth rate at a given pollution level.
    pub fn regrowth_factor(&self, pollution: f64) -> f64 {
        if pollution <= self.threshold_restoration {
            1.0
        } else if pollution >= self.threshold_depletion {
            0.0
        } else {
            (self.threshold_depletion - pollution)
                / (self.threshold_depletion - self.threshold_restoration)
        }
    }

    pub fn zone_of(&self, col: usize) -> Zone {
        if self.river_columns.contains(col) {
            Zone::River
        } else if self.orchard_columns.contains(col) {
            Zone::Orchard
        } else {
            Zone::Open
        }
    }
}

#[derive(Debug, Clone)]
pub struct MiniCleanup {
    config: CleanupConfig,
    num_agents: usize,
    waste: Vec<bool>,
    apple: Vec<bool>,
    occupied: Vec<bool>,
    positions: Vec<usize>,
    river_cells: Vec<usize>,
    orchard_cells: Vec<usize>,
    open_cells: Vec<usize>,
    waste_count: usize,
    order: Vec<usize>,
    step_count: usize,
    rng: ChaCha8Rng,
}

impl MiniCleanup {
    pub fn new(config: CleanupConfig, num_agents: usize) -> Result<Self> {
        if num_agents == 0 {
            return Err(Error::config("num_agents", "must be positive"));
        }
        config.validate(num_agents)?;
        let cells = config.grid_width * config.grid_height;
        let zone_cells = |zone: Zone| -> Vec<usize> {
            (0..cells)
                .filter(|&c| config.zone_of(c % config.grid_width) == zone)
                .collect()
        };
        let river_cells = zone_cells(Zone::River);
        let orchard_cells = zone_cells(Zone::Orchard);
        let open_cells = zone_cells(Zone::Open);
        let mut env = MiniCleanup {
            num_agents,
            waste: vec![false; cells],
            apple: vec![false; cells],
            occupied: vec![false; cells],
            positions: Vec::new(),
            river_cells,
            orchard_cells,
            open_cells,
            waste_count: 0,
            order: (0..num_agents).collect(),
            step_count: 0,
            rng: ChaCha8Rng::seed_from_u64(0),
            config,
        };
        env.reset(0);
        Ok(env)
    }

    pub fn config(&self) -> &CleanupConfig {
        &self.config
    }

    pub fn pollution(&self) -> f64 {
        self.waste_count as f64 / self.river_cells.len() as f64
    }

    pub fn num_waste(&self) -> usize {
        self.waste_count
    }

    pub fn num_apples(&self) -> usize {
        self.apple.iter().filter(|&&a| a).count()
    }

    pub fn step_count(&self) -> usize {
        self.step_count
    }

    /// `(column, row)` of an agent.
    pub fn agent_position(&self, agent: usize) -> (usize, usize) {
        self.coords(self.positions[agent])
    }

    pub fn has_apple(&self, col: usize, row: usize) -> bool {
        self.apple[self.cell(col, row)]
    }

    pub fn has_waste(&self, col: usize, row: usize) -> bool {
        self.waste[self.cell(col, row)]
    }

    /// Puts an apple on an orchard cell that holds no apple and no agent.
    pub fn place_apple(&mut self, col: usize, row: usize) -> bool {
        let c = self.cell(col, row);
        if self.config.zone_of(col) != Zone::Orchard || self.apple[c] || self.occupied[c] {
            return false;
        }
        self.apple[c] = true;
        true
    }

    /// Moves an agent to an unoccupied cell.
    pub fn place_agent(&mut self, agent: usize, col: usize, row: usize) -> bool {
        let c = self.cell(col, row);
        if self.occupied[c] {
            return false;
        }
        self.occupied[self.positions[agent]] = false;
        self.occupied[c] = true;
        self.positions[agent] = c;
        true
    }

    /// Removes all waste from the river.
    pub fn clear_river(&mut self) {
        for &c in &self.river_cells {
            self.waste[c] = false;
        }
        self.waste_count = 0;
    }

    fn cell(&self, col: usize, row: usize) -> usize {
        row * self.config.grid_width + col
    }

    fn coords(&self, cell: usize) -> (usize, usize) {
        (cell % self.config.grid_width, cell / self.config.grid_width)
    }

    fn offset_cell(&self, cell: usize, dx: isize, dy: isize) -> Option<usize> {
        let (x, y) = self.coords(cell);
        let nx = x.checked_add_signed(dx)?;
        let ny = y.checked_add_signed(dy)?;
        (nx < self.config.grid_width && ny < self.config.grid_height).then(|| self.cell(nx, ny))
    }

    pub fn features(&self, agent: usize) -> Features {
        let pos = self.positions[agent];
        let (col, _) = self.coords(pos);
        let bucket = ((self.pollution() * NUM_POLLUTION_BUCKETS as f64).floor() as usize)
            .min(NUM_POLLUTION_BUCKETS - 1);
        Features {
            zone: self.config.zone_of(col),
            pollution_bucket: bucket,
            apple_dir: self.nearest(pos, &self.apple),
            waste_dir: self.nearest(pos, &self.waste),
        }
    }

    /// Direction toward the nearest marked cell within sight; among equally
    /// near targets and equally good steps, N beats S beats E beats W.
    fn nearest(&self, pos: usize, marked: &[bool]) -> Direction {
        let (x, y) = self.coords(pos);
        let (x, y) = (x as isize, y as isize);
        let r = self.config.sight_radius as isize;
        let (w, h) = (self.config.grid_width as isize, self.config.grid_height as isize);
        let mut found: Vec<(isize, isize)> = Vec::new();
        for d in 0..=r {
            for dx in -d..=d {
                let rem = d - dx.abs();
                let dys: &[isize] = if rem == 0 { &[0] } else { &[-rem, rem] };
                for &dy in dys {
                    let (tx, ty) = (x + dx, y + dy);
                    if (0..w).contains(&tx)
                        && (0..h).contains(&ty)
                        && marked[(ty * w + tx) as usize]
                    {
                        found.push((tx, ty));
                    }
                }
            }
            if found.is_empty() {
                continue;
            }
            if d == 0 {
                return Direction::Here;
            }
            for (dir, (ox, oy)) in [
                (Direction::North, (0, -1)),
                (Direction::South, (0, 1)),
                (Direction::East, (1, 0)),
                (Direction::West, (-1, 0)),
            ] {
                let (sx, sy) = (x + ox, y + oy);
                if found
                    .iter()
                    .any(|&(tx, ty)| (tx - sx).abs() + (ty - sy).abs() == d - 1)
                {
                    return dir;
                }
            }
        }
        Direction::None
    }

    fn observations(&self) -> Vec<usize> {
        (0..self.num_agents)
            .map(|i| self.features(i).encode())
            .collect()
    }
}

impl Environment for MiniCleanup {
    fn descriptor(&self) -> EnvDescriptor {
        EnvDescriptor {
            num_agents: self.num_agents,
            num_actions: NUM_ACTIONS,
            observation_space_size: Features::SPACE_SIZE,
            episode_length: self.config.episode_length,
        }
    }

    fn reset(&mut self, seed: u64) -> Vec<usize> {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.waste.fill(false);
        self.apple.fill(false);
        self.occupied.fill(false);
        self.step_count = 0;

        let n_waste = ((self.config.initial_pollution * self.river_cells.len() as f64) + 1e-9)
            .floor() as usize;
        let mut river = self.river_cells.clone();
        let (chosen, _) = river.partial_shuffle(&mut self.rng, n_waste);
        for &c in chosen.iter() {
            self.waste[c] = true;
        }
        self.waste_count = n_waste;

        let mut open = self.open_cells.clone();
        let (spots, _) = open.partial_shuffle(&mut self.rng, self.num_agents);
        self.positions = spots.to_vec();
        for &c in &self.positions {
            self.occupied[c] = true;
        }
        self.observations()
    }

    fn step(&mut self, joint_actions: &[usize]) -> JointStep {
        assert_eq!(
            joint_actions.len(),
            self.num_agents,
            "one action per agent expected"
        );
        let actions: Vec<Action> = joint_actions
            .iter()
            .map(|&a| {
                Action::from_index(a)
                    .unwrap_or_else(|| panic!("action {a} out of range 0..{NUM_ACTIONS}"))
            })
            .collect();
        self.step_count += 1;

        // Movement, in a fresh random priority order.
        let mut order = std::mem::take(&mut self.order);
        order.shuffle(&mut self.rng);
        for &i in &order {
            let Some((dx, dy)) = actions[i].offset() else {
                continue;
            };
            if let Some(target) = self.offset_cell(self.positions[i], dx, dy) {
                if !self.occupied[target] {
                    self.occupied[self.positions[i]] = false;
                    self.occupied[target] = true;
                    self.positions[i] = target;
                }
            }
        }
        self.order = order;

        // Cleaning.
        let reach = self.config.clean_reach as isize;
        let mut cleaned = vec![false; self.num_agents];
        for i in 0..self.num_agents {
            if actions[i] != Action::Clean {
                continue;
            }
            for dx in -reach..=reach {
                let rem = reach - dx.abs();
                for dy in -rem..=rem {
                    if let Some(c) = self.offset_cell(self.positions[i], dx, dy) {
                        let (col, _) = self.coords(c);
                        cleaned[i] |= self.config.river_columns.contains(col);
                        if self.waste[c] {
                            self.waste[c] = false;
                            self.waste_count -= 1;
                        }
                    }
                }
            }
        }

        // Consumption.
        let mut rewards = vec![0.0; self.num_agents];
        for (i, reward) in rewards.iter_mut().enumerate() {
            let c = self.positions[i];
            if self.apple[c] {
                self.apple[c] = false;
                *reward = 1.0;
            }
        }

        // Waste, then apple growth at the resulting pollution.
        for k in 0..self.river_cells.len() {
            let c = self.river_cells[k];
            if !self.waste[c] && self.rng.random::<f64>() < self.config.waste_spawn_prob {
                self.waste[c] = true;
                self.waste_count += 1;
            }
        }
        let p_apple = self.config.apple_spawn_max_prob * self.config.regrowth_factor(self.pollution());
        for k in 0..self.orchard_cells.len() {
            let c = self.orchard_cells[k];
            if !self.apple[c] && !self.occupied[c] && self.rng.random::<f64>() < p_apple {
                self.apple[c] = true;
            }
        }

        JointStep {
            observations: self.observations(),
            rewards,
            cleaned,
            done: self.step_count >= self.config.episode_length,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(n: usize) -> MiniCleanup {
        MiniCleanup::new(CleanupConfig::default(), n).unwrap()
    }

    fn quiet() -> CleanupConfig {
        CleanupConfig {
            waste_spawn_prob: 0.0,
            apple_spawn_max_prob: 0.0,
            initial_pollution: 0.0,
            ..CleanupConfig::default()
        }
    }

    #[test]
    fn reset_is_deterministic() {
        let mut a = env(6);
        let mut b = env(6);
        assert_eq!(a.reset(7), b.reset(7));
        let pa: Vec<_> = (0..6).map(|i| a.agent_position(i)).collect();
        let pb: Vec<_> = (0..6).map(|i| b.agent_position(i)).collect();
        assert_eq!(pa, pb);
    }

    #[test]
    fn initial_waste_count() {
        let mut e = env(6);
        for seed in 0..20 {
            e.reset(seed);
            assert_eq!(e.num_waste(), 9);
            assert_eq!(e.pollution(), 0.5);
            assert_eq!(e.num_apples(), 0);
            for i in 0..6 {
                let (col, _) = e.agent_position(i);
                assert_eq!(e.config().zone_of(col), Zone::Open);
            }
        }
    }

    #[test]
    fn too_small_grid_rejected() {
        let cfg = CleanupConfig {
            grid_width: 4,
            grid_height: 1,
            river_columns: [0, 1].into(),
            orchard_columns: [3, 3].into(),
            ..CleanupConfig::default()
        };
        let err = MiniCleanup::new(cfg, 2).unwrap_err();
        assert!(err.to_string().contains("grid too small"));
    }

    #[test]
    fn config_validation() {
        let bad = |f: fn(&mut CleanupConfig)| {
            let mut c = CleanupConfig::default();
            f(&mut c);
            c.validate(6).is_err()
        };
        assert!(bad(|c| c.orchard_columns = [1, 3].into()));
        assert!(bad(|c| c.river_columns = [0, 12].into()));
        assert!(bad(|c| c.threshold_restoration = 0.5));
        assert!(bad(|c| c.threshold_depletion = 1.5));
        assert!(bad(|c| c.waste_spawn_prob = -0.1));
        assert!(bad(|c| c.episode_length = 0));
        assert!(CleanupConfig::default().validate(6).is_ok());
    }

    #[test]
    fn regrowth_factor_is_saturating_linear() {
        let c = CleanupConfig {
            threshold_restoration: 0.1,
            threshold_depletion: 0.5,
            ..CleanupConfig::default()
        };
        assert_eq!(c.regrowth_factor(0.0), 1.0);
        assert_eq!(c.regrowth_factor(0.1), 1.0);
        assert!((c.regrowth_factor(0.3) - 0.5).abs() < 1e-12);
        assert_eq!(c.regrowth_factor(0.5), 0.0);
        assert_eq!(c.regrowth_factor(1.0), 0.0);
        let mut last = 1.0;
        for k in 0..=100 {
            let f = c.regrowth_factor(k as f64 / 100.0);
            assert!(f <= last);
            last = f;
        }
    }

    #[test]
    fn entering_an_apple_pays_one() {
        let mut e = MiniCleanup::new(quiet(), 2).unwrap();
        e.reset(1);
        assert!(e.place_agent(0, 9, 4));
        assert!(e.place_agent(1, 5, 0));
        assert!(e.place_apple(10, 4));
        let step = e.step(&[Action::East.index(), Action::Stay.index()]);
        assert_eq!(step.rewards, vec![1.0, 0.0]);
        assert!(!e.has_apple(10, 4));
        assert_eq!(e.agent_position(0), (10, 4));
    }

    #[test]
    fn idle_agents_in_an_empty_grid_earn_nothing() {
        let mut e = MiniCleanup::new(quiet(), 6).unwrap();
        e.reset(3);
        for _ in 0..50 {
            let s = e.step(&[Action::Stay.index(); 6]);
            assert!(s.rewards.iter().all(|&r| r == 0.0));
        }
    }

    #[test]
    fn depleted_river_grows_no_apples() {
        let cfg = CleanupConfig {
            initial_pollution: 0.5,
            waste_spawn_prob: 0.0,
            apple_spawn_max_prob: 1.0,
            ..CleanupConfig::default()
        };
        let mut e = MiniCleanup::new(cfg, 2).unwrap();
        e.reset(9);
        assert!(e.pollution() >= e.config().threshold_depletion);
        e.step(&[Action::Stay.index(); 2]);
        assert_eq!(e.num_apples(), 0);
        e.clear_river();
        e.step(&[Action::Stay.index(); 2]);
        assert_eq!(e.num_apples(), 27);
    }

    #[test]
    fn cleaning_removes_neighbourhood_waste() {
        let cfg = CleanupConfig {
            initial_pollution: 1.0,
            waste_spawn_prob: 0.0,
            ..CleanupConfig::default()
        };
        let mut e = MiniCleanup::new(cfg, 1).unwrap();
        e.reset(0);
        assert_eq!(e.num_waste(), 18);
        e.place_agent(0, 1, 4);
        let s = e.step(&[Action::Clean.index()]);
        assert_eq!(s.rewards, vec![0.0]);
        // own cell, N, S and W are river; E is open ground.
        assert_eq!(e.num_waste(), 14);
        for (c, r) in [(1, 4), (1, 3), (1, 5), (0, 4)] {
            assert!(!e.has_waste(c, r));
        }
        assert!(e.has_waste(0, 3));
    }

    #[test]
    fn blocked_moves_become_stay() {
        let mut e = MiniCleanup::new(quiet(), 2).unwrap();
        e.reset(0);
        e.place_agent(0, 4, 4);
        e.place_agent(1, 5, 4);
        e.step(&[Action::East.index(), Action::Stay.index()]);
        assert_eq!(e.agent_position(0), (4, 4));
        e.place_agent(0, 4, 0);
        e.step(&[Action::North.index(), Action::Stay.index()]);
        assert_eq!(e.agent_position(0), (4, 0));
    }

    #[test]
    fn features() {
        let mut e = MiniCleanup::new(quiet(), 1).unwrap();
        e.reset(0);
        e.place_agent(0, 10, 4);
        let f = e.features(0);
        assert_eq!(
            (f.zone, f.pollution_bucket, f.apple_dir, f.waste_dir),
            (Zone::Orchard, 0, Direction::None, Direction::None)
        );
        e.place_apple(10, 1);
        assert_eq!(e.features(0).apple_dir, Direction::North);
        // Equidistant apples north and south: north wins.
        e.place_apple(10, 7);
        assert_eq!(e.features(0).apple_dir, Direction::North);
        // A diagonal apple is nearer; both N and E reduce distance, N wins.
        e.place_apple(11, 3);
        assert_eq!(e.features(0).apple_dir, Direction::North);
        e.place_apple(11, 5);
        assert_eq!(e.features(0).apple_dir, Direction::North);
        e.place_apple(9, 4);
        assert_eq!(e.features(0).apple_dir, Direction::West);
        // beyond sight radius
        let mut far = MiniCleanup::new(quiet(), 1).unwrap();
        far.reset(0);
        far.place_agent(0, 4, 4);
        far.place_apple(9, 4);
        assert_eq!(far.features(0).apple_dir, Direction::None);
        far.place_agent(0, 5, 4);
        assert_eq!(far.features(0).apple_dir, Direction::East);

        let polluted = CleanupConfig {
            initial_pollution: 1.0,
            ..quiet()
        };
        let mut p = MiniCleanup::new(polluted, 1).unwrap();
        p.reset(0);
        p.place_agent(0, 0, 0);
        let f = p.features(0);
        assert_eq!(f.pollution_bucket, 4);
        assert_eq!(f.zone, Zone::River);
        assert_eq!(f.waste_dir, Direction::Here);
    }

    #[test]
    fn standing_on_an_apple_reads_here() {
        let mut e = MiniCleanup::new(quiet(), 1).unwrap();
        e.reset(0);
        e.place_apple(10, 4);
        // bypass the occupancy check by placing the agent afterwards
        e.place_agent(0, 10, 4);
        assert_eq!(e.features(0).apple_dir, Direction::Here);
    }

    #[test]
    fn encoding_is_a_bijection() {
        assert_eq!(Features::SPACE_SIZE, 540);
        for i in 0..Features::SPACE_SIZE {
            assert_eq!(Features::decode(i).unwrap().encode(), i);
        }
        assert!(Features::decode(540).is_none());
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn out_of_range_action_panics() {
        let mut e = env(1);
        e.step(&[6]);
    }

    #[test]
    fn episode_ends_on_schedule() {
        let cfg = CleanupConfig {
            episode_length: 5,
            ..CleanupConfig::default()
        };
        let mut e = MiniCleanup::new(cfg, 2).unwrap();
        e.reset(4);
        for t in 1..=5 {
            let s = e.step(&[4, 4]);
            assert_eq!(s.done, t == 5);
        }
    }
}
