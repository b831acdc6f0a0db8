//! High-level credo-tuning policy.
//!
//! Credos are discretised onto a lattice over the simplex (integer steps of
//! size `1 / divisions` per channel) and a tabular Q-learner walks that
//! lattice by moving one step of weight from one channel to another.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::credo::{Channel, CredoVector};
use crate::error::{Error, Result};
use crate::learners::QTable;

/// A lattice credo, stored as integer step counts that sum to `divisions`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint {
    steps: [u32; 3],
    divisions: u32,
}

impl LatticePoint {
    pub fn new(steps: [u32; 3], divisions: u32) -> Result<Self> {
        if divisions == 0 || steps.iter().sum::<u32>() != divisions {
            return Err(Error::config(
                "credo",
                format!("steps {steps:?} do not sum to {divisions}"),
            ));
        }
        Ok(LatticePoint { steps, divisions })
    }

    /// Snaps a credo vector to the lattice; fails if it is not a lattice point.
    pub fn from_credo(cr: &CredoVector, divisions: u32) -> Result<Self> {
        let mut steps = [0u32; 3];
        for (slot, w) in steps.iter_mut().zip(cr.as_array()) {
            let scaled = w * divisions as f64;
            let rounded = scaled.round();
            if (scaled - rounded).abs() > 1e-6 {
                return Err(Error::config(
                    "credo",
                    format!("{cr} is not on the lattice with resolution 1/{divisions}"),
                ));
            }
            *slot = rounded as u32;
        }
        LatticePoint::new(steps, divisions)
    }

    pub fn steps(&self) -> [u32; 3] {
        self.steps
    }

    pub fn divisions(&self) -> u32 {
        self.divisions
    }

    pub fn to_credo(&self) -> CredoVector {
        let d = self.divisions as f64;
        CredoVector::new(
            self.steps[0] as f64 / d,
            self.steps[1] as f64 / d,
            self.steps[2] as f64 / d,
        )
        .expect("lattice steps sum to the division count")
    }

    /// L1 distance in credo units.
    pub fn l1_distance(&self, other: &LatticePoint) -> f64 {
        let diff: u32 = self
            .steps
            .iter()
            .zip(other.steps)
            .map(|(&a, b)| a.abs_diff(b))
            .sum();
        diff as f64 / self.divisions as f64
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_credo().fmt(f)
    }
}

/// Number of equal steps per channel for a resolution, e.g. 0.2 -> 5.
pub fn divisions_for(resolution: f64) -> Result<u32> {
    let inv = 1.0 / resolution;
    let d = inv.round();
    if resolution.is_nan() || resolution <= 0.0 || !inv.is_finite() || d < 1.0 || (inv - d).abs() > 1e-9 {
        return Err(Error::config(
            "credo_policy.resolution",
            format!("1 / {resolution} is not a positive integer"),
        ));
    }
    Ok(d as u32)
}

/// All lattice points at `resolution`, in lexicographic order of steps.
pub fn enumerate_lattice(resolution: f64) -> Result<Vec<LatticePoint>> {
    Ok(Lattice::new(divisions_for(resolution)?).points)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    divisions: u32,
    points: Vec<LatticePoint>,
}

impl Lattice {
    pub fn new(divisions: u32) -> Self {
        let mut points = Vec::new();
        for a in 0..=divisions {
            for b in 0..=divisions - a {
                points.push(LatticePoint {
                    steps: [a, b, divisions - a - b],
                    divisions,
                });
            }
        }
        Lattice { divisions, points }
    }

    pub fn divisions(&self) -> u32 {
        self.divisions
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn point(&self, index: usize) -> LatticePoint {
        self.points[index]
    }

    pub fn index_of(&self, point: &LatticePoint) -> usize {
        assert_eq!(point.divisions, self.divisions, "point from another lattice");
        // Points with first coordinate a start after sum_{k<a} (d - k + 1) entries.
        let [a, b, _] = point.steps;
        let d = self.divisions;
        let before: u32 = (0..a).map(|k| d - k + 1).sum();
        (before + b) as usize
    }
}

/// Shift one step of weight between channels, or do nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CredoMove {
    Transfer { from: Channel, to: Channel },
    NoOp,
}

impl CredoMove {
    /// The seven moves; `NoOp` is last.
    pub const ALL: [CredoMove; 7] = [
        CredoMove::Transfer { from: Channel::SelfFocus, to: Channel::Team },
        CredoMove::Transfer { from: Channel::SelfFocus, to: Channel::System },
        CredoMove::Transfer { from: Channel::Team, to: Channel::SelfFocus },
        CredoMove::Transfer { from: Channel::Team, to: Channel::System },
        CredoMove::Transfer { from: Channel::System, to: Channel::SelfFocus },
        CredoMove::Transfer { from: Channel::System, to: Channel::Team },
        CredoMove::NoOp,
    ];

    pub fn index(self) -> usize {
        CredoMove::ALL
            .iter()
            .position(|&m| m == self)
            .expect("every move is listed in ALL")
    }

    pub fn from_index(index: usize) -> CredoMove {
        CredoMove::ALL[index]
    }
}

/// Applies a move; moves that would leave [0, 1] leave the point unchanged.
pub fn apply_move(point: LatticePoint, mv: CredoMove) -> LatticePoint {
    match mv {
        CredoMove::NoOp => point,
        CredoMove::Transfer { from, to } => {
            let (src, dst) = (from.index(), to.index());
            if src == dst || point.steps[src] == 0 || point.steps[dst] == point.divisions {
                return point;
            }
            let mut steps = point.steps;
            steps[src] -= 1;
            steps[dst] += 1;
            LatticePoint { steps, ..point }
        }
    }
}

/// What the credo policy is rewarded with at a batch boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BatchRewardSource {
    /// Per-episode credo-based reward, averaged over the batch.
    #[default]
    Credo,
    /// Per-episode environmental reward, averaged over the batch.
    Environment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CredoPolicyConfig {
    pub epsilon: f64,
    pub alpha_hi: f64,
    pub gamma_hi: f64,
    pub resolution: f64,
    pub batch_reward: BatchRewardSource,
    /// Divide the batch reward by the episode length.
    pub normalize_batch_reward: bool,
    /// Starting value of every Q_hi entry. A value at or above the largest
    /// achievable return makes the policy try every move before settling.
    pub initial_q: f64,
}

impl Default for CredoPolicyConfig {
    fn default() -> Self {
        CredoPolicyConfig {
            epsilon: 0.2,
            alpha_hi: 0.1,
            gamma_hi: 0.9,
            resolution: 0.2,
            batch_reward: BatchRewardSource::Credo,
            normalize_batch_reward: false,
            initial_q: 0.0,
        }
    }
}

impl CredoPolicyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::config(
                "credo_policy.epsilon",
                format!("{} not in [0, 1]", self.epsilon),
            ));
        }
        if !(self.alpha_hi > 0.0 && self.alpha_hi <= 1.0) {
            return Err(Error::config(
                "credo_policy.alpha_hi",
                format!("{} not in (0, 1]", self.alpha_hi),
            ));
        }
        if !(0.0..1.0).contains(&self.gamma_hi) {
            return Err(Error::config(
                "credo_policy.gamma_hi",
                format!("{} not in [0, 1)", self.gamma_hi),
            ));
        }
        if !self.initial_q.is_finite() {
            return Err(Error::config(
                "credo_policy.initial_q",
                format!("{} is not finite", self.initial_q),
            ));
        }
        divisions_for(self.resolution)?;
        Ok(())
    }
}

/// Epsilon-greedy Q-learner over lattice points and credo moves.
#[derive(Debug, Clone, PartialEq)]
pub struct CredoPolicy {
    config: CredoPolicyConfig,
    lattice: Lattice,
    q: QTable,
}

impl CredoPolicy {
    pub fn new(config: CredoPolicyConfig) -> Result<Self> {
        config.validate()?;
        let lattice = Lattice::new(divisions_for(config.resolution)?);
        let q = QTable::filled(lattice.len(), CredoMove::ALL.len(), config.initial_q);
        Ok(CredoPolicy { config, lattice, q })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn q_table(&self) -> &QTable {
        &self.q
    }

    pub fn q_table_mut(&mut self) -> &mut QTable {
        &mut self.q
    }

    pub fn greedy(&self, state: &LatticePoint) -> CredoMove {
        CredoMove::from_index(self.q.greedy(self.lattice.index_of(state)))
    }

    pub fn select<R: Rng + ?Sized>(&self, state: &LatticePoint, rng: &mut R) -> CredoMove {
        if rng.random::<f64>() < self.config.epsilon {
            CredoMove::from_index(rng.random_range(0..CredoMove::ALL.len() as u32) as usize)
        } else {
            self.greedy(state)
        }
    }

    pub fn update(
        &mut self,
        state: &LatticePoint,
        mv: CredoMove,
        batch_reward: f64,
        next_state: &LatticePoint,
    ) {
        let s = self.lattice.index_of(state);
        let next = self.lattice.index_of(next_state);
        let target = batch_reward + self.config.gamma_hi * self.q.max(next);
        self.q.backup(s, mv.index(), self.config.alpha_hi, target);
    }

    /// States visited by following the greedy policy from `start` until a
    /// state repeats.
    pub fn greedy_trajectory(&self, start: LatticePoint) -> Vec<LatticePoint> {
        let mut path = vec![start];
        loop {
            let cur = *path.last().expect("non-empty");
            let next = apply_move(cur, self.greedy(&cur));
            if path.contains(&next) {
                path.push(next);
                return path;
            }
            path.push(next);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::{HashSet, VecDeque};

    fn pt(a: u32, b: u32, c: u32) -> LatticePoint {
        LatticePoint::new([a, b, c], a + b + c).unwrap()
    }

    #[test]
    fn lattice_sizes() {
        assert_eq!(enumerate_lattice(0.2).unwrap().len(), 21);
        assert_eq!(enumerate_lattice(1.0).unwrap().len(), 3);
        assert_eq!(enumerate_lattice(0.5).unwrap().len(), 6);
        assert_eq!(enumerate_lattice(0.1).unwrap().len(), 66);
        assert!(enumerate_lattice(0.3).is_err());
        assert!(enumerate_lattice(0.0).is_err());
        assert!(enumerate_lattice(-0.5).is_err());
    }

    #[test]
    fn lattice_is_lexicographic_and_indexed() {
        let lattice = Lattice::new(5);
        let pts = lattice.points();
        assert!(pts.windows(2).all(|w| w[0].steps() < w[1].steps()));
        for (i, p) in pts.iter().enumerate() {
            assert_eq!(lattice.index_of(p), i);
        }
        assert_eq!(pts[0].steps(), [0, 0, 5]);
        assert_eq!(pts[20].steps(), [5, 0, 0]);
    }

    #[test]
    fn moves_and_clamping() {
        let self_to_system = CredoMove::Transfer {
            from: Channel::SelfFocus,
            to: Channel::System,
        };
        let p = LatticePoint::from_credo(&CredoVector::new(0.2, 0.0, 0.8).unwrap(), 5).unwrap();
        let q = apply_move(p, self_to_system);
        assert_eq!(q.to_credo(), CredoVector::SYSTEM_FOCUSED);
        assert_eq!(apply_move(q, self_to_system), q);
        for p in Lattice::new(5).points() {
            assert_eq!(apply_move(*p, CredoMove::NoOp), *p);
        }
        assert_eq!(CredoMove::ALL.len(), 7);
        assert_eq!(CredoMove::NoOp.index(), 6);
        let distinct: HashSet<_> = CredoMove::ALL.iter().collect();
        assert_eq!(distinct.len(), 7);
    }

    #[test]
    fn closure_and_connectivity() {
        let lattice = Lattice::new(5);
        let set: HashSet<_> = lattice.points().iter().copied().collect();
        for p in lattice.points() {
            for mv in CredoMove::ALL {
                let q = apply_move(*p, mv);
                assert!(set.contains(&q));
                assert_eq!(q.steps().iter().sum::<u32>(), 5);
            }
        }
        let mut seen = HashSet::from([lattice.point(0)]);
        let mut queue = VecDeque::from([lattice.point(0)]);
        while let Some(p) = queue.pop_front() {
            for mv in CredoMove::ALL {
                let q = apply_move(p, mv);
                if seen.insert(q) {
                    queue.push_back(q);
                }
            }
        }
        assert_eq!(seen.len(), 21);
    }

    #[test]
    fn off_lattice_credo_rejected() {
        let cr = CredoVector::new(0.25, 0.25, 0.5).unwrap();
        assert!(LatticePoint::from_credo(&cr, 5).is_err());
        assert!(LatticePoint::from_credo(&cr, 4).is_ok());
        assert!(LatticePoint::new([1, 1, 1], 5).is_err());
    }

    #[test]
    fn l1() {
        assert_eq!(pt(5, 0, 0).l1_distance(&pt(0, 0, 5)), 2.0);
        assert!((pt(1, 0, 4).l1_distance(&pt(0, 0, 5)) - 0.4).abs() < 1e-12);
    }

    #[test]
    fn greedy_selection() {
        let mut policy = CredoPolicy::new(CredoPolicyConfig {
            epsilon: 0.0,
            ..Default::default()
        })
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = pt(0, 0, 5);
        assert_eq!(policy.select(&s, &mut rng).index(), 0);
        let idx = policy.lattice().index_of(&s);
        policy.q_table_mut().set(idx, 6, 1.0);
        assert_eq!(policy.select(&s, &mut rng), CredoMove::NoOp);
    }

    #[test]
    fn uniform_exploration() {
        let policy = CredoPolicy::new(CredoPolicyConfig {
            epsilon: 1.0,
            ..Default::default()
        })
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut counts = [0usize; 7];
        let draws = 10_000;
        for _ in 0..draws {
            counts[policy.select(&pt(1, 2, 2), &mut rng).index()] += 1;
        }
        let p = 1.0 / 7.0;
        let sd = (draws as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!((c as f64 - draws as f64 * p).abs() <= 3.0 * sd, "{counts:?}");
        }
    }

    #[test]
    fn update_rule() {
        let mk = |alpha_hi, gamma_hi| {
            CredoPolicy::new(CredoPolicyConfig {
                alpha_hi,
                gamma_hi,
                ..Default::default()
            })
            .unwrap()
        };
        let s = pt(0, 0, 5);
        let mv = CredoMove::Transfer {
            from: Channel::System,
            to: Channel::Team,
        };
        let next = apply_move(s, mv);
        let idx = |p: &CredoPolicy| p.lattice().index_of(&s);

        let mut p = mk(1.0, 0.0);
        p.update(&s, mv, 2.0, &next);
        assert_eq!(p.q_table().get(idx(&p), mv.index()), 2.0);

        let mut p = mk(0.5, 0.0);
        p.update(&s, mv, 0.0, &next);
        assert_eq!(p.q_table().get(idx(&p), mv.index()), 0.0);
        p.update(&s, mv, 1.0, &next);
        p.update(&s, mv, 1.0, &next);
        assert_eq!(p.q_table().get(idx(&p), mv.index()), 0.75);
    }

    #[test]
    fn initial_q_fills_the_table() {
        let policy = CredoPolicy::new(CredoPolicyConfig {
            initial_q: 10.0,
            ..CredoPolicyConfig::default()
        })
        .unwrap();
        assert!((0..21).all(|s| policy.q_table().row(s).iter().all(|&q| q == 10.0)));
        let bad = CredoPolicyConfig {
            initial_q: f64::NAN,
            ..CredoPolicyConfig::default()
        };
        assert!(CredoPolicy::new(bad).is_err());
    }

    #[test]
    fn greedy_trajectory_stops_on_repeat() {
        let mut policy = CredoPolicy::new(CredoPolicyConfig::default()).unwrap();
        let start = pt(0, 0, 5);
        // system -> team everywhere: walks to <0,1,0> and then clamps
        for i in 0..policy.lattice().len() {
            policy.q_table_mut().set(i, 5, 1.0);
        }
        let path = policy.greedy_trajectory(start);
        assert_eq!(path.last(), Some(&pt(0, 5, 0)));
        assert_eq!(path.len(), 7);
    }
}
