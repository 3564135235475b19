//! Seeded problem generators.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gating::{MetaPolicy, OptionSet, OptionSpec};
use crate::linalg::{Matrix, Vector};
use crate::mdp::{Mdp, PolicyMatrix};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random dense-ish MDP: every `(s, a)` row gets `ceil(sparsity * n)`
/// distinct successors with normalized uniform weights; rewards are uniform
/// in `[0, 1)`.
pub fn gen_random_mdp(n: usize, k: usize, gamma: f64, seed: u64, sparsity: f64) -> Result<Mdp> {
    random_mdp_with(&mut rng_from_seed(seed), n, k, gamma, sparsity)
}

pub fn random_mdp_with<R: Rng>(
    rng: &mut R,
    n: usize,
    k: usize,
    gamma: f64,
    sparsity: f64,
) -> Result<Mdp> {
    if n == 0 || k == 0 {
        return Err(Error::InvalidParameter(
            "need at least one state and one action".into(),
        ));
    }
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::InvalidParameter(format!(
            "gamma {gamma} outside [0, 1)"
        )));
    }
    if !(sparsity > 0.0 && sparsity <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "sparsity {sparsity} outside (0, 1]"
        )));
    }
    let fan_out = ((sparsity * n as f64).ceil() as usize).clamp(1, n);
    let mut transition = vec![Matrix::zeros(n, n); k];
    for p in transition.iter_mut() {
        for s in 0..n {
            let targets = sample(rng, n, fan_out);
            let weights: Vec<f64> = (0..fan_out).map(|_| rng.gen_range(0.05..1.0)).collect();
            let total: f64 = weights.iter().sum();
            for (s2, w) in targets.iter().zip(weights) {
                p[(s, s2)] = w / total;
            }
        }
    }
    let reward = Matrix::from_fn(n, k, |_, _| rng.gen::<f64>());
    Mdp::new(transition, reward, gamma)
}

fn random_stochastic<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    let mut m = Matrix::from_fn(rows, cols, |_, _| rng.gen_range(0.01..1.0));
    for mut row in m.row_iter_mut() {
        let total = row.sum();
        row /= total;
    }
    m
}

/// `n_options` options with random stochastic policies and termination
/// probabilities uniform in `[0, 1]`, and a random policy over them.
pub fn random_option_set<R: Rng>(
    rng: &mut R,
    n_states: usize,
    n_actions: usize,
    n_options: usize,
) -> Result<OptionSet> {
    if n_options == 0 {
        return Err(Error::InvalidParameter("need at least one option".into()));
    }
    let options = (0..n_options)
        .map(|_| {
            let policy = PolicyMatrix::new(random_stochastic(rng, n_states, n_actions))?;
            let beta = Vector::from_fn(n_states, |_, _| rng.gen::<f64>());
            OptionSpec::new(policy, beta)
        })
        .collect::<Result<Vec<_>>>()?;
    let mu = MetaPolicy::new(random_stochastic(rng, n_states, n_options))?;
    OptionSet::new(options, mu)
}

/// The four-rooms layout, walls included. `#` is a wall.
pub const FOUR_ROOMS: [&str; 13] = [
    "#############",
    "#     #     #",
    "#     #     #",
    "#           #",
    "#     #     #",
    "#     #     #",
    "## ####     #",
    "#     ### ###",
    "#     #     #",
    "#     #     #",
    "#           #",
    "#     #     #",
    "#############",
];

/// Doorways between rooms, as `(row, col)` in [`FOUR_ROOMS`].
pub const HALLWAYS: [(usize, usize); 4] = [(3, 6), (6, 2), (7, 9), (10, 6)];

/// Absorbing goal, the inner corner of the bottom-right room.
pub const GOAL: (usize, usize) = (11, 11);

/// Probability that a movement action goes where intended; the rest is
/// spread evenly over the other three directions.
pub const INTENDED: f64 = 0.9;

/// Up, down, left, right.
const MOVES: [(isize, isize); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];

/// Grid geometry shared by the four-rooms generator and its examples.
#[derive(Debug, Clone)]
pub struct Gridworld {
    pub cells: Vec<(usize, usize)>,
    index: Vec<Vec<Option<usize>>>,
}

impl Gridworld {
    pub fn four_rooms() -> Self {
        let mut cells = Vec::new();
        let mut index = vec![vec![None; FOUR_ROOMS[0].len()]; FOUR_ROOMS.len()];
        for (r, line) in FOUR_ROOMS.iter().enumerate() {
            for (c, ch) in line.chars().enumerate() {
                if ch != '#' {
                    index[r][c] = Some(cells.len());
                    cells.push((r, c));
                }
            }
        }
        Self { cells, index }
    }

    pub fn n_states(&self) -> usize {
        self.cells.len()
    }

    pub fn state(&self, cell: (usize, usize)) -> Option<usize> {
        self.index.get(cell.0)?.get(cell.1).copied().flatten()
    }

    /// Where a deterministic move leads; walls leave the agent in place.
    pub fn step(&self, s: usize, action: usize) -> usize {
        let (r, c) = self.cells[s];
        let (dr, dc) = MOVES[action];
        let target = (r as isize + dr, c as isize + dc);
        if target.0 < 0 || target.1 < 0 {
            return s;
        }
        self.state((target.0 as usize, target.1 as usize))
            .unwrap_or(s)
    }

    /// Breadth-first distances to `target`.
    pub fn distances_to(&self, target: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n_states()];
        let mut queue = std::collections::VecDeque::from([target]);
        dist[target] = 0;
        while let Some(s) = queue.pop_front() {
            for a in 0..MOVES.len() {
                let t = self.step(s, a);
                if dist[t] == usize::MAX {
                    dist[t] = dist[s] + 1;
                    queue.push_back(t);
                }
            }
        }
        dist
    }
}

/// Four-rooms gridworld (104 cells), four stochastic moves, reward 1 in the
/// absorbing goal and 0 elsewhere. One option per hallway follows a shortest
/// path to it from every cell and terminates with probability 1 on any
/// hallway cell and 0 elsewhere; the policy over options is uniform.
pub fn gen_four_rooms(gamma: f64) -> Result<(Mdp, OptionSet)> {
    let grid = Gridworld::four_rooms();
    let n = grid.n_states();
    let k = MOVES.len();
    let goal = grid.state(GOAL).expect("goal is a free cell");
    let slip = (1.0 - INTENDED) / (k - 1) as f64;

    let mut transition = vec![Matrix::zeros(n, n); k];
    for (a, p) in transition.iter_mut().enumerate() {
        for s in 0..n {
            if s == goal {
                p[(s, s)] = 1.0;
                continue;
            }
            for actual in 0..k {
                let prob = if actual == a { INTENDED } else { slip };
                p[(s, grid.step(s, actual))] += prob;
            }
        }
    }
    let mut reward = Matrix::zeros(n, k);
    reward.row_mut(goal).fill(1.0);
    let mdp = Mdp::new(transition, reward, gamma)?;

    let hallway_states: Vec<usize> = HALLWAYS
        .iter()
        .map(|&h| grid.state(h).expect("hallway is a free cell"))
        .collect();
    let beta = Vector::from_fn(n, |s, _| {
        if hallway_states.contains(&s) {
            1.0
        } else {
            0.0
        }
    });
    let options = hallway_states
        .iter()
        .map(|&h| {
            let dist = grid.distances_to(h);
            let mut probs = Matrix::zeros(n, k);
            for s in 0..n {
                let a = (0..k)
                    .find(|&a| dist[s] > 0 && dist[grid.step(s, a)] + 1 == dist[s])
                    .unwrap_or(0);
                probs[(s, a)] = 1.0;
            }
            OptionSpec::new(PolicyMatrix::new(probs)?, beta.clone())
        })
        .collect::<Result<Vec<_>>>()?;
    let set = OptionSet::new(options, MetaPolicy::uniform(n, HALLWAYS.len()))?;
    Ok((mdp, set))
}
