//! Exact ground-truth solvers for small normal-form games: pure Nash
//! enumeration, n-level Stackelberg backward induction, claim verification,
//! and 2-player mixed-equilibrium support enumeration. Everything here is
//! exhaustive and capped to desk scale; it certifies the designed matrices
//! before any training run is trusted.

mod claims;
mod file;
mod mixed;
mod stackelberg;

pub use claims::{verify_claims, ClaimKind, ClaimOutcome, ClaimReport};
pub use file::{parse_game_file, read_game_file, write_game_file};
pub use mixed::{enumerate_mixed_ne_2p, MixedProfile, MixedReport};
pub use stackelberg::stackelberg_se;

use crate::error::{Error, Result};

/// Exhaustive enumeration refuses games with more joint actions than this.
pub const MAX_JOINT_ACTIONS: usize = 1_000_000;

/// A joint pure action, one index per agent (agent order, 0-based).
pub type JointAction = Vec<usize>;

/// An n-player normal-form game with a Stackelberg priority ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixGameSpec {
    n: usize,
    action_counts: Vec<usize>,
    /// One payoff tensor per agent, row-major over the joint action with
    /// agent 0 as the most significant index.
    payoffs: Vec<Vec<f64>>,
    /// ordering[level] = agent id acting at that level (level 0 leads).
    ordering: Vec<usize>,
}

impl MatrixGameSpec {
    pub fn new(
        action_counts: Vec<usize>,
        payoffs: Vec<Vec<f64>>,
        ordering: Option<Vec<usize>>,
    ) -> Result<Self> {
        let n = action_counts.len();
        if n == 0 {
            return Err(Error::Game("game needs at least one agent".to_string()));
        }
        if action_counts.iter().any(|&k| k == 0) {
            return Err(Error::Game("every agent needs at least one action".to_string()));
        }
        let joint: usize = action_counts.iter().product();
        if joint > MAX_JOINT_ACTIONS {
            return Err(Error::Game(format!(
                "joint action space {joint} exceeds cap {MAX_JOINT_ACTIONS}"
            )));
        }
        if payoffs.len() != n {
            return Err(Error::Game(format!(
                "{} payoff tensors for {n} agents",
                payoffs.len()
            )));
        }
        for (i, p) in payoffs.iter().enumerate() {
            if p.len() != joint {
                return Err(Error::Game(format!(
                    "agent {i} payoff tensor has {} entries, expected {joint}",
                    p.len()
                )));
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::Game(format!("agent {i} payoff tensor not finite")));
            }
        }
        let ordering = ordering.unwrap_or_else(|| (0..n).collect());
        let mut seen = vec![false; n];
        if ordering.len() != n || ordering.iter().any(|&o| o >= n || std::mem::replace(&mut seen[o], true)) {
            return Err(Error::Game(format!(
                "ordering {ordering:?} is not a permutation of 0..{n}"
            )));
        }
        Ok(MatrixGameSpec {
            n,
            action_counts,
            payoffs,
            ordering,
        })
    }

    pub fn n_agents(&self) -> usize {
        self.n
    }

    pub fn action_counts(&self) -> &[usize] {
        &self.action_counts
    }

    pub fn ordering(&self) -> &[usize] {
        &self.ordering
    }

    pub fn with_ordering(&self, ordering: Vec<usize>) -> Result<Self> {
        MatrixGameSpec::new(self.action_counts.clone(), self.payoffs.clone(), Some(ordering))
    }

    pub fn payoff_tensor(&self, agent: usize) -> &[f64] {
        &self.payoffs[agent]
    }

    fn joint_index(&self, joint: &[usize]) -> usize {
        debug_assert_eq!(joint.len(), self.n);
        let mut idx = 0;
        for (a, &k) in joint.iter().zip(&self.action_counts) {
            debug_assert!(*a < k);
            idx = idx * k + a;
        }
        idx
    }

    pub fn payoff(&self, agent: usize, joint: &[usize]) -> f64 {
        self.payoffs[agent][self.joint_index(joint)]
    }

    pub fn payoff_vector(&self, joint: &[usize]) -> Vec<f64> {
        (0..self.n).map(|i| self.payoff(i, joint)).collect()
    }

    /// Iterate every joint action in lexicographic order.
    pub fn joint_actions(&self) -> JointActionIter<'_> {
        JointActionIter {
            counts: &self.action_counts,
            current: vec![0; self.n],
            done: false,
        }
    }

    /// Pure Nash equilibria: joint actions where no unilateral deviation
    /// strictly improves the deviator. Lexicographic order.
    pub fn enumerate_pure_ne(&self) -> Vec<JointAction> {
        let check = |joint: &JointAction| -> bool {
            let mut probe = joint.clone();
            for agent in 0..self.n {
                let here = self.payoff(agent, joint);
                for a in 0..self.action_counts[agent] {
                    if a == joint[agent] {
                        continue;
                    }
                    probe[agent] = a;
                    if self.payoff(agent, &probe) > here {
                        probe[agent] = joint[agent];
                        return false;
                    }
                }
                probe[agent] = joint[agent];
            }
            true
        };
        self.joint_actions().filter(check).collect()
    }
}

pub struct JointActionIter<'a> {
    counts: &'a [usize],
    current: Vec<usize>,
    done: bool,
}

impl Iterator for JointActionIter<'_> {
    type Item = JointAction;

    fn next(&mut self) -> Option<JointAction> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        // increment from the least significant (last) position
        let mut pos = self.counts.len();
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            self.current[pos] += 1;
            if self.current[pos] < self.counts[pos] {
                break;
            }
            self.current[pos] = 0;
        }
        Some(out)
    }
}

/// Output of the exact solver: the pure-NE set, the Stackelberg path found
/// by backward induction, its payoffs, and derived flags.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport {
    pub pure_ne: Vec<JointAction>,
    pub se_path: JointAction,
    pub se_payoffs: Vec<f64>,
    pub unique_ne: bool,
    pub unique_se: bool,
    /// SE payoffs weakly dominate every pure-NE payoff vector with at
    /// least one strict inequality. False when no pure NE exists.
    pub se_pareto_dominates_ne: bool,
}

/// Convenience: a 2-player game from two row-major matrices (rows = agent
/// 0's actions, cols = agent 1's).
pub fn bimatrix(rows: usize, cols: usize, a1: Vec<f64>, a2: Vec<f64>) -> Result<MatrixGameSpec> {
    MatrixGameSpec::new(vec![rows, cols], vec![a1, a2], None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prisoners_dilemma() -> MatrixGameSpec {
        // actions: 0 = cooperate, 1 = defect; T=5, R=3, P=1, S=0
        bimatrix(
            2,
            2,
            vec![3.0, 0.0, 5.0, 1.0],
            vec![3.0, 5.0, 0.0, 1.0],
        )
        .unwrap()
    }

    #[test]
    fn one_by_one_game_single_ne() {
        let g = MatrixGameSpec::new(vec![1], vec![vec![4.2]], None).unwrap();
        assert_eq!(g.enumerate_pure_ne(), vec![vec![0]]);
    }

    #[test]
    fn prisoners_dilemma_defect_defect() {
        let g = prisoners_dilemma();
        assert_eq!(g.enumerate_pure_ne(), vec![vec![1, 1]]);
    }

    #[test]
    fn matching_pennies_no_pure_ne() {
        let g = bimatrix(
            2,
            2,
            vec![1.0, -1.0, -1.0, 1.0],
            vec![-1.0, 1.0, 1.0, -1.0],
        )
        .unwrap();
        assert!(g.enumerate_pure_ne().is_empty());
    }

    #[test]
    fn ne_soundness_no_profitable_deviation() {
        // Every reported NE must survive a direct perturbation check.
        let g = prisoners_dilemma();
        for ne in g.enumerate_pure_ne() {
            for agent in 0..2 {
                for a in 0..2 {
                    let mut dev = ne.clone();
                    dev[agent] = a;
                    assert!(g.payoff(agent, &dev) <= g.payoff(agent, &ne));
                }
            }
        }
    }

    #[test]
    fn bad_ordering_rejected() {
        let e = MatrixGameSpec::new(
            vec![2, 2],
            vec![vec![0.0; 4], vec![0.0; 4]],
            Some(vec![0, 0]),
        );
        assert!(e.is_err());
    }

    #[test]
    fn payoff_tensor_size_checked() {
        let e = MatrixGameSpec::new(vec![2, 2], vec![vec![0.0; 3], vec![0.0; 4]], None);
        assert!(e.is_err());
    }

    #[test]
    fn joint_iter_covers_space_in_lex_order() {
        let g = MatrixGameSpec::new(
            vec![2, 3],
            vec![vec![0.0; 6], vec![0.0; 6]],
            None,
        )
        .unwrap();
        let all: Vec<_> = g.joint_actions().collect();
        assert_eq!(
            all,
            vec![
                vec![0, 0],
                vec![0, 1],
                vec![0, 2],
                vec![1, 0],
                vec![1, 1],
                vec![1, 2]
            ]
        );
    }
}
