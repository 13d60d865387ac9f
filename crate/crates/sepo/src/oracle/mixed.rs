//! Mixed-equilibrium support enumeration for 2-player games up to 3x3.
//!
//! For every pair of equal-size supports, solve the indifference system
//! for each side, then keep candidates that are feasible (probabilities
//! nonnegative, off-support actions not profitable) at a 1e-9 tolerance.
//! Singular-but-feasible systems flag the game as degenerate.

use super::MatrixGameSpec;
use crate::error::{Error, Result};

const TOL: f64 = 1e-9;

/// A mixed profile: one probability vector per player.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedProfile {
    pub row_strategy: Vec<f64>,
    pub col_strategy: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedReport {
    pub profiles: Vec<MixedProfile>,
    /// Some support system was singular yet feasible: the game has a
    /// continuum of equilibria and the listed profiles are representatives.
    pub degenerate: bool,
}

/// Support enumeration over equal-size supports. 2-player, actions <= 3.
pub fn enumerate_mixed_ne_2p(game: &MatrixGameSpec) -> Result<MixedReport> {
    if game.n_agents() != 2 {
        return Err(Error::Game(format!(
            "mixed enumeration supports exactly 2 players, got {}",
            game.n_agents()
        )));
    }
    let m = game.action_counts()[0];
    let n = game.action_counts()[1];
    if m > 3 || n > 3 {
        return Err(Error::Game(format!(
            "mixed enumeration capped at 3x3, got {m}x{n}"
        )));
    }
    let a1 = |i: usize, j: usize| game.payoff(0, &[i, j]);
    let a2 = |i: usize, j: usize| game.payoff(1, &[i, j]);

    let mut profiles: Vec<MixedProfile> = Vec::new();
    let mut degenerate = false;

    for size in 1..=m.min(n) {
        for s1 in subsets(m, size) {
            for s2 in subsets(n, size) {
                let (ys, y_singular) = indifference_solutions(&s1, &s2, n, |i, j| a1(i, j));
                let (xs, x_singular) = indifference_solutions(&s2, &s1, m, |j, i| a2(i, j));
                if y_singular || x_singular {
                    degenerate = true;
                }
                for x in &xs {
                    for y in &ys {
                        if is_mixed_ne(game, x, y) {
                            push_unique(&mut profiles, x, y);
                        }
                    }
                }
            }
        }
    }

    Ok(MixedReport {
        profiles,
        degenerate,
    })
}

/// Candidate strategies for the *opponent* (over `opp_support`, embedded in
/// a length-`opp_len` vector) that make `own_support` indifferent under the
/// payoff accessor `pay(own, opp)`. Returns (candidates, singular).
fn indifference_solutions(
    own_support: &[usize],
    opp_support: &[usize],
    opp_len: usize,
    pay: impl Fn(usize, usize) -> f64,
) -> (Vec<Vec<f64>>, bool) {
    let s = opp_support.len();
    // rows: s-1 indifference equations + normalization
    let mut a = vec![vec![0.0; s]; s];
    let mut b = vec![0.0; s];
    for (r, pair) in own_support.windows(2).enumerate() {
        for (c, &j) in opp_support.iter().enumerate() {
            a[r][c] = pay(pair[0], j) - pay(pair[1], j);
        }
        b[r] = 0.0;
    }
    for c in 0..s {
        a[s - 1][c] = 1.0;
    }
    b[s - 1] = 1.0;

    match solve_linear(a, b) {
        Solution::Unique(sol) => {
            if sol.iter().any(|&p| p < -TOL) {
                return (Vec::new(), false);
            }
            let mut full = vec![0.0; opp_len];
            for (&j, &p) in opp_support.iter().zip(&sol) {
                full[j] = p.max(0.0);
            }
            (vec![full], false)
        }
        Solution::Singular => {
            // Underdetermined: offer the uniform-on-support representative
            // and let the NE verification decide.
            let mut full = vec![0.0; opp_len];
            for &j in opp_support {
                full[j] = 1.0 / s as f64;
            }
            (vec![full], true)
        }
        Solution::Inconsistent => (Vec::new(), false),
    }
}

enum Solution {
    Unique(Vec<f64>),
    Singular,
    Inconsistent,
}

/// Gaussian elimination with partial pivoting on a tiny system.
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Solution {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot][col].abs() < 1e-12 {
            // check consistency of the remaining rows
            for r in col..n {
                if a[r].iter().all(|v| v.abs() < 1e-12) && b[r].abs() > 1e-9 {
                    return Solution::Inconsistent;
                }
            }
            return Solution::Singular;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut s = b[col];
        for c in col + 1..n {
            s -= a[col][c] * x[c];
        }
        x[col] = s / a[col][col];
    }
    Solution::Unique(x)
}

/// Direct epsilon check: both strategies valid distributions and no pure
/// deviation improves either player by more than TOL.
pub fn is_mixed_ne(game: &MatrixGameSpec, x: &[f64], y: &[f64]) -> bool {
    let m = game.action_counts()[0];
    let n = game.action_counts()[1];
    if x.len() != m || y.len() != n {
        return false;
    }
    let valid = |p: &[f64]| {
        p.iter().all(|&v| v >= -TOL) && (p.iter().sum::<f64>() - 1.0).abs() < 1e-6
    };
    if !valid(x) || !valid(y) {
        return false;
    }
    let u1: f64 = (0..m)
        .map(|i| x[i] * (0..n).map(|j| y[j] * game.payoff(0, &[i, j])).sum::<f64>())
        .sum();
    let u2: f64 = (0..m)
        .map(|i| x[i] * (0..n).map(|j| y[j] * game.payoff(1, &[i, j])).sum::<f64>())
        .sum();
    for i in 0..m {
        let dev: f64 = (0..n).map(|j| y[j] * game.payoff(0, &[i, j])).sum();
        if dev > u1 + TOL.max(1e-7) {
            return false;
        }
    }
    for j in 0..n {
        let dev: f64 = (0..m).map(|i| x[i] * game.payoff(1, &[i, j])).sum();
        if dev > u2 + TOL.max(1e-7) {
            return false;
        }
    }
    true
}

fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 1u32..(1 << n) {
        if mask.count_ones() as usize == size {
            out.push((0..n).filter(|i| mask & (1 << i) != 0).collect());
        }
    }
    out
}

fn push_unique(profiles: &mut Vec<MixedProfile>, x: &[f64], y: &[f64]) {
    let close = |a: &[f64], b: &[f64]| {
        a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max) < 1e-6
    };
    if !profiles
        .iter()
        .any(|p| close(&p.row_strategy, x) && close(&p.col_strategy, y))
    {
        profiles.push(MixedProfile {
            row_strategy: x.to_vec(),
            col_strategy: y.to_vec(),
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::bimatrix;

    #[test]
    fn matching_pennies_unique_half_half() {
        let g = bimatrix(
            2,
            2,
            vec![1.0, -1.0, -1.0, 1.0],
            vec![-1.0, 1.0, 1.0, -1.0],
        )
        .unwrap();
        let r = enumerate_mixed_ne_2p(&g).unwrap();
        assert_eq!(r.profiles.len(), 1);
        assert!(!r.degenerate);
        let p = &r.profiles[0];
        for v in p.row_strategy.iter().chain(&p.col_strategy) {
            assert!((v - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn all_zero_payoffs_flagged_degenerate_with_verified_profiles() {
        let g = bimatrix(2, 2, vec![0.0; 4], vec![0.0; 4]).unwrap();
        let r = enumerate_mixed_ne_2p(&g).unwrap();
        assert!(r.degenerate);
        assert!(!r.profiles.is_empty());
        for p in &r.profiles {
            assert!(is_mixed_ne(&g, &p.row_strategy, &p.col_strategy));
        }
    }

    #[test]
    fn rejects_three_players_and_large_games() {
        let g3 = MatrixGameSpec::new(
            vec![2, 2, 2],
            vec![vec![0.0; 8], vec![0.0; 8], vec![0.0; 8]],
            None,
        )
        .unwrap();
        assert!(enumerate_mixed_ne_2p(&g3).is_err());
        let big = bimatrix(4, 2, vec![0.0; 8], vec![0.0; 8]).unwrap();
        assert!(enumerate_mixed_ne_2p(&big).is_err());
    }
}
