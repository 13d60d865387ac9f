//! N-level Stackelberg equilibrium by backward induction.
//!
//! Level 0 (the leader, `ordering[0]`) commits first; every deeper level
//! best-responds to the committed prefix, anticipating the responses below
//! it. Ties are broken toward the lexicographically lowest action index,
//! and any tie on the equilibrium path clears `unique_se`.

use super::{EquilibriumReport, JointAction, MatrixGameSpec};
use crate::error::Result;

/// Full solve: backward induction for the SE path plus pure-NE enumeration
/// for the report flags.
pub fn stackelberg_se(game: &MatrixGameSpec) -> Result<EquilibriumReport> {
    let n = game.n_agents();
    let mut prefix: Vec<Option<usize>> = vec![None; n];
    let solved = induct(game, 0, &mut prefix);

    let pure_ne = game.enumerate_pure_ne();
    let se_payoffs = game.payoff_vector(&solved.joint);
    let unique_ne = pure_ne.len() == 1;
    let se_pareto_dominates_ne = !pure_ne.is_empty()
        && pure_ne.iter().all(|ne| {
            let p = game.payoff_vector(ne);
            let weak = se_payoffs.iter().zip(&p).all(|(s, q)| s >= q);
            let strict = se_payoffs.iter().zip(&p).any(|(s, q)| s > q);
            weak && strict
        });

    Ok(EquilibriumReport {
        pure_ne,
        se_path: solved.joint,
        se_payoffs,
        unique_ne,
        unique_se: !solved.tie_on_path,
        se_pareto_dominates_ne,
    })
}

struct Solved {
    joint: JointAction,
    /// Payoff per agent at the resolved leaf.
    payoffs: Vec<f64>,
    /// A tie occurred at this level or deeper along the chosen branch.
    tie_on_path: bool,
}

fn induct(game: &MatrixGameSpec, level: usize, prefix: &mut Vec<Option<usize>>) -> Solved {
    let n = game.n_agents();
    if level == n {
        let joint: JointAction = prefix.iter().map(|a| a.unwrap()).collect();
        let payoffs = game.payoff_vector(&joint);
        return Solved {
            joint,
            payoffs,
            tie_on_path: false,
        };
    }
    let agent = game.ordering()[level];
    let mut best: Option<Solved> = None;
    let mut tie_at_best = false;
    for a in 0..game.action_counts()[agent] {
        prefix[agent] = Some(a);
        let sub = induct(game, level + 1, prefix);
        prefix[agent] = None;
        match &best {
            None => best = Some(sub),
            Some(cur) => {
                if sub.payoffs[agent] > cur.payoffs[agent] {
                    best = Some(sub);
                    tie_at_best = false;
                } else if sub.payoffs[agent] == cur.payoffs[agent] {
                    // keep the earlier (lower-index) action, note the tie
                    tie_at_best = true;
                }
            }
        }
    }
    let mut chosen = best.expect("agents have at least one action");
    chosen.tie_on_path |= tie_at_best;
    chosen
}
