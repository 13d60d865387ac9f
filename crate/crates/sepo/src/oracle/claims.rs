//! Claim verification against the exact solver.

use super::{stackelberg_se, MatrixGameSpec};
use crate::error::{Error, Result};

/// Checkable claims about a game's equilibrium structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClaimKind {
    /// Exactly one pure Nash equilibrium exists.
    UniqueNe,
    /// Backward induction finds the Stackelberg path without ties.
    UniqueSe,
    /// SE payoffs Pareto-dominate every pure-NE payoff vector.
    Pareto,
}

impl ClaimKind {
    /// Parse a CLI claim name. Mixed-strategy claims are recognized and
    /// rejected explicitly: this verifier covers pure equilibria only.
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "unique_ne" => Ok(ClaimKind::UniqueNe),
            "unique_se" => Ok(ClaimKind::UniqueSe),
            "pareto" => Ok(ClaimKind::Pareto),
            other if other.contains("mixed") => Err(Error::Game(format!(
                "unsupported claim `{other}`: mixed-strategy claims cannot be verified here \
                 (only 2-player support enumeration is available, via `oracle --mixed`)"
            ))),
            other => Err(Error::Game(format!(
                "unknown claim `{other}` (expected unique_ne, unique_se, pareto)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ClaimKind::UniqueNe => "unique_ne",
            ClaimKind::UniqueSe => "unique_se",
            ClaimKind::Pareto => "pareto",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClaimOutcome {
    pub kind: ClaimKind,
    pub pass: bool,
    pub note: String,
}

#[derive(Debug, Clone)]
pub struct ClaimReport {
    pub outcomes: Vec<ClaimOutcome>,
}

impl ClaimReport {
    pub fn all_pass(&self) -> bool {
        self.outcomes.iter().all(|o| o.pass)
    }
}

/// Check each claim against the solver's report.
pub fn verify_claims(game: &MatrixGameSpec, claims: &[ClaimKind]) -> Result<ClaimReport> {
    let report = stackelberg_se(game)?;
    let outcomes = claims
        .iter()
        .map(|&kind| {
            let (pass, note) = match kind {
                ClaimKind::UniqueNe => {
                    if report.pure_ne.is_empty() {
                        (
                            false,
                            "vacuous: no pure NE exists (mixed equilibria not considered)"
                                .to_string(),
                        )
                    } else {
                        (
                            report.unique_ne,
                            format!("{} pure NE found", report.pure_ne.len()),
                        )
                    }
                }
                ClaimKind::UniqueSe => (
                    report.unique_se,
                    if report.unique_se {
                        "no tie on the induction path".to_string()
                    } else {
                        "tie-break was used on the induction path".to_string()
                    },
                ),
                ClaimKind::Pareto => {
                    if report.pure_ne.is_empty() {
                        (
                            false,
                            "vacuous: no pure NE exists to dominate".to_string(),
                        )
                    } else {
                        (
                            report.se_pareto_dominates_ne,
                            format!(
                                "SE payoffs {:?} vs {} pure NE",
                                report.se_payoffs,
                                report.pure_ne.len()
                            ),
                        )
                    }
                }
            };
            ClaimOutcome { kind, pass, note }
        })
        .collect();
    Ok(ClaimReport { outcomes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::bimatrix;

    #[test]
    fn unsupported_mixed_claim_is_an_error() {
        assert!(ClaimKind::parse("unique_mixed_ne").is_err());
        assert!(ClaimKind::parse("nonsense").is_err());
        assert_eq!(ClaimKind::parse("pareto").unwrap(), ClaimKind::Pareto);
    }

    #[test]
    fn matching_pennies_unique_ne_claim_vacuous_fails() {
        let g = bimatrix(
            2,
            2,
            vec![1.0, -1.0, -1.0, 1.0],
            vec![-1.0, 1.0, 1.0, -1.0],
        )
        .unwrap();
        let r = verify_claims(&g, &[ClaimKind::UniqueNe]).unwrap();
        assert!(!r.all_pass());
        assert!(r.outcomes[0].note.contains("no pure NE"));
    }
}
