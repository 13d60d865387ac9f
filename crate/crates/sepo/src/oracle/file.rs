//! Plain-text game files.
//!
//! Format: a header line `n k1 k2 ... kn`, then one payoff tensor per agent
//! in row-major order (whitespace separated, newlines free). `#` starts a
//! comment anywhere on a line. The agent ordering is the header order.

use std::path::Path;

use super::MatrixGameSpec;
use crate::error::{Error, Result};

pub fn parse_game_file(text: &str) -> Result<MatrixGameSpec> {
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split_whitespace())
        .map(str::to_string)
        .collect::<Vec<_>>()
        .into_iter();

    let n: usize = next_token(&mut tokens, "agent count")?
        .parse()
        .map_err(|_| Error::Parse("agent count must be an integer".to_string()))?;
    if n == 0 {
        return Err(Error::Parse("agent count must be positive".to_string()));
    }
    let mut counts = Vec::with_capacity(n);
    for i in 0..n {
        let k: usize = next_token(&mut tokens, &format!("action count {}", i + 1))?
            .parse()
            .map_err(|_| Error::Parse(format!("action count {} must be an integer", i + 1)))?;
        counts.push(k);
    }
    let joint: usize = counts.iter().product();
    let mut payoffs = Vec::with_capacity(n);
    for agent in 0..n {
        let mut tensor = Vec::with_capacity(joint);
        for e in 0..joint {
            let v: f64 = next_token(&mut tokens, &format!("payoff {e} of agent {agent}"))?
                .parse()
                .map_err(|_| {
                    Error::Parse(format!("payoff {e} of agent {agent} is not a number"))
                })?;
            tensor.push(v);
        }
        payoffs.push(tensor);
    }
    if tokens.next().is_some() {
        return Err(Error::Parse("trailing values after the last payoff tensor".to_string()));
    }
    MatrixGameSpec::new(counts, payoffs, None).map_err(|e| Error::Parse(e.to_string()))
}

fn next_token<I: Iterator<Item = String>>(it: &mut I, what: &str) -> Result<String> {
    it.next()
        .ok_or_else(|| Error::Parse(format!("game file ended before {what}")))
}

pub fn read_game_file(path: &Path) -> Result<MatrixGameSpec> {
    let text = std::fs::read_to_string(path)?;
    parse_game_file(&text)
}

pub fn write_game_file(game: &MatrixGameSpec) -> String {
    let mut out = String::new();
    out.push_str(&format!("{}", game.n_agents()));
    for k in game.action_counts() {
        out.push_str(&format!(" {k}"));
    }
    out.push('\n');
    for agent in 0..game.n_agents() {
        out.push_str(&format!("# agent {} payoffs\n", agent + 1));
        let tensor = game.payoff_tensor(agent);
        let cols = *game.action_counts().last().unwrap();
        for row in tensor.chunks(cols) {
            let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_comments() {
        let text = "# a 2x2 game\n2 2 2\n1 2 3 4  # agent 1\n5 6\n7 8\n";
        let g = parse_game_file(text).unwrap();
        assert_eq!(g.n_agents(), 2);
        assert_eq!(g.payoff(0, &[1, 0]), 3.0);
        assert_eq!(g.payoff(1, &[1, 1]), 8.0);
    }

    #[test]
    fn roundtrip() {
        let g = crate::oracle::bimatrix(
            2,
            3,
            vec![1.5, -2.0, 0.0, 3.25, 4.0, -0.5],
            vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
        )
        .unwrap();
        let text = write_game_file(&g);
        let g2 = parse_game_file(&text).unwrap();
        assert_eq!(g, g2);
    }

    #[test]
    fn one_by_one_game() {
        let g = parse_game_file("1 1\n42\n").unwrap();
        assert_eq!(g.n_agents(), 1);
        assert_eq!(g.enumerate_pure_ne(), vec![vec![0]]);
    }

    #[test]
    fn truncated_file_errors() {
        assert!(parse_game_file("2 2 2\n1 2 3\n").is_err());
        assert!(parse_game_file("").is_err());
        assert!(parse_game_file("2 2 2\n1 2 3 4 5 6 7 8 9\n").is_err());
    }
}
