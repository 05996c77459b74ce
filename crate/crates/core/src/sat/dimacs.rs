use std::fmt::Write as _;

use thiserror::Error;

use super::Lit;

/// Plain clause list.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Cnf {
    pub num_vars: usize,
    pub clauses: Vec<Vec<Lit>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DimacsError {
    #[error("line {line}: missing or malformed `p cnf` header")]
    Header { line: usize },
    #[error("line {line}: `{token}` is not an integer")]
    Token { line: usize, token: String },
    #[error("line {line}: literal {lit} exceeds declared variable count {num_vars}")]
    VarRange {
        line: usize,
        lit: i64,
        num_vars: usize,
    },
    #[error("unterminated clause at end of input")]
    Unterminated,
}

pub fn parse_dimacs(text: &str) -> Result<Cnf, DimacsError> {
    let mut num_vars = None;
    let mut clauses = Vec::new();
    let mut current = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') || trimmed.starts_with('%') {
            continue;
        }
        if trimmed.starts_with('p') {
            let parts: Vec<&str> = trimmed.split_whitespace().collect();
            if parts.len() != 4 || parts[1] != "cnf" {
                return Err(DimacsError::Header { line });
            }
            num_vars = Some(parts[2].parse().map_err(|_| DimacsError::Header { line })?);
            continue;
        }
        let Some(n) = num_vars else {
            return Err(DimacsError::Header { line });
        };
        for tok in trimmed.split_whitespace() {
            let x: i64 = tok.parse().map_err(|_| DimacsError::Token {
                line,
                token: tok.to_string(),
            })?;
            match Lit::from_dimacs(x) {
                None => clauses.push(std::mem::take(&mut current)),
                Some(l) => {
                    if l.var().index() >= n {
                        return Err(DimacsError::VarRange {
                            line,
                            lit: x,
                            num_vars: n,
                        });
                    }
                    current.push(l);
                }
            }
        }
    }
    if !current.is_empty() {
        return Err(DimacsError::Unterminated);
    }
    Ok(Cnf {
        num_vars: num_vars.unwrap_or(0),
        clauses,
    })
}

/// Serializes `cnf`, prefixing each line of `comments` with `c `.
pub fn write_dimacs(cnf: &Cnf, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "c {c}");
    }
    let _ = writeln!(out, "p cnf {} {}", cnf.num_vars, cnf.clauses.len());
    for clause in &cnf.clauses {
        for l in clause {
            let _ = write!(out, "{} ", l.to_dimacs());
        }
        out.push_str("0\n");
    }
    out
}
