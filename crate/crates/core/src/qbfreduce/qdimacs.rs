use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantifier {
    Exists,
    Forall,
}

/// Prenex CNF formula. Variables are numbered from 1; a literal is a
/// nonzero signed variable number.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QbfFormula {
    pub prefix: Vec<(Quantifier, u32)>,
    pub clauses: Vec<Vec<i32>>,
}

impl QbfFormula {
    pub fn variable_count(&self) -> usize {
        self.prefix.len()
    }

    pub fn count(&self, q: Quantifier) -> usize {
        self.prefix.iter().filter(|(k, _)| *k == q).count()
    }
}

impl fmt::Display for QbfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (q, v) in &self.prefix {
            let sym = match q {
                Quantifier::Exists => '∃',
                Quantifier::Forall => '∀',
            };
            write!(f, "{sym}x{v}")?;
        }
        f.write_str(".")?;
        for (i, clause) in self.clauses.iter().enumerate() {
            if i > 0 {
                f.write_str("∧")?;
            }
            let lits: Vec<String> = clause
                .iter()
                .map(|&l| if l < 0 { format!("¬x{}", -l) } else { format!("x{l}") })
                .collect();
            write!(f, "({})", lits.join("∨"))?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {kind}")]
pub struct QdimacsError {
    pub line: usize,
    pub kind: QdimacsErrorKind,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QdimacsErrorKind {
    #[error("missing or malformed `p cnf <vars> <clauses>` header")]
    Header,
    #[error("token {0:?} is not an integer")]
    NotAnInteger(String),
    #[error("line does not end with 0")]
    MissingTerminator,
    #[error("variable {var} outside 1..={max}")]
    VariableOutOfRange { var: u32, max: u32 },
    #[error("variable {0} quantified twice")]
    Requantified(u32),
    #[error("quantifier line after the first clause")]
    LateQuantifier,
    #[error("free variable {0}")]
    FreeVariable(u32),
    #[error("empty clause")]
    EmptyClause,
    #[error("header announces {expected} clauses, found {found}")]
    ClauseCount { expected: usize, found: usize },
    #[error("no quantified variables")]
    EmptyPrefix,
}

fn ints(tokens: &[&str], line: usize) -> Result<Vec<i64>, QdimacsError> {
    let values = tokens
        .iter()
        .map(|t| {
            t.parse::<i64>().map_err(|_| QdimacsError {
                line,
                kind: QdimacsErrorKind::NotAnInteger((*t).to_owned()),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.last() != Some(&0) {
        return Err(QdimacsError {
            line,
            kind: QdimacsErrorKind::MissingTerminator,
        });
    }
    Ok(values[..values.len() - 1].to_vec())
}

/// Reads the QDIMACS subset: comments, the `p cnf` header, `e`/`a`
/// quantifier lines and one clause per line, each ending in 0.
pub fn parse_qdimacs(text: &str) -> Result<QbfFormula, QdimacsError> {
    let mut header: Option<(u32, usize)> = None;
    let mut prefix: Vec<(Quantifier, u32)> = Vec::new();
    let mut clauses: Vec<Vec<i32>> = Vec::new();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        let err = |kind| QdimacsError { line, kind };
        match tokens.first().copied() {
            None | Some("c") => continue,
            Some("p") => {
                let parsed = match tokens.as_slice() {
                    ["p", "cnf", n, m] => n.parse().ok().zip(m.parse().ok()),
                    _ => None,
                };
                if header.is_some() || parsed.is_none() {
                    return Err(err(QdimacsErrorKind::Header));
                }
                header = parsed;
            }
            Some(q @ ("e" | "a")) => {
                let (n, _) = header.ok_or_else(|| err(QdimacsErrorKind::Header))?;
                if !clauses.is_empty() {
                    return Err(err(QdimacsErrorKind::LateQuantifier));
                }
                let quant = if q == "e" {
                    Quantifier::Exists
                } else {
                    Quantifier::Forall
                };
                for v in ints(&tokens[1..], line)? {
                    if v < 1 || v > i64::from(n) {
                        return Err(err(QdimacsErrorKind::VariableOutOfRange {
                            var: v.unsigned_abs() as u32,
                            max: n,
                        }));
                    }
                    let v = v as u32;
                    if prefix.iter().any(|&(_, w)| w == v) {
                        return Err(err(QdimacsErrorKind::Requantified(v)));
                    }
                    prefix.push((quant, v));
                }
            }
            Some(_) => {
                let (n, _) = header.ok_or_else(|| err(QdimacsErrorKind::Header))?;
                let lits = ints(&tokens, line)?;
                if lits.is_empty() {
                    return Err(err(QdimacsErrorKind::EmptyClause));
                }
                let mut clause = Vec::with_capacity(lits.len());
                for l in lits {
                    let var = l.unsigned_abs();
                    if var > u64::from(n) {
                        return Err(err(QdimacsErrorKind::VariableOutOfRange {
                            var: var.min(u64::from(u32::MAX)) as u32,
                            max: n,
                        }));
                    }
                    if !prefix.iter().any(|&(_, w)| u64::from(w) == var) {
                        return Err(err(QdimacsErrorKind::FreeVariable(var as u32)));
                    }
                    clause.push(l as i32);
                }
                clauses.push(clause);
            }
        }
    }
    let Some((_, m)) = header else {
        return Err(QdimacsError {
            line: last_line.max(1),
            kind: QdimacsErrorKind::Header,
        });
    };
    if clauses.len() != m {
        return Err(QdimacsError {
            line: last_line,
            kind: QdimacsErrorKind::ClauseCount {
                expected: m,
                found: clauses.len(),
            },
        });
    }
    if prefix.is_empty() {
        return Err(QdimacsError {
            line: last_line,
            kind: QdimacsErrorKind::EmptyPrefix,
        });
    }
    Ok(QbfFormula { prefix, clauses })
}
