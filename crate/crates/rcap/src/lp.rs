//! Minimal CPLEX-LP reader covering the dialect the exporter emits; used
//! for round-trip fidelity checks.

use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, thiserror::Error)]
pub enum LpError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing section {0}")]
    MissingSection(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpSense {
    Le,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub name: String,
    pub terms: BTreeMap<String, f64>,
    pub sense: LpSense,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpFile {
    pub objective: BTreeMap<String, f64>,
    pub rows: Vec<LpRow>,
    pub binaries: BTreeSet<String>,
}

fn parse_terms(body: &str, line: usize) -> Result<BTreeMap<String, f64>, LpError> {
    let mut terms = BTreeMap::new();
    let tokens: Vec<&str> = body.split_whitespace().collect();
    let mut idx = 0;
    let mut sign = 1.0;
    while idx < tokens.len() {
        match tokens[idx] {
            "+" => sign = 1.0,
            "-" => sign = -1.0,
            token => {
                let coeff: f64 = token.parse().map_err(|_| LpError::Parse {
                    line,
                    message: format!("expected coefficient, got {token:?}"),
                })?;
                let var = tokens.get(idx + 1).ok_or_else(|| LpError::Parse {
                    line,
                    message: "coefficient without variable".to_string(),
                })?;
                terms.insert(var.to_string(), sign * coeff);
                sign = 1.0;
                idx += 1;
            }
        }
        idx += 1;
    }
    Ok(terms)
}

pub fn parse_lp(text: &str) -> Result<LpFile, LpError> {
    #[derive(PartialEq)]
    enum Section {
        Preamble,
        Objective,
        Rows,
        Binary,
        Done,
    }
    let mut section = Section::Preamble;
    let mut objective = BTreeMap::new();
    let mut rows = Vec::new();
    let mut binaries = BTreeSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('\\') {
            continue;
        }
        match content {
            "Minimize" => {
                section = Section::Objective;
                continue;
            }
            "Subject To" => {
                section = Section::Rows;
                continue;
            }
            "Binary" => {
                section = Section::Binary;
                continue;
            }
            "End" => {
                section = Section::Done;
                continue;
            }
            _ => {}
        }
        match section {
            Section::Objective => {
                let body = content.split_once(':').map(|(_, b)| b).unwrap_or(content);
                if body.trim() == "0 dummy_zero" {
                    continue;
                }
                objective.extend(parse_terms(body, line)?);
            }
            Section::Rows => {
                let (name, body) = content.split_once(':').ok_or_else(|| LpError::Parse {
                    line,
                    message: "row without name".to_string(),
                })?;
                let (lhs, sense, rhs) = if let Some((lhs, rhs)) = body.split_once("<=") {
                    (lhs, LpSense::Le, rhs)
                } else if let Some((lhs, rhs)) = body.split_once(">=") {
                    (lhs, LpSense::Ge, rhs)
                } else {
                    return Err(LpError::Parse { line, message: "row without sense".to_string() });
                };
                rows.push(LpRow {
                    name: name.trim().to_string(),
                    terms: parse_terms(lhs, line)?,
                    sense,
                    rhs: rhs.trim().parse().map_err(|_| LpError::Parse {
                        line,
                        message: format!("bad right-hand side {rhs:?}"),
                    })?,
                });
            }
            Section::Binary => {
                binaries.insert(content.to_string());
            }
            Section::Preamble | Section::Done => {
                return Err(LpError::Parse { line, message: format!("unexpected content {content:?}") });
            }
        }
    }

    if section != Section::Done {
        return Err(LpError::MissingSection("End"));
    }
    Ok(LpFile { objective, rows, binaries })
}
