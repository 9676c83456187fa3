//! Belief tables: one column per allocator, one row per proposition, plus
//! the uncertainty and normalization-factor rows.

use std::collections::HashSet;

use serde_json::{json, Map, Value};

use super::{Allocator, JustificationFrame, MassAllocation};
use crate::error::{Error, Result};
use crate::evidence::QuantitativeEvidenceFrame;
use crate::rational::Rational;
use crate::sets::{StateSet, StateUniverse};

/// A proposition, i.e. a set of states.
pub type Proposition = StateSet;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BeliefRow {
    pub proposition: StateSet,
    /// One belief per allocator, in report column order.
    pub beliefs: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BeliefReport {
    pub justification: String,
    pub allocators: Vec<String>,
    pub rows: Vec<BeliefRow>,
    /// `δ_J` of the full state set, per allocator.
    pub uncertainty: Vec<Rational>,
    pub normalization: Vec<Rational>,
}

/// Computes `Bel_J(f, P)` for every allocator and proposition.
pub fn belief_report(
    frame: &QuantitativeEvidenceFrame,
    allocators: &[Allocator],
    j: &JustificationFrame,
    propositions: &[Proposition],
) -> Result<BeliefReport> {
    j.ensure_over(frame)?;
    let mut labels = HashSet::new();
    for a in allocators {
        if !labels.insert(a.label()) {
            return Err(Error::DuplicateName(a.label().to_string()));
        }
    }
    for p in propositions {
        frame.universe().ensure_same(p.universe())?;
    }
    let masses = allocators
        .iter()
        .map(|a| MassAllocation::new(frame, a))
        .collect::<Result<Vec<_>>>()?;
    let full = frame.universe().full_set();
    let rows = propositions
        .iter()
        .map(|p| {
            Ok(BeliefRow {
                proposition: p.clone(),
                beliefs: masses.iter().map(|m| m.bel(j, p)).collect::<Result<_>>()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BeliefReport {
        justification: j.label().to_string(),
        allocators: allocators.iter().map(|a| a.label().to_string()).collect(),
        rows,
        uncertainty: masses.iter().map(|m| m.delta_j(j, &full)).collect::<Result<_>>()?,
        normalization: masses
            .iter()
            .map(|m| m.normalization_factor(j))
            .collect::<Result<_>>()?,
    })
}

fn render(value: &Rational, precision: usize, exact: bool) -> String {
    if exact {
        value.to_string()
    } else {
        value.to_decimal(precision)
    }
}

pub(crate) fn cell(value: &Rational, precision: usize) -> Value {
    json!({
        "num": value.numer().to_string(),
        "den": value.denom().to_string(),
        "rendered": value.to_decimal(precision),
    })
}

fn read_cell(value: &Value) -> Result<Rational> {
    let bad = || Error::MalformedDocument(format!("bad report cell {value}"));
    let part = |key: &str| value.get(key).and_then(Value::as_str).ok_or_else(bad);
    let num = Rational::parse(part("num")?).map_err(|_| bad())?;
    let den = Rational::parse(part("den")?).map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(num / den)
}

impl BeliefReport {
    /// Aligned text table. `exact` prints `n/d` instead of decimals.
    pub fn to_table(&self, precision: usize, exact: bool) -> String {
        let mut lines: Vec<Vec<String>> = Vec::new();
        let mut header = vec!["Proposition".to_string(), "P".to_string()];
        header.extend(self.allocators.iter().cloned());
        lines.push(header);
        for (k, row) in self.rows.iter().enumerate() {
            let mut line = vec![format!("({})", k + 1), row.proposition.to_string()];
            line.extend(row.beliefs.iter().map(|b| render(b, precision, exact)));
            lines.push(line);
        }
        let mut unc = vec!["Uncertainty".to_string(), "S".to_string()];
        unc.extend(self.uncertainty.iter().map(|b| render(b, precision, exact)));
        lines.push(unc);
        let mut nf = vec!["N.f.".to_string(), self.justification.clone()];
        nf.extend(self.normalization.iter().map(|b| render(b, precision, exact)));
        lines.push(nf);
        format_columns(&lines, 2)
    }

    pub fn to_json(&self, precision: usize) -> Value {
        let per_alloc = |values: &[Rational]| {
            let mut map = Map::new();
            for (label, v) in self.allocators.iter().zip(values) {
                map.insert(label.clone(), cell(v, precision));
            }
            Value::Object(map)
        };
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                json!({
                    "proposition": r.proposition.names(),
                    "beliefs": per_alloc(&r.beliefs),
                })
            })
            .collect();
        json!({
            "justification": self.justification,
            "allocators": self.allocators,
            "rows": rows,
            "uncertainty": per_alloc(&self.uncertainty),
            "normalization": per_alloc(&self.normalization),
        })
    }

    /// Reads a report written by [`BeliefReport::to_json`], recovering the
    /// exact values from the `num`/`den` fields.
    pub fn from_json(value: &Value, universe: &StateUniverse) -> Result<Self> {
        let bad = |what: &str| Error::MalformedDocument(format!("report: {what}"));
        let justification = value
            .get("justification")
            .and_then(Value::as_str)
            .ok_or_else(|| bad("missing justification"))?
            .to_string();
        let allocators: Vec<String> = value
            .get("allocators")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing allocators"))?
            .iter()
            .map(|v| v.as_str().map(str::to_string).ok_or_else(|| bad("allocator name")))
            .collect::<Result<_>>()?;
        let per_alloc = |v: Option<&Value>, what: &str| -> Result<Vec<Rational>> {
            let obj = v.and_then(Value::as_object).ok_or_else(|| bad(what))?;
            allocators
                .iter()
                .map(|a| read_cell(obj.get(a).ok_or_else(|| bad(what))?))
                .collect()
        };
        let rows = value
            .get("rows")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing rows"))?
            .iter()
            .map(|r| {
                let names: Vec<&str> = r
                    .get("proposition")
                    .and_then(Value::as_array)
                    .ok_or_else(|| bad("proposition"))?
                    .iter()
                    .map(|n| n.as_str().ok_or_else(|| bad("state name")))
                    .collect::<Result<_>>()?;
                Ok(BeliefRow {
                    proposition: universe.set(names)?,
                    beliefs: per_alloc(r.get("beliefs"), "beliefs")?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BeliefReport {
            justification,
            rows,
            uncertainty: per_alloc(value.get("uncertainty"), "uncertainty")?,
            normalization: per_alloc(value.get("normalization"), "normalization")?,
            allocators,
        })
    }
}

/// Left-aligns the first two columns and right-aligns the rest.
pub(crate) fn format_columns(lines: &[Vec<String>], left_aligned: usize) -> String {
    let cols = lines.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            lines
                .iter()
                .filter_map(|l| l.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for line in lines {
        let mut text = String::new();
        for (c, value) in line.iter().enumerate() {
            if c > 0 {
                text.push_str("  ");
            }
            let pad = widths[c] - value.chars().count();
            if c < left_aligned {
                text.push_str(value);
                text.extend(std::iter::repeat_n(' ', pad));
            } else {
                text.extend(std::iter::repeat_n(' ', pad));
                text.push_str(value);
            }
        }
        out.push_str(text.trim_end());
        out.push('\n');
    }
    out
}
