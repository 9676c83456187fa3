//! Quantitative evidence frames: named evidence sets with exact certainties.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::sets::{members, StateSet, StateUniverse};
use crate::topology::{topology_from_masks, Neighborhoods, Topology};

/// Frames address their items with a 64-bit member mask.
pub const MAX_ITEMS: usize = 64;

/// One piece of evidence: its content and how certain the agent is of it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvidenceItem {
    pub name: String,
    pub content: StateSet,
    pub certainty: Rational,
}

/// A state universe together with an ordered list of evidence items.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantitativeEvidenceFrame {
    universe: StateUniverse,
    items: Vec<EvidenceItem>,
}

/// A violated frame invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FrameViolation {
    NoEvidence,
    TooManyItems(usize),
    DuplicateName(String),
    EmptyEvidence(String),
    FullSetEvidence(String),
    CertaintyOutOfRange { name: String, value: Rational },
    UniverseMismatch(String),
}

impl From<FrameViolation> for Error {
    fn from(v: FrameViolation) -> Self {
        match v {
            FrameViolation::NoEvidence => Error::EmptyEvidenceList,
            FrameViolation::TooManyItems(n) => Error::CapacityExceeded {
                items: n,
                max: MAX_ITEMS,
            },
            FrameViolation::DuplicateName(n) => Error::DuplicateName(n),
            FrameViolation::EmptyEvidence(n) => Error::EmptyEvidence(n),
            FrameViolation::FullSetEvidence(n) => Error::FullSetEvidence(n),
            FrameViolation::CertaintyOutOfRange { name, value } => Error::CertaintyOutOfRange {
                name,
                value: value.to_string(),
            },
            FrameViolation::UniverseMismatch(_) => Error::UniverseMismatch,
        }
    }
}

impl fmt::Display for FrameViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&Error::from(self.clone()), f)
    }
}

/// Every violated invariant of a frame; empty when the frame is valid.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<FrameViolation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl QuantitativeEvidenceFrame {
    /// Builds a frame, rejecting it with the first violated invariant.
    pub fn new(universe: StateUniverse, items: Vec<EvidenceItem>) -> Result<Self> {
        let frame = Self::new_unchecked(universe, items);
        match frame.validate().violations.into_iter().next() {
            Some(v) => Err(v.into()),
            None => Ok(frame),
        }
    }

    /// Builds a frame without checking it. Use [`validate_frame`] to audit.
    pub fn new_unchecked(universe: StateUniverse, items: Vec<EvidenceItem>) -> Self {
        QuantitativeEvidenceFrame { universe, items }
    }

    pub fn universe(&self) -> &StateUniverse {
        &self.universe
    }

    pub fn items(&self) -> &[EvidenceItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.items.iter().position(|it| it.name == name)
    }

    pub fn content_masks(&self) -> Vec<u64> {
        self.items.iter().map(|it| it.content.bits()).collect()
    }

    pub fn contents(&self) -> Vec<StateSet> {
        self.items.iter().map(|it| it.content.clone()).collect()
    }

    pub fn neighborhoods(&self) -> Neighborhoods {
        Neighborhoods::from_masks(&self.universe, &self.content_masks())
    }

    /// The evidential topology generated by all evidence contents.
    pub fn topology(&self) -> Topology {
        topology_from_masks(&self.universe, &self.content_masks())
    }

    /// The evidence subset holding the named items.
    pub fn subset<I, S>(&self, names: I) -> Result<EvidenceSubset>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut bits = 0u64;
        for name in names {
            let name = name.as_ref();
            let k = self
                .index_of(name)
                .ok_or_else(|| Error::UnknownEvidence(name.to_string()))?;
            bits |= 1 << k;
        }
        Ok(EvidenceSubset::new(self.len(), bits))
    }

    pub fn subset_from_mask(&self, bits: u64) -> Result<EvidenceSubset> {
        EvidenceSubset::checked(self.len(), bits)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        if self.items.is_empty() {
            violations.push(FrameViolation::NoEvidence);
        }
        if self.items.len() > MAX_ITEMS {
            violations.push(FrameViolation::TooManyItems(self.items.len()));
        }
        let mut names = HashSet::new();
        for item in &self.items {
            if !names.insert(item.name.as_str()) {
                violations.push(FrameViolation::DuplicateName(item.name.clone()));
            }
            if !item.content.universe().same_as(&self.universe) {
                violations.push(FrameViolation::UniverseMismatch(item.name.clone()));
                continue;
            }
            if item.content.is_empty() {
                violations.push(FrameViolation::EmptyEvidence(item.name.clone()));
            } else if item.content.is_full() {
                violations.push(FrameViolation::FullSetEvidence(item.name.clone()));
            }
            if !item.certainty.is_open_unit() {
                violations.push(FrameViolation::CertaintyOutOfRange {
                    name: item.name.clone(),
                    value: item.certainty.clone(),
                });
            }
        }
        ValidationReport { violations }
    }

    /// Canonical JSON document for this frame.
    pub fn to_document(&self) -> FrameDocument {
        FrameDocument {
            states: self.universe.labels().to_vec(),
            evidence: self
                .items
                .iter()
                .map(|it| EvidenceDocument {
                    name: it.name.clone(),
                    states: it.content.names(),
                    certainty: it.certainty.to_canonical_string(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("frame documents always serialize")
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self.to_document()).expect("frame documents always serialize")
    }
}

/// Lists every violated frame invariant.
pub fn validate_frame(frame: &QuantitativeEvidenceFrame) -> ValidationReport {
    frame.validate()
}

/// A subset of a frame's evidence items.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EvidenceSubset {
    arity: usize,
    bits: u64,
}

impl EvidenceSubset {
    pub(crate) fn new(arity: usize, bits: u64) -> Self {
        EvidenceSubset { arity, bits }
    }

    fn checked(arity: usize, bits: u64) -> Result<Self> {
        let mask = if arity >= 64 { u64::MAX } else { (1u64 << arity) - 1 };
        if bits & !mask != 0 {
            return Err(Error::FrameMismatch);
        }
        Ok(EvidenceSubset { arity, bits })
    }

    pub fn empty(frame: &QuantitativeEvidenceFrame) -> Self {
        EvidenceSubset::new(frame.len(), 0)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> {
        members(self.bits)
    }

    pub fn contains(&self, index: usize) -> bool {
        index < 64 && self.bits & (1 << index) != 0
    }

    pub(crate) fn ensure_over(&self, frame: &QuantitativeEvidenceFrame) -> Result<()> {
        if self.arity == frame.len() {
            Ok(())
        } else {
            Err(Error::FrameMismatch)
        }
    }

    /// `∅` or the item names joined by commas.
    pub fn label(&self, frame: &QuantitativeEvidenceFrame) -> String {
        if self.bits == 0 {
            "∅".to_string()
        } else {
            self.indices()
                .map(|k| frame.items()[k].name.as_str())
                .collect::<Vec<_>>()
                .join(",")
        }
    }
}

/// Evidence subsets ordered by size, then lexicographically by item index.
pub fn subsets_in_table_order(arity: usize) -> Vec<EvidenceSubset> {
    assert!(arity < 32, "refusing to list 2^{arity} evidence subsets");
    let mut all: Vec<u64> = (0..(1u64 << arity)).collect();
    all.sort_by_key(|&b| (b.count_ones(), members(b).collect::<Vec<_>>()));
    all.into_iter().map(|b| EvidenceSubset::new(arity, b)).collect()
}

/// On-disk frame document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameDocument {
    pub states: Vec<String>,
    pub evidence: Vec<EvidenceDocument>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvidenceDocument {
    pub name: String,
    pub states: Vec<String>,
    pub certainty: String,
}

impl FrameDocument {
    pub fn into_frame(self) -> Result<QuantitativeEvidenceFrame> {
        let universe = StateUniverse::new(self.states)?;
        let mut items = Vec::with_capacity(self.evidence.len());
        for ev in self.evidence {
            let content = universe.set(&ev.states)?;
            let certainty = Rational::parse(&ev.certainty).map_err(|_| {
                Error::MalformedDocument(format!(
                    "certainty `{}` of `{}` is not a decimal number",
                    ev.certainty, ev.name
                ))
            })?;
            items.push(EvidenceItem {
                name: ev.name,
                content,
                certainty,
            });
        }
        QuantitativeEvidenceFrame::new(universe, items)
    }
}

/// Parses a frame JSON document.
pub fn parse_frame(document: &str) -> Result<QuantitativeEvidenceFrame> {
    let doc: FrameDocument = serde_json::from_str(document).map_err(|e| Error::MalformedDocument(e.to_string()))?;
    doc.into_frame()
}

/// The bundled driving example: is the object ahead a pedestrian, a
/// motorbike or something else, static or dynamic?
pub const CAR_FRAME_JSON: &str = r#"{
  "states": ["sp", "dp", "do", "so", "dm", "sm"],
  "evidence": [
    {"name": "E1", "states": ["dp", "dm", "do"], "certainty": "0.9"},
    {"name": "E2", "states": ["dm", "sm"], "certainty": "0.75"},
    {"name": "E3", "states": ["dp", "sp"], "certainty": "0.45"}
  ]
}
"#;

pub fn car_frame() -> QuantitativeEvidenceFrame {
    parse_frame(CAR_FRAME_JSON).expect("bundled car frame is valid")
}
