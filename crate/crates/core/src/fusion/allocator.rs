//! Evidence allocation functions: where the mass of an evidence subset goes.

use std::collections::HashSet;
use std::fmt;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::evidence::{EvidenceSubset, QuantitativeEvidenceFrame};
use crate::sets::{members, StateSet};
use crate::topology::{min_dense_mask, Neighborhoods};

/// Largest frame whose evidence power set we are willing to enumerate.
pub const MAX_ENUMERATED_ITEMS: usize = 24;

pub(crate) fn ensure_enumerable(frame: &QuantitativeEvidenceFrame) -> Result<()> {
    if frame.len() > MAX_ENUMERATED_ITEMS {
        Err(Error::CapacityExceeded {
            items: frame.len(),
            max: MAX_ENUMERATED_ITEMS,
        })
    } else {
        Ok(())
    }
}

/// An evidence allocation function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Allocator {
    /// All evidence in the subset holds: its intersection.
    Intersection,
    /// At least one piece holds: its union.
    Union,
    /// The smallest dense open of the topology the subset generates.
    MinDense,
    /// The intersection when it is non-empty, the full state set otherwise.
    YagerStyle,
    /// An explicit image for every evidence subset.
    CustomTable(AllocationTable),
}

impl Allocator {
    /// Short name used in reports: `i`, `u`, `d`, `yager`, or the table name.
    pub fn label(&self) -> &str {
        match self {
            Allocator::Intersection => "i",
            Allocator::Union => "u",
            Allocator::MinDense => "d",
            Allocator::YagerStyle => "yager",
            Allocator::CustomTable(t) => &t.name,
        }
    }

    /// Parses one of the built-in names.
    pub fn builtin(name: &str) -> Option<Allocator> {
        match name {
            "i" | "intersection" => Some(Allocator::Intersection),
            "u" | "union" => Some(Allocator::Union),
            "d" | "min-dense" | "mindense" => Some(Allocator::MinDense),
            "yager" | "y" => Some(Allocator::YagerStyle),
            _ => None,
        }
    }

    pub(crate) fn ensure_over(&self, frame: &QuantitativeEvidenceFrame) -> Result<()> {
        match self {
            Allocator::CustomTable(t) if t.images.len() != 1usize << frame.len() => Err(Error::FrameMismatch),
            _ => Ok(()),
        }
    }

    /// Image of the evidence subset `bits`, given every item's content mask.
    pub(crate) fn image_mask(&self, contents: &[u64], full: u64, bits: u64) -> u64 {
        if let Allocator::CustomTable(t) = self {
            return t.images[bits as usize];
        }
        if bits == 0 {
            return full;
        }
        match self {
            Allocator::Intersection => members(bits).fold(full, |acc, k| acc & contents[k]),
            Allocator::Union => members(bits).fold(0, |acc, k| acc | contents[k]),
            Allocator::YagerStyle => {
                let inter = members(bits).fold(full, |acc, k| acc & contents[k]);
                if inter == 0 {
                    full
                } else {
                    inter
                }
            }
            Allocator::MinDense => {
                let mut buf = [0u64; 64];
                let mut n = 0;
                for k in members(bits) {
                    buf[n] = contents[k];
                    n += 1;
                }
                min_dense_mask(&buf[..n])
            }
            Allocator::CustomTable(_) => unreachable!(),
        }
    }
}

impl fmt::Display for Allocator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A total map from evidence subsets to state sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AllocationTable {
    name: String,
    /// Indexed by evidence-subset mask.
    images: Vec<u64>,
}

impl AllocationTable {
    /// Builds a table; every evidence subset must appear exactly once.
    pub fn new(
        frame: &QuantitativeEvidenceFrame,
        name: impl Into<String>,
        entries: impl IntoIterator<Item = (EvidenceSubset, StateSet)>,
    ) -> Result<Self> {
        ensure_enumerable(frame)?;
        let size = 1usize << frame.len();
        let mut images: Vec<Option<u64>> = vec![None; size];
        for (subset, image) in entries {
            subset.ensure_over(frame)?;
            frame.universe().ensure_same(image.universe())?;
            let slot = &mut images[subset.bits() as usize];
            if slot.is_some() {
                return Err(Error::InvalidAllocatorTable(format!(
                    "evidence subset {} listed twice",
                    subset.label(frame)
                )));
            }
            *slot = Some(image.bits());
        }
        let images = images
            .into_iter()
            .enumerate()
            .map(|(bits, img)| {
                img.ok_or_else(|| {
                    let missing = EvidenceSubset::new(frame.len(), bits as u64);
                    Error::InvalidAllocatorTable(format!("no image for evidence subset {}", missing.label(frame)))
                })
            })
            .collect::<Result<Vec<u64>>>()?;
        Ok(AllocationTable {
            name: name.into(),
            images,
        })
    }

    /// Tabulates an existing allocator, e.g. to derive a modified copy.
    pub fn tabulate(frame: &QuantitativeEvidenceFrame, name: impl Into<String>, allocator: &Allocator) -> Result<Self> {
        ensure_enumerable(frame)?;
        allocator.ensure_over(frame)?;
        let contents = frame.content_masks();
        let full = frame.universe().full_mask();
        let images = (0..1u64 << frame.len())
            .map(|bits| allocator.image_mask(&contents, full, bits))
            .collect();
        Ok(AllocationTable {
            name: name.into(),
            images,
        })
    }

    /// Replaces the image of one evidence subset.
    pub fn with_image(mut self, subset: EvidenceSubset, image: &StateSet) -> Self {
        self.images[subset.bits() as usize] = image.bits();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Parses `{"map": [{"evidence": [...], "image": [...]}, ...]}`.
    pub fn from_json(frame: &QuantitativeEvidenceFrame, name: impl Into<String>, text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Doc {
            map: Vec<Entry>,
        }
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Entry {
            evidence: Vec<String>,
            image: Vec<String>,
        }
        let doc: Doc = serde_json::from_str(text).map_err(|e| Error::MalformedDocument(e.to_string()))?;
        let mut entries = Vec::with_capacity(doc.map.len());
        let mut seen = HashSet::new();
        for entry in doc.map {
            let subset = frame.subset(&entry.evidence)?;
            if !seen.insert(subset.bits()) {
                return Err(Error::InvalidAllocatorTable(format!(
                    "evidence subset {} listed twice",
                    subset.label(frame)
                )));
            }
            entries.push((subset, frame.universe().set(&entry.image)?));
        }
        AllocationTable::new(frame, name, entries)
    }
}

/// Image of an evidence subset under an allocator.
pub fn allocate(frame: &QuantitativeEvidenceFrame, allocator: &Allocator, subset: &EvidenceSubset) -> Result<StateSet> {
    subset.ensure_over(frame)?;
    allocator.ensure_over(frame)?;
    let contents = frame.content_masks();
    let full = frame.universe().full_mask();
    Ok(frame
        .universe()
        .from_mask(allocator.image_mask(&contents, full, subset.bits())))
}

/// Which condition of a set of evidence allocation functions failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AllocationCondition {
    /// The empty evidence subset must map to the full state set.
    EmptyToTotal,
    /// A non-empty subset must map to the empty set or to a dense open of
    /// the topology it generates.
    OpenAndDense,
    /// Two allocators must produce ⊆-comparable images.
    Comparable,
}

impl fmt::Display for AllocationCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AllocationCondition::EmptyToTotal => "empty-to-total",
            AllocationCondition::OpenAndDense => "open-and-dense",
            AllocationCondition::Comparable => "comparable",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AllocatorViolation {
    pub condition: AllocationCondition,
    /// One allocator label, or two for comparability failures.
    pub allocators: Vec<String>,
    pub witness: EvidenceSubset,
    pub images: Vec<StateSet>,
}

impl AllocatorViolation {
    pub fn describe(&self, frame: &QuantitativeEvidenceFrame) -> String {
        let images: Vec<String> = self.images.iter().map(ToString::to_string).collect();
        format!(
            "{} violated by {} at {{{}}}: {}",
            self.condition,
            self.allocators.join(" vs "),
            self.witness.label(frame),
            images.join(" vs ")
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AllocatorReport {
    pub violations: Vec<AllocatorViolation>,
}

impl AllocatorReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every evidence subset against the three conditions a set of
/// evidence allocation functions must satisfy.
pub fn validate_allocators(frame: &QuantitativeEvidenceFrame, allocators: &[Allocator]) -> Result<AllocatorReport> {
    ensure_enumerable(frame)?;
    for a in allocators {
        a.ensure_over(frame)?;
    }
    let u = frame.universe();
    let contents = frame.content_masks();
    let full = u.full_mask();
    let mut violations = Vec::new();
    let mut selected = Vec::with_capacity(frame.len());
    for bits in 0..1u64 << frame.len() {
        let witness = EvidenceSubset::new(frame.len(), bits);
        let images: Vec<u64> = allocators.iter().map(|a| a.image_mask(&contents, full, bits)).collect();
        if bits == 0 {
            for (a, &img) in allocators.iter().zip(&images) {
                if img != full {
                    violations.push(AllocatorViolation {
                        condition: AllocationCondition::EmptyToTotal,
                        allocators: vec![a.label().to_string()],
                        witness,
                        images: vec![u.from_mask(img)],
                    });
                }
            }
        } else {
            selected.clear();
            selected.extend(members(bits).map(|k| contents[k]));
            let local = Neighborhoods::from_masks(u, &selected);
            for (a, &img) in allocators.iter().zip(&images) {
                if img != 0 && !(local.is_open(img) && local.is_dense(img)) {
                    violations.push(AllocatorViolation {
                        condition: AllocationCondition::OpenAndDense,
                        allocators: vec![a.label().to_string()],
                        witness,
                        images: vec![u.from_mask(img)],
                    });
                }
            }
        }
        for x in 0..allocators.len() {
            for y in x + 1..allocators.len() {
                let (f, g) = (images[x], images[y]);
                if f & !g != 0 && g & !f != 0 {
                    violations.push(AllocatorViolation {
                        condition: AllocationCondition::Comparable,
                        allocators: vec![allocators[x].label().to_string(), allocators[y].label().to_string()],
                        witness,
                        images: vec![u.from_mask(f), u.from_mask(g)],
                    });
                }
            }
        }
    }
    Ok(AllocatorReport { violations })
}
