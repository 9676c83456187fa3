//! Frames of justification: which arguments an agent accepts.

use std::fmt;

use crate::error::{Error, Result};
use crate::evidence::QuantitativeEvidenceFrame;
use crate::sets::{canonical_key, StateSet, StateUniverse};
use crate::topology::Neighborhoods;

/// How to build a frame of justification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum JustificationKind {
    /// Every argument, i.e. every non-empty open.
    DempsterShafer,
    /// Every dense argument.
    StrongDenseness,
    /// An explicit list of opens.
    Custom(Vec<StateSet>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Members {
    AllArguments,
    DenseArguments,
    Listed(Vec<u64>),
}

/// A subset of the evidential topology. Never contains `∅`; always
/// contains the full state set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JustificationFrame {
    universe: StateUniverse,
    neighborhoods: Neighborhoods,
    members: Members,
}

impl JustificationFrame {
    pub fn label(&self) -> &'static str {
        match self.members {
            Members::AllArguments => "DS",
            Members::DenseArguments => "SD",
            Members::Listed(_) => "custom",
        }
    }

    pub fn universe(&self) -> &StateUniverse {
        &self.universe
    }

    pub(crate) fn neighborhoods(&self) -> &Neighborhoods {
        &self.neighborhoods
    }

    pub fn contains_mask(&self, bits: u64) -> bool {
        if bits == 0 {
            return false;
        }
        match &self.members {
            Members::AllArguments => self.neighborhoods.is_open(bits),
            Members::DenseArguments => self.neighborhoods.is_open(bits) && self.neighborhoods.is_dense(bits),
            Members::Listed(list) => list
                .binary_search_by_key(&canonical_key(bits), |&m| canonical_key(m))
                .is_ok(),
        }
    }

    pub fn contains(&self, set: &StateSet) -> Result<bool> {
        self.universe.ensure_same(set.universe())?;
        Ok(self.contains_mask(set.bits()))
    }

    /// Members as masks, canonically ordered.
    pub fn member_masks(&self) -> Vec<u64> {
        match &self.members {
            Members::Listed(list) => list.clone(),
            _ => self
                .neighborhoods
                .enumerate_opens()
                .into_iter()
                .filter(|&o| self.contains_mask(o))
                .collect(),
        }
    }

    pub fn members(&self) -> Vec<StateSet> {
        self.member_masks()
            .into_iter()
            .map(|m| self.universe.from_mask(m))
            .collect()
    }

    pub(crate) fn ensure_over(&self, frame: &QuantitativeEvidenceFrame) -> Result<()> {
        if self.universe.same_as(frame.universe()) && self.neighborhoods == frame.neighborhoods() {
            Ok(())
        } else {
            Err(Error::FrameMismatch)
        }
    }
}

impl fmt::Display for JustificationFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Builds a frame of justification over the evidential topology of `frame`.
pub fn justification_frame(frame: &QuantitativeEvidenceFrame, kind: JustificationKind) -> Result<JustificationFrame> {
    let neighborhoods = frame.neighborhoods();
    let members = match kind {
        JustificationKind::DempsterShafer => Members::AllArguments,
        JustificationKind::StrongDenseness => Members::DenseArguments,
        JustificationKind::Custom(list) => {
            let mut masks = Vec::with_capacity(list.len());
            for set in &list {
                frame.universe().ensure_same(set.universe())?;
                if set.is_empty() {
                    return Err(Error::CustomFrameContainsEmpty);
                }
                if !neighborhoods.is_open(set.bits()) {
                    return Err(Error::CustomFrameNotOpen(set.to_string()));
                }
                masks.push(set.bits());
            }
            let full = frame.universe().full_mask();
            if !masks.contains(&full) {
                return Err(Error::CustomFrameMissingTotalSet);
            }
            masks.sort_unstable_by_key(|&m| canonical_key(m));
            masks.dedup();
            Members::Listed(masks)
        }
    };
    Ok(JustificationFrame {
        universe: frame.universe().clone(),
        neighborhoods,
        members,
    })
}
