use alloc::vec::Vec;

use crate::dense::C64;
use crate::error::{Error, Result};

/// A shift of the rational Krylov space; `Infinite` is a plain
/// multiplication step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Pole {
    Finite(C64),
    Infinite,
}

impl Pole {
    pub fn real(x: f64) -> Self {
        Pole::Finite(C64::new(x, 0.0))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Pole::Infinite)
    }

    pub fn finite(&self) -> Option<C64> {
        match self {
            Pole::Finite(z) => Some(*z),
            Pole::Infinite => None,
        }
    }

    pub fn conj(&self) -> Self {
        match self {
            Pole::Finite(z) => Pole::Finite(z.conj()),
            Pole::Infinite => Pole::Infinite,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Repetition {
    /// The plan is used once; asking for more poles than it holds is an error.
    AsGiven,
    /// The base sequence is repeated end to end as often as needed.
    Cyclic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ordering {
    AsGiven,
    Leja,
}

/// Base pole sequence plus how it is extended to arbitrary length.
#[derive(Clone, Debug, PartialEq)]
pub struct PolePlan {
    poles: Vec<Pole>,
    repetition: Repetition,
    ordering: Ordering,
}

impl PolePlan {
    pub fn new(poles: Vec<Pole>) -> Self {
        Self {
            poles,
            repetition: Repetition::AsGiven,
            ordering: Ordering::AsGiven,
        }
    }

    pub fn cyclic(poles: Vec<Pole>) -> Self {
        Self::new(poles).with_repetition(Repetition::Cyclic)
    }

    pub fn with_repetition(mut self, repetition: Repetition) -> Self {
        self.repetition = repetition;
        self
    }

    /// Marks the stored order as Leja; the caller is responsible for having
    /// permuted the poles accordingly.
    pub fn with_ordering(mut self, ordering: Ordering) -> Self {
        self.ordering = ordering;
        self
    }

    pub fn poles(&self) -> &[Pole] {
        &self.poles
    }

    pub fn repetition(&self) -> Repetition {
        self.repetition
    }

    pub fn ordering(&self) -> Ordering {
        self.ordering
    }

    pub fn len(&self) -> usize {
        self.poles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poles.is_empty()
    }

    /// Pole used at step `j` (zero based).
    pub fn pole(&self, j: usize) -> Result<Pole> {
        if self.poles.is_empty() {
            return Err(Error::InvalidArgument("empty pole plan".into()));
        }
        match self.repetition {
            Repetition::AsGiven => self.poles.get(j).copied().ok_or_else(|| {
                Error::InvalidArgument(alloc::format!(
                    "pole plan holds {} poles, step {} requested",
                    self.poles.len(),
                    j + 1
                ))
            }),
            Repetition::Cyclic => Ok(self.poles[j % self.poles.len()]),
        }
    }

    /// The first `m` poles.
    pub fn expand(&self, m: usize) -> Result<Vec<Pole>> {
        (0..m).map(|j| self.pole(j)).collect()
    }

    /// Whether the finite base poles form a multiset closed under conjugation.
    pub fn is_conjugate_closed(&self) -> bool {
        conjugate_closed(&self.poles)
    }

    /// Conjugate closedness of the first `m` expanded poles.
    pub fn prefix_conjugate_closed(&self, m: usize) -> bool {
        self.expand(m)
            .map(|p| conjugate_closed(&p))
            .unwrap_or(false)
    }
}

pub(crate) fn conjugate_closed(poles: &[Pole]) -> bool {
    let finite: Vec<C64> = poles.iter().filter_map(|p| p.finite()).collect();
    let mut used = alloc::vec![false; finite.len()];
    for i in 0..finite.len() {
        if used[i] {
            continue;
        }
        let target = finite[i].conj();
        if target == finite[i] {
            used[i] = true;
            continue;
        }
        match (0..finite.len()).find(|&k| !used[k] && k != i && finite[k] == target) {
            Some(k) => {
                used[i] = true;
                used[k] = true;
            }
            None => return false,
        }
    }
    true
}
