//! The controllable belief vocabulary.
//!
//! Index layout (stable, used for Q-table rows and columns):
//!
//! | indices | beliefs                                   |
//! |---------|-------------------------------------------|
//! | 0..4    | `legs_requested(1)` .. `legs_requested(4)` |
//! | 4, 5    | `bored`, `not_bored`                      |
//! | 6..38   | `gpl(leg,g,p,l)`, leg-major, then `g p l` read as a 3-bit number |

use crate::agent::{Atom, Belief};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

pub const VOCABULARY_SIZE: usize = 38;
pub const MAX_LEGS: u8 = 4;

/// Gaze, pressure and location readings; `true` means "human ready".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SensorTriple {
    pub gaze: bool,
    pub pressure: bool,
    pub location: bool,
}

impl SensorTriple {
    pub const READY: SensorTriple = SensorTriple { gaze: true, pressure: true, location: true };

    pub fn new(gaze: bool, pressure: bool, location: bool) -> Self {
        Self { gaze, pressure, location }
    }

    /// `g p l` as a 3-bit number, gaze most significant.
    pub fn code(self) -> usize {
        (self.gaze as usize) << 2 | (self.pressure as usize) << 1 | self.location as usize
    }

    pub fn from_code(code: usize) -> Self {
        Self::new(code & 4 != 0, code & 2 != 0, code & 1 != 0)
    }

    pub fn all() -> impl Iterator<Item = SensorTriple> {
        (0..8).map(Self::from_code)
    }

    pub fn is_ready(self) -> bool {
        self == Self::READY
    }
}

impl fmt::Display for SensorTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.gaze as u8, self.pressure as u8, self.location as u8)
    }
}

/// One element of the vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ControllableBelief {
    LegsRequested(u8),
    Bored,
    NotBored,
    Gpl { leg: u8, triple: SensorTriple },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BeliefGroup {
    Legs,
    Boredom,
    /// GPL combinations for one leg (1-based).
    GplLeg(u8),
}

impl ControllableBelief {
    pub fn index(self) -> usize {
        match self {
            ControllableBelief::LegsRequested(k) => k as usize - 1,
            ControllableBelief::Bored => 4,
            ControllableBelief::NotBored => 5,
            ControllableBelief::Gpl { leg, triple } => 6 + (leg as usize - 1) * 8 + triple.code(),
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Some(match i {
            0..=3 => ControllableBelief::LegsRequested(i as u8 + 1),
            4 => ControllableBelief::Bored,
            5 => ControllableBelief::NotBored,
            6..=37 => ControllableBelief::Gpl {
                leg: ((i - 6) / 8) as u8 + 1,
                triple: SensorTriple::from_code((i - 6) % 8),
            },
            _ => return None,
        })
    }

    pub fn group(self) -> BeliefGroup {
        match self {
            ControllableBelief::LegsRequested(_) => BeliefGroup::Legs,
            ControllableBelief::Bored | ControllableBelief::NotBored => BeliefGroup::Boredom,
            ControllableBelief::Gpl { leg, .. } => BeliefGroup::GplLeg(leg),
        }
    }

    /// The agent-level belief this stands for.
    pub fn to_belief(self) -> Belief {
        match self {
            ControllableBelief::LegsRequested(k) => Belief::new("legs_requested", vec![Atom::Int(k as i64)]),
            ControllableBelief::Bored => Belief::atom("bored"),
            ControllableBelief::NotBored => Belief::atom("not_bored"),
            ControllableBelief::Gpl { leg, triple } => Belief::new(
                "gpl",
                [leg as i64, triple.gaze as i64, triple.pressure as i64, triple.location as i64]
                    .into_iter()
                    .map(Atom::Int)
                    .collect(),
            ),
        }
    }
}

impl fmt::Display for ControllableBelief {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_belief())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown belief `{0}`")]
pub struct UnknownBelief(pub String);

impl FromStr for ControllableBelief {
    type Err = UnknownBelief;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        (0..VOCABULARY_SIZE)
            .filter_map(ControllableBelief::from_index)
            .find(|b| b.to_string() == compact)
            .ok_or_else(|| UnknownBelief(s.trim().to_string()))
    }
}

/// The ordered vocabulary of controllable beliefs.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefVocabulary {
    beliefs: Vec<ControllableBelief>,
}

impl BeliefVocabulary {
    pub fn len(&self) -> usize {
        self.beliefs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beliefs.is_empty()
    }

    pub fn belief_at(&self, i: usize) -> Option<ControllableBelief> {
        self.beliefs.get(i).copied()
    }

    pub fn index_of(&self, b: ControllableBelief) -> Option<usize> {
        self.beliefs.iter().position(|&x| x == b)
    }

    pub fn iter(&self) -> impl Iterator<Item = ControllableBelief> + '_ {
        self.beliefs.iter().copied()
    }

    /// Group name and member indices, in vocabulary order.
    pub fn groups(&self) -> Vec<(String, Vec<usize>)> {
        let mut out: Vec<(String, Vec<usize>)> = Vec::new();
        for (i, b) in self.beliefs.iter().enumerate() {
            let name = match b.group() {
                BeliefGroup::Legs => "legs".to_string(),
                BeliefGroup::Boredom => "boredom".to_string(),
                BeliefGroup::GplLeg(l) => format!("gpl_leg{l}"),
            };
            match out.last_mut() {
                Some((n, v)) if *n == name => v.push(i),
                _ => out.push((name, vec![i])),
            }
        }
        out
    }

    /// The manifest file shipped with the scenario: `group: i, j, ...`.
    pub fn manifest(&self) -> String {
        let mut s = String::new();
        for (name, idx) in self.groups() {
            let list: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
            s.push_str(&format!("{name}: {}\n", list.join(", ")));
        }
        s
    }
}

pub fn vocabulary() -> BeliefVocabulary {
    BeliefVocabulary {
        beliefs: (0..VOCABULARY_SIZE).filter_map(ControllableBelief::from_index).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_and_groups() {
        let v = vocabulary();
        assert_eq!(v.len(), 38);
        let sizes: Vec<usize> = v.groups().iter().map(|(_, g)| g.len()).collect();
        assert_eq!(sizes, [4, 2, 8, 8, 8, 8]);
        let legs = sizes[0];
        let boredom = sizes[1];
        let gpl: usize = sizes[2..].iter().sum();
        assert_eq!((legs, boredom, gpl), (4, 2, 32));
    }

    #[test]
    fn index_round_trip() {
        let v = vocabulary();
        for i in 0..v.len() {
            let b = v.belief_at(i).unwrap();
            assert_eq!(v.index_of(b), Some(i));
            assert_eq!(b.index(), i);
            assert_eq!(b.to_string().parse::<ControllableBelief>().unwrap(), b);
        }
        assert!(v.belief_at(38).is_none());
    }

    #[test]
    fn names() {
        assert_eq!(ControllableBelief::from_index(0).unwrap().to_string(), "legs_requested(1)");
        assert_eq!(ControllableBelief::from_index(13).unwrap().to_string(), "gpl(1,1,1,1)");
        assert_eq!(" gpl(2, 0,1,1) ".parse::<ControllableBelief>().unwrap().index(), 6 + 8 + 3);
        assert!("gpl(5,1,1,1)".parse::<ControllableBelief>().is_err());
        assert!("bored".parse::<ControllableBelief>().is_ok());
    }

    #[test]
    fn manifest_matches_asset() {
        assert_eq!(vocabulary().manifest(), include_str!("../../assets/manifest.txt"));
    }
}
