use super::vocabulary::{BeliefGroup, ControllableBelief, SensorTriple, MAX_LEGS, VOCABULARY_SIZE};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubsetError {
    #[error("belief `{0}` appears more than once")]
    Repeated(ControllableBelief),
    #[error("expected exactly one legs_requested belief, found {0}")]
    LegCount(usize),
    #[error("expected exactly one of bored/not_bored, found {0}")]
    Boredom(usize),
    #[error("no gpl belief for leg {0}")]
    MissingGpl(u8),
    #[error("more than one gpl belief for leg {0}")]
    DuplicateGpl(u8),
    #[error("gpl belief for leg {leg} but only {requested} legs requested")]
    GplBeyondRequest { leg: u8, requested: u8 },
}

/// An ordered selection of controllable beliefs without repetition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BeliefSubset(pub Vec<ControllableBelief>);

impl BeliefSubset {
    pub fn new(beliefs: Vec<ControllableBelief>) -> Self {
        Self(beliefs)
    }

    pub fn beliefs(&self) -> &[ControllableBelief] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn legs(&self) -> Option<u8> {
        self.0.iter().find_map(|b| match b {
            ControllableBelief::LegsRequested(k) => Some(*k),
            _ => None,
        })
    }

    pub fn bored(&self) -> Option<bool> {
        self.0.iter().find_map(|b| match b {
            ControllableBelief::Bored => Some(true),
            ControllableBelief::NotBored => Some(false),
            _ => None,
        })
    }

    pub fn gpl(&self, leg: u8) -> Option<SensorTriple> {
        self.0.iter().find_map(|b| match b {
            ControllableBelief::Gpl { leg: l, triple } if *l == leg => Some(*triple),
            _ => None,
        })
    }

    /// Checks the structural rules: one leg count `k`, one boredom belief,
    /// one GPL combination for each leg `1..=k` and none beyond.
    pub fn validate(&self) -> Result<(), SubsetError> {
        for (i, b) in self.0.iter().enumerate() {
            if self.0[..i].contains(b) {
                return Err(SubsetError::Repeated(*b));
            }
        }
        let legs: Vec<u8> = self
            .0
            .iter()
            .filter_map(|b| match b {
                ControllableBelief::LegsRequested(k) => Some(*k),
                _ => None,
            })
            .collect();
        if legs.len() != 1 {
            return Err(SubsetError::LegCount(legs.len()));
        }
        let k = legs[0];
        let boredom = self.0.iter().filter(|b| b.group() == BeliefGroup::Boredom).count();
        if boredom != 1 {
            return Err(SubsetError::Boredom(boredom));
        }
        for leg in 1..=MAX_LEGS {
            let n = self.0.iter().filter(|b| b.group() == BeliefGroup::GplLeg(leg)).count();
            match (leg <= k, n) {
                (true, 0) => return Err(SubsetError::MissingGpl(leg)),
                (true, 1) | (false, 0) => {}
                (true, _) => return Err(SubsetError::DuplicateGpl(leg)),
                (false, _) => return Err(SubsetError::GplBeyondRequest { leg, requested: k }),
            }
        }
        Ok(())
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_ok()
    }

    /// Serialized as a manual-config line.
    pub fn to_line(&self) -> String {
        self.0.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for BeliefSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.to_line())
    }
}

/// Beliefs that may extend a prefix built in episode order (leg count,
/// boredom, then one GPL combination per leg). Empty once complete.
pub fn legal_next(prefix: &[ControllableBelief]) -> Vec<ControllableBelief> {
    let all = (0..VOCABULARY_SIZE).filter_map(ControllableBelief::from_index);
    let k = match prefix.first() {
        None => return all.filter(|b| b.group() == BeliefGroup::Legs).collect(),
        Some(ControllableBelief::LegsRequested(k)) => *k as usize,
        Some(_) => return Vec::new(),
    };
    match prefix.len() {
        1 => all.filter(|b| b.group() == BeliefGroup::Boredom).collect(),
        n if n < k + 2 => {
            let leg = (n - 1) as u8;
            all.filter(|b| b.group() == BeliefGroup::GplLeg(leg)).collect()
        }
        _ => Vec::new(),
    }
}

/// Legality mask over the vocabulary for the next selection.
pub fn legal_mask(prefix: &[ControllableBelief]) -> [bool; VOCABULARY_SIZE] {
    let mut mask = [false; VOCABULARY_SIZE];
    for b in legal_next(prefix) {
        mask[b.index()] = true;
    }
    mask
}

/// All structurally valid subsets with `k` legs, in episode order.
pub fn valid_subsets_with_legs(k: u8) -> Vec<BeliefSubset> {
    let mut out = Vec::new();
    for boredom in [ControllableBelief::Bored, ControllableBelief::NotBored] {
        for combo in 0..8usize.pow(k as u32) {
            let mut v = vec![ControllableBelief::LegsRequested(k), boredom];
            let mut c = combo;
            for leg in 1..=k {
                v.push(ControllableBelief::Gpl { leg, triple: SensorTriple::from_code(c % 8) });
                c /= 8;
            }
            out.push(BeliefSubset(v));
        }
    }
    out
}

pub fn all_valid_subsets() -> Vec<BeliefSubset> {
    (1..=MAX_LEGS).flat_map(valid_subsets_with_legs).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::vocabulary;

    fn s(line: &str) -> BeliefSubset {
        crate::explorer::parse_subset_line(line).unwrap()
    }

    #[test]
    fn validity_rules() {
        assert!(s("legs_requested(1), not_bored, gpl(1,1,1,1)").is_valid());
        assert_eq!(s("legs_requested(1), bored, not_bored, gpl(1,1,1,1)").validate(), Err(SubsetError::Boredom(2)));
        assert_eq!(s("not_bored, gpl(1,1,1,1)").validate(), Err(SubsetError::LegCount(0)));
        assert_eq!(s("legs_requested(2), bored, gpl(1,1,1,1)").validate(), Err(SubsetError::MissingGpl(2)));
        assert_eq!(
            s("legs_requested(1), bored, gpl(1,1,1,1), gpl(2,0,0,0)").validate(),
            Err(SubsetError::GplBeyondRequest { leg: 2, requested: 1 })
        );
        assert_eq!(
            s("legs_requested(1), bored, gpl(1,1,1,1), gpl(1,0,1,1)").validate(),
            Err(SubsetError::DuplicateGpl(1))
        );
        assert!(matches!(s("bored, bored").validate(), Err(SubsetError::Repeated(_))));
    }

    /// Brute force over every subset of the first 6 + 8k vocabulary entries.
    fn brute_force_count(k: u8) -> usize {
        let v = vocabulary();
        let n = 6 + 8 * k as usize;
        let mut count = 0;
        for mask in 0u64..(1u64 << n) {
            let subset = BeliefSubset((0..n).filter(|i| mask >> i & 1 == 1).map(|i| v.belief_at(i).unwrap()).collect());
            if subset.is_valid() && subset.legs() == Some(k) {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn structural_count_matches_brute_force() {
        for k in 1..=2u8 {
            let expected = 2 * 8usize.pow(k as u32);
            assert_eq!(brute_force_count(k), expected);
            assert_eq!(valid_subsets_with_legs(k).len(), expected);
        }
        assert_eq!(all_valid_subsets().len(), (1..=4).map(|k| 2 * 8usize.pow(k)).sum::<usize>());
        assert!(all_valid_subsets().iter().all(BeliefSubset::is_valid));
    }

    #[test]
    fn episode_order_masks() {
        assert_eq!(legal_next(&[]).len(), 4);
        let p = [ControllableBelief::LegsRequested(2)];
        assert_eq!(legal_next(&p), vec![ControllableBelief::Bored, ControllableBelief::NotBored]);
        let p = [ControllableBelief::LegsRequested(2), ControllableBelief::Bored];
        assert!(legal_next(&p).iter().all(|b| b.group() == BeliefGroup::GplLeg(1)));
        let mut full = valid_subsets_with_legs(2)[5].0.clone();
        assert!(legal_next(&full).is_empty());
        full.pop();
        assert_eq!(legal_next(&full).len(), 8);
        assert_eq!(legal_mask(&[]).iter().filter(|&&m| m).count(), 4);
    }
}
