//! Exact finitely supported probability distributions on a group.
//!
//! All weights are rationals and every operation preserves total mass 1
//! exactly; nothing in this module touches floating point.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::group::{Group, GroupElement, Subgroup};
use crate::phase::Rat;

/// Finitely supported probability mass function with exact rational weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pmf {
    group: Group,
    weights: BTreeMap<GroupElement, Rat>,
}

impl Pmf {
    /// Point mass at x.
    pub fn degenerate(x: GroupElement) -> Pmf {
        let group = x.group().clone();
        let mut weights = BTreeMap::new();
        weights.insert(x, Rat::one());
        Pmf { group, weights }
    }

    /// Uniform distribution on a finite subgroup.
    pub fn haar(subgroup: &Subgroup) -> Pmf {
        let order = subgroup.order();
        let w = Ratio::new(BigInt::one(), BigInt::from(order));
        let weights = subgroup
            .elements()
            .map(|e| (e.clone(), w.clone()))
            .collect();
        Pmf {
            group: subgroup.group().clone(),
            weights,
        }
    }

    /// Uniform distribution on the whole (finite torsion part of the) group.
    pub fn haar_full(group: &Group) -> Pmf {
        Pmf::haar(&Subgroup::full_torsion(group))
    }

    /// Builds a pmf from weighted atoms; duplicates are merged, weights must
    /// be positive and sum to exactly 1.
    pub fn from_weights(group: &Group, atoms: Vec<(GroupElement, Rat)>) -> Result<Pmf> {
        let mut weights: BTreeMap<GroupElement, Rat> = BTreeMap::new();
        for (element, weight) in atoms {
            group.check_parent(element.group())?;
            if !weight.is_positive() {
                return Err(Error::InvalidPmf(format!(
                    "weight {weight} at {element} is not positive"
                )));
            }
            *weights.entry(element).or_insert_with(Rat::zero) += weight;
        }
        let total: Rat = weights.values().fold(Rat::zero(), |acc, w| acc + w);
        if !total.is_one() {
            return Err(Error::InvalidPmf(format!(
                "weights sum to {total}, expected exactly 1"
            )));
        }
        Ok(Pmf {
            group: group.clone(),
            weights,
        })
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&GroupElement, &Rat)> {
        self.weights.iter()
    }

    pub fn weight(&self, x: &GroupElement) -> Rat {
        self.weights.get(x).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn support_size(&self) -> usize {
        self.weights.len()
    }

    pub fn support(&self) -> impl Iterator<Item = &GroupElement> {
        self.weights.keys()
    }

    /// Exact law of the sum of independent variables with these laws.
    pub fn convolve(&self, other: &Pmf) -> Result<Pmf> {
        self.group.check_parent(&other.group)?;
        let mut weights: BTreeMap<GroupElement, Rat> = BTreeMap::new();
        for (x, wx) in &self.weights {
            for (y, wy) in &other.weights {
                let z = x.add(y).expect("same parent");
                *weights.entry(z).or_insert_with(Rat::zero) += wx * wy;
            }
        }
        Ok(Pmf {
            group: self.group.clone(),
            weights,
        })
    }

    /// Image law under the endomorphism x ↦ a·x; colliding images add up.
    pub fn pushforward(&self, a: &BigInt) -> Pmf {
        let mut weights: BTreeMap<GroupElement, Rat> = BTreeMap::new();
        for (x, w) in &self.weights {
            let image = x.scalar_mul(a);
            *weights.entry(image).or_insert_with(Rat::zero) += w;
        }
        Pmf {
            group: self.group.clone(),
            weights,
        }
    }

    pub fn pushforward_i64(&self, a: i64) -> Pmf {
        self.pushforward(&BigInt::from(a))
    }

    /// The reflected law B ↦ μ(−B).
    pub fn reflect(&self) -> Pmf {
        let weights = self
            .weights
            .iter()
            .map(|(x, w)| (x.neg(), w.clone()))
            .collect();
        Pmf {
            group: self.group.clone(),
            weights,
        }
    }

    /// μ * reflect(μ), whose characteristic function is |μ̂|².
    pub fn symmetrized(&self) -> Pmf {
        self.convolve(&self.reflect()).expect("same parent")
    }

    /// Independent coupling of two laws on the square group X × X.
    pub fn product(&self, other: &Pmf) -> Result<Pmf> {
        self.group.check_parent(&other.group)?;
        let square = self.group.square();
        let mut weights: BTreeMap<GroupElement, Rat> = BTreeMap::new();
        for (x, wx) in &self.weights {
            for (y, wy) in &other.weights {
                let pair = self.group.pair(x, y).expect("same parent");
                weights.insert(pair, wx * wy);
            }
        }
        Ok(Pmf {
            group: square,
            weights,
        })
    }

    /// Structural classification: point mass, shifted Haar law, or neither.
    pub fn classify(&self) -> Classification {
        if self.weights.len() == 1 {
            let x = self.weights.keys().next().unwrap().clone();
            return Classification::Degenerate(x);
        }
        // A shifted Haar law is uniform on a coset of a finite subgroup.
        let uniform = Ratio::new(BigInt::one(), BigInt::from(self.weights.len()));
        if self.weights.values().any(|w| *w != uniform) {
            return Classification::Other;
        }
        let shift = self.weights.keys().next().unwrap().clone();
        let diffs: Vec<GroupElement> = self
            .weights
            .keys()
            .map(|x| x.sub(&shift).expect("same parent"))
            .collect();
        if diffs
            .iter()
            .any(|d| d.lattice().iter().any(|v| !v.is_zero()))
        {
            return Classification::Other;
        }
        let set: std::collections::BTreeSet<&GroupElement> = diffs.iter().collect();
        for a in &diffs {
            if !set.contains(&a.neg()) {
                return Classification::Other;
            }
            for b in &diffs {
                if !set.contains(&a.add(b).expect("same parent")) {
                    return Classification::Other;
                }
            }
        }
        let subgroup = Subgroup::from_generators(&self.group, diffs).expect("verified closure");
        Classification::HaarShift { subgroup, shift }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self.classify(), Classification::Degenerate(_))
    }

    /// For a point mass, the supporting element.
    pub fn degenerate_atom(&self) -> Option<&GroupElement> {
        if self.weights.len() == 1 {
            self.weights.keys().next()
        } else {
            None
        }
    }
}

impl fmt::Display for Pmf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .weights
            .iter()
            .map(|(x, w)| format!("{x}: {w}"))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Result of [`Pmf::classify`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Classification {
    Degenerate(GroupElement),
    HaarShift {
        subgroup: Subgroup,
        shift: GroupElement,
    },
    Other,
}

impl Classification {
    pub fn is_degenerate(&self) -> bool {
        matches!(self, Classification::Degenerate(_))
    }

    /// Membership in I(X): point masses count as shifts of the trivial
    /// subgroup's Haar law.
    pub fn in_haar_shift_class(&self) -> bool {
        !matches!(self, Classification::Other)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Classification::Degenerate(_) => "degenerate",
            Classification::HaarShift { .. } => "haar_shift",
            Classification::Other => "other",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::Degenerate(x) => write!(f, "Degenerate({x})"),
            Classification::HaarShift { subgroup, shift } => {
                write!(f, "HaarShift(|K|={}, shift {shift})", subgroup.order())
            }
            Classification::Other => write!(f, "Other"),
        }
    }
}
