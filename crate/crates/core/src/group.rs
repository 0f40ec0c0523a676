//! Finitely generated abelian groups Z^d × Z(n₁) × … × Z(nₖ) in canonical
//! invariant-factor form, their elements, dual points, and subgroups.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;

use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::phase::{Phase, Rat};

/// Largest torsion order for which full element or dual enumeration is
/// offered; bigger groups get a clean error instead of an allocation storm.
pub const MAX_ENUMERABLE_ORDER: u64 = 1 << 20;

/// A finitely generated abelian group: free rank plus invariant factors in a
/// divisibility chain n₁ | n₂ | … | nₖ, each ≥ 2. The trivial group has rank
/// zero and no factors.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Group {
    lattice_rank: usize,
    factors: Vec<u64>,
}

impl Group {
    /// Builds a group from a divisibility chain, rejecting non-canonical input.
    pub fn new(lattice_rank: usize, factors: Vec<u64>) -> Result<Group> {
        for pair in factors.windows(2) {
            if pair[1] % pair[0] != 0 {
                return Err(Error::InvalidGroup(format!(
                    "invariant factors must form a divisibility chain: {} does not divide {}",
                    pair[0], pair[1]
                )));
            }
        }
        if factors.iter().any(|&n| n < 2) {
            return Err(Error::InvalidGroup(
                "invariant factors must be at least 2".into(),
            ));
        }
        Ok(Group {
            lattice_rank,
            factors,
        })
    }

    /// Builds a group from an arbitrary list of cyclic orders, normalizing to
    /// the invariant-factor chain by the diagonal Smith reduction (repeated
    /// gcd/lcm exchanges). Orders equal to 1 are dropped.
    pub fn from_cyclic_orders(lattice_rank: usize, orders: &[u64]) -> Result<Group> {
        if orders.contains(&0) {
            return Err(Error::InvalidGroup("cyclic order 0 is not finite".into()));
        }
        let mut v: Vec<u64> = orders.iter().copied().filter(|&n| n > 1).collect();
        loop {
            v.sort_unstable();
            let mut changed = false;
            for i in 0..v.len() {
                for j in (i + 1)..v.len() {
                    if !v[j].is_multiple_of(v[i]) {
                        let g = v[i].gcd(&v[j]);
                        let l = v[i] / g * v[j];
                        v[i] = g;
                        v[j] = l;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        v.retain(|&n| n > 1);
        Group::new(lattice_rank, v)
    }

    pub fn trivial() -> Group {
        Group {
            lattice_rank: 0,
            factors: Vec::new(),
        }
    }

    pub fn cyclic(n: u64) -> Group {
        Group::from_cyclic_orders(0, &[n]).expect("cyclic group")
    }

    pub fn lattice(rank: usize) -> Group {
        Group {
            lattice_rank: rank,
            factors: Vec::new(),
        }
    }

    pub fn lattice_rank(&self) -> usize {
        self.lattice_rank
    }

    pub fn factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn is_trivial(&self) -> bool {
        self.lattice_rank == 0 && self.factors.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.lattice_rank == 0
    }

    pub fn is_torsion_free(&self) -> bool {
        self.factors.is_empty()
    }

    /// If every invariant factor equals the same prime p, returns p.
    pub fn elementary_prime(&self) -> Option<u64> {
        let &first = self.factors.first()?;
        if self.factors.iter().all(|&n| n == first) && is_prime(first) {
            Some(first)
        } else {
            None
        }
    }

    /// Order of the torsion part.
    pub fn torsion_order(&self) -> u64 {
        self.factors
            .iter()
            .try_fold(1u64, |acc, &n| acc.checked_mul(n))
            .expect("torsion order fits in u64")
    }

    /// Exponent of the torsion part: lcm of the factors (1 when torsion-free).
    pub fn exponent(&self) -> u64 {
        self.factors.last().copied().unwrap_or(1)
    }

    pub fn order(&self) -> Result<u64> {
        if !self.is_finite() {
            return Err(Error::RequiresFinite(self.lattice_rank));
        }
        Ok(self.torsion_order())
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement {
            group: self.clone(),
            lattice: vec![BigInt::zero(); self.lattice_rank],
            torsion: vec![0; self.factors.len()],
        }
    }

    /// Element constructor; torsion entries are reduced modulo the factors.
    pub fn element(&self, lattice: &[i64], torsion: &[i64]) -> Result<GroupElement> {
        let lattice: Vec<BigInt> = lattice.iter().map(|&v| BigInt::from(v)).collect();
        let torsion: Vec<BigInt> = torsion.iter().map(|&v| BigInt::from(v)).collect();
        self.element_big(lattice, torsion)
    }

    pub fn element_big(&self, lattice: Vec<BigInt>, torsion: Vec<BigInt>) -> Result<GroupElement> {
        if lattice.len() != self.lattice_rank {
            return Err(Error::LengthMismatch {
                expected: self.lattice_rank,
                got: lattice.len(),
            });
        }
        if torsion.len() != self.factors.len() {
            return Err(Error::LengthMismatch {
                expected: self.factors.len(),
                got: torsion.len(),
            });
        }
        let torsion = torsion
            .iter()
            .zip(&self.factors)
            .map(|(v, &n)| reduce_mod(v, n))
            .collect();
        Ok(GroupElement {
            group: self.clone(),
            lattice,
            torsion,
        })
    }

    /// Every element of the torsion part, embedded with zero lattice part.
    pub fn torsion_elements(&self) -> Vec<GroupElement> {
        let mut out = Vec::with_capacity(self.torsion_order() as usize);
        let mut counter = vec![0u64; self.factors.len()];
        loop {
            out.push(GroupElement {
                group: self.clone(),
                lattice: vec![BigInt::zero(); self.lattice_rank],
                torsion: counter.clone(),
            });
            if !increment(&mut counter, &self.factors) {
                return out;
            }
        }
    }

    /// All elements; requires a finite group of enumerable size.
    pub fn elements(&self) -> Result<Vec<GroupElement>> {
        if !self.is_finite() {
            return Err(Error::RequiresFinite(self.lattice_rank));
        }
        self.check_enumerable()?;
        Ok(self.torsion_elements())
    }

    /// Everything here is desk-scale; refuse enumerations that would not be.
    fn check_enumerable(&self) -> Result<()> {
        if self.torsion_order() > MAX_ENUMERABLE_ORDER {
            return Err(Error::Precondition(format!(
                "group {self} has order {} beyond the enumerable bound {MAX_ENUMERABLE_ORDER}",
                self.torsion_order()
            )));
        }
        Ok(())
    }

    /// The dual residue vector at a mixed-radix index, without enumerating
    /// the whole dual.
    pub fn dual_point_at(&self, index: u64) -> DualPoint {
        let mut torsion = Vec::with_capacity(self.factors.len());
        let mut rest = index % self.torsion_order().max(1);
        for &n in &self.factors {
            torsion.push(rest % n);
            rest /= n;
        }
        DualPoint {
            group: self.clone(),
            torsion,
            lattice: vec![Rat::zero(); self.lattice_rank],
        }
    }

    pub fn dual_zero(&self) -> DualPoint {
        DualPoint {
            group: self.clone(),
            torsion: vec![0; self.factors.len()],
            lattice: vec![Rat::zero(); self.lattice_rank],
        }
    }

    pub fn dual_point(&self, torsion: &[i64], lattice: &[Rat]) -> Result<DualPoint> {
        if torsion.len() != self.factors.len() {
            return Err(Error::LengthMismatch {
                expected: self.factors.len(),
                got: torsion.len(),
            });
        }
        if lattice.len() != self.lattice_rank {
            return Err(Error::LengthMismatch {
                expected: self.lattice_rank,
                got: lattice.len(),
            });
        }
        let torsion = torsion
            .iter()
            .zip(&self.factors)
            .map(|(&v, &n)| reduce_mod(&BigInt::from(v), n))
            .collect();
        let lattice = lattice.iter().map(reduce_mod_one).collect();
        Ok(DualPoint {
            group: self.clone(),
            torsion,
            lattice,
        })
    }

    /// The full dual of a finite group, enumerated as residue vectors.
    pub fn dual_points(&self) -> Result<Vec<DualPoint>> {
        if !self.is_finite() {
            return Err(Error::RequiresFinite(self.lattice_rank));
        }
        self.check_enumerable()?;
        let mut out = Vec::with_capacity(self.torsion_order() as usize);
        let mut counter = vec![0u64; self.factors.len()];
        loop {
            out.push(DualPoint {
                group: self.clone(),
                torsion: counter.clone(),
                lattice: Vec::new(),
            });
            if !increment(&mut counter, &self.factors) {
                return Ok(out);
            }
        }
    }

    /// Dual sample set: the full finite dual crossed with a rational grid of
    /// the stated resolution on each torus coordinate.
    pub fn dual_grid(&self, resolution: u64) -> Vec<DualPoint> {
        assert!(resolution >= 1);
        let mut torsion_parts = Vec::new();
        let mut counter = vec![0u64; self.factors.len()];
        loop {
            torsion_parts.push(counter.clone());
            if !increment(&mut counter, &self.factors) {
                break;
            }
        }
        let mut out = Vec::new();
        let grid_factors = vec![resolution; self.lattice_rank];
        let mut grid = vec![0u64; self.lattice_rank];
        loop {
            let lattice: Vec<Rat> = grid
                .iter()
                .map(|&g| Rat::new(BigInt::from(g), BigInt::from(resolution)))
                .collect();
            for t in &torsion_parts {
                out.push(DualPoint {
                    group: self.clone(),
                    torsion: t.clone(),
                    lattice: lattice.clone(),
                });
            }
            if self.lattice_rank == 0 || !increment(&mut grid, &grid_factors) {
                return out;
            }
        }
    }

    /// The direct square X × X, with coordinates interleaved per factor.
    pub fn square(&self) -> Group {
        let mut factors = Vec::with_capacity(self.factors.len() * 2);
        for &n in &self.factors {
            factors.push(n);
            factors.push(n);
        }
        Group {
            lattice_rank: self.lattice_rank * 2,
            factors,
        }
    }

    /// Embeds a pair of dual points into the dual of the square group, the
    /// transpose of [`Group::pair`]: pairing(pair(x,y), pair_dual(u,v)) =
    /// pairing(x,u)·pairing(y,v).
    pub fn pair_dual(&self, u: &DualPoint, v: &DualPoint) -> Result<DualPoint> {
        self.check_parent(&u.group)?;
        self.check_parent(&v.group)?;
        let square = self.square();
        let mut lattice = Vec::with_capacity(self.lattice_rank * 2);
        lattice.extend(u.lattice.iter().cloned());
        lattice.extend(v.lattice.iter().cloned());
        let mut torsion = Vec::with_capacity(self.factors.len() * 2);
        for i in 0..self.factors.len() {
            torsion.push(u.torsion[i]);
            torsion.push(v.torsion[i]);
        }
        Ok(DualPoint {
            group: square,
            torsion,
            lattice,
        })
    }

    /// Embeds a pair of elements into the square group.
    pub fn pair(&self, x: &GroupElement, y: &GroupElement) -> Result<GroupElement> {
        self.check_parent(&x.group)?;
        self.check_parent(&y.group)?;
        let square = self.square();
        let mut lattice = Vec::with_capacity(self.lattice_rank * 2);
        lattice.extend(x.lattice.iter().cloned());
        lattice.extend(y.lattice.iter().cloned());
        let mut torsion = Vec::with_capacity(self.factors.len() * 2);
        for i in 0..self.factors.len() {
            torsion.push(x.torsion[i]);
            torsion.push(y.torsion[i]);
        }
        Ok(GroupElement {
            group: square,
            lattice,
            torsion,
        })
    }

    pub fn check_parent(&self, other: &Group) -> Result<()> {
        if self != other {
            return Err(Error::GroupMismatch(self.to_string(), other.to_string()));
        }
        Ok(())
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        match self.lattice_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        for &n in &self.factors {
            parts.push(format!("Z({n})"));
        }
        write!(f, "{}", parts.join(" x "))
    }
}

fn reduce_mod(v: &BigInt, n: u64) -> u64 {
    let m = v.mod_floor(&BigInt::from(n));
    m.to_u64().expect("reduced residue fits in u64")
}

fn reduce_mod_one(v: &Rat) -> Rat {
    let f = v.floor();
    v - f
}

/// Advances a mixed-radix counter; false once it wraps to zero.
fn increment(counter: &mut [u64], radices: &[u64]) -> bool {
    for (c, &r) in counter.iter_mut().zip(radices) {
        *c += 1;
        if *c < r {
            return true;
        }
        *c = 0;
    }
    false
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// An element of a [`Group`]: integer lattice coordinates plus torsion
/// residues kept reduced modulo the invariant factors.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupElement {
    group: Group,
    lattice: Vec<BigInt>,
    torsion: Vec<u64>,
}

impl GroupElement {
    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn lattice(&self) -> &[BigInt] {
        &self.lattice
    }

    pub fn torsion(&self) -> &[u64] {
        &self.torsion
    }

    pub fn is_zero(&self) -> bool {
        self.lattice.iter().all(Zero::is_zero) && self.torsion.iter().all(|&t| t == 0)
    }

    pub fn add(&self, other: &GroupElement) -> Result<GroupElement> {
        self.group.check_parent(&other.group)?;
        let lattice = self
            .lattice
            .iter()
            .zip(&other.lattice)
            .map(|(a, b)| a + b)
            .collect();
        let torsion = self
            .torsion
            .iter()
            .zip(&other.torsion)
            .zip(&self.group.factors)
            .map(|((&a, &b), &n)| (a + b) % n)
            .collect();
        Ok(GroupElement {
            group: self.group.clone(),
            lattice,
            torsion,
        })
    }

    pub fn neg(&self) -> GroupElement {
        let lattice = self.lattice.iter().map(|a| -a).collect();
        let torsion = self
            .torsion
            .iter()
            .zip(&self.group.factors)
            .map(|(&a, &n)| if a == 0 { 0 } else { n - a })
            .collect();
        GroupElement {
            group: self.group.clone(),
            lattice,
            torsion,
        }
    }

    pub fn sub(&self, other: &GroupElement) -> Result<GroupElement> {
        self.add(&other.neg())
    }

    /// The endomorphism x ↦ a·x.
    pub fn scalar_mul(&self, a: &BigInt) -> GroupElement {
        let lattice = self.lattice.iter().map(|v| v * a).collect();
        let torsion = self
            .torsion
            .iter()
            .zip(&self.group.factors)
            .map(|(&t, &n)| reduce_mod(&(BigInt::from(t) * a), n))
            .collect();
        GroupElement {
            group: self.group.clone(),
            lattice,
            torsion,
        }
    }

    pub fn scalar_mul_i64(&self, a: i64) -> GroupElement {
        self.scalar_mul(&BigInt::from(a))
    }

    /// Exact character pairing: the rational phase t with (x, y) = e^{2πi t}.
    pub fn pairing_phase(&self, y: &DualPoint) -> Result<Phase> {
        self.group.check_parent(&y.group)?;
        let mut total = Rat::zero();
        for ((&x, &yt), &n) in self.torsion.iter().zip(&y.torsion).zip(&self.group.factors) {
            total += Rat::new(BigInt::from(x) * BigInt::from(yt), BigInt::from(n));
        }
        for (x, yl) in self.lattice.iter().zip(&y.lattice) {
            total += yl * x;
        }
        Ok(Phase::new(total))
    }

    /// Character value as a complex number.
    pub fn pairing(&self, y: &DualPoint) -> Result<Complex64> {
        Ok(self.pairing_phase(y)?.to_complex())
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.lattice.iter().map(|v| v.to_string()).collect();
        parts.extend(self.torsion.iter().map(|v| v.to_string()));
        write!(f, "({})", parts.join(","))
    }
}

/// A point of the dual group: the finite part is self-dual and indexed by the
/// same residue vectors; each torus coordinate is a reduced rational in [0,1).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DualPoint {
    group: Group,
    torsion: Vec<u64>,
    lattice: Vec<Rat>,
}

impl DualPoint {
    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn torsion(&self) -> &[u64] {
        &self.torsion
    }

    pub fn lattice(&self) -> &[Rat] {
        &self.lattice
    }

    pub fn is_zero(&self) -> bool {
        self.torsion.iter().all(|&t| t == 0) && self.lattice.iter().all(Zero::is_zero)
    }

    pub fn add(&self, other: &DualPoint) -> Result<DualPoint> {
        self.group.check_parent(&other.group)?;
        let torsion = self
            .torsion
            .iter()
            .zip(&other.torsion)
            .zip(&self.group.factors)
            .map(|((&a, &b), &n)| (a + b) % n)
            .collect();
        let lattice = self
            .lattice
            .iter()
            .zip(&other.lattice)
            .map(|(a, b)| reduce_mod_one(&(a + b)))
            .collect();
        Ok(DualPoint {
            group: self.group.clone(),
            torsion,
            lattice,
        })
    }

    pub fn neg(&self) -> DualPoint {
        let torsion = self
            .torsion
            .iter()
            .zip(&self.group.factors)
            .map(|(&a, &n)| if a == 0 { 0 } else { n - a })
            .collect();
        let lattice = self.lattice.iter().map(|a| reduce_mod_one(&-a)).collect();
        DualPoint {
            group: self.group.clone(),
            torsion,
            lattice,
        }
    }

    pub fn scalar_mul(&self, a: &BigInt) -> DualPoint {
        let torsion = self
            .torsion
            .iter()
            .zip(&self.group.factors)
            .map(|(&t, &n)| reduce_mod(&(BigInt::from(t) * a), n))
            .collect();
        let lattice = self
            .lattice
            .iter()
            .map(|v| reduce_mod_one(&(v * a)))
            .collect();
        DualPoint {
            group: self.group.clone(),
            torsion,
            lattice,
        }
    }

    pub fn scalar_mul_i64(&self, a: i64) -> DualPoint {
        self.scalar_mul(&BigInt::from(a))
    }

    /// Pairs two dual coordinates of the same square as u·a + v·b.
    pub fn combine(a: &BigInt, u: &DualPoint, b: &BigInt, v: &DualPoint) -> Result<DualPoint> {
        u.scalar_mul(a).add(&v.scalar_mul(b))
    }
}

impl fmt::Display for DualPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.torsion.iter().map(|v| v.to_string()).collect();
        parts.extend(self.lattice.iter().map(|v| v.to_string()));
        write!(f, "[{}]", parts.join(","))
    }
}

/// True iff the endomorphism x ↦ a·x is nonzero somewhere on the group, the
/// group-side analogue of "the coefficient a is nonzero".
pub fn admissible(group: &Group, a: &BigInt) -> bool {
    if a.is_zero() {
        return false;
    }
    if group.lattice_rank() > 0 {
        return true;
    }
    group
        .factors()
        .iter()
        .any(|&n| !(a % BigInt::from(n)).is_zero())
}

pub fn admissible_i64(group: &Group, a: i64) -> bool {
    admissible(group, &BigInt::from(a))
}

/// A finite subgroup of the torsion part, with its element set cached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subgroup {
    group: Group,
    generators: Vec<GroupElement>,
    elements: BTreeSet<GroupElement>,
}

impl Subgroup {
    /// Closure of a generating set. Generators must have zero lattice part.
    pub fn from_generators(group: &Group, generators: Vec<GroupElement>) -> Result<Subgroup> {
        for g in &generators {
            group.check_parent(g.group())?;
            if g.lattice.iter().any(|v| !v.is_zero()) {
                return Err(Error::Precondition(
                    "subgroup generators must lie in the torsion part".into(),
                ));
            }
        }
        let mut elements: BTreeSet<GroupElement> = BTreeSet::new();
        elements.insert(group.zero());
        let mut frontier: Vec<GroupElement> = vec![group.zero()];
        while let Some(e) = frontier.pop() {
            for g in &generators {
                let next = e.add(g).expect("same parent");
                if elements.insert(next.clone()) {
                    frontier.push(next);
                }
            }
        }
        Ok(Subgroup {
            group: group.clone(),
            generators,
            elements,
        })
    }

    pub fn trivial(group: &Group) -> Subgroup {
        Subgroup::from_generators(group, Vec::new()).expect("trivial subgroup")
    }

    /// The whole torsion part.
    pub fn full_torsion(group: &Group) -> Subgroup {
        let gens = (0..group.factors().len())
            .map(|i| {
                let mut torsion = vec![0i64; group.factors().len()];
                torsion[i] = 1;
                group
                    .element(&vec![0; group.lattice_rank()], &torsion)
                    .expect("generator")
            })
            .collect();
        Subgroup::from_generators(group, gens).expect("full torsion subgroup")
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    pub fn elements(&self) -> impl Iterator<Item = &GroupElement> {
        self.elements.iter()
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, e: &GroupElement) -> bool {
        self.elements.contains(e)
    }

    pub fn contains_torsion(&self, torsion: &[u64]) -> bool {
        self.elements.iter().any(|e| e.torsion() == torsion)
    }

    pub fn element_set(&self) -> &BTreeSet<GroupElement> {
        &self.elements
    }
}

/// Complete duplicate-free enumeration of the subgroups of the torsion part,
/// by closure search: every subgroup arises by repeatedly adjoining one more
/// element to a smaller subgroup.
pub fn subgroups(group: &Group) -> Vec<Subgroup> {
    let all = group.torsion_elements();
    let trivial = Subgroup::trivial(group);
    let mut seen: BTreeSet<Vec<GroupElement>> = BTreeSet::new();
    let key = |s: &Subgroup| s.elements.iter().cloned().collect::<Vec<_>>();
    seen.insert(key(&trivial));
    let mut out = vec![trivial];
    let mut frontier = vec![0usize];
    while let Some(idx) = frontier.pop() {
        let current = out[idx].clone();
        for x in &all {
            if current.contains(x) {
                continue;
            }
            let mut gens = current.generators.clone();
            gens.push(x.clone());
            let bigger = Subgroup::from_generators(group, gens).expect("closure");
            if seen.insert(key(&bigger)) {
                out.push(bigger);
                frontier.push(out.len() - 1);
            }
        }
    }
    out
}

/// All dual residue vectors pairing trivially with every element of H,
/// returned in the shared residue coordinates of the finite dual.
pub fn annihilator(group: &Group, subgroup: &Subgroup) -> Result<Subgroup> {
    group.check_parent(subgroup.group())?;
    let mut members = Vec::new();
    let mut counter = vec![0u64; group.factors().len()];
    loop {
        let candidate = DualPoint {
            group: group.clone(),
            torsion: counter.clone(),
            lattice: vec![Rat::zero(); group.lattice_rank()],
        };
        let kills_all = subgroup
            .elements()
            .all(|h| h.pairing_phase(&candidate).expect("same parent").is_zero());
        if kills_all {
            members.push(
                group
                    .element_big(
                        vec![BigInt::zero(); group.lattice_rank()],
                        counter.iter().map(|&c| BigInt::from(c)).collect(),
                    )
                    .expect("residue element"),
            );
        }
        if !increment(&mut counter, group.factors()) {
            break;
        }
    }
    Subgroup::from_generators(group, members)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::rat;

    #[test]
    fn canonical_form_rejects_broken_chain() {
        assert!(Group::new(0, vec![4, 2]).is_err());
        assert!(Group::new(0, vec![2, 6]).is_ok());
        assert!(Group::new(0, vec![1]).is_err());
    }

    #[test]
    fn smith_style_normalization() {
        // Z(2) x Z(3) ≅ Z(6), Z(4) x Z(6) ≅ Z(2) x Z(12)
        assert_eq!(
            Group::from_cyclic_orders(0, &[2, 3]).unwrap().factors(),
            &[6]
        );
        assert_eq!(
            Group::from_cyclic_orders(0, &[4, 6]).unwrap().factors(),
            &[2, 12]
        );
        assert_eq!(
            Group::from_cyclic_orders(1, &[1, 1]).unwrap(),
            Group::lattice(1)
        );
    }

    #[test]
    fn add_reduces_torsion() {
        let z3 = Group::cyclic(3);
        let two = z3.element(&[], &[2]).unwrap();
        assert_eq!(two.add(&two).unwrap(), z3.element(&[], &[1]).unwrap());

        let z2 = Group::lattice(2);
        let a = z2.element(&[1, 2], &[]).unwrap();
        let b = z2.element(&[-1, 3], &[]).unwrap();
        assert_eq!(a.add(&b).unwrap(), z2.element(&[0, 5], &[]).unwrap());

        let g = Group::new(0, vec![2, 4]).unwrap();
        let x = g.element(&[], &[1, 3]).unwrap();
        let y = g.element(&[], &[1, 1]).unwrap();
        assert!(x.add(&y).unwrap().is_zero());
    }

    #[test]
    fn add_rejects_mismatched_parents() {
        let a = Group::cyclic(3).zero();
        let b = Group::cyclic(5).zero();
        assert!(a.add(&b).is_err());
    }

    #[test]
    fn scalar_mul_examples() {
        let z4 = Group::cyclic(4);
        let three = z4.element(&[], &[3]).unwrap();
        assert_eq!(three.scalar_mul_i64(2), z4.element(&[], &[2]).unwrap());
        assert!(three.scalar_mul_i64(0).is_zero());

        let z5 = Group::cyclic(5);
        for x in z5.torsion_elements() {
            assert!(x.scalar_mul_i64(10).is_zero());
        }
    }

    #[test]
    fn pairing_examples() {
        let z2 = Group::cyclic(2);
        let x = z2.element(&[], &[1]).unwrap();
        let y = z2.dual_point(&[1], &[]).unwrap();
        let v = x.pairing(&y).unwrap();
        assert!((v.re + 1.0).abs() < 1e-12 && v.im.abs() < 1e-12);

        let z3 = Group::cyclic(3);
        let x = z3.element(&[], &[1]).unwrap();
        let y = z3.dual_point(&[1], &[]).unwrap();
        let v = x.pairing(&y).unwrap();
        assert!((v.re + 0.5).abs() < 1e-12);
        assert!((v.im - 0.75f64.sqrt()).abs() < 1e-12);

        // identity pairs to 1 against everything
        let zero = z3.zero();
        assert_eq!(zero.pairing_phase(&y).unwrap(), Phase::zero());
    }

    #[test]
    fn pairing_is_multiplicative() {
        let g = Group::from_cyclic_orders(1, &[4]).unwrap();
        let x = g.element(&[2], &[3]).unwrap();
        let xp = g.element(&[-1], &[2]).unwrap();
        let y = g.dual_point(&[1], &[rat(1, 3)]).unwrap();
        let lhs = x.add(&xp).unwrap().pairing_phase(&y).unwrap();
        let rhs = x
            .pairing_phase(&y)
            .unwrap()
            .add(&xp.pairing_phase(&y).unwrap());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn admissible_examples() {
        assert!(!admissible_i64(&Group::cyclic(5), 10));
        let g = Group::from_cyclic_orders(0, &[2, 6]).unwrap();
        assert!(admissible_i64(&g, 3));
        let z2 = Group::lattice(2);
        assert!(!admissible_i64(&z2, 0));
        assert!(admissible_i64(&z2, 7));
    }

    #[test]
    fn admissible_matches_exhaustive_oracle() {
        for g in [
            Group::cyclic(4),
            Group::cyclic(5),
            Group::from_cyclic_orders(0, &[2, 6]).unwrap(),
            Group::from_cyclic_orders(0, &[2, 2]).unwrap(),
        ] {
            for a in -12i64..=12 {
                let brute = g
                    .torsion_elements()
                    .iter()
                    .any(|x| !x.scalar_mul_i64(a).is_zero());
                assert_eq!(admissible_i64(&g, a), brute, "group {g}, a={a}");
            }
        }
    }

    #[test]
    fn subgroup_counts() {
        assert_eq!(subgroups(&Group::cyclic(4)).len(), 3);
        let v4 = Group::from_cyclic_orders(0, &[2, 2]).unwrap();
        assert_eq!(subgroups(&v4).len(), 5);
        assert_eq!(subgroups(&Group::trivial()).len(), 1);
    }

    #[test]
    fn subgroups_match_subset_filter_oracle() {
        // Independent completeness oracle: filter all subsets closed under
        // subtraction, feasible for orders ≤ 16.
        for g in [
            Group::cyclic(6),
            Group::from_cyclic_orders(0, &[2, 4]).unwrap(),
            Group::from_cyclic_orders(0, &[2, 2, 2]).unwrap(),
        ] {
            let all = g.torsion_elements();
            let n = all.len();
            let mut count = 0usize;
            for mask in 0u32..(1 << n) {
                if mask & 1 == 0 {
                    continue; // must contain zero (element 0 is the identity)
                }
                let members: Vec<_> = (0..n)
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| all[i].clone())
                    .collect();
                let set: BTreeSet<_> = members.iter().cloned().collect();
                let closed = members
                    .iter()
                    .all(|a| members.iter().all(|b| set.contains(&a.sub(b).unwrap())));
                if closed {
                    count += 1;
                }
            }
            assert_eq!(subgroups(&g).len(), count, "group {g}");
        }
    }

    #[test]
    fn cyclic_subgroup_count_is_divisor_count() {
        for n in 2u64..=64 {
            let divisors = (1..=n).filter(|d| n % d == 0).count();
            assert_eq!(subgroups(&Group::cyclic(n)).len(), divisors, "Z({n})");
        }
    }

    #[test]
    fn subgroup_counts_match_formulas_up_to_order_64() {
        // Z(p)²: 1 + (p+1) + 1 subgroups
        for p in [2u64, 3, 5, 7] {
            let g = Group::from_cyclic_orders(0, &[p, p]).unwrap();
            assert_eq!(subgroups(&g).len() as u64, p + 3, "Z({p})^2");
        }
        // Z(2)³: 1 + 7 + 7 + 1 = 16 (flats of the Fano plane plus ends)
        let g = Group::from_cyclic_orders(0, &[2, 2, 2]).unwrap();
        assert_eq!(subgroups(&g).len(), 16);
        // coprime products multiply their subgroup counts
        let count = |g: &Group| subgroups(g).len();
        let z4z9 = Group::from_cyclic_orders(0, &[4, 9]).unwrap(); // ≅ Z(36)
        assert_eq!(count(&z4z9), 9);
        let v4 = Group::from_cyclic_orders(0, &[2, 2]).unwrap();
        let v4z9 = Group::from_cyclic_orders(0, &[2, 2, 9]).unwrap(); // order 36
        assert_eq!(count(&v4z9), count(&v4) * count(&Group::cyclic(9)));
        let v4z7 = Group::from_cyclic_orders(0, &[2, 2, 7]).unwrap(); // order 28
        assert_eq!(count(&v4z7), count(&v4) * 2);
    }

    #[test]
    fn annihilator_examples() {
        let z4 = Group::cyclic(4);
        let all = subgroups(&z4);
        let h = all.iter().find(|s| s.order() == 2).unwrap();
        let ann = annihilator(&z4, h).unwrap();
        assert_eq!(ann.order(), 2);
        assert!(ann.contains_torsion(&[0]));
        assert!(ann.contains_torsion(&[2]));

        let trivial = Subgroup::trivial(&z4);
        assert_eq!(annihilator(&z4, &trivial).unwrap().order(), 4);
        let full = Subgroup::full_torsion(&z4);
        assert_eq!(annihilator(&z4, &full).unwrap().order(), 1);
    }

    #[test]
    fn annihilator_is_an_involution() {
        for g in [
            Group::cyclic(8),
            Group::from_cyclic_orders(0, &[2, 6]).unwrap(),
            Group::from_cyclic_orders(0, &[3, 3]).unwrap(),
        ] {
            for h in subgroups(&g) {
                let ann = annihilator(&g, &h).unwrap();
                assert_eq!(
                    h.order() * ann.order(),
                    g.torsion_order() as usize,
                    "order identity on {g}"
                );
                let back = annihilator(&g, &ann).unwrap();
                assert_eq!(
                    back.element_set(),
                    h.element_set(),
                    "double annihilator on {g}"
                );
            }
        }
    }

    #[test]
    fn square_group_interleaves() {
        let g = Group::from_cyclic_orders(0, &[2, 6]).unwrap();
        assert_eq!(g.square().factors(), &[2, 2, 6, 6]);
        let x = g.element(&[], &[1, 5]).unwrap();
        let y = g.element(&[], &[0, 3]).unwrap();
        let p = g.pair(&x, &y).unwrap();
        assert_eq!(p.torsion(), &[1, 0, 5, 3]);
    }
}
