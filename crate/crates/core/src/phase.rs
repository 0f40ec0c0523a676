//! Exact root-of-unity arithmetic.
//!
//! Character values on the groups handled here are always roots of unity, so
//! every characteristic-function quantity is a finite sum of rational
//! multiples of roots of unity. [`Phase`] is the exponent t of e^{2πi t}
//! reduced modulo 1, and [`RootSum`] is such a finite sum with an exact
//! vanishing test via reduction modulo the cyclotomic polynomial. Floats only
//! appear when a value is rendered for display or numeric comparison.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::TAU;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};

/// Exact rational scalar used throughout the crate.
pub type Rat = Ratio<BigInt>;

pub fn rat(num: i64, den: i64) -> Rat {
    Ratio::new(BigInt::from(num), BigInt::from(den))
}

/// A rational number modulo 1, the exponent of a root of unity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Phase(Rat);

impl Phase {
    pub fn zero() -> Self {
        Phase(Rat::zero())
    }

    /// Reduces an arbitrary rational into [0, 1).
    pub fn new(value: Rat) -> Self {
        let floor = value.floor();
        Phase(value - floor)
    }

    pub fn from_parts(num: i64, den: i64) -> Self {
        assert!(den != 0, "phase denominator must be nonzero");
        Self::new(rat(num, den))
    }

    pub fn as_ratio(&self) -> &Rat {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn add(&self, other: &Phase) -> Phase {
        Phase::new(&self.0 + &other.0)
    }

    pub fn neg(&self) -> Phase {
        Phase::new(-&self.0)
    }

    pub fn scale(&self, k: &BigInt) -> Phase {
        Phase::new(&self.0 * k)
    }

    /// e^{2πi t} in double precision.
    pub fn to_complex(&self) -> Complex64 {
        let t = self.0.to_f64().expect("phase fits in f64");
        Complex64::new((TAU * t).cos(), (TAU * t).sin())
    }

    pub fn denominator(&self) -> BigInt {
        self.0.denom().clone()
    }
}

/// Finite sum of rational multiples of roots of unity, kept exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootSum {
    terms: BTreeMap<Phase, Rat>,
}

impl RootSum {
    pub fn zero() -> Self {
        RootSum {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::term(Phase::zero(), Rat::one())
    }

    /// The single term c·e^{2πi t}.
    pub fn term(phase: Phase, coefficient: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !coefficient.is_zero() {
            terms.insert(phase, coefficient);
        }
        RootSum { terms }
    }

    pub fn root(phase: Phase) -> Self {
        Self::term(phase, Rat::one())
    }

    pub fn constant(value: Rat) -> Self {
        Self::term(Phase::zero(), value)
    }

    pub fn add(&self, other: &RootSum) -> RootSum {
        let mut out = self.clone();
        for (phase, coef) in &other.terms {
            let entry = out.terms.entry(phase.clone()).or_insert_with(Rat::zero);
            *entry += coef;
            if entry.is_zero() {
                out.terms.remove(phase);
            }
        }
        out
    }

    pub fn sub(&self, other: &RootSum) -> RootSum {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> RootSum {
        RootSum {
            terms: self.terms.iter().map(|(p, c)| (p.clone(), -c)).collect(),
        }
    }

    pub fn mul(&self, other: &RootSum) -> RootSum {
        let mut out = RootSum::zero();
        for (p1, c1) in &self.terms {
            for (p2, c2) in &other.terms {
                let phase = p1.add(p2);
                let coef = c1 * c2;
                let entry = out.terms.entry(phase.clone()).or_insert_with(Rat::zero);
                *entry += coef;
                if entry.is_zero() {
                    out.terms.remove(&phase);
                }
            }
        }
        out
    }

    pub fn scale(&self, k: &Rat) -> RootSum {
        if k.is_zero() {
            return RootSum::zero();
        }
        RootSum {
            terms: self.terms.iter().map(|(p, c)| (p.clone(), c * k)).collect(),
        }
    }

    /// Complex conjugate: negates every phase.
    pub fn conj(&self) -> RootSum {
        RootSum {
            terms: self
                .terms
                .iter()
                .map(|(p, c)| (p.neg(), c.clone()))
                .collect(),
        }
    }

    /// |z|² as another exact sum.
    pub fn modulus_sq(&self) -> RootSum {
        self.mul(&self.conj())
    }

    pub fn to_complex(&self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (phase, coef) in &self.terms {
            let c = coef.to_f64().expect("coefficient fits in f64");
            acc += phase.to_complex() * c;
        }
        acc
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Exact vanishing test. Small common orders reduce the dense coefficient
    /// polynomial modulo the cyclotomic polynomial; large orders use the
    /// sparse tensor-basis reduction, which never materializes an N-vector.
    pub fn is_zero(&self) -> bool {
        if self.terms.is_empty() {
            return true;
        }
        let order = self.common_order();
        if order <= DENSE_ORDER_LIMIT {
            self.is_zero_dense(order)
        } else {
            self.is_zero_sparse(order)
        }
    }

    fn is_zero_dense(&self, order: u64) -> bool {
        let mut coeffs = vec![Rat::zero(); order as usize];
        for (phase, coef) in &self.terms {
            let k = (phase.as_ratio() * BigInt::from(order))
                .to_integer()
                .to_u64()
                .expect("phase index fits in u64");
            coeffs[k as usize] += coef;
        }
        let cyclo = cyclotomic(order);
        poly_rem_is_zero(&coeffs, &cyclo)
    }

    /// Writes each root ζ_N^k as a product of prime-power roots via the
    /// Chinese remainder splitting 1/N = Σ mᵢ/qᵢ (mod 1), reduces every
    /// prime-power exponent into the power basis of Q(ζ_{qᵢ}) with the
    /// relation ζ^{φ(q)+r} = −Σ_j ζ^{r+j·q/p}, and checks that all basis
    /// coefficients cancel. The products over reduced exponent tuples form a
    /// basis of Q(ζ_N), so cancellation is exact vanishing.
    fn is_zero_sparse(&self, order: u64) -> bool {
        let powers = prime_power_split(order);
        // mᵢ·(N/qᵢ) ≡ 1 (mod qᵢ)
        let multipliers: Vec<u64> = powers
            .iter()
            .map(|&(_, q)| mod_inverse(order / q, q))
            .collect();
        let mut basis: BTreeMap<Vec<u64>, Rat> = BTreeMap::new();
        for (phase, coef) in &self.terms {
            let k = (phase.as_ratio() * BigInt::from(order))
                .to_integer()
                .to_u64()
                .expect("phase index fits in u64");
            let tuple: Vec<u64> = powers
                .iter()
                .zip(&multipliers)
                .map(|(&(_, q), &m)| ((k % q) as u128 * m as u128 % q as u128) as u64)
                .collect();
            reduce_tuple(&powers, tuple, coef.clone(), 0, &mut basis);
        }
        basis.values().all(Rat::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.sub(&RootSum::one()).is_zero()
    }

    /// If the value is a rational number, returns it.
    pub fn to_rational(&self) -> Option<Rat> {
        if self.terms.is_empty() {
            return Some(Rat::zero());
        }
        let order = self.common_order();
        if order == 1 {
            return Some(self.terms.values().fold(Rat::zero(), |a, c| a + c));
        }
        let mut coeffs = vec![Rat::zero(); order as usize];
        for (phase, coef) in &self.terms {
            let k = (phase.as_ratio() * BigInt::from(order))
                .to_integer()
                .to_u64()
                .expect("phase index fits in u64");
            coeffs[k as usize] += coef;
        }
        let rem = poly_rem(&coeffs, &cyclotomic(order));
        if rem.iter().skip(1).all(Rat::is_zero) {
            Some(rem.first().cloned().unwrap_or_else(Rat::zero))
        } else {
            None
        }
    }

    /// Least common denominator of the phases: the order of the root-of-unity
    /// group in which the sum lives.
    fn common_order(&self) -> u64 {
        let mut order = BigInt::one();
        for phase in self.terms.keys() {
            order = order.lcm(&phase.denominator());
        }
        order.to_u64().expect("cyclotomic order fits in u64")
    }
}

/// Largest order handled by the dense polynomial-remainder route.
const DENSE_ORDER_LIMIT: u64 = 4096;

/// N as a list of (p, p^a) prime-power components.
fn prime_power_split(mut n: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut q = 1u64;
            while n.is_multiple_of(p) {
                q *= p;
                n /= p;
            }
            out.push((p, q));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, n));
    }
    out
}

/// Inverse of a modulo m for coprime inputs.
fn mod_inverse(a: u64, m: u64) -> u64 {
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let quotient = old_r / r;
        (old_r, r) = (r, old_r - quotient * r);
        (old_s, s) = (s, old_s - quotient * s);
    }
    debug_assert_eq!(old_r.abs(), 1, "inputs must be coprime");
    let inv = old_s * old_r.signum();
    inv.rem_euclid(m as i128) as u64
}

/// Recursively reduces one exponent tuple into the tensor power basis,
/// accumulating basis coefficients. Coordinate i is reduced with
/// ζ^{φ(q)+r} = −Σ_{j=0}^{p−2} ζ^{r + j·q/p}.
fn reduce_tuple(
    powers: &[(u64, u64)],
    tuple: Vec<u64>,
    coefficient: Rat,
    from: usize,
    basis: &mut BTreeMap<Vec<u64>, Rat>,
) {
    for i in from..powers.len() {
        let (p, q) = powers[i];
        let totient = q - q / p;
        if tuple[i] >= totient {
            let r = tuple[i] - totient;
            for j in 0..(p - 1) {
                let mut branch = tuple.clone();
                branch[i] = r + j * (q / p);
                reduce_tuple(powers, branch, -coefficient.clone(), i, basis);
            }
            return;
        }
    }
    let entry = basis.entry(tuple.clone()).or_insert_with(Rat::zero);
    *entry += coefficient;
    if entry.is_zero() {
        basis.remove(&tuple);
    }
}

/// Coefficients of the N-th cyclotomic polynomial, low degree first.
///
/// Computed as (x^N − 1) divided by the product of Φ_d over proper divisors
/// d | N, with a process-wide memo since the same small orders recur.
pub fn cyclotomic(order: u64) -> Vec<BigInt> {
    assert!(order >= 1);
    static CACHE: OnceLock<Mutex<HashMap<u64, Vec<BigInt>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&order) {
        return hit.clone();
    }
    let result = cyclotomic_uncached(order);
    cache.lock().unwrap().insert(order, result.clone());
    result
}

fn cyclotomic_uncached(order: u64) -> Vec<BigInt> {
    if order == 1 {
        return vec![BigInt::from(-1), BigInt::one()];
    }
    // x^order − 1
    let mut poly = vec![BigInt::zero(); order as usize + 1];
    poly[0] = BigInt::from(-1);
    poly[order as usize] = BigInt::one();
    for d in 1..order {
        if order.is_multiple_of(d) {
            poly = int_poly_div_exact(&poly, &cyclotomic(d));
        }
    }
    poly
}

/// Exact division of integer polynomials, panics on nonzero remainder.
fn int_poly_div_exact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let dn = den.len() - 1;
    assert!(den[dn].is_one(), "divisor must be monic");
    let mut rem: Vec<BigInt> = num.to_vec();
    let qn = num.len() - 1 - dn;
    let mut quot = vec![BigInt::zero(); qn + 1];
    for k in (0..=qn).rev() {
        let c = rem[k + dn].clone();
        quot[k] = c.clone();
        if c.is_zero() {
            continue;
        }
        for (i, d) in den.iter().enumerate() {
            rem[k + i] -= &c * d;
        }
    }
    assert!(
        rem.iter().all(Zero::is_zero),
        "non-exact polynomial division"
    );
    quot
}

/// Remainder of a rational polynomial modulo a monic integer polynomial.
fn poly_rem(num: &[Rat], den: &[BigInt]) -> Vec<Rat> {
    let dn = den.len() - 1;
    let mut rem: Vec<Rat> = num.to_vec();
    while rem.len() > dn {
        let lead = rem.pop().unwrap();
        if lead.is_zero() {
            continue;
        }
        let offset = rem.len() - dn;
        for (i, d) in den.iter().take(dn).enumerate() {
            rem[offset + i] -= &lead * d;
        }
    }
    rem
}

fn poly_rem_is_zero(num: &[Rat], den: &[BigInt]) -> bool {
    poly_rem(num, den).iter().all(Rat::is_zero)
}

/// Deterministic 64-bit generator (splitmix64) used for seeded sweeps.
///
/// Hand-rolled so that a fixed seed reproduces the same instance stream on
/// every platform and in every release.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform value in [0, bound).
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        // Rejection sampling keeps the stream unbiased.
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % bound;
            }
        }
    }

    /// Uniform integer in [lo, hi] inclusive.
    pub fn range_i64(&mut self, lo: i64, hi: i64) -> i64 {
        assert!(lo <= hi);
        let span = (hi - lo) as u64 + 1;
        lo + self.below(span) as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_reduces_mod_one() {
        assert_eq!(Phase::from_parts(5, 3), Phase::from_parts(2, 3));
        assert_eq!(Phase::from_parts(-1, 3), Phase::from_parts(2, 3));
        assert!(Phase::from_parts(6, 3).is_zero());
    }

    #[test]
    fn cyclotomic_small_orders() {
        let to_i = |v: Vec<i64>| v.into_iter().map(BigInt::from).collect::<Vec<_>>();
        assert_eq!(cyclotomic(1), to_i(vec![-1, 1]));
        assert_eq!(cyclotomic(2), to_i(vec![1, 1]));
        assert_eq!(cyclotomic(3), to_i(vec![1, 1, 1]));
        assert_eq!(cyclotomic(4), to_i(vec![1, 0, 1]));
        assert_eq!(cyclotomic(6), to_i(vec![1, -1, 1]));
        assert_eq!(cyclotomic(12), to_i(vec![1, 0, -1, 0, 1]));
    }

    #[test]
    fn sum_of_all_pth_roots_vanishes() {
        for p in [2u64, 3, 5, 7] {
            let mut sum = RootSum::zero();
            for k in 0..p {
                sum = sum.add(&RootSum::root(Phase::from_parts(k as i64, p as i64)));
            }
            assert!(sum.is_zero(), "sum of all {p}-th roots of unity");
            assert!(sum.to_complex().norm() < 1e-12);
        }
    }

    #[test]
    fn mixed_order_zero_detected() {
        // ζ6 − ζ3 − 1 = 0 because ζ6 = 1 + ζ3 (primitive roots).
        let z6 = RootSum::root(Phase::from_parts(1, 6));
        let z3 = RootSum::root(Phase::from_parts(1, 3));
        let diff = z6.sub(&z3).sub(&RootSum::one());
        assert!(diff.is_zero());
    }

    #[test]
    fn nonzero_sum_not_flagged() {
        let s = RootSum::one().add(&RootSum::term(Phase::from_parts(1, 3), rat(2, 5)));
        assert!(!s.is_zero());
        assert!(s.to_complex().norm() > 0.5);
    }

    #[test]
    fn modulus_of_unit_root_is_one() {
        let z = RootSum::root(Phase::from_parts(3, 7));
        assert!(z.modulus_sq().is_one());
    }

    #[test]
    fn rational_extraction() {
        let s = RootSum::root(Phase::from_parts(1, 4)).mul(&RootSum::root(Phase::from_parts(1, 4)));
        // i·i = −1
        assert_eq!(s.to_rational(), Some(rat(-1, 1)));
        assert_eq!(RootSum::root(Phase::from_parts(1, 3)).to_rational(), None);
    }

    #[test]
    fn dense_and_sparse_zero_tests_agree() {
        // engineered null sums: scaled rotations of full prime cosets,
        // possibly spoiled by one extra term
        let mut rng = SplitMix64::new(0xc1c10);
        for round in 0..200 {
            let mut sum = RootSum::zero();
            let cosets = 1 + rng.below(3);
            for _ in 0..cosets {
                let p = [2i64, 3, 5, 7][rng.below(4) as usize];
                let base_den = 1 + rng.below(8) as i64;
                let base = Phase::from_parts(rng.range_i64(0, base_den - 1), base_den);
                let scale = rat(rng.range_i64(-5, 5), 1 + rng.below(3) as i64);
                for j in 0..p {
                    sum = sum.add(&RootSum::term(
                        base.add(&Phase::from_parts(j, p)),
                        scale.clone(),
                    ));
                }
            }
            let spoiled = round % 2 == 1;
            if spoiled {
                sum = sum.add(&RootSum::term(
                    Phase::from_parts(rng.range_i64(0, 10), 11),
                    rat(1 + rng.range_i64(0, 4), 3),
                ));
            }
            if sum.is_empty() {
                continue;
            }
            let order = {
                let mut order = BigInt::one();
                for phase in sum.terms.keys() {
                    order = num_integer::Integer::lcm(&order, &phase.denominator());
                }
                order.to_u64().unwrap()
            };
            let dense = sum.is_zero_dense(order);
            let sparse = sum.is_zero_sparse(order);
            assert_eq!(dense, sparse, "routes disagree on round {round}");
            assert_eq!(dense, sum.to_complex().norm() < 1e-9);
        }
    }

    #[test]
    fn sparse_zero_test_handles_huge_orders() {
        let huge = 1_048_583i64; // prime beyond the dense limit
        let a = RootSum::term(Phase::from_parts(1, huge), rat(1, 2));
        let b = RootSum::term(Phase::from_parts(7, huge), rat(1, 2));
        let sum = a.add(&b);
        assert!(!sum.is_zero());
        assert!(sum.sub(&sum.clone()).is_zero());
        // a full small-prime coset scaled by a huge-order root vanishes
        let base = Phase::from_parts(3, huge);
        let mut coset = RootSum::zero();
        for j in 0..5 {
            coset = coset.add(&RootSum::root(base.add(&Phase::from_parts(j, 5))));
        }
        assert!(coset.is_zero());
    }

    #[test]
    fn order_105_coefficients_and_moebius_sum() {
        // the first cyclotomic polynomial with a coefficient of modulus 2
        let poly = cyclotomic(105);
        assert_eq!(poly.len(), 49);
        assert_eq!(poly[7], BigInt::from(-2));
        // the sum of the primitive 105-th roots of unity is μ(105) = −1
        let mut primitive_sum = RootSum::zero();
        for k in 1..105i64 {
            if num_integer::Integer::gcd(&k, &105) == 1 {
                primitive_sum = primitive_sum.add(&RootSum::root(Phase::from_parts(k, 105)));
            }
        }
        assert!(primitive_sum.add(&RootSum::one()).is_zero());
        assert!(!primitive_sum.is_zero());
    }

    #[test]
    fn splitmix_is_deterministic() {
        let mut a = SplitMix64::new(42);
        let mut b = SplitMix64::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }
}
