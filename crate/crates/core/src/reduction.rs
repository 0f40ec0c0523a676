//! Coefficient reduction: regroups the left-hand coefficient pairs by
//! proportionality class, rescales the dual variables by the products A and
//! B, and emits the transformed row system together with the nonzero checks
//! that the elimination argument needs. When no proportionality bracket is
//! admissible the input routes to the substitution branch that collapses the
//! whole left side instead.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::forms::FormSystem;
use crate::group::{admissible, Group};

/// Zero-testing regime for coefficients. On a group where every invariant
/// factor is the same prime p the coefficient action factors through mod-p
/// arithmetic, so coefficients are first reduced to symmetric representatives
/// and "zero" means "divisible by p". Everywhere else plain integers apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoefficientDomain {
    Integers,
    ModPrime(u64),
}

impl CoefficientDomain {
    pub fn for_group(group: &Group) -> CoefficientDomain {
        if group.is_finite() {
            if let Some(p) = group.elementary_prime() {
                return CoefficientDomain::ModPrime(p);
            }
        }
        CoefficientDomain::Integers
    }

    /// Canonical representative of a coefficient.
    pub fn reduce(&self, x: &BigInt) -> BigInt {
        match self {
            CoefficientDomain::Integers => x.clone(),
            CoefficientDomain::ModPrime(p) => {
                let p_big = BigInt::from(*p);
                let mut r = x % &p_big;
                if r.is_negative() {
                    r += &p_big;
                }
                // symmetric representative in (−p/2, p/2]
                if &r * 2u32 > p_big {
                    r -= BigInt::from(*p);
                }
                r
            }
        }
    }

    pub fn is_zero(&self, x: &BigInt) -> bool {
        match self {
            CoefficientDomain::Integers => x.is_zero(),
            CoefficientDomain::ModPrime(p) => (x % BigInt::from(*p)).is_zero(),
        }
    }
}

/// Which reduced left-hand row this is.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    /// One proportionality class of pairs with both coefficients nonzero.
    RatioClass(usize),
    /// The block with bⱼ = 0: row (1, 0).
    PureA,
    /// The block with aⱼ = 0: row (0, 1).
    PureB,
}

/// One variable folded into a reduced row: the row's law is the convolution
/// of the images f_multiplier(μ_index) over its members.
#[derive(Clone, Debug)]
pub struct ReducedMember {
    pub index: usize,
    pub multiplier: BigInt,
}

/// A combined left-hand row of the transformed equation.
#[derive(Clone, Debug)]
pub struct ReducedRow {
    pub kind: RowKind,
    pub a: BigInt,
    pub b: BigInt,
    pub members: Vec<ReducedMember>,
}

/// A left-hand variable outside the condition prefix, carried through with
/// rescaled coefficients (aⱼ·A, bⱼ·B).
#[derive(Clone, Debug)]
pub struct CarriedRow {
    pub index: usize,
    pub a: BigInt,
    pub b: BigInt,
}

/// A right-hand row (cⱼ·A, dⱼ·B).
#[derive(Clone, Debug)]
pub struct RhsRow {
    pub index: usize,
    pub c: BigInt,
    pub d: BigInt,
}

/// The verified nonzero conditions, returned as data so callers can audit
/// them instead of trusting the construction.
#[derive(Clone, Debug, Default)]
pub struct ReductionChecks {
    /// (reduced row position, rhs index) ↦ AᵢDⱼ − BᵢCⱼ.
    pub determinants: Vec<((usize, usize), BigInt)>,
    /// (lhs position, lhs position) ↦ AᵢBⱼ − BᵢAⱼ over distinct pairs with at
    /// least one reduced row involved.
    pub brackets: Vec<((usize, usize), BigInt)>,
    pub all_nonzero: bool,
}

/// Output of a successful reduction.
#[derive(Clone, Debug)]
pub struct ReducedSystem {
    pub domain: CoefficientDomain,
    /// The dual substitution u ↦ A·u, v ↦ B·v.
    pub scale_u: BigInt,
    pub scale_v: BigInt,
    pub rows: Vec<ReducedRow>,
    pub carried: Vec<CarriedRow>,
    pub rhs: Vec<RhsRow>,
    /// Left-hand variables absent after domain reduction (aⱼ ≡ bⱼ ≡ 0).
    pub absent: Vec<usize>,
    pub checks: ReductionChecks,
}

impl ReducedSystem {
    /// All left-hand coefficient pairs, reduced rows first.
    pub fn lhs_pairs(&self) -> Vec<(BigInt, BigInt)> {
        let mut out: Vec<(BigInt, BigInt)> = self
            .rows
            .iter()
            .map(|r| (r.a.clone(), r.b.clone()))
            .collect();
        out.extend(self.carried.iter().map(|r| (r.a.clone(), r.b.clone())));
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "domain": match self.domain {
                CoefficientDomain::Integers => "integers".to_string(),
                CoefficientDomain::ModPrime(p) => format!("mod_{p}"),
            },
            "scale_u": self.scale_u.to_string(),
            "scale_v": self.scale_v.to_string(),
            "rows": self.rows.iter().map(|r| serde_json::json!({
                "kind": match r.kind {
                    RowKind::RatioClass(i) => format!("ratio_class_{i}"),
                    RowKind::PureA => "pure_a".into(),
                    RowKind::PureB => "pure_b".into(),
                },
                "a": r.a.to_string(),
                "b": r.b.to_string(),
                "members": r.members.iter().map(|m| serde_json::json!({
                    "index": m.index,
                    "multiplier": m.multiplier.to_string(),
                })).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "carried": self.carried.iter().map(|r| serde_json::json!({
                "index": r.index, "a": r.a.to_string(), "b": r.b.to_string(),
            })).collect::<Vec<_>>(),
            "rhs": self.rhs.iter().map(|r| serde_json::json!({
                "index": r.index, "c": r.c.to_string(), "d": r.d.to_string(),
            })).collect::<Vec<_>>(),
            "absent": self.absent,
            "checks": {
                "determinant_pairs": self.checks.determinants.len(),
                "bracket_pairs": self.checks.brackets.len(),
                "all_nonzero": self.checks.all_nonzero,
            },
        })
    }
}

/// The substitution branch taken when every proportionality bracket among the
/// condition prefix is non-admissible: u := b₁·y, v := −a₁·y wipes the
/// left-hand side and leaves a pure product identity on the right.
#[derive(Clone, Debug)]
pub struct CaseTwoRoute {
    pub u_coefficient: BigInt,
    pub v_coefficient: BigInt,
    /// Coefficients (b₁cⱼ − a₁dⱼ) of the surviving product Π μ̂ⱼ(·y) = 1.
    pub product_coefficients: Vec<BigInt>,
    /// Coefficients (aⱼb₁ − bⱼa₁) whose vanishing removes each left factor.
    pub lhs_kill_coefficients: Vec<BigInt>,
    /// True when every left factor is removed by the substitution.
    pub fully_collapses: bool,
}

impl fmt::Display for CaseTwoRoute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "substitute u = {}·y, v = {}·y; product identity over coefficients {:?}",
            self.u_coefficient,
            self.v_coefficient,
            self.product_coefficients
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
        )
    }
}

/// Either a full reduction or the collapse branch.
#[derive(Clone, Debug)]
pub enum Reduction {
    CaseOne(ReducedSystem),
    CaseTwo(CaseTwoRoute),
}

/// Runs the reduction. The caller must have renumbered the system so the
/// condition indices are exactly the prefix 0..m; this is verified. The
/// routing between the two cases follows the admissibility of the brackets
/// bᵢaⱼ − bⱼaᵢ within the prefix.
pub fn reduce_coefficients(system: &FormSystem, group: &Group, m: usize) -> Result<Reduction> {
    let n = system.len();
    if m < 1 || m > n {
        return Err(Error::Precondition(format!(
            "condition prefix length must be in 1..={n}, got {m}"
        )));
    }
    let domain = CoefficientDomain::for_group(group);
    let a: Vec<BigInt> = system.a().iter().map(|x| domain.reduce(x)).collect();
    let b: Vec<BigInt> = system.b().iter().map(|x| domain.reduce(x)).collect();
    let c: Vec<BigInt> = system.c().iter().map(|x| domain.reduce(x)).collect();
    let d: Vec<BigInt> = system.d().iter().map(|x| domain.reduce(x)).collect();

    // The prefix must genuinely satisfy the admissibility condition.
    let active: Vec<usize> = (0..n)
        .filter(|&j| {
            !(domain.is_zero(&a[j])
                && domain.is_zero(&b[j])
                && domain.is_zero(&c[j])
                && domain.is_zero(&d[j]))
        })
        .collect();
    for i in 0..m {
        for &j in &active {
            if !admissible(group, &system.determinant(i, j)) {
                return Err(Error::Precondition(format!(
                    "index {i} violates the admissibility condition at column {j}"
                )));
            }
        }
    }

    // Case routing: some bracket within the prefix must be admissible.
    let mut case_one = false;
    'outer: for i in 0..m {
        for j in 0..m {
            if i != j && admissible(group, &system.bracket(i, j)) {
                case_one = true;
                break 'outer;
            }
        }
    }
    if !case_one {
        let a1 = a[0].clone();
        let b1 = b[0].clone();
        let product_coefficients: Vec<BigInt> = (0..n).map(|j| &b1 * &c[j] - &a1 * &d[j]).collect();
        let lhs_kill_coefficients: Vec<BigInt> =
            (0..n).map(|j| &a[j] * &b1 - &b[j] * &a1).collect();
        let fully_collapses = lhs_kill_coefficients.iter().all(|k| !admissible(group, k));
        return Ok(Reduction::CaseTwo(CaseTwoRoute {
            u_coefficient: b1,
            v_coefficient: -a1,
            product_coefficients,
            lhs_kill_coefficients,
            fully_collapses,
        }));
    }

    // Partition the prefix by the zero pattern of (aⱼ, bⱼ).
    let mut both = Vec::new();
    let mut pure_a = Vec::new();
    let mut pure_b = Vec::new();
    for j in 0..m {
        match (domain.is_zero(&a[j]), domain.is_zero(&b[j])) {
            (false, false) => both.push(j),
            (false, true) => pure_a.push(j),
            (true, false) => pure_b.push(j),
            (true, true) => unreachable!("prefix indices satisfy the condition"),
        }
    }

    // Proportionality classes among `both`, ordered by first occurrence.
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for &j in &both {
        let found = classes.iter_mut().find(|class| {
            let rep = class[0];
            domain.is_zero(&(&a[rep] * &b[j] - &a[j] * &b[rep]))
        });
        match found {
            Some(class) => class.push(j),
            None => classes.push(vec![j]),
        }
    }

    // Empty products are 1, which covers a prefix with no two-sided block.
    let scale_u: BigInt = classes.iter().map(|class| &b[class[0]]).product();
    let scale_v: BigInt = classes.iter().map(|class| &a[class[0]]).product();

    let mut rows = Vec::new();
    for (i, class) in classes.iter().enumerate() {
        let rep = class[0];
        let row_a = &scale_u / &b[rep];
        let row_b = &scale_v / &a[rep];
        let members = class
            .iter()
            .map(|&j| ReducedMember {
                index: j,
                multiplier: &a[rep] * &b[j],
            })
            .collect();
        rows.push(ReducedRow {
            kind: RowKind::RatioClass(i),
            a: row_a,
            b: row_b,
            members,
        });
    }
    if !pure_a.is_empty() {
        rows.push(ReducedRow {
            kind: RowKind::PureA,
            a: BigInt::one(),
            b: BigInt::zero(),
            members: pure_a
                .iter()
                .map(|&j| ReducedMember {
                    index: j,
                    multiplier: &a[j] * &scale_u,
                })
                .collect(),
        });
    }
    if !pure_b.is_empty() {
        rows.push(ReducedRow {
            kind: RowKind::PureB,
            a: BigInt::zero(),
            b: BigInt::one(),
            members: pure_b
                .iter()
                .map(|&j| ReducedMember {
                    index: j,
                    multiplier: &b[j] * &scale_v,
                })
                .collect(),
        });
    }

    // Left-hand variables past the prefix either carry through rescaled or,
    // when both coefficients vanish, drop from the left side entirely; their
    // right-hand factor survives unless the whole column is zero.
    let mut carried = Vec::new();
    let mut absent = Vec::new();
    let mut rhs = Vec::new();
    for j in 0..n {
        let lhs_zero = domain.is_zero(&a[j]) && domain.is_zero(&b[j]);
        let rhs_zero = domain.is_zero(&c[j]) && domain.is_zero(&d[j]);
        if j >= m && lhs_zero {
            absent.push(j);
        } else if j >= m {
            carried.push(CarriedRow {
                index: j,
                a: &a[j] * &scale_u,
                b: &b[j] * &scale_v,
            });
        }
        if !rhs_zero {
            rhs.push(RhsRow {
                index: j,
                c: &c[j] * &scale_u,
                d: &d[j] * &scale_v,
            });
        }
    }

    // Verify the nonzero conditions and return them as data.
    let mut checks = ReductionChecks {
        all_nonzero: true,
        ..Default::default()
    };
    for (i, row) in rows.iter().enumerate() {
        for rhs_row in &rhs {
            let value = &row.a * &rhs_row.d - &row.b * &rhs_row.c;
            if domain.is_zero(&value) {
                checks.all_nonzero = false;
            }
            checks.determinants.push(((i, rhs_row.index), value));
        }
    }
    let lhs_pairs_all: Vec<(BigInt, BigInt)> = rows
        .iter()
        .map(|r| (r.a.clone(), r.b.clone()))
        .chain(carried.iter().map(|r| (r.a.clone(), r.b.clone())))
        .collect();
    for i in 0..rows.len() {
        for j in 0..lhs_pairs_all.len() {
            if i == j {
                continue;
            }
            let value = &lhs_pairs_all[i].0 * &lhs_pairs_all[j].1
                - &lhs_pairs_all[i].1 * &lhs_pairs_all[j].0;
            if domain.is_zero(&value) {
                checks.all_nonzero = false;
            }
            checks.brackets.push(((i, j), value));
        }
    }

    Ok(Reduction::CaseOne(ReducedSystem {
        domain,
        scale_u,
        scale_v,
        rows,
        carried,
        rhs,
        absent,
        checks,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Pmf;
    use crate::phase::{rat, RootSum, SplitMix64};
    use crate::spectral::char_fn_exact;

    fn bi(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn two_class_example() {
        // a = (1,2), b = (1,1): two ratio classes, A = 1, B = 2
        let system = FormSystem::from_i64(&[1, 2], &[1, 1], &[1, 1], &[3, 5]).unwrap();
        let group = Group::lattice(1);
        let reduction = reduce_coefficients(&system, &group, 2).unwrap();
        let reduced = match reduction {
            Reduction::CaseOne(r) => r,
            Reduction::CaseTwo(_) => panic!("expected case one"),
        };
        assert_eq!(reduced.scale_u, bi(1));
        assert_eq!(reduced.scale_v, bi(2));
        assert_eq!(reduced.rows.len(), 2);
        assert_eq!(reduced.rows[0].a, bi(1));
        assert_eq!(reduced.rows[0].b, bi(2));
        assert_eq!(reduced.rows[1].a, bi(1));
        assert_eq!(reduced.rows[1].b, bi(1));
        assert!(reduced.checks.all_nonzero);
    }

    #[test]
    fn proportional_pairs_route_to_case_two() {
        // all ratios equal: brackets vanish, the collapse branch applies
        let system = FormSystem::from_i64(&[1, 2], &[1, 2], &[1, 1], &[2, 3]).unwrap();
        let group = Group::lattice(1);
        let reduction = reduce_coefficients(&system, &group, 2).unwrap();
        match reduction {
            Reduction::CaseTwo(route) => {
                assert_eq!(route.u_coefficient, bi(1));
                assert_eq!(route.v_coefficient, bi(-1));
                // b₁cⱼ − a₁dⱼ = (1·1 − 1·2, 1·1 − 1·3) = (−1, −2)
                assert_eq!(route.product_coefficients, vec![bi(-1), bi(-2)]);
                assert!(route.lhs_kill_coefficients.iter().all(|k| k.is_zero()));
                assert!(route.fully_collapses);
            }
            Reduction::CaseOne(_) => panic!("expected case two"),
        }
    }

    #[test]
    fn precondition_rejects_wrong_prefix() {
        // determinant a₁d₁ − b₁c₁ = 0, so index 0 cannot sit in the prefix
        let system = FormSystem::from_i64(&[1, 1], &[1, 2], &[1, 1], &[1, -1]).unwrap();
        let group = Group::lattice(1);
        assert!(reduce_coefficients(&system, &group, 1).is_err());
    }

    #[test]
    fn mod_p_domain_reduces_representatives() {
        let domain = CoefficientDomain::ModPrime(5);
        assert_eq!(domain.reduce(&bi(7)), bi(2));
        assert_eq!(domain.reduce(&bi(-7)), bi(-2));
        assert_eq!(domain.reduce(&bi(3)), bi(-2));
        assert_eq!(domain.reduce(&bi(10)), bi(0));
        assert!(domain.is_zero(&bi(10)));
        let d2 = CoefficientDomain::ModPrime(2);
        assert_eq!(d2.reduce(&bi(3)), bi(1));
        assert_eq!(d2.reduce(&bi(-1)), bi(1));
    }

    /// The reduced rows really do reproduce the substituted product: for each
    /// dual pair, Π over rows and carried variables of the transformed
    /// factors equals Π over original variables evaluated at (Au, Bv).
    #[test]
    fn reduced_rows_reproduce_substituted_products() {
        let group = Group::cyclic(5);
        let mut rng = SplitMix64::new(2024);
        let mut built = 0usize;
        while built < 40 {
            let n = 2 + (rng.below(2) as usize);
            let rand_vec = |rng: &mut SplitMix64| -> Vec<i64> {
                (0..n).map(|_| rng.range_i64(-4, 4)).collect()
            };
            let a = rand_vec(&mut rng);
            let b = rand_vec(&mut rng);
            let c = rand_vec(&mut rng);
            let d = rand_vec(&mut rng);
            let system = match FormSystem::from_i64(&a, &b, &c, &d) {
                Ok(s) => s,
                Err(_) => continue,
            };
            let condition = crate::forms::condition_indices(&system, &group);
            if condition.is_empty() {
                continue;
            }
            let mut order: Vec<usize> = condition.clone();
            order.extend((0..n).filter(|j| !condition.contains(j)));
            let permuted = system.permuted(&order);
            let m = condition.len();
            let reduced = match reduce_coefficients(&permuted, &group, m) {
                Ok(Reduction::CaseOne(r)) => r,
                Ok(Reduction::CaseTwo(_)) => continue,
                Err(_) => continue,
            };
            built += 1;
            // random distributions per variable
            let dists: Vec<Pmf> = (0..n)
                .map(|_| {
                    let x = rng.below(5) as i64;
                    let y = rng.below(5) as i64;
                    if x == y {
                        Pmf::degenerate(group.element(&[], &[x]).unwrap())
                    } else {
                        Pmf::from_weights(
                            &group,
                            vec![
                                (group.element(&[], &[x]).unwrap(), rat(1, 3)),
                                (group.element(&[], &[y]).unwrap(), rat(2, 3)),
                            ],
                        )
                        .unwrap()
                    }
                })
                .collect();
            let dual = group.dual_points().unwrap();
            for u in &dual {
                for v in &dual {
                    let au = u.scalar_mul(&reduced.scale_u);
                    let bv = v.scalar_mul(&reduced.scale_v);
                    // original LHS at (Au, Bv), prefix variables only
                    let mut original = RootSum::one();
                    for (pos, &j) in order.iter().enumerate().take(m) {
                        let y = crate::group::DualPoint::combine(
                            &permuted.a()[pos],
                            &au,
                            &permuted.b()[pos],
                            &bv,
                        )
                        .unwrap();
                        original = original.mul(&char_fn_exact(&dists[j], &y).unwrap());
                    }
                    // reduced rows at (u, v)
                    let mut transformed = RootSum::one();
                    for row in &reduced.rows {
                        let arg = crate::group::DualPoint::combine(&row.a, u, &row.b, v).unwrap();
                        for member in &row.members {
                            let j = order[member.index];
                            let y = arg.scalar_mul(&member.multiplier);
                            transformed = transformed.mul(&char_fn_exact(&dists[j], &y).unwrap());
                        }
                    }
                    assert!(
                        original.sub(&transformed).is_zero(),
                        "row semantics differ at ({u}, {v})"
                    );
                }
            }
        }
    }

    /// On the integer domain the member multipliers satisfy the exact
    /// identities multiplier · (row a, row b) = (aⱼ·A, bⱼ·B): the transformed
    /// factor argument really is the substituted original argument.
    #[test]
    fn member_multipliers_are_exact_over_the_integers() {
        let group = Group::lattice(1);
        let mut rng = SplitMix64::new(515);
        let mut produced = 0usize;
        while produced < 100 {
            let n = 2 + (rng.below(3) as usize);
            let rand_vec = |rng: &mut SplitMix64| -> Vec<i64> {
                (0..n).map(|_| rng.range_i64(-5, 5)).collect()
            };
            let system = match FormSystem::from_i64(
                &rand_vec(&mut rng),
                &rand_vec(&mut rng),
                &rand_vec(&mut rng),
                &rand_vec(&mut rng),
            ) {
                Ok(s) => s,
                Err(_) => continue,
            };
            let condition = crate::forms::condition_indices(&system, &group);
            if condition.is_empty() {
                continue;
            }
            let mut order: Vec<usize> = condition.clone();
            order.extend((0..n).filter(|j| !condition.contains(j)));
            let permuted = system.permuted(&order);
            let reduced = match reduce_coefficients(&permuted, &group, condition.len()) {
                Ok(Reduction::CaseOne(r)) => r,
                _ => continue,
            };
            produced += 1;
            for row in &reduced.rows {
                for member in &row.members {
                    let j = member.index;
                    match row.kind {
                        RowKind::RatioClass(_) => {
                            assert_eq!(
                                &member.multiplier * &row.a,
                                permuted.a()[j].clone() * &reduced.scale_u
                            );
                            assert_eq!(
                                &member.multiplier * &row.b,
                                permuted.b()[j].clone() * &reduced.scale_v
                            );
                        }
                        RowKind::PureA => {
                            assert_eq!(
                                member.multiplier,
                                permuted.a()[j].clone() * &reduced.scale_u
                            );
                            assert!(permuted.b()[j].is_zero());
                        }
                        RowKind::PureB => {
                            assert_eq!(
                                member.multiplier,
                                permuted.b()[j].clone() * &reduced.scale_v
                            );
                            assert!(permuted.a()[j].is_zero());
                        }
                    }
                }
            }
            for carried in &reduced.carried {
                let j = carried.index;
                assert_eq!(carried.a, permuted.a()[j].clone() * &reduced.scale_u);
                assert_eq!(carried.b, permuted.b()[j].clone() * &reduced.scale_v);
            }
        }
    }

    #[test]
    fn random_case_one_systems_satisfy_nonzero_checks() {
        for group in [Group::cyclic(5), Group::lattice(1)] {
            let mut rng = SplitMix64::new(7 + group.lattice_rank() as u64);
            let mut produced = 0usize;
            let mut attempts = 0usize;
            while produced < 200 && attempts < 100_000 {
                attempts += 1;
                let n = 2 + (rng.below(3) as usize);
                let rand_vec = |rng: &mut SplitMix64| -> Vec<i64> {
                    (0..n).map(|_| rng.range_i64(-4, 4)).collect()
                };
                let system = match FormSystem::from_i64(
                    &rand_vec(&mut rng),
                    &rand_vec(&mut rng),
                    &rand_vec(&mut rng),
                    &rand_vec(&mut rng),
                ) {
                    Ok(s) => s,
                    Err(_) => continue,
                };
                let condition = crate::forms::condition_indices(&system, &group);
                if condition.is_empty() {
                    continue;
                }
                let mut order: Vec<usize> = condition.clone();
                order.extend((0..n).filter(|j| !condition.contains(j)));
                let permuted = system.permuted(&order);
                match reduce_coefficients(&permuted, &group, condition.len()) {
                    Ok(Reduction::CaseOne(reduced)) => {
                        produced += 1;
                        assert!(
                            reduced.checks.all_nonzero,
                            "checks failed on {group}: {permuted}"
                        );
                        for (_, value) in &reduced.checks.determinants {
                            assert!(!value.is_zero());
                        }
                        for (_, value) in &reduced.checks.brackets {
                            assert!(!value.is_zero());
                        }
                    }
                    Ok(Reduction::CaseTwo(_)) => continue,
                    Err(e) => panic!("verified prefix rejected: {e}"),
                }
            }
            assert!(
                produced >= 200,
                "only {produced} case-one systems on {group}"
            );
        }
    }
}
