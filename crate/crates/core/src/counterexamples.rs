//! Certified witness constructions: instances whose form pairs are exactly
//! identically distributed while the degeneracy conclusion fails, plus the
//! identity-shaped system showing the admissibility condition is necessary.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::dist::{Classification, Pmf};
use crate::error::{Error, Result};
use crate::forms::{condition_indices, identically_distributed, FormSystem, InstanceSpec, Mode};
use crate::group::{Group, GroupElement, Subgroup};
use crate::phase::Rat;
use crate::spectral::nonvanishing;

/// A constructed instance together with the exact certifications run on it.
#[derive(Clone, Debug)]
pub struct CounterexampleCertificate {
    pub kind: &'static str,
    pub spec: InstanceSpec,
    /// The indices the construction targets: determinants nonzero for all j.
    pub condition_set: Vec<usize>,
    /// Whether the ambient group's admissibility agrees with the target set.
    pub ambient_condition_holds: bool,
    pub identically_distributed: bool,
    pub classifications: Vec<(usize, Classification)>,
    pub nonvanishing: Vec<(usize, bool)>,
    pub notes: Vec<String>,
}

impl CounterexampleCertificate {
    pub fn to_json(&self) -> Value {
        json!({
            "kind": self.kind,
            "instance": crate::json::instance_to_json(&self.spec),
            "condition_set": self.condition_set.iter().map(|i| i + 1).collect::<Vec<_>>(),
            "ambient_condition_holds": self.ambient_condition_holds,
            "identically_distributed": self.identically_distributed,
            "classifications": self.classifications.iter().map(|(i, c)| json!({
                "index": i + 1,
                "classification": c.label(),
            })).collect::<Vec<_>>(),
            "nonvanishing": self.nonvanishing.iter().map(|(i, b)| json!({
                "index": i + 1,
                "nonvanishing": b,
            })).collect::<Vec<_>>(),
            "notes": self.notes,
        })
    }
}

/// Order of a group element; None when a lattice coordinate makes it infinite.
pub fn element_order(x: &GroupElement) -> Option<u64> {
    if x.lattice().iter().any(|v| !v.is_zero()) {
        return None;
    }
    let mut order = 1u64;
    for (&t, &n) in x.torsion().iter().zip(x.group().factors()) {
        let component_order = n / t.gcd(&n).max(1);
        let component_order = if t == 0 { 1 } else { component_order };
        order = order.lcm(&component_order);
    }
    Some(order)
}

fn certify(
    kind: &'static str,
    spec: InstanceSpec,
    condition_set: Vec<usize>,
    mut notes: Vec<String>,
) -> Result<CounterexampleCertificate> {
    let identical = identically_distributed(&spec)?;
    if !identical {
        return Err(Error::Precondition(format!(
            "{kind} construction failed its identical-distribution certificate"
        )));
    }
    let ambient = condition_indices(spec.system(), spec.group());
    let ambient_condition_holds = ambient == condition_set;
    if !ambient_condition_holds {
        notes.push(format!(
            "ambient admissibility on {} yields condition set {:?} instead of the \
             targeted {:?}: the construction's determinants act trivially there",
            spec.group(),
            ambient.iter().map(|i| i + 1).collect::<Vec<_>>(),
            condition_set.iter().map(|i| i + 1).collect::<Vec<_>>(),
        ));
    }
    let classifications = condition_set
        .iter()
        .map(|&i| (i, spec.dists()[i].classify()))
        .collect();
    let nonvanishing = spec
        .dists()
        .iter()
        .enumerate()
        .map(|(i, mu)| (i, nonvanishing(mu).nonvanishing))
        .collect();
    Ok(CounterexampleCertificate {
        kind,
        spec,
        condition_set,
        ambient_condition_holds,
        identically_distributed: identical,
        classifications,
        nonvanishing,
        notes,
    })
}

/// Two identically distributed variables carrying μ = m·E₀ + (1−m)·E_{x₀}
/// on the cyclic subgroup generated by an order-p element, with the system
/// a = b = c = (1,1), d = (1−p, 1−p). The supports lie in p-torsion, so the
/// extra −p·v inside the fourth form acts trivially and the pair laws agree
/// exactly, while μ is neither degenerate nor a Haar shift.
pub fn prop2_construction(
    group: &Group,
    x0: &GroupElement,
    weight: Rat,
    n: usize,
) -> Result<CounterexampleCertificate> {
    group.check_parent(x0.group())?;
    if n != 2 {
        return Err(Error::Precondition(
            "the construction uses exactly two variables".into(),
        ));
    }
    let order =
        element_order(x0).ok_or_else(|| Error::Precondition("x0 must have finite order".into()))?;
    let p = match order {
        o if is_prime(o) => o,
        o => {
            return Err(Error::Precondition(format!(
                "x0 must have prime order, got order {o}"
            )))
        }
    };
    let half = Rat::new(BigInt::one(), BigInt::from(2));
    if weight <= half || weight >= Rat::one() {
        return Err(Error::Precondition(format!(
            "weight must satisfy 1/2 < m < 1, got {weight}"
        )));
    }
    let mu = Pmf::from_weights(
        group,
        vec![
            (group.zero(), weight.clone()),
            (x0.clone(), Rat::one() - &weight),
        ],
    )?;
    let d = 1 - p as i64;
    let system = FormSystem::from_i64(&[1, 1], &[1, 1], &[1, 1], &[d, d])?;
    let spec = InstanceSpec::new(
        group.clone(),
        system,
        vec![mu.clone(), mu],
        Mode::Independent,
    )?;
    let notes = vec![format!(
        "all determinants equal −{p}; admissible exactly when p·X ≠ 0 in the ambient group"
    )];
    let cert = certify("prop2", spec, vec![0, 1], notes)?;
    for (i, classification) in &cert.classifications {
        if classification.is_degenerate() {
            return Err(Error::Precondition(format!(
                "variable {} unexpectedly degenerate",
                i + 1
            )));
        }
    }
    Ok(cert)
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

/// On the full 2- or 3-element group: L₁ = ξ₁+…+ξ_{n−1}, L₂ swaps the last
/// variable, L₃ = L₁, L₄ = ξₙ, and the last two laws are the full Haar law.
/// The vanishing of the Haar characteristic function off zero makes the two
/// products equal at every dual pair, whatever the leading laws are.
pub fn haar_construction(
    group: &Group,
    n: usize,
    leading: Vec<Pmf>,
) -> Result<CounterexampleCertificate> {
    let is_z2_or_z3 = group.is_finite() && (group.factors() == [2] || group.factors() == [3]);
    if !is_z2_or_z3 {
        return Err(Error::Precondition(format!(
            "construction applies on the 2- and 3-element groups, got {group}"
        )));
    }
    if n < 3 {
        return Err(Error::Precondition("need n ≥ 3 variables".into()));
    }
    if leading.len() != n - 2 {
        return Err(Error::LengthMismatch {
            expected: n - 2,
            got: leading.len(),
        });
    }
    let mut a = vec![1i64; n];
    a[n - 1] = 0;
    let mut b = vec![1i64; n];
    b[n - 2] = 0;
    let c = a.clone();
    let mut d = vec![0i64; n];
    d[n - 1] = 1;
    let system = FormSystem::from_i64(&a, &b, &c, &d)?;
    let haar = Pmf::haar(&Subgroup::full_torsion(group));
    let mut dists = leading;
    dists.push(haar.clone());
    dists.push(haar);
    let spec = InstanceSpec::new(group.clone(), system, dists, Mode::Independent)?;
    let notes = vec![
        "the last two variables carry the full Haar law, whose characteristic \
         function vanishes off zero; the non-vanishing hypothesis fails by design"
            .into(),
    ];
    certify("haar", spec, (0..n - 2).collect(), notes)
}

/// L₁ = L₃ = ξ₁+ξ₂ and L₂ = −L₄ = ξ₁−ξ₂ with both variables carrying the
/// same law: the product equation is an identity, and the condition set is
/// empty — the admissibility condition cannot be dropped.
pub fn identity_construction(mu: Pmf) -> Result<CounterexampleCertificate> {
    let group = mu.group().clone();
    let system = FormSystem::from_i64(&[1, 1], &[1, -1], &[1, 1], &[-1, 1])?;
    let spec = InstanceSpec::new(group, system, vec![mu.clone(), mu], Mode::Independent)?;
    let notes = vec![
        "identically distributed for every law: both sides of the product \
         equation coincide factor by factor"
            .into(),
    ];
    certify("identity", spec, Vec::new(), notes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::verify_instance;
    use crate::phase::rat;

    #[test]
    fn prop2_on_z3() {
        let z3 = Group::cyclic(3);
        let x0 = z3.element(&[], &[1]).unwrap();
        let cert = prop2_construction(&z3, &x0, rat(3, 5), 2).unwrap();
        assert!(cert.identically_distributed);
        assert_eq!(cert.condition_set, vec![0, 1]);
        assert!(
            !cert.ambient_condition_holds,
            "−3 is not admissible on the 3-torsion group itself"
        );
        assert!(cert
            .classifications
            .iter()
            .all(|(_, c)| *c == Classification::Other));
        assert!(cert.nonvanishing.iter().all(|(_, b)| *b));
        // the engine never reports an inconsistency here
        let verdict = verify_instance(&cert.spec).unwrap();
        assert!(verdict.consistent);
        assert!(verdict.condition_set.is_empty());
    }

    #[test]
    fn prop2_on_z9_is_the_genuine_regime() {
        let z9 = Group::cyclic(9);
        let x0 = z9.element(&[], &[3]).unwrap();
        assert_eq!(element_order(&x0), Some(3));
        let cert = prop2_construction(&z9, &x0, rat(3, 5), 2).unwrap();
        assert!(cert.identically_distributed);
        assert!(cert.ambient_condition_holds, "3·Z(9) ≠ 0");
        let verdict = verify_instance(&cert.spec).unwrap();
        assert_eq!(verdict.condition_set, vec![0, 1]);
        assert!(verdict.counterexample_regime);
        assert!(verdict.consistent, "the group is uncovered, so no claim");
        assert!(!verdict
            .conclusion_checks
            .iter()
            .any(|c| c.classification.is_degenerate()));
    }

    #[test]
    fn prop2_embeds_into_mixed_groups() {
        // an order-2 element inside Z(2) × Z(6): the ambient group is neither
        // torsion-free nor elementary p-torsion, and 2·X ≠ 0 keeps the
        // determinants admissible
        let g = Group::from_cyclic_orders(0, &[2, 6]).unwrap();
        let x0 = g.element(&[], &[0, 3]).unwrap();
        assert_eq!(element_order(&x0), Some(2));
        let cert = prop2_construction(&g, &x0, rat(2, 3), 2).unwrap();
        assert!(cert.identically_distributed);
        assert!(cert.ambient_condition_holds);
        let verdict = verify_instance(&cert.spec).unwrap();
        assert!(verdict.counterexample_regime);
        assert!(verdict.consistent);
        assert_eq!(verdict.condition_set, vec![0, 1]);

        // a mixed group with a lattice part works the same way
        let g = Group::from_cyclic_orders(1, &[3]).unwrap();
        let x0 = g.element(&[0], &[1]).unwrap();
        let cert = prop2_construction(&g, &x0, rat(3, 5), 2).unwrap();
        assert!(cert.identically_distributed);
        assert!(cert.ambient_condition_holds, "3 acts on the lattice part");
        let verdict = verify_instance(&cert.spec).unwrap();
        assert!(verdict.consistent);
        assert!(verdict.counterexample_regime);
    }

    #[test]
    fn prop2_rejects_bad_inputs() {
        let z3 = Group::cyclic(3);
        let x0 = z3.element(&[], &[1]).unwrap();
        assert!(prop2_construction(&z3, &x0, rat(1, 2), 2).is_err());
        assert!(prop2_construction(&z3, &x0, rat(1, 1), 2).is_err());
        assert!(prop2_construction(&z3, &x0, rat(3, 5), 3).is_err());
        let z4 = Group::cyclic(4);
        let order4 = z4.element(&[], &[1]).unwrap();
        assert!(prop2_construction(&z4, &order4, rat(3, 5), 2).is_err());
    }

    #[test]
    fn haar_on_z2() {
        let z2 = Group::cyclic(2);
        let mu1 = Pmf::from_weights(
            &z2,
            vec![
                (z2.zero(), rat(3, 4)),
                (z2.element(&[], &[1]).unwrap(), rat(1, 4)),
            ],
        )
        .unwrap();
        let cert = haar_construction(&z2, 3, vec![mu1]).unwrap();
        assert!(cert.identically_distributed);
        assert!(cert.ambient_condition_holds);
        assert_eq!(cert.condition_set, vec![0]);
        assert_eq!(cert.classifications[0].1, Classification::Other);
        // the Haar tails vanish somewhere
        assert!(!cert.nonvanishing[1].1);
        assert!(!cert.nonvanishing[2].1);
    }

    #[test]
    fn haar_on_z3_with_degenerate_leading() {
        let z3 = Group::cyclic(3);
        // the construction certifies whatever the leading laws are
        let e0 = Pmf::degenerate(z3.zero());
        let cert = haar_construction(&z3, 4, vec![e0.clone(), e0]).unwrap();
        assert!(cert.identically_distributed);
        assert_eq!(cert.condition_set, vec![0, 1]);
    }

    #[test]
    fn haar_rejects_wrong_group() {
        let z4 = Group::cyclic(4);
        assert!(haar_construction(&z4, 3, vec![Pmf::degenerate(z4.zero())]).is_err());
    }

    #[test]
    fn identity_construction_always_certifies() {
        let z5 = Group::cyclic(5);
        let mu = Pmf::from_weights(
            &z5,
            vec![
                (z5.element(&[], &[2]).unwrap(), rat(1, 7)),
                (z5.element(&[], &[3]).unwrap(), rat(6, 7)),
            ],
        )
        .unwrap();
        let cert = identity_construction(mu).unwrap();
        assert!(cert.identically_distributed);
        assert!(cert.condition_set.is_empty());
        assert!(cert.ambient_condition_holds);

        // with a Haar law the non-vanishing flag trips
        let m = Pmf::haar_full(&z5);
        let cert = identity_construction(m).unwrap();
        assert!(cert.identically_distributed);
        assert!(cert.nonvanishing.iter().all(|(_, b)| !b));
    }

    #[test]
    fn element_orders() {
        let g = Group::from_cyclic_orders(1, &[2, 6]).unwrap();
        let x = g.element(&[0], &[1, 2]).unwrap();
        assert_eq!(element_order(&x), Some(6));
        let y = g.element(&[1], &[0, 0]).unwrap();
        assert_eq!(element_order(&y), None);
        let z = g.element(&[0], &[0, 3]).unwrap();
        assert_eq!(element_order(&z), Some(2));
    }
}
