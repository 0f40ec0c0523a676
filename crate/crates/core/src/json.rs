//! JSON encodings of the public object kinds: groups, elements, dual points,
//! pmfs, form systems, and instances. Integers that fit in i64 serialize as
//! JSON numbers, anything larger as decimal strings; loaders accept both.

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::dist::Pmf;
use crate::error::{Error, Result};
use crate::forms::{FormSystem, InstanceSpec, Mode};
use crate::group::{DualPoint, Group, GroupElement};
use crate::phase::Rat;

fn bigint_to_value(x: &BigInt) -> Value {
    match x.to_i64() {
        Some(v) => json!(v),
        None => json!(x.to_string()),
    }
}

fn bigint_from_value(v: &Value) -> Result<BigInt> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .ok_or_else(|| Error::Schema(format!("not an integer: {n}"))),
        Value::String(s) => s
            .parse::<BigInt>()
            .map_err(|_| Error::Schema(format!("not an integer: {s:?}"))),
        other => Err(Error::Schema(format!("expected integer, got {other}"))),
    }
}

fn bigint_vec_from(v: &Value, field: &str) -> Result<Vec<BigInt>> {
    match v {
        Value::Null => Ok(Vec::new()),
        Value::Array(items) => items.iter().map(bigint_from_value).collect(),
        other => Err(Error::Schema(format!(
            "{field} must be an array, got {other}"
        ))),
    }
}

pub fn group_to_json(group: &Group) -> Value {
    json!({
        "lattice_rank": group.lattice_rank(),
        "factors": group.factors(),
    })
}

pub fn group_from_json(v: &Value) -> Result<Group> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Schema("group must be an object".into()))?;
    let rank = match obj.get("lattice_rank") {
        None | Some(Value::Null) => 0,
        Some(Value::Number(n)) => n
            .as_u64()
            .ok_or_else(|| Error::Schema("lattice_rank must be a nonnegative integer".into()))?
            as usize,
        Some(other) => {
            return Err(Error::Schema(format!(
                "lattice_rank must be a number, got {other}"
            )))
        }
    };
    let factors = match obj.get("factors") {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(items)) => items
            .iter()
            .map(|item| {
                item.as_u64()
                    .ok_or_else(|| Error::Schema(format!("bad factor {item}")))
            })
            .collect::<Result<Vec<u64>>>()?,
        Some(other) => {
            return Err(Error::Schema(format!(
                "factors must be an array, got {other}"
            )))
        }
    };
    Group::from_cyclic_orders(rank, &factors)
}

pub fn element_to_json(e: &GroupElement) -> Value {
    json!({
        "lattice": e.lattice().iter().map(bigint_to_value).collect::<Vec<_>>(),
        "torsion": e.torsion(),
    })
}

pub fn element_from_json(group: &Group, v: &Value) -> Result<GroupElement> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Schema("element must be an object".into()))?;
    let lattice = bigint_vec_from(obj.get("lattice").unwrap_or(&Value::Null), "lattice")?;
    let torsion = bigint_vec_from(obj.get("torsion").unwrap_or(&Value::Null), "torsion")?;
    group.element_big(lattice, torsion)
}

fn rat_to_string(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn rat_from_value(v: &Value) -> Result<Rat> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(|x| Rat::from_integer(BigInt::from(x)))
            .ok_or_else(|| Error::Schema(format!("bad rational {n}"))),
        Value::String(s) => {
            let mut parts = s.splitn(2, '/');
            let num = parts
                .next()
                .unwrap()
                .trim()
                .parse::<BigInt>()
                .map_err(|_| Error::Schema(format!("bad rational {s:?}")))?;
            let den = match parts.next() {
                Some(d) => d
                    .trim()
                    .parse::<BigInt>()
                    .map_err(|_| Error::Schema(format!("bad rational {s:?}")))?,
                None => BigInt::from(1),
            };
            if den.is_zero() {
                return Err(Error::Schema("rational with zero denominator".into()));
            }
            Ok(Ratio::new(num, den))
        }
        other => Err(Error::Schema(format!("expected rational, got {other}"))),
    }
}

pub fn dual_point_to_json(p: &DualPoint) -> Value {
    json!({
        "torsion": p.torsion(),
        "lattice": p.lattice().iter().map(|r| json!(rat_to_string(r))).collect::<Vec<_>>(),
    })
}

pub fn dual_point_from_json(group: &Group, v: &Value) -> Result<DualPoint> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Schema("dual point must be an object".into()))?;
    let torsion: Vec<i64> = match obj.get("torsion") {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(items)) => items
            .iter()
            .map(|item| {
                item.as_i64()
                    .ok_or_else(|| Error::Schema(format!("bad residue {item}")))
            })
            .collect::<Result<Vec<i64>>>()?,
        Some(other) => {
            return Err(Error::Schema(format!(
                "torsion must be an array, got {other}"
            )))
        }
    };
    let lattice: Vec<Rat> = match obj.get("lattice") {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(items)) => items.iter().map(rat_from_value).collect::<Result<_>>()?,
        Some(other) => {
            return Err(Error::Schema(format!(
                "lattice must be an array, got {other}"
            )))
        }
    };
    group.dual_point(&torsion, &lattice)
}

pub fn pmf_to_json(pmf: &Pmf) -> Value {
    json!({
        "group": group_to_json(pmf.group()),
        "atoms": atoms_to_json(pmf),
    })
}

pub fn atoms_to_json(pmf: &Pmf) -> Value {
    Value::Array(
        pmf.atoms()
            .map(|(element, weight)| {
                json!({
                    "element": element_to_json(element),
                    "num": bigint_to_value(weight.numer()),
                    "den": bigint_to_value(weight.denom()),
                })
            })
            .collect(),
    )
}

/// Strict pmf loader: rejects duplicate atoms, nonpositive weights, and
/// weights that do not sum to exactly 1.
pub fn pmf_from_atoms_json(group: &Group, v: &Value) -> Result<Pmf> {
    let items = v
        .as_array()
        .ok_or_else(|| Error::Schema("atoms must be an array".into()))?;
    let mut atoms = Vec::with_capacity(items.len());
    let mut seen = std::collections::BTreeSet::new();
    for item in items {
        let obj = item
            .as_object()
            .ok_or_else(|| Error::Schema("atom must be an object".into()))?;
        let element = element_from_json(
            group,
            obj.get("element")
                .ok_or_else(|| Error::Schema("atom missing element".into()))?,
        )?;
        if !seen.insert(element.clone()) {
            return Err(Error::Schema(format!("duplicate atom at {element}")));
        }
        let num = bigint_from_value(
            obj.get("num")
                .ok_or_else(|| Error::Schema("atom missing num".into()))?,
        )?;
        let den = bigint_from_value(
            obj.get("den")
                .ok_or_else(|| Error::Schema("atom missing den".into()))?,
        )?;
        if den.is_zero() {
            return Err(Error::Schema("atom with zero denominator".into()));
        }
        let weight = Ratio::new(num, den);
        if !weight.is_positive() {
            return Err(Error::InvalidPmf(format!(
                "atom at {element} has nonpositive weight {weight}"
            )));
        }
        atoms.push((element, weight));
    }
    Pmf::from_weights(group, atoms)
}

pub fn pmf_from_json(v: &Value) -> Result<Pmf> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Schema("pmf must be an object".into()))?;
    let group = group_from_json(
        obj.get("group")
            .ok_or_else(|| Error::Schema("pmf missing group".into()))?,
    )?;
    pmf_from_atoms_json(
        &group,
        obj.get("atoms")
            .ok_or_else(|| Error::Schema("pmf missing atoms".into()))?,
    )
}

pub fn system_to_json(system: &FormSystem) -> Value {
    let dump = |v: &[BigInt]| v.iter().map(bigint_to_value).collect::<Vec<_>>();
    json!({
        "a": dump(system.a()),
        "b": dump(system.b()),
        "c": dump(system.c()),
        "d": dump(system.d()),
    })
}

pub fn system_from_json(v: &Value) -> Result<FormSystem> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Schema("system must be an object".into()))?;
    let get = |name: &str| -> Result<Vec<BigInt>> {
        bigint_vec_from(
            obj.get(name)
                .ok_or_else(|| Error::Schema(format!("system missing vector {name}")))?,
            name,
        )
    };
    FormSystem::new(get("a")?, get("b")?, get("c")?, get("d")?)
}

pub fn instance_to_json(spec: &InstanceSpec) -> Value {
    json!({
        "group": group_to_json(spec.group()),
        "system": system_to_json(spec.system()),
        "dists": spec.dists().iter().map(atoms_to_json).collect::<Vec<_>>(),
        "mode": spec.mode().as_str(),
    })
}

pub fn instance_from_json(v: &Value) -> Result<InstanceSpec> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Schema("instance must be an object".into()))?;
    let group = group_from_json(
        obj.get("group")
            .ok_or_else(|| Error::Schema("instance missing group".into()))?,
    )?;
    let system = system_from_json(
        obj.get("system")
            .ok_or_else(|| Error::Schema("instance missing system".into()))?,
    )?;
    let dists_value = obj
        .get("dists")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Schema("instance missing dists array".into()))?;
    let dists = dists_value
        .iter()
        .map(|entry| match entry {
            Value::Array(_) => pmf_from_atoms_json(&group, entry),
            Value::Object(map) if map.contains_key("atoms") => {
                let pmf = pmf_from_json(entry)?;
                group.check_parent(pmf.group())?;
                Ok(pmf)
            }
            other => Err(Error::Schema(format!("bad distribution entry {other}"))),
        })
        .collect::<Result<Vec<Pmf>>>()?;
    let mode = match obj.get("mode").and_then(Value::as_str) {
        None | Some("independent") => Mode::Independent,
        Some("q_independent") => Mode::QIndependent,
        Some(other) => return Err(Error::Schema(format!("unknown mode {other:?}"))),
    };
    InstanceSpec::new(group, system, dists, mode)
}

/// FNV-1a 64-bit digest, used to stamp reports with input hashes.
pub fn fnv64_hex(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &byte in bytes {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}
