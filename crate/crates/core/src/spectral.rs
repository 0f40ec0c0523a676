//! Characteristic functions over the dual group: exact evaluation,
//! non-vanishing certification, Fourier inversion as a cross-check, and the
//! parallelogram / finite-difference detectors on duals.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::dist::Pmf;
use crate::error::{Error, Result};
use crate::group::{DualPoint, Group};
use crate::linalg::RowReducer;
use crate::phase::{Rat, RootSum};

/// Default float tolerance for spectral comparisons.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Default number of sample points per torus dimension when a lattice dual
/// can only be scanned heuristically.
pub const DEFAULT_GRID_RESOLUTION: u64 = 64;

/// μ̂(y) = Σ weight(x)·(x,y) as an exact root-of-unity sum.
pub fn char_fn_exact(mu: &Pmf, y: &DualPoint) -> Result<RootSum> {
    mu.group().check_parent(y.group())?;
    let mut acc = RootSum::zero();
    for (x, w) in mu.atoms() {
        let phase = x.pairing_phase(y).expect("same parent");
        acc = acc.add(&RootSum::term(phase, w.clone()));
    }
    Ok(acc)
}

/// μ̂(y) in double precision; the underlying summation is exact.
pub fn char_fn(mu: &Pmf, y: &DualPoint) -> Result<Complex64> {
    Ok(char_fn_exact(mu, y)?.to_complex())
}

/// Tabulated characteristic function over a finite dual, or over a declared
/// rational grid when the group has a lattice part.
#[derive(Clone, Debug)]
pub struct CharFnTable {
    group: Group,
    entries: Vec<CharFnEntry>,
}

#[derive(Clone, Debug)]
pub struct CharFnEntry {
    pub point: DualPoint,
    pub value: Complex64,
    pub exact_zero: bool,
}

impl CharFnTable {
    /// Full-dual table; requires a finite group.
    pub fn tabulate(mu: &Pmf) -> Result<CharFnTable> {
        if !mu.group().is_finite() {
            return Err(Error::RequiresFinite(mu.group().lattice_rank()));
        }
        Self::over_points(mu, mu.group().dual_points()?)
    }

    /// Table over the finite dual crossed with a torus grid of the given
    /// resolution.
    pub fn tabulate_with_grid(mu: &Pmf, resolution: u64) -> Result<CharFnTable> {
        Self::over_points(mu, mu.group().dual_grid(resolution))
    }

    fn over_points(mu: &Pmf, points: Vec<DualPoint>) -> Result<CharFnTable> {
        let mut entries = Vec::with_capacity(points.len());
        for point in points {
            let exact = char_fn_exact(mu, &point)?;
            let value = exact.to_complex();
            let exact_zero = exact.is_zero();
            if point.is_zero() {
                debug_assert!(exact.is_one(), "char fn at 0 must be exactly 1");
            }
            debug_assert!(value.norm() <= 1.0 + DEFAULT_TOLERANCE);
            entries.push(CharFnEntry {
                point,
                value,
                exact_zero,
            });
        }
        Ok(CharFnTable {
            group: mu.group().clone(),
            entries,
        })
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn entries(&self) -> &[CharFnEntry] {
        &self.entries
    }

    pub fn get(&self, point: &DualPoint) -> Option<&CharFnEntry> {
        self.entries.iter().find(|e| &e.point == point)
    }

    /// JSON export: one record per dual point.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.entries
                .iter()
                .map(|e| {
                    serde_json::json!({
                        "dual": crate::json::dual_point_to_json(&e.point),
                        "re": e.value.re,
                        "im": e.value.im,
                        "exact_zero": e.exact_zero,
                    })
                })
                .collect(),
        )
    }
}

/// Outcome of a non-vanishing check. `exhaustive` records whether the answer
/// is a certificate (finite duals, or lattice laws that reduce to one) or a
/// grid heuristic.
#[derive(Clone, Debug, PartialEq)]
pub struct Nonvanishing {
    pub nonvanishing: bool,
    pub exhaustive: bool,
    pub witness: Option<DualPoint>,
}

/// Decides whether μ̂ has a zero on the dual. Finite duals are scanned with
/// the exact root-of-unity zero test. A lattice law whose support sits over a
/// single lattice point factors into a character times a finite-part sum, so
/// it also gets an exact answer; anything else is sampled on a grid and
/// flagged as non-exhaustive.
pub fn nonvanishing(mu: &Pmf) -> Nonvanishing {
    nonvanishing_with_resolution(mu, DEFAULT_GRID_RESOLUTION)
}

pub fn nonvanishing_with_resolution(mu: &Pmf, resolution: u64) -> Nonvanishing {
    let group = mu.group().clone();
    if group.is_finite() {
        match group.dual_points() {
            Ok(dual) => {
                for y in dual {
                    if char_fn_exact(mu, &y).expect("same parent").is_zero() {
                        return Nonvanishing {
                            nonvanishing: false,
                            exhaustive: true,
                            witness: Some(y),
                        };
                    }
                }
                return Nonvanishing {
                    nonvanishing: true,
                    exhaustive: true,
                    witness: None,
                };
            }
            Err(_) => {
                // dual too large to enumerate: deterministic stride sample,
                // honestly flagged, same policy as the torus grid
                let order = group.torsion_order();
                let samples = resolution.saturating_mul(resolution).max(1);
                let stride = (order / samples).max(1);
                let mut index = 0u64;
                while index < order {
                    let y = group.dual_point_at(index);
                    if char_fn_exact(mu, &y).expect("same parent").is_zero() {
                        return Nonvanishing {
                            nonvanishing: false,
                            exhaustive: true,
                            witness: Some(y),
                        };
                    }
                    index = index.saturating_add(stride);
                }
                return Nonvanishing {
                    nonvanishing: true,
                    exhaustive: false,
                    witness: None,
                };
            }
        }
    }
    if let Some(projected) = project_single_lattice_column(mu) {
        let inner = nonvanishing(&projected);
        // |μ̂| is the modulus of the projected finite-part sum, so the inner
        // verdict transfers; only the witness coordinates differ.
        return Nonvanishing {
            nonvanishing: inner.nonvanishing,
            exhaustive: inner.exhaustive,
            witness: None,
        };
    }
    for y in group.dual_grid(resolution) {
        if char_fn_exact(mu, &y).expect("same parent").is_zero() {
            return Nonvanishing {
                nonvanishing: false,
                exhaustive: true,
                witness: Some(y),
            };
        }
    }
    Nonvanishing {
        nonvanishing: true,
        exhaustive: false,
        witness: None,
    }
}

/// When every atom shares one lattice coordinate vector, the lattice part
/// contributes a unimodular character and the law projects to the torsion
/// subgroup without changing |μ̂|.
fn project_single_lattice_column(mu: &Pmf) -> Option<Pmf> {
    let group = mu.group();
    let mut supports = mu.support();
    let first = supports.next()?.lattice().to_vec();
    if !mu.support().all(|x| x.lattice() == first.as_slice()) {
        return None;
    }
    let torsion_group = Group::new(0, group.factors().to_vec()).expect("torsion subgroup");
    let atoms = mu
        .atoms()
        .map(|(x, w)| {
            let element = torsion_group
                .element_big(
                    Vec::new(),
                    x.torsion().iter().map(|&t| BigInt::from(t)).collect(),
                )
                .expect("projection");
            (element, w.clone())
        })
        .collect();
    Some(Pmf::from_weights(&torsion_group, atoms).expect("projected pmf"))
}

/// Recovers the pmf from a complete finite-dual table by Fourier inversion,
/// rounding each weight to the nearest rational below the denominator bound
/// and validating the reconstruction against the table.
pub fn inverse_transform(table: &CharFnTable, max_denominator: u64, tolerance: f64) -> Result<Pmf> {
    let group = table.group.clone();
    let order = group.order()? as f64;
    if table.entries.len() != order as usize {
        return Err(Error::Precondition(format!(
            "table has {} entries, dual has {}",
            table.entries.len(),
            order as usize
        )));
    }
    let mut atoms = Vec::new();
    for x in group.elements()? {
        let mut acc = Complex64::new(0.0, 0.0);
        for entry in &table.entries {
            let pairing = x.pairing(&entry.point).expect("same parent");
            acc += entry.value * pairing.conj();
        }
        acc /= order;
        if acc.im.abs() > tolerance {
            return Err(Error::Reconstruction {
                residual: acc.im.abs(),
                tolerance,
            });
        }
        if acc.re.abs() <= tolerance {
            continue;
        }
        let w = rationalize(acc.re, max_denominator).ok_or(Error::Reconstruction {
            residual: acc.re,
            tolerance,
        })?;
        if !w.is_positive() {
            return Err(Error::Reconstruction {
                residual: acc.re,
                tolerance,
            });
        }
        atoms.push((x, w));
    }
    let mu = Pmf::from_weights(&group, atoms)
        .map_err(|e| Error::InvalidPmf(format!("inverse transform: {e}")))?;
    // Validate the rounded law against the input table.
    let mut residual = 0.0f64;
    for entry in &table.entries {
        let forward = char_fn(&mu, &entry.point)?;
        residual = residual.max((forward - entry.value).norm());
    }
    if residual > tolerance {
        return Err(Error::Reconstruction {
            residual,
            tolerance,
        });
    }
    Ok(mu)
}

/// Nearest rational with denominator at most `max_denominator`, by continued
/// fractions; None if nothing lands within a denominator-scaled window.
fn rationalize(value: f64, max_denominator: u64) -> Option<Rat> {
    let negative = value < 0.0;
    let mut x = value.abs();
    let mut h = (BigInt::one(), BigInt::zero());
    let mut k = (BigInt::zero(), BigInt::one());
    let bound = BigInt::from(max_denominator);
    for _ in 0..64 {
        let a = x.floor();
        let ai = BigInt::from(a as i64);
        let h_next = &ai * &h.0 + &h.1;
        let k_next = &ai * &k.0 + &k.1;
        if k_next > bound {
            break;
        }
        h = (h_next, h.0);
        k = (k_next, k.0);
        let frac = x - a;
        if frac.abs() < 1e-12 {
            break;
        }
        x = 1.0 / frac;
    }
    if k.0.is_zero() {
        return None;
    }
    let candidate = Ratio::new(h.0, k.0);
    let approx = candidate.to_f64()?;
    if (approx - value.abs()).abs() > 1e-6 {
        return None;
    }
    Some(if negative { -candidate } else { candidate })
}

/// Checks φ(u+v) + φ(u−v) = 2[φ(u) + φ(v)] at every pair of the finite dual,
/// exactly, for a rational-valued table.
pub fn parallelogram_check(phi: &BTreeMap<DualPoint, Rat>, group: &Group) -> Result<bool> {
    let dual = group.dual_points()?;
    let lookup = |p: &DualPoint| -> Result<&Rat> {
        phi.get(p)
            .ok_or_else(|| Error::Precondition(format!("φ missing value at {p}")))
    };
    for u in &dual {
        for v in &dual {
            let sum = u.add(v).expect("same parent");
            let diff = u.add(&v.neg()).expect("same parent");
            let lhs = lookup(&sum)?.clone() + lookup(&diff)?;
            let two = Rat::from_integer(BigInt::from(2));
            let rhs = (lookup(u)?.clone() + lookup(v)?) * two;
            if lhs != rhs {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Dimension of the space of rational solutions of the parallelogram
/// identity on a finite dual. Zero means the only solution is φ ≡ 0, which is
/// the exact content of "Gaussian laws degenerate" on these groups.
pub fn parallelogram_solution_dimension(group: &Group) -> Result<usize> {
    let dual = group.dual_points()?;
    let index: BTreeMap<DualPoint, usize> = dual
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, p)| (p, i))
        .collect();
    let cols = dual.len();
    let mut reducer = RowReducer::new(cols);
    for u in &dual {
        for v in &dual {
            let mut row = vec![Rat::zero(); cols];
            let sum = u.add(v).expect("same parent");
            let diff = u.add(&v.neg()).expect("same parent");
            row[index[&sum]] += Rat::one();
            row[index[&diff]] += Rat::one();
            row[index[u]] -= Rat::from_integer(BigInt::from(2));
            row[index[v]] -= Rat::from_integer(BigInt::from(2));
            reducer.insert(row);
            if reducer.is_full_rank() {
                return Ok(0);
            }
        }
    }
    Ok(cols - reducer.rank())
}

fn binomial(n: usize, k: usize) -> BigInt {
    let mut result = BigInt::one();
    for i in 0..k {
        result = result * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    result
}

/// Applies Δ_h^{order} to a tabulated complex function at y:
/// Σ_t (−1)^{order−t} C(order,t) f(y + t·h).
fn iterated_difference_at(
    f: &BTreeMap<DualPoint, Complex64>,
    y: &DualPoint,
    h: &DualPoint,
    order: usize,
) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut point = y.clone();
    for t in 0..=order {
        let coef = binomial(order, t).to_f64().unwrap();
        let sign = if (order - t).is_multiple_of(2) { 1.0 } else { -1.0 };
        let value = f
            .get(&point)
            .ok_or_else(|| Error::Precondition(format!("f missing value at {point}")))?;
        acc += value * coef * sign;
        point = point.add(h).expect("same parent");
    }
    Ok(acc)
}

/// True iff Δ_h^{l+1} f vanishes (within tolerance) for every h in the finite
/// dual, i.e. f is a polynomial of degree at most l.
pub fn is_polynomial(
    f: &BTreeMap<DualPoint, Complex64>,
    degree: usize,
    group: &Group,
    tolerance: f64,
) -> Result<bool> {
    let dual = group.dual_points()?;
    for h in &dual {
        for y in &dual {
            let value = iterated_difference_at(f, y, h, degree + 1)?;
            if value.norm() > tolerance {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Rank oracle: dimension of {f : Δ_h^{l+1} f = 0 for all h} over a finite
/// dual. On these duals the answer is 1 (the constants); `pin_zero` adds the
/// constraint f(0) = 0, which drops it to 0.
pub fn polynomial_space_dimension(group: &Group, degree: usize, pin_zero: bool) -> Result<usize> {
    let dual = group.dual_points()?;
    let index: BTreeMap<DualPoint, usize> = dual
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, p)| (p, i))
        .collect();
    let cols = dual.len();
    let order = degree + 1;
    let mut reducer = RowReducer::new(cols);
    if pin_zero {
        let mut row = vec![Rat::zero(); cols];
        row[index[&group.dual_zero()]] = Rat::one();
        reducer.insert(row);
    }
    for h in &dual {
        for y in &dual {
            let mut row = vec![Rat::zero(); cols];
            let mut point = y.clone();
            for t in 0..=order {
                let sign = if (order - t).is_multiple_of(2) {
                    BigInt::one()
                } else {
                    -BigInt::one()
                };
                row[index[&point]] += Rat::from_integer(sign * binomial(order, t));
                point = point.add(h).expect("same parent");
            }
            reducer.insert(row);
            if reducer.is_full_rank() {
                return Ok(0);
            }
        }
    }
    Ok(cols - reducer.rank())
}
