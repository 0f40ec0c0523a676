//! The four linear forms L₁…L₄ with integer coefficients, exact joint laws of
//! form pairs, the identical-distribution test, and the product-equation
//! residual on the dual.
//!
//! Identity of laws is always decided on exact pmfs; the characteristic
//! function route exists so the equivalence between the two can itself be
//! tested, never as a shortcut.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::Zero;

use crate::dist::Pmf;
use crate::error::{Error, Result};
use crate::group::{admissible, DualPoint, Group};
use crate::phase::RootSum;
use crate::spectral::char_fn_exact;

/// The 4×n integer coefficient matrix of the linear forms
/// L₁ = Σ aⱼξⱼ, L₂ = Σ bⱼξⱼ, L₃ = Σ cⱼξⱼ, L₄ = Σ dⱼξⱼ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormSystem {
    a: Vec<BigInt>,
    b: Vec<BigInt>,
    c: Vec<BigInt>,
    d: Vec<BigInt>,
}

impl FormSystem {
    pub fn new(a: Vec<BigInt>, b: Vec<BigInt>, c: Vec<BigInt>, d: Vec<BigInt>) -> Result<Self> {
        let n = a.len();
        if n == 0 {
            return Err(Error::Precondition("a form system needs n ≥ 1".into()));
        }
        for (name, v) in [("b", &b), ("c", &c), ("d", &d)] {
            if v.len() != n {
                return Err(Error::Schema(format!(
                    "coefficient vector {name} has length {}, expected {n}",
                    v.len()
                )));
            }
        }
        Ok(FormSystem { a, b, c, d })
    }

    pub fn from_i64(a: &[i64], b: &[i64], c: &[i64], d: &[i64]) -> Result<Self> {
        let conv = |v: &[i64]| v.iter().map(|&x| BigInt::from(x)).collect();
        FormSystem::new(conv(a), conv(b), conv(c), conv(d))
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn a(&self) -> &[BigInt] {
        &self.a
    }

    pub fn b(&self) -> &[BigInt] {
        &self.b
    }

    pub fn c(&self) -> &[BigInt] {
        &self.c
    }

    pub fn d(&self) -> &[BigInt] {
        &self.d
    }

    /// The determinant aᵢdⱼ − bᵢcⱼ from the admissibility condition.
    pub fn determinant(&self, i: usize, j: usize) -> BigInt {
        &self.a[i] * &self.d[j] - &self.b[i] * &self.c[j]
    }

    /// The bracket bᵢaⱼ − bⱼaᵢ that separates the two cases of the
    /// coefficient reduction.
    pub fn bracket(&self, i: usize, j: usize) -> BigInt {
        &self.b[i] * &self.a[j] - &self.b[j] * &self.a[i]
    }

    /// Columns where at least one of the four coefficients is nonzero; a
    /// variable multiplied by zero in every form is absent from the equation.
    pub fn active_columns(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&j| {
                !(self.a[j].is_zero()
                    && self.b[j].is_zero()
                    && self.c[j].is_zero()
                    && self.d[j].is_zero())
            })
            .collect()
    }

    /// Removes absent variables, returning the dropped indices.
    pub fn prune_inactive(&self) -> (FormSystem, Vec<usize>) {
        let keep = self.active_columns();
        let dropped = (0..self.len()).filter(|j| !keep.contains(j)).collect();
        let pick = |v: &[BigInt]| keep.iter().map(|&j| v[j].clone()).collect();
        (
            FormSystem {
                a: pick(&self.a),
                b: pick(&self.b),
                c: pick(&self.c),
                d: pick(&self.d),
            },
            dropped,
        )
    }

    /// Reorders the variables by the given permutation of column indices.
    pub fn permuted(&self, order: &[usize]) -> FormSystem {
        let pick = |v: &[BigInt]| order.iter().map(|&j| v[j].clone()).collect();
        FormSystem {
            a: pick(&self.a),
            b: pick(&self.b),
            c: pick(&self.c),
            d: pick(&self.d),
        }
    }
}

impl fmt::Display for FormSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[BigInt]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(
            f,
            "a=[{}] b=[{}] c=[{}] d=[{}]",
            join(&self.a),
            join(&self.b),
            join(&self.c),
            join(&self.d)
        )
    }
}

/// Indices i whose determinants aᵢdⱼ − bᵢcⱼ are admissible for the group for
/// every active j (0-based). A system with no active variable has no
/// condition indices.
pub fn condition_indices(system: &FormSystem, group: &Group) -> Vec<usize> {
    let active = system.active_columns();
    if active.is_empty() {
        return Vec::new();
    }
    (0..system.len())
        .filter(|&i| {
            active
                .iter()
                .all(|&j| admissible(group, &system.determinant(i, j)))
        })
        .collect()
}

/// Independence regime of an instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Independent,
    QIndependent,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Independent => "independent",
            Mode::QIndependent => "q_independent",
        }
    }
}

/// A concrete theorem instance: a group, a coefficient system, and one
/// distribution per variable. Absent variables (all four coefficients zero)
/// are dropped at construction and noted.
#[derive(Clone, Debug)]
pub struct InstanceSpec {
    group: Group,
    system: FormSystem,
    dists: Vec<Pmf>,
    mode: Mode,
    warnings: Vec<String>,
}

impl InstanceSpec {
    pub fn new(group: Group, system: FormSystem, dists: Vec<Pmf>, mode: Mode) -> Result<Self> {
        if dists.len() != system.len() {
            return Err(Error::LengthMismatch {
                expected: system.len(),
                got: dists.len(),
            });
        }
        for mu in &dists {
            group.check_parent(mu.group())?;
        }
        let (system, dropped) = system.prune_inactive();
        let mut warnings = Vec::new();
        if !dropped.is_empty() {
            warnings.push(format!(
                "dropped absent variables (all four coefficients zero) at indices {dropped:?}"
            ));
        }
        let dists = dists
            .into_iter()
            .enumerate()
            .filter(|(j, _)| !dropped.contains(j))
            .map(|(_, mu)| mu)
            .collect::<Vec<_>>();
        if dists.is_empty() {
            return Err(Error::Precondition(
                "every variable of the system is absent".into(),
            ));
        }
        Ok(InstanceSpec {
            group,
            system,
            dists,
            mode,
            warnings,
        })
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn system(&self) -> &FormSystem {
        &self.system
    }

    pub fn dists(&self) -> &[Pmf] {
        &self.dists
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn len(&self) -> usize {
        self.system.len()
    }

    pub fn is_empty(&self) -> bool {
        self.system.is_empty()
    }
}

/// Exact law of the pair (Σ r1ⱼ ξⱼ, Σ r2ⱼ ξⱼ) on the square group X²,
/// built by convolving the images of each μⱼ under x ↦ (r1ⱼ·x, r2ⱼ·x).
pub fn joint_pmf(r1: &[BigInt], r2: &[BigInt], dists: &[Pmf]) -> Result<Pmf> {
    if r1.len() != dists.len() || r2.len() != dists.len() {
        return Err(Error::LengthMismatch {
            expected: dists.len(),
            got: r1.len().max(r2.len()),
        });
    }
    if dists.is_empty() {
        return Err(Error::Precondition(
            "joint law needs at least one variable".into(),
        ));
    }
    let group = dists[0].group().clone();
    let square = group.square();
    let mut acc = Pmf::degenerate(square.zero());
    for ((mu, c1), c2) in dists.iter().zip(r1).zip(r2) {
        group.check_parent(mu.group())?;
        let image_atoms = mu
            .atoms()
            .map(|(x, w)| {
                let pair = group
                    .pair(&x.scalar_mul(c1), &x.scalar_mul(c2))
                    .expect("same parent");
                (pair, w.clone())
            })
            .collect();
        let image = Pmf::from_weights(&square, image_atoms)?;
        acc = acc.convolve(&image)?;
    }
    Ok(acc)
}

pub fn joint_pmf_i64(r1: &[i64], r2: &[i64], dists: &[Pmf]) -> Result<Pmf> {
    let conv = |v: &[i64]| v.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>();
    joint_pmf(&conv(r1), &conv(r2), dists)
}

/// Marginal law of Σ rⱼ ξⱼ on X itself.
pub fn form_law(r: &[BigInt], dists: &[Pmf]) -> Result<Pmf> {
    if r.len() != dists.len() || dists.is_empty() {
        return Err(Error::LengthMismatch {
            expected: dists.len().max(1),
            got: r.len(),
        });
    }
    let group = dists[0].group().clone();
    let mut acc = Pmf::degenerate(group.zero());
    for (mu, coef) in dists.iter().zip(r) {
        acc = acc.convolve(&mu.pushforward(coef))?;
    }
    Ok(acc)
}

/// Exact test: do (L₁,L₂) and (L₃,L₄) have the same joint law?
pub fn identically_distributed(spec: &InstanceSpec) -> Result<bool> {
    let lhs = joint_pmf(spec.system.a(), spec.system.b(), &spec.dists)?;
    let rhs = joint_pmf(spec.system.c(), spec.system.d(), &spec.dists)?;
    Ok(lhs == rhs)
}

/// LHS − RHS of the product equation
/// Π μ̂ⱼ(aⱼu + bⱼv) = Π μ̂ⱼ(cⱼu + dⱼv) at one dual pair, exactly.
pub fn equation_residual_exact(
    spec: &InstanceSpec,
    u: &DualPoint,
    v: &DualPoint,
) -> Result<RootSum> {
    let mut lhs = RootSum::one();
    let mut rhs = RootSum::one();
    for (j, mu) in spec.dists.iter().enumerate() {
        let y_lhs = DualPoint::combine(&spec.system.a()[j], u, &spec.system.b()[j], v)?;
        let y_rhs = DualPoint::combine(&spec.system.c()[j], u, &spec.system.d()[j], v)?;
        lhs = lhs.mul(&char_fn_exact(mu, &y_lhs)?);
        rhs = rhs.mul(&char_fn_exact(mu, &y_rhs)?);
    }
    Ok(lhs.sub(&rhs))
}

pub fn equation_residual(spec: &InstanceSpec, u: &DualPoint, v: &DualPoint) -> Result<Complex64> {
    Ok(equation_residual_exact(spec, u, v)?.to_complex())
}

/// Scans the full dual square of a finite group: the maximum residual modulus
/// in double precision, plus whether every residual is an exact symbolic zero.
pub fn residual_scan(spec: &InstanceSpec) -> Result<ResidualScan> {
    let dual = spec.group.dual_points()?;
    let mut max_modulus = 0.0f64;
    let mut all_zero = true;
    let mut worst = None;
    for u in &dual {
        for v in &dual {
            let exact = equation_residual_exact(spec, u, v)?;
            if !exact.is_zero() {
                all_zero = false;
                let modulus = exact.to_complex().norm();
                if modulus > max_modulus {
                    max_modulus = modulus;
                    worst = Some((u.clone(), v.clone()));
                }
            }
        }
    }
    Ok(ResidualScan {
        max_modulus,
        all_exact_zero: all_zero,
        worst_pair: worst,
    })
}

#[derive(Clone, Debug)]
pub struct ResidualScan {
    pub max_modulus: f64,
    pub all_exact_zero: bool,
    pub worst_pair: Option<(DualPoint, DualPoint)>,
}

/// Residual scan over a declared torus grid for groups with a lattice part;
/// the answer is a sampled bound, not a certificate, which `exhaustive`
/// records. Grid points still get the exact vanishing test.
pub fn residual_scan_with_grid(spec: &InstanceSpec, resolution: u64) -> Result<GridResidualScan> {
    let points = spec.group().dual_grid(resolution);
    let mut max_modulus = 0.0f64;
    let mut all_zero = true;
    let mut worst = None;
    for u in &points {
        for v in &points {
            let exact = equation_residual_exact(spec, u, v)?;
            if !exact.is_zero() {
                all_zero = false;
                let modulus = exact.to_complex().norm();
                if modulus > max_modulus {
                    max_modulus = modulus;
                    worst = Some((u.clone(), v.clone()));
                }
            }
        }
    }
    Ok(GridResidualScan {
        scan: ResidualScan {
            max_modulus,
            all_exact_zero: all_zero,
            worst_pair: worst,
        },
        exhaustive: spec.group().is_finite(),
        resolution,
    })
}

#[derive(Clone, Debug)]
pub struct GridResidualScan {
    pub scan: ResidualScan,
    pub exhaustive: bool,
    pub resolution: u64,
}
