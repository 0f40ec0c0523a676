//! Symbolic finite-difference elimination.
//!
//! Starting from an additive equation
//! Σⱼ φⱼ(aⱼu + bⱼv) = Σⱼ ψⱼ(cⱼu + dⱼv) + q(u,v)
//! each step substitutes a shifted pair for (u,v) and subtracts, which
//! removes one function from the equation and stamps one finite-difference
//! factor onto every surviving term. After all ψ's and all φ's but one are
//! gone, an iterated difference kills the polynomial summand, leaving a
//! derived operator identity for the surviving function. The cascade is kept
//! fully symbolic; a numeric evaluator replays it on tabulated functions over
//! a finite dual for cross-checking.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::forms::FormSystem;
use crate::group::{DualPoint, Group};
use crate::phase::Rat;

/// Formal shift symbol: one fresh dual element per elimination step, plus the
/// pair (h, h′) used by the final polynomial-killing stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Sym {
    /// kₜ, introduced when removing the t-th right-hand function.
    K(usize),
    /// lᵢ, introduced when removing the i-th left-hand function.
    L(usize),
    /// h, first component of the final stage.
    H,
    /// h′, second component of the final stage.
    HPrime,
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sym::K(t) => write!(f, "k{}", t + 1),
            Sym::L(i) => write!(f, "l{}", i + 1),
            Sym::H => write!(f, "h"),
            Sym::HPrime => write!(f, "h'"),
        }
    }
}

/// Integer linear combination of shift symbols: a symbolic element of the
/// dual group.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ShiftExpr {
    terms: BTreeMap<Sym, BigInt>,
}

impl ShiftExpr {
    pub fn zero() -> Self {
        ShiftExpr::default()
    }

    pub fn single(sym: Sym, coefficient: BigInt) -> Self {
        let mut terms = BTreeMap::new();
        if !coefficient.is_zero() {
            terms.insert(sym, coefficient);
        }
        ShiftExpr { terms }
    }

    pub fn add(&self, other: &ShiftExpr) -> ShiftExpr {
        let mut out = self.clone();
        for (sym, coef) in &other.terms {
            let entry = out.terms.entry(*sym).or_insert_with(BigInt::zero);
            *entry += coef;
            if entry.is_zero() {
                out.terms.remove(sym);
            }
        }
        out
    }

    pub fn scale(&self, k: &BigInt) -> ShiftExpr {
        if k.is_zero() {
            return ShiftExpr::zero();
        }
        ShiftExpr {
            terms: self.terms.iter().map(|(s, c)| (*s, c * k)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Sym, &BigInt)> {
        self.terms.iter()
    }

    /// For single-symbol expressions, the (symbol, coefficient) pair.
    pub fn as_single(&self) -> Option<(Sym, &BigInt)> {
        if self.terms.len() == 1 {
            self.terms.iter().next().map(|(s, c)| (*s, c))
        } else {
            None
        }
    }

    /// Concrete dual value under an assignment of the symbols.
    pub fn eval(&self, group: &Group, assignment: &SymbolAssignment) -> Result<DualPoint> {
        let mut acc = group.dual_zero();
        for (sym, coef) in &self.terms {
            let point = assignment
                .get(*sym)
                .ok_or_else(|| Error::Precondition(format!("assignment missing symbol {sym}")))?;
            acc = acc.add(&point.scalar_mul(coef))?;
        }
        Ok(acc)
    }
}

impl fmt::Display for ShiftExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (sym, coef) in &self.terms {
            if first {
                if coef == &BigInt::one() {
                    write!(f, "{sym}")?;
                } else if coef == &BigInt::from(-1) {
                    write!(f, "-{sym}")?;
                } else {
                    write!(f, "{coef}·{sym}")?;
                }
                first = false;
            } else if coef == &BigInt::one() {
                write!(f, " + {sym}")?;
            } else if coef == &BigInt::from(-1) {
                write!(f, " - {sym}")?;
            } else if coef.sign() == num_bigint::Sign::Minus {
                write!(f, " - {}·{sym}", -coef)?;
            } else {
                write!(f, " + {coef}·{sym}")?;
            }
        }
        Ok(())
    }
}

/// The shift of one difference factor: a dual shift on a one-variable
/// function's argument, or a plane shift on the polynomial summand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FactorShift {
    Point(ShiftExpr),
    Plane(ShiftExpr, ShiftExpr),
}

impl fmt::Display for FactorShift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactorShift::Point(s) => write!(f, "{s}"),
            FactorShift::Plane(u, v) => write!(f, "({u}, {v})"),
        }
    }
}

/// One Δ factor with its multiplicity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpFactor {
    pub shift: FactorShift,
    pub power: usize,
}

impl fmt::Display for OpFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.power == 1 {
            write!(f, "Δ_{{{}}}", self.shift)
        } else {
            write!(f, "Δ_{{{}}}^{}", self.shift, self.power)
        }
    }
}

/// Function slot in the equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum FuncId {
    Phi(usize),
    Psi(usize),
    Poly,
}

impl fmt::Display for FuncId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FuncId::Phi(j) => write!(f, "φ{}", j + 1),
            FuncId::Psi(j) => write!(f, "ψ{}", j + 1),
            FuncId::Poly => write!(f, "q"),
        }
    }
}

/// One signed term: sign · (Π factors) func(coef_u·u + coef_v·v), with the
/// polynomial summand using the plane variables directly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub func: FuncId,
    pub coef_u: BigInt,
    pub coef_v: BigInt,
    pub factors: Vec<OpFactor>,
    pub sign: i8,
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.sign >= 0 { "+" } else { "-" };
        write!(f, "{sign} ")?;
        for factor in &self.factors {
            write!(f, "{factor} ")?;
        }
        match self.func {
            FuncId::Poly => write!(f, "q(u, v)"),
            _ => write!(f, "{}({}u + {}v)", self.func, self.coef_u, self.coef_v),
        }
    }
}

/// A signed sum of terms equated to zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolicEquation {
    pub terms: Vec<Term>,
    /// Degree bound of the polynomial summand, if one is present.
    pub q_degree: Option<usize>,
}

impl SymbolicEquation {
    /// The starting equation: Σ φⱼ(aⱼu+bⱼv) − Σ ψⱼ(cⱼu+dⱼv) − q = 0.
    pub fn initial(
        lhs: &[(BigInt, BigInt)],
        rhs: &[(BigInt, BigInt)],
        q_degree: Option<usize>,
    ) -> SymbolicEquation {
        let mut terms = Vec::new();
        for (j, (a, b)) in lhs.iter().enumerate() {
            terms.push(Term {
                func: FuncId::Phi(j),
                coef_u: a.clone(),
                coef_v: b.clone(),
                factors: Vec::new(),
                sign: 1,
            });
        }
        for (j, (c, d)) in rhs.iter().enumerate() {
            terms.push(Term {
                func: FuncId::Psi(j),
                coef_u: c.clone(),
                coef_v: d.clone(),
                factors: Vec::new(),
                sign: -1,
            });
        }
        if q_degree.is_some() {
            terms.push(Term {
                func: FuncId::Poly,
                coef_u: BigInt::one(),
                coef_v: BigInt::one(),
                factors: Vec::new(),
                sign: -1,
            });
        }
        SymbolicEquation { terms, q_degree }
    }

    pub fn contains(&self, func: FuncId) -> bool {
        self.terms.iter().any(|t| t.func == func)
    }

    pub fn distinct_functions(&self) -> usize {
        let set: std::collections::BTreeSet<FuncId> = self.terms.iter().map(|t| t.func).collect();
        set.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.terms.is_empty()
    }
}

impl fmt::Display for SymbolicEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0 = 0");
        }
        for (i, term) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{term}")?;
        }
        write!(f, " = 0")
    }
}

/// One elimination move.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    /// Remove ψₜ by substituting (u + dₜkₜ, v − cₜkₜ).
    RemovePsi(usize),
    /// Remove φₜ by substituting (u + bₜlₜ, v − aₜlₜ).
    RemovePhi(usize),
    /// Apply Δ^{l+1} with the plane shift (h, h′), erasing the polynomial.
    KillPoly,
}

/// Transcript entry for one step.
#[derive(Clone, Debug)]
pub struct StepRecord {
    pub step: Step,
    pub removed: FuncId,
    pub shift_u: ShiftExpr,
    pub shift_v: ShiftExpr,
    pub power: usize,
    /// Factor gained by each surviving term.
    pub new_factors: Vec<(FuncId, OpFactor)>,
    /// Terms whose new factor had a zero shift and were therefore dropped.
    pub dropped: Vec<FuncId>,
}

/// Applies one substitute-and-subtract step, reading the target's
/// coefficients off the live equation; the target must still be present.
/// (Its own new factor is the zero shift, which is what removes it.)
pub fn cascade_step(eq: &SymbolicEquation, step: Step) -> Result<(SymbolicEquation, StepRecord)> {
    let (removed, shift_u, shift_v, power) = match step {
        Step::RemovePsi(t) => {
            let term = eq
                .terms
                .iter()
                .find(|term| term.func == FuncId::Psi(t))
                .ok_or_else(|| {
                    Error::Precondition(format!("ψ{} is not present in the equation", t + 1))
                })?;
            let sym = Sym::K(t);
            (
                FuncId::Psi(t),
                ShiftExpr::single(sym, term.coef_v.clone()),
                ShiftExpr::single(sym, -term.coef_u.clone()),
                1usize,
            )
        }
        Step::RemovePhi(t) => {
            let term = eq
                .terms
                .iter()
                .find(|term| term.func == FuncId::Phi(t))
                .ok_or_else(|| {
                    Error::Precondition(format!("φ{} is not present in the equation", t + 1))
                })?;
            let sym = Sym::L(t);
            (
                FuncId::Phi(t),
                ShiftExpr::single(sym, term.coef_v.clone()),
                ShiftExpr::single(sym, -term.coef_u.clone()),
                1usize,
            )
        }
        Step::KillPoly => {
            let degree = eq.q_degree.ok_or_else(|| {
                Error::Precondition("the equation has no polynomial summand".into())
            })?;
            (
                FuncId::Poly,
                ShiftExpr::single(Sym::H, BigInt::one()),
                ShiftExpr::single(Sym::HPrime, BigInt::one()),
                degree + 1,
            )
        }
    };
    Ok(apply_substitution(
        eq, step, removed, shift_u, shift_v, power,
    ))
}

/// Substitutes (u + Δu, v + Δv) and subtracts. Every term gains one Δ factor
/// with the shift induced on its argument; terms whose induced shift is zero
/// are the zero function and drop out. The tagged function need not be
/// present — an absent target makes the step a pure stamping move, exactly as
/// in the derived per-function identities.
fn apply_substitution(
    eq: &SymbolicEquation,
    step: Step,
    removed: FuncId,
    shift_u: ShiftExpr,
    shift_v: ShiftExpr,
    power: usize,
) -> (SymbolicEquation, StepRecord) {
    let mut terms = Vec::new();
    let mut new_factors = Vec::new();
    let mut dropped = Vec::new();
    for term in &eq.terms {
        let factor = match term.func {
            FuncId::Poly => {
                if matches!(step, Step::KillPoly) {
                    // Δ^{l+1} of a degree-l polynomial vanishes identically.
                    dropped.push(term.func);
                    continue;
                }
                OpFactor {
                    shift: FactorShift::Plane(shift_u.clone(), shift_v.clone()),
                    power,
                }
            }
            _ => {
                let arg_shift = shift_u
                    .scale(&term.coef_u)
                    .add(&shift_v.scale(&term.coef_v));
                OpFactor {
                    shift: FactorShift::Point(arg_shift),
                    power,
                }
            }
        };
        let vanishes = match &factor.shift {
            FactorShift::Point(s) => s.is_zero(),
            FactorShift::Plane(u, v) => u.is_zero() && v.is_zero(),
        };
        if vanishes {
            dropped.push(term.func);
            continue;
        }
        new_factors.push((term.func, factor.clone()));
        let mut next = term.clone();
        next.factors.push(factor);
        terms.push(next);
    }
    let q_degree = if matches!(step, Step::KillPoly) {
        None
    } else {
        eq.q_degree
    };
    (
        SymbolicEquation { terms, q_degree },
        StepRecord {
            step,
            removed,
            shift_u,
            shift_v,
            power,
            new_factors,
            dropped,
        },
    )
}

/// One factor of a derived operator identity, kept even when its shift
/// coefficient vanished (the numeric evaluator treats Δ₀ as the zero
/// operator, and the flag makes the degeneracy visible).
#[derive(Clone, Debug)]
pub struct DerivedFactor {
    pub shift: FactorShift,
    pub power: usize,
    pub vanishing: bool,
}

impl fmt::Display for DerivedFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let factor = OpFactor {
            shift: self.shift.clone(),
            power: self.power,
        };
        if self.vanishing {
            write!(f, "{factor}[=0]")
        } else {
            write!(f, "{factor}")
        }
    }
}

/// The derived operator identity for one left-hand function.
#[derive(Clone, Debug)]
pub struct FunctionDerivation {
    pub target: usize,
    pub arg_u: BigInt,
    pub arg_v: BigInt,
    /// Factors in application order (first applied first).
    pub factors: Vec<DerivedFactor>,
    pub steps: Vec<StepRecord>,
    pub final_equation: SymbolicEquation,
}

impl FunctionDerivation {
    /// Human-readable operator identity, outermost factor first.
    pub fn identity_string(&self) -> String {
        let mut parts: Vec<String> = self.factors.iter().rev().map(|f| f.to_string()).collect();
        parts.push(format!(
            "φ{}({}u + {}v) = 0",
            self.target + 1,
            self.arg_u,
            self.arg_v
        ));
        parts.join(" ")
    }
}

/// Full elimination output: the canonical cascade transcript plus one derived
/// operator identity per left-hand function.
#[derive(Clone, Debug)]
pub struct DiffDerivation {
    pub lhs: Vec<(BigInt, BigInt)>,
    pub rhs: Vec<(BigInt, BigInt)>,
    pub q_degree: Option<usize>,
    pub per_function: Vec<FunctionDerivation>,
    /// Number of function-removal steps in each cascade.
    pub removal_steps: usize,
    /// Upper bound on the polynomial degree of a surviving function once the
    /// shifts are specialized along a single direction.
    pub degree_bound: usize,
}

impl DiffDerivation {
    pub fn to_json(&self) -> serde_json::Value {
        let per_function = self
            .per_function
            .iter()
            .map(|fd| {
                serde_json::json!({
                    "target": fd.target + 1,
                    "argument": format!("{}u + {}v", fd.arg_u, fd.arg_v),
                    "identity": fd.identity_string(),
                    "factors": fd
                        .factors
                        .iter()
                        .map(|f| serde_json::json!({
                            "shift": f.shift.to_string(),
                            "power": f.power,
                            "vanishing": f.vanishing,
                        }))
                        .collect::<Vec<_>>(),
                    "steps": fd
                        .steps
                        .iter()
                        .map(|s| serde_json::json!({
                            "removed_function": s.removed.to_string(),
                            "substitution": {
                                "u": format!("u + {}", s.shift_u),
                                "v": format!("v + {}", s.shift_v),
                            },
                            "new_factors": s
                                .new_factors
                                .iter()
                                .map(|(func, factor)| serde_json::json!({
                                    "term": func.to_string(),
                                    "factor": factor.to_string(),
                                }))
                                .collect::<Vec<_>>(),
                            "dropped": s.dropped.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
                        }))
                        .collect::<Vec<_>>(),
                })
            })
            .collect::<Vec<_>>();
        serde_json::json!({
            "lhs_functions": self.lhs.len(),
            "rhs_functions": self.rhs.len(),
            "q_degree": self.q_degree,
            "removal_steps": self.removal_steps,
            "degree_bound": self.degree_bound,
            "derivations": per_function,
        })
    }

    pub fn trace(&self) -> String {
        let mut out = String::new();
        for fd in &self.per_function {
            out.push_str(&format!("derivation for φ{}:\n", fd.target + 1));
            let initial = SymbolicEquation::initial(&self.lhs, &self.rhs, self.q_degree);
            out.push_str(&format!("  start: {initial}\n"));
            for (i, step) in fd.steps.iter().enumerate() {
                out.push_str(&format!(
                    "  step {}: remove {} via (u + {}, v + {})\n",
                    i + 1,
                    step.removed,
                    step.shift_u,
                    step.shift_v
                ));
            }
            out.push_str(&format!("  result: {}\n", fd.identity_string()));
        }
        out
    }
}

/// Runs the full cascade. The first `lhs_count` columns of the system supply
/// the left-hand coefficient pairs (aⱼ, bⱼ); all n columns supply the
/// right-hand pairs (cⱼ, dⱼ). Order is fixed: ψₙ down to ψ₁, then the other
/// φ's from the highest index down, ending with the polynomial stage when a
/// summand is declared.
pub fn eliminate(
    system: &FormSystem,
    lhs_count: usize,
    q_degree: Option<usize>,
) -> Result<DiffDerivation> {
    let n = system.len();
    if lhs_count < 1 || lhs_count > n {
        return Err(Error::Precondition(format!(
            "lhs function count must be in 1..={n}, got {lhs_count}"
        )));
    }
    let lhs: Vec<(BigInt, BigInt)> = (0..lhs_count)
        .map(|j| (system.a()[j].clone(), system.b()[j].clone()))
        .collect();
    let rhs: Vec<(BigInt, BigInt)> = (0..n)
        .map(|j| (system.c()[j].clone(), system.d()[j].clone()))
        .collect();
    let removal_steps = n + lhs_count - 1;
    let mut per_function = Vec::with_capacity(lhs_count);
    for target in 0..lhs_count {
        let mut eq = SymbolicEquation::initial(&lhs, &rhs, q_degree);
        let mut steps = Vec::new();
        let mut factors = Vec::new();
        let mut plan: Vec<Step> = (0..n).rev().map(Step::RemovePsi).collect();
        plan.extend(
            (0..lhs_count)
                .rev()
                .filter(|&i| i != target)
                .map(Step::RemovePhi),
        );
        if q_degree.is_some() {
            plan.push(Step::KillPoly);
        }
        for step in plan {
            // Track the factor the target term gains from the substitution
            // algebra, whether or not the term itself is still alive.
            let (removed, du, dv, power) = substitution_of(&lhs, &rhs, q_degree, step);
            let arg_shift = du.scale(&lhs[target].0).add(&dv.scale(&lhs[target].1));
            factors.push(DerivedFactor {
                vanishing: arg_shift.is_zero(),
                shift: FactorShift::Point(arg_shift),
                power,
            });
            let (next, record) = apply_substitution(&eq, step, removed, du, dv, power);
            steps.push(record);
            eq = next;
        }
        per_function.push(FunctionDerivation {
            target,
            arg_u: lhs[target].0.clone(),
            arg_v: lhs[target].1.clone(),
            factors,
            steps,
            final_equation: eq,
        });
    }
    let degree_bound = removal_steps + q_degree.map_or(0, |l| l + 1);
    Ok(DiffDerivation {
        lhs,
        rhs,
        q_degree,
        per_function,
        removal_steps,
        degree_bound,
    })
}

/// The substitution a step uses, read off the original coefficient tables so
/// that functions dropped early by a vanishing factor still get their moves.
fn substitution_of(
    lhs: &[(BigInt, BigInt)],
    rhs: &[(BigInt, BigInt)],
    q_degree: Option<usize>,
    step: Step,
) -> (FuncId, ShiftExpr, ShiftExpr, usize) {
    match step {
        Step::RemovePsi(t) => {
            let sym = Sym::K(t);
            (
                FuncId::Psi(t),
                ShiftExpr::single(sym, rhs[t].1.clone()),
                ShiftExpr::single(sym, -rhs[t].0.clone()),
                1,
            )
        }
        Step::RemovePhi(t) => {
            let sym = Sym::L(t);
            (
                FuncId::Phi(t),
                ShiftExpr::single(sym, lhs[t].1.clone()),
                ShiftExpr::single(sym, -lhs[t].0.clone()),
                1,
            )
        }
        Step::KillPoly => {
            let degree = q_degree.expect("poly stage only planned when q is declared");
            (
                FuncId::Poly,
                ShiftExpr::single(Sym::H, BigInt::one()),
                ShiftExpr::single(Sym::HPrime, BigInt::one()),
                degree + 1,
            )
        }
    }
}

/// Concrete dual values for the shift symbols.
#[derive(Clone, Debug, Default)]
pub struct SymbolAssignment {
    map: BTreeMap<Sym, DualPoint>,
}

impl SymbolAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, sym: Sym, value: DualPoint) {
        self.map.insert(sym, value);
    }

    pub fn get(&self, sym: Sym) -> Option<&DualPoint> {
        self.map.get(&sym)
    }
}

/// Total rational-valued function on a finite dual.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualTable {
    group: Group,
    values: BTreeMap<DualPoint, Rat>,
}

impl DualTable {
    pub fn new(group: &Group, values: BTreeMap<DualPoint, Rat>) -> Result<DualTable> {
        let dual = group.dual_points()?;
        for p in &dual {
            if !values.contains_key(p) {
                return Err(Error::Precondition(format!("table missing value at {p}")));
            }
        }
        Ok(DualTable {
            group: group.clone(),
            values,
        })
    }

    pub fn zero(group: &Group) -> Result<DualTable> {
        let values = group
            .dual_points()?
            .into_iter()
            .map(|p| (p, Rat::zero()))
            .collect();
        Ok(DualTable {
            group: group.clone(),
            values,
        })
    }

    pub fn get(&self, p: &DualPoint) -> &Rat {
        &self.values[p]
    }

    /// Δ_s applied to the table.
    pub fn difference(&self, s: &DualPoint) -> DualTable {
        let values = self
            .values
            .keys()
            .map(|p| {
                let shifted = p.add(s).expect("same parent");
                (p.clone(), self.values[&shifted].clone() - &self.values[p])
            })
            .collect();
        DualTable {
            group: self.group.clone(),
            values,
        }
    }
}

/// Total rational-valued function on the square of a finite dual.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlaneTable {
    group: Group,
    values: BTreeMap<(DualPoint, DualPoint), Rat>,
}

impl PlaneTable {
    pub fn constant(group: &Group, value: Rat) -> Result<PlaneTable> {
        let dual = group.dual_points()?;
        let mut values = BTreeMap::new();
        for u in &dual {
            for v in &dual {
                values.insert((u.clone(), v.clone()), value.clone());
            }
        }
        Ok(PlaneTable {
            group: group.clone(),
            values,
        })
    }

    pub fn from_fn(
        group: &Group,
        mut f: impl FnMut(&DualPoint, &DualPoint) -> Rat,
    ) -> Result<PlaneTable> {
        let dual = group.dual_points()?;
        let mut values = BTreeMap::new();
        for u in &dual {
            for v in &dual {
                values.insert((u.clone(), v.clone()), f(u, v));
            }
        }
        Ok(PlaneTable {
            group: group.clone(),
            values,
        })
    }

    pub fn get(&self, u: &DualPoint, v: &DualPoint) -> &Rat {
        &self.values[&(u.clone(), v.clone())]
    }

    pub fn is_zero(&self) -> bool {
        self.values.values().all(Rat::is_zero)
    }

    pub fn add(&self, other: &PlaneTable) -> PlaneTable {
        let values = self
            .values
            .iter()
            .map(|(k, v)| (k.clone(), v + &other.values[k]))
            .collect();
        PlaneTable {
            group: self.group.clone(),
            values,
        }
    }

    pub fn scale(&self, k: &Rat) -> PlaneTable {
        let values = self
            .values
            .iter()
            .map(|(key, v)| (key.clone(), v * k))
            .collect();
        PlaneTable {
            group: self.group.clone(),
            values,
        }
    }

    /// Δ_{(du, dv)} applied to the table.
    pub fn difference(&self, du: &DualPoint, dv: &DualPoint) -> PlaneTable {
        let values = self
            .values
            .keys()
            .map(|(u, v)| {
                let su = u.add(du).expect("same parent");
                let sv = v.add(dv).expect("same parent");
                let delta = self.values[&(su, sv)].clone() - &self.values[&(u.clone(), v.clone())];
                ((u.clone(), v.clone()), delta)
            })
            .collect();
        PlaneTable {
            group: self.group.clone(),
            values,
        }
    }
}

/// Tabulated data for every function in the equation.
#[derive(Clone, Debug)]
pub struct FunctionTuple {
    pub phi: Vec<DualTable>,
    pub psi: Vec<DualTable>,
    pub q: Option<PlaneTable>,
}

/// The residual F(u,v) = Σ φⱼ(aⱼu+bⱼv) − Σ ψⱼ(cⱼu+dⱼv) − q(u,v) tabulated on
/// the dual square.
pub fn residual_table(
    group: &Group,
    lhs: &[(BigInt, BigInt)],
    rhs: &[(BigInt, BigInt)],
    tuple: &FunctionTuple,
) -> Result<PlaneTable> {
    if tuple.phi.len() != lhs.len() || tuple.psi.len() != rhs.len() {
        return Err(Error::Precondition(
            "function tuple does not match the coefficient counts".into(),
        ));
    }
    PlaneTable::from_fn(group, |u, v| {
        let mut acc = Rat::zero();
        for ((a, b), table) in lhs.iter().zip(&tuple.phi) {
            let y = DualPoint::combine(a, u, b, v).expect("same parent");
            acc += table.get(&y);
        }
        for ((c, d), table) in rhs.iter().zip(&tuple.psi) {
            let y = DualPoint::combine(c, u, d, v).expect("same parent");
            acc -= table.get(&y);
        }
        if let Some(q) = &tuple.q {
            acc -= q.get(u, v);
        }
        acc
    })
}

/// Route one: replay the cascade's substitutions numerically on the residual.
pub fn apply_cascade(
    group: &Group,
    lhs: &[(BigInt, BigInt)],
    rhs: &[(BigInt, BigInt)],
    steps: &[StepRecord],
    tuple: &FunctionTuple,
    assignment: &SymbolAssignment,
) -> Result<PlaneTable> {
    let mut table = residual_table(group, lhs, rhs, tuple)?;
    for record in steps {
        let du = record.shift_u.eval(group, assignment)?;
        let dv = record.shift_v.eval(group, assignment)?;
        for _ in 0..record.power {
            table = table.difference(&du, &dv);
        }
    }
    Ok(table)
}

/// Route two: evaluate a symbolic equation term by term, applying each
/// operator product directly to the tabulated functions.
pub fn apply_equation(
    group: &Group,
    eq: &SymbolicEquation,
    tuple: &FunctionTuple,
    assignment: &SymbolAssignment,
) -> Result<PlaneTable> {
    let mut acc = PlaneTable::constant(group, Rat::zero())?;
    for term in &eq.terms {
        let table = apply_term(group, term, tuple, assignment)?;
        let signed = if term.sign >= 0 {
            table
        } else {
            table.scale(&-Rat::one())
        };
        acc = acc.add(&signed);
    }
    Ok(acc)
}

fn apply_term(
    group: &Group,
    term: &Term,
    tuple: &FunctionTuple,
    assignment: &SymbolAssignment,
) -> Result<PlaneTable> {
    match term.func {
        FuncId::Poly => {
            let mut table = tuple
                .q
                .clone()
                .ok_or_else(|| Error::Precondition("equation references a missing q".into()))?;
            for factor in &term.factors {
                let (du, dv) = match &factor.shift {
                    FactorShift::Plane(u, v) => {
                        (u.eval(group, assignment)?, v.eval(group, assignment)?)
                    }
                    FactorShift::Point(_) => {
                        return Err(Error::Precondition(
                            "polynomial term with a point factor".into(),
                        ))
                    }
                };
                for _ in 0..factor.power {
                    table = table.difference(&du, &dv);
                }
            }
            Ok(table)
        }
        FuncId::Phi(j) => apply_point_term(group, term, &tuple.phi[j], assignment),
        FuncId::Psi(j) => apply_point_term(group, term, &tuple.psi[j], assignment),
    }
}

fn apply_point_term(
    group: &Group,
    term: &Term,
    table: &DualTable,
    assignment: &SymbolAssignment,
) -> Result<PlaneTable> {
    let mut g = table.clone();
    for factor in &term.factors {
        let shift = match &factor.shift {
            FactorShift::Point(s) => s.eval(group, assignment)?,
            FactorShift::Plane(_, _) => {
                return Err(Error::Precondition(
                    "one-variable term with a plane factor".into(),
                ))
            }
        };
        for _ in 0..factor.power {
            g = g.difference(&shift);
        }
    }
    PlaneTable::from_fn(group, |u, v| {
        let y = DualPoint::combine(&term.coef_u, u, &term.coef_v, v).expect("same parent");
        g.get(&y).clone()
    })
}

/// Applies a single derived operator identity to its target function and
/// returns the resulting table on the dual square.
pub fn apply_derivation(
    group: &Group,
    derivation: &FunctionDerivation,
    phi: &DualTable,
    assignment: &SymbolAssignment,
) -> Result<PlaneTable> {
    let mut g = phi.clone();
    for factor in &derivation.factors {
        let shift = match &factor.shift {
            FactorShift::Point(s) => s.eval(group, assignment)?,
            FactorShift::Plane(_, _) => unreachable!("derived factors act on one variable"),
        };
        for _ in 0..factor.power {
            g = g.difference(&shift);
        }
    }
    PlaneTable::from_fn(group, |u, v| {
        let y =
            DualPoint::combine(&derivation.arg_u, u, &derivation.arg_v, v).expect("same parent");
        g.get(&y).clone()
    })
}
