//! The group-side predicate ("`G` nilpotent and `G'` a p-group"), the unitary
//! witnesses `1 + (g − g⁻¹)ĉ`, `1 + gĉ` and the dihedral subgroup
//! `⟨1 + (ab − (ab)⁻¹)ĉ, a⟩`, the commutator expansion for `(w, h, k)`, the
//! centralizer-power property, and the equivalence harness comparing the
//! predicate against brute-force nilpotency of `V` and `V_*`.

use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::algebra::{AlgebraContext, AlgebraElement, AlgebraError};
use crate::group::{
    greedy_generators, is_power_of, nilpotency_class_by_generators, FiniteGroup, GroupError,
    GroupTable, Nilpotency,
};
use crate::units::{
    as_abstract_group, closure_subgroup, engel_test_indexed, enumerate_v, filter_unitary,
    find_non_engel_pair, EngelOutcome, UnitError, UnitGroup, DEFAULT_ABSTRACT_CAP,
    DEFAULT_ENUMERATION_CAP,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WitnessError {
    #[error("element {0} is not central")]
    NotCentral(usize),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("postcondition failed: {0}")]
    PostconditionFailed(String),
    #[error("G is not nilpotent with G' a p-group")]
    PredicateNotSatisfied,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Unit(#[from] UnitError),
}

/// `G` is nilpotent and `G'` is a p-group. For finite groups this is also
/// the "finite p-group" form of the condition.
pub fn condition_iii(g: &FiniteGroup, p: u64) -> Result<bool, GroupError> {
    let derived_ok = g.derived_subgroup().is_p_group(p)?;
    Ok(derived_ok && g.nilpotency_class().is_nilpotent())
}

fn require_central(ctx: &AlgebraContext, c: usize) -> Result<(), WitnessError> {
    let g = ctx.group();
    if c >= g.order() {
        return Err(AlgebraError::InvalidIndex(c).into());
    }
    if !g.elements().all(|x| g.mul(x, c) == g.mul(c, x)) {
        return Err(WitnessError::NotCentral(c));
    }
    Ok(())
}

fn require_index(ctx: &AlgebraContext, x: usize) -> Result<(), WitnessError> {
    if x >= ctx.dim() {
        return Err(AlgebraError::InvalidIndex(x).into());
    }
    Ok(())
}

fn ensure_unitary(w: AlgebraElement, what: &str) -> Result<AlgebraElement, WitnessError> {
    if w.is_unitary() {
        Ok(w)
    } else {
        Err(WitnessError::PostconditionFailed(format!(
            "{what} = {w} is not unitary"
        )))
    }
}

/// `w = 1 + (g − g⁻¹)ĉ` for `c` central of order `p`.
pub fn witness_skew(
    ctx: &AlgebraContext,
    g: usize,
    c: usize,
) -> Result<AlgebraElement, WitnessError> {
    require_index(ctx, g)?;
    require_central(ctx, c)?;
    let hat = ctx.hat(c)?;
    let grp = ctx.group();
    let skew = &ctx.embed_unchecked(g) - &ctx.embed_unchecked(grp.inv(g));
    ensure_unitary(&ctx.one() + &(&skew * &hat), "1 + (g - g^-1)c^")
}

/// `w = 1 + gĉ` in characteristic 2, for `c` central of order 2 and
/// `g² ∈ ⟨c⟩`.
pub fn witness_case2(
    ctx: &AlgebraContext,
    g: usize,
    c: usize,
) -> Result<AlgebraElement, WitnessError> {
    if ctx.p() != 2 {
        return Err(WitnessError::PreconditionViolated(format!(
            "p = 2 required, got {}",
            ctx.p()
        )));
    }
    require_index(ctx, g)?;
    require_central(ctx, c)?;
    let hat = ctx.hat(c)?;
    let grp = ctx.group();
    let g2 = grp.mul(g, g);
    if g2 != grp.identity() && g2 != c {
        return Err(WitnessError::PreconditionViolated(format!(
            "g^2 = {} is not in <{}>",
            grp.label(g2),
            grp.label(c)
        )));
    }
    ensure_unitary(&ctx.one() + &(&ctx.embed_unchecked(g) * &hat), "1 + g c^")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessCase {
    Case1,
    Case2,
    Case3,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessInput {
    pub role: &'static str,
    pub index: usize,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessRecord {
    pub case: WitnessCase,
    pub group: String,
    pub p: u32,
    pub inputs: Vec<WitnessInput>,
    pub unit: String,
    pub unitary: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subgroup_order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub non_abelian: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nilpotent: Option<bool>,
}

impl WitnessRecord {
    /// Unitary, and for the dihedral construction: even order, non-abelian
    /// and not nilpotent.
    pub fn passed(&self) -> bool {
        let structural = match self.case {
            WitnessCase::Case3 => {
                self.subgroup_order.is_some_and(|n| n > 2 && n % 2 == 0)
                    && self.non_abelian == Some(true)
                    && self.nilpotent == Some(false)
            }
            _ => true,
        };
        self.unitary && structural
    }
}

fn input(ctx: &AlgebraContext, role: &'static str, index: usize) -> WitnessInput {
    WitnessInput {
        role,
        index,
        label: ctx.group().label(index).to_string(),
    }
}

fn simple_record(
    case: WitnessCase,
    ctx: &AlgebraContext,
    group: &str,
    inputs: Vec<WitnessInput>,
    w: &AlgebraElement,
) -> WitnessRecord {
    WitnessRecord {
        case,
        group: group.to_string(),
        p: ctx.p(),
        inputs,
        unit: w.to_string(),
        unitary: w.is_unitary(),
        subgroup_order: None,
        non_abelian: None,
        nilpotent: None,
    }
}

pub fn record_case1(
    ctx: &AlgebraContext,
    group: &str,
    g: usize,
    c: usize,
) -> Result<WitnessRecord, WitnessError> {
    let w = witness_skew(ctx, g, c)?;
    Ok(simple_record(
        WitnessCase::Case1,
        ctx,
        group,
        vec![input(ctx, "g", g), input(ctx, "c", c)],
        &w,
    ))
}

pub fn record_case2(
    ctx: &AlgebraContext,
    group: &str,
    g: usize,
    c: usize,
) -> Result<WitnessRecord, WitnessError> {
    let w = witness_case2(ctx, g, c)?;
    Ok(simple_record(
        WitnessCase::Case2,
        ctx,
        group,
        vec![input(ctx, "g", g), input(ctx, "c", c)],
        &w,
    ))
}

/// Builds `w = 1 + (ab − (ab)⁻¹)ĉ` and the unit subgroup `⟨w, a⟩`, recording
/// its order, commutativity and nilpotency. Requires `p > 2`, `|a| = |b| = 2`,
/// `(a, b) ≠ 1`, `|ab| > 2` and `c` central of order `p`.
pub fn witness_case3(
    ctx: &AlgebraContext,
    group: &str,
    a: usize,
    b: usize,
    c: usize,
) -> Result<WitnessRecord, WitnessError> {
    let p = ctx.p();
    if p <= 2 {
        return Err(WitnessError::PreconditionViolated(format!(
            "p > 2 required, got {p}"
        )));
    }
    require_index(ctx, a)?;
    require_index(ctx, b)?;
    require_central(ctx, c)?;
    let grp = ctx.group();
    for (name, x) in [("a", a), ("b", b)] {
        if grp.element_order(x) != 2 {
            return Err(WitnessError::PreconditionViolated(format!(
                "|{name}| = {} != 2",
                grp.element_order(x)
            )));
        }
    }
    if grp.commutator(a, b) == grp.identity() {
        return Err(WitnessError::PreconditionViolated("(a, b) = 1".into()));
    }
    let ab = grp.mul(a, b);
    if grp.element_order(ab) <= 2 {
        return Err(WitnessError::PreconditionViolated(format!(
            "|ab| = {} <= 2",
            grp.element_order(ab)
        )));
    }
    let hat = ctx.hat(c)?;
    let skew = &ctx.embed_unchecked(ab) - &ctx.embed_unchecked(grp.inv(ab));
    let w = ensure_unitary(&ctx.one() + &(&skew * &hat), "1 + (ab - (ab)^-1)c^")?;
    let sub = closure_subgroup(&[w.clone(), ctx.embed_unchecked(a)], DEFAULT_ABSTRACT_CAP)?;
    let table = as_abstract_group(&sub, DEFAULT_ABSTRACT_CAP)?;
    let mut record = simple_record(
        WitnessCase::Case3,
        ctx,
        group,
        vec![input(ctx, "a", a), input(ctx, "b", b), input(ctx, "c", c)],
        &w,
    );
    record.subgroup_order = Some(table.order());
    record.non_abelian = Some(!table.is_abelian());
    record.nilpotent = Some(table.nilpotency_class().is_nilpotent());
    Ok(record)
}

/// `C(k, i) mod p` for `0 ≤ i ≤ k`.
fn binomial_row_mod(k: usize, p: u32) -> Vec<u32> {
    let mut row = vec![1u32];
    for _ in 0..k {
        let mut next = vec![1u32; row.len() + 1];
        for i in 1..row.len() {
            next[i] = (row[i - 1] + row[i]) % p;
        }
        row = next;
    }
    row
}

/// Checks, for every `1 ≤ k ≤ n`, that the left-normed unit commutator
/// `(w, h, k)` with `w = 1 + (g − g⁻¹)ĉ`, computed by multiplying in the
/// algebra, equals
///
/// `1 + ĉ · Σ_{i=0}^{k} (−1)^i C(k,i) (g^{h^{k−i}} − (g⁻¹)^{h^{k−i}})`,
///
/// and that for `k` a power of `p` the sum collapses to
/// `(g^{h^k} − g) − ((g⁻¹)^{h^k} − g⁻¹)`.
pub fn verify_engel_expansion(
    ctx: &AlgebraContext,
    g: usize,
    h: usize,
    c: usize,
    n: usize,
) -> Result<bool, WitnessError> {
    require_index(ctx, h)?;
    let w = witness_skew(ctx, g, c)?;
    let hat = ctx.hat(c)?;
    let grp = ctx.group();
    let p = ctx.p();
    let g_inv = grp.inv(g);
    let conj = |x: usize, j: usize| grp.conjugate(x, grp.pow(h, j as u64));
    let skew_at =
        |j: usize| &ctx.embed_unchecked(conj(g, j)) - &ctx.embed_unchecked(conj(g_inv, j));
    let h_unit = ctx.embed_unchecked(h);
    let mut z = w;
    for k in 1..=n {
        z = z.unit_commutator(&h_unit).expect("commutator of units");
        let binom = binomial_row_mod(k, p);
        let mut sum = ctx.zero();
        for (i, &b) in binom.iter().enumerate() {
            if b == 0 {
                continue;
            }
            let sign = if i % 2 == 0 { 1 } else { -1 };
            sum = &sum + &skew_at(k - i).scale(sign * b as i64);
        }
        let expanded = &ctx.one() + &(&hat * &sum);
        if z != expanded {
            return Ok(false);
        }
        if is_power_of(k as u64, p as u64) {
            let collapsed_sum = &(&ctx.embed_unchecked(conj(g, k)) - &ctx.embed_unchecked(g))
                - &(&ctx.embed_unchecked(conj(g_inv, k)) - &ctx.embed_unchecked(g_inv));
            let collapsed = &ctx.one() + &(&hat * &collapsed_sum);
            if collapsed != expanded {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CentralizerPower {
    /// Every non-commuting pair has some `s ≤ max_exponent` with
    /// `h^(p^s) ∈ C_G(g)`.
    pub holds: bool,
    /// Every commutator `(g, h)` has p-power order.
    pub commutators_are_p_elements: bool,
    /// Largest `s` actually needed.
    pub largest_s: u32,
    /// Bound searched: `max(1, ⌊log_p |G|⌋)`.
    pub max_exponent: u32,
    pub pairs_checked: usize,
}

impl CentralizerPower {
    pub fn passed(&self) -> bool {
        self.holds && self.commutators_are_p_elements
    }
}

/// For all `g, h` with `(g, h) ≠ 1`, look for `s ≥ 1` with `h^(p^s)`
/// commuting with `g`. Only meaningful when [`condition_iii`] holds.
pub fn centralizer_power_property(
    g: &FiniteGroup,
    p: u64,
) -> Result<CentralizerPower, WitnessError> {
    if !condition_iii(g, p)? {
        return Err(WitnessError::PredicateNotSatisfied);
    }
    let n = g.order();
    let mut max_exponent = 0u32;
    while (p as u128).pow(max_exponent + 1) <= n as u128 {
        max_exponent += 1;
    }
    let max_exponent = max_exponent.max(1);
    let id = g.identity();
    let mut result = CentralizerPower {
        holds: true,
        commutators_are_p_elements: true,
        largest_s: 0,
        max_exponent,
        pairs_checked: 0,
    };
    for x in g.elements() {
        for y in g.elements() {
            let comm = g.commutator(x, y);
            if comm == id {
                continue;
            }
            result.pairs_checked += 1;
            if !is_power_of(g.element_order(comm) as u64, p) {
                result.commutators_are_p_elements = false;
            }
            let found = (1..=max_exponent).find(|&s| {
                let hp = g.pow(y, p.pow(s));
                g.mul(hp, x) == g.mul(x, hp)
            });
            match found {
                Some(s) => result.largest_s = result.largest_s.max(s),
                None => result.holds = false,
            }
        }
    }
    Ok(result)
}

/// Resource limits for [`verify_equivalence`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Budgets {
    /// Largest `p^(|G|−1)` we are willing to enumerate.
    pub enumeration_cap: u64,
    /// Largest unit group materialized as a Cayley table.
    pub abstract_cap: usize,
    /// Random Engel-pair attempts for groups above `abstract_cap`.
    pub engel_budget: u64,
    pub seed: u64,
    pub time_budget: Option<Duration>,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            abstract_cap: DEFAULT_ABSTRACT_CAP,
            engel_budget: 20_000,
            seed: 0,
            time_budget: Some(Duration::from_secs(60)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum UnitStatus {
    NilpotentWithClass {
        order: usize,
        class: usize,
        method: &'static str,
    },
    NonNilpotentWitness {
        order: usize,
        x: String,
        y: String,
        steps: usize,
    },
    Skipped {
        reason: String,
    },
}

impl UnitStatus {
    /// `None` when skipped.
    pub fn nilpotent(&self) -> Option<bool> {
        match self {
            UnitStatus::NilpotentWithClass { .. } => Some(true),
            UnitStatus::NonNilpotentWitness { .. } => Some(false),
            UnitStatus::Skipped { .. } => None,
        }
    }

    pub fn order(&self) -> Option<usize> {
        match self {
            UnitStatus::NilpotentWithClass { order, .. }
            | UnitStatus::NonNilpotentWitness { order, .. } => Some(*order),
            UnitStatus::Skipped { .. } => None,
        }
    }

    fn skipped(reason: impl Into<String>) -> Self {
        UnitStatus::Skipped {
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivalenceVerdict {
    pub group: String,
    pub group_order: usize,
    pub p: u32,
    /// `p` divides `|G|`.
    pub modular: bool,
    pub predicate_iii: bool,
    pub v_status: UnitStatus,
    pub vstar_status: UnitStatus,
    /// Every non-skipped status agrees with `predicate_iii`.
    pub consistent: bool,
}

impl EquivalenceVerdict {
    pub fn fully_computed(&self) -> bool {
        self.v_status.nilpotent().is_some() && self.vstar_status.nilpotent().is_some()
    }
}

fn witness_status(u: &UnitGroup, x: usize, y: usize, steps: usize) -> UnitStatus {
    let ctx = u.context();
    UnitStatus::NonNilpotentWitness {
        order: u.order(),
        x: ctx.format_coeffs(u.coeffs_of(x)),
        y: ctx.format_coeffs(u.coeffs_of(y)),
        steps,
    }
}

fn nontrivial_steps<G: GroupTable + ?Sized>(g: &G, x: usize, y: usize) -> Option<usize> {
    match engel_test_indexed(g, x, y, g.order() + 1) {
        Some(EngelOutcome::Nontrivial { steps }) => Some(steps),
        _ => None,
    }
}

/// Decides nilpotency of a unit group.
///
/// 1. Pairs of embedded group elements are tried as Engel witnesses.
/// 2. Up to `abstract_cap` elements: the lower central series of the full
///    Cayley table, plus an exhaustive witness scan when it is not nilpotent.
/// 3. Above that: seeded random witness search, then the lower central series
///    computed from generators.
pub fn classify_unit_group(u: &UnitGroup, budgets: &Budgets, seed: u64) -> UnitStatus {
    let structured = u.group_element_indices();
    for &x in &structured {
        for &y in &structured {
            if let Some(steps) = nontrivial_steps(u, x, y) {
                return witness_status(u, x, y, steps);
            }
        }
    }
    if u.order() <= budgets.abstract_cap {
        let table = match as_abstract_group(u, budgets.abstract_cap) {
            Ok(t) => t,
            Err(e) => return UnitStatus::skipped(e.to_string()),
        };
        return match table.nilpotency_class() {
            Nilpotency::Class(class) => UnitStatus::NilpotentWithClass {
                order: u.order(),
                class,
                method: "lower_central_series",
            },
            Nilpotency::NotNilpotent { .. } => {
                match find_non_engel_pair(&table, &[], u64::MAX, seed) {
                    Some((x, y)) => {
                        witness_status(u, x, y, nontrivial_steps(&table, x, y).unwrap_or(0))
                    }
                    None => UnitStatus::skipped("not nilpotent, but no Engel witness found"),
                }
            }
        };
    }
    if let Some((x, y)) = find_non_engel_pair(u, &[], budgets.engel_budget, seed) {
        return witness_status(u, x, y, nontrivial_steps(u, x, y).unwrap_or(0));
    }
    let gens = greedy_generators(u);
    match nilpotency_class_by_generators(u, &gens) {
        Nilpotency::Class(class) => UnitStatus::NilpotentWithClass {
            order: u.order(),
            class,
            method: "generator_series",
        },
        Nilpotency::NotNilpotent { .. } => UnitStatus::skipped(
            "lower central series stabilizes above 1; no Engel witness within budget",
        ),
    }
}

/// Computes the predicate and, when the enumeration budget allows, the
/// nilpotency of `V(FG)` and `V_*(FG)`. Failures become `Skipped` statuses.
pub fn verify_equivalence(
    group: Arc<FiniteGroup>,
    name: &str,
    p: u64,
    budgets: &Budgets,
) -> EquivalenceVerdict {
    let start = Instant::now();
    let over_time = || budgets.time_budget.is_some_and(|t| start.elapsed() > t);
    let group_order = group.order();
    let predicate = condition_iii(&group, p).unwrap_or(false);
    let mut verdict = EquivalenceVerdict {
        group: name.to_string(),
        group_order,
        p: p as u32,
        modular: p > 0 && (group_order as u64).is_multiple_of(p),
        predicate_iii: predicate,
        v_status: UnitStatus::skipped("not computed"),
        vstar_status: UnitStatus::skipped("not computed"),
        consistent: true,
    };
    let ctx = match AlgebraContext::new(group, p) {
        Ok(c) => c,
        Err(e) => {
            verdict.v_status = UnitStatus::skipped(e.to_string());
            verdict.vstar_status = UnitStatus::skipped(e.to_string());
            return verdict;
        }
    };
    let v = match enumerate_v(&ctx, budgets.enumeration_cap) {
        Ok(v) => v,
        Err(e) => {
            let reason = format!("BudgetExceeded: {e}");
            verdict.v_status = UnitStatus::skipped(reason.clone());
            verdict.vstar_status = UnitStatus::skipped(reason);
            return verdict;
        }
    };
    verdict.v_status = if over_time() {
        UnitStatus::skipped("time budget exceeded")
    } else {
        classify_unit_group(&v, budgets, budgets.seed)
    };
    verdict.vstar_status = if over_time() {
        UnitStatus::skipped("time budget exceeded")
    } else {
        match filter_unitary(&v) {
            Ok(vstar) => classify_unit_group(&vstar, budgets, budgets.seed.wrapping_add(1)),
            Err(e) => UnitStatus::skipped(e.to_string()),
        }
    };
    verdict.consistent = [&verdict.v_status, &verdict.vstar_status]
        .iter()
        .all(|s| s.nilpotent().is_none_or(|n| n == predicate));
    verdict
}
