//! Brute-force unit groups: all normalized units `V(FG)`, the unitary
//! subgroup `V_*(FG)`, subgroups generated by explicit units, and Engel-pair
//! testing.
//!
//! A [`UnitGroup`] keeps its members as one flat, lexicographically sorted
//! coefficient buffer; membership is a binary search, so the same structure
//! serves as an index lookup for products.

use std::collections::{HashMap, HashSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::{AlgebraContext, AlgebraElement};
use crate::group::{FiniteGroup, GroupTable};

pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 20;
pub const DEFAULT_ABSTRACT_CAP: usize = 4096;
/// Closure checks are exhaustive up to `2^12` members, sampled above.
pub const CLOSURE_PAIR_BUDGET: u64 = 1 << 24;
pub const CLOSURE_SAMPLES: usize = 10_000;

/// Candidates handed to one worker during enumeration.
const CHUNK: u64 = 1 << 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UnitError {
    #[error("needs {required} elements but the budget is {cap}")]
    BudgetExceeded { required: u128, cap: u128 },
    #[error("{0} is not a unit")]
    NotAUnit(String),
    #[error("{0} does not have augmentation 1")]
    NotNormalized(String),
    #[error("operands belong to different group algebras")]
    ContextMismatch,
    #[error("no decision after {0} commutator steps")]
    Inconclusive(usize),
    #[error("unit set is not closed: {0}")]
    NotClosed(String),
}

/// A finite group of units of `GF(p)[G]`, elements numbered in lexicographic
/// order of their coefficient vectors.
#[derive(Clone)]
pub struct UnitGroup {
    ctx: AlgebraContext,
    dim: usize,
    coeffs: Vec<u8>,
    inverse: Vec<u32>,
    identity: usize,
}

impl fmt::Debug for UnitGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UnitGroup")
            .field("context", &self.ctx)
            .field("order", &self.order())
            .finish()
    }
}

impl GroupTable for UnitGroup {
    fn order(&self) -> usize {
        self.inverse.len()
    }

    fn identity(&self) -> usize {
        self.identity
    }

    fn mul(&self, a: usize, b: usize) -> usize {
        let mut out = vec![0u8; self.dim];
        self.ctx
            .mul_into(self.coeffs_of(a), self.coeffs_of(b), &mut out);
        self.index_of(&out)
            .expect("unit group is closed under multiplication")
    }

    fn inv(&self, a: usize) -> usize {
        self.inverse[a] as usize
    }
}

impl UnitGroup {
    /// Sorts and deduplicates `members`, then resolves inverses. `inverse`
    /// supplies each member's inverse vector when already known.
    fn from_members(
        ctx: &AlgebraContext,
        mut members: Vec<(Vec<u8>, Option<Vec<u8>>)>,
    ) -> Result<Self, UnitError> {
        let dim = ctx.dim();
        members.par_sort_unstable_by(|a, b| a.0.cmp(&b.0));
        members.dedup_by(|a, b| a.0 == b.0);
        let mut coeffs = Vec::with_capacity(members.len() * dim);
        for (c, _) in &members {
            coeffs.extend_from_slice(c);
        }
        let mut group = Self {
            ctx: ctx.clone(),
            dim,
            coeffs,
            inverse: Vec::new(),
            identity: 0,
        };
        let one = ctx.one();
        group.identity = group
            .index_of(one.coeffs())
            .ok_or_else(|| UnitError::NotClosed("identity missing".into()))?;
        let inverse: Result<Vec<u32>, UnitError> = members
            .par_iter()
            .map(|(c, inv)| {
                let inv = match inv {
                    Some(v) => v.clone(),
                    None => ctx
                        .inverse_vec(c)
                        .ok_or_else(|| UnitError::NotAUnit(ctx.format_coeffs(c)))?,
                };
                group.index_of(&inv).map(|i| i as u32).ok_or_else(|| {
                    UnitError::NotClosed(format!("inverse of {} missing", ctx.format_coeffs(c)))
                })
            })
            .collect();
        group.inverse = inverse?;
        Ok(group)
    }

    pub fn context(&self) -> &AlgebraContext {
        &self.ctx
    }

    pub fn coeffs_of(&self, i: usize) -> &[u8] {
        &self.coeffs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn element(&self, i: usize) -> AlgebraElement {
        AlgebraElement::from_parts(self.ctx.clone(), self.coeffs_of(i).to_vec())
    }

    pub fn elements(&self) -> impl Iterator<Item = AlgebraElement> + '_ {
        (0..self.order()).map(|i| self.element(i))
    }

    pub fn index_of(&self, coeffs: &[u8]) -> Option<usize> {
        let (mut lo, mut hi) = (0, self.coeffs.len() / self.dim.max(1));
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.coeffs_of(mid).cmp(coeffs) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    pub fn contains(&self, a: &AlgebraElement) -> bool {
        a.context() == &self.ctx && self.index_of(a.coeffs()).is_some()
    }

    /// Indices of the embedded group elements `g ∈ G` that are members.
    pub fn group_element_indices(&self) -> Vec<usize> {
        let g = self.ctx.group();
        g.elements()
            .filter_map(|x| self.index_of(self.ctx.embed_unchecked(x).coeffs()))
            .collect()
    }

    /// Checks `u·v ∈ U` and `u·u⁻¹ = 1`: every pair when `order² ≤ pair_budget`,
    /// otherwise `samples` seeded random pairs.
    pub fn verify_closure(&self, pair_budget: u64, samples: usize, seed: u64) -> bool {
        let n = self.order();
        let mut buf = vec![0u8; self.dim];
        let inverses_ok = (0..n).all(|i| {
            self.ctx
                .mul_into(self.coeffs_of(i), self.coeffs_of(self.inv(i)), &mut buf);
            self.ctx.is_one_vec(&buf)
        });
        if !inverses_ok {
            return false;
        }
        let closed = |a: usize, b: usize, buf: &mut Vec<u8>| {
            self.ctx.mul_into(self.coeffs_of(a), self.coeffs_of(b), buf);
            self.index_of(buf).is_some()
        };
        if (n as u64).saturating_mul(n as u64) <= pair_budget {
            (0..n).into_par_iter().all(|a| {
                let mut buf = vec![0u8; self.dim];
                (0..n).all(|b| closed(a, b, &mut buf))
            })
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..samples).all(|_| closed(rng.gen_range(0..n), rng.gen_range(0..n), &mut buf))
        }
    }
}

fn power_u128(base: u32, exp: usize) -> u128 {
    (base as u128).checked_pow(exp as u32).unwrap_or(u128::MAX)
}

/// Number of augmentation-1 vectors in `GF(p)[G]`: `p^(|G|−1)`.
pub fn candidate_count(ctx: &AlgebraContext) -> u128 {
    power_u128(ctx.p(), ctx.dim() - 1)
}

/// All normalized units of `GF(p)[G]`.
///
/// Candidates fix the identity coefficient to `1 − Σ(rest)` and range over
/// every choice of the remaining coefficients; invertibility is decided by
/// Gaussian elimination. Work is split across the rayon pool and merged in
/// canonical order.
pub fn enumerate_v(ctx: &AlgebraContext, cap: u64) -> Result<UnitGroup, UnitError> {
    let required = candidate_count(ctx);
    if required > cap as u128 {
        return Err(UnitError::BudgetExceeded {
            required,
            cap: cap as u128,
        });
    }
    let total = required as u64;
    let p = ctx.p();
    let n = ctx.dim();
    let id = ctx.group().identity();
    let free: Vec<usize> = (0..n).filter(|&i| i != id).collect();
    let chunks = total.div_ceil(CHUNK);
    let members: Vec<(Vec<u8>, Option<Vec<u8>>)> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|chunk| {
            let start = chunk * CHUNK;
            let end = (start + CHUNK).min(total);
            let mut digits = vec![0u8; free.len()];
            let mut t = start;
            for d in digits.iter_mut() {
                *d = (t % p as u64) as u8;
                t /= p as u64;
            }
            let mut found = Vec::new();
            let mut v = vec![0u8; n];
            for _ in start..end {
                let mut rest = 0u32;
                for (&pos, &d) in free.iter().zip(&digits) {
                    v[pos] = d;
                    rest += d as u32;
                }
                v[id] = ((1 + p * (rest / p + 1) - rest) % p) as u8;
                if let Some(inv) = ctx.inverse_vec(&v) {
                    found.push((v.clone(), Some(inv)));
                }
                for d in digits.iter_mut() {
                    *d += 1;
                    if (*d as u32) < p {
                        break;
                    }
                    *d = 0;
                }
            }
            found
        })
        .collect();
    UnitGroup::from_members(ctx, members)
}

/// `V_*`: members `u` with `u*·u = 1`. Inverses are `u*`; closure under
/// products is re-verified.
pub fn filter_unitary(v: &UnitGroup) -> Result<UnitGroup, UnitError> {
    let ctx = v.context();
    let members: Vec<(Vec<u8>, Option<Vec<u8>>)> = (0..v.order())
        .into_par_iter()
        .filter_map(|i| {
            let u = v.coeffs_of(i);
            let star = ctx.star_vec(u);
            let unitary = ctx.augmentation_of(u) == 1 && ctx.is_one_vec(&ctx.mul_vec(&star, u));
            unitary.then(|| (u.to_vec(), Some(star)))
        })
        .collect();
    let unitary = UnitGroup::from_members(ctx, members)?;
    if !unitary.verify_closure(CLOSURE_PAIR_BUDGET, CLOSURE_SAMPLES, 0) {
        return Err(UnitError::NotClosed(
            "unitary units are not closed under products".into(),
        ));
    }
    Ok(unitary)
}

/// Cayley table of `U` over its own element numbering. Building it checks
/// closure of every product.
pub fn as_abstract_group(u: &UnitGroup, cap: usize) -> Result<FiniteGroup, UnitError> {
    let n = u.order();
    if n > cap {
        return Err(UnitError::BudgetExceeded {
            required: n as u128,
            cap: cap as u128,
        });
    }
    let ctx = u.context();
    let rows: Result<Vec<Vec<u32>>, UnitError> = (0..n)
        .into_par_iter()
        .map(|a| {
            let mut buf = vec![0u8; u.dim];
            (0..n)
                .map(|b| {
                    ctx.mul_into(u.coeffs_of(a), u.coeffs_of(b), &mut buf);
                    u.index_of(&buf).map(|i| i as u32).ok_or_else(|| {
                        UnitError::NotClosed(format!("product {} missing", ctx.format_coeffs(&buf)))
                    })
                })
                .collect()
        })
        .collect();
    let table = rows?.concat();
    let labels = (0..n).map(|i| ctx.format_coeffs(u.coeffs_of(i))).collect();
    FiniteGroup::from_table_unchecked(labels, table)
        .map_err(|e| UnitError::NotClosed(e.to_string()))
}

/// Subgroup of units generated by `units`.
pub fn closure_subgroup(units: &[AlgebraElement], cap: usize) -> Result<UnitGroup, UnitError> {
    let Some(first) = units.first() else {
        return Err(UnitError::NotClosed("no generators".into()));
    };
    let ctx = first.context().clone();
    for u in units {
        if u.context() != &ctx {
            return Err(UnitError::ContextMismatch);
        }
        if u.augmentation() != 1 {
            return Err(UnitError::NotNormalized(u.to_string()));
        }
        if !u.is_unit() {
            return Err(UnitError::NotAUnit(u.to_string()));
        }
    }
    let one = ctx.one().into_coeffs();
    let mut seen: HashMap<Vec<u8>, ()> = HashMap::from([(one.clone(), ())]);
    let mut elements = vec![one];
    let mut head = 0;
    while head < elements.len() {
        for s in units {
            let y = ctx.mul_vec(&elements[head], s.coeffs());
            if !seen.contains_key(&y) {
                if elements.len() == cap {
                    return Err(UnitError::BudgetExceeded {
                        required: cap as u128 + 1,
                        cap: cap as u128,
                    });
                }
                seen.insert(y.clone(), ());
                elements.push(y);
            }
        }
        head += 1;
    }
    UnitGroup::from_members(&ctx, elements.into_iter().map(|e| (e, None)).collect())
}

/// Result of iterating `z ← (z, y)` from `z = x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EngelOutcome {
    /// `(x, y, steps) = 1`.
    StabilizesAtOne { steps: usize },
    /// A non-identity state repeated at step `steps`, so the sequence never
    /// reaches 1.
    Nontrivial { steps: usize },
}

impl EngelOutcome {
    pub fn is_engel(&self) -> bool {
        matches!(self, EngelOutcome::StabilizesAtOne { .. })
    }
}

/// Engel test on algebra elements, commutators by direct multiplication.
pub fn engel_test(
    x: &AlgebraElement,
    y: &AlgebraElement,
    n_max: usize,
) -> Result<EngelOutcome, UnitError> {
    if x.context() != y.context() {
        return Err(UnitError::ContextMismatch);
    }
    for u in [x, y] {
        if !u.is_unit() {
            return Err(UnitError::NotAUnit(u.to_string()));
        }
    }
    let y_inv = y.try_inverse().expect("checked above");
    let mut visited: HashSet<Vec<u8>> = HashSet::new();
    let mut z = x.clone();
    for n in 0..=n_max {
        if z.is_one() {
            return Ok(EngelOutcome::StabilizesAtOne { steps: n });
        }
        if !visited.insert(z.coeffs().to_vec()) {
            return Ok(EngelOutcome::Nontrivial { steps: n });
        }
        if n == n_max {
            break;
        }
        let z_inv = z.try_inverse().expect("commutators of units are units");
        z = &(&(&z_inv * &y_inv) * &z) * y;
    }
    Err(UnitError::Inconclusive(n_max))
}

/// Engel test inside any [`GroupTable`]; `None` when undecided after `n_max`
/// steps.
pub fn engel_test_indexed<G: GroupTable + ?Sized>(
    g: &G,
    x: usize,
    y: usize,
    n_max: usize,
) -> Option<EngelOutcome> {
    let id = g.identity();
    let mut visited = HashSet::new();
    let mut z = x;
    for n in 0..=n_max {
        if z == id {
            return Some(EngelOutcome::StabilizesAtOne { steps: n });
        }
        if !visited.insert(z) {
            return Some(EngelOutcome::Nontrivial { steps: n });
        }
        if n < n_max {
            z = g.commutator(z, y);
        }
    }
    None
}

/// Searches for `(x, y)` with a [`EngelOutcome::Nontrivial`] Engel sequence.
///
/// With `|U|² ≤ budget` every ordered pair is tried. Otherwise pairs of
/// embedded group elements go first, then seeded random pairs, until
/// `budget` attempts. `None` is not a proof of nilpotency.
pub fn find_non_engel_pair<G: GroupTable + ?Sized>(
    u: &G,
    structured: &[usize],
    budget: u64,
    seed: u64,
) -> Option<(usize, usize)> {
    let n = u.order();
    let n_max = n + 1;
    let non_engel = |x: usize, y: usize| {
        matches!(
            engel_test_indexed(u, x, y, n_max),
            Some(EngelOutcome::Nontrivial { .. })
        )
    };
    if (n as u64).saturating_mul(n as u64) <= budget {
        return (0..n)
            .flat_map(|x| (0..n).map(move |y| (x, y)))
            .find(|&(x, y)| non_engel(x, y));
    }
    let mut attempts = 0u64;
    for &x in structured {
        for &y in structured {
            if attempts == budget {
                return None;
            }
            attempts += 1;
            if non_engel(x, y) {
                return Some((x, y));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while attempts < budget {
        attempts += 1;
        let (x, y) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if non_engel(x, y) {
            return Some((x, y));
        }
    }
    None
}
