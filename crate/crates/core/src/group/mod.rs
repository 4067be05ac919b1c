//! Finite groups as explicit multiplication tables, plus the commutator,
//! centralizer and lower-central-series machinery built on top of them.
//!
//! Everything here is written against the [`GroupTable`] trait so the same
//! closure and nilpotency code runs on catalog groups (stored as Cayley tables)
//! and on unit groups of group algebras (multiplied on demand).

pub mod spec;

use std::fmt;

use thiserror::Error;

pub use spec::{build_group, parse_group_spec, CatalogGroup, GroupSpec, Permutation};

/// Default cap on the order of groups materialized from a [`GroupSpec`].
pub const DEFAULT_GROUP_CAP: usize = 64;

/// Orders up to this bound get an exhaustive associativity check in
/// [`FiniteGroup::from_table`].
pub const ASSOCIATIVITY_CHECK_LIMIT: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("generated group has more than {cap} elements")]
    ClosureExceedsCap { cap: usize },
    #[error("invalid group spec at byte {position}: {reason}")]
    InvalidSpec { position: usize, reason: String },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("malformed multiplication table: {0}")]
    InvalidTable(String),
}

/// Minimal interface of a finite group whose elements are the indices
/// `0..order()`.
pub trait GroupTable {
    fn order(&self) -> usize;
    fn identity(&self) -> usize;
    fn mul(&self, a: usize, b: usize) -> usize;
    fn inv(&self, a: usize) -> usize;

    /// `(x, y) = x⁻¹ y⁻¹ x y`.
    fn commutator(&self, x: usize, y: usize) -> usize {
        let xy = self.mul(x, y);
        let yx_inv = self.inv(self.mul(y, x));
        self.mul(yx_inv, xy)
    }

    /// `x^y = y⁻¹ x y`.
    fn conjugate(&self, x: usize, y: usize) -> usize {
        self.mul(self.inv(y), self.mul(x, y))
    }

    fn pow(&self, x: usize, mut e: u64) -> usize {
        let mut acc = self.identity();
        let mut base = x;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Least `k ≥ 1` with `x^k = 1`.
    fn element_order(&self, x: usize) -> usize {
        let id = self.identity();
        let mut y = x;
        let mut k = 1;
        while y != id {
            y = self.mul(y, x);
            k += 1;
        }
        k
    }

    /// Left-normed commutator `((…(x, y), y), …, y)` with `n` copies of `y`.
    fn left_normed_commutator(&self, x: usize, y: usize, n: usize) -> usize {
        (0..n).fold(x, |z, _| self.commutator(z, y))
    }
}

/// A finite group stored as a full Cayley table.
#[derive(Clone)]
pub struct FiniteGroup {
    order: usize,
    mul: Vec<u32>,
    inv: Vec<u32>,
    identity: usize,
    labels: Vec<String>,
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteGroup")
            .field("order", &self.order)
            .field("identity", &self.identity)
            .finish_non_exhaustive()
    }
}

impl GroupTable for FiniteGroup {
    fn order(&self) -> usize {
        self.order
    }

    fn identity(&self) -> usize {
        self.identity
    }

    #[inline]
    fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order + b] as usize
    }

    #[inline]
    fn inv(&self, a: usize) -> usize {
        self.inv[a] as usize
    }
}

impl FiniteGroup {
    /// Builds a group from a row-major multiplication table, checking the
    /// group axioms. Associativity is checked exhaustively up to
    /// [`ASSOCIATIVITY_CHECK_LIMIT`].
    pub fn from_table(labels: Vec<String>, table: Vec<u32>) -> Result<Self, GroupError> {
        let group = Self::from_table_unchecked(labels, table)?;
        if group.order <= ASSOCIATIVITY_CHECK_LIMIT && !group.is_associative() {
            return Err(GroupError::InvalidTable("not associative".into()));
        }
        Ok(group)
    }

    /// Like [`FiniteGroup::from_table`] but skips the cubic associativity
    /// check. The table must still be a Latin square with an identity.
    pub fn from_table_unchecked(labels: Vec<String>, table: Vec<u32>) -> Result<Self, GroupError> {
        let order = labels.len();
        if order == 0 {
            return Err(GroupError::InvalidTable("empty group".into()));
        }
        if table.len() != order * order {
            return Err(GroupError::InvalidTable(format!(
                "expected {} entries, got {}",
                order * order,
                table.len()
            )));
        }
        if table.iter().any(|&x| x as usize >= order) {
            return Err(GroupError::InvalidTable("entry out of range".into()));
        }
        let mut seen = vec![false; order];
        for r in 0..order {
            seen.iter_mut().for_each(|s| *s = false);
            for c in 0..order {
                seen[table[r * order + c] as usize] = true;
            }
            if seen.iter().any(|s| !s) {
                return Err(GroupError::InvalidTable(format!(
                    "row {r} is not a permutation"
                )));
            }
        }
        for c in 0..order {
            seen.iter_mut().for_each(|s| *s = false);
            for r in 0..order {
                seen[table[r * order + c] as usize] = true;
            }
            if seen.iter().any(|s| !s) {
                return Err(GroupError::InvalidTable(format!(
                    "column {c} is not a permutation"
                )));
            }
        }
        let identity = (0..order)
            .find(|&e| {
                (0..order).all(|x| {
                    table[e * order + x] as usize == x && table[x * order + e] as usize == x
                })
            })
            .ok_or_else(|| GroupError::InvalidTable("no two-sided identity".into()))?;
        let mut inv = vec![0u32; order];
        for (x, slot) in inv.iter_mut().enumerate() {
            // Latin rows guarantee a unique right inverse.
            let y = (0..order)
                .find(|&y| table[x * order + y] as usize == identity)
                .unwrap();
            if table[y * order + x] as usize != identity {
                return Err(GroupError::InvalidTable(format!(
                    "element {x} has no two-sided inverse"
                )));
            }
            *slot = y as u32;
        }
        Ok(Self {
            order,
            mul: table,
            inv,
            identity,
            labels,
        })
    }

    /// Row `g` of the Cayley table: `h ↦ g·h`.
    #[inline]
    pub fn row(&self, g: usize) -> &[u32] {
        &self.mul[g * self.order..(g + 1) * self.order]
    }

    pub fn label(&self, x: usize) -> &str {
        &self.labels[x]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order
    }

    pub fn is_associative(&self) -> bool {
        let n = self.order;
        (0..n).all(|a| {
            (0..n)
                .all(|b| (0..n).all(|c| self.mul(self.mul(a, b), c) == self.mul(a, self.mul(b, c))))
        })
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order;
        (0..n).all(|a| (a + 1..n).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn whole(&self) -> SubgroupRef<'_> {
        SubgroupRef::new_unchecked(self, self.elements().collect())
    }

    pub fn subgroup_generated(&self, gens: &[usize]) -> SubgroupRef<'_> {
        SubgroupRef::new_unchecked(self, closure(self, gens))
    }

    /// `G'`, generated by all commutators.
    pub fn derived_subgroup(&self) -> SubgroupRef<'_> {
        self.whole().derived()
    }

    pub fn center(&self) -> SubgroupRef<'_> {
        let n = self.order;
        let members = (0..n)
            .filter(|&x| (0..n).all(|y| self.mul(x, y) == self.mul(y, x)))
            .collect();
        SubgroupRef::new_unchecked(self, members)
    }

    /// `C_G(g)`.
    pub fn centralizer(&self, g: usize) -> SubgroupRef<'_> {
        let members = self
            .elements()
            .filter(|&x| self.mul(x, g) == self.mul(g, x))
            .collect();
        SubgroupRef::new_unchecked(self, members)
    }

    pub fn nilpotency_class(&self) -> Nilpotency {
        self.whole().nilpotency_class()
    }

    /// Central elements of order exactly `p`.
    pub fn central_order_p_elements(&self, p: u64) -> Result<Vec<usize>, GroupError> {
        if !is_prime(p) {
            return Err(GroupError::NotPrime(p));
        }
        Ok(self
            .center()
            .members()
            .iter()
            .copied()
            .filter(|&c| self.element_order(c) as u64 == p)
            .collect())
    }

    /// Direct product with lexicographic element numbering `(a, b) ↦ a·|B| + b`.
    pub fn direct_product(&self, other: &FiniteGroup) -> FiniteGroup {
        let (n, m) = (self.order, other.order);
        let mut labels = Vec::with_capacity(n * m);
        for a in 0..n {
            for b in 0..m {
                labels.push(format!("({},{})", self.labels[a], other.labels[b]));
            }
        }
        let mut table = Vec::with_capacity(n * n * m * m);
        for a1 in 0..n {
            for b1 in 0..m {
                for a2 in 0..n {
                    for b2 in 0..m {
                        table.push((self.mul(a1, a2) * m + other.mul(b1, b2)) as u32);
                    }
                }
            }
        }
        let mut inv = Vec::with_capacity(n * m);
        for a in 0..n {
            for b in 0..m {
                inv.push((self.inv(a) * m + other.inv(b)) as u32);
            }
        }
        FiniteGroup {
            order: n * m,
            mul: table,
            inv,
            identity: self.identity * m + other.identity,
            labels,
        }
    }
}

/// Outcome of a lower-central-series computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Nilpotency {
    /// Least `c` with `γ_{c+1} = 1`.
    Class(usize),
    /// The series stabilized at a nontrivial term of this order.
    NotNilpotent { stable_order: usize },
}

impl Nilpotency {
    pub fn is_nilpotent(&self) -> bool {
        matches!(self, Nilpotency::Class(_))
    }

    pub fn class(&self) -> Option<usize> {
        match self {
            Nilpotency::Class(c) => Some(*c),
            Nilpotency::NotNilpotent { .. } => None,
        }
    }
}

/// A subgroup of `parent`, stored as a sorted list of member indices.
pub struct SubgroupRef<'g, G: GroupTable = FiniteGroup> {
    parent: &'g G,
    members: Vec<usize>,
}

impl<G: GroupTable> Clone for SubgroupRef<'_, G> {
    fn clone(&self) -> Self {
        Self {
            parent: self.parent,
            members: self.members.clone(),
        }
    }
}

impl<G: GroupTable> fmt::Debug for SubgroupRef<'_, G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SubgroupRef")
            .field("members", &self.members)
            .finish()
    }
}

impl<G: GroupTable> PartialEq for SubgroupRef<'_, G> {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.parent, other.parent) && self.members == other.members
    }
}

impl<'g, G: GroupTable> SubgroupRef<'g, G> {
    /// Checks closure under multiplication and inversion.
    pub fn new(parent: &'g G, mut members: Vec<usize>) -> Option<Self> {
        members.sort_unstable();
        members.dedup();
        let sub = Self { parent, members };
        let closed = sub.contains(parent.identity())
            && sub.members.iter().all(|&x| {
                sub.contains(parent.inv(x))
                    && sub.members.iter().all(|&y| sub.contains(parent.mul(x, y)))
            });
        closed.then_some(sub)
    }

    fn new_unchecked(parent: &'g G, mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        Self { parent, members }
    }

    pub fn parent(&self) -> &'g G {
        self.parent
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.members.len() == 1
    }

    pub fn contains(&self, x: usize) -> bool {
        self.members.binary_search(&x).is_ok()
    }

    pub fn is_subgroup_of(&self, other: &SubgroupRef<'_, G>) -> bool {
        self.members.iter().all(|&x| other.contains(x))
    }

    /// Closed under conjugation by every element of the parent.
    pub fn is_normal(&self) -> bool {
        let g = self.parent;
        self.members
            .iter()
            .all(|&x| (0..g.order()).all(|y| self.contains(g.conjugate(x, y))))
    }

    pub fn is_abelian(&self) -> bool {
        let g = self.parent;
        self.members
            .iter()
            .all(|&a| self.members.iter().all(|&b| g.mul(a, b) == g.mul(b, a)))
    }

    /// `[self, self]`: the derived subgroup of this subgroup.
    pub fn derived(&self) -> SubgroupRef<'g, G> {
        self.commutator_with(self)
    }

    /// `[self, other]`, generated by all `(x, y)` with `x ∈ self`, `y ∈ other`.
    pub fn commutator_with(&self, other: &SubgroupRef<'_, G>) -> SubgroupRef<'g, G> {
        let g = self.parent;
        let mut seen = vec![false; g.order()];
        let mut gens = Vec::new();
        for &x in &self.members {
            for &y in &other.members {
                let c = g.commutator(x, y);
                if !seen[c] {
                    seen[c] = true;
                    gens.push(c);
                }
            }
        }
        SubgroupRef::new_unchecked(g, closure(g, &gens))
    }

    /// Lower central series of this subgroup, `γ₁ = H, γ_{i+1} = [γ_i, H]`,
    /// up to and including the first repeated term.
    pub fn lower_central_series(&self) -> Vec<SubgroupRef<'g, G>> {
        let mut series = vec![self.clone()];
        loop {
            let next = series.last().unwrap().commutator_with(self);
            let stable = next.order() == series.last().unwrap().order();
            if stable {
                return series;
            }
            let trivial = next.is_trivial();
            series.push(next);
            if trivial {
                return series;
            }
        }
    }

    pub fn nilpotency_class(&self) -> Nilpotency {
        let series = self.lower_central_series();
        let last = series.last().unwrap();
        if last.is_trivial() {
            Nilpotency::Class(series.len() - 1)
        } else {
            Nilpotency::NotNilpotent {
                stable_order: last.order(),
            }
        }
    }

    /// Order is a power of `p` (order 1 counts).
    pub fn is_p_group(&self, p: u64) -> Result<bool, GroupError> {
        if !is_prime(p) {
            return Err(GroupError::NotPrime(p));
        }
        Ok(is_power_of(self.order() as u64, p))
    }
}

impl SubgroupRef<'_, FiniteGroup> {
    /// Materializes the subgroup as a standalone group, renumbering members
    /// in sorted order.
    pub fn to_group(&self) -> FiniteGroup {
        let g = self.parent;
        let pos = |x: usize| self.members.binary_search(&x).unwrap() as u32;
        let labels = self
            .members
            .iter()
            .map(|&x| g.label(x).to_string())
            .collect();
        let table = self
            .members
            .iter()
            .flat_map(|&a| self.members.iter().map(move |&b| pos(g.mul(a, b))))
            .collect();
        FiniteGroup::from_table_unchecked(labels, table).expect("closed subgroup forms a group")
    }
}

/// Subgroup generated by `gens`: breadth-first closure from the identity
/// under right multiplication by the generators. Finite, so inverses come
/// for free. Returned sorted.
pub fn closure<G: GroupTable + ?Sized>(g: &G, gens: &[usize]) -> Vec<usize> {
    let mut seen = vec![false; g.order()];
    let id = g.identity();
    seen[id] = true;
    let mut members = vec![id];
    let mut head = 0;
    while head < members.len() {
        let x = members[head];
        head += 1;
        for &s in gens {
            let y = g.mul(x, s);
            if !seen[y] {
                seen[y] = true;
                members.push(y);
            }
        }
    }
    members.sort_unstable();
    members
}

/// Normal closure of `seeds` in the group generated by `group_gens`.
/// Returns a generating set and the sorted members.
pub fn normal_closure<G: GroupTable + ?Sized>(
    g: &G,
    group_gens: &[usize],
    seeds: &[usize],
) -> (Vec<usize>, Vec<usize>) {
    let id = g.identity();
    let mut gens: Vec<usize> = Vec::new();
    for &s in seeds {
        if s != id && !gens.contains(&s) {
            gens.push(s);
        }
    }
    let mut members = closure(g, &gens);
    let mut i = 0;
    while i < gens.len() {
        let s = gens[i];
        i += 1;
        for &y in group_gens {
            let t = g.conjugate(s, y);
            if members.binary_search(&t).is_err() {
                gens.push(t);
                members = closure(g, &gens);
            }
        }
    }
    (gens, members)
}

/// Nilpotency class computed from generators only, without enumerating all
/// commutator pairs: `γ_{i+1}` is the normal closure of the commutators of
/// generators of `γ_i` with generators of the group.
///
/// Assumes `group_gens` generates the whole of `g`.
pub fn nilpotency_class_by_generators<G: GroupTable + ?Sized>(
    g: &G,
    group_gens: &[usize],
) -> Nilpotency {
    let id = g.identity();
    let mut term_gens: Vec<usize> = group_gens.iter().copied().filter(|&x| x != id).collect();
    let mut term_order = closure(g, &term_gens).len();
    let mut class = 0;
    loop {
        if term_order == 1 {
            return Nilpotency::Class(class);
        }
        let mut comms = Vec::new();
        for &x in &term_gens {
            for &y in group_gens {
                let c = g.commutator(x, y);
                if c != id && !comms.contains(&c) {
                    comms.push(c);
                }
            }
        }
        let (next_gens, next) = normal_closure(g, group_gens, &comms);
        if next.len() == term_order {
            return Nilpotency::NotNilpotent {
                stable_order: term_order,
            };
        }
        class += 1;
        term_order = next.len();
        term_gens = next_gens;
    }
}

/// A small generating set, picked greedily in index order.
pub fn greedy_generators<G: GroupTable + ?Sized>(g: &G) -> Vec<usize> {
    let mut gens = Vec::new();
    let mut members = vec![g.identity()];
    for x in 0..g.order() {
        if members.len() == g.order() {
            break;
        }
        if members.binary_search(&x).is_err() {
            gens.push(x);
            members = closure(g, &gens);
        }
    }
    gens
}

pub fn is_prime(n: u64) -> bool {
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

pub fn is_power_of(mut n: u64, p: u64) -> bool {
    if n == 0 {
        return false;
    }
    while n.is_multiple_of(p) {
        n /= p;
    }
    n == 1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn group(text: &str) -> FiniteGroup {
        build_group(&parse_group_spec(text).unwrap(), DEFAULT_GROUP_CAP).unwrap()
    }

    fn find(g: &FiniteGroup, label: &str) -> usize {
        g.elements()
            .find(|&x| g.label(x) == label)
            .unwrap_or_else(|| panic!("no element {label}"))
    }

    #[test]
    fn element_orders() {
        let s3 = group("catalog:S3");
        assert_eq!(s3.element_order(s3.identity()), 1);
        assert_eq!(s3.element_order(find(&s3, "(1 2)")), 2);
        let c6 = group("catalog:C,6");
        assert_eq!(c6.element_order(find(&c6, "g")), 6);
        for x in s3.elements() {
            assert_eq!(6 % s3.element_order(x), 0);
        }
    }

    #[test]
    fn commutators_in_s3_and_d4() {
        let s3 = group("catalog:S3");
        let c = s3.left_normed_commutator(find(&s3, "(1 2)"), find(&s3, "(1 3)"), 1);
        assert_eq!(s3.element_order(c), 3);

        let d4 = group("catalog:D,4");
        for x in d4.elements() {
            for y in d4.elements() {
                assert_eq!(d4.left_normed_commutator(x, y, 2), d4.identity());
            }
        }
        let c3 = group("catalog:C,3");
        for x in c3.elements() {
            for y in c3.elements() {
                assert_eq!(c3.left_normed_commutator(x, y, 3), c3.identity());
            }
        }
    }

    #[test]
    fn generated_subgroups() {
        let s3 = group("catalog:S3");
        assert!(s3.subgroup_generated(&[s3.identity()]).is_trivial());
        assert_eq!(s3.subgroup_generated(&[find(&s3, "(1 2 3)")]).order(), 3);
        let q8 = group("catalog:Q8");
        assert_eq!(
            q8.subgroup_generated(&[find(&q8, "i"), find(&q8, "j")])
                .order(),
            8
        );
    }

    #[test]
    fn derived_subgroups_and_centers() {
        assert!(group("catalog:C,6").derived_subgroup().is_trivial());
        assert_eq!(group("catalog:S3").derived_subgroup().order(), 3);
        assert_eq!(group("catalog:D,4").derived_subgroup().order(), 2);
        let c4 = group("catalog:C,4");
        assert_eq!(c4.center().order(), 4);
        assert!(group("catalog:S3").center().is_trivial());
        assert_eq!(group("catalog:Q8").center().order(), 2);
    }

    #[test]
    fn nilpotency_classes() {
        assert_eq!(
            group("catalog:C,1").nilpotency_class(),
            Nilpotency::Class(0)
        );
        assert_eq!(
            group("catalog:D,4").nilpotency_class(),
            Nilpotency::Class(2)
        );
        assert_eq!(
            group("catalog:S3").nilpotency_class(),
            Nilpotency::NotNilpotent { stable_order: 3 }
        );
        assert_eq!(
            group("catalog:C,6").nilpotency_class(),
            Nilpotency::Class(1)
        );
    }

    #[test]
    fn p_group_checks() {
        let s3 = group("catalog:S3");
        let d = s3.derived_subgroup();
        assert!(s3.subgroup_generated(&[0]).is_p_group(5).unwrap());
        assert!(d.is_p_group(3).unwrap());
        assert!(!d.is_p_group(2).unwrap());
        assert_eq!(d.is_p_group(4), Err(GroupError::NotPrime(4)));
    }

    #[test]
    fn centralizers() {
        let s3 = group("catalog:S3");
        assert_eq!(s3.centralizer(s3.identity()).order(), 6);
        assert_eq!(s3.centralizer(find(&s3, "(1 2 3)")).order(), 3);
        let q8 = group("catalog:Q8");
        let i = find(&q8, "i");
        let ci = q8.centralizer(i);
        assert_eq!(ci, q8.subgroup_generated(&[i]));
        assert_eq!(ci.order(), 4);
    }

    #[test]
    fn central_elements_of_order_p() {
        let c2 = group("catalog:C,2");
        assert_eq!(
            c2.central_order_p_elements(2).unwrap(),
            vec![find(&c2, "g")]
        );
        assert!(group("catalog:S3")
            .central_order_p_elements(3)
            .unwrap()
            .is_empty());
        let q8 = group("catalog:Q8");
        assert_eq!(
            q8.central_order_p_elements(2).unwrap(),
            vec![find(&q8, "-1")]
        );
        assert_eq!(q8.central_order_p_elements(6), Err(GroupError::NotPrime(6)));
    }

    #[test]
    fn rejects_bad_tables() {
        let labels = vec!["a".to_string(), "b".to_string()];
        assert!(FiniteGroup::from_table(labels.clone(), vec![0, 1, 1, 1]).is_err());
        assert!(FiniteGroup::from_table(labels.clone(), vec![0, 1, 1]).is_err());
        assert!(FiniteGroup::from_table(labels, vec![0, 1, 1, 0]).is_ok());
    }

    #[test]
    fn subgroup_validation() {
        let s3 = group("catalog:S3");
        assert!(SubgroupRef::new(&s3, vec![0, find(&s3, "(1 2)")]).is_some());
        assert!(SubgroupRef::new(&s3, vec![0, find(&s3, "(1 2)"), find(&s3, "(1 3)")]).is_none());
    }

    #[test]
    fn to_group_keeps_structure() {
        let s4 = group("catalog:S4");
        let a4 = s4.derived_subgroup().to_group();
        assert_eq!(a4.order(), 12);
        assert!(a4.is_associative());
        assert_eq!(a4.derived_subgroup().order(), 4);
    }
}
