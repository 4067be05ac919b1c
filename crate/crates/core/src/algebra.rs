//! The group algebra GF(p)[G]: dense coefficient vectors indexed by group
//! elements, convolution product through the Cayley table, the classical
//! involution `Σ a_g g ↦ Σ a_g g⁻¹`, augmentation, and unit inversion via the
//! left regular representation.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use thiserror::Error;

use crate::group::{is_prime, FiniteGroup, GroupTable};
use crate::linalg;

/// Residues are stored as `u8`.
pub const MAX_PRIME: u64 = 251;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("characteristic {0} is above the supported maximum {MAX_PRIME}")]
    UnsupportedPrime(u64),
    #[error("operands belong to different group algebras")]
    ContextMismatch,
    #[error("element {element} has order {order}, expected {p}")]
    OrderMismatch {
        element: usize,
        order: usize,
        p: u32,
    },
    #[error("element index {0} out of range")]
    InvalidIndex(usize),
    #[error("invalid coefficient vector: {0}")]
    InvalidCoefficients(String),
}

struct ContextInner {
    group: Arc<FiniteGroup>,
    p: u32,
    inverses: Vec<u32>,
}

/// A group algebra `GF(p)[G]`. Cheap to clone; clones compare equal.
#[derive(Clone)]
pub struct AlgebraContext {
    inner: Arc<ContextInner>,
}

impl fmt::Debug for AlgebraContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})[G], |G| = {}", self.p(), self.dim())
    }
}

impl PartialEq for AlgebraContext {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (Arc::ptr_eq(&self.inner.group, &other.inner.group) && self.inner.p == other.inner.p)
    }
}

impl Eq for AlgebraContext {}

impl AlgebraContext {
    pub fn new(group: Arc<FiniteGroup>, p: u64) -> Result<Self, AlgebraError> {
        if !is_prime(p) {
            return Err(AlgebraError::NotPrime(p));
        }
        if p > MAX_PRIME {
            return Err(AlgebraError::UnsupportedPrime(p));
        }
        let p = p as u32;
        Ok(Self {
            inner: Arc::new(ContextInner {
                group,
                p,
                inverses: linalg::inverse_table(p),
            }),
        })
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.inner.group
    }

    pub fn group_arc(&self) -> &Arc<FiniteGroup> {
        &self.inner.group
    }

    pub fn p(&self) -> u32 {
        self.inner.p
    }

    /// `|G|`, the dimension of the algebra.
    pub fn dim(&self) -> usize {
        self.inner.group.order()
    }

    /// `p` divides `|G|`; for finite groups this is the same as `G` having an
    /// element of order `p`.
    pub fn is_modular(&self) -> bool {
        self.dim().is_multiple_of(self.p() as usize)
    }

    pub fn zero(&self) -> AlgebraElement {
        AlgebraElement {
            ctx: self.clone(),
            coeffs: vec![0; self.dim()],
        }
    }

    pub fn one(&self) -> AlgebraElement {
        self.embed_unchecked(self.group().identity())
    }

    pub fn embed(&self, g: usize) -> Result<AlgebraElement, AlgebraError> {
        if g >= self.dim() {
            return Err(AlgebraError::InvalidIndex(g));
        }
        Ok(self.embed_unchecked(g))
    }

    pub(crate) fn embed_unchecked(&self, g: usize) -> AlgebraElement {
        let mut e = self.zero();
        e.coeffs[g] = 1;
        e
    }

    pub fn element(&self, coeffs: Vec<u8>) -> Result<AlgebraElement, AlgebraError> {
        if coeffs.len() != self.dim() {
            return Err(AlgebraError::InvalidCoefficients(format!(
                "expected {} coefficients, got {}",
                self.dim(),
                coeffs.len()
            )));
        }
        if let Some(&bad) = coeffs.iter().find(|&&c| c as u32 >= self.p()) {
            return Err(AlgebraError::InvalidCoefficients(format!(
                "{bad} is not a residue mod {}",
                self.p()
            )));
        }
        Ok(AlgebraElement {
            ctx: self.clone(),
            coeffs,
        })
    }

    /// Reduces arbitrary integers mod p.
    pub fn element_from_ints(&self, values: &[i64]) -> Result<AlgebraElement, AlgebraError> {
        let p = self.p() as i64;
        self.element(values.iter().map(|v| v.rem_euclid(p) as u8).collect())
    }

    /// `ĉ = 1 + c + … + c^(p−1)` for `c` of order exactly `p`.
    pub fn hat(&self, c: usize) -> Result<AlgebraElement, AlgebraError> {
        if c >= self.dim() {
            return Err(AlgebraError::InvalidIndex(c));
        }
        let g = self.group();
        let order = g.element_order(c);
        if order != self.p() as usize {
            return Err(AlgebraError::OrderMismatch {
                element: c,
                order,
                p: self.p(),
            });
        }
        let mut e = self.zero();
        let mut x = g.identity();
        for _ in 0..order {
            e.coeffs[x] = 1;
            x = g.mul(x, c);
        }
        Ok(e)
    }

    /// `out = a · b`, convolution through the Cayley table.
    pub(crate) fn mul_into(&self, a: &[u8], b: &[u8], out: &mut [u8]) {
        let g = self.group();
        let n = self.dim();
        let mut acc = vec![0u32; n];
        for (x, &ax) in a.iter().enumerate() {
            if ax == 0 {
                continue;
            }
            let row = g.row(x);
            for (y, &by) in b.iter().enumerate() {
                if by != 0 {
                    acc[row[y] as usize] += ax as u32 * by as u32;
                }
            }
        }
        let p = self.p();
        for (o, s) in out.iter_mut().zip(acc) {
            *o = (s % p) as u8;
        }
    }

    pub(crate) fn mul_vec(&self, a: &[u8], b: &[u8]) -> Vec<u8> {
        let mut out = vec![0; a.len()];
        self.mul_into(a, b, &mut out);
        out
    }

    /// Classical involution on a raw coefficient vector.
    pub(crate) fn star_vec(&self, a: &[u8]) -> Vec<u8> {
        let g = self.group();
        let mut out = vec![0; a.len()];
        for (x, &ax) in a.iter().enumerate() {
            out[g.inv(x)] = ax;
        }
        out
    }

    pub(crate) fn augmentation_of(&self, a: &[u8]) -> u32 {
        a.iter().map(|&x| x as u32).sum::<u32>() % self.p()
    }

    pub(crate) fn is_one_vec(&self, a: &[u8]) -> bool {
        let id = self.group().identity();
        a.iter().enumerate().all(|(i, &x)| x == (i == id) as u8)
    }

    /// Solves `L_a · b = 1` where `L_a` is left multiplication by `a`. In a
    /// finite-dimensional algebra a right inverse is two-sided.
    pub(crate) fn inverse_vec(&self, a: &[u8]) -> Option<Vec<u8>> {
        let g = self.group();
        let n = self.dim();
        let id = g.identity();
        // L[k][h] = coefficient of k in a·h = a_{k h⁻¹}
        if self.p() == 2 && n < 128 {
            let mut rows: Vec<u128> = (0..n)
                .map(|k| {
                    let mut row = ((k == id) as u128) << n;
                    for h in 0..n {
                        if a[g.mul(k, g.inv(h))] != 0 {
                            row |= 1 << h;
                        }
                    }
                    row
                })
                .collect();
            let x = linalg::solve_gf2(n, &mut rows)?;
            return Some((0..n).map(|i| ((x >> i) & 1) as u8).collect());
        }
        let mut m = vec![0u8; n * n];
        for k in 0..n {
            for h in 0..n {
                m[k * n + h] = a[g.mul(k, g.inv(h))];
            }
        }
        let mut rhs = vec![0u8; n];
        rhs[id] = 1;
        linalg::solve_mod_p(self.p(), n, &m, &rhs, &self.inner.inverses)
    }

    /// Left regular representation of `a` as a row-major `|G| × |G|` matrix.
    pub fn regular_matrix(&self, a: &AlgebraElement) -> Vec<u8> {
        let g = self.group();
        let n = self.dim();
        let mut m = vec![0u8; n * n];
        for k in 0..n {
            for h in 0..n {
                m[k * n + h] = a.coeffs[g.mul(k, g.inv(h))];
            }
        }
        m
    }

    /// Canonical text: nonzero terms `c*label` joined by ` + `, or `0`.
    pub fn format_coeffs(&self, a: &[u8]) -> String {
        let g = self.group();
        let terms: Vec<String> = a
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(x, c)| format!("{c}*{}", g.label(x)))
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ")
        }
    }
}

/// An element of `GF(p)[G]`.
#[derive(Clone, PartialEq, Eq)]
pub struct AlgebraElement {
    ctx: AlgebraContext,
    coeffs: Vec<u8>,
}

impl fmt::Debug for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.ctx.format_coeffs(&self.coeffs))
    }
}

impl AlgebraElement {
    pub(crate) fn from_parts(ctx: AlgebraContext, coeffs: Vec<u8>) -> Self {
        debug_assert_eq!(coeffs.len(), ctx.dim());
        Self { ctx, coeffs }
    }

    pub fn context(&self) -> &AlgebraContext {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[u8] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<u8> {
        self.coeffs
    }

    fn check(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.ctx == other.ctx {
            Ok(())
        } else {
            Err(AlgebraError::ContextMismatch)
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(u32, u32, u32) -> u32) -> Self {
        let p = self.ctx.p();
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| f(a as u32, b as u32, p) as u8)
            .collect();
        Self {
            ctx: self.ctx.clone(),
            coeffs,
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check(other)?;
        Ok(self.zip_with(other, |a, b, p| (a + b) % p))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check(other)?;
        Ok(self.zip_with(other, |a, b, p| (a + p - b) % p))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check(other)?;
        Ok(Self {
            ctx: self.ctx.clone(),
            coeffs: self.ctx.mul_vec(&self.coeffs, &other.coeffs),
        })
    }

    pub fn scale(&self, k: i64) -> Self {
        let p = self.ctx.p() as i64;
        let k = k.rem_euclid(p) as u32;
        let coeffs = self
            .coeffs
            .iter()
            .map(|&a| (a as u32 * k % p as u32) as u8)
            .collect();
        Self {
            ctx: self.ctx.clone(),
            coeffs,
        }
    }

    /// Sum of coefficients mod p.
    pub fn augmentation(&self) -> u32 {
        self.ctx.augmentation_of(&self.coeffs)
    }

    /// `(Σ a_g g)* = Σ a_g g⁻¹`.
    pub fn involution(&self) -> Self {
        Self {
            ctx: self.ctx.clone(),
            coeffs: self.ctx.star_vec(&self.coeffs),
        }
    }

    /// The two-sided inverse, or `None` when `self` is not a unit.
    pub fn try_inverse(&self) -> Option<Self> {
        self.ctx.inverse_vec(&self.coeffs).map(|coeffs| Self {
            ctx: self.ctx.clone(),
            coeffs,
        })
    }

    pub fn is_unit(&self) -> bool {
        self.try_inverse().is_some()
    }

    /// Augmentation 1 and `u*·u = 1`.
    pub fn is_unitary(&self) -> bool {
        self.augmentation() == 1
            && self.ctx.is_one_vec(
                &self
                    .ctx
                    .mul_vec(&self.ctx.star_vec(&self.coeffs), &self.coeffs),
            )
    }

    pub fn support(&self) -> Vec<usize> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn is_one(&self) -> bool {
        self.ctx.is_one_vec(&self.coeffs)
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = self.ctx.one();
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Group commutator `x⁻¹ y⁻¹ x y` of two units; `None` if either is not
    /// invertible.
    pub fn unit_commutator(&self, other: &Self) -> Option<Self> {
        let xi = self.try_inverse()?;
        let yi = other.try_inverse()?;
        Some(&(&(&xi * &yi) * self) * other)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait for &AlgebraElement {
            type Output = AlgebraElement;

            /// Panics if the operands live in different algebras.
            fn $method(self, rhs: &AlgebraElement) -> AlgebraElement {
                self.$checked(rhs)
                    .expect("operands from the same group algebra")
            }
        }

        impl $trait for AlgebraElement {
            type Output = AlgebraElement;

            fn $method(self, rhs: AlgebraElement) -> AlgebraElement {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, try_add);
forward_binop!(Sub, sub, try_sub);
forward_binop!(Mul, mul, try_mul);

impl Neg for &AlgebraElement {
    type Output = AlgebraElement;

    fn neg(self) -> AlgebraElement {
        self.scale(-1)
    }
}
