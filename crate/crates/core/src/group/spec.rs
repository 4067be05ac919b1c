//! Textual group descriptions.
//!
//! Grammar (prefix form, so nested products need no brackets):
//!
//! ```text
//! spec    := "catalog:" NAME [ "," PARAM ]
//!          | "perm:" cycles { ";" cycles }
//!          | "prod:" spec "|" spec
//! cycles  := "(" point { " " point } ")" { cycles }  |  "()"
//! ```
//!
//! Catalog names: `C,n` (cyclic, order n), `D,n` (dihedral, order 2n), `Q8`,
//! `S3`, `S4`, `A4`. The shorthands `C6`, `D4` are accepted on input; the
//! printer always writes the comma form.

use std::collections::HashMap;
use std::fmt;

use super::{FiniteGroup, GroupError};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CatalogGroup {
    Cyclic(usize),
    Dihedral(usize),
    Quaternion8,
    Symmetric3,
    Symmetric4,
    Alternating4,
}

/// A permutation of `{1, …, n}` stored as its image list, with trailing fixed
/// points trimmed so equal permutations compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GroupSpec {
    Catalog(CatalogGroup),
    Permutations(Vec<Permutation>),
    Product(Box<GroupSpec>, Box<GroupSpec>),
}

impl GroupSpec {
    pub fn product(a: GroupSpec, b: GroupSpec) -> Self {
        GroupSpec::Product(Box::new(a), Box::new(b))
    }
}

impl Permutation {
    /// From 0-based images; must be a bijection of `0..len`.
    pub fn from_images(mut images: Vec<usize>) -> Option<Self> {
        let mut seen = vec![false; images.len()];
        for &x in &images {
            if x >= images.len() || seen[x] {
                return None;
            }
            seen[x] = true;
        }
        while images.last().is_some_and(|&x| x == images.len() - 1) {
            images.pop();
        }
        Some(Self { images })
    }

    /// Product of disjoint or overlapping cycles, 1-based points, applied
    /// left to right.
    pub fn from_cycles(cycles: &[Vec<usize>]) -> Option<Self> {
        let degree = cycles.iter().flatten().copied().max().unwrap_or(0);
        let mut images: Vec<usize> = (0..degree).collect();
        for cycle in cycles {
            if cycle.contains(&0) {
                return None;
            }
            let mut step: Vec<usize> = (0..degree).collect();
            for (i, &x) in cycle.iter().enumerate() {
                let y = cycle[(i + 1) % cycle.len()];
                step[x - 1] = y - 1;
            }
            let mut check = step.clone();
            check.sort_unstable();
            if check != (0..degree).collect::<Vec<_>>() {
                return None;
            }
            images = images.iter().map(|&x| step[x]).collect();
        }
        Self::from_images(images)
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn image(&self, x: usize) -> usize {
        self.images.get(x).copied().unwrap_or(x)
    }

    fn padded(&self, n: usize) -> Vec<u8> {
        (0..n).map(|x| self.image(x) as u8).collect()
    }

    /// Disjoint cycles, 1-based, each starting at its least point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.images.len()];
        let mut out = Vec::new();
        for start in 0..self.images.len() {
            if seen[start] || self.images[start] == start {
                continue;
            }
            let mut cycle = Vec::new();
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                cycle.push(x + 1);
                x = self.images[x];
            }
            out.push(cycle);
        }
        out
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for cycle in cycles {
            let parts: Vec<String> = cycle.iter().map(|x| x.to_string()).collect();
            write!(f, "({})", parts.join(" "))?;
        }
        Ok(())
    }
}

impl fmt::Display for CatalogGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CatalogGroup::Cyclic(n) => write!(f, "C,{n}"),
            CatalogGroup::Dihedral(n) => write!(f, "D,{n}"),
            CatalogGroup::Quaternion8 => write!(f, "Q8"),
            CatalogGroup::Symmetric3 => write!(f, "S3"),
            CatalogGroup::Symmetric4 => write!(f, "S4"),
            CatalogGroup::Alternating4 => write!(f, "A4"),
        }
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::Catalog(c) => write!(f, "catalog:{c}"),
            GroupSpec::Permutations(gens) => {
                let parts: Vec<String> = gens.iter().map(|p| p.to_string()).collect();
                write!(f, "perm:{}", parts.join(";"))
            }
            GroupSpec::Product(a, b) => write!(f, "prod:{a}|{b}"),
        }
    }
}

impl std::str::FromStr for GroupSpec {
    type Err = GroupError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_group_spec(s)
    }
}

pub fn parse_group_spec(text: &str) -> Result<GroupSpec, GroupError> {
    let mut parser = Parser { text, pos: 0 };
    let spec = parser.spec()?;
    if parser.pos != text.len() {
        return Err(parser.error("unexpected trailing input"));
    }
    Ok(spec)
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, reason: impl Into<String>) -> GroupError {
        GroupError::InvalidSpec {
            position: self.pos,
            reason: reason.into(),
        }
    }

    fn rest(&self) -> &str {
        &self.text[self.pos..]
    }

    fn eat(&mut self, prefix: &str) -> bool {
        if self.rest().starts_with(prefix) {
            self.pos += prefix.len();
            true
        } else {
            false
        }
    }

    fn spec(&mut self) -> Result<GroupSpec, GroupError> {
        if self.eat("catalog:") {
            self.catalog()
        } else if self.eat("perm:") {
            self.perms()
        } else if self.eat("prod:") {
            let a = self.spec()?;
            if !self.eat("|") {
                return Err(self.error("expected '|' between product factors"));
            }
            let b = self.spec()?;
            Ok(GroupSpec::product(a, b))
        } else {
            Err(self.error("expected 'catalog:', 'perm:' or 'prod:'"))
        }
    }

    fn catalog(&mut self) -> Result<GroupSpec, GroupError> {
        let start = self.pos;
        let len = self.rest().find('|').unwrap_or(self.rest().len());
        let token = self.rest()[..len].trim();
        let (name, param) = match token.split_once(',') {
            Some((n, p)) => (n.trim(), Some(p.trim())),
            None => (token, None),
        };
        let number = |s: &str| -> Result<usize, GroupError> {
            s.parse::<usize>()
                .ok()
                .filter(|&n| n >= 1)
                .ok_or_else(|| GroupError::InvalidSpec {
                    position: start,
                    reason: format!("bad parameter '{s}'"),
                })
        };
        let group = match (name, param) {
            ("C", Some(n)) => CatalogGroup::Cyclic(number(n)?),
            ("D", Some(n)) => CatalogGroup::Dihedral(number(n)?),
            ("Q8", None) => CatalogGroup::Quaternion8,
            ("S3", None) => CatalogGroup::Symmetric3,
            ("S4", None) => CatalogGroup::Symmetric4,
            ("A4", None) => CatalogGroup::Alternating4,
            (n, None) if n.len() > 1 && n.starts_with('C') => {
                CatalogGroup::Cyclic(number(&n[1..])?)
            }
            (n, None) if n.len() > 1 && n.starts_with('D') => {
                CatalogGroup::Dihedral(number(&n[1..])?)
            }
            _ => {
                return Err(GroupError::InvalidSpec {
                    position: start,
                    reason: format!("unknown catalog group '{token}'"),
                })
            }
        };
        self.pos += len;
        Ok(GroupSpec::Catalog(group))
    }

    fn perms(&mut self) -> Result<GroupSpec, GroupError> {
        let mut gens = vec![self.cycles()?];
        while self.eat(";") {
            gens.push(self.cycles()?);
        }
        Ok(GroupSpec::Permutations(gens))
    }

    fn skip_spaces(&mut self) {
        while self.rest().starts_with(' ') {
            self.pos += 1;
        }
    }

    fn cycles(&mut self) -> Result<Permutation, GroupError> {
        let start = self.pos;
        let mut cycles = Vec::new();
        self.skip_spaces();
        if !self.rest().starts_with('(') {
            return Err(self.error("expected '('"));
        }
        while self.eat("(") {
            let mut cycle = Vec::new();
            loop {
                self.skip_spaces();
                if self.eat(")") {
                    break;
                }
                let digits = self
                    .rest()
                    .chars()
                    .take_while(|c| c.is_ascii_digit())
                    .count();
                if digits == 0 {
                    return Err(self.error("expected a point or ')'"));
                }
                let point: usize = self.rest()[..digits]
                    .parse()
                    .map_err(|_| self.error("bad point"))?;
                if point == 0 {
                    return Err(self.error("points are numbered from 1"));
                }
                if cycle.contains(&point) {
                    return Err(self.error(format!("point {point} repeated in a cycle")));
                }
                cycle.push(point);
                self.pos += digits;
            }
            cycles.push(cycle);
            self.skip_spaces();
        }
        Permutation::from_cycles(&cycles).ok_or(GroupError::InvalidSpec {
            position: start,
            reason: "not a permutation".into(),
        })
    }
}

/// Materializes a spec as a Cayley table. Element 0 is always the identity.
pub fn build_group(spec: &GroupSpec, cap: usize) -> Result<FiniteGroup, GroupError> {
    let group = match spec {
        GroupSpec::Catalog(c) => catalog_group(c, cap)?,
        GroupSpec::Permutations(gens) => permutation_group(gens, cap)?,
        GroupSpec::Product(a, b) => {
            let a = build_group(a, cap)?;
            let b = build_group(b, cap)?;
            if a.order * b.order > cap {
                return Err(GroupError::ClosureExceedsCap { cap });
            }
            a.direct_product(&b)
        }
    };
    if group.order > cap {
        return Err(GroupError::ClosureExceedsCap { cap });
    }
    Ok(group)
}

fn catalog_group(c: &CatalogGroup, cap: usize) -> Result<FiniteGroup, GroupError> {
    let perm = |cycles: &[&[usize]]| {
        Permutation::from_cycles(&cycles.iter().map(|c| c.to_vec()).collect::<Vec<_>>()).unwrap()
    };
    match *c {
        CatalogGroup::Cyclic(n) => {
            check_cap(n, cap)?;
            Ok(cyclic(n))
        }
        CatalogGroup::Dihedral(n) => {
            check_cap(2 * n, cap)?;
            Ok(dihedral(n))
        }
        CatalogGroup::Quaternion8 => Ok(quaternion8()),
        CatalogGroup::Symmetric3 => {
            permutation_group(&[perm(&[&[1, 2]]), perm(&[&[1, 2, 3]])], cap)
        }
        CatalogGroup::Symmetric4 => {
            permutation_group(&[perm(&[&[1, 2]]), perm(&[&[1, 2, 3, 4]])], cap)
        }
        CatalogGroup::Alternating4 => {
            permutation_group(&[perm(&[&[1, 2], &[3, 4]]), perm(&[&[1, 2, 3]])], cap)
        }
    }
}

fn check_cap(order: usize, cap: usize) -> Result<(), GroupError> {
    if order > cap {
        Err(GroupError::ClosureExceedsCap { cap })
    } else {
        Ok(())
    }
}

fn power_label(base: &str, k: usize) -> String {
    match k {
        0 => "1".into(),
        1 => base.into(),
        _ => format!("{base}^{k}"),
    }
}

fn cyclic(n: usize) -> FiniteGroup {
    let labels = (0..n).map(|k| power_label("g", k)).collect();
    let table = (0..n)
        .flat_map(|a| (0..n).map(move |b| ((a + b) % n) as u32))
        .collect();
    FiniteGroup::from_table_unchecked(labels, table).unwrap()
}

/// Elements `r^k s^f` numbered `f·n + k`.
fn dihedral(n: usize) -> FiniteGroup {
    let labels = (0..2 * n)
        .map(|x| {
            let (f, k) = (x / n, x % n);
            match (f, k) {
                (0, _) => power_label("r", k),
                (_, 0) => "s".into(),
                _ => format!("{}s", power_label("r", k)),
            }
        })
        .collect();
    let mut table = Vec::with_capacity(4 * n * n);
    for x in 0..2 * n {
        for y in 0..2 * n {
            let (f, a) = (x / n, x % n);
            let (g, b) = (y / n, y % n);
            // r^a s^f · r^b s^g = r^(a ± b) s^(f+g)
            let k = if f == 0 { (a + b) % n } else { (a + n - b) % n };
            table.push((((f + g) % 2) * n + k) as u32);
        }
    }
    FiniteGroup::from_table_unchecked(labels, table).unwrap()
}

fn quaternion8() -> FiniteGroup {
    // Units ±1, ±i, ±j, ±k as (sign, unit) with unit ∈ {1, i, j, k}.
    const UNIT: [&str; 4] = ["1", "i", "j", "k"];
    // unit product table: (sign, unit)
    const PROD: [[(bool, usize); 4]; 4] = [
        [(false, 0), (false, 1), (false, 2), (false, 3)],
        [(false, 1), (true, 0), (false, 3), (true, 2)],
        [(false, 2), (true, 3), (true, 0), (false, 1)],
        [(false, 3), (false, 2), (true, 1), (true, 0)],
    ];
    let idx = |neg: bool, u: usize| 2 * u + neg as usize;
    let mut labels = vec![String::new(); 8];
    for u in 0..4 {
        labels[idx(false, u)] = UNIT[u].to_string();
        labels[idx(true, u)] = format!("-{}", UNIT[u]);
    }
    let mut table = Vec::with_capacity(64);
    for x in 0..8 {
        for y in 0..8 {
            let (sx, ux) = (x % 2 == 1, x / 2);
            let (sy, uy) = (y % 2 == 1, y / 2);
            let (s, u) = PROD[ux][uy];
            table.push(idx(s ^ sx ^ sy, u) as u32);
        }
    }
    FiniteGroup::from_table_unchecked(labels, table).unwrap()
}

/// Breadth-first closure of the generators, then sorted by image list so the
/// identity comes first.
fn permutation_group(gens: &[Permutation], cap: usize) -> Result<FiniteGroup, GroupError> {
    let n = gens.iter().map(Permutation::degree).max().unwrap_or(0);
    let gens: Vec<Vec<u8>> = gens.iter().map(|g| g.padded(n)).collect();
    let compose = |a: &[u8], b: &[u8]| -> Vec<u8> { a.iter().map(|&x| b[x as usize]).collect() };
    let identity: Vec<u8> = (0..n as u8).collect();
    let mut elements = vec![identity.clone()];
    let mut index: HashMap<Vec<u8>, usize> = HashMap::from([(identity, 0)]);
    let mut head = 0;
    while head < elements.len() {
        for g in &gens {
            let y = compose(&elements[head], g);
            if !index.contains_key(&y) {
                if elements.len() == cap {
                    return Err(GroupError::ClosureExceedsCap { cap });
                }
                index.insert(y.clone(), elements.len());
                elements.push(y);
            }
        }
        head += 1;
    }
    elements.sort();
    let index: HashMap<&[u8], usize> = elements
        .iter()
        .enumerate()
        .map(|(i, e)| (e.as_slice(), i))
        .collect();
    let order = elements.len();
    let mut table = Vec::with_capacity(order * order);
    for a in &elements {
        for b in &elements {
            table.push(index[compose(a, b).as_slice()] as u32);
        }
    }
    let labels = elements
        .iter()
        .map(|e| {
            let p = Permutation::from_images(e.iter().map(|&x| x as usize).collect()).unwrap();
            if p.degree() == 0 {
                "1".to_string()
            } else {
                p.to_string()
            }
        })
        .collect();
    FiniteGroup::from_table_unchecked(labels, table)
}
