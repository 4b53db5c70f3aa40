//! Finite root systems with exact doubled-integer coordinates.
//!
//! Coordinates are twice the usual ones, so the half-integral roots of `F4`
//! and `E8` are integer vectors. Cartan integers are unaffected by the
//! scaling. Simple systems follow Bourbaki's numbering:
//!
//! | family | ambient | simple roots (undoubled) |
//! |--------|---------|--------------------------|
//! | `A_n`  | `R^{n+1}` | `e_i - e_{i+1}` |
//! | `B_n`, `BC_n` | `R^n` | `e_i - e_{i+1}`, `e_n` |
//! | `C_n`  | `R^n` | `e_i - e_{i+1}`, `2e_n` |
//! | `D_n`  | `R^n` | `e_i - e_{i+1}`, `e_{n-1} + e_n` |
//! | `E_6,7,8` | `R^8` | Bourbaki `a_1 .. a_r` of `E8` |
//! | `F4`   | `R^4` | `e_2-e_3`, `e_3-e_4`, `e_4`, `(e_1-e_2-e_3-e_4)/2` |
//! | `G2`   | `R^3` | `e_1-e_2` (short), `-2e_1+e_2+e_3` (long) |

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{add, neg, IntVec};

pub type RootSet = FixedBitSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    BC,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RootSystemType {
    pub family: Family,
    pub rank: usize,
}

impl RootSystemType {
    pub fn new(family: Family, rank: usize) -> Self {
        RootSystemType { family, rank }
    }

    pub fn check_admissible(&self) -> Result<()> {
        use Family::*;
        let n = self.rank;
        let reason = match self.family {
            A | B | C | BC if n < 2 => Some("rank one systems are excluded by the mild assumption"),
            D if n < 4 => Some("D_n requires n >= 4"),
            E if !(6..=8).contains(&n) => Some("E_n requires n in {6, 7, 8}"),
            F if n != 4 => Some("F has rank 4 only"),
            G if n != 2 => Some("G has rank 2 only"),
            _ => None,
        };
        match reason {
            Some(r) => Err(Error::Inadmissible { name: self.to_string(), reason: r.into() }),
            None => Ok(()),
        }
    }

    pub fn is_reduced(&self) -> bool {
        self.family != Family::BC
    }

    pub fn is_simply_laced(&self) -> bool {
        matches!(self.family, Family::A | Family::D | Family::E)
    }
}

impl fmt::Display for RootSystemType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{}", self.family, self.rank)
    }
}

impl FromStr for RootSystemType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let split = s.find(|c: char| c.is_ascii_digit()).unwrap_or(s.len());
        let (fam, num) = s.split_at(split);
        let family = match fam.to_ascii_uppercase().as_str() {
            "A" => Family::A,
            "B" => Family::B,
            "C" => Family::C,
            "D" => Family::D,
            "E" => Family::E,
            "F" => Family::F,
            "G" => Family::G,
            "BC" => Family::BC,
            _ => {
                return Err(Error::Inadmissible { name: s.into(), reason: "unknown family".into() })
            }
        };
        let rank = num
            .parse()
            .map_err(|_| Error::Inadmissible { name: s.into(), reason: "missing or invalid rank".into() })?;
        Ok(RootSystemType { family, rank })
    }
}

/// `1` for `A/D/E`, `2` for `B/C/F`, `3` for `G2`, `4` for `BC`.
pub fn m_constant(ty: RootSystemType) -> Result<i64> {
    ty.check_admissible()?;
    Ok(match ty.family {
        Family::A | Family::D | Family::E => 1,
        Family::B | Family::C | Family::F => 2,
        Family::G => 3,
        Family::BC => 4,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthClass {
    Short,
    Long,
    Divisible,
}

impl LengthClass {
    pub fn symbol(&self) -> &'static str {
        match self {
            LengthClass::Short => "s",
            LengthClass::Long => "l",
            LengthClass::Divisible => "d",
        }
    }
}

pub fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `(b, a^vee) = 2(b,a)/(a,a)`
pub fn cartan_integer(b: &[i64], a: &[i64]) -> i64 {
    let num = 2 * dot(b, a);
    let den = dot(a, a);
    debug_assert_eq!(num % den, 0, "non-integral Cartan pairing");
    num / den
}

pub fn reflect_vec(a: &[i64], v: &[i64]) -> IntVec {
    let c = cartan_integer(v, a);
    v.iter().zip(a).map(|(x, y)| x - c * y).collect()
}

/// Lexicographic positivity: first nonzero coordinate is positive.
pub fn lex_positive(v: &[i64]) -> bool {
    v.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0)
}

fn unit(dim: usize, i: usize, c: i64) -> IntVec {
    let mut v = vec![0; dim];
    v[i] = c;
    v
}

fn diff(dim: usize, i: usize, j: usize) -> IntVec {
    let mut v = vec![0; dim];
    v[i] = 2;
    v[j] = -2;
    v
}

fn simple_roots(ty: RootSystemType) -> (usize, Vec<IntVec>) {
    use Family::*;
    let n = ty.rank;
    match ty.family {
        A => (n + 1, (0..n).map(|i| diff(n + 1, i, i + 1)).collect()),
        B | C | BC => {
            let mut s: Vec<IntVec> = (0..n - 1).map(|i| diff(n, i, i + 1)).collect();
            s.push(unit(n, n - 1, if ty.family == C { 4 } else { 2 }));
            (n, s)
        }
        D => {
            let mut s: Vec<IntVec> = (0..n - 1).map(|i| diff(n, i, i + 1)).collect();
            let mut last = vec![0; n];
            last[n - 2] = 2;
            last[n - 1] = 2;
            s.push(last);
            (n, s)
        }
        E => {
            let mut all = vec![vec![1, -1, -1, -1, -1, -1, -1, 1], vec![2, 2, 0, 0, 0, 0, 0, 0]];
            all.extend((0..6).map(|i| diff(8, i + 1, i)));
            all.truncate(n);
            (8, all)
        }
        F => (4, vec![diff(4, 1, 2), diff(4, 2, 3), unit(4, 3, 2), vec![1, -1, -1, -1]]),
        G => (3, vec![vec![2, -2, 0], vec![-4, 2, 2]]),
    }
}

/// An irreducible finite root system with precomputed arithmetic tables.
///
/// Roots are indexed `0..len()` in lexicographic order of their doubled
/// coordinates.
#[derive(Clone)]
pub struct RootSystem {
    ty: RootSystemType,
    dim: usize,
    roots: Vec<IntVec>,
    index: HashMap<IntVec, usize>,
    class: Vec<LengthClass>,
    simple: Vec<usize>,
    simple_coords: Vec<IntVec>,
    neg: Vec<usize>,
    sum: Vec<Vec<Option<usize>>>,
    refl: Vec<Vec<usize>>,
    cartan: Vec<Vec<i64>>,
}

impl fmt::Debug for RootSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RootSystem({}, {} roots)", self.ty, self.roots.len())
    }
}

pub fn build_root_system(ty: RootSystemType) -> Result<RootSystem> {
    ty.check_admissible()?;
    let (dim, simple) = simple_roots(ty);
    let r = simple.len();
    // orbit of the simple roots under the simple reflections, tracking
    // coefficients in the simple basis
    let mut coords: HashMap<IntVec, IntVec> = HashMap::new();
    let mut queue = VecDeque::new();
    for (i, s) in simple.iter().enumerate() {
        coords.insert(s.clone(), unit(r, i, 1));
        queue.push_back(s.clone());
    }
    while let Some(v) = queue.pop_front() {
        let cv = coords[&v].clone();
        for (j, a) in simple.iter().enumerate() {
            let c = cartan_integer(&v, a);
            if c == 0 {
                continue;
            }
            let w: IntVec = v.iter().zip(a).map(|(x, y)| x - c * y).collect();
            if !coords.contains_key(&w) {
                let mut cw = cv.clone();
                cw[j] -= c;
                coords.insert(w.clone(), cw);
                queue.push_back(w);
            }
        }
    }
    if ty.family == Family::BC {
        let short: Vec<(IntVec, IntVec)> = coords
            .iter()
            .filter(|(v, _)| dot(v, v) == 4)
            .map(|(v, c)| (v.iter().map(|x| 2 * x).collect(), c.iter().map(|x| 2 * x).collect()))
            .collect();
        coords.extend(short);
    }
    let mut roots: Vec<IntVec> = coords.keys().cloned().collect();
    roots.sort();
    let index: HashMap<IntVec, usize> = roots.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
    let norms: BTreeSet<i64> = roots.iter().map(|v| dot(v, v)).collect();
    let norms: Vec<i64> = norms.into_iter().collect();
    let class = roots
        .iter()
        .map(|v| {
            let pos = norms.iter().position(|&x| x == dot(v, v)).unwrap();
            match (norms.len(), pos) {
                (1, _) => LengthClass::Long,
                (_, 0) => LengthClass::Short,
                (_, 1) => LengthClass::Long,
                _ => LengthClass::Divisible,
            }
        })
        .collect();
    let n = roots.len();
    let negt = roots.iter().map(|v| index[&neg(v)]).collect();
    let mut sum = vec![vec![None; n]; n];
    let mut refl = vec![vec![0; n]; n];
    let mut cartan = vec![vec![0; n]; n];
    for a in 0..n {
        for b in 0..n {
            sum[a][b] = index.get(&add(&roots[a], &roots[b])).copied();
            refl[a][b] = index[&reflect_vec(&roots[a], &roots[b])];
            cartan[b][a] = cartan_integer(&roots[b], &roots[a]);
        }
    }
    let simple_idx = simple.iter().map(|s| index[s]).collect();
    let simple_coords = roots.iter().map(|v| coords[v].clone()).collect();
    Ok(RootSystem {
        ty,
        dim,
        roots,
        index,
        class,
        simple: simple_idx,
        simple_coords,
        neg: negt,
        sum,
        refl,
        cartan,
    })
}

impl RootSystem {
    pub fn root_type(&self) -> RootSystemType {
        self.ty
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn roots(&self) -> &[IntVec] {
        &self.roots
    }

    pub fn root(&self, i: usize) -> &IntVec {
        &self.roots[i]
    }

    pub fn index_of(&self, v: &[i64]) -> Option<usize> {
        self.index.get(v).copied()
    }

    pub fn try_index(&self, v: &[i64]) -> Result<usize> {
        self.index_of(v).ok_or_else(|| Error::NotARoot(v.to_vec()))
    }

    pub fn class(&self, i: usize) -> LengthClass {
        self.class[i]
    }

    pub fn simple(&self) -> &[usize] {
        &self.simple
    }

    /// Coefficients of root `i` in the fixed simple system.
    pub fn simple_coords(&self, i: usize) -> &[i64] {
        &self.simple_coords[i]
    }

    pub fn neg(&self, i: usize) -> usize {
        self.neg[i]
    }

    /// Index of `roots[a] + roots[b]` when that is a root.
    pub fn sum(&self, a: usize, b: usize) -> Option<usize> {
        self.sum[a][b]
    }

    /// Index of `s_a(b)`.
    pub fn refl(&self, a: usize, b: usize) -> usize {
        self.refl[a][b]
    }

    /// `(roots[b], roots[a]^vee)`
    pub fn cartan(&self, b: usize, a: usize) -> i64 {
        self.cartan[b][a]
    }

    pub fn is_reduced(&self) -> bool {
        self.ty.is_reduced()
    }

    pub fn all(&self) -> RootSet {
        let mut s = RootSet::with_capacity(self.len());
        s.insert_range(..);
        s
    }

    pub fn empty_set(&self) -> RootSet {
        RootSet::with_capacity(self.len())
    }

    pub fn class_set(&self, c: LengthClass) -> RootSet {
        let mut s = self.empty_set();
        for i in 0..self.len() {
            if self.class[i] == c {
                s.insert(i);
            }
        }
        s
    }

    pub fn set_from_roots<'a>(&self, vs: impl IntoIterator<Item = &'a IntVec>) -> Result<RootSet> {
        let mut s = self.empty_set();
        for v in vs {
            s.insert(self.try_index(v)?);
        }
        Ok(s)
    }

    pub fn roots_of(&self, s: &RootSet) -> Vec<IntVec> {
        s.ones().map(|i| self.roots[i].clone()).collect()
    }

    pub fn is_symmetric(&self, s: &RootSet) -> bool {
        s.ones().all(|i| s.contains(self.neg[i]))
    }

    /// `s_alpha(beta)` on coordinate vectors.
    pub fn reflect(&self, alpha: &[i64], beta: &[i64]) -> Result<IntVec> {
        let a = self.try_index(alpha)?;
        let b = self.try_index(beta)?;
        Ok(self.roots[self.refl[a][b]].clone())
    }

    /// The highest root (of the non-divisible part) and its simple-root
    /// coefficients.
    pub fn highest_root_marks(&self) -> Result<(IntVec, Vec<i64>)> {
        if !self.is_reduced() {
            return Err(Error::Unsupported("highest root marks are defined for reduced systems".into()));
        }
        let best = (0..self.len())
            .max_by_key(|&i| self.simple_coords[i].iter().sum::<i64>())
            .expect("nonempty");
        Ok((self.roots[best].clone(), self.simple_coords[best].clone()))
    }

    /// Image of a root set under the reflection in root `a`.
    pub fn reflect_set(&self, a: usize, s: &RootSet) -> RootSet {
        let mut out = self.empty_set();
        for b in s.ones() {
            out.insert(self.refl[a][b]);
        }
        out
    }

    /// All images of `s` under the Weyl group, sorted.
    pub fn weyl_orbit(&self, s: &RootSet) -> Vec<RootSet> {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::new();
        seen.insert(s.clone());
        queue.push_back(s.clone());
        while let Some(t) = queue.pop_front() {
            for &a in &self.simple {
                let u = self.reflect_set(a, &t);
                if seen.insert(u.clone()) {
                    queue.push_back(u);
                }
            }
        }
        seen.into_iter().collect()
    }

    fn closure_unchecked(&self, s: &RootSet) -> RootSet {
        let mut set = s.clone();
        let mut members: Vec<usize> = set.ones().collect();
        let mut i = 0;
        // members grows as new roots appear; every pair is visited once
        while i < members.len() {
            let a = members[i];
            for j in 0..=i {
                let b = members[j];
                let mut new = [Some(self.neg[a]), self.sum[a][b], Some(self.refl[a][b]), Some(self.refl[b][a])];
                if a == b {
                    new[1] = self.sum[a][a];
                }
                for c in new.into_iter().flatten() {
                    if !set.contains(c) {
                        set.insert(c);
                        members.push(c);
                    }
                }
            }
            i += 1;
        }
        set
    }

    /// Least superset of `s` closed under root sums and reflections.
    pub fn closed_closure(&self, s: &RootSet) -> Result<RootSet> {
        if !self.is_symmetric(s) {
            return Err(Error::NotSymmetric);
        }
        Ok(self.closure_unchecked(s))
    }

    /// Subroot system generated by `gens` under reflections only.
    pub fn reflection_closure(&self, gens: &RootSet) -> RootSet {
        let mut set = gens.clone();
        let mut members: Vec<usize> = set.ones().collect();
        let mut i = 0;
        while i < members.len() {
            let a = members[i];
            for j in 0..members.len() {
                let b = members[j];
                for c in [self.refl[a][b], self.refl[b][a]] {
                    if !set.contains(c) {
                        set.insert(c);
                        members.push(c);
                    }
                }
            }
            i += 1;
        }
        set
    }

    pub fn is_subroot(&self, s: &RootSet) -> bool {
        s.count_ones(..) > 0 && s.ones().all(|a| s.ones().all(|b| s.contains(self.refl[a][b])))
    }

    pub fn is_sum_closed(&self, s: &RootSet) -> bool {
        s.ones().all(|a| s.ones().all(|b| self.sum[a][b].is_none_or(|c| s.contains(c))))
    }

    pub fn is_closed(&self, s: &RootSet) -> bool {
        self.is_subroot(s) && self.is_sum_closed(s)
    }

    pub fn classify_subset(&self, s: &RootSet) -> SubsetReport {
        let is_subroot = self.is_subroot(s);
        let is_closed = is_subroot && self.is_sum_closed(s);
        let all = self.all();
        let is_semi_closed = is_subroot && !is_closed && {
            s.ones().all(|a| {
                s.ones().all(|b| match self.sum[a][b] {
                    Some(c) if !s.contains(c) => matches!(
                        (self.class[a], self.class[b], self.class[c]),
                        (LengthClass::Short, LengthClass::Short, LengthClass::Long)
                            | (LengthClass::Short, LengthClass::Short, LengthClass::Divisible)
                            | (LengthClass::Long, LengthClass::Long, LengthClass::Divisible)
                    ),
                    _ => true,
                })
            })
        };
        let is_maximal_closed = is_closed && *s != all && self.is_maximal_closed_unchecked(s);
        let is_maximal_semi_closed = is_semi_closed && self.closure_unchecked(s) == all;
        SubsetReport { is_subroot, is_closed, is_semi_closed, is_maximal_closed, is_maximal_semi_closed }
    }

    fn is_maximal_closed_unchecked(&self, s: &RootSet) -> bool {
        let all = self.all();
        (0..self.len()).filter(|&c| !s.contains(c)).all(|c| {
            let mut t = s.clone();
            t.insert(c);
            t.insert(self.neg[c]);
            self.closure_unchecked(&t) == all
        })
    }

    /// Ordered pairs of roots of the source class whose sum lies in `target`:
    /// short pairs summing to a long root for `Long`, long pairs summing to a
    /// divisible root for `Divisible`. Empty for `Short`.
    pub fn gamma_pairs(&self, target: LengthClass) -> Vec<(usize, usize)> {
        let source = match target {
            LengthClass::Long => LengthClass::Short,
            LengthClass::Divisible => LengthClass::Long,
            LengthClass::Short => return vec![],
        };
        let mut out = vec![];
        for a in 0..self.len() {
            for b in 0..self.len() {
                if self.class[a] == source && self.class[b] == source {
                    if let Some(c) = self.sum[a][b] {
                        if self.class[c] == target {
                            out.push((a, b));
                        }
                    }
                }
            }
        }
        out
    }

    /// Length-class triples `(x, y, z)` with `x <= y` such that a root of
    /// class `x` plus a root of class `y` is a root of class `z`.
    pub fn sum_profile(&self) -> BTreeSet<(LengthClass, LengthClass, LengthClass)> {
        let mut out = BTreeSet::new();
        for a in 0..self.len() {
            for b in 0..self.len() {
                if let Some(c) = self.sum[a][b] {
                    let (x, y) = (self.class[a].min(self.class[b]), self.class[a].max(self.class[b]));
                    out.insert((x, y, self.class[c]));
                }
            }
        }
        out
    }

    /// Borel-de Siebenthal: maximal closed subroot systems up to Weyl
    /// conjugacy.
    pub fn borel_de_siebenthal(&self) -> Vec<RootSet> {
        if !self.is_reduced() {
            let b = build_root_system(RootSystemType::new(Family::B, self.ty.rank)).expect("B_n admissible");
            let div = self.class_set(LengthClass::Divisible);
            return b
                .borel_de_siebenthal()
                .iter()
                .map(|s| {
                    let mut t = self.set_from_roots(&b.roots_of(s)).expect("B_n roots lie in BC_n");
                    t.union_with(&div);
                    t
                })
                .collect();
        }
        let (hi, marks) = self.highest_root_marks().expect("reduced");
        let lowest = self.index[&neg(&hi)];
        let mut reps: Vec<RootSet> = vec![];
        for (i, &a) in marks.iter().enumerate() {
            let mut gens = self.empty_set();
            for (j, &s) in self.simple.iter().enumerate() {
                if j != i {
                    gens.insert(s);
                }
            }
            if a != 1 {
                if !crate::lattice::is_prime(a) {
                    continue;
                }
                gens.insert(lowest);
            }
            if gens.count_ones(..) == 0 {
                continue;
            }
            let sub = self.reflection_closure(&gens);
            if !reps.iter().any(|r| self.weyl_orbit(r).contains(&sub)) {
                reps.push(sub);
            }
        }
        reps
    }

    /// Every conjugate of every Borel-de Siebenthal representative.
    pub fn borel_de_siebenthal_expanded(&self) -> Vec<RootSet> {
        let mut out = BTreeSet::new();
        for r in self.borel_de_siebenthal() {
            out.extend(self.weyl_orbit(&r));
        }
        out.into_iter().collect()
    }

    /// Connected components of `s` under non-orthogonality.
    pub fn components(&self, s: &RootSet) -> Vec<RootSet> {
        let mut seen = self.empty_set();
        let mut out = vec![];
        for start in s.ones() {
            if seen.contains(start) {
                continue;
            }
            let mut comp = self.empty_set();
            let mut stack = vec![start];
            seen.insert(start);
            while let Some(a) = stack.pop() {
                comp.insert(a);
                for b in s.ones() {
                    if !seen.contains(b) && self.cartan[b][a] != 0 {
                        seen.insert(b);
                        stack.push(b);
                    }
                }
            }
            out.push(comp);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetReport {
    pub is_subroot: bool,
    pub is_closed: bool,
    pub is_semi_closed: bool,
    pub is_maximal_closed: bool,
    pub is_maximal_semi_closed: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use LengthClass::*;

    fn rs(f: Family, n: usize) -> RootSystem {
        build_root_system(RootSystemType::new(f, n)).unwrap()
    }

    // Explicit textbook root lists (undoubled, then doubled) as an oracle for
    // the orbit construction.
    fn explicit(f: Family, n: usize) -> BTreeSet<IntVec> {
        let mut out = BTreeSet::new();
        let pm = |i: usize, j: usize, si: i64, sj: i64| {
            let mut v = vec![0; n];
            v[i] = 2 * si;
            v[j] = 2 * sj;
            v
        };
        match f {
            Family::A => {
                for i in 0..=n {
                    for j in 0..=n {
                        if i != j {
                            out.insert(diff(n + 1, i, j));
                        }
                    }
                }
            }
            _ => {
                for i in 0..n {
                    for j in i + 1..n {
                        for si in [-1, 1] {
                            for sj in [-1, 1] {
                                out.insert(pm(i, j, si, sj));
                            }
                        }
                    }
                    for s in [-1, 1] {
                        match f {
                            Family::B => {
                                out.insert(unit(n, i, 2 * s));
                            }
                            Family::C => {
                                out.insert(unit(n, i, 4 * s));
                            }
                            Family::BC => {
                                out.insert(unit(n, i, 2 * s));
                                out.insert(unit(n, i, 4 * s));
                            }
                            _ => {}
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn classical_constructions_match_explicit_lists() {
        for n in 2..=5 {
            for f in [Family::A, Family::B, Family::C, Family::BC] {
                let r = rs(f, n);
                let got: BTreeSet<IntVec> = r.roots().iter().cloned().collect();
                assert_eq!(got, explicit(f, n), "{f:?}{n}");
            }
        }
        for n in 4..=6 {
            let r = rs(Family::D, n);
            let got: BTreeSet<IntVec> = r.roots().iter().cloned().collect();
            assert_eq!(got, explicit(Family::D, n));
        }
    }

    #[test]
    fn root_counts() {
        let cases = [
            (Family::A, 2, 6),
            (Family::B, 3, 18),
            (Family::C, 3, 18),
            (Family::D, 4, 24),
            (Family::E, 6, 72),
            (Family::E, 7, 126),
            (Family::E, 8, 240),
            (Family::F, 4, 48),
            (Family::G, 2, 12),
            (Family::BC, 2, 12),
            (Family::BC, 3, 24),
        ];
        for (f, n, c) in cases {
            assert_eq!(rs(f, n).len(), c, "{f:?}{n}");
        }
    }

    #[test]
    fn length_classes() {
        let a2 = rs(Family::A, 2);
        assert!((0..6).all(|i| a2.class(i) == Long));
        let bc2 = rs(Family::BC, 2);
        let count = |c| bc2.class_set(c).count_ones(..);
        assert_eq!((count(Short), count(Long), count(Divisible)), (4, 4, 4));
        for v in bc2.roots_of(&bc2.class_set(Divisible)) {
            assert_eq!(v.iter().filter(|&&x| x != 0).count(), 1);
            assert_eq!(dot(&v, &v), 16);
        }
        let g2 = rs(Family::G, 2);
        assert_eq!(g2.class_set(Short).count_ones(..), 6);
        assert_eq!(g2.class_set(Long).count_ones(..), 6);
        for (f, n) in [(Family::B, 3), (Family::C, 3), (Family::F, 4), (Family::E, 6), (Family::D, 5)] {
            assert_eq!(rs(f, n).class_set(Divisible).count_ones(..), 0);
        }
    }

    #[test]
    fn admissibility() {
        for (f, n) in [(Family::A, 1), (Family::BC, 1), (Family::B, 1), (Family::D, 3), (Family::E, 5), (Family::F, 3), (Family::G, 3)] {
            let err = build_root_system(RootSystemType::new(f, n)).unwrap_err();
            assert!(matches!(err, Error::Inadmissible { .. }));
        }
        let e = build_root_system(RootSystemType::new(Family::A, 1)).unwrap_err();
        assert!(e.to_string().contains("mild assumption"));
        assert_eq!("BC3".parse::<RootSystemType>().unwrap(), RootSystemType::new(Family::BC, 3));
        assert_eq!("g2".parse::<RootSystemType>().unwrap(), RootSystemType::new(Family::G, 2));
        assert_eq!(serde_json::to_string(&RootSystemType::new(Family::G, 2)).unwrap(), r#"{"family":"G","rank":2}"#);
    }

    #[test]
    fn m_constants() {
        assert_eq!(m_constant(RootSystemType::new(Family::G, 2)).unwrap(), 3);
        assert_eq!(m_constant(RootSystemType::new(Family::BC, 3)).unwrap(), 4);
        assert_eq!(m_constant(RootSystemType::new(Family::A, 4)).unwrap(), 1);
        assert_eq!(m_constant(RootSystemType::new(Family::F, 4)).unwrap(), 2);
        assert_eq!(m_constant(RootSystemType::new(Family::E, 7)).unwrap(), 1);
    }

    #[test]
    fn reflections() {
        for (f, n) in [(Family::B, 3), (Family::C, 3), (Family::BC, 3)] {
            let r = rs(f, n);
            let e12 = diff(n, 0, 1);
            // e_1 is a root of B and BC; in C use 2e_1 -> 2e_2
            let (x, y) = if f == Family::C { (unit(n, 0, 4), unit(n, 1, 4)) } else { (unit(n, 0, 2), unit(n, 1, 2)) };
            assert_eq!(r.reflect(&e12, &x).unwrap(), y);
        }
        let g2 = rs(Family::G, 2);
        let (a1, a2) = (g2.root(g2.simple()[0]).clone(), g2.root(g2.simple()[1]).clone());
        let expect: IntVec = a2.iter().zip(&a1).map(|(b, a)| b + 3 * a).collect();
        assert_eq!(g2.reflect(&a1, &a2).unwrap(), expect);
        assert_eq!(cartan_integer(&a2, &a1), -3);
        assert_eq!(cartan_integer(&a1, &a2), -1);
        assert!(g2.reflect(&a1, &[1, 1, 1]).is_err());
        for r in [rs(Family::F, 4), rs(Family::G, 2), rs(Family::BC, 3), rs(Family::E, 6)] {
            for a in 0..r.len() {
                assert_eq!(r.refl(a, a), r.neg(a));
                for b in 0..r.len() {
                    assert_eq!(r.refl(a, r.refl(a, b)), b);
                }
            }
        }
    }

    #[test]
    fn marks() {
        let cases: [(Family, usize, Vec<i64>); 9] = [
            (Family::A, 4, vec![1, 1, 1, 1]),
            (Family::B, 3, vec![1, 2, 2]),
            (Family::C, 3, vec![2, 2, 1]),
            (Family::D, 5, vec![1, 2, 2, 1, 1]),
            (Family::G, 2, vec![3, 2]),
            (Family::F, 4, vec![2, 3, 4, 2]),
            (Family::E, 6, vec![1, 2, 2, 3, 2, 1]),
            (Family::E, 7, vec![2, 2, 3, 4, 3, 2, 1]),
            (Family::E, 8, vec![2, 3, 4, 6, 5, 4, 3, 2]),
        ];
        for (f, n, m) in cases {
            let r = rs(f, n);
            let (hi, marks) = r.highest_root_marks().unwrap();
            assert_eq!(marks, m, "{f:?}{n}");
            // the coefficients reproduce the root
            let mut v = vec![0; r.dim()];
            for (c, &s) in marks.iter().zip(r.simple()) {
                for (x, y) in v.iter_mut().zip(r.root(s)) {
                    *x += c * y;
                }
            }
            assert_eq!(v, hi);
        }
        assert_eq!(rs(Family::C, 3).highest_root_marks().unwrap().0, vec![4, 0, 0]);
        assert!(rs(Family::BC, 2).highest_root_marks().is_err());
    }

    #[test]
    fn gamma() {
        let c2 = rs(Family::C, 2);
        let g = c2.gamma_pairs(Long);
        assert_eq!(g.len(), 8);
        let a = c2.index_of(&[2, -2]).unwrap();
        let b = c2.index_of(&[2, 2]).unwrap();
        assert!(g.contains(&(a, b)));
        assert!(rs(Family::A, 2).gamma_pairs(Long).is_empty());
        assert!(!rs(Family::BC, 2).gamma_pairs(Divisible).is_empty());
    }

    #[test]
    fn closure_examples() {
        let c2 = rs(Family::C, 2);
        let s = c2.set_from_roots(&[vec![2, -2], vec![-2, 2], vec![2, 2], vec![-2, -2]]).unwrap();
        assert_eq!(c2.closed_closure(&s).unwrap(), c2.all());
        let one = c2.set_from_roots(&[vec![2, 2]]).unwrap();
        assert!(matches!(c2.closed_closure(&one), Err(Error::NotSymmetric)));

        let b3 = rs(Family::B, 3);
        let short = b3.class_set(Short);
        let cl = b3.closed_closure(&short).unwrap();
        let mut expect = short.clone();
        for a in short.ones() {
            for b in short.ones() {
                if let Some(c) = b3.sum(a, b) {
                    if b3.class(c) == Long {
                        expect.insert(c);
                    }
                }
            }
        }
        assert_eq!(cl, expect);
        assert_eq!(b3.closed_closure(&cl).unwrap(), cl);
    }

    #[test]
    fn classify_subset_examples() {
        let c3 = rs(Family::C, 3);
        let r = c3.classify_subset(&c3.class_set(Short));
        assert!(r.is_subroot && !r.is_closed && r.is_semi_closed && r.is_maximal_semi_closed);
        let mut single = c3.empty_set();
        single.insert(0);
        assert!(!c3.classify_subset(&single).is_subroot);
        let all = c3.classify_subset(&c3.all());
        assert!(all.is_closed && !all.is_maximal_closed);
        // the long roots of C3 form a closed but non-maximal A1^3
        let long = c3.classify_subset(&c3.class_set(Long));
        assert!(long.is_closed && !long.is_maximal_closed);
    }

    #[test]
    fn sum_profiles() {
        let p = |v: &[(LengthClass, LengthClass, LengthClass)]| v.iter().copied().collect::<BTreeSet<_>>();
        assert_eq!(rs(Family::B, 3).sum_profile(), p(&[(Short, Short, Long), (Short, Long, Short), (Long, Long, Long)]));
        assert_eq!(rs(Family::B, 2).sum_profile(), p(&[(Short, Short, Long), (Short, Long, Short)]));
        assert_eq!(rs(Family::C, 3).sum_profile(), p(&[(Short, Short, Long), (Short, Long, Short), (Short, Short, Short)]));
        assert_eq!(rs(Family::C, 2).sum_profile(), p(&[(Short, Short, Long), (Short, Long, Short)]));
        let fg = p(&[(Short, Short, Long), (Short, Long, Short), (Short, Short, Short), (Long, Long, Long)]);
        assert_eq!(rs(Family::F, 4).sum_profile(), fg);
        assert_eq!(rs(Family::G, 2).sum_profile(), fg);
        assert_eq!(
            rs(Family::BC, 3).sum_profile(),
            p(&[
                (Short, Short, Long),
                (Short, Long, Short),
                (Long, Long, Long),
                (Long, Long, Divisible),
                (Long, Divisible, Long),
                (Short, Divisible, Short),
                (Short, Short, Divisible),
            ])
        );
    }

    #[test]
    fn bds_examples() {
        let a2 = rs(Family::A, 2);
        let reps = a2.borel_de_siebenthal();
        assert_eq!(reps.len(), 1);
        assert_eq!(reps[0].count_ones(..), 2);
        assert_eq!(a2.borel_de_siebenthal_expanded().len(), 3);

        let g2 = rs(Family::G, 2);
        let reps = g2.borel_de_siebenthal();
        assert_eq!(reps.len(), 2);
        let long = g2.class_set(Long);
        assert!(reps.contains(&long));
        let other = reps.iter().find(|r| **r != long).unwrap();
        assert_eq!(other.count_ones(..), 4);
        assert_eq!(g2.components(other).len(), 2);

        let bc2 = rs(Family::BC, 2);
        let div = bc2.class_set(Divisible);
        for s in bc2.borel_de_siebenthal_expanded() {
            assert!(div.is_subset(&s));
            assert!(bc2.classify_subset(&s).is_maximal_closed);
        }
    }

    #[test]
    fn bds_members_are_maximal() {
        let cases = [
            (Family::A, 2),
            (Family::A, 3),
            (Family::A, 4),
            (Family::B, 2),
            (Family::B, 3),
            (Family::B, 4),
            (Family::C, 3),
            (Family::C, 4),
            (Family::D, 4),
            (Family::BC, 2),
            (Family::BC, 3),
            (Family::G, 2),
            (Family::F, 4),
        ];
        for (f, n) in cases {
            let r = rs(f, n);
            for s in r.borel_de_siebenthal() {
                assert!(r.classify_subset(&s).is_maximal_closed, "{f:?}{n}");
            }
        }
    }
}
