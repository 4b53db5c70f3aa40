//! Full-rank subgroups of `Z^k` in Hermite normal form, and finite unions of
//! their cosets.
//!
//! Every translation set attached to a root lives here as a [`CosetSet`]. All
//! arithmetic is exact; internal elimination runs in `i128`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type IntVec = Vec<i64>;

fn egcd(a: i128, b: i128) -> (i128, i128, i128) {
    // returns (g, s, t) with s*a + t*b = g >= 0
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i128, 0i128);
    let (mut old_t, mut t) = (0i128, 1i128);
    while r != 0 {
        let q = old_r.div_euclid(r);
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

fn identity(n: usize) -> Vec<Vec<i128>> {
    (0..n)
        .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
        .collect()
}

/// Row echelon (Hermite) reduction of an `m x ncols` matrix.
///
/// Returns `(H, U, rank)` with `U * A = H`, `U` unimodular, the first `rank`
/// rows of `H` in Hermite form (positive pivots, entries above each pivot in
/// `[0, pivot)`), and the remaining rows zero.
fn echelon(mut a: Vec<Vec<i128>>, ncols: usize) -> (Vec<Vec<i128>>, Vec<Vec<i128>>, usize) {
    let m = a.len();
    let mut u = identity(m);
    let mut row = 0;
    for col in 0..ncols {
        if row == m {
            break;
        }
        for i in row + 1..m {
            if a[i][col] == 0 {
                continue;
            }
            let (x, y) = (a[row][col], a[i][col]);
            let (g, s, t) = egcd(x, y);
            let (xg, yg) = (x / g, y / g);
            for mat in [&mut a, &mut u] {
                let (top, bottom) = mat.split_at_mut(i);
                let (r, o) = (&mut top[row], &mut bottom[0]);
                for c in 0..r.len() {
                    let (rv, ov) = (r[c], o[c]);
                    r[c] = s * rv + t * ov;
                    o[c] = -yg * rv + xg * ov;
                }
            }
        }
        if a[row][col] == 0 {
            continue;
        }
        if a[row][col] < 0 {
            a[row].iter_mut().for_each(|v| *v = -*v);
            u[row].iter_mut().for_each(|v| *v = -*v);
        }
        let p = a[row][col];
        for r in 0..row {
            let f = a[r][col].div_euclid(p);
            if f != 0 {
                for c in 0..ncols {
                    a[r][c] -= f * a[row][c];
                }
                for c in 0..m {
                    u[r][c] -= f * u[row][c];
                }
            }
        }
        row += 1;
    }
    (a, u, row)
}

fn narrow(m: Vec<Vec<i128>>) -> Result<Vec<Vec<i64>>> {
    m.into_iter()
        .map(|r| {
            r.into_iter()
                .map(|v| {
                    i64::try_from(v).map_err(|_| Error::Dimension(format!("entry {v} overflows i64")))
                })
                .collect()
        })
        .collect()
}

fn widen(m: &[Vec<i64>]) -> Vec<Vec<i128>> {
    m.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect()
}

/// Hermite normal form of a nonsingular square matrix, with the unimodular
/// transform `U` such that `U * A = H`.
pub fn hermite_normal_form(a: &[Vec<i64>]) -> Result<(Vec<Vec<i64>>, Vec<Vec<i64>>)> {
    let k = a.len();
    if a.iter().any(|r| r.len() != k) {
        return Err(Error::Dimension("matrix is not square".into()));
    }
    let (h, u, rank) = echelon(widen(a), k);
    if rank < k {
        return Err(Error::Singular { rank, dim: k });
    }
    Ok((narrow(h)?, narrow(u)?))
}

pub fn is_prime(q: i64) -> bool {
    if q < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= q {
        if q % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn primes_up_to(n: i64) -> Vec<i64> {
    (2..=n).filter(|&q| is_prime(q)).collect()
}

/// All Hermite normal forms of determinant `q` in dimension `k`, i.e. the
/// maximal subgroups of `Z^k` of index `q`, sorted lexicographically.
pub fn enumerate_prime_maximal_subgroups(k: usize, q: i64) -> Result<Vec<LatticeSubgroup>> {
    if !is_prime(q) {
        return Err(Error::NotPrime(q));
    }
    if k == 0 {
        return Err(Error::Dimension("ambient rank must be at least 1".into()));
    }
    let mut out = Vec::new();
    for ell in 0..k {
        // free entries sit above the q-pivot, in column ell
        let free = ell;
        let total = (q as u64).pow(free as u32);
        for code in 0..total {
            let mut basis = vec![vec![0i64; k]; k];
            for (i, row) in basis.iter_mut().enumerate() {
                row[i] = 1;
            }
            basis[ell][ell] = q;
            let mut c = code;
            for i in (0..free).rev() {
                basis[i][ell] = (c % q as u64) as i64;
                c /= q as u64;
            }
            out.push(LatticeSubgroup { k, basis });
        }
    }
    out.sort();
    Ok(out)
}

/// A full-rank subgroup of `Z^k`, stored by its Hermite normal form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "Vec<Vec<i64>>", try_from = "Vec<Vec<i64>>")]
pub struct LatticeSubgroup {
    k: usize,
    basis: Vec<Vec<i64>>,
}

impl fmt::Debug for LatticeSubgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{:?}", self.basis)
    }
}

impl From<LatticeSubgroup> for Vec<Vec<i64>> {
    fn from(l: LatticeSubgroup) -> Self {
        l.basis
    }
}

impl TryFrom<Vec<Vec<i64>>> for LatticeSubgroup {
    type Error = Error;
    fn try_from(m: Vec<Vec<i64>>) -> Result<Self> {
        LatticeSubgroup::from_basis(&m)
    }
}

impl LatticeSubgroup {
    pub fn full(k: usize) -> Self {
        Self::scaled(k, 1)
    }

    /// `c * Z^k` for `c >= 1`.
    pub fn scaled(k: usize, c: i64) -> Self {
        assert!(c >= 1, "scale must be positive");
        let basis = (0..k)
            .map(|i| (0..k).map(|j| if i == j { c } else { 0 }).collect())
            .collect();
        LatticeSubgroup { k, basis }
    }

    /// Subgroup spanned by the rows of a nonsingular square matrix.
    pub fn from_basis(m: &[Vec<i64>]) -> Result<Self> {
        let k = m.len();
        Self::from_generators(k, m)
    }

    /// Subgroup generated by arbitrary vectors; must have full rank.
    pub fn from_generators(k: usize, gens: &[Vec<i64>]) -> Result<Self> {
        Self::from_generators_wide(k, widen(gens))
    }

    fn from_generators_wide(k: usize, gens: Vec<Vec<i128>>) -> Result<Self> {
        if gens.iter().any(|g| g.len() != k) {
            return Err(Error::Dimension(format!("generators must have length {k}")));
        }
        if k == 0 {
            return Ok(Self::full(0));
        }
        let (h, _, rank) = echelon(gens, k);
        if rank < k {
            return Err(Error::Singular { rank, dim: k });
        }
        let basis = narrow(h.into_iter().take(k).collect())?;
        Ok(LatticeSubgroup { k, basis })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn basis(&self) -> &[Vec<i64>] {
        &self.basis
    }

    /// Index in `Z^k`.
    pub fn det(&self) -> i64 {
        (0..self.k).map(|i| self.basis[i][i]).product()
    }

    pub fn is_full(&self) -> bool {
        self.det() == 1
    }

    /// Canonical residue: the unique representative in the box
    /// `0 <= r_i < H_ii`.
    pub fn reduce(&self, v: &[i64]) -> IntVec {
        debug_assert_eq!(v.len(), self.k);
        let mut r = v.to_vec();
        for i in 0..self.k {
            let p = self.basis[i][i];
            let f = r[i].div_euclid(p);
            if f != 0 {
                for (c, b) in r.iter_mut().zip(&self.basis[i]) {
                    *c -= f * b;
                }
            }
        }
        r
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    /// `other ⊆ self`
    pub fn contains_subgroup(&self, other: &LatticeSubgroup) -> bool {
        other.basis.iter().all(|b| self.contains(b))
    }

    pub fn sum(&self, other: &LatticeSubgroup) -> LatticeSubgroup {
        assert_eq!(self.k, other.k);
        let gens: Vec<_> = self.basis.iter().chain(&other.basis).cloned().collect();
        Self::from_generators(self.k, &gens).expect("sum of full-rank lattices is full rank")
    }

    pub fn intersect(&self, other: &LatticeSubgroup) -> LatticeSubgroup {
        assert_eq!(self.k, other.k);
        let k = self.k;
        if k == 0 {
            return self.clone();
        }
        let stacked: Vec<Vec<i128>> = widen(&self.basis).into_iter().chain(widen(&other.basis)).collect();
        let (_, u, rank) = echelon(stacked, k);
        debug_assert_eq!(rank, k);
        let b1 = widen(&self.basis);
        let gens: Vec<Vec<i128>> = u[k..]
            .iter()
            .map(|row| {
                (0..k)
                    .map(|c| (0..k).map(|i| row[i] * b1[i][c]).sum())
                    .collect()
            })
            .collect();
        Self::from_generators_wide(k, gens).expect("intersection of full-rank lattices is full rank")
    }

    /// `|c| * L`; `c` must be nonzero.
    pub fn scale(&self, c: i64) -> LatticeSubgroup {
        assert!(c != 0, "cannot scale a lattice by zero");
        let gens: Vec<_> = self.basis.iter().map(|r| r.iter().map(|v| v * c).collect()).collect();
        Self::from_generators(self.k, &gens).expect("nonzero multiple is full rank")
    }

    /// The subgroup whose basis rows are `m * B`, for `m` an HNF matrix
    /// describing a sublattice in the coordinates of this lattice's basis.
    pub fn sublattice(&self, m: &LatticeSubgroup) -> LatticeSubgroup {
        assert_eq!(self.k, m.k);
        let k = self.k;
        let gens: Vec<Vec<i64>> = m
            .basis
            .iter()
            .map(|row| (0..k).map(|c| (0..k).map(|i| row[i] * self.basis[i][c]).sum()).collect())
            .collect();
        Self::from_generators(k, &gens).expect("product of nonsingular matrices is nonsingular")
    }

    /// Maximal subgroups of prime index `q` contained in this subgroup.
    pub fn maximal_subgroups(&self, q: i64) -> Result<Vec<LatticeSubgroup>> {
        let mut out: Vec<_> = enumerate_prime_maximal_subgroups(self.k, q)?
            .iter()
            .map(|m| self.sublattice(m))
            .collect();
        out.sort();
        Ok(out)
    }

    /// All canonical residues of `Z^k` modulo this subgroup, in lexicographic
    /// order.
    pub fn residues(&self) -> Vec<IntVec> {
        let diag: Vec<i64> = (0..self.k).map(|i| self.basis[i][i]).collect();
        let mut out = Vec::with_capacity(self.det() as usize);
        let mut cur = vec![0i64; self.k];
        loop {
            out.push(cur.clone());
            let mut i = self.k;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                cur[i] += 1;
                if cur[i] < diag[i] {
                    break;
                }
                cur[i] = 0;
            }
        }
    }

    /// Canonical residues modulo `sub` of the elements of this subgroup;
    /// requires `sub ⊆ self`.
    pub fn residues_of(&self, sub: &LatticeSubgroup) -> Result<Vec<IntVec>> {
        if !self.contains_subgroup(sub) {
            return Err(Error::NotPeriod(format!("{sub:?} is not contained in {self:?}")));
        }
        Ok(sub.residues().into_iter().filter(|r| self.contains(r)).collect())
    }
}

pub(crate) fn add(a: &[i64], b: &[i64]) -> IntVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub(crate) fn sub(a: &[i64], b: &[i64]) -> IntVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn neg(a: &[i64]) -> IntVec {
    a.iter().map(|x| -x).collect()
}

pub(crate) fn scale(a: &[i64], c: i64) -> IntVec {
    a.iter().map(|x| x * c).collect()
}

#[derive(Deserialize)]
struct RawCosetSet {
    subgroup: LatticeSubgroup,
    reps: Vec<IntVec>,
}

impl TryFrom<RawCosetSet> for CosetSet {
    type Error = Error;
    fn try_from(raw: RawCosetSet) -> Result<Self> {
        let k = raw.subgroup.k();
        if raw.reps.iter().any(|r| r.len() != k) {
            return Err(Error::Dimension(format!("coset representatives must have length {k}")));
        }
        Ok(CosetSet::from_reps(raw.subgroup, raw.reps))
    }
}

/// A finite union of cosets of a full-rank subgroup of `Z^k`.
///
/// Values built by the public constructors and operations are canonical: the
/// subgroup is the full stabilizer of the set and the representatives are
/// sorted canonical residues, so `==` is set equality. The only exception is
/// [`CosetSet::new_raw`], whose result must be passed through
/// [`CosetSet::canonicalize`] before comparison.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawCosetSet")]
pub struct CosetSet {
    subgroup: LatticeSubgroup,
    reps: Vec<IntVec>,
}

impl fmt::Debug for CosetSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}+{:?}", self.reps, self.subgroup.basis)
    }
}

impl CosetSet {
    /// Reduces and deduplicates the representatives without enlarging the
    /// subgroup.
    pub fn new_raw(subgroup: LatticeSubgroup, reps: impl IntoIterator<Item = IntVec>) -> Self {
        let set: BTreeSet<IntVec> = reps.into_iter().map(|r| subgroup.reduce(&r)).collect();
        CosetSet { subgroup, reps: set.into_iter().collect() }
    }

    pub fn from_reps(subgroup: LatticeSubgroup, reps: impl IntoIterator<Item = IntVec>) -> Self {
        Self::new_raw(subgroup, reps).canonicalize()
    }

    pub fn empty(k: usize) -> Self {
        CosetSet { subgroup: LatticeSubgroup::full(k), reps: vec![] }
    }

    pub fn full(k: usize) -> Self {
        Self::of_subgroup(LatticeSubgroup::full(k))
    }

    pub fn of_subgroup(l: LatticeSubgroup) -> Self {
        let k = l.k();
        CosetSet { subgroup: l, reps: vec![vec![0; k]] }
    }

    pub fn coset(l: LatticeSubgroup, v: &[i64]) -> Self {
        let r = l.reduce(v);
        CosetSet { subgroup: l, reps: vec![r] }
    }

    pub fn k(&self) -> usize {
        self.subgroup.k()
    }

    pub fn subgroup(&self) -> &LatticeSubgroup {
        &self.subgroup
    }

    pub fn reps(&self) -> &[IntVec] {
        &self.reps
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        self.reps.binary_search(&self.subgroup.reduce(v)).is_ok()
    }

    /// Set is a subgroup of `Z^k`. Exact on canonical values.
    pub fn is_subgroup(&self) -> bool {
        self.reps.len() == 1 && self.reps[0].iter().all(|&x| x == 0)
    }

    /// Number of cosets of `m` making up this set; `m` must be a period.
    pub fn residues_mod(&self, m: &LatticeSubgroup) -> Result<BTreeSet<IntVec>> {
        let shifts = self.subgroup.residues_of(m)?;
        let mut out = BTreeSet::new();
        for r in &self.reps {
            for t in &shifts {
                out.insert(m.reduce(&add(r, t)));
            }
        }
        Ok(out)
    }

    /// Smallest lexicographic element of the canonical residue list.
    pub fn min_rep(&self) -> Option<&IntVec> {
        self.reps.first()
    }

    pub fn canonicalize(&self) -> CosetSet {
        let k = self.k();
        if self.reps.is_empty() {
            return CosetSet::empty(k);
        }
        let l = &self.subgroup;
        let reps: BTreeSet<IntVec> = self.reps.iter().map(|r| l.reduce(r)).collect();
        let r0 = reps.iter().next().unwrap().clone();
        let mut gens: Vec<IntVec> = l.basis().to_vec();
        for s in &reps {
            let t = sub(s, &r0);
            if t.iter().all(|&x| x == 0) {
                continue;
            }
            if reps.iter().all(|r| reps.contains(&l.reduce(&add(r, &t)))) {
                gens.push(t);
            }
        }
        let p = LatticeSubgroup::from_generators(k, &gens).expect("contains a full-rank lattice");
        CosetSet::new_raw(p.clone(), reps.iter().cloned())
    }

    fn common(&self, other: &CosetSet) -> (LatticeSubgroup, BTreeSet<IntVec>, BTreeSet<IntVec>) {
        assert_eq!(self.k(), other.k(), "ambient ranks differ");
        let m = self.subgroup.intersect(&other.subgroup);
        let a = self.residues_mod(&m).expect("intersection is a common period");
        let b = other.residues_mod(&m).expect("intersection is a common period");
        (m, a, b)
    }

    pub fn sum(&self, other: &CosetSet) -> CosetSet {
        if self.is_empty() || other.is_empty() {
            return CosetSet::empty(self.k());
        }
        // (R_A + L_A) + (R_B + L_B) = R_A + R_B + (L_A + L_B)
        let p = self.subgroup.sum(&other.subgroup);
        let mut out = BTreeSet::new();
        for x in &self.reps {
            for y in &other.reps {
                out.insert(p.reduce(&add(x, y)));
            }
        }
        CosetSet::from_reps(p, out)
    }

    /// `self + c * other`, with `0 * other = {0}` for nonempty `other`.
    pub fn add_scaled(&self, c: i64, other: &CosetSet) -> CosetSet {
        if c == 0 {
            if other.is_empty() {
                return CosetSet::empty(self.k());
            }
            return self.clone();
        }
        self.sum(&other.scale(c))
    }

    pub fn intersect(&self, other: &CosetSet) -> CosetSet {
        if self.is_empty() || other.is_empty() {
            return CosetSet::empty(self.k());
        }
        let (m, a, b) = self.common(other);
        CosetSet::from_reps(m, a.intersection(&b).cloned())
    }

    pub fn union(&self, other: &CosetSet) -> CosetSet {
        if self.is_empty() {
            return other.clone();
        }
        if other.is_empty() {
            return self.clone();
        }
        let (m, a, b) = self.common(other);
        CosetSet::from_reps(m, a.union(&b).cloned())
    }

    pub fn difference(&self, other: &CosetSet) -> CosetSet {
        if self.is_empty() || other.is_empty() {
            return self.clone();
        }
        let (m, a, b) = self.common(other);
        CosetSet::from_reps(m, a.difference(&b).cloned())
    }

    pub fn neg(&self) -> CosetSet {
        CosetSet::new_raw(self.subgroup.clone(), self.reps.iter().map(|r| neg(r)))
    }

    /// `{c * a}`; `c` must be nonzero since `{0}` has no finite-index period.
    pub fn scale(&self, c: i64) -> CosetSet {
        assert!(c != 0, "cannot scale a coset set by zero");
        if self.is_empty() {
            return self.clone();
        }
        let l = self.subgroup.scale(c);
        CosetSet::from_reps(l, self.reps.iter().map(|r| scale(r, c)))
    }

    pub fn translate(&self, v: &[i64]) -> CosetSet {
        CosetSet::new_raw(self.subgroup.clone(), self.reps.iter().map(|r| add(r, v)))
    }

    /// `self ⊆ other`
    pub fn is_subset(&self, other: &CosetSet) -> bool {
        if self.is_empty() {
            return true;
        }
        if other.is_empty() {
            return false;
        }
        let (_, a, b) = self.common(other);
        a.is_subset(&b)
    }

    pub fn is_disjoint(&self, other: &CosetSet) -> bool {
        self.intersect(other).is_empty()
    }
}
