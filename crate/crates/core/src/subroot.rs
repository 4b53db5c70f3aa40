//! Subroot systems described by their gradient and per-root translation
//! sets, plus a brute-force oracle on finite quotients.
//!
//! A [`SubrootDescriptor`] records, for every root `α` of the gradient, the
//! set `Z_α = {y ∈ Λ_α : α ⊕ y ∈ Ψ}`. Descriptors are only meaningful
//! together with the [`AffineReflectionSystem`] they were built for.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use fixedbitset::FixedBitSet;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::arsys::{build_system, check_translation_family, AffineReflectionSystem, SystemConfig, ValidationReport};
use crate::error::{Error, Result};
use crate::lattice::{add, CosetSet, IntVec, LatticeSubgroup};
use crate::rootsys::{dot, lex_positive, RootSet};

pub const DEFAULT_CELL_BOUND: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubrootDescriptor {
    z: BTreeMap<usize, CosetSet>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZEntry {
    pub root: IntVec,
    pub set: CosetSet,
}

/// Serialized form: the system configuration plus the nonempty `Z_α`, sorted
/// by root coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescriptorJson {
    pub system: SystemConfig,
    pub z: Vec<ZEntry>,
}

impl SubrootDescriptor {
    /// Builds a descriptor from `(root index, Z_α)` pairs. Empty sets are
    /// dropped; each set must lie in `Λ_α` and `Z_{-α} = -Z_α` must hold.
    pub fn new(sys: &AffineReflectionSystem, entries: impl IntoIterator<Item = (usize, CosetSet)>) -> Result<Self> {
        let base = sys.base();
        let mut z = BTreeMap::new();
        for (i, s) in entries {
            if i >= base.len() {
                return Err(Error::NotSubroot(format!("root index {i} out of range")));
            }
            if s.k() != sys.nullity() {
                return Err(Error::Dimension(format!("set {s:?} has the wrong ambient rank")));
            }
            if s.is_empty() {
                continue;
            }
            if !s.is_subset(sys.lambda(i)) {
                return Err(Error::NotSubroot(format!("Z at {:?} = {s:?} is not inside its real-root set", base.root(i))));
            }
            if z.insert(i, s).is_some() {
                return Err(Error::NotSubroot(format!("root {:?} listed twice", base.root(i))));
            }
        }
        if z.is_empty() {
            return Err(Error::NotSubroot("no roots".into()));
        }
        for (&i, s) in &z {
            let j = base.neg(i);
            if z.get(&j) != Some(&s.neg()) {
                return Err(Error::NotSubroot(format!("not symmetric at {:?}", base.root(i))));
            }
        }
        Ok(SubrootDescriptor { z })
    }

    /// All real roots of the system.
    pub fn full(sys: &AffineReflectionSystem) -> Self {
        let z = (0..sys.base().len()).map(|i| (i, sys.lambda(i).clone())).collect();
        SubrootDescriptor { z }
    }

    /// `α ⊕ Λ_α` for `α` in a symmetric root set.
    pub fn lift(sys: &AffineReflectionSystem, roots: &RootSet) -> Self {
        let z = roots.ones().map(|i| (i, sys.lambda(i).clone())).collect();
        SubrootDescriptor { z }
    }

    pub fn z(&self) -> &BTreeMap<usize, CosetSet> {
        &self.z
    }

    pub fn get(&self, i: usize) -> Option<&CosetSet> {
        self.z.get(&i)
    }

    pub fn gradient(&self, sys: &AffineReflectionSystem) -> RootSet {
        let mut g = sys.base().empty_set();
        for &i in self.z.keys() {
            g.insert(i);
        }
        g
    }

    pub fn is_full(&self, sys: &AffineReflectionSystem) -> bool {
        *self == Self::full(sys)
    }

    /// Common period of the datum and of every `Z_α`.
    pub fn period(&self, sys: &AffineReflectionSystem) -> LatticeSubgroup {
        self.z.values().fold(sys.common_period(), |m, s| m.intersect(s.subgroup()))
    }

    pub fn is_periodic_under(&self, m: &LatticeSubgroup) -> bool {
        self.z.values().all(|s| s.subgroup().contains_subgroup(m))
    }

    pub fn to_json(&self, sys: &AffineReflectionSystem) -> DescriptorJson {
        DescriptorJson {
            system: sys.config().clone(),
            z: self.z.iter().map(|(&i, s)| ZEntry { root: sys.base().root(i).clone(), set: s.clone() }).collect(),
        }
    }

    pub fn from_json(json: &DescriptorJson) -> Result<(AffineReflectionSystem, SubrootDescriptor)> {
        let sys = build_system(json.system.clone())?;
        let mut entries = vec![];
        for e in &json.z {
            entries.push((sys.base().try_index(&e.root)?, e.set.clone()));
        }
        let d = SubrootDescriptor::new(&sys, entries)?;
        Ok((sys, d))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    Reflection,
    Sum,
}

/// Two members of `Ψ` whose reflection or real sum leaves `Ψ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub kind: WitnessKind,
    pub alpha: IntVec,
    pub y: IntVec,
    pub beta: IntVec,
    pub z: IntVec,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosureCheck {
    pub is_subroot: bool,
    pub is_closed: bool,
    pub witness: Option<Witness>,
}

fn find_witness(
    sys: &AffineReflectionSystem,
    d: &SubrootDescriptor,
    m: &LatticeSubgroup,
    kind: WitnessKind,
    a: usize,
    b: usize,
) -> Witness {
    let base = sys.base();
    let ya = d.z[&a].residues_mod(m).expect("period");
    let zb = d.z[&b].residues_mod(m).expect("period");
    for y in &ya {
        for z in &zb {
            let bad = match kind {
                WitnessKind::Reflection => {
                    let (t, v) = sys.reflect_real((a, y), (b, z));
                    d.z.get(&t).is_none_or(|s| !s.contains(&v))
                }
                WitnessKind::Sum => {
                    let t = base.sum(a, b).expect("sum is a root");
                    let v = add(y, z);
                    sys.lambda(t).contains(&v) && d.z.get(&t).is_none_or(|s| !s.contains(&v))
                }
            };
            if bad {
                return Witness {
                    kind,
                    alpha: base.root(a).clone(),
                    y: y.clone(),
                    beta: base.root(b).clone(),
                    z: z.clone(),
                };
            }
        }
    }
    unreachable!("set-level violation has an element-level witness")
}

/// Reflection and sum closure of `Ψ`, decided on the quotient by a common
/// period. On failure a violating pair is returned.
pub fn is_closed_subroot(sys: &AffineReflectionSystem, d: &SubrootDescriptor) -> ClosureCheck {
    let base = sys.base();
    let m = d.period(sys);
    let keys: Vec<usize> = d.z.keys().copied().collect();
    let mut seen = HashSet::new();
    // reflections: Z_β - (β,α^∨) Z_α ⊆ Z_{s_α β}
    for &a in &keys {
        for &b in &keys {
            let t = base.refl(a, b);
            let c = base.cartan(b, a);
            let ok = match d.z.get(&t) {
                None => false,
                Some(zt) => {
                    let key = (d.z[&b].clone(), d.z[&a].clone(), c, zt.clone());
                    seen.contains(&key) || {
                        let ok = d.z[&b].add_scaled(-c, &d.z[&a]).is_subset(zt);
                        if ok {
                            seen.insert(key);
                        }
                        ok
                    }
                }
            };
            if !ok {
                let w = find_witness(sys, d, &m, WitnessKind::Reflection, a, b);
                return ClosureCheck { is_subroot: false, is_closed: false, witness: Some(w) };
            }
        }
    }
    // sums: (Z_α + Z_β) ∩ Λ_{α+β} ⊆ Z_{α+β}
    let empty = CosetSet::empty(sys.nullity());
    for &a in &keys {
        for &b in &keys {
            let Some(t) = base.sum(a, b) else { continue };
            let zt = d.z.get(&t).unwrap_or(&empty);
            let s = d.z[&a].sum(&d.z[&b]).intersect(sys.lambda(t));
            if !s.is_subset(zt) {
                let w = find_witness(sys, d, &m, WitnessKind::Sum, a, b);
                return ClosureCheck { is_subroot: true, is_closed: false, witness: Some(w) };
            }
        }
    }
    ClosureCheck { is_subroot: true, is_closed: true, witness: None }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientClass {
    Full,
    ProperClosed,
    SemiClosed,
}

pub fn gradient_class(sys: &AffineReflectionSystem, d: &SubrootDescriptor) -> Result<GradientClass> {
    let check = is_closed_subroot(sys, d);
    if !check.is_closed {
        return Err(Error::NotSubroot(format!("not closed: {:?}", check.witness)));
    }
    let base = sys.base();
    let g = d.gradient(sys);
    if g == base.all() {
        return Ok(GradientClass::Full);
    }
    let rep = base.classify_subset(&g);
    if rep.is_closed {
        Ok(GradientClass::ProperClosed)
    } else if rep.is_semi_closed {
        Ok(GradientClass::SemiClosed)
    } else {
        Err(Error::NotSubroot("gradient is neither closed nor semi-closed".into()))
    }
}

type Q = Ratio<i128>;

/// Coefficients of `v` in the basis `basis` when they exist and are
/// integral.
pub fn integer_coordinates(basis: &[IntVec], v: &[i64]) -> Option<Vec<i64>> {
    let r = basis.len();
    // Gram system G x = (basis_i, v)
    let mut a: Vec<Vec<Q>> = (0..r)
        .map(|i| {
            let mut row: Vec<Q> = (0..r).map(|j| Q::from(dot(&basis[i], &basis[j]) as i128)).collect();
            row.push(Q::from(dot(&basis[i], v) as i128));
            row
        })
        .collect();
    for col in 0..r {
        let piv = (col..r).find(|&i| a[i][col] != Q::from(0))?;
        a.swap(col, piv);
        let p = a[col][col];
        for c in col..=r {
            a[col][c] /= p;
        }
        for i in 0..r {
            if i != col && a[i][col] != Q::from(0) {
                let f = a[i][col];
                for c in col..=r {
                    let t = a[col][c] * f;
                    a[i][c] -= t;
                }
            }
        }
    }
    let x: Vec<Q> = (0..r).map(|i| a[i][r]).collect();
    // the Gram solve projects; confirm v is actually in the span
    let dim = v.len();
    for c in 0..dim {
        let s: Q = (0..r).map(|i| x[i] * Q::from(basis[i][c] as i128)).sum();
        if s != Q::from(v[c] as i128) {
            return None;
        }
    }
    x.iter().map(|q| q.is_integer().then(|| *q.numer() as i64)).collect()
}

/// Simple system of a root subset for the lexicographic positive system:
/// positive members that are not a sum of two positive members.
pub fn lex_simple_system(sys: &AffineReflectionSystem, g: &RootSet) -> Vec<usize> {
    let base = sys.base();
    let pos: Vec<usize> = g.ones().filter(|&i| lex_positive(base.root(i))).collect();
    pos.iter()
        .copied()
        .filter(|&c| !pos.iter().any(|&a| pos.iter().any(|&b| base.sum(a, b) == Some(c))))
        .collect()
}

/// A `Z`-linear `p` on the gradient with `p_α ∈ Z_α` for non-divisible `α`,
/// fixed on the lexicographic simple system by the minimal canonical
/// representative of each `Z_γ`.
pub fn p_function(sys: &AffineReflectionSystem, d: &SubrootDescriptor) -> Result<BTreeMap<usize, IntVec>> {
    if !is_closed_subroot(sys, d).is_subroot {
        return Err(Error::NotSubroot("reflection closure fails".into()));
    }
    let base = sys.base();
    let g = d.gradient(sys);
    let simple = lex_simple_system(sys, &g);
    let basis: Vec<IntVec> = simple.iter().map(|&i| base.root(i).clone()).collect();
    let k = sys.nullity();
    let mut p = BTreeMap::new();
    for i in g.ones() {
        let coeffs = integer_coordinates(&basis, base.root(i))
            .ok_or_else(|| Error::NotSubroot(format!("{:?} is not an integral combination of the simple system", base.root(i))))?;
        let mut v = vec![0i64; k];
        for (c, &s) in coeffs.iter().zip(&simple) {
            let ps = d.z[&s].min_rep().expect("nonempty");
            for (x, y) in v.iter_mut().zip(ps) {
                *x += c * y;
            }
        }
        p.insert(i, v);
    }
    for i in g.ones() {
        if !is_divisible_in(sys, &g, i) && !d.z[&i].contains(&p[&i]) {
            return Err(Error::NotSubroot(format!("p at {:?} lies outside Z", base.root(i))));
        }
    }
    Ok(p)
}

/// `α/2` is also a member of `g`.
pub fn is_divisible_in(sys: &AffineReflectionSystem, g: &RootSet, i: usize) -> bool {
    let v = sys.base().root(i);
    if v.iter().any(|x| x % 2 != 0) {
        return false;
    }
    let half: IntVec = v.iter().map(|x| x / 2).collect();
    sys.base().index_of(&half).is_some_and(|j| g.contains(j))
}

/// The translated family `Z_α - p_α`.
pub fn shifted_family(sys: &AffineReflectionSystem, d: &SubrootDescriptor) -> Result<BTreeMap<usize, CosetSet>> {
    let p = p_function(sys, d)?;
    Ok(d.z.iter().map(|(&i, s)| (i, s.translate(&p[&i].iter().map(|x| -x).collect::<IntVec>()))).collect())
}

/// Extension-datum axioms for the shifted family over the gradient.
pub fn shifted_datum_report(sys: &AffineReflectionSystem, d: &SubrootDescriptor) -> Result<ValidationReport> {
    let shifted = shifted_family(sys, d)?;
    let g = d.gradient(sys);
    let mut report = ValidationReport::default();
    check_translation_family(sys.base(), &g, &|i| shifted[&i].clone(), &|i| is_divisible_in(sys, &g, i), &mut report);
    Ok(report)
}

pub type CellSet = FixedBitSet;

/// Real roots modulo a finite-index period `M`: cells `(α, y mod M)`.
#[derive(Clone, Debug)]
pub struct CellQuotient {
    period: LatticeSubgroup,
    cells: Vec<(usize, IntVec)>,
    index: HashMap<(usize, IntVec), usize>,
    neg: Vec<usize>,
    add: Vec<Vec<Option<usize>>>,
    refl: Vec<Vec<usize>>,
}

impl CellQuotient {
    pub fn new(sys: &AffineReflectionSystem, m: &LatticeSubgroup) -> Result<Self> {
        Self::with_bound(sys, m, usize::MAX)
    }

    pub fn with_bound(sys: &AffineReflectionSystem, m: &LatticeSubgroup, bound: usize) -> Result<Self> {
        if m.k() != sys.nullity() || !sys.common_period().contains_subgroup(m) {
            return Err(Error::NotPeriod(format!("{m:?} is not a period of the datum")));
        }
        let base = sys.base();
        let per_root: Vec<Vec<IntVec>> = (0..base.len())
            .map(|i| sys.lambda(i).residues_mod(m).map(|s| s.into_iter().collect()))
            .collect::<Result<_>>()?;
        let total: usize = per_root.iter().map(|v| v.len()).sum();
        if total > bound {
            return Err(Error::CellBound { cells: total, bound });
        }
        let mut cells = Vec::with_capacity(total);
        for (i, rs) in per_root.into_iter().enumerate() {
            for r in rs {
                cells.push((i, r));
            }
        }
        let index: HashMap<(usize, IntVec), usize> = cells.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
        let n = cells.len();
        let neg = cells
            .iter()
            .map(|(a, y)| index[&(base.neg(*a), m.reduce(&y.iter().map(|x| -x).collect::<IntVec>()))])
            .collect();
        let mut addt = vec![vec![None; n]; n];
        let mut reflt = vec![vec![0; n]; n];
        for (i, (a, y)) in cells.iter().enumerate() {
            for (j, (b, z)) in cells.iter().enumerate() {
                if let Some(c) = base.sum(*a, *b) {
                    let v = m.reduce(&add(y, z));
                    addt[i][j] = index.get(&(c, v)).copied();
                }
                let (t, v) = sys.reflect_real((*a, y), (*b, z));
                reflt[i][j] = index[&(t, m.reduce(&v))];
            }
        }
        Ok(CellQuotient { period: m.clone(), cells, index, neg, add: addt, refl: reflt })
    }

    pub fn period(&self) -> &LatticeSubgroup {
        &self.period
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[(usize, IntVec)] {
        &self.cells
    }

    pub fn cell_index(&self, root: usize, y: &[i64]) -> Option<usize> {
        self.index.get(&(root, self.period.reduce(y))).copied()
    }

    pub fn neg(&self, c: usize) -> usize {
        self.neg[c]
    }

    pub fn all(&self) -> CellSet {
        let mut s = CellSet::with_capacity(self.len());
        s.insert_range(..);
        s
    }

    pub fn empty_set(&self) -> CellSet {
        CellSet::with_capacity(self.len())
    }

    pub fn is_symmetric(&self, s: &CellSet) -> bool {
        s.ones().all(|c| s.contains(self.neg[c]))
    }

    pub fn is_closed_cells(&self, s: &CellSet) -> bool {
        s.ones().all(|a| {
            s.ones().all(|b| s.contains(self.refl[a][b]) && self.add[a][b].is_none_or(|c| s.contains(c)))
        })
    }

    /// Extends a closed set by `new` cells and closes again.
    fn close_from(&self, set: &mut CellSet, new: &[usize]) {
        let mut members: Vec<usize> = set.ones().collect();
        let mut queue: Vec<usize> = vec![];
        for &c in new {
            if !set.contains(c) {
                set.insert(c);
                queue.push(c);
            }
        }
        while let Some(e) = queue.pop() {
            members.push(e);
            let mut out = vec![self.neg[e]];
            for &f in &members {
                out.push(self.refl[e][f]);
                out.push(self.refl[f][e]);
                if let Some(c) = self.add[e][f] {
                    out.push(c);
                }
            }
            for c in out {
                if !set.contains(c) {
                    set.insert(c);
                    queue.push(c);
                }
            }
        }
    }

    /// Least cell set containing `seed` that is closed under negation,
    /// reflection and real sums.
    pub fn periodic_closure(&self, seed: &CellSet) -> Result<CellSet> {
        if !self.is_symmetric(seed) {
            return Err(Error::NotSymmetric);
        }
        let mut out = self.empty_set();
        let new: Vec<usize> = seed.ones().collect();
        self.close_from(&mut out, &new);
        Ok(out)
    }

    pub fn cells_of(&self, d: &SubrootDescriptor) -> Result<CellSet> {
        if !d.is_periodic_under(&self.period) {
            return Err(Error::NotPeriod(format!("{:?} is not a period of the descriptor", self.period)));
        }
        let mut s = self.empty_set();
        for (&i, z) in &d.z {
            for r in z.residues_mod(&self.period)? {
                s.insert(self.index[&(i, r)]);
            }
        }
        Ok(s)
    }

    pub fn descriptor_of(&self, sys: &AffineReflectionSystem, s: &CellSet) -> Result<SubrootDescriptor> {
        let mut per_root: BTreeMap<usize, Vec<IntVec>> = BTreeMap::new();
        for c in s.ones() {
            let (i, r) = &self.cells[c];
            per_root.entry(*i).or_default().push(r.clone());
        }
        SubrootDescriptor::new(
            sys,
            per_root.into_iter().map(|(i, rs)| (i, CosetSet::from_reps(self.period.clone(), rs))),
        )
    }

    fn is_maximal_cells(&self, s: &CellSet) -> bool {
        let all = self.all();
        (0..self.len()).filter(|&c| !s.contains(c)).all(|c| {
            let mut t = s.clone();
            self.close_from(&mut t, &[c, self.neg[c]]);
            t == all
        })
    }
}

/// Maximality of `d` among closed subroot systems that are unions of cells
/// modulo `m`.
pub fn is_maximal_periodic(sys: &AffineReflectionSystem, d: &SubrootDescriptor, m: &LatticeSubgroup) -> Result<bool> {
    let q = CellQuotient::new(sys, m)?;
    let s = q.cells_of(d)?;
    if !is_closed_subroot(sys, d).is_closed || s == q.all() {
        return Ok(false);
    }
    Ok(q.is_maximal_cells(&s))
}

/// Exhaustive list of maximal closed `m`-periodic subroot systems.
///
/// Depth-first search over negation pairs of cells. Each branch either
/// forces a pair in (and closes) or forbids it; branches whose closure meets
/// a forbidden pair or fills every cell are cut.
pub fn enumerate_maximal_periodic(
    sys: &AffineReflectionSystem,
    m: &LatticeSubgroup,
    bound: usize,
) -> Result<Vec<SubrootDescriptor>> {
    let q = CellQuotient::with_bound(sys, m, bound)?;
    let mut pairs: Vec<(usize, usize)> = vec![];
    let mut seen = q.empty_set();
    for c in 0..q.len() {
        if !seen.contains(c) {
            seen.insert(c);
            seen.insert(q.neg(c));
            pairs.push((c, q.neg(c)));
        }
    }
    let all = q.all();
    let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut stack: Vec<(usize, CellSet, CellSet)> = vec![(0, q.empty_set(), q.empty_set())];
    while let Some((i, inside, out)) = stack.pop() {
        if i == pairs.len() {
            if inside.count_ones(..) > 0 && q.is_maximal_cells(&inside) {
                found.insert(inside.ones().collect());
            }
            continue;
        }
        let (c, nc) = pairs[i];
        if inside.contains(c) {
            stack.push((i + 1, inside, out));
            continue;
        }
        let mut excl = out.clone();
        excl.insert(c);
        excl.insert(nc);
        stack.push((i + 1, inside.clone(), excl));
        let mut incl = inside;
        q.close_from(&mut incl, &[c, nc]);
        if incl.is_disjoint(&out) && incl != all {
            stack.push((i + 1, incl, out));
        }
    }
    let mut out: Vec<SubrootDescriptor> = found
        .into_iter()
        .map(|cells| {
            let mut s = q.empty_set();
            s.extend(cells);
            q.descriptor_of(sys, &s)
        })
        .collect::<Result<_>>()?;
    out.sort();
    out.dedup();
    Ok(out)
}
