//! Constructive enumeration of maximal closed subroot systems, split by the
//! shape of the gradient.
//!
//! Every engine returns a [`ClassificationReport`] of canonical descriptors.
//! Descriptors reached from several parameter choices are merged and keep
//! all of their provenance records. Primes are searched up to `q_max` only.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use serde_json::{json, Value};

use crate::arsys::{build_system, AffineReflectionSystem, ExtensionDatum, SystemConfig};
use crate::error::{Error, Result};
use crate::lattice::{add, primes_up_to, CosetSet, IntVec, LatticeSubgroup};
use crate::rootsys::{m_constant, Family, LengthClass, RootSet, RootSystemType};
use crate::subroot::{gradient_class, integer_coordinates, lex_simple_system, GradientClass, SubrootDescriptor, ZEntry};

const MAX_Z_ORBITS: usize = 20;

#[derive(Clone, Debug)]
pub struct ClassifyRequest<'a> {
    pub system: &'a AffineReflectionSystem,
    pub q_max: i64,
    pub cases: BTreeSet<GradientClass>,
}

impl<'a> ClassifyRequest<'a> {
    /// All three gradient cases.
    pub fn new(system: &'a AffineReflectionSystem, q_max: i64) -> Self {
        let cases = [GradientClass::SemiClosed, GradientClass::Full, GradientClass::ProperClosed].into();
        ClassifyRequest { system, q_max, cases }
    }

    pub fn with_cases(mut self, cases: impl IntoIterator<Item = GradientClass>) -> Self {
        self.cases = cases.into_iter().collect();
        self
    }

    fn check(&self) -> Result<()> {
        if self.q_max < 2 {
            return Err(Error::Unsupported(format!("q_max = {} is below 2", self.q_max)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub rule: String,
    pub params: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportHeader {
    pub system: SystemConfig,
    pub q_max: i64,
    pub cases: Vec<GradientClass>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportEntry {
    #[serde(skip)]
    pub descriptor: SubrootDescriptor,
    pub gradient: GradientClass,
    pub z: Vec<ZEntry>,
    pub provenance: Vec<Provenance>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub header: ReportHeader,
    pub entries: Vec<ReportEntry>,
}

impl ClassificationReport {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn descriptors(&self) -> BTreeSet<SubrootDescriptor> {
        self.entries.iter().map(|e| e.descriptor.clone()).collect()
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

/// Accumulates descriptors keyed by canonical form.
pub(crate) struct Collector<'a> {
    sys: &'a AffineReflectionSystem,
    found: BTreeMap<SubrootDescriptor, Vec<Provenance>>,
    notes: Vec<String>,
}

impl<'a> Collector<'a> {
    pub(crate) fn new(sys: &'a AffineReflectionSystem) -> Self {
        Collector { sys, found: BTreeMap::new(), notes: vec![] }
    }

    pub(crate) fn emit(&mut self, entries: impl IntoIterator<Item = (usize, CosetSet)>, rule: &str, params: Value) -> Result<()> {
        let d = canonical(self.sys, entries)?;
        self.push(d, Provenance { rule: rule.into(), params });
        Ok(())
    }

    fn push(&mut self, d: SubrootDescriptor, p: Provenance) {
        let list = self.found.entry(d).or_default();
        if !list.contains(&p) {
            list.push(p);
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        let s = s.into();
        if !self.notes.contains(&s) {
            self.notes.push(s);
        }
    }

    fn absorb(&mut self, other: ClassificationReport) {
        for n in other.header.notes {
            self.note(n);
        }
        for e in other.entries {
            for p in e.provenance {
                self.push(e.descriptor.clone(), p);
            }
        }
    }

    pub(crate) fn finish(mut self, req: &ClassifyRequest) -> Result<ClassificationReport> {
        self.note(format!("maximal subgroups searched for primes up to {}", req.q_max));
        let mut entries = vec![];
        for (d, provenance) in self.found {
            let gradient = gradient_class(self.sys, &d)?;
            let z = d.to_json(self.sys).z;
            entries.push(ReportEntry { descriptor: d, gradient, z, provenance });
        }
        Ok(ClassificationReport {
            header: ReportHeader {
                system: self.sys.config().clone(),
                q_max: req.q_max,
                cases: req.cases.iter().copied().collect(),
                notes: self.notes,
            },
            entries,
        })
    }
}

fn canonical(sys: &AffineReflectionSystem, entries: impl IntoIterator<Item = (usize, CosetSet)>) -> Result<SubrootDescriptor> {
    SubrootDescriptor::new(sys, entries.into_iter().map(|(i, s)| (i, s.canonicalize())))
}

fn subgroup_of(s: &CosetSet, name: &str) -> Result<LatticeSubgroup> {
    if s.is_subgroup() {
        Ok(s.subgroup().clone())
    } else {
        Err(Error::Unsupported(format!("{name} = {s:?} is not a subgroup")))
    }
}

fn lambda_s(sys: &AffineReflectionSystem) -> &CosetSet {
    &sys.datum().lambda_s
}

fn lambda_l(sys: &AffineReflectionSystem) -> &CosetSet {
    &sys.datum().lambda_ell
}

/// Translation group of the short roots, or of all roots when every root
/// has the same length.
fn short_group(sys: &AffineReflectionSystem) -> Result<LatticeSubgroup> {
    let base = sys.base();
    if base.class_set(LengthClass::Short).count_ones(..) == 0 {
        subgroup_of(lambda_l(sys), "Λ_ℓ")
    } else {
        subgroup_of(lambda_s(sys), "Λ_s")
    }
}

fn cartesian<T: Clone>(choices: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = vec![vec![]];
    for c in choices {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                c.iter().map(move |x| {
                    let mut p = prefix.clone();
                    p.push(x.clone());
                    p
                })
            })
            .collect();
    }
    out
}

/// Value of a linear map on a root with integer coordinates `coords`, given
/// its values `t` on the basis, reduced modulo `h`.
fn eval(coords: &[i64], t: &[IntVec], h: &LatticeSubgroup) -> IntVec {
    let mut v = vec![0i64; h.k()];
    for (c, x) in coords.iter().zip(t) {
        for (a, b) in v.iter_mut().zip(x) {
            *a += c * b;
        }
    }
    h.reduce(&v)
}

fn coords_on(sys: &AffineReflectionSystem, basis: &[usize], roots: &RootSet) -> Result<BTreeMap<usize, Vec<i64>>> {
    let base = sys.base();
    let vecs: Vec<IntVec> = basis.iter().map(|&i| base.root(i).clone()).collect();
    roots
        .ones()
        .map(|i| {
            integer_coordinates(&vecs, base.root(i))
                .map(|c| (i, c))
                .ok_or_else(|| Error::Unsupported(format!("{:?} is outside the lattice of the basis", base.root(i))))
        })
        .collect()
}

fn tau_json(sys: &AffineReflectionSystem, basis: &[usize], t: &[IntVec]) -> Value {
    let base = sys.base();
    basis.iter().zip(t).map(|(&i, v)| json!({"root": base.root(i), "value": v})).collect()
}

fn eps(dim: usize, i: usize, c: i64) -> IntVec {
    let mut v = vec![0; dim];
    v[i] = 2 * c;
    v
}

/// Root index of `a ε_p + b ε_q` in the doubled coordinates of a classical
/// or `F_4` base.
pub(crate) fn eps_root(sys: &AffineReflectionSystem, terms: &[(usize, i64)]) -> usize {
    let dim = sys.base().dim();
    let v = terms.iter().fold(vec![0; dim], |acc, &(i, c)| add(&acc, &eps(dim, i, c)));
    sys.base().index_of(&v).expect("ε-combination is a root")
}

/// Long roots `±ε_p ± ε_q` with `p`, `q` on the same side of `side`.
fn same_side_long(sys: &AffineReflectionSystem, side: &[bool]) -> Vec<usize> {
    let n = side.len();
    let mut out = vec![];
    for p in 0..n {
        for q in p + 1..n {
            if side[p] == side[q] {
                for (a, b) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                    out.push(eps_root(sys, &[(p, a), (q, b)]));
                }
            }
        }
    }
    out
}

fn basis_json(l: &LatticeSubgroup) -> Value {
    json!(l.basis())
}

/// Semi-closed gradients. Only twisted systems over `C`, `G`, `F` or `B`
/// bases contribute.
pub fn classify_semi_closed(req: &ClassifyRequest) -> Result<ClassificationReport> {
    req.check()?;
    let sys = req.system;
    let mut out = Collector::new(sys);
    if lambda_l(sys) == lambda_s(sys) {
        out.note("short and long translation sets agree: no semi-closed gradients");
        return out.finish(req);
    }
    match sys.base_type().family {
        Family::C | Family::G => semi_closed_cg(sys, &mut out)?,
        Family::F => semi_closed_f4(sys, &mut out)?,
        Family::B => semi_closed_b(sys, &mut out)?,
        _ => out.note(format!("no semi-closed gradients over {}", sys.base_type())),
    }
    out.finish(req)
}

fn semi_closed_cg(sys: &AffineReflectionSystem, out: &mut Collector) -> Result<()> {
    let base = sys.base();
    let ls = subgroup_of(lambda_s(sys), "Λ_s")?;
    let m = m_constant(sys.base_type())?;
    let short = base.class_set(LengthClass::Short);
    let basis = lex_simple_system(sys, &short);
    let coords = coords_on(sys, &basis, &short)?;
    let gamma = base.gamma_pairs(LengthClass::Long);
    for h in ls.maximal_subgroups(m)? {
        if !lambda_l(sys).is_subset(&CosetSet::of_subgroup(h.clone())) {
            continue;
        }
        let res = ls.residues_of(&h)?;
        for t in cartesian(&vec![res; basis.len()]) {
            let tau: BTreeMap<usize, IntVec> = coords.iter().map(|(&i, c)| (i, eval(c, &t, &h))).collect();
            if gamma.iter().any(|(a, b)| h.contains(&add(&tau[a], &tau[b]))) {
                continue;
            }
            let entries = tau.iter().map(|(&i, v)| (i, CosetSet::coset(h.clone(), v)));
            out.emit(entries, "semi_closed_cg", json!({"H": basis_json(&h), "tau": tau_json(sys, &basis, &t)}))?;
        }
    }
    Ok(())
}

fn semi_closed_f4(sys: &AffineReflectionSystem, out: &mut Collector) -> Result<()> {
    let base = sys.base();
    let ls = subgroup_of(lambda_s(sys), "Λ_s")?;
    let short = base.class_set(LengthClass::Short);
    let basis = lex_simple_system(sys, &short);
    let coords = coords_on(sys, &basis, &short)?;
    let e: Vec<usize> = (0..4).map(|i| eps_root(sys, &[(i, 1)])).collect();
    for h in ls.maximal_subgroups(2)? {
        if !lambda_l(sys).is_subset(&CosetSet::of_subgroup(h.clone())) {
            continue;
        }
        let res = ls.residues_of(&h)?;
        for t in cartesian(&vec![res; basis.len()]) {
            let tau: BTreeMap<usize, IntVec> = coords.iter().map(|(&i, c)| (i, eval(c, &t, &h))).collect();
            for a in 0..4 {
                for b in a + 1..4 {
                    let side: Vec<bool> = (0..4).map(|i| i == a || i == b).collect();
                    let ok = (0..4).all(|i| (0..4).all(|j| (tau[&e[i]] == tau[&e[j]]) == (side[i] == side[j])));
                    if !ok {
                        continue;
                    }
                    let mut entries: Vec<(usize, CosetSet)> =
                        tau.iter().map(|(&i, v)| (i, CosetSet::coset(h.clone(), v))).collect();
                    entries.extend(same_side_long(sys, &side).into_iter().map(|i| (i, sys.lambda(i).clone())));
                    let params = json!({"H": basis_json(&h), "I": [a + 1, b + 1], "tau": tau_json(sys, &basis, &t)});
                    out.emit(entries, "semi_closed_f4", params)?;
                }
            }
        }
    }
    Ok(())
}

fn subsets(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u64..1 << n).map(move |m| (0..n).map(|i| m >> i & 1 == 1).collect())
}

fn semi_closed_b(sys: &AffineReflectionSystem, out: &mut Collector) -> Result<()> {
    let n = sys.base_type().rank;
    let ls = subgroup_of(lambda_s(sys), "Λ_s")?;
    let ll = subgroup_of(lambda_l(sys), "Λ_ℓ")?;
    let cosets = ls.residues_of(&ll)?;
    if cosets.len() > MAX_Z_ORBITS {
        return Err(Error::SearchBound(format!("{} cosets of Λ_ℓ in Λ_s", cosets.len())));
    }
    for side in subsets(n) {
        if side.iter().all(|&x| x) || side.iter().all(|&x| !x) {
            continue;
        }
        for pick in subsets(cosets.len()) {
            if pick.iter().all(|&x| x) || pick.iter().all(|&x| !x) {
                continue;
            }
            let z1: Vec<IntVec> = cosets.iter().zip(&pick).filter(|p| *p.1).map(|p| p.0.clone()).collect();
            let z2: Vec<IntVec> = cosets.iter().zip(&pick).filter(|p| !*p.1).map(|p| p.0.clone()).collect();
            let z1s = CosetSet::from_reps(ll.clone(), z1.clone());
            let z2s = CosetSet::from_reps(ll.clone(), z2.clone());
            let mut entries = vec![];
            for (i, &inj) in side.iter().enumerate() {
                let z = if inj { &z2s } else { &z1s };
                entries.push((eps_root(sys, &[(i, 1)]), z.clone()));
                entries.push((eps_root(sys, &[(i, -1)]), z.neg()));
            }
            entries.extend(same_side_long(sys, &side).into_iter().map(|i| (i, sys.lambda(i).clone())));
            let j: Vec<usize> = (0..n).filter(|&i| side[i]).map(|i| i + 1).collect();
            out.emit(entries, "semi_closed_b", json!({"J": j, "Z1": z1s, "Z2": z2s}))?;
        }
    }
    Ok(())
}

/// Full gradients.
pub fn classify_full_gradient(req: &ClassifyRequest) -> Result<ClassificationReport> {
    req.check()?;
    let sys = req.system;
    let mut out = Collector::new(sys);
    match sys.base_type().family {
        _ if sys.nullity() == 0 => out.note("finite system: no proper translation subgroups"),
        Family::BC => out.note("non-reduced base: see classify_bc"),
        Family::B => full_gradient_b(sys, req.q_max, &mut out)?,
        _ => full_gradient(sys, req.q_max, &mut out)?,
    }
    out.finish(req)
}

fn full_gradient(sys: &AffineReflectionSystem, q_max: i64, out: &mut Collector) -> Result<()> {
    let base = sys.base();
    let s = short_group(sys)?;
    let simple = base.simple().to_vec();
    for q in primes_up_to(q_max) {
        for h in s.maximal_subgroups(q)? {
            let res = s.residues_of(&h)?;
            'tau: for t in cartesian(&vec![res.clone(); simple.len()]) {
                let mut entries = vec![];
                for i in 0..base.len() {
                    let c = CosetSet::coset(h.clone(), &eval(base.simple_coords(i), &t, &h));
                    let z = match base.class(i) {
                        LengthClass::Short => c,
                        _ => c.intersect(lambda_l(sys)),
                    };
                    if z.is_empty() {
                        continue 'tau;
                    }
                    entries.push((i, z));
                }
                out.emit(entries, "full_gradient", json!({"H": basis_json(&h), "tau": tau_json(sys, &simple, &t)}))?;
            }
        }
    }
    Ok(())
}

/// Symmetric unions `Z ⊇ H` of `H`-cosets in `Λ_s`, maximal with the
/// property that distinct cosets never sum into `Λ_ℓ`. With `proper`, `Z`
/// ranges over proper subsets of `Λ_s` only.
fn maximal_z(ls: &LatticeSubgroup, ll: &LatticeSubgroup, h: &LatticeSubgroup, proper: bool) -> Result<Vec<Vec<IntVec>>> {
    let zero = vec![0i64; h.k()];
    let cosets = ls.residues_of(h)?;
    let mut orbits: Vec<Vec<IntVec>> = vec![];
    for c in &cosets {
        if *c == zero || orbits.iter().any(|o| o.contains(c)) {
            continue;
        }
        let m = h.reduce(&c.iter().map(|x| -x).collect::<IntVec>());
        orbits.push(if m == *c { vec![c.clone()] } else { vec![c.clone(), m] });
    }
    if orbits.len() > MAX_Z_ORBITS {
        return Err(Error::SearchBound(format!("{} coset orbits for Z", orbits.len())));
    }
    let good = |z: &[IntVec]| {
        z.iter()
            .enumerate()
            .all(|(a, x)| z[a + 1..].iter().all(|y| !ll.contains(&add(x, y))))
    };
    let mut ok: Vec<Vec<bool>> = vec![];
    for pick in subsets(orbits.len()) {
        let mut z = vec![zero.clone()];
        for (o, &p) in orbits.iter().zip(&pick) {
            if p {
                z.extend(o.iter().cloned());
            }
        }
        if good(&z) && !(proper && z.len() == cosets.len()) {
            ok.push(pick);
        }
    }
    let sub = |a: &[bool], b: &[bool]| a.iter().zip(b).all(|(x, y)| !x || *y);
    let maximal = ok.iter().filter(|a| !ok.iter().any(|b| b != *a && sub(a, b)));
    Ok(maximal
        .map(|pick| {
            let mut z = vec![zero.clone()];
            for (o, &p) in orbits.iter().zip(pick) {
                if p {
                    z.extend(o.iter().cloned());
                }
            }
            z.sort();
            z
        })
        .collect())
}

fn full_gradient_b(sys: &AffineReflectionSystem, q_max: i64, out: &mut Collector) -> Result<()> {
    let base = sys.base();
    let ls = subgroup_of(lambda_s(sys), "Λ_s")?;
    let ll = subgroup_of(lambda_l(sys), "Λ_ℓ")?;
    let mut hs = vec![ll.clone()];
    for q in primes_up_to(q_max) {
        hs.extend(ll.maximal_subgroups(q)?);
    }
    let simple = base.simple().to_vec();
    let mut found: BTreeMap<SubrootDescriptor, Vec<Provenance>> = BTreeMap::new();
    for h in hs {
        let zs = maximal_z(&ls, &ll, &h, h == ll)?;
        let long_vals = ll.residues_of(&h)?;
        let short_vals = ls.residues_of(&h)?;
        let choices: Vec<Vec<IntVec>> = simple
            .iter()
            .map(|&i| if base.class(i) == LengthClass::Short { short_vals.clone() } else { long_vals.clone() })
            .collect();
        for t in cartesian(&choices) {
            for z in &zs {
                let mut entries = vec![];
                for i in 0..base.len() {
                    let v = eval(base.simple_coords(i), &t, &h);
                    let set = match base.class(i) {
                        LengthClass::Short => CosetSet::new_raw(h.clone(), z.iter().map(|r| add(r, &v))),
                        _ => CosetSet::coset(h.clone(), &v),
                    };
                    entries.push((i, set));
                }
                let d = canonical(sys, entries)?;
                let params = json!({"H": basis_json(&h), "tau": tau_json(sys, &simple, &t), "Z": z});
                found.entry(d).or_default().push(Provenance { rule: "full_gradient_b".into(), params });
            }
        }
    }
    // a candidate from a smaller H can sit inside one with H = Λ_ℓ
    let keys: Vec<SubrootDescriptor> = found.keys().cloned().collect();
    for (d, provenance) in found {
        if keys.iter().any(|e| *e != d && is_contained(&d, e)) {
            continue;
        }
        for p in provenance {
            out.push(d.clone(), p);
        }
    }
    Ok(())
}

fn is_contained(a: &SubrootDescriptor, b: &SubrootDescriptor) -> bool {
    a.z().iter().all(|(i, s)| b.get(*i).is_some_and(|t| s.is_subset(t)))
}

/// Lifts of maximal closed subroot systems of a reduced base.
pub fn classify_proper_closed(req: &ClassifyRequest) -> Result<ClassificationReport> {
    req.check()?;
    let sys = req.system;
    let base = sys.base();
    let mut out = Collector::new(sys);
    if !base.is_reduced() {
        out.note("non-reduced base: see classify_bc");
        return out.finish(req);
    }
    let twisted = lambda_l(sys) != lambda_s(sys);
    let short = base.class_set(LengthClass::Short);
    for s in base.borel_de_siebenthal_expanded() {
        if twisted && s.is_disjoint(&short) {
            continue;
        }
        let simple: Vec<&IntVec> = lex_simple_system(sys, &s).into_iter().map(|i| base.root(i)).collect();
        let entries = s.ones().map(|i| (i, sys.lambda(i).clone()));
        out.emit(entries, "proper_closed", json!({"simple": simple}))?;
    }
    if twisted {
        out.note("subsystems without short roots are skipped");
    }
    out.finish(req)
}

/// The reduced part `Φ_s ∪ Φ_ℓ` of a `BC_n` system as a `B_n` system.
pub fn reduced_part(sys: &AffineReflectionSystem) -> Result<AffineReflectionSystem> {
    let ty = sys.base_type();
    if ty.family != Family::BC {
        return Err(Error::Unsupported(format!("{ty} is not of type BC")));
    }
    let d = sys.datum();
    let datum = ExtensionDatum { lambda_d: None, ..d.clone() };
    build_system(SystemConfig::Custom { base: RootSystemType::new(Family::B, ty.rank), nullity: sys.nullity(), datum })
}

/// Maximal closed subroot systems of a system over `BC_n`.
pub fn classify_bc(req: &ClassifyRequest) -> Result<ClassificationReport> {
    req.check()?;
    let sys = req.system;
    let b = reduced_part(sys)?;
    let base = sys.base();
    let n = sys.base_type().rank;
    let k = sys.nullity();
    let mut out = Collector::new(sys);
    let equal = lambda_l(sys) == lambda_s(sys);
    let ld = sys.datum().lambda_d.clone().unwrap_or_else(|| CosetSet::empty(k));
    let divisible = base.class_set(LengthClass::Divisible);

    // lifts of A_J
    for side in subsets(n) {
        if side.iter().all(|&x| x) || (!equal && side.iter().all(|&x| !x)) {
            continue;
        }
        let mut roots: Vec<usize> = divisible.ones().collect();
        for i in 0..n {
            if side[i] {
                roots.push(eps_root(sys, &[(i, 1)]));
                roots.push(eps_root(sys, &[(i, -1)]));
            }
        }
        roots.extend(same_side_long(sys, &side));
        let j: Vec<usize> = (0..n).filter(|&i| side[i]).map(|i| i + 1).collect();
        out.emit(roots.into_iter().map(|i| (i, sys.lambda(i).clone())), "bc_lift", json!({"J": j}))?;
    }
    if !equal {
        let ls = subgroup_of(lambda_s(sys), "Λ_s")?;
        let ll = subgroup_of(lambda_l(sys), "Λ_ℓ")?;
        let zero = vec![0i64; k];
        let cosets = ls.residues_of(&ll)?;
        for x in cosets.iter().filter(|c| **c != zero) {
            let z = CosetSet::from_reps(ll.clone(), cosets.iter().filter(|c| *c != x).cloned());
            let entries = (0..base.len()).map(|i| match base.class(i) {
                LengthClass::Short => (i, z.clone()),
                _ => (i, sys.lambda(i).clone()),
            });
            out.emit(entries, "bc_coset_lift", json!({"Z": z}))?;
        }
    }

    let to_bc = |d: &SubrootDescriptor| -> BTreeMap<usize, CosetSet> {
        d.z()
            .iter()
            .map(|(&i, s)| (base.index_of(b.base().root(i)).expect("B_n roots are BC_n roots"), s.clone()))
            .collect()
    };
    let inner = ClassifyRequest::new(&b, req.q_max);
    for e in classify_semi_closed(&inner)?.entries {
        let mut z = to_bc(&e.descriptor);
        for i in divisible.ones() {
            z.insert(i, ld.clone());
        }
        for p in e.provenance {
            out.emit(z.clone(), "bc_semi_closed", json!({"inner": p}))?;
        }
    }
    for e in classify_full_gradient(&inner)?.entries {
        let mut z = to_bc(&e.descriptor);
        for i in 0..n {
            let next = (i + 1) % n;
            for s in [1, -1] {
                let a = &z[&eps_root(sys, &[(i, s), (next, -1)])];
                let c = &z[&eps_root(sys, &[(i, s), (next, 1)])];
                z.insert(eps_root(sys, &[(i, 2 * s)]), a.sum(c).intersect(&ld));
            }
        }
        for p in e.provenance {
            out.emit(z.clone(), "bc_full_gradient", json!({"inner": p}))?;
        }
    }
    out.finish(req)
}

/// Union of the engines selected in `req.cases`.
pub fn classify_all(req: &ClassifyRequest) -> Result<ClassificationReport> {
    req.check()?;
    let sys = req.system;
    let mut out = Collector::new(sys);
    if sys.base_type().family == Family::BC {
        let r = classify_bc(req)?;
        for n in r.header.notes {
            out.note(n);
        }
        for e in r.entries {
            if req.cases.contains(&e.gradient) {
                for p in e.provenance {
                    out.push(e.descriptor.clone(), p);
                }
            }
        }
        return out.finish(req);
    }
    if req.cases.contains(&GradientClass::SemiClosed) {
        out.absorb(classify_semi_closed(req)?);
    }
    if req.cases.contains(&GradientClass::Full) {
        out.absorb(classify_full_gradient(req)?);
    }
    if req.cases.contains(&GradientClass::ProperClosed) {
        out.absorb(classify_proper_closed(req)?);
    }
    out.finish(req)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subroot::{enumerate_maximal_periodic, is_closed_subroot, DEFAULT_CELL_BOUND};

    fn ty(s: &str) -> RootSystemType {
        s.parse().unwrap()
    }

    fn toroidal(s: &str, k: usize) -> AffineReflectionSystem {
        build_system(SystemConfig::Toroidal { base: ty(s), nullity: k }).unwrap()
    }

    fn twisted(s: &str, order: u32) -> AffineReflectionSystem {
        build_system(SystemConfig::TwistedAffine { pair: ty(s), order }).unwrap()
    }

    fn oracle(sys: &AffineReflectionSystem, m: i64) -> BTreeSet<SubrootDescriptor> {
        let p = LatticeSubgroup::scaled(sys.nullity(), m);
        enumerate_maximal_periodic(sys, &p, DEFAULT_CELL_BOUND).unwrap().into_iter().collect()
    }

    fn periodic(r: &ClassificationReport, m: i64, k: usize) -> BTreeSet<SubrootDescriptor> {
        let p = LatticeSubgroup::scaled(k, m);
        r.descriptors().into_iter().filter(|d| d.is_periodic_under(&p)).collect()
    }

    fn count(r: &ClassificationReport, g: GradientClass) -> usize {
        r.entries.iter().filter(|e| e.gradient == g).count()
    }

    #[test]
    fn toroidal_a2_counts() {
        let sys = toroidal("A2", 1);
        let r = classify_all(&ClassifyRequest::new(&sys, 2)).unwrap();
        assert_eq!(r.len(), 7);
        assert_eq!(count(&r, GradientClass::Full), 4);
        assert_eq!(count(&r, GradientClass::ProperClosed), 3);
        assert_eq!(r.descriptors(), oracle(&sys, 2));
    }

    #[test]
    fn full_gradient_rank_two_k2() {
        for b in ["A2", "B2", "C2", "G2"] {
            let sys = toroidal(b, 2);
            let r = classify_full_gradient(&ClassifyRequest::new(&sys, 2)).unwrap();
            assert_eq!(r.len(), 12, "{b}");
        }
    }

    #[test]
    fn untwisted_has_no_semi_closed() {
        let sys = toroidal("C3", 1);
        let r = classify_semi_closed(&ClassifyRequest::new(&sys, 3)).unwrap();
        assert!(r.is_empty());
        assert!(!r.header.notes.is_empty());
    }

    #[test]
    fn twisted_c2_semi_closed() {
        let sys = twisted("A3", 2);
        let r = classify_semi_closed(&ClassifyRequest::new(&sys, 2)).unwrap();
        assert_eq!(r.len(), 2);
        let ls = LatticeSubgroup::full(1);
        for e in &r.entries {
            assert_eq!(e.gradient, GradientClass::SemiClosed);
            let h: Vec<Vec<i64>> = serde_json::from_value(e.provenance[0].params["H"].clone()).unwrap();
            let h = LatticeSubgroup::from_basis(&h).unwrap();
            assert!(lambda_l(&sys).is_subset(&CosetSet::of_subgroup(h.clone())));
            assert_eq!(h.det() / ls.det(), 2);
        }
    }

    #[test]
    fn twisted_c2_matches_oracle() {
        let sys = twisted("A3", 2);
        let r = classify_all(&ClassifyRequest::new(&sys, 3)).unwrap();
        assert_eq!(periodic(&r, 6, 1), oracle(&sys, 6));
        assert_eq!(r.len(), 15);
    }

    #[test]
    fn bc2_matches_oracle() {
        let sys = toroidal("BC2", 1);
        let r = classify_all(&ClassifyRequest::new(&sys, 2)).unwrap();
        assert_eq!(r.len(), 7);
        assert_eq!(r.descriptors(), oracle(&sys, 2));
    }

    #[test]
    fn finite_matches_borel_de_siebenthal() {
        for b in ["A3", "B3", "C3", "G2", "F4", "BC2", "BC3"] {
            let sys = build_system(SystemConfig::Finite { base: ty(b) }).unwrap();
            let r = classify_all(&ClassifyRequest::new(&sys, 2)).unwrap();
            let expect: BTreeSet<SubrootDescriptor> = sys
                .base()
                .borel_de_siebenthal_expanded()
                .iter()
                .map(|s| SubrootDescriptor::lift(&sys, s))
                .collect();
            assert_eq!(r.descriptors(), expect, "{b}");
        }
    }

    #[test]
    fn outputs_are_closed() {
        let systems = [twisted("A3", 2), twisted("D4", 2), twisted("D4", 3), twisted("A4", 2), toroidal("B3", 1)];
        for sys in &systems {
            let r = classify_all(&ClassifyRequest::new(sys, 3)).unwrap();
            assert!(!r.is_empty());
            for e in &r.entries {
                assert!(is_closed_subroot(sys, &e.descriptor).is_closed);
            }
        }
    }

    #[test]
    fn report_is_stable() {
        let sys = twisted("A3", 2);
        let req = ClassifyRequest::new(&sys, 3);
        let a = serde_json::to_string(&classify_all(&req).unwrap()).unwrap();
        let b = serde_json::to_string(&classify_all(&req).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn semi_closed_parameters() {
        for sys in [twisted("A3", 2), twisted("A5", 2), twisted("D4", 3)] {
            let r = classify_semi_closed(&ClassifyRequest::new(&sys, 2)).unwrap();
            assert!(!r.is_empty());
            let gamma = sys.base().gamma_pairs(LengthClass::Long);
            for e in &r.entries {
                let d = &e.descriptor;
                let h = d.z().values().next().unwrap().subgroup().clone();
                assert!(lambda_l(&sys).is_subset(&CosetSet::of_subgroup(h.clone())));
                for (a, b) in &gamma {
                    assert!(!d.get(*a).unwrap().sum(d.get(*b).unwrap()).contains(&[0]));
                }
            }
        }
    }

    #[test]
    fn full_gradient_b_pair_condition() {
        for sys in [twisted("D3", 2), twisted("D4", 2), toroidal("B2", 2)] {
            let ll = subgroup_of(lambda_l(&sys), "Λ_ℓ").unwrap();
            let r = classify_full_gradient(&ClassifyRequest::new(&sys, 3)).unwrap();
            assert!(!r.is_empty());
            for p in r.entries.iter().flat_map(|e| &e.provenance) {
                let z: Vec<IntVec> = serde_json::from_value(p.params["Z"].clone()).unwrap();
                for (i, x) in z.iter().enumerate() {
                    for y in &z[i + 1..] {
                        assert!(!ll.contains(&add(x, y)));
                    }
                }
            }
        }
    }

    #[test]
    fn g2_chain_exists() {
        // every admissible τ into Z/3 admits a Γ_s-chain β1, β2, β3 whose
        // two pair sums are 1 and 2
        let sys = twisted("D4", 3);
        let base = sys.base();
        let short = base.class_set(LengthClass::Short);
        let basis = lex_simple_system(&sys, &short);
        let coords = coords_on(&sys, &basis, &short).unwrap();
        let gamma = base.gamma_pairs(LengthClass::Long);
        let mut admissible = 0;
        for t in cartesian(&vec![vec![0i64, 1, 2]; basis.len()]) {
            let tau = |i: usize| coords[&i].iter().zip(&t).map(|(c, x)| c * x).sum::<i64>().rem_euclid(3);
            if gamma.iter().any(|&(a, b)| (tau(a) + tau(b)) % 3 == 0) {
                continue;
            }
            admissible += 1;
            let chain = gamma.iter().any(|&(a, b)| {
                gamma.iter().any(|&(b2, c)| {
                    b2 == b && {
                        let s: BTreeSet<i64> = [(tau(a) + tau(b)) % 3, (tau(b) + tau(c)) % 3].into();
                        s == BTreeSet::from([1, 2])
                    }
                })
            });
            assert!(chain, "{t:?}");
        }
        assert!(admissible > 0);
    }

    #[test]
    fn bc_rejects_other_bases() {
        let sys = toroidal("B2", 1);
        assert!(classify_bc(&ClassifyRequest::new(&sys, 2)).is_err());
        assert!(classify_all(&ClassifyRequest::new(&sys, 1)).is_err());
    }
}
