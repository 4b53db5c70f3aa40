//! Extension data and the affine reflection systems built from them.
//!
//! A system is a finite irreducible root system together with translation
//! sets `Λ_0, Λ_s, Λ_ℓ, Λ_d ⊆ Z^k`. Its real roots are the pairs `α ⊕ y`
//! with `y ∈ Λ_α`, where `Λ_α` depends only on the length class of `α`.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{CosetSet, IntVec, LatticeSubgroup};
use crate::rootsys::{build_root_system, Family, LengthClass, RootSet, RootSystem, RootSystemType};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExtensionDatum {
    pub lambda0: CosetSet,
    pub lambda_s: CosetSet,
    pub lambda_ell: CosetSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_d: Option<CosetSet>,
}

impl ExtensionDatum {
    /// All four sets equal to `Z^k` (`Λ_d` only when `with_d`).
    pub fn untwisted(k: usize, with_d: bool) -> Self {
        let z = CosetSet::full(k);
        ExtensionDatum {
            lambda0: z.clone(),
            lambda_s: z.clone(),
            lambda_ell: z.clone(),
            lambda_d: with_d.then_some(z),
        }
    }

    pub fn k(&self) -> usize {
        self.lambda0.k()
    }

    pub fn for_class(&self, c: LengthClass) -> Option<&CosetSet> {
        match c {
            LengthClass::Short => Some(&self.lambda_s),
            LengthClass::Long => Some(&self.lambda_ell),
            LengthClass::Divisible => self.lambda_d.as_ref(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clause {
    /// shape of the datum: dimensions, presence of `Λ_d`, simply-laced equality
    Structure,
    /// `Λ_β - (β,α^∨)Λ_α ⊆ Λ_{s_α β}`
    ReflectionAxiom,
    /// `0 ∈ Λ_α` for non-divisible `α` and for `Λ_0`
    ZeroMembership,
    /// `Λ_d ≠ ∅`
    NonEmpty,
    /// `Λ_x + 2Λ_x = Λ_x`
    DoublingStable,
    /// family-specific containments between the classes
    Containment,
    /// family-specific subgroup requirements
    Subgroup,
    /// `Λ_ℓ` a subgroup for `B_2`, `C_2`, `BC_2`
    MildAssumption,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub clause: Clause,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, clause: Clause) -> bool {
        self.violations.iter().any(|v| v.clause == clause)
    }

    fn push(&mut self, clause: Clause, detail: impl Into<String>) {
        self.violations.push(Violation { clause, detail: detail.into() });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| format!("{:?}: {}", v.clause, v.detail)).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Checks the extension-datum axioms for a family of sets indexed by a
/// reflection-closed set of roots of `base`.
///
/// `z` gives the set attached to each member; `divisible(i)` says whether
/// member `i` is divisible (exempt from the zero-membership rule). Identical
/// `(set, set, pairing, set)` instances are checked once.
pub fn check_translation_family(
    base: &RootSystem,
    members: &RootSet,
    z: &dyn Fn(usize) -> CosetSet,
    divisible: &dyn Fn(usize) -> bool,
    report: &mut ValidationReport,
) {
    let mut ids: HashMap<CosetSet, usize> = HashMap::new();
    let mut sets: Vec<CosetSet> = vec![];
    let mut id_of = vec![usize::MAX; base.len()];
    for i in members.ones() {
        let s = z(i);
        let next = sets.len();
        let id = *ids.entry(s.clone()).or_insert_with(|| {
            sets.push(s);
            next
        });
        id_of[i] = id;
    }
    let mut seen = HashSet::new();
    for a in members.ones() {
        for b in members.ones() {
            let t = base.refl(a, b);
            if !members.contains(t) {
                report.push(
                    Clause::Structure,
                    format!("index set not reflection closed: s_{:?}({:?})", base.root(a), base.root(b)),
                );
                continue;
            }
            let c = base.cartan(b, a);
            if !seen.insert((id_of[b], id_of[a], c, id_of[t])) {
                continue;
            }
            let lhs = sets[id_of[b]].add_scaled(-c, &sets[id_of[a]]);
            if !lhs.is_subset(&sets[id_of[t]]) {
                report.push(
                    Clause::ReflectionAxiom,
                    format!(
                        "alpha={:?} beta={:?}: {:?} - ({c}) {:?} not in {:?}",
                        base.root(a),
                        base.root(b),
                        sets[id_of[b]],
                        sets[id_of[a]],
                        sets[id_of[t]]
                    ),
                );
            }
        }
    }
    let k = sets.first().map_or(0, |s| s.k());
    let zero = vec![0; k];
    let mut zero_checked = HashSet::new();
    for i in members.ones() {
        let s = &sets[id_of[i]];
        if s.is_empty() {
            report.push(Clause::NonEmpty, format!("empty set at {:?}", base.root(i)));
        } else if !divisible(i) && zero_checked.insert(id_of[i]) && !s.contains(&zero) {
            report.push(Clause::ZeroMembership, format!("0 not in {:?} at {:?}", s, base.root(i)));
        }
    }
    for s in &sets {
        if !s.is_empty() && s.add_scaled(2, s) != *s {
            report.push(Clause::DoublingStable, format!("{s:?} + 2{s:?} differs"));
        }
    }
}

fn require_subset(report: &mut ValidationReport, lhs: CosetSet, rhs: &CosetSet, what: &str) {
    if !lhs.is_subset(rhs) {
        report.push(Clause::Containment, what.to_string());
    }
}

fn require_subgroup(report: &mut ValidationReport, clause: Clause, s: &CosetSet, what: &str) {
    if !s.is_subgroup() {
        report.push(clause, format!("{what} = {s:?} is not a subgroup"));
    }
}

/// Full validation of a class-indexed datum against an irreducible base.
pub fn validate_extension_datum(base: &RootSystem, datum: &ExtensionDatum) -> ValidationReport {
    let mut report = ValidationReport::default();
    let ty = base.root_type();
    let k = datum.k();
    let mut sets = vec![&datum.lambda0, &datum.lambda_s, &datum.lambda_ell];
    sets.extend(datum.lambda_d.as_ref());
    if sets.iter().any(|s| s.k() != k) {
        report.push(Clause::Structure, "sets live in different ambient ranks");
        return report;
    }
    let is_bc = ty.family == Family::BC;
    if is_bc != datum.lambda_d.is_some() {
        report.push(Clause::Structure, "lambda_d must be present exactly for BC bases");
        return report;
    }
    if ty.is_simply_laced() && datum.lambda_s != datum.lambda_ell {
        report.push(Clause::Structure, "simply-laced bases carry a single set (lambda_s = lambda_ell)");
    }
    if !datum.lambda0.contains(&vec![0; k]) {
        report.push(Clause::ZeroMembership, "0 not in lambda_0");
    }
    check_translation_family(
        base,
        &base.all(),
        &|i| datum.for_class(base.class(i)).expect("class present").clone(),
        &|i| base.class(i) == LengthClass::Divisible,
        &mut report,
    );
    if report.has(Clause::NonEmpty) || datum.lambda_s.is_empty() || datum.lambda_ell.is_empty() {
        return report;
    }
    let (ls, ll) = (&datum.lambda_s, &datum.lambda_ell);
    let n = ty.rank;
    match ty.family {
        Family::A | Family::D | Family::E => {
            require_subgroup(&mut report, Clause::Subgroup, ll, "lambda_ell");
        }
        Family::B | Family::C | Family::F => {
            require_subset(&mut report, ll.add_scaled(2, ls), ll, "lambda_ell + 2 lambda_s in lambda_ell");
            require_subset(&mut report, ls.sum(ll), ls, "lambda_s + lambda_ell in lambda_s");
            if (ty.family == Family::B && n >= 3) || ty.family == Family::F {
                require_subgroup(&mut report, Clause::Subgroup, ll, "lambda_ell");
            }
            if matches!(ty.family, Family::C | Family::F) {
                require_subgroup(&mut report, Clause::Subgroup, ls, "lambda_s");
            }
            if n == 2 {
                require_subgroup(&mut report, Clause::MildAssumption, ll, "lambda_ell");
            }
        }
        Family::G => {
            require_subgroup(&mut report, Clause::Subgroup, ls, "lambda_s");
            require_subgroup(&mut report, Clause::Subgroup, ll, "lambda_ell");
            require_subset(&mut report, ll.add_scaled(3, ls), ll, "lambda_ell + 3 lambda_s in lambda_ell");
            require_subset(&mut report, ls.sum(ll), ls, "lambda_s + lambda_ell in lambda_s");
        }
        Family::BC => {
            let ld = datum.lambda_d.as_ref().expect("checked above");
            require_subset(&mut report, ll.add_scaled(2, ls), ll, "lambda_ell + 2 lambda_s in lambda_ell");
            require_subset(&mut report, ls.sum(ll), ls, "lambda_s + lambda_ell in lambda_s");
            require_subset(&mut report, ld.add_scaled(2, ll), ld, "lambda_d + 2 lambda_ell in lambda_d");
            require_subset(&mut report, ll.sum(ld), ll, "lambda_ell + lambda_d in lambda_ell");
            require_subset(&mut report, ld.add_scaled(4, ls), ld, "lambda_d + 4 lambda_s in lambda_d");
            require_subset(&mut report, ls.sum(ld), ls, "lambda_s + lambda_d in lambda_s");
            if n >= 3 {
                require_subgroup(&mut report, Clause::Subgroup, ll, "lambda_ell");
            } else {
                require_subgroup(&mut report, Clause::MildAssumption, ll, "lambda_ell");
            }
        }
    }
    report
}

/// How a system was specified; serializes as a `kind`-tagged object.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemConfig {
    Finite { base: RootSystemType },
    Toroidal { base: RootSystemType, nullity: usize },
    TwistedAffine { pair: RootSystemType, order: u32 },
    Saito { rank: usize },
    Custom { base: RootSystemType, nullity: usize, datum: ExtensionDatum },
}

/// An affine reflection system assembled from a base and an extension datum.
#[derive(Clone, Debug)]
pub struct AffineReflectionSystem {
    config: SystemConfig,
    base: RootSystem,
    datum: ExtensionDatum,
}

fn twisted_data(pair: RootSystemType, order: u32) -> Result<(RootSystemType, ExtensionDatum)> {
    let bad = || Error::Unsupported(format!("({pair}, {order}) is not a twisted affine pair"));
    let z = CosetSet::full(1);
    let mult = |m: i64| CosetSet::of_subgroup(LatticeSubgroup::scaled(1, m));
    let n = pair.rank;
    let (base, ll, ld) = match (pair.family, order) {
        (Family::A, 2) if n % 2 == 0 => (RootSystemType::new(Family::BC, n / 2), z.clone(), Some(CosetSet::coset(LatticeSubgroup::scaled(1, 2), &[1]))),
        (Family::A, 2) => (RootSystemType::new(Family::C, n.div_ceil(2)), mult(2), None),
        (Family::D, 2) if n >= 3 => (RootSystemType::new(Family::B, n - 1), mult(2), None),
        (Family::E, 2) if n == 6 => (RootSystemType::new(Family::F, 4), mult(2), None),
        (Family::D, 3) if n == 4 => (RootSystemType::new(Family::G, 2), mult(3), None),
        _ => return Err(bad()),
    };
    base.check_admissible()?;
    Ok((base, ExtensionDatum { lambda0: z.clone(), lambda_s: z, lambda_ell: ll, lambda_d: ld }))
}

pub fn build_system(config: SystemConfig) -> Result<AffineReflectionSystem> {
    let (ty, datum) = match &config {
        SystemConfig::Finite { base } => (*base, ExtensionDatum::untwisted(0, !base.is_reduced())),
        SystemConfig::Toroidal { base, nullity } => (*base, ExtensionDatum::untwisted(*nullity, !base.is_reduced())),
        SystemConfig::TwistedAffine { pair, order } => twisted_data(*pair, *order)?,
        SystemConfig::Saito { rank } => {
            let l = LatticeSubgroup::from_basis(&[vec![1, 0], vec![0, 2]]).expect("nonsingular");
            let datum = ExtensionDatum {
                lambda0: CosetSet::full(2),
                lambda_s: CosetSet::full(2),
                lambda_ell: CosetSet::of_subgroup(l),
                lambda_d: None,
            };
            (RootSystemType::new(Family::C, *rank), datum)
        }
        SystemConfig::Custom { base, nullity, datum } => {
            if datum.k() != *nullity {
                return Err(Error::Dimension(format!("datum has ambient rank {}, nullity is {nullity}", datum.k())));
            }
            (*base, datum.clone())
        }
    };
    let base = build_root_system(ty)?;
    let report = validate_extension_datum(&base, &datum);
    if !report.is_valid() {
        return Err(Error::InvalidDatum(report));
    }
    Ok(AffineReflectionSystem { config, base, datum })
}

impl AffineReflectionSystem {
    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    pub fn base(&self) -> &RootSystem {
        &self.base
    }

    pub fn base_type(&self) -> RootSystemType {
        self.base.root_type()
    }

    pub fn nullity(&self) -> usize {
        self.datum.k()
    }

    pub fn datum(&self) -> &ExtensionDatum {
        &self.datum
    }

    /// `Λ_α` for the base root with index `i`.
    pub fn lambda(&self, i: usize) -> &CosetSet {
        self.datum.for_class(self.base.class(i)).expect("validated datum has every class")
    }

    pub fn lambda_of_class(&self, c: LengthClass) -> Option<&CosetSet> {
        self.datum.for_class(c)
    }

    /// Some two roots carry different translation sets.
    pub fn is_twisted(&self) -> bool {
        let d = &self.datum;
        d.lambda_s != d.lambda_ell || d.lambda_d.as_ref().is_some_and(|x| x != &d.lambda_s)
    }

    /// Intersection of the periods of the real-root sets.
    pub fn common_period(&self) -> LatticeSubgroup {
        let d = &self.datum;
        let mut p = d.lambda_s.subgroup().intersect(d.lambda_ell.subgroup());
        if let Some(ld) = &d.lambda_d {
            p = p.intersect(ld.subgroup());
        }
        p
    }

    pub fn is_real_root(&self, alpha: &[i64], y: &[i64]) -> bool {
        self.base.index_of(alpha).is_some_and(|i| self.lambda(i).contains(y))
    }

    pub fn is_imaginary_root(&self, y: &[i64]) -> bool {
        self.datum.lambda0.contains(y)
    }

    /// `s_{α⊕y}(β⊕z) = s_α(β) ⊕ (z - (β,α^∨) y)`.
    pub fn reflect_real(&self, a: (usize, &[i64]), b: (usize, &[i64])) -> (usize, IntVec) {
        let c = self.base.cartan(b.0, a.0);
        let t = b.1.iter().zip(a.1).map(|(z, y)| z - c * y).collect();
        (self.base.refl(a.0, b.0), t)
    }
}
