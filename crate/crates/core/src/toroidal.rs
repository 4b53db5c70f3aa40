//! Untwisted toroidal systems `{α ⊕ Z^k}` over a reduced base.
//!
//! Full-gradient maximal closed subroot systems correspond to triples
//! `(q, b, U)`: a prime `q`, offsets `b ∈ [0, q-1]^n` on the simple roots and
//! a Hermite normal form `U` of determinant `q`. The system attached to a
//! triple is `{α ⊕ (b_α e_ℓ + rowspan U)}` where `ℓ` is the row of `U` equal
//! to `q e_ℓ` and `b_α = Σ a_i b_i` for `α = Σ a_i α_i`.
//!
//! Also here: the four families of maximal closed subroot systems of Saito's
//! nullity-2 system over `C_n`.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::arsys::{build_system, AffineReflectionSystem, ExtensionDatum, SystemConfig};
use crate::classify::{eps_root, ClassificationReport, ClassifyRequest, Collector};
use crate::error::{Error, Result};
use crate::lattice::{enumerate_prime_maximal_subgroups, is_prime, primes_up_to, CosetSet, IntVec, LatticeSubgroup};
use crate::rootsys::LengthClass;
use crate::subroot::{integer_coordinates, SubrootDescriptor};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawTriple")]
pub struct TripleDescriptor {
    q: i64,
    b: Vec<i64>,
    #[serde(rename = "U")]
    u: LatticeSubgroup,
}

#[derive(Deserialize)]
struct RawTriple {
    q: i64,
    b: Vec<i64>,
    #[serde(rename = "U")]
    u: LatticeSubgroup,
}

impl TryFrom<RawTriple> for TripleDescriptor {
    type Error = Error;

    fn try_from(r: RawTriple) -> Result<Self> {
        TripleDescriptor::new(r.q, r.b, r.u)
    }
}

impl TripleDescriptor {
    /// Offsets are reduced into `[0, q-1]`.
    pub fn new(q: i64, b: Vec<i64>, u: LatticeSubgroup) -> Result<Self> {
        if !is_prime(q) {
            return Err(Error::NotTriple(format!("q = {q} is not prime")));
        }
        if u.det() != q {
            return Err(Error::NotTriple(format!("det U = {} differs from q = {q}", u.det())));
        }
        let b = b.into_iter().map(|x| x.rem_euclid(q)).collect();
        Ok(TripleDescriptor { q, b, u })
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    pub fn b(&self) -> &[i64] {
        &self.b
    }

    pub fn u(&self) -> &LatticeSubgroup {
        &self.u
    }

    /// Index of the row equal to `q e_ℓ`.
    pub fn ell(&self) -> usize {
        let basis = self.u.basis();
        (0..basis.len()).find(|&i| basis[i][i] == self.q).expect("prime determinant HNF has a q pivot")
    }
}

fn require_toroidal(sys: &AffineReflectionSystem) -> Result<()> {
    if !sys.base().is_reduced() {
        return Err(Error::NotTriple(format!("{} is not reduced", sys.base_type())));
    }
    let k = sys.nullity();
    if k == 0 || *sys.datum() != ExtensionDatum::untwisted(k, false) {
        return Err(Error::NotTriple("system is not untwisted toroidal".into()));
    }
    Ok(())
}

pub fn triple_to_psi(sys: &AffineReflectionSystem, t: &TripleDescriptor) -> Result<SubrootDescriptor> {
    require_toroidal(sys)?;
    let base = sys.base();
    if t.b.len() != base.simple().len() || t.u.k() != sys.nullity() {
        return Err(Error::NotTriple(format!("{t:?} does not fit {}", sys.base_type())));
    }
    let ell = t.ell();
    let entries = (0..base.len()).map(|i| {
        let ba: i64 = base.simple_coords(i).iter().zip(&t.b).map(|(a, b)| a * b).sum();
        let mut v = vec![0; t.u.k()];
        v[ell] = ba;
        (i, CosetSet::coset(t.u.clone(), &v))
    });
    SubrootDescriptor::new(sys, entries)
}

pub fn psi_to_triple(sys: &AffineReflectionSystem, d: &SubrootDescriptor) -> Result<TripleDescriptor> {
    require_toroidal(sys)?;
    let base = sys.base();
    if d.gradient(sys) != base.all() {
        return Err(Error::NotTriple("gradient is not the whole base".into()));
    }
    if d.is_full(sys) {
        return Err(Error::NotTriple("descriptor is the whole system".into()));
    }
    let first = d.get(base.simple()[0]).expect("full gradient");
    let u = first.subgroup().clone();
    let q = u.det();
    if !is_prime(q) || d.z().values().any(|s| s.subgroup() != &u || s.reps().len() != 1) {
        return Err(Error::NotTriple("translation sets are not cosets of one prime-index subgroup".into()));
    }
    let probe = TripleDescriptor::new(q, vec![0; base.simple().len()], u.clone())?;
    let ell = probe.ell();
    let b = base.simple().iter().map(|&i| d.get(i).expect("full gradient").reps()[0][ell]).collect();
    let t = TripleDescriptor::new(q, b, u)?;
    if triple_to_psi(sys, &t)? != *d {
        return Err(Error::NotTriple("translation offsets are not linear in the root".into()));
    }
    Ok(t)
}

/// All triples for a base with `n` simple roots, nullity `k` and prime `q`,
/// ordered by `U` and then by `b`.
pub fn enumerate_triples(n: usize, k: usize, q: i64) -> Result<Vec<TripleDescriptor>> {
    let mut out = vec![];
    for u in enumerate_prime_maximal_subgroups(k, q)? {
        for b in offsets(n, q) {
            out.push(TripleDescriptor::new(q, b, u.clone())?);
        }
    }
    Ok(out)
}

fn lat(rows: &[[i64; 2]]) -> LatticeSubgroup {
    let rows: Vec<IntVec> = rows.iter().map(|r| r.to_vec()).collect();
    LatticeSubgroup::from_basis(&rows).expect("nonsingular")
}

fn b_of(sys: &AffineReflectionSystem, b: &[i64], i: usize) -> i64 {
    sys.base().simple_coords(i).iter().zip(b).map(|(a, x)| a * x).sum()
}

fn offsets(n: usize, q: i64) -> impl Iterator<Item = Vec<i64>> {
    let total = (q as u64).pow(n as u32);
    (0..total).map(move |code| {
        let mut c = code;
        let mut b = vec![0i64; n];
        for x in b.iter_mut().rev() {
            *x = (c % q as u64) as i64;
            c /= q as u64;
        }
        b
    })
}

/// The four families for Saito's system over `C_n`, for primes up to
/// `q_max`.
pub fn saito_families(n: usize, q_max: i64) -> Result<ClassificationReport> {
    let sys = build_system(SystemConfig::Saito { rank: n })?;
    let req = ClassifyRequest::new(&sys, q_max);
    if q_max < 2 {
        return Err(Error::Unsupported(format!("q_max = {q_max} is below 2")));
    }
    let base = sys.base();
    let mut out = Collector::new(&sys);
    let ll = lat(&[[1, 0], [0, 2]]);
    let short = base.class_set(LengthClass::Short);

    // (1) τ on the D_n basis of the short roots, valued in Z²/Λ_ℓ
    let mut dn: Vec<usize> = (0..n - 1).map(|i| eps_root(&sys, &[(i, 1), (i + 1, -1)])).collect();
    dn.push(eps_root(&sys, &[(n - 2, 1), (n - 1, 1)]));
    let vecs: Vec<IntVec> = dn.iter().map(|&i| base.root(i).clone()).collect();
    for code in 0u64..1 << n {
        let t: Vec<i64> = (0..n).map(|i| (code >> i & 1) as i64).collect();
        if t[n - 2] == t[n - 1] {
            continue;
        }
        let mut entries = vec![];
        for i in short.ones() {
            let c = integer_coordinates(&vecs, base.root(i)).expect("short roots span D_n");
            let v: i64 = c.iter().zip(&t).map(|(a, b)| a * b).sum();
            entries.push((i, CosetSet::coset(ll.clone(), &[0, v])));
        }
        out.emit(entries, "saito_family_1", json!({"tau": t}))?;
    }

    for q in primes_up_to(q_max) {
        // (2) H = Z(q,0) + Z(0,1)
        let h = lat(&[[q, 0], [0, 1]]);
        let hl = lat(&[[q, 0], [0, 2]]);
        for b in offsets(n, q) {
            let entries = (0..base.len()).map(|i| {
                let g = if base.class(i) == LengthClass::Short { &h } else { &hl };
                (i, CosetSet::coset(g.clone(), &[b_of(&sys, &b, i), 0]))
            });
            out.emit(entries, "saito_family_2", json!({"q": q, "b": b}))?;
        }
        // (3) H = Z(1,x) + Z(0,q)
        for x in 0..q {
            let h = lat(&[[1, x], [0, q]]);
            let h2 = h.scale(2);
            for b in offsets(n, q) {
                let parity = b[n - 1].rem_euclid(2);
                if q == 2 && x == 0 && parity == 1 {
                    continue;
                }
                let cd: Vec<IntVec> = [[0, 0], [0, 1], [1, 0], [1, 1]]
                    .iter()
                    .filter(|[c, d]| (c * x + d * q).rem_euclid(2) == parity)
                    .map(|[c, d]| vec![*c, c * x + d * q])
                    .collect();
                let mut entries = vec![];
                for i in 0..base.len() {
                    let off = vec![0, b_of(&sys, &b, i)];
                    let z = if base.class(i) == LengthClass::Short {
                        CosetSet::coset(h.clone(), &off)
                    } else {
                        CosetSet::from_reps(h2.clone(), cd.iter().map(|r| vec![r[0], r[1] + off[1]]))
                    };
                    entries.push((i, z));
                }
                out.emit(entries, "saito_family_3", json!({"q": q, "x": x, "b": b}))?;
            }
        }
    }

    // (4) lifts of maximal closed subsystems meeting the short roots
    for s in base.borel_de_siebenthal_expanded() {
        if s.is_disjoint(&short) {
            continue;
        }
        let roots: Vec<&IntVec> = s.ones().map(|i| base.root(i)).collect();
        out.emit(s.ones().map(|i| (i, sys.lambda(i).clone())), "saito_family_4", json!({"roots": roots}))?;
    }
    out.finish(&req)
}
