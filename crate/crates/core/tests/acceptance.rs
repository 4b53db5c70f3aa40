//! Acceptance suite. Every check is exact; each criterion prints one line.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use affroot::arsys::{build_system, validate_extension_datum, AffineReflectionSystem, SystemConfig};
use affroot::classify::{classify_all, classify_full_gradient, classify_semi_closed, ClassifyRequest};
use affroot::lattice::{enumerate_prime_maximal_subgroups, LatticeSubgroup};
use affroot::rootsys::{build_root_system, LengthClass, RootSet, RootSystem, RootSystemType};
use affroot::subroot::{
    enumerate_maximal_periodic, gradient_class, is_closed_subroot, shifted_datum_report, GradientClass, SubrootDescriptor,
    DEFAULT_CELL_BOUND,
};
use affroot::toroidal::{enumerate_triples, psi_to_triple, saito_families, triple_to_psi};

type Outcome = Result<String, String>;

fn ty(s: &str) -> RootSystemType {
    s.parse().expect("type name")
}

fn sys(config: SystemConfig) -> AffineReflectionSystem {
    build_system(config).expect("built-in system")
}

fn toroidal(s: &str, k: usize) -> AffineReflectionSystem {
    sys(SystemConfig::Toroidal { base: ty(s), nullity: k })
}

fn twisted(s: &str, order: u32) -> AffineReflectionSystem {
    sys(SystemConfig::TwistedAffine { pair: ty(s), order })
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn hnf_counting() -> Outcome {
    for k in 1..=4 {
        for q in [2i64, 3, 5] {
            let n = enumerate_prime_maximal_subgroups(k, q).map_err(err)?.len() as i64;
            let want = (q.pow(k as u32) - 1) / (q - 1);
            ensure(n == want, || format!("k={k} q={q}: {n} != {want}"))?;
        }
    }
    let got: BTreeSet<Vec<Vec<i64>>> =
        enumerate_prime_maximal_subgroups(2, 2).map_err(err)?.iter().map(|h| h.basis().to_vec()).collect();
    let want: BTreeSet<Vec<Vec<i64>>> =
        [vec![vec![1, 0], vec![0, 2]], vec![vec![1, 1], vec![0, 2]], vec![vec![2, 0], vec![0, 1]]].into();
    ensure(got == want, || format!("k=2 q=2 list {got:?}"))?;
    Ok("counts for k<=4, q in {2,3,5}; k=2 q=2 list exact".into())
}

/// Maximal closed symmetric proper subsets by exhaustive subset scan.
fn brute_force_maximal(rs: &RootSystem) -> BTreeSet<Vec<usize>> {
    let mut pairs = vec![];
    for i in 0..rs.len() {
        let j = rs.neg(i);
        if i < j {
            pairs.push((i, j));
        }
    }
    let mut closed: Vec<RootSet> = vec![];
    for mask in 1u64..(1 << pairs.len()) - 1 {
        let mut s = rs.empty_set();
        for (b, &(i, j)) in pairs.iter().enumerate() {
            if mask >> b & 1 == 1 {
                s.insert(i);
                s.insert(j);
            }
        }
        if rs.is_closed(&s) {
            closed.push(s);
        }
    }
    closed
        .iter()
        .filter(|s| !closed.iter().any(|t| t != *s && s.is_subset(t)))
        .map(|s| s.ones().collect())
        .collect()
}

fn finite_bds() -> Outcome {
    for name in ["A2", "A3", "B2", "B3", "C3", "G2", "BC2", "BC3"] {
        let rs = build_root_system(ty(name)).map_err(err)?;
        let bds: BTreeSet<Vec<usize>> = rs.borel_de_siebenthal_expanded().iter().map(|s| s.ones().collect()).collect();
        let brute = brute_force_maximal(&rs);
        ensure(bds == brute, || format!("{name}: {} vs {} systems", bds.len(), brute.len()))?;
    }
    Ok("8 types agree".into())
}

fn periodic_part(r: &BTreeSet<SubrootDescriptor>, m: &LatticeSubgroup) -> BTreeSet<SubrootDescriptor> {
    r.iter().filter(|d| d.is_periodic_under(m)).cloned().collect()
}

fn toroidal_oracle() -> Outcome {
    let mut sizes = vec![];
    for base in ["A2", "B2"] {
        for k in [1, 2] {
            let s = toroidal(base, k);
            let m = LatticeSubgroup::scaled(k, 2);
            let oracle: BTreeSet<_> = enumerate_maximal_periodic(&s, &m, DEFAULT_CELL_BOUND).map_err(err)?.into_iter().collect();
            let report = classify_all(&ClassifyRequest::new(&s, 2)).map_err(err)?;
            let ours = periodic_part(&report.descriptors(), &m);
            ensure(ours == oracle, || format!("{base} k={k}: {} vs oracle {}", ours.len(), oracle.len()))?;
            if base == "A2" && k == 1 {
                let count = |g| report.entries.iter().filter(|e| e.gradient == g).count();
                ensure(report.len() == 7 && count(GradientClass::Full) == 4 && count(GradientClass::ProperClosed) == 3, || {
                    format!("A2 k=1 gives {} systems", report.len())
                })?;
            }
            sizes.push(format!("{base}/k{k}={}", oracle.len()));
        }
    }
    Ok(sizes.join(" "))
}

fn triple_bijection() -> Outcome {
    for base in ["A2", "B2"] {
        for k in [1, 2] {
            let s = toroidal(base, k);
            for q in [2i64, 3] {
                let triples = enumerate_triples(2, k, q).map_err(err)?;
                let want = q * q * (q.pow(k as u32) - 1) / (q - 1);
                ensure(triples.len() as i64 == want, || format!("{base} k={k} q={q}: {} triples", triples.len()))?;
                let mut from_triples = BTreeSet::new();
                for t in &triples {
                    let d = triple_to_psi(&s, t).map_err(err)?;
                    let back = psi_to_triple(&s, &d).map_err(err)?;
                    ensure(&back == t, || format!("round trip {t:?} -> {back:?}"))?;
                    from_triples.insert(d);
                }
                let report = classify_full_gradient(&ClassifyRequest::new(&s, q)).map_err(err)?;
                let engine: BTreeSet<_> = report
                    .descriptors()
                    .into_iter()
                    .filter(|d| d.z().values().all(|z| z.subgroup().det() == q))
                    .collect();
                ensure(engine == from_triples, || format!("{base} k={k} q={q}: engine and triples differ"))?;
            }
        }
    }
    Ok("A2/B2, k<=2, q in {2,3}".into())
}

fn twisted_semi_closed() -> Outcome {
    let s = twisted("A3", 2);
    let r = classify_semi_closed(&ClassifyRequest::new(&s, 2)).map_err(err)?;
    ensure(r.len() == 2, || format!("{} semi-closed systems", r.len()))?;
    let m = LatticeSubgroup::scaled(1, 2);
    let oracle = enumerate_maximal_periodic(&s, &m, DEFAULT_CELL_BOUND).map_err(err)?;
    let semi: BTreeSet<_> = oracle
        .into_iter()
        .filter(|d| gradient_class(&s, d).ok() == Some(GradientClass::SemiClosed))
        .collect();
    ensure(semi == r.descriptors(), || "engine and oracle semi-closed sets differ".into())?;
    let base = s.base();
    let idx = |v: &[i64]| base.index_of(v).expect("root");
    let even = affroot::lattice::CosetSet::of_subgroup(m.clone());
    let odd = affroot::lattice::CosetSet::coset(m.clone(), &[1]);
    let psi2 = SubrootDescriptor::new(
        &s,
        [
            (idx(&[2, -2]), even.clone()),
            (idx(&[-2, 2]), even),
            (idx(&[2, 2]), odd.clone()),
            (idx(&[-2, -2]), odd),
        ],
    )
    .map_err(err)?;
    ensure(semi.contains(&psi2), || "the two-coset pattern is missing from the oracle output".into())?;
    Ok("2 systems; pattern found among oracle output".into())
}

fn saito() -> Outcome {
    let r = saito_families(2, 2).map_err(err)?;
    let s = sys(SystemConfig::Saito { rank: 2 });
    let all = classify_all(&ClassifyRequest::new(&s, 2)).map_err(err)?;
    ensure(r.descriptors() == all.descriptors(), || format!("families {} vs engines {}", r.len(), all.len()))?;
    let mut family3 = 0;
    for e in &r.entries {
        for p in e.provenance.iter().filter(|p| p.rule == "saito_family_3") {
            family3 += 1;
            if p.params["q"] == 2 && p.params["x"] == 0 {
                let b_n = p.params["b"][1].as_i64().ok_or("b missing")?;
                ensure(b_n % 2 == 0, || format!("odd b_n in {p:?}"))?;
            }
        }
    }
    Ok(format!("{} systems, {family3} from family 3", r.len()))
}

fn builtin_configs() -> Vec<SystemConfig> {
    let mut out = vec![];
    for name in ["A2", "A3", "B2", "B3", "C2", "C3", "D4", "G2", "F4", "E6", "BC2", "BC3"] {
        out.push(SystemConfig::Finite { base: ty(name) });
        for k in [1, 2] {
            out.push(SystemConfig::Toroidal { base: ty(name), nullity: k });
        }
    }
    for (pair, order) in [("A3", 2), ("A4", 2), ("A5", 2), ("D3", 2), ("D4", 2), ("D5", 2), ("E6", 2), ("D4", 3)] {
        out.push(SystemConfig::TwistedAffine { pair: ty(pair), order });
    }
    for n in [2, 3, 4] {
        out.push(SystemConfig::Saito { rank: n });
    }
    out
}

fn axioms() -> Outcome {
    let configs = builtin_configs();
    for c in &configs {
        let s = sys(c.clone());
        let report = validate_extension_datum(s.base(), s.datum());
        ensure(report.is_valid(), || format!("{c:?}: {report}"))?;
    }
    let matrix: Vec<(AffineReflectionSystem, i64)> = vec![
        (toroidal("A2", 1), 3),
        (toroidal("B2", 2), 2),
        (toroidal("C2", 2), 2),
        (toroidal("G2", 1), 3),
        (toroidal("B3", 1), 2),
        (toroidal("C3", 1), 2),
        (toroidal("BC2", 1), 3),
        (twisted("A3", 2), 3),
        (twisted("A4", 2), 2),
        (twisted("A5", 2), 2),
        (twisted("D3", 2), 3),
        (twisted("D4", 2), 2),
        (twisted("D4", 3), 2),
        (twisted("E6", 2), 2),
        (sys(SystemConfig::Saito { rank: 2 }), 3),
        (sys(SystemConfig::Saito { rank: 3 }), 2),
    ];
    let mut total = 0;
    for (s, q) in &matrix {
        let name = format!("{:?}", s.config());
        let r = classify_all(&ClassifyRequest::new(s, *q)).map_err(err)?;
        for e in &r.entries {
            let d = &e.descriptor;
            ensure(is_closed_subroot(s, d).is_closed, || format!("{name}: output not closed"))?;
            for (&i, z) in d.z() {
                ensure(z.is_subset(s.lambda(i)), || format!("{name}: Z outside its real-root set"))?;
            }
            let g = gradient_class(s, d).map_err(|e| format!("{name}: {e}"))?;
            ensure(g == e.gradient, || format!("{name}: gradient class mismatch"))?;
            let shifted = shifted_datum_report(s, d).map_err(|e| format!("{name}: {e}"))?;
            ensure(shifted.is_valid(), || format!("{name}: shifted family fails: {shifted}"))?;
            total += 1;
        }
    }
    Ok(format!("{} built-in data valid; {total} outputs checked over {} systems", configs.len(), matrix.len()))
}

fn sum_table() -> Outcome {
    use LengthClass::{Divisible as D, Long as L, Short as S};
    let table: Vec<(&str, Vec<(LengthClass, LengthClass, LengthClass)>)> = vec![
        ("B3", vec![(S, S, L), (S, L, S), (L, L, L)]),
        ("C3", vec![(S, S, L), (S, L, S), (S, S, S)]),
        ("F4", vec![(S, S, L), (S, L, S), (S, S, S), (L, L, L)]),
        ("G2", vec![(S, S, L), (S, L, S), (S, S, S), (L, L, L)]),
        ("BC3", vec![(S, S, L), (S, L, S), (L, L, L), (L, L, D), (L, D, L), (S, D, S), (S, S, D)]),
        ("B2", vec![(S, S, L), (S, L, S)]),
        ("BC2", vec![(S, S, L), (S, L, S), (L, L, D), (L, D, L), (S, D, S), (S, S, D)]),
    ];
    for (name, want) in table {
        let got = build_root_system(ty(name)).map_err(err)?.sum_profile();
        let want: BTreeSet<_> = want.into_iter().collect();
        ensure(got == want, || format!("{name}: {got:?}"))?;
    }
    Ok("B3 C3 F4 G2 BC3 plus the n=2 starred cases".into())
}

fn main() -> ExitCode {
    let criteria: [(u32, Duration, fn() -> Outcome); 8] = [
        (1, Duration::from_secs(1), hnf_counting),
        (2, Duration::from_secs(60), finite_bds),
        (3, Duration::from_secs(300), toroidal_oracle),
        (4, Duration::from_secs(10), triple_bijection),
        (5, Duration::from_secs(10), twisted_semi_closed),
        (6, Duration::from_secs(60), saito),
        (7, Duration::from_secs(120), axioms),
        (8, Duration::from_secs(5), sum_table),
    ];
    let mut failed = 0;
    for (n, budget, f) in criteria {
        let start = Instant::now();
        let outcome = f();
        let t = start.elapsed();
        let outcome = match outcome {
            Ok(s) if t > budget => Err(format!("{s}; took {t:?}, budget {budget:?}")),
            o => o,
        };
        match outcome {
            Ok(s) => println!("criterion {n}: PASS ({s}) [{} ms]", t.as_millis()),
            Err(s) => {
                failed += 1;
                println!("criterion {n}: FAIL ({s}) [{} ms]", t.as_millis());
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
