use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use affroot::arsys::{build_system, AffineReflectionSystem, SystemConfig};
use affroot::classify::{classify_all, ClassificationReport, ClassifyRequest};
use affroot::lattice::{enumerate_prime_maximal_subgroups, is_prime, LatticeSubgroup};
use affroot::rootsys::{build_root_system, m_constant, RootSystemType};
use affroot::subroot::{
    enumerate_maximal_periodic, gradient_class, is_closed_subroot, is_maximal_periodic, DescriptorJson,
    GradientClass, SubrootDescriptor,
};
use affroot::toroidal::saito_families;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "affroot", version, about = "Maximal closed subroot systems of affine reflection systems")]
struct Cli {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Roots, highest-root marks, m-constant and maximal closed subsystems of a finite type.
    Roots {
        #[arg(long = "type")]
        ty: String,
    },
    /// Prime-index maximal subgroups of Z^k in Hermite normal form.
    Hnf {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        q: i64,
    },
    /// Classify maximal closed subroot systems.
    Classify {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value_t = 2)]
        qmax: i64,
        /// Restrict to these gradient classes (comma separated).
        #[arg(long, value_enum, value_delimiter = ',')]
        cases: Vec<CaseArg>,
    },
    /// Check a descriptor file for closure and, given a period, maximality.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        period: Option<String>,
    },
    /// Brute-force enumeration modulo a period, compared with the classifier.
    Oracle {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        period: String,
        /// Largest prime for the classifier; defaults to the largest prime dividing the period index.
        #[arg(long)]
        qmax: Option<i64>,
        #[arg(long, default_value_t = 64)]
        bound: usize,
        /// Exit with status 3 when the two sets differ.
        #[arg(long)]
        diff: bool,
    },
    /// The four explicit families for the Saito-type system of type C.
    Saito {
        #[arg(long)]
        rank: usize,
        #[arg(long, default_value_t = 2)]
        qmax: i64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SystemKind {
    Finite,
    Toroidal,
    Twisted,
    Saito,
    Custom,
}

#[derive(Clone, Copy, ValueEnum)]
enum CaseArg {
    Full,
    ProperClosed,
    SemiClosed,
}

#[derive(Args)]
struct SystemArgs {
    #[arg(long, value_enum)]
    system: SystemKind,
    /// Finite base type, e.g. A2 or BC3.
    #[arg(long)]
    base: Option<String>,
    #[arg(long)]
    nullity: Option<usize>,
    /// Twisted pair type, e.g. A3 or D4.
    #[arg(long)]
    pair: Option<String>,
    #[arg(long)]
    order: Option<u32>,
    #[arg(long)]
    rank: Option<usize>,
    /// JSON system configuration for `--system custom`.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
enum Fail {
    #[error(transparent)]
    Core(#[from] affroot::Error),
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {err}")]
    Io { path: PathBuf, err: std::io::Error },
    #[error("malformed JSON in {path}: {err}")]
    Json { path: PathBuf, err: serde_json::Error },
    #[error("oracle and classifier disagree: {0} descriptors differ")]
    Mismatch(usize),
}

impl Fail {
    fn status(&self) -> u8 {
        match self {
            Fail::Core(affroot::Error::CellBound { .. } | affroot::Error::SearchBound(_)) => 4,
            Fail::Mismatch(_) => 3,
            _ => 2,
        }
    }
}

type Out = Result<(), Fail>;

fn need<T>(v: Option<T>, flag: &str) -> Result<T, Fail> {
    v.ok_or_else(|| Fail::Usage(format!("--{flag} is required for this system")))
}

fn parse_type(s: &str) -> Result<RootSystemType, Fail> {
    Ok(s.parse()?)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T, Fail> {
    let text = fs::read_to_string(path).map_err(|err| Fail::Io { path: path.clone(), err })?;
    serde_json::from_str(&text).map_err(|err| Fail::Json { path: path.clone(), err })
}

impl SystemArgs {
    fn build(&self) -> Result<AffineReflectionSystem, Fail> {
        let config = match self.system {
            SystemKind::Finite => SystemConfig::Finite { base: parse_type(need(self.base.as_deref(), "base")?)? },
            SystemKind::Toroidal => SystemConfig::Toroidal {
                base: parse_type(need(self.base.as_deref(), "base")?)?,
                nullity: need(self.nullity, "nullity")?,
            },
            SystemKind::Twisted => SystemConfig::TwistedAffine {
                pair: parse_type(need(self.pair.as_deref(), "pair")?)?,
                order: need(self.order, "order")?,
            },
            SystemKind::Saito => SystemConfig::Saito { rank: need(self.rank, "rank")? },
            SystemKind::Custom => read_json(need(self.config.as_ref(), "config")?)?,
        };
        Ok(build_system(config)?)
    }
}

/// `"2"` is `2Z^k`; `"2,4"` is the diagonal lattice `2Z ⊕ 4Z`.
fn parse_period(s: &str, k: usize) -> Result<LatticeSubgroup, Fail> {
    let bad = || Fail::Usage(format!("invalid period {s:?}"));
    let parts: Vec<i64> = s.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
    if parts.iter().any(|&m| m < 1) {
        return Err(bad());
    }
    match parts.as_slice() {
        [m] => Ok(LatticeSubgroup::scaled(k, *m)),
        diag if diag.len() == k => {
            let rows: Vec<Vec<i64>> =
                (0..k).map(|i| (0..k).map(|j| if i == j { diag[i] } else { 0 }).collect()).collect();
            Ok(LatticeSubgroup::from_basis(&rows)?)
        }
        _ => Err(Fail::Usage(format!("period {s:?} does not have {k} entries"))),
    }
}

fn emit(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn fmt_vec(v: &[i64]) -> String {
    format!("({})", v.iter().map(i64::to_string).collect::<Vec<_>>().join(","))
}

fn print_descriptor(sys: &AffineReflectionSystem, d: &SubrootDescriptor) {
    for e in d.to_json(sys).z {
        println!("    {:<16} {:?}", fmt_vec(&e.root), e.set);
    }
}

fn roots(ty: &str, as_json: bool) -> Out {
    let rs = build_root_system(parse_type(ty)?)?;
    let m = m_constant(rs.root_type())?;
    let (highest, marks) = match rs.highest_root_marks() {
        Ok((h, m)) => (Some(h), Some(m)),
        Err(_) => (None, None),
    };
    let simple: Vec<_> = rs.simple().iter().map(|&i| rs.root(i).clone()).collect();
    let bds: Vec<Vec<_>> = rs.borel_de_siebenthal().iter().map(|s| rs.roots_of(s)).collect();
    if as_json {
        let list: Vec<Value> = (0..rs.len())
            .map(|i| json!({"root": rs.root(i), "class": rs.class(i), "simple_coords": rs.simple_coords(i)}))
            .collect();
        emit(&json!({
            "type": rs.root_type(),
            "roots": list,
            "simple": simple,
            "highest_root": highest,
            "marks": marks,
            "m_constant": m,
            "borel_de_siebenthal": bds,
        }));
        return Ok(());
    }
    println!("type {}: {} roots, m = {m}", rs.root_type(), rs.len());
    println!("simple roots: {}", simple.iter().map(|v| fmt_vec(v)).collect::<Vec<_>>().join(" "));
    if let (Some(h), Some(c)) = (&highest, &marks) {
        println!("highest root {} marks {}", fmt_vec(h), fmt_vec(c));
    }
    println!("roots:");
    for i in 0..rs.len() {
        println!("  {:<20} {} {}", fmt_vec(rs.root(i)), rs.class(i).symbol(), fmt_vec(rs.simple_coords(i)));
    }
    println!("maximal closed subsystems up to Weyl conjugacy: {}", bds.len());
    for (i, s) in bds.iter().enumerate() {
        println!("  [{i}] {} roots: {}", s.len(), s.iter().map(|v| fmt_vec(v)).collect::<Vec<_>>().join(" "));
    }
    Ok(())
}

fn hnf(k: usize, q: i64, as_json: bool) -> Out {
    if !is_prime(q) {
        return Err(affroot::Error::NotPrime(q).into());
    }
    let hs = enumerate_prime_maximal_subgroups(k, q)?;
    if as_json {
        emit(&json!({"k": k, "q": q, "count": hs.len(), "subgroups": hs}));
        return Ok(());
    }
    println!("k = {k}, q = {q}: {} subgroups", hs.len());
    for (i, h) in hs.iter().enumerate() {
        println!("[{i}]");
        for row in h.basis() {
            println!("  {}", row.iter().map(|x| format!("{x:>3}")).collect::<String>());
        }
    }
    Ok(())
}

fn print_report(sys: &AffineReflectionSystem, rep: &ClassificationReport, as_json: bool) {
    if as_json {
        emit(&serde_json::to_value(rep).expect("serializable"));
        return;
    }
    let h = &rep.header;
    println!("system {}", serde_json::to_string(&h.system).expect("serializable"));
    println!("q_max {}: {} descriptors", h.q_max, rep.len());
    for n in &h.notes {
        println!("note: {n}");
    }
    for (i, e) in rep.entries.iter().enumerate() {
        let rules: Vec<_> = e.provenance.iter().map(|p| p.rule.as_str()).collect::<BTreeSet<_>>().into_iter().collect();
        println!("[{i}] {:?} via {}", e.gradient, rules.join(", "));
        print_descriptor(sys, &e.descriptor);
    }
}

fn classify(system: &SystemArgs, qmax: i64, cases: &[CaseArg], as_json: bool) -> Out {
    let sys = system.build()?;
    let mut req = ClassifyRequest::new(&sys, qmax);
    if !cases.is_empty() {
        let set: BTreeSet<GradientClass> = cases
            .iter()
            .map(|c| match c {
                CaseArg::Full => GradientClass::Full,
                CaseArg::ProperClosed => GradientClass::ProperClosed,
                CaseArg::SemiClosed => GradientClass::SemiClosed,
            })
            .collect();
        req = req.with_cases(set);
    }
    let rep = classify_all(&req)?;
    print_report(&sys, &rep, as_json);
    Ok(())
}

fn verify(input: &PathBuf, period: Option<&str>, as_json: bool) -> Out {
    let dj: DescriptorJson = read_json(input)?;
    let (sys, d) = SubrootDescriptor::from_json(&dj)?;
    let closure = is_closed_subroot(&sys, &d);
    let grad = d.gradient(&sys);
    let flags = sys.base().classify_subset(&grad);
    let class = if closure.is_closed { Some(gradient_class(&sys, &d)?) } else { None };
    let maximal = match period {
        Some(p) => {
            let m = parse_period(p, sys.nullity())?;
            if !d.is_periodic_under(&m) {
                return Err(affroot::Error::NotPeriod(format!("descriptor is not periodic under {:?}", m.basis())).into());
            }
            Some(is_maximal_periodic(&sys, &d, &m)?)
        }
        None => None,
    };
    if as_json {
        emit(&json!({
            "subroot": closure.is_subroot,
            "closed": closure.is_closed,
            "witness": closure.witness,
            "gradient": flags,
            "gradient_class": class,
            "maximal": maximal,
        }));
        return Ok(());
    }
    println!("subroot: {}", closure.is_subroot);
    println!("closed: {}", closure.is_closed);
    if let Some(w) = &closure.witness {
        println!("witness: {:?} {} + {} , {} + {}", w.kind, fmt_vec(&w.alpha), fmt_vec(&w.y), fmt_vec(&w.beta), fmt_vec(&w.z));
    }
    println!("gradient subroot: {}", flags.is_subroot);
    println!("gradient closed: {}", flags.is_closed);
    println!("gradient semi-closed: {}", flags.is_semi_closed);
    println!("gradient maximal closed: {}", flags.is_maximal_closed);
    println!("gradient maximal semi-closed: {}", flags.is_maximal_semi_closed);
    if let Some(c) = class {
        println!("gradient class: {c:?}");
    }
    if let Some(m) = maximal {
        println!("maximal: {m}");
    }
    Ok(())
}

fn largest_prime_factor(mut n: i64) -> i64 {
    let mut best = 2;
    let mut p = 2;
    while p * p <= n {
        while n % p == 0 {
            best = p;
            n /= p;
        }
        p += 1;
    }
    if n > 1 {
        best = best.max(n);
    }
    best
}

fn oracle(system: &SystemArgs, period: &str, qmax: Option<i64>, bound: usize, diff: bool, as_json: bool) -> Out {
    let sys = system.build()?;
    let m = parse_period(period, sys.nullity())?;
    let found = enumerate_maximal_periodic(&sys, &m, bound)?;
    let q = qmax.unwrap_or_else(|| largest_prime_factor(m.det().abs()));
    let ours: BTreeSet<SubrootDescriptor> = classify_all(&ClassifyRequest::new(&sys, q))?
        .descriptors()
        .into_iter()
        .filter(|d| d.is_periodic_under(&m))
        .collect();
    let theirs: BTreeSet<SubrootDescriptor> = found.iter().cloned().collect();
    let only_oracle: Vec<_> = theirs.difference(&ours).collect();
    let only_classifier: Vec<_> = ours.difference(&theirs).collect();
    if as_json {
        let js = |v: &[&SubrootDescriptor]| v.iter().map(|d| d.to_json(&sys).z).collect::<Vec<_>>();
        let all: Vec<_> = found.iter().map(|d| d.to_json(&sys).z).collect();
        emit(&json!({
            "system": sys.config(),
            "period": m,
            "q_max": q,
            "oracle": all,
            "only_oracle": js(&only_oracle),
            "only_classifier": js(&only_classifier),
        }));
    } else {
        println!("period {:?}, q_max {q}: oracle found {} descriptors", m.basis(), found.len());
        for (i, d) in found.iter().enumerate() {
            println!("[{i}]");
            print_descriptor(&sys, d);
        }
        println!("only in oracle: {}", only_oracle.len());
        for d in &only_oracle {
            print_descriptor(&sys, d);
        }
        println!("only in classifier: {}", only_classifier.len());
        for d in &only_classifier {
            print_descriptor(&sys, d);
        }
    }
    let n = only_oracle.len() + only_classifier.len();
    if diff && n > 0 {
        return Err(Fail::Mismatch(n));
    }
    Ok(())
}

fn saito(rank: usize, qmax: i64, as_json: bool) -> Out {
    let sys = build_system(SystemConfig::Saito { rank })?;
    let rep = saito_families(rank, qmax)?;
    print_report(&sys, &rep, as_json);
    Ok(())
}

fn run(cli: Cli) -> Out {
    let j = cli.json;
    match &cli.cmd {
        Cmd::Roots { ty } => roots(ty, j),
        Cmd::Hnf { k, q } => hnf(*k, *q, j),
        Cmd::Classify { system, qmax, cases } => classify(system, *qmax, cases, j),
        Cmd::Verify { input, period } => verify(input, period.as_deref(), j),
        Cmd::Oracle { system, period, qmax, bound, diff } => oracle(system, period, *qmax, *bound, *diff, j),
        Cmd::Saito { rank, qmax } => saito(*rank, *qmax, j),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.status())
        }
    }
}
