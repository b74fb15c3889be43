//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria 4 and 8 do not hold as stated. For those the run checks that they fail for
//! the documented reason and that the corrected claim holds; any other outcome fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use fmc::bridge::cbv::{encode_cbv, parse_cbv};
use fmc::bridge::lambda::{lambda_beta_eta_eq, parse_lambda, print_lambda, random_lambda};
use fmc::bridge::translate::{close_over_context, fmc_to_lambda, lambda_to_fmc};
use fmc::equivalence::{inhabitants, machine_equiv, random_derived, random_instance, DerivedLaw, EqnLaw, TestBudget};
use fmc::gen::{random_open, random_term, random_typed, rng, Enumerator, GenConfig};
use fmc::machine::{run, DeltaRegistry, Memory, RunError};
use fmc::measure::{
    apply, interpret, least_input_memory, least_term_values, measure, measure_variant, measure_variant_on, observe,
    sample_memory, SnMemory, Valuation,
};
use fmc::parser::{parse_memory, parse_term, parse_type, print_term};
use fmc::reduction::{beta_redexes, confluent_on, normalize, perm_eq, reduce_at, reduction_graph, ReductionGraph, Strategy};
use fmc::syntax::{alpha_eq, compose, free_vars, int, substitute, Loc, Name, Term};
use fmc::types::{check, ground_type, infer, Context, MemoryType, SimpleType};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn corpus_dir() -> String {
    format!("{}/../../docs/corpus", env!("CARGO_MANIFEST_DIR"))
}

fn corpus(f: &str) -> String {
    let src = std::fs::read_to_string(format!("{}/{f}", corpus_dir())).unwrap();
    src.lines().filter(|l| !l.trim_start().starts_with('#')).collect::<Vec<_>>().join("\n")
}

fn cfg(max_size: usize, locs: &[&str], consts: bool) -> GenConfig {
    let locs = locs.iter().map(|l| if *l == "λ" { Loc::Main } else { Loc::named(l) }).collect();
    GenConfig { max_size, locs, consts }
}

// ---- 1, 2: machine goldens

fn c1() -> Outcome {
    let t = parse_term(&corpus("ex2.fmc")).unwrap();
    let mem = parse_memory("rnd = 9 7 3 ; c = 5").unwrap();
    let start = Instant::now();
    let r = run(&mem, &t, &DeltaRegistry::default(), 1000);
    let took = start.elapsed();
    let Ok(r) = r else { return outcome(false, format!("{r:?}")) };
    let c = r.memory.stack(&Loc::named("c")).items() == [int(8)];
    let main = r.memory.stack(&Loc::Main).is_empty();
    let rnd = r.memory.stack(&Loc::named("rnd")).items() == [int(9), int(7)];
    let ok = c && main && rnd && r.steps == 7 && took < Duration::from_millis(10);
    outcome(ok, format!("final {}, {} transitions, {took:?}", r.memory, r.steps))
}

fn c2() -> Outcome {
    let t = parse_term("[4].[3].[2].+.mul.[1].+").unwrap();
    match run(&Memory::new(), &t, &DeltaRegistry::default(), 100) {
        Ok(r) => outcome(r.memory.stack(&Loc::Main).items() == [int(21)] && r.memory.locations().len() == 1, r.memory.to_string()),
        Err(e) => outcome(false, e.to_string()),
    }
}

// ---- 3: typing goldens and mutations

fn c3() -> Outcome {
    let ctx = Context::new();
    let goldens = [("ex2.fmc", "rnd(Z) c(Z) > c(Z)"), ("out_counter.fmc", "> out(Z Z Z) Z")];
    for (f, ty) in goldens {
        let t = parse_term(&corpus(f)).unwrap();
        if let Err(e) = check(&ctx, &t, &parse_type(ty).unwrap()) {
            return outcome(false, format!("{f} : {ty} rejected: {e}"));
        }
    }
    // swapped locations and dropped pops, each must be rejected with a node position
    let mutants = [
        ("c<x>.[x].c<y>.[y].+.<z>.[z]c", "rnd(Z) c(Z) > c(Z)"),
        ("rnd<x>.[x].rnd<y>.[y].+.<z>.[z]c", "rnd(Z) c(Z) > c(Z)"),
        ("rnd<x>.[x].c<y>.[y].+.<z>.[z]rnd", "rnd(Z) c(Z) > c(Z)"),
        ("rnd<x>.[x].[y].+.<z>.[z]c", "rnd(Z) c(Z) > c(Z)"),
        ("rnd<x>.[x].c<y>.[y].+.[z]c", "rnd(Z) c(Z) > c(Z)"),
        ("[<x>.[x]out.[x].[1].+].<f>.[0].f.f.f", "> out(Z Z) Z"),
        ("[<x>.[x]c.[x].[1].+].<f>.[0].f.f.f", "> out(Z Z Z) Z"),
        ("[[x]out.[x].[1].+].<f>.[0].f.f.f", "> out(Z Z Z) Z"),
    ];
    for (src, ty) in mutants {
        let t = parse_term(src).unwrap();
        match check(&ctx, &t, &parse_type(ty).unwrap()) {
            Ok(_) => return outcome(false, format!("mutant {src} accepted")),
            Err(e) if !e.to_string().contains("node ") => return outcome(false, format!("unpositioned error: {e}")),
            Err(_) => {}
        }
    }
    outcome(true, format!("2 goldens accepted, {} mutants rejected with positions", mutants.len()))
}

// ---- 4: call-by-value golden

struct C4 {
    normal_form_ok: bool,
    stuck_from_empty: bool,
    from_zero: String,
}

fn c4() -> (Outcome, C4) {
    let src = corpus("worked.cbv");
    let enc = encode_cbv(&parse_cbv(&src).unwrap());
    let want = parse_term("[0]out.c<y>.[y]out.[y]c.[y]").unwrap();
    let n = normalize(&enc, Strategy::LeftmostOutermost, 1000, false).unwrap();
    let normal_form_ok = alpha_eq(&n.term, &want);
    let d = DeltaRegistry::default();
    let empty = run(&Memory::new(), &n.term, &d, 1000);
    let stuck_from_empty = matches!(empty, Err(RunError::Stuck { .. }));
    let from_zero = match run(&parse_memory("c = 0").unwrap(), &n.term, &d, 1000) {
        Ok(r) => r.memory.to_string(),
        Err(e) => e.to_string(),
    };
    let as_stated = match &empty {
        Ok(r) => {
            r.memory.stack(&Loc::named("out")).items() == [int(0), int(0)]
                && r.memory.stack(&Loc::named("c")).items() == [int(0)]
        }
        Err(_) => false,
    };
    let detail = format!(
        "normal form {} ({} steps); from empty memory: {}; from c = 0: {from_zero}",
        print_term(&n.term),
        n.steps,
        match &empty {
            Ok(r) => r.memory.to_string(),
            Err(e) => e.to_string(),
        }
    );
    (outcome(normal_form_ok && as_stated, detail), C4 { normal_form_ok, stuck_from_empty, from_zero })
}

// ---- 5, 6: strong normalisation and confluence

fn longest_path(g: &ReductionGraph) -> usize {
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); g.nodes.len()];
    for (a, b, _) in &g.edges {
        succ[*a].push(*b);
    }
    fn go(i: usize, succ: &[Vec<usize>], memo: &mut [Option<usize>]) -> usize {
        if let Some(d) = memo[i] {
            return d;
        }
        let d = succ[i].iter().map(|&j| 1 + go(j, succ, memo)).max().unwrap_or(0);
        memo[i] = Some(d);
        d
    }
    go(g.root, &succ, &mut vec![None; g.nodes.len()])
}

fn c5_c6() -> (Outcome, Outcome) {
    let start = Instant::now();
    let mut r = rng(5);
    let c = cfg(20, &["λ", "a", "b"], false);
    let (mut steps, mut bad_step, mut bad_depth, mut infinite) = (0, Vec::new(), Vec::new(), Vec::new());
    let (mut graphs, mut nonconfluent, mut max_nodes) = (0, Vec::new(), 0);
    let mut drawn = 0;
    for _ in 0..1000 {
        // redex-free terms say nothing about reduction, so draw until one has a redex
        let (m, ty, d) = loop {
            drawn += 1;
            let x = random_typed(&mut r, &c);
            if !beta_redexes(&x.0).is_empty() {
                break x;
            }
        };
        let mu = measure(&d);
        for red in beta_redexes(&m) {
            let n = reduce_at(&m, &red).unwrap();
            let dn = check(&Context::new(), &n, &ty).expect("subject reduction");
            steps += 1;
            if measure(&dn) >= mu {
                bad_step.push(print_term(&m));
            }
        }
        match reduction_graph(&m, 100_000, false) {
            Ok(g) if !g.has_cycle() => {
                max_nodes = max_nodes.max(g.nodes.len());
                if longest_path(&g) as u64 > mu {
                    bad_depth.push(print_term(&m));
                }
                if g.nodes.len() <= 10_000 {
                    graphs += 1;
                    if !(confluent_on(&g) && g.normal_forms().len() == 1) {
                        nonconfluent.push(print_term(&m));
                    }
                }
            }
            _ => infinite.push(print_term(&m)),
        }
    }
    let took = start.elapsed();
    let ok5 = bad_step.is_empty() && bad_depth.is_empty() && infinite.is_empty() && took < Duration::from_secs(60);
    let d5 = format!(
        "1000 terms with redexes ({drawn} drawn), {steps} beta steps; non-decreasing {}, depth above measure {}, unbounded graphs {}; largest graph {max_nodes} nodes; {took:.1?}{}",
        bad_step.len(),
        bad_depth.len(),
        infinite.len(),
        bad_step.first().or(bad_depth.first()).or(infinite.first()).map(|s| format!(" (first: {s})")).unwrap_or_default()
    );
    let d6 = format!("{graphs} graphs, {} without a unique normal form", nonconfluent.len());
    (outcome(ok5, d5), outcome(nonconfluent.is_empty() && graphs > 0, d6))
}

// ---- 7: measure lemmas

fn same_point(a: &(u64, SnMemory), b: &(u64, SnMemory)) -> bool {
    let obs = |m: &SnMemory| -> BTreeMap<Loc, Vec<_>> {
        m.iter().filter(|(_, v)| !v.is_empty()).map(|(l, v)| (l.clone(), v.iter().map(|x| observe(x, 2)).collect())).collect()
    };
    a.0 == b.0 && obs(&a.1) == obs(&b.1)
}

const POINTS: usize = 50;
const INSTANCES: usize = 200;

fn input_of(ty: &SimpleType) -> &MemoryType {
    ty.as_arrow().expect("arrow type").0
}

/// Split a memory value into the part below `top` and the top part.
fn split_top(mem: &SnMemory, top: &MemoryType) -> (SnMemory, SnMemory) {
    let (mut below, mut above) = (SnMemory::new(), SnMemory::new());
    for (l, v) in mem {
        let k = top.get(l).len();
        below.insert(l.clone(), v[..v.len() - k].to_vec());
        above.insert(l.clone(), v[v.len() - k..].to_vec());
    }
    (below, above)
}

fn stack_on(mut below: SnMemory, above: SnMemory) -> SnMemory {
    for (l, v) in above {
        below.entry(l).or_default().extend(v);
    }
    below
}

fn sequencing(r: &mut impl Rng) -> Result<usize, String> {
    let extras = [
        MemoryType::default(),
        MemoryType::singleton(Loc::Main, vec![SimpleType::unit_arrow()]),
        MemoryType::singleton(Loc::named("a"), vec![parse_type("(>) >").unwrap()]),
    ];
    let c = cfg(8, &["λ", "a"], false);
    let mut done = 0;
    while done < INSTANCES {
        let (n, nty, dn) = random_typed(r, &c);
        let (rin, sout) = nty.as_arrow().unwrap();
        let t = &extras[r.gen_range(0..extras.len())];
        let m_in = t.concat(sout);
        let outs = [MemoryType::default(), m_in.clone(), sout.clone()];
        let mty = SimpleType::arrow(m_in.clone(), outs[r.gen_range(0..outs.len())].clone());
        let pool = inhabitants(&mty, 5);
        if pool.is_empty() {
            continue;
        }
        let m = pool[r.gen_range(0..pool.len())].clone();
        let dm = check(&Context::new(), &m, &mty).map_err(|e| e.to_string())?;
        let nm = compose(&n, &m);
        let full = SimpleType::arrow(t.concat(rin), mty.as_arrow().unwrap().1.clone());
        let dnm = check(&Context::new(), &nm, &full).map_err(|e| format!("{} : {full}: {e}", print_term(&nm)))?;
        let v = Valuation::new();
        let (fnm, fn_, fm) = (interpret(&dnm, &v), interpret(&dn, &v), interpret(&dm, &v));
        for _ in 0..POINTS {
            let p = sample_memory(input_of(&full), r);
            let (tp, rp) = split_top(&p, rin);
            let (i, s) = apply(&fn_, rp);
            let (j, u) = apply(&fm, stack_on(tp, s));
            if !same_point(&apply(&fnm, p), &(i + j, u)) {
                return Err(format!("{} ; {}", print_term(&n), print_term(&m)));
            }
        }
        done += 1;
    }
    Ok(done * POINTS)
}

fn substitution(r: &mut impl Rng) -> Result<usize, String> {
    let c = cfg(10, &["λ", "a"], false);
    let mut done = 0;
    while done < INSTANCES {
        let (n, s, dn) = random_typed(r, &cfg(6, &["λ", "a"], false));
        let m = random_open(r, &c, 1);
        let Some(x) = free_vars(&m).into_iter().next() else { continue };
        let ctx: Context = [(x.clone(), s.clone())].into_iter().collect();
        let Ok(scheme) = infer(&ctx, &m) else { continue };
        let ty = scheme.ground(&SimpleType::unit_arrow());
        let dm = check(&ctx, &m, &ty).map_err(|e| e.to_string())?;
        let sub = substitute(&n, &x, &m);
        let ds = check(&Context::new(), &sub, &ty).map_err(|e| format!("{}: {e}", print_term(&sub)))?;
        let lhs = interpret(&ds, &Valuation::new());
        let rhs = interpret(&dm, &Valuation::new().with(x.clone(), interpret(&dn, &Valuation::new())));
        for _ in 0..POINTS {
            let p = sample_memory(input_of(&ty), r);
            if !same_point(&apply(&lhs, p.clone()), &apply(&rhs, p)) {
                return Err(format!("{{{}/{x}}}{}", print_term(&n), print_term(&m)));
            }
        }
        done += 1;
    }
    Ok(done * POINTS)
}

/// Swap one adjacent pair of spine actions on distinct locations, where allowed.
fn permute_once(t: &Term, r: &mut impl Rng) -> Option<Term> {
    let mut spine = Vec::new();
    let mut cur = t;
    while let Some(k) = cur.cont() {
        spine.push(cur.with_cont(Term::Nil));
        cur = k;
    }
    let ok = |a: &Term, b: &Term| -> bool {
        let bound = |t: &Term| match t {
            Term::Pop(_, x, _, _) => Some(x.clone()),
            _ => None,
        };
        let loc = |t: &Term| match t {
            Term::Push(_, l, _) | Term::Pop(l, _, _, _) => Some(l.clone()),
            _ => None,
        };
        let fv = |t: &Term| match t {
            Term::Push(n, _, _) => free_vars(n),
            _ => Default::default(),
        };
        let (Some(la), Some(lb)) = (loc(a), loc(b)) else { return false };
        if la == lb {
            return false;
        }
        let captures = |x: Option<Name>, other: &Term| x.is_some_and(|x| fv(other).contains(&x));
        if captures(bound(a), b) || captures(bound(b), a) {
            return false;
        }
        !matches!((bound(a), bound(b)), (Some(x), Some(y)) if x == y)
    };
    let candidates: Vec<usize> = (0..spine.len().saturating_sub(1)).filter(|&i| ok(&spine[i], &spine[i + 1])).collect();
    if candidates.is_empty() {
        return None;
    }
    let i = candidates[r.gen_range(0..candidates.len())];
    spine.swap(i, i + 1);
    Some(spine.iter().rev().fold(cur.clone(), |k, a| a.with_cont(k)))
}

fn permutation(r: &mut impl Rng) -> Result<usize, String> {
    let c = cfg(14, &["λ", "a", "b"], false);
    let mut done = 0;
    while done < INSTANCES {
        let (m, ty, dm) = random_typed(r, &c);
        let Some(mut n) = permute_once(&m, r) else { continue };
        for _ in 0..r.gen_range(0..3) {
            n = permute_once(&n, r).unwrap_or(n);
        }
        if !perm_eq(&m, &n) {
            return Err(format!("{} and {} not related by permutation", print_term(&m), print_term(&n)));
        }
        let dn = check(&Context::new(), &n, &ty).map_err(|e| e.to_string())?;
        let (fm, fn_) = (interpret(&dm, &Valuation::new()), interpret(&dn, &Valuation::new()));
        for _ in 0..POINTS {
            let p = sample_memory(input_of(&ty), r);
            if !same_point(&apply(&fm, p.clone()), &apply(&fn_, p)) {
                return Err(format!("{} vs {}", print_term(&m), print_term(&n)));
            }
        }
        done += 1;
    }
    Ok(done * POINTS)
}

fn c7() -> Outcome {
    let mut r = rng(7);
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, f) in [
        ("sequencing", sequencing as fn(&mut _) -> _),
        ("substitution", substitution),
        ("permutation", permutation),
    ] {
        match f(&mut r) {
            Ok(points) => parts.push(format!("{name} {INSTANCES}×{POINTS} = {points} points")),
            Err(e) => {
                pass = false;
                parts.push(format!("{name} FAILED at {e}"));
            }
        }
    }
    outcome(pass, parts.join("; "))
}

// ---- 8: run-length identity

struct C8 {
    checked: usize,
    as_stated_failures: usize,
    example: Option<String>,
    corrected_failures: usize,
}

fn c8() -> (Outcome, C8) {
    let start = Instant::now();
    let mut e = Enumerator::new(vec![Loc::Main], vec![]);
    let terms: Vec<Term> = e.up_to(12);
    let total = terms.len();
    let terms = Arc::new(terms);
    let next = AtomicUsize::new(0);
    let threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let results: Vec<(usize, usize, Option<String>, usize)> = std::thread::scope(|sc| {
        let handles: Vec<_> = (0..threads)
            .map(|_| {
                sc.spawn(|| {
                    let (mut checked, mut stated, mut corrected, mut example) = (0, 0, 0, None);
                    let d = DeltaRegistry::default();
                    loop {
                        let i = next.fetch_add(1024, Ordering::Relaxed);
                        if i >= terms.len() {
                            break;
                        }
                        for t in &terms[i..(i + 1024).min(terms.len())] {
                            let Ok((ty, der)) = ground_type(t) else { continue };
                            let input = input_of(&ty);
                            let (Some(mem), Some(vals)) = (least_input_memory(input), least_term_values(input)) else {
                                continue;
                            };
                            let Ok(r) = run(&mem, t, &d, 1_000_000) else {
                                corrected += 1;
                                continue;
                            };
                            checked += 1;
                            if measure_variant(&der) != r.steps as u64 {
                                stated += 1;
                                example.get_or_insert_with(|| {
                                    format!("{} : {ty} gives {} against {} steps", print_term(t), measure_variant(&der), r.steps)
                                });
                            }
                            if measure_variant_on(&der, vals) != r.steps as u64 {
                                corrected += 1;
                            }
                        }
                    }
                    (checked, stated, example, corrected)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut s = C8 { checked: 0, as_stated_failures: 0, example: None, corrected_failures: 0 };
    for (c, st, ex, co) in results {
        s.checked += c;
        s.as_stated_failures += st;
        s.corrected_failures += co;
        if s.example.is_none() {
            s.example = ex;
        }
    }
    let detail = format!(
        "{total} terms enumerated, {} typed and run; with 0_t inputs {} mismatch (e.g. {}); with least-term values {} mismatch; {:.1?}",
        s.checked,
        s.as_stated_failures,
        s.example.as_deref().unwrap_or("none"),
        s.corrected_failures,
        start.elapsed()
    );
    (outcome(s.as_stated_failures == 0 && s.checked > 0, detail), s)
}

// ---- 9: laws

fn c9() -> Outcome {
    let start = Instant::now();
    let mut r = rng(9);
    let budget = TestBudget::with_size(7);
    let mut counts = Vec::new();
    let mut failures = Vec::new();
    let judge = |inst: &fmc::equivalence::LawInstance, failures: &mut Vec<String>| match machine_equiv(&inst.lhs, &inst.rhs, &inst.ty, &budget) {
        Ok(v) if !v.is_distinguished() => {}
        Ok(v) => failures.push(format!("{}: {} vs {}: {v}", inst.name, print_term(&inst.lhs), print_term(&inst.rhs))),
        Err(e) => failures.push(format!("{}: {e}", inst.name)),
    };
    for law in EqnLaw::ALL {
        for _ in 0..200 {
            judge(&random_instance(law, &mut r), &mut failures);
        }
        counts.push(format!("{}×200", law.symbol()));
    }
    for law in DerivedLaw::ALL {
        for _ in 0..100 {
            for inst in random_derived(law, &mut r) {
                judge(&inst, &mut failures);
            }
        }
        counts.push(format!("{law:?}×100"));
    }
    let detail = format!("{}; {} distinguished; {:.1?}{}", counts.join(" "), failures.len(), start.elapsed(), failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default());
    outcome(failures.is_empty(), detail)
}

// ---- 10: faithfulness

fn c10() -> Outcome {
    let start = Instant::now();
    let mut r = rng(10);
    let mut failures = Vec::new();
    for _ in 0..500 {
        let (m, _) = random_lambda(&mut r, 15);
        let res = lambda_to_fmc(&[], &m).map_err(|e| e.to_string()).and_then(|t| {
            let d = check(&Context::new(), &t.term, &t.ty).map_err(|e| e.to_string())?;
            let back = fmc_to_lambda(&d).map_err(|e| e.to_string())?;
            let want = close_over_context(&t.ctx, &m);
            if lambda_beta_eta_eq(&back, &want) {
                Ok(())
            } else {
                Err(format!("got {back}, expected {want}"))
            }
        });
        if let Err(e) = res {
            failures.push(format!("{m}: {e}"));
        }
    }
    let took = start.elapsed();
    let detail = format!("500 terms, {} failures, {took:.1?}{}", failures.len(), failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default());
    outcome(failures.is_empty() && took < Duration::from_secs(120), detail)
}

// ---- 11: printer and parser

fn c11() -> Outcome {
    let mut files = 0;
    let mut failures = Vec::new();
    let mut entries: Vec<_> = std::fs::read_dir(corpus_dir()).unwrap().map(|e| e.unwrap().path()).collect();
    entries.sort();
    for p in entries {
        let f = p.file_name().unwrap().to_string_lossy().into_owned();
        let src = corpus(&f);
        let fixed = match p.extension().and_then(|e| e.to_str()) {
            Some("fmc") => parse_term(&src).ok().map(|t| {
                let s = print_term(&t);
                parse_term(&s).is_ok_and(|u| u == t && print_term(&u) == s)
            }),
            Some("lam") => parse_lambda(&src).ok().map(|t| {
                let s = print_lambda(&t);
                parse_lambda(&s).is_ok_and(|u| u == t && print_lambda(&u) == s)
            }),
            Some("cbv") => parse_cbv(&src).ok().map(|t| {
                let s = t.to_string();
                parse_cbv(&s).is_ok_and(|u| u == t && u.to_string() == s)
            }),
            _ => continue,
        };
        files += 1;
        if fixed != Some(true) {
            failures.push(f);
        }
    }
    let mut r = rng(11);
    let c = cfg(30, &["λ", "a", "rnd", "out"], true);
    for _ in 0..10_000 {
        let t = random_term(&mut r, &c);
        let s = print_term(&t);
        if !parse_term(&s).is_ok_and(|u| u == t && print_term(&u) == s) {
            failures.push(s);
        }
    }
    let detail = format!("{files} corpus files and 10000 fuzzed terms, {} failures{}", failures.len(), failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default());
    outcome(failures.is_empty(), detail)
}

fn main() -> ExitCode {
    // libtest flags such as --nocapture are accepted and ignored.
    // ACCEPTANCE_ONLY=5,6 restricts the run to the listed criteria.
    let only: Option<Vec<u32>> =
        std::env::var("ACCEPTANCE_ONLY").ok().map(|v| v.split(',').filter_map(|n| n.trim().parse().ok()).collect());
    let wanted = |n: u32| only.as_ref().map_or(true, |o| o.contains(&n));
    let mut unexpected = Vec::new();
    let report = |n: u32, o: &Outcome| println!("criterion {n:>2}: {} - {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);

    for (n, f) in [(1, c1 as fn() -> Outcome), (2, c2), (3, c3)] {
        if wanted(n) {
            let o = f();
            report(n, &o);
            if !o.pass {
                unexpected.push(n);
            }
        }
    }

    if wanted(4) {
        let (o, s4) = c4();
        report(4, &o);
        println!(
            "              expected failure: the normal form pops from c, which is empty; from c = 0 the run gives {}",
            s4.from_zero
        );
        if o.pass || !s4.normal_form_ok || !s4.stuck_from_empty {
            unexpected.push(4);
        }
    }

    if wanted(5) || wanted(6) {
        let (o5, o6) = c5_c6();
        for (n, o) in [(5, &o5), (6, &o6)] {
            report(n, o);
            if !o.pass {
                unexpected.push(n);
            }
        }
    }
    if wanted(7) {
        let o = c7();
        report(7, &o);
        if !o.pass {
            unexpected.push(7);
        }
    }

    if wanted(8) {
        let (o, s8) = c8();
        report(8, &o);
        println!(
            "              expected failure: pushing a least-element term costs its own collapse, which 0_t does not; with least-term values: {} mismatches",
            s8.corrected_failures
        );
        if o.pass || s8.as_stated_failures == 0 || s8.corrected_failures != 0 || s8.checked == 0 {
            unexpected.push(8);
        }
    }

    for (n, f) in [(9, c9 as fn() -> Outcome), (10, c10), (11, c11)] {
        if wanted(n) {
            let o = f();
            report(n, &o);
            if !o.pass {
                unexpected.push(n);
            }
        }
    }

    if unexpected.is_empty() {
        println!("acceptance: every attainable criterion run passes; 4 and 8 fail as documented");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected results for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
