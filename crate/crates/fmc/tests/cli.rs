use fmc::cli::run_cli;

fn corpus(f: &str) -> String {
    format!("{}/../../docs/corpus/{f}", env!("CARGO_MANIFEST_DIR"))
}

fn fmc(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("fmc").chain(args.iter().copied());
    let code = run_cli(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn run_trace_table() {
    let (code, out, _) = fmc(&["run", &corpus("ex2.fmc"), "--mem", "rnd = 9 7 3 ; c = 5", "--trace"]);
    assert_eq!(code, 0);
    let rows: Vec<&str> = out.lines().filter(|l| l.contains("||")).collect();
    assert_eq!(rows.len(), 8);
    assert_eq!(rows[0], "c = 5 | rnd = 9 7 3 | λ = ε || rnd<x>.[x].c<y>.[y].+.<z>.[z]c");
    assert_eq!(rows[7], "c = 8 | rnd = 9 7 | λ = ε || *");
    assert!(out.contains("final: c = 8 | rnd = 9 7"));
}

#[test]
fn trace_subcommand_matches_run_trace() {
    let a = fmc(&["trace", &corpus("ex2.fmc"), "--mem", "rnd = 9 7 3 ; c = 5"]);
    let b = fmc(&["run", &corpus("ex2.fmc"), "--mem", "rnd = 9 7 3 ; c = 5", "--trace"]);
    assert_eq!(a, b);
}

#[test]
fn check_example_typing() {
    let (code, out, _) = fmc(&["check", &corpus("ex2.fmc"), "--type", "rnd(Z) c(Z) > c(Z)"]);
    assert_eq!(code, 0, "{out}");
    let (code, _, err) = fmc(&["check", "-e", "rnd<x>.[x].[y].+.<z>.[z]c", "--type", "rnd(Z) c(Z) > c(Z)"]);
    assert_eq!(code, 3);
    assert!(err.contains("node 5"), "{err}");
}

#[test]
fn omega_runs_out_of_fuel() {
    let (code, _, err) = fmc(&["normalize", &corpus("omega.fmc"), "--fuel", "100"]);
    assert_eq!(code, 4);
    assert!(err.contains("FuelExhausted"));
}

#[test]
fn arithmetic_run() {
    let (code, out, _) = fmc(&["run", &corpus("arith.fmc")]);
    assert_eq!(code, 0);
    assert!(out.starts_with("λ = 21\n"), "{out}");
}

#[test]
fn exit_codes() {
    assert_eq!(fmc(&["frobnicate"]).0, 2);
    assert_eq!(fmc(&["run"]).0, 2);
    assert_eq!(fmc(&["run", "-e", "*", "--mem", "c = ["]).0, 2);
    assert_eq!(fmc(&["fmt", "-e", "[x"]).0, 3);
    assert_eq!(fmc(&["run", "-e", "<x>.x"]).0, 4);
    assert_eq!(fmc(&["--help"]).0, 0);
}

#[test]
fn equiv_verdicts() {
    let ty = "Z Z > Z Z";
    assert_eq!(fmc(&["equiv", &corpus("flip.fmc"), &corpus("flip2.fmc"), "--type", ty]).0, 0);
    let (code, out, _) = fmc(&["equiv", &corpus("flip.fmc"), &corpus("identity.fmc"), "--type", ty]);
    assert_eq!(code, 1);
    assert!(out.starts_with("distinguished"));
    assert_eq!(fmc(&["equiv", &corpus("flip.fmc"), &corpus("skip.fmc"), "--type", "Z > Z"]).0, 2);
}

#[test]
fn measures_print_naturals() {
    for v in [&[][..], &["--variant"][..]] {
        let mut args = vec!["measure", "-e", "[<x>.[x]].<f>.[*].f"];
        args.extend_from_slice(v);
        let (code, out, _) = fmc(&args);
        assert_eq!(code, 0);
        assert!(out.trim().parse::<u64>().is_ok(), "{out}");
    }
}

#[test]
fn translations() {
    let (code, out, _) = fmc(&["to-lambda", &corpus("swap.fmc"), "--type", "Z B > Z B"]);
    assert_eq!(code, 0);
    assert!(out.starts_with('\\'), "{out}");
    let (code, out, _) = fmc(&["from-lambda", &corpus("swap.lam")]);
    assert_eq!(code, 0);
    assert!(out.contains("type: > (o o > o o)"), "{out}");
    let (code, out, _) = fmc(&["encode-cbv", &corpus("worked.cbv")]);
    assert_eq!(code, 0);
    assert!(out.contains("out"), "{out}");
    assert_eq!(fmc(&["encode-cbv", &corpus("worked.cbv"), "--cells", "d"]).0, 3);
}

#[test]
fn identical_invocations_are_byte_identical() {
    let runs: &[&[&str]] = &[
        &["graph", "--dot", &corpus("apply.fmc")],
        &["infer", &corpus("swap.fmc")],
        &["equiv", &corpus("flip.fmc"), &corpus("identity.fmc"), "--type", "Z Z > Z Z", "--seed", "4"],
        &["normalize", "--strategy", "ri", &corpus("out_counter.fmc")],
    ];
    for args in runs {
        assert_eq!(fmc(args), fmc(args));
    }
}
