//! Acceptance suite: one PASS/FAIL line per criterion.

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use modlang::syntax::{parse_expr, parse_module_file, pretty_module, Decl, Expr, PatternTerm, Program, Value};
use modlang::{
    emit, eval, weaken_module, EngineConfig, EvalError, EvalOutcome, Failure, ModuleRegistry, RegistryError, Rule,
    WeakenRequest,
};
use modlang_testkit::oracle::{Oracle, Outcome};
use modlang_testkit::programs::{conformance_case, conformance_registry, differential_case, weaken_case};
use modlang_testkit::reference::{fib, is_prime};
use modlang_testkit::{fixture_registry, fixtures_dir, strategies};
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<Duration, String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:?}, limit {limit:?}"))?;
    Ok(t)
}

fn run_fixture(src: &str, cfg: &EngineConfig) -> EvalOutcome {
    eval(cfg, &fixture_registry(), &Program::default(), &parse_expr(src).unwrap())
}

fn primefib_by_import() -> Result<String, String> {
    let start = Instant::now();
    let out = run_fixture("/mw -o primefib(3)", &EngineConfig::default());
    ensure(out.value() == Some(&Value::Bool(true)), || format!("got {out:?}"))?;
    let t = within(start, Duration::from_secs(1))?;
    Ok(format!("/mw -o primefib(3) = true in {t:?}"))
}

fn primefib_by_query() -> Result<String, String> {
    let start = Instant::now();
    let out = run_fixture("/mwq -o primefib(3)", &EngineConfig::default().with_trace(true));
    ensure(out.value() == Some(&Value::Bool(true)), || format!("got {out:?}"))?;
    let t = within(start, Duration::from_secs(1))?;
    let trace = out.trace().ok_or("no trace")?;
    let added: Vec<String> = trace
        .nodes()
        .into_iter()
        .filter(|n| n.rule == Rule::Di)
        .filter_map(|n| {
            let c = &n.conclusion;
            Some(c[c.find('{')? + 1..c.rfind('}')?].to_string())
        })
        .filter(|a| !a.starts_with('/'))
        .collect();
    ensure(added == ["fib(3) = 2.", "prime(2) = true."], || format!("program extended with {added:?}"))?;
    Ok(format!("extended with {} then {}, value true in {t:?}", added[0], added[1]))
}

fn oracle_conformance() -> Result<String, String> {
    const CASES: usize = 10_000;
    let start = Instant::now();
    let registry = conformance_registry();
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce97);
    let (mut checked, mut inconclusive) = (0, 0);
    while checked < CASES {
        let case = conformance_case(&mut rng);
        let oracle = Oracle::new(&registry, case.order, case.max_depth, 200_000);
        let Ok(want) = oracle.run(&case.program.decls, &case.expr) else {
            inconclusive += 1;
            continue;
        };
        let cfg = EngineConfig::default()
            .with_max_depth(case.max_depth)
            .with_order(case.order);
        let got = Outcome::from(&eval(&cfg, &registry, &case.program, &case.expr));
        ensure(got == want, || {
            format!("mismatch on\n{}-o {}\nengine {got:?}, oracle {want:?}", case.program, case.expr)
        })?;
        checked += 1;
    }
    let t = within(start, Duration::from_secs(300))?;
    Ok(format!("{checked} programs, 0 mismatches, {inconclusive} over budget, {t:?}"))
}

fn query_import_differential() -> Result<String, String> {
    const CASES: usize = 1_000;
    let mut rng = ChaCha8Rng::seed_from_u64(0xd1ff);
    let cfg = EngineConfig::default();
    let empty = Program::default();
    let mut values = 0;
    for _ in 0..CASES {
        let case = differential_case(&mut rng);
        let registry = ModuleRegistry::default().with_module(case.module_name.clone(), case.module.clone());
        let mq = Outcome::from(&eval(&cfg, &registry, &empty, &case.with_queries));
        let mi = Outcome::from(&eval(&cfg, &registry, &empty, &case.with_import));
        ensure(mq == mi, || {
            format!("module\n{}queries: {}\nimport: {}\n{mq:?} vs {mi:?}", case.module, case.with_queries, case.with_import)
        })?;
        values += matches!(mq, Outcome::Value(_)) as usize;
    }
    Ok(format!("{CASES} triples, 0 mismatches ({values} with values)"))
}

fn weakening() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x3eaf);
    let cfg = EngineConfig::default();
    let (mut modules, mut facts) = (0, 0);
    for size in 3..=100 {
        for _ in 0..3 {
            let case = weaken_case(&mut rng, size);
            ensure(case.module.len() == size, || format!("generated {} declarations", case.module.len()))?;
            let registry = ModuleRegistry::default().with_module(case.module_name.clone(), case.module.clone());
            let request = WeakenRequest {
                queries: case.queries.clone(),
                output: "src_w".parse().unwrap(),
            };
            let rm = weaken_module(&request, &registry, &cfg).map_err(|e| e.to_string())?;
            ensure(rm.facts.len() == case.queries.len(), || {
                format!("{} facts for {} queries", rm.facts.len(), case.queries.len())
            })?;
            let reparsed = parse_module_file(&emit(&rm)).map_err(|e| e.to_string())?;
            ensure(reparsed.1 == rm.program(), || "emitted module does not re-parse".into())?;
            for fact in &rm.facts {
                let args = fact
                    .head
                    .params
                    .iter()
                    .map(|p| match p {
                        PatternTerm::Const(c) => Ok(Expr::Const(c.clone())),
                        _ => Err(format!("non-ground fact {fact}")),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let call = Expr::Call(fact.head.function.clone(), args);
                let e = Expr::di(vec![Decl::Import(case.module_name.clone())], call);
                let got = eval(&cfg, &registry, &Program::default(), &e);
                ensure(got.value().map(|v| Expr::Const(v.clone())).as_ref() == Some(&fact.body), || {
                    format!("{fact} re-evaluates to {got:?}")
                })?;
                facts += 1;
            }
            modules += 1;
        }
    }
    Ok(format!("{modules} modules of 3-100 declarations, {facts} facts re-evaluated, counts equal"))
}

fn cli(args: &[&str], cwd: &Path) -> (Option<i32>, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_modlang"))
        .args(args)
        .current_dir(cwd)
        .env_remove("MODLANG_PATH")
        .output()
        .expect("run modlang");
    (out.status.code(), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn failure_semantics() -> Result<String, String> {
    let out = eval(
        &EngineConfig::default(),
        &ModuleRegistry::default(),
        &Program::default(),
        &parse_expr("undefined(1)").unwrap(),
    );
    ensure(matches!(out, EvalOutcome::Failure(Failure::NoDerivation { .. })), || format!("got {out:?}"))?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (code, err) = cli(&["eval", "undefined(1)"], dir.path());
    ensure(code == Some(1) && err.contains("no derivation"), || format!("exit {code:?}: {err}"))?;

    fs::write(dir.path().join("a.mod"), "/a =\n/b.\nf(x) = x.\n").unwrap();
    fs::write(dir.path().join("b.mod"), "/b =\n/a.\ng(x) = x.\n").unwrap();
    let registry = ModuleRegistry::new(vec![dir.path().to_path_buf()]);
    let out = eval(&EngineConfig::default(), &registry, &Program::default(), &parse_expr("/a -o f(1)").unwrap());
    ensure(
        matches!(
            out,
            EvalOutcome::Failure(Failure::Error(EvalError::Registry(RegistryError::CyclicImport { .. })))
        ),
        || format!("got {out:?}"),
    )?;
    let (code, err) = cli(&["eval", "-m", "a", "f(1)"], dir.path());
    ensure(code == Some(2) && err.contains("cyclic import"), || format!("exit {code:?}: {err}"))?;
    Ok("undefined(1): NoDerivation, exit 1; /a <-> /b: CyclicImport, exit 2".into())
}

fn round_trip() -> Result<String, String> {
    const CASES: u32 = 10_000;
    let config = Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    };
    let rng = || TestRng::deterministic_rng(RngAlgorithm::ChaCha);
    let mut runner = TestRunner::new_with_rng(config.clone(), rng());
    runner
        .run(&strategies::expr(), |e| {
            let text = e.to_string();
            assert_eq!(parse_expr(&text).ok(), Some(e), "{text}");
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let mut runner = TestRunner::new_with_rng(config, rng());
    runner
        .run(&(strategies::module_name(), strategies::program()), |(name, p)| {
            let text = pretty_module(&name, &p);
            assert_eq!(parse_module_file(&text).ok(), Some((name, p)), "{text}");
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let mut fixtures = 0;
    for entry in fs::read_dir(fixtures_dir()).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("mod") {
            continue;
        }
        let text = fs::read_to_string(&path).map_err(|e| e.to_string())?;
        let (name, p) = parse_module_file(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        let again = parse_module_file(&pretty_module(&name, &p)).map_err(|e| e.to_string())?;
        ensure(again == (name, p), || format!("{} does not round-trip", path.display()))?;
        fixtures += 1;
    }
    ensure(fixtures >= 4, || format!("only {fixtures} fixtures found"))?;
    Ok(format!("{CASES} expressions, {CASES} module files, {fixtures} fixtures"))
}

fn spot_values() -> Result<String, String> {
    let start = Instant::now();
    let cfg = EngineConfig::default();
    for k in 1..=15 {
        let out = run_fixture(&format!("/mf -o fib({k})"), &cfg);
        ensure(out.value() == Some(&Value::Int(fib(k))), || format!("fib({k}): {out:?}"))?;
    }
    for n in 2..=50 {
        let out = run_fixture(&format!("/mp -o prime({n})"), &cfg);
        ensure(out.value() == Some(&Value::Bool(is_prime(n))), || format!("prime({n}): {out:?}"))?;
    }
    let t = within(start, Duration::from_secs(10))?;
    Ok(format!("fib(1..15) and prime(2..50) match, {t:?}"))
}

fn main() {
    let criteria: [(&str, Check); 8] = [
        ("primefib example, import form", primefib_by_import),
        ("primefib example, query form", primefib_by_query),
        ("oracle conformance", oracle_conformance),
        ("query/import differential", query_import_differential),
        ("weakening soundness and minimality", weakening),
        ("failure semantics", failure_semantics),
        ("round trip", round_trip),
        ("fibonacci and prime spot values", spot_values),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match result {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
