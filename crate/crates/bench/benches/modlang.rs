use std::path::PathBuf;

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use modlang::syntax::{parse_expr, parse_module_file, parse_query, Program};
use modlang::{eval, weaken_module, EngineConfig, ModuleRegistry, WeakenRequest};

fn registry() -> ModuleRegistry {
    ModuleRegistry::new(vec![PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/modules")])
}

fn parse(c: &mut Criterion) {
    let src = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/modules/mp.mod")).unwrap();
    c.bench_function("parse mp.mod", |b| b.iter(|| parse_module_file(black_box(&src)).unwrap()));
}

fn fib(c: &mut Criterion) {
    let reg = registry();
    let cfg = EngineConfig::default();
    let mut group = c.benchmark_group("fib via import");
    for k in [10, 15, 18] {
        let e = parse_expr(&format!("/mf -o fib({k})")).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(k), &e, |b, e| {
            b.iter(|| eval(&cfg, &reg, &Program::default(), e))
        });
    }
    group.finish();
}

fn primefib(c: &mut Criterion) {
    let reg = registry();
    let cfg = EngineConfig::default();
    for (name, src) in [("import", "/mw -o primefib(12)"), ("query", "/mwq -o primefib(12)")] {
        let e = parse_expr(src).unwrap();
        c.bench_function(&format!("primefib(12) by {name}"), |b| {
            b.iter(|| eval(&cfg, &reg, &Program::default(), &e))
        });
    }
}

fn weaken(c: &mut Criterion) {
    let reg = registry();
    let cfg = EngineConfig::default();
    let request = WeakenRequest {
        queries: (1..=12).map(|k| parse_query(&format!("(fib({k})=v)^/mf")).unwrap()).collect(),
        output: "mf_w".parse().unwrap(),
    };
    c.bench_function("weaken 12 fib queries", |b| b.iter(|| weaken_module(&request, &reg, &cfg).unwrap()));
}

criterion_group!(benches, parse, fib, primefib, weaken);
criterion_main!(benches);
