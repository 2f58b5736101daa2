use aluthge_core::generate::{generate, Family};
use aluthge_core::radii::{joint_numerical_radius, JointRadiusOptions};
use aluthge_core::seed::substream;
use aluthge_core::verify::{default_suite_with, run_property_suite};
use criterion::{criterion_group, criterion_main, Criterion};

fn pools() -> Vec<(String, Option<usize>)> {
    let mut out = vec![("1-thread".to_string(), Some(1))];
    if cfg!(feature = "parallel") {
        out.push(("default-pool".to_string(), None));
    }
    out
}

#[cfg(feature = "parallel")]
fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        b = b.num_threads(t);
    }
    b.build().expect("thread pool").install(f)
}

#[cfg(not(feature = "parallel"))]
fn with_pool<T: Send>(_threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    f()
}

fn joint_radius(c: &mut Criterion) {
    let t = generate(&mut substream(1, 2, 3), Family::Dense, 3, 4);
    let opts = JointRadiusOptions::default();
    let mut g = c.benchmark_group("joint_numerical_radius_d3_n4");
    g.sample_size(10);
    for (name, threads) in pools() {
        g.bench_function(&name, |b| b.iter(|| with_pool(threads, || joint_numerical_radius(&t, &opts).unwrap())));
    }
    g.finish();
}

fn suite(c: &mut Criterion) {
    let specs = default_suite_with(4);
    let mut g = c.benchmark_group("property_suite_count4");
    g.sample_size(10);
    for (name, threads) in pools() {
        g.bench_function(&name, |b| b.iter(|| with_pool(threads, || run_property_suite(&specs, 7).unwrap())));
    }
    g.finish();
}

criterion_group!(benches, joint_radius, suite);
criterion_main!(benches);
