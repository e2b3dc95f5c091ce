use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use star_radon::grid::random_directions;
use star_radon::inversion::{inverse_radon, InverseOptions};
use star_radon::radon::{radon_field, SphereFunction};
use star_radon::{Direction, Execution, RuleSet, Rules, StarBody};

fn modes() -> Vec<(&'static str, Execution)> {
    let mut m = vec![("sequential", Execution::Sequential)];
    #[cfg(feature = "parallel")]
    m.push(("parallel", Execution::Parallel));
    m
}

fn rules(n: usize, exec: Execution) -> Rules {
    let mut s = RuleSet::for_dim(n);
    s.execution = exec;
    Rules::new(n, s).unwrap()
}

fn inverse(c: &mut Criterion) {
    let mut g = c.benchmark_group("inverse_radon");
    g.sample_size(10);
    for (n, spec) in [(3usize, "ellipsoid:a=1,1.3,1.7"), (4, "ellipsoid:a=1,1.2,1.5,2")] {
        let body = StarBody::parse(spec, n).unwrap();
        let grid = random_directions(n, 16, 1).unwrap();
        for (name, exec) in modes() {
            let r = rules(n, exec);
            g.bench_with_input(BenchmarkId::new(name, n), &grid, |b, grid| {
                b.iter(|| inverse_radon(&body, black_box(grid), &r, InverseOptions::default()).unwrap())
            });
        }
    }
    g.finish();
}

fn forward(c: &mut Criterion) {
    let mut g = c.benchmark_group("radon_field");
    let n = 5;
    let f = SphereFunction::zonal(Direction::axis(n, n - 1), 4);
    let grid = random_directions(n, 256, 2).unwrap();
    for (name, exec) in modes() {
        let r = rules(n, exec);
        g.bench_function(name, |b| b.iter(|| radon_field(&f, black_box(&grid), &r.radon, exec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, inverse, forward);
criterion_main!(benches);
