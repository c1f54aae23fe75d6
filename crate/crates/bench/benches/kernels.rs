use criterion::{black_box, criterion_group, criterion_main, Criterion};
use thinfb::analysis::{best_flatness, slope};
use thinfb::blowup::{fit_profile, reference_grid, rescale};
use thinfb::energy::energy;
use thinfb::profiles::{sample_with_mask, ProfileSpec};
use thinfb::solver::{flip_pass, relax_components};
use thinfb::weiss::weiss_series;
use thinfb::{make_grid, Ball, SolveState, SolverConfig};

fn kernels(c: &mut Criterion) {
    let h = 1.0 / 128.0;
    let grid = make_grid(1, 2, h, 1.0).unwrap();
    let (u, mask) = sample_with_mask(&grid, &[ProfileSpec::halfplane(1, 2, 0.8)]).unwrap();
    let cfg = SolverConfig::default();

    c.bench_function("relax_h128", |b| {
        b.iter(|| {
            let mut s = SolveState::new(u.clone(), mask.clone()).unwrap();
            relax_components(&mut s, &cfg);
            black_box(s.residual)
        })
    });
    let mut relaxed = SolveState::new(u.clone(), mask.clone()).unwrap();
    relax_components(&mut relaxed, &cfg);
    c.bench_function("flip_pass_h128", |b| {
        b.iter(|| {
            let mut s = relaxed.clone();
            black_box(flip_pass(&mut s, &cfg).len())
        })
    });
    let ball = Ball::new(&[0.0], 0.5);
    c.bench_function("energy_ball_h128", |b| b.iter(|| black_box(energy(&u, &mask, &ball).unwrap().total)));
    c.bench_function("weiss_series_h128", |b| {
        b.iter(|| black_box(weiss_series(&u, &mask, &[0.0], 8.0 * h, 0.25, 5).unwrap().w))
    });
    let rg = reference_grid(&grid).unwrap();
    let scaled = rescale(&u, &[0.0], 0.25, &rg).unwrap();
    c.bench_function("rescale_h128", |b| b.iter(|| black_box(rescale(&u, &[0.0], 0.25, &rg).unwrap())));
    c.bench_function("fit_profile_h128", |b| b.iter(|| black_box(fit_profile(&scaled, 16.0 * h).unwrap().dist_inf)));
    c.bench_function("best_flatness_h128", |b| b.iter(|| black_box(best_flatness(&u, &mask, &[0.0], 0.5).unwrap().eps)));
    c.bench_function("slope_h128", |b| b.iter(|| black_box(slope(&u, &[0.0], &[1.0]).unwrap().alpha)));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = kernels
}
criterion_main!(benches);
