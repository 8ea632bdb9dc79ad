use criterion::{black_box, criterion_group, criterion_main, Criterion};

use qread_core::dispersive::{contrast_dispersive, optimal_cavity_decay};
use qread_core::optimizer::{numeric_optimize, Bounds, Evaluator, OptimizeOptions, Schedule};
use qread_core::presets::{table, TableId};
use qread_core::transport::{contrast_point, grid_contrast, KGrid, SolverOptions};
use qread_core::units::{mhz, us};

fn dispersive(c: &mut Criterion) {
    c.bench_function("contrast_dispersive", |b| {
        b.iter(|| contrast_dispersive(black_box(4.27), black_box(3.64), 1.0, Some(6.0)).unwrap())
    });
    c.bench_function("optimal_cavity_decay", |b| b.iter(|| optimal_cavity_decay(black_box(100.0)).unwrap()));
}

fn transport(c: &mut Criterion) {
    let opts = SolverOptions::default();
    for (id, name) in [(TableId::II, "contrast_point/us_row1"), (TableId::I, "contrast_point/ms_row1")] {
        let row = table(id)[0];
        let p = row.system().unwrap();
        let pulse = row.pulse().unwrap();
        let t_m = row.t_m_seconds();
        c.bench_function(name, |b| b.iter(|| contrast_point(black_box(&p), &pulse, t_m, &opts).unwrap()));
    }

    let row = table(TableId::II)[0];
    let p = row.system().unwrap();
    let pulse = row.pulse().unwrap();
    let t_m = row.t_m_seconds();
    let grid = KGrid::for_run(&p, &pulse, t_m, &opts, 60, 20.0).unwrap();
    let mut group = c.benchmark_group("grid");
    group.sample_size(10);
    group.bench_function("grid_contrast/180_nodes", |b| {
        b.iter(|| grid_contrast(black_box(&p), &pulse, t_m, &opts, &grid).unwrap())
    });
    group.finish();
}

fn optimizer(c: &mut Criterion) {
    let p = table(TableId::II)[2].system().unwrap();
    let schedule = Schedule::new(us(1.0), 6.0).unwrap();
    let bounds = Bounds::new((mhz(20.0), mhz(200.0)), (mhz(1.0), mhz(20.0))).unwrap();
    let opts = OptimizeOptions { evaluator: Evaluator::Full(SolverOptions::default()), ..Default::default() };
    let mut group = c.benchmark_group("optimizer");
    group.sample_size(10);
    group.bench_function("numeric_optimize/us_row3", |b| {
        b.iter(|| numeric_optimize(black_box(&p), &schedule, &bounds, &opts).unwrap())
    });
    group.finish();
}

criterion_group!(benches, dispersive, transport, optimizer);
criterion_main!(benches);
