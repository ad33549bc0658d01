use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use ising_ldpc::code::LdpcCode;
use ising_ldpc::metrics::{run_sweep, SweepPlan};
use ising_ldpc::parallel::Execution;

fn plan(decoders: &str) -> SweepPlan {
    SweepPlan::parse(&format!(
        "code = bundled-bg1\nz = 4\nebno = 2, 3\nmessages = 32\nseed = 1\nsweeps = 200\nanneals = 2\nmachine_time = 2e-7\ndecoders = {decoders}\n"
    ))
    .expect("bench plan parses")
}

fn sweeps(c: &mut Criterion) {
    let code = LdpcCode::bundled_bg1(4).expect("code builds");
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for (name, decoders) in [("oms", "oms"), ("sa-ho", "sa-ho"), ("machine", "machine")] {
        let p = plan(decoders);
        for (mode, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            group.bench_with_input(BenchmarkId::new(name, mode), &exec, |b, &exec| {
                b.iter(|| run_sweep(&p, &code, exec).expect("sweep runs"))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, sweeps);
criterion_main!(benches);
