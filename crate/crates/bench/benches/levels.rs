use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use onfwer::{PValueRecord, ProcedureConfig, StreamState};
use std::hint::black_box;

const STEPS: usize = 1000;

fn procedures() -> Vec<ProcedureConfig> {
    vec![
        ProcedureConfig::alpha_spending(0.05),
        ProcedureConfig::adaptive_spending(0.05, 0.5),
        ProcedureConfig::online_fallback(0.05),
        ProcedureConfig::geometric(0.05, 0.1, 0.5),
        ProcedureConfig::continuous_graph(0.05, 0.5, false),
        ProcedureConfig::continuous_graph(0.05, 0.5, true),
        ProcedureConfig::continuous_spending(0.05, 0.5, true).unwrap(),
    ]
}

// Deterministic pseudo-random stream so every procedure sees the same input.
fn stream() -> Vec<(f64, f64)> {
    let mut x = 0x2545_f491_4f6c_dd1d_u64;
    (0..STEPS)
        .map(|_| {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            let u = (x >> 11) as f64 / (1u64 << 53) as f64;
            (u * u, 1.0 - u)
        })
        .collect()
}

fn bench_stream(c: &mut Criterion) {
    let input = stream();
    let mut group = c.benchmark_group("stream_1000");
    group.throughput(Throughput::Elements(STEPS as u64));
    for config in procedures() {
        let name = format!("{}{}", config.id(), if config.is_closed() { "/closed" } else { "" });
        group.bench_with_input(BenchmarkId::from_parameter(name), &config, |b, config| {
            b.iter(|| {
                let mut state = StreamState::new(config.clone()).unwrap();
                for &(p, weight) in &input {
                    black_box(state.next_level());
                    state
                        .report(PValueRecord {
                            p,
                            weight,
                            sample_size: 100,
                        })
                        .unwrap();
                }
                state.completed()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_stream);
criterion_main!(benches);
