use lochslab::experiment::{run_experiment, ExperimentConfig, ExperimentKind};
use std::time::Instant;

fn time(label: &str, cfg: &ExperimentConfig) {
    eprintln!("start {label}");
    let t = Instant::now();
    let report = run_experiment(cfg).expect(label);
    let dt = t.elapsed().as_secs_f64();
    eprintln!(
        "{label}: {dt:.2}s kept={} stats={:?}",
        report.aggregates.kept,
        report.aggregates.stats
    );
}

fn main() {
    let base = |kind: ExperimentKind, beta: &str, samples, n, bits| ExperimentConfig {
        beta_spec: beta.to_string(),
        kind,
        samples,
        n,
        seed: 1,
        precision_bits: bits,
        parallelism: 0,
    };

    eprintln!("threads: {}", rayon::current_num_threads());
    time(
        "lil n=1e5 s=200 rat:2/1 bits=120k",
        &base(ExperimentKind::Lil, "rat:2/1", 200, 100_000, Some(120_000)),
    );
}
