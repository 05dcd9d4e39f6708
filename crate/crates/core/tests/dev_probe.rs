//! Temporary development probes (ignored by default).

use lyapq_core::fock::OperatorSet;
use lyapq_core::lyapunov::{largest_le, LyapunovConfig, Observable, RenormMode};
use lyapq_core::meanfield::{classical_lyapunov_spectrum, MeanFieldConfig};
use lyapq_core::model::ModelParams;
use lyapq_core::trajectory::TrajectoryConfig;
use std::time::Instant;

#[test]
#[ignore]
fn probe_matvec_speed() {
    for n in [100u32, 200] {
        let p = ModelParams {
            n_bosons: n,
            ..Default::default()
        };
        let ops = OperatorSet::build(&p).unwrap();
        let build_start = Instant::now();
        let engine =
            lyapq_core::trajectory::Engine::new(&ops, p.t_period / 256.0).unwrap();
        let build_time = build_start.elapsed();
        let mut traj = engine.start(lyapq_core::trajectory::ThresholdSource::Fixed(1e-30));
        let start = Instant::now();
        let steps = 20_000;
        for _ in 0..steps {
            engine.step(&mut traj).unwrap();
        }
        let per_step = start.elapsed().as_secs_f64() / steps as f64;
        println!(
            "N={n}: propagator build {:.2}s, {:.2} us/substep -> {:.1} s per 1000 periods at T/256",
            build_time.as_secs_f64(),
            per_step * 1e6,
            per_step * 256.0 * 1000.0
        );
    }
}

#[test]
#[ignore]
fn probe_lambda_reference_points() {
    let t = ModelParams::default().t_period;
    for (u, n, label) in [(0.5, 200u32, "chaotic"), (0.05, 200, "regular")] {
        let p = ModelParams {
            u,
            mu1: 1.5,
            n_bosons: n,
            ..Default::default()
        };
        let ops = OperatorSet::build(&p).unwrap();
        let tcfg = TrajectoryConfig {
            dt_sub: t / 256.0,
            t_relax: 200.0 * t,
            t_measure: 0.0,
            sample_period: t,
            seed: 2024,
        };
        let lcfg = LyapunovConfig {
            delta0: 1e-4,
            delta_max: 0.1,
            observable: Observable::Number,
            mode: RenormMode::Threshold,
            tau: t,
            t_total: 300.0 * t,
            m_r: 4,
        };
        let start = Instant::now();
        let result = largest_le(&ops, &tcfg, &lcfg).unwrap();
        println!(
            "U={u} ({label}): lambda = {:.4} +- {:.4}, events/pair = {:.1}, wall {:.1}s",
            result.lambda_mean,
            result.lambda_stderr,
            result.n_events_mean,
            start.elapsed().as_secs_f64()
        );
        for run in &result.pairs {
            println!(
                "  pair: lambda_final = {:.4}, events = {}",
                run.lambda_final,
                run.growth_log.len()
            );
        }
    }
}

#[test]
#[ignore]
fn probe_classical_landscape() {
    let p0 = ModelParams {
        mu1: 1.5,
        ..Default::default()
    };
    let cfg = MeanFieldConfig::for_period(p0.t_period);
    for u in [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5] {
        let p = ModelParams { u, ..p0 };
        let start = Instant::now();
        match classical_lyapunov_spectrum(&p, &cfg, 3000.0 * p.t_period, 3000.0 * p.t_period) {
            Ok((l1, l2)) => println!(
                "U={u:.2}: lambda1 = {l1:+.4}, lambda2 = {l2:+.4}  ({:.1}s)",
                start.elapsed().as_secs_f64()
            ),
            Err(e) => println!("U={u:.2}: {e}"),
        }
    }
}
