use lyapq_core::fock::OperatorSet;
use lyapq_core::lyapunov::{largest_le, LyapunovConfig, Observable, RenormMode};
use lyapq_core::model::ModelParams;
use lyapq_core::trajectory::TrajectoryConfig;

#[test]
#[ignore]
fn probe_event_statistics_many_pairs() {
    let t = ModelParams::default().t_period;
    for u in [0.5, 0.05] {
        let p = ModelParams { u, mu1: 1.5, n_bosons: 200, ..Default::default() };
        let ops = OperatorSet::build(&p).unwrap();
        let tcfg = TrajectoryConfig {
            dt_sub: t / 256.0, t_relax: 60.0 * t, t_measure: 0.0, sample_period: t, seed: 31415,
        };
        let lcfg = LyapunovConfig {
            delta0: 1e-4, delta_max: 0.1,
            observable: Observable::Number, mode: RenormMode::Threshold,
            tau: t, t_total: 120.0 * t, m_r: 12,
        };
        let res = largest_le(&ops, &tcfg, &lcfg).unwrap();
        let per_pair: Vec<String> = res.pairs.iter()
            .map(|r| format!("{}ev/{:.3}", r.growth_log.len(), r.lambda_final))
            .collect();
        println!("U={u}: lambda_mean={:.4} stderr={:.4}", res.lambda_mean, res.lambda_stderr);
        println!("   per pair: {per_pair:?}");
    }
}
