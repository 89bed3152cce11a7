use super::*;
use crate::dependence::{NeighborStructure, PrecisionParams};
use crate::stats::batch_means_se;
use libm::tgamma as gamma;
use proptest::prelude::*;

fn model(c0: f64, c: Vec<u32>, s: NeighborStructure, base: Vec<f64>) -> DdpModel<f64> {
    DdpModel::new(PrecisionParams::new(c0, c).unwrap(), s, base).unwrap()
}

fn state_with(f: Vec<Vec<f64>>, n: Vec<Vec<u32>>, g: Vec<f64>) -> ChainState<f64> {
    ChainState {
        f: f.into_iter().map(|p| SimplexMeasure::new(p).unwrap()).collect(),
        n: n.into_iter().map(CountMeasure::new).collect(),
        g: SimplexMeasure::new(g).unwrap(),
    }
}

#[test]
fn f_alpha_adds_prior_neighbours_and_data() {
    let m = model(
        1.0,
        vec![3],
        NeighborStructure::moving_average(1, 0).unwrap(),
        vec![0.5, 0.5],
    );
    let n = vec![CountMeasure::new(vec![2, 1])];
    let data = ObservedData::from_counts(vec![vec![3, 0]]).unwrap();
    assert_eq!(f_conditional_alpha(&m, &n, &data, 0), vec![5.5, 1.5]);

    let m0 = model(
        2.0,
        vec![0, 0],
        NeighborStructure::moving_average(2, 1).unwrap(),
        vec![0.25, 0.75],
    );
    let n0 = vec![CountMeasure::zeros(2), CountMeasure::zeros(2)];
    let data = ObservedData::from_counts(vec![vec![1, 4], vec![0, 0]]).unwrap();
    assert_eq!(f_conditional_alpha(&m0, &n0, &data, 0), vec![1.5, 5.5]);

    let m1 = model(
        2.0,
        vec![2, 1],
        NeighborStructure::moving_average(2, 1).unwrap(),
        vec![0.25, 0.75],
    );
    let n1 = vec![CountMeasure::new(vec![2, 0]), CountMeasure::new(vec![0, 1])];
    assert_eq!(f_conditional_alpha(&m1, &n1, &data, 1), vec![2.5, 2.5]);
}

#[test]
fn g_alpha_adds_all_counts() {
    let m = model(
        1.0,
        vec![3, 2],
        NeighborStructure::moving_average(2, 0).unwrap(),
        vec![0.5, 0.5],
    );
    let n = vec![CountMeasure::new(vec![2, 1]), CountMeasure::new(vec![1, 1])];
    assert_eq!(g_conditional_alpha(&m, &n), vec![3.5, 2.5]);
    let z = model(
        1.0,
        vec![0, 0],
        NeighborStructure::moving_average(2, 0).unwrap(),
        vec![0.5, 0.5],
    );
    assert_eq!(
        g_conditional_alpha(&z, &[CountMeasure::zeros(2), CountMeasure::zeros(2)]),
        vec![0.5, 0.5]
    );
}

#[test]
fn log_density_degenerate_supports() {
    let m = model(
        1.0,
        vec![4, 0],
        NeighborStructure::moving_average(2, 1).unwrap(),
        vec![1.0],
    );
    let st = state_with(vec![vec![1.0], vec![1.0]], vec![vec![4], vec![0]], vec![1.0]);
    assert!(log_density_n(&[4], 0, &st, &m).unwrap().is_finite());
    assert!(log_density_n(&[3], 0, &st, &m).is_err());
    assert!(log_density_n(&[0], 1, &st, &m).unwrap().is_finite());
}

/// Full conditional of `N_t` evaluated as a plain product of gamma functions.
fn direct_mass(n_t: &[u32], g: &[f64], f: &[Vec<f64>], shared_other: &[Vec<u32>], prior: &[f64]) -> f64 {
    let mut p = 1.0;
    for k in 0..n_t.len() {
        let mut w = g[k];
        for fj in f {
            w *= fj[k];
        }
        let mut denom = gamma(n_t[k] as f64 + 1.0);
        for other in shared_other {
            denom *= gamma(prior[k] + (other[k] + n_t[k]) as f64);
        }
        p *= w.powi(n_t[k] as i32) / denom;
    }
    p
}

#[test]
fn log_density_matches_direct_evaluation() {
    // MA(1), T = 2: ϱ_1 = {1, 2}, ∂_1 = {1}, ∂_2 = {1, 2}.
    let m = model(
        0.8,
        vec![2, 1],
        NeighborStructure::moving_average(2, 1).unwrap(),
        vec![0.3, 0.7],
    );
    let f = vec![vec![0.35, 0.65], vec![0.6, 0.4]];
    let g = vec![0.45, 0.55];
    let st = state_with(f.clone(), vec![vec![1, 1], vec![0, 1]], g.clone());
    let prior = [0.8 * 0.3, 0.8 * 0.7];
    let candidates = [[2u32, 0], [1, 1], [0, 2]];
    let logs: Vec<f64> = candidates
        .iter()
        .map(|c| log_density_n(c, 0, &st, &m).unwrap())
        .collect();
    let direct: Vec<f64> = candidates
        .iter()
        .map(|c| direct_mass(c, &g, &f, &[vec![0, 0], vec![0, 1]], &prior))
        .collect();
    let zl: f64 = logs.iter().map(|l| l.exp()).sum();
    let zd: f64 = direct.iter().sum();
    for (l, d) in logs.iter().zip(&direct) {
        assert!((l.exp() / zl - d / zd).abs() < 1e-12);
    }
}

#[test]
fn infeasible_proposals_leave_state_unchanged() {
    // c_t = 1 in the last bin, F and G put all mass away from bin 1 except a sliver.
    let m = model(
        1.0,
        vec![1],
        NeighborStructure::moving_average(1, 0).unwrap(),
        vec![0.5, 0.5],
    );
    let mut st = state_with(vec![vec![0.5, 0.5]], vec![vec![0, 1]], vec![0.5, 0.5]);
    let mut rng = RngStream::seeded(3);
    let mut saw_reject = false;
    for _ in 0..50 {
        let before = st.n[0].clone();
        let s = update_n_mh(&mut st, 0, &m, 1, MhPartner::LastBin, &mut rng).unwrap();
        assert_eq!(st.n[0].total(), 1);
        if s.accepted == 0 {
            assert_eq!(st.n[0], before);
            saw_reject = true;
        }
    }
    assert!(saw_reject);
}

#[test]
fn zero_precision_index_is_skipped() {
    let m = model(
        1.0,
        vec![0],
        NeighborStructure::moving_average(1, 0).unwrap(),
        vec![0.5, 0.5],
    );
    let mut st = state_with(vec![vec![0.5, 0.5]], vec![vec![0, 0]], vec![0.5, 0.5]);
    let s = update_n_mh(&mut st, 0, &m, 3, MhPartner::Weighted, &mut RngStream::seeded(1)).unwrap();
    assert_eq!(s, MhStats::default());
}

#[test]
fn two_state_chain_occupancy() {
    let m = model(
        1.0,
        vec![1, 1],
        NeighborStructure::moving_average(2, 1).unwrap(),
        vec![0.4, 0.6],
    );
    let mut st = state_with(
        vec![vec![0.7, 0.3], vec![0.2, 0.8]],
        vec![vec![1, 0], vec![0, 1]],
        vec![0.5, 0.5],
    );
    let l10 = log_density_n(&[1, 0], 0, &st, &m).unwrap();
    let l01 = log_density_n(&[0, 1], 0, &st, &m).unwrap();
    let p10 = 1.0 / (1.0 + (l01 - l10).exp());
    let mut rng = RngStream::seeded(9);
    let xs: Vec<f64> = (0..100_000)
        .map(|_| {
            update_n_mh(&mut st, 0, &m, 1, MhPartner::LastBin, &mut rng).unwrap();
            (st.n[0].get(0) == 1) as u8 as f64
        })
        .collect();
    let freq = xs.iter().sum::<f64>() / xs.len() as f64;
    assert!((freq - p10).abs() < 3.0 * batch_means_se(&xs, 50), "{freq} vs {p10}");
}

#[test]
fn weighted_partner_visits_configurations_in_proportion() {
    // K = 3, c_t = 2: six configurations, compared with normalised masses.
    let m = model(
        1.5,
        vec![2, 1],
        NeighborStructure::moving_average(2, 1).unwrap(),
        vec![0.2, 0.3, 0.5],
    );
    let mut st = state_with(
        vec![vec![0.6, 0.1, 0.3], vec![0.2, 0.5, 0.3]],
        vec![vec![2, 0, 0], vec![0, 0, 1]],
        vec![0.3, 0.3, 0.4],
    );
    let configs: Vec<[u32; 3]> = (0..=2u32)
        .flat_map(|a| (0..=2 - a).map(move |b| [a, b, 2 - a - b]))
        .collect();
    let logs: Vec<f64> = configs.iter().map(|c| log_density_n(c, 0, &st, &m).unwrap()).collect();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = logs.iter().map(|l| (l - top).exp()).sum();
    let mut rng = RngStream::seeded(12);
    let traces: Vec<Vec<f64>> = {
        let mut tr = vec![Vec::with_capacity(100_000); configs.len()];
        for _ in 0..100_000 {
            update_n_mh(&mut st, 0, &m, 1, MhPartner::Weighted, &mut rng).unwrap();
            let cur = [st.n[0].get(0), st.n[0].get(1), st.n[0].get(2)];
            for (i, c) in configs.iter().enumerate() {
                tr[i].push((*c == cur) as u8 as f64);
            }
        }
        tr
    };
    for (i, xs) in traces.iter().enumerate() {
        let freq = xs.iter().sum::<f64>() / xs.len() as f64;
        let target = (logs[i] - top).exp() / z;
        let se = batch_means_se(xs, 50).max(1e-4);
        assert!((freq - target).abs() < 4.0 * se, "{:?}: {freq} vs {target}", configs[i]);
    }
}

#[test]
fn config_validation() {
    let mut cfg = GibbsConfig::default();
    assert_eq!(cfg.stored_draws(), 3800);
    cfg.validate().unwrap();
    cfg.burn_in = cfg.iterations;
    assert!(cfg.validate().is_err());
    let cfg = GibbsConfig {
        thin: 0,
        ..Default::default()
    };
    assert!(cfg.validate().is_err());
}

#[test]
fn stored_count_and_replay() {
    let m = model(
        1.0,
        vec![2, 3, 1],
        NeighborStructure::moving_average(3, 1).unwrap(),
        vec![0.2, 0.3, 0.5],
    );
    let data = ObservedData::from_counts(vec![vec![1, 0, 2], vec![0, 0, 0], vec![3, 1, 0]]).unwrap();
    let cfg = GibbsConfig {
        iterations: 503,
        burn_in: 100,
        thin: 7,
        mh_moves_per_sweep: 2,
        mh_partner: MhPartner::Weighted,
        seed: 77,
    };
    let a = run_gibbs(&data, &m, &cfg).unwrap();
    let b = run_gibbs(&data, &m, &cfg).unwrap();
    assert_eq!(a.len(), cfg.stored_draws());
    assert_eq!(a.len(), 57);
    assert_eq!(a, b);
    assert_eq!(a.iterations[0], 107);
    let c = run_gibbs(&data, &m, &GibbsConfig { seed: 78, ..cfg }).unwrap();
    assert_ne!(a, c);
}

#[test]
fn rejects_mismatched_data() {
    let m = model(
        1.0,
        vec![1, 1],
        NeighborStructure::moving_average(2, 1).unwrap(),
        vec![0.5, 0.5],
    );
    let data = ObservedData::from_counts(vec![vec![1, 0, 2]]).unwrap();
    assert!(matches!(
        run_gibbs(&data, &m, &GibbsConfig::default()),
        Err(RunError::Setup(_))
    ));
}

#[test]
fn classical_posterior_when_no_latent_counts() {
    let m = model(
        2.0,
        vec![0, 0],
        NeighborStructure::moving_average(2, 1).unwrap(),
        vec![0.2, 0.3, 0.5],
    );
    let data = ObservedData::from_counts(vec![vec![4, 1, 0], vec![0, 2, 2]]).unwrap();
    let cfg = GibbsConfig {
        iterations: 20_000,
        burn_in: 100,
        thin: 1,
        mh_moves_per_sweep: 1,
        mh_partner: MhPartner::Weighted,
        seed: 5,
    };
    let chain = run_gibbs(&data, &m, &cfg).unwrap();
    for t in 0..2 {
        let mt = data.size(t) as f64;
        for k in 0..3 {
            let xs = chain.f_trace(t, k);
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            let exact = (2.0 * m.base()[k] + data.counts(t)[k] as f64) / (2.0 + mt);
            assert!((mean - exact).abs() < 3.0 * batch_means_se(&xs, 40), "t{t} k{k}");
        }
    }
}

#[test]
fn tiny_instance_matches_enumeration() {
    let m = model(
        1.0,
        vec![1, 1],
        NeighborStructure::moving_average(2, 1).unwrap(),
        vec![0.5, 0.5],
    );
    let data = ObservedData::from_counts(vec![vec![2, 0], vec![1, 1]]).unwrap();
    let exact = exact_posterior_small(&data, &m).unwrap();
    let cfg = GibbsConfig {
        iterations: 31_000,
        burn_in: 1_000,
        thin: 1,
        mh_moves_per_sweep: 1,
        mh_partner: MhPartner::Weighted,
        seed: 21,
    };
    let chain = run_gibbs(&data, &m, &cfg).unwrap();
    for t in 0..2 {
        let xs = chain.f_trace(t, 0);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!(
            (mean - exact.f_mean[t][0]).abs() < 0.01,
            "t{t}: {mean} vs {}",
            exact.f_mean[t][0]
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sweeps_conserve_counts_and_mass(
        cs in proptest::collection::vec(0u32..6, 1..5),
        q in 0usize..3,
        k in 2usize..6,
        seed in any::<u64>(),
    ) {
        let len = cs.len();
        let base = vec![1.0 / k as f64; k];
        let m = model(0.7, cs.clone(), NeighborStructure::moving_average(len, q).unwrap(), base);
        let counts: Vec<Vec<u32>> = (0..len).map(|t| (0..k).map(|b| ((t + b) % 3) as u32).collect()).collect();
        let data = ObservedData::from_counts(counts).unwrap();
        let mut rng = RngStream::seeded(seed);
        let mut s = GibbsSampler::initialise(&m, &data, 2, &mut rng).unwrap();
        for _ in 0..30 {
            s.sweep(&data, &mut rng).unwrap();
            for t in 0..len {
                prop_assert_eq!(s.state().n[t].total(), cs[t]);
                prop_assert_eq!(s.state().n[t].counts().iter().sum::<u32>(), cs[t]);
                prop_assert!((s.state().f[t].probs().iter().sum::<f64>() - 1.0).abs() < 1e-10);
            }
            prop_assert!((s.state().g.probs().iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
    }
}
