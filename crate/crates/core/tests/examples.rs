use std::sync::Arc;

use approx::assert_relative_eq;
use nalgebra::DMatrix;
use qgibbs::fit::linear_fit;
use qgibbs::gibbs::{gibbs_distribution, star_critical_beta, ClassicalModel};
use qgibbs::graphs::{build_path, build_star, SpinBasis, DEFAULT_BASIS_CAP};
use qgibbs::indepset::{build_is_parent, star_transition_probs, IsParentParams};
use qgibbs::ising::{build_ising_parent, IsingParentParams};
use qgibbs::linalg::dense_eigenvalues;
use qgibbs::markov::{
    glauber_chain, metropolis_is_chain, mixing_time, simulate_chain, MixingOptions, MixingTime, StartDistribution,
};
use qgibbs::parent::{build_parent, energy_gap, gibbs_state_vector, ground_state, SymmetricOperator};
use qgibbs::sparse::CsrMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn operator(basis: SpinBasis, rows: &[&[f64]]) -> SymmetricOperator {
    let m = CsrMatrix::from_rows(rows.len(), |i, out| out.extend(rows[i].iter().copied().enumerate()));
    SymmetricOperator::new(Arc::new(basis), m).unwrap()
}

#[test]
fn glauber_coefficients_at_half_match_arbitrary_precision_values() {
    // 40-digit evaluations of (1+sech 1)/4, tanh(1)/2, (1-sech 1)/4
    let p = IsingParentParams::from_beta(0.5).unwrap();
    assert_relative_eq!(p.h, 0.412_013_568_415_971_349_893_744_338_306_5, max_relative = 1e-15);
    assert_relative_eq!(p.j1, 0.380_797_077_977_882_444_059_729_141_302_4, max_relative = 1e-15);
    assert_relative_eq!(p.j2, 0.087_986_431_584_028_650_106_255_661_693_5, max_relative = 1e-14);
}

#[test]
fn free_spins_in_a_transverse_field_have_binomial_levels() {
    let n = 6;
    let h = build_ising_parent(n, &IsingParentParams::from_beta(0.0).unwrap()).unwrap();
    let mut ev = dense_eigenvalues(h.matrix().to_dense());
    ev.sort_by(f64::total_cmp);
    let mut want = Vec::new();
    for k in 0..=n {
        want.extend(std::iter::repeat(k as f64).take(binomial(n, k)));
    }
    assert_eq!(ev.len(), want.len());
    for (a, b) in ev.iter().zip(&want) {
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }
}

#[test]
fn infinite_temperature_glauber_parent_is_a_sum_of_spin_flips() {
    let n = 4;
    let m = ClassicalModel::ising_cycle(n).unwrap();
    let h = build_parent(&glauber_chain(&m, 0.0).unwrap(), &m, 0.0).unwrap();
    let dim = 1 << n;
    let mut want = DMatrix::<f64>::zeros(dim, dim);
    for s in 0..dim {
        for i in 0..n {
            want[(s, s)] += 0.5;
            want[(s, s ^ (1 << i))] -= 0.5;
        }
    }
    assert!((h.matrix().to_dense() - want).abs().max() < 1e-14);
    assert_relative_eq!(energy_gap(&h).unwrap(), 1.0, epsilon = 1e-10);
}

#[test]
fn gibbs_amplitudes_of_ordered_and_alternating_rings() {
    let m = ClassicalModel::ising_cycle(4).unwrap();
    let psi = gibbs_state_vector(&m, 2.0).unwrap();
    let up = m.basis().index_of(0b1111).unwrap();
    let alt = m.basis().index_of(0b0101).unwrap();
    assert_relative_eq!(psi.amplitudes[up] / psi.amplitudes[alt], 8f64.exp(), max_relative = 1e-12);
    let flat = gibbs_state_vector(&m, 0.0).unwrap();
    for a in flat.amplitudes {
        assert_relative_eq!(a, 0.25, epsilon = 1e-15);
    }
}

#[test]
fn ground_states_of_small_matrices() {
    let path = build_path(2).unwrap();
    let g = ground_state(&operator(
        SpinBasis::independent_sets(&path, 16).unwrap(),
        &[&[3.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 2.0]],
    ))
    .unwrap();
    assert_relative_eq!(g.energy, 1.0, epsilon = 1e-12);
    assert_relative_eq!(g.vector[1], 1.0, epsilon = 1e-10);

    let g = ground_state(&operator(SpinBasis::full(1, 4).unwrap(), &[&[0.0, -1.0], &[-1.0, 0.0]])).unwrap();
    assert_relative_eq!(g.energy, -1.0, epsilon = 1e-12);
    for a in &g.vector {
        assert_relative_eq!(*a, 0.5f64.sqrt(), epsilon = 1e-10);
    }

    let h = operator(SpinBasis::full(1, 4).unwrap(), &[&[0.0, 0.0], &[0.0, 5.0]]);
    assert_relative_eq!(energy_gap(&h).unwrap(), 5.0, epsilon = 1e-12);
}

#[test]
fn metropolis_moves_on_a_two_vertex_path() {
    let m = ClassicalModel::independent_set(build_path(2).unwrap(), DEFAULT_BASIS_CAP).unwrap();
    let b = m.basis().clone();
    let (empty, a, c) = (b.index_of(0).unwrap(), b.index_of(1).unwrap(), b.index_of(2).unwrap());
    let free = metropolis_is_chain(&m, 0.0).unwrap();
    assert_relative_eq!(free.matrix().get(empty, a), 0.5);
    assert_relative_eq!(free.matrix().get(empty, c), 0.5);
    let cold = metropolis_is_chain(&m, 2.0).unwrap();
    assert_relative_eq!(cold.matrix().get(a, empty), 0.5 * (-2f64).exp(), max_relative = 1e-14);
}

#[test]
fn metropolis_parent_couplings() {
    let g = build_path(3).unwrap();
    let p = IsParentParams::from_beta(&g, 2.0).unwrap();
    assert_relative_eq!(p.v_e[1], 0.135_335_283_236_612_691_893_999_494_972_5, max_relative = 1e-15);
    assert_relative_eq!(p.omega[1], 0.367_879_441_171_442_321_595_523_770_161_5, max_relative = 1e-15);
    let p0 = IsParentParams::from_beta(&g, 0.0).unwrap();
    assert!(p0.v_e.iter().chain(&p0.v_g).chain(&p0.omega).all(|&x| x == 1.0));

    let star = build_star(5).unwrap();
    let beta = 0.7;
    let ps = IsParentParams::from_beta(&star, beta).unwrap();
    let (_, p10) = star_transition_probs(5, beta).unwrap();
    assert_relative_eq!(ps.omega[0], p10.sqrt(), max_relative = 1e-14);
}

#[test]
fn single_vertex_parent_and_the_empty_ground_state() {
    let g = build_path(1).unwrap();
    let h = build_is_parent(&g, &IsParentParams::from_beta(&g, 0.0).unwrap()).unwrap();
    let d = h.matrix().to_dense();
    assert_eq!(d, DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));
    assert_relative_eq!(energy_gap(&h).unwrap(), 2.0, epsilon = 1e-12);

    let chain = build_path(6).unwrap();
    let h = build_is_parent(&chain, &IsParentParams::uniform(6, 4.0, 1.0, 1e-4)).unwrap();
    let gs = ground_state(&h).unwrap();
    let empty = h.basis().index_of(0).unwrap();
    assert!(gs.vector[empty].abs() > 1.0 - 1e-6);
}

#[test]
fn star_transition_probabilities() {
    for b in 1..=8 {
        let (p01, p10) = star_transition_probs(b, 0.0).unwrap();
        assert_relative_eq!(p01, (2.0f64 / 3.0).powi(b as i32), max_relative = 1e-14);
        assert_eq!(p10, 1.0);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let (p01, p10) = star_transition_probs(b, star_critical_beta()).unwrap();
        assert_relative_eq!(p01, phi.powi(-(b as i32)), max_relative = 1e-13);
        assert_relative_eq!(p10, phi.powi(-(b as i32)), max_relative = 1e-13);
    }

    // probability that every inner vertex is empty given an empty center,
    // summed over the Gibbs weights of the star
    let (b, beta) = (4, 1.0);
    let m = ClassicalModel::independent_set(build_star(b).unwrap(), DEFAULT_BASIS_CAP).unwrap();
    let p = gibbs_distribution(&m, beta).unwrap();
    let inner: u64 = (0..b).map(|j| 1 << (1 + 2 * j)).sum();
    let (mut empty, mut free) = (0.0, 0.0);
    for (k, &s) in m.basis().states().iter().enumerate() {
        if s & 1 == 0 {
            empty += p.probabilities[k];
            if s & inner == 0 {
                free += p.probabilities[k];
            }
        }
    }
    let (p01, _) = star_transition_probs(b, beta).unwrap();
    assert_relative_eq!(free / empty, p01, max_relative = 1e-12);
    assert_relative_eq!(p01, 0.111_366_082_230_124_189_526_145_918_535_1, max_relative = 1e-14);
}

#[test]
fn empty_trajectory_is_the_start() {
    let m = ClassicalModel::ising_cycle(4).unwrap();
    let c = glauber_chain(&m, 1.0).unwrap();
    assert_eq!(simulate_chain(&c, 0b0110, 0, 3).unwrap(), vec![0b0110]);
}

#[test]
fn free_glauber_sweeps_visit_states_uniformly() {
    let n = 4;
    let sweeps = 100_000;
    let m = ClassicalModel::ising_cycle(n).unwrap();
    let c = glauber_chain(&m, 0.0).unwrap();
    let path = simulate_chain(&c, 0, n * sweeps, 2024).unwrap();
    let mut counts = vec![0usize; 1 << n];
    for k in 1..=sweeps {
        counts[path[k * n] as usize] += 1;
    }

    // Successive sweeps are correlated: the variance of each frequency is
    // inflated by the integrated autocorrelation of the sweep matrix.
    let step = c.matrix().to_dense();
    let sweep = (1..n).fold(step.clone(), |acc, _| acc * &step);
    let pi = 1.0 / (1 << n) as f64;
    let mut power = sweep.clone();
    let mut rho_sum = vec![0.0; 1 << n];
    for _ in 0..200 {
        for (x, r) in rho_sum.iter_mut().enumerate() {
            *r += (power[(x, x)] - pi) / (1.0 - pi);
        }
        power = &power * &sweep;
    }
    for (x, &k) in counts.iter().enumerate() {
        let freq = k as f64 / sweeps as f64;
        let sigma = (pi * (1.0 - pi) * (1.0 + 2.0 * rho_sum[x]) / sweeps as f64).sqrt();
        assert!((freq - pi).abs() < 3.0 * sigma, "state {x}: {freq} vs {pi} ± {sigma}");
    }
}

#[test]
fn star_center_stays_empty_for_many_escape_times() {
    let (b, beta) = (4usize, 1.0);
    let m = ClassicalModel::independent_set(build_star(b).unwrap(), DEFAULT_BASIS_CAP).unwrap();
    let c = metropolis_is_chain(&m, beta).unwrap();
    let (p01, _) = star_transition_probs(b, beta).unwrap();
    let starts: Vec<u64> = m.basis().states().iter().copied().filter(|s| s & 1 == 0).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let runs = 400;
    let mut times = Vec::with_capacity(runs);
    let mut picked = vec![0usize; starts.len()];
    for r in 0..runs {
        let k = rng.gen_range(0..starts.len());
        picked[k] += 1;
        let path = simulate_chain(&c, starts[k], 20_000, r as u64).unwrap();
        times.push(path.iter().position(|s| s & 1 == 1).expect("center occupied within the horizon") as f64);
    }
    let mean = times.iter().sum::<f64>() / runs as f64;
    let sd = (times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (runs - 1) as f64).sqrt();
    assert!(mean > 5.0 / p01, "{mean}");

    // exact mean hitting time of the occupied center: (I - Q) h = 1 on the
    // empty-center states, averaged over the starts actually drawn
    let idx: Vec<usize> = starts.iter().map(|&s| m.basis().index_of(s).unwrap()).collect();
    let q = DMatrix::from_fn(idx.len(), idx.len(), |i, j| c.matrix().get(idx[i], idx[j]));
    let h = (DMatrix::identity(idx.len(), idx.len()) - q)
        .lu()
        .solve(&nalgebra::DVector::from_element(idx.len(), 1.0))
        .unwrap();
    let exact = picked.iter().zip(h.iter()).map(|(&k, t)| k as f64 * t).sum::<f64>() / runs as f64;
    let stderr = sd / (runs as f64).sqrt();
    assert!((mean - exact).abs() < 3.0 * stderr, "{mean} vs {exact} ± {stderr}");
}

#[test]
fn star_mixing_time_grows_exponentially_in_the_branch_count() {
    let beta = star_critical_beta();
    let (mut bs, mut logs) = (Vec::new(), Vec::new());
    for b in 2..=6usize {
        let m = ClassicalModel::independent_set(build_star(b).unwrap(), DEFAULT_BASIS_CAP).unwrap();
        let c = metropolis_is_chain(&m, beta).unwrap();
        let p = gibbs_distribution(&m, beta).unwrap();
        let r = mixing_time(&c, &p, &StartDistribution::WorstCase, &MixingOptions::default()).unwrap();
        let MixingTime::Steps(t) = r.t_mix else { panic!("cap exceeded at b = {b}") };
        bs.push(b as f64);
        logs.push((t as f64).ln());
    }
    let fit = linear_fit(&bs, &logs).unwrap();
    let mean = logs.iter().sum::<f64>() / logs.len() as f64;
    let total: f64 = logs.iter().map(|y| (y - mean).powi(2)).sum();
    let resid: f64 = bs
        .iter()
        .zip(&logs)
        .map(|(x, y)| (y - fit.intercept - fit.slope * x).powi(2))
        .sum();
    assert!(1.0 - resid / total > 0.99, "{fit:?}");
    // per-branch suppression ln(1/p01)/b = ln φ, plus the growth of n = 2b + 1
    let per_branch = beta;
    let with_sites = per_branch + (13.0f64 / 5.0).ln() / 4.0;
    assert!(fit.slope > per_branch && fit.slope < with_sites, "{fit:?}");
}

#[test]
fn cold_ising_ring_mixes_no_faster_than_n_squared() {
    let mut last = 0.0;
    for n in [4usize, 6, 8, 10] {
        let m = ClassicalModel::ising_cycle(n).unwrap();
        let c = glauber_chain(&m, 3.0).unwrap();
        let p = gibbs_distribution(&m, 3.0).unwrap();
        let r = mixing_time(&c, &p, &StartDistribution::WorstCase, &MixingOptions::default()).unwrap();
        let t_m = r.t_m().unwrap();
        assert!(t_m >= (n * n) as f64, "n = {n}: {t_m}");
        assert!(t_m >= last);
        assert_eq!(r.bound_holds(), Some(true));
        last = t_m;
    }
}
