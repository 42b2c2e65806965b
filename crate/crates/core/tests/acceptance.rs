//! Acceptance suite: one test per exit criterion, each printing a pass line
//! with the measured quantities. Run with `--nocapture` to see them.

mod common;

use std::time::Instant;

use perispec::floquet::restricted_laplacian;
use perispec::lattice::level_sets;
use perispec::sweep::coupling_sweep;
use perispec::{
    assemble_floquet, brute_force_lift_oracle, chain_psi_theta, cycle_basis, fit_decay,
    flat_path_report, gauge_conjugate, gen_hypercubic, gen_stripe, hermitian_eigenvalues,
    is_h1_trivial, loop_sum, separable_lower_bound, solve_gauge, spectrum_measure,
    CohomologyError, GaugePotential, OneChain, PeriodicGraph, Potential, Theta,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{random_admissible_graph, random_theta, random_three_valued_potential};

#[test]
fn criterion_1_free_chain() {
    let start = Instant::now();
    let lat = gen_hypercubic(1, &[1], None).unwrap();
    assert_eq!(lat.graph.num_vertices(), 3, "auto-refined to the 3-vertex cell");
    let q = Potential::constant(3, 0.0);

    let bs = perispec::compute_bands(&lat.graph, &q, 1.0, &[256]).unwrap();
    let est = spectrum_measure(&bs);
    assert!(
        (est.measure - 4.0).abs() <= 0.05,
        "measure {} not within 4.00 +/- 0.05",
        est.measure
    );

    let report = flat_path_report(&lat.graph, &q, 0.0);
    assert!(!report.predicts_decay(), "constant potential must not decay");
    let witness = report.levels[0].witness.as_ref().expect("witness cycle");
    assert_eq!(witness.total_offset.components()[0].abs(), 1);

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}, limit 1 s");
    println!(
        "criterion 1 (free chain): PASS measure = {:.4}, witness offset {}, {:?}",
        est.measure, witness.total_offset, elapsed
    );
}

#[test]
fn criterion_2_injective_decay() {
    let start = Instant::now();
    let lat = gen_hypercubic(2, &[2, 2], Some(&[0.0, 1.0, 2.0, 3.0])).unwrap();
    let q = lat.potential.clone().unwrap();

    let report = flat_path_report(&lat.graph, &q, 0.0);
    assert!(report.predicts_decay(), "injective case must predict decay");

    let mus: Vec<f64> = [1.0, 1.5, 2.0, 2.5, 3.0]
        .iter()
        .map(|e| 10f64.powf(*e))
        .collect();
    let sr = coupling_sweep(&lat.graph, &q, &mus, &[48, 48]).unwrap();
    for w in sr.total_measures.windows(2) {
        assert!(w[1] < w[0], "measures not strictly decreasing: {w:?}");
    }
    let fit = fit_decay(&sr).unwrap();
    assert!(fit.slope <= -0.9, "log-log slope {} exceeds -0.9", fit.slope);

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}, limit 60 s");
    println!(
        "criterion 2 (injective decay): PASS measures = {:?}, slope = {:.3}, {:?}",
        sr.total_measures, fit.slope, elapsed
    );
}

#[test]
fn criterion_3_stripe_lower_bound() {
    let start = Instant::now();
    let lat = gen_stripe(2, &[0.0, 1.0]).unwrap();
    let q = lat.potential.clone().unwrap();

    let report = flat_path_report(&lat.graph, &q, 0.0);
    assert!(!report.predicts_decay(), "stripe must not predict decay");
    for level in &report.levels {
        let k = &level.witness.as_ref().expect("witness").total_offset;
        assert_eq!(k.components()[0], 0, "witness must wind along axis 2");
        assert_eq!(k.components()[1].abs(), 1);
    }

    let bound = separable_lower_bound(&lat.graph, &q).unwrap();
    assert_eq!(bound.value, 8.0, "4mr with m = 1, r = 2");

    let bs = perispec::compute_bands(&lat.graph, &q, 1000.0, &[48, 48]).unwrap();
    let est = spectrum_measure(&bs);
    assert!(
        est.measure >= bound.value - 0.1,
        "measure {} below 4mr - 0.1 = {}",
        est.measure,
        bound.value - 0.1
    );
    assert!(est.measure < 9.0, "measure {} implausibly large", est.measure);

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}, limit 30 s");
    println!(
        "criterion 3 (stripe lower bound): PASS measure = {:.4} >= {:.1}, {:?}",
        est.measure,
        bound.value - 0.1,
        elapsed
    );
}

#[test]
fn criterion_4_gauge_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut trivial_levels = 0usize;
    for _ in 0..50 {
        let g = random_admissible_graph(&mut rng);
        let q = random_three_valued_potential(&mut rng, g.num_vertices());
        for level in level_sets(&g, &q, 0.0) {
            let frag = g.induced_subgraph(&level.vertices);
            let (trivial, _) = is_h1_trivial(&frag);
            if !trivial {
                continue;
            }
            trivial_levels += 1;
            let m_zero = restricted_laplacian(&frag, &Theta::zero(g.dim()));
            let evs_zero = hermitian_eigenvalues(&m_zero).unwrap();
            for _ in 0..100 {
                let theta = random_theta(&mut rng, g.dim());
                let m_theta = restricted_laplacian(&frag, &theta);
                let evs = hermitian_eigenvalues(&m_theta).unwrap();
                for (a, b) in evs.iter().zip(&evs_zero) {
                    assert!(
                        (a - b).abs() <= 1e-10,
                        "eigenvalue drift {:.3e} on a trivial level set",
                        (a - b).abs()
                    );
                }
                let phi = solve_gauge(&frag, &chain_psi_theta(&frag, &theta))
                    .expect("trivial level sets admit a gauge");
                let conj = gauge_conjugate(&m_theta, &phi);
                let dist = conj.max_entry_distance(&m_zero);
                assert!(dist <= 1e-12, "gauge residue {dist:.3e} above 1e-12");
            }
        }
    }
    assert!(trivial_levels >= 20, "only {trivial_levels} trivial level sets sampled");
    println!(
        "criterion 4 (gauge invariance): PASS {} trivial level sets x 100 thetas",
        trivial_levels
    );
}

#[test]
fn criterion_5_lift_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut checked = 0usize;
    for _ in 0..50 {
        let g = random_admissible_graph(&mut rng);
        let q = random_three_valued_potential(&mut rng, g.num_vertices());
        for level in level_sets(&g, &q, 0.0) {
            let frag = g.induced_subgraph(&level.vertices);
            let (trivial, _) = is_h1_trivial(&frag);
            let infinite = brute_force_lift_oracle(&g, &level.vertices, 6);
            assert_eq!(
                trivial, !infinite,
                "criterion disagrees with the lift oracle on {:?}",
                level.vertices
            );
            checked += 1;
        }
    }
    println!("criterion 5 (lift oracle equivalence): PASS {checked} level sets, 0 disagreements");
}

#[test]
fn criterion_6_gauge_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut nontrivial_cases = 0usize;
    for _ in 0..100 {
        let d = rng.random_range(1..=2usize);
        let n = rng.random_range(2..=10u32);
        // random spanning tree plus a few chords on distinct pairs
        let mut pairs: Vec<(u32, u32)> = Vec::new();
        let mut edges: Vec<(u32, u32, Vec<i64>)> = Vec::new();
        for v in 1..n {
            let u = rng.random_range(0..v);
            let offset: Vec<i64> = (0..d).map(|_| rng.random_range(-2..=2i64)).collect();
            pairs.push((u.min(v), u.max(v)));
            edges.push((u, v, offset));
        }
        for _ in 0..rng.random_range(0..=3usize) {
            let u = rng.random_range(0..n);
            let v = rng.random_range(0..n);
            let pair = (u.min(v), u.max(v));
            if u == v || pairs.contains(&pair) {
                continue;
            }
            let offset: Vec<i64> = (0..d).map(|_| rng.random_range(-2..=2i64)).collect();
            pairs.push(pair);
            edges.push((u, v, offset));
        }
        let g = PeriodicGraph::new(d, n, edges).unwrap();
        let frag = g.as_fragment();

        // round trip: a gradient chain is recovered up to component constants
        let phi0: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
        let phi0 = GaugePotential::new(&frag, phi0);
        let psi = OneChain::gradient(&frag, &phi0);
        let phi = solve_gauge(&frag, &psi).expect("gradient chains are trivial");
        let grad = OneChain::gradient(&frag, &phi);
        for (a, b) in grad.values().iter().zip(psi.values()) {
            assert!((a - b).abs() <= 1e-12, "gradient residual {:.3e}", (a - b).abs());
        }
        // independent component labels by union-find over the edges
        let mut label: Vec<u32> = (0..n).collect();
        fn find(label: &mut Vec<u32>, mut x: u32) -> u32 {
            while label[x as usize] != x {
                label[x as usize] = label[label[x as usize] as usize];
                x = label[x as usize];
            }
            x
        }
        for e in frag.edges() {
            let a = find(&mut label, e.u.0);
            let b = find(&mut label, e.v.0);
            label[a as usize] = b;
        }
        let mut shift_per_component: Vec<Option<f64>> = vec![None; n as usize];
        for v in 0..n {
            let root = find(&mut label, v) as usize;
            let shift = phi.values()[v as usize] - phi0.values()[v as usize];
            match shift_per_component[root] {
                None => shift_per_component[root] = Some(shift),
                Some(s) => assert!(
                    (s - shift).abs() <= 1e-12,
                    "shift varies within a component by {:.3e}",
                    (s - shift).abs()
                ),
            }
        }

        // error path: a chain with a nonzero loop sum is rejected with a
        // witness whose loop sum equals the offset pairing
        let basis = cycle_basis(&frag);
        let winding = basis.cycles.iter().find(|c| !c.total_offset.is_zero());
        if let Some(cycle) = winding {
            let theta = loop {
                let t = random_theta(&mut rng, d);
                if cycle.total_offset.dot(&t).abs() > 1e-3 {
                    break t;
                }
            };
            let psi_theta = chain_psi_theta(&frag, &theta);
            match solve_gauge(&frag, &psi_theta) {
                Err(CohomologyError::NontrivialClass { loop_sum: ls, cycle, .. }) => {
                    let pairing = cycle.total_offset.dot(&theta);
                    assert!(
                        (ls - pairing).abs() <= 1e-12,
                        "witness loop sum {ls:.3e} vs pairing {pairing:.3e}"
                    );
                    let direct = loop_sum(&frag, &psi_theta, &cycle.vertices).unwrap();
                    assert!((direct - ls).abs() <= 1e-12);
                }
                Ok(_) => panic!("winding chain accepted as a gradient"),
                Err(other) => panic!("unexpected error {other:?}"),
            }
            nontrivial_cases += 1;
        }
    }
    assert!(nontrivial_cases >= 30, "only {nontrivial_cases} winding cases sampled");
    println!(
        "criterion 6 (gauge round trip): PASS 100 trees-plus-chords, {} winding rejections",
        nontrivial_cases
    );
}

#[test]
fn criterion_7_perturbation_rate() {
    let start = Instant::now();
    let lat = gen_hypercubic(2, &[2, 2], Some(&[0.0, 1.0, 2.0, 3.0])).unwrap();
    let q = lat.potential.clone().unwrap();
    let sr = coupling_sweep(&lat.graph, &q, &[1e2, 1e3, 1e4], &[48, 48]).unwrap();
    let mut ratios = Vec::new();
    for step in 0..2 {
        for (k, a) in sr.level_values.iter().enumerate() {
            let len_mu = sr.cluster_lengths[step][k];
            let len_10mu = sr.cluster_lengths[step + 1][k];
            let ratio = len_10mu / len_mu;
            assert!(
                (0.05..=0.2).contains(&ratio),
                "cluster a = {a}: lengths {len_mu:.3e} -> {len_10mu:.3e}, ratio {ratio:.3} outside [0.05, 0.2]"
            );
            ratios.push(ratio);
        }
    }
    let elapsed = start.elapsed();
    println!(
        "criterion 7 (perturbation rate): PASS ratios {:?}, {:?}",
        ratios
            .iter()
            .map(|r| (r * 1000.0).round() / 1000.0)
            .collect::<Vec<_>>(),
        elapsed
    );
}

#[test]
fn criterion_8_structural_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    // Betti identity on 200 random fragments
    for _ in 0..200 {
        let g = random_admissible_graph(&mut rng);
        let keep: Vec<_> = g
            .vertices()
            .filter(|_| rng.random_bool(0.6))
            .collect();
        let frag = g.induced_subgraph(&keep);
        let basis = cycle_basis(&frag);
        assert_eq!(
            basis.cycles.len(),
            frag.num_edges() + basis.beta0 - frag.num_vertices(),
            "Betti identity violated"
        );
        assert_eq!(basis.beta1, basis.cycles.len());
    }
    // Hermiticity and realness assertions hold across random assemblies
    for _ in 0..200 {
        let g = random_admissible_graph(&mut rng);
        let q = random_three_valued_potential(&mut rng, g.num_vertices());
        let mu = 10f64.powf(rng.random::<f64>() * 3.0);
        let theta = random_theta(&mut rng, g.dim());
        let m = assemble_floquet(&g, &q, mu, &theta);
        assert_eq!(m.hermiticity_defect(), 0.0);
        let evs = hermitian_eigenvalues(&m).expect("assembled matrices are Hermitian");
        assert!(evs.windows(2).all(|w| w[0] <= w[1]));
        assert!(evs.iter().all(|v| v.is_finite()));
    }
    println!("criterion 8 (structural invariants): PASS 200 fragments + 200 assemblies");
}
