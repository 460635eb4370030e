mod common;

use common::{random_mixture, rng};
use frsense::geometry::{exp_map, geodesic_path, inv_exp_map};
use frsense::{
    fr_distance, karcher_mean, karcher_variance, tangent_pca, Grid, GridPdf, KarcherOptions, Srd,
};
use proptest::prelude::*;
use std::f64::consts::FRAC_PI_2;

fn grid() -> Grid {
    Grid::new(512).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distance_is_a_metric(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = grid();
        let (a, b, c) = (random_mixture(&mut r, g), random_mixture(&mut r, g), random_mixture(&mut r, g));
        let ab = fr_distance(&a, &b).unwrap();
        let ba = fr_distance(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-12);
        prop_assert_eq!(fr_distance(&a, &a).unwrap(), 0.0);
        prop_assert!((0.0..=FRAC_PI_2).contains(&ab));
        let ac = fr_distance(&a, &c).unwrap();
        let bc = fr_distance(&b, &c).unwrap();
        prop_assert!(ac <= ab + bc + 1e-9);
    }

    #[test]
    fn exp_inverts_log(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = grid();
        let a = random_mixture(&mut r, g).to_srd();
        let b = random_mixture(&mut r, g).to_srd();
        let d = a.distance(&b).unwrap();
        prop_assume!(d < FRAC_PI_2 - 0.01);
        let v = inv_exp_map(&a, &b).unwrap();
        prop_assert!((v.norm() - d).abs() < 1e-8);
        let back = exp_map(&a, &v).unwrap();
        for (x, y) in back.values().iter().zip(b.values()) {
            prop_assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn exp_travels_the_tangent_length(seed in any::<u64>(), t in 0.01f64..1.2) {
        let mut r = rng(seed);
        let g = grid();
        let a = random_mixture(&mut r, g).to_srd();
        let b = random_mixture(&mut r, g).to_srd();
        let v = inv_exp_map(&a, &b).unwrap();
        prop_assume!(v.norm() > 1e-3);
        let w = v.scaled(t / v.norm());
        let p = exp_map(&a, &w).unwrap();
        // the orthant clamp only bites once the geodesic leaves it
        if p.values().iter().all(|x| *x > 0.0) {
            prop_assert!((a.distance(&p).unwrap() - t).abs() < 1e-8);
        }
    }
}

#[test]
fn uniform_to_ramp_matches_fine_quadrature() {
    // int_0^1 sqrt(2x) dx by a 1e5-point midpoint rule
    let m = 100_000;
    let inner: f64 = (0..m)
        .map(|i| (2.0 * (i as f64 + 0.5) / m as f64).sqrt())
        .sum::<f64>()
        / m as f64;
    let oracle = inner.acos();
    assert!((oracle - (2.0 * 2f64.sqrt() / 3.0).acos()).abs() < 1e-6);
    let g = grid();
    let u = GridPdf::uniform(g);
    let ramp = GridPdf::from_fn(g, |x| 2.0 * x).unwrap();
    let d = fr_distance(&u, &ramp).unwrap();
    assert!((d - oracle).abs() < 1e-4, "{d} vs {oracle}");
    let v = inv_exp_map(&u.to_srd(), &ramp.to_srd()).unwrap();
    assert!((v.norm() - oracle).abs() < 1e-4);
}

#[test]
fn disjoint_supports_are_orthogonal() {
    let g = grid();
    let left = GridPdf::from_fn(g, |x| if x < 0.5 { 1.0 } else { 0.0 }).unwrap();
    let right = GridPdf::from_fn(g, |x| if x > 0.5 { 1.0 } else { 0.0 }).unwrap();
    assert!((fr_distance(&left, &right).unwrap() - FRAC_PI_2).abs() < 1e-6);
}

#[test]
fn distance_survives_a_common_warp() {
    // gamma(x) = x + 0.3 x (1 - x), increasing with gamma(0)=0, gamma(1)=1
    let warp = |x: f64| x + 0.3 * x * (1.0 - x);
    let dwarp = |x: f64| 1.3 - 0.6 * x;
    let g = grid();
    let mut r = rng(5);
    for _ in 0..10 {
        let a = random_mixture(&mut r, Grid::new(4097).unwrap());
        let b = random_mixture(&mut r, Grid::new(4097).unwrap());
        let fine = a.grid();
        let eval = |p: &GridPdf, x: f64| {
            let h = fine.spacing();
            let i = ((x / h).floor() as usize).min(fine.n_points() - 2);
            let t = x / h - i as f64;
            p.values()[i] * (1.0 - t) + p.values()[i + 1] * t
        };
        let coarse = |p: &GridPdf| GridPdf::from_fn(g, |x| eval(p, x)).unwrap();
        let warped = |p: &GridPdf| GridPdf::from_fn(g, |x| eval(p, warp(x)) * dwarp(x)).unwrap();
        let before = fr_distance(&coarse(&a), &coarse(&b)).unwrap();
        let after = fr_distance(&warped(&a), &warped(&b)).unwrap();
        assert!((before - after).abs() < 5e-3, "{before} {after}");
    }
}

#[test]
fn seven_point_geodesic_is_evenly_spaced() {
    let g = grid();
    let a = GridPdf::uniform(g).to_srd();
    let b = GridPdf::from_fn(g, |x| 2.0 * x).unwrap().to_srd();
    let d = a.distance(&b).unwrap();
    let path = geodesic_path(&a, &b, 7).unwrap();
    assert_eq!(path.len(), 7);
    for w in path.windows(2) {
        let step = fr_distance(&w[0], &w[1]).unwrap();
        assert!((step - d / 6.0).abs() < 1e-8);
    }
    for p in &path {
        assert!((g.integrate(p.values()) - 1.0).abs() < 1e-10);
    }
    let mid = path[3].to_srd();
    assert!((mid.distance(&a).unwrap() - mid.distance(&b).unwrap()).abs() < 1e-8);
}

#[test]
fn karcher_mean_is_a_minimizer() {
    let g = grid();
    let opts = KarcherOptions::default();
    let mut r = rng(99);
    for _ in 0..50 {
        let srds: Vec<Srd> = (0..20)
            .map(|_| random_mixture(&mut r, g).to_srd())
            .collect();
        let m = karcher_mean(&srds, &opts).unwrap();
        assert!(m.converged);
        assert!(m.gradient_norm < 1e-6);
        let at_mean = karcher_variance(&srds, &m.mean).unwrap();
        for s in &srds {
            assert!(at_mean <= karcher_variance(&srds, s).unwrap() + 1e-9);
        }
        // brute-force definition
        let brute = srds
            .iter()
            .map(|s| m.mean.distance(s).unwrap().powi(2))
            .sum::<f64>()
            / srds.len() as f64;
        assert!((brute - at_mean).abs() < 1e-10);
    }
}

#[test]
fn two_point_mean_is_the_midpoint() {
    let g = grid();
    let mut r = rng(3);
    for _ in 0..10 {
        let a = random_mixture(&mut r, g).to_srd();
        let b = random_mixture(&mut r, g).to_srd();
        let m = karcher_mean(&[a.clone(), b.clone()], &KarcherOptions::default()).unwrap();
        let mid = geodesic_path(&a, &b, 3).unwrap()[1].to_srd();
        assert!(m.mean.distance(&mid).unwrap() < 1e-6);
        let d = a.distance(&b).unwrap();
        assert!((m.mean.distance(&a).unwrap() - d / 2.0).abs() < 1e-6);
        let var = karcher_variance(&[a, b], &m.mean).unwrap();
        assert!((var - d * d / 4.0).abs() < 1e-6);
    }
}

#[test]
fn tpca_spectrum_and_reconstruction() {
    let g = grid();
    let mut r = rng(17);
    let srds: Vec<Srd> = (0..12)
        .map(|_| random_mixture(&mut r, g).to_srd())
        .collect();
    let t = tangent_pca(&srds, &KarcherOptions::default()).unwrap();
    let tangents: Vec<Vec<f64>> = srds
        .iter()
        .map(|s| inv_exp_map(&t.mean.mean, s).unwrap().values().to_vec())
        .collect();
    let trace = tangents.iter().map(|v| g.inner(v, v)).sum::<f64>() / (srds.len() - 1) as f64;
    assert!((t.total_variance() - trace).abs() < 1e-8);
    for v in &tangents {
        let mut rebuilt = vec![0.0; g.n_points()];
        for e in &t.eigenvectors {
            let c = g.inner(v, e);
            rebuilt.iter_mut().zip(e).for_each(|(a, b)| *a += c * b);
        }
        let err: Vec<f64> = rebuilt.iter().zip(v).map(|(a, b)| a - b).collect();
        assert!(g.norm(&err) < 1e-6);
    }
}

#[test]
fn tpca_of_a_geodesic_has_rank_one() {
    let g = grid();
    let a = GridPdf::uniform(g).to_srd();
    let b = GridPdf::from_fn(g, |x| 0.5 + x).unwrap().to_srd();
    let srds: Vec<Srd> = geodesic_path(&a, &b, 9)
        .unwrap()
        .iter()
        .map(|p| p.to_srd())
        .collect();
    let t = tangent_pca(&srds, &KarcherOptions::default()).unwrap();
    assert_eq!(t.eigenvalues.iter().filter(|l| **l > 1e-10).count(), 1);
}
