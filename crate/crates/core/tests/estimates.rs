use parobs_core::analysis::{
    check_sine_lower_bound, f_map, iterated_f, kapteyn_bound, kapteyn_g, quantum_limit_distance,
    quantum_limit_mass, whispering_gallery_decay,
};
use parobs_core::special_fn::{bessel_j, BesselZeroTable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

#[test]
fn sine_lower_bound_on_random_densities() {
    let mut rng = ChaCha8Rng::seed_from_u64(20240611);
    for _ in 0..100 {
        let fraction: f64 = rng.gen_range(0.05..0.95);
        let raw: Vec<f64> = (0..32).map(|_| rng.gen_range(0.0..1.0)).collect();
        let rho = fill_to_mass(&raw, fraction * PI);
        assert!(rho.iter().all(|&v| (0.0..=1.0).contains(&v)));
        for j in 1..=50 {
            let c = check_sine_lower_bound(&rho, j).unwrap();
            assert!(c.pass, "j = {j}: {} < {}", c.lhs, c.rhs);
        }
    }
}

/// Scales `raw` and clips at 1 so the pieces of width pi/32 carry `mass`.
fn fill_to_mass(raw: &[f64], mass: f64) -> Vec<f64> {
    let h = PI / raw.len() as f64;
    let total = |c: f64| raw.iter().map(|v| (c * v).min(1.0)).sum::<f64>() * h;
    let (mut lo, mut hi) = (0.0, 1.0);
    while total(hi) < mass {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(mid) < mass {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    raw.iter().map(|v| (hi * v).min(1.0)).collect()
}

#[test]
fn sine_lower_bound_needs_densities_below_one() {
    // mass piled where sin^2(3x) is small breaks the bound once rho > 1
    let mut rho = vec![0.0; 32];
    for p in [0, 10, 11, 21, 31] {
        rho[p] = 2.0;
    }
    let c = check_sine_lower_bound(&rho, 3).unwrap();
    assert!(!c.pass, "{c:?}");
}

#[test]
fn sine_lower_bound_indicator_example() {
    // indicator of (0, 0.2 pi) on five pieces
    let c = check_sine_lower_bound(&[1.0, 0.0, 0.0, 0.0, 0.0], 1).unwrap();
    assert!((c.lhs - 0.076_395_136_285_190_93).abs() < 1e-14);
    assert!((c.rhs - 0.020_266_639_212_742_76).abs() < 1e-14);
    assert!(c.pass);
}

#[test]
fn f_composition() {
    assert_eq!(f_map(0.0), 0.0);
    let twice = iterated_f(0.2 * PI, 2).unwrap();
    assert!((twice - 1.139_412_133_240_486_8e-7).abs() < 1e-20);
    let mut prev = 0.0;
    for i in 1..=200 {
        let v = f_map(PI * i as f64 / 200.0);
        assert!(v > prev);
        prev = v;
    }
}

#[test]
fn kapteyn_grid() {
    assert_eq!(kapteyn_g(1.0), 0.0);
    let mut prev = f64::NEG_INFINITY;
    for i in 1..=100 {
        let g = kapteyn_g(i as f64 / 100.0);
        assert!(g > prev && g <= 0.0);
        prev = g;
    }
    for j in [5, 10, 20, 40] {
        for y in [0.3, 0.6, 0.9] {
            let c = kapteyn_bound(j, y).unwrap();
            assert!(c.pass, "j = {j}, y = {y}: {} > {}", c.lhs, c.rhs);
        }
    }
}

#[test]
fn whispering_gallery() {
    let coarse = whispering_gallery_decay(1, 0.1, &[10, 20, 40, 80]).unwrap();
    let wide = whispering_gallery_decay(1, 0.3, &[10, 20, 40, 80]).unwrap();
    assert!(coarse.pass && wide.pass);
    assert!(wide.slope < coarse.slope);
    assert!(wide.strictly_decreasing);
    let expected = [2.975_519_179_019_056_5, 0.456_751_177_097_339_7, 2.814_506_059_881_744e-3, 2.009_792_220_083_772_5e-8];
    for (m, e) in wide.maxima.iter().zip(expected) {
        assert!((m - e).abs() <= 1e-9 * e, "{m} vs {e}");
    }
}

#[test]
fn quantum_limit_normalization() {
    for s in [0.0, 0.25, 0.5, 0.75, 0.9] {
        let total = quantum_limit_mass(s, s, 1.0).unwrap();
        assert!((total - 1.0).abs() < 1e-6, "s = {s}: {total}");
    }
}

#[test]
fn quantum_limit_closeness_improves_along_a_ray() {
    let d: Vec<f64> = [(4, 4), (8, 8), (16, 16)]
        .iter()
        .map(|&(j, k)| quantum_limit_distance(j, k, 0.05).unwrap())
        .collect();
    assert!(d[1] < d[0] && d[2] < d[1], "{d:?}");
}

#[test]
fn zero_table_brackets_and_interlacing() {
    let t = BesselZeroTable::build(41, 41).unwrap();
    for j in 0..=40 {
        for k in 1..=40 {
            let z = t.get(j, k).unwrap();
            assert!(z >= (j + k) as f64 && z <= PI * (j + k) as f64, "z({j},{k}) = {z}");
            assert!(t.get(j, k + 1).unwrap() > z);
            let next = t.get(j + 1, k).unwrap();
            assert!(z < next && next < t.get(j, k + 1).unwrap(), "interlacing at ({j},{k})");
            assert!(bessel_j(j, z).unwrap().abs() <= 1e-10);
        }
    }
}

#[test]
fn first_zero_asymptotics() {
    let t = BesselZeroTable::build(80, 1).unwrap();
    let ratios: Vec<f64> = [20usize, 40, 80]
        .iter()
        .map(|&j| (t.get(j, 1).unwrap() - j as f64) / (j as f64).cbrt())
        .collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    assert!((hi - lo) / hi < 0.05, "{ratios:?}");
}
