//! Spectral operators checked against brute-force evaluations.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sqg_core::lp::{commutator, random_band_field, DyadicDecomposition};
use sqg_core::operators::{gradient, nonlinear_term, riesz_velocity};
use sqg_core::{Complex64, Grid, GridSpec, SpectralField};

fn grid(n: usize, length: f64) -> Arc<Grid> {
    GridSpec::new(n, length).build().unwrap()
}

/// Modes `(k₁, k₂)` with both components strictly inside the Nyquist limit.
fn lattice(n: usize) -> Vec<(i64, i64)> {
    let h = n as i64 / 2;
    (-h + 1..h)
        .flat_map(|a| (-h + 1..h).map(move |b| (a, b)))
        .collect()
}

fn in_band(n: usize, (a, b): (i64, i64)) -> bool {
    let cut = (2.0 / 3.0 * (n / 2) as f64 + 1e-9).floor() as i64;
    a.abs() <= cut && b.abs() <= cut
}

fn h(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

fn chi(r: f64) -> f64 {
    h(2.0 - r) / (h(2.0 - r) + h(r - 1.0))
}

fn block_symbol(j: i32, r: f64) -> f64 {
    let s = r / 2f64.powi(j);
    chi(s) - chi(2.0 * s)
}

#[test]
fn forward_transform_matches_direct_sum() {
    let n = 8;
    let length = 1.7;
    let g = grid(n, length);
    let f = |x1: f64, x2: f64| {
        (x1 / length).sin() * (2.0 * x2 / length).cos() + 0.3 * (x1 / length).cos().powi(3)
    };
    let field = SpectralField::from_fn(&g, f);
    for (k1, k2) in lattice(n) {
        let mut sum = Complex64::default();
        for i1 in 0..n {
            for i2 in 0..n {
                let x1 = 2.0 * PI * length * i1 as f64 / n as f64;
                let x2 = 2.0 * PI * length * i2 as f64 / n as f64;
                let phase = -(k1 as f64 * x1 + k2 as f64 * x2) / length;
                sum += Complex64::from_polar(f(x1, x2), phase);
            }
        }
        sum /= (n * n) as f64;
        let c = field.coeff(k1, k2).unwrap();
        assert!((c - sum).norm() < 1e-13, "mode ({k1},{k2}): {c} vs {sum}");
    }
}

#[test]
fn riesz_velocity_of_planar_waves() {
    let g = grid(16, 1.0);
    let u = riesz_velocity(&SpectralField::from_fn(&g, |x1, _| x1.cos()));
    let u2 = SpectralField::from_fn(&g, |x1, _| -x1.sin());
    assert!(u.u1.max_abs_coeff() < 1e-15);
    assert!(u.u2.max_coeff_diff(&u2).unwrap() < 1e-15);
    let u = riesz_velocity(&SpectralField::from_fn(&g, |_, x2| x2.cos()));
    let u1 = SpectralField::from_fn(&g, |_, x2| x2.sin());
    assert!(u.u1.max_coeff_diff(&u1).unwrap() < 1e-15);
    assert!(u.u2.max_abs_coeff() < 1e-15);
}

/// `(u·∇v)^(k) = Σ_{p+q=k} û(p)·(iq/L) v̂(q)` over in-band `q`, restricted
/// to in-band `k`; `weight(k, q)` multiplies each term.
fn dense_transport(
    n: usize,
    length: f64,
    u: [&SpectralField; 2],
    v: &SpectralField,
    weight: impl Fn((i64, i64), (i64, i64)) -> f64,
) -> Vec<((i64, i64), Complex64)> {
    let modes = lattice(n);
    modes
        .iter()
        .filter(|k| in_band(n, **k))
        .map(|&k| {
            let mut sum = Complex64::default();
            for &q in modes.iter().filter(|q| in_band(n, **q)) {
                let p = (k.0 - q.0, k.1 - q.1);
                let (Some(a), Some(b)) = (u[0].coeff(p.0, p.1), u[1].coeff(p.0, p.1)) else {
                    continue;
                };
                let vq = v.coeff(q.0, q.1).unwrap();
                let i = Complex64::new(0.0, 1.0);
                let dot = a * (i * q.0 as f64 / length) + b * (i * q.1 as f64 / length);
                sum += dot * vq * weight(k, q);
            }
            (k, sum)
        })
        .collect()
}

#[test]
fn transport_term_matches_dense_convolution() {
    let (n, length) = (16, 1.3);
    let g = grid(n, length);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let theta = random_band_field(&g, 0.0, 1e9, &mut rng).dealiased();
    let u = riesz_velocity(&theta);
    let fast = nonlinear_term(&theta).unwrap();
    let slow = dense_transport(n, length, [&u.u1, &u.u2], &theta, |_, _| 1.0);
    let scale = fast.max_abs_coeff();
    for (k, c) in slow {
        let got = fast.coeff(k.0, k.1).unwrap();
        assert!((got - c).norm() < 1e-12 * scale, "mode {k:?}: {got} vs {c}");
    }
}

#[test]
fn commutator_matches_dense_convolution() {
    let (n, length) = (16, 1.0);
    let g = grid(n, length);
    let d = DyadicDecomposition::new(&g);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let u = riesz_velocity(&random_band_field(&g, 0.0, 4.0, &mut rng));
    let v = random_band_field(&g, 0.0, 1e9, &mut rng);
    let radius = |(a, b): (i64, i64)| (a as f64).hypot(b as f64) / length;
    for j in 0..=3 {
        let fast = commutator(&u, &v, j, &d).unwrap();
        let slow = dense_transport(n, length, [&u.u1, &u.u2], &v, |k, q| {
            block_symbol(j, radius(q)) - block_symbol(j, radius(k))
        });
        let scale = v.max_abs_coeff() * u.u1.max_abs_coeff().max(u.u2.max_abs_coeff()) * 10.0;
        for (k, c) in slow {
            let got = fast.coeff(k.0, k.1).unwrap();
            assert!(
                (got - c).norm() < 1e-12 * scale,
                "j={j}, mode {k:?}: {got} vs {c}"
            );
        }
    }
}

#[test]
fn gradient_of_a_single_mode() {
    let g = grid(16, 2.0);
    let f = SpectralField::from_fn(&g, |x1, x2| (3.0 * x1 / 2.0 + x2 / 2.0).sin());
    let [d1, d2] = gradient(&f);
    let e1 = SpectralField::from_fn(&g, |x1, x2| 1.5 * (3.0 * x1 / 2.0 + x2 / 2.0).cos());
    let e2 = SpectralField::from_fn(&g, |x1, x2| 0.5 * (3.0 * x1 / 2.0 + x2 / 2.0).cos());
    assert!(d1.max_coeff_diff(&e1).unwrap() < 1e-14);
    assert!(d2.max_coeff_diff(&e2).unwrap() < 1e-14);
}
