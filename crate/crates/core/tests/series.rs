use qmc_core::linalg::{c, C64, CVector};
use qmc_core::qseries::{jackson_integral, phi21, phi32, qpoch_fin, qpoch_inf, JacksonRange, QBase};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rand_c(rng: &mut ChaCha8Rng, r0: f64, r1: f64) -> C64 {
    C64::from_polar(rng.gen_range(r0..r1), rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
}

fn naive_poch(a: C64, q: f64) -> C64 {
    (0..4000).fold(c(1.0, 0.0), |p, k| p * (c(1.0, 0.0) - a * q.powi(k)))
}

#[test]
fn q_binomial_survives_heavy_cancellation() {
    // Terms reach 1e3 while the sum is 7e-4.
    let q = 0.891;
    let b = QBase::real(q).unwrap();
    let (a, z) = (c(-0.153, -0.688), c(-0.175, 0.637));
    let s = phi21(a, c(0.4, 0.1), c(0.4, 0.1), &b, z, 1e-16).unwrap().value;
    let exact = naive_poch(a * z, q) / naive_poch(z, q);
    assert!((s - exact).norm() / exact.norm() < 1e-12, "{s} vs {exact}");
}

#[test]
fn terminating_series_are_finite_sums() {
    let b = QBase::real(0.6).unwrap();
    let q = 0.6f64;
    let (bb, cc, z) = (c(0.3, 0.2), c(1.7, -0.4), c(0.9, 0.5));
    // a = q⁻²: three terms.
    let a = c(q.powi(-2), 0.0);
    let mut want = c(0.0, 0.0);
    for n in 0..3 {
        let num = qpoch_fin(a, &b, n).unwrap() * qpoch_fin(bb, &b, n).unwrap();
        let den = qpoch_fin(cc, &b, n).unwrap() * qpoch_fin(c(q, 0.0), &b, n).unwrap();
        want += num / den * z.powi(n as i32);
    }
    let got = phi21(a, bb, cc, &b, z, 1e-16).unwrap();
    assert!((got.value - want).norm() < 1e-13);
    // a1 = q⁻¹ in ₃φ₂: two terms.
    let (a2, a3, b1, b2) = (c(0.2, 0.1), c(-0.5, 0.3), c(1.2, 0.0), c(0.4, -0.9));
    let a1 = c(1.0 / q, 0.0);
    let want = c(1.0, 0.0) + (c(1.0, 0.0) - a1) * (c(1.0, 0.0) - a2) * (c(1.0, 0.0) - a3) * z
        / ((c(1.0, 0.0) - b1) * (c(1.0, 0.0) - b2) * (1.0 - q));
    let got = phi32(a1, a2, a3, b1, b2, &b, z, 1e-16).unwrap();
    assert!((got.value - want).norm() < 1e-13);
}

#[test]
fn pochhammer_telescopes() {
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    for _ in 0..20 {
        let b = QBase::real(rng.gen_range(0.1..0.9)).unwrap();
        let a = rand_c(&mut rng, 0.1, 3.0);
        let full = qpoch_inf(a, &b);
        for n in 0..=20 {
            let split = qpoch_fin(a, &b, n).unwrap() * qpoch_inf(b.powi(n) * a, &b);
            assert!((split - full).norm() <= 1e-12 * (1.0 + full.norm()), "n = {n}");
        }
    }
}

#[test]
fn jackson_integral_is_linear() {
    let b = QBase::real(0.45).unwrap();
    let xi = c(0.8, 0.3);
    let range = JacksonRange::fixed(-5, 30);
    let f = |s: C64| Ok(CVector::from_vec(vec![s * s, s.exp()]));
    let g = |s: C64| Ok(CVector::from_vec(vec![s.sin(), c(1.0, 0.0) / (s + 3.0)]));
    let (alpha, beta) = (c(0.7, -1.1), c(-2.0, 0.4));
    let h = |s: C64| Ok(f(s)? * alpha + g(s)? * beta);
    let fi = jackson_integral(f, xi, &b, range).unwrap();
    let gi = jackson_integral(g, xi, &b, range).unwrap();
    let hi = jackson_integral(h, xi, &b, range).unwrap();
    for k in 0..2 {
        let want = fi[k].value * alpha + gi[k].value * beta;
        assert!((hi[k].value - want).norm() < 1e-12 * (1.0 + want.norm()));
    }
}
