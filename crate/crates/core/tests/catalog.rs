use qmc_core::catalog::*;
use qmc_core::composition::{invariant_subspace_search, star_report};
use qmc_core::linalg::{c, max_abs_diff, CMatrix, TolerancePolicy, C64};
use qmc_core::qseries::QBase;
use qmc_core::spectral::spectral_type;
use qmc_core::system::{middle_convolution, SystemTuple};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(20240601)
}

fn limit_point() -> Params {
    [("lambda", 0.37), ("mu", 0.7), ("nu", 0.45), ("lambda_p", 0.61), ("mu_p", 0.29), ("nu_p", 0.33)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), c(v, 0.0)))
        .collect()
}

#[test]
fn random_parameters_reproduce_every_construction() {
    let tol = TolerancePolicy::default();
    let reg = registry();
    for cons in reg.iter() {
        if cons.asserts_nothing() {
            continue;
        }
        let mut rng = rng();
        for _ in 0..5 {
            let p = cons.random_params(&mut rng);
            let chain = build(cons, &p, &tol).unwrap_or_else(|e| panic!("{}: {e}", cons.name()));
            for f in cons.fixtures(&chain).unwrap() {
                let r = check_fixture(&chain, &f).unwrap();
                assert!(r.residual < 1e-8, "{} {}: {:.1e}", cons.name(), r.label, r.residual);
            }
            if cons.scalar_equation(&chain.params).unwrap().is_some() {
                let r = cross_check_scalar(cons, &p, c(0.37, 0.21), 6, 7, &tol).unwrap();
                assert!(r.max_residual < 1e-8, "{}: {:.1e}", cons.name(), r.max_residual);
            }
            if let Some(want) = cons.spectral_type() {
                assert_eq!(spectral_type(chain.last(), &tol).unwrap().render(), want, "{}", cons.name());
            }
        }
    }
}

#[test]
fn misprinted_entries_fail_as_printed() {
    let tol = TolerancePolicy::default();
    let reg = registry();
    let mut seen = 0;
    for cons in reg.iter() {
        let chain = build(cons, &Params::new(), &tol).unwrap();
        for f in cons.misprints(&chain).unwrap() {
            let r = check_fixture(&chain, &f).unwrap();
            assert!(r.residual > 1e-2, "{} {} unexpectedly holds", cons.name(), r.label);
            seen += 1;
        }
        let p = resolve_params(cons, &Params::new()).unwrap();
        if let Some(eq) = cons.misprinted_equation(&p).unwrap() {
            let r = cross_check_equation(cons, &Params::new(), &eq, c(0.37, 0.21), 6, 7, &tol).unwrap();
            assert!(r.max_residual > 1e-2, "{}: printed equation holds", cons.name());
            seen += 1;
        }
    }
    assert!(seen >= 3);
}

#[test]
fn printed_limit_exponent_misses() {
    let x = limit_point();
    let (printed, _) = limit_tuple("ghg3_alt", &x, true).unwrap();
    let g = aligned_at("ghg3_alt", &x, 0.999).unwrap();
    let d = g.iter().zip(&printed).map(|(g, a)| max_abs_diff(&(g / c(0.001, 0.0)), a)).fold(0.0, f64::max);
    assert!(d > 0.1, "printed limit is within {d}");
}

#[test]
fn unknown_names_are_rejected() {
    assert!(registry().get("no_such_system").is_err());
    assert!(q_to_1_limit("s48", &limit_point(), &[0.9, 0.99, 0.999]).is_err());
}

fn random_tuple(rng: &mut ChaCha8Rng, m: usize) -> SystemTuple {
    let b = QBase::real(rng.gen_range(0.3..0.7)).unwrap();
    let poles = vec![c(0.0, 0.0), c(1.3, 0.2), c(-0.7, 0.9)];
    let mats = (0..3)
        .map(|_| CMatrix::from_fn(m, m, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
        .collect();
    SystemTuple::new(b, poles, mats).unwrap()
}

#[test]
fn middle_convolution_keeps_star_conditions() {
    let tol = TolerancePolicy::default();
    let mut rng = rng();
    for _ in 0..5 {
        let t = random_tuple(&mut rng, 2);
        assert!(star_report(&t, &tol).unwrap().both());
        let lam = random_exponent(&mut rng);
        let mc = middle_convolution(&t, lam, &tol).unwrap();
        assert!(star_report(&mc.reduced, &tol).unwrap().both());
    }
}

#[test]
fn invariant_subspaces_are_detected() {
    let tol = TolerancePolicy::default();
    let mut rng = rng();
    let t = random_tuple(&mut rng, 3);
    assert_eq!(invariant_subspace_search(&t, &tol).found, None);
    // Upper block-triangular tuples share the first coordinate line.
    let mut mats: Vec<CMatrix> = t.matrices().to_vec();
    for b in &mut mats {
        b[(1, 0)] = c(0.0, 0.0);
        b[(2, 0)] = c(0.0, 0.0);
    }
    let reducible = SystemTuple::new(*t.base(), t.poles().to_vec(), mats).unwrap();
    assert!(invariant_subspace_search(&reducible, &tol).found.is_some());
}
