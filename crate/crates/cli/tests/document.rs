use qmc_cli::document::{Complex, TupleDocument};
use qmc_core::catalog::{build, registry, Params};
use qmc_core::linalg::TolerancePolicy;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn any_finite(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let v = f64::from_bits(rng.gen());
        if v.is_finite() {
            return v;
        }
    }
}

#[test]
fn save_then_load_is_the_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    for _ in 0..200 {
        let n = rng.gen_range(1..4);
        let m = rng.gen_range(1..4);
        let mut poles = vec![Complex { re: 0.0, im: 0.0 }];
        for k in 1..n {
            poles.push(Complex { re: k as f64 + rng.gen::<f64>(), im: rng.gen::<f64>() });
        }
        let matrices = (0..n)
            .map(|_| (0..m).map(|_| (0..m).map(|_| Complex { re: any_finite(&mut rng), im: any_finite(&mut rng) }).collect()).collect())
            .collect();
        let doc = TupleDocument {
            schema_version: "1".into(),
            q: Complex { re: rng.gen_range(0.05..0.95), im: rng.gen_range(-0.05..0.05) },
            poles,
            matrices,
            metadata: None,
        };
        let text = doc.to_json();
        let back = TupleDocument::from_json(&text).unwrap();
        for (a, b) in doc.matrices.iter().flatten().flatten().zip(back.matrices.iter().flatten().flatten()) {
            assert_eq!((a.re.to_bits(), a.im.to_bits()), (b.re.to_bits(), b.im.to_bits()));
        }
        assert_eq!(back.to_json(), text);
    }
}

#[test]
fn catalog_tuples_survive_the_round_trip() {
    let tol = TolerancePolicy::default();
    let reg = registry();
    for cons in reg.iter() {
        let chain = build(cons, &Params::new(), &tol).unwrap();
        for stage in &chain.stages {
            let doc = TupleDocument::from_tuple(&stage.tuple, None);
            let t = TupleDocument::from_json(&doc.to_json()).unwrap().to_tuple().unwrap();
            assert_eq!(t.matrices(), stage.tuple.matrices());
            assert_eq!(t.poles(), stage.tuple.poles());
        }
    }
}
