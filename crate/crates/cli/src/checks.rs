//! Verification checks reachable through `qmc verify`.

use qmc_core::catalog::{self, cross_check_scalar, q_to_1_limit, random_exponent, Construction, Params};
use qmc_core::composition::{additivity_check, sy_additivity_check};
use qmc_core::linalg::{c, CVector, TolerancePolicy, C64};
use qmc_core::qseries::{JacksonRange, KernelSpec, QBase};
use qmc_core::registry::{Named, Registry};
use qmc_core::solutions::{
    closed_form_3phi2, closed_form_qhg, convergence_certificate, convolve_solution, ghg3_double_integral,
    qhg_integral, seed_tuple, truncated_identity_residual, Anchor, Ghg3Params, QhgClosedForm, QhgParams, SeedSolution,
};
use qmc_core::spectral::{spectral_type, TABLE1};
use qmc_core::system::q_convolution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::CliError;

pub const DEFAULT_SEED: u64 = 20240601;

#[derive(Debug, Clone, Default)]
pub struct VerifyArgs {
    pub name: Option<String>,
    pub params: Params,
    pub l1: Option<C64>,
    pub l2: Option<C64>,
    pub seed: u64,
    pub draws: Option<usize>,
    /// `QMC_TOL`: replaces every residual tolerance.
    pub tol_override: Option<f64>,
}

impl VerifyArgs {
    fn tol(&self, default: f64) -> f64 {
        self.tol_override.unwrap_or(default)
    }

    fn get(&self, key: &str, default: f64) -> C64 {
        self.params.get(key).copied().unwrap_or(c(default, 0.0))
    }

    fn base(&self, default: f64) -> Result<QBase, CliError> {
        Ok(QBase::new(self.get("q", default))?)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Item {
    pub label: String,
    pub max_residual: f64,
    pub tol: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Item {
    pub fn new(label: impl Into<String>, max_residual: f64, tol: f64) -> Self {
        Item { label: label.into(), max_residual, tol, pass: max_residual <= tol, detail: None }
    }

    fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }

    fn and(mut self, ok: bool) -> Self {
        self.pass &= ok;
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub check: String,
    pub max_residual: f64,
    pub tol: f64,
    pub pass: bool,
    pub items: Vec<Item>,
}

impl Report {
    /// Headline numbers come from the item closest to (or furthest past) its tolerance.
    pub fn new(check: &str, items: Vec<Item>) -> Self {
        let ratio = |i: &Item| {
            if i.tol > 0.0 {
                i.max_residual / i.tol
            } else if i.max_residual > 0.0 || i.max_residual.is_nan() {
                f64::INFINITY
            } else {
                0.0
            }
        };
        let worst = items.iter().max_by(|a, b| ratio(a).partial_cmp(&ratio(b)).unwrap_or(std::cmp::Ordering::Greater));
        let (max_residual, tol) = worst.map_or((0.0, 0.0), |w| (w.max_residual, w.tol));
        let pass = !items.is_empty() && items.iter().all(|i| i.pass);
        Report { check: check.to_string(), max_residual, tol, pass, items }
    }
}

pub trait Check: Named + Send + Sync {
    fn description(&self) -> &str;
    fn run(&self, args: &VerifyArgs, policy: &TolerancePolicy) -> Result<Vec<Item>, CliError>;
}

fn fmt_c(z: C64) -> String {
    format!("{}{:+}i", z.re, z.im)
}

/// Defaults followed by `draws` random parameter sets.
fn parameter_sets(cons: &dyn Construction, args: &VerifyArgs, draws: usize) -> Vec<(String, Params)> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut out = vec![("defaults".to_string(), args.params.clone())];
    for k in 0..draws {
        out.push((format!("draw {k}"), cons.random_params(&mut rng)));
    }
    out
}

fn constructions<'a>(reg: &'a Registry<dyn Construction>, name: &Option<String>) -> Result<Vec<&'a dyn Construction>, CliError> {
    match name {
        Some(n) => Ok(vec![reg.get(n)?]),
        None => Ok(reg.iter().collect()),
    }
}

struct Residual;
struct Scalar;
struct Additivity;
struct Spectral;
struct Table1;
struct Limits;
struct Integral;

impl Named for Residual {
    fn name(&self) -> &str {
        "residual"
    }
}

impl Check for Residual {
    fn description(&self) -> &str {
        "stacked transform of the qhg seed solves the convolved system; truncated sums obey their finite identity"
    }

    fn run(&self, args: &VerifyArgs, _policy: &TolerancePolicy) -> Result<Vec<Item>, CliError> {
        let b = args.base(0.4)?;
        let lam = args.get("lambda", 0.3);
        let seed = SeedSolution::new(args.get("mu", 0.7), vec![args.get("alpha", 1.0)], vec![args.get("beta", 3.0)])?;
        let t = seed_tuple(&seed, &b)?;
        let conv = q_convolution(&t, lam);
        let y = |s| Ok(CVector::from_element(1, seed.eval(&b, s)?));
        let xi = c(0.37, 0.21);
        let points: Vec<C64> = (0..10).map(|k| c(0.5 + 0.07 * k as f64, 0.1 - 0.03 * k as f64)).collect();
        let mut items = Vec::new();
        let cert = convergence_certificate(&t, lam);
        if cert.passes {
            let mut worst = 0.0f64;
            for &x in &points {
                let range = JacksonRange::adaptive(1e-16);
                let yx = convolve_solution(&t, y, &KernelSpec::k1(lam), x, Anchor::Fixed(xi), range)?;
                let yqx = convolve_solution(&t, y, &KernelSpec::k1(lam), b.q() * x, Anchor::Fixed(xi), range)?;
                worst = worst.max(conv.residual_at(x, &yx, &yqx)?);
            }
            items.push(Item::new("stacked transform, 10 points", worst, args.tol(1e-7)));
        }
        let mut worst = 0.0f64;
        for kernel in [KernelSpec::k1(lam), KernelSpec::k2(lam)] {
            for (k, l) in [(-6, 9), (0, 0), (-3, 14)] {
                worst = worst.max(truncated_identity_residual(&t, y, &kernel, points[3], Anchor::Fixed(xi), k, l)?);
                worst = worst.max(truncated_identity_residual(&t, y, &kernel, points[3], Anchor::Proportional(c(0.8, 0.15)), k, l)?);
            }
        }
        let note = if cert.passes { "certificate passes" } else { "certificate fails; stacked check skipped" };
        items.push(Item::new("truncated identity", worst, args.tol(1e-9)).detail(note));
        Ok(items)
    }
}

impl Named for Scalar {
    fn name(&self) -> &str {
        "scalar"
    }
}

impl Check for Scalar {
    fn description(&self) -> &str {
        "propagated solutions satisfy the printed scalar equation (--name, --draws)"
    }

    fn run(&self, args: &VerifyArgs, policy: &TolerancePolicy) -> Result<Vec<Item>, CliError> {
        let reg = catalog::registry();
        let mut items = Vec::new();
        for cons in constructions(&reg, &args.name)? {
            if cons.scalar_equation(&catalog::resolve_params(cons, &Params::new())?)?.is_none() {
                if args.name.is_some() {
                    return Err(CliError::Usage(format!("{} has no scalar equation", cons.name())));
                }
                continue;
            }
            let sets = parameter_sets(cons, args, args.draws.unwrap_or(3));
            for (label, p) in sets {
                let r = cross_check_scalar(cons, &p, c(0.37, 0.21), 30, args.seed, policy)?;
                let top = r.degrees.iter().copied().max().unwrap_or(0);
                items.push(
                    Item::new(format!("{} {} ({label})", cons.name(), r.equation), r.max_residual, args.tol(1e-8))
                        .and(top == r.expected_degree)
                        .detail(format!("coefficient degrees {:?}, expected {}", r.degrees, r.expected_degree)),
                );
            }
        }
        Ok(items)
    }
}

impl Named for Additivity {
    fn name(&self) -> &str {
        "additivity"
    }
}

impl Check for Additivity {
    fn description(&self) -> &str {
        "mc_{λ2}∘mc_{λ1} ≅ mc_{λ1+λ2} on the qhg seed, recovery at −λ, and the SY composite law (--l1, --l2, --draws)"
    }

    fn run(&self, args: &VerifyArgs, policy: &TolerancePolicy) -> Result<Vec<Item>, CliError> {
        let b = args.base(0.4)?;
        let seed = SeedSolution::new(args.get("mu", 0.7), vec![args.get("alpha", 1.3)], vec![args.get("beta", 0.9)])?;
        let t = seed_tuple(&seed, &b)?;
        let pairs: Vec<(C64, C64)> = match (args.l1, args.l2) {
            (Some(a), Some(b)) => vec![(a, b)],
            (None, None) => {
                let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
                (0..args.draws.unwrap_or(10)).map(|_| (random_exponent(&mut rng), random_exponent(&mut rng))).collect()
            }
            _ => return Err(CliError::Usage("give both --l1 and --l2, or neither".into())),
        };
        let tol = args.tol(policy.residual_tol);
        let mut items = Vec::new();
        for (l1, l2) in pairs {
            let tag = format!("λ1={}, λ2={}", fmt_c(l1), fmt_c(l2));
            let r = additivity_check(&t, l1, l2, policy)?;
            items.push(
                Item::new(format!("intertwining, {tag}"), r.intertwining.unwrap_or(0.0), tol)
                    .and(r.pass)
                    .detail(format!("dims {} vs {}, rcond {:.2e}", r.dim_composite, r.dim_direct, r.rcond.unwrap_or(f64::NAN))),
            );
            let back = additivity_check(&t, l1, -l1, policy)?;
            items.push(
                Item::new(format!("recovery at −λ1, {tag}"), back.to_original.unwrap_or(f64::INFINITY), tol)
                    .and(back.pass && back.dim_composite == t.m()),
            );
            let sy = sy_additivity_check(&t, l1, l2, policy)?;
            items.push(
                Item::new(format!("SY composite law, {tag}"), sy.law_error.unwrap_or(f64::INFINITY), args.tol(1e-10))
                    .and(sy.pass)
                    .detail(format!("q^ν = {}", fmt_c(sy.q_nu))),
            );
        }
        Ok(items)
    }
}

fn type_items(cons: &dyn Construction, args: &VerifyArgs, draws: usize, policy: &TolerancePolicy) -> Result<Vec<Item>, CliError> {
    let expected = cons
        .spectral_type()
        .ok_or_else(|| CliError::Usage(format!("{} has no recorded spectral type", cons.name())))?;
    let mut items = Vec::new();
    for (label, p) in parameter_sets(cons, args, draws) {
        let chain = catalog::build(cons, &p, policy)?;
        let got = spectral_type(chain.last(), policy)?.render();
        let miss = if got == expected { 0.0 } else { 1.0 };
        items.push(Item::new(format!("{} ({label})", cons.name()), miss, 0.0).detail(format!("{got}, expected {expected}")));
    }
    Ok(items)
}

impl Named for Spectral {
    fn name(&self) -> &str {
        "spectral"
    }
}

impl Check for Spectral {
    fn description(&self) -> &str {
        "spectral type of a catalog construction against its recorded string (--name, --draws)"
    }

    fn run(&self, args: &VerifyArgs, policy: &TolerancePolicy) -> Result<Vec<Item>, CliError> {
        let name = args.name.as_ref().ok_or_else(|| CliError::Usage("verify spectral needs --name".into()))?;
        let reg = catalog::registry();
        type_items(reg.get(name)?, args, args.draws.unwrap_or(3), policy)
    }
}

impl Named for Table1 {
    fn name(&self) -> &str {
        "table1"
    }
}

impl Check for Table1 {
    fn description(&self) -> &str {
        "all ten rows of the spectral type table at random draws (--draws)"
    }

    fn run(&self, args: &VerifyArgs, policy: &TolerancePolicy) -> Result<Vec<Item>, CliError> {
        let reg = catalog::registry();
        let draws = args.draws.unwrap_or(3);
        let rows: Vec<&dyn Construction> = TABLE1.iter().map(|(n, _)| reg.get(n)).collect::<Result<_, _>>()?;
        let per_row: Vec<Result<Vec<Item>, CliError>> = std::thread::scope(|s| {
            let handles: Vec<_> = rows.iter().map(|&cons| s.spawn(move || type_items(cons, args, draws, policy))).collect();
            handles.into_iter().map(|h| h.join().expect("table row panicked")).collect()
        });
        let mut items = Vec::new();
        for r in per_row {
            items.extend(r?);
        }
        Ok(items)
    }
}

impl Named for Limits {
    fn name(&self) -> &str {
        "limits"
    }
}

impl Check for Limits {
    fn description(&self) -> &str {
        "q → 1: distances to the Fuchsian limits shrink like 1−q, rank-one residues stay rank one (--name)"
    }

    fn run(&self, args: &VerifyArgs, _policy: &TolerancePolicy) -> Result<Vec<Item>, CliError> {
        let names: Vec<String> = match &args.name {
            Some(n) => vec![n.clone()],
            None => ["qhg", "ghg3", "ghg3_alt"].iter().map(|s| s.to_string()).collect(),
        };
        let mut x = Params::new();
        for (k, v) in [("lambda", 0.37), ("mu", 0.7), ("nu", 0.45), ("lambda_p", 0.61), ("mu_p", 0.29), ("nu_p", 0.33)] {
            x.insert(k.into(), args.get(k, v));
        }
        if let Some(a) = args.params.get("alpha") {
            x.insert("alpha".into(), *a);
        }
        let mut items = Vec::new();
        for n in names {
            let r = q_to_1_limit(&n, &x, &[0.9, 0.99, 0.999])?;
            // Distance of the worst ratio from the band [0.05, 0.2].
            let excess = r.ratios.iter().map(|&q| (0.05 - q).max(q - 0.2).max(0.0)).fold(0.0, f64::max);
            items.push(Item::new(n, excess, 0.0).and(r.pass).detail(format!(
                "distances [{}], ratios {:.4?}, rank one {}",
                r.distances.iter().map(|d| format!("{d:.3e}")).collect::<Vec<_>>().join(", "),
                r.ratios,
                r.rank_one
            )));
        }
        Ok(items)
    }
}

impl Named for Integral {
    fn name(&self) -> &str {
        "integral"
    }
}

impl Check for Integral {
    fn description(&self) -> &str {
        "Jackson integrals against the 2φ1 and 3φ2 closed forms; the 3φ2 against its scalar equation"
    }

    fn run(&self, args: &VerifyArgs, _policy: &TolerancePolicy) -> Result<Vec<Item>, CliError> {
        let b = args.base(0.4)?;
        let p = QhgParams {
            base: b,
            lambda: args.get("lambda", 0.3),
            mu: args.get("mu", 0.7),
            alpha: args.get("alpha", 1.0),
            beta: args.get("beta", 1.5),
        };
        let x = args.get("x", 0.35);
        let mut items = Vec::new();
        let variants = match &args.name {
            Some(n) if n != "3phi2" => vec![QhgClosedForm::parse(n)?],
            Some(_) => vec![],
            None => QhgClosedForm::ALL.to_vec(),
        };
        for v in variants {
            if !v.condition_holds(&p) {
                items.push(Item::new(v.name(), f64::INFINITY, 0.0).detail("parameter condition fails"));
                continue;
            }
            let closed = closed_form_qhg(v, &p, x)?;
            let sum = qhg_integral(v, &p, x, 1e-11)?;
            items.push(Item::new(v.name(), (closed - sum).norm() / closed.norm(), args.tol(1e-8)));
        }
        if args.name.as_deref().is_none_or(|n| n == "3phi2") {
            let g = Ghg3Params {
                base: b,
                lambda: p.lambda,
                mu: p.mu,
                lambda_p: args.get("lambda_p", 0.5),
                mu_p: args.get("mu_p", 0.4),
                alpha: p.alpha,
                beta: p.beta,
            };
            let x3 = args.get("x3", 0.25);
            if !g.conditions_hold(x3) {
                items.push(Item::new("3phi2", f64::INFINITY, 0.0).detail("parameter conditions fail"));
                return Ok(items);
            }
            let closed = closed_form_3phi2(&g, x3)?;
            let sum = ghg3_double_integral(&g, x3, 1e-15)?;
            items.push(Item::new("3phi2 vs double integral", (closed - sum).norm() / closed.norm(), args.tol(1e-6)));
            let reg = catalog::registry();
            let cons = reg.get("ghg3")?;
            let mut cp = Params::new();
            for (k, v) in [("q", b.q()), ("lambda", g.lambda), ("mu", g.mu), ("lambda_p", g.lambda_p), ("mu_p", g.mu_p), ("alpha", g.alpha), ("beta", g.beta)] {
                cp.insert(k.into(), v);
            }
            let cp = catalog::resolve_params(cons, &cp)?;
            let eq = cons.scalar_equation(&cp)?.expect("ghg3 has a scalar equation");
            let mut worst = 0.0f64;
            for k in 0..10 {
                let xk = x3 * (1.0 - 0.04 * k as f64);
                worst = worst.max(catalog::scalar_residual_fn(&eq, &b, xk, |s| closed_form_3phi2(&g, s))?);
            }
            items.push(Item::new(format!("3phi2 satisfies {}", eq.name), worst, args.tol(1e-7)));
        }
        Ok(items)
    }
}

pub fn registry() -> Registry<dyn Check> {
    let mut r: Registry<dyn Check> = Registry::new();
    r.register(Box::new(Residual));
    r.register(Box::new(Scalar));
    r.register(Box::new(Additivity));
    r.register(Box::new(Spectral));
    r.register(Box::new(Table1));
    r.register(Box::new(Limits));
    r.register(Box::new(Integral));
    r
}
