use rand::RngCore;

use super::equations;
use super::{
    base_of, param, random_exponent, random_magnitude, random_q, Chain, Construction, Fixture, Params,
    PipelineRecipe, ScalarEquation, Step,
};
use crate::error::Result;
use crate::linalg::{c, from_rows, CMatrix, CVector, C64};
use crate::qseries::QBase;
use crate::registry::{Named, Registry};
use crate::spectral::{Q_HEUN, TABLE1};
use crate::system::{self, SystemTuple};

macro_rules! mat {
    ($([$($x:expr),* $(,)?]),* $(,)?) => {
        from_rows(&[$(vec![$(C64::from($x)),*]),*])
    };
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

fn scalars(vals: &[C64]) -> Vec<CMatrix> {
    vals.iter().map(|&v| CMatrix::from_element(1, 1, v)).collect()
}

fn vector(vals: &[C64]) -> CVector {
    CVector::from_column_slice(vals)
}

fn table_type(name: &str) -> Option<&'static str> {
    TABLE1.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

fn defaults_from(pairs: &[(&str, C64)]) -> Params {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Draws every parameter by the shape of its name: `q`, exponents
/// (`lambda*`, `mu*`) and points (everything else).
fn draw(names: &[String], rng: &mut dyn RngCore) -> Params {
    names
        .iter()
        .map(|n| {
            let v = if n == "q" {
                random_q(rng)
            } else if n.starts_with("lambda") || n.starts_with("mu") {
                random_exponent(rng)
            } else {
                random_magnitude(rng)
            };
            (n.clone(), v)
        })
        .collect()
}

fn indexed(p: &Params, prefix: &str, n: usize) -> Result<Vec<C64>> {
    (1..=n).map(|k| param(p, &format!("{prefix}{k}"))).collect()
}

/// `Π_j(α_k−β_j) / (α_k Π_{j≠k}(α_k−α_j))`, the residues of the seed with `μ = 0`.
fn residue(alphas: &[C64], betas: &[C64], k: usize) -> C64 {
    let ak = alphas[k];
    let mut r = one() / ak;
    for j in 0..alphas.len() {
        r *= ak - betas[j];
        if j != k {
            r /= ak - alphas[j];
        }
    }
    r
}

fn conv_sum(base: QBase, poles: Vec<C64>, matrices: Vec<CMatrix>, lambda: C64) -> Result<CMatrix> {
    Ok(system::q_convolution(&SystemTuple::new(base, poles, matrices)?, lambda).sum())
}

fn det_of_conv(chain: &Chain, stage: usize) -> C64 {
    chain.stages[stage].mc.as_ref().map(|m| m.conv.sum().determinant()).unwrap_or_else(zero)
}

fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

macro_rules! named {
    ($t:ty, $name:expr) => {
        impl Named for $t {
            fn name(&self) -> &str {
                $name
            }
        }
    };
}

// ---------------------------------------------------------------------------

pub struct Qhg;
named!(Qhg, "qhg");

impl Qhg {
    const DEFAULTS: [(&'static str, f64); 5] = [("q", 0.45), ("lambda", 0.37), ("mu", 0.7), ("alpha", 1.3), ("beta", 0.9)];
}

impl Construction for Qhg {
    fn description(&self) -> &str {
        "mc_λ of the basic seed x^μ (βx)_∞/(αx)_∞: the q-hypergeometric system"
    }
    fn param_names(&self) -> Vec<String> {
        Self::DEFAULTS.iter().map(|(k, _)| k.to_string()).collect()
    }
    fn defaults(&self) -> Params {
        Self::DEFAULTS.iter().map(|(k, v)| (k.to_string(), c(*v, 0.0))).collect()
    }
    fn random_params(&self, rng: &mut dyn RngCore) -> Params {
        draw(&self.param_names(), rng)
    }
    fn recipe(&self, p: &Params) -> Result<PipelineRecipe> {
        Ok(PipelineRecipe {
            steps: vec![
                Step::Seed { mu: param(p, "mu")?, alphas: vec![param(p, "alpha")?], betas: vec![param(p, "beta")?] },
                Step::MiddleConvolution { lambda: param(p, "lambda")?, expected: Some((0, 0)) },
            ],
        })
    }
    fn fixtures(&self, chain: &Chain) -> Result<Vec<Fixture>> {
        let p = &chain.params;
        let base = base_of(p)?;
        let (l, m, a, b) = (param(p, "lambda")?, param(p, "mu")?, param(p, "alpha")?, param(p, "beta")?);
        let e = |z: C64| base.pow(z);
        let qml = e(m - l);
        let qnl = e(-l);
        let g0 = mat![[1.0 - qml, qml * (1.0 - b / a)], [0.0, 0.0]];
        let g1 = mat![[0.0, 0.0], [qnl - qml, qml * (1.0 - b / a) + 1.0 - qnl]];
        let poles = vec![zero(), one() / a];
        Ok(vec![
            Fixture::Tuple {
                label: "seed".into(),
                stage: 0,
                poles: poles.clone(),
                matrices: scalars(&[1.0 - e(m), e(m) * (1.0 - b / a)]),
                exact: true,
            },
            Fixture::Tuple { label: "G0, G1".into(), stage: 1, poles, matrices: vec![g0, g1], exact: true },
            Fixture::Value {
                label: "det(G0 + G1)".into(),
                computed: chain.last().sum().determinant(),
                printed: (1.0 - qnl) * (1.0 - qml * b / a),
            },
        ])
    }
    fn scalar_equation(&self, p: &Params) -> Result<Option<ScalarEquation>> {
        equations::qhg_ytil(p, base_of(p)?).map(Some)
    }
    fn spectral_type(&self) -> Option<&'static str> {
        table_type(self.name())
    }
}

// ---------------------------------------------------------------------------

pub struct Ghg3;
named!(Ghg3, "ghg3");

const GHG3_DEFAULTS: [(&str, f64); 7] =
    [("q", 0.45), ("lambda", 0.37), ("mu", 0.7), ("alpha", 1.3), ("beta", 0.9), ("lambda_p", 0.61), ("mu_p", 0.29)];

impl Construction for Ghg3 {
    fn description(&self) -> &str {
        "qhg, then add μ′ and mc λ′: a rank-3 system solved by 3φ2"
    }
    fn param_names(&self) -> Vec<String> {
        GHG3_DEFAULTS.iter().map(|(k, _)| k.to_string()).collect()
    }
    fn defaults(&self) -> Params {
        GHG3_DEFAULTS.iter().map(|(k, v)| (k.to_string(), c(*v, 0.0))).collect()
    }
    fn random_params(&self, rng: &mut dyn RngCore) -> Params {
        draw(&self.param_names(), rng)
    }
    fn recipe(&self, p: &Params) -> Result<PipelineRecipe> {
        Ok(PipelineRecipe {
            steps: vec![
                Step::Seed { mu: param(p, "mu")?, alphas: vec![param(p, "alpha")?], betas: vec![param(p, "beta")?] },
                Step::MiddleConvolution { lambda: param(p, "lambda")?, expected: Some((0, 0)) },
                Step::AddMu(param(p, "mu_p")?),
                Step::MiddleConvolution { lambda: param(p, "lambda_p")?, expected: Some((1, 0)) },
            ],
        })
    }
    fn fixtures(&self, chain: &Chain) -> Result<Vec<Fixture>> {
        let p = &chain.params;
        let base = base_of(p)?;
        let (l, m, a, b) = (param(p, "lambda")?, param(p, "mu")?, param(p, "alpha")?, param(p, "beta")?);
        let (lp, mp) = (param(p, "lambda_p")?, param(p, "mu_p")?);
        let e = |z: C64| base.pow(z);
        let poles = vec![zero(), one() / a];
        let bp0 = mat![[1.0 - e(mp + m - l), e(mp + m - l) * (1.0 - b / a)], [0.0, 1.0 - e(mp)]];
        let bp1 = mat![[0.0, 0.0], [e(mp - l) * (1.0 - e(m)), e(mp) * (e(m - l) * (1.0 - b / a) + 1.0 - e(-l))]];
        let f0 = e(m) * (1.0 - b / a) + e(l) - 1.0;
        let x = e(m + mp - l - lp);
        let r = e(-lp);
        let f1 = r - x;
        let f2 = x * (1.0 - b / a) + r * (e(mp) - 1.0) / (e(m) - 1.0) * f0;
        let f3 = 1.0 - r + e(mp - l - lp) * f0;
        let g0 = mat![
            [1.0 - x, x * (1.0 - b / a), 0.0],
            [0.0, 1.0 - e(mp - lp), e(mp - l - lp) * (1.0 - e(m))],
            [0.0, 0.0, 0.0],
        ];
        let g1 = mat![[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [f1, f2, f3]];
        let mut full0 = CMatrix::zeros(4, 4);
        full0.view_mut((0, 0), (3, 3)).copy_from(&g0);
        let full1 = mat![
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
            [f1, f2, f3, zero()],
            [zero(), -r * (e(mp) - 1.0) / (e(m) - 1.0), -e(mp - lp - l), 1.0 - r],
        ];
        let pm = mat![[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [zero(), zero(), one(), f0], [zero(), zero(), zero(), e(m) - 1.0]];
        let ib0 = identity(2) - &bp0;
        let ib = identity(2) - &bp0 - &bp1;
        Ok(vec![
            Fixture::Tuple {
                label: "B′ after add μ′".into(),
                stage: 2,
                poles: poles.clone(),
                matrices: vec![bp0.clone(), bp1.clone()],
                exact: true,
            },
            Fixture::Kernel {
                label: "ker B′1".into(),
                matrix: chain.stages[2].tuple.matrix(1).clone(),
                vector: vector(&[f0, e(m) - 1.0]),
            },
            Fixture::Value {
                label: "det(G′0 + G′1)".into(),
                computed: det_of_conv(chain, 3),
                printed: (1.0 - r) * (1.0 - r) * (1.0 - e(mp - l - lp)) * (1.0 - x * b / a),
            },
            Fixture::Value { label: "tr(I − B′0)".into(), computed: ib0.trace(), printed: e(mp) + e(m + mp - l) },
            Fixture::Value {
                label: "det(I − B′0)".into(),
                computed: ib0.determinant(),
                printed: e(mp) * e(m + mp - l),
            },
            Fixture::Value {
                label: "tr(I − B′0 − B′1)".into(),
                computed: ib.trace(),
                printed: e(mp - l) + e(m + mp - l) * b / a,
            },
            Fixture::Value {
                label: "det(I − B′0 − B′1)".into(),
                computed: ib.determinant(),
                printed: e(mp - l) * e(m + mp - l) * b / a,
            },
            Fixture::Basis {
                label: "P and the quotient".into(),
                poles: poles.clone(),
                before: vec![bp0, bp1],
                lambda: lp,
                p: pm,
                quotient: vec![g0.clone(), g1.clone()],
                full: Some(vec![full0, full1]),
            },
            Fixture::Tuple { label: "Ḡ′".into(), stage: 3, poles, matrices: vec![g0, g1], exact: false },
        ])
    }
    fn scalar_equation(&self, p: &Params) -> Result<Option<ScalarEquation>> {
        equations::ghg3_g1(p, base_of(p)?).map(Some)
    }
    fn spectral_type(&self) -> Option<&'static str> {
        table_type(self.name())
    }
}

// ---------------------------------------------------------------------------

pub struct Ghg3Alt;
named!(Ghg3Alt, "ghg3_alt");

const GHG3_ALT_DEFAULTS: [(&str, f64); 7] =
    [("q", 0.45), ("lambda", 0.37), ("mu", 0.7), ("alpha", 1.3), ("beta", 0.9), ("gamma", 0.55), ("lambda_p", 0.61)];

impl Construction for Ghg3Alt {
    fn description(&self) -> &str {
        "qhg, then move the pole 1/α to 1/γ and mc λ′"
    }
    fn param_names(&self) -> Vec<String> {
        GHG3_ALT_DEFAULTS.iter().map(|(k, _)| k.to_string()).collect()
    }
    fn defaults(&self) -> Params {
        GHG3_ALT_DEFAULTS.iter().map(|(k, v)| (k.to_string(), c(*v, 0.0))).collect()
    }
    fn random_params(&self, rng: &mut dyn RngCore) -> Params {
        draw(&self.param_names(), rng)
    }
    fn recipe(&self, p: &Params) -> Result<PipelineRecipe> {
        Ok(PipelineRecipe {
            steps: vec![
                Step::Seed { mu: param(p, "mu")?, alphas: vec![param(p, "alpha")?], betas: vec![param(p, "beta")?] },
                Step::MiddleConvolution { lambda: param(p, "lambda")?, expected: Some((0, 0)) },
                Step::PoleMove { index: 1, new_pole: one() / param(p, "gamma")? },
                Step::MiddleConvolution { lambda: param(p, "lambda_p")?, expected: Some((1, 0)) },
            ],
        })
    }
    fn fixtures(&self, chain: &Chain) -> Result<Vec<Fixture>> {
        let p = &chain.params;
        let base = base_of(p)?;
        let (l, m, a, b) = (param(p, "lambda")?, param(p, "mu")?, param(p, "alpha")?, param(p, "beta")?);
        let (g, lp) = (param(p, "gamma")?, param(p, "lambda_p")?);
        let e = |z: C64| base.pow(z);
        let poles = vec![zero(), one() / g];
        let qml = e(m - l);
        let bp0 = mat![[1.0 - qml, qml * (1.0 - b / a)], [0.0, 0.0]];
        let bp1 = mat![
            [qml * (1.0 - a / g), -qml * (1.0 - b / a) * (1.0 - a / g)],
            [e(-l) * (1.0 - e(m)) * a / g, e(-l) * (e(m) * (a - b) / g + e(l) - a / g)],
        ];
        let s = e(-l - lp);
        let h1 = s * (e(m) * (1.0 - b / g) + (e(l) - 1.0) * a / g);
        let h2 = 1.0 - e(m - l - lp);
        let h3 = (e(m) - e(l) + ((e(l) - 1.0) * a + (1.0 - e(m)) * b) / g) / (e(l + lp) * (b / a - 1.0));
        let j1 = 1.0 + s * (e(m) * (a - b) - a) / g;
        let j2 = s * (1.0 - e(m)) * a / g;
        let j3 = -e(m - l - lp) * (1.0 - b / a) * (1.0 - a / g);
        let j4 = e(m - l - lp) * (1.0 - b / a);
        let j5 = 1.0 + s * (e(m) * (1.0 - a / g) - e(l));
        let g0 = mat![[0.0, 0.0, 0.0], [h1, h2, h3], [0.0, 0.0, 0.0]];
        let g1 = mat![[j1, zero(), j2], [0.0, 0.0, 0.0], [j3, j4, j5]];
        let pm = mat![
            [zero(), zero(), zero(), e(m) * (1.0 - b / a)],
            [zero(), one(), zero(), e(m) - e(l)],
            [0.0, 0.0, 1.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
        ];
        let ib = identity(2) - &bp0 - &bp1;
        let r = e(-lp);
        Ok(vec![
            Fixture::Tuple {
                label: "B′ after the pole move".into(),
                stage: 2,
                poles: poles.clone(),
                matrices: vec![bp0.clone(), bp1.clone()],
                exact: true,
            },
            Fixture::Value {
                label: "det B′1".into(),
                computed: chain.stages[2].tuple.matrix(1).determinant(),
                printed: qml * (1.0 - a / g) * (1.0 - e(-l) * b / g),
            },
            Fixture::Kernel {
                label: "ker B′0".into(),
                matrix: chain.stages[2].tuple.matrix(0).clone(),
                vector: vector(&[e(m) * (1.0 - b / a), e(m) - e(l)]),
            },
            Fixture::Value {
                label: "det(G′0 + G′1)".into(),
                computed: det_of_conv(chain, 3),
                printed: (1.0 - r) * (1.0 - r) * (1.0 - s * a / g) * (1.0 - s * e(m) * b / g),
            },
            Fixture::Value {
                label: "tr(I − B′0 − B′1)".into(),
                computed: ib.trace(),
                printed: qml * b / g + e(-l) * a / g,
            },
            Fixture::Value {
                label: "det(I − B′0 − B′1)".into(),
                computed: ib.determinant(),
                printed: qml * b / g * e(-l) * a / g,
            },
            Fixture::Basis {
                label: "P and the quotient".into(),
                poles: poles.clone(),
                before: vec![bp0, bp1],
                lambda: lp,
                p: pm,
                quotient: vec![g0.clone(), g1.clone()],
                full: None,
            },
            Fixture::Tuple { label: "Ḡ′".into(), stage: 3, poles, matrices: vec![g0, g1], exact: false },
        ])
    }
    fn scalar_equation(&self, p: &Params) -> Result<Option<ScalarEquation>> {
        equations::ghg3_alt_g1(p, base_of(p)?, false).map(Some)
    }
    fn misprinted_equation(&self, p: &Params) -> Result<Option<ScalarEquation>> {
        equations::ghg3_alt_g1(p, base_of(p)?, true).map(Some)
    }
    fn spectral_type(&self) -> Option<&'static str> {
        table_type(self.name())
    }
}

// ---------------------------------------------------------------------------

/// `c^q_λ` of the seed with `N` poles.
pub struct Jp {
    n: usize,
    name: String,
}

impl Jp {
    pub fn new(n: usize) -> Self {
        Jp { n, name: format!("jp{n}") }
    }
}

impl Named for Jp {
    fn name(&self) -> &str {
        &self.name
    }
}

const ALPHAS: [f64; 3] = [1.3, 0.7, 1.9];
const BETAS: [f64; 3] = [0.9, 1.7, 0.4];
const GAMMAS: [f64; 2] = [0.55, 2.2];

fn seed_defaults(n: usize) -> Vec<(String, f64)> {
    let mut v = Vec::new();
    for k in 0..n {
        v.push((format!("alpha{}", k + 1), ALPHAS.get(k).copied().unwrap_or(0.5 + 0.37 * k as f64)));
        v.push((format!("beta{}", k + 1), BETAS.get(k).copied().unwrap_or(0.8 + 0.29 * k as f64)));
    }
    v
}

impl Construction for Jp {
    fn description(&self) -> &str {
        "q-convolution of the seed x^μ Π(β_k x)_∞/(α_k x)_∞"
    }
    fn param_names(&self) -> Vec<String> {
        self.defaults().keys().cloned().collect()
    }
    fn defaults(&self) -> Params {
        let mut p: Params = seed_defaults(self.n).into_iter().map(|(k, v)| (k, c(v, 0.0))).collect();
        p.insert("q".into(), c(0.45, 0.0));
        p.insert("lambda".into(), c(0.37, 0.0));
        p.insert("mu".into(), c(0.7, 0.0));
        p
    }
    fn random_params(&self, rng: &mut dyn RngCore) -> Params {
        draw(&self.param_names(), rng)
    }
    fn recipe(&self, p: &Params) -> Result<PipelineRecipe> {
        Ok(PipelineRecipe {
            steps: vec![
                Step::Seed { mu: param(p, "mu")?, alphas: indexed(p, "alpha", self.n)?, betas: indexed(p, "beta", self.n)? },
                Step::QConvolution(param(p, "lambda")?),
            ],
        })
    }
    fn spectral_type(&self) -> Option<&'static str> {
        table_type(self.name())
    }
}

// ---------------------------------------------------------------------------

fn variant_defaults(n: usize, gammas: usize, extra: &[(&str, f64)]) -> Params {
    let mut p: Params = seed_defaults(n).into_iter().map(|(k, v)| (k, c(v, 0.0))).collect();
    for k in 0..gammas {
        p.insert(format!("gamma{}", k + 1), c(GAMMAS[k], 0.0));
    }
    p.insert("q".into(), c(0.45, 0.0));
    p.extend(extra.iter().map(|(k, v)| (k.to_string(), c(*v, 0.0))));
    p
}

/// Steps shared by the variants: the seed with `μ = 0` and its mc.
fn variant_head(p: &Params, n: usize) -> Result<(Vec<Step>, C64)> {
    let base = base_of(p)?;
    let alphas = indexed(p, "alpha", n)?;
    let betas = indexed(p, "beta", n)?;
    let (lambda, expected) = if n == 2 {
        (param(p, "lambda")?, (1, 0))
    } else {
        // Degree three needs q^λ = β₁β₂β₃/(α₁α₂α₃).
        (base.log(betas.iter().product::<C64>() / alphas.iter().product::<C64>()), (1, 1))
    };
    Ok((
        vec![
            Step::Seed { mu: zero(), alphas, betas },
            Step::MiddleConvolution { lambda, expected: Some(expected) },
        ],
        lambda,
    ))
}

struct VariantData {
    base: QBase,
    alphas: Vec<C64>,
    betas: Vec<C64>,
    b1: C64,
    b2: C64,
    /// q^λ
    ql: C64,
}

fn variant_data(p: &Params, n: usize) -> Result<VariantData> {
    let base = base_of(p)?;
    let alphas = indexed(p, "alpha", n)?;
    let betas = indexed(p, "beta", n)?;
    let ql = if n == 2 {
        base.pow(param(p, "lambda")?)
    } else {
        betas.iter().product::<C64>() / alphas.iter().product::<C64>()
    };
    Ok(VariantData { base, b1: residue(&alphas, &betas, 0), b2: residue(&alphas, &betas, 1), alphas, betas, ql })
}

/// The quotient of the first mc, in the basis where `𝒦` is the last coordinate.
fn variant_quotient(d: &VariantData) -> Vec<CMatrix> {
    let r = one() / d.ql;
    let (b1, b2) = (d.b1, d.b2);
    let mut g = vec![
        CMatrix::zeros(2, 2),
        mat![[r * b1 + 1.0 - r, r * b2], [0.0, 0.0]],
        mat![[0.0, 0.0], [r * b1, r * b2 + 1.0 - r]],
    ];
    if d.alphas.len() == 3 {
        g.push(mat![[-r * b1, -r * b2], [-r * b1, -r * b2]]);
    }
    g
}

fn variant_head_fixtures(d: &VariantData) -> Vec<Fixture> {
    let n = d.alphas.len();
    let mut poles = vec![zero()];
    poles.extend(d.alphas.iter().map(|a| one() / a));
    let mut b = vec![zero()];
    b.extend((0..n).map(|k| residue(&d.alphas, &d.betas, k)));
    let mut out = vec![Fixture::Tuple {
        label: "seed with μ = 0".into(),
        stage: 0,
        poles: poles.clone(),
        matrices: scalars(&b),
        exact: true,
    }];
    if n == 2 {
        out.push(Fixture::Basis {
            label: "Ḡ in the basis (e1, e2, e0)".into(),
            poles: poles.clone(),
            before: scalars(&b),
            lambda: d.base.log(d.ql),
            p: mat![[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            quotient: variant_quotient(d),
            full: None,
        });
    }
    out.push(Fixture::Tuple { label: "Ḡ".into(), stage: 1, poles, matrices: variant_quotient(d), exact: false });
    out
}

pub struct VariantDeg2;
named!(VariantDeg2, "variant_deg2");

impl Construction for VariantDeg2 {
    fn description(&self) -> &str {
        "mc λ of the seed with two poles and μ = 0"
    }
    fn param_names(&self) -> Vec<String> {
        self.defaults().keys().cloned().collect()
    }
    fn defaults(&self) -> Params {
        variant_defaults(2, 0, &[("lambda", 0.37)])
    }
    fn random_params(&self, rng: &mut dyn RngCore) -> Params {
        draw(&self.param_names(), rng)
    }
    fn recipe(&self, p: &Params) -> Result<PipelineRecipe> {
        Ok(PipelineRecipe { steps: variant_head(p, 2)?.0 })
    }
    fn fixtures(&self, chain: &Chain) -> Result<Vec<Fixture>> {
        Ok(variant_head_fixtures(&variant_data(&chain.params, 2)?))
    }
    fn spectral_type(&self) -> Option<&'static str> {
        table_type(self.name())
    }
}

pub struct VariantDeg3;
named!(VariantDeg3, "variant_deg3");

impl Construction for VariantDeg3 {
    fn description(&self) -> &str {
        "mc λ of the seed with three poles, μ = 0 and q^λ = β₁β₂β₃/(α₁α₂α₃)"
    }
    fn param_names(&self) -> Vec<String> {
        self.defaults().keys().cloned().collect()
    }
    fn defaults(&self) -> Params {
        variant_defaults(3, 0, &[])
    }
    fn random_params(&self, rng: &mut dyn RngCore) -> Params {
        draw(&self.param_names(), rng)
    }
    fn recipe(&self, p: &Params) -> Result<PipelineRecipe> {
        Ok(PipelineRecipe { steps: variant_head(p, 3)?.0 })
    }
    fn fixtures(&self, chain: &Chain) -> Result<Vec<Fixture>> {
        Ok(variant_head_fixtures(&variant_data(&chain.params, 3)?))
    }
    fn spectral_type(&self) -> Option<&'static str> {
        table_type(self.name())
    }
}

// ---------------------------------------------------------------------------

pub struct S46;
named!(S46, "s46");

impl Construction for S46 {
    fn description(&self) -> &str {
        "variant_deg2, move the pole 1/α₁ to 1/γ₁, then mc λ′"
    }
    fn param_names(&self) -> Vec<String> {
        self.defaults().keys().cloned().collect()
    }
    fn defaults(&self) -> Params {
        variant_defaults(2, 1, &[("lambda", 0.37), ("lambda_p", 0.61)])
    }
    fn random_params(&self, rng: &mut dyn RngCore) -> Params {
        draw(&self.param_names(), rng)
    }
    fn recipe(&self, p: &Params) -> Result<PipelineRecipe> {
        let mut steps = variant_head(p, 2)?.0;
        steps.push(Step::PoleMove { index: 1, new_pole: one() / param(p, "gamma1")? });
        steps.push(Step::MiddleConvolution { lambda: param(p, "lambda_p")?, expected: Some((3, 0)) });
        Ok(PipelineRecipe { steps })
    }
    fn fixtures(&self, chain: &Chain) -> Result<Vec<Fixture>> {
        let p = &chain.params;
        let d = variant_data(p, 2)?;
        let (a1, a2) = (d.alphas[0], d.alphas[1]);
        let g1 = param(p, "gamma1")?;
        let lp = param(p, "lambda_p")?;
        let (b1, b2, ql) = (d.b1, d.b2, d.ql);
        let qn = one() / ql;
        let b111 = 1.0 + qn * (b1 - 1.0) * a1 / g1;
        let b112 = qn * b2 * a1 / g1;
        let b121 = qn * b1 * a2 * (a1 - g1) / (g1 * (a2 - g1));
        let b122 = (1.0 + qn * (b2 - 1.0) * a2 / g1) * (a1 - g1) / (a2 - g1);
        let b221 = qn * b1 * (a1 - a2) / (g1 - a2);
        let b222 = (1.0 + qn * (b2 - 1.0)) * (a1 - a2) / (g1 - a2);
        let poles = vec![zero(), one() / g1, one() / a2];
        let bp = vec![CMatrix::zeros(2, 2), mat![[b111, b112], [b121, b122]], mat![[zero(), zero()], [b221, b222]]];
        let w = ql + b2 - 1.0;
        let r = d.base.pow(-lp);
        let l1 = r * (b111 + w * b121 / b1);
        let l2 = r * (b112 + w * b122 / b1);
        let l3 = 1.0 - r + r * w * b221 / b1;
        let gbar = vec![
            CMatrix::zeros(3, 3),
            mat![[1.0 + r * (b111 - 1.0), r * b112, zero()], [r * b121, 1.0 + r * (b122 - 1.0), r * b221], [0.0, 0.0, 0.0]],
            mat![[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [l1, l2, l3]],
        ];
        let pm = mat![
            [0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
            [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
            [zero(), zero(), one(), zero(), zero(), w],
            [zero(), zero(), zero(), zero(), zero(), -b1],
        ];
        let mut out = variant_head_fixtures(&d);
        out.extend([
            Fixture::Tuple { label: "B′".into(), stage: 2, poles: poles.clone(), matrices: bp.clone(), exact: false },
            Fixture::Kernel { label: "ker B′2".into(), matrix: bp[2].clone(), vector: vector(&[w, -b1]) },
            Fixture::Basis {
                label: "P and the quotient".into(),
                poles: poles.clone(),
                before: bp,
                lambda: lp,
                p: pm,
                quotient: gbar.clone(),
                full: None,
            },
            Fixture::Tuple { label: "Ḡ′".into(), stage: 3, poles, matrices: gbar, exact: false },
        ]);
        Ok(out)
    }
    fn scalar_equation(&self, p: &Params) -> Result<Option<ScalarEquation>> {
        equations::s46_g1(p, base_of(p)?).map(Some)
    }
    fn spectral_type(&self) -> Option<&'static str> {
        table_type(self.name())
    }
}

// ---------------------------------------------------------------------------

pub struct S47;
named!(S47, "s47");

impl S47 {
    fn lambda_p(p: &Params) -> Result<C64> {
        let base = base_of(p)?;
        let (a1, a2) = (param(p, "alpha1")?, param(p, "alpha2")?);
        let (g1, g2) = (param(p, "gamma1")?, param(p, "gamma2")?);
        Ok(base.log(a1 * a2 / (g1 * g2)) - param(p, "lambda")?)
    }
}

impl Construction for S47 {
    fn description(&self) -> &str {
        "variant_deg2, move both nonzero poles to 1/γ₁, 1/γ₂, then mc λ′ with q^{λ+λ′} = α₁α₂/(γ₁γ₂)"
    }
    fn param_names(&self) -> Vec<String> {
        self.defaults().keys().cloned().collect()
    }
    fn defaults(&self) -> Params {
        variant_defaults(2, 2, &[("lambda", 0.37)])
    }
    fn random_params(&self, rng: &mut dyn RngCore) -> Params {
        draw(&self.param_names(), rng)
    }
    fn recipe(&self, p: &Params) -> Result<PipelineRecipe> {
        let mut steps = variant_head(p, 2)?.0;
        steps.push(Step::PoleMove { index: 1, new_pole: one() / param(p, "gamma1")? });
        steps.push(Step::PoleMove { index: 2, new_pole: one() / param(p, "gamma2")? });
        steps.push(Step::MiddleConvolution { lambda: Self::lambda_p(p)?, expected: Some((2, 1)) });
        Ok(PipelineRecipe { steps })
    }
    fn fixtures(&self, chain: &Chain) -> Result<Vec<Fixture>> {
        let p = &chain.params;
        let d = variant_data(p, 2)?;
        let (a1, a2) = (d.alphas[0], d.alphas[1]);
        let (g1, g2) = (param(p, "gamma1")?, param(p, "gamma2")?);
        let (b1, b2) = (d.b1, d.b2);
        let qn = one() / d.ql;
        let b111 = (1.0 + qn * (b1 - 1.0) * a1 / g1) * (a2 - g1) / (g2 - g1);
        let b112 = qn * b2 * a1 * (a2 - g1) / (g1 * (g2 - g1));
        let b121 = qn * b1 * a2 * (a1 - g1) / (g1 * (g2 - g1));
        let b122 = (1.0 + qn * (b2 - 1.0) * a2 / g1) * (a1 - g1) / (g2 - g1);
        let b211 = (1.0 + qn * (b1 - 1.0) * a1 / g2) * (a2 - g2) / (g1 - g2);
        let b212 = qn * b2 * a1 * (a2 - g2) / (g2 * (g1 - g2));
        let b221 = qn * b1 * a2 * (a1 - g2) / (g2 * (g1 - g2));
        let b222 = (1.0 + qn * (b2 - 1.0) * a2 / g2) * (a1 - g2) / (g1 - g2);
        let poles = vec![zero(), one() / g1, one() / g2];
        let bp = vec![CMatrix::zeros(2, 2), mat![[b111, b112], [b121, b122]], mat![[b211, b212], [b221, b222]]];
        let lp = Self::lambda_p(p)?;
        let r = g1 * g2 * d.ql / (a1 * a2);
        let k = b2 / b1;
        let gbar = vec![
            CMatrix::zeros(3, 3),
            mat![[1.0 - r + r * b111, r * b112, r * b211], [r * b121, 1.0 - r + r * b122, r * b221], [0.0, 0.0, 0.0]],
            mat![
                [b121 * k, b122 * k, b221 * k],
                [-b121, -b122, -b221],
                [b111 + b121 * k, b112 + b122 * k, 1.0 / r - 1.0 + b211 + b221 * k],
            ] * r,
        ];
        let pm = mat![
            [zero(), zero(), zero(), one(), zero(), b2],
            [zero(), zero(), zero(), zero(), one(), -b1],
            [one(), zero(), zero(), zero(), zero(), b2],
            [zero(), one(), zero(), zero(), zero(), -b1],
            [zero(), zero(), one(), zero(), zero(), b2],
            [zero(), zero(), zero(), zero(), zero(), -b1],
        ];
        let mut out = variant_head_fixtures(&d);
        out.extend([
            Fixture::Tuple { label: "B′".into(), stage: 3, poles: poles.clone(), matrices: bp.clone(), exact: false },
            Fixture::Kernel {
                label: "ℒ spanned by (B2, −B1, …)".into(),
                matrix: conv_sum(d.base, poles.clone(), bp.clone(), lp)?,
                vector: vector(&[b2, -b1, b2, -b1, b2, -b1]),
            },
            Fixture::Basis {
                label: "P and the quotient".into(),
                poles: poles.clone(),
                before: bp,
                lambda: lp,
                p: pm,
                quotient: gbar.clone(),
                full: None,
            },
            Fixture::Tuple { label: "Ḡ′".into(), stage: 4, poles, matrices: gbar, exact: false },
        ]);
        Ok(out)
    }
    fn scalar_equation(&self, p: &Params) -> Result<Option<ScalarEquation>> {
        equations::s47_g3(p, base_of(p)?).map(Some)
    }
    fn spectral_type(&self) -> Option<&'static str> {
        table_type(self.name())
    }
}

// ---------------------------------------------------------------------------

pub struct S48;
named!(S48, "s48");

struct S48Data {
    d: VariantData,
    poles: Vec<C64>,
    bp: Vec<CMatrix>,
    lp: C64,
    /// q^{−λ′}
    r: C64,
    b1x: [[C64; 2]; 2],
    b3x: [C64; 2],
}

impl S48 {
    fn data(p: &Params) -> Result<S48Data> {
        let d = variant_data(p, 3)?;
        let (a1, a2, a3) = (d.alphas[0], d.alphas[1], d.alphas[2]);
        let (g1, g2) = (param(p, "gamma1")?, param(p, "gamma2")?);
        let (b1, b2, ql) = (d.b1, d.b2, d.ql);
        let qn = one() / ql;
        let s2 = a1 * a2 + a2 * a3 + a3 * a1;
        let a123 = a1 * a2 * a3;
        let block = |g: C64, den: C64| {
            let diag = |ak: C64, other: C64, bk: C64| {
                (-s2 + g * (a1 + a2 + a3 - g)
                    + a123 / (ql * g)
                    + (ak - a3) * (other - g) * qn * bk
                    + ak * (other + a3 - g) * (1.0 - qn))
                    / den
            };
            mat![
                [diag(a1, a2, b1), (a1 - a3) * (a2 - g) * qn * b2 / den],
                [(a2 - a3) * (a1 - g) * qn * b1 / den, diag(a2, a1, b2)],
            ]
        };
        let bp1 = block(g1, (g1 - g2) * (a3 - g1));
        let bp2 = block(g2, (g1 - g2) * (g2 - a3));
        let den3 = (g2 - a3) * (a3 - g1);
        let b31 = -(a2 - a3) * (a3 - a1) * qn * b1 / den3;
        let b32 = -(a2 - a3) * (a3 - a1) * qn * b2 / den3;
        let bp3 = mat![[b31, b32], [b31, b32]];
        let b1x = [[bp1[(0, 0)], bp1[(0, 1)]], [bp1[(1, 0)], bp1[(1, 1)]]];
        let base = d.base;
        Ok(S48Data {
            poles: vec![zero(), one() / g1, one() / g2, one() / a3],
            bp: vec![CMatrix::zeros(2, 2), bp1, bp2, bp3],
            lp: base.log(a1 * a2 / (g1 * g2)) - base.log(ql),
            r: g1 * g2 * ql / (a1 * a2),
            b1x,
            b3x: [b31, b31],
            d,
        })
    }

    fn quotient(s: &S48Data, g2_11: C64) -> Vec<CMatrix> {
        let r = s.r;
        let [[b11, b12], [b21, b22]] = s.b1x;
        let [b311, b321] = s.b3x;
        let k = s.d.b2 / s.d.b1;
        vec![
            CMatrix::zeros(3, 3),
            mat![[1.0 + r * (b11 - 1.0), r * b12, r * b311], [r * b21, 1.0 + r * (b22 - 1.0), r * b321], [0.0, 0.0, 0.0]],
            mat![
                [g2_11, -r * b12, -r * b311],
                [-r * b21, -r * b22, -r * b321],
                [-r * (b11 + k * b21), -r * (b12 + k * b22), -r * (b311 + k * b321)],
            ],
            mat![
                [0.0, 0.0, 0.0],
                [0.0, 0.0, 0.0],
                [r * (b11 + k * b21), r * (b12 + k * b22), 1.0 + (b311 - 1.0) * r + k * b321 * r],
            ],
        ]
    }

    fn p_matrix(s: &S48Data) -> CMatrix {
        let (b1, b2) = (s.d.b1, s.d.b2);
        let mut pm = mat![
            [0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0],
            [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
            [0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
        ];
        pm[(6, 5)] = -b2;
        pm[(7, 5)] = b1;
        pm
    }
}

impl Construction for S48 {
    fn description(&self) -> &str {
        "variant_deg3, move 1/α₁, 1/α₂ to 1/γ₁, 1/γ₂, then mc λ′ with q^{λ+λ′} = α₁α₂/(γ₁γ₂)"
    }
    fn param_names(&self) -> Vec<String> {
        self.defaults().keys().cloned().collect()
    }
    fn defaults(&self) -> Params {
        variant_defaults(3, 2, &[])
    }
    fn random_params(&self, rng: &mut dyn RngCore) -> Params {
        draw(&self.param_names(), rng)
    }
    fn recipe(&self, p: &Params) -> Result<PipelineRecipe> {
        let mut steps = variant_head(p, 3)?.0;
        steps.push(Step::PoleMove { index: 1, new_pole: one() / param(p, "gamma1")? });
        steps.push(Step::PoleMove { index: 2, new_pole: one() / param(p, "gamma2")? });
        steps.push(Step::MiddleConvolution { lambda: Self::data(p)?.lp, expected: Some((3, 2)) });
        Ok(PipelineRecipe { steps })
    }
    fn fixtures(&self, chain: &Chain) -> Result<Vec<Fixture>> {
        let s = Self::data(&chain.params)?;
        let gbar = Self::quotient(&s, -s.r * s.b1x[0][0]);
        let conv = conv_sum(s.d.base, s.poles.clone(), s.bp.clone(), s.lp)?;
        let mut out = variant_head_fixtures(&s.d);
        out.extend([
            Fixture::Tuple { label: "B′".into(), stage: 3, poles: s.poles.clone(), matrices: s.bp.clone(), exact: false },
            Fixture::Kernel { label: "ker B′3".into(), matrix: s.bp[3].clone(), vector: vector(&[-s.d.b2, s.d.b1]) },
            Fixture::Kernel {
                label: "ℒ ∋ (1, 0, 1, 0, …)".into(),
                matrix: conv.clone(),
                vector: vector(&[one(), zero(), one(), zero(), one(), zero(), one(), zero()]),
            },
            Fixture::Kernel {
                label: "ℒ ∋ (0, 1, 0, 1, …)".into(),
                matrix: conv,
                vector: vector(&[zero(), one(), zero(), one(), zero(), one(), zero(), one()]),
            },
            Fixture::Basis {
                label: "P and the quotient".into(),
                poles: s.poles.clone(),
                before: s.bp.clone(),
                lambda: s.lp,
                p: Self::p_matrix(&s),
                quotient: gbar.clone(),
                full: None,
            },
            Fixture::Tuple { label: "Ḡ′".into(), stage: 4, poles: s.poles.clone(), matrices: gbar, exact: false },
        ]);
        Ok(out)
    }
    fn misprints(&self, chain: &Chain) -> Result<Vec<Fixture>> {
        let s = Self::data(&chain.params)?;
        // The printed (1,1) entry of Ḡ′2 reads −q^{−λ′} b¹₂₁.
        let printed = Self::quotient(&s, -s.r * s.b1x[1][0]);
        Ok(vec![Fixture::Basis {
            label: "Ḡ′2 as printed".into(),
            poles: s.poles.clone(),
            before: s.bp.clone(),
            lambda: s.lp,
            p: Self::p_matrix(&s),
            quotient: printed,
            full: None,
        }])
    }
    fn scalar_equation(&self, p: &Params) -> Result<Option<ScalarEquation>> {
        equations::s48_g3(p, base_of(p)?, false).map(Some)
    }
    fn misprinted_equation(&self, p: &Params) -> Result<Option<ScalarEquation>> {
        equations::s48_g3(p, base_of(p)?, true).map(Some)
    }
    fn spectral_type(&self) -> Option<&'static str> {
        table_type(self.name())
    }
}

// ---------------------------------------------------------------------------

/// A variant followed by `add μ′` and `mc λ′`; only sketched, so nothing is asserted.
pub struct VariantAdd {
    n: usize,
    name: String,
}

impl VariantAdd {
    pub fn new(n: usize) -> Self {
        VariantAdd { n, name: format!("deg{n}_add") }
    }
}

impl Named for VariantAdd {
    fn name(&self) -> &str {
        &self.name
    }
}

impl Construction for VariantAdd {
    fn description(&self) -> &str {
        "a variant, then add μ′ and mc λ′"
    }
    fn param_names(&self) -> Vec<String> {
        self.defaults().keys().cloned().collect()
    }
    fn defaults(&self) -> Params {
        let mut extra = vec![("lambda_p", 0.61), ("mu_p", 0.29)];
        if self.n == 2 {
            extra.push(("lambda", 0.37));
        }
        variant_defaults(self.n, 0, &extra)
    }
    fn random_params(&self, rng: &mut dyn RngCore) -> Params {
        draw(&self.param_names(), rng)
    }
    fn recipe(&self, p: &Params) -> Result<PipelineRecipe> {
        let mut steps = variant_head(p, self.n)?.0;
        steps.push(Step::AddMu(param(p, "mu_p")?));
        steps.push(Step::MiddleConvolution { lambda: param(p, "lambda_p")?, expected: None });
        Ok(PipelineRecipe { steps })
    }
    fn asserts_nothing(&self) -> bool {
        true
    }
}

// ---------------------------------------------------------------------------

/// A generic 2×2 system with poles `0, t1, t2`.
pub struct QHeun;
named!(QHeun, "qheun");

const QHEUN_ENTRIES: [f64; 12] = [0.31, 0.12, -0.27, 0.44, 0.58, -0.21, 0.16, 0.37, -0.19, 0.26, 0.41, 0.53];

impl QHeun {
    fn entry_names() -> Vec<String> {
        (0..3).flat_map(|i| ["11", "12", "21", "22"].map(|rc| format!("b{i}_{rc}"))).collect()
    }
}

impl Construction for QHeun {
    fn description(&self) -> &str {
        "a generic rank-2 system with two nonzero poles"
    }
    fn param_names(&self) -> Vec<String> {
        self.defaults().keys().cloned().collect()
    }
    fn defaults(&self) -> Params {
        let mut p = defaults_from(&[("q", c(0.45, 0.0)), ("t1", c(1.3, 0.2)), ("t2", c(-0.6, 0.9))]);
        p.extend(Self::entry_names().into_iter().zip(QHEUN_ENTRIES).map(|(k, v)| (k, c(v, 0.0))));
        p
    }
    fn random_params(&self, rng: &mut dyn RngCore) -> Params {
        let mut p = draw(&["q".to_string(), "t1".to_string(), "t2".to_string()], rng);
        for k in Self::entry_names() {
            let z = random_magnitude(rng);
            p.insert(k, z * 0.5);
        }
        p
    }
    fn recipe(&self, p: &Params) -> Result<PipelineRecipe> {
        let names = Self::entry_names();
        let mut matrices = Vec::new();
        for i in 0..3 {
            let e = |k: usize| param(p, &names[4 * i + k]);
            matrices.push(mat![[e(0)?, e(1)?], [e(2)?, e(3)?]]);
        }
        Ok(PipelineRecipe {
            steps: vec![Step::Given { poles: vec![zero(), param(p, "t1")?, param(p, "t2")?], matrices }],
        })
    }
    fn spectral_type(&self) -> Option<&'static str> {
        Some(Q_HEUN)
    }
}

pub fn register_all(r: &mut Registry<dyn Construction>) {
    r.register(Box::new(Qhg));
    r.register(Box::new(Ghg3));
    r.register(Box::new(Ghg3Alt));
    for n in 2..=4 {
        r.register(Box::new(Jp::new(n)));
    }
    r.register(Box::new(VariantDeg2));
    r.register(Box::new(VariantDeg3));
    r.register(Box::new(S46));
    r.register(Box::new(S47));
    r.register(Box::new(S48));
    r.register(Box::new(VariantAdd::new(2)));
    r.register(Box::new(VariantAdd::new(3)));
    r.register(Box::new(QHeun));
}
