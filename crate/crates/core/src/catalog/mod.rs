//! Named constructions as reproducible pipelines, the matrices and scalar
//! equations printed for them, and the checks tying the two together.

mod constructions;
pub mod equations;
mod limits;

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, TolerancePolicy, C64};
use crate::qseries::QBase;
use crate::registry::{Named, Registry};
use crate::solutions::{seed_tuple, SeedSolution};
use crate::system::{self, GridFunction, MCResult, SystemTuple};

pub use constructions::*;
pub use limits::{aligned_at, limit_tuple, q_to_1_limit, LimitReport};

pub type Params = BTreeMap<String, C64>;

pub fn param(p: &Params, key: &str) -> Result<C64> {
    p.get(key).copied().ok_or_else(|| Error::Argument(format!("missing parameter `{key}`")))
}

pub fn base_of(p: &Params) -> Result<QBase> {
    QBase::new(param(p, "q")?)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    Seed { mu: C64, alphas: Vec<C64>, betas: Vec<C64> },
    /// An explicit starting tuple.
    Given { poles: Vec<C64>, matrices: Vec<CMatrix> },
    AddMu(C64),
    PoleMove { index: usize, new_pole: C64 },
    QConvolution(C64),
    /// `expected` holds `(dim 𝒦, dim ℒ)` for generic parameters.
    MiddleConvolution { lambda: C64, expected: Option<(usize, usize)> },
}

impl Step {
    fn label(&self) -> String {
        match self {
            Step::Seed { alphas, .. } => format!("seed (N = {})", alphas.len()),
            Step::Given { poles, .. } => format!("given tuple (N = {})", poles.len() - 1),
            Step::AddMu(mu) => format!("add μ = {mu}"),
            Step::PoleMove { index, new_pole } => format!("move pole {index} to {new_pole}"),
            Step::QConvolution(l) => format!("c^q λ = {l}"),
            Step::MiddleConvolution { lambda, .. } => format!("mc^q λ = {lambda}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineRecipe {
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone)]
pub struct McStep {
    pub lambda: C64,
    /// The q-convolution before the quotient is taken.
    pub conv: SystemTuple,
    pub result: MCResult,
    pub expected: Option<(usize, usize)>,
}

impl McStep {
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.result.dim_k(), self.result.dim_l(), self.result.quotient_dim())
    }

    pub fn summary(&self) -> String {
        let (k, l, d) = self.dims();
        format!("dim K={k}, dim L={l}, quotient={d}")
    }
}

#[derive(Debug, Clone)]
pub struct Stage {
    pub label: String,
    pub tuple: SystemTuple,
    pub mc: Option<McStep>,
}

#[derive(Debug, Clone)]
pub struct Chain {
    pub name: String,
    pub params: Params,
    pub stages: Vec<Stage>,
}

impl Chain {
    pub fn last(&self) -> &SystemTuple {
        &self.stages.last().expect("chains are never empty").tuple
    }

    pub fn mc_steps(&self) -> impl Iterator<Item = (usize, &McStep)> {
        self.stages.iter().enumerate().filter_map(|(i, s)| s.mc.as_ref().map(|m| (i, m)))
    }

    /// `NonGenericParameter` when an mc step's dimensions differ from the expected counts.
    pub fn check_expected(&self) -> Result<()> {
        let mut bad = Vec::new();
        for (i, m) in self.mc_steps() {
            if let Some((ek, el)) = m.expected {
                let (k, l, _) = m.dims();
                if (k, l) != (ek, el) {
                    bad.push(format!("stage {i}: {} (expected dim K={ek}, dim L={el})", m.summary()));
                }
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::NonGenericParameter(format!("{}: {}", self.name, bad.join("; "))))
        }
    }
}

impl PipelineRecipe {
    pub fn run(&self, name: &str, params: &Params, base: QBase, tol: &TolerancePolicy) -> Result<Chain> {
        let mut stages: Vec<Stage> = Vec::new();
        for step in &self.steps {
            let label = step.label();
            let stage = match (step, stages.last()) {
                (Step::Seed { mu, alphas, betas }, None) => {
                    let seed = SeedSolution::new(*mu, alphas.clone(), betas.clone())?;
                    Stage { label, tuple: seed_tuple(&seed, &base)?, mc: None }
                }
                (Step::Given { poles, matrices }, None) => {
                    Stage { label, tuple: SystemTuple::new(base, poles.clone(), matrices.clone())?, mc: None }
                }
                (Step::Seed { .. } | Step::Given { .. }, Some(_)) => {
                    return Err(Error::Argument("a seed must come first".into()))
                }
                (_, None) => return Err(Error::Argument("a recipe starts with a seed".into())),
                (Step::AddMu(mu), Some(prev)) => Stage { label, tuple: system::add_mu(&prev.tuple, *mu), mc: None },
                (Step::PoleMove { index, new_pole }, Some(prev)) => {
                    Stage { label, tuple: system::pole_move(&prev.tuple, *index, *new_pole)?, mc: None }
                }
                (Step::QConvolution(l), Some(prev)) => {
                    Stage { label, tuple: system::q_convolution(&prev.tuple, *l), mc: None }
                }
                (Step::MiddleConvolution { lambda, expected }, Some(prev)) => {
                    let conv = system::q_convolution(&prev.tuple, *lambda);
                    let result = system::middle_convolution(&prev.tuple, *lambda, tol)?;
                    let tuple = result.reduced.clone();
                    Stage { label, tuple, mc: Some(McStep { lambda: *lambda, conv, result, expected: *expected }) }
                }
            };
            stages.push(stage);
        }
        Ok(Chain { name: name.to_string(), params: params.clone(), stages })
    }
}

/// A printed claim about one construction.
#[derive(Debug, Clone)]
pub enum Fixture {
    /// Printed tuple for a chain stage; `exact` means the pipeline works in the
    /// printed basis, otherwise a simultaneous similarity is allowed.
    Tuple { label: String, stage: usize, poles: Vec<C64>, matrices: Vec<CMatrix>, exact: bool },
    /// A printed change of basis `P`: for `G′ = c^q_λ(before)`, the last columns
    /// of `P` span an invariant subspace and the upper-left blocks of `P⁻¹G′ᵢP`
    /// are the printed quotient matrices. `full` optionally pins all of `P⁻¹G′ᵢP`.
    Basis {
        label: String,
        poles: Vec<C64>,
        before: Vec<CMatrix>,
        lambda: C64,
        p: CMatrix,
        quotient: Vec<CMatrix>,
        full: Option<Vec<CMatrix>>,
    },
    /// A printed scalar (determinant, trace, ...) next to the value from the pipeline.
    Value { label: String, computed: C64, printed: C64 },
    /// A printed vector claimed to lie in the kernel of a pipeline matrix.
    Kernel { label: String, matrix: CMatrix, vector: CVector },
}

impl Fixture {
    pub fn label(&self) -> &str {
        match self {
            Fixture::Tuple { label, .. }
            | Fixture::Basis { label, .. }
            | Fixture::Value { label, .. }
            | Fixture::Kernel { label, .. } => label,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureResult {
    pub label: String,
    pub residual: f64,
}

fn rel_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    let scale = b.iter().map(|z| z.norm()).fold(1.0, f64::max);
    linalg::max_abs_diff(a, b) / scale
}

pub fn check_fixture(chain: &Chain, f: &Fixture) -> Result<FixtureResult> {
    let residual = match f {
        Fixture::Tuple { stage, poles, matrices, exact, .. } => {
            let t = &chain
                .stages
                .get(*stage)
                .ok_or_else(|| Error::Argument(format!("chain has no stage {stage}")))?
                .tuple;
            if t.matrices().len() != matrices.len() || t.m() != matrices[0].nrows() {
                return Err(Error::Dimension(format!("stage {stage} has a different shape")));
            }
            let pole_err = t
                .poles()
                .iter()
                .zip(poles)
                .map(|(a, b)| (a - b).norm() / b.norm().max(1.0))
                .fold(0.0, f64::max);
            let mat_err = if *exact {
                t.matrices().iter().zip(matrices).map(|(a, b)| rel_diff(a, b)).fold(0.0, f64::max)
            } else {
                linalg::simultaneous_similarity(t.matrices(), matrices).map(|s| s.residual).unwrap_or(f64::INFINITY)
            };
            pole_err.max(mat_err)
        }
        Fixture::Basis { poles, before, lambda, p, quotient, full, .. } => {
            let t = SystemTuple::new(*chain.last().base(), poles.clone(), before.clone())?;
            let conv = system::q_convolution(&t, *lambda);
            let pinv = linalg::inverse(p).ok_or_else(|| Error::Degenerate("printed P is singular".into()))?;
            let d = quotient[0].nrows();
            let n = p.nrows();
            let mut worst = 0.0f64;
            for (i, g) in conv.matrices().iter().enumerate() {
                let m = &pinv * g * p;
                let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
                let upper_right = m.view((0, d), (d, n - d)).iter().map(|z| z.norm()).fold(0.0, f64::max);
                worst = worst.max(upper_right / scale);
                worst = worst.max(rel_diff(&m.view((0, 0), (d, d)).into_owned(), &quotient[i]));
                if let Some(full) = full {
                    worst = worst.max(rel_diff(&m, &full[i]));
                }
            }
            worst
        }
        Fixture::Value { computed, printed, .. } => (computed - printed).norm() / printed.norm().max(1.0),
        Fixture::Kernel { matrix, vector, .. } => {
            (matrix * vector).norm() / (matrix.norm().max(1.0) * vector.norm().max(f64::MIN_POSITIVE))
        }
    };
    Ok(FixtureResult { label: f.label().to_string(), residual })
}

/// Coefficient `j` multiplies `g(q^{lowest_shift + j} x)`.
#[derive(Clone)]
pub struct ScalarEquation {
    pub name: &'static str,
    pub order: usize,
    pub lowest_shift: i64,
    /// Printed degree in `x` of every coefficient.
    pub degree: usize,
    /// Component of the printed-basis solution the equation is about.
    pub component: usize,
    coeff: Arc<dyn Fn(usize, C64) -> C64 + Send + Sync>,
}

impl std::fmt::Debug for ScalarEquation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarEquation")
            .field("name", &self.name)
            .field("order", &self.order)
            .field("lowest_shift", &self.lowest_shift)
            .field("degree", &self.degree)
            .field("component", &self.component)
            .finish()
    }
}

impl ScalarEquation {
    pub fn new(
        name: &'static str,
        order: usize,
        lowest_shift: i64,
        degree: usize,
        component: usize,
        coeff: impl Fn(usize, C64) -> C64 + Send + Sync + 'static,
    ) -> Self {
        ScalarEquation { name, order, lowest_shift, degree, component, coeff: Arc::new(coeff) }
    }

    pub fn coeff(&self, j: usize, x: C64) -> C64 {
        (self.coeff)(j, x)
    }

    /// Degrees of each coefficient, read off a discrete Fourier transform of
    /// 16 samples on a circle.
    pub fn coefficient_degrees(&self, radius: f64) -> Vec<usize> {
        const N: usize = 16;
        (0..=self.order)
            .map(|j| {
                let vals: Vec<C64> = (0..N)
                    .map(|k| self.coeff(j, C64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / N as f64)))
                    .collect();
                let mags: Vec<f64> = (0..N)
                    .map(|d| {
                        let s: C64 = vals
                            .iter()
                            .enumerate()
                            .map(|(k, v)| v * C64::from_polar(1.0, -2.0 * std::f64::consts::PI * (d * k) as f64 / N as f64))
                            .sum();
                        s.norm() / N as f64
                    })
                    .collect();
                let top = mags.iter().cloned().fold(0.0, f64::max);
                (0..N).rev().find(|&d| mags[d] > 1e-10 * top).unwrap_or(0)
            })
            .collect()
    }

    /// Leading and trailing coefficients must not vanish identically.
    pub fn nondegenerate(&self) -> bool {
        let xs = [C64::new(0.3, 0.1), C64::new(-0.7, 0.4), C64::new(1.3, -0.2), C64::new(0.05, 0.9), C64::new(2.1, 1.7)];
        let nz = |j: usize| xs.iter().any(|&x| self.coeff(j, x).norm() > 1e-14);
        nz(0) && nz(self.order)
    }
}

/// `|Σⱼ cⱼ g(q^{s+j}x)| / Σⱼ |cⱼ|·|g(q^{s+j}x)|` with `x = qⁿξ` on the grid of `g`.
pub fn scalar_residual(eq: &ScalarEquation, g: &GridFunction, component: usize, n: i64) -> Result<f64> {
    let x = g.point(n);
    let mut num = C64::new(0.0, 0.0);
    let mut den = 0.0;
    for j in 0..=eq.order {
        let k = n + eq.lowest_shift + j as i64;
        let v = g.get(k).ok_or_else(|| Error::Argument(format!("no sample at grid index {k}")))?[component];
        let t = eq.coeff(j, x) * v;
        num += t;
        den += t.norm();
    }
    Ok(if den == 0.0 { 0.0 } else { num.norm() / den })
}

/// Same residual for a function given in closed form.
pub fn scalar_residual_fn<F>(eq: &ScalarEquation, base: &QBase, x: C64, mut g: F) -> Result<f64>
where
    F: FnMut(C64) -> Result<C64>,
{
    let mut num = C64::new(0.0, 0.0);
    let mut den = 0.0;
    for j in 0..=eq.order {
        let t = eq.coeff(j, x) * g(base.powi(eq.lowest_shift + j as i64) * x)?;
        num += t;
        den += t.norm();
    }
    Ok(if den == 0.0 { 0.0 } else { num.norm() / den })
}

pub trait Construction: Named + Send + Sync {
    fn description(&self) -> &str;
    fn param_names(&self) -> Vec<String>;
    fn defaults(&self) -> Params;
    fn random_params(&self, rng: &mut dyn RngCore) -> Params;
    fn recipe(&self, p: &Params) -> Result<PipelineRecipe>;
    /// Printed claims, checked against `chain` (built from this construction).
    fn fixtures(&self, _chain: &Chain) -> Result<Vec<Fixture>> {
        Ok(Vec::new())
    }
    /// Printed entries that disagree with the pipeline; each is expected to fail.
    fn misprints(&self, _chain: &Chain) -> Result<Vec<Fixture>> {
        Ok(Vec::new())
    }
    fn scalar_equation(&self, _p: &Params) -> Result<Option<ScalarEquation>> {
        Ok(None)
    }
    /// The scalar equation exactly as printed, when it disagrees with the system.
    fn misprinted_equation(&self, _p: &Params) -> Result<Option<ScalarEquation>> {
        Ok(None)
    }
    /// Printed spectral type of the last stage.
    fn spectral_type(&self) -> Option<&'static str> {
        None
    }
    /// Pipelines with nothing printed to compare against.
    fn asserts_nothing(&self) -> bool {
        false
    }
}

pub fn registry() -> Registry<dyn Construction> {
    let mut r: Registry<dyn Construction> = Registry::new();
    constructions::register_all(&mut r);
    r
}

/// Defaults overlaid with the given parameters.
pub fn resolve_params(c: &dyn Construction, given: &Params) -> Result<Params> {
    let names = c.param_names();
    for k in given.keys() {
        if !names.iter().any(|n| n == k) {
            return Err(Error::Argument(format!("{} takes no parameter `{k}` (known: {})", c.name(), names.join(", "))));
        }
    }
    let mut p = c.defaults();
    p.extend(given.iter().map(|(k, v)| (k.clone(), *v)));
    Ok(p)
}

pub fn build_unchecked(c: &dyn Construction, given: &Params, tol: &TolerancePolicy) -> Result<Chain> {
    let p = resolve_params(c, given)?;
    c.recipe(&p)?.run(c.name(), &p, base_of(&p)?, tol)
}

/// Runs the pipeline and insists on the expected 𝒦/ℒ dimensions.
pub fn build(c: &dyn Construction, given: &Params, tol: &TolerancePolicy) -> Result<Chain> {
    let chain = build_unchecked(c, given, tol)?;
    chain.check_expected()?;
    Ok(chain)
}

pub fn fixture_report(c: &dyn Construction, given: &Params, tol: &TolerancePolicy) -> Result<Vec<FixtureResult>> {
    let chain = build(c, given, tol)?;
    c.fixtures(&chain)?.iter().map(|f| check_fixture(&chain, f)).collect()
}

#[derive(Debug, Clone)]
pub struct CrossCheckReport {
    pub equation: &'static str,
    pub max_residual: f64,
    pub points: usize,
    /// Residual of the similarity taking the pipeline output to the printed basis.
    pub alignment: f64,
    pub degrees: Vec<usize>,
    pub expected_degree: usize,
}

/// Propagates the last stage from `x0`, moves the solution into the printed
/// basis and evaluates the printed scalar equation at `points` grid points.
pub fn cross_check_scalar(
    c: &dyn Construction,
    given: &Params,
    x0: C64,
    points: usize,
    seed: u64,
    tol: &TolerancePolicy,
) -> Result<CrossCheckReport> {
    let p = resolve_params(c, given)?;
    let eq = c
        .scalar_equation(&p)?
        .ok_or_else(|| Error::Argument(format!("{} has no printed scalar equation", c.name())))?;
    cross_check_equation(c, given, &eq, x0, points, seed, tol)
}

/// [`cross_check_scalar`] for an arbitrary equation about the same system.
pub fn cross_check_equation(
    c: &dyn Construction,
    given: &Params,
    eq: &ScalarEquation,
    x0: C64,
    points: usize,
    seed: u64,
    tol: &TolerancePolicy,
) -> Result<CrossCheckReport> {
    let chain = build(c, given, tol)?;
    let last = chain.last();
    let printed = c
        .fixtures(&chain)?
        .into_iter()
        .filter_map(|f| match f {
            Fixture::Tuple { stage, matrices, .. } if stage + 1 == chain.stages.len() => Some(matrices),
            _ => None,
        })
        .next_back()
        .ok_or_else(|| Error::Argument(format!("{} has no printed final tuple", c.name())))?;
    let sim = linalg::simultaneous_similarity(last.matrices(), &printed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y0 = CVector::from_fn(last.m(), |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let back = (-eq.lowest_shift).max(0) as usize;
    let steps = points + eq.order + back;
    let start = last.base().powi(-(back as i64)) * x0;
    let g = system::propagate(last, start, &y0, steps, 1)?;
    let mapped = GridFunction { values: g.values.iter().map(|v| &sim.s * v).collect(), ..g };
    let mut worst = 0.0f64;
    for k in 0..points {
        let n = back as i64 + k as i64;
        worst = worst.max(scalar_residual(eq, &mapped, eq.component, n)?);
    }
    let radius = 1.0 + last.poles().iter().map(|b| b.norm()).fold(0.0, f64::max);
    Ok(CrossCheckReport {
        equation: eq.name,
        max_residual: worst,
        points,
        alignment: sim.residual,
        degrees: eq.coefficient_degrees(radius),
        expected_degree: eq.degree,
    })
}

/// Complex number with modulus in `[0.3, 2]` and argument in `[−1.2, 1.2]`.
pub fn random_magnitude(rng: &mut dyn RngCore) -> C64 {
    let r = rng.gen_range(0.3..2.0);
    C64::from_polar(r, rng.gen_range(-1.2..1.2))
}

/// Exponent with real part in `[0.15, 0.85]` and a small imaginary part.
pub fn random_exponent(rng: &mut dyn RngCore) -> C64 {
    C64::new(rng.gen_range(0.15..0.85), rng.gen_range(-0.25..0.25))
}

pub fn random_q(rng: &mut dyn RngCore) -> C64 {
    C64::new(rng.gen_range(0.5..0.8), 0.0)
}
