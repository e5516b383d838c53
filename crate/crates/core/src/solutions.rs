//! Seed solutions, the Jackson-integral transform attached to `c^q_λ`, and the
//! closed-form ₂φ₁/₃φ₂ solutions of the hypergeometric constructions.

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, TolerancePolicy, C64};
use crate::qseries::{
    cpow, jackson_integral, kernel_eval, phi21, phi32, qpoch_inf, qpoch_ratio, JacksonRange, KernelSpec, QBase,
};
use crate::system::SystemTuple;

pub use crate::system::GridFunction;

const SERIES_TOL: f64 = 1e-16;

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

/// `y(x) = x^μ Π (αⱼx;q)_∞/(βⱼx;q)_∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedSolution {
    pub mu: C64,
    pub alphas: Vec<C64>,
    pub betas: Vec<C64>,
}

impl SeedSolution {
    pub fn new(mu: C64, alphas: Vec<C64>, betas: Vec<C64>) -> Result<Self> {
        if alphas.len() != betas.len() {
            return Err(Error::Dimension("need as many α as β".into()));
        }
        if alphas.iter().chain(&betas).any(|z| z.norm() == 0.0) {
            return Err(Error::Argument("α and β must be nonzero".into()));
        }
        Ok(SeedSolution { mu, alphas, betas })
    }

    pub fn eval(&self, base: &QBase, x: C64) -> Result<C64> {
        let nums: Vec<C64> = self.alphas.iter().map(|a| a * x).collect();
        let dens: Vec<C64> = self.betas.iter().map(|b| b * x).collect();
        Ok(cpow(x, self.mu) * qpoch_ratio(&nums, &dens, base)?)
    }
}

/// `B₀ = 1 − q^μ`, `B_k = q^μ (α_k−β_k)/α_k Π_{j≠k}(α_k−β_j)/(α_k−α_j)`, poles `1/α_k`.
pub fn seed_tuple(seed: &SeedSolution, base: &QBase) -> Result<SystemTuple> {
    let qm = base.pow(seed.mu);
    let n = seed.alphas.len();
    let mut poles = vec![C64::new(0.0, 0.0)];
    let mut mats = vec![CMatrix::from_element(1, 1, one() - qm)];
    for k in 0..n {
        let ak = seed.alphas[k];
        let mut b = qm * (ak - seed.betas[k]) / ak;
        for j in 0..n {
            if j == k {
                continue;
            }
            let gap = ak - seed.alphas[j];
            if gap.norm() <= 1e-12 * ak.norm() {
                return Err(Error::Degenerate(format!("α_{k} and α_{j} coincide")));
            }
            b *= (ak - seed.betas[j]) / gap;
        }
        poles.push(one() / ak);
        mats.push(CMatrix::from_element(1, 1, b));
    }
    SystemTuple::new(*base, poles, mats)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    pub eig_i_minus_b0: Vec<C64>,
    pub eig_i_minus_sum: Vec<C64>,
    pub passes: bool,
}

/// Sufficient condition for convergence of the transform:
/// `max|eig(I − B₀)| < 1` and `min|eig(I − ΣBᵢ)| > |q^λ|`.
pub fn convergence_certificate(t: &SystemTuple, lambda: C64) -> CertificateReport {
    let e0 = linalg::eigenvalues(&t.b_at_zero());
    let einf = linalg::eigenvalues(&t.b_at_infinity());
    let ql = t.base().pow(lambda).norm();
    let passes = e0.iter().all(|z| z.norm() < 1.0) && einf.iter().all(|z| z.norm() > ql);
    CertificateReport { eig_i_minus_b0: e0, eig_i_minus_sum: einf, passes }
}

/// Where the Jackson grid `{qⁿξ}` is anchored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Anchor {
    /// `ξ` independent of `x`.
    Fixed(C64),
    /// `ξ = A·x`; the grid moves with `x`.
    Proportional(C64),
}

impl Anchor {
    pub fn xi(&self, x: C64) -> C64 {
        match *self {
            Anchor::Fixed(xi) => xi,
            Anchor::Proportional(a) => a * x,
        }
    }
}

/// Stacked `Ỹᵢ(x) = ∫₀^{ξ∞} K(x,s)/(s − bᵢ) Y(s) d_qs`, one block per pole.
pub fn convolve_solution<F>(
    t: &SystemTuple,
    y: F,
    kernel: &KernelSpec,
    x: C64,
    anchor: Anchor,
    range: JacksonRange,
) -> Result<CVector>
where
    F: Fn(C64) -> Result<CVector>,
{
    let base = *t.base();
    let (m, n1) = (t.m(), t.poles().len());
    let poles = t.poles().to_vec();
    let integrand = |s: C64| -> Result<CVector> {
        for (i, b) in poles.iter().enumerate() {
            let hit = if b.norm() == 0.0 { s.norm() == 0.0 } else { (s - b).norm() <= 1e-10 * b.norm() };
            if hit {
                return Err(Error::Pole(format!("grid point {s} hits pole b_{i}")));
            }
        }
        let k = kernel_eval(kernel, &base, x, s)?;
        let ys = y(s)?;
        if ys.len() != m {
            return Err(Error::Dimension("solution has the wrong size".into()));
        }
        let mut out = CVector::zeros(m * n1);
        for (i, b) in poles.iter().enumerate() {
            out.rows_mut(i * m, m).copy_from(&ys.map(|v| linalg::cdiv(v * k, s - b)));
        }
        Ok(out)
    };
    let res = jackson_integral(integrand, anchor.xi(x), &base, range)?;
    Ok(CVector::from_iterator(res.len(), res.iter().map(|r| r.value)))
}

/// Residual of the non-homogeneous relation satisfied by the truncated sums
/// `Ỹ^{[K,L]}`, including the boundary terms (and, for `ξ = Ax`, the extra
/// terms coming from the moving grid).
pub fn truncated_identity_residual<F>(
    t: &SystemTuple,
    y: F,
    kernel: &KernelSpec,
    x: C64,
    anchor: Anchor,
    k: i64,
    l: i64,
) -> Result<f64>
where
    F: Fn(C64) -> Result<CVector>,
{
    let base = *t.base();
    let q = base.q();
    let (m, n1) = (t.m(), t.poles().len());
    let range = JacksonRange::fixed(k, l);
    let yt_x = convolve_solution(t, &y, kernel, x, anchor, range)?;
    let yt_qx = convolve_solution(t, &y, kernel, q * x, anchor, range)?;
    let ql = base.pow(-kernel.lambda);
    let xi = anchor.xi(x);

    let conv = crate::system::q_convolution(t, kernel.lambda);
    let mut rhs = conv.coefficient(x)? * &yt_x;

    let lower = y(base.powi(k) * xi)? * kernel_eval(kernel, &base, x, base.powi(k - 1) * xi)?;
    let upper = y(base.powi(l + 1) * xi)? * kernel_eval(kernel, &base, x, base.powi(l) * xi)?;
    let boundary = (lower - upper) * ((one() - q) * ql);
    for (i, b) in t.poles().iter().enumerate() {
        let mut blk = rhs.rows_mut(i * m, m);
        blk -= &boundary / (x - b);
    }
    if let Anchor::Proportional(a) = anchor {
        let edge = |s: C64| -> Result<CVector> {
            let kq = kernel_eval(kernel, &base, q * x, s)?;
            let ys = y(s)?;
            let mut out = CVector::zeros(m * n1);
            for (i, b) in t.poles().iter().enumerate() {
                out.rows_mut(i * m, m).copy_from(&ys.map(|v| linalg::cdiv(v * kq * s, s - b)));
            }
            Ok(out)
        };
        let extra = (edge(a * base.powi(k) * x)? - edge(a * base.powi(l + 1) * x)?) * ((one() - q) / x);
        rhs += extra;
    }
    let lhs = (&yt_qx - &yt_x) / (-x);
    Ok((lhs - rhs).norm() / (1.0 + yt_x.norm()))
}

/// `‖K(x, q^{K−1}ξ)Y(q^Kξ)‖` and `‖K(x, q^Lξ)Y(q^{L+1}ξ)‖`.
pub fn boundary_terms<F>(y: F, kernel: &KernelSpec, base: &QBase, x: C64, xi: C64, k: i64, l: i64) -> Result<(f64, f64)>
where
    F: Fn(C64) -> Result<CVector>,
{
    let lo = y(base.powi(k) * xi)? * kernel_eval(kernel, base, x, base.powi(k - 1) * xi)?;
    let hi = y(base.powi(l + 1) * xi)? * kernel_eval(kernel, base, x, base.powi(l) * xi)?;
    Ok((lo.norm(), hi.norm()))
}

/// Parameters of the q-hypergeometric construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QhgParams {
    pub base: QBase,
    pub lambda: C64,
    pub mu: C64,
    pub alpha: C64,
    pub beta: C64,
}

impl QhgParams {
    pub fn seed(&self) -> SeedSolution {
        SeedSolution { mu: self.mu, alphas: vec![self.alpha], betas: vec![self.beta] }
    }

    /// `μ̃` with `q^{μ̃}α/β = q^μ`, principal branch of the logarithm.
    pub fn mu_tilde(&self) -> C64 {
        self.mu + self.base.log(self.beta / self.alpha)
    }

    /// `x^{μ̃}(q/(βx);q)_∞/(q/(αx);q)_∞`, the second seed of the same equation.
    pub fn alt_seed(&self, x: C64) -> Result<C64> {
        let q = self.base.q();
        Ok(cpow(x, self.mu_tilde()) * qpoch_ratio(&[q / (self.beta * x)], &[q / (self.alpha * x)], &self.base)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QhgClosedForm {
    /// Grid anchored at `ξ = 1/α`, kernel K⁽¹⁾.
    Y0Al,
    /// `ξ = q^{−λ}x`, kernel K⁽¹⁾.
    Y0La,
    /// `ξ = 1/β`, kernel K⁽²⁾ with the second seed.
    Y0BeFirst,
    /// `ξ = x`, kernel K⁽²⁾ with the second seed.
    Y0BeSecond,
}

impl QhgClosedForm {
    pub const ALL: [QhgClosedForm; 4] =
        [QhgClosedForm::Y0Al, QhgClosedForm::Y0La, QhgClosedForm::Y0BeFirst, QhgClosedForm::Y0BeSecond];

    pub fn name(&self) -> &'static str {
        match self {
            QhgClosedForm::Y0Al => "y0al",
            QhgClosedForm::Y0La => "y0la",
            QhgClosedForm::Y0BeFirst => "y0be_first",
            QhgClosedForm::Y0BeSecond => "y0be_second",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        QhgClosedForm::ALL
            .iter()
            .copied()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::UnknownName(s.to_string()))
    }

    /// Whether the convergence condition for this form holds.
    pub fn condition_holds(&self, p: &QhgParams) -> bool {
        match self {
            QhgClosedForm::Y0Al | QhgClosedForm::Y0La => p.mu.re > 0.0,
            _ => (p.base.pow(p.lambda - p.mu) * p.alpha / p.beta).norm() < 1.0,
        }
    }
}

fn pochs(base: &QBase, nums: &[C64], dens: &[C64]) -> Result<C64> {
    let mut den = one();
    for d in dens {
        let v = qpoch_inf(*d, base);
        if v.norm() < 1e-14 {
            return Err(Error::Pole(format!("({d};q)_∞ vanishes")));
        }
        den *= v;
    }
    Ok(nums.iter().map(|a| qpoch_inf(*a, base)).product::<C64>() / den)
}

/// The ₂φ₁ closed forms of `ỹ₀`.
pub fn closed_form_qhg(variant: QhgClosedForm, p: &QhgParams, x: C64) -> Result<C64> {
    let b = &p.base;
    let q = b.q();
    let (lam, mu, al, be) = (p.lambda, p.mu, p.alpha, p.beta);
    let pre = one() - q;
    match variant {
        QhgClosedForm::Y0Al => {
            let c = b.pow(mu + 1.0) * be / al;
            let f = pochs(b, &[q, c], &[q * be / al, b.pow(mu)])?;
            let s = phi21(b.pow(lam), b.pow(mu), c, b, q * q / (al * x), SERIES_TOL)?;
            Ok(pre * b.pow(mu) * cpow(al, -mu) * cpow(x, -lam) * f * s.value)
        }
        QhgClosedForm::Y0La => {
            let c = b.pow(mu - lam + 1.0);
            let f = pochs(b, &[q, c], &[b.pow(one() - lam), b.pow(mu)])?;
            let s = phi21(al / be, b.pow(mu), c, b, b.pow(-lam) * be * x, SERIES_TOL)?;
            Ok(pre * b.pow(-lam * mu) * cpow(x, mu - lam) * f * s.value)
        }
        QhgClosedForm::Y0BeFirst => {
            let r = b.pow(lam - mu) * al / be;
            let f = pochs(b, &[q, b.pow(lam - mu + 1.0)], &[q * be / al, r])?;
            let s = phi21(b.pow(lam), r, b.pow(lam - mu + 1.0), b, b.pow(-lam) * be * x, SERIES_TOL)?;
            Ok(pre * cpow(be, lam - p.mu_tilde()) * f * s.value)
        }
        QhgClosedForm::Y0BeSecond => {
            let r = b.pow(lam - mu) * al / be;
            let c = b.pow(one() - mu) * al / be;
            let f = pochs(b, &[q, c], &[b.pow(one() - lam), r])?;
            let s = phi21(al / be, r, c, b, q * q / (al * x), SERIES_TOL)?;
            Ok(pre * r * cpow(x, p.mu_tilde() - lam) * f * s.value)
        }
    }
}

/// The first printed line of each closed form, a ₂φ₁ with a different argument.
pub fn closed_form_qhg_alternate(variant: QhgClosedForm, p: &QhgParams, x: C64) -> Result<C64> {
    let b = &p.base;
    let q = b.q();
    let (lam, mu, al, be) = (p.lambda, p.mu, p.alpha, p.beta);
    let pre = one() - q;
    match variant {
        QhgClosedForm::Y0Al => {
            let u = q * q / (al * x);
            let f = pochs(b, &[b.pow(lam) * u, q], &[u, q * be / al])?;
            let s = phi21(u, q * be / al, b.pow(lam) * u, b, b.pow(mu), SERIES_TOL)?;
            Ok(pre * b.pow(mu) * cpow(al, -mu) * f * cpow(x, -lam) * s.value)
        }
        QhgClosedForm::Y0La => {
            let f = pochs(b, &[b.pow(-lam) * al * x, q], &[b.pow(-lam) * be * x, b.pow(one() - lam)])?;
            let s = phi21(b.pow(-lam) * be * x, b.pow(one() - lam), b.pow(-lam) * al * x, b, b.pow(mu), SERIES_TOL)?;
            Ok(pre * b.pow(-lam * mu) * cpow(x, mu - lam) * f * s.value)
        }
        QhgClosedForm::Y0BeFirst => {
            let f = pochs(b, &[be * x, q], &[b.pow(-lam) * be * x, q * be / al])?;
            let s = phi21(b.pow(-lam) * be * x, q * be / al, be * x, b, b.pow(lam - mu) * al / be, SERIES_TOL)?;
            Ok(pre * cpow(be, lam - p.mu_tilde()) * f * s.value)
        }
        QhgClosedForm::Y0BeSecond => {
            let f = pochs(b, &[q * q / (be * x), q], &[q * q / (al * x), b.pow(one() - lam)])?;
            let s = phi21(b.pow(one() - lam), q * q / (al * x), q * q / (be * x), b, b.pow(lam - mu) * al / be, SERIES_TOL)?;
            Ok(pre * b.pow(lam - mu) * al / be * cpow(x, p.mu_tilde() - lam) * f * s.value)
        }
    }
}

/// `ỹ₀(x)` as the raw Jackson sum over the grid fixed by `variant`.
pub fn qhg_integral(variant: QhgClosedForm, p: &QhgParams, x: C64, tol: f64) -> Result<C64> {
    let b = p.base;
    let seed = p.seed();
    let t = seed_tuple(&seed, &b)?;
    let (kernel, anchor, range) = match variant {
        QhgClosedForm::Y0Al => (KernelSpec::k1(p.lambda), Anchor::Fixed(one() / p.alpha), JacksonRange::from(1, tol)),
        QhgClosedForm::Y0La => (KernelSpec::k1(p.lambda), Anchor::Proportional(b.pow(-p.lambda)), JacksonRange::from(0, tol)),
        QhgClosedForm::Y0BeFirst => (
            KernelSpec::k2(p.lambda),
            Anchor::Fixed(one() / p.beta),
            JacksonRange { lower: crate::qseries::Bound::Adaptive, upper: crate::qseries::Bound::Fixed(0), tol },
        ),
        QhgClosedForm::Y0BeSecond => (
            KernelSpec::k2(p.lambda),
            Anchor::Proportional(one()),
            JacksonRange { lower: crate::qseries::Bound::Adaptive, upper: crate::qseries::Bound::Fixed(-1), tol },
        ),
    };
    let v = match variant {
        QhgClosedForm::Y0Al | QhgClosedForm::Y0La => {
            convolve_solution(&t, |s| Ok(CVector::from_element(1, seed.eval(&b, s)?)), &kernel, x, anchor, range)?
        }
        _ => convolve_solution(&t, |s| Ok(CVector::from_element(1, p.alt_seed(s)?)), &kernel, x, anchor, range)?,
    };
    Ok(v[0])
}

/// Parameters of the order-3 construction (addition `x^{μ′}` then `mc_{λ′}`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ghg3Params {
    pub base: QBase,
    pub lambda: C64,
    pub mu: C64,
    pub lambda_p: C64,
    pub mu_p: C64,
    pub alpha: C64,
    pub beta: C64,
}

impl Ghg3Params {
    /// The conditions under which the ₃φ₂ form is a solution.
    pub fn conditions_hold(&self, x: C64) -> bool {
        let b = &self.base;
        let (l, m, lp, mp) = (self.lambda.re, self.mu.re, self.lambda_p.re, self.mu_p.re);
        m > 0.0
            && mp > 0.0
            && mp + m - l > 0.0
            && lp + l - mp > 0.0
            && (b.pow(self.lambda - self.mu) * self.alpha / self.beta).norm() < 1.0
            && (b.pow(self.lambda_p + self.lambda - self.mu_p - self.mu) * self.alpha / self.beta).norm() < 1.0
            && (b.pow(-self.lambda_p - self.lambda) * self.beta * x).norm() < 1.0
    }
}

/// `g₁` at `ξ = q^{−λ′−λ}x`, `ξ′ = q^{−λ′}x` as a ₃φ₂.
pub fn closed_form_3phi2(p: &Ghg3Params, x: C64) -> Result<C64> {
    let b = &p.base;
    let q = b.q();
    let (l, m, lp, mp) = (p.lambda, p.mu, p.lambda_p, p.mu_p);
    let pre = (one() - q) * (one() - q) * b.pow(-lp * m - l * m - lp * mp + lp * l);
    let f = pochs(
        b,
        &[q, q, b.pow(m - l + 1.0), b.pow(mp + m - l - lp + 1.0)],
        &[b.pow(one() - lp), b.pow(one() - l), b.pow(m), b.pow(mp + m - l)],
    )?;
    let s = phi32(
        p.alpha / p.beta,
        b.pow(m),
        b.pow(mp + m - l),
        b.pow(m - l + 1.0),
        b.pow(mp + m - l - lp + 1.0),
        b,
        b.pow(-lp - l) * p.beta * x,
        SERIES_TOL,
    )?;
    Ok(pre * f * cpow(x, mp + m - lp - l) * s.value)
}

/// `g₁(x) = x^{−λ′}∫₀^{ξ′∞} (q^{λ′+1}s/x;q)_∞/(qs/x;q)_∞ s^{μ′−λ−1}
/// ∫₀^{ξ∞} t^{μ−1}(q^{λ+1}t/s, αt;q)_∞/(qt/s, βt;q)_∞ d_qt d_qs`
/// at `ξ = q^{−λ′−λ}x`, `ξ′ = q^{−λ′}x`, summed directly. The summand vanishes
/// for `n < 0` and `m < n`, which fixes the lower ends.
pub fn ghg3_double_integral(p: &Ghg3Params, x: C64, tol: f64) -> Result<C64> {
    let b = p.base;
    let q = b.q();
    let xi_p = b.pow(-p.lambda_p) * x;
    let xi = b.pow(-p.lambda_p - p.lambda) * x;
    let outer = |s: C64| -> Result<CVector> {
        let n = (b.log(s / xi_p).re).round() as i64;
        let inner = jackson_integral(
            |t: C64| {
                let r = qpoch_ratio(&[b.pow(p.lambda + 1.0) * t / s, p.alpha * t], &[q * t / s, p.beta * t], &b)?;
                Ok(CVector::from_element(1, cpow(t, p.mu - 1.0) * r))
            },
            xi,
            &b,
            JacksonRange::from(n, tol),
        )?;
        let r = qpoch_ratio(&[b.pow(p.lambda_p + 1.0) * s / x], &[q * s / x], &b)?;
        Ok(CVector::from_element(1, r * cpow(s, p.mu_p - p.lambda - 1.0) * inner[0].value))
    };
    let v = jackson_integral(outer, xi_p, &b, JacksonRange::from(0, tol))?;
    Ok(cpow(x, -p.lambda_p) * v[0].value)
}

pub fn default_tolerance() -> TolerancePolicy {
    TolerancePolicy::default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, re};
    use crate::system::{propagate, residual};

    #[test]
    fn seed_tuple_small_cases() {
        let b = QBase::real(0.4).unwrap();
        let s = SeedSolution::new(re(0.7), vec![re(1.0)], vec![re(1.5)]).unwrap();
        let t = seed_tuple(&s, &b).unwrap();
        assert!((t.matrix(0)[(0, 0)] - (re(1.0) - b.powf(0.7))).norm() < 1e-15);
        assert!((t.matrix(1)[(0, 0)] - b.powf(0.7) * (re(1.0) - re(1.5))).norm() < 1e-15);
        let s0 = SeedSolution::new(re(0.0), vec![re(1.0)], vec![re(1.5)]).unwrap();
        assert_eq!(seed_tuple(&s0, &b).unwrap().matrix(0)[(0, 0)], re(0.0));
        let dup = SeedSolution::new(re(0.3), vec![re(1.0), re(1.0)], vec![re(1.5), re(2.0)]).unwrap();
        assert!(matches!(seed_tuple(&dup, &b), Err(Error::Degenerate(_))));
    }

    #[test]
    fn seed_solves_its_tuple() {
        let b = QBase::real(0.45).unwrap();
        let s = SeedSolution::new(c(0.6, 0.1), vec![c(1.2, 0.3), c(0.7, -0.2), re(1.9)], vec![re(0.5), c(1.1, 0.4), re(0.8)]).unwrap();
        let t = seed_tuple(&s, &b).unwrap();
        let x0 = c(0.8, 0.35);
        let y0 = CVector::from_element(1, s.eval(&b, x0).unwrap());
        let g = propagate(&t, x0, &y0, 15, 1).unwrap();
        for n in 0..=15 {
            let exact = s.eval(&b, g.point(n)).unwrap();
            assert!((g.get(n).unwrap()[0] - exact).norm() <= 1e-11 * exact.norm().max(1e-300));
        }
        for n in 0..15 {
            let x = g.point(n);
            let a = CVector::from_element(1, s.eval(&b, x).unwrap());
            let bq = CVector::from_element(1, s.eval(&b, b.q() * x).unwrap());
            assert!(t.residual_at(x, &a, &bq).unwrap() < 1e-9);
            assert!(residual(&t, &g, n).unwrap() < 1e-11);
        }
    }

    #[test]
    fn certificate_examples() {
        let b = QBase::real(0.4).unwrap();
        let p = QhgParams { base: b, lambda: re(0.3), mu: re(0.7), alpha: re(1.0), beta: re(3.0) };
        let t = seed_tuple(&p.seed(), &b).unwrap();
        let r = convergence_certificate(&t, p.lambda);
        assert!((r.eig_i_minus_b0[0] - b.powf(0.7)).norm() < 1e-14);
        assert!((r.eig_i_minus_sum[0] - b.powf(0.7) * 3.0).norm() < 1e-14);
        assert!(r.passes);
        let bad = QhgParams { beta: re(1.0), ..p };
        let t = seed_tuple(&bad.seed(), &b).unwrap();
        assert!(!convergence_certificate(&t, bad.lambda).passes);
        let id = SystemTuple::new(b, vec![re(0.0)], vec![CMatrix::identity(2, 2)]).unwrap();
        let r = convergence_certificate(&id, re(0.3));
        assert!(r.eig_i_minus_b0.iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn closed_form_lines_agree() {
        let b = QBase::real(0.4).unwrap();
        let p = QhgParams { base: b, lambda: re(0.3), mu: re(0.7), alpha: re(0.5), beta: re(1.0) };
        for v in QhgClosedForm::ALL {
            for x in [re(0.6), c(0.6, 0.15)] {
                let a = closed_form_qhg(v, &p, x).unwrap();
                let b2 = closed_form_qhg_alternate(v, &p, x).unwrap();
                assert!((a - b2).norm() < 1e-11 * a.norm(), "{}: {a} vs {b2}", v.name());
            }
        }
    }

    #[test]
    fn closed_forms_equal_their_sums() {
        let b = QBase::real(0.4).unwrap();
        let p = QhgParams { base: b, lambda: re(0.3), mu: re(0.7), alpha: re(0.5), beta: re(1.0) };
        for v in QhgClosedForm::ALL {
            let x = re(0.63);
            let a = closed_form_qhg(v, &p, x).unwrap();
            let s = qhg_integral(v, &p, x, 1e-15).unwrap();
            assert!((a - s).norm() < 1e-10 * a.norm(), "{}: {a} vs {s}", v.name());
        }
    }

    #[test]
    fn y0la_at_lambda_zero() {
        // λ = 0: (1−q)x^μ (q^{μ+1};q)_∞/(q^μ;q)_∞ ₂φ₁(α/β, q^μ; q^{μ+1}; q, βx).
        let b = QBase::real(0.5).unwrap();
        let p = QhgParams { base: b, lambda: re(0.0), mu: re(0.6), alpha: re(1.3), beta: re(0.7) };
        let x = re(0.4);
        let v = closed_form_qhg(QhgClosedForm::Y0La, &p, x).unwrap();
        let hand = (re(1.0) - b.q()) * cpow(x, p.mu) * qpoch_inf(b.powf(1.6), &b) / qpoch_inf(b.powf(0.6), &b)
            * phi21(p.alpha / p.beta, b.powf(0.6), b.powf(1.6), &b, p.beta * x, 1e-16).unwrap().value;
        assert!((v - hand).norm() < 1e-13 * v.norm());
        let sum = qhg_integral(QhgClosedForm::Y0La, &p, x, 1e-15).unwrap();
        assert!((v - sum).norm() < 1e-12 * v.norm());
    }
}
