//! q-Pochhammer symbols, ₂φ₁/₃φ₂, the kernels K⁽¹⁾/K⁽²⁾ and Jackson integrals.

use crate::error::{Error, Result};
use crate::linalg::{CVector, C64};
use num_complex::Complex;
use twofloat::TwoFloat;

/// Products stop once `|qᵏa|` drops below this.
pub const PRODUCT_CUTOFF: f64 = 1e-17;
/// Adaptive sums give up after this many consecutive non-decreasing terms.
pub const DIVERGENCE_GUARD: usize = 500;
const MAX_TERMS: usize = 200_000;
const POLE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QBase {
    q: C64,
    log_q: C64,
}

impl QBase {
    pub fn new(q: C64) -> Result<Self> {
        let r = q.norm();
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::Argument(format!("need 0 < |q| < 1, got |q| = {r}")));
        }
        Ok(QBase { q, log_q: q.ln() })
    }

    pub fn real(q: f64) -> Result<Self> {
        QBase::new(C64::new(q, 0.0))
    }

    pub fn q(&self) -> C64 {
        self.q
    }

    /// `q^a` on the principal branch of `log q`.
    pub fn pow(&self, a: C64) -> C64 {
        (self.log_q * a).exp()
    }

    pub fn powf(&self, a: f64) -> C64 {
        self.pow(C64::new(a, 0.0))
    }

    pub fn powi(&self, n: i64) -> C64 {
        self.q.powi(n as i32)
    }

    /// Inverse of `pow`: `log(z)/log(q)`.
    pub fn log(&self, z: C64) -> C64 {
        z.ln() / self.log_q
    }
}

/// `x^a` on the principal branch.
pub fn cpow(x: C64, a: C64) -> C64 {
    if x == C64::new(0.0, 0.0) {
        return if a.re > 0.0 { x } else { C64::new(f64::INFINITY, 0.0) };
    }
    (x.ln() * a).exp()
}

pub fn qpoch_inf_tol(a: C64, base: &QBase, tol: f64) -> C64 {
    let mut prod = C64::new(1.0, 0.0);
    let mut t = a;
    let q = base.q();
    let mut k = 0;
    while t.norm() >= tol && k < MAX_TERMS {
        prod *= C64::new(1.0, 0.0) - t;
        t *= q;
        k += 1;
    }
    prod
}

/// `(a;q)_∞`.
pub fn qpoch_inf(a: C64, base: &QBase) -> C64 {
    qpoch_inf_tol(a, base, PRODUCT_CUTOFF)
}

/// `(a;q)_n` for `n ≥ 0`.
pub fn qpoch_fin(a: C64, base: &QBase, n: i64) -> Result<C64> {
    if n < 0 {
        return Err(Error::Argument(format!("qpoch_fin needs n ≥ 0, got {n}")));
    }
    let mut prod = C64::new(1.0, 0.0);
    let mut t = a;
    for _ in 0..n {
        prod *= C64::new(1.0, 0.0) - t;
        t *= base.q();
    }
    Ok(prod)
}

/// `Π_{x ∈ nums}(x;q)_∞ / Π_{y ∈ dens}(y;q)_∞`, multiplied factor by factor so
/// that large arguments do not overflow. A denominator factor within 1e−12 of
/// zero is reported as a pole.
pub fn qpoch_ratio(nums: &[C64], dens: &[C64], base: &QBase) -> Result<C64> {
    let q = base.q();
    let one = C64::new(1.0, 0.0);
    let mut a: Vec<C64> = nums.to_vec();
    let mut b: Vec<C64> = dens.to_vec();
    let mut prod = one;
    let mut k = 0;
    loop {
        let big = a.iter().chain(b.iter()).map(|z| z.norm()).fold(0.0, f64::max);
        if big < PRODUCT_CUTOFF || k >= MAX_TERMS {
            break;
        }
        let mut num = one;
        for z in &a {
            num *= one - z;
        }
        let mut den = one;
        for (i, z) in b.iter().enumerate() {
            let f = one - z;
            if f.norm() < POLE_EPS {
                return Err(Error::Pole(format!("factor 1 − q^{k}·{} vanishes", dens[i])));
            }
            den *= f;
        }
        prod *= num / den;
        for z in a.iter_mut().chain(b.iter_mut()) {
            *z *= q;
        }
        k += 1;
    }
    Ok(prod)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesResult {
    pub value: C64,
    pub terms_used: usize,
    pub est_truncation_error: f64,
}

/// `Σ_n Π(aᵢ;q)_n / (Π(bⱼ;q)_n (q;q)_n) zⁿ` (balanced ᵣφᵣ₋₁ with r = nums.len()).
fn hypergeometric(nums: &[C64], dens: &[C64], base: &QBase, z: C64, tol: f64) -> Result<SeriesResult> {
    let one = C64::new(1.0, 0.0);
    let q = base.q();
    let mut qn = one;
    let mut term = one;
    let mut sum = one;
    let mut prev_abs = 1.0;
    let mut abs_sum = 1.0;
    let mut non_decreasing = 0;
    let mut n = 0usize;
    // Heavy cancellation (large terms, small sum) costs digits in f64; redo it in double-double.
    let finish = |sum: C64, n: usize, abs_sum: f64| {
        if abs_sum > 16.0 * sum.norm() && 8.0 * f64::EPSILON * abs_sum > tol * sum.norm() {
            resum_double_double(nums, dens, q, z, n)
        } else {
            sum
        }
    };
    loop {
        // term_{n+1} = term_n · Π(1 − qⁿaᵢ) / (Π(1 − qⁿbⱼ)(1 − q^{n+1})) · z
        let mut num = one;
        let mut terminated = false;
        for a in nums {
            let f = one - qn * a;
            if f.norm() < 1e-14 {
                terminated = true;
            }
            num *= f;
        }
        if terminated {
            let value = finish(sum, n, abs_sum);
            return Ok(SeriesResult { value, terms_used: n + 1, est_truncation_error: 0.0 });
        }
        let mut den = one - qn * q;
        for b in dens {
            let f = one - qn * b;
            if f.norm() < POLE_EPS {
                return Err(Error::Pole(format!("denominator parameter {b} sits on q^(-{n})")));
            }
            den *= f;
        }
        let ratio = num / den * z;
        term *= ratio;
        sum += term;
        n += 1;
        let t = term.norm();
        abs_sum += t;
        let r = ratio.norm();
        if r < 1.0 {
            let tail = t * r / (1.0 - r);
            if tail <= tol * sum.norm() || t == 0.0 {
                let value = finish(sum, n, abs_sum);
                return Ok(SeriesResult { value, terms_used: n + 1, est_truncation_error: tail });
            }
        }
        if t >= prev_abs {
            non_decreasing += 1;
            if non_decreasing >= DIVERGENCE_GUARD {
                return Err(Error::Divergence(format!("series terms stopped decreasing (|z| = {})", z.norm())));
            }
        } else {
            non_decreasing = 0;
        }
        prev_abs = t;
        qn *= q;
        if n >= MAX_TERMS {
            return Err(Error::Divergence("series needs too many terms".into()));
        }
    }
}

/// `a/b` in double-double. TwoFloat's own quotient of two TwoFloats is only
/// f64-accurate, so divide through a Newton-refined reciprocal of `|b|²`.
fn dd_div(a: Complex<TwoFloat>, b: Complex<TwoFloat>) -> Complex<TwoFloat> {
    let one = TwoFloat::from(1.0);
    let d = b.re * b.re + b.im * b.im;
    let x0 = one / d.hi();
    let inv = x0 + x0 * (one - d * x0);
    a * b.conj() * inv
}

/// Terms 0..=n of the same series, with recurrence and sum carried in double-double.
fn resum_double_double(nums: &[C64], dens: &[C64], q: C64, z: C64, n: usize) -> C64 {
    type Dd = Complex<TwoFloat>;
    let dd = |w: C64| Dd::new(TwoFloat::from(w.re), TwoFloat::from(w.im));
    let one = dd(C64::new(1.0, 0.0));
    let (q, z) = (dd(q), dd(z));
    let nums: Vec<Dd> = nums.iter().map(|&a| dd(a)).collect();
    let dens: Vec<Dd> = dens.iter().map(|&b| dd(b)).collect();
    let (mut qn, mut term, mut sum) = (one, one, one);
    for _ in 0..n {
        let mut num = one;
        for a in &nums {
            num *= one - qn * a;
        }
        let mut den = one - qn * q;
        for b in &dens {
            den *= one - qn * b;
        }
        term = dd_div(term * num, den) * z;
        sum += term;
        qn *= q;
    }
    C64::new(f64::from(sum.re), f64::from(sum.im))
}

pub fn phi21(a: C64, b: C64, c: C64, base: &QBase, z: C64, tol: f64) -> Result<SeriesResult> {
    hypergeometric(&[a, b], &[c], base, z, tol)
}

pub fn phi32(a1: C64, a2: C64, a3: C64, b1: C64, b2: C64, base: &QBase, z: C64, tol: f64) -> Result<SeriesResult> {
    hypergeometric(&[a1, a2, a3], &[b1, b2], base, z, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelVariant {
    K1,
    K2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub variant: KernelVariant,
    pub lambda: C64,
}

impl KernelSpec {
    pub fn k1(lambda: C64) -> Self {
        KernelSpec { variant: KernelVariant::K1, lambda }
    }

    pub fn k2(lambda: C64) -> Self {
        KernelSpec { variant: KernelVariant::K2, lambda }
    }
}

/// `K⁽¹⁾ = x^{−λ}(q^{λ+1}s/x;q)_∞/(qs/x;q)_∞`, `K⁽²⁾ = s^{−λ}(x/s;q)_∞/(q^{−λ}x/s;q)_∞`.
pub fn kernel_eval(spec: &KernelSpec, base: &QBase, x: C64, s: C64) -> Result<C64> {
    let zero = C64::new(0.0, 0.0);
    if x == zero || s == zero {
        return Err(Error::Argument("kernel needs x ≠ 0 and s ≠ 0".into()));
    }
    let lam = spec.lambda;
    let q = base.q();
    match spec.variant {
        KernelVariant::K1 => {
            let r = qpoch_ratio(&[base.pow(lam + 1.0) * s / x], &[q * s / x], base)?;
            Ok(cpow(x, -lam) * r)
        }
        KernelVariant::K2 => {
            let r = qpoch_ratio(&[x / s], &[base.pow(-lam) * x / s], base)?;
            Ok(cpow(s, -lam) * r)
        }
    }
}

/// The kernel `P_λ(x,s) = (q^{λ+1}s/x;q)_∞/(qs/x;q)_∞` of the Sakai–Yamaguchi convolution.
pub fn sy_kernel(lambda: C64, base: &QBase, x: C64, s: C64) -> Result<C64> {
    qpoch_ratio(&[base.pow(lambda + 1.0) * s / x], &[base.q() * s / x], base)
}

/// One end of a Jackson sum over `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Fixed(i64),
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacksonRange {
    pub lower: Bound,
    pub upper: Bound,
    /// Relative tolerance for adaptive ends.
    pub tol: f64,
}

impl JacksonRange {
    pub fn fixed(k: i64, l: i64) -> Self {
        JacksonRange { lower: Bound::Fixed(k), upper: Bound::Fixed(l), tol: 0.0 }
    }

    pub fn adaptive(tol: f64) -> Self {
        JacksonRange { lower: Bound::Adaptive, upper: Bound::Adaptive, tol }
    }

    pub fn from(k: i64, tol: f64) -> Self {
        JacksonRange { lower: Bound::Fixed(k), upper: Bound::Adaptive, tol }
    }
}

/// `(1−q) Σ_n qⁿξ f(qⁿξ)` over the requested range, one result per component.
pub fn jackson_integral<F>(mut f: F, xi: C64, base: &QBase, range: JacksonRange) -> Result<Vec<SeriesResult>>
where
    F: FnMut(C64) -> Result<CVector>,
{
    let q = base.q();
    let one = C64::new(1.0, 0.0);
    let mut term = |n: i64| -> Result<CVector> {
        let s = base.powi(n) * xi;
        Ok(f(s)? * ((one - q) * s))
    };

    // Sweeps start at a fixed end when there is one.
    let first = match (range.lower, range.upper) {
        (Bound::Fixed(k), _) => k,
        (Bound::Adaptive, Bound::Fixed(l)) => l,
        (Bound::Adaptive, Bound::Adaptive) => 0,
    };
    let t0 = term(first)?;
    let dim = t0.len();
    let mut sum = CVector::zeros(dim);
    let mut err = vec![0.0; dim];
    let mut used = 0usize;
    let add_tail = |err: &mut Vec<f64>, tail: Vec<f64>| {
        for (e, t) in err.iter_mut().zip(tail) {
            *e += t;
        }
    };

    match (range.lower, range.upper) {
        (Bound::Fixed(k), Bound::Fixed(l)) => {
            if l >= k {
                sum += &t0;
                used += 1;
                for n in k + 1..=l {
                    sum += term(n)?;
                    used += 1;
                }
            }
        }
        (Bound::Fixed(_), Bound::Adaptive) => {
            sum += &t0;
            used += 1;
            let (add, n_used, tail) = sweep(&mut term, first + 1, 1, &sum, range.tol)?;
            sum += add;
            used += n_used;
            add_tail(&mut err, tail);
        }
        (Bound::Adaptive, Bound::Fixed(_)) => {
            sum += &t0;
            used += 1;
            let (add, n_used, tail) = sweep(&mut term, first - 1, -1, &sum, range.tol)?;
            sum += add;
            used += n_used;
            add_tail(&mut err, tail);
        }
        (Bound::Adaptive, Bound::Adaptive) => {
            sum += &t0;
            used += 1;
            let (add, n_used, tail) = sweep(&mut term, first + 1, 1, &sum, range.tol)?;
            sum += add;
            used += n_used;
            add_tail(&mut err, tail);
            let (add, n_used, tail) = sweep(&mut term, first - 1, -1, &sum, range.tol)?;
            sum += add;
            used += n_used;
            add_tail(&mut err, tail);
        }
    }
    Ok((0..dim)
        .map(|i| SeriesResult { value: sum[i], terms_used: used, est_truncation_error: err[i] })
        .collect())
}

/// Sum terms starting at `start` in direction `step` until the geometric tail
/// estimate falls below `tol` relative to the running total.
fn sweep<T>(term: &mut T, start: i64, step: i64, base_sum: &CVector, tol: f64) -> Result<(CVector, usize, Vec<f64>)>
where
    T: FnMut(i64) -> Result<CVector>,
{
    let dim = base_sum.len();
    let mut acc = CVector::zeros(dim);
    let mut n = start;
    let mut prev = f64::INFINITY;
    let mut ratios: Vec<f64> = Vec::new();
    let mut non_decreasing = 0usize;
    let mut used = 0usize;
    loop {
        let t = term(n)?;
        let tn = t.norm();
        if !tn.is_finite() {
            return Err(Error::Divergence(format!("Jackson sum term at n = {n} is not finite")));
        }
        acc += &t;
        used += 1;
        if prev.is_finite() && prev > 0.0 {
            ratios.push(tn / prev);
        }
        if tn >= prev {
            non_decreasing += 1;
            if non_decreasing >= DIVERGENCE_GUARD {
                return Err(Error::Divergence(format!("Jackson sum terms stopped decreasing near n = {n}")));
            }
        } else {
            non_decreasing = 0;
        }
        let total = (base_sum + &acc).norm();
        if tn == 0.0 && used > 8 {
            return Ok((acc, used, vec![0.0; dim]));
        }
        if ratios.len() >= 4 {
            let r = ratios[ratios.len() - 4..].iter().cloned().fold(0.0, f64::max);
            if r < 1.0 {
                let tail = tn * r / (1.0 - r);
                if tail <= tol * total {
                    return Ok((acc, used, vec![tail; dim]));
                }
            }
        }
        if used >= MAX_TERMS {
            return Err(Error::Divergence("Jackson sum needs too many terms".into()));
        }
        prev = tn;
        n += step;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn products() {
        let b = QBase::real(0.5).unwrap();
        assert_eq!(qpoch_inf(r(0.0), &b), r(1.0));
        let tiny = QBase::real(1e-20).unwrap();
        assert!((qpoch_inf(r(0.3), &tiny) - r(0.7)).norm() < 1e-15);
        let mut brute = r(1.0);
        for k in 0..64 {
            brute *= r(1.0 - 0.5 * 0.5f64.powi(k));
        }
        assert!((qpoch_inf(r(0.5), &b) - brute).norm() < 1e-15);
        assert_eq!(qpoch_fin(r(0.3), &b, 0).unwrap(), r(1.0));
        assert_eq!(qpoch_fin(r(1.0), &b, 4).unwrap(), r(0.0));
        let hand = 0.5 * 0.75 * 0.875;
        assert!((qpoch_fin(r(0.5), &b, 3).unwrap() - r(hand)).norm() < 1e-15);
        assert!(qpoch_fin(r(0.5), &b, -1).is_err());
    }

    #[test]
    fn phi21_special_values() {
        let b = QBase::real(0.3).unwrap();
        let v = phi21(r(0.2), r(0.4), r(0.7), &b, r(0.0), 1e-15).unwrap();
        assert_eq!(v.value, r(1.0));
        // Terminating: a = q^{-2} gives three terms.
        let (a, bb, cc, z) = (b.powf(-2.0), r(0.4), r(0.7), r(0.6));
        let mut expected = r(0.0);
        for n in 0..3 {
            let t = qpoch_fin(a, &b, n).unwrap() * qpoch_fin(bb, &b, n).unwrap()
                / (qpoch_fin(cc, &b, n).unwrap() * qpoch_fin(b.q(), &b, n).unwrap())
                * z.powi(n as i32);
            expected += t;
        }
        let got = phi21(a, bb, cc, &b, z, 1e-15).unwrap();
        assert!((got.value - expected).norm() < 1e-13);
        assert!(phi21(r(0.2), r(0.4), b.powf(-3.0), &b, r(0.5), 1e-15).is_err());
    }

    #[test]
    fn phi32_reduces() {
        let b = QBase::real(0.45).unwrap();
        let z = C64::new(0.3, 0.2);
        let lhs = phi32(r(0.2), r(-0.5), C64::new(0.3, 0.1), r(0.6), C64::new(0.3, 0.1), &b, z, 1e-15).unwrap();
        let rhs = phi21(r(0.2), r(-0.5), r(0.6), &b, z, 1e-15).unwrap();
        assert!((lhs.value - rhs.value).norm() < 1e-13);
        // a1 = q^{-1}: two terms.
        let (a1, a2, a3, b1, b2) = (b.powf(-1.0), r(0.3), r(0.5), r(0.7), r(0.2));
        let two = r(1.0) + (r(1.0) - a1) * (r(1.0) - a2) * (r(1.0) - a3) / ((r(1.0) - b1) * (r(1.0) - b2) * (r(1.0) - b.q())) * z;
        let got = phi32(a1, a2, a3, b1, b2, &b, z, 1e-15).unwrap();
        assert!((got.value - two).norm() < 1e-13);
    }

    #[test]
    fn divergent_series_is_reported() {
        let b = QBase::real(0.5).unwrap();
        assert!(matches!(phi21(r(0.2), r(0.3), r(0.4), &b, r(1.5), 1e-15), Err(Error::Divergence(_))));
    }

    #[test]
    fn kernels_at_lambda_zero_are_one() {
        let b = QBase::real(0.6).unwrap();
        for spec in [KernelSpec::k1(r(0.0)), KernelSpec::k2(r(0.0))] {
            let v = kernel_eval(&spec, &b, C64::new(0.7, 0.2), C64::new(1.3, -0.4)).unwrap();
            assert!((v - r(1.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn jackson_trivial_cases() {
        let b = QBase::real(0.5).unwrap();
        let xi = C64::new(0.8, 0.1);
        let zero = jackson_integral(|_| Ok(CVector::from_element(2, r(0.0))), xi, &b, JacksonRange::adaptive(1e-14)).unwrap();
        assert!(zero.iter().all(|s| s.value == r(0.0)));
        let v = C64::new(2.0, -1.0);
        let one_point = jackson_integral(
            |s| Ok(CVector::from_element(1, if (s - xi).norm() < 1e-15 { v } else { r(0.0) })),
            xi,
            &b,
            JacksonRange::adaptive(1e-14),
        )
        .unwrap();
        assert!((one_point[0].value - (r(1.0) - b.q()) * xi * v).norm() < 1e-15);
    }

    #[test]
    fn jackson_of_power_function() {
        // ∫₀^ξ s^a d_qs over n ≥ 0 = (1−q)ξ^{a+1}/(1−q^{a+1}).
        let b = QBase::real(0.5).unwrap();
        let a = 0.7;
        let xi = r(1.0);
        let got = jackson_integral(|s| Ok(CVector::from_element(1, cpow(s, r(a)))), xi, &b, JacksonRange::from(0, 1e-15)).unwrap();
        let expected = (1.0 - 0.5) / (1.0 - 0.5f64.powf(a + 1.0));
        assert!((got[0].value - r(expected)).norm() < 1e-14);
    }
}
