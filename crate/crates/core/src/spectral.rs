//! Spectral types `(S₀; S_∞; S_div)`.

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, TolerancePolicy, C64};
use crate::system::SystemTuple;

#[derive(Debug, Clone)]
pub struct SpectralType {
    pub s0: Vec<usize>,
    pub s_inf: Vec<usize>,
    pub s_div: Vec<usize>,
    /// Degree of `det C(x)` read off an interpolant.
    pub det_degree: usize,
    /// Every multiple root of `det C` has rank drop equal to its multiplicity.
    pub rank_drop_consistent: bool,
}

impl PartialEq for SpectralType {
    fn eq(&self, other: &Self) -> bool {
        self.s0 == other.s0 && self.s_inf == other.s_inf && self.s_div == other.s_div
    }
}

impl SpectralType {
    /// `"s0;s_inf;s_div"`, digits concatenated. If any part reaches 10 the
    /// parts of every partition are comma separated instead.
    pub fn render(&self) -> String {
        let parts = [&self.s0, &self.s_inf, &self.s_div];
        let wide = parts.iter().any(|p| p.iter().any(|&k| k >= 10));
        let sep = if wide { "," } else { "" };
        parts
            .iter()
            .map(|p| p.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(sep))
            .collect::<Vec<_>>()
            .join(";")
    }
}

impl std::fmt::Display for SpectralType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.render())
    }
}

fn poly_mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Coefficients `C_k` (ascending) of `C(x) = B(x)·Π_{i≥1}(x − bᵢ)`.
pub fn divisor_polynomial(t: &SystemTuple) -> Vec<CMatrix> {
    let one = C64::new(1.0, 0.0);
    let poles = &t.poles()[1..];
    let n = poles.len();
    let m = t.m();
    let mut out = vec![CMatrix::zeros(m, m); n + 1];
    let full = poles.iter().fold(vec![one], |acc, &b| poly_mul(&acc, &[-b, one]));
    let b_zero = t.b_at_zero();
    for (k, c) in full.iter().enumerate() {
        out[k] += &b_zero * *c;
    }
    for i in 0..n {
        let others = poles
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .fold(vec![one], |acc, (_, &b)| poly_mul(&acc, &[-b, one]));
        // −x·Bᵢ·Π_{j≠i}(x − bⱼ)
        for (k, c) in others.iter().enumerate() {
            out[k + 1] -= t.matrix(i + 1) * *c;
        }
    }
    out
}

fn eval_poly(coeffs: &[CMatrix], x: C64) -> CMatrix {
    let mut acc = coeffs.last().unwrap().clone();
    for c in coeffs.iter().rev().skip(1) {
        acc = acc * x + c;
    }
    acc
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Finite roots of `det C(x)` as eigenvalues of a block companion matrix.
/// The substitution `x = x₀ + 1/y` makes the leading coefficient `C(x₀)`
/// invertible, so roots at infinity show up as `y = 0` and are dropped.
pub fn divisor_roots(coeffs: &[CMatrix]) -> Result<Vec<C64>> {
    let n = coeffs.len() - 1;
    let m = coeffs[0].nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
    let mut best: Option<(C64, CMatrix, f64)> = None;
    for k in 0..8 {
        let x0 = C64::from_polar(0.45 + 0.35 * k as f64, 0.7 + 1.9 * k as f64);
        let c0 = eval_poly(coeffs, x0);
        let sv = linalg::singular_values(&c0);
        let rc = sv.last().copied().unwrap_or(0.0) / sv.first().copied().unwrap_or(1.0).max(f64::MIN_POSITIVE);
        if best.as_ref().is_none_or(|b| rc > b.2) {
            best = Some((x0, c0, rc));
        }
        if rc > 1e-3 {
            break;
        }
    }
    let (x0, lead, rc) = best.unwrap();
    if rc < 1e-12 {
        return Err(Error::NonGenericSpectrum("det C(x) vanishes identically".into()));
    }
    let lead_inv = linalg::inverse(&lead).unwrap();
    // D(y) = Σ_k C_k (x₀y + 1)^k y^{n−k}, coefficient of y^j.
    let mut d = vec![CMatrix::zeros(m, m); n + 1];
    for (k, ck) in coeffs.iter().enumerate() {
        for j in 0..=k {
            d[j + n - k] += ck * (x0.powi(j as i32) * binom(k, j));
        }
    }
    let size = m * n;
    let mut comp = CMatrix::zeros(size, size);
    for b in 0..n - 1 {
        comp.view_mut((b * m, (b + 1) * m), (m, m)).copy_from(&CMatrix::identity(m, m));
    }
    for j in 0..n {
        let e = -(&lead_inv * &d[j]);
        comp.view_mut(((n - 1) * m, j * m), (m, m)).copy_from(&e);
    }
    let ys = linalg::eigenvalues(&comp);
    let ymax = ys.iter().map(|y| y.norm()).fold(0.0, f64::max).max(1.0);
    let _ = scale;
    Ok(ys
        .into_iter()
        .filter(|y| y.norm() > 1e-9 * ymax)
        .map(|y| x0 + 1.0 / y)
        .collect())
}

/// Degree of `det C(x)` from its values at `mN + 1` scaled roots of unity.
pub fn det_degree(coeffs: &[CMatrix], radius: f64) -> usize {
    let m = coeffs[0].nrows();
    let npts = m * (coeffs.len() - 1) + 1;
    let vals: Vec<C64> = (0..npts)
        .map(|k| {
            let w = C64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / npts as f64);
            eval_poly(coeffs, w).determinant()
        })
        .collect();
    let mags: Vec<f64> = (0..npts)
        .map(|j| {
            let s: C64 = vals
                .iter()
                .enumerate()
                .map(|(k, v)| v * C64::from_polar(1.0, -2.0 * std::f64::consts::PI * (j * k) as f64 / npts as f64))
                .sum();
            s.norm() / npts as f64
        })
        .collect();
    let top = mags.iter().cloned().fold(0.0, f64::max);
    (0..npts).rev().find(|&j| mags[j] > 1e-9 * top).unwrap_or(0)
}

fn partition(groups: &[Vec<usize>]) -> Vec<usize> {
    let mut p: Vec<usize> = groups.iter().map(|g| g.len()).collect();
    p.sort_unstable_by(|a, b| b.cmp(a));
    p
}

pub fn spectral_type(t: &SystemTuple, tol: &TolerancePolicy) -> Result<SpectralType> {
    let c0 = linalg::eigen_clusters(&t.b_at_zero(), tol)?;
    let ci = linalg::eigen_clusters(&t.b_at_infinity(), tol)?;
    if c0.non_generic || ci.non_generic {
        return Err(Error::NonGenericSpectrum("eigenvalue clusters of B(0) or B(∞) nearly merge".into()));
    }
    let coeffs = divisor_polynomial(t);
    let roots = divisor_roots(&coeffs)?;
    let scale = roots.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let radius = tol.eig_cluster_tol * scale;
    let groups = cluster_points(&roots, radius);
    let centers: Vec<C64> = groups.iter().map(|g| g.iter().map(|&i| roots[i]).sum::<C64>() / g.len() as f64).collect();
    for i in 0..centers.len() {
        for j in i + 1..centers.len() {
            if (centers[i] - centers[j]).norm() < 10.0 * radius {
                return Err(Error::NonGenericSpectrum("roots of det C(x) nearly merge".into()));
            }
        }
    }
    let m = t.m();
    let mut rank_drop_consistent = true;
    for (g, a) in groups.iter().zip(&centers) {
        if g.len() > 1 {
            let ca = eval_poly(&coeffs, *a);
            let cn = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max) * a.norm().max(1.0).powi(coeffs.len() as i32);
            let drop = m - linalg::rank_abs(&ca, 1e-7 * cn.max(1.0));
            rank_drop_consistent &= drop == g.len();
        }
    }
    let r = 1.0 + t.poles().iter().map(|b| b.norm()).fold(0.0, f64::max);
    let det_degree = det_degree(&coeffs, r);
    if det_degree != roots.len() {
        return Err(Error::NonGenericSpectrum(format!(
            "det C(x) has degree {det_degree} but {} finite roots were found",
            roots.len()
        )));
    }
    Ok(SpectralType {
        s0: c0.multiplicity_partition(),
        s_inf: ci.multiplicity_partition(),
        s_div: partition(&groups),
        det_degree,
        rank_drop_consistent,
    })
}

fn cluster_points(points: &[C64], radius: f64) -> Vec<Vec<usize>> {
    linalg::cluster_points(points, radius)
}

/// Reference spectral types of the ten catalog systems, keyed by name.
pub const TABLE1: [(&str, &str); 10] = [
    ("qhg", "11;11;11"),
    ("ghg3", "111;111;21"),
    ("ghg3_alt", "21;111;111"),
    ("jp2", "21;21;2211"),
    ("jp3", "31;31;333111"),
    ("variant_deg2", "2;11;1111"),
    ("variant_deg3", "2;2;111111"),
    ("s46", "3;111;21111"),
    ("s47", "3;21;111111"),
    ("s48", "3;3;21111111"),
];

/// Spectral type of a generic 2×2 system with two nonzero poles.
pub const Q_HEUN: &str = "11;11;1111";

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, from_rows, re};
    use crate::qseries::QBase;

    #[test]
    fn render_widths() {
        let t = SpectralType { s0: vec![2, 1], s_inf: vec![1, 1, 1], s_div: vec![3], det_degree: 3, rank_drop_consistent: true };
        assert_eq!(t.render(), "21;111;3");
        let w = SpectralType { s0: vec![10, 1], s_inf: vec![11], s_div: vec![1], det_degree: 1, rank_drop_consistent: true };
        assert_eq!(w.render(), "10,1;11;1");
    }

    #[test]
    fn divisor_polynomial_matches_pointwise() {
        let base = QBase::real(0.4).unwrap();
        let b0 = from_rows(&[vec![c(0.3, 0.1), re(0.2)], vec![re(-0.1), re(0.4)]]);
        let b1 = from_rows(&[vec![re(0.5), c(0.0, 0.3)], vec![re(0.1), re(-0.2)]]);
        let b2 = from_rows(&[vec![re(0.2), re(0.7)], vec![c(0.1, 0.2), re(0.6)]]);
        let t = SystemTuple::new(base, vec![re(0.0), re(1.5), c(0.3, 0.8)], vec![b0, b1, b2]).unwrap();
        let coeffs = divisor_polynomial(&t);
        let x = c(0.2, -0.7);
        let direct = t.eval_b(x).unwrap() * ((x - re(1.5)) * (x - c(0.3, 0.8)));
        assert!(linalg::max_abs_diff(&eval_poly(&coeffs, x), &direct) < 1e-14);
        let st = spectral_type(&t, &TolerancePolicy::default()).unwrap();
        assert_eq!(st.render(), Q_HEUN);
    }

    #[test]
    fn roots_of_a_scalar_product() {
        let base = QBase::real(0.4).unwrap();
        let t = SystemTuple::new(
            base,
            vec![re(0.0), re(2.0)],
            vec![CMatrix::from_element(1, 1, re(0.5)), CMatrix::from_element(1, 1, re(0.25))],
        )
        .unwrap();
        // C(x) = 0.5(x − 2) − 0.25x has its root at x = 4.
        let r = divisor_roots(&divisor_polynomial(&t)).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0] - re(4.0)).norm() < 1e-12);
    }
}
