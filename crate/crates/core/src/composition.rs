//! Conditions (*)/(**), composition of q-convolutions and the additivity of
//! q-middle convolutions.

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, Subspace, TolerancePolicy, C64};
use crate::spectral;
use crate::system::{self, MCResult, SystemTuple};

#[derive(Debug, Clone, PartialEq)]
pub struct StarReport {
    pub star: bool,
    pub doublestar: bool,
    pub star_witness: Option<(usize, CVector)>,
    pub doublestar_witness: Option<(usize, CVector)>,
}

impl StarReport {
    pub fn both(&self) -> bool {
        self.star && self.doublestar
    }
}

/// Looks for `i` and `v ≠ 0` with `v ∈ ⋂_{i′≠i} ker B_{i′}` and `Bᵢv = −τv`.
/// Only `τ ∈ −spec(Bᵢ)` can work, so the search is finite.
fn star_witness(mats: &[CMatrix], tol: &TolerancePolicy) -> Result<Option<(usize, CVector)>> {
    let m = mats[0].nrows();
    for i in 0..mats.len() {
        let mut w = Subspace::full(m);
        for (j, b) in mats.iter().enumerate() {
            if j != i {
                w = linalg::intersection(&w, &linalg::kernel(b, tol), tol)?;
            }
        }
        if w.dim() == 0 {
            continue;
        }
        let bi = &mats[i];
        let scale = bi.norm().max(1.0);
        let eig = linalg::eigenvalues(bi);
        let groups = linalg::cluster_points(&eig, tol.eig_cluster_tol * scale);
        for g in groups {
            let value = g.iter().map(|&k| eig[k]).sum::<C64>() / g.len() as f64;
            let shifted = bi - CMatrix::identity(m, m) * value;
            // Loosened rank threshold: eigenvalues carry rounding of order √ε
            // when they are defective.
            let loose = TolerancePolicy { rank_rel_tol: tol.eig_cluster_tol.max(tol.rank_rel_tol), ..*tol };
            let eigenspace = if shifted.norm() <= tol.rank_rel_tol * scale {
                Subspace::full(m)
            } else {
                linalg::kernel(&shifted, &loose)
            };
            let common = linalg::intersection(&w, &eigenspace, tol)?;
            if common.dim() > 0 {
                return Ok(Some((i, common.basis().column(0).into_owned())));
            }
        }
    }
    Ok(None)
}

pub fn check_star(t: &SystemTuple, tol: &TolerancePolicy) -> Result<(bool, Option<(usize, CVector)>)> {
    let w = star_witness(t.matrices(), tol)?;
    Ok((w.is_none(), w))
}

/// Dual of (*): a left eigenvector of `Bᵢ` killing every other image.
pub fn check_doublestar(t: &SystemTuple, tol: &TolerancePolicy) -> Result<(bool, Option<(usize, CVector)>)> {
    let adj: Vec<CMatrix> = t.matrices().iter().map(|b| b.adjoint()).collect();
    let w = star_witness(&adj, tol)?;
    Ok((w.is_none(), w))
}

pub fn star_report(t: &SystemTuple, tol: &TolerancePolicy) -> Result<StarReport> {
    let (star, sw) = check_star(t, tol)?;
    let (doublestar, dw) = check_doublestar(t, tol)?;
    Ok(StarReport { star, doublestar, star_witness: sw, doublestar_witness: dw })
}

fn require_star(t: &SystemTuple, tol: &TolerancePolicy) -> Result<()> {
    let r = star_report(t, tol)?;
    if let Some((i, _)) = r.star_witness {
        return Err(Error::StarViolation(format!("(*) fails at index {i}")));
    }
    if let Some((i, _)) = r.doublestar_witness {
        return Err(Error::StarViolation(format!("(**) fails at index {i}")));
    }
    Ok(())
}

/// `G^q(λ₁,λ₂)`: the q-convolution applied twice.
pub fn compose_convolutions(t: &SystemTuple, l1: C64, l2: C64) -> SystemTuple {
    system::q_convolution(&system::q_convolution(t, l1), l2)
}

/// The same tuple through the classical convolution, rescaled:
/// `q^{−λ₁−λ₂}·G^{DR}(q^{λ₁}−1, q^{λ₁+λ₂}−q^{λ₁})`.
pub fn compose_via_dr(t: &SystemTuple, l1: C64, l2: C64) -> SystemTuple {
    let b = t.base();
    let one = C64::new(1.0, 0.0);
    let (a1, a12) = (b.pow(l1), b.pow(l1 + l2));
    let dr = system::dr_convolution(&system::dr_convolution(t, a1 - one), a12 - a1);
    let scale = b.pow(-l1 - l2);
    let mats = dr.matrices().iter().map(|g| g * scale).collect();
    dr.with_matrices(mats).expect("same shapes")
}

#[derive(Debug, Clone)]
pub struct AdditivityReport {
    pub dim_composite: usize,
    pub dim_direct: usize,
    /// Largest relative `‖ΦḠⱼ(λ₁,λ₂) − Ḡⱼ(λ₁+λ₂)Φ‖`; `None` on the degenerate route.
    pub intertwining: Option<f64>,
    /// Smallest over largest singular value of `Φ`.
    pub rcond: Option<f64>,
    /// Similarity residual between the composite and the original tuple when `λ₁+λ₂ = 0`.
    pub to_original: Option<f64>,
    pub spectral_match: Option<bool>,
    pub pass: bool,
}

/// `Φ = proj_{λ₁+λ₂} ∘ φ^q ∘ lift`, where `φ^q(v) = Σⱼ G_j^q(λ₁)vⱼ` and the
/// lift goes through both quotients blockwise.
pub fn phi_map(t: &SystemTuple, l1: C64, first: &MCResult, second: &MCResult, direct: &MCResult) -> CMatrix {
    let conv1 = system::q_convolution(t, l1);
    let (n1, d1) = (t.poles().len(), first.reduced.m());
    let big = conv1.m();
    let lift2 = &second.lift;
    let mut phi = CMatrix::zeros(big, lift2.ncols());
    for j in 0..n1 {
        let block = lift2.rows(j * d1, d1);
        let v_j = &first.lift * block;
        phi += conv1.matrix(j) * v_j;
    }
    &direct.proj * phi
}

pub fn additivity_check(t: &SystemTuple, l1: C64, l2: C64, tol: &TolerancePolicy) -> Result<AdditivityReport> {
    require_star(t, tol)?;
    let first = system::middle_convolution(t, l1, tol)?;
    let second = system::middle_convolution(&first.reduced, l2, tol)?;
    let direct = system::middle_convolution(t, l1 + l2, tol)?;
    let (dc, dd) = (second.reduced.m(), direct.reduced.m());
    let mut report = AdditivityReport {
        dim_composite: dc,
        dim_direct: dd,
        intertwining: None,
        rcond: None,
        to_original: None,
        spectral_match: None,
        pass: dc == dd,
    };
    let degenerate = l1.norm() == 0.0 || l2.norm() == 0.0;
    if !degenerate && dc == dd {
        let phi = phi_map(t, l1, &first, &second, &direct);
        let sv = linalg::singular_values(&phi);
        let rcond = sv.last().copied().unwrap_or(0.0) / sv.first().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
        let pn = phi.norm().max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for (j, (gc, gd)) in second.reduced.matrices().iter().zip(direct.reduced.matrices()).enumerate() {
            let r = (&phi * gc - gd * &phi).norm() / (pn * gd.norm().max(1.0));
            if !r.is_finite() {
                return Err(Error::IsomorphismFailure { index: j, residual: r });
            }
            worst = worst.max(r);
        }
        report.intertwining = Some(worst);
        report.rcond = Some(rcond);
        report.pass &= worst <= tol.residual_tol && rcond > 1e-8;
    } else if dc == dd {
        let a = spectral::spectral_type(&second.reduced, tol)?;
        let b = spectral::spectral_type(&direct.reduced, tol)?;
        report.spectral_match = Some(a == b);
        report.pass &= a == b;
    }
    if (l1 + l2).norm() == 0.0 {
        report.pass &= dc == t.m();
        if dc == t.m() {
            let sim = linalg::simultaneous_similarity(second.reduced.matrices(), t.matrices())?;
            report.to_original = Some(sim.residual);
            report.pass &= sim.residual <= tol.residual_tol;
        }
    }
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct SyAdditivityReport {
    /// `q^ν = q^λ + q^μ − 1`.
    pub q_nu: C64,
    pub dim_composite: usize,
    pub dim_direct: usize,
    /// Similarity residual between `Ψ̄_μ(Ψ̄_λ(t))` and `Ψ̄_ν(t)`.
    pub intertwining: f64,
    /// `q^ν` recovered from the determinant of the composite sum, when the seed is 1×1.
    pub q_nu_from_det: Option<C64>,
    pub law_error: Option<f64>,
    pub pass: bool,
}

/// Checks `Ψ̄_μ ∘ Ψ̄_λ ≃ Ψ̄_ν` with `q^ν = q^λ + q^μ − 1`.
pub fn sy_additivity_check(t: &SystemTuple, lambda: C64, mu: C64, tol: &TolerancePolicy) -> Result<SyAdditivityReport> {
    require_star(t, tol)?;
    let b = t.base();
    let one = C64::new(1.0, 0.0);
    let q_nu = b.pow(lambda) + b.pow(mu) - one;
    let nu = b.log(q_nu);
    let composite = system::sy_psi_bar(&system::sy_psi_bar(t, lambda, tol)?, mu, tol)?;
    let direct = system::sy_psi_bar(t, nu, tol)?;
    let (dc, dd) = (composite.m(), direct.m());
    let intertwining = if dc == dd {
        linalg::simultaneous_similarity(composite.matrices(), direct.matrices())?.residual
    } else {
        f64::INFINITY
    };
    let (q_nu_from_det, law_error) = if t.m() == 1 && dc == t.poles().len() {
        let k = sy_parameter_from_det(t, &composite)?;
        (Some(k), Some((k - q_nu).norm() / q_nu.norm().max(1.0)))
    } else {
        (None, None)
    };
    let pass = dc == dd && intertwining <= tol.residual_tol && law_error.is_none_or(|e| e <= 1e-10);
    Ok(SyAdditivityReport { q_nu, dim_composite: dc, dim_direct: dd, intertwining, q_nu_from_det, law_error, pass })
}

/// For a 1×1 seed with `N` poles and no reduction, `q^ν·ΣḠ(ν) = (q^ν−1)I + F̂`
/// with `F̂` of rank one and trace `Σbᵢ`, so `det` of the sum is
/// `κ^N (κ + Σbᵢ)` with `κ = q^ν − 1`. Solve for `κ` by Newton from the trace.
fn sy_parameter_from_det(t: &SystemTuple, composite: &SystemTuple) -> Result<C64> {
    let one = C64::new(1.0, 0.0);
    let n = composite.m();
    let s: C64 = t.matrices().iter().map(|b| b[(0, 0)]).sum();
    let total = composite.sum();
    let det = total.determinant();
    // Trace gives the starting point: n·κ + s.
    let mut kappa = (total.trace() - s) / n as f64;
    for _ in 0..50 {
        let f = kappa.powi(n as i32 - 1) * (kappa + s) - det;
        let df = kappa.powi(n as i32 - 2) * ((n as f64 - 1.0) * (kappa + s)) + kappa.powi(n as i32 - 1);
        if df.norm() == 0.0 {
            break;
        }
        let step = f / df;
        kappa -= step;
        if step.norm() <= 1e-16 * kappa.norm().max(1.0) {
            break;
        }
    }
    if !kappa.re.is_finite() {
        return Err(Error::Degenerate("composite parameter solve diverged".into()));
    }
    Ok(kappa + one)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IrreducibilityReport {
    /// Dimensions searched (1 and m−1).
    pub searched: Vec<usize>,
    /// Dimension of an invariant subspace found, if any.
    pub found: Option<usize>,
}

impl IrreducibilityReport {
    pub fn summary(&self) -> String {
        match self.found {
            Some(d) => format!("invariant subspace of dimension {d} found"),
            None => format!(
                "no invariant subspace found up to dimension {}",
                self.searched.iter().max().copied().unwrap_or(0)
            ),
        }
    }
}

/// Heuristic search for common invariant lines (simultaneous eigenvectors) and
/// hyperplanes (simultaneous left eigenvectors). Complete only for `m ≤ 3`.
pub fn invariant_subspace_search(t: &SystemTuple, tol: &TolerancePolicy) -> IrreducibilityReport {
    let m = t.m();
    let mut searched = vec![];
    if m <= 1 {
        return IrreducibilityReport { searched, found: None };
    }
    let line = |mats: Vec<CMatrix>| -> bool {
        let mut mix = CMatrix::zeros(m, m);
        for (k, b) in mats.iter().enumerate() {
            let w = C64::new(1.0 + 0.37 * k as f64, 0.61 * (k as f64 + 1.0).sqrt());
            mix += b * w;
        }
        let eig = linalg::eigenvalues(&mix);
        let scale = mix.norm().max(1.0);
        for e in eig {
            let ker = linalg::kernel(
                &(&mix - CMatrix::identity(m, m) * e),
                &TolerancePolicy { rank_rel_tol: 1e-7, ..*tol },
            );
            for c in 0..ker.dim() {
                let v = ker.basis().column(c).into_owned();
                let common = mats.iter().all(|b| {
                    let bv = b * &v;
                    let along = v.dotc(&bv);
                    (bv - &v * along).norm() <= 1e-7 * scale.max(b.norm())
                });
                if common {
                    return true;
                }
            }
        }
        false
    };
    searched.push(1);
    if line(t.matrices().to_vec()) {
        return IrreducibilityReport { searched, found: Some(1) };
    }
    searched.push(m - 1);
    if line(t.matrices().iter().map(|b| b.adjoint()).collect()) {
        return IrreducibilityReport { searched, found: Some(m - 1) };
    }
    IrreducibilityReport { searched, found: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, re};
    use crate::qseries::QBase;

    fn seed(q: f64, entries: &[C64], poles: &[C64]) -> SystemTuple {
        let mats = entries.iter().map(|&e| CMatrix::from_element(1, 1, e)).collect();
        SystemTuple::new(QBase::real(q).unwrap(), poles.to_vec(), mats).unwrap()
    }

    fn qhg() -> SystemTuple {
        seed(0.4, &[c(0.47, 0.0), c(-0.35, 0.1)], &[re(0.0), re(1.0)])
    }

    #[test]
    fn star_on_small_tuples() {
        let tol = TolerancePolicy::default();
        let t = qhg();
        assert!(star_report(&t, &tol).unwrap().both());
        let z = seed(0.4, &[re(0.0), re(0.0), re(0.3)], &[re(0.0), re(1.0), re(2.0)]);
        let r = star_report(&z, &tol).unwrap();
        assert!(!r.star && r.star_witness.is_some());
        assert!(!r.doublestar && r.doublestar_witness.is_some());
    }

    #[test]
    fn witness_needs_an_eigenvector() {
        let tol = TolerancePolicy::default();
        let base = QBase::real(0.5).unwrap();
        // ker B₀ = span(e₂); B₁ moves e₂ off its line, so (*) holds.
        let b0 = linalg::from_rows(&[vec![re(1.0), re(0.0)], vec![re(0.0), re(0.0)]]);
        let b1 = linalg::from_rows(&[vec![re(0.3), re(1.0)], vec![re(0.0), re(0.2)]]);
        let t = SystemTuple::new(base, vec![re(0.0), re(2.0)], vec![b0.clone(), b1]).unwrap();
        assert!(check_star(&t, &tol).unwrap().0);
        // Now e₂ is an eigenvector of B₁.
        let b1 = linalg::from_rows(&[vec![re(0.3), re(0.0)], vec![re(1.0), re(0.2)]]);
        let t = SystemTuple::new(base, vec![re(0.0), re(2.0)], vec![b0, b1]).unwrap();
        let (ok, w) = check_star(&t, &tol).unwrap();
        assert!(!ok);
        let (i, v) = w.unwrap();
        assert_eq!(i, 1);
        assert!(v[0].norm() < 1e-12 && (v[1].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dr_bridge() {
        let t = qhg();
        let (l1, l2) = (c(0.3, 0.1), c(-0.2, 0.4));
        let a = compose_convolutions(&t, l1, l2);
        let b = compose_via_dr(&t, l1, l2);
        for (x, y) in a.matrices().iter().zip(b.matrices()) {
            assert!(linalg::max_abs_diff(x, y) < 1e-13);
        }
    }

    #[test]
    fn additivity_on_qhg() {
        let tol = TolerancePolicy::default();
        let r = additivity_check(&qhg(), c(0.3, 0.05), re(0.45), &tol).unwrap();
        assert_eq!(r.dim_composite, r.dim_direct);
        assert!(r.pass, "{r:?}");
        let back = additivity_check(&qhg(), re(0.3), re(-0.3), &tol).unwrap();
        assert!(back.pass, "{back:?}");
        assert_eq!(back.dim_composite, 1);
    }

    #[test]
    fn sy_law() {
        let tol = TolerancePolicy::default();
        let t = seed(0.45, &[c(0.3, 0.1), re(-0.4), c(0.2, -0.3)], &[re(0.0), re(1.3), c(0.5, 0.9)]);
        let r = sy_additivity_check(&t, re(0.35), c(0.2, 0.1), &tol).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.law_error.unwrap() < 1e-10);
    }
}
