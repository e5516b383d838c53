//! Dense complex linear algebra with an explicit tolerance policy.
//!
//! Ranks are decided by singular-value thresholding relative to the largest
//! singular value. Quotients are represented through an orthonormal
//! complement, so every quotient comes with `proj`/`lift` maps and callers
//! compare reduced objects through those maps.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TolerancePolicy {
    pub rank_rel_tol: f64,
    pub eig_cluster_tol: f64,
    pub residual_tol: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        TolerancePolicy { rank_rel_tol: 1e-9, eig_cluster_tol: 1e-7, residual_tol: 1e-8 }
    }
}

impl TolerancePolicy {
    pub fn new(rank_rel_tol: f64, eig_cluster_tol: f64, residual_tol: f64) -> Result<Self> {
        for (name, v) in [
            ("rank_rel_tol", rank_rel_tol),
            ("eig_cluster_tol", eig_cluster_tol),
            ("residual_tol", residual_tol),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Argument(format!("{name} must lie in (0,1), got {v}")));
            }
        }
        Ok(TolerancePolicy { rank_rel_tol, eig_cluster_tol, residual_tol })
    }

    pub fn with_residual_tol(self, residual_tol: f64) -> Result<Self> {
        TolerancePolicy::new(self.rank_rel_tol, self.eig_cluster_tol, residual_tol)
    }
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Singular values together with a full (square) right singular basis.
/// Rows of `v_h` are conjugated right singular vectors; rows beyond the
/// number of singular values span the structural null space.
fn svd_full(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let (r, n) = m.shape();
    let padded = if r < n {
        let mut p = CMatrix::zeros(n, n);
        p.view_mut((0, 0), (r, n)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_h = svd.v_t.expect("right singular vectors requested");
    (svd.singular_values.iter().copied().collect(), v_h)
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

pub fn spectral_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn numerical_rank(m: &CMatrix, tol: &TolerancePolicy) -> usize {
    let s = singular_values(m);
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > tol.rank_rel_tol * smax).count()
}

/// Rank with an absolute threshold.
pub fn rank_abs(m: &CMatrix, threshold: f64) -> usize {
    singular_values(m).iter().filter(|&&v| v > threshold).count()
}

/// A subspace of C^d held by an orthonormal basis (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: CMatrix,
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Subspace { basis: CMatrix::zeros(ambient_dim, 0) }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Subspace { basis: CMatrix::identity(ambient_dim, ambient_dim) }
    }

    /// Orthonormalise the column span of `vectors`.
    pub fn span(vectors: &CMatrix, tol: &TolerancePolicy) -> Self {
        let d = vectors.nrows();
        if vectors.ncols() == 0 {
            return Subspace::zero(d);
        }
        let svd = vectors.clone().svd(true, false);
        let u = svd.u.expect("left singular vectors requested");
        let s = &svd.singular_values;
        let smax = s.iter().cloned().fold(0.0, f64::max);
        if smax == 0.0 {
            return Subspace::zero(d);
        }
        let keep: Vec<usize> = (0..s.len()).filter(|&i| s[i] > tol.rank_rel_tol * smax).collect();
        let cols: Vec<CVector> = keep.iter().map(|&i| u.column(i).into_owned()).collect();
        Subspace { basis: columns_to_matrix(d, &cols) }
    }

    /// Wraps a matrix whose columns are already orthonormal.
    pub fn from_orthonormal(basis: CMatrix) -> Result<Self> {
        let k = basis.ncols();
        let gram = basis.adjoint() * &basis;
        let err = (gram - CMatrix::identity(k, k)).norm();
        if err > 1e-10 {
            return Err(Error::Argument(format!("basis is not orthonormal (error {err:.2e})")));
        }
        Ok(Subspace { basis })
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    /// Orthogonal projector onto the subspace.
    pub fn projector(&self) -> CMatrix {
        &self.basis * self.basis.adjoint()
    }

    pub fn complement(&self, tol: &TolerancePolicy) -> Subspace {
        let d = self.ambient_dim();
        if self.dim() == 0 {
            return Subspace::full(d);
        }
        kernel(&self.basis.adjoint(), tol)
    }

    /// Distance of `v` from the subspace relative to `‖v‖`.
    pub fn relative_distance(&self, v: &CVector) -> f64 {
        let nv = v.norm();
        if nv == 0.0 {
            return 0.0;
        }
        let r = v - &self.basis * (self.basis.adjoint() * v);
        r.norm() / nv
    }

    pub fn contains(&self, v: &CVector, rel_tol: f64) -> bool {
        self.relative_distance(v) <= rel_tol
    }
}

pub fn columns_to_matrix(rows: usize, cols: &[CVector]) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols.len());
    for (j, v) in cols.iter().enumerate() {
        m.set_column(j, v);
    }
    m
}

/// Orthonormal basis of `{v : ‖Mv‖ ≤ rank_rel_tol·‖M‖·‖v‖}`.
pub fn kernel(m: &CMatrix, tol: &TolerancePolicy) -> Subspace {
    kernel_scaled(m, tol, 0.0)
}

/// Like [`kernel`], but singular values are measured against `max(‖M‖, scale)`,
/// so a matrix that is zero up to rounding has a full kernel.
pub fn kernel_scaled(m: &CMatrix, tol: &TolerancePolicy, scale: f64) -> Subspace {
    let n = m.ncols();
    if n == 0 {
        return Subspace::zero(0);
    }
    if m.nrows() == 0 {
        return Subspace::full(n);
    }
    let (s, v_h) = svd_full(m);
    let smax = s.iter().cloned().fold(scale, f64::max);
    if smax == 0.0 {
        return Subspace::full(n);
    }
    let cols: Vec<CVector> = (0..n)
        .filter(|&i| i >= s.len() || s[i] <= tol.rank_rel_tol * smax)
        .map(|i| v_h.row(i).adjoint())
        .collect();
    Subspace { basis: columns_to_matrix(n, &cols) }
}

pub fn image(m: &CMatrix, tol: &TolerancePolicy) -> Subspace {
    Subspace::span(m, tol)
}

fn check_ambient(a: &Subspace, b: &Subspace) -> Result<()> {
    if a.ambient_dim() != b.ambient_dim() {
        return Err(Error::Dimension(format!(
            "subspaces live in C^{} and C^{}",
            a.ambient_dim(),
            b.ambient_dim()
        )));
    }
    Ok(())
}

pub fn subspace_sum(a: &Subspace, b: &Subspace, tol: &TolerancePolicy) -> Result<Subspace> {
    check_ambient(a, b)?;
    let d = a.ambient_dim();
    let mut joined = CMatrix::zeros(d, a.dim() + b.dim());
    joined.view_mut((0, 0), (d, a.dim())).copy_from(a.basis());
    joined.view_mut((0, a.dim()), (d, b.dim())).copy_from(b.basis());
    Ok(Subspace::span(&joined, tol))
}

pub fn intersection(a: &Subspace, b: &Subspace, tol: &TolerancePolicy) -> Result<Subspace> {
    check_ambient(a, b)?;
    let d = a.ambient_dim();
    let eye = CMatrix::identity(d, d);
    let mut stacked = CMatrix::zeros(2 * d, d);
    stacked.view_mut((0, 0), (d, d)).copy_from(&(&eye - a.projector()));
    stacked.view_mut((d, 0), (d, d)).copy_from(&(&eye - b.projector()));
    if stacked.norm() == 0.0 {
        return Ok(Subspace::full(d));
    }
    Ok(kernel(&stacked, tol))
}

/// Induced action of a family of matrices on `C^d / W`.
#[derive(Debug, Clone)]
pub struct Quotient {
    pub reduced: Vec<CMatrix>,
    /// `C^d → C^d/W`, equal to `Cᴴ(I − WWᴴ)`.
    pub proj: CMatrix,
    /// Orthonormal complement `C`, a right inverse of `proj`.
    pub lift: CMatrix,
}

/// Largest `‖(I − Π_W) M W‖`, relative to `max(‖M‖, 1)`.
pub fn invariance_defect(m: &CMatrix, w: &Subspace) -> f64 {
    if w.dim() == 0 {
        return 0.0;
    }
    let d = w.ambient_dim();
    let mw = m * w.basis();
    let out = (CMatrix::identity(d, d) - w.projector()) * mw;
    out.norm() / m.norm().max(1.0)
}

pub fn quotient_tuple(ms: &[CMatrix], w: &Subspace, tol: &TolerancePolicy) -> Result<Quotient> {
    let d = w.ambient_dim();
    for m in ms {
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::Dimension(format!(
                "matrix is {}x{}, subspace lives in C^{d}",
                m.nrows(),
                m.ncols()
            )));
        }
        let defect = invariance_defect(m, w);
        if defect > tol.residual_tol {
            return Err(Error::NotInvariant { residual: defect, bound: tol.residual_tol });
        }
    }
    let lift = if w.dim() == 0 { CMatrix::identity(d, d) } else { w.complement(tol).basis().clone() };
    if lift.ncols() + w.dim() != d {
        return Err(Error::Dimension("complement has the wrong dimension".into()));
    }
    let proj = lift.adjoint();
    let reduced = ms.iter().map(|m| &proj * m * &lift).collect();
    Ok(Quotient { reduced, proj, lift })
}

pub fn quotient_action(m: &CMatrix, w: &Subspace, tol: &TolerancePolicy) -> Result<(CMatrix, CMatrix, CMatrix)> {
    let q = quotient_tuple(std::slice::from_ref(m), w, tol)?;
    let Quotient { mut reduced, proj, lift } = q;
    Ok((reduced.pop().unwrap(), proj, lift))
}

pub fn eigenvalues(m: &CMatrix) -> Vec<C64> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    // The unbounded Schur iteration can stall; retry on shifted copies.
    let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let shifts = [c(0.0, 0.0), c(0.37, 0.11), c(-0.23, 0.41), c(0.61, -0.29)];
    for (k, &s) in shifts.iter().enumerate() {
        let eps = if k + 1 == shifts.len() { 1e-13 } else { f64::EPSILON };
        let shift = s * scale;
        let shifted = m + CMatrix::identity(n, n) * shift;
        if let Some(schur) = shifted.try_schur(eps, 200 * n.max(10)) {
            let (_, t) = schur.unpack();
            return (0..n).map(|i| t[(i, i)] - shift).collect();
        }
    }
    let (_, t) = m.clone().try_schur(1e-10, 0).expect("unbounded Schur iteration").unpack();
    (0..n).map(|i| t[(i, i)]).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenCluster {
    pub value: C64,
    pub multiplicity: usize,
    pub jordan_partition: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenClusters {
    pub clusters: Vec<EigenCluster>,
    /// Set when two distinct clusters sit closer than `10·eig_cluster_tol`.
    pub non_generic: bool,
}

impl EigenClusters {
    /// Multiplicities sorted in descending order.
    pub fn multiplicity_partition(&self) -> Vec<usize> {
        let mut p: Vec<usize> = self.clusters.iter().map(|c| c.multiplicity).collect();
        p.sort_unstable_by(|a, b| b.cmp(a));
        p
    }
}

/// Single-linkage clustering of points closer than `radius`.
pub fn cluster_points(points: &[C64], radius: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (points[i] - points[j]).norm() <= radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_of[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_of[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    groups
}

pub fn eigen_clusters(m: &CMatrix, tol: &TolerancePolicy) -> Result<EigenClusters> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension("eigen_clusters needs a square matrix".into()));
    }
    let n = m.nrows();
    let eig = eigenvalues(m);
    let scale = eig.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let radius = tol.eig_cluster_tol * scale;
    let groups = cluster_points(&eig, radius);
    let mnorm = m.norm().max(1.0);
    let mut clusters = Vec::new();
    for g in &groups {
        let value = g.iter().map(|&i| eig[i]).sum::<C64>() / g.len() as f64;
        let mult = g.len();
        let shifted = m - CMatrix::identity(n, n) * value;
        // Rank chain rank((M − λI)^k); blocks of size ≥ k number r_{k−1} − r_k.
        let mut ranks = vec![n];
        let mut power = CMatrix::identity(n, n);
        for k in 1..=mult {
            power = &power * &shifted;
            let r = rank_abs(&power, tol.eig_cluster_tol * mnorm.powi(k as i32));
            ranks.push(r);
            if r <= n - mult {
                break;
            }
        }
        let mut at_least: Vec<usize> = ranks.windows(2).map(|w| w[0].saturating_sub(w[1])).collect();
        at_least.push(0);
        let mut partition = Vec::new();
        for k in 0..at_least.len() - 1 {
            let exactly = at_least[k].saturating_sub(at_least[k + 1]);
            partition.extend(std::iter::repeat_n(k + 1, exactly));
        }
        partition.sort_unstable_by(|a, b| b.cmp(a));
        if partition.iter().sum::<usize>() != mult {
            // Rank chain disagrees with the eigenvalue count; fall back to the
            // semisimple reading.
            partition = vec![1; mult];
        }
        clusters.push(EigenCluster { value, multiplicity: mult, jordan_partition: partition });
    }
    let mut non_generic = false;
    for i in 0..clusters.len() {
        for j in i + 1..clusters.len() {
            if (clusters[i].value - clusters[j].value).norm() < 10.0 * radius {
                non_generic = true;
            }
        }
    }
    Ok(EigenClusters { clusters, non_generic })
}

pub fn inverse(m: &CMatrix) -> Option<CMatrix> {
    m.clone().try_inverse()
}

pub fn block_diag(blocks: &[CMatrix]) -> CMatrix {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let k: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMatrix::zeros(n, k);
    let (mut r, mut cc) = (0, 0);
    for b in blocks {
        out.view_mut((r, cc), b.shape()).copy_from(b);
        r += b.nrows();
        cc += b.ncols();
    }
    out
}

/// `a/b` without forming `|b|²` (Smith's algorithm), so huge or tiny
/// denominators do not overflow to a zero quotient.
pub fn cdiv(a: C64, b: C64) -> C64 {
    if b.re.abs() >= b.im.abs() {
        let r = b.im / b.re;
        let d = b.re + b.im * r;
        C64::new((a.re + a.im * r) / d, (a.im - a.re * r) / d)
    } else {
        let r = b.re / b.im;
        let d = b.re * r + b.im;
        C64::new((a.re * r + a.im) / d, (a.im * r - a.re) / d)
    }
}

/// Max-modulus entry difference.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn from_rows(rows: &[Vec<C64>]) -> CMatrix {
    let r = rows.len();
    let k = rows.first().map_or(0, |v| v.len());
    CMatrix::from_fn(r, k, |i, j| rows[i][j])
}

/// `S` with `S·aᵢ = bᵢ·S` for all `i`, found in the null space of the stacked
/// `aᵢᵀ ⊗ I − I ⊗ bᵢ`. When that null space has several directions a fixed
/// combination with the best conditioning is used.
#[derive(Debug, Clone)]
pub struct Similarity {
    pub s: CMatrix,
    /// `max ‖S aᵢ S⁻¹ − bᵢ‖ / max(1, ‖bᵢ‖)`.
    pub residual: f64,
    /// Reciprocal condition number of `S`.
    pub rcond: f64,
}

pub fn simultaneous_similarity(a: &[CMatrix], b: &[CMatrix]) -> Result<Similarity> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::Dimension("tuples must have the same positive length".into()));
    }
    let n = a[0].nrows();
    for (x, y) in a.iter().zip(b) {
        if x.shape() != (n, n) || y.shape() != (n, n) {
            return Err(Error::Dimension("all matrices must share one square size".into()));
        }
    }
    let nn = n * n;
    let eye = CMatrix::identity(n, n);
    let mut stacked = CMatrix::zeros(nn * a.len(), nn);
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        let w = 1.0 / (x.norm() + y.norm()).max(1.0);
        let blk = (x.transpose().kronecker(&eye) - eye.kronecker(y)) * C64::new(w, 0.0);
        stacked.view_mut((i * nn, 0), (nn, nn)).copy_from(&blk);
    }
    let (sv, v_h) = svd_full(&stacked);
    let smax = sv.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut order: Vec<usize> = (0..nn).collect();
    let sval = |i: usize| if i < sv.len() { sv[i] } else { 0.0 };
    order.sort_by(|&i, &j| sval(i).partial_cmp(&sval(j)).unwrap());
    let mut null: Vec<usize> = order.iter().copied().filter(|&i| sval(i) <= 1e-8 * smax).collect();
    if null.is_empty() {
        null.push(order[0]);
    }
    let reshape = |v: &CVector| CMatrix::from_fn(n, n, |r, c| v[c * n + r]);
    let mut best: Option<(CMatrix, f64)> = None;
    for trial in 0..4 {
        let mut v = CVector::zeros(nn);
        for (k, &idx) in null.iter().enumerate() {
            let t = (trial * 7 + k * 3 + 1) as f64;
            let coef = C64::new((0.61 * t).cos(), (0.37 * t).sin());
            v += v_h.row(idx).adjoint() * coef;
        }
        let s = reshape(&v);
        let sv_s = singular_values(&s);
        let rc = sv_s.last().copied().unwrap_or(0.0) / sv_s.first().copied().unwrap_or(1.0).max(f64::MIN_POSITIVE);
        if best.as_ref().is_none_or(|(_, r)| rc > *r) {
            best = Some((s, rc));
        }
        if null.len() == 1 {
            break;
        }
    }
    let (s, rcond) = best.unwrap();
    let inv = match inverse(&s) {
        Some(i) if rcond > 1e-12 => i,
        _ => return Err(Error::IsomorphismFailure { index: 0, residual: f64::INFINITY }),
    };
    let residual = a
        .iter()
        .zip(b)
        .map(|(x, y)| (&s * x * &inv - y).norm() / y.norm().max(1.0))
        .fold(0.0, f64::max);
    Ok(Similarity { s, residual, rcond })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    #[test]
    fn division_with_huge_denominators() {
        let (a, b) = (c(3.0, -1.0), c(0.5, 2.0));
        assert!((cdiv(a, b) - a / b).norm() < 1e-15);
        assert!((cdiv(a, c(0.0, -4.0)) - a / c(0.0, -4.0)).norm() < 1e-15);
        // num-complex forms |b|², which overflows here.
        let big = c(1e183, -0.0);
        assert_eq!(a / big, c(0.0, 0.0));
        assert!((cdiv(a, big) - c(3e-183, -1e-183)).norm() < 1e-197);
    }

    #[test]
    fn similarity_recovers_a_conjugation() {
        let a = vec![
            from_rows(&[vec![c(1.0, 0.2), re(2.0)], vec![re(0.0), re(-0.5)]]),
            from_rows(&[vec![re(0.3), re(0.0)], vec![c(0.4, -0.1), re(1.5)]]),
        ];
        let p = from_rows(&[vec![re(2.0), c(0.0, 1.0)], vec![re(1.0), re(3.0)]]);
        let pi = inverse(&p).unwrap();
        let b: Vec<CMatrix> = a.iter().map(|x| &p * x * &pi).collect();
        let sim = simultaneous_similarity(&a, &b).unwrap();
        assert!(sim.residual < 1e-12, "{}", sim.residual);
        let other = vec![b[0].clone(), &b[1] + CMatrix::identity(2, 2) * re(0.1)];
        let bad = simultaneous_similarity(&a, &other);
        assert!(bad.map_or(true, |s| s.residual > 1e-3));
    }

    #[test]
    fn kernel_of_zero_and_identity() {
        assert_eq!(kernel(&CMatrix::zeros(2, 2), &tol()).dim(), 2);
        assert_eq!(kernel(&CMatrix::identity(3, 3), &tol()).dim(), 0);
    }

    #[test]
    fn kernel_of_all_ones() {
        let m = from_rows(&[vec![re(1.0), re(1.0)], vec![re(1.0), re(1.0)]]);
        let k = kernel(&m, &tol());
        assert_eq!(k.dim(), 1);
        let v = k.basis().column(0);
        // Hand solution: x + y = 0.
        let ratio = v[0] / v[1];
        assert!((ratio + re(1.0)).norm() < 1e-12);
        assert!((v.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kernel_of_wide_matrix_is_full_size() {
        let m = from_rows(&[vec![re(1.0), re(2.0), re(3.0)]]);
        let k = kernel(&m, &tol());
        assert_eq!(k.dim(), 2);
        assert!((m * k.basis()).norm() < 1e-12);
    }

    #[test]
    fn subspace_sums() {
        let a = Subspace::span(&CMatrix::from_column_slice(3, 1, &[re(1.0), re(0.0), re(0.0)]), &tol());
        let b = Subspace::span(&CMatrix::from_column_slice(3, 1, &[re(1.0), re(1.0), re(0.0)]), &tol());
        assert_eq!(subspace_sum(&a, &a, &tol()).unwrap().dim(), 1);
        let s = subspace_sum(&a, &b, &tol()).unwrap();
        assert_eq!(s.dim(), 2);
        // Gram–Schmidt: span{e1, e2}.
        let e2 = CVector::from_vec(vec![re(0.0), re(1.0), re(0.0)]);
        assert!(s.contains(&e2, 1e-12));
        let e3 = CVector::from_vec(vec![re(0.0), re(0.0), re(1.0)]);
        assert!(!s.contains(&e3, 1e-6));
        assert!(subspace_sum(&a, &Subspace::zero(2), &tol()).is_err());
    }

    #[test]
    fn intersection_of_planes() {
        let a = Subspace::span(&from_rows(&[vec![re(1.0), re(0.0)], vec![re(0.0), re(1.0)], vec![re(0.0), re(0.0)]]), &tol());
        let b = Subspace::span(&from_rows(&[vec![re(0.0), re(0.0)], vec![re(1.0), re(0.0)], vec![re(0.0), re(1.0)]]), &tol());
        let i = intersection(&a, &b, &tol()).unwrap();
        assert_eq!(i.dim(), 1);
        assert!(i.contains(&CVector::from_vec(vec![re(0.0), re(1.0), re(0.0)]), 1e-12));
    }

    #[test]
    fn clusters_of_simple_matrices() {
        let e = eigen_clusters(&CMatrix::identity(3, 3), &tol()).unwrap();
        assert_eq!(e.clusters.len(), 1);
        assert_eq!(e.clusters[0].multiplicity, 3);
        assert_eq!(e.clusters[0].jordan_partition, vec![1, 1, 1]);

        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![re(2.0), re(2.0), re(5.0)]));
        let e = eigen_clusters(&d, &tol()).unwrap();
        let mut got: Vec<(f64, usize, Vec<usize>)> =
            e.clusters.iter().map(|c| (c.value.re, c.multiplicity, c.jordan_partition.clone())).collect();
        got.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        assert_eq!(got.len(), 2);
        assert!((got[0].0 - 2.0).abs() < 1e-12 && got[0].1 == 2 && got[0].2 == vec![1, 1]);
        assert!((got[1].0 - 5.0).abs() < 1e-12 && got[1].1 == 1);

        let j = from_rows(&[vec![re(0.0), re(1.0)], vec![re(0.0), re(0.0)]]);
        let e = eigen_clusters(&j, &tol()).unwrap();
        assert_eq!(e.clusters.len(), 1);
        assert_eq!(e.clusters[0].jordan_partition, vec![2]);
    }

    #[test]
    fn quotient_of_trivial_subspace_is_identity_projection() {
        let m = from_rows(&[vec![re(1.0), c(0.0, 2.0)], vec![re(3.0), re(4.0)]]);
        let (mbar, proj, _) = quotient_action(&m, &Subspace::zero(2), &tol()).unwrap();
        assert_eq!(mbar, m);
        assert_eq!(proj, CMatrix::identity(2, 2));
    }

    #[test]
    fn quotient_of_identity() {
        let w = Subspace::span(&CMatrix::from_column_slice(3, 1, &[re(1.0), re(1.0), re(0.0)]), &tol());
        let (mbar, _, _) = quotient_action(&CMatrix::identity(3, 3), &w, &tol()).unwrap();
        assert!((mbar - CMatrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn quotient_intertwines() {
        // Upper block-triangular: span{e1} is invariant.
        let m = from_rows(&[
            vec![re(2.0), re(1.0), c(0.5, 1.0)],
            vec![re(0.0), re(3.0), re(1.0)],
            vec![re(0.0), re(-1.0), c(0.0, 1.0)],
        ]);
        let w = Subspace::span(&CMatrix::from_column_slice(3, 1, &[re(1.0), re(0.0), re(0.0)]), &tol());
        let (mbar, proj, lift) = quotient_action(&m, &w, &tol()).unwrap();
        assert!((&proj * &m - &mbar * &proj).norm() < 1e-12);
        assert!((&proj * &lift - CMatrix::identity(2, 2)).norm() < 1e-12);
        let bad = Subspace::span(&CMatrix::from_column_slice(3, 1, &[re(0.0), re(1.0), re(0.0)]), &tol());
        assert!(matches!(quotient_action(&m, &bad, &tol()), Err(Error::NotInvariant { .. })));
    }

    #[test]
    fn tolerance_policy_validation() {
        assert!(TolerancePolicy::new(0.0, 1e-7, 1e-8).is_err());
        assert!(TolerancePolicy::new(1e-9, 1.0, 1e-8).is_err());
        assert!(TolerancePolicy::default().with_residual_tol(1e-6).is_ok());
    }
}
