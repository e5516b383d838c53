//! Systems `(Y(qx) − Y(x))/(−x) = Σ Bᵢ/(x − bᵢ) Y(x)` and the operators acting on them.

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, Subspace, TolerancePolicy, C64};
use crate::qseries::QBase;

#[derive(Debug, Clone, PartialEq)]
pub struct SystemTuple {
    base: QBase,
    poles: Vec<C64>,
    matrices: Vec<CMatrix>,
}

const POLE_SEPARATION: f64 = 1e-12;

impl SystemTuple {
    pub fn new(base: QBase, poles: Vec<C64>, matrices: Vec<CMatrix>) -> Result<Self> {
        if poles.is_empty() || poles.len() != matrices.len() {
            return Err(Error::Dimension(format!(
                "{} poles but {} matrices",
                poles.len(),
                matrices.len()
            )));
        }
        if poles[0] != C64::new(0.0, 0.0) {
            return Err(Error::Argument("the first pole must be exactly 0".into()));
        }
        for i in 0..poles.len() {
            for j in i + 1..poles.len() {
                if (poles[i] - poles[j]).norm() <= POLE_SEPARATION {
                    return Err(Error::PoleCollision(format!("poles {i} and {j} coincide")));
                }
            }
        }
        let m = matrices[0].nrows();
        for b in &matrices {
            if b.nrows() != m || b.ncols() != m {
                return Err(Error::Dimension("all matrices must be m×m".into()));
            }
            if !linalg::is_finite(b) {
                return Err(Error::Argument("matrix has non-finite entries".into()));
            }
        }
        Ok(SystemTuple { base, poles, matrices })
    }

    pub fn base(&self) -> &QBase {
        &self.base
    }

    pub fn m(&self) -> usize {
        self.matrices[0].nrows()
    }

    /// Number of nonzero poles.
    pub fn n(&self) -> usize {
        self.poles.len() - 1
    }

    pub fn poles(&self) -> &[C64] {
        &self.poles
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    pub fn matrix(&self, i: usize) -> &CMatrix {
        &self.matrices[i]
    }

    pub fn identity(&self) -> CMatrix {
        CMatrix::identity(self.m(), self.m())
    }

    pub fn sum(&self) -> CMatrix {
        self.matrices.iter().fold(CMatrix::zeros(self.m(), self.m()), |acc, b| acc + b)
    }

    /// `B(0) = I − B₀`.
    pub fn b_at_zero(&self) -> CMatrix {
        self.identity() - &self.matrices[0]
    }

    /// `B(∞) = I − ΣBᵢ`, the matrix `B_∞` of the SY normal form.
    pub fn b_at_infinity(&self) -> CMatrix {
        self.identity() - self.sum()
    }

    /// Same tuple with every matrix replaced by `S·Bᵢ·S⁻¹`.
    pub fn conjugate(&self, s: &CMatrix) -> Result<SystemTuple> {
        let inv = linalg::inverse(s).ok_or_else(|| Error::Degenerate("similarity is singular".into()))?;
        let mats = self.matrices.iter().map(|b| s * b * &inv).collect();
        SystemTuple::new(self.base, self.poles.clone(), mats)
    }

    pub fn with_matrices(&self, matrices: Vec<CMatrix>) -> Result<SystemTuple> {
        SystemTuple::new(self.base, self.poles.clone(), matrices)
    }

    fn check_pole(&self, x: C64) -> Result<()> {
        for (i, b) in self.poles.iter().enumerate().skip(1) {
            if (x - b).norm() <= 1e-10 * b.norm().max(1.0) {
                return Err(Error::Pole(format!("x = {x} is pole b_{i}")));
            }
        }
        Ok(())
    }

    /// `B(x) = I − B₀ + Σ_{i≥1} Bᵢ·(−x)/(x − bᵢ)`, so that `Y(qx) = B(x)Y(x)`.
    pub fn eval_b(&self, x: C64) -> Result<CMatrix> {
        self.check_pole(x)?;
        let mut out = self.b_at_zero();
        for i in 1..self.poles.len() {
            out += &self.matrices[i] * (-x / (x - self.poles[i]));
        }
        Ok(out)
    }

    /// `Σ Bᵢ/(x − bᵢ)`.
    pub fn coefficient(&self, x: C64) -> Result<CMatrix> {
        if x == C64::new(0.0, 0.0) {
            return Err(Error::Pole("x = 0".into()));
        }
        self.check_pole(x)?;
        let mut out = CMatrix::zeros(self.m(), self.m());
        for (b, p) in self.matrices.iter().zip(&self.poles) {
            out += b / (x - p);
        }
        Ok(out)
    }

    /// Normalised residual of the system at `x` given `Y(x)` and `Y(qx)`.
    pub fn residual_at(&self, x: C64, y_x: &CVector, y_qx: &CVector) -> Result<f64> {
        let lhs = (y_qx - y_x) / (-x);
        let rhs = self.coefficient(x)? * y_x;
        Ok((lhs - rhs).norm() / (1.0 + y_x.norm()))
    }
}

/// Samples of a vector function on the grid `{qⁿξ : n = start, start+1, …}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub xi: C64,
    pub base: QBase,
    pub start: i64,
    pub values: Vec<CVector>,
}

impl GridFunction {
    pub fn end(&self) -> i64 {
        self.start + self.values.len() as i64 - 1
    }

    pub fn point(&self, n: i64) -> C64 {
        self.base.powi(n) * self.xi
    }

    pub fn get(&self, n: i64) -> Option<&CVector> {
        if n < self.start || n > self.end() {
            None
        } else {
            Some(&self.values[(n - self.start) as usize])
        }
    }

    /// Scalar sequence of one component.
    pub fn component(&self, k: usize) -> Vec<C64> {
        self.values.iter().map(|v| v[k]).collect()
    }

    /// Geometric ratio `‖Y(q^{n+1}ξ)‖/‖Y(qⁿξ)‖` measured at the last samples.
    pub fn decay_pos(&self) -> Option<f64> {
        let k = self.values.len();
        (k >= 2).then(|| self.values[k - 1].norm() / self.values[k - 2].norm())
    }

    /// Ratio `‖Y(q^{n−1}ξ)‖/‖Y(qⁿξ)‖` measured at the first samples.
    pub fn decay_neg(&self) -> Option<f64> {
        (self.values.len() >= 2).then(|| self.values[0].norm() / self.values[1].norm())
    }
}

/// Iterate `Y(qx) = B(x)Y(x)` from `x0` for `steps` steps; `direction = −1`
/// runs backwards with `B(x/q)⁻¹`.
pub fn propagate(t: &SystemTuple, x0: C64, y0: &CVector, steps: usize, direction: i32) -> Result<GridFunction> {
    if y0.len() != t.m() {
        return Err(Error::Dimension("initial vector has the wrong size".into()));
    }
    let base = *t.base();
    let mut values = vec![y0.clone()];
    match direction {
        1 => {
            for k in 0..steps {
                let x = base.powi(k as i64) * x0;
                let next = t.eval_b(x)? * values.last().unwrap();
                values.push(next);
            }
            Ok(GridFunction { xi: x0, base, start: 0, values })
        }
        -1 => {
            for k in 0..steps {
                let x = base.powi(-(k as i64) - 1) * x0;
                let lu = t.eval_b(x)?.lu();
                let prev = lu
                    .solve(values.last().unwrap())
                    .ok_or_else(|| Error::SingularStep(format!("{x}")))?;
                values.push(prev);
            }
            values.reverse();
            Ok(GridFunction { xi: x0, base, start: -(steps as i64), values })
        }
        _ => Err(Error::Argument("direction must be +1 or −1".into())),
    }
}

/// Residual of `Y` at `x = qⁿξ`.
pub fn residual(t: &SystemTuple, y: &GridFunction, n: i64) -> Result<f64> {
    let (a, b) = match (y.get(n), y.get(n + 1)) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::Argument(format!("grid values at n = {n} and n + 1 are required"))),
    };
    t.residual_at(y.point(n), a, b)
}

/// `(B₀,…) ↦ ((1−q^μ)I + q^μB₀, q^μB₁, …)`: solutions get multiplied by `x^μ`.
pub fn add_mu(t: &SystemTuple, mu: C64) -> SystemTuple {
    let qm = t.base().pow(mu);
    let one = C64::new(1.0, 0.0);
    let mut mats: Vec<CMatrix> = t.matrices().iter().map(|b| b * qm).collect();
    mats[0] += t.identity() * (one - qm);
    SystemTuple { base: t.base, poles: t.poles.clone(), matrices: mats }
}

/// Gauge `Y ↦ (x/b′;q)_∞/(x/bᵢ;q)_∞ · Y` moving pole `bᵢ` to `b′`.
pub fn pole_move(t: &SystemTuple, i: usize, b_new: C64) -> Result<SystemTuple> {
    if i == 0 || i > t.n() {
        return Err(Error::Argument(format!("pole index {i} out of range 1..={}", t.n())));
    }
    if b_new.norm() <= POLE_SEPARATION {
        return Err(Error::PoleCollision("new pole at 0".into()));
    }
    for (j, p) in t.poles().iter().enumerate() {
        if j != i && (p - b_new).norm() <= POLE_SEPARATION {
            return Err(Error::PoleCollision(format!("new pole hits b_{j}")));
        }
    }
    let one = C64::new(1.0, 0.0);
    let bi = t.poles[i];
    let r = b_new / bi;
    let b0 = &t.matrices[0];
    let mut moved = t.b_at_zero() * (one - r) + &t.matrices[i] * r;
    let mut mats = t.matrices.clone();
    for j in 1..=t.n() {
        if j == i {
            continue;
        }
        let bj = t.poles[j];
        moved -= &t.matrices[j] * ((one - r) / (one - bj / b_new));
        mats[j] = &t.matrices[j] * ((one - bj / bi) / (one - bj / b_new));
    }
    mats[i] = moved;
    mats[0] = b0.clone();
    let mut poles = t.poles.clone();
    poles[i] = b_new;
    SystemTuple::new(t.base, poles, mats)
}

/// Block-row tuple shared by the q-, DR- and SY-convolutions: `Gᵢ` has block
/// row `i` equal to `(c·B₀,…,c·B_N)` plus `shift·I` on the diagonal block.
fn block_rows(t: &SystemTuple, scale: C64, shift: C64) -> Vec<CMatrix> {
    let (m, n1) = (t.m(), t.poles.len());
    let d = m * n1;
    (0..n1)
        .map(|i| {
            let mut g = CMatrix::zeros(d, d);
            for j in 0..n1 {
                let mut blk = &t.matrices[j] * scale;
                if j == i {
                    blk += CMatrix::identity(m, m) * shift;
                }
                g.view_mut((i * m, j * m), (m, m)).copy_from(&blk);
            }
            g
        })
        .collect()
}

/// `c^q_λ`: block row `i` of `Gᵢ` is `(q^{−λ}B₀,…,q^{−λ}Bᵢ + (1−q^{−λ})I,…,q^{−λ}B_N)`.
pub fn q_convolution(t: &SystemTuple, lambda: C64) -> SystemTuple {
    let ql = t.base().pow(-lambda);
    let mats = block_rows(t, ql, C64::new(1.0, 0.0) - ql);
    SystemTuple { base: t.base, poles: t.poles.clone(), matrices: mats }
}

/// Classical convolution: `Fᵢ` row `i` is `(B₀,…,Bᵢ + λI,…,B_N)`.
pub fn dr_convolution(t: &SystemTuple, lambda_dr: C64) -> SystemTuple {
    let mats = block_rows(t, C64::new(1.0, 0.0), lambda_dr);
    SystemTuple { base: t.base, poles: t.poles.clone(), matrices: mats }
}

/// SY convolution stored in normal form: `Fᵢ` (i ≥ 1) has row `i` equal to
/// `(B₀,…,Bᵢ − (1−q^λ)I,…,B_N)` and `F₀ = I − F_∞ − ΣFᵢ` with `F_∞ = I − F̂`.
pub fn sy_convolution(t: &SystemTuple, lambda: C64) -> SystemTuple {
    let one = C64::new(1.0, 0.0);
    let shift = -(one - t.base().pow(lambda));
    let mut mats = block_rows(t, one, shift);
    let (m, n1) = (t.m(), t.poles.len());
    let d = m * n1;
    // F̂: every block row equals (B₀,…,B_N).
    let mut fhat = CMatrix::zeros(d, d);
    for i in 0..n1 {
        for j in 0..n1 {
            fhat.view_mut((i * m, j * m), (m, m)).copy_from(&t.matrices[j]);
        }
    }
    let rest = mats[1..].iter().fold(CMatrix::zeros(d, d), |acc, f| acc + f);
    mats[0] = fhat - rest;
    SystemTuple { base: t.base, poles: t.poles.clone(), matrices: mats }
}

/// `ψ_μ`: `F_∞ ↦ F_∞ + (1−q^μ)I`, i.e. `B₀ ↦ B₀ − (1−q^μ)I`.
pub fn psi(t: &SystemTuple, mu: C64) -> SystemTuple {
    let one = C64::new(1.0, 0.0);
    let mut mats = t.matrices.clone();
    mats[0] -= t.identity() * (one - t.base().pow(mu));
    SystemTuple { base: t.base, poles: t.poles.clone(), matrices: mats }
}

/// `𝒦 = ⊕ ker Bᵢ` (blockwise) and `ℒ = ker ΣGᵢ`.
pub fn kl_spaces(t_conv: &SystemTuple, original: &SystemTuple, tol: &TolerancePolicy) -> Result<(Subspace, Subspace)> {
    let k = blockwise_kernels(original, tol);
    if t_conv.m() != k.ambient_dim() || t_conv.poles.len() != original.poles.len() {
        return Err(Error::Dimension("convolved tuple does not match the original".into()));
    }
    let l = linalg::kernel(&t_conv.sum(), tol);
    Ok((k, l))
}

fn blockwise_kernels(original: &SystemTuple, tol: &TolerancePolicy) -> Subspace {
    let (m, n1) = (original.m(), original.poles.len());
    let d = m * n1;
    // A common scale: the identity sets it, so rounding noise in a zero
    // residue is not mistaken for rank.
    let scale = original.matrices.iter().map(linalg::spectral_norm).fold(1.0, f64::max);
    let mut cols = Vec::new();
    for (i, b) in original.matrices.iter().enumerate() {
        let k = linalg::kernel_scaled(b, tol, scale);
        for c in 0..k.dim() {
            let mut v = CVector::zeros(d);
            v.rows_mut(i * m, m).copy_from(&k.basis().column(c));
            cols.push(v);
        }
    }
    Subspace::from_orthonormal(linalg::columns_to_matrix(d, &cols)).expect("blocks are orthogonal")
}

#[derive(Debug, Clone)]
pub struct MCResult {
    pub reduced: SystemTuple,
    pub k_space: Subspace,
    pub l_space: Subspace,
    pub proj: CMatrix,
    pub lift: CMatrix,
}

impl MCResult {
    pub fn dim_k(&self) -> usize {
        self.k_space.dim()
    }

    pub fn dim_l(&self) -> usize {
        self.l_space.dim()
    }

    pub fn quotient_dim(&self) -> usize {
        self.reduced.m()
    }

    /// Largest `‖proj·Gᵢ − Ḡᵢ·proj‖` over `i`.
    pub fn intertwining_defect(&self, conv: &SystemTuple) -> f64 {
        conv.matrices
            .iter()
            .zip(&self.reduced.matrices)
            .map(|(g, gb)| (&self.proj * g - gb * &self.proj).norm() / g.norm().max(1.0))
            .fold(0.0, f64::max)
    }
}

fn reduce(conv: SystemTuple, k: Subspace, l: Subspace, tol: &TolerancePolicy) -> Result<MCResult> {
    let w = linalg::subspace_sum(&k, &l, tol)?;
    let q = linalg::quotient_tuple(&conv.matrices, &w, tol)?;
    if q.reduced.first().map_or(0, |g| g.nrows()) == 0 {
        return Err(Error::Degenerate("middle convolution is the zero space".into()));
    }
    let reduced = SystemTuple::new(conv.base, conv.poles.clone(), q.reduced)?;
    Ok(MCResult { reduced, k_space: k, l_space: l, proj: q.proj, lift: q.lift })
}

/// `mc^q_λ`: the q-convolution acting on `C^{(N+1)m}/(𝒦+ℒ)`. All poles are kept.
pub fn middle_convolution(t: &SystemTuple, lambda: C64, tol: &TolerancePolicy) -> Result<MCResult> {
    let conv = q_convolution(t, lambda);
    let (k, l) = kl_spaces(&conv, t, tol)?;
    reduce(conv, k, l, tol)
}

/// SY middle convolution; `ℒ = ker(F̂ − (1−q^λ)I)` with `F̂ = ΣFᵢ` in normal form.
pub fn sy_middle_convolution(t: &SystemTuple, lambda: C64, tol: &TolerancePolicy) -> Result<MCResult> {
    let conv = sy_convolution(t, lambda);
    let k = blockwise_kernels(t, tol);
    let one = C64::new(1.0, 0.0);
    let shifted = conv.sum() - conv.identity() * (one - t.base().pow(lambda));
    let l = linalg::kernel(&shifted, tol);
    reduce(conv, k, l, tol)
}

/// `Ψ̄_λ = ψ_λ ∘ mc^{SY}_λ`.
pub fn sy_psi_bar(t: &SystemTuple, lambda: C64, tol: &TolerancePolicy) -> Result<SystemTuple> {
    let mc = sy_middle_convolution(t, lambda, tol)?;
    Ok(psi(&mc.reduced, lambda))
}
