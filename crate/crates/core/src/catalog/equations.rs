//! Printed scalar q-difference equations, as coefficient closures.

use super::{param, Params, ScalarEquation};
use crate::error::Result;
use crate::linalg::C64;
use crate::qseries::QBase;

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

/// Second-order equation for the first component of the mc of the basic seed.
pub fn qhg_ytil(p: &Params, base: QBase) -> Result<ScalarEquation> {
    let (l, m, a, b) = (param(p, "lambda")?, param(p, "mu")?, param(p, "alpha")?, param(p, "beta")?);
    let q = base.q();
    let ql = base.pow(l);
    let qlm = base.pow(l - m);
    let qmm = base.pow(-m);
    Ok(ScalarEquation::new("qhg_ytil", 2, -1, 1, 0, move |j, x| match j {
        0 => b * x / ql - q,
        1 => -((qmm * a + b) * x - q - qlm * q),
        _ => qlm * (a * x - q),
    }))
}

/// Third-order equation for `g₁` after `add μ′` and `mc λ′`.
pub fn ghg3_g1(p: &Params, base: QBase) -> Result<ScalarEquation> {
    let (l, m, a, b) = (param(p, "lambda")?, param(p, "mu")?, param(p, "alpha")?, param(p, "beta")?);
    let (lp, mp) = (param(p, "lambda_p")?, param(p, "mu_p")?);
    let e = move |z: C64| base.pow(z);
    Ok(ScalarEquation::new("ghg3_g1", 3, 0, 1, 0, move |j, x| match j {
        3 => a * x - 1.0,
        2 => {
            e(-l - lp)
                * (-(e(m + mp) * b + e(mp) * a + e(l) * a) * x + e(m + mp) + e(l + mp) + e(l + lp))
        }
        1 => {
            e(mp - 2.0 * l - 2.0 * lp)
                * ((e(l) * a + e(m + mp) * b + e(l + m) * b) * x - e(l) * (e(l + lp) + e(m + mp) + e(m + lp)))
        }
        _ => -e(m + 2.0 * mp - l - 2.0 * lp) * (e(-l - lp) * b * x - 1.0),
    }))
}

/// Third-order equation for `g₁` after moving the pole at 1 and `mc λ′`.
///
/// As printed, the coefficients of `g₁(q²x)` and `g₁(qx)` carry an extra
/// factor `(1 − q^{−μ})α²/((β − α)(α − γ))` and the coefficient of `g₁(x)`
/// reads `q^{3−λ−λ′}(q^μ − 1)α²/((β − α)γ)` in front of the two factors.
/// The system gives no extra factor and `−q^{3+μ−λ−λ′}` respectively.
pub fn ghg3_alt_g1(p: &Params, base: QBase, as_printed: bool) -> Result<ScalarEquation> {
    let (l, m, a, b) = (param(p, "lambda")?, param(p, "mu")?, param(p, "alpha")?, param(p, "beta")?);
    let (g, lp) = (param(p, "gamma")?, param(p, "lambda_p")?);
    let q = base.q();
    let e = move |z: C64| base.pow(z);
    let (k, k0) = if as_printed {
        ((one() - e(-m)) * a * a / ((b - a) * (a - g)), (e(m) - 1.0) * a * a / ((b - a) * g))
    } else {
        (one(), -e(m))
    };
    let name = if as_printed { "ghg3_alt_g1_as_printed" } else { "ghg3_alt_g1" };
    Ok(ScalarEquation::new(name, 3, 0, 2, 0, move |j, x| match j {
        3 => (q * g * x - 1.0) * (q * q * g * x - 1.0),
        2 => {
            -e(-l - lp)
                * k
                * (q * q * (e(m) * b + a + e(l) * g) * x - e(l + lp) * (q + 1.0) - e(m) * q * q)
                * (q * g * x - 1.0)
        }
        1 => {
            let x2 = -q * q * (e(m) * a * b + e(l + m) * b * g + e(l) * g * a) * x * x;
            let x1 = q
                * (e(l + lp) * a
                    + e(l + m) * q * a
                    + e(m) * q * b
                    + e(l + lp + m) * b
                    + e(2.0 * l + lp) * g
                    + e(l + lp + m) * q * g)
                * x;
            let x0 = -e(l + lp) * (e(l + lp) + e(m) * q + e(m) * q * q);
            -e(-2.0 * l - 2.0 * lp) * q * k * (x2 + x1 + x0)
        }
        _ => {
            e(-l - lp) * q * q * q * k0
                * (e(-lp) * a * x - 1.0)
                * (e(-l - lp) * b * x - 1.0)
        }
    }))
}

/// Third-order equation for `g₁` of the 3;111;21111 system.
pub fn s46_g1(p: &Params, base: QBase) -> Result<ScalarEquation> {
    let (l, lp) = (param(p, "lambda")?, param(p, "lambda_p")?);
    let (a1, a2, b1, b2, g1) =
        (param(p, "alpha1")?, param(p, "alpha2")?, param(p, "beta1")?, param(p, "beta2")?, param(p, "gamma1")?);
    let q = base.q();
    let e = move |z: C64| base.pow(z);
    let ql = e(l);
    let qllp = e(l + lp);
    let c22 = q * q * (ql * a2 * g1 + a1 * a2 + b1 * b2);
    let c21 = qllp * q * q * g1 + ql * q * q * a1 + q * q * (b1 + b2) + qllp * (1.0 + q) * a2;
    let c13 = q * q * (ql * b1 * b2 * g1 + ql * a1 * a2 * g1 + a1 * b1 * b2);
    let c12 = q
        * (ql * q * (e(lp) * g1 + a1) * (b1 + b2)
            + q * b1 * b2
            + e(2.0 * l + lp) * g1 * (q * a1 + a2)
            + qllp * (a1 * a2 + b1 * b2));
    let c11 = qllp * (qllp * q * (1.0 + q) * g1 + qllp * a2 + ql * q * (1.0 + q) * a1 + q * (1.0 + q) * (b1 + b2));
    let s = 1.0 + q + q * q;
    Ok(ScalarEquation::new("s46_g1", 3, 0, 3, 0, move |j, x| match j {
        3 => (a2 * x - 1.0) * (q * g1 * x - 1.0) * (q * q * g1 * x - 1.0),
        2 => -(one() / qllp) * (c22 * x * x - c21 * x + qllp * s) * (q * g1 * x - 1.0),
        1 => q / (qllp * qllp) * (c13 * x * x * x - c12 * x * x + c11 * x - qllp * qllp * s),
        _ => -q * q * q * (a1 * x / e(lp) - 1.0) * (b1 * x / qllp - 1.0) * (b2 * x / qllp - 1.0),
    }))
}

/// Third-order equation for `g₃` of the 3;21;111111 system.
pub fn s47_g3(p: &Params, base: QBase) -> Result<ScalarEquation> {
    let l = param(p, "lambda")?;
    let (a1, a2, b1, b2) = (param(p, "alpha1")?, param(p, "alpha2")?, param(p, "beta1")?, param(p, "beta2")?);
    let (g1, g2) = (param(p, "gamma1")?, param(p, "gamma2")?);
    let q = base.q();
    // λ′ is pinned by q^{λ+λ′} = α₁α₂/(γ₁γ₂).
    let qlp = a1 * a2 / (g1 * g2 * base.pow(l));
    let (aa, gg, bb) = (a1 * a2, g1 * g2, b1 * b2);
    let (sa, sb, sg) = (a1 + a2, b1 + b2, g1 + q * g2);
    let s = 1.0 + q + q * q;
    let t1 = -(q / aa) * (qlp * q * sb * gg + qlp * aa * sg + q * aa * sa);
    let s4 = q * q * (gg * gg / aa) * (qlp * bb * (1.0 + q) + aa);
    let s3 = -q
        * (gg / (aa * aa))
        * (qlp * q * aa * (aa + gg) * sb + q * (aa * aa + qlp * qlp * bb * gg) * sa + qlp * aa * (aa + q * bb) * sg);
    let s2 = (q / (aa * aa))
        * (qlp * aa * aa * sg * sa
            + qlp * aa * aa * gg * (qlp + 1.0 + q)
            + qlp * aa * gg * (q * sa + qlp * sg) * sb
            + qlp * qlp * q * bb * gg * (aa + gg)
            + q * aa * aa * aa);
    let s1 = -(qlp * (1.0 + q) / aa) * (qlp * q * gg * sb + qlp * aa * sg + q * aa * sa);
    Ok(ScalarEquation::new("s47_g3", 3, 0, 4, 2, move |j, x| match j {
        3 => (g1 * x - 1.0) * (q * g1 * x - 1.0) * (q * g2 * x - 1.0) * (q * q * g2 * x - 1.0),
        2 => {
            -(one() / qlp)
                * (q * q * (gg / aa) * (aa + q * aa + qlp * q * bb) * x * x + t1 * x + qlp * s)
                * (g1 * x - 1.0)
                * (q * g2 * x - 1.0)
        }
        1 => {
            q / (qlp * qlp)
                * (s4 * x.powi(4) + s3 * x.powi(3) + s2 * x * x + s1 * x + qlp * qlp * s)
        }
        _ => {
            -q * q * q
                * (a1 * x / qlp - 1.0)
                * (a2 * x / qlp - 1.0)
                * (b1 * gg * x / aa - 1.0)
                * (b2 * gg * x / aa - 1.0)
        }
    }))
}

/// Third-order equation for `g₃` of the 3;3;21111111 system. The printed
/// coefficient of `g₃(q²x)` carries `(q²γ₂x − 1)`; the system gives `(qγ₂x − 1)`.
pub fn s48_g3(p: &Params, base: QBase, as_printed: bool) -> Result<ScalarEquation> {
    let (a1, a2, a3) = (param(p, "alpha1")?, param(p, "alpha2")?, param(p, "alpha3")?);
    let (b1, b2, b3) = (param(p, "beta1")?, param(p, "beta2")?, param(p, "beta3")?);
    let (g1, g2) = (param(p, "gamma1")?, param(p, "gamma2")?);
    let q = base.q();
    let g2_shift = if as_printed { q * q } else { q };
    let s = 1.0 + q + q * q;
    let aa = a1 * a2;
    let a123 = aa * a3;
    let bbb = b1 * b2 * b3;
    let gg = g1 * g2;
    let sg = g1 + q * g2;
    let sb = b1 + b2 + b3;
    let eb = b1 * b2 + b2 * b3 + b3 * b1;
    let sa12 = a1 + a2;
    let t3 = -q.powi(3) * s * bbb * gg * gg / (aa * aa);
    let t2 = q * q * gg / (aa * aa * a3)
        * ((1.0 + q) * bbb * gg
            + q * a3 * bbb * sg
            + q * a123 * b1 * (b2 + b3)
            + q * aa * a3 * a3 * sa12
            + q * a123 * b2 * b3);
    let t1 = -(q / (aa * aa * a3))
        * ((1.0 + q) * q * a123 * a123 + q * a123 * gg * sb + q * bbb * gg * sa12 + aa * aa * a3 * sg);
    let u5 = q.powi(3) * s * bbb * bbb * gg.powi(4) / (aa.powi(4) * a3);
    let u4 = -(q.powi(3) * bbb * gg.powi(3) / (aa.powi(4) * a3 * a3))
        * (bbb * gg + (1.0 + q) * a3 * bbb * sg + (1.0 + q) * a123 * eb + (1.0 + q) * aa * a3 * a3 * sa12);
    let u3 = q * q * gg * gg / (aa.powi(4) * a3 * a3)
        * (a123 * bbb * sg * (aa + q * a2 * a3 + q * a3 * a1 + q * eb)
            + q * a123 * bbb * gg * sb
            + q * bbb * bbb * gg * (sa12 + q * a3)
            + q * a123 * bbb * (aa * sb + (1.0 + q) * a123)
            + q * a123 * a123 * sa12 * eb
            + q * a123.powi(3));
    let u2 = -(q * q * gg / (aa.powi(3) * a3 * a3))
        * (q * a3 * bbb * gg * sa12 * sb
            + q * aa * a3 * a3 * gg * eb
            + (1.0 + q) * a123 * bbb * gg
            + a123 * bbb * sg * (sa12 + q * a3)
            + a123 * a123 * sg * sb
            + a123 * a123 * (aa + q * a2 * a3 + q * a3 * a1)
            + q * a123 * a123 * eb
            + q * bbb * bbb * gg);
    let u1 = (q / (aa * aa * a3))
        * (q * q * a123 * a123
            + (1.0 + q) * q * a123 * gg * sb
            + (1.0 + q) * aa * aa * a3 * sg
            + (1.0 + q) * q * bbb * gg * sa12);
    let r = gg / aa;
    let name = if as_printed { "s48_g3_as_printed" } else { "s48_g3" };
    Ok(ScalarEquation::new(name, 3, 0, 5, 2, move |j, x| match j {
        3 => {
            (q * q * a3 * x - 1.0)
                * (g1 * x - 1.0)
                * (q * g1 * x - 1.0)
                * (q * g2 * x - 1.0)
                * (q * q * g2 * x - 1.0)
        }
        2 => (t3 * x.powi(3) + t2 * x * x + t1 * x + s) * (g1 * x - 1.0) * (g2_shift * g2 * x - 1.0),
        1 => u5 * x.powi(5) + u4 * x.powi(4) + u3 * x.powi(3) + u2 * x * x + u1 * x - q * s,
        _ => {
            -q.powi(3)
                * (b1 * r * x - 1.0)
                * (b2 * r * x - 1.0)
                * (b3 * r * x - 1.0)
                * (bbb * gg / (a1 * a123) * x - 1.0)
                * (bbb * gg / (a2 * a123) * x - 1.0)
        }
    }))
}
