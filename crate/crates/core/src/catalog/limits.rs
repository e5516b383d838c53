//! The q → 1 behaviour of the rank-2 and rank-3 hypergeometric constructions.
//!
//! With `β = α q^ν` (and `γ = α q^{−ν′}`) the matrices divided by `1 − q`
//! tend to Fuchsian residues. The pipeline output is read in the printed basis
//! `P`, so no similarity fitting is involved.

use super::{build, param, registry, Fixture, Params};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, TolerancePolicy, C64};
use crate::system::SystemTuple;

#[derive(Debug, Clone)]
pub struct LimitReport {
    pub name: String,
    pub qs: Vec<f64>,
    /// `max_i |Ḡ_i/(1−q) − A_i|` for each `q`.
    pub distances: Vec<f64>,
    pub ratios: Vec<f64>,
    /// Every matrix the limit calls rank one stays rank one along the sequence.
    pub rank_one: bool,
    pub pass: bool,
}

fn e(p: &Params, k: &str) -> Result<C64> {
    param(p, k)
}

/// Residues of the limiting Fuchsian system at `0` and at `1/α`.
/// `printed` swaps in the entries exactly as they appear in print.
pub fn limit_tuple(name: &str, x: &Params, printed: bool) -> Result<(Vec<CMatrix>, Vec<usize>)> {
    let (l, m, nu) = (e(x, "lambda")?, e(x, "mu")?, e(x, "nu")?);
    let z = C64::new(0.0, 0.0);
    match name {
        "qhg" => Ok((
            vec![linalg::from_rows(&[vec![m - l, nu], vec![z, z]]), linalg::from_rows(&[vec![z, z], vec![m, nu - l]])],
            vec![],
        )),
        "ghg3" => {
            let (lp, mp) = (e(x, "lambda_p")?, e(x, "mu_p")?);
            Ok((
                vec![
                    linalg::from_rows(&[vec![m - l + mp - lp, nu, z], vec![z, mp - lp, m], vec![z, z, z]]),
                    linalg::from_rows(&[
                        vec![z, z, z],
                        vec![z, z, z],
                        vec![mp + m - l, nu + (nu - l) * mp / m, nu - lp - l],
                    ]),
                ],
                vec![1],
            ))
        }
        "ghg3_alt" => {
            let (lp, nup) = (e(x, "lambda_p")?, e(x, "nu_p")?);
            let h1 = if printed { nu - l } else { nu + nup - l };
            Ok((
                vec![
                    linalg::from_rows(&[vec![z, z, z], vec![h1, m - l - lp, (-l * nup + m * nu + m * nup) / nu], vec![z, z, z]]),
                    linalg::from_rows(&[vec![-l - lp + nu + nup, z, m], vec![z, z, z], vec![z, nu, -lp + nup]]),
                ],
                vec![0],
            ))
        }
        _ => Err(Error::UnknownName(format!("{name} has no q → 1 limit (known: qhg, ghg3, ghg3_alt)"))),
    }
}

/// Pipeline matrices at `q`, expressed in the printed basis.
pub fn aligned_at(name: &str, x: &Params, q: f64) -> Result<Vec<CMatrix>> {
    let reg = registry();
    let cons = reg.get(name)?;
    let alpha = x.get("alpha").copied().unwrap_or(c(1.3, 0.0));
    let qq = c(q, 0.0);
    let qpow = |a: C64| (a * qq.ln()).exp();
    let mut p: Params = cons
        .defaults()
        .keys()
        .filter_map(|k| x.get(k).map(|v| (k.clone(), *v)))
        .collect();
    p.insert("q".into(), qq);
    p.insert("alpha".into(), alpha);
    p.insert("beta".into(), alpha * qpow(e(x, "nu")?));
    if let (Some(nup), true) = (x.get("nu_p"), cons.defaults().contains_key("gamma")) {
        p.insert("gamma".into(), alpha * qpow(-nup));
    }
    let tol = TolerancePolicy::default();
    let chain = build(cons, &p, &tol)?;
    let Some(mc) = chain.stages.last().and_then(|s| s.mc.as_ref()) else {
        return Err(Error::Argument(format!("{name} does not end in an mc step")));
    };
    let basis = cons.fixtures(&chain)?.into_iter().find_map(|f| match f {
        Fixture::Basis { p, before, .. } => Some((p, before)),
        _ => None,
    });
    match basis {
        None => Ok(chain.last().matrices().to_vec()),
        Some((pm, before)) => {
            let prev: &SystemTuple = &chain.stages[chain.stages.len() - 2].tuple;
            let drift = prev.matrices().iter().zip(&before).map(|(a, b)| linalg::max_abs_diff(a, b)).fold(0.0, f64::max);
            if drift > 1e-9 {
                return Err(Error::Argument(format!("{name}: pipeline input is not in the printed basis ({drift:.1e})")));
            }
            let pinv = linalg::inverse(&pm).ok_or_else(|| Error::Degenerate("printed P is singular".into()))?;
            let d = mc.result.quotient_dim();
            Ok(mc.conv.matrices().iter().map(|g| (&pinv * g * &pm).view((0, 0), (d, d)).into_owned()).collect())
        }
    }
}

pub fn q_to_1_limit(name: &str, x: &Params, qs: &[f64]) -> Result<LimitReport> {
    let (limit, rank_one_at) = limit_tuple(name, x, false)?;
    let tol = TolerancePolicy::default();
    let mut distances = Vec::new();
    let mut rank_one = true;
    for &q in qs {
        let scaled: Vec<CMatrix> = aligned_at(name, x, q)?.into_iter().map(|g| g / c(1.0 - q, 0.0)).collect();
        let d = scaled.iter().zip(&limit).map(|(g, a)| linalg::max_abs_diff(g, a)).fold(0.0, f64::max);
        distances.push(d);
        for &i in &rank_one_at {
            rank_one &= linalg::numerical_rank(&scaled[i], &tol) == 1;
        }
    }
    let ratios: Vec<f64> = distances.windows(2).map(|w| w[1] / w[0]).collect();
    let pass = rank_one && !ratios.is_empty() && ratios.iter().all(|r| (0.05..=0.2).contains(r));
    Ok(LimitReport { name: name.to_string(), qs: qs.to_vec(), distances, ratios, rank_one, pass })
}
