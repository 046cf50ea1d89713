//! Two-parameter Mittag-Leffler function E_{α,β}(z) = Σ z^k / Γ(αk + β) on the real line.
//!
//! Branches:
//! - power series for |z| ≤ 5 while it is well conditioned;
//! - for α = 1 and z < 0, Kummer's transform E_{1,β}(z) = e^z ₁F₁(β-1; β; -z)/Γ(β),
//!   whose terms do not alternate;
//! - for z < 0, the Laplace inversion deformed onto the negative real axis:
//!   a real cut integral plus, for 1 < α ≤ 2, the residues of the two complex
//!   conjugate poles s = x^{1/α} e^{±iπ/α};
//! - for z ≤ -30, the asymptotic expansion (same residues plus the algebraic
//!   tail -Σ z^{-k}/Γ(β-αk)), accepted only when its truncation estimate is
//!   below tolerance.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dd::{self, Dd};
use crate::error::{FracError, Result};
use crate::frac_calculus::ProductWeights;
use crate::grid::GridFunction;
use crate::quadrature::integrate;
use crate::special::{gamma, ln_gamma, rgamma, sin_pi};

/// Largest |z| handled by the power series.
pub const Z_SWITCH: f64 = 5.0;
/// Below -Z_ASYM the asymptotic expansion is attempted first.
pub const Z_ASYM: f64 = 30.0;
const ASYM_TERMS: usize = 10;
const DEFAULT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlParams {
    alpha: f64,
    beta: f64,
    tol: f64,
}

impl MlParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        Self::with_tolerance(alpha, beta, DEFAULT_TOLERANCE)
    }

    pub fn with_tolerance(alpha: f64, beta: f64, tol: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(FracError::Domain(format!("alpha = {alpha} outside (0, 2]")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(FracError::Domain(format!("beta = {beta} must be positive")));
        }
        if !(tol > 1e-15 && tol < 1e-6) {
            return Err(FracError::Domain(format!("tolerance {tol} outside (1e-15, 1e-6)")));
        }
        Ok(Self { alpha, beta, tol })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MlBranch {
    Series,
    Kummer,
    Integral,
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlValue {
    pub value: f64,
    pub branch: MlBranch,
    /// The requested tolerance could not be certified in this regime.
    pub accuracy_warning: bool,
}

/// E_{α,β}(z) for z ≤ 0, or 0 < z ≤ 5.
pub fn ml_eval(p: &MlParams, z: f64) -> Result<MlValue> {
    if !z.is_finite() || z > Z_SWITCH {
        return Err(FracError::Domain(format!("argument {z} outside (-inf, {Z_SWITCH}]")));
    }
    if z == 0.0 {
        return Ok(MlValue { value: rgamma(p.beta), branch: MlBranch::Series, accuracy_warning: false });
    }
    if p.alpha == 1.0 && z < 0.0 {
        return Ok(exponential_case(p, -z));
    }
    if z >= -Z_SWITCH {
        let s = ml_series(p, z);
        if s.condition * f64::EPSILON * 4.0 <= p.tol || z > 0.0 {
            let accuracy_warning = s.condition * f64::EPSILON * 4.0 > p.tol;
            return Ok(MlValue { value: s.value, branch: MlBranch::Series, accuracy_warning });
        }
        return ml_integral(p, z);
    }
    if z <= -Z_ASYM {
        if let Some(v) = ml_asymptotic(p, z) {
            return Ok(v);
        }
    }
    ml_integral(p, z)
}

/// Convenience wrapper returning only the value.
pub fn ml(alpha: f64, beta: f64, z: f64) -> Result<f64> {
    Ok(ml_eval(&MlParams::new(alpha, beta)?, z)?.value)
}

/// Power-series value with its condition number Σ|t_k| / |Σ t_k|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    pub value: f64,
    pub condition: f64,
}

fn series_term(alpha: f64, beta: f64, z: f64, k: usize, zpow: f64) -> f64 {
    let arg = alpha * k as f64 + beta;
    if arg < 170.0 && zpow.is_finite() {
        zpow * rgamma(arg)
    } else {
        let mag = (k as f64 * z.abs().ln() - ln_gamma(arg)).exp();
        if z < 0.0 && k % 2 == 1 {
            -mag
        } else {
            mag
        }
    }
}

/// Σ z^k/Γ(αk+β) in f64 with Neumaier compensated summation.
pub fn ml_series(p: &MlParams, z: f64) -> SeriesSum {
    if z == 0.0 {
        return SeriesSum { value: rgamma(p.beta), condition: 1.0 };
    }
    let peak = z.abs().powf(1.0 / p.alpha);
    let (mut sum, mut comp, mut abs_sum) = (0.0f64, 0.0f64, 0.0f64);
    let mut zpow = 1.0;
    for k in 0..5000 {
        let t = series_term(p.alpha, p.beta, z, k, zpow);
        let s = sum + t;
        comp += if sum.abs() >= t.abs() { (sum - s) + t } else { (t - s) + sum };
        sum = s;
        abs_sum += t.abs();
        let past_peak = p.alpha * k as f64 + p.beta > peak + 1.0;
        if k > 0 && past_peak && t.abs() <= 1e-3 * p.tol * (sum + comp).abs() {
            break;
        }
        zpow *= z;
    }
    let value = sum + comp;
    SeriesSum { value, condition: if value == 0.0 { f64::INFINITY } else { abs_sum / value.abs() } }
}

fn exponential_case(p: &MlParams, x: f64) -> MlValue {
    if p.beta == 1.0 {
        return MlValue { value: (-x).exp(), branch: MlBranch::Kummer, accuracy_warning: false };
    }
    if x > 40.0 {
        if let Some(v) = ml_asymptotic(p, -x) {
            return v;
        }
    }
    // e^{-x} Σ_k (β-1)/(β-1+k) x^k/k! / Γ(β); the k = 0 factor is 1.
    let b1 = p.beta - 1.0;
    let (mut sum, mut term) = (1.0f64, 1.0f64);
    for k in 1..10_000 {
        term *= x / k as f64;
        let t = term * b1 / (b1 + k as f64);
        sum += t;
        if k as f64 > x && t.abs() <= 1e-3 * p.tol * sum.abs() {
            break;
        }
    }
    MlValue { value: (-x).exp() * sum * rgamma(p.beta), branch: MlBranch::Kummer, accuracy_warning: false }
}

/// Residue contribution of the poles s = x^{1/α} e^{±iπ/α} (present for α > 1).
fn pole_residues(alpha: f64, beta: f64, x: f64) -> f64 {
    if alpha <= 1.0 {
        return 0.0;
    }
    let rho = x.powf(1.0 / alpha);
    let theta = PI / alpha;
    2.0 / alpha * x.powf((1.0 - beta) / alpha) * (rho * theta.cos()).exp() * (rho * theta.sin() + theta * (1.0 - beta)).cos()
}

/// Asymptotic expansion for large negative z, or `None` when the truncation
/// estimate (the next two terms, or the smallest term once they start to grow)
/// exceeds the tolerance. Term sizes are judged by the envelope
/// |z|^{-k}Γ(αk+1-β)/π of 1/Γ(β-αk) (or 1 when 0 < β-αk < 1), so a term that vanishes near a pole of
/// Γ does not end the series early.
pub fn ml_asymptotic(p: &MlParams, z: f64) -> Option<MlValue> {
    if z >= 0.0 {
        return None;
    }
    let x = -z;
    let max_terms = if p.alpha == 1.0 { 80 } else { ASYM_TERMS };
    let term = |k: usize| -z.powi(-(k as i32)) * rgamma(p.beta - p.alpha * k as f64);
    let envelope = |k: usize| {
        let w = p.beta - p.alpha * k as f64;
        let size = if w >= 1.0 {
            rgamma(w)
        } else if w > 0.0 {
            1.0
        } else {
            (ln_gamma(1.0 - w) - PI.ln()).exp()
        };
        size * x.powi(-(k as i32))
    };
    let mut sum = pole_residues(p.alpha, p.beta, x);
    let mut smallest = f64::INFINITY;
    let mut estimate = None;
    for k in 1..=max_terms {
        let e = envelope(k);
        if e > smallest {
            estimate = Some(smallest);
            break;
        }
        sum += term(k);
        smallest = e;
        if e <= 1e-3 * p.tol * sum.abs() {
            estimate = Some(0.0);
            break;
        }
    }
    let estimate = estimate.unwrap_or_else(|| envelope(max_terms + 1).max(envelope(max_terms + 2)));
    (sum != 0.0 && estimate <= 0.1 * p.tol * sum.abs()).then_some(MlValue {
        value: sum,
        branch: MlBranch::Asymptotic,
        accuracy_warning: false,
    })
}

/// Laplace-inversion representation for z < 0, α ≠ 1.
pub fn ml_integral(p: &MlParams, z: f64) -> Result<MlValue> {
    if z >= 0.0 || p.alpha == 1.0 {
        return Err(FracError::Domain("integral representation needs z < 0 and alpha != 1".into()));
    }
    let (alpha, x) = (p.alpha, -z);
    // The cut integral needs α - β > -1 and loses accuracy as α - β nears -1;
    // lower β with E_{α,β}(z) = (E_{α,β-α}(z) - 1/Γ(β-α)) / z.
    let mut beta = p.beta;
    let mut shifts = Vec::new();
    while alpha - beta <= -0.5 {
        beta -= alpha;
        shifts.push(beta);
    }
    let (cut, err, converged) = cut_integral(alpha, beta, x, p.tol);
    let residues = pole_residues(alpha, beta, x);
    let mut value = residues + cut;
    let mut error = err;
    for b in shifts.iter().rev() {
        value = (value - rgamma(*b)) / z;
        error /= x;
    }
    let accuracy_warning = !converged || error > p.tol * value.abs();
    Ok(MlValue { value, branch: MlBranch::Integral, accuracy_warning })
}

/// (1/π)∫₀^∞ e^{-r} r^{α-β} [r^α sin πβ - x sin π(α-β)] / (r^{2α} + 2x r^α cos πα + x²) dr.
fn cut_integral(alpha: f64, beta: f64, x: f64, tol: f64) -> (f64, f64, bool) {
    let p = alpha - beta;
    let (sb, sab, cpa) = (sin_pi(beta), sin_pi(alpha - beta), (PI * alpha).cos());
    let kernel = |r: f64| {
        let ra = r.powf(alpha);
        (-r).exp() * (ra * sb - x * sab) / (ra * ra + 2.0 * x * ra * cpa + x * x)
    };
    let peak = x.powf(1.0 / alpha);
    let upper = peak.max(1.0) + 60.0;
    let mut breaks = vec![0.0, 1.0, 0.5 * peak, peak, 2.0 * peak, upper];
    breaks.retain(|b| *b <= upper);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let scale = 1.0 / PI;
    let residues = pole_residues(alpha, beta, x).abs();
    let rel = (0.1 * tol).max(2.0 * f64::EPSILON);
    let abs_tol = 0.1 * tol * residues / scale;
    let r = if p < 0.0 {
        // r = u^q with q = 1/(1+p) removes the r^p endpoint singularity.
        let q = 1.0 / (1.0 + p);
        let ubreaks: Vec<f64> = breaks.iter().map(|b| b.powf(1.0 + p)).collect();
        integrate(|u: f64| if u == 0.0 { q * kernel(0.0) } else { q * kernel(u.powf(q)) }, &ubreaks, abs_tol, rel)
    } else {
        integrate(|r: f64| r.powf(p) * kernel(r), &breaks, abs_tol, rel)
    };
    (scale * r.value, scale * r.error, r.converged)
}

/// Relative accuracy of one double-double series term, limited by `dd::ln_gamma`.
const ORACLE_TERM_ACCURACY: f64 = 1e-27;

/// Extended-precision series used as an independent oracle for |z| ≤ 50.
/// Fails with `OracleCancellation` when the alternating terms are so large
/// that the sum cannot reach the requested tolerance (α near 1, |z| near 50).
pub fn ml_oracle(p: &MlParams, z: f64) -> Result<f64> {
    if z.is_nan() || z.abs() > 50.0 {
        return Err(FracError::OracleOutOfRange(z.abs()));
    }
    if z == 0.0 {
        return Ok(rgamma(p.beta));
    }
    let ln_abs_z = Dd::new(z.abs()).ln();
    let peak = z.abs().powf(1.0 / p.alpha);
    let mut sum = Dd::ZERO;
    let mut largest: f64 = 0.0;
    for k in 0..5000usize {
        let arg = Dd::new(p.alpha).mul_f64(k as f64) + Dd::new(p.beta);
        let ln_mag = ln_abs_z.mul_f64(k as f64) - dd::ln_gamma(arg);
        let mag = ln_mag.exp();
        largest = largest.max(mag.hi);
        let term = if z < 0.0 && k % 2 == 1 { -mag } else { mag };
        sum = sum + term;
        let past_peak = arg.hi > peak + 1.0;
        if k > 0 && past_peak && mag.hi <= 1e-3 * p.tol * sum.hi.abs() {
            break;
        }
    }
    let value = sum.to_f64();
    if largest * ORACLE_TERM_ACCURACY > p.tol * value.abs() {
        return Err(FracError::OracleCancellation(z));
    }
    Ok(value)
}

/// ∫₀^{t_n} s^{α-1} E_{α,α}(-λ s^α) g(t_n - s) ds at every node, with the
/// weakly singular factor s^{α-1} integrated exactly against the
/// piecewise-linear interpolant of the remaining integrand.
pub fn ml_kernel_integral(alpha: f64, lambda: f64, g: &GridFunction) -> Result<GridFunction> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(FracError::Domain(format!("lambda = {lambda} must be non-negative")));
    }
    let params = MlParams::new(alpha, alpha)?;
    let grid = *g.grid();
    let kernel: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let t = grid.node(i);
            ml_eval(&params, -lambda * t.powf(alpha)).map(|v| v.value).map_err(|e| FracError::MlAtNode { node: i, source: Box::new(e) })
        })
        .collect::<Result<_>>()?;
    let w = ProductWeights::new(grid.intervals(), grid.step(), alpha);
    let scale = gamma(alpha) * w.scale;
    let gv = g.values();
    let out: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|n| {
            if n == 0 {
                return 0.0;
            }
            let mut s = kernel[0] * gv[n] + w.a0[n] * kernel[n] * gv[0];
            for i in 1..n {
                s += w.c[i] * kernel[i] * gv[n - i];
            }
            scale * s
        })
        .collect();
    GridFunction::new(grid, out)
}
