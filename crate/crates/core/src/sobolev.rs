//! Discrete Sobolev norms H^β(0,T), β ∈ [0,3], their Bochner aggregation over
//! modes and the D^{(α-1)/2} norm-equivalence ratios.
//!
//! ‖v‖²_{H^β} = ‖v‖² + Σ_{1≤j≤⌊β⌋} ‖v^{(j)}‖² + |v^{(⌊β⌋)}|²_σ with σ = β - ⌊β⌋ and
//! the Slobodeckij seminorm |w|²_σ = ∬ |w(t)-w(s)|²/|t-s|^{1+2σ}.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::frac_calculus::{rl_derivative_left, rl_derivative_right, rl_integral_left, rl_integral_right};
use crate::grid::{first_difference, second_difference, GridFunction};
use crate::special::{gamma, zeta};

/// A Sobolev order β ∈ [0,3].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormOrder(f64);

impl NormOrder {
    pub fn new(beta: f64) -> Result<Self> {
        if (0.0..=3.0).contains(&beta) {
            Ok(Self(beta))
        } else {
            Err(FracError::UnsupportedNorm(beta))
        }
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    pub fn integer_part(&self) -> usize {
        self.0.floor() as usize
    }

    pub fn fractional_part(&self) -> f64 {
        self.0 - self.0.floor()
    }
}

/// j-th derivative samples, j ≤ 3, from central differences.
fn derivative(v: &[f64], j: usize, h: f64) -> Vec<f64> {
    match j {
        0 => v.to_vec(),
        1 => first_difference(v, h),
        2 => second_difference(v, h),
        3 => first_difference(&second_difference(v, h), h),
        _ => unreachable!("derivative order above 3"),
    }
}

fn weighted_square(w: &[f64], omega: &[f64]) -> f64 {
    w.iter().zip(omega).map(|(x, o)| o * x * x).sum()
}

/// Slobodeckij seminorm squared of samples `w` with spacing `h`, 0 < σ < 1.
///
/// Pairs with |i-j| ≥ 2 use the tensor trapezoid rule. The band |t-s| < h is
/// replaced by the exact contribution of a locally affine function,
/// ω_i·w'_i²·2h^{2-2σ}(1 - ζ(2σ-1)); the ζ term is the Euler-Maclaurin
/// correction that makes the split rule exact for affine w in the interior.
pub fn slobodeckij_squared(w: &[f64], sigma: f64, h: f64) -> f64 {
    let n = w.len() - 1;
    let omega = crate::quadrature::trapezoid_weights(n, h);
    let expo = 1.0 + 2.0 * sigma;
    let kernel: Vec<f64> = (0..=n).map(|d| if d < 2 { 0.0 } else { (d as f64 * h).powf(-expo) }).collect();
    let row = |i: usize| -> f64 {
        let mut s = 0.0;
        for j in i + 2..=n {
            let d = w[i] - w[j];
            s += omega[j] * d * d * kernel[j - i];
        }
        omega[i] * s
    };
    let rows: Vec<f64> = if n > 256 { (0..=n).into_par_iter().map(row).collect() } else { (0..=n).map(row).collect() };
    let off_band = 2.0 * rows.iter().sum::<f64>();
    let slope = first_difference(w, h);
    let band = weighted_square(&slope, &omega) * 2.0 * h.powf(2.0 - 2.0 * sigma) * (1.0 - zeta(2.0 * sigma - 1.0));
    off_band + band
}

/// ‖v‖²_{H^β}.
pub fn h_beta_norm_squared(v: &GridFunction, order: NormOrder) -> Result<f64> {
    let grid = v.grid();
    grid.require_intervals(8)?;
    let h = grid.step();
    let omega = grid.trapezoid_weights();
    let k = order.integer_part();
    let sigma = order.fractional_part();
    let values = v.values();
    let mut total = weighted_square(values, &omega);
    let mut top = values.to_vec();
    for j in 1..=k {
        top = derivative(values, j, h);
        total += weighted_square(&top, &omega);
    }
    if sigma > 0.0 {
        total += slobodeckij_squared(&top, sigma, h);
    }
    Ok(total)
}

pub fn h_beta_norm(v: &GridFunction, order: NormOrder) -> Result<f64> {
    Ok(h_beta_norm_squared(v, order)?.sqrt())
}

/// ‖v‖²_{H^s} for s ∈ [0, 5]; orders above 3 use ‖v‖² + ‖v'‖² + ‖v''‖²_{H^{s-2}}.
pub fn h_norm_squared_extended(v: &GridFunction, s: f64) -> Result<f64> {
    if s <= 3.0 {
        return h_beta_norm_squared(v, NormOrder::new(s)?);
    }
    if s > 5.0 {
        return Err(FracError::UnsupportedNorm(s));
    }
    let grid = *v.grid();
    grid.require_intervals(8)?;
    let h = grid.step();
    let omega = grid.trapezoid_weights();
    let d1 = first_difference(v.values(), h);
    let d2 = GridFunction::from_raw(grid, second_difference(v.values(), h));
    Ok(weighted_square(v.values(), &omega) + weighted_square(&d1, &omega) + h_beta_norm_squared(&d2, NormOrder::new(s - 2.0)?)?)
}

pub fn h_norm_extended(v: &GridFunction, s: f64) -> Result<f64> {
    Ok(h_norm_squared_extended(v, s)?.sqrt())
}

/// Time coefficients c_k(t), k = 1..K, of a field expanded in an orthonormal basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffStack {
    coefficients: Vec<GridFunction>,
}

impl CoeffStack {
    pub fn new(coefficients: Vec<GridFunction>) -> Result<Self> {
        let first =
            coefficients.first().ok_or_else(|| FracError::PreconditionViolated("a coefficient stack needs at least one mode".into()))?;
        for c in &coefficients[1..] {
            first.check_same_grid(c)?;
        }
        Ok(Self { coefficients })
    }

    pub fn modes(&self) -> usize {
        self.coefficients.len()
    }

    /// Coefficient of mode k (1-based).
    pub fn mode(&self, k: usize) -> &GridFunction {
        &self.coefficients[k - 1]
    }

    pub fn iter(&self) -> impl Iterator<Item = &GridFunction> {
        self.coefficients.iter()
    }

    pub fn grid(&self) -> &crate::grid::TimeGrid {
        self.coefficients[0].grid()
    }
}

/// (Σ_k ‖c_k‖²_{H^β})^{1/2}.
pub fn bochner_norm(stack: &CoeffStack, order: NormOrder) -> Result<f64> {
    Ok(bochner_norm_squared(stack, order.value())?.sqrt())
}

/// Σ_k ‖c_k‖²_{H^s} for s ∈ [0,5] (orders above 3 as in [`h_norm_squared_extended`]).
pub fn bochner_norm_squared(stack: &CoeffStack, s: f64) -> Result<f64> {
    stack.iter().map(|c| h_norm_squared_extended(c, s)).sum()
}

/// The four quantities of the D^{(α-1)/2} norm equivalence and their ratios to ‖v‖²_{H^{(α-1)/2}}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceRatios {
    pub left_squared: f64,
    pub norm_squared: f64,
    pub right_squared: f64,
    pub inner: f64,
    /// ‖D_{0+}^b v‖² / ‖v‖²_{H^b}
    pub left_ratio: f64,
    /// ‖D_{T-}^b v‖² / ‖v‖²_{H^b}
    pub right_ratio: f64,
    /// (D_{0+}^b v, D_{T-}^b v) / ‖v‖²_{H^b}
    pub inner_ratio: f64,
}

/// Ratios of ‖D_{0+}^b v‖², (D_{0+}^b v, D_{T-}^b v) and ‖D_{T-}^b v‖² to
/// ‖v‖²_{H^b}, b = (α-1)/2; all must be positive for the equivalence to hold.
pub fn equivalence_ratio(v: &GridFunction, alpha: f64) -> Result<EquivalenceRatios> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(FracError::InvalidOrder { order: alpha, reason: "alpha must lie in (1, 2)" });
    }
    if v.max_abs() == 0.0 {
        return Err(FracError::UndefinedRatio);
    }
    let b = 0.5 * (alpha - 1.0);
    let grid = *v.grid();
    let n = grid.intervals();
    let t_final = grid.final_time();
    // D_{0+}^b v = v(0)t^{-b}/Γ(1-b) + D_{0+}^b(v - v(0)) and its mirror at T: the
    // endpoint singularities are integrated in closed form, the bounded
    // remainders by the trapezoid rule and by product integration against t^{-b}.
    let (v0, vt) = (v.first(), v.last());
    let shifted = |c: f64| GridFunction::from_raw(grid, v.values().iter().map(|x| x - c).collect());
    let mut wl = rl_derivative_left(&shifted(v0), b)?.function.into_values();
    let mut wr = rl_derivative_right(&shifted(vt), b)?.function.into_values();
    wl[0] = 0.0;
    wr[n] = 0.0;
    let (wl, wr) = (GridFunction::from_raw(grid, wl), GridFunction::from_raw(grid, wr));
    let q = 1.0 - b;
    // ∫ t^{-b} w = Γ(1-b)·(I_{T-}^{1-b} w)(0), ∫ (T-t)^{-b} w = Γ(1-b)·(I_{0+}^{1-b} w)(T)
    let against_left = |w: &GridFunction| -> Result<f64> { Ok(rl_integral_right(w, q)?.first()) };
    let against_right = |w: &GridFunction| -> Result<f64> { Ok(rl_integral_left(w, q)?.last()) };
    let singular = t_final.powf(1.0 - 2.0 * b) / ((1.0 - 2.0 * b) * gamma(q) * gamma(q));
    let left_squared = v0 * v0 * singular + 2.0 * v0 * against_left(&wl)? + wl.l2_squared();
    let right_squared = vt * vt * singular + 2.0 * vt * against_right(&wr)? + wr.l2_squared();
    let inner = v0 * vt * t_final.powf(1.0 - 2.0 * b) / gamma(2.0 - 2.0 * b)
        + v0 * against_left(&wr)?
        + vt * against_right(&wl)?
        + wl.inner(&wr)?;
    let norm_squared = h_beta_norm_squared(v, NormOrder::new(b)?)?;
    Ok(EquivalenceRatios {
        left_squared,
        norm_squared,
        right_squared,
        inner,
        left_ratio: left_squared / norm_squared,
        right_ratio: right_squared / norm_squared,
        inner_ratio: inner / norm_squared,
    })
}
