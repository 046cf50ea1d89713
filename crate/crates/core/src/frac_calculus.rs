//! Riemann-Liouville integrals and derivatives on uniform grids, the power
//! rule oracle and discrete checks of the classical operator identities.
//!
//! Integrals use product-trapezoid weights: the convolution with
//! (t-s)^{β-1}/Γ(β) is integrated exactly against the piecewise-linear
//! interpolant of v. Derivatives are D^m I^{m-β} with m = ⌈β⌉, the integer
//! derivative taken by finite differences. For derivatives the inner integral
//! additionally carries starting weights that make it exact on the singular
//! powers t^σ typical of solutions near t = 0.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::grid::{first_difference, interior, second_difference, GridFunction, TimeGrid};
use crate::special::{binomial, gamma, rgamma};

const PARALLEL_THRESHOLD: usize = 512;

/// Product-trapezoid convolution weights for I^β on N unit-spaced intervals.
///
/// I^β v(t_n) = scale·(a0[n]·v_0 + Σ_{j=1}^{n-1} c[n-j]·v_j + v_n), scale = h^β/Γ(β+2).
#[derive(Debug, Clone)]
pub(crate) struct ProductWeights {
    pub scale: f64,
    pub c: Vec<f64>,
    pub a0: Vec<f64>,
}

// Below this index the closed forms are evaluated directly; above it the
// cancellation-free expansions in 1/k are used.
const SERIES_FROM: usize = 16;
const SERIES_TERMS: usize = 18;

fn second_difference_of_power(k: usize, p: f64) -> f64 {
    let kf = k as f64;
    if k < SERIES_FROM {
        return (kf + 1.0).powf(p) - 2.0 * kf.powf(p) + (kf - 1.0).powf(p);
    }
    // (k+1)^p - 2k^p + (k-1)^p = 2k^p Σ_{m≥1} C(p,2m) k^{-2m}
    let inv2 = 1.0 / (kf * kf);
    let mut pow = inv2;
    let mut sum = 0.0;
    for m in 1..=SERIES_TERMS / 2 {
        sum += binomial(p, 2 * m) * pow;
        pow *= inv2;
    }
    2.0 * kf.powf(p) * sum
}

fn first_weight(n: usize, beta: f64) -> f64 {
    let p = beta + 1.0;
    let nf = n as f64;
    if n < SERIES_FROM {
        return (nf - 1.0).powf(p) - (nf - 1.0 - beta) * nf.powf(beta);
    }
    // (n-1)^{β+1} - (n-1-β)n^β = n^β Σ_{j≥2} (-1)^j C(β+1,j) n^{1-j}
    let inv = 1.0 / nf;
    let mut pow = inv;
    let mut sum = 0.0;
    for j in 2..=SERIES_TERMS {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * binomial(p, j) * pow;
        pow *= inv;
    }
    nf.powf(beta) * sum
}

impl ProductWeights {
    pub fn new(n: usize, h: f64, beta: f64) -> Self {
        let p = beta + 1.0;
        let mut c = vec![1.0; n + 1];
        for (k, ck) in c.iter_mut().enumerate().skip(1) {
            *ck = second_difference_of_power(k, p);
        }
        let mut a0 = vec![0.0; n + 1];
        for (k, ak) in a0.iter_mut().enumerate().skip(1) {
            *ak = first_weight(k, beta);
        }
        Self { scale: h.powf(beta) / gamma(beta + 2.0), c, a0 }
    }

    /// Unscaled bracket at node n.
    #[inline]
    pub fn bracket(&self, v: &[f64], n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        v[1..n].iter().zip(self.c[1..n].iter().rev()).fold(self.a0[n] * v[0] + v[n], |s, (vj, c)| s + c * vj)
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let body = |n: usize| self.scale * self.bracket(v, n);
        if v.len() > PARALLEL_THRESHOLD {
            (0..v.len()).into_par_iter().map(body).collect()
        } else {
            (0..v.len()).map(body).collect()
        }
    }
}

fn validate_integral_order(beta: f64) -> Result<()> {
    if beta.is_finite() && beta > 0.0 {
        Ok(())
    } else {
        Err(FracError::InvalidOrder { order: beta, reason: "integral order must be positive" })
    }
}

/// Left-sided Riemann-Liouville integral I_{0+}^β v by product-trapezoid weights.
pub fn rl_integral_left(v: &GridFunction, beta: f64) -> Result<GridFunction> {
    validate_integral_order(beta)?;
    let grid = *v.grid();
    let w = ProductWeights::new(grid.intervals(), grid.step(), beta);
    Ok(GridFunction::from_raw(grid, w.apply(v.values())))
}

/// Right-sided integral I_{T-}^β v as the time reversal of the left-sided one.
pub fn rl_integral_right(v: &GridFunction, beta: f64) -> Result<GridFunction> {
    Ok(rl_integral_left(&v.reversed(), beta)?.reversed())
}

/// Starting weights that make the product-trapezoid I^β exact on t^σ for each
/// listed exponent, in addition to 1 and t.
#[derive(Debug, Clone)]
pub struct StartCorrection {
    exponents: Vec<f64>,
    // weights[n][j] multiplies v_j, j < exponents.len() + 2
    weights: Vec<Vec<f64>>,
}

/// Keeps exponents that are positive, not within 1e-2 of an integer and not
/// within 1e-2 of each other; near-duplicates make the starting system singular.
pub fn admissible_exponents(candidates: &[f64]) -> Vec<f64> {
    const GAP: f64 = 1e-2;
    let mut kept: Vec<f64> = Vec::new();
    for &s in candidates {
        if s.is_finite() && s > 0.0 && (s - s.round()).abs() >= GAP && kept.iter().all(|k| (k - s).abs() >= GAP) {
            kept.push(s);
        }
    }
    kept
}

impl StartCorrection {
    pub fn new(grid: &TimeGrid, beta: f64, candidates: &[f64]) -> Result<Self> {
        validate_integral_order(beta)?;
        let exponents = admissible_exponents(candidates);
        let n = grid.intervals();
        let size = exponents.len() + 2;
        if exponents.is_empty() {
            return Ok(Self { exponents, weights: Vec::new() });
        }
        grid.require_intervals(size)?;
        let h = grid.step();
        let base = ProductWeights::new(n, h, beta);
        let mut vander = DMatrix::<f64>::zeros(size, size);
        for j in 0..size {
            let x = j as f64;
            vander[(0, j)] = 1.0;
            vander[(1, j)] = x;
            for (q, s) in exponents.iter().enumerate() {
                vander[(q + 2, j)] = if j == 0 { 0.0 } else { x.powf(*s) };
            }
        }
        let lu = vander.lu();
        // Residual of the plain rule on t^σ, rescaled to unit spacing.
        let residuals: Vec<Vec<f64>> = exponents
            .iter()
            .map(|&s| {
                let samples: Vec<f64> = grid.nodes().map(|t| t.powf(s)).collect();
                let plain = base.apply(&samples);
                let coef = gamma(s + 1.0) / gamma(s + beta + 1.0);
                grid.nodes().zip(plain).map(|(t, p)| (coef * t.powf(s + beta) - p) / h.powf(s)).collect()
            })
            .collect();
        let mut weights = Vec::with_capacity(n + 1);
        weights.push(vec![0.0; size]);
        for node in 1..=n {
            let mut rhs = DVector::<f64>::zeros(size);
            for (q, r) in residuals.iter().enumerate() {
                rhs[q + 2] = r[node];
            }
            let sol = lu
                .solve(&rhs)
                .ok_or_else(|| FracError::PreconditionViolated(format!("singular starting system for exponents {exponents:?}")))?;
            weights.push(sol.iter().copied().collect());
        }
        Ok(Self { exponents, weights })
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    fn apply_in_place(&self, v: &[f64], out: &mut [f64]) {
        for (o, w) in out.iter_mut().zip(&self.weights) {
            *o += w.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
        }
    }
}

/// Left-sided integral with starting weights exact on t^σ for the admissible
/// exponents among `exponents` (see [`admissible_exponents`]).
pub fn rl_integral_left_corrected(v: &GridFunction, beta: f64, exponents: &[f64]) -> Result<GridFunction> {
    let grid = *v.grid();
    let mut out = rl_integral_left(v, beta)?.into_values();
    StartCorrection::new(&grid, beta, exponents)?.apply_in_place(v.values(), &mut out);
    Ok(GridFunction::from_raw(grid, out))
}

/// A fractional derivative on the grid. The value at the endpoint where the
/// operator starts (node 0 for left-sided, node N for right-sided) comes from a
/// one-sided stencil and is flagged as extrapolated.
#[derive(Debug, Clone, PartialEq)]
pub struct FracDerivative {
    pub function: GridFunction,
    pub extrapolated_node: usize,
}

impl FracDerivative {
    pub fn values(&self) -> &[f64] {
        self.function.values()
    }
}

fn derivative_integer_order(beta: f64) -> Result<usize> {
    if beta.is_finite() && beta > 0.0 && beta < 2.0 && beta != 1.0 {
        Ok(beta.ceil() as usize)
    } else {
        Err(FracError::UnsupportedOrder(beta))
    }
}

/// Default singular exponents corrected inside D^β: β-1, β, β+1.
pub fn default_exponents(beta: f64) -> [f64; 3] {
    [beta - 1.0, beta, beta + 1.0]
}

/// Left-sided Riemann-Liouville derivative D_{0+}^β = D^m I^{m-β} with the default corrections.
pub fn rl_derivative_left(v: &GridFunction, beta: f64) -> Result<FracDerivative> {
    rl_derivative_left_with(v, beta, &default_exponents(beta))
}

/// As [`rl_derivative_left`] with explicit correction exponents (empty slice: plain scheme).
pub fn rl_derivative_left_with(v: &GridFunction, beta: f64, exponents: &[f64]) -> Result<FracDerivative> {
    let m = derivative_integer_order(beta)?;
    let grid = *v.grid();
    grid.require_intervals(4)?;
    let inner = rl_integral_left_corrected(v, m as f64 - beta, exponents)?;
    let h = grid.step();
    let values = if m == 1 { first_difference(inner.values(), h) } else { second_difference(inner.values(), h) };
    Ok(FracDerivative { function: GridFunction::from_raw(grid, values), extrapolated_node: 0 })
}

/// Right-sided derivative D_{T-}^β by time reversal of the left-sided one.
///
/// Reversal maps d/dt to -d/dt, which supplies the (-1)^m of the definition.
pub fn rl_derivative_right(v: &GridFunction, beta: f64) -> Result<FracDerivative> {
    rl_derivative_right_with(v, beta, &default_exponents(beta))
}

pub fn rl_derivative_right_with(v: &GridFunction, beta: f64, exponents: &[f64]) -> Result<FracDerivative> {
    let left = rl_derivative_left_with(&v.reversed(), beta, exponents)?;
    let n = v.grid().intervals();
    Ok(FracDerivative { function: left.function.reversed(), extrapolated_node: n })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PowerMode {
    Integral,
    Derivative,
}

/// c·t^e; a zero coefficient marks the kernel branch of the derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerTerm {
    pub coefficient: f64,
    pub exponent: f64,
}

impl PowerTerm {
    pub fn eval(&self, t: f64) -> f64 {
        if self.coefficient == 0.0 {
            0.0
        } else {
            self.coefficient * t.powf(self.exponent)
        }
    }
}

/// Analytic image of t^μ under I^β or D^β.
pub fn power_rule(mu: f64, beta: f64, mode: PowerMode) -> Result<PowerTerm> {
    if !(mu.is_finite() && mu > -1.0) {
        return Err(FracError::Domain(format!("power exponent {mu} must exceed -1")));
    }
    validate_integral_order(beta)?;
    match mode {
        PowerMode::Integral => Ok(PowerTerm { coefficient: gamma(mu + 1.0) / gamma(mu + beta + 1.0), exponent: mu + beta }),
        PowerMode::Derivative => {
            let arg = mu + 1.0 - beta;
            let on_pole = arg <= 0.5 && (arg - arg.round()).abs() < 1e-12;
            let coefficient = if on_pole { 0.0 } else { gamma(mu + 1.0) * rgamma(arg) };
            Ok(PowerTerm { coefficient, exponent: mu - beta })
        }
    }
}

/// Pass threshold for identity checks: max(1e-3·scale, 10·h^{3/2}·scale).
pub fn identity_tolerance(scale: f64, h: f64) -> f64 {
    (1e-3 * scale).max(10.0 * h.powf(1.5) * scale)
}

fn interior_max_gap(a: &[f64], b: &[f64], grid: &TimeGrid) -> f64 {
    interior(grid).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
}

/// max over interior nodes of |I^β I^γ v - I^{β+γ} v|.
pub fn check_semigroup(v: &GridFunction, beta: f64, gamma_order: f64) -> Result<f64> {
    let composed = rl_integral_left(&rl_integral_left(v, gamma_order)?, beta)?;
    let direct = rl_integral_left(v, beta + gamma_order)?;
    Ok(interior_max_gap(composed.values(), direct.values(), v.grid()))
}

/// |⟨I_{0+}^β u, v⟩_h - ⟨u, I_{T-}^β v⟩_h| with the trapezoidal inner product.
pub fn check_adjoint(u: &GridFunction, v: &GridFunction, beta: f64) -> Result<f64> {
    u.check_same_grid(v)?;
    let lhs = rl_integral_left(u, beta)?.inner(v)?;
    let rhs = u.inner(&rl_integral_right(v, beta)?)?;
    Ok((lhs - rhs).abs())
}

/// Both sides of a pairing identity and their absolute gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairingGap {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

fn require_vanishing_start(v: &GridFunction, what: &str) -> Result<()> {
    let scale = v.max_abs();
    if v.first().abs() > 1e-10 * scale {
        return Err(FracError::PreconditionViolated(format!("{what} must vanish at t = 0, found {}", v.first())));
    }
    Ok(())
}

/// Split-order pairing (D_{0+}^{(α+1)/2} w, D_{T-}^{(α-1)/2} ψ) for w(0) = 0.
///
/// With q = D_{0+}^{(α-1)/2} w the outer derivative is moved onto the smooth
/// factor: (Dq, χ) = q(T)χ(T) - (q, Dχ), χ = D_{T-}^{(α-1)/2} ψ, q(0) = 0.
pub fn split_pairing(w: &GridFunction, psi: &GridFunction, alpha: f64) -> Result<f64> {
    w.check_same_grid(psi)?;
    let b = 0.5 * (alpha - 1.0);
    let mut q = rl_derivative_left(w, b)?.function.into_values();
    q[0] = 0.0;
    let chi = rl_derivative_right(psi, b)?.function;
    let grid = *w.grid();
    let dchi = GridFunction::from_raw(grid, first_difference(chi.values(), grid.step()));
    let q = GridFunction::from_raw(grid, q);
    Ok(q.last() * chi.last() - q.inner(&dchi)?)
}

/// Discrete check of ⟨D_{0+}^α v, φ⟩ = (D_{0+}^{(α+1)/2} v, D_{T-}^{(α-1)/2} φ)
/// for v(0) = 0 and a test function φ vanishing to second order at both ends.
pub fn check_duality_blm(v: &GridFunction, phi: &GridFunction, alpha: f64) -> Result<PairingGap> {
    v.check_same_grid(phi)?;
    require_vanishing_start(v, "v")?;
    let grid = *v.grid();
    let (h, t_final) = (grid.step(), grid.final_time());
    let scale = phi.max_abs();
    let n = grid.intervals();
    let p = phi.values();
    let slope_bound = 100.0 * h * h * scale / (t_final * t_final);
    if p[0].abs() > 1e-10 * scale
        || p[n].abs() > 1e-10 * scale
        || (p[1] - p[0]).abs() > slope_bound
        || (p[n] - p[n - 1]).abs() > slope_bound
    {
        return Err(FracError::PreconditionViolated("test function must vanish to second order at both endpoints".into()));
    }
    let lhs = rl_derivative_left(v, alpha)?.function.inner(phi)?;
    let rhs = split_pairing(v, phi, alpha)?;
    Ok(PairingGap { lhs, rhs, gap: (lhs - rhs).abs() })
}

/// Leading exponent μ of v ~ c·t^μ near 0 estimated as log2(v_2 / v_1).
pub fn leading_power(v: &GridFunction) -> Option<f64> {
    let (v1, v2) = (v.values()[1], v.values()[2]);
    if v1 == 0.0 || v2 == 0.0 || v1.signum() != v2.signum() {
        return None;
    }
    Some((v2 / v1).log2())
}

/// Interior max gap between I¹(D^α v) and D^α(I¹ v).
///
/// The identity needs v(0) = 0 and D^α v ∈ L², i.e. leading power μ > α - 1/2.
/// I¹(D^α v) integrates the first interval against the power model t^{μ-α};
/// I¹ v carries the starting correction for t^μ.
pub fn check_exchange(v: &GridFunction, alpha: f64) -> Result<f64> {
    derivative_integer_order(alpha)?;
    if v.max_abs() == 0.0 {
        return Ok(0.0);
    }
    require_vanishing_start(v, "v")?;
    let mu = leading_power(v).ok_or_else(|| FracError::PreconditionViolated("leading power of v is not identifiable".into()))?;
    if mu - alpha <= -0.5 {
        return Err(FracError::PreconditionViolated(format!("D^alpha v is not square integrable: leading power {mu:.4} <= alpha - 1/2")));
    }
    let grid = *v.grid();
    let h = grid.step();
    let f = rl_derivative_left(v, alpha)?.function.into_values();
    let n = grid.intervals();
    let mut left = vec![0.0; n + 1];
    left[1] = f[1] * h / (mu - alpha + 1.0);
    for i in 2..=n {
        left[i] = left[i - 1] + 0.5 * h * (f[i - 1] + f[i]);
    }
    let integrated = rl_integral_left_corrected(v, 1.0, &[mu])?;
    let right = rl_derivative_left(&integrated, alpha)?.function;
    Ok(interior_max_gap(&left, right.values(), &grid))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> TimeGrid {
        TimeGrid::new(1.0, n).unwrap()
    }

    #[test]
    fn weight_expansions_match_direct_formulas() {
        for &beta in &[0.25, 0.5, 0.9, 1.5] {
            let p = beta + 1.0;
            for k in [16usize, 17, 40] {
                let kf = k as f64;
                let direct = (kf + 1.0).powf(p) - 2.0 * kf.powf(p) + (kf - 1.0).powf(p);
                let series = second_difference_of_power(k, p);
                assert!((direct - series).abs() < 1e-10 * series.abs(), "{beta} {k}");
                let direct = (kf - 1.0).powf(p) - (kf - 1.0 - beta) * kf.powf(beta);
                assert!((direct - first_weight(k, beta)).abs() < 1e-9 * direct.abs(), "{beta} {k}");
            }
        }
    }

    #[test]
    fn integral_of_one_matches_power_rule() {
        let v = GridFunction::constant(grid(64), 1.0).unwrap();
        let i = rl_integral_left(&v, 0.5).unwrap();
        assert_eq!(i.first(), 0.0);
        assert!((i.last() - 2.0 / std::f64::consts::PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn first_order_integral_is_trapezoid() {
        let v = GridFunction::from_fn(grid(10), |t| t).unwrap();
        let i = rl_integral_left(&v, 1.0).unwrap();
        assert!((i.last() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn right_integral_at_origin() {
        let v = GridFunction::constant(grid(32), 1.0).unwrap();
        let i = rl_integral_right(&v, 0.5).unwrap();
        assert_eq!(i.last(), 0.0);
        assert!((i.first() - 2.0 / std::f64::consts::PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn invalid_orders_are_rejected() {
        let v = GridFunction::constant(grid(8), 1.0).unwrap();
        assert!(matches!(rl_integral_left(&v, 0.0), Err(FracError::InvalidOrder { .. })));
        assert_eq!(rl_derivative_left(&v, 1.0), Err(FracError::UnsupportedOrder(1.0)));
        assert_eq!(rl_derivative_left(&v, 2.5), Err(FracError::UnsupportedOrder(2.5)));
        let coarse = GridFunction::constant(grid(3), 1.0).unwrap();
        assert_eq!(rl_derivative_left(&coarse, 0.5), Err(FracError::GridTooCoarse { n: 3, min: 4 }));
    }

    #[test]
    fn power_rule_branches() {
        let t = power_rule(0.0, 0.5, PowerMode::Integral).unwrap();
        assert!((t.coefficient - 1.0 / gamma(1.5)).abs() < 1e-15);
        assert_eq!(t.exponent, 0.5);
        let d = power_rule(1.5, 1.5, PowerMode::Derivative).unwrap();
        assert!((d.coefficient - gamma(2.5)).abs() < 1e-14);
        assert_eq!(d.exponent, 0.0);
        assert_eq!(power_rule(0.5, 1.5, PowerMode::Derivative).unwrap().coefficient, 0.0);
        assert_eq!(power_rule(1.1 - 2.0, 1.1, PowerMode::Derivative).unwrap().coefficient, 0.0);
        assert!(matches!(power_rule(-1.0, 0.5, PowerMode::Integral), Err(FracError::Domain(_))));
    }

    #[test]
    fn start_correction_is_exact_on_its_exponents() {
        let g = grid(200);
        let beta = 0.5;
        for &s in &[0.5, 1.5, 2.5] {
            let v = GridFunction::from_fn(g, |t| t.powf(s)).unwrap();
            let i = rl_integral_left_corrected(&v, beta, &[0.5, 1.5, 2.5]).unwrap();
            let exact = power_rule(s, beta, PowerMode::Integral).unwrap();
            for (k, t) in g.nodes().enumerate() {
                assert!((i.values()[k] - exact.eval(t)).abs() < 1e-12, "s={s} node {k}");
            }
        }
    }

    #[test]
    fn exchange_rejects_inputs_outside_hypothesis() {
        let v = GridFunction::from_fn(grid(64), |t| t).unwrap();
        assert!(matches!(check_exchange(&v, 1.5), Err(FracError::PreconditionViolated(_))));
        let one = GridFunction::constant(grid(64), 1.0).unwrap();
        assert!(matches!(check_exchange(&one, 1.5), Err(FracError::PreconditionViolated(_))));
    }
}
