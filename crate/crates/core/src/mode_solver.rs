//! The scalar mode equation D_{0+}^α(y - c₀ - c₁t) + λy = g on (0,T),
//! 1 < α < 2, solved by a Mittag-Leffler representation and by product
//! integration of the equivalent Volterra equation, with the closed-form
//! singular parts S̃1, S̃2, S̃3 and the a-priori estimate bookkeeping.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::frac_calculus::{rl_derivative_left, ProductWeights};
use crate::grid::{initial_slope, interior, GridFunction};
use crate::mittag_leffler::{ml_eval, ml_kernel_integral, MlParams};
use crate::sobolev::{h_beta_norm, h_norm_extended, NormOrder};
use crate::special::gamma;

/// One mode equation with its data.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeProblem {
    alpha: f64,
    lambda: f64,
    c0: f64,
    c1: f64,
    g: GridFunction,
    g0: Option<f64>,
    g1: Option<f64>,
    estimate_missing: bool,
}

impl ModeProblem {
    pub fn new(alpha: f64, lambda: f64, c0: f64, c1: f64, g: GridFunction) -> Result<Self> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(FracError::InvalidOrder { order: alpha, reason: "alpha must lie in (1, 2)" });
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(FracError::Domain(format!("lambda = {lambda} must be finite and non-negative")));
        }
        if !(c0.is_finite() && c1.is_finite()) {
            return Err(FracError::Domain("initial data must be finite".into()));
        }
        g.grid().require_intervals(4)?;
        Ok(Self { alpha, lambda, c0, c1, g, g0: None, g1: None, estimate_missing: true })
    }

    /// Exact g(0).
    pub fn with_g0(mut self, g0: f64) -> Self {
        self.g0 = Some(g0);
        self
    }

    /// Exact g'(0).
    pub fn with_g1(mut self, g1: f64) -> Self {
        self.g1 = Some(g1);
        self
    }

    /// Whether absent g(0), g'(0) are estimated from samples (default) or
    /// reported as incomplete data.
    pub fn estimate_missing(mut self, on: bool) -> Self {
        self.estimate_missing = on;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn forcing(&self) -> &GridFunction {
        &self.g
    }

    /// g(0) and whether it was taken from samples.
    pub fn g0(&self) -> Result<(f64, bool)> {
        match self.g0 {
            Some(v) => Ok((v, false)),
            None if self.estimate_missing => Ok((self.g.first(), true)),
            None => Err(FracError::IncompleteData("g(0)")),
        }
    }

    /// g'(0) and whether it was estimated by the second-order one-sided difference.
    pub fn g1(&self) -> Result<(f64, bool)> {
        match self.g1 {
            Some(v) => Ok((v, false)),
            None if self.estimate_missing => Ok((initial_slope(&self.g), true)),
            None => Err(FracError::IncompleteData("g'(0)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMethod {
    ClosedForm,
    Volterra,
}

/// max over interior nodes of |D^α(y - c₀ - c₁t) + λy - g| and the magnitude
/// of the terms it balances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub norm: f64,
    pub scale: f64,
}

impl Residual {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            self.norm
        } else {
            self.norm / self.scale
        }
    }
}

/// S̃1 = (g(0)-λc₀)t^α/Γ(α+1), S̃2 = (g'(0)-λc₁)t^{α+1}/Γ(α+2),
/// S̃3 = -λ(g(0)-λc₀)t^{2α}/Γ(2α+1).
#[derive(Debug, Clone, PartialEq)]
pub struct SingularParts {
    pub s1: GridFunction,
    pub s2: GridFunction,
    pub s3: GridFunction,
    pub g0_estimated: bool,
    pub g1_estimated: bool,
}

impl SingularParts {
    pub fn sum(&self) -> GridFunction {
        let v = self.s1.values().iter().zip(self.s2.values()).zip(self.s3.values()).map(|((a, b), c)| a + b + c);
        GridFunction::from_raw(*self.s1.grid(), v.collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSolution {
    pub y: GridFunction,
    pub s1: GridFunction,
    pub s2: GridFunction,
    pub s3: GridFunction,
    pub method: SolveMethod,
    pub residual: Residual,
    pub g1_estimated: bool,
}

fn power_samples(p: &ModeProblem, coefficient: f64, exponent: f64) -> GridFunction {
    let grid = *p.g.grid();
    let v = grid.nodes().map(|t| if coefficient == 0.0 { 0.0 } else { coefficient * t.powf(exponent) });
    GridFunction::from_raw(grid, v.collect())
}

pub fn singular_parts(p: &ModeProblem) -> Result<SingularParts> {
    let (g0, g0_estimated) = p.g0()?;
    let (g1, g1_estimated) = p.g1()?;
    let a = p.alpha;
    let jump0 = g0 - p.lambda * p.c0;
    let jump1 = g1 - p.lambda * p.c1;
    Ok(SingularParts {
        s1: power_samples(p, jump0 / gamma(a + 1.0), a),
        s2: power_samples(p, jump1 / gamma(a + 2.0), a + 1.0),
        s3: power_samples(p, -p.lambda * jump0 / gamma(2.0 * a + 1.0), 2.0 * a),
        g0_estimated,
        g1_estimated,
    })
}

/// Interior residual of the mode equation evaluated with the corrected
/// fractional derivative.
pub fn residual(p: &ModeProblem, y: &GridFunction) -> Result<Residual> {
    y.check_same_grid(&p.g)?;
    let grid = *y.grid();
    let shifted = GridFunction::from_fn(grid, |t| p.c0 + p.c1 * t)?;
    let d = rl_derivative_left(&y.sub(&shifted)?, p.alpha)?.function;
    let (dv, yv, gv) = (d.values(), y.values(), p.g.values());
    let mut norm: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in interior(&grid) {
        norm = norm.max((dv[i] + p.lambda * yv[i] - gv[i]).abs());
        scale = scale.max(dv[i].abs()).max((p.lambda * yv[i]).abs()).max(gv[i].abs());
    }
    Ok(Residual { norm, scale })
}

fn finish(p: &ModeProblem, y: GridFunction, method: SolveMethod) -> Result<ModeSolution> {
    let parts = singular_parts(p)?;
    let residual = residual(p, &y)?;
    Ok(ModeSolution { y, s1: parts.s1, s2: parts.s2, s3: parts.s3, method, residual, g1_estimated: parts.g1_estimated })
}

/// y = c₀E_{α,1}(-λt^α) + c₁tE_{α,2}(-λt^α) + ∫₀ᵗ s^{α-1}E_{α,α}(-λs^α)g(t-s)ds.
///
/// The secant line a + bt of g is convolved in closed form,
/// a·t^αE_{α,α+1} + b·t^{α+1}E_{α,α+2}; only the remainder, which vanishes
/// at both ends, goes through product quadrature.
pub fn solve_closed_form(p: &ModeProblem) -> Result<ModeSolution> {
    let grid = *p.g.grid();
    let a = p.alpha;
    let gv = p.g.values();
    let g_start = gv[0];
    let g_slope = (p.g.last() - g_start) / grid.final_time();
    let remainder = GridFunction::from_raw(grid, grid.nodes().zip(gv).map(|(t, g)| g - g_start - g_slope * t).collect());
    let forced = ml_kernel_integral(a, p.lambda, &remainder)?;
    let terms = [(p.c0, 1.0, 0.0), (p.c1, 2.0, 1.0), (g_start, a + 1.0, a), (g_slope, a + 2.0, a + 1.0)];
    let params = terms.map(|(_, beta, _)| MlParams::new(a, beta));
    let closed = |i: usize| -> Result<f64> {
        let t = grid.node(i);
        let z = -p.lambda * t.powf(a);
        let mut v = 0.0;
        for ((coefficient, _, power), params) in terms.iter().zip(&params) {
            if *coefficient != 0.0 {
                let e =
                    ml_eval(params.as_ref().map_err(Clone::clone)?, z).map_err(|e| FracError::MlAtNode { node: i, source: Box::new(e) })?;
                v += coefficient * t.powf(*power) * e.value;
            }
        }
        Ok(v)
    };
    let mut y: Vec<f64> = (0..grid.len()).into_par_iter().map(|i| closed(i).map(|c| c + forced.values()[i])).collect::<Result<_>>()?;
    y[0] = p.c0;
    finish(p, GridFunction::new(grid, y)?, SolveMethod::ClosedForm)
}

/// Product-trapezoid discretization of y = c₀ + c₁t + I^α(g - λy); each step
/// is the closed-form solution of a scalar linear equation with diagonal
/// coefficient 1 + λh^α/Γ(α+2).
pub fn solve_volterra(p: &ModeProblem) -> Result<ModeSolution> {
    let grid = *p.g.grid();
    let n = grid.intervals();
    let w = ProductWeights::new(n, grid.step(), p.alpha);
    let g = p.g.values();
    let mut y = vec![0.0; n + 1];
    let mut f = vec![0.0; n + 1];
    y[0] = p.c0;
    f[0] = g[0] - p.lambda * p.c0;
    let diagonal = 1.0 + w.scale * p.lambda;
    for k in 1..=n {
        let history = f[1..k].iter().zip(w.c[1..k].iter().rev()).fold(w.a0[k] * f[0], |s, (fj, c)| s + c * fj);
        y[k] = (p.c0 + p.c1 * grid.node(k) + w.scale * (history + g[k])) / diagonal;
        f[k] = g[k] - p.lambda * y[k];
    }
    finish(p, GridFunction::new(grid, y)?, SolveMethod::Volterra)
}

pub fn solve(p: &ModeProblem, method: SolveMethod) -> Result<ModeSolution> {
    match method {
        SolveMethod::ClosedForm => solve_closed_form(p),
        SolveMethod::Volterra => solve_volterra(p),
    }
}

/// Solves for z = y - S̃1 - S̃2 - S̃3 and returns y = z + S̃1 + S̃2 + S̃3.
///
/// Since D^α S̃1 = g(0)-λc₀, D^α S̃2 = (g'(0)-λc₁)t and D^α S̃3 = -λS̃1, the
/// remainder solves the same equation with forcing g - (g(0)-λc₀) -
/// (g'(0)-λc₁)t - λ(S̃2+S̃3), whose solution is smoother at t = 0.
pub fn solve_with_subtraction(p: &ModeProblem, method: SolveMethod) -> Result<ModeSolution> {
    let parts = singular_parts(p)?;
    let (g0, _) = p.g0()?;
    let (g1, _) = p.g1()?;
    let grid = *p.g.grid();
    let (j0, j1) = (g0 - p.lambda * p.c0, g1 - p.lambda * p.c1);
    let forcing: Vec<f64> = (0..grid.len())
        .map(|i| {
            let t = grid.node(i);
            p.g.values()[i] - j0 - j1 * t - p.lambda * (parts.s2.values()[i] + parts.s3.values()[i])
        })
        .collect();
    let mut reduced = p.clone();
    reduced.g = GridFunction::new(grid, forcing)?;
    reduced.g0 = Some(g0 - j0);
    reduced.g1 = Some(g1 - j1);
    let z = solve(&reduced, method)?;
    let y = z.y.add(&parts.sum())?;
    let mut out = finish(p, y, method)?;
    out.g1_estimated = parts.g1_estimated;
    Ok(out)
}

/// One a-priori estimate evaluated on a solution: discrete LHS, RHS and their ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateEntry {
    pub id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// Reason the estimate does not apply, in which case the numbers are zero.
    pub skipped: Option<String>,
}

impl EstimateEntry {
    fn evaluated(id: &str, lhs: f64, rhs: f64) -> Self {
        let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
        Self { id: id.into(), lhs, rhs, ratio, skipped: None }
    }

    fn skipped(id: &str, reason: &str) -> Self {
        Self { id: id.into(), lhs: 0.0, rhs: 0.0, ratio: 0.0, skipped: Some(reason.into()) }
    }
}

/// Discrete LHS/RHS of the mode estimates for `sol`. λ-weighted terms are
/// dropped on both sides when λ < 1, where the estimates are not stated.
pub fn verify_ode_estimates(p: &ModeProblem, sol: &ModeSolution) -> Result<Vec<EstimateEntry>> {
    let a = p.alpha;
    let lam = if p.lambda >= 1.0 { p.lambda } else { 0.0 };
    let sq = lam.sqrt();
    let (g0, _) = p.g0()?;
    let (g1, _) = p.g1()?;
    let (j0, j1) = ((g0 - p.lambda * p.c0).abs(), (g1 - p.lambda * p.c1).abs());
    let norm = |v: &GridFunction, s: f64| h_norm_extended(v, s);
    let fixed = |v: &GridFunction, s: f64| h_beta_norm(v, NormOrder::new(s)?);
    let y = &sol.y;
    let g = &p.g;
    let r1 = y.sub(&sol.s1)?;
    let r12 = r1.sub(&sol.s2)?;
    let r123 = r12.sub(&sol.s3)?;

    let mut out = Vec::with_capacity(4);
    out.push(EstimateEntry::evaluated("eq:ode-1", norm(y, 0.5 * (a + 1.0))? + sq * y.l2(), g.l2() + sq * p.c0.abs() + p.c1.abs()));
    out.push(EstimateEntry::evaluated(
        "eq:ode-2-1",
        norm(&r1, 0.5 * (a + 3.0))? + sq * fixed(y, 1.0)? + lam * y.l2(),
        fixed(g, 1.0)? + sq * p.c0.abs() + lam * p.c1.abs() + lam * j0,
    ));
    let h2_rhs = fixed(g, 2.0)? + lam * (p.c0.abs() + p.c1.abs() + j0 + j1);
    if a > 1.5 {
        out.push(EstimateEntry::evaluated("eq:ode-2-2", norm(&r12, 0.5 * (a + 5.0))? + sq * fixed(y, 2.0)? + lam * fixed(y, 1.0)?, h2_rhs));
    } else {
        out.push(EstimateEntry::skipped("eq:ode-2-2", "requires 1.5 < alpha < 2"));
    }
    out.push(EstimateEntry::evaluated(
        "rem:ode",
        norm(&r123, 0.5 * (a + 5.0))? + sq * fixed(&r1, 2.0)? + lam * fixed(y, 1.0)?,
        fixed(g, 2.0)? + lam * (p.c0.abs() + p.c1.abs() + j1) + lam * lam * j0,
    ));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;

    fn problem(n: usize, alpha: f64, lambda: f64, c0: f64, c1: f64, g: impl Fn(f64) -> f64) -> ModeProblem {
        let grid = TimeGrid::new(1.0, n).unwrap();
        ModeProblem::new(alpha, lambda, c0, c1, GridFunction::from_fn(grid, g).unwrap()).unwrap()
    }

    #[test]
    fn steady_state_is_reproduced() {
        let p = problem(256, 1.5, 2.0, 1.0, 0.0, |_| 2.0);
        for sol in [solve_closed_form(&p).unwrap(), solve_volterra(&p).unwrap()] {
            assert!(sol.y.values().iter().all(|v| (v - 1.0).abs() < 1e-9), "{:?}", sol.method);
            assert_eq!(sol.s1.max_abs(), 0.0);
        }
    }

    #[test]
    fn initial_value_is_exact() {
        let p = problem(64, 1.3, 5.0, 0.7, -2.0, |t| t.cos());
        assert_eq!(solve_closed_form(&p).unwrap().y.first(), 0.7);
        assert_eq!(solve_volterra(&p).unwrap().y.first(), 0.7);
    }

    #[test]
    fn missing_slope_is_estimated_or_rejected() {
        let p = problem(64, 1.5, 1.0, 0.0, 0.0, |t| 1.0 + 3.0 * t * t);
        let (g1, est) = p.g1().unwrap();
        assert!(est && g1.abs() < 1e-12);
        let strict = p.clone().estimate_missing(false);
        assert_eq!(singular_parts(&strict).unwrap_err(), FracError::IncompleteData("g(0)"));
        let strict = strict.with_g0(1.0);
        assert_eq!(singular_parts(&strict).unwrap_err(), FracError::IncompleteData("g'(0)"));
        assert!(singular_parts(&strict.with_g1(0.0)).is_ok());
    }
}
