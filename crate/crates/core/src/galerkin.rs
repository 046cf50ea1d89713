//! Spectral Galerkin solution of D_{0+}^α(u - u₀ - tu₁) - ∂ₓ²u = f on
//! (0,L)×(0,T) with homogeneous Dirichlet conditions. The solution is
//! u = Σ_{k≤K} c_k(t)φ_k with φ_k = √(2/L) sin(kπx/L), λ_k = (kπ/L)², and each
//! c_k solves the mode equation with data (u₀,φ_k), (u₁,φ_k), (f,φ_k).

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::frac_calculus::{split_pairing, PairingGap};
use crate::grid::{initial_slope, GridFunction, TimeGrid};
use crate::mode_solver::{solve, EstimateEntry, ModeProblem, ModeSolution, SolveMethod};
use crate::quadrature::simpson_weights;
use crate::sobolev::{h_norm_squared_extended, CoeffStack};
use crate::special::gamma;

/// The spatial interval (0,L) with M+1 uniform quadrature nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalDomain {
    length: f64,
    resolution: usize,
}

impl IntervalDomain {
    /// `resolution` M must be even (Simpson) and at least 64.
    pub fn new(length: f64, resolution: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(FracError::Domain(format!("interval length {length} must be positive")));
        }
        if resolution < 64 || !resolution.is_multiple_of(2) {
            return Err(FracError::Domain(format!("spatial resolution M = {resolution} must be even and >= 64")));
        }
        Ok(Self { length, resolution })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn node(&self, j: usize) -> f64 {
        if j == self.resolution {
            self.length
        } else {
            j as f64 * self.length / self.resolution as f64
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.resolution).map(|j| self.node(j)).collect()
    }

    pub fn eigenpair(&self, k: usize) -> EigenPair {
        assert!(k >= 1, "sine modes are indexed from 1");
        let w = k as f64 * std::f64::consts::PI / self.length;
        EigenPair { index: k, lambda: w * w, wavenumber: w, amplitude: (2.0 / self.length).sqrt() }
    }

    fn weights(&self) -> Vec<f64> {
        simpson_weights(self.resolution, self.length / self.resolution as f64)
    }

    fn check_aliasing(&self, modes: usize) -> Result<()> {
        if modes == 0 {
            return Err(FracError::PreconditionViolated("at least one mode is required".into()));
        }
        if self.resolution < 4 * modes {
            return Err(FracError::Resolution { m: self.resolution, required: 4 * modes });
        }
        Ok(())
    }
}

/// -φ'' = λφ, φ(0) = φ(L) = 0, ‖φ‖ = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub index: usize,
    pub lambda: f64,
    wavenumber: f64,
    amplitude: f64,
}

impl EigenPair {
    pub fn phi(&self, x: f64) -> f64 {
        self.amplitude * (self.wavenumber * x).sin()
    }
}

pub type SpaceFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type TimeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type SpaceTimeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A function of x ∈ [0,L].
#[derive(Clone)]
pub enum SpatialData {
    Zero,
    Function(SpaceFn),
    /// Σ a_k φ_k, projected exactly.
    SinePolynomial(Vec<(usize, f64)>),
    /// Values at the M+1 domain nodes.
    Samples(Vec<f64>),
}

impl fmt::Debug for SpatialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "Zero"),
            Self::Function(_) => write!(f, "Function(..)"),
            Self::SinePolynomial(terms) => f.debug_tuple("SinePolynomial").field(terms).finish(),
            Self::Samples(v) => write!(f, "Samples({} values)", v.len()),
        }
    }
}

impl SpatialData {
    pub fn function(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::Function(Arc::new(f))
    }

    fn samples(&self, domain: &IntervalDomain) -> Result<Vec<f64>> {
        let xs = domain.nodes();
        let values = match self {
            Self::Zero => vec![0.0; xs.len()],
            Self::Function(f) => xs.iter().map(|&x| f(x)).collect(),
            Self::SinePolynomial(terms) => xs.iter().map(|&x| terms.iter().map(|&(k, a)| a * domain.eigenpair(k).phi(x)).sum()).collect(),
            Self::Samples(v) => {
                if v.len() != xs.len() {
                    return Err(FracError::Domain(format!("{} spatial samples for a domain with {} nodes", v.len(), xs.len())));
                }
                v.clone()
            }
        };
        if let Some(i) = values.iter().position(|v: &f64| !v.is_finite()) {
            return Err(FracError::InvalidInput(i));
        }
        Ok(values)
    }
}

/// The source term f(x,t).
#[derive(Clone)]
pub enum Forcing {
    Zero,
    Function(SpaceTimeFn),
    /// Σ f_k(t)φ_k, projected exactly.
    Modal(Vec<(usize, TimeFn)>),
}

impl fmt::Debug for Forcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "Zero"),
            Self::Function(_) => write!(f, "Function(..)"),
            Self::Modal(terms) => write!(f, "Modal(modes {:?})", terms.iter().map(|t| t.0).collect::<Vec<_>>()),
        }
    }
}

impl Forcing {
    pub fn function(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::Function(Arc::new(f))
    }

    pub fn mode(k: usize, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::Modal(vec![(k, Arc::new(f))])
    }
}

/// Initial data, source and the optional initial slices f(·,0), ∂ₜf(·,0).
#[derive(Debug, Clone)]
pub struct ProblemData {
    pub alpha: f64,
    pub final_time: f64,
    pub u0: SpatialData,
    pub u1: SpatialData,
    pub f: Forcing,
    pub f_initial: Option<SpatialData>,
    pub f_rate: Option<SpatialData>,
}

impl ProblemData {
    pub fn new(alpha: f64, final_time: f64, u0: SpatialData, u1: SpatialData, f: Forcing) -> Result<Self> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(FracError::InvalidOrder { order: alpha, reason: "alpha must lie in (1, 2)" });
        }
        if !(final_time.is_finite() && final_time > 0.0) {
            return Err(FracError::InvalidGrid(format!("final time {final_time} must be positive")));
        }
        Ok(Self { alpha, final_time, u0, u1, f, f_initial: None, f_rate: None })
    }

    pub fn with_initial_slice(mut self, f0: SpatialData) -> Self {
        self.f_initial = Some(f0);
        self
    }

    pub fn with_initial_rate(mut self, ft: SpatialData) -> Self {
        self.f_rate = Some(ft);
        self
    }

    /// u₀ must vanish at both ends of the interval.
    fn check_boundary(&self, domain: &IntervalDomain) -> Result<()> {
        let s = self.u0.samples(domain)?;
        let scale = s.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let tol = 1e-8 * scale;
        if s[0].abs() > tol || s[s.len() - 1].abs() > tol {
            return Err(FracError::PreconditionViolated(format!(
                "u0 must vanish on the boundary, found u0(0) = {}, u0(L) = {}",
                s[0],
                s[s.len() - 1]
            )));
        }
        Ok(())
    }
}

/// Coefficients (v,φ_k), k = 1..K, and the Parseval defect ‖v‖² - Σ coef².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub coefficients: Vec<f64>,
    pub parseval_residual: f64,
}

fn project_samples(values: &[f64], modes: usize, weights: &[f64], basis: &[Vec<f64>]) -> Projection {
    let coefficients: Vec<f64> = (0..modes).map(|k| basis[k].iter().zip(values).zip(weights).map(|((p, v), w)| w * p * v).sum()).collect();
    let norm: f64 = values.iter().zip(weights).map(|(v, w)| w * v * v).sum();
    Projection { parseval_residual: norm - coefficients.iter().map(|c| c * c).sum::<f64>(), coefficients }
}

fn basis_samples(domain: &IntervalDomain, modes: usize) -> Vec<Vec<f64>> {
    let xs = domain.nodes();
    (1..=modes)
        .map(|k| {
            let e = domain.eigenpair(k);
            xs.iter().map(|&x| e.phi(x)).collect()
        })
        .collect()
}

/// (v,φ_k) for k = 1..K by composite Simpson, or exactly for sine polynomials.
pub fn project(v: &SpatialData, domain: &IntervalDomain, modes: usize) -> Result<Projection> {
    domain.check_aliasing(modes)?;
    match v {
        SpatialData::Zero => Ok(Projection { coefficients: vec![0.0; modes], parseval_residual: 0.0 }),
        SpatialData::SinePolynomial(terms) => {
            let mut coefficients = vec![0.0; modes];
            let mut dropped = 0.0;
            for &(k, a) in terms {
                if k == 0 {
                    return Err(FracError::Domain("sine modes are indexed from 1".into()));
                }
                if k <= modes {
                    coefficients[k - 1] += a;
                } else {
                    dropped += a * a;
                }
            }
            Ok(Projection { coefficients, parseval_residual: dropped })
        }
        _ => {
            let values = v.samples(domain)?;
            Ok(project_samples(&values, modes, &domain.weights(), &basis_samples(domain, modes)))
        }
    }
}

/// f_k(t_n) for every mode and time node.
fn project_forcing(f: &Forcing, domain: &IntervalDomain, modes: usize, grid: TimeGrid) -> Result<Vec<Vec<f64>>> {
    match f {
        Forcing::Zero => Ok(vec![vec![0.0; grid.len()]; modes]),
        Forcing::Modal(terms) => {
            let mut out = vec![vec![0.0; grid.len()]; modes];
            for (k, fk) in terms {
                if *k == 0 {
                    return Err(FracError::Domain("sine modes are indexed from 1".into()));
                }
                if *k <= modes {
                    for (o, t) in out[k - 1].iter_mut().zip(grid.nodes()) {
                        *o += fk(t);
                    }
                }
            }
            Ok(out)
        }
        Forcing::Function(func) => {
            let xs = domain.nodes();
            let weights = domain.weights();
            let basis = basis_samples(domain, modes);
            let slices: Vec<Vec<f64>> = (0..grid.len())
                .into_par_iter()
                .map(|n| {
                    let t = grid.node(n);
                    let values: Vec<f64> = xs.iter().map(|&x| func(x, t)).collect();
                    project_samples(&values, modes, &weights, &basis).coefficients
                })
                .collect();
            Ok((0..modes).map(|k| slices.iter().map(|s| s[k]).collect()).collect())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldTag {
    Solution,
    S1,
    S2,
    S3,
}

/// A truncated expansion Σ_{k≤K} c_k(t)φ_k.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub tag: FieldTag,
    pub domain: IntervalDomain,
    pub coefficients: CoeffStack,
}

impl SpectralField {
    pub fn modes(&self) -> usize {
        self.coefficients.modes()
    }

    pub fn grid(&self) -> &TimeGrid {
        self.coefficients.grid()
    }

    /// Coefficients at t, linearly interpolated between grid nodes.
    fn coefficients_at(&self, t: f64) -> Vec<f64> {
        let grid = self.grid();
        let s = t / grid.step();
        let i = (s.floor() as usize).min(grid.intervals() - 1);
        let theta = (s - i as f64).clamp(0.0, 1.0);
        self.coefficients
            .iter()
            .map(|c| {
                let v = c.values();
                if theta == 0.0 {
                    v[i]
                } else if theta == 1.0 {
                    v[i + 1]
                } else {
                    (1.0 - theta) * v[i] + theta * v[i + 1]
                }
            })
            .collect()
    }

    /// Σ_k c_k(t)φ_k(x); exactly zero on the boundary.
    pub fn evaluate(&self, x: f64, t: f64) -> Result<f64> {
        let l = self.domain.length();
        let t_final = self.grid().final_time();
        if !(0.0..=l).contains(&x) || !(0.0..=t_final).contains(&t) {
            return Err(FracError::OutOfDomain { x, t });
        }
        if x == 0.0 || x == l {
            return Ok(0.0);
        }
        let c = self.coefficients_at(t);
        Ok(c.iter().enumerate().map(|(k, ck)| ck * self.domain.eigenpair(k + 1).phi(x)).sum())
    }

    /// ‖·‖_{L²(0,T;L²(Ω))}² of the difference of two fields on the same grid;
    /// modes missing from one side count as zero.
    pub fn l2_distance(&self, other: &SpectralField) -> Result<f64> {
        if self.grid() != other.grid() {
            return Err(FracError::IncompatibleGrids);
        }
        let k = self.modes().max(other.modes());
        let mut total = 0.0;
        for i in 1..=k {
            total += match (i <= self.modes(), i <= other.modes()) {
                (true, true) => self.coefficients.mode(i).sub(other.coefficients.mode(i))?.l2_squared(),
                (true, false) => self.coefficients.mode(i).l2_squared(),
                (false, true) => other.coefficients.mode(i).l2_squared(),
                (false, false) => 0.0,
            };
        }
        Ok(total.sqrt())
    }

    /// (Σ_k λ_k^p ‖c_k‖²_{H^s(0,T)})^{1/2}: p = 0, 1, 2 for L², H₀¹, H² in space.
    pub fn norm(&self, time_order: f64, space_power: i32) -> Result<f64> {
        let mut total = 0.0;
        for (k, c) in self.coefficients.iter().enumerate() {
            let weight = self.domain.eigenpair(k + 1).lambda.powi(space_power);
            total += weight * h_norm_squared_extended(c, time_order)?;
        }
        Ok(total.sqrt())
    }
}

/// (Σ_k λ_k^p a_k²)^{1/2} for spatial coefficients a_k.
pub fn spectral_norm(domain: &IntervalDomain, coefficients: &[f64], space_power: i32) -> f64 {
    coefficients.iter().enumerate().map(|(k, a)| domain.eigenpair(k + 1).lambda.powi(space_power) * a * a).sum::<f64>().sqrt()
}

/// A Galerkin solution together with the per-mode problems that produced it.
#[derive(Debug, Clone)]
pub struct GalerkinSolution {
    pub alpha: f64,
    pub field: SpectralField,
    pub problems: Vec<ModeProblem>,
    pub modes: Vec<ModeSolution>,
    pub u0: Projection,
    pub u1: Projection,
    /// Largest interior residual over the modes relative to the largest term
    /// scale of any mode, so modes that are zero up to roundoff do not count.
    pub max_residual: f64,
}

impl GalerkinSolution {
    pub fn forcing(&self) -> Result<SpectralField> {
        Ok(SpectralField {
            tag: FieldTag::Solution,
            domain: self.field.domain,
            coefficients: CoeffStack::new(self.problems.iter().map(|p| p.forcing().clone()).collect())?,
        })
    }

    /// Mode-wise f_k(0) - λ_k c_{k,0}.
    pub fn initial_defect(&self) -> Result<Vec<f64>> {
        self.problems.iter().map(|p| Ok(p.g0()?.0 - p.lambda() * p.c0())).collect()
    }

    /// Mode-wise f_k'(0) - λ_k c_{k,1}.
    pub fn rate_defect(&self) -> Result<Vec<f64>> {
        self.problems.iter().map(|p| Ok(p.g1()?.0 - p.lambda() * p.c1())).collect()
    }
}

fn initial_coefficients(
    slice: Option<&SpatialData>,
    domain: &IntervalDomain,
    modes: usize,
    fallback: impl Fn(usize) -> Option<f64>,
) -> Result<Vec<Option<f64>>> {
    match slice {
        Some(s) => Ok(project(s, domain, modes)?.coefficients.into_iter().map(Some).collect()),
        None => Ok((0..modes).map(fallback).collect()),
    }
}

fn modal_time_derivative(f: &Forcing, k: usize) -> Option<f64> {
    match f {
        Forcing::Zero => Some(0.0),
        Forcing::Modal(terms) if terms.iter().all(|(j, _)| *j != k) => Some(0.0),
        _ => None,
    }
}

/// Projects the data, solves every mode (concurrently) and assembles u.
pub fn solve_galerkin(
    data: &ProblemData,
    domain: &IntervalDomain,
    modes: usize,
    intervals: usize,
    method: SolveMethod,
) -> Result<GalerkinSolution> {
    domain.check_aliasing(modes)?;
    data.check_boundary(domain)?;
    let grid = TimeGrid::new(data.final_time, intervals)?;
    let u0 = project(&data.u0, domain, modes)?;
    let u1 = project(&data.u1, domain, modes)?;
    let forcing = project_forcing(&data.f, domain, modes, grid)?;
    let f0 = initial_coefficients(data.f_initial.as_ref(), domain, modes, |k| Some(forcing[k][0]))?;
    let f1 = initial_coefficients(data.f_rate.as_ref(), domain, modes, |k| modal_time_derivative(&data.f, k + 1))?;
    let problems: Vec<ModeProblem> = (0..modes)
        .map(|k| {
            let g = GridFunction::new(grid, forcing[k].clone())?;
            let mut p = ModeProblem::new(data.alpha, domain.eigenpair(k + 1).lambda, u0.coefficients[k], u1.coefficients[k], g)?;
            if let Some(v) = f0[k] {
                p = p.with_g0(v);
            }
            if let Some(v) = f1[k] {
                p = p.with_g1(v);
            }
            Ok(p)
        })
        .collect::<Result<_>>()?;
    let solutions: Vec<ModeSolution> = problems
        .par_iter()
        .enumerate()
        .map(|(k, p)| solve(p, method).map_err(|e| FracError::Mode { k: k + 1, source: Box::new(e) }))
        .collect::<Result<_>>()?;
    let worst = solutions.iter().map(|s| s.residual.norm).fold(0.0, f64::max);
    let scale = solutions.iter().map(|s| s.residual.scale).fold(0.0, f64::max);
    let max_residual = if scale == 0.0 { worst } else { worst / scale };
    let field = SpectralField {
        tag: FieldTag::Solution,
        domain: *domain,
        coefficients: CoeffStack::new(solutions.iter().map(|s| s.y.clone()).collect())?,
    };
    Ok(GalerkinSolution { alpha: data.alpha, field, problems, modes: solutions, u0, u1, max_residual })
}

/// The fields S₁, S₂, S₃ of the data, sampled on a grid with N intervals.
///
/// f(·,0) defaults to the source at t = 0; ∂ₜf(·,0) must be supplied unless the
/// source is zero or modal without a component on the mode in question.
pub fn singular_fields(
    data: &ProblemData,
    domain: &IntervalDomain,
    modes: usize,
    intervals: usize,
) -> Result<(SpectralField, SpectralField, SpectralField)> {
    domain.check_aliasing(modes)?;
    let grid = TimeGrid::new(data.final_time, intervals)?;
    let a = data.alpha;
    let u0 = project(&data.u0, domain, modes)?;
    let u1 = project(&data.u1, domain, modes)?;
    let f0 = match &data.f_initial {
        Some(s) => project(s, domain, modes)?.coefficients,
        None => {
            let single = TimeGrid::new(data.final_time, 2)?;
            project_forcing(&data.f, domain, modes, single)?.into_iter().map(|c| c[0]).collect()
        }
    };
    let f1 = initial_coefficients(data.f_rate.as_ref(), domain, modes, |k| modal_time_derivative(&data.f, k + 1))?
        .into_iter()
        .map(|v| v.ok_or(FracError::IncompleteData("time derivative of the source at t = 0")))
        .collect::<Result<Vec<_>>>()?;
    let power = |coefficient: f64, exponent: f64| {
        GridFunction::new(grid, grid.nodes().map(|t| if coefficient == 0.0 { 0.0 } else { coefficient * t.powf(exponent) }).collect())
    };
    let mut s1 = Vec::with_capacity(modes);
    let mut s2 = Vec::with_capacity(modes);
    let mut s3 = Vec::with_capacity(modes);
    for k in 0..modes {
        let lam = domain.eigenpair(k + 1).lambda;
        let d0 = f0[k] - lam * u0.coefficients[k];
        let d1 = f1[k] - lam * u1.coefficients[k];
        s1.push(power(d0 / gamma(a + 1.0), a)?);
        s2.push(power(d1 / gamma(a + 2.0), a + 1.0)?);
        s3.push(power(-lam * d0 / gamma(2.0 * a + 1.0), 2.0 * a)?);
    }
    let field = |tag, c| -> Result<SpectralField> { Ok(SpectralField { tag, domain: *domain, coefficients: CoeffStack::new(c)? }) };
    Ok((field(FieldTag::S1, s1)?, field(FieldTag::S2, s2)?, field(FieldTag::S3, s3)?))
}

/// Modal slopes of u - S₁ at t = 0 against (u₁,φ_k).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeCheck {
    pub slopes: Vec<f64>,
    pub targets: Vec<f64>,
    pub max_gap: f64,
}

pub fn initial_slope_check(u: &SpectralField, s1: &SpectralField, u1: &[f64]) -> Result<SlopeCheck> {
    if u.modes() != s1.modes() || u.modes() != u1.len() {
        return Err(FracError::PreconditionViolated("slope check needs matching mode counts".into()));
    }
    let mut slopes = Vec::with_capacity(u.modes());
    for k in 1..=u.modes() {
        slopes.push(initial_slope(&u.coefficients.mode(k).sub(s1.coefficients.mode(k))?));
    }
    let max_gap = slopes.iter().zip(u1).map(|(s, t)| (s - t).abs()).fold(0.0, f64::max);
    Ok(SlopeCheck { slopes, targets: u1.to_vec(), max_gap })
}

/// Weak form tested with φ = ψ(t)φ_j(x):
/// (D^{(α+1)/2}(c_j - c_{j,0} - c_{j,1}t), D_{T-}^{(α-1)/2}ψ) + λ_j(c_j,ψ) against (f_j,ψ).
pub fn weak_form_residual(solution: &GalerkinSolution, j: usize, psi: &GridFunction) -> Result<PairingGap> {
    if j == 0 || j > solution.modes.len() {
        return Err(FracError::Domain(format!("mode {j} outside 1..={}", solution.modes.len())));
    }
    let p = &solution.problems[j - 1];
    let c = &solution.modes[j - 1].y;
    let grid = *c.grid();
    let start = GridFunction::from_fn(grid, |t| p.c0() + p.c1() * t)?;
    let mut w = c.sub(&start)?.into_values();
    w[0] = 0.0;
    let w = GridFunction::new(grid, w)?;
    let lhs = split_pairing(&w, psi, solution.alpha)? + p.lambda() * c.inner(psi)?;
    let rhs = p.forcing().inner(psi)?;
    Ok(PairingGap { lhs, rhs, gap: (lhs - rhs).abs() })
}

/// Discrete LHS/RHS of the field-level energy and regularity estimates.
pub fn verify_pde_estimates(solution: &GalerkinSolution, s1: &SpectralField, s2: &SpectralField) -> Result<Vec<EstimateEntry>> {
    let a = solution.alpha;
    let u = &solution.field;
    let f = solution.forcing()?;
    let domain = &u.domain;
    let (c0, c1) = (&solution.u0.coefficients, &solution.u1.coefficients);
    let d0 = solution.initial_defect()?;
    let minus = |x: &SpectralField, y: &SpectralField| -> Result<SpectralField> {
        let c = x.coefficients.iter().zip(y.coefficients.iter()).map(|(a, b)| a.sub(b)).collect::<Result<_>>()?;
        Ok(SpectralField { tag: x.tag, domain: x.domain, coefficients: CoeffStack::new(c)? })
    };
    let entry = |id: &str, lhs: f64, rhs: f64| EstimateEntry {
        id: id.into(),
        lhs,
        rhs,
        ratio: if lhs == 0.0 { 0.0 } else { lhs / rhs },
        skipped: None,
    };
    let r1 = minus(u, s1)?;
    let mut out = vec![
        entry(
            "eq:basic_u",
            u.norm(0.5 * (a + 1.0), 0)? + u.norm(0.0, 1)?,
            f.norm(0.0, 0)? + spectral_norm(domain, c0, 1) + spectral_norm(domain, c1, 0),
        ),
        entry(
            "thm:esti-u-i",
            r1.norm(0.5 * (a + 3.0), 0)? + u.norm(1.0, 1)? + u.norm(0.0, 2)?,
            f.norm(1.0, 0)? + spectral_norm(domain, c0, 1) + spectral_norm(domain, c1, 2) + spectral_norm(domain, &d0, 2),
        ),
    ];
    if a > 1.5 {
        let d1 = solution.rate_defect()?;
        let r12 = minus(&r1, s2)?;
        out.push(entry(
            "thm:esti-u-ii",
            r12.norm(0.5 * (a + 5.0), 0)? + u.norm(2.0, 1)? + u.norm(1.0, 2)?,
            f.norm(2.0, 0)?
                + spectral_norm(domain, c0, 2)
                + spectral_norm(domain, c1, 2)
                + spectral_norm(domain, &d0, 2)
                + spectral_norm(domain, &d1, 2),
        ));
    } else {
        out.push(EstimateEntry {
            id: "thm:esti-u-ii".into(),
            lhs: 0.0,
            rhs: 0.0,
            ratio: 0.0,
            skipped: Some("requires 1.5 < alpha < 2".into()),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn eigenpairs_are_normalized_and_increasing() {
        let d = IntervalDomain::new(PI, 256).unwrap();
        let p = project(&SpatialData::function(move |x| d.eigenpair(3).phi(x)), &d, 8).unwrap();
        for (k, c) in p.coefficients.iter().enumerate() {
            let target = if k == 2 { 1.0 } else { 0.0 };
            assert!((c - target).abs() < 1e-10, "k={} {c}", k + 1);
        }
        assert!(d.eigenpair(2).lambda > d.eigenpair(1).lambda);
    }

    #[test]
    fn aliasing_guard() {
        let d = IntervalDomain::new(1.0, 64).unwrap();
        assert_eq!(project(&SpatialData::Zero, &d, 17).unwrap_err(), FracError::Resolution { m: 64, required: 68 });
        assert!(IntervalDomain::new(1.0, 63).is_err());
    }
}
