//! Named, versioned data cases. Reports refer to these names, never to formulas.

use std::f64::consts::PI;

use fracwave_core::galerkin::{Forcing, IntervalDomain, ProblemData, SpatialData};
use fracwave_core::mode_solver::ModeProblem;
use fracwave_core::special::gamma;
use fracwave_core::{GridFunction, TimeGrid};

use crate::error::{HarnessError, Result};

/// Bumped whenever the definition of an existing case changes.
pub const CASES_VERSION: u32 = 1;

/// Scalar mode problem D^α(y - c₀ - c₁t) + λy = g.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeCase {
    pub name: &'static str,
    pub c0: f64,
    pub c1: f64,
    forcing: OdeForcing,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum OdeForcing {
    Affine(f64, f64),
    /// g ≡ λ, so that g(0) = λc₀ when c₀ = 1.
    Lambda,
    Cosine,
    Square,
}

/// Reference solution available for a convergence study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    /// The closed-form solver is exact for affine forcing.
    ClosedForm,
    /// y = 2t^{α+2}/Γ(α+3), valid for λ = 0.
    Polynomial,
}

const ODE_CASES: &[OdeCase] = &[
    OdeCase { name: "zero", c0: 0.0, c1: 0.0, forcing: OdeForcing::Affine(0.0, 0.0) },
    OdeCase { name: "ml-relaxation", c0: 1.0, c1: 0.0, forcing: OdeForcing::Affine(0.0, 0.0) },
    OdeCase { name: "constant-forcing", c0: 1.0, c1: 0.0, forcing: OdeForcing::Affine(1.0, 0.0) },
    OdeCase { name: "incompatible-constant", c0: 0.0, c1: 0.0, forcing: OdeForcing::Affine(1.0, 0.0) },
    OdeCase { name: "shifted-linear", c0: 1.0, c1: 0.0, forcing: OdeForcing::Affine(1.0, 1.0) },
    OdeCase { name: "smooth-linear", c0: 0.0, c1: 0.0, forcing: OdeForcing::Affine(1.0, 1.0) },
    OdeCase { name: "linear-velocity", c0: 0.0, c1: 1.0, forcing: OdeForcing::Affine(1.0, 1.0) },
    OdeCase { name: "cosine", c0: 1.0, c1: 1.0, forcing: OdeForcing::Cosine },
    OdeCase { name: "compatible", c0: 1.0, c1: 0.0, forcing: OdeForcing::Lambda },
    OdeCase { name: "polynomial", c0: 0.0, c1: 0.0, forcing: OdeForcing::Square },
];

/// Smooth-data family used for the estimate-stability sweep.
pub const SMOOTH_ODE_FAMILY: &[&str] = &["constant-forcing", "linear-velocity", "cosine", "ml-relaxation"];

impl OdeCase {
    pub fn lookup(name: &str) -> Result<Self> {
        ODE_CASES.iter().find(|c| c.name == name).copied().ok_or_else(|| {
            let known: Vec<_> = ODE_CASES.iter().map(|c| c.name).collect();
            HarnessError::Usage(format!("unknown ODE case '{name}', expected one of {}", known.join(", ")))
        })
    }

    pub fn names() -> impl Iterator<Item = &'static str> {
        ODE_CASES.iter().map(|c| c.name)
    }

    /// (g(t), g'(0)) for damping λ.
    fn forcing(&self, t: f64, lambda: f64) -> (f64, f64) {
        match self.forcing {
            OdeForcing::Affine(a, b) => (a + b * t, b),
            OdeForcing::Lambda => (lambda, 0.0),
            OdeForcing::Cosine => (t.cos(), 0.0),
            OdeForcing::Square => (t * t, 0.0),
        }
    }

    pub fn problem(&self, alpha: f64, lambda: f64, grid: TimeGrid) -> Result<ModeProblem> {
        let g = GridFunction::from_fn(grid, |t| self.forcing(t, lambda).0)?;
        let (g0, g1) = self.forcing(0.0, lambda);
        Ok(ModeProblem::new(alpha, lambda, self.c0, self.c1, g)?.with_g0(g0).with_g1(g1))
    }

    /// Damping values the case is run at; the polynomial case is defined for λ = 0 only.
    pub fn lambdas(&self, configured: &[f64]) -> Vec<f64> {
        match self.forcing {
            OdeForcing::Square => vec![0.0],
            _ => configured.to_vec(),
        }
    }

    pub fn reference(&self, lambda: f64) -> Option<Reference> {
        match self.forcing {
            OdeForcing::Affine(..) | OdeForcing::Lambda => Some(Reference::ClosedForm),
            OdeForcing::Square if lambda == 0.0 => Some(Reference::Polynomial),
            _ => None,
        }
    }
}

pub fn polynomial_reference(alpha: f64, grid: TimeGrid) -> Result<GridFunction> {
    let c = 2.0 / gamma(alpha + 3.0);
    Ok(GridFunction::from_fn(grid, |t| c * t.powf(alpha + 2.0))?)
}

/// Interval length of every PDE case.
pub const PDE_LENGTH: f64 = PI;

/// Normalised Dirichlet eigenfunction on (0,π).
pub fn phi(k: usize, x: f64) -> f64 {
    (2.0 / PI).sqrt() * (k as f64 * x).sin()
}

type ExactField = fn(f64, f64, f64) -> f64;

pub struct PdeCase {
    pub name: &'static str,
    /// Modes that may be non-zero; others must stay at zero.
    pub active_modes: Option<&'static [usize]>,
    /// Exact solution u(α, x, t) when known.
    pub exact: Option<ExactField>,
    build: fn(f64, f64) -> fracwave_core::Result<ProblemData>,
}

impl std::fmt::Debug for PdeCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PdeCase").field("name", &self.name).finish()
    }
}

fn sine(terms: &[(usize, f64)]) -> SpatialData {
    SpatialData::SinePolynomial(terms.to_vec())
}

fn bump(x: f64) -> f64 {
    x * (PI - x)
}

const PDE_CASES: &[PdeCase] = &[
    PdeCase {
        name: "zero",
        active_modes: Some(&[]),
        exact: Some(|_, _, _| 0.0),
        build: |a, t| ProblemData::new(a, t, SpatialData::Zero, SpatialData::Zero, Forcing::Zero),
    },
    PdeCase {
        name: "single-mode-ic",
        active_modes: Some(&[1]),
        exact: None,
        build: |a, t| ProblemData::new(a, t, sine(&[(1, 1.0)]), SpatialData::Zero, Forcing::Zero),
    },
    PdeCase {
        name: "incompatible-ic",
        active_modes: Some(&[1, 2, 3]),
        exact: None,
        build: |a, t| ProblemData::new(a, t, sine(&[(1, 1.0), (3, 1.0 / 3.0)]), sine(&[(2, 0.5)]), Forcing::Zero),
    },
    PdeCase {
        name: "compatible-ic",
        active_modes: Some(&[1]),
        exact: Some(|_, x, _| phi(1, x)),
        build: |a, t| {
            Ok(ProblemData::new(a, t, sine(&[(1, 1.0)]), SpatialData::Zero, Forcing::mode(1, |_| 1.0))?
                .with_initial_rate(SpatialData::Zero))
        },
    },
    PdeCase {
        name: "forced-mode2",
        active_modes: Some(&[2]),
        exact: None,
        build: |a, t| {
            Ok(ProblemData::new(a, t, SpatialData::Zero, SpatialData::Zero, Forcing::function(|x, _| phi(2, x)))?
                .with_initial_slice(sine(&[(2, 1.0)]))
                .with_initial_rate(SpatialData::Zero))
        },
    },
    PdeCase {
        name: "manufactured-poly",
        active_modes: Some(&[1]),
        exact: Some(|_, x, t| (1.0 + t * t) * phi(1, x)),
        build: |a, t| {
            let c = 2.0 / gamma(3.0 - a);
            let f = Forcing::mode(1, move |s| c * s.powf(2.0 - a) + 1.0 + s * s);
            ProblemData::new(a, t, sine(&[(1, 1.0)]), SpatialData::Zero, f)
        },
    },
    PdeCase {
        name: "manufactured-linear",
        active_modes: Some(&[1]),
        exact: Some(|_, x, t| t * phi(1, x)),
        build: |a, t| {
            Ok(ProblemData::new(a, t, SpatialData::Zero, sine(&[(1, 1.0)]), Forcing::mode(1, |s| s))?.with_initial_rate(sine(&[(1, 1.0)])))
        },
    },
    PdeCase {
        name: "initial-velocity",
        active_modes: Some(&[1]),
        exact: None,
        build: |a, t| ProblemData::new(a, t, SpatialData::Zero, sine(&[(1, 1.0)]), Forcing::Zero),
    },
    PdeCase {
        name: "smooth-mixed",
        active_modes: None,
        exact: None,
        build: |a, t| {
            Ok(ProblemData::new(
                a,
                t,
                SpatialData::function(bump),
                SpatialData::function(|x| (2.0 * x).sin()),
                Forcing::function(|x, s| s.cos() * bump(x)),
            )?
            .with_initial_rate(SpatialData::Zero))
        },
    },
];

/// Smooth-data case used for the field-level estimate stability sweep.
pub const SMOOTH_PDE_CASE: &str = "smooth-mixed";

impl PdeCase {
    pub fn lookup(name: &str) -> Result<&'static Self> {
        PDE_CASES.iter().find(|c| c.name == name).ok_or_else(|| {
            let known: Vec<_> = PDE_CASES.iter().map(|c| c.name).collect();
            HarnessError::Usage(format!("unknown PDE case '{name}', expected one of {}", known.join(", ")))
        })
    }

    pub fn names() -> impl Iterator<Item = &'static str> {
        PDE_CASES.iter().map(|c| c.name)
    }

    pub fn data(&self, alpha: f64, final_time: f64) -> Result<ProblemData> {
        Ok((self.build)(alpha, final_time)?)
    }

    pub fn domain(&self, resolution: usize) -> Result<IntervalDomain> {
        Ok(IntervalDomain::new(PDE_LENGTH, resolution)?)
    }
}
