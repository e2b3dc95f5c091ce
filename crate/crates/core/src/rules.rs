//! Discretization settings shared by the pipeline.

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geom::{MAX_BODY_DIM, MIN_BODY_DIM};
use crate::quadrature::{gauss_rule, sphere_rule, Quadrature1D, SphereRule};

/// Tunable resolution knobs. `RuleSet::for_dim` gives the defaults.
#[derive(Clone, Debug, PartialEq)]
pub struct RuleSet {
    /// Level of the `S^{n-2}` rule used inside each section `K ∩ (tξ + ξ^⊥)`.
    pub section_level: usize,
    /// Level of the `S^{n-2}` rule used by the forward Radon transform.
    pub radon_level: usize,
    /// Level of the `S^{n-1}` rule used for support bounds and volumes.
    pub support_level: usize,
    /// Gauss nodes per panel for the regularized t-integral.
    pub gauss_nodes: usize,
    /// Uniform points scanned along each chord before bisection.
    pub scan_points: usize,
    pub bisection_steps: usize,
    /// Base derivative step as a fraction of the support bound.
    pub derivative_step: f64,
    pub execution: Execution,
}

impl RuleSet {
    /// Defaults scaled so that the product rules stay a few hundred nodes in
    /// high dimension.
    pub fn for_dim(n: usize) -> RuleSet {
        let (section, radon, support) = match n {
            3 => (16, 16, 16),
            4 => (10, 10, 10),
            5 => (4, 4, 6),
            6 => (3, 3, 4),
            _ => (2, 2, 3),
        };
        RuleSet {
            section_level: section,
            radon_level: radon,
            support_level: support,
            gauss_nodes: 24,
            scan_points: 64,
            bisection_steps: 40,
            derivative_step: 1.0 / 400.0,
            execution: Execution::default(),
        }
    }
}

/// Precomputed rules for one dimension `n`.
#[derive(Clone, Debug)]
pub struct Rules {
    pub n: usize,
    pub settings: RuleSet,
    /// Rule on `S^{n-2}` for section integrals.
    pub section: SphereRule,
    /// Rule on `S^{n-2}` for the forward transform.
    pub radon: SphereRule,
    /// Rule on `S^{n-1}`.
    pub support: SphereRule,
    /// Gauss-Legendre rule on `[-1, 1]`.
    pub gauss: Quadrature1D,
}

impl Rules {
    pub fn new(n: usize, settings: RuleSet) -> Result<Rules> {
        if !(MIN_BODY_DIM..=MAX_BODY_DIM).contains(&n) {
            return Err(Error::Argument(format!(
                "dimension {n} not in {MIN_BODY_DIM}..={MAX_BODY_DIM}"
            )));
        }
        if settings.scan_points < 2 {
            return Err(Error::Argument("scan_points must be at least 2".into()));
        }
        if !(settings.derivative_step > 0.0 && settings.derivative_step < 0.1) {
            return Err(Error::Argument(format!(
                "derivative step fraction {} not in (0, 0.1)",
                settings.derivative_step
            )));
        }
        Ok(Rules {
            n,
            section: sphere_rule(n - 2, settings.section_level)?,
            radon: sphere_rule(n - 2, settings.radon_level)?,
            support: sphere_rule(n - 1, settings.support_level)?,
            gauss: gauss_rule(settings.gauss_nodes, -1.0, 1.0)?,
            settings,
        })
    }

    pub fn for_dim(n: usize) -> Result<Rules> {
        Rules::new(n, RuleSet::for_dim(n))
    }

    pub fn execution(&self) -> Execution {
        self.settings.execution
    }
}
