//! Forward spherical Radon transform and the slice identity linking it to
//! chord lengths.

use std::fmt;
use std::sync::Arc;

use crate::bodies::{zonal_profile, StarBody};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geom::{orthonormal_complement, sphere_area, Direction, VecN};
use crate::quadrature::{embed_rule, gauss_rule, SphereRule};
use crate::rules::Rules;
use crate::sections::{chord_length_through, projection_apex, SectionSampler};

/// A real function on `S^{n-1}`.
#[derive(Clone)]
pub struct SphereFunction {
    pub dim: usize,
    /// Declared `f(x) = f(-x)`.
    pub even: bool,
    eval: Arc<dyn Fn(&VecN) -> f64 + Send + Sync>,
}

impl fmt::Debug for SphereFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SphereFunction")
            .field("dim", &self.dim)
            .field("even", &self.even)
            .finish_non_exhaustive()
    }
}

impl SphereFunction {
    pub fn new<F>(dim: usize, even: bool, f: F) -> Self
    where
        F: Fn(&VecN) -> f64 + Send + Sync + 'static,
    {
        SphereFunction {
            dim,
            even,
            eval: Arc::new(f),
        }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        SphereFunction::new(dim, true, move |_| c)
    }

    /// `u ↦ ρ_K(u)^p`.
    pub fn radial_power(body: &StarBody, p: f64) -> Self {
        let b = body.clone();
        SphereFunction::new(body.dim(), true, move |u| b.radial_at(u).powf(p))
    }

    /// `u ↦ P_d(<u, axis>)`, the degree-`d` zonal harmonic profile.
    pub fn zonal(axis: Direction, d: usize) -> Self {
        let n = axis.dim();
        SphereFunction::new(n, d % 2 == 0, move |u| zonal_profile(n, d, axis.dot(u)))
    }

    #[inline]
    pub fn eval(&self, u: &VecN) -> f64 {
        (self.eval)(u)
    }

    /// `αf + βg`.
    pub fn combine(alpha: f64, f: &SphereFunction, beta: f64, g: &SphereFunction) -> Self {
        let (f, g) = (f.clone(), g.clone());
        SphereFunction::new(f.dim, f.even && g.even, move |u| alpha * f.eval(u) + beta * g.eval(u))
    }
}

/// `Rf(ξ) = ∫_{S^{n-1} ∩ ξ^⊥} f dσ_{n-2}`; `rule` lives on `S^{n-2} ⊂ R^{n-1}`.
pub fn radon(f: &SphereFunction, xi: &Direction, rule: &SphereRule) -> Result<f64> {
    if xi.dim() != f.dim || rule.d + 2 != f.dim {
        return Err(Error::DimensionMismatch {
            expected: f.dim,
            got: xi.dim().min(rule.d + 2),
        });
    }
    let frame = orthonormal_complement(xi.vector())?;
    let embedded = embed_rule(rule, &frame)?;
    Ok(embedded.integrate(|u| f.eval(u)))
}

/// [`radon`] at every grid direction, in grid order.
pub fn radon_field(
    f: &SphereFunction,
    grid: &[Direction],
    rule: &SphereRule,
    exec: Execution,
) -> Result<Vec<f64>> {
    exec.try_map(grid, |xi| radon(f, xi, rule))
}

/// Both sides of `R(ξ ↦ A_ξ(t))(e) = s_{n-3} ∫_t^∞ r (r²-t²)^{(n-4)/2} Φ(r) dr`.
#[derive(Clone, Copy, Debug)]
pub struct SliceIdentity {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

/// Evaluates both sides of the slice identity for `n >= 4`.
///
/// The right side is integrated with the sphere average innermost swapped
/// out: for each `u ∈ S^{n-2} ⊂ e^⊥` the radial integral runs up to the
/// projection radius `R(u)`, with `r = √(t² + x²)` and `x = X(1 - v²)` so
/// that the square-root edge of the chord length becomes smooth.
pub fn slice_identity_residual(
    body: &StarBody,
    e: &Direction,
    t: f64,
    rules: &Rules,
) -> Result<SliceIdentity> {
    let n = body.dim();
    if n < 4 {
        return Err(Error::Unsupported(
            "slice identity kernel is singular for n = 3".into(),
        ));
    }
    if t < 0.0 {
        return Err(Error::Argument(format!("t must be non-negative, got {t}")));
    }
    if e.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: e.dim(),
        });
    }
    let frame = orthonormal_complement(e.vector())?;
    let exec = rules.execution();

    // A_ξ(t) is even in ξ, as is φ(ru) in u.
    let outer = embed_rule(&rules.radon, &frame)?.antipodal_fold();
    let lhs_terms = exec.try_map(&outer.nodes, |v| -> Result<f64> {
        let xi = Direction::new_unchecked(*v);
        Ok(SectionSampler::new(body, &xi, rules)?.area(t))
    })?;
    let lhs: f64 = lhs_terms.iter().zip(&outer.weights).map(|(a, w)| a * w).sum();

    let inner = embed_rule(&rules.section, &frame)?.antipodal_fold();
    let radial = gauss_rule(2 * rules.settings.gauss_nodes, 0.0, 1.0)?;
    let k = (n - 3) as i32;
    let rhs_terms = exec.map(&inner.nodes, |u| {
        let apex = projection_apex(body, e.vector(), u);
        let rp = apex.radius;
        if rp <= t {
            return 0.0;
        }
        let big_x = (rp * rp - t * t).sqrt();
        radial.integrate(|v| {
            let x = big_x * (1.0 - v * v);
            let r = (t * t + x * x).sqrt();
            x.powi(k) * chord_length_through(body, &u.scale(r), e.vector(), apex.slope * r, rules) * 2.0 * big_x * v
        })
    });
    let rhs = sphere_area(n - 3)
        * rhs_terms
            .iter()
            .zip(&inner.weights)
            .map(|(a, w)| a * w)
            .sum::<f64>();
    Ok(SliceIdentity {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::sphere_rule;
    use std::f64::consts::PI;

    fn dir(xs: &[f64]) -> Direction {
        VecN::from_slice(xs).unwrap().normalized().unwrap()
    }

    #[test]
    fn constants_map_to_sphere_area() {
        for n in 3..=6 {
            let f = SphereFunction::constant(n, 2.5);
            let rule = sphere_rule(n - 2, 3).unwrap();
            let xi = dir(&(0..n).map(|i| 0.3 + i as f64).collect::<Vec<_>>());
            assert!((radon(&f, &xi, &rule).unwrap() - 2.5 * sphere_area(n - 2)).abs() < 1e-10);
        }
    }

    #[test]
    fn square_of_normal_component_vanishes() {
        let xi = dir(&[0.3, -0.2, 0.9]);
        let f = SphereFunction::new(3, true, move |u| xi.dot(u).powi(2));
        assert!(radon(&f, &xi, &sphere_rule(1, 16).unwrap()).unwrap().abs() < 1e-14);
    }

    #[test]
    fn field_edge_cases() {
        let f = SphereFunction::constant(4, 1.0);
        let rule = sphere_rule(2, 4).unwrap();
        assert!(radon_field(&f, &[], &rule, Execution::default()).unwrap().is_empty());
        let xi = dir(&[0.1, 0.2, 0.3, 0.4]);
        let g = SphereFunction::new(4, true, |u| (u[0] * u[1]).exp() + u[2] * u[2]);
        let v = radon_field(&g, &[xi, xi.antipode()], &rule, Execution::default()).unwrap();
        assert!((v[0] - v[1]).abs() < 1e-10);
        let ones = radon_field(&f, &[xi, Direction::axis(4, 1)], &rule, Execution::default()).unwrap();
        assert!(ones.iter().all(|x| (x - 4.0 * PI).abs() < 1e-12));
    }

    #[test]
    fn linearity() {
        let rule = sphere_rule(2, 8).unwrap();
        let f = SphereFunction::new(4, true, |u| u[0] * u[0] * u[3] * u[3]);
        let g = SphereFunction::new(4, true, |u| (u[1] + u[2]).cosh());
        let h = SphereFunction::combine(1.5, &f, -0.7, &g);
        let xi = dir(&[0.4, 0.1, -0.5, 0.6]);
        let lhs = radon(&h, &xi, &rule).unwrap();
        let rhs = 1.5 * radon(&f, &xi, &rule).unwrap() - 0.7 * radon(&g, &xi, &rule).unwrap();
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn slice_identity_is_unsupported_in_three_dimensions() {
        let body = StarBody::parse("ball:r=1", 3).unwrap();
        let r = Rules::for_dim(3).unwrap();
        assert!(matches!(
            slice_identity_residual(&body, &Direction::axis(3, 0), 0.0, &r),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn slice_identity_for_the_ball() {
        let body = StarBody::parse("ball:r=1", 4).unwrap();
        let r = Rules::for_dim(4).unwrap();
        let s = slice_identity_residual(&body, &dir(&[0.2, 0.1, 0.4, 0.8]), 0.0, &r).unwrap();
        assert!((s.lhs - 16.0 * PI * PI / 3.0).abs() < 1e-9);
        assert!(s.residual < 1e-5, "{s:?}");
        let far = slice_identity_residual(&body, &Direction::axis(4, 0), 2.5 * body.r_max, &r).unwrap();
        assert_eq!(far.lhs, 0.0);
        assert_eq!(far.rhs, 0.0);
    }
}
