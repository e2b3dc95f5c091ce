//! Gauss rules on intervals and product rules on spheres.
//!
//! Sphere rules use hyperspherical coordinates. On `S^d` the polar angle
//! `θ_1` carries the weight `sin^{d-1} θ_1`; after `x = cos θ_1` this is the
//! Gegenbauer weight `(1-x²)^{(d-2)/2}`, and the nodes/weights for it come
//! from the Golub-Welsch eigenproblem, so every polar factor is exact for
//! polynomials of degree `2L-1` in `x` and total weights are exact for any level.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{arg, Error, Result};
use crate::geom::{OrthoBasis, VecN, MAX_DIM};

/// Largest sphere dimension with a product rule.
pub const MAX_SPHERE_DIM: usize = MAX_DIM - 1;

#[derive(Clone, Debug)]
pub struct Quadrature1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Polynomials of degree up to `degree` are integrated exactly.
    pub degree: usize,
}

impl Quadrature1D {
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Affine copy of a rule on `[-1, 1]` onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> Quadrature1D {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        Quadrature1D {
            nodes: self.nodes.iter().map(|x| mid + half * x).collect(),
            weights: self.weights.iter().map(|w| half * w).collect(),
            degree: self.degree,
        }
    }
}

/// `∫_0^π sin^j θ dθ`.
fn sine_power_integral(j: usize) -> f64 {
    match j {
        0 => PI,
        1 => 2.0,
        _ => (j as f64 - 1.0) / j as f64 * sine_power_integral(j - 2),
    }
}

/// Gauss rule for the weight `(1-x²)^alpha` on `[-1, 1]`, `alpha >= 0`,
/// with total mass `mass`.
fn gegenbauer_rule(m: usize, alpha: f64, mass: f64) -> Quadrature1D {
    let mut jac = DMatrix::<f64>::zeros(m, m);
    for k in 1..m {
        let kf = k as f64;
        let b2 = kf * (kf + 2.0 * alpha)
            / ((2.0 * kf + 2.0 * alpha + 1.0) * (2.0 * kf + 2.0 * alpha - 1.0));
        let b = b2.sqrt();
        jac[(k, k - 1)] = b;
        jac[(k - 1, k)] = b;
    }
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..m)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mass * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Symmetrize: the exact rule is symmetric about 0.
    for i in 0..m / 2 {
        let j = m - 1 - i;
        let x = 0.5 * (pairs[j].0 - pairs[i].0);
        let w = 0.5 * (pairs[j].1 + pairs[i].1);
        pairs[i] = (-x, w);
        pairs[j] = (x, w);
    }
    if m % 2 == 1 {
        pairs[m / 2].0 = 0.0;
    }
    Quadrature1D {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
        degree: 2 * m - 1,
    }
}

/// `m`-point Gauss-Legendre rule on `[a, b]`.
pub fn gauss_rule(m: usize, a: f64, b: f64) -> Result<Quadrature1D> {
    if m == 0 {
        return arg("Gauss rule needs at least one node");
    }
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return arg(format!("invalid interval [{a}, {b}]"));
    }
    Ok(gegenbauer_rule(m, 0.0, 2.0).mapped(a, b))
}

/// Composite Gauss-Legendre: `panels` equal panels of `m` nodes each.
pub fn gauss_composite(m: usize, panels: usize, a: f64, b: f64) -> Result<Quadrature1D> {
    if panels == 0 {
        return arg("composite rule needs at least one panel");
    }
    let base = gauss_rule(m, -1.0, 1.0)?;
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(m * panels);
    let mut weights = Vec::with_capacity(m * panels);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let q = base.mapped(lo, lo + h);
        nodes.extend(q.nodes);
        weights.extend(q.weights);
    }
    Ok(Quadrature1D {
        nodes,
        weights,
        degree: base.degree,
    })
}

/// Quadrature nodes on a `d`-sphere, possibly embedded in a larger space.
#[derive(Clone, Debug)]
pub struct SphereRule {
    /// Dimension of the sphere.
    pub d: usize,
    pub level: usize,
    /// Unit vectors; their dimension is `d + 1` unless the rule was embedded.
    pub nodes: Vec<VecN>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    pub fn ambient_dim(&self) -> usize {
        self.nodes.first().map_or(self.d + 1, |v| v.dim())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate<F: FnMut(&VecN) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(u, &w)| w * f(u))
            .sum()
    }

    /// Merges antipodal node pairs, keeping the representative whose first
    /// non-negligible coordinate is positive. Valid only for even integrands.
    pub fn antipodal_fold(&self) -> SphereRule {
        let key = |v: &VecN| -> Vec<i64> {
            v.as_slice().iter().map(|x| (x * 1e9).round() as i64).collect()
        };
        let mut index: HashMap<Vec<i64>, usize> = HashMap::new();
        let mut nodes = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for (u, &w) in self.nodes.iter().zip(&self.weights) {
            let lead = u.as_slice().iter().find(|x| x.abs() > 1e-12).copied().unwrap_or(1.0);
            let rep = if lead < 0.0 { -*u } else { *u };
            match index.get(&key(&rep)) {
                Some(&i) => weights[i] += w,
                None => {
                    index.insert(key(&rep), nodes.len());
                    nodes.push(rep);
                    weights.push(w);
                }
            }
        }
        SphereRule {
            d: self.d,
            level: self.level,
            nodes,
            weights,
        }
    }
}

/// Product rule on `S^d ⊂ R^{d+1}`: `2L` equispaced angles on the circle
/// factor and `L` Gegenbauer nodes on each polar angle, `L = level`.
pub fn sphere_rule(d: usize, level: usize) -> Result<SphereRule> {
    if !(1..=MAX_SPHERE_DIM).contains(&d) {
        return Err(Error::Argument(format!(
            "sphere dimension {d} not in 1..={MAX_SPHERE_DIM}"
        )));
    }
    if level == 0 {
        return arg("sphere rule level must be positive");
    }
    // Circle: angles (k + 1/2) π / L, weight π / L.
    let l = level;
    let mut pts: Vec<Vec<f64>> = (0..2 * l)
        .map(|k| {
            let phi = (k as f64 + 0.5) * PI / l as f64;
            vec![phi.cos(), phi.sin()]
        })
        .collect();
    let mut wts: Vec<f64> = vec![PI / l as f64; 2 * l];
    for k in 2..=d {
        // Lift S^{k-1} to S^k with polar weight sin^{k-1}.
        let alpha = (k as f64 - 2.0) / 2.0;
        let polar = gegenbauer_rule(l, alpha, sine_power_integral(k - 1));
        let mut next_pts = Vec::with_capacity(pts.len() * l);
        let mut next_wts = Vec::with_capacity(pts.len() * l);
        for (&x, &wx) in polar.nodes.iter().zip(&polar.weights) {
            let r = (1.0 - x * x).max(0.0).sqrt();
            for (p, &wp) in pts.iter().zip(&wts) {
                let mut q = Vec::with_capacity(k + 1);
                q.push(x);
                q.extend(p.iter().map(|c| r * c));
                next_pts.push(q);
                next_wts.push(wx * wp);
            }
        }
        pts = next_pts;
        wts = next_wts;
    }
    let nodes = pts
        .iter()
        .map(|p| {
            let v = VecN::from_slice(p).expect("node dimension within bounds");
            // Renormalize away rounding in the products.
            v.scale(1.0 / v.norm())
        })
        .collect();
    Ok(SphereRule {
        d,
        level,
        nodes,
        weights: wts,
    })
}

/// Maps a rule on `S^{n-2} ⊂ R^{n-1}` into `S^{n-1} ∩ normal^⊥` through `frame`.
pub fn embed_rule(rule: &SphereRule, frame: &OrthoBasis) -> Result<SphereRule> {
    let k = frame.basis.len();
    if rule.ambient_dim() != k || rule.d + 1 != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: rule.ambient_dim(),
        });
    }
    Ok(SphereRule {
        d: rule.d,
        level: rule.level,
        nodes: rule.nodes.iter().map(|u| frame.lift(u.as_slice())).collect(),
        weights: rule.weights.clone(),
    })
}
