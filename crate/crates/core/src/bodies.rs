//! Catalog of origin-symmetric star bodies.
//!
//! A body is described by its radial function `ρ(x) = sup{λ > 0 : λx ∈ K}`.
//! Membership uses the gauge `|x| / ρ(x/|x|)`, which each catalog kind
//! evaluates without normalizing `x` where it can.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geom::{ball_volume, Direction, VecN, MAX_BODY_DIM, MIN_BODY_DIM};
use crate::quadrature::{sphere_rule, SphereRule};

/// Which coordinate axis a zonal perturbation is symmetric about.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxisSpec {
    First,
    Last,
    /// 1-based coordinate index.
    Index(usize),
}

impl AxisSpec {
    fn resolve(self, dim: usize) -> Result<usize> {
        match self {
            AxisSpec::First => Ok(0),
            AxisSpec::Last => Ok(dim - 1),
            AxisSpec::Index(i) if (1..=dim).contains(&i) => Ok(i - 1),
            AxisSpec::Index(i) => Err(Error::Argument(format!("axis {i} outside 1..={dim}"))),
        }
    }
}

impl fmt::Display for AxisSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxisSpec::First => write!(f, "first"),
            AxisSpec::Last => write!(f, "last"),
            AxisSpec::Index(i) => write!(f, "{i}"),
        }
    }
}

/// Textual description of a catalog body; the dimension is supplied separately.
///
/// Formats: `ball:r=1`, `ellipsoid:a=1,2,3`, `lp:p=1.5`,
/// `pball:eps=0.3,d=4,axis=last`.
#[derive(Clone, Debug, PartialEq)]
pub enum BodySpec {
    Ball { r: f64 },
    Ellipsoid { axes: Vec<f64> },
    Lp { p: f64 },
    /// `ρ(x) = 1 + eps · P_d(<x, axis>)` with `P_d` the zonal harmonic profile
    /// of even degree `d`, normalized to `P_d(1) = 1`.
    PerturbedBall { eps: f64, degree: usize, axis: AxisSpec },
}

/// Admissibility bound `eps · max|P_d| <= 0.95` for perturbed balls.
pub const PERTURBATION_BOUND: f64 = 0.95;

fn parse_num(key: &str, s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("{key}: cannot parse '{s}' as a number")))
}

impl FromStr for BodySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("body '{s}' lacks 'kind:' prefix")))?;
        // "a=1,2,3" style lists: bare values extend the preceding key.
        let mut params: Vec<(String, Vec<String>)> = Vec::new();
        for tok in rest.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            match tok.split_once('=') {
                Some((k, v)) => params.push((k.trim().to_string(), vec![v.trim().to_string()])),
                None => match params.last_mut() {
                    Some((_, vals)) => vals.push(tok.to_string()),
                    None => return Err(Error::Parse(format!("dangling value '{tok}' in '{s}'"))),
                },
            }
        }
        let get = |key: &str| -> Option<&Vec<String>> {
            params.iter().find(|(k, _)| k == key).map(|(_, v)| v)
        };
        let scalar = |key: &str| -> Result<f64> {
            match get(key) {
                Some(v) if v.len() == 1 => parse_num(key, &v[0]),
                Some(_) => Err(Error::Parse(format!("'{key}' takes a single value"))),
                None => Err(Error::Parse(format!("missing '{key}=' in '{s}'"))),
            }
        };
        let allowed: &[&str] = match kind.trim() {
            "ball" => &["r"],
            "ellipsoid" => &["a"],
            "lp" => &["p"],
            "pball" => &["eps", "d", "axis"],
            other => return Err(Error::Parse(format!("unknown body kind '{other}'"))),
        };
        if let Some((k, _)) = params.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(Error::Parse(format!("unknown parameter '{k}' for {kind}")));
        }
        let spec = match kind.trim() {
            "ball" => BodySpec::Ball { r: scalar("r")? },
            "ellipsoid" => {
                let vals = get("a").ok_or_else(|| Error::Parse("missing 'a='".into()))?;
                let axes = vals.iter().map(|v| parse_num("a", v)).collect::<Result<_>>()?;
                BodySpec::Ellipsoid { axes }
            }
            "lp" => BodySpec::Lp { p: scalar("p")? },
            _ => {
                let d = scalar("d")?;
                if d.fract() != 0.0 || d < 0.0 {
                    return Err(Error::Parse(format!("degree must be a non-negative integer, got {d}")));
                }
                let axis = match get("axis").map(|v| v.join(",")) {
                    None => AxisSpec::Last,
                    Some(a) => match a.as_str() {
                        "last" => AxisSpec::Last,
                        "first" => AxisSpec::First,
                        other => AxisSpec::Index(other.parse().map_err(|_| {
                            Error::Parse(format!("axis must be first, last or an index, got '{other}'"))
                        })?),
                    },
                };
                BodySpec::PerturbedBall {
                    eps: scalar("eps")?,
                    degree: d as usize,
                    axis,
                }
            }
        };
        Ok(spec)
    }
}

impl fmt::Display for BodySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodySpec::Ball { r } => write!(f, "ball:r={r}"),
            BodySpec::Ellipsoid { axes } => {
                let a: Vec<String> = axes.iter().map(|x| x.to_string()).collect();
                write!(f, "ellipsoid:a={}", a.join(","))
            }
            BodySpec::Lp { p } => write!(f, "lp:p={p}"),
            BodySpec::PerturbedBall { eps, degree, axis } => {
                write!(f, "pball:eps={eps},d={degree},axis={axis}")
            }
        }
    }
}

/// Zonal harmonic profile of degree `d` on `S^{n-1}`: the Gegenbauer
/// polynomial `C_d^{(n-2)/2}` normalized so that the value at 1 is 1.
/// For `n = 3` this is the Legendre polynomial.
pub fn zonal_profile(n: usize, d: usize, x: f64) -> f64 {
    let lam = (n as f64 - 2.0) / 2.0;
    let eval = |x: f64| {
        let mut prev = 1.0;
        if d == 0 {
            return prev;
        }
        let mut cur = 2.0 * lam * x;
        for k in 1..d {
            let kf = k as f64;
            let next = (2.0 * x * (kf + lam) * cur - (kf + 2.0 * lam - 1.0) * prev) / (kf + 1.0);
            prev = cur;
            cur = next;
        }
        cur
    };
    eval(x) / eval(1.0)
}

/// Minimum of the normalized zonal profile over `[-1, 1]` by dense sampling.
fn zonal_profile_min(n: usize, d: usize) -> f64 {
    (0..=20_000)
        .map(|i| zonal_profile(n, d, -1.0 + i as f64 * 1e-4))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Debug)]
enum Kind {
    Ball { r: f64 },
    Ellipsoid { inv_sq: [f64; MAX_BODY_DIM] },
    Lp { p: f64 },
    Perturbed { eps: f64, degree: usize, axis: usize },
}

/// An origin-symmetric star body in `R^n`, `3 <= n <= 8`.
#[derive(Clone, Debug)]
pub struct StarBody {
    dim: usize,
    spec: BodySpec,
    kind: Kind,
    /// Lower and upper bounds on the radial function.
    pub r_min: f64,
    pub r_max: f64,
    /// Whether the radial function is `C^∞`; recorded, never enforced.
    pub smooth: bool,
}

impl StarBody {
    pub fn new(spec: BodySpec, dim: usize) -> Result<Self> {
        if !(MIN_BODY_DIM..=MAX_BODY_DIM).contains(&dim) {
            return Err(Error::Argument(format!(
                "dimension {dim} not in {MIN_BODY_DIM}..={MAX_BODY_DIM}"
            )));
        }
        let (kind, lo, hi, smooth) = match &spec {
            BodySpec::Ball { r } => {
                if !(*r > 0.0 && r.is_finite()) {
                    return Err(Error::Argument(format!("ball radius must be positive, got {r}")));
                }
                (Kind::Ball { r: *r }, *r, *r, true)
            }
            BodySpec::Ellipsoid { axes } => {
                if axes.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: axes.len(),
                    });
                }
                if axes.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
                    return Err(Error::Argument("ellipsoid semi-axes must be positive".into()));
                }
                let mut inv_sq = [0.0; MAX_BODY_DIM];
                for (s, a) in inv_sq.iter_mut().zip(axes) {
                    *s = 1.0 / (a * a);
                }
                let lo = axes.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = axes.iter().copied().fold(0.0, f64::max);
                (Kind::Ellipsoid { inv_sq }, lo, hi, true)
            }
            BodySpec::Lp { p } => {
                if !(*p >= 0.5 && p.is_finite()) {
                    return Err(Error::Argument(format!("lp exponent must be >= 0.5, got {p}")));
                }
                // |u|_p on the unit sphere lies between 1 and n^{1/p - 1/2}.
                let c = (dim as f64).powf(1.0 / p - 0.5);
                let (lo, hi) = if c >= 1.0 { (1.0 / c, 1.0) } else { (1.0, 1.0 / c) };
                let even_int = p.fract() == 0.0 && (*p as u64) % 2 == 0;
                (Kind::Lp { p: *p }, lo, hi, even_int)
            }
            BodySpec::PerturbedBall { eps, degree, axis } => {
                if degree % 2 != 0 {
                    return Err(Error::Argument(format!(
                        "perturbation degree must be even, got {degree}"
                    )));
                }
                if !(eps.is_finite() && eps.abs() <= PERTURBATION_BOUND) {
                    return Err(Error::Argument(format!(
                        "perturbation eps = {eps} violates eps * max|P_d| <= {PERTURBATION_BOUND}"
                    )));
                }
                let pmin = zonal_profile_min(dim, *degree);
                let (lo, hi) = if *eps >= 0.0 {
                    (1.0 + eps * pmin, 1.0 + eps)
                } else {
                    (1.0 + eps, 1.0 + eps * pmin)
                };
                let kind = Kind::Perturbed {
                    eps: *eps,
                    degree: *degree,
                    axis: axis.resolve(dim)?,
                };
                (kind, lo, hi, true)
            }
        };
        let mut body = StarBody {
            dim,
            spec,
            kind,
            r_min: lo,
            r_max: hi,
            smooth,
        };
        // Widen by sampled values and a 1% margin.
        let rule = sphere_rule(dim - 1, 3)?;
        for u in &rule.nodes {
            let r = body.radial_at(u);
            body.r_min = body.r_min.min(r);
            body.r_max = body.r_max.max(r);
        }
        body.r_min *= 0.99;
        body.r_max *= 1.01;
        Ok(body)
    }

    pub fn parse(spec: &str, dim: usize) -> Result<Self> {
        StarBody::new(spec.parse()?, dim)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spec(&self) -> &BodySpec {
        &self.spec
    }

    /// Same body dilated by `c > 0`, available for balls and ellipsoids.
    pub fn dilated(&self, c: f64) -> Result<StarBody> {
        let spec = match &self.spec {
            BodySpec::Ball { r } => BodySpec::Ball { r: r * c },
            BodySpec::Ellipsoid { axes } => BodySpec::Ellipsoid {
                axes: axes.iter().map(|a| a * c).collect(),
            },
            other => {
                return Err(Error::Unsupported(format!("dilation of {other}")));
            }
        };
        StarBody::new(spec, self.dim)
    }

    /// Radial function at a unit vector (not checked).
    #[inline]
    pub fn radial_at(&self, u: &VecN) -> f64 {
        1.0 / self.gauge(u)
    }

    pub fn radial(&self, x: &Direction) -> Result<f64> {
        self.check_dim(x.dim())?;
        Ok(self.radial_at(x.vector()))
    }

    /// Minkowski functional `|x| / ρ(x/|x|)`; `x ∈ K` iff `gauge(x) <= 1`.
    #[inline]
    pub fn gauge(&self, x: &VecN) -> f64 {
        match &self.kind {
            Kind::Ball { r } => x.norm() / r,
            Kind::Ellipsoid { inv_sq } => {
                let mut s = 0.0;
                for (c, w) in x.as_slice().iter().zip(inv_sq) {
                    s += c * c * w;
                }
                s.sqrt()
            }
            Kind::Lp { p } => {
                let s: f64 = x.as_slice().iter().map(|c| c.abs().powf(*p)).sum();
                s.powf(1.0 / p)
            }
            Kind::Perturbed { eps, degree, axis } => {
                let r = x.norm();
                if r == 0.0 {
                    return 0.0;
                }
                let c = (x[*axis] / r).clamp(-1.0, 1.0);
                r / (1.0 + eps * zonal_profile(self.dim, *degree, c))
            }
        }
    }

    #[inline]
    pub fn contains(&self, x: &VecN) -> bool {
        self.gauge(x) <= 1.0
    }

    /// `Vol(K) = (1/n) ∫ ρ^n dσ` over `S^{n-1}`.
    pub fn volume(&self, rule: &SphereRule) -> Result<f64> {
        if rule.d + 1 != self.dim || rule.ambient_dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim - 1,
                got: rule.d,
            });
        }
        let n = self.dim as i32;
        Ok(rule.integrate(|u| self.radial_at(u).powi(n)) / n as f64)
    }

    /// Closed-form `A_ξ(t)` for balls and ellipsoids, `None` for other kinds.
    pub fn analytic_section(&self, xi: &Direction, t: f64) -> Option<f64> {
        let n = self.dim;
        let v = ball_volume(n - 1);
        let e = (n as f64 - 1.0) / 2.0;
        let t = t.abs();
        match &self.spec {
            BodySpec::Ball { r } => Some(if t <= *r {
                v * (r * r - t * t).powf(e)
            } else {
                0.0
            }),
            BodySpec::Ellipsoid { axes } => {
                let w = axes
                    .iter()
                    .zip(xi.as_slice())
                    .map(|(a, x)| a * a * x * x)
                    .sum::<f64>()
                    .sqrt();
                let prod: f64 = axes.iter().product();
                Some(if t <= w {
                    v * prod / w * (1.0 - t * t / (w * w)).powf(e)
                } else {
                    0.0
                })
            }
            _ => None,
        }
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn v(xs: &[f64]) -> VecN {
        VecN::from_slice(xs).unwrap()
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["ball:r=1", "ellipsoid:a=1,2,3", "lp:p=1.5", "pball:eps=0.3,d=4,axis=last"] {
            let spec: BodySpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert_eq!(
            "ellipsoid:a=1,2,3".parse::<BodySpec>().unwrap(),
            BodySpec::Ellipsoid { axes: vec![1.0, 2.0, 3.0] }
        );
        assert!("cube:r=1".parse::<BodySpec>().is_err());
        assert!("ball".parse::<BodySpec>().is_err());
        assert!("ball:q=1".parse::<BodySpec>().is_err());
        assert!("pball:eps=0.3,d=2.5".parse::<BodySpec>().is_err());
    }

    #[test]
    fn validation() {
        assert!(StarBody::parse("ball:r=-1", 3).is_err());
        assert!(StarBody::parse("ball:r=1", 2).is_err());
        assert!(StarBody::parse("ellipsoid:a=1,2", 3).is_err());
        assert!(StarBody::parse("lp:p=0.3", 3).is_err());
        assert!(StarBody::parse("pball:eps=0.96,d=4", 3).is_err());
        assert!(StarBody::parse("pball:eps=0.3,d=3", 3).is_err());
        assert!(StarBody::parse("pball:eps=0.3,d=4,axis=9", 3).is_err());
    }

    #[test]
    fn radial_examples() {
        let ball = StarBody::parse("ball:r=1", 4).unwrap();
        let x = v(&[0.1, -0.7, 0.3, 0.2]).normalized().unwrap();
        assert_relative_eq!(ball.radial(&x).unwrap(), 1.0, max_relative = 1e-15);
        let ell = StarBody::parse("ellipsoid:a=1,2,3", 3).unwrap();
        for i in 0..3 {
            assert_relative_eq!(
                ell.radial(&Direction::axis(3, i)).unwrap(),
                (i + 1) as f64,
                max_relative = 1e-15
            );
        }
        let flat = StarBody::parse("pball:eps=0,d=4", 3).unwrap();
        assert_relative_eq!(flat.radial(&x_3()).unwrap(), 1.0, max_relative = 1e-15);
        assert!(ball.radial(&x_3()).is_err());
    }

    fn x_3() -> Direction {
        v(&[0.3, 0.4, -0.5]).normalized().unwrap()
    }

    #[test]
    fn membership_examples() {
        let ball = StarBody::parse("ball:r=1", 3).unwrap();
        assert!(ball.contains(&v(&[0.5, 0.0, 0.0])));
        assert!(!ball.contains(&v(&[1.1, 0.0, 0.0])));
        assert!(ball.contains(&VecN::zeros(3)));
        let ell = StarBody::parse("ellipsoid:a=1,2,3", 3).unwrap();
        assert!(ell.contains(&v(&[0.0, 0.0, 2.9])));
        assert!(!ell.contains(&v(&[0.0, 0.0, 3.1])));
        let pb = StarBody::parse("pball:eps=0.5,d=2", 3).unwrap();
        assert!(pb.contains(&VecN::zeros(3)));
        assert!(pb.contains(&v(&[0.0, 0.0, 1.49])));
        assert!(!pb.contains(&v(&[0.0, 0.0, 1.51])));
    }

    #[test]
    fn evenness_is_exact() {
        for s in ["ellipsoid:a=1,2,3", "lp:p=1.5", "pball:eps=0.4,d=4", "pball:eps=-0.4,d=6,axis=1"] {
            let b = StarBody::parse(s, 3).unwrap();
            for u in &sphere_rule(2, 5).unwrap().nodes {
                assert_eq!(b.radial_at(u), b.radial_at(&-*u), "{s}");
            }
        }
    }

    #[test]
    fn bounds_bracket_radial_function() {
        for (s, n) in [("pball:eps=0.9,d=4", 5), ("lp:p=0.7", 4), ("lp:p=4", 3), ("ellipsoid:a=1,2,3", 3)] {
            let b = StarBody::parse(s, n).unwrap();
            for u in &sphere_rule(n - 1, 6).unwrap().nodes {
                let r = b.radial_at(u);
                assert!(r >= b.r_min && r <= b.r_max, "{s}: {r}");
            }
        }
    }

    #[test]
    fn zonal_profile_known_cases() {
        // Legendre P2, P4 for n = 3.
        for &x in &[-0.9, -0.2, 0.0, 0.4, 1.0] {
            assert_relative_eq!(zonal_profile(3, 2, x), 0.5 * (3.0 * x * x - 1.0), epsilon = 1e-15);
            let p4 = (35.0 * x.powi(4) - 30.0 * x * x + 3.0) / 8.0;
            assert_relative_eq!(zonal_profile(3, 4, x), p4, epsilon = 1e-14);
            // n = 5, d = 4: (315x^4 - 210x^2 + 15)/120.
            let q = (315.0 * x.powi(4) - 210.0 * x * x + 15.0) / 120.0;
            assert_relative_eq!(zonal_profile(5, 4, x), q, epsilon = 1e-14);
        }
        assert!((zonal_profile_min(5, 4) + 1.0 / 6.0).abs() < 1e-8);
    }

    #[test]
    fn volume_examples() {
        let r3 = sphere_rule(2, 24).unwrap();
        let ball = StarBody::parse("ball:r=1", 3).unwrap();
        assert!((ball.volume(&r3).unwrap() - 4.0 * PI / 3.0).abs() < 1e-8);
        let ell = StarBody::parse("ellipsoid:a=1,2,3", 3).unwrap();
        let r3f = sphere_rule(2, 48).unwrap();
        assert!((ell.volume(&r3f).unwrap() - 8.0 * PI).abs() < 1e-6);
        let b2 = StarBody::parse("ball:r=2", 4).unwrap();
        let r4 = sphere_rule(3, 8).unwrap();
        assert!((b2.volume(&r4).unwrap() - 8.0 * PI * PI).abs() < 1e-6);
        assert!(ball.volume(&r4).is_err());
    }

    #[test]
    fn ellipsoid_volume_agrees_with_monte_carlo() {
        use rand::{Rng, SeedableRng};
        let ell = StarBody::parse("ellipsoid:a=1,2,3", 3).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let m = 200_000;
        let hits = (0..m)
            .filter(|_| {
                let x = v(&[
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-3.0..3.0),
                ]);
                ell.contains(&x)
            })
            .count();
        let mc = 48.0 * hits as f64 / m as f64;
        let quad = ell.volume(&sphere_rule(2, 48).unwrap()).unwrap();
        // Binomial standard error is about 0.05.
        assert!((mc - quad).abs() < 0.25, "mc {mc} quad {quad}");
    }

    #[test]
    fn volume_scales_with_dilation() {
        let rule = sphere_rule(3, 12).unwrap();
        let e = StarBody::parse("ellipsoid:a=1,1.2,1.5,2", 4).unwrap();
        let v1 = e.volume(&rule).unwrap();
        let v2 = e.dilated(1.7).unwrap().volume(&rule).unwrap();
        assert_relative_eq!(v2, 1.7f64.powi(4) * v1, max_relative = 1e-12);
    }

    #[test]
    fn analytic_section_examples() {
        let b3 = StarBody::parse("ball:r=1", 3).unwrap();
        assert_relative_eq!(b3.analytic_section(&Direction::axis(3, 0), 0.0).unwrap(), PI);
        let b4 = StarBody::parse("ball:r=1", 4).unwrap();
        assert_relative_eq!(
            b4.analytic_section(&Direction::axis(4, 2), 0.0).unwrap(),
            4.0 * PI / 3.0,
            max_relative = 1e-15
        );
        let e = StarBody::parse("ellipsoid:a=1,1,2", 3).unwrap();
        assert_relative_eq!(e.analytic_section(&Direction::axis(3, 2), 0.0).unwrap(), PI);
        assert_eq!(e.analytic_section(&Direction::axis(3, 2), 2.5), Some(0.0));
        let l = StarBody::parse("lp:p=3", 3).unwrap();
        assert!(l.analytic_section(&Direction::axis(3, 2), 0.0).is_none());
    }
}
