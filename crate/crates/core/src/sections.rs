//! Parallel-section functions `A_ξ(t) = Vol_{n-1}(K ∩ (tξ + ξ^⊥))`, chord
//! profiles, and even-order derivatives of `A_ξ` at the origin.

use std::f64::consts::PI;

use crate::bodies::StarBody;
use crate::error::{Error, Result};
use crate::geom::{orthonormal_complement, Direction, VecN};
use crate::quadrature::{embed_rule, SphereRule};
use crate::rules::Rules;

/// Relative inflation applied to support bounds found by sampling.
pub const SUPPORT_MARGIN: f64 = 0.02;

/// Calls `visit(a, b)` for each maximal interval `[a, b] ⊂ [lo, hi]` with
/// `base + s·dir ∈ K`, located on a uniform grid and refined by the Illinois
/// variant of regula falsi on the gauge (at most `bisect` steps).
fn for_each_chord<F: FnMut(f64, f64)>(
    body: &StarBody,
    base: &VecN,
    dir: &VecN,
    lo: f64,
    hi: f64,
    scan: usize,
    bisect: usize,
    mut visit: F,
) {
    if !(hi > lo) {
        return;
    }
    let excess = |s: f64| body.gauge(&base.axpy(s, dir)) - 1.0;
    let inside = |s: f64| excess(s) <= 0.0;
    let refine = |s_in: f64, s_out: f64| {
        let (mut a, mut b) = (s_in, s_out);
        let (mut fa, mut fb) = (excess(a), excess(b));
        let mut side = 0i8;
        for _ in 0..bisect {
            if (b - a).abs() <= 1e-15 * a.abs().max(b.abs()).max(1.0) {
                break;
            }
            let c = if fb != fa { (a * fb - b * fa) / (fb - fa) } else { 0.5 * (a + b) };
            let c = if c.is_finite() && (c - a) * (c - b) < 0.0 { c } else { 0.5 * (a + b) };
            let fc = excess(c);
            if fc <= 0.0 {
                a = c;
                fa = fc;
                if side == -1 {
                    fb *= 0.5;
                }
                side = -1;
            } else {
                b = c;
                fb = fc;
                if side == 1 {
                    fa *= 0.5;
                }
                side = 1;
            }
        }
        0.5 * (a + b)
    };
    let h = (hi - lo) / (scan - 1) as f64;
    let mut prev_s = lo;
    let mut prev_in = inside(lo);
    let mut start = if prev_in { Some(lo) } else { None };
    for j in 1..scan {
        let s = if j == scan - 1 { hi } else { lo + j as f64 * h };
        let now_in = inside(s);
        if now_in != prev_in {
            if now_in {
                start = Some(refine(s, prev_s));
            } else if let Some(a) = start.take() {
                visit(a, refine(prev_s, s));
            }
        }
        prev_s = s;
        prev_in = now_in;
    }
    if let Some(a) = start {
        visit(a, hi);
    }
}

/// Section sampler for one direction: holds the `S^{n-2}` rule embedded in
/// `ξ^⊥` and the boundary point of `K` furthest along `ξ`.
pub struct SectionSampler<'a> {
    body: &'a StarBody,
    xi: Direction,
    rule: SphereRule,
    apex: Apex,
    scan: usize,
    bisect: usize,
}

impl<'a> SectionSampler<'a> {
    pub fn new(body: &'a StarBody, xi: &Direction, rules: &Rules) -> Result<Self> {
        if xi.dim() != body.dim() || rules.n != body.dim() {
            return Err(Error::DimensionMismatch {
                expected: body.dim(),
                got: xi.dim(),
            });
        }
        let frame = orthonormal_complement(xi.vector())?;
        Ok(SectionSampler {
            body,
            xi: *xi,
            rule: embed_rule(&rules.section, &frame)?,
            apex: apex(body, xi, &rules.support),
            scan: rules.settings.scan_points,
            bisect: rules.settings.bisection_steps,
        })
    }

    pub fn xi(&self) -> &Direction {
        &self.xi
    }

    /// `w(ξ)`: `A_ξ(t) = 0` for `|t| >= w`.
    pub fn extent(&self) -> f64 {
        self.apex.extent
    }

    /// `A_ξ(t)`, even in `t`.
    pub fn area(&self, t: f64) -> f64 {
        section_area_embedded(self.body, &self.apex, t, &self.rule, self.scan, self.bisect)
    }
}

fn section_area_embedded(
    body: &StarBody,
    apex: &Apex,
    t: f64,
    rule: &SphereRule,
    scan: usize,
    bisect: usize,
) -> f64 {
    let n = body.dim();
    let p = (n - 1) as i32;
    let t = t.abs();
    if t == 0.0 {
        // Central section: every ray from the origin leaves K once, at ρ(u).
        return rule.integrate(|u| body.radial_at(u).powi(p)) / p as f64;
    }
    if t >= apex.extent {
        return 0.0;
    }
    // (t/w)·x* lies in K (star-shaped about 0) and in the section plane,
    // so polar coordinates about it see the section from the inside.
    let base = apex.point.scale(t / apex.extent);
    let r2 = body.r_max * body.r_max - base.dot(&base);
    rule.integrate(|u| {
        let bu = base.dot(u);
        let reach = -bu + (bu * bu + r2.max(0.0)).sqrt();
        let mut acc = 0.0;
        for_each_chord(body, &base, u, 0.0, reach, scan, bisect, |a, b| {
            acc += b.powi(p) - a.powi(p);
        });
        acc / p as f64
    })
}

/// `A_ξ(t)` by quadrature over `u ∈ S^{n-2} ⊂ ξ^⊥` of `∫ s^{n-2} 1_K(tξ + su) ds`.
/// `rule` must already be embedded in `ξ^⊥`.
pub fn section_area(
    body: &StarBody,
    xi: &Direction,
    t: f64,
    rule: &SphereRule,
    rules: &Rules,
) -> Result<f64> {
    if rule.ambient_dim() != body.dim() || rule.d + 2 != body.dim() {
        return Err(Error::DimensionMismatch {
            expected: body.dim(),
            got: rule.ambient_dim(),
        });
    }
    Ok(section_area_embedded(
        body,
        &apex(body, xi, &rules.support),
        t,
        rule,
        rules.settings.scan_points,
        rules.settings.bisection_steps,
    ))
}

/// Upper bound for `{t : A_ξ(t) > 0}`: [`section_extent`] inflated by
/// [`SUPPORT_MARGIN`].
pub fn support_bound(body: &StarBody, xi: &Direction, rule: &SphereRule) -> f64 {
    section_extent(body, xi, rule) * (1.0 + SUPPORT_MARGIN)
}

/// The boundary point `x* = ρ(v)v` maximizing `<x*, ξ>` and that maximum.
#[derive(Clone, Copy, Debug)]
struct Apex {
    extent: f64,
    point: VecN,
}

fn apex(body: &StarBody, xi: &Direction, rule: &SphereRule) -> Apex {
    let score = |v: &VecN| body.radial_at(v) * xi.dot(v);
    let mut best = rule
        .nodes
        .iter()
        .copied()
        .max_by(|a, b| score(a).total_cmp(&score(b)))
        .unwrap_or(*xi.vector());
    let mut value = score(&best);
    let mut step = 0.1;
    let mut iters = 0;
    while step > 1e-10 && iters < 2000 {
        iters += 1;
        let frame = match orthonormal_complement(&best) {
            Ok(f) => f,
            Err(_) => break,
        };
        let mut improved = false;
        for b in &frame.basis {
            for sign in [1.0, -1.0] {
                let cand = best.axpy(sign * step, b);
                let cand = cand.scale(1.0 / cand.norm());
                let s = score(&cand);
                if s > value {
                    value = s;
                    best = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Apex {
        extent: value,
        point: best.scale(body.radial_at(&best)),
    }
}

/// `w(ξ) = max_v ρ(v)<v,ξ>`, the exact end of the section support: the best
/// rule node refined by a pattern search on the sphere.
pub fn section_extent(body: &StarBody, xi: &Direction, rule: &SphereRule) -> f64 {
    apex(body, xi, rule).extent
}

/// Samples of `A_ξ` on `t >= 0`.
#[derive(Clone, Debug)]
pub struct SectionProfile {
    pub xi: Direction,
    /// Lattice step: samples at `t = j·step` are addressable by index.
    pub step: f64,
    pub ts: Vec<f64>,
    pub values: Vec<f64>,
    /// `A_ξ(t) = 0` for `t >= support`.
    pub support: f64,
}

impl SectionProfile {
    /// Value at lattice point `j·step`, if sampled.
    pub fn lattice_value(&self, j: usize) -> Option<f64> {
        let t = j as f64 * self.step;
        let i = self.ts.partition_point(|&s| s < t - 1e-9 * self.step);
        match self.ts.get(i) {
            Some(&s) if (s - t).abs() <= 1e-9 * self.step => Some(self.values[i]),
            _ => None,
        }
    }
}

/// Sample points for a profile: increasing `ts` and the lattice step.
#[derive(Clone, Debug)]
pub struct ProfileGrid {
    pub step: f64,
    pub ts: Vec<f64>,
}

impl ProfileGrid {
    /// `count` equispaced points on `[0, end]`.
    pub fn uniform(end: f64, count: usize) -> Result<ProfileGrid> {
        if count < 2 || !(end > 0.0) {
            return Err(Error::Argument(format!("bad uniform grid: end {end}, count {count}")));
        }
        let step = end / (count - 1) as f64;
        Ok(ProfileGrid {
            step,
            ts: (0..count).map(|j| j as f64 * step).collect(),
        })
    }

    /// Exactly the lattice points needed by [`even_derivative_at_zero`] for
    /// every even order up to `max_order`, with base step `step`.
    pub fn derivative_lattice(step: f64, max_order: usize) -> Result<ProfileGrid> {
        let mut idx: Vec<usize> = vec![0];
        for order in (2..=max_order).step_by(2) {
            let stride = derivative_stride(order)?;
            let m = order / 2 + 1;
            for j in 0..=m {
                idx.push(j * stride);
                idx.push(2 * j * stride);
            }
        }
        idx.sort_unstable();
        idx.dedup();
        Ok(ProfileGrid {
            step,
            ts: idx.iter().map(|&j| j as f64 * step).collect(),
        })
    }

    /// Adds extra sample points, keeping `ts` sorted and unique.
    pub fn with_points(mut self, extra: &[f64]) -> ProfileGrid {
        self.ts.extend_from_slice(extra);
        self.ts.sort_by(f64::total_cmp);
        self.ts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1e-300));
        self
    }
}

/// Where profile values come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SectionSource {
    Numeric,
    /// Closed form when the body has one, numeric otherwise.
    PreferAnalytic,
}

pub fn profile(
    body: &StarBody,
    xi: &Direction,
    grid: &ProfileGrid,
    support: f64,
    rules: &Rules,
    source: SectionSource,
) -> Result<SectionProfile> {
    let analytic = source == SectionSource::PreferAnalytic && body.analytic_section(xi, 0.0).is_some();
    let values = if analytic {
        grid.ts
            .iter()
            .map(|&t| body.analytic_section(xi, t).unwrap_or(0.0))
            .collect()
    } else {
        let sampler = SectionSampler::new(body, xi, rules)?;
        grid.ts
            .iter()
            .map(|&t| if t >= support { 0.0 } else { sampler.area(t) })
            .collect()
    };
    Ok(SectionProfile {
        xi: *xi,
        step: grid.step,
        ts: grid.ts.clone(),
        values,
        support,
    })
}

/// Stencil spacing, in lattice steps, used for each derivative order.
/// Higher orders divide by `h^order` and need a wider step to stay above
/// the rounding floor.
pub fn derivative_stride(order: usize) -> Result<usize> {
    match order {
        2 => Ok(1),
        4 => Ok(4),
        6 => Ok(10),
        8 => Ok(16),
        _ => Err(Error::Argument(format!("derivative order {order} not in {{2, 4, 6, 8}}"))),
    }
}

/// Finite-difference weights for the `q`-th derivative at 0 on `nodes`
/// (Fornberg's recursion).
pub(crate) fn fd_weights(nodes: &[f64], q: usize) -> Vec<f64> {
    let m = nodes.len();
    let mut c = vec![vec![0.0; q + 1]; m];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0];
    for i in 1..m {
        let mn = i.min(q);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i];
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|row| row[q]).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivativeEstimate {
    pub value: f64,
    pub error: f64,
}

/// `A_ξ^{(2k)}(0)` from a profile, using the even extension `A(-t) = A(t)`,
/// the fourth-order central stencil at steps `h` and `2h`, and one
/// Richardson step `(16 D_h - D_{2h}) / 15`.
pub fn even_derivative_at_zero(p: &SectionProfile, order: usize) -> Result<DerivativeEstimate> {
    if order == 0 {
        let v = p
            .lattice_value(0)
            .ok_or_else(|| Error::Resolution("profile lacks t = 0".into()))?;
        return Ok(DerivativeEstimate { value: v, error: 0.0 });
    }
    if order % 2 == 1 {
        return Err(Error::Argument(format!("order {order} is odd; odd derivatives vanish")));
    }
    let stride = derivative_stride(order)?;
    let m = order / 2 + 1;
    if (2 * m * stride) as f64 * p.step > p.support {
        return Err(Error::Resolution(format!(
            "step {} too coarse for order {order} on support {}",
            p.step, p.support
        )));
    }
    let offsets: Vec<f64> = (-(m as i64)..=m as i64).map(|j| j as f64).collect();
    let w = fd_weights(&offsets, order);
    let apply = |scale: usize| -> Result<f64> {
        let h = (scale * stride) as f64 * p.step;
        let mut acc = 0.0;
        for (k, &wk) in w.iter().enumerate() {
            let j = (k as i64 - m as i64).unsigned_abs() as usize;
            let v = p.lattice_value(j * scale * stride).ok_or_else(|| {
                Error::Resolution(format!("profile lacks lattice point {}", j * scale * stride))
            })?;
            acc += wk * v;
        }
        Ok(acc / h.powi(order as i32))
    };
    let d1 = apply(1)?;
    let d2 = apply(2)?;
    Ok(DerivativeEstimate {
        value: (16.0 * d1 - d2) / 15.0,
        error: (d1 - d2).abs() / 15.0,
    })
}

/// Length of the chord `K ∩ (y + R e)`.
pub fn chord_length(body: &StarBody, y: &VecN, e: &VecN, rules: &Rules) -> f64 {
    let r2 = body.r_max * body.r_max - y.dot(y);
    if r2 <= 0.0 {
        return 0.0;
    }
    chord_length_split(body, y, e, 0.0, r2.sqrt(), rules)
}

/// [`chord_length`] with the scan split at `y + anchor·e`, which is assumed
/// to lie in `K`; short chords around the anchor cannot be missed.
pub fn chord_length_through(body: &StarBody, y: &VecN, e: &VecN, anchor: f64, rules: &Rules) -> f64 {
    let r2 = body.r_max * body.r_max - y.dot(y);
    if r2 <= 0.0 {
        return 0.0;
    }
    chord_length_split(body, y, e, anchor, r2.sqrt(), rules)
}

fn chord_length_split(body: &StarBody, y: &VecN, e: &VecN, split: f64, reach: f64, rules: &Rules) -> f64 {
    let split = split.clamp(-reach, reach);
    let mut len = 0.0;
    let (scan, bisect) = (rules.settings.scan_points, rules.settings.bisection_steps);
    for_each_chord(body, y, e, -reach, split, scan, bisect, |a, b| len += b - a);
    for_each_chord(body, y, e, split, reach, scan, bisect, |a, b| len += b - a);
    len
}

/// Radius of the projection of `K` onto `e^⊥` in the direction `u ⊥ e`:
/// `max_α ρ(cos α u + sin α e) cos α`.
pub fn projection_radius(body: &StarBody, e: &VecN, u: &VecN) -> f64 {
    projection_apex(body, e, u).radius
}

/// The projection radius `R` along `u` and the `e`-coordinate per unit of
/// `R` of the boundary point attaining it: `r u + (r·slope) e ∈ K` for
/// `0 <= r <= R`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectionApex {
    pub radius: f64,
    pub slope: f64,
}

pub fn projection_apex(body: &StarBody, e: &VecN, u: &VecN) -> ProjectionApex {
    let h = |a: f64| {
        let v = u.scale(a.cos()).axpy(a.sin(), e);
        body.radial_at(&v) * a.cos()
    };
    let m = 64;
    let da = PI / m as f64;
    let (mut best_a, mut best) = (0.0, h(0.0));
    for i in 1..m {
        let a = -PI / 2.0 + i as f64 * da;
        let v = h(a);
        if v > best {
            best = v;
            best_a = a;
        }
    }
    // Golden-section refinement on the bracketing cell.
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (best_a - da, best_a + da);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (h(x1), h(x2));
    for _ in 0..80 {
        if f1 > f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = h(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = h(x2);
        }
    }
    for (a, v) in [(x1, f1), (x2, f2)] {
        if v > best {
            best = v;
            best_a = a;
        }
    }
    ProjectionApex {
        radius: best,
        slope: best_a.tan(),
    }
}

/// `Φ(x) = ∫_{S^{n-2}} φ(xu) dσ(u)` on a grid of `x`, where `φ(y)` is the
/// chord length of `K` along `y + R e` for `y ∈ e^⊥`.
#[derive(Clone, Debug)]
pub struct ChordProfile {
    pub e: Direction,
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
}

pub fn chord_profile(body: &StarBody, e: &Direction, rules: &Rules, xs: &[f64]) -> Result<ChordProfile> {
    if e.dim() != body.dim() {
        return Err(Error::DimensionMismatch {
            expected: body.dim(),
            got: e.dim(),
        });
    }
    let frame = orthonormal_complement(e.vector())?;
    let rule = embed_rule(&rules.section, &frame)?;
    let values = rules.execution().map(xs, |&x| {
        rule.integrate(|u| chord_length(body, &u.scale(x), e.vector(), rules))
    });
    Ok(ChordProfile {
        e: *e,
        xs: xs.to_vec(),
        values,
    })
}
