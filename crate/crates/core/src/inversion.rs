//! Inversion of the spherical Radon transform of a radial function from its
//! section functions.
//!
//! For even `n`, `κ_n ρ_K = R(ξ ↦ A_ξ^{(n-2)}(0))` and for odd `n`,
//! `κ_n ρ_K = R(ξ ↦ J(ξ))` with the regularized moment
//! `J(ξ) = ∫_0^∞ t^{1-n} (A_ξ(t) - Σ_{k<=(n-3)/2} A_ξ^{(2k)}(0) t^{2k}/(2k)!) dt`.
//! Dividing the inner field by `κ_n` therefore gives `R^{-1} ρ_K` directly.

use std::f64::consts::PI;

use crate::bodies::StarBody;
use crate::error::{Error, Result};
use crate::geom::{orthonormal_complement, sphere_area, Direction};
use crate::quadrature::{embed_rule, gauss_composite, Quadrature1D};
use crate::rules::Rules;
use crate::sections::{
    even_derivative_at_zero, DerivativeEstimate, ProfileGrid,
    SectionProfile, SectionSampler, SUPPORT_MARGIN,
};

/// Default series tolerance.
pub const SERIES_TOL: f64 = 1e-12;
/// Direct summation gives up after this many terms and extrapolates instead.
pub const SERIES_CAP: usize = 1_000_000;

/// Which form of the inversion applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: usize) -> Parity {
        if n % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

/// `Σ_k a_k / (n-2-2k)` and how it was obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesSum {
    pub value: f64,
    /// Tail bound (direct summation) or extrapolation error estimate.
    pub error: f64,
    pub terms: usize,
    pub accelerated: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InversionConstants {
    pub n: usize,
    /// Leading coefficients `a_k = (-1)^k binom((n-2)/2, k)`: all nonzero ones
    /// for even `n`, the first `n + 1` for odd `n`.
    pub a: Vec<f64>,
    /// `S_n`; only defined for odd `n` (for even `n` a denominator vanishes).
    pub series: Option<SeriesSum>,
    pub kappa: f64,
}

/// Scale `κ_n` relating `ρ_K` to the Radon transform of the section field.
pub fn kappa(n: usize) -> f64 {
    let nf = n as f64;
    if n % 2 == 0 {
        let sign = if ((n - 2) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        sign * 2f64.powi(n as i32) * PI.powf(nf - 2.0)
    } else {
        let sign = if ((n - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let fact: f64 = (1..=n - 2).map(|k| k as f64).product();
        sign * (2.0 * PI).powf(nf - 1.0) / fact
    }
}

/// `-2 s_{n-2} s_{n-3} S / (n-2)`; equals `κ_n` when `S = S_n`, odd `n`.
pub fn consistency_identity(n: usize, s: f64) -> f64 {
    -2.0 * sphere_area(n - 2) * sphere_area(n - 3) * s / (n as f64 - 2.0)
}

/// Iterator over `a_k` by the running product `a_k = -a_{k-1} (α-k+1)/k`.
fn coefficient_iter(n: usize) -> impl Iterator<Item = f64> {
    let alpha = (n as f64 - 2.0) / 2.0;
    let mut a = 1.0;
    let mut k = 0usize;
    std::iter::from_fn(move || {
        let out = a;
        k += 1;
        a *= -(alpha - k as f64 + 1.0) / k as f64;
        Some(out)
    })
}

fn series_direct(n: usize, tol: f64, cap: usize) -> Option<SeriesSum> {
    let alpha = (n as f64 - 2.0) / 2.0;
    let m = n as f64 - 2.0;
    let mut sum = 0.0;
    let mut comp = 0.0;
    for (k, a) in coefficient_iter(n).enumerate().take(cap) {
        let term = a / (m - 2.0 * k as f64);
        // Kahan summation
        let y = term - comp;
        let s = sum + y;
        comp = (s - sum) - y;
        sum = s;
        let kf = k as f64;
        if kf > alpha + 2.0 {
            // Terms are single-signed and decay like k^{-α-2} from here.
            let tail = term.abs() * kf / (alpha + 1.0);
            if term.abs() < tol && tail < tol {
                return Some(SeriesSum {
                    value: sum,
                    error: tail,
                    terms: k + 1,
                    accelerated: false,
                });
            }
        }
    }
    None
}

/// Partial sums at `N_0 2^i` extrapolated in the known tail exponents
/// `α+1, α+2, ...` (the tail has an expansion in `N^{-α-1-j}`).
fn series_richardson(n: usize) -> SeriesSum {
    let alpha = (n as f64 - 2.0) / 2.0;
    let m = n as f64 - 2.0;
    let levels = 8;
    let base = 1000usize;
    let last = base << (levels - 1);
    let mut checkpoints = Vec::with_capacity(levels);
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut next = base;
    for (k, a) in coefficient_iter(n).enumerate().take(last + 1) {
        let y = a / (m - 2.0 * k as f64) - comp;
        let s = sum + y;
        comp = (s - sum) - y;
        sum = s;
        if k == next {
            checkpoints.push(sum);
            next *= 2;
        }
    }
    let mut table = checkpoints;
    let mut prev_best = table[table.len() - 1];
    let mut best = prev_best;
    for j in 0..levels - 1 {
        let f = 2f64.powf(alpha + 1.0 + j as f64);
        table = table.windows(2).map(|w| (f * w[1] - w[0]) / (f - 1.0)).collect();
        prev_best = best;
        best = table[table.len() - 1];
    }
    SeriesSum {
        value: best,
        error: (best - prev_best).abs(),
        terms: last + 1,
        accelerated: true,
    }
}

/// `a_k`, `S_n` (odd `n`) and `κ_n`.
pub fn coefficients(n: usize, tol: f64) -> Result<InversionConstants> {
    if n < 3 {
        return Err(Error::Argument(format!("need n >= 3, got {n}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Argument(format!("tolerance must be positive, got {tol}")));
    }
    let a: Vec<f64> = if n % 2 == 0 {
        coefficient_iter(n).take((n - 2) / 2 + 1).collect()
    } else {
        coefficient_iter(n).take(n + 1).collect()
    };
    let series = if n % 2 == 1 {
        Some(series_direct(n, tol, SERIES_CAP).unwrap_or_else(|| series_richardson(n)))
    } else {
        None
    };
    Ok(InversionConstants {
        n,
        a,
        series,
        kappa: kappa(n),
    })
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Pieces of `∫_0^∞ t^{1-n} (f(t) - P(t)) dt` for an even `f` vanishing
/// beyond `extent`, `P(t) = Σ_k c_k t^{2k}` its Taylor polynomial of degree
/// `n - 3`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularizedMoment {
    /// `[0, δ]`, Simpson with the continuation value at 0.
    pub head: f64,
    /// `[δ, extent]`, composite Gauss in `s = √((extent - t)/(extent - δ))`.
    pub body: f64,
    /// `[extent, T]`, where only `-P` remains.
    pub gap: f64,
    /// `[T, ∞)`.
    pub tail: f64,
}

impl RegularizedMoment {
    pub fn total(&self) -> f64 {
        self.head + self.body + self.gap + self.tail
    }
}

/// Inputs of [`regularized_moment`] other than the function itself.
#[derive(Clone, Debug)]
pub struct MomentSetup<'a> {
    pub n: usize,
    /// `c_k = f^{(2k)}(0)/(2k)!`, `k = 0..=(n-3)/2`.
    pub taylor: &'a [f64],
    /// `f^{(n-1)}(0)/(n-1)!`, the limit of the subtracted integrand at 0.
    pub continuation: f64,
    pub delta: f64,
    pub extent: f64,
    pub cutoff: f64,
    pub panels: usize,
}

/// `∫_a^∞ -P(t) t^{1-n} dt` restricted to `[a, b]` (`b = ∞` allowed).
fn polynomial_tail(n: usize, taylor: &[f64], a: f64, b: f64) -> f64 {
    taylor
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let p = 2.0 * k as f64 + 2.0 - n as f64; // negative
            let upper = if b.is_finite() { b.powf(p) } else { 0.0 };
            -c * (a.powf(p) - upper) / -p
        })
        .sum()
}

pub fn regularized_moment<F: Fn(f64) -> f64>(
    setup: &MomentSetup<'_>,
    gauss: &Quadrature1D,
    f: F,
) -> Result<RegularizedMoment> {
    let MomentSetup {
        n,
        taylor,
        continuation,
        delta,
        extent,
        cutoff,
        panels,
    } = *setup;
    if n % 2 == 0 || taylor.len() != (n - 1) / 2 {
        return Err(Error::Argument(format!(
            "regularized moment needs odd n and (n-1)/2 Taylor terms (n = {n}, got {})",
            taylor.len()
        )));
    }
    if !(delta > 0.0 && delta < extent && extent <= cutoff) {
        return Err(Error::Argument(format!(
            "need 0 < delta < extent <= T, got delta {delta}, extent {extent}, T {cutoff}"
        )));
    }
    let p = |t: f64| -> f64 {
        let t2 = t * t;
        taylor.iter().rev().fold(0.0, |acc, c| acc * t2 + c)
    };
    let g = |t: f64| (f(t) - p(t)) / t.powi(n as i32 - 1);
    let head = delta / 6.0 * (continuation + 4.0 * g(0.5 * delta) + g(delta));
    // t = extent - (extent - delta) s² on s ∈ [0, 1]: sections behave like
    // powers of √(extent - t) near the end of their support.
    let span = extent - delta;
    let width = 1.0 / panels.max(1) as f64;
    let mut body = 0.0;
    for i in 0..panels.max(1) {
        let half = 0.5 * width;
        let mid = i as f64 * width + half;
        body += half
            * gauss.integrate(|x| {
                let s = mid + half * x;
                2.0 * span * s * g(extent - span * s * s)
            });
    }
    Ok(RegularizedMoment {
        head,
        body,
        gap: polynomial_tail(n, taylor, extent, cutoff),
        tail: polynomial_tail(n, taylor, cutoff, f64::INFINITY),
    })
}

/// Split points `(δ, T)` for the odd functional.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Split {
    pub delta: f64,
    pub cutoff: f64,
}

/// Default split relative to the support bound.
pub fn default_split(support: f64) -> Split {
    Split {
        delta: 0.05 * support,
        cutoff: 1.02 * support,
    }
}

/// Section profile of `body` at `xi` on the derivative lattice (plus
/// `extra` points), with the support bound and exact extent.
fn lattice_profile(
    sampler: &SectionSampler<'_>,
    max_order: usize,
    support: f64,
    extent: f64,
    rules: &Rules,
    extra: &[f64],
) -> Result<SectionProfile> {
    let step = support * rules.settings.derivative_step;
    let grid = ProfileGrid::derivative_lattice(step, max_order)?.with_points(extra);
    let values = grid
        .ts
        .iter()
        .map(|&t| if t >= extent { 0.0 } else { sampler.area(t) })
        .collect();
    Ok(SectionProfile {
        xi: *sampler.xi(),
        step,
        ts: grid.ts,
        values,
        support,
    })
}

/// `A_ξ^{(n-2)}(0)` for even `n`.
pub fn even_derivative(body: &StarBody, xi: &Direction, rules: &Rules) -> Result<DerivativeEstimate> {
    let n = body.dim();
    if n % 2 == 1 {
        return Err(Error::WrongParity { n, expected: "even" });
    }
    let sampler = SectionSampler::new(body, xi, rules)?;
    let extent = sampler.extent();
    let support = extent * (1.0 + SUPPORT_MARGIN);
    let p = lattice_profile(&sampler, n - 2, support, extent, rules, &[])?;
    even_derivative_at_zero(&p, n - 2)
}

/// [`even_derivative`] at each grid direction.
pub fn even_derivative_field(
    body: &StarBody,
    grid: &[Direction],
    rules: &Rules,
) -> Result<Vec<DerivativeEstimate>> {
    if body.dim() % 2 == 1 {
        return Err(Error::WrongParity {
            n: body.dim(),
            expected: "even",
        });
    }
    rules.execution().try_map(grid, |xi| even_derivative(body, xi, rules))
}

/// Value and ingredients of the odd-`n` functional at one direction.
#[derive(Clone, Debug, PartialEq)]
pub struct OddFunctional {
    pub value: f64,
    pub pieces: RegularizedMoment,
    /// `A^{(2k)}(0)`, `k = 0..=(n-1)/2`.
    pub derivatives: Vec<DerivativeEstimate>,
    pub support: f64,
    pub extent: f64,
    pub split: Split,
}

/// `J(ξ)` for odd `n`.
pub fn odd_functional(
    body: &StarBody,
    xi: &Direction,
    rules: &Rules,
    split: Option<Split>,
) -> Result<OddFunctional> {
    let n = body.dim();
    if n % 2 == 0 {
        return Err(Error::WrongParity { n, expected: "odd" });
    }
    let sampler = SectionSampler::new(body, xi, rules)?;
    let extent = sampler.extent();
    let support = extent * (1.0 + SUPPORT_MARGIN);
    let split = split.unwrap_or_else(|| default_split(support));
    if !(split.delta > 0.0 && split.delta < split.cutoff) {
        return Err(Error::Argument(format!(
            "split out of order: delta {} T {}",
            split.delta, split.cutoff
        )));
    }
    if split.cutoff < extent {
        return Err(Error::Argument(format!(
            "T = {} is inside the section support (extent {extent})",
            split.cutoff
        )));
    }
    if split.delta >= extent {
        return Err(Error::Argument(format!(
            "delta = {} must be below the section extent {extent}",
            split.delta
        )));
    }
    let p = lattice_profile(&sampler, n - 1, support, extent, rules, &[])?;
    let derivatives = (0..=(n - 1) / 2)
        .map(|k| even_derivative_at_zero(&p, 2 * k))
        .collect::<Result<Vec<_>>>()?;
    let taylor: Vec<f64> = derivatives[..(n - 1) / 2]
        .iter()
        .enumerate()
        .map(|(k, d)| d.value / factorial(2 * k))
        .collect();
    let continuation = derivatives[(n - 1) / 2].value / factorial(n - 1);
    let setup = MomentSetup {
        n,
        taylor: &taylor,
        continuation,
        delta: split.delta,
        extent,
        cutoff: split.cutoff,
        panels: 1,
    };
    let pieces = regularized_moment(&setup, &rules.gauss, |t| {
        if t >= extent {
            0.0
        } else {
            sampler.area(t)
        }
    })?;
    Ok(OddFunctional {
        value: pieces.total(),
        pieces,
        derivatives,
        support,
        extent,
        split,
    })
}

/// The inner field of the inversion at one direction: `A^{(n-2)}(0)` for
/// even `n`, `J(ξ)` for odd `n`.
pub fn section_field(body: &StarBody, xi: &Direction, rules: &Rules, split: Option<Split>) -> Result<f64> {
    match Parity::of(body.dim()) {
        Parity::Even => Ok(even_derivative(body, xi, rules)?.value),
        Parity::Odd => Ok(odd_functional(body, xi, rules, split)?.value),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct InverseOptions {
    /// Also apply the forward transform to the estimate and compare with `ρ_K`.
    pub reconstruct: bool,
    pub split: Option<Split>,
}

/// Estimates of `R^{-1} ρ_K` on a direction grid, with the round trip.
#[derive(Clone, Debug)]
pub struct InverseRadonField {
    pub n: usize,
    pub method: Parity,
    pub grid: Vec<Direction>,
    /// `R^{-1} ρ_K(ξ)`.
    pub values: Vec<f64>,
    pub min_value: f64,
    pub argmin: Direction,
    /// `ρ_K` on the grid.
    pub rho_true: Vec<f64>,
    /// `R(values)`, an estimate of `ρ_K`, when requested.
    pub reconstructed: Option<Vec<f64>>,
}

impl InverseRadonField {
    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max |R(values) - ρ_K|` over the grid.
    pub fn roundtrip_max_abs_err(&self) -> Option<f64> {
        self.reconstructed.as_ref().map(|r| {
            r.iter()
                .zip(&self.rho_true)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
    }

    pub fn roundtrip_max_rel_err(&self) -> Option<f64> {
        self.reconstructed.as_ref().map(|r| {
            r.iter()
                .zip(&self.rho_true)
                .map(|(a, b)| ((a - b) / b).abs())
                .fold(0.0, f64::max)
        })
    }
}

/// `R^{-1} ρ_K` on `grid` as the section field divided by `κ_n`; with
/// `reconstruct`, also its forward transform `≈ ρ_K`.
pub fn inverse_radon(
    body: &StarBody,
    grid: &[Direction],
    rules: &Rules,
    opts: InverseOptions,
) -> Result<InverseRadonField> {
    let n = body.dim();
    if grid.is_empty() {
        return Err(Error::Argument("direction grid is empty".into()));
    }
    if let Some(bad) = grid.iter().find(|d| d.dim() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: bad.dim(),
        });
    }
    let k = kappa(n);
    let exec = rules.execution();
    let field = |xi: &Direction| section_field(body, xi, rules, opts.split);
    let values: Vec<f64> = exec
        .try_map(grid, |xi| field(xi))?
        .into_iter()
        .map(|v| v / k)
        .collect();
    let reconstructed = if opts.reconstruct {
        // The field is even, so half of the antipodally symmetric rule suffices.
        let half = rules.radon.antipodal_fold();
        let mut nodes = Vec::with_capacity(grid.len() * half.len());
        for e in grid {
            let frame = orthonormal_complement(e.vector())?;
            let emb = embed_rule(&half, &frame)?;
            nodes.extend(emb.nodes.into_iter().map(Direction::new_unchecked));
        }
        let f = exec.try_map(&nodes, |xi| field(xi))?;
        Some(
            f.chunks(half.len())
                .map(|c| c.iter().zip(&half.weights).map(|(v, w)| v * w).sum::<f64>() / k)
                .collect(),
        )
    } else {
        None
    };
    let (imin, &min_value) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("grid is nonempty");
    Ok(InverseRadonField {
        n,
        method: Parity::of(n),
        argmin: grid[imin],
        min_value,
        rho_true: grid.iter().map(|e| body.radial_at(e.vector())).collect(),
        grid: grid.to_vec(),
        values,
        reconstructed,
    })
}

/// `S_n` recovered from the regularized-moment machinery applied to the
/// profile `G(x) = exp(-(scale·x)²)` in place of the chord profile:
/// `∫_0^∞ t^{1-n}(F_G - P_G) dt / G(0)` with
/// `F_G(t) = ∫_t^∞ (r²-t²)^{(n-2)/2} G'(r) dr` and
/// `P_G(t) = Σ_k a_k t^{2k} ∫_0^∞ r^{n-2-2k} G'(r) dr`.
pub fn gaussian_crosscheck(n: usize, scale: f64, rules: &Rules) -> Result<f64> {
    if n % 2 == 0 {
        return Err(Error::WrongParity { n, expected: "odd" });
    }
    if !(scale > 0.0) {
        return Err(Error::Argument(format!("scale must be positive, got {scale}")));
    }
    let s2 = scale * scale;
    // G'(r)/r, smooth and even.
    let dg_over_r = |r2: f64| -2.0 * s2 * (-s2 * r2).exp();
    let reach = 9.0 / scale;
    let nodes = rules.settings.gauss_nodes;
    let radial = gauss_composite(nodes, 16, 0.0, reach)?;
    // r = √(t² + x²) turns (r²-t²)^{(n-2)/2} dr into x^{n-1}/r dx.
    let f_g = |t: f64| radial.integrate(|x| x.powi(n as i32 - 1) * dg_over_r(t * t + x * x));
    let a: Vec<f64> = coefficient_iter(n).take((n - 1) / 2).collect();
    let taylor: Vec<f64> = a
        .iter()
        .enumerate()
        .map(|(k, ak)| ak * radial.integrate(|r| r.powi((n - 1 - 2 * k) as i32) * dg_over_r(r * r)))
        .collect();
    let width = 3.0 / scale;
    let step = width * rules.settings.derivative_step;
    let grid = ProfileGrid::derivative_lattice(step, n - 1)?;
    let profile = SectionProfile {
        xi: Direction::axis(n, 0),
        step,
        values: grid.ts.iter().map(|&t| f_g(t)).collect(),
        ts: grid.ts,
        support: width,
    };
    let continuation = even_derivative_at_zero(&profile, n - 1)?.value / factorial(n - 1);
    let setup = MomentSetup {
        n,
        taylor: &taylor,
        continuation,
        delta: 0.05 * width,
        extent: reach,
        cutoff: 1.02 * reach,
        panels: 16,
    };
    let m = regularized_moment(&setup, &rules.gauss, f_g)?;
    Ok(m.total() / 1.0) // G(0) = 1
}
