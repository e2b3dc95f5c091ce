//! Positivity of `R^{-1} ρ_K` and Busemann–Petty style comparisons of
//! central sections and volumes.

use std::f64::consts::PI;
use std::fmt;

use crate::bodies::{AxisSpec, BodySpec, StarBody};
use crate::error::{Error, Result};
use crate::geom::Direction;
use crate::inversion::{even_derivative, inverse_radon, InverseOptions, InverseRadonField};
use crate::rules::{RuleSet, Rules};
use crate::sections::SectionSampler;

/// Relative slack before a section comparison counts as violated.
pub const DOMINANCE_SLACK: f64 = 1e-9;

/// `R^{-1} ρ_K` on `grid` with its minimum; no round trip.
pub fn positivity_scan(body: &StarBody, grid: &[Direction], rules: &Rules) -> Result<InverseRadonField> {
    inverse_radon(body, grid, rules, InverseOptions::default())
}

/// `-A_ξ''(0) / (16π²)` for `n = 4`, which equals `R^{-1} ρ_K(ξ)` there.
pub fn n4_remark_value(body: &StarBody, xi: &Direction, rules: &Rules) -> Result<f64> {
    if body.dim() != 4 {
        return Err(Error::Argument(format!(
            "the second-derivative formula is specific to n = 4, got n = {}",
            body.dim()
        )));
    }
    Ok(-even_derivative(body, xi, rules)?.value / (16.0 * PI * PI))
}

/// Central section comparison `A_{K,ξ}(0) <= A_{L,ξ}(0)` on a grid.
#[derive(Clone, Debug)]
pub struct Dominance {
    pub k_sections: Vec<f64>,
    pub l_sections: Vec<f64>,
    /// Indices where `A_K > A_L (1 + slack)`.
    pub violations: Vec<usize>,
    /// `min_ξ (A_L - A_K) / A_L`.
    pub worst_margin: f64,
}

impl Dominance {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

fn central_sections(body: &StarBody, grid: &[Direction], rules: &Rules) -> Result<Vec<f64>> {
    rules
        .execution()
        .try_map(grid, |xi| Ok(SectionSampler::new(body, xi, rules)?.area(0.0)))
}

fn check_pair(k: &StarBody, l: &StarBody, grid: &[Direction]) -> Result<()> {
    if k.dim() != l.dim() {
        return Err(Error::DimensionMismatch {
            expected: k.dim(),
            got: l.dim(),
        });
    }
    if grid.is_empty() {
        return Err(Error::Argument("direction grid is empty".into()));
    }
    Ok(())
}

pub fn section_dominance(k: &StarBody, l: &StarBody, grid: &[Direction], rules: &Rules) -> Result<Dominance> {
    check_pair(k, l, grid)?;
    let ks = central_sections(k, grid, rules)?;
    let ls = central_sections(l, grid, rules)?;
    let mut violations = Vec::new();
    let mut worst = f64::INFINITY;
    for (i, (a, b)) in ks.iter().zip(&ls).enumerate() {
        if *a > b * (1.0 + DOMINANCE_SLACK) {
            violations.push(i);
        }
        worst = worst.min((b - a) / b);
    }
    Ok(Dominance {
        k_sections: ks,
        l_sections: ls,
        violations,
        worst_margin: worst,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Sections of `K` dominated and `Vol(K) <= Vol(L)`.
    Consistent,
    /// Sections dominated, `Vol(K) > Vol(L)`, gaps well above the error.
    CounterexampleCandidate,
    /// Some section of `K` exceeds that of `L`.
    HypothesisFails,
    /// Gaps within the numerical error.
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Consistent => "consistent",
            Verdict::CounterexampleCandidate => "counterexample-candidate",
            Verdict::HypothesisFails => "hypothesis-fails",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug)]
pub struct BPReport {
    pub k: BodySpec,
    pub l: BodySpec,
    pub n: usize,
    pub directions: usize,
    pub dominance: Dominance,
    /// `min_ξ (A_L - A_K)` in absolute terms.
    pub section_gap: f64,
    /// Largest change of any central section between the given and the coarser rules.
    pub section_error: f64,
    pub volume_k: f64,
    pub volume_l: f64,
    pub volume_error: f64,
    /// Minimum of `R^{-1} ρ_K` on the grid.
    pub min_inverse_k: f64,
    pub verdict: Verdict,
}

impl BPReport {
    pub fn volume_gap(&self) -> f64 {
        self.volume_k - self.volume_l
    }

    /// `key=value` lines in a fixed order.
    pub fn to_key_values(&self) -> Vec<(&'static str, String)> {
        vec![
            ("n", self.n.to_string()),
            ("k", self.k.to_string()),
            ("l", self.l.to_string()),
            ("directions", self.directions.to_string()),
            ("violations", self.dominance.violations.len().to_string()),
            ("worst_margin", format!("{:.11e}", self.dominance.worst_margin)),
            ("section_gap", format!("{:.11e}", self.section_gap)),
            ("section_error", format!("{:.11e}", self.section_error)),
            ("volume_k", format!("{:.11e}", self.volume_k)),
            ("volume_l", format!("{:.11e}", self.volume_l)),
            ("volume_error", format!("{:.11e}", self.volume_error)),
            ("min_inverse_k", format!("{:.11e}", self.min_inverse_k)),
            ("verdict", self.verdict.to_string()),
        ]
    }
}

impl fmt::Display for BPReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.to_key_values() {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// Verdict from dominance, `(Vol K, Vol L, error)` and `(min_ξ A_L - A_K, error)`.
fn classify(dominated: bool, volumes: (f64, f64, f64), sections: (f64, f64)) -> Verdict {
    let (vk, vl, verr) = volumes;
    let (gap, serr) = sections;
    if !dominated {
        Verdict::HypothesisFails
    } else if vk <= vl * (1.0 + DOMINANCE_SLACK) {
        Verdict::Consistent
    } else if gap > 3.0 * serr && vk - vl > 3.0 * verr {
        Verdict::CounterexampleCandidate
    } else {
        Verdict::Inconclusive
    }
}

fn coarser(rules: &Rules) -> Result<Rules> {
    let s = &rules.settings;
    let half = |l: usize| (l / 2).max(1);
    let settings = RuleSet {
        section_level: half(s.section_level),
        support_level: half(s.support_level),
        ..s.clone()
    };
    Rules::new(rules.n, settings)
}

/// Compares `K` and `L`: central sections on `grid`, volumes, and the sign of
/// `R^{-1} ρ_K`. Errors come from repeating with rules of half the level.
pub fn bp_experiment(k: &StarBody, l: &StarBody, grid: &[Direction], rules: &Rules) -> Result<BPReport> {
    check_pair(k, l, grid)?;
    let dominance = section_dominance(k, l, grid, rules)?;
    let coarse = coarser(rules)?;
    let ks_c = central_sections(k, grid, &coarse)?;
    let ls_c = central_sections(l, grid, &coarse)?;
    let section_error = dominance
        .k_sections
        .iter()
        .zip(&ks_c)
        .chain(dominance.l_sections.iter().zip(&ls_c))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let section_gap = dominance
        .k_sections
        .iter()
        .zip(&dominance.l_sections)
        .map(|(a, b)| b - a)
        .fold(f64::INFINITY, f64::min);
    let volume_k = k.volume(&rules.support)?;
    let volume_l = l.volume(&rules.support)?;
    let volume_error =
        (volume_k - k.volume(&coarse.support)?).abs() + (volume_l - l.volume(&coarse.support)?).abs();
    let min_inverse_k = positivity_scan(k, grid, rules)?.min_value;
    let verdict = classify(
        dominance.holds(),
        (volume_k, volume_l, volume_error),
        (section_gap, section_error),
    );
    Ok(BPReport {
        k: k.spec().clone(),
        l: l.spec().clone(),
        n: k.dim(),
        directions: grid.len(),
        dominance,
        section_gap,
        section_error,
        volume_k,
        volume_l,
        volume_error,
        min_inverse_k,
        verdict,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanRow {
    pub eps: f64,
    pub min_value: f64,
    pub argmin: Direction,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationScan {
    pub n: usize,
    pub degree: usize,
    pub rows: Vec<ScanRow>,
}

impl PerturbationScan {
    /// First `ε` in scan order with a negative minimum.
    pub fn first_negative(&self) -> Option<f64> {
        self.rows.iter().find(|r| r.min_value < 0.0).map(|r| r.eps)
    }
}

/// `min R^{-1} ρ` for `ρ = 1 + ε P_d(<x, e_n>)` over the listed `ε`.
pub fn perturbation_scan(
    n: usize,
    degree: usize,
    eps: &[f64],
    grid: &[Direction],
    rules: &Rules,
) -> Result<PerturbationScan> {
    let mut rows = Vec::with_capacity(eps.len());
    for &e in eps {
        let body = StarBody::new(
            BodySpec::PerturbedBall {
                eps: e,
                degree,
                axis: AxisSpec::Last,
            },
            n,
        )?;
        let f = positivity_scan(&body, grid, rules)?;
        rows.push(ScanRow {
            eps: e,
            min_value: f.min_value,
            argmin: f.argmin,
        });
    }
    Ok(PerturbationScan { n, degree, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::sphere_area;

    fn axes(n: usize) -> Vec<Direction> {
        (0..n).map(|i| Direction::axis(n, i)).collect()
    }

    #[test]
    fn second_derivative_formula_needs_four_dimensions() {
        let r = Rules::for_dim(3).unwrap();
        let b = StarBody::parse("ball:r=1", 3).unwrap();
        assert!(matches!(n4_remark_value(&b, &Direction::axis(3, 0), &r), Err(Error::Argument(_))));
        let r4 = Rules::for_dim(4).unwrap();
        let b4 = StarBody::parse("ball:r=1", 4).unwrap();
        let v = n4_remark_value(&b4, &Direction::axis(4, 2), &r4).unwrap();
        assert!((v - 1.0 / (4.0 * PI)).abs() < 1e-4);
    }

    #[test]
    fn ball_inverse_is_constant() {
        let r = Rules::for_dim(4).unwrap();
        let b = StarBody::parse("ball:r=1", 4).unwrap();
        let f = positivity_scan(&b, &axes(4), &r).unwrap();
        let expect = 1.0 / sphere_area(2);
        for v in &f.values {
            assert!((v - expect).abs() < 1e-3 * expect);
        }
        assert!(f.reconstructed.is_none());
    }

    #[test]
    fn dilated_balls() {
        let r = Rules::for_dim(3).unwrap();
        let k = StarBody::parse("ball:r=1", 3).unwrap();
        let l = StarBody::parse("ball:r=1.1", 3).unwrap();
        let rep = bp_experiment(&k, &l, &axes(3), &r).unwrap();
        assert_eq!(rep.verdict, Verdict::Consistent);
        assert!(rep.dominance.holds());
        let rep = bp_experiment(&l, &k, &axes(3), &r).unwrap();
        assert_eq!(rep.verdict, Verdict::HypothesisFails);
        assert_eq!(rep.dominance.violations.len(), 3);
    }

    #[test]
    fn verdict_thresholds() {
        assert_eq!(classify(false, (1.0, 2.0, 0.0), (0.1, 0.0)), Verdict::HypothesisFails);
        assert_eq!(classify(true, (1.0, 2.0, 0.0), (0.1, 0.0)), Verdict::Consistent);
        assert_eq!(classify(true, (2.0, 1.0, 0.1), (0.1, 0.01)), Verdict::CounterexampleCandidate);
        // Gaps inside three error bars.
        assert_eq!(classify(true, (2.0, 1.0, 0.4), (0.1, 0.01)), Verdict::Inconclusive);
        assert_eq!(classify(true, (2.0, 1.0, 0.1), (0.1, 0.04)), Verdict::Inconclusive);
    }

    #[test]
    fn equal_bodies_do_not_violate() {
        let r = Rules::for_dim(3).unwrap();
        let k = StarBody::parse("ellipsoid:a=1,1.3,1.7", 3).unwrap();
        let d = section_dominance(&k, &k, &axes(3), &r).unwrap();
        assert!(d.holds());
        assert_eq!(d.worst_margin, 0.0);
    }

    #[test]
    fn report_serializes_in_order() {
        let r = Rules::for_dim(3).unwrap();
        let k = StarBody::parse("ball:r=1", 3).unwrap();
        let l = StarBody::parse("ball:r=1.1", 3).unwrap();
        let text = bp_experiment(&k, &l, &axes(3), &r).unwrap().to_string();
        let keys: Vec<&str> = text.lines().map(|l| l.split('=').next().unwrap()).collect();
        assert_eq!(keys.first(), Some(&"n"));
        assert_eq!(keys.last(), Some(&"verdict"));
        assert!(text.contains("verdict=consistent"));
    }

    #[test]
    fn mismatched_dimensions_are_rejected() {
        let r = Rules::for_dim(3).unwrap();
        let k = StarBody::parse("ball:r=1", 3).unwrap();
        let l = StarBody::parse("ball:r=1", 4).unwrap();
        assert!(bp_experiment(&k, &l, &axes(3), &r).is_err());
        assert!(section_dominance(&k, &k, &[], &r).is_err());
    }

    #[test]
    fn scan_rejects_inadmissible_eps() {
        let r = Rules::for_dim(3).unwrap();
        assert!(perturbation_scan(3, 4, &[0.1, 1.2], &axes(3), &r).is_err());
        let s = perturbation_scan(3, 4, &[0.0, 0.1], &axes(3), &r).unwrap();
        assert_eq!(s.first_negative(), None);
        assert!(s.rows[0].min_value > 0.0);
    }
}
