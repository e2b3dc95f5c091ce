//! Small fixed-capacity vectors, unit directions and sphere/ball constants.

use std::f64::consts::PI;
use std::ops::{Add, Index, Mul, Neg, Sub};

use crate::error::{arg, Error, Result};

/// Largest ambient dimension handled anywhere in the crate.
pub const MAX_DIM: usize = 8;
/// Supported range for the dimension `n` of a star body.
pub const MIN_BODY_DIM: usize = 3;
pub const MAX_BODY_DIM: usize = 8;

const UNIT_TOL: f64 = 1e-12;

/// A point of `R^dim`, `dim <= MAX_DIM`, stored inline so it can be `Copy`.
#[derive(Clone, Copy, PartialEq)]
pub struct VecN {
    coords: [f64; MAX_DIM],
    dim: usize,
}

impl std::fmt::Debug for VecN {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.as_slice()).finish()
    }
}

impl VecN {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} out of range");
        VecN {
            coords: [0.0; MAX_DIM],
            dim,
        }
    }

    pub fn from_slice(xs: &[f64]) -> Result<Self> {
        if xs.is_empty() || xs.len() > MAX_DIM {
            return arg(format!("vector length {} not in 1..={MAX_DIM}", xs.len()));
        }
        if xs.iter().any(|x| !x.is_finite()) {
            return arg("non-finite coordinate");
        }
        let mut v = VecN::zeros(xs.len());
        v.coords[..xs.len()].copy_from_slice(xs);
        Ok(v)
    }

    /// The `i`-th standard basis vector.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = VecN::zeros(dim);
        v.coords[i] = 1.0;
        v
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.coords[..self.dim]
    }

    #[inline]
    pub fn dot(&self, other: &VecN) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        let mut s = 0.0;
        for i in 0..self.dim {
            s += self.coords[i] * other.coords[i];
        }
        s
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    #[inline]
    pub fn scale(&self, c: f64) -> VecN {
        let mut v = *self;
        for x in &mut v.coords[..self.dim] {
            *x *= c;
        }
        v
    }

    /// `self + c * other`.
    #[inline]
    pub fn axpy(&self, c: f64, other: &VecN) -> VecN {
        let mut v = *self;
        for i in 0..self.dim {
            v.coords[i] += c * other.coords[i];
        }
        v
    }

    pub fn normalized(&self) -> Result<Direction> {
        let r = self.norm();
        if r == 0.0 || !r.is_finite() {
            return arg("cannot normalize a zero vector");
        }
        Ok(Direction(self.scale(1.0 / r)))
    }
}

impl Index<usize> for VecN {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.as_slice()[i]
    }
}

impl Add for VecN {
    type Output = VecN;
    fn add(self, rhs: VecN) -> VecN {
        self.axpy(1.0, &rhs)
    }
}

impl Sub for VecN {
    type Output = VecN;
    fn sub(self, rhs: VecN) -> VecN {
        self.axpy(-1.0, &rhs)
    }
}

impl Neg for VecN {
    type Output = VecN;
    fn neg(self) -> VecN {
        self.scale(-1.0)
    }
}

impl Mul<f64> for VecN {
    type Output = VecN;
    fn mul(self, c: f64) -> VecN {
        self.scale(c)
    }
}

/// A unit vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Direction(VecN);

impl Direction {
    pub fn new(v: VecN) -> Result<Self> {
        if (v.norm() - 1.0).abs() > UNIT_TOL {
            return arg(format!("|x| = {} is not 1", v.norm()));
        }
        Ok(Direction(v))
    }

    pub fn from_slice(xs: &[f64]) -> Result<Self> {
        Direction::new(VecN::from_slice(xs)?)
    }

    pub fn axis(dim: usize, i: usize) -> Self {
        Direction(VecN::basis(dim, i))
    }

    /// Wraps a vector the caller already knows to be unit length.
    #[inline]
    pub(crate) fn new_unchecked(v: VecN) -> Self {
        Direction(v)
    }

    #[inline]
    pub fn vector(&self) -> &VecN {
        &self.0
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    #[inline]
    pub fn dot(&self, v: &VecN) -> f64 {
        self.0.dot(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn antipode(&self) -> Direction {
        Direction(-self.0)
    }
}

/// An orthonormal basis of the hyperplane orthogonal to `normal`.
#[derive(Clone, Debug)]
pub struct OrthoBasis {
    pub normal: Direction,
    pub basis: Vec<VecN>,
}

impl OrthoBasis {
    /// Maps coordinates with respect to `basis` into the ambient space.
    #[inline]
    pub fn lift(&self, local: &[f64]) -> VecN {
        let mut v = VecN::zeros(self.normal.dim());
        for (c, b) in local.iter().zip(&self.basis) {
            v = v.axpy(*c, b);
        }
        v
    }
}

/// Orthonormal complement of `xi`, built by Gram-Schmidt starting from the
/// standard basis vector least aligned with `xi` (lowest index on ties),
/// followed by the remaining standard basis vectors in index order.
pub fn orthonormal_complement(xi: &VecN) -> Result<OrthoBasis> {
    let n = xi.dim();
    if n < 2 {
        return arg("complement needs dimension at least 2");
    }
    let normal = Direction::new(*xi)?;
    let mut first = 0;
    for i in 1..n {
        if xi[i].abs() < xi[first].abs() {
            first = i;
        }
    }
    let order = std::iter::once(first).chain((0..n).filter(|&i| i != first));
    let mut done: Vec<VecN> = vec![*xi];
    for i in order {
        if done.len() == n {
            break;
        }
        let mut v = VecN::basis(n, i);
        // Two passes of classical Gram-Schmidt for stability.
        for _ in 0..2 {
            for q in &done {
                v = v.axpy(-v.dot(q), q);
            }
        }
        let r = v.norm();
        if r > 1e-6 {
            done.push(v.scale(1.0 / r));
        }
    }
    debug_assert_eq!(done.len(), n);
    done.remove(0);
    Ok(OrthoBasis {
        normal,
        basis: done,
    })
}

/// Surface area of `S^k` and volume of `B^k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphereConstants {
    pub k: usize,
    pub s_k: f64,
    pub v_k: f64,
}

/// `s_k = 2π^{(k+1)/2}/Γ((k+1)/2)`, `v_k = π^{k/2}/Γ(k/2+1)`, evaluated by
/// the recursions `v_k = s_{k-1}/k`, `s_k = 2π v_{k-1}` from `v_0 = 1`, `s_0 = 2`.
pub fn sphere_constants(k: i64) -> Result<SphereConstants> {
    if k < 0 {
        return Err(Error::Argument(format!("negative sphere index {k}")));
    }
    let k = k as usize;
    Ok(SphereConstants {
        k,
        s_k: sphere_area(k),
        v_k: ball_volume(k),
    })
}

/// `s_k`, the surface measure of the unit sphere `S^k`.
pub fn sphere_area(k: usize) -> f64 {
    match k {
        0 => 2.0,
        _ => 2.0 * PI * ball_volume(k - 1),
    }
}

/// `v_k`, the volume of the unit ball `B^k`.
pub fn ball_volume(k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / k as f64 * ball_volume(k - 2),
    }
}
