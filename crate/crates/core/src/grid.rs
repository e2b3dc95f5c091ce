//! Direction sets on `S^{n-1}` for evaluating fields.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geom::{Direction, VecN, MAX_DIM};
use crate::quadrature::sphere_rule;

/// Nodes of the product rule on `S^{n-1}` at `level`.
pub fn rule_directions(n: usize, level: usize) -> Result<Vec<Direction>> {
    if n < 2 {
        return Err(Error::Argument(format!("need n >= 2, got {n}")));
    }
    Ok(sphere_rule(n - 1, level)?
        .nodes
        .into_iter()
        .map(Direction::new_unchecked)
        .collect())
}

/// `count` directions uniform on `S^{n-1}`, reproducible from `seed`.
pub fn random_directions(n: usize, count: usize, seed: u64) -> Result<Vec<Direction>> {
    if !(2..=MAX_DIM).contains(&n) {
        return Err(Error::Argument(format!("dimension {n} not in 2..={MAX_DIM}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut buf = [0.0; MAX_DIM];
    while out.len() < count {
        for x in buf.iter_mut().take(n) {
            *x = StandardNormal.sample(&mut rng);
        }
        let v = VecN::from_slice(&buf[..n])?;
        if v.norm() > 1e-8 {
            out.push(v.normalized()?);
        }
    }
    Ok(out)
}
