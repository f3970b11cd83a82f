//! Finite-difference partials of a real potential on `Cⁿ ≅ R²ⁿ`, and their
//! Wirtinger combinations.
//!
//! Every partial is a nested product of the fourth-order five-point first
//! derivative stencil. Stencil evaluations are memoised by integer offset, so
//! all derivatives at one point share their function values.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A real-valued function on a chart of `Cⁿ`.
pub trait Potential: Sync {
    fn dimension(&self) -> usize;
    fn value(&self, z: &[Complex64]) -> Result<f64>;
}

/// Adapts a closure to [`Potential`].
pub struct FnPotential<F> {
    dimension: usize,
    f: F,
}

impl<F> FnPotential<F>
where
    F: Fn(&[Complex64]) -> f64 + Sync,
{
    pub fn new(dimension: usize, f: F) -> Self {
        Self { dimension, f }
    }
}

impl<F> Potential for FnPotential<F>
where
    F: Fn(&[Complex64]) -> f64 + Sync,
{
    fn dimension(&self) -> usize {
        self.dimension
    }
    fn value(&self, z: &[Complex64]) -> Result<f64> {
        Ok((self.f)(z))
    }
}

const OFFSETS: [i8; 4] = [-2, -1, 1, 2];
const WEIGHTS: [f64; 4] = [1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0];

/// Memoised real partial derivatives at one point with one step.
pub struct RealPartials<'a, P: Potential + ?Sized> {
    potential: &'a P,
    center: Vec<Complex64>,
    step: f64,
    values: HashMap<Vec<i8>, f64>,
    partials: HashMap<Vec<usize>, f64>,
}

impl<'a, P: Potential + ?Sized> RealPartials<'a, P> {
    pub fn new(potential: &'a P, center: &[Complex64], step: f64) -> Self {
        Self {
            potential,
            center: center.to_vec(),
            step,
            values: HashMap::new(),
            partials: HashMap::new(),
        }
    }

    fn eval(&mut self, offset: &[i8]) -> Result<f64> {
        if let Some(&v) = self.values.get(offset) {
            return Ok(v);
        }
        let z: Vec<Complex64> = self
            .center
            .iter()
            .enumerate()
            .map(|(j, c)| {
                c + Complex64::new(
                    self.step * f64::from(offset[2 * j]),
                    self.step * f64::from(offset[2 * j + 1]),
                )
            })
            .collect();
        let v = self.potential.value(&z)?;
        if !v.is_finite() {
            return Err(Error::Stencil {
                point: format!("{z:?}"),
            });
        }
        self.values.insert(offset.to_vec(), v);
        Ok(v)
    }

    /// Partial derivative along real coordinates `dirs` (`2j` is `Re z_j`,
    /// `2j+1` is `Im z_j`).
    pub fn partial(&mut self, dirs: &[usize]) -> Result<f64> {
        let mut key = dirs.to_vec();
        key.sort_unstable();
        if let Some(&v) = self.partials.get(&key) {
            return Ok(v);
        }
        let nreal = 2 * self.center.len();
        if key.iter().any(|&d| d >= nreal) {
            return Err(Error::Input(format!("real direction out of range in {key:?}")));
        }
        let mut combined: HashMap<Vec<i8>, f64> = HashMap::new();
        let k = key.len();
        let mut choice = vec![0usize; k];
        'outer: loop {
            let mut offset = vec![0i8; nreal];
            let mut w = 1.0;
            for (slot, &c) in choice.iter().enumerate() {
                offset[key[slot]] += OFFSETS[c];
                w *= WEIGHTS[c];
            }
            *combined.entry(offset).or_insert(0.0) += w;
            for slot in 0..k {
                choice[slot] += 1;
                if choice[slot] < 4 {
                    continue 'outer;
                }
                choice[slot] = 0;
            }
            break;
        }
        let mut entries: Vec<(Vec<i8>, f64)> = combined.into_iter().filter(|e| e.1 != 0.0).collect();
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        let mut acc = 0.0;
        for (offset, w) in entries {
            acc += w * self.eval(&offset)?;
        }
        let v = acc / self.step.powi(k as i32);
        self.partials.insert(key, v);
        Ok(v)
    }

    /// Wirtinger derivative: `ops[m] = (j, conj)` applies `∂/∂z̄_j` when
    /// `conj`, else `∂/∂z_j`.
    pub fn wirtinger(&mut self, ops: &[(usize, bool)]) -> Result<Complex64> {
        let k = ops.len();
        let mut total = Complex64::new(0.0, 0.0);
        for mask in 0..(1usize << k) {
            let mut coeff = Complex64::new(1.0, 0.0);
            let mut dirs = Vec::with_capacity(k);
            for (m, &(j, conj)) in ops.iter().enumerate() {
                if mask & (1 << m) == 0 {
                    dirs.push(2 * j);
                    coeff *= 0.5;
                } else {
                    dirs.push(2 * j + 1);
                    coeff *= if conj {
                        Complex64::new(0.0, 0.5)
                    } else {
                        Complex64::new(0.0, -0.5)
                    };
                }
            }
            total += coeff * self.partial(&dirs)?;
        }
        Ok(total)
    }

    pub fn evaluations(&self) -> usize {
        self.values.len()
    }
}

/// The step actually used at `point`: `h · max(1, |z|)`.
pub fn scaled_step(h: f64, point: &[Complex64]) -> f64 {
    let norm = point.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    h * norm.max(1.0)
}

/// Real Laplacian `Σ ∂²/∂x_r²` by central differences.
pub fn laplacian<P: Potential + ?Sized>(potential: &P, point: &[Complex64], h: f64) -> Result<f64> {
    let mut rp = RealPartials::new(potential, point, h);
    let mut sum = 0.0;
    for r in 0..2 * point.len() {
        sum += rp.partial(&[r, r])?;
    }
    Ok(sum)
}
