//! Truncated multivariate Taylor arithmetic ("jets") of total order four, and
//! the small scalar trait that lets a potential be evaluated either on plain
//! floats or on jets.
//!
//! For the exact derivative path the variables are `(dz_1, dz̄_1, …, dz_n, dz̄_n)`
//! treated as independent, so every Wirtinger derivative of order ≤ 4 of a
//! real-analytic potential can be read off a single jet evaluation.

use std::collections::HashMap;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

pub const ORDER: usize = 4;

#[derive(Debug)]
pub struct JetSpace {
    nvars: usize,
    monomials: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    products: Vec<(usize, usize, usize)>,
}

impl JetSpace {
    fn build(nvars: usize) -> Self {
        let mut monomials = Vec::new();
        fn rec(prefix: &mut Vec<u8>, left: usize, budget: usize, out: &mut Vec<Vec<u8>>) {
            if left == 0 {
                out.push(prefix.clone());
                return;
            }
            for a in 0..=budget {
                prefix.push(a as u8);
                rec(prefix, left - 1, budget - a, out);
                prefix.pop();
            }
        }
        rec(&mut Vec::new(), nvars, ORDER, &mut monomials);
        monomials.sort_by_key(|m| m.iter().map(|&a| a as usize).sum::<usize>());
        let index: HashMap<Vec<u8>, usize> =
            monomials.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        let mut products = Vec::new();
        for (i, a) in monomials.iter().enumerate() {
            for (j, b) in monomials.iter().enumerate() {
                let sum: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                if let Some(&k) = index.get(&sum) {
                    products.push((i, j, k));
                }
            }
        }
        Self {
            nvars,
            monomials,
            index,
            products,
        }
    }

    pub fn shared(nvars: usize) -> Arc<JetSpace> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<JetSpace>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("jet space cache poisoned");
        guard
            .entry(nvars)
            .or_insert_with(|| Arc::new(JetSpace::build(nvars)))
            .clone()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    coeffs: Vec<Complex64>,
}

impl Jet {
    pub fn constant(space: &Arc<JetSpace>, c: Complex64) -> Jet {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); space.len()];
        coeffs[0] = c;
        Jet {
            space: space.clone(),
            coeffs,
        }
    }

    /// `c + dx_var`.
    pub fn variable(space: &Arc<JetSpace>, var: usize, c: Complex64) -> Jet {
        let mut jet = Jet::constant(space, c);
        let mut e = vec![0u8; space.nvars];
        e[var] = 1;
        jet.coeffs[space.index[&e]] = Complex64::new(1.0, 0.0);
        jet
    }

    pub fn value(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Partial derivative at the base point for the exponent vector `e`.
    pub fn derivative(&self, e: &[u8]) -> Complex64 {
        let k = self.space.index[e];
        let mult: f64 = e.iter().map(|&a| (1..=a).map(f64::from).product::<f64>()).product();
        self.coeffs[k] * mult
    }

    fn compose(&self, derivs: [Complex64; ORDER + 1]) -> Jet {
        // f(a0 + d) = Σ f^(k)(a0) d^k / k!
        let mut delta = self.clone();
        delta.coeffs[0] = Complex64::new(0.0, 0.0);
        let mut out = Jet::constant(&self.space, derivs[0]);
        let mut power = Jet::constant(&self.space, Complex64::new(1.0, 0.0));
        let mut fact = 1.0;
        for (k, d) in derivs.iter().enumerate().skip(1) {
            power = &power * &delta;
            fact *= k as f64;
            for (o, p) in out.coeffs.iter_mut().zip(&power.coeffs) {
                *o += d * p / fact;
            }
        }
        out
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose([e; ORDER + 1])
    }

    pub fn ln(&self) -> Jet {
        let a = self.value();
        let mut d = [a.ln(); ORDER + 1];
        let mut fact = 1.0;
        for (k, dk) in d.iter_mut().enumerate().skip(1) {
            if k > 1 {
                fact *= (k - 1) as f64;
            }
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            *dk = sign * fact / a.powu(k as u32);
        }
        self.compose(d)
    }

    pub fn recip(&self) -> Jet {
        let a = self.value();
        let mut d = [Complex64::new(0.0, 0.0); ORDER + 1];
        let mut fact = 1.0;
        for (k, dk) in d.iter_mut().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            *dk = sign * fact / a.powu(k as u32 + 1);
        }
        self.compose(d)
    }

    pub fn scale(mut self, c: f64) -> Jet {
        for x in &mut self.coeffs {
            *x *= c;
        }
        self
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.space.len()];
        for &(i, j, k) in &self.space.products {
            coeffs[k] += self.coeffs[i] * rhs.coeffs[j];
        }
        Jet {
            space: self.space.clone(),
            coeffs,
        }
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        &self * &rhs
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, rhs: Jet) -> Jet {
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: Jet) -> Jet {
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
        self
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

/// Arithmetic needed to evaluate the kernel potentials generically.
pub trait Scalar:
    Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    /// A constant living in the same space as `self`.
    fn lift(&self, c: f64) -> Self;
    fn scale(self, c: f64) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn recip(&self) -> Self;
    /// Real part of the base value.
    fn base(&self) -> f64;

    fn powi(&self, k: u32) -> Self {
        let mut out = self.lift(1.0);
        for _ in 0..k {
            out = out * self.clone();
        }
        out
    }
}

impl Scalar for f64 {
    fn lift(&self, c: f64) -> f64 {
        c
    }
    fn scale(self, c: f64) -> f64 {
        self * c
    }
    fn exp(&self) -> f64 {
        f64::exp(*self)
    }
    fn ln(&self) -> f64 {
        f64::ln(*self)
    }
    fn recip(&self) -> f64 {
        1.0 / self
    }
    fn base(&self) -> f64 {
        *self
    }
    fn powi(&self, k: u32) -> f64 {
        f64::powi(*self, k as i32)
    }
}

impl Scalar for Jet {
    fn lift(&self, c: f64) -> Jet {
        Jet::constant(&self.space, Complex64::new(c, 0.0))
    }
    fn scale(self, c: f64) -> Jet {
        Jet::scale(self, c)
    }
    fn exp(&self) -> Jet {
        Jet::exp(self)
    }
    fn ln(&self) -> Jet {
        Jet::ln(self)
    }
    fn recip(&self) -> Jet {
        Jet::recip(self)
    }
    fn base(&self) -> f64 {
        self.value().re
    }
}

/// Moduli squared `|z_j + dz_j|²` as jets in `(dz_1, dz̄_1, …)`.
pub fn moduli_jets(point: &[Complex64]) -> Vec<Jet> {
    let space = JetSpace::shared(2 * point.len());
    point
        .iter()
        .enumerate()
        .map(|(j, &z)| {
            let dz = Jet::variable(&space, 2 * j, z);
            let dzbar = Jet::variable(&space, 2 * j + 1, z.conj());
            &dz * &dzbar
        })
        .collect()
}
