//! Gauss rules (Golub–Welsch) and globally adaptive Gauss–Kronrod 7/15.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Nodes and weights of an interpolatory rule.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    fn from_jacobi(diag: &[f64], off: &[f64], mu0: f64) -> Rule {
        let n = diag.len();
        let mut j = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            j[(i, i)] = diag[i];
            if i + 1 < n {
                j[(i, i + 1)] = off[i];
                j[(i + 1, i)] = off[i];
            }
        }
        let eig = SymmetricEigen::new(j);
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let v0 = eig.eigenvectors[(0, i)];
                (eig.eigenvalues[i], mu0 * v0 * v0)
            })
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Rule {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        }
    }

    /// Gauss–Legendre on [−1, 1].
    pub fn gauss_legendre(n: usize) -> Rule {
        let diag = vec![0.0; n];
        let off: Vec<f64> = (1..n)
            .map(|k| {
                let k = k as f64;
                k / (4.0 * k * k - 1.0).sqrt()
            })
            .collect();
        Rule::from_jacobi(&diag, &off, 2.0)
    }

    /// Gauss–Laguerre for the weight `e^(−s)` on [0, ∞).
    pub fn gauss_laguerre(n: usize) -> Rule {
        let diag: Vec<f64> = (0..n).map(|i| 2.0 * i as f64 + 1.0).collect();
        let off: Vec<f64> = (1..n).map(|i| i as f64).collect();
        Rule::from_jacobi(&diag, &off, 1.0)
    }

    /// Integral of `f` over `[a, b]` for a rule defined on [−1, 1].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

// Kronrod 15 abscissae (non-negative half) with the embedded Gauss 7 weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One G7/K15 panel: (Kronrod value, |Kronrod − Gauss|).
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(mid - dx) + f(mid + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

/// Globally adaptive G7/K15: bisects the panel with the largest error until
/// the summed error drops below `max(abs_tol, rel_tol·|I|)`.
pub fn adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    breakpoints: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Result<Estimate> {
    if breakpoints.len() < 2 || breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Input("breakpoints must be strictly increasing".into()));
    }
    let mut panels: Vec<(f64, f64, f64, f64)> = breakpoints
        .windows(2)
        .map(|w| {
            let (v, e) = gk15(&mut f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    let mut evaluations = 15 * panels.len();
    loop {
        let value: f64 = panels.iter().map(|p| p.2).sum();
        let abs_error: f64 = panels.iter().map(|p| p.3).sum();
        if !value.is_finite() || !abs_error.is_finite() {
            return Err(Error::Numerics("non-finite integrand in adaptive quadrature".into()));
        }
        if abs_error <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(Estimate {
                value,
                abs_error,
                evaluations,
            });
        }
        if panels.len() >= max_panels {
            return Err(Error::Accuracy {
                best: value,
                abs_error,
            });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .3.total_cmp(&b.1 .3))
            .expect("at least one panel");
        let (a, b, _, _) = panels.swap_remove(worst);
        let m = 0.5 * (a + b);
        let (v1, e1) = gk15(&mut f, a, m);
        let (v2, e2) = gk15(&mut f, m, b);
        evaluations += 30;
        panels.push((a, m, v1, e1));
        panels.push((m, b, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_is_exact_to_degree_2n_minus_1() {
        let rule = Rule::gauss_legendre(8);
        for k in 0..16 {
            let got = rule.integrate(0.0, 1.0, |x| x.powi(k));
            assert!((got - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "{k}");
        }
        assert!((rule.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn laguerre_reproduces_factorials() {
        let rule = Rule::gauss_laguerre(20);
        let mut fact = 1.0;
        for k in 0..12 {
            if k > 0 {
                fact *= k as f64;
            }
            let got: f64 = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(x, w)| w * x.powi(k))
                .sum();
            assert!((got / fact - 1.0).abs() < 1e-12, "{k} {got}");
        }
    }

    #[test]
    fn adaptive_handles_kink_and_peak() {
        let est = adaptive(|x: f64| (x - 0.3).abs(), &[0.0, 1.0], 1e-13, 0.0, 500).unwrap();
        assert!((est.value - 0.29).abs() < 1e-12);
        let est = adaptive(|x: f64| 1.0 / (1e-4 + x * x), &[-1.0, 1.0], 0.0, 1e-12, 2000).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((est.value / exact - 1.0).abs() < 1e-11);
        assert!((est.value - exact).abs() <= est.abs_error.max(1e-12 * exact));
    }

    #[test]
    fn budget_exhaustion_reports_best_value() {
        let err = adaptive(|x: f64| x.sin() * 1e3 * x.cos(), &[0.0, 1000.0], 1e-15, 0.0, 3).unwrap_err();
        assert!(matches!(err, Error::Accuracy { .. }));
    }
}
