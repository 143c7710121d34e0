//! Log-gamma, gamma delta-sequence kernels, and adaptive Gauss-Kronrod
//! quadrature with kernel-aware tail truncation.
//!
//! All kernel evaluation happens in log space: the naive form of the kernel
//! contains `(alpha y / x)^alpha / Gamma(alpha)`, which overflows for
//! `alpha` around 170, while the log form stays finite for `alpha` well
//! beyond 1e6.

use crate::error::{Error, Result};
use std::f64::consts::PI;

// Lanczos approximation of ln Gamma, g = 7, 9 terms.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural logarithm of the gamma function.
///
/// Relative accuracy is around 1e-14 over `[0.5, 1e6]` (validated against
/// a 40-digit reference in the test suite).
pub fn log_gamma(z: f64) -> Result<f64> {
    if !z.is_finite() || z <= 0.0 {
        return Err(Error::Domain(format!("log_gamma requires z > 0, got {z}")));
    }
    Ok(lgamma(z))
}

pub(crate) fn lgamma(z: f64) -> f64 {
    if z < 0.5 {
        // reflection keeps the series argument away from zero
        return (PI / (PI * z).sin()).ln() - lgamma(1.0 - z);
    }
    let z = z - 1.0;
    let mut series = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        series += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + series.ln()
}

/// Regularized lower incomplete gamma function `P(shape, x)`.
///
/// Series expansion below `shape + 1`, Lentz continued fraction above.
pub fn gamma_cdf_lower(shape: f64, x: f64) -> Result<f64> {
    if !shape.is_finite() || shape <= 0.0 {
        return Err(Error::Domain(format!(
            "incomplete gamma requires shape > 0, got {shape}"
        )));
    }
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!(
            "incomplete gamma requires x >= 0, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let log_scale = shape * x.ln() - x - lgamma(shape);
    if x < shape + 1.0 {
        let mut term_shape = shape;
        let mut sum = 1.0 / shape;
        let mut term = sum;
        for _ in 0..100_000 {
            term_shape += 1.0;
            term *= x / term_shape;
            sum += term;
            if term.abs() < sum.abs() * 1e-16 {
                return Ok(sum * log_scale.exp());
            }
        }
        Err(Error::Numeric(format!(
            "incomplete gamma series stalled at shape={shape}, x={x}"
        )))
    } else {
        const TINY: f64 = 1e-300;
        let mut b = x + 1.0 - shape;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..100_000 {
            let an = -(i as f64) * (i as f64 - shape);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                return Ok(1.0 - log_scale.exp() * h);
            }
        }
        Err(Error::Numeric(format!(
            "incomplete gamma continued fraction stalled at shape={shape}, x={x}"
        )))
    }
}

/// A gamma density used as an integration weight. All evaluation is in log
/// space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct GammaWeight {
    pub shape: f64,
    pub rate: f64,
}

impl GammaWeight {
    pub(crate) fn mean(&self) -> f64 {
        self.shape / self.rate
    }

    pub(crate) fn sd(&self) -> f64 {
        self.shape.sqrt() / self.rate
    }

    pub(crate) fn density(&self, u: f64) -> f64 {
        if u < 0.0 {
            return 0.0;
        }
        if u == 0.0 {
            // u^{shape-1} at the origin: zero above shape 1, the rate at
            // shape exactly 1, divergent below
            return if self.shape > 1.0 {
                0.0
            } else if self.shape == 1.0 {
                self.rate
            } else {
                f64::INFINITY
            };
        }
        (self.shape * self.rate.ln() - lgamma(self.shape) + (self.shape - 1.0) * u.ln()
            - self.rate * u)
            .exp()
    }

    /// Point beyond which the upper tail mass is at most `tail`.
    pub(crate) fn upper_quantile(&self, tail: f64) -> f64 {
        let mean = self.mean();
        let sd = self.sd();
        let mut hi = mean + 10.0 * sd.max(mean * 1e-3);
        for _ in 0..200 {
            let mass = 1.0 - gamma_cdf_lower(self.shape, self.rate * hi).unwrap_or(0.0);
            if mass <= tail {
                break;
            }
            hi *= 2.0;
        }
        let mut lo = mean;
        for _ in 0..128 {
            let mid = 0.5 * (lo + hi);
            let mass = 1.0 - gamma_cdf_lower(self.shape, self.rate * mid).unwrap_or(0.0);
            if mass <= tail {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

/// The gamma delta-sequence kernel `h_{alpha,x,k}`: a gamma density with
/// shape `k (alpha - 2) + 2` and rate `k alpha / x`. For `k = 1` it has
/// mean exactly `x` and variance `x^2 / alpha`, so it concentrates at `x`
/// as `alpha` grows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaKernel {
    alpha: f64,
    x: f64,
    k: u32,
}

impl DeltaKernel {
    pub fn new(alpha: f64, x: f64, k: u32) -> Result<Self> {
        if !alpha.is_finite() || alpha < 1.0 {
            return Err(Error::Domain(format!(
                "kernel concentration alpha must be >= 1, got {alpha}"
            )));
        }
        if !x.is_finite() || x <= 0.0 {
            return Err(Error::Domain(format!(
                "kernel centre x must be positive, got {x}"
            )));
        }
        if k == 0 {
            return Err(Error::Domain("kernel power index k must be >= 1".into()));
        }
        let shape = k as f64 * (alpha - 2.0) + 2.0;
        if shape <= 0.0 {
            return Err(Error::Domain(format!(
                "kernel shape k(alpha-2)+2 = {shape} must be positive (alpha > 2 - 2/k)"
            )));
        }
        Ok(Self { alpha, x, k })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Gamma shape parameter `k (alpha - 2) + 2`.
    pub fn shape(&self) -> f64 {
        self.k as f64 * (self.alpha - 2.0) + 2.0
    }

    /// Gamma rate parameter `k alpha / x`.
    pub fn rate(&self) -> f64 {
        self.k as f64 * self.alpha / self.x
    }

    /// Closed-form `(mean, variance)` of the kernel.
    pub fn stats(&self) -> (f64, f64) {
        let rate = self.rate();
        (self.shape() / rate, self.shape() / (rate * rate))
    }

    /// Kernel density at `u >= 0`; zero off the support.
    pub fn density(&self, u: f64) -> f64 {
        self.weight().density(u)
    }

    pub(crate) fn weight(&self) -> GammaWeight {
        GammaWeight {
            shape: self.shape(),
            rate: self.rate(),
        }
    }
}

/// Accuracy and truncation controls for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    /// Relative accuracy target for the integral.
    pub rel_tol: f64,
    /// Kernel tail probability beyond which the domain is truncated.
    pub truncation_mass: f64,
    /// Subdivision budget for the adaptive scheme.
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            truncation_mass: 1e-12,
            max_subdivisions: 400,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-4) {
            return Err(Error::Config(format!(
                "quadrature tolerance must lie in (0, 1e-4], got {}",
                self.rel_tol
            )));
        }
        if !(self.truncation_mass > 0.0 && self.truncation_mass <= 1e-6) {
            return Err(Error::Config(format!(
                "truncation mass must lie in (0, 1e-6], got {}",
                self.truncation_mass
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::Config("max_subdivisions must be positive".into()));
        }
        Ok(())
    }
}

/// Integral of `f` over `[0, inf)`, optionally weighted by a delta kernel.
///
/// With a kernel the result is `∫ h_{alpha,x,k}(u) f(u) du`, truncated
/// where the kernel tail mass drops below `spec.truncation_mass` (the lower
/// end always extends to 0). Without a kernel the half line is mapped onto
/// `(0, 1)` via `u = t / (1 - t)` before subdivision.
pub fn integrate<F>(f: F, weight_kernel: Option<&DeltaKernel>, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    spec.validate()?;
    match weight_kernel {
        Some(kernel) => integrate_gamma_weight(&f, &kernel.weight(), spec),
        None => {
            let g = |t: f64| {
                let rest = 1.0 - t;
                f(t / rest) / (rest * rest)
            };
            let breaks: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
            adaptive(&g, &breaks, spec)
        }
    }
}

/// Gamma-weighted integral over `[0, hi]` with the initial subdivision
/// anchored at the weight's mean so a sharply concentrated weight is never
/// missed by the first panels.
pub(crate) fn integrate_gamma_weight<F>(
    f: &F,
    w: &GammaWeight,
    spec: &QuadratureSpec,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let hi = w.upper_quantile(spec.truncation_mass);
    let (mean, sd) = (w.mean(), w.sd());
    let mut breaks = vec![0.0, hi];
    for m in [
        -8.0, -6.0, -4.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 4.0, 6.0, 8.0,
    ] {
        let b = mean + m * sd;
        if b > 0.0 && b < hi {
            breaks.push(b);
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup();
    let g = |u: f64| w.density(u) * f(u);
    adaptive(&g, &breaks, spec)
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn adaptive<F>(g: &F, breaks: &[f64], spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut panels: Vec<Panel> = breaks
        .windows(2)
        .map(|w| gauss_kronrod(g, w[0], w[1]))
        .collect();
    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        if error <= spec.rel_tol * value.abs() + 1e-300 {
            return Ok(value);
        }
        if panels.len() >= spec.max_subdivisions {
            return Err(Error::Numeric(format!(
                "quadrature stalled at {} panels: integral {value:.6e}, error estimate {error:.3e}, target {:.3e}",
                panels.len(),
                spec.rel_tol * value.abs()
            )));
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|a, b| {
                a.1.error
                    .partial_cmp(&b.1.error)
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .map(|(i, _)| i)
            .unwrap();
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        panels.push(gauss_kronrod(g, p.a, mid));
        panels.push(gauss_kronrod(g, mid, p.b));
    }
}

// 15-point Kronrod abscissae (positive half) with the embedded 7-point
// Gauss rule at the odd indices.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_17,
    0.207_784_955_007_898_47,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_84,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod<F>(g: &F, a: f64, b: f64) -> Panel
where
    F: Fn(f64) -> f64,
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_centre = g(centre);
    let mut kronrod = WGK[7] * f_centre;
    let mut gauss = WG[3] * f_centre;
    for i in 0..7 {
        let offset = half * XGK[i];
        let pair = g(centre - offset) + g(centre + offset);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    Panel {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}
