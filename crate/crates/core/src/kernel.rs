//! Integral kernels `k(x, y)` and their structural properties.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Domain, Point};
use crate::quadrature::QuadratureRule;

/// A scalar field on the plane.
pub type Field = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

type Eval = Arc<dyn Fn(Point, Point) -> f64 + Send + Sync>;
type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type Translation = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct KernelFlags {
    pub symmetric: bool,
    pub nonnegative: bool,
    pub strictly_positive: bool,
    pub translation_invariant: bool,
    pub radial: bool,
}

#[derive(Clone)]
pub struct Kernel {
    name: String,
    eval: Eval,
    pub flags: KernelFlags,
    profile: Option<Profile>,
    translation: Option<Translation>,
    pub sigma: Option<f64>,
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("name", &self.name)
            .field("flags", &self.flags)
            .field("sigma", &self.sigma)
            .finish_non_exhaustive()
    }
}

impl Kernel {
    #[inline]
    pub fn eval(&self, x: Point, y: Point) -> f64 {
        (self.eval)(x, y)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Radial profile `R(r)` with `k(x, y) = R(‖x − y‖)`, if radial.
    pub fn profile(&self, r: f64) -> Option<f64> {
        self.profile.as_ref().map(|p| p(r))
    }

    /// Translation profile `J(z)` with `k(x, y) = J(x − y)`, if
    /// translation-invariant.
    pub fn translation_profile(&self, z: Point) -> Option<f64> {
        self.translation.as_ref().map(|j| j(z))
    }

    /// Builds a radial kernel `k(x, y) = R(‖x − y‖)`.
    pub fn radial(
        name: impl Into<String>,
        profile: impl Fn(f64) -> f64 + Send + Sync + 'static,
        sigma: Option<f64>,
        nonnegative: bool,
        strictly_positive: bool,
    ) -> Self {
        let profile: Profile = Arc::new(profile);
        let p_eval = profile.clone();
        let p_trans = profile.clone();
        Self {
            name: name.into(),
            eval: Arc::new(move |x, y| p_eval(x.dist(y))),
            flags: KernelFlags {
                symmetric: true,
                nonnegative,
                strictly_positive,
                translation_invariant: true,
                radial: true,
            },
            profile: Some(profile),
            translation: Some(Arc::new(move |z: Point| p_trans(z.norm()))),
            sigma,
        }
    }

    /// A general kernel with caller-supplied flags.
    pub fn custom(
        name: impl Into<String>,
        eval: impl Fn(Point, Point) -> f64 + Send + Sync + 'static,
        flags: KernelFlags,
    ) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(eval),
            flags,
            profile: None,
            translation: None,
            sigma: None,
        }
    }

    /// `k(x, y) = (σ√(2π))^{-2} exp(−‖x − y‖²/(2σ²))`, unit mass on ℝ².
    pub fn gaussian(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::NonpositiveSigma(sigma));
        }
        let norm = 1.0 / (2.0 * PI * sigma * sigma);
        let inv = 1.0 / (2.0 * sigma * sigma);
        Ok(Self::radial(
            "gaussian",
            move |r| norm * (-r * r * inv).exp(),
            Some(sigma),
            true,
            true,
        ))
    }

    /// `k(x, y) = (πσ²)^{-1} (1 + ‖x − y‖²/σ²)^{-2}`, unit mass with
    /// algebraic `r^{-4}` decay.
    pub fn poly_decay(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::NonpositiveSigma(sigma));
        }
        let norm = 1.0 / (PI * sigma * sigma);
        Ok(Self::radial(
            "poly_decay",
            move |r| {
                let q = 1.0 + (r / sigma).powi(2);
                norm / (q * q)
            },
            Some(sigma),
            true,
            true,
        ))
    }

    /// Sign-changing radial kernel `(2πσ²)^{-1} exp(−r²/(2σ²)) cos(r/σ)`.
    pub fn oscillatory(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::NonpositiveSigma(sigma));
        }
        let norm = 1.0 / (2.0 * PI * sigma * sigma);
        Ok(Self::radial(
            "oscillatory",
            move |r| norm * (-r * r / (2.0 * sigma * sigma)).exp() * (r / sigma).cos(),
            Some(sigma),
            false,
            false,
        ))
    }

    pub fn constant(c: f64) -> Self {
        Self::radial("constant", move |_| c, None, c >= 0.0, c > 0.0)
    }

    pub fn zero() -> Self {
        let mut k = Self::constant(0.0);
        k.name = "zero".into();
        k
    }

    /// Degenerate kernel `k(x, y) = g(x) g(y)`.
    pub fn separable(g: Field) -> Self {
        Self::custom(
            "separable",
            move |x, y| g(x) * g(y),
            KernelFlags {
                symmetric: true,
                ..KernelFlags::default()
            },
        )
    }

    /// `k(x, y) / s(x)`; only nonnegativity flags survive.
    pub fn divided_by(&self, s: Field) -> Self {
        let inner = self.eval.clone();
        Self {
            name: format!("{}/s", self.name),
            eval: Arc::new(move |x, y| inner(x, y) / s(x)),
            flags: KernelFlags {
                nonnegative: self.flags.nonnegative,
                strictly_positive: self.flags.strictly_positive,
                ..KernelFlags::default()
            },
            profile: None,
            translation: None,
            sigma: self.sigma,
        }
    }
}

/// `max_x Σ_i w_i |k(x, y_i)|` over the rule nodes: a lower-biased estimate
/// of `‖K‖ = max_x ∫_Ω |k(x, y)| dy`.
pub fn operator_norm_estimate(k: &Kernel, _domain: &Domain, rule: &QuadratureRule) -> f64 {
    let pts = rule.points();
    pts.iter()
        .map(|&x| {
            let terms = pts.iter().zip(&rule.weights).map(|(&y, w)| w * k.eval(x, y).abs());
            crate::quadrature::compensated_sum(terms)
        })
        .fold(0.0, f64::max)
}

/// Smallest `r` beyond which `|R(s)| ≤ tolerance·|R(0)|` on `[r, 100σ]`.
pub fn effective_support_radius(k: &Kernel, tolerance: f64) -> Result<f64> {
    let profile = k.profile.as_ref().ok_or(Error::NotRadial)?;
    let scale = k.sigma.unwrap_or(1.0);
    let r_max = 100.0 * scale;
    let thresh = tolerance * profile(0.0).abs();
    let above = |r: f64| profile(r).abs() > thresh;
    if above(r_max) || thresh == 0.0 {
        return Err(Error::NoDecay);
    }
    const SAMPLES: usize = 20_000;
    let step = r_max / SAMPLES as f64;
    let last_above = (0..SAMPLES).rev().find(|&i| above(i as f64 * step));
    let Some(i) = last_above else {
        return Ok(0.0);
    };
    let (mut lo, mut hi) = (i as f64 * step, (i + 1) as f64 * step);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if above(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(hi)
}
