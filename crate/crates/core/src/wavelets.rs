//! Frequency-domain mother wavelets.
//!
//! All three families are evaluated on cyclic dimensionless frequency and are
//! one-sided: `eval_fourier` is exactly zero for `xi <= 0`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rustfft::num_complex::Complex64;

use crate::error::{invalid, Result, SynsqError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WaveletKind {
    /// Shifted Gaussian, `exp(-2 pi^2 (mu - xi)^2)`.
    Morlet,
    /// `xi^2 exp(-2 pi^2 sigma^2 xi^2)` for `xi > 0`.
    MexicanHat,
    /// `exp(-1 / (1 - ((2 pi xi - mu) / sigma)^2))` on its compact support.
    Bump,
}

impl WaveletKind {
    pub fn name(self) -> &'static str {
        match self {
            WaveletKind::Morlet => "morlet",
            WaveletKind::MexicanHat => "mexican-hat",
            WaveletKind::Bump => "bump",
        }
    }
}

impl fmt::Display for WaveletKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WaveletKind {
    type Err = SynsqError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "morlet" => Ok(WaveletKind::Morlet),
            "mexican-hat" | "mexhat" | "complex-mexican-hat" => Ok(WaveletKind::MexicanHat),
            "bump" | "shifted-bump" => Ok(WaveletKind::Bump),
            other => invalid(format!("unknown wavelet `{other}`")),
        }
    }
}

/// A mother wavelet given by its Fourier transform.
///
/// `mu` is the centre parameter and `sigma` the width parameter; which of them
/// a family uses depends on `kind`. `norm` multiplies the closed form. The
/// admissibility constant is computed once and cached.
#[derive(Clone, Debug)]
pub struct WaveletSpec {
    kind: WaveletKind,
    mu: f64,
    sigma: f64,
    norm: f64,
    admissibility: OnceLock<Complex64>,
}

impl PartialEq for WaveletSpec {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.mu == other.mu
            && self.sigma == other.sigma
            && self.norm == other.norm
    }
}

impl Default for WaveletSpec {
    fn default() -> Self {
        Self::bump(5.0, 1.0).expect("default bump parameters are valid")
    }
}

impl WaveletSpec {
    /// Builds a spec with the family's default norm (peak magnitude 2).
    pub fn new(kind: WaveletKind, mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() || !sigma.is_finite() {
            return invalid("wavelet parameters must be finite");
        }
        match kind {
            WaveletKind::Morlet if mu <= 0.0 => {
                return invalid(format!("morlet centre must be positive, got {mu}"))
            }
            WaveletKind::MexicanHat if sigma <= 0.0 => {
                return invalid(format!("mexican hat width must be positive, got {sigma}"))
            }
            WaveletKind::Bump if !(sigma > 0.0 && mu > sigma) => {
                return invalid(format!(
                    "bump needs 0 < sigma < mu for a positive support, got mu={mu} sigma={sigma}"
                ))
            }
            _ => {}
        }
        let mut spec = Self {
            kind,
            mu,
            sigma,
            norm: 1.0,
            admissibility: OnceLock::new(),
        };
        spec.norm = 2.0 / spec.raw(spec.center());
        Ok(spec)
    }

    pub fn morlet(mu: f64) -> Result<Self> {
        Self::new(WaveletKind::Morlet, mu, 1.0)
    }

    pub fn mexican_hat(sigma: f64) -> Result<Self> {
        Self::new(WaveletKind::MexicanHat, 1.0, sigma)
    }

    pub fn bump(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(WaveletKind::Bump, mu, sigma)
    }

    /// Family defaults: Morlet `mu = 1`, Mexican hat `sigma = 1`, bump `mu = 5, sigma = 1`.
    pub fn default_for(kind: WaveletKind) -> Self {
        match kind {
            WaveletKind::Morlet => Self::morlet(1.0),
            WaveletKind::MexicanHat => Self::mexican_hat(1.0),
            WaveletKind::Bump => Self::bump(5.0, 1.0),
        }
        .expect("default parameters are valid")
    }

    /// Replaces the norm factor; the cached admissibility constant is reset.
    pub fn with_norm(&self, norm: f64) -> Result<Self> {
        if !(norm > 0.0) || !norm.is_finite() {
            return invalid(format!("wavelet norm must be positive, got {norm}"));
        }
        Ok(Self {
            norm,
            admissibility: OnceLock::new(),
            ..self.clone()
        })
    }

    pub fn kind(&self) -> WaveletKind {
        self.kind
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    fn raw(&self, xi: f64) -> f64 {
        if xi <= 0.0 {
            return 0.0;
        }
        match self.kind {
            WaveletKind::Morlet => (-2.0 * PI * PI * (self.mu - xi).powi(2)).exp(),
            WaveletKind::MexicanHat => {
                xi * xi * (-2.0 * PI * PI * self.sigma * self.sigma * xi * xi).exp()
            }
            WaveletKind::Bump => {
                let x = (2.0 * PI * xi - self.mu) / self.sigma;
                if x.abs() < 1.0 {
                    (-1.0 / (1.0 - x * x)).exp()
                } else {
                    0.0
                }
            }
        }
    }

    /// Fourier transform of the mother wavelet at cyclic frequency `xi`.
    pub fn eval_fourier(&self, xi: f64) -> Complex64 {
        Complex64::new(self.norm * self.raw(xi), 0.0)
    }

    /// Frequency of the peak of `|eval_fourier|`.
    pub fn center(&self) -> f64 {
        match self.kind {
            WaveletKind::Morlet => self.mu,
            WaveletKind::MexicanHat => 1.0 / (2.0f64.sqrt() * PI * self.sigma),
            WaveletKind::Bump => self.mu / (2.0 * PI),
        }
    }

    /// Closed support `[lo, hi]` of the bump, `None` for the other families.
    pub fn compact_support(&self) -> Option<(f64, f64)> {
        (self.kind == WaveletKind::Bump).then(|| {
            (
                (self.mu - self.sigma) / (2.0 * PI),
                (self.mu + self.sigma) / (2.0 * PI),
            )
        })
    }

    fn quadrature_range(&self) -> (f64, f64) {
        match self.kind {
            WaveletKind::Bump => self.compact_support().expect("bump has compact support"),
            WaveletKind::Morlet => {
                let width = 12.0 / (2.0 * PI);
                // The Gaussian leaves ~e^{-2 pi^2 mu^2} at xi = 0+, where
                // the 1/xi weight would diverge logarithmically; stop short.
                ((self.mu - width).max(1e-3 * self.mu), self.mu + width)
            }
            WaveletKind::MexicanHat => (0.0, self.center() + 12.0 / (2.0 * PI * self.sigma)),
        }
    }

    /// `R_psi = integral over (0, inf) of conj(psi_hat(xi)) / xi`, cached.
    pub fn admissibility_constant(&self) -> Result<Complex64> {
        if let Some(v) = self.admissibility.get() {
            return Ok(*v);
        }
        let (lo, hi) = self.quadrature_range();
        let value = integrate_inverse_frequency(|xi| self.eval_fourier(xi), lo, hi, 1e-10)?;
        let _ = self.admissibility.set(value);
        Ok(*self.admissibility.get().expect("just set"))
    }

    /// Smallest interval containing every `xi` with
    /// `|psi_hat(xi)| >= tail_fraction * max |psi_hat|`.
    pub fn effective_bandwidth(&self, tail_fraction: f64) -> Result<Bandwidth> {
        if !(tail_fraction > 0.0 && tail_fraction <= 0.5) {
            return invalid(format!(
                "tail fraction must lie in (0, 0.5], got {tail_fraction}"
            ));
        }
        let center = self.center();
        let peak = self.raw(center);
        let level = tail_fraction * peak;
        let above = |xi: f64| self.raw(xi) >= level;

        let lo = if above(f64::MIN_POSITIVE) {
            0.0
        } else {
            bisect_edge(&above, center, 0.0)
        };
        let mut far = center * 2.0 + 1.0;
        while above(far) {
            far *= 2.0;
        }
        let hi = bisect_edge(&above, center, far);
        Ok(Bandwidth { lo, hi })
    }
}

/// Interval of dimensionless frequency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bandwidth {
    pub lo: f64,
    pub hi: f64,
}

impl Bandwidth {
    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// Half-width relative to the midpoint: the interval is
    /// `center * [1 - delta, 1 + delta]`.
    pub fn relative_halfwidth(&self) -> f64 {
        (self.hi - self.lo) / (self.hi + self.lo)
    }
}

// `inside` holds at `inner` and fails at `outer`; returns the crossing.
fn bisect_edge(inside: &impl Fn(f64) -> bool, mut inner: f64, mut outer: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (inner + outer);
        if mid == inner || mid == outer {
            break;
        }
        if inside(mid) {
            inner = mid;
        } else {
            outer = mid;
        }
    }
    inner
}

/// `integral_lo^hi conj(f(xi)) / xi dxi` by adaptive Simpson quadrature to
/// relative tolerance `rel_tol`. The integrand is taken as 0 at `xi <= 0`.
pub fn integrate_inverse_frequency(
    f: impl Fn(f64) -> Complex64,
    lo: f64,
    hi: f64,
    rel_tol: f64,
) -> Result<Complex64> {
    if !(hi > lo) {
        return invalid(format!("empty integration range [{lo}, {hi}]"));
    }
    let g = |xi: f64| {
        if xi <= 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            f(xi).conj() / xi
        }
    };
    // A coarse composite pass fixes the absolute scale and keeps narrow
    // features from being skipped by the first Simpson panel.
    let panels = 64;
    let width = (hi - lo) / panels as f64;
    let mut coarse = Complex64::new(0.0, 0.0);
    let mut pieces = Vec::with_capacity(panels);
    for p in 0..panels {
        let a = lo + p as f64 * width;
        let b = if p + 1 == panels { hi } else { a + width };
        let (fa, fm, fb) = (g(a), g(0.5 * (a + b)), g(b));
        let s = simpson(a, b, fa, fm, fb);
        coarse += s;
        pieces.push((a, b, fa, fm, fb, s));
    }
    let scale = coarse.norm().max(f64::MIN_POSITIVE);
    let tol = rel_tol * scale / panels as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for (a, b, fa, fm, fb, s) in pieces {
        total += adaptive_simpson(&g, a, b, fa, fm, fb, s, tol, 48)?;
    }
    if !total.re.is_finite() || !total.im.is_finite() {
        return Err(SynsqError::Numerical("admissibility integral is not finite".into()));
    }
    Ok(total)
}

fn simpson(a: f64, b: f64, fa: Complex64, fm: Complex64, fb: Complex64) -> Complex64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson(
    g: &impl Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    fa: Complex64,
    fm: Complex64,
    fb: Complex64,
    whole: Complex64,
    tol: f64,
    depth: u32,
) -> Result<Complex64> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (g(lm), g(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.norm() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(SynsqError::Numerical(
            "adaptive quadrature did not converge".into(),
        ));
    }
    Ok(adaptive_simpson(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + adaptive_simpson(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}
