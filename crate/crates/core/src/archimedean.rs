//! The real-place density: the oscillatory integral `v(β, B)` and the
//! singular integral `J = ∫ v(a_1 β) ... v(a_s β) dβ`.
//!
//! Two estimators of `J` that share no machinery keep each other honest: an
//! adaptive quadrature of the oscillatory product along the β-line, and a
//! Monte Carlo slab estimator `(2ε)^{-1} vol{x ∈ [-1,1]^s : |F(x)| ≤ ε}`
//! that never touches an exponential. Their agreement — and the sign
//! dichotomy (zero exactly when `k` is even and all coefficients share a
//! sign) — are the module's main tests.

use crate::arith::SeededStream;
use crate::forms::DiagonalForm;
use crate::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use std::collections::BinaryHeap;
use std::f64::consts::TAU;

/// Above this `|m|` the half-line integral `∫_0^1 e(m ξ^k) dξ` switches
/// from adaptive quadrature to the incomplete-gamma asymptotic series
/// (whose terms shrink like `n / (2π m)`).
const ASYMPTOTIC_SWITCH: f64 = 12.0;

/// Absolute tolerance for a single `v` evaluation at unit scale.
const V_TOLERANCE: f64 = 1e-10;

/// Panel cap for one adaptive integration before reporting failure.
const MAX_PANELS: usize = 4000;

/// Smallest slab half-width the float evaluation of `Σ a_j x_j^k`
/// supports without the slab test itself drowning in rounding error.
pub const MIN_EPSILON: f64 = 1e-3;

/// Slab-estimator defaults calibrated for `|a| ≤ 20, s ≤ 8`.
pub const DEFAULT_EPSILON: f64 = 0.05;
pub const DEFAULT_SAMPLES: u64 = 200_000;

// ---------------------------------------------------------------------------
// Gauss–Kronrod panels
// ---------------------------------------------------------------------------

/// 15-point Kronrod abscissae on [-1, 1] (positive half; the rule is
/// symmetric) with the embedded 7-point Gauss rule at the odd indices.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One Gauss–Kronrod 15(7) panel: returns the K15 value and |K15 − G7|
/// as the local error indicator.
fn gk15(f: &mut dyn FnMut(f64) -> Complex64, a: f64, b: f64) -> (Complex64, f64) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let center = f(mid);
    let mut kronrod = WGK[7] * center;
    let mut gauss = WG[3] * center;
    for i in 0..7 {
        let pair = f(mid - half * XGK[i]) + f(mid + half * XGK[i]);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).norm())
}

/// Adaptive integration of a complex-valued integrand over [a, b]:
/// worst-panel bisection until the summed indicator meets `tol`.
fn integrate_adaptive(
    f: &mut dyn FnMut(f64) -> Complex64,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<(Complex64, f64)> {
    #[derive(PartialEq)]
    struct Panel {
        err: f64,
        a: f64,
        b: f64,
        value: Complex64,
    }
    impl Eq for Panel {}
    impl Ord for Panel {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            self.err.partial_cmp(&other.err).unwrap_or(std::cmp::Ordering::Equal)
        }
    }
    impl PartialOrd for Panel {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }
    let (value, err) = gk15(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { err, a, b, value });
    let mut total_err = err;
    while total_err > tol && heap.len() < MAX_PANELS {
        let worst = heap.pop().expect("heap never empty");
        total_err -= worst.err;
        let mid = 0.5 * (worst.a + worst.b);
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (v, e) = gk15(f, lo, hi);
            total_err += e;
            heap.push(Panel { err: e, a: lo, b: hi, value: v });
        }
    }
    if total_err > tol {
        return Err(Error::numerical(format!(
            "adaptive quadrature stalled at error {total_err:.3e} \
             (target {tol:.3e}) after {MAX_PANELS} panels on [{a}, {b}]"
        )));
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for p in heap {
        sum += p.value;
    }
    Ok((sum, total_err))
}

// ---------------------------------------------------------------------------
// v(β, B)
// ---------------------------------------------------------------------------

/// `∫_0^1 e(m ξ^k) dξ` by adaptive quadrature (small `|m|` only).
fn half_line_quadrature(m: f64, k: u32) -> Result<Complex64> {
    let mut f = |x: f64| {
        let phase = TAU * m * x.powi(k as i32);
        Complex64::new(phase.cos(), phase.sin())
    };
    Ok(integrate_adaptive(&mut f, 0.0, 1.0, V_TOLERANCE)?.0)
}

/// `∫_0^1 e(m ξ^k) dξ` via `t = ξ^k` and the incomplete-gamma expansion:
/// the integral becomes `k^{-1} z^{-c} γ(c, z)` with `c = 1/k`,
/// `z = -2πi m`, and for large `|z|`
/// `Γ(c, z) ≈ z^{c-1} e^{-z} Σ_n (c-1)(c-2)...(c-n) z^{-n}`.
fn half_line_asymptotic(m: f64, k: u32) -> Complex64 {
    debug_assert!(m.abs() > 1.0, "asymptotic branch needs |z| = 2pi|m| large");
    let c = 1.0 / f64::from(k);
    let z = Complex64::new(0.0, -TAU * m);
    // Truncated asymptotic series for Γ(c, z) / (z^{c-1} e^{-z}).
    let mut term = Complex64::new(1.0, 0.0);
    let mut series = term;
    for n in 1..=18 {
        term *= (c - n as f64) / z;
        series += term;
        if term.norm() < 1e-17 {
            break;
        }
    }
    // e^{-z} = e(m) sits on the unit circle.
    let e_minus_z = Complex64::new((TAU * m).cos(), (TAU * m).sin());
    let gamma_c = libm::tgamma(c);
    (gamma_c * z.powf(-c) - e_minus_z / z * series) / f64::from(k)
}

fn half_line(m: f64, k: u32) -> Result<Complex64> {
    if m.abs() <= ASYMPTOTIC_SWITCH {
        half_line_quadrature(m, k)
    } else {
        Ok(half_line_asymptotic(m, k))
    }
}

/// `v(β, B) = ∫_{-B}^B e(β ξ^k) dξ`, absolute error well under `1e-8 · B`.
///
/// Computed at unit scale via `v(β, B) = B v(β B^k, 1)` and split at the
/// origin; for odd `k` the two halves are computed independently, so the
/// analytically-zero imaginary part is a genuine cancellation check.
pub fn v_integral(beta: f64, b_scale: f64, k: u32) -> Result<Complex64> {
    if !(b_scale > 0.0) {
        return Err(Error::domain("v needs a positive box scale B"));
    }
    if k < 2 {
        return Err(Error::domain("v needs degree k >= 2"));
    }
    let m = beta * b_scale.powi(k as i32);
    let positive_half = half_line(m, k)?;
    let negative_half = if k % 2 == 0 {
        positive_half
    } else {
        half_line(-m, k)?
    };
    Ok(b_scale * (positive_half + negative_half))
}

// ---------------------------------------------------------------------------
// Estimates of the singular integral
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorMethod {
    Quadrature,
    SlabMc,
}

impl EstimatorMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            EstimatorMethod::Quadrature => "quadrature",
            EstimatorMethod::SlabMc => "slab_mc",
        }
    }
}

/// One estimate of the singular integral, tagged with how it was obtained
/// and an error indicator (truncation+step estimate for quadrature, a
/// standard-error-plus-bias probe for the slab estimator).
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralEstimate {
    pub value: f64,
    pub method: EstimatorMethod,
    pub error_indicator: f64,
    /// Quadrature: the β cutoff actually integrated to.
    pub tail_cut: Option<f64>,
    /// Quadrature: fitted multiplier in the `β^{-s/k}` tail-decay model —
    /// an observed constant, not an asserted one.
    pub fitted_tail_constant: Option<f64>,
    /// Slab MC: half-width ε, sample count, and (seed, stream) used.
    pub epsilon: Option<f64>,
    pub samples: Option<u64>,
    pub seed: Option<(u64, u64)>,
    /// Slab MC: the two raw (un-extrapolated) slab values at ε and ε/2.
    pub raw_pair: Option<(f64, f64)>,
    /// Slab MC: the pure Monte Carlo standard error of `value`, before the
    /// bias probe is added on top.
    pub standard_error: Option<f64>,
}

impl IntegralEstimate {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "value": self.value,
            "method": self.method.as_str(),
            "error_indicator": self.error_indicator,
            "tail_cut": self.tail_cut,
            "fitted_tail_constant": self.fitted_tail_constant,
            "epsilon": self.epsilon,
            "samples": self.samples,
            "seed": self.seed.map(|(s, t)| serde_json::json!({"seed": s, "stream": t})),
            "raw_pair": self.raw_pair.map(|(a, b)| serde_json::json!([a, b])),
            "standard_error": self.standard_error,
        })
    }
}

/// Product `∏_j v(a_j β, 1)` with the coefficients in a fixed canonical
/// order, so permuted forms integrate to bit-identical values.
fn unit_integrand(coeffs_sorted: &[i64], k: u32, beta: f64) -> Result<Complex64> {
    let mut prod = Complex64::new(1.0, 0.0);
    for &a in coeffs_sorted {
        prod *= v_integral(a as f64 * beta, 1.0, k)?;
    }
    Ok(prod)
}

/// Quadrature estimate of `J = ∫_{-∞}^∞ ∏_j v(a_j β, 1) dβ`, integrating
/// `2 Re ∫_0^{tail_cut}` (the integrand at `-β` is the conjugate) and
/// folding an estimated tail into the error indicator.
///
/// Requires `s > k`: below that the integral is not absolutely convergent
/// and no truncation is meaningful.
pub fn singular_integral_quadrature(
    form: &DiagonalForm,
    tail_cut: f64,
) -> Result<IntegralEstimate> {
    singular_integral_quadrature_scaled(form, 1.0, tail_cut)
}

/// Same estimator for the scaled integral `J(B) = ∫ ∏_j v(a_j β, B) dβ`
/// (`= B^{s-k} J` analytically — the homogeneity consistency check drives
/// this path at `B ≠ 1`).
pub fn singular_integral_quadrature_scaled(
    form: &DiagonalForm,
    b_scale: f64,
    tail_cut: f64,
) -> Result<IntegralEstimate> {
    let k = form.k();
    let s = form.s();
    if s <= k as usize {
        return Err(Error::domain(format!(
            "the singular integral needs s > k for absolute convergence (s = {s}, k = {k})"
        )));
    }
    if !(b_scale > 0.0) {
        return Err(Error::domain("box scale B must be positive"));
    }
    if !(tail_cut > 0.0) {
        return Err(Error::domain("tail cutoff must be positive"));
    }
    let mut coeffs = form.coeffs().to_vec();
    coeffs.sort_unstable();
    // v(a β, B) = B v(a β B^k, 1): pull the scale into the argument once.
    let bk = b_scale.powi(k as i32);
    let bs = b_scale.powi(s as i32);
    let mut failure: Option<Error> = None;
    let mut f = |beta: f64| match unit_integrand(&coeffs, k, beta * bk) {
        Ok(v) => v,
        Err(e) => {
            failure.get_or_insert(e);
            Complex64::new(0.0, 0.0)
        }
    };
    let tol = 1e-9 * (1.0 + tail_cut);
    let integrate = integrate_adaptive(&mut f, 0.0, tail_cut, tol);
    if let Some(e) = failure {
        return Err(e);
    }
    let (half_integral, quad_err) = integrate?;
    // Tail model from the decay shape: |∏ v| ~ C β^{-s/k} beyond the cut,
    // giving ∫_X^∞ ≈ max|∏ v|(near X) · X k/(s−k). The constant is fitted
    // from the integrand itself, never asserted.
    let mut tail_mag = 0.0f64;
    for frac in [0.9, 0.95, 1.0] {
        let beta = tail_cut * frac;
        tail_mag = tail_mag.max(unit_integrand(&coeffs, k, beta * bk)?.norm());
    }
    let tail_est = tail_mag * tail_cut * f64::from(k) / (s as f64 - f64::from(k));
    let coeff_scale: f64 = coeffs
        .iter()
        .map(|&a| (a.unsigned_abs() as f64).powf(1.0 / f64::from(k)))
        .product();
    let fitted_tail_constant =
        tail_mag * (tail_cut * bk).powf(s as f64 / f64::from(k)) * coeff_scale;
    Ok(IntegralEstimate {
        value: 2.0 * bs * half_integral.re,
        method: EstimatorMethod::Quadrature,
        error_indicator: 2.0 * bs * (quad_err + tail_est),
        tail_cut: Some(tail_cut),
        fitted_tail_constant: Some(fitted_tail_constant),
        epsilon: None,
        samples: None,
        seed: None,
        raw_pair: None,
        standard_error: None,
    })
}

/// Quadrature estimate with the cutoff grown dyadically until the
/// estimated tail drops below 1% of the running value (or a hard cap,
/// beyond which the larger tail stays folded into the indicator).
pub fn singular_integral_quadrature_default(form: &DiagonalForm) -> Result<IntegralEstimate> {
    let mut tail_cut = 4.0;
    let mut estimate = singular_integral_quadrature(form, tail_cut)?;
    while tail_cut < 4096.0 {
        if estimate.error_indicator <= 0.01 * estimate.value.abs() {
            break;
        }
        tail_cut *= 2.0;
        estimate = singular_integral_quadrature(form, tail_cut)?;
    }
    Ok(estimate)
}

/// Slab Monte Carlo estimate of the singular integral:
/// `(2ε)^{-1} vol{x ∈ [-1,1]^s : |Σ a_j x_j^k| ≤ ε}` by uniform sampling,
/// with one Richardson step between ε and ε/2 (nested hits from the same
/// sample set) to cancel the leading slab bias.
///
/// The error indicator is the extrapolated standard error plus the full
/// |raw(ε) − raw(ε/2)| gap — an honest bias probe, not a confidence bound.
pub fn singular_integral_slab_mc(
    form: &DiagonalForm,
    epsilon: f64,
    n: u64,
    stream: &SeededStream,
) -> Result<IntegralEstimate> {
    let k = form.k();
    let s = form.s();
    if s <= k as usize {
        return Err(Error::domain(format!(
            "the singular integral needs s > k (s = {s}, k = {k})"
        )));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::domain("slab half-width must lie in (0, 1]"));
    }
    if epsilon < MIN_EPSILON {
        return Err(Error::domain(format!(
            "slab half-width {epsilon} is below the float-safety minimum {MIN_EPSILON}"
        )));
    }
    if n == 0 {
        return Err(Error::domain("sample count must be positive"));
    }
    let coeffs: Vec<f64> = form.coeffs().iter().map(|&a| a as f64).collect();
    // Fixed-size batches on independent substreams: the hit counts are a
    // pure function of (seed, stream, n), whatever executes the batches.
    const BATCH: u64 = 1 << 16;
    let mut hits_eps = 0u64;
    let mut hits_half = 0u64;
    let mut drawn = 0u64;
    let mut batch_index = 0u64;
    while drawn < n {
        let take = BATCH.min(n - drawn);
        let mut rng = stream.substream(batch_index).rng();
        for _ in 0..take {
            let mut value = 0.0f64;
            for &a in &coeffs {
                let x: f64 = 2.0 * rng.random::<f64>() - 1.0;
                value += a * x.powi(k as i32);
            }
            if value.abs() <= epsilon {
                hits_eps += 1;
                if value.abs() <= epsilon * 0.5 {
                    hits_half += 1;
                }
            }
        }
        drawn += take;
        batch_index += 1;
    }
    let box_volume = 2f64.powi(s as i32);
    let nf = n as f64;
    let slab_value = |hits: u64, width: f64| box_volume * hits as f64 / (nf * 2.0 * width);
    let slab_se = |hits: u64, width: f64| {
        // Binomial model; zero hits fall back to p = 1/(n+1) so the
        // reported uncertainty never degenerates to zero.
        let p = if hits == 0 { 1.0 / (nf + 1.0) } else { hits as f64 / nf };
        box_volume / (2.0 * width) * (p * (1.0 - p) / nf).sqrt()
    };
    let raw_eps = slab_value(hits_eps, epsilon);
    let raw_half = slab_value(hits_half, epsilon * 0.5);
    let se_eps = slab_se(hits_eps, epsilon);
    let se_half = slab_se(hits_half, epsilon * 0.5);
    let value = (4.0 * raw_half - raw_eps) / 3.0;
    let se = ((4.0 * se_half / 3.0).powi(2) + (se_eps / 3.0).powi(2)).sqrt();
    Ok(IntegralEstimate {
        value,
        method: EstimatorMethod::SlabMc,
        error_indicator: se + (raw_eps - raw_half).abs(),
        tail_cut: None,
        fitted_tail_constant: None,
        epsilon: Some(epsilon),
        samples: Some(n),
        seed: Some((stream.seed(), stream.stream())),
        raw_pair: Some((raw_eps, raw_half)),
        standard_error: Some(se),
    })
}
