//! Globally adaptive Gauss–Kronrod (G10/K21) quadrature for vector-valued
//! complex integrands, and a nested rule for the triangle `0 ≤ τ ≤ s ≤ t`.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

// Kronrod abscissae on [0, 1]; odd indices are the 10-point Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_600_525_478,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

/// Stopping criteria for [`integrate_vec`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_intervals: 4000,
        }
    }
}

impl QuadSettings {
    pub fn new(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuadOutput {
    pub value: Vec<Complex64>,
    /// Sum of per-interval error estimates, max-norm over components.
    pub error: f64,
    pub intervals: usize,
    pub evaluations: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: Vec<Complex64>,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn norm_max(v: &[Complex64]) -> f64 {
    v.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

fn kronrod_panel<F>(f: &mut F, a: f64, b: f64, dim: usize, scratch: &mut [Complex64]) -> Result<Panel>
where
    F: FnMut(f64, &mut [Complex64]) -> Result<()>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kron = vec![Complex64::new(0.0, 0.0); dim];
    let mut gauss = vec![Complex64::new(0.0, 0.0); dim];

    f(center, scratch)?;
    for (k, v) in kron.iter_mut().zip(scratch.iter()) {
        *k += v * WGK[10];
    }
    for (i, &x) in XGK.iter().enumerate().take(10) {
        for sign in [-1.0, 1.0] {
            f(center + sign * half * x, scratch)?;
            for d in 0..dim {
                kron[d] += scratch[d] * WGK[i];
                if i % 2 == 1 {
                    gauss[d] += scratch[d] * WG[i / 2];
                }
            }
        }
    }
    let mut error = 0.0_f64;
    for d in 0..dim {
        kron[d] *= half;
        gauss[d] *= half;
        error = error.max((kron[d] - gauss[d]).norm());
    }
    if !kron.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite(format!("integrand on [{a}, {b}]")));
    }
    Ok(Panel {
        a,
        b,
        value: kron,
        error,
    })
}

/// Integrate a `dim`-component complex function over `[a, b]`.
///
/// The integrand writes its values into the provided slice. Converges when the
/// summed error estimate drops below `max(abs_tol, rel_tol·‖I‖_max)`.
pub fn integrate_vec<F>(mut f: F, a: f64, b: f64, dim: usize, settings: &QuadSettings) -> Result<QuadOutput>
where
    F: FnMut(f64, &mut [Complex64]) -> Result<()>,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidInput(format!("quadrature limits [{a}, {b}] must be finite")));
    }
    if a == b {
        return Ok(QuadOutput {
            value: vec![Complex64::new(0.0, 0.0); dim],
            error: 0.0,
            intervals: 0,
            evaluations: 0,
        });
    }
    if a > b {
        let mut out = integrate_vec(f, b, a, dim, settings)?;
        out.value.iter_mut().for_each(|z| *z = -*z);
        return Ok(out);
    }

    let mut scratch = vec![Complex64::new(0.0, 0.0); dim];
    let first = kronrod_panel(&mut f, a, b, dim, &mut scratch)?;
    let mut total = first.value.clone();
    let mut total_err = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut evaluations = 21;
    let min_width = 64.0 * f64::EPSILON * (b - a).max(a.abs()).max(b.abs());

    loop {
        let target = settings.abs_tol.max(settings.rel_tol * norm_max(&total));
        if total_err <= target {
            break;
        }
        let worst = heap.pop().expect("panel heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if heap.len() + 2 > settings.max_intervals || worst.b - worst.a < min_width {
            return Err(Error::QuadratureNonConvergence {
                a,
                b,
                error: total_err,
                target,
                intervals: heap.len() + 1,
            });
        }
        let left = kronrod_panel(&mut f, worst.a, mid, dim, &mut scratch)?;
        let right = kronrod_panel(&mut f, mid, worst.b, dim, &mut scratch)?;
        evaluations += 42;
        for (d, acc) in total.iter_mut().enumerate() {
            *acc += left.value[d] + right.value[d] - worst.value[d];
        }
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // Re-sum occasionally to keep the running totals from drifting.
        if heap.len() % 64 == 0 {
            total = vec![Complex64::new(0.0, 0.0); dim];
            total_err = 0.0;
            for p in heap.iter() {
                for (acc, v) in total.iter_mut().zip(&p.value) {
                    *acc += v;
                }
                total_err += p.error;
            }
        }
    }

    // Deterministic final sum, ordered by position.
    let mut panels = heap.into_vec();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut value = vec![Complex64::new(0.0, 0.0); dim];
    let mut error = 0.0;
    for p in &panels {
        for (acc, v) in value.iter_mut().zip(&p.value) {
            *acc += v;
        }
        error += p.error;
    }
    Ok(QuadOutput {
        value,
        error,
        intervals: panels.len(),
        evaluations,
    })
}

/// Scalar convenience wrapper around [`integrate_vec`].
pub fn integrate<F>(mut f: F, a: f64, b: f64, settings: &QuadSettings) -> Result<Complex64>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    let out = integrate_vec(
        |x, out| {
            out[0] = f(x)?;
            Ok(())
        },
        a,
        b,
        1,
        settings,
    )?;
    Ok(out.value[0])
}

/// `∫₀ᵗ ds ∫₀ˢ dτ F(s, τ)` by nesting [`integrate_vec`].
///
/// The inner integral runs with ten times tighter tolerances so that its error
/// stays below the outer target.
pub fn integrate_triangle<F>(mut f: F, t: f64, dim: usize, settings: &QuadSettings) -> Result<QuadOutput>
where
    F: FnMut(f64, f64, &mut [Complex64]) -> Result<()>,
{
    if t < 0.0 {
        return Err(Error::InvalidInput(format!("triangle extent must be non-negative, got {t}")));
    }
    let inner_settings = QuadSettings {
        rel_tol: settings.rel_tol * 0.1,
        abs_tol: settings.abs_tol * 0.1 / t.max(1.0),
        max_intervals: settings.max_intervals,
    };
    integrate_vec(
        |s, out| {
            let inner = integrate_vec(|tau, o| f(s, tau, o), 0.0, s, dim, &inner_settings)?;
            out.copy_from_slice(&inner.value);
            Ok(())
        },
        0.0,
        t,
        dim,
        settings,
    )
}
