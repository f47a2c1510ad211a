//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! The bisection strategy follows QUADPACK's QAG: keep every subinterval in a
//! max-heap keyed on its error estimate and always split the worst one. The
//! semi-infinite helpers map the integration range onto a finite interval
//! before handing off to [`integrate`].

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// Kronrod abscissae on [0, 1]; odd indices are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
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

/// Stopping rule for the adaptive scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Self {
            abs: 0.0,
            rel,
            max_intervals: 20_000,
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::relative(1e-12)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut resabs = kronrod.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];

    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * kronrod;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = kronrod * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }

    Segment { a, b, value, error }
}

/// Integrate `f` over the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!(
            "integration bounds must be finite, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }

    let first = gauss_kronrod_15(&f, a, b);
    if !first.value.is_finite() {
        return Err(Error::Quadrature(format!(
            "non-finite integrand on [{a}, {b}]"
        )));
    }

    let mut evaluations = 15;
    let mut total = first.value;
    let mut total_error = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);

    loop {
        let target = tol.abs.max(tol.rel * total.abs());
        if total_error <= target {
            break;
        }
        if heap.len() >= tol.max_intervals {
            return Err(Error::Quadrature(format!(
                "error estimate {total_error:.3e} above target {target:.3e} after {} subintervals",
                heap.len()
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval cannot be split further in floating point.
            return Err(Error::Quadrature(format!(
                "subinterval [{}, {}] exhausted machine precision",
                worst.a, worst.b
            )));
        }
        let left = gauss_kronrod_15(&f, worst.a, mid);
        let right = gauss_kronrod_15(&f, mid, worst.b);
        evaluations += 30;
        if !(left.value.is_finite() && right.value.is_finite()) {
            return Err(Error::Quadrature(format!(
                "non-finite integrand on [{}, {}]",
                worst.a, worst.b
            )));
        }
        total += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // Re-sum to shed the drift of the running updates.
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let error: f64 = heap.iter().map(|s| s.error).sum();
    Ok(Estimate {
        value,
        error,
        evaluations,
    })
}

/// Integrate `f` over `[x_c, ∞)` through the substitution `v = (x_c/x)^power`,
/// which maps the range onto `(0, 1]`.
///
/// `power = 1` is the plain reciprocal map. For a Pareto-weighted integrand
/// with tail `x^{-k}`, picking `power = k - 1` turns the leading behaviour
/// into a constant and removes the endpoint singularity at `v = 0`.
///
/// Points whose preimage overflows `f64` contribute zero.
pub fn integrate_pareto_tail<F: Fn(f64) -> f64>(
    f: F,
    x_c: f64,
    power: f64,
    tol: Tolerance,
) -> Result<Estimate> {
    if !(x_c > 0.0 && x_c.is_finite()) {
        return Err(Error::Domain(format!(
            "threshold must be positive, got {x_c}"
        )));
    }
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::Domain(format!(
            "substitution power must be positive, got {power}"
        )));
    }
    let inv = 1.0 / power;
    integrate(
        |v: f64| {
            let x = x_c * v.powf(-inv);
            if !x.is_finite() {
                return 0.0;
            }
            // |dx/dv| = x / (power * v)
            let jac = x * inv / v;
            let y = f(x) * jac;
            if y.is_finite() {
                y
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        tol,
    )
}

/// Integrate `f` over `[a, ∞)` through `x = a + scale * t / (1 - t)`, `t ∈ [0, 1)`.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    scale: f64,
    tol: Tolerance,
) -> Result<Estimate> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Domain(format!(
            "scale must be positive, got {scale}"
        )));
    }
    integrate(
        |t: f64| {
            let s = 1.0 - t;
            let x = a + scale * t / s;
            if !x.is_finite() {
                return 0.0;
            }
            let y = f(x) * scale / (s * s);
            if y.is_finite() {
                y
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        tol,
    )
}
