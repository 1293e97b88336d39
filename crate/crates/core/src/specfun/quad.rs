//! Globally adaptive Gauss-Kronrod (7, 15) quadrature on a finite interval.

use alloc::vec::Vec;

use crate::NeumaierSum;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of [`integrate`]: the estimate and its error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = half * XGK[i];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: libm::fabs((kronrod - gauss) * half),
    }
}

/// Integrates `f` over `[a, b]` until the summed error estimate drops below
/// `tol` or `max_intervals` segments are in use.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_intervals: usize,
) -> Quadrature {
    let mut segments: Vec<Segment> = Vec::with_capacity(64);
    segments.push(gk15(&f, a, b));
    loop {
        let total_error: f64 = segments.iter().map(|s| s.error).sum();
        if total_error <= tol || segments.len() >= max_intervals.max(1) {
            break;
        }
        let (worst, _) = segments.iter().enumerate().fold((0, -1.0), |best, (i, s)| {
            if s.error > best.1 {
                (i, s.error)
            } else {
                best
            }
        });
        let s = segments.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if mid <= s.a || mid >= s.b {
            // Interval can no longer be split in f64.
            segments.push(s);
            break;
        }
        segments.push(gk15(&f, s.a, mid));
        segments.push(gk15(&f, mid, s.b));
    }
    // Sum in interval order so the result does not depend on refinement history.
    segments.sort_by(|x, y| x.a.total_cmp(&y.a));
    Quadrature {
        value: segments
            .iter()
            .map(|s| s.value)
            .collect::<NeumaierSum>()
            .value(),
        error: segments.iter().map(|s| s.error).sum(),
        intervals: segments.len(),
    }
}
