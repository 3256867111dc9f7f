//! Quadrature rules: globally adaptive Gauss–Kronrod (G10/K21), Gauss–Hermite
//! node generation, and a level-doubling tanh-sinh rule in double-double
//! precision for integrands with algebraic endpoint singularities.

use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::dd::DoubleDouble;

// Kronrod nodes and weights, as tabulated.

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_809_542_126,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes XGK[1], XGK[3], ..., XGK[9].
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

/// Termination settings for [`integrate`].
#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub const fn relative(rel: f64) -> Self {
        Self {
            abs: 0.0,
            rel,
            max_intervals: 4000,
        }
    }

    pub const fn with_abs(mut self, abs: f64) -> Self {
        self.abs = abs;
        self
    }
}

fn kronrod21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    for i in 0..10 {
        let dx = half * XGK[i];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * half, (kronrod - gauss).abs() * half)
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive G10/K21 integration of `f` over `[a, b]`, starting from
/// the panels delimited by `breaks` (sorted, strictly inside `(a, b)` or not,
/// out-of-range points are dropped).
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: Tolerance,
) -> Integral {
    if a == b {
        return Integral {
            value: 0.0,
            error: 0.0,
            converged: true,
        };
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut points = vec![lo];
    points.extend(breaks.iter().copied().filter(|&x| x > lo && x < hi));
    points.push(hi);
    points.sort_by(f64::total_cmp);
    points.dedup();

    let mut heap = BinaryHeap::new();
    let (mut total, mut total_err) = (0.0, 0.0);
    for w in points.windows(2) {
        let (value, error) = kronrod21(&mut f, w[0], w[1]);
        total += value;
        total_err += error;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value,
            error,
        });
    }

    let mut converged = false;
    while heap.len() < tol.max_intervals {
        if total_err <= tol.abs.max(tol.rel * total.abs()) {
            converged = true;
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel cannot be split further in f64.
            heap.push(worst);
            break;
        }
        let (v1, e1) = kronrod21(&mut f, worst.a, mid);
        let (v2, e2) = kronrod21(&mut f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    if !converged {
        converged = total_err <= tol.abs.max(tol.rel * total.abs());
    }
    // Re-add in a fixed order to shed the drift of the running total.
    let mut panels = heap.into_vec();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value: f64 = panels.iter().map(|p| p.value).sum();
    let error: f64 = panels.iter().map(|p| p.error).sum();
    Integral {
        value: sign * value,
        error,
        converged,
    }
}

pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Integral {
    integrate_with_breaks(f, a, b, &[], tol)
}

/// `∫_a^∞ f(x) dx` through `x = a + scale·t/(1−t)`.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    scale: f64,
    tol: Tolerance,
) -> Integral {
    // Breaks at x - a = scale·{1/8, 1, 8, 64} give the first panels a sense
    // of where the mass sits.
    let breaks: Vec<f64> = [1.0 / 9.0, 0.5, 8.0 / 9.0, 64.0 / 65.0].to_vec();
    integrate_with_breaks(
        |t| {
            let one_minus = 1.0 - t;
            let x = a + scale * t / one_minus;
            let v = f(x);
            if v == 0.0 {
                0.0
            } else {
                v * scale / (one_minus * one_minus)
            }
        },
        0.0,
        1.0,
        &breaks,
        tol,
    )
}

/// Gauss–Hermite nodes and weights for the weight `e^{-x²}` (Newton iteration
/// on the orthonormal Hermite recurrence). Nodes ascend.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    const PIM4: f64 = 0.751_125_544_464_942_5; // π^{-1/4}
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-0.166_67),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = PIM4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    x.reverse();
    w.reverse();
    (x, w)
}

/// One side of the tanh-sinh rule on `[-1, 1]`: for abscissa `τ = i·h`, the
/// distance `δ = 1 − tanh(π/2·sinh τ)` from the endpoint and the weight
/// `(π/2)·cosh τ / cosh²(π/2·sinh τ)`.
#[derive(Clone, Copy, Debug)]
struct DeNode {
    distance: DoubleDouble,
    weight: DoubleDouble,
}

const DE_MAX_LEVEL: usize = 8;
const DE_MIN_DISTANCE: f64 = 1e-290;

/// Nodes added at each level: level 0 holds τ = 0, 1, 2, ...; level m > 0 the
/// odd multiples of 2^{-m}.
fn de_levels() -> &'static [Vec<DeNode>] {
    static LEVELS: OnceLock<Vec<Vec<DeNode>>> = OnceLock::new();
    LEVELS.get_or_init(|| {
        let half_pi = DoubleDouble::PI.ldexp(-1);
        let node = |tau: DoubleDouble| {
            let et = tau.exp();
            let sinh = (et - et.recip()).ldexp(-1);
            let cosh = (et + et.recip()).ldexp(-1);
            let q = (-(DoubleDouble::PI * sinh)).exp();
            let one_plus = DoubleDouble::ONE + q;
            DeNode {
                distance: q.ldexp(1) / one_plus,
                weight: half_pi * cosh * q.ldexp(2) / one_plus.square(),
            }
        };
        (0..=DE_MAX_LEVEL)
            .map(|level| {
                let h = DoubleDouble::ONE.ldexp(-(level as i32));
                let mut nodes = Vec::new();
                let mut i: u64 = 1;
                loop {
                    let n = node(h * DoubleDouble::from_f64(i as f64));
                    if n.distance.hi < DE_MIN_DISTANCE {
                        break;
                    }
                    nodes.push(n);
                    i += if level == 0 { 1 } else { 2 };
                }
                nodes
            })
            .collect()
    })
}

/// Tanh-sinh integration in double-double precision over an interval of
/// width `width`. The integrand receives the node's distance from the left
/// endpoint and from the right endpoint, both exact to double-double
/// precision, so endpoint singularities like `(t − a)^v` are evaluated
/// without cancellation. Levels are refined until two successive estimates
/// agree to `rel_tol`.
pub fn tanh_sinh_dd<F>(mut f: F, width: DoubleDouble, rel_tol: f64) -> (DoubleDouble, bool)
where
    F: FnMut(DoubleDouble, DoubleDouble) -> DoubleDouble,
{
    let (values, converged) = tanh_sinh_dd_batch(
        |left, right, out: &mut [DoubleDouble]| out[0] = f(left, right),
        1,
        width,
        rel_tol,
    );
    (values[0], converged)
}

/// Vector-valued [`tanh_sinh_dd`]: `f` fills one value per component at each
/// node, so work shared between components (logarithms of the node position)
/// is done once. Refinement stops when every component has converged.
pub fn tanh_sinh_dd_batch<F>(
    mut f: F,
    components: usize,
    width: DoubleDouble,
    rel_tol: f64,
) -> (Vec<DoubleDouble>, bool)
where
    F: FnMut(DoubleDouble, DoubleDouble, &mut [DoubleDouble]),
{
    let half = width.ldexp(-1);
    let levels = de_levels();
    let mut scratch = vec![DoubleDouble::ZERO; components];
    let mut sums = vec![DoubleDouble::ZERO; components];

    f(half, half, &mut scratch);
    for (s, v) in sums.iter_mut().zip(&scratch) {
        *s = *v * DoubleDouble::PI.ldexp(-1);
    }
    let mut add_level = |nodes: &[DeNode], sums: &mut [DoubleDouble]| {
        for node in nodes {
            let near = half * node.distance;
            let far = width - near;
            f(near, far, &mut scratch);
            for (s, v) in sums.iter_mut().zip(&scratch) {
                *s += *v * node.weight;
            }
            f(far, near, &mut scratch);
            for (s, v) in sums.iter_mut().zip(&scratch) {
                *s += *v * node.weight;
            }
        }
    };
    add_level(&levels[0], &mut sums);
    let mut estimates: Vec<DoubleDouble> = sums.iter().map(|s| *s * half).collect();
    for (level, nodes) in levels.iter().enumerate().skip(1) {
        add_level(nodes, &mut sums);
        let h = DoubleDouble::ONE.ldexp(-(level as i32));
        let mut all_converged = true;
        for (estimate, sum) in estimates.iter_mut().zip(&sums) {
            let next = *sum * half * h;
            let diff = (next - *estimate).abs().to_f64();
            if diff > rel_tol * next.abs().to_f64() {
                all_converged = false;
            }
            *estimate = next;
        }
        if level >= 3 && all_converged {
            return (estimates, true);
        }
    }
    (estimates, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_integrates_polynomials_exactly() {
        let r = integrate(|x| x.powi(20) - 3.0 * x.powi(7), 0.0, 1.0, Tolerance::relative(1e-14));
        assert!((r.value - (1.0 / 21.0 - 3.0 / 8.0)).abs() < 1e-15);
        assert!(r.converged);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let fwd = integrate(f64::exp, 0.0, 2.0, Tolerance::relative(1e-13)).value;
        let back = integrate(f64::exp, 2.0, 0.0, Tolerance::relative(1e-13)).value;
        assert!((fwd + back).abs() < 1e-14);
        assert!((fwd - (2f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn adaptive_handles_sqrt_endpoint() {
        let r = integrate(f64::sqrt, 0.0, 1.0, Tolerance::relative(1e-12));
        assert!((r.value - 2.0 / 3.0).abs() < 1e-11, "{r:?}");
    }

    #[test]
    fn semi_infinite_exponential() {
        let r = integrate_to_infinity(|x| (-x / 250.0).exp() / 250.0, 0.0, 250.0, Tolerance::relative(1e-12));
        assert!((r.value - 1.0).abs() < 1e-11, "{r:?}");
    }

    #[test]
    fn hermite_moments() {
        for n in [64, 128] {
            let (x, w) = gauss_hermite(n);
            let sqrt_pi = std::f64::consts::PI.sqrt();
            let m0: f64 = w.iter().sum();
            let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
            let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
            assert!((m0 / sqrt_pi - 1.0).abs() < 1e-13);
            assert!((m2 / sqrt_pi - 0.5).abs() < 1e-13);
            assert!((m4 / sqrt_pi - 0.75).abs() < 1e-13);
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn tanh_sinh_power_singularity() {
        // ∫_0^1 t^{-1/2} dt = 2 and ∫_0^1 t^{0.3}(1-t)^{0.01} dt = B(1.3, 1.01).
        let (v, ok) = tanh_sinh_dd(
            |left, _| left.powf(DoubleDouble::from_f64(-0.5)),
            DoubleDouble::ONE,
            1e-28,
        );
        assert!(ok);
        assert!((v - DoubleDouble::from_f64(2.0)).abs().to_f64() < 1e-25, "{v}");
    }

    #[test]
    fn tanh_sinh_exponential_to_dd_precision() {
        // ∫_0^1 e^{-t} dt = 1 - e^{-1}
        let (v, ok) = tanh_sinh_dd(|left, _| (-left).exp(), DoubleDouble::ONE, 1e-30);
        let exact = DoubleDouble::ONE - (-DoubleDouble::ONE).exp();
        assert!(ok);
        assert!(((v - exact).to_f64() / exact.to_f64()).abs() < 1e-29, "{v}");
    }
}
