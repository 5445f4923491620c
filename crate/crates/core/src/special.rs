//! Special functions: complex gamma, the truncated Mellin kernel
//! E(z, b) = ∫₁^∞ u^{z−1} e^{−bu} du, and compensated summation.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// sin(πx) with exact zeros at the integers.
fn sin_pi_real(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).floor(); // r in [0, 2)
    if r == 0.0 || r == 1.0 {
        return 0.0;
    }
    if r == 0.5 {
        return 1.0;
    }
    if r == 1.5 {
        return -1.0;
    }
    (PI * r).sin()
}

fn cos_pi_real(x: f64) -> f64 {
    sin_pi_real(x + 0.5)
}

/// sin(πz) for complex z.
pub fn sin_pi(z: Complex64) -> Complex64 {
    let (sx, cx) = (sin_pi_real(z.re), cos_pi_real(z.re));
    let y = PI * z.im;
    Complex64::new(sx * y.cosh(), cx * y.sinh())
}

/// log Γ(z) for Re z ≥ 1/2 (principal branch of the Lanczos form).
fn ln_gamma_right(z: Complex64) -> Complex64 {
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

/// Γ(z) for complex z. Returns infinity at the poles.
pub fn gamma(z: Complex64) -> Complex64 {
    if z.re >= 0.5 {
        ln_gamma_right(z).exp()
    } else {
        let s = sin_pi(z);
        if s == Complex64::new(0.0, 0.0) {
            return Complex64::new(f64::INFINITY, 0.0);
        }
        PI / (s * ln_gamma_right(1.0 - z).exp())
    }
}

/// 1/Γ(z), an entire function; exactly zero at z = 0, −1, −2, …
pub fn rgamma(z: Complex64) -> Complex64 {
    if z.re >= 0.5 {
        (-ln_gamma_right(z)).exp()
    } else {
        sin_pi(z) * ln_gamma_right(1.0 - z).exp() / PI
    }
}

/// Real Γ(x).
pub fn gamma_real(x: f64) -> f64 {
    if x > 0.0 && (2.0 * x).fract() == 0.0 && x <= 170.0 {
        return gamma_half((2.0 * x) as u32);
    }
    gamma(Complex64::new(x, 0.0)).re
}

/// Γ(k/2) for a positive integer k, by the exact recursion from Γ(1/2), Γ(1).
pub fn gamma_half(k: u32) -> f64 {
    assert!(k > 0, "gamma_half needs k >= 1");
    let (mut g, mut x) = if k % 2 == 0 {
        (1.0, 1.0)
    } else {
        (PI.sqrt(), 0.5)
    };
    let target = k as f64 / 2.0;
    while x < target {
        g *= x;
        x += 1.0;
    }
    g
}

/// Euler Beta function B(a, b) for positive reals.
pub fn beta_real(a: f64, b: f64) -> f64 {
    let lg = |x: f64| ln_gamma_right(Complex64::new(x, 0.0)).re;
    if a >= 0.5 && b >= 0.5 {
        (lg(a) + lg(b) - lg(a + b)).exp()
    } else {
        gamma_real(a) * gamma_real(b) / gamma_real(a + b)
    }
}

const CF_EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;

/// e^{b} E(z, b) by the Legendre continued fraction (modified Lentz).
fn scaled_tail_cf(z: Complex64, b: f64) -> Complex64 {
    let tiny = Complex64::new(TINY, 0.0);
    let mut bb = Complex64::new(b + 1.0, 0.0) - z;
    let mut c = Complex64::new(1.0 / TINY, 0.0);
    let mut d = if bb.norm() < TINY {
        1.0 / tiny
    } else {
        1.0 / bb
    };
    let mut h = d;
    for i in 1..20_000 {
        let an = -(i as f64) * (Complex64::new(i as f64, 0.0) - z);
        bb += 2.0;
        d = an * d + bb;
        if d.norm() < TINY {
            d = tiny;
        }
        c = bb + an / c;
        if c.norm() < TINY {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).norm() < CF_EPS {
            break;
        }
    }
    h
}

/// E(z, b) via Γ(z)b^{−z} minus the lower series; needs Re z ≥ 1/2.
fn tail_by_series(z: Complex64, b: f64) -> Complex64 {
    let mut term = 1.0 / z;
    let mut sum = term;
    let mut k = 1.0;
    loop {
        term *= b / (z + k);
        sum += term;
        if term.norm() < 1e-17 * sum.norm() || k > 10_000.0 {
            break;
        }
        k += 1.0;
    }
    gamma(z) * (-z * b.ln()).exp() - (-b).exp() * sum
}

/// Nodes and weights of the 20-point Gauss–Legendre rule on [−1, 1].
fn gauss_legendre_20() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = 20usize;
        (0..n)
            .map(|i| {
                let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
                let mut dp = 1.0;
                for _ in 0..100 {
                    let (mut p0, mut p1) = (1.0, x);
                    for k in 2..=n {
                        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                        p0 = p1;
                        p1 = p2;
                    }
                    dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                    let dx = p1 / dp;
                    x -= dx;
                    if dx.abs() < 1e-16 {
                        break;
                    }
                }
                (x, 2.0 / ((1.0 - x * x) * dp * dp))
            })
            .collect()
    })
}

/// E(z, b) by composite Gauss–Legendre in y = ln u over [0, Y], plus a
/// continued-fraction tail beyond u = e^Y.
fn tail_by_quadrature(z: Complex64, b: f64) -> Complex64 {
    let u_cut = ((60.0 + 2.0 * z.norm()) / b).max(2.0);
    let y_cut = u_cut.ln();
    let panels = (1.0 + 4.0 * y_cut * (1.0 + z.im.abs())).ceil() as usize;
    let h = y_cut / panels as f64;
    let rule = gauss_legendre_20();
    let mut acc = ComplexSum::default();
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * h;
        for &(x, w) in rule {
            let y = mid + 0.5 * h * x;
            acc.add((z * y - b * y.exp()).exp() * (0.5 * h * w));
        }
    }
    // ∫_U^∞ u^{z-1} e^{-bu} du = U^z E(z, bU)
    let tail = (z * y_cut).exp() * (-b * u_cut).exp() * scaled_tail_cf(z, b * u_cut);
    acc.sum() + tail
}

/// E(z, b) = ∫₁^∞ u^{z−1} e^{−bu} du = b^{−z} Γ(z, b) for b > 0.
///
/// Entire in z. The branch is selected from (Re z, b): continued fraction
/// when b ≥ Re z + 1, series complement when Re z ≥ 1/2, and quadrature
/// otherwise.
pub fn mellin_tail(z: Complex64, b: f64) -> Complex64 {
    assert!(b > 0.0, "mellin_tail needs b > 0");
    if b >= z.re + 1.0 {
        (-b).exp() * scaled_tail_cf(z, b)
    } else if z.re >= 0.5 {
        tail_by_series(z, b)
    } else {
        tail_by_quadrature(z, b)
    }
}

/// Neumaier (improved Kahan) summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn sum(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated complex accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub struct ComplexSum {
    re: Neumaier,
    im: Neumaier,
}

impl ComplexSum {
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn sum(&self) -> Complex64 {
        Complex64::new(self.re.sum(), self.im.sum())
    }
}

/// Binomial coefficient as f64 (exact for the small arguments used here).
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r.round()
}
