//! Free traces 2^m Σ_{k∈Z^n} g(|k|²) over the whole lattice.

use std::f64::consts::PI;

use crate::special::{gamma_half, Neumaier};
use crate::zeta::jacobi_theta_1d;

/// Largest |k|² handled by exact shell counting.
pub const SHELL_LIMIT: usize = 1 << 18;

/// r_n(m) = #{k ∈ Z^n : |k|² = m} for m ≤ mmax.
pub fn shell_counts(n: usize, mmax: usize) -> Vec<u64> {
    let mut r = vec![0u64; mmax + 1];
    r[0] = 1;
    for _ in 0..n {
        let mut next = vec![0u64; mmax + 1];
        for (m, &c) in r.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let mut j = 0usize;
            while m + j * j <= mmax {
                next[m + j * j] += if j == 0 { c } else { 2 * c };
                j += 1;
            }
        }
        r = next;
    }
    r
}

/// vol(S^{n−1}) = 2π^{n/2}/Γ(n/2).
pub fn sphere_volume(n: usize) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half(n as u32)
}

/// Σ_{k∈Z^n} e^{−t|k|²} through the one-dimensional theta function.
pub fn gaussian_lattice_sum(n: usize, t: f64) -> f64 {
    jacobi_theta_1d(t, 0.0).re.powi(n as i32)
}

/// Σ_{k∈Z^n} g(|k|) for a decreasing g with g(ρ) negligible beyond `radius`.
///
/// Shells up to min(radius², SHELL_LIMIT) are summed exactly; anything
/// beyond is replaced by vol(S^{n−1})∫ g(ρ)ρ^{n−1}dρ, whose size is returned
/// as the second component.
pub fn radial_lattice_sum<G: Fn(f64) -> f64>(n: usize, radius: f64, g: G) -> (f64, f64) {
    let want = (radius * radius).ceil() as usize;
    let mmax = want.min(SHELL_LIMIT);
    let counts = shell_counts(n, mmax);
    let mut acc = Neumaier::default();
    for m in (0..=mmax).rev() {
        if counts[m] > 0 {
            acc.add(counts[m] as f64 * g((m as f64).sqrt()));
        }
    }
    let mut tail = 0.0;
    if want > mmax {
        let r0 = ((mmax + 1) as f64).sqrt();
        let vol = sphere_volume(n);
        let f = |v: f64| {
            if v <= 0.0 {
                0.0
            } else {
                let rho = r0 / v;
                g(rho) * rho.powi(n as i32 - 1) * r0 / (v * v)
            }
        };
        tail = vol * quadrature::double_exponential::integrate(f, 0.0, 1.0, 1e-14).integral;
        acc.add(tail);
    }
    (acc.sum(), tail.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shells_of_small_lattices() {
        assert_eq!(shell_counts(2, 5), vec![1, 4, 4, 0, 4, 8]);
        // Jacobi: r_4(m) = 8σ(m) for odd m
        let r4 = shell_counts(4, 9);
        assert_eq!(r4[1], 8);
        assert_eq!(r4[3], 32);
        assert_eq!(r4[9], 8 * 13);
    }

    #[test]
    fn sphere_volumes() {
        assert!((sphere_volume(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_volume(4) - 2.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn radial_matches_theta_for_gaussians() {
        let t = 0.05;
        let (v, tail) = radial_lattice_sum(2, 30.0, |r| (-t * r * r).exp());
        assert_eq!(tail, 0.0);
        assert!((v - gaussian_lattice_sum(2, t)).abs() < 1e-12 * v);
    }
}
