//! Scans for violations of |q·a − m| ≥ c|q|^{−δ}.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cf::cf_expand_available;
use super::hp::HpReal;
use crate::lattice::cube;
use crate::{DeformationMatrix, LatticePoint};

const TWO_128: f64 = 340_282_366_920_938_463_463_374_607_431_768_211_456.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// No q with |q|_∞ ≤ Qmax violates the bound. This is evidence, not proof.
    NoViolationUpToQ,
    ViolationsFound,
}

/// A q violating the bound, with m the nearest integer to q·a.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub q: Vec<i64>,
    pub m: String,
    pub residual: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproximabilityReport {
    pub target: Vec<String>,
    pub delta: f64,
    pub c: f64,
    pub qmax: u64,
    pub verdict: Verdict,
    /// The first violations in (|q|_∞, q) order, at most `max_witnesses`.
    pub witnesses: Vec<Witness>,
    pub violation_count: u64,
    pub witnesses_truncated: bool,
    pub scanned: u64,
    /// Whether every q in the half-space 0 < |q|_∞ ≤ Qmax was visited.
    pub exhaustive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BvOptions {
    pub max_witnesses: usize,
    /// Random probes used when the exhaustive scan is too large.
    pub random_samples: u64,
    /// Largest number of q vectors scanned exhaustively.
    pub exhaustive_limit: u64,
    pub seed: u64,
}

impl Default for BvOptions {
    fn default() -> Self {
        BvOptions {
            max_witnesses: 1000,
            random_samples: 1 << 20,
            exhaustive_limit: 1 << 31,
            seed: 0xb7,
        }
    }
}

struct Scanner {
    fracs: Vec<u128>,
    delta: f64,
    c: f64,
    ints: Vec<BigInt>,
}

impl Scanner {
    /// ‖q·a‖ from the 0.128 fixed-point fractional parts.
    fn residual(&self, q: &[i64]) -> f64 {
        let mut s: u128 = 0;
        for (f, &qi) in self.fracs.iter().zip(q) {
            s = s.wrapping_add(f.wrapping_mul(qi as i128 as u128));
        }
        let d = s.min(s.wrapping_neg());
        d as f64 / TWO_128
    }

    fn bound(&self, q: &[i64]) -> f64 {
        let norm = q.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0) as f64;
        self.c * norm.powf(-self.delta)
    }

    fn check(&self, q: &[i64]) -> Option<(f64, f64)> {
        let r = self.residual(q);
        let b = self.bound(q);
        (r < b).then_some((r, b))
    }

    fn witness(&self, q: &[i64], r: f64, b: f64) -> Witness {
        // q·a = Σ q_i⌊a_i⌋ + Σ q_i{a_i}, the second sum in 0.128 fixed point
        let mut whole = BigInt::from(0);
        let mut frac = BigInt::from(0);
        for ((int, f), &qi) in self.ints.iter().zip(&self.fracs).zip(q) {
            whole += int * qi;
            frac += BigInt::from(*f) * qi;
        }
        let half = BigInt::from(1u8) << 127u32;
        let m = whole + ((frac + half) >> 128u32);
        Witness {
            q: q.to_vec(),
            m: m.to_string(),
            residual: r,
            bound: b,
        }
    }
}

#[derive(Default)]
struct Partial {
    hits: Vec<Vec<i64>>,
    count: u64,
    scanned: u64,
}

impl Partial {
    fn merge(mut self, other: Partial) -> Partial {
        self.hits.extend(other.hits);
        self.count += other.count;
        self.scanned += other.scanned;
        self
    }
}

fn order_key(q: &[i64]) -> (u64, Vec<i64>) {
    (
        q.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0),
        q.to_vec(),
    )
}

/// First nonzero coordinate positive.
fn in_half_space(q: &[i64]) -> bool {
    q.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0)
}

/// Searches q ∈ Z^n, 0 < |q|_∞ ≤ Qmax, for |q·a − m| < c|q|_∞^{−δ}.
pub fn bv_search(a: &[HpReal], delta: f64, c: f64, qmax: u64) -> ApproximabilityReport {
    bv_search_with(a, delta, c, qmax, BvOptions::default())
}

pub fn bv_search_with(
    a: &[HpReal],
    delta: f64,
    c: f64,
    qmax: u64,
    opts: BvOptions,
) -> ApproximabilityReport {
    let n = a.len();
    let scanner = Scanner {
        fracs: a.iter().map(|x| x.frac_u128()).collect(),
        delta,
        c,
        ints: a
            .iter()
            .map(|x| x.midpoint().floor().to_integer())
            .collect(),
    };
    let qm = qmax.min(i64::MAX as u64 / 4) as i64;
    let cap = opts.max_witnesses;
    let total = ((2 * qm as u128 + 1).pow(n as u32)).saturating_sub(1) / 2;
    let exhaustive = n > 0 && n <= 2 && total <= opts.exhaustive_limit as u128;

    let partial = if n == 0 || qm == 0 {
        Partial::default()
    } else if exhaustive && n == 1 {
        scan_range(&scanner, 1, qm, cap, |q1, f| f(&[q1]))
    } else if exhaustive {
        scan_range(&scanner, 0, qm, cap, |q1, f| {
            let lo = if q1 == 0 { 1 } else { -qm };
            for q2 in lo..=qm {
                f(&[q1, q2]);
            }
        })
    } else {
        sampled_scan(&scanner, a, qm, &opts)
    };

    let mut hits = partial.hits;
    hits.sort_by_key(|q| order_key(q));
    hits.dedup();
    let witnesses_truncated = hits.len() > cap || partial.count as usize > hits.len();
    hits.truncate(cap);
    let witnesses: Vec<Witness> = hits
        .iter()
        .map(|q| {
            let (r, b) = scanner.check(q).expect("recorded hits violate the bound");
            scanner.witness(q, r, b)
        })
        .collect();
    let verdict = if partial.count > 0 || n == 0 {
        Verdict::ViolationsFound
    } else {
        Verdict::NoViolationUpToQ
    };
    ApproximabilityReport {
        target: a.iter().map(|x| x.to_decimal(40)).collect(),
        delta,
        c,
        qmax,
        verdict,
        witnesses,
        violation_count: partial.count,
        witnesses_truncated,
        scanned: partial.scanned,
        exhaustive,
    }
}

/// Parallel scan over the first coordinate in [from, to]; `inner` feeds
/// every q with that first coordinate to the callback.
fn scan_range<F>(scanner: &Scanner, from: i64, to: i64, cap: usize, inner: F) -> Partial
where
    F: Fn(i64, &mut dyn FnMut(&[i64])) + Sync,
{
    let chunk = ((to - from + 1) / 256).max(1);
    let starts: Vec<i64> = (from..=to).step_by(chunk as usize).collect();
    starts
        .par_iter()
        .map(|&s| {
            let mut p = Partial::default();
            for q1 in s..=(s + chunk - 1).min(to) {
                inner(q1, &mut |q: &[i64]| {
                    p.scanned += 1;
                    if scanner.check(q).is_some() {
                        p.count += 1;
                        if p.hits.len() < cap {
                            p.hits.push(q.to_vec());
                        }
                    }
                });
            }
            p
        })
        .reduce(Partial::default, Partial::merge)
}

/// Small exhaustive cube, multiples of per-axis convergent denominators and
/// seeded random probes.
fn sampled_scan(scanner: &Scanner, a: &[HpReal], qm: i64, opts: &BvOptions) -> Partial {
    let n = a.len();
    let mut probes: Vec<Vec<i64>> = Vec::new();
    let mut r = 0i64;
    while r < qm
        && (2 * (r + 1) + 1)
            .checked_pow(n as u32)
            .is_some_and(|v| v <= 1 << 20)
    {
        r += 1;
    }
    for q in cube(n, r) {
        if in_half_space(q.coords()) {
            probes.push(q.coords().to_vec());
        }
    }
    for (i, x) in a.iter().enumerate() {
        let cf = cf_expand_available(x, 200);
        for qk in cf.denominators() {
            match qk.to_i64() {
                Some(v) if v >= 1 && v <= qm => {
                    let mut q = vec![0i64; n];
                    q[i] = v;
                    probes.push(q);
                }
                _ => {}
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.random_samples {
        let q: Vec<i64> = (0..n).map(|_| rng.gen_range(-qm..=qm)).collect();
        if in_half_space(&q) {
            probes.push(q);
        }
    }
    probes.sort_by_key(|q| order_key(q));
    probes.dedup();
    let cap = opts.max_witnesses;
    probes
        .par_chunks(4096)
        .map(|chunk| {
            let mut p = Partial::default();
            for q in chunk {
                p.scanned += 1;
                if scanner.check(q).is_some() {
                    p.count += 1;
                    if p.hits.len() < cap {
                        p.hits.push(q.clone());
                    }
                }
            }
            p
        })
        .reduce(Partial::default, Partial::merge)
}

/// Result of testing the column images ᵗ(Θ/2π)u for |u|_∞ ≤ u_bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixReport {
    pub verdict: Verdict,
    pub u_bound: i64,
    /// The first u whose image showed no violation.
    pub witness_u: Option<Vec<i64>>,
    /// Coordinates of ᵗ(Θ/2π)u that were kept (exact zeros are dropped).
    pub kept_axes: Vec<usize>,
    pub report: Option<ApproximabilityReport>,
    /// (u, violation count) for every candidate that failed.
    pub rejected: Vec<(Vec<i64>, u64)>,
}

/// Default search bound for u.
pub const DEFAULT_U_BOUND: i64 = 3;

/// Tests Θ through the entries of Θ/2π.
pub fn classify_matrix(theta: &DeformationMatrix, delta: f64, c: f64, qmax: u64) -> MatrixReport {
    let n = theta.dim();
    let rows: Vec<Vec<HpReal>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    HpReal::from_f64(theta.entry(i, j) / std::f64::consts::TAU)
                        .expect("finite entries")
                })
                .collect()
        })
        .collect();
    classify_normalized(&rows, delta, c, qmax, DEFAULT_U_BOUND, BvOptions::default())
}

/// Tests a matrix given directly by the entries of Θ/2π, which may be
/// high-precision reals.
///
/// Candidates are the unit vectors first, then the remaining u in the
/// half-space ordered by (|u|_∞, u).
pub fn classify_normalized(
    rows: &[Vec<HpReal>],
    delta: f64,
    c: f64,
    qmax: u64,
    u_bound: i64,
    opts: BvOptions,
) -> MatrixReport {
    let n = rows.len();
    let mut candidates: Vec<Vec<i64>> = (0..n)
        .map(|i| LatticePoint::unit(n, i).coords().to_vec())
        .collect();
    let mut rest: Vec<Vec<i64>> = cube(n, u_bound)
        .into_iter()
        .map(|p| p.coords().to_vec())
        .filter(|u| in_half_space(u) && !candidates.contains(u))
        .collect();
    rest.sort_by_key(|u| order_key(u));
    candidates.extend(rest);

    let mut rejected = Vec::new();
    for u in candidates {
        // (ᵗM u)_j = Σ_i M_ij u_i
        let image: Vec<HpReal> = (0..n)
            .map(|j| {
                let mut acc = HpReal::from_integer(0);
                for (i, &ui) in u.iter().enumerate() {
                    if ui != 0 {
                        acc = acc.add(&rows[i][j].scale(&BigRational::from_integer(ui.into())));
                    }
                }
                acc
            })
            .collect();
        let kept_axes: Vec<usize> = (0..n)
            .filter(|&j| {
                !(image[j].is_exact() && image[j].lo() == &BigRational::from_integer(0.into()))
            })
            .collect();
        if kept_axes.is_empty() {
            rejected.push((u, 0));
            continue;
        }
        let target: Vec<HpReal> = kept_axes.iter().map(|&j| image[j].clone()).collect();
        let report = bv_search_with(&target, delta, c, qmax, opts);
        if report.verdict == Verdict::NoViolationUpToQ {
            return MatrixReport {
                verdict: Verdict::NoViolationUpToQ,
                u_bound,
                witness_u: Some(u),
                kept_axes,
                report: Some(report),
                rejected,
            };
        }
        rejected.push((u, report.violation_count));
    }
    MatrixReport {
        verdict: Verdict::ViolationsFound,
        u_bound,
        witness_u: None,
        kept_axes: Vec::new(),
        report: None,
        rejected,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_point_residuals() {
        let a = [HpReal::from_ratio(1, 3).unwrap()];
        let s = Scanner {
            fracs: a.iter().map(|x| x.frac_u128()).collect(),
            delta: 1.0,
            c: 0.1,
            ints: a
                .iter()
                .map(|x| x.midpoint().floor().to_integer())
                .collect(),
        };
        assert!((s.residual(&[1]) - 1.0 / 3.0).abs() < 1e-15);
        assert!(s.residual(&[3]) < 1e-30);
        assert!((s.residual(&[-1]) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.witness(&[3], 0.0, 0.1).m, "1");
    }

    #[test]
    fn rational_target_has_exact_hits() {
        let r = bv_search(&[HpReal::from_ratio(2, 7).unwrap()], 1.0, 1e-3, 50);
        assert_eq!(r.verdict, Verdict::ViolationsFound);
        assert_eq!(r.witnesses[0].q, vec![7]);
        assert_eq!(r.witnesses[0].m, "2");
        assert_eq!(r.violation_count, 7);
        assert!(r.exhaustive);
    }
}
