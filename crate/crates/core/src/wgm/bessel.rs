//! Integer-order Bessel functions of the first kind and their zeros.
//!
//! `J_n(x) = (1/2π) ∫₀^{2π} cos(nτ − x sin τ) dτ`. The integrand is periodic and
//! entire, so the trapezoidal rule converges geometrically once the node count
//! exceeds `n + x` by a healthy margin.

use std::f64::consts::PI;

/// `J_n(x)` for integer `n ≥ 0` and `x ≥ 0`.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    let nf = f64::from(n);
    let nodes = (2.0 * (nf + x.abs())).ceil() as usize + 64;
    let h = 2.0 * PI / nodes as f64;
    let sum: f64 = (0..nodes)
        .map(|k| {
            let tau = k as f64 * h;
            (nf * tau - x * tau.sin()).cos()
        })
        .sum();
    sum / nodes as f64
}

/// Zeros of `J_m` in `[lo, hi]`, returned as `(p, j_{m,p})` with `p` counted from the
/// first positive zero.
pub fn bessel_zeros_in(m: u32, lo: f64, hi: f64) -> Vec<(u32, f64)> {
    let mut out = Vec::new();
    if hi <= 0.0 || hi < lo {
        return out;
    }
    scan_zeros(m, hi, |p, root| {
        if root >= lo && root <= hi {
            out.push((p, root));
        }
        true
    });
    out
}

/// The `p`-th positive zero of `J_m`.
pub fn bessel_zero(m: u32, p: u32) -> f64 {
    assert!(p >= 1, "zero index starts at 1");
    let mut zero = f64::NAN;
    scan_zeros(m, f64::INFINITY, |k, root| {
        zero = root;
        k < p
    });
    zero
}

/// Visits the zeros of `J_m` in increasing order, stopping past `x_max` or once
/// `visit` returns false.
fn scan_zeros(m: u32, x_max: f64, mut visit: impl FnMut(u32, f64) -> bool) {
    const STEP: f64 = 0.25;
    // j_{m,1} > m for m >= 1; start just above the origin for m = 0.
    let mut a = if m == 0 { 1e-3 } else { f64::from(m) };
    let mut fa = bessel_j(m, a);
    let mut p = 0;
    while a <= x_max {
        let b = a + STEP;
        let fb = bessel_j(m, b);
        if fa == 0.0 || fa.signum() != fb.signum() {
            p += 1;
            let root = if fa == 0.0 {
                a
            } else {
                bisect(|x| bessel_j(m, x), a, b, fa)
            };
            if !visit(p, root) {
                return;
            }
        }
        a = b;
        fa = fb;
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Power series oracle, fine for modest x.
    fn series(n: u32, x: f64) -> f64 {
        let half = 0.5 * x;
        let mut term = half.powi(n as i32) / (1..=n).map(f64::from).product::<f64>();
        let mut sum = term;
        for k in 1..200 {
            term *= -half * half / (f64::from(k) * f64::from(k + n));
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    }

    #[test]
    fn matches_power_series() {
        for n in [0, 1, 2, 5, 12] {
            for x in [0.1, 1.0, 3.7, 6.2, 8.0] {
                let a = bessel_j(n, x);
                let b = series(n, x);
                assert!((a - b).abs() < 1e-13, "J_{n}({x}): {a} vs {b}");
            }
        }
    }

    #[test]
    fn tabulated_zeros() {
        let table = [
            (0, 1, 2.404_825_557_695_773),
            (0, 2, 5.520_078_110_286_311),
            (1, 1, 3.831_705_970_207_512),
            (1, 2, 7.015_586_669_815_619),
            (2, 1, 5.135_622_301_840_683),
            (10, 1, 14.475_500_686_554_54),
        ];
        for (m, p, expected) in table {
            let z = bessel_zero(m, p);
            assert!((z - expected).abs() < 1e-10, "j_({m},{p}) = {z}");
        }
    }

    #[test]
    fn zeros_in_window_are_indexed_consistently() {
        let all = bessel_zeros_in(3, 0.0, 30.0);
        let window = bessel_zeros_in(3, 12.0, 20.0);
        for (p, z) in &window {
            assert_eq!(all[(*p - 1) as usize].1, *z);
        }
        assert!(all.windows(2).all(|w| w[1].1 > w[0].1));
    }
}
