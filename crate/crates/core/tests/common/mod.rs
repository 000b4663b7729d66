#![allow(dead_code)]

/// Eigen-decomposition of `[[e_qd, g], [g, e_c]]` by a single Jacobi rotation.
///
/// Returns `(upper, lower, exciton weight of the upper eigenvector, exciton weight of the lower one)`.
pub fn jacobi_2x2(e_qd: f64, e_c: f64, g: f64) -> (f64, f64, f64, f64) {
    if g == 0.0 {
        return if e_qd >= e_c {
            (e_qd, e_c, 1.0, 0.0)
        } else {
            (e_c, e_qd, 0.0, 1.0)
        };
    }
    let tau = (e_c - e_qd) / (2.0 * g);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c2 = 1.0 / (1.0 + t * t);
    let s2 = t * t * c2;
    // Rotated diagonal: the first column of the rotation keeps the exciton weight c².
    let lam_x = e_qd - t * g;
    let lam_c = e_c + t * g;
    if lam_x >= lam_c {
        (lam_x, lam_c, c2, s2)
    } else {
        (lam_c, lam_x, s2, c2)
    }
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}
