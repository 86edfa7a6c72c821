//! Brute-force oracle for the parity-forgery bias bound.
//!
//! For a projection onto a size-t label subset G of the ballot state, the
//! best parity guess has bias (1/2^{t+1})·‖Σ_y (−1)^{|y|} ρ(y)‖_tr over the
//! 2^t restrictions y, with ρ(y) the rank-one ballot projector on t labels.
//! The bias is 1/2 at t = 2 and vanishes for any larger subset — forging a
//! second vote from one ballot copy is a fair coin. Feasible up to n = 4.

use crate::{Error, Result};

/// Jacobi eigenvalue sweep for small real symmetric matrices.
fn symmetric_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _ in 0..2000 {
        let mut off = 0.0;
        let (mut p, mut q, mut max) = (0, 1, 0.0);
        for i in 0..n {
            for j in (i + 1)..n {
                let v = a[i][j].abs();
                off += v * v;
                if v > max {
                    max = v;
                    p = i;
                    q = j;
                }
            }
        }
        if off < 1e-24 {
            break;
        }
        let app = a[p][p];
        let aqq = a[q][q];
        let apq = a[p][q];
        let theta = 0.5 * (2.0 * apq).atan2(aqq - app);
        let (s, c) = theta.sin_cos();
        for k in 0..n {
            let akp = a[k][p];
            let akq = a[k][q];
            a[k][p] = c * akp - s * akq;
            a[k][q] = s * akp + c * akq;
        }
        for k in 0..n {
            let apk = a[p][k];
            let aqk = a[q][k];
            a[p][k] = c * apk - s * aqk;
            a[q][k] = s * apk + c * aqk;
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

/// Exact bias of the optimal parity guess over a size-t subset of one ballot
/// copy's labels (independent of which subset, by relabeling symmetry).
pub fn parity_guess_bias(t: usize) -> Result<f64> {
    if !(2..=16).contains(&t) {
        return Err(Error::InvalidArgument(format!(
            "bias oracle supports 2 <= t <= 16, got {t}"
        )));
    }
    // Difference operator Σ_y (−1)^{parity(y)} ρ(y) with
    // ρ(y)_{ij} = (−1)^{y_i + y_j} / t.
    let mut diff = vec![vec![0.0f64; t]; t];
    for y in 0u32..(1 << t) {
        let parity_sign = if y.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        for i in 0..t {
            for j in 0..t {
                let phase = ((y >> i) & 1) ^ ((y >> j) & 1);
                let entry = if phase == 0 { 1.0 } else { -1.0 } / t as f64;
                diff[i][j] += parity_sign * entry;
            }
        }
    }
    let trace_norm: f64 = symmetric_eigenvalues(diff).iter().map(|l| l.abs()).sum();
    Ok(trace_norm / 2.0f64.powi(t as i32 + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn jacobi_recovers_known_spectrum() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3.
        let mut eig = symmetric_eigenvalues(vec![vec![2.0, 1.0], vec![1.0, 2.0]]);
        eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_abs_diff_eq!(eig[0], 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(eig[1], 3.0, epsilon = 1e-9);
    }

    #[test]
    fn bias_is_half_for_pairs_and_zero_beyond() {
        assert_abs_diff_eq!(parity_guess_bias(2).unwrap(), 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(parity_guess_bias(3).unwrap(), 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(parity_guess_bias(4).unwrap(), 0.0, epsilon = 1e-9);
    }
}
