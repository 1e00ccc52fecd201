//! Dense kernels behind the tape operations.
//!
//! Every output element of [`gemm`] is accumulated from zero in increasing
//! inner-index order with separate multiply and add, so results are bitwise
//! equal to the textbook triple loop.

use super::pool;

/// `out[m×n] = a[m×k] · b[k×n]`.
pub fn gemm(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("avx512f") {
            // SAFETY: the feature was detected at runtime.
            return unsafe { gemm_avx512(a, b, m, k, n) };
        }
        if std::arch::is_x86_feature_detected!("avx2") {
            // SAFETY: the feature was detected at runtime.
            return unsafe { gemm_avx2(a, b, m, k, n) };
        }
    }
    gemm_body(a, b, m, k, n)
}

// Wider vectors only; no FMA, so rounding is unchanged.
#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx512f")]
unsafe fn gemm_avx512(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    gemm_body(a, b, m, k, n)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn gemm_avx2(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    gemm_body(a, b, m, k, n)
}

const MR: usize = 6;
const NR: usize = 16;

#[inline(always)]
fn gemm_body(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    let mut out = pool::zeroed(m * n);
    let n_main = n - n % NR;
    let mut i = 0;
    while i < m {
        let rows = MR.min(m - i);
        let mut j = 0;
        while j < n_main {
            if rows == MR {
                // MR×NR accumulator tile stays in registers across the whole inner sum
                let mut acc = [[0.0f64; NR]; MR];
                for p in 0..k {
                    let brow: &[f64; NR] = b[p * n + j..p * n + j + NR].try_into().unwrap();
                    for (r, acc_row) in acc.iter_mut().enumerate() {
                        let av = a[(i + r) * k + p];
                        for c in 0..NR {
                            acc_row[c] += av * brow[c];
                        }
                    }
                }
                for (r, acc_row) in acc.iter().enumerate() {
                    out[(i + r) * n + j..(i + r) * n + j + NR].copy_from_slice(acc_row);
                }
            } else {
                for r in 0..rows {
                    let mut acc = [0.0f64; NR];
                    for p in 0..k {
                        let av = a[(i + r) * k + p];
                        let brow = &b[p * n + j..p * n + j + NR];
                        for c in 0..NR {
                            acc[c] += av * brow[c];
                        }
                    }
                    out[(i + r) * n + j..(i + r) * n + j + NR].copy_from_slice(&acc);
                }
            }
            j += NR;
        }
        // leftover columns
        for r in 0..rows {
            let arow = &a[(i + r) * k..(i + r + 1) * k];
            for jj in n_main..n {
                let mut s = 0.0;
                for (p, &av) in arow.iter().enumerate() {
                    s += av * b[p * n + jj];
                }
                out[(i + r) * n + jj] = s;
            }
        }
        i += rows;
    }
    out
}

/// Transpose of a row-major `rows × cols` matrix.
pub fn transpose(a: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut out = pool::zeroed(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            out[j * rows + i] = a[i * cols + j];
        }
    }
    out
}

/// `a[m×k] · bᵀ` where `b` is `n×k`.
pub fn gemm_nt(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let bt = transpose(b, n, k);
    let out = gemm(a, &bt, m, k, n);
    pool::give(bt);
    out
}

/// `aᵀ · b` where `a` is `k×m` and `b` is `k×n`.
pub fn gemm_tn(a: &[f64], b: &[f64], k: usize, m: usize, n: usize) -> Vec<f64> {
    let at = transpose(a, k, m);
    let out = gemm(&at, b, m, k, n);
    pool::give(at);
    out
}
