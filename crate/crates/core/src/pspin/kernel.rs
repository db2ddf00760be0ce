//! Row kernels of the coupling contraction: single-precision couplings,
//! double-precision spins and accumulators.
//!
//! On x86-64 with AVX2 and FMA the explicit SIMD path is used; elsewhere a
//! portable loop with four independent accumulators. The choice is made at
//! run time and is fixed for the process, so results are reproducible on a
//! given machine.

/// `Σ_k row_k x_k`.
#[inline]
pub(crate) fn dot(row: &[f32], x: &[f64]) -> f64 {
    let x = &x[..row.len()];
    let mut acc = [0.0f64; 4];
    let rc = row.chunks_exact(4);
    let xc = x.chunks_exact(4);
    let tail: f64 = rc
        .remainder()
        .iter()
        .zip(xc.remainder())
        .map(|(&c, xi)| f64::from(c) * xi)
        .sum();
    for (r, xs) in rc.zip(xc) {
        for lane in 0..4 {
            acc[lane] += f64::from(r[lane]) * xs[lane];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Returns `Σ_k row_k x_k` and adds `alpha · row` into `y`.
#[inline]
pub(crate) fn dot_axpy(row: &[f32], x: &[f64], alpha: f64, y: &mut [f64]) -> f64 {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("avx2") && std::arch::is_x86_feature_detected!("fma")
        {
            let len = row.len();
            // SAFETY: the required CPU features were just detected, and the
            // slices are trimmed to a common length.
            return unsafe { avx2::dot_axpy(row, &x[..len], alpha, &mut y[..len]) };
        }
    }
    dot_axpy_portable(row, x, alpha, y)
}

pub(crate) fn dot_axpy_portable(row: &[f32], x: &[f64], alpha: f64, y: &mut [f64]) -> f64 {
    let len = row.len();
    let (x, y) = (&x[..len], &mut y[..len]);
    let mut acc = [0.0f64; 4];
    let body = len - len % 4;
    let (rb, rt) = row.split_at(body);
    let (xb, xt) = x.split_at(body);
    let (yb, yt) = y.split_at_mut(body);
    for ((r, xs), ys) in rb.chunks_exact(4).zip(xb.chunks_exact(4)).zip(yb.chunks_exact_mut(4)) {
        for lane in 0..4 {
            let c = f64::from(r[lane]);
            acc[lane] += c * xs[lane];
            ys[lane] += alpha * c;
        }
    }
    let mut tail = 0.0;
    for ((&r, xi), yi) in rt.iter().zip(xt).zip(yt) {
        let c = f64::from(r);
        tail += c * xi;
        *yi += alpha * c;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[cfg(target_arch = "x86_64")]
mod avx2 {
    use std::arch::x86_64::*;

    /// Caller guarantees AVX2 + FMA and `x.len() == y.len() == row.len()`.
    #[target_feature(enable = "avx2,fma")]
    pub(super) unsafe fn dot_axpy(row: &[f32], x: &[f64], alpha: f64, y: &mut [f64]) -> f64 {
        let len = row.len();
        let body = len - len % 8;
        let (rp, xp, yp) = (row.as_ptr(), x.as_ptr(), y.as_mut_ptr());
        let av = _mm256_set1_pd(alpha);
        let mut acc0 = _mm256_setzero_pd();
        let mut acc1 = _mm256_setzero_pd();
        let mut k = 0;
        while k < body {
            let c = _mm256_loadu_ps(rp.add(k));
            let c0 = _mm256_cvtps_pd(_mm256_castps256_ps128(c));
            let c1 = _mm256_cvtps_pd(_mm256_extractf128_ps(c, 1));
            acc0 = _mm256_fmadd_pd(c0, _mm256_loadu_pd(xp.add(k)), acc0);
            acc1 = _mm256_fmadd_pd(c1, _mm256_loadu_pd(xp.add(k + 4)), acc1);
            _mm256_storeu_pd(yp.add(k), _mm256_fmadd_pd(av, c0, _mm256_loadu_pd(yp.add(k))));
            _mm256_storeu_pd(
                yp.add(k + 4),
                _mm256_fmadd_pd(av, c1, _mm256_loadu_pd(yp.add(k + 4))),
            );
            k += 8;
        }
        let mut lanes = [0.0f64; 4];
        _mm256_storeu_pd(lanes.as_mut_ptr(), _mm256_add_pd(acc0, acc1));
        let mut sum = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
        for k in body..len {
            let c = f64::from(*rp.add(k));
            sum += c * *xp.add(k);
            *yp.add(k) += alpha * c;
        }
        sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dispatched_kernel_matches_portable() {
        for len in [0, 1, 3, 7, 8, 9, 31, 100] {
            let row: Vec<f32> = (0..len).map(|k| (k as f32 * 0.37).sin()).collect();
            let x: Vec<f64> = (0..len).map(|k| (k as f64 * 0.11).cos()).collect();
            let mut y1: Vec<f64> = (0..len).map(|k| k as f64).collect();
            let mut y2 = y1.clone();
            let a = dot_axpy(&row, &x, 0.3, &mut y1);
            let b = dot_axpy_portable(&row, &x, 0.3, &mut y2);
            assert!((a - b).abs() <= 1e-13 * (1.0 + a.abs()));
            assert!((a - dot(&row, &x)).abs() <= 1e-13 * (1.0 + a.abs()));
            for (p, q) in y1.iter().zip(&y2) {
                assert!((p - q).abs() <= 1e-13 * (1.0 + p.abs()));
            }
        }
    }
}
