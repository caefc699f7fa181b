//! In-place fast Walsh–Hadamard transform kernels.
//!
//! [`fwht_in_place`] computes the unnormalized Hadamard transform
//! `H[k] = Σ_m x[m] · (-1)^popcount(k & m)` with radix-2 butterflies.
//! Strides smaller than [`LOCAL_BLOCK`] are processed block by block so that
//! the early stages stay in cache; wider strides sweep the whole array. Each
//! output element sees the same sequence of floating-point operations no
//! matter how the work is split, so parallel and serial runs agree bit for bit.

use rayon::prelude::*;

/// Number of elements transformed together for the cache-resident stages.
pub const LOCAL_BLOCK: usize = 1 << 12;
const PAR_THRESHOLD: usize = 1 << 15;

/// Unnormalized in-place Walsh–Hadamard transform (natural / Hadamard order).
///
/// Panics if `data.len()` is not a power of two.
pub fn fwht_in_place(data: &mut [f64]) {
    let n = data.len();
    assert!(n.is_power_of_two(), "fwht length {n} is not a power of two");
    if n == 1 {
        return;
    }
    let block = n.min(LOCAL_BLOCK);
    if n >= PAR_THRESHOLD {
        data.par_chunks_mut(block).for_each(fwht_local);
    } else {
        data.chunks_mut(block).for_each(fwht_local);
    }

    let mut half = block;
    while half < n {
        if n >= PAR_THRESHOLD {
            data.par_chunks_mut(2 * half).for_each(|chunk| {
                let (lo, hi) = chunk.split_at_mut(half);
                lo.par_chunks_mut(LOCAL_BLOCK)
                    .zip(hi.par_chunks_mut(LOCAL_BLOCK))
                    .for_each(|(a, b)| butterfly(a, b));
            });
        } else {
            for chunk in data.chunks_mut(2 * half) {
                let (lo, hi) = chunk.split_at_mut(half);
                butterfly(lo, hi);
            }
        }
        half *= 2;
    }
}

/// All stages with stride < `block.len()`.
fn fwht_local(block: &mut [f64]) {
    let n = block.len();
    // Fused first two stages (radix 4).
    if n >= 4 {
        for q in block.chunks_exact_mut(4) {
            let (a, b, c, d) = (q[0], q[1], q[2], q[3]);
            let (s0, d0) = (a + b, a - b);
            let (s1, d1) = (c + d, c - d);
            q[0] = s0 + s1;
            q[1] = d0 + d1;
            q[2] = s0 - s1;
            q[3] = d0 - d1;
        }
    } else {
        let (a, b) = (block[0], block[1]);
        block[0] = a + b;
        block[1] = a - b;
        return;
    }
    let mut half = 4;
    while half < n {
        for chunk in block.chunks_exact_mut(2 * half) {
            let (lo, hi) = chunk.split_at_mut(half);
            butterfly(lo, hi);
        }
        half *= 2;
    }
}

#[inline]
fn butterfly(lo: &mut [f64], hi: &mut [f64]) {
    for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
        let (x, y) = (*a, *b);
        *a = x + y;
        *b = x - y;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(x: &[f64]) -> Vec<f64> {
        (0..x.len())
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(m, v)| if (k & m).count_ones() % 2 == 0 { *v } else { -*v })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_naive_small_sizes() {
        for log in 0..=9 {
            let n = 1usize << log;
            let x: Vec<f64> = (0..n).map(|i| ((i * 37 + 11) % 17) as f64 - 8.0).collect();
            let mut y = x.clone();
            fwht_in_place(&mut y);
            assert_eq!(y, naive(&x), "size {n}");
        }
    }

    #[test]
    fn twice_is_scaled_identity() {
        let n = 1 << 16;
        let x: Vec<f64> = (0..n).map(|i| ((i * 7) % 13) as f64).collect();
        let mut y = x.clone();
        fwht_in_place(&mut y);
        fwht_in_place(&mut y);
        for (a, b) in x.iter().zip(&y) {
            assert_eq!(*a * n as f64, *b);
        }
    }

    #[test]
    fn parallel_path_is_bitwise_stable() {
        let n = 1 << 16;
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).cos()).collect();
        let mut a = x.clone();
        fwht_in_place(&mut a);
        // Serial reference: local stages on one block, then plain sweeps.
        let mut b = x;
        for chunk in b.chunks_mut(LOCAL_BLOCK) {
            fwht_local(chunk);
        }
        let mut half = LOCAL_BLOCK;
        while half < n {
            for chunk in b.chunks_mut(2 * half) {
                let (lo, hi) = chunk.split_at_mut(half);
                butterfly(lo, hi);
            }
            half *= 2;
        }
        assert!(a.iter().zip(&b).all(|(p, q)| p.to_bits() == q.to_bits()));
    }
}
