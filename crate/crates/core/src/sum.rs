//! Pairwise (tree) summation.
//!
//! Sums are evaluated along a balanced binary tree: a slice is split at its
//! midpoint until eight elements remain, which are then added as a fixed
//! three-level tree. For power-of-two lengths every internal node therefore
//! adds two subtrees of equal size. This gives two properties the rest of
//! the crate relies on:
//!
//! * sums of small integers (e.g. `±1` Walsh values) are exact;
//! * the sum over a dyadic block is the sum of the sums over its two halves,
//!   so averaging block averages reproduces the coarse average bit for bit.
//!
//! Large inputs are split across rayon workers at the same tree nodes, so the
//! result does not depend on the thread count.

const LEAF: usize = 8;
const PAR_THRESHOLD: usize = 1 << 16;

/// Pairwise sum of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() >= PAR_THRESHOLD {
        let (lo, hi) = xs.split_at(xs.len() / 2);
        let (a, b) = rayon::join(|| pairwise_sum(lo), || pairwise_sum(hi));
        return a + b;
    }
    sum_seq(xs)
}

fn sum_seq(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        LEAF => {
            ((xs[0] + xs[1]) + (xs[2] + xs[3])) + ((xs[4] + xs[5]) + (xs[6] + xs[7]))
        }
        len => {
            let (lo, hi) = xs.split_at(len / 2);
            sum_seq(lo) + sum_seq(hi)
        }
    }
}

/// Pairwise sum of the elementwise products `a[i] * b[i]`.
///
/// Panics if the slices differ in length.
pub fn pairwise_dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "pairwise_dot: length mismatch");
    if a.len() >= PAR_THRESHOLD {
        let mid = a.len() / 2;
        let (a0, a1) = a.split_at(mid);
        let (b0, b1) = b.split_at(mid);
        let (x, y) = rayon::join(|| pairwise_dot(a0, b0), || pairwise_dot(a1, b1));
        return x + y;
    }
    dot_seq(a, b)
}

fn dot_seq(a: &[f64], b: &[f64]) -> f64 {
    match a.len() {
        0 => 0.0,
        1 => a[0] * b[0],
        LEAF => {
            let p = |i: usize| a[i] * b[i];
            ((p(0) + p(1)) + (p(2) + p(3))) + ((p(4) + p(5)) + (p(6) + p(7)))
        }
        len => {
            let mid = len / 2;
            dot_seq(&a[..mid], &b[..mid]) + dot_seq(&a[mid..], &b[mid..])
        }
    }
}

/// Pairwise sum of `f(i)` for `i` in `0..len`, using the same tree shape as
/// [`pairwise_sum`].
pub fn pairwise_sum_by<F: Fn(usize) -> f64>(len: usize, f: F) -> f64 {
    fn go<F: Fn(usize) -> f64>(start: usize, len: usize, f: &F) -> f64 {
        match len {
            0 => 0.0,
            1 => f(start),
            len => {
                let mid = len / 2;
                go(start, mid, f) + go(start + mid, len - mid, f)
            }
        }
    }
    go(0, len, &f)
}
