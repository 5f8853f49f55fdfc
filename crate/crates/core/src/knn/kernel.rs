//! Inner-product kernels for the chunked distance computation.
//!
//! Every pairwise dot product is accumulated in `LANES` interleaved partial
//! sums (lane `l` sees coordinates `t ≡ l mod LANES` in increasing order),
//! followed by a fixed combination and a sequential tail. The blocked kernel
//! reproduces [`dot`] bit for bit for any block or tile size, which is what
//! makes the neighbor search independent of chunking.

use std::ops::Range;

use crate::Scalar;

pub(crate) const LANES: usize = 4;

const MR: usize = 2;
const NR: usize = 4;

#[inline(always)]
fn combine<T: Scalar>(acc: &[T; LANES], tail: T) -> T {
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) + tail
}

/// Lane-accumulated dot product; the reference the blocked kernel matches.
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    assert_eq!(a.len(), b.len());
    let full = a.len() / LANES * LANES;
    let mut acc = [T::zero(); LANES];
    for (ca, cb) in a[..full]
        .chunks_exact(LANES)
        .zip(b[..full].chunks_exact(LANES))
    {
        for l in 0..LANES {
            acc[l] = acc[l] + ca[l] * cb[l];
        }
    }
    let mut tail = T::zero();
    for t in full..a.len() {
        tail = tail + a[t] * b[t];
    }
    combine(&acc, tail)
}

/// Writes `dot(row r, row c)` for `r in rows`, `c in cols` into
/// `out[(r - rows.start) * stride + (c - cols.start)]`.
///
/// `scratch` is reused between calls to avoid reallocating accumulators.
#[allow(clippy::too_many_arguments)]
pub(crate) fn block_dots<T: Scalar>(
    data: &[T],
    dim: usize,
    rows: Range<usize>,
    cols: Range<usize>,
    tile: usize,
    scratch: &mut Vec<[T; LANES]>,
    out: &mut [T],
    stride: usize,
) {
    #[cfg(target_arch = "x86_64")]
    {
        if std::is_x86_feature_detected!("avx2") {
            // SAFETY: the CPU supports AVX2, checked above.
            unsafe { block_dots_avx2(data, dim, rows, cols, tile, scratch, out, stride) };
            return;
        }
    }
    block_dots_impl(data, dim, rows, cols, tile, scratch, out, stride);
}

// Same code compiled with wider vectors. No fused multiply-add is emitted
// (Rust never contracts `a * b + c`), so results are identical to the
// baseline build.
#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
#[allow(clippy::too_many_arguments)]
unsafe fn block_dots_avx2<T: Scalar>(
    data: &[T],
    dim: usize,
    rows: Range<usize>,
    cols: Range<usize>,
    tile: usize,
    scratch: &mut Vec<[T; LANES]>,
    out: &mut [T],
    stride: usize,
) {
    block_dots_impl(data, dim, rows, cols, tile, scratch, out, stride);
}

#[inline(always)]
#[allow(clippy::too_many_arguments)]
fn block_dots_impl<T: Scalar>(
    data: &[T],
    dim: usize,
    rows: Range<usize>,
    cols: Range<usize>,
    tile: usize,
    scratch: &mut Vec<[T; LANES]>,
    out: &mut [T],
    stride: usize,
) {
    let nr = rows.len();
    let nc = cols.len();
    let full = dim / LANES * LANES;
    let tile = (tile.max(LANES) / LANES) * LANES;

    scratch.clear();
    scratch.resize(nr * nc, [T::zero(); LANES]);
    let acc = scratch.as_mut_slice();

    let mut t0 = 0;
    while t0 < full {
        let t1 = (t0 + tile).min(full);
        let mut r = 0;
        while r + MR <= nr {
            let mut c = 0;
            while c + NR <= nc {
                micro::<T, MR, NR>(data, dim, &rows, &cols, r, c, t0, t1, acc, nc);
                c += NR;
            }
            while c < nc {
                micro::<T, MR, 1>(data, dim, &rows, &cols, r, c, t0, t1, acc, nc);
                c += 1;
            }
            r += MR;
        }
        while r < nr {
            let mut c = 0;
            while c + NR <= nc {
                micro::<T, 1, NR>(data, dim, &rows, &cols, r, c, t0, t1, acc, nc);
                c += NR;
            }
            while c < nc {
                micro::<T, 1, 1>(data, dim, &rows, &cols, r, c, t0, t1, acc, nc);
                c += 1;
            }
            r += 1;
        }
        t0 = t1;
    }

    for r in 0..nr {
        let a = &data[(rows.start + r) * dim..(rows.start + r + 1) * dim];
        for c in 0..nc {
            let b = &data[(cols.start + c) * dim..(cols.start + c + 1) * dim];
            let mut tail = T::zero();
            for t in full..dim {
                tail = tail + a[t] * b[t];
            }
            out[r * stride + c] = combine(&acc[r * nc + c], tail);
        }
    }
}

#[inline(always)]
#[allow(clippy::too_many_arguments)]
fn micro<T: Scalar, const R: usize, const C: usize>(
    data: &[T],
    dim: usize,
    rows: &Range<usize>,
    cols: &Range<usize>,
    r0: usize,
    c0: usize,
    t0: usize,
    t1: usize,
    acc: &mut [[T; LANES]],
    nc: usize,
) {
    let len = t1 - t0;
    let a: [&[T]; R] = std::array::from_fn(|r| {
        let base = (rows.start + r0 + r) * dim;
        &data[base + t0..base + t1]
    });
    let b: [&[T]; C] = std::array::from_fn(|c| {
        let base = (cols.start + c0 + c) * dim;
        &data[base + t0..base + t1]
    });

    let mut local = [[[T::zero(); LANES]; C]; R];
    for r in 0..R {
        for c in 0..C {
            local[r][c] = acc[(r0 + r) * nc + c0 + c];
        }
    }

    let mut t = 0;
    while t < len {
        let av: [&[T; LANES]; R] = std::array::from_fn(|r| a[r][t..t + LANES].try_into().unwrap());
        let bv: [&[T; LANES]; C] = std::array::from_fn(|c| b[c][t..t + LANES].try_into().unwrap());
        for r in 0..R {
            for c in 0..C {
                for l in 0..LANES {
                    local[r][c][l] = local[r][c][l] + av[r][l] * bv[c][l];
                }
            }
        }
        t += LANES;
    }

    for r in 0..R {
        for c in 0..C {
            acc[(r0 + r) * nc + c0 + c] = local[r][c];
        }
    }
}
