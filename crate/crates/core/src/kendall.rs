//! Sample Kendall's tau (the tau-a variant) in O(n log n).
//!
//! Concordant-minus-discordant counts come from a merge sort over the second
//! coordinate after sorting by the first: each merge "swap" is a discordant
//! pair. Ties are corrected out of the numerator, so tied data biases the
//! estimate toward 0; posterior draws from continuous distributions are
//! tie-free almost surely.

use crate::error::{Error, Result};

/// Sample Kendall's tau-a of paired data: `(C - D) / (n(n-1)/2)`.
pub fn kendall_tau(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::argument(format!(
            "length mismatch: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::argument("kendall_tau needs at least two pairs".to_string()));
    }
    if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
        return Err(Error::domain("kendall_tau requires finite inputs".to_string()));
    }

    let mut pairs: Vec<(f64, f64)> = xs.iter().copied().zip(ys.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    // Pairs tied in x (and jointly in x and y) are neither concordant nor
    // discordant; count them so they can be removed from C - D.
    let mut tied_x = 0u64;
    let mut tied_xy = 0u64;
    let mut run_x = 1u64;
    let mut run_xy = 1u64;
    for i in 1..n {
        if pairs[i].0 == pairs[i - 1].0 {
            run_x += 1;
            if pairs[i].1 == pairs[i - 1].1 {
                run_xy += 1;
            } else {
                tied_xy += run_xy * (run_xy - 1) / 2;
                run_xy = 1;
            }
        } else {
            tied_x += run_x * (run_x - 1) / 2;
            run_x = 1;
            tied_xy += run_xy * (run_xy - 1) / 2;
            run_xy = 1;
        }
    }
    tied_x += run_x * (run_x - 1) / 2;
    tied_xy += run_xy * (run_xy - 1) / 2;

    let swaps = merge_count(&mut pairs);

    let mut tied_y = 0u64;
    let mut run_y = 1u64;
    for i in 1..n {
        if pairs[i].1 == pairs[i - 1].1 {
            run_y += 1;
        } else {
            tied_y += run_y * (run_y - 1) / 2;
            run_y = 1;
        }
    }
    tied_y += run_y * (run_y - 1) / 2;

    let total = (n as u64) * (n as u64 - 1) / 2;
    // C + D = total - tied_x - tied_y + tied_xy and D = swaps.
    let c_minus_d =
        total as f64 - tied_x as f64 - tied_y as f64 + tied_xy as f64 - 2.0 * swaps as f64;
    Ok(c_minus_d / total as f64)
}

/// Bottom-up merge sort by the y component, counting inversions.
fn merge_count(pairs: &mut Vec<(f64, f64)>) -> u64 {
    let n = pairs.len();
    let mut swaps = 0u64;
    let mut buf: Vec<(f64, f64)> = vec![(0.0, 0.0); n];
    let mut width = 1usize;
    while width < n {
        let mut start = 0usize;
        while start < n {
            let mid = (start + width).min(n);
            let end = (start + 2 * width).min(n);
            let (mut i, mut j, mut k) = (start, mid, start);
            while i < mid || j < end {
                if i < mid && (j >= end || pairs[i].1 <= pairs[j].1) {
                    buf[k] = pairs[i];
                    i += 1;
                } else {
                    swaps += (mid - i) as u64;
                    buf[k] = pairs[j];
                    j += 1;
                }
                k += 1;
            }
            start = end;
        }
        std::mem::swap(pairs, &mut buf);
        width *= 2;
    }
    swaps
}
