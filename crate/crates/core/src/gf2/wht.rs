//! Fast Walsh–Hadamard transform over F₂ⁿ in wrapping integer arithmetic.
//!
//! The unnormalised transform is a ring map on `Z/2⁶⁴`, so any quantity whose
//! true value fits in an `i64` comes out exact even when intermediate
//! butterflies wrap.

/// In-place unnormalised transform; `data.len()` must be a power of two.
pub fn fwht(data: &mut [i64]) {
    let len = data.len();
    assert!(
        len.is_power_of_two(),
        "transform length must be a power of two"
    );
    let mut half = 1;
    while half < len {
        for block in data.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x.wrapping_add(y);
                *b = x.wrapping_sub(y);
            }
        }
        half *= 2;
    }
}

/// `out[z] = Σ_x f(x)·g(x ⊕ z)`, computed with two forward transforms and
/// one inverse. Exact whenever every true output and `2ⁿ·|out[z]|` fit in `i64`.
pub fn xor_correlation(f: &[i64], g: &[i64]) -> Vec<i64> {
    assert_eq!(f.len(), g.len());
    let len = f.len();
    let shift = len.trailing_zeros();
    let mut fa = f.to_vec();
    let mut ga = g.to_vec();
    fwht(&mut fa);
    fwht(&mut ga);
    for (a, b) in fa.iter_mut().zip(&ga) {
        *a = a.wrapping_mul(*b);
    }
    fwht(&mut fa);
    // The inverse transform is the forward one scaled by 2^-n.
    fa.iter().map(|v| v >> shift).collect()
}
