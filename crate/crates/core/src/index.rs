//! Dense mixed-radix indexing of uniform tuples.
//!
//! Digit 0 is the most significant one, so `(t_1, ..., t_n)` over an alphabet
//! of size `b` maps to `t_1 b^{n-1} + ... + t_n`.

pub fn pow(base: usize, exp: usize) -> usize {
    (0..exp).fold(1usize, |acc, _| acc * base)
}

pub fn checked_pow(base: u64, exp: u64) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

pub fn encode(digits: &[usize], base: usize) -> usize {
    digits.iter().fold(0, |acc, &t| acc * base + t)
}

/// Writes the base-`base` digits of `index` into `digits`.
pub fn decode(mut index: usize, base: usize, digits: &mut [usize]) {
    for slot in digits.iter_mut().rev() {
        *slot = index % base;
        index /= base;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let mut digits = [0usize; 3];
        for i in 0..27 {
            decode(i, 3, &mut digits);
            assert_eq!(encode(&digits, 3), i);
        }
        decode(5, 2, &mut digits);
        assert_eq!(digits, [1, 0, 1]);
    }

    #[test]
    fn powers() {
        assert_eq!(pow(24, 2), 576);
        assert_eq!(checked_pow(24, 6), Some(191_102_976));
        assert_eq!(checked_pow(2, 64), None);
    }
}
