// SPDX-License-Identifier: Apache-2.0

//! Deterministic low-discrepancy sampling.

const PRIMES: [u64; 40] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107,
    109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173,
];

fn radical_inverse(mut k: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while k > 0 {
        out += (k % base) as f64 * f;
        k /= base;
        f *= inv;
    }
    out
}

fn nth_prime(d: usize) -> u64 {
    if d < PRIMES.len() {
        return PRIMES[d];
    }
    let mut count = PRIMES.len() - 1;
    let mut p = PRIMES[PRIMES.len() - 1];
    while count < d {
        p += 2;
        if (3..).step_by(2).take_while(|q| q * q <= p).all(|q| !p.is_multiple_of(q)) {
            count += 1;
        }
    }
    p
}

/// The `k`-th point (k >= 1) of the Halton sequence in `[0,1)^dim`.
pub fn halton(k: u64, dim: usize) -> Vec<f64> {
    (0..dim).map(|d| radical_inverse(k, nth_prime(d))).collect()
}

/// `count` Halton points mapped to the cube `[-1,1]^dim`, skipping the origin of the sequence.
pub fn cube_points(count: usize, dim: usize) -> Vec<Vec<f64>> {
    (1..=count as u64).map(|k| halton(k, dim).into_iter().map(|t| 2.0 * t - 1.0).collect()).collect()
}

/// Maps the cube `[-1,1]^d` onto the unit 1-norm ball by the radial rescaling
/// `p -> p |p|_inf / |p|_1`, which is a bijection fixing each ray.
pub fn cube_to_l1_ball(p: &[f64]) -> Vec<f64> {
    let l1: f64 = p.iter().map(|v| v.abs()).sum();
    if l1 == 0.0 {
        return p.to_vec();
    }
    let linf = p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = linf / l1;
    p.iter().map(|v| v * scale).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn van_der_corput() {
        assert_eq!(halton(1, 2), vec![0.5, 1.0 / 3.0]);
        assert_eq!(halton(6, 1), vec![0.375]);
    }

    #[test]
    fn ball_mapping_stays_inside() {
        for p in cube_points(500, 3) {
            let q = cube_to_l1_ball(&p);
            assert!(q.iter().map(|v| v.abs()).sum::<f64>() <= 1.0 + 1e-15);
        }
        assert_eq!(cube_to_l1_ball(&[1.0, 1.0]), vec![0.5, 0.5]);
        assert_eq!(cube_to_l1_ball(&[-0.4]), vec![-0.4]);
    }

    #[test]
    fn high_dimensions_use_more_primes() {
        assert_eq!(nth_prime(40), 179);
        assert_eq!(halton(1, 45).len(), 45);
    }
}
