//! Unimodular discrete Cantor set: integers whose 3-adic sum with a random
//! {0,2}-digit word keeps all digits in {0,2} (digit construction), or the
//! nested union T_{n+1} = T_n ∪ (T_n ± 2·3^n) (nested construction). Both
//! have the same law; the nested one enumerates its window directly.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sampling::RootedSampler;
use crate::space::{Norm, RootedSample};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CantorConstruction {
    Digit,
    Nested,
}

/// Digit-construction membership oracle: i ∈ Ψ iff i + U (3-adic sum) has
/// only digits 0 and 2. U's digits are drawn lazily; the carry/borrow past
/// the explicit digits resolves after finitely many random digits a.s.
pub struct CantorDigits {
    digits: Vec<u8>, // each 0 or 2
    /// true when the word is the deterministic all-zero word, whose tail
    /// beyond the buffer is known
    tail_all_zero: bool,
}

impl CantorDigits {
    pub fn sample(depth: u32, rng: &mut ChaCha8Rng) -> Self {
        // depth + 64 digits make an unresolved carry astronomically rare
        let n = depth as usize + 64;
        let digits = (0..n).map(|_| if rng.gen::<bool>() { 2 } else { 0 }).collect();
        CantorDigits { digits, tail_all_zero: false }
    }

    pub fn zero(depth: u32) -> Self {
        CantorDigits { digits: vec![0; depth as usize + 64], tail_all_zero: true }
    }

    /// Membership of i: all digits of i + U lie in {0, 2}.
    pub fn contains(&self, i: i64) -> bool {
        if i >= 0 {
            let mut rem = i as u64;
            let mut carry = 0u64;
            for &u in &self.digits {
                let d = rem % 3 + u as u64 + carry;
                rem /= 3;
                let digit = d % 3;
                carry = d / 3;
                if digit == 1 {
                    return false;
                }
                if rem == 0 && carry == 0 {
                    return true; // remaining digits are U's own, all in {0,2}
                }
            }
            false // unresolved carry: treat as non-member (prob ~ 2^-64)
        } else {
            // subtract |i| with borrows
            let mut rem = (-i) as u64;
            let mut borrow = 0i64;
            for &u in &self.digits {
                let take = (rem % 3) as i64 + borrow;
                rem /= 3;
                let mut d = u as i64 - take;
                if d < 0 {
                    d += 3;
                    borrow = 1;
                } else {
                    borrow = 0;
                }
                if d == 1 {
                    return false;
                }
                if rem == 0 && borrow == 0 {
                    return true;
                }
            }
            // an everlasting borrow through 0-digits yields trailing 2s,
            // which is a valid member only if all remaining digits are 0;
            // with random digits this has probability 0
            self.tail_all_zero && rem == 0
        }
    }

    /// Window of Ψ on [-3^depth+1, 3^depth-1] by direct membership scan.
    pub fn window(&self, depth: u32) -> Vec<i64> {
        let half = 3i64.pow(depth) - 1;
        (-half..=half).filter(|&i| self.contains(i)).collect()
    }
}

/// Nested construction: T_0 = {0}, T_{n+1} = T_n ∪ (T_n + s_n 2·3^n) with
/// i.i.d. signs. T_depth is exactly Ψ ∩ (-3^depth, 3^depth).
pub fn cantor_nested(depth: u32, rng: &mut ChaCha8Rng) -> Vec<i64> {
    let mut t = vec![0i64];
    for n in 0..depth {
        let shift = 2 * 3i64.pow(n) * if rng.gen::<bool>() { 1 } else { -1 };
        let mut extra: Vec<i64> = t.iter().map(|&x| x + shift).collect();
        t.append(&mut extra);
    }
    t.sort_unstable();
    t
}

fn points_to_sample(points: &[i64], window_half: i64) -> Result<RootedSample> {
    let root = points
        .iter()
        .position(|&x| x == 0)
        .ok_or_else(|| Error::domain("window must contain the root 0"))? as u32;
    let coords: Vec<f64> = points.iter().map(|&x| x as f64).collect();
    let interior: Vec<f64> =
        points.iter().map(|&x| (window_half - x.abs()) as f64).collect();
    RootedSample::from_coords(1, coords, root, interior, Norm::L2)
}

/// Sampler of Cantor-set windows rooted at 0.
pub fn gen_cantor(depth: u32, construction: CantorConstruction) -> Result<RootedSampler> {
    if depth > 20 {
        return Err(Error::domain("depth capped at 20 (window 3^depth)"));
    }
    let name = format!("cantor-{construction:?} depth={depth}");
    Ok(RootedSampler::new(name, 0xca2702, move |rng| {
        let pts = match construction {
            CantorConstruction::Nested => cantor_nested(depth, rng),
            CantorConstruction::Digit => CantorDigits::sample(depth, rng).window(depth),
        };
        points_to_sample(&pts, 3i64.pow(depth) - 1)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::replicate_rng;

    #[test]
    fn zero_digit_word_window() {
        // U = 0: members of [0,9) are exactly {0,2,6,8}
        let d = CantorDigits::zero(4);
        let got: Vec<i64> = (0..9).filter(|&i| d.contains(i)).collect();
        assert_eq!(got, vec![0, 2, 6, 8]);
        // and the base-3 {0,2}-digit oracle agrees on [0, 81)
        for i in 0..81i64 {
            let mut m = i;
            let mut ok = true;
            while m > 0 {
                if m % 3 == 1 {
                    ok = false;
                    break;
                }
                m /= 3;
            }
            assert_eq!(d.contains(i), ok, "i={i}");
        }
        // negative side with U = 0: -1 = ...222 is a member
        assert!(d.contains(-1));
        assert!(!d.contains(-2)); // ...2221 has digit 1
    }

    #[test]
    fn origin_always_member() {
        for seed in 0..50 {
            let mut rng = replicate_rng(90, seed);
            let d = CantorDigits::sample(6, &mut rng);
            assert!(d.contains(0));
        }
        for seed in 0..50 {
            let mut rng = replicate_rng(91, seed);
            let t = cantor_nested(6, &mut rng);
            assert!(t.contains(&0));
        }
    }

    #[test]
    fn nested_counts_and_span() {
        let mut rng = replicate_rng(92, 0);
        let t = cantor_nested(5, &mut rng);
        assert_eq!(t.len(), 32);
        let span = t.last().unwrap() - t.first().unwrap();
        assert_eq!(span, 3i64.pow(5) - 1); // 2 * sum 3^j = 3^5 - 1
        assert!(t.iter().all(|&x| x.abs() < 3i64.pow(5)));
    }

    #[test]
    fn digit_and_nested_agree_in_law() {
        // chi-square on the window pattern of Ψ ∩ [-4, 4] across both
        // constructions (9 cells -> 2^? patterns; group by bitmask)
        let reps = 4_000u64;
        let depth = 4u32;
        let mut counts: [std::collections::HashMap<u32, u64>; 2] = Default::default();
        for i in 0..reps {
            let mut rng = replicate_rng(93, i);
            let nested = cantor_nested(depth, &mut rng);
            let mask_nested: u32 = (-4..=4)
                .enumerate()
                .filter(|(_, x)| nested.binary_search(x).is_ok())
                .map(|(b, _)| 1 << b)
                .sum();
            *counts[0].entry(mask_nested).or_default() += 1;

            let mut rng = replicate_rng(94, i);
            let d = CantorDigits::sample(depth, &mut rng);
            let mask_digit: u32 =
                (-4..=4).enumerate().filter(|(_, x)| d.contains(*x)).map(|(b, _)| 1 << b).sum();
            *counts[1].entry(mask_digit).or_default() += 1;
        }
        // pooled chi-square over observed patterns
        let keys: std::collections::HashSet<u32> =
            counts[0].keys().chain(counts[1].keys()).copied().collect();
        let mut chi2 = 0.0;
        let mut dof = 0u32;
        for k in keys {
            let a = *counts[0].get(&k).unwrap_or(&0) as f64;
            let b = *counts[1].get(&k).unwrap_or(&0) as f64;
            let e = (a + b) / 2.0;
            if a + b >= 10.0 {
                chi2 += (a - e) * (a - e) / e + (b - e) * (b - e) / e;
                dof += 1;
            }
        }
        // dof is small (few patterns); 0.999 quantile of chi2_k is about
        // k + 3 sqrt(2k) + 6; be generous
        let bound = dof as f64 + 3.0 * (2.0 * dof as f64).sqrt() + 8.0;
        assert!(chi2 < bound, "chi2 {chi2} vs bound {bound} (dof {dof})");
    }

    #[test]
    fn window_sample_root_and_interior() {
        let sampler = gen_cantor(5, CantorConstruction::Nested).unwrap();
        let s = sampler.sample(0).unwrap();
        assert_eq!(s.coords_of(s.root()).unwrap()[0], 0.0);
        assert_eq!(s.interior_radius(s.root()), (3i64.pow(5) - 1) as f64);
    }
}
