//! Even Bernoulli numbers B_2k as exact rationals, computed once per process.
//!
//! The values come from the tangent numbers T_k (integer recurrence, no
//! cancellation) through B_2k = (−1)^(k−1)·2k·T_k / (4^k·(4^k − 1)).

use std::sync::{Arc, RwLock};

use rug::{Float, Integer};

/// B_2k = num/den for k = 1..len.
#[derive(Debug, Default)]
struct Table {
    num: Vec<Integer>,
    den: Vec<Integer>,
}

static CACHE: RwLock<Option<Arc<Table>>> = RwLock::new(None);

/// Tangent numbers T_1..T_n.
fn tangent_numbers(n: usize) -> Vec<Integer> {
    let mut t: Vec<Integer> = vec![Integer::new(); n + 1];
    if n == 0 {
        return Vec::new();
    }
    t[1] = Integer::from(1);
    for k in 2..=n {
        let prev = Integer::from(&t[k - 1] * (k as u64 - 1));
        t[k] = prev;
    }
    for k in 2..=n {
        for j in k..=n {
            let a = Integer::from(&t[j - 1] * (j - k) as u64);
            let b = Integer::from(&t[j] * (j - k + 2) as u64);
            t[j] = a + b;
        }
    }
    t.remove(0);
    t
}

fn build(n: usize) -> Table {
    let tangents = tangent_numbers(n);
    let mut table = Table::default();
    for (idx, tk) in tangents.into_iter().enumerate() {
        let k = idx as u32 + 1;
        let four_k = Integer::from(1) << (2 * k);
        let den = Integer::from(&four_k - 1u32) * four_k;
        let mut num = tk * (2 * k);
        if k.is_multiple_of(2) {
            num = -num;
        }
        table.num.push(num);
        table.den.push(den);
    }
    table
}

fn table_with(k_max: usize) -> Arc<Table> {
    if let Some(t) = CACHE.read().expect("bernoulli cache poisoned").as_ref() {
        if t.num.len() >= k_max {
            return Arc::clone(t);
        }
    }
    let mut guard = CACHE.write().expect("bernoulli cache poisoned");
    if let Some(t) = guard.as_ref() {
        if t.num.len() >= k_max {
            return Arc::clone(t);
        }
    }
    let current = guard.as_ref().map_or(0, |t| t.num.len());
    let target = k_max.max(2 * current).max(64);
    let table = Arc::new(build(target));
    *guard = Some(Arc::clone(&table));
    table
}

/// B_2k rounded to `bits`, k ≥ 1.
pub fn bernoulli_even(k: usize, bits: u32) -> Float {
    assert!(k >= 1);
    let table = table_with(k);
    let num = Float::with_val(bits, &table.num[k - 1]);
    num / Float::with_val(bits, &table.den[k - 1])
}

/// Exact numerator and denominator of B_2k (not necessarily reduced).
pub fn bernoulli_even_exact(k: usize) -> (Integer, Integer) {
    let table = table_with(k);
    (table.num[k - 1].clone(), table.den[k - 1].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::Rational;

    #[test]
    fn tangent_prefix() {
        let t = tangent_numbers(5);
        let expect = [1u64, 2, 16, 272, 7936];
        for (a, b) in t.iter().zip(expect) {
            assert_eq!(*a, b);
        }
    }

    #[test]
    fn small_bernoulli_values() {
        let want = [(1, 6), (-1, 30), (1, 42), (-1, 30), (5, 66), (-691, 2730), (7, 6)];
        for (k, (n, d)) in want.into_iter().enumerate() {
            let (num, den) = bernoulli_even_exact(k + 1);
            assert_eq!(Rational::from((num, den)), Rational::from((n, d)), "k = {}", k + 1);
        }
    }

    #[test]
    fn float_view_matches_exact() {
        let b = bernoulli_even(10, 200);
        // B_20 = −174611/330
        let expect = Float::with_val(200, -174611) / 330;
        assert_eq!(b, expect);
    }
}
