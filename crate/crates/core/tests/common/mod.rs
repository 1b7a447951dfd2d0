#![allow(dead_code)]

use flowlab::experiments::partition_oracle;
use flowlab::gadgets::{normalize_instance, PartitionInstance};
use flowlab::Rational;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn q(s: &str) -> Rational {
    s.parse().unwrap()
}

pub fn instance(values: &[i64]) -> PartitionInstance {
    let raw: Vec<Rational> = values.iter().map(|&v| Rational::from_integer(v)).collect();
    normalize_instance(&raw).unwrap()
}

/// Any positive instance of length `n`; a third of the entries are fractions.
pub fn random_instance(rng: &mut ChaCha8Rng, n: usize) -> PartitionInstance {
    let raw: Vec<Rational> = (0..n)
        .map(|_| {
            let p = rng.random_range(1..=40);
            let d = if rng.random_bool(1.0 / 3.0) { rng.random_range(2..=4) } else { 1 };
            Rational::frac(p, d)
        })
        .collect();
    normalize_instance(&raw).unwrap()
}

/// A yes-instance: random entries split into two groups, plus their difference.
pub fn planted_yes(rng: &mut ChaCha8Rng, n: usize) -> PartitionInstance {
    assert!(n >= 2);
    loop {
        let mut vals: Vec<i64> = (0..n - 1).map(|_| rng.random_range(1..=20)).collect();
        let mut diff = 0i64;
        for v in &vals {
            if rng.random_bool(0.5) {
                diff += v;
            } else {
                diff -= v;
            }
        }
        if diff == 0 {
            continue;
        }
        vals.push(diff.abs());
        vals.shuffle(rng);
        return instance(&vals);
    }
}

/// A no-instance by rejection sampling against the oracle.
pub fn random_no(rng: &mut ChaCha8Rng, n: usize) -> PartitionInstance {
    loop {
        let vals: Vec<i64> = (0..n).map(|_| rng.random_range(1..=20)).collect();
        let inst = instance(&vals);
        if partition_oracle(&inst).unwrap().is_none() {
            return inst;
        }
    }
}

/// `count` instances with `n` in `min_n..=max_n`: half planted yes, half oracle-rejected.
pub fn mixed_corpus(seed: u64, count: usize, min_n: usize, max_n: usize) -> Vec<PartitionInstance> {
    let mut r = rng(seed);
    (0..count)
        .map(|i| {
            let n = r.random_range(min_n.max(2)..=max_n);
            if i % 2 == 0 {
                planted_yes(&mut r, n)
            } else {
                random_no(&mut r, n)
            }
        })
        .collect()
}
