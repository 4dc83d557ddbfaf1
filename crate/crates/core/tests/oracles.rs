//! Brute-force and statistical cross-checks of the combinatorial layer.

use std::collections::{BTreeMap, BTreeSet};

use holosense::allocation::{allocate, DesignParams};
use holosense::arrangement::{
    enumerate_arrangements, enumerate_arrangements_with, sample_arrangements,
    sample_arrangements_with, Arrangement, BlockRule, SamplerOptions,
};
use holosense::mse::{delta, profile};
use holosense::spectrum::{Spectrum, SpectrumModel};

fn combinations(dim: usize, m: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, dim: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for j in start..dim {
            cur.push(j);
            rec(j + 1, dim, m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, dim, m, &mut Vec::new(), &mut out);
    out
}

/// Every multiset (or set) of `n` blocks whose multiplicity vector is `s`.
fn brute_force(s: &[usize], n: usize, m: usize, rule: BlockRule) -> BTreeSet<Arrangement> {
    let blocks = combinations(s.len(), m);
    let mut out = BTreeSet::new();
    let mut idx = vec![0usize; n];
    loop {
        let ok = idx.windows(2).all(|w| match rule {
            BlockRule::Distinct => w[0] < w[1],
            BlockRule::Repeated => w[0] <= w[1],
        });
        if ok {
            let chosen: Vec<Vec<usize>> = idx.iter().map(|&i| blocks[i].clone()).collect();
            let a = Arrangement::new(s.len(), chosen).unwrap();
            if a.multiplicity() == s {
                out.insert(a);
            }
        }
        let mut k = n;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < blocks.len() {
                idx[k + 1..].fill(0);
                break;
            }
        }
    }
}

#[test]
fn enumeration_matches_brute_force() {
    let cases: &[(&[usize], usize, usize)] = &[
        (&[1, 1, 1, 1], 2, 2),
        (&[2, 2, 1, 1], 3, 2),
        (&[2, 2, 2, 2], 4, 2),
        (&[3, 2, 2, 1, 1, 0], 3, 3),
        (&[2, 2, 2, 1, 1, 1], 3, 3),
        (&[3, 3, 2, 2, 1, 1], 4, 3),
        (&[2, 1, 1, 1, 1, 0, 0], 3, 2),
        (&[1, 1, 1, 1, 1, 1], 3, 2),
        (&[3, 1, 1, 1], 3, 2),
    ];
    for &(s, n, m) in cases {
        for rule in [BlockRule::Distinct, BlockRule::Repeated] {
            let got: Vec<Arrangement> = enumerate_arrangements_with(s, n, m, rule)
                .unwrap()
                .collect();
            let set: BTreeSet<Arrangement> = got.iter().cloned().collect();
            assert_eq!(set.len(), got.len(), "duplicates for {s:?} {rule:?}");
            assert_eq!(
                set,
                brute_force(s, n, m, rule),
                "{s:?} n={n} m={m} {rule:?}"
            );
        }
    }
}

#[test]
fn section_example_counts() {
    let spectrum = Spectrum::build(&SpectrumModel::exponential(0.8, 8)).unwrap();
    let a = allocate(&spectrum, &DesignParams::new(8, 4, 5, 0.5).unwrap()).unwrap();
    assert_eq!(enumerate_arrangements(&a.s, 5, 4).unwrap().count(), 3770);
    let repeated = enumerate_arrangements_with(&a.s, 5, 4, BlockRule::Repeated)
        .unwrap()
        .count();
    assert_eq!(repeated, 4100);
}

#[test]
fn full_set_delta_is_shared() {
    let spectrum = Spectrum::build(&SpectrumModel::exponential(0.8, 8)).unwrap();
    let a = allocate(&spectrum, &DesignParams::new(8, 4, 5, 0.5).unwrap()).unwrap();
    let all: Vec<usize> = (0..5).collect();
    for arr in enumerate_arrangements(&a.s, 5, 4).unwrap().step_by(37) {
        let d = delta(&spectrum, 0.5, &arr, &all).unwrap();
        assert!((d - a.max_delta).abs() < 1e-12);
        let p = profile(&spectrum, 0.5, &arr).unwrap();
        assert!(p.levels[5].delta_var.abs() < 1e-20);
    }
}

#[test]
fn sampled_arrangements_are_valid_and_distinct() {
    let spectrum = Spectrum::build(&SpectrumModel::exponential(0.8, 8)).unwrap();
    let a = allocate(&spectrum, &DesignParams::new(8, 4, 5, 0.5).unwrap()).unwrap();
    let all: BTreeSet<Arrangement> = enumerate_arrangements(&a.s, 5, 4).unwrap().collect();
    let sample = sample_arrangements(&a.s, 5, 4, 300, 2).unwrap();
    assert_eq!(sample.len(), 300);
    let ids: BTreeSet<String> = sample.iter().map(Arrangement::id).collect();
    assert_eq!(ids.len(), 300);
    assert!(sample.iter().all(|x| all.contains(x)));
}

/// Pearson statistic against the uniform law on `support`.
fn chi_square(counts: &BTreeMap<Arrangement, usize>, support: usize, draws: usize) -> f64 {
    assert_eq!(counts.len(), support, "some arrangements never drawn");
    let e = draws as f64 / support as f64;
    counts.values().map(|&c| (c as f64 - e).powi(2) / e).sum()
}

fn draw(
    s: &[usize],
    n: usize,
    m: usize,
    draws: usize,
    opts: SamplerOptions,
) -> BTreeMap<Arrangement, usize> {
    let mut counts = BTreeMap::new();
    for seed in 0..draws as u64 {
        let a = sample_arrangements_with(s, n, m, 1, seed, opts).unwrap();
        *counts.entry(a[0].clone()).or_insert(0) += 1;
    }
    counts
}

#[test]
fn sampler_is_uniform_on_three_pairings() {
    let draws = 10_000;
    let counts = draw(&[1, 1, 1, 1], 2, 2, draws, SamplerOptions::default());
    assert_eq!(counts.len(), 3);
    for &c in counts.values() {
        let f = c as f64 / draws as f64;
        assert!((f - 1.0 / 3.0).abs() < 0.05 / 3.0, "frequency {f}");
    }
    // 0.999 quantile of chi-square with 2 degrees of freedom.
    assert!(chi_square(&counts, 3, draws) < 13.82);
}

#[test]
fn sampler_is_uniform_with_repeat_clearing() {
    let s = [3, 2, 2, 1, 1, 1];
    let support = enumerate_arrangements(&s, 5, 2).unwrap().count();
    assert!(support > 5);
    let draws = 300 * support;
    let counts = draw(&s, 5, 2, draws, SamplerOptions::default());
    let k = (support - 1) as f64;
    // Wilson-Hilferty 0.999 quantile.
    let q = k * (1.0 - 2.0 / (9.0 * k) + 3.09 * (2.0 / (9.0 * k)).sqrt()).powi(3);
    let stat = chi_square(&counts, support, draws);
    assert!(stat < q, "chi-square {stat} over {q}");
}

#[test]
fn sampler_is_uniform_over_multisets() {
    let s = [2, 2, 1, 1];
    let support = enumerate_arrangements_with(&s, 3, 2, BlockRule::Repeated)
        .unwrap()
        .count();
    assert!(support > 2);
    let draws = 500 * support;
    let opts = SamplerOptions {
        rule: BlockRule::Repeated,
        ..SamplerOptions::default()
    };
    let counts = draw(&s, 3, 2, draws, opts);
    let k = (support - 1) as f64;
    let q = k * (1.0 - 2.0 / (9.0 * k) + 3.09 * (2.0 / (9.0 * k)).sqrt()).powi(3);
    let stat = chi_square(&counts, support, draws);
    assert!(stat < q, "chi-square {stat} over {q}");
}
