//! Two-sample t-tests, bootstrap intervals and correlations.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};
use crate::rng;

/// Mean as `x0 + sum(x - x0) / n`, exact on constant samples.
pub fn mean(xs: &[f64]) -> f64 {
    let Some(&x0) = xs.first() else {
        return f64::NAN;
    };
    x0 + xs.iter().map(|x| x - x0).sum::<f64>() / xs.len() as f64
}

fn sum_sq_dev(xs: &[f64], m: f64) -> f64 {
    xs.iter().map(|x| (x - m) * (x - m)).sum()
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    sum_sq_dev(xs, mean(xs)) / (xs.len() as f64 - 1.0)
}

/// CDF of Student's t with `df` degrees of freedom.
pub fn student_t_cdf(t: f64, df: f64) -> f64 {
    let tail = 0.5 * beta_reg(df / 2.0, 0.5, df / (df + t * t));
    if t >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t: f64,
    pub df: u64,
    pub p_two_sided: f64,
}

/// Student's two-sample t-test with pooled variance.
pub fn t_test_pooled(a: &[f64], b: &[f64]) -> Result<TTestResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "t-test needs at least 2 values per group, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, mb) = (mean(a), mean(b));
    let df = a.len() + b.len() - 2;
    let pooled = (sum_sq_dev(a, ma) + sum_sq_dev(b, mb)) / df as f64;
    if !(pooled > 0.0) {
        return Err(Error::DegenerateVariance("pooled variance is zero"));
    }
    let t = (ma - mb) / (pooled * (1.0 / na + 1.0 / nb)).sqrt();
    let p = beta_reg(df as f64 / 2.0, 0.5, df as f64 / (df as f64 + t * t));
    Ok(TTestResult {
        t,
        df: df as u64,
        p_two_sided: p.clamp(0.0, 1.0),
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Statistic {
    #[default]
    Mean,
}

/// Type-7 quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let (a, b) = (sorted[lo], sorted[hi]);
    if a == b {
        a
    } else {
        a + (h - lo as f64) * (b - a)
    }
}

/// Percentile 95% interval of the statistic over seeded resamples.
///
/// Resample `i` draws from the stream `(seed, "bootstrap", i)`.
pub fn bootstrap_ci(sample: &[f64], statistic: Statistic, resamples: usize, seed: u64) -> Result<(f64, f64)> {
    if sample.is_empty() {
        return Err(Error::InvalidInput("bootstrap of an empty sample".into()));
    }
    if resamples == 0 {
        return Err(Error::InvalidInput("bootstrap needs at least one resample".into()));
    }
    let n = sample.len();
    let mut stats: Vec<f64> = (0..resamples as u64)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, "bootstrap", i);
            let draw: Vec<f64> = (0..n).map(|_| sample[r.gen_range(0..n)]).collect();
            match statistic {
                Statistic::Mean => mean(&draw),
            }
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    Ok((quantile_sorted(&stats, 0.025), quantile_sorted(&stats, 0.975)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CorrelationKind {
    Pearson,
    Spearman,
}

/// Ranks starting at 1, ties sharing their average rank.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
    let mut ranks = vec![0.0; xs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && xs[order[end]] == xs[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = rank;
        }
        start = end;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let (mx, my) = (mean(x), mean(y));
    let sxx = sum_sq_dev(x, mx);
    let syy = sum_sq_dev(y, my);
    if !(sxx > 0.0) || !(syy > 0.0) {
        return Err(Error::DegenerateVariance("correlation of a constant variable"));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

pub fn correlation(x: &[f64], y: &[f64], kind: CorrelationKind) -> Result<f64> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "correlation needs two samples of equal length >= 3, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    match kind {
        CorrelationKind::Pearson => pearson(x, y),
        CorrelationKind::Spearman => pearson(&average_ranks(x), &average_ranks(y)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn textbook_pooled_t() {
        // Means 2 and 3, pooled variance 1, standard error sqrt(2/3).
        let r = t_test_pooled(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0]).unwrap();
        assert!((r.t - (-1.0 / (2.0f64 / 3.0).sqrt())).abs() < 1e-12);
        assert!((r.t + 1.224744871).abs() < 1e-6);
        assert_eq!(r.df, 4);
        let swapped = t_test_pooled(&[2.0, 3.0, 4.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(swapped.t, -r.t);
        assert_eq!(swapped.p_two_sided, r.p_two_sided);
    }

    #[test]
    fn identical_samples_give_t_zero_p_one() {
        let r = t_test_pooled(&[1.0, 5.0, 2.0], &[1.0, 5.0, 2.0]).unwrap();
        assert_eq!(r.t, 0.0);
        assert_eq!(r.p_two_sided, 1.0);
    }

    #[test]
    fn zero_variance_is_degenerate() {
        assert!(matches!(
            t_test_pooled(&[2.0, 2.0], &[2.0, 2.0]),
            Err(Error::DegenerateVariance(_))
        ));
        assert!(t_test_pooled(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn t_cdf_matches_tabulated_critical_values() {
        for (t, df, q) in [
            (2.228138852, 10.0, 0.975),
            (4.604094871, 4.0, 0.995),
            (12.7062047, 1.0, 0.975),
            (1.724718243, 20.0, 0.95),
        ] {
            assert!((student_t_cdf(t, df) - q).abs() < 1e-8, "t={t} df={df}");
            assert!((student_t_cdf(-t, df) - (1.0 - q)).abs() < 1e-8);
        }
    }

    #[test]
    fn p_value_at_critical_t_is_five_percent() {
        // Groups of 6 give df = 10; shift the second until t hits the critical value.
        let a = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let sd = (variance(&a) * (2.0 / 6.0)).sqrt();
        let shift = 2.228138852 * sd;
        let b: Vec<f64> = a.iter().map(|x| x + shift).collect();
        let r = t_test_pooled(&b, &a).unwrap();
        assert!((r.p_two_sided - 0.05).abs() < 1e-8);
    }

    #[test]
    fn constant_sample_ci_collapses() {
        let s = vec![0.7; 25];
        assert_eq!(bootstrap_ci(&s, Statistic::Mean, 200, 3).unwrap(), (0.7, 0.7));
        assert_eq!(mean(&s), 0.7);
    }

    #[test]
    fn bootstrap_is_seeded() {
        let s: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin()).collect();
        let a = bootstrap_ci(&s, Statistic::Mean, 300, 9).unwrap();
        assert_eq!(a, bootstrap_ci(&s, Statistic::Mean, 300, 9).unwrap());
        assert_ne!(a, bootstrap_ci(&s, Statistic::Mean, 300, 10).unwrap());
        assert!(a.0 < mean(&s) && mean(&s) < a.1);
    }

    #[test]
    fn correlation_reference_values() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        assert!((correlation(&x, &y, CorrelationKind::Pearson).unwrap() - 1.0).abs() < 1e-15);
        let rev: Vec<f64> = x.iter().rev().copied().collect();
        assert_eq!(correlation(&x, &rev, CorrelationKind::Spearman).unwrap(), -1.0);
        let s = correlation(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0], CorrelationKind::Spearman).unwrap();
        assert!((s - 0.5).abs() < 1e-15);
        assert!(correlation(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0], CorrelationKind::Pearson).is_err());
        assert!(correlation(&[1.0, 2.0], &[1.0, 2.0], CorrelationKind::Pearson).is_err());
    }

    #[test]
    fn ties_share_ranks() {
        assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    proptest! {
        #[test]
        fn t_is_affine_invariant(
            a in prop::collection::vec(-50.0f64..50.0, 3..12),
            b in prop::collection::vec(-50.0f64..50.0, 3..12),
            scale in 0.1f64..10.0,
            shift in -100.0f64..100.0,
        ) {
            let r = t_test_pooled(&a, &b);
            prop_assume!(r.is_ok());
            let r = r.unwrap();
            let ta: Vec<f64> = a.iter().map(|x| scale * x + shift).collect();
            let tb: Vec<f64> = b.iter().map(|x| scale * x + shift).collect();
            let s = t_test_pooled(&ta, &tb).unwrap();
            prop_assert!((r.t - s.t).abs() < 1e-8 * (1.0 + r.t.abs()));
            prop_assert!((0.0..=1.0).contains(&r.p_two_sided));
        }

        #[test]
        fn spearman_is_monotone_invariant(
            pairs in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..20),
        ) {
            let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let r = correlation(&x, &y, CorrelationKind::Spearman);
            prop_assume!(r.is_ok());
            let ex: Vec<f64> = x.iter().map(|v| v.exp()).collect();
            let cy: Vec<f64> = y.iter().map(|v| v * v * v + v).collect();
            let s = correlation(&ex, &cy, CorrelationKind::Spearman).unwrap();
            prop_assert!((r.unwrap() - s).abs() < 1e-12);
        }
    }
}
