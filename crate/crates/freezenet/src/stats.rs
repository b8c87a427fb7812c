//! Rank statistics: Mann-Whitney U and Holm-Bonferroni correction.

use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("{0}")]
    Domain(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MannWhitney {
    /// U statistic of the first sample.
    pub u_first: f64,
    /// The smaller of the two U statistics.
    pub u: f64,
    /// Two-tailed p-value from the tie-corrected normal approximation
    /// with continuity correction.
    pub p_value: f64,
}

/// Ranks of the pooled sample, average-ranked over ties. Returns the
/// rank sums of each group and the tie correction term sum(t^3 - t).
fn rank_sums(first: &[f64], second: &[f64]) -> (f64, f64, f64) {
    let mut pooled: Vec<(f64, usize)> = first
        .iter()
        .map(|&v| (v, 0))
        .chain(second.iter().map(|&v| (v, 1)))
        .collect();
    pooled.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("NaN in rank test input"));
    let mut sums = [0.0f64; 2];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i;
        while j < pooled.len() && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        // 1-based ranks i+1..=j share the average rank.
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        for item in &pooled[i..j] {
            sums[item.1] += avg_rank;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    (sums[0], sums[1], tie_term)
}

/// Two-tailed Mann-Whitney U test via the normal approximation with tie
/// correction and continuity correction.
pub fn mann_whitney_u(first: &[f64], second: &[f64]) -> Result<MannWhitney, StatsError> {
    let (n1, n2) = (first.len() as f64, second.len() as f64);
    if first.is_empty() || second.is_empty() {
        return Err(StatsError::Domain("both samples must be nonempty".into()));
    }
    if first.iter().chain(second).any(|v| v.is_nan()) {
        return Err(StatsError::Domain("samples contain NaN".into()));
    }
    let (r1, _r2, tie_term) = rank_sums(first, second);
    let u1 = r1 - n1 * (n1 + 1.0) / 2.0;
    let u2 = n1 * n2 - u1;
    let u = u1.min(u2);
    let total = n1 + n2;
    let mean = n1 * n2 / 2.0;
    let variance = n1 * n2 / 12.0 * ((total + 1.0) - tie_term / (total * (total - 1.0)));
    if variance <= 0.0 {
        // Every value tied: no evidence either way.
        return Ok(MannWhitney {
            u_first: u1,
            u,
            p_value: 1.0,
        });
    }
    let z = (u - mean + 0.5) / variance.sqrt();
    let normal = Normal::new(0.0, 1.0).unwrap();
    let p_value = (2.0 * normal.cdf(z)).min(1.0);
    Ok(MannWhitney {
        u_first: u1,
        u,
        p_value,
    })
}

/// Holm-Bonferroni step-down adjustment. Returns adjusted p-values in
/// the input order, clipped to 1.
pub fn holm_bonferroni(p_values: &[f64]) -> Vec<f64> {
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        p_values[a]
            .partial_cmp(&p_values[b])
            .expect("NaN p-value in correction")
    });
    let mut adjusted = vec![0.0; m];
    let mut running_max = 0.0f64;
    for (rank, &idx) in order.iter().enumerate() {
        let scaled = ((m - rank) as f64 * p_values[idx]).min(1.0);
        running_max = running_max.max(scaled);
        adjusted[idx] = running_max;
    }
    adjusted
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn u_statistic_for_fully_separated_pairs() {
        let r = mann_whitney_u(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!(r.u_first, 0.0);
        assert_eq!(r.u, 0.0);
    }

    /// p-values frozen from an independent statistics package
    /// (asymptotic two-sided with continuity correction).
    #[test]
    fn p_values_match_reference_implementation() {
        let cases: [(&[f64], &[f64], f64, f64); 4] = [
            (&[1.0, 2.0], &[3.0, 4.0], 0.0, 0.245278116807),
            (
                &[1.0, 2.0, 3.0, 4.0, 5.0],
                &[6.0, 7.0, 8.0, 9.0, 10.0],
                0.0,
                0.0121857803553,
            ),
            (
                &[2.9, 3.0, 2.5, 2.6, 3.2, 2.8],
                &[3.8, 3.7, 3.9, 4.0, 4.2],
                0.0,
                0.00811311726557,
            ),
            (
                &[1.0, 2.0, 2.0, 3.0, 4.0, 5.0, 5.0],
                &[2.0, 3.0, 3.0, 4.0, 5.0, 6.0, 6.0],
                15.5,
                0.269942494447,
            ),
        ];
        for (x, y, u1, p) in cases {
            let r = mann_whitney_u(x, y).unwrap();
            assert!(close(r.u_first, u1), "U1 {} vs {u1}", r.u_first);
            assert!(close(r.p_value, p), "p {} vs {p}", r.p_value);
        }
    }

    #[test]
    fn handles_ties_with_correction() {
        let r = mann_whitney_u(
            &[0.1, 0.2, 0.3, 0.35, 0.5, 0.12, 0.25, 0.44],
            &[0.15, 0.22, 0.3, 0.4, 0.6],
        )
        .unwrap();
        assert!(close(r.u_first, 16.5));
        assert!(close(r.p_value, 0.660111293604));
    }

    #[test]
    fn all_tied_samples_give_p_one() {
        let r = mann_whitney_u(&[1.0, 1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn rejects_empty_and_nan() {
        assert!(mann_whitney_u(&[], &[1.0]).is_err());
        assert!(mann_whitney_u(&[f64::NAN], &[1.0]).is_err());
    }

    /// Adjusted values frozen from an independent implementation.
    #[test]
    fn holm_matches_reference_implementation() {
        let adj = holm_bonferroni(&[0.01, 0.04, 0.03, 0.005]);
        let expect = [0.03, 0.06, 0.06, 0.02];
        for (a, e) in adj.iter().zip(expect) {
            assert!(close(*a, e), "{a} vs {e}");
        }
        let adj = holm_bonferroni(&[0.6, 0.02, 0.02, 0.001, 0.2]);
        let expect = [0.6, 0.08, 0.08, 0.005, 0.4];
        for (a, e) in adj.iter().zip(expect) {
            assert!(close(*a, e), "{a} vs {e}");
        }
    }

    #[test]
    fn holm_is_monotone_and_clipped() {
        let adj = holm_bonferroni(&[0.9, 0.8, 0.5]);
        assert!(adj.iter().all(|&p| p <= 1.0));
        let mut pairs: Vec<(f64, f64)> = [0.9, 0.8, 0.5].iter().cloned().zip(adj).collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        assert!(pairs.windows(2).all(|w| w[0].1 <= w[1].1));
    }
}
