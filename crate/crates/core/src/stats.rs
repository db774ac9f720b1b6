//! Reading-span scoring and independent-samples t-tests.

use alloc::string::String;

use libm::{exp, fabs, lgamma, log, sqrt};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("set {set}: recalled {recalled} of {presented} letters (sets hold 2-5 letters)")]
    InconsistentCounts { set: usize, presented: u32, recalled: u32 },
    #[error("empty recall log")]
    EmptyLog,
    #[error("each group needs at least 2 values with nonzero pooled variance")]
    DegenerateVariance,
}

/// Letters shown and letters recalled in serial order for one sentence set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SetRecall {
    pub presented: u32,
    pub recalled_in_order: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RspanResult {
    pub participant_id: String,
    pub letters_presented: u32,
    pub letters_recalled_in_order: u32,
    pub score: f64,
}

/// Pooled WMC score: letters recalled in order over letters presented.
pub fn rspan_score(participant_id: &str, log: &[SetRecall]) -> Result<RspanResult, StatsError> {
    if log.is_empty() {
        return Err(StatsError::EmptyLog);
    }
    let (mut presented, mut recalled) = (0u32, 0u32);
    for (i, s) in log.iter().enumerate() {
        if !(2..=5).contains(&s.presented) || s.recalled_in_order > s.presented {
            return Err(StatsError::InconsistentCounts {
                set: i,
                presented: s.presented,
                recalled: s.recalled_in_order,
            });
        }
        presented += s.presented;
        recalled += s.recalled_in_order;
    }
    Ok(RspanResult {
        participant_id: participant_id.into(),
        letters_presented: presented,
        letters_recalled_in_order: recalled,
        score: recalled as f64 / presented as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TVariant {
    #[default]
    Pooled,
    Welch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tail {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    /// Upper-tail probability P(T >= |t|).
    pub p_one_tailed: f64,
    pub p_two_tailed: f64,
}

impl TTest {
    pub fn p(&self, tail: Tail) -> f64 {
        match tail {
            Tail::One => self.p_one_tailed,
            Tail::Two => self.p_two_tailed,
        }
    }
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0);
    (m, v)
}

/// Independent two-sample t-test of `a` against `b` (t > 0 when mean(a) > mean(b)).
pub fn independent_t_test(a: &[f64], b: &[f64], variant: TVariant) -> Result<TTest, StatsError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(StatsError::DegenerateVariance);
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (se, df) = match variant {
        TVariant::Pooled => {
            let df = na + nb - 2.0;
            let sp2 = ((na - 1.0) * va + (nb - 1.0) * vb) / df;
            (sqrt(sp2 * (1.0 / na + 1.0 / nb)), df)
        }
        TVariant::Welch => {
            let (qa, qb) = (va / na, vb / nb);
            let df = (qa + qb) * (qa + qb) / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
            (sqrt(qa + qb), df)
        }
    };
    if !(se > 0.0) || !df.is_finite() {
        return Err(StatsError::DegenerateVariance);
    }
    let t = (ma - mb) / se;
    let upper = student_t_sf(fabs(t), df);
    Ok(TTest { t, df, p_one_tailed: upper, p_two_tailed: (2.0 * upper).min(1.0) })
}

/// Survival function P(T > t) of Student's t with `df` degrees of freedom.
pub fn student_t_sf(t: f64, df: f64) -> f64 {
    let x = df / (df + t * t);
    let tail = 0.5 * regularized_incomplete_beta(0.5 * df, 0.5, x);
    if t >= 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

/// Student's t CDF.
pub fn student_t_cdf(t: f64, df: f64) -> f64 {
    1.0 - student_t_sf(t, df)
}

/// Regularized incomplete beta I_x(a, b) via Lentz's continued fraction.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = lgamma(a + b) - lgamma(a) - lgamma(b) + a * log(x) + b * log(1.0 - x);
    let front = exp(ln_front);
    // The continued fraction converges fast for x < (a+1)/(a+b+2).
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-15;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if fabs(d) < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=300 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if fabs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if fabs(del - 1.0) < EPS {
            break;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sets(p: u32, r: u32) -> SetRecall {
        SetRecall { presented: p, recalled_in_order: r }
    }

    #[test]
    fn rspan_basic() {
        let r = rspan_score("x", &[sets(2, 1), sets(3, 2)]).unwrap();
        assert_eq!(r.score, 0.6);
        let r = rspan_score("x", &[sets(4, 4), sets(5, 5)]).unwrap();
        assert_eq!(r.score, 1.0);
    }

    #[test]
    fn rspan_rejects_inconsistent() {
        assert!(matches!(rspan_score("x", &[sets(3, 4)]), Err(StatsError::InconsistentCounts { set: 0, .. })));
        assert!(matches!(rspan_score("x", &[sets(2, 1), sets(7, 1)]), Err(StatsError::InconsistentCounts { set: 1, .. })));
        assert_eq!(rspan_score("x", &[]), Err(StatsError::EmptyLog));
    }

    #[test]
    fn incomplete_beta_known_values() {
        // I_x(1,1) = x; I_x(a,1) = x^a; I_0.5(a,a) = 0.5
        assert!((regularized_incomplete_beta(1.0, 1.0, 0.3) - 0.3).abs() < 1e-14);
        assert!((regularized_incomplete_beta(3.0, 1.0, 0.4) - 0.064).abs() < 1e-14);
        assert!((regularized_incomplete_beta(6.0, 6.0, 0.5) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn t_cdf_symmetry_and_reference() {
        assert!((student_t_cdf(0.0, 12.0) - 0.5).abs() < 1e-15);
        assert!((student_t_cdf(1.3, 7.0) + student_t_cdf(-1.3, 7.0) - 1.0).abs() < 1e-14);
        // df = 1 is Cauchy: F(t) = 1/2 + atan(t)/pi
        let cauchy = 0.5 + libm::atan(2.0) / core::f64::consts::PI;
        assert!((student_t_cdf(2.0, 1.0) - cauchy).abs() < 1e-12);
        // df = 2 has F(t) = 1/2 + t / (2 sqrt(2 + t^2))
        let t = 1.7;
        assert!((student_t_cdf(t, 2.0) - (0.5 + t / (2.0 * libm::sqrt(2.0 + t * t)))).abs() < 1e-12);
    }

    #[test]
    fn identical_groups() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let r = independent_t_test(&a, &a, TVariant::Pooled).unwrap();
        assert_eq!(r.t, 0.0);
        assert!((r.p_two_tailed - 1.0).abs() < 1e-12);
    }

    #[test]
    fn extreme_separation() {
        let a = [0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0];
        let b: alloc::vec::Vec<f64> = a.iter().map(|v| v + 10.0 * 0.8164965809277261).collect();
        let r = independent_t_test(&b, &a, TVariant::Pooled).unwrap();
        assert!(r.p_two_tailed < 1e-6);
    }

    #[test]
    fn degenerate() {
        assert_eq!(independent_t_test(&[1.0], &[1.0, 2.0], TVariant::Pooled), Err(StatsError::DegenerateVariance));
        assert_eq!(independent_t_test(&[1.0, 1.0], &[2.0, 2.0], TVariant::Welch), Err(StatsError::DegenerateVariance));
    }
}
