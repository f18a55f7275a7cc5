use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

use super::EvalError;
use crate::Label;

// Lanczos approximation, g = 7, n = 9.
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + 7.5;
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Continued fraction for the incomplete beta function, evaluated with the
/// modified Lentz method.
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=1000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b
    }
}

/// Two-sided p-value of Student's t with `df` degrees of freedom:
/// `P(|T| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2)`.
pub fn student_t_two_sided_p(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    if t == 0.0 {
        return 1.0;
    }
    regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TTest {
    pub t: f64,
    pub p: f64,
    pub df: usize,
    pub mean_difference: f64,
}

/// Two-sided paired t-test on `a - b`.
///
/// All-zero differences give `t = 0, p = 1`. Constant nonzero differences
/// have zero variance; `t` saturates to `±inf` and `p` to 0.
pub fn paired_ttest(a: &[f64], b: &[f64]) -> Result<TTest, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::SequenceLength { a: a.len(), b: b.len() });
    }
    let n = a.len();
    if n < 2 {
        return Err(EvalError::TooFew { needed: 2, got: n });
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = super::mean(&diffs);
    let df = n - 1;
    if diffs.iter().all(|&d| d == 0.0) {
        return Ok(TTest { t: 0.0, p: 1.0, df, mean_difference: 0.0 });
    }
    let sd = super::sample_std(&diffs);
    let se = sd / (n as f64).sqrt();
    // relative to the mean, a spread this small is rounding noise
    let t = if se <= mean.abs() * 1e-12 { f64::INFINITY.copysign(mean) } else { mean / se };
    Ok(TTest { t, p: student_t_two_sided_p(t, df as f64), df, mean_difference: mean })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KappaReport {
    pub observed: f64,
    pub expected: f64,
    pub kappa: f64,
}

/// Cohen's kappa between two annotations of the same tokens.
pub fn cohen_kappa(a: &[Label], b: &[Label]) -> Result<KappaReport, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::SequenceLength { a: a.len(), b: b.len() });
    }
    if a.is_empty() {
        return Err(EvalError::TooFew { needed: 1, got: 0 });
    }
    let n = a.len() as f64;
    let agree = a.iter().zip(b).filter(|(x, y)| x == y).count();
    let observed = agree as f64 / n;
    let mut marginals: BTreeMap<Label, (usize, usize)> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        marginals.entry(x).or_default().0 += 1;
        marginals.entry(y).or_default().1 += 1;
    }
    let expected: f64 = marginals.values().map(|&(ca, cb)| (ca as f64 / n) * (cb as f64 / n)).sum();
    let kappa = if agree == a.len() { 1.0 } else { (observed - expected) / (1.0 - expected) };
    Ok(KappaReport { observed, expected, kappa })
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ContinuousCDF, StudentsT};

    fn labels(ts: &[&str]) -> Vec<Label> {
        ts.iter().map(|t| t.parse().unwrap()).collect()
    }

    #[test]
    fn ln_gamma_known_values() {
        assert!((ln_gamma(1.0)).abs() < 1e-14);
        assert!((ln_gamma(5.0) - 24f64.ln()).abs() < 1e-13);
        assert!((ln_gamma(0.5) - PI.sqrt().ln()).abs() < 1e-14);
    }

    #[test]
    fn t_p_values_match_statrs() {
        for df in [1.0, 2.0, 4.0, 9.0, 30.0, 200.0, 999.0] {
            let dist = StudentsT::new(0.0, 1.0, df).unwrap();
            for t in [0.01, 0.5, 1.0, 2.0, 2.776, 5.0, 24.6] {
                let expect = 2.0 * (1.0 - dist.cdf(t));
                let got = student_t_two_sided_p(t, df);
                // statrs' own cdf loses absolute accuracy near 1
                assert!((got - expect).abs() < 1e-10, "df={df} t={t}: {got} vs {expect}");
            }
        }
    }

    #[test]
    fn critical_value_gives_five_percent() {
        // t_{0.975, 4} = 2.776445
        assert!((student_t_two_sided_p(2.776_445_105, 4.0) - 0.05).abs() < 1e-8);
    }

    #[test]
    fn ttest_edge_cases() {
        let r = paired_ttest(&[0.1, 0.2], &[0.1, 0.2]).unwrap();
        assert_eq!((r.t, r.p), (0.0, 1.0));
        let r = paired_ttest(&[0.3, 0.4, 0.5], &[0.2, 0.3, 0.4]).unwrap();
        assert!(r.t.is_infinite() && r.p == 0.0);
        assert!(paired_ttest(&[0.1], &[0.2]).is_err());
        assert!(paired_ttest(&[0.1, 0.2], &[0.2]).is_err());
    }

    #[test]
    fn ttest_textbook_example() {
        // d = [.08,.09,.10,.09,.10], mean .092, sd .0083666, t = 24.588, df 4
        let r = paired_ttest(&[0.80, 0.82, 0.81, 0.83, 0.82], &[0.72, 0.73, 0.71, 0.74, 0.72]).unwrap();
        assert!((r.t - 24.588).abs() < 1e-2);
        assert!(r.p < 0.05);
        assert!(r.p > 1e-6 && r.p < 1e-4);
    }

    #[test]
    fn kappa_examples() {
        let a = labels(&["O", "B-PER", "I-PER", "O"]);
        assert_eq!(cohen_kappa(&a, &a).unwrap().kappa, 1.0);
        let k = cohen_kappa(&labels(&["O", "O", "B-PER", "O"]), &labels(&["O", "O", "O", "O"])).unwrap();
        assert_eq!(k.observed, 0.75);
        assert_eq!(k.expected, 0.75);
        assert!(k.kappa.abs() < 1e-12);
        assert!(cohen_kappa(&a, &a[..2]).is_err());
        assert!(cohen_kappa(&[], &[]).is_err());
    }

    #[test]
    fn kappa_of_constant_identical_annotations() {
        let a = labels(&["O", "O", "O"]);
        assert_eq!(cohen_kappa(&a, &a).unwrap().kappa, 1.0);
    }
}
