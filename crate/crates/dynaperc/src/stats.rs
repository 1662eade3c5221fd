//! Small statistics helpers shared by estimators and experiment drivers.

/// Mean and standard error of the mean (ddof = 1).
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    assert!(n >= 2, "need at least two samples");
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Weighted least squares line fit `y = a + b x`.
///
/// Weights are inverse variances. Returns `(slope, intercept, slope_se)`.
/// When every weight is 1 the slope error falls back to the residual-based
/// OLS estimate; otherwise the known-variance formula `1/S_xx` is used.
pub fn wls_line(points: &[(f64, f64, f64)]) -> (f64, f64, f64) {
    assert!(points.len() >= 3, "need at least three points");
    let weighted = points.iter().any(|&(_, _, w)| w != 1.0);
    let sw: f64 = points.iter().map(|&(_, _, w)| w).sum();
    let xbar: f64 = points.iter().map(|&(x, _, w)| w * x).sum::<f64>() / sw;
    let ybar: f64 = points.iter().map(|&(_, y, w)| w * y).sum::<f64>() / sw;
    let sxx: f64 = points.iter().map(|&(x, _, w)| w * (x - xbar) * (x - xbar)).sum();
    let sxy: f64 = points.iter().map(|&(x, y, w)| w * (x - xbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let slope_se = if weighted {
        (1.0 / sxx).sqrt()
    } else {
        let n = points.len() as f64;
        let ss_res: f64 = points
            .iter()
            .map(|&(x, y, _)| {
                let r = y - intercept - slope * x;
                r * r
            })
            .sum();
        (ss_res / (n - 2.0) / sxx).sqrt()
    };
    (slope, intercept, slope_se)
}

/// Coefficient of determination for a fitted line on `(x, y)` points.
pub fn r_squared(points: &[(f64, f64)], slope: f64, intercept: f64) -> f64 {
    let n = points.len() as f64;
    let ybar: f64 = points.iter().map(|&(_, y)| y).sum::<f64>() / n;
    let ss_tot: f64 = points.iter().map(|&(_, y)| (y - ybar) * (y - ybar)).sum();
    let ss_res: f64 = points
        .iter()
        .map(|&(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    1.0 - ss_res / ss_tot
}

/// Pearson chi-square statistic against expected bin probabilities.
/// Bins with tiny expectation should be merged by the caller first.
pub fn chi_square(observed: &[u64], expected_probs: &[f64], n: u64) -> f64 {
    assert_eq!(observed.len(), expected_probs.len());
    observed
        .iter()
        .zip(expected_probs)
        .map(|(&o, &p)| {
            let e = p * n as f64;
            let d = o as f64 - e;
            d * d / e
        })
        .sum()
}

/// Two-sample Kolmogorov–Smirnov distance between empirical CDFs of
/// integer-valued samples. Conservative under ties, which is fine for an
/// equality-in-law check.
pub fn ks_two_sample(a: &mut Vec<u64>, b: &mut Vec<u64>) -> f64 {
    a.sort_unstable();
    b.sort_unstable();
    let (n, m) = (a.len() as f64, b.len() as f64);
    let mut d: f64 = 0.0;
    let (mut i, mut j) = (0usize, 0usize);
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => break,
        };
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Poisson pmf, stable for the moderate means used in the tests.
pub fn poisson_pmf(lambda: f64, k: u64) -> f64 {
    let mut log_p = -lambda + k as f64 * lambda.ln();
    for i in 1..=k {
        log_p -= (i as f64).ln();
    }
    log_p.exp()
}

pub fn poisson_cdf(lambda: f64, k: u64) -> f64 {
    (0..=k).map(|i| poisson_pmf(lambda, i)).sum()
}
