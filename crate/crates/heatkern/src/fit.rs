//! Least-squares helpers for empirical order estimation.

/// Slope of the least-squares line through (x_i, y_i).
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        num += (x - xm) * (y - ym);
        den += (x - xm) * (x - xm);
    }
    num / den
}

/// Intercept and slope of the least-squares line.
pub fn ls_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let slope = ls_slope(xs, ys);
    let n = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    (ym - slope * xm, slope)
}

/// Fitted order from log-log data: slope of log(err) against log(scale).
/// Pairs with non-finite logs (zero error) are dropped.
pub fn loglog_order(scales: &[f64], errors: &[f64]) -> f64 {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&s, &e) in scales.iter().zip(errors) {
        if s > 0.0 && e > 0.0 && e.is_finite() {
            xs.push(s.ln());
            ys.push(e.ln());
        }
    }
    ls_slope(&xs, &ys)
}

/// Geometric grid of `count` points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && count >= 2);
    let step = (hi / lo).ln() / (count - 1) as f64;
    (0..count).map(|i| lo * (step * i as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn slope_of_exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x - 1.0).collect();
        assert_abs_diff_eq!(ls_slope(&xs, &ys), 2.5, epsilon = 1e-14);
        let (b, m) = ls_line(&xs, &ys);
        assert_abs_diff_eq!(b, -1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(m, 2.5, epsilon = 1e-14);
    }

    #[test]
    fn order_of_power_law() {
        let hs = log_grid(1e-3, 1e-1, 7);
        let errs: Vec<f64> = hs.iter().map(|h| 3.0 * h.powi(2)).collect();
        assert_abs_diff_eq!(loglog_order(&hs, &errs), 2.0, epsilon = 1e-10);
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-3, 1.0, 4);
        assert_abs_diff_eq!(g[0], 1e-3, epsilon = 1e-18);
        assert_abs_diff_eq!(g[3], 1.0, epsilon = 1e-12);
    }
}
