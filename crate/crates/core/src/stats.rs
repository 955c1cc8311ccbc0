//! Ensemble observables and power-law fits.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geom::Walk;

/// Mean squared distance of the vertices from their centroid.
pub fn squared_radius_of_gyration(walk: &Walk) -> f64 {
    let c = walk.centroid();
    let v = walk.vertices();
    v.iter().map(|&p| (p - c).norm2()).sum::<f64>() / v.len() as f64
}

/// `|v_n - v_0|^2`.
pub fn squared_end_to_end(walk: &Walk) -> f64 {
    (walk.end() - walk.vertex(0)).norm2()
}

/// Running `(count, sum, sum of squares)`; merging is associative.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, o: &Moments) {
        self.count += o.count;
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return f64::NAN;
        }
        let n = self.count as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    pub fn stderr(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }
}

/// Per-sample values of one observable at a given `(n, r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSeries {
    pub n: usize,
    pub r: f64,
    pub values: Vec<f64>,
}

impl ObservableSeries {
    pub fn new(n: usize, r: f64, values: Vec<f64>) -> Self {
        ObservableSeries { n, r, values }
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Sample standard deviation over `sqrt(count)`.
    pub fn stderr(&self) -> f64 {
        let m = self.mean();
        let k = self.values.len() as f64;
        let var = self.values.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (k - 1.0);
        (var / k).sqrt()
    }

    /// Normalized sample autocorrelation at `lag`; see [`autocorrelation`].
    pub fn autocorrelation(&self, lag: usize) -> Result<f64> {
        autocorrelation(&self.values, lag)
    }
}

/// Normalized sample autocorrelation of `values` at `lag`.
///
/// Returns `NaN` for a series with zero variance (undefined correlation).
pub fn autocorrelation(values: &[f64], lag: usize) -> Result<f64> {
    if lag >= values.len() {
        return Err(Error::Domain(format!(
            "lag {lag} must be smaller than the series length {}",
            values.len()
        )));
    }
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let var: f64 = values.iter().map(|x| (x - mean).powi(2)).sum();
    if var == 0.0 {
        return Ok(f64::NAN);
    }
    let cov: f64 = values
        .iter()
        .zip(&values[lag..])
        .map(|(a, b)| (a - mean) * (b - mean))
        .sum();
    Ok(cov / var)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub log_prefactor: f64,
    pub exponent_stderr: f64,
    pub r_squared: f64,
}

impl PowerLawFit {
    pub fn predict(&self, n: f64) -> f64 {
        (self.log_prefactor + self.exponent * n.ln()).exp()
    }
}

fn check_points(points: &[(f64, f64)]) -> Result<()> {
    if points.len() < 3 {
        return Err(Error::Domain(format!(
            "power-law fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some(p) = points
        .iter()
        .find(|(x, y)| !(*x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite()))
    {
        return Err(Error::Domain(format!(
            "power-law fit needs positive finite data, got {p:?}"
        )));
    }
    Ok(())
}

fn weighted_line(xs: &[f64], ys: &[f64], ws: &[f64]) -> PowerLawFit {
    // Shift by the first point so identical inputs cancel exactly.
    let (x0, y0) = (xs[0], ys[0]);
    let xs: Vec<f64> = xs.iter().map(|x| x - x0).collect();
    let ys: Vec<f64> = ys.iter().map(|y| y - y0).collect();
    let (xs, ys) = (&xs[..], &ys[..]);
    let sw: f64 = ws.iter().sum();
    let mx = xs.iter().zip(ws).map(|(x, w)| x * w).sum::<f64>() / sw;
    let my = ys.iter().zip(ws).map(|(y, w)| y * w).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for ((x, y), w) in xs.iter().zip(ys).zip(ws) {
        sxx += w * (x - mx) * (x - mx);
        sxy += w * (x - mx) * (y - my);
        syy += w * (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs
        .iter()
        .zip(ys)
        .zip(ws)
        .map(|((x, y), w)| w * (y - intercept - slope * x).powi(2))
        .sum();
    let dof = (xs.len() - 2) as f64;
    PowerLawFit {
        exponent: slope,
        log_prefactor: y0 + intercept - slope * x0,
        exponent_stderr: (ssr / dof / sxx).sqrt(),
        r_squared: if syy > 0.0 { 1.0 - ssr / syy } else { 1.0 },
    }
}

fn sorted(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut p = points.to_vec();
    p.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    p
}

/// Ordinary least squares of `ln y` on `ln N` (vertical offsets).
///
/// Input order does not affect the result.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    check_points(points)?;
    let p = sorted(points);
    let xs: Vec<f64> = p.iter().map(|(x, _)| x.ln()).collect();
    let ys: Vec<f64> = p.iter().map(|(_, y)| y.ln()).collect();
    let ws = vec![1.0; xs.len()];
    Ok(weighted_line(&xs, &ys, &ws))
}

/// Weighted variant: each point carries the standard error of `y`; weights are
/// `(y / stderr)^2`, the inverse variance of `ln y` to first order.
pub fn fit_power_law_weighted(points: &[(f64, f64, f64)]) -> Result<PowerLawFit> {
    let plain: Vec<(f64, f64)> = points.iter().map(|&(x, y, _)| (x, y)).collect();
    check_points(&plain)?;
    let mut p = points.to_vec();
    p.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    if p.iter().any(|&(_, _, s)| s.is_nan() || s <= 0.0) {
        return Err(Error::Domain(
            "weighted fit needs positive standard errors".into(),
        ));
    }
    let xs: Vec<f64> = p.iter().map(|(x, _, _)| x.ln()).collect();
    let ys: Vec<f64> = p.iter().map(|(_, y, _)| y.ln()).collect();
    let ws: Vec<f64> = p.iter().map(|(_, y, s)| (y / s).powi(2)).collect();
    Ok(weighted_line(&xs, &ys, &ws))
}

/// Bootstrap standard error of the exponent, resampling each length's sample set.
pub fn bootstrap_exponent_stderr<R: Rng + ?Sized>(
    samples: &[(f64, Vec<f64>)],
    resamples: usize,
    rng: &mut R,
) -> Result<f64> {
    let mut exps = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let pts: Vec<(f64, f64)> = samples
            .iter()
            .map(|(n, v)| {
                let m = (0..v.len()).map(|_| v[rng.random_range(0..v.len())]).sum::<f64>() / v.len() as f64;
                (*n, m)
            })
            .collect();
        exps.push(fit_power_law(&pts)?.exponent);
    }
    let m = exps.iter().sum::<f64>() / exps.len() as f64;
    let var = exps.iter().map(|e| (e - m).powi(2)).sum::<f64>() / (exps.len() as f64 - 1.0);
    Ok(var.sqrt())
}

/// One acceptance measurement: length, radius and rate (any positive scale).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcceptancePoint {
    pub n: usize,
    pub r: f64,
    pub rate: f64,
}

/// Per-radius exponent alpha of `rate ~ N^alpha`, sorted by radius.
pub fn acceptance_scaling(table: &[AcceptancePoint]) -> Result<Vec<(f64, PowerLawFit)>> {
    let mut radii: Vec<f64> = table.iter().map(|p| p.r).collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    radii
        .into_iter()
        .map(|r| {
            let pts: Vec<(f64, f64)> = table
                .iter()
                .filter(|p| p.r == r)
                .map(|p| (p.n as f64, p.rate))
                .collect();
            fit_power_law(&pts).map(|f| (r, f))
        })
        .collect()
}

/// Wilson score interval for a binomial proportion at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Plane, Vec3};
    use crate::sampler::chain_rng;
    use approx::assert_abs_diff_eq;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn straight_walk_observables() {
        for n in [2usize, 5, 10, 37] {
            let w = Walk::straight(n).unwrap();
            let nf = n as f64;
            assert_abs_diff_eq!(
                squared_radius_of_gyration(&w),
                nf * (nf + 2.0) / 12.0,
                epsilon = 1e-9
            );
            assert_abs_diff_eq!(squared_end_to_end(&w), nf * nf, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(
            squared_radius_of_gyration(&Walk::straight(10).unwrap()),
            10.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn rigid_motion_invariance() {
        let w = Walk::from_edges([
            Vec3::new(1.0, 0.2, 0.0),
            Vec3::new(0.1, 1.0, 0.3),
            Vec3::new(-0.5, 0.4, 1.0),
            Vec3::new(0.3, -1.0, 0.2),
        ])
        .unwrap();
        // A reflection of the whole tail beyond v_1 is not rigid, so rotate via two mirrors.
        let p1 = Plane::new(Vec3::ZERO, Vec3::new(0.3, 0.5, 0.1)).unwrap();
        let p2 = Plane::new(Vec3::ZERO, Vec3::new(-0.2, 0.1, 0.9)).unwrap();
        let moved = Walk::new(
            w.vertices()
                .iter()
                .map(|&v| crate::geom::reflect_point(crate::geom::reflect_point(v, &p1), &p2))
                .collect(),
        )
        .unwrap();
        assert_abs_diff_eq!(
            squared_radius_of_gyration(&w),
            squared_radius_of_gyration(&moved),
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(squared_end_to_end(&w), squared_end_to_end(&moved), epsilon = 1e-9);
    }

    #[test]
    fn exact_power_law() {
        let pts: Vec<(f64, f64)> = (1..=10)
            .map(|k| {
                let n = 100.0 * k as f64;
                (n, 2.0 * n.powf(1.5))
            })
            .collect();
        let f = fit_power_law(&pts).unwrap();
        assert_abs_diff_eq!(f.exponent, 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(f.log_prefactor, 2f64.ln(), epsilon = 1e-10);
        assert!(f.exponent_stderr < 1e-10);
        assert_abs_diff_eq!(f.r_squared, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.predict(250.0), 2.0 * 250f64.powf(1.5), epsilon = 1e-6);
    }

    #[test]
    fn noisy_linear_law() {
        let mut rng = chain_rng(42, 0);
        let noise = Normal::new(0.0, 0.01).unwrap();
        let pts: Vec<(f64, f64)> = (1..=10)
            .map(|k| {
                let n = 100.0 * k as f64;
                (n, 3.0 * n * (1.0 + noise.sample(&mut rng)))
            })
            .collect();
        let f = fit_power_law(&pts).unwrap();
        assert!((f.exponent - 1.0).abs() < 0.05, "{f:?}");
    }

    #[test]
    fn permutation_gives_identical_fit() {
        let pts = vec![(100.0, 17.0), (300.0, 51.5), (200.0, 33.9), (700.0, 121.0)];
        let mut rev = pts.clone();
        rev.reverse();
        assert_eq!(fit_power_law(&pts).unwrap(), fit_power_law(&rev).unwrap());
    }

    #[test]
    fn fit_domain_errors() {
        assert!(fit_power_law(&[(1.0, 1.0), (2.0, 2.0)]).is_err());
        assert!(fit_power_law(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]).is_err());
        assert!(fit_power_law(&[(-1.0, 1.0), (2.0, 1.0), (3.0, 1.0)]).is_err());
    }

    #[test]
    fn weighted_fit_matches_unweighted_for_equal_relative_errors() {
        let pts = vec![(100.0, 17.0), (200.0, 33.9), (300.0, 51.5), (700.0, 121.0)];
        let w: Vec<_> = pts.iter().map(|&(x, y)| (x, y, 0.01 * y)).collect();
        let a = fit_power_law(&pts).unwrap();
        let b = fit_power_law_weighted(&w).unwrap();
        assert_abs_diff_eq!(a.exponent, b.exponent, epsilon = 1e-12);
    }

    #[test]
    fn constant_rates_give_zero_alpha() {
        let table: Vec<AcceptancePoint> = (1..=10)
            .map(|k| AcceptancePoint {
                n: 100 * k,
                r: 0.0,
                rate: 100.0,
            })
            .collect();
        let fits = acceptance_scaling(&table).unwrap();
        assert_eq!(fits.len(), 1);
        assert_eq!(fits[0].1.exponent, 0.0);
    }

    #[test]
    fn autocorrelation_cases() {
        let mut rng = chain_rng(7, 0);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let iid: Vec<f64> = (0..10_000).map(|_| normal.sample(&mut rng)).collect();
        let a = autocorrelation(&iid, 1).unwrap();
        assert!(a.abs() < 3.0 / (iid.len() as f64).sqrt(), "{a}");

        assert!(autocorrelation(&[2.0; 10], 1).unwrap().is_nan());
        assert!(autocorrelation(&[1.0, 2.0], 2).is_err());

        let mut x = 0.0;
        let ar: Vec<f64> = (0..20_000)
            .map(|_| {
                x = 0.8 * x + normal.sample(&mut rng);
                x
            })
            .collect();
        let a = autocorrelation(&ar, 1).unwrap();
        assert!((a - 0.8).abs() < 0.05, "{a}");
    }

    #[test]
    fn series_moments_agree() {
        let vals = vec![1.0, 4.0, 2.5, 7.0, 3.0];
        let s = ObservableSeries::new(10, 0.1, vals.clone());
        let mut m = Moments::default();
        for v in &vals {
            m.push(*v);
        }
        assert_abs_diff_eq!(s.mean(), m.mean(), epsilon = 1e-12);
        assert_abs_diff_eq!(s.stderr(), m.stderr(), epsilon = 1e-12);
    }

    #[test]
    fn wilson_interval_brackets_estimate() {
        let (lo, hi) = wilson_interval(30, 100, 1.96);
        assert!(lo < 0.3 && hi > 0.3);
        assert_abs_diff_eq!(lo, 0.2189, epsilon = 1e-3);
        assert_abs_diff_eq!(hi, 0.3958, epsilon = 1e-3);
        let (lo, _) = wilson_interval(0, 50, 1.96);
        assert_eq!(lo, 0.0);
    }
}
