use super::MetricError;

fn check(x: &[f64], y: &[f64]) -> Result<(), MetricError> {
    if x.len() != y.len() {
        return Err(MetricError::LengthMismatch { x: x.len(), y: y.len() });
    }
    if x.len() < 2 {
        return Err(MetricError::TooFewPoints(x.len()));
    }
    Ok(())
}

/// Sample Pearson correlation (two-pass).
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, MetricError> {
    check(x, y)?;
    // Tested on the raw values: a rounded mean can make a constant look varied.
    if x.iter().all(|v| *v == x[0]) || y.iter().all(|v| *v == y[0]) {
        return Err(MetricError::ConstantInput);
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(MetricError::ConstantInput);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the mean of their positions.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, MetricError> {
    check(x, y)?;
    pearson(&average_ranks(x), &average_ranks(y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pearson_examples() {
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap(), 1.0);
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        assert!((pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn spearman_examples() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[9.0, 4.0, 1.0]).unwrap(), -1.0);
        // Ranks of x: 1, 2.5, 2.5, 4. Against 1..4: sxy = 4.5, sxx = 4.5, syy = 5.
        let s = spearman(&[1.0, 2.0, 2.0, 3.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((s - 4.5 / (4.5f64 * 5.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ranks_with_ties() {
        assert_eq!(average_ranks(&[10.0, 20.0, 10.0, 5.0]), vec![2.5, 4.0, 2.5, 1.0]);
    }

    #[test]
    fn precondition_errors() {
        assert_eq!(pearson(&[1.0], &[1.0, 2.0]).unwrap_err(), MetricError::LengthMismatch { x: 1, y: 2 });
        assert_eq!(pearson(&[1.0, 1.0], &[1.0, 2.0]).unwrap_err(), MetricError::ConstantInput);
        assert_eq!(pearson(&[0.4, 0.2, 0.4], &[0.1; 3]).unwrap_err(), MetricError::ConstantInput);
        assert_eq!(spearman(&[1.0], &[1.0]).unwrap_err(), MetricError::TooFewPoints(1));
    }

    fn nonconstant(n: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-100.0f64..100.0, n).prop_filter("nonconstant", |v| v.iter().any(|x| *x != v[0]))
    }

    proptest! {
        #[test]
        fn affine_maps_are_perfectly_correlated(x in nonconstant(10), a in 0.1f64..10.0, b in -5.0f64..5.0) {
            let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            prop_assert!((pearson(&x, &y).unwrap() - 1.0).abs() < 1e-12);
            let z: Vec<f64> = x.iter().map(|v| -a * v + b).collect();
            prop_assert!((pearson(&x, &z).unwrap() + 1.0).abs() < 1e-12);
        }

        #[test]
        fn spearman_ignores_monotone_transforms(x in nonconstant(12), y in nonconstant(12)) {
            let base = spearman(&x, &y).unwrap();
            let fx: Vec<f64> = x.iter().map(|v| v.powi(3) + 2.0 * v).collect();
            let gy: Vec<f64> = y.iter().map(|v| (v / 50.0).exp()).collect();
            prop_assert_eq!(spearman(&fx, &gy).unwrap(), base);
        }
    }
}
