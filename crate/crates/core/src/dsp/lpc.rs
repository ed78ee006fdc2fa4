pub const DEFAULT_LPC_ORDER: usize = 10;

/// Biased autocorrelation `r[k] = (1/N) Σ x[n] x[n-k]` for lags `0..=max_lag`.
pub fn autocorrelation(frame: &[f64], max_lag: usize) -> Vec<f64> {
    let n = frame.len();
    (0..=max_lag)
        .map(|lag| {
            if lag >= n {
                0.0
            } else {
                frame[lag..].iter().zip(frame).map(|(a, b)| a * b).sum::<f64>() / n as f64
            }
        })
        .collect()
}

/// Solves the normal equations for predictor coefficients by the
/// Levinson-Durbin recursion. Returns `a[1..=order]` with
/// `x[n] ≈ Σ a[k] x[n-k]`.
///
/// A zero lag-0 autocorrelation (silence) yields the zero vector. If the
/// prediction error vanishes early, the remaining coefficients stay 0.
pub fn levinson_durbin(r: &[f64], order: usize) -> Vec<f64> {
    let mut a = vec![0.0; order + 1];
    let mut err = r[0];
    if err <= 0.0 {
        return vec![0.0; order];
    }
    for i in 1..=order {
        let acc = r[i] - (1..i).map(|j| a[j] * r[i - j]).sum::<f64>();
        let k = acc / err;
        let prev = a.clone();
        a[i] = k;
        for j in 1..i {
            a[j] = prev[j] - k * prev[i - j];
        }
        err *= 1.0 - k * k;
        if err <= f64::EPSILON * r[0] {
            break;
        }
    }
    a.remove(0);
    a
}

/// Linear-prediction coefficients of one frame.
pub fn lpc(frame: &[f64], order: usize) -> Vec<f64> {
    assert!(frame.len() > order, "frame must be longer than the LPC order");
    levinson_durbin(&autocorrelation(frame, order), order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn ar_process(coeffs: &[f64], n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let mut x = vec![0.0; n + 500];
        for i in 0..x.len() {
            let mut v = noise.sample(&mut rng);
            for (k, c) in coeffs.iter().enumerate() {
                if i > k {
                    v += c * x[i - k - 1];
                }
            }
            x[i] = v;
        }
        x.split_off(500)
    }

    #[test]
    fn silence_gives_zero_vector() {
        assert_eq!(lpc(&[0.0; 1102], 10), vec![0.0; 10]);
    }

    #[test]
    fn recovers_ar1() {
        let x = ar_process(&[0.9], 20_000, 1);
        let a = lpc(&x, 10);
        assert!((a[0] - 0.9).abs() < 0.05, "{a:?}");
        assert!(a[1..].iter().all(|v| v.abs() < 0.05), "{a:?}");
    }

    #[test]
    fn recovers_ar2() {
        let x = ar_process(&[0.75, -0.5], 20_000, 2);
        let a = lpc(&x, 10);
        assert!((a[0] - 0.75).abs() < 0.05, "{a:?}");
        assert!((a[1] + 0.5).abs() < 0.05, "{a:?}");
        assert!(a[2..].iter().all(|v| v.abs() < 0.05), "{a:?}");
    }

    #[test]
    fn levinson_matches_direct_solve_for_order_two() {
        let r = [2.0, 1.2, 0.5];
        let a = levinson_durbin(&r, 2);
        // Yule-Walker 2x2 by Cramer's rule
        let det = r[0] * r[0] - r[1] * r[1];
        let a1 = (r[1] * r[0] - r[1] * r[2]) / det;
        let a2 = (r[0] * r[2] - r[1] * r[1]) / det;
        assert!((a[0] - a1).abs() < 1e-12 && (a[1] - a2).abs() < 1e-12);
    }
}
