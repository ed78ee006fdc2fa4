use super::spectrum::Spectrum;
use crate::error::{Error, Result};

/// Default fraction of total magnitude used for the rolloff point.
pub const DEFAULT_ROLLOFF_FRACTION: f64 = 0.85;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpectralShape {
    pub centroid: f64,
    pub spread: f64,
    pub rolloff: f64,
    pub variability: f64,
}

/// Centroid, spread, rolloff and variability of a magnitude spectrum.
///
/// A silent spectrum yields all zeros.
pub fn spectral_shape(spec: &Spectrum, rolloff_fraction: f64) -> SpectralShape {
    let mags = &spec.magnitudes;
    let total: f64 = mags.iter().sum();
    if mags.is_empty() || total <= 0.0 {
        return SpectralShape::default();
    }
    let centroid = mags
        .iter()
        .enumerate()
        .map(|(k, &m)| spec.frequency(k) * m)
        .sum::<f64>()
        / total;
    let spread = (mags
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            let d = spec.frequency(k) - centroid;
            m * d * d
        })
        .sum::<f64>()
        / total)
        .sqrt();

    let target = rolloff_fraction * total;
    let mut cumulative = 0.0;
    let mut rolloff_bin = mags.len() - 1;
    for (k, &m) in mags.iter().enumerate() {
        cumulative += m;
        if cumulative >= target {
            rolloff_bin = k;
            break;
        }
    }

    let mean = total / mags.len() as f64;
    let variability = (mags.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / mags.len() as f64).sqrt();

    SpectralShape {
        centroid,
        spread,
        rolloff: spec.frequency(rolloff_bin),
        variability,
    }
}

fn unit_mass(mags: &[f64]) -> Vec<f64> {
    let total: f64 = mags.iter().sum();
    if total > 0.0 {
        mags.iter().map(|m| m / total).collect()
    } else {
        vec![0.0; mags.len()]
    }
}

/// Euclidean distance between the two spectra after normalizing each to
/// unit total magnitude. A silent spectrum normalizes to the zero vector.
pub fn spectral_flux(prev: &Spectrum, cur: &Spectrum) -> Result<f64> {
    if prev.len() != cur.len() {
        return Err(Error::LengthMismatch {
            left: prev.len(),
            right: cur.len(),
        });
    }
    let p = unit_mass(&prev.magnitudes);
    let c = unit_mass(&cur.magnitudes);
    Ok(p.iter().zip(&c).map(|(a, b)| (b - a).powi(2)).sum::<f64>().sqrt())
}

/// Sum over interior bins of `|ln m_k - ln(mean(m_{k-1}, m_k, m_{k+1}))|`,
/// skipping bins whose neighbourhood contains a zero.
pub fn compactness(spec: &Spectrum) -> f64 {
    spec.magnitudes
        .windows(3)
        .filter(|w| w.iter().all(|&m| m > 0.0))
        .map(|w| {
            let local = (w[0] + w[1] + w[2]) / 3.0;
            (w[1].ln() - local.ln()).abs()
        })
        .sum()
}

/// Positive part of the bin-wise magnitude increase, summed. Used as the
/// onset-strength signal for beat analysis.
pub fn rectified_flux(prev: &Spectrum, cur: &Spectrum) -> f64 {
    prev.magnitudes
        .iter()
        .zip(&cur.magnitudes)
        .map(|(p, c)| (c - p).max(0.0))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spectrum(mags: Vec<f64>) -> Spectrum {
        Spectrum {
            magnitudes: mags,
            bin_hz: 10.0,
        }
    }

    fn rel_close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn point_mass_shape() {
        let mut m = vec![0.0; 64];
        m[7] = 3.0;
        let s = spectral_shape(&spectrum(m), 0.85);
        assert_eq!(s.centroid, 70.0);
        assert_eq!(s.spread, 0.0);
        assert_eq!(s.rolloff, 70.0);
    }

    #[test]
    fn two_equal_bins() {
        let mut m = vec![0.0; 64];
        m[4] = 1.0;
        m[12] = 1.0;
        let s = spectral_shape(&spectrum(m), 0.85);
        assert!((s.centroid - 80.0).abs() < 1e-12);
        assert!((s.spread - 40.0).abs() < 1e-12);
    }

    #[test]
    fn flat_spectrum_rolloff() {
        let n = 1025;
        let spec = spectrum(vec![1.0; n]);
        let s = spectral_shape(&spec, 0.85);
        // cumulative-sum oracle
        let mut acc = 0.0;
        let mut expected = 0;
        for k in 0..n {
            acc += 1.0;
            if acc >= 0.85 * n as f64 {
                expected = k;
                break;
            }
        }
        assert_eq!(s.rolloff, spec.frequency(expected));
        assert!((s.rolloff - 0.85 * spec.nyquist()).abs() <= 2.0 * spec.bin_hz);
        assert_eq!(s.variability, 0.0);
    }

    #[test]
    fn silent_shape_is_zero() {
        assert_eq!(spectral_shape(&spectrum(vec![0.0; 8]), 0.85), SpectralShape::default());
    }

    #[test]
    fn flux_identity_and_orthogonal() {
        let a = spectrum(vec![1.0, 2.0, 3.0]);
        assert_eq!(spectral_flux(&a, &a).unwrap(), 0.0);
        let p = spectrum(vec![1.0, 0.0, 0.0]);
        let q = spectrum(vec![0.0, 0.0, 5.0]);
        assert!((spectral_flux(&p, &q).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn flux_length_mismatch() {
        let err = spectral_flux(&spectrum(vec![1.0; 3]), &spectrum(vec![1.0; 4])).unwrap_err();
        assert!(matches!(err, Error::LengthMismatch { left: 3, right: 4 }));
    }

    #[test]
    fn compactness_smooth_and_alternating() {
        assert_eq!(compactness(&spectrum(vec![2.0; 32])), 0.0);
        let alt: Vec<f64> = (0..32).map(|i| if i % 2 == 0 { 1.0 } else { 3.0 }).collect();
        assert!(compactness(&spectrum(alt)) > 0.0);
        assert_eq!(compactness(&spectrum(vec![0.0; 32])), 0.0);
    }

    // Straight-line oracles written independently of the iterator code above.
    fn oracle_compactness(m: &[f64]) -> f64 {
        let mut sum = 0.0;
        for k in 1..m.len() - 1 {
            if m[k - 1] == 0.0 || m[k] == 0.0 || m[k + 1] == 0.0 {
                continue;
            }
            let avg = (m[k - 1] + m[k] + m[k + 1]) / 3.0;
            sum += (m[k].ln() - avg.ln()).abs();
        }
        sum
    }

    #[allow(clippy::needless_range_loop)]
    fn oracle_shape(m: &[f64], hz: f64) -> (f64, f64, f64) {
        let mut total = 0.0;
        let mut weighted = 0.0;
        for k in 0..m.len() {
            total += m[k];
            weighted += m[k] * k as f64 * hz;
        }
        let c = weighted / total;
        let mut var = 0.0;
        for k in 0..m.len() {
            var += m[k] * (k as f64 * hz - c) * (k as f64 * hz - c);
        }
        let mean = total / m.len() as f64;
        let mut sv = 0.0;
        for v in m {
            sv += (v - mean) * (v - mean);
        }
        (c, (var / total).sqrt(), (sv / m.len() as f64).sqrt())
    }

    fn oracle_flux(a: &[f64], b: &[f64]) -> f64 {
        let sa: f64 = a.iter().sum();
        let sb: f64 = b.iter().sum();
        let mut acc = 0.0;
        for i in 0..a.len() {
            let d = b[i] / sb - a[i] / sa;
            acc += d * d;
        }
        acc.sqrt()
    }

    #[test]
    fn random_spectra_match_direct_oracles() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.gen_range(3..600);
            let a: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..5.0)).collect();
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..5.0)).collect();
            let sa = spectrum(a.clone());
            let sb = spectrum(b.clone());
            assert!(rel_close(compactness(&sa), oracle_compactness(&a)));
            let shape = spectral_shape(&sa, 0.85);
            let (c, s, v) = oracle_shape(&a, 10.0);
            assert!(rel_close(shape.centroid, c));
            assert!(rel_close(shape.spread, s));
            assert!(rel_close(shape.variability, v));
            assert!(rel_close(spectral_flux(&sa, &sb).unwrap(), oracle_flux(&a, &b)));
        }
    }

    #[test]
    fn rectified_flux_ignores_decreases() {
        let a = spectrum(vec![1.0, 5.0, 0.0]);
        let b = spectrum(vec![2.0, 1.0, 0.5]);
        assert!((rectified_flux(&a, &b) - 1.5).abs() < 1e-15);
    }
}
