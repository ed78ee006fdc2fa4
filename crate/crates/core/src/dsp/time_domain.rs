/// Time-domain descriptors of one analysis frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeDomainFeatures {
    pub energy: f64,
    pub rms: f64,
    pub zero_crossing: f64,
    pub entropy_of_energy: f64,
}

/// Sign changes between consecutive samples; zero counts as positive.
pub fn zero_crossings(frame: &[f64]) -> usize {
    frame.windows(2).filter(|w| (w[0] >= 0.0) != (w[1] >= 0.0)).count()
}

/// Shannon entropy (bits) of the energy distribution over `n_subframes`
/// equal sub-frames. Samples beyond `n_subframes * floor(len / n_subframes)`
/// are ignored. Silent frames have entropy 0.
pub fn entropy_of_energy(frame: &[f64], n_subframes: usize) -> f64 {
    if n_subframes == 0 {
        return 0.0;
    }
    let sub_len = frame.len() / n_subframes;
    if sub_len == 0 {
        return 0.0;
    }
    let energies: Vec<f64> = frame
        .chunks_exact(sub_len)
        .take(n_subframes)
        .map(|c| c.iter().map(|x| x * x).sum())
        .collect();
    let total: f64 = energies.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    -energies
        .iter()
        .map(|e| e / total)
        .filter(|&p| p > 0.0)
        .map(|p| p * p.log2())
        .sum::<f64>()
}

pub fn time_domain_features(frame: &[f64], n_subframes: usize) -> TimeDomainFeatures {
    let energy: f64 = frame.iter().map(|x| x * x).sum();
    let rms = if frame.is_empty() {
        0.0
    } else {
        (energy / frame.len() as f64).sqrt()
    };
    TimeDomainFeatures {
        energy,
        rms,
        zero_crossing: zero_crossings(frame) as f64,
        entropy_of_energy: entropy_of_energy(frame, n_subframes),
    }
}
