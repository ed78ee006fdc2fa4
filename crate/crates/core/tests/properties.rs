use genreforge::audio::{frame_count, frame_signal, AudioClip, FramingConfig};
use genreforge::autoencoder::{Autoencoder, AutoencoderConfig};
use genreforge::dsp::{chroma, magnitude_spectrum, spectral_shape, time_domain_features, ShortTimeExtractor};
use genreforge::pipeline::stratified_split;
use genreforge::selection::entropy::entropy_from_counts;
use genreforge::selection::{fit_forest, split_information_gain, ForestConfig};
use genreforge::svm::{train_binary, Gram, KernelSpec, SvmConfig};
use genreforge::temporal::{derivative_series, integrate_feature, meanvar_windows};
use proptest::collection::vec;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_framing() -> FramingConfig {
    FramingConfig {
        frame_len_samples: 64,
        hop_samples: 32,
        window_frames: 4,
        window_hop_frames: 2,
    }
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn frame_count_matches_closed_form(n in 64usize..5000, samples_seed in any::<u64>()) {
        let cfg = small_framing();
        let samples: Vec<f64> = (0..n).map(|i| ((i as u64 ^ samples_seed) % 17) as f64 / 17.0 - 0.5).collect();
        let clip = AudioClip::new(samples, 22050, "p").unwrap();
        let a = frame_signal(&clip, &cfg).unwrap();
        prop_assert_eq!(a.n_frames(), (n - 64) / 32 + 1);
        prop_assert_eq!(a.n_frames(), frame_count(n, 64, 32));
        prop_assert_eq!(&a.frames, &frame_signal(&clip, &cfg).unwrap().frames);
    }

    #[test]
    fn amplitude_scaling(frame in vec(-1.0f64..1.0, 256), c in 0.01f64..100.0) {
        let scaled: Vec<f64> = frame.iter().map(|v| v * c).collect();
        let (a, b) = (time_domain_features(&frame, 8), time_domain_features(&scaled, 8));
        prop_assert_eq!(a.zero_crossing, b.zero_crossing);
        prop_assert!(close(b.rms, c * a.rms, 1e-12));
        prop_assert!(close(b.energy, c * c * a.energy, 1e-12));
        let (sa, sb) = (magnitude_spectrum(&frame, 22050), magnitude_spectrum(&scaled, 22050));
        let (ha, hb) = (spectral_shape(&sa, 0.85), spectral_shape(&sb, 0.85));
        prop_assert!(close(ha.centroid, hb.centroid, 1e-9));
        prop_assert_eq!(ha.rolloff, hb.rolloff);
        let (ca, cb) = (chroma(&sa, 440.0), chroma(&sb, 440.0));
        for (x, y) in ca.values.iter().zip(&cb.values) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn short_time_components_are_finite(samples in vec(-1.0f64..1.0, 2000..4000), silence in 0usize..1000) {
        let mut s = vec![0.0; silence];
        s.extend(samples);
        let clip = AudioClip::new(s, 22050, "p").unwrap();
        let series = frame_signal(&clip, &FramingConfig { frame_len_samples: 512, hop_samples: 256, window_frames: 4, window_hop_frames: 2 }).unwrap();
        let m = ShortTimeExtractor::new(512, 22050).extract(&series).unwrap();
        for j in 0..m.n_components() {
            prop_assert!(m.column(j).iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn constant_series_meanvar(c in -1e3f64..1e3, len in 4usize..200, w in 1usize..4, hop in 1usize..4) {
        let s = vec![c; len];
        let (m, sd) = integrate_feature(&meanvar_windows(&s, w, hop).unwrap());
        prop_assert!(close(m, c, 1e-12) || m == c);
        prop_assert_eq!(sd, 0.0);
        let (dm, dsd) = integrate_feature(&meanvar_windows(&derivative_series(&s).unwrap(), w, hop).unwrap());
        prop_assert_eq!((dm, dsd), (0.0, 0.0));
    }

    #[test]
    fn uniform_maximizes_entropy(counts in vec(0usize..20, 2..6)) {
        let k = counts.len();
        let total: usize = counts.iter().sum();
        prop_assume!(total > 0);
        let uniform = entropy_from_counts(&vec![5; k]);
        prop_assert!((uniform - (k as f64).log2()).abs() < 1e-12);
        let h = entropy_from_counts(&counts);
        if counts.iter().all(|&c| c * k == total) {
            prop_assert!((h - uniform).abs() < 1e-12);
        } else {
            prop_assert!(h < uniform);
        }
    }

    #[test]
    fn information_gain_nonnegative(labels in vec(0usize..3, 1..30), assign in vec(0usize..3, 30)) {
        let mut children = vec![Vec::new(); 3];
        for (l, a) in labels.iter().zip(&assign) {
            children[*a].push(*l);
        }
        let refs: Vec<&[usize]> = children.iter().map(Vec::as_slice).collect();
        let ig = split_information_gain(&labels, &refs).unwrap();
        prop_assert!(ig >= 0.0);
        let n = labels.len();
        let same_distribution = children.iter().filter(|c| !c.is_empty()).all(|c| {
            (0..3).all(|k| c.iter().filter(|&&l| l == k).count() * n == labels.iter().filter(|&&l| l == k).count() * c.len())
        });
        prop_assert_eq!(ig == 0.0, same_distribution);
    }

    #[test]
    fn rbf_gram_symmetric_unit_diagonal(x in vec(vec(-5.0f64..5.0, 3), 1..12), gamma in 0.01f64..4.0) {
        let g = Gram::new(&KernelSpec::Rbf { gamma }, &x);
        for i in 0..x.len() {
            prop_assert_eq!(g.get(i, i), 1.0);
            for j in 0..x.len() {
                prop_assert_eq!(g.get(i, j), g.get(j, i));
            }
        }
    }

    #[test]
    fn dual_coefficients_in_box(x in vec(vec(-3.0f64..3.0, 2), 4..30), c in 0.1f64..10.0, seed in any::<u64>()) {
        let positive: Vec<bool> = x.iter().map(|p| p[0] + 0.3 * p[1] > 0.0).collect();
        prop_assume!(positive.iter().any(|&p| p) && positive.iter().any(|&p| !p));
        let cfg = SvmConfig { kernel: KernelSpec::Rbf { gamma: 0.5 }, c, ..Default::default() };
        let m = train_binary(&x, &positive, &cfg, seed).unwrap();
        prop_assert!(!m.alphas.is_empty());
        prop_assert!(m.alphas.iter().all(|&a| (0.0..=c).contains(&a)));
    }

    #[test]
    fn stratified_split_preserves_proportions(per_class in vec(2usize..6, 2..5), seed in any::<u64>()) {
        // each class holds a multiple of 2 samples and half of each goes to train
        let labels: Vec<usize> = per_class.iter().enumerate().flat_map(|(c, &m)| std::iter::repeat_n(c, 2 * m)).collect();
        let n_classes = per_class.len();
        let (train, test) = stratified_split(&labels, n_classes, labels.len() / 2, seed).unwrap();
        prop_assert_eq!(train.len() + test.len(), labels.len());
        for (c, &m) in per_class.iter().enumerate() {
            prop_assert_eq!(train.iter().filter(|&&i| labels[i] == c).count(), m);
            prop_assert_eq!(test.iter().filter(|&&i| labels[i] == c).count(), m);
        }
    }

    #[test]
    fn eval_forward_is_pure(x in vec(0.0f64..1.0, 6), seed in any::<u64>()) {
        let cfg = AutoencoderConfig { hidden: vec![5, 2, 5], ..Default::default() };
        let m = Autoencoder::init(&cfg, 6, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(m.reconstruct(&x).unwrap(), m.reconstruct(&x).unwrap());
        prop_assert_eq!(m.encode(&x).unwrap().len(), 2);
    }
}

#[test]
fn forest_is_bit_deterministic() {
    let x: Vec<Vec<f64>> = (0..40)
        .map(|i| vec![(i % 7) as f64, (i * 13 % 11) as f64, (i % 2) as f64 * 0.5])
        .collect();
    let y: Vec<usize> = (0..40).map(|i| i % 2).collect();
    let cfg = ForestConfig {
        n_trees: 30,
        rng_seed: 5,
        ..Default::default()
    };
    let (_, a) = fit_forest(&x, &y, 2, &cfg).unwrap();
    let (_, b) = fit_forest(&x, &y, 2, &cfg).unwrap();
    assert_eq!(
        a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
        b.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
    );
}

#[test]
fn separating_component_outranks_noise() {
    use rand::Rng;
    let mut wins = 0;
    for run in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(run);
        let y: Vec<usize> = (0..60).map(|i| i % 2).collect();
        let x: Vec<Vec<f64>> = y
            .iter()
            .map(|&l| {
                let mut row: Vec<f64> = (0..8).map(|_| rng.gen()).collect();
                row.push(l as f64);
                row
            })
            .collect();
        let cfg = ForestConfig {
            n_trees: 20,
            rng_seed: run,
            ..Default::default()
        };
        let (_, gains) = fit_forest(&x, &y, 2, &cfg).unwrap();
        if gains[..8].iter().all(|&g| g < gains[8]) {
            wins += 1;
        }
    }
    assert!(wins >= 99, "{wins}/100");
}
