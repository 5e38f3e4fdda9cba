use proptest::prelude::*;

use super::*;
use crate::rng::Stream;

fn pair(truth: &[u8], scores: &[f64]) -> MultilabelPair {
    MultilabelPair::new(truth.iter().map(|&t| t == 1).collect(), scores.to_vec()).unwrap()
}

/// Random scores, a third of them snapped to a coarse grid so ties occur.
fn random_scores(s: &mut Stream, len: usize) -> Vec<f64> {
    let coarse = s.uniform() < 0.33;
    (0..len)
        .map(|_| {
            let u = s.uniform();
            if coarse {
                (u * 4.0).floor() / 4.0
            } else {
                u
            }
        })
        .collect()
}

fn hamming_oracle(truth_bits: u32, scores: &[f64]) -> f64 {
    let pred_bits = scores
        .iter()
        .enumerate()
        .fold(0u32, |acc, (i, &s)| acc | (u32::from(s >= 0.5) << i));
    let wrong = (truth_bits ^ pred_bits).count_ones() as f64;
    1.0 - wrong / scores.len() as f64
}

/// Precision at each positive, counting the items that rank at or above
/// it directly instead of sorting.
fn ap_oracle(truth_bits: u32, scores: &[f64]) -> Option<f64> {
    let positive = |i: usize| truth_bits >> i & 1 == 1;
    let n_pos = (0..scores.len()).filter(|&i| positive(i)).count();
    if n_pos == 0 {
        return None;
    }
    let above = |i: usize, j: usize| scores[j] > scores[i] || (scores[j] == scores[i] && j <= i);
    let total: f64 = (0..scores.len())
        .filter(|&i| positive(i))
        .map(|i| {
            let ranked: Vec<usize> = (0..scores.len()).filter(|&j| above(i, j)).collect();
            let hits = ranked.iter().filter(|&&j| positive(j)).count();
            hits as f64 / ranked.len() as f64
        })
        .sum();
    Some(total / n_pos as f64)
}

#[test]
fn hamming_examples() {
    assert_eq!(hamming_score(&pair(&[1, 0, 1], &[0.9, 0.1, 0.5])), 1.0);
    let mut truth = vec![0u8; 56];
    truth[3] = 1;
    let mut scores = vec![0.0; 56];
    scores[3] = 0.9;
    scores[10] = 0.7;
    assert!((hamming_score(&pair(&truth, &scores)) - 55.0 / 56.0).abs() < 1e-12);
    truth[20] = 1;
    assert!((hamming_score(&pair(&truth, &vec![0.0; 56])) - 54.0 / 56.0).abs() < 1e-12);
    assert!((54.0f64 / 56.0 - 0.96429).abs() < 1e-5);
}

#[test]
fn pair_validation() {
    assert_eq!(
        MultilabelPair::new(vec![true], vec![0.1, 0.2]),
        Err(MetricError::LengthMismatch(1, 2))
    );
    assert_eq!(
        MultilabelPair::new(vec![true], vec![1.2]),
        Err(MetricError::ScoreOutOfRange(1.2))
    );
}

#[test]
fn jaccard_examples() {
    assert_eq!(
        jaccard_accuracy(&pair(&[1, 1, 0, 0], &[0.9, 0.1, 0.8, 0.0])),
        1.0 / 3.0
    );
    assert_eq!(jaccard_accuracy(&pair(&[0, 0], &[0.1, 0.2])), 1.0);
}

#[test]
fn auprc_examples() {
    let ap = auprc(&[0.9, 0.8, 0.7, 0.6], &[true, false, true, false]).unwrap();
    assert!((ap - 0.83333).abs() < 1e-5);
    let ap = auprc(&[0.6, 0.7, 0.8, 0.9], &[true, false, true, false]).unwrap();
    assert_eq!(ap, 0.5);
    let ap = auprc(&[0.1, 0.2, 0.8, 0.9], &[true, true, false, false]).unwrap();
    assert!((ap - 0.41667).abs() < 1e-5);
    assert_eq!(auprc(&[0.9, 0.1], &[true, false]), Ok(1.0));
    assert_eq!(
        auprc(&[0.9, 0.1], &[false, false]),
        Err(MetricError::NoPositives)
    );
}

#[test]
fn ties_keep_input_order() {
    // the negative listed first outranks the positive at equal score
    let ap = auprc(&[0.5, 0.5], &[false, true]).unwrap();
    assert_eq!(ap, 0.5);
    let ap = auprc(&[0.5, 0.5], &[true, false]).unwrap();
    assert_eq!(ap, 1.0);
}

#[test]
fn hamming_and_ap_match_exhaustive_oracles() {
    let mut s = Stream::from_seed(2024);
    for len in 1..=8usize {
        for _ in 0..1000 {
            let scores = random_scores(&mut s, len);
            for bits in 0u32..(1 << len) {
                let truth: Vec<bool> = (0..len).map(|i| bits >> i & 1 == 1).collect();
                let p = MultilabelPair::new(truth.clone(), scores.clone()).unwrap();
                assert!((hamming_score(&p) - hamming_oracle(bits, &scores)).abs() < 1e-12);
                match ap_oracle(bits, &scores) {
                    Some(expected) => {
                        let got = auprc(&scores, &truth).unwrap();
                        assert!((got - expected).abs() < 1e-12, "{scores:?} {truth:?}");
                    }
                    None => assert_eq!(auprc(&scores, &truth), Err(MetricError::NoPositives)),
                }
            }
        }
    }
}

#[test]
fn clap_examples() {
    assert!((clap_style_score(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap() - 100.0).abs() < 1e-9);
    assert_eq!(clap_style_score(&[1.0, 0.0], &[0.0, 2.0]), Ok(0.0));
    assert_eq!(
        clap_style_score(&[0.0, 0.0], &[1.0, 0.0]),
        Err(MetricError::ZeroVector)
    );
    assert_eq!(
        clap_style_score(&[1.0], &[1.0, 0.0]),
        Err(MetricError::DimMismatch(1, 2))
    );
    assert_eq!(clap_style_score(&[], &[]), Err(MetricError::ZeroVector));
}

#[test]
fn kappa_examples() {
    let m = RatingMatrix::new(vec![vec![3, 0], vec![0, 3], vec![2, 1]]).unwrap();
    assert!((fleiss_kappa(&m).unwrap() - 0.55).abs() < 1e-12);
    let agree = RatingMatrix::new(vec![vec![4, 0, 0], vec![0, 4, 0], vec![0, 0, 4]]).unwrap();
    assert_eq!(fleiss_kappa(&agree), Ok(1.0));
    let single = RatingMatrix::new(vec![vec![3, 0], vec![3, 0]]).unwrap();
    assert_eq!(fleiss_kappa(&single), Err(MetricError::DegenerateAgreement));
}

#[test]
fn rating_matrix_validation() {
    assert!(RatingMatrix::new(vec![]).is_err());
    assert!(RatingMatrix::new(vec![vec![3]]).is_err());
    assert!(RatingMatrix::new(vec![vec![1, 0]]).is_err());
    assert!(RatingMatrix::new(vec![vec![2, 1], vec![1, 1]]).is_err());
    assert!(RatingMatrix::new(vec![vec![2, 1], vec![1, 1, 1]]).is_err());
    let one = RatingMatrix::new(vec![vec![2, 1]]).unwrap();
    assert!(matches!(
        fleiss_kappa(&one),
        Err(MetricError::InvalidRatings(_))
    ));
}

#[test]
fn kappa_from_labels() {
    let rows = vec![
        vec!["sad", "sad", "sad"],
        vec!["happy", "happy", "happy"],
        vec!["sad", "sad", "happy"],
    ];
    let (m, cats) = RatingMatrix::from_labels(&rows).unwrap();
    assert_eq!(cats, vec!["happy", "sad"]);
    assert!((fleiss_kappa(&m).unwrap() - 0.55).abs() < 1e-12);
}

#[test]
fn emotion_match_examples() {
    let mapping = MoodMapping::builtin();
    let probs =
        |tag: &str| BTreeMap::from([(tag.to_string(), 0.9), ("zzz-unmapped".to_string(), 0.95)]);
    let contented_tag = mapping
        .tags_for(Emotion::Contented)
        .next()
        .unwrap()
        .to_string();
    let sad_tag = mapping.tags_for(Emotion::Sad).next().unwrap().to_string();

    let v = emotion_match(
        &probs("happy"),
        Emotion::Happy,
        &mapping,
        2,
        DEFAULT_TOLERANCE_DEG,
    )
    .unwrap();
    assert!(v.matched);
    assert_eq!(v.error_deg, 0.0);

    let v = emotion_match(&probs(&contented_tag), Emotion::Happy, &mapping, 2, 45.0).unwrap();
    assert!(v.matched);
    assert!((v.error_deg - 17.112).abs() < 0.01, "{}", v.error_deg);

    let v = emotion_match(&probs(&sad_tag), Emotion::Happy, &mapping, 2, 45.0).unwrap();
    assert!(!v.matched);
    assert!((v.error_deg - 178.84).abs() < 0.01, "{}", v.error_deg);

    // the unmapped tag ranks first and fills the only slot
    assert_eq!(
        emotion_match(&probs("happy"), Emotion::Happy, &mapping, 1, 45.0),
        Err(MetricError::NoMappableTags)
    );
    assert_eq!(
        emotion_match(&probs("happy"), Emotion::Happy, &mapping, 0, 45.0),
        Err(MetricError::ZeroTopM)
    );
}

#[test]
fn zero_tolerance_is_exact_label_match() {
    let mapping = MoodMapping::builtin();
    for (tag, emotion) in mapping.iter() {
        let probs = BTreeMap::from([(tag.to_string(), 1.0)]);
        for intended in Emotion::ALL {
            let v = emotion_match(&probs, intended, &mapping, 1, 0.0).unwrap();
            assert_eq!(v.matched, intended == emotion, "{tag} vs {intended}");
        }
    }
}

proptest! {
    #[test]
    fn kappa_is_permutation_invariant(
        rows in prop::collection::vec(prop::collection::vec(0u32..5, 3), 2..8),
        shift in 0usize..3,
        rot in 0usize..8,
    ) {
        // give every row the same rater count by topping up the last column
        let n = rows.iter().map(|r| r.iter().sum::<u32>()).max().unwrap().max(2);
        let rows: Vec<Vec<u32>> = rows
            .into_iter()
            .map(|mut r| {
                let s: u32 = r.iter().sum();
                r[2] += n - s;
                r
            })
            .collect();
        let base = fleiss_kappa(&RatingMatrix::new(rows.clone()).unwrap());
        let mut subjects = rows.clone();
        subjects.rotate_left(rot % rows.len());
        subjects.reverse();
        let cats: Vec<Vec<u32>> = rows
            .iter()
            .map(|r| {
                let mut r = r.clone();
                r.rotate_left(shift);
                r
            })
            .collect();
        for permuted in [subjects, cats] {
            let k = fleiss_kappa(&RatingMatrix::new(permuted).unwrap());
            match (&base, &k) {
                (Ok(a), Ok(b)) => prop_assert!((a - b).abs() < 1e-12),
                _ => prop_assert_eq!(&base, &k),
            }
        }
    }

    #[test]
    fn clap_is_scale_invariant(
        a in prop::collection::vec(-10.0f64..10.0, 4),
        b in prop::collection::vec(-10.0f64..10.0, 4),
        k in 0.01f64..100.0,
    ) {
        prop_assume!(a.iter().any(|x| x.abs() > 1e-3) && b.iter().any(|x| x.abs() > 1e-3));
        let base = clap_style_score(&a, &b).unwrap();
        let scaled: Vec<f64> = a.iter().map(|x| x * k).collect();
        prop_assert!((clap_style_score(&scaled, &b).unwrap() - base).abs() < 1e-9);
        prop_assert!((-100.0..=100.0).contains(&base));
    }
}
