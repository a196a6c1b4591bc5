//! Metrics against brute-force enumerations written independently here.

use mcdopt::metrics::*;
use mcdopt::Matrix;
use proptest::prelude::*;

#[path = "support/oracles.rs"]
mod oracles;
use oracles::*;

/// Rows on the simplex; some rows are snapped to a coarse grid so that ties
/// and bin edges actually occur.
fn prob_rows(c: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    let row = (prop::collection::vec(0.0f64..1.0, c), any::<bool>()).prop_map(move |(w, coarse)| {
        let w: Vec<f64> = if coarse {
            w.iter().map(|v| (v * 4.0).round()).collect()
        } else {
            w
        };
        let s: f64 = w.iter().sum();
        if s == 0.0 {
            vec![1.0 / c as f64; c]
        } else {
            w.iter().map(|v| v / s).collect()
        }
    });
    prop::collection::vec(row, 1..=50)
}

fn case() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<usize>, usize)> {
    (2usize..=4).prop_flat_map(|c| {
        prob_rows(c).prop_flat_map(move |rows| {
            let n = rows.len();
            (Just(rows), prop::collection::vec(0..c, n), Just(c))
        })
    })
}

fn matrix(rows: &[Vec<f64>]) -> Matrix {
    Matrix::from_rows(rows).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn entropy_matches_enumeration((rows, _, _) in case()) {
        let pe = predictive_entropy(&matrix(&rows));
        for (r, h) in rows.iter().zip(&pe) {
            prop_assert!((oracle_pe(r) - h).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(h));
        }
    }

    #[test]
    fn confusion_matches_enumeration((rows, labels, _) in case(), threshold in 0.0f64..=1.0) {
        let m = matrix(&rows);
        let pe = predictive_entropy(&m);
        let pred = classify(&m);
        let ucm = uncertainty_confusion(&pe, &pred, &labels, threshold).unwrap();
        let (mut cc, mut cu, mut ic, mut iu) = (0, 0, 0, 0);
        for i in 0..rows.len() {
            let correct = oracle_argmax(&rows[i]) == labels[i];
            let certain = oracle_pe(&rows[i]) < threshold;
            match (correct, certain) {
                (true, true) => cc += 1,
                (true, false) => cu += 1,
                (false, true) => ic += 1,
                (false, false) => iu += 1,
            }
        }
        prop_assert_eq!((ucm.cc, ucm.cu, ucm.ic, ucm.iu), (cc, cu, ic, iu));
        prop_assert_eq!(ucm.total(), rows.len());
        let expect = (cc + iu) as f64 / rows.len() as f64;
        prop_assert!((uacc(&ucm).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn ece_matches_enumeration((rows, labels, _) in case(), m_bins in 1usize..=15) {
        let got = ece(&matrix(&rows), &labels, m_bins).unwrap();
        prop_assert!((got - oracle_ece(&rows, &labels, m_bins)).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&got));
    }

    #[test]
    fn auc_matches_pair_count(
        scores in prop::collection::vec(prop_oneof![0.0f64..1.0, (0u8..5).prop_map(|k| k as f64 / 4.0)], 1..=50),
        seed in any::<u64>(),
    ) {
        let labels: Vec<usize> = scores.iter().enumerate().map(|(i, _)| ((seed >> (i % 64)) & 1) as usize).collect();
        match (roc_auc(&scores, &labels), oracle_auc(&scores, &labels)) {
            (Ok(a), Some(b)) => prop_assert!((a - b).abs() < 1e-12),
            (Err(mcdopt::Error::UndefinedAuc), None) => {}
            (a, b) => prop_assert!(false, "mismatch {:?} vs {:?}", a, b),
        }
    }

    #[test]
    fn group_centers_match_enumeration((rows, labels, _) in case()) {
        let m = matrix(&rows);
        let pe = predictive_entropy(&m);
        let pred = classify(&m);
        let g = group_centers(&pe, &pred, &labels).unwrap();
        let wrong: Vec<f64> = (0..rows.len()).filter(|&i| pred[i] != labels[i]).map(|i| oracle_pe(&rows[i])).collect();
        let right: Vec<f64> = (0..rows.len()).filter(|&i| pred[i] == labels[i]).map(|i| oracle_pe(&rows[i])).collect();
        let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
        let close = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(x), Some(y)) => (x - y).abs() < 1e-12,
            (None, None) => true,
            _ => false,
        };
        prop_assert!(close(g.mu_incorrect, mean(&wrong)));
        prop_assert!(close(g.mu_correct, mean(&right)));
        let d = match (mean(&wrong), mean(&right)) {
            (Some(a), Some(b)) => Some((a - b).abs()),
            _ => None,
        };
        prop_assert!(close(g.distance, d));
    }

    #[test]
    fn sample_permutation_leaves_metrics_unchanged((rows, labels, _) in case(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut idx: Vec<usize> = (0..rows.len()).collect();
        idx.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let prows: Vec<Vec<f64>> = idx.iter().map(|&i| rows[i].clone()).collect();
        let plabels: Vec<usize> = idx.iter().map(|&i| labels[i]).collect();
        let (a, b) = (matrix(&rows), matrix(&prows));
        prop_assert!((ece(&a, &labels, 10).unwrap() - ece(&b, &plabels, 10).unwrap()).abs() < 1e-12);
        let ua = |m: &Matrix, l: &[usize]| {
            let pe = predictive_entropy(m);
            uacc(&uncertainty_confusion(&pe, &classify(m), l, 0.5).unwrap()).unwrap()
        };
        prop_assert_eq!(ua(&a, &labels), ua(&b, &plabels));
        prop_assert_eq!(accuracy(&classify(&a), &labels).unwrap(), accuracy(&classify(&b), &plabels).unwrap());
    }
}

#[test]
fn bin_edges_land_right_closed() {
    for m in 1..=20 {
        for k in 0..m {
            let edge = (k + 1) as f64 / m as f64;
            assert_eq!(confidence_bin(edge, m), k, "edge {k}/{m}");
        }
        assert_eq!(confidence_bin(0.0, m), 0);
    }
}

#[test]
fn threshold_one_curve_equals_accuracy() {
    let rows = vec![vec![0.9, 0.1], vec![0.4, 0.6], vec![0.7, 0.3], vec![0.55, 0.45]];
    let labels = [0, 0, 0, 1];
    let m = matrix(&rows);
    let pe = predictive_entropy(&m);
    assert!(pe.iter().all(|&h| h < 1.0));
    let pred = classify(&m);
    let sweep = threshold_sweep(&pe, &pred, &labels, &[1.0]).unwrap();
    assert_eq!(sweep[0].1, accuracy(&pred, &labels).unwrap());
}
