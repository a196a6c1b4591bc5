//! Evaluation mathematics for MC-dropout predictions.
//!
//! Everything here is a pure function of its inputs. Probabilities arrive as
//! a [`McPrediction`] (T passes of B x C softmax outputs) or as the B x C
//! predictive mean.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{normalized_entropy, Matrix};

const SIMPLEX_TOL: f64 = 1e-9;

/// `T x B x C` softmax outputs of `T` stochastic passes, pass-major.
#[derive(Debug, Clone, PartialEq)]
pub struct McPrediction {
    t_passes: usize,
    batch: usize,
    classes: usize,
    probs: Vec<f64>,
}

impl McPrediction {
    pub fn new(t_passes: usize, batch: usize, classes: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != t_passes * batch * classes {
            return Err(Error::shape(format!(
                "{} values for a {t_passes}x{batch}x{classes} tensor",
                probs.len()
            )));
        }
        if classes == 0 {
            return Err(Error::arg("at least one class is required"));
        }
        for row in probs.chunks_exact(classes) {
            let sum: f64 = row.iter().sum();
            if row.iter().any(|p| !(p.is_finite() && *p >= 0.0)) || (sum - 1.0).abs() > SIMPLEX_TOL {
                return Err(Error::arg("every (pass, sample) slice must be a probability simplex"));
            }
        }
        Ok(McPrediction {
            t_passes,
            batch,
            classes,
            probs,
        })
    }

    /// Stacks single-pass `B x C` outputs.
    pub fn from_passes(passes: &[Matrix]) -> Result<Self> {
        let first = passes.first().ok_or_else(|| Error::arg("no passes"))?;
        let (b, c) = first.shape();
        let mut probs = Vec::with_capacity(passes.len() * b * c);
        for p in passes {
            if p.shape() != (b, c) {
                return Err(Error::shape("passes differ in shape"));
            }
            probs.extend_from_slice(p.as_slice());
        }
        McPrediction::new(passes.len(), b, c, probs)
    }

    /// `(T, B, C)`
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.t_passes, self.batch, self.classes)
    }

    pub fn t_passes(&self) -> usize {
        self.t_passes
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    /// The `B x C` block of pass `t`, row-major.
    pub fn pass(&self, t: usize) -> &[f64] {
        let n = self.batch * self.classes;
        &self.probs[t * n..(t + 1) * n]
    }

    pub fn prob(&self, t: usize, b: usize, c: usize) -> f64 {
        self.probs[(t * self.batch + b) * self.classes + c]
    }
}

/// Average of the passes: entry `(b, c)` is `(1/T) Σ_t p[t, b, c]`.
pub fn predictive_mean(mc: &McPrediction) -> Matrix {
    let (t, b, c) = mc.dims();
    let mut out = vec![0.0; b * c];
    for pass in 0..t {
        for (o, p) in out.iter_mut().zip(mc.pass(pass)) {
            *o += p;
        }
    }
    let inv = 1.0 / t as f64;
    out.iter_mut().for_each(|v| *v *= inv);
    Matrix::from_raw(b, c, out)
}

/// Normalized predictive entropy per row, in `[0, 1]`.
pub fn predictive_entropy(mean_probs: &Matrix) -> Vec<f64> {
    mean_probs
        .iter_rows()
        .map(|r| normalized_entropy(r).clamp(0.0, 1.0))
        .collect()
}

/// Arg-max class per row; ties go to the lower index.
pub fn classify(mean_probs: &Matrix) -> Vec<usize> {
    mean_probs
        .iter_rows()
        .map(|r| {
            r.iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (i, &p)| if p > best.1 { (i, p) } else { best })
                .0
        })
        .collect()
}

fn same_len(a: usize, b: usize, what: &str) -> Result<()> {
    if a != b {
        return Err(Error::arg(format!("{what}: lengths {a} and {b} differ")));
    }
    Ok(())
}

/// Correct/incorrect x certain/uncertain counts. A sample is certain when
/// its entropy is strictly below the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UncertaintyConfusion {
    pub cc: usize,
    pub cu: usize,
    pub ic: usize,
    pub iu: usize,
    #[serde(skip)]
    threshold_bits: u64,
}

impl UncertaintyConfusion {
    pub fn total(&self) -> usize {
        self.cc + self.cu + self.ic + self.iu
    }

    pub fn threshold(&self) -> f64 {
        f64::from_bits(self.threshold_bits)
    }
}

pub fn uncertainty_confusion(
    pe: &[f64],
    predicted: &[usize],
    labels: &[usize],
    threshold: f64,
) -> Result<UncertaintyConfusion> {
    same_len(pe.len(), predicted.len(), "uncertainty_confusion")?;
    same_len(pe.len(), labels.len(), "uncertainty_confusion")?;
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::arg(format!("threshold {threshold} outside [0, 1]")));
    }
    let mut ucm = UncertaintyConfusion {
        cc: 0,
        cu: 0,
        ic: 0,
        iu: 0,
        threshold_bits: threshold.to_bits(),
    };
    for ((&h, &p), &y) in pe.iter().zip(predicted).zip(labels) {
        match (p == y, h < threshold) {
            (true, true) => ucm.cc += 1,
            (true, false) => ucm.cu += 1,
            (false, true) => ucm.ic += 1,
            (false, false) => ucm.iu += 1,
        }
    }
    Ok(ucm)
}

/// `(CC + IU) / n`
pub fn uacc(ucm: &UncertaintyConfusion) -> Result<f64> {
    let n = ucm.total();
    if n == 0 {
        return Err(Error::arg("uncertainty accuracy of an empty set"));
    }
    Ok((ucm.cc + ucm.iu) as f64 / n as f64)
}

/// Per-bin tallies of confidence and correctness over `M` equal-width,
/// right-closed confidence bins.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationBins {
    pub m_bins: usize,
    pub count: Vec<usize>,
    pub confidence_sum: Vec<f64>,
    pub correct: Vec<usize>,
}

impl CalibrationBins {
    pub fn total(&self) -> usize {
        self.count.iter().sum()
    }

    /// `Σ (|B_m| / n) |acc(B_m) - conf(B_m)|`; empty bins contribute 0.
    pub fn ece(&self) -> f64 {
        let n = self.total() as f64;
        (0..self.m_bins)
            .filter(|&m| self.count[m] > 0)
            .map(|m| {
                let k = self.count[m] as f64;
                let acc = self.correct[m] as f64 / k;
                let conf = self.confidence_sum[m] / k;
                k / n * (acc - conf).abs()
            })
            .sum()
    }
}

/// Zero-based bin `k` with `k/M < conf <= (k+1)/M`; `conf = 0` lands in bin 0.
pub fn confidence_bin(conf: f64, m_bins: usize) -> usize {
    let m = m_bins as f64;
    let mut k = ((conf * m).ceil() as usize).clamp(1, m_bins);
    // `ceil(conf * M)` can be off by one when the product rounds across an edge
    while k > 1 && conf <= (k - 1) as f64 / m {
        k -= 1;
    }
    while k < m_bins && conf > k as f64 / m {
        k += 1;
    }
    k - 1
}

pub fn calibration_bins(mean_probs: &Matrix, labels: &[usize], m_bins: usize) -> Result<CalibrationBins> {
    if m_bins == 0 {
        return Err(Error::arg("at least one bin is required"));
    }
    same_len(mean_probs.rows(), labels.len(), "ece")?;
    let mut bins = CalibrationBins {
        m_bins,
        count: vec![0; m_bins],
        confidence_sum: vec![0.0; m_bins],
        correct: vec![0; m_bins],
    };
    let predicted = classify(mean_probs);
    for ((row, &p), &y) in mean_probs.iter_rows().zip(&predicted).zip(labels) {
        let conf = row[p];
        let k = confidence_bin(conf, m_bins);
        bins.count[k] += 1;
        bins.confidence_sum[k] += conf;
        bins.correct[k] += usize::from(p == y);
    }
    Ok(bins)
}

/// Expected calibration error with confidence = max mean probability.
pub fn ece(mean_probs: &Matrix, labels: &[usize], m_bins: usize) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::arg("ECE of an empty set"));
    }
    Ok(calibration_bins(mean_probs, labels, m_bins)?.ece())
}

pub fn accuracy(predicted: &[usize], labels: &[usize]) -> Result<f64> {
    same_len(predicted.len(), labels.len(), "accuracy")?;
    if labels.is_empty() {
        return Err(Error::arg("accuracy of an empty set"));
    }
    let hits = predicted.iter().zip(labels).filter(|(p, y)| p == y).count();
    Ok(hits as f64 / labels.len() as f64)
}

/// Mann–Whitney estimate of the ROC-AUC: the probability that a positive
/// outscores a negative, ties counted one half. Computed from mid-ranks.
pub fn roc_auc(scores: &[f64], labels: &[usize]) -> Result<f64> {
    same_len(scores.len(), labels.len(), "roc_auc")?;
    if labels.iter().any(|&y| y > 1) {
        return Err(Error::arg("roc_auc expects binary labels"));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::arg("roc_auc scores must not be NaN"));
    }
    let n_pos = labels.iter().filter(|&&y| y == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedAuc);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 share their average
        let mid = (i + j) as f64 / 2.0 + 1.0;
        let pos_in_tie = order[i..=j].iter().filter(|&&k| labels[k] == 1).count();
        rank_sum_pos += mid * pos_in_tie as f64;
        i = j + 1;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Mean entropy of misclassified (`mu_incorrect`) and correctly classified
/// (`mu_correct`) samples. A center is `None` when its group is empty, and
/// the distance is then `None` as well.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupCenters {
    pub mu_incorrect: Option<f64>,
    pub mu_correct: Option<f64>,
    pub distance: Option<f64>,
}

pub fn group_centers(pe: &[f64], predicted: &[usize], labels: &[usize]) -> Result<GroupCenters> {
    same_len(pe.len(), predicted.len(), "group_centers")?;
    same_len(pe.len(), labels.len(), "group_centers")?;
    let (mut s_in, mut n_in, mut s_co, mut n_co) = (0.0, 0usize, 0.0, 0usize);
    for ((&h, &p), &y) in pe.iter().zip(predicted).zip(labels) {
        if p == y {
            s_co += h;
            n_co += 1;
        } else {
            s_in += h;
            n_in += 1;
        }
    }
    let mu_incorrect = (n_in > 0).then(|| s_in / n_in as f64);
    let mu_correct = (n_co > 0).then(|| s_co / n_co as f64);
    let distance = match (mu_incorrect, mu_correct) {
        (Some(a), Some(b)) => Some((b - a).abs()),
        _ => None,
    };
    Ok(GroupCenters {
        mu_incorrect,
        mu_correct,
        distance,
    })
}

/// `(threshold, UAcc)` for each grid value, in grid order.
pub fn threshold_sweep(
    pe: &[f64],
    predicted: &[usize],
    labels: &[usize],
    grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if grid.is_empty() {
        return Err(Error::arg("threshold grid is empty"));
    }
    grid.iter()
        .map(|&t| Ok((t, uacc(&uncertainty_confusion(pe, predicted, labels, t)?)?)))
        .collect()
}

/// `lo, lo + step, ...` up to and including `hi` (within rounding).
pub fn linear_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    if n == 0 {
        return vec![lo];
    }
    let top = lo + n as f64 * step;
    // divide instead of accumulating so decimal grids land on their nearest doubles
    (0..=n).map(|i| lo + (top - lo) * i as f64 / n as f64).map(|v| v.min(hi)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn mc_prediction_validates_simplices() {
        assert!(McPrediction::new(1, 1, 2, vec![0.6, 0.6]).is_err());
        assert!(McPrediction::new(1, 1, 2, vec![1.1, -0.1]).is_err());
        assert!(McPrediction::new(1, 2, 2, vec![0.5, 0.5]).is_err());
        assert!(McPrediction::new(2, 1, 2, vec![0.5, 0.5, 1.0, 0.0]).is_ok());
    }

    #[test]
    fn predictive_mean_examples() {
        let single = McPrediction::new(1, 2, 2, vec![0.3, 0.7, 0.9, 0.1]).unwrap();
        assert_eq!(predictive_mean(&single).as_slice(), single.pass(0));

        let two = McPrediction::new(2, 1, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(predictive_mean(&two).as_slice(), &[0.5, 0.5]);

        let vals = [0.1, 0.9, 0.4, 0.6, 0.7, 0.3, 0.2, 0.8, 0.5, 0.5, 0.65, 0.35];
        let mc = McPrediction::new(3, 2, 2, vals.to_vec()).unwrap();
        let mean = predictive_mean(&mc);
        for b in 0..2 {
            for c in 0..2 {
                let hand = (vals[b * 2 + c] + vals[4 + b * 2 + c] + vals[8 + b * 2 + c]) / 3.0;
                assert!((mean.get(b, c) - hand).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn entropy_examples() {
        let pe = predictive_entropy(&m(&[&[0.5, 0.5], &[1.0, 0.0], &[0.9, 0.1]]));
        assert!((pe[0] - 1.0).abs() < 1e-15);
        assert_eq!(pe[1], 0.0);
        assert!((pe[2] - 0.468_995_593_589_281_2).abs() < 1e-12);
    }

    #[test]
    fn classify_ties_go_low() {
        let p = classify(&m(&[&[0.9, 0.1], &[0.5, 0.5]]));
        assert_eq!(p, vec![0, 0]);
        assert_eq!(classify(&m(&[&[0.2, 0.3, 0.5]])), vec![2]);
    }

    #[test]
    fn confusion_quadrants() {
        let pe = [0.2, 0.8, 0.9, 0.1];
        let pred = [1, 0, 1, 0];
        let labels = [1, 0, 0, 1];
        let ucm = uncertainty_confusion(&pe, &pred, &labels, 0.5).unwrap();
        assert_eq!((ucm.cc, ucm.cu, ucm.ic, ucm.iu), (1, 1, 1, 1));
        assert_eq!(ucm.threshold(), 0.5);
        assert_eq!(uacc(&ucm).unwrap(), 0.5);

        let all = uncertainty_confusion(&pe, &pred, &labels, 1.0).unwrap();
        assert_eq!((all.cu, all.iu), (0, 0));
        let none = uncertainty_confusion(&pe, &pred, &labels, 0.0).unwrap();
        assert_eq!((none.cc, none.ic), (0, 0));

        // boundary samples are uncertain
        let b = uncertainty_confusion(&[0.5], &[0], &[0], 0.5).unwrap();
        assert_eq!(b.cu, 1);

        assert!(uncertainty_confusion(&pe, &pred[..3], &labels, 0.5).is_err());
        assert!(uncertainty_confusion(&pe, &pred, &labels, 1.5).is_err());
    }

    #[test]
    fn uacc_extremes() {
        let certain = uncertainty_confusion(&[0.1, 0.2], &[0, 1], &[0, 1], 0.5).unwrap();
        assert_eq!(uacc(&certain).unwrap(), 1.0);
        let unsure = uncertainty_confusion(&[0.7, 0.9], &[0, 1], &[0, 1], 0.5).unwrap();
        assert_eq!(uacc(&unsure).unwrap(), 0.0);
        let empty = uncertainty_confusion(&[], &[], &[], 0.5).unwrap();
        assert!(uacc(&empty).is_err());
    }

    #[test]
    fn ece_examples() {
        // ten samples at confidence 0.8, eight correct
        let probs = Matrix::from_rows(&vec![[0.8, 0.2]; 10]).unwrap();
        let labels = [0, 0, 0, 0, 0, 0, 0, 0, 1, 1];
        assert!(ece(&probs, &labels, 10).unwrap().abs() < 1e-12);

        let probs = m(&[&[0.9, 0.1], &[0.9, 0.1], &[0.6, 0.4], &[0.6, 0.4]]);
        let labels = [0, 1, 0, 0];
        assert!((ece(&probs, &labels, 10).unwrap() - 0.4).abs() < 1e-12);

        assert_eq!(ece(&m(&[&[1.0, 0.0]]), &[0], 10).unwrap(), 0.0);
        assert!(ece(&probs, &labels, 0).is_err());
    }

    #[test]
    fn bin_edges_are_right_closed() {
        assert_eq!(confidence_bin(0.0, 10), 0);
        assert_eq!(confidence_bin(0.1, 10), 0);
        assert_eq!(confidence_bin(0.3, 10), 2);
        assert_eq!(confidence_bin(0.30000001, 10), 3);
        assert_eq!(confidence_bin(1.0, 10), 9);
        assert_eq!(confidence_bin(0.7, 1), 0);
        let bins = calibration_bins(&m(&[&[0.55, 0.45], &[0.95, 0.05]]), &[0, 1], 10).unwrap();
        assert_eq!(bins.total(), 2);
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(&[0, 1, 1], &[0, 1, 1]).unwrap(), 1.0);
        assert_eq!(accuracy(&[0, 1], &[1, 0]).unwrap(), 0.0);
        assert_eq!(accuracy(&[0, 1, 1, 0], &[0, 1, 0, 0]).unwrap(), 0.75);
        assert!(accuracy(&[], &[]).is_err());
    }

    #[test]
    fn auc_examples() {
        assert_eq!(roc_auc(&[0.1, 0.2, 0.8, 0.9], &[0, 0, 1, 1]).unwrap(), 1.0);
        assert_eq!(roc_auc(&[0.1, 0.4, 0.35, 0.8], &[0, 0, 1, 1]).unwrap(), 0.75);
        assert_eq!(roc_auc(&[0.3; 5], &[0, 1, 0, 1, 1]).unwrap(), 0.5);
        assert!(matches!(roc_auc(&[0.1, 0.2], &[1, 1]), Err(Error::UndefinedAuc)));
    }

    #[test]
    fn group_center_examples() {
        let g = group_centers(&[0.8, 0.2], &[1, 0], &[0, 0]).unwrap();
        assert_eq!(g.mu_incorrect, Some(0.8));
        assert_eq!(g.mu_correct, Some(0.2));
        assert!((g.distance.unwrap() - 0.6).abs() < 1e-15);

        let g = group_centers(&[0.4, 0.4], &[1, 0], &[0, 0]).unwrap();
        assert_eq!(g.distance, Some(0.0));

        let g = group_centers(&[0.1, 0.3], &[0, 1], &[0, 1]).unwrap();
        assert_eq!(g.mu_incorrect, None);
        assert_eq!(g.distance, None);
    }

    #[test]
    fn sweep_examples() {
        let pe = [0.05, 0.1, 0.2];
        let y = [0, 1, 1];
        let s = threshold_sweep(&pe, &y, &y, &[0.0, 1.0]).unwrap();
        assert_eq!(s, vec![(0.0, 0.0), (1.0, 1.0)]);

        let single = threshold_sweep(&pe, &y, &y, &[0.15]).unwrap();
        let direct = uacc(&uncertainty_confusion(&pe, &y, &y, 0.15).unwrap()).unwrap();
        assert_eq!(single, vec![(0.15, direct)]);

        // four-sample fixture over an 11-point grid, enumerated by hand
        let pe = [0.2, 0.8, 0.9, 0.1];
        let pred = [1, 0, 1, 0];
        let labels = [1, 0, 0, 1];
        let grid = linear_grid(0.0, 1.0, 0.1);
        assert_eq!(grid.len(), 11);
        // t <= 0.1: nothing certain, IU=2
        // t = 0.2: the 0.1 miss turns certain, IU=1
        // 0.3..=0.8: CC=1, IU=1
        // t = 0.9: CC=2, IU=1
        // t = 1.0: everything certain, CC=2
        let expect = [0.5, 0.5, 0.25, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.75, 0.5];
        let got = threshold_sweep(&pe, &pred, &labels, &grid).unwrap();
        for ((t, u), e) in got.iter().zip(expect) {
            assert!((u - e).abs() < 1e-12, "t={t}: {u} vs {e}");
        }
        assert!(threshold_sweep(&pe, &pred, &labels, &[]).is_err());
    }
}
