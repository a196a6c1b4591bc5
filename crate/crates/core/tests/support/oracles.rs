//! Brute-force metric oracles: explicit enumeration, no shared code with the
//! library.

pub fn oracle_pe(row: &[f64]) -> f64 {
    let mut h = 0.0;
    for &p in row {
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    h / (row.len() as f64).log2()
}

pub fn oracle_argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for k in 1..row.len() {
        if row[k] > row[best] {
            best = k;
        }
    }
    best
}

pub fn oracle_bin(conf: f64, m: usize) -> usize {
    for k in 0..m {
        let lo = k as f64 / m as f64;
        let hi = (k + 1) as f64 / m as f64;
        if conf > lo && conf <= hi {
            return k;
        }
    }
    0
}

pub fn oracle_ece(rows: &[Vec<f64>], labels: &[usize], m: usize) -> f64 {
    let n = rows.len() as f64;
    let mut total = 0.0;
    for k in 0..m {
        let members: Vec<usize> = (0..rows.len())
            .filter(|&i| oracle_bin(rows[i][oracle_argmax(&rows[i])], m) == k)
            .collect();
        if members.is_empty() {
            continue;
        }
        let acc = members.iter().filter(|&&i| oracle_argmax(&rows[i]) == labels[i]).count() as f64
            / members.len() as f64;
        let conf = members.iter().map(|&i| rows[i][oracle_argmax(&rows[i])]).sum::<f64>() / members.len() as f64;
        total += members.len() as f64 / n * (acc - conf).abs();
    }
    total
}

pub fn oracle_auc(scores: &[f64], labels: &[usize]) -> Option<f64> {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for i in 0..scores.len() {
        for j in 0..scores.len() {
            if labels[i] == 1 && labels[j] == 0 {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
    }
    (pairs > 0.0).then(|| wins / pairs)
}
