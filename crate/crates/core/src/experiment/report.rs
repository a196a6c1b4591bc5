use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::run::Comparison;
use super::Method;
use crate::error::{Error, Result};
use crate::hyperopt::Hyperparams;
use crate::metrics::threshold_sweep;

/// Metric columns, in report order.
pub const METRICS: [&str; 7] = ["accuracy", "auc", "uacc", "ece", "mu1", "mu2", "dist"];

/// Test-set metrics of one seed. `mu1`/`mu2` are the mean PE of
/// misclassified/correct samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub seed: u64,
    pub accuracy: f64,
    pub auc: Option<f64>,
    pub uacc: f64,
    pub ece: f64,
    pub mu1: Option<f64>,
    pub mu2: Option<f64>,
    pub dist: Option<f64>,
    pub hyperparams: Hyperparams,
}

impl SeedRecord {
    pub fn metric(&self, name: &str) -> Option<f64> {
        match name {
            "accuracy" => Some(self.accuracy),
            "auc" => self.auc,
            "uacc" => Some(self.uacc),
            "ece" => Some(self.ece),
            "mu1" => self.mu1,
            "mu2" => self.mu2,
            "dist" => self.dist,
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single value.
    pub std: f64,
    pub median: f64,
}

pub fn aggregate(values: &[f64]) -> Option<Aggregate> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k = sorted.len();
    let median = if k % 2 == 1 {
        sorted[k / 2]
    } else {
        0.5 * (sorted[k / 2 - 1] + sorted[k / 2])
    };
    Some(Aggregate { mean, std, median })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: Method,
    pub seeds: Vec<SeedRecord>,
}

impl MethodReport {
    pub fn new(method: Method, seeds: Vec<SeedRecord>) -> Self {
        MethodReport { method, seeds }
    }

    /// Aggregate of `metric` over the seeds where it is defined.
    pub fn aggregate(&self, metric: &str) -> Option<Aggregate> {
        let vals: Vec<f64> = self.seeds.iter().filter_map(|r| r.metric(metric)).collect();
        aggregate(&vals)
    }

    pub fn median(&self, metric: &str) -> Option<f64> {
        self.aggregate(metric).map(|a| a.median)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(Error::arg(format!("unknown report format {s:?} (expected csv or json)"))),
        }
    }
}

fn fmt6(v: f64) -> String {
    // Avoid printing "-0.000000".
    let v = if v.abs() < 5e-7 { 0.0 } else { v };
    format!("{v:.6}")
}

fn cell(v: Option<f64>) -> String {
    v.map(fmt6).unwrap_or_else(|| "NA".into())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Write `reports` as CSV (per-seed rows plus `mean`/`std`/`median` rows) or JSON.
pub fn emit_report(reports: &[MethodReport], path: impl AsRef<Path>, format: ReportFormat) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    let res = match format {
        ReportFormat::Csv => write_csv_report(&mut w, reports),
        ReportFormat::Json => write_json_report(&mut w, reports),
    };
    res.and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

fn write_csv_report(w: &mut impl Write, reports: &[MethodReport]) -> io::Result<()> {
    writeln!(w, "method,seed,agg,{},l1,l2,p1,p2", METRICS.join(","))?;
    for rep in reports {
        for r in &rep.seeds {
            let metrics: Vec<String> = METRICS.iter().map(|m| cell(r.metric(m))).collect();
            let h = &r.hyperparams;
            writeln!(
                w,
                "{},{},seed,{},{},{},{},{}",
                rep.method,
                r.seed,
                metrics.join(","),
                h.l1,
                h.l2,
                fmt6(h.p1),
                fmt6(h.p2)
            )?;
        }
        let aggs: Vec<Option<Aggregate>> = METRICS.iter().map(|m| rep.aggregate(m)).collect();
        type Pick = fn(&Aggregate) -> f64;
        let rows: [(&str, Pick); 3] = [("mean", |a| a.mean), ("std", |a| a.std), ("median", |a| a.median)];
        for (name, pick) in rows {
            let cells: Vec<String> = aggs.iter().map(|a| cell(a.as_ref().map(pick))).collect();
            writeln!(w, "{},NA,{},{},NA,NA,NA,NA", rep.method, name, cells.join(","))?;
        }
    }
    Ok(())
}

fn opt_json(v: Option<f64>) -> Value {
    v.map(Value::from).unwrap_or(Value::Null)
}

fn write_json_report(w: &mut impl Write, reports: &[MethodReport]) -> io::Result<()> {
    let mut methods = Map::new();
    for rep in reports {
        let seeds: Vec<Value> = rep
            .seeds
            .iter()
            .map(|r| {
                let mut o = Map::new();
                o.insert("seed".into(), json!(r.seed));
                for m in METRICS {
                    o.insert(m.into(), opt_json(r.metric(m)));
                }
                o.insert("l1".into(), json!(r.hyperparams.l1));
                o.insert("l2".into(), json!(r.hyperparams.l2));
                o.insert("p1".into(), json!(r.hyperparams.p1));
                o.insert("p2".into(), json!(r.hyperparams.p2));
                Value::Object(o)
            })
            .collect();
        let mut agg = Map::new();
        for m in METRICS {
            let v = match rep.aggregate(m) {
                Some(a) => json!({"mean": a.mean, "std": a.std, "median": a.median}),
                None => Value::Null,
            };
            agg.insert(m.into(), v);
        }
        methods.insert(rep.method.name().into(), json!({"seeds": seeds, "aggregate": agg}));
    }
    let doc = json!({ "methods": methods });
    let mut ser = serde_json::Serializer::with_formatter(&mut *w, SixDecimals::default());
    doc.serialize(&mut ser).map_err(io::Error::other)?;
    writeln!(w)
}

/// Pretty JSON with every float written to 6 decimals.
#[derive(Default)]
struct SixDecimals(serde_json::ser::PrettyFormatter<'static>);

impl serde_json::ser::Formatter for SixDecimals {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(fmt6(v).as_bytes())
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// `method,threshold,uacc` with the median over seeds, one row per (method, threshold).
pub fn emit_threshold_curve(cmp: &Comparison, grid: &[f64], path: impl AsRef<Path>) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::arg("threshold grid is empty"));
    }
    let mut rows = Vec::new();
    for (method, runs) in &cmp.runs {
        let mut per_seed: Vec<Vec<f64>> = vec![Vec::with_capacity(runs.len()); grid.len()];
        for run in runs {
            let o = &run.outputs;
            for (k, (_, u)) in threshold_sweep(&o.pe, &o.predicted, &o.labels, grid)?.into_iter().enumerate() {
                per_seed[k].push(u);
            }
        }
        for (k, &t) in grid.iter().enumerate() {
            rows.push((*method, t, super::aggregate(&per_seed[k]).map(|a| a.median)));
        }
    }
    let path = path.as_ref();
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "method,threshold,uacc").map_err(io)?;
    for (m, t, u) in rows {
        writeln!(w, "{m},{},{}", fmt6(t), cell(u)).map_err(io)?;
    }
    w.flush().map_err(io)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub low: f64,
    pub high: f64,
    pub correct: usize,
    pub incorrect: usize,
}

/// Equal-width PE bins on `[0, 1]`; the last bin is closed.
pub fn pe_histogram(pe: &[f64], predicted: &[usize], labels: &[usize], bins: usize) -> Result<Vec<HistogramBin>> {
    if bins == 0 {
        return Err(Error::arg("histogram needs at least one bin"));
    }
    if pe.len() != predicted.len() || pe.len() != labels.len() {
        return Err(Error::shape("pe_histogram: length mismatch"));
    }
    let mut out: Vec<HistogramBin> = (0..bins)
        .map(|k| HistogramBin {
            low: k as f64 / bins as f64,
            high: (k + 1) as f64 / bins as f64,
            correct: 0,
            incorrect: 0,
        })
        .collect();
    for ((&h, &p), &y) in pe.iter().zip(predicted).zip(labels) {
        let k = ((h.clamp(0.0, 1.0) * bins as f64) as usize).min(bins - 1);
        if p == y {
            out[k].correct += 1;
        } else {
            out[k].incorrect += 1;
        }
    }
    Ok(out)
}

pub fn emit_pe_histogram(
    pe: &[f64],
    predicted: &[usize],
    labels: &[usize],
    bins: usize,
    path: impl AsRef<Path>,
) -> Result<()> {
    let hist = pe_histogram(pe, predicted, labels, bins)?;
    let path = path.as_ref();
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "bin_low,bin_high,correct_count,incorrect_count").map_err(io)?;
    for b in hist {
        writeln!(w, "{},{},{},{}", fmt6(b.low), fmt6(b.high), b.correct, b.incorrect).map_err(io)?;
    }
    w.flush().map_err(io)
}
