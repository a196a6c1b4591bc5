use std::fs;
use std::path::Path;

use mcdopt::data::{make_circles, write_csv};
use mcdopt::experiment::{
    emit_pe_histogram, emit_report, emit_threshold_curve, prepare, run_comparison, search_hyperparams, Comparison,
    Method, MethodReport, ReportFormat, SeedRun, METRICS,
};
use mcdopt::hyperopt::{decode, write_trace_csv};
use mcdopt::metrics::linear_grid;
use mcdopt::{Error, Result};

use crate::cli::{Cli, Cmd, CompareArgs, DataKind, GenDataArgs, OptimizeArgs, RunArgs};

pub fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Cmd::GenData(a) => gen_data(&a),
        Cmd::Run(a) => run(&a),
        Cmd::Compare(a) => compare(&a),
        Cmd::Optimize(a) => optimize(&a),
    }
}

fn gen_data(a: &GenDataArgs) -> Result<()> {
    let ds = match a.kind {
        DataKind::Circles => make_circles(a.n, a.noise, a.factor, a.seed)?,
    };
    write_csv(&ds, &a.out)?;
    println!("wrote {} rows to {}", ds.len(), a.out.display());
    Ok(())
}

fn out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn threshold_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::Argument(format!("threshold step {step} must lie in (0, 1]")));
    }
    Ok(linear_grid(0.0, 1.0, step))
}

fn summarize(rep: &MethodReport) {
    for m in METRICS {
        match rep.aggregate(m) {
            Some(a) => println!(
                "{:<8} {:<9} median {:.4}  mean {:.4}  std {:.4}",
                rep.method.name(),
                m,
                a.median,
                a.mean,
                a.std
            ),
            None => println!("{:<8} {:<9} NA", rep.method.name(), m),
        }
    }
}

fn pooled(runs: &[SeedRun]) -> (Vec<f64>, Vec<usize>, Vec<usize>) {
    let mut pe = Vec::new();
    let mut pred = Vec::new();
    let mut labels = Vec::new();
    for r in runs {
        pe.extend_from_slice(&r.outputs.pe);
        pred.extend_from_slice(&r.outputs.predicted);
        labels.extend_from_slice(&r.outputs.labels);
    }
    (pe, pred, labels)
}

fn write_traces(cmp: &Comparison, dir: &Path, space: &mcdopt::hyperopt::SearchSpace) -> Result<()> {
    for (m, runs) in &cmp.runs {
        for r in runs {
            if let Some(s) = &r.search {
                let trace_dir = dir.join("traces");
                out_dir(&trace_dir)?;
                write_trace_csv(&s.result, space, trace_dir.join(format!("{m}_seed{}.csv", r.record.seed)))?;
            }
        }
    }
    Ok(())
}

fn write_reports(cmp: &Comparison, dir: &Path, step: f64, pe_bins: usize, per_method_hist: bool) -> Result<()> {
    let grid = threshold_grid(step)?;
    let reports = cmp.reports();
    emit_report(&reports, dir.join("report.csv"), ReportFormat::Csv)?;
    emit_report(&reports, dir.join("report.json"), ReportFormat::Json)?;
    emit_threshold_curve(cmp, &grid, dir.join("thresholds.csv"))?;
    for (m, runs) in &cmp.runs {
        let (pe, pred, labels) = pooled(runs);
        let name = if per_method_hist {
            format!("pe_hist_{m}.csv")
        } else {
            "pe_hist.csv".to_string()
        };
        emit_pe_histogram(&pe, &pred, &labels, pe_bins, dir.join(name))?;
    }
    for rep in &reports {
        summarize(rep);
    }
    Ok(())
}

fn run(a: &RunArgs) -> Result<()> {
    let method = Method::from(a.method);
    let cfg = a.exp.to_config(method, a.seeds.list());
    out_dir(&a.out_dir)?;
    let cmp = run_comparison(&cfg, &[method], a.exp.jobs)?;
    write_traces(&cmp, &a.out_dir, &cfg.search_space)?;
    write_reports(&cmp, &a.out_dir, a.threshold_step, a.pe_bins, false)
}

fn compare(a: &CompareArgs) -> Result<()> {
    let cfg = a.exp.to_config(Method::Mcd, a.seeds.list());
    out_dir(&a.out_dir)?;
    let cmp = run_comparison(&cfg, &Method::ALL, a.exp.jobs)?;
    write_traces(&cmp, &a.out_dir, &cfg.search_space)?;
    write_reports(&cmp, &a.out_dir, a.threshold_step, a.pe_bins, true)
}

fn optimize(a: &OptimizeArgs) -> Result<()> {
    let kind = a.optimizer.into();
    let method = match kind {
        mcdopt::hyperopt::OptimizerKind::Gwo => Method::McdGwo,
        mcdopt::hyperopt::OptimizerKind::Bo => Method::McdBo,
        mcdopt::hyperopt::OptimizerKind::Pso => Method::McdPso,
    };
    let cfg = a.exp.to_config(method, vec![a.seed]);
    cfg.validate()?;
    out_dir(&a.out_dir)?;
    let prepared = prepare(&cfg, a.seed)?;
    let outcome = search_hyperparams(&prepared.train, &cfg, kind, a.seed)?;
    let path = a.out_dir.join("trace.csv");
    write_trace_csv(&outcome.result, &cfg.search_space, &path)?;
    let h = decode(&outcome.best.candidate.lambda, &cfg.search_space)?;
    println!("optimizer {kind}");
    println!("best l1={} l2={} p1={:.6} p2={:.6}", h.l1, h.l2, h.p1, h.p2);
    println!("best fitness {:.6}", outcome.best.fitness);
    println!(
        "evaluations {} ({} distinct configurations)",
        outcome.result.evaluations, outcome.distinct_evaluations
    );
    println!("trace {}", path.display());
    Ok(())
}
