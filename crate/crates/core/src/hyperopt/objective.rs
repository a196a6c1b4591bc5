use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::space::SearchSpace;
use crate::error::{Error, Result};

/// Something to minimize. Every optimizer only ever passes points inside
/// the search space bounds.
pub trait Objective {
    fn evaluate(&mut self, x: &[f64]) -> f64;
}

impl<F: FnMut(&[f64]) -> f64> Objective for F {
    fn evaluate(&mut self, x: &[f64]) -> f64 {
        self(x)
    }
}

/// Best-so-far snapshot after one optimizer iteration. Row 0 describes the
/// initial design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub best_fitness: f64,
    pub best_x: Vec<f64>,
    pub evaluations: usize,
    /// Optimizer-specific control value (GWO's `a`).
    pub control: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best_x: Vec<f64>,
    pub best_fitness: f64,
    pub trace: Vec<TraceRow>,
    pub evaluations: usize,
}

/// Tracks the incumbent and emits trace rows.
#[derive(Debug)]
pub(crate) struct Incumbent {
    pub best_x: Vec<f64>,
    pub best_fitness: f64,
    pub evaluations: usize,
    pub trace: Vec<TraceRow>,
}

impl Incumbent {
    pub fn new() -> Self {
        Incumbent {
            best_x: Vec::new(),
            best_fitness: f64::INFINITY,
            evaluations: 0,
            trace: Vec::new(),
        }
    }

    /// Evaluate through the objective and update the incumbent. Non-finite
    /// values are treated as `+inf`, so they never become the incumbent.
    pub fn eval(&mut self, obj: &mut dyn Objective, x: &[f64]) -> f64 {
        let f = obj.evaluate(x);
        let f = if f.is_nan() { f64::INFINITY } else { f };
        self.evaluations += 1;
        if f < self.best_fitness || self.best_x.is_empty() {
            self.best_fitness = f;
            self.best_x = x.to_vec();
        }
        f
    }

    pub fn record(&mut self, iteration: usize, control: Option<f64>, note: Option<String>) {
        self.trace.push(TraceRow {
            iteration,
            best_fitness: self.best_fitness,
            best_x: self.best_x.clone(),
            evaluations: self.evaluations,
            control,
            note,
        });
    }

    pub fn finish(self) -> SearchResult {
        SearchResult {
            best_x: self.best_x,
            best_fitness: self.best_fitness,
            trace: self.trace,
            evaluations: self.evaluations,
        }
    }
}

/// `iteration,best_fitness,<dim names...>,evaluations,note`
pub fn write_trace_csv(result: &SearchResult, space: &SearchSpace, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    let names: Vec<&str> = space.names().collect();
    writeln!(w, "iteration,best_fitness,{},evaluations,note", names.join(",")).map_err(io)?;
    for row in &result.trace {
        let xs: Vec<String> = row.best_x.iter().map(|v| format!("{v:.6}")).collect();
        writeln!(
            w,
            "{},{:.6},{},{},{}",
            row.iteration,
            row.best_fitness,
            xs.join(","),
            row.evaluations,
            row.note.as_deref().unwrap_or("")
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}
