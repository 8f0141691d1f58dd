//! Evaluation reports: a flat `key value` text format plus a human table.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    Disambiguation,
    SentenceSimilarity,
    Paraphrase,
    DialogueActs,
}

impl Task {
    pub const ALL: [Task; 4] = [
        Task::Disambiguation,
        Task::SentenceSimilarity,
        Task::Paraphrase,
        Task::DialogueActs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Disambiguation => "disambiguation",
            Task::SentenceSimilarity => "sentence-similarity",
            Task::Paraphrase => "paraphrase",
            Task::DialogueActs => "dialogue-acts",
        }
    }

    /// Correlation tasks report ρ; the others report accuracy and F.
    pub fn is_correlation(self) -> bool {
        matches!(self, Task::Disambiguation | Task::SentenceSimilarity)
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        Task::ALL.into_iter().find(|t| t.name() == norm).ok_or_else(|| {
            let names: Vec<&str> = Task::ALL.iter().map(|t| t.name()).collect();
            Error::InvalidArgument(format!("unknown task '{s}' (valid: {})", names.join(", ")))
        })
    }
}

/// One scored item of a correlation task.
#[derive(Debug, Clone, PartialEq)]
pub struct ItemScore {
    /// Whitespace-free identifier, e.g. `verb|subject|object|landmark`.
    pub key: String,
    pub human: f64,
    pub model: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub task: Task,
    pub method: String,
    pub space_id: String,
    /// Metric values in emission order.
    pub metrics: Vec<(String, f64)>,
    pub hyperparameters: Vec<(String, String)>,
    pub evaluated: usize,
    pub excluded: usize,
    /// Correct decisions on the test set (classification tasks).
    pub correct: Option<u64>,
    pub n_test: Option<u64>,
    pub items: Vec<ItemScore>,
}

impl EvaluationReport {
    pub fn new(task: Task, method: impl Into<String>) -> Self {
        EvaluationReport {
            task,
            method: method.into(),
            space_id: "unnamed".into(),
            metrics: Vec::new(),
            hyperparameters: Vec::new(),
            evaluated: 0,
            excluded: 0,
            correct: None,
            n_test: None,
            items: Vec::new(),
        }
    }

    pub fn with_space_id(mut self, id: impl Into<String>) -> Self {
        let id: String = id.into();
        self.space_id = if id.trim().is_empty() {
            "unnamed".into()
        } else {
            id.split_whitespace().collect::<Vec<_>>().join("_")
        };
        self
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    pub fn hyperparameter(&self, name: &str) -> Option<&str> {
        self.hyperparameters
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }

    pub(crate) fn push_metric(&mut self, name: &str, value: f64) {
        self.metrics.push((name.to_string(), value));
    }

    pub(crate) fn push_hyper(&mut self, name: &str, value: impl ToString) {
        self.hyperparameters.push((name.to_string(), value.to_string()));
    }

    /// Machine-readable form. Floats use Rust's shortest round-trip
    /// formatting, so `1.0` prints as `1.0` and parses back bit-exactly.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "task {}", self.task);
        let _ = writeln!(out, "method {}", self.method);
        let _ = writeln!(out, "space {}", self.space_id);
        for (k, v) in &self.metrics {
            let _ = writeln!(out, "{k} {v:?}");
        }
        for (k, v) in &self.hyperparameters {
            let _ = writeln!(out, "{k} {v}");
        }
        let _ = writeln!(out, "evaluated {}", self.evaluated);
        let _ = writeln!(out, "excluded {}", self.excluded);
        if let Some(c) = self.correct {
            let _ = writeln!(out, "correct {c}");
        }
        if let Some(n) = self.n_test {
            let _ = writeln!(out, "n_test {n}");
        }
        for item in &self.items {
            let _ = writeln!(out, "item {} {:?} {:?}", item.key, item.human, item.model);
        }
        out
    }

    /// Inverse of [`to_key_value`](Self::to_key_value). Keys in
    /// [`METRIC_KEYS`] are metrics; other unrecognised keys are hyperparameters.
    pub fn parse(text: &str) -> Result<Self> {
        let mut task = None;
        let mut report = EvaluationReport::new(Task::Disambiguation, "");
        let mut have_method = false;
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once(' ')
                .map(|(k, v)| (k, v.trim()))
                .ok_or_else(|| Error::parse(line_no, "expected 'key value'"))?;
            let int = |v: &str| {
                v.parse::<u64>()
                    .map_err(|_| Error::parse(line_no, format!("'{key}' needs a non-negative integer")))
            };
            match key {
                "task" => task = Some(value.parse::<Task>().map_err(|e| Error::parse(line_no, e.to_string()))?),
                "method" => {
                    report.method = value.to_string();
                    have_method = true;
                }
                "space" => report.space_id = value.to_string(),
                "evaluated" => report.evaluated = int(value)? as usize,
                "excluded" => report.excluded = int(value)? as usize,
                "correct" => report.correct = Some(int(value)?),
                "n_test" => report.n_test = Some(int(value)?),
                "item" => {
                    let parts: Vec<&str> = value.split_whitespace().collect();
                    let [k, h, m] = parts[..] else {
                        return Err(Error::parse(line_no, "item lines are 'item <key> <human> <model>'"));
                    };
                    let num = |s: &str| {
                        s.parse::<f64>()
                            .map_err(|_| Error::parse(line_no, format!("'{s}' is not a number")))
                    };
                    report.items.push(ItemScore {
                        key: k.to_string(),
                        human: num(h)?,
                        model: num(m)?,
                    });
                }
                k if METRIC_KEYS.contains(&k) => {
                    let v = value
                        .parse::<f64>()
                        .map_err(|_| Error::parse(line_no, format!("metric '{k}' needs a number")))?;
                    report.metrics.push((k.to_string(), v));
                }
                _ => report.hyperparameters.push((key.to_string(), value.to_string())),
            }
        }
        report.task = task.ok_or_else(|| Error::parse(0, "report has no 'task' line"))?;
        if !have_method {
            return Err(Error::parse(0, "report has no 'method' line"));
        }
        Ok(report)
    }

    /// Aligned two-column table for terminals.
    pub fn to_table(&self) -> String {
        let mut rows: Vec<(String, String)> = vec![
            ("task".into(), self.task.to_string()),
            ("method".into(), self.method.clone()),
            ("space".into(), self.space_id.clone()),
        ];
        rows.extend(self.metrics.iter().map(|(k, v)| (k.clone(), format!("{v:.4}"))));
        rows.extend(self.hyperparameters.iter().cloned());
        rows.push(("evaluated".into(), self.evaluated.to_string()));
        rows.push(("excluded".into(), self.excluded.to_string()));
        if let (Some(c), Some(n)) = (self.correct, self.n_test) {
            rows.push(("correct".into(), format!("{c}/{n}")));
        }
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in rows {
            let _ = writeln!(out, "{k:<width$}  {v}");
        }
        out
    }
}

pub const METRIC_KEYS: &[&str] = &["rho", "accuracy", "precision", "recall", "fscore", "dev_accuracy"];
