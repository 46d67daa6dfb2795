use std::fmt::Write;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub seed: u64,
    pub dataset: String,
    pub num_graphs: usize,
    pub encoder: String,
    pub beta: f64,
    pub recall_n: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccPoint {
    pub r: f64,
    pub acc: f64,
    pub acc_std: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: String,
    pub acc_curve: Vec<AccPoint>,
    pub acc_auc: f64,
    /// Mean and standard deviation over graphs; absent without ground truth.
    pub recall_mean: Option<f64>,
    pub recall_std: Option<f64>,
    /// Wall time spent producing the explanations. Not part of the
    /// reproducible outputs.
    #[serde(skip)]
    pub runtime_s: f64,
}

/// Everything `evaluate` measures for one dataset and encoder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub meta: ReportMeta,
    pub methods: Vec<MethodReport>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

impl MetricReport {
    /// `method,r,acc,acc_std`, one row per method and ratio.
    pub fn curve_csv(&self) -> String {
        let mut out = String::from("method,r,acc,acc_std\n");
        for m in &self.methods {
            for p in &m.acc_curve {
                let _ = writeln!(out, "{},{:.1},{:.6},{:.6}", m.method, p.r, p.acc, p.acc_std);
            }
        }
        out
    }

    /// `method,acc_auc,recall_at_<n>,recall_std`, one row per method.
    pub fn summary_csv(&self) -> String {
        let mut out = format!(
            "method,acc_auc,recall_at_{n},recall_std\n",
            n = self.meta.recall_n
        );
        for m in &self.methods {
            let _ = writeln!(
                out,
                "{},{:.6},{},{}",
                m.method,
                m.acc_auc,
                opt(m.recall_mean),
                opt(m.recall_std)
            );
        }
        out
    }

    /// `method,runtime_s`; wall-clock, so it differs between runs.
    pub fn timing_csv(&self) -> String {
        let mut out = String::from("method,runtime_s\n");
        for m in &self.methods {
            let _ = writeln!(out, "{},{:.3}", m.method, m.runtime_s);
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn method(&self, name: &str) -> Option<&MethodReport> {
        self.methods.iter().find(|m| m.method == name)
    }
}
