//! Classification metrics over the three labels.

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};

const K: usize = Label::COUNT;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    /// Mean F1 over labels that occur in the gold or predicted labels.
    pub macro_f1: f64,
    /// Indexed by [`Label::index`].
    pub per_class: [ClassMetrics; K],
    /// `confusion[gold][predicted]`.
    pub confusion: [[usize; K]; K],
    pub total: usize,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

impl Metrics {
    pub fn compute(gold: &[Label], predicted: &[Label]) -> Result<Self> {
        if gold.is_empty() {
            return Err(Error::InvalidInput("cannot evaluate on an empty test set".into()));
        }
        if gold.len() != predicted.len() {
            return Err(Error::DimensionMismatch {
                expected: gold.len(),
                got: predicted.len(),
            });
        }
        let mut confusion = [[0usize; K]; K];
        for (g, p) in gold.iter().zip(predicted) {
            confusion[g.index()][p.index()] += 1;
        }
        let total = gold.len();
        let correct: usize = (0..K).map(|k| confusion[k][k]).sum();
        let mut per_class = [ClassMetrics::default(); K];
        let mut f1_sum = 0.0;
        let mut seen = 0;
        for k in 0..K {
            let tp = confusion[k][k];
            let support: usize = confusion[k].iter().sum();
            let predicted_k: usize = (0..K).map(|g| confusion[g][k]).sum();
            let precision = ratio(tp, predicted_k);
            let recall = ratio(tp, support);
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            per_class[k] = ClassMetrics {
                precision,
                recall,
                f1,
                support,
            };
            if support + predicted_k > 0 {
                f1_sum += f1;
                seen += 1;
            }
        }
        Ok(Self {
            accuracy: ratio(correct, total),
            macro_f1: f1_sum / seen as f64,
            per_class,
            confusion,
            total,
        })
    }

    pub fn class(&self, label: Label) -> &ClassMetrics {
        &self.per_class[label.index()]
    }

    /// Plain-text summary with the confusion matrix.
    pub fn to_text(&self) -> String {
        let mut s = format!("accuracy  {:.4}\nmacro_f1  {:.4}\n\n", self.accuracy, self.macro_f1);
        s.push_str(&format!(
            "{:<14} {:>9} {:>9} {:>9} {:>8}\n",
            "label", "precision", "recall", "f1", "support"
        ));
        for l in Label::ALL {
            let c = self.class(l);
            s.push_str(&format!(
                "{:<14} {:>9.4} {:>9.4} {:>9.4} {:>8}\n",
                l.name(),
                c.precision,
                c.recall,
                c.f1,
                c.support
            ));
        }
        s.push_str("\nconfusion (rows gold, columns predicted)\n");
        s.push_str(&format!("{:<14}", ""));
        for l in Label::ALL {
            s.push_str(&format!(" {:>13}", l.name()));
        }
        s.push('\n');
        for g in Label::ALL {
            s.push_str(&format!("{:<14}", g.name()));
            for p in Label::ALL {
                s.push_str(&format!(" {:>13}", self.confusion[g.index()][p.index()]));
            }
            s.push('\n');
        }
        s
    }
}
