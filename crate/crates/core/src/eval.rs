//! Confusion counts and mean intersection-over-union.
//!
//! Ground-truth label 0 (unannotated) is excluded entirely. Predictions of
//! 0 on annotated vertices (possible for vertices no window sampled) count
//! as false negatives for the true class.

use crate::error::{Error, Result};

/// Confusion counts over 1-based class ids. Row = ground truth class,
/// column = predicted class; column 0 collects annotated vertices with no
/// prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    pub num_classes: usize,
    /// (num_classes) x (num_classes + 1), row-major; column 0 = predicted
    /// unannotated/no-prediction.
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(num_classes: usize) -> Self {
        ConfusionMatrix { num_classes, counts: vec![0; num_classes * (num_classes + 1)] }
    }

    pub fn from_labels(predictions: &[u16], ground_truth: &[u16], num_classes: usize) -> Result<Self> {
        if predictions.len() != ground_truth.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} predictions vs {} ground-truth labels",
                predictions.len(),
                ground_truth.len()
            )));
        }
        let mut m = ConfusionMatrix::new(num_classes);
        for (&pred, &gt) in predictions.iter().zip(ground_truth) {
            if gt == 0 {
                continue;
            }
            if gt as usize > num_classes || pred as usize > num_classes {
                return Err(Error::ShapeMismatch(format!(
                    "label outside [0, {num_classes}]: gt {gt}, pred {pred}"
                )));
            }
            m.counts[(gt as usize - 1) * (num_classes + 1) + pred as usize] += 1;
        }
        Ok(m)
    }

    pub fn count(&self, gt_class: u16, pred_class: u16) -> u64 {
        self.counts[(gt_class as usize - 1) * (self.num_classes + 1) + pred_class as usize]
    }

    /// Total annotated vertices counted.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn true_positives(&self, class: u16) -> u64 {
        self.count(class, class)
    }

    pub fn false_negatives(&self, class: u16) -> u64 {
        (0..=self.num_classes as u16)
            .filter(|&p| p != class)
            .map(|p| self.count(class, p))
            .sum()
    }

    pub fn false_positives(&self, class: u16) -> u64 {
        (1..=self.num_classes as u16)
            .filter(|&g| g != class)
            .map(|g| self.count(g, class))
            .sum()
    }
}

/// Per-class IoU report.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassIou {
    pub class: u16,
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    /// `None` when the class is absent from both prediction and truth.
    pub iou: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiouReport {
    pub classes: Vec<ClassIou>,
    pub mean_iou: f64,
    pub confusion: ConfusionMatrix,
}

/// Mean IoU over classes present in prediction or ground truth:
/// IoU_c = TP / (TP + FP + FN). Vertices with ground truth 0 are excluded;
/// classes absent from both sides are excluded from the mean.
pub fn evaluate_miou(
    predictions: &[u16],
    ground_truth: &[u16],
    num_classes: usize,
) -> Result<MiouReport> {
    let confusion = ConfusionMatrix::from_labels(predictions, ground_truth, num_classes)?;
    if confusion.total() == 0 {
        return Err(Error::NoAnnotatedVertices);
    }
    let mut classes = Vec::with_capacity(num_classes);
    let mut sum = 0.0;
    let mut included = 0usize;
    for c in 1..=num_classes as u16 {
        let tp = confusion.true_positives(c);
        let fp = confusion.false_positives(c);
        let fn_ = confusion.false_negatives(c);
        let iou = if tp + fp + fn_ == 0 {
            None
        } else {
            Some(tp as f64 / (tp + fp + fn_) as f64)
        };
        if let Some(v) = iou {
            sum += v;
            included += 1;
        }
        classes.push(ClassIou { class: c, tp, fp, fn_, iou });
    }
    let mean_iou = if included > 0 { sum / included as f64 } else { 0.0 };
    Ok(MiouReport { classes, mean_iou, confusion })
}

/// Text report: one line per class `name iou tp fp fn`, then
/// `miou <value>` with 4 decimals. Classes absent from both sides print
/// `-` for the IoU.
pub fn format_report(report: &MiouReport, class_names: &[String]) -> String {
    let mut out = String::new();
    for c in &report.classes {
        let name = class_names
            .get((c.class - 1) as usize)
            .cloned()
            .unwrap_or_else(|| format!("class{:02}", c.class));
        match c.iou {
            Some(iou) => {
                out.push_str(&format!("{name} {iou:.4} {} {} {}\n", c.tp, c.fp, c.fn_))
            }
            None => out.push_str(&format!("{name} - {} {} {}\n", c.tp, c.fp, c.fn_)),
        }
    }
    out.push_str(&format!("miou {:.4}\n", report.mean_iou));
    out
}

/// Predictions file: one integer class id per line, vertex order.
pub fn format_predictions(predictions: &[u16]) -> String {
    let mut out = String::with_capacity(predictions.len() * 3);
    for p in predictions {
        out.push_str(&p.to_string());
        out.push('\n');
    }
    out
}

pub fn parse_predictions(text: &str) -> Result<Vec<u16>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse::<u16>()
                .map_err(|_| Error::InvalidFormat(format!("line {}: invalid label '{l}'", i + 1)))
        })
        .collect()
}
