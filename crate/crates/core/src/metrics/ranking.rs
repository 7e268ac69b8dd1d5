use std::cmp::Ordering;

use super::MetricsError;

/// Scored binary labels grouped by distinct score.
///
/// Equal scores always form one step of the precision-recall and ROC curves,
/// so results do not depend on the order of tied cells. Large numbers of
/// identically scored cells (typically the implicit zero-score negatives of a
/// sparse prediction) can be added in bulk with [`ScoreTally::add_many`].
#[derive(Debug, Clone, Default)]
pub struct ScoreTally {
    entries: Vec<(f64, u64, u64)>,
    groups: Option<Vec<Group>>,
}

#[derive(Debug, Clone, Copy)]
struct Group {
    score: f64,
    positives: u64,
    negatives: u64,
}

/// One point on the precision-recall curve, at threshold `score >= threshold`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
}

impl ScoreTally {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: &[(f64, bool)]) -> Result<Self, MetricsError> {
        let mut tally = Self::new();
        for &(score, label) in pairs {
            tally.add(score, label)?;
        }
        Ok(tally)
    }

    pub fn add(&mut self, score: f64, positive: bool) -> Result<(), MetricsError> {
        self.add_many(score, positive, 1)
    }

    pub fn add_many(&mut self, score: f64, positive: bool, count: u64) -> Result<(), MetricsError> {
        if !score.is_finite() {
            return Err(MetricsError::NonFiniteScore(score));
        }
        if count > 0 {
            let (p, n) = if positive { (count, 0) } else { (0, count) };
            self.entries.push((score, p, n));
            self.groups = None;
        }
        Ok(())
    }

    /// Folds another tally into this one.
    pub fn merge(&mut self, other: &ScoreTally) {
        self.entries.extend_from_slice(&other.entries);
        self.groups = None;
    }

    pub fn positives(&self) -> u64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn negatives(&self) -> u64 {
        self.entries.iter().map(|e| e.2).sum()
    }

    /// Distinct-score groups, highest score first.
    fn groups(&mut self) -> &[Group] {
        if self.groups.is_none() {
            let mut sorted = self.entries.clone();
            sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
            let mut groups: Vec<Group> = Vec::new();
            for (score, p, n) in sorted {
                match groups.last_mut() {
                    // -0.0 and 0.0 are the same threshold
                    Some(g) if g.score.partial_cmp(&score) == Some(Ordering::Equal) => {
                        g.positives += p;
                        g.negatives += n;
                    }
                    _ => groups.push(Group {
                        score,
                        positives: p,
                        negatives: n,
                    }),
                }
            }
            self.groups = Some(groups);
        }
        self.groups.as_deref().unwrap()
    }

    /// Precision-recall points, one per distinct score, highest first.
    pub fn pr_curve(&mut self) -> Result<Vec<PrPoint>, MetricsError> {
        let total_pos = self.positives();
        if total_pos == 0 {
            return Err(MetricsError::NoPositives);
        }
        let mut tp = 0u64;
        let mut fp = 0u64;
        Ok(self
            .groups()
            .iter()
            .map(|g| {
                tp += g.positives;
                fp += g.negatives;
                PrPoint {
                    threshold: g.score,
                    precision: tp as f64 / (tp + fp) as f64,
                    recall: tp as f64 / total_pos as f64,
                }
            })
            .collect())
    }

    /// Step-wise area under the precision-recall curve:
    /// `sum_k (R_k - R_{k-1}) * P_k`.
    pub fn average_precision(&mut self) -> Result<f64, MetricsError> {
        let mut prev_recall = 0.0;
        let mut ap = 0.0;
        for p in self.pr_curve()? {
            ap += (p.recall - prev_recall) * p.precision;
            prev_recall = p.recall;
        }
        Ok(ap)
    }

    /// Mann-Whitney estimate of the ROC AUC; tied pairs count one half.
    pub fn roc_auc(&mut self) -> Result<f64, MetricsError> {
        let (pos, neg) = (self.positives(), self.negatives());
        if pos == 0 || neg == 0 {
            return Err(MetricsError::DegenerateLabels);
        }
        let mut correct = 0.0;
        let mut negatives_below = neg;
        for g in self.groups().to_vec() {
            negatives_below -= g.negatives;
            correct += g.positives as f64 * (negatives_below as f64 + 0.5 * g.negatives as f64);
        }
        Ok(correct / (pos as f64 * neg as f64))
    }

    /// Maximum F1 over the precision-recall points and the lowest threshold
    /// attaining it.
    pub fn best_f1(&mut self) -> Result<(f64, f64), MetricsError> {
        let total_pos = self.positives();
        if total_pos == 0 {
            return Err(MetricsError::NoPositives);
        }
        let mut tp = 0u64;
        let mut fp = 0u64;
        let mut best = (f64::NEG_INFINITY, f64::NAN);
        for g in self.groups().to_vec() {
            tp += g.positives;
            fp += g.negatives;
            let f1 = 2.0 * tp as f64 / (tp + fp + total_pos) as f64;
            if f1 >= best.0 {
                best = (f1, g.score);
            }
        }
        Ok(best)
    }

    /// Precision and recall when predicting positive for `score >= threshold`.
    /// Precision is 0 when nothing is predicted positive.
    pub fn precision_recall_at(&self, threshold: f64) -> Result<(f64, f64), MetricsError> {
        let total_pos = self.positives();
        if total_pos == 0 {
            return Err(MetricsError::NoPositives);
        }
        let (tp, fp) = self
            .entries
            .iter()
            .filter(|e| e.0 >= threshold)
            .fold((0u64, 0u64), |(tp, fp), e| (tp + e.1, fp + e.2));
        let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
        Ok((precision, tp as f64 / total_pos as f64))
    }

    pub fn f1_at(&self, threshold: f64) -> Result<f64, MetricsError> {
        let (p, r) = self.precision_recall_at(threshold)?;
        Ok(if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) })
    }
}

pub fn average_precision(pairs: &[(f64, bool)]) -> Result<f64, MetricsError> {
    ScoreTally::from_pairs(pairs)?.average_precision()
}

pub fn roc_auc(pairs: &[(f64, bool)]) -> Result<f64, MetricsError> {
    ScoreTally::from_pairs(pairs)?.roc_auc()
}

/// Returns `(f1, threshold)`.
pub fn f1_at_best_threshold(pairs: &[(f64, bool)]) -> Result<(f64, f64), MetricsError> {
    ScoreTally::from_pairs(pairs)?.best_f1()
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-12;

    /// labels in descending score order
    fn ranked(labels: &[bool]) -> Vec<(f64, bool)> {
        let n = labels.len() as f64;
        labels
            .iter()
            .enumerate()
            .map(|(i, &l)| ((n - i as f64) / n, l))
            .collect()
    }

    #[test]
    fn perfect_ranking() {
        let pairs = ranked(&[true, true, false, false, false]);
        assert_eq!(average_precision(&pairs).unwrap(), 1.0);
        assert_eq!(roc_auc(&pairs).unwrap(), 1.0);
        assert_eq!(f1_at_best_threshold(&pairs).unwrap().0, 1.0);
    }

    #[test]
    fn alternating_labels() {
        let pairs = ranked(&[true, false, true, false]);
        assert!((average_precision(&pairs).unwrap() - 5.0 / 6.0).abs() < EPS);
        let (f1, threshold) = f1_at_best_threshold(&pairs).unwrap();
        assert!((f1 - 0.8).abs() < EPS);
        assert_eq!(threshold, pairs[2].0);
    }

    #[test]
    fn single_positive_ranked_last() {
        let pairs = ranked(&[false, false, false, true]);
        assert!((average_precision(&pairs).unwrap() - 0.25).abs() < EPS);
        let pairs = ranked(&[false, false, true]);
        assert!((f1_at_best_threshold(&pairs).unwrap().0 - 0.5).abs() < EPS);
    }

    #[test]
    fn auc_examples() {
        let pairs = [(0.9, true), (0.3, true), (0.8, false)];
        assert!((roc_auc(&pairs).unwrap() - 0.5).abs() < EPS);
        let ties = [(0.4, true), (0.4, false), (0.4, true), (0.4, false)];
        assert_eq!(roc_auc(&ties).unwrap(), 0.5);
    }

    #[test]
    fn ties_form_one_step() {
        // all tied: one PR point at the positive rate
        let pairs = [(0.0, true), (0.0, false), (0.0, false), (0.0, false)];
        assert_eq!(average_precision(&pairs).unwrap(), 0.25);
        assert_eq!(f1_at_best_threshold(&pairs).unwrap(), (0.4, 0.0));
    }

    #[test]
    fn errors() {
        assert!(matches!(average_precision(&[(0.5, false)]), Err(MetricsError::NoPositives)));
        assert!(matches!(f1_at_best_threshold(&[]), Err(MetricsError::NoPositives)));
        assert!(matches!(roc_auc(&[(0.5, true)]), Err(MetricsError::DegenerateLabels)));
        assert!(matches!(
            average_precision(&[(f64::NAN, true)]),
            Err(MetricsError::NonFiniteScore(_))
        ));
    }

    #[test]
    fn bulk_matches_individual() {
        let mut bulk = ScoreTally::new();
        bulk.add(0.7, true).unwrap();
        bulk.add_many(0.0, false, 1000).unwrap();
        bulk.add_many(0.0, true, 2).unwrap();
        let mut pairs = vec![(0.7, true), (0.0, true), (0.0, true)];
        pairs.extend(std::iter::repeat_n((0.0, false), 1000));
        let mut single = ScoreTally::from_pairs(&pairs).unwrap();
        assert_eq!(bulk.average_precision().unwrap(), single.average_precision().unwrap());
        assert_eq!(bulk.roc_auc().unwrap(), single.roc_auc().unwrap());
        assert_eq!(bulk.best_f1().unwrap(), single.best_f1().unwrap());
    }

    #[test]
    fn threshold_metrics() {
        let t = ScoreTally::from_pairs(&[(1.0, true), (1.0, false), (0.0, true)]).unwrap();
        assert_eq!(t.precision_recall_at(1.0).unwrap(), (0.5, 0.5));
        assert_eq!(t.f1_at(1.0).unwrap(), 0.5);
        assert_eq!(t.precision_recall_at(2.0).unwrap(), (0.0, 0.0));
        assert_eq!(t.f1_at(2.0).unwrap(), 0.0);
    }
}
