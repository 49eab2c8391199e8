//! Binary segmentation: test, split at the estimated break, and recurse on
//! both halves with the long-run covariance re-estimated on each piece.

use serde::{Deserialize, Serialize};

use crate::cusum::{run_test, TestConfig};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::panel::TimeSeriesPanel;

pub const DEFAULT_MIN_LEN: usize = 30;
pub const DEFAULT_MAX_DEPTH: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmentConfig {
    pub test: TestConfig,
    pub min_len: usize,
    pub max_depth: usize,
    /// Level per round (round 1 first); the last entry covers deeper rounds.
    /// Empty means `test.level` everywhere.
    pub round_levels: Vec<f64>,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        Self {
            test: TestConfig::default(),
            min_len: DEFAULT_MIN_LEN,
            max_depth: DEFAULT_MAX_DEPTH,
            round_levels: Vec::new(),
        }
    }
}

impl SegmentConfig {
    pub fn level_for_round(&self, round: usize) -> f64 {
        match self.round_levels.as_slice() {
            [] => self.test.level,
            levels => levels[(round - 1).min(levels.len() - 1)],
        }
    }
}

/// Outcome of testing one segment `[lo, hi)` of the panel (0-based rows).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentNode {
    pub lo: usize,
    pub hi: usize,
    /// Depth in the recursion, starting at 1.
    pub round: usize,
    pub value: Option<f64>,
    pub critical_value: Option<f64>,
    pub significant: bool,
    /// Global row index of the last observation before the estimated break.
    pub k_hat_global: Option<usize>,
    pub label: Option<String>,
    /// Why the node could not be evaluated, if it could not.
    pub error: Option<String>,
    pub children: Vec<SegmentNode>,
}

impl SegmentNode {
    pub fn len(&self) -> usize {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi == self.lo
    }

    /// This node followed by its descendants, depth first.
    pub fn walk(&self) -> Vec<&SegmentNode> {
        let mut out = vec![self];
        for c in &self.children {
            out.extend(c.walk());
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreakPoint {
    /// Global row index of the last pre-break observation.
    pub index: usize,
    pub round: usize,
}

/// One row per evaluated node, in the layout of a break table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRow {
    /// 1-based observation number of the estimated break.
    pub observation: usize,
    pub label: Option<String>,
    pub value: f64,
    pub round: usize,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationReport {
    pub root: SegmentNode,
    pub breaks: Vec<BreakPoint>,
}

impl SegmentationReport {
    pub fn break_indices(&self) -> Vec<usize> {
        self.breaks.iter().map(|b| b.index).collect()
    }

    /// Evaluated nodes sorted by break position.
    pub fn rows(&self) -> Vec<SegmentRow> {
        let mut rows: Vec<SegmentRow> = self
            .root
            .walk()
            .into_iter()
            .filter_map(|node| {
                Some(SegmentRow {
                    observation: node.k_hat_global? + 1,
                    label: node.label.clone(),
                    value: node.value?,
                    round: node.round,
                    significant: node.significant,
                })
            })
            .collect();
        rows.sort_by_key(|r| (r.observation, r.round));
        rows
    }
}

pub fn binary_segment(panel: &TimeSeriesPanel, config: &SegmentConfig) -> Result<SegmentationReport> {
    if config.min_len < crate::cusum::MIN_OBSERVATIONS {
        return Err(Error::InvalidArgument(format!(
            "min_len must be at least {}, got {}",
            crate::cusum::MIN_OBSERVATIONS,
            config.min_len
        )));
    }
    if config.max_depth == 0 {
        return Err(Error::InvalidArgument("max_depth must be positive".into()));
    }
    if panel.n() < config.min_len {
        return Err(Error::TooFewObservations(format!(
            "segmentation needs n >= min_len = {}, got {}",
            config.min_len,
            panel.n()
        )));
    }
    // warm the critical-value caches once, outside the recursion
    for round in 1..=config.max_depth {
        crate::cusum::critical_value(
            config.test.statistic,
            panel.vdim(),
            config.level_for_round(round),
            &config.test.lambda,
            config.test.exec,
        )?;
    }
    let root = visit(panel, config, 0, panel.n(), 1);
    let mut breaks: Vec<BreakPoint> = root
        .walk()
        .into_iter()
        .filter(|n| !n.children.is_empty())
        .map(|n| BreakPoint {
            index: n.k_hat_global.expect("split nodes carry a break"),
            round: n.round,
        })
        .collect();
    breaks.sort_by_key(|b| b.index);
    Ok(SegmentationReport { root, breaks })
}

fn visit(panel: &TimeSeriesPanel, config: &SegmentConfig, lo: usize, hi: usize, round: usize) -> SegmentNode {
    let mut node = SegmentNode {
        lo,
        hi,
        round,
        value: None,
        critical_value: None,
        significant: false,
        k_hat_global: None,
        label: None,
        error: None,
        children: Vec::new(),
    };
    let test = TestConfig {
        level: config.level_for_round(round),
        ..config.test
    };
    let report = match panel.slice(lo, hi).and_then(|sub| run_test(&sub, &test)) {
        Ok(r) => r,
        Err(e) => {
            node.error = Some(e.to_string());
            return node;
        }
    };
    let split = lo + report.k_hat;
    node.value = Some(report.value);
    node.critical_value = Some(report.critical_value);
    node.significant = report.reject;
    node.k_hat_global = Some(split - 1);
    node.label = report.label;

    let admissible = split - lo >= config.min_len && hi - split >= config.min_len;
    if node.significant && admissible && round < config.max_depth {
        let (left, right) = config.test.exec.join(
            || visit(panel, config, lo, split, round + 1),
            || visit(panel, config, split, hi, round + 1),
        );
        node.children = vec![left, right];
    } else if node.significant && admissible && round == config.max_depth {
        // the break still counts; the pieces are just not tested further
        node.children = vec![leaf(lo, split, round + 1), leaf(split, hi, round + 1)];
    }
    node
}

fn leaf(lo: usize, hi: usize, round: usize) -> SegmentNode {
    SegmentNode {
        lo,
        hi,
        round,
        value: None,
        critical_value: None,
        significant: false,
        k_hat_global: None,
        label: None,
        error: None,
        children: Vec::new(),
    }
}

/// Sequential counterpart of [`binary_segment`], for comparison.
pub fn binary_segment_sequential(panel: &TimeSeriesPanel, config: &SegmentConfig) -> Result<SegmentationReport> {
    let mut cfg = config.clone();
    cfg.test.exec = Exec::Sequential;
    binary_segment(panel, &cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn planted(n: usize, d: usize, seed: u64) -> TimeSeriesPanel {
        let mut rng = stream_rng(seed, 0);
        let values = (0..n)
            .flat_map(|j| {
                let scale = if j >= n / 3 && j < 2 * n / 3 { 2.0 } else { 1.0 };
                (0..d).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect::<Vec<_>>()
            })
            .collect();
        TimeSeriesPanel::new(n, d, values).unwrap()
    }

    #[test]
    fn two_planted_breaks_are_found() {
        let report = binary_segment(&planted(1500, 2, 3), &SegmentConfig::default()).unwrap();
        let idx = report.break_indices();
        assert_eq!(idx.len(), 2, "{idx:?}");
        assert!((idx[0] as f64 - 500.0).abs() < 75.0 && (idx[1] as f64 - 1000.0).abs() < 75.0);
        assert!(report.rows().windows(2).all(|w| w[0].observation <= w[1].observation));
    }

    #[test]
    fn degenerate_min_len_equals_single_test() {
        let p = planted(300, 2, 4);
        let cfg = SegmentConfig {
            min_len: 300,
            ..SegmentConfig::default()
        };
        let report = binary_segment(&p, &cfg).unwrap();
        let single = run_test(&p, &cfg.test).unwrap();
        assert!(report.root.children.is_empty() && report.breaks.is_empty());
        assert_eq!(report.root.value, Some(single.value));
        assert_eq!(report.root.significant, single.reject);
    }

    #[test]
    fn nodes_match_tests_on_extracted_subpanels() {
        let p = planted(900, 2, 5);
        let report = binary_segment(&p, &SegmentConfig::default()).unwrap();
        for node in report.root.walk() {
            if let Some(v) = node.value {
                let sub = p.slice(node.lo, node.hi).unwrap();
                assert_eq!(run_test(&sub, &SegmentConfig::default().test).unwrap().value, v);
                let k = node.k_hat_global.unwrap();
                assert!(node.lo <= k && k < node.hi);
            }
        }
    }

    #[test]
    fn execution_policy_does_not_change_the_tree() {
        let p = planted(1200, 2, 6);
        let a = binary_segment(&p, &SegmentConfig::default()).unwrap();
        let b = binary_segment_sequential(&p, &SegmentConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn depth_and_length_limits() {
        let p = planted(1500, 1, 7);
        let cfg = SegmentConfig {
            max_depth: 1,
            ..SegmentConfig::default()
        };
        let report = binary_segment(&p, &cfg).unwrap();
        assert_eq!(report.breaks.len(), 1);
        assert!(report.root.children.iter().all(|c| c.value.is_none()));
        assert!(binary_segment(&p.slice(0, 25).unwrap(), &SegmentConfig::default()).is_err());
        let bad = SegmentConfig {
            min_len: 10,
            ..SegmentConfig::default()
        };
        assert!(binary_segment(&p, &bad).is_err());
    }

    #[test]
    fn unevaluable_nodes_are_not_significant() {
        // a constant panel has a singular long-run covariance
        let p = TimeSeriesPanel::from_column(&[1.5; 200]).unwrap();
        let report = binary_segment(&p, &SegmentConfig::default()).unwrap();
        assert!(report.root.error.as_deref().unwrap().contains("singular"));
        assert!(!report.root.significant && report.root.children.is_empty());
        assert!(report.breaks.is_empty() && report.rows().is_empty());
    }

    #[test]
    fn round_levels_fall_back_to_the_last_entry() {
        let cfg = SegmentConfig {
            round_levels: vec![0.05, 0.01],
            ..SegmentConfig::default()
        };
        assert_eq!(cfg.level_for_round(1), 0.05);
        assert_eq!(cfg.level_for_round(5), 0.01);
        assert_eq!(SegmentConfig::default().level_for_round(3), 0.05);
    }
}
