//! Group comparisons over trial tables.
//!
//! Continuous outcomes (times, circularities) are compared with the
//! Mann-Whitney U test, hit/miss outcomes with the pooled two-proportion
//! z-test. Families of comparisons are Bonferroni corrected.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use statrs::function::erf::erfc;

use crate::io::{parse_f64, parse_u64, read_table};
use crate::{Error, Result};

/// Largest combined sample size for which the exact null distribution is
/// enumerated (tie-free samples only).
pub const EXACT_LIMIT: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PMethod {
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MannWhitney {
    /// `min(U_a, U_b)`.
    pub u: f64,
    /// Two-sided p-value.
    pub p: f64,
    pub method: PMethod,
}

/// Midranks (1-based) of `values`, plus the tie-group sizes.
fn midranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end share ranks start+1..=end
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        if end - start > 1 {
            ties.push(end - start);
        }
        start = end;
    }
    (ranks, ties)
}

/// Two-sided normal survival probability `2 * (1 - Phi(|z|))`, kept
/// strictly positive so that extreme statistics still yield a valid p.
pub fn two_sided_normal_p(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2).clamp(f64::MIN_POSITIVE, 1.0)
}

/// Visits every `k`-subset of `0..n` as a sorted index slice.
fn for_each_subset(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Exact two-sided p for a tie-free U statistic: every assignment of the
/// ranks `1..=n_a+n_b` to the first sample is enumerated.
fn exact_p(u_min: f64, n_a: usize, n_b: usize) -> f64 {
    let n = n_a + n_b;
    let offset = (n_a * (n_a + 1) / 2) as f64;
    let mut total = 0u64;
    let mut extreme = 0u64;
    for_each_subset(n, n_a, |subset| {
        let rank_sum: usize = subset.iter().map(|i| i + 1).sum();
        let u_a = rank_sum as f64 - offset;
        let u_b = (n_a * n_b) as f64 - u_a;
        total += 1;
        if u_a.min(u_b) <= u_min {
            extreme += 1;
        }
    });
    // min(U_a, U_b) <= u covers both tails, which is the two-sided p.
    (extreme as f64 / total as f64).min(1.0)
}

struct RankSummary {
    u: f64,
    n_a: usize,
    n_b: usize,
    ties: Vec<usize>,
}

fn rank_summary(a: &[f64], b: &[f64]) -> Result<RankSummary> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("Mann-Whitney sample"));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::InvalidTable("non-finite sample value".into()));
    }
    let (n_a, n_b) = (a.len(), b.len());
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let rank_sum_a: f64 = ranks[..n_a].iter().sum();
    let u_a = rank_sum_a - (n_a * (n_a + 1)) as f64 / 2.0;
    let u_b = (n_a * n_b) as f64 - u_a;
    Ok(RankSummary {
        u: u_a.min(u_b),
        n_a,
        n_b,
        ties,
    })
}

fn normal_p(r: &RankSummary) -> f64 {
    let n = (r.n_a + r.n_b) as f64;
    let nab = (r.n_a * r.n_b) as f64;
    let tie_term: f64 =
        r.ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / (n * (n - 1.0));
    let variance = nab / 12.0 * ((n + 1.0) - tie_term);
    if variance <= 0.0 {
        return 1.0;
    }
    let z = ((r.u - nab / 2.0).abs() - 0.5).max(0.0) / variance.sqrt();
    two_sided_normal_p(z)
}

/// Mann-Whitney U test with midranks for ties.
///
/// Exact when `n_a + n_b <= 12` and there are no ties; otherwise the normal
/// approximation with tie-corrected variance and a 0.5 continuity
/// correction.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney> {
    let r = rank_summary(a, b)?;
    if r.ties.is_empty() && r.n_a + r.n_b <= EXACT_LIMIT {
        return Ok(MannWhitney {
            u: r.u,
            p: exact_p(r.u, r.n_a, r.n_b),
            method: PMethod::Exact,
        });
    }
    Ok(MannWhitney {
        u: r.u,
        p: normal_p(&r),
        method: PMethod::Normal,
    })
}

/// Mann-Whitney U test using the normal approximation at every sample size.
pub fn mann_whitney_u_normal(a: &[f64], b: &[f64]) -> Result<MannWhitney> {
    let r = rank_summary(a, b)?;
    Ok(MannWhitney {
        u: r.u,
        p: normal_p(&r),
        method: PMethod::Normal,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZTest {
    pub z: f64,
    pub p: f64,
}

/// Pooled two-proportion z-test, two-sided.
pub fn two_proportion_ztest(hits_a: u64, n_a: u64, hits_b: u64, n_b: u64) -> Result<ZTest> {
    if n_a == 0 || n_b == 0 {
        return Err(Error::EmptyInput("proportion group with no trials"));
    }
    if hits_a > n_a || hits_b > n_b {
        return Err(Error::InvalidTable(format!(
            "hits exceed trials: {hits_a}/{n_a}, {hits_b}/{n_b}"
        )));
    }
    let (na, nb) = (n_a as f64, n_b as f64);
    let pooled = (hits_a + hits_b) as f64 / (na + nb);
    if pooled == 0.0 || pooled == 1.0 {
        return Err(Error::DegenerateProportions(pooled));
    }
    let se = (pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb)).sqrt();
    let z = (hits_a as f64 / na - hits_b as f64 / nb) / se;
    Ok(ZTest {
        z,
        p: two_sided_normal_p(z),
    })
}

/// `min(1, p * m)` for each p.
pub fn bonferroni(p_values: &[f64], m: usize) -> Result<Vec<f64>> {
    if m < p_values.len().max(1) {
        return Err(Error::InvalidComparisons {
            m,
            count: p_values.len(),
        });
    }
    p_values
        .iter()
        .map(|&p| {
            if p > 0.0 && p <= 1.0 {
                Ok((p * m as f64).min(1.0))
            } else {
                Err(Error::InvalidP(p))
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Significance {
    NotSignificant,
    /// p < 0.05
    One,
    /// p < 0.01
    Two,
    /// p < 0.001
    Three,
}

impl fmt::Display for Significance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Significance::NotSignificant => "ns",
            Significance::One => "*",
            Significance::Two => "**",
            Significance::Three => "***",
        })
    }
}

/// Star rating of an (already corrected) p-value.
pub fn significance_stars(p: f64) -> Significance {
    if p < 0.001 {
        Significance::Three
    } else if p < 0.01 {
        Significance::Two
    } else if p < 0.05 {
        Significance::One
    } else {
        Significance::NotSignificant
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Group {
    /// Non-humanoid device.
    NonHumanoid,
    Humanoid,
}

impl Group {
    pub fn parse(label: &str) -> Option<Self> {
        match label {
            "NH" => Some(Group::NonHumanoid),
            "H" => Some(Group::Humanoid),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Group::NonHumanoid => "NH",
            Group::Humanoid => "H",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Task {
    Flick,
    Screw,
    Stack,
    Cut,
}

impl Task {
    pub fn parse(label: &str) -> Option<Self> {
        match label {
            "flick" => Some(Task::Flick),
            "screw" => Some(Task::Screw),
            "stack" => Some(Task::Stack),
            "cut" => Some(Task::Cut),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Task::Flick => "flick",
            Task::Screw => "screw",
            Task::Stack => "stack",
            Task::Cut => "cut",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    Continuous(f64),
    Binomial { hits: u64, n: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub group: Group,
    pub task: Task,
    /// Trial label (`group,task,trial,value`) or target label
    /// (`group,task,target,hits,n`). Records sharing task and label form one
    /// comparison.
    pub label: String,
    pub outcome: Outcome,
}

/// Per-trial outcomes of both groups.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialTable {
    records: Vec<TrialRecord>,
}

impl TrialTable {
    pub fn new(records: Vec<TrialRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyInput("trial table"));
        }
        for r in &records {
            if let Outcome::Binomial { hits, n } = r.outcome {
                if hits > n {
                    return Err(Error::InvalidTable(format!("{hits} hits out of {n}")));
                }
            }
        }
        Ok(Self { records })
    }

    pub fn records(&self) -> &[TrialRecord] {
        &self.records
    }
}

/// Reads one sample, one value per line. Lines may hold several
/// comma-separated values; `#` starts a comment.
pub fn read_sample(path: &Path) -> Result<Vec<f64>> {
    let table = read_table(path, false)?;
    let mut values = Vec::new();
    for row in &table.rows {
        for field in row.fields.iter().filter(|f| !f.is_empty()) {
            values.push(parse_f64(path, row.line, field)?);
        }
    }
    Ok(values)
}

/// Reads `group,task,trial,value` or `group,task,target,hits,n` rows.
pub fn read_trial_table(path: &Path) -> Result<TrialTable> {
    let table = read_table(path, true)?;
    let binomial = match table.header.as_slice() {
        [g, t, l, v] if g == "group" && t == "task" && l == "trial" && v == "value" => false,
        [g, t, l, h, n]
            if g == "group" && t == "task" && l == "target" && h == "hits" && n == "n" =>
        {
            true
        }
        _ => {
            return Err(Error::parse(
                path,
                1,
                "header must be `group,task,trial,value` or `group,task,target,hits,n`",
            ))
        }
    };
    let mut records = Vec::with_capacity(table.rows.len());
    for row in &table.rows {
        let f = &row.fields;
        let group = Group::parse(&f[0])
            .ok_or_else(|| Error::parse(path, row.line, format!("unknown group {:?}", f[0])))?;
        let task = Task::parse(&f[1])
            .ok_or_else(|| Error::parse(path, row.line, format!("unknown task {:?}", f[1])))?;
        let outcome = if binomial {
            let hits = parse_u64(path, row.line, &f[3])?;
            let n = parse_u64(path, row.line, &f[4])?;
            if hits > n {
                return Err(Error::parse(path, row.line, "hits exceed n"));
            }
            Outcome::Binomial { hits, n }
        } else {
            Outcome::Continuous(parse_f64(path, row.line, &f[3])?)
        };
        records.push(TrialRecord {
            group,
            task,
            label: f[2].clone(),
            outcome,
        });
    }
    TrialTable::new(records)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonResult {
    pub task: Task,
    pub label: String,
    pub test: &'static str,
    pub statistic: f64,
    pub p_raw: f64,
    pub p_corrected: f64,
    pub stars: Significance,
}

/// Compares NH against H for every (task, label) in the table.
///
/// Each task is one family for Bonferroni correction; its size is the
/// number of labels in that task unless `comparisons` overrides it.
pub fn analyse(table: &TrialTable, comparisons: Option<usize>) -> Result<Vec<ComparisonResult>> {
    #[derive(Default)]
    struct Cell {
        continuous: [Vec<f64>; 2],
        hits: [u64; 2],
        trials: [u64; 2],
        binomial: bool,
    }
    let mut cells: BTreeMap<Task, BTreeMap<String, Cell>> = BTreeMap::new();
    for r in &table.records {
        let cell = cells
            .entry(r.task)
            .or_default()
            .entry(r.label.clone())
            .or_default();
        let g = r.group as usize;
        match r.outcome {
            Outcome::Continuous(v) => cell.continuous[g].push(v),
            Outcome::Binomial { hits, n } => {
                cell.binomial = true;
                cell.hits[g] += hits;
                cell.trials[g] += n;
            }
        }
    }

    let mut results = Vec::new();
    for (task, labels) in cells {
        let mut family = Vec::new();
        for (label, cell) in labels {
            let (test, statistic, p) = if cell.binomial {
                let z = two_proportion_ztest(
                    cell.hits[0],
                    cell.trials[0],
                    cell.hits[1],
                    cell.trials[1],
                )?;
                ("ztest", z.z, z.p)
            } else {
                let mw = mann_whitney_u(&cell.continuous[0], &cell.continuous[1])?;
                ("mwu", mw.u, mw.p)
            };
            family.push((label, test, statistic, p));
        }
        let raw: Vec<f64> = family.iter().map(|f| f.3).collect();
        let corrected = bonferroni(&raw, comparisons.unwrap_or(raw.len()))?;
        for ((label, test, statistic, p_raw), p_corrected) in family.into_iter().zip(corrected) {
            results.push(ComparisonResult {
                task,
                label,
                test,
                statistic,
                p_raw,
                p_corrected,
                stars: significance_stars(p_corrected),
            });
        }
    }
    Ok(results)
}

/// Renders results as `task,comparison,test,statistic,p_raw,p_corrected,stars`.
pub fn render_report(results: &[ComparisonResult]) -> String {
    let mut out = String::from("task,comparison,test,statistic,p_raw,p_corrected,stars\n");
    for r in results {
        out.push_str(&format!(
            "{},{},{},{:.6},{:.6},{:.6},{}\n",
            r.task.label(),
            r.label,
            r.test,
            r.statistic,
            r.p_raw,
            r.p_corrected,
            r.stars
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separated_samples() {
        let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!(r.u, 0.0);
        assert_eq!(r.method, PMethod::Exact);
        // 2 of the 20 rank splits are this extreme
        assert!((r.p - 0.1).abs() < 1e-15);
    }

    #[test]
    fn identical_samples() {
        let a = [2.0, 4.0, 6.0, 8.0];
        let r = mann_whitney_u(&a, &a).unwrap();
        assert_eq!(r.u, 8.0);
        assert_eq!(r.method, PMethod::Normal);
        assert_eq!(r.p, 1.0);

        let flat = mann_whitney_u(&[1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(flat.p, 1.0);
    }

    #[test]
    fn swap_symmetry() {
        let a = [3.1, 0.2, 5.5, 7.0, 2.2];
        let b = [1.0, 9.4, 6.1, 4.4];
        assert_eq!(
            mann_whitney_u(&a, &b).unwrap(),
            mann_whitney_u(&b, &a).unwrap()
        );
    }

    #[test]
    fn midrank_ties() {
        let (ranks, ties) = midranks(&[1.0, 2.0, 2.0, 4.0]);
        assert_eq!(ranks, vec![1.0, 2.5, 2.5, 4.0]);
        assert_eq!(ties, vec![2]);
    }

    #[test]
    fn subsets_enumerated() {
        let mut count = 0;
        for_each_subset(6, 3, |_| count += 1);
        assert_eq!(count, 20);
        let mut all = 0;
        for_each_subset(4, 4, |s| {
            assert_eq!(s, [0, 1, 2, 3]);
            all += 1;
        });
        assert_eq!(all, 1);
    }

    #[test]
    fn empty_sample() {
        assert!(matches!(
            mann_whitney_u(&[], &[1.0]),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn ztest_cases() {
        let z = two_proportion_ztest(10, 20, 20, 40).unwrap();
        assert_eq!(z.z, 0.0);
        assert_eq!(z.p, 1.0);
        let ab = two_proportion_ztest(30, 40, 20, 40).unwrap();
        let ba = two_proportion_ztest(20, 40, 30, 40).unwrap();
        assert_eq!(ab.z, -ba.z);
        assert_eq!(ab.p, ba.p);
        // (0.75 - 0.5) / sqrt(0.625 * 0.375 * (2 / 40))
        assert!((ab.z - 2.309_401_076_758_503).abs() < 1e-12);
        assert!(matches!(
            two_proportion_ztest(0, 5, 0, 5),
            Err(Error::DegenerateProportions(_))
        ));
        assert!(matches!(
            two_proportion_ztest(5, 5, 3, 3),
            Err(Error::DegenerateProportions(_))
        ));
        assert!(two_proportion_ztest(6, 5, 3, 3).is_err());
        assert!(two_proportion_ztest(0, 0, 3, 3).is_err());
    }

    #[test]
    fn normal_tail() {
        // 2 * (1 - Phi(1.959963984540054)) = 0.05
        assert!((two_sided_normal_p(1.959_963_984_540_054) - 0.05).abs() < 1e-10);
        assert_eq!(two_sided_normal_p(0.0), 1.0);
    }

    #[test]
    fn bonferroni_cases() {
        let adj = bonferroni(&[0.01], 7).unwrap();
        assert!((adj[0] - 0.07).abs() < 1e-15);
        assert_eq!(bonferroni(&[0.5], 3).unwrap(), vec![1.0]);
        assert_eq!(bonferroni(&[0.2, 0.03], 2).unwrap().len(), 2);
        assert_eq!(
            bonferroni(&[0.2, 0.03], 1).unwrap_err().to_string(),
            "comparison count 1 smaller than number of p-values 2"
        );
        assert_eq!(bonferroni(&[0.3], 1).unwrap(), vec![0.3]);
        assert!(matches!(bonferroni(&[0.0], 1), Err(Error::InvalidP(_))));
        assert!(matches!(bonferroni(&[1.5], 2), Err(Error::InvalidP(_))));
    }

    #[test]
    fn stars() {
        assert_eq!(significance_stars(0.04), Significance::One);
        assert_eq!(significance_stars(0.0009), Significance::Three);
        assert_eq!(significance_stars(0.05), Significance::NotSignificant);
        assert_eq!(significance_stars(0.005).to_string(), "**");
        assert_eq!(significance_stars(0.01), Significance::One);
    }

    #[test]
    fn report_from_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("stack.csv");
        let mut text = String::from("group,task,trial,value\n");
        for (g, base) in [("NH", 30.0), ("H", 77.0)] {
            for trial in 1..=2 {
                for p in 0..8 {
                    text.push_str(&format!(
                        "{g},stack,{trial},{}\n",
                        base + p as f64 * 1.5 + trial as f64
                    ));
                }
            }
        }
        std::fs::write(&path, &text).unwrap();
        let table = read_trial_table(&path).unwrap();
        let results = analyse(&table, None).unwrap();
        assert_eq!(results.len(), 2);
        for r in &results {
            assert_eq!(r.test, "mwu");
            assert_eq!(r.statistic, 0.0);
            assert!((r.p_corrected - (2.0 * r.p_raw).min(1.0)).abs() < 1e-15);
            // z = 31.5 / sqrt(64 * 17 / 12) = 3.31, p ~ 0.00094, doubled
            assert_eq!(r.stars, Significance::Two);
        }
        let report = render_report(&results);
        assert!(report.starts_with("task,comparison,test,statistic,p_raw,p_corrected,stars\n"));
        assert_eq!(report.lines().count(), 3);

        let hits = dir.path().join("flick.csv");
        std::fs::write(
            &hits,
            "group,task,target,hits,n\nNH,flick,1,30,40\nH,flick,1,20,40\n",
        )
        .unwrap();
        let results = analyse(&read_trial_table(&hits).unwrap(), Some(7)).unwrap();
        assert_eq!(results[0].test, "ztest");
        assert!((results[0].p_corrected - 7.0 * results[0].p_raw).abs() < 1e-15);

        std::fs::write(&hits, "group,task,target,hits,n\nNH,flick,1,41,40\n").unwrap();
        assert!(matches!(
            read_trial_table(&hits),
            Err(Error::Parse { line: 2, .. })
        ));
        std::fs::write(&hits, "group,task,trial,value\nX,flick,1,4\n").unwrap();
        assert!(matches!(
            read_trial_table(&hits),
            Err(Error::Parse { line: 2, .. })
        ));
        std::fs::write(&hits, "group,task,trial,value\nNH,flick,1,nan\n").unwrap();
        assert!(matches!(
            read_trial_table(&hits),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
