use std::collections::{BTreeSet, HashMap};
use std::fmt::Write;

use super::{CollapsedAction, PruneError};
use crate::treebank::{Action, NtId};

/// Cumulative distribution of the number of distinct Open actions that
/// follow each pruning input (collapsed context plus next word).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpenStats {
    pub context: usize,
    pub min_occurrences: usize,
    pub num_nonterminals: usize,
    /// Inputs seen at least `min_occurrences` times with an Open output.
    pub inputs: usize,
    /// `at_most[n - 1]` counts those inputs with at most `n` distinct Opens.
    pub at_most: Vec<usize>,
}

impl OpenStats {
    /// Percentages for `n = 1..=num_nonterminals`.
    pub fn cumulative(&self) -> Vec<f64> {
        self.at_most
            .iter()
            .map(|&k| 100.0 * k as f64 / self.inputs as f64)
            .collect()
    }
}

#[derive(Default)]
struct InputRecord {
    occurrences: usize,
    opens: BTreeSet<NtId>,
}

/// Gathers pruning inputs over gold sequences. Context actions are
/// collapsed; the word input is the word of the next Shift, or `None` after
/// the last one.
pub fn corpus_open_stats(
    sequences: &[Vec<Action>],
    num_nonterminals: usize,
    context: usize,
    min_occurrences: usize,
) -> Result<OpenStats, PruneError> {
    if sequences.iter().all(Vec::is_empty) {
        return Err(PruneError::EmptyCorpus);
    }
    if min_occurrences == 0 {
        return Err(PruneError::InvalidParameter(
            "minimum occurrences must be at least 1".into(),
        ));
    }
    let bos = u32::MAX;
    let mut records: HashMap<(Vec<u32>, Option<u32>), InputRecord> = HashMap::new();
    for seq in sequences {
        let mut window = vec![bos; context];
        let mut next_shift = 0;
        for (t, &a) in seq.iter().enumerate() {
            if next_shift <= t {
                next_shift = seq[t..].iter().position(|a| a.is_shift()).map_or(seq.len(), |p| t + p);
            }
            let word = match seq.get(next_shift) {
                Some(Action::Shift(w)) => Some(w.0),
                _ => None,
            };
            let rec = records.entry((window.clone(), word)).or_default();
            rec.occurrences += 1;
            if let Action::Open(nt) = a {
                rec.opens.insert(nt);
            }
            if context > 0 {
                window.remove(0);
                window.push(CollapsedAction::from(a).index(num_nonterminals));
            }
        }
    }
    let mut at_most = vec![0usize; num_nonterminals];
    let mut inputs = 0;
    for rec in records.values() {
        if rec.occurrences < min_occurrences || rec.opens.is_empty() {
            continue;
        }
        inputs += 1;
        for slot in at_most.iter_mut().skip(rec.opens.len() - 1) {
            *slot += 1;
        }
    }
    if inputs == 0 {
        return Err(PruneError::NoQualifyingInputs { min_occurrences });
    }
    Ok(OpenStats {
        context,
        min_occurrences,
        num_nonterminals,
        inputs,
        at_most,
    })
}

/// Smallest keep fraction `n / of` whose cumulative percentage reaches
/// `coverage`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LowerBound {
    pub n: usize,
    pub of: usize,
}

impl LowerBound {
    pub fn value(&self) -> f64 {
        self.n as f64 / self.of as f64
    }
}

/// `cumulative` holds percentages for `n = 1, 2, ...`; `coverage` is a
/// fraction in `(0, 1]`.
pub fn lower_bound_p(cumulative: &[f64], coverage: f64, num_nonterminals: usize) -> Result<LowerBound, PruneError> {
    if !(coverage > 0.0 && coverage <= 1.0) {
        return Err(PruneError::InvalidParameter(format!(
            "coverage must lie in (0, 1], got {}",
            coverage
        )));
    }
    if cumulative.len() > num_nonterminals {
        return Err(PruneError::InvalidParameter(format!(
            "table has {} columns but only {} nonterminals",
            cumulative.len(),
            num_nonterminals
        )));
    }
    if cumulative.windows(2).any(|w| w[1] < w[0]) {
        return Err(PruneError::NotMonotone);
    }
    let target = coverage * 100.0;
    cumulative
        .iter()
        .position(|&c| c >= target - 1e-9)
        .map(|i| LowerBound {
            n: i + 1,
            of: num_nonterminals,
        })
        .ok_or(PruneError::CoverageUnreachable(coverage))
}

/// Right-aligned text table, one row per context size.
pub fn format_stats_table(rows: &[(usize, Vec<f64>)]) -> String {
    let width = rows.iter().map(|(_, r)| r.len()).max().unwrap_or(0);
    let mut out = String::from("c");
    for n in 1..=width {
        write!(out, " {:>6}", n).unwrap();
    }
    out.push('\n');
    for (c, row) in rows {
        write!(out, "{}", c).unwrap();
        for v in row {
            write!(out, " {:>6.1}", v).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Parses the output of [`format_stats_table`].
pub fn parse_stats_table(text: &str) -> Result<Vec<(usize, Vec<f64>)>, PruneError> {
    let bad = |line: usize, msg: String| PruneError::Table { line, message: msg };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| bad(1, "empty table".into()))?;
    let mut cols = header.split_whitespace();
    if cols.next() != Some("c") {
        return Err(bad(1, "header must start with `c`".into()));
    }
    let width = cols.count();
    let mut rows = Vec::new();
    for (i, line) in lines {
        let mut fields = line.split_whitespace();
        let c = fields
            .next()
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| bad(i + 1, "row must start with a context size".into()))?;
        let values = fields
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| bad(i + 1, format!("bad percentage `{}`", f)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if values.len() > width {
            return Err(bad(i + 1, format!("{} values for {} columns", values.len(), width)));
        }
        rows.push((c, values));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treebank::WordId;

    #[test]
    fn single_open_type_is_complete_at_one() {
        let (s, w) = (NtId(0), WordId(1));
        let seq = vec![Action::Open(s), Action::Shift(w), Action::Close(s)];
        let stats = corpus_open_stats(&vec![seq; 3], 2, 1, 1).unwrap();
        assert_eq!(stats.inputs, 1);
        assert_eq!(stats.cumulative(), vec![100.0, 100.0]);
        assert_eq!(
            lower_bound_p(&stats.cumulative(), 0.99, 2).unwrap(),
            LowerBound { n: 1, of: 2 }
        );
    }

    #[test]
    fn min_occurrences_filters_rare_inputs() {
        let (s, np, w) = (NtId(0), NtId(1), WordId(1));
        let a = vec![Action::Open(s), Action::Shift(w), Action::Close(s)];
        let b = vec![Action::Open(np), Action::Shift(w), Action::Close(np)];
        let stats = corpus_open_stats(&[a.clone(), b], 2, 0, 1).unwrap();
        assert_eq!((stats.inputs, stats.at_most.clone()), (1, vec![0, 1]));
        assert!(matches!(
            corpus_open_stats(&[a], 2, 0, 3),
            Err(PruneError::NoQualifyingInputs { .. })
        ));
    }

    #[test]
    fn lower_bound_edge_cases() {
        assert!(matches!(
            lower_bound_p(&[50.0, 90.0], 0.99, 2),
            Err(PruneError::CoverageUnreachable(_))
        ));
        assert!(matches!(
            lower_bound_p(&[50.0, 40.0], 0.3, 2),
            Err(PruneError::NotMonotone)
        ));
        let b = lower_bound_p(&[50.0, 90.0, 99.0], 0.9, 26).unwrap();
        assert_eq!((b.n, b.of), (2, 26));
        let tighter = lower_bound_p(&[50.0, 90.0, 99.0], 0.95, 26).unwrap();
        assert!(tighter.n >= b.n);
    }

    #[test]
    fn table_text_roundtrip() {
        let rows = vec![(0, vec![20.0, 58.4, 82.4]), (2, vec![61.2, 85.0, 100.0])];
        let text = format_stats_table(&rows);
        assert_eq!(text.lines().next().unwrap(), "c      1      2      3");
        assert_eq!(parse_stats_table(&text).unwrap(), rows);
    }
}
