#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use genparse::eval::EvalReport;
use genparse::history::History;
use genparse::pruning::OpenStats;
use genparse::scoring::{normalize, Scorer, TableScorer};
use genparse::search::{valid_successors, Hypothesis, SearchConfig};
use genparse::treebank::{Action, ActionSpace, Tree, WordId};
use rand::{Rng, SeedableRng};

/// Every complete valid action sequence over `sentence`.
pub fn enumerate(sentence: &[WordId], num_nonterminals: usize, config: &SearchConfig) -> Vec<Vec<Action>> {
    enumerate_upto(sentence, num_nonterminals, config, usize::MAX)
}

/// Complete valid sequences of at most `max_len` actions.
pub fn enumerate_upto(
    sentence: &[WordId],
    num_nonterminals: usize,
    config: &SearchConfig,
    max_len: usize,
) -> Vec<Vec<Action>> {
    fn go(
        h: &Hypothesis,
        sentence: &[WordId],
        nts: usize,
        config: &SearchConfig,
        max_len: usize,
        prefix: &mut Vec<Action>,
        out: &mut Vec<Vec<Action>>,
    ) {
        if h.is_complete() {
            out.push(prefix.clone());
            return;
        }
        if prefix.len() == max_len {
            return;
        }
        for a in valid_successors(h, sentence, nts, config) {
            prefix.push(a);
            go(&h.extend(a, 0.0, 0), sentence, nts, config, max_len, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(
        &Hypothesis::initial(),
        sentence,
        num_nonterminals,
        config,
        max_len,
        &mut Vec::new(),
        &mut out,
    );
    out
}

/// All sentences of length `1..=max_len` over word ids `1..=num_words`.
pub fn all_sentences(num_words: u32, max_len: usize) -> Vec<Vec<WordId>> {
    let mut out: Vec<Vec<WordId>> = Vec::new();
    let mut layer: Vec<Vec<WordId>> = vec![Vec::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|s| {
                (1..=num_words).map(move |w| {
                    let mut t = s.clone();
                    t.push(WordId(w));
                    t
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

/// Log probability of a sequence, summed step by step through the history.
pub fn log_prob(scorer: &dyn Scorer, actions: &[Action]) -> f64 {
    let mut h = History::new();
    let mut total = 0.0;
    for &a in actions {
        total += scorer.log_probs(&h, &[a]).unwrap()[0];
        h = h.push(a);
    }
    total
}

fn random_dist<R: Rng>(rng: &mut R, size: usize) -> Vec<f64> {
    normalize((0..size).map(|_| rng.gen_range(0.01f64..1.0).powi(3)).collect())
}

/// A table scorer with an independent random distribution after every
/// proper prefix of `sequences`.
pub fn random_table_scorer<R: Rng>(space: ActionSpace, sequences: &[Vec<Action>], rng: &mut R) -> TableScorer {
    let mut scorer = TableScorer::new(space, random_dist(rng, space.size())).unwrap();
    let mut seen = HashSet::new();
    for seq in sequences {
        for t in 0..seq.len() {
            if seen.insert(seq[..t].to_vec()) {
                scorer
                    .insert(seq[..t].to_vec(), random_dist(rng, space.size()))
                    .unwrap();
            }
        }
    }
    scorer
}

/// Recounts open statistics with string keys and a forward scan per step.
pub fn naive_open_stats(
    sequences: &[Vec<Action>],
    num_nonterminals: usize,
    context: usize,
    min_occurrences: usize,
) -> (usize, Vec<usize>) {
    let collapse = |a: &Action| match a {
        Action::Open(x) => format!("O{}", x.0),
        Action::Close(x) => format!("C{}", x.0),
        Action::Shift(_) => "S".to_string(),
    };
    let mut table: HashMap<String, (usize, HashSet<u32>)> = HashMap::new();
    for seq in sequences {
        for t in 0..seq.len() {
            let mut key = Vec::new();
            for back in (1..=context).rev() {
                key.push(if t >= back {
                    collapse(&seq[t - back])
                } else {
                    "BOS".into()
                });
            }
            let word = seq[t..]
                .iter()
                .find_map(|a| match a {
                    Action::Shift(w) => Some(w.0.to_string()),
                    _ => None,
                })
                .unwrap_or_else(|| "EOS".into());
            let entry = table.entry(format!("{}|{}", key.join(" "), word)).or_default();
            entry.0 += 1;
            if let Action::Open(x) = seq[t] {
                entry.1.insert(x.0);
            }
        }
    }
    let qualifying: Vec<usize> = table
        .values()
        .filter(|(n, opens)| *n >= min_occurrences && !opens.is_empty())
        .map(|(_, opens)| opens.len())
        .collect();
    let at_most = (1..=num_nonterminals)
        .map(|n| qualifying.iter().filter(|&&d| d <= n).count())
        .collect();
    (qualifying.len(), at_most)
}

pub fn stats_match(stats: &OpenStats, naive: &(usize, Vec<usize>)) -> bool {
    stats.inputs == naive.0 && stats.at_most == naive.1
}

/// Bracket scores from sorted `label:start:end` strings and a merge walk.
pub fn naive_prf(pred: &[Tree], gold: &[Tree]) -> (f64, f64, f64) {
    fn spans(t: &Tree, start: usize, out: &mut Vec<String>) -> usize {
        match t {
            Tree::Leaf(_) => start + 1,
            Tree::Node { label, children } => {
                let mut end = start;
                for c in children {
                    end = spans(c, end, out);
                }
                out.push(format!("{}:{}:{}", label, start, end));
                end
            }
        }
    }
    let (mut matched, mut np, mut ng) = (0usize, 0usize, 0usize);
    for (p, g) in pred.iter().zip(gold) {
        let (mut a, mut b) = (Vec::new(), Vec::new());
        spans(p, 0, &mut a);
        spans(g, 0, &mut b);
        a.sort();
        b.sort();
        np += a.len();
        ng += b.len();
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Equal => {
                    matched += 1;
                    i += 1;
                    j += 1;
                }
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
            }
        }
    }
    let r = 100.0 * matched as f64 / ng as f64;
    let p = 100.0 * matched as f64 / np as f64;
    let f = if r + p > 0.0 { 2.0 * r * p / (r + p) } else { 0.0 };
    (r, p, f)
}

pub fn report_agrees(report: &EvalReport, naive: (f64, f64, f64), tol: f64) -> bool {
    (report.recall() - naive.0).abs() <= tol
        && (report.precision() - naive.1).abs() <= tol
        && (report.f1() - naive.2).abs() <= tol
}

use genparse::pruning::{CoarsePruner, CollapsedAction, Example, PruneInput, PruneModel};
use genparse::search::{OpenCandidate, OpenFilter};
use genparse::treebank::{NtId, Vocabulary};

/// Largest relative difference between the analytic gradient and central
/// differences with step `1e-4`, over every parameter of a random model.
pub fn gradient_check(seed: u64) -> f64 {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let vocab = Vocabulary::new(["S", "NP", "VP"], ["a", "b", "c", "d"]);
    let context = rng.gen_range(0..=2);
    let mut model = PruneModel::random(&vocab, context, rng.gen_range(2..=5), rng.gen_range(3..=8), &mut rng);
    for group in model.parameters_mut() {
        for x in group.iter_mut() {
            *x += rng.gen_range(-0.3..0.3);
        }
    }
    let outputs = model.num_outputs() as u32;
    let rows = model.num_rows() as u32;
    let batch: Vec<Example> = (0..rng.gen_range(1..=6))
        .map(|_| Example {
            input: PruneInput {
                context: (0..context).map(|_| rng.gen_range(0..rows)).collect(),
                word: rng.gen_range(0..rows),
            },
            target: rng.gen_range(0..outputs),
        })
        .collect();
    let (_, grad) = model.loss_and_gradient(&batch);
    let analytic: Vec<Vec<f64>> = grad.groups().iter().map(|(_, g)| g.to_vec()).collect();
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    for (g, expected) in analytic.iter().enumerate() {
        for i in 0..expected.len() {
            let orig = model.parameters()[g].1[i];
            model.parameters_mut()[g][i] = orig + h;
            let up = model.loss(&batch);
            model.parameters_mut()[g][i] = orig - h;
            let down = model.loss(&batch);
            model.parameters_mut()[g][i] = orig;
            let numeric = (up - down) / (2.0 * h);
            let a = expected[i];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
            worst = worst.max(rel);
        }
    }
    worst
}

/// Random histories that are valid prefixes over three labels.
fn random_history<R: Rng>(rng: &mut R, nts: u32) -> History {
    let mut h = History::new();
    let mut depth = 0;
    for _ in 0..rng.gen_range(0..8) {
        let a = match rng.gen_range(0..3) {
            0 => {
                depth += 1;
                Action::Open(NtId(rng.gen_range(0..nts)))
            }
            1 if depth > 1 => {
                depth -= 1;
                Action::Close(NtId(rng.gen_range(0..nts)))
            }
            _ => Action::Shift(WordId(rng.gen_range(0..5))),
        };
        h = h.push(a);
    }
    h
}

/// One randomized pool: checks the survivor cap and that the survivors
/// are the top-scored Opens, ties broken by position.
pub fn cap_trial<R: Rng>(rng: &mut R, models: &[PruneModel]) -> Result<(), String> {
    let model = &models[rng.gen_range(0..models.len())];
    let nts = model.num_nonterminals() as u32;
    let p = match rng.gen_range(0..4) {
        0 => rng.gen_range(1..=nts) as f64 / nts as f64,
        1 => 8.0 / 26.0,
        _ => rng.gen_range(0.01..1.0),
    };
    let pruner = CoarsePruner::new(model.clone(), p, model.vocab()).map_err(|e| e.to_string())?;
    let histories: Vec<History> = (0..rng.gen_range(1..4)).map(|_| random_history(rng, nts)).collect();
    let n = rng.gen_range(1..60);
    let specs: Vec<(usize, Option<WordId>, Action)> = (0..n)
        .map(|_| {
            let word = if rng.gen_bool(0.9) {
                Some(WordId(rng.gen_range(0..5)))
            } else {
                None
            };
            (
                rng.gen_range(0..histories.len()),
                word,
                Action::Open(NtId(rng.gen_range(0..nts))),
            )
        })
        .collect();
    let pool: Vec<OpenCandidate<'_>> = specs
        .iter()
        .map(|&(h, next_word, action)| OpenCandidate {
            history: &histories[h],
            next_word,
            action,
        })
        .collect();
    let decision = pruner.filter(&pool);
    let scores: Vec<f64> = specs
        .iter()
        .map(|&(h, w, a)| {
            let lp = model.log_probs(&model.input_for(&histories[h], w));
            lp[CollapsedAction::from(a).index(nts as usize) as usize]
        })
        .collect();
    let cap = ((p * n as f64 + 1e-9).floor() as usize).max(1);
    let kept: Vec<usize> = (0..n).filter(|&i| decision.keep[i]).collect();
    if kept.len() > cap {
        return Err(format!(
            "{} survivors over cap {} (n = {}, p = {})",
            kept.len(),
            cap,
            n,
            p
        ));
    }
    let expected: Vec<usize> = (0..n)
        .filter(|&i| {
            let better = (0..n)
                .filter(|&j| scores[j] > scores[i] || (scores[j] == scores[i] && j < i))
                .count();
            better < cap
        })
        .collect();
    if kept != expected {
        return Err(format!("kept {:?}, expected {:?}", kept, expected));
    }
    Ok(())
}

pub fn cap_models(seed: u64) -> Vec<PruneModel> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<String> = (0..26).map(|i| format!("L{}", i)).collect();
    let vocab = Vocabulary::new(&labels, ["a", "b", "c", "d"]);
    let small = Vocabulary::new(["S", "NP", "VP"], ["a", "b", "c", "d"]);
    vec![
        PruneModel::random(&vocab, 2, 4, 8, &mut rng),
        PruneModel::random(&vocab, 0, 3, 5, &mut rng),
        PruneModel::random(&small, 1, 3, 5, &mut rng),
        PruneModel::zeros(&vocab, 1, 3, 4),
    ]
}
