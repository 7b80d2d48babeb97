use super::hypothesis::rank;
use super::{
    expand, sort_and_truncate, BucketEvent, Hypothesis, SearchConfig, SearchError, SearchOptions, SearchOutcome,
    SearchStats,
};
use crate::scoring::Scorer;
use crate::treebank::WordId;

/// Conventional beam search over action steps: at every step all successors
/// of the beam are pooled, the top `k` survive, and complete ones move to the
/// finished list. Only `beam_size` and the structural caps of `config` are
/// used.
pub fn action_level_search(
    sentence: &[WordId],
    scorer: &dyn Scorer,
    config: &SearchConfig,
    options: SearchOptions<'_>,
) -> Result<SearchOutcome, SearchError> {
    if config.beam_size == 0 || config.max_open == 0 || config.max_struct_per_word == 0 {
        return Err(SearchError::InvalidConfig(
            "beam size and caps must be at least 1".into(),
        ));
    }
    if sentence.is_empty() {
        return Err(SearchError::EmptySentence);
    }
    let mut stats = SearchStats::default();
    let mut seq = 0u64;
    let mut beam = vec![Hypothesis::initial()];
    let mut finished = Vec::new();
    // Sequence number of the beam entry matching the gold prefix, if any.
    let mut gold_seq = options.gold.map(|_| 0u64);

    for step in 0..config.max_sequence_len(sentence.len()) {
        if beam.is_empty() {
            break;
        }
        stats.buckets_visited += 1;
        let size = beam.len();
        let mut successors = expand(&beam, sentence, scorer, config, options.filter, &mut seq, &mut stats)?;
        let pool = successors.len();
        let shifts_in_pool = successors
            .iter()
            .filter(|h| h.last_action().is_some_and(|a| a.is_shift()))
            .count();

        let gold_child = match (options.gold, gold_seq) {
            (Some(gold), Some(parent)) if step < gold.len() => successors
                .iter()
                .find(|h| h.parent_seq() == parent && h.last_action() == Some(gold[step]))
                .map(Hypothesis::seq),
            _ => None,
        };

        sort_and_truncate(&mut successors, config.beam_size);

        if gold_seq.is_some() {
            gold_seq = gold_child.filter(|s| successors.iter().any(|h| h.seq() == *s));
            if gold_seq.is_none() && stats.gold_dropped_at.is_none() {
                stats.gold_dropped_at = Some(step);
            }
        }

        beam = Vec::with_capacity(successors.len());
        for h in successors {
            if h.is_complete() {
                finished.push(h);
            } else {
                beam.push(h);
            }
        }
        if options.trace {
            stats.events.push(BucketEvent {
                i: 0,
                j: step,
                size,
                pool,
                shifts_in_pool,
                fast_tracked: 0,
                next_word_bucket: 0,
            });
        }
    }
    finished.sort_unstable_by(rank);
    Ok(SearchOutcome {
        completed: finished,
        stats,
    })
}
