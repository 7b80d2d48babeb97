use super::hypothesis::rank;
use super::{
    expand, sort_and_truncate, BucketEvent, Hypothesis, SearchConfig, SearchError, SearchOptions, SearchOutcome,
    SearchStats,
};
use crate::scoring::Scorer;
use crate::treebank::WordId;

/// Word-synchronous beam search over buckets `(i, |A_i|)`.
///
/// For each word position `i`, buckets `(i, 0), (i, 1), ...` are processed
/// in order. The successors of a bucket are pooled; with `fast_track > 0`
/// the best Shift successors move straight to `(i+1, 0)` first. The rest of
/// the pool is cut to the top `beam_size`, and survivors are routed: Shift
/// to `(i+1, 0)`, a root Close to the completed list, any other Open or
/// Close to `(i, j+1)`. Position `i` ends once `(i+1, 0)` holds at least
/// `word_beam_size` hypotheses after a bucket, or when no bucket remains.
pub fn word_level_search(
    sentence: &[WordId],
    scorer: &dyn Scorer,
    config: &SearchConfig,
    options: SearchOptions<'_>,
) -> Result<SearchOutcome, SearchError> {
    config.validate()?;
    if sentence.is_empty() {
        return Err(SearchError::EmptySentence);
    }
    let n = sentence.len();
    let mut stats = SearchStats::default();
    let mut seq = 0u64;
    let mut word_bucket = vec![Hypothesis::initial()];
    let mut completed: Vec<Hypothesis> = Vec::new();

    for i in 0..=n {
        stats.word_bucket_sizes.push(word_bucket.len());
        let mut next_word: Vec<Hypothesis> = Vec::new();
        let mut current = std::mem::take(&mut word_bucket);
        let mut j = 0;
        while !current.is_empty() {
            stats.buckets_visited += 1;
            let size = current.len();
            let mut pool = expand(&current, sentence, scorer, config, options.filter, &mut seq, &mut stats)?;
            let pool_size = pool.len();
            let shifts_in_pool = pool.iter().filter(|h| h.word_index() > i).count();

            let mut fast_tracked = 0;
            if config.fast_track > 0 && shifts_in_pool > 0 {
                let (mut shifts, rest): (Vec<_>, Vec<_>) = pool.into_iter().partition(|h| h.word_index() > i);
                shifts.sort_unstable_by(rank);
                let keep = config.fast_track.min(shifts.len());
                let remaining = shifts.split_off(keep);
                fast_tracked = shifts.len();
                next_word.extend(shifts);
                pool = rest;
                pool.extend(remaining);
            }

            sort_and_truncate(&mut pool, config.beam_size);
            let mut next_struct = Vec::new();
            for h in pool {
                if h.word_index() > i {
                    next_word.push(h);
                } else if h.is_complete() {
                    completed.push(h);
                } else {
                    debug_assert_eq!(h.bucket(), (i, j + 1));
                    next_struct.push(h);
                }
            }
            if options.trace {
                stats.events.push(BucketEvent {
                    i,
                    j,
                    size,
                    pool: pool_size,
                    shifts_in_pool,
                    fast_tracked,
                    next_word_bucket: next_word.len(),
                });
            }
            if i < n && next_word.len() >= config.word_beam_size {
                break;
            }
            current = next_struct;
            j += 1;
        }
        if config.truncate_word_bucket {
            sort_and_truncate(&mut next_word, config.word_beam_size);
        } else {
            sort_and_truncate(&mut next_word, usize::MAX);
        }
        sort_and_truncate(&mut completed, config.word_beam_size);
        word_bucket = next_word;
    }
    debug_assert!(word_bucket.is_empty());
    Ok(SearchOutcome { completed, stats })
}
