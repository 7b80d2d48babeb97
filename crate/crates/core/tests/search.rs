mod common;

use common::{all_sentences, enumerate, enumerate_upto, log_prob, random_table_scorer};
use genparse::scoring::{sequence_log_prob, train_count_scorer, TableScorer};
use genparse::search::{
    action_level_search, check_prefix, decode_corpus, word_level_search, DecodeConfig, SearchConfig, SearchOptions,
    SearchVariant,
};
use genparse::synthetic::Pcfg;
use genparse::treebank::{
    actions_to_tree, build_vocab, tree_to_actions, Action, ActionSpace, NtId, Sentence, Vocabulary,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn exhaustive_config() -> SearchConfig {
    SearchConfig {
        beam_size: 10_000,
        word_beam_size: 10_000,
        fast_track: 0,
        max_open: 3,
        ..SearchConfig::default()
    }
}

#[test]
fn exhaustive_search_matches_enumeration() {
    let space = ActionSpace {
        num_nonterminals: 2,
        num_words: 3,
    };
    let config = exhaustive_config();
    let sentences = all_sentences(2, 3);
    let per_sentence: Vec<_> = sentences.iter().map(|s| enumerate(s, 2, &config)).collect();
    let all: Vec<Vec<Action>> = per_sentence.iter().flatten().cloned().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut scorers = vec![TableScorer::uniform(space)];
    for _ in 0..4 {
        scorers.push(random_table_scorer(space, &all, &mut rng));
    }
    for scorer in &scorers {
        for (sentence, seqs) in sentences.iter().zip(&per_sentence) {
            let best = seqs
                .iter()
                .map(|s| log_prob(scorer, s))
                .fold(f64::NEG_INFINITY, f64::max);
            let out = word_level_search(sentence, scorer, &config, SearchOptions::default()).unwrap();
            let found = out.best().unwrap().log_prob();
            assert!((found - best).abs() < 1e-9, "{:?}: {} vs {}", sentence, found, best);
        }
    }
}

#[test]
fn successors_agree_with_tree_reconstruction() {
    let vocab = Vocabulary::new(["A", "B"], ["x", "y"]);
    let sentence = vocab.sentence(&["x", "y"]);
    let ids = sentence.ids();
    let alphabet = [
        Action::Open(NtId(0)),
        Action::Open(NtId(1)),
        Action::Close(NtId(0)),
        Action::Close(NtId(1)),
        Action::Shift(ids[0]),
        Action::Shift(ids[1]),
    ];
    let config = SearchConfig::default();
    let mut complete = 0;
    let mut seq = Vec::new();
    for len in 1..=8u32 {
        for code in 0..6usize.pow(len) {
            seq.clear();
            let mut c = code;
            for _ in 0..len {
                seq.push(alphabet[c % 6]);
                c /= 6;
            }
            let by_search = matches!(check_prefix(&seq, &ids, 2, &config), Ok(h) if h.is_complete());
            let by_tree = actions_to_tree(&seq, &vocab, &sentence).is_ok();
            assert_eq!(by_search, by_tree, "{:?}", seq);
            complete += by_search as usize;
        }
    }
    let enumerated = enumerate_upto(&ids, 2, &config, 8).len();
    assert_eq!(complete, enumerated);
    assert!(complete > 0);
}

fn benchmark() -> (Vocabulary, genparse::scoring::CountScorer, Vec<Sentence>) {
    let g = Pcfg::ptb_like();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let train = g.corpus(&mut rng, 400, 3, 15);
    let dev = g.corpus(&mut rng, 12, 3, 12);
    let vocab = build_vocab(&train, 5).unwrap();
    let seqs: Vec<_> = train.iter().map(|t| tree_to_actions(t, &vocab).unwrap()).collect();
    let scorer = train_count_scorer(&seqs, &vocab, 3, 0.01).unwrap();
    let sents = dev.iter().map(|t| vocab.sentence_of(t)).collect();
    (vocab, scorer, sents)
}

#[test]
fn fast_track_and_bucket_discipline() {
    let (_, scorer, sents) = benchmark();
    let config = SearchConfig {
        word_beam_size: 4,
        fast_track: 2,
        ..SearchConfig::with_beam(8)
    };
    let options = SearchOptions {
        trace: true,
        ..SearchOptions::default()
    };
    for s in &sents {
        let ids = s.ids();
        let out = word_level_search(&ids, &scorer, &config, options).unwrap();
        assert!(!out.is_empty());
        let mut expected = (0usize, 0usize);
        for e in &out.stats.events {
            if e.i != expected.0 {
                assert_eq!((e.i, e.j), (expected.0 + 1, 0));
            } else {
                assert_eq!(e.j, expected.1);
            }
            expected = (e.i, e.j + 1);
            assert_eq!(e.fast_tracked, config.fast_track.min(e.shifts_in_pool));
            assert!(e.next_word_bucket >= e.fast_tracked);
            if e.j > 0 {
                assert!(e.size <= config.beam_size);
            }
        }
        assert_eq!(out.stats.word_bucket_sizes.len(), ids.len() + 1);
        assert_eq!(out.stats.word_bucket_sizes[0], 1);
        assert!(out.stats.word_bucket_sizes[1..].iter().all(|&b| (1..=4).contains(&b)));
        assert!(out.completed.len() <= config.word_beam_size);
        for h in &out.completed {
            assert_eq!(h.word_index(), ids.len());
            assert!(check_prefix(&h.actions(), &ids, scorer.vocab().num_nonterminals(), &config).is_ok());
        }
        assert!(out.completed.windows(2).all(|w| w[0].log_prob() >= w[1].log_prob()));
    }
}

#[test]
fn scores_are_additive_and_search_is_deterministic() {
    let (vocab, scorer, sents) = benchmark();
    for variant in [SearchVariant::Word, SearchVariant::Action] {
        let config = DecodeConfig {
            search: SearchConfig::with_beam(20),
            variant,
            fallback_root: NtId(0),
            jobs: 1,
        };
        let a = decode_corpus(&sents, &scorer, &vocab, &config, None).unwrap();
        let b = decode_corpus(
            &sents,
            &scorer,
            &vocab,
            &DecodeConfig {
                jobs: 3,
                ..config.clone()
            },
            None,
        )
        .unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.tree, y.tree);
            assert_eq!(x.diagnostics, y.diagnostics);
            if let Some(actions) = &x.actions {
                let lp = sequence_log_prob(&scorer, actions).unwrap();
                assert!((lp - x.diagnostics.log_prob.unwrap()).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn greedy_action_search_loses_gold_at_first_shift() {
    let vocab = Vocabulary::new(["S"], ["w"]);
    let space = ActionSpace::of(&vocab);
    let w = vocab.word("w");
    let s = NtId(0);
    let scorer = TableScorer::from_weights(space, |a| match a {
        Action::Open(_) => 10.0,
        Action::Close(_) => 1.0,
        Action::Shift(_) => 0.5,
    })
    .unwrap();
    let gold = [Action::Open(s), Action::Shift(w), Action::Close(s)];
    let options = SearchOptions {
        gold: Some(&gold),
        ..SearchOptions::default()
    };
    let config = SearchConfig {
        max_struct_per_word: 6,
        ..SearchConfig::with_beam(1)
    };
    let out = action_level_search(&[w], &scorer, &config, options).unwrap();
    assert_eq!(out.stats.gold_dropped_at, Some(1));
    assert_ne!(out.best().unwrap().actions(), gold.to_vec());

    let word_config = SearchConfig {
        fast_track: 1,
        ..config
    };
    let out = word_level_search(&[w], &scorer, &word_config, SearchOptions::default()).unwrap();
    assert_eq!(out.best().unwrap().actions(), gold.to_vec());
}

#[test]
fn word_beam_bottleneck_limits_next_bucket() {
    let (_, scorer, sents) = benchmark();
    for kw in [1, 3, 7] {
        let config = SearchConfig {
            word_beam_size: kw,
            fast_track: 1,
            ..SearchConfig::with_beam(30)
        };
        for s in &sents {
            let out = word_level_search(&s.ids(), &scorer, &config, SearchOptions::default()).unwrap();
            assert!(out.stats.word_bucket_sizes[1..].iter().all(|&b| b <= kw));
        }
    }
}

#[test]
fn unknown_words_still_decode() {
    let (vocab, scorer, _) = benchmark();
    let s = vocab.sentence(&["zzz", "qqq", "."]);
    assert!(s.ids().iter().all(|&w| w == vocab.unk() || vocab.surface(w) == "."));
    let out = word_level_search(
        &s.ids(),
        &scorer,
        &SearchConfig::with_beam(10),
        SearchOptions::default(),
    )
    .unwrap();
    let tree = actions_to_tree(&out.best().unwrap().actions(), &vocab, &s).unwrap();
    assert_eq!(tree.leaves(), vec!["zzz", "qqq", "."]);
}
