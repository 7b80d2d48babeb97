use std::collections::{BTreeMap, HashMap};

use super::{NtId, Tree, TreebankError, WordId};

/// Surface form of the reserved unknown-word token (always word id 0).
pub const UNK: &str = "<unk>";

/// Dense, bidirectional mapping between symbols and small integer ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymbolTable {
    symbols: Vec<String>,
    index: HashMap<String, u32>,
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `symbol` if absent and returns its id.
    pub fn intern(&mut self, symbol: &str) -> u32 {
        if let Some(&id) = self.index.get(symbol) {
            return id;
        }
        let id = self.symbols.len() as u32;
        self.symbols.push(symbol.to_string());
        self.index.insert(symbol.to_string(), id);
        id
    }

    pub fn get(&self, symbol: &str) -> Option<u32> {
        self.index.get(symbol).copied()
    }

    pub fn symbol(&self, id: u32) -> &str {
        &self.symbols[id as usize]
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.symbols.iter().map(String::as_str)
    }
}

impl<S: AsRef<str>> FromIterator<S> for SymbolTable {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let mut table = SymbolTable::new();
        for s in iter {
            table.intern(s.as_ref());
        }
        table
    }
}

/// Closed nonterminal and word vocabularies shared by scorers and search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    nonterminals: SymbolTable,
    words: SymbolTable,
}

impl Vocabulary {
    /// Builds a vocabulary from explicit symbol lists. [`UNK`] is inserted
    /// as word 0 if the list does not already start with it.
    pub fn new<A, B>(nonterminals: A, words: B) -> Vocabulary
    where
        A: IntoIterator,
        A::Item: AsRef<str>,
        B: IntoIterator,
        B::Item: AsRef<str>,
    {
        let nonterminals = nonterminals.into_iter().collect();
        let mut table = SymbolTable::new();
        table.intern(UNK);
        for w in words {
            table.intern(w.as_ref());
        }
        Vocabulary {
            nonterminals,
            words: table,
        }
    }

    pub fn nonterminals(&self) -> &SymbolTable {
        &self.nonterminals
    }

    pub fn words(&self) -> &SymbolTable {
        &self.words
    }

    pub fn num_nonterminals(&self) -> usize {
        self.nonterminals.len()
    }

    pub fn num_words(&self) -> usize {
        self.words.len()
    }

    pub fn nonterminal(&self, label: &str) -> Option<NtId> {
        self.nonterminals.get(label).map(NtId)
    }

    pub fn label(&self, id: NtId) -> &str {
        self.nonterminals.symbol(id.0)
    }

    /// Id of `surface`, or the unknown-word id for out-of-vocabulary forms.
    pub fn word(&self, surface: &str) -> WordId {
        WordId(self.words.get(surface).unwrap_or(0))
    }

    pub fn unk(&self) -> WordId {
        WordId(0)
    }

    pub fn surface(&self, id: WordId) -> &str {
        self.words.symbol(id.0)
    }

    pub fn sentence<S: AsRef<str>>(&self, words: &[S]) -> Sentence {
        Sentence {
            tokens: words
                .iter()
                .map(|w| WordToken {
                    id: self.word(w.as_ref()),
                    surface: w.as_ref().to_string(),
                })
                .collect(),
        }
    }

    /// The sentence spelled by the leaves of `tree`.
    pub fn sentence_of(&self, tree: &Tree) -> Sentence {
        self.sentence(&tree.leaves())
    }
}

/// A word with its vocabulary id and original surface form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WordToken {
    pub id: WordId,
    pub surface: String,
}

/// Input sentence; surfaces are kept so decoded trees print original words.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Sentence {
    pub tokens: Vec<WordToken>,
}

impl Sentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn ids(&self) -> Vec<WordId> {
        self.tokens.iter().map(|t| t.id).collect()
    }

    pub fn surfaces(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.surface.as_str()).collect()
    }
}

fn ranked(counts: BTreeMap<&str, usize>) -> Vec<(&str, usize)> {
    let mut ranked: Vec<_> = counts.into_iter().collect();
    // BTreeMap iteration is lexicographic, and the sort is stable.
    ranked.sort_by_key(|&(_, n)| std::cmp::Reverse(n));
    ranked
}

/// Collects nonterminal labels and words with `count >= min_count`. Ids are
/// assigned by descending frequency with lexicographic tie-breaking; word 0
/// is always [`UNK`].
pub fn build_vocab(trees: &[Tree], min_count: usize) -> Result<Vocabulary, TreebankError> {
    if trees.is_empty() {
        return Err(TreebankError::EmptyTreebank);
    }
    let mut labels: BTreeMap<&str, usize> = BTreeMap::new();
    let mut words: BTreeMap<&str, usize> = BTreeMap::new();
    for t in trees {
        for l in t.labels() {
            *labels.entry(l).or_default() += 1;
        }
        for w in t.leaves() {
            *words.entry(w).or_default() += 1;
        }
    }
    let nonterminals = ranked(labels).into_iter().map(|(l, _)| l);
    let words = ranked(words)
        .into_iter()
        .filter(|&(w, c)| c >= min_count && w != UNK)
        .map(|(w, _)| w);
    Ok(Vocabulary::new(nonterminals, words))
}
