//! Synthetic treebanks: unconstrained random trees and samples from a
//! small PCFG whose trees look like preprocessed newswire (26 phrase labels,
//! no part-of-speech layer, Zipfian word frequencies).

use std::collections::HashMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use crate::treebank::Tree;

/// A random tree with `1..=max_words` leaves drawn from `words` and labels
/// drawn from `labels`. Unary chains and flat nodes both occur.
pub fn random_tree<R: Rng, S: AsRef<str>>(rng: &mut R, max_words: usize, labels: &[S], words: &[S]) -> Tree {
    assert!(max_words > 0 && !labels.is_empty() && !words.is_empty());
    let n = rng.gen_range(1..=max_words);
    random_node(rng, n, labels, words, 0)
}

fn random_node<R: Rng, S: AsRef<str>>(rng: &mut R, n: usize, labels: &[S], words: &[S], depth: usize) -> Tree {
    let label = labels[rng.gen_range(0..labels.len())].as_ref();
    if depth < 4 && rng.gen_bool(0.15) {
        return Tree::node(label, vec![random_node(rng, n, labels, words, depth + 1)]);
    }
    let mut children = Vec::new();
    let mut left = n;
    while left > 0 {
        let take = rng.gen_range(1..=left.min(4));
        left -= take;
        if take == 1 && rng.gen_bool(0.6) {
            children.push(Tree::leaf(words[rng.gen_range(0..words.len())].as_ref()));
        } else {
            children.push(random_node(rng, take, labels, words, depth + 1));
        }
    }
    Tree::node(label, children)
}

#[derive(Clone, Debug)]
enum Symbol {
    Phrase(String),
    Word(String),
}

#[derive(Clone, Debug)]
struct Choice<T> {
    items: Vec<T>,
    dist: WeightedIndex<f64>,
}

impl<T> Choice<T> {
    fn new(items: Vec<T>, weights: Vec<f64>) -> Choice<T> {
        Choice {
            items,
            dist: WeightedIndex::new(weights).expect("weights must be positive"),
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> &T {
        &self.items[self.dist.sample(rng)]
    }
}

/// A probabilistic grammar over phrase labels and word classes.
#[derive(Clone, Debug)]
pub struct Pcfg {
    labels: Vec<String>,
    roots: Choice<String>,
    rules: HashMap<String, Choice<Vec<Symbol>>>,
    lexicon: HashMap<String, Choice<String>>,
}

const PTB_LIKE: &str = "
root S 86 | SINV 3 | SBARQ 3 | SQ 2 | FRAG 4 | NP 2

S -> NP VP period : 40
S -> NP VP : 15
S -> VP : 4
S -> PP comma NP VP period : 8
S -> SBAR comma NP VP period : 4
S -> NP ADVP VP period : 5
S -> S comma cc S period : 2
S -> INTJ comma NP VP period : 1
S -> CONJP NP VP period : 0.5
S -> LST NP VP period : 0.4
S -> X NP VP period : 0.3
NP -> dt nn : 20
NP -> dt jj nn : 8
NP -> nnp : 10
NP -> nnp nnp : 6
NP -> prp : 12
NP -> nns : 8
NP -> jj nns : 5
NP -> NP PP : 10
NP -> NP SBAR : 3
NP -> dt ADJP nn : 2
NP -> QP nns : 2
NP -> cd nns : 3
NP -> NP comma NP comma : 1
NP -> NP cc NP : 3
NP -> NP PRN : 0.5
NP -> dt NX : 0.5
NP -> UCP nns : 0.4
NP -> NP RRC : 0.3
NP -> NAC nnp : 0.3
NX -> nn cc nn : 1
UCP -> jj cc NP : 1
RRC -> ADVP PP : 1
NAC -> nnp comma nnp comma : 1
VP -> vbd NP : 20
VP -> vbz NP : 10
VP -> vb NP : 6
VP -> vbd PP : 6
VP -> vbd NP PP : 8
VP -> vbd : 3
VP -> vbz ADJP : 4
VP -> vbd SBAR : 5
VP -> md VP : 6
VP -> to VP : 3
VP -> vbd S : 2
VP -> VP cc VP : 2
VP -> vbd PRT NP : 2
VP -> vbd ADVP : 2
VP -> ADVP vbd NP : 1
PRT -> rp : 1
PP -> in NP : 30
PP -> to NP : 3
PP -> in S : 1
SBAR -> in S : 10
SBAR -> WHNP S : 6
SBAR -> WHADVP S : 3
SBAR -> WHPP S : 0.3
WHNP -> wdt : 5
WHNP -> wp : 5
WHNP -> WHADJP nns : 0.3
WHADJP -> wrb jj : 1
WHADVP -> wrb : 1
WHPP -> in WHNP : 1
ADJP -> jj : 10
ADJP -> rb jj : 6
ADJP -> jj PP : 3
ADJP -> jj cc jj : 1
ADVP -> rb : 10
ADVP -> rb rb : 2
QP -> cd cd : 2
QP -> rb cd : 3
QP -> in cd : 2
PRN -> comma ADVP comma : 1
PRN -> comma PP comma : 1
FRAG -> NP period : 5
FRAG -> PP period : 2
FRAG -> ADJP period : 1
SINV -> S comma vbd NP period : 3
SINV -> ADVP vbz NP period : 1
SBARQ -> WHNP SQ qmark : 3
SBARQ -> WHADVP SQ qmark : 2
SQ -> vbz NP VP : 3
SQ -> md NP VP : 2
SQ -> vbz NP ADJP qmark : 2
INTJ -> uh : 1
CONJP -> rb in : 1
LST -> ls : 1
X -> sym : 1

lex dt 12
lex nn 500
lex nns 250
lex nnp 400
lex jj 250
lex vb 150
lex vbd 200
lex vbz 120
lex in 30
lex cc 3
lex rb 80
lex prp 10
lex cd 60
lex md 8
lex wdt 3
lex wp 4
lex wrb 5
lex rp 10
lex uh 5
lex ls 4
lex sym 3
word period .
word comma ,
word qmark ?
word to to
";

impl Pcfg {
    /// The built-in newswire-like grammar.
    pub fn ptb_like() -> Pcfg {
        Pcfg::from_text(PTB_LIKE)
    }

    /// Grammar text: `root A w | B w`, rules `A -> x y : w`, Zipfian word
    /// classes `lex class size`, and fixed words `word class surface`.
    /// Lowercase right-hand symbols are word classes.
    fn from_text(text: &str) -> Pcfg {
        let mut rules: HashMap<String, (Vec<Vec<Symbol>>, Vec<f64>)> = HashMap::new();
        let mut lexicon = HashMap::new();
        let mut roots = None;
        let mut labels: Vec<String> = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(rest) = line.strip_prefix("root ") {
                let (names, weights): (Vec<_>, Vec<_>) = rest
                    .split('|')
                    .map(|alt| {
                        let (n, w) = alt.trim().split_once(' ').unwrap();
                        (n.to_string(), w.parse::<f64>().unwrap())
                    })
                    .unzip();
                roots = Some(Choice::new(names, weights));
            } else if let Some(rest) = line.strip_prefix("lex ") {
                let (class, size) = rest.split_once(' ').unwrap();
                let size: usize = size.parse().unwrap();
                let words = (0..size).map(|i| format!("{}{}", class, i)).collect();
                let weights = (1..=size).map(|r| 1.0 / (r as f64).powf(1.1)).collect();
                lexicon.insert(class.to_string(), Choice::new(words, weights));
            } else if let Some(rest) = line.strip_prefix("word ") {
                let (class, surface) = rest.split_once(' ').unwrap();
                lexicon.insert(class.to_string(), Choice::new(vec![surface.to_string()], vec![1.0]));
            } else {
                let (lhs, rest) = line.split_once(" -> ").unwrap();
                let (rhs, w) = rest.rsplit_once(" : ").unwrap();
                let rhs = rhs
                    .split_whitespace()
                    .map(|s| {
                        if s.chars().next().unwrap().is_uppercase() {
                            Symbol::Phrase(s.to_string())
                        } else {
                            Symbol::Word(s.to_string())
                        }
                    })
                    .collect();
                if !labels.iter().any(|l| l == lhs) {
                    labels.push(lhs.to_string());
                }
                let entry = rules.entry(lhs.to_string()).or_default();
                entry.0.push(rhs);
                entry.1.push(w.parse().unwrap());
            }
        }
        Pcfg {
            labels,
            roots: roots.expect("grammar needs a root line"),
            rules: rules.into_iter().map(|(k, (r, w))| (k, Choice::new(r, w))).collect(),
            lexicon,
        }
    }

    /// Phrase labels in order of first definition.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Samples one tree, giving up (returning `None`) once it exceeds
    /// `max_words` leaves.
    pub fn sample<R: Rng>(&self, rng: &mut R, max_words: usize) -> Option<Tree> {
        let root = self.roots.sample(rng).clone();
        let mut budget = max_words;
        self.expand(&root, rng, &mut budget)
    }

    fn expand<R: Rng>(&self, label: &str, rng: &mut R, budget: &mut usize) -> Option<Tree> {
        let rhs = self.rules[label].sample(rng);
        let mut children = Vec::with_capacity(rhs.len());
        for sym in rhs {
            match sym {
                Symbol::Phrase(p) => children.push(self.expand(p, rng, budget)?),
                Symbol::Word(class) => {
                    if *budget == 0 {
                        return None;
                    }
                    *budget -= 1;
                    children.push(Tree::leaf(self.lexicon[class].sample(rng).as_str()));
                }
            }
        }
        Some(Tree::node(label, children))
    }

    /// `count` trees with between `min_words` and `max_words` leaves.
    pub fn corpus<R: Rng>(&self, rng: &mut R, count: usize, min_words: usize, max_words: usize) -> Vec<Tree> {
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            if let Some(t) = self.sample(rng, max_words) {
                if t.num_leaves() >= min_words {
                    out.push(t);
                }
            }
        }
        out
    }
}
