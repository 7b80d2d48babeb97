use super::{Tree, TreebankError};

/// How preterminal (part-of-speech) nodes above words are treated on input.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PosPolicy {
    /// Keep every node as written.
    Keep,
    /// Remove every unary node whose only child is a word (the root excepted).
    Strip,
    /// Strip only if every word in the input sits under a unary preterminal,
    /// i.e. the text looks like a POS-tagged treebank.
    #[default]
    Auto,
}

/// Input normalisation applied by [`parse_bracketed`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReadOptions {
    pub pos: PosPolicy,
    /// `NP-SBJ-1` becomes `NP`, `NP=2` becomes `NP`.
    pub strip_function_tags: bool,
    /// Drop `-NONE-` subtrees and any constituent left without children.
    pub remove_empty: bool,
    /// Drop an outer wrapper labelled ``, `ROOT` or `TOP` with a single child.
    pub unwrap_root: bool,
}

impl Default for ReadOptions {
    fn default() -> Self {
        ReadOptions {
            pos: PosPolicy::Auto,
            strip_function_tags: true,
            remove_empty: true,
            unwrap_root: true,
        }
    }
}

impl ReadOptions {
    /// Parse trees exactly as written.
    pub fn raw() -> Self {
        ReadOptions {
            pos: PosPolicy::Keep,
            strip_function_tags: false,
            remove_empty: false,
            unwrap_root: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Token<'a> {
    Open(usize),
    Close(usize),
    Atom(usize, &'a str),
}

fn tokenize(text: &str) -> Vec<Token<'_>> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b == b'(' {
            tokens.push(Token::Open(i));
            i += 1;
        } else if b == b')' {
            tokens.push(Token::Close(i));
            i += 1;
        } else if b.is_ascii_whitespace() {
            i += 1;
        } else {
            let start = i;
            while i < bytes.len() {
                let c = bytes[i];
                if c == b'(' || c == b')' || c.is_ascii_whitespace() {
                    break;
                }
                i += 1;
            }
            tokens.push(Token::Atom(start, &text[start..i]));
        }
    }
    tokens
}

struct Frame {
    label: String,
    children: Vec<Tree>,
    offset: usize,
}

fn parse_raw(text: &str) -> Result<Vec<(usize, Tree)>, TreebankError> {
    let tokens = tokenize(text);
    let mut trees = Vec::new();
    let mut stack: Vec<Frame> = Vec::new();
    let mut pos = 0;
    while pos < tokens.len() {
        match tokens[pos] {
            Token::Open(offset) => {
                let label = match tokens.get(pos + 1) {
                    Some(Token::Atom(_, a)) => {
                        pos += 1;
                        (*a).to_string()
                    }
                    _ => String::new(),
                };
                stack.push(Frame {
                    label,
                    children: Vec::new(),
                    offset,
                });
            }
            Token::Atom(offset, atom) => match stack.last_mut() {
                Some(frame) => frame.children.push(Tree::Leaf(atom.to_string())),
                None => {
                    return Err(TreebankError::Parse {
                        offset,
                        message: format!("word `{}` outside of any bracket", atom),
                    })
                }
            },
            Token::Close(offset) => {
                let frame = stack.pop().ok_or_else(|| TreebankError::Parse {
                    offset,
                    message: "unbalanced `)`".to_string(),
                })?;
                if frame.children.is_empty() {
                    return Err(TreebankError::Structure {
                        offset: frame.offset,
                        message: format!("constituent `{}` has no children", frame.label),
                    });
                }
                let node = Tree::Node {
                    label: frame.label,
                    children: frame.children,
                };
                match stack.last_mut() {
                    Some(parent) => parent.children.push(node),
                    None => trees.push((frame.offset, node)),
                }
            }
        }
        pos += 1;
    }
    if let Some(frame) = stack.first() {
        return Err(TreebankError::Parse {
            offset: text.len(),
            message: format!(
                "unbalanced at end of input: `(` at byte {} is never closed",
                frame.offset
            ),
        });
    }
    Ok(trees)
}

fn base_label(label: &str) -> &str {
    if label.starts_with('-') {
        return label;
    }
    match label.find(['-', '=']) {
        Some(cut) if cut > 0 => &label[..cut],
        _ => label,
    }
}

fn strip_function_tags(tree: &mut Tree) {
    if let Tree::Node { label, children } = tree {
        let base = base_label(label);
        if base.len() != label.len() {
            *label = base.to_string();
        }
        for c in children {
            strip_function_tags(c);
        }
    }
}

/// Returns false if the subtree vanished entirely.
fn remove_empty(tree: &mut Tree) -> bool {
    match tree {
        Tree::Leaf(_) => true,
        Tree::Node { label, children } => {
            if label == "-NONE-" {
                return false;
            }
            children.retain_mut(remove_empty);
            !children.is_empty()
        }
    }
}

fn unwrap_root(tree: Tree) -> Tree {
    let mut tree = tree;
    loop {
        match tree {
            Tree::Node {
                ref label,
                ref children,
            } if (label.is_empty() || label == "ROOT" || label == "TOP")
                && children.len() == 1
                && !children[0].is_leaf() =>
            {
                if let Tree::Node { mut children, .. } = tree {
                    tree = children.pop().unwrap();
                }
            }
            _ => return tree,
        }
    }
}

fn is_preterminal(tree: &Tree) -> bool {
    match tree {
        Tree::Node { children, .. } => children.len() == 1 && children[0].is_leaf(),
        Tree::Leaf(_) => false,
    }
}

/// True if every word hangs below a unary preterminal.
fn fully_tagged(tree: &Tree) -> bool {
    match tree {
        Tree::Leaf(_) => false,
        Tree::Node { children, .. } => {
            if is_preterminal(tree) {
                return true;
            }
            children.iter().all(fully_tagged)
        }
    }
}

fn strip_preterminals(tree: &mut Tree) {
    if let Tree::Node { children, .. } = tree {
        for c in children.iter_mut() {
            if is_preterminal(c) {
                let word = match c {
                    Tree::Node { children, .. } => children.pop().unwrap(),
                    Tree::Leaf(_) => unreachable!(),
                };
                *c = word;
            } else {
                strip_preterminals(c);
            }
        }
    }
}

/// Parses one or more bracketed trees, applying the normalisation in `options`.
pub fn parse_bracketed(text: &str, options: &ReadOptions) -> Result<Vec<Tree>, TreebankError> {
    let raw = parse_raw(text)?;
    let mut trees = Vec::with_capacity(raw.len());
    for (offset, mut tree) in raw {
        if options.remove_empty && !remove_empty(&mut tree) {
            return Err(TreebankError::Structure {
                offset,
                message: "tree is empty after removing empty elements".to_string(),
            });
        }
        if options.strip_function_tags {
            strip_function_tags(&mut tree);
        }
        if options.unwrap_root {
            tree = unwrap_root(tree);
        }
        trees.push(tree);
    }
    let strip = match options.pos {
        PosPolicy::Keep => false,
        PosPolicy::Strip => true,
        PosPolicy::Auto => !trees.is_empty() && trees.iter().all(fully_tagged),
    };
    if strip {
        for t in &mut trees {
            strip_preterminals(t);
        }
    }
    Ok(trees)
}

/// Canonical single-line form with single spaces and no outer wrapper.
pub fn serialize_bracketed(tree: &Tree) -> String {
    tree.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = "(S (NP He) (VP had (NP an idea)) .)";

    #[test]
    fn parses_example_sentence() {
        let trees = parse_bracketed(EXAMPLE, &ReadOptions::default()).unwrap();
        assert_eq!(trees.len(), 1);
        let expected = Tree::node(
            "S",
            vec![
                Tree::node("NP", vec![Tree::leaf("He")]),
                Tree::node(
                    "VP",
                    vec![
                        Tree::leaf("had"),
                        Tree::node("NP", vec![Tree::leaf("an"), Tree::leaf("idea")]),
                    ],
                ),
                Tree::leaf("."),
            ],
        );
        assert_eq!(trees[0], expected);
        assert_eq!(serialize_bracketed(&trees[0]), EXAMPLE);
    }

    #[test]
    fn minimal_tree() {
        let trees = parse_bracketed("(X w)", &ReadOptions::default()).unwrap();
        assert_eq!(trees, vec![Tree::node("X", vec![Tree::leaf("w")])]);
        assert_eq!(serialize_bracketed(&trees[0]), "(X w)");
    }

    #[test]
    fn unbalanced_at_end() {
        let err = parse_bracketed("(S (NP He)", &ReadOptions::default()).unwrap_err();
        match err {
            TreebankError::Parse { offset, message } => {
                assert_eq!(offset, 10);
                assert!(message.contains("end of input"));
            }
            other => panic!("unexpected {:?}", other),
        }
    }

    #[test]
    fn stray_close_reports_offset() {
        let err = parse_bracketed("(X w))", &ReadOptions::raw()).unwrap_err();
        assert_eq!(
            err,
            TreebankError::Parse {
                offset: 5,
                message: "unbalanced `)`".into()
            }
        );
    }

    #[test]
    fn zero_child_constituent() {
        let err = parse_bracketed("(S (NP) w)", &ReadOptions::raw()).unwrap_err();
        assert!(matches!(err, TreebankError::Structure { offset: 3, .. }));
    }

    #[test]
    fn several_trees_and_whitespace() {
        let text = "(A x)\n\n  (B (C y)\n z)\n";
        let trees = parse_bracketed(text, &ReadOptions::raw()).unwrap();
        assert_eq!(trees.len(), 2);
        assert_eq!(trees[1].to_string(), "(B (C y) z)");
    }

    #[test]
    fn ptb_style_normalisation() {
        let text = "( (S (NP-SBJ (PRP He)) (VP (VBD had) (NP (DT an) (NN idea)) (NP (-NONE- *T*-1))) (. .)) )";
        let trees = parse_bracketed(text, &ReadOptions::default()).unwrap();
        assert_eq!(trees[0].to_string(), EXAMPLE);
    }

    #[test]
    fn auto_keeps_pos_free_input() {
        // (NP He) looks like a preterminal, but `had` has siblings so the
        // input as a whole is not POS-tagged.
        let trees = parse_bracketed(EXAMPLE, &ReadOptions::default()).unwrap();
        assert_eq!(trees[0].num_internal(), 4);
        let stripped = parse_bracketed(
            EXAMPLE,
            &ReadOptions {
                pos: PosPolicy::Strip,
                ..ReadOptions::default()
            },
        )
        .unwrap();
        assert_eq!(stripped[0].to_string(), "(S He (VP had (NP an idea)) .)");
    }

    #[test]
    fn lrb_labels_survive_tag_stripping() {
        let trees = parse_bracketed(
            "(S (-LRB- -LRB-) (NP-TMP x))",
            &ReadOptions {
                pos: PosPolicy::Keep,
                ..ReadOptions::default()
            },
        )
        .unwrap();
        assert_eq!(trees[0].to_string(), "(S (-LRB- -LRB-) (NP x))");
    }

    #[test]
    fn word_outside_brackets() {
        let err = parse_bracketed("w (X y)", &ReadOptions::raw()).unwrap_err();
        assert!(matches!(err, TreebankError::Parse { offset: 0, .. }));
    }
}
