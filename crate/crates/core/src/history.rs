//! Persistent (shared-tail) lists used for hypothesis histories and open
//! constituent stacks. Extending a list is O(1) and never copies the prefix.

use std::fmt;
use std::sync::Arc;

use crate::treebank::Action;

struct Cell<T> {
    value: T,
    rest: Option<Arc<Cell<T>>>,
}

/// Immutable singly-linked list, newest element first.
pub struct ConsList<T> {
    head: Option<Arc<Cell<T>>>,
    len: usize,
}

/// The actions taken so far by a hypothesis.
pub type History = ConsList<Action>;

impl<T> ConsList<T> {
    pub fn new() -> Self {
        ConsList { head: None, len: 0 }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// A new list with `value` appended at the newest end.
    pub fn push(&self, value: T) -> Self {
        ConsList {
            head: Some(Arc::new(Cell {
                value,
                rest: self.head.clone(),
            })),
            len: self.len + 1,
        }
    }

    /// The list without its newest element.
    pub fn pop(&self) -> Self {
        match &self.head {
            None => ConsList::new(),
            Some(cell) => ConsList {
                head: cell.rest.clone(),
                len: self.len - 1,
            },
        }
    }

    pub fn last(&self) -> Option<&T> {
        self.head.as_ref().map(|c| &c.value)
    }

    /// Iterates from newest to oldest.
    pub fn iter_rev(&self) -> IterRev<'_, T> {
        IterRev {
            next: self.head.as_deref(),
        }
    }
}

impl<T: Clone> ConsList<T> {
    /// Oldest-first copy of the list.
    pub fn to_vec(&self) -> Vec<T> {
        let mut v: Vec<T> = self.iter_rev().cloned().collect();
        v.reverse();
        v
    }

    pub fn from_slice(items: &[T]) -> Self {
        items.iter().fold(ConsList::new(), |list, item| list.push(item.clone()))
    }
}

impl<T> Clone for ConsList<T> {
    fn clone(&self) -> Self {
        ConsList {
            head: self.head.clone(),
            len: self.len,
        }
    }
}

impl<T> Default for ConsList<T> {
    fn default() -> Self {
        ConsList::new()
    }
}

impl<T: fmt::Debug + Clone> fmt::Debug for ConsList<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.to_vec()).finish()
    }
}

impl<T: PartialEq> PartialEq for ConsList<T> {
    fn eq(&self, other: &Self) -> bool {
        self.len == other.len && self.iter_rev().eq(other.iter_rev())
    }
}

impl<T: Eq> Eq for ConsList<T> {}

// Long chains would otherwise be dropped recursively.
impl<T> Drop for ConsList<T> {
    fn drop(&mut self) {
        let mut next = self.head.take();
        while let Some(cell) = next {
            match Arc::try_unwrap(cell) {
                Ok(mut cell) => next = cell.rest.take(),
                Err(_) => break,
            }
        }
    }
}

pub struct IterRev<'a, T> {
    next: Option<&'a Cell<T>>,
}

impl<'a, T> Iterator for IterRev<'a, T> {
    type Item = &'a T;

    fn next(&mut self) -> Option<&'a T> {
        self.next.map(|cell| {
            self.next = cell.rest.as_deref();
            &cell.value
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sharing_and_order() {
        let a = ConsList::new().push(1).push(2);
        let b = a.push(3);
        let c = a.push(4);
        assert_eq!(a.to_vec(), vec![1, 2]);
        assert_eq!(b.to_vec(), vec![1, 2, 3]);
        assert_eq!(c.to_vec(), vec![1, 2, 4]);
        assert_eq!(c.pop(), a);
        assert_eq!(b.last(), Some(&3));
        assert_eq!(b.iter_rev().copied().collect::<Vec<_>>(), vec![3, 2, 1]);
    }

    #[test]
    fn deep_list_drops_without_overflow() {
        let mut list = ConsList::new();
        for i in 0..1_000_000u32 {
            list = list.push(i);
        }
        assert_eq!(list.len(), 1_000_000);
        drop(list);
    }
}
