//! Min pairing heap. Constant-time meld is the point: candidate sets are
//! merged up a tree many times and copying them would cost quadratic work.

use std::mem;

struct Node<T> {
    item: T,
    // first-child / next-sibling representation
    child: Option<Box<Node<T>>>,
    sibling: Option<Box<Node<T>>>,
}

pub struct PairingHeap<T: Ord> {
    root: Option<Box<Node<T>>>,
    len: usize,
}

impl<T: Ord> PairingHeap<T> {
    pub fn new() -> Self {
        Self { root: None, len: 0 }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn peek(&self) -> Option<&T> {
        self.root.as_ref().map(|n| &n.item)
    }

    pub fn push(&mut self, item: T) {
        let single = Box::new(Node {
            item,
            child: None,
            sibling: None,
        });
        self.root = Self::meld_roots(self.root.take(), Some(single));
        self.len += 1;
    }

    pub fn pop(&mut self) -> Option<T> {
        let root = self.root.take()?;
        self.len -= 1;
        let Node { item, child, .. } = *root;
        self.root = Self::merge_pairs(child);
        Some(item)
    }

    /// Moves every element of `other` into `self`; O(1).
    pub fn meld(&mut self, mut other: PairingHeap<T>) {
        self.len += other.len;
        other.len = 0;
        self.root = Self::meld_roots(self.root.take(), other.root.take());
    }

    fn meld_roots(a: Option<Box<Node<T>>>, b: Option<Box<Node<T>>>) -> Option<Box<Node<T>>> {
        match (a, b) {
            (None, x) | (x, None) => x,
            (Some(mut a), Some(mut b)) => {
                if b.item < a.item {
                    mem::swap(&mut a, &mut b);
                }
                b.sibling = a.child.take();
                a.child = Some(b);
                Some(a)
            }
        }
    }

    // Two-pass pairing, written iteratively so a root with many children
    // cannot overflow the stack.
    fn merge_pairs(first: Option<Box<Node<T>>>) -> Option<Box<Node<T>>> {
        let mut pairs = Vec::new();
        let mut cur = first;
        while let Some(mut a) = cur {
            match a.sibling.take() {
                Some(mut b) => {
                    cur = b.sibling.take();
                    pairs.push(Self::meld_roots(Some(a), Some(b)).unwrap());
                }
                None => {
                    cur = None;
                    pairs.push(a);
                }
            }
        }
        let mut acc = None;
        while let Some(x) = pairs.pop() {
            acc = Self::meld_roots(Some(x), acc);
        }
        acc
    }
}

impl<T: Ord> Default for PairingHeap<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Ord> Drop for PairingHeap<T> {
    fn drop(&mut self) {
        let mut stack = Vec::new();
        if let Some(r) = self.root.take() {
            stack.push(r);
        }
        while let Some(mut n) = stack.pop() {
            if let Some(c) = n.child.take() {
                stack.push(c);
            }
            if let Some(s) = n.sibling.take() {
                stack.push(s);
            }
        }
    }
}

impl<T: Ord> FromIterator<T> for PairingHeap<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut h = Self::new();
        for item in iter {
            h.push(item);
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn drain<T: Ord>(mut h: PairingHeap<T>) -> Vec<T> {
        let mut out = Vec::new();
        while let Some(x) = h.pop() {
            out.push(x);
        }
        out
    }

    #[test]
    fn pops_in_sorted_order() {
        let h: PairingHeap<i64> = [5, 3, 9, 1, 3, -2].into_iter().collect();
        assert_eq!(h.len(), 6);
        assert_eq!(drain(h), vec![-2, 1, 3, 3, 5, 9]);
    }

    #[test]
    fn peek_does_not_remove() {
        let mut h = PairingHeap::new();
        h.push(4);
        h.push(2);
        assert_eq!(h.peek(), Some(&2));
        assert_eq!(h.peek(), Some(&2));
        assert_eq!(h.len(), 2);
        assert_eq!(h.pop(), Some(2));
        assert_eq!(h.pop(), Some(4));
        assert_eq!(h.pop(), None);
    }

    #[test]
    fn meld_keeps_all_elements_and_the_min() {
        let mut a: PairingHeap<i64> = [7, 11, 3].into_iter().collect();
        let b: PairingHeap<i64> = [5, 1, 20].into_iter().collect();
        a.meld(b);
        assert_eq!(a.len(), 6);
        assert_eq!(a.peek(), Some(&1));
        assert_eq!(drain(a), vec![1, 3, 5, 7, 11, 20]);
    }

    #[test]
    fn meld_with_empty() {
        let mut a: PairingHeap<i64> = [2].into_iter().collect();
        a.meld(PairingHeap::new());
        assert_eq!(a.len(), 1);
        let mut e = PairingHeap::new();
        e.meld(a);
        assert_eq!(drain(e), vec![2]);
    }

    #[test]
    fn survives_many_sequential_inserts() {
        // sequential pushes build one long child list; delete-min must not recurse
        let mut h = PairingHeap::new();
        for i in (0..200_000u32).rev() {
            h.push(i);
        }
        assert_eq!(h.pop(), Some(0));
        assert_eq!(h.len(), 199_999);
    }

    proptest! {
        #[test]
        fn behaves_like_a_sorted_multiset(xs in proptest::collection::vec(any::<i32>(), 0..200),
                                          ys in proptest::collection::vec(any::<i32>(), 0..200)) {
            let mut h: PairingHeap<i32> = xs.iter().copied().collect();
            h.meld(ys.iter().copied().collect());
            let mut expected: Vec<i32> = xs.into_iter().chain(ys).collect();
            expected.sort_unstable();
            prop_assert_eq!(drain(h), expected);
        }
    }
}
