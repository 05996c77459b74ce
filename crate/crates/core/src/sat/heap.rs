/// Binary max-heap of variable indices keyed by activity. Ties go to the
/// lower variable index.
#[derive(Debug, Clone, Default)]
pub(crate) struct VarHeap {
    heap: Vec<u32>,
    /// Position of each variable in `heap`, `u32::MAX` when absent.
    index: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

#[inline]
fn before(act: &[f64], a: u32, b: u32) -> bool {
    let (x, y) = (act[a as usize], act[b as usize]);
    x > y || (x == y && a < b)
}

impl VarHeap {
    pub fn grow(&mut self, n: usize) {
        if self.index.len() < n {
            self.index.resize(n, ABSENT);
        }
    }

    pub fn contains(&self, v: u32) -> bool {
        self.index.get(v as usize).is_some_and(|&i| i != ABSENT)
    }

    pub fn insert(&mut self, v: u32, act: &[f64]) {
        self.grow(v as usize + 1);
        if self.contains(v) {
            return;
        }
        self.index[v as usize] = self.heap.len() as u32;
        self.heap.push(v);
        self.sift_up(self.heap.len() - 1, act);
    }

    /// Restores the heap property after `v`'s activity increased.
    pub fn increased(&mut self, v: u32, act: &[f64]) {
        if self.contains(v) {
            self.sift_up(self.index[v as usize] as usize, act);
        }
    }

    pub fn pop(&mut self, act: &[f64]) -> Option<u32> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().expect("non-empty");
        self.index[top as usize] = ABSENT;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.index[last as usize] = 0;
            self.sift_down(0, act);
        }
        Some(top)
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            let p = self.heap[parent];
            if !before(act, v, p) {
                break;
            }
            self.heap[i] = p;
            self.index[p as usize] = i as u32;
            i = parent;
        }
        self.heap[i] = v;
        self.index[v as usize] = i as u32;
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let left = 2 * i + 1;
            if left >= n {
                break;
            }
            let right = left + 1;
            let child = if right < n && before(act, self.heap[right], self.heap[left]) {
                right
            } else {
                left
            };
            let c = self.heap[child];
            if !before(act, c, v) {
                break;
            }
            self.heap[i] = c;
            self.index[c as usize] = i as u32;
            i = child;
        }
        self.heap[i] = v;
        self.index[v as usize] = i as u32;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pops_by_activity_then_index() {
        let act = vec![1.0, 3.0, 3.0, 0.5, 2.0];
        let mut h = VarHeap::default();
        for v in [4, 3, 2, 1, 0] {
            h.insert(v, &act);
        }
        let order: Vec<u32> = std::iter::from_fn(|| h.pop(&act)).collect();
        assert_eq!(order, vec![1, 2, 4, 0, 3]);
    }

    #[test]
    fn increase_key() {
        let mut act = vec![0.0; 4];
        let mut h = VarHeap::default();
        for v in 0..4 {
            h.insert(v, &act);
        }
        act[3] = 5.0;
        h.increased(3, &act);
        assert_eq!(h.pop(&act), Some(3));
        assert_eq!(h.pop(&act), Some(0));
    }
}
