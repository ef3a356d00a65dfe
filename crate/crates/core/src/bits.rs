/// Fixed-width bit rows stored contiguously; row `i` is a set over `0..width`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitRows {
    words: usize,
    data: Vec<u64>,
}

impl BitRows {
    pub fn new(rows: usize, width: usize) -> Self {
        let words = width.div_ceil(64).max(1);
        BitRows { words, data: vec![0; rows * words] }
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.words..(i + 1) * self.words]
    }

    pub fn set(&mut self, i: usize, bit: usize) {
        self.data[i * self.words + bit / 64] |= 1 << (bit % 64);
    }

    pub fn get(&self, i: usize, bit: usize) -> bool {
        self.data[i * self.words + bit / 64] >> (bit % 64) & 1 == 1
    }

    pub fn any(&self, i: usize) -> bool {
        self.row(i).iter().any(|&w| w != 0)
    }

    pub fn count(&self, i: usize) -> usize {
        self.row(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn ones(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        ones(self.row(i))
    }
}

pub fn is_subset(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

pub fn ones(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(k, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            if w == 0 {
                return None;
            }
            let b = w.trailing_zeros() as usize;
            w &= w - 1;
            Some(k * 64 + b)
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        let mut b = BitRows::new(3, 130);
        b.set(1, 0);
        b.set(1, 129);
        b.set(2, 129);
        assert!(b.get(1, 129) && !b.get(0, 129));
        assert_eq!(b.count(1), 2);
        assert_eq!(b.ones(1).collect::<Vec<_>>(), vec![0, 129]);
        assert!(is_subset(b.row(2), b.row(1)));
        assert!(!is_subset(b.row(1), b.row(2)));
        assert!(!b.any(0));
    }
}
