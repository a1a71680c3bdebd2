//! IntervalSet: a finite union of disjoint closed intervals with exact
//! sweep-line set operations and Lebesgue measure.

/// Gap below which adjacent intervals are merged during normalization, to
/// keep results stable under floating-point noise.
pub const MERGE_GAP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntervalSet {
    /// Sorted, pairwise disjoint [a, b] with b_i + MERGE_GAP < a_{i+1}.
    ivals: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet { ivals: Vec::new() }
    }

    pub fn single(a: f64, b: f64) -> Self {
        IntervalSet::from_raw(vec![(a.min(b), a.max(b))])
    }

    /// Normalizes an arbitrary interval list (sorting, merging overlaps and
    /// sub-MERGE_GAP gaps).
    pub fn from_raw(mut raw: Vec<(f64, f64)>) -> Self {
        for iv in raw.iter_mut() {
            if iv.0 > iv.1 {
                *iv = (iv.1, iv.0);
            }
        }
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (a, b) in raw {
            match out.last_mut() {
                Some(last) if a <= last.1 + MERGE_GAP => last.1 = last.1.max(b),
                _ => out.push((a, b)),
            }
        }
        IntervalSet { ivals: out }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.ivals
    }

    pub fn is_empty(&self) -> bool {
        self.ivals.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.ivals.iter().map(|(a, b)| b - a).sum()
    }

    pub fn translate(&self, dx: f64) -> IntervalSet {
        IntervalSet {
            ivals: self.ivals.iter().map(|&(a, b)| (a + dx, b + dx)).collect(),
        }
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut raw = self.ivals.clone();
        raw.extend_from_slice(&other.ivals);
        IntervalSet::from_raw(raw)
    }

    pub fn intersection(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.ivals.len() && j < other.ivals.len() {
            let (a1, b1) = self.ivals[i];
            let (a2, b2) = other.ivals[j];
            let lo = a1.max(a2);
            let hi = b1.min(b2);
            if lo <= hi {
                out.push((lo, hi));
            }
            if b1 < b2 {
                i += 1;
            } else {
                j += 1;
            }
        }
        IntervalSet::from_raw(out)
    }

    /// Set difference self ∖ other.
    pub fn difference(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        let mut j = 0;
        for &(a, b) in &self.ivals {
            let mut lo = a;
            while j < other.ivals.len() && other.ivals[j].1 < lo {
                j += 1;
            }
            let mut k = j;
            while k < other.ivals.len() && other.ivals[k].0 <= b {
                let (c, d) = other.ivals[k];
                if c > lo {
                    out.push((lo, c));
                }
                lo = lo.max(d);
                if d > b {
                    break;
                }
                k += 1;
            }
            if lo < b {
                out.push((lo, b));
            }
        }
        IntervalSet::from_raw(out)
    }

    pub fn symdiff(&self, other: &IntervalSet) -> IntervalSet {
        self.difference(other).union(&other.difference(self))
    }

    /// Intersection with a single interval [lo, hi].
    pub fn clip(&self, lo: f64, hi: f64) -> IntervalSet {
        self.intersection(&IntervalSet::single(lo, hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn union_basic() {
        let u = IntervalSet::single(0.0, 1.0).union(&IntervalSet::single(0.5, 2.0));
        assert_eq!(u.intervals(), &[(0.0, 2.0)]);
        assert!((u.measure() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn symdiff_identity_and_nested() {
        let a = IntervalSet::single(0.0, 1.0);
        assert!(a.symdiff(&a).is_empty());
        let b = IntervalSet::single(0.25, 0.75);
        let d = a.symdiff(&b);
        assert_eq!(d.intervals().len(), 2);
        assert!((d.measure() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn difference_punches_holes() {
        let a = IntervalSet::single(0.0, 10.0);
        let b = IntervalSet::from_raw(vec![(1.0, 2.0), (3.0, 4.0), (9.5, 11.0)]);
        let d = a.difference(&b);
        assert!((d.measure() - (10.0 - 1.0 - 1.0 - 0.5)).abs() < 1e-12);
        assert_eq!(d.intervals().len(), 3);
    }

    #[test]
    fn tiny_gaps_merge() {
        let s = IntervalSet::from_raw(vec![(0.0, 1.0), (1.0 + 1e-13, 2.0)]);
        assert_eq!(s.intervals().len(), 1);
    }
}
