//! Static round schedule: every process derives the same segment offsets
//! from the member count alone, so processes outside a recursing half know
//! exactly how long to wait.

use crate::committee_dissemination::CD_ROUNDS;
use crate::graded_consensus::GC_ROUNDS;

/// `(⌈m/2⌉, ⌊m/2⌋)`: the sizes of the first and second half.
pub fn halves(m: usize) -> (usize, usize) {
    (m.div_ceil(2), m / 2)
}

/// Rounds an instance among `n` members takes, with `total(1) = 0`.
pub fn total_rounds(n: usize) -> u32 {
    assert!(n >= 1, "an instance needs at least one member");
    if n == 1 {
        return 0;
    }
    let (a, b) = halves(n);
    2 * (GC_ROUNDS as u32 + CD_ROUNDS as u32) + total_rounds(a) + total_rounds(b)
}

/// Rounds `first..first + len` of an instance (1-based, local).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SegmentSpan {
    pub first: u32,
    pub len: u32,
}

impl SegmentSpan {
    /// Last local round; `first - 1` when the segment is empty.
    pub fn last(&self) -> u32 {
        self.first + self.len - 1
    }

    fn after(prev: SegmentSpan, len: u32) -> Self {
        SegmentSpan {
            first: prev.first + prev.len,
            len,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RoundSchedule {
    pub n: usize,
    pub total_rounds: u32,
    pub gc1: SegmentSpan,
    pub sub_h1: SegmentSpan,
    pub cd1: SegmentSpan,
    pub gc2: SegmentSpan,
    pub sub_h2: SegmentSpan,
    pub cd2: SegmentSpan,
}

pub fn ext_schedule(n: usize) -> RoundSchedule {
    let (a, b) = halves(n);
    let gc = GC_ROUNDS as u32;
    let cd = CD_ROUNDS as u32;
    let (sub_a, sub_b) = if n > 1 {
        (total_rounds(a), total_rounds(b))
    } else {
        (0, 0)
    };
    let gc1 = SegmentSpan { first: 1, len: gc };
    let sub_h1 = SegmentSpan::after(gc1, sub_a);
    let cd1 = SegmentSpan::after(sub_h1, cd);
    let gc2 = SegmentSpan::after(cd1, gc);
    let sub_h2 = SegmentSpan::after(gc2, sub_b);
    let cd2 = SegmentSpan::after(sub_h2, cd);
    RoundSchedule {
        n,
        total_rounds: total_rounds(n),
        gc1,
        sub_h1,
        cd1,
        gc2,
        sub_h2,
        cd2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_totals() {
        assert_eq!(total_rounds(1), 0);
        assert_eq!(total_rounds(2), 20);
        assert_eq!(total_rounds(3), 40);
        assert_eq!(total_rounds(4), 60);
        assert_eq!(total_rounds(8), 140);
    }

    #[test]
    fn segments_tile_the_instance() {
        for n in 2..40 {
            let s = ext_schedule(n);
            assert_eq!(s.cd2.last(), s.total_rounds);
            assert_eq!(s.gc1.len + s.cd1.len + s.gc2.len + s.cd2.len, 20);
        }
    }
}
