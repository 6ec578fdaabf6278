use core::ops::Range;

/// A token span addressed by the indexes of its first and last tokens.
///
/// Both endpoints are inclusive, which is how spans appear in every file this
/// project reads or writes. Slicing code wants half-open ranges; the only
/// place the two conventions meet is [`Span::to_range`] / [`Span::from_range`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub const fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub const fn single(index: usize) -> Self {
        Span { start: index, end: index }
    }

    /// Converts a non-empty half-open range.
    pub fn from_range(range: Range<usize>) -> Option<Self> {
        if range.start < range.end {
            Some(Span::new(range.start, range.end - 1))
        } else {
            None
        }
    }

    pub fn to_range(self) -> Range<usize> {
        self.start..self.end + 1
    }

    pub fn len(self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(self) -> bool {
        false
    }

    pub fn is_ordered(self) -> bool {
        self.start <= self.end
    }

    /// True when the span is ordered and lies inside a sequence of `token_count` tokens.
    pub fn fits(self, token_count: usize) -> bool {
        self.is_ordered() && self.end < token_count
    }

    pub fn contains(self, index: usize) -> bool {
        self.start <= index && index <= self.end
    }

    /// Number of tokens shared with `other`.
    pub fn overlap(self, other: Span) -> usize {
        let lo = self.start.max(other.start);
        let hi = self.end.min(other.end);
        if lo <= hi {
            hi - lo + 1
        } else {
            0
        }
    }

    pub fn overlaps(self, other: Span) -> bool {
        self.overlap(other) > 0
    }

    pub fn shifted(self, delta: isize) -> Span {
        Span::new(
            (self.start as isize + delta) as usize,
            (self.end as isize + delta) as usize,
        )
    }
}

impl core::fmt::Display for Span {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "[{}, {}]", self.start, self.end)
    }
}
