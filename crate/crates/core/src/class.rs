//! The four read classes and their canonical order.

use std::fmt;

/// Read class, in the canonical order used for one-hot encodings,
/// confusion matrices and per-class metric vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ReadClass {
    Chimeric,
    LeftRepeat,
    RightRepeat,
    Regular,
}

pub const NUM_CLASSES: usize = 4;

impl ReadClass {
    pub const ALL: [ReadClass; NUM_CLASSES] = [
        ReadClass::Chimeric,
        ReadClass::LeftRepeat,
        ReadClass::RightRepeat,
        ReadClass::Regular,
    ];

    pub fn index(self) -> usize {
        match self {
            ReadClass::Chimeric => 0,
            ReadClass::LeftRepeat => 1,
            ReadClass::RightRepeat => 2,
            ReadClass::Regular => 3,
        }
    }

    pub fn from_index(i: usize) -> Option<ReadClass> {
        ReadClass::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ReadClass::Chimeric => "chimeric",
            ReadClass::LeftRepeat => "left_repeat",
            ReadClass::RightRepeat => "right_repeat",
            ReadClass::Regular => "regular",
        }
    }

    pub fn parse(s: &str) -> Option<ReadClass> {
        match s {
            "chimeric" => Some(ReadClass::Chimeric),
            "left_repeat" => Some(ReadClass::LeftRepeat),
            "right_repeat" => Some(ReadClass::RightRepeat),
            "regular" => Some(ReadClass::Regular),
            _ => None,
        }
    }

    /// Swap left and right repeat; chimeric and regular are fixed points.
    pub fn mirrored(self) -> ReadClass {
        match self {
            ReadClass::LeftRepeat => ReadClass::RightRepeat,
            ReadClass::RightRepeat => ReadClass::LeftRepeat,
            other => other,
        }
    }
}

impl fmt::Display for ReadClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        for c in ReadClass::ALL {
            assert_eq!(ReadClass::from_index(c.index()), Some(c));
            assert_eq!(ReadClass::parse(c.as_str()), Some(c));
        }
        assert_eq!(ReadClass::parse("bogus"), None);
    }

    #[test]
    fn mirror_is_involution() {
        for c in ReadClass::ALL {
            assert_eq!(c.mirrored().mirrored(), c);
        }
        assert_eq!(ReadClass::LeftRepeat.mirrored(), ReadClass::RightRepeat);
        assert_eq!(ReadClass::Chimeric.mirrored(), ReadClass::Chimeric);
    }
}
