/// Unique track identity: the scan a track was born on plus a small index
/// distinguishing births at the same scan.
///
/// Labels order lexicographically on `(birth_time, birth_index)`, which is
/// the enumeration order used everywhere a component's tracks are listed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label {
    pub birth_time: u32,
    pub birth_index: u32,
}

impl Label {
    pub fn new(birth_time: u32, birth_index: u32) -> Self {
        Self {
            birth_time,
            birth_index,
        }
    }
}

impl core::fmt::Display for Label {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}.{}", self.birth_time, self.birth_index)
    }
}
