use std::fmt;

use serde::{Deserialize, Serialize};

/// Operative mode of one virtual small cell. The integer codes are the ones
/// written to every report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    /// Switched off; its users are handed over to the macro cell.
    Off = 0,
    /// All baseband processing runs in the central pool.
    Cran = 1,
    /// LowerPHY runs locally, UpperPHY and above centrally.
    UpperLower = 2,
    /// The whole PHY runs locally, MAC and above centrally.
    MacPhy = 3,
}

impl SplitMode {
    pub const ALL: [SplitMode; 4] = [
        SplitMode::Off,
        SplitMode::Cran,
        SplitMode::UpperLower,
        SplitMode::MacPhy,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            SplitMode::Off => "Off",
            SplitMode::Cran => "CRAN",
            SplitMode::UpperLower => "UpperLower",
            SplitMode::MacPhy => "MACPHY",
        }
    }
}

impl fmt::Display for SplitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Mode vector of a whole cluster packed into base-4 digits, vSC 0 being the
/// most significant digit. Numeric order of codes equals lexicographic order
/// of the mode vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeVector(pub u32);

impl ModeVector {
    pub fn count(n_vsc: usize) -> u32 {
        4u32.pow(n_vsc as u32)
    }

    pub fn from_modes(modes: &[SplitMode]) -> Self {
        ModeVector(modes.iter().fold(0, |acc, m| acc * 4 + m.code() as u32))
    }

    pub fn uniform(mode: SplitMode, n_vsc: usize) -> Self {
        Self::from_modes(&vec![mode; n_vsc])
    }

    pub fn mode(self, vsc: usize, n_vsc: usize) -> SplitMode {
        let shift = 2 * (n_vsc - 1 - vsc);
        SplitMode::from_code(((self.0 >> shift) & 3) as u8).expect("two-bit digit")
    }

    pub fn modes(self, n_vsc: usize) -> Vec<SplitMode> {
        (0..n_vsc).map(|i| self.mode(i, n_vsc)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_follow_operative_mode_numbering() {
        assert_eq!(SplitMode::Off.code(), 0);
        assert_eq!(SplitMode::Cran.code(), 1);
        assert_eq!(SplitMode::UpperLower.code(), 2);
        assert_eq!(SplitMode::MacPhy.code(), 3);
        assert_eq!(SplitMode::from_code(4), None);
    }

    #[test]
    fn mode_vector_round_trip_and_order() {
        let n = 3;
        let mut prev: Option<Vec<SplitMode>> = None;
        for code in 0..ModeVector::count(n) {
            let modes = ModeVector(code).modes(n);
            assert_eq!(ModeVector::from_modes(&modes).0, code);
            if let Some(p) = prev {
                assert!(p < modes, "lexicographic order must follow codes");
            }
            prev = Some(modes);
        }
    }
}
