//! Relay sequencing over the electrode array.

use serde::{Deserialize, Serialize};

use super::AcqError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
/// Electrode ids are 1-based.
pub struct ElectrodePair {
    pub source: u8,
    pub sink: u8,
}

impl ElectrodePair {
    /// Relay bitmask: bit `i - 1` closes the relay of electrode `i`.
    pub fn mask(&self) -> u32 {
        (1 << (self.source - 1)) | (1 << (self.sink - 1))
    }

    /// Pattern label such as `E1-E4`.
    pub fn label(&self) -> String {
        format!("E{}-E{}", self.source, self.sink)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanPolicy {
    /// Every unordered pair, in lexicographic order.
    #[default]
    AllPairs,
    /// Neighbouring electrodes around a ring.
    Adjacent,
}

/// Ordered list of pairs measured in one scan; one pair is connected per step.
pub fn relay_scan(electrodes: u8, policy: ScanPolicy) -> Result<Vec<ElectrodePair>, AcqError> {
    if !(2..=32).contains(&electrodes) {
        return Err(AcqError::InvalidConfig(format!(
            "electrode count {electrodes} outside 2..=32"
        )));
    }
    Ok(match policy {
        ScanPolicy::AllPairs => (1..=electrodes)
            .flat_map(|s| (s + 1..=electrodes).map(move |t| ElectrodePair { source: s, sink: t }))
            .collect(),
        ScanPolicy::Adjacent if electrodes == 2 => vec![ElectrodePair { source: 1, sink: 2 }],
        ScanPolicy::Adjacent => (1..=electrodes)
            .map(|s| ElectrodePair {
                source: s,
                sink: s % electrodes + 1,
            })
            .collect(),
    })
}
