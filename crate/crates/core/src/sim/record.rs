use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::geometry::Region;
use crate::pgf::Algorithm;

/// Channel state observed at the end of a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SlotFeedback {
    Idle,
    Single,
    Collision,
}

impl SlotFeedback {
    pub fn from_count(transmitters: usize) -> Self {
        match transmitters {
            0 => SlotFeedback::Idle,
            1 => SlotFeedback::Single,
            _ => SlotFeedback::Collision,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            SlotFeedback::Idle => 'I',
            SlotFeedback::Single => 'S',
            SlotFeedback::Collision => 'C',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            'I' => Some(SlotFeedback::Idle),
            'S' => Some(SlotFeedback::Single),
            'C' => Some(SlotFeedback::Collision),
            _ => None,
        }
    }
}

/// How a relay's progress toward the destination is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProgressMetric {
    /// Euclidean source-relay separation.
    #[default]
    Distance,
    /// Projection of the source-relay vector on the source-destination axis.
    Projection,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SimOptions {
    /// Count the source's request slot in the CRI length.
    pub count_request_slot: bool,
    pub progress: ProgressMetric,
}

/// One slot as seen by an observer.
#[derive(Debug, Clone, Copy)]
pub struct SlotEvent<'a> {
    pub transmitters: &'a [usize],
    pub feedback: SlotFeedback,
    /// Auction partition depth (0 for the opening slot and for STA).
    pub level: usize,
    /// Band answering in this slot, for the auction.
    pub band: Option<&'a Region>,
}

/// Outcome of one contention episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriRecord {
    pub protocol: Algorithm,
    /// Eligible contenders at the start of the episode.
    pub n: usize,
    pub slots: usize,
    pub winner: Option<usize>,
    pub winner_distance: Option<f64>,
    pub winner_progress: Option<f64>,
    /// The source found no relay and backs off.
    pub backed_off: bool,
    #[serde(
        serialize_with = "trace_to_symbols",
        deserialize_with = "trace_from_symbols"
    )]
    pub trace: Vec<SlotFeedback>,
}

impl CriRecord {
    pub fn trace_symbols(&self) -> String {
        self.trace.iter().map(|f| f.symbol()).collect()
    }

    /// Compact single-line JSON.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("records always serialize")
    }
}

fn trace_to_symbols<S: Serializer>(trace: &[SlotFeedback], s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&trace.iter().map(|f| f.symbol()).collect::<String>())
}

fn trace_from_symbols<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<SlotFeedback>, D::Error> {
    let s = String::deserialize(d)?;
    s.chars()
        .map(|c| {
            SlotFeedback::from_symbol(c)
                .ok_or_else(|| serde::de::Error::custom(format!("bad trace symbol {c:?}")))
        })
        .collect()
}
