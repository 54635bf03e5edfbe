use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::msignal::MdwtVector;

/// Binary class label, written `+1` / `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn as_i8(self) -> i8 {
        match self {
            Label::Positive => 1,
            Label::Negative => -1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Positive => f.write_str("+1"),
            Label::Negative => f.write_str("-1"),
        }
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "+1" | "1" | "1.0" | "+1.0" => Ok(Label::Positive),
            "-1" | "-1.0" => Ok(Label::Negative),
            other => Err(Error::InvalidArgument(format!("label must be +1 or -1, got {other:?}"))),
        }
    }
}

/// One trial in feature space: an mDWT vector per channel plus its class.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTrial {
    pub id: String,
    pub label: Label,
    pub channels: Vec<MdwtVector>,
}

impl FeatureTrial {
    pub fn new(id: impl Into<String>, label: Label, channels: Vec<MdwtVector>) -> Self {
        Self {
            id: id.into(),
            label,
            channels,
        }
    }
}

/// Splits the vectors of one channel (0-based) by class: `(positive, negative)`.
pub fn channel_by_class(trials: &[FeatureTrial], channel: usize) -> (Vec<MdwtVector>, Vec<MdwtVector>) {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for t in trials {
        let v = t.channels[channel].clone();
        match t.label {
            Label::Positive => pos.push(v),
            Label::Negative => neg.push(v),
        }
    }
    (pos, neg)
}

/// Number of channels shared by every trial, or an error if they disagree.
pub fn channel_count(trials: &[FeatureTrial]) -> crate::Result<usize> {
    let first = trials
        .first()
        .ok_or_else(|| Error::InvalidArgument("no trials supplied".into()))?;
    let n = first.channels.len();
    if let Some(t) = trials.iter().find(|t| t.channels.len() != n) {
        return Err(Error::InvalidArgument(format!(
            "trial {} has {} channels, expected {n}",
            t.id,
            t.channels.len()
        )));
    }
    Ok(n)
}
