use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// The nine referent classes a first-person-plural pronoun can denote.
///
/// The declaration order is canonical: it is used for every tie-break in the
/// toolkit and for the row/column order of all 9×9 matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RefClass {
    Board,
    Country,
    Generic,
    Govern,
    Parl,
    Party,
    People,
    SpecPers,
    Union,
}

pub const NUM_CLASSES: usize = 9;

impl RefClass {
    pub const ALL: [RefClass; NUM_CLASSES] = [
        RefClass::Board,
        RefClass::Country,
        RefClass::Generic,
        RefClass::Govern,
        RefClass::Parl,
        RefClass::Party,
        RefClass::People,
        RefClass::SpecPers,
        RefClass::Union,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<RefClass> {
        Self::ALL.get(index).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RefClass::Board => "BOARD",
            RefClass::Country => "COUNTRY",
            RefClass::Generic => "GENERIC",
            RefClass::Govern => "GOVERN",
            RefClass::Parl => "PARL",
            RefClass::Party => "PARTY",
            RefClass::People => "PEOPLE",
            RefClass::SpecPers => "SPECPERS",
            RefClass::Union => "UNION",
        }
    }
}

impl fmt::Display for RefClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RefClass {
    type Err = Error;

    /// Accepts the canonical names plus the long spellings used in result
    /// tables (GOVERNMENT, PARLIAMENT, SPEC_PERSON, ...), case-insensitively.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .trim()
            .chars()
            .filter(|c| !matches!(c, '_' | '-' | ' '))
            .flat_map(char::to_uppercase)
            .collect();
        let class = match norm.as_str() {
            "BOARD" => RefClass::Board,
            "COUNTRY" => RefClass::Country,
            "GENERIC" => RefClass::Generic,
            "GOVERN" | "GOVERNMENT" | "GOVREN" => RefClass::Govern,
            "PARL" | "PARLIAMENT" | "PARLAMENT" => RefClass::Parl,
            "PARTY" => RefClass::Party,
            "PEOPLE" => RefClass::People,
            "SPECPERS" | "SPECPER" | "SPECPERSON" | "SPECPERSONS" | "SPECP" | "SPECIFICPERSONS"
            | "GROUPS" => RefClass::SpecPers,
            "UNION" => RefClass::Union,
            _ => return Err(Error::Invalid(format!("unknown referent class {s:?}"))),
        };
        Ok(class)
    }
}

impl Serialize for RefClass {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for RefClass {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A 9×9 count matrix indexed by canonical class order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[usize; NUM_CLASSES]; NUM_CLASSES],
}

impl ConfusionMatrix {
    pub fn add(&mut self, row: RefClass, col: RefClass) {
        self.counts[row.index()][col.index()] += 1;
    }

    pub fn get(&self, row: RefClass, col: RefClass) -> usize {
        self.counts[row.index()][col.index()]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn row_sum(&self, row: RefClass) -> usize {
        self.counts[row.index()].iter().sum()
    }

    pub fn col_sum(&self, col: RefClass) -> usize {
        self.counts.iter().map(|r| r[col.index()]).sum()
    }

    pub fn transpose(&self) -> ConfusionMatrix {
        let mut out = ConfusionMatrix::default();
        for i in 0..NUM_CLASSES {
            for j in 0..NUM_CLASSES {
                out.counts[j][i] = self.counts[i][j];
            }
        }
        out
    }

    /// Fixed-width text rendering with class names on both axes.
    pub fn render(&self, corner: &str) -> String {
        let mut out = format!("{corner:<10}");
        for c in RefClass::ALL {
            out.push_str(&format!("{:>9}", c.as_str()));
        }
        out.push('\n');
        for r in RefClass::ALL {
            out.push_str(&format!("{:<10}", r.as_str()));
            for c in RefClass::ALL {
                out.push_str(&format!("{:>9}", self.get(r, c)));
            }
            out.push('\n');
        }
        out
    }
}
