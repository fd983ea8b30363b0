use std::fmt;
use std::str::FromStr;

/// Value representation of a data element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VR {
    AE,
    AS,
    AT,
    CS,
    DA,
    DS,
    DT,
    FD,
    FL,
    IS,
    LO,
    LT,
    OB,
    OD,
    OF,
    OW,
    PN,
    SH,
    SL,
    SQ,
    SS,
    ST,
    TM,
    UC,
    UI,
    UL,
    UN,
    UR,
    US,
    UT,
}

/// Broad shape of the value carried by a VR.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Text,
    PersonName,
    Uid,
    Decimal,
    Integer,
    Float,
    Tag,
    Bytes,
    Sequence,
}

impl VR {
    pub const ALL: [VR; 30] = [
        VR::AE,
        VR::AS,
        VR::AT,
        VR::CS,
        VR::DA,
        VR::DS,
        VR::DT,
        VR::FD,
        VR::FL,
        VR::IS,
        VR::LO,
        VR::LT,
        VR::OB,
        VR::OD,
        VR::OF,
        VR::OW,
        VR::PN,
        VR::SH,
        VR::SL,
        VR::SQ,
        VR::SS,
        VR::ST,
        VR::TM,
        VR::UC,
        VR::UI,
        VR::UL,
        VR::UN,
        VR::UR,
        VR::US,
        VR::UT,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VR::AE => "AE",
            VR::AS => "AS",
            VR::AT => "AT",
            VR::CS => "CS",
            VR::DA => "DA",
            VR::DS => "DS",
            VR::DT => "DT",
            VR::FD => "FD",
            VR::FL => "FL",
            VR::IS => "IS",
            VR::LO => "LO",
            VR::LT => "LT",
            VR::OB => "OB",
            VR::OD => "OD",
            VR::OF => "OF",
            VR::OW => "OW",
            VR::PN => "PN",
            VR::SH => "SH",
            VR::SL => "SL",
            VR::SQ => "SQ",
            VR::SS => "SS",
            VR::ST => "ST",
            VR::TM => "TM",
            VR::UC => "UC",
            VR::UI => "UI",
            VR::UL => "UL",
            VR::UN => "UN",
            VR::UR => "UR",
            VR::US => "US",
            VR::UT => "UT",
        }
    }

    pub fn from_bytes(b: [u8; 2]) -> Option<VR> {
        std::str::from_utf8(&b).ok()?.parse().ok()
    }

    /// Explicit VR encodings with a 2-byte reserved field and a 4-byte length.
    pub fn has_long_length(self) -> bool {
        matches!(
            self,
            VR::OB | VR::OD | VR::OF | VR::OW | VR::SQ | VR::UC | VR::UN | VR::UR | VR::UT
        )
    }

    pub fn kind(self) -> ValueKind {
        match self {
            VR::AE
            | VR::AS
            | VR::CS
            | VR::DA
            | VR::DT
            | VR::LO
            | VR::LT
            | VR::SH
            | VR::ST
            | VR::TM
            | VR::UC
            | VR::UR
            | VR::UT => ValueKind::Text,
            VR::PN => ValueKind::PersonName,
            VR::UI => ValueKind::Uid,
            VR::DS => ValueKind::Decimal,
            VR::IS | VR::SL | VR::SS | VR::UL | VR::US => ValueKind::Integer,
            VR::FD | VR::FL => ValueKind::Float,
            VR::AT => ValueKind::Tag,
            VR::OB | VR::OD | VR::OF | VR::OW | VR::UN => ValueKind::Bytes,
            VR::SQ => ValueKind::Sequence,
        }
    }

    /// Text VRs that hold exactly one value (backslash is not a delimiter).
    pub fn is_single_valued_text(self) -> bool {
        matches!(self, VR::LT | VR::ST | VR::UT | VR::UR)
    }

    /// Byte used to pad odd-length values.
    pub fn padding(self) -> u8 {
        match self {
            VR::UI | VR::OB | VR::UN => 0,
            _ => b' ',
        }
    }

    /// Maximum length of a single value, in characters, for text-like VRs.
    pub fn max_value_len(self) -> Option<usize> {
        match self {
            VR::AE => Some(16),
            VR::AS => Some(4),
            VR::CS => Some(16),
            VR::DA => Some(8),
            VR::DS => Some(16),
            VR::DT => Some(26),
            VR::IS => Some(12),
            VR::LO => Some(64),
            VR::LT => Some(10240),
            VR::PN => Some(64 * 3 + 2),
            VR::SH => Some(16),
            VR::ST => Some(1024),
            VR::TM => Some(16),
            VR::UI => Some(64),
            _ => None,
        }
    }
}

impl fmt::Display for VR {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VR {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        VR::ALL
            .iter()
            .copied()
            .find(|vr| vr.as_str() == s)
            .ok_or_else(|| format!("unknown VR {s:?}"))
    }
}
