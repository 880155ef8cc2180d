use std::fmt;

use serde::{Deserialize, Serialize};

/// Error category reported to agents. Serialized by its variant name.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ErrorCode {
    OutOfBounds,
    UnknownUnit,
    NotYourUnit,
    NotYourTurn,
    WrongFaction,
    MissingComponent,
    UnitBusy,
    StatusForbids,
    #[serde(rename = "InsufficientMP")]
    InsufficientMp,
    Unreachable,
    Blocked,
    OutOfRange,
    FriendlyFire,
    DeadTarget,
    #[serde(rename = "InsufficientAP")]
    InsufficientAp,
    #[serde(rename = "InsufficientCP")]
    InsufficientCp,
    #[serde(rename = "InsufficientSP")]
    InsufficientSp,
    AlreadyRested,
    AlreadyOwned,
    TileNotOwned,
    MaxFortification,
    TerrainForbidsConstruction,
    UnknownSkill,
    SkillOnCooldown,
    UnknownAction,
    UnknownFaction,
    InvalidInMode,
    GameOver,
    SchemaViolation,
    MalformedMessage,
    UnknownType,
    NotRegistered,
    FactionTaken,
    AgentTimeout,
}

impl ErrorCode {
    /// Failures caused by violating a spatial constraint: boundaries, range
    /// and path cost.
    pub fn is_spatial(self) -> bool {
        matches!(
            self,
            ErrorCode::OutOfBounds
                | ErrorCode::InsufficientMp
                | ErrorCode::Unreachable
                | ErrorCode::Blocked
                | ErrorCode::OutOfRange
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::OutOfBounds => "OutOfBounds",
            ErrorCode::UnknownUnit => "UnknownUnit",
            ErrorCode::NotYourUnit => "NotYourUnit",
            ErrorCode::NotYourTurn => "NotYourTurn",
            ErrorCode::WrongFaction => "WrongFaction",
            ErrorCode::MissingComponent => "MissingComponent",
            ErrorCode::UnitBusy => "UnitBusy",
            ErrorCode::StatusForbids => "StatusForbids",
            ErrorCode::InsufficientMp => "InsufficientMP",
            ErrorCode::Unreachable => "Unreachable",
            ErrorCode::Blocked => "Blocked",
            ErrorCode::OutOfRange => "OutOfRange",
            ErrorCode::FriendlyFire => "FriendlyFire",
            ErrorCode::DeadTarget => "DeadTarget",
            ErrorCode::InsufficientAp => "InsufficientAP",
            ErrorCode::InsufficientCp => "InsufficientCP",
            ErrorCode::InsufficientSp => "InsufficientSP",
            ErrorCode::AlreadyRested => "AlreadyRested",
            ErrorCode::AlreadyOwned => "AlreadyOwned",
            ErrorCode::TileNotOwned => "TileNotOwned",
            ErrorCode::MaxFortification => "MaxFortification",
            ErrorCode::TerrainForbidsConstruction => "TerrainForbidsConstruction",
            ErrorCode::UnknownSkill => "UnknownSkill",
            ErrorCode::SkillOnCooldown => "SkillOnCooldown",
            ErrorCode::UnknownAction => "UnknownAction",
            ErrorCode::UnknownFaction => "UnknownFaction",
            ErrorCode::InvalidInMode => "InvalidInMode",
            ErrorCode::GameOver => "GameOver",
            ErrorCode::SchemaViolation => "SchemaViolation",
            ErrorCode::MalformedMessage => "MalformedMessage",
            ErrorCode::UnknownType => "UnknownType",
            ErrorCode::NotRegistered => "NotRegistered",
            ErrorCode::FactionTaken => "FactionTaken",
            ErrorCode::AgentTimeout => "AgentTimeout",
        }
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A rejected action: category plus a human-readable explanation.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{code}: {message}")]
pub struct Rejection {
    pub code: ErrorCode,
    pub message: String,
}

impl Rejection {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    pub fn spatial(&self) -> bool {
        self.code.is_spatial()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wire_names_match_display() {
        for code in [ErrorCode::InsufficientMp, ErrorCode::NotYourTurn, ErrorCode::InsufficientAp] {
            let json = serde_json::to_string(&code).unwrap();
            assert_eq!(json, format!("\"{}\"", code.as_str()));
            assert_eq!(serde_json::from_str::<ErrorCode>(&json).unwrap(), code);
        }
    }

    #[test]
    fn spatial_categories() {
        assert!(ErrorCode::OutOfBounds.is_spatial());
        assert!(ErrorCode::OutOfRange.is_spatial());
        assert!(!ErrorCode::FriendlyFire.is_spatial());
        assert!(!ErrorCode::UnitBusy.is_spatial());
    }
}
