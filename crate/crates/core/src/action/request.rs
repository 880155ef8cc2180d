//! Raw action requests, the action catalog and typed parsing.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::observe::ObservationLevel;
use crate::error::{ErrorCode, Rejection};
use crate::hex::HexCoord;
use crate::world::{EntityId, Faction};

/// An action as sent by an agent: a name plus a parameter document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionRequest {
    pub action: String,
    #[serde(default)]
    pub params: Map<String, Value>,
}

impl ActionRequest {
    pub fn new(action: impl Into<String>, params: Value) -> Self {
        let params = match params {
            Value::Object(m) => m,
            _ => Map::new(),
        };
        Self { action: action.into(), params }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Move,
    Attack,
    Rest,
    Occupy,
    Fortify,
    Skill,
    Observation,
    GetFactionState,
    EndTurn,
    GetActionList,
    RegisterAgentInfo,
    StrategyPing,
    ReportLlmStats,
}

impl ActionKind {
    pub const ALL: [ActionKind; 13] = [
        ActionKind::Move,
        ActionKind::Attack,
        ActionKind::Rest,
        ActionKind::Occupy,
        ActionKind::Fortify,
        ActionKind::Skill,
        ActionKind::Observation,
        ActionKind::GetFactionState,
        ActionKind::EndTurn,
        ActionKind::GetActionList,
        ActionKind::RegisterAgentInfo,
        ActionKind::StrategyPing,
        ActionKind::ReportLlmStats,
    ];

    pub fn as_str(self) -> &'static str {
        self.spec().name
    }

    pub fn parse(s: &str) -> Option<ActionKind> {
        ActionKind::ALL.into_iter().find(|k| k.as_str() == s)
    }

    pub fn spec(self) -> &'static ActionSpec {
        &CATALOG[self as usize]
    }

    /// Unit-control actions: gated by turn and lock, counted as game actions.
    pub fn is_unit_control(self) -> bool {
        matches!(
            self,
            ActionKind::Move | ActionKind::Attack | ActionKind::Rest | ActionKind::Occupy | ActionKind::Fortify | ActionKind::Skill
        )
    }

    /// Actions that can change the world.
    pub fn mutates_world(self) -> bool {
        self.is_unit_control() || self == ActionKind::EndTurn
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    #[serde(rename = "type")]
    pub ty: &'static str,
    pub required: bool,
    pub description: &'static str,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ActionSpec {
    pub name: &'static str,
    pub category: &'static str,
    pub description: &'static str,
    pub params: &'static [ParamSpec],
}

const fn p(name: &'static str, ty: &'static str, required: bool, description: &'static str) -> ParamSpec {
    ParamSpec { name, ty, required, description }
}

const UNIT: ParamSpec = p("unit_id", "int", true, "unique identifier of the unit");

/// Every supported action, indexed by `ActionKind as usize`.
pub static CATALOG: [ActionSpec; 13] = [
    ActionSpec {
        name: "move",
        category: "unit_control",
        description: "Move a unit to a target hex along the cheapest path within its movement points.",
        params: &[UNIT, p("target_position", "position", true, "target coordinates {col, row}")],
    },
    ActionSpec {
        name: "attack",
        category: "unit_control",
        description: "Attack a hostile unit within attack range. Costs 1 AP.",
        params: &[UNIT, p("target_id", "int", true, "target unit id")],
    },
    ActionSpec {
        name: "rest",
        category: "unit_control",
        description: "Hold position to recover 1 AP and relieve one negative status. Ends movement for the turn.",
        params: &[UNIT],
    },
    ActionSpec {
        name: "occupy",
        category: "unit_control",
        description: "Take ownership of the current or an adjacent tile. Costs 1 AP.",
        params: &[UNIT, p("position", "position", false, "tile to occupy; defaults to the unit's tile")],
    },
    ActionSpec {
        name: "fortify",
        category: "unit_control",
        description: "Raise the fortification of an owned tile. Costs 1 AP and 1 CP.",
        params: &[UNIT, p("position", "position", false, "tile to fortify; defaults to the unit's tile")],
    },
    ActionSpec {
        name: "skill",
        category: "unit_control",
        description: "Use a skill (fire_attack, ambush). Costs SP and AP and starts a cooldown.",
        params: &[
            UNIT,
            p("skill_name", "string", true, "fire_attack or ambush"),
            p("target", "any", false, "target unit id or position {col, row}"),
        ],
    },
    ActionSpec {
        name: "observation",
        category: "observation",
        description: "Observe the battlefield under fog of war, optionally focused on one own unit.",
        params: &[
            p("unit_id", "int", false, "own unit to focus on"),
            p("observation_level", "string", false, "basic (default), detailed or tactical"),
        ],
    },
    ActionSpec {
        name: "get_faction_state",
        category: "faction_control",
        description: "Faction status (active/victory/defeat/eliminated/draw), unit counts and surviving units.",
        params: &[p("faction", "string", false, "wei, shu or wu; defaults to the caller")],
    },
    ActionSpec {
        name: "end_turn",
        category: "system",
        description: "End the current turn. AP and MP restore at the start of the faction's next turn.",
        params: &[p("faction", "string", false, "the faction ending its turn")],
    },
    ActionSpec {
        name: "get_action_list",
        category: "system",
        description: "List supported actions and their parameter signatures.",
        params: &[],
    },
    ActionSpec {
        name: "register_agent_info",
        category: "system",
        description: "Record agent metadata for the caller's faction.",
        params: &[
            p("faction", "string", false, "the faction to control"),
            p("agent_id", "string", false, "unique identifier for the agent"),
            p("model_id", "string", false, "identifier of the model"),
            p("provider", "string", false, "model provider"),
        ],
    },
    ActionSpec {
        name: "strategy_ping",
        category: "system",
        description: "Self-report a strategic insight with a confidence score in [0, 1].",
        params: &[
            p("faction", "string", false, "the reporting faction"),
            p("score", "float", true, "confidence in [0, 1]; clamped"),
            p("evidence", "string", true, "text describing the insight"),
        ],
    },
    ActionSpec {
        name: "report_llm_stats",
        category: "system",
        description: "Report token usage, latency and error rates.",
        params: &[p("stats", "object", false, "free-form statistics; other top-level fields are kept too")],
    },
];

/// Skill target as written by an agent.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetRef {
    Unit(EntityId),
    Position(HexCoord),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    Move { unit_id: EntityId, target: HexCoord },
    Attack { unit_id: EntityId, target_id: EntityId },
    Rest { unit_id: EntityId },
    Occupy { unit_id: EntityId, position: Option<HexCoord> },
    Fortify { unit_id: EntityId, position: Option<HexCoord> },
    Skill { unit_id: EntityId, skill_name: String, target: Option<TargetRef> },
    Observation { unit_id: Option<EntityId>, level: ObservationLevel },
    GetFactionState { faction: Option<Faction> },
    EndTurn { faction: Option<Faction> },
    GetActionList,
    RegisterAgentInfo { faction: Option<Faction>, agent_id: Option<String>, model_id: Option<String>, provider: Option<String> },
    StrategyPing { score: f64, evidence: String },
    ReportLlmStats { stats: Map<String, Value> },
}

impl Action {
    pub fn kind(&self) -> ActionKind {
        match self {
            Action::Move { .. } => ActionKind::Move,
            Action::Attack { .. } => ActionKind::Attack,
            Action::Rest { .. } => ActionKind::Rest,
            Action::Occupy { .. } => ActionKind::Occupy,
            Action::Fortify { .. } => ActionKind::Fortify,
            Action::Skill { .. } => ActionKind::Skill,
            Action::Observation { .. } => ActionKind::Observation,
            Action::GetFactionState { .. } => ActionKind::GetFactionState,
            Action::EndTurn { .. } => ActionKind::EndTurn,
            Action::GetActionList => ActionKind::GetActionList,
            Action::RegisterAgentInfo { .. } => ActionKind::RegisterAgentInfo,
            Action::StrategyPing { .. } => ActionKind::StrategyPing,
            Action::ReportLlmStats { .. } => ActionKind::ReportLlmStats,
        }
    }

    /// The acting unit, for unit-control actions and focused observations.
    pub fn unit(&self) -> Option<EntityId> {
        match *self {
            Action::Move { unit_id, .. }
            | Action::Attack { unit_id, .. }
            | Action::Rest { unit_id }
            | Action::Occupy { unit_id, .. }
            | Action::Fortify { unit_id, .. }
            | Action::Skill { unit_id, .. } => Some(unit_id),
            Action::Observation { unit_id, .. } => unit_id,
            _ => None,
        }
    }

    /// Coordinates named by the request, checked against the map bounds first.
    pub fn positions(&self) -> Vec<HexCoord> {
        match *self {
            Action::Move { target, .. } => vec![target],
            Action::Occupy { position, .. } | Action::Fortify { position, .. } => position.into_iter().collect(),
            Action::Skill { target: Some(TargetRef::Position(c)), .. } => vec![c],
            _ => Vec::new(),
        }
    }

    /// Canonical request form of this action.
    pub fn to_request(&self) -> ActionRequest {
        let mut v = serde_json::to_value(self).expect("actions serialize");
        let params = v.as_object_mut().map(std::mem::take).unwrap_or_default();
        let mut req = ActionRequest { action: self.kind().as_str().to_string(), params };
        req.params.remove("action");
        let rename = |req: &mut ActionRequest, from: &str, to: &str| {
            if let Some(x) = req.params.remove(from) {
                req.params.insert(to.to_string(), x);
            }
        };
        match self {
            Action::Move { .. } => rename(&mut req, "target", "target_position"),
            Action::Observation { .. } => rename(&mut req, "level", "observation_level"),
            Action::ReportLlmStats { stats } => req.params = stats.clone(),
            _ => {}
        }
        req.params.retain(|_, v| !v.is_null());
        req
    }
}

fn schema(msg: impl Into<String>) -> Rejection {
    Rejection::new(ErrorCode::SchemaViolation, msg)
}

struct Params<'a> {
    action: &'static str,
    raw: &'a Map<String, Value>,
}

impl<'a> Params<'a> {
    fn get(&self, name: &str) -> Option<&'a Value> {
        self.raw.get(name).filter(|v| !v.is_null())
    }

    fn required(&self, name: &str) -> Result<&'a Value, Rejection> {
        self.get(name)
            .ok_or_else(|| schema(format!("{} requires parameter `{name}`", self.action)))
    }

    fn id_of(&self, name: &str, v: &Value) -> Result<EntityId, Rejection> {
        v.as_u64()
            .map(EntityId)
            .ok_or_else(|| schema(format!("{}: `{name}` must be a non-negative integer, got {v}", self.action)))
    }

    fn id(&self, name: &str) -> Result<EntityId, Rejection> {
        self.id_of(name, self.required(name)?)
    }

    fn opt_id(&self, name: &str) -> Result<Option<EntityId>, Rejection> {
        self.get(name).map(|v| self.id_of(name, v)).transpose()
    }

    fn pos_of(&self, name: &str, v: &Value) -> Result<HexCoord, Rejection> {
        let coord = |k: &str| v.get(k).and_then(Value::as_i64).and_then(|n| i32::try_from(n).ok());
        match (coord("col"), coord("row")) {
            (Some(col), Some(row)) => Ok(HexCoord::new(col, row)),
            _ => Err(schema(format!("{}: `{name}` must be {{\"col\": int, \"row\": int}}, got {v}", self.action))),
        }
    }

    fn pos(&self, name: &str) -> Result<HexCoord, Rejection> {
        self.pos_of(name, self.required(name)?)
    }

    fn opt_pos(&self, name: &str) -> Result<Option<HexCoord>, Rejection> {
        self.get(name).map(|v| self.pos_of(name, v)).transpose()
    }

    fn str_of(&self, name: &str, v: &'a Value) -> Result<&'a str, Rejection> {
        v.as_str().ok_or_else(|| schema(format!("{}: `{name}` must be a string, got {v}", self.action)))
    }

    fn string(&self, name: &str) -> Result<String, Rejection> {
        self.str_of(name, self.required(name)?).map(str::to_string)
    }

    fn opt_string(&self, name: &str) -> Result<Option<String>, Rejection> {
        self.get(name).map(|v| self.str_of(name, v).map(str::to_string)).transpose()
    }

    fn faction(&self, name: &str) -> Result<Option<Faction>, Rejection> {
        match self.get(name) {
            None => Ok(None),
            Some(v) => {
                let s = self.str_of(name, v)?;
                s.parse()
                    .map(Some)
                    .map_err(|e: String| Rejection::new(ErrorCode::UnknownFaction, e))
            }
        }
    }
}

/// Parse a raw request. Unknown parameters are ignored and reported as
/// warnings.
pub fn parse_action(req: &ActionRequest) -> Result<(Action, Vec<String>), Rejection> {
    let kind = ActionKind::parse(&req.action)
        .ok_or_else(|| Rejection::new(ErrorCode::UnknownAction, format!("unknown action `{}`", req.action)))?;
    let spec = kind.spec();
    let p = Params { action: spec.name, raw: &req.params };
    let mut warnings = Vec::new();
    if kind != ActionKind::ReportLlmStats {
        for name in req.params.keys() {
            if !spec.params.iter().any(|s| s.name == name) {
                warnings.push(format!("{}: ignored unknown parameter `{name}`", spec.name));
            }
        }
    }
    let action = match kind {
        ActionKind::Move => Action::Move { unit_id: p.id("unit_id")?, target: p.pos("target_position")? },
        ActionKind::Attack => Action::Attack { unit_id: p.id("unit_id")?, target_id: p.id("target_id")? },
        ActionKind::Rest => Action::Rest { unit_id: p.id("unit_id")? },
        ActionKind::Occupy => Action::Occupy { unit_id: p.id("unit_id")?, position: p.opt_pos("position")? },
        ActionKind::Fortify => Action::Fortify { unit_id: p.id("unit_id")?, position: p.opt_pos("position")? },
        ActionKind::Skill => {
            let target = match p.get("target") {
                None => None,
                Some(v) if v.is_object() => Some(TargetRef::Position(p.pos_of("target", v)?)),
                Some(v) => Some(TargetRef::Unit(p.id_of("target", v)?)),
            };
            Action::Skill { unit_id: p.id("unit_id")?, skill_name: p.string("skill_name")?, target }
        }
        ActionKind::Observation => {
            let level = match p.opt_string("observation_level")? {
                None => ObservationLevel::Basic,
                Some(s) => ObservationLevel::parse(&s).ok_or_else(|| {
                    schema(format!("observation: unknown observation_level `{s}` (basic, detailed, tactical)"))
                })?,
            };
            Action::Observation { unit_id: p.opt_id("unit_id")?, level }
        }
        ActionKind::GetFactionState => Action::GetFactionState { faction: p.faction("faction")? },
        ActionKind::EndTurn => Action::EndTurn { faction: p.faction("faction")? },
        ActionKind::GetActionList => Action::GetActionList,
        ActionKind::RegisterAgentInfo => Action::RegisterAgentInfo {
            faction: p.faction("faction")?,
            agent_id: p.opt_string("agent_id")?,
            model_id: p.opt_string("model_id")?,
            provider: p.opt_string("provider")?,
        },
        ActionKind::StrategyPing => {
            p.faction("faction")?;
            let v = p.required("score")?;
            let score = v
                .as_f64()
                .ok_or_else(|| schema(format!("strategy_ping: `score` must be a number, got {v}")))?;
            Action::StrategyPing { score, evidence: p.string("evidence")? }
        }
        ActionKind::ReportLlmStats => Action::ReportLlmStats { stats: req.params.clone() },
    };
    Ok((action, warnings))
}
