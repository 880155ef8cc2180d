//! Scripted agents: deterministic policies that read only their
//! observation.

mod greedy;
mod kiting;
mod random;
mod view;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use greedy::GreedyPolicy;
pub use kiting::{KitingPolicy, RETREAT_THRESHOLD};
pub use random::RandomPolicy;
pub use view::View;

use crate::engine::Policy;

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyTag {
    Random,
    Greedy,
    Kiting,
}

impl PolicyTag {
    pub const ALL: [PolicyTag; 3] = [PolicyTag::Random, PolicyTag::Greedy, PolicyTag::Kiting];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyTag::Random => "random",
            PolicyTag::Greedy => "greedy",
            PolicyTag::Kiting => "kiting",
        }
    }
}

/// A policy with its seed, written `tag:seed` (`greedy:7`); a bare tag
/// means seed 0.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AgentProfile {
    pub policy: PolicyTag,
    pub seed: u64,
}

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
#[error("bad agent `{0}`: expected random|greedy|kiting, optionally followed by :SEED")]
pub struct ProfileError(pub String);

impl FromStr for AgentProfile {
    type Err = ProfileError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ProfileError(s.to_string());
        let (tag, seed) = match s.split_once(':') {
            Some((t, n)) => (t, n.parse().map_err(|_| err())?),
            None => (s, 0),
        };
        let policy = PolicyTag::ALL.into_iter().find(|p| p.as_str() == tag).ok_or_else(err)?;
        Ok(Self { policy, seed })
    }
}

impl fmt::Display for AgentProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.policy.as_str(), self.seed)
    }
}

impl AgentProfile {
    pub fn new(policy: PolicyTag, seed: u64) -> Self {
        Self { policy, seed }
    }

    pub fn build(&self) -> Box<dyn Policy> {
        match self.policy {
            PolicyTag::Random => Box::new(RandomPolicy::new(self.seed)),
            PolicyTag::Greedy => Box::new(GreedyPolicy::new(self.seed)),
            PolicyTag::Kiting => Box::new(KitingPolicy::new(self.seed)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_parse() {
        assert_eq!("greedy:7".parse(), Ok(AgentProfile::new(PolicyTag::Greedy, 7)));
        assert_eq!("kiting".parse(), Ok(AgentProfile::new(PolicyTag::Kiting, 0)));
        assert!("greedy:x".parse::<AgentProfile>().is_err());
        assert!("mcts:1".parse::<AgentProfile>().is_err());
        assert_eq!(AgentProfile::new(PolicyTag::Random, 3).to_string(), "random:3");
    }
}
