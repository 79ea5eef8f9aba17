use clap::ValueEnum;
use pralab::GroupKind;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Classify,
    Subgroup,
    Components,
    Walk,
    Connect,
    Spread,
    Verify,
}

/// Everything a run depends on, after defaults are applied.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct RunConfig {
    pub command: CommandKind,
    pub group: GroupKind,
    pub q: Option<u32>,
    pub k: usize,
    pub extended: bool,
    pub seed: u64,
    pub steps: u64,
    pub workers: usize,
    pub state_budget: u64,
    pub search_budget: u64,
    pub format: Format,
    pub deterministic: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_json() {
        let c = RunConfig {
            command: CommandKind::Spread,
            group: GroupKind::Pgl,
            q: Some(7),
            k: 4,
            extended: false,
            seed: 99,
            steps: 100,
            workers: 2,
            state_budget: 5,
            search_budget: 6,
            format: Format::Csv,
            deterministic: true,
        };
        let s = serde_json::to_string(&c).unwrap();
        assert!(s.contains("\"state-budget\":5"));
        assert_eq!(serde_json::from_str::<RunConfig>(&s).unwrap(), c);
    }
}
