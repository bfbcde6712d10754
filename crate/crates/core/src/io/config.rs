use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::design::{DesignConfig, TargetSpec};
use crate::dsp::DEFAULT_VELVET_DENSITY;
use crate::error::{Error, Result};
use crate::render::SystemLayout;
use crate::room::{distance, Directivity, ReceiverSpec, RoomSpec, SourceSpec};

pub const SCHEMA_VERSION: u32 = 1;

/// Spacing of the two design receivers, roughly the distance between ears.
pub const RECEIVER_SPACING_M: f64 = 0.17;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecorrelationConfig {
    #[serde(default = "default_density")]
    pub density_pulses_per_s: f64,
    #[serde(default = "default_duration")]
    pub duration_s: f64,
}

fn default_density() -> f64 {
    DEFAULT_VELVET_DENSITY
}

fn default_duration() -> f64 {
    0.2
}

impl Default for DecorrelationConfig {
    fn default() -> Self {
        Self {
            density_pulses_per_s: default_density(),
            duration_s: default_duration(),
        }
    }
}

/// A primary loudspeaker and the supporting loudspeaker that compensates it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub name: String,
    pub primary: String,
    pub supporting: String,
    /// Overrides the layout derived from the geometry.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<SystemLayout>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    pub room: RoomSpec,
    pub sources: BTreeMap<String, SourceSpec>,
    /// The first two receivers are the design positions.
    pub receivers: Vec<ReceiverSpec>,
    pub channels: Vec<ChannelSpec>,
    #[serde(default)]
    pub target: TargetSpec,
    #[serde(default)]
    pub design: DesignConfig,
    #[serde(default)]
    pub decorrelation: DecorrelationConfig,
}

impl Default for ProjectConfig {
    /// Stereo pair in the default listening room, each primary with a
    /// supporting loudspeaker behind and beside the listener.
    fn default() -> Self {
        let listener: [f64; 3] = [3.7, 2.9, 1.2];
        let primary_left = [1.2, 1.1, 1.2];
        let primary_right = [0.9, 4.15, 1.2];
        let facing = [
            0.5 * (primary_left[0] + primary_right[0]) - listener[0],
            0.5 * (primary_left[1] + primary_right[1]) - listener[1],
        ];
        let norm = facing[0].hypot(facing[1]);
        let ear = [facing[1] / norm, -facing[0] / norm];
        let half = RECEIVER_SPACING_M / 2.0;
        let receivers = [-1.0, 1.0]
            .map(|s| ReceiverSpec {
                position_m: [
                    listener[0] + s * half * ear[0],
                    listener[1] + s * half * ear[1],
                    listener[2],
                ],
            })
            .to_vec();
        let two_way = Directivity::two_way_default();
        let mut sources = BTreeMap::new();
        for (name, pos) in [
            ("primary_left", primary_left),
            ("primary_right", primary_right),
            ("supporting_left", [5.6, 0.6, 1.8]),
            ("supporting_right", [5.6, 4.0, 1.8]),
        ] {
            sources.insert(name.to_string(), SourceSpec::aimed_at(pos, listener, two_way));
        }
        let channel = |name: &str| ChannelSpec {
            name: name.into(),
            primary: format!("primary_{name}"),
            supporting: format!("supporting_{name}"),
            layout: None,
        };
        Self {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            room: RoomSpec::default_listening_room(),
            sources,
            receivers,
            channels: vec![channel("left"), channel("right")],
            target: TargetSpec::default(),
            design: DesignConfig::default(),
            decorrelation: DecorrelationConfig::default(),
        }
    }
}

impl ProjectConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.room.validate()?;
        for (name, s) in &self.sources {
            if !self.room.contains(s.position_m) {
                return Err(Error::Config(format!(
                    "source `{name}` at {:?} is outside the room",
                    s.position_m
                )));
            }
        }
        if self.receivers.len() < 2 {
            return Err(Error::Config(format!(
                "two design receivers are required, found {}",
                self.receivers.len()
            )));
        }
        for (i, r) in self.receivers.iter().enumerate() {
            if !self.room.contains(r.position_m) {
                return Err(Error::Config(format!(
                    "receiver {i} at {:?} is outside the room",
                    r.position_m
                )));
            }
        }
        if self.channels.is_empty() {
            return Err(Error::Config("no channels".into()));
        }
        for c in &self.channels {
            for (role, name) in [("primary", &c.primary), ("supporting", &c.supporting)] {
                if !self.sources.contains_key(name) {
                    return Err(Error::Config(format!(
                        "channel `{}` references unknown {role} source `{name}`",
                        c.name
                    )));
                }
            }
            if let Some(layout) = &c.layout {
                layout.validate()?;
            }
        }
        self.target.validate()?;
        self.design.validate()?;
        if self.design.sample_rate_hz as f64 <= self.decorrelation.density_pulses_per_s {
            return Err(Error::Config("velvet density exceeds the sample rate".into()));
        }
        Ok(())
    }

    /// Midpoint of the two design receivers.
    pub fn listening_position(&self) -> [f64; 3] {
        let [a, b] = [self.receivers[0].position_m, self.receivers[1].position_m];
        [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])]
    }

    pub fn receiver_spacing_m(&self) -> f64 {
        distance(self.receivers[0].position_m, self.receivers[1].position_m)
    }

    pub fn channel(&self, name: &str) -> Result<&ChannelSpec> {
        self.channels
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::Config(format!("unknown channel `{name}`")))
    }

    /// The channel's layout override, or distances from the listening
    /// position with the design delay.
    pub fn layout(&self, channel: &ChannelSpec) -> SystemLayout {
        if let Some(layout) = &channel.layout {
            return layout.clone();
        }
        let at = self.listening_position();
        SystemLayout {
            primary_distance_m: distance(self.sources[&channel.primary].position_m, at),
            supporting_distance_m: distance(self.sources[&channel.supporting].position_m, at),
            speed_of_sound_m_s: self.room.speed_of_sound_m_s,
            precedence_delay_s: self.design.delay_s,
        }
    }

    /// Seed of the velvet sequence of the channel at `index`.
    pub fn velvet_seed(&self, index: usize) -> u64 {
        self.seed.wrapping_add(index as u64)
    }
}
