use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Octave-band centres (Hz) of the absorption coefficients.
pub const ABSORPTION_BANDS_HZ: [f64; 6] = [125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0];

/// Per-surface octave-band absorption coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceAbsorption {
    pub x_min: [f64; 6],
    pub x_max: [f64; 6],
    pub y_min: [f64; 6],
    pub y_max: [f64; 6],
    pub floor: [f64; 6],
    pub ceiling: [f64; 6],
}

impl SurfaceAbsorption {
    pub fn uniform(alpha: f64) -> Self {
        let a = [alpha; 6];
        Self {
            x_min: a,
            x_max: a,
            y_min: a,
            y_max: a,
            floor: a,
            ceiling: a,
        }
    }

    /// Surfaces in the order x_min, x_max, y_min, y_max, floor, ceiling.
    pub fn surfaces(&self) -> [&[f64; 6]; 6] {
        [
            &self.x_min,
            &self.x_max,
            &self.y_min,
            &self.y_max,
            &self.floor,
            &self.ceiling,
        ]
    }
}

/// Shoebox room.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoomSpec {
    pub dimensions_m: [f64; 3],
    pub absorption: SurfaceAbsorption,
    #[serde(default = "default_speed_of_sound")]
    pub speed_of_sound_m_s: f64,
    #[serde(default = "default_max_reflection_time")]
    pub max_reflection_time_s: f64,
}

fn default_speed_of_sound() -> f64 {
    343.0
}

fn default_max_reflection_time() -> f64 {
    1.0
}

impl RoomSpec {
    pub fn new(dimensions_m: [f64; 3], absorption: SurfaceAbsorption) -> Self {
        Self {
            dimensions_m,
            absorption,
            speed_of_sound_m_s: default_speed_of_sound(),
            max_reflection_time_s: default_max_reflection_time(),
        }
    }

    /// A 7.4 x 4.6 x 2.6 m living room with carpet, plastered walls and an
    /// absorbing ceiling (broadband T60 around 0.4 s).
    pub fn default_listening_room() -> Self {
        let walls = [0.16, 0.12, 0.10, 0.09, 0.09, 0.10];
        Self::new(
            [7.4, 4.6, 2.6],
            SurfaceAbsorption {
                x_min: walls,
                x_max: walls,
                y_min: walls,
                y_max: [0.22, 0.20, 0.18, 0.16, 0.16, 0.18],
                floor: [0.08, 0.14, 0.28, 0.38, 0.46, 0.52],
                ceiling: [0.30, 0.28, 0.30, 0.36, 0.42, 0.46],
            },
        )
    }

    pub fn volume(&self) -> f64 {
        self.dimensions_m.iter().product()
    }

    pub fn surface_area(&self) -> f64 {
        let [x, y, z] = self.dimensions_m;
        2.0 * (x * y + x * z + y * z)
    }

    /// Sabine reverberation time `0.161 V / sum(S_i alpha_i)` for one
    /// absorption band.
    pub fn sabine_t60(&self, band: usize) -> f64 {
        let [x, y, z] = self.dimensions_m;
        let areas = [y * z, y * z, x * z, x * z, x * y, x * y];
        let absorption: f64 = self
            .absorption
            .surfaces()
            .iter()
            .zip(areas)
            .map(|(a, s)| a[band] * s)
            .sum();
        0.161 * self.volume() / absorption
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimensions_m.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
            return Err(Error::Geometry(format!(
                "room dimensions {:?} must be positive",
                self.dimensions_m
            )));
        }
        for (name, coeffs) in ["x_min", "x_max", "y_min", "y_max", "floor", "ceiling"]
            .iter()
            .zip(self.absorption.surfaces())
        {
            if coeffs.iter().any(|a| !(*a > 0.0 && *a <= 1.0)) {
                return Err(Error::Geometry(format!(
                    "absorption of {name} must lie in (0, 1]: {coeffs:?}"
                )));
            }
        }
        if !(self.speed_of_sound_m_s > 0.0) {
            return Err(Error::Geometry("speed of sound must be positive".into()));
        }
        if !(self.max_reflection_time_s > 0.0) {
            return Err(Error::Geometry("max_reflection_time_s must be positive".into()));
        }
        Ok(())
    }

    pub fn contains(&self, p: [f64; 3]) -> bool {
        p.iter().zip(self.dimensions_m).all(|(x, l)| *x > 0.0 && *x < l)
    }
}

/// Frequency-dependent radiation pattern of a source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Directivity {
    Omni,
    /// Omnidirectional below `transition_low_hz`, cardioid-like above
    /// `transition_high_hz` with the rear floored at `-rear_attenuation_db`.
    TwoWay {
        transition_low_hz: f64,
        transition_high_hz: f64,
        rear_attenuation_db: f64,
    },
}

impl Directivity {
    pub fn two_way_default() -> Self {
        Directivity::TwoWay {
            transition_low_hz: 500.0,
            transition_high_hz: 4000.0,
            rear_attenuation_db: 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub position_m: [f64; 3],
    /// Horizontal aim, degrees counter-clockwise from +x.
    #[serde(default)]
    pub aim_azimuth_deg: f64,
    pub directivity: Directivity,
}

impl SourceSpec {
    pub fn omni(position_m: [f64; 3]) -> Self {
        Self {
            position_m,
            aim_azimuth_deg: 0.0,
            directivity: Directivity::Omni,
        }
    }

    /// A source at `position_m` aimed horizontally at `target`.
    pub fn aimed_at(position_m: [f64; 3], target: [f64; 3], directivity: Directivity) -> Self {
        let az = (target[1] - position_m[1])
            .atan2(target[0] - position_m[0])
            .to_degrees();
        Self {
            position_m,
            aim_azimuth_deg: az,
            directivity,
        }
    }

    pub fn aim_vector(&self) -> [f64; 3] {
        let az = self.aim_azimuth_deg.to_radians();
        [az.cos(), az.sin(), 0.0]
    }
}

/// Omnidirectional receiver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReceiverSpec {
    pub position_m: [f64; 3],
}

pub fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
