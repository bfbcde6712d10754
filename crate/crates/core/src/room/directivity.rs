use super::spec::{Directivity, SourceSpec};

/// Linear pressure gain of `src` at `emission_angle_deg` off its aim axis.
///
/// Two-way sources are omnidirectional below the low transition. Above the
/// high transition the off-axis gain is `max((1 + cos θ)/2, 10^(-rear/20))`,
/// a cardioid whose rear null is floored at the rear attenuation. In between
/// the gain is interpolated linearly against log-frequency.
pub fn directivity_gain(src: &SourceSpec, emission_angle_deg: f64, frequency_hz: f64) -> f64 {
    let cos = emission_angle_deg.to_radians().cos();
    let t = transition_weight(&src.directivity, frequency_hz);
    1.0 + t * (high_frequency_gain(&src.directivity, cos) - 1.0)
}

/// Fraction of the high-frequency pattern present at `frequency_hz`
/// (0 below the low transition, 1 above the high one).
pub(crate) fn transition_weight(directivity: &Directivity, frequency_hz: f64) -> f64 {
    match *directivity {
        Directivity::Omni => 0.0,
        Directivity::TwoWay {
            transition_low_hz,
            transition_high_hz,
            ..
        } => {
            if frequency_hz <= transition_low_hz {
                0.0
            } else if frequency_hz >= transition_high_hz {
                1.0
            } else {
                (frequency_hz / transition_low_hz).ln() / (transition_high_hz / transition_low_hz).ln()
            }
        }
    }
}

/// Off-axis gain above the high transition, given the cosine of the
/// emission angle.
pub(crate) fn high_frequency_gain(directivity: &Directivity, cos_angle: f64) -> f64 {
    match *directivity {
        Directivity::Omni => 1.0,
        Directivity::TwoWay {
            rear_attenuation_db, ..
        } => {
            let rear = 10f64.powf(-rear_attenuation_db / 20.0);
            (0.5 * (1.0 + cos_angle)).max(rear)
        }
    }
}

/// Angle in degrees between `direction` and the source's aim axis.
pub fn emission_angle_deg(src: &SourceSpec, direction: [f64; 3]) -> f64 {
    let aim = src.aim_vector();
    let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return 0.0;
    }
    let cos = direction.iter().zip(aim).map(|(d, a)| d * a).sum::<f64>() / norm;
    cos.clamp(-1.0, 1.0).acos().to_degrees()
}
