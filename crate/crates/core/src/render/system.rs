use serde::{Deserialize, Serialize};

use crate::design::{CompensationFilter, FilterKind};
use crate::dsp::{convolve, ImpulseResponse, VelvetNoise};
use crate::error::{Error, Result};

/// Distances from the listening position and the precedence delay of one
/// primary/supporting pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemLayout {
    pub primary_distance_m: f64,
    pub supporting_distance_m: f64,
    #[serde(default = "default_speed_of_sound")]
    pub speed_of_sound_m_s: f64,
    #[serde(default = "default_precedence_delay")]
    pub precedence_delay_s: f64,
}

fn default_speed_of_sound() -> f64 {
    343.0
}

fn default_precedence_delay() -> f64 {
    0.010
}

impl SystemLayout {
    pub fn new(primary_distance_m: f64, supporting_distance_m: f64) -> Self {
        Self {
            primary_distance_m,
            supporting_distance_m,
            speed_of_sound_m_s: default_speed_of_sound(),
            precedence_delay_s: default_precedence_delay(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.primary_distance_m > 0.0 && self.supporting_distance_m > 0.0) {
            return Err(Error::invalid("layout", "distances must be positive"));
        }
        if !(self.speed_of_sound_m_s > 0.0) {
            return Err(Error::invalid("speed_of_sound_m_s", "must be positive"));
        }
        if !(0.002..=0.050).contains(&self.precedence_delay_s) {
            return Err(Error::invalid(
                "precedence_delay_s",
                format!(
                    "{} s is outside the 2..50 ms precedence window",
                    self.precedence_delay_s
                ),
            ));
        }
        Ok(())
    }
}

/// Electrical delay of the supporting path so that its sound reaches the
/// listener `precedence_delay_s` after the primary's.
pub fn compute_supporting_delay_samples(layout: &SystemLayout, sample_rate_hz: u32) -> Result<usize> {
    layout.validate()?;
    let travel = (layout.primary_distance_m - layout.supporting_distance_m) / layout.speed_of_sound_m_s;
    let delay = (sample_rate_hz as f64 * (layout.precedence_delay_s + travel)).round() as i64;
    if delay < 0 {
        return Err(Error::NegativeDelay { delay_samples: delay });
    }
    Ok(delay as usize)
}

/// The primary response through the inverse filter.
pub fn render_traditional(primary_ir: &ImpulseResponse, filter: &CompensationFilter) -> Result<ImpulseResponse> {
    filter.ensure_kind(FilterKind::TraditionalInverse)?;
    check_rate(primary_ir, filter)?;
    ImpulseResponse::with_onset(
        convolve(primary_ir.samples(), &filter.taps)?,
        primary_ir.sample_rate_hz(),
        primary_ir.direct_onset_index(),
    )
}

/// The supporting path alone at the listener: supporting response, filter,
/// unit-energy velvet noise, then the precedence delay. Empty when the
/// filter is silent.
pub fn render_supporting_contribution(
    supporting_ir: &ImpulseResponse,
    filter: &CompensationFilter,
    layout: &SystemLayout,
    velvet: &VelvetNoise,
) -> Result<Vec<f64>> {
    filter.ensure_kind(FilterKind::ProposedSupporting)?;
    check_rate(supporting_ir, filter)?;
    let delay = compute_supporting_delay_samples(layout, supporting_ir.sample_rate_hz())?;
    if filter.is_silent() {
        return Ok(Vec::new());
    }
    let filtered = convolve(supporting_ir.samples(), &filter.taps)?;
    let decorrelated = convolve(&filtered, &velvet.normalized())?;
    Ok(crate::dsp::delay_signal(&decorrelated, delay))
}

/// Primary response plus the supporting contribution. Samples the
/// contribution does not reach keep the primary's exact value.
pub fn render_proposed(
    primary_ir: &ImpulseResponse,
    supporting_ir: &ImpulseResponse,
    filter: &CompensationFilter,
    layout: &SystemLayout,
    velvet: &VelvetNoise,
) -> Result<ImpulseResponse> {
    primary_ir.ensure_rate(supporting_ir)?;
    let contribution = render_supporting_contribution(supporting_ir, filter, layout, velvet)?;
    let mut out = primary_ir.samples().to_vec();
    if out.len() < contribution.len() {
        out.resize(contribution.len(), 0.0);
    }
    for (o, c) in out.iter_mut().zip(&contribution) {
        if *c != 0.0 {
            *o += c;
        }
    }
    ImpulseResponse::with_onset(out, primary_ir.sample_rate_hz(), primary_ir.direct_onset_index())
}

fn check_rate(ir: &ImpulseResponse, filter: &CompensationFilter) -> Result<()> {
    if ir.sample_rate_hz() != filter.sample_rate_hz {
        return Err(Error::SampleRateMismatch {
            expected: filter.sample_rate_hz,
            found: ir.sample_rate_hz(),
        });
    }
    Ok(())
}
