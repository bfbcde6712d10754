use serde::{Deserialize, Serialize};

use crate::dsp::{amplitude_to_db, db_to_amplitude, MagnitudeSpectrum};
use crate::error::{Error, Result};

/// Shape of the target response inside the compensation band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetMode {
    Flat,
    /// Falls by `total_drop_db` linearly in log-frequency from `f_lo_hz` to
    /// `f_hi_hz` and is constant outside that range.
    Sloped {
        total_drop_db: f64,
        f_lo_hz: f64,
        f_hi_hz: f64,
    },
}

impl TargetMode {
    pub fn sloped_default() -> Self {
        TargetMode::Sloped {
            total_drop_db: 3.0,
            f_lo_hz: 20.0,
            f_hi_hz: 20000.0,
        }
    }

    /// Level relative to the reference (dB) at `frequency_hz`.
    pub fn relative_db(&self, frequency_hz: f64) -> f64 {
        match *self {
            TargetMode::Flat => 0.0,
            TargetMode::Sloped {
                total_drop_db,
                f_lo_hz,
                f_hi_hz,
            } => {
                let f = frequency_hz.clamp(f_lo_hz, f_hi_hz);
                -total_drop_db * (f / f_lo_hz).ln() / (f_hi_hz / f_lo_hz).ln()
            }
        }
    }
}

/// Maximum level (dB) by which the lagging source may exceed the primary in
/// a band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecedenceThreshold {
    pub band_hz: [f64; 2],
    pub threshold_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub mode: TargetMode,
    #[serde(default = "default_compensation_band")]
    pub compensation_band_hz: [f64; 2],
    #[serde(default = "default_thresholds")]
    pub precedence_thresholds: Vec<PrecedenceThreshold>,
    #[serde(default = "default_equal_deficit_band")]
    pub equal_deficit_band_hz: [f64; 2],
}

fn default_compensation_band() -> [f64; 2] {
    [70.0, 20000.0]
}

fn default_equal_deficit_band() -> [f64; 2] {
    [70.0, 10000.0]
}

fn default_thresholds() -> Vec<PrecedenceThreshold> {
    vec![
        PrecedenceThreshold {
            band_hz: [70.0, 500.0],
            threshold_db: 10.0,
        },
        PrecedenceThreshold {
            band_hz: [500.0, 20000.0],
            threshold_db: 6.0,
        },
    ]
}

impl Default for TargetSpec {
    fn default() -> Self {
        Self::with_mode(TargetMode::Flat)
    }
}

impl TargetSpec {
    pub fn with_mode(mode: TargetMode) -> Self {
        Self {
            mode,
            compensation_band_hz: default_compensation_band(),
            precedence_thresholds: default_thresholds(),
            equal_deficit_band_hz: default_equal_deficit_band(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.compensation_band_hz;
        if !(lo > 0.0 && lo < hi) {
            return Err(Error::invalid(
                "compensation_band_hz",
                format!("{lo}..{hi} is not a band"),
            ));
        }
        let [elo, ehi] = self.equal_deficit_band_hz;
        if !(elo > 0.0 && elo < ehi) {
            return Err(Error::invalid(
                "equal_deficit_band_hz",
                format!("{elo}..{ehi} is not a band"),
            ));
        }
        if let TargetMode::Sloped {
            f_lo_hz,
            f_hi_hz,
            total_drop_db,
        } = self.mode
        {
            if !(f_lo_hz > 0.0 && f_lo_hz < f_hi_hz) {
                return Err(Error::invalid(
                    "mode",
                    format!("slope range {f_lo_hz}..{f_hi_hz} is empty"),
                ));
            }
            if !total_drop_db.is_finite() {
                return Err(Error::invalid("mode", "total_drop_db must be finite"));
            }
        }
        let t = &self.precedence_thresholds;
        if t.is_empty() {
            return Err(Error::invalid("precedence_thresholds", "empty"));
        }
        for p in t {
            if !(p.threshold_db > 0.0 && p.threshold_db.is_finite()) {
                return Err(Error::invalid(
                    "precedence_thresholds",
                    format!("threshold {} dB must be positive", p.threshold_db),
                ));
            }
            if !(p.band_hz[0] < p.band_hz[1]) {
                return Err(Error::invalid(
                    "precedence_thresholds",
                    format!("band {:?} is empty", p.band_hz),
                ));
            }
        }
        for w in t.windows(2) {
            if w[0].band_hz[1] != w[1].band_hz[0] {
                return Err(Error::invalid(
                    "precedence_thresholds",
                    format!("bands {:?} and {:?} are not contiguous", w[0].band_hz, w[1].band_hz),
                ));
            }
        }
        if t[0].band_hz[0] > lo || t[t.len() - 1].band_hz[1] < hi {
            return Err(Error::invalid(
                "precedence_thresholds",
                "bands do not cover the compensation band",
            ));
        }
        Ok(())
    }

    pub fn in_compensation_band(&self, frequency_hz: f64) -> bool {
        frequency_hz >= self.compensation_band_hz[0] && frequency_hz <= self.compensation_band_hz[1]
    }

    /// Precedence threshold at `frequency_hz`. Each band owns its upper edge,
    /// the first band also owns its lower edge, so 500 Hz takes the 10 dB of
    /// the default lower band.
    pub fn threshold_db(&self, frequency_hz: f64) -> Option<f64> {
        let t = &self.precedence_thresholds;
        if let Some(first) = t.first() {
            if frequency_hz == first.band_hz[0] {
                return Some(first.threshold_db);
            }
        }
        t.iter()
            .find(|p| frequency_hz > p.band_hz[0] && frequency_hz <= p.band_hz[1])
            .map(|p| p.threshold_db)
    }

    /// Upper constraint `hp * 10^(T/20)` on the grid of `hp`; bins outside
    /// the compensation band carry `hp` itself.
    pub fn precedence_limit(&self, hp: &MagnitudeSpectrum) -> MagnitudeSpectrum {
        let values = hp
            .values()
            .iter()
            .enumerate()
            .map(|(k, v)| {
                let f = hp.frequency(k);
                match self.threshold_db(f) {
                    Some(t) if self.in_compensation_band(f) => v * db_to_amplitude(t),
                    _ => *v,
                }
            })
            .collect();
        hp.with_values(values).expect("same grid")
    }
}

/// Mean level (dB) of `primary_mag` over the compensation band.
pub fn reference_level_db(spec: &TargetSpec, primary_mag: &MagnitudeSpectrum) -> Result<f64> {
    let bins = primary_mag.bins_in_band(spec.compensation_band_hz[0], spec.compensation_band_hz[1]);
    if bins.is_empty() {
        return Err(Error::invalid("compensation_band_hz", "no bins in band"));
    }
    let n = bins.clone().count() as f64;
    let sum: f64 = bins
        .map(|k| amplitude_to_db(primary_mag.values()[k].max(f64::MIN_POSITIVE)))
        .sum();
    Ok(sum / n)
}

/// Target magnitude on the grid of `primary_mag`. Outside the compensation
/// band the target is the primary response itself.
pub fn build_target(
    spec: &TargetSpec,
    primary_mag: &MagnitudeSpectrum,
    reference_level_db: f64,
) -> Result<MagnitudeSpectrum> {
    spec.validate()?;
    let values = primary_mag
        .values()
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let f = primary_mag.frequency(k);
            if spec.in_compensation_band(f) {
                db_to_amplitude(reference_level_db + spec.mode.relative_db(f))
            } else {
                *v
            }
        })
        .collect();
    primary_mag.with_values(values)
}

/// Clamps `d` between `hp` and the precedence limit inside the compensation
/// band and replaces it with `hp` outside.
pub fn apply_target_constraints(
    d: &MagnitudeSpectrum,
    hp: &MagnitudeSpectrum,
    spec: &TargetSpec,
) -> Result<MagnitudeSpectrum> {
    d.ensure_same_grid(hp)?;
    if d.len() != hp.len() {
        return Err(Error::GridMismatch("spectrum lengths differ".into()));
    }
    spec.validate()?;
    let limit = spec.precedence_limit(hp);
    let values = (0..d.len())
        .map(|k| {
            if spec.in_compensation_band(hp.frequency(k)) {
                d.values()[k].max(hp.values()[k]).min(limit.values()[k])
            } else {
                hp.values()[k]
            }
        })
        .collect();
    hp.with_values(values)
}

/// Search range (dB) of the equal-deficit gain.
pub const GAIN_SEARCH_RANGE_DB: f64 = 60.0;

/// Summed dB shortfalls below `hp` and excesses above the precedence limit
/// for a target raised by `gain_db`, over the equal-deficit band.
#[derive(Debug, Clone)]
pub struct DeficitProfile {
    hp_db: Vec<f64>,
    d_db: Vec<f64>,
    limit_db: Vec<f64>,
}

impl DeficitProfile {
    pub fn new(d_unscaled: &MagnitudeSpectrum, hp: &MagnitudeSpectrum, spec: &TargetSpec) -> Result<Self> {
        d_unscaled.ensure_same_grid(hp)?;
        spec.validate()?;
        let limit = spec.precedence_limit(hp);
        let bins = hp.bins_in_band(spec.equal_deficit_band_hz[0], spec.equal_deficit_band_hz[1]);
        let db = |v: f64| amplitude_to_db(v.max(f64::MIN_POSITIVE));
        let mut p = Self {
            hp_db: Vec::new(),
            d_db: Vec::new(),
            limit_db: Vec::new(),
        };
        for k in bins {
            p.hp_db.push(db(hp.values()[k]));
            p.d_db.push(db(d_unscaled.values()[k]));
            p.limit_db.push(db(limit.values()[k]));
        }
        if p.hp_db.is_empty() {
            return Err(Error::invalid("equal_deficit_band_hz", "no bins in band"));
        }
        Ok(p)
    }

    pub fn lower(&self, gain_db: f64) -> f64 {
        self.hp_db
            .iter()
            .zip(&self.d_db)
            .map(|(h, d)| (h - d - gain_db).max(0.0))
            .sum()
    }

    pub fn upper(&self, gain_db: f64) -> f64 {
        self.d_db
            .iter()
            .zip(&self.limit_db)
            .map(|(d, l)| (d + gain_db - l).max(0.0))
            .sum()
    }

    fn balance(&self, gain_db: f64) -> f64 {
        self.lower(gain_db) - self.upper(gain_db)
    }
}

/// Gain (dB) at which the target's summed shortfall below the primary equals
/// its summed excess over the precedence limit. When the balance holds over
/// an interval of gains, the gain closest to 0 dB is returned.
pub fn optimize_target_gain(d_unscaled: &MagnitudeSpectrum, hp: &MagnitudeSpectrum, spec: &TargetSpec) -> Result<f64> {
    let p = DeficitProfile::new(d_unscaled, hp, spec)?;
    let (lo, hi) = (-GAIN_SEARCH_RANGE_DB, GAIN_SEARCH_RANGE_DB);
    if p.balance(lo) < 0.0 || p.balance(hi) > 0.0 {
        return Err(Error::DeficitBalanceUnattainable {
            range_db: GAIN_SEARCH_RANGE_DB,
        });
    }
    // the balance is non-increasing in g; find both ends of its zero set
    let a = bisect(lo, hi, |g| p.balance(g) <= 0.0);
    let b = -bisect(-hi, -lo, |g| p.balance(-g) >= 0.0);
    Ok(0f64.clamp(a.min(b), a.max(b)))
}

/// Smallest `g` in `[lo, hi]` with `pred(g)`, for a predicate that is false
/// then true.
fn bisect(mut lo: f64, mut hi: f64, pred: impl Fn(f64) -> bool) -> f64 {
    if pred(lo) {
        return lo;
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}
