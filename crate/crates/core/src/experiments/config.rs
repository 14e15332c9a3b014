use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};
use serde_json::Value;

use crate::exec::Execution;
use crate::signal::PulseTrainSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    MseSweep,
    CompareHod,
    MGrid,
    TheoryOnly,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::MseSweep => "mse-sweep",
            ExperimentKind::CompareHod => "compare-hod",
            ExperimentKind::MGrid => "m-grid",
            ExperimentKind::TheoryOnly => "theory-only",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// 2,000 pulses and 10,000 M̃ trials.
    #[default]
    Desk,
    /// 50,000 pulses and 100,000 M̃ trials.
    Paper,
}

/// Parse an angle given either as radians or as an expression such as
/// `"pi/32"`, `"3*pi/64"` or `"0.5pi"`.
pub fn parse_angle(s: &str) -> Option<f64> {
    let t: String = s
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect::<String>()
        .to_lowercase();
    if let Ok(v) = t.parse::<f64>() {
        return Some(v);
    }
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a, b.parse::<f64>().ok()?),
        None => (t.as_str(), 1.0),
    };
    let pos = num.find("pi")?;
    let (coef, rest) = (&num[..pos], &num[pos + 2..]);
    let coef = coef.trim_end_matches('*');
    let rest = rest.trim_start_matches('*');
    let a = if coef.is_empty() {
        1.0
    } else {
        coef.parse::<f64>().ok()?
    };
    let b = if rest.is_empty() {
        1.0
    } else {
        rest.parse::<f64>().ok()?
    };
    Some(a * b * PI / den)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AngleRepr {
    Num(f64),
    Text(String),
}

impl AngleRepr {
    fn value<E: serde::de::Error>(self) -> std::result::Result<f64, E> {
        match self {
            AngleRepr::Num(v) => Ok(v),
            AngleRepr::Text(s) => parse_angle(&s).ok_or_else(|| E::custom(format!("cannot parse angle {s:?}"))),
        }
    }
}

fn angle<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    AngleRepr::deserialize(d)?.value()
}

fn angles<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    Vec::<AngleRepr>::deserialize(d)?
        .into_iter()
        .map(AngleRepr::value)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignalSection {
    pub num_pulses: usize,
    pub beta: f64,
    pub span: usize,
    pub symbol_period: f64,
    pub amp_low: f64,
    pub amp_high: f64,
}

impl Default for SignalSection {
    fn default() -> Self {
        let d = PulseTrainSpec::default();
        Self {
            num_pulses: d.num_pulses,
            beta: d.beta,
            span: d.span,
            symbol_period: d.symbol_period,
            amp_low: d.amp_low,
            amp_high: d.amp_high,
        }
    }
}

impl SignalSection {
    pub fn spec(&self, seed: u64) -> PulseTrainSpec {
        PulseTrainSpec {
            num_pulses: self.num_pulses,
            beta: self.beta,
            span: self.span,
            symbol_period: self.symbol_period,
            amp_low: self.amp_low,
            amp_high: self.amp_high,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecoverySection {
    pub n: usize,
    pub alpha: f64,
    pub lpf_length: Option<usize>,
    pub lpf_transition: Option<f64>,
}

impl Default for RecoverySection {
    fn default() -> Self {
        Self {
            n: 64,
            alpha: 0.5,
            lpf_length: None,
            lpf_transition: None,
        }
    }
}

const DESK_OF_GRID: [f64; 9] = [4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0, 40.0, 50.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub bits: Vec<u32>,
    pub oversampling: Vec<f64>,
    #[serde(deserialize_with = "angles")]
    pub delta_sl: Vec<f64>,
    /// Also run the conventional ADC at every point.
    pub conventional: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            bits: vec![4],
            oversampling: DESK_OF_GRID.to_vec(),
            delta_sl: vec![PI / 32.0, PI / 16.0],
            conventional: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareHodConfig {
    pub bits: Vec<u32>,
    pub oversampling: Vec<f64>,
    #[serde(deserialize_with = "angle")]
    pub delta_sl: f64,
    pub order: usize,
}

impl Default for CompareHodConfig {
    fn default() -> Self {
        Self {
            bits: vec![3, 4, 5],
            oversampling: vec![6.0, 8.0, 10.0, 12.0, 16.0, 20.0, 24.0, 32.0],
            delta_sl: PI / 32.0,
            order: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MGridConfig {
    pub n: Vec<usize>,
    pub oversampling: Vec<f64>,
    /// Fold-set sizes as fractions `N/d` of the segment length.
    pub s_divisors: Vec<usize>,
    #[serde(deserialize_with = "angle")]
    pub delta_sl: f64,
    pub trials: usize,
}

impl Default for MGridConfig {
    fn default() -> Self {
        Self {
            n: vec![64, 128, 256],
            oversampling: vec![4.0, 8.0, 12.0],
            s_divisors: vec![32, 16, 8],
            delta_sl: PI / 32.0,
            trials: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub signal: SignalSection,
    pub recovery: RecoverySection,
    /// Grid for `mse-sweep` and `theory-only`.
    pub mse_sweep: SweepConfig,
    pub compare_hod: CompareHodConfig,
    pub m_grid: MGridConfig,
    pub execution: Execution,
    /// Fill the `wall_time_ms` column. Off by default so reruns are
    /// byte-identical.
    pub record_timings: bool,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn preset(preset: Preset) -> Self {
        let mut c = Self::default();
        if preset == Preset::Paper {
            c.signal.num_pulses = 50_000;
            c.m_grid.trials = 100_000;
        }
        c
    }

    /// Preset values overlaid with the fields present in a JSON document.
    pub fn from_json(preset: Preset, text: &str) -> Result<Self> {
        let doc: Value =
            serde_json::from_str(text).map_err(|e| Error::config(format!("config is not valid JSON: {e}")))?;
        if !doc.is_object() {
            return Err(Error::config("config must be a JSON object"));
        }
        let mut base = serde_json::to_value(Self::preset(preset))?;
        merge(&mut base, doc);
        serde_json::from_value(base).map_err(|e| Error::config(e.to_string()))
    }

    pub fn load(preset: Preset, path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::preset(preset)),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| Error::Io {
                    path: p.to_path_buf(),
                    source,
                })?;
                Self::from_json(preset, &text).map_err(|e| match e {
                    Error::Config(m) => Error::config(format!("{}: {m}", p.display())),
                    e => e,
                })
            }
        }
    }

    pub fn validate(&self, kind: ExperimentKind) -> Result<()> {
        self.signal.spec(0).validate()?;
        crate::dsp::tukey_window(self.recovery.n, self.recovery.alpha).map_err(|e| Error::config(e.to_string()))?;
        let bits = |b: &[u32]| -> Result<()> {
            nonempty("bits", b)?;
            match b.iter().find(|b| !(2..=48).contains(*b)) {
                Some(x) => Err(Error::config(format!("bits must lie in 2..=48, got {x}"))),
                None => Ok(()),
            }
        };
        let ofs = |o: &[f64]| -> Result<()> {
            nonempty("oversampling", o)?;
            match o.iter().find(|o| !(o.is_finite() && **o > 1.0)) {
                Some(x) => Err(Error::config(format!("oversampling factors must exceed 1, got {x}"))),
                None => Ok(()),
            }
        };
        let delta = |d: f64| -> Result<()> {
            if (0.0..PI).contains(&d) {
                Ok(())
            } else {
                Err(Error::config(format!("delta_sl must lie in [0, π), got {d}")))
            }
        };
        match kind {
            ExperimentKind::MseSweep | ExperimentKind::TheoryOnly => {
                let s = &self.mse_sweep;
                bits(&s.bits)?;
                ofs(&s.oversampling)?;
                nonempty("delta_sl", &s.delta_sl)?;
                s.delta_sl.iter().try_for_each(|&d| delta(d))?;
            }
            ExperimentKind::CompareHod => {
                let s = &self.compare_hod;
                bits(&s.bits)?;
                ofs(&s.oversampling)?;
                delta(s.delta_sl)?;
                if s.order == 0 {
                    return Err(Error::config("compare_hod.order must be at least 1"));
                }
            }
            ExperimentKind::MGrid => {
                let s = &self.m_grid;
                nonempty("m_grid.n", &s.n)?;
                ofs(&s.oversampling)?;
                nonempty("m_grid.s_divisors", &s.s_divisors)?;
                delta(s.delta_sl)?;
                if s.n.contains(&0) || s.s_divisors.contains(&0) {
                    return Err(Error::config("m_grid sizes and divisors must be positive"));
                }
                if s.trials == 0 {
                    return Err(Error::config("m_grid.trials must be positive"));
                }
            }
        }
        Ok(())
    }
}

fn nonempty<T>(name: &str, v: &[T]) -> Result<()> {
    if v.is_empty() {
        Err(Error::config(format!("{name} must not be empty")))
    } else {
        Ok(())
    }
}

/// Recursive object merge; arrays and scalars in `over` replace `base`.
fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, o) => *b = o,
    }
}
