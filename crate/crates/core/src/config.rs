//! `key = value` run configurations.
//!
//! Lines starting with `#` and blank lines are ignored. Every key may appear at
//! most once; unknown keys are rejected. All frequencies are ratios to λ and
//! all times multiples of τ = 2π/Ω₀.
//!
//! ```text
//! mode = sweep-gamma
//! delta_over_lambda = 0.1
//! sweep_values = 0, 0.05, 0.1, 0.2
//! t_final_in_tau = 10
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::model::{eigensystem, Branch, JcParams, PureState2};

pub const DEFAULT_STEP_PER_TAU: u32 = 2000;
pub const MIN_STEP_PER_TAU: u32 = 1000;
pub const DEFAULT_PUMP: f64 = 0.005;
pub const DEFAULT_OUTPUT_STRIDE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Unitary,
    Lindblad,
    Berry,
    Bloch,
    SweepGamma,
    SweepDelta,
    CorrectionMap,
}

impl Mode {
    pub const ALL: [Mode; 7] = [
        Mode::Unitary,
        Mode::Lindblad,
        Mode::Berry,
        Mode::Bloch,
        Mode::SweepGamma,
        Mode::SweepDelta,
        Mode::CorrectionMap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Unitary => "unitary",
            Mode::Lindblad => "lindblad",
            Mode::Berry => "berry",
            Mode::Bloch => "bloch",
            Mode::SweepGamma => "sweep-gamma",
            Mode::SweepDelta => "sweep-delta",
            Mode::CorrectionMap => "correction-map",
        }
    }

    fn is_dissipative(self) -> bool {
        matches!(self, Mode::Lindblad | Mode::SweepGamma | Mode::SweepDelta | Mode::CorrectionMap)
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Mode::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| format!("unknown mode '{s}'"))
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    Excited,
    EigenPlus,
    EigenMinus,
    /// Amplitudes of |e,n⟩ and |g,n+1⟩, normalized on use.
    Custom {
        amp_e: C64,
        amp_g: C64,
    },
}

impl InitialState {
    pub fn state(&self, params: &JcParams) -> Result<PureState2> {
        match *self {
            InitialState::Excited => Ok(PureState2::excited()),
            InitialState::EigenPlus => Ok(eigensystem(params).state(Branch::Plus)),
            InitialState::EigenMinus => Ok(eigensystem(params).state(Branch::Minus)),
            InitialState::Custom { amp_e, amp_g } => PureState2::normalized(amp_e, amp_g),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            InitialState::Excited => "excited",
            InitialState::EigenPlus => "eigen-plus",
            InitialState::EigenMinus => "eigen-minus",
            InitialState::Custom { .. } => "custom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Gamma,
    Delta,
}

impl Axis {
    pub fn key(self) -> &'static str {
        match self {
            Axis::Gamma => "gamma_over_lambda",
            Axis::Delta => "delta_over_lambda",
        }
    }

    pub fn other(self) -> Axis {
        match self {
            Axis::Gamma => Axis::Delta,
            Axis::Delta => Axis::Gamma,
        }
    }

    /// Short tag used in per-value file names.
    pub fn tag(self) -> &'static str {
        match self {
            Axis::Gamma => "gamma",
            Axis::Delta => "delta",
        }
    }
}

impl FromStr for Axis {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "gamma_over_lambda" => Ok(Axis::Gamma),
            "delta_over_lambda" => Ok(Axis::Delta),
            _ => Err(format!("unknown sweep axis '{s}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepValues {
    List(Vec<f64>),
    Range { min: f64, max: f64, count: usize },
}

impl SweepValues {
    pub fn values(&self) -> Vec<f64> {
        match self {
            SweepValues::List(v) => v.clone(),
            SweepValues::Range { min, max, count } => match count {
                1 => vec![*min],
                _ => (0..*count).map(|k| min + (max - min) * k as f64 / (*count - 1) as f64).collect(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: Axis,
    pub values: SweepValues,
    /// Values of the other frequency axis; empty means the base value only.
    pub secondary: Vec<f64>,
    pub observe_at: Vec<f64>,
}

/// What a `bloch` run traces on the sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlochSource {
    /// Unitary evolution under the JC Hamiltonian.
    Unitary,
    /// Cavity phase-shift loop of an eigenstate.
    BerryLoop,
    /// Dominant eigenvector of the dissipative density matrix.
    EigenTrack,
}

impl BlochSource {
    pub fn name(self) -> &'static str {
        match self {
            BlochSource::Unitary => "unitary",
            BlochSource::BerryLoop => "berry-loop",
            BlochSource::EigenTrack => "eigen-track",
        }
    }
}

impl FromStr for BlochSource {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        [BlochSource::Unitary, BlochSource::BerryLoop, BlochSource::EigenTrack]
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| format!("unknown bloch source '{s}'"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub delta_over_lambda: f64,
    pub gamma_over_lambda: f64,
    pub p_over_lambda: f64,
    pub n: u32,
    pub t_final_in_tau: f64,
    pub step_per_tau: u32,
    pub output_stride: usize,
    pub initial_state: InitialState,
    pub sweep: Option<SweepSpec>,
    pub bloch_sources: Vec<BlochSource>,
    /// Output path stem; files are `<output>.csv` or `<output>_<tag>.csv`.
    pub output: String,
}

impl RunConfig {
    pub fn params(&self) -> Result<JcParams> {
        JcParams::ratios(self.delta_over_lambda, self.gamma_over_lambda, self.p_over_lambda)?.with_sector(self.n)
    }

    pub fn params_with(&self, axis: Axis, value: f64) -> Result<JcParams> {
        let mut c = self.clone();
        match axis {
            Axis::Gamma => c.gamma_over_lambda = value,
            Axis::Delta => c.delta_over_lambda = value,
        }
        c.params()
    }

    /// Resolved `key = value` lines, in a fixed order, that parse back to
    /// this configuration.
    pub fn to_lines(&self) -> Vec<String> {
        let mut lines = vec![
            format!("mode = {}", self.mode),
            format!("delta_over_lambda = {}", num(self.delta_over_lambda)),
            format!("gamma_over_lambda = {}", num(self.gamma_over_lambda)),
            format!("p_over_lambda = {}", num(self.p_over_lambda)),
            format!("n = {}", self.n),
            format!("t_final_in_tau = {}", num(self.t_final_in_tau)),
            format!("step_per_tau = {}", self.step_per_tau),
            format!("output_stride = {}", self.output_stride),
            format!("initial_state = {}", self.initial_state.name()),
        ];
        if let InitialState::Custom { amp_e, amp_g } = self.initial_state {
            lines.push(format!("amplitudes = {}", list(&[amp_e.re, amp_e.im, amp_g.re, amp_g.im])));
        }
        if let Some(s) = &self.sweep {
            lines.push(format!("sweep_axis = {}", s.axis.key()));
            match &s.values {
                SweepValues::List(v) => lines.push(format!("sweep_values = {}", list(v))),
                SweepValues::Range { min, max, count } => {
                    lines.push(format!("sweep_range = {}, {}, {count}", num(*min), num(*max)))
                }
            }
            if !s.secondary.is_empty() {
                lines.push(format!("secondary_values = {}", list(&s.secondary)));
            }
            if !s.observe_at.is_empty() {
                lines.push(format!("observe_at = {}", list(&s.observe_at)));
            }
        }
        if self.mode == Mode::Bloch {
            let names: Vec<&str> = self.bloch_sources.iter().map(|b| b.name()).collect();
            lines.push(format!("bloch_source = {}", names.join(", ")));
        }
        lines.push(format!("output = {}", self.output));
        lines
    }

    pub fn to_text(&self) -> String {
        self.to_lines().iter().map(|l| format!("{l}\n")).collect()
    }

    /// Recovers the configuration from the `#` header of an emitted CSV.
    pub fn from_csv_header(text: &str) -> Result<Self> {
        let body: String = text
            .lines()
            .take_while(|l| l.starts_with('#'))
            .filter_map(|l| l.strip_prefix("# "))
            .filter(|l| l.contains('='))
            .map(|l| format!("{l}\n"))
            .collect();
        parse_config(&body)
    }
}

/// Shortest representation that parses back to the same `f64`.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn list(v: &[f64]) -> String {
    v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(", ")
}

const KEYS: [&str; 17] = [
    "mode",
    "delta_over_lambda",
    "gamma_over_lambda",
    "p_over_lambda",
    "n",
    "t_final_in_tau",
    "step_per_tau",
    "output_stride",
    "initial_state",
    "amplitudes",
    "sweep_axis",
    "sweep_values",
    "sweep_range",
    "secondary_values",
    "observe_at",
    "bloch_source",
    "output",
];

fn cfg_err(line: usize, message: impl Into<String>) -> Error {
    Error::Config { line, message: message.into() }
}

struct Entries {
    map: BTreeMap<&'static str, (usize, String)>,
}

impl Entries {
    fn raw(&self, key: &str) -> Option<(usize, &str)> {
        self.map.get(key).map(|(l, v)| (*l, v.as_str()))
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<Option<(usize, T)>>
    where
        T::Err: fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<T>()
                .map(|x| Some((line, x)))
                .map_err(|e| cfg_err(line, format!("{key}: cannot parse '{v}': {e}"))),
        }
    }

    fn real(&self, key: &str, default: f64, non_negative: bool) -> Result<f64> {
        match self.parse::<f64>(key)? {
            None => Ok(default),
            Some((line, x)) if !x.is_finite() => Err(cfg_err(line, format!("{key} must be finite"))),
            Some((line, x)) if non_negative && x < 0.0 => {
                Err(cfg_err(line, format!("{key} must be non-negative, got {x}")))
            }
            Some((_, x)) => Ok(x),
        }
    }

    fn reals(&self, key: &str) -> Result<Option<(usize, Vec<f64>)>> {
        let Some((line, v)) = self.raw(key) else {
            return Ok(None);
        };
        let values = v
            .split(',')
            .map(|s| {
                let s = s.trim();
                s.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| cfg_err(line, format!("{key}: '{s}' is not a finite number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(Some((line, values)))
    }
}

fn tokenize(text: &str) -> Result<Entries> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            return Err(cfg_err(line, format!("expected 'key = value', got '{content}'")));
        };
        let k = k.trim();
        let Some(key) = KEYS.iter().find(|x| **x == k) else {
            return Err(cfg_err(line, format!("unknown key '{k}'")));
        };
        if map.insert(*key, (line, v.trim().to_string())).is_some() {
            return Err(cfg_err(line, format!("duplicate key '{k}'")));
        }
    }
    Ok(Entries { map })
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let e = tokenize(text)?;
    let Some((_, mode)) = e.parse::<Mode>("mode")? else {
        return Err(Error::Usage("configuration has no 'mode'".into()));
    };

    let delta_over_lambda = e.real("delta_over_lambda", 0.0, false)?;
    let gamma_over_lambda = e.real("gamma_over_lambda", 0.0, true)?;
    let p_over_lambda = e.real("p_over_lambda", DEFAULT_PUMP, true)?;
    let n = e.parse::<u32>("n")?.map_or(0, |(_, n)| n);
    let t_final_in_tau = e.real("t_final_in_tau", 1.0, false)?;
    if t_final_in_tau <= 0.0 {
        let line = e.raw("t_final_in_tau").map_or(0, |(l, _)| l);
        return Err(cfg_err(line, "t_final_in_tau must be positive"));
    }
    let step_per_tau = match e.parse::<u32>("step_per_tau")? {
        None => DEFAULT_STEP_PER_TAU,
        Some((line, s)) if s < MIN_STEP_PER_TAU => {
            return Err(cfg_err(line, format!("step_per_tau must be at least {MIN_STEP_PER_TAU}")))
        }
        Some((_, s)) => s,
    };
    let output_stride = match e.parse::<usize>("output_stride")? {
        None => DEFAULT_OUTPUT_STRIDE,
        Some((line, 0)) => return Err(cfg_err(line, "output_stride must be at least 1")),
        Some((_, s)) => s,
    };

    let initial_state = parse_initial(&e)?;
    let sweep = parse_sweep(&e, mode)?;
    let bloch_sources = match (mode, e.raw("bloch_source")) {
        (Mode::Bloch, None) => vec![BlochSource::Unitary],
        (Mode::Bloch, Some((line, v))) => v
            .split(',')
            .map(|s| s.trim().parse::<BlochSource>().map_err(|m| cfg_err(line, m)))
            .collect::<Result<Vec<_>>>()?,
        (_, Some((line, _))) => return Err(cfg_err(line, "bloch_source only applies to mode = bloch")),
        (_, None) => Vec::new(),
    };
    let output = e.raw("output").map_or_else(|| mode.name().to_string(), |(_, v)| v.to_string());

    let config = RunConfig {
        mode,
        delta_over_lambda,
        gamma_over_lambda,
        p_over_lambda,
        n,
        t_final_in_tau,
        step_per_tau,
        output_stride,
        initial_state,
        sweep,
        bloch_sources,
        output,
    };
    let dissipative =
        mode.is_dissipative() || (mode == Mode::Bloch && config.bloch_sources.contains(&BlochSource::EigenTrack));
    if dissipative && n != 0 {
        let line = e.raw("n").map_or(0, |(l, _)| l);
        return Err(cfg_err(line, "dissipative runs are restricted to the n = 0 sector"));
    }
    config.params().map_err(|err| cfg_err(0, err.to_string()))?;
    Ok(config)
}

fn parse_initial(e: &Entries) -> Result<InitialState> {
    let amplitudes = e.reals("amplitudes")?;
    let state = match e.raw("initial_state") {
        None | Some((_, "excited")) => InitialState::Excited,
        Some((_, "eigen-plus")) => InitialState::EigenPlus,
        Some((_, "eigen-minus")) => InitialState::EigenMinus,
        Some((line, "custom")) => {
            let Some((aline, a)) = amplitudes else {
                return Err(cfg_err(line, "initial_state = custom needs 'amplitudes = re_e, im_e, re_g, im_g'"));
            };
            if a.len() != 4 {
                return Err(cfg_err(aline, "amplitudes takes four numbers: re_e, im_e, re_g, im_g"));
            }
            let (amp_e, amp_g) = (C64::new(a[0], a[1]), C64::new(a[2], a[3]));
            if amp_e.norm_sqr() + amp_g.norm_sqr() == 0.0 {
                return Err(cfg_err(aline, "amplitudes must not all vanish"));
            }
            return Ok(InitialState::Custom { amp_e, amp_g });
        }
        Some((line, other)) => return Err(cfg_err(line, format!("unknown initial_state '{other}'"))),
    };
    if let Some((line, _)) = amplitudes {
        return Err(cfg_err(line, "amplitudes requires initial_state = custom"));
    }
    Ok(state)
}

fn parse_sweep(e: &Entries, mode: Mode) -> Result<Option<SweepSpec>> {
    let sweep_keys = ["sweep_axis", "sweep_values", "sweep_range", "secondary_values", "observe_at"];
    let first_line = sweep_keys.iter().filter_map(|k| e.raw(k)).map(|(l, _)| l).min();
    let axis = match (mode, e.parse::<Axis>("sweep_axis")?) {
        (Mode::SweepGamma, None) => Some(Axis::Gamma),
        (Mode::SweepDelta, None) => Some(Axis::Delta),
        (Mode::SweepGamma, Some((line, Axis::Delta))) | (Mode::SweepDelta, Some((line, Axis::Gamma))) => {
            return Err(cfg_err(line, format!("sweep_axis contradicts mode = {mode}")))
        }
        (_, a) => a.map(|(_, a)| a),
    };
    let list = e.reals("sweep_values")?;
    let range = e.reals("sweep_range")?;
    let values = match (list, range) {
        (Some(_), Some((line, _))) => return Err(cfg_err(line, "give either sweep_values or sweep_range, not both")),
        (Some((line, v)), None) => {
            if v.is_empty() || v.iter().any(|x| *x < 0.0) {
                return Err(cfg_err(line, "sweep_values must be non-empty and non-negative"));
            }
            Some(SweepValues::List(v))
        }
        (None, Some((line, r))) => {
            let valid = r.len() == 3 && r[2] >= 1.0 && r[2].fract() == 0.0;
            if !valid || r[0] < 0.0 || r[1] < r[0] {
                return Err(cfg_err(line, "sweep_range is 'min, max, count' with 0 <= min <= max, count >= 1"));
            }
            Some(SweepValues::Range { min: r[0], max: r[1], count: r[2] as usize })
        }
        (None, None) => None,
    };
    let secondary = e.reals("secondary_values")?;
    let observe = e.reals("observe_at")?;
    if let Some((line, v)) = &secondary {
        if v.is_empty() || v.iter().any(|x| *x < 0.0) {
            return Err(cfg_err(*line, "secondary_values must be non-negative"));
        }
    }
    if let Some((line, v)) = &observe {
        if v.is_empty() || v.iter().any(|x| *x <= 0.0) {
            return Err(cfg_err(*line, "observe_at must list positive multiples of tau"));
        }
    }

    let needs_sweep = matches!(mode, Mode::SweepGamma | Mode::SweepDelta | Mode::CorrectionMap);
    match (axis, values) {
        (Some(axis), Some(values)) => {
            if mode == Mode::CorrectionMap && observe.is_none() {
                return Err(cfg_err(first_line.unwrap_or(0), "correction-map needs observe_at"));
            }
            if !matches!(mode, Mode::CorrectionMap | Mode::Bloch) && secondary.is_some() {
                return Err(cfg_err(first_line.unwrap_or(0), format!("secondary_values is not used by mode = {mode}")));
            }
            if !matches!(mode, Mode::CorrectionMap) && observe.is_some() {
                return Err(cfg_err(first_line.unwrap_or(0), format!("observe_at is not used by mode = {mode}")));
            }
            Ok(Some(SweepSpec {
                axis,
                values,
                secondary: secondary.map(|(_, v)| v).unwrap_or_default(),
                observe_at: observe.map(|(_, v)| v).unwrap_or_default(),
            }))
        }
        (None, None) if !needs_sweep && first_line.is_none() => Ok(None),
        (_, None) if needs_sweep && first_line.is_none() => {
            Err(Error::Usage(format!("mode = {mode} needs sweep_values or sweep_range")))
        }
        (None, _) => Err(cfg_err(first_line.unwrap_or(0), "sweep parameters need a sweep_axis")),
        (Some(_), None) => Err(cfg_err(first_line.unwrap_or(0), "sweep_axis needs sweep_values or sweep_range")),
    }
}
