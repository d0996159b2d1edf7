//! Half-hourly wind power profiles: loading, validation, synthesis and
//! capacity-factor rescaling.
//!
//! A profile holds one column per wind farm. Single-farm use cases read the
//! first column; the curtailment use case can take one column per farm or
//! replicate a single column.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const HOURS_PER_YEAR: f64 = 8760.0;
pub const DEFAULT_STEP_HOURS: f64 = 0.5;
pub const STEPS_PER_YEAR: usize = 17_520;

/// Relative excess over the rating that is clamped with a warning instead of rejected.
const CLAMP_TOLERANCE: f64 = 1e-3;
/// Relative tolerance on a calibrated capacity factor.
const CF_TOLERANCE: f64 = 1e-3;
const MAX_CALIBRATION_ITERATIONS: usize = 100;

/// Lag-one autocorrelation of the synthetic latent process (per step).
const SYNTH_PERSISTENCE: f64 = 0.985;
/// Spread of the latent process in units of capacity factor.
const SYNTH_SPREAD: f64 = 0.45;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindProfile {
    step_hours: f64,
    rated_mw: f64,
    farms: Vec<Vec<f64>>,
}

impl WindProfile {
    /// Builds a single-farm profile. Values must lie in `[0, rated_mw]`.
    pub fn new(values: Vec<f64>, rated_mw: f64, step_hours: f64) -> Result<Self> {
        Self::with_farms(vec![values], rated_mw, step_hours)
    }

    /// Builds a multi-farm profile; every column must have the same length.
    pub fn with_farms(farms: Vec<Vec<f64>>, rated_mw: f64, step_hours: f64) -> Result<Self> {
        if !(rated_mw.is_finite() && rated_mw > 0.0) {
            return Err(Error::invalid("rated_mw", format!("must be positive, got {rated_mw}")));
        }
        if !(step_hours.is_finite() && step_hours > 0.0) {
            return Err(Error::invalid(
                "step_hours",
                format!("must be positive, got {step_hours}"),
            ));
        }
        let Some(first) = farms.first() else {
            return Err(Error::invalid("farms", "profile needs at least one column"));
        };
        let len = first.len();
        if let Some(bad) = farms.iter().position(|f| f.len() != len) {
            return Err(Error::invalid(
                "farms",
                format!("column {} has {} rows, column 1 has {len}", bad + 1, farms[bad].len()),
            ));
        }
        for farm in &farms {
            for (step, &v) in farm.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::invalid("values", format!("non-finite power at step {step}")));
                }
                if v < 0.0 {
                    return Err(Error::NegativePower { step, value: v });
                }
                if v > rated_mw {
                    return Err(Error::AboveRating {
                        step,
                        value: v,
                        rated_mw,
                    });
                }
            }
        }
        Ok(Self {
            step_hours,
            rated_mw,
            farms,
        })
    }

    pub fn step_hours(&self) -> f64 {
        self.step_hours
    }

    pub fn rated_mw(&self) -> f64 {
        self.rated_mw
    }

    pub fn len(&self) -> usize {
        self.farms[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_farms(&self) -> usize {
        self.farms.len()
    }

    /// First (or only) farm column.
    pub fn values(&self) -> &[f64] {
        &self.farms[0]
    }

    pub fn farm(&self, index: usize) -> Option<&[f64]> {
        self.farms.get(index).map(Vec::as_slice)
    }

    pub fn farms(&self) -> &[Vec<f64>] {
        &self.farms
    }

    pub fn duration_hours(&self) -> f64 {
        self.len() as f64 * self.step_hours
    }

    /// Mean available power over all farms and steps divided by the rating.
    pub fn capacity_factor(&self) -> f64 {
        let n = self.len() * self.n_farms();
        if n == 0 {
            return 0.0;
        }
        let total: f64 = self.farms.iter().flatten().sum();
        total / n as f64 / self.rated_mw
    }

    /// Parses the profile CSV format: optional `# step_hours=<h>` metadata
    /// line, a header `step_index,power_mw` (or `step_index,power_mw_1,...`),
    /// then one row per step.
    pub fn parse_csv(text: &str, rated_mw: f64, opts: &LoadOptions) -> Result<Self> {
        let mut step_hours = DEFAULT_STEP_HOURS;
        let mut columns: Option<usize> = None;
        let mut farms: Vec<Vec<f64>> = Vec::new();
        let mut clamped = 0usize;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(v) = comment.trim().strip_prefix("step_hours=") {
                    if columns.is_some() {
                        return Err(parse_err(line_no, "metadata must precede the header"));
                    }
                    step_hours = v
                        .trim()
                        .parse::<f64>()
                        .ok()
                        .filter(|h| h.is_finite() && *h > 0.0)
                        .ok_or_else(|| parse_err(line_no, format!("bad step_hours `{}`", v.trim())))?;
                }
                continue;
            }
            let Some(n_cols) = columns else {
                let n = parse_header(line).ok_or_else(|| {
                    parse_err(line_no, format!("expected header `step_index,power_mw`, got `{line}`"))
                })?;
                columns = Some(n);
                farms = vec![Vec::new(); n];
                continue;
            };

            let mut fields = line.split(',').map(str::trim);
            let step = farms[0].len();
            let index = fields.next().unwrap_or_default();
            match index.parse::<usize>() {
                Ok(i) if i == step => {}
                Ok(i) => return Err(parse_err(line_no, format!("step_index {i}, expected {step}"))),
                Err(_) => return Err(parse_err(line_no, format!("bad step_index `{index}`"))),
            }
            for farm in farms.iter_mut() {
                let field = fields
                    .next()
                    .ok_or_else(|| parse_err(line_no, format!("expected {} power columns", n_cols)))?;
                let v: f64 = field
                    .parse()
                    .ok()
                    .filter(|v: &f64| v.is_finite())
                    .ok_or_else(|| parse_err(line_no, format!("bad power value `{field}`")))?;
                if v < 0.0 {
                    return Err(Error::NegativePower { step, value: v });
                }
                let v = if v > rated_mw {
                    if v > rated_mw * (1.0 + CLAMP_TOLERANCE) {
                        return Err(Error::AboveRating {
                            step,
                            value: v,
                            rated_mw,
                        });
                    }
                    clamped += 1;
                    rated_mw
                } else {
                    v
                };
                farm.push(v);
            }
            if fields.next().is_some() {
                return Err(parse_err(line_no, "too many columns"));
            }
        }

        if columns.is_none() {
            return Err(parse_err(1, "missing header"));
        }
        if clamped > 0 {
            log::warn!("clamped {clamped} value(s) marginally above the {rated_mw} MW rating");
        }
        let found = farms[0].len();
        if !opts.allow_any_length {
            let expected = (HOURS_PER_YEAR / step_hours).round() as usize;
            if found != expected {
                return Err(Error::RowCount { found, expected });
            }
        }
        Self::with_farms(farms, rated_mw, step_hours)
    }

    /// Serialises to the CSV format read by [`WindProfile::parse_csv`].
    /// Values use the shortest exact representation, so a round trip is lossless.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.len() * 16);
        let _ = writeln!(out, "# step_hours={}", self.step_hours);
        out.push_str("step_index");
        if self.n_farms() == 1 {
            out.push_str(",power_mw");
        } else {
            for i in 1..=self.n_farms() {
                let _ = write!(out, ",power_mw_{i}");
            }
        }
        out.push('\n');
        for step in 0..self.len() {
            let _ = write!(out, "{step}");
            for farm in &self.farms {
                let _ = write!(out, ",{}", farm[step]);
            }
            out.push('\n');
        }
        out
    }

    fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            step_hours: self.step_hours,
            rated_mw: self.rated_mw,
            farms: self
                .farms
                .iter()
                .map(|farm| farm.iter().map(|&v| f(v)).collect())
                .collect(),
        }
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Returns the number of power columns, or `None` when the header is malformed.
fn parse_header(line: &str) -> Option<usize> {
    let cols: Vec<&str> = line.split(',').map(str::trim).collect();
    if cols.len() < 2 || cols[0] != "step_index" {
        return None;
    }
    if cols.len() == 2 && cols[1] == "power_mw" {
        return Some(1);
    }
    cols[1..]
        .iter()
        .enumerate()
        .all(|(i, c)| *c == format!("power_mw_{}", i + 1))
        .then_some(cols.len() - 1)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Accept any number of rows instead of exactly one year.
    pub allow_any_length: bool,
}

pub fn load_profile(path: impl AsRef<Path>, rated_mw: f64) -> Result<WindProfile> {
    load_profile_with(path, rated_mw, &LoadOptions::default())
}

pub fn load_profile_with(path: impl AsRef<Path>, rated_mw: f64, opts: &LoadOptions) -> Result<WindProfile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    WindProfile::parse_csv(&text, rated_mw, opts)
}

/// Deterministic synthetic profile with the requested capacity factor.
///
/// A stationary first-order autoregressive latent series is mapped through
/// `clamp(offset + spread * x, 0, 1)`; the offset is bisected until the mean
/// matches `target_cf`.
pub fn synth_profile(target_cf: f64, rated_mw: f64, seed: u64, steps: usize) -> Result<WindProfile> {
    if !(0.0..=1.0).contains(&target_cf) {
        return Err(Error::invalid(
            "target_cf",
            format!("must lie in [0, 1], got {target_cf}"),
        ));
    }
    if steps == 0 {
        return Err(Error::invalid("steps", "must be positive"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let innovation_scale = (1.0 - SYNTH_PERSISTENCE * SYNTH_PERSISTENCE).sqrt();
    let mut x: f64 = StandardNormal.sample(&mut rng);
    let mut latent = Vec::with_capacity(steps);
    for _ in 0..steps {
        latent.push(x);
        let eps: f64 = StandardNormal.sample(&mut rng);
        x = SYNTH_PERSISTENCE * x + innovation_scale * eps;
    }

    let shape = |offset: f64| -> Vec<f64> {
        latent
            .iter()
            .map(|&z| (offset + SYNTH_SPREAD * z).clamp(0.0, 1.0))
            .collect()
    };
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;

    let (min_z, max_z) = latent.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &z| {
        (lo.min(z), hi.max(z))
    });
    // cf(lo) = 0 and cf(hi) = 1 exactly.
    let mut lo = -SYNTH_SPREAD * max_z;
    let mut hi = 1.0 - SYNTH_SPREAD * min_z;
    let within = |cf: f64| (cf - target_cf).abs() <= 1e-9 * target_cf.max(1e-3);

    let fractions = if target_cf == 0.0 {
        shape(lo)
    } else if target_cf == 1.0 {
        shape(hi)
    } else {
        let mut found = None;
        for _ in 0..MAX_CALIBRATION_ITERATIONS {
            let mid = 0.5 * (lo + hi);
            let candidate = shape(mid);
            let cf = mean(&candidate);
            if within(cf) {
                found = Some(candidate);
                break;
            }
            if cf < target_cf {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        found.ok_or_else(|| Error::UnreachableCf {
            target: target_cf,
            msg: format!("no convergence after {MAX_CALIBRATION_ITERATIONS} iterations"),
        })?
    };

    let values = fractions.into_iter().map(|f| f * rated_mw).collect();
    WindProfile::new(values, rated_mw, DEFAULT_STEP_HOURS)
}

/// Multiplicatively rescales every value (clamping at the rating) until the
/// capacity factor matches `target_cf`. Without clamping the shape is preserved.
pub fn scale_to_cf(profile: &WindProfile, target_cf: f64) -> Result<WindProfile> {
    if !(target_cf > 0.0 && target_cf <= 1.0) {
        return Err(Error::invalid(
            "target_cf",
            format!("must lie in (0, 1], got {target_cf}"),
        ));
    }
    let current = profile.capacity_factor();
    let total = (profile.len() * profile.n_farms()) as f64;
    let nonzero = profile.farms.iter().flatten().filter(|&&v| v > 0.0).count() as f64;
    let reachable = if total > 0.0 { nonzero / total } else { 0.0 };
    if current == 0.0 || target_cf > reachable * (1.0 + CF_TOLERANCE) {
        return Err(Error::invalid(
            "target_cf",
            format!("{target_cf} infeasible, at most {reachable} reachable by rescaling"),
        ));
    }

    let rated = profile.rated_mw;
    let mut factor = target_cf / current;
    let mut scaled = profile.map_values(|v| (v * factor).min(rated));
    for _ in 0..MAX_CALIBRATION_ITERATIONS {
        let cf = scaled.capacity_factor();
        if (cf - target_cf).abs() <= 1e-12 * target_cf {
            return Ok(scaled);
        }
        factor *= target_cf / cf;
        scaled = profile.map_values(|v| (v * factor).min(rated));
    }
    let cf = scaled.capacity_factor();
    if (cf - target_cf).abs() <= CF_TOLERANCE * target_cf {
        Ok(scaled)
    } else {
        Err(Error::UnreachableCf {
            target: target_cf,
            msg: format!("reached {cf} after {MAX_CALIBRATION_ITERATIONS} iterations"),
        })
    }
}

/// Where a run gets its wind profile: a CSV file or `synth:<cf>,<seed>`.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileSource {
    File(std::path::PathBuf),
    Synth { target_cf: f64, seed: u64 },
}

impl ProfileSource {
    pub fn resolve(&self, rated_mw: f64) -> Result<WindProfile> {
        match self {
            ProfileSource::File(path) => load_profile(path, rated_mw),
            ProfileSource::Synth { target_cf, seed } => synth_profile(*target_cf, rated_mw, *seed, STEPS_PER_YEAR),
        }
    }
}

impl FromStr for ProfileSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(spec) = s.strip_prefix("synth:") {
            let (cf, seed) = spec
                .split_once(',')
                .ok_or_else(|| Error::invalid("profile", "expected `synth:<cf>,<seed>`"))?;
            let target_cf: f64 = cf
                .trim()
                .parse()
                .map_err(|_| Error::invalid("profile", format!("bad capacity factor `{cf}`")))?;
            if !(0.0..=1.0).contains(&target_cf) {
                return Err(Error::invalid(
                    "profile",
                    format!("capacity factor {target_cf} outside [0, 1]"),
                ));
            }
            let seed = seed
                .trim()
                .parse()
                .map_err(|_| Error::invalid("profile", format!("bad seed `{seed}`")))?;
            Ok(ProfileSource::Synth { target_cf, seed })
        } else if s.is_empty() {
            Err(Error::invalid("profile", "empty profile source"))
        } else {
            Ok(ProfileSource::File(s.into()))
        }
    }
}
