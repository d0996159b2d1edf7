//! Physical plant: electrolyser efficiency and hydrogen yield, the
//! electrolysis/compression power split, stack life, and asset parameters.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Full-load LHV efficiency that reproduces the grid-only benchmark output.
pub const DEFAULT_EFFICIENCY: f64 = 0.6746;
pub const SPLIT_TOLERANCE_MW: f64 = 1e-9;
pub const MAX_SPLIT_ITERATIONS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalConstants {
    pub lhv_kwh_per_kg: f64,
    pub hhv_kwh_per_kg: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            lhv_kwh_per_kg: 33.3,
            hhv_kwh_per_kg: 39.4,
        }
    }
}

impl PhysicalConstants {
    pub fn new(lhv_kwh_per_kg: f64, hhv_kwh_per_kg: f64) -> Result<Self> {
        let c = Self {
            lhv_kwh_per_kg,
            hhv_kwh_per_kg,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lhv_kwh_per_kg > 0.0 && self.hhv_kwh_per_kg > self.lhv_kwh_per_kg && self.hhv_kwh_per_kg.is_finite())
        {
            return Err(Error::invalid("constants", "require hhv > lhv > 0"));
        }
        Ok(())
    }
}

/// Piecewise-linear LHV efficiency against load fraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct EfficiencyCurve {
    points: Vec<(f64, f64)>,
}

impl EfficiencyCurve {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("curve", "needs at least one point"));
        }
        for (i, &(load, eta)) in points.iter().enumerate() {
            if !(0.0..=1.0).contains(&load) {
                return Err(Error::invalid("curve", format!("load fraction {load} outside [0, 1]")));
            }
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(Error::invalid("curve", format!("efficiency {eta} outside (0, 1]")));
            }
            if i > 0 && load <= points[i - 1].0 {
                return Err(Error::invalid("curve", "load fractions must be strictly increasing"));
            }
        }
        Ok(Self { points })
    }

    pub fn constant(eta: f64) -> Result<Self> {
        Self::new(vec![(0.0, eta), (1.0, eta)])
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Linear interpolation, held flat outside the first and last points.
    pub fn interpolate(&self, load_fraction: f64) -> f64 {
        let pts = &self.points;
        let x = load_fraction.clamp(0.0, 1.0);
        if x <= pts[0].0 {
            return pts[0].1;
        }
        for w in pts.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if x <= x1 {
                return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
            }
        }
        pts[pts.len() - 1].1
    }

    /// Scales every efficiency by `1 + uplift`, capped at 1.
    pub fn uplifted(&self, uplift: f64) -> Self {
        Self {
            points: self
                .points
                .iter()
                .map(|&(l, e)| (l, (e * (1.0 + uplift)).min(1.0)))
                .collect(),
        }
    }

    /// Parses `load_fraction,efficiency` rows after a header line.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        let mut saw_header = false;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !saw_header {
                let cols: Vec<&str> = line.split(',').map(str::trim).collect();
                if cols != ["load_fraction", "efficiency"] {
                    return Err(Error::Parse {
                        line: idx + 1,
                        msg: format!("expected header `load_fraction,efficiency`, got `{line}`"),
                    });
                }
                saw_header = true;
                continue;
            }
            let bad = || Error::Parse {
                line: idx + 1,
                msg: format!("expected `<load>,<efficiency>`, got `{line}`"),
            };
            let (l, e) = line.split_once(',').ok_or_else(bad)?;
            let load: f64 = l.trim().parse().map_err(|_| bad())?;
            let eta: f64 = e.trim().parse().map_err(|_| bad())?;
            points.push((load, eta));
        }
        Self::new(points)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse_csv(&text)
    }
}

impl TryFrom<Vec<[f64; 2]>> for EfficiencyCurve {
    type Error = Error;

    fn try_from(v: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(v.into_iter().map(|[l, e]| (l, e)).collect())
    }
}

impl From<EfficiencyCurve> for Vec<[f64; 2]> {
    fn from(c: EfficiencyCurve) -> Self {
        c.points.into_iter().map(|(l, e)| [l, e]).collect()
    }
}

/// Efficiency at a load fraction; zero below the cut-in load.
pub fn efficiency_at(curve: &EfficiencyCurve, load_fraction: f64, min_load_fraction: f64) -> f64 {
    if load_fraction < min_load_fraction {
        0.0
    } else {
        curve.interpolate(load_fraction)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Electrolyser {
    pub rated_mw: f64,
    pub lifetime_years: f64,
    pub capex_per_kw: f64,
    pub opex_frac_of_capex_per_year: f64,
    pub stack_life_hours: f64,
    pub stack_replace_frac_of_capex: f64,
    pub curve: EfficiencyCurve,
    #[serde(default)]
    pub min_load_fraction: f64,
}

impl Electrolyser {
    /// 10 MW PEM unit with the reference cost assumptions.
    pub fn reference(rated_mw: f64) -> Self {
        Self {
            rated_mw,
            lifetime_years: 30.0,
            capex_per_kw: 1500.0,
            opex_frac_of_capex_per_year: 0.05,
            stack_life_hours: 60_000.0,
            stack_replace_frac_of_capex: 0.48,
            curve: EfficiencyCurve::constant(DEFAULT_EFFICIENCY).expect("constant curve is valid"),
            min_load_fraction: 0.0,
        }
    }

    pub fn efficiency(&self, load_fraction: f64) -> f64 {
        efficiency_at(&self.curve, load_fraction, self.min_load_fraction)
    }

    pub fn cut_in_mw(&self) -> f64 {
        self.min_load_fraction * self.rated_mw
    }

    pub fn validate(&self) -> Result<()> {
        positive("electrolyser.rated_mw", self.rated_mw)?;
        at_least("electrolyser.lifetime_years", self.lifetime_years, 1.0)?;
        non_negative("electrolyser.capex_per_kw", self.capex_per_kw)?;
        non_negative(
            "electrolyser.opex_frac_of_capex_per_year",
            self.opex_frac_of_capex_per_year,
        )?;
        positive("electrolyser.stack_life_hours", self.stack_life_hours)?;
        let r = self.stack_replace_frac_of_capex;
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::invalid(
                "electrolyser.stack_replace_frac_of_capex",
                "must lie in (0, 1]",
            ));
        }
        if !(0.0..1.0).contains(&self.min_load_fraction) {
            return Err(Error::invalid("electrolyser.min_load_fraction", "must lie in [0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Compressor {
    /// £ per kg/yr of compression capacity.
    pub capex_per_kg_annual: f64,
    pub opex_frac_of_capex_per_year: f64,
    pub energy_kwh_per_kg: f64,
    pub lifetime_years: f64,
}

impl Default for Compressor {
    fn default() -> Self {
        Self {
            capex_per_kg_annual: 2.49,
            opex_frac_of_capex_per_year: 0.06,
            energy_kwh_per_kg: 0.399,
            lifetime_years: 30.0,
        }
    }
}

impl Compressor {
    pub fn validate(&self) -> Result<()> {
        non_negative("compressor.capex_per_kg_annual", self.capex_per_kg_annual)?;
        non_negative(
            "compressor.opex_frac_of_capex_per_year",
            self.opex_frac_of_capex_per_year,
        )?;
        non_negative("compressor.energy_kwh_per_kg", self.energy_kwh_per_kg)?;
        at_least("compressor.lifetime_years", self.lifetime_years, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConnection {
    pub line_capacity_mw: f64,
    pub line_cost_per_kw: f64,
    /// Fraction of the line cost borne by the hydrogen producer.
    pub line_cost_share_h2: f64,
    pub wire_capacity_mw: f64,
    pub wire_cost_per_kw: f64,
    pub wire_cost_share_h2: f64,
    pub ic_lifetime_years: f64,
}

impl GridConnection {
    pub fn new(line_capacity_mw: f64, line_cost_share_h2: f64, wire_capacity_mw: f64, wire_cost_share_h2: f64) -> Self {
        Self {
            line_capacity_mw,
            line_cost_per_kw: 100.0,
            line_cost_share_h2,
            wire_capacity_mw,
            wire_cost_per_kw: 15.0,
            wire_cost_share_h2,
            ic_lifetime_years: 30.0,
        }
    }

    pub fn has_wire(&self) -> bool {
        self.wire_capacity_mw > 0.0
    }

    pub fn validate(&self) -> Result<()> {
        non_negative("grid.line_capacity_mw", self.line_capacity_mw)?;
        non_negative("grid.line_cost_per_kw", self.line_cost_per_kw)?;
        non_negative("grid.wire_capacity_mw", self.wire_capacity_mw)?;
        non_negative("grid.wire_cost_per_kw", self.wire_cost_per_kw)?;
        share("grid.line_cost_share_h2", self.line_cost_share_h2)?;
        share("grid.wire_cost_share_h2", self.wire_cost_share_h2)?;
        at_least("grid.ic_lifetime_years", self.ic_lifetime_years, 1.0)
    }
}

/// Wind farm parameters. The cost fields are carried for reference only and
/// do not enter the hydrogen cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindPlant {
    pub rated_mw: f64,
    pub lifetime_years: f64,
    pub capex_per_kw: f64,
    pub opex_per_kw_year: f64,
}

impl Default for WindPlant {
    fn default() -> Self {
        Self {
            rated_mw: 10.0,
            lifetime_years: 25.0,
            capex_per_kw: 1230.0,
            opex_per_kw_year: 25.4,
        }
    }
}

impl WindPlant {
    pub fn validate(&self) -> Result<()> {
        positive("wind.rated_mw", self.rated_mw)?;
        at_least("wind.lifetime_years", self.lifetime_years, 1.0)?;
        non_negative("wind.capex_per_kw", self.capex_per_kw)?;
        non_negative("wind.opex_per_kw_year", self.opex_per_kw_year)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantSpec {
    pub wind: WindPlant,
    pub electrolyser: Electrolyser,
    pub compressor: Compressor,
    pub grid: GridConnection,
    #[serde(default)]
    pub constants: PhysicalConstants,
}

impl PlantSpec {
    pub fn validate(&self) -> Result<()> {
        self.wind.validate()?;
        self.electrolyser.validate()?;
        self.compressor.validate()?;
        self.grid.validate()?;
        self.constants.validate()
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be positive, got {v}")))
    }
}

fn non_negative(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be non-negative, got {v}")))
    }
}

fn at_least(field: &str, v: f64, min: f64) -> Result<()> {
    if v.is_finite() && v >= min {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be at least {min}, got {v}")))
    }
}

fn share(field: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must lie in [0, 1], got {v}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSplit {
    pub p_pem_mw: f64,
    pub p_comp_mw: f64,
    pub mass_rate_kg_per_h: f64,
    pub iterations: usize,
}

/// Divides an intake between electrolysis and compression.
///
/// Starts with the whole intake on the stack, derives the hydrogen rate, takes
/// the compression demand off the stack and repeats until the allocation
/// stops moving. An intake below the cut-in load leaves the stack idle.
pub fn split_power(
    p_h2_mw: f64,
    el: &Electrolyser,
    comp: &Compressor,
    consts: &PhysicalConstants,
    tol_mw: f64,
) -> Result<PowerSplit> {
    if !(p_h2_mw.is_finite() && p_h2_mw >= 0.0) {
        return Err(Error::invalid(
            "p_h2_mw",
            format!("must be non-negative, got {p_h2_mw}"),
        ));
    }
    if !(tol_mw > 0.0) {
        return Err(Error::invalid("tol", "must be positive"));
    }
    let idle = PowerSplit {
        p_pem_mw: 0.0,
        p_comp_mw: 0.0,
        mass_rate_kg_per_h: 0.0,
        iterations: 0,
    };
    if p_h2_mw == 0.0 || p_h2_mw < el.cut_in_mw() {
        return Ok(idle);
    }

    // kg/h for a given stack power; cut-in is judged on the intake above.
    let rate = |p_pem: f64| 1000.0 * p_pem * el.curve.interpolate(p_pem / el.rated_mw) / consts.lhv_kwh_per_kg;
    let comp_mw = |rate: f64| rate * comp.energy_kwh_per_kg / 1000.0;

    let mut p_pem = p_h2_mw;
    for iteration in 1..=MAX_SPLIT_ITERATIONS {
        let next = p_h2_mw - comp_mw(rate(p_pem));
        let moved = (next - p_pem).abs();
        p_pem = next;
        if moved <= tol_mw {
            let r = rate(p_pem);
            return Ok(PowerSplit {
                p_pem_mw: p_pem,
                p_comp_mw: comp_mw(r),
                mass_rate_kg_per_h: r,
                iterations: iteration,
            });
        }
    }
    Err(Error::NoConvergence {
        p_h2_mw,
        iterations: MAX_SPLIT_ITERATIONS,
    })
}

/// Hydrogen produced in one step, kg.
pub fn hydrogen_mass(p_pem_mw: f64, step_hours: f64, efficiency: f64, consts: &PhysicalConstants) -> f64 {
    1000.0 * p_pem_mw * step_hours * efficiency / consts.lhv_kwh_per_kg
}

/// Equivalent full-load hours per year of the stack.
pub fn equivalent_full_load_hours(annual_p_pem_mwh: f64, el: &Electrolyser) -> f64 {
    annual_p_pem_mwh / el.rated_mw
}

/// Stack life in years; `f64::INFINITY` when the stack never runs.
pub fn stack_life_years(annual_p_pem_mwh: f64, el: &Electrolyser) -> f64 {
    let eflh = equivalent_full_load_hours(annual_p_pem_mwh, el);
    if eflh <= 0.0 {
        f64::INFINITY
    } else {
        el.stack_life_hours / eflh
    }
}
