//! Use-case presets, scenario evaluation, comparison tables and one-at-a-time
//! sensitivity sweeps.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispatch::{simulate_year, Backup, DispatchRule, FlowLedger, RuleKind};
use crate::econ::{
    comp_annual_cost, elec_annual_cost, export_revenue, ic_annual_cost, pem_annual_cost, CapacityBasis, CostReport,
    EconParams, PriceBook,
};
use crate::error::{Error, Result};
use crate::plant::{
    equivalent_full_load_hours, split_power, stack_life_years, Compressor, Electrolyser, GridConnection,
    PhysicalConstants, PlantSpec, WindPlant, SPLIT_TOLERANCE_MW,
};
use crate::profiles::{WindProfile, HOURS_PER_YEAR};

/// Capacity factor and seed of the reference synthetic profile.
pub const REFERENCE_CF: f64 = 0.4883;
pub const REFERENCE_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UseCase {
    I,
    II,
    IIIa,
    IIIb,
    IVa,
    IVb,
    Va,
    VbI,
    VbII,
}

impl UseCase {
    pub const ALL: [UseCase; 9] = [
        UseCase::I,
        UseCase::II,
        UseCase::IIIa,
        UseCase::IIIb,
        UseCase::IVa,
        UseCase::IVb,
        UseCase::Va,
        UseCase::VbI,
        UseCase::VbII,
    ];

    pub fn id(self) -> &'static str {
        match self {
            UseCase::I => "I",
            UseCase::II => "II",
            UseCase::IIIa => "III-a",
            UseCase::IIIb => "III-b",
            UseCase::IVa => "IV-a",
            UseCase::IVb => "IV-b",
            UseCase::Va => "V-a",
            UseCase::VbI => "V-b-i",
            UseCase::VbII => "V-b-ii",
        }
    }

    /// Parses a comma-separated list, or `all`.
    pub fn parse_list(s: &str) -> Result<Vec<UseCase>> {
        if s.trim().eq_ignore_ascii_case("all") {
            return Ok(Self::ALL.to_vec());
        }
        s.split(',').map(str::parse).collect()
    }
}

impl fmt::Display for UseCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for UseCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        UseCase::ALL
            .into_iter()
            .find(|u| u.id().eq_ignore_ascii_case(t))
            .ok_or_else(|| Error::UnknownUseCase(t.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub id: String,
    pub plant: PlantSpec,
    pub rule: DispatchRule,
    pub econ: EconParams,
    /// Profile file or `synth:<cf>,<seed>`; the command line may override it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<String>,
    /// Also report the cost with a zero contract price.
    #[serde(default)]
    pub report_free_variant: bool,
    #[serde(default = "default_year_hours")]
    pub year_hours: f64,
}

fn default_year_hours() -> f64 {
    HOURS_PER_YEAR
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.plant.validate()?;
        self.rule.validate(&self.plant)?;
        self.econ.validate()?;
        if !(self.year_hours.is_finite() && self.year_hours > 0.0) {
            return Err(Error::invalid("year_hours", "must be positive"));
        }
        let grid = &self.plant.grid;
        match self.rule.kind {
            RuleKind::OffGridDirect if grid.line_capacity_mw > 0.0 => Err(Error::invalid(
                "plant.grid.line_capacity_mw",
                "an off-grid system has no line",
            )),
            RuleKind::OffGridDirect | RuleKind::BtmGridFirst | RuleKind::BtmPemFirst if !grid.has_wire() => {
                Err(Error::invalid(
                    "plant.grid.wire_capacity_mw",
                    "a co-located system needs a private wire",
                ))
            }
            _ => Ok(()),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies dotted-path overrides to the JSON form, then parses and validates.
    pub fn with_overrides(&self, overrides: &[Override]) -> Result<Self> {
        let mut value = serde_json::to_value(self)?;
        for o in overrides {
            o.apply(&mut value)?;
        }
        let cfg: Self = serde_json::from_value(value)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialises")
    }
}

/// Reference parameterisation of a use case.
pub fn preset(use_case: UseCase) -> ScenarioConfig {
    let (pem_mw, rule, grid, p_export, free) = match use_case {
        UseCase::I => (
            10.0,
            DispatchRule::new(RuleKind::GridOnly, Backup::None),
            GridConnection::new(10.0, 1.0, 0.0, 0.0),
            0.07,
            false,
        ),
        UseCase::II => (
            10.0,
            DispatchRule::new(RuleKind::OffGridDirect, Backup::None),
            GridConnection::new(0.0, 0.0, 10.0, 1.0),
            0.07,
            true,
        ),
        UseCase::IIIa | UseCase::IIIb => (
            10.0,
            DispatchRule::new(
                RuleKind::VirtualPpa,
                if use_case == UseCase::IIIb {
                    Backup::GridBackup
                } else {
                    Backup::None
                },
            ),
            GridConnection::new(10.0, 1.0, 0.0, 0.0),
            0.07,
            false,
        ),
        UseCase::IVa | UseCase::IVb => (
            10.0,
            DispatchRule::curtailment(
                8.0,
                5,
                if use_case == UseCase::IVb {
                    Backup::GridBackup
                } else {
                    Backup::None
                },
            ),
            GridConnection::new(8.0, 0.0, 0.0, 0.0),
            0.07,
            true,
        ),
        UseCase::Va => (
            5.0,
            DispatchRule::new(RuleKind::BtmGridFirst, Backup::None),
            GridConnection::new(5.0, 0.0, 5.0, 0.5),
            0.07,
            true,
        ),
        UseCase::VbI | UseCase::VbII => (
            5.0,
            DispatchRule::new(
                RuleKind::BtmPemFirst,
                if use_case == UseCase::VbII {
                    Backup::GridBackup
                } else {
                    Backup::None
                },
            ),
            GridConnection::new(5.0, 0.5, 5.0, 0.5),
            0.044,
            true,
        ),
    };
    ScenarioConfig {
        id: use_case.id().to_string(),
        plant: PlantSpec {
            wind: WindPlant::default(),
            electrolyser: Electrolyser::reference(pem_mw),
            compressor: Compressor::default(),
            grid,
            constants: PhysicalConstants::default(),
        },
        rule,
        econ: EconParams {
            prices: PriceBook {
                p_export,
                ..PriceBook::default()
            },
            ..EconParams::default()
        },
        profile: None,
        report_free_variant: free,
        year_hours: HOURS_PER_YEAR,
    }
}

/// Physical outcome of a simulated year.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnualSummary {
    pub annual_mass_kg: f64,
    pub eflh_hours: f64,
    /// `f64::INFINITY` (serialised as null) when the stack never runs.
    pub stack_life_years: f64,
    /// Electrolyser intake (electrolysis plus compression) over rated power.
    pub load_factor: f64,
    /// Electrolysis share only; equals EFLH over the year.
    pub pem_load_factor: f64,
    pub wind_to_h2_mwh: f64,
    pub import_mwh: f64,
    pub export_mwh: f64,
    pub curtail_mwh: f64,
}

impl AnnualSummary {
    pub fn from_ledger(ledger: &FlowLedger, el: &Electrolyser) -> Self {
        let t = &ledger.totals;
        let hours = ledger.duration_hours();
        let eflh = equivalent_full_load_hours(t.pem_mwh, el);
        Self {
            annual_mass_kg: t.mass_kg,
            eflh_hours: eflh,
            stack_life_years: stack_life_years(t.pem_mwh, el),
            load_factor: (t.wind_to_h2_mwh + t.import_mwh) / (el.rated_mw * hours),
            pem_load_factor: eflh / hours,
            wind_to_h2_mwh: t.wind_to_h2_mwh,
            import_mwh: t.import_mwh,
            export_mwh: t.export_mwh,
            curtail_mwh: t.curtail_mwh,
        }
    }
}

/// Costs a simulated year. The ledger is left untouched, so price and cost
/// parameters can be varied without re-running dispatch.
pub fn assess(cfg: &ScenarioConfig, ledger: &FlowLedger) -> Result<CostReport> {
    let plant = &cfg.plant;
    let el = &plant.electrolyser;
    let d = cfg.econ.discount_rate;
    let summary = AnnualSummary::from_ledger(ledger, el);

    let c_pem = pem_annual_cost(el, summary.stack_life_years, d, cfg.econ.replacement);
    let capacity_kg = match cfg.econ.compressor_capacity {
        CapacityBasis::RealisedProduction => summary.annual_mass_kg,
        CapacityBasis::RatedProduction => {
            let full = split_power(el.rated_mw, el, &plant.compressor, &plant.constants, SPLIT_TOLERANCE_MW)?;
            full.mass_rate_kg_per_h * cfg.year_hours
        }
    };
    let c_comp = comp_annual_cost(&plant.compressor, capacity_kg, d, cfg.econ.compressor_opex);
    let c_ic = ic_annual_cost(&plant.grid, d);
    let c_elec = elec_annual_cost(ledger, &cfg.econ.prices);
    CostReport::from_components(
        c_pem,
        c_comp,
        c_ic,
        c_elec,
        summary.annual_mass_kg,
        export_revenue(ledger, &cfg.econ.prices),
        &plant.constants,
    )
}

/// The same configuration with the contract price set to zero.
pub fn free_electricity(cfg: &ScenarioConfig) -> ScenarioConfig {
    let mut free = cfg.clone();
    free.econ.prices.p_ppa = 0.0;
    free
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub id: String,
    pub summary: AnnualSummary,
    pub costs: CostReport,
    /// Cost with a zero contract price, when the scenario asks for it.
    pub free: Option<CostReport>,
}

impl Evaluation {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("evaluation serialises")
    }
}

pub fn evaluate(cfg: &ScenarioConfig, profile: &WindProfile) -> Result<(Evaluation, FlowLedger)> {
    cfg.validate()?;
    let ledger = simulate_year(cfg, profile)?;
    let evaluation = evaluate_ledger(cfg, &ledger)?;
    Ok((evaluation, ledger))
}

fn evaluate_ledger(cfg: &ScenarioConfig, ledger: &FlowLedger) -> Result<Evaluation> {
    let summary = AnnualSummary::from_ledger(ledger, &cfg.plant.electrolyser);
    let costs = assess(cfg, ledger)?;
    let free = if cfg.report_free_variant {
        Some(assess(&free_electricity(cfg), ledger)?)
    } else {
        None
    };
    Ok(Evaluation {
        id: cfg.id.clone(),
        summary,
        costs,
        free,
    })
}

/// Evaluates each configuration on the same profile. Rows come back in input order.
pub fn run_configs(configs: &[ScenarioConfig], profile: &WindProfile) -> Result<Vec<Evaluation>> {
    configs
        .par_iter()
        .map(|cfg| evaluate(cfg, profile).map(|(e, _)| e))
        .collect()
}

pub fn run_comparison(ids: &[UseCase], profile: &WindProfile) -> Result<Vec<Evaluation>> {
    let configs: Vec<ScenarioConfig> = ids.iter().map(|&u| preset(u)).collect();
    run_configs(&configs, profile)
}

pub const TABLE_HEADER: &str = "use_case,lcoh_gbp_per_mwh,lcoh_gbp_per_kg,lcoh_free_gbp_per_mwh,annual_h2_t,stack_life_years,load_factor_pct,pem_load_factor_pct,share_pem,share_comp,share_ic,share_elec,export_revenue_gbp";

/// One comparison row: the six headline columns followed by the breakdown.
pub fn table_row(e: &Evaluation) -> String {
    let free = e.free.map(|f| format!("{:.4}", f.lcoh_per_mwh_hhv)).unwrap_or_default();
    let life = if e.summary.stack_life_years.is_finite() {
        format!("{:.4}", e.summary.stack_life_years)
    } else {
        "inf".to_string()
    };
    format!(
        "{},{:.4},{:.4},{},{:.4},{},{:.4},{:.4},{:.6},{:.6},{:.6},{:.6},{:.2}",
        e.id,
        e.costs.lcoh_per_mwh_hhv,
        e.costs.lcoh_per_kg,
        free,
        e.summary.annual_mass_kg / 1000.0,
        life,
        100.0 * e.summary.load_factor,
        100.0 * e.summary.pem_load_factor,
        e.costs.shares.pem,
        e.costs.shares.comp,
        e.costs.shares.ic,
        e.costs.shares.elec,
        e.costs.export_revenue,
    )
}

pub fn table_csv(rows: &[Evaluation]) -> String {
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&table_row(r));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    /// Multiplier on the contract price.
    PPpaMultiplier,
    /// Multiplier on electrolyser CAPEX per kW.
    PemCapexMultiplier,
    /// Relative uplift applied to every point of the efficiency curve.
    EfficiencyUplift,
    StackLifeHours,
}

const UPLIFT_STEPS: [f64; 4] = [0.03, 0.05, 0.07, 0.10];
const RANGE_EPS: f64 = 1e-9;

impl SweepParam {
    pub const ALL: [SweepParam; 4] = [
        SweepParam::PPpaMultiplier,
        SweepParam::PemCapexMultiplier,
        SweepParam::EfficiencyUplift,
        SweepParam::StackLifeHours,
    ];

    pub fn id(self) -> &'static str {
        match self {
            SweepParam::PPpaMultiplier => "p_ppa_multiplier",
            SweepParam::PemCapexMultiplier => "pem_capex_multiplier",
            SweepParam::EfficiencyUplift => "efficiency_uplift",
            SweepParam::StackLifeHours => "stack_life_hours",
        }
    }

    /// Whether command-line ranges for this parameter are relative changes
    /// (`-0.8` meaning a multiplier of 0.2).
    pub fn takes_relative_range(self) -> bool {
        matches!(self, SweepParam::PPpaMultiplier | SweepParam::PemCapexMultiplier)
    }

    /// Sweep values spanning the reference sensitivity ranges.
    pub fn default_values(self) -> Vec<f64> {
        match self {
            SweepParam::PPpaMultiplier => (0..=20).map(|i| i as f64 / 10.0).collect(),
            SweepParam::PemCapexMultiplier => (2..=13).map(|i| i as f64 / 10.0).collect(),
            SweepParam::EfficiencyUplift => UPLIFT_STEPS.to_vec(),
            SweepParam::StackLifeHours => (6..=12).map(|i| i as f64 * 10_000.0).collect(),
        }
    }

    fn check(self, v: f64) -> Result<f64> {
        let in_range = |lo: f64, hi: f64| {
            if v >= lo - RANGE_EPS && v <= hi + RANGE_EPS {
                Ok(v.clamp(lo, hi))
            } else {
                Err(Error::invalid(self.id(), format!("{v} outside [{lo}, {hi}]")))
            }
        };
        match self {
            SweepParam::PPpaMultiplier => in_range(0.0, 2.0),
            SweepParam::PemCapexMultiplier => in_range(0.2, 1.3),
            SweepParam::StackLifeHours => in_range(60_000.0, 120_000.0),
            SweepParam::EfficiencyUplift => {
                if v.abs() <= RANGE_EPS {
                    return Ok(0.0);
                }
                UPLIFT_STEPS
                    .into_iter()
                    .find(|u| (u - v).abs() <= RANGE_EPS)
                    .ok_or_else(|| Error::invalid(self.id(), format!("{v} not one of 0, 0.03, 0.05, 0.07, 0.10")))
            }
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "p_ppa_multiplier" | "p_ppa" | "ppa" => Ok(SweepParam::PPpaMultiplier),
            "pem_capex_multiplier" | "pem_capex" | "capex" => Ok(SweepParam::PemCapexMultiplier),
            "efficiency_uplift" | "efficiency" => Ok(SweepParam::EfficiencyUplift),
            "stack_life_hours" | "stack_life" => Ok(SweepParam::StackLifeHours),
            other => Err(Error::UnknownParameter(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

impl SweepSpec {
    pub fn new(param: SweepParam, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid(param.id(), "no sweep values"));
        }
        let values = values.into_iter().map(|v| param.check(v)).collect::<Result<_>>()?;
        Ok(Self { param, values })
    }

    pub fn reference(param: SweepParam) -> Self {
        Self {
            param,
            values: param.default_values(),
        }
    }
}

/// Parses `start:end:step` (inclusive) into evenly spaced values.
pub fn parse_range(s: &str) -> Result<Vec<f64>> {
    let bad = |msg: &str| Error::invalid("range", format!("`{s}`: {msg}"));
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let [a, b, step] = parts.as_slice() else {
        return Err(bad("expected start:end:step"));
    };
    let num = |t: &str| {
        t.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| bad("not a number"))
    };
    let (start, end, step) = (num(a)?, num(b)?, num(step)?);
    if !(step > 0.0) || end < start {
        return Err(bad("need end >= start and a positive step"));
    }
    let span = (end - start) / step;
    if span > 10_000.0 {
        return Err(bad("more than 10000 points"));
    }
    let n = span.round() as usize;
    if (span - n as f64).abs() > 1e-6 {
        return Err(bad("step does not divide the range"));
    }
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub lcoh_per_kg: f64,
    pub lcoh_per_mwh_hhv: f64,
    pub annual_mass_kg: f64,
}

fn apply_sweep_value(base: &ScenarioConfig, param: SweepParam, value: f64) -> ScenarioConfig {
    let mut cfg = base.clone();
    match param {
        SweepParam::PPpaMultiplier => cfg.econ.prices.p_ppa *= value,
        SweepParam::PemCapexMultiplier => cfg.plant.electrolyser.capex_per_kw *= value,
        SweepParam::StackLifeHours => cfg.plant.electrolyser.stack_life_hours = value,
        SweepParam::EfficiencyUplift => {
            cfg.plant.electrolyser.curve = cfg.plant.electrolyser.curve.uplifted(value);
        }
    }
    cfg
}

/// LCOH at each sweep value with all other parameters at their base values.
/// Only efficiency changes re-run the dispatch.
pub fn sweep(base: &ScenarioConfig, spec: &SweepSpec, profile: &WindProfile) -> Result<Vec<SweepPoint>> {
    base.validate()?;
    let spec = SweepSpec::new(spec.param, spec.values.clone())?;
    let point = |cfg: &ScenarioConfig, ledger: &FlowLedger, value: f64| -> Result<SweepPoint> {
        let c = assess(cfg, ledger)?;
        Ok(SweepPoint {
            value,
            lcoh_per_kg: c.lcoh_per_kg,
            lcoh_per_mwh_hhv: c.lcoh_per_mwh_hhv,
            annual_mass_kg: ledger.totals.mass_kg,
        })
    };

    if spec.param == SweepParam::EfficiencyUplift {
        spec.values
            .par_iter()
            .map(|&v| {
                let cfg = apply_sweep_value(base, spec.param, v);
                let ledger = simulate_year(&cfg, profile)?;
                point(&cfg, &ledger, v)
            })
            .collect()
    } else {
        let ledger = simulate_year(base, profile)?;
        spec.values
            .par_iter()
            .map(|&v| point(&apply_sweep_value(base, spec.param, v), &ledger, v))
            .collect()
    }
}

pub fn sweep_csv(param: SweepParam, points: &[SweepPoint]) -> String {
    let mut out = format!("{},lcoh_gbp_per_kg,lcoh_gbp_per_mwh,annual_h2_t\n", param.id());
    for p in points {
        let _ = writeln!(
            out,
            "{:.6},{:.6},{:.6},{:.6}",
            p.value,
            p.lcoh_per_kg,
            p.lcoh_per_mwh_hhv,
            p.annual_mass_kg / 1000.0
        );
    }
    out
}

/// A `dotted.path=value` edit to a scenario's JSON form. Values parse as
/// JSON when they can (numbers, booleans, arrays) and as strings otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Override {
    pub path: Vec<String>,
    pub value: serde_json::Value,
}

impl FromStr for Override {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (key, raw) = s
            .split_once('=')
            .ok_or_else(|| Error::invalid("set", format!("expected key=value, got `{s}`")))?;
        let key = key.trim();
        if key.is_empty() || key.split('.').any(str::is_empty) {
            return Err(Error::invalid("set", format!("bad key `{key}`")));
        }
        let raw = raw.trim();
        let value = serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
        Ok(Self {
            path: key.split('.').map(String::from).collect(),
            value,
        })
    }
}

impl Override {
    pub fn key(&self) -> String {
        self.path.join(".")
    }

    /// Replaces an existing field. Unknown paths are rejected.
    pub fn apply(&self, root: &mut serde_json::Value) -> Result<()> {
        let mut node = root;
        for (i, seg) in self.path.iter().enumerate() {
            let known = match node {
                serde_json::Value::Object(map) => map.contains_key(seg) || optional_field(&self.path[..=i]),
                _ => false,
            };
            if !known {
                return Err(Error::UnknownParameter(self.key()));
            }
            node = node
                .as_object_mut()
                .expect("checked above")
                .entry(seg.clone())
                .or_insert(serde_json::Value::Null);
        }
        *node = self.value.clone();
        Ok(())
    }
}

/// Fields that serialisation omits when unset.
fn optional_field(path: &[String]) -> bool {
    let p: Vec<&str> = path.iter().map(String::as_str).collect();
    matches!(p.as_slice(), ["profile"] | ["rule", "curtail_threshold_mw"])
}
