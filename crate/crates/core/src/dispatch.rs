//! Per-step power-flow allocation between wind, electrolyser, grid export and
//! curtailment, and the annual ledger built from it.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plant::{hydrogen_mass, split_power, PlantSpec, SPLIT_TOLERANCE_MW};
use crate::profiles::WindProfile;
use crate::scenarios::ScenarioConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    /// Electrolyser runs at full load on grid imports; wind is not attached.
    GridOnly,
    /// Islanded wind farm feeding the electrolyser over a private wire.
    OffGridDirect,
    /// Wind output contracted to the electrolyser, delivered through the grid.
    VirtualPpa,
    /// Electrolyser absorbs what several farms would curtail above a threshold.
    CurtailmentHarvest,
    /// Behind the meter: export first, electrolyser takes the surplus.
    BtmGridFirst,
    /// Behind the meter: electrolyser first, export the surplus.
    BtmPemFirst,
}

impl RuleKind {
    fn uses_wire(self) -> bool {
        matches!(
            self,
            RuleKind::OffGridDirect | RuleKind::BtmGridFirst | RuleKind::BtmPemFirst
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backup {
    #[default]
    None,
    /// Import from the grid to keep the electrolyser at full intake.
    GridBackup,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispatchRule {
    pub kind: RuleKind,
    #[serde(default)]
    pub backup: Backup,
    /// Per-farm output above which power would be curtailed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curtail_threshold_mw: Option<f64>,
    #[serde(default = "one")]
    pub n_farms: usize,
}

fn one() -> usize {
    1
}

impl DispatchRule {
    pub fn new(kind: RuleKind, backup: Backup) -> Self {
        Self {
            kind,
            backup,
            curtail_threshold_mw: None,
            n_farms: 1,
        }
    }

    pub fn curtailment(threshold_mw: f64, n_farms: usize, backup: Backup) -> Self {
        Self {
            kind: RuleKind::CurtailmentHarvest,
            backup,
            curtail_threshold_mw: Some(threshold_mw),
            n_farms,
        }
    }

    pub fn validate(&self, plant: &PlantSpec) -> Result<()> {
        if self.n_farms == 0 {
            return Err(Error::invalid("rule.n_farms", "must be at least 1"));
        }
        match self.kind {
            RuleKind::CurtailmentHarvest => {
                let t = self
                    .curtail_threshold_mw
                    .ok_or_else(|| Error::invalid("rule.curtail_threshold_mw", "required for curtailment_harvest"))?;
                if !(t >= 0.0 && t <= plant.wind.rated_mw) {
                    return Err(Error::invalid(
                        "rule.curtail_threshold_mw",
                        format!("{t} MW outside [0, {}] MW", plant.wind.rated_mw),
                    ));
                }
            }
            _ => {
                if self.curtail_threshold_mw.is_some() {
                    return Err(Error::invalid(
                        "rule.curtail_threshold_mw",
                        "only valid for curtailment_harvest",
                    ));
                }
                if self.n_farms != 1 {
                    return Err(Error::invalid(
                        "rule.n_farms",
                        "only curtailment_harvest takes several farms",
                    ));
                }
            }
        }
        if self.kind == RuleKind::OffGridDirect && self.backup == Backup::GridBackup {
            return Err(Error::invalid("rule.backup", "an off-grid system cannot import"));
        }
        Ok(())
    }

    /// Largest wind power the electrolyser can take in one step.
    fn intake_cap(&self, plant: &PlantSpec) -> f64 {
        let cap = plant.electrolyser.rated_mw;
        if self.kind.uses_wire() && plant.grid.has_wire() {
            cap.min(plant.grid.wire_capacity_mw)
        } else {
            cap
        }
    }

    /// Export cap summed over farms.
    pub fn export_cap(&self, plant: &PlantSpec) -> f64 {
        match self.kind {
            RuleKind::OffGridDirect | RuleKind::GridOnly => 0.0,
            // Each farm has its own connection, sized at the threshold.
            RuleKind::CurtailmentHarvest => plant.grid.line_capacity_mw * self.n_farms as f64,
            _ => plant.grid.line_capacity_mw,
        }
    }
}

/// Resolved flows for one step, MW except `mass_kg`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FlowRecord {
    pub step: usize,
    pub p_wind_mw: f64,
    pub p_h2_wind_mw: f64,
    pub p_h2_import_mw: f64,
    pub p_export_mw: f64,
    pub p_curtail_mw: f64,
    pub p_pem_mw: f64,
    pub p_comp_mw: f64,
    pub mass_kg: f64,
}

impl FlowRecord {
    /// `p_wind - (p_h2_wind + p_export + p_curtail)`.
    pub fn wind_balance_residual(&self) -> f64 {
        self.p_wind_mw - (self.p_h2_wind_mw + self.p_export_mw + self.p_curtail_mw)
    }

    /// `(p_h2_wind + p_h2_import) - (p_pem + p_comp)`; nonzero only for an idle stack.
    pub fn intake_residual(&self) -> f64 {
        self.p_h2_wind_mw + self.p_h2_import_mw - (self.p_pem_mw + self.p_comp_mw)
    }
}

/// Allocates one step of wind power. `farms` holds one value per farm
/// (a single value for every rule except curtailment harvesting).
pub fn dispatch_step(
    rule: &DispatchRule,
    plant: &PlantSpec,
    step: usize,
    farms: &[f64],
    step_hours: f64,
) -> Result<FlowRecord> {
    let expected = match rule.kind {
        RuleKind::CurtailmentHarvest => rule.n_farms,
        _ => 1,
    };
    if farms.len() != expected {
        return Err(Error::ConfigMismatch(format!(
            "{:?} expects {expected} farm value(s), got {}",
            rule.kind,
            farms.len()
        )));
    }

    let el = &plant.electrolyser;
    let cap = rule.intake_cap(plant);
    let cut_in = el.cut_in_mw();
    let to_pem = |available: f64| {
        let x = available.min(cap);
        if x < cut_in {
            0.0
        } else {
            x
        }
    };

    let mut rec = FlowRecord {
        step,
        ..FlowRecord::default()
    };
    match rule.kind {
        RuleKind::GridOnly => {
            rec.p_h2_import_mw = el.rated_mw;
        }
        RuleKind::OffGridDirect => {
            let p = farms[0];
            rec.p_wind_mw = p;
            rec.p_h2_wind_mw = to_pem(p);
            rec.p_curtail_mw = p - rec.p_h2_wind_mw;
        }
        RuleKind::VirtualPpa | RuleKind::BtmPemFirst => {
            let p = farms[0];
            rec.p_wind_mw = p;
            rec.p_h2_wind_mw = to_pem(p);
            let rest = p - rec.p_h2_wind_mw;
            rec.p_export_mw = rest.min(plant.grid.line_capacity_mw);
            rec.p_curtail_mw = rest - rec.p_export_mw;
        }
        RuleKind::BtmGridFirst => {
            let p = farms[0];
            rec.p_wind_mw = p;
            rec.p_export_mw = p.min(plant.grid.line_capacity_mw);
            let rest = p - rec.p_export_mw;
            rec.p_h2_wind_mw = to_pem(rest);
            rec.p_curtail_mw = rest - rec.p_h2_wind_mw;
        }
        RuleKind::CurtailmentHarvest => {
            let threshold = rule.curtail_threshold_mw.unwrap_or(plant.wind.rated_mw);
            let mut available = 0.0;
            for &p in farms {
                rec.p_wind_mw += p;
                rec.p_export_mw += p.min(threshold);
                available += (p - threshold).max(0.0);
            }
            rec.p_h2_wind_mw = to_pem(available);
            rec.p_curtail_mw = available - rec.p_h2_wind_mw;
        }
    }

    if rule.backup == Backup::GridBackup && rule.kind != RuleKind::GridOnly {
        rec.p_h2_import_mw = (el.rated_mw - rec.p_h2_wind_mw).max(0.0);
    }

    let intake = rec.p_h2_wind_mw + rec.p_h2_import_mw;
    let split = split_power(intake, el, &plant.compressor, &plant.constants, SPLIT_TOLERANCE_MW).map_err(|e| {
        Error::AtStep {
            step,
            source: Box::new(e),
        }
    })?;
    rec.p_pem_mw = split.p_pem_mw;
    rec.p_comp_mw = split.p_comp_mw;
    let eta = el.curve.interpolate(split.p_pem_mw / el.rated_mw);
    rec.mass_kg = if split.mass_rate_kg_per_h > 0.0 {
        hydrogen_mass(split.p_pem_mw, step_hours, eta, &plant.constants)
    } else {
        0.0
    };
    Ok(rec)
}

/// Annual energy totals (MWh) and hydrogen mass (kg).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LedgerTotals {
    pub wind_mwh: f64,
    pub wind_to_h2_mwh: f64,
    pub import_mwh: f64,
    pub export_mwh: f64,
    pub curtail_mwh: f64,
    pub pem_mwh: f64,
    pub comp_mwh: f64,
    pub mass_kg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowLedger {
    pub step_hours: f64,
    pub records: Vec<FlowRecord>,
    pub totals: LedgerTotals,
}

impl FlowLedger {
    pub fn from_records(records: Vec<FlowRecord>, step_hours: f64) -> Self {
        let mut t = LedgerTotals::default();
        for r in &records {
            t.wind_mwh += r.p_wind_mw * step_hours;
            t.wind_to_h2_mwh += r.p_h2_wind_mw * step_hours;
            t.import_mwh += r.p_h2_import_mw * step_hours;
            t.export_mwh += r.p_export_mw * step_hours;
            t.curtail_mwh += r.p_curtail_mw * step_hours;
            t.pem_mwh += r.p_pem_mw * step_hours;
            t.comp_mwh += r.p_comp_mw * step_hours;
            t.mass_kg += r.mass_kg;
        }
        Self {
            step_hours,
            records,
            totals: t,
        }
    }

    pub fn duration_hours(&self) -> f64 {
        self.records.len() as f64 * self.step_hours
    }

    /// Per-step CSV: `step,p_wind,p_h2_wind,p_import,p_export,p_curtail,p_pem,p_comp,mass_kg`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,p_wind,p_h2_wind,p_import,p_export,p_curtail,p_pem,p_comp,mass_kg\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.step,
                r.p_wind_mw,
                r.p_h2_wind_mw,
                r.p_h2_import_mw,
                r.p_export_mw,
                r.p_curtail_mw,
                r.p_pem_mw,
                r.p_comp_mw,
                r.mass_kg
            );
        }
        out
    }
}

/// Runs the scenario's rule over every step of the profile.
pub fn simulate_year(scenario: &ScenarioConfig, profile: &WindProfile) -> Result<FlowLedger> {
    let rule = &scenario.rule;
    let plant = &scenario.plant;
    let hours = profile.duration_hours();
    if (hours - scenario.year_hours).abs() > 1e-6 * scenario.year_hours {
        return Err(Error::ConfigMismatch(format!(
            "profile covers {hours} h, scenario year is {} h",
            scenario.year_hours
        )));
    }
    if (profile.rated_mw() - plant.wind.rated_mw).abs() > 1e-9 * plant.wind.rated_mw {
        return Err(Error::ConfigMismatch(format!(
            "profile rated at {} MW, wind plant at {} MW",
            profile.rated_mw(),
            plant.wind.rated_mw
        )));
    }

    let columns: Vec<&[f64]> = match (rule.kind, profile.n_farms()) {
        (RuleKind::CurtailmentHarvest, 1) => vec![profile.values(); rule.n_farms],
        (RuleKind::CurtailmentHarvest, n) if n == rule.n_farms => profile.farms().iter().map(Vec::as_slice).collect(),
        (_, 1) => vec![profile.values()],
        (kind, n) => {
            return Err(Error::ConfigMismatch(format!(
                "{kind:?} with {} farm(s) cannot use a {n}-column profile",
                rule.n_farms
            )))
        }
    };

    let step_hours = profile.step_hours();
    let mut farms = vec![0.0; columns.len()];
    let mut records = Vec::with_capacity(profile.len());
    for step in 0..profile.len() {
        for (slot, col) in farms.iter_mut().zip(&columns) {
            *slot = col[step];
        }
        records.push(dispatch_step(rule, plant, step, &farms, step_hours)?);
    }
    Ok(FlowLedger::from_records(records, step_hours))
}
