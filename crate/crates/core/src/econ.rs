//! Annualised costs and the levelised cost of hydrogen.
//!
//! All money is GBP. Prices are £/kWh, asset costs £/kW or £ per kg/yr of
//! compression capacity, results £/yr.

use serde::{Deserialize, Serialize};

use crate::dispatch::FlowLedger;
use crate::error::{Error, Result};
use crate::plant::{Compressor, Electrolyser, GridConnection, PhysicalConstants};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceBook {
    /// Wind to electrolyser contract price.
    pub p_ppa: f64,
    /// Grid import price.
    pub p_import: f64,
    pub p_export: f64,
}

impl Default for PriceBook {
    fn default() -> Self {
        Self {
            p_ppa: 0.057,
            p_import: 0.184,
            p_export: 0.07,
        }
    }
}

impl PriceBook {
    /// Industrial long-run variable cost as the import price.
    pub fn industrial_lrvc() -> Self {
        Self {
            p_import: 0.119,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplacementMode {
    /// One discounted stack replacement.
    #[default]
    Single,
    /// A discounted replacement every stack life within the electrolyser lifetime.
    Multiple,
}

/// What sizes the compressor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapacityBasis {
    /// The year's simulated output.
    #[default]
    RealisedProduction,
    /// Output at continuous full intake.
    RatedProduction,
}

/// What the compressor OPEX fraction applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpexBasis {
    #[default]
    FullCapex,
    AnnualisedCapex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EconParams {
    pub discount_rate: f64,
    pub prices: PriceBook,
    #[serde(default)]
    pub replacement: ReplacementMode,
    #[serde(default)]
    pub compressor_capacity: CapacityBasis,
    #[serde(default)]
    pub compressor_opex: OpexBasis,
}

impl Default for EconParams {
    fn default() -> Self {
        Self {
            discount_rate: 0.03,
            prices: PriceBook::default(),
            replacement: ReplacementMode::Single,
            compressor_capacity: CapacityBasis::RealisedProduction,
            compressor_opex: OpexBasis::FullCapex,
        }
    }
}

impl EconParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.discount_rate.is_finite() && self.discount_rate > 0.0) {
            return Err(Error::invalid("econ.discount_rate", "must be positive"));
        }
        for (name, v) in [
            ("econ.prices.p_ppa", self.prices.p_ppa),
            ("econ.prices.p_import", self.prices.p_import),
            ("econ.prices.p_export", self.prices.p_export),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(name, format!("must be non-negative, got {v}")));
            }
        }
        Ok(())
    }
}

/// Capital recovery factor: `d(1+d)^n / ((1+d)^n - 1)`.
pub fn crf(d: f64, n: f64) -> f64 {
    let g = (1.0 + d).powf(n);
    d * g / (g - 1.0)
}

/// Levelised stack replacement cost per kW, discounted at `stack_life_years`.
pub fn levelised_replacement(el: &Electrolyser, stack_life_years: f64, d: f64, mode: ReplacementMode) -> f64 {
    let replace = el.stack_replace_frac_of_capex * el.capex_per_kw;
    if !stack_life_years.is_finite() {
        return 0.0;
    }
    match mode {
        ReplacementMode::Single => replace / (1.0 + d).powf(stack_life_years),
        ReplacementMode::Multiple => {
            let mut total = 0.0;
            let mut k = 1.0;
            while k * stack_life_years < el.lifetime_years {
                total += replace / (1.0 + d).powf(k * stack_life_years);
                k += 1.0;
            }
            total
        }
    }
}

/// Electrolyser cost: annualised CAPEX plus levelised replacement, plus fixed OPEX.
pub fn pem_annual_cost(el: &Electrolyser, stack_life_years: f64, d: f64, mode: ReplacementMode) -> f64 {
    let rated_kw = el.rated_mw * 1000.0;
    let replacement = levelised_replacement(el, stack_life_years, d, mode);
    rated_kw
        * ((el.capex_per_kw + replacement) * crf(d, el.lifetime_years)
            + el.opex_frac_of_capex_per_year * el.capex_per_kw)
}

/// Compressor cost for `annual_capacity_kg` of yearly throughput.
pub fn comp_annual_cost(comp: &Compressor, annual_capacity_kg: f64, d: f64, opex: OpexBasis) -> f64 {
    let capex = comp.capex_per_kg_annual * annual_capacity_kg;
    let annualised = capex * crf(d, comp.lifetime_years);
    let opex_base = match opex {
        OpexBasis::FullCapex => capex,
        OpexBasis::AnnualisedCapex => annualised,
    };
    annualised + comp.opex_frac_of_capex_per_year * opex_base
}

/// Hydrogen producer's share of the annualised grid line and private wire.
pub fn ic_annual_cost(grid: &GridConnection, d: f64) -> f64 {
    let f = crf(d, grid.ic_lifetime_years);
    let line = grid.line_cost_share_h2 * grid.line_capacity_mw * 1000.0 * grid.line_cost_per_kw * f;
    let wire = grid.wire_cost_share_h2 * grid.wire_capacity_mw * 1000.0 * grid.wire_cost_per_kw * f;
    line + wire
}

/// Wind energy at the contract price plus imported energy at the grid price.
pub fn elec_annual_cost(ledger: &FlowLedger, prices: &PriceBook) -> f64 {
    ledger.totals.wind_to_h2_mwh * 1000.0 * prices.p_ppa + ledger.totals.import_mwh * 1000.0 * prices.p_import
}

/// Exported energy at the export price. Reported only; never offsets cost.
pub fn export_revenue(ledger: &FlowLedger, prices: &PriceBook) -> f64 {
    ledger.totals.export_mwh * 1000.0 * prices.p_export
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lcoh {
    pub per_kg: f64,
    pub per_mwh_hhv: f64,
}

pub fn lcoh(c_total: f64, annual_mass_kg: f64, consts: &PhysicalConstants) -> Result<Lcoh> {
    if !(annual_mass_kg > 0.0) {
        return Err(Error::UndefinedLcoh);
    }
    Ok(Lcoh {
        per_kg: c_total / annual_mass_kg,
        per_mwh_hhv: c_total / (annual_mass_kg * consts.hhv_kwh_per_kg / 1000.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostShares {
    pub pem: f64,
    pub comp: f64,
    pub ic: f64,
    pub elec: f64,
}

impl CostShares {
    pub fn sum(&self) -> f64 {
        self.pem + self.comp + self.ic + self.elec
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub c_pem: f64,
    pub c_comp: f64,
    pub c_ic: f64,
    pub c_elec: f64,
    pub c_total: f64,
    pub lcoh_per_kg: f64,
    pub lcoh_per_mwh_hhv: f64,
    pub shares: CostShares,
    pub export_revenue: f64,
}

impl CostReport {
    /// Assembles the report from the four components. Shares are all zero when
    /// the total is zero.
    pub fn from_components(
        c_pem: f64,
        c_comp: f64,
        c_ic: f64,
        c_elec: f64,
        annual_mass_kg: f64,
        export_revenue: f64,
        consts: &PhysicalConstants,
    ) -> Result<Self> {
        let c_total = c_pem + c_comp + c_ic + c_elec;
        let l = lcoh(c_total, annual_mass_kg, consts)?;
        let shares = if c_total > 0.0 {
            CostShares {
                pem: c_pem / c_total,
                comp: c_comp / c_total,
                ic: c_ic / c_total,
                elec: c_elec / c_total,
            }
        } else {
            CostShares::default()
        };
        Ok(Self {
            c_pem,
            c_comp,
            c_ic,
            c_elec,
            c_total,
            lcoh_per_kg: l.per_kg,
            lcoh_per_mwh_hhv: l.per_mwh_hhv,
            shares,
            export_revenue,
        })
    }
}
