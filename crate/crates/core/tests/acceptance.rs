//! Acceptance gate. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any fails.

use std::time::{Duration, Instant};

use h2path::dispatch::{dispatch_step, simulate_year, Backup, DispatchRule, RuleKind};
use h2path::econ::crf;
use h2path::plant::{split_power, Compressor, Electrolyser, PhysicalConstants, SPLIT_TOLERANCE_MW};
use h2path::profiles::{scale_to_cf, synth_profile, WindProfile, STEPS_PER_YEAR};
use h2path::scenarios::{
    assess, evaluate, free_electricity, preset, run_comparison, sweep, Evaluation, SweepParam, SweepSpec, UseCase,
    REFERENCE_CF, REFERENCE_SEED,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

// Reference results for the grid-only benchmark and the wind-only rows.
const I_LCOH_MWH: f64 = 263.62;
const I_LCOH_KG: f64 = 10.39;
const I_MASS_T: f64 = 1760.58;
const I_STACK_YR: f64 = 6.88;
const II_MASS_T: f64 = 859.65;
const II_LCOH_MWH: f64 = 128.55;
const II_FREE_MWH: f64 = 58.92;
const II_STACK_YR: f64 = 14.56;
const IIIA_LCOH_MWH: f64 = 130.22;
const IIIB_LCOH_MWH: f64 = 186.93;
const WIND_CF: f64 = 0.4883;

const RANDOM_PROFILES: usize = 1000;

struct Gate {
    failed: Vec<&'static str>,
}

impl Gate {
    fn record(&mut self, id: &'static str, title: &str, checks: Vec<(String, bool)>) {
        let ok = checks.iter().all(|(_, pass)| *pass);
        println!("[{}] {id}: {title}", if ok { "PASS" } else { "FAIL" });
        for (detail, pass) in &checks {
            println!("        {} {detail}", if *pass { "ok " } else { "BAD" });
        }
        if !ok {
            self.failed.push(id);
        }
    }
}

fn rel(actual: f64, expected: f64) -> f64 {
    (actual / expected - 1.0).abs()
}

fn within(label: &str, actual: f64, expected: f64, tol: f64) -> (String, bool) {
    let r = rel(actual, expected);
    (
        format!(
            "{label}: {actual:.4} vs {expected} (rel {:.3}%, limit {:.1}%)",
            100.0 * r,
            100.0 * tol
        ),
        r <= tol,
    )
}

fn flag(label: impl Into<String>, pass: bool) -> (String, bool) {
    (label.into(), pass)
}

fn reference_profile() -> WindProfile {
    synth_profile(REFERENCE_CF, 10.0, REFERENCE_SEED, STEPS_PER_YEAR).expect("reference profile")
}

fn run(u: UseCase, profile: &WindProfile) -> Evaluation {
    evaluate(&preset(u), profile).expect("evaluation").0
}

fn criterion_1(gate: &mut Gate) {
    let start = Instant::now();
    let a = run(UseCase::I, &synth_profile(0.5, 10.0, 1, STEPS_PER_YEAR).unwrap());
    let elapsed = start.elapsed();
    let b = run(UseCase::I, &synth_profile(0.2, 10.0, 99, STEPS_PER_YEAR).unwrap());
    gate.record(
        "AC1",
        "grid-only benchmark reproduction",
        vec![
            within("LCOH £/MWh", a.costs.lcoh_per_mwh_hhv, I_LCOH_MWH, 0.02),
            within("LCOH £/kg", a.costs.lcoh_per_kg, I_LCOH_KG, 0.02),
            within("annual H2 t", a.summary.annual_mass_kg / 1000.0, I_MASS_T, 0.005),
            flag(
                format!("load factor {:.6}%", 100.0 * a.summary.load_factor),
                (a.summary.load_factor - 1.0).abs() <= 1e-9,
            ),
            within("stack life yr", a.summary.stack_life_years, I_STACK_YR, 0.02),
            flag("identical on a second profile", a == b),
            flag(format!("runtime {elapsed:?} < 1 s"), elapsed < Duration::from_secs(1)),
        ],
    );
}

fn criterion_2(gate: &mut Gate) {
    // Three different shapes sharing the wind capacity factor.
    let ramp: Vec<f64> = (0..STEPS_PER_YEAR).map(|i| 10.0 * (i % 48) as f64 / 47.0).collect();
    let profiles = [
        synth_profile(WIND_CF, 10.0, 42, STEPS_PER_YEAR).unwrap(),
        synth_profile(WIND_CF, 10.0, 7, STEPS_PER_YEAR).unwrap(),
        scale_to_cf(&WindProfile::new(ramp, 10.0, 0.5).unwrap(), WIND_CF).unwrap(),
    ];
    let mut checks = Vec::new();
    for (i, p) in profiles.iter().enumerate() {
        let e = run(UseCase::II, p);
        let free = e.free.expect("use case II reports the free variant");
        checks.push(within(
            &format!("profile {i} annual H2 t"),
            e.summary.annual_mass_kg / 1000.0,
            II_MASS_T,
            0.01,
        ));
        checks.push(within(
            &format!("profile {i} LCOH £/MWh"),
            e.costs.lcoh_per_mwh_hhv,
            II_LCOH_MWH,
            0.03,
        ));
        checks.push(within(
            &format!("profile {i} LCOH free £/MWh"),
            free.lcoh_per_mwh_hhv,
            II_FREE_MWH,
            0.03,
        ));
        checks.push(within(
            &format!("profile {i} stack life yr"),
            e.summary.stack_life_years,
            II_STACK_YR,
            0.05,
        ));
    }
    gate.record("AC2", "off-grid wind reproduction at the wind capacity factor", checks);
}

fn criterion_3(gate: &mut Gate) {
    let p = reference_profile();
    gate.record(
        "AC3",
        "virtual PPA rows with and without grid back-up",
        vec![
            within(
                "III-a LCOH £/MWh",
                run(UseCase::IIIa, &p).costs.lcoh_per_mwh_hhv,
                IIIA_LCOH_MWH,
                0.03,
            ),
            within(
                "III-b LCOH £/MWh",
                run(UseCase::IIIb, &p).costs.lcoh_per_mwh_hhv,
                IIIB_LCOH_MWH,
                0.02,
            ),
        ],
    );
}

fn criterion_4(gate: &mut Gate) {
    let rows = run_comparison(&UseCase::ALL, &reference_profile()).unwrap();
    let get = |u: UseCase| rows.iter().find(|r| r.id == u.id()).unwrap();
    let lcoh = |u: UseCase| get(u).costs.lcoh_per_kg;
    let mass = |u: UseCase| get(u).summary.annual_mass_kg;
    let max_other = UseCase::ALL[1..].iter().map(|&u| lcoh(u)).fold(f64::MIN, f64::max);
    let mut checks = vec![flag(
        format!("LCOH(I) {:.3} > max of others {:.3}", lcoh(UseCase::I), max_other),
        lcoh(UseCase::I) > max_other,
    )];
    for (a, b) in [
        (UseCase::IIIa, UseCase::IIIb),
        (UseCase::IVa, UseCase::IVb),
        (UseCase::VbI, UseCase::VbII),
    ] {
        checks.push(flag(
            format!("LCOH({b}) {:.3} > LCOH({a}) {:.3}", lcoh(b), lcoh(a)),
            lcoh(b) > lcoh(a),
        ));
        checks.push(flag(
            format!("mass({b}) {:.1} t >= mass({a}) {:.1} t", mass(b) / 1e3, mass(a) / 1e3),
            mass(b) >= mass(a),
        ));
    }
    gate.record("AC4", "ordering on the calibrated profile", checks);
}

/// Plain substitution map run for a fixed 1,000 iterations, no early exit.
fn brute_force_split(p_h2: f64, eta: f64, e_comp: f64, lhv: f64) -> f64 {
    let mut p_pem = p_h2;
    for _ in 0..1000 {
        let kg_per_h = 1000.0 * p_pem * eta / lhv;
        p_pem = p_h2 - kg_per_h * e_comp / 1000.0;
    }
    p_pem
}

fn criterion_5(gate: &mut Gate) {
    let mut worst_annuity = 0.0f64;
    for d in [0.005, 0.01, 0.03, 0.05, 0.08, 0.12, 0.2] {
        for n in [1u32, 2, 5, 10, 20, 25, 30, 40, 60] {
            let f = crf(d, n as f64);
            let pv: f64 = (1..=n).map(|k| f / (1.0 + d).powi(k as i32)).sum();
            worst_annuity = worst_annuity.max((pv - 1.0).abs());
        }
    }
    let el = Electrolyser::reference(10.0);
    let comp = Compressor::default();
    let consts = PhysicalConstants::default();
    let s = split_power(10.0, &el, &comp, &consts, SPLIT_TOLERANCE_MW).unwrap();
    let brute = brute_force_split(10.0, 0.6746, 0.399, 33.3);
    let residual = (s.p_pem_mw + s.p_comp_mw - 10.0).abs();
    gate.record(
        "AC5",
        "numerical kernels against independent oracles",
        vec![
            flag(
                format!("crf(0.03, 30) = {:.9}", crf(0.03, 30.0)),
                (crf(0.03, 30.0) - 0.0510193).abs() <= 1e-6,
            ),
            flag(
                format!("worst annuity identity error {worst_annuity:.2e}"),
                worst_annuity <= 1e-9,
            ),
            flag(
                format!("P_PEM = {:.6} MW", s.p_pem_mw),
                (s.p_pem_mw - 9.9198).abs() <= 1e-4,
            ),
            flag(format!("split residual {residual:.2e} MW"), residual <= 1e-9),
            flag(
                format!(
                    "brute-force P_PEM {brute:.12} differs by {:.2e}",
                    (brute - s.p_pem_mw).abs()
                ),
                (brute - s.p_pem_mw).abs() <= 1e-9,
            ),
        ],
    );
}

fn random_profile(seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..STEPS_PER_YEAR).map(|_| rng.random_range(0.0..=10.0)).collect()
}

fn criterion_6(gate: &mut Gate) {
    let profile = reference_profile();
    let mut worst_balance = 0.0f64;
    let mut worst_ratio = 0.0f64;
    let mut worst_shares = 0.0f64;
    for u in UseCase::ALL {
        let cfg = preset(u);
        let ledger = simulate_year(&cfg, &profile).unwrap();
        for r in &ledger.records {
            worst_balance = worst_balance.max(r.wind_balance_residual().abs());
        }
        for c in [
            assess(&cfg, &ledger).unwrap(),
            assess(&free_electricity(&cfg), &ledger).unwrap(),
        ] {
            worst_ratio = worst_ratio.max(rel(c.lcoh_per_mwh_hhv / c.lcoh_per_kg, 1000.0 / 39.4));
            worst_shares = worst_shares.max((c.shares.sum() - 1.0).abs());
        }
    }

    let plant = preset(UseCase::VbI).plant;
    let pem_first = DispatchRule::new(RuleKind::BtmPemFirst, Backup::None);
    let grid_first = DispatchRule::new(RuleKind::BtmGridFirst, Backup::None);
    let violations: usize = (0..RANDOM_PROFILES as u64)
        .into_par_iter()
        .map(|seed| {
            random_profile(seed)
                .iter()
                .enumerate()
                .filter(|&(i, &p)| {
                    let a = dispatch_step(&pem_first, &plant, i, &[p], 0.5).unwrap();
                    let b = dispatch_step(&grid_first, &plant, i, &[p], 0.5).unwrap();
                    a.mass_kg < b.mass_kg
                })
                .count()
        })
        .sum();

    gate.record(
        "AC6",
        "flow, unit and breakdown invariants",
        vec![
            flag(
                format!("worst wind balance residual {worst_balance:.2e} MW"),
                worst_balance <= 1e-9,
            ),
            flag(
                format!("worst £/MWh to £/kg ratio error {worst_ratio:.2e}"),
                worst_ratio <= 1e-9,
            ),
            flag(
                format!("worst share-sum error {worst_shares:.2e}"),
                worst_shares <= 1e-9,
            ),
            flag(
                format!("PEM-first below grid-first mass at {violations} steps over {RANDOM_PROFILES} random profiles"),
                violations == 0,
            ),
        ],
    );
}

fn nondecreasing(points: &[h2path::scenarios::SweepPoint]) -> bool {
    points.windows(2).all(|w| w[1].lcoh_per_kg >= w[0].lcoh_per_kg)
}

fn criterion_7(gate: &mut Gate) {
    let profile = reference_profile();
    let base = preset(UseCase::IIIa);
    let mut checks = Vec::new();
    let mut curves = Vec::new();
    for param in SweepParam::ALL {
        let spec = SweepSpec::reference(param);
        let points = sweep(&base, &spec, &profile).unwrap();
        checks.push(flag(
            format!(
                "{param}: {} points from {} to {}",
                points.len(),
                spec.values[0],
                spec.values[spec.values.len() - 1]
            ),
            points.len() == spec.values.len(),
        ));
        curves.push((param, points));
    }
    let price = &curves[0].1;
    let capex = &curves[1].1;
    checks.push(flag("price curve nondecreasing", nondecreasing(price)));
    checks.push(flag("capex curve nondecreasing", nondecreasing(capex)));
    checks.push(flag(
        "price sweep spans -100%..+100%",
        price.first().unwrap().value == 0.0 && price.last().unwrap().value == 2.0,
    ));
    checks.push(flag(
        "capex sweep spans -80%..+30%",
        (capex.first().unwrap().value - 0.2).abs() < 1e-12 && (capex.last().unwrap().value - 1.3).abs() < 1e-12,
    ));
    let ledger = simulate_year(&base, &profile).unwrap();
    let free = assess(&free_electricity(&base), &ledger).unwrap();
    let endpoint = price[0].lcoh_per_mwh_hhv;
    checks.push(flag(
        format!("p_ppa=0 endpoint {endpoint:.9} vs free {:.9}", free.lcoh_per_mwh_hhv),
        rel(endpoint, free.lcoh_per_mwh_hhv) <= 1e-9,
    ));
    gate.record("AC7", "sensitivity protocol on III-a", checks);
}

fn criterion_8(gate: &mut Gate) {
    let start = Instant::now();
    let profile = reference_profile();
    let rows = run_comparison(&UseCase::ALL, &profile).unwrap();
    let base = preset(UseCase::IIIa);
    let points: usize = SweepParam::ALL
        .iter()
        .map(|&p| sweep(&base, &SweepSpec::reference(p), &profile).unwrap().len())
        .sum();
    let elapsed = start.elapsed();
    gate.record(
        "AC8",
        "full comparison plus four sweeps",
        vec![flag(
            format!("{} rows and {points} sweep points in {elapsed:?} (< 5 s)", rows.len()),
            rows.len() == 9 && elapsed < Duration::from_secs(5),
        )],
    );
}

fn main() {
    let mut gate = Gate { failed: Vec::new() };
    criterion_1(&mut gate);
    criterion_2(&mut gate);
    criterion_3(&mut gate);
    criterion_4(&mut gate);
    criterion_5(&mut gate);
    criterion_6(&mut gate);
    criterion_7(&mut gate);
    criterion_8(&mut gate);
    if gate.failed.is_empty() {
        println!("acceptance: all 8 criteria passed");
    } else {
        println!("acceptance: failed {:?}", gate.failed);
        std::process::exit(1);
    }
}
