//! Sweeps the regular baseline corpus and the boosted homogeneous profile and
//! prints the window of thresholds `ε`, `ε₀` that separates them.
//!
//! `cargo run --release -p cyllens-core --example calibrate_thresholds`

use std::f64::consts::PI;

use cyllens_core::criteria::assess_point;
use cyllens_core::fields::{
    generate_divfree_random, generate_homogeneous_profile, generate_shear_heat, generate_zero, RandomOptions,
};
use cyllens_core::{CriteriaConfig, ExponentSet, FunctionalReport, GridSpec, QuadratureConfig, SpaceTimeField, SpaceTimePoint};

struct Row {
    label: String,
    criterion: f64,
    mod_lemma: f64,
    dissipation: f64,
}

/// Functional reports at the radii the verdicts actually use.
fn sweep(field: &SpaceTimeField, z: SpaceTimePoint, radii: &[f64], e: &ExponentSet) -> Vec<FunctionalReport> {
    let crit = CriteriaConfig::default();
    let a = assess_point(field, z, e, e.pq(), radii, &crit, &QuadratureConfig::default()).expect("assessment");
    let used = a.th1.radii_used;
    a.reports.into_iter().filter(|r| used.contains(&r.radius)).collect()
}

/// Largest (regular corpus) or smallest (flagged profile) value over the radii.
fn summarize(label: String, reports: &[FunctionalReport], largest: bool) -> Row {
    let fold = |f: &dyn Fn(&FunctionalReport) -> f64| {
        let it = reports.iter().map(f);
        if largest {
            it.fold(f64::NEG_INFINITY, f64::max)
        } else {
            it.fold(f64::INFINITY, f64::min)
        }
    };
    Row {
        label,
        criterion: fold(&|r| r.criterion),
        mod_lemma: fold(&|r| r.c.cbrt() + r.d_tilde),
        dissipation: fold(&|r| r.e),
    }
}

fn main() {
    let e = ExponentSet::from_lambda(1.5).expect("anchor");
    let radii = [0.5, 0.25, 0.125, 0.0625];
    let n = 64;
    let grid = GridSpec::half_space([n + 2, n + 2, n / 2 + 3], 1.0 / n as f64, 0.0, 0.01, 31).expect("grid");
    let wall = SpaceTimePoint::new([0.0; 3], grid.t_end());

    let baseline = [
        generate_zero(grid).expect("zero"),
        generate_shear_heat(grid, 1.0, PI).expect("shear"),
    ];
    let regular: Vec<Row> = baseline
        .iter()
        .map(|f| summarize(f.label.clone(), &sweep(f, wall, &radii, &e), true))
        .collect();
    let smooth: Vec<Row> = (1..=3)
        .map(|seed| {
            let f = generate_divfree_random(grid, seed, 8, &RandomOptions::default()).expect("random");
            summarize(f.label.clone(), &sweep(&f, wall, &radii, &e), true)
        })
        .collect();

    let hgrid = GridSpec::centered([80, 80, 80], 1.0 / 80.0, 0.0, 0.05, 2).expect("grid");
    let homog = generate_homogeneous_profile(hgrid, 0.03).expect("homogeneous");
    let reports = sweep(&homog, SpaceTimePoint::new([0.0; 3], 0.05), &[0.2, 0.1, 0.05], &e);
    let boosted = summarize(homog.label.clone(), &reports, false);

    println!("{:<40} {:>12} {:>12} {:>12}", "field", "criterion", "C^1/3+D~", "E");
    let print = |row: &Row| {
        println!("{:<40} {:>12.4e} {:>12.4e} {:>12.4e}", row.label, row.criterion, row.mod_lemma, row.dissipation)
    };
    regular.iter().chain([&boosted]).for_each(print);
    println!("not solutions, shown for reference:");
    smooth.iter().for_each(print);
    let lo = regular.iter().map(|r| r.criterion).fold(0.0, f64::max);
    let hi = boosted.criterion;
    let defaults = CriteriaConfig::default();
    println!("baseline max criterion {lo:.4e}; boosted homogeneous min criterion {hi:.4e}");
    if lo < hi {
        println!("admissible ε, ε₀ window: ({lo:.4e}, {hi:.4e}]");
    } else {
        println!("no separating window: the baseline overlaps the boosted profile");
    }
    for (name, v) in [("epsilon", defaults.epsilon), ("epsilon0", defaults.epsilon0)] {
        let inside = lo < v && v <= hi;
        println!("default {name} = {v}: {}", if inside { "inside window" } else { "OUTSIDE window" });
    }
}
