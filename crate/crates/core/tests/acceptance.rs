//! Acceptance suite. Prints one `PASS`/`FAIL` line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use morawetz::evolve::evolve;
use morawetz::harness::{run_scenario, selftest, sweep, verify_fields, Config, RunOutcome, Scenario};
use morawetz::interaction::angular_average_weighted_l4;
use morawetz::report::EstimateReport;
use morawetz::single::weighted_integral;
use morawetz::Result;

const CONSERVATION_2D: &str = include_str!("../../../configs/conservation-2d.conf");
const PAIR_3D: &str = include_str!("../../../configs/gaussian-3d-pair.conf");
const LINE_2D: &str = include_str!("../../../configs/gaussian-2d-line.conf");
const DIAG_1D: &str = include_str!("../../../configs/gaussian-1d-diag.conf");
const FOCUSING: &str = include_str!("../../../configs/focusing-control.conf");

const MASS_DRIFT_MAX: f64 = 1e-10;
const MOMENTUM_DRIFT_MAX: f64 = 1e-8;
const ENERGY_RATIO_RANGE: (f64, f64) = (3.5, 4.5);
const LAW_ORDER: f64 = 2.0;
const LAW_ORDER_TOL: f64 = 0.2;
const DELTA_REL_TOL: f64 = 1e-3;
const ANGULAR_REL_TOL: f64 = 0.01;
const RATIO_STABILITY: f64 = 0.05;
const PAIR_ORACLE_TOL: f64 = 1e-10;
const LINE_ORACLE_TOL: f64 = 1e-12;
const DIAG_ORACLE_TOL: f64 = 1e-12;

type Verdict = (bool, String);
type Criterion = (&'static str, fn() -> Result<Verdict>);

fn config(text: &str, overrides: &[(&str, &str)]) -> Result<Config> {
    let mut c = Config::parse(text)?;
    for (k, v) in overrides {
        c.set(k, v)?;
    }
    Ok(c)
}

fn run(text: &str, overrides: &[(&str, &str)]) -> Result<RunOutcome> {
    run_scenario(&Scenario::from_config(&config(text, overrides)?)?)
}

fn report<'a>(o: &'a RunOutcome, name: &str) -> Result<&'a EstimateReport> {
    o.report(name)
        .ok_or_else(|| morawetz::Error::InvalidArgument(format!("missing report `{name}`")))
}

fn context(r: &EstimateReport, key: &str) -> f64 {
    r.context
        .iter()
        .find(|(k, _)| k == key)
        .and_then(|(_, v)| v.parse().ok())
        .unwrap_or(f64::NAN)
}

fn passes(o: &RunOutcome, names: &[&str]) -> Result<bool> {
    let mut ok = o.aborted.is_none();
    for n in names {
        ok &= !report(o, n)?.failed();
    }
    Ok(ok)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn conservation() -> Result<Verdict> {
    let coarse = run(CONSERVATION_2D, &[("checks", "conservation"), ("time.observer_stride", "10")])?;
    let fine = run(
        CONSERVATION_2D,
        &[("checks", "conservation"), ("time.dt", "1e-3"), ("time.observer_stride", "20")],
    )?;
    let mass = report(&coarse, "mass-drift")?.lhs;
    let momentum = report(&coarse, "momentum-drift")?.lhs;
    let ratio = report(&coarse, "energy-drift")?.lhs / report(&fine, "energy-drift")?.lhs;
    let ok = coarse.aborted.is_none()
        && mass <= MASS_DRIFT_MAX
        && momentum <= MOMENTUM_DRIFT_MAX
        && (ENERGY_RATIO_RANGE.0..=ENERGY_RATIO_RANGE.1).contains(&ratio);
    Ok((ok, format!("mass_drift={mass:.3e} momentum_drift={momentum:.3e} energy_ratio={ratio:.4}")))
}

fn local_laws() -> Result<Verdict> {
    let mut ok = true;
    let mut detail = Vec::new();
    for nonlinearity in ["off", "defocusing"] {
        let base = config(
            CONSERVATION_2D,
            &[
                ("checks", "local-laws"),
                ("grid.n_points", "64"),
                ("time.t_final", "0.5"),
                ("time.observer_stride", "1000"),
                ("nonlinearity", nonlinearity),
            ],
        )?;
        let values = ["1e-2", "5e-3", "2.5e-3"].map(String::from);
        let s = sweep(&base, "time.dt", &values)?;
        for law in ["mass-law-residual", "momentum-law-residual"] {
            let orders = s.orders(law);
            ok &= orders.len() == 2
                && orders
                    .iter()
                    .all(|o| o.is_some_and(|o| (o - LAW_ORDER).abs() <= LAW_ORDER_TOL));
            let shown: Vec<String> = orders
                .iter()
                .map(|o| o.map_or("-".into(), |o| format!("{o:.3}")))
                .collect();
            detail.push(format!("{nonlinearity}/{law}={}", shown.join(",")));
        }
    }
    Ok((ok, detail.join(" ")))
}

fn field_identities() -> Result<Verdict> {
    let reports = verify_fields()?;
    let identities: Vec<&EstimateReport> =
        reports.iter().filter(|r| r.name.starts_with("identity-")).collect();
    let failed: Vec<String> = identities
        .iter()
        .filter(|r| r.failed())
        .map(|r| format!("{}(lhs={:.6},rhs={:.6})", r.name, r.lhs, r.rhs))
        .collect();
    let detail = if failed.is_empty() {
        format!("{} identity checks", identities.len())
    } else {
        format!("failed: {}", failed.join(" "))
    };
    Ok((failed.is_empty() && !identities.is_empty(), detail))
}

fn delta_constants() -> Result<Verdict> {
    let reports = verify_fields()?;
    let expected = [("radial3", 8.0 * PI), ("pair3d", 32.0 * PI), ("line_diag_2d", 8.0 * PI)];
    let mut ok = true;
    let mut detail = Vec::new();
    for (label, constant) in expected {
        let name = format!("delta-{label}");
        let r = reports
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| morawetz::Error::InvalidArgument(format!("missing {name}")))?;
        ok &= r.lhs <= DELTA_REL_TOL && rel(r.constant, constant) < 1e-14;
        detail.push(format!("{label}: target={:.6} rel_err={:.2e}", r.constant, r.lhs));
    }
    Ok((ok, detail.join(" ")))
}

fn gap(o: &RunOutcome) -> Result<f64> {
    Ok(context(report(o, "ftc")?, "gap"))
}

fn pair_interaction() -> Result<Verdict> {
    let checks = ["monotonicity", "pointwise-16pi", "ftc"];
    let mut eps_gaps = Vec::new();
    let mut ok = true;
    let mut base = None;
    for eps in ["4h", "2h", "h"] {
        let o = run(PAIR_3D, &[("weight.epsilon", eps)])?;
        ok &= passes(&o, &checks)?;
        eps_gaps.push(gap(&o)?);
        if eps == "2h" {
            base = Some(o);
        }
    }
    let base = base.expect("2h run");
    let mut dt_gaps = Vec::new();
    for dt in ["8e-3", "4e-3", "2e-3"] {
        if dt == "4e-3" {
            dt_gaps.push(gap(&base)?);
            continue;
        }
        let o = run(PAIR_3D, &[("time.dt", dt)])?;
        ok &= passes(&o, &checks)?;
        dt_gaps.push(gap(&o)?);
    }
    // dt: the gap itself decreases; ε: the gap converges (successive changes shrink)
    let dt_decreasing = dt_gaps.windows(2).all(|w| w[1] < w[0]);
    let eps_changes: Vec<f64> = eps_gaps.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let eps_converging = eps_changes.windows(2).all(|w| w[1] < w[0]);
    ok &= dt_decreasing && eps_converging;
    let fmt = |v: &[f64]| v.iter().map(|g| format!("{g:.4}")).collect::<Vec<_>>().join(",");
    Ok((
        ok,
        format!(
            "pointwise_ratio={:.4} ftc_ratio={:.4} gap_eps(4h,2h,h)={} gap_dt(8e-3,4e-3,2e-3)={}",
            report(&base, "pointwise-16pi")?.ratio,
            report(&base, "ftc")?.ratio,
            fmt(&eps_gaps),
            fmt(&dt_gaps)
        ),
    ))
}

fn line_interaction() -> Result<Verdict> {
    let base = run(LINE_2D, &[])?;
    let fine = run(LINE_2D, &[("time.dt", "1e-3"), ("time.observer_stride", "20")])?;
    let mut ok = passes(&base, &["monotonicity", "pointwise-2pi", "ftc"])?;
    let r0 = report(&base, "weighted-l4-ratio")?.ratio;
    let r1 = report(&fine, "weighted-l4-ratio")?.ratio;
    let drift = rel(r1, r0);
    ok &= drift <= RATIO_STABILITY;

    let scenario = Scenario::from_config(&config(LINE_2D, &[])?)?;
    let grid = scenario.grid()?;
    let initial = scenario.initial.build(&grid)?;
    let last = evolve(&initial, &scenario.solver_config(), &[])
        .map_err(|e| e.cause)?
        .final_state;
    let eps = scenario.epsilon_value();
    let center = [scenario.weight_center[0], scenario.weight_center[1]];
    let mut worst = 0.0f64;
    for u in [&initial, &last] {
        let angular = angular_average_weighted_l4(u, center, 64, eps)?;
        let direct = weighted_integral(u, &center, 4.0, eps);
        worst = worst.max(rel(angular, direct));
    }
    ok &= worst <= ANGULAR_REL_TOL;
    Ok((
        ok,
        format!(
            "pointwise_ratio={:.4} ftc_ratio={:.4} weighted_l4_ratio={r0:.6} (dt/2: {r1:.6}, rel {drift:.2e}) angular_vs_direct={worst:.2e}",
            report(&base, "pointwise-2pi")?.ratio,
            report(&base, "ftc")?.ratio,
        ),
    ))
}

fn oracle_errors(prefix: &str, reports: &[EstimateReport]) -> Vec<f64> {
    reports
        .iter()
        .filter(|r| r.name.starts_with(prefix))
        .map(|r| r.lhs)
        .collect()
}

fn sci(v: &[f64]) -> String {
    v.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(",")
}

fn all_below(v: &[f64], tol: f64) -> bool {
    !v.is_empty() && v.iter().all(|e| *e <= tol)
}

fn diag_quadrilinear() -> Result<Verdict> {
    let errors = oracle_errors("oracle-diag1d", &selftest()?);
    let o = run(DIAG_1D, &[])?;
    let l8 = report(&o, "l8-ratio")?.ratio;
    let ok = all_below(&errors, DIAG_ORACLE_TOL) && passes(&o, &["monotonicity"])? && l8.is_finite();
    Ok((ok, format!("oracle_err={} l8_ratio={l8:.6}", sci(&errors))))
}

fn oracle_equivalence() -> Result<Verdict> {
    let reports = selftest()?;
    let pair = oracle_errors("oracle-pair3d", &reports);
    let line = oracle_errors("oracle-line2d", &reports);
    let ok = all_below(&pair, PAIR_ORACLE_TOL) && all_below(&line, LINE_ORACLE_TOL);
    Ok((ok, format!("pair3d={} line2d={}", sci(&pair), sci(&line))))
}

fn negative_control() -> Result<Verdict> {
    let monotone = |o: &RunOutcome| -> Vec<bool> {
        o.reports
            .iter()
            .filter(|r| r.name.starts_with("monotonicity"))
            .map(|r| !r.failed())
            .collect()
    };
    let focusing = monotone(&run(FOCUSING, &[])?);
    let defocusing = monotone(&run(FOCUSING, &[("nonlinearity", "defocusing")])?);
    let ok = !defocusing.is_empty()
        && defocusing.iter().all(|p| *p)
        && focusing.iter().any(|p| !*p);
    Ok((ok, format!("focusing_monotone={focusing:?} defocusing_monotone={defocusing:?}")))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("conservation", conservation),
        ("local-laws", local_laws),
        ("field-identities", field_identities),
        ("delta-constants", delta_constants),
        ("pair-interaction-3d", pair_interaction),
        ("line-interaction-2d", line_interaction),
        ("diag-quadrilinear-1d", diag_quadrilinear),
        ("oracle-equivalence", oracle_equivalence),
        ("negative-control", negative_control),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
        failed += usize::from(!ok);
        println!(
            "{} {} {name} [{:.1}s] {detail}",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
