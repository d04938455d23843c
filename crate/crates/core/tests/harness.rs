use morawetz::harness::{run_scenario, Config, Scenario};
use morawetz::report::Verdict;

const LINE_2D: &str = include_str!("../../../configs/gaussian-2d-line.conf");

fn scenario(text: &str, overrides: &[(&str, &str)]) -> Scenario {
    let mut c = Config::parse(text).unwrap();
    for (k, v) in overrides {
        c.set(k, v).unwrap();
    }
    Scenario::from_config(&c).unwrap()
}

fn small_line() -> Scenario {
    scenario(
        LINE_2D,
        &[
            ("grid.n_points", "32"),
            ("time.t_final", "0.1"),
            ("time.observer_stride", "10"),
            ("weight.n_theta", "8"),
        ],
    )
}

#[test]
fn repeated_runs_give_identical_csv() {
    let s = small_line();
    let a = run_scenario(&s).unwrap();
    let b = run_scenario(&s).unwrap();
    assert_eq!(a.csv(), b.csv());
    assert_eq!(a.report_lines(), b.report_lines());
}

#[test]
fn line_scenario_channels_and_reports() {
    let o = run_scenario(&small_line()).unwrap();
    let header = o.csv().lines().next().unwrap().to_string();
    assert_eq!(header, "t,mass,energy,px,py,hhalf_sq,M_line,line_l4,weighted_l4");
    let names: Vec<&str> = o.reports.iter().map(|r| r.name.as_str()).collect();
    assert_eq!(
        names,
        ["monotonicity", "pointwise-2pi", "ftc", "momentum-bound", "weighted-l4-ratio"]
    );
    assert!(o.aborted.is_none());
}

#[test]
fn csv_values_carry_seventeen_significant_digits() {
    let o = run_scenario(&small_line()).unwrap();
    let csv = o.csv();
    let mut lines = csv.lines();
    let width = lines.next().unwrap().split(',').count();
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), o.trace.len());
    for row in rows {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), width);
        for cell in cells {
            let mantissa = cell.split('e').next().unwrap().trim_start_matches('-');
            let digits = mantissa.chars().filter(char::is_ascii_digit).count();
            assert_eq!(digits, 17, "{cell}");
            cell.parse::<f64>().unwrap();
        }
    }
}

#[test]
fn zero_amplitude_passes_every_check() {
    let s = scenario(
        "dim = 1\ngrid.n_points = 32\ngrid.box_length = 16\ntime.dt = 0.01\ntime.t_final = 0.2\n\
         initial.amplitude = 0\nchecks = conservation, diag\n",
        &[],
    );
    let o = run_scenario(&s).unwrap();
    assert!(o.aborted.is_none());
    assert_eq!(o.count(Verdict::Fail), 0, "{}", o.report_lines());
    for r in o.reports.iter().filter(|r| r.verdict == Verdict::Pass) {
        assert_eq!(r.lhs, 0.0, "{r}");
    }
}

#[test]
fn written_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_scenario(&small_line()).unwrap();
    o.write(dir.path()).unwrap();
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert_eq!(trace, o.csv());
    let reports = std::fs::read_to_string(dir.path().join("reports.txt")).unwrap();
    assert!(reports.lines().all(|l| l.starts_with("check=")));
    assert!(dir.path().join("summary.txt").exists());
}
