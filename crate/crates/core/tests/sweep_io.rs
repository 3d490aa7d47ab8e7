use glancing::harness::{compare_methods, read_sweep_file, run_sweep, Method, Outcome, Spacing, SweepConfig};

fn config(n: u32, methods: &[Method], points: usize) -> SweepConfig {
    SweepConfig {
        orders: vec![n],
        alpha_min: 0.1,
        alpha_max: 3.0,
        points,
        spacing: Spacing::Log,
        methods: methods.iter().copied().collect(),
        ..SweepConfig::default()
    }
}

#[test]
fn output_file_round_trips_and_is_deterministic() {
    let dir = std::env::temp_dir().join(format!("glancing-sweep-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let first = dir.join("a.csv");
    let second = dir.join("b.csv");
    let mut c = config(6, &Method::ALL, 40);
    c.output = Some(first.clone());
    let rows = run_sweep(&c).unwrap();
    c.output = Some(second.clone());
    run_sweep(&c).unwrap();
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());
    assert_eq!(read_sweep_file(&first).unwrap(), rows);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn tunneling_failures_are_sentinels() {
    let rows = run_sweep(&config(6, &[Method::ZntTunnel], 120)).unwrap();
    let failed: Vec<_> = rows
        .iter()
        .filter(|r| matches!(r.outcomes.get(&Method::ZntTunnel), Some(Outcome::Failed(k)) if k == "BranchFailure"))
        .collect();
    assert!(!failed.is_empty());
    for r in &failed {
        assert_eq!(r.status(), "znt_tunnel:BranchFailure");
    }
    for r in &rows {
        if let Some(v) = r.value(Method::ZntTunnel) {
            assert!((0.0..=1.0).contains(&v));
        }
    }
}

#[test]
fn high_order_znt_shows_single_peak() {
    let rows = run_sweep(&config(6, &[Method::Numeric, Method::ZntDouble], 150)).unwrap();
    let report = compare_methods(&rows, 0.05).unwrap();
    assert_eq!(report.summary(6, Method::ZntDouble).unwrap().peak_count, 1);
    assert!(report.summary(6, Method::Numeric).unwrap().peak_count >= 2);
}
