use projsum::families::{family_for, validate_family, PROJ_TOL};
use projsum::harness::{emit_report, load_json_report, run_sweep, to_csv, ReportFormat, SweepConfig};
use projsum::selftest::{compose_dilations, extract_dilation, reduction_certificate, DilationCertificate};
use projsum::strategies::{canonical_strategy, pad_strategy, perturb, schmidt_reduce, NoiseModel};

#[test]
fn generated_families_satisfy_their_invariants() {
    let params = (3..=8).map(|n| (n, 1)).filter(|&(n, _)| n != 4).chain((1..=6).map(|k| (4, k)));
    for (n, k) in params {
        let fam = family_for(n, k).unwrap();
        let report = validate_family(&fam, PROJ_TOL);
        assert!(report.pass, "n={n} k={k}: {:?}", report.failures);
        assert_eq!(report.expected_rank, Some(report.ranks[0]));
    }
}

#[test]
fn padded_strategy_certifies_through_its_reduction() {
    let fam = family_for(4, 1).unwrap();
    let canonical = canonical_strategy(&fam).unwrap();
    let padded = pad_strategy(&canonical, 2, 1).unwrap();
    let reduction = schmidt_reduce(&padded).unwrap();
    let to_reduced = reduction_certificate(&padded, &reduction).unwrap();
    assert!(to_reduced.epsilon < 1e-10);
    let to_canonical = extract_dilation(&reduction.strategy, &fam).unwrap();
    assert!(to_canonical.epsilon < 1e-8);
    let composed = compose_dilations(&to_reduced, &to_canonical, &padded, &canonical).unwrap();
    assert!(composed.epsilon < 1e-8, "composed ε = {}", composed.epsilon);
    assert_eq!(composed.va.ncols(), padded.dim_a());
}

#[test]
fn certificate_survives_a_file_round_trip() {
    let fam = family_for(4, 2).unwrap();
    let noisy = perturb(&canonical_strategy(&fam).unwrap(), NoiseModel::PovmJitter, 1e-3, 7).unwrap();
    let cert = extract_dilation(&noisy, &fam).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cert.json");
    std::fs::write(&path, serde_json::to_string(&cert).unwrap()).unwrap();
    let back: DilationCertificate = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(back, cert);
}

#[test]
fn sweep_reports_round_trip() {
    let cfg = SweepConfig {
        levels: vec![0.0, 1e-3, 1e-2],
        trials_per_level: 3,
        ..SweepConfig::standard(NoiseModel::StateMixing, 11)
    };
    let rows = run_sweep(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("rows.json");
    emit_report(&rows, ReportFormat::Json, &json).unwrap();
    assert_eq!(load_json_report(&json).unwrap(), rows);
    let csv = dir.path().join("rows.csv");
    emit_report(&rows, ReportFormat::Csv, &csv).unwrap();
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), to_csv(&run_sweep(&cfg).unwrap()));
}
