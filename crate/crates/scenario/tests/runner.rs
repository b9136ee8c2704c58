use std::process::Command;

use cabin_mwf::activity::{power_detector, Activity};
use cabin_mwf::noise::NoiseColor;
use cabin_mwf::room::PositionSchedule;
use cabin_mwf::signal::StftConfig;

use cabin_mwf_scenario::config::ExperimentKind;
use cabin_mwf_scenario::experiment::{render_talkers, run_cell, speech_program, CellSpec};
use cabin_mwf_scenario::{emit_report, run_experiment, ScenarioConfig};

fn small_noise_config() -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default();
    cfg.experiment = ExperimentKind::Noise;
    cfg.noise_reduction.colors = vec!["white".into()];
    cfg.noise_reduction.input_snr_db = vec![10.0, 5.0, 0.0];
    cfg
}

#[test]
fn noise_sweep_has_one_row_per_snr_plus_baseline() {
    let report = run_experiment(&small_noise_config()).unwrap();
    assert_eq!(report.rows.len(), 4);
    assert_eq!(report.rows.iter().filter(|r| r.signal == "mic_sum").count(), 1);
    assert_eq!(report.failed_rows(), 0);
}

#[test]
fn reports_are_byte_identical_for_a_fixed_seed() {
    let cfg = small_noise_config();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    emit_report(&run_experiment(&cfg).unwrap(), a.path(), Some(1.0)).unwrap();
    emit_report(&run_experiment(&cfg).unwrap(), b.path(), Some(2.0)).unwrap();
    for name in ["metrics.csv", "config.resolved"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs");
    }
}

#[test]
fn seed_changes_the_result() {
    let mut cfg = small_noise_config();
    let first = run_experiment(&cfg).unwrap().metrics_csv();
    cfg.seed = 2;
    assert_ne!(first, run_experiment(&cfg).unwrap().metrics_csv());
}

#[test]
fn notch_run_writes_twelve_spectra() {
    let mut cfg = ScenarioConfig::default();
    cfg.experiment = ExperimentKind::Notch;
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.rows.len(), 12);
    emit_report(&report, dir.path(), None).unwrap();
    let spectra = std::fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with("psd_"))
        .count();
    assert_eq!(spectra, 12);
    let text = std::fs::read_to_string(dir.path().join("psd_8ms_2db_mwf.dat")).unwrap();
    assert!(text.starts_with("# frequency_hz\tlevel_db\n"));
    assert!(text.lines().skip(1).all(|l| l.split('\t').count() == 2));
}

#[test]
fn head_run_reports_three_intervals_per_case() {
    let mut cfg = ScenarioConfig::default();
    cfg.experiment = ExperimentKind::Head;
    let report = run_experiment(&cfg).unwrap();
    assert_eq!(report.rows.len(), 2 * 2 * 3);
    assert_eq!(report.failed_rows(), 0);
    // Identical up to the stop time, so the pre-movement interval agrees.
    let pre: Vec<_> = report
        .rows
        .iter()
        .filter(|r| r.interval == Some("pre"))
        .map(|r| r.gains.unwrap())
        .collect();
    assert_eq!(pre[0], pre[1]);
}

#[test]
fn power_detector_tracks_the_oracle_in_the_cabin() {
    let cfg = ScenarioConfig::default();
    let program = speech_program(&cfg, cfg.speech.min_duration).unwrap();
    let talkers = render_talkers(
        &program.driver,
        &program.passenger,
        &PositionSchedule::fixed(cfg.scene()),
        None,
        cfg.sample_rate,
    )
    .unwrap();
    let spec = CellSpec {
        talkers: &talkers,
        color: &NoiseColor::White,
        input_snr_db: 5.0,
        mwf: cfg.mwf_config(&NoiseColor::White),
        noise_seed: cfg.seed,
    };
    let cell = run_cell(&cfg, &spec).unwrap();
    let mics = cabin_mwf::MultichannelSignal::new(
        vec![cell.references[0].mixture(), cell.references[1].mixture()],
        cfg.sample_rate,
    )
    .unwrap();
    let stft = StftConfig::from_frame_ms(cfg.mwf.frame_ms, cfg.sample_rate).unwrap();
    let detected = power_detector(&mics, &stft, &cfg.detector()).unwrap();
    let agree = detected.agreement(&cell.timeline, |a| {
        matches!(a, Activity::DriverOnly | Activity::PassengerOnly)
    });
    for c in [Activity::Silence, Activity::DriverOnly, Activity::PassengerOnly] {
        eprintln!("{c}: {:.3}", detected.agreement(&cell.timeline, |a| a == c));
    }
    assert!(agree >= 0.9, "agreement on speech frames {agree}");
}

#[test]
fn cli_runs_a_config_and_rejects_bad_ones() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        "experiment = \"noise\"\n[noise_reduction]\ncolors = [\"pink\"]\ninput_snr_db = [5.0]\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = Command::new(env!("CARGO_BIN_EXE_cabin-mwf"))
        .args([
            "run",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--seed",
            "3",
        ])
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let csv = std::fs::read_to_string(out.join("metrics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(std::fs::read_to_string(out.join("run_info.toml"))
        .unwrap()
        .contains("seed = 3"));

    std::fs::write(&config, "[scene]\ndriver = [2.5, 2.5, 0.75]\n").unwrap();
    let bad = Command::new(env!("CARGO_BIN_EXE_cabin-mwf"))
        .args(["run", config.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("scene.driver"));
}
