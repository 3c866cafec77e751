//! End-to-end workflow tests against the command layer: determinism and
//! schema round-trips of the results document, synthetic-data recovery for
//! the fit and calibration pipelines, and unit discipline at the CLI
//! boundary.

use icta::constants::{angular_from_mhz, mhz_from_angular};
use icta::{amplitude_gain, planck_occupancy, DeviceParams};
use icta_cli::commands::{
    cmd_calibrate, cmd_fit_linewidth, cmd_predict, cmd_sweep, CalibrateInputs,
};
use icta_cli::config::{
    parse_freq_grid, parse_xi_grid, resolve_device, resolve_distribution, DeviceEcho, DistEcho,
};
use icta_cli::results::ResultsDocument;
use icta_cli::CliError;
use std::io::Write;
use std::path::{Path, PathBuf};

fn sample_a() -> (DeviceParams, DeviceEcho) {
    resolve_device("sample_A").unwrap()
}

fn dist(spec: &[&str]) -> DistEcho {
    resolve_distribution(&spec.iter().map(|s| s.to_string()).collect::<Vec<_>>()).unwrap()
}

fn values(doc: &ResultsDocument, table: &str, column: &str) -> Vec<f64> {
    doc.column(table, column)
        .unwrap_or_else(|| panic!("no column {table}.{column}"))
        .iter()
        .map(|v| v.expect("dense column"))
        .collect()
}

fn normalize_timestamp(doc: &ResultsDocument) -> ResultsDocument {
    let mut d = doc.clone();
    d.provenance.timestamp = "normalized".into();
    d
}

#[test]
fn predict_documents_are_reproducible() {
    let (params, echo) = sample_a();
    let d = dist(&["lorentzian:5.6"]);
    let xi = parse_xi_grid("0.7:0.9:3").unwrap();
    let a = cmd_predict(&params, &echo, &d, &xi, 20_000, 7).unwrap();
    let b = cmd_predict(&params, &echo, &d, &xi, 20_000, 7).unwrap();
    assert_eq!(
        normalize_timestamp(&a).to_json_string(),
        normalize_timestamp(&b).to_json_string()
    );
}

#[test]
fn documents_round_trip_through_disk() {
    let (params, echo) = sample_a();
    let d = dist(&[
        "lorentzian:28.5,0,0.5",
        "lorentzian:45.8,48,0.25",
        "lorentzian:45.8,-48,0.25",
    ]);
    let xi = parse_xi_grid("0.6:0.8:2").unwrap();
    let doc = cmd_predict(&params, &echo, &d, &xi, 0, 1).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("out.json");
    doc.write_json(&path).unwrap();
    let back = ResultsDocument::read_json(&path).unwrap();
    back.validate().unwrap();
    assert_eq!(doc, back);
    // csv companions are written per table
    let written = doc.write_csv_tables(&path).unwrap();
    assert_eq!(written.len(), doc.tables.len());
    for p in written {
        assert!(p.exists());
    }
}

#[test]
fn predict_zero_width_distribution_is_quantum_limited() {
    let (params, echo) = sample_a();
    let d = dist(&["lorentzian:1e-10"]);
    let xi = parse_xi_grid("0.6:0.9:4").unwrap();
    let doc = cmd_predict(&params, &echo, &d, &xi, 0, 1).unwrap();
    for r in values(&doc, "tradeoff", "noise_ratio") {
        assert!((r - 1.0).abs() < 1e-5, "noise ratio {r}");
    }
    // the reference table is the analytic zero-noise curve: R = 1 and the
    // tradeoff gain approaches it
    let gain = values(&doc, "tradeoff", "gain_db");
    let ref_gain = values(&doc, "reference", "gain_db");
    for (g, gr) in gain.iter().zip(&ref_gain) {
        assert!((g - gr).abs() < 1e-3, "{g} vs {gr}");
    }
}

#[test]
fn predict_noise_ratio_at_20_db_with_thermal_linewidth() {
    let (params, echo) = sample_a();
    let d = dist(&["lorentzian:5.6"]);
    let xi = parse_xi_grid("0.88:0.94:7").unwrap();
    let doc = cmd_predict(&params, &echo, &d, &xi, 0, 1).unwrap();
    let gain = values(&doc, "tradeoff", "gain_db");
    let ratio = values(&doc, "tradeoff", "noise_ratio");
    // interpolate the table at 20 dB; the grid brackets it
    assert!(gain.first().unwrap() < &20.0 && gain.last().unwrap() > &20.0);
    let i = gain.iter().position(|&g| g > 20.0).unwrap();
    let t = (20.0 - gain[i - 1]) / (gain[i] - gain[i - 1]);
    let r20 = ratio[i - 1] + t * (ratio[i] - ratio[i - 1]);
    assert!(r20 <= 1.7, "noise ratio {r20} at 20 dB");
}

#[test]
fn predict_bandwidth_gain_product_on_cli_output() {
    let (params, echo) = sample_a();
    let d = dist(&["lorentzian:1e-10"]);
    // g0 = 10, 20, 45, 100
    let xis: Vec<f64> = [10.0f64, 20.0, 45.0, 100.0]
        .iter()
        .map(|g0| ((g0 - 1.0) / (g0 + 1.0)).sqrt())
        .collect();
    let doc = cmd_predict(&params, &echo, &d, &xis, 0, 1).unwrap();
    let gain_db = values(&doc, "tradeoff", "gain_db");
    let bw = values(&doc, "tradeoff", "bandwidth_mhz");
    let products: Vec<f64> = gain_db
        .iter()
        .zip(&bw)
        .map(|(g, b)| 10f64.powf(g / 20.0) * b)
        .collect();
    let mean = products.iter().sum::<f64>() / products.len() as f64;
    for p in &products {
        assert!((p - mean).abs() / mean < 0.05, "product {p} vs mean {mean}");
    }
}

#[test]
fn sweep_zero_width_traces_the_instantaneous_gain() {
    let (params, echo) = sample_a();
    let d = dist(&["lorentzian:1e-10"]);
    let freqs = parse_freq_grid("4780:4820:41").unwrap();
    let doc = cmd_sweep(&params, &echo, &d, &[0.6], &freqs).unwrap();
    let freq_mhz = values(&doc, "map", "freq_mhz");
    let gain_db = values(&doc, "map", "gain_db");
    for (f, g) in freq_mhz.iter().zip(&gain_db) {
        let det = params.detunings(angular_from_mhz(*f), params.optimal_bias());
        let ideal = amplitude_gain(det, 0.6, &params).unwrap().norm_sqr();
        let got = 10f64.powf(g / 10.0);
        assert!(
            (got - ideal).abs() / ideal < 1e-9,
            "at {f} MHz: {got} vs {ideal}"
        );
    }
}

#[test]
fn sweep_rejects_empty_and_invalid_grids() {
    assert!(parse_xi_grid("0.5:1.0:3").is_err()); // contains 1.0
    assert!(parse_xi_grid("0.5:0.9:0").is_err());
    assert!(parse_freq_grid("10:5:3").is_err());
    assert!(parse_freq_grid("abc").is_err());
    // single-point grids are allowed when degenerate
    assert_eq!(parse_xi_grid("0.5:0.5:1").unwrap(), vec![0.5]);
}

#[test]
fn freq_grid_units_round_trip() {
    let grid = parse_freq_grid("4000:5000:11").unwrap();
    for (i, w) in grid.iter().enumerate() {
        let mhz = 4000.0 + 100.0 * i as f64;
        assert!((mhz_from_angular(*w) - mhz).abs() <= 1e-12 * mhz);
    }
}

fn write_linewidth_csv(path: &Path, fwhm_mhz: f64, center_mhz: f64) {
    let mut f = std::fs::File::create(path).unwrap();
    writeln!(f, "# synthetic emission scan").unwrap();
    writeln!(f, "wj_mhz,psd").unwrap();
    let gamma = fwhm_mhz / 2.0;
    for i in 0..241 {
        let x = center_mhz - 30.0 + 60.0 * i as f64 / 240.0;
        let u = x - center_mhz;
        let y = 0.05 + 1.0 * gamma * gamma / (u * u + gamma * gamma);
        writeln!(f, "{x},{y}").unwrap();
    }
}

#[test]
fn fit_linewidth_recovers_width_and_temperature() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("scan.csv");
    write_linewidth_csv(&csv, 5.6, 4772.0);
    let doc = cmd_fit_linewidth(&csv, 1, Some(5.0), false).unwrap();
    let fwhm = values(&doc, "components", "fwhm_mhz")[0];
    assert!((fwhm - 5.6).abs() / 5.6 < 1e-3, "fwhm {fwhm}");
    let t_mk = values(&doc, "components", "effective_temperature_mk")[0];
    assert!((t_mk - 27.6).abs() / 27.6 < 0.005, "T {t_mk} mK");
    // the distribution echo is ready for --dist reuse
    let dist = doc.distribution.as_ref().unwrap();
    assert_eq!(dist.components.len(), 1);
    assert!((dist.components[0].fwhm_mhz - 5.6).abs() < 0.01);
    // provenance carries the input digest
    assert_eq!(doc.provenance.inputs.len(), 1);
    assert!(doc
        .provenance
        .inputs
        .values()
        .next()
        .unwrap()
        .starts_with("sha256:"));
}

#[test]
fn fit_linewidth_component_count_error() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("scan.csv");
    write_linewidth_csv(&csv, 5.6, 4772.0);
    let err = cmd_fit_linewidth(&csv, 3, None, false).unwrap_err();
    assert_eq!(err.exit_code(), 2, "{err}");
}

#[test]
fn fit_linewidth_missing_column_is_a_parse_error() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("scan.csv");
    let mut f = std::fs::File::create(&csv).unwrap();
    writeln!(f, "wj_mhz,power").unwrap();
    for i in 0..16 {
        writeln!(f, "{},{}", 4000 + i, 1.0).unwrap();
    }
    drop(f);
    let err = cmd_fit_linewidth(&csv, 1, None, false).unwrap_err();
    assert_eq!(err.exit_code(), 4);
    assert!(err.to_string().contains("psd"), "{err}");
}

/// Synthetic measurement generator for the calibration pipeline: a device
/// with a Lorentzian gain profile and exactly quantum-limited output noise,
/// read out through a rippled chain with known attenuation.
struct SyntheticRig {
    dir: tempfile::TempDir,
    freq_mhz: Vec<f64>,
    device_power_gain: Vec<f64>,
    files: std::collections::BTreeMap<&'static str, PathBuf>,
}

impl SyntheticRig {
    fn build(t_hot_k: f64, t_cold_k: f64) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let n = 241;
        let freq_mhz: Vec<f64> = (0..n)
            .map(|i| 4000.0 + 8000.0 * i as f64 / (n - 1) as f64)
            .collect();
        let chain_gain: Vec<f64> = (0..n)
            .map(|i| 2.5e7 * (1.0 + 0.25 * (i as f64 * 0.11).sin()))
            .collect();
        let n_sys: Vec<f64> = (0..n)
            .map(|i| 9.0 + 1.5 * (i as f64 * 0.07).cos())
            .collect();
        let attenuation = 0.795f64.sqrt(); // one-way power factor
        let device_power_gain: Vec<f64> = freq_mhz
            .iter()
            .map(|&f| {
                let d = (f - 4800.0) / 80.0;
                1.0 + 99.0 / (1.0 + d * d)
            })
            .collect();

        let write = |name: &str, rows: &[f64]| -> PathBuf {
            let path = dir.path().join(name);
            let mut f = std::fs::File::create(&path).unwrap();
            writeln!(f, "freq_mhz,value").unwrap();
            for (x, y) in freq_mhz.iter().zip(rows) {
                writeln!(f, "{x},{y}").unwrap();
            }
            path
        };

        let occ = |t: f64, f_mhz: f64| planck_occupancy(t, angular_from_mhz(f_mhz)).unwrap();
        let hot: Vec<f64> = (0..n)
            .map(|i| chain_gain[i] * (occ(t_hot_k, freq_mhz[i]) + n_sys[i]))
            .collect();
        let cold: Vec<f64> = (0..n)
            .map(|i| chain_gain[i] * (occ(t_cold_k, freq_mhz[i]) + n_sys[i]))
            .collect();
        let probe = 0.003;
        let short: Vec<f64> = (0..n).map(|i| probe * chain_gain[i]).collect();
        let gain_off: Vec<f64> = (0..n)
            .map(|i| probe * chain_gain[i] * attenuation * attenuation)
            .collect();
        let gain_on: Vec<f64> = (0..n).map(|i| gain_off[i] * device_power_gain[i]).collect();
        let noise_sc: Vec<f64> = (0..n).map(|i| chain_gain[i] * (0.5 + n_sys[i])).collect();
        let noise_on: Vec<f64> = (0..n)
            .map(|i| noise_sc[i] + chain_gain[i] * attenuation * (device_power_gain[i] - 1.0))
            .collect();

        let mut files = std::collections::BTreeMap::new();
        files.insert("hot", write("hot.csv", &hot));
        files.insert("cold", write("cold.csv", &cold));
        files.insert("short", write("short.csv", &short));
        files.insert("gain_off", write("gain_off.csv", &gain_off));
        files.insert("gain_on", write("gain_on.csv", &gain_on));
        files.insert("noise_sc", write("noise_sc.csv", &noise_sc));
        files.insert("noise_on", write("noise_on.csv", &noise_on));
        Self {
            dir,
            freq_mhz,
            device_power_gain,
            files,
        }
    }

    fn inputs(&self, t_hot_mk: f64, t_cold_mk: f64) -> CalibrateInputs<'_> {
        CalibrateInputs {
            hot: &self.files["hot"],
            cold: &self.files["cold"],
            short: &self.files["short"],
            gain_on: &self.files["gain_on"],
            gain_off: &self.files["gain_off"],
            noise_on: &self.files["noise_on"],
            noise_sc: &self.files["noise_sc"],
            t_hot_mk,
            t_cold_mk,
            max_ripple_db: 0.2,
        }
    }
}

#[test]
fn calibrate_recovers_the_injected_device() {
    let rig = SyntheticRig::build(1.0, 0.012);
    let doc = cmd_calibrate(&rig.inputs(1000.0, 12.0)).unwrap();

    let att_db = values(&doc, "attenuation", "db_loss")[0];
    assert!((att_db - 0.498).abs() < 1e-3, "attenuation {att_db} dB");
    assert_eq!(values(&doc, "attenuation", "flat")[0], 1.0);

    let gain_db = values(&doc, "device", "gain_db");
    for (g, truth) in gain_db.iter().zip(&rig.device_power_gain) {
        assert!(
            (10f64.powf(g / 10.0) - truth).abs() / truth < 1e-6,
            "gain {g} dB vs {truth}"
        );
    }
    // quantum-limited input: noise ratio 1 wherever gain is well above unity
    let ratios = doc.column("device", "noise_ratio").unwrap();
    let mut checked = 0;
    for (i, r) in ratios.iter().enumerate() {
        if rig.device_power_gain[i] > 1.5 {
            let r = r.expect("defined ratio");
            assert!((r - 1.0).abs() < 1e-6, "R = {r} at {} MHz", rig.freq_mhz[i]);
            checked += 1;
        }
    }
    assert!(checked > 50);
}

#[test]
fn calibrate_rejects_swapped_loads_and_mismatched_grids() {
    let rig = SyntheticRig::build(1.0, 0.012);
    // swapped temperatures make the y-factor model inconsistent
    let err = cmd_calibrate(&rig.inputs(12.0, 1000.0)).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("y-factor"), "{err}");

    // truncate one file onto a different grid
    let path = rig.dir.path().join("cold.csv");
    let text = std::fs::read_to_string(&path).unwrap();
    let shorter: Vec<&str> = text.lines().take(100).collect();
    std::fs::write(&path, shorter.join("\n")).unwrap();
    let err = cmd_calibrate(&rig.inputs(1000.0, 12.0)).unwrap_err();
    assert!(
        matches!(
            err,
            CliError::Stage {
                source: icta::Error::GridMismatch(_),
                ..
            }
        ),
        "{err}"
    );
}

#[test]
fn device_file_resolution() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("device.json");
    std::fs::write(
        &path,
        r#"{
            "omega_s_mhz": 4800.0, "omega_i_mhz": 6200.0,
            "kappa_s_mhz": 96.0, "kappa_i_mhz": 226.0,
            "z_s_ohm": 400.0, "z_i_ohm": 400.0,
            "ej_over_h_mhz": 380.0
        }"#,
    )
    .unwrap();
    let (params, echo) = resolve_device(path.to_str().unwrap()).unwrap();
    assert!(echo.preset.is_none());
    assert!((params.coupling_xi() - 0.5).abs() < 0.01);
    assert!(resolve_device("no_such_preset").is_err());
}

#[test]
fn distribution_resolution_modes() {
    // mixing a file and analytic specs is rejected
    let err = resolve_distribution(&["lorentzian:5.6".into(), "file.json".into()]).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    // weights renormalize
    let d = dist(&[
        "lorentzian:28.5,0,2",
        "lorentzian:45.8,48,1",
        "lorentzian:45.8,-48,1",
    ]);
    let total: f64 = d.components.iter().map(|c| c.weight).sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert!((d.components[0].weight - 0.5).abs() < 1e-12);
    // malformed spec
    assert!(resolve_distribution(&["lorentzian:".into()]).is_err());
    assert!(resolve_distribution(&["lorentzian:-3".into()]).is_err());
}

#[test]
fn fit_document_feeds_predict_via_dist_file() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("scan.csv");
    write_linewidth_csv(&csv, 5.6, 4772.0);
    let fit_doc = cmd_fit_linewidth(&csv, 1, None, false).unwrap();
    let doc_path = tmp.path().join("fit.json");
    fit_doc.write_json(&doc_path).unwrap();

    let d = resolve_distribution(&[doc_path.to_str().unwrap().to_string()]).unwrap();
    assert_eq!(d.components.len(), 1);
    assert!((d.components[0].fwhm_mhz - 5.6).abs() < 0.01);

    let (params, echo) = sample_a();
    let doc = cmd_predict(&params, &echo, &d, &[0.8], 0, 1).unwrap();
    assert_eq!(values(&doc, "tradeoff", "xi"), vec![0.8]);
}
