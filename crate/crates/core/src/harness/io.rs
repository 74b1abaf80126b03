//! Schema-versioned JSON persistence for models and reports, plus the CSV
//! report writer. Every document is wrapped in an envelope carrying its
//! schema tag; readers reject any tag they were not built for.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CoreError, CoreResult};
use crate::harness::experiment::RateReport;

/// Schema tag for block-sparse rectifier networks.
pub const SCHEMA_FNN: &str = "block-sparse-fnn/v1";
/// Schema tag for residual convolutional networks.
pub const SCHEMA_CNN: &str = "resnet-cnn/v1";
/// Schema tag for compilation certificates.
pub const SCHEMA_CERTIFICATE: &str = "compilation-certificate/v1";
/// Schema tag for ridge-combination specifications.
pub const SCHEMA_RIDGE: &str = "ridge-spec/v1";
/// Schema tag for regression datasets.
pub const SCHEMA_DATASET: &str = "regression-dataset/v1";
/// Schema tag for training configurations.
pub const SCHEMA_TRAIN_CONFIG: &str = "train-config/v1";
/// Schema tag for rate-sweep reports.
pub const SCHEMA_RATE_REPORT: &str = "rate-report/v1";
/// Schema tag for parameter-Lipschitz certification reports.
pub const SCHEMA_LIPSCHITZ: &str = "lipschitz-report/v1";
/// Schema tag for architecture summaries.
pub const SCHEMA_ARCH: &str = "arch-summary/v1";
/// Schema tag for complexity reports.
pub const SCHEMA_COMPLEXITY: &str = "complexity-report/v1";

#[derive(Serialize, Deserialize)]
struct Envelope {
    schema: String,
    payload: Value,
}

/// Serializes a value under the given schema tag as pretty-printed JSON.
/// Doubles render in shortest round-trip decimal form, so parameters survive
/// a round trip bit for bit.
pub fn to_json<T: Serialize>(schema: &str, value: &T) -> CoreResult<String> {
    let payload = serde_json::to_value(value)
        .map_err(|e| CoreError::Serialization(format!("encoding failed: {e}")))?;
    let envelope = Envelope { schema: schema.to_string(), payload };
    serde_json::to_string_pretty(&envelope)
        .map_err(|e| CoreError::Serialization(format!("encoding failed: {e}")))
}

/// Parses a schema-tagged document, rejecting unknown schema versions and
/// reporting the JSON path of any payload mismatch.
pub fn from_json<T: DeserializeOwned>(expected_schema: &str, text: &str) -> CoreResult<T> {
    let doc: Value = serde_json::from_str(text)
        .map_err(|e| CoreError::Serialization(format!("malformed JSON: {e}")))?;
    let Some(obj) = doc.as_object() else {
        return Err(CoreError::Serialization(
            "document root must be an object with `schema` and `payload`".into(),
        ));
    };
    let Some(schema) = obj.get("schema").and_then(Value::as_str) else {
        return Err(CoreError::Serialization(
            "missing string field `schema` at $.schema".into(),
        ));
    };
    if schema != expected_schema {
        return Err(CoreError::Serialization(format!(
            "unsupported schema version `{schema}` at $.schema; this build reads \
             `{expected_schema}`"
        )));
    }
    let Some(payload) = obj.get("payload") else {
        return Err(CoreError::Serialization("missing field `payload` at $.payload".into()));
    };
    serde_path_to_error::deserialize(payload.clone()).map_err(|e| {
        CoreError::Serialization(format!(
            "payload does not match `{expected_schema}` at $.payload.{}: {}",
            e.path(),
            e.inner()
        ))
    })
}

/// Writes a schema-tagged document to a file.
pub fn save_json<T: Serialize>(path: &Path, schema: &str, value: &T) -> CoreResult<()> {
    let text = to_json(schema, value)?;
    fs::write(path, text)
        .map_err(|e| CoreError::Io(format!("writing {}: {e}", path.display())))
}

/// Reads a schema-tagged document from a file.
pub fn load_json<T: DeserializeOwned>(path: &Path, expected_schema: &str) -> CoreResult<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| CoreError::Io(format!("reading {}: {e}", path.display())))?;
    from_json(expected_schema, &text).map_err(|e| match e {
        CoreError::Serialization(msg) => {
            CoreError::Serialization(format!("{}: {msg}", path.display()))
        }
        other => other,
    })
}

/// Renders a sweep report as CSV with the fixed column set
/// `sweep_var,seed,error,runtime_s`, one row per trial in sorted order.
#[must_use]
pub fn render_report_csv(report: &RateReport) -> String {
    let mut out = String::from("sweep_var,seed,error,runtime_s\n");
    for p in &report.points {
        out.push_str(&format!("{},{},{},{}\n", p.sweep_value, p.seed, p.error, p.runtime_s));
    }
    out
}

/// Writes the CSV rendering of a report to a file.
pub fn write_report_csv(path: &Path, report: &RateReport) -> CoreResult<()> {
    fs::write(path, render_report_csv(report))
        .map_err(|e| CoreError::Io(format!("writing {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    use crate::cnn::cnn_eval;
    use crate::compiler::compile_constant_depth;
    use crate::fnn::{fnn_eval, BlockSparseFnn};
    use crate::harness::experiment::RatePoint;
    use crate::sample::{random_fnn, random_point, FnnSpec};

    fn sample(seed: u64) -> BlockSparseFnn {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let spec = FnnSpec { d: 4, m: 3, max_depth: 2, max_width: 3, b_bs: 1.2, b_fin: 0.8 };
        random_fnn(&mut rng, &spec).unwrap()
    }

    #[test]
    fn dense_network_round_trips_bit_for_bit() {
        let f = sample(5);
        let text = to_json(SCHEMA_FNN, &f).unwrap();
        let g: BlockSparseFnn = from_json(SCHEMA_FNN, &text).unwrap();
        assert_eq!(f, g);
        let text2 = to_json(SCHEMA_FNN, &g).unwrap();
        assert_eq!(text, text2);
    }

    #[test]
    fn masked_network_round_trip_preserves_evaluation() {
        let f = sample(9);
        let (net, _) = compile_constant_depth(&f, 2, 3).unwrap();
        assert!(net.masks().is_some());
        let text = to_json(SCHEMA_CNN, &net).unwrap();
        let back: crate::cnn::ResNetCnn = from_json(SCHEMA_CNN, &text).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        for _ in 0..50 {
            let x = random_point(&mut rng, 4);
            assert_eq!(cnn_eval(&net, &x).unwrap(), cnn_eval(&back, &x).unwrap());
            let y_cnn = cnn_eval(&back, &x).unwrap();
            let y_fnn = fnn_eval(&f, &x).unwrap();
            let rel = (y_cnn - y_fnn).abs() / y_fnn.abs().max(1.0);
            assert!(rel <= 1e-9, "compiled output drifted: rel dev {rel:e}");
        }
    }

    #[test]
    fn unknown_schema_version_is_rejected_with_a_message() {
        let f = sample(2);
        let text = to_json(SCHEMA_FNN, &f).unwrap();
        let bumped = text.replace("block-sparse-fnn/v1", "block-sparse-fnn/v9");
        let err = from_json::<BlockSparseFnn>(SCHEMA_FNN, &bumped).unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("block-sparse-fnn/v9") && msg.contains("block-sparse-fnn/v1"),
            "unhelpful message: {msg}"
        );
        // A different known tag is also not accepted.
        assert!(from_json::<BlockSparseFnn>(SCHEMA_CNN, &text).is_err());
    }

    #[test]
    fn payload_mismatch_reports_the_json_path() {
        let doc = format!(
            "{{\"schema\":\"{SCHEMA_RATE_REPORT}\",\"payload\":{{\"experiment\":\"x\"}}}}"
        );
        let err = from_json::<RateReport>(SCHEMA_RATE_REPORT, &doc).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("$.payload"), "no path in: {msg}");
    }

    #[test]
    fn report_renders_fixed_csv_columns() {
        let report = RateReport::from_points(
            "toy",
            "M",
            vec![
                RatePoint { sweep_value: 4.0, seed: 1, error: 0.5, runtime_s: 0.25 },
                RatePoint { sweep_value: 2.0, seed: 0, error: 0.125, runtime_s: 0.5 },
            ],
            -1.0,
            false,
        )
        .unwrap();
        let csv = render_report_csv(&report);
        assert_eq!(csv, "sweep_var,seed,error,runtime_s\n2,0,0.125,0.5\n4,1,0.5,0.25\n");
        let text = to_json(SCHEMA_RATE_REPORT, &report).unwrap();
        let back: RateReport = from_json(SCHEMA_RATE_REPORT, &text).unwrap();
        assert_eq!(report, back);
    }

    #[test]
    fn files_round_trip_through_disk() {
        let dir = std::env::temp_dir().join("rescnn-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("model.json");
        let f = sample(21);
        save_json(&path, SCHEMA_FNN, &f).unwrap();
        let g: BlockSparseFnn = load_json(&path, SCHEMA_FNN).unwrap();
        assert_eq!(f, g);
        let missing = load_json::<BlockSparseFnn>(&dir.join("absent.json"), SCHEMA_FNN);
        assert!(missing.is_err());
        std::fs::remove_file(&path).ok();
    }
}
