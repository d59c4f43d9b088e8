use aepg_core::problems::{read_libsvm, write_dataset, DatasetMatrix, LibsvmOptions, Provenance};
use serde::Serialize;

use crate::args::GenArgs;
use crate::failure::{CmdResult, Failure};
use crate::instance::PHASE_RETRIEVAL_SHAPE;
use crate::io::{atomic_write, sidecar_path, write_json};

#[derive(Serialize)]
struct Sidecar<'a> {
    rows: usize,
    cols: usize,
    seed: u64,
    frobenius_norm: f64,
    provenance: &'a Provenance,
}

pub fn cmd_gen(a: &GenArgs) -> CmdResult {
    for (name, v) in [("rows", a.rows), ("cols", a.cols), ("features", a.features)] {
        if v == Some(0) {
            return Err(Failure::config(format!("--{name} must be positive")));
        }
    }
    let data = match &a.libsvm {
        Some(path) => read_libsvm(
            path,
            &LibsvmOptions {
                rows: a.rows,
                cols: a.cols,
                num_features: a.features,
                seed: a.seed,
            },
        )?,
        None => DatasetMatrix::<f64>::synthetic(
            a.rows.unwrap_or(PHASE_RETRIEVAL_SHAPE.0),
            a.cols.unwrap_or(PHASE_RETRIEVAL_SHAPE.1),
            a.seed,
        )?,
    };
    let mut bytes = Vec::new();
    write_dataset(&data, &mut bytes)?;
    atomic_write(&a.output, &bytes)?;
    let sidecar = Sidecar {
        rows: data.rows(),
        cols: data.cols(),
        seed: a.seed,
        frobenius_norm: data.frobenius_norm(),
        provenance: data.provenance(),
    };
    write_json(&sidecar_path(&a.output), &sidecar)?;
    println!(
        "wrote {} ({}x{}, frobenius norm {})",
        a.output.display(),
        sidecar.rows,
        sidecar.cols,
        sidecar.frobenius_norm
    );
    Ok(())
}
