//! Binary operator cache and modal dumps.
//!
//! Both formats are a single line of JSON (the header, terminated by `\n`)
//! followed by little-endian `f64` arrays, each row-major, in the order the
//! header lists them.
//!
//! Operator files (`<key>.spfops`) hold `M`, `S`, `R` (3×N), `T` (N×N×N,
//! index `(i, j, k)`), `C1`, `C2`, `C3` and `J` (3×3). The key is the SHA-256
//! of the cavity, basis truncation and inertia; loading re-runs every operator
//! invariant check.
//!
//! Modal dumps hold one row `[t, c_1 … c_N, a1, a2, a3]` per sample.

use crate::error::{CliError, Context};
use nalgebra::{DMatrix, Matrix3};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use spinfluid_core::dynamics::Trajectory;
use spinfluid_core::{AssembledOperators, CavitySpec, InertiaSpec};
use std::path::{Path, PathBuf};

pub const OPERATOR_FORMAT: &str = "spinfluid-operators";
pub const MODAL_FORMAT: &str = "spinfluid-modal";
pub const FORMAT_VERSION: u32 = 1;
pub const EXTENSION: &str = "spfops";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArraySpec {
    pub name: String,
    pub shape: Vec<usize>,
}

impl ArraySpec {
    fn len(&self) -> usize {
        self.shape.iter().product()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorHeader {
    pub format: String,
    pub version: u32,
    pub key: String,
    pub n: usize,
    pub radius: f64,
    pub l_max: usize,
    pub n_max: usize,
    pub arrays: Vec<ArraySpec>,
}

/// Content hash identifying an operator set.
pub fn operator_key(cavity: &CavitySpec, l_max: usize, n_max: usize, inertia: &InertiaSpec) -> String {
    let text = format!(
        "{OPERATOR_FORMAT}/{FORMAT_VERSION};radius={:?};viscosity={:?};l_max={l_max};n_max={n_max};inertia={:?}",
        cavity.radius(),
        cavity.viscosity(),
        inertia.moments()
    );
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn operator_path(dir: &Path, key: &str) -> PathBuf {
    dir.join(format!("{key}.{EXTENSION}"))
}

fn push_matrix(out: &mut Vec<u8>, m: &DMatrix<f64>) {
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            out.extend_from_slice(&m[(r, c)].to_le_bytes());
        }
    }
}

fn framed(header_json: String, payload: Vec<u8>) -> Vec<u8> {
    let mut bytes = header_json.into_bytes();
    bytes.push(b'\n');
    bytes.extend(payload);
    bytes
}

pub fn encode_operators(
    ops: &AssembledOperators,
    key: &str,
    radius: f64,
    l_max: usize,
    n_max: usize,
) -> Vec<u8> {
    let n = ops.len();
    let spec = |name: &str, shape: &[usize]| ArraySpec {
        name: name.into(),
        shape: shape.to_vec(),
    };
    let header = OperatorHeader {
        format: OPERATOR_FORMAT.into(),
        version: FORMAT_VERSION,
        key: key.into(),
        n,
        radius,
        l_max,
        n_max,
        arrays: vec![
            spec("M", &[n, n]),
            spec("S", &[n, n]),
            spec("R", &[3, n]),
            spec("T", &[n, n, n]),
            spec("C1", &[n, n]),
            spec("C2", &[n, n]),
            spec("C3", &[n, n]),
            spec("J", &[3, 3]),
        ],
    };
    let mut payload = Vec::with_capacity(8 * (n * n * n + 6 * n * n + 3 * n + 9));
    push_matrix(&mut payload, ops.mass());
    push_matrix(&mut payload, ops.stiffness());
    push_matrix(&mut payload, ops.coupling());
    for v in ops.convection() {
        payload.extend_from_slice(&v.to_le_bytes());
    }
    for c in ops.coriolis() {
        push_matrix(&mut payload, c);
    }
    let j = ops.fluid_inertia();
    push_matrix(&mut payload, &DMatrix::from_fn(3, 3, |r, c| j[(r, c)]));
    framed(serde_json::to_string(&header).expect("header serialises"), payload)
}

fn split_header(bytes: &[u8]) -> Result<(&[u8], &[u8]), String> {
    let end = bytes
        .iter()
        .position(|b| *b == b'\n')
        .ok_or("missing header line")?;
    Ok((&bytes[..end], &bytes[end + 1..]))
}

fn read_f64s(payload: &[u8], count: usize, offset: &mut usize) -> Result<Vec<f64>, String> {
    let end = *offset + 8 * count;
    if end > payload.len() {
        return Err("payload shorter than the header announces".into());
    }
    let values = payload[*offset..end]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    *offset = end;
    Ok(values)
}

pub fn decode_operators(bytes: &[u8]) -> Result<(OperatorHeader, AssembledOperators), CliError> {
    let corrupt = |msg: String| CliError::Config(format!("operator cache: {msg}"));
    let (head, payload) = split_header(bytes).map_err(corrupt)?;
    let header: OperatorHeader =
        serde_json::from_slice(head).map_err(|e| corrupt(format!("bad header: {e}")))?;
    if header.format != OPERATOR_FORMAT || header.version != FORMAT_VERSION {
        return Err(corrupt(format!(
            "unsupported format {} v{}",
            header.format, header.version
        )));
    }
    let n = header.n;
    let expected = ["M", "S", "R", "T", "C1", "C2", "C3", "J"];
    let shapes: [Vec<usize>; 8] = [
        vec![n, n],
        vec![n, n],
        vec![3, n],
        vec![n, n, n],
        vec![n, n],
        vec![n, n],
        vec![n, n],
        vec![3, 3],
    ];
    if header.arrays.len() != expected.len()
        || header
            .arrays
            .iter()
            .zip(expected.iter().zip(&shapes))
            .any(|(a, (name, shape))| a.name != *name || &a.shape != shape)
    {
        return Err(corrupt("unexpected array layout".into()));
    }
    let mut offset = 0;
    let mut arrays = Vec::with_capacity(8);
    for spec in &header.arrays {
        arrays.push(read_f64s(payload, spec.len(), &mut offset).map_err(corrupt)?);
    }
    if offset != payload.len() {
        return Err(corrupt("trailing bytes after the last array".into()));
    }
    let matrix = |data: &[f64], rows: usize, cols: usize| DMatrix::from_row_slice(rows, cols, data);
    let j = Matrix3::from_row_slice(&arrays[7]);
    let ops = AssembledOperators::from_parts(
        matrix(&arrays[0], n, n),
        matrix(&arrays[1], n, n),
        matrix(&arrays[2], 3, n),
        arrays[3].clone(),
        [
            matrix(&arrays[4], n, n),
            matrix(&arrays[5], n, n),
            matrix(&arrays[6], n, n),
        ],
        j,
        true,
    )
    .context("operator cache")?;
    Ok((header, ops))
}

pub fn load_operators(path: &Path, key: &str) -> Result<Option<AssembledOperators>, CliError> {
    let bytes = match std::fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(CliError::io(path, e)),
    };
    let (header, ops) = decode_operators(&bytes)?;
    if header.key != key {
        return Err(CliError::Config(format!(
            "operator cache {} holds key {}, expected {key}",
            path.display(),
            header.key
        )));
    }
    Ok(Some(ops))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModalHeader {
    pub format: String,
    pub version: u32,
    pub n: usize,
    pub samples: usize,
    /// Row layout.
    pub row: String,
    pub scenario_hash: String,
}

pub fn encode_modal(traj: &Trajectory, scenario_hash: &str) -> Vec<u8> {
    let n = traj.samples.first().map(|s| s.state.c.len()).unwrap_or(0);
    let header = ModalHeader {
        format: MODAL_FORMAT.into(),
        version: FORMAT_VERSION,
        n,
        samples: traj.samples.len(),
        row: "t, c[0..n], a1, a2, a3".into(),
        scenario_hash: scenario_hash.into(),
    };
    let mut payload = Vec::with_capacity(8 * traj.samples.len() * (n + 4));
    for s in &traj.samples {
        payload.extend_from_slice(&s.t.to_le_bytes());
        for v in s.state.c.iter() {
            payload.extend_from_slice(&v.to_le_bytes());
        }
        for v in s.state.a {
            payload.extend_from_slice(&v.to_le_bytes());
        }
    }
    framed(serde_json::to_string(&header).expect("header serialises"), payload)
}

/// Rows `[t, c…, a1, a2, a3]` of a modal dump.
pub fn decode_modal(bytes: &[u8]) -> Result<(ModalHeader, Vec<Vec<f64>>), CliError> {
    let corrupt = |msg: String| CliError::Config(format!("modal dump: {msg}"));
    let (head, payload) = split_header(bytes).map_err(corrupt)?;
    let header: ModalHeader =
        serde_json::from_slice(head).map_err(|e| corrupt(format!("bad header: {e}")))?;
    if header.format != MODAL_FORMAT {
        return Err(corrupt(format!("unsupported format {}", header.format)));
    }
    let width = header.n + 4;
    let mut offset = 0;
    let mut rows = Vec::with_capacity(header.samples);
    for _ in 0..header.samples {
        rows.push(read_f64s(payload, width, &mut offset).map_err(corrupt)?);
    }
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use spinfluid_core::GalerkinBasis;

    #[test]
    fn operators_round_trip_bit_exact() {
        let cavity = CavitySpec::new(1.0, 0.1).unwrap();
        let basis = GalerkinBasis::build(cavity, 1, 1).unwrap();
        let ops = AssembledOperators::assemble(&basis).unwrap();
        let inertia = InertiaSpec::from_shell_excess(&cavity, [0.1, 0.2, 0.3]).unwrap();
        let key = operator_key(&cavity, 1, 1, &inertia);
        let bytes = encode_operators(&ops, &key, 1.0, 1, 1);
        let (header, back) = decode_operators(&bytes).unwrap();
        assert_eq!(header.key, key);
        assert_eq!(back.mass(), ops.mass());
        assert_eq!(back.convection(), ops.convection());
        assert_eq!(back.coriolis(), ops.coriolis());
        assert_eq!(back.fluid_inertia(), ops.fluid_inertia());
    }

    #[test]
    fn corrupted_payload_is_rejected() {
        let cavity = CavitySpec::new(1.0, 0.1).unwrap();
        let basis = GalerkinBasis::build(cavity, 1, 0).unwrap();
        let ops = AssembledOperators::assemble(&basis).unwrap();
        let mut bytes = encode_operators(&ops, "k", 1.0, 1, 0);
        bytes.truncate(bytes.len() - 8);
        assert!(decode_operators(&bytes).is_err());

        // break the skew symmetry of C1: the invariant check names it
        let mut bytes = encode_operators(&ops, "k", 1.0, 1, 0);
        let n = ops.len();
        let head = bytes.iter().position(|b| *b == b'\n').unwrap() + 1;
        let c1 = head + 8 * (2 * n * n + 3 * n + n * n * n);
        let entry = c1 + 8; // C1[0, 1]
        let v = f64::from_le_bytes(bytes[entry..entry + 8].try_into().unwrap()) + 1.0;
        bytes[entry..entry + 8].copy_from_slice(&v.to_le_bytes());
        let err = decode_operators(&bytes).unwrap_err();
        assert!(err.to_string().contains("C1"), "{err}");
    }

    #[test]
    fn keys_depend_on_every_input() {
        let cavity = CavitySpec::new(1.0, 0.1).unwrap();
        let inertia = InertiaSpec::from_shell_excess(&cavity, [0.1, 0.2, 0.3]).unwrap();
        let k = operator_key(&cavity, 2, 1, &inertia);
        assert_ne!(k, operator_key(&cavity, 2, 2, &inertia));
        assert_ne!(k, operator_key(&cavity.with_viscosity(0.2).unwrap(), 2, 1, &inertia));
        let other = InertiaSpec::from_shell_excess(&cavity, [0.1, 0.2, 0.4]).unwrap();
        assert_ne!(k, operator_key(&cavity, 2, 1, &other));
    }
}
