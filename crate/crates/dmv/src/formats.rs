//! On-disk formats: Hamiltonians, stabilizer codes and substitute dumps.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use dmv_core::circuit::Gate;
use dmv_core::pauli::{PauliString, PauliSum};
use dmv_core::stabilizer::StabilizerCode;
use dmv_core::substitute::{self, SubstituteBlock};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// `{"n_qubits": 4, "terms": [{"pauli": "XXYY", "coeff": 0.045}, ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub n_qubits: usize,
    pub terms: Vec<TermEntry>,
    /// Exact ground energy, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_energy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermEntry {
    pub pauli: String,
    pub coeff: f64,
}

impl HamiltonianFile {
    pub fn to_pauli_sum(&self) -> CliResult<PauliSum> {
        let mut violations = Vec::new();
        let mut terms = Vec::with_capacity(self.terms.len());
        for (k, t) in self.terms.iter().enumerate() {
            match PauliString::parse(&t.pauli, self.n_qubits) {
                Ok(p) => terms.push((t.coeff, p)),
                Err(e) => violations.push(format!("term {k} ({:?}): {e}", t.pauli)),
            }
            if !t.coeff.is_finite() {
                violations.push(format!("term {k} has a non-finite coefficient"));
            }
        }
        if self.terms.is_empty() {
            violations.push("Hamiltonian has no terms".into());
        }
        if !violations.is_empty() {
            return Err(CliError::Invalid(violations));
        }
        Ok(PauliSum::new(self.n_qubits, terms)?)
    }

    pub fn from_pauli_sum(h: &PauliSum) -> Self {
        HamiltonianFile {
            name: None,
            n_qubits: h.n_qubits(),
            terms: h
                .terms()
                .iter()
                .map(|(c, p)| TermEntry {
                    pauli: p.to_string(),
                    coeff: *c,
                })
                .collect(),
            reference_energy: None,
        }
    }
}

/// A stabilizer code plus named bipartitions. A partition lists all qubits
/// in a new order; the first half becomes the row system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilizerFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub n_qubits: usize,
    pub generators: Vec<String>,
    #[serde(default)]
    pub partitions: BTreeMap<String, Vec<usize>>,
}

impl StabilizerFile {
    pub fn code(&self) -> CliResult<StabilizerCode> {
        let mut violations = Vec::new();
        let mut gens = Vec::with_capacity(self.generators.len());
        for (k, g) in self.generators.iter().enumerate() {
            match PauliString::parse(g, self.n_qubits) {
                Ok(p) => gens.push(p),
                Err(e) => violations.push(format!("generator {k} ({g:?}): {e}")),
            }
        }
        if !violations.is_empty() {
            return Err(CliError::Invalid(violations));
        }
        Ok(StabilizerCode::new(self.n_qubits, gens)?)
    }

    /// The code with qubits reordered by the named partition.
    pub fn partitioned_code(&self, partition: &str) -> CliResult<StabilizerCode> {
        let order = self.partitions.get(partition).ok_or_else(|| {
            CliError::Invalid(vec![format!(
                "unknown partition {partition:?} (available: {})",
                self.partitions.keys().cloned().collect::<Vec<_>>().join(", ")
            )])
        })?;
        let mut seen = vec![false; self.n_qubits];
        if order.len() != self.n_qubits || order.iter().any(|&q| q >= self.n_qubits || std::mem::replace(&mut seen[q], true)) {
            return Err(CliError::Invalid(vec![format!(
                "partition {partition:?} is not a permutation of 0..{}",
                self.n_qubits
            )]));
        }
        let code = self.code()?;
        let gens = code.generators.iter().map(|g| g.permuted(order)).collect();
        Ok(StabilizerCode::new(self.n_qubits, gens)?)
    }
}

pub fn parse_json<T: DeserializeOwned>(text: &str, path: &Path) -> CliResult<T> {
    serde_json::from_str(text).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_json(&text, path)
}

pub fn read_hamiltonian(path: &Path) -> CliResult<(HamiltonianFile, PauliSum)> {
    let file: HamiltonianFile = read_json(path)?;
    let h = file.to_pauli_sum()?;
    Ok((file, h))
}

/// Complex number as `[re, im]`.
pub fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionEntry {
    pub coeff: [f64; 2],
    pub pauli: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockDump {
    /// Source letters (copy-1 qubit, copy-2 qubit).
    pub pair: String,
    pub expansion: Vec<ExpansionEntry>,
    pub eigenvalues: Vec<[f64; 2]>,
    pub hermitian: bool,
    /// Gates mapping the block's eigenbasis to the computational basis,
    /// on local qubits 0 (copy 1) and 1 (copy 2).
    pub rotation: Vec<Gate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermDump {
    pub pauli: String,
    pub coeff: f64,
    /// Block `j` pairs qubit `j` with qubit `n + j`.
    pub blocks: Vec<String>,
}

/// Substitute Hamiltonian: per-term block labels plus one entry per
/// distinct block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformDump {
    pub n: usize,
    pub terms: Vec<TermDump>,
    pub blocks: Vec<BlockDump>,
}

pub fn dump_block(b: &SubstituteBlock) -> CliResult<BlockDump> {
    Ok(BlockDump {
        pair: format!("{}{}", b.source[0].to_char(), b.source[1].to_char()),
        expansion: b
            .pauli_expansion()
            .into_iter()
            .map(|(c, p)| ExpansionEntry {
                coeff: pair(c),
                pauli: p.to_string(),
            })
            .collect(),
        eigenvalues: b.eigenvalues.iter().map(|z| pair(*z)).collect(),
        hermitian: b.is_hermitian(),
        rotation: substitute::rotation_circuit(b)?,
    })
}

pub fn transform_dump(h: &PauliSum) -> CliResult<TransformDump> {
    let hb = substitute::transform_hamiltonian(h)?;
    let mut blocks: Vec<BlockDump> = Vec::new();
    let mut terms = Vec::with_capacity(hb.terms().len());
    for ((g, p), (_, op)) in h.terms().iter().zip(hb.terms()) {
        let mut labels = Vec::with_capacity(op.blocks.len());
        for b in &op.blocks {
            let label = format!("{}{}", b.source[0].to_char(), b.source[1].to_char());
            if !blocks.iter().any(|d| d.pair == label) {
                blocks.push(dump_block(b)?);
            }
            labels.push(label);
        }
        terms.push(TermDump {
            pauli: p.to_string(),
            coeff: *g,
            blocks: labels,
        });
    }
    blocks.sort_by(|a, b| a.pair.cmp(&b.pair));
    Ok(TransformDump {
        n: hb.n(),
        terms,
        blocks,
    })
}
