//! Command-line front end: the versioned problem-file format, the report
//! format, and one `cmd_*` function per subcommand.
//!
//! Problem files are JSON. Complex entries are `[re, im]` pairs and matrices
//! are lists of rows. Operator forms of bipartite states are `b×a`, so that
//! the state is `(I ⊗ B)|Φ⟩` with `|Φ⟩` maximally entangled on `C^a ⊗ C^a`.
//!
//! Exit codes: 0 distinguishable (or check passed), 1 not distinguishable
//! (or check failed), 2 inconclusive, 3 bad input, 4 rejected witness,
//! 5 numerical failure.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bipartite::{BipartiteState, StateSet};
use crate::channels::{self, KrausChannel};
use crate::error::Error as CoreError;
use crate::linalg::{self, ComplexMatrix, ComplexVector, Tolerance, C64};
use crate::locc::{self, Protocol, Status, Witness};
use crate::opalg::{self, AlgebraStructure};
use crate::qec::{self, CodeSpace};
use crate::stabilizer;

pub const SCHEMA_VERSION: &str = "1";
pub const TOOL_NAME: &str = "locc-qec";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
/// Environment variables consulted when `--tol-abs` / `--tol-rel` are absent.
pub const TOL_ABS_ENV: &str = "LOCC_QEC_TOL_ABS";
pub const TOL_REL_ENV: &str = "LOCC_QEC_TOL_REL";

pub const EXIT_POSITIVE: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_REJECTED: i32 = 4;
pub const EXIT_NUMERICAL: i32 = 5;

/// Random pure code states checked by `teleport-verify` on top of the
/// matrix units.
const RECOVERY_TRIALS: usize = 8;

pub type Entry = [f64; 2];
pub type VectorData = Vec<Entry>;
pub type MatrixData = Vec<Vec<Entry>>;

// ---------------------------------------------------------------- errors

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{context}: {source}")]
    Numerical {
        context: String,
        #[source]
        source: CoreError,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical { .. } => EXIT_NUMERICAL,
            _ => EXIT_INPUT,
        }
    }

    fn numerical(context: impl Into<String>) -> impl FnOnce(CoreError) -> CliError {
        let context = context.into();
        move |source| match source {
            CoreError::DimensionMismatch(msg) => CliError::DimensionMismatch(format!("{context}: {msg}")),
            source => CliError::Numerical { context, source },
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

// ---------------------------------------------------------- problem files

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    StateSet,
    CodeSpace,
    StabilizerParams,
    ChannelCheck,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_abs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_rel: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ProblemOptions {
    fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

/// Input to every subcommand except `stabilizer` (which may also take flags).
///
/// Which fields are read depends on `kind`:
/// `state_set` uses `dims`, `states` and optionally `complement_of`;
/// `code_space` uses `code` and `noise`;
/// `channel_check` uses `dims`, `states` and `alice_basis`;
/// `stabilizer_params` uses `n` and `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub schema_version: String,
    pub kind: ProblemKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<(usize, usize)>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub matrices: BTreeMap<String, MatrixData>,
    /// Names of `b×a` operator forms.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub states: Vec<String>,
    /// Name of one `b×a` operator form whose orthogonal complement is studied.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complement_of: Option<String>,
    /// Name of an `a×a` matrix whose columns are the vectors Alice projects onto.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alice_basis: Option<String>,
    /// Names of matrices whose columns together span the code.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub code: Vec<String>,
    /// Names of the Kraus operators of the noise channel.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub noise: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "ProblemOptions::is_empty")]
    pub options: ProblemOptions,
}

impl ProblemFile {
    fn empty(kind: ProblemKind) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            kind,
            dims: None,
            matrices: BTreeMap::new(),
            states: Vec::new(),
            complement_of: None,
            alice_basis: None,
            code: Vec::new(),
            noise: Vec::new(),
            n: None,
            k: None,
            options: ProblemOptions::default(),
        }
    }

    fn insert(&mut self, name: String, m: &ComplexMatrix) -> String {
        self.matrices.insert(name.clone(), matrix_data(m));
        name
    }

    /// State-set problem from `b×a` operator forms, named `B0`, `B1`, ….
    pub fn state_set(ops: &[ComplexMatrix]) -> Self {
        let mut p = Self::empty(ProblemKind::StateSet);
        if let Some(op) = ops.first() {
            p.dims = Some((op.ncols(), op.nrows()));
        }
        p.states = ops.iter().enumerate().map(|(i, op)| p.insert(format!("B{i}"), op)).collect();
        p
    }

    /// Recovery check: the states plus Alice's basis, stored as the columns of `A`.
    pub fn channel_check(ops: &[ComplexMatrix], alice_basis: &[ComplexVector]) -> Self {
        let mut p = Self::state_set(ops);
        p.kind = ProblemKind::ChannelCheck;
        p.alice_basis = Some(p.insert("A".into(), &linalg::columns_matrix(alice_basis)));
        p
    }

    /// Code spanned by `code` (one vector per matrix `c0`, `c1`, …) under the
    /// Kraus operators `noise` (`E0`, `E1`, …).
    pub fn code_space(code: &[ComplexVector], noise: &[ComplexMatrix]) -> Self {
        let mut p = Self::empty(ProblemKind::CodeSpace);
        p.code = code
            .iter()
            .enumerate()
            .map(|(i, v)| p.insert(format!("c{i}"), &ComplexMatrix::from_column_slice(v.len(), 1, v.as_slice())))
            .collect();
        p.noise = noise.iter().enumerate().map(|(i, e)| p.insert(format!("E{i}"), e)).collect();
        p
    }

    pub fn stabilizer_params(n: usize, k: usize) -> Self {
        let mut p = Self::empty(ProblemKind::StabilizerParams);
        p.n = Some(n);
        p.k = Some(k);
        p
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let p: Self = serde_json::from_str(text)
            .map_err(|e| CliError::Parse(format!("problem file line {} column {}: {e}", e.line(), e.column())))?;
        if p.schema_version != SCHEMA_VERSION {
            return Err(CliError::Parse(format!(
                "unsupported schema_version {:?} (expected {SCHEMA_VERSION:?})",
                p.schema_version
            )));
        }
        for (name, data) in &p.matrices {
            parse_matrix(name, data)?;
        }
        Ok(p)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files always serialize")
    }

    fn expect_kind(&self, allowed: &[ProblemKind], command: &str) -> CliResult<()> {
        if allowed.contains(&self.kind) {
            Ok(())
        } else {
            Err(CliError::Parse(format!("`{command}` cannot read a problem of kind {:?}", self.kind)))
        }
    }

    fn matrix(&self, field: &str, name: &str) -> CliResult<ComplexMatrix> {
        let data = self
            .matrices
            .get(name)
            .ok_or_else(|| CliError::Parse(format!("{field}: no matrix named `{name}`")))?;
        parse_matrix(name, data)
    }

    fn dims(&self) -> CliResult<(usize, usize)> {
        match self.dims {
            Some((a, b)) if a > 0 && b > 0 => Ok((a, b)),
            Some(d) => Err(CliError::Parse(format!("dims: {d:?} must be positive"))),
            None => Err(CliError::Parse(format!("dims: required for kind {:?}", self.kind))),
        }
    }

    /// Operator forms named by `states`, each checked to be `b×a`.
    fn state_operators(&self) -> CliResult<Vec<ComplexMatrix>> {
        let (a, b) = self.dims()?;
        if self.states.is_empty() {
            return Err(CliError::Parse("states: at least one state is required".into()));
        }
        self.states
            .iter()
            .enumerate()
            .map(|(i, name)| {
                let m = self.matrix(&format!("states[{i}]"), name)?;
                check_shape(&format!("states[{i}] (`{name}`)"), &m, b, a)?;
                Ok(m)
            })
            .collect()
    }

    fn state_set_for(&self, tol: Tolerance) -> CliResult<StateSet> {
        let ops = self.state_operators()?;
        StateSet::from_operators(&ops, tol).map_err(CliError::numerical("states"))
    }

    fn alice_vectors(&self) -> CliResult<Vec<ComplexVector>> {
        let (a, _) = self.dims()?;
        let name = self
            .alice_basis
            .as_deref()
            .ok_or_else(|| CliError::Parse("alice_basis: required for kind channel_check".into()))?;
        let m = self.matrix("alice_basis", name)?;
        check_shape(&format!("alice_basis (`{name}`)"), &m, a, a)?;
        Ok(linalg::columns_of(&m))
    }

    fn code_and_noise(&self, tol: Tolerance) -> CliResult<(CodeSpace, KrausChannel)> {
        if self.code.is_empty() || self.noise.is_empty() {
            return Err(CliError::Parse("code and noise: both must name at least one matrix".into()));
        }
        let mut columns = Vec::new();
        for (i, name) in self.code.iter().enumerate() {
            columns.extend(linalg::columns_of(&self.matrix(&format!("code[{i}]"), name)?));
        }
        let n = columns[0].len();
        if let Some((a, b)) = self.dims {
            if a * b != n {
                return Err(CliError::DimensionMismatch(format!("code: vectors of length {n} but dims {a}×{b}")));
            }
        }
        if let Some((i, v)) = columns.iter().enumerate().find(|(_, v)| v.len() != n) {
            return Err(CliError::DimensionMismatch(format!("code column {i}: length {}, expected {n}", v.len())));
        }
        let kraus = self
            .noise
            .iter()
            .enumerate()
            .map(|(i, name)| {
                let m = self.matrix(&format!("noise[{i}]"), name)?;
                if m.ncols() != n {
                    return Err(CliError::DimensionMismatch(format!(
                        "noise[{i}] (`{name}`): {}×{} operator acting on code vectors of length {n}",
                        m.nrows(),
                        m.ncols()
                    )));
                }
                Ok(m)
            })
            .collect::<CliResult<Vec<_>>>()?;
        let code = CodeSpace::new(columns, tol).map_err(CliError::numerical("code"))?;
        let noise = KrausChannel::new(kraus).map_err(CliError::numerical("noise"))?;
        Ok((code, noise))
    }
}

fn check_shape(context: &str, m: &ComplexMatrix, rows: usize, cols: usize) -> CliResult<()> {
    if m.shape() == (rows, cols) {
        Ok(())
    } else {
        Err(CliError::DimensionMismatch(format!(
            "{context}: expected {rows}×{cols}, got {}×{}",
            m.nrows(),
            m.ncols()
        )))
    }
}

pub fn entry(z: C64) -> Entry {
    [z.re, z.im]
}

pub fn matrix_data(m: &ComplexMatrix) -> MatrixData {
    m.row_iter().map(|row| row.iter().map(|&z| entry(z)).collect()).collect()
}

pub fn vector_data(v: &ComplexVector) -> VectorData {
    v.iter().map(|&z| entry(z)).collect()
}

/// Parses a named matrix, rejecting ragged rows and non-finite entries.
pub fn parse_matrix(name: &str, data: &MatrixData) -> CliResult<ComplexMatrix> {
    let rows = data.len();
    let cols = data.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err(CliError::Parse(format!("matrix `{name}` is empty")));
    }
    let mut entries = Vec::with_capacity(rows * cols);
    for (r, row) in data.iter().enumerate() {
        if row.len() != cols {
            return Err(CliError::Parse(format!(
                "matrix `{name}`: row {r} has {} entries, expected {cols}",
                row.len()
            )));
        }
        for (col, &[re, im]) in row.iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return Err(CliError::Parse(format!("matrix `{name}`: non-finite entry at ({r}, {col})")));
            }
            entries.push(C64::new(re, im));
        }
    }
    linalg::matrix_from_row_major(rows, cols, &entries).map_err(|e| CliError::Parse(format!("matrix `{name}`: {e}")))
}

fn parse_vector(context: &str, data: &VectorData) -> CliResult<ComplexVector> {
    if let Some(i) = data.iter().position(|[re, im]| !re.is_finite() || !im.is_finite()) {
        return Err(CliError::Parse(format!("{context}: non-finite entry at {i}")));
    }
    Ok(ComplexVector::from_iterator(data.len(), data.iter().map(|&[re, im]| C64::new(re, im))))
}

/// Generalized-Bell teleportation fixture on `(C^d ⊗ C^d)_A ⊗ (C^d ⊗ C^d)_B`.
///
/// The states are `|Φ⟩_{A1B1} ⊗ (I ⊗ X^iZ^j)|Φ⟩_{A2B2}`, whose operator forms
/// are `I_d ⊗ X^iZ^j`, and Alice measures `A1A2` in the generalized Bell basis.
pub fn teleportation_problem(d: usize) -> ProblemFile {
    let id = ComplexMatrix::identity(d, d);
    let mut ops = Vec::with_capacity(d * d);
    let mut alice = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let w = linalg::weyl(d, i, j);
            ops.push(linalg::tensor(&id, &w));
            let bell = BipartiteState::from_operator(&w, d, d, Tolerance::default())
                .expect("Weyl operators are unitary");
            alice.push(bell.vector().clone());
        }
    }
    ProblemFile::channel_check(&ops, &alice)
}

// ---------------------------------------------------------------- reports

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WitnessData {
    /// Alice's basis and Bob's flag vectors. `states` is present when the
    /// protocol distinguishes a basis other than the one in the problem file.
    Protocol {
        alice_basis: Vec<VectorData>,
        bob_vectors: Vec<Vec<VectorData>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        structure: Option<Vec<(usize, usize)>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        states: Option<Vec<MatrixData>>,
    },
    Structure {
        blocks: Vec<(usize, usize)>,
    },
    SchmidtRank {
        rank: usize,
    },
    ClosureResidual {
        value: f64,
    },
    KnillLaflamme {
        lambda: MatrixData,
    },
    Recovery {
        kraus: Vec<MatrixData>,
    },
}

impl WitnessData {
    fn kind(&self) -> &'static str {
        match self {
            WitnessData::Protocol { .. } => "protocol",
            WitnessData::Structure { .. } => "structure",
            WitnessData::SchmidtRank { .. } => "schmidt_rank",
            WitnessData::ClosureResidual { .. } => "closure_residual",
            WitnessData::KnillLaflamme { .. } => "knill_laflamme",
            WitnessData::Recovery { .. } => "recovery",
        }
    }

    fn from_locc(w: &Witness) -> Self {
        match w {
            Witness::Protocol { protocol, structure } => WitnessData::Protocol {
                alice_basis: protocol.alice_basis.iter().map(vector_data).collect(),
                bob_vectors: protocol
                    .bob_vectors
                    .iter()
                    .map(|row| row.iter().map(vector_data).collect())
                    .collect(),
                structure: structure.as_ref().map(|st| st.blocks().to_vec()),
                states: None,
            },
            Witness::Structure(st) => WitnessData::Structure { blocks: st.blocks().to_vec() },
            Witness::SchmidtRank(rank) => WitnessData::SchmidtRank { rank: *rank },
            Witness::ClosureResidual(value) => WitnessData::ClosureResidual { value: *value },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: String,
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub tolerance: Tolerance,
    pub status: String,
    pub exit_code: i32,
    pub criterion: String,
    #[serde(default)]
    pub params: BTreeMap<String, usize>,
    #[serde(default)]
    pub residuals: BTreeMap<String, f64>,
    #[serde(default)]
    pub diagnostics: Vec<String>,
    #[serde(default)]
    pub witness: Option<WitnessData>,
}

impl Report {
    fn new(command: &str, settings: &Settings, criterion: &str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            tool: TOOL_NAME.into(),
            version: TOOL_VERSION.into(),
            command: command.into(),
            seed: settings.seed,
            tolerance: settings.tol,
            status: String::new(),
            exit_code: EXIT_INCONCLUSIVE,
            criterion: criterion.into(),
            params: BTreeMap::new(),
            residuals: BTreeMap::new(),
            diagnostics: Vec::new(),
            witness: None,
        }
    }

    fn set_status(&mut self, status: Status) {
        self.status = status.as_str().into();
        self.exit_code = match status {
            Status::Distinguishable => EXIT_POSITIVE,
            Status::NotDistinguishable => EXIT_NEGATIVE,
            Status::Inconclusive => EXIT_INCONCLUSIVE,
        };
    }

    fn set_check(&mut self, passed: bool, yes: &str, no: &str) {
        self.status = if passed { yes } else { no }.into();
        self.exit_code = if passed { EXIT_POSITIVE } else { EXIT_NEGATIVE };
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text)
            .map_err(|e| CliError::Parse(format!("report line {} column {}: {e}", e.line(), e.column())))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {} {}", self.tool, self.version, self.command);
        let _ = writeln!(s, "status: {} (exit {})", self.status, self.exit_code);
        let _ = writeln!(s, "criterion: {}", self.criterion);
        let _ = writeln!(
            s,
            "tolerance: abs {:e}, rel {:e}; seed {}",
            self.tolerance.absolute, self.tolerance.relative, self.seed
        );
        for (k, v) in &self.params {
            let _ = writeln!(s, "{k} = {v}");
        }
        for (k, v) in &self.residuals {
            let _ = writeln!(s, "{k} = {v:.3e}");
        }
        if let Some(w) = &self.witness {
            let detail = match w {
                WitnessData::Protocol { alice_basis, structure, states, .. } => {
                    let mut d = format!("{} Alice outcomes", alice_basis.len());
                    if let Some(st) = structure {
                        let _ = write!(d, ", structure {}", format_blocks(st));
                    }
                    if let Some(st) = states {
                        let _ = write!(d, ", {} new states", st.len());
                    }
                    d
                }
                WitnessData::Structure { blocks } => format_blocks(blocks),
                WitnessData::SchmidtRank { rank } => format!("rank {rank}"),
                WitnessData::ClosureResidual { value } => format!("{value:.3e}"),
                WitnessData::KnillLaflamme { lambda } => format!("{}×{} lambda", lambda.len(), lambda.len()),
                WitnessData::Recovery { kraus } => format!("{} Kraus operators", kraus.len()),
            };
            let _ = writeln!(s, "witness: {} ({detail})", w.kind());
        }
        for line in &self.diagnostics {
            let _ = writeln!(s, "note: {line}");
        }
        s
    }
}

fn format_blocks(blocks: &[(usize, usize)]) -> String {
    let parts: Vec<String> = blocks.iter().map(|(m, n)| format!("({m},{n})")).collect();
    format!("{{{}}}", parts.join(","))
}

// ------------------------------------------------------------ arguments

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "locc-qec", version, about = "One-way LOCC distinguishability and error-correction checks")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Default, Args)]
pub struct GlobalArgs {
    /// Absolute tolerance (default 1e-10).
    #[arg(long, global = true, env = TOL_ABS_ENV)]
    pub tol_abs: Option<f64>,
    /// Relative tolerance (default 1e-9).
    #[arg(long, global = true, env = TOL_REL_ENV)]
    pub tol_rel: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Emit the report as JSON (the default).
    #[arg(long, global = true, conflicts_with = "text")]
    pub json: bool,
    /// Emit a short human-readable summary.
    #[arg(long, global = true)]
    pub text: bool,
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide one-way LOCC distinguishability of a state set.
    Analyze { input: PathBuf },
    /// Knill–Laflamme check of a code against a noise channel.
    KlCheck { input: PathBuf },
    /// Search for a distinguishable basis of the span of three qutrit-side states.
    FindBasis { input: PathBuf },
    /// Logical Pauli states of the canonical [[n, k]] stabilizer code.
    Stabilizer {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        /// Problem file of kind stabilizer_params, used when flags are absent.
        input: Option<PathBuf>,
    },
    /// Check that the recovery channel undoes Alice's measurement on the code.
    TeleportVerify { input: PathBuf },
    /// Re-validate the witness in a report against its problem.
    Verify {
        report: PathBuf,
        /// Problem file; optional for stabilizer reports.
        problem: Option<PathBuf>,
    },
}

/// Effective tolerance, seed and output format for one invocation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Settings {
    pub tol: Tolerance,
    pub seed: u64,
    pub format: Format,
}

impl Default for Settings {
    fn default() -> Self {
        Self { tol: Tolerance::default(), seed: 0, format: Format::Json }
    }
}

impl Settings {
    /// Flags (or their environment variables) take precedence over the
    /// problem file's options, which take precedence over the defaults.
    pub fn resolve(global: &GlobalArgs, problem: Option<&ProblemFile>) -> CliResult<Self> {
        let opts = problem.map(|p| p.options.clone()).unwrap_or_default();
        let default = Tolerance::default();
        let absolute = global.tol_abs.or(opts.tol_abs).unwrap_or(default.absolute);
        let relative = global.tol_rel.or(opts.tol_rel).unwrap_or(default.relative);
        for (name, v) in [("absolute", absolute), ("relative", relative)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(CliError::Parse(format!("{name} tolerance must be a finite non-negative number, got {v}")));
            }
        }
        Ok(Self {
            tol: Tolerance::new(absolute, relative),
            seed: global.seed.or(opts.seed).unwrap_or(0),
            format: if global.text { Format::Text } else { Format::Json },
        })
    }
}

// ------------------------------------------------------------- commands

pub fn cmd_analyze(p: &ProblemFile, settings: &Settings) -> CliResult<Report> {
    p.expect_kind(&[ProblemKind::StateSet], "analyze")?;
    let tol = settings.tol;
    let mut report = Report::new("analyze", settings, "separating vector of the operator system S0");
    if let Some(name) = &p.complement_of {
        let (a, b) = p.dims()?;
        let op = p.matrix("complement_of", name)?;
        check_shape(&format!("complement_of (`{name}`)"), &op, b, a)?;
        let phi = BipartiteState::from_operator(&op, a, b, tol).map_err(CliError::numerical("complement_of"))?;
        let v = locc::schmidt_rank_obstruction(&phi, tol);
        report.diagnostics.extend(v.diagnostics.iter().map(|d| format!("complement_of: {d}")));
        if v.status == Status::NotDistinguishable || p.states.is_empty() {
            report.criterion = "Schmidt rank of the complemented state".into();
            report.set_status(v.status);
            report.witness = v.witness.as_ref().map(WitnessData::from_locc);
            return Ok(report);
        }
    }
    let s = p.state_set_for(tol)?;
    let v = locc::oneway_algebra_test(&s, tol);
    report.set_status(v.status);
    report.diagnostics.extend(v.diagnostics.iter().cloned());
    if let Some(protocol) = v.protocol() {
        let dev = locc::verify(&s, protocol).map_err(CliError::numerical("protocol check"))?;
        report.residuals.insert("protocol_deviation".into(), dev);
    }
    report.witness = v.witness.as_ref().map(WitnessData::from_locc);
    Ok(report)
}

pub fn cmd_kl_check(p: &ProblemFile, settings: &Settings) -> CliResult<Report> {
    p.expect_kind(&[ProblemKind::CodeSpace], "kl-check")?;
    let (code, noise) = p.code_and_noise(settings.tol)?;
    let kl = qec::kl_check(&code, &noise, settings.tol).map_err(CliError::numerical("kl-check"))?;
    let mut report = Report::new("kl-check", settings, "Knill–Laflamme conditions P A_i†A_j P = λ_ij P");
    report.set_check(kl.correctable, "correctable", "not_correctable");
    report.params.insert("code_dim".into(), code.dim());
    report.params.insert("kraus_count".into(), noise.kraus().len());
    report.residuals.insert("kl_residual".into(), kl.residual);
    report.witness = Some(WitnessData::KnillLaflamme { lambda: matrix_data(&kl.lambda) });
    Ok(report)
}

pub fn cmd_find_basis(p: &ProblemFile, settings: &Settings) -> CliResult<Report> {
    p.expect_kind(&[ProblemKind::StateSet], "find-basis")?;
    let ops = p.state_operators()?;
    let mut report = Report::new("find-basis", settings, "kernel element of X^⊥ with commuting Ψ-images");
    match locc::find_distinguishable_basis_3d(&ops, settings.tol) {
        Ok(found) => {
            report.set_status(Status::Distinguishable);
            report.params.insert("x_dim".into(), found.x_dim);
            report.residuals.insert("protocol_deviation".into(), found.overlap);
            report.residuals.insert("psi_commutator".into(), found.commutator);
            report.diagnostics.push(format!(
                "kernel element eigenvalues {:.6}, {:.6}, {:.6}",
                found.eigenvalues[0], found.eigenvalues[1], found.eigenvalues[2]
            ));
            let mut w = WitnessData::from_locc(&Witness::Protocol { protocol: found.protocol, structure: None });
            if let WitnessData::Protocol { states, .. } = &mut w {
                *states = Some(found.states.operators().iter().map(matrix_data).collect());
            }
            report.witness = Some(w);
        }
        Err(e @ (CoreError::StrictSubspaceRequired | CoreError::NoConvergence(_) | CoreError::CommutationFailure { .. })) => {
            report.set_status(Status::Inconclusive);
            report.diagnostics.push(e.to_string());
        }
        Err(e) => return Err(CliError::numerical("find-basis")(e)),
    }
    Ok(report)
}

pub fn cmd_stabilizer(n: usize, k: usize, settings: &Settings) -> CliResult<Report> {
    let out = stabilizer::stabform_distinguishability(n, k, settings.tol).map_err(|e| match e {
        CoreError::InvalidParams(msg) => CliError::Parse(msg),
        e => CliError::numerical("stabilizer")(e),
    })?;
    let mut report = Report::new("stabilizer", settings, "separating vector of S0 for logical Pauli states");
    report.set_status(out.verdict.status);
    report.params.insert("n".into(), n);
    report.params.insert("k".into(), k);
    report.params.insert("s0_dim".into(), out.s0_dim);
    report.diagnostics.push(format!("structure {}", out.structure));
    report.diagnostics.push(format!("analytic verdict (2k ≤ n): {}", out.analytic.as_str()));
    report.diagnostics.extend(out.verdict.diagnostics.iter().cloned());
    if let Some(protocol) = out.verdict.protocol() {
        let states = stabilizer_states(n, k, settings.tol)?;
        let dev = locc::verify(&states, protocol).map_err(CliError::numerical("protocol check"))?;
        report.residuals.insert("protocol_deviation".into(), dev);
    }
    report.witness = out.verdict.witness.as_ref().map(WitnessData::from_locc);
    Ok(report)
}

fn stabilizer_states(n: usize, k: usize, tol: Tolerance) -> CliResult<StateSet> {
    let paulis = stabilizer::logical_pauli_set(n, k).map_err(|e| CliError::Parse(e.to_string()))?;
    stabilizer::states_from_paulis(&paulis, tol).map_err(CliError::numerical("stabilizer states"))
}

pub fn cmd_teleport_verify(p: &ProblemFile, settings: &Settings) -> CliResult<Report> {
    p.expect_kind(&[ProblemKind::ChannelCheck], "teleport-verify")?;
    let tol = settings.tol;
    let s = p.state_set_for(tol)?;
    let alice = p.alice_vectors()?;
    let built = qec::code_from_locc(&s, &alice, tol).map_err(CliError::numerical("recovery construction"))?;
    let dev = channels::verify_recovery(&built.recovery, &built.noise, built.code.basis(), RECOVERY_TRIALS)
        .map_err(CliError::numerical("recovery check"))?;
    let mut report = Report::new("teleport-verify", settings, "R∘(Φ_QC ⊗ id) is the identity on the code");
    report.set_check(tol.accepts(dev, 1.0), "verified", "failed");
    report.params.insert("code_dim".into(), built.code.dim());
    report.residuals.insert("recovery_deviation".into(), dev);
    report.residuals.insert("kl_residual".into(), built.report.residual);
    report.witness = Some(WitnessData::Recovery { kraus: built.recovery.kraus().iter().map(matrix_data).collect() });
    Ok(report)
}

/// Re-validates the witness of `report` against `problem` using only the
/// data in the two files. The returned report has status `valid` (exit 0)
/// or `rejected` (exit 4).
pub fn cmd_verify(report: &Report, problem: Option<&ProblemFile>, settings: &Settings) -> CliResult<Report> {
    let mut out = Report::new("verify", settings, &format!("re-validate {} witness", report.command));
    if report.schema_version != SCHEMA_VERSION {
        return Err(CliError::Parse(format!("report schema_version {:?} not supported", report.schema_version)));
    }
    let problem_for = |allowed: &[ProblemKind]| -> CliResult<&ProblemFile> {
        let p = problem.ok_or_else(|| CliError::Parse(format!("verify: `{}` reports need a problem file", report.command)))?;
        p.expect_kind(allowed, "verify")?;
        Ok(p)
    };
    let outcome = match report.command.as_str() {
        "analyze" => verify_analyze(report, problem_for(&[ProblemKind::StateSet])?, settings)?,
        "find-basis" => verify_find_basis(report, problem_for(&[ProblemKind::StateSet])?, settings)?,
        "stabilizer" => verify_stabilizer(report, problem, settings)?,
        "kl-check" => verify_kl(report, problem_for(&[ProblemKind::CodeSpace])?, settings)?,
        "teleport-verify" => verify_recovery_report(report, problem_for(&[ProblemKind::ChannelCheck])?, settings)?,
        other => return Err(CliError::Parse(format!("cannot verify reports of command {other:?}"))),
    };
    out.residuals = outcome.residuals;
    out.diagnostics = outcome.notes;
    out.params.insert("checked_exit_code".into(), report.exit_code.max(0) as usize);
    out.status = if outcome.valid { "valid" } else { "rejected" }.into();
    out.exit_code = if outcome.valid { EXIT_POSITIVE } else { EXIT_REJECTED };
    Ok(out)
}

#[derive(Default)]
struct Check {
    valid: bool,
    residuals: BTreeMap<String, f64>,
    notes: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Self { valid: true, ..Self::default() }
    }

    fn require(&mut self, ok: bool, note: impl Into<String>) {
        if !ok {
            self.valid = false;
            self.notes.push(note.into());
        }
    }
}

fn expect_status(check: &mut Check, report: &Report, expected: &str, expected_exit: i32) {
    check.require(
        report.status == expected && report.exit_code == expected_exit,
        format!("report claims {} (exit {}), witness supports {expected}", report.status, report.exit_code),
    );
}

fn status_exit(status: Status) -> i32 {
    match status {
        Status::Distinguishable => EXIT_POSITIVE,
        Status::NotDistinguishable => EXIT_NEGATIVE,
        Status::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn parse_protocol(alice: &[VectorData], bob: &[Vec<VectorData>]) -> CliResult<Protocol> {
    let alice_basis = alice
        .iter()
        .enumerate()
        .map(|(x, v)| parse_vector(&format!("witness.alice_basis[{x}]"), v))
        .collect::<CliResult<Vec<_>>>()?;
    let bob_vectors = bob
        .iter()
        .enumerate()
        .map(|(x, row)| {
            row.iter()
                .enumerate()
                .map(|(i, v)| parse_vector(&format!("witness.bob_vectors[{x}][{i}]"), v))
                .collect::<CliResult<Vec<_>>>()
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Protocol { alice_basis, bob_vectors })
}

/// Checks a protocol witness against `s`; a dimension mismatch rejects the
/// witness rather than erroring, since the witness is what is under test.
fn check_protocol(check: &mut Check, s: &StateSet, protocol: &Protocol, tol: Tolerance) {
    match locc::verify(s, protocol) {
        Ok(dev) => {
            check.residuals.insert("protocol_deviation".into(), dev);
            check.require(tol.accepts(dev, 1.0), format!("protocol deviation {dev:.3e} exceeds tolerance"));
        }
        Err(e) => check.require(false, format!("protocol does not fit the states: {e}")),
    }
}

/// Structure witness for a state set: S0 must be an algebra with exactly
/// the reported structure, and that structure must forbid a separating vector.
fn check_structure(check: &mut Check, s0: &opalg::OperatorSpan, blocks: &[(usize, usize)], tol: Tolerance) -> CliResult<()> {
    let residual = opalg::closure_residual(s0);
    check.residuals.insert("closure_residual".into(), residual);
    if !opalg::is_multiplicatively_closed(s0, tol) {
        check.require(false, format!("S0 is not closed (residual {residual:.3e})"));
        return Ok(());
    }
    let claimed = match AlgebraStructure::new(blocks.to_vec()) {
        Ok(st) => st,
        Err(e) => {
            check.require(false, format!("malformed structure: {e}"));
            return Ok(());
        }
    };
    let actual = opalg::wedderburn_structure(s0, tol).map_err(CliError::numerical("structure check"))?;
    check.require(actual == claimed, format!("structure {actual} differs from claimed {claimed}"));
    check.require(!opalg::has_separating_vector(&claimed), format!("structure {claimed} admits a separating vector"));
    Ok(())
}

fn verify_analyze(report: &Report, p: &ProblemFile, settings: &Settings) -> CliResult<Check> {
    let tol = settings.tol;
    let mut check = Check::new();
    match &report.witness {
        Some(WitnessData::Protocol { alice_basis, bob_vectors, states, .. }) => {
            expect_status(&mut check, report, "distinguishable", EXIT_POSITIVE);
            check.require(states.is_none(), "analyze witnesses refer to the problem's own states");
            let s = p.state_set_for(tol)?;
            check_protocol(&mut check, &s, &parse_protocol(alice_basis, bob_vectors)?, tol);
        }
        Some(WitnessData::Structure { blocks }) => {
            expect_status(&mut check, report, "not_distinguishable", EXIT_NEGATIVE);
            let s = p.state_set_for(tol)?;
            let s0 = opalg::operator_system_s0(&s.operators(), tol).map_err(CliError::numerical("S0"))?;
            check_structure(&mut check, &s0, blocks, tol)?;
        }
        Some(WitnessData::SchmidtRank { rank }) => {
            let (a, b) = p.dims()?;
            let name = p
                .complement_of
                .as_deref()
                .ok_or_else(|| CliError::Parse("complement_of: required to check a Schmidt-rank witness".into()))?;
            let op = p.matrix("complement_of", name)?;
            check_shape(&format!("complement_of (`{name}`)"), &op, b, a)?;
            let phi = BipartiteState::from_operator(&op, a, b, tol).map_err(CliError::numerical("complement_of"))?;
            let actual = phi.schmidt_rank(tol);
            check.residuals.insert("schmidt_rank".into(), actual as f64);
            check.require(actual == *rank, format!("Schmidt rank is {actual}, report claims {rank}"));
            let expected = if actual > 2 { Status::NotDistinguishable } else { Status::Inconclusive };
            if report.status != Status::Inconclusive.as_str() || actual > 2 {
                expect_status(&mut check, report, expected.as_str(), status_exit(expected));
            }
        }
        Some(other) if report.status == "distinguishable" || report.status == "not_distinguishable" => {
            check.require(false, format!("a {} witness cannot support {}", other.kind(), report.status));
        }
        _ => {
            check.require(
                report.status == Status::Inconclusive.as_str(),
                format!("{} report carries no usable witness", report.status),
            );
            let s = p.state_set_for(tol)?;
            let v = locc::oneway_algebra_test(&s, tol);
            check.require(
                v.status == Status::Inconclusive,
                format!("recomputation decides the problem ({})", v.status.as_str()),
            );
        }
    }
    Ok(check)
}

fn verify_find_basis(report: &Report, p: &ProblemFile, settings: &Settings) -> CliResult<Check> {
    let tol = settings.tol;
    let mut check = Check::new();
    let Some(WitnessData::Protocol { alice_basis, bob_vectors, states: Some(states), .. }) = &report.witness else {
        check.require(report.status == Status::Inconclusive.as_str(), "find-basis report carries no basis witness");
        return Ok(check);
    };
    expect_status(&mut check, report, "distinguishable", EXIT_POSITIVE);
    let original = p.state_set_for(tol)?;
    let ops = states
        .iter()
        .enumerate()
        .map(|(i, m)| parse_matrix(&format!("witness.states[{i}]"), m))
        .collect::<CliResult<Vec<_>>>()?;
    let new_set = match StateSet::from_operators(&ops, tol) {
        Ok(s) => s,
        Err(e) => {
            check.require(false, format!("witness states are invalid: {e}"));
            return Ok(check);
        }
    };
    check.require(new_set.dims() == original.dims(), "witness states live in a different space");
    check.require(new_set.len() == original.len(), "witness has a different number of states");
    check.require(new_set.is_orthonormal(), "witness states are not orthonormal");
    if !check.valid {
        return Ok(check);
    }
    // Each new state must lie in the span of the original ones.
    let proj = linalg::projector(&original.basis_matrix());
    let outside = new_set
        .vectors()
        .iter()
        .map(|v| (v - &proj * v).norm())
        .fold(0.0, f64::max);
    check.residuals.insert("span_residual".into(), outside);
    check.require(tol.accepts(outside, 1.0), format!("witness states leave the span (residual {outside:.3e})"));
    check_protocol(&mut check, &new_set, &parse_protocol(alice_basis, bob_vectors)?, tol);
    Ok(check)
}

fn verify_stabilizer(report: &Report, problem: Option<&ProblemFile>, settings: &Settings) -> CliResult<Check> {
    let tol = settings.tol;
    let (n, k) = match problem {
        Some(p) => {
            p.expect_kind(&[ProblemKind::StabilizerParams], "verify")?;
            stabilizer_params(p)?
        }
        None => match (report.params.get("n"), report.params.get("k")) {
            (Some(&n), Some(&k)) => (n, k),
            _ => return Err(CliError::Parse("stabilizer report lacks params n and k".into())),
        },
    };
    let mut check = Check::new();
    if report.params.get("n") != Some(&n) || report.params.get("k") != Some(&k) {
        check.require(false, format!("report parameters differ from ({n}, {k})"));
    }
    let paulis = stabilizer::logical_pauli_set(n, k).map_err(|e| CliError::Parse(e.to_string()))?;
    match &report.witness {
        Some(WitnessData::Protocol { alice_basis, bob_vectors, .. }) => {
            expect_status(&mut check, report, "distinguishable", EXIT_POSITIVE);
            let s = stabilizer_states(n, k, tol)?;
            check_protocol(&mut check, &s, &parse_protocol(alice_basis, bob_vectors)?, tol);
        }
        Some(WitnessData::Structure { blocks }) => {
            expect_status(&mut check, report, "not_distinguishable", EXIT_NEGATIVE);
            let s0 = stabilizer::pauli_operator_system(&paulis, tol).map_err(CliError::numerical("S0"))?;
            check_structure(&mut check, &s0, blocks, tol)?;
        }
        _ => check.require(false, "stabilizer report carries no witness"),
    }
    Ok(check)
}

fn stabilizer_params(p: &ProblemFile) -> CliResult<(usize, usize)> {
    match (p.n, p.k) {
        (Some(n), Some(k)) => Ok((n, k)),
        _ => Err(CliError::Parse("n and k: both required for kind stabilizer_params".into())),
    }
}

fn verify_kl(report: &Report, p: &ProblemFile, settings: &Settings) -> CliResult<Check> {
    let tol = settings.tol;
    let mut check = Check::new();
    let Some(WitnessData::KnillLaflamme { lambda }) = &report.witness else {
        check.require(false, "kl-check report carries no λ matrix");
        return Ok(check);
    };
    let (code, noise) = p.code_and_noise(tol)?;
    let lambda = parse_matrix("witness.lambda", lambda)?;
    let r = noise.kraus().len();
    if lambda.shape() != (r, r) {
        check.require(false, format!("λ is {}×{}, expected {r}×{r}", lambda.nrows(), lambda.ncols()));
        return Ok(check);
    }
    // Test P A_i†A_j P = λ_ij P directly with the reported λ.
    let images: Vec<ComplexMatrix> = noise.kraus().iter().map(|e| e * code.basis_matrix()).collect();
    let id = ComplexMatrix::identity(code.dim(), code.dim());
    let mut residual: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..r {
        for j in 0..r {
            let q = images[i].adjoint() * &images[j];
            residual = residual.max((&q - &id * lambda[(i, j)]).norm());
            scale = scale.max(q.norm());
        }
    }
    check.residuals.insert("kl_residual".into(), residual);
    let holds = tol.accepts(residual, scale);
    if report.status == "correctable" {
        expect_status(&mut check, report, "correctable", EXIT_POSITIVE);
        check.require(holds, format!("reported λ leaves residual {residual:.3e}"));
    } else {
        expect_status(&mut check, report, "not_correctable", EXIT_NEGATIVE);
        let best = qec::kl_check(&code, &noise, tol).map_err(CliError::numerical("kl-check"))?;
        check.require(!best.correctable, "the code is correctable under this tolerance");
    }
    Ok(check)
}

fn verify_recovery_report(report: &Report, p: &ProblemFile, settings: &Settings) -> CliResult<Check> {
    let tol = settings.tol;
    let mut check = Check::new();
    let Some(WitnessData::Recovery { kraus }) = &report.witness else {
        check.require(false, "teleport-verify report carries no recovery channel");
        return Ok(check);
    };
    let s = p.state_set_for(tol)?;
    let alice = p.alice_vectors()?;
    let (_, b) = s.dims();
    let noise =
        channels::alice_measurement_channel(&alice, b, tol).map_err(CliError::numerical("alice_basis"))?;
    let ops = kraus
        .iter()
        .enumerate()
        .map(|(i, m)| parse_matrix(&format!("witness.kraus[{i}]"), m))
        .collect::<CliResult<Vec<_>>>()?;
    let dev = KrausChannel::new(ops)
        .and_then(|rec| channels::verify_recovery(&rec, &noise, &s.vectors(), RECOVERY_TRIALS));
    match dev {
        Ok(dev) => {
            check.residuals.insert("recovery_deviation".into(), dev);
            let ok = tol.accepts(dev, 1.0);
            if report.status == "verified" {
                expect_status(&mut check, report, "verified", EXIT_POSITIVE);
                check.require(ok, format!("recovery deviation {dev:.3e} exceeds tolerance"));
            } else {
                expect_status(&mut check, report, "failed", EXIT_NEGATIVE);
                check.require(!ok, "the reported recovery actually works");
            }
        }
        Err(e) => check.require(false, format!("recovery channel does not fit: {e}")),
    }
    Ok(check)
}

// -------------------------------------------------------------- driver

/// Result of one invocation: the report, its rendering and the exit code.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Report,
    pub rendered: String,
    pub exit_code: i32,
}

pub fn run(cli: &Cli) -> CliResult<Outcome> {
    let g = &cli.global;
    let (report, settings) = match &cli.command {
        Command::Analyze { input } => with_problem(g, input, cmd_analyze)?,
        Command::KlCheck { input } => with_problem(g, input, cmd_kl_check)?,
        Command::FindBasis { input } => with_problem(g, input, cmd_find_basis)?,
        Command::TeleportVerify { input } => with_problem(g, input, cmd_teleport_verify)?,
        Command::Stabilizer { n, k, input } => {
            let problem = input.as_deref().map(ProblemFile::load).transpose()?;
            if let Some(p) = &problem {
                p.expect_kind(&[ProblemKind::StabilizerParams], "stabilizer")?;
            }
            let settings = Settings::resolve(g, problem.as_ref())?;
            let from_file = problem.as_ref().map(stabilizer_params).transpose()?;
            let (n, k) = match (n, k, from_file) {
                (Some(n), Some(k), _) => (*n, *k),
                (None, None, Some(nk)) => nk,
                _ => return Err(CliError::Parse("stabilizer: give both --n and --k, or a problem file".into())),
            };
            (cmd_stabilizer(n, k, &settings)?, settings)
        }
        Command::Verify { report, problem } => {
            let r = Report::load(report)?;
            let p = problem.as_deref().map(ProblemFile::load).transpose()?;
            let settings = Settings::resolve(g, p.as_ref())?;
            (cmd_verify(&r, p.as_ref(), &settings)?, settings)
        }
    };
    let rendered = match settings.format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
    };
    if let Some(path) = &g.out {
        std::fs::write(path, &rendered).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(Outcome { exit_code: report.exit_code, report, rendered })
}

fn with_problem(
    g: &GlobalArgs,
    input: &Path,
    cmd: fn(&ProblemFile, &Settings) -> CliResult<Report>,
) -> CliResult<(Report, Settings)> {
    let p = ProblemFile::load(input)?;
    let settings = Settings::resolve(g, Some(&p))?;
    Ok((cmd(&p, &settings)?, settings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real_matrix;

    fn pauli_x() -> ComplexMatrix {
        real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    fn settings() -> Settings {
        Settings::default()
    }

    #[test]
    fn problem_round_trips_through_json() {
        let p = ProblemFile::state_set(&[ComplexMatrix::identity(2, 2), pauli_x()]);
        let back = ProblemFile::from_json(&p.to_json()).unwrap();
        assert_eq!(p, back);
        assert_eq!(back.dims, Some((2, 2)));
    }

    #[test]
    fn ragged_matrix_names_the_culprit() {
        let text = r#"{"schema_version":"1","kind":"state_set","dims":[2,2],
            "matrices":{"Bad":[[[1,0],[0,0]],[[0,0]]]},"states":["Bad"]}"#;
        let err = ProblemFile::from_json(text).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_INPUT);
        assert!(err.to_string().contains("`Bad`"), "{err}");
    }

    #[test]
    fn unknown_schema_rejected() {
        let text = r#"{"schema_version":"9","kind":"state_set"}"#;
        assert!(matches!(ProblemFile::from_json(text), Err(CliError::Parse(_))));
    }

    #[test]
    fn wrong_operator_shape_is_a_dimension_error() {
        let mut p = ProblemFile::state_set(&[ComplexMatrix::identity(2, 2), pauli_x()]);
        p.dims = Some((3, 2));
        let err = cmd_analyze(&p, &settings()).unwrap_err();
        assert!(matches!(err, CliError::DimensionMismatch(_)));
        assert!(err.to_string().contains("states[0]"), "{err}");
    }

    #[test]
    fn bell_pair_report_verifies_and_tampering_is_caught() {
        let p = ProblemFile::state_set(&[ComplexMatrix::identity(2, 2), pauli_x()]);
        let r = cmd_analyze(&p, &settings()).unwrap();
        assert_eq!(r.exit_code, EXIT_POSITIVE);
        let ok = cmd_verify(&r, Some(&p), &settings()).unwrap();
        assert_eq!(ok.exit_code, EXIT_POSITIVE, "{:?}", ok.diagnostics);

        let mut bad = r.clone();
        if let Some(WitnessData::Protocol { alice_basis, .. }) = &mut bad.witness {
            alice_basis[0][0] = [0.6, 0.0];
            alice_basis[0][1] = [0.8, 0.0];
        }
        let rejected = cmd_verify(&bad, Some(&p), &settings()).unwrap();
        assert_eq!(rejected.exit_code, EXIT_REJECTED);
    }

    #[test]
    fn settings_precedence() {
        let mut p = ProblemFile::stabilizer_params(2, 1);
        p.options.tol_abs = Some(1e-6);
        p.options.seed = Some(9);
        let from_file = Settings::resolve(&GlobalArgs::default(), Some(&p)).unwrap();
        assert_eq!(from_file.tol.absolute, 1e-6);
        assert_eq!(from_file.tol.relative, 1e-9);
        assert_eq!(from_file.seed, 9);
        let flags = GlobalArgs { tol_abs: Some(1e-3), seed: Some(1), text: true, ..GlobalArgs::default() };
        let s = Settings::resolve(&flags, Some(&p)).unwrap();
        assert_eq!((s.tol.absolute, s.seed, s.format), (1e-3, 1, Format::Text));
        let neg = GlobalArgs { tol_rel: Some(-1.0), ..GlobalArgs::default() };
        assert!(Settings::resolve(&neg, None).is_err());
    }

    #[test]
    fn weyl_operators_are_unitary_and_orthogonal() {
        for d in 2..5 {
            for i in 0..d {
                for j in 0..d {
                    let w = linalg::weyl(d, i, j);
                    assert!((&w * w.adjoint() - ComplexMatrix::identity(d, d)).norm() < 1e-12);
                    let overlap = linalg::hs_inner(&linalg::weyl(d, 0, 0), &w).norm();
                    assert!(if i == 0 && j == 0 { (overlap - d as f64).abs() < 1e-12 } else { overlap < 1e-12 });
                }
            }
        }
    }

    #[test]
    fn teleportation_fixture_recovers() {
        for d in [2, 3] {
            let p = teleportation_problem(d);
            let r = cmd_teleport_verify(&p, &settings()).unwrap();
            assert_eq!(r.status, "verified");
            assert!(r.residuals["recovery_deviation"] <= 1e-10);
            assert_eq!(cmd_verify(&r, Some(&p), &settings()).unwrap().exit_code, EXIT_POSITIVE);
        }
    }
}
