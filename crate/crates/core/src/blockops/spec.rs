use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SpeclabError};
use crate::numlin::ComplexMatrix;

/// How blocks are numbered and which window a truncation keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IndexKind {
    /// Blocks `k = 1, 2, ...`; truncation `n` keeps `k = 1..=n`.
    Natural,
    /// Blocks `k in Z`; truncation `n` keeps `k = -n..n-1`.
    Integer,
}

/// Sequences of the tridiagonal example: `a_j = a_scale * j^2`,
/// `b_j = b + b_decay / j`, `c_j = c_decay / j`, `d_j = d + d_decay / j`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Example1Params {
    pub a_scale: f64,
    pub b: f64,
    pub b_decay: f64,
    pub c_decay: f64,
    pub d: f64,
    pub d_decay: f64,
}

impl Default for Example1Params {
    fn default() -> Self {
        Self {
            a_scale: 8.0,
            b: 1.0,
            b_decay: 1.0,
            c_decay: 1.0,
            d: 2.0,
            d_decay: 1.0,
        }
    }
}

impl Example1Params {
    pub fn a(&self, j: i64) -> f64 {
        self.a_scale * (j * j) as f64
    }

    pub fn b(&self, j: i64) -> f64 {
        self.b + self.b_decay / j as f64
    }

    pub fn c(&self, j: i64) -> f64 {
        self.c_decay / j as f64
    }

    pub fn d(&self, j: i64) -> f64 {
        self.d + self.d_decay / j as f64
    }
}

/// Behaviour of a block table beyond its listed indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailRule {
    /// Reuse the nearest listed entry.
    RepeatLast,
    /// Indices outside the table are an error.
    FormulaUnsupported,
}

/// Explicit blocks for finitely many indices.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockTable {
    pub blocks: BTreeMap<i64, ComplexMatrix>,
    pub in_block: BTreeMap<i64, ComplexMatrix>,
    pub upper: BTreeMap<i64, ComplexMatrix>,
    pub lower: BTreeMap<i64, ComplexMatrix>,
    pub tail: TailRule,
}

#[derive(Clone, Debug, PartialEq)]
enum Generator {
    Delay { a_scale: f64 },
    Example1(Example1Params),
    Table(BlockTable),
}

/// A block-diagonally dominant operator `A = T + S`.
///
/// `T = diag(T_k)` holds the diagonal blocks. The remainder `S` is split into
/// an in-block part `D_k` (added to `T_k` in `A` but not part of `T`), the
/// coupling `U_k` of block `k` to block `k+1` above the diagonal, and the
/// coupling `L_k` of block `k+1` to block `k` below it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct BlockSequenceSpec {
    index_kind: IndexKind,
    description: String,
    generator: Generator,
}

fn m2(a: f64, b: f64, c: f64, d: f64) -> ComplexMatrix {
    let z = |x: f64| Complex64::new(x, 0.0);
    ComplexMatrix::new(2, 2, vec![z(a), z(b), z(c), z(d)]).expect("finite 2x2 block")
}

impl BlockSequenceSpec {
    /// Neutral delay operator: `T_j = [[0, 1], [8 j^2, 0]]`,
    /// `U_j = [[0, 0], [1, 0]]`, `j in Z`.
    pub fn delay() -> Self {
        Self::delay_with_scale(8.0)
    }

    pub fn delay_with_scale(a_scale: f64) -> Self {
        Self {
            index_kind: IndexKind::Integer,
            description: format!("neutral delay blocks, a_j = {a_scale} j^2"),
            generator: Generator::Delay { a_scale },
        }
    }

    /// Tridiagonal operator with diagonal `a_1, d_1, a_2, d_2, ...`,
    /// superdiagonal `b_j` and subdiagonal `c_j`, in 2x2 blocks
    /// `T_k = [[a_k, b_{2k-1}], [0, d_k]]`.
    pub fn example1(params: Example1Params) -> Self {
        Self {
            index_kind: IndexKind::Natural,
            description: format!(
                "tridiagonal example, a_j = {} j^2, b_j -> {}, c_j -> 0, d_j -> {}",
                params.a_scale, params.b, params.d
            ),
            generator: Generator::Example1(params),
        }
    }

    /// Every block equal to `block`, no coupling.
    pub fn constant(block: ComplexMatrix, index_kind: IndexKind) -> Result<Self> {
        block.require_square()?;
        let table = BlockTable {
            blocks: BTreeMap::from([(if index_kind == IndexKind::Natural { 1 } else { 0 }, block)]),
            in_block: BTreeMap::new(),
            upper: BTreeMap::new(),
            lower: BTreeMap::new(),
            tail: TailRule::RepeatLast,
        };
        Self::from_table(table, index_kind, "constant blocks".into())
    }

    pub fn from_table(table: BlockTable, index_kind: IndexKind, description: String) -> Result<Self> {
        if table.blocks.is_empty() {
            return Err(SpeclabError::Validation("block table has no diagonal blocks".into()));
        }
        for (k, b) in &table.blocks {
            b.require_square()?;
            b.validate()
                .map_err(|e| SpeclabError::Validation(format!("block {k}: {e}")))?;
        }
        if index_kind == IndexKind::Natural && table.blocks.keys().any(|&k| k < 1) {
            return Err(SpeclabError::Validation("natural-indexed tables start at k = 1".into()));
        }
        Ok(Self {
            index_kind,
            description,
            generator: Generator::Table(table),
        })
    }

    pub fn index_kind(&self) -> IndexKind {
        self.index_kind
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// Block indices kept by truncation `n`.
    pub fn window(&self, n: usize) -> Vec<i64> {
        let n = n as i64;
        match self.index_kind {
            IndexKind::Natural => (1..=n).collect(),
            IndexKind::Integer => (-n..n).collect(),
        }
    }

    /// Indices `k` with `|k|` in `[k_blocks / 2, k_blocks]`.
    pub fn tail_window(&self, k_blocks: usize) -> Vec<i64> {
        let hi = k_blocks as i64;
        let lo = hi / 2;
        match self.index_kind {
            IndexKind::Natural => (lo..=hi).collect(),
            IndexKind::Integer => (-hi..=-lo).chain(lo..=hi).collect(),
        }
    }

    fn check_index(&self, k: i64) -> Result<()> {
        if self.index_kind == IndexKind::Natural && k < 1 {
            return Err(SpeclabError::Validation(format!(
                "block index {k} outside the natural numbers"
            )));
        }
        Ok(())
    }

    /// Diagonal block `T_k`.
    pub fn block(&self, k: i64) -> Result<ComplexMatrix> {
        self.check_index(k)?;
        match &self.generator {
            Generator::Delay { a_scale } => Ok(m2(0.0, 1.0, a_scale * (k * k) as f64, 0.0)),
            Generator::Example1(p) => Ok(m2(p.a(k), p.b(2 * k - 1), 0.0, p.d(k))),
            Generator::Table(t) => lookup(&t.blocks, k, t.tail, "block")?
                .ok_or_else(|| SpeclabError::Validation(format!("no block for index {k}"))),
        }
    }

    /// Part of `S` inside the diagonal block position `k`, if any.
    pub fn in_block(&self, k: i64) -> Result<Option<ComplexMatrix>> {
        self.check_index(k)?;
        match &self.generator {
            Generator::Delay { .. } => Ok(None),
            Generator::Example1(p) => Ok(Some(m2(0.0, 0.0, p.c(2 * k - 1), 0.0))),
            Generator::Table(t) => lookup(&t.in_block, k, t.tail, "in-block"),
        }
    }

    /// Coupling `U_k` from block `k` to block `k+1` (above the diagonal).
    pub fn upper(&self, k: i64) -> Result<Option<ComplexMatrix>> {
        self.check_index(k)?;
        match &self.generator {
            Generator::Delay { .. } => Ok(Some(m2(0.0, 0.0, 1.0, 0.0))),
            Generator::Example1(p) => Ok(Some(m2(0.0, 0.0, p.b(2 * k), 0.0))),
            Generator::Table(t) => lookup(&t.upper, k, t.tail, "upper coupling"),
        }
    }

    /// Coupling `L_k` from block `k+1` back to block `k` (below the diagonal).
    pub fn lower(&self, k: i64) -> Result<Option<ComplexMatrix>> {
        self.check_index(k)?;
        match &self.generator {
            Generator::Delay { .. } => Ok(None),
            Generator::Example1(p) => Ok(Some(m2(0.0, p.c(2 * k), 0.0, 0.0))),
            Generator::Table(t) => lookup(&t.lower, k, t.tail, "lower coupling"),
        }
    }

    /// Coefficient `a_k` for delay specs.
    pub fn delay_coefficient(&self, k: i64) -> Option<f64> {
        match self.generator {
            Generator::Delay { a_scale } => Some(a_scale * (k * k) as f64),
            _ => None,
        }
    }
}

fn lookup(table: &BTreeMap<i64, ComplexMatrix>, k: i64, tail: TailRule, what: &str) -> Result<Option<ComplexMatrix>> {
    if table.is_empty() {
        return Ok(None);
    }
    if let Some(b) = table.get(&k) {
        return Ok(Some(b.clone()));
    }
    let (&lo, _) = table.first_key_value().expect("non-empty");
    let (&hi, _) = table.last_key_value().expect("non-empty");
    if k > lo && k < hi {
        // gaps inside the listed range mean "zero coupling"
        return Ok(None);
    }
    match tail {
        TailRule::RepeatLast => Ok(Some(table[if k > hi { &hi } else { &lo }].clone())),
        TailRule::FormulaUnsupported => Err(SpeclabError::Validation(format!(
            "{what} for index {k} lies outside the table [{lo}, {hi}] and the tail rule forbids extrapolation"
        ))),
    }
}

// JSON layer --------------------------------------------------------------

type RawBlock = Vec<Vec<Complex64>>;

#[derive(Serialize, Deserialize, Default)]
struct RawSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    index_kind: Option<IndexKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b_decay: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c_decay: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d_decay: Option<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    blocks: BTreeMap<i64, RawBlock>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    in_block: BTreeMap<i64, RawBlock>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    upper: BTreeMap<i64, RawBlock>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    lower: BTreeMap<i64, RawBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tail: Option<TailRule>,
}

fn to_matrix(raw: &RawBlock, k: i64) -> Result<ComplexMatrix> {
    let rows = raw.len();
    let cols = raw.first().map_or(0, Vec::len);
    if raw.iter().any(|r| r.len() != cols) {
        return Err(SpeclabError::Dimension(format!("ragged block at index {k}")));
    }
    ComplexMatrix::new(rows, cols, raw.iter().flatten().copied().collect())
}

fn to_raw(m: &ComplexMatrix) -> RawBlock {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

fn table_map(raw: &BTreeMap<i64, RawBlock>) -> Result<BTreeMap<i64, ComplexMatrix>> {
    raw.iter().map(|(&k, b)| Ok((k, to_matrix(b, k)?))).collect()
}

impl TryFrom<RawSpec> for BlockSequenceSpec {
    type Error = SpeclabError;

    fn try_from(r: RawSpec) -> Result<Self> {
        let mut spec = match r.builtin.as_deref() {
            Some("delay") => Self::delay_with_scale(r.a_scale.unwrap_or(8.0)),
            Some("example1") => {
                let mut p = Example1Params::default();
                p.a_scale = r.a_scale.unwrap_or(p.a_scale);
                p.b = r.b.unwrap_or(p.b);
                p.b_decay = r.b_decay.unwrap_or(p.b_decay);
                p.c_decay = r.c_decay.unwrap_or(p.c_decay);
                p.d = r.d.unwrap_or(p.d);
                p.d_decay = r.d_decay.unwrap_or(p.d_decay);
                if [p.a_scale, p.b, p.b_decay, p.c_decay, p.d, p.d_decay]
                    .iter()
                    .any(|v| !v.is_finite())
                {
                    return Err(SpeclabError::Validation("non-finite example parameter".into()));
                }
                Self::example1(p)
            }
            Some(other) => {
                return Err(SpeclabError::Validation(format!(
                    "unknown builtin block family {other:?} (expected \"delay\" or \"example1\")"
                )))
            }
            None => {
                let table = BlockTable {
                    blocks: table_map(&r.blocks)?,
                    in_block: table_map(&r.in_block)?,
                    upper: table_map(&r.upper)?,
                    lower: table_map(&r.lower)?,
                    tail: r.tail.ok_or_else(|| {
                        SpeclabError::Validation(
                            "block tables need \"tail\": \"repeat-last\" or \"formula-unsupported\"".into(),
                        )
                    })?,
                };
                Self::from_table(table, r.index_kind.unwrap_or(IndexKind::Natural), "block table".into())?
            }
        };
        if let Some(d) = r.description {
            spec.description = d;
        }
        Ok(spec)
    }
}

impl From<BlockSequenceSpec> for RawSpec {
    fn from(s: BlockSequenceSpec) -> Self {
        let mut raw = RawSpec {
            description: Some(s.description),
            ..Default::default()
        };
        match s.generator {
            Generator::Delay { a_scale } => {
                raw.builtin = Some("delay".into());
                raw.a_scale = Some(a_scale);
            }
            Generator::Example1(p) => {
                raw.builtin = Some("example1".into());
                raw.a_scale = Some(p.a_scale);
                raw.b = Some(p.b);
                raw.b_decay = Some(p.b_decay);
                raw.c_decay = Some(p.c_decay);
                raw.d = Some(p.d);
                raw.d_decay = Some(p.d_decay);
            }
            Generator::Table(t) => {
                raw.index_kind = Some(s.index_kind);
                raw.tail = Some(t.tail);
                let conv = |m: &BTreeMap<i64, ComplexMatrix>| m.iter().map(|(&k, b)| (k, to_raw(b))).collect();
                raw.blocks = conv(&t.blocks);
                raw.in_block = conv(&t.in_block);
                raw.upper = conv(&t.upper);
                raw.lower = conv(&t.lower);
            }
        }
        raw
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_builtins_and_overrides() {
        let s: BlockSequenceSpec = serde_json::from_str(r#"{"builtin": "delay"}"#).unwrap();
        assert_eq!(s, BlockSequenceSpec::delay());
        let e: BlockSequenceSpec = serde_json::from_str(r#"{"builtin": "example1", "d": 3.0}"#).unwrap();
        assert_eq!(e.block(1).unwrap()[(1, 1)].re, 4.0);
        assert!(serde_json::from_str::<BlockSequenceSpec>(r#"{"builtin": "nope"}"#).is_err());
        let back: BlockSequenceSpec = serde_json::from_str(&serde_json::to_string(&e).unwrap()).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn table_tail_rules() {
        let text = r#"{"blocks": {"1": [[[1,0]]], "3": [[[3,0]]]}, "tail": "repeat-last"}"#;
        let s: BlockSequenceSpec = serde_json::from_str(text).unwrap();
        assert_eq!(s.block(7).unwrap()[(0, 0)].re, 3.0);
        assert!(s.block(2).is_err());
        let strict: BlockSequenceSpec =
            serde_json::from_str(&text.replace("repeat-last", "formula-unsupported")).unwrap();
        assert!(strict.block(4).is_err());
        assert!(serde_json::from_str::<BlockSequenceSpec>(r#"{"blocks": {"1": [[[1,0]]]}}"#).is_err());
    }

    #[test]
    fn windows() {
        assert_eq!(BlockSequenceSpec::delay().window(2), vec![-2, -1, 0, 1]);
        let e = BlockSequenceSpec::example1(Example1Params::default());
        assert_eq!(e.window(3), vec![1, 2, 3]);
        assert_eq!(e.tail_window(16), (8..=16).collect::<Vec<_>>());
        assert_eq!(BlockSequenceSpec::delay().tail_window(16).len(), 18);
    }
}
