//! JSON file formats.
//!
//! * function: `{"n": 2, "values": [1, 1, 1, -1]}`, or for sign functions
//!   `{"n": 2, "bits": "8"}` where the hex string is a big-endian integer
//!   whose bit `m` is set iff `f(m) = -1`;
//! * collection: `{"d": 2, "functions": {"": f, "1": f, "2": f, "12": f}}`;
//! * group function: `{"blocks": [[3], [3]], "values": [[re, im], ...]}`;
//! * hypergraph: `{"t": 3, "edges": [[1, 2], [1, 3]]}`;
//! * unique game: `{"sigma": 3, "variables": [...], "constraints":
//!   [{"vars": [0, 2], "perms": [[2, 1, 0], [0, 1, 2]]}]}`;
//! * proof: `{"sigma": 3, "tables": [f, f, ...]}`.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gowers::{parse_subset_key, subset_key, FnCollection};
use crate::group::{GroupFn, GroupSpec};
use crate::pcp::PcpProof;
use crate::testing::Hypergraph;
use crate::ugame::{Constraint, UniqueGame};
use crate::BoolFn;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionFile {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bits: Option<String>,
}

impl FunctionFile {
    pub fn into_fn(self) -> Result<BoolFn<f64>> {
        match (self.values, self.bits) {
            (Some(v), None) => BoolFn::from_values(self.n, v),
            (None, Some(hex)) => {
                let minus = parse_hex_bits(&hex, self.n)?;
                BoolFn::from_bits(self.n, |m| minus[m])
            }
            _ => Err(Error::Parse("a function needs exactly one of \"values\" and \"bits\"".into())),
        }
    }

    pub fn from_fn(f: &BoolFn<f64>) -> Self {
        FunctionFile {
            n: f.n(),
            values: Some(f.values().to_vec()),
            bits: None,
        }
    }

    /// Hex form; `None` unless `f` is sign-valued.
    pub fn compact(f: &BoolFn<f64>) -> Option<Self> {
        f.is_sign().then(|| FunctionFile {
            n: f.n(),
            values: None,
            bits: Some(hex_bits(f)),
        })
    }
}

fn parse_hex_bits(hex: &str, n: usize) -> Result<Vec<bool>> {
    crate::boolfn::check_arity(n)?;
    let len = 1usize << n;
    let digits = hex.trim().trim_start_matches("0x");
    if digits.is_empty() {
        return Err(Error::Parse("empty hex string".into()));
    }
    let mut minus = vec![false; len];
    for (k, c) in digits.chars().rev().enumerate() {
        let v = c
            .to_digit(16)
            .ok_or_else(|| Error::Parse(format!("bad hex digit {c:?}")))?;
        for b in 0..4 {
            if v >> b & 1 == 1 {
                let m = 4 * k + b;
                if m >= len {
                    return Err(Error::Parse(format!("hex string sets bit {m} beyond 2^{n}")));
                }
                minus[m] = true;
            }
        }
    }
    Ok(minus)
}

fn hex_bits(f: &BoolFn<f64>) -> String {
    let nibbles = f.len().div_ceil(4);
    (0..nibbles)
        .rev()
        .map(|k| {
            let v = (0..4)
                .filter(|b| 4 * k + b < f.len() && f.at(4 * k + b) < 0.0)
                .fold(0u32, |v, b| v | 1 << b);
            char::from_digit(v, 16).expect("nibble")
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollectionFile {
    pub d: usize,
    pub functions: BTreeMap<String, FunctionFile>,
}

impl CollectionFile {
    pub fn into_collection(self) -> Result<FnCollection<f64>> {
        if self.d == 0 || self.d > 16 {
            return Err(Error::Parse(format!("collection dimension {} outside 1..=16", self.d)));
        }
        let mut slots: Vec<Option<BoolFn<f64>>> = vec![None; 1 << self.d];
        for (key, f) in self.functions {
            let s = parse_subset_key(&key, self.d)?;
            slots[s] = Some(f.into_fn()?);
        }
        let entries = slots
            .into_iter()
            .enumerate()
            .map(|(s, f)| f.ok_or_else(|| Error::Parse(format!("missing function for key {:?}", subset_key(s)))))
            .collect::<Result<_>>()?;
        FnCollection::new(self.d, entries)
    }

    pub fn from_collection(c: &FnCollection<f64>) -> Self {
        CollectionFile {
            d: c.d(),
            functions: c
                .entries()
                .iter()
                .enumerate()
                .map(|(s, f)| (subset_key(s), FunctionFile::from_fn(f)))
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupFnFile {
    pub blocks: Vec<Vec<usize>>,
    pub values: Vec<[f64; 2]>,
}

impl GroupFnFile {
    pub fn into_fn(self) -> Result<GroupFn<f64>> {
        let spec = GroupSpec::new(self.blocks)?;
        GroupFn::from_values(spec, self.values.iter().map(|&[re, im]| Complex::new(re, im)).collect())
    }

    pub fn from_fn(f: &GroupFn<f64>) -> Self {
        GroupFnFile {
            blocks: f.spec().blocks().to_vec(),
            values: f.values().iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypergraphFile {
    pub t: usize,
    pub edges: Vec<Vec<usize>>,
}

impl HypergraphFile {
    pub fn into_hypergraph(self) -> Result<Hypergraph> {
        Hypergraph::new(self.t, self.edges)
    }

    pub fn from_hypergraph(h: &Hypergraph) -> Self {
        HypergraphFile {
            t: h.t(),
            edges: h.edges().to_vec(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintFile {
    pub vars: Vec<usize>,
    pub perms: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    pub sigma: usize,
    pub variables: Vec<String>,
    pub constraints: Vec<ConstraintFile>,
}

impl GameFile {
    pub fn into_game(self) -> Result<UniqueGame> {
        let cs = self
            .constraints
            .into_iter()
            .map(|c| Constraint {
                vars: c.vars,
                perms: c.perms,
            })
            .collect();
        UniqueGame::new(self.sigma, self.variables, cs)
    }

    pub fn from_game(g: &UniqueGame) -> Self {
        GameFile {
            sigma: g.sigma(),
            variables: g.variables().to_vec(),
            constraints: g
                .constraints()
                .iter()
                .map(|c| ConstraintFile {
                    vars: c.vars.clone(),
                    perms: c.perms.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProofFile {
    pub sigma: usize,
    pub tables: Vec<FunctionFile>,
}

impl ProofFile {
    pub fn into_proof(self) -> Result<PcpProof<f64>> {
        let tables = self.tables.into_iter().map(FunctionFile::into_fn).collect::<Result<_>>()?;
        PcpProof::new(self.sigma, tables)
    }

    pub fn from_proof(p: &PcpProof<f64>) -> Self {
        ProofFile {
            sigma: p.sigma(),
            tables: p
                .tables()
                .iter()
                .map(|f| FunctionFile::compact(f).unwrap_or_else(|| FunctionFile::from_fn(f)))
                .collect(),
        }
    }
}

pub fn parse<F: DeserializeOwned>(text: &str) -> Result<F> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn read<F: DeserializeOwned>(path: &Path) -> Result<F> {
    let text = std::fs::read_to_string(path)?;
    parse(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn read_function(path: &Path) -> Result<BoolFn<f64>> {
    read::<FunctionFile>(path)?.into_fn()
}

pub fn read_collection(path: &Path) -> Result<FnCollection<f64>> {
    read::<CollectionFile>(path)?.into_collection()
}

pub fn read_group_fn(path: &Path) -> Result<GroupFn<f64>> {
    read::<GroupFnFile>(path)?.into_fn()
}

pub fn read_hypergraph(path: &Path) -> Result<Hypergraph> {
    read::<HypergraphFile>(path)?.into_hypergraph()
}

pub fn read_game(path: &Path) -> Result<UniqueGame> {
    read::<GameFile>(path)?.into_game()
}

pub fn read_proof(path: &Path) -> Result<PcpProof<f64>> {
    read::<ProofFile>(path)?.into_proof()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::RandomMode;

    #[test]
    fn function_formats() {
        let f: FunctionFile = parse(r#"{"n": 2, "values": [1, 1, 1, -1]}"#).unwrap();
        let f = f.into_fn().unwrap();
        assert_eq!(f, BoolFn::quadratic_phase(2).unwrap());
        let g: FunctionFile = parse(r#"{"n": 2, "bits": "8"}"#).unwrap();
        assert_eq!(g.into_fn().unwrap(), f);
        assert_eq!(FunctionFile::compact(&f).unwrap().bits.unwrap(), "8");
        let bad: FunctionFile = parse(r#"{"n": 2, "bits": "10"}"#).unwrap();
        assert!(bad.into_fn().is_err());
        let both: FunctionFile = parse(r#"{"n": 1, "bits": "1", "values": [1, 1]}"#).unwrap();
        assert!(both.into_fn().is_err());
        assert!(parse::<FunctionFile>(r#"{"n": 1, "vals": [1, 1]}"#).is_err());
    }

    #[test]
    fn hex_round_trip() {
        for n in 1..=7 {
            let f = BoolFn::<f64>::random(n, RandomMode::Sign, n as u64).unwrap();
            let file = FunctionFile::compact(&f).unwrap();
            assert_eq!(file.into_fn().unwrap(), f);
        }
    }

    #[test]
    fn collection_round_trip() {
        let fs: Vec<BoolFn<f64>> = (0..4).map(|s| BoolFn::chi(3, s).unwrap()).collect();
        let c = FnCollection::new(2, fs).unwrap();
        let file = CollectionFile::from_collection(&c);
        let keys: Vec<&str> = file.functions.keys().map(String::as_str).collect();
        assert_eq!(keys, vec!["", "1", "12", "2"]);
        let text = serde_json::to_string(&file).unwrap();
        assert_eq!(parse::<CollectionFile>(&text).unwrap().into_collection().unwrap(), c);
        let missing: CollectionFile = parse(r#"{"d": 1, "functions": {"": {"n": 1, "values": [1, 1]}}}"#).unwrap();
        assert!(missing.into_collection().is_err());
    }

    #[test]
    fn game_and_hypergraph_files() {
        let g: GameFile = parse(
            r#"{"sigma": 3, "variables": ["v1","v2","v3","v4"], "constraints": [
                {"vars":[0,2], "perms":[[2,1,0],[0,1,2]]},
                {"vars":[1,2], "perms":[[0,2,1],[0,1,2]]},
                {"vars":[1,0], "perms":[[0,1,2],[0,1,2]]},
                {"vars":[1,3], "perms":[[1,2,0],[0,1,2]]}]}"#,
        )
        .unwrap();
        let g = g.into_game().unwrap();
        assert_eq!(crate::ugame::solve_unique_game(&g, crate::Guard::default()).unwrap().strong_value, 0.75);
        let h: HypergraphFile = parse(r#"{"t": 3, "edges": [[1,2],[1,3],[2,3],[1,2,3]]}"#).unwrap();
        assert_eq!(h.into_hypergraph().unwrap(), Hypergraph::complete(3, 3).unwrap());
    }

    #[test]
    fn group_and_proof_files() {
        let f: GroupFnFile = parse(r#"{"blocks": [[3]], "values": [[1,0],[0,1],[0.5,-0.5]]}"#).unwrap();
        let f = f.into_fn().unwrap();
        assert_eq!(f.values()[1], Complex::new(0.0, 1.0));
        let back = GroupFnFile::from_fn(&f);
        assert_eq!(back.values[2], [0.5, -0.5]);
        let p = PcpProof::new(3, vec![BoolFn::long_code(3, 2).unwrap()]).unwrap();
        let text = serde_json::to_string(&ProofFile::from_proof(&p)).unwrap();
        assert_eq!(parse::<ProofFile>(&text).unwrap().into_proof().unwrap(), p);
    }
}
