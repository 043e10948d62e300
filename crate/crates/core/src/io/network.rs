use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{Group, Table};

/// Which pair of network models the test compares.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetworkMode {
    /// Stochastic block model vs Erdős–Rényi on an undirected simple graph.
    SbmVsErUndirected,
    /// Stochastic block model vs Erdős–Rényi on a directed simple graph.
    SbmVsErDirected,
    /// Partial configuration model vs Erdős–Rényi on a bipartite graph; the
    /// degrees of one layer are the constrained statistics.
    PcmVsErBipartite,
}

/// Edge list plus node labels. In bipartite mode the labels name the two
/// layers and `constrained_layer` (default: the smaller label) selects the
/// layer whose degrees form the groups.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkInput {
    pub edges: Vec<(String, String)>,
    pub partition: BTreeMap<String, String>,
    pub mode: NetworkMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constrained_layer: Option<String>,
}

/// A group of the derived table with the label it came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledGroup {
    pub label: String,
    pub n: usize,
    pub ones: usize,
}

impl NetworkInput {
    /// Reads a bipartite graph from a 0/1 biadjacency CSV without header;
    /// rows are the constrained layer (`r0, r1, ...`), columns the other
    /// (`c0, c1, ...`).
    pub fn from_biadjacency_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let mut partition = BTreeMap::new();
        let mut edges = Vec::new();
        let mut width = None;
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Parse(e.to_string()))?;
            if *width.get_or_insert(record.len()) != record.len() {
                return Err(Error::InvalidNetwork(format!("biadjacency row {i} has {} entries", record.len())));
            }
            let row = format!("r{i}");
            partition.insert(row.clone(), "rows".to_string());
            for (j, v) in record.iter().enumerate() {
                match v {
                    "0" => {}
                    "1" => edges.push((row.clone(), format!("c{j}"))),
                    other => {
                        return Err(Error::InvalidNetwork(format!(
                            "biadjacency entry ({i}, {j}) = {other:?} is not 0 or 1"
                        )))
                    }
                }
            }
        }
        let width = width.ok_or_else(|| Error::InvalidNetwork("empty biadjacency matrix".into()))?;
        for j in 0..width {
            partition.insert(format!("c{j}"), "columns".to_string());
        }
        Ok(NetworkInput {
            edges,
            partition,
            mode: NetworkMode::PcmVsErBipartite,
            constrained_layer: Some("rows".into()),
        })
    }

    /// Reads `u,v` edge rows and `node,block` partition rows.
    pub fn from_csv(edges: &str, partition: &str, mode: NetworkMode) -> Result<Self> {
        Ok(NetworkInput {
            edges: pairs(edges)?,
            partition: pairs(partition)?.into_iter().collect(),
            mode,
            constrained_layer: None,
        })
    }
}

fn pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    reader
        .records()
        .map(|r| {
            let r = r.map_err(|e| Error::Parse(e.to_string()))?;
            if r.len() != 2 {
                return Err(Error::Parse(format!("expected 2 columns, got {}", r.len())));
            }
            Ok((r[0].to_string(), r[1].to_string()))
        })
        .collect()
}

/// Groups of the 2×k table induced by a network, in deterministic order;
/// zero-size groups are dropped with a warning.
pub fn network_groups(net: &NetworkInput) -> Result<Vec<LabeledGroup>> {
    for (u, v) in &net.edges {
        for node in [u, v] {
            if !net.partition.contains_key(node) {
                return Err(Error::InvalidNetwork(format!("node {node:?} has no block label")));
            }
        }
        if u == v {
            return Err(Error::InvalidNetwork(format!("self-loop at node {u:?}")));
        }
    }
    let mut block_sizes: BTreeMap<&str, usize> = BTreeMap::new();
    for block in net.partition.values() {
        *block_sizes.entry(block).or_default() += 1;
    }
    let groups = match net.mode {
        NetworkMode::SbmVsErUndirected => sbm(net, &block_sizes, false)?,
        NetworkMode::SbmVsErDirected => sbm(net, &block_sizes, true)?,
        NetworkMode::PcmVsErBipartite => pcm(net, &block_sizes)?,
    };
    Ok(groups
        .into_iter()
        .filter(|g| {
            if g.n == 0 {
                log::warn!("dropping empty group {}", g.label);
            }
            g.n > 0
        })
        .collect())
}

/// Table of [`network_groups`].
pub fn network_to_table(net: &NetworkInput) -> Result<Table> {
    Table::from_groups(
        network_groups(net)?
            .into_iter()
            .map(|g| Group { n: g.n, ones: g.ones })
            .collect(),
    )
}

fn sbm(net: &NetworkInput, sizes: &BTreeMap<&str, usize>, directed: bool) -> Result<Vec<LabeledGroup>> {
    let mut seen = BTreeSet::new();
    let mut counts: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    for (u, v) in &net.edges {
        let key = if directed || u < v { (u, v) } else { (v, u) };
        if !seen.insert(key) {
            return Err(Error::Multigraph(u.clone(), v.clone()));
        }
        let (bu, bv) = (net.partition[u].as_str(), net.partition[v].as_str());
        let pair = if directed || bu <= bv { (bu, bv) } else { (bv, bu) };
        *counts.entry(pair).or_default() += 1;
    }
    let blocks: Vec<(&str, usize)> = sizes.iter().map(|(b, s)| (*b, *s)).collect();
    let mut out = Vec::new();
    for (i, &(a, sa)) in blocks.iter().enumerate() {
        let start = if directed { 0 } else { i };
        for &(b, sb) in &blocks[start..] {
            let n = match (a == b, directed) {
                (true, true) => sa * (sa - 1),
                (true, false) => sa * (sa - 1) / 2,
                (false, _) => sa * sb,
            };
            out.push(LabeledGroup {
                label: format!("{a}|{b}"),
                n,
                ones: counts.get(&(a, b)).copied().unwrap_or(0),
            });
        }
    }
    Ok(out)
}

fn pcm(net: &NetworkInput, sizes: &BTreeMap<&str, usize>) -> Result<Vec<LabeledGroup>> {
    if sizes.len() != 2 {
        return Err(Error::InvalidNetwork(format!(
            "bipartite mode needs exactly two layer labels, got {}",
            sizes.len()
        )));
    }
    let layer = match &net.constrained_layer {
        Some(l) if sizes.contains_key(l.as_str()) => l.as_str(),
        Some(l) => return Err(Error::InvalidNetwork(format!("unknown layer {l:?}"))),
        None => sizes.keys().next().copied().expect("two layers"),
    };
    let other = sizes.keys().copied().find(|l| *l != layer).expect("two layers");
    let mut seen = BTreeSet::new();
    let mut degree: BTreeMap<&str, usize> = net
        .partition
        .iter()
        .filter(|(_, l)| l.as_str() == layer)
        .map(|(node, _)| (node.as_str(), 0))
        .collect();
    for (u, v) in &net.edges {
        let (lu, lv) = (net.partition[u].as_str(), net.partition[v].as_str());
        if lu == lv {
            return Err(Error::InvalidNetwork(format!("edge {u:?}-{v:?} lies within one layer")));
        }
        let node = if lu == layer { u } else { v };
        let key = if lu == layer { (u, v) } else { (v, u) };
        if !seen.insert(key) {
            return Err(Error::Multigraph(u.clone(), v.clone()));
        }
        *degree.get_mut(node.as_str()).expect("labelled node") += 1;
    }
    Ok(degree
        .into_iter()
        .map(|(node, d)| LabeledGroup {
            label: node.to_string(),
            n: sizes[other],
            ones: d,
        })
        .collect())
}
