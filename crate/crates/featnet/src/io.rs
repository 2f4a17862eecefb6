//! File formats: TSV datasets with arbitrary string ids, matrix persistence,
//! scored-pair files and CSV exports of curves and reports.
//!
//! All files are UTF-8 with tab separators and `\n` line endings. Floats are
//! written with the shortest decimal that round-trips, so equal inputs give
//! byte-identical outputs.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::estimators::LabeledExample;
use crate::eval::{EvalReport, PrCurve, ScoredPair};
use crate::features::FeatureAssignment;
use crate::graph::FeatureGraph;
use crate::matrix::{InteractionMatrix, DEFAULT_DENSE_BUDGET};

/// Input locations of a dataset: an arc list and a node-feature incidence
/// list, both TSV with free-form string ids.
#[derive(Debug, Clone)]
pub struct DatasetPaths {
    pub edges: PathBuf,
    pub features: PathBuf,
}

/// A parsed dataset with its id dictionaries. `node_ids[i]` is the original
/// string id of dense node `i`, likewise `feature_ids`.
#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub graph: FeatureGraph,
    pub features: FeatureAssignment,
    pub node_ids: Vec<String>,
    pub feature_ids: Vec<String>,
    /// Duplicate arc lines collapsed during parsing.
    pub duplicate_arcs: u64,
    /// Duplicate incidence lines collapsed during parsing.
    pub duplicate_incidences: u64,
}

struct Interner {
    ids: Vec<String>,
    index: HashMap<String, u32>,
}

impl Interner {
    fn new() -> Self {
        Interner {
            ids: Vec::new(),
            index: HashMap::new(),
        }
    }

    fn intern(&mut self, id: &str) -> u32 {
        if let Some(&dense) = self.index.get(id) {
            return dense;
        }
        let dense = self.ids.len() as u32;
        self.ids.push(id.to_string());
        self.index.insert(id.to_string(), dense);
        dense
    }
}

fn two_fields<'a>(line: &'a str, path: &Path, lineno: usize) -> Result<(&'a str, &'a str)> {
    let mut it = line.split('\t');
    match (it.next(), it.next(), it.next()) {
        (Some(a), Some(b), None) if !a.is_empty() && !b.is_empty() => Ok((a, b)),
        _ => Err(Error::Parse {
            path: path.to_path_buf(),
            line: lineno,
            msg: format!("expected two tab-separated fields, got {line:?}"),
        }),
    }
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    BufReader::new(file)
        .lines()
        .collect::<std::io::Result<_>>()
        .map_err(|e| Error::io(path, e))
}

/// Path of the id-mapping file written next to a dataset file.
pub fn mapping_path(data_path: &Path) -> PathBuf {
    let mut name = data_path.as_os_str().to_os_string();
    name.push(".idmap");
    PathBuf::from(name)
}

fn write_mapping(data_path: &Path, ids: &[String]) -> Result<()> {
    let path = mapping_path(data_path);
    let mut out = BufWriter::new(File::create(&path).map_err(|e| Error::io(&path, e))?);
    for (dense, id) in ids.iter().enumerate() {
        writeln!(out, "{id}\t{dense}").map_err(|e| Error::io(&path, e))?;
    }
    out.flush().map_err(|e| Error::io(&path, e))
}

/// When the ids are exactly the numerals `0..n-1`, returns the map from
/// dense (first-occurrence) id to the numeric id; identifiers then keep
/// their own numbering, which makes numeric datasets round-trip exactly.
fn numeric_relabeling(ids: &[String]) -> Option<Vec<u32>> {
    let mut relabel = Vec::with_capacity(ids.len());
    let mut seen = vec![false; ids.len()];
    for id in ids {
        let value: usize = id.parse().ok()?;
        // reject non-canonical spellings like "01"
        if value.to_string() != *id || value >= ids.len() || seen[value] {
            return None;
        }
        seen[value] = true;
        relabel.push(value as u32);
    }
    Some(relabel)
}

fn reorder_ids(interner: &mut Interner, relabel: &[u32]) {
    let mut ids = vec![String::new(); interner.ids.len()];
    for (dense, id) in interner.ids.drain(..).enumerate() {
        ids[relabel[dense] as usize] = id;
    }
    interner.ids = ids;
}

/// Loads a dataset, densifying string ids in first-occurrence order (edge
/// file first, then feature file); when the ids already are the numerals
/// `0..n-1` their own numbering is kept. Nodes appearing only in the feature
/// file are kept as isolated nodes, and a `#node\t<id>` line declares a node
/// with neither arcs nor features. The string-to-dense maps are persisted
/// next to each input as `<file>.idmap`.
pub fn load_dataset(paths: &DatasetPaths) -> Result<LoadedDataset> {
    let mut nodes = Interner::new();
    let mut raw_arcs: Vec<(u32, u32)> = Vec::new();
    for (lineno, line) in read_lines(&paths.edges)?.iter().enumerate() {
        if line.is_empty() {
            continue;
        }
        if let Some(id) = line.strip_prefix("#node\t") {
            nodes.intern(id);
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let (src, dst) = two_fields(line, &paths.edges, lineno + 1)?;
        raw_arcs.push((nodes.intern(src), nodes.intern(dst)));
    }
    let mut feats = Interner::new();
    let mut raw_incidences: Vec<(u32, u32)> = Vec::new();
    for (lineno, line) in read_lines(&paths.features)?.iter().enumerate() {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (node, feat) = two_fields(line, &paths.features, lineno + 1)?;
        raw_incidences.push((nodes.intern(node), feats.intern(feat)));
    }
    if let Some(relabel) = numeric_relabeling(&nodes.ids) {
        for arc in &mut raw_arcs {
            arc.0 = relabel[arc.0 as usize];
            arc.1 = relabel[arc.1 as usize];
        }
        for inc in &mut raw_incidences {
            inc.0 = relabel[inc.0 as usize];
        }
        reorder_ids(&mut nodes, &relabel);
    }
    if let Some(relabel) = numeric_relabeling(&feats.ids) {
        for inc in &mut raw_incidences {
            inc.1 = relabel[inc.1 as usize];
        }
        reorder_ids(&mut feats, &relabel);
    }
    let n = nodes.ids.len();
    let m = feats.ids.len();
    let graph = FeatureGraph::new(n, raw_arcs.iter().copied())?;
    let features = FeatureAssignment::new(n, m, raw_incidences.iter().copied())?;
    let duplicate_arcs = raw_arcs.len() as u64 - graph.num_arcs();
    let kept: u64 = features.incidences().count() as u64;
    let duplicate_incidences = raw_incidences.len() as u64 - kept;
    write_mapping(&paths.edges, &nodes.ids)?;
    write_mapping(&paths.features, &feats.ids)?;
    Ok(LoadedDataset {
        graph,
        features,
        node_ids: nodes.ids,
        feature_ids: feats.ids,
        duplicate_arcs,
        duplicate_incidences,
    })
}

/// Writes a dataset with plain numeric ids, the inverse of [`load_dataset`]
/// for generated data. Nodes that appear in no arc and carry no feature get
/// a `#node\t<id>` declaration so the node count survives a round trip.
pub fn save_dataset(
    g: &FeatureGraph,
    z: &FeatureAssignment,
    paths: &DatasetPaths,
) -> Result<()> {
    let mut mentioned = vec![false; g.n()];
    for (src, dst) in g.arcs() {
        mentioned[src as usize] = true;
        mentioned[dst as usize] = true;
    }
    for (node, _) in z.incidences() {
        mentioned[node as usize] = true;
    }
    let path = &paths.edges;
    let mut out = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    for (node, seen) in mentioned.iter().enumerate() {
        if !seen {
            writeln!(out, "#node\t{node}").map_err(|e| Error::io(path, e))?;
        }
    }
    for (src, dst) in g.arcs() {
        writeln!(out, "{src}\t{dst}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))?;

    let path = &paths.features;
    let mut out = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    for (node, feat) in z.incidences() {
        writeln!(out, "{node}\t{feat}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

const MATRIX_MAGIC: &str = "#featnet-matrix";

/// Writes a matrix as a sparse TSV: a header carrying the dimension, the
/// symmetry flag and the background value, then one `h\tk\tvalue` line per
/// entry that differs from the background, sorted by `(h, k)`.
pub fn save_matrix(w: &InteractionMatrix, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    writeln!(
        out,
        "{MATRIX_MAGIC}\tm={}\tsymmetric={}\tbackground={}",
        w.m(),
        u8::from(w.is_symmetric()),
        w.background()
    )
    .map_err(|e| Error::io(path, e))?;
    for (h, k, value) in w.entries() {
        writeln!(out, "{h}\t{k}\t{value}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

pub fn load_matrix(path: &Path) -> Result<InteractionMatrix> {
    let lines = read_lines(path)?;
    let header = lines
        .first()
        .ok_or_else(|| parse_err(path, 1, "empty matrix file"))?;
    let fields: Vec<&str> = header.split('\t').collect();
    if fields.len() != 4 || fields[0] != MATRIX_MAGIC {
        return Err(parse_err(path, 1, format!("bad matrix header {header:?}")));
    }
    let field = |i: usize, prefix: &str| -> Result<&str> {
        fields[i]
            .strip_prefix(prefix)
            .ok_or_else(|| parse_err(path, 1, format!("expected {prefix}... in header")))
    };
    let m: usize = field(1, "m=")?
        .parse()
        .map_err(|e| parse_err(path, 1, format!("bad m: {e}")))?;
    let symmetric = match field(2, "symmetric=")? {
        "0" => false,
        "1" => true,
        other => return Err(parse_err(path, 1, format!("bad symmetric flag {other:?}"))),
    };
    let background: f64 = field(3, "background=")?
        .parse()
        .map_err(|e| parse_err(path, 1, format!("bad background: {e}")))?;
    let mut w = InteractionMatrix::filled(m, background, DEFAULT_DENSE_BUDGET);
    w.set_symmetric(symmetric);
    for (lineno, line) in lines.iter().enumerate().skip(1) {
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split('\t').collect();
        if parts.len() != 3 {
            return Err(parse_err(path, lineno + 1, format!("bad entry {line:?}")));
        }
        let h: u32 = parts[0]
            .parse()
            .map_err(|e| parse_err(path, lineno + 1, format!("bad row id: {e}")))?;
        let k: u32 = parts[1]
            .parse()
            .map_err(|e| parse_err(path, lineno + 1, format!("bad column id: {e}")))?;
        let value: f64 = parts[2]
            .parse()
            .map_err(|e| parse_err(path, lineno + 1, format!("bad value: {e}")))?;
        w.try_set(h, k, value)
            .map_err(|e| parse_err(path, lineno + 1, e.to_string()))?;
    }
    Ok(w)
}

/// Writes scored pairs as `src\tdst\tscore\tlabel` with labels `+1`/`-1`.
pub fn save_scored_pairs(pairs: &[ScoredPair], path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    for p in pairs {
        let label = if p.label > 0 { "+1" } else { "-1" };
        writeln!(out, "{}\t{}\t{}\t{}", p.src, p.dst, p.score, label)
            .map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn load_scored_pairs(path: &Path) -> Result<Vec<ScoredPair>> {
    let mut pairs = Vec::new();
    for (lineno, line) in read_lines(path)?.iter().enumerate() {
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split('\t').collect();
        if parts.len() != 4 {
            return Err(parse_err(
                path,
                lineno + 1,
                format!("expected src, dst, score, label, got {line:?}"),
            ));
        }
        let src: u32 = parts[0]
            .parse()
            .map_err(|e| parse_err(path, lineno + 1, format!("bad src: {e}")))?;
        let dst: u32 = parts[1]
            .parse()
            .map_err(|e| parse_err(path, lineno + 1, format!("bad dst: {e}")))?;
        let score: f64 = parts[2]
            .parse()
            .map_err(|e| parse_err(path, lineno + 1, format!("bad score: {e}")))?;
        let label: i8 = match parts[3] {
            "+1" | "1" => 1,
            "-1" => -1,
            other => return Err(parse_err(path, lineno + 1, format!("bad label {other:?}"))),
        };
        pairs.push(ScoredPair {
            src,
            dst,
            score,
            label,
        });
    }
    Ok(pairs)
}

/// Labeled (unscored) examples reuse the scored-pair format with score 0.
pub fn examples_to_pairs(examples: &[LabeledExample]) -> Vec<ScoredPair> {
    examples
        .iter()
        .map(|ex| ScoredPair {
            src: ex.src,
            dst: ex.dst,
            score: 0.0,
            label: ex.label,
        })
        .collect()
}

/// Writes a curve as CSV with a `recall,precision` header row.
pub fn save_curve(curve: &PrCurve, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    writeln!(out, "recall,precision").map_err(|e| Error::io(path, e))?;
    for &(recall, precision) in &curve.points {
        writeln!(out, "{recall},{precision}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Writes a report as CSV: a `fold,aupr` header, one row per evaluated fold
/// (skipped folds carry no row), then a trailing row with the mean and the
/// population standard deviation.
pub fn save_report(report: &EvalReport, folds: &[usize], path: &Path) -> Result<()> {
    debug_assert_eq!(folds.len(), report.per_fold_aupr.len());
    let mut out = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    writeln!(out, "fold,aupr").map_err(|e| Error::io(path, e))?;
    for (fold, area) in folds.iter().zip(&report.per_fold_aupr) {
        writeln!(out, "{fold},{area}").map_err(|e| Error::io(path, e))?;
    }
    writeln!(out, "{},{}", report.mean, report.std).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;
    use tempfile::TempDir;

    fn dataset(dir: &TempDir, edges: &str, features: &str) -> DatasetPaths {
        let paths = DatasetPaths {
            edges: dir.path().join("edges.tsv"),
            features: dir.path().join("features.tsv"),
        };
        fs::write(&paths.edges, edges).unwrap();
        fs::write(&paths.features, features).unwrap();
        paths
    }

    #[test]
    fn minimal_parse() {
        let dir = TempDir::new().unwrap();
        let paths = dataset(&dir, "0\t1\n", "0\ta\n1\tb\n");
        let ds = load_dataset(&paths).unwrap();
        assert_eq!(ds.graph.n(), 2);
        assert_eq!(ds.graph.num_arcs(), 1);
        assert_eq!(ds.features.m(), 2);
        assert_eq!(ds.duplicate_arcs, 0);
        assert!(mapping_path(&paths.edges).exists());
        let map = fs::read_to_string(mapping_path(&paths.features)).unwrap();
        assert_eq!(map, "a\t0\nb\t1\n");
    }

    #[test]
    fn duplicates_counted_once() {
        let dir = TempDir::new().unwrap();
        let paths = dataset(&dir, "x\ty\nx\ty\n", "x\tf\nx\tf\n");
        let ds = load_dataset(&paths).unwrap();
        assert_eq!(ds.graph.num_arcs(), 1);
        assert_eq!(ds.duplicate_arcs, 1);
        assert_eq!(ds.duplicate_incidences, 1);
    }

    #[test]
    fn feature_only_node_is_isolated() {
        let dir = TempDir::new().unwrap();
        let paths = dataset(&dir, "a\tb\n", "c\tf\n");
        let ds = load_dataset(&paths).unwrap();
        assert_eq!(ds.graph.n(), 3);
        assert_eq!(ds.node_ids, vec!["a", "b", "c"]);
        assert_eq!(ds.features.features_of(2), &[0]);
    }

    #[test]
    fn malformed_line_reports_location() {
        let dir = TempDir::new().unwrap();
        let paths = dataset(&dir, "a\tb\nbroken line\n", "");
        match load_dataset(&paths) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn dataset_round_trip() {
        let dir = TempDir::new().unwrap();
        let g = FeatureGraph::new(3, [(0, 1), (2, 2)]).unwrap();
        let z = FeatureAssignment::new(3, 2, [(0, 0), (1, 1), (2, 0)]).unwrap();
        let paths = DatasetPaths {
            edges: dir.path().join("e.tsv"),
            features: dir.path().join("f.tsv"),
        };
        save_dataset(&g, &z, &paths).unwrap();
        let ds = load_dataset(&paths).unwrap();
        assert_eq!(ds.graph, g);
        assert_eq!(ds.features, z);
    }

    #[test]
    fn round_trip_keeps_isolated_nodes_and_numbering() {
        let dir = TempDir::new().unwrap();
        // node 0 never occurs first in the file, node 1 occurs nowhere
        let g = FeatureGraph::new(4, [(3, 0), (2, 3)]).unwrap();
        let z = FeatureAssignment::new(4, 2, [(2, 1), (3, 0)]).unwrap();
        let paths = DatasetPaths {
            edges: dir.path().join("e.tsv"),
            features: dir.path().join("f.tsv"),
        };
        save_dataset(&g, &z, &paths).unwrap();
        let ds = load_dataset(&paths).unwrap();
        assert_eq!(ds.graph, g);
        assert_eq!(ds.features, z);
        assert_eq!(ds.node_ids, vec!["0", "1", "2", "3"]);
        assert_eq!(ds.feature_ids, vec!["0", "1"]);
    }

    #[test]
    fn matrix_round_trip_and_format() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("w.tsv");
        let mut w = InteractionMatrix::filled(8, -50.0, DEFAULT_DENSE_BUDGET);
        w.set(3, 7, -0.5);
        w.set(0, 0, 1.25);
        w.set_symmetric(true);
        save_matrix(&w, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            "#featnet-matrix\tm=8\tsymmetric=1\tbackground=-50\n0\t0\t1.25\n3\t7\t-0.5\n"
        );
        let loaded = load_matrix(&path).unwrap();
        assert!(loaded.same_values(&w));
        assert!(loaded.is_symmetric());
        assert_eq!(loaded.background(), -50.0);
    }

    #[test]
    fn zero_matrix_is_header_only() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("w.tsv");
        save_matrix(&InteractionMatrix::zeros(4), &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, "#featnet-matrix\tm=4\tsymmetric=0\tbackground=0\n");
        let loaded = load_matrix(&path).unwrap();
        assert_eq!(loaded.m(), 4);
        assert!(loaded.same_values(&InteractionMatrix::zeros(4)));
    }

    #[test]
    fn matrix_rejects_garbage() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("w.tsv");
        fs::write(&path, "not a matrix\n").unwrap();
        assert!(load_matrix(&path).is_err());
        fs::write(&path, "#featnet-matrix\tm=2\tsymmetric=0\tbackground=0\n5\t0\t1\n").unwrap();
        assert!(load_matrix(&path).is_err());
    }

    #[test]
    fn scored_pairs_round_trip() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("pairs.tsv");
        let pairs = vec![
            ScoredPair {
                src: 0,
                dst: 3,
                score: 1.5,
                label: 1,
            },
            ScoredPair {
                src: 2,
                dst: 2,
                score: -0.25,
                label: -1,
            },
        ];
        save_scored_pairs(&pairs, &path).unwrap();
        assert_eq!(load_scored_pairs(&path).unwrap(), pairs);
    }

    #[test]
    fn curve_and_report_csv() {
        let dir = TempDir::new().unwrap();
        let scored = vec![
            ScoredPair {
                src: 0,
                dst: 1,
                score: 2.0,
                label: 1,
            },
            ScoredPair {
                src: 1,
                dst: 0,
                score: 1.0,
                label: -1,
            },
        ];
        let curve = crate::eval::pr_curve(&scored).unwrap();
        let curve_path = dir.path().join("curve.csv");
        save_curve(&curve, &curve_path).unwrap();
        let text = fs::read_to_string(&curve_path).unwrap();
        assert!(text.starts_with("recall,precision\n0,1\n"));

        let report = EvalReport {
            per_fold_aupr: vec![0.5, 1.0],
            mean: 0.75,
            std: 0.25,
            skipped_folds: vec![1],
            negative_domain: crate::eval::NegativeDomain::TestInduced,
        };
        let report_path = dir.path().join("report.csv");
        save_report(&report, &[0, 2], &report_path).unwrap();
        let text = fs::read_to_string(&report_path).unwrap();
        assert_eq!(text, "fold,aupr\n0,0.5\n2,1\n0.75,0.25\n");
    }
}
