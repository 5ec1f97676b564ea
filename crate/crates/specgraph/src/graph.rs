//! Weighted undirected graphs and their matrix representations.

use std::collections::BTreeSet;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Weighted undirected graph on vertices `0..n`, no self-loops, all edge
/// weights strictly positive. Edges are stored as `(i, j, w)` with `i < j`,
/// sorted, at most one entry per vertex pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("graph needs at least one vertex".into()));
        }
        let mut sorted: Vec<(usize, usize, f64)> = Vec::new();
        for (i, j, w) in edges {
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            if a == b {
                return Err(Error::InvalidInput(format!("self-loop at vertex {a}")));
            }
            if b >= n {
                return Err(Error::InvalidInput(format!(
                    "edge ({a}, {b}) out of range for {n} vertices"
                )));
            }
            if !(w > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "edge ({a}, {b}) has non-positive weight {w}"
                )));
            }
            sorted.push((a, b, w));
        }
        sorted.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        for pair in sorted.windows(2) {
            if (pair[0].0, pair[0].1) == (pair[1].0, pair[1].1) {
                return Err(Error::InvalidInput(format!(
                    "duplicate edge ({}, {})",
                    pair[0].0, pair[0].1
                )));
            }
        }
        Ok(Graph { n, edges: sorted })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Unordered vertex pairs, weights dropped.
    pub fn edge_pairs(&self) -> BTreeSet<(usize, usize)> {
        self.edges.iter().map(|&(i, j, _)| (i, j)).collect()
    }

    pub fn degrees(&self) -> Vec<f64> {
        let mut deg = vec![0.0; self.n];
        for &(i, j, w) in &self.edges {
            deg[i] += w;
            deg[j] += w;
        }
        deg
    }

    pub fn has_isolated_vertex(&self) -> bool {
        let mut touched = vec![false; self.n];
        for &(i, j, _) in &self.edges {
            touched[i] = true;
            touched[j] = true;
        }
        touched.iter().any(|t| !t)
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 1 {
            return true;
        }
        let mut adj = vec![Vec::new(); self.n];
        for &(i, j, _) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Dense symmetric adjacency matrix with zero diagonal.
    pub fn adjacency(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for &(i, j, w) in &self.edges {
            a[(i, j)] = w;
            a[(j, i)] = w;
        }
        a
    }

    /// Parses the edge-list text format: one `i,j,w` line per edge with
    /// 1-based vertex indices, weight optional (defaults to 1.0), `#` starts
    /// a comment line. The vertex count is the largest index seen unless a
    /// `# n = <count>` header is present.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        let mut declared_n: Option<usize> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                let comment = comment.trim();
                if let Some(rest) = comment.strip_prefix("n =").or(comment.strip_prefix("n=")) {
                    declared_n = Some(rest.trim().parse().map_err(|_| Error::Parse {
                        line: lineno + 1,
                        message: format!("bad vertex count in header: {comment}"),
                    })?);
                }
                continue;
            }
            let mut parts = line.split(',').map(str::trim);
            let parse_idx = |tok: Option<&str>, lineno: usize| -> Result<usize> {
                let tok = tok.ok_or(Error::Parse {
                    line: lineno + 1,
                    message: "expected i,j[,w]".into(),
                })?;
                let idx: usize = tok.parse().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    message: format!("bad vertex index: {tok}"),
                })?;
                if idx == 0 {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        message: "vertex indices are 1-based".into(),
                    });
                }
                Ok(idx - 1)
            };
            let i = parse_idx(parts.next(), lineno)?;
            let j = parse_idx(parts.next(), lineno)?;
            let w = match parts.next() {
                Some(tok) => tok.parse().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    message: format!("bad weight: {tok}"),
                })?,
                None => 1.0,
            };
            if parts.next().is_some() {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: "trailing fields after i,j,w".into(),
                });
            }
            edges.push((i, j, w));
        }
        let max_idx = edges.iter().map(|&(i, j, _)| i.max(j) + 1).max().unwrap_or(1);
        let n = match declared_n {
            Some(n) if n >= max_idx => n,
            Some(n) => {
                return Err(Error::InvalidInput(format!(
                    "declared vertex count {n} smaller than largest edge index {max_idx}"
                )))
            }
            None => max_idx,
        };
        Graph::new(n, edges)
    }

    /// Serializes to the edge-list format accepted by [`Graph::parse_edge_list`].
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("# n = {}\n", self.n);
        for &(i, j, w) in &self.edges {
            out.push_str(&format!("{},{},{}\n", i + 1, j + 1, w));
        }
        out
    }
}

/// Combinatorial Laplacian `L = D - A` of a symmetric adjacency matrix.
pub fn laplacian(adjacency: &DMatrix<f64>) -> DMatrix<f64> {
    let n = adjacency.nrows();
    let mut l = -adjacency.clone();
    for i in 0..n {
        l[(i, i)] = adjacency.row(i).sum() - adjacency[(i, i)];
    }
    l
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn path3() -> Graph {
        Graph::new(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    #[test]
    fn adjacency_two_vertex_edge() {
        let g = Graph::new(2, [(0, 1, 1.0)]).unwrap();
        assert_eq!(g.adjacency(), DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
    }

    #[test]
    fn adjacency_empty_edge_set() {
        let g = Graph::new(3, []).unwrap();
        assert_eq!(g.adjacency(), DMatrix::zeros(3, 3));
    }

    #[test]
    fn adjacency_path3() {
        let expect =
            DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        assert_eq!(path3().adjacency(), expect);
    }

    #[test]
    fn laplacian_two_path() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(laplacian(&a), DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));
    }

    #[test]
    fn laplacian_zero_matrix() {
        assert_eq!(laplacian(&DMatrix::zeros(3, 3)), DMatrix::zeros(3, 3));
    }

    #[test]
    fn laplacian_path3() {
        let expect =
            DMatrix::from_row_slice(3, 3, &[1.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0]);
        assert_eq!(laplacian(&path3().adjacency()), expect);
    }

    #[test]
    fn rejects_self_loop_and_duplicates() {
        assert!(Graph::new(3, [(1, 1, 1.0)]).is_err());
        assert!(Graph::new(3, [(0, 1, 1.0), (1, 0, 2.0)]).is_err());
        assert!(Graph::new(3, [(0, 1, 0.0)]).is_err());
        assert!(Graph::new(2, [(0, 5, 1.0)]).is_err());
    }

    #[test]
    fn edge_list_round_trip() {
        let g = Graph::new(4, [(0, 1, 1.0), (1, 3, 0.25)]).unwrap();
        let text = g.to_edge_list();
        assert_eq!(Graph::parse_edge_list(&text).unwrap(), g);
    }

    #[test]
    fn edge_list_defaults_and_comments() {
        let g = Graph::parse_edge_list("# comment\n1,2\n2,3,0.5\n").unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.edges(), &[(0, 1, 1.0), (1, 2, 0.5)]);
    }

    #[test]
    fn edge_list_rejects_bad_lines() {
        assert!(Graph::parse_edge_list("0,2\n").is_err());
        assert!(Graph::parse_edge_list("1\n").is_err());
        assert!(Graph::parse_edge_list("1,2,3,4\n").is_err());
        assert!(Graph::parse_edge_list("# n = 2\n1,3\n").is_err());
    }

    // Laplacians of random graphs have zero row sums and are PSD.
    #[test]
    fn random_laplacians_are_psd_with_zero_row_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let n = rng.random_range(2..=20);
            let mut edges = Vec::new();
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.random_range(0.0..1.0) < 0.3 {
                        edges.push((i, j, rng.random_range(0.1..2.0)));
                    }
                }
            }
            let g = Graph::new(n, edges).unwrap();
            let l = laplacian(&g.adjacency());
            for i in 0..n {
                assert!(l.row(i).sum().abs() <= 1e-10);
            }
            let eigs = l.clone().symmetric_eigenvalues();
            assert!(eigs.min() >= -1e-8);
        }
    }
}
