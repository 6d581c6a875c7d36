use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};

/// A simple undirected graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Rejects self-loops, duplicate edges and out-of-range endpoints.
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &edges {
            check_edge(n, u, v, &mut seen).map_err(Error::InvalidParameter)?;
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        Ok(Self { n, edges, adjacency })
    }

    /// Path `0 − 1 − … − (n−1)`.
    pub fn path(n: usize) -> Self {
        Self::new(n, (1..n).map(|v| (v - 1, v)).collect()).expect("path is simple")
    }

    /// Cycle on `n ≥ 3` vertices.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameter(format!("cycle needs at least 3 vertices, got {n}")));
        }
        Self::new(n, (0..n).map(|v| (v, (v + 1) % n)).collect())
    }

    /// Parses the edge-list format: a header line `n m`, then `m` lines
    /// `u v` with 0-indexed endpoints. Blank lines and `#` comments are
    /// skipped.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse { path: path.to_path_buf(), line, message };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        let (header_line, header) = lines.next().ok_or_else(|| err(1, "missing header \"n m\"".into()))?;
        let (n, m) = parse_pair(header).map_err(|e| err(header_line, format!("header: {e}")))?;

        let mut seen = HashSet::new();
        let mut edges = Vec::with_capacity(m);
        for (line, content) in lines.by_ref().take(m) {
            let (u, v) = parse_pair(content).map_err(|e| err(line, e))?;
            check_edge(n, u, v, &mut seen).map_err(|e| err(line, e))?;
            edges.push((u, v));
        }
        if edges.len() < m {
            return Err(err(text.lines().count(), format!("expected {m} edges, found {}", edges.len())));
        }
        if let Some((line, _)) = lines.next() {
            return Err(err(line, format!("more than the declared {m} edges")));
        }
        Self::new(n, edges)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text, path)
    }

    pub fn to_edge_list(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.edges.len());
        for (u, v) in &self.edges {
            s.push_str(&format!("{u} {v}\n"));
        }
        s
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }
}

fn parse_pair(s: &str) -> std::result::Result<(usize, usize), String> {
    let fields: Vec<&str> = s.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(format!("expected two integers, got {s:?}"));
    }
    let num = |t: &str| t.parse::<usize>().map_err(|_| format!("not a non-negative integer: {t:?}"));
    Ok((num(fields[0])?, num(fields[1])?))
}

fn check_edge(n: usize, u: usize, v: usize, seen: &mut HashSet<(usize, usize)>) -> std::result::Result<(), String> {
    if u >= n || v >= n {
        return Err(format!("edge ({u}, {v}) has an endpoint outside 0..{n}"));
    }
    if u == v {
        return Err(format!("self-loop at vertex {u}"));
    }
    if !seen.insert((u.min(v), u.max(v))) {
        return Err(format!("duplicate edge ({u}, {v})"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Graph> {
        Graph::parse(text, Path::new("g.txt"))
    }

    #[test]
    fn parses_edge_list() {
        let g = parse("4 4\n0 1\n1 2\n2 3\n3 0\n").unwrap();
        assert_eq!(g, Graph::cycle(4).unwrap());
        assert_eq!(g.max_degree(), 2);
        assert_eq!(parse(&g.to_edge_list()).unwrap(), g);
        let with_comments = parse("# a path\n3 2\n\n0 1 # first\n1 2\n").unwrap();
        assert_eq!(with_comments, Graph::path(3));
    }

    #[test]
    fn reports_line_numbers() {
        let line_of = |text: &str| match parse(text) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        };
        assert_eq!(line_of("3 2\n0 1\n1 1\n"), 3);
        assert_eq!(line_of("3 2\n0 1\n1 0\n"), 3);
        assert_eq!(line_of("3 2\n0 1\n1 7\n"), 3);
        assert_eq!(line_of("3\n"), 1);
        assert_eq!(line_of("3 1\n0 x\n"), 2);
        assert_eq!(line_of("3 1\n0 1\n1 2\n"), 3);
        assert!(matches!(parse("3 3\n0 1\n"), Err(Error::Parse { .. })));
        assert!(parse("").is_err());
    }

    #[test]
    fn constructor_rejects_bad_edges() {
        assert!(Graph::new(2, vec![(0, 0)]).is_err());
        assert!(Graph::new(2, vec![(0, 1), (1, 0)]).is_err());
        assert!(Graph::new(2, vec![(0, 2)]).is_err());
        assert!(Graph::cycle(2).is_err());
    }
}
