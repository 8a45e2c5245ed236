//! Simple undirected graphs stored as adjacency bitsets.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::{mask, BitString, SiteSet, MAX_SITES};
use crate::error::{Error, Result};
use crate::pauli::{PauliWord, Phase};

/// A simple undirected graph on vertices `0..n`, `1 ≤ n ≤ 64`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    adj: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<[usize; 2]>,
}

impl Graph {
    /// Edgeless graph on `n` vertices.
    pub fn empty(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("a graph needs at least one vertex".into()));
        }
        if n > MAX_SITES {
            return Err(Error::Capacity {
                what: "graph vertices",
                requested: n as u128,
                limit: MAX_SITES as u128,
            });
        }
        Ok(Self { n, adj: vec![0; n] })
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n)?;
        for (pos, &(a, b)) in edges.iter().enumerate() {
            g.insert_edge(a, b)
                .map_err(|e| Error::parse(pos, format!("edge {pos} [{a},{b}]: {e}")))?;
        }
        Ok(g)
    }

    fn insert_edge(&mut self, a: usize, b: usize) -> Result<()> {
        for v in [a, b] {
            if v >= self.n {
                return Err(Error::IndexOutOfRange { index: v, len: self.n });
            }
        }
        if a == b {
            return Err(Error::InvalidInput(format!("self-loop at vertex {a}")));
        }
        if self.has_edge(a, b) {
            return Err(Error::InvalidInput(format!("duplicate edge {{{a},{b}}}")));
        }
        self.adj[a] |= 1 << b;
        self.adj[b] |= 1 << a;
        Ok(())
    }

    pub fn path(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|k| (k - 1, k)).collect();
        Self::from_edges(n, &edges)
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidInput("a cycle needs at least 3 vertices".into()));
        }
        let mut edges: Vec<_> = (1..n).map(|k| (k - 1, k)).collect();
        edges.push((n - 1, 0));
        Self::from_edges(n, &edges)
    }

    /// Star with centre 0.
    pub fn star(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|k| (0, k)).collect();
        Self::from_edges(n, &edges)
    }

    pub fn complete(n: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for b in 1..n {
            for a in 0..b {
                edges.push((a, b));
            }
        }
        Self::from_edges(n, &edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.n && b < self.n && (self.adj[a] >> b) & 1 == 1
    }

    pub fn neighbors(&self, v: usize) -> Result<SiteSet> {
        self.check_vertex(v)?;
        Ok(SiteSet(self.adj[v]))
    }

    pub fn degree(&self, v: usize) -> Result<usize> {
        Ok(self.neighbors(v)?.len())
    }

    /// Raw adjacency rows; bit `m` of row `k` is set iff `{k, m}` is an edge.
    pub fn adjacency(&self) -> &[u64] {
        &self.adj
    }

    /// Edges `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.n {
            for b in SiteSet(self.adj[a] & !mask(a + 1)).iter() {
                out.push((a, b));
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|r| r.count_ones() as usize).sum::<usize>() / 2
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.n {
            Err(Error::IndexOutOfRange { index: v, len: self.n })
        } else {
            Ok(())
        }
    }

    /// GF(2) product of the adjacency matrix with `b`.
    pub(crate) fn adj_times(&self, b: u64) -> u64 {
        SiteSet(b).iter().fold(0, |acc, k| acc ^ self.adj[k])
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = 1u64;
        let mut frontier = 1u64;
        while frontier != 0 {
            let next = self.adj_reach(frontier) & !seen;
            seen |= next;
            frontier = next;
        }
        seen == mask(self.n)
    }

    fn adj_reach(&self, set: u64) -> u64 {
        SiteSet(set).iter().fold(0, |acc, k| acc | self.adj[k])
    }

    /// The generator `X_i Z_{N(i)}`.
    pub fn stabilizer_generator(&self, i: usize) -> Result<PauliWord> {
        self.check_vertex(i)?;
        PauliWord::from_parts(self.n, 1 << i, self.adj[i], Phase::ONE)
    }

    /// Product of the generators selected by `b`, taken in ascending vertex
    /// order.
    pub fn stabilizer_element(&self, b: BitString) -> Result<PauliWord> {
        Error::check_dim(self.n, b.len())?;
        let mut acc = PauliWord::identity(self.n)?;
        for i in b.iter_ones() {
            acc = acc.mul_unchecked(&self.stabilizer_generator(i)?);
        }
        Ok(acc)
    }

    /// Complements the subgraph induced on `N(v)`; `self` is left untouched.
    pub fn local_complement(&self, v: usize) -> Result<Graph> {
        let nb = self.neighbors(v)?;
        let mut adj = self.adj.clone();
        for a in nb.iter() {
            adj[a] ^= nb.0 & !(1 << a);
        }
        Ok(Graph { n: self.n, adj })
    }

    pub fn to_json(&self) -> String {
        let edges = self.edges().into_iter().map(|(a, b)| [a, b]).collect();
        serde_json::to_string(&GraphJson { n: self.n, edges }).expect("graph serializes")
    }

    /// Standard graph6 encoding (without header).
    pub fn to_graph6(&self) -> String {
        let mut out = String::new();
        if self.n <= 62 {
            out.push((self.n as u8 + 63) as char);
        } else {
            out.push('~');
            for shift in [12, 6, 0] {
                out.push((((self.n >> shift) & 63) as u8 + 63) as char);
            }
        }
        let mut chunk = 0u8;
        let mut filled = 0;
        for b in 1..self.n {
            for a in 0..b {
                chunk = (chunk << 1) | self.has_edge(a, b) as u8;
                filled += 1;
                if filled == 6 {
                    out.push((chunk + 63) as char);
                    chunk = 0;
                    filled = 0;
                }
            }
        }
        if filled > 0 {
            out.push(((chunk << (6 - filled)) + 63) as char);
        }
        out
    }

    pub fn from_graph6(text: &str) -> Result<Self> {
        let body = text.strip_prefix(">>graph6<<").unwrap_or(text);
        let offset = text.len() - body.len();
        let bytes = body.as_bytes();
        let sextet = |pos: usize| -> Result<u8> {
            match bytes.get(pos) {
                Some(&c) if (63..=126).contains(&c) => Ok(c - 63),
                Some(&c) => Err(Error::parse(
                    offset + pos,
                    format!("invalid graph6 byte {:?}", c as char),
                )),
                None => Err(Error::parse(offset + pos, "truncated graph6 string")),
            }
        };
        let first = sextet(0)?;
        let (n, mut pos) = if first < 63 {
            (first as usize, 1)
        } else {
            if bytes.get(1) == Some(&126) {
                return Err(Error::parse(offset + 1, "graph6 order exceeds supported range"));
            }
            let mut n = 0usize;
            for p in 1..4 {
                n = (n << 6) | sextet(p)? as usize;
            }
            (n, 4)
        };
        if n == 0 {
            return Err(Error::parse(offset, "graph6 graph with no vertices"));
        }
        if n > MAX_SITES {
            return Err(Error::Capacity {
                what: "graph vertices",
                requested: n as u128,
                limit: MAX_SITES as u128,
            });
        }
        let mut g = Self::empty(n)?;
        let mut bit = 6;
        let mut cur = 0u8;
        for b in 1..n {
            for a in 0..b {
                if bit == 6 {
                    cur = sextet(pos)?;
                    pos += 1;
                    bit = 0;
                }
                if (cur >> (5 - bit)) & 1 == 1 {
                    g.adj[a] |= 1 << b;
                    g.adj[b] |= 1 << a;
                }
                bit += 1;
            }
        }
        if pos != bytes.len() {
            return Err(Error::parse(offset + pos, "trailing bytes after graph6 data"));
        }
        Ok(g)
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} edges=", self.n)?;
        let edges = self.edges();
        f.write_str("[")?;
        for (i, (a, b)) in edges.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}-{b}")?;
        }
        f.write_str("]")
    }
}

impl Serialize for Graph {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let edges = self.edges().into_iter().map(|(a, b)| [a, b]).collect();
        GraphJson { n: self.n, edges }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = GraphJson::deserialize(deserializer)?;
        let edges: Vec<_> = raw.edges.iter().map(|e| (e[0], e[1])).collect();
        Graph::from_edges(raw.n, &edges).map_err(serde::de::Error::custom)
    }
}

/// Parses a graph given either as JSON `{"n":…,"edges":[[a,b],…]}` or as a
/// graph6 string (optionally with the `>>graph6<<` header).
pub fn parse_graph(text: &str) -> Result<Graph> {
    let trimmed = text.trim();
    if trimmed.starts_with('{') {
        let raw: GraphJson = serde_json::from_str(trimmed).map_err(|e| {
            Error::parse(e.column().saturating_sub(1), format!("line {}: {e}", e.line()))
        })?;
        let edges: Vec<_> = raw.edges.iter().map(|e| (e[0], e[1])).collect();
        Graph::from_edges(raw.n, &edges)
    } else {
        Graph::from_graph6(trimmed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn json_path_and_single_vertex() {
        let g = parse_graph(r#"{"n":3,"edges":[[0,1],[1,2]]}"#).unwrap();
        assert_eq!(g, Graph::path(3).unwrap());
        let one = parse_graph(r#"{"n":1,"edges":[]}"#).unwrap();
        assert_eq!(one.n(), 1);
        assert_eq!(one.edge_count(), 0);
    }

    #[test]
    fn json_errors_carry_positions() {
        let e = parse_graph(r#"{"n":3,"edges":[[0,1],[1,1]]}"#).unwrap_err();
        assert!(matches!(e, Error::Parse { position: 1, .. }), "{e}");
        let e = parse_graph(r#"{"n":3,"edges":[[0,1],[1,0]]}"#).unwrap_err();
        assert!(matches!(e, Error::Parse { position: 1, .. }), "{e}");
        let e = parse_graph(r#"{"n":3,"edges":[[0,3]]}"#).unwrap_err();
        assert!(matches!(e, Error::Parse { position: 0, .. }), "{e}");
        assert!(matches!(parse_graph(r#"{"n":3,"edges":[[0,1]"#), Err(Error::Parse { .. })));
        assert!(parse_graph(r#"{"n":0,"edges":[]}"#).is_err());
    }

    #[test]
    fn graph6_star() {
        let g = parse_graph("D?{").unwrap();
        assert_eq!(g.edges(), vec![(0, 4), (1, 4), (2, 4), (3, 4)]);
        assert_eq!(g.to_graph6(), "D?{");
        assert_eq!(parse_graph(">>graph6<<D?{").unwrap(), g);
        assert!(matches!(parse_graph("D?"), Err(Error::Parse { position: 2, .. })));
        assert!(matches!(parse_graph("D? "), Err(Error::Parse { position: 2, .. })));
        assert!(matches!(parse_graph("D?{?"), Err(Error::Parse { position: 3, .. })));
    }

    #[test]
    fn generators_match_printed_words() {
        let p3 = Graph::path(3).unwrap();
        let gens: Vec<String> = (0..3)
            .map(|i| p3.stabilizer_generator(i).unwrap().to_string())
            .collect();
        assert_eq!(gens, ["XZI", "ZXZ", "IZX"]);
        assert_eq!(
            Graph::empty(3).unwrap().stabilizer_generator(0).unwrap().to_string(),
            "XII"
        );
        let p5 = Graph::path(5).unwrap();
        assert_eq!(p5.stabilizer_generator(2).unwrap().to_string(), "IZXZI");
        assert!(p5.stabilizer_generator(5).is_err());
    }

    #[test]
    fn stabilizer_elements_match_printed_words() {
        let p3 = Graph::path(3).unwrap();
        let words: Vec<String> = ["110", "101", "011", "111"]
            .iter()
            .map(|b| p3.stabilizer_element(bs(b)).unwrap().to_string())
            .collect();
        assert_eq!(words, ["YYZ", "XIX", "ZYY", "-YXY"]);
        assert_eq!(p3.stabilizer_element(bs("000")).unwrap(), PauliWord::identity(3).unwrap());

        let p5 = Graph::path(5).unwrap();
        assert_eq!(p5.stabilizer_element(bs("11011")).unwrap().to_string(), "YYIYY");
        assert_eq!(p5.stabilizer_element(bs("11110")).unwrap().to_string(), "YXXYZ");
        assert_eq!(p5.stabilizer_element(bs("11111")).unwrap().to_string(), "-YXXXY");
    }

    #[test]
    fn local_complement_examples() {
        let p3 = Graph::path(3).unwrap();
        assert_eq!(p3.local_complement(1).unwrap(), Graph::complete(3).unwrap());
        assert_eq!(Graph::star(4).unwrap().local_complement(0).unwrap(), Graph::complete(4).unwrap());
        assert!(p3.local_complement(3).is_err());
    }

    #[test]
    fn connectivity() {
        assert!(Graph::path(5).unwrap().is_connected());
        assert!(Graph::empty(1).unwrap().is_connected());
        assert!(!Graph::empty(2).unwrap().is_connected());
    }

    fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
        (1..=max_n).prop_flat_map(|n| {
            proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
                let mut edges = Vec::new();
                let mut it = bits.into_iter();
                for b in 1..n {
                    for a in 0..b {
                        if it.next().unwrap() {
                            edges.push((a, b));
                        }
                    }
                }
                Graph::from_edges(n, &edges).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn graph6_and_json_round_trip(g in arb_graph(9)) {
            prop_assert_eq!(&Graph::from_graph6(&g.to_graph6()).unwrap(), &g);
            prop_assert_eq!(&parse_graph(&g.to_json()).unwrap(), &g);
        }

        #[test]
        fn local_complement_is_an_involution(g in arb_graph(8), v in 0usize..8) {
            let v = v % g.n();
            prop_assert_eq!(g.local_complement(v).unwrap().local_complement(v).unwrap(), g);
        }

        #[test]
        fn element_bits(g in arb_graph(10), raw in any::<u64>(), raw2 in any::<u64>()) {
            let n = g.n();
            let b1 = BitString::new(n, raw & mask(n)).unwrap();
            let b2 = BitString::new(n, raw2 & mask(n)).unwrap();
            let e1 = g.stabilizer_element(b1).unwrap();
            let e2 = g.stabilizer_element(b2).unwrap();
            prop_assert_eq!(e1.x_bits(), b1);
            prop_assert_eq!(e1.z_bits().bits(), g.adj_times(b1.bits()));
            // Both sides fix the graph state, which pins the sign.
            let prod = e1.try_mul(&e2).unwrap();
            prop_assert_eq!(prod, g.stabilizer_element(b1.xor(b2)).unwrap());
        }
    }
}
