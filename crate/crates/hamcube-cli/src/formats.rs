//! Line-based text formats: instance files, cycle files and the DOT
//! export. Vertices parse as integers or as n-character binary strings;
//! output always uses integers.

use anyhow::{anyhow, bail, Context, Result};

use hamcube::cube::{Cube, Edge, Vertex};
use hamcube::structures::{check_instance, FaultSet, Matching};

#[derive(Clone, Debug, PartialEq)]
pub struct InstanceFile {
    pub cube: Cube,
    pub matching: Matching,
    pub faults: FaultSet,
}

fn parse_vertex(token: &str, cube: Cube) -> Result<Vertex> {
    let n = cube.n();
    let v = if token.len() == n as usize && token.chars().all(|c| c == '0' || c == '1') {
        // Binary string, lowest position first.
        let mut bits = 0u32;
        for (i, c) in token.chars().enumerate() {
            if c == '1' {
                bits |= 1 << i;
            }
        }
        Vertex(bits)
    } else {
        Vertex(token.parse::<u32>().with_context(|| format!("bad vertex token {token:?}"))?)
    };
    if !cube.contains(v) {
        bail!("vertex {token} outside Q_{n}");
    }
    Ok(v)
}

fn parse_edge_line(rest: &[&str], cube: Cube) -> Result<Edge> {
    if rest.len() != 2 {
        bail!("expected two vertices, got {rest:?}");
    }
    let a = parse_vertex(rest[0], cube)?;
    let b = parse_vertex(rest[1], cube)?;
    cube.edge(a, b).map_err(|e| anyhow!("{e}"))
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<InstanceFile> {
        let mut cube: Option<Cube> = None;
        let mut m_edges = Vec::new();
        let mut f_edges = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let tag = it.next().unwrap();
            let rest: Vec<&str> = it.collect();
            let err = |msg: String| anyhow!("line {}: {msg}", ln + 1);
            match tag {
                "n" => {
                    if cube.is_some() {
                        return Err(err("dimension declared twice".into()));
                    }
                    let n: u32 = rest
                        .first()
                        .ok_or_else(|| err("missing dimension".into()))?
                        .parse()
                        .map_err(|e| err(format!("bad dimension: {e}")))?;
                    cube = Some(Cube::new(n).map_err(|e| err(e.to_string()))?);
                }
                "m" | "f" => {
                    let cube = cube.ok_or_else(|| err("dimension must come first".into()))?;
                    let edge = parse_edge_line(&rest, cube).map_err(|e| err(e.to_string()))?;
                    if tag == "m" {
                        m_edges.push(edge);
                    } else {
                        f_edges.push(edge);
                    }
                }
                other => return Err(err(format!("unknown tag {other:?}"))),
            }
        }
        let cube = cube.ok_or_else(|| anyhow!("no dimension line"))?;
        let matching = Matching::try_new(m_edges).map_err(|e| anyhow!("{e}"))?;
        let faults = FaultSet::new(f_edges);
        check_instance(cube, &matching, &faults).map_err(|e| anyhow!("{e}"))?;
        Ok(InstanceFile { cube, matching, faults })
    }

    #[cfg_attr(not(test), allow(dead_code))]
    pub fn render(&self) -> String {
        let mut out = format!("n {}\n", self.cube.n());
        for e in self.matching.edges() {
            out.push_str(&format!("m {} {}\n", e.lo(), e.hi()));
        }
        for e in self.faults.edges() {
            out.push_str(&format!("f {} {}\n", e.lo(), e.hi()));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CycleFile {
    pub n: u32,
    pub seq: Vec<Vertex>,
    pub trace: Vec<String>,
}

impl CycleFile {
    pub fn parse(text: &str) -> Result<CycleFile> {
        let mut n: Option<u32> = None;
        let mut seq: Option<Vec<Vertex>> = None;
        let mut trace = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| anyhow!("line {}: {msg}", ln + 1);
            let mut it = line.split_whitespace();
            match it.next().unwrap() {
                "n" => {
                    n = Some(
                        it.next()
                            .ok_or_else(|| err("missing dimension".into()))?
                            .parse()
                            .map_err(|e| err(format!("bad dimension: {e}")))?,
                    );
                }
                "c" => {
                    let cube = Cube::new(n.ok_or_else(|| err("dimension must come first".into()))?)
                        .map_err(|e| err(e.to_string()))?;
                    let vs: Result<Vec<Vertex>> =
                        it.map(|t| parse_vertex(t, cube)).collect();
                    seq = Some(vs.map_err(|e| err(e.to_string()))?);
                }
                "t" => trace.push(it.collect::<Vec<_>>().join(" ")),
                other => return Err(err(format!("unknown tag {other:?}"))),
            }
        }
        Ok(CycleFile {
            n: n.ok_or_else(|| anyhow!("no dimension line"))?,
            seq: seq.ok_or_else(|| anyhow!("no cycle line"))?,
            trace,
        })
    }

    pub fn render(&self) -> String {
        let mut out = format!("n {}\n", self.n);
        out.push_str("c ");
        out.push_str(
            &self
                .seq
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(" "),
        );
        out.push('\n');
        for t in &self.trace {
            out.push_str(&format!("t {t}\n"));
        }
        out
    }
}

/// DOT rendering of a verified cycle: cycle edges plain, matching edges
/// bold, faulty edges dotted, mirroring the highlighted/dotted drawing
/// convention. Vertices are labeled with their bit strings.
pub fn render_dot(cube: Cube, seq: &[Vertex], m: &Matching, f: &FaultSet) -> String {
    let name = |v: Vertex| format!("\"{}\"", v.bits_string(cube.n()));
    let mut out = String::from("graph hamcube {\n");
    for i in 0..seq.len() {
        let a = seq[i];
        let b = seq[(i + 1) % seq.len()];
        let edge = Edge::new(a, b).expect("cycle adjacency");
        if m.contains(edge) {
            out.push_str(&format!(
                "  {} -- {} [kind=\"cycle matching\", style=bold];\n",
                name(a),
                name(b)
            ));
        } else {
            out.push_str(&format!("  {} -- {} [kind=\"cycle\"];\n", name(a), name(b)));
        }
    }
    for e in f.edges() {
        out.push_str(&format!(
            "  {} -- {} [kind=\"fault\", style=dotted];\n",
            name(e.lo()),
            name(e.hi())
        ));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instance_round_trip_is_identity() {
        let text = "# demo\nn 4\nm 0 1\nm 2 6\nf 5 13\n";
        let parsed = InstanceFile::parse(text).unwrap();
        assert_eq!(parsed.cube.n(), 4);
        assert_eq!(parsed.matching.len(), 2);
        assert_eq!(parsed.faults.len(), 1);
        let round = InstanceFile::parse(&parsed.render()).unwrap();
        assert_eq!(parsed, round);
    }

    #[test]
    fn binary_vertices_accepted() {
        // Bit strings of exactly n characters, lowest position first:
        // "1000" is the vertex with only bit 0 set.
        let a = InstanceFile::parse("n 4\nm 0000 1000\n").unwrap();
        let b = InstanceFile::parse("n 4\nm 0 1\n").unwrap();
        assert_eq!(a, b);
        let c = InstanceFile::parse("n 4\nm 0100 0110\n").unwrap();
        let d = InstanceFile::parse("n 4\nm 2 6\n").unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn malformed_instances_rejected() {
        assert!(InstanceFile::parse("m 0 1\n").is_err());
        assert!(InstanceFile::parse("n 3\nm 0 3\n").is_err());
        assert!(InstanceFile::parse("n 3\nm 0 1\nm 1 3\n").is_err());
        assert!(InstanceFile::parse("n 3\nm 0 1\nf 0 1\n").is_err());
        assert!(InstanceFile::parse("n 3\nx 0 1\n").is_err());
    }

    #[test]
    fn cycle_round_trip() {
        let text = "n 2\nc 0 1 3 2\nt extend:base\n";
        let parsed = CycleFile::parse(text).unwrap();
        assert_eq!(parsed.seq.len(), 4);
        assert_eq!(CycleFile::parse(&parsed.render()).unwrap(), parsed);
    }
}
