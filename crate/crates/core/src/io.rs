// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Text formats for hypergraphs and partitions (1-based vertex ids).
//!
//! Hypergraph: first line `n d m`, then `m` lines of `d` strictly ascending
//! vertex ids separated by single spaces, lines in lexicographic order.
//! Partition: `n` lines `vertex cluster`, vertices `1..=n` in order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::hypergraph::UniformHypergraph;
use crate::partition::Partition;
use crate::{Error, Result};

pub fn write_hypergraph(h: &UniformHypergraph, mut w: impl Write) -> Result<()> {
    writeln!(w, "{} {} {}", h.n(), h.d(), h.edge_count())?;
    let mut line = String::new();
    for e in h.edges() {
        line.clear();
        for (i, &v) in e.iter().enumerate() {
            if i > 0 {
                line.push(' ');
            }
            line.push_str(&(v + 1).to_string());
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    Ok(())
}

pub fn write_hypergraph_file(h: &UniformHypergraph, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_hypergraph(h, &mut w)?;
    w.flush()?;
    Ok(())
}

fn fields(line: &str, lineno: usize) -> Result<Vec<usize>> {
    line.split(' ')
        .map(|tok| {
            tok.parse::<usize>()
                .map_err(|_| Error::parse(lineno, format!("expected an unsigned integer, found {tok:?}")))
        })
        .collect()
}

pub fn read_hypergraph(r: impl BufRead) -> Result<UniformHypergraph> {
    let mut lines = r.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "missing header line `n d m`"))?;
    let header = header?;
    let hv = fields(&header, 1)?;
    let [n, d, m] = hv[..] else {
        return Err(Error::parse(1, "header must be `n d m`"));
    };
    if d == 0 {
        return Err(Error::parse(1, "uniformity must be positive"));
    }

    let mut flat: Vec<u32> = Vec::with_capacity(m * d);
    let mut prev: Option<Vec<u32>> = None;
    let mut seen = 0;
    for (lineno, line) in lines {
        let line = line?;
        if seen == m {
            if line.is_empty() {
                continue;
            }
            return Err(Error::parse(lineno, format!("more than {m} edge lines")));
        }
        let ids = fields(&line, lineno)?;
        if ids.len() != d {
            return Err(Error::parse(
                lineno,
                format!("expected {d} vertices, found {}", ids.len()),
            ));
        }
        if let Some(&v) = ids.iter().find(|&&v| v == 0 || v > n) {
            return Err(Error::parse(lineno, format!("vertex {v} out of range 1..={n}")));
        }
        if ids.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::parse(lineno, "vertices are not strictly ascending"));
        }
        let edge: Vec<u32> = ids.iter().map(|&v| (v - 1) as u32).collect();
        if let Some(p) = &prev {
            match p.cmp(&edge) {
                std::cmp::Ordering::Equal => return Err(Error::parse(lineno, "duplicate edge")),
                std::cmp::Ordering::Greater => {
                    return Err(Error::parse(lineno, "edges are not in lexicographic order"))
                }
                std::cmp::Ordering::Less => {}
            }
        }
        flat.extend_from_slice(&edge);
        prev = Some(edge);
        seen += 1;
    }
    if seen != m {
        return Err(Error::parse(seen + 2, format!("expected {m} edges, found {seen}")));
    }
    Ok(UniformHypergraph::from_canonical(n, d, flat))
}

pub fn read_hypergraph_file(path: impl AsRef<Path>) -> Result<UniformHypergraph> {
    read_hypergraph(BufReader::new(File::open(path)?))
}

pub fn write_partition(p: &Partition, mut w: impl Write) -> Result<()> {
    for (v, &l) in p.labels().iter().enumerate() {
        writeln!(w, "{} {}", v + 1, l + 1)?;
    }
    Ok(())
}

pub fn write_partition_file(p: &Partition, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_partition(p, &mut w)?;
    w.flush()?;
    Ok(())
}

/// The number of clusters is the largest label; every label in `1..=k` must
/// occur.
pub fn read_partition(r: impl BufRead) -> Result<Partition> {
    let mut labels = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let f = fields(&line, lineno)?;
        let [v, l] = f[..] else {
            return Err(Error::parse(lineno, "expected `vertex cluster`"));
        };
        if v != labels.len() + 1 {
            return Err(Error::parse(
                lineno,
                format!("expected vertex {}, found {v}", labels.len() + 1),
            ));
        }
        if l == 0 {
            return Err(Error::parse(lineno, "cluster labels start at 1"));
        }
        labels.push(l - 1);
    }
    let k = labels.iter().max().map_or(0, |&l| l + 1);
    Partition::from_labels(labels, k).map_err(|e| Error::parse(0, e.to_string()))
}

pub fn read_partition_file(path: impl AsRef<Path>) -> Result<Partition> {
    read_partition(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::{sample_hsbm, HsbmParams};

    fn parse_err(text: &str) -> (usize, String) {
        match read_hypergraph(text.as_bytes()) {
            Err(Error::Parse { line, message }) => (line, message),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn exact_text_layout() {
        let h = UniformHypergraph::new(4, 3, vec![vec![0, 1, 2], vec![1, 2, 3]]).unwrap();
        let mut buf = Vec::new();
        write_hypergraph(&h, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "4 3 2\n1 2 3\n2 3 4\n");
    }

    #[test]
    fn sampled_round_trip() {
        let params = HsbmParams::new(15, 3, 3, 0.7, 0.1, 21).unwrap();
        let (h, truth) = sample_hsbm(&params).unwrap();
        let mut buf = Vec::new();
        write_hypergraph(&h, &mut buf).unwrap();
        assert_eq!(read_hypergraph(&buf[..]).unwrap(), h);

        let mut pbuf = Vec::new();
        write_partition(&truth, &mut pbuf).unwrap();
        assert!(String::from_utf8(pbuf.clone()).unwrap().starts_with("1 1\n2 1\n"));
        assert_eq!(read_partition(&pbuf[..]).unwrap(), truth);
    }

    #[test]
    fn format_violations() {
        assert_eq!(parse_err("3 3 1\n3 2 1\n").0, 2);
        assert!(parse_err("3 3 1\n3 2 1\n").1.contains("ascending"));
        assert!(parse_err("4 3 2\n1 2 3\n1 2 3\n").1.contains("duplicate"));
        assert!(parse_err("4 3 2\n2 3 4\n1 2 3\n").1.contains("lexicographic"));
        assert!(parse_err("4 3 1\n1 2 5\n").1.contains("out of range"));
        assert!(parse_err("4 3 1\n0 1 2\n").1.contains("out of range"));
        assert_eq!(parse_err("4 3\n").0, 1);
        assert_eq!(parse_err("").0, 1);
        assert_eq!(parse_err("4 3 1\n1 2 3 \n").0, 2);
        assert!(parse_err("4 3 2\n1 2 3\n").1.contains("expected 2 edges"));
        assert!(parse_err("4 3 1\n1 2 3\n1 2 4\n").1.contains("more than"));
    }

    #[test]
    fn partition_violations() {
        assert!(read_partition("1 1\n3 2\n".as_bytes()).is_err());
        assert!(read_partition("1 0\n".as_bytes()).is_err());
        assert!(read_partition("1 1\n2 3\n".as_bytes()).is_err());
    }
}
