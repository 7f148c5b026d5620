use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// A surjective node-to-community labeling, kept in canonical form:
/// communities are numbered by first appearance in node order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    labels: Vec<usize>,
    m: usize,
}

impl Partition {
    /// Canonicalizes an arbitrary labeling.
    pub fn new<L: Copy + Eq + std::hash::Hash>(labels: &[L]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidPartition("partition of zero nodes".into()));
        }
        let mut map = HashMap::new();
        let canon = labels
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Ok(Self {
            labels: canon,
            m: map.len(),
        })
    }

    /// Builds a partition from explicit member lists covering `0..n` exactly once.
    pub fn from_communities(n: usize, communities: &[Vec<usize>]) -> Result<Self> {
        let mut labels = vec![usize::MAX; n];
        for (c, members) in communities.iter().enumerate() {
            if members.is_empty() {
                return Err(Error::InvalidPartition(format!("community {c} is empty")));
            }
            for &v in members {
                if v >= n {
                    return Err(Error::InvalidPartition(format!("node {v} out of range")));
                }
                if labels[v] != usize::MAX {
                    return Err(Error::InvalidPartition(format!("node {v} listed twice")));
                }
                labels[v] = c;
            }
        }
        if let Some(v) = labels.iter().position(|&l| l == usize::MAX) {
            return Err(Error::InvalidPartition(format!("node {v} not assigned")));
        }
        Self::new(&labels)
    }

    pub fn all_in_one(n: usize) -> Self {
        Self {
            labels: vec![0; n],
            m: 1,
        }
    }

    pub fn singletons(n: usize) -> Self {
        Self {
            labels: (0..n).collect(),
            m: n,
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, node: usize) -> usize {
        self.labels[node]
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn num_communities(&self) -> usize {
        self.m
    }

    /// Member lists, each sorted by node id, in community order.
    pub fn communities(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.m];
        for (v, &c) in self.labels.iter().enumerate() {
            out[c].push(v);
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("node,community\n");
        for (v, c) in self.labels.iter().enumerate() {
            writeln!(out, "{v},{c}").unwrap();
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let parse = |s: Option<&str>| -> Result<usize> {
                s.and_then(|x| x.trim().parse().ok()).ok_or(Error::Parse {
                    line: i + 1,
                    msg: format!("expected `node,community`, found {line:?}"),
                })
            };
            let mut it = line.split(',');
            pairs.push((parse(it.next())?, parse(it.next())?));
        }
        pairs.sort();
        if pairs.iter().enumerate().any(|(i, &(v, _))| v != i) {
            return Err(Error::InvalidPartition("node ids must cover 0..n exactly once".into()));
        }
        let labels: Vec<usize> = pairs.into_iter().map(|(_, c)| c).collect();
        Self::new(&labels)
    }
}

/// Every set partition of `0..n`, as restricted growth strings. The count is
/// the Bell number, so keep `n` small.
pub fn enumerate_partitions(n: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut labels = vec![0usize; n];
    fn rec(i: usize, m: usize, labels: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if i == labels.len() {
            out.push(Partition {
                labels: labels.clone(),
                m,
            });
            return;
        }
        for c in 0..=m {
            labels[i] = c;
            rec(i + 1, m.max(c + 1), labels, out);
        }
    }
    if n > 0 {
        rec(1, 1, &mut labels, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_relabeling() {
        let p = Partition::new(&[7, 3, 7, 1]).unwrap();
        assert_eq!(p.labels(), &[0, 1, 0, 2]);
        assert_eq!(p.num_communities(), 3);
        assert_eq!(Partition::new(p.labels()).unwrap(), p);
    }

    #[test]
    fn from_communities_checks_cover() {
        let p = Partition::from_communities(3, &[vec![1], vec![0, 2]]).unwrap();
        assert_eq!(p.labels(), &[0, 1, 0]);
        assert!(Partition::from_communities(3, &[vec![1], vec![0]]).is_err());
        assert!(Partition::from_communities(2, &[vec![0, 1], vec![1]]).is_err());
    }

    #[test]
    fn bell_numbers() {
        let counts: Vec<usize> = (1..=7).map(|n| enumerate_partitions(n).len()).collect();
        assert_eq!(counts, vec![1, 2, 5, 15, 52, 203, 877]);
    }

    #[test]
    fn csv_round_trip() {
        let p = Partition::new(&[0, 1, 1, 2, 0]).unwrap();
        assert_eq!(Partition::from_csv(&p.to_csv()).unwrap(), p);
    }
}
