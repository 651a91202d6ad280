//! The `LPN v1` instance file.
//!
//! ```text
//! LPN v1 k=<k> eta=<decimal> seed=<u64> count=<m>
//! <hex(x)> <label>          (m lines)
//! TARGET <hex(c)>           (optional)
//! ```
//!
//! `hex(x)` is `ceil(k/8)` bytes as lowercase hex; byte 0 carries coordinates
//! 1..=8 with coordinate 1 as its least significant bit.

use std::fmt::Write as _;
use std::io;

use super::{ExampleSource, LabeledExample, ParityTarget, ReplaySource, TargetSpec};
use crate::bitlinalg::BitVec;
use crate::error::{Error, Result};
use crate::instance::{ExampleOracle, NoiseRate};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceHeader {
    pub k: usize,
    pub eta: f64,
    pub seed: u64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceFile {
    pub header: InstanceHeader,
    pub examples: Vec<LabeledExample>,
    pub target: Option<ParityTarget>,
}

pub fn encode_hex(v: &BitVec) -> String {
    hex::encode(v.to_le_bytes())
}

pub fn decode_hex(k: usize, s: &str) -> Result<BitVec> {
    let bytes = hex::decode(s).map_err(|e| Error::InvalidParameter(format!("bad hex {s:?}: {e}")))?;
    BitVec::from_le_bytes(k, &bytes)
}

impl InstanceFile {
    /// Draws `count` uniform examples from a fresh source seeded with `seed`.
    pub fn generate(k: usize, count: usize, eta: f64, seed: u64, with_target: bool) -> Result<Self> {
        if k == 0 {
            return Err(Error::ZeroCount("k"));
        }
        let mut source = ExampleSource::uniform(k, eta, seed, TargetSpec::Random)?;
        let examples = source.draw_many(count)?;
        Ok(Self {
            header: InstanceHeader { k, eta, seed, count },
            examples,
            target: with_target.then(|| source.planted().clone()),
        })
    }

    pub fn render(&self) -> String {
        let h = &self.header;
        let mut out = String::with_capacity(32 + self.examples.len() * (h.k.div_ceil(8) * 2 + 3));
        let _ = writeln!(
            out,
            "LPN v1 k={} eta={} seed={} count={}",
            h.k, h.eta, h.seed, h.count
        );
        for e in &self.examples {
            let _ = writeln!(out, "{} {}", encode_hex(&e.x), u8::from(e.label));
        }
        if let Some(t) = &self.target {
            let _ = writeln!(out, "TARGET {}", encode_hex(t.bits()));
        }
        out
    }

    pub fn write_to<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(self.render().as_bytes())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (_, first) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
        let header = parse_header(first)?;
        let mut examples = Vec::with_capacity(header.count);
        let mut target = None;
        for (line, content) in lines {
            if content.trim().is_empty() {
                continue;
            }
            if target.is_some() {
                return Err(parse_err(line, "content after TARGET line"));
            }
            let mut parts = content.split_whitespace();
            let first = parts.next().unwrap_or_default();
            let second = parts.next().ok_or_else(|| parse_err(line, "expected two fields"))?;
            if parts.next().is_some() {
                return Err(parse_err(line, "expected two fields"));
            }
            if first == "TARGET" {
                let c = decode_hex(header.k, second).map_err(|e| parse_err(line, &e.to_string()))?;
                target = Some(ParityTarget::new(c));
                continue;
            }
            let x = decode_hex(header.k, first).map_err(|e| parse_err(line, &e.to_string()))?;
            let label = match second {
                "0" => false,
                "1" => true,
                other => return Err(parse_err(line, &format!("label must be 0 or 1, got {other:?}"))),
            };
            let index = examples.len() as u64;
            examples.push(LabeledExample { x, label, index });
        }
        if examples.len() != header.count {
            return Err(parse_err(
                1,
                &format!("header declares count={} but {} examples follow", header.count, examples.len()),
            ));
        }
        Ok(Self {
            header,
            examples,
            target,
        })
    }

    pub fn into_replay(self) -> Result<ReplaySource> {
        ReplaySource::new(self.header.k, self.examples, self.target)
    }

    /// Rebuilds the seeded source the file was generated from.
    pub fn source(&self) -> Result<ExampleSource> {
        ExampleSource::uniform(self.header.k, self.header.eta, self.header.seed, TargetSpec::Random)
    }

    /// True when replaying the header's seed regenerates exactly these examples.
    pub fn matches_replay(&self) -> Result<bool> {
        let mut source = self.source()?;
        for e in &self.examples {
            if source.draw()? != *e {
                return Ok(false);
            }
        }
        Ok(self.target.as_ref().is_none_or(|t| t == source.planted()))
    }
}

fn parse_err(line: usize, message: &str) -> Error {
    Error::Parse {
        line,
        message: message.to_string(),
    }
}

fn parse_header(line: &str) -> Result<InstanceHeader> {
    let mut parts = line.split_whitespace();
    if parts.next() != Some("LPN") || parts.next() != Some("v1") {
        return Err(parse_err(1, "header must start with `LPN v1`"));
    }
    let mut field = |name: &str| -> Result<&str> {
        let token = parts
            .next()
            .ok_or_else(|| parse_err(1, &format!("missing `{name}=`")))?;
        token
            .strip_prefix(name)
            .and_then(|t| t.strip_prefix('='))
            .ok_or_else(|| parse_err(1, &format!("expected `{name}=`, found {token:?}")))
    };
    let k = field("k")?
        .parse::<usize>()
        .map_err(|e| parse_err(1, &format!("k: {e}")))?;
    let eta = field("eta")?
        .parse::<f64>()
        .map_err(|e| parse_err(1, &format!("eta: {e}")))?;
    let seed = field("seed")?
        .parse::<u64>()
        .map_err(|e| parse_err(1, &format!("seed: {e}")))?;
    let count = field("count")?
        .parse::<usize>()
        .map_err(|e| parse_err(1, &format!("count: {e}")))?;
    if parts.next().is_some() {
        return Err(parse_err(1, "trailing header fields"));
    }
    if k == 0 {
        return Err(parse_err(1, "k must be at least 1"));
    }
    NoiseRate::new(eta).map_err(|e| parse_err(1, &e.to_string()))?;
    Ok(InstanceHeader { k, eta, seed, count })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_only_file() {
        let f = InstanceFile::generate(8, 0, 0.1, 3, false).unwrap();
        assert_eq!(f.render(), "LPN v1 k=8 eta=0.1 seed=3 count=0\n");
        assert_eq!(InstanceFile::parse(&f.render()).unwrap(), f);
    }

    #[test]
    fn deterministic_bytes() {
        let a = InstanceFile::generate(13, 50, 0.125, 99, true).unwrap().render();
        let b = InstanceFile::generate(13, 50, 0.125, 99, true).unwrap().render();
        assert_eq!(a, b);
    }

    #[test]
    fn noiseless_lines_satisfy_target() {
        let f = InstanceFile::generate(8, 100, 0.0, 4, true).unwrap();
        let parsed = InstanceFile::parse(&f.render()).unwrap();
        let c = parsed.target.clone().unwrap();
        for e in &parsed.examples {
            assert_eq!(e.label, c.label(&e.x).unwrap());
        }
    }

    #[test]
    fn bit_order_is_lsb_first() {
        let x: BitVec = "1000000001".parse().unwrap();
        assert_eq!(encode_hex(&x), "0102");
        let f = InstanceFile {
            header: InstanceHeader { k: 10, eta: 0.0, seed: 0, count: 1 },
            examples: vec![LabeledExample { x, label: true, index: 0 }],
            target: Some(ParityTarget::new("0100000000".parse().unwrap())),
        };
        assert_eq!(f.render(), "LPN v1 k=10 eta=0 seed=0 count=1\n0102 1\nTARGET 0200\n");
    }

    #[test]
    fn replay_matches_generation() {
        let f = InstanceFile::generate(20, 200, 0.2, 17, true).unwrap();
        let parsed = InstanceFile::parse(&f.render()).unwrap();
        assert!(parsed.matches_replay().unwrap());
        assert_eq!(parsed.render(), f.render());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = "LPN v1 k=8 eta=0.1 seed=1 count=2\nff 1\nzz 0\n";
        assert!(matches!(InstanceFile::parse(bad), Err(Error::Parse { line: 3, .. })));
        let bad = "LPN v1 k=8 eta=0.1 seed=1 count=1\nff 2\n";
        assert!(matches!(InstanceFile::parse(bad), Err(Error::Parse { line: 2, .. })));
        let bad = "LPN v1 k=4 eta=0.1 seed=1 count=1\nff 1\n";
        assert!(matches!(InstanceFile::parse(bad), Err(Error::Parse { line: 2, .. })));
        let bad = "LPN v1 k=8 eta=0.7 seed=1 count=0\n";
        assert!(matches!(InstanceFile::parse(bad), Err(Error::Parse { line: 1, .. })));
        let bad = "LPN v1 k=8 eta=0.1 seed=1 count=3\nff 1\n";
        assert!(matches!(InstanceFile::parse(bad), Err(Error::Parse { line: 1, .. })));
        assert!(InstanceFile::parse("").is_err());
        assert!(InstanceFile::parse("LPN v2 k=8 eta=0 seed=0 count=0").is_err());
    }
}
