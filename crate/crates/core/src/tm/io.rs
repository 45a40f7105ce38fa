//! Versioned plain-text model dump.
//!
//! ```text
//! tmfs-model 1
//! params <num_clauses> <threshold> <specificity> <num_classes> <N> <epochs> <seed>
//! features <d>
//! clause <class> <+|-> <weight> <2d automaton states>
//! ...
//! history <epochs recorded>
//! <M weights>
//! ...
//! ```
//!
//! `specificity` is written with Rust's shortest round-trip float formatting,
//! so load(save(m)) reproduces `m` exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use super::clause::{Clause, Polarity};
use super::machine::TmClassifier;
use super::params::HyperParams;
use crate::error::{Error, Result};

const MAGIC: &str = "tmfs-model";
const VERSION: u32 = 1;

impl TmClassifier {
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let p = self.params();
        writeln!(w, "{MAGIC} {VERSION}")?;
        writeln!(
            w,
            "params {} {} {} {} {} {} {}",
            p.num_clauses,
            p.threshold,
            p.specificity,
            p.num_classes,
            p.ta_states_per_action,
            p.epochs,
            p.seed
        )?;
        writeln!(w, "features {}", self.num_features())?;
        for c in self.clauses() {
            let sign = match c.polarity() {
                Polarity::Positive => '+',
                Polarity::Negative => '-',
            };
            write!(w, "clause {} {} {}", c.class_id(), sign, c.weight())?;
            for s in c.ta_states() {
                write!(w, " {s}")?;
            }
            writeln!(w)?;
        }
        writeln!(w, "history {}", self.weight_history().len())?;
        for snap in self.weight_history() {
            let line: Vec<String> = snap.iter().map(u32::to_string).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(f);
        self.write_to(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("dump is ASCII")
    }

    pub fn read_from<R: BufRead>(r: R, origin: &Path) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let mut next = |what: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some((i, Ok(l))) => Ok((i + 1, l)),
                Some((_, Err(e))) => Err(Error::io(origin, e)),
                None => Err(Error::Parse {
                    path: origin.to_path_buf(),
                    line: 0,
                    message: format!("unexpected end of file, expected {what}"),
                }),
            }
        };
        let perr = |line: usize, message: String| Error::Parse {
            path: origin.to_path_buf(),
            line,
            message,
        };

        let (ln, header) = next("header")?;
        if header.trim() != format!("{MAGIC} {VERSION}") {
            return Err(perr(ln, format!("unsupported header {header:?}")));
        }

        let (ln, line) = next("params")?;
        let f = tagged(&line, "params", 7).map_err(|m| perr(ln, m))?;
        let params = HyperParams {
            num_clauses: num(f[0], ln, &perr)?,
            threshold: num(f[1], ln, &perr)?,
            specificity: num(f[2], ln, &perr)?,
            num_classes: num(f[3], ln, &perr)?,
            ta_states_per_action: num(f[4], ln, &perr)?,
            epochs: num(f[5], ln, &perr)?,
            seed: num(f[6], ln, &perr)?,
        };
        params.validate()?;

        let (ln, line) = next("features")?;
        let f = tagged(&line, "features", 1).map_err(|m| perr(ln, m))?;
        let d: usize = num(f[0], ln, &perr)?;

        let mut clauses = Vec::with_capacity(params.num_clauses);
        for _ in 0..params.num_clauses {
            let (ln, line) = next("clause")?;
            let f = tagged(&line, "clause", 3 + 2 * d).map_err(|m| perr(ln, m))?;
            let class: usize = num(f[0], ln, &perr)?;
            let polarity = match f[1] {
                "+" => Polarity::Positive,
                "-" => Polarity::Negative,
                other => return Err(perr(ln, format!("bad polarity {other:?}"))),
            };
            let weight: u32 = num(f[2], ln, &perr)?;
            let states = f[3..]
                .iter()
                .map(|s| num(s, ln, &perr))
                .collect::<Result<Vec<u32>>>()?;
            clauses.push(Clause::from_parts(states, params.ta_states_per_action, class, polarity, weight)?);
        }

        let (ln, line) = next("history")?;
        let f = tagged(&line, "history", 1).map_err(|m| perr(ln, m))?;
        let epochs: usize = num(f[0], ln, &perr)?;
        let mut history = Vec::with_capacity(epochs);
        for _ in 0..epochs {
            let (ln, line) = next("weight snapshot")?;
            let snap = line
                .split_whitespace()
                .map(|s| num(s, ln, &perr))
                .collect::<Result<Vec<u32>>>()?;
            history.push(snap);
        }
        TmClassifier::from_parts(params, d, clauses, history)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(BufReader::new(f), path)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Self::read_from(text.as_bytes(), Path::new("<memory>"))
    }
}

fn tagged<'a>(line: &'a str, tag: &str, arity: usize) -> Result<Vec<&'a str>, String> {
    let mut it = line.split_whitespace();
    if it.next() != Some(tag) {
        return Err(format!("expected `{tag}` line"));
    }
    let fields: Vec<&str> = it.collect();
    if fields.len() != arity {
        return Err(format!("`{tag}` expects {arity} fields, found {}", fields.len()));
    }
    Ok(fields)
}

fn num<T: FromStr>(s: &str, line: usize, perr: &impl Fn(usize, String) -> Error) -> Result<T> {
    s.parse().map_err(|_| perr(line, format!("cannot parse {s:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::BinaryDataset;

    #[test]
    fn round_trip_is_exact() {
        let rows: Vec<Vec<bool>> = (0..40u32).map(|i| (0..5).map(|b| i >> b & 1 == 1).collect()).collect();
        let labels = rows.iter().map(|r| (r[0] ^ r[2]) as usize).collect();
        let data = BinaryDataset::from_rows(&rows, labels, 2).unwrap();
        let params = HyperParams::new(8, 5, 3.7, 2).with_epochs(3);
        let m = TmClassifier::train(params, &data).unwrap();
        let text = m.to_text();
        let back = TmClassifier::from_text(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(TmClassifier::from_text("nope").is_err());
        assert!(TmClassifier::from_text("tmfs-model 1\nparams 4 5 3 2 8 1 0\nfeatures 1\n").is_err());
    }
}
