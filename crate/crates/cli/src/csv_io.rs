//! CSV formats for correlation boxes, vertex sets and channel matrices.
//!
//! A box file is one or more sections. Each section opens with a value line
//! `n,d,D` followed by rows `q_1,…,q_n,a_1,…,a_n,p`; rows left out have
//! probability 0. A literal `n,d,D` line is accepted as a header and skipped.
//! Lines starting with `#` are comments.

use std::io::Read;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use ngmac_core::correlations::{CorrelationBox, Resource};
use ngmac_core::index;
use ngmac_core::MacChannel;

use crate::format::sig10;

fn parse_usize(field: &str, line: u64, what: &str) -> Result<usize> {
    field
        .trim()
        .parse()
        .with_context(|| format!("line {line}: {what} `{field}` is not a non-negative integer"))
}

struct Section {
    n: usize,
    d: usize,
    answers: usize,
    table: Vec<f64>,
    line: u64,
}

impl Section {
    fn finish(self, resource: &Resource) -> Result<CorrelationBox> {
        CorrelationBox::new(self.n, self.d, self.answers, self.table, resource.clone())
            .with_context(|| format!("box starting at line {}", self.line))
    }
}

/// Reads every box section from `reader`.
pub fn read_boxes<R: Read>(reader: R, resource: &Resource) -> Result<Vec<CorrelationBox>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut boxes = Vec::new();
    let mut current: Option<Section> = None;
    for record in rdr.records() {
        let record = record.context("malformed CSV")?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() == 3 {
            if record.iter().eq(["n", "d", "D"]) {
                continue;
            }
            if let Some(done) = current.take() {
                boxes.push(done.finish(resource)?);
            }
            let n = parse_usize(&record[0], line, "n")?;
            let d = parse_usize(&record[1], line, "d")?;
            let answers = parse_usize(&record[2], line, "D")?;
            ensure!(n >= 1 && d >= 1 && answers >= 1, "line {line}: n, d, D must be positive");
            let size = index::checked_pow(d as u64, n as u64)
                .and_then(|q| index::checked_pow(answers as u64, n as u64).and_then(|a| q.checked_mul(a)))
                .filter(|&s| s <= 1 << 24)
                .with_context(|| format!("line {line}: scenario ({n},{d},{answers}) is too large"))?;
            current = Some(Section {
                n,
                d,
                answers,
                table: vec![0.0; size as usize],
                line,
            });
            continue;
        }
        let Some(section) = current.as_mut() else {
            bail!("line {line}: probability row before any `n,d,D` line");
        };
        let n = section.n;
        ensure!(
            record.len() == 2 * n + 1,
            "line {line}: expected {} fields (q_1..q_{n}, a_1..a_{n}, p), found {}",
            2 * n + 1,
            record.len()
        );
        let mut q = 0;
        let mut a = 0;
        for k in 0..n {
            let qk = parse_usize(&record[k], line, "question")?;
            let ak = parse_usize(&record[n + k], line, "answer")?;
            ensure!(qk < section.d, "line {line}: question {qk} out of range (d = {})", section.d);
            ensure!(ak < section.answers, "line {line}: answer {ak} out of range (D = {})", section.answers);
            q = q * section.d + qk;
            a = a * section.answers + ak;
        }
        let p: f64 = record[2 * n]
            .parse()
            .with_context(|| format!("line {line}: probability `{}` is not a number", &record[2 * n]))?;
        let at = q * index::pow(section.answers, n) + a;
        section.table[at] += p;
    }
    if let Some(done) = current.take() {
        boxes.push(done.finish(resource)?);
    }
    Ok(boxes)
}

pub fn read_box_file(path: &Path, resource: &Resource) -> Result<Vec<CorrelationBox>> {
    let file = std::fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    read_boxes(file, resource).with_context(|| format!("reading {}", path.display()))
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().flexible(true).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
    Ok(String::from_utf8(bytes)?)
}

/// Writes one box section with every row, including zero-probability ones.
pub fn write_box(b: &CorrelationBox) -> Result<String> {
    let mut w = writer();
    let n = b.players();
    w.write_record(["n", "d", "D"])?;
    w.write_record([n.to_string(), b.questions().to_string(), b.answers().to_string()])?;
    let mut qd = vec![0; n];
    let mut ad = vec![0; n];
    for q in 0..b.question_tuple_count() {
        index::decode(q, b.questions(), &mut qd);
        for (a, &p) in b.row(q).iter().enumerate() {
            index::decode(a, b.answers(), &mut ad);
            let mut fields: Vec<String> = qd.iter().chain(&ad).map(ToString::to_string).collect();
            fields.push(sig10(p));
            w.write_record(&fields)?;
        }
    }
    finish(w)
}

/// `x-index,y-index,probability` rows for every entry of the channel matrix.
pub fn write_channel(ch: &MacChannel) -> Result<String> {
    let mut w = writer();
    w.write_record(["x-index", "y-index", "probability"])?;
    for x in 0..ch.input_count() {
        for (y, &p) in ch.row(x).iter().enumerate() {
            w.write_record([x.to_string(), y.to_string(), sig10(p)])?;
        }
    }
    finish(w)
}

/// Sweep output rows `eta,resource,kind,value,diagnostic`.
pub fn write_sweep(rows: &[[String; 5]]) -> Result<String> {
    let mut w = writer();
    w.write_record(["eta", "resource", "kind", "value", "diagnostic"])?;
    for r in rows {
        w.write_record(r)?;
    }
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ngmac_core::correlations::{magic_square_box, pr_box};

    #[test]
    fn box_round_trip() {
        for b in [pr_box(), magic_square_box()] {
            let text = write_box(&b).unwrap();
            let back = read_boxes(text.as_bytes(), b.resource()).unwrap();
            assert_eq!(back.len(), 1);
            let diff = back[0]
                .table()
                .iter()
                .zip(b.table())
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            assert!(diff < 1e-9);
        }
    }

    #[test]
    fn sections_and_sparse_rows() {
        let text = "# two deterministic boxes\n2,2,2\n0,0,0,0,1\n0,1,0,0,1\n1,0,0,0,1\n1,1,0,0,1\n\
                    n,d,D\n2,2,2\n0,0,1,1,1\n0,1,1,1,1\n1,0,1,1,1\n1,1,1,1,1\n";
        let boxes = read_boxes(text.as_bytes(), &Resource::Local).unwrap();
        assert_eq!(boxes.len(), 2);
        assert!(boxes.iter().all(|b| b.is_deterministic()));
    }

    #[test]
    fn malformed_inputs() {
        let bad = [
            "0,0,0,0,1\n",
            "2,2,2\n0,0,0,0\n",
            "2,2,2\n0,2,0,0,1\n",
            "2,2,2\n0,0,0,0,x\n",
            "2,2,2\n0,0,0,0,0.5\n",
        ];
        for text in bad {
            assert!(read_boxes(text.as_bytes(), &Resource::Local).is_err(), "{text:?}");
        }
        assert!(read_boxes("".as_bytes(), &Resource::Local).unwrap().is_empty());
    }

    #[test]
    fn channel_rows() {
        let ch = MacChannel::type_ii(&ngmac_core::games::chsh_game(), 1.0).unwrap();
        let text = write_channel(&ch).unwrap();
        assert_eq!(text.lines().count(), 1 + 16 * 4);
        assert!(text.starts_with("x-index,y-index,probability\n0,0,1\n"));
    }
}
