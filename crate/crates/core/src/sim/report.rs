//! CSV output for BER sweeps.

use std::io::{Read, Write};
use std::path::Path;

use super::BerPoint;
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 12] = [
    "code",
    "decoder",
    "constellation",
    "snr_db",
    "imbalance_db",
    "trials",
    "bit_errors",
    "symbol_errors",
    "codeword_errors",
    "redraws",
    "ber",
    "ser",
];

/// Formats `x` with 10 significant digits using the rules of C's `%.10g`.
pub fn format_sig10(x: f64) -> String {
    const DIGITS: i32 = 10;
    if x == 0.0 {
        return "0".to_owned();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-4..DIGITS).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_owned()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes `points` sorted by `(code, decoder, imbalance_db, snr_db)`.
pub fn emit_csv<W: Write>(points: &[BerPoint], out: W) -> Result<()> {
    let mut sorted: Vec<&BerPoint> = points.iter().collect();
    sorted.sort_by(|a, b| {
        a.code
            .name()
            .cmp(b.code.name())
            .then_with(|| a.decoder.name().cmp(b.decoder.name()))
            .then_with(|| a.imbalance_db.total_cmp(&b.imbalance_db))
            .then_with(|| a.snr_db.total_cmp(&b.snr_db))
    });
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(CSV_HEADER)?;
    for p in sorted {
        writer.write_record([
            p.code.name().to_owned(),
            p.decoder.name().to_owned(),
            p.constellation.name().to_owned(),
            format_sig10(p.snr_db),
            format_sig10(p.imbalance_db),
            p.trials.to_string(),
            p.bit_errors.to_string(),
            p.symbol_errors.to_string(),
            p.codeword_errors.to_string(),
            p.redraws.to_string(),
            format_sig10(p.ber),
            format_sig10(p.ser),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_csv_file(points: &[BerPoint], path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    emit_csv(points, std::io::BufWriter::new(file))
}

fn field<T: std::str::FromStr>(record: &csv::StringRecord, index: usize, line: u64) -> Result<T> {
    let raw = record.get(index).unwrap_or_default();
    raw.parse().map_err(|_| {
        Error::Format(format!(
            "line {line}: bad value {raw:?} for column {}",
            CSV_HEADER[index]
        ))
    })
}

/// Parses a file produced by [`emit_csv`].
pub fn read_csv<R: Read>(input: R) -> Result<Vec<BerPoint>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = reader.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Format(format!("unexpected header {:?}", header.iter().collect::<Vec<_>>())));
    }
    let mut points = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != CSV_HEADER.len() {
            return Err(Error::Format(format!("line {line}: expected {} fields", CSV_HEADER.len())));
        }
        let code: String = field(&record, 0, line)?;
        let decoder: String = field(&record, 1, line)?;
        let constellation: String = field(&record, 2, line)?;
        points.push(BerPoint {
            code: code.parse().map_err(|e: Error| Error::Format(format!("line {line}: {e}")))?,
            decoder: decoder.parse().map_err(|e: Error| Error::Format(format!("line {line}: {e}")))?,
            constellation: constellation
                .parse()
                .map_err(|e: Error| Error::Format(format!("line {line}: {e}")))?,
            snr_db: field(&record, 3, line)?,
            imbalance_db: field(&record, 4, line)?,
            trials: field(&record, 5, line)?,
            bit_errors: field(&record, 6, line)?,
            symbol_errors: field(&record, 7, line)?,
            codeword_errors: field(&record, 8, line)?,
            redraws: field(&record, 9, line)?,
            ber: field(&record, 10, line)?,
            ser: field(&record, 11, line)?,
        });
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::CodeKind;
    use crate::constellation::ConstellationKind;
    use crate::decode::DecoderKind;

    fn point(code: CodeKind, decoder: DecoderKind, imbalance_db: f64, snr_db: f64) -> BerPoint {
        BerPoint {
            code,
            decoder,
            constellation: ConstellationKind::Qpsk,
            snr_db,
            imbalance_db,
            trials: 123_456,
            bit_errors: 789,
            symbol_errors: 700,
            codeword_errors: 650,
            redraws: 0,
            ber: 789.0 / (123_456.0 * 8.0),
            ser: 700.0 / (123_456.0 * 4.0),
        }
    }

    #[test]
    fn sig10_formatting() {
        assert_eq!(format_sig10(0.0), "0");
        assert_eq!(format_sig10(10.0), "10");
        assert_eq!(format_sig10(12.5), "12.5");
        assert_eq!(format_sig10(-3.0), "-3");
        assert_eq!(format_sig10(0.001), "0.001");
        assert_eq!(format_sig10(1.0 / 3.0), "0.3333333333");
        assert_eq!(format_sig10(2.0 / 3.0 * 1e-7), "6.666666667e-08");
        assert_eq!(format_sig10(1e-5), "1e-05");
        assert_eq!(format_sig10(12345678901.0), "1.23456789e+10");
        assert_eq!(format_sig10(9999999999.5), "1e+10");
    }

    #[test]
    fn empty_list_is_header_only() {
        let mut out = Vec::new();
        emit_csv(&[], &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), format!("{}\n", CSV_HEADER.join(",")));
    }

    #[test]
    fn single_point_round_trips() {
        let p = point(CodeKind::Proposed, DecoderKind::CondMl, 15.0, 12.5);
        let mut out = Vec::new();
        emit_csv(std::slice::from_ref(&p), &mut out).unwrap();
        let back = read_csv(out.as_slice()).unwrap();
        assert_eq!(back.len(), 1);
        let q = &back[0];
        assert_eq!((q.code, q.decoder, q.constellation), (p.code, p.decoder, p.constellation));
        assert_eq!((q.snr_db, q.imbalance_db), (p.snr_db, p.imbalance_db));
        assert_eq!(
            (q.trials, q.bit_errors, q.symbol_errors, q.codeword_errors, q.redraws),
            (p.trials, p.bit_errors, p.symbol_errors, p.codeword_errors, p.redraws)
        );
        assert!((q.ber / p.ber - 1.0).abs() < 1e-9);
        assert!((q.ser / p.ser - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rows_are_sorted() {
        let shuffled = vec![
            point(CodeKind::Proposed, DecoderKind::Ml, 15.0, 10.0),
            point(CodeKind::Proposed, DecoderKind::CondMl, 0.0, 12.0),
            point(CodeKind::Proposed, DecoderKind::Ml, 0.0, 14.0),
        ];
        let mut out = Vec::new();
        emit_csv(&shuffled, &mut out).unwrap();
        let back = read_csv(out.as_slice()).unwrap();
        let keys: Vec<(&str, f64, f64)> = back
            .iter()
            .map(|p| (p.decoder.name(), p.imbalance_db, p.snr_db))
            .collect();
        assert_eq!(keys, vec![("cond-ml", 0.0, 12.0), ("ml", 0.0, 14.0), ("ml", 15.0, 10.0)]);
    }

    #[test]
    fn malformed_input_is_rejected() {
        assert!(read_csv("a,b\n1,2\n".as_bytes()).is_err());
        let header = CSV_HEADER.join(",");
        let bad = format!("{header}\nproposed,ml,qpsk,1,0,x,0,0,0,0,0,0\n");
        assert!(read_csv(bad.as_bytes()).is_err());
        let bad = format!("{header}\nproposed,ml,qpsk,1,0\n");
        assert!(read_csv(bad.as_bytes()).is_err());
        let bad = format!("{header}\nproposed,viterbi,qpsk,1,0,1,0,0,0,0,0,0\n");
        assert!(read_csv(bad.as_bytes()).is_err());
    }
}
