use std::io::Read;

use csv::{ReaderBuilder, StringRecord, Trim};

use super::{CensoredSample, CensoringInterval, Observation, Scheme};
use crate::error::{Error, Result};

/// Expected header for the native layout of each scheme.
fn native_header(scheme: Scheme) -> &'static [&'static str] {
    match scheme {
        Scheme::Right | Scheme::Doubly => &["v", "delta"],
        Scheme::Interval1 => &["y", "delta"],
        Scheme::Interval2 => &["y", "z", "delta"],
        Scheme::Partly1 => &["kind", "x_or_y", "delta"],
        Scheme::PartlyGeneral => &["kind", "value"],
        Scheme::None => &["x"],
    }
}

const UNIFIED_HEADER: &[&str] = &["left", "right"];

fn parse_err(row: usize, msg: impl Into<String>) -> Error {
    Error::Parse { row, msg: msg.into() }
}

fn field(rec: &StringRecord, i: usize, row: usize) -> Result<&str> {
    rec.get(i)
        .ok_or_else(|| parse_err(row, format!("expected at least {} fields", i + 1)))
}

fn number(rec: &StringRecord, i: usize, row: usize) -> Result<f64> {
    let s = field(rec, i, row)?;
    let v: f64 = s
        .parse()
        .map_err(|_| parse_err(row, format!("`{s}` is not a number")))?;
    if !v.is_finite() || v < 0.0 {
        return Err(parse_err(row, format!("value {v} must be finite and >= 0")));
    }
    Ok(v)
}

fn delta(rec: &StringRecord, i: usize, row: usize) -> Result<u8> {
    let s = field(rec, i, row)?;
    s.parse()
        .map_err(|_| parse_err(row, format!("delta `{s}` is not a small integer")))
}

fn header_matches(rec: &StringRecord, expected: &[&str]) -> bool {
    rec.len() == expected.len() && rec.iter().zip(expected).all(|(a, b)| a.eq_ignore_ascii_case(b))
}

/// Parse a CSV data file for `scheme`. Row order is preserved.
///
/// The native layouts are `v,delta` (right, doubly), `y,delta` (interval1),
/// `y,z,delta` (interval2), `kind,x_or_y,delta` with `kind ∈ {exact, cs}`
/// (partly1), `x` (none), and for partlyGeneral a leading grid line
/// `grid,y1;y2;...;yN` followed by `kind,value` rows with
/// `kind ∈ {exact, cell}`. Any scheme also accepts the unified layout
/// `left,right` (empty right = ∞, left = right means exact), provided each
/// interval is expressible under the scheme.
pub fn parse_sample<R: Read>(input: R, scheme: Scheme) -> Result<CensoredSample> {
    let mut reader = ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(Trim::All)
        .from_reader(input);
    let mut records = reader.records();

    let mut next = || -> Result<Option<(usize, StringRecord)>> {
        match records.next() {
            None => Ok(None),
            Some(rec) => {
                let rec = rec?;
                let row = rec.position().map_or(0, |p| p.line() as usize);
                Ok(Some((row, rec)))
            }
        }
    };

    let mut grid = None;
    if scheme == Scheme::PartlyGeneral {
        let (row, rec) = next()?.ok_or(Error::EmptySample)?;
        if !field(&rec, 0, row)?.eq_ignore_ascii_case("grid") {
            return Err(parse_err(row, "partlyGeneral input must start with `grid,y1;...;yN`"));
        }
        let values = field(&rec, 1, row)?
            .split(';')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| parse_err(row, format!("grid value `{s}` is not a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.iter().any(|v| !v.is_finite() || *v <= 0.0) || values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(parse_err(row, "grid must be positive and strictly increasing"));
        }
        grid = Some(values);
    }

    let (row, header) = next()?.ok_or(Error::EmptySample)?;
    let unified = header_matches(&header, UNIFIED_HEADER);
    if !unified && !header_matches(&header, native_header(scheme)) {
        return Err(parse_err(
            row,
            format!(
                "header must be `{}` or `left,right` for scheme {scheme}",
                native_header(scheme).join(",")
            ),
        ));
    }

    let grid_len = grid.as_ref().map_or(0, Vec::len);
    let mut observations = Vec::new();
    while let Some((row, rec)) = next()? {
        let obs = if unified {
            let left = number(&rec, 0, row)?;
            let right_raw = field(&rec, 1, row)?;
            let iv = if right_raw.is_empty() {
                CensoringInterval::right_censored(left)
            } else {
                let right = number(&rec, 1, row)?;
                if right == left {
                    CensoringInterval::exact(left)
                } else {
                    CensoringInterval::between(left, right)
                }
            };
            Observation::from_interval(scheme, iv).map_err(|m| parse_err(row, m))?
        } else {
            parse_native(scheme, &rec, row, grid_len)?
        };
        let check = CensoredSample::new(scheme, vec![obs], grid.clone());
        if let Err(Error::InvalidSample(msg)) = check {
            let msg = msg.trim_start_matches("observation 1: ").to_string();
            return Err(parse_err(row, msg));
        }
        observations.push(obs);
    }
    CensoredSample::new(scheme, observations, grid)
}

fn parse_native(scheme: Scheme, rec: &StringRecord, row: usize, grid_len: usize) -> Result<Observation> {
    let obs = match scheme {
        Scheme::Right => Observation::Right {
            v: number(rec, 0, row)?,
            delta: delta(rec, 1, row)?,
        },
        Scheme::Doubly => Observation::Doubly {
            v: number(rec, 0, row)?,
            delta: delta(rec, 1, row)?,
        },
        Scheme::Interval1 => Observation::CurrentStatus {
            y: number(rec, 0, row)?,
            delta: delta(rec, 1, row)?,
        },
        Scheme::Interval2 => Observation::Case2 {
            y: number(rec, 0, row)?,
            z: number(rec, 1, row)?,
            delta: delta(rec, 2, row)?,
        },
        Scheme::None => Observation::Exact {
            x: number(rec, 0, row)?,
        },
        Scheme::Partly1 => match field(rec, 0, row)?.to_ascii_lowercase().as_str() {
            "exact" => Observation::Exact {
                x: number(rec, 1, row)?,
            },
            "cs" => Observation::CurrentStatus {
                y: number(rec, 1, row)?,
                delta: delta(rec, 2, row)?,
            },
            other => return Err(parse_err(row, format!("kind `{other}` not in {{exact, cs}}"))),
        },
        Scheme::PartlyGeneral => match field(rec, 0, row)?.to_ascii_lowercase().as_str() {
            "exact" => Observation::Exact {
                x: number(rec, 1, row)?,
            },
            "cell" => {
                let s = field(rec, 1, row)?;
                let j: usize = s
                    .parse()
                    .map_err(|_| parse_err(row, format!("cell index `{s}` is not an integer")))?;
                if j < 1 || j > grid_len + 1 {
                    return Err(parse_err(row, format!("cell index {j} not in 1..={}", grid_len + 1)));
                }
                Observation::Cell { j }
            }
            other => return Err(parse_err(row, format!("kind `{other}` not in {{exact, cell}}"))),
        },
    };
    Ok(obs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn right_censored_rows() {
        let s = parse_sample("v,delta\n1.0,1\n2.0,0".as_bytes(), Scheme::Right).unwrap();
        assert_eq!(s.n(), 2);
        assert_eq!(
            s.to_intervals(),
            vec![CensoringInterval::exact(1.0), CensoringInterval::right_censored(2.0)]
        );
    }

    #[test]
    fn interval_case2_row() {
        let s = parse_sample("y,z,delta\n2.0,1.0,1".as_bytes(), Scheme::Interval2).unwrap();
        assert_eq!(s.n(), 1);
        assert_eq!(
            s.observations()[0],
            Observation::Case2 {
                y: 2.0,
                z: 1.0,
                delta: 1
            }
        );
        assert_eq!(s.to_intervals()[0], CensoringInterval::between(1.0, 2.0));
    }

    #[test]
    fn interval_case2_rejects_z_not_below_y() {
        let err = parse_sample("y,z,delta\n1.0,2.0,1".as_bytes(), Scheme::Interval2).unwrap_err();
        match err {
            Error::Parse { row, msg } => {
                assert_eq!(row, 2);
                assert!(msg.contains("must be < y"), "{msg}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reports_row_numbers() {
        let text = "v,delta\n1,1\n2,1\n3,7\n";
        match parse_sample("v,delta\n1,0\n2,1\n".as_bytes(), Scheme::Doubly).unwrap_err() {
            Error::Parse { row, .. } => assert_eq!(row, 2),
            e => panic!("{e:?}"),
        }
        match parse_sample(text.as_bytes(), Scheme::Right).unwrap_err() {
            Error::Parse { row, .. } => assert_eq!(row, 4),
            e => panic!("{e:?}"),
        }
        match parse_sample("x\n1\n-2\n".as_bytes(), Scheme::None).unwrap_err() {
            Error::Parse { row, .. } => assert_eq!(row, 3),
            e => panic!("{e:?}"),
        }
        match parse_sample("x\n1\nnan\n".as_bytes(), Scheme::None).unwrap_err() {
            Error::Parse { row, .. } => assert_eq!(row, 3),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn wrong_header_is_rejected() {
        assert!(matches!(
            parse_sample("a,b\n1,1".as_bytes(), Scheme::Right),
            Err(Error::Parse { row: 1, .. })
        ));
    }

    #[test]
    fn partly_layouts() {
        let s = parse_sample(
            "kind,x_or_y,delta\nexact,1.5,\ncs,2.0,1\ncs,3.0,0\n".as_bytes(),
            Scheme::Partly1,
        )
        .unwrap();
        assert_eq!(
            s.to_intervals(),
            vec![
                CensoringInterval::exact(1.5),
                CensoringInterval::left_censored(2.0),
                CensoringInterval::right_censored(3.0),
            ]
        );

        let s = parse_sample(
            "grid,1;4\nkind,value\ncell,2\nexact,0.3\ncell,3\n".as_bytes(),
            Scheme::PartlyGeneral,
        )
        .unwrap();
        assert_eq!(s.grid(), Some(&[1.0, 4.0][..]));
        assert_eq!(
            s.to_intervals(),
            vec![
                CensoringInterval::between(1.0, 4.0),
                CensoringInterval::exact(0.3),
                CensoringInterval::right_censored(4.0),
            ]
        );
        assert!(parse_sample("grid,1;4\nkind,value\ncell,5\n".as_bytes(), Scheme::PartlyGeneral).is_err());
    }

    #[test]
    fn unified_layout() {
        let s = parse_sample("left,right\n1,1\n2,\n".as_bytes(), Scheme::Right).unwrap();
        assert_eq!(
            s.observations(),
            &[
                Observation::Right { v: 1.0, delta: 1 },
                Observation::Right { v: 2.0, delta: 0 }
            ]
        );
        let s = parse_sample("left,right\n0.5,2\n3,\n0,1\n".as_bytes(), Scheme::Interval2).unwrap();
        assert_eq!(s.to_intervals()[0], CensoringInterval::between(0.5, 2.0));
        assert!(parse_sample("left,right\n2,1\n".as_bytes(), Scheme::Interval2).is_err());
    }
}
