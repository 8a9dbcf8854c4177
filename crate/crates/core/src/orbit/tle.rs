use super::{wrap_two_pi, OrbitElements};
use crate::error::{Error, Result};
use crate::time;

/// One TLE record: optional title line plus the decoded elements. The raw
/// element lines are kept so files can be echoed back unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct TleRecord {
    pub name: Option<String>,
    pub elements: OrbitElements,
    pub line1: String,
    pub line2: String,
}

impl TleRecord {
    /// Canonical two-line rendering of `elements`. Fields the elements do
    /// not carry (designator, derivatives, set numbers) are written as zeros.
    pub fn format(elements: &OrbitElements) -> (String, String) {
        let (year, day) = time::to_year_day(elements.epoch);
        let body1 = format!(
            "1 {:05}U 00000A   {:02}{:012.8} {} {} {} 0    0",
            elements.catalog_id % 100_000,
            year.rem_euclid(100),
            day,
            " .00000000",
            " 00000-0",
            format_exponent(elements.drag_term),
        );
        let ecc = (elements.eccentricity * 1e7).round() as u64;
        let body2 = format!(
            "2 {:05} {:8.4} {:8.4} {:07} {:8.4} {:8.4} {:11.8}    0",
            elements.catalog_id % 100_000,
            elements.inclination.to_degrees(),
            elements.raan.to_degrees(),
            ecc.min(9_999_999),
            elements.arg_perigee.to_degrees(),
            elements.mean_anomaly.to_degrees(),
            elements.mean_motion,
        );
        (with_checksum(&body1), with_checksum(&body2))
    }
}

/// Modulo-10 checksum over the first 68 columns: digits count their value,
/// minus signs count one, everything else zero.
pub(crate) fn checksum(body: &str) -> u32 {
    body.chars()
        .take(68)
        .map(|c| match c {
            '0'..='9' => c as u32 - '0' as u32,
            '-' => 1,
            _ => 0,
        })
        .sum::<u32>()
        % 10
}

fn with_checksum(body: &str) -> String {
    debug_assert_eq!(body.len(), 68, "{body:?}");
    format!("{body}{}", checksum(body))
}

/// Decode one TLE (two element lines, optionally preceded by a title line).
pub fn parse_tle(text: &str) -> Result<OrbitElements> {
    let lines: Vec<&str> = text.lines().map(|l| l.trim_end()).filter(|l| !l.is_empty()).collect();
    match lines.as_slice() {
        [l1, l2] => Ok(parse_lines(None, l1, l2)?.elements),
        [name, l1, l2] => Ok(parse_lines(Some(name), l1, l2)?.elements),
        _ => Err(Error::Format {
            line: 1,
            message: format!("expected 2 element lines (plus optional title), found {} lines", lines.len()),
        }),
    }
}

/// Decode every record in a TLE file (2-line or 3-line records, mixed).
pub fn parse_tle_file(text: &str) -> Result<Vec<TleRecord>> {
    let lines: Vec<&str> = text.lines().map(|l| l.trim_end()).filter(|l| !l.is_empty()).collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        let (name, rest) = if lines[i].starts_with("1 ") && lines[i].len() == 69 {
            (None, i)
        } else {
            (Some(lines[i]), i + 1)
        };
        if rest + 1 >= lines.len() {
            return Err(Error::Format { line: 1, message: "truncated record".into() });
        }
        out.push(parse_lines(name, lines[rest], lines[rest + 1])?);
        i = rest + 2;
    }
    Ok(out)
}

fn parse_lines(name: Option<&str>, l1: &str, l2: &str) -> Result<TleRecord> {
    check_line(l1, 1)?;
    check_line(l2, 2)?;

    let cat1: u32 = field(l1, 1, 3, 7)?;
    let cat2: u32 = field(l2, 2, 3, 7)?;
    if cat1 != cat2 {
        return Err(Error::Format { line: 2, message: format!("catalog {cat2} differs from line 1 ({cat1})") });
    }
    let yy: i32 = field(l1, 1, 19, 20)?;
    let day: f64 = field(l1, 1, 21, 32)?;
    let year = if yy < 57 { 2000 + yy } else { 1900 + yy };
    let epoch = time::from_year_day(year, day).map_err(|e| Error::Format { line: 1, message: e.to_string() })?;
    let drag_term = parse_exponent(&l1[53..61]).ok_or_else(|| Error::Format {
        line: 1,
        message: format!("bad B* field {:?}", &l1[53..61]),
    })?;

    let inclination: f64 = field(l2, 2, 9, 16)?;
    let raan: f64 = field(l2, 2, 18, 25)?;
    let ecc_digits = l2[26..33].trim();
    if ecc_digits.is_empty() || !ecc_digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Format { line: 2, message: format!("bad eccentricity {ecc_digits:?}") });
    }
    let eccentricity: f64 = format!("0.{ecc_digits}").parse().expect("digits");
    let arg_perigee: f64 = field(l2, 2, 35, 42)?;
    let mean_anomaly: f64 = field(l2, 2, 44, 51)?;
    let mean_motion: f64 = field(l2, 2, 53, 63)?;

    if !(0.0..=180.0).contains(&inclination) {
        return Err(Error::Format { line: 2, message: format!("inclination {inclination} out of range") });
    }
    let elements = OrbitElements {
        epoch,
        inclination: inclination.to_radians(),
        raan: wrap_two_pi(raan.to_radians()),
        eccentricity,
        arg_perigee: wrap_two_pi(arg_perigee.to_radians()),
        mean_anomaly: wrap_two_pi(mean_anomaly.to_radians()),
        mean_motion,
        drag_term,
        catalog_id: cat1,
    };
    elements.validate().map_err(|e| Error::Format { line: 2, message: e.to_string() })?;
    Ok(TleRecord {
        name: name.map(|n| n.trim_start_matches("0 ").trim().to_string()),
        elements,
        line1: l1.to_string(),
        line2: l2.to_string(),
    })
}

fn check_line(line: &str, number: u8) -> Result<()> {
    if !line.is_ascii() || line.len() != 69 {
        return Err(Error::Format { line: number, message: format!("expected 69 ASCII characters, got {}", line.len()) });
    }
    let expected_prefix = if number == 1 { "1 " } else { "2 " };
    if !line.starts_with(expected_prefix) {
        return Err(Error::Format { line: number, message: format!("must start with {expected_prefix:?}") });
    }
    let expected = line[68..]
        .parse::<u32>()
        .map_err(|_| Error::Format { line: number, message: "checksum column is not a digit".into() })?;
    let computed = checksum(line);
    if expected != computed {
        return Err(Error::Checksum { line: number, expected, computed });
    }
    Ok(())
}

/// Parse 1-indexed inclusive columns `[from, to]`.
fn field<T: std::str::FromStr>(line: &str, number: u8, from: usize, to: usize) -> Result<T> {
    let raw = &line[from - 1..to];
    raw.trim().parse::<T>().map_err(|_| Error::Format {
        line: number,
        message: format!("columns {from}-{to}: cannot parse {raw:?}"),
    })
}

/// Decode the assumed-decimal exponent notation, e.g. ` 12345-4` = 0.12345e-4.
fn parse_exponent(raw: &str) -> Option<f64> {
    let s = raw.trim();
    if s.is_empty() {
        return Some(0.0);
    }
    let (sign, s) = match s.as_bytes()[0] {
        b'-' => (-1.0, &s[1..]),
        b'+' => (1.0, &s[1..]),
        _ => (1.0, s),
    };
    let split = s.rfind(['-', '+'])?;
    let mantissa: f64 = format!("0.{}", &s[..split]).parse().ok()?;
    let exponent: i32 = s[split..].parse().ok()?;
    Some(sign * mantissa * 10f64.powi(exponent))
}

fn format_exponent(value: f64) -> String {
    if value == 0.0 {
        return " 00000-0".to_string();
    }
    let sign = if value < 0.0 { '-' } else { ' ' };
    let mut exponent = value.abs().log10().floor() as i32 + 1;
    let mut mantissa = (value.abs() / 10f64.powi(exponent) * 1e5).round() as u32;
    if mantissa >= 100_000 {
        mantissa /= 10;
        exponent += 1;
    }
    let exp_sign = if exponent < 0 { '-' } else { '+' };
    format!("{sign}{mantissa:05}{exp_sign}{}", exponent.abs())
}
