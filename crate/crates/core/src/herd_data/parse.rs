use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::io::{Read, Write};

use chrono::NaiveDate;
use csv::{ReaderBuilder, StringRecord, Writer};

use super::{
    BehaviorDay, Channel, CowId, CowProfile, LesionObservation, LesionSize, LesionStatus,
    ReproStatus,
};
use crate::{Error, Result};

pub const BEHAVIOR_HEADER: &str = "cow_id,date,non_active,active,highly_active,eating,ruminating,ear_temp";
pub const LESIONS_HEADER: &str = "cow_id,date,status,size";
pub const PROFILES_HEADER: &str = "cow_id,parity,repro_status,calving_date";

const DATE_FMT: &str = "%Y-%m-%d";

/// Plausibility bounds for ear temperature, degrees Celsius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TempBounds {
    pub min: f64,
    pub max: f64,
}

impl Default for TempBounds {
    fn default() -> Self {
        TempBounds { min: -10.0, max: 45.0 }
    }
}

struct Rows<R: Read> {
    reader: csv::Reader<R>,
    record: StringRecord,
    width: usize,
}

impl<R: Read> Rows<R> {
    fn open(input: R, expected_header: &str) -> Result<Self> {
        let mut reader = ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(input);
        let mut record = StringRecord::new();
        if !reader.read_record(&mut record)? {
            return Err(Error::UnknownHeader {
                expected: expected_header.into(),
                found: String::new(),
            });
        }
        let found = record.iter().collect::<Vec<_>>().join(",");
        let found = found.trim_start_matches('\u{feff}');
        if found != expected_header {
            return Err(Error::UnknownHeader {
                expected: expected_header.into(),
                found: found.into(),
            });
        }
        Ok(Rows {
            reader,
            record,
            width: expected_header.split(',').count(),
        })
    }

    /// Advances to the next non-empty row and returns its 1-based line number.
    fn next(&mut self) -> Result<Option<u64>> {
        loop {
            let line = self.reader.position().line();
            match self.reader.read_record(&mut self.record) {
                Ok(false) => return Ok(None),
                Ok(true) => {}
                Err(e) => {
                    let line = e.position().map(|p| p.line()).unwrap_or(line);
                    return Err(Error::parse("malformed_row", line, format!("malformed row: {e}")));
                }
            }
            let line = self.record.position().map(|p| p.line()).unwrap_or(line);
            if self.record.len() == 1 && self.record[0].trim().is_empty() {
                continue;
            }
            if self.record.len() != self.width {
                return Err(Error::parse(
                    "malformed_row",
                    line,
                    format!("malformed row: expected {} fields, found {}", self.width, self.record.len()),
                ));
            }
            return Ok(Some(line));
        }
    }

    fn field(&self, i: usize) -> &str {
        self.record[i].trim()
    }
}

fn cow_id(s: &str, line: u64) -> Result<CowId> {
    if s.is_empty() {
        return Err(Error::parse("malformed_row", line, "malformed row: empty cow_id"));
    }
    Ok(CowId::new(s))
}

fn date(s: &str, line: u64) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s, DATE_FMT)
        .map_err(|_| Error::parse("malformed_row", line, format!("malformed row: bad date `{s}`")))
}

fn number(s: &str, name: &str, line: u64) -> Result<f64> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::parse(
            "malformed_row",
            line,
            format!("malformed row: bad {name} `{s}`"),
        )),
    }
}

/// Parses `behavior.csv`. Rows come back sorted by `(cow_id, date)`.
pub fn parse_behavior<R: Read>(input: R, bounds: TempBounds) -> Result<Vec<BehaviorDay>> {
    let mut rows = Rows::open(input, BEHAVIOR_HEADER)?;
    let mut out: BTreeMap<(CowId, NaiveDate), BehaviorDay> = BTreeMap::new();
    while let Some(line) = rows.next()? {
        let id = cow_id(rows.field(0), line)?;
        let day = date(rows.field(1), line)?;
        let mut v = [0.0; 6];
        for (k, ch) in Channel::ALL.iter().enumerate() {
            v[k] = number(rows.field(2 + k), ch.name(), line)?;
            if ch.is_proportion() && !(0.0..=1.0).contains(&v[k]) {
                return Err(Error::parse(
                    "proportion_out_of_range",
                    line,
                    format!("proportion out of range: {} = {}", ch.name(), v[k]),
                ));
            }
        }
        if !(bounds.min..=bounds.max).contains(&v[5]) {
            return Err(Error::parse(
                "temperature_out_of_range",
                line,
                format!(
                    "temperature out of range: ear_temp = {} outside [{}, {}]",
                    v[5], bounds.min, bounds.max
                ),
            ));
        }
        let rec = BehaviorDay {
            cow_id: id.clone(),
            date: day,
            non_active: v[0],
            active: v[1],
            highly_active: v[2],
            eating: v[3],
            ruminating: v[4],
            ear_temp: v[5],
        };
        match out.entry((id, day)) {
            Entry::Vacant(e) => {
                e.insert(rec);
            }
            Entry::Occupied(e) => {
                return Err(Error::parse(
                    "duplicate_cow_day",
                    line,
                    format!("duplicate cow-day ({}, {})", e.key().0, e.key().1),
                ))
            }
        }
    }
    Ok(out.into_values().collect())
}

/// Parses `lesions.csv`. Rows come back sorted by `(cow_id, date)`.
pub fn parse_lesions<R: Read>(input: R) -> Result<Vec<LesionObservation>> {
    let mut rows = Rows::open(input, LESIONS_HEADER)?;
    let mut out: BTreeMap<(CowId, NaiveDate), LesionObservation> = BTreeMap::new();
    while let Some(line) = rows.next()? {
        let id = cow_id(rows.field(0), line)?;
        let day = date(rows.field(1), line)?;
        let status = match rows.field(2) {
            "none" => LesionStatus::None,
            "active" => LesionStatus::Active,
            "digressing" => LesionStatus::Digressing,
            other => {
                return Err(Error::parse(
                    "invalid_status",
                    line,
                    format!("invalid lesion status `{other}`"),
                ))
            }
        };
        let size = match rows.field(3) {
            "none" => LesionSize::None,
            "small" => LesionSize::Small,
            "medium" => LesionSize::Medium,
            "large" => LesionSize::Large,
            other => {
                return Err(Error::parse(
                    "invalid_size",
                    line,
                    format!("invalid lesion size `{other}`"),
                ))
            }
        };
        if (status == LesionStatus::None) != (size == LesionSize::None) {
            return Err(Error::parse(
                "status_size_mismatch",
                line,
                format!(
                    "lesion status `{}` inconsistent with size `{}`",
                    status.as_str(),
                    size.as_str()
                ),
            ));
        }
        let rec = LesionObservation {
            cow_id: id.clone(),
            date: day,
            status,
            size,
        };
        if out.insert((id.clone(), day), rec).is_some() {
            return Err(Error::parse(
                "duplicate_cow_day",
                line,
                format!("duplicate cow-day ({id}, {day})"),
            ));
        }
    }
    Ok(out.into_values().collect())
}

/// Parses `profiles.csv`. Rows come back sorted by `cow_id`.
pub fn parse_profiles<R: Read>(input: R) -> Result<Vec<CowProfile>> {
    let mut rows = Rows::open(input, PROFILES_HEADER)?;
    let mut out: BTreeMap<CowId, CowProfile> = BTreeMap::new();
    while let Some(line) = rows.next()? {
        let id = cow_id(rows.field(0), line)?;
        let parity: u32 = rows.field(1).parse().map_err(|_| {
            Error::parse(
                "malformed_row",
                line,
                format!("malformed row: bad parity `{}`", rows.field(1)),
            )
        })?;
        if parity < 1 {
            return Err(Error::parse("invalid_parity", line, "parity must be at least 1"));
        }
        let repro_status = match rows.field(2) {
            "open" => ReproStatus::Open,
            "pregnant" => ReproStatus::Pregnant,
            other => {
                return Err(Error::parse(
                    "invalid_repro_status",
                    line,
                    format!("invalid repro_status `{other}`"),
                ))
            }
        };
        let calving_date = date(rows.field(3), line)?;
        let rec = CowProfile {
            cow_id: id.clone(),
            parity,
            repro_status,
            calving_date,
        };
        if out.insert(id.clone(), rec).is_some() {
            return Err(Error::parse(
                "duplicate_cow",
                line,
                format!("duplicate cow profile {id}"),
            ));
        }
    }
    Ok(out.into_values().collect())
}

fn finish<W: Write>(mut w: Writer<W>) -> Result<()> {
    w.flush().map_err(|e| Error::Csv(e.into()))
}

/// Writes rows in canonical form: ISO dates and shortest round-trip floats.
pub fn write_behavior<W: Write>(writer: W, days: &[BehaviorDay]) -> Result<()> {
    let mut w = Writer::from_writer(writer);
    w.write_record(BEHAVIOR_HEADER.split(','))?;
    for d in days {
        let mut rec = vec![d.cow_id.to_string(), d.date.format(DATE_FMT).to_string()];
        rec.extend(d.channels().iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    finish(w)
}

pub fn write_lesions<W: Write>(writer: W, obs: &[LesionObservation]) -> Result<()> {
    let mut w = Writer::from_writer(writer);
    w.write_record(LESIONS_HEADER.split(','))?;
    for o in obs {
        w.write_record([
            o.cow_id.as_str(),
            &o.date.format(DATE_FMT).to_string(),
            o.status.as_str(),
            o.size.as_str(),
        ])?;
    }
    finish(w)
}

pub fn write_profiles<W: Write>(writer: W, profiles: &[CowProfile]) -> Result<()> {
    let mut w = Writer::from_writer(writer);
    w.write_record(PROFILES_HEADER.split(','))?;
    for p in profiles {
        w.write_record([
            p.cow_id.as_str(),
            &p.parity.to_string(),
            p.repro_status.as_str(),
            &p.calving_date.format(DATE_FMT).to_string(),
        ])?;
    }
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn behavior(body: &str) -> Result<Vec<BehaviorDay>> {
        parse_behavior(format!("{BEHAVIOR_HEADER}\n{body}").as_bytes(), TempBounds::default())
    }

    #[test]
    fn well_formed_row() {
        let rows = behavior("c1,2023-01-05,0.40,0.20,0.05,0.20,0.15,38.6\n").unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].cow_id.as_str(), "c1");
        assert_eq!(rows[0].active, 0.20);
        assert_eq!(rows[0].ear_temp, 38.6);
    }

    #[test]
    fn proportion_out_of_range_reports_line() {
        let err = behavior(
            "c1,2023-01-05,0.40,0.20,0.05,0.20,0.15,38.6\nc1,2023-01-06,0.40,1.3,0.05,0.20,0.15,38.6\n",
        )
        .unwrap_err();
        assert_eq!(err.code(), "proportion_out_of_range");
        assert_eq!(err.line(), Some(3));
        assert!(err.to_string().contains("proportion out of range"));
        assert!(err.to_string().ends_with("line 3"));
    }

    #[test]
    fn duplicate_cow_day() {
        let err = behavior(
            "c1,2023-01-05,0.40,0.20,0.05,0.20,0.15,38.6\nc1,2023-01-05,0.41,0.20,0.05,0.20,0.15,38.6\n",
        )
        .unwrap_err();
        assert_eq!(err.code(), "duplicate_cow_day");
        assert!(err.to_string().contains("duplicate cow-day"));
    }

    #[test]
    fn unknown_header() {
        let err = parse_behavior("cow,date\n".as_bytes(), TempBounds::default()).unwrap_err();
        assert_eq!(err.code(), "unknown_header");
    }

    #[test]
    fn malformed_rows() {
        assert_eq!(behavior("c1,2023-01-05,0.4\n").unwrap_err().code(), "malformed_row");
        assert_eq!(
            behavior("c1,2023-13-05,0.40,0.20,0.05,0.20,0.15,38.6\n").unwrap_err().code(),
            "malformed_row"
        );
        assert_eq!(
            behavior("c1,2023-01-05,x,0.20,0.05,0.20,0.15,38.6\n").unwrap_err().code(),
            "malformed_row"
        );
    }

    #[test]
    fn temperature_bounds() {
        let err = behavior("c1,2023-01-05,0.40,0.20,0.05,0.20,0.15,60\n").unwrap_err();
        assert_eq!(err.code(), "temperature_out_of_range");
        let rows = parse_behavior(
            format!("{BEHAVIOR_HEADER}\nc1,2023-01-05,0.40,0.20,0.05,0.20,0.15,60\n").as_bytes(),
            TempBounds { min: 0.0, max: 70.0 },
        )
        .unwrap();
        assert_eq!(rows.len(), 1);
    }

    #[test]
    fn sorted_output() {
        let rows = behavior(
            "c2,2023-01-01,0.4,0.2,0.05,0.2,0.15,38\nc1,2023-01-02,0.4,0.2,0.05,0.2,0.15,38\nc1,2023-01-01,0.4,0.2,0.05,0.2,0.15,38\n",
        )
        .unwrap();
        let keys: Vec<_> = rows.iter().map(|r| (r.cow_id.as_str(), r.date.to_string())).collect();
        assert_eq!(
            keys,
            vec![("c1", "2023-01-01".into()), ("c1", "2023-01-02".into()), ("c2", "2023-01-01".into())]
        );
    }

    #[test]
    fn lesion_status_size_invariant() {
        let ok = parse_lesions(format!("{LESIONS_HEADER}\nc1,2023-01-01,active,small\nc1,2023-01-02,none,none\n").as_bytes())
            .unwrap();
        assert_eq!(ok.len(), 2);
        let err = parse_lesions(format!("{LESIONS_HEADER}\nc1,2023-01-01,none,small\n").as_bytes()).unwrap_err();
        assert_eq!(err.code(), "status_size_mismatch");
        let err = parse_lesions(format!("{LESIONS_HEADER}\nc1,2023-01-01,active,none\n").as_bytes()).unwrap_err();
        assert_eq!(err.code(), "status_size_mismatch");
        let err = parse_lesions(format!("{LESIONS_HEADER}\nc1,2023-01-01,healing,small\n").as_bytes()).unwrap_err();
        assert_eq!(err.code(), "invalid_status");
    }

    #[test]
    fn profile_validation() {
        let ok = parse_profiles(format!("{PROFILES_HEADER}\nc1,2,pregnant,2022-11-01\n").as_bytes()).unwrap();
        assert_eq!(ok[0].parity, 2);
        assert_eq!(ok[0].repro_status, ReproStatus::Pregnant);
        let err = parse_profiles(format!("{PROFILES_HEADER}\nc1,0,open,2022-11-01\n").as_bytes()).unwrap_err();
        assert_eq!(err.code(), "invalid_parity");
        let err = parse_profiles(
            format!("{PROFILES_HEADER}\nc1,1,open,2022-11-01\nc1,2,open,2022-11-01\n").as_bytes(),
        )
        .unwrap_err();
        assert_eq!(err.code(), "duplicate_cow");
    }

    fn canonical_behavior() -> impl Strategy<Value = Vec<BehaviorDay>> {
        let prop = || (0u32..=10_000).prop_map(|v| v as f64 / 10_000.0);
        proptest::collection::btree_map(
            (0u8..4, 0u32..40),
            (prop(), prop(), prop(), prop(), prop(), (3500u32..4200).prop_map(|t| t as f64 / 100.0)),
            0..30,
        )
        .prop_map(|m| {
            let base = NaiveDate::from_ymd_opt(2023, 1, 1).unwrap();
            m.into_iter()
                .map(|((cow, day), (a, b, c, d, e, t))| BehaviorDay {
                    cow_id: CowId::new(format!("c{cow}")),
                    date: base + chrono::Days::new(day as u64),
                    non_active: a,
                    active: b,
                    highly_active: c,
                    eating: d,
                    ruminating: e,
                    ear_temp: t,
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn behavior_round_trip_is_byte_exact(days in canonical_behavior()) {
            let mut first = Vec::new();
            write_behavior(&mut first, &days).unwrap();
            let parsed = parse_behavior(first.as_slice(), TempBounds::default()).unwrap();
            prop_assert_eq!(&parsed, &days);
            let mut second = Vec::new();
            write_behavior(&mut second, &parsed).unwrap();
            prop_assert_eq!(first, second);
        }
    }
}
