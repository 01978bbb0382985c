//! Stop-door event files: `stop_id,door_id,direction,manual,automatic`.
//!
//! Rows are never repaired. Any malformed row aborts the read with its line
//! number.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use apcval_core::{Direction, StopDoorEvent};

use crate::error::{Error, Result};

pub const HEADER: [&str; 5] = ["stop_id", "door_id", "direction", "manual", "automatic"];

pub fn read_events_path(path: &Path) -> Result<Vec<StopDoorEvent>> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_events(file)
}

pub fn read_events<R: Read>(reader: R) -> Result<Vec<StopDoorEvent>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .from_reader(reader);
    let mut records = rdr.records();

    let header = match records.next() {
        None => {
            return Err(Error::Malformed {
                line: 1,
                message: "missing header".into(),
            })
        }
        Some(r) => r.map_err(csv_error)?,
    };
    if header.iter().ne(HEADER) {
        return Err(Error::Malformed {
            line: 1,
            message: format!("expected header `{}`", HEADER.join(",")),
        });
    }

    let mut events = Vec::new();
    for record in records {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        let malformed = |message: String| Error::Malformed { line, message };

        let direction = record[2].parse::<Direction>().map_err(malformed)?;
        let count = |idx: usize, name: &str| {
            record[idx].parse::<u64>().map_err(|_| {
                malformed(format!(
                    "{name} must be a non-negative integer, got `{}`",
                    &record[idx]
                ))
            })
        };
        let manual = count(3, "manual")?;
        let automatic = count(4, "automatic")?;
        events.push(StopDoorEvent::new(
            &record[0], &record[1], direction, manual, automatic,
        ));
    }
    Ok(events)
}

fn csv_error(err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line());
    Error::Malformed {
        line,
        message: err.to_string(),
    }
}

pub fn write_events<W: Write>(writer: W, events: &[StopDoorEvent]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Malformed {
        line: 0,
        message: e.to_string(),
    };
    wtr.write_record(HEADER).map_err(io)?;
    for e in events {
        wtr.write_record([
            e.stop_id.as_str(),
            e.door_id.as_str(),
            e.direction.as_str(),
            &e.manual.to_string(),
            &e.automatic.to_string(),
        ])
        .map_err(io)?;
    }
    wtr.flush().map_err(|source| Error::Io {
        path: "<writer>".into(),
        source,
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(s: &str) -> Result<Vec<StopDoorEvent>> {
        read_events(s.as_bytes())
    }

    #[test]
    fn reads_well_formed_rows() {
        let events = read(
            "stop_id,door_id,direction,manual,automatic\n\
             S1,D1,boarding,4,5\n\
             S1,D1,alighting,3,3\n",
        )
        .unwrap();
        assert_eq!(events.len(), 2);
        assert_eq!(events[0].automatic, 5);
        assert_eq!(events[1].direction, Direction::Alighting);
    }

    #[test]
    fn malformed_rows_report_line_numbers() {
        let cases = [
            ("stop_id,door_id,direction,manual,automatic\nS1,D1,boarding,4,5\nS2,D1,boarding,-1,5\n", 3),
            ("stop_id,door_id,direction,manual,automatic\nS1,D1,up,4,5\n", 2),
            ("stop_id,door_id,direction,manual,automatic\nS1,D1,boarding,4\n", 2),
            ("stop_id,door_id,direction,manual,automatic\nS1,D1,boarding,4,5\nS1,D1,boarding,4.5,5\n", 3),
            ("stop,door,direction,manual,automatic\n", 1),
            ("", 1),
        ];
        for (input, expect) in cases {
            match read(input) {
                Err(Error::Malformed { line, .. }) => assert_eq!(line, expect, "{input:?}"),
                other => panic!("expected malformed error for {input:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn header_only_is_an_empty_list() {
        assert!(read("stop_id,door_id,direction,manual,automatic\n")
            .unwrap()
            .is_empty());
    }

    #[test]
    fn write_then_read() {
        let events = apcval_core::proof_of_concept_sample(5, 3).unwrap();
        let mut buf = Vec::new();
        write_events(&mut buf, events.events()).unwrap();
        assert_eq!(read_events(buf.as_slice()).unwrap(), events.events());
    }
}
