//! On-disk formats: trajectory and profile JSON Lines, trip CSV.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{ExpertTrajectory, MonthlyObservation, PassengerProfile, TripRecord};
use crate::error::{Error, Result};
use crate::mdp::{ActionLabel, ConditionVector, StateVector, STATE_DIM};

/// One trajectory line:
/// `{"pid":..,"cond":{"flex":..,"con":..,"dis":..,"g":[gf,gc,gd]},"obs":[{"m":..,"s":[..11..],"a":0|1},..]}`
#[derive(Serialize, Deserialize)]
struct TrajLine {
    pid: u32,
    cond: CondLine,
    obs: Vec<ObsLine>,
}

#[derive(Serialize, Deserialize)]
struct CondLine {
    flex: f64,
    con: f64,
    dis: f64,
    g: [u8; 3],
}

#[derive(Serialize, Deserialize)]
struct ObsLine {
    m: i32,
    s: Vec<f64>,
    a: u8,
}

pub fn write_trajectories(path: &Path, trajectories: &[ExpertTrajectory]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for t in trajectories {
        let line = TrajLine {
            pid: t.pid,
            cond: CondLine {
                flex: t.condition.flex_raw,
                con: t.condition.con_raw,
                dis: t.condition.dis_raw,
                g: [t.condition.g_flex, t.condition.g_con, t.condition.g_dis],
            },
            obs: t
                .observations
                .iter()
                .map(|o| ObsLine {
                    m: o.month_index,
                    s: o.state.to_array().to_vec(),
                    a: o.action.value(),
                })
                .collect(),
        };
        serde_json::to_writer(&mut w, &line).map_err(|e| Error::json(path, e))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_trajectories(path: &Path) -> Result<Vec<ExpertTrajectory>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: TrajLine = serde_json::from_str(&line).map_err(|e| Error::json(path, e))?;
        let mut observations = Vec::with_capacity(parsed.obs.len());
        for o in parsed.obs {
            let arr: [f64; STATE_DIM] = o
                .s
                .try_into()
                .map_err(|_| Error::Validation("state array must have 11 entries".into()))?;
            observations.push(MonthlyObservation {
                month_index: o.m,
                state: StateVector::from_array(&arr)?,
                action: ActionLabel::from_value(o.a)?,
            });
        }
        out.push(ExpertTrajectory {
            pid: parsed.pid,
            observations,
            condition: ConditionVector {
                flex_raw: parsed.cond.flex,
                con_raw: parsed.cond.con,
                dis_raw: parsed.cond.dis,
                g_flex: parsed.cond.g[0],
                g_con: parsed.cond.g[1],
                g_dis: parsed.cond.g[2],
            },
        });
    }
    Ok(out)
}

pub fn write_profiles(path: &Path, profiles: &[PassengerProfile]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for p in profiles {
        serde_json::to_writer(&mut w, p).map_err(|e| Error::json(path, e))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_profiles(path: &Path) -> Result<Vec<PassengerProfile>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::json(path, e))?);
    }
    Ok(out)
}

/// CSV with header `pid,date,tin,tout,orig,dest,fare,disc`.
pub fn write_trips(path: &Path, trips: &[TripRecord]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    for t in trips {
        w.serialize(t).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_trips(path: &Path) -> Result<Vec<TripRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(BufReader::new(file));
    let mut out = Vec::new();
    for row in r.deserialize() {
        out.push(row.map_err(|e| Error::csv(path, e))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{synthesize_population, extract_features, GeneratorConfig};
    use tempfile::TempDir;

    fn small_dataset() -> (Vec<TripRecord>, Vec<PassengerProfile>, Vec<ExpertTrajectory>) {
        let cfg = GeneratorConfig {
            n_passengers: 12,
            ..GeneratorConfig::default()
        };
        let (trips, profiles) = synthesize_population(&cfg, 0).unwrap();
        let extraction =
            extract_features(&trips, cfg.launch().unwrap(), &cfg.discount_set()).unwrap();
        (trips, profiles, extraction.trajectories)
    }

    #[test]
    fn trajectory_round_trip_is_structurally_identical() {
        let (_, _, trajs) = small_dataset();
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("trajectories.jsonl");
        write_trajectories(&path, &trajs).unwrap();
        let back = read_trajectories(&path).unwrap();
        assert_eq!(trajs, back);
    }

    #[test]
    fn trajectory_writes_are_byte_identical() {
        let (_, _, trajs) = small_dataset();
        let dir = TempDir::new().unwrap();
        let p1 = dir.path().join("a.jsonl");
        let p2 = dir.path().join("b.jsonl");
        write_trajectories(&p1, &trajs).unwrap();
        write_trajectories(&p2, &trajs).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }

    #[test]
    fn profile_round_trip() {
        let (_, profiles, _) = small_dataset();
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("profiles.jsonl");
        write_profiles(&path, &profiles).unwrap();
        let back = read_profiles(&path).unwrap();
        assert_eq!(profiles, back);
    }

    #[test]
    fn trip_csv_round_trip_and_header() {
        let (trips, _, _) = small_dataset();
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("trips.csv");
        write_trips(&path, &trips).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("pid,date,tin,tout,orig,dest,fare,disc\n"));
        let back = read_trips(&path).unwrap();
        assert_eq!(trips, back);
    }

    #[test]
    fn missing_file_reports_path() {
        let err = read_trajectories(Path::new("/nonexistent/t.jsonl")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/t.jsonl"));
    }
}
