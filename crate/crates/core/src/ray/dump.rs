//! Path dump CSV: one row per traced path.

use std::io::{Read, Write};

use super::{InteractionKind, PathRecord};
use crate::geometry::Vec3;

pub const PATH_CSV_HEADER: [&str; 12] = [
    "rx_id",
    "path_id",
    "gain_abs",
    "phase_rad",
    "delay_s",
    "aod_az",
    "aod_el",
    "aoa_az",
    "aoa_el",
    "doppler_hz",
    "interaction_count",
    "interactions",
];

/// Flat view of a [`PathRecord`] as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRow {
    pub rx_id: String,
    pub path_id: usize,
    pub gain_abs: f64,
    pub phase_rad: f64,
    pub delay_s: f64,
    pub aod: (f64, f64),
    pub aoa: (f64, f64),
    pub doppler_hz: f64,
    pub interactions: Vec<(InteractionKind, Vec3)>,
}

impl PathRow {
    pub fn from_record(rx_id: &str, path_id: usize, p: &PathRecord) -> Self {
        PathRow {
            rx_id: rx_id.to_string(),
            path_id,
            gain_abs: p.gain.norm(),
            phase_rad: p.phase(),
            delay_s: p.delay,
            aod: p.aod(),
            aoa: p.aoa(),
            doppler_hz: p.doppler_hz,
            interactions: p.interactions.iter().map(|e| (e.kind, e.point)).collect(),
        }
    }
}

fn format_interactions(items: &[(InteractionKind, Vec3)]) -> String {
    items
        .iter()
        .map(|(k, p)| format!("{}:{}:{}:{}", k.label(), p.x, p.y, p.z))
        .collect::<Vec<_>>()
        .join(";")
}

fn parse_interactions(s: &str) -> Result<Vec<(InteractionKind, Vec3)>, String> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(';')
        .map(|item| {
            let parts: Vec<&str> = item.split(':').collect();
            if parts.len() != 4 {
                return Err(format!("malformed interaction `{item}`"));
            }
            let kind = InteractionKind::from_label(parts[0]).ok_or_else(|| format!("unknown interaction kind `{}`", parts[0]))?;
            let mut c = [0.0; 3];
            for (slot, txt) in c.iter_mut().zip(&parts[1..]) {
                *slot = txt.parse().map_err(|_| format!("bad coordinate `{txt}`"))?;
            }
            Ok((kind, Vec3::new(c[0], c[1], c[2])))
        })
        .collect()
}

pub fn write_path_csv<W: Write>(rows: &[PathRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PATH_CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.rx_id.clone(),
            r.path_id.to_string(),
            r.gain_abs.to_string(),
            r.phase_rad.to_string(),
            r.delay_s.to_string(),
            r.aod.0.to_string(),
            r.aod.1.to_string(),
            r.aoa.0.to_string(),
            r.aoa.1.to_string(),
            r.doppler_hz.to_string(),
            r.interactions.len().to_string(),
            format_interactions(&r.interactions),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_path_csv<R: Read>(input: R) -> Result<Vec<PathRow>, String> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers().map_err(|e| e.to_string())?.clone();
    if header.iter().ne(PATH_CSV_HEADER.iter().copied()) {
        return Err("unexpected path CSV header".into());
    }
    let mut rows = Vec::new();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let f = |i: usize| -> Result<f64, String> {
            rec[i].parse().map_err(|_| format!("row {}: bad number `{}`", line + 1, &rec[i]))
        };
        let interactions = parse_interactions(&rec[11]).map_err(|e| format!("row {}: {e}", line + 1))?;
        let count: usize = rec[10].parse().map_err(|_| format!("row {}: bad interaction count", line + 1))?;
        if count != interactions.len() {
            return Err(format!("row {}: interaction count does not match the list", line + 1));
        }
        rows.push(PathRow {
            rx_id: rec[0].to_string(),
            path_id: rec[1].parse().map_err(|_| format!("row {}: bad path id", line + 1))?,
            gain_abs: f(2)?,
            phase_rad: f(3)?,
            delay_s: f(4)?,
            aod: (f(5)?, f(6)?),
            aoa: (f(7)?, f(8)?),
            doppler_hz: f(9)?,
            interactions,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let rows = vec![
            PathRow {
                rx_id: "mt0".into(),
                path_id: 0,
                gain_abs: 1.234e-5,
                phase_rad: -0.1,
                delay_s: 3.3e-8,
                aod: (0.1, 0.2),
                aoa: (-3.0, 0.0),
                doppler_hz: 0.0,
                interactions: vec![],
            },
            PathRow {
                rx_id: "mt0".into(),
                path_id: 1,
                gain_abs: 1.0 / 3.0,
                phase_rad: 2.0,
                delay_s: 1e-7,
                aod: (0.5, -0.25),
                aoa: (1.0, 0.125),
                doppler_hz: 12.5,
                interactions: vec![
                    (InteractionKind::Reflection, Vec3::new(1.0, 2.0, 0.1 + 0.2)),
                    (InteractionKind::Diffraction, Vec3::new(-0.0, 5.0, 1.0 / 7.0)),
                ],
            },
        ];
        let mut buf = Vec::new();
        write_path_csv(&rows, &mut buf).unwrap();
        assert_eq!(read_path_csv(buf.as_slice()).unwrap(), rows);
    }
}
