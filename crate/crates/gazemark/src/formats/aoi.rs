//! AOI rectangles: `stimulus_id,scene_id,kind,x_px,y_px,w_px,h_px`.

use std::io::{Read, Write};

use gazemark_core::aoi::{AoiError, AoiRecord, AoiRect, AoiSet};
use gazemark_core::geometry::ScreenGeometry;

use super::{fmt_f64, Columns};

pub const AOI_COLUMNS: [&str; 7] = ["stimulus_id", "scene_id", "kind", "x_px", "y_px", "w_px", "h_px"];

fn schema(msg: impl Into<String>) -> AoiError {
    AoiError::Schema(msg.into())
}

/// Reads and validates an AOI file.
pub fn load_aoi_set<R: Read>(input: R, geometry: &ScreenGeometry) -> Result<AoiSet, AoiError> {
    let mut reader = csv::Reader::from_reader(input);
    let cols = Columns::new(reader.headers().map_err(|e| schema(e.to_string()))?);
    if let Some(m) = cols.first_missing(&AOI_COLUMNS) {
        return Err(schema(format!("missing column `{m}`")));
    }
    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| schema(e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let text = |name: &str| -> Result<String, AoiError> {
            let v = cols.get(&rec, name).trim();
            if v.is_empty() {
                Err(schema(format!("line {line}: {name} is empty")))
            } else {
                Ok(v.to_string())
            }
        };
        let num = |name: &str| -> Result<f64, AoiError> {
            let v = text(name)?;
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| schema(format!("line {line}: {name} is not a number: `{v}`")))
        };
        let kind = text("kind")?.parse().map_err(|e| schema(format!("line {line}: kind: {e}")))?;
        records.push(AoiRecord {
            scene_id: text("scene_id")?,
            rect: AoiRect { stimulus_id: text("stimulus_id")?, kind, x_px: num("x_px")?, y_px: num("y_px")?, w_px: num("w_px")?, h_px: num("h_px")? },
        });
    }
    AoiSet::from_records(records, geometry)
}

pub fn write_aoi_csv<W: Write>(out: W, aois: &AoiSet) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(AOI_COLUMNS)?;
    for r in aois.records() {
        let q = &r.rect;
        w.write_record([
            q.stimulus_id.clone(),
            r.scene_id.clone(),
            q.kind.code().to_string(),
            fmt_f64(q.x_px),
            fmt_f64(q.y_px),
            fmt_f64(q.w_px),
            fmt_f64(q.h_px),
        ])?;
    }
    w.flush()?;
    Ok(())
}
