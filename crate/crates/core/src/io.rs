//! Model file format and plane heatmap export.
//!
//! A model file is little-endian throughout:
//!
//! ```text
//! magic        4 bytes  "IDSM"
//! version      u32      1
//! n_inputs     u32
//! n_groups     u32
//! input specs  n_inputs x (min f64, max f64, levels u32)
//! output spec  min f64, max f64, levels u32
//! radii        radius_in f64, radius_out f64
//! stored       n_groups x (count u32, count x level u32)
//! grids        n_groups x n_inputs x (n_out x n_in f32, row-major,
//!              row r = output level r + 1, column c = input level c + 1)
//! ```

use std::collections::BTreeSet;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::model::{IdsGroup, IdsPlane, Model, ModelSpecs};
use crate::quant::QuantizationSpec;
use crate::stain::StainRadii;

const MAGIC: &[u8; 4] = b"IDSM";
const VERSION: u32 = 1;

pub fn write_model<W: Write>(model: &Model, mut out: W) -> Result<()> {
    out.write_all(MAGIC)?;
    put_u32(&mut out, VERSION)?;
    put_u32(&mut out, model.input_count() as u32)?;
    put_u32(&mut out, model.group_count() as u32)?;
    for spec in model
        .input_specs()
        .iter()
        .chain(std::iter::once(model.output_spec()))
    {
        put_f64(&mut out, spec.min())?;
        put_f64(&mut out, spec.max())?;
        put_u32(&mut out, spec.levels() as u32)?;
    }
    put_f64(&mut out, model.radii().radius_in())?;
    put_f64(&mut out, model.radii().radius_out())?;
    for group in model.groups() {
        put_u32(&mut out, group.stored_output_levels().len() as u32)?;
        for &level in group.stored_output_levels() {
            put_u32(&mut out, level as u32)?;
        }
    }
    let mut buf = Vec::new();
    for group in model.groups() {
        for plane in group.planes() {
            buf.clear();
            for row in 1..=plane.output_levels() {
                for col in 1..=plane.input_levels() {
                    buf.extend_from_slice(&plane.get(col, row).to_le_bytes());
                }
            }
            out.write_all(&buf)?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_model<R: Read>(mut input: R) -> Result<Model> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic).map_err(truncated)?;
    if &magic != MAGIC {
        return Err(Error::ModelFormat("bad magic".into()));
    }
    let version = get_u32(&mut input)?;
    if version != VERSION {
        return Err(Error::ModelFormat(format!("unsupported version {version}")));
    }
    let n_inputs = get_u32(&mut input)? as usize;
    let n_groups = get_u32(&mut input)? as usize;
    let mut specs = Vec::with_capacity(n_inputs + 1);
    for _ in 0..=n_inputs {
        let min = get_f64(&mut input)?;
        let max = get_f64(&mut input)?;
        let levels = get_u32(&mut input)? as usize;
        specs.push(QuantizationSpec::new(min, max, levels)?);
    }
    let output = specs.pop().expect("output spec read");
    let radii = StainRadii::new(get_f64(&mut input)?, get_f64(&mut input)?)?;
    let mut stored = Vec::with_capacity(n_groups);
    for _ in 0..n_groups {
        let count = get_u32(&mut input)? as usize;
        let mut levels = BTreeSet::new();
        for _ in 0..count {
            let level = get_u32(&mut input)? as usize;
            if !(1..=output.levels()).contains(&level) || !levels.insert(level) {
                return Err(Error::ModelFormat(format!("invalid stored level {level}")));
            }
        }
        stored.push(levels);
    }
    let model_specs = ModelSpecs::new(specs, output);
    let n_out = output.levels();
    let mut groups = Vec::with_capacity(n_groups);
    for levels in stored {
        let mut planes = Vec::with_capacity(n_inputs);
        for spec in &model_specs.inputs {
            let n_in = spec.levels();
            let mut raw = vec![0u8; n_in * n_out * 4];
            input.read_exact(&mut raw).map_err(truncated)?;
            let mut cells = vec![0f32; n_in * n_out];
            for (i, chunk) in raw.chunks_exact(4).enumerate() {
                let value = f32::from_le_bytes(chunk.try_into().expect("4-byte chunk"));
                if !(0.0..=1.0).contains(&value) {
                    return Err(Error::ModelFormat(format!(
                        "cell value {value} outside [0, 1]"
                    )));
                }
                let (row, col) = (i / n_in, i % n_in);
                cells[col * n_out + row] = value;
            }
            planes.push(IdsPlane::from_cells(*spec, output, cells));
        }
        groups.push(IdsGroup::from_parts(planes, levels));
    }
    let mut trailing = [0u8; 1];
    if input.read(&mut trailing)? != 0 {
        return Err(Error::ModelFormat("trailing bytes".into()));
    }
    Ok(Model::from_parts(model_specs, radii, groups))
}

/// Plane as CSV: one line per output level (level 1 first), one field per input level.
pub fn write_plane_csv<W: Write>(plane: &IdsPlane, mut out: W) -> Result<()> {
    for row in plane.rows() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    out.flush()?;
    Ok(())
}

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::ModelFormat("truncated file".into())
    } else {
        e.into()
    }
}

fn put_u32<W: Write>(out: &mut W, v: u32) -> Result<()> {
    out.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn put_f64<W: Write>(out: &mut W, v: f64) -> Result<()> {
    out.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn get_u32<R: Read>(input: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    input.read_exact(&mut b).map_err(truncated)?;
    Ok(u32::from_le_bytes(b))
}

fn get_f64<R: Read>(input: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    input.read_exact(&mut b).map_err(truncated)?;
    Ok(f64::from_le_bytes(b))
}
