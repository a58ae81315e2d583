//! Field snapshots on a uniform lattice spanning the box, as plain text:
//!
//! ```text
//! # field v
//! # components 2
//! # dims 65 65
//! # lower 0.00000000e0 0.00000000e0
//! # upper 1.00000000e0 1.00000000e0
//! # time 1.00000000e-1
//! <one lattice point per line, first axis slowest>
//! ```

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use eulerswell::solver::{Discretization, FieldState};

use crate::error::CliError;

pub const FIELDS: [&str; 5] = ["rho", "v", "detF", "z", "mu"];

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub field: String,
    pub components: usize,
    pub dims: Vec<usize>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub time: f64,
    /// Row-major, `components` values per lattice point.
    pub values: Vec<f64>,
}

impl Snapshot {
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Formats with 9 significant digits.
pub fn fmt9(x: f64) -> String {
    format!("{x:.8e}")
}

/// Lattice points of `disc`'s box with `n` points per axis, first axis
/// slowest.
pub fn lattice(disc: &Discretization<f64>, n: usize) -> Vec<[f64; 3]> {
    let dom = disc.grid.domain();
    let d = dom.dim();
    let total = n.pow(d as u32);
    let mut out = Vec::with_capacity(total);
    for flat in 0..total {
        let mut x = [0.0; 3];
        let mut rem = flat;
        for a in (0..d).rev() {
            let i = rem % n;
            rem /= n;
            let s = i as f64 / (n - 1) as f64;
            x[a] = dom.lower(a) + s * dom.length(a);
        }
        out.push(x);
    }
    out
}

/// Samples every exported field of `state` on the lattice.
pub fn sample(
    disc: &Discretization<f64>,
    state: &FieldState<f64>,
    n: usize,
) -> Result<Vec<Snapshot>, CliError> {
    let dom = disc.grid.domain();
    let d = dom.dim();
    let pts = lattice(disc, n);
    let core = |e| crate::error::from_core(e, 0, state.t);
    let v = disc.vspace.eval_field(&state.v, &pts).map_err(core)?;
    let z = disc.zspace.eval_field(&state.z, &pts).map_err(core)?;
    let mu = disc.zspace.eval_field(&state.mu, &pts).map_err(core)?;
    let det: Vec<f64> = state.transport.f.iter().map(|f| f.det()).collect();
    let rho = &state.transport.rho;
    let make = |field: &str, components: usize, values: Vec<f64>| Snapshot {
        field: field.to_string(),
        components,
        dims: vec![n; d],
        lower: (0..d).map(|a| dom.lower(a)).collect(),
        upper: (0..d).map(|a| dom.upper(a)).collect(),
        time: state.t,
        values,
    };
    Ok(vec![
        make(
            "rho",
            1,
            pts.iter().map(|x| disc.grid.interpolate(rho, x)).collect(),
        ),
        make("v", d, v.iter().flat_map(|v| v[..d].to_vec()).collect()),
        make(
            "detF",
            1,
            pts.iter().map(|x| disc.grid.interpolate(&det, x)).collect(),
        ),
        make("z", 1, z),
        make("mu", 1, mu),
    ])
}

pub fn file_name(field: &str, index: usize) -> String {
    format!("{field}_t{index:06}.dat")
}

pub fn write(dir: &Path, index: usize, snap: &Snapshot) -> Result<PathBuf, CliError> {
    let path = dir.join(file_name(&snap.field, index));
    let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
    let mut w = BufWriter::new(file);
    write_to(&mut w, snap).map_err(|e| CliError::io(&path, e))?;
    w.flush().map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

pub fn write_to<W: Write>(w: &mut W, s: &Snapshot) -> std::io::Result<()> {
    let join = |v: &[f64]| v.iter().map(|x| fmt9(*x)).collect::<Vec<_>>().join(" ");
    writeln!(w, "# field {}", s.field)?;
    writeln!(w, "# components {}", s.components)?;
    writeln!(
        w,
        "# dims {}",
        s.dims
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    )?;
    writeln!(w, "# lower {}", join(&s.lower))?;
    writeln!(w, "# upper {}", join(&s.upper))?;
    writeln!(w, "# time {}", fmt9(s.time))?;
    for chunk in s.values.chunks(s.components.max(1)) {
        writeln!(w, "{}", join(chunk))?;
    }
    Ok(())
}

pub fn read(path: &Path) -> Result<Snapshot, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text).map_err(|m| {
        CliError::io(
            path,
            std::io::Error::new(std::io::ErrorKind::InvalidData, m),
        )
    })
}

pub fn parse(text: &str) -> Result<Snapshot, String> {
    let mut snap = Snapshot {
        field: String::new(),
        components: 1,
        dims: Vec::new(),
        lower: Vec::new(),
        upper: Vec::new(),
        time: 0.0,
        values: Vec::new(),
    };
    let floats = |rest: &str| -> Result<Vec<f64>, String> {
        rest.split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
            .collect()
    };
    for (no, line) in text.lines().enumerate() {
        if let Some(h) = line.strip_prefix("# ") {
            let (key, rest) = h.split_once(' ').unwrap_or((h, ""));
            match key {
                "field" => snap.field = rest.to_string(),
                "components" => {
                    snap.components = rest
                        .trim()
                        .parse()
                        .map_err(|e| format!("line {}: {e}", no + 1))?
                }
                "dims" => {
                    snap.dims = rest
                        .split_whitespace()
                        .map(|t| t.parse().map_err(|e| format!("line {}: {e}", no + 1)))
                        .collect::<Result<_, _>>()?
                }
                "lower" => snap.lower = floats(rest)?,
                "upper" => snap.upper = floats(rest)?,
                "time" => snap.time = floats(rest)?.first().copied().ok_or("missing time")?,
                _ => return Err(format!("line {}: unknown header {key:?}", no + 1)),
            }
        } else if !line.trim().is_empty() {
            let row = floats(line)?;
            if row.len() != snap.components {
                return Err(format!(
                    "line {}: expected {} values",
                    no + 1,
                    snap.components
                ));
            }
            snap.values.extend(row);
        }
    }
    if snap.values.len() != snap.len() * snap.components {
        return Err(format!(
            "expected {} points, found {}",
            snap.len(),
            snap.values.len() / snap.components.max(1)
        ));
    }
    Ok(snap)
}
