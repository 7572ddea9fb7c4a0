//! CSV and JSON formats for deformations, states, flux profiles and residual
//! reports. Numbers are written with 17 significant digits so every value
//! round-trips exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::DeformationSpec;
use crate::error::{Error, Result};
use crate::evolution::ResidualReport;
use crate::flux::FluxProfile;
use crate::states::{Component, CoordinateGrid, CoordinateState, GridState, MomentumGrid, SpectralState};

/// Relative tolerance when recognizing a uniform centered grid in a file.
const GRID_TOLERANCE: f64 = 1e-9;

pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

/// User deformation document. A missing or null bound means unbounded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeformationDoc {
    pub beta: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "one")]
    pub mass: f64,
    pub f_odd_coeffs: Vec<f64>,
    #[serde(default)]
    pub momentum_bound: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl DeformationDoc {
    pub fn to_spec(&self) -> Result<DeformationSpec> {
        DeformationSpec::user_series(
            self.beta,
            self.f_odd_coeffs.clone(),
            self.momentum_bound.unwrap_or(f64::INFINITY),
        )?
        .with_units(self.hbar, self.mass)
    }

    /// Document describing `spec` through its odd Taylor coefficients.
    pub fn from_spec(spec: &DeformationSpec, count: usize) -> Result<Self> {
        let bound = spec.momentum_bound();
        Ok(Self {
            beta: spec.beta(),
            hbar: spec.hbar(),
            mass: spec.mass(),
            f_odd_coeffs: spec.odd_coeffs(count)?,
            momentum_bound: bound.is_finite().then_some(bound),
        })
    }
}

pub fn read_deformation(reader: impl Read) -> Result<DeformationSpec> {
    let doc: DeformationDoc = serde_json::from_reader(reader)?;
    doc.to_spec()
}

pub fn load_deformation(path: impl AsRef<Path>) -> Result<DeformationSpec> {
    read_deformation(BufReader::new(File::open(path)?))
}

fn csv_writer<W: Write>(writer: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(writer)
}

fn check_headers(reader: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<()> {
    let headers = reader.headers()?;
    let found: Vec<&str> = headers.iter().map(str::trim).collect();
    if found != expected {
        return Err(Error::Parse(format!(
            "expected header {}, found {}",
            expected.join(","),
            found.join(",")
        )));
    }
    Ok(())
}

fn parse_field(field: Option<&str>, line: usize) -> Result<f64> {
    let text = field.ok_or_else(|| Error::Parse(format!("row {line}: missing column")))?;
    text.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("row {line}: cannot parse {text:?}")))
}

fn read_triples(reader: impl Read, header: [&str; 3]) -> Result<Vec<(f64, Complex64)>> {
    let mut rdr = csv::Reader::from_reader(reader);
    check_headers(&mut rdr, &header)?;
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let x = parse_field(record.get(0), i + 2)?;
        let re = parse_field(record.get(1), i + 2)?;
        let im = parse_field(record.get(2), i + 2)?;
        rows.push((x, Complex64::new(re, im)));
    }
    Ok(rows)
}

fn write_triples<'a>(
    writer: impl Write,
    header: [&str; 3],
    rows: impl Iterator<Item = (f64, &'a Complex64)>,
) -> Result<()> {
    let mut w = csv_writer(writer);
    w.write_record(header)?;
    for (x, v) in rows {
        w.write_record([fmt_num(x), fmt_num(v.re), fmt_num(v.im)])?;
    }
    w.flush()?;
    Ok(())
}

/// Recovers `(M, spacing)` of a centered grid `(k - M/2)·spacing`.
fn centered_grid(nodes: &[f64], what: &str) -> Result<(usize, f64)> {
    let len = nodes.len();
    if len < 2 || !len.is_multiple_of(2) {
        return Err(Error::Parse(format!("{what} grid needs an even number ≥ 2 of rows, got {len}")));
    }
    let spacing = (nodes[len - 1] - nodes[0]) / (len - 1) as f64;
    let half = (len / 2) as f64;
    for (k, &v) in nodes.iter().enumerate() {
        let want = (k as f64 - half) * spacing;
        if (v - want).abs() > GRID_TOLERANCE * spacing * half {
            return Err(Error::Parse(format!(
                "{what} column is not the centered uniform grid (row {}: {v} vs {want})",
                k + 2
            )));
        }
    }
    Ok((len, spacing))
}

pub fn write_grid_state(state: &GridState, writer: impl Write) -> Result<()> {
    write_triples(writer, ["p", "re", "im"], state.momenta().into_iter().zip(state.values()))
}

/// Reads a `p,re,im` table; the grid is recovered from the momentum column.
pub fn read_grid_state(reader: impl Read, spec: Arc<DeformationSpec>, time: f64) -> Result<GridState> {
    let rows = read_triples(reader, ["p", "re", "im"])?;
    let nodes: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let (len, dp) = centered_grid(&nodes, "momentum")?;
    let grid = MomentumGrid::new(len, dp * (len / 2) as f64)?;
    GridState::new(spec, grid, rows.into_iter().map(|r| r.1).collect(), time)
}

pub fn write_coordinate_state(state: &CoordinateState, writer: impl Write) -> Result<()> {
    write_triples(writer, ["x", "re", "im"], state.x().into_iter().zip(state.values()))
}

pub fn read_coordinate_state(
    reader: impl Read,
    spec: Arc<DeformationSpec>,
    time: f64,
) -> Result<CoordinateState> {
    let rows = read_triples(reader, ["x", "re", "im"])?;
    let nodes: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let (len, dx) = centered_grid(&nodes, "coordinate")?;
    CoordinateState::new(
        spec,
        CoordinateGrid::new(len, dx)?,
        rows.into_iter().map(|r| r.1).collect(),
        time,
    )
}

#[derive(Serialize, Deserialize)]
struct ComponentDoc {
    p: f64,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct SpectralDoc {
    components: Vec<ComponentDoc>,
    t: f64,
}

pub fn write_spectral_state(state: &SpectralState, writer: impl Write) -> Result<()> {
    let doc = SpectralDoc {
        components: state
            .components()
            .iter()
            .map(|c| ComponentDoc {
                p: c.p,
                re: c.amplitude.re,
                im: c.amplitude.im,
            })
            .collect(),
        t: state.time(),
    };
    serde_json::to_writer_pretty(writer, &doc)?;
    Ok(())
}

/// Coincident momenta in the document are merged by adding amplitudes.
pub fn read_spectral_state(reader: impl Read, spec: Arc<DeformationSpec>) -> Result<SpectralState> {
    let doc: SpectralDoc = serde_json::from_reader(reader)?;
    SpectralState::from_components(
        spec,
        doc.t,
        doc.components.into_iter().map(|c| Component {
            p: c.p,
            amplitude: Complex64::new(c.re, c.im),
        }),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxSidecar {
    pub method: String,
    pub order: Option<usize>,
    pub t: f64,
    pub max_imag_residue: f64,
    pub truncation_estimate: Option<f64>,
}

impl From<&FluxProfile> for FluxSidecar {
    fn from(f: &FluxProfile) -> Self {
        Self {
            method: f.method.name().to_string(),
            order: f.order,
            t: f.time,
            max_imag_residue: f.max_imag_residue,
            truncation_estimate: f.truncation_estimate,
        }
    }
}

pub fn write_profile_csv(writer: impl Write, header: [&str; 2], x: &[f64], y: &[f64]) -> Result<()> {
    let mut w = csv_writer(writer);
    w.write_record(header)?;
    for (a, b) in x.iter().zip(y) {
        w.write_record([fmt_num(*a), fmt_num(*b)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_profile_csv(reader: impl Read, header: [&str; 2]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::Reader::from_reader(reader);
    check_headers(&mut rdr, &header)?;
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        x.push(parse_field(record.get(0), i + 2)?);
        y.push(parse_field(record.get(1), i + 2)?);
    }
    Ok((x, y))
}

/// Sidecar path `<stem>.json` next to a CSV file.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Writes `x,j` to `path` and the metadata sidecar beside it.
pub fn save_flux(profile: &FluxProfile, path: &Path) -> Result<()> {
    write_profile_csv(create(path)?, ["x", "j"], &profile.x, &profile.values)?;
    write_json(&sidecar_path(path), &FluxSidecar::from(profile))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualSidecar {
    pub max_abs: f64,
    pub l2: f64,
    pub rho_method: String,
    pub j_method: String,
    pub dt_fd: Option<f64>,
}

impl From<&ResidualReport> for ResidualSidecar {
    fn from(r: &ResidualReport) -> Self {
        Self {
            max_abs: r.max_abs,
            l2: r.l2,
            rho_method: r.rho_method.clone(),
            j_method: r.j_method.clone(),
            dt_fd: r.dt_fd,
        }
    }
}

pub fn save_residual(report: &ResidualReport, path: &Path) -> Result<()> {
    write_profile_csv(create(path)?, ["x", "residual"], &report.x, &report.residual)?;
    write_json(&sidecar_path(path), &ResidualSidecar::from(report))
}

pub fn save_grid_state(state: &GridState, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    write_grid_state(state, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn save_coordinate_state(state: &CoordinateState, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    write_coordinate_state(state, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn save_spectral_state(state: &SpectralState, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    write_spectral_state(state, &mut w)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::GaussianPacket;

    fn kempf() -> Arc<DeformationSpec> {
        Arc::new(DeformationSpec::kempf_tan(1.0).unwrap())
    }

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 1.7976931348623157e308, std::f64::consts::PI] {
            assert_eq!(fmt_num(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn grid_state_round_trip() {
        let grid = MomentumGrid::new(16, 0.8).unwrap();
        let g = GridState::gaussian(kempf(), grid, GaussianPacket::new(0.1, 0.15)).unwrap();
        let mut buf = Vec::new();
        write_grid_state(&g, &mut buf).unwrap();
        assert!(buf.starts_with(b"p,re,im\n"));
        let back = read_grid_state(buf.as_slice(), kempf(), 0.0).unwrap();
        assert_eq!(back.values(), g.values());
        assert_eq!(back.grid().len(), 16);
        assert!((back.grid().b_eff() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn spectral_state_round_trip_merges() {
        let json = r#"{"components":[{"p":0.5,"re":1,"im":0},{"p":0.5,"re":0,"im":2},{"p":-0.1,"re":3,"im":0}],"t":0.25}"#;
        let s = read_spectral_state(json.as_bytes(), kempf()).unwrap();
        assert_eq!(s.components().len(), 2);
        assert_eq!(s.time(), 0.25);
        let merged = s.components().iter().find(|c| c.p == 0.5).unwrap();
        assert_eq!(merged.amplitude, Complex64::new(1.0, 2.0));
        let mut buf = Vec::new();
        write_spectral_state(&s, &mut buf).unwrap();
        let again = read_spectral_state(buf.as_slice(), kempf()).unwrap();
        assert_eq!(again.components(), s.components());
    }

    #[test]
    fn deformation_document() {
        let json = r#"{"beta":0.5,"hbar":1,"mass":2,"f_odd_coeffs":[1,0.3333333333333333],"momentum_bound":1.2}"#;
        let spec = read_deformation(json.as_bytes()).unwrap();
        assert_eq!(spec.mass(), 2.0);
        assert_eq!(spec.momentum_bound(), 1.2);
        let bad = r#"{"beta":0.5,"f_odd_coeffs":[2.0]}"#;
        assert!(read_deformation(bad.as_bytes()).is_err());
    }

    #[test]
    fn wrong_header_is_rejected() {
        let text = "q,re,im\n0,1,0\n";
        assert!(matches!(
            read_grid_state(text.as_bytes(), kempf(), 0.0),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn non_uniform_grid_is_rejected() {
        let text = "x,re,im\n-1,0,0\n-0.4,0,0\n0,0,0\n0.5,0,0\n";
        assert!(read_coordinate_state(text.as_bytes(), kempf(), 0.0).is_err());
    }
}
