//! File formats: trajectory / count / proportion CSV and model JSON.
//!
//! Every real is written with 17 significant digits (`{:.16e}`), which
//! round-trips `f64` exactly. CSV uses `.` as the decimal separator.

use std::collections::HashSet;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::baseline::{L2Chart, L2Model};
use crate::compositional::{CompositionCurve, CountPanel};
use crate::error::{Error, Result};
use crate::manifold::{ManifoldKind, ManifoldSpec, Point};
use crate::rfpca::RfpcaModel;
use crate::trajectory::{shared_grid, TrajectorySample};

/// Deviation from the manifold accepted (and projected away) on ingestion.
pub const INGEST_TOLERANCE: f64 = 1e-6;
/// Points closer than this to the manifold are kept verbatim, so written files re-read bit for bit.
pub const ROUNDING_TOLERANCE: f64 = 1e-14;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Compact JSON with 17 significant digits for every float.
struct SignificantDigits;

impl Formatter for SignificantDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

pub fn to_json_writer<W: Write, T: Serialize>(writer: W, value: &T) -> Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(writer, SignificantDigits);
    value.serialize(&mut ser)?;
    Ok(())
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    to_json_writer(&mut buf, value)?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ManifoldDoc {
    pub kind: String,
    pub intrinsic_dim: usize,
}

impl From<&ManifoldSpec> for ManifoldDoc {
    fn from(spec: &ManifoldSpec) -> Self {
        let kind = match spec.kind() {
            ManifoldKind::Sphere => "sphere",
            ManifoldKind::SpecialOrthogonal3 => "so3",
        };
        ManifoldDoc { kind: kind.into(), intrinsic_dim: spec.intrinsic_dim() }
    }
}

impl ManifoldDoc {
    pub fn to_spec(&self) -> Result<ManifoldSpec> {
        match self.kind.as_str() {
            "sphere" => ManifoldSpec::sphere(self.intrinsic_dim),
            "so3" => Ok(ManifoldSpec::so3()),
            other => Err(Error::InvalidConfig(format!("manifold kind {other:?} is not a manifold"))),
        }
    }
}

/// On-disk layout shared by Riemannian and L2 models.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelDoc {
    pub manifold: ManifoldDoc,
    pub grid: Vec<f64>,
    /// `[m][d0]`.
    pub mean: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    /// `[k_max][m][d0]`.
    pub eigenfunctions: Vec<Vec<Vec<f64>>>,
    /// `[n][k_max]`.
    pub scores: Vec<Vec<f64>>,
    pub fve: Vec<Option<f64>>,
    pub subject_ids: Vec<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub compositional: bool,
    /// For L2 models: the manifold the data came from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_manifold: Option<ManifoldDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<String>,
}

pub const EUCLIDEAN_AMBIENT: &str = "euclidean-ambient";

fn fve_to_doc(fve: &[f64]) -> Vec<Option<f64>> {
    fve.iter().map(|&f| f.is_finite().then_some(f)).collect()
}

fn fve_from_doc(fve: &[Option<f64>]) -> Vec<f64> {
    fve.iter().map(|f| f.unwrap_or(f64::NAN)).collect()
}

impl From<&RfpcaModel> for ModelDoc {
    fn from(model: &RfpcaModel) -> Self {
        ModelDoc {
            manifold: (&model.spec).into(),
            grid: model.grid.clone(),
            mean: model.mean_curve.iter().map(|p| p.coords.clone()).collect(),
            eigenvalues: model.eigenvalues.clone(),
            eigenfunctions: model.eigenfunctions.clone(),
            scores: model.scores.clone(),
            fve: fve_to_doc(&model.fve),
            subject_ids: model.subject_ids.clone(),
            compositional: model.compositional,
            source_manifold: None,
            chart: None,
        }
    }
}

impl From<&L2Model> for ModelDoc {
    fn from(model: &L2Model) -> Self {
        let dim = model.mean.first().map_or(0, |v| v.len());
        ModelDoc {
            manifold: ManifoldDoc { kind: EUCLIDEAN_AMBIENT.into(), intrinsic_dim: dim },
            grid: model.grid.clone(),
            mean: model.mean.clone(),
            eigenvalues: model.eigenvalues.clone(),
            eigenfunctions: model.eigenfunctions.clone(),
            scores: model.scores.clone(),
            fve: fve_to_doc(&model.fve),
            subject_ids: model.subject_ids.clone(),
            compositional: false,
            source_manifold: Some((&model.source).into()),
            chart: Some(
                match model.chart {
                    L2Chart::Ambient => "ambient",
                    L2Chart::LonLat => "lonlat",
                }
                .into(),
            ),
        }
    }
}

impl ModelDoc {
    pub fn is_l2(&self) -> bool {
        self.manifold.kind == EUCLIDEAN_AMBIENT
    }

    fn check_shapes(&self, d0: usize) -> Result<()> {
        let m = self.grid.len();
        let k = self.eigenvalues.len();
        let bad = |what: &str| Error::InvalidConfig(format!("model document: inconsistent {what}"));
        if self.mean.len() != m || self.mean.iter().any(|v| v.len() != d0) {
            return Err(bad("mean"));
        }
        if self.eigenfunctions.len() != k
            || self.eigenfunctions.iter().any(|f| f.len() != m || f.iter().any(|v| v.len() != d0))
        {
            return Err(bad("eigenfunctions"));
        }
        if self.scores.len() != self.subject_ids.len() || self.scores.iter().any(|s| s.len() != k) {
            return Err(bad("scores"));
        }
        if self.fve.len() != k {
            return Err(bad("fve"));
        }
        Ok(())
    }

    pub fn into_rfpca(self) -> Result<RfpcaModel> {
        let spec = self.manifold.to_spec()?;
        self.check_shapes(spec.ambient_dim())?;
        Ok(RfpcaModel {
            spec,
            grid: self.grid,
            mean_curve: self.mean.into_iter().map(Point::new).collect(),
            eigenvalues: self.eigenvalues,
            eigenfunctions: self.eigenfunctions,
            scores: self.scores,
            fve: fve_from_doc(&self.fve),
            subject_ids: self.subject_ids,
            compositional: self.compositional,
            warnings: Vec::new(),
        })
    }

    pub fn into_l2(self) -> Result<L2Model> {
        if !self.is_l2() {
            return Err(Error::InvalidConfig("not an L2 model document".into()));
        }
        let source = self
            .source_manifold
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("L2 model without source_manifold".into()))?
            .to_spec()?;
        let chart = match self.chart.as_deref() {
            None | Some("ambient") => L2Chart::Ambient,
            Some("lonlat") => L2Chart::LonLat,
            Some(other) => return Err(Error::InvalidConfig(format!("unknown chart {other:?}"))),
        };
        self.check_shapes(self.manifold.intrinsic_dim)?;
        Ok(L2Model {
            source,
            chart,
            grid: self.grid,
            mean: self.mean,
            eigenvalues: self.eigenvalues,
            eigenfunctions: self.eigenfunctions,
            scores: self.scores,
            fve: fve_from_doc(&self.fve),
            subject_ids: self.subject_ids,
            warnings: Vec::new(),
        })
    }
}

pub fn write_model_json<W: Write>(writer: W, model: &RfpcaModel) -> Result<()> {
    to_json_writer(writer, &ModelDoc::from(model))
}

pub fn read_model_json<R: Read>(reader: R) -> Result<RfpcaModel> {
    let doc: ModelDoc = serde_json::from_reader(reader)?;
    doc.into_rfpca()
}

fn parse_field(record: &csv::StringRecord, row: usize, column: usize) -> Result<f64> {
    let raw = record.get(column).unwrap_or("");
    raw.trim().parse::<f64>().map_err(|e| Error::Parse { row, column: column + 1, message: format!("{raw:?}: {e}") })
}

fn check_header(headers: &csv::StringRecord, prefix: &str, width: Option<usize>) -> Result<usize> {
    let names: Vec<&str> = headers.iter().map(str::trim).collect();
    if names.len() < 3 || names[0] != "id" || names[1] != "t" {
        return Err(Error::Parse { row: 1, column: 1, message: format!("expected header id,t,{prefix}1,...") });
    }
    for (c, name) in names[2..].iter().enumerate() {
        if *name != format!("{prefix}{}", c + 1) {
            return Err(Error::Parse {
                row: 1,
                column: c + 3,
                message: format!("expected column {prefix}{}, found {name:?}", c + 1),
            });
        }
    }
    let found = names.len() - 2;
    if let Some(w) = width {
        if w != found {
            return Err(Error::DimensionMismatch { expected: w, actual: found });
        }
    }
    Ok(found)
}

/// One subject's rows: `(id, times, values)`.
type Group = (String, Vec<f64>, Vec<Vec<f64>>);

/// Rows grouped by `id` in first-appearance order.
fn read_grouped<R: Read>(reader: R, prefix: &str, width: Option<usize>) -> Result<Vec<Group>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let width = check_header(rdr.headers()?, prefix, width)?;
    let mut groups: Vec<(String, Vec<f64>, Vec<Vec<f64>>)> = Vec::new();
    let mut seen = HashSet::new();
    for (idx, record) in rdr.records().enumerate() {
        let row = idx + 2;
        let record = record?;
        if record.len() != width + 2 {
            return Err(Error::Parse {
                row,
                column: record.len().min(width + 2),
                message: format!("expected {} fields, found {}", width + 2, record.len()),
            });
        }
        let id = record.get(0).unwrap_or("").to_string();
        let t = parse_field(&record, row, 1)?;
        let values = (0..width).map(|c| parse_field(&record, row, c + 2)).collect::<Result<Vec<_>>>()?;
        match groups.last_mut() {
            Some((last, times, rows)) if *last == id => {
                if t <= *times.last().unwrap() {
                    return Err(Error::Parse { row, column: 2, message: format!("times for {id} must increase") });
                }
                times.push(t);
                rows.push(values);
            }
            _ => {
                if !seen.insert(id.clone()) {
                    return Err(Error::Parse { row, column: 1, message: format!("rows for {id} are not contiguous") });
                }
                groups.push((id, vec![t], vec![values]));
            }
        }
    }
    Ok(groups)
}

/// Reads `id,t,x1,...,x{d0}`; points within [`INGEST_TOLERANCE`] of the
/// manifold are projected onto it, anything farther is rejected.
/// Deviations below [`ROUNDING_TOLERANCE`] are left alone.
pub fn read_trajectories_csv<R: Read>(reader: R, spec: &ManifoldSpec) -> Result<Vec<TrajectorySample>> {
    let groups = read_grouped(reader, "x", Some(spec.ambient_dim()))?;
    let mut samples = Vec::with_capacity(groups.len());
    for (id, times, rows) in groups {
        let mut points = Vec::with_capacity(rows.len());
        for (t, x) in times.iter().zip(rows) {
            let deviation = spec.point_deviation(&x);
            if !(deviation <= INGEST_TOLERANCE) {
                return Err(Error::OffManifold { id, t: *t, deviation });
            }
            let x = if deviation <= ROUNDING_TOLERANCE { x } else { spec.project(&x)? };
            points.push(Point::new(x));
        }
        samples.push(TrajectorySample::new(id, times, points)?);
    }
    shared_grid(&samples)?;
    Ok(samples)
}

pub fn write_trajectories_csv<W: Write>(writer: W, samples: &[TrajectorySample]) -> Result<()> {
    let d0 = samples.first().and_then(|s| s.points.first()).map_or(0, |p| p.coords.len());
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec!["id".to_string(), "t".to_string()];
    header.extend((1..=d0).map(|c| format!("x{c}")));
    wtr.write_record(&header)?;
    for s in samples {
        for (t, p) in s.grid.iter().zip(&s.points) {
            let mut rec = vec![s.subject_id.clone(), fmt_f64(*t)];
            rec.extend(p.coords.iter().map(|x| fmt_f64(*x)));
            wtr.write_record(&rec)?;
        }
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_counts_csv<R: Read>(reader: R) -> Result<Vec<CountPanel>> {
    let groups = read_grouped(reader, "c", None)?;
    let panels: Vec<CountPanel> =
        groups.into_iter().map(|(subject_id, times, counts)| CountPanel { subject_id, times, counts }).collect();
    for p in &panels {
        p.validate()?;
    }
    Ok(panels)
}

pub fn read_proportions_csv<R: Read>(reader: R) -> Result<Vec<CompositionCurve>> {
    let groups = read_grouped(reader, "y", None)?;
    Ok(groups
        .into_iter()
        .map(|(subject_id, times, proportions)| CompositionCurve { subject_id, times, proportions })
        .collect())
}

pub fn write_proportions_csv<W: Write>(writer: W, curves: &[CompositionCurve]) -> Result<()> {
    let j = curves.first().and_then(|c| c.proportions.first()).map_or(0, |r| r.len());
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec!["id".to_string(), "t".to_string()];
    header.extend((1..=j).map(|c| format!("y{c}")));
    wtr.write_record(&header)?;
    for c in curves {
        for (t, y) in c.times.iter().zip(&c.proportions) {
            let mut rec = vec![c.subject_id.clone(), fmt_f64(*t)];
            rec.extend(y.iter().map(|x| fmt_f64(*x)));
            wtr.write_record(&rec)?;
        }
    }
    wtr.flush()?;
    Ok(())
}
