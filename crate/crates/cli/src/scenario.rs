//! Scenario files: JSON with `band`, `link_params`, `devices`, `solver` and
//! `experiment` sections. Decibel inputs are converted to linear units here;
//! the core library only sees linear quantities.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tera_tc_core::channel::SPEED_OF_LIGHT;
use tera_tc_core::units::{db_to_linear, dbm_to_watt};
use tera_tc_core::{
    AbsorptionTable, BandPlan, DeviceSpec, LinkParams, Scenario, SolverConfig, Subwindow,
};

use crate::experiment::ExperimentSpec;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: line {line}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{field}: {message}")]
    Field { field: String, message: String },
    #[error("absorption table {path}: {source}")]
    Table {
        path: PathBuf,
        #[source]
        source: tera_tc_core::Error,
    },
    #[error(transparent)]
    Model(#[from] tera_tc_core::Error),
}

fn field_error(field: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Field {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum AbsorptionSource {
    /// The bundled synthetic table (0.49-0.61 THz).
    Synthetic,
    /// One coefficient for every subwindow.
    Flat { k_abs_per_m: f64 },
    /// A `frequency_hz,k_abs_per_m` CSV, relative paths resolved against the scenario file.
    Csv { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubwindowEntry {
    pub frequency_hz: f64,
    pub k_abs_per_m: f64,
}

/// Either a contiguous plan (`start_hz`, `count`, `absorption`) or an explicit
/// `subwindows` list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandSection {
    pub bandwidth_hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub absorption: Option<AbsorptionSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subwindows: Option<Vec<SubwindowEntry>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gt_dbi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gt_linear: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gr_dbi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gr_linear: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n0_dbm_per_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n0_w_per_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_total_dbm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_total_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed_of_light_m_per_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_req_bps_per_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_req_bps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_distance_m: Option<f64>,
    /// Number of identical devices this entry stands for (default 1).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub band: BandSection,
    pub link_params: LinkSection,
    pub devices: Vec<DeviceEntry>,
    #[serde(default)]
    pub solver: SolverConfig,
    pub experiment: ExperimentSpec,
}

fn pick(
    field: &str,
    log_form: Option<f64>,
    linear: Option<f64>,
    convert: fn(f64) -> f64,
) -> Result<f64, ScenarioError> {
    match (log_form, linear) {
        (Some(x), None) => Ok(convert(x)),
        (None, Some(x)) => Ok(x),
        (Some(_), Some(_)) => Err(field_error(
            field,
            "give either the dB or the linear form, not both",
        )),
        (None, None) => Err(field_error(field, "missing")),
    }
}

impl LinkSection {
    pub fn to_params(&self) -> Result<LinkParams, ScenarioError> {
        let gt = pick(
            "link_params.gt_dbi|gt_linear",
            self.gt_dbi,
            self.gt_linear,
            db_to_linear,
        )?;
        let gr = pick(
            "link_params.gr_dbi|gr_linear",
            self.gr_dbi,
            self.gr_linear,
            db_to_linear,
        )?;
        let n0 = pick(
            "link_params.n0_dbm_per_hz|n0_w_per_hz",
            self.n0_dbm_per_hz,
            self.n0_w_per_hz,
            dbm_to_watt,
        )?;
        let p = pick(
            "link_params.p_total_dbm|p_total_w",
            self.p_total_dbm,
            self.p_total_w,
            dbm_to_watt,
        )?;
        let c = self.speed_of_light_m_per_s.unwrap_or(SPEED_OF_LIGHT);
        LinkParams::new(gt, gr, n0, c, p).map_err(|e| field_error("link_params", e.to_string()))
    }
}

impl BandSection {
    pub fn to_plan(&self, base_dir: &Path) -> Result<BandPlan, ScenarioError> {
        let w = self.bandwidth_hz;
        let plan = match (&self.subwindows, self.start_hz, self.count) {
            (Some(list), None, None) => {
                if self.absorption.is_some() {
                    return Err(field_error(
                        "band.absorption",
                        "not used with an explicit subwindow list",
                    ));
                }
                let subwindows = list
                    .iter()
                    .map(|s| Subwindow {
                        frequency: s.frequency_hz,
                        k_abs: s.k_abs_per_m,
                    })
                    .collect();
                BandPlan::new(subwindows, w)
            }
            (None, Some(start), Some(count)) => {
                let table = match self
                    .absorption
                    .as_ref()
                    .unwrap_or(&AbsorptionSource::Synthetic)
                {
                    AbsorptionSource::Synthetic => AbsorptionTable::synthetic(),
                    AbsorptionSource::Flat { k_abs_per_m } => {
                        let k = *k_abs_per_m;
                        return BandPlan::contiguous(start, w, count, |_| Ok(k))
                            .map_err(|e| field_error("band", e.to_string()));
                    }
                    AbsorptionSource::Csv { path } => {
                        let full = base_dir.join(path);
                        let file = fs::File::open(&full).map_err(|source| ScenarioError::Io {
                            path: full.clone(),
                            source,
                        })?;
                        AbsorptionTable::from_csv_reader(file)
                            .map_err(|source| ScenarioError::Table { path: full, source })?
                    }
                };
                BandPlan::contiguous(start, w, count, |f| table.lookup(f))
            }
            _ => {
                return Err(field_error(
                    "band",
                    "give either `start_hz` and `count`, or a `subwindows` list",
                ))
            }
        };
        plan.map_err(|e| field_error("band", e.to_string()))
    }
}

impl DeviceEntry {
    fn rate_bps(&self, bandwidth: f64, index: usize) -> Result<f64, ScenarioError> {
        match (self.rate_req_bps_per_hz, self.rate_req_bps) {
            (Some(e), None) => Ok(e * bandwidth),
            (None, Some(r)) => Ok(r),
            (None, None) => Ok(0.0),
            (Some(_), Some(_)) => Err(field_error(
                format!("devices[{index}]"),
                "give either rate_req_bps_per_hz or rate_req_bps, not both",
            )),
        }
    }
}

/// Expands `count` entries into one spec per device.
pub fn expand_devices(
    entries: &[DeviceEntry],
    bandwidth: f64,
) -> Result<Vec<DeviceSpec>, ScenarioError> {
    let mut out = Vec::new();
    for (i, e) in entries.iter().enumerate() {
        let count = e.count.unwrap_or(1);
        if count == 0 {
            return Err(field_error(
                format!("devices[{i}].count"),
                "must be at least 1",
            ));
        }
        let spec = DeviceSpec {
            rate_req: e.rate_bps(bandwidth, i)?,
            fixed_distance: e.fixed_distance_m,
        };
        out.extend(std::iter::repeat_n(spec, count));
    }
    if out.is_empty() {
        return Err(field_error("devices", "device list is empty"));
    }
    Ok(out)
}

/// A parsed scenario file together with the directory its relative paths refer to.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedScenario {
    pub file: ScenarioFile,
    pub base_dir: PathBuf,
}

impl LoadedScenario {
    pub fn from_str(text: &str, origin: &Path) -> Result<Self, ScenarioError> {
        let file: ScenarioFile = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
            path: origin.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let base_dir = origin.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self { file, base_dir })
    }

    /// The model scenario with every device in the file.
    pub fn scenario(&self) -> Result<Scenario, ScenarioError> {
        let band = self.file.band.to_plan(&self.base_dir)?;
        let params = self.file.link_params.to_params()?;
        let devices = expand_devices(&self.file.devices, band.bandwidth())?;
        self.file
            .solver
            .validate()
            .map_err(|e| field_error("solver", e.to_string()))?;
        Scenario::new(band, params, devices, self.file.solver)
            .map_err(|e| field_error("scenario", e.to_string()))
    }

    /// Full validation: model scenario plus experiment grids.
    pub fn validate(&self) -> Result<Scenario, ScenarioError> {
        let scenario = self.scenario()?;
        self.file.experiment.validate(&scenario)?;
        Ok(scenario)
    }
}

pub fn load_scenario(path: &Path) -> Result<LoadedScenario, ScenarioError> {
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    LoadedScenario::from_str(&text, path)
}

pub fn write_scenario(file: &ScenarioFile, path: &Path) -> Result<(), ScenarioError> {
    let mut text = serde_json::to_string_pretty(file).expect("scenario serialises");
    text.push('\n');
    fs::write(path, text).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn check_grid<T: PartialOrd + Copy>(
    field: &str,
    grid: &[T],
) -> Result<(), ScenarioError> {
    if grid.is_empty() {
        return Err(field_error(field, "grid is empty"));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(field_error(field, "grid must be strictly increasing"));
    }
    Ok(())
}

pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    field_error(field, message)
}
