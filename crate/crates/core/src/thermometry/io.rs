use std::io::{BufRead, BufReader, Read};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::hz_to_angular;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrequencyUnit {
    Hz,
    DeltaOverOmega,
}

impl FromStr for FrequencyUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "hz" => Ok(FrequencyUnit::Hz),
            "delta_over_omega" => Ok(FrequencyUnit::DeltaOverOmega),
            other => {
                Err(Error::invalid("frequency_unit", format!("expected `hz` or `delta_over_omega`, got `{other}`")))
            }
        }
    }
}

/// Measured spectrum as read from disk, frequencies in their file unit.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredSpectrum {
    pub unit: FrequencyUnit,
    pub frequency: Vec<f64>,
    pub psd_snl: Vec<f64>,
}

impl MeasuredSpectrum {
    /// Frequencies in rad/s; `omega_m` sets the scale of normalized input.
    pub fn angular_frequencies(&self, omega_m: f64) -> Vec<f64> {
        match self.unit {
            FrequencyUnit::Hz => self.frequency.iter().map(|&f| hz_to_angular(f)).collect(),
            FrequencyUnit::DeltaOverOmega => self.frequency.iter().map(|&f| f * omega_m).collect(),
        }
    }
}

/// Reads `# frequency_unit=<hz|delta_over_omega>` followed by `frequency,psd_snl` CSV.
pub fn read_measured_spectrum(source: impl Read) -> Result<MeasuredSpectrum> {
    let mut reader = BufReader::new(source);
    let mut first = String::new();
    reader.read_line(&mut first).map_err(|e| Error::invalid("spectrum", e.to_string()))?;
    let unit = first
        .trim()
        .strip_prefix('#')
        .and_then(|s| s.trim().strip_prefix("frequency_unit="))
        .ok_or_else(|| Error::invalid("frequency_unit", "first line must be `# frequency_unit=<hz|delta_over_omega>`"))?
        .parse()?;

    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(reader);
    let headers = csv.headers().map_err(|e| Error::invalid("spectrum", e.to_string()))?.clone();
    if headers.len() != 2 || &headers[0] != "frequency" || &headers[1] != "psd_snl" {
        return Err(Error::invalid(
            "spectrum",
            format!("expected header `frequency,psd_snl`, got `{}`", headers.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    let mut out = MeasuredSpectrum { unit, frequency: Vec::new(), psd_snl: Vec::new() };
    for (i, rec) in csv.records().enumerate() {
        let rec = rec.map_err(|e| Error::invalid("spectrum", e.to_string()))?;
        let num = |k: usize| -> Result<f64> {
            rec[k]
                .parse::<f64>()
                .map_err(|_| Error::invalid("spectrum", format!("row {}: `{}` is not a number", i + 1, &rec[k])))
        };
        out.frequency.push(num(0)?);
        out.psd_snl.push(num(1)?);
    }
    Ok(out)
}
