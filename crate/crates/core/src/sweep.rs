//! Run configuration and CSV parameter sweeps.

use std::f64::consts::LN_2;
use std::fmt::Write as _;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::bounds::{lower_bound, upper_bound, PowerConstraints};
use crate::cdma::{cdma_lower_bound, NoiseTracking};
use crate::channel::ChannelParams;
use crate::error::{Error, Result};

/// Header of the independent-noise sweep in nats.
/// Column names are part of the schema and stay fixed under `Units::Bits`;
/// only the numbers are rescaled.
pub const CSV_HEADER: &str = "variable,value,lb_nats,ub_nats,regime,mu,asymptotic";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepVariable {
    A,
    E,
    M,
    #[serde(rename = "lambda")]
    Lambda,
}

impl SweepVariable {
    pub fn name(&self) -> &'static str {
        match self {
            SweepVariable::A => "A",
            SweepVariable::E => "E",
            SweepVariable::M => "M",
            SweepVariable::Lambda => "lambda",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.start < self.stop) {
            return Err(Error::Parameter(format!(
                "sweep needs start < stop, got {} and {}",
                self.start, self.stop
            )));
        }
        if self.points < 2 {
            return Err(Error::Parameter("sweep needs at least 2 points".into()));
        }
        if self.scale == Scale::Log && self.start <= 0.0 {
            return Err(Error::Parameter("log-scale sweep needs start > 0".into()));
        }
        Ok(())
    }

    /// Grid values in increasing order. User-count sweeps are rounded to
    /// integers and deduplicated.
    pub fn values(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let n = self.points - 1;
        let mut v: Vec<f64> = (0..=n)
            .map(|k| {
                let t = k as f64 / n as f64;
                match self.scale {
                    Scale::Linear => self.start + t * (self.stop - self.start),
                    Scale::Log => self.start * (self.stop / self.start).powf(t),
                }
            })
            .collect();
        v[n] = self.stop;
        if self.variable == SweepVariable::M {
            v.iter_mut().for_each(|m| *m = m.round());
            v.dedup();
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Vlc,
    Cdma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Nats,
    Bits,
}

impl Units {
    /// Converts a value in nats into these units.
    pub fn convert(&self, nats: f64) -> f64 {
        match self {
            Units::Nats => nats,
            Units::Bits => nats / LN_2,
        }
    }

    pub fn suffix(&self) -> &'static str {
        match self {
            Units::Nats => "nats",
            Units::Bits => "bits",
        }
    }
}

/// Everything a command needs besides the sweep grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub peak: Option<f64>,
    #[serde(default)]
    pub average: Option<f64>,
    /// Noise mean for the independent-noise channel.
    #[serde(default)]
    pub lambda: f64,
    #[serde(default)]
    pub users: Option<u32>,
    #[serde(default)]
    pub chips: Option<u32>,
    #[serde(default)]
    pub noise: NoiseTracking,
    #[serde(default)]
    pub units: Units,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Vlc,
            peak: None,
            average: None,
            lambda: 0.0,
            users: None,
            chips: None,
            noise: NoiseTracking::Cap,
            units: Units::Nats,
            seed: 0,
            out: None,
        }
    }
}

/// JSON config file layout: a run configuration plus an optional sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigFile {
    pub run: RunConfig,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parameter(format!("bad config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }
}

impl RunConfig {
    pub fn constraints(&self) -> Result<PowerConstraints> {
        PowerConstraints::new(self.peak, self.average)
    }

    fn network(&self) -> Result<(u32, u32)> {
        match (self.users, self.chips) {
            (Some(m), Some(n)) => Ok((m, n)),
            _ => Err(Error::Parameter("cdma mode needs --users and --chips".into())),
        }
    }

    fn with_value(&self, variable: SweepVariable, value: f64) -> RunConfig {
        let mut run = self.clone();
        match variable {
            SweepVariable::A => run.peak = Some(value),
            SweepVariable::E => run.average = Some(value),
            SweepVariable::M => run.users = Some(value as u32),
            SweepVariable::Lambda => run.lambda = value,
        }
        run
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Render the sweep as CSV. Output depends only on its arguments.
pub fn sweep_csv(run: &RunConfig, spec: &SweepSpec) -> Result<String> {
    let values = spec.values()?;
    let u = run.units;
    let mut out = String::new();
    match run.mode {
        Mode::Vlc => {
            if spec.variable == SweepVariable::M {
                return Err(Error::Parameter("a user-count sweep needs cdma mode".into()));
            }
            let _ = writeln!(out, "{CSV_HEADER}");
            for v in values {
                let point = run.with_value(spec.variable, v);
                let c = point.constraints()?;
                let lb = lower_bound(&c, ChannelParams::new(point.lambda)?)?;
                let ub = upper_bound(&c)?;
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    spec.variable.name(),
                    v,
                    u.convert(lb.value),
                    u.convert(ub.value),
                    lb.regime.as_str(),
                    opt(lb.mu),
                    ub.asymptotic
                );
            }
        }
        Mode::Cdma => {
            if spec.variable == SweepVariable::Lambda {
                return Err(Error::Parameter(
                    "cdma noise is set by the network; sweep A, E or M instead".into(),
                ));
            }
            let _ = writeln!(out, "{CSV_HEADER},per_user_nats,sum_nats");
            for v in values {
                let point = run.with_value(spec.variable, v);
                let (m, n0) = point.network()?;
                let b = cdma_lower_bound(&point.constraints()?, m, n0, point.noise)?;
                let per_user = u.convert(b.bound.value);
                let _ = writeln!(
                    out,
                    "{},{},{},,{},{},false,{},{}",
                    spec.variable.name(),
                    v,
                    per_user,
                    b.bound.regime.as_str(),
                    opt(b.bound.mu),
                    per_user,
                    m as f64 * per_user
                );
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(variable: SweepVariable, start: f64, stop: f64, points: usize, scale: Scale) -> SweepSpec {
        SweepSpec {
            variable,
            start,
            stop,
            points,
            scale,
        }
    }

    #[test]
    fn spec_validation() {
        assert!(spec(SweepVariable::A, 2.0, 1.0, 5, Scale::Linear).validate().is_err());
        assert!(spec(SweepVariable::A, 1.0, 2.0, 1, Scale::Linear).validate().is_err());
        assert!(spec(SweepVariable::A, 0.0, 2.0, 4, Scale::Log).validate().is_err());
    }

    #[test]
    fn log_values() {
        let v = spec(SweepVariable::A, 10.0, 1000.0, 3, Scale::Log).values().unwrap();
        assert!((v[1] - 100.0).abs() < 1e-9);
        assert_eq!(v[2], 1000.0);
    }

    #[test]
    fn user_values_are_integers() {
        let v = spec(SweepVariable::M, 2.0, 4.0, 9, Scale::Linear).values().unwrap();
        assert_eq!(v, vec![2.0, 3.0, 4.0]);
    }

    #[test]
    fn vlc_header_and_rows() {
        let run = RunConfig {
            lambda: 1.0,
            ..RunConfig::default()
        };
        let csv = sweep_csv(&run, &spec(SweepVariable::A, 100.0, 1000.0, 4, Scale::Log)).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        assert_eq!(lines.count(), 4);
    }

    #[test]
    fn bits_only_rescales() {
        let run = RunConfig {
            average: Some(10.0),
            lambda: 1.0,
            ..RunConfig::default()
        };
        let s = spec(SweepVariable::A, 40.0, 400.0, 3, Scale::Log);
        let nats = sweep_csv(&run, &s).unwrap();
        let bits = sweep_csv(
            &RunConfig {
                units: Units::Bits,
                ..run
            },
            &s,
        )
        .unwrap();
        assert_eq!(nats.lines().next(), bits.lines().next());
        for (n, b) in nats.lines().skip(1).zip(bits.lines().skip(1)) {
            let n: Vec<&str> = n.split(',').collect();
            let b: Vec<&str> = b.split(',').collect();
            for k in [0, 1, 4, 5, 6] {
                assert_eq!(n[k], b[k]);
            }
            for k in [2, 3] {
                let (x, y): (f64, f64) = (n[k].parse().unwrap(), b[k].parse().unwrap());
                assert!((x / LN_2 - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mode_variable_mismatch() {
        let run = RunConfig {
            peak: Some(100.0),
            ..RunConfig::default()
        };
        assert!(sweep_csv(&run, &spec(SweepVariable::M, 2.0, 10.0, 3, Scale::Linear)).is_err());
        let run = RunConfig {
            mode: Mode::Cdma,
            users: Some(4),
            chips: Some(31),
            ..run
        };
        assert!(sweep_csv(&run, &spec(SweepVariable::Lambda, 0.1, 1.0, 3, Scale::Linear)).is_err());
    }

    #[test]
    fn cdma_sweep_has_sum_columns() {
        let run = RunConfig {
            mode: Mode::Cdma,
            peak: Some(500.0),
            average: Some(50.0),
            chips: Some(31),
            ..RunConfig::default()
        };
        let csv = sweep_csv(&run, &spec(SweepVariable::M, 2.0, 6.0, 5, Scale::Linear)).unwrap();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "variable,value,lb_nats,ub_nats,regime,mu,asymptotic,per_user_nats,sum_nats"
        );
        for line in lines {
            let f: Vec<&str> = line.split(',').collect();
            assert_eq!(f[3], "");
            let m: f64 = f[1].parse().unwrap();
            let per: f64 = f[7].parse().unwrap();
            let sum: f64 = f[8].parse().unwrap();
            assert_eq!(sum, m * per);
        }
    }

    #[test]
    fn config_round_trip() {
        let cfg = ConfigFile {
            run: RunConfig {
                average: Some(5.0),
                lambda: 0.5,
                seed: 9,
                ..RunConfig::default()
            },
            sweep: Some(spec(SweepVariable::A, 20.0, 200.0, 5, Scale::Log)),
        };
        let back = ConfigFile::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
        let s = back.sweep.unwrap();
        assert_eq!(
            sweep_csv(&back.run, &s).unwrap(),
            sweep_csv(&cfg.run, &cfg.sweep.unwrap()).unwrap()
        );
    }
}
