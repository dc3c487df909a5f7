//! The pipeline stages. Each returns the files it wrote, relative to the
//! run directory.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use log::info;
use qbath::bath::SystemSpec;
use qbath::correlations::{
    bath_correlation, correlations_up_to, read_json, write_csv, write_json, CorrelationTensor,
};
use qbath::dynamics::{
    compare, cumulant_predicted_dephasing, exact_reduced_dynamics, write_comparison, MomentSource,
    QuadratureOptions, TensorMoments,
};
use qbath::measurement::{MeasurementModel, MeasurementRecord, Protocol, SlotPlan};
use qbath::operator::Operator;
use qbath::reconstruction::{estimate_g, reconstruct, GEstimate};
use qbath::spin::bloch_density;
use serde::Serialize;

use crate::config::{Experiment, ResolvedProtocol};
use crate::error::{CliError, CliResult};

/// How `reconstruct` obtains the sequence averages `G`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EstimateMode {
    /// Sampled records when shots > 0, exact probabilities otherwise.
    Auto,
    /// Averages over the sampled record files.
    Sampled,
    /// Exact averages from the joint probabilities.
    NoiseFree,
}

pub struct Run<'a> {
    pub exp: &'a Experiment,
    pub dir: PathBuf,
    pub mode: EstimateMode,
    /// Tensor for `validate`, relative to the run directory.
    pub tensor: PathBuf,
}

const CORRELATIONS_CSV: &str = "correlations.csv";
const CORRELATIONS_JSON: &str = "correlations.json";
const EXACT_G_CSV: &str = "exact_g.csv";
const RECONSTRUCTED_CSV: &str = "reconstructed.csv";
const RECONSTRUCTED_JSON: &str = "reconstructed.json";
const REPORT_CSV: &str = "reconstruction_report.csv";
const COMPARISON_CSV: &str = "comparison.csv";

fn record_file(variant: usize) -> String {
    format!("records/variant_{variant}.bin")
}

fn create(dir: &Path, name: &str) -> CliResult<BufWriter<File>> {
    let path = dir.join(name);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    File::create(&path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))
}

fn open(dir: &Path, name: &Path) -> CliResult<BufReader<File>> {
    let path = dir.join(name);
    File::open(&path)
        .map(BufReader::new)
        .map_err(|e| CliError::Io(format!("cannot open {}: {e}", path.display())))
}

fn protocol<'a>(exp: &'a Experiment) -> CliResult<&'a ResolvedProtocol> {
    exp.protocol
        .as_ref()
        .ok_or_else(|| CliError::Config("this command needs a [protocol] section".into()))
}

fn model(exp: &Experiment) -> MeasurementModel<'_> {
    MeasurementModel::new(&exp.bath, &exp.system, exp.config.channel_mode)
}

fn exact_g(model: &MeasurementModel, plan: &SlotPlan, rho_b: &Operator) -> qbath::Result<f64> {
    match plan.protocol() {
        Protocol::Unit => model.exact_g(plan.slots(), rho_b),
        Protocol::Streaming => model.streaming_exact_g(plan, rho_b),
    }
}

impl Run<'_> {
    pub fn correlations(&self) -> CliResult<Vec<String>> {
        let c = self.exp.config.correlations.as_ref().ok_or_else(|| {
            CliError::Config("this command needs a [correlations] section".into())
        })?;
        let tensor = correlations_up_to(
            &self.exp.bath,
            &self.exp.rho_b,
            c.max_order,
            &c.times,
            &c.axes,
        )?;
        info!("computed {} exact correlations", tensor.len());
        let mut csv = create(&self.dir, CORRELATIONS_CSV)?;
        write_csv(&tensor, &mut csv)?;
        csv.flush()?;
        let mut json = create(&self.dir, CORRELATIONS_JSON)?;
        write_json(&tensor, &mut json)?;
        json.flush()?;
        Ok(vec![CORRELATIONS_CSV.into(), CORRELATIONS_JSON.into()])
    }

    pub fn simulate(&self) -> CliResult<Vec<String>> {
        #[derive(Serialize)]
        struct Row {
            variant: usize,
            times: String,
            exact_g: f64,
        }
        let p = protocol(self.exp)?;
        let model = model(self.exp);
        let mut table = csv::Writer::from_writer(create(&self.dir, EXACT_G_CSV)?);
        for (v, plan) in p.plans.iter().enumerate() {
            let times: Vec<String> = p.set.variants()[v]
                .times()
                .iter()
                .map(f64::to_string)
                .collect();
            table.serialize(Row {
                variant: v,
                times: times.join(";"),
                exact_g: exact_g(&model, plan, &self.exp.rho_b)?,
            })?;
        }
        table.flush()?;
        let mut written = vec![EXACT_G_CSV.to_string()];

        let shots = self.exp.config.shots;
        if shots == 0 {
            info!("shots = 0: exact averages only, no record files");
            return Ok(written);
        }
        for (v, plan) in p.plans.iter().enumerate() {
            // One independent stream family per variant.
            let seed = self.exp.config.seed.wrapping_add(v as u64);
            let record = model.sample_records(plan, &self.exp.rho_b, shots, seed)?;
            let name = record_file(v);
            let mut out = create(&self.dir, &name)?;
            record.write_binary(&mut out)?;
            out.flush()?;
            written.push(name);
        }
        info!("sampled {shots} shots for {} variants", p.plans.len());
        Ok(written)
    }

    fn sampled(&self) -> bool {
        match self.mode {
            EstimateMode::Auto => self.exp.config.shots > 0,
            EstimateMode::Sampled => true,
            EstimateMode::NoiseFree => false,
        }
    }

    pub fn reconstruct(&self) -> CliResult<Vec<String>> {
        #[derive(Serialize)]
        struct Row {
            axes: String,
            signs: String,
            times: String,
            value: f64,
            stderr: f64,
            exact: f64,
            deviation: f64,
        }
        let p = protocol(self.exp)?;
        let model = model(self.exp);
        let estimates = p
            .plans
            .iter()
            .enumerate()
            .map(|(v, plan)| -> CliResult<GEstimate> {
                if self.sampled() {
                    let name = PathBuf::from(record_file(v));
                    let record =
                        MeasurementRecord::read_binary(open(&self.dir, &name).map_err(|e| {
                            CliError::Io(format!(
                                "{e}; run `simulate` with shots > 0 or use --mode noise-free"
                            ))
                        })?)?;
                    Ok(estimate_g(&record, plan, &p.subset, &p.set, v)?)
                } else {
                    Ok(GEstimate::exact(exact_g(&model, plan, &self.exp.rho_b)?, v))
                }
            })
            .collect::<CliResult<Vec<_>>>()?;
        let tensor = reconstruct(&estimates, &p.set)?;

        let mut csv = create(&self.dir, RECONSTRUCTED_CSV)?;
        write_csv(&tensor, &mut csv)?;
        csv.flush()?;
        let mut json = create(&self.dir, RECONSTRUCTED_JSON)?;
        write_json(&tensor, &mut json)?;
        json.flush()?;

        let mut report = csv::Writer::from_writer(create(&self.dir, REPORT_CSV)?);
        for (idx, v) in tensor.iter() {
            let exact = bath_correlation(idx, &self.exp.bath, &self.exp.rho_b)?;
            let times: Vec<String> = idx.times().iter().map(f64::to_string).collect();
            report.serialize(Row {
                axes: idx.axes_string(),
                signs: idx.signs_string(),
                times: times.join(";"),
                value: v.value,
                stderr: v.stderr,
                exact,
                deviation: v.value - exact,
            })?;
        }
        report.flush()?;
        Ok(vec![
            RECONSTRUCTED_CSV.into(),
            RECONSTRUCTED_JSON.into(),
            REPORT_CSV.into(),
        ])
    }

    pub fn validate(&self) -> CliResult<Vec<String>> {
        let v =
            self.exp.config.validate.as_ref().ok_or_else(|| {
                CliError::Config("this command needs a [validate] section".into())
            })?;
        let tensor: CorrelationTensor = read_json(open(&self.dir, &self.tensor)?)?;
        let source = TensorMoments::new(&tensor);
        let times = source.native_grid().unwrap_or_default();
        let rho_s = Operator::new(SystemSpec::system_space(), bloch_density(v.initial_bloch))?;
        let exact = exact_reduced_dynamics(
            &rho_s,
            &self.exp.system,
            &self.exp.bath,
            &self.exp.rho_b,
            &times,
        )?;
        let options = QuadratureOptions {
            tolerance: v.tolerance,
            ..QuadratureOptions::default()
        };
        let prediction =
            cumulant_predicted_dephasing(&source, &rho_s, v.truncation, &times, options)?;
        let report = compare(&exact, &prediction)?;
        info!(
            "K = {}: max deviation {:.3e}, integrated {:.3e}",
            v.truncation, report.max_deviation, report.integrated_deviation
        );
        let mut out = create(&self.dir, COMPARISON_CSV)?;
        write_comparison(&report, &mut out)?;
        out.flush()?;
        Ok(vec![COMPARISON_CSV.into()])
    }
}
