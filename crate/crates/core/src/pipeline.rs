//! End-to-end runs: positivity check, fringe simulation, and the fit and
//! extraction chain, each producing a unit-tagged report.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bloch::DensityMatrix;
use crate::config::{ContrastSource, FitValues, RunConfig, SimulateOutput};
use crate::estimate::Estimate;
use crate::evolution::{
    perturbative_validity, propagate_exact, propagate_perturbative, EvolutionError, PropagationRequest,
};
use crate::fitting::{
    combined_alpha_simplified, extract_a_alpha, extract_ab, fit_pattern, AbExtraction, DampingForm, ExtractError,
    ExtractionFlags, FitError, FitResult, SimplifiedInput, ThetaMode,
};
use crate::generator::{check_complete_positivity, kossakowski_eigenvalues, DissipationParams, HamiltonianParams, Violation};
use crate::interference::{
    conservation_residual, contrast_from_curve, count_pattern, intensity, simplified_contrast, Branch, CountModel,
    ExitProjector, FringeParams, FringeSample, InterferenceError,
};
use crate::units::{Quantity, Unit};

/// Samples used to locate the extrema of a smooth fitted curve.
pub const CURVE_SAMPLES: usize = 4001;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error(transparent)]
    Interference(#[from] InterferenceError),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error("{0}")]
    Input(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CpReport {
    pub is_cp: bool,
    #[serde(rename = "R")]
    pub r: Quantity,
    #[serde(rename = "S")]
    pub s: Quantity,
    #[serde(rename = "T")]
    pub t: Quantity,
    pub violated: Vec<Violation>,
    /// Eigenvalues of the Kossakowski matrix, ascending.
    pub kossakowski_eigenvalues: Vec<Quantity>,
}

pub fn validate_cp(d: &DissipationParams) -> CpReport {
    let verdict = check_complete_positivity(d);
    CpReport {
        is_cp: verdict.is_cp,
        r: Quantity::gev(verdict.r),
        s: Quantity::gev(verdict.s),
        t: Quantity::gev(verdict.t),
        violated: verdict.violated,
        kossakowski_eigenvalues: kossakowski_eigenvalues(d).into_iter().map(Quantity::gev).collect(),
    }
}

/// Plot-ready fringe table.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTable {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
    pub warnings: Vec<String>,
}

impl SimulationTable {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Exit intensities of the aligned incident state at each scanned phase
/// `φ = 2ωt`, or the realistic counts when the configuration asks for them.
///
/// Intensities come from the exact propagator; unless `exact_only` is set the
/// first-order values and their largest absolute deviation are added.
pub fn simulate(config: &RunConfig, exact_only: bool) -> Result<SimulationTable, PipelineError> {
    let t = config.require_time()?;
    let phases = config.grid.phases();
    let mut warnings = Vec::new();

    if config.simulate.output == SimulateOutput::Counts {
        let model = config.count_model()?;
        let rows = phases
            .iter()
            .map(|&phi| vec![phi, count_pattern(&model, phi, Branch::Plus), count_pattern(&model, phi, Branch::Minus)])
            .collect();
        return Ok(SimulationTable {
            columns: vec!["phi", "n_plus", "n_minus"],
            rows,
            warnings,
        });
    }

    if !(t > 0.0) {
        return Err(PipelineError::Input("simulation needs a positive flight time".into()));
    }
    let validity = perturbative_validity(&config.dissipation, t);
    if !validity.ok {
        warnings.push(format!(
            "A t = {:.4} is outside the first-order regime; intensities use the exact propagator",
            validity.at
        ));
    }

    let theta = config.simulate.theta;
    let projectors = Branch::BOTH.map(|branch| ExitProjector { theta, branch });
    let d = config.dissipation;
    let energy = config.hamiltonian.energy;
    let rows: Result<Vec<Vec<f64>>, EvolutionError> = phases
        .par_iter()
        .map(|&phi| {
            let h = HamiltonianParams {
                energy,
                omega: phi / (2.0 * t),
            };
            let req = PropagationRequest::new(DensityMatrix::incident_aligned(), h, d, t);
            let exact = propagate_exact(&req)?;
            let [ip, im] = projectors.map(|p| intensity(&exact, &p));
            let mut row = vec![phi, ip, im];
            if !exact_only {
                let pert = propagate_perturbative(&req)?.state;
                let [pp, pm] = projectors.map(|p| intensity(&pert, &p));
                row.extend([pp, pm, (ip - pp).abs().max((im - pm).abs())]);
            }
            Ok(row)
        })
        .collect();

    let columns = if exact_only {
        vec!["phi", "i_plus", "i_minus"]
    } else {
        vec!["phi", "i_plus", "i_minus", "i_plus_pert", "i_minus_pert", "max_abs_diff"]
    };
    Ok(SimulationTable {
        columns,
        rows: rows?,
        warnings,
    })
}

/// Serializes non-finite entries as `null` and reads `null` back as infinity.
mod nullable_matrix {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &[Vec<f64>], s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<Option<f64>>> = m
            .iter()
            .map(|row| row.iter().map(|&v| v.is_finite().then_some(v)).collect())
            .collect();
        serde::Serialize::serialize(&rows, s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<f64>>, D::Error> {
        let rows = Vec::<Vec<Option<f64>>>::deserialize(d)?;
        Ok(rows
            .into_iter()
            .map(|row| row.into_iter().map(|v| v.unwrap_or(f64::INFINITY)).collect())
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceReport {
    pub parameters: Vec<String>,
    pub units: Vec<Unit>,
    #[serde(with = "nullable_matrix")]
    pub matrix: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub converged: bool,
    pub iterations: Quantity,
    pub chi2: Quantity,
    pub dof: Quantity,
    pub reduced_chi2: Quantity,
    pub theta_mode: ThetaMode,
    pub fix_q: bool,
    pub parameters: BTreeMap<String, Quantity>,
    pub covariance: CovarianceReport,
    pub degenerate_direction: Option<Vec<f64>>,
}

fn parameter_unit(name: &str) -> Unit {
    if name.starts_with("n0") {
        Unit::Counts
    } else if name.starts_with("theta") {
        Unit::Radians
    } else {
        Unit::Dimensionless
    }
}

impl FitReport {
    pub fn new(fit: &FitResult) -> Self {
        let parameters = fit
            .parameters
            .iter()
            .map(|name| {
                let est = Estimate::new(fit.estimates[name], fit.uncertainties[name]);
                (name.clone(), Quantity::measured(est, parameter_unit(name)))
            })
            .collect();
        Self {
            converged: fit.converged,
            iterations: Quantity::pure(fit.iterations as f64),
            chi2: Quantity::pure(fit.chi2),
            dof: Quantity::pure(fit.dof as f64),
            reduced_chi2: Quantity::pure(fit.reduced_chi2()),
            theta_mode: fit.theta_mode,
            fix_q: fit.fix_q,
            parameters,
            covariance: CovarianceReport {
                parameters: fit.parameters.clone(),
                units: fit.parameters.iter().map(|n| parameter_unit(n)).collect(),
                matrix: fit.covariance.clone(),
            },
            degenerate_direction: fit.degenerate_direction.clone(),
        }
    }

    /// Rebuilds the fit result from its report form.
    pub fn to_fit_result(&self) -> FitResult {
        let value = |q: &Quantity| q.value;
        FitResult {
            estimates: self.parameters.iter().map(|(k, q)| (k.clone(), value(q))).collect(),
            uncertainties: self
                .parameters
                .iter()
                .map(|(k, q)| (k.clone(), q.sigma.unwrap_or(f64::INFINITY)))
                .collect(),
            parameters: self.covariance.parameters.clone(),
            covariance: self.covariance.matrix.clone(),
            chi2: self.chi2.value,
            dof: self.dof.value as i64,
            converged: self.converged,
            iterations: self.iterations.value as usize,
            theta_mode: self.theta_mode,
            fix_q: self.fix_q,
            degenerate_direction: self.degenerate_direction.clone(),
        }
    }
}

/// Fitted coefficients of one exit beam with uncertainties.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchFit {
    pub n0: Estimate,
    pub p: Estimate,
    pub q: Estimate,
    pub theta: Estimate,
    /// Covariance of `(P, Q, θ)`, when known.
    pub pqt_covariance: Option<[[f64; 3]; 3]>,
}

impl BranchFit {
    pub fn from_fit(fit: &FitResult, branch: Branch) -> Self {
        let s = branch.suffix();
        let theta_name = match fit.theta_mode {
            ThetaMode::PerBranch => format!("theta_{s}"),
            ThetaMode::Shared => "theta".to_owned(),
        };
        let names = [format!("p_{s}"), format!("q_{s}"), theta_name];
        let mut cov = [[0.0; 3]; 3];
        for (i, a) in names.iter().enumerate() {
            for (j, b) in names.iter().enumerate() {
                cov[i][j] = fit.covariance_of(a, b);
            }
        }
        Self {
            n0: fit.n0(branch),
            p: fit.p(branch),
            q: fit.q(branch),
            theta: fit.theta(branch),
            pqt_covariance: Some(cov),
        }
    }

    pub fn params(&self) -> FringeParams {
        FringeParams {
            n0: self.n0.value.max(1.0),
            p: self.p.value,
            q: self.q.value,
            theta: self.theta.value,
        }
    }
}

/// Contrast from the extrema of the fitted curve, with the uncertainty
/// propagated from the `(P, Q, θ)` covariance by central differences.
pub fn curve_contrast(fit: &BranchFit, branch: Branch, phi_min: f64, phi_max: f64) -> Result<Estimate, PipelineError> {
    let base = fit.params();
    let eval = |fp: &FringeParams| contrast_from_curve(fp, branch, phi_min, phi_max, CURVE_SAMPLES);
    let value = eval(&base)?;
    let cov = fit.pqt_covariance.unwrap_or([
        [fit.p.sigma.powi(2), 0.0, 0.0],
        [0.0, fit.q.sigma.powi(2), 0.0],
        [0.0, 0.0, fit.theta.sigma.powi(2)],
    ]);
    let mut grad = [0.0; 3];
    for (k, g) in grad.iter_mut().enumerate() {
        let h = 1e-6;
        let shifted = |sign: f64| {
            let mut fp = base;
            match k {
                0 => fp.p += sign * h,
                1 => fp.q += sign * h,
                _ => fp.theta += sign * h,
            }
            fp
        };
        *g = (eval(&shifted(1.0))? - eval(&shifted(-1.0))?) / (2.0 * h);
    }
    let var: f64 = (0..3)
        .flat_map(|i| (0..3).map(move |j| (i, j)))
        .map(|(i, j)| grad[i] * cov[i][j] * grad[j])
        .filter(|v| v.is_finite())
        .sum();
    Ok(Estimate::new(value, var.max(0.0).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContrastSystematic {
    /// Estimated bias of the extrema contrast relative to the true contrast.
    pub contrast_shift: Quantity,
    /// Change in `A` after removing that bias.
    pub a_shift: Quantity,
    /// `|a_shift|` over the statistical uncertainty of `A`.
    pub relative_to_sigma: Quantity,
}

/// Extrema-based contrast bias, estimated by regenerating the fitted curve
/// from the extracted `A` and `Re B` and measuring its extrema contrast.
pub fn contrast_systematic(
    fit: &BranchFit,
    branch: Branch,
    contrast: Estimate,
    extraction: &AbExtraction,
    t: f64,
    phi_range: (f64, f64),
) -> Result<ContrastSystematic, PipelineError> {
    let model = CountModel {
        n0_plus: fit.n0.value.max(1.0),
        n0_minus: fit.n0.value.max(1.0),
        contrast_plus: contrast.value,
        contrast_minus: contrast.value,
        theta: fit.theta.value,
        a_comb: extraction.a_comb.value,
        b_mod: extraction.re_b.value,
        theta_b: 0.0,
        t,
    };
    let regenerated = contrast_from_curve(&model.fringe_params(branch), branch, phi_range.0, phi_range.1, CURVE_SAMPLES)?;
    let shift = regenerated - contrast.value;
    let corrected = extract_ab(
        fit.p,
        fit.q,
        Estimate::new(contrast.value - shift, contrast.sigma),
        1.0 / t,
        extraction.form,
    )?;
    let a_shift = corrected.a_comb.value - extraction.a_comb.value;
    Ok(ContrastSystematic {
        contrast_shift: Quantity::pure(shift),
        a_shift: Quantity::gev(a_shift),
        relative_to_sigma: Quantity::pure(a_shift.abs() / extraction.a_comb.sigma),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtractionReport {
    #[serde(rename = "A")]
    pub a_comb: Quantity,
    #[serde(rename = "ReB")]
    pub re_b: Quantity,
    #[serde(rename = "cov_A_ReB")]
    pub covariance: Quantity,
    pub a: Quantity,
    pub alpha: Quantity,
    pub form: DampingForm,
    pub flags: ExtractionFlags,
}

impl ExtractionReport {
    fn new(ab: &AbExtraction) -> Self {
        let pair = extract_a_alpha(ab.a_comb, ab.re_b, Some(ab.covariance));
        Self {
            a_comb: Quantity::measured(ab.a_comb, Unit::GeV),
            re_b: Quantity::measured(ab.re_b, Unit::GeV),
            covariance: Quantity::exact(ab.covariance, Unit::GeV2),
            a: Quantity::measured(pair.a, Unit::GeV),
            alpha: Quantity::measured(pair.alpha, Unit::GeV),
            form: ab.form,
            flags: ab.flags,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchReport {
    pub n0: Quantity,
    #[serde(rename = "P")]
    pub p: Quantity,
    #[serde(rename = "Q")]
    pub q: Quantity,
    pub theta: Quantity,
    pub contrast: Option<Quantity>,
    pub extraction: Option<ExtractionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contrast_systematic: Option<ContrastSystematic>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConservationReport {
    pub plus_product: Quantity,
    pub minus_product: Quantity,
    pub residual: Quantity,
    pub pull: Quantity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimplifiedBranchReport {
    pub contrast: Quantity,
    pub alpha_t: Quantity,
    pub alpha: Quantity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimplifiedReport {
    pub branches: BTreeMap<Branch, SimplifiedBranchReport>,
    pub alpha: Quantity,
}

/// Headline numbers: the extraction from the more precise exit beam.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtractionResult {
    pub branch: Branch,
    #[serde(rename = "A")]
    pub a_comb: Quantity,
    #[serde(rename = "ReB")]
    pub re_b: Quantity,
    pub a: Quantity,
    pub alpha: Quantity,
    pub alpha_combined: Option<Quantity>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitReport>,
    pub t: Quantity,
    pub inv_t: Quantity,
    pub contrast_source: ContrastSource,
    pub branches: BTreeMap<Branch, BranchReport>,
    pub conservation: Option<ConservationReport>,
    pub simplified: Option<SimplifiedReport>,
    pub result: Option<ExtractionResult>,
    pub warnings: Vec<String>,
}

impl Report {
    /// Whether the underlying fit, if any, converged.
    pub fn converged(&self) -> bool {
        self.fit.as_ref().is_none_or(|f| f.converged)
    }

    /// Pretty JSON, byte-identical for identical inputs.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn measured(e: Estimate, unit: Unit) -> Quantity {
    Quantity::measured(e, unit)
}

/// Extraction chain from per-branch fitted coefficients.
pub fn extract_report(
    fits: &BTreeMap<Branch, BranchFit>,
    config: &RunConfig,
    simplified: bool,
    fit: Option<FitReport>,
) -> Result<Report, PipelineError> {
    let t = config.require_time()?;
    if !(t > 0.0) {
        return Err(PipelineError::Input("extraction needs a positive flight time".into()));
    }
    let inv_t = 1.0 / t;
    let source = config.extraction.contrast;
    let form = config.extraction.form;
    let phi_range = (config.grid.phi_min, config.grid.phi_max);
    let mut warnings = Vec::new();
    let mut branches = BTreeMap::new();
    let mut contrasts = BTreeMap::new();
    let mut extractions = BTreeMap::new();

    for (&branch, bf) in fits {
        let contrast = match source {
            ContrastSource::Calibrated => config
                .extraction
                .calibrated_contrast(branch)
                .ok_or_else(|| PipelineError::Input("calibrated contrast missing".into())),
            ContrastSource::Simplified => simplified_contrast(bf.p, bf.q, bf.theta).map_err(PipelineError::from),
            ContrastSource::Curve => curve_contrast(bf, branch, phi_range.0, phi_range.1),
        };
        let mut report = BranchReport {
            n0: measured(bf.n0, Unit::Counts),
            p: measured(bf.p, Unit::Dimensionless),
            q: measured(bf.q, Unit::Dimensionless),
            theta: measured(bf.theta, Unit::Radians),
            contrast: None,
            extraction: None,
            contrast_systematic: None,
            error: None,
        };
        match contrast.and_then(|c| Ok((c, extract_ab(bf.p, bf.q, c, inv_t, form)?))) {
            Ok((c, ab)) => {
                report.contrast = Some(measured(c, Unit::Dimensionless));
                report.extraction = Some(ExtractionReport::new(&ab));
                if ab.flags.unidentifiable {
                    warnings.push(format!("{} beam: damping term A is unidentifiable", branch.suffix()));
                }
                if ab.flags.negative_a {
                    warnings.push(format!("{} beam: P exceeds the contrast, A < 0", branch.suffix()));
                }
                if source == ContrastSource::Curve {
                    match contrast_systematic(bf, branch, c, &ab, t, phi_range) {
                        Ok(sys) => {
                            if sys.relative_to_sigma.value > 1.0 {
                                warnings.push(format!(
                                    "{} beam: extrema contrast shifts A by {:.2} sigma",
                                    branch.suffix(),
                                    sys.relative_to_sigma.value
                                ));
                            }
                            report.contrast_systematic = Some(sys);
                        }
                        Err(e) => warnings.push(format!("{} beam: systematic estimate failed: {e}", branch.suffix())),
                    }
                }
                contrasts.insert(branch, c);
                extractions.insert(branch, ab);
            }
            Err(e) => {
                warnings.push(format!("{} beam: {e}", branch.suffix()));
                report.error = Some(e.to_string());
            }
        }
        branches.insert(branch, report);
    }

    let conservation = match (
        fits.get(&Branch::Plus),
        fits.get(&Branch::Minus),
        contrasts.get(&Branch::Plus),
        contrasts.get(&Branch::Minus),
    ) {
        (Some(fp), Some(fm), Some(&cp), Some(&cm)) if fp.n0.value > 0.0 && fm.n0.value > 0.0 => {
            let check = conservation_residual(fp.n0, cp, fm.n0, cm);
            Some(ConservationReport {
                plus_product: measured(check.plus_product, Unit::Counts),
                minus_product: measured(check.minus_product, Unit::Counts),
                residual: measured(check.residual, Unit::Counts),
                pull: Quantity::pure(check.pull),
            })
        }
        _ => None,
    };

    let simplified_report = if simplified {
        let inputs: Vec<SimplifiedInput> = fits
            .iter()
            .map(|(&branch, bf)| SimplifiedInput {
                branch,
                p: bf.p,
                q: bf.q,
                theta: bf.theta,
            })
            .collect();
        let s = combined_alpha_simplified(&inputs, inv_t)?;
        Some(SimplifiedReport {
            branches: s
                .branches
                .iter()
                .map(|b| {
                    (
                        b.branch,
                        SimplifiedBranchReport {
                            contrast: measured(b.contrast, Unit::Dimensionless),
                            alpha_t: measured(b.alpha_t, Unit::Dimensionless),
                            alpha: measured(b.alpha, Unit::GeV),
                        },
                    )
                })
                .collect(),
            alpha: measured(s.alpha, Unit::GeV),
        })
    } else {
        None
    };

    let result = extractions
        .iter()
        .filter(|(_, ab)| ab.a_comb.sigma.is_finite())
        .min_by(|a, b| a.1.a_comb.sigma.total_cmp(&b.1.a_comb.sigma))
        .map(|(&branch, ab)| {
            let report = ExtractionReport::new(ab);
            ExtractionResult {
                branch,
                a_comb: report.a_comb,
                re_b: report.re_b,
                a: report.a,
                alpha: report.alpha,
                alpha_combined: simplified_report.as_ref().map(|s| s.alpha),
            }
        });

    Ok(Report {
        fit,
        t: Quantity::exact(t, Unit::InvGeV),
        inv_t: Quantity::gev(inv_t),
        contrast_source: source,
        branches,
        conservation,
        simplified: simplified_report,
        result,
        warnings,
    })
}

/// Fits the data and runs the extraction chain on the result.
pub fn run_fit_extract(data: &[FringeSample], config: &RunConfig, simplified: bool) -> Result<Report, PipelineError> {
    let fit = fit_pattern(data, &config.fit)?;
    let fits = Branch::BOTH.into_iter().map(|b| (b, BranchFit::from_fit(&fit, b))).collect();
    let mut report = extract_report(&fits, config, simplified, Some(FitReport::new(&fit)))?;
    if !fit.converged {
        report.warnings.insert(0, "fit did not converge".into());
    }
    if fit.degenerate_direction.is_some() {
        report.warnings.push("fit curvature is singular; some parameters are undetermined".into());
    }
    Ok(report)
}

/// Extraction from coefficients given directly in `[fit_values]`.
pub fn extract_from_values(values: &FitValues, config: &RunConfig, simplified: bool) -> Result<Report, PipelineError> {
    let fits: BTreeMap<Branch, BranchFit> = Branch::BOTH
        .into_iter()
        .filter_map(|b| {
            values.branch(b).map(|v| {
                (
                    b,
                    BranchFit {
                        n0: Estimate::new(v.n0, v.n0_sigma),
                        p: Estimate::new(v.p, v.p_sigma),
                        q: Estimate::new(v.q, v.q_sigma),
                        theta: Estimate::new(v.theta, v.theta_sigma),
                        pqt_covariance: None,
                    },
                )
            })
        })
        .collect();
    if fits.is_empty() {
        return Err(PipelineError::Input("[fit_values] lists no exit beam".into()));
    }
    extract_report(&fits, config, simplified, None)
}

/// Extraction from a previously saved fit.
pub fn extract_from_fit(fit: &FitResult, config: &RunConfig, simplified: bool) -> Result<Report, PipelineError> {
    let fits = Branch::BOTH.into_iter().map(|b| (b, BranchFit::from_fit(fit, b))).collect();
    extract_report(&fits, config, simplified, Some(FitReport::new(fit)))
}
