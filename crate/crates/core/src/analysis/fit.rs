//! Nonlinear least-squares fits of decay envelopes.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use levenberg_marquardt::{LeastSquaresProblem, LevenbergMarquardt, TerminationReason};
use nalgebra::{DMatrix, DVector, Dyn, Owned};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequences::Envelope;
use crate::units::TWO_PI;

/// Minimum number of points accepted by [`fit_curve`].
pub const MIN_POINTS: usize = 5;
/// Number of time-constant starting values.
pub const N_STARTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    /// A·exp(−t/T)
    Exponential,
    /// A·exp(−(t/T)²)
    Gaussian,
    /// A·exp(−(t/T)^α)
    Stretched,
    /// C0·(1 − exp(−t/T))
    Recovery,
    /// c + A·exp(−t/T)·cos(2πft + φ), f in inverse sweep units
    ExpCosine,
    /// c + A·exp(−(t/T)²)·cos(2πft + φ)
    GaussCosine,
}

impl FitModel {
    pub const ALL: [FitModel; 6] = [
        FitModel::Exponential,
        FitModel::Gaussian,
        FitModel::Stretched,
        FitModel::Recovery,
        FitModel::ExpCosine,
        FitModel::GaussCosine,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FitModel::Exponential => "exponential",
            FitModel::Gaussian => "gaussian",
            FitModel::Stretched => "stretched",
            FitModel::Recovery => "recovery",
            FitModel::ExpCosine => "exp_cosine",
            FitModel::GaussCosine => "gauss_cosine",
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            FitModel::Exponential | FitModel::Gaussian => &["A", "T"],
            FitModel::Stretched => &["A", "T", "alpha"],
            FitModel::Recovery => &["C0", "T"],
            FitModel::ExpCosine | FitModel::GaussCosine => &["offset", "A", "T", "f", "phase"],
        }
    }

    /// Parameters fitted on a log scale (kept positive).
    fn positive(self) -> &'static [bool] {
        match self {
            FitModel::Exponential | FitModel::Gaussian | FitModel::Recovery => &[false, true],
            FitModel::Stretched => &[false, true, true],
            FitModel::ExpCosine | FitModel::GaussCosine => &[false, false, true, false, false],
        }
    }

    pub fn eval(self, t: f64, p: &[f64]) -> f64 {
        match self {
            FitModel::Exponential => p[0] * (-t / p[1]).exp(),
            FitModel::Gaussian => p[0] * (-(t / p[1]).powi(2)).exp(),
            FitModel::Stretched => p[0] * (-(t / p[1]).abs().powf(p[2])).exp(),
            FitModel::Recovery => p[0] * (1.0 - (-t / p[1]).exp()),
            FitModel::ExpCosine => p[0] + p[1] * (-t / p[2]).exp() * (TWO_PI * p[3] * t + p[4]).cos(),
            FitModel::GaussCosine => p[0] + p[1] * (-(t / p[2]).powi(2)).exp() * (TWO_PI * p[3] * t + p[4]).cos(),
        }
    }
}

impl fmt::Display for FitModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FitModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FitModel::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::invalid("fit.model", format!("unknown model `{s}`")))
    }
}

/// Fitted parameters with 1σ uncertainties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    pub params: Vec<f64>,
    pub errors: Vec<f64>,
    /// Euclidean norm of the residual vector.
    pub residual: f64,
}

impl FitResult {
    fn index(&self, name: &str) -> Option<usize> {
        self.model.param_names().iter().position(|&n| n == name)
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.index(name).map(|i| self.params[i])
    }

    pub fn error(&self, name: &str) -> Option<f64> {
        self.index(name).map(|i| self.errors[i])
    }

    /// The decay or recovery time constant.
    pub fn time_constant(&self) -> f64 {
        self.param("T").expect("every model has a time constant")
    }

    /// Stretch exponent, for the stretched model only.
    pub fn alpha(&self) -> Option<f64> {
        self.param("alpha")
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.model.eval(t, &self.params)
    }

    pub const CSV_HEADER: &'static str = "model,parameter,value,error";

    /// One row per parameter followed by a `residual` row.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for ((name, v), e) in self.model.param_names().iter().zip(&self.params).zip(&self.errors) {
            writeln!(w, "{},{},{},{}", self.model, name, v, e)?;
        }
        writeln!(w, "{},residual,{},0", self.model, self.residual)
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv is ascii")
    }

    pub fn from_csv_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Config(format!("fit csv: {msg}"));
        let mut lines = s.lines();
        if lines.next() != Some(Self::CSV_HEADER) {
            return Err(bad("missing header"));
        }
        let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
        if rows.iter().any(|r| r.len() != 4) {
            return Err(bad("expected 4 columns"));
        }
        let model: FitModel = rows.first().ok_or_else(|| bad("no rows"))?[0].parse()?;
        let names = model.param_names();
        if rows.len() != names.len() + 1 {
            return Err(bad("wrong number of rows"));
        }
        let num = |v: &str| v.parse::<f64>().map_err(|_| bad("bad number"));
        let mut params = Vec::new();
        let mut errors = Vec::new();
        for (row, name) in rows.iter().zip(names) {
            if row[1] != *name {
                return Err(bad("unexpected parameter name"));
            }
            params.push(num(row[2])?);
            errors.push(num(row[3])?);
        }
        let last = rows.last().expect("checked non-empty");
        if last[1] != "residual" {
            return Err(bad("missing residual row"));
        }
        Ok(Self {
            model,
            params,
            errors,
            residual: num(last[2])?,
        })
    }
}

struct Problem<'a> {
    f: &'a dyn Fn(f64, &[f64]) -> f64,
    positive: &'a [bool],
    x: &'a [f64],
    y: &'a [f64],
    /// Internal parameters: log of the positive ones.
    q: DVector<f64>,
}

impl Problem<'_> {
    fn user(&self, q: &DVector<f64>) -> Vec<f64> {
        q.iter()
            .zip(self.positive)
            .map(|(&v, &pos)| if pos { v.exp() } else { v })
            .collect()
    }

    fn residual_at(&self, q: &DVector<f64>) -> DVector<f64> {
        let p = self.user(q);
        DVector::from_iterator(self.x.len(), self.x.iter().zip(self.y).map(|(&t, &y)| (self.f)(t, &p) - y))
    }
}

impl LeastSquaresProblem<f64, Dyn, Dyn> for Problem<'_> {
    type ResidualStorage = Owned<f64, Dyn>;
    type JacobianStorage = Owned<f64, Dyn, Dyn>;
    type ParameterStorage = Owned<f64, Dyn>;

    fn set_params(&mut self, q: &DVector<f64>) {
        self.q.copy_from(q);
    }

    fn params(&self) -> DVector<f64> {
        self.q.clone()
    }

    fn residuals(&self) -> Option<DVector<f64>> {
        let r = self.residual_at(&self.q);
        r.iter().all(|v| v.is_finite()).then_some(r)
    }

    fn jacobian(&self) -> Option<DMatrix<f64>> {
        let j = numeric_jacobian(|q| self.residual_at(q), &self.q);
        j.iter().all(|v| v.is_finite()).then_some(j)
    }
}

/// Best converged least-squares solution over the given starting points.
/// Parameters flagged in `positive` are optimized on a log scale. Returns
/// the parameters, the residual norm and their 1σ uncertainties, or the best
/// residual reached if no start converged.
pub(crate) fn least_squares(
    f: &dyn Fn(f64, &[f64]) -> f64,
    positive: &[bool],
    x: &[f64],
    y: &[f64],
    starts: &[Vec<f64>],
) -> std::result::Result<(Vec<f64>, f64, Vec<f64>), f64> {
    let solver = LevenbergMarquardt::new().with_patience(400).with_tol(1e-13);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut best_any = f64::INFINITY;
    for p0 in starts {
        let q0 = DVector::from_iterator(
            p0.len(),
            p0.iter()
                .zip(positive)
                .map(|(&v, &pos)| if pos { v.abs().max(f64::MIN_POSITIVE).ln() } else { v }),
        );
        let problem = Problem { f, positive, x, y, q: q0 };
        let (solved, report) = solver.minimize(problem);
        let norm = solved.residual_at(&solved.q).norm();
        if !norm.is_finite() {
            continue;
        }
        best_any = best_any.min(norm);
        let converged = report.termination.was_successful()
            || matches!(report.termination, TerminationReason::NoImprovementPossible(_));
        if converged && best.as_ref().is_none_or(|(b, _)| norm < *b) {
            best = Some((norm, solved.user(&solved.q)));
        }
    }
    match best {
        Some((residual, params)) if params.iter().all(|v| v.is_finite()) => {
            let errors = uncertainties(f, x, y, &params, residual);
            Ok((params, residual, errors))
        }
        Some((residual, _)) => Err(residual),
        None => Err(best_any),
    }
}

fn numeric_jacobian(f: impl Fn(&DVector<f64>) -> DVector<f64>, at: &DVector<f64>) -> DMatrix<f64> {
    let m = f(at).len();
    let mut j = DMatrix::zeros(m, at.len());
    for k in 0..at.len() {
        let h = 1e-7 * at[k].abs().max(1.0);
        let mut plus = at.clone();
        let mut minus = at.clone();
        plus[k] += h;
        minus[k] -= h;
        let d = (f(&plus) - f(&minus)) / (2.0 * h);
        j.set_column(k, &d);
    }
    j
}

/// Eight log-spaced time constants between the finest spacing and the span.
fn time_grid(x: &[f64]) -> Vec<f64> {
    let lo_x = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi_x = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi_x - lo_x).max(hi_x.abs()).max(f64::MIN_POSITIVE);
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let step = sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|&d| d > 0.0)
        .fold(f64::INFINITY, f64::min);
    let lo = step.min(span).max(span * 1e-3);
    (0..N_STARTS)
        .map(|k| lo * (span / lo).powf(k as f64 / (N_STARTS - 1) as f64))
        .collect()
}

/// Dominant frequency and its phase from a direct periodogram.
fn dominant_frequency(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len();
    let mean = y.iter().sum::<f64>() / n as f64;
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    let f_max = 0.5 * (n - 1) as f64 / span;
    let n_f = 8 * n;
    let mut best = (0.0, 0.0, 0.0);
    for k in 1..=n_f {
        let f = f_max * k as f64 / n_f as f64;
        let (mut c, mut s) = (0.0, 0.0);
        for (&t, &v) in x.iter().zip(y) {
            let a = TWO_PI * f * t;
            c += (v - mean) * a.cos();
            s += (v - mean) * a.sin();
        }
        let power = c * c + s * s;
        if power > best.0 {
            best = (power, f, (-s).atan2(c));
        }
    }
    (best.1, best.2)
}

fn starts(model: FitModel, x: &[f64], y: &[f64]) -> Vec<Vec<f64>> {
    let grid = time_grid(x);
    let i_first = (0..x.len()).min_by(|&a, &b| x[a].total_cmp(&x[b])).expect("non-empty");
    let i_last = (0..x.len()).max_by(|&a, &b| x[a].total_cmp(&x[b])).expect("non-empty");
    let first = y[i_first];
    let amp0 = if first.abs() > 0.0 {
        first
    } else {
        y.iter().copied().fold(0.0, |m: f64, v| if v.abs() > m.abs() { v } else { m })
    };
    match model {
        FitModel::Exponential | FitModel::Gaussian => grid.iter().map(|&t| vec![amp0, t]).collect(),
        FitModel::Stretched => [1.0, 2.0]
            .iter()
            .flat_map(|&a| grid.iter().map(move |&t| vec![amp0, t, a]))
            .collect(),
        FitModel::Recovery => grid.iter().map(|&t| vec![y[i_last], t]).collect(),
        FitModel::ExpCosine | FitModel::GaussCosine => {
            let mean = y.iter().sum::<f64>() / y.len() as f64;
            let hi = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = y.iter().copied().fold(f64::INFINITY, f64::min);
            let (f, phase) = dominant_frequency(x, y);
            grid.iter().map(|&t| vec![mean, 0.5 * (hi - lo), t, f, phase]).collect()
        }
    }
}

/// Least-squares fit of `model` to (x, y), multi-started from a fixed grid.
pub fn fit_curve(x: &[f64], y: &[f64], model: FitModel) -> Result<FitResult> {
    if x.len() != y.len() {
        return Err(Error::invalid("fit", "x and y must have equal length"));
    }
    if x.len() < MIN_POINTS {
        return Err(Error::invalid("fit", format!("needs at least {MIN_POINTS} points")));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("fit", "data must be finite"));
    }
    let eval = |t: f64, p: &[f64]| model.eval(t, p);
    let (mut params, residual, errors) = least_squares(&eval, model.positive(), x, y, &starts(model, x, y))
        .map_err(|best_residual| Error::FitFailed {
            model: model.name().into(),
            best_residual,
        })?;
    if matches!(model, FitModel::ExpCosine | FitModel::GaussCosine) {
        canonical_oscillation(&mut params);
    }
    Ok(FitResult {
        model,
        params,
        errors,
        residual,
    })
}

/// Positive amplitude and frequency, phase in [0, 2π).
fn canonical_oscillation(p: &mut [f64]) {
    if p[3] < 0.0 {
        p[3] = -p[3];
        p[4] = -p[4];
    }
    if p[1] < 0.0 {
        p[1] = -p[1];
        p[4] += std::f64::consts::PI;
    }
    p[4] = p[4].rem_euclid(TWO_PI);
}

/// 1σ errors from the Jacobian at the optimum, scaled by the residual variance.
fn uncertainties(f: &dyn Fn(f64, &[f64]) -> f64, x: &[f64], y: &[f64], params: &[f64], residual: f64) -> Vec<f64> {
    let n_p = params.len();
    let dof = x.len().saturating_sub(n_p);
    if dof == 0 {
        return vec![f64::INFINITY; n_p];
    }
    let s2 = residual * residual / dof as f64;
    let at = DVector::from_column_slice(params);
    let j = numeric_jacobian(
        |p| DVector::from_iterator(x.len(), x.iter().zip(y).map(|(&t, &v)| f(t, p.as_slice()) - v)),
        &at,
    );
    match (j.transpose() * &j).try_inverse() {
        Some(cov) => (0..n_p).map(|k| (s2 * cov[(k, k)]).max(0.0).sqrt()).collect(),
        None => vec![f64::INFINITY; n_p],
    }
}

/// Fits the visibility of an envelope against its sweep.
pub fn fit_decay(envelope: &Envelope, model: FitModel) -> Result<FitResult> {
    fit_curve(&envelope.sweep, &envelope.visibility, model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use rand_distr::{Distribution, Normal};

    fn grid(n: usize, dt: f64) -> Vec<f64> {
        (0..n).map(|i| i as f64 * dt).collect()
    }

    #[test]
    fn exact_exponential_recovery() {
        let x = grid(60, 5.0);
        let y: Vec<f64> = x.iter().map(|t| (-t / 73.0).exp()).collect();
        let fit = fit_curve(&x, &y, FitModel::Exponential).unwrap();
        assert!((fit.time_constant() / 73.0 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn noisy_gaussian_recovery() {
        let x = grid(80, 20.0);
        let noise = Normal::new(0.0, 0.02).unwrap();
        let mut rng = substream(7, &[0]);
        let y: Vec<f64> = x
            .iter()
            .map(|t| (-(t / 608.0f64).powi(2)).exp() + noise.sample(&mut rng))
            .collect();
        let fit = fit_curve(&x, &y, FitModel::Gaussian).unwrap();
        assert!((fit.time_constant() / 608.0 - 1.0).abs() < 0.02);
        assert!(fit.error("T").unwrap() > 0.0);
    }

    #[test]
    fn stretched_on_exponential_gives_unit_alpha() {
        let x = grid(50, 2.0);
        let y: Vec<f64> = x.iter().map(|t| 0.8 * (-t / 30.0).exp()).collect();
        let fit = fit_curve(&x, &y, FitModel::Stretched).unwrap();
        assert!((fit.alpha().unwrap() - 1.0).abs() < 0.05);
    }

    #[test]
    fn recovery_fit() {
        let x = grid(40, 5000.0);
        let y: Vec<f64> = x.iter().map(|t| 0.6 * (1.0 - (-t / 47_000.0).exp())).collect();
        let fit = fit_curve(&x, &y, FitModel::Recovery).unwrap();
        assert!((fit.time_constant() / 47_000.0 - 1.0).abs() < 1e-6);
        assert!((fit.param("C0").unwrap() - 0.6).abs() < 1e-6);
    }

    #[test]
    fn damped_cosine_fit() {
        let x = grid(200, 0.5);
        let y: Vec<f64> = x
            .iter()
            .map(|t| 0.5 + 0.5 * (-t / 73.0).exp() * (TWO_PI * 0.13 * t + 3.0).cos())
            .collect();
        let fit = fit_curve(&x, &y, FitModel::ExpCosine).unwrap();
        assert!((fit.param("T").unwrap() / 73.0 - 1.0).abs() < 1e-6);
        assert!((fit.param("f").unwrap() - 0.13).abs() < 1e-8);
    }

    #[test]
    fn too_few_points_rejected() {
        let x = grid(4, 1.0);
        assert!(fit_curve(&x, &x, FitModel::Exponential).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let fit = FitResult {
            model: FitModel::Stretched,
            params: vec![0.9, 123.456789, 1.1],
            errors: vec![0.01, 2.5, 0.003],
            residual: 0.0123,
        };
        let s = fit.to_csv_string();
        assert_eq!(s.lines().count(), 5);
        assert_eq!(FitResult::from_csv_str(&s).unwrap(), fit);
    }
}
