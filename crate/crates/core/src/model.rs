//! Generative models, regime parameterization and the `(u, v)` rotation.

use std::f64::consts::FRAC_1_SQRT_2;
use std::io::{Read, Write};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mixture weight and contaminated-component correlation.
///
/// `1 - rho` is stored separately so that sparse-regime parameters with `rho`
/// within 1e-12 of one keep their exact distance to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    eps: f64,
    rho: f64,
    one_minus_rho: f64,
}

impl ModelParams {
    pub fn new(eps: f64, rho: f64) -> Result<Self> {
        Self::check(eps, rho)?;
        Ok(Self {
            eps,
            rho,
            one_minus_rho: 1.0 - rho,
        })
    }

    /// Builds parameters from the gap `1 - rho` directly.
    pub fn from_gap(eps: f64, one_minus_rho: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&one_minus_rho) {
            return Err(Error::InvalidParams(format!(
                "1 - rho must lie in [0, 1], got {one_minus_rho}"
            )));
        }
        let rho = 1.0 - one_minus_rho;
        Self::check(eps, rho)?;
        Ok(Self {
            eps,
            rho,
            one_minus_rho,
        })
    }

    /// The null model, `eps = 0`.
    pub fn null() -> Self {
        Self {
            eps: 0.0,
            rho: 0.0,
            one_minus_rho: 1.0,
        }
    }

    fn check(eps: f64, rho: f64) -> Result<()> {
        if !(0.0..0.5).contains(&eps) {
            return Err(Error::InvalidParams(format!(
                "eps must lie in [0, 1/2), got {eps}"
            )));
        }
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::InvalidParams(format!(
                "rho must lie in [0, 1], got {rho}"
            )));
        }
        Ok(())
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn one_minus_rho(&self) -> f64 {
        self.one_minus_rho
    }

    /// `1 - rho^2`, computed as `(1 - rho)(1 + rho)`.
    pub fn one_minus_rho_sq(&self) -> f64 {
        self.one_minus_rho * (1.0 + self.rho)
    }

    /// Same correlation, contamination switched off.
    pub fn with_null_weight(&self) -> Self {
        Self { eps: 0.0, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Dense,
    Sparse,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Dense => "dense",
            Regime::Sparse => "sparse",
        }
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(Regime::Dense),
            "sparse" => Ok(Regime::Sparse),
            other => Err(Error::Config(format!(
                "unknown regime {other:?}, expected dense or sparse"
            ))),
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Asymptotic parameterization: `eps = n^-beta`, and `rho = n^-gamma` (dense)
/// or `rho = 1 - n^-gamma` (sparse).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeSpec {
    pub regime: Regime,
    pub beta: f64,
    pub gamma: f64,
    pub n: u64,
}

impl RegimeSpec {
    pub fn new(regime: Regime, beta: f64, gamma: f64, n: u64) -> Result<Self> {
        let spec = Self {
            regime,
            beta,
            gamma,
            n,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::InvalidParams(format!(
                "beta must lie in (0, 1), got {}",
                self.beta
            )));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        if self.n == 0 {
            return Err(Error::InvalidParams("n must be positive".into()));
        }
        Ok(())
    }

    pub fn derive_params(&self) -> Result<ModelParams> {
        derive_params(self)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }
}

/// Maps a regime specification to concrete mixture parameters.
pub fn derive_params(spec: &RegimeSpec) -> Result<ModelParams> {
    spec.validate()?;
    let n = spec.n as f64;
    let eps = n.powf(-spec.beta);
    if eps >= 0.5 {
        return Err(Error::InvalidParams(format!(
            "eps = n^-beta = {eps} is not below 1/2 (n = {}, beta = {})",
            spec.n, spec.beta
        )));
    }
    let decay = n.powf(-spec.gamma);
    match spec.regime {
        Regime::Dense => ModelParams::new(eps, decay),
        Regime::Sparse => ModelParams::from_gap(eps, decay),
    }
}

/// `n` paired observations with optional contamination labels.
///
/// Labels are diagnostics only; statistics take a [`SampleView`], which has
/// no access to them.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSample {
    x: Vec<f64>,
    y: Vec<f64>,
    labels: Option<Vec<bool>>,
}

impl PairedSample {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        validate_pairs(&x, &y)?;
        Ok(Self { x, y, labels: None })
    }

    pub fn with_labels(x: Vec<f64>, y: Vec<f64>, labels: Vec<bool>) -> Result<Self> {
        validate_pairs(&x, &y)?;
        if labels.len() != x.len() {
            return Err(Error::InvalidSample(format!(
                "{} labels for {} observations",
                labels.len(),
                x.len()
            )));
        }
        Ok(Self {
            x,
            y,
            labels: Some(labels),
        })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn labels(&self) -> Option<&[bool]> {
        self.labels.as_deref()
    }

    /// Label-free view handed to test statistics.
    pub fn view(&self) -> SampleView<'_> {
        SampleView {
            x: &self.x,
            y: &self.y,
        }
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>, Option<Vec<bool>>) {
        (self.x, self.y, self.labels)
    }

    /// Writes `x,y[,label]` CSV. Values use the shortest decimal that
    /// round-trips to the same `f64`.
    pub fn write_csv<W: Write>(&self, writer: W, include_labels: bool) -> Result<()> {
        let labels = if include_labels { self.labels() } else { None };
        let mut w = csv::Writer::from_writer(writer);
        match labels {
            Some(_) => w.write_record(["x", "y", "label"])?,
            None => w.write_record(["x", "y"])?,
        }
        for i in 0..self.len() {
            let x = format!("{:?}", self.x[i]);
            let y = format!("{:?}", self.y[i]);
            match labels {
                Some(l) => w.write_record([x.as_str(), y.as_str(), if l[i] { "1" } else { "0" }])?,
                None => w.write_record([x.as_str(), y.as_str()])?,
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = r.headers()?.clone();
        let column = |name: &str| headers.iter().position(|h| h == name);
        let (xi, yi) = match (column("x"), column("y")) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(Error::InvalidSample(format!(
                    "CSV header must contain x and y, found {:?}",
                    headers.iter().collect::<Vec<_>>()
                )))
            }
        };
        let li = column("label");
        let mut x = Vec::new();
        let mut y = Vec::new();
        let mut labels = Vec::new();
        for (row, record) in r.records().enumerate() {
            let record = record?;
            let field = |i: usize| -> Result<f64> {
                let raw = record.get(i).unwrap_or("");
                raw.parse::<f64>().map_err(|_| {
                    Error::InvalidSample(format!("row {}: cannot parse {raw:?} as a number", row + 2))
                })
            };
            x.push(field(xi)?);
            y.push(field(yi)?);
            if let Some(li) = li {
                let raw = record.get(li).unwrap_or("");
                let label = match raw {
                    "1" | "true" => true,
                    "0" | "false" => false,
                    other => {
                        return Err(Error::InvalidSample(format!(
                            "row {}: label must be 0/1, got {other:?}",
                            row + 2
                        )))
                    }
                };
                labels.push(label);
            }
        }
        if li.is_some() {
            Self::with_labels(x, y, labels)
        } else {
            Self::new(x, y)
        }
    }
}

fn validate_pairs(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::InvalidSample(format!(
            "length mismatch: {} x values, {} y values",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::InvalidSample(format!(
            "need at least 2 observations, got {}",
            x.len()
        )));
    }
    if let Some(i) = x.iter().chain(y).position(|v| !v.is_finite()) {
        let (coord, idx) = if i < x.len() { ("x", i) } else { ("y", i - x.len()) };
        return Err(Error::InvalidSample(format!("non-finite value in {coord} at index {idx}")));
    }
    Ok(())
}

/// Borrowed `(x, y)` pairs without labels.
#[derive(Debug, Clone, Copy)]
pub struct SampleView<'a> {
    x: &'a [f64],
    y: &'a [f64],
}

impl<'a> SampleView<'a> {
    pub fn new(x: &'a [f64], y: &'a [f64]) -> Result<Self> {
        validate_pairs(x, y)?;
        Ok(Self { x, y })
    }

    /// Skips validation; for internal callers that built the slices from an
    /// already validated sample.
    pub(crate) fn new_unchecked(x: &'a [f64], y: &'a [f64]) -> Self {
        debug_assert_eq!(x.len(), y.len());
        Self { x, y }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x(&self) -> &'a [f64] {
        self.x
    }

    pub fn y(&self) -> &'a [f64] {
        self.y
    }

    /// `u_i = (x_i - y_i) / sqrt 2`.
    pub fn u_values(&self) -> Vec<f64> {
        self.x
            .iter()
            .zip(self.y)
            .map(|(a, b)| (a - b) * FRAC_1_SQRT_2)
            .collect()
    }

    pub fn to_owned(&self) -> PairedSample {
        PairedSample {
            x: self.x.to_vec(),
            y: self.y.to_vec(),
            labels: None,
        }
    }
}

/// Rotates `(x, y)` to `u = (x - y)/sqrt 2`, `v = (x + y)/sqrt 2`. Labels
/// carry over. Applying it twice maps `(x, y)` to `(-y, x)`.
pub fn rotate_uv(sample: &PairedSample) -> PairedSample {
    let (u, v) = sample
        .x
        .iter()
        .zip(&sample.y)
        .map(|(a, b)| ((a - b) * FRAC_1_SQRT_2, (a + b) * FRAC_1_SQRT_2))
        .unzip();
    PairedSample {
        x: u,
        y: v,
        labels: sample.labels.clone(),
    }
}

/// Draws `n` pairs from `(1 - eps) N(0, I) + eps N(0, Σ_rho)`.
///
/// The contaminated draw uses `y = rho z + sqrt(1 - rho^2) w`, which collapses
/// to `y = z` at `rho = 1`.
pub fn sample_gmm<R: Rng + ?Sized>(params: &ModelParams, n: usize, rng: &mut R) -> Result<PairedSample> {
    if n < 2 {
        return Err(Error::InvalidSample(format!("need n >= 2, got {n}")));
    }
    let eps = params.eps();
    let rho = params.rho();
    let scale = params.one_minus_rho_sq().sqrt();
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let coin: f64 = rng.gen();
        let z: f64 = rng.sample(StandardNormal);
        let w: f64 = rng.sample(StandardNormal);
        let contaminated = coin < eps;
        x.push(z);
        y.push(if contaminated { rho * z + scale * w } else { w });
        labels.push(contaminated);
    }
    Ok(PairedSample {
        x,
        y,
        labels: Some(labels),
    })
}

/// Strictly increasing map applied to one coordinate of a latent sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarginalTransform {
    Identity,
    Cube,
    Exp,
    Logistic,
    /// Piecewise-linear through the knots, extended linearly past both ends.
    Table(PiecewiseLinear),
}

impl MarginalTransform {
    pub fn apply(&self, z: f64) -> f64 {
        match self {
            MarginalTransform::Identity => z,
            MarginalTransform::Cube => z * z * z,
            MarginalTransform::Exp => z.exp(),
            MarginalTransform::Logistic => 1.0 / (1.0 + (-z).exp()),
            MarginalTransform::Table(t) => t.eval(z),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MarginalTransform::Identity => "identity",
            MarginalTransform::Cube => "cube",
            MarginalTransform::Exp => "exp",
            MarginalTransform::Logistic => "logistic",
            MarginalTransform::Table(_) => "table",
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, MarginalTransform::Identity)
    }
}

impl Default for MarginalTransform {
    fn default() -> Self {
        MarginalTransform::Identity
    }
}

impl std::str::FromStr for MarginalTransform {
    type Err = Error;

    /// Parses a built-in name; tables come from JSON config only.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(MarginalTransform::Identity),
            "cube" => Ok(MarginalTransform::Cube),
            "exp" => Ok(MarginalTransform::Exp),
            "logistic" => Ok(MarginalTransform::Logistic),
            other => Err(Error::Config(format!(
                "unknown transform {other:?}, expected identity, cube, exp or logistic"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct PiecewiseLinear {
    knots: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::NonMonotone("a table needs at least two knots".into()));
        }
        for w in knots.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if !(x0.is_finite() && y0.is_finite() && x1.is_finite() && y1.is_finite()) {
                return Err(Error::NonMonotone("table knots must be finite".into()));
            }
            if !(x1 > x0 && y1 > y0) {
                return Err(Error::NonMonotone(format!(
                    "knots ({x0}, {y0}) and ({x1}, {y1}) are not strictly increasing"
                )));
            }
        }
        Ok(Self { knots })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn eval(&self, z: f64) -> f64 {
        let k = &self.knots;
        let seg = match k.partition_point(|&(kx, _)| kx <= z) {
            0 => 0,
            i if i >= k.len() => k.len() - 2,
            i => i - 1,
        };
        let (x0, y0) = k[seg];
        let (x1, y1) = k[seg + 1];
        y0 + (z - x0) * (y1 - y0) / (x1 - x0)
    }
}

impl TryFrom<Vec<(f64, f64)>> for PiecewiseLinear {
    type Error = Error;

    fn try_from(knots: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(knots)
    }
}

impl From<PiecewiseLinear> for Vec<(f64, f64)> {
    fn from(t: PiecewiseLinear) -> Self {
        t.knots
    }
}

/// Gaussian mixture copula draw: latent pairs from [`sample_gmm`] pushed
/// through `hx` and `hy`.
pub fn sample_gmcm<R: Rng + ?Sized>(
    params: &ModelParams,
    n: usize,
    hx: &MarginalTransform,
    hy: &MarginalTransform,
    rng: &mut R,
) -> Result<PairedSample> {
    let latent = sample_gmm(params, n, rng)?;
    let (zx, zy, labels) = latent.into_parts();
    let x = transform_checked(&zx, hx, "x")?;
    let y = transform_checked(&zy, hy, "y")?;
    match labels {
        Some(l) => PairedSample::with_labels(x, y, l),
        None => PairedSample::new(x, y),
    }
}

/// Applies `h` and verifies that it preserved the strict order of `values`.
pub fn transform_checked(values: &[f64], h: &MarginalTransform, coordinate: &str) -> Result<Vec<f64>> {
    let out: Vec<f64> = values.iter().map(|&z| h.apply(z)).collect();
    if h.is_identity() {
        return Ok(out);
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_unstable_by(|&a, &b| values[a].total_cmp(&values[b]));
    for w in order.windows(2) {
        let (a, b) = (w[0], w[1]);
        let increasing = if values[a] < values[b] { out[a] < out[b] } else { out[a] == out[b] };
        if !increasing || !out[b].is_finite() {
            return Err(Error::NonMonotone(format!(
                "{} on {coordinate}: {} -> {}, {} -> {}",
                h.name(),
                values[a],
                out[a],
                values[b],
                out[b]
            )));
        }
    }
    Ok(out)
}
