//! Problem files: either a bare generator or a quantum problem.
//!
//! ```json
//! {"n": 2, "interval": [0, 1], "terms": [{"coeff": "t", "matrix": {...}}]}
//! {"problem": "example1", "params": {"gamma": 1, "alpha1": "sin(t)"}, "rho0": {...}}
//! {"problem": "custom", "generator": {...}, "rho0": {...}}
//! ```
//!
//! Coefficients are grammar strings or plain numbers; complex constants
//! may also be written `[re, im]`.

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::generator::GeneratorSum;
use crate::linalg::{ComplexMatrix, C64};
use crate::quantum::{example1, example2_with_hbar, DensityMatrix, QuantumProblem};
use crate::scalar::{parse, Interval, ScalarFn};

/// Interval used by the built-in problems unless `params.interval` is set.
pub const DEFAULT_INTERVAL: [f64; 2] = [0.0, 2.0];

#[derive(Clone, Debug)]
pub enum ProblemSpec {
    Generator(GeneratorSum),
    Quantum { problem: Box<QuantumProblem>, rho0: Option<ComplexMatrix> },
}

impl ProblemSpec {
    pub fn from_json(src: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(src)?;
        Self::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Self> {
        let Value::Object(mut obj) = value else {
            return Err(Error::Invalid("problem file must be a JSON object".into()));
        };
        let Some(kind) = obj.remove("problem") else {
            return Ok(ProblemSpec::Generator(serde_json::from_value(Value::Object(obj))?));
        };
        let kind = kind.as_str().ok_or_else(|| Error::Invalid("\"problem\" must be a string".into()))?.to_owned();
        let params = match obj.remove("params") {
            None | Some(Value::Null) => Map::new(),
            Some(Value::Object(m)) => m,
            Some(_) => return Err(Error::Invalid("\"params\" must be an object".into())),
        };
        let rho0 = match obj.remove("rho0") {
            None | Some(Value::Null) => None,
            Some(v) => Some(serde_json::from_value::<ComplexMatrix>(v)?),
        };
        let problem = match kind.as_str() {
            "example1" => example1_from(params)?,
            "example2" => example2_from(params)?,
            "custom" => custom_from(obj, params)?,
            other => return Err(Error::Invalid(format!("unknown problem \"{other}\""))),
        };
        Ok(ProblemSpec::Quantum { problem: Box::new(problem), rho0 })
    }

    pub fn generator(&self) -> &GeneratorSum {
        match self {
            ProblemSpec::Generator(g) => g,
            ProblemSpec::Quantum { problem, .. } => &problem.generator,
        }
    }

    pub fn quantum(&self) -> Option<&QuantumProblem> {
        match self {
            ProblemSpec::Generator(_) => None,
            ProblemSpec::Quantum { problem, .. } => Some(problem),
        }
    }

    /// The initial state, validated.
    pub fn initial_state(&self) -> Result<DensityMatrix> {
        match self {
            ProblemSpec::Quantum { rho0: Some(m), .. } => DensityMatrix::new(m.clone()),
            ProblemSpec::Quantum { rho0: None, .. } => Err(Error::Invalid("problem has no \"rho0\"".into())),
            ProblemSpec::Generator(_) => Err(Error::Invalid("a bare generator has no initial state".into())),
        }
    }
}

struct Params(Map<String, Value>);

impl Params {
    fn take(&mut self, key: &str) -> Option<Value> {
        self.0.remove(key).filter(|v| !v.is_null())
    }

    fn finish(self) -> Result<()> {
        match self.0.keys().next() {
            Some(k) => Err(Error::Invalid(format!("unknown parameter \"{k}\""))),
            None => Ok(()),
        }
    }

    fn real(&mut self, key: &str, default: f64) -> Result<f64> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => v.as_f64().ok_or_else(|| Error::Invalid(format!("parameter \"{key}\" must be a number"))),
        }
    }

    fn complex(&mut self, key: &str, default: C64) -> Result<C64> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => complex_value(&v).ok_or_else(|| Error::Invalid(format!("parameter \"{key}\" must be a number or [re, im]"))),
        }
    }

    fn coeff(&mut self, key: &str, default: f64) -> Result<ScalarFn> {
        match self.take(key) {
            None => Ok(ScalarFn::real(default)),
            Some(Value::String(s)) => parse(&s).map_err(|e| Error::Invalid(format!("parameter \"{key}\": {e}"))),
            Some(v) => complex_value(&v)
                .map(ScalarFn::constant)
                .ok_or_else(|| Error::Invalid(format!("parameter \"{key}\" must be an expression or a number"))),
        }
    }

    fn interval(&mut self) -> Result<Interval> {
        match self.take("interval") {
            None => Interval::try_from(DEFAULT_INTERVAL),
            Some(v) => Ok(serde_json::from_value(v)?),
        }
    }
}

fn complex_value(v: &Value) -> Option<C64> {
    match v {
        Value::Number(n) => n.as_f64().map(|x| C64::new(x, 0.0)),
        Value::Array(a) if a.len() == 2 => Some(C64::new(a[0].as_f64()?, a[1].as_f64()?)),
        _ => None,
    }
}

/// Defaults: `γ = 1`, `α₁ = α₂ = α₃ = 1`.
fn example1_from(params: Map<String, Value>) -> Result<QuantumProblem> {
    let mut p = Params(params);
    let gamma = p.complex("gamma", C64::new(1.0, 0.0))?;
    let a1 = p.coeff("alpha1", 1.0)?;
    let a2 = p.coeff("alpha2", 1.0)?;
    let a3 = p.coeff("alpha3", 1.0)?;
    let interval = p.interval()?;
    p.finish()?;
    example1(gamma, a1, a2, a3, interval)
}

/// Defaults: `μ = ½`, `ħ = 1`, `γ = 1`, `ε = 2`, `c₀₀ = c₁₁ = 0.1`,
/// `c₀₁ = c₁₀ = 0.2`.
fn example2_from(params: Map<String, Value>) -> Result<QuantumProblem> {
    let mut p = Params(params);
    let mu = p.real("mu", 0.5)?;
    let hbar = p.real("hbar", 1.0)?;
    let gamma = p.coeff("gamma", 1.0)?;
    let eps = p.coeff("eps", 2.0)?;
    let cm = [[p.coeff("c00", 0.1)?, p.coeff("c01", 0.2)?], [p.coeff("c10", 0.2)?, p.coeff("c11", 0.1)?]];
    let interval = p.interval()?;
    p.finish()?;
    example2_with_hbar(mu, hbar, gamma, eps, cm, interval)
}

fn custom_from(mut obj: Map<String, Value>, params: Map<String, Value>) -> Result<QuantumProblem> {
    let mut p = Params(params);
    let generator = match (obj.remove("generator"), p.take("generator")) {
        (Some(g), None) | (None, Some(g)) => serde_json::from_value::<GeneratorSum>(g)?,
        (Some(_), Some(_)) => return Err(Error::Invalid("generator given twice".into())),
        (None, None) => return Err(Error::Invalid("custom problem needs a \"generator\"".into())),
    };
    let name = match p.take("name") {
        Some(Value::String(s)) => s,
        None => "custom".into(),
        Some(_) => return Err(Error::Invalid("parameter \"name\" must be a string".into())),
    };
    p.finish()?;
    QuantumProblem::custom(name, generator)
}
