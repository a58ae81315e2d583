//! Load and initial-data expressions in `t, x, y, z`.

use std::sync::Arc;

use exmex::prelude::*;

use crate::error::CliError;

const VARS: [&str; 4] = ["t", "x", "y", "z"];

/// A parsed expression `f(t, x, y, z)`; `z` is the third coordinate.
#[derive(Clone)]
pub struct Expr {
    source: String,
    flat: Arc<FlatEx<f64>>,
    slots: Vec<usize>,
}

impl std::fmt::Debug for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Expr({:?})", self.source)
    }
}

impl Expr {
    /// Parses `source`; `key` names the config entry in error messages.
    pub fn parse(key: &str, source: &str) -> Result<Self, CliError> {
        let flat = exmex::parse::<f64>(source)
            .map_err(|e| CliError::config(key, format!("cannot parse {source:?}: {e}")))?;
        let mut slots = Vec::new();
        for name in flat.var_names() {
            match VARS.iter().position(|v| v == name) {
                Some(i) => slots.push(i),
                None => {
                    return Err(CliError::config(
                        key,
                        format!("unknown variable {name:?} in {source:?}, expected t, x, y, z"),
                    ))
                }
            }
        }
        Ok(Self {
            source: source.to_string(),
            flat: Arc::new(flat),
            slots,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, t: f64, x: &[f64; 3]) -> f64 {
        let all = [t, x[0], x[1], x[2]];
        let vals: Vec<f64> = self.slots.iter().map(|&i| all[i]).collect();
        self.flat.eval(&vals).unwrap_or(f64::NAN)
    }

    /// True when the expression does not mention `t`.
    pub fn is_steady(&self) -> bool {
        !self.slots.contains(&0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variables_bind_by_name() {
        let e = Expr::parse("k", "x + 10*y + 100*z + 1000*t").unwrap();
        assert_eq!(e.eval(4.0, &[1.0, 2.0, 3.0]), 4321.0);
        let e = Expr::parse("k", "sin(PI*y)").unwrap();
        assert!((e.eval(0.0, &[0.0, 0.5, 0.0]) - 1.0).abs() < 1e-15);
        assert!(e.is_steady());
    }

    #[test]
    fn unknown_variables_name_the_key() {
        let err = Expr::parse("loads.influx", "2*w").unwrap_err();
        assert!(err.to_string().contains("loads.influx"), "{err}");
        assert!(Expr::parse("loads.influx", "2*(x").is_err());
    }
}
