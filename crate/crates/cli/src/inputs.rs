//! Resolution of `--op` / `--field` arguments and command-line numbers.

use std::path::Path;

use fluxlab::catalog;
use fluxlab::error::{FluxError, Result};
use fluxlab::field::Field;
use fluxlab::io;
use fluxlab::operator::OperatorSpec;

/// An existing path is read as an operator file; anything else must be a
/// catalog id.
pub fn operator(arg: &str) -> Result<OperatorSpec> {
    let path = Path::new(arg);
    if path.is_file() {
        return io::read_operator(path);
    }
    catalog::operator(arg)
        .map(|e| e.op)
        .map_err(|_| FluxError::Argument(format!("'{arg}' is neither an operator file nor a catalog operator id")))
}

/// An existing path is read as a grid file; anything else must be a catalog id.
pub fn field(arg: &str) -> Result<Field> {
    let path = Path::new(arg);
    if path.is_file() {
        return io::read_grid_field(path).map(Field::Grid);
    }
    catalog::field(arg)
        .map(|e| e.field)
        .map_err(|_| FluxError::Argument(format!("'{arg}' is neither a grid file nor a catalog field id")))
}

/// Comma-separated decimals, e.g. `"0.1,-0.2"`.
pub fn point(arg: &str) -> Result<Vec<f64>> {
    arg.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| FluxError::Argument(format!("bad coordinate '{t}' in '{arg}'")))
        })
        .collect()
}

pub fn point_or_origin(arg: Option<&str>, n: usize) -> Result<Vec<f64>> {
    let x = match arg {
        Some(a) => point(a)?,
        None => vec![0.0; n],
    };
    if x.len() != n {
        return Err(FluxError::Dimension { what: "point", expected: n, got: x.len() });
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_parse() {
        assert_eq!(point("0.5, -1,2e-1").unwrap(), vec![0.5, -1.0, 0.2]);
        assert!(point("1,,2").is_err());
        assert!(point("nan").is_err());
        assert!(matches!(point_or_origin(Some("1,2"), 3), Err(FluxError::Dimension { .. })));
        assert_eq!(point_or_origin(None, 2).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn unknown_inputs_are_argument_errors() {
        assert!(matches!(operator("no-such-operator"), Err(FluxError::Argument(_))));
        assert!(matches!(field("no-such-field"), Err(FluxError::Argument(_))));
        assert_eq!(operator("cauchy-riemann").unwrap().n, 2);
    }
}
