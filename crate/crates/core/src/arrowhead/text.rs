//! Line-oriented text form `n; d_1 .. d_{n-1}; re(a_1) im(a_1) ..; corner`.

use num_complex::Complex;
use thiserror::Error;

use super::ArrowheadSpec;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseSpecError {
    #[error("expected 4 ';'-separated fields, found {0}")]
    FieldCount(usize),
    #[error("invalid number {0:?}")]
    Number(String),
    #[error("declared n = {declared} but found {diag} diagonal and {border} border values")]
    Length {
        declared: usize,
        diag: usize,
        border: usize,
    },
}

fn numbers(field: &str) -> Result<Vec<f64>, ParseSpecError> {
    field
        .split_whitespace()
        .map(|tok| tok.parse::<f64>().map_err(|_| ParseSpecError::Number(tok.to_string())))
        .collect()
}

pub fn parse_spec<T: Scalar>(line: &str) -> Result<ArrowheadSpec<T>, ParseSpecError> {
    let fields: Vec<&str> = line.trim().split(';').collect();
    if fields.len() != 4 {
        return Err(ParseSpecError::FieldCount(fields.len()));
    }
    let n_tok = fields[0].trim();
    let n: usize = n_tok.parse().map_err(|_| ParseSpecError::Number(n_tok.to_string()))?;
    let d = numbers(fields[1])?;
    let a = numbers(fields[2])?;
    let corner = numbers(fields[3])?;
    if n < 2 || d.len() != n - 1 || a.len() != 2 * (n - 1) || corner.len() != 1 {
        return Err(ParseSpecError::Length {
            declared: n,
            diag: d.len(),
            border: a.len() / 2,
        });
    }
    let border = a
        .chunks(2)
        .map(|p| Complex::new(T::lit(p[0]), T::lit(p[1])))
        .collect();
    Ok(ArrowheadSpec::new(d.into_iter().map(T::lit).collect(), border, T::lit(corner[0]))
        .expect("lengths checked"))
}

pub fn format_spec<T: Scalar>(spec: &ArrowheadSpec<T>) -> String {
    let join = |v: Vec<String>| v.join(" ");
    let d = join(spec.diagonal().iter().map(|x| x.to_string()).collect());
    let a = join(
        spec.border()
            .iter()
            .flat_map(|z| [z.re.to_string(), z.im.to_string()])
            .collect(),
    );
    format!("{}; {}; {}; {}", spec.n(), d, a, spec.corner)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_example() {
        let s: ArrowheadSpec<f64> = parse_spec("3; 1 2; 0 1 0 0; 0").unwrap();
        assert_eq!(s.diagonal(), &[1.0, 2.0]);
        assert_eq!(s.border()[0], Complex::new(0.0, 1.0));
        assert_eq!(s.corner, 0.0);
    }

    #[test]
    fn rejects_malformed() {
        assert_eq!(parse_spec::<f64>("2; 0; 1 0").unwrap_err(), ParseSpecError::FieldCount(3));
        assert!(matches!(parse_spec::<f64>("3; 1; 0 0; 1"), Err(ParseSpecError::Length { .. })));
        assert!(matches!(parse_spec::<f64>("2; x; 0 0; 1"), Err(ParseSpecError::Number(_))));
    }

    proptest! {
        #[test]
        fn text_roundtrip(
            d in prop::collection::vec(-1e3f64..1e3, 1..7),
            seed in prop::collection::vec(-1e3f64..1e3, 14),
            corner in -1e6f64..1e6,
        ) {
            let a: Vec<_> = d.iter().enumerate().map(|(i, _)| Complex::new(seed[2 * i], seed[2 * i + 1])).collect();
            let spec = ArrowheadSpec::new(d, a, corner).unwrap();
            let back: ArrowheadSpec<f64> = parse_spec(&format_spec(&spec)).unwrap();
            prop_assert_eq!(back, spec);
        }
    }
}
