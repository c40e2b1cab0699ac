//! Text grammars for geometries, symbols, densities and boundary data.

use std::f64::consts::PI;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use dixtrace::boundary::AlphaModel;
use dixtrace::symbol::{parse_complex, SymbolTable, TableKind};
use dixtrace::{Geometry, SymbolSpec};
use num_complex::Complex64;

pub fn geometry(spec: &str, dim: Option<u32>, laplacian_order: f64) -> Result<Geometry> {
    let (head, arg) = spec.split_once(':').unwrap_or((spec, ""));
    let int_arg = |default: u32| -> Result<u32> {
        if arg.is_empty() {
            Ok(default)
        } else {
            arg.parse().with_context(|| format!("geometry `{spec}`: bad dimension `{arg}`"))
        }
    };
    Ok(match head {
        "torus" => Geometry::torus(int_arg(1)?)?,
        "su2" => Geometry::su2(),
        "so3" => Geometry::so3(),
        "su3" => Geometry::su3(),
        "sphere" => Geometry::sphere(int_arg(2)?)?,
        "file" => {
            let dim = dim.ok_or_else(|| anyhow!("geometry `{spec}` needs --dim"))?;
            Geometry::from_file(Path::new(arg), dim, laplacian_order)?
        }
        _ => bail!("unknown geometry `{spec}` (expected torus:N, su2, so3, su3, sphere:N or file:PATH)"),
    })
}

/// Splits on `+` except in exponents such as `1e+3`.
fn split_terms(s: &str) -> Vec<&str> {
    let bytes = s.as_bytes();
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..bytes.len() {
        if bytes[i] == b'+' && !matches!(bytes[i - 1], b'e' | b'E' | b'*' | b':') {
            out.push(&s[start..i]);
            start = i + 1;
        }
    }
    out.push(&s[start..]);
    out
}

fn number(s: &str, what: &str) -> Result<f64> {
    s.trim().parse::<f64>().with_context(|| format!("{what}: `{s}` is not a number"))
}

fn scaled(term: &str) -> Result<(f64, &str)> {
    match term.split_once('*') {
        Some((c, rest)) => Ok((number(c, "scale factor")?, rest)),
        None => Ok((1.0, term)),
    }
}

/// `nu` is the Laplacian order used when a term omits it.
pub fn symbol(spec: &str, nu: f64) -> Result<SymbolSpec> {
    let (body, mask) = match spec.strip_suffix("@mask") {
        Some(b) => (b, true),
        None => (spec, false),
    };
    let mut terms = split_terms(body)
        .into_iter()
        .map(|t| symbol_term(t.trim(), nu).with_context(|| format!("in symbol `{spec}`")))
        .collect::<Result<Vec<_>>>()?;
    let s = if terms.len() == 1 { terms.pop().unwrap() } else { SymbolSpec::sum(terms) };
    Ok(if mask { s.with_mask() } else { s })
}

fn symbol_term(term: &str, nu: f64) -> Result<SymbolSpec> {
    let (c, atom) = scaled(term)?;
    let mut parts = atom.splitn(3, ':');
    let kind = parts.next().unwrap_or_default();
    let rest: Vec<&str> = parts.collect();
    let arg = |i: usize, default: Option<f64>| -> Result<f64> {
        match (rest.get(i), default) {
            (Some(v), _) => number(v, kind),
            (None, Some(d)) => Ok(d),
            (None, None) => bail!("`{atom}` is missing a parameter"),
        }
    };
    let s = match kind {
        "radial" => SymbolSpec::radial(arg(0, None)?),
        "bessel" => SymbolSpec::bessel(arg(0, None)?, arg(1, Some(nu))?),
        "power" => SymbolSpec::power(arg(0, None)?, arg(1, Some(1.0))?),
        "shifted" => SymbolSpec::shifted_root(arg(0, None)?, arg(1, Some(1.0))?, nu),
        "const" => SymbolSpec::constant(arg(0, None)?),
        "table-diag" | "table-full" => {
            let path = atom.split_once(':').map(|x| x.1).unwrap_or_default();
            let kind = if kind == "table-diag" { TableKind::Diagonal } else { TableKind::Full };
            SymbolSpec::table(SymbolTable::read(Path::new(path), kind).with_context(|| format!("reading symbol table `{path}`"))?)
        }
        _ => bail!("unknown symbol term `{atom}`"),
    };
    Ok(if c == 1.0 { s } else { s.scaled(c) })
}

#[derive(Clone, Debug, PartialEq)]
enum Mode {
    Const,
    Cos,
    Sin,
    Cos2,
    Sin2,
}

/// Trigonometric density on the unit torus.
#[derive(Clone, Debug, PartialEq)]
pub struct Density {
    terms: Vec<(f64, Mode, Vec<f64>)>,
}

impl Density {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, mode, k)| {
                let phase = 2.0 * PI * k.iter().zip(x).map(|(k, x)| k * x).sum::<f64>();
                c * match mode {
                    Mode::Const => 1.0,
                    Mode::Cos => phase.cos(),
                    Mode::Sin => phase.sin(),
                    Mode::Cos2 => phase.cos().powi(2),
                    Mode::Sin2 => phase.sin().powi(2),
                }
            })
            .sum()
    }
}

/// Terms `c`, `cos:K`, `sin:K`, `cos2:K`, `sin2:K` with `K = k1,k2,…`,
/// each optionally scaled by `c*`.
pub fn density(spec: &str, dims: usize) -> Result<Density> {
    let terms = split_terms(spec)
        .into_iter()
        .map(|t| {
            let (c, atom) = scaled(t.trim())?;
            let Some((kind, ks)) = atom.split_once(':') else {
                return Ok((c * number(atom, "density constant")?, Mode::Const, vec![]));
            };
            let mode = match kind {
                "cos" => Mode::Cos,
                "sin" => Mode::Sin,
                "cos2" => Mode::Cos2,
                "sin2" => Mode::Sin2,
                _ => bail!("unknown density term `{atom}`"),
            };
            let k = ks.split(',').map(|v| number(v, "frequency")).collect::<Result<Vec<_>>>()?;
            if k.len() > dims {
                bail!("density term `{atom}` has {} frequencies for a {dims}-torus", k.len());
            }
            Ok((c, mode, k))
        })
        .collect::<Result<_>>()
        .with_context(|| format!("in density `{spec}`"))?;
    Ok(Density { terms })
}

pub fn complex(s: &str) -> Result<Complex64> {
    parse_complex(s).ok_or_else(|| anyhow!("`{s}` is not a complex number"))
}

pub fn alpha(spec: &str) -> Result<AlphaModel> {
    let mut parts = spec.splitn(3, ':');
    match (parts.next(), parts.next(), parts.next()) {
        (Some("zero"), None, None) => Ok(AlphaModel::Zero),
        (Some("power"), Some(c), Some(eps)) => Ok(AlphaModel::PowerDecay {
            c: number(c, "alpha c")?,
            eps: number(eps, "alpha eps")?,
        }),
        (Some("table"), Some(_), _) => {
            let path = &spec["table:".len()..];
            Ok(AlphaModel::read_table(Path::new(path)).with_context(|| format!("reading alpha table `{path}`"))?)
        }
        _ => bail!("unknown alpha model `{spec}` (expected zero, power:C:EPS or table:PATH)"),
    }
}

/// Boundary symbol as a function of the eigenvalue.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Sigma {
    Inverse,
    Eigenvalue,
    Const(f64),
    AbsPower(f64),
}

impl Sigma {
    pub fn eval(self, lambda: Complex64) -> Complex64 {
        match self {
            Sigma::Inverse => lambda.inv(),
            Sigma::Eigenvalue => lambda,
            Sigma::Const(c) => Complex64::new(c, 0.0),
            Sigma::AbsPower(s) => Complex64::new(lambda.norm().powf(-s), 0.0),
        }
    }
}

pub fn sigma(spec: &str) -> Result<Sigma> {
    Ok(match spec.split_once(':') {
        None if spec == "inverse" => Sigma::Inverse,
        None if spec == "eigenvalue" => Sigma::Eigenvalue,
        Some(("const", c)) => Sigma::Const(number(c, "sigma")?),
        Some(("abs-power", s)) => Sigma::AbsPower(number(s, "sigma")?),
        _ => bail!("unknown boundary symbol `{spec}` (expected inverse, eigenvalue, const:C or abs-power:S)"),
    })
}

pub fn real_list(spec: &str) -> Result<Vec<f64>> {
    spec.split(',').map(|v| number(v, "list entry")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use dixtrace::symbol::SymbolVariant;

    #[test]
    fn symbol_grammar() {
        let s = symbol("2*bessel:3:2+radial:1", 2.0).unwrap();
        assert_eq!(s.to_string(), "2*(bessel:3:2)+radial:1");
        assert_eq!(symbol("bessel:3", 2.0).unwrap(), SymbolSpec::bessel(3.0, 2.0));
        assert_eq!(symbol("const:1e+0", 2.0).unwrap(), SymbolSpec::constant(1.0));
        assert!(symbol("radial:1@mask", 2.0).unwrap().homogeneous_mask);
        assert!(matches!(
            symbol("shifted:0.5", 2.0).unwrap().variant,
            SymbolVariant::ShiftedRoot { s, shift, order } if s == 0.5 && shift == 1.0 && order == 2.0
        ));
        assert!(symbol("bogus:1", 2.0).is_err());
        assert!(symbol("radial", 2.0).is_err());
        assert!(symbol("table-full:/nonexistent/table", 2.0).is_err());
    }

    #[test]
    fn density_grammar() {
        let d = density("2+0.5*cos:1,0+sin2:0,1", 2).unwrap();
        assert!((d.eval(&[0.0, 0.25]) - 3.5).abs() < 1e-15);
        assert!(density("cos:1,1,1", 2).is_err());
        assert!(density("tan:1", 1).is_err());
    }

    #[test]
    fn boundary_grammars() {
        assert_eq!(alpha("zero").unwrap(), AlphaModel::Zero);
        assert_eq!(alpha("power:1:0.5").unwrap(), AlphaModel::PowerDecay { c: 1.0, eps: 0.5 });
        assert!(alpha("power:1").is_err());
        assert_eq!(sigma("abs-power:2").unwrap(), Sigma::AbsPower(2.0));
        assert_eq!(complex("-1+2i").unwrap(), Complex64::new(-1.0, 2.0));
        assert_eq!(real_list("0,0.5,2").unwrap(), vec![0.0, 0.5, 2.0]);
    }

    #[test]
    fn geometry_grammar() {
        assert_eq!(geometry("torus:3", None, 2.0).unwrap().dim(), 3);
        assert_eq!(geometry("torus", None, 2.0).unwrap().dim(), 1);
        assert_eq!(geometry("su3", None, 2.0).unwrap().dim(), 8);
        assert!(geometry("file:x", None, 2.0).is_err());
        assert!(geometry("klein", None, 2.0).is_err());
    }
}
