//! Seeded compressed-sensing LASSO instances with partial DCT measurements.
//!
//! A `k`-sparse signal with random signs and magnitudes `10^(d u / 20)`,
//! `u ~ U[0, 1]`, is measured through `m` distinct rows of the orthonormal
//! DCT and corrupted by i.i.d. Gaussian noise.
//!
//! # Sidecar format
//!
//! [`write_instance`] emits a line-oriented text file:
//!
//! ```text
//! # tmap synthetic lasso instance v1
//! n,<signal length>
//! m,<measurements>
//! k,<nonzeros>
//! dynamic_range_db,<d>
//! noise_sigma,<sigma>
//! seed,<u64>
//! row,<0-based DCT row>        (m lines, ascending)
//! b,<measurement>              (m lines, in row order)
//! x_true,<0-based index>,<value>   (one line per nonzero, ascending index)
//! ```
//!
//! Floats are written in shortest round-trip form, so reading a sidecar back
//! reproduces the instance bit for bit.

use std::io::{BufRead, Write};

use rand::seq::index::sample;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{LinearOperator, PartialDctOperator};
use crate::error::{Result, TmapError};

const SIDECAR_HEADER: &str = "# tmap synthetic lasso instance v1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticLassoParams {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub dynamic_range_db: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for SyntheticLassoParams {
    fn default() -> Self {
        Self {
            n: 1024,
            m: 256,
            k: 25,
            dynamic_range_db: 20.0,
            noise_sigma: 0.1,
            seed: 0,
        }
    }
}

impl SyntheticLassoParams {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(TmapError::Parameter("n must be positive".into()));
        }
        if self.k > self.n {
            return Err(TmapError::Parameter(format!(
                "k = {} exceeds n = {}",
                self.k, self.n
            )));
        }
        if self.m > self.n {
            return Err(TmapError::Parameter(format!(
                "m = {} exceeds n = {}",
                self.m, self.n
            )));
        }
        if !self.dynamic_range_db.is_finite() || self.dynamic_range_db < 0.0 {
            return Err(TmapError::Parameter("dynamic range must be >= 0".into()));
        }
        if !self.noise_sigma.is_finite() || self.noise_sigma < 0.0 {
            return Err(TmapError::Parameter("noise sigma must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticLasso {
    pub params: SyntheticLassoParams,
    pub operator: PartialDctOperator,
    pub b: Vec<f64>,
    pub x_true: Vec<f64>,
}

pub fn generate_lasso_instance(params: &SyntheticLassoParams) -> Result<SyntheticLasso> {
    params.validate()?;
    let SyntheticLassoParams {
        n,
        m,
        k,
        dynamic_range_db,
        noise_sigma,
        seed,
    } = *params;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut support = sample(&mut rng, n, k).into_vec();
    support.sort_unstable();
    let mut x_true = vec![0.0; n];
    for &i in &support {
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let u: f64 = rng.random();
        x_true[i] = sign * 10f64.powf(dynamic_range_db * u / 20.0);
    }

    let mut rows = sample(&mut rng, n, m).into_vec();
    rows.sort_unstable();
    let operator = PartialDctOperator::new(n, rows)?;

    let mut b = vec![0.0; m];
    operator.apply(&x_true, &mut b);
    if noise_sigma > 0.0 {
        let noise = Normal::new(0.0, noise_sigma)
            .map_err(|e| TmapError::Parameter(format!("noise distribution: {e}")))?;
        for bi in &mut b {
            *bi += noise.sample(&mut rng);
        }
    }
    Ok(SyntheticLasso {
        params: *params,
        operator,
        b,
        x_true,
    })
}

pub fn write_instance<W: Write>(inst: &SyntheticLasso, mut w: W) -> Result<()> {
    let p = &inst.params;
    writeln!(w, "{SIDECAR_HEADER}")?;
    writeln!(w, "n,{}", p.n)?;
    writeln!(w, "m,{}", p.m)?;
    writeln!(w, "k,{}", p.k)?;
    writeln!(w, "dynamic_range_db,{}", p.dynamic_range_db)?;
    writeln!(w, "noise_sigma,{}", p.noise_sigma)?;
    writeln!(w, "seed,{}", p.seed)?;
    for j in inst.operator.row_indices() {
        writeln!(w, "row,{j}")?;
    }
    for v in &inst.b {
        writeln!(w, "b,{v:?}")?;
    }
    for (i, v) in inst.x_true.iter().enumerate().filter(|(_, v)| **v != 0.0) {
        writeln!(w, "x_true,{i},{v:?}")?;
    }
    Ok(())
}

pub fn read_instance<R: BufRead>(r: R) -> Result<SyntheticLasso> {
    fn num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
        s.trim().parse().map_err(|_| TmapError::Parse {
            line,
            message: format!("invalid number '{s}'"),
        })
    }

    let mut params = SyntheticLassoParams::default();
    let mut rows = Vec::new();
    let mut b = Vec::new();
    let mut nonzeros = Vec::new();
    let mut header_seen = false;
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        if line.starts_with('#') {
            header_seen |= line.trim() == SIDECAR_HEADER;
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        match (fields[0], fields.len()) {
            ("n", 2) => params.n = num(fields[1], lineno)?,
            ("m", 2) => params.m = num(fields[1], lineno)?,
            ("k", 2) => params.k = num(fields[1], lineno)?,
            ("dynamic_range_db", 2) => params.dynamic_range_db = num(fields[1], lineno)?,
            ("noise_sigma", 2) => params.noise_sigma = num(fields[1], lineno)?,
            ("seed", 2) => params.seed = num(fields[1], lineno)?,
            ("row", 2) => rows.push(num::<usize>(fields[1], lineno)?),
            ("b", 2) => b.push(num::<f64>(fields[1], lineno)?),
            ("x_true", 3) => nonzeros.push((
                num::<usize>(fields[1], lineno)?,
                num::<f64>(fields[2], lineno)?,
            )),
            _ => {
                return Err(TmapError::Parse {
                    line: lineno,
                    message: format!("unrecognized record '{line}'"),
                })
            }
        }
    }
    if !header_seen {
        return Err(TmapError::Parse {
            line: 1,
            message: "missing instance header".into(),
        });
    }
    params.validate()?;
    if rows.len() != params.m || b.len() != params.m {
        return Err(TmapError::Data(format!(
            "expected {} rows and measurements, found {} and {}",
            params.m,
            rows.len(),
            b.len()
        )));
    }
    let mut x_true = vec![0.0; params.n];
    for (i, v) in nonzeros {
        if i >= params.n {
            return Err(TmapError::Data(format!("x_true index {i} out of range")));
        }
        x_true[i] = v;
    }
    let operator = PartialDctOperator::new(params.n, rows)?;
    Ok(SyntheticLasso {
        params,
        operator,
        b,
        x_true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(k: usize, d: f64) -> SyntheticLassoParams {
        SyntheticLassoParams {
            n: 256,
            m: 64,
            k,
            dynamic_range_db: d,
            noise_sigma: 0.1,
            seed: 42,
        }
    }

    #[test]
    fn support_and_magnitudes() {
        let inst = generate_lasso_instance(&params(10, 40.0)).unwrap();
        let nz: Vec<f64> = inst.x_true.iter().copied().filter(|v| *v != 0.0).collect();
        assert_eq!(nz.len(), 10);
        assert!(nz.iter().all(|v| v.abs() >= 1.0 && v.abs() <= 100.0));
        assert_eq!(inst.operator.row_indices().len(), 64);
        assert_eq!(inst.b.len(), 64);
    }

    #[test]
    fn zero_dynamic_range_gives_unit_magnitudes() {
        let inst = generate_lasso_instance(&params(12, 0.0)).unwrap();
        assert!(inst
            .x_true
            .iter()
            .filter(|v| **v != 0.0)
            .all(|v| v.abs() == 1.0));
    }

    #[test]
    fn empty_support_is_pure_noise() {
        let mut p = params(0, 20.0);
        let inst = generate_lasso_instance(&p).unwrap();
        assert!(inst.x_true.iter().all(|v| *v == 0.0));
        assert!(inst.b.iter().any(|v| *v != 0.0));
        p.noise_sigma = 0.0;
        let inst = generate_lasso_instance(&p).unwrap();
        assert!(inst.b.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate_lasso_instance(&params(10, 20.0)).unwrap();
        let b = generate_lasso_instance(&params(10, 20.0)).unwrap();
        assert_eq!(a, b);
        let mut other = params(10, 20.0);
        other.seed = 43;
        assert_ne!(a.b, generate_lasso_instance(&other).unwrap().b);
    }

    #[test]
    fn parameter_errors() {
        let mut p = params(300, 20.0);
        assert!(generate_lasso_instance(&p).is_err());
        p.k = 1;
        p.m = 257;
        assert!(generate_lasso_instance(&p).is_err());
    }

    #[test]
    fn large_scale_parameters_validate() {
        let n = 512 * 512;
        let p = SyntheticLassoParams {
            n,
            m: n / 8,
            k: n / 40,
            ..Default::default()
        };
        assert_eq!((p.n, p.k, p.m), (262_144, 6553, 32_768));
        p.validate().unwrap();
    }

    #[test]
    fn sidecar_round_trip() {
        let inst = generate_lasso_instance(&params(10, 60.0)).unwrap();
        let mut buf = Vec::new();
        write_instance(&inst, &mut buf).unwrap();
        let back = read_instance(buf.as_slice()).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn sidecar_rejects_garbage() {
        assert!(read_instance("n,4\n".as_bytes()).is_err());
        let text = format!("{SIDECAR_HEADER}\nn,4\nfoo,1\n");
        assert!(matches!(
            read_instance(text.as_bytes()),
            Err(TmapError::Parse { line: 3, .. })
        ));
    }
}
