//! Plain-text checkpoint of spectral coefficients.
//!
//! ```text
//! warptrap-checkpoint 1
//! m <m>
//! x0 <x0>
//! x_max <X_max>
//! n <interior nodes>
//! time <t>
//! l <l_1> <l_2> ...
//! mode <l> <multiplicity>
//! <Re pos_k> <Im pos_k> <Re vel_k> <Im vel_k>     (n rows, k = 0..n-1)
//! ...
//! ```
//! Coefficients are in the eigenbasis of the discrete P_l on the stated grid,
//! ordered by increasing eigenvalue. Numbers are written in shortest
//! round-trip form, so a write/read cycle is exact.

use std::io::{BufRead, Write};

use num_complex::Complex64;

use super::propagator::{Propagator, SpectralMode};
use crate::error::{Error, Result};
use crate::geometry::{AngularMode, WarpParams};
use crate::spectral::Grid;

const MAGIC: &str = "warptrap-checkpoint";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: WarpParams,
    pub grid: Grid,
    pub time: f64,
    pub modes: Vec<SpectralMode>,
}

pub fn write_checkpoint<W: Write>(out: &mut W, prop: &Propagator, modes: &[SpectralMode]) -> Result<()> {
    let grid = prop.grid();
    let params = prop.geometry().params;
    let time = modes.first().map_or(0.0, |m| m.time);
    if modes.iter().any(|m| m.time != time) {
        return Err(Error::Checkpoint("all modes must share one time".into()));
    }
    writeln!(out, "{MAGIC} {VERSION}")?;
    writeln!(out, "m {}", params.m)?;
    writeln!(out, "x0 {:e}", params.x0)?;
    writeln!(out, "x_max {:e}", grid.x_right)?;
    writeln!(out, "n {}", grid.n_interior)?;
    writeln!(out, "time {:e}", time)?;
    let ls: Vec<String> = modes.iter().map(|m| m.mode.l.to_string()).collect();
    writeln!(out, "l {}", ls.join(" "))?;
    for m in modes {
        if m.pos.len() != grid.n_interior || m.vel.len() != grid.n_interior {
            return Err(Error::Checkpoint(format!("mode l = {} has the wrong length", m.mode.l)));
        }
        writeln!(out, "mode {} {}", m.mode.l, m.mode.multiplicity)?;
        for (p, v) in m.pos.iter().zip(&m.vel) {
            writeln!(out, "{:e} {:e} {:e} {:e}", p.re, p.im, v.re, v.im)?;
        }
    }
    Ok(())
}

fn field<'a>(line: Option<&'a str>, key: &str) -> Result<&'a str> {
    let line = line.ok_or_else(|| Error::Checkpoint(format!("missing `{key}` line")))?;
    let mut parts = line.splitn(2, ' ');
    match (parts.next(), parts.next()) {
        (Some(k), Some(v)) if k == key => Ok(v.trim()),
        _ => Err(Error::Checkpoint(format!("expected `{key} ...`, found `{line}`"))),
    }
}

fn num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Checkpoint(format!("cannot parse {what} from `{s}`")))
}

pub fn read_checkpoint<R: BufRead>(input: R) -> Result<Checkpoint> {
    let lines: Vec<String> = input.lines().collect::<std::io::Result<_>>()?;
    let mut it = lines.iter().map(|s| s.as_str()).filter(|s| !s.trim().is_empty());
    let version: u32 = num(field(it.next(), MAGIC)?, "version")?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported checkpoint version {version}")));
    }
    let m: u32 = num(field(it.next(), "m")?, "m")?;
    let x0: f64 = num(field(it.next(), "x0")?, "x0")?;
    let x_max: f64 = num(field(it.next(), "x_max")?, "x_max")?;
    let n: usize = num(field(it.next(), "n")?, "n")?;
    let time: f64 = num(field(it.next(), "time")?, "time")?;
    let ls: Vec<usize> = field(it.next(), "l")?
        .split_whitespace()
        .map(|s| num(s, "l"))
        .collect::<Result<_>>()?;
    let params = WarpParams::new(m, x0)?;
    let grid = Grid::new(x0, x_max, n)?;
    let mut modes = Vec::with_capacity(ls.len());
    for &l in &ls {
        let header: Vec<usize> = field(it.next(), "mode")?
            .split_whitespace()
            .map(|s| num(s, "mode header"))
            .collect::<Result<_>>()?;
        if header.len() != 2 || header[0] != l {
            return Err(Error::Checkpoint(format!("mode header does not match l = {l}")));
        }
        let mut pos = Vec::with_capacity(n);
        let mut vel = Vec::with_capacity(n);
        for _ in 0..n {
            let row = it
                .next()
                .ok_or_else(|| Error::Checkpoint(format!("mode l = {l} is truncated")))?;
            let v: Vec<f64> = row
                .split_whitespace()
                .map(|s| num(s, "coefficient"))
                .collect::<Result<_>>()?;
            if v.len() != 4 {
                return Err(Error::Checkpoint(format!("expected 4 numbers per row, found `{row}`")));
            }
            pos.push(Complex64::new(v[0], v[1]));
            vel.push(Complex64::new(v[2], v[3]));
        }
        modes.push(SpectralMode {
            mode: AngularMode {
                multiplicity: header[1],
                ..AngularMode::new(l)
            },
            time,
            pos,
            vel,
        });
    }
    if let Some(extra) = it.next() {
        return Err(Error::Checkpoint(format!("unexpected trailing line `{extra}`")));
    }
    Ok(Checkpoint {
        params,
        grid,
        time,
        modes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::WarpGeometry;

    #[test]
    fn round_trip_is_exact() {
        let geom = WarpGeometry::new(WarpParams::new(2, -1.0).unwrap());
        let grid = Grid::new(-1.0, 2.0, 40).unwrap();
        let prop = Propagator::new(geom, grid).unwrap();
        let modes: Vec<SpectralMode> = [(3usize, 1usize), (5, 11)]
            .iter()
            .map(|&(l, mult)| SpectralMode {
                mode: AngularMode {
                    multiplicity: mult,
                    ..AngularMode::new(l)
                },
                time: 0.1 + 0.2,
                pos: (0..40)
                    .map(|k| Complex64::new(1.0 / (k as f64 + 3.0), -(k as f64).sqrt()))
                    .collect(),
                vel: (0..40)
                    .map(|k| Complex64::new((k as f64).sin() * 1e-300, 7e22))
                    .collect(),
            })
            .collect();
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &prop, &modes).unwrap();
        let back = read_checkpoint(&buf[..]).unwrap();
        assert_eq!(back.modes, modes);
        assert_eq!(back.grid, grid);
        assert_eq!(back.params, geom.params);

        let text = String::from_utf8(buf).unwrap();
        assert!(read_checkpoint(
            text.replace("warptrap-checkpoint 1", "warptrap-checkpoint 9")
                .as_bytes()
        )
        .is_err());
        let cut: String = text.lines().take(30).collect::<Vec<_>>().join("\n");
        assert!(matches!(read_checkpoint(cut.as_bytes()), Err(Error::Checkpoint(_))));
    }
}
