use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use super::{Complex, GridSpec, SpectralField};
use crate::error::{Error, Result};

/// A field stamped with its time and capillarity, as written to disk.
///
/// The text form is
/// `{"grid":{"K":..,"N":..},"nu":..,"t":..,"modes":[[n,re,im],...]}` with
/// one entry per `n = 1..=K` and every real printed with 17 significant
/// digits, which round-trips `f64` exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub nu: f64,
    pub t: f64,
    pub field: SpectralField,
}

#[derive(Deserialize)]
struct RawGrid {
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "N")]
    n: usize,
}

#[derive(Deserialize)]
struct RawSnapshot {
    grid: RawGrid,
    nu: f64,
    t: f64,
    modes: Vec<(i64, f64, f64)>,
}

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

impl Snapshot {
    pub fn to_json(&self) -> String {
        let g = self.field.grid();
        let mut s = String::new();
        write!(
            s,
            "{{\"grid\":{{\"K\":{},\"N\":{}}},\"nu\":{},\"t\":{},\"modes\":[",
            g.band_limit(),
            g.phys_points(),
            fmt_f64(self.nu),
            fmt_f64(self.t)
        )
        .unwrap();
        for n in 1..=g.band_limit() {
            let c = self.field.coeff(n as i64);
            if n > 1 {
                s.push(',');
            }
            write!(s, "[{},{},{}]", n, fmt_f64(c.re), fmt_f64(c.im)).unwrap();
        }
        s.push_str("]}\n");
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawSnapshot =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("snapshot: {e}")))?;
        let grid = GridSpec::with_points(raw.grid.k, raw.grid.n)?;
        let mut field = SpectralField::zeros(grid);
        for (n, re, im) in raw.modes {
            if n < 1 || n as usize > grid.band_limit() {
                return Err(Error::Parse(format!(
                    "snapshot mode {n} outside 1..={}",
                    grid.band_limit()
                )));
            }
            field.set_coeff(n as usize, Complex::new(re, im))?;
        }
        Ok(Snapshot {
            nu: raw.nu,
            t: raw.t,
            field,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
