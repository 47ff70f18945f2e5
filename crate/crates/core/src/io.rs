//! Plain CSV export of states and densities.
//!
//! Numbers are written with 17 significant digits so that files round-trip
//! to the same `f64` values.

use std::io::Write;

use crate::error::Result;
use crate::real::Real;
use crate::quasi::{SignedDensity1D, SignedDensity2D};
use crate::state::WaveFunction;

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// `x,re_psi,im_psi`, one row per grid point.
pub fn write_state_csv<T: Real, W: Write>(psi: &WaveFunction<T>, out: &mut W) -> Result<()> {
    writeln!(out, "x,re_psi,im_psi")?;
    for (x, a) in psi.grid().points().zip(psi.amplitudes()) {
        writeln!(out, "{},{},{}", num(x.f64()), num(a.re.f64()), num(a.im.f64()))?;
    }
    Ok(())
}

/// `z,density`, one row per node.
pub fn write_density_csv<T: Real, W: Write>(d: &SignedDensity1D<T>, out: &mut W) -> Result<()> {
    writeln!(out, "z,density")?;
    for (z, v) in d.grid().points().zip(d.values()) {
        writeln!(out, "{},{}", num(z.f64()), num(v.f64()))?;
    }
    Ok(())
}

/// `x,p,density`, row-major: `p` varies fastest.
pub fn write_density2d_csv<T: Real, W: Write>(w: &SignedDensity2D<T>, out: &mut W) -> Result<()> {
    writeln!(out, "x,p,density")?;
    let ps: Vec<String> = w.p_grid().points().map(|p| num(p.f64())).collect();
    for (row, x) in w.values().rows().into_iter().zip(w.x_grid().points()) {
        let x = num(x.f64());
        for (p, v) in ps.iter().zip(row) {
            writeln!(out, "{x},{p},{}", num(v.f64()))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{fock_state, Grid1D};
    use crate::wigner::wigner;

    #[test]
    fn state_csv_round_trips() {
        let g = Grid1D::new(-10.0, 10.0, 128).unwrap();
        let psi = fock_state(&g, 1, 1.0).unwrap();
        let mut buf = Vec::new();
        write_state_csv(&psi, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,re_psi,im_psi"));
        for (line, a) in lines.zip(psi.amplitudes()) {
            let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
            assert_eq!(cols[1], a.re);
            assert_eq!(cols[2], a.im);
        }
    }

    #[test]
    fn density2d_has_one_row_per_cell() {
        let g = Grid1D::new(-8.0, 8.0, 32).unwrap();
        let w = wigner(&fock_state(&g, 0, 1.0).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_density2d_csv(&w, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 32 * 32 + 1);
    }
}
