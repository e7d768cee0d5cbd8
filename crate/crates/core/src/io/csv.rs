//! Plain CSV export of a state, for plotting.

use std::io::{self, Write};

use crate::grid::FieldSet;

pub const CSV_HEADER: &str = "x,y,z,h,u,v,eta";

/// Writes one row per cell in row-major order with cell-centre coordinates
/// and 17 significant digits. Returns the number of data rows.
pub fn export_csv(fs: &FieldSet, dest: &mut impl Write) -> io::Result<usize> {
    let mut w = io::BufWriter::new(dest);
    writeln!(w, "{CSV_HEADER}")?;
    let (nx, ny) = (fs.spec.nx, fs.spec.ny);
    for j in 0..ny {
        for i in 0..nx {
            let k = j * nx + i;
            let x = (i as f64 + 0.5) * fs.spec.dx;
            let y = (j as f64 + 0.5) * fs.spec.dy;
            let h = fs.h[k];
            let (u, v) = (fs.qx[k] / h, fs.qy[k] / h);
            let eta = fs.z[k] + h;
            writeln!(w, "{x:.16e},{y:.16e},{:.16e},{h:.16e},{u:.16e},{v:.16e},{eta:.16e}", fs.z[k])?;
        }
    }
    w.flush()?;
    Ok(nx * ny)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn two_by_two_has_four_rows() {
        let fs = FieldSet::still_water(GridSpec { nx: 2, ny: 2, dx: 1.0, dy: 1.0 }, 1.0);
        let mut out = Vec::new();
        assert_eq!(export_csv(&fs, &mut out).unwrap(), 4);
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], CSV_HEADER);
    }

    #[test]
    fn still_water_has_zero_velocities_and_h_round_trips() {
        let spec = GridSpec::new(4, 3, 0.5, 2.0).unwrap();
        let mut fs = FieldSet::still_water(spec, 1.0);
        for (k, h) in fs.h.iter_mut().enumerate() {
            *h = 1.0 / (k as f64 + 3.0);
        }
        let mut out = Vec::new();
        export_csv(&fs, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        for (k, line) in text.lines().skip(1).enumerate() {
            let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
            assert_eq!(cols.len(), 7);
            assert_eq!(cols[3], fs.h[k]);
            assert_eq!((cols[4], cols[5]), (0.0, 0.0));
        }
    }
}
