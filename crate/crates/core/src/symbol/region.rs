//! Phase-space masks of the positive-bracket region and its symbol image.

use std::collections::VecDeque;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{poisson_bracket, principal_symbol, CoefficientField, PhasePoint};
use crate::error::{Error, Result};

/// Bracket values and membership on a rectangular `(u, xi)` grid. Row `i` is `u_grid[i]`,
/// column `j` is `xi_grid[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMask {
    pub u_grid: Vec<f64>,
    pub xi_grid: Vec<f64>,
    pub bracket: Vec<Vec<f64>>,
    pub in_omega: Vec<Vec<bool>>,
    pub sigma: Vec<Vec<Complex64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImagePoint {
    pub u: f64,
    pub xi: f64,
    pub sigma: Complex64,
}

fn check_grid(name: &str, g: &[f64]) -> Result<()> {
    if g.is_empty() {
        return Err(Error::Precondition(format!("{name} grid is empty")));
    }
    if g.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Precondition(format!("{name} grid is not strictly increasing")));
    }
    Ok(())
}

pub fn region_mask(cf: &CoefficientField, u_grid: &[f64], xi_grid: &[f64]) -> Result<RegionMask> {
    check_grid("u", u_grid)?;
    check_grid("xi", xi_grid)?;
    for &u in u_grid {
        cf.check(u)?;
    }
    let rows: Vec<Result<(Vec<f64>, Vec<Complex64>)>> = u_grid
        .par_iter()
        .map(|&u| {
            let mut br = Vec::with_capacity(xi_grid.len());
            let mut sg = Vec::with_capacity(xi_grid.len());
            for &xi in xi_grid {
                let p = PhasePoint::new(u, xi);
                br.push(poisson_bracket(cf, p)?);
                sg.push(principal_symbol(cf, p)?);
            }
            Ok((br, sg))
        })
        .collect();
    let mut bracket = Vec::with_capacity(u_grid.len());
    let mut sigma = Vec::with_capacity(u_grid.len());
    for r in rows {
        let (b, s) = r?;
        bracket.push(b);
        sigma.push(s);
    }
    let in_omega = bracket
        .iter()
        .map(|row: &Vec<f64>| row.iter().map(|&b| b > 0.0).collect())
        .collect();
    Ok(RegionMask {
        u_grid: u_grid.to_vec(),
        xi_grid: xi_grid.to_vec(),
        bracket,
        in_omega,
        sigma,
    })
}

impl RegionMask {
    pub fn count_in_omega(&self) -> usize {
        self.in_omega.iter().flatten().filter(|&&b| b).count()
    }

    /// Writes one row per grid point: `u, xi, bracket, in_omega, re_sigma, im_sigma`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["u", "xi", "bracket", "in_omega", "re_sigma", "im_sigma"])?;
        for (i, &u) in self.u_grid.iter().enumerate() {
            for (j, &xi) in self.xi_grid.iter().enumerate() {
                let s = self.sigma[i][j];
                w.write_record([
                    u.to_string(),
                    xi.to_string(),
                    self.bracket[i][j].to_string(),
                    (self.in_omega[i][j] as u8).to_string(),
                    s.re.to_string(),
                    s.im.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Every in-region grid point paired with its symbol value, in row-major order.
pub fn symbol_image(mask: &RegionMask, cf: &CoefficientField) -> Result<Vec<ImagePoint>> {
    let mut out = Vec::new();
    for (i, &u) in mask.u_grid.iter().enumerate() {
        for (j, &xi) in mask.xi_grid.iter().enumerate() {
            if mask.in_omega[i][j] {
                let sigma = principal_symbol(cf, PhasePoint::new(u, xi))?;
                out.push(ImagePoint { u, xi, sigma });
            }
        }
    }
    Ok(out)
}

/// Number of 8-connected clusters of in-region grid points whose symbol value lies
/// within `tol` of `z`.
pub fn multiplicity(cf: &CoefficientField, z: Complex64, mask: &RegionMask, tol: f64) -> Result<usize> {
    if !(tol > 0.0) {
        return Err(Error::Precondition(format!("tolerance must be positive, got {tol}")));
    }
    let (nu, nx) = (mask.u_grid.len(), mask.xi_grid.len());
    let mut hit = vec![vec![false; nx]; nu];
    for i in 0..nu {
        for j in 0..nx {
            if mask.in_omega[i][j] {
                let s = principal_symbol(cf, PhasePoint::new(mask.u_grid[i], mask.xi_grid[j]))?;
                hit[i][j] = (s - z).norm() < tol;
            }
        }
    }
    let mut seen = vec![vec![false; nx]; nu];
    let mut clusters = 0;
    let mut queue = VecDeque::new();
    for i in 0..nu {
        for j in 0..nx {
            if !hit[i][j] || seen[i][j] {
                continue;
            }
            clusters += 1;
            seen[i][j] = true;
            queue.push_back((i, j));
            while let Some((a, b)) = queue.pop_front() {
                for da in -1i64..=1 {
                    for db in -1i64..=1 {
                        let (x, y) = (a as i64 + da, b as i64 + db);
                        if x < 0 || y < 0 || x >= nu as i64 || y >= nx as i64 {
                            continue;
                        }
                        let (x, y) = (x as usize, y as usize);
                        if hit[x][y] && !seen[x][y] {
                            seen[x][y] = true;
                            queue.push_back((x, y));
                        }
                    }
                }
            }
        }
    }
    Ok(clusters)
}
