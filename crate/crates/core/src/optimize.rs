//! Derivative-free minimizers: golden-section search on an interval and
//! Nelder-Mead on a small number of dimensions.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Minimum of a 1-D function found by [`golden_section`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Minimum1d {
    pub x: f64,
    pub value: f64,
}

/// Golden-section search for a minimum of a unimodal `f` on `[a, b]`.
/// Stops when the bracket is narrower than `tol`.
pub fn golden_section<F>(mut f: F, a: f64, b: f64, tol: f64) -> Minimum1d
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = if a <= b { (a, b) } else { (b, a) };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    // bracket shrinks by 1/phi per step; 200 steps is far past f64 resolution
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        Minimum1d { x: c, value: fc }
    } else {
        Minimum1d { x: d, value: fd }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct NelderMeadOptions {
    pub max_iter: usize,
    /// Converged when the spread of simplex values drops below this.
    pub f_tol: f64,
    /// ... and the simplex diameter drops below this.
    pub x_tol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_iter: 4000,
            f_tol: 1e-13,
            x_tol: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

/// Nelder-Mead simplex minimization with the standard coefficients
/// (reflection 1, expansion 2, contraction ½, shrink ½).
///
/// `step` gives the initial simplex edge along each coordinate.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], step: &[f64], opts: NelderMeadOptions) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    if n == 0 || step.len() != n {
        return Err(Error::NonConvergence(
            "Nelder-Mead needs a non-empty start point and one step per coordinate".into(),
        ));
    }
    let mut simplex: Vec<Vec<f64>> = std::iter::once(x0.to_vec())
        .chain((0..n).map(|i| {
            let mut v = x0.to_vec();
            v[i] += step[i];
            v
        }))
        .collect();
    let mut values: Vec<f64> = simplex.iter().map(|x| f(x)).collect();

    for iter in 0..opts.max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = values[n] - values[0];
        let diameter = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread.abs() <= opts.f_tol && diameter <= opts.x_tol {
            return Ok(Minimum {
                x: simplex.swap_remove(0),
                value: values[0],
                iterations: iter,
            });
        }

        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|v| v[k]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(1.0);
        let fr = f(&xr);
        if fr < values[0] {
            let xe = along(2.0);
            let fe = f(&xe);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
        } else {
            let (xc, fc) = if fr < values[n] {
                let xc = along(0.5);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = along(-0.5);
                let fc = f(&xc);
                (xc, fc)
            };
            if fc < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fc;
            } else {
                let best = simplex[0].clone();
                for i in 1..=n {
                    for (v, b) in simplex[i].iter_mut().zip(&best) {
                        *v = b + 0.5 * (*v - b);
                    }
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }

    let (best, value) = simplex
        .into_iter()
        .zip(values)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("simplex is non-empty");
    if value.is_finite() {
        Ok(Minimum {
            x: best,
            value,
            iterations: opts.max_iter,
        })
    } else {
        Err(Error::NonConvergence(format!(
            "Nelder-Mead reached {} iterations without a finite value",
            opts.max_iter
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_section_parabola() {
        let m = golden_section(|x| (x - 1.234).powi(2) + 3.0, -10.0, 10.0, 1e-10);
        assert!((m.x - 1.234).abs() < 1e-7);
        assert!((m.value - 3.0).abs() < 1e-14);
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = nelder_mead(rosen, &[-1.2, 1.0], &[0.1, 0.1], NelderMeadOptions::default()).unwrap();
        assert!((m.x[0] - 1.0).abs() < 1e-5, "{:?}", m);
        assert!((m.x[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn nelder_mead_rejects_bad_shapes() {
        assert!(nelder_mead(|_| 0.0, &[], &[], NelderMeadOptions::default()).is_err());
        assert!(nelder_mead(|_| 0.0, &[1.0], &[1.0, 2.0], NelderMeadOptions::default()).is_err());
    }
}
