//! Derivative-free simplex minimization.

#[derive(Clone, Debug)]
pub struct NelderMeadOptions {
    /// Edge length of the initial axis-aligned simplex.
    pub initial_step: f64,
    pub max_evaluations: usize,
    /// Stop when the spread of simplex values falls below this.
    pub f_tolerance: f64,
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            initial_step: 0.25,
            max_evaluations: 400,
            f_tolerance: 1e-8,
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
        }
    }
}

#[derive(Clone, Debug)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimizes `f` from `start`. The returned value never exceeds `f(start)`.
pub fn nelder_mead<F>(mut f: F, start: &[f64], opts: &NelderMeadOptions) -> NelderMeadResult
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = start.len();
    let mut evaluations = 0;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        f(x)
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let f0 = eval(start, &mut evaluations);
    simplex.push((start.to_vec(), f0));
    for i in 0..dim {
        let mut x = start.to_vec();
        x[i] += opts.initial_step;
        let fx = eval(&x, &mut evaluations);
        simplex.push((x, fx));
    }

    let mut converged = false;
    while evaluations < opts.max_evaluations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (simplex[0].1, simplex[dim].1);
        if (worst - best).abs() <= opts.f_tolerance {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|(x, _)| x[j]).sum::<f64>() / dim as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[dim].0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(opts.reflection);
        let fr = eval(&xr, &mut evaluations);
        if fr < best {
            let xe = along(opts.reflection * opts.expansion);
            let fe = eval(&xe, &mut evaluations);
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
            continue;
        }
        // Outside contraction if the reflection beat the worst point, inside otherwise.
        let (xc, fc) = if fr < worst {
            let xc = along(opts.reflection * opts.contraction);
            let fc = eval(&xc, &mut evaluations);
            (xc, fc)
        } else {
            let xc = along(-opts.contraction);
            let fc = eval(&xc, &mut evaluations);
            (xc, fc)
        };
        if fc < worst.min(fr) {
            simplex[dim] = (xc, fc);
            continue;
        }
        let anchor = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = anchor
                .iter()
                .zip(&vertex.0)
                .map(|(a, v)| a + opts.shrink * (v - a))
                .collect();
            let fx = eval(&x, &mut evaluations);
            *vertex = (x, fx);
        }
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, f) = simplex.swap_remove(0);
    NelderMeadResult { x, f, evaluations, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_rosenbrock() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let opts = NelderMeadOptions { max_evaluations: 5000, f_tolerance: 1e-14, ..Default::default() };
        let r = nelder_mead(rosen, &[-1.2, 1.0], &opts);
        assert!((r.x[0] - 1.0).abs() < 1e-3 && (r.x[1] - 1.0).abs() < 1e-3, "{:?}", r.x);
    }

    #[test]
    fn never_worse_than_start() {
        let bumpy = |x: &[f64]| (3.0 * x[0]).sin() * (2.0 * x[1]).cos() + 0.1 * x[2] * x[2];
        let start = [0.4, -0.2, 0.7];
        let r = nelder_mead(bumpy, &start, &NelderMeadOptions { max_evaluations: 60, ..Default::default() });
        assert!(r.f <= bumpy(&start));
        assert!(r.evaluations <= 60 + 4);
    }

    #[test]
    fn quadratic_bowl_converges() {
        let bowl = |x: &[f64]| x.iter().enumerate().map(|(i, v)| (i as f64 + 1.0) * (v - 0.5).powi(2)).sum();
        let r = nelder_mead(bowl, &[0.0; 4], &NelderMeadOptions { max_evaluations: 4000, f_tolerance: 1e-16, ..Default::default() });
        assert!(r.converged);
        assert!(r.f < 1e-8);
    }
}
