//! Downhill simplex minimization shared by the design search and the line fitter.

use crate::error::Result;

#[derive(Clone, Debug)]
pub struct SimplexOptions {
    /// Initial displacement per coordinate.
    pub step: Vec<f64>,
    /// Stop once every vertex is within this max-norm distance of the best.
    pub tol: f64,
    pub max_evals: usize,
    /// Box every trial point is projected into.
    pub bounds: Option<(f64, f64)>,
}

#[derive(Clone, Debug)]
pub struct SimplexOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Nelder-Mead with standard coefficients; `f0` skips re-evaluating the start point.
pub fn minimize<F>(mut f: F, x0: &[f64], f0: Option<f64>, opts: &SimplexOptions) -> Result<SimplexOutcome>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let n = x0.len();
    let project = |mut p: Vec<f64>| {
        if let Some((lo, hi)) = opts.bounds {
            p.iter_mut().for_each(|x| *x = x.clamp(lo, hi));
        }
        p
    };
    let mut evals = 0;
    let mut call = |p: &[f64], evals: &mut usize| {
        *evals += 1;
        f(p)
    };
    let start = project(x0.to_vec());
    let f_start = match f0 {
        Some(v) => v,
        None => call(&start, &mut evals)?,
    };
    let mut pts = vec![start.clone()];
    let mut vals = vec![f_start];
    for j in 0..n {
        if evals >= opts.max_evals {
            return Ok(SimplexOutcome { x: start, value: f_start, evals, converged: false });
        }
        let mut p = start.clone();
        p[j] += opts.step[j];
        if let Some((lo, hi)) = opts.bounds {
            if p[j] > hi {
                p[j] = start[j] - opts.step[j];
            }
            p[j] = p[j].clamp(lo, hi);
        }
        vals.push(call(&p, &mut evals)?);
        pts.push(p);
    }
    let mut converged = false;
    loop {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();
        let diameter = pts[1..]
            .iter()
            .map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if diameter < opts.tol {
            converged = true;
            break;
        }
        if evals >= opts.max_evals {
            break;
        }
        let centroid: Vec<f64> = (0..n).map(|j| pts[..n].iter().map(|p| p[j]).sum::<f64>() / n as f64).collect();
        let toward = |t: f64| project(centroid.iter().zip(&pts[n]).map(|(c, w)| c + t * (c - w)).collect());

        let refl = toward(1.0);
        let f_refl = call(&refl, &mut evals)?;
        if f_refl < vals[0] {
            let exp = toward(2.0);
            let f_exp = if evals < opts.max_evals { call(&exp, &mut evals)? } else { f64::INFINITY };
            (pts[n], vals[n]) = if f_exp < f_refl { (exp, f_exp) } else { (refl, f_refl) };
            continue;
        }
        if f_refl < vals[n - 1] {
            (pts[n], vals[n]) = (refl, f_refl);
            continue;
        }
        if evals >= opts.max_evals {
            break;
        }
        let con = if f_refl < vals[n] { toward(0.5) } else { toward(-0.5) };
        let f_con = call(&con, &mut evals)?;
        if f_con < vals[n].min(f_refl) {
            (pts[n], vals[n]) = (con, f_con);
            continue;
        }
        for i in 1..=n {
            if evals >= opts.max_evals {
                break;
            }
            let p: Vec<f64> = pts[i].iter().zip(&pts[0]).map(|(x, b)| b + 0.5 * (x - b)).collect();
            vals[i] = call(&p, &mut evals)?;
            pts[i] = p;
        }
    }
    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
    Ok(SimplexOutcome { x: pts[best].clone(), value: vals[best], evals, converged })
}
