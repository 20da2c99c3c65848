//! Independent numerical oracles used by test suites across the workspace.
//!
//! Everything here is computed by adaptive quadrature over explicit
//! integrals, deliberately sharing no code path with the production
//! special-function implementations it is used to check.

/// Adaptive Simpson integration of `f` over `[a, b]`.
///
/// `tol` is the absolute error target for the whole interval.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    adaptive(f, a, fa, b, fb, m, fm, whole, tol, 60)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    m: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive(f, a, fa, m, fm, lm, flm, left, tol * 0.5, depth - 1)
        + adaptive(f, m, fm, b, fb, rm, frm, right, tol * 0.5, depth - 1)
}

/// Unregularized incomplete beta integral ∫_0^x t^(a-1)(1-t)^(b-1) dt.
///
/// Uses the substitution t = sin²θ, giving 2·∫ sin^(2a-1)θ cos^(2b-1)θ dθ
/// over [0, asin √x]: smooth on the whole range whenever a, b ≥ 1/2, which
/// covers every shape the t-test ever produces. The tolerance is relative
/// to a coarse first estimate so tiny beta values keep their digits.
fn inc_beta_raw(a: f64, b: f64, x: f64) -> f64 {
    assert!(a >= 0.5 && b >= 0.5, "oracle supports shapes >= 1/2");
    assert!((0.0..=1.0).contains(&x));
    if x == 0.0 {
        return 0.0;
    }
    let g = |theta: f64| {
        let s = theta.sin();
        let c = theta.cos();
        2.0 * s.powf(2.0 * a - 1.0) * c.powf(2.0 * b - 1.0)
    };
    let upper = x.sqrt().asin();
    // two passes: a cheap estimate fixes the scale, the second pass runs at
    // a relative tolerance that is actually reachable
    let rough = integrate(&g, 0.0, upper, 1e-6).abs();
    integrate(&g, 0.0, upper, rough.max(1e-100) * 1e-13)
}

/// Regularized incomplete beta function I_x(a, b) via quadrature only.
pub fn reg_inc_beta_oracle(a: f64, b: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x == 1.0 {
        return 1.0;
    }
    inc_beta_raw(a, b, x) / inc_beta_raw(a, b, 1.0)
}

/// Student-t survival function P(T > t) for ν degrees of freedom.
///
/// Evaluated through the beta-integral identity with all beta values
/// obtained by quadrature.
pub fn student_t_sf_oracle(t: f64, nu: f64) -> f64 {
    assert!(nu > 0.0);
    if t == 0.0 {
        return 0.5;
    }
    if t < 0.0 {
        return 1.0 - student_t_sf_oracle(-t, nu);
    }
    0.5 * reg_inc_beta_oracle(0.5 * nu, 0.5, nu / (nu + t * t))
}

/// Student-t survival function integrated directly from the (unnormalized)
/// density, as a cross-check on [`student_t_sf_oracle`]. Only meaningful for
/// ν ≥ 1; the tail is mapped to a finite interval with u = 1/x.
pub fn student_t_sf_density(t: f64, nu: f64) -> f64 {
    assert!(nu >= 1.0);
    assert!(t > 0.0, "density route needs t > 0");
    let dens = |x: f64| (1.0 + x * x / nu).powf(-(nu + 1.0) / 2.0);
    // ∫_t^∞ dens dx with u = 1/x.
    let tail = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        let x = 1.0 / u;
        dens(x) / (u * u)
    };
    let upper = integrate(&tail, 0.0, 1.0 / t, 1e-13);
    let body = integrate(&dens, 0.0, t, 1e-13);
    let half = body + upper; // ∫_0^∞
    upper / (2.0 * half)
}

/// Welch two-sample t statistic computed straight from the defining
/// formulas, with the p-value obtained from the quadrature survival
/// function.
#[derive(Debug, Clone, Copy)]
pub struct WelchOracle {
    pub t: f64,
    pub dof: f64,
    pub p: f64,
}

pub fn welch_oracle(xs: &[f64], ys: &[f64]) -> WelchOracle {
    assert!(xs.len() >= 2 && ys.len() >= 2);
    let nx = xs.len() as f64;
    let ny = ys.len() as f64;
    let mx = xs.iter().sum::<f64>() / nx;
    let my = ys.iter().sum::<f64>() / ny;
    let vx = xs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>() / (nx - 1.0);
    let vy = ys.iter().map(|y| (y - my) * (y - my)).sum::<f64>() / (ny - 1.0);
    assert!(vx > 0.0 || vy > 0.0, "oracle needs a nondegenerate pair");
    let se2 = vx / nx + vy / ny;
    let t = (mx - my) / se2.sqrt();
    let dof = se2 * se2
        / ((vx / nx) * (vx / nx) / (nx - 1.0) + (vy / ny) * (vy / ny) / (ny - 1.0));
    let p = 2.0 * student_t_sf_oracle(t.abs(), dof);
    WelchOracle { t, dof, p }
}
