/// Below this argument the leading power-series term is exact to f64.
const SMALL_ARG: f64 = 1e-8;
const RESCALE_ABOVE: f64 = 1e250;

/// Spherical Bessel function of the first kind `j_l(x)`, `x >= 0`.
///
/// `J_{l+1/2}(x) = sqrt(2x/π) j_l(x)`.
pub fn spherical_bessel(l: usize, x: f64) -> f64 {
    match l {
        0 if x >= 1.0 => x.sin() / x,
        1 if x >= 1.0 => (x.sin() / x - x.cos()) / x,
        _ => spherical_bessel_seq(l, x)[l],
    }
}

/// `j_0(x), ..., j_{l_max}(x)` by Miller's downward recurrence normalised
/// against the closed forms of `j_0` and `j_1`.
pub fn spherical_bessel_seq(l_max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; l_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    if x < SMALL_ARG {
        // j_l(x) ~ x^l / (2l+1)!!
        let ln_x = x.ln();
        let mut ln_dfact = 0.0;
        for (l, v) in out.iter_mut().enumerate() {
            ln_dfact += ((2 * l + 1) as f64).ln();
            *v = (l as f64 * ln_x - ln_dfact).exp();
        }
        return out;
    }

    let j0 = x.sin() / x;
    let j1 = (j0 - x.cos()) / x;

    let start = l_max.max(1) + 20.max((1.5 * x).ceil() as usize);
    let mut f_next = 0.0; // f_{n+1}
    let mut f = 1e-300; // f_n
    for n in (0..start).rev() {
        // f_{n} from f_{n+1}, f_{n+2}
        let f_prev = (2 * n + 3) as f64 / x * f - f_next;
        f_next = f;
        f = f_prev;
        if n <= l_max {
            out[n] = f;
        }
        if f.abs() > RESCALE_ABOVE {
            f *= 1.0 / RESCALE_ABOVE;
            f_next *= 1.0 / RESCALE_ABOVE;
            for v in out.iter_mut().skip(n) {
                *v *= 1.0 / RESCALE_ABOVE;
            }
        }
    }
    // After the loop f = f_0 and f_next = f_1.
    let scale = if j0.abs() >= j1.abs() {
        j0 / f
    } else {
        j1 / f_next
    };
    for v in out.iter_mut() {
        *v *= scale;
    }
    if x >= 1.0 {
        out[0] = j0;
        if l_max >= 1 {
            out[1] = j1;
        }
    }
    out
}
