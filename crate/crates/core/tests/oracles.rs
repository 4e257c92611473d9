//! Values frozen from independent high-precision evaluations: mpmath
//! series and numerical Laplace inversion (Talbot and de Hoog agreeing to
//! 1e-40), sympy Rodrigues polynomials, and a 10⁶-point trapezoid rule.

#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;

use approx::assert_relative_eq;
use num_complex::Complex64;
use sfhd_core::covariance::covariance_direct;
use sfhd_core::kernel::h_laplace_oracle;
use sfhd_core::specfun::{
    legendre_p, log_gamma, mittag_leffler, prabhakar_ml, spherical_bessel, spherical_harmonic,
    PrabhakarArgs,
};
use sfhd_core::spectra::{angular_spectrum_discrete, angular_spectrum_matern};
use sfhd_core::{
    h_eval, CovarianceRequest, DiscreteMeasure, KernelConfig, MaternSpectrum, ModelParams,
    SpectralMeasure, WeightConvention,
};

#[test]
fn log_gamma_values() {
    for (x, want) in [
        (0.1, 2.252712651734205902),
        (0.5, 0.57236494292470008707),
        (1.7, -0.095807697407065873788),
        (3.5, 1.2009736023470742248),
        (25.3, 55.746181183584592334),
        (170.5, 704.00442773420467079),
        (1e-8, 18.420680738180208884),
    ] {
        assert_relative_eq!(log_gamma(x).unwrap(), want, max_relative = 1e-14);
    }
}

#[test]
fn prabhakar_values() {
    for (a, b, zeta, z, want) in [
        (0.8, 1.3, 2.0, -4.0, -0.0086632851781508772388),
        (0.6, 0.7, 0.5, 2.5, 56.115861290370106585),
        (1.5, 2.0, 3.0, -12.0, 0.089804497975092513877),
        (0.9, 1.9, 2.0, -0.9, 0.38125957572925505777),
    ] {
        let got = prabhakar_ml(&PrabhakarArgs::new(a, b, zeta, z).unwrap()).unwrap();
        assert_relative_eq!(got, want, max_relative = 1e-12);
    }
}

#[test]
fn mittag_leffler_values() {
    for (alpha, z, want) in [
        (
            0.8,
            Complex64::new(-3.0, 0.0),
            Complex64::new(0.1129201986822173868, 0.0),
        ),
        (
            0.6,
            Complex64::new(-2.0, 5.0),
            Complex64::new(0.027826579371401097143, 0.082774193854019261975),
        ),
        (
            0.9,
            Complex64::new(1.5, -0.5),
            Complex64::new(4.3747405121751675252, -2.9097514512407443933),
        ),
        (
            0.5,
            Complex64::new(-10.0, 0.0),
            Complex64::new(0.056140992743822585858, 0.0),
        ),
        (
            0.75,
            Complex64::new(-20.0, 8.0),
            Complex64::new(0.012339571982662971749, 0.0051976940812515208446),
        ),
    ] {
        let got = mittag_leffler(alpha, z).unwrap();
        assert!(
            (got - want).norm() <= 1e-12 * want.norm(),
            "E_{alpha}({z}) = {got}, want {want}"
        );
    }
}

#[test]
fn spherical_bessel_values() {
    for (l, x, want) in [
        (20, 5.0, 5.4277267607932083501e-12),
        (0, 0.001, 0.99999983333334166667),
        (3, 2.5, 0.10392046970240393973),
        (10, 10.0, 0.064605154492564264271),
        (50, 30.0, 2.6901637185735316123e-9),
        (100, 37.0, 1.5976525049954323436e-34),
        (5, 120.0, -0.0061317720453380944971),
    ] {
        assert_relative_eq!(spherical_bessel(l, x), want, max_relative = 1e-12);
    }
}

#[test]
fn legendre_values_from_rodrigues() {
    for (l, x, want) in [
        (5, -0.7, 0.36519875),
        (12, 0.3, -0.18100217969140722656),
        (30, 0.95, -0.22200730158246726324),
    ] {
        assert_relative_eq!(legendre_p(l, x), want, max_relative = 1e-13);
    }
}

#[test]
fn spherical_harmonic_values() {
    for (l, m, th, ph, re, im) in [
        (3, 2, 0.7, 1.1, -0.190910202916476322, 0.262276838539064356),
        (
            10,
            -4,
            2.0,
            0.3,
            0.0674277222466689549,
            -0.173434325153052412,
        ),
        (
            20,
            15,
            1.2,
            2.2,
            -0.00523840673952232409,
            0.394520204302431087,
        ),
        (7, 0, 0.4, 5.0, -0.288791292899397154, 0.0),
    ] {
        let y = spherical_harmonic(l, m, th, ph).unwrap();
        assert!(
            (y - Complex64::new(re, im)).norm() <= 1e-13,
            "Y_{l}{m} = {y}"
        );
    }
}

#[test]
fn kernel_against_numerical_inversion() {
    let cfg = KernelConfig::default();
    for (a, b, mu, t, want) in [
        (0.8, 1.0, 2.0, 0.3, 0.76734456860439184281),
        (0.6, 0.5, 10.0, 0.5, 0.0049278665426886972462),
        (0.6, 1.0, 5.0, 0.1, 0.62301247400153477309),
        (1.0, 0.5, 1.0, 1.0, 0.62088510576018378681),
        (0.8, 0.8, 0.5, 0.3, 0.97871436846420192637),
        (0.7, 0.9, 20.0, 0.05, -0.22977930841378671805),
    ] {
        let p = ModelParams::new(a, b, 1.0, 1.0).unwrap();
        let h = h_eval(&p, &cfg, mu, t).unwrap();
        assert!(
            (h - want).abs() <= cfg.oracle_tol,
            "H({a}, {b}, {mu}, {t}) = {h}, want {want}"
        );
        let lap = h_laplace_oracle(&p, &cfg, mu, t).unwrap();
        assert!(
            (lap - want).abs() <= cfg.oracle_tol,
            "contour {lap}, want {want}"
        );
    }
}

fn classical() -> ModelParams {
    ModelParams::new(1.0, 1.0, 1.0, 1.0).unwrap()
}

#[test]
fn discrete_spectrum_against_direct_summation() {
    let m = DiscreteMeasure::ten_atom(WeightConvention::StdDev);
    let s =
        angular_spectrum_discrete(&m, &classical(), &KernelConfig::default(), 7, 0.1, 0.1).unwrap();
    assert_relative_eq!(s.get(0), 89035.238715335678871, max_relative = 1e-12);
    assert_relative_eq!(s.get(2), 927.86888460456666102, max_relative = 1e-12);
    assert_relative_eq!(s.get(7), 122.08806891094469302, max_relative = 1e-12);
}

#[test]
fn discrete_covariance_against_direct_summation() {
    let m = SpectralMeasure::Discrete(DiscreteMeasure::ten_atom(WeightConvention::StdDev));
    let cfg = KernelConfig::default();
    for (g, want) in [
        (PI / 3.0, 7983.7781746272706788),
        (2.0, 6050.4722292092016107),
    ] {
        let req = CovarianceRequest::new(g, 0.1, 0.1).unwrap();
        let r = covariance_direct(&m, &classical(), &cfg, &req).unwrap();
        assert_relative_eq!(r, want, max_relative = 1e-12);
    }
}

#[test]
fn matern_spectrum_against_trapezoid() {
    let spec = MaternSpectrum::new(1.0, 1.0, 2.0).unwrap();
    let s = angular_spectrum_matern(&spec, &classical(), &KernelConfig::default(), 3, 0.0, 0.0)
        .unwrap();
    assert_relative_eq!(s.get(0), 8.862171722753647, max_relative = 1e-6);
    assert_relative_eq!(s.get(3), 0.017447224249745708, max_relative = 1e-6);
}

#[test]
fn matern_spectrum_against_branch_split_integral() {
    let spec = MaternSpectrum::new(1.0, 1.0, 2.0).unwrap();
    let s = angular_spectrum_matern(&spec, &classical(), &KernelConfig::default(), 3, 0.1, 0.1)
        .unwrap();
    assert_relative_eq!(s.get(3), 0.015746364878522053008, max_relative = 1e-7);
}
