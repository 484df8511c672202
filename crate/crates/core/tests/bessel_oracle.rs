#![allow(clippy::excessive_precision)]

//! Bessel functions of order 2/3 against high-precision reference values.

use desitter::numerics::{bessel_ik, bessel_jy};
use std::f64::consts::PI;

const NU: f64 = 2.0 / 3.0;

// x, J, Y, I, K at 30 significant digits, rounded to 20.
const TABLE: [(f64, f64, f64, f64, f64); 7] = [
    (
        0.05,
        0.094674256082261154784,
        -5.0865571505931720764,
        0.094745288408796723984,
        7.7619322787386221524,
    ),
    (
        0.5,
        0.42331075068448349424,
        -1.1316060101031433114,
        0.45628323113556918098,
        1.2059304647203357023,
    ),
    (
        1.0,
        0.59794997367362850623,
        -0.56270321497463304608,
        0.80752128860613026207,
        0.49447506210420826699,
    ),
    (
        2.5,
        0.38721242477084360965,
        0.32882045742954650254,
        2.898116189422492329,
        0.06725532217162333413,
    ),
    (
        7.0,
        0.1363797756447962374,
        -0.26929930074751720574,
        162.88522354408073736,
        0.00043762322173639391339,
    ),
    (
        20.0,
        0.13904826122116538576,
        -0.11182254014899550352,
        43064361.686912299362,
        5.8038484271925806951e-10,
    ),
    (
        45.0,
        0.081776275512525302091,
        -0.086373755152382138546,
        2073034581435694985.8,
        5.3595716143622070559e-21,
    ),
];

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn values_match_reference() {
    for (x, j, y, i, k) in TABLE {
        let jy = bessel_jy(NU, x).unwrap();
        let ik = bessel_ik(NU, x).unwrap();
        assert!(rel(jy.j, j) < 1e-12, "J({x}) {} {j}", jy.j);
        assert!(rel(jy.y, y) < 1e-12, "Y({x}) {} {y}", jy.y);
        assert!(rel(ik.i, i) < 1e-12, "I({x}) {} {i}", ik.i);
        assert!(rel(ik.k, k) < 1e-12, "K({x}) {} {k}", ik.k);
    }
}

#[test]
fn wronskians() {
    for x in [0.01, 0.3, 1.0, 1.9, 2.1, 5.0, 12.0, 30.0, 60.0] {
        let jy = bessel_jy(NU, x).unwrap();
        let w = jy.j * jy.yp - jy.jp * jy.y;
        assert!(rel(w, 2.0 / (PI * x)) < 1e-12, "JY at {x}: {w}");
        let ik = bessel_ik(NU, x).unwrap();
        let w = ik.i * ik.kp - ik.ip * ik.k;
        assert!(rel(w, -1.0 / x) < 1e-12, "IK at {x}: {w}");
    }
}
