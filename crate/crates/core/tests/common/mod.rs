//! Independent reference integrator shared by the oracle and acceptance
//! tests.

use donor_transport::linalg::{CVector, C64};
use donor_transport::liouville::Generator;

/// Dormand-Prince with embedded error control and standard step-size update.
pub fn dopri5(g: &Generator, x0: &CVector, t_end: f64, rtol: f64, atol: f64) -> CVector {
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const B5: [f64; 7] = [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    // G is very sparse; a row-compressed copy keeps the oracle cheap
    let rows: Vec<Vec<(usize, C64)>> = g
        .matrix()
        .rows()
        .into_iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .filter(|(_, z)| z.norm() != 0.0)
                .map(|(j, z)| (j, *z))
                .collect()
        })
        .collect();
    let apply = |y: &CVector| -> CVector {
        rows.iter()
            .map(|r| r.iter().map(|&(j, z)| z * y[j]).sum())
            .collect()
    };
    let mut x = x0.clone();
    let mut t: f64 = 0.0;
    let mut h: f64 = 1e-4;
    while t < t_end {
        h = h.min(t_end - t);
        let mut k: Vec<CVector> = Vec::with_capacity(7);
        for a in &A {
            let mut y = x.clone();
            for (j, kj) in k.iter().enumerate() {
                if a[j] != 0.0 {
                    y.scaled_add(C64::new(h * a[j], 0.0), kj);
                }
            }
            k.push(apply(&y));
        }
        let mut x5 = x.clone();
        let mut x4 = x.clone();
        for s in 0..7 {
            x5.scaled_add(C64::new(h * B5[s], 0.0), &k[s]);
            x4.scaled_add(C64::new(h * B4[s], 0.0), &k[s]);
        }
        let err = x5
            .iter()
            .zip(x4.iter())
            .zip(x.iter())
            .map(|((a, b), c)| {
                let sc = atol + rtol * a.norm().max(c.norm());
                ((a - b).norm() / sc).powi(2)
            })
            .sum::<f64>();
        let err = (err / x.len() as f64).sqrt();
        if err <= 1.0 {
            t += h;
            x = x5;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            0.9 * err.powf(-0.2)
        };
        h *= factor.clamp(0.2, 5.0);
    }
    x
}
