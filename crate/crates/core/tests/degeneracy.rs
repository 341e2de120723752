//! A boundary charge maps an eigenspace of H into itself without fixing its vectors.

use hecke_boundary::boundary_charges::build_boundary_charges;
use hecke_boundary::cli::spectrum_of;
use hecke_boundary::report::ParamsSnapshot;
use hecke_boundary::spin_chain::{build_hamiltonian, ChainSpec, HamiltonianRoute};
use hecke_boundary::tensor_core::c;
use hecke_boundary::{ModelParams, C64};
use nalgebra::{DMatrix, DVector};

#[test]
fn charge_rotates_a_degenerate_eigenvector() {
    let p = ModelParams::new(3, c(0.41, 0.0), c(0.9, 0.2), c(0.6, 0.0), 2).unwrap();
    let h = build_hamiltonian(&ChainSpec::standard(p), HamiltonianRoute::HeckeForm).unwrap();
    let rep = spectrum_of(&h, ParamsSnapshot::from_params(&p, 1, 0, 1e-9));
    let cl = rep.clusters.iter().find(|c| c.multiplicity >= 2).expect("a degenerate level");
    let e: C64 = cl.value.into();

    let d = h.side();
    let shifted = h.matrix() - DMatrix::<C64>::identity(d, d) * e;
    let svd = shifted.svd(false, true);
    let vt = svd.v_t.unwrap();
    let scale = h.norm();
    let kernel: Vec<DVector<C64>> = (0..d)
        .filter(|&k| svd.singular_values[k] < 1e-8 * scale)
        .map(|k| vt.row(k).adjoint())
        .collect();
    assert!(kernel.len() >= 2, "eigenspace dimension {}", kernel.len());

    let mut rotated = false;
    for (_, q) in build_boundary_charges(&p, 2).entries {
        for v in &kernel {
            let w = q.matrix() * v;
            if w.norm() < 1e-8 {
                continue;
            }
            // H(Qv) = E Qv
            let res = (h.matrix() * &w - &w * e).norm() / (scale * w.norm());
            assert!(res < 1e-8, "charge leaves the eigenspace: {res:e}");
            let overlap = v.dotc(&w);
            let perp = (&w - v * overlap).norm() / w.norm();
            rotated |= perp > 1e-3;
        }
    }
    assert!(rotated, "no charge moves a vector inside the eigenspace");
}
