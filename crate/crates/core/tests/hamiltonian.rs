mod common;

use common::sampled_momentum_state;
use pn_atom::em::FieldConfiguration;
use pn_atom::hamiltonian::{
    cross_term_decoupling, cross_term_recoupling, h_com_split, h_final, h_lab_new, ComState, SelfTermWidth,
};
use pn_atom::order::{OrderFit, ScalingGrid, ScalingProbe};
use pn_atom::{PpnContext, UnitSystem, Vec3};

fn split_total(com: &ComState, ctx: &PpnContext) -> f64 {
    h_com_split(com, &FieldConfiguration::none(), ctx, 0.0, SelfTermWidth::default())
        .unwrap()
        .total_without_self_term()
}

#[test]
fn com_map_is_exact_in_a_uniform_potential() {
    let ctx = PpnContext::from_ratio(UnitSystem::atomic(), 0.7, 1.3, -2e-3).unwrap();
    for i in 0..20 {
        let lab = sampled_momentum_state(i, 1.0);
        let com = ComState::from_lab(&lab).unwrap();
        let a = h_lab_new(&lab, &FieldConfiguration::none(), &ctx, 0.0).unwrap().total();
        let b = split_total(&com, &ctx);
        assert!((a - b).abs() <= 1e-12 * a.abs(), "state {i}: {a} vs {b}");
    }
}

#[test]
fn com_map_with_gradient_drops_only_the_quadratic_gradient_term() {
    for beta in [0.0, 0.5, 1.0, 1.9] {
        let ctx = PpnContext::from_ratio(UnitSystem::atomic(), 1.2, beta, -1e-3)
            .unwrap()
            .with_gradient(Vec3::new(40.0, -25.0, 10.0), Vec3::new(0.1, 0.0, 0.0))
            .unwrap();
        for i in 0..20 {
            let lab = sampled_momentum_state(i, 1.0);
            let com = ComState::from_lab(&lab).unwrap();
            let a = h_lab_new(&lab, &FieldConfiguration::none(), &ctx, 0.0).unwrap().total();
            let b = split_total(&com, &ctx);
            let s = ctx.grad_phi.dot(&com.relative);
            let dropped = (2.0 * beta - 1.0) * com.reduced_mass() * s * s / (2.0 * ctx.c2());
            assert!((a - b - dropped).abs() <= 1e-12 * a.abs(), "beta {beta} state {i}");
        }
    }
}

#[test]
fn decoupling_is_a_fixed_point_inverse() {
    let units = UnitSystem::atomic().with_c(15.0).unwrap();
    for i in 0..20 {
        let old = ComState::from_lab(&sampled_momentum_state(i, 0.5)).unwrap();
        let new = cross_term_decoupling(&old, &units).unwrap();
        let back = cross_term_recoupling(&new, &units).unwrap();
        assert!((back.relative - old.relative).norm() <= 1e-13 * old.relative.norm());
        assert!((back.relative_momentum - old.relative_momentum).norm() <= 1e-13 * old.relative_momentum.norm());
    }
}

#[test]
fn tetrad_dipole_term_differs_at_fourth_order() {
    use pn_atom::em::PlaneWaveMode;
    use pn_atom::hamiltonian::atom_light_terms;
    use pn_atom::Frame;
    let com = ComState::from_lab(&sampled_momentum_state(3, 1.0)).unwrap();
    let phi = -0.5;
    let term = move |l: f64, frame: Frame| -> pn_atom::Result<f64> {
        let units = UnitSystem::atomic().with_c(20.0 * l)?;
        let ctx = PpnContext::new(units, 0.8, 1.2, phi)?;
        let mode = PlaneWaveMode::from_electric_amplitude(Vec3::new(0.0, 0.3, 0.0), Vec3::new(0.5, 0.0, 0.0), 0.1, ctx.c())?;
        let fields = FieldConfiguration::new(vec![mode], None, &units)?;
        let b = atom_light_terms(&com, &fields, &ctx, frame, 0.2, SelfTermWidth::default())?;
        Ok(b.get("dipole").unwrap())
    };
    let probe = ScalingProbe::new(
        "dipole frames",
        ScalingGrid::default(),
        4.0,
        move |l| term(l, Frame::Coordinate),
        move |l| term(l, Frame::Tetrad),
    );
    match probe.run().unwrap() {
        OrderFit::Fitted { slope, r_squared, .. } => {
            assert!((slope + 4.0).abs() <= 0.2 && r_squared >= 0.99, "{slope} {r_squared}")
        }
        OrderFit::ExactToPrecision => panic!("frames should differ at fourth order"),
    }
}

#[test]
fn report_json_uses_term_names() {
    let com = ComState::from_lab(&sampled_momentum_state(1, 1.0)).unwrap();
    let ctx = PpnContext::from_ratio(UnitSystem::atomic(), 1.0, 1.0, -1e-6).unwrap();
    let report = h_final(&com, &FieldConfiguration::none(), &ctx, 0.0, SelfTermWidth::default()).unwrap();
    let json = serde_json::to_value(&report).unwrap();
    for key in ["H_C", "H_A", "H_AL", "H_L", "H_X", "total"] {
        assert!(json.get(key).is_some(), "{key}");
    }
    assert!(json["H_A"].get("metric_kinetic").is_some());
    let parts: f64 = report.parts().iter().map(|(_, b)| b.total()).sum();
    assert!((parts - report.total).abs() <= 1e-15 * report.total.abs());
}
