use pucci_lab::barriers::{calibrate_exponent, flat_model_setup, ExponentKind, SampleDensity};
use pucci_lab::geometry::{Cylinder, DomainSpec};
use pucci_lab::harness::{estimate_backward_harnack, estimate_carleson, refinement_study, FamilySpec, SolutionFamily};
use pucci_lab::operators::Ellipticity;
use pucci_lab::solver::{solve, GridField, GridSpec, InitialDatum, OperatorKind, ProblemSpec, DEFAULT_C_CFL};
use pucci_lab::Error;

fn interval(horizon: f64) -> Cylinder {
    Cylinder::new(DomainSpec::Interval { length: 1.0 }, horizon).unwrap()
}

#[test]
fn solved_field_survives_the_binary_format() {
    let pr = ProblemSpec {
        operator: OperatorKind::ExtremalMinus,
        ell: Ellipticity::new(0.5, 2.0, 1.0, 0.0).unwrap(),
        initial: InitialDatum::Bump { center: vec![0.2, 0.0], radius: 0.6, amplitude: 1.0 },
        lateral: 0.0,
    };
    let cyl = Cylinder::new(DomainSpec::Disk { center: vec![0.0, 0.0], radius: 1.0 }, 0.02).unwrap();
    let f = solve(&pr, &GridSpec::for_problem(cyl, 1.0 / 16.0, &pr, 4, DEFAULT_C_CFL).unwrap()).unwrap();
    let back = GridField::from_bytes(&f.to_bytes(), f.meta.clone()).unwrap();
    assert_eq!(back.data, f.data);
    assert_eq!(back.times, f.times);
    assert!(back.same_grid(&f));
    let mut cut = f.to_bytes();
    cut.truncate(cut.len() - 8);
    assert!(GridField::from_bytes(&cut, f.meta.clone()).is_err());
}

#[test]
fn family_feeds_the_estimators() {
    let fam = SolutionFamily::build(&FamilySpec::default(), &interval(0.5), 1.0 / 32.0, 50, DEFAULT_C_CFL).unwrap();
    assert_eq!(fam.fields.len(), 12);
    let labels: Vec<&str> = fam.fields.iter().map(|f| f.meta.label.as_str()).collect();
    assert!(labels[0].starts_with("linear_nondiv#"));
    assert!(labels[11].starts_with("p_laplacian"));
    let c = estimate_carleson(&fam.fields, &[0.0], 0.25, 0.2).unwrap();
    assert!(c.estimate.is_finite() && c.estimate > 0.0);
    assert_eq!(c.members.len(), 12);
    let halved: Vec<GridField> = fam.fields.iter().map(|f| f.scaled(0.5)).collect();
    assert_eq!(estimate_carleson(&halved, &[0.0], 0.25, 0.2).unwrap().estimate, c.estimate);
}

#[test]
fn refinement_of_the_linear_members_is_stable() {
    let spec = FamilySpec::default();
    let rep = refinement_study(&[1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0], 0.2, |hx| {
        let fam = SolutionFamily::build(&spec, &interval(0.5), hx, 100, DEFAULT_C_CFL)?;
        estimate_backward_harnack(&fam.fields[..spec.linear_seeds.len()], &[0.5], 0.1, 0.1)
    })
    .unwrap();
    assert!(rep.pass, "{:?}", rep.deviations);
    assert_eq!(rep.estimates.len(), 3);
    let err = refinement_study(&[1.0 / 16.0, 1.0 / 32.0], 0.2, |_| unreachable!());
    assert!(matches!(err, Err(Error::SeriesRequired(2))));
}

#[test]
fn calibrated_exponents_grow_with_the_drift() {
    let setup = flat_model_setup(0.5, 0.16, 1.0).unwrap();
    let d = SampleDensity::default();
    let lap = calibrate_exponent(ExponentKind::ExpAlpha, &Ellipticity::pucci(1.0, 1.0).unwrap(), &setup, d).unwrap();
    let drift = calibrate_exponent(ExponentKind::ExpAlpha, &Ellipticity::new(1.0, 1.0, 1.5, 0.0).unwrap(), &setup, d).unwrap();
    assert!(lap.report.pass && drift.report.pass);
    assert!(drift.parameter >= lap.parameter);
}
