use std::path::PathBuf;

use viewplan_core::geometry::{load_mesh, normalize_mesh};
use viewplan_core::pipeline::{run_plan, MeshSource, PipelineConfig};
use viewplan_core::Point3;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

#[test]
fn icosahedron_ply() {
    let mesh = load_mesh(fixture("icosahedron.ply")).unwrap();
    assert_eq!(mesh.vertices().len(), 12);
    assert_eq!(mesh.faces().len(), 20);
    // edge length 2
    assert!((mesh.surface_area() - 20.0 * 3f64.sqrt()).abs() < 1e-6);
    let unit = normalize_mesh(&mesh, 0.1, Point3::origin()).unwrap();
    for v in unit.vertices() {
        assert!((v.coords.norm() - 0.1).abs() < 1e-9);
    }
}

#[test]
fn cube_obj_quads_are_split() {
    let mesh = load_mesh(fixture("cube.obj")).unwrap();
    assert_eq!(mesh.vertices().len(), 8);
    assert_eq!(mesh.faces().len(), 12);
    assert!((mesh.surface_area() - 6.0).abs() < 1e-12);
}

#[test]
fn plan_from_a_mesh_file() {
    let config = PipelineConfig {
        mesh: MeshSource::Path(fixture("icosahedron.ply")),
        view_count: 40,
        grid_dims: 24,
        sample_count: 20_000,
        alpha: 2,
        ..PipelineConfig::default()
    };
    let report = run_plan(&config).unwrap();
    assert!(report.selection.objective >= 2);
    assert_eq!(report.coverage.fraction_meeting_alpha, 1.0);
    assert!(report.audit.coverage_matches_solver);
}

#[test]
fn missing_file_is_reported() {
    let config = PipelineConfig {
        mesh: MeshSource::Path(fixture("nope.obj")),
        ..PipelineConfig::default()
    };
    let err = run_plan(&config).unwrap_err();
    assert!(matches!(err, viewplan_core::Error::FileNotFound(_)), "{err}");
    assert!(err.is_input_error());
}
