// scratch probe for acceptance-critical numbers (deleted before release)
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roofprim::cloud::PointCloud;
use roofprim::fit::{cpd_rigid, CpdParams};
use roofprim::primitives::*;
use std::time::Instant;

fn random_rotation(rng: &mut ChaCha8Rng, max_deg: f64) -> nalgebra::Matrix3<f64> {
    let axis = Vector3::new(
        rng.random::<f64>() - 0.5,
        rng.random::<f64>() - 0.5,
        rng.random::<f64>() - 0.5,
    )
    .normalize();
    let angle = rng.random::<f64>() * max_deg.to_radians();
    nalgebra::Rotation3::new(axis * angle).into_inner()
}

#[test]
#[ignore]
fn probe_cpd_recovery() {
    let mut rng = ChaCha8Rng::seed_from_u64(2210);
    let mut worst_rot = 0.0f64;
    let mut worst_scale = 0.0f64;
    let mut worst_trans = 0.0f64;
    let mut total_time = 0.0;
    let n_trials = 20;
    for trial in 0..n_trials {
        let t_type = CATALOG[trial % 15];
        let cloud: PointCloud<f64> = sample_primitive(t_type, 2048, 1000 + trial as u64);
        let r = random_rotation(&mut rng, 45.0);
        let s = 0.8 + rng.random::<f64>() * 0.45;
        let t = Vector3::new(
            rng.random::<f64>() * 20.0 - 10.0,
            rng.random::<f64>() * 20.0 - 10.0,
            rng.random::<f64>() * 20.0 - 10.0,
        );
        let target = PointCloud::new(cloud.points.iter().map(|p| r * p * s + t).collect());
        let params = CpdParams {
            outlier_weight: 0.0,
            tolerance: 1e-12,
            max_iterations: 300,
            ..Default::default()
        };
        let start = Instant::now();
        let fit = cpd_rigid(&cloud, &target, &params).unwrap();
        let dt = start.elapsed().as_secs_f64();
        total_time += dt;
        let d = fit.transform.rotation_matrix() * r.transpose();
        let rot_err = (((d.trace() - 1.0) / 2.0).clamp(-1.0, 1.0)).acos().to_degrees();
        let scale_err = (fit.transform.scale / s - 1.0).abs();
        let trans_err = (fit.transform.translation_vector() - t).norm();
        worst_rot = worst_rot.max(rot_err);
        worst_scale = worst_scale.max(scale_err);
        worst_trans = worst_trans.max(trans_err);
        println!(
            "trial {trial:2} {t_type:?}: rot_err {rot_err:.2e} deg, scale_err {scale_err:.2e}, trans_err {trans_err:.2e}, iters {}, {dt:.2}s",
            fit.iterations
        );
    }
    println!("WORST: rot {worst_rot:.2e} scale {worst_scale:.2e} trans {worst_trans:.2e}, avg time {:.2}s", total_time / n_trials as f64);
}

#[test]
#[ignore]
fn probe_classification() {
    let start = Instant::now();
    let protos: PrototypeSet<f64> = PrototypeSet::default_set().unwrap();
    println!("prototype build: {:.2}s", start.elapsed().as_secs_f64());
    let start = Instant::now();
    let per_type = 20; // 300 clouds
    let set: Vec<(PointCloud<f64>, PrimitiveType)> = generate_training_set(per_type, 555);
    println!("gen {} clouds: {:.2}s", set.len(), start.elapsed().as_secs_f64());
    let start = Instant::now();
    let mut confusion = [[0usize; 15]; 15];
    for (cloud, label) in &set {
        let canon = rectify_canonical(cloud).unwrap();
        let c = classify(&canon, &protos).unwrap();
        confusion[label.index()][c.primitive.index()] += 1;
    }
    let dt = start.elapsed().as_secs_f64();
    let hits: usize = (0..15).map(|i| confusion[i][i]).sum();
    println!(
        "accuracy {:.4} ({hits}/{}), {:.1} ms/cloud, total {dt:.2}s",
        hits as f64 / set.len() as f64,
        set.len(),
        dt * 1000.0 / set.len() as f64
    );
    for (i, row) in confusion.iter().enumerate() {
        let wrong: Vec<String> = row
            .iter()
            .enumerate()
            .filter(|(j, &c)| *j != i && c > 0)
            .map(|(j, &c)| format!("{:?}:{c}", CATALOG[j]))
            .collect();
        if !wrong.is_empty() {
            println!("  {:?} -> {}", CATALOG[i], wrong.join(", "));
        }
    }
}
