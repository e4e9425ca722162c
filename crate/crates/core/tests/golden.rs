//! Reference values for the bundled datasets.

use ndarray::Array2;
use varclust::cluster::{kmeans_oracle, kmeans_variables, select_k, transpose, KMeansConfig, KMethod, TransposedMatrix};
use varclust::contribution::{cluster_contributions, dominant_cluster};
use varclust::data::{builtin_dataset, column_stats, standardize_table, BuiltinDataset};
use varclust::pca::{abs_loadings, explained_variance_pct, fit_pca};

// Reference absolute loadings for USArrests, variables in file order.
// UrbanPop/PC4 uses 0.134, the value the data gives.
const USARRESTS_ABS_LOADINGS: [[f64; 4]; 4] = [
    [0.536, 0.418, 0.341, 0.649],
    [0.583, 0.188, 0.268, 0.743],
    [0.278, 0.873, 0.378, 0.134],
    [0.543, 0.167, 0.818, 0.089],
];

fn usarrests_t() -> TransposedMatrix {
    transpose(&standardize_table(&builtin_dataset(BuiltinDataset::UsArrests)).unwrap())
}

/// Direct WSS summation over a labelling, independent of the library.
fn wss_by_summation(points: &Array2<f64>, labels: &[usize]) -> f64 {
    let k = labels.iter().max().unwrap() + 1;
    let n = points.ncols();
    let mut total = 0.0;
    for c in 0..k {
        let members: Vec<usize> = (0..labels.len()).filter(|&j| labels[j] == c).collect();
        let mut mean = vec![0.0; n];
        for &j in &members {
            for i in 0..n {
                mean[i] += points[[j, i]] / members.len() as f64;
            }
        }
        for &j in &members {
            for i in 0..n {
                total += (points[[j, i]] - mean[i]).powi(2);
            }
        }
    }
    total
}

fn sets(blocks: &[&[&str]]) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = blocks
        .iter()
        .map(|b| {
            let mut v: Vec<String> = b.iter().map(|s| s.to_string()).collect();
            v.sort();
            v
        })
        .collect();
    out.sort();
    out
}

#[test]
fn usarrests_column_stats() {
    let stats = column_stats(&builtin_dataset(BuiltinDataset::UsArrests)).unwrap();
    let means = [7.788, 170.76, 65.54, 21.232];
    for (got, want) in stats.means.iter().zip(means) {
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }
    assert!((stats.std_devs[0] - 4.35551).abs() < 1e-5);
    assert!((stats.std_devs[1] - 83.33766).abs() < 1e-5);
}

#[test]
fn usarrests_loadings() {
    let z = standardize_table(&builtin_dataset(BuiltinDataset::UsArrests)).unwrap();
    let pca = fit_pca(&z).unwrap();
    let abs = abs_loadings(&pca);
    for i in 0..4 {
        for j in 0..4 {
            assert!(
                (abs[[i, j]] - USARRESTS_ABS_LOADINGS[i][j]).abs() < 0.0005 + 1e-9,
                "{} PC{}: {}",
                pca.variables()[i],
                j + 1,
                abs[[i, j]]
            );
        }
    }
    // Sign convention: PC1 loads positively on all three crime variables.
    assert!(pca.loadings()[[0, 0]] > 0.0 && pca.loadings()[[1, 0]] > 0.0 && pca.loadings()[[3, 0]] > 0.0);
}

#[test]
fn usarrests_explained_variance() {
    let z = standardize_table(&builtin_dataset(BuiltinDataset::UsArrests)).unwrap();
    let pca = fit_pca(&z).unwrap();
    let pct: Vec<f64> = (1..=4).map(|k| explained_variance_pct(&pca, k).unwrap()).collect();
    for (got, want) in pct.iter().zip([62.006, 24.744, 8.914, 4.336]) {
        assert!((got - want).abs() < 0.001, "{got} vs {want}");
    }
    let eig_sum: f64 = pca.eigenvalues().iter().sum();
    assert!((eig_sum - 4.0).abs() < 1e-10);
}

#[test]
fn usarrests_two_clusters() {
    let t = usarrests_t();
    let r = kmeans_variables(&t, &KMeansConfig::new(2)).unwrap();
    assert_eq!(r.partition(), sets(&[&["UrbanPop"], &["Murder", "Assault", "Rape"]]));
    let labels: Vec<usize> = r.labels.iter().map(|c| c - 1).collect();
    assert!((wss_by_summation(t.values(), &labels) - r.wss).abs() < 1e-9);
    let oracle = kmeans_oracle(&t, 2).unwrap();
    assert_eq!(oracle.partition(), r.partition());
}

#[test]
fn usarrests_wss_curve_and_elbow() {
    let t = usarrests_t();
    let report = select_k(&t, 1, 4, KMethod::Elbow, &KMeansConfig::new(1)).unwrap();
    assert_eq!(report.candidate_ks, vec![1, 2, 3, 4]);
    assert_eq!(report.suggested_k, 2);

    // Frozen from exhaustive enumeration with direct summation.
    let frozen = [79.123266124444, 31.664016436820, 9.708207725478, 0.0];
    for (k, (&got, want)) in report.wss_curve.iter().zip(frozen).enumerate() {
        assert!((got - want).abs() < 1e-9, "K = {}: {got}", k + 1);
        let oracle = kmeans_oracle(&t, k + 1).unwrap();
        let labels: Vec<usize> = oracle.labels.iter().map(|c| c - 1).collect();
        assert!((wss_by_summation(t.values(), &labels) - want).abs() < 1e-9);
    }
    for w in report.wss_curve.windows(2) {
        assert!(w[1] <= w[0] + 1e-9);
    }
}

#[test]
fn usarrests_contributions() {
    let z = standardize_table(&builtin_dataset(BuiltinDataset::UsArrests)).unwrap();
    let pca = fit_pca(&z).unwrap();
    let clustering = kmeans_variables(&transpose(&z), &KMeansConfig::new(2)).unwrap();
    let report = cluster_contributions(&pca, &clustering).unwrap();

    let crime = clustering.cluster_of("Murder").unwrap() - 1;
    let urban = clustering.cluster_of("UrbanPop").unwrap() - 1;
    let s_crime = [1.662, 0.772, 1.43, 1.481];
    let s_urban = [0.278, 0.873, 0.378, 0.134];
    let p_urban = [0.143, 0.530, 0.209, 0.0829];
    for j in 0..4 {
        assert!((report.s_matrix[crime][j] - s_crime[j]).abs() < 0.01);
        assert!((report.s_matrix[urban][j] - s_urban[j]).abs() < 0.001);
        assert!((report.p_matrix[urban][j] - p_urban[j]).abs() < 0.0006);
        assert!((report.p_matrix[crime][j] - (1.0 - p_urban[j])).abs() < 0.0006);
    }

    let pc1 = dominant_cluster(&report, 1).unwrap();
    assert_eq!((pc1.cluster_id, pc1.tie), (crime + 1, false));
    let pc2 = dominant_cluster(&report, 2).unwrap();
    assert_eq!(pc2.cluster_id, urban + 1);
}

#[test]
fn iris_shape_and_optimum() {
    let z = standardize_table(&builtin_dataset(BuiltinDataset::IrisFeatures)).unwrap();
    let pca = fit_pca(&z).unwrap();
    assert!((explained_variance_pct(&pca, 1).unwrap() - 72.962).abs() < 0.001);

    let t = transpose(&z);
    let oracle = kmeans_oracle(&t, 2).unwrap();
    let lloyd = kmeans_variables(&t, &KMeansConfig::new(2)).unwrap();
    assert!((oracle.wss - 34.512340199612).abs() < 1e-9);
    assert!((lloyd.wss - oracle.wss).abs() < 1e-9);
    // Sepal.Width is the variable that separates at K = 2 on standardized data.
    assert_eq!(
        oracle.partition(),
        sets(&[&["Sepal.Width"], &["Sepal.Length", "Petal.Length", "Petal.Width"]])
    );
}
