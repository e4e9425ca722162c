use std::fmt;
use std::io::Write;
use std::str::FromStr;

use ndarray::Array2;
use serde::Serialize;

use super::{kmeans_variables, ClusteringResult, KMeansConfig, TransposedMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KMethod {
    Elbow,
    Silhouette,
    Manual,
}

impl fmt::Display for KMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KMethod::Elbow => "elbow",
            KMethod::Silhouette => "silhouette",
            KMethod::Manual => "manual",
        })
    }
}

impl FromStr for KMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "elbow" => Ok(KMethod::Elbow),
            "silhouette" => Ok(KMethod::Silhouette),
            other => Err(Error::Config(format!("unknown K selection method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KSelectionReport {
    pub candidate_ks: Vec<usize>,
    pub wss_curve: Vec<f64>,
    /// Mean silhouette per K; `None` for K = 1 where it is undefined.
    pub silhouette_curve: Vec<Option<f64>>,
    pub suggested_k: usize,
    pub method: KMethod,
}

impl KSelectionReport {
    /// `k,wss,silhouette` rows; the silhouette field is empty where undefined.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "wss", "silhouette"])?;
        for ((k, wss), sil) in self.candidate_ks.iter().zip(&self.wss_curve).zip(&self.silhouette_curve) {
            w.write_record([
                k.to_string(),
                format!("{wss:.6}"),
                sil.map(|s| format!("{s:.6}")).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Mean silhouette over all points, using Euclidean distance.
///
/// Points in singleton clusters score 0. Returns `None` when fewer than two
/// clusters are present.
pub fn mean_silhouette(points: &Array2<f64>, labels: &[usize]) -> Option<f64> {
    let p = points.nrows();
    let k = labels.iter().copied().max()? + 1;
    let mut sizes = vec![0usize; k];
    for &c in labels {
        sizes[c] += 1;
    }
    if sizes.iter().filter(|&&s| s > 0).count() < 2 {
        return None;
    }

    let mut dist = Array2::<f64>::zeros((p, p));
    for a in 0..p {
        for b in (a + 1)..p {
            let d = super::squared_distance(points.row(a), points.row(b)).sqrt();
            dist[[a, b]] = d;
            dist[[b, a]] = d;
        }
    }

    let mut total = 0.0;
    for j in 0..p {
        let own = labels[j];
        if sizes[own] == 1 {
            continue;
        }
        let mut sums = vec![0.0; k];
        for other in 0..p {
            if other != j {
                sums[labels[other]] += dist[[j, other]];
            }
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own && sizes[c] > 0)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    Some(total / p as f64)
}

fn zero_based(result: &ClusteringResult) -> Vec<usize> {
    result.labels.iter().map(|c| c - 1).collect()
}

/// Candidate Ks with their WSS and silhouette values.
type Curves = (Vec<usize>, Vec<f64>, Vec<Option<f64>>);

fn evaluate(t: &TransposedMatrix, k_min: usize, k_max: usize, base: &KMeansConfig) -> Result<Curves> {
    let p = t.n_variables();
    if k_min < 1 || k_max > p {
        return Err(Error::InvalidK {
            k: if k_min < 1 { k_min } else { k_max },
            p,
        });
    }
    if k_min >= k_max {
        return Err(Error::Config(format!("empty K range {k_min}:{k_max}")));
    }
    let ks: Vec<usize> = (k_min..=k_max).collect();
    let mut wss = Vec::with_capacity(ks.len());
    let mut sil = Vec::with_capacity(ks.len());
    for &k in &ks {
        let result = kmeans_variables(t, &KMeansConfig { k, ..*base })?;
        sil.push(mean_silhouette(t.values(), &zero_based(&result)));
        wss.push(result.wss);
    }
    Ok((ks, wss, sil))
}

/// Scores every K in `k_min..=k_max` and suggests one.
///
/// Elbow picks the interior K with the largest discrete second difference
/// `W(K-1) - 2 W(K) + W(K+1)` and needs at least three candidates.
/// Silhouette picks the K >= 2 with the largest mean silhouette. Ties go to
/// the smaller K.
pub fn select_k(t: &TransposedMatrix, k_min: usize, k_max: usize, method: KMethod, base: &KMeansConfig) -> Result<KSelectionReport> {
    if method == KMethod::Manual {
        return Err(Error::Config("manual selection needs an explicit k".into()));
    }
    let candidates = (k_max + 1).saturating_sub(k_min.max(1));
    if method == KMethod::Elbow && candidates < 3 {
        return Err(Error::RangeTooSmall {
            needed: 3,
            got: candidates,
        });
    }
    let (ks, wss, sil) = evaluate(t, k_min, k_max, base)?;

    let suggested_k = match method {
        KMethod::Elbow => {
            let mut best = (ks[1], f64::NEG_INFINITY);
            for i in 1..ks.len() - 1 {
                let bend = wss[i - 1] - 2.0 * wss[i] + wss[i + 1];
                if bend > best.1 {
                    best = (ks[i], bend);
                }
            }
            best.0
        }
        KMethod::Silhouette => {
            let mut best: Option<(usize, f64)> = None;
            for (&k, s) in ks.iter().zip(&sil) {
                if let Some(s) = *s {
                    if best.is_none_or(|(_, b)| s > b) {
                        best = Some((k, s));
                    }
                }
            }
            best.map(|(k, _)| k).ok_or(Error::RangeTooSmall { needed: 1, got: 0 })?
        }
        KMethod::Manual => unreachable!(),
    };

    Ok(KSelectionReport {
        candidate_ks: ks,
        wss_curve: wss,
        silhouette_curve: sil,
        suggested_k,
        method,
    })
}

/// Same curves as [`select_k`], but records a user-chosen `k`.
///
/// The range is widened to include `k` if needed.
pub fn manual_k_report(t: &TransposedMatrix, k_min: usize, k_max: usize, k: usize, base: &KMeansConfig) -> Result<KSelectionReport> {
    let p = t.n_variables();
    if k < 1 || k > p {
        return Err(Error::InvalidK { k, p });
    }
    let lo = k_min.min(k).max(1);
    let hi = k_max.max(k).min(p);
    let (ks, wss, sil) = if lo < hi {
        evaluate(t, lo, hi, base)?
    } else {
        let result = kmeans_variables(t, &KMeansConfig { k, ..*base })?;
        let sil = mean_silhouette(t.values(), &zero_based(&result));
        (vec![k], vec![result.wss], vec![sil])
    };
    Ok(KSelectionReport {
        candidate_ks: ks,
        wss_curve: wss,
        silhouette_curve: sil,
        suggested_k: k,
        method: KMethod::Manual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn names(p: usize) -> Vec<String> {
        (0..p).map(|j| format!("x{j}")).collect()
    }

    #[test]
    fn silhouette_two_point_masses() {
        let points = array![[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [5.0, 5.0], [5.0, 5.0]];
        let s = mean_silhouette(&points, &[0, 0, 0, 1, 1]).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
        assert_eq!(mean_silhouette(&points, &[0, 0, 0, 0, 0]), None);
    }

    #[test]
    fn silhouette_hand_computed() {
        // 1-D points 0, 1, 4 with clusters {0, 1}, {4}.
        // Point 0: a = 1, b = 4 -> 0.75; point 1: a = 1, b = 3 -> 2/3; point 4: singleton -> 0.
        let points = array![[0.0], [1.0], [4.0]];
        let s = mean_silhouette(&points, &[0, 0, 1]).unwrap();
        assert!((s - (0.75 + 2.0 / 3.0) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn silhouette_picks_two_groups() {
        let t = TransposedMatrix::new(
            names(6),
            array![
                [0.0, 0.0, 0.0],
                [0.0, 0.0, 0.0],
                [0.0, 0.0, 0.0],
                [8.0, 8.0, 8.0],
                [8.0, 8.0, 8.0],
                [8.0, 8.0, 8.0]
            ],
        );
        let r = select_k(&t, 1, 5, KMethod::Silhouette, &KMeansConfig::new(1).restarts(10)).unwrap();
        assert_eq!(r.suggested_k, 2);
        assert_eq!(r.silhouette_curve[0], None);
        assert!(r.candidate_ks.contains(&r.suggested_k));
    }

    #[test]
    fn elbow_needs_three_candidates() {
        let t = TransposedMatrix::new(names(3), array![[0.0], [1.0], [5.0]]);
        assert!(matches!(
            select_k(&t, 1, 2, KMethod::Elbow, &KMeansConfig::new(1)),
            Err(Error::RangeTooSmall { needed: 3, got: 2 })
        ));
        assert!(matches!(
            select_k(&t, 2, 2, KMethod::Silhouette, &KMeansConfig::new(1)),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            select_k(&t, 1, 4, KMethod::Silhouette, &KMeansConfig::new(1)),
            Err(Error::InvalidK { .. })
        ));
        assert!(matches!(
            select_k(&t, 1, 3, KMethod::Manual, &KMeansConfig::new(1)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn elbow_on_three_groups() {
        // Pairs at the corners of an equilateral triangle with side 10:
        // W(1) = 200, W(2) = 100, W(3) ~ 0, so the bend is at K = 3.
        let h = 10.0 * 3f64.sqrt() / 2.0;
        let t = TransposedMatrix::new(
            names(6),
            array![[0.0, 0.0], [0.01, 0.0], [10.0, 0.0], [10.0, 0.01], [5.0, h], [5.01, h]],
        );
        let r = select_k(&t, 1, 6, KMethod::Elbow, &KMeansConfig::new(1).restarts(20)).unwrap();
        assert_eq!(r.suggested_k, 3);
    }

    #[test]
    fn manual_report_widens_range() {
        let t = TransposedMatrix::new(names(4), array![[0.0], [1.0], [5.0], [6.0]]);
        let r = manual_k_report(&t, 1, 2, 3, &KMeansConfig::new(1)).unwrap();
        assert_eq!(r.candidate_ks, vec![1, 2, 3]);
        assert_eq!((r.suggested_k, r.method), (3, KMethod::Manual));

        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("k,wss,silhouette\n1,"));
        assert!(text.lines().nth(1).unwrap().ends_with(','));
    }
}
