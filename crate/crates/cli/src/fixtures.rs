//! Seeded Gaussian-blob generator behind the bundled fixture files.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

#[derive(Debug, Clone, PartialEq)]
pub struct BlobSpec {
    pub counts: Vec<usize>,
    pub n_features: usize,
    /// Distance of each class center from the origin.
    pub separation: f64,
    pub std: f64,
    pub seed: u64,
}

impl BlobSpec {
    /// 300 rows, 6 features, classes of 200/50/30/20.
    pub fn blobs4() -> BlobSpec {
        BlobSpec {
            counts: vec![200, 50, 30, 20],
            n_features: 6,
            separation: 3.0,
            std: 1.0,
            seed: 42,
        }
    }

    /// 200 rows, 4 features, classes of 160/40.
    pub fn blobs2() -> BlobSpec {
        BlobSpec {
            counts: vec![160, 40],
            n_features: 4,
            separation: 3.0,
            std: 1.0,
            seed: 7,
        }
    }

    /// Class `c` is centered at `separation` along axis `c mod d`, with the
    /// sign alternating on each wrap around the axes.
    pub fn center(&self, c: usize) -> Vec<f64> {
        let d = self.n_features;
        let mut v = vec![0.0; d];
        let sign = if (c / d).is_multiple_of(2) { 1.0 } else { -1.0 };
        v[c % d] = sign * self.separation;
        v
    }

    /// Rows grouped by class in label order.
    pub fn generate(&self) -> (Array2<f64>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let noise = Normal::new(0.0, self.std).expect("positive std");
        let n: usize = self.counts.iter().sum();
        let mut x = Array2::zeros((n, self.n_features));
        let mut y = Vec::with_capacity(n);
        let mut row = 0;
        for (c, &count) in self.counts.iter().enumerate() {
            let center = self.center(c);
            for _ in 0..count {
                for (j, mu) in center.iter().enumerate() {
                    x[[row, j]] = mu + noise.sample(&mut rng);
                }
                y.push(c);
                row += 1;
            }
        }
        (x, y)
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let (x, y) = self.generate();
        let names: Vec<String> = (0..self.n_features).map(|j| format!("f{j}")).collect();
        let labels: Vec<String> = y.iter().map(|l| l.to_string()).collect();
        let mut buf = Vec::new();
        crate::io::write_csv(&mut buf, &names, "label", x.view(), &labels).expect("in-memory write");
        buf
    }
}
