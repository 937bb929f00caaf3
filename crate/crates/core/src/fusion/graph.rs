use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::image::{DepthImage, Mask};

use super::criterion::RegionSummary;

/// Partition of the pixel grid into fused regions.
///
/// Region ids are pixel indices: a region keeps the id of the pixel it
/// started from and absorbs the regions fused into it. Pixels map to their
/// region through a disjoint-set forest with path compression.
#[derive(Debug, Clone)]
pub struct RegionGraph {
    width: usize,
    height: usize,
    parent: Vec<usize>,
    alive: Vec<bool>,
    live: usize,
    value: Vec<f64>,
    weight: Vec<f64>,
    observed_weight: Vec<f64>,
    data_mean: Vec<f64>,
    target_mean: Vec<f64>,
    /// Neighbor id -> number of crossing four-connected pixel pairs.
    neighbors: Vec<BTreeMap<usize, u32>>,
}

impl RegionGraph {
    /// One region per pixel, four-connected with unit connection counts.
    ///
    /// `target` is `M - Y`; initial values are the pixelwise minimizers.
    pub fn from_pixels(
        observed: &DepthImage,
        mask: &Mask,
        target: &DepthImage,
        rho: f64,
    ) -> Result<Self> {
        let (w, h) = (observed.width(), observed.height());
        mask.matches(observed)?;
        target.same_dims(w, h)?;
        let n = w * h;

        let observed_weight: Vec<f64> = mask.observed_weights();
        let data_mean: Vec<f64> = (0..n)
            .map(|k| {
                if mask.is_missing(k) {
                    0.0
                } else {
                    observed.data()[k]
                }
            })
            .collect();
        let target_mean = target.data().to_vec();

        let mut neighbors = vec![BTreeMap::new(); n];
        for i in 0..h {
            for j in 0..w {
                let p = i * w + j;
                if j + 1 < w {
                    neighbors[p].insert(p + 1, 1);
                    neighbors[p + 1].insert(p, 1);
                }
                if i + 1 < h {
                    neighbors[p].insert(p + w, 1);
                    neighbors[p + w].insert(p, 1);
                }
            }
        }

        let mut graph = Self {
            width: w,
            height: h,
            parent: (0..n).collect(),
            alive: vec![true; n],
            live: n,
            value: vec![0.0; n],
            weight: vec![1.0; n],
            observed_weight,
            data_mean,
            target_mean,
            neighbors,
        };
        for p in 0..n {
            let s = graph.summary(p);
            graph.value[p] = s.isolated_minimizer(rho);
        }
        Ok(graph)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.parent.len()
    }

    pub fn region_count(&self) -> usize {
        self.live
    }

    pub fn is_alive(&self, id: usize) -> bool {
        self.alive[id]
    }

    /// Live region ids in ascending order.
    pub fn regions(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.alive.len()).filter(|&k| self.alive[k])
    }

    pub fn summary(&self, id: usize) -> RegionSummary {
        RegionSummary {
            weight: self.weight[id],
            observed_weight: self.observed_weight[id],
            data_mean: self.data_mean[id],
            target_mean: self.target_mean[id],
            value: self.value[id],
        }
    }

    pub fn value(&self, id: usize) -> f64 {
        self.value[id]
    }

    pub fn set_value(&mut self, id: usize, v: f64) {
        self.value[id] = v;
    }

    /// Neighbors of a region with their connection counts, ascending by id.
    pub fn neighbors(&self, id: usize) -> &BTreeMap<usize, u32> {
        &self.neighbors[id]
    }

    /// Connection count between two regions, 0 when not adjacent.
    pub fn connection(&self, i: usize, j: usize) -> u32 {
        self.neighbors[i].get(&j).copied().unwrap_or(0)
    }

    /// Region containing pixel `p`.
    pub fn find(&mut self, p: usize) -> usize {
        let mut root = p;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = p;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    /// Region containing pixel `p`, without path compression.
    pub fn region_of(&self, p: usize) -> usize {
        let mut root = p;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        root
    }

    /// Merges region `j` into region `i`.
    ///
    /// The merged value is the size-weighted mean of the two values; data
    /// means combine by observed counts and coupling means by total counts.
    /// Connection counts of shared neighbors add up.
    pub fn fuse(&mut self, i: usize, j: usize) -> Result<()> {
        if i == j || !self.alive[i] || !self.alive[j] || !self.neighbors[i].contains_key(&j) {
            return Err(Error::InvalidInput(format!(
                "cannot fuse regions {i} and {j}: not live neighbors"
            )));
        }

        let (wi, wj) = (self.weight[i], self.weight[j]);
        let (oi, oj) = (self.observed_weight[i], self.observed_weight[j]);
        self.value[i] = (wi * self.value[i] + wj * self.value[j]) / (wi + wj);
        self.target_mean[i] = (wi * self.target_mean[i] + wj * self.target_mean[j]) / (wi + wj);
        self.data_mean[i] = if oi + oj > 0.0 {
            (oi * self.data_mean[i] + oj * self.data_mean[j]) / (oi + oj)
        } else {
            0.0
        };
        self.weight[i] = wi + wj;
        self.observed_weight[i] = oi + oj;

        self.neighbors[i].remove(&j);
        let absorbed = std::mem::take(&mut self.neighbors[j]);
        for (k, c_jk) in absorbed {
            if k == i {
                continue;
            }
            *self.neighbors[i].entry(k).or_insert(0) += c_jk;
            let nk = &mut self.neighbors[k];
            nk.remove(&j);
            *nk.entry(i).or_insert(0) += c_jk;
        }

        self.alive[j] = false;
        self.parent[j] = i;
        self.live -= 1;
        Ok(())
    }

    /// Broadcasts region values back onto the pixel grid.
    pub fn to_image(&self) -> DepthImage {
        let data = (0..self.pixel_count())
            .map(|p| self.value[self.region_of(p)])
            .collect();
        DepthImage::new(self.width, self.height, data).expect("graph dimensions are valid")
    }
}
