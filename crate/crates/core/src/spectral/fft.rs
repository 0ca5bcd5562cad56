use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::TorusGrid;

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

// Plans are created once per axis length and only read afterwards.
fn plans(m: usize) -> Arc<Plans> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<Plans>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(p) = cache.read().expect("plan cache poisoned").get(&m) {
        return Arc::clone(p);
    }
    let mut guard = cache.write().expect("plan cache poisoned");
    let entry = guard.entry(m).or_insert_with(|| {
        let mut planner = FftPlanner::new();
        Arc::new(Plans {
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
        })
    });
    Arc::clone(entry)
}

/// Unnormalized in-place d-dimensional DFT along every axis.
pub(crate) fn transform(grid: &TorusGrid, data: &mut [Complex64], inverse: bool) {
    let m = grid.points_per_axis();
    let dim = grid.dim();
    debug_assert_eq!(data.len(), grid.len());
    let p = plans(m);
    let fft = if inverse { &p.inverse } else { &p.forward };
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];

    // Last axis is contiguous.
    for line in data.chunks_exact_mut(m) {
        fft.process_with_scratch(line, &mut scratch);
    }
    if dim == 1 {
        return;
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for axis in 0..dim - 1 {
        let stride = m.pow((dim - 1 - axis) as u32);
        let block = stride * m;
        for base in (0..data.len()).step_by(block) {
            for offset in 0..stride {
                let start = base + offset;
                for (j, b) in buf.iter_mut().enumerate() {
                    *b = data[start + j * stride];
                }
                fft.process_with_scratch(&mut buf, &mut scratch);
                for (j, b) in buf.iter().enumerate() {
                    data[start + j * stride] = *b;
                }
            }
        }
    }
}
