//! Unscrambled Sobol sequence with Joe-Kuo direction numbers, generated in
//! Gray-code order. Point 0 is the origin.

use crate::error::{ModelError, Result};

const BITS: usize = 32;

/// `(degree, polynomial coefficients, initial direction integers)` for
/// dimensions 2 and up; dimension 1 is the van der Corput sequence.
const DIRECTIONS: &[(u32, u32, &[u32])] = &[
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
    (5, 2, &[1, 1, 5, 5, 17]),
    (5, 4, &[1, 1, 5, 5, 5]),
    (5, 7, &[1, 1, 7, 11, 19]),
];

pub const MAX_DIMENSIONS: usize = DIRECTIONS.len() + 1;

#[derive(Debug, Clone)]
pub struct Sobol {
    directions: Vec<[u32; BITS]>,
    state: Vec<u32>,
    index: u64,
}

fn direction_numbers(dim: usize) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    if dim == 0 {
        for (k, vk) in v.iter_mut().enumerate() {
            *vk = 1 << (BITS - 1 - k);
        }
        return v;
    }
    let (s, a, m) = DIRECTIONS[dim - 1];
    let s = s as usize;
    for k in 0..s {
        v[k] = m[k] << (BITS - 1 - k);
    }
    for k in s..BITS {
        let mut x = v[k - s] ^ (v[k - s] >> s);
        for i in 1..s {
            if (a >> (s - 1 - i)) & 1 == 1 {
                x ^= v[k - i];
            }
        }
        v[k] = x;
    }
    v
}

impl Sobol {
    pub fn new(dimensions: usize) -> Result<Self> {
        if dimensions == 0 || dimensions > MAX_DIMENSIONS {
            return Err(ModelError::Calibration(format!(
                "Sobol dimension must be in 1..={MAX_DIMENSIONS}, got {dimensions}"
            )));
        }
        Ok(Sobol {
            directions: (0..dimensions).map(direction_numbers).collect(),
            state: vec![0; dimensions],
            index: 0,
        })
    }

    pub fn dimensions(&self) -> usize {
        self.directions.len()
    }

    /// First `n` points of a fresh sequence.
    pub fn points(dimensions: usize, n: usize) -> Result<Vec<Vec<f64>>> {
        let mut s = Sobol::new(dimensions)?;
        Ok((0..n).map(|_| s.next_point()).collect())
    }

    pub fn next_point(&mut self) -> Vec<f64> {
        let out = self
            .state
            .iter()
            .map(|&x| x as f64 / (1u64 << BITS) as f64)
            .collect();
        // Gray code: flip the direction number of the lowest zero bit.
        let c = (!self.index).trailing_zeros() as usize;
        if c < BITS {
            for (x, v) in self.state.iter_mut().zip(&self.directions) {
                *x ^= v[c];
            }
        }
        self.index += 1;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_points_match_reference_generator() {
        let expected: [[f64; 7]; 8] = [
            [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5],
            [0.75, 0.25, 0.25, 0.25, 0.75, 0.75, 0.25],
            [0.25, 0.75, 0.75, 0.75, 0.25, 0.25, 0.75],
            [0.375, 0.375, 0.625, 0.875, 0.375, 0.125, 0.375],
            [0.875, 0.875, 0.125, 0.375, 0.875, 0.625, 0.875],
            [0.625, 0.125, 0.875, 0.625, 0.625, 0.875, 0.125],
            [0.125, 0.625, 0.375, 0.125, 0.125, 0.375, 0.625],
        ];
        let pts = Sobol::points(7, 16).unwrap();
        for (p, e) in pts.iter().zip(expected.iter()) {
            assert_eq!(p.as_slice(), e.as_slice());
        }
        assert_eq!(
            pts[15],
            vec![0.0625, 0.9375, 0.5625, 0.3125, 0.6875, 0.1875, 0.8125]
        );
    }

    #[test]
    fn deep_points_match_reference_generator() {
        let pts = Sobol::points(7, 4096).unwrap();
        assert_eq!(
            pts[1000],
            vec![
                0.2197265625,
                0.0966796875,
                0.5185546875,
                0.6767578125,
                0.2802734375,
                0.9072265625,
                0.0458984375
            ]
        );
        assert_eq!(
            pts[4095],
            vec![
                0.000244140625,
                0.941162109375,
                0.334228515625,
                0.901611328125,
                0.940185546875,
                0.078857421875,
                0.949462890625
            ]
        );
        for d in 0..7 {
            let mean = pts.iter().map(|p| p[d]).sum::<f64>() / 4096.0;
            assert!((mean - 0.4998779296875).abs() < 1e-12);
        }
    }

    #[test]
    fn stratifies_each_dimension() {
        // Any 2^m leading points put exactly one point in each 1/2^m cell.
        let pts = Sobol::points(MAX_DIMENSIONS, 64).unwrap();
        assert_eq!(
            pts[37],
            vec![0.921875, 0.640625, 0.578125, 0.921875, 0.765625, 0.296875, 0.171875, 0.796875, 0.609375, 0.171875]
        );
        for d in 0..MAX_DIMENSIONS {
            let mut cells = [0u32; 64];
            for p in &pts {
                cells[(p[d] * 64.0) as usize] += 1;
            }
            assert!(cells.iter().all(|&c| c == 1), "dimension {d}");
        }
    }

    #[test]
    fn rejects_bad_dimension() {
        assert!(Sobol::new(0).is_err());
        assert!(Sobol::new(MAX_DIMENSIONS + 1).is_err());
    }
}
