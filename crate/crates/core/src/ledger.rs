use serde::{Deserialize, Serialize};

/// Cells with fewer bookings than this are flagged as sparse.
pub const SPARSE_CELL_BOOKINGS: u64 = 10;

/// Booking rates `Q_ij` by customer condition `i` and listing condition `j`,
/// per unit listing mass per unit time.
///
/// Mean-field ledgers carry rates only; finite ledgers also carry the raw
/// counts they were computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BookingLedger {
    pub rates: [[f64; 2]; 2],
    pub counts: Option<[[u64; 2]; 2]>,
    pub window: Option<(f64, f64)>,
    pub n_listings: Option<usize>,
}

impl BookingLedger {
    pub fn from_rates(rates: [[f64; 2]; 2]) -> Self {
        BookingLedger {
            rates,
            counts: None,
            window: None,
            n_listings: None,
        }
    }

    /// Rates `counts / ((T1 − T0) · N)`.
    pub fn from_counts(counts: [[u64; 2]; 2], window: (f64, f64), n_listings: usize) -> Self {
        let norm = (window.1 - window.0) * n_listings as f64;
        let mut rates = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                rates[i][j] = counts[i][j] as f64 / norm;
            }
        }
        BookingLedger {
            rates,
            counts: Some(counts),
            window: Some(window),
            n_listings: Some(n_listings),
        }
    }

    #[inline]
    pub fn q(&self, i: usize, j: usize) -> f64 {
        self.rates[i][j]
    }

    pub fn total(&self) -> f64 {
        self.rates.iter().flatten().sum()
    }

    /// Cells `(i, j)` observed with fewer than [`SPARSE_CELL_BOOKINGS`] bookings.
    pub fn sparse_cells(&self) -> Vec<(usize, usize)> {
        match self.counts {
            None => Vec::new(),
            Some(c) => (0..2)
                .flat_map(|i| (0..2).map(move |j| (i, j)))
                .filter(|&(i, j)| c[i][j] < SPARSE_CELL_BOOKINGS)
                .collect(),
        }
    }

    /// Every rate multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.rates.iter_mut().flatten().for_each(|q| *q *= c);
        out
    }
}
