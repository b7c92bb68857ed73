use crate::response::{db_to_power, POWER_FLOOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Extremum {
    #[default]
    Peak,
    Dip,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakOptions {
    pub min_prominence_db: f64,
    pub extremum: Extremum,
}

impl Default for PeakOptions {
    fn default() -> Self {
        Self {
            min_prominence_db: 10.0,
            extremum: Extremum::Peak,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub f: f64,
    pub height_db: f64,
    /// Full width between the −3 dB crossings (3 dB above the floor for dips).
    pub width_estimate: f64,
    pub index: usize,
    pub prominence_db: f64,
}

/// Local extrema of a dB trace whose prominence reaches the threshold,
/// sorted by frequency.
///
/// A plateau of equal samples counts once, at its lowest-frequency index.
/// The end samples are never extrema.
pub fn find_peaks(f: &[f64], s21_db: &[f64], options: &PeakOptions) -> Vec<Peak> {
    let n = f.len().min(s21_db.len());
    if n < 3 {
        return Vec::new();
    }
    let sign = match options.extremum {
        Extremum::Peak => 1.0,
        Extremum::Dip => -1.0,
    };
    let y: Vec<f64> = s21_db[..n].iter().map(|v| sign * v).collect();

    let mut peaks = Vec::new();
    let mut i = 1;
    while i < n - 1 {
        if y[i] > y[i - 1] {
            let mut k = i;
            while k + 1 < n && y[k + 1] == y[i] {
                k += 1;
            }
            if k + 1 < n && y[k + 1] < y[i] {
                let prominence = prominence(&y, i, k);
                if prominence >= options.min_prominence_db {
                    peaks.push(Peak {
                        f: f[i],
                        height_db: s21_db[i],
                        width_estimate: width_at(f, &y, i, k, 3.0),
                        index: i,
                        prominence_db: prominence,
                    });
                }
            }
            i = k + 1;
        } else {
            i += 1;
        }
    }
    peaks
}

/// Height above the higher of the two bases reached before a taller sample.
fn prominence(y: &[f64], start: usize, end: usize) -> f64 {
    let h = y[start];
    let mut left_min = h;
    for v in y[..start].iter().rev() {
        if *v > h {
            break;
        }
        left_min = left_min.min(*v);
    }
    let mut right_min = h;
    for v in &y[end + 1..] {
        if *v > h {
            break;
        }
        right_min = right_min.min(*v);
    }
    h - left_min.max(right_min)
}

fn width_at(f: &[f64], y: &[f64], start: usize, end: usize, drop: f64) -> f64 {
    let level = y[start] - drop;
    let cross = |a: usize, b: usize| {
        let t = (y[a] - level) / (y[a] - y[b]);
        f[a] + t * (f[b] - f[a])
    };
    let left = (1..=start).rev().find(|&j| y[j - 1] < level).map(|j| cross(j, j - 1));
    let right = (end..y.len() - 1).find(|&j| y[j + 1] < level).map(|j| cross(j, j + 1));
    let centre = 0.5 * (f[start] + f[end]);
    let width = match (left, right) {
        (Some(l), Some(r)) => r - l,
        (Some(l), None) => 2.0 * (centre - l),
        (None, Some(r)) => 2.0 * (r - centre),
        (None, None) => f[f.len() - 1] - f[0],
    };
    let step = (f[f.len() - 1] - f[0]) / (f.len() - 1) as f64;
    width.max(step)
}

/// Centred moving average over `bins` samples, taken in linear power.
///
/// Near the ends the window shrinks symmetrically. `bins <= 1` returns the
/// input unchanged.
pub fn smooth_db(s21_db: &[f64], bins: usize) -> Vec<f64> {
    let half = bins / 2;
    if half == 0 {
        return s21_db.to_vec();
    }
    let p: Vec<f64> = s21_db.iter().map(|&v| db_to_power(v)).collect();
    let n = p.len();
    (0..n)
        .map(|i| {
            let h = half.min(i).min(n - 1 - i);
            // Direct sums: a running prefix would lose the faint wings.
            let mean = p[i - h..=i + h].iter().sum::<f64>() / (2 * h + 1) as f64;
            10.0 * mean.max(POWER_FLOOR).log10()
        })
        .collect()
}
