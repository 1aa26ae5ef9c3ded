//! Three-valued verdicts, structured test reports, and small fitting helpers.

use serde::{Deserialize, Serialize};

/// Outcome of a test that a finite computation cannot always settle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    True,
    False,
    Inconclusive,
}

impl Verdict {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::True
        } else {
            Verdict::False
        }
    }

    /// Conjunction: any False wins, then any Inconclusive.
    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::False, _) | (_, Verdict::False) => Verdict::False,
            (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => Verdict::Inconclusive,
            _ => Verdict::True,
        }
    }

    pub fn is_true(self) -> bool {
        self == Verdict::True
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::True => "true",
            Verdict::False => "false",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Least-squares line y = intercept + slope·x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(x, y)| (*x, *y))
        .collect();
    let n = pts.len();
    if n < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some(LineFit {
        slope,
        intercept: my - slope * mx,
        points: n,
    })
}

/// Fit of log y against log x over positive, finite pairs.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .unzip();
    fit_line(&lx, &ly)
}

/// Least squares for a small dense system: columns of `a` are basis values.
pub fn least_squares(a: &[Vec<f64>], y: &[f64]) -> Option<Vec<f64>> {
    let m = a.first()?.len();
    let mut ata = vec![vec![0.0; m]; m];
    let mut aty = vec![0.0; m];
    for (row, yi) in a.iter().zip(y) {
        for i in 0..m {
            aty[i] += row[i] * yi;
            for j in 0..m {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    // Gaussian elimination with partial pivoting.
    for col in 0..m {
        let piv = (col..m).max_by(|i, j| ata[*i][col].abs().total_cmp(&ata[*j][col].abs()))?;
        if ata[piv][col].abs() < 1e-300 {
            return None;
        }
        ata.swap(col, piv);
        aty.swap(col, piv);
        for r in col + 1..m {
            let f = ata[r][col] / ata[col][col];
            let (upper, lower) = ata.split_at_mut(r);
            for (x, y) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *x -= f * y;
            }
            aty[r] -= f * aty[col];
        }
    }
    let mut x = vec![0.0; m];
    for r in (0..m).rev() {
        let s: f64 = (r + 1..m).map(|c| ata[r][c] * x[c]).sum();
        x[r] = (aty[r] - s) / ata[r][r];
    }
    Some(x)
}

/// Structured outcome of a decay, mean, period, or membership test.
#[derive(Debug, Clone, Serialize)]
pub struct TestReport {
    pub test: String,
    pub verdict: Verdict,
    #[serde(with = "ext")]
    pub statistic: f64,
    pub tolerance: f64,
    /// (abscissa, value) pairs the verdict was read from.
    #[serde(serialize_with = "ext::pairs")]
    pub series: Vec<(f64, f64)>,
    pub fit: Option<LineFit>,
    pub notes: Vec<String>,
}

impl TestReport {
    pub fn new(test: &str, verdict: Verdict, statistic: f64, tolerance: f64) -> Self {
        TestReport {
            test: test.to_string(),
            verdict,
            statistic,
            tolerance,
            series: vec![],
            fit: None,
            notes: vec![],
        }
    }

    pub fn note(mut self, s: impl Into<String>) -> Self {
        self.notes.push(s.into());
        self
    }
}

/// Serde helpers writing non-finite floats as "inf", "-inf" or "nan".
pub mod ext {
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&label(*v))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(x),
            Raw::Str(s) => parse(&s).ok_or_else(|| serde::de::Error::custom(format!("not a number: {s}"))),
        }
    }

    pub fn label(v: f64) -> String {
        if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    }

    pub fn parse(s: &str) -> Option<f64> {
        match s.trim() {
            "inf" | "infinity" | "+inf" => Some(f64::INFINITY),
            "-inf" | "-infinity" => Some(f64::NEG_INFINITY),
            other => other.parse().ok(),
        }
    }

    /// Formats a float for CSV cells.
    pub fn cell(v: f64) -> String {
        if v.is_finite() {
            format!("{v}")
        } else {
            label(v)
        }
    }

    struct Ext(f64);

    impl serde::Serialize for Ext {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            serialize(&self.0, s)
        }
    }

    pub fn vec<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&Ext(*x))?;
        }
        seq.end()
    }

    pub fn pairs<S: Serializer>(v: &[(f64, f64)], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for (a, b) in v {
            seq.serialize_element(&(Ext(*a), Ext(*b)))?;
        }
        seq.end()
    }
}
