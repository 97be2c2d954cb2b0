use crate::error::{invalid, Error, Result};

/// Fractional ranks, 1 = largest value; tied values share the mean of the
/// positions they span.
#[derive(Debug, Clone, PartialEq)]
pub struct RankVector {
    ranks: Vec<f64>,
    has_ties: bool,
}

impl RankVector {
    pub fn ranks(&self) -> &[f64] {
        &self.ranks
    }

    pub fn has_ties(&self) -> bool {
        self.has_ties
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }
}

pub fn fractional_ranks(values: &[f64]) -> Result<RankVector> {
    if values.is_empty() {
        return Err(invalid("cannot rank an empty value set"));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut ranks = vec![0.0; values.len()];
    let mut has_ties = false;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        has_ties |= end - start > 1;
        // positions start+1 ..= end
        let shared = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = shared;
        }
        start = end;
    }
    Ok(RankVector { ranks, has_ties })
}

/// Spearman rank correlation. Without ties this is the closed form
/// `1 - 6Σd²/(n(n²-1))`; with ties it is the Pearson correlation of the ranks.
pub fn spearman_rho(a: &RankVector, b: &RankVector) -> Result<f64> {
    if a.len() != b.len() {
        return Err(invalid(format!("rank vectors differ in length: {} vs {}", a.len(), b.len())));
    }
    let n = a.len();
    if n < 2 {
        return Err(invalid("correlation needs at least two nodes"));
    }
    if a.has_ties || b.has_ties {
        return pearson(&a.ranks, &b.ranks);
    }
    let d2: f64 = a.ranks.iter().zip(&b.ranks).map(|(x, y)| (x - y).powi(2)).sum();
    let n = n as f64;
    Ok(1.0 - 6.0 * d2 / (n * (n * n - 1.0)))
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Ranks both value sets and correlates them.
pub fn rank_correlation(a: &[f64], b: &[f64]) -> Result<f64> {
    spearman_rho(&fractional_ranks(a)?, &fractional_ranks(b)?)
}
