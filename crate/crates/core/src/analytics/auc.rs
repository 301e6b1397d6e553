use super::AnalyticsError;

/// Area under the ROC curve via the Mann-Whitney statistic:
/// `P(score_pos > score_neg) + P(tie) / 2`.
pub fn auc(scores: &[(f64, bool)]) -> Result<f64, AnalyticsError> {
    if scores.iter().any(|(s, _)| s.is_nan()) {
        return Err(AnalyticsError::DegenerateInput("NaN score".into()));
    }
    let n_pos = scores.iter().filter(|(_, l)| *l).count();
    let n_neg = scores.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(AnalyticsError::DegenerateInput("both labels must be present".into()));
    }
    let mut sorted: Vec<(f64, bool)> = scores.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));

    // sum of midranks of positives (1-based)
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1].0 == sorted[i].0 {
            j += 1;
        }
        let midrank = (i + j) as f64 / 2.0 + 1.0;
        let pos_in_group = sorted[i..=j].iter().filter(|(_, l)| *l).count();
        rank_sum += midrank * pos_in_group as f64;
        i = j + 1;
    }
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}
