use super::dataset::{ColumnKind, Dataset, DiscretizationPolicy, Rule, Transform};
use super::LearningError;

/// Median of a nonempty slice (mean of the middle pair for even lengths).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Applies each column's rule; transformed columns become categorical.
/// Values equal to a median or cut fall in the lower bin.
pub fn discretize(data: &Dataset, policy: &DiscretizationPolicy) -> Result<Dataset, LearningError> {
    let mut out = data.clone();
    let (columns, records, provenance) = out.parts_mut();
    for (ci, column) in columns.iter_mut().enumerate() {
        let Some(rule) = policy.rules.get(&column.name) else { continue };
        let numeric = || -> Result<Vec<f64>, LearningError> {
            if column.kind != ColumnKind::Numeric {
                return Err(LearningError::NonNumericColumn(column.name.clone()));
            }
            Ok(records.iter().map(|r| r[ci].parse::<f64>().expect("checked at ingestion")).collect())
        };
        match rule {
            Rule::Passthrough => {}
            Rule::MedianThreshold => {
                let values = numeric()?;
                if values.is_empty() {
                    continue;
                }
                let m = median(&values);
                let mut low = 0;
                for (r, v) in records.iter_mut().zip(&values) {
                    let label = if *v <= m { "low" } else { "high" };
                    low += usize::from(*v <= m);
                    r[ci] = label.to_string();
                }
                provenance.transforms.push(Transform::Median {
                    column: column.name.clone(),
                    median: m,
                    low,
                    high: values.len() - low,
                });
            }
            Rule::Thresholds { cuts, labels } => {
                if labels.len() != cuts.len() + 1 || cuts.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(LearningError::InvalidRule {
                        column: column.name.clone(),
                        reason: "cuts must increase strictly and there must be one more label than cuts".into(),
                    });
                }
                let values = numeric()?;
                for (r, v) in records.iter_mut().zip(&values) {
                    let bin = cuts.iter().take_while(|&&c| *v > c).count();
                    r[ci] = labels[bin].clone();
                }
                provenance.transforms.push(Transform::Thresholds { column: column.name.clone(), cuts: cuts.clone() });
            }
            Rule::LabelMap { map, .. } => {
                for r in records.iter_mut() {
                    let mapped = map.get(&r[ci]).or_else(|| {
                        // numeric sources may be written as 1 or 1.0
                        r[ci].parse::<f64>().ok().and_then(|x| map.iter().find(|(k, _)| k.parse::<f64>().ok() == Some(x)).map(|(_, v)| v))
                    });
                    match mapped {
                        Some(v) => r[ci] = v.clone(),
                        None => {
                            return Err(LearningError::UnmappedLabel { column: column.name.clone(), label: r[ci].clone() })
                        }
                    }
                }
                provenance.transforms.push(Transform::LabelMap { column: column.name.clone() });
            }
        }
        column.kind = ColumnKind::Categorical;
    }
    Ok(out)
}
