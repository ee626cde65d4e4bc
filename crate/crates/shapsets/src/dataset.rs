//! Tabular datasets, subset partitions, and coalition extraction.
//!
//! A [`Dataset`] is an N×J feature matrix with a response vector, stable row
//! identifiers, and optional auxiliary columns (e.g. a sensitive attribute)
//! that are stored but never fed to models. A [`Partition`] assigns every row
//! to one of K disjoint, exhaustive subsets; [`coalition_data`] extracts the
//! rows belonging to a coalition of subsets in original order.
//!
//! Everything here is immutable after construction and safe to share across
//! threads; mutating operations return copies.

use std::path::Path;
use std::sync::Arc;

use crate::coalition::{Coalition, MAX_SUBSETS};
use crate::error::{Error, Result};
use crate::fingerprint::Fingerprint;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    feature_names: Vec<String>,
    response_name: String,
    /// Row-major N×J.
    features: Vec<f64>,
    response: Vec<f64>,
    row_ids: Vec<u64>,
    /// Auxiliary columns, excluded from the feature matrix.
    aux: Vec<(String, Vec<f64>)>,
}

impl Dataset {
    pub fn new(
        feature_names: Vec<String>,
        features: Vec<f64>,
        response_name: impl Into<String>,
        response: Vec<f64>,
        row_ids: Vec<u64>,
        aux: Vec<(String, Vec<f64>)>,
    ) -> Result<Self> {
        let response_name = response_name.into();
        let j = feature_names.len();
        if j == 0 {
            return Err(Error::Schema("at least one feature column required".into()));
        }
        let n = response.len();
        if features.len() != n * j {
            return Err(Error::Schema(format!(
                "feature matrix has {} values, expected {} rows x {} columns",
                features.len(),
                n,
                j
            )));
        }
        if row_ids.len() != n {
            return Err(Error::Schema(format!(
                "{} row ids for {} rows",
                row_ids.len(),
                n
            )));
        }
        let mut names: Vec<&str> = feature_names.iter().map(String::as_str).collect();
        names.push(response_name.as_str());
        for (name, col) in &aux {
            names.push(name.as_str());
            if col.len() != n {
                return Err(Error::Schema(format!(
                    "aux column '{}' has {} values for {} rows",
                    name,
                    col.len(),
                    n
                )));
            }
        }
        let mut sorted = names.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Schema("column names must be unique".into()));
        }
        let mut ids = row_ids.clone();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Schema("row ids must be unique".into()));
        }
        if features.iter().any(|v| !v.is_finite()) || response.iter().any(|v| !v.is_finite()) {
            return Err(Error::Schema(
                "non-finite value in features or response".into(),
            ));
        }
        if aux.iter().any(|(_, c)| c.iter().any(|v| !v.is_finite())) {
            return Err(Error::Schema("non-finite value in aux column".into()));
        }
        Ok(Dataset {
            feature_names,
            response_name,
            features,
            response,
            row_ids,
            aux,
        })
    }

    /// Convenience constructor for fixtures: rows of (features, response),
    /// row ids 1..=N, no aux columns.
    pub fn from_rows(feature_names: &[&str], rows: &[(Vec<f64>, f64)]) -> Result<Self> {
        let j = feature_names.len();
        let mut features = Vec::with_capacity(rows.len() * j);
        let mut response = Vec::with_capacity(rows.len());
        for (x, y) in rows {
            if x.len() != j {
                return Err(Error::Schema(format!(
                    "row has {} features, expected {}",
                    x.len(),
                    j
                )));
            }
            features.extend_from_slice(x);
            response.push(*y);
        }
        let ids = (1..=rows.len() as u64).collect();
        Dataset::new(
            feature_names.iter().map(|s| s.to_string()).collect(),
            features,
            "y",
            response,
            ids,
            Vec::new(),
        )
    }

    pub fn n(&self) -> usize {
        self.response.len()
    }

    pub fn j(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn response_name(&self) -> &str {
        &self.response_name
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let j = self.j();
        &self.features[i * j..(i + 1) * j]
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    pub fn row_ids(&self) -> &[u64] {
        &self.row_ids
    }

    pub fn aux_names(&self) -> Vec<&str> {
        self.aux.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn aux_column(&self, name: &str) -> Option<&[f64]> {
        self.aux
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c.as_slice())
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    /// Copy of a feature column.
    pub fn feature_column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.feature_index(name)?;
        Some((0..self.n()).map(|i| self.row(i)[idx]).collect())
    }

    /// Feature or aux column by name; features take precedence.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        self.feature_column(name)
            .or_else(|| self.aux_column(name).map(<[f64]>::to_vec))
    }

    pub fn row_index_of_id(&self, id: u64) -> Option<usize> {
        self.row_ids.iter().position(|&r| r == id)
    }

    pub fn response_mean(&self) -> f64 {
        if self.response.is_empty() {
            return 0.0;
        }
        self.response.iter().sum::<f64>() / self.n() as f64
    }

    /// New dataset with the listed rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Dataset {
        let j = self.j();
        let mut features = Vec::with_capacity(indices.len() * j);
        let mut response = Vec::with_capacity(indices.len());
        let mut row_ids = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            response.push(self.response[i]);
            row_ids.push(self.row_ids[i]);
        }
        let aux = self
            .aux
            .iter()
            .map(|(name, col)| (name.clone(), indices.iter().map(|&i| col[i]).collect()))
            .collect();
        Dataset {
            feature_names: self.feature_names.clone(),
            response_name: self.response_name.clone(),
            features,
            response,
            row_ids,
            aux,
        }
    }

    /// Copy with a replaced response vector (same length).
    pub(crate) fn with_response(&self, response: Vec<f64>) -> Dataset {
        debug_assert_eq!(response.len(), self.n());
        Dataset {
            response,
            ..self.clone()
        }
    }

    /// Stable content hash over schema, values and row ids.
    pub fn fingerprint(&self) -> u64 {
        let mut fp = Fingerprint::new();
        for name in &self.feature_names {
            fp.write_str(name);
        }
        fp.write_str(&self.response_name);
        for v in &self.features {
            fp.write_f64(*v);
        }
        for v in &self.response {
            fp.write_f64(*v);
        }
        for id in &self.row_ids {
            fp.write_u64(*id);
        }
        for (name, col) in &self.aux {
            fp.write_str(name);
            for v in col {
                fp.write_f64(*v);
            }
        }
        fp.finish()
    }
}

/// Assignment of training rows to K disjoint, exhaustive subsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    k: usize,
    /// 0-based subset index per row.
    assignment: Vec<usize>,
    labels: Vec<String>,
}

impl Partition {
    pub fn new(k: usize, assignment: Vec<usize>, labels: Vec<String>) -> Result<Self> {
        if k == 0 {
            return Err(Error::Argument("subset count must be positive".into()));
        }
        if k > MAX_SUBSETS {
            return Err(Error::Capacity(format!(
                "{k} subsets exceed the coalition bitmask bound of {MAX_SUBSETS}"
            )));
        }
        if labels.len() != k {
            return Err(Error::Argument(format!(
                "{} labels for {} subsets",
                labels.len(),
                k
            )));
        }
        let mut seen = vec![false; k];
        for &a in &assignment {
            if a >= k {
                return Err(Error::Argument(format!(
                    "subset index {} out of range 1..={}",
                    a + 1,
                    k
                )));
            }
            seen[a] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::Argument(format!(
                "subset {} is empty",
                missing + 1
            )));
        }
        Ok(Partition {
            k,
            assignment,
            labels,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    /// 0-based subset index per row.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn subset_of_row(&self, row: usize) -> usize {
        self.assignment[row]
    }

    /// Row indices of one subset, in original order.
    pub fn subset_rows(&self, subset: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, &a)| a == subset)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn subset_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.k];
        for &a in &self.assignment {
            sizes[a] += 1;
        }
        sizes
    }

    pub fn fingerprint(&self) -> u64 {
        let mut fp = Fingerprint::new();
        fp.write_usize(self.k);
        for &a in &self.assignment {
            fp.write_usize(a);
        }
        for l in &self.labels {
            fp.write_str(l);
        }
        fp.finish()
    }

    /// Write as CSV: `row_id,subset,label` with 1-based subset indices.
    pub fn write_csv(&self, ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path.as_ref())?;
        w.write_record(["row_id", "subset", "label"])?;
        for (i, &a) in self.assignment.iter().enumerate() {
            w.write_record([
                ds.row_ids()[i].to_string(),
                (a + 1).to_string(),
                self.labels[a].clone(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Read a partition CSV and align it with `ds` by row id.
    pub fn read_csv(path: impl AsRef<Path>, ds: &Dataset) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path.as_ref())?;
        let headers = r.headers()?.clone();
        let col = |name: &str| -> Result<usize> {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Schema(format!("partition csv missing column '{name}'")))
        };
        let id_col = col("row_id")?;
        let subset_col = col("subset")?;
        let label_col = headers.iter().position(|h| h == "label");

        let mut by_id: std::collections::HashMap<u64, (usize, Option<String>)> =
            std::collections::HashMap::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let id: u64 = rec
                .get(id_col)
                .unwrap_or_default()
                .parse()
                .map_err(|e| Error::Parse {
                    row: line + 1,
                    column: "row_id".into(),
                    message: format!("{e}"),
                })?;
            let subset: usize = rec
                .get(subset_col)
                .unwrap_or_default()
                .parse()
                .map_err(|e| Error::Parse {
                    row: line + 1,
                    column: "subset".into(),
                    message: format!("{e}"),
                })?;
            if subset == 0 {
                return Err(Error::Parse {
                    row: line + 1,
                    column: "subset".into(),
                    message: "subset indices are 1-based".into(),
                });
            }
            let label = label_col.and_then(|c| rec.get(c).map(str::to_string));
            by_id.insert(id, (subset - 1, label));
        }

        let mut assignment = Vec::with_capacity(ds.n());
        let mut k = 0usize;
        for &id in ds.row_ids() {
            let (subset, _) = by_id
                .get(&id)
                .ok_or_else(|| Error::Schema(format!("partition csv has no row for id {id}")))?;
            assignment.push(*subset);
            k = k.max(subset + 1);
        }
        let mut labels: Vec<String> = (1..=k).map(|i| i.to_string()).collect();
        for (subset, label) in by_id.values() {
            if let Some(l) = label {
                if *subset < k {
                    labels[*subset] = l.clone();
                }
            }
        }
        Partition::new(k, assignment, labels)
    }
}

/// Load a dataset from CSV. The first row is a mandatory header; all cells
/// are parsed as `f64` with `.` as the decimal separator. Row ids are the
/// 1-based data row numbers.
///
/// `feature_cols` defaults to every column except the response and aux
/// columns, in header order.
pub fn load_csv(
    path: impl AsRef<Path>,
    response_col: &str,
    feature_cols: Option<&[String]>,
    aux_cols: Option<&[String]>,
) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();

    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("column '{name}' not found in {path:?}")))
    };

    let response_idx = find(response_col)?;
    let aux_names: Vec<String> = aux_cols.map(<[String]>::to_vec).unwrap_or_default();
    let aux_idx: Vec<usize> = aux_names
        .iter()
        .map(|n| find(n))
        .collect::<Result<Vec<_>>>()?;

    let feature_names: Vec<String> = match feature_cols {
        Some(cols) => cols.to_vec(),
        None => headers
            .iter()
            .filter(|h| h.as_str() != response_col && !aux_names.iter().any(|a| a == *h))
            .cloned()
            .collect(),
    };
    let feature_idx: Vec<usize> = feature_names
        .iter()
        .map(|n| find(n))
        .collect::<Result<Vec<_>>>()?;
    if feature_names.is_empty() {
        return Err(Error::Schema(format!(
            "no feature columns in {path:?} after removing response and aux"
        )));
    }

    let parse_cell = |row: usize, col: &str, raw: &str| -> Result<f64> {
        let v: f64 = raw.parse().map_err(|e| Error::Parse {
            row,
            column: col.to_string(),
            message: format!("{e}"),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse {
                row,
                column: col.to_string(),
                message: format!("non-finite value {raw}"),
            });
        }
        Ok(v)
    };

    let mut features = Vec::new();
    let mut response = Vec::new();
    let mut aux: Vec<(String, Vec<f64>)> =
        aux_names.iter().map(|n| (n.clone(), Vec::new())).collect();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let row = line + 1;
        for (&idx, name) in feature_idx.iter().zip(&feature_names) {
            features.push(parse_cell(row, name, record.get(idx).unwrap_or_default())?);
        }
        response.push(parse_cell(
            row,
            response_col,
            record.get(response_idx).unwrap_or_default(),
        )?);
        for (slot, (&idx, name)) in aux.iter_mut().zip(aux_idx.iter().zip(&aux_names)) {
            slot.1
                .push(parse_cell(row, name, record.get(idx).unwrap_or_default())?);
        }
    }
    if response.is_empty() {
        return Err(Error::EmptyInput(format!("{path:?} has no data rows")));
    }
    let ids = (1..=response.len() as u64).collect();
    Dataset::new(feature_names, features, response_col, response, ids, aux)
}

/// Write a dataset (features, response, aux columns) as CSV.
pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref())?;
    let mut header: Vec<&str> = ds.feature_names().iter().map(String::as_str).collect();
    header.push(ds.response_name());
    let aux_names = ds.aux_names();
    header.extend(aux_names.iter());
    w.write_record(&header)?;
    let mut record: Vec<String> = Vec::with_capacity(header.len());
    for i in 0..ds.n() {
        record.clear();
        record.extend(ds.row(i).iter().map(|v| format_value(*v)));
        record.push(format_value(ds.response()[i]));
        for name in &aux_names {
            record.push(format_value(ds.aux_column(name).unwrap()[i]));
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

fn format_value(v: f64) -> String {
    // Ryu-style shortest round-trip representation via the standard formatter.
    format!("{v}")
}

/// Split rows into K contiguous index blocks; sizes differ by at most one,
/// with earlier blocks taking the remainder.
pub fn partition_blocks(ds: &Dataset, k: usize) -> Result<Partition> {
    block_assignment(ds.n(), k, (0..ds.n()).collect())
}

/// Sort rows by a feature (ties broken by original row order), then split
/// into K blocks as in [`partition_blocks`]; subset 1 holds the smallest
/// values.
pub fn partition_quantiles(ds: &Dataset, feature: &str, k: usize) -> Result<Partition> {
    let column = ds
        .column(feature)
        .ok_or_else(|| Error::Schema(format!("unknown feature '{feature}'")))?;
    let mut order: Vec<usize> = (0..ds.n()).collect();
    order.sort_by(|&a, &b| column[a].partial_cmp(&column[b]).unwrap().then(a.cmp(&b)));
    block_assignment(ds.n(), k, order)
}

fn block_assignment(n: usize, k: usize, order: Vec<usize>) -> Result<Partition> {
    if k < 1 || k > n {
        return Err(Error::Argument(format!(
            "subset count {k} out of range 1..={n}"
        )));
    }
    let base = n / k;
    let remainder = n % k;
    let mut assignment = vec![0usize; n];
    let mut pos = 0usize;
    for subset in 0..k {
        let size = base + usize::from(subset < remainder);
        for _ in 0..size {
            assignment[order[pos]] = subset;
            pos += 1;
        }
    }
    let labels = (1..=k).map(|i| i.to_string()).collect();
    Partition::new(k, assignment, labels)
}

/// One subset per distinct value of a (feature or aux) column; labels are the
/// stringified values, ascending.
pub fn partition_category(ds: &Dataset, column: &str) -> Result<Partition> {
    let values = ds
        .column(column)
        .ok_or_else(|| Error::Schema(format!("unknown column '{column}'")))?;
    let mut distinct = values.clone();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    if distinct.len() > MAX_SUBSETS {
        return Err(Error::Cardinality(format!(
            "column '{}' has {} distinct values, more than the {} supported by the \
             coalition bitmask; consider quantile partitioning",
            column,
            distinct.len(),
            MAX_SUBSETS
        )));
    }
    let assignment = values
        .iter()
        .map(|v| distinct.iter().position(|d| d == v).unwrap())
        .collect();
    let labels = distinct.iter().map(|v| format_value(*v)).collect();
    Partition::new(distinct.len(), assignment, labels)
}

/// Rows whose subset is in `coalition`, original order preserved. The empty
/// coalition yields an empty dataset.
pub fn coalition_data(ds: &Dataset, p: &Partition, coalition: Coalition) -> Result<Dataset> {
    if !coalition.fits(p.k()) {
        return Err(Error::Argument(format!(
            "coalition {} has members outside 1..={}",
            coalition,
            p.k()
        )));
    }
    let indices: Vec<usize> = p
        .assignment()
        .iter()
        .enumerate()
        .filter(|(_, &a)| coalition.contains(a))
        .map(|(i, _)| i)
        .collect();
    Ok(ds.select_rows(&indices))
}

/// Copy of `ds` with the responses of the listed rows replaced.
pub fn corrupt_response(ds: &Dataset, row_ids: &[u64], new_values: &[f64]) -> Result<Dataset> {
    if row_ids.len() != new_values.len() {
        return Err(Error::Argument(format!(
            "{} row ids but {} replacement values",
            row_ids.len(),
            new_values.len()
        )));
    }
    let mut response = ds.response().to_vec();
    for (&id, &v) in row_ids.iter().zip(new_values) {
        let idx = ds
            .row_index_of_id(id)
            .ok_or_else(|| Error::Argument(format!("unknown row id {id}")))?;
        if !v.is_finite() {
            return Err(Error::Argument(format!(
                "replacement for row {id} is not finite"
            )));
        }
        response[idx] = v;
    }
    Ok(ds.with_response(response))
}

/// Center the response at zero; returns the centered copy and the removed
/// mean.
pub fn center_response(ds: &Dataset) -> Result<(Dataset, f64)> {
    if ds.n() == 0 {
        return Err(Error::EmptyInput("cannot center an empty dataset".into()));
    }
    let offset = ds.response_mean();
    let response = ds.response().iter().map(|y| y - offset).collect();
    Ok((ds.with_response(response), offset))
}

/// Bit-wise equality of two subsets' feature and response values, row for
/// row after extraction. Row ids are ignored: duplicated subsets carry fresh
/// ids by construction.
pub fn subsets_identical(ds: &Dataset, p: &Partition, a: usize, b: usize) -> bool {
    let rows_a = p.subset_rows(a);
    let rows_b = p.subset_rows(b);
    if rows_a.len() != rows_b.len() {
        return false;
    }
    rows_a.iter().zip(&rows_b).all(|(&ia, &ib)| {
        ds.response()[ia].to_bits() == ds.response()[ib].to_bits()
            && ds
                .row(ia)
                .iter()
                .zip(ds.row(ib))
                .all(|(x, y)| x.to_bits() == y.to_bits())
    })
}

/// All pairs (a, b), a < b, of element-wise identical subsets.
pub fn detect_identical_subsets(ds: &Dataset, p: &Partition) -> Vec<(usize, usize)> {
    let k = p.k();
    let mut pairs = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            if subsets_identical(ds, p, a, b) {
                pairs.push((a, b));
            }
        }
    }
    pairs
}

/// Shared handles used by the game and estimator layers.
pub type SharedDataset = Arc<Dataset>;
pub type SharedPartition = Arc<Partition>;
