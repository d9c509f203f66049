//! Runtime algorithm-selection scenarios and the ASlib directory loader.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use log::warn;

use crate::arff::{self, Attribute, AttributeKind, RelationTable, Value};
use crate::error::{Error, Result};

/// Raw scenario contents before validation. Matrices are row-major, one row per instance.
#[derive(Debug, Clone)]
pub struct ScenarioParts {
    pub name: String,
    pub instance_ids: Vec<String>,
    pub algorithm_ids: Vec<String>,
    pub runtime: Vec<Vec<f64>>,
    pub solved: Vec<Vec<bool>>,
    pub feature_names: Vec<String>,
    pub features: Vec<Vec<Option<f64>>>,
    pub feature_cost: Option<Vec<f64>>,
    pub cutoff: f64,
}

/// A runtime scenario: instances × algorithms performance plus instances × features.
///
/// Algorithms are kept in lexicographic id order, so every "ties go to the
/// lexicographically smallest algorithm" rule reduces to "ties go to the lower index".
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    name: String,
    instance_ids: Vec<String>,
    algorithm_ids: Vec<String>,
    runtime: Vec<f64>,
    solved: Vec<bool>,
    feature_names: Vec<String>,
    features: Vec<Option<f64>>,
    feature_cost: Option<Vec<f64>>,
    cutoff: f64,
}

fn ensure_unique(ids: &[String], what: &str) -> Result<()> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::InvalidScenario(format!("duplicate {what} `{id}`")));
        }
    }
    Ok(())
}

impl Scenario {
    pub fn new(parts: ScenarioParts) -> Result<Self> {
        let ScenarioParts {
            name,
            instance_ids,
            algorithm_ids,
            runtime,
            solved,
            feature_names,
            features,
            feature_cost,
            cutoff,
        } = parts;

        if !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err(Error::InvalidScenario(format!(
                "cutoff time must be positive, got {cutoff}"
            )));
        }
        if algorithm_ids.len() < 2 {
            return Err(Error::InvalidScenario(
                "a scenario needs at least two algorithms".into(),
            ));
        }
        ensure_unique(&instance_ids, "instance id")?;
        ensure_unique(&algorithm_ids, "algorithm id")?;
        ensure_unique(&feature_names, "feature name")?;

        let n = instance_ids.len();
        let m = algorithm_ids.len();
        let d = feature_names.len();
        if runtime.len() != n || solved.len() != n || features.len() != n {
            return Err(Error::InvalidScenario(
                "matrix row count does not match the instance count".into(),
            ));
        }
        if let Some(costs) = &feature_cost {
            if costs.len() != n {
                return Err(Error::InvalidScenario(
                    "feature cost count does not match the instance count".into(),
                ));
            }
            if costs.iter().any(|c| !(*c >= 0.0 && c.is_finite())) {
                return Err(Error::InvalidScenario("negative feature cost".into()));
            }
        }

        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| algorithm_ids[a].cmp(&algorithm_ids[b]));

        let mut flat_runtime = Vec::with_capacity(n * m);
        let mut flat_solved = Vec::with_capacity(n * m);
        for (i, (rt_row, ok_row)) in runtime.iter().zip(&solved).enumerate() {
            if rt_row.len() != m || ok_row.len() != m {
                return Err(Error::InvalidScenario(format!(
                    "instance `{}` has a ragged performance row",
                    instance_ids[i]
                )));
            }
            for &a in &order {
                let t = rt_row[a];
                if !(t >= 0.0) {
                    return Err(Error::InvalidScenario(format!(
                        "invalid runtime {t} for instance `{}` and algorithm `{}`",
                        instance_ids[i], algorithm_ids[a]
                    )));
                }
                flat_runtime.push(t);
                // a run reported as successful beyond the cutoff does not count
                flat_solved.push(ok_row[a] && t <= cutoff);
            }
        }

        let mut flat_features = Vec::with_capacity(n * d);
        for (i, row) in features.iter().enumerate() {
            if row.len() != d {
                return Err(Error::InvalidScenario(format!(
                    "instance `{}` has {} feature values, expected {d}",
                    instance_ids[i],
                    row.len()
                )));
            }
            for v in row {
                if let Some(x) = v {
                    if !x.is_finite() {
                        return Err(Error::InvalidScenario(format!(
                            "non-finite feature value for instance `{}`",
                            instance_ids[i]
                        )));
                    }
                }
                flat_features.push(*v);
            }
        }

        let algorithm_ids = order.iter().map(|&a| algorithm_ids[a].clone()).collect();
        Ok(Scenario {
            name,
            instance_ids,
            algorithm_ids,
            runtime: flat_runtime,
            solved: flat_solved,
            feature_names,
            features: flat_features,
            feature_cost,
            cutoff,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn instance_ids(&self) -> &[String] {
        &self.instance_ids
    }

    pub fn algorithm_ids(&self) -> &[String] {
        &self.algorithm_ids
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n_instances(&self) -> usize {
        self.instance_ids.len()
    }

    pub fn n_algorithms(&self) -> usize {
        self.algorithm_ids.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// The timeout τ in seconds.
    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// Recorded runtime, which may exceed τ or be meaningless for unsolved runs.
    pub fn runtime(&self, instance: usize, algorithm: usize) -> f64 {
        self.runtime[instance * self.n_algorithms() + algorithm]
    }

    pub fn is_solved(&self, instance: usize, algorithm: usize) -> bool {
        self.solved[instance * self.n_algorithms() + algorithm]
    }

    /// Runtime used by every metric: the recorded runtime when solved, τ otherwise.
    pub fn effective_runtime(&self, instance: usize, algorithm: usize) -> f64 {
        if self.is_solved(instance, algorithm) {
            self.runtime(instance, algorithm)
        } else {
            self.cutoff
        }
    }

    pub fn par(&self, instance: usize, algorithm: usize, penalty: f64) -> f64 {
        crate::metrics::par_value(
            self.runtime(instance, algorithm),
            self.is_solved(instance, algorithm),
            self.cutoff,
            penalty,
        )
    }

    pub fn feature(&self, instance: usize, feature: usize) -> Option<f64> {
        self.features[instance * self.n_features() + feature]
    }

    pub fn feature_row(&self, instance: usize) -> &[Option<f64>] {
        let d = self.n_features();
        &self.features[instance * d..(instance + 1) * d]
    }

    pub fn has_feature_cost(&self) -> bool {
        self.feature_cost.is_some()
    }

    /// Feature extraction cost of an instance, zero when the scenario records none.
    pub fn feature_cost(&self, instance: usize) -> f64 {
        self.feature_cost.as_ref().map_or(0.0, |c| c[instance])
    }

    pub fn instance_index(&self, id: &str) -> Option<usize> {
        self.instance_ids.iter().position(|x| x == id)
    }

    pub fn algorithm_index(&self, id: &str) -> Option<usize> {
        self.algorithm_ids.iter().position(|x| x == id)
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|x| x == name)
    }

    /// Whether at least one algorithm solves the instance.
    pub fn is_solvable(&self, instance: usize) -> bool {
        (0..self.n_algorithms()).any(|a| self.is_solved(instance, a))
    }

    /// Fastest solving algorithm of an instance, ties to the lower index.
    pub fn best_algorithm(&self, instance: usize) -> Option<usize> {
        let mut best: Option<usize> = None;
        for a in 0..self.n_algorithms() {
            if !self.is_solved(instance, a) {
                continue;
            }
            match best {
                Some(b) if self.runtime(instance, b) <= self.runtime(instance, a) => {}
                _ => best = Some(a),
            }
        }
        best
    }

    /// Decomposes the scenario back into its parts.
    pub fn to_parts(&self) -> ScenarioParts {
        let n = self.n_instances();
        let m = self.n_algorithms();
        ScenarioParts {
            name: self.name.clone(),
            instance_ids: self.instance_ids.clone(),
            algorithm_ids: self.algorithm_ids.clone(),
            runtime: (0..n)
                .map(|i| (0..m).map(|a| self.runtime(i, a)).collect())
                .collect(),
            solved: (0..n)
                .map(|i| (0..m).map(|a| self.is_solved(i, a)).collect())
                .collect(),
            feature_names: self.feature_names.clone(),
            features: (0..n).map(|i| self.feature_row(i).to_vec()).collect(),
            feature_cost: self.feature_cost.clone(),
            cutoff: self.cutoff,
        }
    }
}

/// Instances of `subset` solved by at least one algorithm.
pub fn discard_unsolvable(scenario: &Scenario, subset: &[usize]) -> Vec<usize> {
    subset
        .iter()
        .copied()
        .filter(|&i| scenario.is_solvable(i))
        .collect()
}

/// `key: value` pairs of an ASlib `description.txt`. List-valued keys keep their
/// `- item` entries joined with commas.
pub fn parse_description(text: &str) -> HashMap<String, String> {
    let mut out: HashMap<String, String> = HashMap::new();
    let mut last_key: Option<String> = None;
    for line in text.lines() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(item) = trimmed.strip_prefix('-') {
            if let Some(key) = &last_key {
                let entry = out.entry(key.clone()).or_default();
                if !entry.is_empty() {
                    entry.push(',');
                }
                entry.push_str(item.trim());
            }
            continue;
        }
        if let Some((key, value)) = trimmed.split_once(':') {
            let key = key.trim().to_string();
            let value = value.trim().trim_matches(|c| c == '"' || c == '\'');
            out.insert(key.clone(), value.to_string());
            last_key = Some(key);
        }
    }
    out
}

fn read_table(path: &Path) -> Result<RelationTable> {
    let text = fs::read_to_string(path)?;
    arff::parse_arff(&text).map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

fn require(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::MissingFile(path.to_path_buf()))
    }
}

fn cell_text(value: &Value) -> Option<String> {
    match value {
        Value::Text(s) => Some(s.clone()),
        Value::Number(x) => Some(x.to_string()),
        Value::Missing => None,
    }
}

fn required_column(table: &RelationTable, name: &str) -> Result<usize> {
    table.column(name).ok_or_else(|| {
        Error::InvalidScenario(format!(
            "relation `{}` has no `{name}` attribute",
            table.relation
        ))
    })
}

/// Loads an ASlib runtime scenario directory.
pub fn load_scenario(dir: &Path) -> Result<Scenario> {
    let description_path = dir.join("description.txt");
    let runs_path = dir.join("algorithm_runs.arff");
    let features_path = dir.join("feature_values.arff");
    let costs_path = dir.join("feature_costs.arff");
    require(&description_path)?;
    require(&runs_path)?;
    require(&features_path)?;

    let description = parse_description(&fs::read_to_string(&description_path)?);
    let cutoff: f64 = description
        .get("algorithm_cutoff_time")
        .ok_or_else(|| Error::InvalidScenario("description lacks algorithm_cutoff_time".into()))?
        .parse()
        .map_err(|_| Error::InvalidScenario("unparseable algorithm_cutoff_time".into()))?;
    if !(cutoff > 0.0) {
        return Err(Error::InvalidScenario(format!(
            "algorithm_cutoff_time must be positive, got {cutoff}"
        )));
    }
    let name = description
        .get("scenario_id")
        .cloned()
        .or_else(|| dir.file_name().map(|s| s.to_string_lossy().into_owned()))
        .unwrap_or_else(|| "scenario".into());

    // performance runs
    let runs = read_table(&runs_path)?;
    let inst_col = required_column(&runs, "instance_id")?;
    let alg_col = required_column(&runs, "algorithm")?;
    let status_col = required_column(&runs, "runstatus")?;
    let rep_col = runs.column("repetition");
    let measure = description
        .get("performance_measures")
        .and_then(|m| m.split(',').next().map(|s| s.trim().to_string()));
    let runtime_col = measure
        .as_deref()
        .and_then(|m| runs.column(m))
        .or_else(|| runs.column("runtime"))
        .or_else(|| {
            runs.attributes
                .iter()
                .enumerate()
                .position(|(idx, a)| a.kind == AttributeKind::Numeric && Some(idx) != rep_col)
        })
        .ok_or_else(|| Error::InvalidScenario("algorithm runs carry no runtime column".into()))?;

    let mut run_instances: Vec<String> = Vec::new();
    let mut algorithms: Vec<String> = Vec::new();
    let mut seen_algorithms = HashSet::new();
    let mut seen_instances = HashSet::new();
    let mut cells: HashMap<(String, String), (Option<f64>, bool)> = HashMap::new();
    for row in &runs.rows {
        let instance = cell_text(&row[inst_col])
            .ok_or_else(|| Error::InvalidScenario("run without instance id".into()))?;
        let algorithm = cell_text(&row[alg_col])
            .ok_or_else(|| Error::InvalidScenario("run without algorithm id".into()))?;
        let solved = row[status_col]
            .as_str()
            .is_some_and(|s| s.eq_ignore_ascii_case("ok"));
        if seen_instances.insert(instance.clone()) {
            run_instances.push(instance.clone());
        }
        if seen_algorithms.insert(algorithm.clone()) {
            algorithms.push(algorithm.clone());
        }
        // the first repetition recorded for a pair wins
        cells
            .entry((instance, algorithm))
            .or_insert((row[runtime_col].as_f64(), solved));
    }

    // feature values
    let feats = read_table(&features_path)?;
    let f_inst_col = required_column(&feats, "instance_id")?;
    let f_rep_col = feats.column("repetition");
    let feature_cols: Vec<usize> = (0..feats.attributes.len())
        .filter(|&c| c != f_inst_col && Some(c) != f_rep_col)
        .filter(|&c| feats.attributes[c].kind == AttributeKind::Numeric)
        .collect();
    let feature_names: Vec<String> = feature_cols
        .iter()
        .map(|&c| feats.attributes[c].name.clone())
        .collect();
    let mut feature_rows: HashMap<String, Vec<Option<f64>>> = HashMap::new();
    for row in &feats.rows {
        let instance = cell_text(&row[f_inst_col])
            .ok_or_else(|| Error::InvalidScenario("feature row without instance id".into()))?;
        feature_rows
            .entry(instance)
            .or_insert_with(|| feature_cols.iter().map(|&c| row[c].as_f64()).collect());
    }

    // optional feature costs, summed over feature steps
    let mut cost_rows: Option<HashMap<String, f64>> = None;
    if costs_path.is_file() {
        let costs = read_table(&costs_path)?;
        let c_inst_col = required_column(&costs, "instance_id")?;
        let c_rep_col = costs.column("repetition");
        let mut map = HashMap::new();
        for row in &costs.rows {
            let Some(instance) = cell_text(&row[c_inst_col]) else {
                continue;
            };
            let total: f64 = row
                .iter()
                .enumerate()
                .filter(|(c, _)| *c != c_inst_col && Some(*c) != c_rep_col)
                .filter_map(|(_, v)| v.as_f64())
                .sum();
            map.entry(instance).or_insert(total);
        }
        cost_rows = Some(map);
    }

    let mut instance_ids = Vec::new();
    for id in &run_instances {
        if feature_rows.contains_key(id) {
            instance_ids.push(id.clone());
        } else {
            warn!("instance `{id}` has runs but no feature values; dropped");
        }
    }
    for id in feature_rows.keys() {
        if !seen_instances.contains(id) {
            warn!("instance `{id}` has feature values but no runs; dropped");
        }
    }

    let mut runtime = Vec::with_capacity(instance_ids.len());
    let mut solved = Vec::with_capacity(instance_ids.len());
    let mut features = Vec::with_capacity(instance_ids.len());
    let mut feature_cost = cost_rows.as_ref().map(|_| Vec::new());
    for id in &instance_ids {
        let mut rt_row = Vec::with_capacity(algorithms.len());
        let mut ok_row = Vec::with_capacity(algorithms.len());
        for alg in &algorithms {
            let missing = || Error::MissingRun {
                instance: id.clone(),
                algorithm: alg.clone(),
            };
            let (time, ok) = *cells.get(&(id.clone(), alg.clone())).ok_or_else(missing)?;
            match (time, ok) {
                (Some(t), true) => {
                    rt_row.push(t);
                    ok_row.push(t <= cutoff);
                }
                (None, true) => return Err(missing()),
                (t, false) => {
                    rt_row.push(t.unwrap_or(cutoff).max(0.0));
                    ok_row.push(false);
                }
            }
        }
        runtime.push(rt_row);
        solved.push(ok_row);
        features.push(feature_rows[id].clone());
        if let (Some(out), Some(map)) = (feature_cost.as_mut(), cost_rows.as_ref()) {
            out.push(map.get(id).copied().unwrap_or(0.0).max(0.0));
        }
    }

    Scenario::new(ScenarioParts {
        name,
        instance_ids,
        algorithm_ids: algorithms,
        runtime,
        solved,
        feature_names,
        features,
        feature_cost,
        cutoff,
    })
}

/// Writes a scenario as an ASlib directory readable by [`load_scenario`].
pub fn write_scenario(scenario: &Scenario, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let description = format!(
        "scenario_id: {}\nperformance_measures:\n  - runtime\nmaximize:\n  - false\nperformance_type:\n  - runtime\nalgorithm_cutoff_time: {}\nalgorithm_cutoff_memory: ?\nfeatures_cutoff_time: ?\nfeatures_cutoff_memory: ?\nfeatures_deterministic:\n{}\nfeatures_stochastic:\nalgorithms_deterministic:\n{}\nalgorithms_stochastic:\nnumber_of_feature_steps: 1\ndefault_steps:\n  - all\n",
        scenario.name,
        scenario.cutoff,
        scenario
            .feature_names
            .iter()
            .map(|f| format!("  - {f}"))
            .collect::<Vec<_>>()
            .join("\n"),
        scenario
            .algorithm_ids
            .iter()
            .map(|a| format!("  - {a}"))
            .collect::<Vec<_>>()
            .join("\n"),
    );
    fs::write(dir.join("description.txt"), description)?;

    let text_attr = |name: &str| Attribute {
        name: name.into(),
        kind: AttributeKind::Text,
    };
    let numeric_attr = |name: &str| Attribute {
        name: name.into(),
        kind: AttributeKind::Numeric,
    };

    let mut runs = RelationTable {
        relation: format!("ALGORITHM_RUNS_{}", scenario.name),
        attributes: vec![
            text_attr("instance_id"),
            numeric_attr("repetition"),
            text_attr("algorithm"),
            numeric_attr("runtime"),
            Attribute {
                name: "runstatus".into(),
                kind: AttributeKind::Nominal(vec!["ok".into(), "timeout".into()]),
            },
        ],
        rows: Vec::new(),
    };
    for (i, id) in scenario.instance_ids.iter().enumerate() {
        for (a, alg) in scenario.algorithm_ids.iter().enumerate() {
            let ok = scenario.is_solved(i, a);
            runs.rows.push(vec![
                Value::Text(id.clone()),
                Value::Number(1.0),
                Value::Text(alg.clone()),
                Value::Number(scenario.runtime(i, a)),
                Value::Text(if ok { "ok" } else { "timeout" }.into()),
            ]);
        }
    }
    fs::write(dir.join("algorithm_runs.arff"), arff::write_arff(&runs))?;

    let mut attributes = vec![text_attr("instance_id"), numeric_attr("repetition")];
    attributes.extend(scenario.feature_names.iter().map(|f| numeric_attr(f)));
    let feats = RelationTable {
        relation: format!("FEATURE_VALUES_{}", scenario.name),
        attributes,
        rows: (0..scenario.n_instances())
            .map(|i| {
                let mut row = vec![
                    Value::Text(scenario.instance_ids[i].clone()),
                    Value::Number(1.0),
                ];
                row.extend(
                    scenario
                        .feature_row(i)
                        .iter()
                        .map(|v| v.map_or(Value::Missing, Value::Number)),
                );
                row
            })
            .collect(),
    };
    fs::write(dir.join("feature_values.arff"), arff::write_arff(&feats))?;

    if let Some(costs) = &scenario.feature_cost {
        let table = RelationTable {
            relation: format!("FEATURE_COSTS_{}", scenario.name),
            attributes: vec![
                text_attr("instance_id"),
                numeric_attr("repetition"),
                numeric_attr("all"),
            ],
            rows: costs
                .iter()
                .zip(&scenario.instance_ids)
                .map(|(c, id)| {
                    vec![
                        Value::Text(id.clone()),
                        Value::Number(1.0),
                        Value::Number(*c),
                    ]
                })
                .collect(),
        };
        fs::write(dir.join("feature_costs.arff"), arff::write_arff(&table))?;
    }
    Ok(())
}
