#include "footprint/pipeline.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>

#include <json.hpp>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "footprint/errors.hpp"
#include "footprint/labeling.hpp"
#include "footprint/rng.hpp"

namespace footprint {

namespace {

using nlohmann::json;

// ---- config (de)serialization -------------------------------------------

json spec_to_json(const DatasetSpec& s) {
    json j;
    j["path"] = s.path;
    j["schema"] = s.schema;
    j["language_filter"] = s.language_filter;
    if (s.timeframe)
        j["timeframe"] = {format_time(s.timeframe->first), format_time(s.timeframe->second)};
    j["buffer_cap"] = s.buffer_cap;
    j["spool_dir"] = s.spool_dir;
    j["track_active_days"] = s.track_active_days;
    return j;
}

DatasetSpec spec_from_json(const json& j) {
    DatasetSpec s;
    s.path = j.value("path", std::string());
    s.schema = j.value("schema", std::string("auto"));
    s.language_filter = j.value("language_filter", std::string());
    if (j.contains("timeframe") && !j["timeframe"].is_null()) {
        const json& tf = j["timeframe"];
        if (!tf.is_array() || tf.size() != 2)
            throw InvalidConfig("timeframe must be [start, end]");
        auto lo = parse_time(tf[0].get<std::string>());
        auto hi = parse_time(tf[1].get<std::string>());
        if (!lo || !hi) throw InvalidConfig("unparseable timeframe bound");
        s.timeframe = {*lo, *hi};
    }
    s.buffer_cap = j.value("buffer_cap", std::size_t{200000});
    s.spool_dir = j.value("spool_dir", std::string());
    s.track_active_days = j.value("track_active_days", false);
    return s;
}

json train_to_json(const TrainConfig& t) {
    json j;
    j["n_trees"] = t.n_trees;
    j["max_depth"] = t.max_depth ? json(*t.max_depth) : json(nullptr);
    j["min_samples_split"] = t.min_samples_split;
    j["features_per_split"] = t.features_per_split;
    j["bootstrap"] = t.bootstrap;
    j["class_weighting"] =
        t.class_weighting == ClassWeighting::InverseFrequency ? "inverse-frequency" : "none";
    return j;
}

TrainConfig train_from_json(const json& j) {
    TrainConfig t;
    t.n_trees = j.value("n_trees", 100);
    if (j.contains("max_depth") && !j["max_depth"].is_null())
        t.max_depth = j["max_depth"].get<int>();
    t.min_samples_split = j.value("min_samples_split", 2);
    t.features_per_split = j.value("features_per_split", 0);
    t.bootstrap = j.value("bootstrap", true);
    std::string w = j.value("class_weighting", std::string("none"));
    if (w == "none") {
        t.class_weighting = ClassWeighting::None;
    } else if (w == "inverse-frequency") {
        t.class_weighting = ClassWeighting::InverseFrequency;
    } else {
        throw InvalidConfig("unknown class weighting: " + w);
    }
    return t;
}

Category category_or_throw(const std::string& token, const std::string& where) {
    auto c = category_from_string(token);
    if (!c || *c == Category::Uncategorized)
        throw InvalidConfig("unknown category in " + where + ": " + token);
    return *c;
}

// ---- small utilities ------------------------------------------------------

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UnreadableFile("cannot write " + path);
    out << content;
    if (!out) throw UnreadableFile("short write to " + path);
}

void require_exists(const std::string& path, const std::string& what) {
    if (path.empty()) return;
    if (!std::filesystem::exists(path))
        throw UnreadableFile(what + " does not exist: " + path);
}

class DirectoryLock {
public:
    explicit DirectoryLock(const std::string& dir)
        : path_((std::filesystem::path(dir) / ".lock").string()) {
        std::FILE* f = std::fopen(path_.c_str(), "wx");
        if (!f)
            throw InvalidConfig("output directory is already locked (" + path_ +
                                " exists; remove it if the owning run is gone)");
        std::fprintf(f, "pid %ld\n", static_cast<long>(::getpid()));
        std::fclose(f);
    }
    ~DirectoryLock() { std::remove(path_.c_str()); }
    DirectoryLock(const DirectoryLock&) = delete;
    DirectoryLock& operator=(const DirectoryLock&) = delete;

private:
    std::string path_;
};

class StageTimer {
public:
    StageTimer() : t0_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

private:
    std::chrono::steady_clock::time_point t0_;
};

std::string fixed3(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

// ---- in-memory stage state ------------------------------------------------

struct PipelineState {
    Dataset dataset;
    IngestSummary ingest;
    SeedLabelSet seeds;
    SeedLabelSet final_labels;
    PropagationReport propagation;
    FeatureCatalog catalog;  // selected subset, post screening
    std::vector<std::string> selected;
    std::vector<std::pair<std::string, std::string>> dropped;
    CorrelationReport correlation;
    std::vector<FeatureVector> rows;  // normalized, selected columns only
    std::map<std::string, Category> labels_map;
};

IngestOptions options_from_spec(const DatasetSpec& spec) {
    IngestOptions opt;
    opt.language_filter = spec.language_filter;
    opt.timeframe = spec.timeframe;
    opt.buffer_cap = spec.buffer_cap;
    opt.spool_dir = spec.spool_dir;
    opt.track_active_days = spec.track_active_days;
    return opt;
}

void stage_ingest(const PipelineConfig& config, PipelineState& state, StageReport& report) {
    ParseResult parsed = parse_archive(config.dataset.path, config.dataset.schema,
                                       options_from_spec(config.dataset));
    state.dataset = std::move(parsed.dataset);
    state.ingest = std::move(parsed.summary);
    report.input_count = state.ingest.row_count;
    report.output_count = state.dataset.tweet_count();
    for (const auto& [reason, n] : state.ingest.rejects)
        report.warnings.push_back("rejected " + std::to_string(n) + " rows: " + reason);
    for (const auto& [reason, n] : state.ingest.warnings)
        report.warnings.push_back(std::to_string(n) + " rows: " + reason);
    if (state.dataset.empty()) throw EmptyDataset("no tweets survived ingest");
}

void stage_label(const PipelineConfig& config, PipelineState& state, StageReport& report) {
    report.input_count = state.dataset.accounts.size();
    state.seeds = build_seed_labels(state.dataset, config, &report.warnings);
    report.output_count = state.seeds.size();
}

void stage_propagate(const PipelineConfig& config, PipelineState& state, StageReport& report) {
    report.input_count = state.dataset.accounts.size() - state.seeds.size();
    state.propagation = propagate(state.dataset, state.seeds, config.propagation);
    state.final_labels = state.seeds;
    for (const auto& [id, outcome] : state.propagation.assigned)
        state.final_labels.set(id, outcome.category, Provenance::Propagated);
    report.output_count = state.propagation.assigned.size();
    for (int idx : state.propagation.skipped_subspans)
        report.warnings.push_back("subspan " + std::to_string(idx) +
                                  " skipped: no categorized activity");

    // Count reconciliation is a hard invariant, not a report line.
    if (state.seeds.size() + state.propagation.assigned.size() != state.final_labels.size())
        throw StageError("census mismatch: seed + propagated != final labeled");
    if (state.final_labels.size() + state.propagation.still_uncategorized.size() !=
        state.dataset.accounts.size())
        throw StageError("census mismatch: labeled + uncategorized != accounts");
}

void stage_featurize(const PipelineConfig& config, PipelineState& state, StageReport& report) {
    report.input_count = state.dataset.accounts.size();
    FeatureStageResult built = build_features(state.dataset, config);
    state.selected = std::move(built.selected);
    state.dropped = std::move(built.dropped);
    state.correlation = std::move(built.correlation);
    state.rows = std::move(built.rows);
    for (const auto& [name, reason] : state.dropped)
        report.warnings.push_back("dropped feature " + name + " (" + reason + ")");
    state.catalog = catalog_for(state.selected);

    state.labels_map.clear();
    for (const auto& [id, label] : state.final_labels.entries())
        state.labels_map.emplace(id, label.category);
    report.output_count = state.rows.size();
}

std::vector<LabeledSample> training_samples(const PipelineState& state) {
    std::vector<LabeledSample> samples;
    for (const FeatureVector& row : state.rows) {
        auto it = state.labels_map.find(row.account_id);
        if (it == state.labels_map.end() || row.degenerate) continue;
        LabeledSample s;
        s.account_id = row.account_id;
        s.values = row.values;
        s.label = it->second;
        samples.push_back(std::move(s));
    }
    return samples;
}

std::string predictions_csv(const std::vector<Prediction>& predictions) {
    std::string out = "account_id,category\n";
    for (const Prediction& p : predictions) {
        out += p.account_id;
        out += ',';
        out += to_string(p.category);
        out += '\n';
    }
    return out;
}

json census_json(const LabelCensus& census) {
    json j;
    for (int c = 0; c < kCategoryCount; ++c)
        j[to_string(kCategories[static_cast<std::size_t>(c)])] =
            census.per_category[static_cast<std::size_t>(c)];
    j["labeled"] = census.labeled;
    j["uncategorized"] = census.uncategorized;
    return j;
}

json stage_json(const StageReport& s, bool with_seconds) {
    json j;
    j["name"] = s.name;
    j["input_count"] = s.input_count;
    j["output_count"] = s.output_count;
    j["warnings"] = s.warnings;
    if (with_seconds) j["seconds"] = s.seconds;
    return j;
}

}  // namespace

// ---- config ---------------------------------------------------------------

std::string PipelineConfig::to_json() const {
    json j;
    j["dataset"] = spec_to_json(dataset);
    j["labels_path"] = labels_path;
    j["rules_path"] = rules_path;
    j["footprint_path"] = footprint_path;
    j["use_description_rules"] = use_description_rules;
    j["use_footprint_table"] = use_footprint_table;
    j["footprint_min_hits"] = footprint_min_hits;
    j["propagation"] = {
        {"subspan_months", propagation.subspan_months},
        {"vector_mode", propagation.vector_mode == VectorMode::Binary ? "binary" : "counts"},
        {"fixpoint", propagation.fixpoint},
        {"max_rounds", propagation.max_rounds},
        {"low_confidence_floor", propagation.low_confidence_floor},
    };
    j["features"] = features;
    j["target_feature_count"] = target_feature_count;
    j["normalize"] = normalize == NormalizeAxis::Column ? "column" : "row";
    j["train"] = train_to_json(train);
    j["k"] = k;
    j["seed"] = seed;
    j["out_dir"] = out_dir;
    if (validation) {
        json v;
        v["dataset"] = spec_to_json(validation->dataset);
        v["name"] = validation->name;
        json mapping = json::array();
        for (const auto& [cat, token] : validation->mapping)
            mapping.push_back({to_string(cat), token});
        v["mapping"] = mapping;
        v["denominator"] =
            validation->denominator == AgreementDenominator::IntersectionSize
                ? "intersection-size"
                : "reference-size";
        v["recheck_path"] = validation->recheck_path;
        j["validation"] = v;
    }
    return j.dump(2);
}

PipelineConfig PipelineConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw InvalidConfig(std::string("config is not valid JSON: ") + e.what());
    }
    PipelineConfig c;
    if (j.contains("dataset")) c.dataset = spec_from_json(j["dataset"]);
    c.labels_path = j.value("labels_path", std::string());
    c.rules_path = j.value("rules_path", std::string());
    c.footprint_path = j.value("footprint_path", std::string());
    c.use_description_rules = j.value("use_description_rules", true);
    c.use_footprint_table = j.value("use_footprint_table", true);
    c.footprint_min_hits = j.value("footprint_min_hits", 2);
    if (j.contains("propagation")) {
        const json& p = j["propagation"];
        c.propagation.subspan_months = p.value("subspan_months", 6);
        std::string mode = p.value("vector_mode", std::string("counts"));
        if (mode == "counts") {
            c.propagation.vector_mode = VectorMode::Counts;
        } else if (mode == "binary") {
            c.propagation.vector_mode = VectorMode::Binary;
        } else {
            throw InvalidConfig("unknown vector mode: " + mode);
        }
        c.propagation.fixpoint = p.value("fixpoint", false);
        c.propagation.max_rounds = p.value("max_rounds", 10);
        c.propagation.low_confidence_floor = p.value("low_confidence_floor", 0.05);
    }
    if (j.contains("features")) c.features = j["features"].get<std::vector<std::string>>();
    c.target_feature_count = j.value("target_feature_count", 8);
    std::string axis = j.value("normalize", std::string("row"));
    if (axis == "row") {
        c.normalize = NormalizeAxis::Row;
    } else if (axis == "column") {
        c.normalize = NormalizeAxis::Column;
    } else {
        throw InvalidConfig("unknown normalize axis: " + axis);
    }
    if (j.contains("train")) c.train = train_from_json(j["train"]);
    c.k = j.value("k", 5);
    c.seed = j.value("seed", std::uint64_t{1});
    c.out_dir = j.value("out_dir", std::string("footprint-run"));
    if (j.contains("validation") && !j["validation"].is_null()) {
        const json& v = j["validation"];
        ValidationSpec spec;
        if (v.contains("dataset")) spec.dataset = spec_from_json(v["dataset"]);
        spec.name = v.value("name", std::string("reference"));
        if (v.contains("mapping")) {
            for (const json& pair : v["mapping"]) {
                if (!pair.is_array() || pair.size() != 2)
                    throw InvalidConfig("mapping entries must be [category, token]");
                spec.mapping.emplace_back(
                    category_or_throw(pair[0].get<std::string>(), "validation mapping"),
                    pair[1].get<std::string>());
            }
        }
        std::string den = v.value("denominator", std::string("reference-size"));
        if (den == "reference-size") {
            spec.denominator = AgreementDenominator::ReferenceCategorySize;
        } else if (den == "intersection-size") {
            spec.denominator = AgreementDenominator::IntersectionSize;
        } else {
            throw InvalidConfig("unknown agreement denominator: " + den);
        }
        spec.recheck_path = v.value("recheck_path", std::string());
        c.validation = std::move(spec);
    }
    return c;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UnreadableFile("cannot open config: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json(text);
}

// ---- reports ----------------------------------------------------------------

LabelCensus census_of(const SeedLabelSet& labels, std::size_t account_count) {
    LabelCensus census;
    for (const auto& [id, label] : labels.entries())
        census.per_category[static_cast<std::size_t>(category_index(label.category))] += 1;
    census.labeled = labels.size();
    census.uncategorized = account_count - labels.size();
    return census;
}

std::string RunReport::to_json() const {
    json j;
    json stage_list = json::array();
    for (const StageReport& s : stages) stage_list.push_back(stage_json(s, false));
    j["stages"] = stage_list;
    j["ingest"] = json::parse(ingest.to_json());
    j["seed_census"] = census_json(seed_census);
    j["final_census"] = census_json(final_census);
    j["propagated"] = propagated;
    j["selected_features"] = selected_features;
    json dropped_list = json::array();
    for (const auto& [name, reason] : dropped_features)
        dropped_list.push_back({name, reason});
    j["dropped_features"] = dropped_list;
    j["cross_validation"] = json::parse(cv.to_json());
    if (agreement) j["agreement"] = json::parse(agreement->to_json());
    if (recheck) j["manual_recheck"] = json::parse(recheck->to_json());
    return j.dump(2);
}

std::string RunReport::to_markdown() const {
    std::string md = "# Pipeline run\n\n## Stages\n\n";
    md += "| stage | in | out | warnings |\n|---|---:|---:|---:|\n";
    for (const StageReport& s : stages) {
        md += "| " + s.name + " | " + std::to_string(s.input_count) + " | " +
              std::to_string(s.output_count) + " | " + std::to_string(s.warnings.size()) +
              " |\n";
    }
    md += "\n## Label census\n\n| category | seeded | final |\n|---|---:|---:|\n";
    for (int c = 0; c < kCategoryCount; ++c) {
        auto idx = static_cast<std::size_t>(c);
        md += "| " + std::string(to_string(kCategories[idx])) + " | " +
              std::to_string(seed_census.per_category[idx]) + " | " +
              std::to_string(final_census.per_category[idx]) + " |\n";
    }
    md += "| (labeled) | " + std::to_string(seed_census.labeled) + " | " +
          std::to_string(final_census.labeled) + " |\n";
    md += "| (uncategorized) | " + std::to_string(seed_census.uncategorized) + " | " +
          std::to_string(final_census.uncategorized) + " |\n";
    md += "\n## Cross-validated metrics\n\n";
    md += cv.pooled.to_markdown();
    if (agreement) {
        md += "\n## Cross-dataset agreement (" + agreement->reference_name + ")\n\n";
        md += "matched " + std::to_string(agreement->matched) + " of " +
              std::to_string(agreement->reference_size) + " reference accounts (intersection " +
              std::to_string(agreement->intersection) + "): agreement " +
              fixed3(agreement->agreement) + "\n";
    }
    if (recheck) {
        md += "\n## Manual recheck\n\n";
        md += std::to_string(recheck->correct) + " of " + std::to_string(recheck->covered) +
              " rechecked accounts agree: accuracy " + fixed3(recheck->accuracy) + "\n";
    }
    return md;
}

std::string RunReport::meta_json() const {
    json j;
    json stage_list = json::array();
    double total = 0;
    for (const StageReport& s : stages) {
        stage_list.push_back(stage_json(s, true));
        total += s.seconds;
    }
    j["stages"] = stage_list;
    j["total_seconds"] = total;
#ifdef _OPENMP
    j["max_threads"] = omp_get_max_threads();
#else
    j["max_threads"] = 1;
#endif
    j["finished_at"] = format_time(static_cast<UtcTime>(std::time(nullptr)));
    return j.dump(2);
}

// ---- orchestration ----------------------------------------------------------

RunReport run_pipeline(const PipelineConfig& config) {
    // Fail before any stage runs if a referenced input is missing.
    require_exists(config.dataset.path, "dataset archive");
    require_exists(config.labels_path, "coded labels file");
    require_exists(config.rules_path, "rules file");
    require_exists(config.footprint_path, "footprint table");
    if (config.validation) {
        require_exists(config.validation->dataset.path, "validation archive");
        require_exists(config.validation->recheck_path, "recheck file");
    }
    if (config.k < 2) throw InvalidConfig("k must be >= 2");

    std::filesystem::create_directories(config.out_dir);
    DirectoryLock lock(config.out_dir);
    const std::filesystem::path out(config.out_dir);

    RunReport report;
    PipelineState state;

    {
        StageTimer timer;
        StageReport stage;
        stage.name = "ingest";
        stage_ingest(config, state, stage);
        stage.seconds = timer.seconds();
        report.ingest = state.ingest;
        write_file((out / "ingest_summary.json").string(), state.ingest.to_json());
        report.stages.push_back(std::move(stage));
    }
    {
        StageTimer timer;
        StageReport stage;
        stage.name = "label";
        stage_label(config, state, stage);
        stage.seconds = timer.seconds();
        report.seed_census = census_of(state.seeds, state.dataset.accounts.size());
        save_seed_labels(state.seeds, (out / "labels_seed.csv").string());
        report.stages.push_back(std::move(stage));
    }
    {
        StageTimer timer;
        StageReport stage;
        stage.name = "propagate";
        stage_propagate(config, state, stage);
        stage.seconds = timer.seconds();
        report.final_census = census_of(state.final_labels, state.dataset.accounts.size());
        report.propagated = state.propagation.assigned.size();
        write_file((out / "propagation.json").string(), state.propagation.to_json());
        save_seed_labels(state.final_labels, (out / "labels_final.csv").string());
        report.stages.push_back(std::move(stage));
    }
    {
        StageTimer timer;
        StageReport stage;
        stage.name = "featurize";
        stage_featurize(config, state, stage);
        stage.seconds = timer.seconds();
        report.selected_features = state.selected;
        report.dropped_features = state.dropped;
        write_file((out / "correlation.json").string(), state.correlation.to_json());
        write_file((out / "features.csv").string(),
                   feature_matrix_csv(state.rows, state.selected, &state.labels_map));
        report.stages.push_back(std::move(stage));
    }

    ForestModel model;
    std::map<std::string, Category> predicted;
    {
        StageTimer timer;
        StageReport stage;
        stage.name = "train";
        std::vector<LabeledSample> samples = training_samples(state);
        stage.input_count = samples.size();
        TrainConfig tc = config.train;
        tc.seed = config.seed;
        report.cv = cross_validate(samples, tc, config.k, config.seed);
        model = train_forest(samples, tc);
        model.feature_names = state.selected;
        std::vector<Prediction> predictions = predict_all(model, state.rows);
        for (const Prediction& p : predictions) predicted.emplace(p.account_id, p.category);
        stage.output_count = predictions.size();
        stage.seconds = timer.seconds();
        write_file((out / "model.json").string(), model.to_json());
        write_file((out / "metrics.json").string(), report.cv.to_json());
        write_file((out / "metrics.md").string(), report.cv.pooled.to_markdown());
        write_file((out / "predictions.csv").string(), predictions_csv(predictions));
        report.stages.push_back(std::move(stage));
    }

    if (config.validation) {
        StageTimer timer;
        StageReport stage;
        stage.name = "validate";
        const ValidationSpec& spec = *config.validation;
        json artifact;

        if (!spec.dataset.path.empty()) {
            ParseResult ref = parse_archive(spec.dataset.path, spec.dataset.schema,
                                            options_from_spec(spec.dataset));
            std::map<std::string, std::string> tokens =
                extract_account_categories(spec.dataset.path, spec.dataset.schema);
            std::vector<FeatureVector> ref_rows =
                extract_all_features(ref.dataset, state.catalog);
            normalize_features(ref_rows, config.normalize);
            std::vector<Prediction> ref_pred = predict_all(model, ref_rows);
            std::map<std::string, Category> ref_map;
            for (const Prediction& p : ref_pred) ref_map.emplace(p.account_id, p.category);
            std::vector<std::pair<Category, std::string>> mapping = spec.mapping;
            if (mapping.empty()) mapping.emplace_back(Category::FakeNews, "NewsFeed");
            report.agreement = cross_dataset_agreement(ref_map, tokens, mapping,
                                                       spec.denominator, spec.name);
            stage.input_count = tokens.size();
            stage.output_count = report.agreement->intersection;
            artifact["agreement"] = json::parse(report.agreement->to_json());
        }
        if (!spec.recheck_path.empty()) {
            SeedLabelSet coded = load_seed_labels(spec.recheck_path);
            std::map<std::string, Category> coded_map;
            for (const auto& [id, label] : coded.entries())
                coded_map.emplace(id, label.category);
            report.recheck = manual_recheck_accuracy(predicted, coded_map);
            artifact["manual_recheck"] = json::parse(report.recheck->to_json());
        }
        stage.seconds = timer.seconds();
        write_file((out / "validation.json").string(), artifact.dump(2));
        report.stages.push_back(std::move(stage));
    }

    write_file((out / "run_report.json").string(), report.to_json());
    write_file((out / "run_report.md").string(), report.to_markdown());
    write_file((out / "run_meta.json").string(), report.meta_json());
    return report;
}

// ---- classifier comparison ---------------------------------------------------

std::string ComparisonTable::to_json() const {
    json j = json::array();
    for (const ComparisonRow& r : rows) {
        json row;
        row["kind"] = r.kind;
        row["implemented"] = r.implemented;
        if (r.implemented) {
            row["mean_accuracy"] = r.mean_accuracy;
            row["fold_accuracies"] = r.fold_accuracies;
        }
        if (!r.note.empty()) row["note"] = r.note;
        j.push_back(row);
    }
    return j.dump(2);
}

std::string ComparisonTable::to_markdown() const {
    std::string md = "| classifier | mean accuracy | note |\n|---|---:|---|\n";
    for (const ComparisonRow& r : rows) {
        md += "| " + r.kind + " | ";
        md += r.implemented ? fixed3(r.mean_accuracy) : std::string("-");
        md += " | " + r.note + " |\n";
    }
    return md;
}

ComparisonTable compare_classifiers(const PipelineConfig& config) {
    std::vector<LabeledSample> samples;
    const std::filesystem::path features_csv =
        std::filesystem::path(config.out_dir) / "features.csv";
    if (std::filesystem::exists(features_csv)) {
        samples = samples_from_table(load_feature_matrix(features_csv.string()));
    } else {
        require_exists(config.dataset.path, "dataset archive");
        PipelineState state;
        StageReport scratch;
        stage_ingest(config, state, scratch);
        stage_label(config, state, scratch);
        stage_propagate(config, state, scratch);
        stage_featurize(config, state, scratch);
        samples = training_samples(state);
    }

    static const char* kKinds[] = {"random-forest", "decision-tree", "knn",
                                   "logistic-regression", "naive-bayes", "svm"};
    ComparisonTable table;
    for (const char* kind : kKinds) {
        ComparisonRow row;
        row.kind = kind;
        try {
            CrossValidationReport cv;
            if (std::string(kind) == "random-forest") {
                TrainConfig tc = config.train;
                tc.seed = config.seed;
                cv = cross_validate(samples, tc, config.k, config.seed);
            } else {
                cv = cross_validate_with(
                    samples, config.k, config.seed,
                    [&](const std::vector<LabeledSample>& train, std::uint64_t fold_seed) {
                        BaselineParams params;
                        params.seed = fold_seed;
                        return train_baseline(kind, train, params);
                    });
            }
            row.mean_accuracy = cv.mean_accuracy;
            row.fold_accuracies = cv.fold_accuracies;
        } catch (const UnsupportedKind&) {
            row.implemented = false;
            row.mean_accuracy = -1;
            row.note = "not implemented";
        }
        table.rows.push_back(std::move(row));
    }
    std::stable_sort(table.rows.begin(), table.rows.end(),
                     [](const ComparisonRow& a, const ComparisonRow& b) {
                         if (a.implemented != b.implemented) return a.implemented;
                         if (a.mean_accuracy != b.mean_accuracy)
                             return a.mean_accuracy > b.mean_accuracy;
                         return a.kind < b.kind;
                     });
    return table;
}

// ---- artifact loading ----------------------------------------------------------

FeatureTable load_feature_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UnreadableFile("cannot open feature matrix: " + path);
    FeatureTable table;
    std::string line;
    if (!std::getline(in, line)) throw SchemaMismatch("empty feature matrix");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::vector<std::string> header;
    std::size_t pos = 0;
    while (pos <= line.size()) {
        std::size_t comma = line.find(',', pos);
        if (comma == std::string::npos) comma = line.size();
        header.push_back(line.substr(pos, comma - pos));
        pos = comma + 1;
    }
    if (header.empty() || header.front() != "account_id")
        throw SchemaMismatch("feature matrix must start with account_id");
    bool has_category = !header.empty() && header.back() == "category";
    table.names.assign(header.begin() + 1, header.end() - (has_category ? 1 : 0));
    if (table.names.empty()) throw SchemaMismatch("feature matrix has no feature columns");

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        pos = 0;
        while (pos <= line.size()) {
            std::size_t comma = line.find(',', pos);
            if (comma == std::string::npos) comma = line.size();
            cells.push_back(line.substr(pos, comma - pos));
            pos = comma + 1;
        }
        if (cells.size() != header.size())
            throw SchemaMismatch("feature matrix row " + std::to_string(line_no) +
                                 " has " + std::to_string(cells.size()) + " cells, expected " +
                                 std::to_string(header.size()));
        FeatureVector row;
        row.account_id = cells.front();
        for (std::size_t i = 0; i < table.names.size(); ++i) {
            char* endp = nullptr;
            const std::string& cell = cells[i + 1];
            double v = std::strtod(cell.c_str(), &endp);
            if (endp == cell.c_str() || *endp != '\0')
                throw SchemaMismatch("feature matrix row " + std::to_string(line_no) +
                                     ": bad number '" + cell + "'");
            row.values.push_back(v);
        }
        if (has_category) {
            auto cat = category_from_string(cells.back());
            if (!cat)
                throw UnknownCategoryToken("feature matrix row " + std::to_string(line_no) +
                                           ": " + cells.back());
            if (*cat != Category::Uncategorized) table.labels.emplace(row.account_id, *cat);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

SeedLabelSet build_seed_labels(const Dataset& dataset, const PipelineConfig& config,
                               std::vector<std::string>* warnings) {
    SeedLabelSet seeds;
    if (!config.labels_path.empty()) {
        SeedLabelSet coded = load_seed_labels(config.labels_path);
        for (const auto& [id, label] : coded.entries()) {
            if (!dataset.accounts.count(id)) {
                if (warnings) warnings->push_back("coded label for unseen account: " + id);
                continue;
            }
            seeds.set(id, label.category, label.provenance);
        }
    }
    if (config.use_description_rules) {
        const std::vector<DescriptionRule> own =
            config.rules_path.empty() ? std::vector<DescriptionRule>()
                                      : load_rules(config.rules_path);
        const std::vector<DescriptionRule>& rules =
            config.rules_path.empty() ? default_rules() : own;
        for (const auto& [id, profile] : dataset.accounts) {
            if (profile.is_hashed || !profile.description) continue;
            auto cat = label_from_description(*profile.description, rules);
            if (cat) seeds.set(id, *cat, Provenance::DescriptionRule);
        }
    }
    if (config.use_footprint_table) {
        const HashtagFootprintTable own = config.footprint_path.empty()
                                              ? HashtagFootprintTable()
                                              : load_footprint_table(config.footprint_path);
        const HashtagFootprintTable& table =
            config.footprint_path.empty() ? default_footprint_table() : own;
        auto hits = footprint_labels(dataset, table, config.footprint_min_hits, seeds);
        for (const auto& [id, cat] : hits) seeds.set(id, cat, Provenance::HashtagFootprint);
    }
    return seeds;
}

FeatureStageResult build_features(const Dataset& dataset, const PipelineConfig& config) {
    FeatureCatalog full = config.dataset.track_active_days ? FeatureCatalog::with_timing()
                                                           : FeatureCatalog::defaults();
    if (!config.features.empty()) full = full.subset(config.features);

    std::vector<FeatureVector> raw = extract_all_features(dataset, full);
    FeatureStageResult result;
    result.correlation = pearson_matrix(raw, full.names());
    SelectionResult sel = select_features(result.correlation,
                                          static_cast<std::size_t>(config.target_feature_count));
    result.selected = std::move(sel.selected);
    result.dropped = std::move(sel.dropped);

    // Re-slice the raw matrix to the surviving columns, then normalize.
    std::vector<std::size_t> keep;
    const std::vector<std::string> names = full.names();
    for (const std::string& name : result.selected)
        keep.push_back(static_cast<std::size_t>(
            std::find(names.begin(), names.end(), name) - names.begin()));
    result.rows.reserve(raw.size());
    for (const FeatureVector& r : raw) {
        FeatureVector v;
        v.account_id = r.account_id;
        v.degenerate = r.degenerate;
        v.values.reserve(keep.size());
        for (std::size_t k : keep) v.values.push_back(r.values[k]);
        result.rows.push_back(std::move(v));
    }
    normalize_features(result.rows, config.normalize);
    return result;
}

FeatureCatalog catalog_for(const std::vector<std::string>& names) {
    try {
        return FeatureCatalog::defaults().subset(names);
    } catch (const InvalidConfig&) {
        return FeatureCatalog::with_timing().subset(names);
    }
}

std::vector<LabeledSample> samples_from_table(const FeatureTable& table) {
    std::vector<LabeledSample> samples;
    for (const FeatureVector& row : table.rows) {
        auto it = table.labels.find(row.account_id);
        if (it == table.labels.end()) continue;
        LabeledSample s;
        s.account_id = row.account_id;
        s.values = row.values;
        s.label = it->second;
        samples.push_back(std::move(s));
    }
    return samples;
}

}  // namespace footprint
